//! Penalized fitting: an ADMM loop whose smooth subproblem is solved by
//! Newton-Raphson and whose fusion subproblem is a group lasso solved by
//! block coordinate descent.
//!
//! The estimator minimizes the negative log pseudo-likelihood plus a
//! weighted sum of Euclidean norms of successive parameter differences.
//! A slack copy of the trajectory carries the penalty; the slack is
//! reparameterized as an intercept row plus weighted cumulative jumps, so
//! the fusion subproblem becomes a group lasso over the jump rows. The
//! augmentation weight is rescaled from the primal/dual residuals after
//! every iteration, and the loop stops when the relative change of the
//! log pseudo-likelihood falls below tolerance.

use crate::error::{Error, Result};
use crate::net::NetworkSeries;
use crate::pseudolik::{ParamTrajectory, fit_terms, loglik_of_matrix};
use crate::stats::{ChangeStatBlocks, StatisticSpec, build_change_stat_blocks};
use ndarray::{Array1, Array2};

/// Knobs for one penalized fit. Defaults follow the reference protocol:
/// augmentation weight 10, 200 outer iterations, 20 Newton and 20 group
/// lasso iterations inside each, relative log-likelihood tolerance 1e-7,
/// Newton step tolerance 1e-3.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Fusion penalty weight (lambda).
    pub lambda: f64,
    /// Initial augmentation weight (alpha).
    pub alpha0: f64,
    /// Outer ADMM iteration cap.
    pub admm_iters: usize,
    /// Newton iteration cap per outer iteration.
    pub newton_iters: usize,
    /// Group-lasso sweep cap per outer iteration.
    pub gl_iters: usize,
    /// Relative log-likelihood change for outer convergence.
    pub admm_tol: f64,
    /// Euclidean step size for Newton convergence.
    pub newton_tol: f64,
    /// First-order optimality tolerance for the group lasso sweeps.
    pub kkt_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            alpha0: 10.0,
            admm_iters: 200,
            newton_iters: 20,
            gl_iters: 20,
            admm_tol: 1e-7,
            newton_tol: 1e-3,
            kkt_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("alpha0", self.alpha0),
            ("admm_tol", self.admm_tol),
            ("newton_tol", self.newton_tol),
            ("kkt_tol", self.kkt_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: match name {
                        "lambda" => "lambda",
                        "alpha0" => "alpha0",
                        "admm_tol" => "admm_tol",
                        "newton_tol" => "newton_tol",
                        _ => "kkt_tol",
                    },
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.admm_iters == 0 || self.newton_iters == 0 || self.gl_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "iterations",
                reason: "iteration counts must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Position-dependent fusion weights d_i = sqrt(tau / (i (tau - i))) for
/// i = 1..tau-1, and the implicit cumulative design they induce: slack
/// row r equals the intercept plus the weighted sum of all jumps before r.
#[derive(Clone, Debug)]
pub struct PositionWeights {
    weights: Vec<f64>,
    tau: usize,
}

pub fn position_weights(tau: usize) -> Result<PositionWeights> {
    if tau < 2 {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("need at least 2 transitions, got {tau}"),
        });
    }
    let t = tau as f64;
    let weights = (1..tau)
        .map(|i| {
            let fi = i as f64;
            (t / (fi * (t - fi))).sqrt()
        })
        .collect();
    Ok(PositionWeights { weights, tau })
}

impl PositionWeights {
    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Weight d_i for the i-th jump (0-based index i-1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Squared Euclidean norm of design column i (0-based): the weight
    /// squared times the number of rows the jump reaches.
    pub fn col_sq_norm(&self, i: usize) -> f64 {
        let reach = (self.tau - i - 1) as f64;
        self.weights[i] * self.weights[i] * reach
    }

    /// Slack matrix from intercept and jump rows: running prefix sums.
    pub fn compose(&self, intercept: &Array1<f64>, jumps: &Array2<f64>) -> Array2<f64> {
        let p = intercept.len();
        let mut out = Array2::zeros((self.tau, p));
        let mut acc: Vec<f64> = intercept.to_vec();
        for r in 0..self.tau {
            for k in 0..p {
                out[[r, k]] = acc[k];
            }
            if r + 1 < self.tau {
                for k in 0..p {
                    acc[k] += self.weights[r] * jumps[[r, k]];
                }
            }
        }
        out
    }
}

/// One outer iteration's record.
#[derive(Clone, Copy, Debug)]
pub struct AdmmIterRecord {
    pub loglik: f64,
    pub r_primal: f64,
    pub r_dual: f64,
    /// Augmentation weight in force after this iteration's rescale.
    pub alpha: f64,
}

/// Final solver state: trajectory, fusion variables, scaled dual, and the
/// per-iteration history.
#[derive(Clone, Debug)]
pub struct AdmmState {
    pub params: ParamTrajectory,
    pub intercept: Array1<f64>,
    pub jumps: Array2<f64>,
    pub scaled_dual: Array2<f64>,
    pub alpha: f64,
    pub history: Vec<AdmmIterRecord>,
    pub converged: bool,
    /// Times the divergence guard had to back off a Newton step.
    pub guard_events: usize,
}

impl AdmmState {
    /// Log pseudo-likelihood at the returned trajectory.
    pub fn final_loglik(&self) -> Option<f64> {
        self.history.last().map(|r| r.loglik)
    }

    /// Reconstructed slack matrix.
    pub fn slack(&self) -> Result<Array2<f64>> {
        let pw = position_weights(self.params.tau())?;
        Ok(pw.compose(&self.intercept, &self.jumps))
    }
}

// ---- Newton step ----------------------------------------------------

/// Solve (A + extra jitter on failure) x = b for a symmetric positive
/// definite A given in row-major order; in-place Cholesky, p is tiny.
fn spd_solve(a: &mut [f64], p: usize, b: &[f64]) -> Result<Vec<f64>> {
    match cholesky_in_place(a, p) {
        Ok(()) => {}
        Err(_) => {
            // roundoff can spoil definiteness; one jittered retry
            let trace: f64 = (0..p).map(|k| a[k * p + k]).sum();
            let jitter = 1e-8 * (1.0 + trace / p as f64);
            for k in 0..p {
                a[k * p + k] += jitter;
            }
            cholesky_in_place(a, p).map_err(|_| Error::SolveFailed {
                context: "regularized Newton system",
            })?;
        }
    }
    // forward then backward substitution with L in the lower triangle
    let mut x = b.to_vec();
    for i in 0..p {
        let mut s = x[i];
        for j in 0..i {
            s -= a[i * p + j] * x[j];
        }
        x[i] = s / a[i * p + i];
    }
    for i in (0..p).rev() {
        let mut s = x[i];
        for j in (i + 1)..p {
            s -= a[j * p + i] * x[j];
        }
        x[i] = s / a[i * p + i];
    }
    Ok(x)
}

fn cholesky_in_place(a: &mut [f64], p: usize) -> std::result::Result<(), ()> {
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(());
                }
                a[i * p + i] = s.sqrt();
            } else {
                a[i * p + j] = s / a[j * p + j];
            }
        }
    }
    Ok(())
}

fn newton_minimize(
    start: &Array2<f64>,
    blocks: &ChangeStatBlocks,
    slack: &Array2<f64>,
    dual: &Array2<f64>,
    alpha: f64,
    iters: usize,
    tol: f64,
    step_scale: f64,
) -> Result<Array2<f64>> {
    let tau = blocks.tau();
    let p = blocks.p();
    let mut theta = start.clone();
    for _ in 0..iters {
        let fits = fit_terms(&theta.view(), blocks, true, false);
        let mut step_sq = 0.0;
        for (t, fit) in fits.iter().enumerate() {
            let mut a = fit.hess.clone();
            for k in 0..p {
                a[k * p + k] += alpha;
            }
            let rhs: Vec<f64> = (0..p)
                .map(|k| -fit.grad[k] + alpha * (theta[[t, k]] - slack[[t, k]] + dual[[t, k]]))
                .collect();
            let delta = spd_solve(&mut a, p, &rhs)?;
            for k in 0..p {
                let d = step_scale * delta[k];
                theta[[t, k]] -= d;
                step_sq += d * d;
            }
        }
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "Newton iterate",
            });
        }
        if step_sq.sqrt() < tol {
            break;
        }
    }
    Ok(theta)
}

/// Minimize the augmented smooth subproblem in the trajectory, holding
/// slack and dual fixed: capped Newton iterations of tau independent
/// p x p solves, stopping early when the step norm falls below
/// `cfg.newton_tol`.
pub fn theta_update(
    params: &ParamTrajectory,
    blocks: &ChangeStatBlocks,
    slack: &Array2<f64>,
    dual: &Array2<f64>,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<ParamTrajectory> {
    let out = newton_minimize(
        params.matrix(),
        blocks,
        slack,
        dual,
        alpha,
        cfg.newton_iters,
        cfg.newton_tol,
        1.0,
    )?;
    ParamTrajectory::new(out)
}

// ---- Group lasso step -----------------------------------------------

/// Result of the fusion subproblem.
#[derive(Clone, Debug)]
pub struct GroupLassoFit {
    pub intercept: Array1<f64>,
    pub jumps: Array2<f64>,
    /// Sweeps actually performed.
    pub sweeps: usize,
    /// First-order optimality residual at exit.
    pub kkt_residual: f64,
}

/// Block coordinate descent for the group lasso in (intercept, jumps):
/// blocks are swept in fixed ascending order, each soft-thresholded in
/// closed form, then the intercept is refit; sweeps stop at `max_sweeps`
/// or when the optimality residual drops to `kkt_tol`.
pub fn group_lasso_update(
    target: &Array2<f64>,
    pw: &PositionWeights,
    alpha: f64,
    lambda: f64,
    warm_intercept: &Array1<f64>,
    warm_jumps: &Array2<f64>,
    max_sweeps: usize,
    kkt_tol: f64,
) -> GroupLassoFit {
    let tau = pw.tau();
    let p = target.ncols();
    let nblocks = tau - 1;
    let d = pw.weights();
    let mut intercept = warm_intercept.clone();
    let mut jumps = warm_jumps.clone();
    let mut sweeps = 0;
    let mut kkt = f64::INFINITY;

    let mut residual = Array2::<f64>::zeros((tau, p));
    for sweep in 1..=max_sweeps {
        sweeps = sweep;
        // residual = target - 1 intercept - X jumps, rebuilt from scratch
        // each sweep so incremental updates cannot drift
        let slack = pw.compose(&intercept, &jumps);
        for r in 0..tau {
            for k in 0..p {
                residual[[r, k]] = target[[r, k]] - slack[[r, k]];
            }
        }
        for i in 0..nblocks {
            let xtx = pw.col_sq_norm(i);
            let mut s = vec![0.0; p];
            for r in (i + 1)..tau {
                for k in 0..p {
                    s[k] += residual[[r, k]];
                }
            }
            let mut norm_sq = 0.0;
            for k in 0..p {
                s[k] = alpha * (d[i] * s[k] + xtx * jumps[[i, k]]);
                norm_sq += s[k] * s[k];
            }
            let norm = norm_sq.sqrt();
            let scale = if norm > lambda && norm > 0.0 {
                (1.0 - lambda / norm) / (alpha * xtx)
            } else {
                0.0
            };
            for k in 0..p {
                let updated = scale * s[k];
                let delta = updated - jumps[[i, k]];
                if delta != 0.0 {
                    jumps[[i, k]] = updated;
                    for r in (i + 1)..tau {
                        residual[[r, k]] -= d[i] * delta;
                    }
                }
            }
        }
        // intercept refit: shift by the column means of the residual
        for k in 0..p {
            let mean: f64 = (0..tau).map(|r| residual[[r, k]]).sum::<f64>() / tau as f64;
            intercept[k] += mean;
            for r in 0..tau {
                residual[[r, k]] -= mean;
            }
        }
        kkt = kkt_residual_from(&residual, pw, alpha, lambda, &jumps);
        if kkt <= kkt_tol {
            break;
        }
    }
    GroupLassoFit {
        intercept,
        jumps,
        sweeps,
        kkt_residual: kkt,
    }
}

/// First-order optimality residual of a candidate (intercept, jumps) for
/// the fusion subproblem: active jump rows must satisfy stationarity,
/// zero rows must have correlation magnitude at most lambda.
pub fn kkt_residual(
    target: &Array2<f64>,
    pw: &PositionWeights,
    alpha: f64,
    lambda: f64,
    intercept: &Array1<f64>,
    jumps: &Array2<f64>,
) -> f64 {
    let tau = pw.tau();
    let p = target.ncols();
    let slack = pw.compose(intercept, jumps);
    let mut residual = Array2::<f64>::zeros((tau, p));
    for r in 0..tau {
        for k in 0..p {
            residual[[r, k]] = target[[r, k]] - slack[[r, k]];
        }
    }
    kkt_residual_from(&residual, pw, alpha, lambda, jumps)
}

fn kkt_residual_from(
    residual: &Array2<f64>,
    pw: &PositionWeights,
    alpha: f64,
    lambda: f64,
    jumps: &Array2<f64>,
) -> f64 {
    let tau = pw.tau();
    let p = residual.ncols();
    let d = pw.weights();
    let mut worst: f64 = 0.0;
    let mut suffix = vec![0.0; p];
    // walk blocks from the last one so suffix sums accumulate in O(tau p)
    for i in (0..tau - 1).rev() {
        for k in 0..p {
            suffix[k] += residual[[i + 1, k]];
        }
        let q: Vec<f64> = suffix.iter().map(|s| alpha * d[i] * s).collect();
        let bnorm: f64 = (0..p)
            .map(|k| jumps[[i, k]] * jumps[[i, k]])
            .sum::<f64>()
            .sqrt();
        let res = if bnorm > 0.0 {
            (0..p)
                .map(|k| {
                    let g = lambda * jumps[[i, k]] / bnorm - q[k];
                    g * g
                })
                .sum::<f64>()
                .sqrt()
        } else {
            let qnorm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            (qnorm - lambda).max(0.0)
        };
        worst = worst.max(res);
    }
    worst
}

// ---- Dual and penalty updates ----------------------------------------

/// Scaled dual ascent: add the current primal gap.
pub fn dual_update(params: &Array2<f64>, slack: &Array2<f64>, dual: &Array2<f64>) -> Array2<f64> {
    params - slack + dual
}

/// Residual-balancing rescale: double the augmentation weight (halving
/// the scaled dual) when the primal residual dominates tenfold, halve it
/// (doubling the dual) in the symmetric case. The unscaled dual is
/// preserved by either branch.
pub fn alpha_schedule(
    alpha: f64,
    dual: &Array2<f64>,
    r_primal: f64,
    r_dual: f64,
) -> (f64, Array2<f64>) {
    if r_primal > 10.0 * r_dual {
        (2.0 * alpha, dual.mapv(|v| v / 2.0))
    } else if r_dual > 10.0 * r_primal {
        (alpha / 2.0, dual.mapv(|v| v * 2.0))
    } else {
        (alpha, dual.clone())
    }
}

fn rms(m: &Array2<f64>) -> f64 {
    let n = m.len() as f64;
    (m.iter().map(|v| v * v).sum::<f64>() / n).sqrt()
}

// ---- Outer loop -------------------------------------------------------

/// Run the full penalized fit on prebuilt blocks.
pub fn run_admm_on_blocks(blocks: &ChangeStatBlocks, cfg: &SolverConfig) -> Result<AdmmState> {
    cfg.validate()?;
    let tau = blocks.tau();
    let p = blocks.p();
    let pw = position_weights(tau)?;

    // zero start: fitted probabilities 1/2, a well-conditioned and
    // reproducible Newton starting point
    let mut params: Array2<f64> = Array2::zeros((tau, p));
    let mut intercept: Array1<f64> = Array1::zeros(p);
    let mut jumps: Array2<f64> = Array2::zeros((tau - 1, p));
    let mut dual: Array2<f64> = Array2::zeros((tau, p));
    let mut alpha = cfg.alpha0;
    let mut slack = pw.compose(&intercept, &jumps);
    let mut prev_ll = loglik_of_matrix(&params.view(), blocks);

    let mut history = Vec::new();
    let mut converged = false;
    let mut guard_events = 0usize;

    for _ in 0..cfg.admm_iters {
        let full = newton_minimize(
            &params,
            blocks,
            &slack,
            &dual,
            alpha,
            cfg.newton_iters,
            cfg.newton_tol,
            1.0,
        );
        let (new_params, ll) = match full {
            Ok(cand) => {
                let ll = loglik_of_matrix(&cand.view(), blocks);
                if ll.is_finite() {
                    (cand, ll)
                } else {
                    guard_events += 1;
                    half_step_retry(&params, blocks, &slack, &dual, alpha, cfg, prev_ll)?
                }
            }
            Err(e) if e.is_numerical() => {
                guard_events += 1;
                half_step_retry(&params, blocks, &slack, &dual, alpha, cfg, prev_ll)?
            }
            Err(e) => return Err(e),
        };
        params = new_params;

        let gl = group_lasso_update(
            &(&params + &dual),
            &pw,
            alpha,
            cfg.lambda,
            &intercept,
            &jumps,
            cfg.gl_iters,
            cfg.kkt_tol,
        );
        intercept = gl.intercept;
        jumps = gl.jumps;
        let new_slack = pw.compose(&intercept, &jumps);

        dual = dual_update(&params, &new_slack, &dual);

        let r_primal = rms(&(&params - &new_slack));
        let r_dual = rms(&(&new_slack - &slack));
        slack = new_slack;
        let (next_alpha, next_dual) = alpha_schedule(alpha, &dual, r_primal, r_dual);
        alpha = next_alpha;
        dual = next_dual;

        history.push(AdmmIterRecord {
            loglik: ll,
            r_primal,
            r_dual,
            alpha,
        });

        let denom = prev_ll.abs();
        let rel = if denom == 0.0 {
            0.0
        } else {
            (ll - prev_ll).abs() / denom
        };
        prev_ll = ll;
        if rel <= cfg.admm_tol {
            converged = true;
            break;
        }
    }

    Ok(AdmmState {
        params: ParamTrajectory::new(params)?,
        intercept,
        jumps,
        scaled_dual: dual,
        alpha,
        history,
        converged,
        guard_events,
    })
}

#[allow(clippy::too_many_arguments)]
fn half_step_retry(
    params: &Array2<f64>,
    blocks: &ChangeStatBlocks,
    slack: &Array2<f64>,
    dual: &Array2<f64>,
    alpha: f64,
    cfg: &SolverConfig,
    prev_ll: f64,
) -> Result<(Array2<f64>, f64)> {
    match newton_minimize(
        params,
        blocks,
        slack,
        dual,
        alpha,
        cfg.newton_iters,
        cfg.newton_tol,
        0.5,
    ) {
        Ok(cand) => {
            let ll = loglik_of_matrix(&cand.view(), blocks);
            if ll.is_finite() {
                Ok((cand, ll))
            } else {
                Ok((params.clone(), prev_ll))
            }
        }
        Err(e) if e.is_numerical() => Ok((params.clone(), prev_ll)),
        Err(e) => Err(e),
    }
}

/// Build blocks for `series` under `spec` and run the penalized fit.
pub fn run_admm(
    series: &NetworkSeries,
    spec: &StatisticSpec,
    cfg: &SolverConfig,
) -> Result<(ParamTrajectory, AdmmState)> {
    let blocks = build_change_stat_blocks(series, spec)?;
    let state = run_admm_on_blocks(&blocks, cfg)?;
    Ok((state.params.clone(), state))
}
