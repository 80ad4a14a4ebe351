//! Log pseudo-likelihood of the time-heterogeneous separable model, with
//! gradient and per-transition Hessian blocks.
//!
//! Every dyad of every transition contributes an independent logistic
//! term: the response is the formation (or dissolution) network bit, the
//! linear predictor is the parameter row dotted with the dyad's change
//! statistics. The stacked design is block-diagonal by transition and by
//! model, so the Hessian splits into tau dense p x p blocks and nothing
//! larger is ever formed.

use crate::error::{Error, Result};
use crate::stats::{ChangeStatBlocks, TransitionBlocks};
use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;

/// Per-transition parameter rows: row r holds the formation parameters
/// followed by the dissolution parameters for transition r (into snapshot
/// r + 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamTrajectory(Array2<f64>);

impl ParamTrajectory {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "parameter trajectory",
            });
        }
        Ok(Self(matrix))
    }

    pub fn zeros(tau: usize, p: usize) -> Self {
        Self(Array2::zeros((tau, p)))
    }

    pub fn tau(&self) -> usize {
        self.0.nrows()
    }

    pub fn p(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.0
    }

    /// One parameter row as a slice.
    pub fn row(&self, r: usize) -> Vec<f64> {
        self.0.row(r).to_vec()
    }
}

/// Fitted dyad probabilities and their logistic variance weights for one
/// model of one transition.
#[derive(Clone, Debug)]
pub struct ModelWeights {
    pub mu: Vec<f64>,
    pub w: Vec<f64>,
}

/// Weights for both models of one transition.
#[derive(Clone, Debug)]
pub struct MuWeights {
    pub formation: ModelWeights,
    pub dissolution: ModelWeights,
}

#[inline]
fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) without overflow at large |x|.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn check_shapes(theta: &ParamTrajectory, blocks: &ChangeStatBlocks) -> Result<()> {
    if theta.tau() != blocks.tau() || theta.p() != blocks.p() {
        return Err(Error::ShapeMismatch {
            context: "parameters vs blocks",
            expected: format!("{}x{}", blocks.tau(), blocks.p()),
            got: format!("{}x{}", theta.tau(), theta.p()),
        });
    }
    if !theta.matrix().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "parameter trajectory",
        });
    }
    Ok(())
}

/// Accumulated terms for one transition.
pub(crate) struct TransitionFit {
    pub loglik: f64,
    pub grad: Vec<f64>,
    /// p x p row-major; only filled when requested.
    pub hess: Vec<f64>,
}

/// One pass over a single model's rows.
fn model_pass(
    block: &Array2<f64>,
    resp: &[u8],
    params: &[f64],
    grad: &mut [f64],
    hess: Option<&mut [f64]>,
    want_loglik: bool,
) -> f64 {
    let p = params.len();
    let data = block.as_slice().expect("blocks are standard layout");
    let mut loglik = 0.0;
    match hess {
        Some(h) => {
            for (r, &y) in resp.iter().enumerate() {
                let row = &data[r * p..(r + 1) * p];
                let mut eta = 0.0;
                for k in 0..p {
                    eta += row[k] * params[k];
                }
                let mu = sigmoid(eta);
                if want_loglik {
                    loglik += f64::from(y) * eta - softplus(eta);
                }
                let resid = f64::from(y) - mu;
                let w = mu * (1.0 - mu);
                for a in 0..p {
                    grad[a] += resid * row[a];
                    let wa = w * row[a];
                    let ha = &mut h[a * p..(a + 1) * p];
                    for b in a..p {
                        ha[b] += wa * row[b];
                    }
                }
            }
        }
        None => {
            for (r, &y) in resp.iter().enumerate() {
                let row = &data[r * p..(r + 1) * p];
                let mut eta = 0.0;
                for k in 0..p {
                    eta += row[k] * params[k];
                }
                if want_loglik {
                    loglik += f64::from(y) * eta - softplus(eta);
                }
                let resid = f64::from(y) - sigmoid(eta);
                for k in 0..p {
                    grad[k] += resid * row[k];
                }
            }
        }
    }
    loglik
}

fn transition_fit(
    tb: &TransitionBlocks,
    row: &[f64],
    p1: usize,
    p: usize,
    want_hess: bool,
    want_loglik: bool,
) -> TransitionFit {
    let mut grad = vec![0.0; p];
    let mut hess = if want_hess { vec![0.0; p * p] } else { Vec::new() };
    let p2 = p - p1;

    let mut ll = 0.0;
    let mut hess_f = if want_hess { vec![0.0; p1 * p1] } else { Vec::new() };
    let mut hess_d = if want_hess { vec![0.0; p2 * p2] } else { Vec::new() };
    ll += model_pass(
        &tb.formation,
        &tb.resp_formation,
        &row[..p1],
        &mut grad[..p1],
        want_hess.then_some(&mut hess_f[..]),
        want_loglik,
    );
    ll += model_pass(
        &tb.dissolution,
        &tb.resp_dissolution,
        &row[p1..],
        &mut grad[p1..],
        want_hess.then_some(&mut hess_d[..]),
        want_loglik,
    );
    if want_hess {
        // assemble the block-diagonal p x p matrix, symmetrized
        for a in 0..p1 {
            for b in a..p1 {
                let v = hess_f[a * p1 + b];
                hess[a * p + b] = v;
                hess[b * p + a] = v;
            }
        }
        for a in 0..p2 {
            for b in a..p2 {
                let v = hess_d[a * p2 + b];
                hess[(p1 + a) * p + (p1 + b)] = v;
                hess[(p1 + b) * p + (p1 + a)] = v;
            }
        }
    }
    TransitionFit {
        loglik: ll,
        grad,
        hess,
    }
}

/// Full fused pass used by the solver: per-transition terms in parallel,
/// reduced in transition order so results are reproducible.
pub(crate) fn fit_terms(
    theta: &ArrayView2<f64>,
    blocks: &ChangeStatBlocks,
    want_hess: bool,
    want_loglik: bool,
) -> Vec<TransitionFit> {
    let p1 = blocks.p1();
    let p = blocks.p();
    blocks
        .transitions()
        .par_iter()
        .enumerate()
        .map(|(t, tb)| {
            let row: Vec<f64> = theta.row(t).to_vec();
            transition_fit(tb, &row, p1, p, want_hess, want_loglik)
        })
        .collect()
}

/// Log pseudo-likelihood over all transitions and both models.
pub fn pseudo_loglik(theta: &ParamTrajectory, blocks: &ChangeStatBlocks) -> Result<f64> {
    check_shapes(theta, blocks)?;
    Ok(loglik_of_matrix(&theta.matrix().view(), blocks))
}

pub(crate) fn loglik_of_matrix(theta: &ArrayView2<f64>, blocks: &ChangeStatBlocks) -> f64 {
    let p1 = blocks.p1();
    let per_t: Vec<f64> = blocks
        .transitions()
        .par_iter()
        .enumerate()
        .map(|(t, tb)| {
            let row: Vec<f64> = theta.row(t).to_vec();
            let mut g1 = vec![0.0; p1];
            let mut g2 = vec![0.0; blocks.p2()];
            model_pass(&tb.formation, &tb.resp_formation, &row[..p1], &mut g1, None, true)
                + model_pass(
                    &tb.dissolution,
                    &tb.resp_dissolution,
                    &row[p1..],
                    &mut g2,
                    None,
                    true,
                )
        })
        .collect();
    per_t.iter().sum()
}

/// Gradient of the log pseudo-likelihood, one row per transition.
pub fn gradient(theta: &ParamTrajectory, blocks: &ChangeStatBlocks) -> Result<Array2<f64>> {
    check_shapes(theta, blocks)?;
    let fits = fit_terms(&theta.matrix().view(), blocks, false, false);
    let mut out = Array2::zeros((blocks.tau(), blocks.p()));
    for (t, fit) in fits.iter().enumerate() {
        out.row_mut(t).assign(&Array1::from_vec(fit.grad.clone()));
    }
    Ok(out)
}

/// Per-transition curvature blocks: the positive semidefinite Gram form
/// of the weighted change statistics (the negative of the log-likelihood
/// Hessian block).
pub fn hessian_blocks(
    theta: &ParamTrajectory,
    blocks: &ChangeStatBlocks,
) -> Result<Vec<Array2<f64>>> {
    check_shapes(theta, blocks)?;
    let p = blocks.p();
    let fits = fit_terms(&theta.matrix().view(), blocks, true, false);
    Ok(fits
        .into_iter()
        .map(|fit| Array2::from_shape_vec((p, p), fit.hess).expect("square block"))
        .collect())
}

/// Fitted probabilities and logistic weights for every transition.
pub fn mu_weights(theta: &ParamTrajectory, blocks: &ChangeStatBlocks) -> Result<Vec<MuWeights>> {
    check_shapes(theta, blocks)?;
    let p1 = blocks.p1();
    let out = blocks
        .transitions()
        .iter()
        .enumerate()
        .map(|(t, tb)| {
            let row = theta.row(t);
            let model = |block: &Array2<f64>, params: &[f64]| {
                let p = params.len();
                let data = block.as_slice().expect("standard layout");
                let mu: Vec<f64> = (0..block.nrows())
                    .map(|r| {
                        let row_d = &data[r * p..(r + 1) * p];
                        let eta: f64 = row_d.iter().zip(params).map(|(a, b)| a * b).sum();
                        sigmoid(eta)
                    })
                    .collect();
                let w = mu.iter().map(|m| m * (1.0 - m)).collect();
                ModelWeights { mu, w }
            };
            MuWeights {
                formation: model(&tb.formation, &row[..p1]),
                dissolution: model(&tb.dissolution, &row[p1..]),
            }
        })
        .collect();
    Ok(out)
}
