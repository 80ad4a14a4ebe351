//! Network statistics, change statistics, and the per-transition blocks
//! consumed by the pseudo-likelihood.
//!
//! A change statistic is the difference in a network statistic when one
//! dyad flips from 0 to 1 with the rest of the network held fixed. Blocks
//! are evaluated per transition on the formation and dissolution networks,
//! with the toggled dyad itself excluded from the base network, and rows
//! laid out in the canonical dyad order.

use crate::error::{Error, Result};
use crate::net::{
    DyadIndex, NetworkSeries, NetworkSnapshot, NodalAttributes, derive_dissolution,
    derive_formation, dyad_count, enumerate_dyads,
};
use ndarray::Array2;
use rayon::prelude::*;

/// Supported network-statistic terms.
///
/// `Mutuality` is only defined for directed networks; `Homophily` needs
/// nodal attributes on the series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatisticKind {
    EdgeCount,
    Mutuality,
    Triangles,
    Homophily,
    Isolates,
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::EdgeCount => "edges",
            StatisticKind::Mutuality => "mutual",
            StatisticKind::Triangles => "triangles",
            StatisticKind::Homophily => "homophily",
            StatisticKind::Isolates => "isolates",
        }
    }

    fn check(&self, directed: bool, has_attrs: bool) -> Result<()> {
        match self {
            StatisticKind::Mutuality if !directed => {
                Err(Error::StatisticNeedsDirected { name: "mutual" })
            }
            StatisticKind::Homophily if !has_attrs => {
                Err(Error::StatisticNeedsAttributes { name: "homophily" })
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edges" | "edgecount" => Ok(StatisticKind::EdgeCount),
            "mutual" | "mutuality" => Ok(StatisticKind::Mutuality),
            "triangles" | "triangle" => Ok(StatisticKind::Triangles),
            "homophily" | "nodematch" => Ok(StatisticKind::Homophily),
            "isolates" => Ok(StatisticKind::Isolates),
            other => Err(Error::InvalidParameter {
                name: "statistic",
                reason: format!("unknown term '{other}'"),
            }),
        }
    }
}

/// Ordered statistic terms for the formation and dissolution models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatisticSpec {
    formation: Vec<StatisticKind>,
    dissolution: Vec<StatisticKind>,
}

impl StatisticSpec {
    pub fn new(formation: Vec<StatisticKind>, dissolution: Vec<StatisticKind>) -> Result<Self> {
        if formation.is_empty() || dissolution.is_empty() {
            return Err(Error::EmptyStatisticSpec);
        }
        Ok(Self {
            formation,
            dissolution,
        })
    }

    /// Edge count and mutuality in both models.
    pub fn edges_mutual() -> Self {
        Self {
            formation: vec![StatisticKind::EdgeCount, StatisticKind::Mutuality],
            dissolution: vec![StatisticKind::EdgeCount, StatisticKind::Mutuality],
        }
    }

    pub fn formation_terms(&self) -> &[StatisticKind] {
        &self.formation
    }

    pub fn dissolution_terms(&self) -> &[StatisticKind] {
        &self.dissolution
    }

    pub fn p1(&self) -> usize {
        self.formation.len()
    }

    pub fn p2(&self) -> usize {
        self.dissolution.len()
    }

    pub fn p(&self) -> usize {
        self.p1() + self.p2()
    }

    pub fn validate_for(&self, directed: bool, has_attrs: bool) -> Result<()> {
        for kind in self.formation.iter().chain(&self.dissolution) {
            kind.check(directed, has_attrs)?;
        }
        Ok(())
    }
}

/// Scalar network statistic of `y`.
///
/// Directed triangles count transitive triples plus directed 3-cycles
/// (each cycle once); undirected triangles count closed node triples.
/// Isolates are nodes with no incident edge in either direction.
pub fn network_statistic(
    y: &NetworkSnapshot,
    kind: StatisticKind,
    attrs: Option<&NodalAttributes>,
) -> Result<f64> {
    kind.check(y.directed(), attrs.is_some())?;
    let n = y.n();
    let value = match kind {
        StatisticKind::EdgeCount => y.edge_count() as f64,
        StatisticKind::Mutuality => {
            let mut c = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    if y.get(i, j) && y.get(j, i) {
                        c += 1;
                    }
                }
            }
            c as f64
        }
        StatisticKind::Triangles => {
            if y.directed() {
                let mut transitive = 0usize;
                let mut cyclic3 = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if j == i || !y.get(i, j) {
                            continue;
                        }
                        for k in 0..n {
                            if k == i || k == j || !y.get(j, k) {
                                continue;
                            }
                            if y.get(i, k) {
                                transitive += 1;
                            }
                            if y.get(k, i) {
                                cyclic3 += 1;
                            }
                        }
                    }
                }
                (transitive + cyclic3 / 3) as f64
            } else {
                let mut c = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if !y.get(i, j) {
                            continue;
                        }
                        for k in (j + 1)..n {
                            if y.get(j, k) && y.get(i, k) {
                                c += 1;
                            }
                        }
                    }
                }
                c as f64
            }
        }
        StatisticKind::Homophily => {
            let attrs = attrs.expect("checked above");
            let mut c = 0usize;
            for i in 0..n {
                let j0 = if y.directed() { 0 } else { i + 1 };
                for j in j0..n {
                    if i != j && y.get(i, j) && attrs.same(i, j) {
                        c += 1;
                    }
                }
            }
            c as f64
        }
        StatisticKind::Isolates => (0..n)
            .filter(|&i| y.out_degree(i) == 0 && y.in_degree(i) == 0)
            .count() as f64,
    };
    Ok(value)
}

/// Change statistic at `dyad`: the statistic with the dyad set to 1 minus
/// the statistic with it set to 0, everything else fixed at `y`. Computed
/// from local counts in O(n).
pub fn change_statistic(
    y: &NetworkSnapshot,
    dyad: DyadIndex,
    kind: StatisticKind,
    attrs: Option<&NodalAttributes>,
) -> Result<f64> {
    kind.check(y.directed(), attrs.is_some())?;
    let n = y.n();
    let (i, j) = (dyad.tail, dyad.head);
    if i >= n || j >= n || i == j {
        return Err(Error::NodeOutOfRange {
            node: i.max(j) + 1,
            n,
        });
    }
    let value = match kind {
        StatisticKind::EdgeCount => 1.0,
        StatisticKind::Mutuality => {
            if y.get(j, i) {
                1.0
            } else {
                0.0
            }
        }
        StatisticKind::Triangles => {
            if y.directed() {
                // closures created by the new arc i->j: three transitive
                // roles plus the cyclic one
                let mut c = 0usize;
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let ik = y.get(i, k) as usize;
                    let ki = y.get(k, i) as usize;
                    let jk = y.get(j, k) as usize;
                    let kj = y.get(k, j) as usize;
                    c += ik * jk + ki * kj + ik * kj + jk * ki;
                }
                c as f64
            } else {
                (0..n)
                    .filter(|&k| k != i && k != j && y.get(i, k) && y.get(j, k))
                    .count() as f64
            }
        }
        StatisticKind::Homophily => {
            let attrs = attrs.expect("checked above");
            if attrs.same(i, j) { 1.0 } else { 0.0 }
        }
        StatisticKind::Isolates => {
            // degrees in the base network, which has this dyad at 0
            let toggled = y.get(i, j) as usize;
            let deg_i = y.in_degree(i) + y.out_degree(i) - toggled;
            let deg_j = y.in_degree(j) + y.out_degree(j) - toggled;
            let mut d = 0.0;
            if deg_i == 0 {
                d -= 1.0;
            }
            if deg_j == 0 {
                d -= 1.0;
            }
            d
        }
    };
    Ok(value)
}

/// Change statistics and responses for one transition.
#[derive(Clone, Debug)]
pub struct TransitionBlocks {
    /// E x p1 change statistics on the formation network.
    pub formation: Array2<f64>,
    /// E x p2 change statistics on the dissolution network.
    pub dissolution: Array2<f64>,
    /// Formation-network dyad bits in canonical order.
    pub resp_formation: Vec<u8>,
    /// Dissolution-network dyad bits in canonical order.
    pub resp_dissolution: Vec<u8>,
}

/// All per-transition blocks for a series, built once before fitting.
///
/// The full stacked design is never materialized: it is block-diagonal by
/// transition, so every downstream product factors per time step.
#[derive(Clone, Debug)]
pub struct ChangeStatBlocks {
    transitions: Vec<TransitionBlocks>,
    n: usize,
    directed: bool,
    dyads: usize,
    p1: usize,
    p2: usize,
}

impl ChangeStatBlocks {
    /// Assemble blocks from raw parts; shapes must agree.
    pub fn from_parts(
        transitions: Vec<TransitionBlocks>,
        n: usize,
        directed: bool,
        p1: usize,
        p2: usize,
    ) -> Result<Self> {
        let dyads = dyad_count(n, directed);
        for tb in &transitions {
            let ok = tb.formation.dim() == (dyads, p1)
                && tb.dissolution.dim() == (dyads, p2)
                && tb.resp_formation.len() == dyads
                && tb.resp_dissolution.len() == dyads;
            if !ok {
                return Err(Error::ShapeMismatch {
                    context: "transition blocks",
                    expected: format!("{dyads}x{p1} and {dyads}x{p2}"),
                    got: format!("{:?} and {:?}", tb.formation.dim(), tb.dissolution.dim()),
                });
            }
        }
        if transitions.is_empty() {
            return Err(Error::TooFewSnapshots { min: 3, got: 1 });
        }
        Ok(Self {
            transitions,
            n,
            directed,
            dyads,
            p1,
            p2,
        })
    }

    /// Number of transitions (T - 1).
    pub fn tau(&self) -> usize {
        self.transitions.len()
    }

    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    pub fn p(&self) -> usize {
        self.p1 + self.p2
    }

    /// Dyads per model per transition.
    pub fn dyads(&self) -> usize {
        self.dyads
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Rows of the implied stacked design: formation and dissolution rows
    /// over all transitions.
    pub fn logical_rows(&self) -> usize {
        2 * self.tau() * self.dyads
    }

    pub fn transitions(&self) -> &[TransitionBlocks] {
        &self.transitions
    }

    pub fn transition(&self, idx: usize) -> &TransitionBlocks {
        &self.transitions[idx]
    }
}

/// Build the blocks for every transition of `series` under `spec`.
///
/// Transitions are independent and evaluated in parallel; the result is
/// deterministic.
pub fn build_change_stat_blocks(
    series: &NetworkSeries,
    spec: &StatisticSpec,
) -> Result<ChangeStatBlocks> {
    spec.validate_for(series.directed(), series.attributes().is_some())?;
    let n = series.n();
    let directed = series.directed();
    let dyads = enumerate_dyads(n, directed)?;
    let attrs = series.attributes();

    let transitions: Vec<TransitionBlocks> = series
        .snapshots()
        .par_windows(2)
        .map(|w| transition_blocks(&w[0], &w[1], spec, &dyads, attrs))
        .collect::<Result<_>>()?;

    ChangeStatBlocks::from_parts(transitions, n, directed, spec.p1(), spec.p2())
}

fn transition_blocks(
    y_prev: &NetworkSnapshot,
    y_curr: &NetworkSnapshot,
    spec: &StatisticSpec,
    dyads: &[DyadIndex],
    attrs: Option<&NodalAttributes>,
) -> Result<TransitionBlocks> {
    let y_plus = derive_formation(y_prev, y_curr)?;
    let y_minus = derive_dissolution(y_prev, y_curr)?;
    let e = dyads.len();

    let mut formation = Array2::zeros((e, spec.p1()));
    let mut dissolution = Array2::zeros((e, spec.p2()));
    let mut resp_formation = vec![0u8; e];
    let mut resp_dissolution = vec![0u8; e];

    for d in dyads {
        resp_formation[d.ordinal] = y_plus.get(d.tail, d.head) as u8;
        resp_dissolution[d.ordinal] = y_minus.get(d.tail, d.head) as u8;
        for (k, kind) in spec.formation_terms().iter().enumerate() {
            formation[[d.ordinal, k]] = change_statistic(&y_plus, *d, *kind, attrs)?;
        }
        for (k, kind) in spec.dissolution_terms().iter().enumerate() {
            dissolution[[d.ordinal, k]] = change_statistic(&y_minus, *d, *kind, attrs)?;
        }
    }

    Ok(TransitionBlocks {
        formation,
        dissolution,
        resp_formation,
        resp_dissolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{NetworkSeries, NetworkSnapshot, enumerate_dyads};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_snapshot(
        n: usize,
        directed: bool,
        density: f64,
        rng: &mut ChaCha12Rng,
    ) -> NetworkSnapshot {
        let mut y = NetworkSnapshot::empty(n, directed).unwrap();
        for d in enumerate_dyads(n, directed).unwrap() {
            if rng.random::<f64>() < density {
                y.set_edge(d.tail, d.head, true).unwrap();
            }
        }
        y
    }

    // Independent recount used as the oracle below: plain loops over the
    // definitions, no shared code with the implementation above.
    fn naive_statistic(y: &NetworkSnapshot, kind: StatisticKind, attrs: Option<&[&str]>) -> f64 {
        let n = y.n();
        match kind {
            StatisticKind::EdgeCount => {
                let mut c = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if i != j && y.get(i, j) && (y.directed() || i < j) {
                            c += 1;
                        }
                    }
                }
                c as f64
            }
            StatisticKind::Mutuality => {
                let mut c = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if i < j && y.get(i, j) && y.get(j, i) {
                            c += 1;
                        }
                    }
                }
                c as f64
            }
            StatisticKind::Triangles => {
                if y.directed() {
                    let mut trans = 0usize;
                    let mut cycles = 0usize;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                if i == j || j == k || i == k {
                                    continue;
                                }
                                if y.get(i, j) && y.get(j, k) && y.get(i, k) {
                                    trans += 1;
                                }
                                if y.get(i, j) && y.get(j, k) && y.get(k, i) {
                                    cycles += 1;
                                }
                            }
                        }
                    }
                    assert_eq!(cycles % 3, 0);
                    (trans + cycles / 3) as f64
                } else {
                    let mut c = 0usize;
                    for i in 0..n {
                        for j in (i + 1)..n {
                            for k in (j + 1)..n {
                                if y.get(i, j) && y.get(j, k) && y.get(i, k) {
                                    c += 1;
                                }
                            }
                        }
                    }
                    c as f64
                }
            }
            StatisticKind::Homophily => {
                let attrs = attrs.unwrap();
                let mut c = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if i != j
                            && y.get(i, j)
                            && attrs[i] == attrs[j]
                            && (y.directed() || i < j)
                        {
                            c += 1;
                        }
                    }
                }
                c as f64
            }
            StatisticKind::Isolates => {
                let mut c = 0usize;
                for i in 0..n {
                    let mut deg = 0usize;
                    for j in 0..n {
                        if j != i {
                            deg += y.get(i, j) as usize + y.get(j, i) as usize;
                        }
                    }
                    if deg == 0 {
                        c += 1;
                    }
                }
                c as f64
            }
        }
    }

    fn toggle_oracle(
        y: &NetworkSnapshot,
        dyad: DyadIndex,
        kind: StatisticKind,
        attrs: Option<&[&str]>,
    ) -> f64 {
        let mut on = y.clone();
        on.set_edge(dyad.tail, dyad.head, true).unwrap();
        let mut off = y.clone();
        off.set_edge(dyad.tail, dyad.head, false).unwrap();
        naive_statistic(&on, kind, attrs) - naive_statistic(&off, kind, attrs)
    }

    #[test]
    fn empty_graph_statistics() {
        for directed in [true, false] {
            let y = NetworkSnapshot::empty(5, directed).unwrap();
            assert_eq!(
                network_statistic(&y, StatisticKind::EdgeCount, None).unwrap(),
                0.0
            );
            assert_eq!(
                network_statistic(&y, StatisticKind::Triangles, None).unwrap(),
                0.0
            );
            assert_eq!(
                network_statistic(&y, StatisticKind::Isolates, None).unwrap(),
                5.0
            );
        }
        let y = NetworkSnapshot::empty(5, true).unwrap();
        assert_eq!(
            network_statistic(&y, StatisticKind::Mutuality, None).unwrap(),
            0.0
        );
    }

    #[test]
    fn directed_three_cycle_counts_one_triangle() {
        let y = NetworkSnapshot::from_edges(3, true, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(
            network_statistic(&y, StatisticKind::Triangles, None).unwrap(),
            1.0
        );
        assert_eq!(
            network_statistic(&y, StatisticKind::Mutuality, None).unwrap(),
            0.0
        );
    }

    #[test]
    fn statistics_match_naive_recount() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let labels = ["a", "b", "a", "b", "a", "b"];
        let attrs = NodalAttributes::new(labels.iter().map(|s| s.to_string()).collect());
        for case in 0..20 {
            let directed = case % 2 == 0;
            let y = random_snapshot(6, directed, 0.5, &mut rng);
            let kinds: &[StatisticKind] = if directed {
                &[
                    StatisticKind::EdgeCount,
                    StatisticKind::Mutuality,
                    StatisticKind::Triangles,
                    StatisticKind::Homophily,
                    StatisticKind::Isolates,
                ]
            } else {
                &[
                    StatisticKind::EdgeCount,
                    StatisticKind::Triangles,
                    StatisticKind::Homophily,
                    StatisticKind::Isolates,
                ]
            };
            for &kind in kinds {
                let got = network_statistic(&y, kind, Some(&attrs)).unwrap();
                let want = naive_statistic(&y, kind, Some(&labels));
                assert_eq!(got, want, "kind {kind:?} case {case}");
            }
        }
    }

    #[test]
    fn edge_count_change_is_always_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let y = random_snapshot(6, true, 0.4, &mut rng);
        for d in enumerate_dyads(6, true).unwrap() {
            assert_eq!(
                change_statistic(&y, d, StatisticKind::EdgeCount, None).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn mutuality_change_is_reciprocal_bit() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let y = random_snapshot(6, true, 0.5, &mut rng);
        for d in enumerate_dyads(6, true).unwrap() {
            let got = change_statistic(&y, d, StatisticKind::Mutuality, None).unwrap();
            assert_eq!(got, y.get(d.head, d.tail) as u8 as f64);
            assert_eq!(got, toggle_oracle(&y, d, StatisticKind::Mutuality, None));
        }
    }

    #[test]
    fn change_statistics_match_toggle_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let labels = ["x", "y", "x", "y", "x", "y", "x"];
        let attrs = NodalAttributes::new(labels.iter().map(|s| s.to_string()).collect());
        for case in 0..100 {
            let directed = case % 2 == 0;
            let y = random_snapshot(7, directed, 0.45, &mut rng);
            let dyads = enumerate_dyads(7, directed).unwrap();
            let d = dyads[rng.random_range(0..dyads.len())];
            for kind in [
                StatisticKind::Triangles,
                StatisticKind::Isolates,
                StatisticKind::Homophily,
            ] {
                let got = change_statistic(&y, d, kind, Some(&attrs)).unwrap();
                let want = toggle_oracle(&y, d, kind, Some(&labels));
                assert_eq!(got, want, "kind {kind:?} case {case} dyad {d:?}");
            }
        }
    }

    #[test]
    fn invalid_combinations_rejected() {
        let y = NetworkSnapshot::empty(4, false).unwrap();
        assert!(network_statistic(&y, StatisticKind::Mutuality, None).is_err());
        assert!(network_statistic(&y, StatisticKind::Homophily, None).is_err());
        let d = enumerate_dyads(4, false).unwrap()[0];
        assert!(change_statistic(&y, d, StatisticKind::Mutuality, None).is_err());
    }

    #[test]
    fn edge_count_blocks_are_all_ones() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let snaps = (0..3)
            .map(|_| random_snapshot(3, true, 0.5, &mut rng))
            .collect();
        let series = NetworkSeries::new(snaps, None).unwrap();
        let spec = StatisticSpec::new(
            vec![StatisticKind::EdgeCount],
            vec![StatisticKind::EdgeCount],
        )
        .unwrap();
        let blocks = build_change_stat_blocks(&series, &spec).unwrap();
        assert_eq!(blocks.tau(), 2);
        for tb in blocks.transitions() {
            assert_eq!(tb.formation.dim(), (6, 1));
            assert_eq!(tb.dissolution.dim(), (6, 1));
            assert!(tb.formation.iter().all(|&v| v == 1.0));
            assert!(tb.dissolution.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn blocks_match_toggle_oracle_and_responses() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let snaps: Vec<_> = (0..3)
            .map(|_| random_snapshot(4, true, 0.5, &mut rng))
            .collect();
        let series = NetworkSeries::new(snaps.clone(), None).unwrap();
        let spec = StatisticSpec::new(
            vec![StatisticKind::EdgeCount, StatisticKind::Mutuality],
            vec![StatisticKind::EdgeCount],
        )
        .unwrap();
        let blocks = build_change_stat_blocks(&series, &spec).unwrap();
        let dyads = enumerate_dyads(4, true).unwrap();
        for (t, tb) in blocks.transitions().iter().enumerate() {
            let y_plus = derive_formation(&snaps[t], &snaps[t + 1]).unwrap();
            let y_minus = derive_dissolution(&snaps[t], &snaps[t + 1]).unwrap();
            for d in &dyads {
                assert_eq!(
                    tb.resp_formation[d.ordinal],
                    y_plus.get(d.tail, d.head) as u8
                );
                assert_eq!(
                    tb.resp_dissolution[d.ordinal],
                    y_minus.get(d.tail, d.head) as u8
                );
                assert_eq!(
                    tb.formation[[d.ordinal, 1]],
                    toggle_oracle(&y_plus, *d, StatisticKind::Mutuality, None)
                );
                assert_eq!(
                    tb.dissolution[[d.ordinal, 0]],
                    toggle_oracle(&y_minus, *d, StatisticKind::EdgeCount, None)
                );
            }
        }
    }

    #[test]
    fn blocks_depend_only_on_adjacent_snapshots() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let snaps: Vec<_> = (0..5)
            .map(|_| random_snapshot(4, true, 0.5, &mut rng))
            .collect();
        let spec = StatisticSpec::edges_mutual();
        let full =
            build_change_stat_blocks(&NetworkSeries::new(snaps.clone(), None).unwrap(), &spec)
                .unwrap();
        let truncated =
            build_change_stat_blocks(&NetworkSeries::new(snaps[..4].to_vec(), None).unwrap(), &spec)
                .unwrap();
        for t in 0..truncated.tau() {
            assert_eq!(
                full.transition(t).formation,
                truncated.transition(t).formation
            );
            assert_eq!(
                full.transition(t).resp_dissolution,
                truncated.transition(t).resp_dissolution
            );
        }
    }

    #[test]
    fn blocks_invariant_to_node_relabeling() {
        // relabeling permutes rows of the blocks by the matching dyad
        // reorder; sorted rows must therefore agree
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let n = 5;
        let snaps: Vec<_> = (0..3)
            .map(|_| random_snapshot(n, true, 0.5, &mut rng))
            .collect();
        let perm = [2usize, 0, 4, 1, 3];
        let relabeled: Vec<_> = snaps
            .iter()
            .map(|y| {
                let mut out = NetworkSnapshot::empty(n, true).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        if i != j && y.get(i, j) {
                            out.set_edge(perm[i], perm[j], true).unwrap();
                        }
                    }
                }
                out
            })
            .collect();
        let labels: Vec<String> = ["a", "b", "a", "b", "a"].iter().map(|s| s.to_string()).collect();
        let mut plabels = vec![String::new(); n];
        for i in 0..n {
            plabels[perm[i]] = labels[i].clone();
        }
        let spec = StatisticSpec::new(
            vec![
                StatisticKind::EdgeCount,
                StatisticKind::Triangles,
                StatisticKind::Homophily,
            ],
            vec![StatisticKind::Isolates],
        )
        .unwrap();
        let a = build_change_stat_blocks(
            &NetworkSeries::new(snaps, Some(NodalAttributes::new(labels))).unwrap(),
            &spec,
        )
        .unwrap();
        let b = build_change_stat_blocks(
            &NetworkSeries::new(relabeled, Some(NodalAttributes::new(plabels))).unwrap(),
            &spec,
        )
        .unwrap();
        for t in 0..a.tau() {
            let sorted_rows = |m: &Array2<f64>, resp: &[u8]| {
                let mut rows: Vec<Vec<i64>> = m
                    .rows()
                    .into_iter()
                    .zip(resp)
                    .map(|(r, &y)| {
                        let mut v: Vec<i64> = r.iter().map(|&x| x as i64).collect();
                        v.push(y as i64);
                        v
                    })
                    .collect();
                rows.sort();
                rows
            };
            assert_eq!(
                sorted_rows(&a.transition(t).formation, &a.transition(t).resp_formation),
                sorted_rows(&b.transition(t).formation, &b.transition(t).resp_formation)
            );
        }
    }

    #[test]
    fn block_shapes_at_scale() {
        // shape arithmetic only; content covered elsewhere
        let n = 10;
        let t_len = 4;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let snaps = (0..t_len)
            .map(|_| random_snapshot(n, true, 0.3, &mut rng))
            .collect();
        let series = NetworkSeries::new(snaps, None).unwrap();
        let blocks = build_change_stat_blocks(&series, &StatisticSpec::edges_mutual()).unwrap();
        assert_eq!(blocks.dyads(), 90);
        assert_eq!(blocks.logical_rows(), 2 * 3 * 90);
        assert_eq!(blocks.p(), 4);
    }
}
