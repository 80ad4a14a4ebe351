//! Binary network snapshots, series, and the canonical dyad order.
//!
//! Everything downstream (change-statistic blocks, the response vector,
//! reported results) indexes dyads by one fixed order: row-major over
//! ordered pairs `(i, j)` with `i != j` for directed networks, and
//! row-major over `i < j` for undirected ones. Node indices are 0-based
//! internally and 1-based in file formats and reports.

use crate::error::{Error, Result};

/// A single binary network on a fixed node set. No self-edges; undirected
/// networks keep a symmetric adjacency.
#[derive(Clone, PartialEq, Eq)]
pub struct NetworkSnapshot {
    n: usize,
    directed: bool,
    // row-major n*n adjacency bits
    words: Vec<u64>,
}

impl std::fmt::Debug for NetworkSnapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "NetworkSnapshot(n={}, directed={}, edges={})",
            self.n,
            self.directed,
            self.edge_count()
        )
    }
}

impl NetworkSnapshot {
    /// Empty network (no edges).
    pub fn empty(n: usize, directed: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes { n });
        }
        let words = vec![0u64; (n * n).div_ceil(64)];
        Ok(Self { n, directed, words })
    }

    /// Complete network (every dyad present).
    pub fn complete(n: usize, directed: bool) -> Result<Self> {
        let mut y = Self::empty(n, directed)?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    y.set_raw(i, j, true);
                }
            }
        }
        Ok(y)
    }

    /// Build from 0/1 rows. Rejects self-edges and, for undirected input,
    /// any asymmetry: silent symmetrization would hide ingestion bugs.
    pub fn from_dense_rows(n: usize, directed: bool, rows: &[Vec<u8>]) -> Result<Self> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch {
                context: "adjacency rows",
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", rows.len(), rows.first().map_or(0, Vec::len)),
            });
        }
        let mut y = Self::empty(n, directed)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    if i == j {
                        return Err(Error::SelfEdge { node: i + 1 });
                    }
                    y.set_raw(i, j, true);
                }
            }
        }
        if !directed {
            for i in 0..n {
                for j in (i + 1)..n {
                    if y.get(i, j) != y.get(j, i) {
                        return Err(Error::AsymmetricAdjacency { i: i + 1, j: j + 1 });
                    }
                }
            }
        }
        Ok(y)
    }

    /// Build from an edge list of 0-based pairs.
    pub fn from_edges(
        n: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut y = Self::empty(n, directed)?;
        for (i, j) in edges {
            y.set_edge(i, j, true)?;
        }
        Ok(y)
    }

    /// Set one dyad, keeping undirected adjacency symmetric.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::NodeOutOfRange {
                node: i.max(j) + 1,
                n: self.n,
            });
        }
        if i == j {
            return Err(Error::SelfEdge { node: i + 1 });
        }
        self.set_raw(i, j, present);
        if !self.directed {
            self.set_raw(j, i, present);
        }
        Ok(())
    }

    #[inline]
    fn set_raw(&mut self, i: usize, j: usize, v: bool) {
        let idx = i * self.n + j;
        if v {
            self.words[idx >> 6] |= 1u64 << (idx & 63);
        } else {
            self.words[idx >> 6] &= !(1u64 << (idx & 63));
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let idx = i * self.n + j;
        (self.words[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Number of edges: ordered pairs for directed, unordered for undirected.
    pub fn edge_count(&self) -> usize {
        let ones: usize = self.words.iter().map(|w| w.count_ones() as usize).sum();
        if self.directed { ones } else { ones / 2 }
    }

    /// Out-degree of `i` (row sum). Equals the plain degree when undirected.
    pub fn out_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| j != i && self.get(i, j)).count()
    }

    /// In-degree of `i` (column sum). Equals the plain degree when undirected.
    pub fn in_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| j != i && self.get(j, i)).count()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::NodeCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.directed != other.directed {
            return Err(Error::DirectednessMismatch {
                left_directed: self.directed,
                right_directed: other.directed,
            });
        }
        Ok(())
    }
}

/// One categorical label per node, fixed over time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodalAttributes {
    labels: Vec<String>,
}

impl NodalAttributes {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Whether nodes `i` and `j` share the same label.
    #[inline]
    pub fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// An ordered sequence of snapshots sharing node set and directedness.
#[derive(Clone, Debug)]
pub struct NetworkSeries {
    snapshots: Vec<NetworkSnapshot>,
    attributes: Option<NodalAttributes>,
}

impl NetworkSeries {
    /// At least three snapshots are required: one transition alone carries
    /// no parameter difference to detect.
    pub fn new(
        snapshots: Vec<NetworkSnapshot>,
        attributes: Option<NodalAttributes>,
    ) -> Result<Self> {
        if snapshots.len() < 3 {
            return Err(Error::TooFewSnapshots {
                min: 3,
                got: snapshots.len(),
            });
        }
        let first = &snapshots[0];
        for s in &snapshots[1..] {
            first.check_compatible(s)?;
        }
        if let Some(attrs) = &attributes {
            if attrs.len() != first.n() {
                return Err(Error::AttributeLength {
                    got: attrs.len(),
                    expected: first.n(),
                });
            }
        }
        Ok(Self {
            snapshots,
            attributes,
        })
    }

    /// Number of snapshots T.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn n(&self) -> usize {
        self.snapshots[0].n()
    }

    pub fn directed(&self) -> bool {
        self.snapshots[0].directed()
    }

    pub fn snapshot(&self, idx: usize) -> &NetworkSnapshot {
        &self.snapshots[idx]
    }

    pub fn snapshots(&self) -> &[NetworkSnapshot] {
        &self.snapshots
    }

    pub fn attributes(&self) -> Option<&NodalAttributes> {
        self.attributes.as_ref()
    }
}

/// A position in the canonical dyad order together with its node pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadIndex {
    pub ordinal: usize,
    pub tail: usize,
    pub head: usize,
}

/// Number of dyads: `n(n-1)` directed, `n(n-1)/2` undirected.
pub fn dyad_count(n: usize, directed: bool) -> usize {
    if directed { n * (n - 1) } else { n * (n - 1) / 2 }
}

/// All dyads in canonical order: row-major over `(i, j)`, `i != j` when
/// directed, `i < j` when undirected.
pub fn enumerate_dyads(n: usize, directed: bool) -> Result<Vec<DyadIndex>> {
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    let mut out = Vec::with_capacity(dyad_count(n, directed));
    let mut ordinal = 0;
    for i in 0..n {
        let j0 = if directed { 0 } else { i + 1 };
        for j in j0..n {
            if i == j {
                continue;
            }
            out.push(DyadIndex {
                ordinal,
                tail: i,
                head: j,
            });
            ordinal += 1;
        }
    }
    Ok(out)
}

/// Formation network: the previous snapshot plus every edge that formed,
/// i.e. the elementwise max of the pair.
pub fn derive_formation(
    y_prev: &NetworkSnapshot,
    y_curr: &NetworkSnapshot,
) -> Result<NetworkSnapshot> {
    y_prev.check_compatible(y_curr)?;
    let mut out = y_prev.clone();
    for (w, c) in out.words.iter_mut().zip(&y_curr.words) {
        *w |= c;
    }
    Ok(out)
}

/// Dissolution network: the previous snapshot minus every edge that
/// dissolved, i.e. the elementwise min of the pair.
pub fn derive_dissolution(
    y_prev: &NetworkSnapshot,
    y_curr: &NetworkSnapshot,
) -> Result<NetworkSnapshot> {
    y_prev.check_compatible(y_curr)?;
    let mut out = y_prev.clone();
    for (w, c) in out.words.iter_mut().zip(&y_curr.words) {
        *w &= c;
    }
    Ok(out)
}

/// Rebuild the current snapshot from the previous one and its
/// formation/dissolution pair: dyads present before follow the
/// dissolution network, dyads absent before follow the formation network.
pub fn reconstruct_current(
    y_prev: &NetworkSnapshot,
    y_plus: &NetworkSnapshot,
    y_minus: &NetworkSnapshot,
) -> Result<NetworkSnapshot> {
    y_prev.check_compatible(y_plus)?;
    y_prev.check_compatible(y_minus)?;
    let n = y_prev.n();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if y_prev.get(i, j) && !y_plus.get(i, j) {
                return Err(Error::FormationNotSuperset { i: i + 1, j: j + 1 });
            }
            if !y_prev.get(i, j) && y_minus.get(i, j) {
                return Err(Error::DissolutionNotSubset { i: i + 1, j: j + 1 });
            }
        }
    }
    let mut out = y_prev.clone();
    for ((w, p), m) in out.words.iter_mut().zip(&y_plus.words).zip(&y_minus.words) {
        // keep surviving old edges, add newly formed ones
        let prev = *w;
        *w = (prev & m) | (!prev & p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    pub(crate) fn random_snapshot(
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

    #[test]
    fn formation_of_empty_pair_is_empty() {
        let e = NetworkSnapshot::empty(3, true).unwrap();
        let f = derive_formation(&e, &e).unwrap();
        assert_eq!(f.edge_count(), 0);
    }

    #[test]
    fn formation_is_union_of_edges() {
        let a = NetworkSnapshot::from_edges(3, true, [(0, 1)]).unwrap();
        let b = NetworkSnapshot::from_edges(3, true, [(1, 2)]).unwrap();
        let f = derive_formation(&a, &b).unwrap();
        assert!(f.get(0, 1) && f.get(1, 2));
        assert_eq!(f.edge_count(), 2);
    }

    #[test]
    fn dissolution_of_complete_pair_is_complete() {
        let c = NetworkSnapshot::complete(3, true).unwrap();
        let d = derive_dissolution(&c, &c).unwrap();
        assert_eq!(d.edge_count(), 6);
    }

    #[test]
    fn dissolution_is_intersection_of_edges() {
        let a = NetworkSnapshot::from_edges(3, true, [(0, 1), (0, 2)]).unwrap();
        let b = NetworkSnapshot::from_edges(3, true, [(0, 1)]).unwrap();
        let d = derive_dissolution(&a, &b).unwrap();
        assert!(d.get(0, 1) && !d.get(0, 2));
    }

    #[test]
    fn formation_dissolution_match_elementwise_max_min() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_snapshot(6, true, 0.4, &mut rng);
        let b = random_snapshot(6, true, 0.4, &mut rng);
        let f = derive_formation(&a, &b).unwrap();
        let d = derive_dissolution(&a, &b).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                assert_eq!(f.get(i, j), a.get(i, j) | b.get(i, j));
                assert_eq!(d.get(i, j), a.get(i, j) & b.get(i, j));
            }
        }
    }

    #[test]
    fn reconstruct_with_empty_prev_returns_formation() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let prev = NetworkSnapshot::empty(5, true).unwrap();
        let curr = random_snapshot(5, true, 0.5, &mut rng);
        let plus = derive_formation(&prev, &curr).unwrap();
        let minus = derive_dissolution(&prev, &curr).unwrap();
        let rec = reconstruct_current(&prev, &plus, &minus).unwrap();
        assert_eq!(rec, plus);
        assert_eq!(rec, curr);
    }

    #[test]
    fn reconstruct_with_complete_prev_returns_dissolution() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let prev = NetworkSnapshot::complete(5, true).unwrap();
        let curr = random_snapshot(5, true, 0.5, &mut rng);
        let plus = derive_formation(&prev, &curr).unwrap();
        let minus = derive_dissolution(&prev, &curr).unwrap();
        let rec = reconstruct_current(&prev, &plus, &minus).unwrap();
        assert_eq!(rec, minus);
        assert_eq!(rec, curr);
    }

    #[test]
    fn round_trip_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for case in 0..50 {
            let directed = case % 2 == 0;
            let prev = random_snapshot(8, directed, 0.4, &mut rng);
            let curr = random_snapshot(8, directed, 0.4, &mut rng);
            let plus = derive_formation(&prev, &curr).unwrap();
            let minus = derive_dissolution(&prev, &curr).unwrap();
            let rec = reconstruct_current(&prev, &plus, &minus).unwrap();
            assert_eq!(rec, curr, "case {case}");
        }
    }

    #[test]
    fn reconstruct_rejects_containment_violations() {
        let prev = NetworkSnapshot::from_edges(3, true, [(0, 1)]).unwrap();
        let empty = NetworkSnapshot::empty(3, true).unwrap();
        // formation missing a previous edge
        assert!(reconstruct_current(&prev, &empty, &empty).is_err());
        // dissolution with an edge absent from prev
        let plus = NetworkSnapshot::complete(3, true).unwrap();
        let bad_minus = NetworkSnapshot::from_edges(3, true, [(1, 2)]).unwrap();
        assert!(reconstruct_current(&prev, &plus, &bad_minus).is_err());
    }

    #[test]
    fn enumerate_dyads_undirected_upper_triangle() {
        let dyads = enumerate_dyads(3, false).unwrap();
        let pairs: Vec<_> = dyads.iter().map(|d| (d.tail + 1, d.head + 1)).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(dyad_count(3, false), 3);
    }

    #[test]
    fn enumerate_dyads_counts() {
        assert_eq!(enumerate_dyads(3, true).unwrap().len(), 6);
        assert_eq!(dyad_count(50, true), 2450);
        assert_eq!(enumerate_dyads(50, true).unwrap().len(), 2450);
    }

    #[test]
    fn enumerate_dyads_rejects_tiny_n() {
        assert!(enumerate_dyads(1, true).is_err());
    }

    #[test]
    fn dyads_have_no_diagonal_and_ordinals_are_sequential() {
        for directed in [false, true] {
            let dyads = enumerate_dyads(7, directed).unwrap();
            for (k, d) in dyads.iter().enumerate() {
                assert_eq!(d.ordinal, k);
                assert_ne!(d.tail, d.head);
                if !directed {
                    assert!(d.tail < d.head);
                }
            }
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = NetworkSnapshot::empty(3, true).unwrap();
        let b = NetworkSnapshot::empty(4, true).unwrap();
        let c = NetworkSnapshot::empty(3, false).unwrap();
        assert!(derive_formation(&a, &b).is_err());
        assert!(derive_dissolution(&a, &c).is_err());
    }

    #[test]
    fn dense_rows_reject_asymmetry_and_self_edges() {
        let rows = vec![vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]];
        assert!(NetworkSnapshot::from_dense_rows(3, false, &rows).is_err());
        let diag = vec![vec![1, 0, 0], vec![0, 0, 0], vec![0, 0, 0]];
        assert!(NetworkSnapshot::from_dense_rows(3, true, &diag).is_err());
    }

    #[test]
    fn series_validation() {
        let s = NetworkSnapshot::empty(3, true).unwrap();
        assert!(NetworkSeries::new(vec![s.clone(), s.clone()], None).is_err());
        let mixed = vec![
            s.clone(),
            s.clone(),
            NetworkSnapshot::empty(4, true).unwrap(),
        ];
        assert!(NetworkSeries::new(mixed, None).is_err());
        let attrs = NodalAttributes::new(vec!["a".into(), "b".into()]);
        assert!(NetworkSeries::new(vec![s.clone(), s.clone(), s.clone()], Some(attrs)).is_err());
        assert!(NetworkSeries::new(vec![s.clone(), s.clone(), s], None).is_ok());
    }
}
