//! Complete graph model: vertex roles, oriented configurations, directed
//! reachability and self-avoiding paths.
//!
//! The three special vertices are fixed once and for all: `a = 0`, `b = 1`
//! and `s = 2`. Every probability computed anywhere in this workspace refers
//! to the directional events `a -> s` and `s -> b` between these vertices.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// Source vertex of the first directional event (`a -> s`).
pub const VERTEX_A: usize = 0;
/// Target vertex of the second directional event (`s -> b`).
pub const VERTEX_B: usize = 1;
/// Shared middle vertex of both events.
pub const VERTEX_S: usize = 2;

/// Number of unordered vertex pairs of the complete graph on `n` vertices.
pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Canonical flat index of the pair `(i, j)` with `i < j < n`.
///
/// Pairs are ordered row by row: `(0,1), (0,2), .., (0,n-1), (1,2), ..`.
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(i * n - i * (i + 1) / 2 + (j - i - 1))
}

/// Inverse of [`edge_index`].
pub fn edge_endpoints(index: usize, n: usize) -> Result<(usize, usize)> {
    let m = edge_count(n);
    if index >= m {
        return Err(Error::InvalidParameter(format!(
            "edge index {index} out of range for n = {n} (m = {m})"
        )));
    }
    let mut i = 0;
    let mut row_start = 0;
    loop {
        let row_len = n - i - 1;
        if index < row_start + row_len {
            return Ok((i, i + 1 + (index - row_start)));
        }
        row_start += row_len;
        i += 1;
    }
}

/// State of one unordered vertex pair in an oriented configuration.
///
/// `Forward` on the pair `(i, j)` with `i < j` means the edge is present and
/// directed `i -> j`; `Backward` means `j -> i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Absent,
    Forward,
    Backward,
}

/// Model parameters: vertex count and edge probability.
///
/// The edge probability is kept as an exact rational so that every exact
/// computation downstream stays exact. The scaled form `p = 2c/n` is also
/// supported and applied in rational arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    n: usize,
    p: BigRational,
}

impl Params {
    pub fn new(n: usize, p: BigRational) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 3 to host the three event vertices, got {n}"
            )));
        }
        if p.is_negative() || p > BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "edge probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self { n, p })
    }

    /// Builds parameters from the scaled form `p = 2c/n`, exactly.
    pub fn from_scaled(n: usize, c: BigRational) -> Result<Self> {
        let p = c * BigRational::new(BigInt::from(2), BigInt::from(n.max(1)));
        Self::new(n, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN)
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.n)
    }
}

/// One oriented configuration: a three-way state for every vertex pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedConfiguration {
    n: usize,
    states: Vec<EdgeState>,
}

impl OrientedConfiguration {
    pub fn new(n: usize, states: Vec<EdgeState>) -> Result<Self> {
        if states.len() != edge_count(n) {
            return Err(Error::InvalidParameter(format!(
                "state vector has length {}, expected {} for n = {n}",
                states.len(),
                edge_count(n)
            )));
        }
        Ok(Self { n, states })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            states: vec![EdgeState::Absent; edge_count(n)],
        }
    }

    /// Builds a configuration from a list of directed edges `u -> v`.
    ///
    /// Listing the same unordered pair twice is an error.
    pub fn from_directed_edges(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut cfg = Self::empty(n);
        for &(u, v) in arcs {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidPair {
                    i: u.min(v),
                    j: u.max(v),
                    n,
                });
            }
            let idx = edge_index(u.min(v), u.max(v), n)?;
            if cfg.states[idx] != EdgeState::Absent {
                return Err(Error::InvalidParameter(format!(
                    "pair ({u}, {v}) listed twice"
                )));
            }
            cfg.states[idx] = if u < v {
                EdgeState::Forward
            } else {
                EdgeState::Backward
            };
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn state(&self, i: usize, j: usize) -> Result<EdgeState> {
        Ok(self.states[edge_index(i, j, self.n)?])
    }

    /// Number of present edges.
    pub fn present_edges(&self) -> usize {
        self.states
            .iter()
            .filter(|s| **s != EdgeState::Absent)
            .count()
    }

    /// Reverses every present edge in place.
    pub fn reversed(&self) -> Self {
        let states = self
            .states
            .iter()
            .map(|s| match s {
                EdgeState::Absent => EdgeState::Absent,
                EdgeState::Forward => EdgeState::Backward,
                EdgeState::Backward => EdgeState::Forward,
            })
            .collect();
        Self { n: self.n, states }
    }

    /// Out-neighbor lists induced by the present directed edges.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                match self.states[idx] {
                    EdgeState::Absent => {}
                    EdgeState::Forward => out[i].push(j),
                    EdgeState::Backward => out[j].push(i),
                }
                idx += 1;
            }
        }
        out
    }
}

/// Whether a directed path from `u` to `v` exists in the configuration.
///
/// Every vertex reaches itself.
pub fn reaches(cfg: &OrientedConfiguration, u: usize, v: usize) -> Result<bool> {
    let n = cfg.n();
    for w in [u, v] {
        if w >= n {
            return Err(Error::InvalidVertex { v: w, n });
        }
    }
    if u == v {
        return Ok(true);
    }
    let out = cfg.out_adjacency();
    let mut seen = vec![false; n];
    let mut stack = vec![u];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        for &y in &out[x] {
            if y == v {
                return Ok(true);
            }
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    Ok(false)
}

/// Evaluates the pair of directional events `(a -> s, s -> b)`.
pub fn events(cfg: &OrientedConfiguration, params: &Params) -> Result<(bool, bool)> {
    if cfg.n() != params.n() {
        return Err(Error::InvalidParameter(format!(
            "configuration is on {} vertices, parameters say {}",
            cfg.n(),
            params.n()
        )));
    }
    let a = reaches(cfg, VERTEX_A, VERTEX_S)?;
    let b = reaches(cfg, VERTEX_S, VERTEX_B)?;
    Ok((a, b))
}

/// A self-avoiding directed path, stored as its vertex sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    verts: Vec<usize>,
}

impl Path {
    pub fn new(verts: Vec<usize>) -> Result<Self> {
        if verts.len() < 2 {
            return Err(Error::InvalidParameter(
                "a path needs at least one edge".into(),
            ));
        }
        let mut seen = verts.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "path revisits a vertex: {verts:?}"
            )));
        }
        Ok(Self { verts })
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts
    }

    pub fn first(&self) -> usize {
        self.verts[0]
    }

    pub fn last(&self) -> usize {
        *self.verts.last().unwrap()
    }

    /// Directed edges in path order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.verts.windows(2).map(|w| (w[0], w[1]))
    }

    /// Unordered edges in path order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs().map(|(u, v)| (u.min(v), u.max(v)))
    }

    /// Whether every edge of the path is present with the matching
    /// orientation in `cfg`.
    pub fn present_in(&self, cfg: &OrientedConfiguration) -> Result<bool> {
        for (u, v) in self.arcs() {
            let state = cfg.state(u.min(v), u.max(v))?;
            let want = if u < v {
                EdgeState::Forward
            } else {
                EdgeState::Backward
            };
            if state != want {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Small-integer rational constructor, heavily used by tests.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_index_examples() {
        assert_eq!(edge_index(0, 1, 4).unwrap(), 0);
        assert_eq!(edge_index(2, 3, 4).unwrap(), 5);
        assert_eq!(edge_index(1, 3, 4).unwrap(), 4);
    }

    #[test]
    fn edge_index_rejects_bad_pairs() {
        assert!(edge_index(1, 1, 4).is_err());
        assert!(edge_index(2, 1, 4).is_err());
        assert!(edge_index(0, 4, 4).is_err());
    }

    #[test]
    fn single_edge_reachability() {
        let cfg = OrientedConfiguration::from_directed_edges(3, &[(VERTEX_A, VERTEX_S)]).unwrap();
        assert!(reaches(&cfg, VERTEX_A, VERTEX_S).unwrap());
        assert!(!reaches(&cfg, VERTEX_S, VERTEX_A).unwrap());
    }

    #[test]
    fn empty_configuration_reaches_nothing() {
        let cfg = OrientedConfiguration::empty(4);
        assert!(!reaches(&cfg, VERTEX_A, VERTEX_S).unwrap());
        assert!(reaches(&cfg, VERTEX_A, VERTEX_A).unwrap());
    }

    #[test]
    fn chain_and_anti_chain() {
        let x = 3;
        let cfg =
            OrientedConfiguration::from_directed_edges(4, &[(VERTEX_A, x), (x, VERTEX_S)]).unwrap();
        assert!(reaches(&cfg, VERTEX_A, VERTEX_S).unwrap());
        assert!(!reaches(&cfg, VERTEX_S, VERTEX_A).unwrap());
    }

    #[test]
    fn triangle_cycle_satisfies_both_events() {
        // s -> a, a -> b, b -> s: a reaches s through b and s reaches b through a.
        let cfg = OrientedConfiguration::from_directed_edges(
            3,
            &[(VERTEX_S, VERTEX_A), (VERTEX_A, VERTEX_B), (VERTEX_B, VERTEX_S)],
        )
        .unwrap();
        let params = Params::new(3, rational(1, 2)).unwrap();
        assert_eq!(events(&cfg, &params).unwrap(), (true, true));
    }

    #[test]
    fn direct_edges_satisfy_both_events() {
        let cfg = OrientedConfiguration::from_directed_edges(
            3,
            &[(VERTEX_A, VERTEX_S), (VERTEX_S, VERTEX_B)],
        )
        .unwrap();
        let params = Params::new(3, rational(1, 2)).unwrap();
        assert_eq!(events(&cfg, &params).unwrap(), (true, true));

        let reversed = OrientedConfiguration::from_directed_edges(
            3,
            &[(VERTEX_S, VERTEX_A), (VERTEX_B, VERTEX_S)],
        )
        .unwrap();
        assert_eq!(events(&reversed, &params).unwrap(), (false, false));
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(2, rational(1, 2)).is_err());
        assert!(Params::new(3, rational(3, 2)).is_err());
        assert!(Params::new(3, rational(-1, 2)).is_err());
        let p = Params::from_scaled(10, rational(1, 2)).unwrap();
        assert_eq!(p.p(), &rational(1, 10));
    }

    #[test]
    fn path_validation() {
        assert!(Path::new(vec![0]).is_err());
        assert!(Path::new(vec![0, 1, 0]).is_err());
        let p = Path::new(vec![0, 3, 2]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.arcs().collect::<Vec<_>>(), vec![(0, 3), (3, 2)]);
        assert_eq!(p.edges().collect::<Vec<_>>(), vec![(0, 3), (2, 3)]);
    }

    proptest::proptest! {
        #[test]
        fn edge_index_is_a_bijection(n in 2usize..=16) {
            let mut seen = vec![false; edge_count(n)];
            for i in 0..n {
                for j in (i + 1)..n {
                    let idx = edge_index(i, j, n).unwrap();
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(edge_endpoints(idx, n).unwrap(), (i, j));
                }
            }
            assert!(seen.into_iter().all(|b| b));
        }

        #[test]
        fn reversal_swaps_reachability(bits in proptest::collection::vec(0u8..3, 10), u in 0usize..5, v in 0usize..5) {
            let states: Vec<EdgeState> = bits
                .iter()
                .map(|b| match b {
                    0 => EdgeState::Absent,
                    1 => EdgeState::Forward,
                    _ => EdgeState::Backward,
                })
                .collect();
            let cfg = OrientedConfiguration::new(5, states).unwrap();
            let rev = cfg.reversed();
            proptest::prop_assert_eq!(
                reaches(&cfg, u, v).unwrap(),
                reaches(&rev, v, u).unwrap()
            );
        }

        #[test]
        fn reachability_is_transitive(bits in proptest::collection::vec(0u8..3, 10), u in 0usize..5, v in 0usize..5, w in 0usize..5) {
            let states: Vec<EdgeState> = bits
                .iter()
                .map(|b| match b {
                    0 => EdgeState::Absent,
                    1 => EdgeState::Forward,
                    _ => EdgeState::Backward,
                })
                .collect();
            let cfg = OrientedConfiguration::new(5, states).unwrap();
            if reaches(&cfg, u, v).unwrap() && reaches(&cfg, v, w).unwrap() {
                proptest::prop_assert!(reaches(&cfg, u, w).unwrap());
            }
        }
    }
}
