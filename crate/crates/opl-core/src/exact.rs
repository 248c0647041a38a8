//! Exact finite-n computation of the event probabilities and covariance by
//! complete enumeration of all `3^m` oriented configurations.
//!
//! The enumeration walks a mixed-radix base-3 counter over the edge indices.
//! The index range `[0, 3^m)` is split into disjoint chunks handled by
//! parallel workers; each worker keeps plain integer tallies per present-edge
//! count and the partial tables merge by entrywise addition, so the result is
//! identical for any chunking and any thread count.

use crate::error::{Error, Result};
use crate::graph::{edge_count, VERTEX_A, VERTEX_B, VERTEX_S};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

/// Default configuration budget: `3^15`, the full enumeration for n = 6.
pub const DEFAULT_BUDGET: u128 = 14_348_907;

/// Raised budget behind an explicit opt-in: `3^21`, the n = 7 enumeration.
/// Expect a multi-hour parallel run.
pub const DEEP_BUDGET: u128 = 10_460_353_203;

/// Largest vertex count the bit-parallel reachability kernel supports.
pub const MAX_EXACT_VERTICES: usize = 16;

/// Exact census of oriented configurations, indexed by the number `k` of
/// present edges: how many configurations with exactly `k` present edges
/// satisfy `a -> s`, `s -> b`, and both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsTable {
    n: usize,
    m: usize,
    n_a: Vec<BigUint>,
    n_b: Vec<BigUint>,
    n_ab: Vec<BigUint>,
}

/// `m` and `3^m` for a given vertex count.
pub fn required_budget(n: usize) -> (u32, BigUint) {
    let m = edge_count(n) as u32;
    (m, BigUint::from(3u32).pow(m))
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc = acc * BigUint::from(n - t) / BigUint::from(t + 1);
    }
    acc
}

#[derive(Clone)]
struct Tally {
    a: Vec<u64>,
    b: Vec<u64>,
    ab: Vec<u64>,
    total: Vec<u64>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Self {
            a: vec![0; m + 1],
            b: vec![0; m + 1],
            ab: vec![0; m + 1],
            total: vec![0; m + 1],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for k in 0..self.a.len() {
            self.a[k] += other.a[k];
            self.b[k] += other.b[k];
            self.ab[k] += other.ab[k];
            self.total[k] += other.total[k];
        }
        self
    }
}

/// Frontier expansion over per-vertex out-neighbor bitmasks.
#[inline]
fn mask_reaches(out: &[u16; MAX_EXACT_VERTICES], u: usize, v: usize) -> bool {
    let target = 1u16 << v;
    let mut seen: u16 = 1 << u;
    let mut frontier = seen;
    loop {
        let mut grown = seen;
        while frontier != 0 {
            let x = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            grown |= out[x];
        }
        if grown & target != 0 {
            return true;
        }
        if grown == seen {
            return false;
        }
        frontier = grown & !seen;
        seen = grown;
    }
}

struct Walker {
    digits: Vec<u8>,
    out: [u16; MAX_EXACT_VERTICES],
    k: usize,
}

impl Walker {
    fn decode(start: u64, endpoints: &[(usize, usize)]) -> Self {
        let m = endpoints.len();
        let mut digits = vec![0u8; m];
        let mut out = [0u16; MAX_EXACT_VERTICES];
        let mut k = 0;
        let mut x = start;
        for e in 0..m {
            let d = (x % 3) as u8;
            x /= 3;
            digits[e] = d;
            let (i, j) = endpoints[e];
            match d {
                0 => {}
                1 => {
                    out[i] |= 1 << j;
                    k += 1;
                }
                _ => {
                    out[j] |= 1 << i;
                    k += 1;
                }
            }
        }
        Self { digits, out, k }
    }

    /// Advances the base-3 counter by one, updating masks incrementally.
    #[inline]
    fn step(&mut self, endpoints: &[(usize, usize)]) {
        for (e, &(i, j)) in endpoints.iter().enumerate() {
            match self.digits[e] {
                0 => {
                    self.digits[e] = 1;
                    self.out[i] |= 1 << j;
                    self.k += 1;
                    return;
                }
                1 => {
                    self.digits[e] = 2;
                    self.out[i] &= !(1 << j);
                    self.out[j] |= 1 << i;
                    return;
                }
                _ => {
                    // carry into the next edge
                    self.digits[e] = 0;
                    self.out[j] &= !(1 << i);
                    self.k -= 1;
                }
            }
        }
        unreachable!("stepped past the last configuration");
    }
}

fn run_range(endpoints: &[(usize, usize)], lo: u64, hi: u64, m: usize) -> Tally {
    let mut tally = Tally::new(m);
    let mut walker = Walker::decode(lo, endpoints);
    for idx in lo..hi {
        if idx != lo {
            walker.step(endpoints);
        }
        let a = mask_reaches(&walker.out, VERTEX_A, VERTEX_S);
        let b = mask_reaches(&walker.out, VERTEX_S, VERTEX_B);
        let k = walker.k;
        tally.total[k] += 1;
        if a {
            tally.a[k] += 1;
        }
        if b {
            tally.b[k] += 1;
        }
        if a && b {
            tally.ab[k] += 1;
        }
    }
    tally
}

/// Enumerates every oriented configuration of the complete graph on `n`
/// vertices and returns the exact census. Refuses when `3^m` exceeds `cap`.
pub fn enumerate_counts(n: usize, cap: u128) -> Result<CountsTable> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    if n > MAX_EXACT_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "exact enumeration supports n <= {MAX_EXACT_VERTICES}, got {n}"
        )));
    }
    let m = edge_count(n);
    let (exp, required) = required_budget(n);
    if BigUint::from(cap) < required {
        return Err(Error::BudgetExceeded {
            base: 3,
            exponent: exp,
            required,
            cap,
        });
    }

    let endpoints: Vec<(usize, usize)> = {
        let mut v = Vec::with_capacity(m);
        for i in 0..n {
            for j in (i + 1)..n {
                v.push((i, j));
            }
        }
        v
    };

    let total: u64 = 3u64.pow(m as u32);
    let chunk_count = (rayon::current_num_threads() as u64 * 8).clamp(1, total);
    let chunk_len = total.div_ceil(chunk_count);
    let starts: Vec<u64> = (0..chunk_count).map(|c| c * chunk_len).collect();

    let tally = starts
        .into_par_iter()
        .map(|lo| run_range(&endpoints, lo, (lo + chunk_len).min(total), m))
        .reduce(|| Tally::new(m), Tally::merge);

    // Self-check of the counter walk: the census of configurations by
    // present-edge count must reproduce binomial(m, k) * 2^k.
    for k in 0..=m {
        let expected = binomial(m, k) << k;
        assert_eq!(
            BigUint::from(tally.total[k]),
            expected,
            "enumeration census mismatch at k = {k}"
        );
    }

    Ok(CountsTable {
        n,
        m,
        n_a: tally.a.into_iter().map(BigUint::from).collect(),
        n_b: tally.b.into_iter().map(BigUint::from).collect(),
        n_ab: tally.ab.into_iter().map(BigUint::from).collect(),
    })
}

impl CountsTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_a(&self) -> &[BigUint] {
        &self.n_a
    }

    pub fn n_b(&self) -> &[BigUint] {
        &self.n_b
    }

    pub fn n_ab(&self) -> &[BigUint] {
        &self.n_ab
    }

    /// Checks the structural invariants of the census.
    pub fn validate(&self) -> Result<()> {
        if self.m != edge_count(self.n) {
            return Err(Error::InvalidParameter(format!(
                "m = {} does not match n = {}",
                self.m, self.n
            )));
        }
        for (name, v) in [("N_A", &self.n_a), ("N_B", &self.n_b), ("N_AB", &self.n_ab)] {
            if v.len() != self.m + 1 {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {} entries, expected {}",
                    v.len(),
                    self.m + 1
                )));
            }
            if !v[0].is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "{name}[0] must be 0, no event holds on the empty graph"
                )));
            }
        }
        if self.n_a != self.n_b {
            return Err(Error::InvalidParameter(
                "N_A and N_B must agree by role symmetry".into(),
            ));
        }
        for k in 0..=self.m {
            let cap = binomial(self.m, k) << k;
            if self.n_ab[k] > self.n_a[k] || self.n_ab[k] > self.n_b[k] || self.n_a[k] > cap {
                return Err(Error::InvalidParameter(format!(
                    "census ordering violated at k = {k}"
                )));
            }
        }
        Ok(())
    }

    /// Exact event probabilities `(P_A, P_B, P_AB)` at edge probability `p`:
    /// each census entry is weighted by `(p/2)^k (1-p)^(m-k)`.
    pub fn probabilities(&self, p: &BigRational) -> Result<(BigRational, BigRational, BigRational)> {
        if p.is_negative() || p > &BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "edge probability must lie in [0, 1], got {p}"
            )));
        }
        let half = p / BigRational::from_integer(BigInt::from(2));
        let q = BigRational::one() - p;
        let mut half_pow = Vec::with_capacity(self.m + 1);
        let mut q_pow = Vec::with_capacity(self.m + 1);
        half_pow.push(BigRational::one());
        q_pow.push(BigRational::one());
        for t in 1..=self.m {
            half_pow.push(&half_pow[t - 1] * &half);
            q_pow.push(&q_pow[t - 1] * &q);
        }
        let weigh = |counts: &[BigUint]| {
            let mut acc = BigRational::zero();
            for k in 0..=self.m {
                if counts[k].is_zero() {
                    continue;
                }
                let c = BigRational::from_integer(BigInt::from(counts[k].clone()));
                acc += c * &half_pow[k] * &q_pow[self.m - k];
            }
            acc
        };
        Ok((weigh(&self.n_a), weigh(&self.n_b), weigh(&self.n_ab)))
    }

    /// Serializes to the interchange document
    /// `{"n": .., "m": .., "N_A": ["0", ..], "N_B": [..], "N_AB": [..]}`
    /// with every count as a decimal string.
    pub fn to_json(&self) -> String {
        let as_strings =
            |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();
        serde_json::json!({
            "n": self.n,
            "m": self.m,
            "N_A": as_strings(&self.n_a),
            "N_B": as_strings(&self.n_b),
            "N_AB": as_strings(&self.n_ab),
        })
        .to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("bad counts document: {e}")))?;
        let n = value["n"]
            .as_u64()
            .ok_or_else(|| Error::InvalidParameter("missing field n".into()))?
            as usize;
        let m = value["m"]
            .as_u64()
            .ok_or_else(|| Error::InvalidParameter("missing field m".into()))?
            as usize;
        let parse_vec = |key: &str| -> Result<Vec<BigUint>> {
            value[key]
                .as_array()
                .ok_or_else(|| Error::InvalidParameter(format!("missing field {key}")))?
                .iter()
                .map(|e| {
                    e.as_str()
                        .and_then(|s| BigUint::parse_bytes(s.as_bytes(), 10))
                        .ok_or_else(|| {
                            Error::InvalidParameter(format!("bad integer in {key}: {e}"))
                        })
                })
                .collect()
        };
        let table = CountsTable {
            n,
            m,
            n_a: parse_vec("N_A")?,
            n_b: parse_vec("N_B")?,
            n_ab: parse_vec("N_AB")?,
        };
        table.validate()?;
        Ok(table)
    }
}

/// Exact covariance of the two events from a census.
pub fn cov_from_counts(table: &CountsTable, p: &BigRational) -> Result<BigRational> {
    let (pa, pb, pab) = table.probabilities(p)?;
    Ok(pab - pa * pb)
}

/// Exact covariance at `(n, p)` by full enumeration under the given budget.
pub fn cov_exact(n: usize, p: &BigRational, cap: u128) -> Result<BigRational> {
    let table = enumerate_counts(n, cap)?;
    cov_from_counts(&table, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{events, rational, EdgeState, OrientedConfiguration, Params};

    fn biguints(v: &[u64]) -> Vec<BigUint> {
        v.iter().copied().map(BigUint::from).collect()
    }

    #[test]
    fn triangle_census() {
        let t = enumerate_counts(3, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.n_a(), &biguints(&[0, 1, 5, 5])[..]);
        assert_eq!(t.n_b(), &biguints(&[0, 1, 5, 5])[..]);
        assert_eq!(t.n_ab(), &biguints(&[0, 0, 1, 3])[..]);
        t.validate().unwrap();
    }

    #[test]
    fn one_edge_cannot_realize_both_events() {
        let t = enumerate_counts(3, DEFAULT_BUDGET).unwrap();
        assert!(t.n_ab()[1].is_zero());
    }

    #[test]
    fn triangle_probabilities_at_p_one() {
        let t = enumerate_counts(3, DEFAULT_BUDGET).unwrap();
        let (pa, pb, pab) = t.probabilities(&rational(1, 1)).unwrap();
        assert_eq!(pa, rational(5, 8));
        assert_eq!(pb, rational(5, 8));
        assert_eq!(pab, rational(3, 8));
    }

    #[test]
    fn probabilities_vanish_at_p_zero() {
        let t = enumerate_counts(4, DEFAULT_BUDGET).unwrap();
        let (pa, pb, pab) = t.probabilities(&rational(0, 1)).unwrap();
        assert!(pa.is_zero() && pb.is_zero() && pab.is_zero());
    }

    #[test]
    fn triangle_covariance_values() {
        // All three values verified against an independent 27-configuration
        // brute force (see the slow path comparison below).
        assert_eq!(cov_exact(3, &rational(1, 1), DEFAULT_BUDGET).unwrap(), rational(-1, 64));
        assert_eq!(cov_exact(3, &rational(1, 2), DEFAULT_BUDGET).unwrap(), rational(-41, 4096));
        assert!(cov_exact(3, &rational(1, 10), DEFAULT_BUDGET).unwrap().is_negative());
    }

    #[test]
    fn covariance_is_zero_at_p_zero() {
        for n in [3, 4, 5] {
            assert!(cov_exact(n, &rational(0, 1), DEFAULT_BUDGET).unwrap().is_zero());
        }
    }

    #[test]
    fn budget_refusal_reports_requirement() {
        let err = enumerate_counts(9, DEFAULT_BUDGET).unwrap_err();
        match err {
            Error::BudgetExceeded { base, exponent, required, cap } => {
                assert_eq!(base, 3);
                assert_eq!(exponent, 36);
                assert_eq!(required, BigUint::from(3u32).pow(36));
                assert_eq!(cap, DEFAULT_BUDGET);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    /// Slow, independent route: walk every configuration through the public
    /// graph API and recount. Keeps the fast mask walker honest.
    fn slow_counts(n: usize) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
        let m = edge_count(n);
        let params = Params::new(n, rational(1, 2)).unwrap();
        let mut n_a = vec![0u64; m + 1];
        let mut n_b = vec![0u64; m + 1];
        let mut n_ab = vec![0u64; m + 1];
        for idx in 0..3u64.pow(m as u32) {
            let mut x = idx;
            let states: Vec<EdgeState> = (0..m)
                .map(|_| {
                    let d = x % 3;
                    x /= 3;
                    match d {
                        0 => EdgeState::Absent,
                        1 => EdgeState::Forward,
                        _ => EdgeState::Backward,
                    }
                })
                .collect();
            let cfg = OrientedConfiguration::new(n, states).unwrap();
            let k = cfg.present_edges();
            let (a, b) = events(&cfg, &params).unwrap();
            if a {
                n_a[k] += 1;
            }
            if b {
                n_b[k] += 1;
            }
            if a && b {
                n_ab[k] += 1;
            }
        }
        (n_a, n_b, n_ab)
    }

    #[test]
    fn fast_walker_matches_slow_route() {
        for n in [3, 4] {
            let fast = enumerate_counts(n, DEFAULT_BUDGET).unwrap();
            let (a, b, ab) = slow_counts(n);
            assert_eq!(fast.n_a(), &biguints(&a)[..]);
            assert_eq!(fast.n_b(), &biguints(&b)[..]);
            assert_eq!(fast.n_ab(), &biguints(&ab)[..]);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = enumerate_counts(4, DEFAULT_BUDGET).unwrap();
        let text = t.to_json();
        let back = CountsTable::from_json(&text).unwrap();
        assert_eq!(t, back);
        assert!(text.contains("\"N_A\""));
    }

    #[test]
    fn json_rejects_corrupt_documents() {
        let t = enumerate_counts(3, DEFAULT_BUDGET).unwrap();
        // breaking one table entry violates the role symmetry invariant
        let tampered = t.to_json().replacen("\"5\"", "\"6\"", 1);
        assert!(CountsTable::from_json(&tampered).is_err());
        assert!(CountsTable::from_json("{\"n\": 3}").is_err());
    }
}
