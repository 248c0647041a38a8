//! Directed path pairs: enumeration, overlap classification, the per-pair
//! covariance kernel and exact class counts.
//!
//! A pair couples one path `a -> s` with one path `s -> b`. Its covariance
//! contribution depends only on how the two edge sets overlap:
//!
//! * no common edge: the indicators are independent, contribution 0;
//! * all common edges traversed the same way: positive contribution
//!   `(p/2)^(len_a + fresh_b) - (p/2)^(len_a + len_b)`;
//! * any common edge traversed opposite ways: the paths cannot coexist,
//!   contribution `-(p/2)^(len_a + len_b)`.
//!
//! Two overlap shapes get named classes because they dominate the sum for
//! sparse graphs. `Type1`: the single common edge is the one at `s`, which
//! the first path enters and the second path leaves, forcing opposite
//! orientations. `Type2`: the common edges form one contiguous block
//! traversed the same way by both paths, closing a directed cycle through
//! `s`. Everything else is `OtherSame` / `OtherOpposite` by orientation.

use crate::error::{Error, Result};
use crate::graph::{edge_index, Path, VERTEX_A, VERTEX_B, VERTEX_S};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;

/// Maximum path length considered by truncated path counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutOff(usize);

impl CutOff {
    pub fn new(limit: usize) -> Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidParameter("cut-off must be at least 1".into()));
        }
        Ok(Self(limit))
    }

    /// Default cut-off `ceil(ln(n)^2)`.
    pub fn default_for(n: usize) -> Self {
        let l = (n as f64).ln().powi(2).ceil() as usize;
        Self(l.max(1))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Vertex counts above this refuse blind path enumeration.
pub const DEFAULT_PATH_GUARD: usize = 12;

pub(crate) fn falling_factorial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for t in 0..k {
        if t >= n {
            return BigUint::zero();
        }
        acc *= BigUint::from(n - t);
    }
    acc
}

/// Total number of paths between two fixed vertices with length up to `l`.
pub fn path_count(n: usize, l: usize) -> BigUint {
    let mut acc = BigUint::zero();
    for len in 1..=l.min(n.saturating_sub(1)) {
        acc += falling_factorial(n.saturating_sub(2), len - 1);
    }
    acc
}

/// All self-avoiding directed paths from `u` to `v` of length at most the
/// cut-off, each exactly once, in lexicographic vertex order.
pub fn enum_paths(n: usize, u: usize, v: usize, cutoff: CutOff) -> Result<Vec<Path>> {
    enum_paths_guarded(n, u, v, cutoff, DEFAULT_PATH_GUARD)
}

pub fn enum_paths_guarded(
    n: usize,
    u: usize,
    v: usize,
    cutoff: CutOff,
    guard: usize,
) -> Result<Vec<Path>> {
    if u == v {
        return Err(Error::InvalidParameter(
            "path endpoints must be distinct".into(),
        ));
    }
    for w in [u, v] {
        if w >= n {
            return Err(Error::InvalidVertex { v: w, n });
        }
    }
    if n > guard {
        return Err(Error::PathGuard {
            n,
            guard,
            estimated: path_count(n, cutoff.get()),
        });
    }
    let limit = cutoff.get();
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut stack = Vec::with_capacity(limit + 1);
    stack.push(u);
    on_path[u] = true;
    dfs(n, v, limit, &mut stack, &mut on_path, &mut out);
    Ok(out)
}

fn dfs(
    n: usize,
    target: usize,
    limit: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
) {
    if stack.len() > limit {
        return;
    }
    for w in 0..n {
        if on_path[w] {
            continue;
        }
        if w == target {
            let mut verts = stack.clone();
            verts.push(w);
            out.push(Path::new(verts).expect("DFS builds valid paths"));
            continue;
        }
        stack.push(w);
        on_path[w] = true;
        dfs(n, target, limit, stack, on_path, out);
        stack.pop();
        on_path[w] = false;
    }
}

/// Top-level overlap class of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Disjoint,
    Type1,
    Type2,
    OtherSame,
    OtherOpposite,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ClassLabel::Disjoint => "Disjoint",
            ClassLabel::Type1 => "Type1",
            ClassLabel::Type2 => "Type2",
            ClassLabel::OtherSame => "OtherSame",
            ClassLabel::OtherOpposite => "OtherOpposite",
        };
        f.write_str(name)
    }
}

/// Full classification of one pair.
///
/// `Type1 { i, j }`: the `a`-side path has `i + 1` edges and the `b`-side
/// path `j + 1`; the single shared edge is the one at `s`.
///
/// `Type2 { i, j, k, l, m }`: the shared block has `k` edges; the `a`-side
/// path runs `i` edges from `a` to the block and `l` edges from the block
/// back to `s`; the `b`-side path runs `m` edges from `s` to the block and
/// `j` edges from the block to `b`. The block plus the `l` and `m` stretches
/// close a directed cycle through `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairClass {
    Disjoint,
    Type1 { i: usize, j: usize },
    Type2 { i: usize, j: usize, k: usize, l: usize, m: usize },
    OtherSame,
    OtherOpposite,
}

impl PairClass {
    pub fn label(&self) -> ClassLabel {
        match self {
            PairClass::Disjoint => ClassLabel::Disjoint,
            PairClass::Type1 { .. } => ClassLabel::Type1,
            PairClass::Type2 { .. } => ClassLabel::Type2,
            PairClass::OtherSame => ClassLabel::OtherSame,
            PairClass::OtherOpposite => ClassLabel::OtherOpposite,
        }
    }

    pub fn parameter_string(&self) -> String {
        match self {
            PairClass::Type1 { i, j } => format!("({i},{j})"),
            PairClass::Type2 { i, j, k, l, m } => format!("({i},{j},{k},{l},{m})"),
            _ => String::new(),
        }
    }
}

/// Overlap statistics of a pair, orientation-blind except where noted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overlap {
    /// Edges of the `a`-side path.
    pub len_a: usize,
    /// Edges of the `b`-side path.
    pub len_b: usize,
    /// Edges of the `b`-side path that the `a`-side path does not use.
    pub fresh_b: usize,
    /// Maximal runs those fresh edges form along the `b`-side path.
    pub runs_b: usize,
    /// Shared edges: `len_b - fresh_b`.
    pub shared: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifiedPair {
    pub class: PairClass,
    pub overlap: Overlap,
}

fn validate_endpoints(ga: &Path, gb: &Path) -> Result<()> {
    if ga.first() != VERTEX_A || ga.last() != VERTEX_S {
        return Err(Error::EndpointMismatch(format!(
            "first path must run a -> s, got {:?}",
            ga.vertices()
        )));
    }
    if gb.first() != VERTEX_S || gb.last() != VERTEX_B {
        return Err(Error::EndpointMismatch(format!(
            "second path must run s -> b, got {:?}",
            gb.vertices()
        )));
    }
    Ok(())
}

/// Classifies one pair and fills in the overlap record.
pub fn classify_pair(ga: &Path, gb: &Path) -> Result<ClassifiedPair> {
    validate_endpoints(ga, gb)?;
    let arcs_a: Vec<(usize, usize)> = ga.arcs().collect();
    let arcs_b: Vec<(usize, usize)> = gb.arcs().collect();
    let edges_a: Vec<(usize, usize)> = ga.edges().collect();
    let edges_b: Vec<(usize, usize)> = gb.edges().collect();

    let common_b: Vec<bool> = edges_b.iter().map(|e| edges_a.contains(e)).collect();
    let shared = common_b.iter().filter(|c| **c).count();
    let len_a = ga.len();
    let len_b = gb.len();
    let fresh_b = len_b - shared;
    let mut runs_b = 0;
    let mut in_run = false;
    for &c in &common_b {
        if !c && !in_run {
            runs_b += 1;
        }
        in_run = !c;
    }
    let overlap = Overlap {
        len_a,
        len_b,
        fresh_b,
        runs_b,
        shared,
    };

    if shared == 0 {
        return Ok(ClassifiedPair {
            class: PairClass::Disjoint,
            overlap,
        });
    }

    // orientation comparison on the shared edges
    let mut any_opposite = false;
    for (pos, e) in edges_b.iter().enumerate() {
        if !common_b[pos] {
            continue;
        }
        let pos_a = edges_a.iter().position(|f| f == e).expect("shared edge");
        if arcs_a[pos_a] != arcs_b[pos] {
            any_opposite = true;
            break;
        }
    }

    if shared == 1 {
        let e = edges_b[common_b.iter().position(|c| *c).unwrap()];
        if e.0 == VERTEX_S || e.1 == VERTEX_S {
            debug_assert!(any_opposite, "the edge at s is entered and left");
            return Ok(ClassifiedPair {
                class: PairClass::Type1 {
                    i: len_a - 1,
                    j: len_b - 1,
                },
                overlap,
            });
        }
    }

    if !any_opposite {
        let start_a = contiguous_start(&edges_a, &edges_b, shared);
        let start_b = contiguous_positions(&common_b, shared);
        if let (Some(i), Some(m)) = (start_a, start_b) {
            let k = shared;
            let class = PairClass::Type2 {
                i,
                j: len_b - m - k,
                k,
                l: len_a - i - k,
                m,
            };
            if let PairClass::Type2 { l, m, .. } = class {
                debug_assert!(l >= 1 && m >= 1, "block cannot touch s");
            }
            return Ok(ClassifiedPair {
                class,
                overlap,
            });
        }
        return Ok(ClassifiedPair {
            class: PairClass::OtherSame,
            overlap,
        });
    }

    Ok(ClassifiedPair {
        class: PairClass::OtherOpposite,
        overlap,
    })
}

/// Position of the shared block inside `edges_a`, if the shared edges sit
/// there contiguously.
fn contiguous_start(
    edges_a: &[(usize, usize)],
    edges_b: &[(usize, usize)],
    shared: usize,
) -> Option<usize> {
    let is_common: Vec<bool> = edges_a.iter().map(|e| edges_b.contains(e)).collect();
    contiguous_positions(&is_common, shared)
}

fn contiguous_positions(flags: &[bool], shared: usize) -> Option<usize> {
    let first = flags.iter().position(|c| *c)?;
    if first + shared > flags.len() {
        return None;
    }
    if flags[first..first + shared].iter().all(|c| *c)
        && flags[first + shared..].iter().all(|c| !*c)
    {
        Some(first)
    } else {
        None
    }
}

/// Exact covariance of the two path indicators at edge probability `p`.
pub fn pair_cov(ga: &Path, gb: &Path, p: &BigRational) -> Result<BigRational> {
    validate_endpoints(ga, gb)?;
    let edges_a: Vec<(usize, usize)> = ga.edges().collect();
    let arcs_a: Vec<(usize, usize)> = ga.arcs().collect();
    let mut shared = 0usize;
    let mut any_opposite = false;
    for (arc, e) in gb.arcs().zip(gb.edges()) {
        if let Some(pos) = edges_a.iter().position(|f| *f == e) {
            shared += 1;
            if arcs_a[pos] != arc {
                any_opposite = true;
            }
        }
    }
    if shared == 0 {
        return Ok(BigRational::zero());
    }
    let half = p / BigRational::from_integer(BigInt::from(2));
    let len_a = ga.len();
    let len_b = gb.len();
    let joint = pow_rational(&half, len_a + len_b);
    if any_opposite {
        Ok(-joint)
    } else {
        Ok(pow_rational(&half, len_a + (len_b - shared)) - joint)
    }
}

fn pow_rational(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// One aggregated line of a pair-sum breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSumRow {
    pub class: PairClass,
    pub pairs: u64,
    pub subtotal: BigRational,
}

/// The truncated-count covariance and its decomposition by pair class.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSum {
    pub n: usize,
    pub cutoff: usize,
    pub p: BigRational,
    /// Covariance of the truncated path counts.
    pub total: BigRational,
    /// Number of pairs considered: |paths a->s| * |paths s->b|.
    pub pair_count: u64,
    pub by_class: BTreeMap<ClassLabel, BigRational>,
    pub class_counts: BTreeMap<ClassLabel, u64>,
    pub rows: Vec<PairSumRow>,
}

impl PairSum {
    /// CSV rendering: `variant,parameters,pairs,subtotal` with subtotals as
    /// lossless `num/den` strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,parameters,pairs,subtotal\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},\"{}\",{},{}\n",
                row.class.label(),
                row.class.parameter_string(),
                row.pairs,
                rational_string(&row.subtotal),
            ));
        }
        out
    }
}

pub(crate) fn rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

// Compact per-pair profile used by the parallel scan. Carries exactly the
// data the kernel and the breakdown need.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Profile {
    Type1 { i: u8, j: u8 },
    Type2 { i: u8, j: u8, k: u8, l: u8, m: u8 },
    OtherSame { len_a: u8, len_b: u8, shared: u8 },
    OtherOpposite { len_a: u8, len_b: u8 },
}

struct PathRec {
    mask: u128,
    dir: u128,
    edge_seq: Vec<u8>,
    len: u8,
}

fn path_rec(path: &Path, n: usize) -> PathRec {
    let mut mask = 0u128;
    let mut dir = 0u128;
    let mut edge_seq = Vec::with_capacity(path.len());
    for (u, v) in path.arcs() {
        let idx = edge_index(u.min(v), u.max(v), n).expect("valid arc") as u8;
        mask |= 1u128 << idx;
        if u < v {
            dir |= 1u128 << idx;
        }
        edge_seq.push(idx);
    }
    PathRec {
        mask,
        dir,
        edge_seq,
        len: path.len() as u8,
    }
}

fn run_start(seq: &[u8], commons: u128, count: usize) -> Option<usize> {
    let first = seq.iter().position(|e| commons >> e & 1 == 1)?;
    if first + count > seq.len() {
        return None;
    }
    if seq[first..first + count]
        .iter()
        .all(|e| commons >> e & 1 == 1)
        && seq[first + count..].iter().all(|e| commons >> e & 1 == 0)
    {
        Some(first)
    } else {
        None
    }
}

#[inline]
fn classify_compact(a: &PathRec, b: &PathRec, s_mask: u128) -> Option<Profile> {
    let commons = a.mask & b.mask;
    if commons == 0 {
        return None;
    }
    let shared = commons.count_ones() as usize;
    let opposite = commons & (a.dir ^ b.dir);
    if shared == 1 && commons & s_mask != 0 {
        return Some(Profile::Type1 {
            i: a.len - 1,
            j: b.len - 1,
        });
    }
    if opposite == 0 {
        if let (Some(i), Some(m)) = (
            run_start(&a.edge_seq, commons, shared),
            run_start(&b.edge_seq, commons, shared),
        ) {
            return Some(Profile::Type2 {
                i: i as u8,
                j: b.len - (m + shared) as u8,
                k: shared as u8,
                l: a.len - (i + shared) as u8,
                m: m as u8,
            });
        }
        return Some(Profile::OtherSame {
            len_a: a.len,
            len_b: b.len,
            shared: shared as u8,
        });
    }
    Some(Profile::OtherOpposite {
        len_a: a.len,
        len_b: b.len,
    })
}

fn profile_kernel(profile: Profile, half_pow: &[BigRational]) -> BigRational {
    match profile {
        Profile::Type1 { i, j } => -half_pow[(i + j + 2) as usize].clone(),
        Profile::Type2 { i, j, k, l, m } => {
            let len_a = (i + k + l) as usize;
            let len_b = (j + k + m) as usize;
            &half_pow[len_a + len_b - k as usize] - &half_pow[len_a + len_b]
        }
        Profile::OtherSame { len_a, len_b, shared } => {
            &half_pow[(len_a + len_b - shared) as usize] - &half_pow[(len_a + len_b) as usize]
        }
        Profile::OtherOpposite { len_a, len_b } => -half_pow[(len_a + len_b) as usize].clone(),
    }
}

fn profile_class(profile: Profile) -> PairClass {
    match profile {
        Profile::Type1 { i, j } => PairClass::Type1 {
            i: i as usize,
            j: j as usize,
        },
        Profile::Type2 { i, j, k, l, m } => PairClass::Type2 {
            i: i as usize,
            j: j as usize,
            k: k as usize,
            l: l as usize,
            m: m as usize,
        },
        Profile::OtherSame { .. } => PairClass::OtherSame,
        Profile::OtherOpposite { .. } => PairClass::OtherOpposite,
    }
}

/// Sums the covariance kernel over every pair of truncated paths and
/// partitions the result by class.
///
/// The scan counts pairs per compact profile in plain integers and applies
/// the kernel once per profile, so the result is exact and independent of
/// the parallel split.
pub fn cov_pairsum(n: usize, cutoff: CutOff, p: &BigRational) -> Result<PairSum> {
    if p.is_negative() || p > &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let gas = enum_paths(n, VERTEX_A, VERTEX_S, cutoff)?;
    let gsb = enum_paths(n, VERTEX_S, VERTEX_B, cutoff)?;
    let recs_a: Vec<PathRec> = gas.iter().map(|g| path_rec(g, n)).collect();
    let recs_b: Vec<PathRec> = gsb.iter().map(|g| path_rec(g, n)).collect();

    let mut s_mask = 0u128;
    for w in 0..n {
        if w == VERTEX_S {
            continue;
        }
        let idx = edge_index(w.min(VERTEX_S), w.max(VERTEX_S), n)? as u8;
        s_mask |= 1u128 << idx;
    }

    let chunk = (recs_a.len() / (rayon::current_num_threads() * 4).max(1)).max(1);
    let (profiles, disjoint) = recs_a
        .par_chunks(chunk)
        .map(|chunk_a| {
            let mut local: BTreeMap<Profile, u64> = BTreeMap::new();
            let mut disjoint = 0u64;
            for a in chunk_a {
                for b in &recs_b {
                    match classify_compact(a, b, s_mask) {
                        None => disjoint += 1,
                        Some(profile) => *local.entry(profile).or_insert(0) += 1,
                    }
                }
            }
            (local, disjoint)
        })
        .reduce(
            || (BTreeMap::new(), 0u64),
            |(mut acc, d1), (other, d2)| {
                for (k, v) in other {
                    *acc.entry(k).or_insert(0) += v;
                }
                (acc, d1 + d2)
            },
        );

    let pair_count = (gas.len() as u64) * (gsb.len() as u64);
    let classified: u64 = profiles.values().sum();
    assert_eq!(
        disjoint + classified,
        pair_count,
        "every pair must land in exactly one class"
    );

    let max_exp = 2 * cutoff.get() + 2;
    let half = p / BigRational::from_integer(BigInt::from(2));
    let mut half_pow = Vec::with_capacity(max_exp + 1);
    half_pow.push(BigRational::one());
    for t in 1..=max_exp {
        half_pow.push(&half_pow[t - 1] * &half);
    }

    let mut rows: Vec<PairSumRow> = Vec::new();
    let mut by_class: BTreeMap<ClassLabel, BigRational> = BTreeMap::new();
    let mut class_counts: BTreeMap<ClassLabel, u64> = BTreeMap::new();
    for label in [
        ClassLabel::Disjoint,
        ClassLabel::Type1,
        ClassLabel::Type2,
        ClassLabel::OtherSame,
        ClassLabel::OtherOpposite,
    ] {
        by_class.insert(label, BigRational::zero());
        class_counts.insert(label, 0);
    }
    rows.push(PairSumRow {
        class: PairClass::Disjoint,
        pairs: disjoint,
        subtotal: BigRational::zero(),
    });
    class_counts.insert(ClassLabel::Disjoint, disjoint);

    let mut other_same = PairSumRow {
        class: PairClass::OtherSame,
        pairs: 0,
        subtotal: BigRational::zero(),
    };
    let mut other_opposite = PairSumRow {
        class: PairClass::OtherOpposite,
        pairs: 0,
        subtotal: BigRational::zero(),
    };
    let mut total = BigRational::zero();
    for (&profile, &count) in &profiles {
        let subtotal = profile_kernel(profile, &half_pow)
            * BigRational::from_integer(BigInt::from(count));
        total += &subtotal;
        let class = profile_class(profile);
        let label = class.label();
        *by_class.get_mut(&label).unwrap() += &subtotal;
        *class_counts.get_mut(&label).unwrap() += count;
        match class {
            PairClass::OtherSame => {
                other_same.pairs += count;
                other_same.subtotal += subtotal;
            }
            PairClass::OtherOpposite => {
                other_opposite.pairs += count;
                other_opposite.subtotal += subtotal;
            }
            parameterized => rows.push(PairSumRow {
                class: parameterized,
                pairs: count,
                subtotal,
            }),
        }
    }
    if other_same.pairs > 0 {
        rows.push(other_same);
    }
    if other_opposite.pairs > 0 {
        rows.push(other_opposite);
    }
    rows[1..].sort_by_key(|r| r.class);

    Ok(PairSum {
        n,
        cutoff: cutoff.get(),
        p: p.clone(),
        total,
        pair_count,
        by_class,
        class_counts,
        rows,
    })
}

/// Exact number of `Type1 { i, j }` pairs in the complete graph on `n`
/// vertices, by targeted enumeration.
///
/// The count is exact; simple falling-factorial products only bound it.
/// Vertex overlap between the two paths makes the bounds slack at small
/// parameters: for `(i, j) = (1, 1)` the exact count is `n - 3`, already
/// below the product bound's naive floor, because the middle vertices of the
/// two paths are forced to coincide.
pub fn count_type1(n: usize, i: usize, j: usize) -> Result<u64> {
    if i + j == 0 {
        return Err(Error::Constraint(
            "Type1 needs i + j >= 1, the two outer endpoints differ".into(),
        ));
    }
    if n > DEFAULT_PATH_GUARD {
        return Err(Error::PathGuard {
            n,
            guard: DEFAULT_PATH_GUARD,
            estimated: path_count(n, i.max(j) + 1),
        });
    }
    if n < 3 || i + 1 > n - 1 || j + 1 > n - 1 {
        return Ok(0);
    }

    let mut count = 0u64;
    for ga in paths_of_exact_length(n, VERTEX_A, VERTEX_S, i + 1) {
        let hinge = ga.vertices()[i];
        if j == 0 {
            if hinge == VERTEX_B {
                count += 1;
            }
            continue;
        }
        if hinge == VERTEX_B {
            continue;
        }
        let edges_a: Vec<(usize, usize)> = ga.edges().collect();
        // extend s, hinge with j - 1 interior vertices and then b, reusing
        // no edge of the first path
        count += extend_avoiding(n, hinge, VERTEX_B, j, &edges_a, &[VERTEX_S, hinge, VERTEX_B]);
    }
    Ok(count)
}

/// Exact number of `Type2 { i, j, k, l, m }` pairs in the complete graph on
/// `n` vertices, by targeted enumeration.
pub fn count_type2(n: usize, i: usize, j: usize, k: usize, l: usize, m: usize) -> Result<u64> {
    if k == 0 || l == 0 || m == 0 {
        return Err(Error::Constraint(
            "Type2 needs k, l, m >= 1: a real shared block and a closed cycle through s".into(),
        ));
    }
    if n > DEFAULT_PATH_GUARD {
        return Err(Error::PathGuard {
            n,
            guard: DEFAULT_PATH_GUARD,
            estimated: path_count(n, i + k + l),
        });
    }
    if n < 3 || i + k + l > n - 1 || j + k + m > n - 1 {
        return Ok(0);
    }

    let mut count = 0u64;
    for ga in paths_of_exact_length(n, VERTEX_A, VERTEX_S, i + k + l) {
        let verts = ga.vertices();
        let block: &[usize] = &verts[i..=i + k];
        let block_start = block[0];
        let block_end = block[k];
        if j == 0 {
            if block_end != VERTEX_B {
                continue;
            }
        } else if block.contains(&VERTEX_B) {
            continue;
        }
        let edges_a: Vec<(usize, usize)> = ga.edges().collect();

        // vertices the second path already owns
        let mut base_used: Vec<usize> = block.to_vec();
        base_used.push(VERTEX_S);
        if j >= 1 {
            base_used.push(VERTEX_B);
        }

        // stretch from s into the block start, m edges
        for head in segments_avoiding(n, VERTEX_S, block_start, m, &edges_a, &base_used) {
            if j == 0 {
                count += 1;
                continue;
            }
            let mut used: Vec<usize> = base_used.clone();
            used.extend(head.iter().copied());
            count += extend_avoiding(n, block_end, VERTEX_B, j, &edges_a, &used);
        }
    }
    Ok(count)
}

/// Paths of exactly the given length between fixed endpoints.
fn paths_of_exact_length(n: usize, u: usize, v: usize, len: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut stack = vec![u];
    on_path[u] = true;
    exact_dfs(n, v, len, &mut stack, &mut on_path, &mut out);
    out
}

fn exact_dfs(
    n: usize,
    target: usize,
    len: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
) {
    if stack.len() == len {
        if !on_path[target] {
            let mut verts = stack.clone();
            verts.push(target);
            out.push(Path::new(verts).expect("valid by construction"));
        }
        return;
    }
    for w in 0..n {
        if on_path[w] || w == target {
            continue;
        }
        stack.push(w);
        on_path[w] = true;
        exact_dfs(n, target, len, stack, on_path, out);
        stack.pop();
        on_path[w] = false;
    }
}

/// Number of ways to walk `edges` steps from `from` to `to`, with interior
/// vertices outside `used`, never touching an edge of `avoid_edges`.
fn extend_avoiding(
    n: usize,
    from: usize,
    to: usize,
    edges: usize,
    avoid_edges: &[(usize, usize)],
    used: &[usize],
) -> u64 {
    let mut used_flags = vec![false; n];
    for &w in used {
        used_flags[w] = true;
    }
    count_walks(n, from, to, edges, avoid_edges, &mut used_flags)
}

fn count_walks(
    n: usize,
    from: usize,
    to: usize,
    edges: usize,
    avoid_edges: &[(usize, usize)],
    used: &mut [bool],
) -> u64 {
    let blocked = |u: usize, v: usize| avoid_edges.contains(&(u.min(v), u.max(v)));
    if edges == 1 {
        return if blocked(from, to) { 0 } else { 1 };
    }
    let mut acc = 0;
    for w in 0..n {
        if used[w] || w == to || blocked(from, w) {
            continue;
        }
        used[w] = true;
        acc += count_walks(n, w, to, edges - 1, avoid_edges, used);
        used[w] = false;
    }
    acc
}

/// Enumerates the interior vertex sequences of the `s -> block` stretch.
fn segments_avoiding(
    n: usize,
    from: usize,
    to: usize,
    edges: usize,
    avoid_edges: &[(usize, usize)],
    used: &[usize],
) -> Vec<Vec<usize>> {
    let blocked = |u: usize, v: usize| avoid_edges.contains(&(u.min(v), u.max(v)));
    let mut out = Vec::new();
    let mut used_flags = vec![false; n];
    for &w in used {
        used_flags[w] = true;
    }
    let mut interior = Vec::new();
    collect_segments(
        n,
        from,
        to,
        edges,
        &blocked,
        &mut used_flags,
        &mut interior,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn collect_segments(
    n: usize,
    from: usize,
    to: usize,
    edges: usize,
    blocked: &dyn Fn(usize, usize) -> bool,
    used: &mut [bool],
    interior: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if edges == 1 {
        if !blocked(from, to) {
            out.push(interior.clone());
        }
        return;
    }
    for w in 0..n {
        if used[w] || w == to || blocked(from, w) {
            continue;
        }
        used[w] = true;
        interior.push(w);
        collect_segments(n, w, to, edges - 1, blocked, used, interior, out);
        interior.pop();
        used[w] = false;
    }
}

/// Expected truncated path count
/// `sum over lengths l of (n-2)(n-3)..(n-l) * (p/2)^l`.
pub fn expected_paths(n: usize, p: &BigRational, cutoff: CutOff) -> BigRational {
    let half = p / BigRational::from_integer(BigInt::from(2));
    let mut acc = BigRational::zero();
    let mut half_pow = BigRational::one();
    for len in 1..=cutoff.get().min(n.saturating_sub(1)) {
        half_pow *= &half;
        let ff = falling_factorial(n.saturating_sub(2), len - 1);
        acc += BigRational::from_integer(BigInt::from(ff)) * &half_pow;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rational;

    fn path(verts: &[usize]) -> Path {
        Path::new(verts.to_vec()).unwrap()
    }

    #[test]
    fn cutoff_validation_and_default() {
        assert!(CutOff::new(0).is_err());
        assert_eq!(CutOff::default_for(3).get(), 2); // ln(3)^2 = 1.2069
        assert_eq!(CutOff::default_for(12).get(), 7); // ln(12)^2 = 6.17
    }

    #[test]
    fn triangle_paths() {
        let ps = enum_paths(3, VERTEX_A, VERTEX_S, CutOff::new(2).unwrap()).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(ps.contains(&path(&[VERTEX_A, VERTEX_S])));
        assert!(ps.contains(&path(&[VERTEX_A, VERTEX_B, VERTEX_S])));
    }

    #[test]
    fn path_counts_follow_falling_factorials() {
        let ps = enum_paths(5, VERTEX_A, VERTEX_S, CutOff::new(3).unwrap()).unwrap();
        let mut by_len = [0usize; 4];
        for p in &ps {
            by_len[p.len()] += 1;
        }
        assert_eq!(&by_len[1..], &[1, 3, 6]);
        assert_eq!(path_count(5, 3), BigUint::from(10u32));
    }

    #[test]
    fn single_direct_path() {
        let ps = enum_paths(4, VERTEX_A, VERTEX_S, CutOff::new(1).unwrap()).unwrap();
        assert_eq!(ps.len(), 1);
    }

    #[test]
    fn guard_refuses_large_graphs() {
        let err = enum_paths(20, VERTEX_A, VERTEX_S, CutOff::new(4).unwrap()).unwrap_err();
        match err {
            Error::PathGuard { n, guard, estimated } => {
                assert_eq!(n, 20);
                assert_eq!(guard, DEFAULT_PATH_GUARD);
                assert!(estimated > BigUint::zero());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn classify_disjoint() {
        let c = classify_pair(&path(&[0, 2]), &path(&[2, 1])).unwrap();
        assert_eq!(c.class, PairClass::Disjoint);
        assert_eq!(c.overlap.shared, 0);
        assert_eq!(c.overlap.runs_b, 1);
    }

    #[test]
    fn classify_type1() {
        let c = classify_pair(&path(&[0, 2]), &path(&[2, 0, 1])).unwrap();
        assert_eq!(c.class, PairClass::Type1 { i: 0, j: 1 });
        assert_eq!(c.overlap.shared, 1);
        assert_eq!(c.overlap.fresh_b, 1);
    }

    #[test]
    fn classify_type2_triangle() {
        let c = classify_pair(&path(&[0, 1, 2]), &path(&[2, 0, 1])).unwrap();
        assert_eq!(
            c.class,
            PairClass::Type2 { i: 0, j: 0, k: 1, l: 1, m: 1 }
        );
        assert_eq!(c.overlap.shared, 1);
    }

    #[test]
    fn classify_rejects_wrong_endpoints() {
        assert!(classify_pair(&path(&[0, 1]), &path(&[2, 1])).is_err());
        assert!(classify_pair(&path(&[0, 2]), &path(&[1, 2])).is_err());
    }

    #[test]
    fn type1_with_extra_shared_edges_is_other_opposite() {
        // Both paths use the edge at s with opposite orientation, but they
        // also share the 0-3 edge, so the pair is not Type1.
        let c = classify_pair(&path(&[0, 3, 2]), &path(&[2, 3, 0, 1])).unwrap();
        assert_eq!(c.overlap.shared, 2);
        assert_eq!(c.class, PairClass::OtherOpposite);
    }

    #[test]
    fn kernel_examples() {
        let p = rational(1, 2);
        let half = rational(1, 4);
        // disjoint
        assert!(pair_cov(&path(&[0, 2]), &path(&[2, 1]), &p).unwrap().is_zero());
        // the minimal opposite-orientation pair: -(p/2)^3
        let t1 = pair_cov(&path(&[0, 2]), &path(&[2, 0, 1]), &p).unwrap();
        assert_eq!(t1, -pow_rational(&half, 3));
        // the triangle cycle pair: (p/2)^3 - (p/2)^4
        let t2 = pair_cov(&path(&[0, 1, 2]), &path(&[2, 0, 1]), &p).unwrap();
        assert_eq!(t2, pow_rational(&half, 3) - pow_rational(&half, 4));
    }

    #[test]
    fn pairsum_frozen_values() {
        // Both values verified against a configuration-enumeration oracle
        // over all 3^6 states of the four-vertex graph.
        let l3 = CutOff::new(3).unwrap();
        let quarter = cov_pairsum(4, l3, &rational(1, 4)).unwrap();
        assert_eq!(quarter.total, rational(-125, 65_536));
        let half = cov_pairsum(4, l3, &rational(1, 2)).unwrap();
        assert_eq!(half.total, rational(-19, 1024));
    }

    #[test]
    fn pairsum_is_zero_at_p_zero() {
        let sum = cov_pairsum(4, CutOff::new(3).unwrap(), &rational(0, 1)).unwrap();
        assert!(sum.total.is_zero());
        for v in sum.by_class.values() {
            assert!(v.is_zero());
        }
    }

    #[test]
    fn pairsum_classes_partition_the_total() {
        let sum = cov_pairsum(5, CutOff::new(4).unwrap(), &rational(1, 3)).unwrap();
        let class_sum: BigRational = sum.by_class.values().cloned().sum();
        assert_eq!(class_sum, sum.total);
        let count_sum: u64 = sum.class_counts.values().sum();
        assert_eq!(count_sum, sum.pair_count);
        let row_count: u64 = sum.rows.iter().map(|r| r.pairs).sum();
        assert_eq!(row_count, sum.pair_count);
    }

    #[test]
    fn pairsum_agrees_with_per_pair_classification() {
        // The compact scan and the public classifier must tell the same
        // story pair by pair.
        let cutoff = CutOff::new(4).unwrap();
        let gas = enum_paths(5, VERTEX_A, VERTEX_S, cutoff).unwrap();
        let gsb = enum_paths(5, VERTEX_S, VERTEX_B, cutoff).unwrap();
        let p = rational(2, 7);
        let mut total = BigRational::zero();
        let mut by_class: BTreeMap<ClassLabel, u64> = BTreeMap::new();
        for ga in &gas {
            for gb in &gsb {
                let c = classify_pair(ga, gb).unwrap();
                *by_class.entry(c.class.label()).or_insert(0) += 1;
                total += pair_cov(ga, gb, &p).unwrap();
            }
        }
        let sum = cov_pairsum(5, cutoff, &p).unwrap();
        assert_eq!(sum.total, total);
        for (label, count) in by_class {
            assert_eq!(sum.class_counts[&label], count, "{label}");
        }
    }

    #[test]
    fn type1_counts() {
        assert_eq!(count_type1(5, 0, 1).unwrap(), 1);
        assert_eq!(count_type1(5, 1, 0).unwrap(), 1);
        // the two middle vertices are forced to coincide, leaving n - 3 choices
        assert_eq!(count_type1(5, 1, 1).unwrap(), 2);
        assert_eq!(count_type1(6, 1, 1).unwrap(), 3);
        assert_eq!(count_type1(3, 0, 1).unwrap(), 1);
        assert!(matches!(count_type1(5, 0, 0), Err(Error::Constraint(_))));
    }

    #[test]
    fn type2_counts() {
        assert_eq!(count_type2(3, 0, 0, 1, 1, 1).unwrap(), 1);
        assert_eq!(count_type2(5, 1, 0, 1, 1, 1).unwrap(), 2);
        assert!(matches!(
            count_type2(5, 0, 0, 0, 1, 1),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn targeted_counts_match_full_classification() {
        // Cross-check the targeted enumerations against the all-pairs scan
        // on the full pair population of the five-vertex graph.
        let sum = cov_pairsum(5, CutOff::new(4).unwrap(), &rational(1, 2)).unwrap();
        for row in &sum.rows {
            match row.class {
                PairClass::Type1 { i, j } => {
                    assert_eq!(count_type1(5, i, j).unwrap(), row.pairs, "Type1({i},{j})");
                }
                PairClass::Type2 { i, j, k, l, m } => {
                    assert_eq!(
                        count_type2(5, i, j, k, l, m).unwrap(),
                        row.pairs,
                        "Type2({i},{j},{k},{l},{m})"
                    );
                }
                _ => {}
            }
        }
        // and nothing was missed: zero counts stay zero
        assert_eq!(count_type2(5, 0, 0, 4, 1, 1).unwrap(), 0);
    }

    #[test]
    fn expected_paths_examples() {
        assert_eq!(
            expected_paths(3, &rational(1, 1), CutOff::new(2).unwrap()),
            rational(3, 4)
        );
        assert!(expected_paths(6, &rational(0, 1), CutOff::new(3).unwrap()).is_zero());
        assert_eq!(
            expected_paths(4, &rational(1, 3), CutOff::new(1).unwrap()),
            rational(1, 6)
        );
        assert_eq!(
            expected_paths(5, &rational(1, 2), CutOff::new(3).unwrap()),
            rational(17, 32)
        );
    }

    #[test]
    fn csv_has_headers_and_rows() {
        let sum = cov_pairsum(4, CutOff::new(3).unwrap(), &rational(1, 2)).unwrap();
        let csv = sum.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "variant,parameters,pairs,subtotal");
        assert!(csv.contains("Type1,\"(0,1)\",1,"));
        assert!(csv.contains("Disjoint"));
    }
}
