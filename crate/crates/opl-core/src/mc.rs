//! Monte Carlo estimation of the event probabilities and their covariance
//! for vertex counts beyond exact reach.
//!
//! Both events are always read off the same sampled configuration; the
//! covariance is the object of interest, so the natural coupling is the
//! estimator. Standard errors come from batch means: the sample is split
//! into a fixed number of batches, each batch yields its own covariance
//! estimate, and the spread of those estimates gives the error bar.
//!
//! Sampling parallelizes across batches. Each batch owns a child stream
//! derived from `(seed, stream-id, batch index)` and keeps plain integer
//! tallies, so the merged result is identical for every thread count.

use crate::error::{Error, Result};
use crate::graph::{Params, VERTEX_A, VERTEX_B, VERTEX_S};
use crate::pairs::rational_string;
use crate::sampling::{draw_edge_state, presence_threshold, validate_samples, RngStream};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Smallest sample count `mc_estimate` accepts.
pub const MIN_SAMPLES: u64 = 1_000;

/// Number of batches behind every standard error.
pub const BATCH_COUNT: u64 = 50;

/// A sign call requires `|cov| > 3 * std_err`.
pub const SIGN_SIGNIFICANCE: f64 = 3.0;

/// Smallest total budget `locate_sign_change` accepts.
pub const MIN_SEARCH_BUDGET: u64 = 100_000;

/// One Monte Carlo run record.
///
/// `wall_time` is measured, not derived from the inputs; comparisons of
/// runs should go through [`McEstimate::same_statistics`], which ignores it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub p: f64,
    /// Exact edge probability as a lossless `num/den` string.
    pub p_exact: String,
    pub samples: u64,
    pub seed: u64,
    pub stream: u64,
    pub stream_count: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub count_ab: u64,
    pub p_a_hat: f64,
    pub p_b_hat: f64,
    pub p_ab_hat: f64,
    pub cov_hat: f64,
    pub std_err: f64,
    pub wall_time: f64,
}

impl McEstimate {
    /// Equality of everything reproducible, ignoring the measured wall time.
    pub fn same_statistics(&self, other: &Self) -> bool {
        self.n == other.n
            && self.p_exact == other.p_exact
            && self.samples == other.samples
            && self.seed == other.seed
            && self.stream == other.stream
            && self.stream_count == other.stream_count
            && self.count_a == other.count_a
            && self.count_b == other.count_b
            && self.count_ab == other.count_ab
            && self.p_a_hat == other.p_a_hat
            && self.p_b_hat == other.p_b_hat
            && self.p_ab_hat == other.p_ab_hat
            && self.cov_hat == other.cov_hat
            && self.std_err == other.std_err
    }
}

/// Reusable sampler that draws a configuration and evaluates both events
/// without materializing the configuration.
///
/// Consumes the stream exactly like `sample_oriented` followed by `events`:
/// two outputs per edge in canonical edge order.
struct EventSampler {
    n: usize,
    endpoints: Vec<(u32, u32)>,
    threshold: u128,
    out: Vec<Vec<u32>>,
    seen: Vec<u32>,
    stamp: u32,
    stack: Vec<u32>,
}

impl EventSampler {
    fn new(params: &Params) -> Self {
        let n = params.n();
        let mut endpoints = Vec::with_capacity(params.edge_count());
        for i in 0..n {
            for j in (i + 1)..n {
                endpoints.push((i as u32, j as u32));
            }
        }
        Self {
            n,
            endpoints,
            threshold: presence_threshold(params.p()),
            out: vec![Vec::new(); n],
            seen: vec![0; n],
            stamp: 0,
            stack: Vec::with_capacity(n),
        }
    }

    fn draw_events(&mut self, rng: &mut RngStream) -> (bool, bool) {
        for adj in &mut self.out {
            adj.clear();
        }
        for &(i, j) in &self.endpoints {
            match draw_edge_state(rng, self.threshold) {
                crate::graph::EdgeState::Absent => {}
                crate::graph::EdgeState::Forward => self.out[i as usize].push(j),
                crate::graph::EdgeState::Backward => self.out[j as usize].push(i),
            }
        }
        let a = self.reaches(VERTEX_A, VERTEX_S);
        let b = self.reaches(VERTEX_S, VERTEX_B);
        (a, b)
    }

    fn reaches(&mut self, u: usize, v: usize) -> bool {
        self.stamp += 1;
        let stamp = self.stamp;
        self.stack.clear();
        self.stack.push(u as u32);
        self.seen[u] = stamp;
        while let Some(x) = self.stack.pop() {
            for &y in &self.out[x as usize] {
                if y as usize == v {
                    return true;
                }
                if self.seen[y as usize] != stamp {
                    self.seen[y as usize] = stamp;
                    self.stack.push(y);
                }
            }
        }
        false
    }

    fn n(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Copy, Default)]
struct BatchTally {
    samples: u64,
    a: u64,
    b: u64,
    ab: u64,
}

impl BatchTally {
    fn cov(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let s = self.samples as f64;
        self.ab as f64 / s - (self.a as f64 / s) * (self.b as f64 / s)
    }
}

fn batch_sizes(samples: u64, batches: u64) -> Vec<u64> {
    let base = samples / batches;
    let extra = samples % batches;
    (0..batches)
        .map(|b| base + u64::from(b < extra))
        .collect()
}

fn run_batch(params: &Params, size: u64, stream: &mut RngStream) -> BatchTally {
    let mut sampler = EventSampler::new(params);
    debug_assert_eq!(sampler.n(), params.n());
    let mut tally = BatchTally {
        samples: size,
        ..Default::default()
    };
    for _ in 0..size {
        let (a, b) = sampler.draw_events(stream);
        tally.a += u64::from(a);
        tally.b += u64::from(b);
        tally.ab += u64::from(a && b);
    }
    tally
}

fn summarize(tallies: &[BatchTally]) -> (u64, u64, u64, u64, f64) {
    let mut total = BatchTally::default();
    for t in tallies {
        total.samples += t.samples;
        total.a += t.a;
        total.b += t.b;
        total.ab += t.ab;
    }
    let b = tallies.len() as f64;
    let mean: f64 = tallies.iter().map(BatchTally::cov).sum::<f64>() / b;
    let var: f64 = tallies
        .iter()
        .map(|t| {
            let d = t.cov() - mean;
            d * d
        })
        .sum::<f64>()
        / (b - 1.0);
    let std_err = (var / b).sqrt();
    (total.samples, total.a, total.b, total.ab, std_err)
}

/// Draws `samples` configurations, evaluates both events jointly on each and
/// returns the estimates with a batch-means standard error.
pub fn mc_estimate(params: &Params, samples: u64, rng: &RngStream) -> Result<McEstimate> {
    validate_samples(samples, MIN_SAMPLES)?;
    let start = Instant::now();
    let sizes = batch_sizes(samples, BATCH_COUNT);
    let tallies: Vec<BatchTally> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut stream = rng.child(b as u64);
            run_batch(params, size, &mut stream)
        })
        .collect();

    let (total, a, b, ab, std_err) = summarize(&tallies);
    debug_assert_eq!(total, samples);
    let s = samples as f64;
    let p_a_hat = a as f64 / s;
    let p_b_hat = b as f64 / s;
    let p_ab_hat = ab as f64 / s;
    Ok(McEstimate {
        n: params.n(),
        p: params.p_f64(),
        p_exact: rational_string(params.p()),
        samples,
        seed: rng.seed(),
        stream: rng.stream(),
        stream_count: BATCH_COUNT,
        count_a: a,
        count_b: b,
        count_ab: ab,
        p_a_hat,
        p_b_hat,
        p_ab_hat,
        cov_hat: p_ab_hat - p_a_hat * p_b_hat,
        std_err,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// A grid of Monte Carlo estimates at strictly increasing edge
/// probabilities.
#[derive(Clone, Debug)]
pub struct ScanCurve {
    pub n: usize,
    pub rows: Vec<McEstimate>,
}

impl ScanCurve {
    /// CSV rendering with one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p,samples,pA_hat,pB_hat,pAB_hat,cov_hat,std_err,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.n, r.p, r.samples, r.p_a_hat, r.p_b_hat, r.p_ab_hat, r.cov_hat, r.std_err, r.seed
            ));
        }
        out
    }
}

/// Runs one estimate per grid point, each on its own sub-stream.
pub fn mc_scan(
    n: usize,
    grid: &[BigRational],
    samples: u64,
    rng: &RngStream,
) -> Result<ScanCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "scan grid must be strictly ascending".into(),
        ));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (row, p) in grid.iter().enumerate() {
        let params = Params::new(n, p.clone())?;
        rows.push(mc_estimate(&params, samples, &rng.child(row as u64))?);
    }
    Ok(ScanCurve { n, rows })
}

/// Outcome of an adaptive search for a covariance sign change.
#[derive(Clone, Debug)]
pub enum SignSearch {
    /// Both bracket endpoints carry significant estimates of opposite sign.
    Bracket {
        p_lo: BigRational,
        p_hi: BigRational,
        cov_lo: f64,
        cov_hi: f64,
        /// Weaker of the two endpoint z-scores `|cov| / std_err`; at least
        /// the significance threshold by construction.
        confidence: f64,
        samples_used: u64,
    },
    Undetermined {
        reason: String,
        samples_used: u64,
    },
}

struct PointMeasure {
    cov: f64,
    std_err: f64,
}

impl PointMeasure {
    fn significant(&self) -> bool {
        self.std_err > 0.0 && self.cov.abs() > SIGN_SIGNIFICANCE * self.std_err
    }

    fn z(&self) -> f64 {
        if self.std_err > 0.0 {
            self.cov.abs() / self.std_err
        } else {
            0.0
        }
    }
}

// Evaluation points along one search: two endpoints plus bisection steps.
const MAX_SEARCH_POINTS: u64 = 14;
const SEARCH_STAGES: u64 = 5;
const BATCHES_PER_STAGE: u64 = 10;

/// Adaptive bisection driver, generic over the batch sampler so that a
/// synthetic pair model can stand in for the graph model under test.
///
/// `draw(p, batch_samples, key)` returns the `(A, B, AB)` tallies of one
/// fresh batch; `key` is unique per batch and must map to an independent
/// stream.
pub fn locate_sign_change_with<F>(
    lo: &BigRational,
    hi: &BigRational,
    budget: u64,
    mut draw: F,
) -> SignSearch
where
    F: FnMut(&BigRational, u64, u64) -> (u64, u64, u64),
{
    let share = budget / MAX_SEARCH_POINTS;
    let batch_size = (share / (SEARCH_STAGES * BATCHES_PER_STAGE)).max(1);
    let mut used_total = 0u64;
    let mut next_point = 0u64;

    let mut measure = |p: &BigRational, used_total: &mut u64, next_point: &mut u64| {
        let point = *next_point;
        *next_point += 1;
        let mut tallies: Vec<BatchTally> = Vec::new();
        for stage in 0..SEARCH_STAGES {
            for b in 0..BATCHES_PER_STAGE {
                let key = point * SEARCH_STAGES * BATCHES_PER_STAGE + stage * BATCHES_PER_STAGE + b;
                let (a, bb, ab) = draw(p, batch_size, key);
                tallies.push(BatchTally {
                    samples: batch_size,
                    a,
                    b: bb,
                    ab,
                });
                *used_total += batch_size;
            }
            let (samples, a, b, ab, std_err) = summarize(&tallies);
            let s = samples as f64;
            let cov = ab as f64 / s - (a as f64 / s) * (b as f64 / s);
            let m = PointMeasure { cov, std_err };
            if m.significant() || stage + 1 == SEARCH_STAGES {
                return m;
            }
        }
        unreachable!("the last stage always returns");
    };

    let lo_m = measure(lo, &mut used_total, &mut next_point);
    let hi_m = measure(hi, &mut used_total, &mut next_point);
    if !lo_m.significant() || !hi_m.significant() {
        return SignSearch::Undetermined {
            reason: "an interval endpoint never reached a significant sign call".into(),
            samples_used: used_total,
        };
    }
    if lo_m.cov.signum() == hi_m.cov.signum() {
        return SignSearch::Undetermined {
            reason: "both interval endpoints carry the same significant sign".into(),
            samples_used: used_total,
        };
    }

    let two = BigRational::from_integer(2.into());
    let mut p_lo = lo.clone();
    let mut p_hi = hi.clone();
    let mut m_lo = lo_m;
    let mut m_hi = hi_m;
    while next_point < MAX_SEARCH_POINTS && used_total + share <= budget {
        let mid = (&p_lo + &p_hi) / &two;
        let m = measure(&mid, &mut used_total, &mut next_point);
        if !m.significant() {
            break;
        }
        if m.cov.signum() == m_lo.cov.signum() {
            p_lo = mid;
            m_lo = m;
        } else {
            p_hi = mid;
            m_hi = m;
        }
    }

    SignSearch::Bracket {
        confidence: m_lo.z().min(m_hi.z()),
        cov_lo: m_lo.cov,
        cov_hi: m_hi.cov,
        p_lo,
        p_hi,
        samples_used: used_total,
    }
}

/// Searches `[lo, hi]` for a covariance sign change of the graph model at
/// vertex count `n`, spending at most `budget` samples.
pub fn locate_sign_change(
    n: usize,
    lo: &BigRational,
    hi: &BigRational,
    budget: u64,
    rng: &RngStream,
) -> Result<SignSearch> {
    if lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "invalid search range [{lo}, {hi}]"
        )));
    }
    if lo.is_negative() || hi > &BigRational::one() {
        return Err(Error::InvalidParameter(
            "search range must lie inside [0, 1]".into(),
        ));
    }
    if budget < MIN_SEARCH_BUDGET {
        return Err(Error::InvalidParameter(format!(
            "search budget must be at least {MIN_SEARCH_BUDGET}, got {budget}"
        )));
    }
    let result = locate_sign_change_with(lo, hi, budget, |p, batch, key| {
        let params = Params::new(n, p.clone()).expect("validated range");
        let mut stream = rng.child(key);
        let tally = run_batch(&params, batch, &mut stream);
        (tally.a, tally.b, tally.ab)
    });
    let (SignSearch::Bracket { samples_used, .. } | SignSearch::Undetermined { samples_used, .. }) =
        &result;
    debug_assert!(*samples_used <= budget);
    Ok(result)
}

/// Converts an exact rational to the nearest `f64`, for reporting only.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
