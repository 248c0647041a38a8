//! Statistical contracts of the sampler: three-state marginals, the
//! forward/backward split, and reproducibility across streams.

use opl_core::{rational, sample_oriented, EdgeState, Params, RngStream};

/// Chi-square critical value for 2 degrees of freedom at significance 1e-6:
/// the statistic exceeds `-2 ln(1e-6)` with probability 1e-6 under the null.
const CHI2_2DF_1E6: f64 = 27.631_021_115_928_547;

#[test]
fn three_state_marginals_pass_a_chi_square_test() {
    // One million edge states at p = 1/3; expected (2/3, 1/6, 1/6).
    let params = Params::new(20, rational(1, 3)).unwrap();
    let m = params.edge_count() as u64;
    let draws = 1_000_000u64.div_ceil(m);
    let mut rng = RngStream::new(60_221_023, 5);
    let mut counts = [0u64; 3];
    for _ in 0..draws {
        let cfg = sample_oriented(&params, &mut rng);
        for s in cfg.states() {
            match s {
                EdgeState::Absent => counts[0] += 1,
                EdgeState::Forward => counts[1] += 1,
                EdgeState::Backward => counts[2] += 1,
            }
        }
    }
    let total = (draws * m) as f64;
    let expected = [total * 2.0 / 3.0, total / 6.0, total / 6.0];
    let chi2: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&obs, exp)| {
            let d = obs as f64 - exp;
            d * d / exp
        })
        .sum();
    assert!(
        chi2 < CHI2_2DF_1E6,
        "chi2 = {chi2}, counts = {counts:?}, expected = {expected:?}"
    );
}

#[test]
fn presence_fraction_and_orientation_split_are_unbiased() {
    // 1e5 draws on 20 vertices at p = 0.3: the present-edge fraction stays
    // within four binomial standard deviations of 0.3 and the
    // forward/backward split within four of 1/2.
    let params = Params::new(20, rational(3, 10)).unwrap();
    let m = params.edge_count() as u64;
    let draws = 100_000u64;
    let mut rng = RngStream::new(31_415_926, 0);
    let mut present = 0u64;
    let mut forward = 0u64;
    for _ in 0..draws {
        let cfg = sample_oriented(&params, &mut rng);
        for s in cfg.states() {
            match s {
                EdgeState::Absent => {}
                EdgeState::Forward => {
                    present += 1;
                    forward += 1;
                }
                EdgeState::Backward => present += 1,
            }
        }
    }
    let edge_draws = (draws * m) as f64;
    let frac = present as f64 / edge_draws;
    let sd = (0.3 * 0.7 / edge_draws).sqrt();
    assert!(
        (frac - 0.3).abs() < 4.0 * sd,
        "present fraction {frac}, tolerance {}",
        4.0 * sd
    );
    let split = forward as f64 / present as f64;
    let sd_split = (0.25 / present as f64).sqrt();
    assert!(
        (split - 0.5).abs() < 4.0 * sd_split,
        "forward split {split}, tolerance {}",
        4.0 * sd_split
    );
}

#[test]
fn streams_are_reproducible_and_independent() {
    let params = Params::new(10, rational(2, 5)).unwrap();
    // bit-identical repetition
    let run = |stream: u64| {
        let mut rng = RngStream::new(17, stream);
        (0..50)
            .map(|_| sample_oriented(&params, &mut rng))
            .collect::<Vec<_>>()
    };
    assert_eq!(run(3), run(3));
    // different stream ids give different sequences
    assert_ne!(run(3), run(4));
}

#[test]
fn child_streams_do_not_collide_with_each_other() {
    let base = RngStream::new(123, 456);
    let mut seen = std::collections::HashSet::new();
    for k in 0..1000 {
        let mut child = base.child(k);
        let fingerprint: Vec<u64> = (0..4).map(|_| child.next_u64()).collect();
        assert!(seen.insert(fingerprint), "child {k} repeats another stream");
    }
}
