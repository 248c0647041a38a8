//! Closed-form large-n behavior of the covariance in the sparse regime
//! `p = 2c/n`, `0 <= c < 1`.
//!
//! The scaled covariance is `F(c) / n^3` with
//! `F(c) = (1 - (2 - c)(1 - c)^3) * c^3 / (1 - c)^5`, splitting into a
//! negative part from opposite-orientation pairs and a positive part from
//! shared-block pairs:
//!
//! `F(c) = -(2c^3 - c^4) / (1 - c)^2  +  c^3 / (1 - c)^5`.
//!
//! The sign flips at the root `c1` of the quartic `1 - (2 - c)(1 - c)^3`
//! inside (0, 1).

use crate::error::{Error, Result};

/// `1 - (2 - c)(1 - c)^3`, evaluated in the factored form.
pub fn quartic(c: f64) -> f64 {
    let u = 1.0 - c;
    1.0 - (2.0 - c) * u * u * u
}

/// The same quartic in expanded form `-c^4 + 5c^3 - 9c^2 + 7c - 1`.
pub fn quartic_expanded(c: f64) -> f64 {
    (((-c + 5.0) * c - 9.0) * c + 7.0) * c - 1.0
}

/// Discriminant of a quartic `a x^4 + b x^3 + c x^2 + d x + e` in exact
/// integer arithmetic.
pub fn quartic_discriminant_of(a: i64, b: i64, c: i64, d: i64, e: i64) -> i64 {
    256 * a * a * a * e * e * e - 192 * a * a * b * d * e * e - 128 * a * a * c * c * e * e
        + 144 * a * a * c * d * d * e
        - 27 * a * a * d * d * d * d
        + 144 * a * b * b * c * e * e
        - 6 * a * b * b * d * d * e
        - 80 * a * b * c * c * d * e
        + 18 * a * b * c * d * d * d
        + 16 * a * c * c * c * c * e
        - 4 * a * c * c * c * d * d
        - 27 * b * b * b * b * e * e
        + 18 * b * b * b * c * d * e
        - 4 * b * b * b * d * d * d
        - 4 * b * b * c * c * c * e
        + b * b * c * c * d * d
}

/// Discriminant of the sign-change quartic; a self-check value.
pub fn quartic_discriminant() -> i64 {
    quartic_discriminant_of(-1, 5, -9, 7, -1)
}

/// The two real roots of the quartic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalConstants {
    /// Root inside (0, 1): the scaled first critical point.
    pub c1: f64,
    /// Root inside (2, 3), outside the validity range of the formula.
    pub c2: f64,
}

fn quartic_derivative(c: f64) -> f64 {
    ((-4.0 * c + 15.0) * c - 18.0) * c + 7.0
}

fn polish_root(lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = quartic_expanded(lo);
    // bisection to 1e-12, then two Newton steps on the expanded form
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let f_mid = quartic_expanded(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..2 {
        root -= quartic_expanded(root) / quartic_derivative(root);
    }
    root
}

/// Finds both real roots by bisection in the fixed brackets (0, 1) and
/// (2, 3), each polished by two Newton steps. The residual is far below any
/// positive `tol`; the argument only guards against nonsense input.
pub fn find_c_roots(tol: f64) -> Result<CriticalConstants> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let roots = CriticalConstants {
        c1: polish_root(0.0, 1.0),
        c2: polish_root(2.0, 3.0),
    };
    debug_assert!(quartic(roots.c1).abs() < tol);
    debug_assert!(quartic(roots.c2).abs() < tol);
    Ok(roots)
}

/// Scaled covariance limit and its two-part decomposition at one `(c, n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticResult {
    pub c: f64,
    pub n: usize,
    /// `F(c) / n^3`.
    pub value: f64,
    /// Opposite-orientation contribution, `-(2c^3 - c^4) / (1-c)^2 / n^3`.
    pub type1: f64,
    /// Shared-block contribution, `c^3 / (1-c)^5 / n^3`.
    pub type2: f64,
}

/// The scale-free factor `F(c)`.
pub fn scaled_covariance_limit(c: f64) -> f64 {
    let u = 1.0 - c;
    quartic(c) * c.powi(3) / u.powi(5)
}

/// Evaluates the leading-order covariance at `(c, n)`, with the breakdown
/// into the negative and positive family contributions. Valid for
/// `0 <= c < 1` only.
pub fn main_formula(c: f64, n: usize) -> Result<AsymptoticResult> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "the closed form is valid for 0 <= c < 1, got {c}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let n3 = (n as f64).powi(3);
    let u = 1.0 - c;
    let type1 = -(2.0 * c.powi(3) - c.powi(4)) / (u * u) / n3;
    let type2 = c.powi(3) / u.powi(5) / n3;
    Ok(AsymptoticResult {
        c,
        n,
        value: scaled_covariance_limit(c) / n3,
        type1,
        type2,
    })
}

/// Partial sums of the two contribution series, truncated by total degree:
/// every term of degree at most `terms + 2` is included.
///
/// The negative family sums `(t + 1) c^(t+2)` over `t >= 1` toward
/// `(2c^3 - c^4) / (1-c)^2`; the positive family sums
/// `binomial(d+1, 4) c^d` over `d >= 3` toward `c^3 / (1-c)^5`. Both partial
/// sums are returned as magnitudes, nondecreasing in `terms` for `c > 0`.
pub fn truncated_series(c: f64, terms: usize) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "the series diverge outside 0 <= c < 1, got {c}"
        )));
    }
    if terms == 0 {
        return Err(Error::InvalidParameter("need at least one term".into()));
    }
    let mut type1 = 0.0;
    let mut c_pow = c * c; // c^(t+1) tracked incrementally
    for t in 1..=terms {
        c_pow *= c;
        type1 += (t as f64 + 1.0) * c_pow;
    }
    let mut type2 = 0.0;
    let mut c_pow = c * c;
    for d in 3..=(terms + 2) {
        c_pow *= c;
        // number of five-part compositions of d with two parts allowed zero
        let d = d as f64;
        let count = (d + 1.0) * d * (d - 1.0) * (d - 2.0) / 24.0;
        type2 += count * c_pow;
    }
    Ok((type1, type2))
}

/// Closed forms the truncated series converge to.
pub fn series_limits(c: f64) -> (f64, f64) {
    let u = 1.0 - c;
    (
        (2.0 * c.powi(3) - c.powi(4)) / (u * u),
        c.powi(3) / u.powi(5),
    )
}
