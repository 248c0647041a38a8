//! The exact covariance polynomial in the edge probability `p`, and root
//! isolation by dense sign scan plus bisection.
//!
//! For a fixed `n` the covariance is a polynomial of degree at most `2m`:
//! `cov(p) = P_AB(p) - P_A(p) * P_B(p)` where each event probability expands
//! `sum_k N[k] (p/2)^k (1-p)^(m-k)`. Keeping it with exact rational
//! coefficients lets every later query reuse one enumeration.

use crate::error::{Error, Result};
use crate::exact::{binomial, enumerate_counts, CountsTable};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Default number of grid points in the sign scan.
pub const DEFAULT_SCAN_GRID: usize = 10_000;

/// Exact covariance polynomial for one vertex count.
///
/// Root isolation by sign scan only sees sign changes: a zero of even
/// multiplicity that touches the axis without crossing it is invisible to
/// this method. The covariance zeros of interest are sign changes, so this
/// limitation is accepted rather than worked around.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariancePolynomial {
    n: usize,
    coeffs: Vec<BigRational>,
    // coefficients scaled to a common positive denominator, for fast exact
    // sign evaluation in pure integer arithmetic
    int_coeffs: Vec<BigInt>,
}

fn event_polynomial(counts: &[BigUint], m: usize) -> Vec<BigRational> {
    let mut coeffs = vec![BigRational::zero(); m + 1];
    for k in 0..=m {
        if counts[k].is_zero() {
            continue;
        }
        let scale = BigRational::new(
            BigInt::from(counts[k].clone()),
            BigInt::from(BigUint::one() << k),
        );
        for j in 0..=(m - k) {
            let mut term = &scale * BigRational::from_integer(BigInt::from(binomial(m - k, j)));
            if j % 2 == 1 {
                term = -term;
            }
            coeffs[k + j] += term;
        }
    }
    coeffs
}

/// Builds the covariance polynomial from a census.
pub fn cov_polynomial_from_counts(table: &CountsTable) -> CovariancePolynomial {
    let m = table.m();
    let pa = event_polynomial(table.n_a(), m);
    let pb = event_polynomial(table.n_b(), m);
    let pab = event_polynomial(table.n_ab(), m);

    let mut coeffs = vec![BigRational::zero(); 2 * m + 1];
    for (d, c) in pab.into_iter().enumerate() {
        coeffs[d] += c;
    }
    for (i, x) in pa.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in pb.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            coeffs[i + j] -= x * y;
        }
    }
    CovariancePolynomial::new(table.n(), coeffs)
}

/// Enumerates (within `cap`) and builds the covariance polynomial.
pub fn cov_polynomial(n: usize, cap: u128) -> Result<CovariancePolynomial> {
    Ok(cov_polynomial_from_counts(&enumerate_counts(n, cap)?))
}

impl CovariancePolynomial {
    fn new(n: usize, coeffs: Vec<BigRational>) -> Self {
        // common denominator
        let mut den = BigInt::one();
        for c in &coeffs {
            let d = c.denom();
            let g = num_integer::Integer::gcd(&den, d);
            den = &den / g * d;
        }
        let int_coeffs = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self { n, coeffs, int_coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients of `p^0 .. p^(2m)`.
    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    /// Exact evaluation by Horner's rule.
    pub fn evaluate(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c;
        }
        acc
    }

    /// Exact sign at a rational point, computed in integer arithmetic.
    ///
    /// Evaluates `sum_d int_coeffs[d] * u^d * v^(D-d)` for `p = u/v`; the
    /// shared positive denominator cannot change the sign.
    pub fn sign_at(&self, p: &BigRational) -> i8 {
        let u = p.numer();
        let v = p.denom();
        let d_max = self.int_coeffs.len() - 1;
        let mut v_pow = vec![BigInt::one(); d_max + 1];
        for t in 1..=d_max {
            v_pow[t] = &v_pow[t - 1] * v;
        }
        let mut acc = BigInt::zero();
        for (d, c) in self.int_coeffs.iter().enumerate().rev() {
            acc = acc * u + c * &v_pow[d_max - d];
        }
        match acc.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }
}

/// A bracket around a sign change. `lo == hi` marks an exactly hit root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
}

/// Scans `[lo, hi]` on a dense grid for sign changes of the polynomial and
/// refines each by bisection until the bracket is no wider than `tol`.
///
/// Zeros at the interval endpoints are not reported; a critical probability
/// is interior by definition. Ascending order of brackets is guaranteed.
pub fn find_critical_in_poly(
    poly: &CovariancePolynomial,
    lo: &BigRational,
    hi: &BigRational,
    tol: &BigRational,
    grid: usize,
) -> Result<Vec<RootBracket>> {
    if lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "degenerate interval [{lo}, {hi}]"
        )));
    }
    if lo.is_negative() || hi > &BigRational::one() {
        return Err(Error::InvalidParameter(
            "interval must lie inside [0, 1]".into(),
        ));
    }
    if !tol.is_positive() {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points".into()));
    }

    let width = hi - lo;
    let step = &width / BigRational::from_integer(BigInt::from(grid));
    let mut xs = Vec::with_capacity(grid + 1);
    for t in 0..=grid {
        xs.push(lo + &step * BigRational::from_integer(BigInt::from(t)));
    }
    let signs: Vec<i8> = xs.iter().map(|x| poly.sign_at(x)).collect();

    let mut brackets = Vec::new();
    for t in 0..=grid {
        if signs[t] == 0 {
            // an exact zero on the grid; endpoints excluded
            if t != 0 && t != grid {
                brackets.push(RootBracket {
                    lo: xs[t].clone(),
                    hi: xs[t].clone(),
                });
            }
            continue;
        }
        if t == grid {
            break;
        }
        if signs[t + 1] != 0 && signs[t] != signs[t + 1] {
            brackets.push(refine(poly, xs[t].clone(), xs[t + 1].clone(), tol));
        }
    }
    Ok(brackets)
}

fn refine(poly: &CovariancePolynomial, mut lo: BigRational, mut hi: BigRational, tol: &BigRational) -> RootBracket {
    let two = BigRational::from_integer(BigInt::from(2));
    let sign_lo = poly.sign_at(&lo);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / &two;
        match poly.sign_at(&mid) {
            0 => {
                return RootBracket {
                    lo: mid.clone(),
                    hi: mid,
                }
            }
            s if s == sign_lo => lo = mid,
            _ => hi = mid,
        }
    }
    RootBracket { lo, hi }
}

/// Full pipeline from a vertex count: enumerate (within `cap`), build the
/// polynomial and isolate sign changes on the given interval.
pub fn find_critical_exact(
    n: usize,
    lo: &BigRational,
    hi: &BigRational,
    tol: &BigRational,
    cap: u128,
) -> Result<Vec<RootBracket>> {
    let poly = cov_polynomial(n, cap)?;
    find_critical_in_poly(&poly, lo, hi, tol, DEFAULT_SCAN_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cov_from_counts, DEFAULT_BUDGET};
    use crate::graph::rational;
    use crate::sampling::RngStream;

    fn poly_for(n: usize) -> CovariancePolynomial {
        cov_polynomial(n, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn low_order_coefficients_vanish() {
        for n in [3, 4, 5] {
            let poly = poly_for(n);
            for d in 0..3 {
                assert!(poly.coefficients()[d].is_zero(), "n = {n}, degree {d}");
            }
        }
    }

    #[test]
    fn triangle_leading_coefficients() {
        let poly = poly_for(3);
        assert_eq!(poly.coefficients()[3], rational(-1, 8));
        assert_eq!(poly.coefficients()[4], rational(1, 16));
        assert_eq!(poly.evaluate(&rational(1, 1)), rational(-1, 64));
    }

    #[test]
    fn evaluation_matches_direct_summation() {
        let table = enumerate_counts(4, DEFAULT_BUDGET).unwrap();
        let poly = cov_polynomial_from_counts(&table);
        for p in [rational(1, 2), rational(1, 4), rational(9, 10)] {
            assert_eq!(poly.evaluate(&p), cov_from_counts(&table, &p).unwrap());
        }
    }

    #[test]
    fn two_route_equality_at_random_rationals() {
        let table = enumerate_counts(5, DEFAULT_BUDGET).unwrap();
        let poly = cov_polynomial_from_counts(&table);
        let mut rng = RngStream::new(1234, 0);
        for _ in 0..20 {
            let num = rng.next_u64() % 10_000;
            let p = rational(num as i64, 10_000);
            assert_eq!(poly.evaluate(&p), cov_from_counts(&table, &p).unwrap());
        }
    }

    #[test]
    fn sign_at_agrees_with_evaluate() {
        let poly = poly_for(5);
        for t in 0..40 {
            let p = rational(t, 40);
            let v = poly.evaluate(&p);
            let s = poly.sign_at(&p);
            if v.is_zero() {
                assert_eq!(s, 0);
            } else if v.is_negative() {
                assert_eq!(s, -1);
            } else {
                assert_eq!(s, 1);
            }
        }
    }

    #[test]
    fn triangle_has_no_interior_critical_point() {
        let poly = poly_for(3);
        let brackets =
            find_critical_in_poly(&poly, &rational(0, 1), &rational(1, 1), &rational(1, 1000), 500)
                .unwrap();
        assert!(brackets.is_empty());
    }

    #[test]
    fn five_vertices_have_one_sign_change() {
        // The n = 5 covariance flips from negative to positive between
        // p = 0.72 and p = 0.73.
        let poly = poly_for(5);
        let brackets =
            find_critical_in_poly(&poly, &rational(0, 1), &rational(1, 1), &rational(1, 100_000), 1000)
                .unwrap();
        assert_eq!(brackets.len(), 1);
        let b = &brackets[0];
        assert!(b.lo >= rational(72, 100) && b.hi <= rational(73, 100), "{b:?}");
        if b.lo != b.hi {
            assert_eq!(poly.sign_at(&b.lo) * poly.sign_at(&b.hi), -1);
            assert!(&b.hi - &b.lo <= rational(1, 100_000));
        }
    }

    #[test]
    fn endpoint_zero_is_not_reported() {
        // cov(4, p) vanishes exactly at p = 1 but nowhere inside (0, 1).
        let poly = poly_for(4);
        assert_eq!(poly.sign_at(&rational(1, 1)), 0);
        let brackets =
            find_critical_in_poly(&poly, &rational(0, 1), &rational(1, 1), &rational(1, 1000), 400)
                .unwrap();
        assert!(brackets.is_empty());
    }

    #[test]
    fn degenerate_interval_is_rejected() {
        let poly = poly_for(3);
        assert!(find_critical_in_poly(&poly, &rational(1, 2), &rational(1, 2), &rational(1, 100), 10).is_err());
    }
}
