//! Undirected edge percolation on the complete graph, by complete subset
//! enumeration.
//!
//! This is the independent route behind the orientation/percolation
//! equivalence: the probability that `a -> s` holds in a random orientation
//! of G(n, p) equals the probability that `a` and `s` are connected in plain
//! percolation with edge probability `p/2`.

use crate::error::{Error, Result};
use crate::graph::edge_count;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact probability that `u` and `v` lie in the same component of a
/// percolation on the complete graph with edge probability `q`. Enumerates
/// all `2^m` edge subsets; refuses when that exceeds `cap`.
pub fn percolation_prob(n: usize, q: &BigRational, u: usize, v: usize, cap: u128) -> Result<BigRational> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "percolation enumeration supports 2 <= n <= 16, got {n}"
        )));
    }
    for w in [u, v] {
        if w >= n {
            return Err(Error::InvalidVertex { v: w, n });
        }
    }
    if q.is_negative() || q > &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {q}"
        )));
    }
    let m = edge_count(n);
    let required = BigUint::one() << m;
    if BigUint::from(cap) < required {
        return Err(Error::BudgetExceeded {
            base: 2,
            exponent: m as u32,
            required,
            cap,
        });
    }
    if u == v {
        return Ok(BigRational::one());
    }

    let mut endpoints = Vec::with_capacity(m);
    for i in 0..n {
        for j in (i + 1)..n {
            endpoints.push((i, j));
        }
    }

    // connected[k] = number of k-edge subsets joining u and v
    let mut connected = vec![0u64; m + 1];
    for subset in 0u64..(1 << m) {
        let mut adj = [0u16; 16];
        for (e, &(i, j)) in endpoints.iter().enumerate() {
            if subset >> e & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
        let mut seen: u16 = 1 << u;
        let mut frontier = seen;
        let joined = loop {
            let mut grown = seen;
            while frontier != 0 {
                let x = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                grown |= adj[x];
            }
            if grown >> v & 1 == 1 {
                break true;
            }
            if grown == seen {
                break false;
            }
            frontier = grown & !seen;
            seen = grown;
        };
        if joined {
            connected[subset.count_ones() as usize] += 1;
        }
    }

    let one_minus = BigRational::one() - q;
    let mut q_pow = Vec::with_capacity(m + 1);
    let mut r_pow = Vec::with_capacity(m + 1);
    q_pow.push(BigRational::one());
    r_pow.push(BigRational::one());
    for t in 1..=m {
        q_pow.push(&q_pow[t - 1] * q);
        r_pow.push(&r_pow[t - 1] * &one_minus);
    }
    let mut acc = BigRational::zero();
    for k in 0..=m {
        if connected[k] == 0 {
            continue;
        }
        acc += BigRational::from_integer(BigInt::from(connected[k])) * &q_pow[k] * &r_pow[m - k];
    }
    Ok(acc)
}
