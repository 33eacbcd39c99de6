//! Exact character sums over cyclic groups in the cyclotomic field `Q(zeta_m)`.
//!
//! Elements are integer vectors in `Z[x]/(x^m - 1)`; since `Phi_m` divides
//! `x^m - 1`, reducing modulo `Phi_m` at the very end is a ring map onto
//! `Z[zeta_m]`, so every intermediate step stays a cheap cyclic shift or
//! convolution. For `z` of exact order `d > 1`,
//! `1/(1 - z) = -(1/d) * sum_{k<d} k z^k`, which removes all inversions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{Error, Rational, Result};

/// `Phi_m` as integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<BigInt> {
    assert!(m >= 1);
    // x^m - 1 divided by Phi_d for every proper divisor d.
    let mut p = vec![BigInt::zero(); m as usize + 1];
    p[0] = BigInt::from(-1);
    p[m as usize] = BigInt::one();
    for d in (1..m).filter(|d| m % d == 0) {
        p = div_monic(&p, &cyclotomic_polynomial(d));
    }
    p
}

fn div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (k, dk) in den.iter().enumerate() {
            rem[i + k] -= &c * dk;
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    q
}

/// Remainder of `p` modulo the monic `modulus`.
fn reduce(mut p: Vec<BigInt>, modulus: &[BigInt]) -> Vec<BigInt> {
    let dd = modulus.len() - 1;
    while p.len() > dd {
        let c = p.pop().unwrap();
        if c.is_zero() {
            continue;
        }
        let base = p.len() - dd;
        for (k, mk) in modulus[..dd].iter().enumerate() {
            p[base + k] -= &c * mk;
        }
    }
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `m^2 / ((1 - z)(1 - z^-1))` for `z = x^t`, as an integer vector mod `x^m - 1`.
fn scaled_inverse_norm(m: usize, t: usize) -> Vec<i64> {
    let d = m / t.gcd(&m);
    let s = (m / d) as i64;
    // (sum k z^k)(sum l z^-l) / d^2, then times m^2 = (m/d)^2 d^2
    let mut out = vec![0i64; m];
    for k in 1..d {
        for l in 1..d {
            let e = ((k * t) % m + m - (l * t) % m) % m;
            out[e] += (k * l) as i64 * s * s;
        }
    }
    out
}

/// `mu(m, j) = (1/m) sum_{t=1}^{m-1} zeta^{jt} / ((1 - zeta^t)(1 - zeta^-t))`
/// for every character `j` in `0..m`.
pub fn character_sums(m: u64) -> Result<Vec<Rational>> {
    if m < 2 {
        return Err(Error::GroupOrderTooSmall(m));
    }
    let mu = m as usize;
    let phi = cyclotomic_polynomial(m);
    let weights: Vec<Vec<i64>> = (1..mu).map(|t| scaled_inverse_norm(mu, t)).collect();
    let denom = BigInt::from(m).pow(3);
    (0..mu)
        .map(|j| {
            let mut acc = vec![0i64; mu];
            for (t, w) in (1..mu).zip(&weights) {
                let shift = (j * t) % mu;
                for (e, &c) in w.iter().enumerate() {
                    acc[(e + shift) % mu] += c;
                }
            }
            let poly = reduce(acc.into_iter().map(BigInt::from).collect(), &phi);
            match poly.len() {
                0 => Ok(Rational::zero()),
                1 => Ok(Rational::new(poly[0].clone(), denom.clone())),
                _ => Err(Error::InvalidParameter(format!(
                    "character sum for m={m}, j={j} did not reduce to a rational"
                ))),
            }
        })
        .collect()
}

pub fn character_sum(m: u64, j: u64) -> Result<Rational> {
    if m < 2 {
        return Err(Error::GroupOrderTooSmall(m));
    }
    if j >= m {
        return Err(Error::CharacterOutOfRange { m, j });
    }
    Ok(character_sums(m)?.swap_remove(j as usize))
}
