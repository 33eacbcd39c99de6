//! Monomial counts in weighted polynomial rings, Hilbert functions of
//! complete-intersection quotients, and the Picard generator data they give.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};
use crate::wps::{self, HypersurfaceSpec, SingularityReport};
use crate::{Error, Result};

/// `table[d]` = number of monomials of weighted degree `d`, for `d <= max`.
pub fn monomial_table(weights: &[u64], max: u64) -> Vec<BigUint> {
    let len = max as usize + 1;
    let mut table = vec![BigUint::zero(); len];
    table[0] = BigUint::from(1u32);
    for &a in weights {
        let a = a as usize;
        for d in a..len {
            let prev = table[d - a].clone();
            table[d] += prev;
        }
    }
    table
}

pub fn count_monomials(weights: &[u64], d: i64) -> BigUint {
    if d < 0 {
        return BigUint::zero();
    }
    monomial_table(weights, d as u64).pop().unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedRingSpec {
    pub weights: Vec<u64>,
    cut_degrees: Vec<u64>,
}

impl GradedRingSpec {
    pub fn new(weights: Vec<u64>, mut cut_degrees: Vec<u64>) -> Result<Self> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(Error::InvalidWeights(format!("{weights:?}")));
        }
        if cut_degrees.len() > 2 || cut_degrees.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "expected at most two positive cut degrees, got {cut_degrees:?}"
            )));
        }
        cut_degrees.sort_unstable();
        Ok(GradedRingSpec {
            weights,
            cut_degrees,
        })
    }

    pub fn cut_degrees(&self) -> &[u64] {
        &self.cut_degrees
    }
}

/// Koszul inclusion–exclusion over the cut degrees.
pub fn hilbert_ci(spec: &GradedRingSpec, d: i64) -> BigInt {
    if d < 0 {
        return BigInt::zero();
    }
    let table = monomial_table(&spec.weights, d as u64);
    let n = |e: i64| -> BigInt {
        if e < 0 {
            BigInt::zero()
        } else {
            BigInt::from(table[e as usize].clone())
        }
    };
    let cuts = &spec.cut_degrees;
    let mut total = BigInt::zero();
    for mask in 0u32..(1 << cuts.len()) {
        let shift: i64 = cuts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &c)| c as i64)
            .sum();
        if mask.count_ones() % 2 == 0 {
            total += n(d - shift);
        } else {
            total -= n(d - shift);
        }
    }
    total
}

/// Lcm of the weights of the singular vertices on the surface: the smallest
/// degree whose pure powers avoid every singular vertex. Returns 1 when there
/// is no singular vertex.
pub fn generator_degree(report: &SingularityReport) -> u64 {
    report
        .singular_vertex_weights()
        .into_iter()
        .fold(1u64, |l, w| l.lcm(&w))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorData {
    pub degree: u64,
    pub genus: u64,
    pub h_self: i64,
    #[serde(with = "rational::serde_str")]
    pub orb_self: Rational,
    /// `d / (a0 a1 a2 a3)`, reported only as a cross-check.
    #[serde(with = "rational::serde_str")]
    pub naive_orb_self: Rational,
}

pub fn generator_data(spec: &HypersurfaceSpec, report: &SingularityReport) -> Result<GeneratorData> {
    if !wps::is_k3_candidate(spec) {
        return Err(Error::NotK3 {
            degree: spec.degree,
            weight_sum: spec.weights.sum(),
        });
    }
    let degree = generator_degree(report);
    let ring = GradedRingSpec::new(spec.weights.weights().to_vec(), vec![spec.degree, degree])?;
    // Adjunction: the canonical sheaf of the curve X_{d,n} is O(n).
    let genus = hilbert_ci(&ring, degree as i64)
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter("negative Hilbert function value".into()))?;
    let h_self = 2 * genus as i64 - 2;
    let orb_self = rational::frac(h_self, (degree * degree) as i64);
    let prod: u64 = spec.weights.weights().iter().product();
    Ok(GeneratorData {
        degree,
        genus,
        h_self,
        orb_self,
        naive_orb_self: rational::frac(spec.degree as i64, prod as i64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::wps::singularity_report;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(count_monomials(&[5, 6, 8, 11], 0), big(1));
        assert_eq!(count_monomials(&[1, 1, 1, 1], 3), big(20));
        assert_eq!(count_monomials(&[5, 6, 8, 11], 30), big(6));
        assert_eq!(count_monomials(&[5, 6, 8, 11], -4), big(0));
    }

    #[test]
    fn hilbert_function_values() {
        let r = GradedRingSpec::new(vec![5, 6, 8, 11], vec![88, 30]).unwrap();
        assert_eq!(r.cut_degrees(), &[30, 88]);
        assert_eq!(hilbert_ci(&r, 88), BigInt::from(45));
        assert_eq!(hilbert_ci(&r, -1), BigInt::from(0));
        let r = GradedRingSpec::new(vec![7, 8, 9, 12], vec![36, 56]).unwrap();
        assert_eq!(hilbert_ci(&r, 56), BigInt::from(10));
    }

    #[test]
    fn empty_cut_list_is_monomial_count() {
        let r = GradedRingSpec::new(vec![2, 3, 7], vec![]).unwrap();
        for d in 0..60 {
            assert_eq!(hilbert_ci(&r, d), BigInt::from(count_monomials(&[2, 3, 7], d)));
        }
    }

    #[test]
    fn rejects_bad_ring_specs() {
        assert!(GradedRingSpec::new(vec![1, 0], vec![]).is_err());
        assert!(GradedRingSpec::new(vec![1, 2], vec![1, 2, 3]).is_err());
    }

    #[test]
    fn generator_data_for_paper_surfaces() {
        let cases = [
            ([5, 6, 8, 11], 30, 88, 45, 88, frac(1, 88)),
            ([7, 8, 9, 12], 36, 56, 10, 18, frac(9, 1568)),
            ([7, 8, 10, 25], 50, 56, 6, 10, frac(5, 1568)),
        ];
        for (w, d, deg, genus, h, orb) in cases {
            let spec = HypersurfaceSpec::generic(w, d).unwrap();
            let rep = singularity_report(&spec).unwrap();
            let g = generator_data(&spec, &rep).unwrap();
            assert_eq!((g.degree, g.genus, g.h_self), (deg, genus, h));
            assert_eq!(g.orb_self, orb);
        }
    }

    #[test]
    fn naive_orbifold_self_intersection_cross_check() {
        let spec = HypersurfaceSpec::generic([7, 8, 9, 12], 36).unwrap();
        let g = generator_data(&spec, &singularity_report(&spec).unwrap()).unwrap();
        assert_eq!(g.naive_orb_self, frac(1, 168));
        assert_ne!(g.naive_orb_self, g.orb_self);
    }

    #[test]
    fn smooth_quartic_generator() {
        let spec = HypersurfaceSpec::generic([1, 1, 1, 1], 4).unwrap();
        let rep = singularity_report(&spec).unwrap();
        assert_eq!(generator_degree(&rep), 1);
        let g = generator_data(&spec, &rep).unwrap();
        assert_eq!((g.genus, g.h_self), (3, 4));
    }

    #[test]
    fn non_k3_generator_data_errors() {
        let spec = HypersurfaceSpec::generic([1, 1, 1, 1], 3).unwrap();
        let rep = singularity_report(&spec).unwrap();
        assert!(matches!(generator_data(&spec, &rep), Err(Error::NotK3 { .. })));
    }
}
