//! Euler numbers, Betti bookkeeping and the singular correction term of
//! orbifold Riemann–Roch on K3 orbisurfaces with `A_n` points.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclotomic;
use crate::lattice::{DivisorClass, LatticeBasis, SurfaceState};
use crate::rational::{self, frac, int, Rational};
use crate::Result;

/// `e - sum n_i/(n_i + 1)` over the current singular points.
pub fn euler_orb(state: &SurfaceState) -> Rational {
    state
        .singularities
        .iter()
        .fold(int(state.euler), |acc, p| acc - frac(p.n as i64, p.n as i64 + 1))
}

/// Noether's formula with `K^2 = 0`: `(e + sum n_i)/12 = chi(O) = 2`.
pub fn noether_check(state: &SurfaceState) -> bool {
    state.euler + state.sum_n() == 24
}

/// Local correction for the character `j` of `Z/m` acting by `diag(zeta, zeta^-1)`.
pub fn mu_local(m: u64, j: u64) -> Result<Rational> {
    cyclotomic::character_sum(m, j)
}

/// Correction for the structure sheaf: the trivial character at every point.
pub fn mu_sing_trivial(singularities: &[u32]) -> Result<Rational> {
    singularities.iter().try_fold(Rational::zero(), |acc, &n| {
        Ok(acc + mu_local(n as u64 + 1, 0)?)
    })
}

/// Rank-2 Serre bundles are `O + O` near the singular set.
pub fn mu_sing_bundle_rank2(singularities: &[u32]) -> Result<Rational> {
    Ok(mu_sing_trivial(singularities)? * int(2))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundleChi {
    #[serde(with = "rational::serde_str")]
    pub l_self: Rational,
    #[serde(with = "rational::serde_str")]
    pub chi_orb: Rational,
    #[serde(with = "rational::serde_str")]
    pub upper_bound: Rational,
}

/// `chi_orb(L) = chi_orb(O) + L^2/2`, and `chi(L) <= 2 + L^2/2` since the
/// correction of `L` never exceeds that of `O`.
pub fn chi_orb_line(
    basis: &LatticeBasis,
    singularities: &[u32],
    l: &DivisorClass,
) -> Result<LineBundleChi> {
    let l_self = basis.self_intersection(l)?;
    let half = &l_self * frac(1, 2);
    let chi_orb_o = int(2) - mu_sing_trivial(singularities)?;
    Ok(LineBundleChi {
        chi_orb: chi_orb_o + &half,
        upper_bound: int(2) + half,
        l_self,
    })
}

pub fn chi_upper_bound(basis: &LatticeBasis, l: &DivisorClass) -> Result<Rational> {
    Ok(int(2) + basis.self_intersection(l)? * frac(1, 2))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbCharReport {
    pub euler_top: i64,
    #[serde(with = "rational::serde_str")]
    pub euler_orb: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_sing_trivial: Rational,
    pub betti: [i64; 5],
    pub noether: bool,
    pub consistent: bool,
}

pub fn orbchar_report(state: &SurfaceState) -> Result<OrbCharReport> {
    let betti = [1, 0, state.b2, 0, 1];
    Ok(OrbCharReport {
        euler_top: state.euler,
        euler_orb: euler_orb(state),
        mu_sing_trivial: mu_sing_trivial(&state.singularity_types())?,
        betti,
        noether: noether_check(state),
        consistent: state.euler == betti[0] - betti[1] + betti[2] - betti[3] + betti[4]
            && state.bookkeeping_consistent(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ExceptionalBlock, SingularPoint};
    use crate::Error;

    fn state(sing: &[u32], euler: i64) -> SurfaceState {
        SurfaceState {
            base_id: "t".into(),
            generator_degree: 1,
            lattice: LatticeBasis::new(int(2), vec![]).unwrap(),
            singularities: sing
                .iter()
                .map(|&n| SingularPoint {
                    origin: format!("A{n}"),
                    n,
                })
                .collect(),
            b2: euler - 2,
            euler,
            history: vec![],
        }
    }

    #[test]
    fn orbifold_euler_numbers() {
        assert_eq!(euler_orb(&state(&[], 24)), int(24));
        assert_eq!(euler_orb(&state(&[7, 10], 7)), frac(459, 88));
        assert_eq!(euler_orb(&state(&[1], 23)), frac(45, 2));
    }

    #[test]
    fn noether() {
        assert!(noether_check(&state(&[1, 7, 10], 6)));
        assert!(noether_check(&state(&[], 24)));
        assert!(!noether_check(&state(&[1, 7, 10], 7)));
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu_local(8, 0).unwrap(), frac(21, 32));
        assert_eq!(mu_local(11, 0).unwrap(), frac(10, 11));
        assert_eq!(mu_local(2, 1).unwrap(), frac(-1, 8));
        assert_eq!(mu_local(3, 3), Err(Error::CharacterOutOfRange { m: 3, j: 3 }));
        assert_eq!(mu_local(1, 0), Err(Error::GroupOrderTooSmall(1)));
    }

    #[test]
    fn mu_sing() {
        assert_eq!(mu_sing_trivial(&[7, 10]).unwrap(), frac(21, 32) + frac(10, 11));
        assert_eq!(mu_sing_trivial(&[]).unwrap(), int(0));
        assert_eq!(mu_sing_trivial(&[1]).unwrap(), frac(1, 8));
        assert_eq!(mu_sing_bundle_rank2(&[7, 10]).unwrap(), (frac(21, 32) + frac(10, 11)) * int(2));
        assert_eq!(mu_sing_bundle_rank2(&[1]).unwrap(), frac(1, 4));
        assert_eq!(mu_sing_bundle_rank2(&[]).unwrap(), int(0));
    }

    #[test]
    fn line_bundle_bounds() {
        // orbifold X~1: H^2 = 1/88, one G block, Q = 40H - 3G
        let b = LatticeBasis::new(frac(1, 88), vec![ExceptionalBlock::Single]).unwrap();
        let q = DivisorClass::from_tuple(&[40, 3]);
        let two_q = q.scale(&int(2));
        assert_eq!(chi_upper_bound(&b, &two_q).unwrap(), int(2) + frac(4, 11));
        let c = chi_orb_line(&b, &[7, 10], &two_q).unwrap();
        assert_eq!(c.upper_bound, int(2) + frac(4, 11));
        assert_eq!(c.chi_orb, int(2) - frac(21, 32) - frac(10, 11) + frac(4, 11));

        let b = LatticeBasis::new(int(2), vec![]).unwrap();
        let two_q = DivisorClass::from_tuple(&[2]);
        assert_eq!(chi_upper_bound(&b, &two_q).unwrap(), int(6));
        let zero = b.zero();
        assert_eq!(chi_orb_line(&b, &[1], &zero).unwrap().chi_orb, int(2) - frac(1, 8));
    }

    #[test]
    fn report_betti() {
        let r = orbchar_report(&state(&[1, 7, 10], 6)).unwrap();
        assert_eq!(r.betti, [1, 0, 4, 0, 1]);
        assert!(r.noether && r.consistent);
    }
}
