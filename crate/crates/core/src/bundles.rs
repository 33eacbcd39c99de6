//! Numeric certificates for rank-2 stable bundles built by the Serre
//! construction, and the anomaly budget `e_orb - (c2 - c1^2/2)`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{
    is_ample, DivisorClass, ExceptionalBlock, LatticeBasis, ProfileOutcome, SurfaceState,
};
use crate::orbchar::{self, chi_upper_bound};
use crate::rational::{self, frac, int, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

impl NamedCheck {
    fn new(name: &str, passed: bool, witness: String) -> Self {
        NamedCheck {
            name: name.into(),
            passed,
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableBundleCertificate {
    pub rank: u32,
    #[serde(with = "rational::serde_str")]
    pub c1: Rational,
    #[serde(with = "rational::serde_str")]
    pub c2: Rational,
    /// Length of the zero-dimensional subscheme `Z`.
    pub ell: i64,
    /// `chi(2Q)` or its upper bound; Cayley–Bacharach holds once `ell > ell1`.
    #[serde(with = "rational::serde_str")]
    pub ell1: Rational,
    pub q: DivisorClass,
    #[serde(with = "rational::serde_str")]
    pub q_self: Rational,
    pub profile_results: Vec<ProfileOutcome>,
    pub orbifold: bool,
    pub checks: Vec<NamedCheck>,
}

impl StableBundleCertificate {
    pub fn valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn pick_ell(ell1: &Rational, ell: Option<i64>) -> Result<i64> {
    let min: num_bigint::BigInt = ell1.floor().to_integer() + 1;
    let min: i64 = min
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("chi bound {ell1} out of range")))?;
    match ell {
        None => Ok(min),
        Some(l) if l >= min => Ok(l),
        Some(l) => Err(Error::InvalidParameter(format!(
            "ell = {l} must exceed chi(2Q) = {}",
            rational::to_string(ell1)
        ))),
    }
}

/// Cartier case: `Q` ample with `Q^2 = 2`, so `chi(2Q) = 2 + 4 = 6` and any
/// `ell >= 7` points in general position give `c2 = ell - 2`.
pub fn serre_feasibility(
    basis: &LatticeBasis,
    q: &DivisorClass,
    ell: Option<i64>,
) -> Result<StableBundleCertificate> {
    let amp = is_ample(basis, q)?;
    if !amp.ample {
        return Err(Error::CertificateRejected(format!("{q} is not ample")));
    }
    if amp.q_self != int(2) {
        return Err(Error::CertificateRejected(format!(
            "Q^2 = {}, expected 2",
            rational::to_string(&amp.q_self)
        )));
    }
    let ell1 = chi_upper_bound(basis, &q.scale(&int(2)))?;
    let ell = pick_ell(&ell1, ell)?;
    let c2 = int(ell) - &amp.q_self;
    let checks = vec![
        NamedCheck::new("ample", true, format!("{q}")),
        NamedCheck::new("q_self_is_2", true, rational::to_string(&amp.q_self)),
        NamedCheck::new(
            "cayley_bacharach",
            int(ell) > ell1,
            format!("{ell} > {}", rational::to_string(&ell1)),
        ),
    ];
    Ok(StableBundleCertificate {
        rank: 2,
        c1: Rational::zero(),
        c2,
        ell,
        ell1,
        q: q.clone(),
        q_self: amp.q_self,
        profile_results: amp.profile_results,
        orbifold: false,
        checks,
    })
}

/// Orbifold case on a basis whose generator is the Weil class `H-bar`.
///
/// `chi(2Q)` is bounded by `2 + 2Q^2`, and stability needs
/// `Q.H-bar > 2Q^2`. Failed checks are recorded, not thrown.
pub fn orbifold_serre(
    basis: &LatticeBasis,
    q: &DivisorClass,
    ell: Option<i64>,
) -> Result<StableBundleCertificate> {
    let amp = is_ample(basis, q)?;
    let ell1 = chi_upper_bound(basis, &q.scale(&int(2)))?;
    let ell = pick_ell(&ell1, ell)?;
    let twice = &amp.q_self * int(2);
    let checks = vec![
        NamedCheck::new(
            "ample",
            amp.ample,
            amp.failures.iter().map(|v| v.class.clone()).collect::<Vec<_>>().join(","),
        ),
        NamedCheck::new(
            "cayley_bacharach",
            int(ell) > ell1,
            format!("{ell} > {}", rational::to_string(&ell1)),
        ),
        NamedCheck::new(
            "effective_bound_h",
            amp.pairings.q_h > twice,
            format!(
                "{} > {}",
                rational::to_string(&amp.pairings.q_h),
                rational::to_string(&twice)
            ),
        ),
    ];
    Ok(StableBundleCertificate {
        rank: 2,
        c1: Rational::zero(),
        c2: int(ell) - &amp.q_self,
        ell,
        ell1,
        q: q.clone(),
        q_self: amp.q_self,
        profile_results: amp.profile_results,
        orbifold: true,
        checks,
    })
}

/// The A_1 blow-up of `X_30` with `H-bar^2 = 1/88` and one `G` block.
pub fn x30_orbifold_basis() -> LatticeBasis {
    LatticeBasis::new(frac(1, 88), vec![ExceptionalBlock::Single]).expect("valid basis")
}

/// `Q = a H-bar - b G` on the orbifold A_1 blow-up of `X_30`; `Q^2 = 2/11` is
/// additionally required.
pub fn orbifold_serre_x30(a: i64, b: i64) -> Result<StableBundleCertificate> {
    let basis = x30_orbifold_basis();
    let q = DivisorClass::from_tuple(&[a, b]);
    let mut cert = orbifold_serre(&basis, &q, None)?;
    let target = frac(2, 11);
    cert.checks.insert(
        0,
        NamedCheck::new(
            "q_self_is_2/11",
            cert.q_self == target,
            rational::to_string(&cert.q_self),
        ),
    );
    if !cert.valid() {
        let failed: Vec<_> = cert.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        return Err(Error::CertificateRejected(format!(
            "({a}, {b}) fails {}",
            failed.join(", ")
        )));
    }
    Ok(cert)
}

/// Pairs `(a, b)` with `b <= b_max`, `a <= a_max` such that
/// `Q = a H-bar - b G` satisfies `Q.H-bar > 2Q^2 > 0`, ordered by `b` then `a`.
pub fn scan_orbifold(h_bar_sq: &Rational, a_max: i64, b_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for b in 1..=b_max {
        for a in 1..=a_max {
            let two_q2 = (int(a * a) * h_bar_sq - int(2 * b * b)) * int(2);
            if two_q2.is_positive() && int(a) * h_bar_sq > two_q2 {
                out.push((a, b));
            }
        }
    }
    out
}

/// The scan on `X_30`, where the chain reads `a/88 > a^2/44 - 4b^2 > 0`.
pub fn scan_orbifold_x30(a_max: i64, b_max: i64) -> Vec<(i64, i64)> {
    scan_orbifold(&frac(1, 88), a_max, b_max)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    #[serde(with = "rational::serde_str")]
    pub euler_orb: Rational,
    #[serde(with = "rational::serde_str")]
    pub c2_orb: Rational,
    #[serde(with = "rational::serde_str")]
    pub budget: Rational,
    pub alpha_prime_sign: i8,
    /// Set when the budget is not positive; such certificates exist but
    /// only allow solutions with `alpha' < 0`.
    pub negative_flag: bool,
}

pub fn anomaly_budget(state: &SurfaceState, cert: &StableBundleCertificate) -> BudgetReport {
    let euler_orb = orbchar::euler_orb(state);
    let c2_orb = &cert.c2 - &cert.c1 * &cert.c1 * frac(1, 2);
    let budget = &euler_orb - &c2_orb;
    let sign = rational::sign(&budget);
    BudgetReport {
        euler_orb,
        c2_orb,
        alpha_prime_sign: sign,
        negative_flag: sign <= 0,
        budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SingularPoint;
    use ExceptionalBlock::*;

    #[test]
    fn cartier_certificate() {
        let b = LatticeBasis::new(int(18), vec![Pair(3)]).unwrap();
        let q = DivisorClass::from_tuple(&[14, 11, 28]);
        let c = serre_feasibility(&b, &q, None).unwrap();
        assert_eq!((c.ell, c.ell1.clone(), c.c2.clone()), (7, int(6), int(5)));
        assert!(c.valid() && !c.orbifold);
        assert_eq!(c.c1, int(0));
        let c = serre_feasibility(&b, &q, Some(9)).unwrap();
        assert_eq!(c.c2, int(7));
        assert!(serre_feasibility(&b, &q, Some(6)).is_err());
    }

    #[test]
    fn cartier_rejections() {
        let b = LatticeBasis::new(int(18), vec![]).unwrap();
        let err = serre_feasibility(&b, &b.hyperplane(), None).unwrap_err();
        assert!(matches!(err, Error::CertificateRejected(_)));
        let b = LatticeBasis::new(int(18), vec![Pair(3)]).unwrap();
        let not_ample = DivisorClass::from_tuple(&[14, -11, 28]);
        assert!(serre_feasibility(&b, &not_ample, None).is_err());
    }

    #[test]
    fn orbifold_certificate() {
        let c = orbifold_serre_x30(40, 3).unwrap();
        assert_eq!(c.q_self, frac(2, 11));
        assert_eq!(c.ell1, int(2) + frac(4, 11));
        assert_eq!(c.ell, 3);
        assert_eq!(c.c2, frac(31, 11));
        assert!(c.orbifold && c.valid());
        assert!(orbifold_serre_x30(14, 1).is_err());
    }

    #[test]
    fn orbifold_scan() {
        assert_eq!(scan_orbifold_x30(40, 3), vec![(40, 3)]);
        assert!(scan_orbifold_x30(39, 3).is_empty());
    }

    #[test]
    fn budgets() {
        let sp = |n| SingularPoint {
            origin: format!("A{n}"),
            n,
        };
        let mut s = SurfaceState {
            base_id: "X30".into(),
            generator_degree: 88,
            lattice: x30_orbifold_basis(),
            singularities: vec![sp(7), sp(10)],
            b2: 5,
            euler: 7,
            history: vec![],
        };
        let cert = orbifold_serre_x30(40, 3).unwrap();
        let r = anomaly_budget(&s, &cert);
        assert_eq!(r.budget, frac(211, 88));
        assert_eq!(r.alpha_prime_sign, 1);
        assert!(!r.negative_flag);

        s.singularities.clear();
        s.euler = 0;
        let r = anomaly_budget(&s, &cert);
        assert_eq!(r.alpha_prime_sign, -1);
        assert!(r.negative_flag);
    }
}
