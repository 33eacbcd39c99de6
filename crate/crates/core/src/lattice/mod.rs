//! The Picard lattice of a blown-up K3 orbisurface.
//!
//! Coordinates are always ordered `H; (L_i, L'_i) per pair block; G_j per
//! single block`, blocks in blow-up order. Divisors travel in the signed-tuple
//! convention `Q = a0 H - a1 X1 - a2 X2 - ...`, printed with positive entries.

mod search;
mod state;

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, Rational};
use crate::{Error, Result};

pub use search::{search_q, SearchBounds};
pub use state::{blow_up, BlowUpRecord, PointSelector, SingularPoint, SurfaceState};

pub const DEFAULT_EFFECTIVE_BOUND: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalBlock {
    /// Blow-up of an `A_n` point with `n >= 2`: generators `L = (n-1)C`, `L' = C + C'`.
    Pair(u32),
    /// Blow-up of an `A_1` point: one `(-2)`-curve `G`.
    Single,
}

impl ExceptionalBlock {
    pub fn rank(&self) -> usize {
        match self {
            ExceptionalBlock::Pair(_) => 2,
            ExceptionalBlock::Single => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    #[serde(with = "rational::serde_str")]
    pub h_self: Rational,
    pub blocks: Vec<ExceptionalBlock>,
}

impl LatticeBasis {
    pub fn new(h_self: Rational, blocks: Vec<ExceptionalBlock>) -> Result<Self> {
        if !h_self.is_positive() {
            return Err(Error::InvalidParameter("H^2 must be positive".into()));
        }
        if let Some(ExceptionalBlock::Pair(n)) =
            blocks.iter().find(|b| matches!(b, ExceptionalBlock::Pair(n) if *n < 2))
        {
            return Err(Error::InvalidParameter(format!("pair block needs n >= 2, got {n}")));
        }
        Ok(LatticeBasis { h_self, blocks })
    }

    pub fn rank(&self) -> usize {
        1 + self.blocks.iter().map(ExceptionalBlock::rank).sum::<usize>()
    }

    /// Index of the first coordinate of block `i`.
    pub fn offset(&self, i: usize) -> usize {
        1 + self.blocks[..i].iter().map(ExceptionalBlock::rank).sum::<usize>()
    }

    pub fn gram(&self) -> Vec<Vec<Rational>> {
        let r = self.rank();
        let mut g = vec![vec![Rational::zero(); r]; r];
        g[0][0] = self.h_self.clone();
        for (i, b) in self.blocks.iter().enumerate() {
            let o = self.offset(i);
            match *b {
                ExceptionalBlock::Pair(n) => {
                    let n = n as i64;
                    g[o][o] = int(-n * (n - 1));
                    g[o][o + 1] = int(-(n - 1));
                    g[o + 1][o] = int(-(n - 1));
                    g[o + 1][o + 1] = int(-2);
                }
                ExceptionalBlock::Single => g[o][o] = int(-2),
            }
        }
        g
    }

    fn check(&self, d: &DivisorClass) -> Result<()> {
        if d.0.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                actual: d.0.len(),
            });
        }
        Ok(())
    }

    pub fn intersect(&self, d1: &DivisorClass, d2: &DivisorClass) -> Result<Rational> {
        self.check(d1)?;
        self.check(d2)?;
        let mut acc = &d1.0[0] * &d2.0[0] * &self.h_self;
        for (i, b) in self.blocks.iter().enumerate() {
            let o = self.offset(i);
            match *b {
                ExceptionalBlock::Pair(n) => {
                    let n = n as i64;
                    let (x1, y1) = (&d1.0[o], &d1.0[o + 1]);
                    let (x2, y2) = (&d2.0[o], &d2.0[o + 1]);
                    acc += x1 * x2 * int(-n * (n - 1));
                    acc += (x1 * y2 + y1 * x2) * int(-(n - 1));
                    acc += y1 * y2 * int(-2);
                }
                ExceptionalBlock::Single => acc += &d1.0[o] * &d2.0[o] * int(-2),
            }
        }
        Ok(acc)
    }

    pub fn self_intersection(&self, d: &DivisorClass) -> Result<Rational> {
        self.intersect(d, d)
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass(vec![Rational::zero(); self.rank()])
    }

    pub fn hyperplane(&self) -> DivisorClass {
        self.unit(0, int(1))
    }

    fn unit(&self, at: usize, v: Rational) -> DivisorClass {
        let mut d = self.zero();
        d.0[at] = v;
        d
    }

    /// Named curve or Cartier classes supported on block `i`.
    pub fn block_classes(&self, i: usize) -> Vec<(String, DivisorClass)> {
        let o = self.offset(i);
        let tag = i + 1;
        match self.blocks[i] {
            ExceptionalBlock::Pair(n) => {
                let m = (n - 1) as i64;
                let mut c = self.zero();
                c.0[o] = rational::frac(1, m);
                let mut cp = self.zero();
                cp.0[o] = rational::frac(-1, m);
                cp.0[o + 1] = int(1);
                let mut ncp = self.zero();
                ncp.0[o] = int(-1);
                ncp.0[o + 1] = int(m);
                vec![
                    (format!("C[{tag}]"), c),
                    (format!("C'[{tag}]"), cp),
                    (format!("L[{tag}]"), self.unit(o, int(1))),
                    (format!("L'[{tag}]"), self.unit(o + 1, int(1))),
                    (format!("(n-1)C'[{tag}]"), ncp),
                ]
            }
            ExceptionalBlock::Single => vec![(format!("G[{tag}]"), self.unit(o, int(1)))],
        }
    }
}

/// Rational coefficient vector over the ordered basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorClass(#[serde(with = "rational::serde_str_vec")] pub Vec<Rational>);

impl DivisorClass {
    /// `(a0, a1, ...)` means `a0 H - a1 X1 - a2 X2 - ...`.
    pub fn from_tuple(t: &[i64]) -> Self {
        DivisorClass(
            t.iter()
                .enumerate()
                .map(|(i, &a)| if i == 0 { int(a) } else { int(-a) })
                .collect(),
        )
    }

    /// Coefficients back in the positive-entry convention.
    pub fn tuple(&self) -> Vec<Rational> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, a)| if i == 0 { a.clone() } else { -a })
            .collect()
    }

    pub fn scale(&self, s: &Rational) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuple().iter().map(rational::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl FromStr for DivisorClass {
    type Err = Error;

    /// Parses `"(14, 11, 28)"` or `"14,11,28"`; entries may be rationals.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut t = inner
            .split(',')
            .map(|p| {
                rational::parse(p).ok_or_else(|| Error::InvalidParameter(format!("bad tuple {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        for a in t.iter_mut().skip(1) {
            *a = -a.clone();
        }
        Ok(DivisorClass(t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockPairings {
    Pair {
        n: u32,
        #[serde(with = "rational::serde_str")]
        alpha: Rational,
        #[serde(with = "rational::serde_str")]
        beta: Rational,
        #[serde(with = "rational::serde_str")]
        q_c: Rational,
        #[serde(with = "rational::serde_str")]
        q_cprime: Rational,
        #[serde(with = "rational::serde_str")]
        q_l: Rational,
        #[serde(with = "rational::serde_str")]
        q_lprime: Rational,
        #[serde(with = "rational::serde_str")]
        q_n1_cprime: Rational,
    },
    Single {
        #[serde(with = "rational::serde_str")]
        gamma: Rational,
        #[serde(with = "rational::serde_str")]
        q_g: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePairings {
    #[serde(with = "rational::serde_str")]
    pub a0: Rational,
    #[serde(with = "rational::serde_str")]
    pub q_h: Rational,
    pub blocks: Vec<BlockPairings>,
}

/// Pairings of `q` with `H` and the exceptional curves and Cartier
/// generators of each block, evaluated through the Gram form.
pub fn curve_pairings(basis: &LatticeBasis, q: &DivisorClass) -> Result<CurvePairings> {
    basis.check(q)?;
    let q_h = basis.intersect(q, &basis.hyperplane())?;
    let mut blocks = Vec::with_capacity(basis.blocks.len());
    for (i, b) in basis.blocks.iter().enumerate() {
        let o = basis.offset(i);
        let vals = basis
            .block_classes(i)
            .into_iter()
            .map(|(_, c)| basis.intersect(q, &c))
            .collect::<Result<Vec<_>>>()?;
        blocks.push(match *b {
            ExceptionalBlock::Pair(n) => BlockPairings::Pair {
                n,
                alpha: -q.0[o].clone(),
                beta: -q.0[o + 1].clone(),
                q_c: vals[0].clone(),
                q_cprime: vals[1].clone(),
                q_l: vals[2].clone(),
                q_lprime: vals[3].clone(),
                q_n1_cprime: vals[4].clone(),
            },
            ExceptionalBlock::Single => BlockPairings::Single {
                gamma: -q.0[o].clone(),
                q_g: vals[0].clone(),
            },
        });
    }
    Ok(CurvePairings {
        a0: q.0[0].clone(),
        q_h,
        blocks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Profile {
    /// Every exceptional curve pairs above the bound.
    #[serde(rename = "strict")]
    Strict,
    /// Only the effective Cartier generators `L, L', (n-1)C', G` must clear it.
    #[serde(rename = "cartier")]
    Cartier,
    #[serde(rename = "ample-only")]
    AmpleOnly,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Strict, Profile::Cartier, Profile::AmpleOnly];

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Strict => "strict",
            Profile::Cartier => "cartier",
            Profile::AmpleOnly => "ample-only",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownProfile(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub class: String,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileOutcome {
    pub profile: Profile,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

/// Lower bound on `D.Q` over effective divisors, checked per profile.
///
/// A non-exceptional effective divisor pairs with `Q` at least `a0`, so `a0`
/// itself is compared against the bound in the strict and Cartier profiles.
pub fn effective_bound(
    basis: &LatticeBasis,
    q: &DivisorClass,
    bound: &Rational,
    profile: Profile,
) -> Result<ProfileOutcome> {
    let p = curve_pairings(basis, q)?;
    let mut violations = Vec::new();
    let mut need = |class: String, value: &Rational| {
        if value <= bound {
            violations.push(Violation {
                class,
                value: value.clone(),
            });
        }
    };
    if profile != Profile::AmpleOnly {
        need("a0".into(), &p.a0);
        for (i, b) in p.blocks.iter().enumerate() {
            let tag = i + 1;
            match (profile, b) {
                (Profile::Strict, BlockPairings::Pair { q_c, q_cprime, .. }) => {
                    need(format!("C[{tag}]"), q_c);
                    need(format!("C'[{tag}]"), q_cprime);
                }
                (
                    Profile::Cartier,
                    BlockPairings::Pair {
                        q_l,
                        q_lprime,
                        q_n1_cprime,
                        ..
                    },
                ) => {
                    need(format!("L[{tag}]"), q_l);
                    need(format!("L'[{tag}]"), q_lprime);
                    need(format!("(n-1)C'[{tag}]"), q_n1_cprime);
                }
                (_, BlockPairings::Single { q_g, .. }) => need(format!("G[{tag}]"), q_g),
                (Profile::AmpleOnly, _) => unreachable!(),
            }
        }
    }
    Ok(ProfileOutcome {
        profile,
        bound: bound.clone(),
        passed: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleCertificate {
    pub q: DivisorClass,
    #[serde(with = "rational::serde_str")]
    pub q_self: Rational,
    pub pairings: CurvePairings,
    pub ample: bool,
    pub failures: Vec<Violation>,
    pub profile_results: Vec<ProfileOutcome>,
}

/// Nakai–Moishezon on the finite set of curve classes the lattice knows:
/// `Q^2 > 0`, `Q.H > 0`, and `Q` positive on every exceptional curve.
pub fn is_ample(basis: &LatticeBasis, q: &DivisorClass) -> Result<AmpleCertificate> {
    let pairings = curve_pairings(basis, q)?;
    let q_self = basis.self_intersection(q)?;
    let mut failures = Vec::new();
    let mut positive = |class: String, v: &Rational| {
        if !v.is_positive() {
            failures.push(Violation {
                class,
                value: v.clone(),
            });
        }
    };
    positive("Q^2".into(), &q_self);
    positive("H".into(), &pairings.q_h);
    for (i, b) in pairings.blocks.iter().enumerate() {
        let tag = i + 1;
        match b {
            BlockPairings::Pair { q_c, q_cprime, .. } => {
                positive(format!("C[{tag}]"), q_c);
                positive(format!("C'[{tag}]"), q_cprime);
            }
            BlockPairings::Single { q_g, .. } => positive(format!("G[{tag}]"), q_g),
        }
    }
    let bound = int(DEFAULT_EFFECTIVE_BOUND);
    let profile_results = Profile::ALL
        .into_iter()
        .map(|p| effective_bound(basis, q, &bound, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(AmpleCertificate {
        q: q.clone(),
        q_self,
        pairings,
        ample: failures.is_empty(),
        failures,
        profile_results,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QVerification {
    pub q: String,
    #[serde(with = "rational::serde_str")]
    pub q_self: Rational,
    #[serde(with = "rational::serde_str")]
    pub target: Rational,
    pub matches_target: bool,
    pub ample: bool,
    pub profile: ProfileOutcome,
    pub passed: bool,
}

pub fn verify_q(
    basis: &LatticeBasis,
    q: &DivisorClass,
    target: &Rational,
    profile: Profile,
) -> Result<QVerification> {
    let cert = is_ample(basis, q)?;
    let outcome = effective_bound(basis, q, &int(DEFAULT_EFFECTIVE_BOUND), profile)?;
    let matches_target = &cert.q_self == target;
    Ok(QVerification {
        q: q.to_string(),
        q_self: cert.q_self,
        target: target.clone(),
        matches_target,
        ample: cert.ample,
        passed: matches_target && cert.ample && outcome.passed,
        profile: outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use ExceptionalBlock::*;

    fn basis(h: i64, blocks: Vec<ExceptionalBlock>) -> LatticeBasis {
        LatticeBasis::new(int(h), blocks).unwrap()
    }

    #[test]
    fn gram_entries() {
        let b = basis(18, vec![Pair(3), Single]);
        let g = b.gram();
        assert_eq!(b.rank(), 4);
        assert_eq!(g[1][1], int(-6));
        assert_eq!(g[1][2], int(-2));
        assert_eq!(g[2][2], int(-2));
        assert_eq!(g[3][3], int(-2));
        assert_eq!(g[0][3], int(0));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i][j], g[j][i]);
            }
        }
    }

    #[test]
    fn lprime_self_intersection_from_curve_relations() {
        // L'.C = L'.C' = -1 and L' = C + C' force L'^2 = -2.
        for n in 2..10 {
            let b = basis(1, vec![Pair(n)]);
            let cls = b.block_classes(0);
            let lp = &cls[3].1;
            assert_eq!(b.intersect(lp, &cls[0].1).unwrap(), int(-1));
            assert_eq!(b.intersect(lp, &cls[1].1).unwrap(), int(-1));
            assert_eq!(b.self_intersection(lp).unwrap(), int(-2));
            // L.C = -n, L.C' = 1
            assert_eq!(b.intersect(&cls[2].1, &cls[0].1).unwrap(), int(-(n as i64)));
            assert_eq!(b.intersect(&cls[2].1, &cls[1].1).unwrap(), int(1));
        }
    }

    #[test]
    fn table_rows_self_intersection() {
        let b = basis(18, vec![Pair(3)]);
        assert_eq!(b.self_intersection(&DivisorClass::from_tuple(&[14, 11, 28])).unwrap(), int(2));
        let b = basis(18, vec![Pair(3), Pair(2)]);
        let q = DivisorClass::from_tuple(&[6, 2, 10, 6, 9]);
        assert_eq!(b.self_intersection(&q).unwrap(), int(2));
        assert_eq!(b.self_intersection(&b.zero()).unwrap(), int(0));
    }

    #[test]
    fn rank_mismatch() {
        let b = basis(18, vec![Pair(3)]);
        let err = b.intersect(&DivisorClass::from_tuple(&[1, 2]), &b.zero()).unwrap_err();
        assert_eq!(err, Error::RankMismatch { expected: 3, actual: 2 });
    }

    #[test]
    fn pairings_match_closed_forms() {
        let b = basis(18, vec![Pair(3)]);
        let p = curve_pairings(&b, &DivisorClass::from_tuple(&[14, 11, 28])).unwrap();
        assert_eq!(p.q_h, int(252));
        match &p.blocks[0] {
            BlockPairings::Pair { q_c, q_cprime, q_l, q_lprime, q_n1_cprime, .. } => {
                assert_eq!((q_c, q_cprime), (&int(61), &int(17)));
                assert_eq!(q_l, &int(2 * 61));
                assert_eq!(q_lprime, &int(11 * 2 + 2 * 28));
                assert_eq!(q_n1_cprime, &int(2 * 17));
            }
            _ => panic!(),
        }
        let b = basis(10, vec![Single, Pair(4)]);
        let p = curve_pairings(&b, &DivisorClass::from_tuple(&[5, 3, 2, 7])).unwrap();
        assert!(matches!(&p.blocks[0], BlockPairings::Single { q_g, .. } if *q_g == int(6)));
    }

    #[test]
    fn equal_alpha_beta_is_boundary() {
        let b = basis(18, vec![Pair(3)]);
        let q = DivisorClass::from_tuple(&[14, 5, 5]);
        let p = curve_pairings(&b, &q).unwrap();
        assert!(matches!(&p.blocks[0], BlockPairings::Pair { q_cprime, .. } if q_cprime.is_zero()));
        assert!(!is_ample(&b, &q).unwrap().ample);
    }

    #[test]
    fn ampleness() {
        let b = basis(18, vec![Pair(3)]);
        assert!(is_ample(&b, &DivisorClass::from_tuple(&[14, 11, 28])).unwrap().ample);
        assert!(!is_ample(&b, &b.hyperplane()).unwrap().ample);
        assert!(is_ample(&basis(18, vec![]), &DivisorClass::from_tuple(&[1])).unwrap().ample);
        let c = is_ample(&b, &DivisorClass::from_tuple(&[14, 11, 9])).unwrap();
        assert!(!c.ample);
        assert!(c.failures.iter().any(|v| v.class == "C'[1]"));
    }

    #[test]
    fn profiles() {
        let two = int(2);
        let b = basis(18, vec![Pair(3)]);
        let q = DivisorClass::from_tuple(&[14, 11, 28]);
        assert!(effective_bound(&b, &q, &two, Profile::Strict).unwrap().passed);

        let b6 = basis(18, vec![Pair(3), Pair(2), Pair(6)]);
        let q6 = DivisorClass::from_tuple(&[5, 1, 5, 2, 11, 1, 3]);
        let s = effective_bound(&b6, &q6, &two, Profile::Strict).unwrap();
        assert!(!s.passed);
        assert_eq!(s.violations, vec![Violation { class: "C'[3]".into(), value: int(2) }]);
        assert!(effective_bound(&b6, &q6, &two, Profile::Cartier).unwrap().passed);

        let free = basis(18, vec![]);
        for p in Profile::ALL {
            assert!(effective_bound(&free, &DivisorClass::from_tuple(&[3]), &two, p).unwrap().passed);
        }
        assert_eq!("bogus".parse::<Profile>(), Err(Error::UnknownProfile("bogus".into())));
        assert_eq!("ample-only".parse::<Profile>(), Ok(Profile::AmpleOnly));
    }

    #[test]
    fn tuple_text_round_trip() {
        let q: DivisorClass = "(14, 11, 28)".parse().unwrap();
        assert_eq!(q, DivisorClass::from_tuple(&[14, 11, 28]));
        assert_eq!(q.to_string(), "(14, 11, 28)");
        let r: DivisorClass = "40/88, 3".parse().unwrap();
        assert_eq!(r.0, vec![frac(40, 88), int(-3)]);
        assert!("1,x".parse::<DivisorClass>().is_err());
    }

    #[test]
    fn rejects_degenerate_pair() {
        assert!(LatticeBasis::new(int(1), vec![Pair(1)]).is_err());
        assert!(LatticeBasis::new(int(0), vec![]).is_err());
    }
}
