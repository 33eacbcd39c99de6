//! Divisor data for towers of Seifert circle bundles `Y2 -> Y1 -> X` over a
//! blown-up K3 orbisurface whose last blow-up produced a pair block.
//!
//! `E-bar` is an opaque ample class on the previous stage. It enters only
//! through `E-bar^2` and `E-bar.H-bar`, and pairs to zero with the newest
//! exceptional curves.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bundles::NamedCheck;
use crate::lattice::{DivisorClass, ExceptionalBlock, LatticeBasis, SurfaceState};
use crate::rational::{self, frac, int, Rational};
use crate::{Error, Result};

pub fn derive_ab(n: i64, c: i64, m: i64) -> (i64, i64) {
    (m * n + c - 1, c + m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeifertParameters {
    pub n: i64,
    pub c: i64,
    pub m: i64,
    pub k: i64,
    pub a: i64,
    pub b: i64,
}

impl SeifertParameters {
    pub fn new(n: i64, c: i64, m: i64, k: i64) -> Result<Self> {
        if n < 2 || c < 1 || m < 1 || k < 1 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 2 and c, m, k >= 1, got n={n} c={c} m={m} k={k}"
            )));
        }
        let (a, b) = derive_ab(n, c, m);
        Ok(SeifertParameters { n, c, m, k, a, b })
    }

    /// `bn - a = c(n-1) + 1`.
    pub fn bn_minus_a(&self) -> i64 {
        self.b * self.n - self.a
    }

    /// `an - b = c(n-1) + (n^2-1)m - n`.
    pub fn an_minus_b(&self) -> i64 {
        self.a * self.n - self.b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErefPairings {
    #[serde(with = "rational::serde_str")]
    pub ebar_sq: Rational,
    #[serde(with = "rational::serde_str")]
    pub ebar_h: Rational,
}

impl ErefPairings {
    pub fn new(ebar_sq: Rational, ebar_h: Rational) -> Result<Self> {
        if !ebar_sq.is_positive() || !ebar_h.is_positive() {
            return Err(Error::InvalidParameter(
                "reference pairings must be positive".into(),
            ));
        }
        Ok(ErefPairings { ebar_sq, ebar_h })
    }
}

/// A lattice class plus a multiple of `E-bar`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramedClass {
    pub base: DivisorClass,
    #[serde(with = "rational::serde_str")]
    pub ebar: Rational,
}

/// Everything needed to pair framed classes on one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeifertContext {
    pub basis: LatticeBasis,
    /// `H = generator_degree * H-bar`.
    pub generator_degree: u64,
    pub eref: ErefPairings,
}

impl SeifertContext {
    pub fn new(basis: LatticeBasis, generator_degree: u64, eref: ErefPairings) -> Result<Self> {
        if generator_degree == 0 {
            return Err(Error::InvalidParameter("generator degree must be positive".into()));
        }
        match basis.blocks.last() {
            Some(ExceptionalBlock::Pair(_)) => Ok(SeifertContext {
                basis,
                generator_degree,
                eref,
            }),
            _ => Err(Error::NoPairBlock),
        }
    }

    /// `E-bar = H-bar` on the given stage.
    pub fn from_state(state: &SurfaceState) -> Result<Self> {
        let deg = state.generator_degree as i64;
        let orb = &state.lattice.h_self / int(deg * deg);
        let eref = ErefPairings::new(orb.clone(), orb)?;
        SeifertContext::new(state.lattice.clone(), state.generator_degree, eref)
    }

    /// Smallest lattice with one pair block and `H-bar = H`, `H^2 = c`.
    pub fn minimal(n: u32, c: i64) -> Result<Self> {
        let basis = LatticeBasis::new(int(c), vec![ExceptionalBlock::Pair(n)])?;
        SeifertContext::new(basis, 1, ErefPairings::new(int(c), int(c))?)
    }

    pub fn last_n(&self) -> u32 {
        match self.basis.blocks.last() {
            Some(ExceptionalBlock::Pair(n)) => *n,
            _ => unreachable!(),
        }
    }

    fn last_offset(&self) -> usize {
        self.basis.offset(self.basis.blocks.len() - 1)
    }

    pub fn h_bar(&self) -> FramedClass {
        let mut d = self.basis.zero();
        d.0[0] = frac(1, self.generator_degree as i64);
        self.lift(d)
    }

    fn lift(&self, base: DivisorClass) -> FramedClass {
        FramedClass {
            base,
            ebar: Rational::zero(),
        }
    }

    /// `C` and `C'` of the newest block.
    pub fn curves(&self) -> (FramedClass, FramedClass) {
        let mut classes = self.basis.block_classes(self.basis.blocks.len() - 1).into_iter();
        let c = classes.next().unwrap().1;
        let cp = classes.next().unwrap().1;
        (self.lift(c), self.lift(cp))
    }

    fn ebar_with(&self, w: &DivisorClass) -> Result<Rational> {
        if w.0[1..self.last_offset()].iter().any(|x| !x.is_zero()) {
            return Err(Error::InvalidParameter(
                "pairing of the reference class with earlier exceptional classes is unknown".into(),
            ));
        }
        Ok(&w.0[0] * int(self.generator_degree as i64) * &self.eref.ebar_h)
    }

    pub fn pair(&self, x: &FramedClass, y: &FramedClass) -> Result<Rational> {
        let mut v = self.basis.intersect(&x.base, &y.base)?;
        if !x.ebar.is_zero() {
            v += &x.ebar * self.ebar_with(&y.base)?;
        }
        if !y.ebar.is_zero() {
            v += &y.ebar * self.ebar_with(&x.base)?;
        }
        v += &x.ebar * &y.ebar * &self.eref.ebar_sq;
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeifertDivisors {
    pub e: FramedClass,
    pub d: FramedClass,
    pub dprime: FramedClass,
}

fn combine(terms: &[(Rational, &FramedClass)]) -> FramedClass {
    let len = terms[0].1.base.len();
    let mut base = DivisorClass(vec![Rational::zero(); len]);
    let mut ebar = Rational::zero();
    for (s, f) in terms {
        base = base.add(&f.base.scale(s));
        ebar += s * &f.ebar;
    }
    FramedClass { base, ebar }
}

/// `E = q E-bar - aC - bC'`, `D = H-bar - k(bn-a)C`, `D' = H-bar - k(an-b)C'`
/// with `q = k(an-b)(bn-a) / ((n-1) E-bar.H-bar)`.
pub fn build_divisors(ctx: &SeifertContext, p: &SeifertParameters) -> Result<SeifertDivisors> {
    if p.n != ctx.last_n() as i64 {
        return Err(Error::InvalidParameter(format!(
            "parameters are for A_{} but the last block is A_{}",
            p.n,
            ctx.last_n()
        )));
    }
    let (c, cp) = ctx.curves();
    let hb = ctx.h_bar();
    let ebar = FramedClass {
        base: ctx.basis.zero(),
        ebar: int(1),
    };
    let (x, y) = (p.an_minus_b(), p.bn_minus_a());
    let q = int(p.k * x * y) / (int(p.n - 1) * &ctx.eref.ebar_h);
    Ok(SeifertDivisors {
        e: combine(&[(q, &ebar), (int(-p.a), &c), (int(-p.b), &cp)]),
        d: combine(&[(int(1), &hb), (int(-p.k * y), &c)]),
        dprime: combine(&[(int(1), &hb), (int(-p.k * x), &cp)]),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeifertCertificate {
    pub params: SeifertParameters,
    pub eref: ErefPairings,
    pub divisors: SeifertDivisors,
    #[serde(with = "rational::serde_str")]
    pub e_self: Rational,
    #[serde(with = "rational::serde_str")]
    pub e_c: Rational,
    #[serde(with = "rational::serde_str")]
    pub e_cprime: Rational,
    pub checks: Vec<NamedCheck>,
    /// `c1(Y1 -> X) = D`, `c1(Y2 -> Y1)` = pullback of `D'`.
    pub tower: String,
    /// Trivial canonical class and trivial orbifold fundamental group of the
    /// base are assumed, never computed.
    pub assumes_base_simply_connected: bool,
}

impl SeifertCertificate {
    pub fn valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }
}

/// Closed form of `E^2`.
pub fn e_self_formula(p: &SeifertParameters, eref: &ErefPairings) -> Rational {
    let (x, y, n1) = (p.an_minus_b(), p.bn_minus_a(), p.n - 1);
    let q = int(p.k * x * y) / (int(n1) * &eref.ebar_h);
    &q * &q * &eref.ebar_sq - frac(p.a * x + p.b * y, n1)
}

pub fn verify_seifert(ctx: &SeifertContext, p: &SeifertParameters) -> Result<SeifertCertificate> {
    let div = build_divisors(ctx, p)?;
    let (c, cp) = ctx.curves();
    let e_d = ctx.pair(&div.e, &div.d)?;
    let e_dp = ctx.pair(&div.e, &div.dprime)?;
    let e_c = ctx.pair(&div.e, &c)?;
    let e_cp = ctx.pair(&div.e, &cp)?;
    let e_self = ctx.pair(&div.e, &div.e)?;
    let (x, y, n1) = (p.an_minus_b(), p.bn_minus_a(), p.n - 1);
    let r = rational::to_string;
    let gcd_check = |name: &str, u: i64, v: i64| {
        let g = u.gcd(&v);
        NamedCheck {
            name: name.into(),
            passed: g == 1,
            witness: format!("gcd({u}, {v}) = {g}"),
        }
    };
    let positive = |name: &str, v: &Rational| NamedCheck {
        name: name.into(),
        passed: v.is_positive(),
        witness: r(v),
    };
    let zero = |name: &str, v: &Rational| NamedCheck {
        name: name.into(),
        passed: v.is_zero(),
        witness: r(v),
    };
    let checks = vec![
        zero("primitivity_D", &e_d),
        zero("primitivity_Dprime", &e_dp),
        positive("E_ample_on_C", &e_c),
        positive("E_ample_on_Cprime", &e_cp),
        positive("E_self_positive", &e_self),
        gcd_check("smooth_D", p.k * y, n1),
        gcd_check("smooth_Dprime", p.k * x, n1),
        gcd_check("pi1_D", p.c, y),
        gcd_check("pi1_Dprime", p.c, (p.n * p.n - 1) * p.m - p.n),
    ];
    Ok(SeifertCertificate {
        params: p.clone(),
        eref: ctx.eref.clone(),
        divisors: div,
        e_self,
        e_c,
        e_cprime: e_cp,
        checks,
        tower: "Y2 -> Y1 -> X with c1(Y1) = D and c1(Y2 -> Y1) = pullback of D'".into(),
        assumes_base_simply_connected: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub m_max: i64,
    pub k_max: i64,
}

impl Default for ParameterBounds {
    fn default() -> Self {
        ParameterBounds { m_max: 64, k_max: 64 }
    }
}

/// Smallest `m` with `gcd(c, (n^2-1)m - n) = 1`, then smallest `k` coprime
/// to `n-1` with `E^2 > 0`, returned with its all-pass certificate.
pub fn find_parameters(ctx: &SeifertContext, c: i64, bounds: ParameterBounds) -> Result<SeifertCertificate> {
    let n = ctx.last_n() as i64;
    for m in 1..=bounds.m_max {
        if c.gcd(&((n * n - 1) * m - n)) != 1 {
            continue;
        }
        for k in (1..=bounds.k_max).filter(|k| k.gcd(&(n - 1)) == 1) {
            let p = SeifertParameters::new(n, c, m, k)?;
            if !e_self_formula(&p, &ctx.eref).is_positive() {
                continue;
            }
            let cert = verify_seifert(ctx, &p)?;
            if cert.valid() {
                return Ok(cert);
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no Seifert parameters for n={n}, c={c} with m <= {}, k <= {}",
        bounds.m_max, bounds.k_max
    )))
}
