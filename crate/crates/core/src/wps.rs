//! Singular locus of a degree-`d` hypersurface in a weighted projective
//! 3-space `P(a0,a1,a2,a3)`.
//!
//! A generic hypersurface inherits only the cyclic quotient singularities of
//! the ambient space: the coordinate vertices it passes through, and finitely
//! many points on each singular edge. Quasismoothness is trusted, not proved.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Exponent = [u32; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightSystem([u64; 4]);

impl WeightSystem {
    pub fn new(weights: [u64; 4]) -> Result<Self> {
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::InvalidWeights(format!(
                "every weight must be positive, got {weights:?}"
            )));
        }
        Ok(WeightSystem(weights))
    }

    pub fn weights(&self) -> [u64; 4] {
        self.0
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn degree_of(&self, e: &Exponent) -> u64 {
        self.0.iter().zip(e).map(|(&a, &k)| a * k as u64).sum()
    }
}

/// Gcd of every 3-element subset of the weights is 1.
pub fn is_well_formed(w: &WeightSystem) -> bool {
    let a = w.0;
    (0..4).all(|skip| {
        let g = (0..4)
            .filter(|&i| i != skip)
            .fold(0u64, |g, i| g.gcd(&a[i]));
        g == 1
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Generic,
    Explicit(BTreeSet<Exponent>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypersurfaceSpec {
    pub weights: WeightSystem,
    pub degree: u64,
    pub support: Support,
}

impl HypersurfaceSpec {
    pub fn generic(weights: [u64; 4], degree: u64) -> Result<Self> {
        Self::new(WeightSystem::new(weights)?, degree, Support::Generic)
    }

    /// Rejects explicit monomials whose weighted degree is not `degree`.
    pub fn new(weights: WeightSystem, degree: u64, support: Support) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be positive".into()));
        }
        if let Support::Explicit(monomials) = &support {
            for m in monomials {
                let actual = weights.degree_of(m);
                if actual != degree {
                    return Err(Error::InhomogeneousMonomial {
                        monomial: *m,
                        actual,
                        expected: degree,
                    });
                }
            }
        }
        Ok(HypersurfaceSpec {
            weights,
            degree,
            support,
        })
    }

    pub fn supports(&self) -> BTreeSet<Exponent> {
        generic_support(self)
    }
}

/// Degree equals the weight sum, so adjunction gives a trivial canonical sheaf.
pub fn is_k3_candidate(spec: &HypersurfaceSpec) -> bool {
    spec.degree == spec.weights.sum()
}

/// All exponent vectors of weighted degree `d`; explicit supports pass through.
pub fn generic_support(spec: &HypersurfaceSpec) -> BTreeSet<Exponent> {
    if let Support::Explicit(m) = &spec.support {
        return m.clone();
    }
    let a = spec.weights.weights();
    let d = spec.degree;
    let mut out = BTreeSet::new();
    for e0 in 0..=d / a[0] {
        let r0 = d - e0 * a[0];
        for e1 in 0..=r0 / a[1] {
            let r1 = r0 - e1 * a[1];
            for e2 in 0..=r1 / a[2] {
                let r2 = r1 - e2 * a[2];
                if r2 % a[3] == 0 {
                    out.insert([e0 as u32, e1 as u32, e2 as u32, (r2 / a[3]) as u32]);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    Vertex(usize),
    EdgePoint(usize, usize),
    Inherited,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityRecord {
    pub n: u32,
    pub locus: Locus,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexStatus {
    pub index: usize,
    pub weight: u64,
    pub on_surface: bool,
    pub record: Option<SingularityRecord>,
    /// Set when a singular vertex has no monomial `x_i^k x_j` in the support.
    pub quasismooth_warning: bool,
}

fn pure_power(i: usize, k: u32) -> Exponent {
    let mut e = [0; 4];
    e[i] = k;
    e
}

pub fn classify_vertices(spec: &HypersurfaceSpec) -> Result<Vec<VertexStatus>> {
    if !is_well_formed(&spec.weights) {
        return Err(Error::NotWellFormed(spec.weights.weights()));
    }
    let a = spec.weights.weights();
    let d = spec.degree;
    let support = spec.supports();
    let out = (0..4)
        .map(|i| {
            let passes_through = match &spec.support {
                Support::Generic => d % a[i] != 0,
                Support::Explicit(_) => {
                    d % a[i] != 0 || !support.contains(&pure_power(i, (d / a[i]) as u32))
                }
            };
            let singular = passes_through && a[i] > 1;
            let quasismooth_warning = singular
                && !support.iter().any(|e| {
                    e[i] >= 1
                        && (0..4).any(|j| {
                            j != i && e[j] == 1 && (0..4).all(|l| l == i || l == j || e[l] == 0)
                        })
                });
            VertexStatus {
                index: i,
                weight: a[i],
                on_surface: passes_through,
                record: singular.then(|| SingularityRecord {
                    n: (a[i] - 1) as u32,
                    locus: Locus::Vertex(i),
                    multiplicity: 1,
                }),
                quasismooth_warning,
            }
        })
        .collect();
    Ok(out)
}

/// Points on singular edges: `floor(d*g/(a_i*a_j))` points of type `A_{g-1}`
/// on the edge `(i,j)` with `g = gcd(a_i, a_j) > 1`.
pub fn classify_edges(spec: &HypersurfaceSpec) -> Result<Vec<SingularityRecord>> {
    if !is_well_formed(&spec.weights) {
        return Err(Error::NotWellFormed(spec.weights.weights()));
    }
    let a = spec.weights.weights();
    let d = spec.degree;
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let g = a[i].gcd(&a[j]);
            if g <= 1 {
                continue;
            }
            let count = d * g / (a[i] * a[j]);
            if count > 0 {
                out.push(SingularityRecord {
                    n: (g - 1) as u32,
                    locus: Locus::EdgePoint(i, j),
                    multiplicity: count as u32,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub weights: [u64; 4],
    pub degree: u64,
    pub vertices: Vec<VertexStatus>,
    pub records: Vec<SingularityRecord>,
    pub sum_n: u64,
    pub b2: Option<i64>,
    pub chi_top: Option<i64>,
    pub is_k3: bool,
    pub inconsistent: bool,
    pub warnings: Vec<String>,
}

impl SingularityReport {
    /// The multiset of `n` values, vertices first, repeated by multiplicity.
    pub fn singularities(&self) -> Vec<u32> {
        self.records
            .iter()
            .flat_map(|r| std::iter::repeat(r.n).take(r.multiplicity as usize))
            .collect()
    }

    /// Weights of the vertices that lie on the surface and are singular.
    pub fn singular_vertex_weights(&self) -> Vec<u64> {
        self.vertices
            .iter()
            .filter(|v| v.record.is_some())
            .map(|v| v.weight)
            .collect()
    }
}

pub fn singularity_report(spec: &HypersurfaceSpec) -> Result<SingularityReport> {
    let vertices = classify_vertices(spec)?;
    let edges = classify_edges(spec)?;
    let mut records: Vec<SingularityRecord> =
        vertices.iter().filter_map(|v| v.record.clone()).collect();
    records.extend(edges);
    let sum_n = records
        .iter()
        .map(|r| r.n as u64 * r.multiplicity as u64)
        .sum::<u64>();
    let is_k3 = is_k3_candidate(spec);
    let inconsistent = vertices
        .iter()
        .any(|v| v.weight == 1 && v.record.is_some());
    let warnings = vertices
        .iter()
        .filter(|v| v.quasismooth_warning)
        .map(|v| {
            format!(
                "vertex {} (weight {}) has no monomial of shape x_i^k x_j",
                v.index, v.weight
            )
        })
        .collect();
    let (b2, chi_top) = if is_k3 {
        (Some(22 - sum_n as i64), Some(24 - sum_n as i64))
    } else {
        (None, None)
    };
    Ok(SingularityReport {
        weights: spec.weights.weights(),
        degree: spec.degree,
        vertices,
        records,
        sum_n,
        b2,
        chi_top,
        is_k3,
        inconsistent,
        warnings,
    })
}
