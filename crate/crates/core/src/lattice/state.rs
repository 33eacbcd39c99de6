use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ExceptionalBlock, LatticeBasis};
use crate::rational::int;
use crate::wps::SingularityReport;
use crate::{Error, Result};

/// A singular point, tracked by the label it had on the base surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub origin: String,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowUpRecord {
    pub target: String,
    pub origin: String,
    pub n_before: u32,
    pub n_after: Option<u32>,
    pub block: ExceptionalBlock,
}

/// `A<n>` selects the first current point of type `A_n`, `A<n>#<i>` the i-th.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointSelector {
    pub n: u32,
    pub occurrence: usize,
}

impl FromStr for PointSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadLabel(s.to_string());
        let body = s.trim().strip_prefix('A').ok_or_else(bad)?;
        let (n, occ) = match body.split_once('#') {
            Some((n, i)) => (n, i.parse::<usize>().map_err(|_| bad())?),
            None => (body, 1),
        };
        let n: u32 = n.parse().map_err(|_| bad())?;
        if n == 0 || occ == 0 {
            return Err(bad());
        }
        Ok(PointSelector { n, occurrence: occ })
    }
}

impl fmt::Display for PointSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occurrence == 1 {
            write!(f, "A{}", self.n)
        } else {
            write!(f, "A{}#{}", self.n, self.occurrence)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceState {
    pub base_id: String,
    pub generator_degree: u64,
    pub lattice: LatticeBasis,
    pub singularities: Vec<SingularPoint>,
    pub b2: i64,
    pub euler: i64,
    pub history: Vec<BlowUpRecord>,
}

impl SurfaceState {
    /// Base state of a K3 hypersurface with Cartier generator `O(degree)`.
    pub fn from_report(
        base_id: &str,
        report: &SingularityReport,
        generator_degree: u64,
        h_self: i64,
    ) -> Result<Self> {
        let (b2, euler) = match (report.b2, report.chi_top) {
            (Some(b), Some(e)) => (b, e),
            _ => {
                return Err(Error::NotK3 {
                    degree: report.degree,
                    weight_sum: report.weights.iter().sum(),
                })
            }
        };
        let mut seen = std::collections::BTreeMap::<u32, usize>::new();
        let singularities = report
            .singularities()
            .into_iter()
            .map(|n| {
                let k = seen.entry(n).or_default();
                *k += 1;
                SingularPoint {
                    origin: format!("A{n}#{k}"),
                    n,
                }
            })
            .collect();
        Ok(SurfaceState {
            base_id: base_id.to_string(),
            generator_degree,
            lattice: LatticeBasis::new(int(h_self), Vec::new())?,
            singularities,
            b2,
            euler,
            history: Vec::new(),
        })
    }

    pub fn sum_n(&self) -> i64 {
        self.singularities.iter().map(|p| p.n as i64).sum()
    }

    pub fn singularity_types(&self) -> Vec<u32> {
        self.singularities.iter().map(|p| p.n).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.singularities.iter().map(|p| format!("A{}", p.n)).collect()
    }

    /// `euler = 2 + b2` and `b2 = 22 - sum n_i` hold at every stage.
    pub fn bookkeeping_consistent(&self) -> bool {
        self.euler == 2 + self.b2 && self.b2 == 22 - self.sum_n()
    }

    pub fn apply_chain<S: AsRef<str>>(&self, chain: &[S]) -> Result<SurfaceState> {
        chain.iter().try_fold(self.clone(), |s, step| {
            blow_up(&s, step.as_ref().parse()?)
        })
    }
}

/// `A_n` with `n >= 3` leaves `A_{n-2}`; `A_2` and `A_1` disappear.
pub fn blow_up(state: &SurfaceState, target: PointSelector) -> Result<SurfaceState> {
    let idx = state
        .singularities
        .iter()
        .enumerate()
        .filter(|(_, p)| p.n == target.n)
        .nth(target.occurrence - 1)
        .map(|(i, _)| i)
        .ok_or_else(|| Error::TargetAbsent(target.to_string()))?;
    let mut next = state.clone();
    let point = next.singularities[idx].clone();
    let n = point.n;
    let (block, n_after) = match n {
        1 => (ExceptionalBlock::Single, None),
        2 => (ExceptionalBlock::Pair(2), None),
        _ => (ExceptionalBlock::Pair(n), Some(n - 2)),
    };
    match n_after {
        Some(m) => next.singularities[idx].n = m,
        None => {
            next.singularities.remove(idx);
        }
    }
    let gained = block.rank() as i64;
    next.b2 += gained;
    next.euler += gained;
    next.lattice.blocks.push(block);
    next.history.push(BlowUpRecord {
        target: target.to_string(),
        origin: point.origin,
        n_before: n,
        n_after,
        block,
    });
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wps::{singularity_report, HypersurfaceSpec};

    fn base(w: [u64; 4], d: u64, h: i64) -> SurfaceState {
        let rep = singularity_report(&HypersurfaceSpec::generic(w, d).unwrap()).unwrap();
        SurfaceState::from_report("X", &rep, 1, h).unwrap()
    }

    #[test]
    fn selectors() {
        assert_eq!("A4".parse::<PointSelector>().unwrap(), PointSelector { n: 4, occurrence: 1 });
        assert_eq!("A2#2".parse::<PointSelector>().unwrap(), PointSelector { n: 2, occurrence: 2 });
        for bad in ["B4", "A", "A0", "A3#0", "A3#x"] {
            assert!(bad.parse::<PointSelector>().is_err(), "{bad}");
        }
    }

    #[test]
    fn blow_up_a1_on_x30() {
        let s = base([5, 6, 8, 11], 30, 88);
        let t = blow_up(&s, "A1".parse().unwrap()).unwrap();
        assert_eq!(t.singularity_types(), vec![7, 10]);
        assert_eq!((t.euler, t.b2), (7, 5));
        assert_eq!(t.lattice.blocks, vec![ExceptionalBlock::Single]);
    }

    #[test]
    fn blow_up_a3_on_x36() {
        let s = base([7, 8, 9, 12], 36, 18);
        let t = blow_up(&s, "A3".parse().unwrap()).unwrap();
        assert_eq!(t.singularity_types(), vec![6, 7, 1, 2]);
        assert_eq!(t.euler, 8);
        assert_eq!(t.history[0].origin, "A3#1");
    }

    #[test]
    fn blow_up_a2_removes_point() {
        let s = base([7, 8, 9, 12], 36, 18);
        let t = blow_up(&s, "A2".parse().unwrap()).unwrap();
        assert_eq!(t.singularity_types(), vec![6, 7, 3]);
        assert_eq!(t.lattice.blocks, vec![ExceptionalBlock::Pair(2)]);
    }

    #[test]
    fn absent_target() {
        let s = base([7, 8, 9, 12], 36, 18);
        assert_eq!(
            blow_up(&s, "A9".parse().unwrap()).unwrap_err(),
            Error::TargetAbsent("A9".into())
        );
        assert!(blow_up(&s, "A6#2".parse().unwrap()).is_err());
    }

    #[test]
    fn full_resolution_terminates() {
        let mut s = base([7, 8, 10, 25], 50, 10);
        let mut steps = 0;
        while let Some(p) = s.singularities.first().cloned() {
            let before = s.sum_n();
            s = blow_up(&s, PointSelector { n: p.n, occurrence: 1 }).unwrap();
            assert!(s.sum_n() < before);
            assert!(s.bookkeeping_consistent());
            steps += 1;
        }
        assert_eq!(s.b2, 22);
        assert!(steps <= 18);
    }
}
