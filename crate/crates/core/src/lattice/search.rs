//! Enumeration of ample divisors with prescribed self-intersection.
//!
//! For fixed `a0` the target `Q^2 = t` becomes `sum_blocks q_b = a0^2 H^2 - t`
//! with each block form positive definite, so the search is a bounded
//! subset-sum over per-block candidate lists. A reachability bitset per
//! suffix of blocks prunes every dead branch before it is entered.

use num_traits::{Signed, ToPrimitive};

use super::{ExceptionalBlock, LatticeBasis, Profile, DEFAULT_EFFECTIVE_BOUND};
use crate::{Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub a0_max: u64,
    pub coeff_max: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            a0_max: 20,
            coeff_max: 64,
        }
    }
}

struct Candidate {
    coeffs: Vec<i64>,
    value: usize,
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(len: usize) -> Self {
        Bitset(vec![0; len / 64 + 1])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    /// `self |= other << shift`, truncated to the current length.
    fn or_shifted(&mut self, other: &Bitset, shift: usize) {
        let words = shift / 64;
        let bits = shift % 64;
        let len = self.0.len();
        for i in (words..len).rev() {
            let src = i - words;
            let mut v = other.0[src] << bits;
            if bits > 0 && src > 0 {
                v |= other.0[src - 1] >> (64 - bits);
            }
            self.0[i] |= v;
        }
    }
}

fn block_candidates(block: ExceptionalBlock, profile: Profile, cmax: i64, max: usize) -> Vec<Candidate> {
    let bound = DEFAULT_EFFECTIVE_BOUND;
    let mut out = Vec::new();
    match block {
        ExceptionalBlock::Pair(n) => {
            let n = n as i64;
            for alpha in 1..=cmax {
                for beta in alpha + 1..=cmax {
                    let ok = match profile {
                        Profile::AmpleOnly => true,
                        Profile::Strict => n * alpha + beta > bound && beta - alpha > bound,
                        Profile::Cartier => {
                            (n - 1) * (n * alpha + beta) > bound
                                && alpha * (n - 1) + 2 * beta > bound
                                && (n - 1) * (beta - alpha) > bound
                        }
                    };
                    let value = n * (n - 1) * alpha * alpha + 2 * (n - 1) * alpha * beta + 2 * beta * beta;
                    if ok && value as usize <= max {
                        out.push(Candidate {
                            coeffs: vec![alpha, beta],
                            value: value as usize,
                        });
                    }
                }
            }
        }
        ExceptionalBlock::Single => {
            for gamma in 1..=cmax {
                let value = 2 * gamma * gamma;
                if (profile == Profile::AmpleOnly || 2 * gamma > bound) && value as usize <= max {
                    out.push(Candidate {
                        coeffs: vec![gamma],
                        value: value as usize,
                    });
                }
            }
        }
    }
    out
}

/// All tuples `(a0, a1, ...)` with positive entries inside `bounds` such that
/// `Q^2 = target`, `Q` is ample and `Q` satisfies `profile`, in
/// lexicographic order. Stops after `limit` tuples when given.
pub fn search_q(
    basis: &LatticeBasis,
    target: &Rational,
    profile: Profile,
    bounds: SearchBounds,
    limit: Option<usize>,
) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    if !target.is_positive() || limit == Some(0) {
        return Ok(out);
    }
    let a0_min = match profile {
        Profile::AmpleOnly => 1,
        _ => DEFAULT_EFFECTIVE_BOUND as u64 + 1,
    };
    let budget = |a0: u64| -> Option<usize> {
        let r = Rational::from_integer((a0 * a0).into()) * &basis.h_self - target;
        if r.is_negative() || !r.is_integer() {
            return None;
        }
        r.to_integer().to_usize()
    };
    let Some(max) = (a0_min..=bounds.a0_max).rev().find_map(budget) else {
        return Ok(out);
    };

    let cands: Vec<Vec<Candidate>> = basis
        .blocks
        .iter()
        .map(|&b| block_candidates(b, profile, bounds.coeff_max as i64, max))
        .collect();
    // reach[i] = sums attainable by blocks i.. (one candidate each)
    let k = cands.len();
    let mut reach: Vec<Bitset> = (0..=k).map(|_| Bitset::new(max + 1)).collect();
    reach[k].set(0);
    for i in (0..k).rev() {
        let (head, tail) = reach.split_at_mut(i + 1);
        for c in &cands[i] {
            head[i].or_shifted(&tail[0], c.value);
        }
    }

    for a0 in a0_min..=bounds.a0_max {
        let Some(r) = budget(a0) else { continue };
        if !reach[0].get(r) {
            continue;
        }
        let mut tuple = vec![a0 as i64];
        if descend(&cands, &reach, 0, r, &mut tuple, &mut out, limit) {
            break;
        }
    }
    Ok(out)
}

/// Returns true once `limit` is reached.
fn descend(
    cands: &[Vec<Candidate>],
    reach: &[Bitset],
    i: usize,
    remaining: usize,
    tuple: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    limit: Option<usize>,
) -> bool {
    if i == cands.len() {
        out.push(tuple.clone());
        return limit.is_some_and(|l| out.len() >= l);
    }
    for c in &cands[i] {
        if c.value > remaining || !reach[i + 1].get(remaining - c.value) {
            continue;
        }
        tuple.extend_from_slice(&c.coeffs);
        let done = descend(cands, reach, i + 1, remaining - c.value, tuple, out, limit);
        tuple.truncate(tuple.len() - c.coeffs.len());
        if done {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{verify_q, DivisorClass};
    use crate::rational::int;
    use ExceptionalBlock::*;

    fn basis(h: i64, blocks: Vec<ExceptionalBlock>) -> LatticeBasis {
        LatticeBasis::new(int(h), blocks).unwrap()
    }

    #[test]
    fn bitset_shift() {
        let mut a = Bitset::new(200);
        let mut b = Bitset::new(200);
        b.set(0);
        b.set(63);
        b.set(70);
        a.or_shifted(&b, 65);
        assert!(a.get(65) && a.get(128) && a.get(135));
        assert!(!a.get(64) && !a.get(0));
    }

    #[test]
    fn finds_table_row_for_blowup_of_a3() {
        let b = basis(18, vec![Pair(3)]);
        let bounds = SearchBounds { a0_max: 40, coeff_max: 40 };
        let found = search_q(&b, &int(2), Profile::AmpleOnly, bounds, None).unwrap();
        assert!(found.contains(&vec![14, 11, 28]));
        let mut sorted = found.clone();
        sorted.sort();
        assert_eq!(sorted, found);
    }

    #[test]
    fn block_free_lattice_without_solution() {
        let b = basis(18, vec![]);
        assert!(search_q(&b, &int(2), Profile::AmpleOnly, SearchBounds::default(), None)
            .unwrap()
            .is_empty());
        let b = basis(2, vec![]);
        assert_eq!(
            search_q(&b, &int(2), Profile::AmpleOnly, SearchBounds::default(), None).unwrap(),
            vec![vec![1]]
        );
    }

    #[test]
    fn results_reverify_and_respect_limit() {
        let b = basis(10, vec![Single, Pair(4), Pair(2)]);
        for profile in Profile::ALL {
            let found = search_q(&b, &int(2), profile, SearchBounds::default(), Some(5)).unwrap();
            assert!(!found.is_empty(), "{profile}");
            assert!(found.len() <= 5);
            for t in &found {
                let v = verify_q(&b, &DivisorClass::from_tuple(t), &int(2), profile).unwrap();
                assert!(v.passed, "{profile} {t:?}");
            }
        }
    }

    #[test]
    fn limit_takes_lexicographic_prefix() {
        let b = basis(18, vec![Pair(3), Pair(2)]);
        let all = search_q(&b, &int(2), Profile::AmpleOnly, SearchBounds::default(), None).unwrap();
        let some = search_q(&b, &int(2), Profile::AmpleOnly, SearchBounds::default(), Some(3)).unwrap();
        assert_eq!(&all[..3], &some[..]);
    }

    #[test]
    fn non_positive_target_is_empty() {
        let b = basis(18, vec![Pair(3)]);
        assert!(search_q(&b, &int(0), Profile::AmpleOnly, SearchBounds::default(), None)
            .unwrap()
            .is_empty());
    }
}
