//! Rearrangements of a finite series.

use crate::coefficients::tandori_blocks;
use crate::direct_integral::System;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative tolerance under which greedy candidates count as tied.
const GREEDY_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanProvenance {
    Identity,
    Explicit,
    SeededShuffle { seed: u64 },
    GreedyAdversarial,
    BlockReversal,
}

/// A bijection `sigma` of `{1..N}`, stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub sigma: Vec<usize>,
    pub provenance: PlanProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialStrategy {
    GreedyMaxPrefix,
    BlockReversal,
}

impl PermutationPlan {
    pub fn identity(n: usize) -> Self {
        Self {
            sigma: (1..=n).collect(),
            provenance: PlanProvenance::Identity,
        }
    }

    pub fn explicit(sigma: Vec<usize>) -> Result<Self> {
        let plan = Self {
            sigma,
            provenance: PlanProvenance::Explicit,
        };
        plan.check()?;
        Ok(plan)
    }

    /// Uniform shuffle drawn from `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn seeded_shuffle(n: usize, seed: u64) -> Self {
        let mut sigma: Vec<usize> = (1..=n).collect();
        sigma.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self {
            sigma,
            provenance: PlanProvenance::SeededShuffle { seed },
        }
    }

    /// Reverses every Tandori block `M_k` inside `{1..n}`; 1 and 2 stay fixed.
    pub fn block_reversal(n: usize) -> Self {
        let mut sigma: Vec<usize> = (1..=n).collect();
        if n >= 3 {
            let blocks = tandori_blocks(n as u64).expect("n >= 3");
            for &(lo, hi) in &blocks.blocks {
                sigma[lo as usize - 1..hi as usize].reverse();
            }
        }
        Self {
            sigma,
            provenance: PlanProvenance::BlockReversal,
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Checks that every index of `1..=len` appears exactly once.
    pub fn check(&self) -> Result<()> {
        let n = self.sigma.len();
        let mut seen = vec![false; n];
        for (pos, &s) in self.sigma.iter().enumerate() {
            if s == 0 || s > n {
                return Err(Error::Permutation(format!(
                    "entry {s} at position {} outside 1..={n}",
                    pos + 1
                )));
            }
            if std::mem::replace(&mut seen[s - 1], true) {
                return Err(Error::Permutation(format!(
                    "index {s} repeated at position {}",
                    pos + 1
                )));
            }
        }
        Ok(())
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|s| s - 1).collect()
    }
}

/// Builds a deterministic rearrangement meant to inflate the majorant.
///
/// `GreedyMaxPrefix` appends, at each step, the unused index maximizing the
/// norm of the running prefix (ties to the smallest index). `BlockReversal`
/// reverses each Tandori block. `seed` is recorded for reproducibility only;
/// neither strategy draws random numbers.
pub fn adversarial_permutation<S: Scalar>(
    system: &System<S>,
    a: &[S],
    n: usize,
    strategy: AdversarialStrategy,
    _seed: u64,
) -> Result<PermutationPlan> {
    super::check_len(system, a, n)?;
    if n < 2 {
        return Err(Error::IndexOutOfRange {
            index: n,
            max: system.len(),
        });
    }
    Ok(match strategy {
        AdversarialStrategy::BlockReversal => PermutationPlan::block_reversal(n),
        AdversarialStrategy::GreedyMaxPrefix => greedy(system, a, n),
    })
}

fn greedy<S: Scalar>(system: &System<S>, a: &[S], n: usize) -> PermutationPlan {
    let space = &system.space;
    let incidence = system.incidence();
    // functions (among the first n) touching each atom, null atoms dropped
    let touching: Vec<Vec<usize>> = incidence
        .iter()
        .enumerate()
        .map(|(i, fs)| {
            if space.weight(i) > 0.0 {
                fs.iter().copied().filter(|&f| f < n).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, fs) in touching.iter().enumerate() {
        for &f in fs {
            support[f].push(i);
        }
    }
    let norm_sq: Vec<f64> = (0..n)
        .map(|f| {
            support[f]
                .iter()
                .map(|&i| space.weight(i) * crate::scalar::fiber_norm_sq(system.phi(f).block(i)))
                .sum()
        })
        .collect();
    // cross[m] = <P, phi_m>
    let mut cross = vec![S::zero(); n];
    let mut prefix_sq = 0.0;
    let mut used = vec![false; n];
    let mut sigma = Vec::with_capacity(n);
    let mut scratch = vec![S::zero(); n];
    let mut touched: Vec<usize> = Vec::new();
    for _ in 0..n {
        let score = |m: usize| {
            let c = a[m];
            prefix_sq + 2.0 * (c.conjugate() * cross[m]).real() + c.abs_sq() * norm_sq[m]
        };
        let best = (0..n)
            .filter(|&m| !used[m])
            .map(score)
            .fold(f64::NEG_INFINITY, f64::max);
        let floor = best - GREEDY_TIE_TOL * best.abs();
        let pick = (0..n).find(|&m| !used[m] && score(m) >= floor).unwrap_or_else(|| {
            // NaN scores: fall back to the smallest unused index
            (0..n).find(|&m| !used[m]).expect("unused index remains")
        });
        prefix_sq = score(pick).max(0.0);
        used[pick] = true;
        sigma.push(pick + 1);
        // cross[m] += a_pick <phi_pick, phi_m>
        touched.clear();
        for &i in &support[pick] {
            let w = space.weight(i);
            let bp = system.phi(pick).block(i);
            for &m in &touching[i] {
                if used[m] {
                    continue;
                }
                let bm = system.phi(m).block(i);
                let mut ip = S::zero();
                for (x, y) in bp.iter().zip(bm) {
                    ip += *x * y.conjugate();
                }
                if scratch[m] == S::zero() {
                    touched.push(m);
                }
                scratch[m] += ip * S::from_real(w);
            }
        }
        for &m in &touched {
            cross[m] += a[pick] * scratch[m];
            scratch[m] = S::zero();
        }
    }
    PermutationPlan {
        sigma,
        provenance: PlanProvenance::GreedyAdversarial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{generate, SystemKind, SystemSpec};

    fn basis(n: usize) -> System<f64> {
        generate(&SystemSpec::minimal(SystemKind::StandardBasis, n)).unwrap()
    }

    #[test]
    fn greedy_picks_larger_first() {
        let p = adversarial_permutation(&basis(2), &[1.0, 2.0], 2, AdversarialStrategy::GreedyMaxPrefix, 0).unwrap();
        assert_eq!(p.sigma, vec![2, 1]);
        assert_eq!(p.provenance, PlanProvenance::GreedyAdversarial);
    }

    #[test]
    fn greedy_ties_keep_natural_order() {
        let n = 12;
        let p = adversarial_permutation(&basis(n), &vec![0.7; n], n, AdversarialStrategy::GreedyMaxPrefix, 0).unwrap();
        assert_eq!(p.sigma, (1..=n).collect::<Vec<_>>());
    }

    #[test]
    fn greedy_on_rademacher_is_a_permutation() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::Rademacher, 6)).unwrap();
        let a = [0.3, -1.0, 0.5, 0.5, -0.2, 0.9];
        let p = adversarial_permutation(&s, &a, 6, AdversarialStrategy::GreedyMaxPrefix, 0).unwrap();
        p.check().unwrap();
        // orthonormal: the first pick is the largest |a_n|
        assert_eq!(p.sigma[0], 2);
    }

    #[test]
    fn block_reversal_sixteen() {
        let p = PermutationPlan::block_reversal(16);
        assert_eq!(p.sigma, vec![1, 2, 4, 3, 16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5]);
        let p = PermutationPlan::block_reversal(2);
        assert_eq!(p.sigma, vec![1, 2]);
    }

    #[test]
    fn plan_validation() {
        assert!(PermutationPlan::explicit(vec![1, 1]).is_err());
        assert!(PermutationPlan::explicit(vec![0, 1]).is_err());
        assert!(PermutationPlan::explicit(vec![3, 1]).is_err());
        assert!(PermutationPlan::explicit(vec![2, 3, 1]).is_ok());
    }

    #[test]
    fn seeded_shuffle_is_reproducible() {
        let a = PermutationPlan::seeded_shuffle(50, 9);
        assert_eq!(a, PermutationPlan::seeded_shuffle(50, 9));
        assert_ne!(a.sigma, PermutationPlan::seeded_shuffle(50, 10).sigma);
        a.check().unwrap();
    }
}
