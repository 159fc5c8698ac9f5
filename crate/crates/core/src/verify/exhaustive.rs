//! The majorant bound over every rearrangement of a short series.

use crate::direct_integral::System;
use crate::error::{Error, Result};
use crate::majorants::check_len;
use crate::scalar::{fiber_norm_sq, Scalar};
use crate::slack::holds;
use crate::summation::neumaier;
use serde::{Deserialize, Serialize};

pub const EXHAUSTIVE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub n: usize,
    pub plans: usize,
    /// `(2 + log2 N) |b|_2`, the same for every plan.
    pub rhs: f64,
    /// Largest `|S_N*|_2` over all plans and the first plan (lexicographic) attaining it.
    pub worst_l2: f64,
    pub worst_sigma: Vec<usize>,
    pub failures: usize,
    pub all_hold: bool,
}

impl ExhaustiveResult {
    pub fn worst_ratio(&self) -> f64 {
        crate::slack::ratio(self.worst_l2, self.rhs)
    }
}

struct Walk<'a, S> {
    system: &'a System<S>,
    a: &'a [S],
    n: usize,
    support: Vec<Vec<usize>>,
    prefix: Vec<Vec<S>>,
    maxima: Vec<Vec<f64>>,
    used: Vec<bool>,
    sigma: Vec<usize>,
    rhs: f64,
    slack: f64,
    result: ExhaustiveResult,
}

impl<S: Scalar> Walk<'_, S> {
    fn descend(&mut self, depth: usize) {
        if depth == self.n {
            let l2 = self.system.space.l2_norm_of_profile(&self.maxima[depth]);
            let r = &mut self.result;
            r.plans += 1;
            if !holds(l2, self.rhs, self.slack) {
                r.failures += 1;
            }
            if l2 > r.worst_l2 || r.worst_sigma.is_empty() || l2.is_nan() && !r.worst_l2.is_nan() {
                r.worst_l2 = l2;
                r.worst_sigma = self.sigma.iter().map(|f| f + 1).collect();
            }
            return;
        }
        for f in 0..self.n {
            if self.used[f] {
                continue;
            }
            let (lo, hi) = self.prefix.split_at_mut(depth + 1);
            hi[0].copy_from_slice(&lo[depth]);
            let (mlo, mhi) = self.maxima.split_at_mut(depth + 1);
            mhi[0].copy_from_slice(&mlo[depth]);
            let c = self.a[f];
            for &i in &self.support[f] {
                let range = self.system.fibers.range(i);
                let block = &mut hi[0][range];
                for (x, y) in block.iter_mut().zip(self.system.phi(f).block(i)) {
                    *x += c * *y;
                }
                mhi[0][i] = mhi[0][i].max(fiber_norm_sq(block).sqrt());
            }
            self.used[f] = true;
            self.sigma.push(f);
            self.descend(depth + 1);
            self.sigma.pop();
            self.used[f] = false;
        }
    }
}

/// Enumerates all `N!` orderings of the first `n` terms (a depth-first walk
/// over the prefix tree, so shared prefixes are summed once) and checks
/// `|S_N*|_2 <= (2 + log2 N) |b|_2` for each.
pub fn exhaustive_permutation_check<S: Scalar>(
    system: &System<S>,
    a: &[S],
    n: usize,
    slack: f64,
) -> Result<ExhaustiveResult> {
    check_len(system, a, n)?;
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::Config(format!(
            "exhaustive permutation check needs N <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    let incidence = system.incidence();
    let mut support = vec![Vec::new(); n];
    for (i, fs) in incidence.iter().enumerate() {
        for &f in fs.iter().filter(|&&f| f < n) {
            support[f].push(i);
        }
    }
    let b_norm = neumaier(a[..n].iter().map(|c| c.abs_sq())).sqrt();
    let rhs = (2.0 + (n as f64).log2()) * b_norm;
    let atoms = system.fibers.len();
    let mut walk = Walk {
        system,
        a,
        n,
        support,
        prefix: vec![vec![S::zero(); system.fibers.total_dim()]; n + 1],
        maxima: vec![vec![0.0; atoms]; n + 1],
        used: vec![false; n],
        sigma: Vec::with_capacity(n),
        rhs,
        slack,
        result: ExhaustiveResult {
            n,
            plans: 0,
            rhs,
            worst_l2: 0.0,
            worst_sigma: Vec::new(),
            failures: 0,
            all_hold: false,
        },
    };
    walk.descend(0);
    let mut result = walk.result;
    result.all_hold = result.failures == 0;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorants::{permuted_majorant, PermutationPlan};
    use crate::systems::{generate, SystemKind, SystemSpec};

    #[test]
    fn two_term_basis() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::StandardBasis, 2)).unwrap();
        let r = exhaustive_permutation_check(&s, &[3.0, 4.0], 2, 1e-12).unwrap();
        assert_eq!(r.plans, 2);
        assert_eq!(r.worst_l2, 5.0);
        assert_eq!(r.rhs, 15.0);
        assert!(r.all_hold);
    }

    #[test]
    fn single_term() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::Haar, 1)).unwrap();
        let r = exhaustive_permutation_check(&s, &[2.0], 1, 1e-12).unwrap();
        assert_eq!((r.plans, r.worst_sigma.clone()), (1, vec![1]));
        assert!((r.worst_ratio() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rademacher_six_all_plans() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::Rademacher, 6)).unwrap();
        let a: Vec<f64> = (1..=6).map(|n| 1.0 / n as f64).collect();
        let r = exhaustive_permutation_check(&s, &a, 6, 1e-12).unwrap();
        assert_eq!(r.plans, 720);
        assert!(r.all_hold);
        let plan = PermutationPlan::explicit(r.worst_sigma.clone()).unwrap();
        let m = permuted_majorant(&s, &a, &plan, 6).unwrap();
        assert!((m.l2_norm - r.worst_l2).abs() < 1e-14);
    }

    #[test]
    fn rejects_large_n() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::StandardBasis, 9)).unwrap();
        assert!(exhaustive_permutation_check(&s, &[1.0; 9], 9, 1e-12).is_err());
    }
}
