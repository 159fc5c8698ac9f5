//! Partial sums and their majorants.
//!
//! `S_N*(x) = max_{1<=j<=N} |sum_{n<=j} a_n phi_n(x)|` is computed in one
//! streaming pass per atom: the running prefix at atom `i` only changes at
//! functions that are nonzero there, so the pass walks the incidence lists
//! and never materializes the `N` prefix elements.

mod chaining;
mod delta;
mod dyadic;
mod permutation;

pub use chaining::{chaining_diagnostics, Bound, ChainingDiagnostics};
pub use delta::{tandori_delta, DeltaBlockDiagnostics, DeltaMode, EXACT_DELTA_LIMIT};
pub use dyadic::{dyadic_decomposition, dyadic_pointwise_bound, DyadicDecomposition, MAX_POINTWISE_R};
pub use permutation::{adversarial_permutation, AdversarialStrategy, PermutationPlan, PlanProvenance};

use crate::direct_integral::{Element, System};
use crate::error::{Error, Result};
use crate::scalar::{fiber_norm_sq, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantProfile {
    /// Per atom, the largest prefix fiber norm.
    pub values: Vec<f64>,
    /// Per atom, the smallest 1-based prefix length attaining the maximum.
    pub argmax_prefix: Vec<usize>,
    /// `(sum_i mu_i values_i^2)^(1/2)`, null atoms excluded.
    pub l2_norm: f64,
}

impl MajorantProfile {
    pub(crate) fn from_values<S: Scalar>(system: &System<S>, values: Vec<f64>, argmax_prefix: Vec<usize>) -> Self {
        let l2_norm = system.space.l2_norm_of_profile(&values);
        Self {
            values,
            argmax_prefix,
            l2_norm,
        }
    }
}

pub(crate) fn check_len<S: Scalar>(system: &System<S>, a: &[S], n: usize) -> Result<()> {
    if n == 0 || n > system.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            max: system.len(),
        });
    }
    if a.len() < n {
        return Err(Error::Length {
            needed: n,
            have: a.len(),
        });
    }
    Ok(())
}

/// `sum_{n<=j} a_n phi_n`, with `j` 1-based.
pub fn prefix_sum<S: Scalar>(system: &System<S>, a: &[S], j: usize) -> Result<Element<S>> {
    check_len(system, a, j)?;
    system.combine(&a[..j])
}

/// `S_N*` for the natural order.
pub fn majorant<S: Scalar>(system: &System<S>, a: &[S], n: usize) -> Result<MajorantProfile> {
    check_len(system, a, n)?;
    Ok(streaming_majorant(system, a, &identity_order(n)))
}

/// `S_N*` of `sum_n a_sigma(n) phi_sigma(n)`.
pub fn permuted_majorant<S: Scalar>(
    system: &System<S>,
    a: &[S],
    plan: &PermutationPlan,
    n: usize,
) -> Result<MajorantProfile> {
    check_len(system, a, n)?;
    if plan.len() != n {
        return Err(Error::Permutation(format!(
            "plan has length {}, expected {n}",
            plan.len()
        )));
    }
    plan.check()?;
    Ok(streaming_majorant(system, a, &plan.zero_based()))
}

pub(crate) fn identity_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Inverse of a zero-based order: `position[f]` is the step at which
/// function `f` is added, `usize::MAX` if it never is.
pub(crate) fn positions(order: &[usize], len: usize) -> Vec<usize> {
    let mut pos = vec![usize::MAX; len];
    for (step, &f) in order.iter().enumerate() {
        pos[f] = step;
    }
    pos
}

/// Per atom, the steps at which the running prefix changes, in order.
pub(crate) fn atom_steps(incidence: &[Vec<usize>], pos: &[usize]) -> Vec<Vec<usize>> {
    incidence
        .iter()
        .map(|fs| {
            let mut steps: Vec<usize> = fs.iter().map(|&f| pos[f]).filter(|&p| p != usize::MAX).collect();
            steps.sort_unstable();
            steps
        })
        .collect()
}

fn streaming_majorant<S: Scalar>(system: &System<S>, a: &[S], order: &[usize]) -> MajorantProfile {
    let atoms = system.fibers.len();
    let pos = positions(order, system.len());
    let steps = atom_steps(system.incidence(), &pos);
    let mut values = vec![0.0; atoms];
    let mut argmax = vec![1; atoms];
    let mut acc: Vec<S> = Vec::new();
    for i in 0..atoms {
        acc.clear();
        acc.resize(system.fibers.dim(i), S::zero());
        for &step in &steps[i] {
            let f = order[step];
            let c = a[f];
            for (x, y) in acc.iter_mut().zip(system.phi(f).block(i)) {
                *x += c * *y;
            }
            let v = fiber_norm_sq(&acc).sqrt();
            if v > values[i] {
                values[i] = v;
                argmax[i] = step + 1;
            }
        }
    }
    MajorantProfile::from_values(system, values, argmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{generate, SystemKind, SystemSpec};

    fn basis(n: usize) -> System<f64> {
        generate(&SystemSpec::minimal(SystemKind::StandardBasis, n)).unwrap()
    }

    fn rademacher(n: usize) -> System<f64> {
        generate(&SystemSpec::minimal(SystemKind::Rademacher, n)).unwrap()
    }

    #[test]
    fn prefix_examples() {
        let s = basis(2);
        let p = prefix_sum(&s, &[3.0, 4.0], 2).unwrap();
        assert_eq!(p.as_flat(), &[3.0, 4.0]);
        assert!(prefix_sum(&s, &[0.0, 4.0], 1).unwrap().is_zero_on(&s.space));
        let r = rademacher(2);
        let p = prefix_sum(&r, &[1.0, 1.0], 2).unwrap();
        assert_eq!(p.as_flat(), &[2.0, 0.0, 0.0, -2.0]);
        assert!(prefix_sum(&r, &[1.0, 1.0], 3).is_err());
    }

    #[test]
    fn majorant_standard_basis() {
        let s = basis(2);
        let m = majorant(&s, &[3.0, 4.0], 2).unwrap();
        assert_eq!(m.values, vec![3.0, 4.0]);
        assert_eq!(m.l2_norm, 5.0);
        assert_eq!(m.argmax_prefix, vec![1, 2]);
    }

    #[test]
    fn majorant_rademacher() {
        let r = rademacher(2);
        let m = majorant(&r, &[1.0, 1.0], 2).unwrap();
        assert_eq!(m.values, vec![2.0, 1.0, 1.0, 2.0]);
        assert_eq!(m.argmax_prefix, vec![2, 1, 1, 2]);
        assert!((m.l2_norm - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients_zero_profile() {
        let r = rademacher(3);
        let m = majorant(&r, &[0.0; 3], 3).unwrap();
        assert!(m.values.iter().all(|&v| v == 0.0));
        assert_eq!(m.l2_norm, 0.0);
        assert!(m.argmax_prefix.iter().all(|&j| j == 1));
    }

    #[test]
    fn identity_plan_is_bitwise_equal() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::RandomQr, 20).with_seed(3)).unwrap();
        let a: Vec<f64> = (1..=20).map(|n| 1.0 / n as f64).collect();
        let m = majorant(&s, &a, 20).unwrap();
        let p = permuted_majorant(&s, &a, &PermutationPlan::identity(20), 20).unwrap();
        assert_eq!(m, p);
    }

    #[test]
    fn swap_examples() {
        let s = basis(2);
        let plan = PermutationPlan::explicit(vec![2, 1]).unwrap();
        let p = permuted_majorant(&s, &[3.0, 4.0], &plan, 2).unwrap();
        assert_eq!(p.values, vec![3.0, 4.0]);
        let r = rademacher(2);
        let p = permuted_majorant(&r, &[1.0, 1.0], &plan, 2).unwrap();
        // prefix 1 is phi_2 = (1,-1,1,-1), prefix 2 = (2,0,0,-2)
        assert_eq!(p.values, vec![2.0, 1.0, 1.0, 2.0]);
        assert_eq!(p.argmax_prefix, vec![2, 1, 1, 2]);
    }

    #[test]
    fn length_errors() {
        let s = basis(2);
        assert!(majorant(&s, &[1.0], 2).is_err());
        assert!(majorant(&s, &[1.0, 1.0, 1.0], 3).is_err());
        assert!(majorant(&s, &[1.0], 0).is_err());
    }
}
