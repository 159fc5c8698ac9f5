//! Extremal eigenvalues of Hermitian Gram matrices.

use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest matrix order handled by the dense Hermitian eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 512;

/// Krylov dimension of the Lanczos iteration used above the dense limit.
const LANCZOS_STEPS: usize = 120;

/// Fixed seed of the Lanczos start vector.
const LANCZOS_SEED: u64 = 0x5eed_1a2c_2005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EigenMethod {
    /// Full Hermitian eigendecomposition.
    Dense,
    /// Lanczos with full reorthogonalization; the reported values are the
    /// extreme Ritz values after `steps` iterations and lie inside the true
    /// spectral interval.
    Lanczos { steps: usize },
}

/// `(lambda_min, lambda_max, method)` of a Hermitian matrix.
pub fn extremal_eigenvalues<S: Scalar>(a: &DMatrix<S>) -> (f64, f64, EigenMethod) {
    let n = a.nrows();
    if n <= DENSE_EIGEN_LIMIT {
        let ev = SymmetricEigen::new(a.clone()).eigenvalues;
        let (lo, hi) = min_max(ev.iter().copied());
        (lo, hi, EigenMethod::Dense)
    } else {
        lanczos_extremes(a)
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn lanczos_extremes<S: Scalar>(a: &DMatrix<S>) -> (f64, f64, EigenMethod) {
    let n = a.nrows();
    let steps = LANCZOS_STEPS.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut q = DVector::<S>::from_fn(n, |_, _| S::sample_normal(&mut rng));
    let q_norm = q.norm();
    q.unscale_mut(q_norm);

    let mut basis: Vec<DVector<S>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let scale = a
        .iter()
        .map(|x| x.modulus())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    for j in 0..steps {
        let mut w = a * &q;
        let aj = q.dotc(&w).real();
        alpha.push(aj);
        basis.push(q.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, S::one());
            }
        }
        let b = w.norm();
        if j + 1 == steps || b <= 1e-13 * scale {
            break;
        }
        beta.push(b);
        w.unscale_mut(b);
        q = w;
    }

    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let (lo, hi) = min_max(SymmetricEigen::new(t).eigenvalues.iter().copied());
    (lo, hi, EigenMethod::Lanczos { steps: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn lanczos_matches_dense_on_a_spread_spectrum() {
        let n = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = b.transpose() * &b / n as f64 + DMatrix::identity(n, n);
        let (lo_d, hi_d, _) = extremal_eigenvalues(&a);
        let (lo_l, hi_l, m) = lanczos_extremes(&a);
        assert!(matches!(m, EigenMethod::Lanczos { .. }));
        assert!((hi_d - hi_l).abs() < 1e-8 * hi_d, "{hi_d} vs {hi_l}");
        assert!(lo_l >= lo_d - 1e-10);
        assert!((lo_d - lo_l).abs() < 1e-3, "{lo_d} vs {lo_l}");
    }

    #[test]
    fn identity_breaks_down_immediately() {
        let a = DMatrix::<f64>::identity(600, 600);
        let (lo, hi, m) = extremal_eigenvalues(&a);
        assert_eq!(m, EigenMethod::Lanczos { steps: 1 });
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }
}
