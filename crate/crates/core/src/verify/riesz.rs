//! Well-conditioned linear mixes turning an orthonormal system into a Riesz system.

use crate::direct_integral::{Element, System};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::systems::orthonormal_columns;
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

/// `T = Q1 diag(s) Q2^*` with `s` geometric from `1/condition` to 1, so the
/// Gram matrix of the mixed system has spectrum `s^2`. `condition == 1`
/// gives the identity.
pub fn riesz_mix<S: Scalar>(n: usize, condition: f64, rng: &mut ChaCha8Rng) -> DMatrix<S> {
    if condition == 1.0 {
        return DMatrix::identity(n, n);
    }
    let q1 = orthonormal_columns::<S>(n, n, rng);
    let q2 = orthonormal_columns::<S>(n, n, rng);
    let s: Vec<f64> = (0..n)
        .map(|k| {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            condition.powf(-t)
        })
        .collect();
    let mut left = q1;
    for (k, sk) in s.iter().enumerate() {
        for x in left.column_mut(k).iter_mut() {
            *x *= S::from_real(*sk);
        }
    }
    left * q2.adjoint()
}

/// `psi_m = sum_n T[n][m] phi_n` over the first `T.nrows()` functions.
pub fn apply_mix<S: Scalar>(system: &System<S>, t: &DMatrix<S>) -> Result<System<S>> {
    let elements = (0..t.ncols())
        .map(|m| {
            let mut e = Element::zeros(&system.fibers);
            for n in 0..t.nrows() {
                e.axpy(t[(n, m)], system.phi(n));
            }
            e
        })
        .collect();
    System::new(system.space.clone(), system.fibers.clone(), elements)
}
