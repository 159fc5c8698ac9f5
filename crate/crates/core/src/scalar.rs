//! Scalar fields of the fibers.
//!
//! Fibers are either all real or all complex. Both cases share one code path
//! through the [`Scalar`] trait, implemented for `f64` and `Complex<f64>`.

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl Field {
    /// Number of stored reals per scalar.
    pub fn width(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

/// A fiber scalar. The arithmetic comes from [`ComplexField`]; this trait
/// adds the pieces the library needs on top.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + Debug + PartialEq {
    const FIELD: Field;

    /// Builds a scalar from its parts; `None` when `im != 0` for real scalars.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    /// `|z|^2` without the square root.
    #[inline]
    fn abs_sq(self) -> f64 {
        self.modulus_squared()
    }

    /// Standard normal draw: `N(0,1)` for reals, `(N(0,1) + i N(0,1)) / sqrt(2)` for complex.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    #[inline]
    fn abs_sq(self) -> f64 {
        self * self
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for C64 {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re, im))
    }

    #[inline]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Squared Euclidean norm of a fiber vector.
#[inline]
pub fn fiber_norm_sq<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs_sq()).sum()
}
