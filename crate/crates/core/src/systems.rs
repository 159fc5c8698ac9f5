//! Generators of orthonormal systems on discrete direct integrals.
//!
//! Random kinds draw from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha,
//! portable and stable across platforms) and standard normals from
//! `rand_distr::StandardNormal`. Gaussian matrices are filled column by
//! column (function by function), rows in flattened coordinate order.

use crate::direct_integral::io::AnySystem;
use crate::direct_integral::{Element, HilbertCollection, MeasureSpace, System};
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, C64};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest grid the dyadic generators will build.
pub const MAX_GRID_LOG2: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    RandomQr,
    Rademacher,
    Haar,
    StandardBasis,
    TensorVector,
    VaryingDim,
}

impl SystemKind {
    pub const ALL: [SystemKind; 6] = [
        SystemKind::StandardBasis,
        SystemKind::Rademacher,
        SystemKind::Haar,
        SystemKind::RandomQr,
        SystemKind::TensorVector,
        SystemKind::VaryingDim,
    ];
}

/// What to generate.
///
/// `resolution` is the number of positive-mass atoms: the dyadic grid size
/// for `Rademacher`, `Haar` and `TensorVector` (a power of two), `M` for
/// `RandomQr` and `VaryingDim`, and ignored by `StandardBasis` (which always
/// uses `n_functions` atoms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub n_functions: usize,
    pub resolution: usize,
    #[serde(default = "one")]
    pub fiber_dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub field: Field,
}

fn one() -> usize {
    1
}

impl SystemSpec {
    /// A spec with the smallest admissible resolution for `n` functions.
    pub fn minimal(kind: SystemKind, n: usize) -> Self {
        let resolution = match kind {
            SystemKind::Rademacher => 1usize << n.min(MAX_GRID_LOG2 as usize),
            SystemKind::Haar | SystemKind::TensorVector => n.next_power_of_two(),
            SystemKind::StandardBasis | SystemKind::RandomQr => n,
            // capacity of M atoms with dims 1,2,3,1,2,3,... is about 2M
            SystemKind::VaryingDim => (n / 2 + 1).max(2),
        };
        Self {
            kind,
            n_functions: n,
            resolution,
            fiber_dim: 1,
            seed: 0,
            field: Field::Real,
        }
    }

    pub fn with_fiber_dim(mut self, d: usize) -> Self {
        self.fiber_dim = d;
        if self.kind == SystemKind::TensorVector {
            self.resolution = self.n_functions.div_ceil(d.max(1)).next_power_of_two();
        }
        if self.kind == SystemKind::RandomQr {
            self.resolution = self.n_functions.div_ceil(d.max(1));
        }
        self
    }

    pub fn with_resolution(mut self, r: usize) -> Self {
        self.resolution = r;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_functions;
        let bad = |m: String| Err(Error::SystemSpec(m));
        if n == 0 {
            return bad("n_functions must be >= 1".into());
        }
        if self.fiber_dim == 0 {
            return bad("fiber_dim must be >= 1".into());
        }
        let r = self.resolution;
        let pow2 = |name: &str| -> Result<()> {
            if !r.is_power_of_two() {
                return Err(Error::SystemSpec(format!(
                    "{name} resolution {r} is not a power of two"
                )));
            }
            if r > 1 << MAX_GRID_LOG2 {
                return Err(Error::SystemSpec(format!(
                    "{name} resolution {r} exceeds 2^{MAX_GRID_LOG2}"
                )));
            }
            Ok(())
        };
        match self.kind {
            SystemKind::StandardBasis => Ok(()),
            SystemKind::Rademacher => {
                pow2("Rademacher")?;
                if (r.trailing_zeros() as usize) < n {
                    return bad(format!(
                        "Rademacher with {n} functions needs a grid of at least 2^{n} atoms, got {r}"
                    ));
                }
                Ok(())
            }
            SystemKind::Haar => {
                pow2("Haar")?;
                if r < n {
                    return bad(format!("Haar with {n} functions needs resolution >= {n}, got {r}"));
                }
                Ok(())
            }
            SystemKind::TensorVector => {
                pow2("TensorVector")?;
                let base = n.div_ceil(self.fiber_dim);
                if r < base {
                    return bad(format!(
                        "TensorVector with {n} functions in fiber dim {} needs resolution >= {base}, got {r}",
                        self.fiber_dim
                    ));
                }
                Ok(())
            }
            SystemKind::RandomQr => {
                if r == 0 || n > r * self.fiber_dim {
                    return bad(format!(
                        "RandomQr needs n_functions <= resolution * fiber_dim ({} * {}), got {n}",
                        r, self.fiber_dim
                    ));
                }
                Ok(())
            }
            SystemKind::VaryingDim => {
                if r < 2 {
                    return bad("VaryingDim needs at least 2 atoms".into());
                }
                let cap = varying_dims(r).iter().sum::<usize>();
                if n > cap {
                    return bad(format!(
                        "VaryingDim with {r} atoms holds at most {cap} functions, got {n}"
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Generates the system described by `spec` in the scalar type `S`.
pub fn generate<S: Scalar>(spec: &SystemSpec) -> Result<System<S>> {
    spec.validate()?;
    if spec.field != S::FIELD {
        return Err(Error::SystemSpec(format!(
            "spec field {:?} requested as {:?}",
            spec.field,
            S::FIELD
        )));
    }
    match spec.kind {
        SystemKind::StandardBasis => standard_basis(spec.n_functions),
        SystemKind::Rademacher => rademacher(spec.n_functions, spec.resolution),
        SystemKind::Haar => haar(spec.n_functions, spec.resolution),
        SystemKind::TensorVector => tensor_vector(spec.n_functions, spec.resolution, spec.fiber_dim),
        SystemKind::RandomQr => random_qr(spec.n_functions, spec.resolution, spec.fiber_dim, spec.seed),
        SystemKind::VaryingDim => varying_dim(spec.n_functions, spec.resolution, spec.seed),
    }
}

/// Generates in whichever field the spec names.
pub fn generate_any(spec: &SystemSpec) -> Result<AnySystem> {
    Ok(match spec.field {
        Field::Real => AnySystem::Real(generate::<f64>(spec)?),
        Field::Complex => AnySystem::Complex(generate::<C64>(spec)?),
    })
}

fn standard_basis<S: Scalar>(n: usize) -> Result<System<S>> {
    let space = MeasureSpace::counting(n)?;
    let fibers = HilbertCollection::constant(n, 1, S::FIELD)?;
    let elements = (0..n)
        .map(|k| {
            let mut e = Element::zeros(&fibers);
            e.as_flat_mut()[k] = S::one();
            e
        })
        .collect();
    System::new(space, fibers, elements)
}

/// Value of the `n`-th Rademacher function (1-based) on atom `t` of a grid
/// of `2^m` atoms.
fn rademacher_value(n: usize, t: usize, m: u32) -> f64 {
    if (t >> (m as usize - n)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn rademacher<S: Scalar>(n: usize, grid: usize) -> Result<System<S>> {
    let m = grid.trailing_zeros();
    let space = MeasureSpace::uniform(grid)?;
    let fibers = HilbertCollection::constant(grid, 1, S::FIELD)?;
    let elements = (1..=n)
        .map(|k| {
            let data = (0..grid).map(|t| S::from_real(rademacher_value(k, t, m))).collect();
            Element::from_flat(data, &fibers)
        })
        .collect::<Result<_>>()?;
    System::new(space, fibers, elements)
}

/// Haar function `k` (0-based; `k = 0` is the constant) on a grid of size `grid`.
fn haar_values(k: usize, grid: usize) -> Vec<f64> {
    if k == 0 {
        return vec![1.0; grid];
    }
    let j = usize::BITS - 1 - k.leading_zeros();
    let shift = k - (1 << j);
    let width = grid >> j;
    let height = (2.0f64).powf(j as f64 / 2.0);
    let mut v = vec![0.0; grid];
    let start = shift * width;
    for (t, x) in v[start..start + width].iter_mut().enumerate() {
        *x = if t < width / 2 { height } else { -height };
    }
    v
}

fn haar<S: Scalar>(n: usize, grid: usize) -> Result<System<S>> {
    let space = MeasureSpace::uniform(grid)?;
    let fibers = HilbertCollection::constant(grid, 1, S::FIELD)?;
    let elements = (0..n)
        .map(|k| Element::from_flat(haar_values(k, grid).into_iter().map(S::from_real).collect(), &fibers))
        .collect::<Result<_>>()?;
    System::new(space, fibers, elements)
}

/// `phi_n = psi_{n / d} (x) e_{n mod d}` with `psi` the Haar system.
fn tensor_vector<S: Scalar>(n: usize, grid: usize, d: usize) -> Result<System<S>> {
    let space = MeasureSpace::uniform(grid)?;
    let fibers = HilbertCollection::constant(grid, d, S::FIELD)?;
    let elements = (0..n)
        .map(|idx| {
            let psi = haar_values(idx / d, grid);
            let slot = idx % d;
            let mut e = Element::zeros(&fibers);
            for (t, v) in psi.into_iter().enumerate() {
                e.as_flat_mut()[t * d + slot] = S::from_real(v);
            }
            e
        })
        .collect();
    System::new(space, fibers, elements)
}

/// Orthonormal columns of a seeded Gaussian `rows x cols` matrix, with the
/// diagonal of the triangular factor made real and nonnegative.
pub(crate) fn orthonormal_columns<S: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<S> {
    debug_assert!(cols <= rows);
    let mut g = DMatrix::<S>::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            g[(r, c)] = S::sample_normal(rng);
        }
    }
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..cols {
        let d = r[(c, c)];
        let m = d.modulus();
        if m > 0.0 {
            // Q R = (Q u)(conj(u) R) with u = d / |d| leaves diag(conj(u) R) = |d|
            let u = d * S::from_real(1.0 / m);
            for x in q.column_mut(c).iter_mut() {
                *x *= u;
            }
        }
    }
    q
}

fn random_qr<S: Scalar>(n: usize, atoms: usize, d: usize, seed: u64) -> Result<System<S>> {
    let space = MeasureSpace::uniform(atoms)?;
    let fibers = HilbertCollection::constant(atoms, d, S::FIELD)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = orthonormal_columns::<S>(atoms * d, n, &mut rng);
    let inv_sqrt_mu = S::from_real((atoms as f64).sqrt());
    let elements = (0..n)
        .map(|k| Element::from_flat(q.column(k).iter().map(|x| *x * inv_sqrt_mu).collect(), &fibers))
        .collect::<Result<_>>()?;
    System::new(space, fibers, elements)
}

fn varying_dims(atoms: usize) -> Vec<usize> {
    (0..atoms).map(|i| 1 + i % 3).collect()
}

/// Positive-mass atoms `0..atoms` with `d_i = 1 + (i mod 3)` and masses
/// proportional to `1 + (i mod 4)`, plus one trailing null atom of fiber
/// dimension 2. Functions are assigned round-robin to the three dimension
/// groups and orthonormalized inside their group, so each function lives on
/// atoms of a single fiber dimension. The null atom carries arbitrary seeded
/// values, which no L2 quantity may see.
fn varying_dim<S: Scalar>(n: usize, atoms: usize, seed: u64) -> Result<System<S>> {
    let mut dims = varying_dims(atoms);
    let raw: Vec<f64> = (0..atoms).map(|i| (1 + i % 4) as f64).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    dims.push(2);
    weights.push(0.0);
    let space = MeasureSpace::new(weights)?;
    let fibers = HilbertCollection::new(dims, S::FIELD)?;

    // coordinates (flat positions) of each dimension group
    let mut groups: [Vec<usize>; 3] = Default::default();
    for i in 0..atoms {
        groups[fibers.dim(i) - 1].extend(fibers.range(i));
    }
    let mut counts = [0usize; 3];
    let mut owner = Vec::with_capacity(n);
    let mut g = 0usize;
    for _ in 0..n {
        while counts[g] == groups[g].len() {
            g = (g + 1) % 3;
        }
        owner.push((g, counts[g]));
        counts[g] += 1;
        g = (g + 1) % 3;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements: Vec<Element<S>> = (0..n).map(|_| Element::zeros(&fibers)).collect();
    let mut atom_of = vec![0usize; fibers.total_dim()];
    for i in 0..fibers.len() {
        for c in fibers.range(i) {
            atom_of[c] = i;
        }
    }
    for (gi, coords) in groups.iter().enumerate() {
        if counts[gi] == 0 {
            continue;
        }
        let q = orthonormal_columns::<S>(coords.len(), counts[gi], &mut rng);
        for (k, &(og, col)) in owner.iter().enumerate() {
            if og != gi {
                continue;
            }
            for (row, &c) in coords.iter().enumerate() {
                let mu = space.weight(atom_of[c]);
                elements[k].as_flat_mut()[c] = q[(row, col)] * S::from_real(1.0 / mu.sqrt());
            }
        }
    }
    let null = fibers.range(atoms);
    for e in elements.iter_mut() {
        for c in null.clone() {
            e.as_flat_mut()[c] = S::sample_normal(&mut rng);
        }
    }
    System::new(space, fibers, elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_three() {
        let s = generate::<f64>(&SystemSpec::minimal(SystemKind::StandardBasis, 3)).unwrap();
        assert_eq!(s.space.len(), 3);
        let (ok, r) = s.validate(1e-12).unwrap();
        assert!(ok);
        assert_eq!(r.gram, DMatrix::identity(3, 3));
    }

    #[test]
    fn rademacher_two_sign_patterns() {
        let s = generate::<f64>(&SystemSpec::minimal(SystemKind::Rademacher, 2)).unwrap();
        assert_eq!(s.space.weights(), &[0.25; 4]);
        assert_eq!(s.phi(0).as_flat(), &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(s.phi(1).as_flat(), &[1.0, -1.0, 1.0, -1.0]);
        let (ok, r) = s.validate(1e-15).unwrap();
        assert!(ok);
        assert_eq!(r.max_identity_dev(), 0.0);
    }

    #[test]
    fn haar_first_functions() {
        let s = generate::<f64>(&SystemSpec::minimal(SystemKind::Haar, 4)).unwrap();
        assert_eq!(s.phi(0).as_flat(), &[1.0; 4]);
        assert_eq!(s.phi(1).as_flat(), &[1.0, 1.0, -1.0, -1.0]);
        let r2 = std::f64::consts::SQRT_2;
        assert_eq!(s.phi(2).as_flat(), &[r2, -r2, 0.0, 0.0]);
        assert_eq!(s.phi(3).as_flat(), &[0.0, 0.0, r2, -r2]);
    }

    #[test]
    fn random_qr_reference_case() {
        let spec = SystemSpec {
            kind: SystemKind::RandomQr,
            n_functions: 8,
            resolution: 16,
            fiber_dim: 2,
            seed: 42,
            field: Field::Real,
        };
        let s = generate::<f64>(&spec).unwrap();
        assert!(s.validate(1e-10).unwrap().0);
        let again = generate::<f64>(&spec).unwrap();
        for (a, b) in s.elements().iter().zip(again.elements()) {
            let ab: Vec<u64> = a.as_flat().iter().map(|x| x.to_bits()).collect();
            let bb: Vec<u64> = b.as_flat().iter().map(|x| x.to_bits()).collect();
            assert_eq!(ab, bb);
        }
    }

    #[test]
    fn complex_random_qr_is_orthonormal() {
        let spec = SystemSpec::minimal(SystemKind::RandomQr, 12)
            .with_resolution(5)
            .with_seed(9)
            .with_field(Field::Complex);
        let spec = SystemSpec { fiber_dim: 3, ..spec };
        let s = generate::<C64>(&spec).unwrap();
        assert!(s.validate(1e-10).unwrap().0);
    }

    #[test]
    fn tensor_vector_with_unit_fiber_is_haar() {
        let tv = generate::<f64>(&SystemSpec::minimal(SystemKind::TensorVector, 8)).unwrap();
        let h = generate::<f64>(&SystemSpec::minimal(SystemKind::Haar, 8)).unwrap();
        assert_eq!(tv.space, h.space);
        for (a, b) in tv.elements().iter().zip(h.elements()) {
            assert_eq!(a.as_flat(), b.as_flat());
        }
        let tv3 = generate::<f64>(&SystemSpec::minimal(SystemKind::TensorVector, 10).with_fiber_dim(3)).unwrap();
        assert!(tv3.validate(1e-12).unwrap().0);
        assert_eq!(tv3.fibers.dim(0), 3);
    }

    #[test]
    fn varying_dim_has_distinct_fibers_and_is_orthonormal() {
        let spec = SystemSpec::minimal(SystemKind::VaryingDim, 20)
            .with_resolution(12)
            .with_seed(5);
        let s = generate::<f64>(&spec).unwrap();
        assert!(s.fibers.distinct_dims_on(&s.space).len() >= 2);
        assert!(s.validate(1e-10).unwrap().0);
        // the null atom is populated
        let last = s.fibers.len() - 1;
        assert_eq!(s.space.weight(last), 0.0);
        assert!(s.phi(0).block(last).iter().any(|x| *x != 0.0));
    }

    #[test]
    fn spec_errors() {
        let r = SystemSpec::minimal(SystemKind::Rademacher, 3).with_resolution(4);
        assert!(generate::<f64>(&r).is_err());
        let h = SystemSpec::minimal(SystemKind::Haar, 3).with_resolution(6);
        assert!(generate::<f64>(&h).is_err());
        let q = SystemSpec::minimal(SystemKind::RandomQr, 9).with_resolution(4);
        assert!(generate::<f64>(&q).is_err());
        let z = SystemSpec::minimal(SystemKind::StandardBasis, 0);
        assert!(generate::<f64>(&z).is_err());
        let f = SystemSpec::minimal(SystemKind::Haar, 2).with_field(Field::Complex);
        assert!(generate::<f64>(&f).is_err());
    }
}
