//! Discrete direct integrals of Hilbert spaces.
//!
//! The measure space is a finite list of atoms with nonnegative masses and
//! each atom `x_i` carries a finite-dimensional fiber `H(x_i)` of dimension
//! `d_i`. An element of the direct integral stores one fiber vector per atom;
//! the inner product is `sum_i mu_i <f_i, g_i>`, conjugate-linear in the
//! second slot.
//!
//! Element storage is flat: the blocks of all atoms are laid out back to back
//! and located through the prefix offsets of the [`HilbertCollection`].

mod eigen;
pub mod io;

use crate::error::{Error, Result};
use crate::scalar::{fiber_norm_sq, Field, Scalar};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::sync::{Arc, OnceLock};

pub use eigen::{extremal_eigenvalues, EigenMethod, DENSE_EIGEN_LIMIT};

/// Absolute eigenvalue tolerance used when deciding whether Riesz bounds
/// equal one, applied to a Gram matrix scaled to unit diagonal.
pub const RIESZ_EIGEN_TOL: f64 = 1e-9;

/// A finite atomic measure space: atoms `0..M` with masses `mu_i >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct MeasureSpace {
    weights: Arc<[f64]>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    weights: Vec<f64>,
}

impl TryFrom<MeasureRepr> for MeasureSpace {
    type Error = Error;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        MeasureSpace::new(r.weights)
    }
}

impl From<MeasureSpace> for MeasureRepr {
    fn from(m: MeasureSpace) -> Self {
        MeasureRepr {
            weights: m.weights.to_vec(),
        }
    }
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Measure("no atoms".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Measure(format!(
                "weight of atom {i} is {} (must be finite and >= 0)",
                weights[i]
            )));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Measure("all weights are zero".into()));
        }
        Ok(Self {
            weights: weights.into(),
        })
    }

    /// Counting measure on `m` atoms.
    pub fn counting(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    /// Probability measure with mass `1/m` on each of `m` atoms.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sqrt(sum_i mu_i v_i^2)` for a pointwise profile `v`.
    pub fn l2_norm_of_profile(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights
            .iter()
            .zip(values)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Fiber dimensions `d_i = dim H(x_i)` and the common scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertCollection {
    dims: Arc<[usize]>,
    offsets: Arc<[usize]>,
    field: Field,
}

impl HilbertCollection {
    pub fn new(dims: Vec<usize>, field: Field) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Collection("no atoms".into()));
        }
        if let Some(i) = dims.iter().position(|d| *d == 0) {
            return Err(Error::Collection(format!("fiber at atom {i} has dimension 0")));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &dims {
            acc += d;
            offsets.push(acc);
        }
        Ok(Self {
            dims: dims.into(),
            offsets: offsets.into(),
            field,
        })
    }

    pub fn constant(atoms: usize, dim: usize, field: Field) -> Result<Self> {
        Self::new(vec![dim; atoms], field)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, atom: usize) -> usize {
        self.dims[atom]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `sum_i d_i`, the length of a flattened element.
    pub fn total_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    /// Position of atom `i`'s block inside a flattened element.
    #[inline]
    pub fn range(&self, atom: usize) -> Range<usize> {
        self.offsets[atom]..self.offsets[atom + 1]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Distinct fiber dimensions among atoms with positive mass.
    pub fn distinct_dims_on(&self, space: &MeasureSpace) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .dims
            .iter()
            .zip(space.weights())
            .filter(|(_, w)| **w > 0.0)
            .map(|(d, _)| *d)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub(crate) fn check_pair(space: &MeasureSpace, fibers: &HilbertCollection) -> Result<()> {
    if space.len() != fibers.len() {
        return Err(Error::AtomCount {
            expected: space.len(),
            found: fibers.len(),
        });
    }
    Ok(())
}

/// An element of the direct integral: one fiber vector per atom, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<S> {
    data: Vec<S>,
    offsets: Arc<[usize]>,
}

impl<S: Scalar> Element<S> {
    pub fn zeros(fibers: &HilbertCollection) -> Self {
        Self {
            data: vec![S::zero(); fibers.total_dim()],
            offsets: fibers.offsets.clone(),
        }
    }

    pub fn from_blocks(blocks: Vec<Vec<S>>, fibers: &HilbertCollection) -> Result<Self> {
        if blocks.len() != fibers.len() {
            return Err(Error::AtomCount {
                expected: fibers.len(),
                found: blocks.len(),
            });
        }
        let mut data = Vec::with_capacity(fibers.total_dim());
        for (i, b) in blocks.into_iter().enumerate() {
            if b.len() != fibers.dim(i) {
                return Err(Error::BlockShape {
                    atom: i,
                    expected: fibers.dim(i),
                    found: b.len(),
                });
            }
            data.extend(b);
        }
        Ok(Self {
            data,
            offsets: fibers.offsets.clone(),
        })
    }

    /// Wraps a flat buffer laid out by `fibers`.
    pub fn from_flat(data: Vec<S>, fibers: &HilbertCollection) -> Result<Self> {
        if data.len() != fibers.total_dim() {
            return Err(Error::Length {
                needed: fibers.total_dim(),
                have: data.len(),
            });
        }
        Ok(Self {
            data,
            offsets: fibers.offsets.clone(),
        })
    }

    pub fn atoms(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn block(&self, atom: usize) -> &[S] {
        &self.data[self.offsets[atom]..self.offsets[atom + 1]]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.offsets.windows(2).map(move |w| &self.data[w[0]..w[1]])
    }

    pub fn as_flat(&self) -> &[S] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: S, other: &Element<S>) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += c * *y;
        }
    }

    /// Checks that the block layout matches `fibers`, naming the first
    /// offending atom.
    pub fn conforms(&self, fibers: &HilbertCollection) -> Result<()> {
        if Arc::ptr_eq(&self.offsets, &fibers.offsets) {
            return Ok(());
        }
        if self.atoms() != fibers.len() {
            return Err(Error::AtomCount {
                expected: fibers.len(),
                found: self.atoms(),
            });
        }
        for i in 0..fibers.len() {
            let found = self.offsets[i + 1] - self.offsets[i];
            if found != fibers.dim(i) {
                return Err(Error::BlockShape {
                    atom: i,
                    expected: fibers.dim(i),
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn is_zero_on(&self, space: &MeasureSpace) -> bool {
        (0..self.atoms())
            .filter(|&i| space.weight(i) > 0.0)
            .all(|i| self.block(i).iter().all(|x| x.abs_sq() == 0.0))
    }
}

/// `sum_i mu_i <f_i, g_i>`, conjugating `g`.
pub fn inner_product<S: Scalar>(
    f: &Element<S>,
    g: &Element<S>,
    space: &MeasureSpace,
    fibers: &HilbertCollection,
) -> Result<S> {
    check_pair(space, fibers)?;
    f.conforms(fibers)?;
    g.conforms(fibers)?;
    Ok(inner_unchecked(f, g, space, fibers))
}

pub(crate) fn inner_unchecked<S: Scalar>(
    f: &Element<S>,
    g: &Element<S>,
    space: &MeasureSpace,
    fibers: &HilbertCollection,
) -> S {
    let mut acc = S::zero();
    for i in 0..fibers.len() {
        let w = space.weight(i);
        if w == 0.0 {
            continue;
        }
        let mut local = S::zero();
        for (x, y) in f.block(i).iter().zip(g.block(i)) {
            local += *x * y.conjugate();
        }
        acc += local * S::from_real(w);
    }
    acc
}

pub fn norm<S: Scalar>(f: &Element<S>, space: &MeasureSpace, fibers: &HilbertCollection) -> Result<f64> {
    check_pair(space, fibers)?;
    f.conforms(fibers)?;
    Ok(norm_unchecked(f, space, fibers))
}

pub(crate) fn norm_unchecked<S: Scalar>(f: &Element<S>, space: &MeasureSpace, fibers: &HilbertCollection) -> f64 {
    (0..fibers.len())
        .filter(|&i| space.weight(i) > 0.0)
        .map(|i| space.weight(i) * fiber_norm_sq(f.block(i)))
        .sum::<f64>()
        .sqrt()
}

/// An ordered finite system of elements over one `(X, mu, {H(x)})`.
///
/// Generators produce orthonormal systems; [`validate_ons`] certifies that.
/// The container is also used for Riesz (non-orthonormal) mixes.
#[derive(Debug, Clone)]
pub struct System<S> {
    pub space: MeasureSpace,
    pub fibers: HilbertCollection,
    elements: Vec<Element<S>>,
    incidence: OnceLock<Arc<Vec<Vec<usize>>>>,
}

pub type OrthonormalSystem<S> = System<S>;

impl<S: Scalar> System<S> {
    pub fn new(space: MeasureSpace, fibers: HilbertCollection, elements: Vec<Element<S>>) -> Result<Self> {
        check_pair(&space, &fibers)?;
        if fibers.field() != S::FIELD {
            return Err(Error::Collection(format!(
                "collection field {:?} does not match scalar type {:?}",
                fibers.field(),
                S::FIELD
            )));
        }
        if elements.is_empty() {
            return Err(Error::EmptySystem);
        }
        for e in &elements {
            e.conforms(&fibers)?;
        }
        Ok(Self {
            space,
            fibers,
            elements,
            incidence: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element<S>] {
        &self.elements
    }

    /// Zero-based access; `phi(0)` is the first function.
    pub fn phi(&self, n: usize) -> &Element<S> {
        &self.elements[n]
    }

    /// The first `n` functions, which form an orthonormal system whenever
    /// `self` does.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.len(),
            });
        }
        Ok(Self {
            space: self.space.clone(),
            fibers: self.fibers.clone(),
            elements: self.elements[..n].to_vec(),
            incidence: OnceLock::new(),
        })
    }

    pub fn into_elements(self) -> Vec<Element<S>> {
        self.elements
    }

    /// Per atom, the zero-based indices of functions with a nonzero block.
    /// Computed once and cached.
    pub fn incidence(&self) -> &[Vec<usize>] {
        self.incidence.get_or_init(|| {
            let mut out = vec![Vec::new(); self.fibers.len()];
            for (n, e) in self.elements.iter().enumerate() {
                for (i, list) in out.iter_mut().enumerate() {
                    if e.block(i).iter().any(|x| x.abs_sq() != 0.0) {
                        list.push(n);
                    }
                }
            }
            Arc::new(out)
        })
    }
}

/// Gram matrix of a system together with orthonormality diagnostics and the
/// extremal eigenvalues (Riesz bounds).
#[derive(Debug, Clone)]
pub struct GramReport<S: Scalar> {
    pub gram: DMatrix<S>,
    pub max_offdiag_abs: f64,
    pub max_diag_dev: f64,
    pub riesz_lower: f64,
    pub riesz_upper: f64,
    pub method: EigenMethod,
}

/// The serializable part of a [`GramReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSummary {
    pub size: usize,
    pub max_offdiag_abs: f64,
    pub max_diag_dev: f64,
    pub riesz_lower: f64,
    pub riesz_upper: f64,
    pub method: EigenMethod,
}

impl<S: Scalar> GramReport<S> {
    /// `max |G - I|` over all entries.
    pub fn max_identity_dev(&self) -> f64 {
        self.max_offdiag_abs.max(self.max_diag_dev)
    }

    /// Whether the spectrum of the unit-diagonal rescaling of `G` lies in
    /// `[1 - tol, 1 + tol]` and the diagonal itself is within `tol` of one.
    pub fn riesz_is_unit(&self, tol: f64) -> bool {
        if self.max_diag_dev > tol {
            return false;
        }
        let n = self.gram.nrows();
        let scale: Vec<f64> = (0..n).map(|i| 1.0 / self.gram[(i, i)].real().sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| self.gram[(i, j)] * S::from_real(scale[i] * scale[j]));
        let (lo, hi, _) = extremal_eigenvalues(&scaled);
        (lo - 1.0).abs() <= tol && (hi - 1.0).abs() <= tol
    }

    pub fn summary(&self) -> GramSummary {
        GramSummary {
            size: self.gram.nrows(),
            max_offdiag_abs: self.max_offdiag_abs,
            max_diag_dev: self.max_diag_dev,
            riesz_lower: self.riesz_lower,
            riesz_upper: self.riesz_upper,
            method: self.method,
        }
    }
}

/// Weighted coordinate matrix `W` with `W[(c, n)] = sqrt(mu_atom(c)) phi_n[c]`.
fn weighted_coordinates<S: Scalar>(
    elements: &[Element<S>],
    space: &MeasureSpace,
    fibers: &HilbertCollection,
) -> DMatrix<S> {
    let rows = fibers.total_dim();
    let mut w = DMatrix::<S>::zeros(rows, elements.len());
    for (n, e) in elements.iter().enumerate() {
        for i in 0..fibers.len() {
            let mu = space.weight(i);
            if mu == 0.0 {
                continue;
            }
            let s = S::from_real(mu.sqrt());
            for c in fibers.range(i) {
                w[(c, n)] = e.as_flat()[c] * s;
            }
        }
    }
    w
}

/// `gram[m][n] = <phi_m, phi_n>`; Riesz bounds from a dense Hermitian
/// eigendecomposition up to [`DENSE_EIGEN_LIMIT`] functions and from a
/// Lanczos iteration above it.
pub fn gram_matrix<S: Scalar>(
    elements: &[Element<S>],
    space: &MeasureSpace,
    fibers: &HilbertCollection,
) -> Result<GramReport<S>> {
    check_pair(space, fibers)?;
    if elements.is_empty() {
        return Err(Error::EmptySystem);
    }
    for e in elements {
        e.conforms(fibers)?;
    }
    let w = weighted_coordinates(elements, space, fibers);
    // <phi_m, phi_n> = sum_c W[c,m] conj(W[c,n])
    let raw = w.tr_mul(&w.conjugate());
    let n = elements.len();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            S::from_real(raw[(i, i)].real())
        } else {
            (raw[(i, j)] + raw[(j, i)].conjugate()) * S::from_real(0.5)
        }
    });
    let mut max_offdiag_abs = 0.0f64;
    let mut max_diag_dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                max_diag_dev = max_diag_dev.max((gram[(i, i)].real() - 1.0).abs());
            } else {
                max_offdiag_abs = max_offdiag_abs.max(gram[(i, j)].modulus());
            }
        }
    }
    let (riesz_lower, riesz_upper, method) = extremal_eigenvalues(&gram);
    Ok(GramReport {
        gram,
        max_offdiag_abs,
        max_diag_dev,
        riesz_lower,
        riesz_upper,
        method,
    })
}

/// True iff `max |gram[m][n] - delta_mn| <= tol`. The report is returned
/// either way.
pub fn validate_ons<S: Scalar>(
    elements: &[Element<S>],
    space: &MeasureSpace,
    fibers: &HilbertCollection,
    tol: f64,
) -> Result<(bool, GramReport<S>)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let report = gram_matrix(elements, space, fibers)?;
    Ok((report.max_identity_dev() <= tol, report))
}

impl<S: Scalar> System<S> {
    pub fn gram(&self) -> Result<GramReport<S>> {
        gram_matrix(&self.elements, &self.space, &self.fibers)
    }

    pub fn validate(&self, tol: f64) -> Result<(bool, GramReport<S>)> {
        validate_ons(&self.elements, &self.space, &self.fibers, tol)
    }

    /// `sum_n b_n phi_n` over the first `b.len()` functions.
    pub fn combine(&self, b: &[S]) -> Result<Element<S>> {
        if b.len() > self.len() {
            return Err(Error::Length {
                needed: b.len(),
                have: self.len(),
            });
        }
        let mut acc = Element::zeros(&self.fibers);
        for (c, e) in b.iter().zip(&self.elements) {
            acc.axpy(*c, e);
        }
        Ok(acc)
    }

    pub fn inner(&self, f: &Element<S>, g: &Element<S>) -> Result<S> {
        inner_product(f, g, &self.space, &self.fibers)
    }

    pub fn norm_of(&self, f: &Element<S>) -> Result<f64> {
        norm(f, &self.space, &self.fibers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C64;

    fn two_atoms() -> (MeasureSpace, HilbertCollection) {
        (
            MeasureSpace::counting(2).unwrap(),
            HilbertCollection::constant(2, 1, Field::Real).unwrap(),
        )
    }

    #[test]
    fn zero_element_has_zero_inner_product_and_norm() {
        let (x, h) = two_atoms();
        let z = Element::<f64>::zeros(&h);
        assert_eq!(inner_product(&z, &z, &x, &h).unwrap(), 0.0);
        assert_eq!(norm(&z, &x, &h).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let (x, h) = two_atoms();
        let f = Element::from_blocks(vec![vec![3.0], vec![0.0]], &h).unwrap();
        let g = Element::from_blocks(vec![vec![0.0], vec![4.0]], &h).unwrap();
        assert_eq!(inner_product(&f, &g, &x, &h).unwrap(), 0.0);
    }

    #[test]
    fn weighted_varying_dim_inner_product() {
        let x = MeasureSpace::new(vec![2.0, 0.5]).unwrap();
        let h = HilbertCollection::new(vec![1, 2], Field::Real).unwrap();
        let f = Element::from_blocks(vec![vec![1.0], vec![2.0, 0.0]], &h).unwrap();
        let g = Element::from_blocks(vec![vec![1.0], vec![0.0, 2.0]], &h).unwrap();
        assert_eq!(inner_product(&f, &g, &x, &h).unwrap(), 2.0);
    }

    #[test]
    fn norms_by_hand() {
        let (x, h) = two_atoms();
        let f = Element::from_blocks(vec![vec![3.0], vec![4.0]], &h).unwrap();
        assert_eq!(norm(&f, &x, &h).unwrap(), 5.0);

        let x1 = MeasureSpace::new(vec![4.0]).unwrap();
        let h1 = HilbertCollection::constant(1, 1, Field::Real).unwrap();
        let e = Element::from_blocks(vec![vec![1.0]], &h1).unwrap();
        assert_eq!(norm(&e, &x1, &h1).unwrap(), 2.0);
    }

    #[test]
    fn shape_mismatch_names_atom() {
        let h = HilbertCollection::new(vec![1, 2, 1], Field::Real).unwrap();
        let err = Element::from_blocks(vec![vec![1.0], vec![1.0], vec![1.0]], &h).unwrap_err();
        assert!(matches!(
            err,
            Error::BlockShape {
                atom: 1,
                expected: 2,
                found: 1
            }
        ));

        let other = HilbertCollection::new(vec![1, 1, 2], Field::Real).unwrap();
        let x = MeasureSpace::counting(3).unwrap();
        let f = Element::<f64>::zeros(&other);
        let err = inner_product(&f, &f, &x, &h).unwrap_err();
        assert!(matches!(err, Error::BlockShape { atom: 1, .. }), "{err}");
    }

    #[test]
    fn zero_weight_atoms_are_ignored_by_norm() {
        let x = MeasureSpace::new(vec![1.0, 0.0]).unwrap();
        let h = HilbertCollection::constant(2, 1, Field::Real).unwrap();
        let f = Element::from_blocks(vec![vec![0.0], vec![7.0]], &h).unwrap();
        assert_eq!(norm(&f, &x, &h).unwrap(), 0.0);
        assert!(f.is_zero_on(&x));
    }

    #[test]
    fn measure_space_rejects_bad_weights() {
        assert!(MeasureSpace::new(vec![]).is_err());
        assert!(MeasureSpace::new(vec![0.0, 0.0]).is_err());
        assert!(MeasureSpace::new(vec![1.0, -0.1]).is_err());
        assert!(MeasureSpace::new(vec![f64::NAN]).is_err());
        assert!(HilbertCollection::new(vec![1, 0], Field::Real).is_err());
    }

    #[test]
    fn complex_inner_product_conjugates_second_slot() {
        let x = MeasureSpace::counting(1).unwrap();
        let h = HilbertCollection::constant(1, 1, Field::Complex).unwrap();
        let i = C64::new(0.0, 1.0);
        let f = Element::from_blocks(vec![vec![i]], &h).unwrap();
        let one = Element::from_blocks(vec![vec![C64::new(1.0, 0.0)]], &h).unwrap();
        assert_eq!(inner_product(&f, &one, &x, &h).unwrap(), i);
        assert_eq!(inner_product(&one, &f, &x, &h).unwrap(), -i);
    }

    #[test]
    fn gram_standard_basis_is_identity() {
        let x = MeasureSpace::counting(3).unwrap();
        let h = HilbertCollection::constant(3, 1, Field::Real).unwrap();
        let es: Vec<_> = (0..3)
            .map(|n| {
                let mut e = Element::<f64>::zeros(&h);
                e.as_flat_mut()[n] = 1.0;
                e
            })
            .collect();
        let (ok, r) = validate_ons(&es, &x, &h, 1e-12).unwrap();
        assert!(ok);
        assert_eq!(r.gram, DMatrix::identity(3, 3));
        assert_eq!((r.riesz_lower, r.riesz_upper), (1.0, 1.0));
        assert!(r.riesz_is_unit(RIESZ_EIGEN_TOL));
    }

    #[test]
    fn gram_scaled_unit_vector() {
        let x = MeasureSpace::counting(1).unwrap();
        let h = HilbertCollection::constant(1, 1, Field::Real).unwrap();
        let e = Element::from_blocks(vec![vec![2.0]], &h).unwrap();
        let r = gram_matrix(&[e], &x, &h).unwrap();
        assert_eq!(r.gram[(0, 0)], 4.0);
        assert_eq!((r.riesz_lower, r.riesz_upper), (4.0, 4.0));
    }

    #[test]
    fn gram_of_tilted_pair() {
        let (x, h) = two_atoms();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p1 = Element::from_blocks(vec![vec![1.0], vec![0.0]], &h).unwrap();
        let p2 = Element::from_blocks(vec![vec![s], vec![s]], &h).unwrap();
        let (ok, r) = validate_ons(&[p1, p2], &x, &h, 1e-12).unwrap();
        assert!(!ok);
        assert!((r.gram[(0, 1)] - s).abs() < 1e-15);
        assert!((r.max_offdiag_abs - s).abs() < 1e-15);
        assert!((r.riesz_lower - (1.0 - s)).abs() < 1e-12);
        assert!((r.riesz_upper - (1.0 + s)).abs() < 1e-12);
        assert!(!r.riesz_is_unit(RIESZ_EIGEN_TOL));
    }

    #[test]
    fn empty_system_and_bad_tolerance_rejected() {
        let (x, h) = two_atoms();
        assert!(matches!(gram_matrix::<f64>(&[], &x, &h), Err(Error::EmptySystem)));
        let e = Element::<f64>::zeros(&h);
        assert!(validate_ons(&[e], &x, &h, 0.0).is_err());
    }
}
