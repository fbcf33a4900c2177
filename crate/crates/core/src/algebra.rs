//! Multi-matrix algebras `⊕ᵢ M_{nᵢ}(ℂ)`.
//!
//! Every finite-dimensional C*-algebra is of this form. Closed two-sided
//! ideals are sums of blocks, so an [`Ideal`] is a set of block indices and
//! always has a unit (the sum of the identities on its blocks). Tracial
//! states are weight vectors `w` with `τ(a) = Σᵢ wᵢ·Tr(aᵢ)`.
//!
//! Linear coordinates of an element list the blocks in order, each block
//! flattened row-major; the coordinate vectors are the matrix units
//! `E^{(b)}_{ij}`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, CVector, PsdCertificate, C64, ONE, ZERO};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockShape {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for BlockShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        BlockShape::new(dims)
    }
}

impl From<BlockShape> for Vec<usize> {
    fn from(s: BlockShape) -> Self {
        s.dims
    }
}

impl BlockShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if let Some(b) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {b} has dimension 0")));
        }
        Ok(BlockShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// `Σ nᵢ`, the dimension of the defining representation.
    pub fn fiber_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `Σ nᵢ²`, the linear dimension of the algebra.
    pub fn linear_dim(&self) -> usize {
        self.dims.iter().map(|n| n * n).sum()
    }

    pub fn coord_offset(&self, block: usize) -> usize {
        self.dims[..block].iter().map(|n| n * n).sum()
    }

    pub fn fiber_offset(&self, block: usize) -> usize {
        self.dims[..block].iter().sum()
    }

    /// Coordinate index of the matrix unit `E^{(block)}_{ij}`.
    pub fn coord_index(&self, block: usize, i: usize, j: usize) -> usize {
        self.coord_offset(block) + i * self.dims[block] + j
    }

    /// Inverse of [`coord_index`](Self::coord_index).
    pub fn coord_label(&self, mut k: usize) -> (usize, usize, usize) {
        for (b, &n) in self.dims.iter().enumerate() {
            if k < n * n {
                return (b, k / n, k % n);
            }
            k -= n * n;
        }
        panic!("coordinate index out of range");
    }

    fn check(&self, other: &BlockShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: BlockShape,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn from_blocks(shape: &BlockShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::Dimension(format!(
                "expected {} blocks, found {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (b, m) in blocks.iter().enumerate() {
            let n = shape.dim(b);
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "block {b} must be {n}x{n}, found {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(AlgebraElement {
            shape: shape.clone(),
            blocks,
        })
    }

    pub fn zero(shape: &BlockShape) -> Self {
        AlgebraElement {
            shape: shape.clone(),
            blocks: shape.dims.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn identity(shape: &BlockShape) -> Self {
        AlgebraElement {
            shape: shape.clone(),
            blocks: shape.dims.iter().map(|&n| CMatrix::identity(n, n)).collect(),
        }
    }

    /// Central element `Σ_b c_b·1_b`.
    pub fn central(shape: &BlockShape, scalars: &[C64]) -> Result<Self> {
        if scalars.len() != shape.num_blocks() {
            return Err(Error::Dimension(format!(
                "expected {} block scalars, found {}",
                shape.num_blocks(),
                scalars.len()
            )));
        }
        Ok(AlgebraElement {
            shape: shape.clone(),
            blocks: shape
                .dims
                .iter()
                .zip(scalars)
                .map(|(&n, &c)| CMatrix::identity(n, n) * c)
                .collect(),
        })
    }

    pub fn matrix_unit(shape: &BlockShape, block: usize, i: usize, j: usize) -> Self {
        let mut e = Self::zero(shape);
        e.blocks[block][(i, j)] = ONE;
        e
    }

    /// All matrix units, in coordinate order.
    pub fn matrix_units(shape: &BlockShape) -> Vec<Self> {
        (0..shape.linear_dim())
            .map(|k| {
                let (b, i, j) = shape.coord_label(k);
                Self::matrix_unit(shape, b, i, j)
            })
            .collect()
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMatrix {
        &self.blocks[b]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut CMatrix {
        &mut self.blocks[b]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        Ok(self.zip_blocks(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        Ok(self.zip_blocks(other, |a, b| a - b))
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::op_norm)
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = 1.0 + self.max_abs();
        self.blocks
            .iter()
            .all(|b| linalg::hermitian_deviation(b) <= tol * scale)
    }

    /// Positivity with the minimal block eigenvalue as certificate.
    ///
    /// Passes iff every block is hermitian and has spectrum `≥ −tol·(1+‖a‖)`.
    pub fn is_positive(&self, tol: f64) -> PsdCertificate {
        let scale = 1.0 + self.operator_norm();
        let herm = self
            .blocks
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max);
        let min = self
            .blocks
            .iter()
            .map(linalg::min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        PsdCertificate {
            pass: herm <= tol * scale && min >= -tol * scale,
            min_eigenvalue: min,
            hermitian_deviation: herm,
            tolerance: tol,
        }
    }

    /// Per-block scalars of a central element.
    pub fn center_component(&self, tol: f64) -> Result<Vec<C64>> {
        let scale = 1.0 + self.max_abs();
        let mut out = Vec::with_capacity(self.blocks.len());
        for (b, m) in self.blocks.iter().enumerate() {
            let n = m.nrows();
            let c = m.trace() / n as f64;
            let dev = linalg::max_abs_diff(m, &(CMatrix::identity(n, n) * c));
            if dev > tol * scale {
                return Err(Error::NotCentral { block: b, deviation: dev });
            }
            out.push(c);
        }
        Ok(out)
    }

    /// Blocks whose entries exceed `tol` in absolute value.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&b| linalg::max_abs(&self.blocks[b]) > tol)
            .collect()
    }

    pub fn to_coords(&self) -> CVector {
        let mut v = CVector::zeros(self.shape.linear_dim());
        let mut k = 0;
        for m in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v[k] = m[(i, j)];
                    k += 1;
                }
            }
        }
        v
    }

    pub fn from_coords(shape: &BlockShape, v: &CVector) -> Result<Self> {
        if v.len() != shape.linear_dim() {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, found {}",
                shape.linear_dim(),
                v.len()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut k = 0;
        for &n in &shape.dims {
            blocks.push(CMatrix::from_fn(n, n, |i, j| v[k + i * n + j]));
            k += n * n;
        }
        Ok(AlgebraElement {
            shape: shape.clone(),
            blocks,
        })
    }

    /// The defining block-diagonal representation on `ℂ^{Σnᵢ}`.
    pub fn represent(&self) -> CMatrix {
        linalg::block_diag(&self.blocks)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    /// Panics on shape mismatch; see [`AlgebraElement::try_add`].
    fn add(self, rhs: Self) -> AlgebraElement {
        self.try_add(rhs).expect("shape mismatch in addition")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.try_sub(rhs).expect("shape mismatch in subtraction")
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        self.multiply(rhs).expect("shape mismatch in multiplication")
    }
}

/// A closed two-sided ideal: the blocks in `support`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    shape: BlockShape,
    support: Vec<usize>,
}

impl Ideal {
    pub fn new(shape: &BlockShape, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&b) = support.iter().find(|&&b| b >= shape.num_blocks()) {
            return Err(Error::InvalidShape(format!(
                "ideal block {b} out of range for {} blocks",
                shape.num_blocks()
            )));
        }
        Ok(Ideal {
            shape: shape.clone(),
            support,
        })
    }

    pub fn whole(shape: &BlockShape) -> Self {
        Ideal {
            shape: shape.clone(),
            support: (0..shape.num_blocks()).collect(),
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains_block(&self, b: usize) -> bool {
        self.support.binary_search(&b).is_ok()
    }

    /// The ideal unit `1_S`.
    pub fn unit(&self) -> AlgebraElement {
        let scalars: Vec<C64> = (0..self.shape.num_blocks())
            .map(|b| if self.contains_block(b) { ONE } else { ZERO })
            .collect();
        AlgebraElement::central(&self.shape, &scalars).expect("shape consistent")
    }

    /// Blocks off the support on which `a` does not vanish within `tol`.
    pub fn violations(&self, a: &AlgebraElement, tol: f64) -> Vec<usize> {
        a.support(tol)
            .into_iter()
            .filter(|b| !self.contains_block(*b))
            .collect()
    }

    pub fn contains(&self, a: &AlgebraElement, tol: f64) -> bool {
        self.violations(a, tol).is_empty()
    }

    /// `1_S·a`.
    pub fn cut(&self, a: &AlgebraElement) -> AlgebraElement {
        let mut out = a.clone();
        for b in 0..out.blocks.len() {
            if !self.contains_block(b) {
                out.blocks[b].fill(ZERO);
            }
        }
        out
    }

    pub fn matrix_units(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::new();
        for &b in &self.support {
            let n = self.shape.dim(b);
            for i in 0..n {
                for j in 0..n {
                    out.push(AlgebraElement::matrix_unit(&self.shape, b, i, j));
                }
            }
        }
        out
    }

    pub fn linear_dim(&self) -> usize {
        self.support.iter().map(|&b| self.shape.dim(b).pow(2)).sum()
    }
}

/// Tracial state `τ(a) = Σᵢ wᵢ·Tr(aᵢ)` with `Σᵢ wᵢ·nᵢ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracialState {
    weights: Vec<f64>,
}

impl TracialState {
    pub fn new(shape: &BlockShape, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != shape.num_blocks() {
            return Err(Error::InvalidTrace(format!(
                "expected {} weights, found {}",
                shape.num_blocks(),
                weights.len()
            )));
        }
        if let Some(b) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidTrace(format!("weight {b} is negative or not finite")));
        }
        let total: f64 = weights.iter().zip(shape.dims()).map(|(w, &n)| w * n as f64).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTrace(format!(
                "weights are not normalized: sum w_i n_i = {total}"
            )));
        }
        Ok(TracialState { weights })
    }

    /// Rescales nonnegative weights so that `τ(1) = 1`.
    pub fn normalized(shape: &BlockShape, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().zip(shape.dims()).map(|(w, &n)| w * n as f64).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidTrace("weights sum to zero".into()));
        }
        Self::new(shape, weights.into_iter().map(|w| w / total).collect())
    }

    /// `Tr/N` on the defining representation.
    pub fn uniform(shape: &BlockShape) -> Self {
        let n = shape.fiber_dim() as f64;
        TracialState {
            weights: vec![1.0 / n; shape.num_blocks()],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, b: usize) -> f64 {
        self.weights[b]
    }

    pub fn is_faithful(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    pub fn evaluate(&self, a: &AlgebraElement) -> Result<C64> {
        if a.shape.num_blocks() != self.weights.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![self.weights.len()],
                found: vec![a.shape.num_blocks()],
            });
        }
        Ok(self.eval_unchecked(a))
    }

    pub(crate) fn eval_unchecked(&self, a: &AlgebraElement) -> C64 {
        a.blocks
            .iter()
            .zip(&self.weights)
            .map(|(m, &w)| m.trace() * w)
            .sum()
    }

    /// `‖a‖₂,τ = τ(a*a)^{1/2}`.
    pub fn two_norm(&self, a: &AlgebraElement) -> f64 {
        a.blocks
            .iter()
            .zip(&self.weights)
            .map(|(m, &w)| w * m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, real, DEFAULT_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_element(rng: &mut ChaCha8Rng, shape: &BlockShape) -> AlgebraElement {
        let blocks = shape.dims().iter().map(|&n| random_matrix(rng, n, n)).collect();
        AlgebraElement::from_blocks(shape, blocks).unwrap()
    }

    fn shape(d: &[usize]) -> BlockShape {
        BlockShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn zero_dimensional_blocks_are_rejected() {
        assert!(BlockShape::new(vec![]).is_err());
        assert!(BlockShape::new(vec![2, 0]).is_err());
    }

    #[test]
    fn unit_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = shape(&[2, 3]);
        let a = random_element(&mut rng, &s);
        let one = AlgebraElement::identity(&s);
        assert!((&one * &a).max_abs_diff(&a) < 1e-15);
        assert!((&a * &one).max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn scalar_blocks_multiply() {
        let s = shape(&[1, 1]);
        let c = C64::new(0.3, -1.2);
        let d = C64::new(2.0, 0.5);
        let x = AlgebraElement::central(&s, &[ZERO, c]).unwrap();
        let y = AlgebraElement::central(&s, &[ZERO, d]).unwrap();
        let xy = &x * &y;
        assert_eq!(xy.block(0)[(0, 0)], ZERO);
        assert!((xy.block(1)[(0, 0)] - c * d).norm() < 1e-15);
    }

    #[test]
    fn multiplication_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = shape(&[2, 3]);
        let (a, b, c) = (
            random_element(&mut rng, &s),
            random_element(&mut rng, &s),
            random_element(&mut rng, &s),
        );
        assert!((&(&a * &b) * &c).max_abs_diff(&(&a * &(&b * &c))) < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = AlgebraElement::identity(&shape(&[2]));
        let b = AlgebraElement::identity(&shape(&[1, 1]));
        assert!(matches!(a.multiply(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn adjoint_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = shape(&[2, 1]);
        let a = random_element(&mut rng, &s);
        let b = random_element(&mut rng, &s);
        assert!(a.adjoint().adjoint().max_abs_diff(&a) == 0.0);
        assert!((&a * &b).adjoint().max_abs_diff(&(&b.adjoint() * &a.adjoint())) < 1e-12);
        let h = &a + &a.adjoint();
        assert!(h.adjoint().max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn operator_norm_examples() {
        let s = shape(&[2, 2]);
        assert!((AlgebraElement::identity(&s).operator_norm() - 1.0).abs() < 1e-14);
        let c = C64::new(3.0, 4.0);
        let x = AlgebraElement::central(&shape(&[1, 1]), &[ZERO, c]).unwrap();
        assert!((x.operator_norm() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn c_star_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = shape(&[3, 1, 2]);
        for _ in 0..20 {
            let a = random_element(&mut rng, &s);
            let n = a.operator_norm();
            let lhs = (&a.adjoint() * &a).operator_norm();
            assert!((lhs - n * n).abs() <= 1e-9 * n * n);
        }
    }

    #[test]
    fn trace_examples() {
        let s = shape(&[1, 1]);
        let tau = TracialState::new(&s, vec![0.5, 0.5]).unwrap();
        assert!((tau.evaluate(&AlgebraElement::identity(&s)).unwrap() - ONE).norm() < 1e-15);
        let e2 = AlgebraElement::central(&s, &[ZERO, ONE]).unwrap();
        assert!((tau.evaluate(&e2).unwrap() - real(0.5)).norm() < 1e-15);
    }

    #[test]
    fn trace_is_tracial_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = shape(&[2, 3]);
        let tau = TracialState::normalized(&s, vec![0.7, 0.2]).unwrap();
        for _ in 0..10 {
            let a = random_element(&mut rng, &s);
            let b = random_element(&mut rng, &s);
            let d = tau.evaluate(&(&a * &b)).unwrap() - tau.evaluate(&(&b * &a)).unwrap();
            assert!(d.norm() < 1e-12);
            let p = tau.evaluate(&(&a.adjoint() * &a)).unwrap();
            assert!(p.re >= 0.0 && p.im.abs() < 1e-12);
            assert!((p.re.sqrt() - tau.two_norm(&a)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_normalization_is_enforced() {
        let s = shape(&[1, 2]);
        assert!(TracialState::new(&s, vec![0.5, 0.5]).is_err());
        assert!(TracialState::new(&s, vec![-1.0, 1.0]).is_err());
        let t = TracialState::new(&s, vec![0.0, 0.5]).unwrap();
        assert!(!t.is_faithful());
        assert!(TracialState::uniform(&s).is_faithful());
    }

    #[test]
    fn positivity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = shape(&[2, 3]);
        let b = random_element(&mut rng, &s);
        assert!((&b.adjoint() * &b).is_positive(DEFAULT_TOL).pass);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        let cert = AlgebraElement::from_blocks(&shape(&[2]), vec![d])
            .unwrap()
            .is_positive(DEFAULT_TOL);
        assert!(!cert.pass);
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-14);

        let x = AlgebraElement::central(&shape(&[1, 1]), &[ZERO, real(-0.5)]).unwrap();
        let cert = x.is_positive(DEFAULT_TOL);
        assert!(!cert.pass);
        assert!((cert.min_eigenvalue + 0.5).abs() < 1e-14);
    }

    #[test]
    fn center_components() {
        let s = shape(&[2, 1, 3]);
        let one = AlgebraElement::identity(&s).center_component(DEFAULT_TOL).unwrap();
        assert!(one.iter().all(|c| (*c - ONE).norm() < 1e-15));

        let ideal = Ideal::new(&s, vec![0, 2]).unwrap();
        let ind = ideal.unit().center_component(DEFAULT_TOL).unwrap();
        assert_eq!(ind, vec![ONE, ZERO, ONE]);

        let mut a = AlgebraElement::identity(&s);
        a.block_mut(0)[(0, 1)] = real(0.3);
        assert!(matches!(
            a.center_component(DEFAULT_TOL),
            Err(Error::NotCentral { block: 0, .. })
        ));
    }

    #[test]
    fn ideal_units_are_central_idempotents() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = shape(&[2, 1, 2]);
        let ideal = Ideal::new(&s, vec![1, 2]).unwrap();
        let u = ideal.unit();
        assert!((&u * &u).max_abs_diff(&u) == 0.0);
        for _ in 0..5 {
            let a = random_element(&mut rng, &s);
            assert!((&u * &a).max_abs_diff(&(&a * &u)) < 1e-15);
            let x = ideal.cut(&random_element(&mut rng, &s));
            assert!(ideal.contains(&(&a * &x), 0.0));
            assert!(ideal.contains(&(&x * &a), 0.0));
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = shape(&[2, 1, 3]);
        let a = random_element(&mut rng, &s);
        let back = AlgebraElement::from_coords(&s, &a.to_coords()).unwrap();
        assert_eq!(a, back);
        for k in 0..s.linear_dim() {
            let (b, i, j) = s.coord_label(k);
            assert_eq!(s.coord_index(b, i, j), k);
        }
    }
}
