//! GNS spaces of tracial algebras, induced operators and the certifications
//! consumed by the Haagerup machinery: unitality, τ-decreasing and complete
//! positivity.
//!
//! Everything is done in the linear coordinates of the underlying algebra
//! (matrix units for `A`, `E_ij δ_g` for `A ⋊ G`). With the Gram matrix
//! `G_kl = τ(e_k* e_l) = L L*`, the columns of `L^{-*}` are an orthonormal
//! basis of the GNS space and a linear map with coordinate matrix `M`
//! induces the operator `L* M L^{-*}`.

use nalgebra::Cholesky;
use serde::Serialize;

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::crossed_product::{BaseRepresentation, CrossedElement, CrossedProduct, InducedTrace, RegularRepresentation};
use crate::linalg::{self, CMatrix, CVector, PsdCertificate, C64};
use crate::{Error, Result};

/// Linear map on a finite-dimensional algebra, stored by its matrix in
/// linear coordinates (column `k` is the image of basis element `k`).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: CMatrix,
}

impl LinearMap {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "linear map must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LinearMap { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        LinearMap {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        LinearMap {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn on_algebra(shape: &BlockShape, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> Self {
        let units = AlgebraElement::matrix_units(shape);
        let n = units.len();
        let mut matrix = CMatrix::zeros(n, n);
        for (k, e) in units.iter().enumerate() {
            matrix.set_column(k, &f(e).to_coords());
        }
        LinearMap { matrix }
    }

    pub fn on_crossed(cp: &CrossedProduct, f: impl Fn(&CrossedElement) -> CrossedElement) -> Self {
        let n = cp.dim();
        let mut matrix = CMatrix::zeros(n, n);
        for k in 0..n {
            matrix.set_column(k, &cp.to_coords(&f(&cp.basis_element(k))));
        }
        LinearMap { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        &self.matrix * x
    }

    pub fn apply_algebra(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_coords(a.shape(), &self.apply(&a.to_coords()))
            .expect("coordinate length matches shape")
    }

    pub fn apply_crossed(&self, cp: &CrossedProduct, x: &CrossedElement) -> CrossedElement {
        cp.from_coords(&self.apply(&cp.to_coords(x)))
            .expect("coordinate length matches crossed product")
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * &inner.matrix,
        }
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale(&self, c: f64) -> LinearMap {
        LinearMap {
            matrix: self.matrix.scale(c),
        }
    }

    /// `max |φ(1) − 1|` in coordinates.
    pub fn unital_deviation(&self, space: &GnsSpace) -> f64 {
        linalg::max_abs_vec(&(self.apply(space.unit()) - space.unit()))
    }

    /// `max |φ(e_k*) − φ(e_k)*|` over the basis.
    pub fn hermitian_preserving_deviation(&self, space: &GnsSpace) -> f64 {
        let mut dev: f64 = 0.0;
        for k in 0..self.dim() {
            let e = basis_vector(self.dim(), k);
            let lhs = self.apply(&space.adjoint_coords(&e));
            let rhs = space.adjoint_coords(&self.apply(&e));
            dev = dev.max(linalg::max_abs_vec(&(lhs - rhs)));
        }
        dev
    }
}

fn basis_vector(n: usize, k: usize) -> CVector {
    let mut e = CVector::zeros(n);
    e[k] = linalg::ONE;
    e
}

/// `L²(B, τ)` for a finite-dimensional algebra `B` with faithful trace,
/// together with a faithful unital representation of `B` used for
/// positivity tests.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    gram: CMatrix,
    l_adj: CMatrix,
    l_inv_adj: CMatrix,
    trace: CVector,
    unit: CVector,
    involution: CMatrix,
    rep_basis: Vec<CMatrix>,
    orthonormality_deviation: f64,
}

impl GnsSpace {
    /// `L²(A, τ)` with the defining block-diagonal representation.
    pub fn algebra(shape: &BlockShape, trace: &TracialState) -> Result<Self> {
        if !trace.is_faithful() {
            return Err(Error::NotFaithful);
        }
        let units = AlgebraElement::matrix_units(shape);
        let n = units.len();
        let mut gram = CMatrix::zeros(n, n);
        let mut involution = CMatrix::zeros(n, n);
        for (k, ek) in units.iter().enumerate() {
            let ek_adj = ek.adjoint();
            involution.set_column(k, &ek_adj.to_coords());
            for (l, el) in units.iter().enumerate() {
                gram[(k, l)] = trace.eval_unchecked(&(&ek_adj * el));
            }
        }
        let tr = CVector::from_iterator(n, units.iter().map(|e| trace.eval_unchecked(e)));
        let unit = AlgebraElement::identity(shape).to_coords();
        let rep_basis = units.iter().map(|e| e.represent()).collect();
        Self::assemble(gram, tr, unit, involution, rep_basis)
    }

    /// `L²(A ⋊ G, τ̃)` with the regular representation compressed to the
    /// range of `Λ(1)`, which makes it unital and keeps it faithful.
    pub fn crossed(cp: &CrossedProduct, trace: &InducedTrace) -> Result<Self> {
        let n = cp.dim();
        let basis: Vec<CrossedElement> = (0..n).map(|k| cp.basis_element(k)).collect();
        let mut gram = CMatrix::zeros(n, n);
        let mut involution = CMatrix::zeros(n, n);
        for (k, ek) in basis.iter().enumerate() {
            let ek_adj = cp.adjoint(ek);
            involution.set_column(k, &cp.to_coords(&ek_adj));
            for (l, el) in basis.iter().enumerate() {
                gram[(k, l)] = trace.evaluate(&cp.multiply(&ek_adj, el));
            }
        }
        let tr = CVector::from_iterator(n, basis.iter().map(|e| trace.evaluate(e)));
        let unit = cp.to_coords(&cp.unit());
        let rep = RegularRepresentation::build(cp, BaseRepresentation::defining());
        let range = linalg::range_basis(&rep.integrated(&cp.unit()), 0.5);
        let rep_basis = basis
            .iter()
            .map(|e| range.adjoint() * rep.integrated(e) * &range)
            .collect();
        Self::assemble(gram, tr, unit, involution, rep_basis)
    }

    fn assemble(
        gram: CMatrix,
        trace: CVector,
        unit: CVector,
        involution: CMatrix,
        rep_basis: Vec<CMatrix>,
    ) -> Result<Self> {
        let n = gram.nrows();
        let chol = Cholesky::new(linalg::hermitian_part(&gram)).ok_or(Error::NotFaithful)?;
        let l_adj = chol.l().adjoint();
        let l_inv_adj = l_adj
            .clone()
            .try_inverse()
            .ok_or(Error::NotFaithful)?;
        let check = l_inv_adj.adjoint() * &gram * &l_inv_adj;
        let orthonormality_deviation = linalg::max_abs_diff(&check, &CMatrix::identity(n, n));
        Ok(GnsSpace {
            gram,
            l_adj,
            l_inv_adj,
            trace,
            unit,
            involution,
            rep_basis,
            orthonormality_deviation,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `max |Q* G Q − I|` for the stored orthonormalization `Q = L^{-*}`.
    pub fn orthonormality_deviation(&self) -> f64 {
        self.orthonormality_deviation
    }

    pub fn min_gram_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.gram)
    }

    /// Coordinates of the unit.
    pub fn unit(&self) -> &CVector {
        &self.unit
    }

    /// Coordinates of `x*` from coordinates of `x`.
    pub fn adjoint_coords(&self, x: &CVector) -> CVector {
        &self.involution * x.map(|z| z.conj())
    }

    pub fn trace(&self, x: &CVector) -> C64 {
        self.trace.iter().zip(x.iter()).map(|(t, c)| t * c).sum()
    }

    pub fn inner(&self, x: &CVector, y: &CVector) -> C64 {
        (x.adjoint() * &self.gram * y)[(0, 0)]
    }

    pub fn two_norm(&self, x: &CVector) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// Coordinates of `x` in the orthonormal basis.
    pub fn to_orthonormal(&self, x: &CVector) -> CVector {
        &self.l_adj * x
    }

    pub fn from_orthonormal(&self, v: &CVector) -> CVector {
        &self.l_inv_adj * v
    }

    /// Algebra coordinates of the `k`-th orthonormal basis vector.
    pub fn orthonormal_basis_vector(&self, k: usize) -> CVector {
        self.l_inv_adj.column(k).into_owned()
    }

    /// `φ̃` in the orthonormal basis.
    pub fn induce_operator(&self, map: &LinearMap) -> CMatrix {
        &self.l_adj * map.matrix() * &self.l_inv_adj
    }

    /// The linear map whose induced operator is `t`.
    pub fn map_from_operator(&self, t: &CMatrix) -> LinearMap {
        LinearMap {
            matrix: &self.l_inv_adj * t * &self.l_adj,
        }
    }

    /// `‖φ̃‖`.
    pub fn operator_norm(&self, map: &LinearMap) -> f64 {
        linalg::op_norm(&self.induce_operator(map))
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_basis.first().map_or(0, |r| r.nrows())
    }

    pub fn rep_basis(&self) -> &[CMatrix] {
        &self.rep_basis
    }

    /// Image of `x` under the stored faithful representation.
    pub fn represent(&self, x: &CVector) -> CMatrix {
        let d = self.rep_dim();
        let mut out = CMatrix::zeros(d, d);
        for (r, c) in self.rep_basis.iter().zip(x.iter()) {
            if *c != linalg::ZERO {
                out += r * *c;
            }
        }
        out
    }

    /// Hilbert–Schmidt conditional expectation onto the represented algebra.
    pub fn expectation(&self) -> HsConditionalExpectation {
        HsConditionalExpectation::onto(&self.rep_basis)
    }

    pub fn is_positive(&self, x: &CVector, tol: f64) -> PsdCertificate {
        linalg::psd_check(&self.represent(x), tol)
    }

    /// Best finite-rank approximation of `φ̃` by singular value truncation.
    pub fn finite_rank_approximation(&self, map: &LinearMap, epsilon: f64) -> FiniteRankApproximation {
        let t = self.induce_operator(map);
        let n = t.nrows();
        let (u, singular_values, v) = linalg::svd(&t);
        let rank = singular_values.iter().filter(|&&s| s > epsilon).count();
        let mut truncated = CMatrix::zeros(n, n);
        for i in 0..rank {
            truncated += u.column(i) * v.column(i).adjoint() * linalg::real(singular_values[i]);
        }
        FiniteRankApproximation {
            map: self.map_from_operator(&truncated),
            rank,
            achieved: singular_values.get(rank).copied().unwrap_or(0.0),
            epsilon,
            singular_values,
        }
    }

    /// `(ε, rank)` pairs for the given tolerances.
    pub fn rank_curve(&self, map: &LinearMap, epsilons: &[f64]) -> Vec<(f64, usize)> {
        let sv = linalg::singular_values(&self.induce_operator(map));
        epsilons
            .iter()
            .map(|&e| (e, sv.iter().filter(|&&s| s > e).count()))
            .collect()
    }

    /// Tests `τ ∘ φ ≤ τ` through the density `ρ` of `τ − τ∘φ`, i.e. the
    /// unique `ρ` with `τ(x) − τ(φ(x)) = τ(ρx)`.
    pub fn check_tau_decreasing(&self, map: &LinearMap, tol: f64) -> TauDecreasingCertificate {
        let f = &self.trace - map.matrix().transpose() * &self.trace;
        // τ(ρx) = ⟨ρ*, x⟩ so the coordinates c of ρ* solve G c = conj(f).
        let c = Cholesky::new(linalg::hermitian_part(&self.gram))
            .expect("gram is positive definite")
            .solve(&f.map(|z| z.conj()));
        let density = self.represent(&c).adjoint();
        let cert = linalg::psd_check(&density, tol);
        TauDecreasingCertificate {
            pass: cert.pass,
            min_eigenvalue: cert.min_eigenvalue,
            density_hermitian_deviation: cert.hermitian_deviation,
            tolerance: tol,
        }
    }

    /// Exact complete-positivity test: Choi matrix of `φ ∘ E_B` on the
    /// ambient matrix algebra of the stored representation.
    pub fn check_completely_positive(&self, map: &LinearMap, tol: f64) -> CpCertificate {
        let expectation = HsConditionalExpectation::onto(&self.rep_basis);
        let d = self.rep_dim();
        let mut choi = CMatrix::zeros(d * d, d * d);
        for (q, coords) in expectation.basis.iter().zip(&expectation.coords) {
            let image = self.represent(&map.apply(coords));
            choi += linalg::kron(&q.map(|z| z.conj()), &image);
        }
        let min = linalg::min_eigenvalue(&choi);
        let herm = linalg::hermitian_deviation(&choi);
        CpCertificate {
            pass: min >= -tol && herm <= tol,
            min_choi_eigenvalue: min,
            choi_hermitian_deviation: herm,
            choi_dim: d * d,
            tolerance: tol,
        }
    }

    pub fn check_ucp(&self, map: &LinearMap, tol: f64) -> UcpCertificate {
        let unital_deviation = map.unital_deviation(self);
        let cp = self.check_completely_positive(map, tol);
        UcpCertificate {
            pass: cp.pass && unital_deviation <= tol,
            unital_deviation,
            cp,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteRankApproximation {
    pub map: LinearMap,
    pub rank: usize,
    /// `‖φ̃ − R̃‖`, the first discarded singular value.
    pub achieved: f64,
    pub epsilon: f64,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TauDecreasingCertificate {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub density_hermitian_deviation: f64,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpCertificate {
    pub pass: bool,
    pub min_choi_eigenvalue: f64,
    pub choi_hermitian_deviation: f64,
    pub choi_dim: usize,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UcpCertificate {
    pub pass: bool,
    pub unital_deviation: f64,
    pub cp: CpCertificate,
}

/// Hilbert–Schmidt orthogonal projection of `M_d` onto the span of a
/// family of matrices. For a unital *-subalgebra this is the
/// trace-preserving conditional expectation.
#[derive(Clone, Debug)]
pub struct HsConditionalExpectation {
    basis: Vec<CMatrix>,
    coords: Vec<CVector>,
}

impl HsConditionalExpectation {
    pub fn onto(spanning: &[CMatrix]) -> Self {
        let n = spanning.len();
        let mut h = CMatrix::zeros(n, n);
        for (l, rl) in spanning.iter().enumerate() {
            for (k, rk) in spanning.iter().enumerate() {
                h[(l, k)] = rl.dotc(rk);
            }
        }
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(&h);
        let top = eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut basis = Vec::new();
        let mut coords = Vec::new();
        for m in 0..n {
            let lam = eigenvalues[m];
            if lam <= 1e-12 * top.max(1.0) {
                continue;
            }
            let c: CVector = eigenvectors.column(m) / linalg::real(lam.sqrt());
            let d = spanning[0].nrows();
            let mut q = CMatrix::zeros(d, d);
            for (r, z) in spanning.iter().zip(c.iter()) {
                q += r * *z;
            }
            basis.push(q);
            coords.push(c);
        }
        HsConditionalExpectation { basis, coords }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates, in the spanning family, of `E_B(x)`.
    pub fn coords_of(&self, x: &CMatrix) -> CVector {
        let n = self.coords.first().map_or(0, |c| c.len());
        let mut out = CVector::zeros(n);
        for (q, c) in self.basis.iter().zip(&self.coords) {
            out += c * q.dotc(x);
        }
        out
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d = x.nrows();
        let mut out = CMatrix::zeros(d, d);
        for q in &self.basis {
            out += q * q.dotc(x);
        }
        out
    }

    /// Choi matrix `Σ_ij E_ij ⊗ E_B(E_ij)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.basis.first().map_or(0, |q| q.nrows());
        let mut choi = CMatrix::zeros(d * d, d * d);
        for q in &self.basis {
            choi += linalg::kron(&q.map(|z| z.conj()), q);
        }
        choi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary, real, DEFAULT_TOL, ONE, ZERO};
    use crate::partial_action::w1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape23() -> (BlockShape, TracialState) {
        let shape = BlockShape::new(vec![2, 3]).unwrap();
        let tau = TracialState::new(&shape, vec![0.2, 0.2]).unwrap();
        (shape, tau)
    }

    fn trace_map(shape: &BlockShape, tau: &TracialState) -> LinearMap {
        let one = AlgebraElement::identity(shape);
        LinearMap::on_algebra(shape, |a| one.scale(tau.eval_unchecked(a)))
    }

    fn random_element(shape: &BlockShape, rng: &mut ChaCha8Rng) -> AlgebraElement {
        let blocks = shape.dims().iter().map(|&n| random_matrix(rng, n, n)).collect();
        AlgebraElement::from_blocks(shape, blocks).unwrap()
    }

    #[test]
    fn gram_is_orthonormalized() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        assert!(space.orthonormality_deviation() < 1e-12);
        assert!((space.two_norm(space.unit()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_norm_matches_trace() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_element(&shape, &mut rng);
            let direct = tau.eval_unchecked(&(&a.adjoint() * &a)).re;
            let n = space.two_norm(&a.to_coords());
            assert!((n * n - direct).abs() < 1e-12 * (1.0 + direct));
            assert!(n <= a.operator_norm() + 1e-12);
        }
    }

    #[test]
    fn w1_two_norm_of_e2() {
        let action = w1();
        let tau = TracialState::new(action.shape(), vec![0.5, 0.5]).unwrap();
        let space = GnsSpace::algebra(action.shape(), &tau).unwrap();
        let e2 = AlgebraElement::central(action.shape(), &[ZERO, ONE]).unwrap();
        assert!((space.two_norm(&e2.to_coords()) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn non_faithful_trace_is_rejected() {
        let shape = BlockShape::new(vec![1, 1]).unwrap();
        let tau = TracialState::new(&shape, vec![1.0, 0.0]).unwrap();
        assert!(matches!(GnsSpace::algebra(&shape, &tau), Err(Error::NotFaithful)));
    }

    #[test]
    fn induced_trace_map_is_rank_one_projection_onto_unit() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let t = space.induce_operator(&trace_map(&shape, &tau));
        let xi = space.to_orthonormal(space.unit());
        let proj = &xi * xi.adjoint();
        assert!(linalg::max_abs_diff(&t, &proj) < 1e-12);
        let id = space.induce_operator(&LinearMap::identity(space.dim()));
        assert!(linalg::max_abs_diff(&id, &CMatrix::identity(space.dim(), space.dim())) < 1e-12);
    }

    #[test]
    fn finite_rank_examples() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let id = LinearMap::identity(space.dim());
        assert_eq!(space.finite_rank_approximation(&id, 0.0).rank, space.dim());
        assert_eq!(space.finite_rank_approximation(&id, 1.0).rank, 0);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pert = LinearMap::from_matrix(random_matrix(&mut rng, space.dim(), space.dim())).unwrap();
        let pert = pert.scale(0.01 / space.operator_norm(&pert));
        let phi = trace_map(&shape, &tau).add(&pert);
        let approx = space.finite_rank_approximation(&phi, 0.05);
        assert_eq!(approx.rank, 1);
        let err = space.operator_norm(&phi.sub(&approx.map));
        assert!((err - approx.achieved).abs() < 1e-12);
        assert!(err <= 0.05);
    }

    #[test]
    fn tau_decreasing_examples() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let id = LinearMap::identity(space.dim());
        assert!(space.check_tau_decreasing(&id, DEFAULT_TOL).pass);
        assert!(space.check_tau_decreasing(&trace_map(&shape, &tau), DEFAULT_TOL).pass);
        let cert = space.check_tau_decreasing(&id.scale(2.0), DEFAULT_TOL);
        assert!(!cert.pass);
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn completely_positive_examples() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let id = LinearMap::identity(space.dim());
        assert!(space.check_ucp(&id, DEFAULT_TOL).pass);
        assert!(space.check_ucp(&trace_map(&shape, &tau), DEFAULT_TOL).pass);

        let m2 = BlockShape::new(vec![2]).unwrap();
        let tau2 = TracialState::uniform(&m2);
        let space2 = GnsSpace::algebra(&m2, &tau2).unwrap();
        let transpose = LinearMap::on_algebra(&m2, |a| {
            AlgebraElement::from_blocks(&m2, vec![a.block(0).transpose()]).unwrap()
        });
        let cert = space2.check_completely_positive(&transpose, DEFAULT_TOL);
        assert!(!cert.pass);
        assert!((cert.min_choi_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_on_one_block_of_a_direct_sum_is_not_cp() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let map = LinearMap::on_algebra(&shape, |a| {
            AlgebraElement::from_blocks(&shape, vec![a.block(0).transpose(), a.block(1).clone()]).unwrap()
        });
        assert!(!space.check_completely_positive(&map, DEFAULT_TOL).pass);
        // positive at level one, so a sampling test would miss it
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_element(&shape, &mut rng);
        let p = &a.adjoint() * &a;
        assert!(map.apply_algebra(&p).is_positive(DEFAULT_TOL).pass);
    }

    #[test]
    fn composition_matches_matrix_product() {
        let (shape, tau) = shape23();
        let space = GnsSpace::algebra(&shape, &tau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u = random_unitary(&mut rng, 3);
        let phi = LinearMap::on_algebra(&shape, |a| {
            AlgebraElement::from_blocks(&shape, vec![a.block(0).clone(), &u * a.block(1) * u.adjoint()]).unwrap()
        });
        let psi = trace_map(&shape, &tau).scale(0.5).add(&LinearMap::identity(space.dim()).scale(0.5));
        let lhs = space.induce_operator(&phi.compose(&psi));
        let rhs = space.induce_operator(&phi) * space.induce_operator(&psi);
        assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
        assert!(space.check_ucp(&phi.compose(&psi), DEFAULT_TOL).pass);
        assert!(space.check_tau_decreasing(&phi.compose(&psi), DEFAULT_TOL).pass);
        assert!(space.operator_norm(&phi.compose(&psi)) <= 1.0 + 1e-9);
        assert!(phi.hermitian_preserving_deviation(&space) < 1e-12);
    }

    #[test]
    fn hs_expectation_is_ucp_trace_preserving_bimodule() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..5 {
            // B = V (M_2 ⊗ I_2 ⊕ ℂ) V* inside M_5
            let v = random_unitary(&mut rng, 5);
            let spanning: Vec<CMatrix> = (0..5)
                .map(|k| {
                    let mut m = CMatrix::zeros(5, 5);
                    if k < 4 {
                        let (i, j) = (k / 2, k % 2);
                        m[(i, j)] = ONE;
                        m[(i + 2, j + 2)] = ONE;
                    } else {
                        m[(4, 4)] = ONE;
                    }
                    &v * m * v.adjoint()
                })
                .collect();
            let e = HsConditionalExpectation::onto(&spanning);
            assert_eq!(e.rank(), 5);
            assert!(linalg::min_eigenvalue(&e.choi()) > -1e-12);
            let id = CMatrix::identity(5, 5);
            assert!(linalg::max_abs_diff(&e.apply(&id), &id) < 1e-12);
            let x = random_matrix(&mut rng, 5, 5);
            assert!((e.apply(&x).trace() - x.trace()).norm() < 1e-12);
            let b1 = &spanning[1] * real(0.3) + &spanning[4];
            let b2 = &spanning[2] - &spanning[0] * real(2.0);
            let lhs = e.apply(&(&b1 * &x * &b2));
            let rhs = &b1 * e.apply(&x) * &b2;
            assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn crossed_gns_space_of_w1() {
        let cp = CrossedProduct::new(w1());
        let tau = TracialState::new(cp.shape(), vec![0.5, 0.5]).unwrap();
        let tt = cp.induced_trace(&tau, DEFAULT_TOL).unwrap();
        let space = GnsSpace::crossed(&cp, &tt).unwrap();
        assert_eq!(space.dim(), 3);
        assert_eq!(space.rep_dim(), 3);
        assert!(space.min_gram_eigenvalue() > 1e-12);
        assert!(space.check_ucp(&LinearMap::identity(3), DEFAULT_TOL).pass);
        let one = space.represent(space.unit());
        assert!(linalg::max_abs_diff(&one, &CMatrix::identity(3, 3)) < 1e-12);
    }
}
