//! The algebraic partial crossed product `A ⋊ G`, its conditional expectation
//! and induced trace, and the regular representation that defines the
//! reduced norm.
//!
//! Multiplication and involution on monomials:
//!
//! ```text
//! (a δ_g)(b δ_h) = α_g(α_{g⁻¹}(a)·b) δ_{gh}
//! (a δ_g)*       = α_{g⁻¹}(a*) δ_{g⁻¹}
//! ```
//!
//! Linear coordinates run over `g` in group order, then over the blocks of
//! `D_g`, then over matrix entries row-major.

use serde::Serialize;

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::group::FiniteGroup;
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::partial_action::PartialAction;
use crate::{Error, Result};

/// `Σ_g a_g δ_g` with `a_g ∈ D_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossedElement {
    coeffs: Vec<AlgebraElement>,
}

impl CrossedElement {
    pub fn coefficient(&self, g: usize) -> &AlgebraElement {
        &self.coeffs[g]
    }

    pub fn coefficients(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        CrossedElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        CrossedElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        CrossedElement {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.max_abs()).fold(0.0, f64::max)
    }
}

/// Coordinate label `E^{(block)}_{ij} δ_g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisLabel {
    pub g: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug)]
pub struct CrossedProduct {
    action: PartialAction,
    labels: Vec<BasisLabel>,
}

impl CrossedProduct {
    pub fn new(action: PartialAction) -> Self {
        let mut labels = Vec::new();
        for g in action.group().elements() {
            for &b in action.ideal_blocks(g) {
                let n = action.shape().dim(b);
                for i in 0..n {
                    for j in 0..n {
                        labels.push(BasisLabel { g, block: b, i, j });
                    }
                }
            }
        }
        CrossedProduct { action, labels }
    }

    pub fn action(&self) -> &PartialAction {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn shape(&self) -> &BlockShape {
        self.action.shape()
    }

    /// Linear dimension `Σ_g dim D_g`.
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn basis_labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn zero(&self) -> CrossedElement {
        CrossedElement {
            coeffs: vec![AlgebraElement::zero(self.shape()); self.group().order()],
        }
    }

    /// `1 δ_e`.
    pub fn unit(&self) -> CrossedElement {
        self.embed(&AlgebraElement::identity(self.shape()))
    }

    /// `a ↦ a δ_e`.
    pub fn embed(&self, a: &AlgebraElement) -> CrossedElement {
        let mut x = self.zero();
        x.coeffs[self.group().identity()] = a.clone();
        x
    }

    /// `a δ_g`; `a` must lie in `D_g`.
    pub fn monomial(&self, g: usize, a: &AlgebraElement, tol: f64) -> Result<CrossedElement> {
        let mut coeffs = vec![AlgebraElement::zero(self.shape()); self.group().order()];
        coeffs[g] = a.clone();
        self.element(coeffs, tol)
    }

    /// Builds `Σ a_g δ_g`, rejecting coefficients outside `D_g`.
    pub fn element(&self, coeffs: Vec<AlgebraElement>, tol: f64) -> Result<CrossedElement> {
        if coeffs.len() != self.group().order() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, found {}",
                self.group().order(),
                coeffs.len()
            )));
        }
        for (g, a) in coeffs.iter().enumerate() {
            if a.shape() != self.shape() {
                return Err(Error::ShapeMismatch {
                    expected: self.shape().dims().to_vec(),
                    found: a.shape().dims().to_vec(),
                });
            }
            let bad = self.action.ideal(g).violations(a, tol * (1.0 + a.max_abs()));
            if !bad.is_empty() {
                return Err(Error::DomainViolation { g, blocks: bad });
            }
        }
        Ok(CrossedElement { coeffs })
    }

    /// Largest entry of any coefficient outside its ideal `D_g`.
    pub fn ideal_violation(&self, x: &CrossedElement) -> f64 {
        let mut dev: f64 = 0.0;
        for (g, a) in x.coeffs.iter().enumerate() {
            let ideal = self.action.ideal(g);
            for b in 0..self.shape().num_blocks() {
                if !ideal.contains_block(b) {
                    dev = dev.max(linalg::max_abs(a.block(b)));
                }
            }
        }
        dev
    }

    pub fn multiply(&self, x: &CrossedElement, y: &CrossedElement) -> CrossedElement {
        let grp = self.group();
        let mut out = self.zero();
        for (g, a) in x.coeffs.iter().enumerate() {
            if a.max_abs() == 0.0 {
                continue;
            }
            let pulled = self.action.apply_cut(grp.inv(g), a);
            for (h, b) in y.coeffs.iter().enumerate() {
                if b.max_abs() == 0.0 {
                    continue;
                }
                let term = self.action.apply_cut(g, &(&pulled * b));
                let k = grp.mul(g, h);
                out.coeffs[k] = &out.coeffs[k] + &term;
            }
        }
        out
    }

    pub fn adjoint(&self, x: &CrossedElement) -> CrossedElement {
        let grp = self.group();
        let mut out = self.zero();
        for (g, a) in x.coeffs.iter().enumerate() {
            let gi = grp.inv(g);
            out.coeffs[gi] = self.action.apply_cut(gi, &a.adjoint());
        }
        out
    }

    /// `E(Σ a_g δ_g) = a_e`.
    pub fn conditional_expectation(&self, x: &CrossedElement) -> AlgebraElement {
        x.coeffs[self.group().identity()].clone()
    }

    /// `τ̃ = τ∘E`; requires `τ` faithful and invariant under the action.
    pub fn induced_trace(&self, trace: &TracialState, tol: f64) -> Result<InducedTrace> {
        if trace.weights().len() != self.shape().num_blocks() {
            return Err(Error::InvalidTrace("trace has the wrong number of weights".into()));
        }
        if !trace.is_faithful() {
            return Err(Error::NotFaithful);
        }
        let report = self.action.check_invariant_trace(trace, tol);
        if !report.invariant {
            return Err(Error::NonInvariantTrace(format!(
                "{} weight mismatches, numeric deviation {:e}",
                report.violations.len(),
                report.numeric_deviation
            )));
        }
        Ok(InducedTrace {
            trace: trace.clone(),
            identity: self.group().identity(),
        })
    }

    pub fn to_coords(&self, x: &CrossedElement) -> CVector {
        CVector::from_iterator(
            self.dim(),
            self.labels
                .iter()
                .map(|l| x.coeffs[l.g].block(l.block)[(l.i, l.j)]),
        )
    }

    pub fn from_coords(&self, v: &CVector) -> Result<CrossedElement> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, found {}",
                self.dim(),
                v.len()
            )));
        }
        let mut x = self.zero();
        for (l, &c) in self.labels.iter().zip(v.iter()) {
            x.coeffs[l.g].block_mut(l.block)[(l.i, l.j)] = c;
        }
        Ok(x)
    }

    pub fn basis_element(&self, k: usize) -> CrossedElement {
        let l = self.labels[k];
        let mut x = self.zero();
        x.coeffs[l.g].block_mut(l.block)[(l.i, l.j)] = linalg::ONE;
        x
    }

    /// Nonzero structure constants `c_{kl}^m` with `e_k e_l = Σ_m c_{kl}^m e_m`.
    pub fn structure_constants(&self) -> Vec<(usize, usize, usize, C64)> {
        let basis: Vec<CrossedElement> = (0..self.dim()).map(|k| self.basis_element(k)).collect();
        let mut out = Vec::new();
        for (k, x) in basis.iter().enumerate() {
            for (l, y) in basis.iter().enumerate() {
                let v = self.to_coords(&self.multiply(x, y));
                for (m, c) in v.iter().enumerate() {
                    if c.norm() > 1e-14 {
                        out.push((k, l, m, *c));
                    }
                }
            }
        }
        out
    }
}

/// `τ̃ = τ∘E` for a faithful invariant `τ`.
#[derive(Clone, Debug)]
pub struct InducedTrace {
    trace: TracialState,
    identity: usize,
}

impl InducedTrace {
    pub fn base(&self) -> &TracialState {
        &self.trace
    }

    pub fn evaluate(&self, x: &CrossedElement) -> C64 {
        self.trace.eval_unchecked(&x.coeffs[self.identity])
    }

    /// `‖x‖₂,τ̃ = τ̃(x*x)^{1/2}`.
    pub fn two_norm(&self, cp: &CrossedProduct, x: &CrossedElement) -> f64 {
        self.evaluate(&cp.multiply(&cp.adjoint(x), x)).re.max(0.0).sqrt()
    }
}

/// The representation `π` of `A` fed into the regular representation:
/// `a ↦ V (I_k ⊗ π₀(a)) V*` with `π₀` the defining block-diagonal one.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseRepresentation {
    multiplicity: usize,
    conjugator: Option<CMatrix>,
}

impl Default for BaseRepresentation {
    fn default() -> Self {
        Self::defining()
    }
}

impl BaseRepresentation {
    pub fn defining() -> Self {
        BaseRepresentation {
            multiplicity: 1,
            conjugator: None,
        }
    }

    /// `π ⊕ ⋯ ⊕ π` (`k` copies).
    pub fn amplified(k: usize) -> Self {
        assert!(k >= 1);
        BaseRepresentation {
            multiplicity: k,
            conjugator: None,
        }
    }

    /// Unitary conjugate `V π(·) V*`.
    pub fn conjugated(mut self, v: CMatrix) -> Self {
        self.conjugator = Some(v);
        self
    }

    pub fn dim(&self, shape: &BlockShape) -> usize {
        self.multiplicity * shape.fiber_dim()
    }

    pub fn apply(&self, a: &AlgebraElement) -> CMatrix {
        let base = a.represent();
        let amp = if self.multiplicity == 1 {
            base
        } else {
            linalg::kron(&CMatrix::identity(self.multiplicity, self.multiplicity), &base)
        };
        match &self.conjugator {
            Some(v) => v * amp * v.adjoint(),
            None => amp,
        }
    }
}

/// Regular representation on `ℓ²(G, H)`:
///
/// ```text
/// (π̃(a) f)(g) = π′_g(a) f(g),   π′_g(a) = π(α_{g⁻¹}(a·1_g))
/// (λ_g f)(h)  = f(g⁻¹h)
/// Λ(Σ a_g δ_g) = Σ π̃(a_g) λ_g
/// ```
///
/// `π′_g` is the extension of `a ↦ π(α_{g⁻¹}(a))` from `D_g` to `A` that
/// vanishes on the complement of `π(1_{g⁻¹})H`.
#[derive(Clone, Debug)]
pub struct RegularRepresentation {
    action: PartialAction,
    base: BaseRepresentation,
    fiber: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub pass: bool,
    pub max_deviation: f64,
    /// Max deviation per group element.
    pub per_element: Vec<f64>,
    pub tolerance: f64,
}

impl RegularRepresentation {
    pub fn build(cp: &CrossedProduct, base: BaseRepresentation) -> Self {
        let fiber = base.dim(cp.shape());
        RegularRepresentation {
            action: cp.action().clone(),
            base,
            fiber,
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber
    }

    pub fn total_dim(&self) -> usize {
        self.fiber * self.action.group().order()
    }

    /// `π′_g(a)`.
    pub fn extended(&self, g: usize, a: &AlgebraElement) -> CMatrix {
        let gi = self.action.group().inv(g);
        self.base.apply(&self.action.apply_cut(gi, a))
    }

    pub fn pi_tilde(&self, a: &AlgebraElement) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .action
            .group()
            .elements()
            .map(|g| self.extended(g, a))
            .collect();
        linalg::block_diag(&blocks)
    }

    pub fn lambda(&self, g: usize) -> CMatrix {
        let grp = self.action.group();
        let n = self.fiber;
        let mut out = CMatrix::zeros(self.total_dim(), self.total_dim());
        for k in grp.elements() {
            let row = grp.mul(g, k) * n;
            for i in 0..n {
                out[(row + i, k * n + i)] = linalg::ONE;
            }
        }
        out
    }

    /// `Λ(x) = Σ_g π̃(a_g) λ_g`.
    pub fn integrated(&self, x: &CrossedElement) -> CMatrix {
        let grp = self.action.group();
        let n = self.fiber;
        let mut out = CMatrix::zeros(self.total_dim(), self.total_dim());
        for (g, a) in x.coefficients().iter().enumerate() {
            if a.max_abs() == 0.0 {
                continue;
            }
            // block (gk, k)... π̃(a)λ_g has block (h, g⁻¹h) = π′_h(a)
            for h in grp.elements() {
                let m = self.extended(h, a);
                let col = grp.mul(grp.inv(g), h);
                let mut view = out.view_mut((h * n, col * n), (n, n));
                view += &m;
            }
        }
        out
    }

    /// `λ_g π̃(a) λ_{g⁻¹} = π̃(α_g(a))` on a matrix-unit basis of every `D_{g⁻¹}`.
    pub fn check_covariance(&self, tol: f64) -> CovarianceReport {
        let grp = self.action.group();
        let mut per_element = Vec::with_capacity(grp.order());
        for g in grp.elements() {
            let (lg, lgi) = (self.lambda(g), self.lambda(grp.inv(g)));
            let mut dev: f64 = 0.0;
            for x in self.action.ideal(grp.inv(g)).matrix_units() {
                let lhs = &lg * self.pi_tilde(&x) * &lgi;
                let rhs = self.pi_tilde(&self.action.apply_cut(g, &x));
                dev = dev.max(linalg::max_abs_diff(&lhs, &rhs));
            }
            per_element.push(dev);
        }
        let max_deviation = per_element.iter().copied().fold(0.0, f64::max);
        CovarianceReport {
            pass: max_deviation <= tol,
            max_deviation,
            per_element,
            tolerance: tol,
        }
    }

    /// `‖x‖_r = ‖Λ(x)‖`.
    pub fn reduced_norm(&self, x: &CrossedElement) -> f64 {
        linalg::op_norm(&self.integrated(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary, real, DEFAULT_TOL, ONE, ZERO};
    use crate::partial_action::w1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e2(cp: &CrossedProduct) -> AlgebraElement {
        AlgebraElement::central(cp.shape(), &[ZERO, ONE]).unwrap()
    }

    fn random_crossed(cp: &CrossedProduct, rng: &mut ChaCha8Rng) -> CrossedElement {
        let v = CVector::from_iterator(cp.dim(), random_matrix(rng, cp.dim(), 1).iter().copied());
        cp.from_coords(&v).unwrap()
    }

    #[test]
    fn unit_is_neutral() {
        let cp = CrossedProduct::new(w1());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_crossed(&cp, &mut rng);
        assert!(cp.multiply(&cp.unit(), &x).max_abs_diff(&x) < 1e-15);
        assert!(cp.multiply(&x, &cp.unit()).max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn w1_generator_squares_to_e2() {
        let cp = CrossedProduct::new(w1());
        let u = cp.monomial(1, &e2(&cp), DEFAULT_TOL).unwrap();
        let sq = cp.multiply(&u, &u);
        assert_eq!(sq, cp.embed(&e2(&cp)));
        assert_eq!(cp.adjoint(&u), u);
    }

    #[test]
    fn coefficients_outside_ideal_are_rejected() {
        let cp = CrossedProduct::new(w1());
        let one = AlgebraElement::identity(cp.shape());
        assert!(matches!(
            cp.monomial(1, &one, DEFAULT_TOL),
            Err(Error::DomainViolation { g: 1, .. })
        ));
    }

    #[test]
    fn w1_associativity_and_involution() {
        let cp = CrossedProduct::new(w1());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (x, y, z) = (
                random_crossed(&cp, &mut rng),
                random_crossed(&cp, &mut rng),
                random_crossed(&cp, &mut rng),
            );
            let l = cp.multiply(&cp.multiply(&x, &y), &z);
            let r = cp.multiply(&x, &cp.multiply(&y, &z));
            assert!(l.max_abs_diff(&r) < 1e-12);
            let a = cp.adjoint(&cp.multiply(&x, &y));
            let b = cp.multiply(&cp.adjoint(&y), &cp.adjoint(&x));
            assert!(a.max_abs_diff(&b) < 1e-12);
            assert!(cp.adjoint(&cp.adjoint(&x)).max_abs_diff(&x) < 1e-15);
        }
    }

    #[test]
    fn expectation_and_trace_on_w1() {
        let cp = CrossedProduct::new(w1());
        let tau = TracialState::new(cp.shape(), vec![0.5, 0.5]).unwrap();
        let tt = cp.induced_trace(&tau, DEFAULT_TOL).unwrap();
        let x = cp.embed(&e2(&cp)).add(&cp.monomial(1, &e2(&cp), DEFAULT_TOL).unwrap());
        assert_eq!(cp.conditional_expectation(&x), e2(&cp));
        assert!((tt.evaluate(&x) - real(0.5)).norm() < 1e-15);
        assert!((tt.evaluate(&cp.unit()) - ONE).norm() < 1e-15);
        let g_only = cp.monomial(1, &e2(&cp), DEFAULT_TOL).unwrap();
        assert_eq!(cp.conditional_expectation(&g_only), AlgebraElement::zero(cp.shape()));
    }

    #[test]
    fn non_invariant_trace_is_rejected() {
        let shape = BlockShape::new(vec![1, 1]).unwrap();
        let swap = PartialAction::global(FiniteGroup::cyclic(2), shape.clone(), vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let cp = CrossedProduct::new(swap);
        let tau = TracialState::new(&shape, vec![0.25, 0.75]).unwrap();
        assert!(matches!(cp.induced_trace(&tau, DEFAULT_TOL), Err(Error::NonInvariantTrace(_))));
    }

    #[test]
    fn w1_regular_representation() {
        let cp = CrossedProduct::new(w1());
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        let expected = linalg::kron(
            &CMatrix::identity(2, 2),
            &CMatrix::from_diagonal(&CVector::from_vec(vec![ZERO, ONE])),
        );
        assert_eq!(rep.pi_tilde(&e2(&cp)), expected);
        let lg = rep.lambda(1);
        assert_eq!(&lg * &lg, CMatrix::identity(4, 4));
        assert_eq!(lg[(2, 0)], ONE);
        assert!(rep.check_covariance(1e-12).pass);

        let x = cp.embed(&e2(&cp)).add(&cp.monomial(1, &e2(&cp), DEFAULT_TOL).unwrap());
        assert!((rep.reduced_norm(&x) - 2.0).abs() < 1e-9);
        assert!((rep.reduced_norm(&cp.unit()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_group_integrated_form_is_defining_representation() {
        let shape = BlockShape::new(vec![2, 1]).unwrap();
        let cp = CrossedProduct::new(PartialAction::trivial(FiniteGroup::trivial(), shape.clone()));
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = AlgebraElement::from_blocks(&shape, vec![random_matrix(&mut rng, 2, 2), random_matrix(&mut rng, 1, 1)]).unwrap();
        assert_eq!(rep.integrated(&cp.embed(&a)), a.represent());
    }

    #[test]
    fn corrupted_action_breaks_covariance() {
        let shape = BlockShape::new(vec![2, 2]).unwrap();
        let swap = PartialAction::global(FiniteGroup::cyclic(2), shape, vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bad = swap.with_unitary(1, 0, random_unitary(&mut rng, 2));
        let cp = CrossedProduct::new(bad);
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        let report = rep.check_covariance(1e-10);
        assert!(!report.pass);
        assert!(report.max_deviation > 1e-3);
    }

    #[test]
    fn integrated_form_is_a_star_homomorphism() {
        let cp = CrossedProduct::new(w1());
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (x, y) = (random_crossed(&cp, &mut rng), random_crossed(&cp, &mut rng));
            let lhs = rep.integrated(&cp.multiply(&x, &y));
            let rhs = rep.integrated(&x) * rep.integrated(&y);
            assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
            assert!(linalg::max_abs_diff(&rep.integrated(&cp.adjoint(&x)), &rep.integrated(&x).adjoint()) < 1e-12);
        }
    }
}
