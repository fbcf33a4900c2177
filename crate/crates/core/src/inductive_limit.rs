//! Trace-compatible chains `A⁽⁰⁾ → A⁽¹⁾ → ⋯` of multi-matrix algebras,
//! their GNS isometries, extension of operators and lifting of UCP maps
//! along the chain, and crossed products of equivariant chains.
//!
//! An embedding is given by Bratteli data: `m[i][j]` copies of source block
//! `j` inside target block `i`, conjugated by a unitary `W_i`:
//!
//! ```text
//! φ(a)_i = W_i (⊕_j I_{m_ij} ⊗ a_j ⊕ 0) W_i*
//! ```
//!
//! The zero summand only appears for non-unital data, which
//! [`Embedding::validate`] reports.

use serde::Serialize;

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::crossed_product::{BaseRepresentation, CrossedElement, CrossedProduct, RegularRepresentation};
use crate::gns::{GnsSpace, LinearMap, TauDecreasingCertificate, UcpCertificate};
use crate::linalg::{self, CMatrix, ONE};
use crate::partial_action::PartialAction;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ChainStage {
    shape: BlockShape,
    trace: TracialState,
    action: Option<PartialAction>,
}

impl ChainStage {
    pub fn new(shape: BlockShape, trace: TracialState, action: Option<PartialAction>, tol: f64) -> Result<Self> {
        if trace.weights().len() != shape.num_blocks() {
            return Err(Error::InvalidTrace("trace has the wrong number of weights".into()));
        }
        if !trace.is_faithful() {
            return Err(Error::NotFaithful);
        }
        if let Some(a) = &action {
            if a.shape() != &shape {
                return Err(Error::ShapeMismatch {
                    expected: shape.dims().to_vec(),
                    found: a.shape().dims().to_vec(),
                });
            }
            let report = a.validate(tol);
            if !report.valid {
                return Err(Error::InvalidAction(format!(
                    "{} violations, max deviation {:e}",
                    report.violations.len(),
                    report.max_deviation
                )));
            }
        }
        Ok(ChainStage { shape, trace, action })
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn trace(&self) -> &TracialState {
        &self.trace
    }

    pub fn action(&self) -> Option<&PartialAction> {
        self.action.as_ref()
    }
}

/// One summand of `⊕_j I_{m_ij} ⊗ a_j`: source block `j` (or padding) of a
/// given size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slot {
    source: Option<usize>,
    size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    source: BlockShape,
    target: BlockShape,
    multiplicity: Vec<Vec<usize>>,
    intertwiners: Vec<CMatrix>,
}

impl Embedding {
    /// Checks sizes only: `Σ_j m_ij n_j ≤ n_i` and square `n_i × n_i` intertwiners.
    pub fn new(
        source: BlockShape,
        target: BlockShape,
        multiplicity: Vec<Vec<usize>>,
        intertwiners: Vec<CMatrix>,
    ) -> Result<Self> {
        let (ks, kt) = (source.num_blocks(), target.num_blocks());
        if multiplicity.len() != kt || multiplicity.iter().any(|r| r.len() != ks) {
            return Err(Error::InvalidEmbedding(format!("multiplicity matrix must be {kt} x {ks}")));
        }
        if intertwiners.len() != kt {
            return Err(Error::InvalidEmbedding(format!("expected {kt} intertwiners")));
        }
        for (i, (row, w)) in multiplicity.iter().zip(&intertwiners).enumerate() {
            let n = target.dim(i);
            let used: usize = row.iter().zip(source.dims()).map(|(m, d)| m * d).sum();
            if used > n {
                return Err(Error::InvalidEmbedding(format!(
                    "target block {i} of size {n} cannot hold {used} dimensions"
                )));
            }
            if w.shape() != (n, n) {
                return Err(Error::InvalidEmbedding(format!("intertwiner {i} must be {n} x {n}")));
            }
        }
        Ok(Embedding {
            source,
            target,
            multiplicity,
            intertwiners,
        })
    }

    /// Identity intertwiners.
    pub fn standard(source: BlockShape, target: BlockShape, multiplicity: Vec<Vec<usize>>) -> Result<Self> {
        let w = target.dims().iter().map(|&n| CMatrix::identity(n, n)).collect();
        Self::new(source, target, multiplicity, w)
    }

    pub fn identity(shape: &BlockShape) -> Self {
        let k = shape.num_blocks();
        let m = (0..k).map(|i| (0..k).map(|j| usize::from(i == j)).collect()).collect();
        Self::standard(shape.clone(), shape.clone(), m).expect("identity data is consistent")
    }

    pub fn source(&self) -> &BlockShape {
        &self.source
    }

    pub fn target(&self) -> &BlockShape {
        &self.target
    }

    pub fn multiplicity(&self) -> &[Vec<usize>] {
        &self.multiplicity
    }

    pub fn intertwiners(&self) -> &[CMatrix] {
        &self.intertwiners
    }

    pub fn with_intertwiner(&self, block: usize, w: CMatrix) -> Self {
        let mut out = self.clone();
        out.intertwiners[block] = w;
        out
    }

    fn slots(&self, i: usize) -> Vec<Slot> {
        let mut slots = Vec::new();
        let mut used = 0;
        for (j, &m) in self.multiplicity[i].iter().enumerate() {
            for _ in 0..m {
                slots.push(Slot {
                    source: Some(j),
                    size: self.source.dim(j),
                });
                used += self.source.dim(j);
            }
        }
        let n = self.target.dim(i);
        if used < n {
            slots.push(Slot {
                source: None,
                size: n - used,
            });
        }
        slots
    }

    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        let blocks = (0..self.target.num_blocks())
            .map(|i| {
                let parts: Vec<CMatrix> = self
                    .slots(i)
                    .iter()
                    .map(|s| match s.source {
                        Some(j) => a.block(j).clone(),
                        None => CMatrix::zeros(s.size, s.size),
                    })
                    .collect();
                let w = &self.intertwiners[i];
                w * linalg::block_diag(&parts) * w.adjoint()
            })
            .collect();
        AlgebraElement::from_blocks(&self.target, blocks).expect("target shape")
    }

    /// Matrix from source to target linear coordinates.
    pub fn matrix(&self) -> CMatrix {
        let units = AlgebraElement::matrix_units(&self.source);
        let mut m = CMatrix::zeros(self.target.linear_dim(), units.len());
        for (k, e) in units.iter().enumerate() {
            m.set_column(k, &self.apply(e).to_coords());
        }
        m
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Embedding) -> Result<Embedding> {
        if next.source != self.target {
            return Err(Error::ShapeMismatch {
                expected: self.target.dims().to_vec(),
                found: next.source.dims().to_vec(),
            });
        }
        let (ks, kt) = (self.source.num_blocks(), next.target.num_blocks());
        let mut multiplicity = vec![vec![0; ks]; kt];
        for (k, row) in multiplicity.iter_mut().enumerate() {
            for (j, m) in row.iter_mut().enumerate() {
                *m = (0..self.target.num_blocks())
                    .map(|i| next.multiplicity[k][i] * self.multiplicity[i][j])
                    .sum();
            }
        }
        let mut intertwiners = Vec::with_capacity(kt);
        for k in 0..kt {
            // composite summands in the order produced by next then self
            let mut composite: Vec<Slot> = Vec::new();
            let mut inner_w: Vec<CMatrix> = Vec::new();
            for s in next.slots(k) {
                match s.source {
                    Some(i) => {
                        composite.extend(self.slots(i));
                        inner_w.push(self.intertwiners[i].clone());
                    }
                    None => {
                        composite.push(s);
                        inner_w.push(CMatrix::identity(s.size, s.size));
                    }
                }
            }
            // canonical order: source block ascending, padding last
            let mut order: Vec<usize> = (0..composite.len()).collect();
            order.sort_by_key(|&t| composite[t].source.unwrap_or(usize::MAX));
            let n = next.target.dim(k);
            let mut offsets = Vec::with_capacity(composite.len());
            let mut off = 0;
            for s in &composite {
                offsets.push(off);
                off += s.size;
            }
            let mut perm = CMatrix::zeros(n, n);
            let mut canon = 0;
            for &t in &order {
                for r in 0..composite[t].size {
                    perm[(offsets[t] + r, canon + r)] = ONE;
                }
                canon += composite[t].size;
            }
            let w = &next.intertwiners[k] * linalg::block_diag(&inner_w) * perm;
            intertwiners.push(w);
        }
        // padding of the composite collapses into one trailing summand, which
        // the canonical order already produces
        Embedding::new(self.source.clone(), next.target.clone(), multiplicity, intertwiners)
    }

    /// Unital *-homomorphism and trace compatibility `τ_tgt ∘ φ = τ_src`.
    pub fn validate(&self, source_trace: &TracialState, target_trace: &TracialState, tol: f64) -> EmbeddingReport {
        let mut violations = Vec::new();
        for i in 0..self.target.num_blocks() {
            let used: usize = self.multiplicity[i]
                .iter()
                .zip(self.source.dims())
                .map(|(m, d)| m * d)
                .sum();
            if used != self.target.dim(i) {
                violations.push(EmbeddingViolation::NotUnital {
                    block: i,
                    filled: used,
                    size: self.target.dim(i),
                });
            }
            let dev = linalg::unitary_deviation(&self.intertwiners[i]);
            if dev > tol {
                violations.push(EmbeddingViolation::NotUnitary { block: i, deviation: dev });
            }
        }
        for j in 0..self.source.num_blocks() {
            if self.multiplicity.iter().all(|r| r[j] == 0) {
                violations.push(EmbeddingViolation::NotInjective { block: j });
            }
            let pulled: f64 = (0..self.target.num_blocks())
                .map(|i| self.multiplicity[i][j] as f64 * target_trace.weight(i))
                .sum();
            if (pulled - source_trace.weight(j)).abs() > tol {
                violations.push(EmbeddingViolation::TraceWeight {
                    block: j,
                    source: source_trace.weight(j),
                    pulled_back: pulled,
                });
            }
        }
        let units = AlgebraElement::matrix_units(&self.source);
        let images: Vec<AlgebraElement> = units.iter().map(|e| self.apply(e)).collect();
        let mut hom: f64 = 0.0;
        let mut trace_dev: f64 = 0.0;
        for (k, ek) in units.iter().enumerate() {
            hom = hom.max(self.apply(&ek.adjoint()).max_abs_diff(&images[k].adjoint()));
            let t = target_trace.eval_unchecked(&images[k]) - source_trace.eval_unchecked(ek);
            trace_dev = trace_dev.max(t.norm());
            for (l, el) in units.iter().enumerate() {
                let lhs = self.apply(&(ek * el));
                hom = hom.max(lhs.max_abs_diff(&(&images[k] * &images[l])));
            }
        }
        let unit_dev = self
            .apply(&AlgebraElement::identity(&self.source))
            .max_abs_diff(&AlgebraElement::identity(&self.target));
        if hom > tol {
            violations.push(EmbeddingViolation::NotHomomorphism { deviation: hom });
        }
        if trace_dev > tol {
            violations.push(EmbeddingViolation::TraceNumeric { deviation: trace_dev });
        }
        EmbeddingReport {
            valid: violations.is_empty(),
            homomorphism_deviation: hom,
            unit_deviation: unit_dev,
            trace_deviation: trace_dev,
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingViolation {
    NotUnital { block: usize, filled: usize, size: usize },
    NotUnitary { block: usize, deviation: f64 },
    NotInjective { block: usize },
    NotHomomorphism { deviation: f64 },
    TraceWeight { block: usize, source: f64, pulled_back: f64 },
    TraceNumeric { deviation: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub valid: bool,
    pub homomorphism_deviation: f64,
    pub unit_deviation: f64,
    pub trace_deviation: f64,
    pub violations: Vec<EmbeddingViolation>,
}

/// `U(a + N_τ) = φ(a) + N_τ′` in orthonormal coordinates: `U = L_t* M L_s^{-*}`.
pub fn gns_isometry(emb: &Embedding, source: &GnsSpace, target: &GnsSpace) -> CMatrix {
    let m = emb.matrix();
    let mut u = CMatrix::zeros(target.dim(), source.dim());
    for k in 0..source.dim() {
        let x = source.orthonormal_basis_vector(k);
        u.set_column(k, &target.to_orthonormal(&(&m * x)));
    }
    u
}

/// `max |U*U − I|`.
pub fn isometry_deviation(u: &CMatrix) -> f64 {
    linalg::max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(u.ncols(), u.ncols()))
}

/// `T′ = U T U*`, i.e. `T` transported to the image and composed with the
/// projection `P = UU*`.
pub fn extend_operator(t: &CMatrix, u: &CMatrix) -> CMatrix {
    u * t * u.adjoint()
}

/// The trace-preserving conditional expectation of the target onto the
/// embedded source, followed by the inverse of the embedding: the
/// GNS-orthogonal projection `U*`, pulled back to algebra coordinates.
pub fn pullback_expectation(u: &CMatrix, source: &GnsSpace, target: &GnsSpace) -> CMatrix {
    let mut m = CMatrix::zeros(source.dim(), target.dim());
    for k in 0..target.dim() {
        let mut y = crate::CVector::zeros(target.dim());
        y[k] = ONE;
        let v = u.adjoint() * target.to_orthonormal(&y);
        m.set_column(k, &source.from_orthonormal(&v));
    }
    m
}

/// `E_ι = ι ∘ (pullback)` as a map of the target algebra.
pub fn conditional_expectation(emb: &Embedding, source: &GnsSpace, target: &GnsSpace) -> LinearMap {
    let u = gns_isometry(emb, source, target);
    LinearMap::from_matrix(emb.matrix() * pullback_expectation(&u, source, target)).expect("square")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub ucp: UcpCertificate,
    pub idempotent_deviation: f64,
    pub trace_deviation: f64,
    pub bimodule_deviation: f64,
    pub pass: bool,
}

/// Certifies `E_ι`: UCP, idempotent, trace-preserving and a bimodule map
/// over the embedded source.
pub fn certify_expectation(emb: &Embedding, source: &GnsSpace, target: &GnsSpace, tol: f64) -> ExpectationReport {
    let e = conditional_expectation(emb, source, target);
    let ucp = target.check_ucp(&e, tol);
    let idempotent_deviation = linalg::max_abs_diff(&(e.matrix() * e.matrix()), e.matrix());
    let mut trace_deviation: f64 = 0.0;
    let mut bimodule_deviation: f64 = 0.0;
    let tgt_units = AlgebraElement::matrix_units(emb.target());
    let src_units = AlgebraElement::matrix_units(emb.source());
    for y in &tgt_units {
        let ey = e.apply_algebra(y);
        let yc = y.to_coords();
        trace_deviation = trace_deviation.max((target.trace(&ey.to_coords()) - target.trace(&yc)).norm());
        for b in &src_units {
            let ib = emb.apply(b);
            let lhs = e.apply_algebra(&(&ib * y));
            bimodule_deviation = bimodule_deviation.max(lhs.max_abs_diff(&(&ib * &ey)));
            let rhs = e.apply_algebra(&(y * &ib));
            bimodule_deviation = bimodule_deviation.max(rhs.max_abs_diff(&(&ey * &ib)));
        }
    }
    ExpectationReport {
        pass: ucp.pass && idempotent_deviation <= tol && trace_deviation <= tol && bimodule_deviation <= tol,
        ucp,
        idempotent_deviation,
        trace_deviation,
        bimodule_deviation,
    }
}

/// `ψ = ι ∘ φ ∘ E_ι` on the target; `ψ̃ = U φ̃ U*`.
pub fn lift_ucp(phi: &LinearMap, emb: &Embedding, source: &GnsSpace, target: &GnsSpace) -> LinearMap {
    let u = gns_isometry(emb, source, target);
    let pull = pullback_expectation(&u, source, target);
    LinearMap::from_matrix(emb.matrix() * phi.matrix() * pull).expect("square")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftReport {
    pub ucp: UcpCertificate,
    pub tau_decreasing: TauDecreasingCertificate,
    /// `max |ψ(ι(e_k)) − ι(φ(e_k))|` over the source basis.
    pub compatibility_deviation: f64,
    /// `max | ‖ψ(ι a) − ι a‖₂ − ‖φ(a) − a‖₂ |` over the source basis.
    pub deviation_transfer: f64,
    pub pass: bool,
}

pub fn certify_lift(
    phi: &LinearMap,
    psi: &LinearMap,
    emb: &Embedding,
    source: &GnsSpace,
    target: &GnsSpace,
    tol: f64,
) -> LiftReport {
    let m = emb.matrix();
    let ucp = target.check_ucp(psi, tol);
    let tau_decreasing = target.check_tau_decreasing(psi, tol);
    let lhs = psi.matrix() * &m;
    let rhs = &m * phi.matrix();
    let compatibility_deviation = linalg::max_abs_diff(&lhs, &rhs);
    let mut deviation_transfer: f64 = 0.0;
    for k in 0..source.dim() {
        let a = source.orthonormal_basis_vector(k);
        let ia = &m * &a;
        let d_t = target.two_norm(&(psi.apply(&ia) - &ia));
        let d_s = source.two_norm(&(phi.apply(&a) - &a));
        deviation_transfer = deviation_transfer.max((d_t - d_s).abs());
    }
    LiftReport {
        pass: ucp.pass && tau_decreasing.pass && compatibility_deviation <= tol && deviation_transfer <= tol,
        ucp,
        tau_decreasing,
        compatibility_deviation,
        deviation_transfer,
    }
}

/// Stages joined by embeddings, `embeddings[n]: stages[n] → stages[n+1]`.
#[derive(Clone, Debug)]
pub struct Chain {
    stages: Vec<ChainStage>,
    embeddings: Vec<Embedding>,
}

impl Chain {
    pub fn new(stages: Vec<ChainStage>, embeddings: Vec<Embedding>) -> Result<Self> {
        if stages.is_empty() || embeddings.len() + 1 != stages.len() {
            return Err(Error::InvalidEmbedding(format!(
                "{} stages need {} embeddings, found {}",
                stages.len(),
                stages.len().saturating_sub(1),
                embeddings.len()
            )));
        }
        for (n, e) in embeddings.iter().enumerate() {
            if e.source() != stages[n].shape() || e.target() != stages[n + 1].shape() {
                return Err(Error::InvalidEmbedding(format!("embedding {n} does not join stages {n} and {}", n + 1)));
            }
        }
        Ok(Chain { stages, embeddings })
    }

    pub fn stages(&self) -> &[ChainStage] {
        &self.stages
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// The first `k` stages.
    pub fn truncate(&self, k: usize) -> Chain {
        let k = k.clamp(1, self.stages.len());
        Chain {
            stages: self.stages[..k].to_vec(),
            embeddings: self.embeddings[..k - 1].to_vec(),
        }
    }

    /// `φ_{n,k}: A⁽ⁿ⁾ → A⁽ᵏ⁾`.
    pub fn composite(&self, n: usize, k: usize) -> Result<Embedding> {
        let mut emb = Embedding::identity(self.stages[n].shape());
        for e in &self.embeddings[n..k] {
            emb = emb.then(e)?;
        }
        Ok(emb)
    }

    pub fn gns_spaces(&self) -> Result<Vec<GnsSpace>> {
        self.stages
            .iter()
            .map(|s| GnsSpace::algebra(s.shape(), s.trace()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivarianceViolation {
    pub g: usize,
    pub deviation: f64,
}

/// `φ ∘ α_g = α′_g ∘ φ` on `D_{g⁻¹}` and `φ(D_{g⁻¹}) ⊆ D′_{g⁻¹}`.
pub fn check_equivariance(
    emb: &Embedding,
    source: &PartialAction,
    target: &PartialAction,
    tol: f64,
) -> Vec<EquivarianceViolation> {
    let grp = source.group();
    let mut out = Vec::new();
    for g in grp.elements() {
        let gi = grp.inv(g);
        let tgt_dom = target.ideal(gi);
        let mut dev: f64 = 0.0;
        for x in source.ideal(gi).matrix_units() {
            let fx = emb.apply(&x);
            dev = dev.max(tgt_dom.cut(&fx).max_abs_diff(&fx));
            let lhs = emb.apply(&source.apply_cut(g, &x));
            let rhs = target.apply_cut(g, &fx);
            dev = dev.max(lhs.max_abs_diff(&rhs));
        }
        if dev > tol {
            out.push(EquivarianceViolation { g, deviation: dev });
        }
    }
    out
}

/// `Σ a_g δ_g ↦ Σ φ(a_g) δ_g`.
pub fn crossed_embedding(emb: &Embedding, source: &CrossedProduct, target: &CrossedProduct, x: &CrossedElement) -> CrossedElement {
    let coeffs = x.coefficients().iter().map(|a| emb.apply(a)).collect();
    let _ = source;
    target
        .element(coeffs, f64::INFINITY)
        .expect("coefficient count matches")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossedStageReport {
    pub stage: usize,
    pub equivariance: Vec<EquivarianceViolation>,
    pub ideal_deviation: f64,
    pub homomorphism_deviation: f64,
    pub norm_relative_deviation: f64,
    pub expectation_deviation: f64,
    pub trace_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivariantChainReport {
    pub stages: Vec<CrossedStageReport>,
    pub pass: bool,
}

/// Builds every stage's crossed product and certifies each induced
/// embedding: unital *-homomorphism, isometric for reduced norms,
/// intertwines the conditional expectations, and preserves the induced traces.
pub fn equivariant_chain_crossed_products(chain: &Chain, tol: f64) -> Result<EquivariantChainReport> {
    let mut cps = Vec::with_capacity(chain.len());
    let mut traces = Vec::with_capacity(chain.len());
    for s in chain.stages() {
        let action = s
            .action()
            .ok_or_else(|| Error::InvalidAction("every stage needs a partial action".into()))?;
        let cp = CrossedProduct::new(action.clone());
        traces.push(cp.induced_trace(s.trace(), tol)?);
        cps.push(cp);
    }
    let mut reports = Vec::new();
    for (n, emb) in chain.embeddings().iter().enumerate() {
        let (src, tgt) = (&cps[n], &cps[n + 1]);
        let equivariance = check_equivariance(emb, src.action(), tgt.action(), tol);
        let iota = |x: &CrossedElement| crossed_embedding(emb, src, tgt, x);
        let basis: Vec<CrossedElement> = (0..src.dim()).map(|k| src.basis_element(k)).collect();
        let images: Vec<CrossedElement> = basis.iter().map(&iota).collect();

        let mut ideal_deviation: f64 = 0.0;
        let mut hom = iota(&src.unit()).max_abs_diff(&tgt.unit());
        let mut exp_dev: f64 = 0.0;
        let mut trace_dev: f64 = 0.0;
        for (x, ix) in basis.iter().zip(&images) {
            ideal_deviation = ideal_deviation.max(tgt.ideal_violation(ix));
            hom = hom.max(iota(&src.adjoint(x)).max_abs_diff(&tgt.adjoint(ix)));
            let lhs = tgt.conditional_expectation(ix);
            let rhs = emb.apply(&src.conditional_expectation(x));
            exp_dev = exp_dev.max(lhs.max_abs_diff(&rhs));
            trace_dev = trace_dev.max((traces[n + 1].evaluate(ix) - traces[n].evaluate(x)).norm());
        }
        for (x, ix) in basis.iter().zip(&images) {
            for (y, iy) in basis.iter().zip(&images) {
                let lhs = iota(&src.multiply(x, y));
                hom = hom.max(lhs.max_abs_diff(&tgt.multiply(ix, iy)));
            }
        }
        let rep_s = RegularRepresentation::build(src, BaseRepresentation::defining());
        let rep_t = RegularRepresentation::build(tgt, BaseRepresentation::defining());
        let mut norm_dev: f64 = 0.0;
        let probes = basis.iter().cloned().chain(norm_probes(src));
        for x in probes {
            let a = rep_s.reduced_norm(&x);
            let b = rep_t.reduced_norm(&iota(&x));
            norm_dev = norm_dev.max((a - b).abs() / a.max(1e-300));
        }
        let pass = equivariance.is_empty()
            && ideal_deviation <= tol
            && hom <= tol
            && norm_dev <= tol
            && exp_dev <= tol
            && trace_dev <= tol;
        reports.push(CrossedStageReport {
            stage: n,
            equivariance,
            ideal_deviation,
            homomorphism_deviation: hom,
            norm_relative_deviation: norm_dev,
            expectation_deviation: exp_dev,
            trace_deviation: trace_dev,
            pass,
        });
    }
    Ok(EquivariantChainReport {
        pass: reports.iter().all(|r| r.pass),
        stages: reports,
    })
}

/// Deterministic dense elements for norm comparisons.
fn norm_probes(cp: &CrossedProduct) -> Vec<CrossedElement> {
    let n = cp.dim();
    let dense = |phase: f64| {
        let v = crate::CVector::from_fn(n, |k, _| {
            let t = phase * (k as f64 + 1.0);
            linalg::C64::new(t.cos(), t.sin()) / (1.0 + k as f64)
        });
        cp.from_coords(&v).expect("length matches")
    };
    vec![cp.unit(), dense(0.7), dense(1.9)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary, DEFAULT_TOL};
    use crate::partial_action::w1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(d: &[usize]) -> BlockShape {
        BlockShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn identity_embedding_is_valid() {
        let s = shape(&[2, 1]);
        let tau = TracialState::new(&s, vec![0.3, 0.4]).unwrap();
        let e = Embedding::identity(&s);
        assert!(e.validate(&tau, &tau, DEFAULT_TOL).valid);
        let space = GnsSpace::algebra(&s, &tau).unwrap();
        let u = gns_isometry(&e, &space, &space);
        assert!(linalg::max_abs_diff(&u, &CMatrix::identity(5, 5)) < 1e-12);
    }

    #[test]
    fn scalars_into_m2() {
        let (c, m2) = (shape(&[1]), shape(&[2]));
        let e = Embedding::standard(c.clone(), m2.clone(), vec![vec![2]]).unwrap();
        let t1 = TracialState::new(&c, vec![1.0]).unwrap();
        let t2 = TracialState::uniform(&m2);
        assert!(e.validate(&t1, &t2, DEFAULT_TOL).valid);
        let half = Embedding::standard(c, m2, vec![vec![1]]).unwrap();
        let r = half.validate(&t1, &t2, DEFAULT_TOL);
        assert!(!r.valid);
        assert!(r.violations.iter().any(|v| matches!(v, EmbeddingViolation::NotUnital { .. })));
    }

    #[test]
    fn two_into_five_isometry() {
        let (s, t) = (shape(&[1, 1]), shape(&[2, 1]));
        let e = Embedding::standard(s.clone(), t.clone(), vec![vec![1, 1], vec![1, 0]]).unwrap();
        let tt = TracialState::new(&t, vec![0.3, 0.4]).unwrap();
        let ts = TracialState::new(&s, vec![0.7, 0.3]).unwrap();
        assert!(e.validate(&ts, &tt, DEFAULT_TOL).valid);
        let u = gns_isometry(&e, &GnsSpace::algebra(&s, &ts).unwrap(), &GnsSpace::algebra(&t, &tt).unwrap());
        assert_eq!(u.shape(), (5, 2));
        assert!(isometry_deviation(&u) < 1e-12);
    }

    #[test]
    fn composition_and_functoriality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (a, b, c) = (shape(&[1, 2]), shape(&[3, 2]), shape(&[5, 7]));
        let e1 = Embedding::new(a.clone(), b.clone(), vec![vec![1, 1], vec![0, 1]], vec![random_unitary(&mut rng, 3), random_unitary(&mut rng, 2)]).unwrap();
        let e2 = Embedding::new(b.clone(), c.clone(), vec![vec![1, 1], vec![1, 2]], vec![random_unitary(&mut rng, 5), random_unitary(&mut rng, 7)]).unwrap();
        let tc = TracialState::normalized(&c, vec![1.0, 1.0]).unwrap();
        let w = |e: &Embedding, t: &TracialState, s: &BlockShape| {
            let ws = (0..s.num_blocks())
                .map(|j| (0..e.target().num_blocks()).map(|i| e.multiplicity()[i][j] as f64 * t.weight(i)).sum())
                .collect();
            TracialState::new(s, ws).unwrap()
        };
        let tb = w(&e2, &tc, &b);
        let ta = w(&e1, &tb, &a);
        assert!(e1.validate(&ta, &tb, DEFAULT_TOL).valid);
        assert!(e2.validate(&tb, &tc, DEFAULT_TOL).valid);
        let comp = e1.then(&e2).unwrap();
        assert_eq!(comp.multiplicity(), &[vec![1, 2], vec![1, 3]]);
        assert!(comp.validate(&ta, &tc, DEFAULT_TOL).valid);
        let x = AlgebraElement::from_blocks(&a, vec![random_matrix(&mut rng, 1, 1), random_matrix(&mut rng, 2, 2)]).unwrap();
        assert!(comp.apply(&x).max_abs_diff(&e2.apply(&e1.apply(&x))) < 1e-12);

        let (sa, sb, sc) = (
            GnsSpace::algebra(&a, &ta).unwrap(),
            GnsSpace::algebra(&b, &tb).unwrap(),
            GnsSpace::algebra(&c, &tc).unwrap(),
        );
        let u1 = gns_isometry(&e1, &sa, &sb);
        let u2 = gns_isometry(&e2, &sb, &sc);
        let u = gns_isometry(&comp, &sa, &sc);
        assert!(linalg::max_abs_diff(&u, &(&u2 * &u1)) < 1e-12);
        assert!(isometry_deviation(&u) < 1e-12);
        let r = certify_expectation(&comp, &sa, &sc, DEFAULT_TOL);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn non_unital_composition_keeps_padding() {
        let (a, b, c) = (shape(&[1]), shape(&[2]), shape(&[5]));
        let e1 = Embedding::standard(a.clone(), b.clone(), vec![vec![1]]).unwrap();
        let e2 = Embedding::standard(b, c, vec![vec![2]]).unwrap();
        let comp = e1.then(&e2).unwrap();
        let x = AlgebraElement::identity(&a);
        assert!(comp.apply(&x).max_abs_diff(&e2.apply(&e1.apply(&x))) < 1e-15);
    }

    #[test]
    fn extension_examples() {
        let (s, t) = (shape(&[1, 1]), shape(&[2, 1]));
        let e = Embedding::standard(s.clone(), t.clone(), vec![vec![1, 1], vec![1, 0]]).unwrap();
        let tt = TracialState::new(&t, vec![0.3, 0.4]).unwrap();
        let ts = TracialState::new(&s, vec![0.7, 0.3]).unwrap();
        let u = gns_isometry(&e, &GnsSpace::algebra(&s, &ts).unwrap(), &GnsSpace::algebra(&t, &tt).unwrap());
        let p = extend_operator(&CMatrix::identity(2, 2), &u);
        assert!(linalg::max_abs_diff(&p, &(&u * u.adjoint())) < 1e-15);
        assert!(linalg::max_abs_diff(&(&p * &p), &p) < 1e-12);
        assert_eq!(extend_operator(&CMatrix::zeros(2, 2), &u), CMatrix::zeros(5, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let tm = random_matrix(&mut rng, 2, 2);
        assert!((linalg::op_norm(&extend_operator(&tm, &u)) - linalg::op_norm(&tm)).abs() < 1e-12);
    }

    #[test]
    fn lift_examples() {
        let (s, t) = (shape(&[1, 1]), shape(&[2, 1]));
        let e = Embedding::standard(s.clone(), t.clone(), vec![vec![1, 1], vec![1, 0]]).unwrap();
        let tt = TracialState::new(&t, vec![0.3, 0.4]).unwrap();
        let ts = TracialState::new(&s, vec![0.7, 0.3]).unwrap();
        let (ss, st) = (GnsSpace::algebra(&s, &ts).unwrap(), GnsSpace::algebra(&t, &tt).unwrap());
        let id = LinearMap::identity(ss.dim());
        let psi = lift_ucp(&id, &e, &ss, &st);
        assert_eq!(psi, conditional_expectation(&e, &ss, &st));
        let r = certify_lift(&id, &psi, &e, &ss, &st, DEFAULT_TOL);
        assert!(r.pass, "{r:?}");

        let one_s = AlgebraElement::identity(&s);
        let trace_s = LinearMap::on_algebra(&s, |a| one_s.scale(ts.eval_unchecked(a)));
        let one_t = AlgebraElement::identity(&t);
        let trace_t = LinearMap::on_algebra(&t, |a| one_t.scale(tt.eval_unchecked(a)));
        let psi = lift_ucp(&trace_s, &e, &ss, &st);
        assert!(linalg::max_abs_diff(psi.matrix(), trace_t.matrix()) < 1e-12);

        let same = lift_ucp(&trace_s, &Embedding::identity(&s), &ss, &ss);
        assert!(linalg::max_abs_diff(same.matrix(), trace_s.matrix()) < 1e-12);
    }

    fn doubled_w1() -> (PartialAction, Embedding) {
        let src = w1();
        let t = shape(&[2, 2]);
        let emb = Embedding::standard(src.shape().clone(), t.clone(), vec![vec![2, 0], vec![0, 2]]).unwrap();
        let maps = src
            .maps()
            .iter()
            .map(|m| {
                let us = m.domain().iter().map(|_| CMatrix::identity(2, 2)).collect();
                crate::partial_action::PartialMap::new(m.domain().to_vec(), m.targets().to_vec(), us).unwrap()
            })
            .collect();
        let tgt = PartialAction::new(src.group().clone(), t, maps).unwrap();
        (tgt, emb)
    }

    #[test]
    fn w1_doubling_chain_passes() {
        let (tgt, emb) = doubled_w1();
        let src = w1();
        let ts = TracialState::new(src.shape(), vec![0.5, 0.5]).unwrap();
        let tt = TracialState::new(tgt.shape(), vec![0.25, 0.25]).unwrap();
        let stages = vec![
            ChainStage::new(src.shape().clone(), ts, Some(src.clone()), DEFAULT_TOL).unwrap(),
            ChainStage::new(tgt.shape().clone(), tt, Some(tgt.clone()), DEFAULT_TOL).unwrap(),
        ];
        let chain = Chain::new(stages, vec![emb.clone()]).unwrap();
        let report = equivariant_chain_crossed_products(&chain, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");

        // crossing the blocks moves D_g outside D′_g
        let bad = Embedding::standard(src.shape().clone(), tgt.shape().clone(), vec![vec![0, 2], vec![2, 0]]).unwrap();
        let violations = check_equivariance(&bad, &src, &tgt, 1e-9);
        assert!(!violations.is_empty());
    }
}
