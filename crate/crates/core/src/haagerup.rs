//! Positive-definite functions relative to a partial action, the UCP maps
//! they induce on the crossed product, and the quantitative checks that
//! carry approximation data between `A`, the action and `A ⋊ G`.
//!
//! A center-valued function `h: G → Z(A)` with `h(g) ∈ D_g` is stored as
//! one scalar per block and group element.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::crossed_product::{CrossedProduct, InducedTrace};
use crate::gns::{CpCertificate, GnsSpace, LinearMap, TauDecreasingCertificate, UcpCertificate};
use crate::group::ScalarPDFunction;
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::partial_action::PartialAction;
use crate::{Error, Result};

/// `h: G → Z(A)`, `values[g][b]` the scalar of `h(g)` on block `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterValuedPDFunction {
    values: Vec<Vec<C64>>,
}

impl CenterValuedPDFunction {
    /// Rejects values supported outside `D_g` (beyond `tol`); such entries are
    /// otherwise zeroed exactly.
    pub fn new(action: &PartialAction, mut values: Vec<Vec<C64>>, tol: f64) -> Result<Self> {
        let k = action.shape().num_blocks();
        if values.len() != action.group().order() || values.iter().any(|v| v.len() != k) {
            return Err(Error::Dimension(format!(
                "expected {} x {} scalars",
                action.group().order(),
                k
            )));
        }
        for (g, v) in values.iter_mut().enumerate() {
            let ideal = action.ideal(g);
            let bad: Vec<usize> = (0..k)
                .filter(|&b| !ideal.contains_block(b) && v[b].norm() > tol)
                .collect();
            if !bad.is_empty() {
                return Err(Error::DomainViolation { g, blocks: bad });
            }
            for (b, z) in v.iter_mut().enumerate() {
                if !ideal.contains_block(b) {
                    *z = ZERO;
                }
            }
        }
        Ok(CenterValuedPDFunction { values })
    }

    pub fn from_elements(action: &PartialAction, elems: &[AlgebraElement], tol: f64) -> Result<Self> {
        let values = elems
            .iter()
            .map(|a| a.center_component(tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(action, values, tol)
    }

    /// `h(g) = η(g)·1_g`.
    pub fn from_scalar(action: &PartialAction, eta: &ScalarPDFunction) -> Self {
        let k = action.shape().num_blocks();
        let values = action
            .group()
            .elements()
            .map(|g| {
                let ideal = action.ideal(g);
                (0..k)
                    .map(|b| if ideal.contains_block(b) { eta.value(g) } else { ZERO })
                    .collect()
            })
            .collect();
        CenterValuedPDFunction { values }
    }

    /// `h(g) = 1_g`.
    pub fn units(action: &PartialAction) -> Self {
        Self::from_scalar(action, &ScalarPDFunction::constant_one(action.group()))
    }

    /// `h(e) = 1`, `h(g) = 0` otherwise.
    pub fn delta_identity(action: &PartialAction) -> Self {
        Self::from_scalar(action, &ScalarPDFunction::delta_identity(action.group()))
    }

    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }

    pub fn value(&self, g: usize) -> &[C64] {
        &self.values[g]
    }

    pub fn element(&self, g: usize, shape: &BlockShape) -> AlgebraElement {
        AlgebraElement::central(shape, &self.values[g]).expect("one scalar per block")
    }

    /// `g ↦ h(g)h′(g)`.
    pub fn schur_product(&self, other: &Self) -> Self {
        CenterValuedPDFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).collect())
                .collect(),
        }
    }

    pub fn op_norm(&self, g: usize) -> f64 {
        self.values[g].iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn two_norm(&self, g: usize, shape: &BlockShape, trace: &TracialState) -> f64 {
        self.values[g]
            .iter()
            .enumerate()
            .map(|(b, z)| trace.weight(b) * shape.dim(b) as f64 * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// How the entries `a_ij` of the action-twisted Gram matrix are formed from
/// `k = g_i⁻¹g_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdConvention {
    /// `α_{g_j}(h(k))` if `h(k) ∈ D_{g_j⁻¹}`, else `0`. Named `paper` on the command line.
    #[serde(rename = "paper")]
    Literal,
    /// `α_{g_i}(1_{g_i⁻¹}·h(k))`, equal to `η(k)·1_{g_i}1_{g_j}` for `h = η·1_g`.
    Cutdown,
    /// `α_{g_j}(1_{g_j⁻¹}·h(k))`; not hermitian in general.
    ColumnCutdown,
}

impl fmt::Display for PdConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PdConvention::Literal => "paper",
            PdConvention::Cutdown => "cutdown",
            PdConvention::ColumnCutdown => "column-cutdown",
        })
    }
}

/// `α_g(1_{g⁻¹}·c)` for central `c` given by block scalars.
fn act_central(action: &PartialAction, g: usize, s: &[C64]) -> Vec<C64> {
    let map = action.map(g);
    let mut out = vec![ZERO; s.len()];
    for (&i, &j) in map.domain().iter().zip(map.targets()) {
        out[j] = s[i];
    }
    out
}

fn supported_in(action: &PartialAction, g: usize, s: &[C64], tol: f64) -> bool {
    let ideal = action.ideal(g);
    s.iter()
        .enumerate()
        .all(|(b, z)| ideal.contains_block(b) || z.norm() <= tol)
}

/// The matrix `(a_ij) ∈ Mat_n(A)` for a tuple of group elements, stored as
/// one scalar `n × n` matrix per block of `A` (every `a_ij` is central).
#[derive(Clone, Debug, PartialEq)]
pub struct PdMatrix {
    pub tuple: Vec<usize>,
    pub blocks: Vec<CMatrix>,
}

impl PdMatrix {
    /// The element of `Mat_n(A)` in the defining representation, of size `n·Σn_b`.
    pub fn to_matrix(&self, shape: &BlockShape) -> CMatrix {
        let n = self.tuple.len();
        let f = shape.fiber_dim();
        let mut out = CMatrix::zeros(n * f, n * f);
        for i in 0..n {
            for j in 0..n {
                for (b, m) in self.blocks.iter().enumerate() {
                    let off = shape.fiber_offset(b);
                    for t in 0..shape.dim(b) {
                        out[(i * f + off + t, j * f + off + t)] = m[(i, j)];
                    }
                }
            }
        }
        out
    }
}

pub fn pd_matrix(
    action: &PartialAction,
    h: &CenterValuedPDFunction,
    tuple: &[usize],
    convention: PdConvention,
    tol: f64,
) -> PdMatrix {
    let grp = action.group();
    let k = action.shape().num_blocks();
    let n = tuple.len();
    let mut blocks = vec![CMatrix::zeros(n, n); k];
    for (i, &gi) in tuple.iter().enumerate() {
        for (j, &gj) in tuple.iter().enumerate() {
            let hk = h.value(grp.mul(grp.inv(gi), gj));
            let entry = match convention {
                PdConvention::Cutdown => act_central(action, gi, hk),
                PdConvention::ColumnCutdown => act_central(action, gj, hk),
                PdConvention::Literal => {
                    if supported_in(action, grp.inv(gj), hk, tol) {
                        act_central(action, gj, hk)
                    } else {
                        vec![ZERO; k]
                    }
                }
            };
            for (b, z) in entry.into_iter().enumerate() {
                blocks[b][(i, j)] = z;
            }
        }
    }
    PdMatrix {
        tuple: tuple.to_vec(),
        blocks,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdCertificate {
    pub convention: PdConvention,
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub hermitian_deviation: f64,
    /// Minimal eigenvalue of the scalar matrix on each block.
    pub per_block_min: Vec<f64>,
    pub tolerance: f64,
}

/// PSD test of the matrix over the tuple listing all of `G`; any other tuple
/// gives a principal submatrix with duplicated rows and columns.
pub fn is_pd_wrt_action(
    action: &PartialAction,
    h: &CenterValuedPDFunction,
    convention: PdConvention,
    tol: f64,
) -> PdCertificate {
    let tuple: Vec<usize> = action.group().elements().collect();
    let m = pd_matrix(action, h, &tuple, convention, tol);
    let full = linalg::psd_check(&m.to_matrix(action.shape()), tol);
    PdCertificate {
        convention,
        pass: full.pass,
        min_eigenvalue: full.min_eigenvalue,
        hermitian_deviation: full.hermitian_deviation,
        per_block_min: m.blocks.iter().map(linalg::min_eigenvalue).collect(),
        tolerance: tol,
    }
}

/// `Σ a_g δ_g ↦ Σ_{g ∈ F} φ(a_g)h(g)δ_g`, `F` given by `keep` (all of `G` if `None`).
pub fn coefficientwise_map(
    cp: &CrossedProduct,
    phi: &LinearMap,
    h: &CenterValuedPDFunction,
    keep: Option<&[bool]>,
) -> LinearMap {
    let shape = cp.shape().clone();
    let hs: Vec<AlgebraElement> = cp.group().elements().map(|g| h.element(g, &shape)).collect();
    LinearMap::on_crossed(cp, |x| {
        let mut out = cp.zero();
        let coeffs: Vec<AlgebraElement> = x
            .coefficients()
            .iter()
            .enumerate()
            .map(|(g, a)| {
                if keep.is_some_and(|f| !f[g]) {
                    AlgebraElement::zero(&shape)
                } else {
                    &phi.apply_algebra(a) * &hs[g]
                }
            })
            .collect();
        for (g, c) in coeffs.into_iter().enumerate() {
            let mono = cp.monomial(g, &c, f64::INFINITY).expect("h(g) ∈ D_g");
            out = out.add(&mono);
        }
        out
    })
}

/// `max_{g, E} ‖φ(α_g(E·1_{g⁻¹})) − α_g(φ(E)·1_{g⁻¹})‖_max` over matrix units `E`.
/// Zero means `φ` commutes with every `α_g` and with the cut-downs by `1_g`.
pub fn equivariance_deviation(action: &PartialAction, phi: &LinearMap) -> f64 {
    let units = AlgebraElement::matrix_units(action.shape());
    let images: Vec<AlgebraElement> = units.iter().map(|e| phi.apply_algebra(e)).collect();
    let mut dev: f64 = 0.0;
    for g in action.group().elements() {
        for (e, pe) in units.iter().zip(&images) {
            let lhs = phi.apply_algebra(&action.apply_cut(g, e));
            let rhs = action.apply_cut(g, pe);
            dev = dev.max(lhs.max_abs_diff(&rhs));
        }
    }
    dev
}

/// Checks run on the inputs of [`induce_ucp_on_crossed`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducePreconditions {
    pub phi_ucp: UcpCertificate,
    pub phi_equivariance_deviation: f64,
    pub h_pd: PdCertificate,
    pub h_identity_deviation: f64,
}

/// `Φ(Σ a_g δ_g) = Σ φ(a_g)h(g)δ_g` after certifying that `φ` is UCP and
/// commutes with the action, `h` is positive definite (cutdown convention)
/// and `h(e) = 1`.
///
/// UCP alone does not make `Φ` completely positive: a UCP map that moves
/// mass between blocks of one orbit already breaks `Φ(x*) = Φ(x)*`.
pub fn induce_ucp_on_crossed(
    cp: &CrossedProduct,
    a_space: &GnsSpace,
    phi: &LinearMap,
    h: &CenterValuedPDFunction,
    tol: f64,
) -> Result<(LinearMap, InducePreconditions)> {
    let pre = InducePreconditions {
        phi_ucp: a_space.check_ucp(phi, tol),
        phi_equivariance_deviation: equivariance_deviation(cp.action(), phi),
        h_pd: is_pd_wrt_action(cp.action(), h, PdConvention::Cutdown, tol),
        h_identity_deviation: h
            .value(cp.group().identity())
            .iter()
            .fold(0.0, |m, z| m.max((z - ONE).norm())),
    };
    if !pre.phi_ucp.pass {
        return Err(Error::Precondition {
            what: "φ is not unital completely positive".into(),
            certificate: pre.phi_ucp.cp.min_choi_eigenvalue.min(-pre.phi_ucp.unital_deviation),
        });
    }
    if pre.phi_equivariance_deviation > tol {
        return Err(Error::Precondition {
            what: "φ does not commute with the action".into(),
            certificate: pre.phi_equivariance_deviation,
        });
    }
    if !pre.h_pd.pass {
        return Err(Error::Precondition {
            what: "h is not positive definite with respect to the action".into(),
            certificate: pre.h_pd.min_eigenvalue,
        });
    }
    if pre.h_identity_deviation > tol {
        return Err(Error::Precondition {
            what: "h(e) is not the unit".into(),
            certificate: pre.h_identity_deviation,
        });
    }
    Ok((coefficientwise_map(cp, phi, h, None), pre))
}

/// Postconditions of the induced map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducedReport {
    pub ucp: UcpCertificate,
    pub tau_decreasing: Option<TauDecreasingCertificate>,
    pub pass: bool,
}

/// Certifies `Φ` as UCP on the represented crossed product and, when `φ` is
/// τ-decreasing, as τ̃-decreasing.
pub fn certify_induced(
    a_space: &GnsSpace,
    cp_space: &GnsSpace,
    phi: &LinearMap,
    big_phi: &LinearMap,
    tol: f64,
) -> InducedReport {
    let ucp = cp_space.check_ucp(big_phi, tol);
    let tau_decreasing = a_space
        .check_tau_decreasing(phi, tol)
        .pass
        .then(|| cp_space.check_tau_decreasing(big_phi, tol));
    let pass = ucp.pass && tau_decreasing.is_none_or(|c| c.pass);
    InducedReport {
        ucp,
        tau_decreasing,
        pass,
    }
}

/// Measured truncation error against the available bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    /// `‖Φ̃ − T̃‖`.
    pub measured: f64,
    /// `‖φ̃ − φ̃_approx‖`.
    pub epsilon_phi: f64,
    /// `‖φ̃‖`.
    pub phi_norm: f64,
    /// `sup_g ‖h(g)‖²_op`.
    pub k_inf: f64,
    /// `sup_g ‖h(g)‖²_{2,τ}`.
    pub k_two: f64,
    /// `max_{g∉F} ‖h(g)‖_op`.
    pub delta_op: f64,
    /// `max_{g∉F} ‖h(g)‖_{2,τ}`.
    pub delta_two: f64,
    /// `sqrt(2(ε_φ²K∞ + δ_op²‖φ̃‖²))`.
    pub bound: f64,
    pub holds: bool,
    /// Same expression with the 2-norm `δ`; not a valid bound in general.
    pub bound_two_norm_delta: f64,
    pub holds_two_norm_delta: bool,
    /// `sqrt(2(ε_φ²K₂ + δ₂²‖φ̃‖²))`, from the estimate `τ(h*c*ch) ≤ τ(c*c)τ(h*h)`.
    pub bound_trace_product: f64,
    pub holds_trace_product: bool,
    /// `(ε·(2(K₂+‖φ̃‖))^{1/2})^{1/2}` with `ε = max(ε_φ, δ₂)`, read as a bound on the squared norm.
    pub bound_displayed: f64,
    pub holds_displayed: bool,
    pub rank: usize,
    pub rank_limit: usize,
    pub rank_ok: bool,
}

/// Builds `T(Σ a_g δ_g) = Σ_{g∈F} φ_approx(a_g)h(g)δ_g` and compares
/// `‖Φ̃ − T̃‖` with the truncation bounds. Violations are reported, not raised.
#[allow(clippy::too_many_arguments)]
pub fn truncation_estimate(
    cp: &CrossedProduct,
    a_space: &GnsSpace,
    cp_space: &GnsSpace,
    trace: &TracialState,
    phi: &LinearMap,
    phi_approx: &LinearMap,
    h: &CenterValuedPDFunction,
    in_f: &[bool],
    slack: f64,
) -> (LinearMap, TruncationReport) {
    let big_phi = coefficientwise_map(cp, phi, h, None);
    let t = coefficientwise_map(cp, phi_approx, h, Some(in_f));
    let measured = cp_space.operator_norm(&big_phi.sub(&t));
    let epsilon_phi = a_space.operator_norm(&phi.sub(phi_approx));
    let phi_norm = a_space.operator_norm(phi);
    let shape = cp.shape();
    let grp = cp.group();
    let k_inf = grp.elements().map(|g| h.op_norm(g).powi(2)).fold(0.0, f64::max);
    let k_two = grp
        .elements()
        .map(|g| h.two_norm(g, shape, trace).powi(2))
        .fold(0.0, f64::max);
    let outside = grp.elements().filter(|&g| !in_f[g]);
    let delta_op = outside.clone().map(|g| h.op_norm(g)).fold(0.0, f64::max);
    let delta_two = outside.map(|g| h.two_norm(g, shape, trace)).fold(0.0, f64::max);

    let ep2 = epsilon_phi * epsilon_phi;
    let pn2 = phi_norm * phi_norm;
    let bound = (2.0 * (ep2 * k_inf + delta_op * delta_op * pn2)).sqrt();
    let bound_two_norm_delta = (2.0 * (ep2 * k_inf + delta_two * delta_two * pn2)).sqrt();
    let bound_trace_product = (2.0 * (ep2 * k_two + delta_two * delta_two * pn2)).sqrt();
    let eps = epsilon_phi.max(delta_two);
    let bound_displayed = (eps * (2.0 * (k_two + phi_norm)).sqrt()).sqrt();

    let rank = linalg::numerical_rank(&cp_space.induce_operator(&t), 1e-10);
    let rank_approx = linalg::numerical_rank(&a_space.induce_operator(phi_approx), 1e-10);
    let rank_limit = rank_approx * in_f.iter().filter(|&&b| b).count();
    let report = TruncationReport {
        measured,
        epsilon_phi,
        phi_norm,
        k_inf,
        k_two,
        delta_op,
        delta_two,
        bound,
        holds: measured <= bound + slack,
        bound_two_norm_delta,
        holds_two_norm_delta: measured <= bound_two_norm_delta + slack,
        bound_trace_product,
        holds_trace_product: measured <= bound_trace_product + slack,
        bound_displayed,
        holds_displayed: measured <= bound_displayed + slack,
        rank,
        rank_limit,
        rank_ok: rank <= rank_limit,
    };
    (t, report)
}

/// `φ(a) = E(Φ(a δ_e))`.
pub fn compress_to_algebra(cp: &CrossedProduct, big_phi: &LinearMap) -> LinearMap {
    LinearMap::on_algebra(cp.shape(), |a| {
        cp.conditional_expectation(&big_phi.apply_crossed(cp, &cp.embed(a)))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressionReport {
    pub ucp: UcpCertificate,
    pub tau_decreasing: TauDecreasingCertificate,
    /// `max_a (‖φ(a)−a‖₂,τ − ‖Φ(aδ_e)−aδ_e‖₂,τ̃)⁺` over matrix units.
    pub contraction_deviation: f64,
    pub pass: bool,
}

pub fn certify_compression(
    cp: &CrossedProduct,
    a_space: &GnsSpace,
    cp_space: &GnsSpace,
    big_phi: &LinearMap,
    phi: &LinearMap,
    tol: f64,
) -> CompressionReport {
    let ucp = a_space.check_ucp(phi, tol);
    let tau_decreasing = a_space.check_tau_decreasing(phi, tol);
    let mut contraction_deviation: f64 = 0.0;
    for a in AlgebraElement::matrix_units(cp.shape()) {
        let ac = a.to_coords();
        let lhs = a_space.two_norm(&(phi.apply(&ac) - &ac));
        let x = cp.to_coords(&cp.embed(&a));
        let rhs = cp_space.two_norm(&(big_phi.apply(&x) - &x));
        contraction_deviation = contraction_deviation.max(lhs - rhs);
    }
    CompressionReport {
        pass: ucp.pass && tau_decreasing.pass && contraction_deviation <= tol,
        ucp,
        tau_decreasing,
        contraction_deviation,
    }
}

/// `η(g) = τ̃(Φ(1_gδ_g)(1_gδ_g)*)`.
pub fn eta_from_ucp(cp: &CrossedProduct, trace: &InducedTrace, big_phi: &LinearMap) -> ScalarPDFunction {
    let values = cp
        .group()
        .elements()
        .map(|g| {
            let v = cp
                .monomial(g, &cp.action().unit(g), f64::INFINITY)
                .expect("1_g ∈ D_g");
            trace.evaluate(&cp.multiply(&big_phi.apply_crossed(cp, &v), &cp.adjoint(&v)))
        })
        .collect();
    ScalarPDFunction::new(cp.group(), values).expect("one value per element")
}

/// `h(g) = η(g)·1_g` with its positive-definiteness certificate (cutdown).
pub fn h_from_eta(
    action: &PartialAction,
    eta: &ScalarPDFunction,
    tol: f64,
) -> (CenterValuedPDFunction, PdCertificate) {
    let h = CenterValuedPDFunction::from_scalar(action, eta);
    let cert = is_pd_wrt_action(action, &h, PdConvention::Cutdown, tol);
    (h, cert)
}

/// One `(φ_n, h_n, ε_n)` stage of approximation data.
#[derive(Clone, Debug)]
pub struct HaagerupStage {
    pub phi: LinearMap,
    pub h: CenterValuedPDFunction,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub epsilon: f64,
    pub phi_ucp: UcpCertificate,
    pub phi_tau_decreasing: TauDecreasingCertificate,
    pub phi_equivariance_deviation: f64,
    pub h_pd: PdCertificate,
    pub big_phi_cp: Option<CpCertificate>,
    /// `max_k ‖(Φ̃ − 1)u_k‖` over the orthonormal matrix-unit basis of `L²(A⋊G)`.
    pub big_phi_deviation: f64,
    /// `max_k ‖φ̃(u_k)‖₂,τ` over the orthonormal basis of `L²(A)`.
    pub phi_constant: f64,
    /// `max_g ‖h(g) − 1‖₂,τ`.
    pub h_deviation_from_one: f64,
    /// `max_g ‖h(g) − 1_g‖₂,τ`.
    pub h_deviation_from_units: f64,
    /// Ranks of `Φ̃` at `ε_n`, `ε_n/10`, `ε_n/100`.
    pub rank_curve: Vec<(f64, usize)>,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaagerupReport {
    pub stages: Vec<StageReport>,
    pub pass: bool,
}

/// Per-stage quantitative rendering of approximation data: each `φ_n` UCP and
/// τ-decreasing, each `h_n` positive definite with `h_n(e) = 1`, and the
/// induced `Φ_n` within `ε_n` of the identity on the orthonormal basis.
pub fn certify_haagerup_data(
    cp: &CrossedProduct,
    trace: &TracialState,
    stages: &[HaagerupStage],
    tol: f64,
) -> Result<HaagerupReport> {
    let a_space = GnsSpace::algebra(cp.shape(), trace)?;
    let tt = cp.induced_trace(trace, tol)?;
    let cp_space = GnsSpace::crossed(cp, &tt)?;
    let shape = cp.shape();
    let grp = cp.group();
    let one = AlgebraElement::identity(shape);
    let mut reports = Vec::with_capacity(stages.len());
    for (n, st) in stages.iter().enumerate() {
        let mut failures = Vec::new();
        let phi_ucp = a_space.check_ucp(&st.phi, tol);
        let phi_tau_decreasing = a_space.check_tau_decreasing(&st.phi, tol);
        let h_pd = is_pd_wrt_action(cp.action(), &st.h, PdConvention::Cutdown, tol);
        if !phi_ucp.pass {
            failures.push("phi is not UCP".to_string());
        }
        if !phi_tau_decreasing.pass {
            failures.push("phi is not tau-decreasing".to_string());
        }
        if !h_pd.pass {
            failures.push("h is not positive definite".to_string());
        }
        let big_phi = coefficientwise_map(cp, &st.phi, &st.h, None);
        let op = cp_space.induce_operator(&big_phi) - CMatrix::identity(cp.dim(), cp.dim());
        let big_phi_deviation = (0..cp.dim())
            .map(|k| op.column(k).norm())
            .fold(0.0, f64::max);
        let big_phi_cp = (phi_ucp.pass && h_pd.pass)
            .then(|| cp_space.check_completely_positive(&big_phi, tol));
        if big_phi_cp.is_some_and(|c| !c.pass) {
            failures.push("induced map is not completely positive".to_string());
        }
        if big_phi_deviation > st.epsilon + tol {
            failures.push(format!(
                "induced map deviates from the identity by {big_phi_deviation:e} > {:e}",
                st.epsilon
            ));
        }
        let phi_op = a_space.induce_operator(&st.phi);
        let phi_constant = (0..a_space.dim())
            .map(|k| phi_op.column(k).norm())
            .fold(0.0, f64::max);
        let mut h_one: f64 = 0.0;
        let mut h_units: f64 = 0.0;
        for g in grp.elements() {
            let hg = st.h.element(g, shape);
            h_one = h_one.max(trace.two_norm(&(&hg - &one)));
            h_units = h_units.max(trace.two_norm(&(&hg - &cp.action().unit(g))));
        }
        let rank_curve = cp_space.rank_curve(
            &big_phi,
            &[st.epsilon, st.epsilon / 10.0, st.epsilon / 100.0],
        );
        reports.push(StageReport {
            stage: n,
            epsilon: st.epsilon,
            pass: failures.is_empty(),
            phi_ucp,
            phi_tau_decreasing,
            phi_equivariance_deviation: equivariance_deviation(cp.action(), &st.phi),
            h_pd,
            big_phi_cp,
            big_phi_deviation,
            phi_constant,
            h_deviation_from_one: h_one,
            h_deviation_from_units: h_units,
            rank_curve,
            failures,
        });
    }
    Ok(HaagerupReport {
        pass: reports.iter().all(|r| r.pass),
        stages: reports,
    })
}

/// Coordinates of `Σ_g c_g 1_g δ_g`, used to probe maps on the partial isometries.
pub fn unit_monomials(cp: &CrossedProduct, c: &[C64]) -> CVector {
    let mut x = cp.zero();
    for g in cp.group().elements() {
        let m = cp
            .monomial(g, &cp.action().unit(g).scale(c[g]), f64::INFINITY)
            .expect("1_g ∈ D_g");
        x = x.add(&m);
    }
    cp.to_coords(&x)
}
