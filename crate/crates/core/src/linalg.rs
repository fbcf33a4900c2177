//! Dense complex linear algebra shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default scale-relative tolerance for positivity and equality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "matrix shapes differ");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of the hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let f = faer::Mat::<C64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)]);
    let mut ev: Vec<f64> = match f.self_adjoint_eigenvalues(faer::Side::Lower) {
        Ok(v) => v,
        Err(_) => vec![f64::NAN; h.nrows()],
    };
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Smallest eigenvalue of the hermitian part; `0` for an empty matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let f = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut sv: Vec<f64> = match f.singular_values() {
        Ok(v) => v,
        Err(_) => vec![f64::NAN; m.nrows().min(m.ncols())],
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsdCertificate {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub hermitian_deviation: f64,
    pub tolerance: f64,
}

/// PSD test: hermitian within `tol·(1+‖m‖)` and every eigenvalue `≥ −tol·(1+‖m‖)`.
pub fn psd_check(m: &CMatrix, tol: f64) -> PsdCertificate {
    let herm = hermitian_deviation(m);
    let min = min_eigenvalue(m);
    let scale = 1.0 + op_norm(m);
    PsdCertificate {
        pass: herm <= tol * scale && min >= -tol * scale,
        min_eigenvalue: min,
        hermitian_deviation: herm,
        tolerance: tol,
    }
}

pub fn unitary_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let id = CMatrix::identity(u.nrows(), u.nrows());
    max_abs_diff(&(u * u.adjoint()), &id).max(max_abs_diff(&(u.adjoint() * u), &id))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Matrix with i.i.d. standard complex Gaussian-like entries (Box–Muller).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let (x, y) = gaussian_pair(rng);
        C64::new(x, y)
    })
}

fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    (r * t.cos(), r * t.sin())
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = random_matrix(rng, n, n);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of the
/// hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let h = to_faer(&hermitian_part(m));
    match h.self_adjoint_eigen(faer::Side::Lower) {
        Ok(evd) => {
            let values = (0..n).map(|i| evd.S()[i].re).collect();
            (values, from_faer(evd.U()))
        }
        Err(_) => (vec![f64::NAN; n], CMatrix::from_element(n, n, C64::new(f64::NAN, 0.0))),
    }
}

/// Thin SVD `m = U diag(σ) V*` with `σ` descending.
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let k = m.nrows().min(m.ncols());
    match to_faer(m).thin_svd() {
        Ok(svd) => {
            let values = (0..k).map(|i| svd.S()[i].re).collect();
            (from_faer(svd.U()), values, from_faer(svd.V()))
        }
        Err(_) => {
            let nan = C64::new(f64::NAN, 0.0);
            (
                CMatrix::from_element(m.nrows(), k, nan),
                vec![f64::NAN; k],
                CMatrix::from_element(m.ncols(), k, nan),
            )
        }
    }
}

/// Inverse square root of a hermitian positive-definite matrix.
pub fn hermitian_inv_sqrt(m: &CMatrix) -> Option<CMatrix> {
    let (values, vectors) = hermitian_eigen(m);
    if values.iter().any(|&l| l.is_nan() || l <= 0.0) {
        return None;
    }
    let d = CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|l| real(1.0 / l.sqrt()))));
    Some(&vectors * d * vectors.adjoint())
}

/// Orthonormal basis (as columns) of the range of a hermitian projection-like matrix:
/// eigenvectors with eigenvalue above `threshold`.
pub fn range_basis(m: &CMatrix, threshold: f64) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (values, vectors) = hermitian_eigen(m);
    let cols: Vec<usize> = (0..n).filter(|&i| values[i] > threshold).collect();
    let mut out = CMatrix::zeros(n, cols.len());
    for (k, &c) in cols.iter().enumerate() {
        out.set_column(k, &vectors.column(c));
    }
    out
}

/// Rank by singular values above `tol·max(1, σ_max)`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let cutoff = tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}
