//! Dense complex matrix arithmetic and Hilbert-Schmidt geometry.
//!
//! Everything downstream works with square complex matrices and the
//! Hilbert-Schmidt inner product `<a, b> = tr(a† b)`. Positivity and norm
//! decisions go through a Hermitian eigensolver, never through a symmetric
//! solver fed non-Hermitian data: callers first pass the Hermiticity gate,
//! then eigenvalues are taken on the Hermitian part.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix, the carrier of all operator arithmetic.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance knobs used by every numerical decision in the crate.
///
/// The knobs are independent; no ordering between them is assumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity residual bound.
    pub eps_herm: f64,
    /// Allowed magnitude of negative eigenvalues in PSD decisions.
    pub eps_psd: f64,
    /// Singular-value cutoff for span rank decisions.
    pub eps_rank: f64,
    /// Generic equation-residual bound.
    pub eps_residual: f64,
}

impl Default for Tolerances {
    /// Defaults sized for double-precision eigensolvers on ambient
    /// dimension up to ~16, which keep raw errors below 1e-12.
    fn default() -> Self {
        Self {
            eps_herm: 1e-8,
            eps_psd: 1e-8,
            eps_rank: 1e-10,
            eps_residual: 1e-8,
        }
    }
}

impl Tolerances {
    /// One knob for the residual-style bounds, with `eps_rank` kept two
    /// orders of magnitude tighter.
    pub fn uniform(eps: f64) -> Self {
        Self {
            eps_herm: eps,
            eps_psd: eps,
            eps_rank: eps * 1e-2,
            eps_residual: eps,
        }
    }
}

/// Result of a PSD decision: Hermiticity has already been certified,
/// `min_eig` is reported whether or not the test passed.
#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eig: f64,
}

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// n x n zero matrix.
pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// n x n identity.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Matrix unit e_ij (zero-based indices).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// Hilbert-Schmidt inner product `tr(a† b)`, conjugate-linear in `a`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    check_same_dim(a, b)?;
    Ok(a.dotc(b))
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMatrix) -> f64 {
    a.norm()
}

/// Largest singular value, computed as `sqrt(λ_max(a† a))` through the
/// Hermitian eigensolver.
///
/// nalgebra's SVD is avoided throughout this crate: its complex kernel
/// loses accuracy (observed ~1e-4) on matrices with repeated singular
/// values, which is the common case here (projections, structure-constant
/// systems). The Hermitian eigensolver does not share the defect.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let gram = a.adjoint() * a;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
        .max(0.0)
        .sqrt()
}

/// Residual of `a` against its Hermitian part, in operator norm.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    operator_norm(&(a - a.adjoint()))
}

/// Eigendecomposition of the Hermitian part `(a + a†)/2`.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
/// Callers are expected to have certified Hermiticity first.
pub fn hermitian_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// PSD decision. Errors on non-Hermitian input; otherwise reports the
/// minimal eigenvalue of the Hermitian part and whether it clears
/// `-eps_psd`.
pub fn psd_check(a: &CMatrix, tol: &Tolerances) -> Result<PsdReport> {
    let herm = hermiticity_residual(a);
    if herm > tol.eps_herm {
        return Err(Error::NotHermitian { residual: herm });
    }
    let (eigs, _) = hermitian_eigen(a);
    let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PsdReport {
        is_psd: min_eig >= -tol.eps_psd,
        min_eig,
    })
}

/// Hermitian square root of a PSD matrix.
///
/// Eigenvalues in `[-eps_psd, 0)` are clamped to zero; anything below
/// `-eps_psd` rejects the input.
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let herm = hermiticity_residual(a);
    if herm > tol.eps_herm {
        return Err(Error::NotHermitian { residual: herm });
    }
    let (eigs, vecs) = hermitian_eigen(a);
    let n = a.nrows();
    let mut root = zeros(n);
    for (k, &lambda) in eigs.iter().enumerate() {
        if lambda < -tol.eps_psd {
            return Err(Error::NotPsd { min_eig: lambda });
        }
        let clamped = lambda.max(0.0);
        let col = vecs.column(k);
        let scale = Complex64::new(clamped.sqrt(), 0.0);
        for i in 0..n {
            for j in 0..n {
                root[(i, j)] += scale * col[i] * col[j].conj();
            }
        }
    }
    Ok(root)
}

/// Assemble a k x k array of n x n blocks into the (kn) x (kn) block matrix.
pub fn ampliate(blocks: &[Vec<CMatrix>]) -> Result<CMatrix> {
    let k = blocks.len();
    if k == 0 {
        return Err(Error::RaggedBlocks);
    }
    let n = blocks[0][0].nrows();
    for row in blocks {
        if row.len() != k {
            return Err(Error::RaggedBlocks);
        }
        for b in row {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::RaggedBlocks);
            }
        }
    }
    let mut out = zeros(k * n);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, b) in row.iter().enumerate() {
            out.view_mut((bi * n, bj * n), (n, n)).copy_from(b);
        }
    }
    Ok(out)
}

/// Extract the (i, j) block of size n x n from an ampliated matrix.
pub fn block_of(m: &CMatrix, n: usize, i: usize, j: usize) -> CMatrix {
    m.view((i * n, j * n), (n, n)).into_owned()
}

/// Eigenvalue cutoff for rank decisions on a Gram matrix: the squared
/// singular-value cutoff, floored at the noise level of the eigensolver.
fn gram_cutoff(sigma_cutoff: f64, lambda_max: f64) -> f64 {
    (sigma_cutoff * sigma_cutoff).max(1e-14 * lambda_max.max(1.0))
}

/// Min-norm least-squares solution of `m x = b` via the normal equations,
/// with singular values at or below `cutoff` treated as zero. The Gram
/// matrix goes through the Hermitian eigensolver, so degenerate spectra
/// are handled exactly as reliably as every other PSD decision here.
pub fn least_squares(
    m: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    cutoff: f64,
) -> DVector<Complex64> {
    let gram = m.adjoint() * m;
    let rhs = m.adjoint() * b;
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let lambda_cut = gram_cutoff(cutoff, lambda_max);
    let mut x = DVector::<Complex64>::zeros(m.ncols());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > lambda_cut {
            let v = eig.eigenvectors.column(i);
            let coeff = v.dotc(&rhs) / Complex64::new(lambda, 0.0);
            x += v * coeff;
        }
    }
    x
}

/// Moore-Penrose pseudo-inverse `(m† m)⁺ m†`, same route as
/// [`least_squares`].
pub fn pseudo_inverse(m: &DMatrix<Complex64>, cutoff: f64) -> DMatrix<Complex64> {
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let lambda_cut = gram_cutoff(cutoff, lambda_max);
    let p = m.ncols();
    let mut gram_pinv = DMatrix::<Complex64>::zeros(p, p);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > lambda_cut {
            let v = eig.eigenvectors.column(i);
            gram_pinv.gerc(
                Complex64::new(1.0 / lambda, 0.0),
                &v,
                &v,
                Complex64::new(1.0, 0.0),
            );
        }
    }
    gram_pinv * m.adjoint()
}

/// Orthonormal null-space basis of `m` (column-coefficient space), via
/// the Hermitian eigendecomposition of `m† m`.
pub fn null_space(m: &DMatrix<Complex64>, cutoff: f64) -> Vec<DVector<Complex64>> {
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let lambda_cut = gram_cutoff(cutoff, lambda_max);
    let mut out = Vec::new();
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= lambda_cut {
            out.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    out
}

/// Column-stacked vectorization, `vec(x)[j*n + i] = x[(i, j)]`.
pub fn vectorize(a: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<Complex64>, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}
