//! Linear maps on M_n represented by their Choi matrix, with optional
//! Kraus form, hypothesis certification and the Kadison-Schwarz estimate.
//!
//! The Choi matrix is the canonical stored representation: complete
//! positivity is a single PSD decision on it, and the Kraus form is
//! derived from its eigendecomposition when needed. Maps always have
//! domain = codomain = M_n; block-diagonal supports emulate direct sums.

use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, hermiticity_residual, hs_norm, identity, matrix_unit, operator_norm,
    psd_check, psd_sqrt, vectorize, zeros, CMatrix, Tolerances,
};

/// A linear map on M_n. `choi` is the n^2 x n^2 matrix whose (i, j) block
/// is the image of the matrix unit e_ij.
#[derive(Debug, Clone)]
pub struct CpMap {
    dim: usize,
    choi: CMatrix,
    kraus: Option<Vec<CMatrix>>,
    cert: OnceLock<ProjectionCertificate>,
}

/// Certified facts about a map. Residuals are recorded whether or not the
/// corresponding flag holds, so a report stays self-explanatory.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCertificate {
    /// Complete positivity: Choi matrix PSD (and Hermitian).
    pub cp: bool,
    pub choi_min_eig: f64,
    pub choi_herm_residual: f64,
    /// Contractivity via |phi(I)| <= 1. Only decided for CP maps, where
    /// the completely bounded norm equals |phi(I)|; `None` = undetermined.
    pub contractive: Option<bool>,
    pub norm_of_unit_image: f64,
    /// Idempotency over the matrix-unit basis.
    pub idempotent: bool,
    pub idem_residual: f64,
    pub unital: bool,
    pub unit_residual: f64,
    /// Adjoint preservation over the matrix-unit basis. Certified, never
    /// assumed from positivity.
    pub star_preserving: bool,
    pub star_residual: f64,
}

impl ProjectionCertificate {
    /// All three hypotheses needed by the range-algebra construction.
    pub fn is_projection(&self) -> bool {
        self.cp && self.contractive == Some(true) && self.idempotent
    }
}

/// Outcome of a Kadison-Schwarz probe.
#[derive(Debug, Clone, Copy)]
pub struct KsCheck {
    pub holds: bool,
    /// Min eigenvalue of `|z^{1/2} y|^2 phi(z) - phi(zy) phi(zy)†`.
    pub min_eig: f64,
}

impl CpMap {
    /// Build from Kraus operators `x ↦ Σ_k K_k x K_k†`. The Choi matrix is
    /// synthesized and stored alongside the Kraus form.
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::EmptyKraus);
        }
        for k in &kraus {
            if k.nrows() != n || k.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.nrows(),
                });
            }
        }
        let mut choi = zeros(n * n);
        for k in &kraus {
            let v = vectorize(k);
            // choi += v v†
            choi.gerc(linalg::ONE, &v, &v, linalg::ONE);
        }
        Ok(Self {
            dim: n,
            choi,
            kraus: Some(kraus),
            cert: OnceLock::new(),
        })
    }

    /// Build from a Choi matrix. Works for non-CP maps too; the Kraus form
    /// stays absent until [`CpMap::kraus_from_choi`] derives one.
    pub fn from_choi(dim: usize, choi: CMatrix) -> Result<Self> {
        if dim == 0 || choi.nrows() != dim * dim || choi.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: choi.nrows(),
            });
        }
        Ok(Self {
            dim,
            choi,
            kraus: None,
            cert: OnceLock::new(),
        })
    }

    /// Build from an n^2 x n^2 transfer matrix acting on column-stacked
    /// vectorizations.
    pub fn from_transfer(dim: usize, transfer: &CMatrix) -> Result<Self> {
        if dim == 0 || transfer.nrows() != dim * dim || transfer.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: transfer.nrows(),
            });
        }
        let n = dim;
        let mut choi = zeros(n * n);
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        choi[(i * n + a, j * n + b)] = transfer[(b * n + a, j * n + i)];
                    }
                }
            }
        }
        Self::from_choi(dim, choi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    /// Apply the map. Uses the Kraus form when present, otherwise the
    /// Choi-block expansion `phi(x) = Σ_ij x_ij phi(e_ij)`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let n = self.dim;
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.nrows(),
            });
        }
        if let Some(kraus) = &self.kraus {
            let mut out = zeros(n);
            for k in kraus {
                out += k * x * k.adjoint();
            }
            return Ok(out);
        }
        let mut out = zeros(n);
        for i in 0..n {
            for j in 0..n {
                let c = x[(i, j)];
                if c == linalg::ZERO {
                    continue;
                }
                for a in 0..n {
                    for b in 0..n {
                        out[(a, b)] += c * self.choi[(i * n + a, j * n + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// The n^2 x n^2 transfer matrix: `vec(phi(x)) = T vec(x)`.
    pub fn transfer_matrix(&self) -> CMatrix {
        let n = self.dim;
        let mut t = zeros(n * n);
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        t[(b * n + a, j * n + i)] = self.choi[(i * n + a, j * n + b)];
                    }
                }
            }
        }
        t
    }

    /// Kraus operators from the Choi eigendecomposition: each eigenpair
    /// with eigenvalue above `eps_rank` contributes `sqrt(λ) unvec(v)`.
    /// Rejects maps whose Choi matrix has an eigenvalue below `-eps_psd`.
    pub fn kraus_from_choi(&self, tol: &Tolerances) -> Result<Vec<CMatrix>> {
        let herm = hermiticity_residual(&self.choi);
        if herm > tol.eps_herm {
            return Err(Error::NotHermitian { residual: herm });
        }
        let (eigs, vecs) = hermitian_eigen(&self.choi);
        let mut kraus = Vec::new();
        for (k, &lambda) in eigs.iter().enumerate() {
            if lambda < -tol.eps_psd {
                return Err(Error::NotCp { min_eig: lambda });
            }
            if lambda > tol.eps_rank {
                let v = DVector::from_column_slice(vecs.column(k).as_slice());
                let op = linalg::unvectorize(&v, self.dim) * Complex64::new(lambda.sqrt(), 0.0);
                kraus.push(op);
            }
        }
        Ok(kraus)
    }

    /// Certify the three projection hypotheses plus unitality and adjoint
    /// preservation. Pure: recomputes from scratch each call.
    pub fn certify_projection(&self, tol: &Tolerances) -> ProjectionCertificate {
        let n = self.dim;
        let choi_herm_residual = hermiticity_residual(&self.choi);
        let (eigs, _) = hermitian_eigen(&self.choi);
        let choi_min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let cp = choi_herm_residual <= tol.eps_herm && choi_min_eig >= -tol.eps_psd;

        let unit_image = self.apply(&identity(n)).expect("dims match");
        let norm_of_unit_image = operator_norm(&unit_image);
        let contractive = if cp {
            Some(norm_of_unit_image <= 1.0 + tol.eps_residual)
        } else {
            None
        };
        let unit_residual = operator_norm(&(&unit_image - identity(n)));
        let unital = unit_residual <= tol.eps_residual;

        let mut idem_residual: f64 = 0.0;
        let mut star_residual: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = matrix_unit(n, i, j);
                let y = self.apply(&e).expect("dims match");
                let yy = self.apply(&y).expect("dims match");
                idem_residual = idem_residual.max(hs_norm(&(yy - &y)));
                let y_star = self.apply(&e.adjoint()).expect("dims match");
                star_residual = star_residual.max(hs_norm(&(y_star - y.adjoint())));
            }
        }
        let idempotent = idem_residual <= tol.eps_residual;
        let star_preserving = star_residual <= tol.eps_residual;

        ProjectionCertificate {
            cp,
            choi_min_eig,
            choi_herm_residual,
            contractive,
            norm_of_unit_image,
            idempotent,
            idem_residual,
            unital,
            unit_residual,
            star_preserving,
            star_residual,
        }
    }

    /// Cached certificate. The tolerances of the first call are captured;
    /// the `OnceLock` makes concurrent first calls race-safe (one winner,
    /// identical inputs give identical certificates).
    pub fn certificate(&self, tol: &Tolerances) -> &ProjectionCertificate {
        self.cert.get_or_init(|| self.certify_projection(tol))
    }

    /// Kadison-Schwarz probe: forms
    /// `D = |z^{1/2} y|^2 phi(z) - phi(zy) phi(zy)†`
    /// and PSD-checks it. Requires a CP contractive certificate and a PSD
    /// `z` (eigenvalues in `[-eps_psd, 0)` are clamped when taking the
    /// square root).
    pub fn kadison_schwarz_check(
        &self,
        z: &CMatrix,
        y: &CMatrix,
        tol: &Tolerances,
    ) -> Result<KsCheck> {
        let cert = self.certificate(tol);
        if !cert.cp {
            return Err(Error::UncertifiedMap {
                missing: "completely positive",
            });
        }
        if cert.contractive != Some(true) {
            return Err(Error::UncertifiedMap {
                missing: "contractive",
            });
        }
        let z_psd = psd_check(z, tol)?;
        if !z_psd.is_psd {
            return Err(Error::NotPsd {
                min_eig: z_psd.min_eig,
            });
        }
        let root = psd_sqrt(z, tol)?;
        let bound = operator_norm(&(&root * y));
        let phi_z = self.apply(z)?;
        let phi_zy = self.apply(&(z * y))?;
        let d = phi_z * Complex64::new(bound * bound, 0.0) - &phi_zy * phi_zy.adjoint();
        // D is Hermitian up to roundoff by construction; symmetrize before
        // the eigen decision.
        let d = (&d + d.adjoint()).scale(0.5);
        let report = psd_check(&d, tol)?;
        Ok(KsCheck {
            holds: report.is_psd,
            min_eig: report.min_eig,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_inner, identity, matrix_unit};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pinching_m2() -> CpMap {
        CpMap::from_kraus(vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)]).unwrap()
    }

    fn identity_map(n: usize) -> CpMap {
        CpMap::from_kraus(vec![identity(n)]).unwrap()
    }

    /// x ↦ (x + xᵀ)/2 on M_2, given by its Choi matrix. Idempotent but
    /// not completely positive.
    fn transpose_symmetrization() -> CpMap {
        let n = 2;
        let mut choi = zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let image = (matrix_unit(n, i, j) + matrix_unit(n, j, i)).scale(0.5);
                for a in 0..n {
                    for b in 0..n {
                        choi[(i * n + a, j * n + b)] = image[(a, b)];
                    }
                }
            }
        }
        CpMap::from_choi(n, choi).unwrap()
    }

    #[test]
    fn identity_map_applies_as_identity() {
        let m = identity_map(2);
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0), cx(4.0, 0.0)],
        );
        assert_eq!(m.apply(&x).unwrap(), x);
    }

    #[test]
    fn pinching_kills_off_diagonal() {
        let m = pinching_m2();
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0), cx(4.0, 0.0)],
        );
        let y = m.apply(&x).unwrap();
        let expected =
            CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(4.0, 0.0)]);
        assert!(hs_norm(&(y - expected)) < 1e-14);
    }

    #[test]
    fn scaled_kraus_give_same_pinching() {
        // (x + sigma_z x sigma_z)/2 also zeroes the off-diagonals.
        let s = 1.0 / 2.0_f64.sqrt();
        let mut sz = identity(2);
        sz[(1, 1)] = cx(-1.0, 0.0);
        let m = CpMap::from_kraus(vec![identity(2).scale(s), sz.scale(s)]).unwrap();
        let p = pinching_m2();
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit(2, i, j);
                let diff = m.apply(&e).unwrap() - p.apply(&e).unwrap();
                assert!(hs_norm(&diff) < 1e-14);
            }
        }
    }

    #[test]
    fn trace_map_sends_unit_to_half_identity() {
        // x ↦ tr(x) I/2 via Kraus {e11/√2-ish}: use from_choi directly.
        let n = 2;
        let mut choi = zeros(4);
        for i in 0..n {
            let image = identity(n).scale(0.5);
            for a in 0..n {
                for b in 0..n {
                    choi[(i * n + a, i * n + b)] = image[(a, b)];
                }
            }
        }
        let m = CpMap::from_choi(2, choi).unwrap();
        let out = m.apply(&matrix_unit(2, 0, 0)).unwrap();
        assert!(hs_norm(&(out - identity(2).scale(0.5))) < 1e-14);
    }

    #[test]
    fn choi_of_identity_is_rank_one_with_eigenvalue_two() {
        let m = identity_map(2);
        let (eigs, _) = hermitian_eigen(m.choi());
        let mut sorted: Vec<f64> = eigs.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[3] - 2.0).abs() < 1e-12);
        for &e in &sorted[..3] {
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn choi_of_pinching_is_diagonal_rank_two() {
        let m = pinching_m2();
        let mut expected = zeros(4);
        expected[(0, 0)] = cx(1.0, 0.0);
        expected[(3, 3)] = cx(1.0, 0.0);
        assert!(hs_norm(&(m.choi() - expected)) < 1e-14);
    }

    #[test]
    fn zero_map_has_zero_choi_and_no_kraus() {
        let tol = Tolerances::default();
        let m = CpMap::from_choi(2, zeros(4)).unwrap();
        assert_eq!(m.choi(), &zeros(4));
        assert!(m.kraus_from_choi(&tol).unwrap().is_empty());
    }

    #[test]
    fn kraus_from_choi_identity_is_scalar_unitary() {
        let tol = Tolerances::default();
        let m = identity_map(2);
        let kraus = m.kraus_from_choi(&tol).unwrap();
        assert_eq!(kraus.len(), 1);
        let k = &kraus[0];
        // k should be a unimodular multiple of the identity.
        assert!(k[(0, 1)].norm() < 1e-12);
        assert!(k[(1, 0)].norm() < 1e-12);
        assert!((k[(0, 0)] - k[(1, 1)]).norm() < 1e-12);
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_from_choi_pinching_spans_diagonal_units() {
        let tol = Tolerances::default();
        let m = pinching_m2();
        let kraus = m.kraus_from_choi(&tol).unwrap();
        assert_eq!(kraus.len(), 2);
        let rebuilt = CpMap::from_kraus(kraus).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit(2, i, j);
                let diff = rebuilt.apply(&e).unwrap() - m.apply(&e).unwrap();
                assert!(hs_norm(&diff) < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_from_choi_rejects_non_cp() {
        let tol = Tolerances::default();
        let m = transpose_symmetrization();
        assert!(matches!(
            m.kraus_from_choi(&tol),
            Err(Error::NotCp { .. })
        ));
    }

    #[test]
    fn transfer_matrix_agrees_with_apply() {
        let m = pinching_m2();
        let t = m.transfer_matrix();
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[cx(1.0, 0.5), cx(2.0, -1.0), cx(0.0, 3.0), cx(4.0, 0.0)],
        );
        let via_t = linalg::unvectorize(&(&t * vectorize(&x)), 2);
        assert!(hs_norm(&(via_t - m.apply(&x).unwrap())) < 1e-13);
    }

    #[test]
    fn from_transfer_roundtrip() {
        let m = pinching_m2();
        let t = m.transfer_matrix();
        let back = CpMap::from_transfer(2, &t).unwrap();
        assert!(hs_norm(&(back.choi() - m.choi())) < 1e-14);
    }

    #[test]
    fn certify_identity_all_flags() {
        let tol = Tolerances::default();
        let cert = identity_map(2).certify_projection(&tol);
        assert!(cert.cp);
        assert_eq!(cert.contractive, Some(true));
        assert!(cert.idempotent);
        assert!(cert.unital);
        assert!(cert.star_preserving);
        assert!(cert.idem_residual < 1e-12);
        assert!(cert.unit_residual < 1e-12);
        assert!(cert.star_residual < 1e-12);
        assert!(cert.is_projection());
    }

    #[test]
    fn certify_pinching_all_flags() {
        let tol = Tolerances::default();
        let cert = pinching_m2().certify_projection(&tol);
        assert!(cert.cp && cert.idempotent && cert.unital);
        assert_eq!(cert.contractive, Some(true));
        assert!(cert.idem_residual < 1e-12);
    }

    #[test]
    fn from_kraus_rejects_bad_input() {
        assert!(matches!(CpMap::from_kraus(vec![]), Err(Error::EmptyKraus)));
        assert!(matches!(
            CpMap::from_kraus(vec![identity(2), identity(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn certify_flags_non_contractive_maps() {
        // 1.2x a pinching: CP and idempotent-free scaling breaks both
        // contractivity and idempotency.
        let tol = Tolerances::default();
        let s = 1.2f64.sqrt();
        let m = CpMap::from_kraus(vec![
            matrix_unit(2, 0, 0).scale(s),
            matrix_unit(2, 1, 1).scale(s),
        ])
        .unwrap();
        let cert = m.certify_projection(&tol);
        assert!(cert.cp);
        assert_eq!(cert.contractive, Some(false));
        assert!((cert.norm_of_unit_image - 1.2).abs() < 1e-12);
        assert!(!cert.idempotent);
        assert!(!cert.is_projection());
    }

    #[test]
    fn certify_transpose_symmetrization() {
        let tol = Tolerances::default();
        let cert = transpose_symmetrization().certify_projection(&tol);
        assert!(cert.idempotent);
        assert!(!cert.cp);
        assert!((cert.choi_min_eig + 0.5).abs() < 1e-12);
        // Contractivity undetermined for non-CP maps.
        assert_eq!(cert.contractive, None);
        assert!(!cert.is_projection());
    }

    #[test]
    fn kadison_schwarz_identity_is_tight() {
        let tol = Tolerances::default();
        let m = identity_map(2);
        let ks = m
            .kadison_schwarz_check(&identity(2), &identity(2), &tol)
            .unwrap();
        assert!(ks.holds);
        assert!(ks.min_eig.abs() < 1e-12);
    }

    #[test]
    fn kadison_schwarz_pinching_corner() {
        let tol = Tolerances::default();
        let m = pinching_m2();
        let y = CMatrix::from_row_slice(
            2,
            2,
            &[cx(0.3, 0.1), cx(0.5, -0.2), cx(0.1, 0.0), cx(-0.6, 0.4)],
        );
        let y = y.unscale(hs_norm(&y));
        let ks = m
            .kadison_schwarz_check(&matrix_unit(2, 0, 0), &y, &tol)
            .unwrap();
        assert!(ks.holds);
    }

    #[test]
    fn kadison_schwarz_zero_argument() {
        let tol = Tolerances::default();
        let m = pinching_m2();
        let ks = m.kadison_schwarz_check(&zeros(2), &identity(2), &tol).unwrap();
        assert!(ks.holds);
        assert!(ks.min_eig.abs() < 1e-14);
    }

    #[test]
    fn kadison_schwarz_gates_on_certificate_and_psd() {
        let tol = Tolerances::default();
        let bad = transpose_symmetrization();
        assert!(matches!(
            bad.kadison_schwarz_check(&identity(2), &identity(2), &tol),
            Err(Error::UncertifiedMap { .. })
        ));

        let m = pinching_m2();
        let not_psd = CMatrix::from_diagonal(&DVector::from_vec(vec![
            cx(1.0, 0.0),
            cx(-1.0, 0.0),
        ]));
        assert!(matches!(
            m.kadison_schwarz_check(&not_psd, &identity(2), &tol),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn choi_and_kraus_describe_the_same_map() {
        let tol = Tolerances::default();
        let m = pinching_m2();
        let derived = m.kraus_from_choi(&tol).unwrap();
        let rebuilt = CpMap::from_kraus(derived).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit(2, i, j);
                let a = m.apply(&e).unwrap();
                let b = rebuilt.apply(&e).unwrap();
                assert!(hs_norm(&(a - b)) < 1e-12);
            }
        }
        // Linearity probe on a random-ish combination.
        let x = matrix_unit(2, 0, 0).scale(2.0) + matrix_unit(2, 0, 1) * cx(0.0, 1.5);
        let lhs = m.apply(&x).unwrap();
        let rhs = m.apply(&matrix_unit(2, 0, 0)).unwrap().scale(2.0)
            + m.apply(&matrix_unit(2, 0, 1)).unwrap() * cx(0.0, 1.5);
        assert!(hs_norm(&(lhs - rhs)) < 1e-13);
        let _ = hs_inner(&x, &x);
    }
}
