//! The quotient algebra, the induced isomorphism onto the range, and the
//! positivity checks that make it a complete order isomorphism.
//!
//! The quotient of the generated algebra by the kernel ideal is realized
//! concretely as the direct sum of the blocks outside the ideal. The
//! induced map sends a representative `b` to `phi(b)`; its inverse is a
//! linear solve in the orthonormal bases. Positivity preservation is
//! probed in both directions on ampliated PSD samples for every matrix
//! level up to `k_max`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{
    ampliate, block_of, hs_norm, operator_norm, psd_check, CMatrix, Tolerances,
};
use crate::sampling::{derive_seed, random_combination, rng_from_seed};
use crate::subspace::OperatorSubspace;

use super::ideal::IdealCertificate;
use super::wedderburn::WedderburnDecomposition;
use super::AlgebraContext;

/// Maximum shift steps when rejection-sampling PSD elements of the range.
const SHIFT_STEP_CAP: usize = 400;

/// The quotient isomorphism, realized on concrete block representatives.
#[derive(Debug, Clone)]
pub struct QuotientIso {
    map: CpMap,
    wedderburn: WedderburnDecomposition,
    quotient_space: OperatorSubspace,
    range_space: OperatorSubspace,
    forward: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
    /// |F G - I| and |G F - I| in Frobenius norm.
    pub forward_inverse_residual: f64,
    pub inverse_forward_residual: f64,
    /// Worst defect of `rho(a b) = phi(rho(a) rho(b))` over basis pairs.
    pub intertwining_residual: f64,
}

impl QuotientIso {
    /// Block data with the in-ideal flags filled in.
    pub fn wedderburn(&self) -> &WedderburnDecomposition {
        &self.wedderburn
    }

    /// Concrete realization of the quotient: the blocks outside the ideal.
    pub fn quotient_space(&self) -> &OperatorSubspace {
        &self.quotient_space
    }

    pub fn range_space(&self) -> &OperatorSubspace {
        &self.range_space
    }

    pub fn dim(&self) -> usize {
        self.quotient_space.dim()
    }

    /// Matrix of the induced map in the orthonormal bases (range rows,
    /// quotient columns).
    pub fn forward_matrix(&self) -> &DMatrix<Complex64> {
        &self.forward
    }

    /// Matrix of its inverse.
    pub fn inverse_matrix(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    /// Unit of the quotient: the sum of the central projections outside
    /// the ideal.
    pub fn quotient_unit(&self) -> CMatrix {
        let n = self.quotient_space.ambient_dim();
        let mut e = CMatrix::zeros(n, n);
        for (p, &in_j) in self
            .wedderburn
            .central_projections
            .iter()
            .zip(&self.wedderburn.in_ideal)
        {
            if !in_j {
                e += p;
            }
        }
        e
    }

    /// The induced map on a quotient representative.
    pub fn forward_apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.map.apply(x)
    }

    /// Inverse image in the quotient realization of a range element.
    pub fn inverse_apply(&self, y: &CMatrix) -> CMatrix {
        let coeffs = nalgebra::DVector::from_vec(self.range_space.coefficients(y));
        let b_coeffs = &self.inverse * coeffs;
        self.quotient_space
            .from_coefficients(b_coeffs.as_slice())
    }
}

/// Per-level outcome of the order-isomorphism probes.
#[derive(Debug, Clone, Copy)]
pub struct OrderIsoKReport {
    pub k: usize,
    /// Worst min eigenvalue of pushed-forward PSD samples.
    pub forward_min_eig: f64,
    /// Worst min eigenvalue of pulled-back PSD samples.
    pub reverse_min_eig: f64,
}

#[derive(Debug, Clone)]
pub struct OrderIsoReport {
    pub per_k: Vec<OrderIsoKReport>,
}

impl OrderIsoReport {
    pub fn min_eig(&self) -> f64 {
        self.per_k
            .iter()
            .flat_map(|r| [r.forward_min_eig, r.reverse_min_eig])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of the quotient-norm comparison.
#[derive(Debug, Clone, Copy)]
pub struct IsometryReport {
    /// Whether the map is unital; only then is equality asserted.
    pub unital: bool,
    /// Worst relative deviation between block-quotient norm and ambient
    /// operator norm over the sampled range elements.
    pub max_rel_deviation: f64,
}

/// Builds the quotient isomorphism. Requires the kernel-ideal identity to
/// have passed; classifies each block as inside or outside the ideal and
/// certifies bijectivity plus the multiplicativity intertwining.
pub fn quotient_iso(
    ctx: &AlgebraContext,
    cert: &IdealCertificate,
    w: &WedderburnDecomposition,
    tol: &Tolerances,
) -> Result<QuotientIso> {
    if cert.kernel_gap > tol.eps_residual {
        return Err(Error::KernelIdealMismatch {
            gap: cert.kernel_gap,
        });
    }
    let n = ctx.ambient_dim();
    let abasis = ctx.algebra().basis();

    let mut wedderburn = w.clone();
    let mut in_ideal = Vec::with_capacity(w.central_projections.len());
    for (block, p) in w.central_projections.iter().enumerate() {
        let mut all_inside = true;
        let mut in_residual: f64 = 0.0;
        for a in abasis {
            let compressed = p * a * p;
            let membership = cert.ideal.contains(&compressed, tol)?;
            all_inside &= membership.member;
            in_residual = in_residual.max(membership.residual);
        }
        let mut out_residual: f64 = 0.0;
        for j in cert.ideal.basis() {
            out_residual = out_residual.max(hs_norm(&(p * j * p)));
        }
        let disjoint = out_residual <= tol.eps_residual;
        if all_inside == disjoint {
            return Err(Error::BlockSplitError {
                block,
                in_residual,
                out_residual,
            });
        }
        in_ideal.push(all_inside);
    }
    wedderburn.in_ideal = in_ideal;

    let mut quotient_unit = CMatrix::zeros(n, n);
    for (p, &inside) in wedderburn
        .central_projections
        .iter()
        .zip(&wedderburn.in_ideal)
    {
        if !inside {
            quotient_unit += p;
        }
    }
    // The quotient dimension is structural: the blocks outside the ideal
    // contribute exactly n_i^2 each. Using a rank-targeted span keeps the
    // basis independent of noise-threshold effects.
    let structural_dim: usize = wedderburn
        .block_dims
        .iter()
        .zip(&wedderburn.in_ideal)
        .filter(|&(_, &inside)| !inside)
        .map(|(&(ni, _), _)| ni * ni)
        .sum();
    let compressions: Vec<CMatrix> = abasis
        .iter()
        .map(|a| &quotient_unit * a * &quotient_unit)
        .collect();
    let quotient_space = OperatorSubspace::span_with_rank(n, &compressions, structural_dim)?;
    let range_space = ctx.range().clone();
    let d_b = quotient_space.dim();
    let d_r = range_space.dim();
    if d_b != d_r || d_b == 0 {
        return Err(Error::QuotientMismatch { dim_b: d_b, dim_r: d_r });
    }

    let mut forward = DMatrix::<Complex64>::zeros(d_r, d_b);
    for (s, b) in quotient_space.basis().iter().enumerate() {
        let image = ctx.map().apply(b)?;
        for (r, rb) in range_space.basis().iter().enumerate() {
            forward[(r, s)] = rb.dotc(&image);
        }
    }
    let inverse = crate::linalg::pseudo_inverse(&forward, tol.eps_rank);
    let eye = DMatrix::<Complex64>::identity(d_r, d_r);
    let forward_inverse_residual = (&forward * &inverse - &eye).norm();
    let inverse_forward_residual = (&inverse * &forward - &eye).norm();

    let mut intertwining_residual: f64 = 0.0;
    let qbasis = quotient_space.basis();
    for a in qbasis {
        let rho_a = ctx.map().apply(a)?;
        for b in qbasis {
            let rho_b = ctx.map().apply(b)?;
            let lhs = ctx.map().apply(&(a * b))?;
            let rhs = ctx.map().apply(&(&rho_a * &rho_b))?;
            intertwining_residual = intertwining_residual.max(hs_norm(&(lhs - rhs)));
        }
    }

    Ok(QuotientIso {
        map: ctx.map().clone(),
        wedderburn,
        quotient_space,
        range_space,
        forward,
        inverse,
        forward_inverse_residual,
        inverse_forward_residual,
        intertwining_residual,
    })
}

/// Probes complete positivity of the isomorphism in both directions.
///
/// Forward: PSD elements of M_k(B) are drawn as Y†Y with Y random over the
/// block realization, pushed through `id_k ⊗ rho`, and eigen-checked.
/// Reverse: PSD elements of M_k(R) are drawn as random Hermitian block
/// matrices shifted by multiples of `I_k ⊗ unit` until certified PSD,
/// then pulled back through the inverse.
#[allow(clippy::needless_range_loop)] // block-index arithmetic throughout
pub fn order_iso_check(
    iso: &QuotientIso,
    k_max: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<OrderIsoReport> {
    let n = iso.quotient_space.ambient_dim();
    let unit_r = iso.forward_apply(&iso.quotient_unit())?;
    let mut per_k = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut rng = rng_from_seed(derive_seed(seed, 0x0D_00 + k as u64));
        let mut forward_min_eig = f64::INFINITY;
        let mut reverse_min_eig = f64::INFINITY;
        for _ in 0..trials {
            // Forward direction.
            let y_blocks: Vec<Vec<CMatrix>> = (0..k)
                .map(|_| {
                    (0..k)
                        .map(|_| random_combination(&mut rng, iso.quotient_space.basis(), n))
                        .collect()
                })
                .collect();
            let y = ampliate(&y_blocks)?;
            let x = y.adjoint() * &y;
            let mut image_blocks = Vec::with_capacity(k);
            for i in 0..k {
                let mut row = Vec::with_capacity(k);
                for j in 0..k {
                    row.push(iso.forward_apply(&block_of(&x, n, i, j))?);
                }
                image_blocks.push(row);
            }
            let image = ampliate(&image_blocks)?;
            forward_min_eig = forward_min_eig.min(psd_check(&image, tol)?.min_eig);

            // Reverse direction: certified-PSD sample in M_k(R).
            let mut g_blocks: Vec<Vec<CMatrix>> =
                vec![vec![CMatrix::zeros(n, n); k]; k];
            for i in 0..k {
                let h = random_combination(&mut rng, iso.range_space.basis(), n);
                g_blocks[i][i] = (&h + h.adjoint()).scale(0.5);
                for j in (i + 1)..k {
                    let h = random_combination(&mut rng, iso.range_space.basis(), n);
                    g_blocks[j][i] = h.adjoint();
                    g_blocks[i][j] = h;
                }
            }
            let g = ampliate(&g_blocks)?;
            let unit_blocks: Vec<Vec<CMatrix>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            if i == j {
                                unit_r.clone()
                            } else {
                                CMatrix::zeros(n, n)
                            }
                        })
                        .collect()
                })
                .collect();
            let unit_amp = ampliate(&unit_blocks)?;
            let step = 0.1 * operator_norm(&g).max(1.0);
            let mut shift = 0.0;
            let mut sample = g.clone();
            let mut certified = false;
            for _ in 0..SHIFT_STEP_CAP {
                if psd_check(&sample, tol)?.min_eig >= 0.0 {
                    certified = true;
                    break;
                }
                shift += step;
                sample = &g + unit_amp.scale(shift);
            }
            if !certified {
                return Err(Error::SamplingFailed {
                    reason: format!("PSD shift did not certify within {SHIFT_STEP_CAP} steps"),
                });
            }
            let mut pulled_blocks = Vec::with_capacity(k);
            for i in 0..k {
                let mut row = Vec::with_capacity(k);
                for j in 0..k {
                    row.push(iso.inverse_apply(&block_of(&sample, n, i, j)));
                }
                pulled_blocks.push(row);
            }
            let pulled = ampliate(&pulled_blocks)?;
            reverse_min_eig = reverse_min_eig.min(psd_check(&pulled, tol)?.min_eig);
        }
        per_k.push(OrderIsoKReport {
            k,
            forward_min_eig,
            reverse_min_eig,
        });
    }
    Ok(OrderIsoReport { per_k })
}

/// Compares the block-quotient norm of representatives with the ambient
/// operator norm of their range images. Equality is a theorem only in the
/// unital case; the report records the observed deviation either way.
pub fn quotient_norm_check(
    iso: &QuotientIso,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> IsometryReport {
    let n = iso.quotient_space.ambient_dim();
    let unital = iso.map.certificate(tol).unital;
    let mut rng = rng_from_seed(derive_seed(seed, 0x150));
    let mut max_rel_deviation: f64 = 0.0;
    for _ in 0..trials {
        let x = random_combination(&mut rng, iso.range_space.basis(), n);
        let b = iso.inverse_apply(&x);
        let mut quotient_norm: f64 = 0.0;
        for (p, &inside) in iso
            .wedderburn
            .central_projections
            .iter()
            .zip(&iso.wedderburn.in_ideal)
        {
            if !inside {
                quotient_norm = quotient_norm.max(operator_norm(&(p * &b * p)));
            }
        }
        let ambient = operator_norm(&x);
        let rel = (quotient_norm - ambient).abs() / ambient.max(1e-12);
        max_rel_deviation = max_rel_deviation.max(rel);
    }
    IsometryReport {
        unital,
        max_rel_deviation,
    }
}
