//! The range-algebra construction and its certificates.
//!
//! Given a certified completely positive contractive idempotent map, this
//! module executes every step that turns its range into a C*-algebra:
//! range and generated algebra, the kernel ideal and its closure
//! certificates, word-defect membership, the induced product `x ∘ y =
//! phi(xy)` with its structure constants, the block decomposition of the
//! generated algebra, and the quotient isomorphism onto the range with
//! its order-isomorphism checks.
//!
//! All "closed" ideals and subalgebras here are plain linear spans:
//! at finite dimension topological closure is automatic, which is what
//! makes the construction executable.

mod algebra;
mod ideal;
mod quotient;
mod wedderburn;

pub use algebra::{build_ce_algebra, ce_product, CeAlgebra};
pub use ideal::{
    ideal_j, kernel_subspace, verify_bilateral, verify_kernel_equals_ideal, word_defect,
    BilateralCheck, IdealCertificate, WordDefect,
};
pub use quotient::{
    order_iso_check, quotient_iso, quotient_norm_check, IsometryReport, OrderIsoKReport,
    OrderIsoReport, QuotientIso,
};
pub use wedderburn::{wedderburn, WedderburnDecomposition};

use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{matrix_unit, CMatrix, Tolerances};
use crate::subspace::OperatorSubspace;

/// Default bound on span-closure rounds. Dimension is monotone and
/// bounded by n^2, so this is never reached for supported sizes.
pub const DEFAULT_MAX_ROUNDS: usize = 64;

/// The working context of the construction: a certified map, its range R,
/// and the C*-algebra A0 generated by R.
#[derive(Debug, Clone)]
pub struct AlgebraContext {
    map: CpMap,
    range: OperatorSubspace,
    algebra: OperatorSubspace,
}

impl AlgebraContext {
    /// Builds range and generated algebra for a certified projection.
    pub fn build(map: CpMap, tol: &Tolerances) -> Result<Self> {
        let range = range_of(&map, tol)?;
        if range.is_zero() {
            return Err(Error::EmptyRange);
        }
        let algebra = generated_algebra(&range, tol, DEFAULT_MAX_ROUNDS)?;
        Ok(Self {
            map,
            range,
            algebra,
        })
    }

    /// Assemble a context from parts computed separately (staged
    /// pipelines). Verifies the containment of the range in the algebra;
    /// callers are responsible for having built both from `map`.
    pub fn from_parts(
        map: CpMap,
        range: OperatorSubspace,
        algebra: OperatorSubspace,
        tol: &Tolerances,
    ) -> Result<Self> {
        if range.ambient_dim() != map.dim() || algebra.ambient_dim() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: range.ambient_dim(),
            });
        }
        for b in range.basis() {
            let m = algebra.contains(b, tol)?;
            if !m.member {
                return Err(Error::NotAnAlgebra {
                    reason: format!("range escapes the algebra by {:.3e}", m.residual),
                });
            }
        }
        Ok(Self {
            map,
            range,
            algebra,
        })
    }

    pub fn map(&self) -> &CpMap {
        &self.map
    }

    /// R = range of the map.
    pub fn range(&self) -> &OperatorSubspace {
        &self.range
    }

    /// A0 = C*-algebra generated by the range.
    pub fn algebra(&self) -> &OperatorSubspace {
        &self.algebra
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.dim()
    }
}

/// Range of a certified idempotent map: the span of the images of all
/// matrix units. Every basis vector of the result is a fixed point.
pub fn range_of(map: &CpMap, tol: &Tolerances) -> Result<OperatorSubspace> {
    let cert = map.certificate(tol);
    if !cert.idempotent {
        return Err(Error::UncertifiedMap {
            missing: "idempotent",
        });
    }
    let n = map.dim();
    let mut images = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            images.push(map.apply(&matrix_unit(n, i, j))?);
        }
    }
    OperatorSubspace::span(n, &images, tol)
}

/// Smallest subspace containing `r` that is closed under adjoints and
/// pairwise products: alternating span-closure rounds until the dimension
/// stabilizes.
pub fn generated_algebra(
    r: &OperatorSubspace,
    tol: &Tolerances,
    max_rounds: usize,
) -> Result<OperatorSubspace> {
    let n = r.ambient_dim();
    let mut out = OperatorSubspace::span(n, r.basis(), tol)?;
    let adjoints: Vec<CMatrix> = out.basis().iter().map(CMatrix::adjoint).collect();
    out.extend(&adjoints, tol)?;

    for _ in 0..max_rounds {
        let basis: Vec<CMatrix> = out.basis().to_vec();
        let mut products = Vec::with_capacity(basis.len() * basis.len());
        for a in &basis {
            for b in &basis {
                products.push(a * b);
            }
        }
        let mut added = out.extend(&products, tol)?;
        let adjoints: Vec<CMatrix> = out.basis().iter().map(CMatrix::adjoint).collect();
        added += out.extend(&adjoints, tol)?;
        if added == 0 {
            return Ok(out);
        }
    }
    Err(Error::MaxRoundsExceeded { max_rounds })
}
