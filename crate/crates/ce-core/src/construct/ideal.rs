//! Kernel subspace, the right ideal generated by product defects, and the
//! membership checks built on them.
//!
//! The ideal is generated by all `x y - phi(x y)` with `x, y` from the
//! range basis, closed under right multiplication by the generated
//! algebra, and then compared against the kernel of the restricted map.
//! Bilaterality is verified afterwards rather than built in, mirroring
//! the logical order of the construction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hs_norm, CMatrix, Tolerances};
use crate::subspace::{Membership, OperatorSubspace, SubspaceMatch};

use super::AlgebraContext;

/// The constructed ideal together with its closure and kernel residuals.
#[derive(Debug, Clone)]
pub struct IdealCertificate {
    /// J, the span-closed right ideal generated by the product defects.
    pub ideal: OperatorSubspace,
    pub generator_count: usize,
    /// Worst right-multiplication escape after stabilization.
    pub right_closure_residual: f64,
    /// Worst left-multiplication escape (reported; certified separately).
    pub left_closure_residual: f64,
    /// Gap of `subspace_equal(J, Ker(phi|A0))`.
    pub kernel_gap: f64,
    /// Worst `|phi(g)|_HS` over the generators: the containment
    /// J ⊆ Ker(phi) at generator level.
    pub generator_image_residual: f64,
}

/// Outcome of the bilaterality check.
#[derive(Debug, Clone, Copy)]
pub struct BilateralCheck {
    pub bilateral: bool,
    pub left_residual: f64,
}

/// Outcome of a word-defect membership test.
#[derive(Debug, Clone, Copy)]
pub struct WordDefect {
    pub member: bool,
    pub residual: f64,
}

/// Kernel of the map restricted to the generated algebra, computed as the
/// null space of the restricted matrix in the orthonormal basis.
pub fn kernel_subspace(ctx: &AlgebraContext, tol: &Tolerances) -> OperatorSubspace {
    let basis = ctx.algebra().basis();
    let d = basis.len();
    let n = ctx.ambient_dim();
    if d == 0 {
        return OperatorSubspace::zero(n);
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (j, b) in basis.iter().enumerate() {
        let image = ctx.map().apply(b).expect("basis dims match the map");
        for (i, a) in basis.iter().enumerate() {
            m[(i, j)] = a.dotc(&image);
        }
    }
    let mut kernel_basis = Vec::new();
    for coeffs in crate::linalg::null_space(&m, tol.eps_rank) {
        let mut vec = CMatrix::zeros(n, n);
        for (j, b) in basis.iter().enumerate() {
            vec += b * coeffs[j];
        }
        kernel_basis.push(vec);
    }
    OperatorSubspace::span(n, &kernel_basis, tol).expect("dims agree")
}

/// Builds the right ideal J generated by `{b_i b_j - phi(b_i b_j)}` over
/// the range basis: span the generators, then adjoin right products with
/// the algebra basis until the dimension stabilizes.
pub fn ideal_j(
    ctx: &AlgebraContext,
    tol: &Tolerances,
    max_rounds: usize,
) -> Result<IdealCertificate> {
    let n = ctx.ambient_dim();
    let rbasis = ctx.range().basis();
    let abasis = ctx.algebra().basis();

    let mut generators = Vec::with_capacity(rbasis.len() * rbasis.len());
    let mut generator_image_residual: f64 = 0.0;
    for x in rbasis {
        for y in rbasis {
            let product = x * y;
            let defect = &product - ctx.map().apply(&product)?;
            generator_image_residual =
                generator_image_residual.max(hs_norm(&ctx.map().apply(&defect)?));
            generators.push(defect);
        }
    }
    let generator_count = generators.len();

    let mut ideal = OperatorSubspace::span(n, &generators, tol)?;
    let mut stabilized = false;
    for _ in 0..max_rounds {
        let basis: Vec<CMatrix> = ideal.basis().to_vec();
        let mut products = Vec::with_capacity(basis.len() * abasis.len());
        for j in &basis {
            for a in abasis {
                products.push(j * a);
            }
        }
        if ideal.extend(&products, tol)? == 0 {
            stabilized = true;
            break;
        }
    }
    if !stabilized {
        return Err(Error::MaxRoundsExceeded { max_rounds });
    }

    let mut right_closure_residual: f64 = 0.0;
    let mut left_closure_residual: f64 = 0.0;
    for j in ideal.basis() {
        for a in abasis {
            right_closure_residual =
                right_closure_residual.max(ideal.contains(&(j * a), tol)?.residual);
            left_closure_residual =
                left_closure_residual.max(ideal.contains(&(a * j), tol)?.residual);
        }
    }

    let kernel_gap = ideal.equals(&kernel_subspace(ctx, tol), tol)?.gap;

    Ok(IdealCertificate {
        ideal,
        generator_count,
        right_closure_residual,
        left_closure_residual,
        kernel_gap,
        generator_image_residual,
    })
}

/// The main identity of the construction: J equals the kernel of the map
/// restricted to the generated algebra.
pub fn verify_kernel_equals_ideal(
    ctx: &AlgebraContext,
    cert: &IdealCertificate,
    tol: &Tolerances,
) -> SubspaceMatch {
    let kernel = kernel_subspace(ctx, tol);
    cert.ideal
        .equals(&kernel, tol)
        .expect("ideal and kernel share the ambient dimension")
}

/// Left-multiplication stability of J: the right ideal is in fact
/// bilateral.
pub fn verify_bilateral(
    ctx: &AlgebraContext,
    cert: &IdealCertificate,
    tol: &Tolerances,
) -> BilateralCheck {
    let mut left_residual: f64 = 0.0;
    for a in ctx.algebra().basis() {
        for j in cert.ideal.basis() {
            let residual = cert
                .ideal
                .contains(&(a * j), tol)
                .expect("dims agree")
                .residual;
            left_residual = left_residual.max(residual);
        }
    }
    BilateralCheck {
        bilateral: left_residual <= tol.eps_residual,
        left_residual,
    }
}

/// Membership of the defect `u - phi(u)` in J, where `u` is the product
/// of a word with letters from the range.
pub fn word_defect(
    ctx: &AlgebraContext,
    cert: &IdealCertificate,
    word: &[CMatrix],
    tol: &Tolerances,
) -> Result<WordDefect> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    for (index, letter) in word.iter().enumerate() {
        let Membership { member, residual } = ctx.range().contains(letter, tol)?;
        if !member {
            return Err(Error::LetterNotInRange { index, residual });
        }
    }
    let mut u = word[0].clone();
    for letter in &word[1..] {
        u = &u * letter;
    }
    let defect = &u - ctx.map().apply(&u)?;
    let Membership { member, residual } = cert.ideal.contains(&defect, tol)?;
    Ok(WordDefect { member, residual })
}
