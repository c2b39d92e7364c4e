//! The induced product on the range and its certified algebra structure.
//!
//! On the range of a certified projection, `x ∘ y = phi(x y)` is the
//! multiplication that turns the range into a C*-algebra. This module
//! computes the structure constants of that product in the orthonormal
//! range basis, solves for the unit, and certifies associativity, the
//! unit laws and star-compatibility at matrix level.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{hs_norm, identity, vectorize, CMatrix, Tolerances};
use crate::subspace::OperatorSubspace;

use super::AlgebraContext;

/// Residuals certified while building the algebra.
#[derive(Debug, Clone, Copy)]
pub struct CeAxiomResiduals {
    /// Worst distance of `phi(b_i b_j)` from the range.
    pub closure: f64,
    /// Worst `|(b_i ∘ b_j) ∘ b_k - b_i ∘ (b_j ∘ b_k)|_HS`.
    pub associativity: f64,
    /// Worst unit-law defect `|unit ∘ b_i - b_i|`, both sides.
    pub unit_law: f64,
    /// Worst `|(b_i ∘ b_j)† - b_j† ∘ b_i†|_HS`.
    pub star: f64,
}

/// The range with the induced product: basis, structure constants, unit.
#[derive(Debug, Clone)]
pub struct CeAlgebra {
    range: OperatorSubspace,
    /// Flat `d^3` array: `structure[(i d + j) d + k]` is the coefficient
    /// of `b_k` in `b_i ∘ b_j`.
    structure: Vec<Complex64>,
    unit: CMatrix,
    residuals: CeAxiomResiduals,
}

impl CeAlgebra {
    pub fn dim(&self) -> usize {
        self.range.dim()
    }

    pub fn range(&self) -> &OperatorSubspace {
        &self.range
    }

    /// Coefficient of `b_k` in `b_i ∘ b_j`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    /// The multiplicative unit of the induced product, as an ambient
    /// matrix in the range.
    pub fn unit(&self) -> &CMatrix {
        &self.unit
    }

    pub fn residuals(&self) -> &CeAxiomResiduals {
        &self.residuals
    }
}

/// The induced product `phi(x y)` for `x, y` in the range. Membership is
/// decided through the fixed-point identity `phi(x) = x`, which
/// characterizes the range of an idempotent map.
pub fn ce_product(map: &CpMap, x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if !map.certificate(tol).idempotent {
        return Err(Error::UncertifiedMap {
            missing: "idempotent",
        });
    }
    for operand in [x, y] {
        let residual = hs_norm(&(operand - map.apply(operand)?));
        if residual > tol.eps_residual * hs_norm(operand).max(1.0) {
            return Err(Error::NotInRange { residual });
        }
    }
    map.apply(&(x * y))
}

/// Builds the certified algebra structure on the range.
///
/// Associativity is certified on all basis triples at matrix level; the
/// triple images are batched through the transfer matrix so the check
/// stays a handful of dense products per basis element. The unit is the
/// least-squares solution of the two-sided unit equations, gated by its
/// matrix-level law residual.
#[allow(clippy::needless_range_loop)] // triple-index arithmetic throughout
pub fn build_ce_algebra(ctx: &AlgebraContext, tol: &Tolerances) -> Result<CeAlgebra> {
    let range = ctx.range();
    let d = range.dim();
    let n = ctx.ambient_dim();
    if d == 0 {
        return Err(Error::EmptyRange);
    }
    let basis = range.basis();
    let map = ctx.map();

    // Products phi(b_i b_j) and their range coefficients.
    let mut products = Vec::with_capacity(d * d);
    let mut closure: f64 = 0.0;
    let mut structure = vec![Complex64::new(0.0, 0.0); d * d * d];
    for i in 0..d {
        for j in 0..d {
            let p = map.apply(&(&basis[i] * &basis[j]))?;
            closure = closure.max(range.contains(&p, tol)?.residual);
            for (k, b) in basis.iter().enumerate() {
                structure[(i * d + j) * d + k] = b.dotc(&p);
            }
            products.push(p);
        }
    }

    // Matrix-level associativity, batched: columns of `pmat` are the
    // vectorized products, and one transfer-composed multiplier per basis
    // element produces all triple images at once.
    let transfer = map.transfer_matrix();
    let mut pmat = DMatrix::<Complex64>::zeros(n * n, d * d);
    for (col, p) in products.iter().enumerate() {
        pmat.set_column(col, &vectorize(p));
    }
    let eye = identity(n);
    let mut left_assoc = Vec::with_capacity(d); // A_k: (b_i ∘ b_j) ∘ b_k
    let mut right_assoc = Vec::with_capacity(d); // B_i: b_i ∘ (b_j ∘ b_k)
    for b in basis {
        let right_mult = b.transpose().kronecker(&eye);
        left_assoc.push(&transfer * right_mult * &pmat);
        let left_mult = eye.kronecker(b);
        right_assoc.push(&transfer * left_mult * &pmat);
    }
    let mut associativity: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let lhs = left_assoc[k].column(i * d + j);
                let rhs = right_assoc[i].column(j * d + k);
                associativity = associativity.max((lhs - rhs).norm());
            }
        }
    }
    if associativity > tol.eps_residual {
        return Err(Error::AssociativityFailed {
            residual: associativity,
        });
    }

    // Star-compatibility: (b_i ∘ b_j)† = b_j† ∘ b_i†.
    let mut star: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let lhs = products[i * d + j].adjoint();
            let rhs = map.apply(&(basis[j].adjoint() * basis[i].adjoint()))?;
            star = star.max(hs_norm(&(lhs - rhs)));
        }
    }

    // Unit: least-squares solve of e ∘ b_i = b_i = b_i ∘ e over the range
    // coefficients.
    let mut system = DMatrix::<Complex64>::zeros(2 * d * d, d);
    let mut rhs = DVector::<Complex64>::zeros(2 * d * d);
    for i in 0..d {
        for l in 0..d {
            for k in 0..d {
                // Row (i, l) of e ∘ b_i = b_i.
                system[(i * d + l, k)] = structure[(k * d + i) * d + l];
                // Row (i, l) of b_i ∘ e = b_i.
                system[(d * d + i * d + l, k)] = structure[(i * d + k) * d + l];
            }
            if i == l {
                rhs[i * d + l] = Complex64::new(1.0, 0.0);
                rhs[d * d + i * d + l] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let coeffs = crate::linalg::least_squares(&system, &rhs, tol.eps_rank);
    let unit = range.from_coefficients(coeffs.as_slice());

    let mut unit_law: f64 = 0.0;
    for b in basis {
        let left = map.apply(&(&unit * b))?;
        let right = map.apply(&(b * &unit))?;
        unit_law = unit_law.max(hs_norm(&(left - b)));
        unit_law = unit_law.max(hs_norm(&(right - b)));
    }
    if unit_law > tol.eps_residual {
        return Err(Error::NoUnit { residual: unit_law });
    }

    Ok(CeAlgebra {
        range: range.clone(),
        structure,
        unit,
        residuals: CeAxiomResiduals {
            closure,
            associativity,
            unit_law,
            star,
        },
    })
}
