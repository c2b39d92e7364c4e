//! Operator subspaces with Hilbert-Schmidt-orthonormal bases.
//!
//! Subspaces of M_n carry the span/containment arithmetic behind every
//! membership claim downstream: ranges, generated algebras, kernel
//! subspaces and ideals are all `OperatorSubspace` values. The zero
//! subspace (empty basis) is a first-class value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hs_norm, CMatrix, Tolerances};

/// A linear subspace of M_n held as an HS-orthonormal basis.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy)]
pub struct Membership {
    pub member: bool,
    /// HS norm of the component orthogonal to the subspace.
    pub residual: f64,
}

/// Outcome of a subspace equality test.
#[derive(Debug, Clone, Copy)]
pub struct SubspaceMatch {
    pub equal: bool,
    /// Worst containment residual of either basis into the other side.
    pub gap: f64,
}

impl OperatorSubspace {
    /// The zero subspace of M_n.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    /// Orthonormal span of `mats` via modified Gram-Schmidt with
    /// re-orthogonalization. Inputs whose residual after projection drops
    /// below `eps_rank` (relative to their own norm) are discarded.
    pub fn span(ambient_dim: usize, mats: &[CMatrix], tol: &Tolerances) -> Result<Self> {
        let mut sub = Self::zero(ambient_dim);
        sub.extend(mats, tol)?;
        Ok(sub)
    }

    /// Best rank-`rank` approximation of the span: the top eigenvectors
    /// of the frame operator `Σ_i vec(m_i) vec(m_i)†`. Used where the
    /// dimension is known structurally and must not depend on a noise
    /// threshold.
    pub fn span_with_rank(
        ambient_dim: usize,
        mats: &[CMatrix],
        rank: usize,
    ) -> Result<Self> {
        use crate::linalg::vectorize;
        use nalgebra::DMatrix;
        for m in mats {
            if m.nrows() != ambient_dim || m.ncols() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: m.nrows(),
                });
            }
        }
        if rank == 0 || mats.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        let nn = ambient_dim * ambient_dim;
        let mut frame = DMatrix::<Complex64>::zeros(nn, nn);
        let one = Complex64::new(1.0, 0.0);
        for m in mats {
            let v = vectorize(m);
            frame.gerc(one, &v, &v, one);
        }
        let eig = frame.symmetric_eigen();
        let mut order: Vec<usize> = (0..nn).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let keep = rank.min(nn);
        let mut basis = Vec::with_capacity(keep);
        for &idx in order.iter().take(keep) {
            let col = eig.eigenvectors.column(idx).into_owned();
            basis.push(crate::linalg::unvectorize(&col, ambient_dim));
        }
        Ok(Self { ambient_dim, basis })
    }

    /// Adjoin `mats`, keeping the basis orthonormal. Returns how many new
    /// basis vectors were added.
    pub fn extend(&mut self, mats: &[CMatrix], tol: &Tolerances) -> Result<usize> {
        let mut added = 0;
        for m in mats {
            if m.nrows() != self.ambient_dim || m.ncols() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    found: m.nrows(),
                });
            }
            let norm = hs_norm(m);
            if norm < tol.eps_rank {
                continue;
            }
            let mut v = m.unscale(norm);
            // Two projection passes keep the basis orthonormal to machine
            // precision even for nearly dependent inputs.
            for _ in 0..2 {
                for b in &self.basis {
                    let coeff = b.dotc(&v);
                    v -= b * coeff;
                }
            }
            let residual = hs_norm(&v);
            if residual >= tol.eps_rank {
                self.basis.push(v.unscale(residual));
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Coefficients of `x` against the basis (its orthogonal projection).
    pub fn coefficients(&self, x: &CMatrix) -> Vec<Complex64> {
        self.basis.iter().map(|b| b.dotc(x)).collect()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut p = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            let coeff = b.dotc(x);
            p += b * coeff;
        }
        p
    }

    /// Rebuild a matrix from basis coefficients.
    pub fn from_coefficients(&self, coeffs: &[Complex64]) -> CMatrix {
        assert_eq!(coeffs.len(), self.dim(), "coefficient length mismatch");
        let mut m = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            m += b * c;
        }
        m
    }

    /// Membership test. The residual is absolute; the verdict compares it
    /// against `eps_residual * max(1, |x|_HS)` so that large elements do
    /// not produce false negatives nor near-zero ones false positives.
    pub fn contains(&self, x: &CMatrix, tol: &Tolerances) -> Result<Membership> {
        if x.nrows() != self.ambient_dim || x.ncols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.nrows(),
            });
        }
        let residual = hs_norm(&(x - self.project(x)));
        let member = residual <= tol.eps_residual * hs_norm(x).max(1.0);
        Ok(Membership { member, residual })
    }

    /// Two-sided subspace equality via mutual basis containment.
    pub fn equals(&self, other: &Self, tol: &Tolerances) -> Result<SubspaceMatch> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        let mut gap: f64 = 0.0;
        for b in &self.basis {
            gap = gap.max(other.contains(b, tol)?.residual);
        }
        for b in &other.basis {
            gap = gap.max(self.contains(b, tol)?.residual);
        }
        Ok(SubspaceMatch {
            equal: gap <= tol.eps_residual,
            gap,
        })
    }

    /// Image subspace under an entrywise-linear matrix transformation.
    pub fn map<F>(&self, tol: &Tolerances, f: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> CMatrix,
    {
        let images: Vec<CMatrix> = self.basis.iter().map(f).collect();
        Self::span(self.ambient_dim, &images, tol)
    }
}
