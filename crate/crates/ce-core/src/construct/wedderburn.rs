//! Block decomposition of a finite-dimensional C*-algebra.
//!
//! The minimal central projections are recovered by eigenvalue clustering
//! of a seeded random Hermitian central element, compressed onto the
//! support of the algebra unit so null ambient directions never
//! contaminate the clusters. The center dimension, computed exactly as a
//! null-space rank, certifies that no two blocks were merged: the loop
//! reseeds until the cluster count matches it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hs_norm, CMatrix, Tolerances};
use crate::sampling::{derive_seed, rng_from_seed};
use crate::subspace::OperatorSubspace;

/// Eigenvalue gap below which two clusters are considered merged and the
/// central element is redrawn.
const CLUSTER_GAP: f64 = 1e-6;

/// Reseed budget for the clustering loop.
const CLUSTER_RESEEDS: usize = 8;

/// Minimal central projections and block dimensions of a C*-algebra.
#[derive(Debug, Clone)]
pub struct WedderburnDecomposition {
    /// Minimal central projections, as ambient matrices.
    pub central_projections: Vec<CMatrix>,
    /// Per block: (matrix size n_i, multiplicity m_i).
    pub block_dims: Vec<(usize, usize)>,
    /// Whether each block lies inside the kernel ideal. Left `false` here;
    /// the quotient construction fills it in.
    pub in_ideal: Vec<bool>,
    /// Unit of the algebra, as an ambient matrix.
    pub unit: CMatrix,
}

impl WedderburnDecomposition {
    pub fn block_count(&self) -> usize {
        self.central_projections.len()
    }

    /// Σ n_i² over all blocks: must equal the algebra dimension.
    pub fn total_block_dim(&self) -> usize {
        self.block_dims.iter().map(|&(n, _)| n * n).sum()
    }
}

/// Ambient-product structure constants `<a_l, a_x a_y>` of an orthonormal
/// algebra basis.
fn product_coefficients(basis: &[CMatrix]) -> Vec<Complex64> {
    let d = basis.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d * d * d];
    for x in 0..d {
        for y in 0..d {
            let p = &basis[x] * &basis[y];
            for (l, a) in basis.iter().enumerate() {
                coeffs[(x * d + y) * d + l] = a.dotc(&p);
            }
        }
    }
    coeffs
}

/// Least-squares unit of the algebra in its own coefficient space, gated
/// by the matrix-level unit laws.
fn algebra_unit(
    basis: &[CMatrix],
    coeffs: &[Complex64],
    tol: &Tolerances,
) -> Result<CMatrix> {
    let d = basis.len();
    let n = basis[0].nrows();
    let mut system = DMatrix::<Complex64>::zeros(2 * d * d, d);
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(2 * d * d);
    for i in 0..d {
        for l in 0..d {
            for k in 0..d {
                system[(i * d + l, k)] = coeffs[(k * d + i) * d + l];
                system[(d * d + i * d + l, k)] = coeffs[(i * d + k) * d + l];
            }
            if i == l {
                rhs[i * d + l] = Complex64::new(1.0, 0.0);
                rhs[d * d + i * d + l] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let solution = crate::linalg::least_squares(&system, &rhs, tol.eps_rank);
    let mut unit = CMatrix::zeros(n, n);
    for (k, b) in basis.iter().enumerate() {
        unit += b * solution[k];
    }
    let mut law: f64 = 0.0;
    for a in basis {
        law = law.max(hs_norm(&(&unit * a - a)));
        law = law.max(hs_norm(&(a * &unit - a)));
    }
    if law > tol.eps_residual {
        return Err(Error::NotAnAlgebra {
            reason: format!("unit law residual {law:.3e}"),
        });
    }
    Ok(unit)
}

/// Orthonormal Hermitian basis of the center, via a real Gram-Schmidt over
/// the Hermitian parts of a complex center basis.
fn hermitian_center_basis(center: &[CMatrix], tol: &Tolerances) -> Vec<CMatrix> {
    let mut herm = Vec::new();
    let mut candidates = Vec::with_capacity(2 * center.len());
    for z in center {
        candidates.push((z + z.adjoint()).scale(0.5));
        let skew = (z - z.adjoint()).scale(0.5);
        candidates.push(skew.map(|e| Complex64::new(e.im, -e.re))); // -i * skew
    }
    for cand in candidates {
        let mut v = cand;
        for _ in 0..2 {
            for h in &herm {
                let coeff = v.dotc(h).re;
                v -= h * Complex64::new(coeff, 0.0);
            }
        }
        let norm = hs_norm(&v);
        if norm >= tol.eps_rank {
            herm.push(v.unscale(norm));
        }
    }
    herm
}

/// Computes the block structure of a product- and adjoint-closed unital
/// subspace of M_n. `seed` drives the random central elements used for
/// eigenvalue clustering.
pub fn wedderburn(
    algebra: &OperatorSubspace,
    tol: &Tolerances,
    seed: u64,
) -> Result<WedderburnDecomposition> {
    let basis = algebra.basis();
    let d = basis.len();
    let n = algebra.ambient_dim();
    if d == 0 {
        return Err(Error::NotAnAlgebra {
            reason: "zero-dimensional input".into(),
        });
    }

    // Closure certification before anything else trusts it.
    let mut closure: f64 = 0.0;
    for x in basis {
        closure = closure.max(algebra.contains(&x.adjoint(), tol)?.residual);
        for y in basis {
            closure = closure.max(algebra.contains(&(x * y), tol)?.residual);
        }
    }
    if closure > tol.eps_residual {
        return Err(Error::NotAnAlgebra {
            reason: format!("closure residual {closure:.3e}"),
        });
    }

    let coeffs = product_coefficients(basis);
    let unit = algebra_unit(basis, &coeffs, tol)?;

    // Support isometry of the unit: compress onto range(unit) so that the
    // spectral analysis below never sees the ambient null space.
    let (unit_eigs, unit_vecs) = hermitian_eigen(&unit);
    let support: Vec<usize> = (0..n).filter(|&i| unit_eigs[i] > 0.5).collect();
    let rank = support.len();
    let mut isometry = DMatrix::<Complex64>::zeros(n, rank);
    for (col, &idx) in support.iter().enumerate() {
        isometry.set_column(col, &unit_vecs.column(idx).clone_owned());
    }

    // Center: null space of the commutator system in coefficient space.
    let mut commutators = DMatrix::<Complex64>::zeros(d * d, d);
    for i in 0..d {
        for l in 0..d {
            for k in 0..d {
                commutators[(i * d + l, k)] =
                    coeffs[(k * d + i) * d + l] - coeffs[(i * d + k) * d + l];
            }
        }
    }
    let mut center = Vec::new();
    for central_coeffs in crate::linalg::null_space(&commutators, tol.eps_rank) {
        let mut z = CMatrix::zeros(n, n);
        for (k, b) in basis.iter().enumerate() {
            z += b * central_coeffs[k];
        }
        center.push(z);
    }
    let center_dim = center.len();
    if center_dim == 0 {
        return Err(Error::NotAnAlgebra {
            reason: "center is empty; unit equations must have failed".into(),
        });
    }
    let herm_center = hermitian_center_basis(&center, tol);

    'attempt: for attempt in 0..CLUSTER_RESEEDS {
        let mut rng = rng_from_seed(derive_seed(seed, 0xB10C + attempt as u64));
        let mut h = CMatrix::zeros(n, n);
        for basis_elem in &herm_center {
            let xi: f64 = rng.sample(StandardNormal);
            h += basis_elem * Complex64::new(xi, 0.0);
        }
        let compressed = isometry.adjoint() * &h * &isometry;
        let (eigs, vecs) = hermitian_eigen(&compressed);
        let mut order: Vec<usize> = (0..rank).collect();
        order.sort_by(|&a, &b| eigs[a].total_cmp(&eigs[b]));

        let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
        for w in order.windows(2) {
            if eigs[w[1]] - eigs[w[0]] > CLUSTER_GAP {
                clusters.push(Vec::new());
            }
            clusters.last_mut().expect("nonempty").push(w[1]);
        }
        if clusters.len() != center_dim {
            continue;
        }

        let mut projections = Vec::with_capacity(clusters.len());
        let mut block_dims = Vec::with_capacity(clusters.len());
        for cluster in &clusters {
            let mut p_small = DMatrix::<Complex64>::zeros(rank, rank);
            for &idx in cluster {
                let v = vecs.column(idx);
                p_small.gerc(Complex64::new(1.0, 0.0), &v, &v, Complex64::new(1.0, 0.0));
            }
            let p = &isometry * &p_small * isometry.adjoint();

            // Centrality certificate.
            for a in basis {
                if hs_norm(&(&p * a - a * &p)) > tol.eps_residual {
                    continue 'attempt;
                }
            }

            // Block size from dim(p A0 p) = n_i^2 and multiplicity from
            // rank(p) = n_i m_i.
            let compressions: Vec<CMatrix> = basis.iter().map(|a| &p * a * &p).collect();
            let block_space = OperatorSubspace::span(n, &compressions, tol)?;
            let s = block_space.dim();
            let ni = (s as f64).sqrt().round() as usize;
            if ni * ni != s || ni == 0 {
                continue 'attempt;
            }
            let p_rank = p.trace().re.round();
            if (p.trace().re - p_rank).abs() > 1e-6 {
                continue 'attempt;
            }
            let p_rank = p_rank as usize;
            if !p_rank.is_multiple_of(ni) {
                continue 'attempt;
            }
            projections.push(p);
            block_dims.push((ni, p_rank / ni));
        }

        if block_dims.iter().map(|&(ni, _)| ni * ni).sum::<usize>() != d {
            continue;
        }

        let in_ideal = vec![false; projections.len()];
        return Ok(WedderburnDecomposition {
            central_projections: projections,
            block_dims,
            in_ideal,
            unit,
        });
    }
    Err(Error::ClusterAmbiguity {
        attempts: CLUSTER_RESEEDS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, matrix_unit};

    fn diag_algebra(n: usize) -> OperatorSubspace {
        let tol = Tolerances::default();
        let units: Vec<CMatrix> = (0..n).map(|i| matrix_unit(n, i, i)).collect();
        OperatorSubspace::span(n, &units, &tol).unwrap()
    }

    #[test]
    fn diagonal_algebra_splits_into_scalar_blocks() {
        let tol = Tolerances::default();
        let w = wedderburn(&diag_algebra(3), &tol, 7).unwrap();
        assert_eq!(w.block_count(), 3);
        assert!(w.block_dims.iter().all(|&bd| bd == (1, 1)));
        assert_eq!(w.total_block_dim(), 3);
        assert!(hs_norm(&(&w.unit - identity(3))) < 1e-10);
    }

    #[test]
    fn full_matrix_algebra_is_one_block() {
        let tol = Tolerances::default();
        let mut units = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                units.push(matrix_unit(2, i, j));
            }
        }
        let a = OperatorSubspace::span(2, &units, &tol).unwrap();
        let w = wedderburn(&a, &tol, 3).unwrap();
        assert_eq!(w.block_count(), 1);
        assert_eq!(w.block_dims, vec![(2, 1)]);
    }

    #[test]
    fn doubled_block_has_multiplicity_two() {
        // {x ⊕ x : x ∈ M_2} inside M_4.
        let tol = Tolerances::default();
        let mut gens = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut m = CMatrix::zeros(4, 4);
                m[(i, j)] = Complex64::new(1.0, 0.0);
                m[(2 + i, 2 + j)] = Complex64::new(1.0, 0.0);
                gens.push(m);
            }
        }
        let a = OperatorSubspace::span(4, &gens, &tol).unwrap();
        assert_eq!(a.dim(), 4);
        let w = wedderburn(&a, &tol, 11).unwrap();
        assert_eq!(w.block_count(), 1);
        assert_eq!(w.block_dims, vec![(2, 2)]);
        assert_eq!(w.total_block_dim(), 4);
    }

    #[test]
    fn mixed_algebra_blocks() {
        // M_2 ⊕ C inside M_3.
        let tol = Tolerances::default();
        let mut gens = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                gens.push(matrix_unit(3, i, j));
            }
        }
        gens.push(matrix_unit(3, 2, 2));
        let a = OperatorSubspace::span(3, &gens, &tol).unwrap();
        let w = wedderburn(&a, &tol, 5).unwrap();
        assert_eq!(w.block_count(), 2);
        let mut dims = w.block_dims.clone();
        dims.sort();
        assert_eq!(dims, vec![(1, 1), (2, 1)]);
    }

    #[test]
    fn non_algebra_input_is_rejected() {
        // span{I, e12 + e23} is not closed under products.
        let tol = Tolerances::default();
        let g = matrix_unit(3, 0, 1) + matrix_unit(3, 1, 2);
        let s = OperatorSubspace::span(3, &[identity(3), g], &tol).unwrap();
        assert!(matches!(
            wedderburn(&s, &tol, 0),
            Err(Error::NotAnAlgebra { .. })
        ));
    }

    #[test]
    fn seeded_runs_are_deterministic() {
        let tol = Tolerances::default();
        let a = diag_algebra(4);
        let w1 = wedderburn(&a, &tol, 9).unwrap();
        let w2 = wedderburn(&a, &tol, 9).unwrap();
        assert_eq!(w1.block_dims, w2.block_dims);
        for (p, q) in w1.central_projections.iter().zip(&w2.central_projections) {
            assert_eq!(p, q);
        }
    }
}
