//! Seeded random generators for matrices, unitaries, states and phases.
//!
//! Every randomized operation in the crate takes an explicit seed and owns
//! its PRNG state, so parallel runs stay deterministic per instance.
//! Bitwise reproducibility across platforms is not promised; certified
//! properties are.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, ONE};

/// The crate-wide seeded PRNG.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a stream seed from a base seed and an index, for retry loops and
/// per-instance streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 step over the combined value.
    let mut z = base
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard complex Gaussian scalar (real and imaginary parts N(0, 1/2)).
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

/// r x c matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Random Hermitian matrix `(g + g†)/2`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phase
/// convention that makes the R diagonal real positive.
pub fn haar_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density matrix `g g† / tr(g g†)`.
pub fn random_state(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let s = &g * g.adjoint();
    let tr = s.trace();
    s.unscale(tr.re)
}

/// `count` angles on the circle whose pairwise differences stay at least
/// `min_gap` radians away from 0 (mod 2π). Falls back to an evenly spaced
/// grid when rejection sampling runs out of tries.
pub fn gap_separated_phases(rng: &mut impl Rng, count: usize, min_gap: f64) -> Vec<f64> {
    use std::f64::consts::TAU;
    if count == 1 {
        return vec![rng.random_range(0.0..TAU)];
    }
    'attempt: for _ in 0..64 {
        let mut phases: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..TAU)).collect();
        phases.sort_by(f64::total_cmp);
        for w in phases.windows(2) {
            if w[1] - w[0] < min_gap {
                continue 'attempt;
            }
        }
        if TAU - (phases[count - 1] - phases[0]) < min_gap {
            continue 'attempt;
        }
        return phases;
    }
    let offset = rng.random_range(0.0..TAU);
    (0..count)
        .map(|k| (offset + TAU * k as f64 / count as f64) % TAU)
        .collect()
}

/// Random element of the span of `basis` with complex Gaussian
/// coefficients.
pub fn random_combination(rng: &mut impl Rng, basis: &[CMatrix], n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for b in basis {
        out += b * complex_gaussian(rng);
    }
    out
}

/// Diagonal unitary with the given phases.
pub fn diagonal_phases(phases: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&t| Complex64::new(t.cos(), t.sin())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_norm, identity, operator_norm};

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(11);
        for n in [2, 3, 5] {
            let u = haar_unitary(&mut rng, n);
            let res = hs_norm(&(u.adjoint() * &u - identity(n)));
            assert!(res < 1e-12, "unitarity residual {res}");
        }
    }

    #[test]
    fn random_state_is_normalized_psd() {
        let mut rng = rng_from_seed(7);
        let s = random_state(&mut rng, 3);
        assert!((s.trace().re - 1.0).abs() < 1e-12);
        assert!(operator_norm(&(&s - s.adjoint())) < 1e-12);
    }

    #[test]
    fn phases_respect_minimum_gap() {
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let phases = gap_separated_phases(&mut rng, 4, 0.3);
            for i in 0..phases.len() {
                for j in (i + 1)..phases.len() {
                    let mut d = (phases[i] - phases[j]).abs() % std::f64::consts::TAU;
                    d = d.min(std::f64::consts::TAU - d);
                    assert!(d >= 0.3 - 1e-9, "gap {d}");
                }
            }
        }
    }

    #[test]
    fn seeded_streams_are_deterministic() {
        let a = gaussian_matrix(&mut rng_from_seed(42), 3, 3);
        let b = gaussian_matrix(&mut rng_from_seed(42), 3, 3);
        assert_eq!(a, b);
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
        assert_ne!(derive_seed(5, 9), derive_seed(5, 10));
    }
}
