//! Builders for certified completely positive contractive idempotent maps.
//!
//! These are the instance generators behind the whole test corpus:
//! pinchings, finite group averages, conjugated pinchings, and Cesaro
//! fixed-point projections of channels. The Cesaro route is the one that
//! produces ranges which are *not* closed under the ordinary product,
//! which is exactly where the range product has content.

use num_complex::Complex64;
use rand::Rng;

use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{
    hs_norm, identity, operator_norm, zeros, CMatrix, Tolerances, ONE,
};
use crate::sampling::{
    derive_seed, diagonal_phases, gap_separated_phases, haar_unitary, random_state,
    rng_from_seed,
};

/// Retry budget for Cesaro instance generation before giving up.
pub const CESARO_RETRY_CAP: usize = 16;

/// Largest accepted unitary group.
pub const GROUP_ORDER_CAP: usize = 48;

/// Minimum angular gap enforced between distinct twist phases; keeps the
/// peripheral transfer spectrum away from 1 so Cesaro averaging converges
/// within the doubling budget.
const PHASE_GAP: f64 = 0.3;

/// Window-delta threshold at which averaging hands over to the polish.
/// Small enough that the non-fixed spectrum of the average sits deep in
/// the polish's basin of attraction, large enough that the squaring drift
/// (`2^m · ε`) is still far below it.
pub const CESARO_WINDOW_STOP: f64 = 1e-3;

/// Rounds of `A ↦ 3A² - 2A³`; quadratic contraction makes this generous.
const CESARO_POLISH_ROUNDS: usize = 14;

/// A partition of the coordinate set {0, .., n-1} into disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates: blocks nonempty, disjoint, covering {0, .., n-1}.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition {
                reason: "ambient dimension must be positive".into(),
            });
        }
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition {
                    reason: "empty block".into(),
                });
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition {
                        reason: format!("index {i} out of range for dimension {n}"),
                    });
                }
                if seen[i] {
                    return Err(Error::InvalidPartition {
                        reason: format!("index {i} appears twice"),
                    });
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidPartition {
                reason: "blocks do not cover every index".into(),
            });
        }
        Ok(Self { n, blocks })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Coordinate projection onto one block.
    pub fn projector(&self, block: usize) -> CMatrix {
        let mut p = zeros(self.n);
        for &i in &self.blocks[block] {
            p[(i, i)] = ONE;
        }
        p
    }
}

/// A channel given by Kraus operators, with a certified trace-preservation
/// flag (`Σ K† K = I` within `eps_residual`).
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

impl ChannelSpec {
    pub fn new(kraus: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let n = first.nrows();
        for k in &kraus {
            if k.nrows() != n || k.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.nrows(),
                });
            }
        }
        let mut effect = zeros(n);
        for k in &kraus {
            effect += k.adjoint() * k;
        }
        let trace_preserving = operator_norm(&(effect - identity(n))) <= tol.eps_residual;
        Ok(Self {
            kraus,
            trace_preserving,
        })
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn to_map(&self) -> CpMap {
        CpMap::from_kraus(self.kraus.clone()).expect("validated at construction")
    }
}

/// Pinching onto the block-diagonal algebra of a partition:
/// `phi(x) = Σ_b P_b x P_b`.
pub fn pinching(p: &Partition) -> CpMap {
    let kraus: Vec<CMatrix> = (0..p.blocks().len()).map(|b| p.projector(b)).collect();
    CpMap::from_kraus(kraus).expect("projectors share the partition dimension")
}

/// Average over a finite unitary group:
/// `phi(x) = (1/|G|) Σ_g u_g x u_g†`.
///
/// The list must contain the identity and be closed under products and
/// inverses within `eps_residual`; groups above [`GROUP_ORDER_CAP`]
/// elements are rejected.
pub fn group_average(unitaries: &[CMatrix], tol: &Tolerances) -> Result<CpMap> {
    let first = unitaries.first().ok_or(Error::EmptyKraus)?;
    let n = first.nrows();
    if unitaries.len() > GROUP_ORDER_CAP {
        return Err(Error::NotAGroup {
            reason: format!(
                "{} elements exceed the supported cap {GROUP_ORDER_CAP}",
                unitaries.len()
            ),
        });
    }
    for u in unitaries {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.nrows(),
            });
        }
        let res = operator_norm(&(u.adjoint() * u - identity(n)));
        if res > tol.eps_residual {
            return Err(Error::NotUnitary { residual: res });
        }
    }
    let matches_some = |m: &CMatrix| -> bool {
        unitaries
            .iter()
            .any(|u| hs_norm(&(m - u)) <= tol.eps_residual * hs_norm(m).max(1.0))
    };
    if !matches_some(&identity(n)) {
        return Err(Error::NotAGroup {
            reason: "identity element missing".into(),
        });
    }
    for (i, a) in unitaries.iter().enumerate() {
        let inv = a.adjoint();
        if !matches_some(&inv) {
            return Err(Error::NotAGroup {
                reason: format!("inverse of element {i} missing"),
            });
        }
        for (j, b) in unitaries.iter().enumerate() {
            if !matches_some(&(a * b)) {
                return Err(Error::NotAGroup {
                    reason: format!("product of elements {i} and {j} missing"),
                });
            }
        }
    }
    let scale = Complex64::new(1.0 / (unitaries.len() as f64).sqrt(), 0.0);
    let kraus: Vec<CMatrix> = unitaries.iter().map(|u| u * scale).collect();
    CpMap::from_kraus(kraus)
}

/// Pinching conjugated by a unitary: `phi(x) = u pinch(u† x u) u†`.
pub fn conjugated_pinching(u: &CMatrix, p: &Partition, tol: &Tolerances) -> Result<CpMap> {
    let n = p.ambient_dim();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.nrows(),
        });
    }
    let res = operator_norm(&(u.adjoint() * u - identity(n)));
    if res > tol.eps_residual {
        return Err(Error::NotUnitary { residual: res });
    }
    let kraus: Vec<CMatrix> = (0..p.blocks().len())
        .map(|b| u * p.projector(b) * u.adjoint())
        .collect();
    CpMap::from_kraus(kraus)
}

/// Corner-plus-states projection on M_{k+m}: compress to the leading k x k
/// corner and rebroadcast it onto the m trailing diagonal slots through
/// the given corner states:
///
/// `phi(z) = P z P + Σ_j tr(P z P ρ_j) e_{k+j, k+j}`.
///
/// Completely positive, unital and idempotent by construction. Its range
/// `{x ⊕ (tr(x ρ_1), .., tr(x ρ_m)) : x ∈ M_k}` is closed under the
/// ordinary product only when every state is multiplicative, which fails
/// for every state on M_k with k >= 2 — the canonical source of ranges
/// where the induced product differs from the ambient one.
pub fn corner_projection(corner_dim: usize, states: &[CMatrix]) -> Result<CpMap> {
    let k = corner_dim;
    let m = states.len();
    if k == 0 || m == 0 {
        return Err(Error::EmptyKraus);
    }
    let n = k + m;
    for s in states {
        if s.nrows() != k || s.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: s.nrows(),
            });
        }
    }
    let mut kraus = Vec::new();
    let mut corner = zeros(n);
    for i in 0..k {
        corner[(i, i)] = ONE;
    }
    kraus.push(corner);
    let tol = Tolerances::default();
    for (j, s) in states.iter().enumerate() {
        let (eigs, vecs) = crate::linalg::hermitian_eigen(s);
        for (l, &lambda) in eigs.iter().enumerate() {
            if lambda < -tol.eps_psd {
                return Err(Error::NotPsd { min_eig: lambda });
            }
            if lambda <= tol.eps_rank {
                continue;
            }
            // sqrt(λ) |k + j><v_l| with v embedded in the corner.
            let mut op = zeros(n);
            let root = Complex64::new(lambda.sqrt(), 0.0);
            for c in 0..k {
                op[(k + j, c)] = root * vecs[(c, l)].conj();
            }
            kraus.push(op);
        }
    }
    CpMap::from_kraus(kraus)
}

/// Cesaro fixed-point projection of a channel: doubling-window averages
/// `(1/2^m) Σ_{t<2^m} T^t` of the transfer matrix, refined by the
/// idempotent-polish iteration `A ↦ 3A² - 2A³`.
///
/// The averaging stops once consecutive windows differ by less than
/// [`CESARO_WINDOW_STOP`] in operator norm. At that point the averaged
/// spectrum sits in small disks around 0 and 1, and the polish — a
/// polynomial in the average, hence sharing its invariant subspaces —
/// contracts both clusters quadratically onto the exact spectral
/// projector, i.e. the Cesaro limit. Stopping early matters: pushing the
/// window average itself to certificate accuracy is impossible, because
/// repeated squaring of a spectral-radius-one matrix amplifies magnitude
/// roundoff by `2^m · ε` and the window deltas bottom out near 1e-8.
pub fn cesaro_projection(ch: &ChannelSpec, tol: &Tolerances, max_iter: usize) -> Result<CpMap> {
    let n = ch.dim();
    let t = ch.to_map().transfer_matrix();

    let mut avg = CMatrix::identity(n * n, n * n);
    let mut power = t.clone();
    let mut converged = false;
    let mut last_delta = f64::INFINITY;
    for _ in 0..max_iter {
        let next = (&avg + &power * &avg).scale(0.5);
        last_delta = operator_norm(&(&next - &avg));
        avg = next;
        power = &power * &power;
        if !last_delta.is_finite() || last_delta > 1e9 {
            return Err(Error::NoConvergence {
                rounds: max_iter,
                last_delta,
            });
        }
        if last_delta < CESARO_WINDOW_STOP {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            rounds: max_iter,
            last_delta,
        });
    }
    for _ in 0..CESARO_POLISH_ROUNDS {
        let sq = &avg * &avg;
        avg = &sq.scale(3.0) - (&sq * &avg).scale(2.0);
    }

    let map = CpMap::from_transfer(n, &avg)?;
    let cert = map.certificate(tol);
    if cert.idem_residual > 10.0 * tol.eps_residual {
        return Err(Error::IdempotencyFailed {
            residual: cert.idem_residual,
        });
    }
    Ok(map)
}

/// The four instance families of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Pinch,
    Group,
    Conjugated,
    Cesaro,
}

impl InstanceKind {
    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Pinch => "pinch",
            InstanceKind::Group => "group",
            InstanceKind::Conjugated => "conjugated",
            InstanceKind::Cesaro => "cesaro",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pinch" => Some(InstanceKind::Pinch),
            "group" => Some(InstanceKind::Group),
            "conjugated" => Some(InstanceKind::Conjugated),
            "cesaro" => Some(InstanceKind::Cesaro),
            _ => None,
        }
    }
}

/// Random partition of {0, .., n-1}: uniform block count, independent
/// block assignment, empty blocks dropped.
pub fn random_partition(rng: &mut impl Rng, n: usize) -> Partition {
    let count = rng.random_range(1..=n);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); count];
    for i in 0..n {
        blocks[rng.random_range(0..count)].push(i);
    }
    blocks.retain(|b| !b.is_empty());
    Partition::new(n, blocks).expect("assignment covers all indices")
}

fn random_group(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<CpMap> {
    let family = rng.random_range(0..3u32);
    let w = haar_unitary(rng, n);
    let elements: Vec<CMatrix> = match family {
        0 => {
            // Cyclic phase group of small order.
            let orders = [2usize, 3, 4, 6];
            let order = orders[rng.random_range(0..orders.len())];
            let step = std::f64::consts::TAU / order as f64;
            let phases: Vec<f64> = (0..n)
                .map(|_| step * rng.random_range(0..order) as f64)
                .collect();
            let g = &w * diagonal_phases(&phases) * w.adjoint();
            let mut pow = identity(n);
            (0..order)
                .map(|_| {
                    let cur = pow.clone();
                    pow = &pow * &g;
                    cur
                })
                .collect()
        }
        1 => {
            // Abelian sign-flip group from up to three generators.
            let gens = rng.random_range(1..=3.min(n));
            let mut sign_sets: Vec<Vec<f64>> = vec![vec![1.0; n]];
            for _ in 0..gens {
                let pattern: Vec<f64> = (0..n)
                    .map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 })
                    .collect();
                let mut extended = sign_sets.clone();
                for s in &sign_sets {
                    let prod: Vec<f64> = s.iter().zip(&pattern).map(|(a, b)| a * b).collect();
                    if !extended.contains(&prod) {
                        extended.push(prod);
                    }
                }
                sign_sets = extended;
            }
            sign_sets
                .iter()
                .map(|signs| {
                    let d = CMatrix::from_fn(n, n, |i, j| {
                        if i == j {
                            Complex64::new(signs[i], 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    });
                    &w * d * w.adjoint()
                })
                .collect()
        }
        _ => {
            // Cyclic permutation group.
            let len = rng.random_range(2..=n);
            let mut perm: Vec<usize> = (0..n).collect();
            perm[..len].rotate_left(1);
            let mut p = zeros(n);
            for (i, &pi) in perm.iter().enumerate() {
                p[(pi, i)] = ONE;
            }
            let g = &w * p * w.adjoint();
            let mut pow = identity(n);
            (0..len)
                .map(|_| {
                    let cur = pow.clone();
                    pow = &pow * &g;
                    cur
                })
                .collect()
        }
    };
    group_average(&elements, tol)
}

/// Channel whose Cesaro limit is a corner-plus-states projection pinched
/// along gap-separated twist phases: the corner rotates under a diagonal
/// unitary while the tail keeps sampling the corner through the states.
fn corner_twist_channel(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<ChannelSpec> {
    let k = rng.random_range(2..n);
    let m = n - k;
    let states: Vec<CMatrix> = (0..m).map(|_| random_state(rng, k)).collect();
    let base = corner_projection(k, &states)?;
    let mut phases = gap_separated_phases(rng, k, PHASE_GAP);
    phases.resize(n, 0.0);
    let twist = diagonal_phases(&phases);
    let w = haar_unitary(rng, n);
    let kraus: Vec<CMatrix> = base
        .kraus()
        .expect("corner projection is built from Kraus operators")
        .iter()
        .map(|op| &w * op * &twist * w.adjoint())
        .collect();
    ChannelSpec::new(kraus, tol)
}

fn random_cesaro_channel(rng: &mut impl Rng, n: usize, tol: &Tolerances) -> Result<ChannelSpec> {
    let family = if n >= 3 {
        rng.random_range(0..3u32)
    } else {
        rng.random_range(1..3u32)
    };
    match family {
        0 => corner_twist_channel(rng, n, tol),
        1 => {
            // Unitary conjugation with gap-separated eigenphases.
            let phases = gap_separated_phases(rng, n, PHASE_GAP);
            let w = haar_unitary(rng, n);
            let u = &w * diagonal_phases(&phases) * w.adjoint();
            ChannelSpec::new(vec![u], tol)
        }
        _ => {
            // Mixed-unitary channel over powers of one twist unitary.
            let order = rng.random_range(2..=4usize);
            let step = std::f64::consts::TAU / order as f64;
            let phases: Vec<f64> = (0..n)
                .map(|_| step * rng.random_range(0..order) as f64)
                .collect();
            let w = haar_unitary(rng, n);
            let g = &w * diagonal_phases(&phases) * w.adjoint();
            let weights: Vec<f64> = (0..order).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut pow = identity(n);
            let kraus: Vec<CMatrix> = weights
                .iter()
                .map(|&p| {
                    let op = pow.scale((p / total).sqrt());
                    pow = &pow * &g;
                    op
                })
                .collect();
            ChannelSpec::new(kraus, tol)
        }
    }
}

/// Deterministic instance generator: the same `(n, kind, seed)` always
/// yields the same map. Every returned map passes `certify_projection`
/// for cp, contractive and idempotent. The Cesaro family retries with
/// derived seeds up to [`CESARO_RETRY_CAP`] times before failing.
pub fn random_instance(n: usize, kind: InstanceKind, seed: u64) -> Result<CpMap> {
    if !(2..=8).contains(&n) {
        return Err(Error::UnsupportedDimension { n, min: 2, max: 8 });
    }
    let tol = Tolerances::default();
    match kind {
        InstanceKind::Pinch => {
            let mut rng = rng_from_seed(derive_seed(seed, 0x70));
            Ok(pinching(&random_partition(&mut rng, n)))
        }
        InstanceKind::Group => {
            let mut rng = rng_from_seed(derive_seed(seed, 0x71));
            random_group(&mut rng, n, &tol)
        }
        InstanceKind::Conjugated => {
            let mut rng = rng_from_seed(derive_seed(seed, 0x72));
            let p = random_partition(&mut rng, n);
            let u = haar_unitary(&mut rng, n);
            conjugated_pinching(&u, &p, &tol)
        }
        InstanceKind::Cesaro => {
            let mut last = Error::NoConvergence {
                rounds: 0,
                last_delta: f64::INFINITY,
            };
            for attempt in 0..CESARO_RETRY_CAP {
                let mut rng = rng_from_seed(derive_seed(seed, 0x73 + attempt as u64));
                match random_cesaro_channel(&mut rng, n, &tol)
                    .and_then(|ch| cesaro_projection(&ch, &tol, 48))
                {
                    Ok(map) => {
                        if map.certificate(&tol).is_projection() {
                            return Ok(map);
                        }
                        last = Error::IdempotencyFailed {
                            residual: map.certificate(&tol).idem_residual,
                        };
                    }
                    Err(e) => last = e,
                }
            }
            Err(Error::RetriesExhausted {
                attempts: CESARO_RETRY_CAP,
                last: last.to_string(),
            })
        }
    }
}
