//! Machine-readable certificate reports.
//!
//! A report is self-contained: it embeds the input map (up to n = 8; a
//! content hash above that), the tolerances and seeds used, and per-check
//! residuals from which every verdict can be re-derived.

use std::collections::BTreeMap;

use ce_core::linalg::CMatrix;
use ce_core::ProjectionCertificate;
use serde::{Deserialize, Serialize};

use crate::problem::{matrix_to_json, BuilderSpec, MatrixJson, ToleranceOverrides};

pub const REPORT_SCHEMA: &str = "ce-lab.report.v1";

/// Largest ambient dimension whose matrices are embedded verbatim.
pub const EMBED_DIM_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// One pipeline check: a verdict plus the residuals that justify it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    /// Numeric evidence, keyed by residual name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

impl CheckReport {
    pub fn residual(&self, key: &str) -> Option<f64> {
        self.residuals.get(key).copied()
    }
}

/// Echo of the input map, embedded or hashed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EmbeddedInput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
    /// FNV-1a content hash, used instead of matrices above the embed limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hash: Option<String>,
    /// Builder provenance when the input came from a builder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder: Option<BuilderSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub eps_herm: f64,
    pub eps_psd: f64,
    pub eps_rank: f64,
    pub eps_residual: f64,
}

impl From<ce_core::Tolerances> for ToleranceReport {
    fn from(t: ce_core::Tolerances) -> Self {
        Self {
            eps_herm: t.eps_herm,
            eps_psd: t.eps_psd,
            eps_rank: t.eps_rank,
            eps_residual: t.eps_residual,
        }
    }
}

impl From<ToleranceReport> for ce_core::Tolerances {
    fn from(t: ToleranceReport) -> Self {
        Self {
            eps_herm: t.eps_herm,
            eps_psd: t.eps_psd,
            eps_rank: t.eps_rank,
            eps_residual: t.eps_residual,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptionsReport {
    pub k_max: usize,
    pub order_trials: usize,
    pub words_per_length: usize,
    pub word_min_length: usize,
    pub word_max_length: usize,
    pub ks_probes: usize,
    pub isometry_trials: usize,
    pub max_rounds: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateEcho {
    pub cp: bool,
    pub choi_min_eig: f64,
    pub choi_herm_residual: f64,
    pub contractive: Option<bool>,
    pub norm_of_unit_image: f64,
    pub idempotent: bool,
    pub idem_residual: f64,
    pub unital: bool,
    pub unit_residual: f64,
    pub star_preserving: bool,
    pub star_residual: f64,
}

impl From<&ProjectionCertificate> for CertificateEcho {
    fn from(c: &ProjectionCertificate) -> Self {
        Self {
            cp: c.cp,
            choi_min_eig: c.choi_min_eig,
            choi_herm_residual: c.choi_herm_residual,
            contractive: c.contractive,
            norm_of_unit_image: c.norm_of_unit_image,
            idempotent: c.idempotent,
            idem_residual: c.idem_residual,
            unital: c.unital,
            unit_residual: c.unit_residual,
            star_preserving: c.star_preserving,
            star_residual: c.star_residual,
        }
    }
}

/// Dimension bookkeeping of the construction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DimsReport {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub block_dims: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub in_ideal: Vec<bool>,
}

/// The full certificate report for one problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: String,
    pub n: usize,
    pub input: EmbeddedInput,
    pub tolerances: ToleranceReport,
    pub seed: u64,
    pub options: OptionsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateEcho>,
    pub dims: DimsReport,
    /// Worst distance of a range-basis product from the range: positive
    /// values mean the range is not closed under the ambient product.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_product_closure_residual: Option<f64>,
    pub checks: Vec<CheckReport>,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
    pub all_passed: bool,
}

impl CertificateReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Exit-code contract: true iff every non-skipped check passed.
    pub fn compute_all_passed(checks: &[CheckReport]) -> bool {
        checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

/// FNV-1a over the little-endian bytes of the matrix entries.
pub fn matrix_hash(mats: &[CMatrix]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for m in mats {
        eat(m.nrows() as f64);
        for e in m.iter() {
            eat(e.re);
            eat(e.im);
        }
    }
    format!("fnv1a:{h:016x}")
}

/// Embed a map for the report: matrices verbatim up to the embed limit,
/// hash only above it.
pub fn embed_input(
    n: usize,
    kraus: Option<&[CMatrix]>,
    choi: &CMatrix,
    builder: Option<&BuilderSpec>,
) -> EmbeddedInput {
    let mut out = EmbeddedInput {
        builder: builder.cloned(),
        ..EmbeddedInput::default()
    };
    if n <= EMBED_DIM_LIMIT {
        match kraus {
            Some(ops) => out.kraus = Some(ops.iter().map(matrix_to_json).collect()),
            None => out.choi = Some(matrix_to_json(choi)),
        }
    } else {
        let mats: Vec<CMatrix> = match kraus {
            Some(ops) => ops.to_vec(),
            None => vec![choi.clone()],
        };
        out.hash = Some(matrix_hash(&mats));
    }
    out
}

/// Rebuild a problem file from an embedded input, for reproducing a
/// report from itself.
pub fn problem_from_embedded(
    n: usize,
    input: &EmbeddedInput,
    tolerances: &ToleranceReport,
) -> Option<crate::problem::ProblemFile> {
    if input.kraus.is_none() && input.choi.is_none() {
        return None;
    }
    Some(crate::problem::ProblemFile {
        n,
        kraus: input.kraus.clone(),
        choi: input.choi.clone(),
        builder: None,
        tolerances: Some(ToleranceOverrides {
            eps_herm: Some(tolerances.eps_herm),
            eps_psd: Some(tolerances.eps_psd),
            eps_rank: Some(tolerances.eps_rank),
            eps_residual: Some(tolerances.eps_residual),
        }),
        checks: None,
    })
}
