//! Problem files: the interchange format consumed by the CLI.
//!
//! A problem file is a JSON document with string keys and nested arrays;
//! complex entries are `[re, im]` pairs and matrices are row-major nested
//! arrays. Exactly one of `kraus`, `choi` or `builder` describes the map.
//! Partition blocks in builder params are 1-based.

use ce_core::builders::{
    conjugated_pinching, pinching, random_instance, InstanceKind, Partition,
};
use ce_core::linalg::{CMatrix, Tolerances};
use ce_core::sampling::{haar_unitary, rng_from_seed};
use ce_core::CpMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row-major matrix with `[re, im]` entries.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("exactly one of `kraus`, `choi`, `builder` must be present; found {found}")]
    AmbiguousMapSpec { found: usize },

    #[error("unknown builder kind `{0}` (expected pinch, group, conjugated or cesaro)")]
    UnknownKind(String),

    #[error("unknown check name `{0}`")]
    UnknownCheck(String),

    #[error("builder params are only supported for `pinch` and `conjugated`")]
    UnexpectedParams,

    #[error(transparent)]
    Core(#[from] ce_core::Error),
}

/// Optional per-file tolerance overrides.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_herm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_psd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rank: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_residual: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            eps_herm: self.eps_herm.unwrap_or(base.eps_herm),
            eps_psd: self.eps_psd.unwrap_or(base.eps_psd),
            eps_rank: self.eps_rank.unwrap_or(base.eps_rank),
            eps_residual: self.eps_residual.unwrap_or(base.eps_residual),
        }
    }
}

/// Builder request inside a problem file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuilderSpec {
    pub kind: String,
    /// Partition blocks, 1-based, for `pinch` and `conjugated`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub seed: u64,
}

/// A parsed and validated problem document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder: Option<BuilderSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    /// Check names to run; everything when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
}

/// All check names, in pipeline order.
pub const CHECK_NAMES: [&str; 12] = [
    "projection",
    "range",
    "generated_algebra",
    "ideal",
    "kernel_equals_ideal",
    "bilateral",
    "word_defect",
    "kadison_schwarz",
    "ce_axioms",
    "wedderburn",
    "quotient_iso",
    "order_iso",
];

/// The isometry comparison is reported separately because it only gates
/// in the unital case.
pub const UNITAL_ISOMETRY_CHECK: &str = "unital_isometry";

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(data: &MatrixJson, expect: usize) -> Result<CMatrix, ProblemError> {
    if data.len() != expect {
        return Err(ProblemError::Dimension(format!(
            "matrix has {} rows, expected {expect}",
            data.len()
        )));
    }
    let mut m = CMatrix::zeros(expect, expect);
    for (i, row) in data.iter().enumerate() {
        if row.len() != expect {
            return Err(ProblemError::Dimension(format!(
                "row {i} has {} entries, expected {expect}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

impl ProblemFile {
    /// Parse and validate a JSON document.
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile = serde_json::from_str(text)
            .map_err(|e| ProblemError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n == 0 {
            return Err(ProblemError::Dimension("n must be positive".into()));
        }
        let found = [self.kraus.is_some(), self.choi.is_some(), self.builder.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if found != 1 {
            return Err(ProblemError::AmbiguousMapSpec { found });
        }
        if let Some(kraus) = &self.kraus {
            if kraus.is_empty() {
                return Err(ProblemError::Dimension("kraus list is empty".into()));
            }
            for k in kraus {
                matrix_from_json(k, self.n)?;
            }
        }
        if let Some(choi) = &self.choi {
            matrix_from_json(choi, self.n * self.n)?;
        }
        if let Some(builder) = &self.builder {
            let kind = InstanceKind::parse(&builder.kind)
                .ok_or_else(|| ProblemError::UnknownKind(builder.kind.clone()))?;
            if builder.params.is_some()
                && !matches!(kind, InstanceKind::Pinch | InstanceKind::Conjugated)
            {
                return Err(ProblemError::UnexpectedParams);
            }
            if let Some(params) = &builder.params {
                self.partition_from_params(params)?;
            }
        }
        if let Some(checks) = &self.checks {
            for c in checks {
                if !CHECK_NAMES.contains(&c.as_str()) && c != UNITAL_ISOMETRY_CHECK {
                    return Err(ProblemError::UnknownCheck(c.clone()));
                }
            }
        }
        Ok(())
    }

    fn partition_from_params(&self, params: &[Vec<usize>]) -> Result<Partition, ProblemError> {
        let blocks: Vec<Vec<usize>> = params
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|&i| {
                        if i == 0 {
                            Err(ProblemError::Dimension(
                                "partition indices are 1-based".into(),
                            ))
                        } else {
                            Ok(i - 1)
                        }
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(Partition::new(self.n, blocks)?)
    }

    /// Realize the map this file describes.
    pub fn to_map(&self) -> Result<CpMap, ProblemError> {
        if let Some(kraus) = &self.kraus {
            let ops = kraus
                .iter()
                .map(|k| matrix_from_json(k, self.n))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(CpMap::from_kraus(ops)?);
        }
        if let Some(choi) = &self.choi {
            let c = matrix_from_json(choi, self.n * self.n)?;
            return Ok(CpMap::from_choi(self.n, c)?);
        }
        let builder = self.builder.as_ref().expect("validated");
        let kind = InstanceKind::parse(&builder.kind)
            .ok_or_else(|| ProblemError::UnknownKind(builder.kind.clone()))?;
        if let Some(params) = &builder.params {
            let partition = self.partition_from_params(params)?;
            let map = match kind {
                InstanceKind::Pinch => pinching(&partition),
                InstanceKind::Conjugated => {
                    let u = haar_unitary(&mut rng_from_seed(builder.seed), self.n);
                    conjugated_pinching(&u, &partition, &Tolerances::default())?
                }
                _ => unreachable!("validated"),
            };
            return Ok(map);
        }
        Ok(random_instance(self.n, kind, builder.seed)?)
    }

    pub fn tolerances(&self, base: Tolerances) -> Tolerances {
        match &self.tolerances {
            Some(over) => over.apply(base),
            None => base,
        }
    }
}
