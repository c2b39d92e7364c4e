//! Corpus runs: generate certified instances, run the pipeline on each,
//! and aggregate a summary.
//!
//! The corpus must contain at least one Cesaro instance whose range is
//! not closed under the ambient product (that is where the induced
//! product differs from the ordinary one). If the planned instances do
//! not contain one, additional Cesaro instances are appended, up to the
//! documented cap of 200 total.

use std::collections::BTreeMap;

use ce_core::builders::{random_instance, InstanceKind};
use ce_core::sampling::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pipeline::{corpus_plan, run_pipeline_on_map, InstancePlan, PipelineOptions};
use crate::problem::ProblemFile;
use crate::report::{CertificateReport, Verdict};

/// Range-closure residual above which an instance counts as a genuine
/// contrast witness (its range is not an algebra under the ambient
/// product).
pub const CONTRAST_THRESHOLD: f64 = 1e-4;

/// Hard cap on corpus size when searching for a contrast witness.
pub const CONTRAST_SEARCH_CAP: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct CorpusConfig {
    pub count: usize,
    pub n_max: usize,
    pub seed: u64,
    pub options: PipelineOptions,
}

/// One corpus row: the plan entry plus its report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub kind: String,
    pub n: usize,
    pub seed: u64,
    /// Set when instance generation itself failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CertificateReport>,
}

impl InstanceRecord {
    pub fn all_passed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.all_passed)
    }

    pub fn closure_residual(&self) -> Option<f64> {
        self.report
            .as_ref()
            .and_then(|r| r.range_product_closure_residual)
    }

    pub fn is_contrast_witness(&self) -> bool {
        self.kind == "cesaro"
            && self.all_passed()
            && self.closure_residual().unwrap_or(0.0) > CONTRAST_THRESHOLD
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Worst residual seen, per residual key.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub worst: BTreeMap<String, f64>,
}

/// Aggregated corpus outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub requested: usize,
    pub generated: usize,
    pub seed: u64,
    pub n_max: usize,
    pub per_check: BTreeMap<String, CheckAggregate>,
    /// Indices of Cesaro instances whose range fails ambient closure
    /// while all their checks pass.
    pub contrast_instances: Vec<usize>,
    pub instances_all_passed: bool,
    pub all_passed: bool,
    pub instances: Vec<InstanceRecord>,
}

fn problem_for(plan: &InstancePlan) -> ProblemFile {
    ProblemFile {
        n: plan.n,
        kraus: None,
        choi: None,
        builder: Some(crate::problem::BuilderSpec {
            kind: plan.kind.name().to_string(),
            params: None,
            seed: plan.seed,
        }),
        tolerances: None,
        checks: None,
    }
}

fn run_instance(plan: &InstancePlan, options: &PipelineOptions) -> InstanceRecord {
    let problem = problem_for(plan);
    let mut opts = *options;
    opts.seed = derive_seed(options.seed, plan.index as u64);
    match random_instance(plan.n, plan.kind, plan.seed) {
        Ok(map) => InstanceRecord {
            index: plan.index,
            kind: plan.kind.name().to_string(),
            n: plan.n,
            seed: plan.seed,
            generation_error: None,
            report: Some(run_pipeline_on_map(map, &problem, &opts)),
        },
        Err(e) => InstanceRecord {
            index: plan.index,
            kind: plan.kind.name().to_string(),
            n: plan.n,
            seed: plan.seed,
            generation_error: Some(e.to_string()),
            report: None,
        },
    }
}

/// Runs a full corpus. Instances are certified in parallel (the rayon
/// pool honors `CE_LAB_THREADS` when the caller configured it) and the
/// summary is assembled in index order, so results are deterministic for
/// a given (count, n_max, seed, options).
pub fn run_corpus(config: &CorpusConfig) -> CorpusSummary {
    let mut plans = corpus_plan(config.count, config.n_max, config.seed);
    let mut records: Vec<InstanceRecord> = plans
        .par_iter()
        .map(|p| run_instance(p, &config.options))
        .collect();

    // Contrast search: append Cesaro instances until a witness shows up
    // or the cap is reached.
    let mut next_index = plans.len();
    while !records.iter().any(InstanceRecord::is_contrast_witness)
        && records.len() < CONTRAST_SEARCH_CAP
    {
        let n = 3 + (next_index % (config.n_max.saturating_sub(2).max(1)));
        let plan = InstancePlan {
            index: next_index,
            kind: InstanceKind::Cesaro,
            n: n.min(config.n_max),
            seed: derive_seed(config.seed, 0xC0_0000 + next_index as u64),
        };
        records.push(run_instance(&plan, &config.options));
        plans.push(plan);
        next_index += 1;
    }

    let mut per_check: BTreeMap<String, CheckAggregate> = BTreeMap::new();
    for record in &records {
        if let Some(report) = &record.report {
            for check in &report.checks {
                let agg = per_check.entry(check.name.clone()).or_default();
                match check.verdict {
                    Verdict::Pass => agg.pass += 1,
                    Verdict::Fail => agg.fail += 1,
                    Verdict::Skipped => agg.skipped += 1,
                }
                for (key, &value) in &check.residuals {
                    let entry = agg.worst.entry(key.clone()).or_insert(value);
                    // min_eig style entries are "worst = most negative".
                    if key.contains("min_eig") {
                        *entry = entry.min(value);
                    } else {
                        *entry = entry.max(value);
                    }
                }
            }
        }
    }

    let instances_all_passed = records
        .iter()
        .all(|r| r.generation_error.is_none() && r.all_passed());
    let contrast_instances: Vec<usize> = records
        .iter()
        .filter(|r| r.is_contrast_witness())
        .map(|r| r.index)
        .collect();
    let all_passed = instances_all_passed && !contrast_instances.is_empty();

    CorpusSummary {
        requested: config.count,
        generated: records.len(),
        seed: config.seed,
        n_max: config.n_max,
        per_check,
        contrast_instances,
        instances_all_passed,
        all_passed,
        instances: records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes_and_finds_contrast() {
        let config = CorpusConfig {
            count: 8,
            n_max: 4,
            seed: 5,
            options: PipelineOptions {
                order_trials: 5,
                ks_probes: 20,
                words_per_length: 3,
                k_max: 2,
                isometry_trials: 5,
                ..PipelineOptions::default()
            },
        };
        let summary = run_corpus(&config);
        assert!(summary.instances_all_passed, "some instance failed");
        assert!(
            !summary.contrast_instances.is_empty(),
            "no contrast witness found"
        );
        assert!(summary.all_passed);
        assert!(summary.generated >= 8);
        let kernel = summary.per_check.get("kernel_equals_ideal").unwrap();
        assert_eq!(kernel.fail, 0);
        assert!(kernel.worst.get("gap").copied().unwrap_or(1.0) < 1e-8);
    }
}
