//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line (visible with `--nocapture`, and always on
//! failure).
//!
//! The corpus fixture (100 instances, kinds mixed, n in 2..=6) is built
//! once and shared; criterion 1 performs its own independently timed
//! pass over a fresh corpus because it carries the runtime bound.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::Instant;

use ce_core::builders::random_instance;
use ce_core::construct::{
    build_ce_algebra, ideal_j, order_iso_check, quotient_iso, quotient_norm_check,
    verify_bilateral, verify_kernel_equals_ideal, wedderburn, word_defect, AlgebraContext,
    IdealCertificate, QuotientIso,
};
use ce_core::linalg::{hs_norm, matrix_unit, CMatrix, Tolerances};
use ce_core::sampling::{derive_seed, gaussian_matrix, rng_from_seed};
use ce_core::{CpMap, OperatorSubspace};
use rand::Rng;

use ce_lab::corpus::{run_corpus, CorpusConfig, CONTRAST_THRESHOLD};
use ce_lab::pipeline::{corpus_plan, InstancePlan, PipelineOptions};
use ce_lab::report::Verdict;

const CORPUS_COUNT: usize = 100;
const CORPUS_N_MAX: usize = 6;
const CORPUS_SEED: u64 = 0xCE;
const GAP_TOLERANCE: f64 = 1e-8;

fn conclude(number: usize, name: &str, pass: bool, details: &str) {
    println!(
        "criterion {number} ({name}): {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed: {details}");
}

struct Prepared {
    plan: InstancePlan,
    map: CpMap,
    ctx: AlgebraContext,
    ideal: IdealCertificate,
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn prepare(plan: &InstancePlan) -> Prepared {
    let map = random_instance(plan.n, plan.kind, plan.seed)
        .unwrap_or_else(|e| panic!("instance {:?} failed to generate: {e}", plan));
    let ctx = AlgebraContext::build(map.clone(), &tol())
        .unwrap_or_else(|e| panic!("context for {:?} failed: {e}", plan));
    let ideal = ideal_j(&ctx, &tol(), 64)
        .unwrap_or_else(|e| panic!("ideal for {:?} failed: {e}", plan));
    Prepared {
        plan: *plan,
        map,
        ctx,
        ideal,
    }
}

fn corpus() -> &'static Vec<Prepared> {
    static CORPUS: OnceLock<Vec<Prepared>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        corpus_plan(CORPUS_COUNT, CORPUS_N_MAX, CORPUS_SEED)
            .iter()
            .map(prepare)
            .collect()
    })
}

fn isos() -> &'static Vec<QuotientIso> {
    static ISOS: OnceLock<Vec<QuotientIso>> = OnceLock::new();
    ISOS.get_or_init(|| {
        corpus()
            .iter()
            .map(|inst| {
                let w = wedderburn(inst.ctx.algebra(), &tol(), derive_seed(inst.plan.seed, 0xB))
                    .unwrap_or_else(|e| panic!("wedderburn for {:?}: {e}", inst.plan));
                quotient_iso(&inst.ctx, &inst.ideal, &w, &tol())
                    .unwrap_or_else(|e| panic!("quotient for {:?}: {e}", inst.plan))
            })
            .collect()
    })
}

/// Criterion 1: the kernel-ideal identity over a fresh, timed corpus.
#[test]
fn criterion_01_kernel_ideal_identity() {
    let start = Instant::now();
    let plans = corpus_plan(CORPUS_COUNT, CORPUS_N_MAX, derive_seed(CORPUS_SEED, 1));

    let kinds: BTreeSet<&str> = plans.iter().map(|p| p.kind.name()).collect();
    let ns: BTreeSet<usize> = plans.iter().map(|p| p.n).collect();
    assert_eq!(kinds.len(), 4, "kind mix incomplete: {kinds:?}");
    assert_eq!(ns, (2..=6).collect::<BTreeSet<_>>(), "n mix incomplete");

    let mut max_gap: f64 = 0.0;
    let mut passed = 0usize;
    for plan in &plans {
        let inst = prepare(plan);
        let check = verify_kernel_equals_ideal(&inst.ctx, &inst.ideal, &tol());
        max_gap = max_gap.max(check.gap);
        if check.equal && check.gap < GAP_TOLERANCE {
            passed += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = passed == plans.len() && elapsed < 60.0;
    conclude(
        1,
        "kernel-ideal identity",
        pass,
        &format!(
            "{passed}/{} instances with gap < 1e-8, max gap {max_gap:.3e}, {elapsed:.1} s",
            plans.len()
        ),
    );
}

/// Criterion 2: every ideal generator is annihilated by the map,
/// verified by direct evaluation rather than through the subspace
/// machinery.
#[test]
fn criterion_02_generators_in_kernel() {
    let mut worst: f64 = 0.0;
    for inst in corpus() {
        let basis = inst.ctx.range().basis();
        for x in basis {
            for y in basis {
                let product = x * y;
                let defect = &product - inst.map.apply(&product).unwrap();
                worst = worst.max(hs_norm(&inst.map.apply(&defect).unwrap()));
            }
        }
    }
    conclude(
        2,
        "one-sided containment",
        worst < GAP_TOLERANCE,
        &format!("max |phi(generator)| = {worst:.3e} over {} instances", corpus().len()),
    );
}

/// Criterion 3: the Kadison-Schwarz estimate over 1000 probes on each of
/// the first 10 corpus instances.
#[test]
fn criterion_03_kadison_schwarz() {
    let mut min_eig = f64::INFINITY;
    for inst in corpus().iter().take(10) {
        let n = inst.plan.n;
        let mut rng = rng_from_seed(derive_seed(inst.plan.seed, 0x3));
        for _ in 0..1000 {
            let g = gaussian_matrix(&mut rng, n, n);
            let z = g.adjoint() * &g;
            let y = gaussian_matrix(&mut rng, n, n);
            let ks = inst.map.kadison_schwarz_check(&z, &y, &tol()).unwrap();
            min_eig = min_eig.min(ks.min_eig);
        }
    }
    conclude(
        3,
        "Kadison-Schwarz estimate",
        min_eig >= -GAP_TOLERANCE,
        &format!("min eigenvalue {min_eig:.3e} over 10 x 1000 probes"),
    );
}

/// Criterion 4: word defects of lengths 3..5 lie in the ideal.
#[test]
fn criterion_04_word_defects() {
    let mut worst: f64 = 0.0;
    let mut all_member = true;
    for inst in corpus() {
        let mut rng = rng_from_seed(derive_seed(inst.plan.seed, 0x4));
        for len in 3..=5usize {
            for _ in 0..20 {
                let word: Vec<CMatrix> = (0..len)
                    .map(|_| {
                        let mut out = CMatrix::zeros(inst.plan.n, inst.plan.n);
                        for b in inst.ctx.range().basis() {
                            let c: f64 = rng.random_range(-1.0..1.0);
                            out += b * num_complex::Complex64::new(c, 0.0);
                        }
                        out
                    })
                    .collect();
                let wd = word_defect(&inst.ctx, &inst.ideal, &word, &tol()).unwrap();
                worst = worst.max(wd.residual);
                all_member &= wd.member;
            }
        }
    }
    conclude(
        4,
        "word-defect induction",
        all_member && worst < GAP_TOLERANCE,
        &format!(
            "max residual {worst:.3e} over {} instances x 60 words",
            corpus().len()
        ),
    );
}

/// Criterion 5: bilaterality on the corpus plus rejection of the
/// adversarial right-only ideal span{e11, e12} in M_2.
#[test]
fn criterion_05_bilaterality() {
    let mut worst: f64 = 0.0;
    for inst in corpus() {
        let check = verify_bilateral(&inst.ctx, &inst.ideal, &tol());
        worst = worst.max(check.left_residual);
        assert!(check.bilateral, "instance {:?} not bilateral", inst.plan);
    }

    let identity_map = CpMap::from_kraus(vec![ce_core::linalg::identity(2)]).unwrap();
    let ctx = AlgebraContext::build(identity_map, &tol()).unwrap();
    let adversarial = IdealCertificate {
        ideal: OperatorSubspace::span(
            2,
            &[matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)],
            &tol(),
        )
        .unwrap(),
        generator_count: 2,
        right_closure_residual: 0.0,
        left_closure_residual: 0.0,
        kernel_gap: 0.0,
        generator_image_residual: 0.0,
    };
    let rejected = verify_bilateral(&ctx, &adversarial, &tol());
    let pass = worst < GAP_TOLERANCE && !rejected.bilateral && rejected.left_residual >= 0.5;
    conclude(
        5,
        "bilaterality",
        pass,
        &format!(
            "max left residual {worst:.3e}; adversarial ideal rejected with residual {:.3}",
            rejected.left_residual
        ),
    );
}

/// Criterion 6: associativity, unit and star-compatibility of the
/// induced product on every instance.
#[test]
fn criterion_06_ce_axioms() {
    let mut worst: f64 = 0.0;
    for inst in corpus() {
        let alg = build_ce_algebra(&inst.ctx, &tol())
            .unwrap_or_else(|e| panic!("algebra for {:?}: {e}", inst.plan));
        let r = alg.residuals();
        worst = worst
            .max(r.associativity)
            .max(r.unit_law)
            .max(r.star)
            .max(r.closure);
    }
    conclude(
        6,
        "induced-algebra axioms",
        worst < GAP_TOLERANCE,
        &format!("max axiom residual {worst:.3e} over {} instances", corpus().len()),
    );
}

/// Criterion 7: the quotient isomorphism intertwines multiplication and
/// the dimension bookkeeping is exact.
#[test]
fn criterion_07_quotient_isomorphism() {
    let mut worst: f64 = 0.0;
    let mut bookkeeping_exact = true;
    for (inst, iso) in corpus().iter().zip(isos()) {
        worst = worst
            .max(iso.intertwining_residual)
            .max(iso.forward_inverse_residual)
            .max(iso.inverse_forward_residual);
        let outside: usize = iso
            .wedderburn()
            .block_dims
            .iter()
            .zip(&iso.wedderburn().in_ideal)
            .filter(|&(_, &inside)| !inside)
            .map(|(&(ni, _), _)| ni * ni)
            .sum();
        bookkeeping_exact &= outside == inst.ctx.range().dim();
    }
    conclude(
        7,
        "quotient isomorphism",
        worst < GAP_TOLERANCE && bookkeeping_exact,
        &format!(
            "max intertwining/inverse residual {worst:.3e}, dim bookkeeping exact: {bookkeeping_exact}"
        ),
    );
}

/// Criterion 8: complete order isomorphism probes for k = 1..4 on the
/// first 20 instances, 50 trials per direction.
#[test]
fn criterion_08_complete_order_isomorphism() {
    let mut min_eig = f64::INFINITY;
    for (inst, iso) in corpus().iter().zip(isos()).take(20) {
        let report = order_iso_check(iso, 4, 50, derive_seed(inst.plan.seed, 0x8), &tol())
            .unwrap_or_else(|e| panic!("order check for {:?}: {e}", inst.plan));
        min_eig = min_eig.min(report.min_eig());
    }
    conclude(
        8,
        "complete order isomorphism",
        min_eig >= -GAP_TOLERANCE,
        &format!("min eigenvalue {min_eig:.3e} over 20 instances, k <= 4, 50 trials/direction"),
    );
}

/// Criterion 9: block-quotient norm equals ambient operator norm on
/// unital instances.
#[test]
fn criterion_09_unital_isometry() {
    let mut worst: f64 = 0.0;
    let mut unital_count = 0usize;
    for (inst, iso) in corpus().iter().zip(isos()) {
        let report = quotient_norm_check(iso, 20, derive_seed(inst.plan.seed, 0x9), &tol());
        if report.unital {
            unital_count += 1;
            worst = worst.max(report.max_rel_deviation);
        }
    }
    conclude(
        9,
        "unital isometry",
        unital_count > 0 && worst < 1e-6,
        &format!(
            "max relative deviation {worst:.3e} over {unital_count} unital instances x 20 elements"
        ),
    );
}

/// Criterion 10: the corpus contains a Cesaro instance whose range fails
/// ambient-product closure while its construction checks all pass.
#[test]
fn criterion_10_contrast_witness() {
    let config = CorpusConfig {
        count: CORPUS_COUNT,
        n_max: CORPUS_N_MAX,
        seed: CORPUS_SEED,
        options: PipelineOptions::default(),
    };
    let summary = run_corpus(&config);
    assert!(
        summary.instances_all_passed,
        "corpus contains failing instances"
    );
    let mut witness_detail = String::new();
    let mut found = false;
    for record in &summary.instances {
        if !record.is_contrast_witness() {
            continue;
        }
        let report = record.report.as_ref().unwrap();
        let construction_passes = ["ce_axioms", "quotient_iso", "order_iso"]
            .iter()
            .all(|name| report.check(name).unwrap().verdict == Verdict::Pass);
        if construction_passes {
            found = true;
            witness_detail = format!(
                "instance {} (cesaro, n = {}) closure residual {:.3e} > {CONTRAST_THRESHOLD:.0e}",
                record.index,
                record.n,
                record.closure_residual().unwrap()
            );
            break;
        }
    }
    conclude(
        10,
        "content demonstration",
        found && summary.generated <= 200,
        &format!(
            "{witness_detail}; {} witnesses among {} instances",
            summary.contrast_instances.len(),
            summary.generated
        ),
    );
}

/// Criterion 11: CLI contract — hypothesis failure exits 1 with
/// downstream checks skipped, success exits 0, and verdicts are
/// reproducible across runs.
#[test]
fn criterion_11_cli_contract() {
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_ce-lab");
    let dir = std::env::temp_dir().join(format!("ce-lab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    // Transpose symmetrization on M_2, given by its Choi matrix: not CP.
    let transpose = dir.join("transpose.json");
    std::fs::write(
        &transpose,
        r#"{"n": 2, "choi": [
            [[1,0],[0,0],[0,0],[0.5,0]],
            [[0,0],[0,0],[0.5,0],[0,0]],
            [[0,0],[0.5,0],[0,0],[0,0]],
            [[0.5,0],[0,0],[0,0],[1,0]]
        ]}"#,
    )
    .unwrap();
    let report_path = dir.join("transpose-report.json");
    let out = Command::new(bin)
        .args(["certify"])
        .arg(&transpose)
        .arg("--json-out")
        .arg(&report_path)
        .arg("--quiet")
        .output()
        .unwrap();
    let transpose_exit = out.status.code();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let cp_failed = checks
        .iter()
        .any(|c| c["name"] == "projection" && c["verdict"] == "fail");
    let downstream_skipped = checks
        .iter()
        .filter(|c| c["name"] != "projection")
        .all(|c| c["verdict"] == "skipped");

    // Pinching file: passes with exit 0.
    let pinch = dir.join("pinch.json");
    std::fs::write(
        &pinch,
        r#"{"n": 2, "builder": {"kind": "pinch", "params": [[1], [2]]}}"#,
    )
    .unwrap();
    let pinch_exit = Command::new(bin)
        .args(["certify"])
        .arg(&pinch)
        .arg("--quiet")
        .status()
        .unwrap()
        .code();

    // Reproducibility: identical inputs and seeds give identical verdicts
    // and residuals (timings excluded).
    let mut reports = Vec::new();
    for run in 0..2 {
        let path = dir.join(format!("repro-{run}.json"));
        let status = Command::new(bin)
            .args(["certify"])
            .arg(&pinch)
            .args(["--seed", "7", "--json-out"])
            .arg(&path)
            .arg("--quiet")
            .status()
            .unwrap();
        assert!(status.success());
        let mut value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        value.as_object_mut().unwrap().remove("timings");
        reports.push(value);
    }

    let pass = transpose_exit == Some(1)
        && cp_failed
        && downstream_skipped
        && pinch_exit == Some(0)
        && reports[0] == reports[1];
    conclude(
        11,
        "CLI contract",
        pass,
        &format!(
            "transpose exit {transpose_exit:?} (cp fail {cp_failed}, downstream skipped {downstream_skipped}), pinch exit {pinch_exit:?}, reproducible {}",
            reports[0] == reports[1]
        ),
    );
    let _ = std::fs::remove_dir_all(&dir);
}
