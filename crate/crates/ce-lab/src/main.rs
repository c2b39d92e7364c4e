//! ce-lab: certify completely positive projections and the algebra
//! structure their ranges carry.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ce_core::builders::InstanceKind;
use ce_core::linalg::Tolerances;
use clap::{Args, Parser, Subcommand};

use ce_lab::corpus::{run_corpus, CorpusConfig};
use ce_lab::pipeline::{run_pipeline, run_proof_steps, PipelineOptions};
use ce_lab::problem::{matrix_to_json, ProblemFile};
use ce_lab::report::{CertificateReport, Verdict};

#[derive(Parser)]
#[command(
    name = "ce-lab",
    about = "Numerical certificates for completely positive projections and their range algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct CommonOpts {
    /// Override every residual-style tolerance with one value.
    #[arg(long)]
    tol: Option<f64>,

    /// Highest matrix level probed by the order-isomorphism check.
    #[arg(long, default_value_t = 4)]
    k_max: usize,

    /// Base seed for all randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Suppress per-check output.
    #[arg(long, short, default_value_t = false)]
    quiet: bool,
}

impl CommonOpts {
    fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            tol: self
                .tol
                .map(Tolerances::uniform)
                .unwrap_or_default(),
            seed: self.seed,
            k_max: self.k_max,
            ..PipelineOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full certification pipeline on a problem file.
    Certify {
        /// Problem file (JSON).
        file: PathBuf,

        /// Write the certificate report as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,

        #[command(flatten)]
        common: CommonOpts,
    },

    /// Emit a problem file from one of the instance builders.
    Build {
        /// Builder kind: pinch, group, conjugated or cesaro.
        #[arg(long)]
        kind: String,

        /// Ambient dimension (2..=8).
        #[arg(long)]
        n: usize,

        /// Builder seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Output path.
        #[arg(short, long)]
        out: PathBuf,
    },

    /// Generate and certify a corpus of instances; print a summary.
    Corpus {
        /// Number of planned instances.
        #[arg(long, default_value_t = 100)]
        count: usize,

        /// Largest ambient dimension in the mix (>= 3).
        #[arg(long, default_value_t = 6)]
        n_max: usize,

        /// Write the full summary (including per-instance reports) as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,

        #[command(flatten)]
        common: CommonOpts,
    },

    /// Run only the proof-step checks (kernel = ideal, bilaterality,
    /// word defects) on a problem file.
    ProofSteps {
        /// Problem file (JSON).
        file: PathBuf,

        /// Write the certificate report as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,

        #[command(flatten)]
        common: CommonOpts,
    },
}

fn read_problem(path: &Path) -> Result<ProblemFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ProblemFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("serialization failed: {e}"))?;
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn print_report(report: &CertificateReport, quiet: bool) {
    if quiet {
        return;
    }
    println!("n = {}, seed = {}", report.n, report.seed);
    if let Some(d) = report.dims.range {
        let algebra = report
            .dims
            .algebra
            .map_or_else(|| "-".into(), |v| v.to_string());
        let ideal = report
            .dims
            .ideal
            .map_or_else(|| "-".into(), |v| v.to_string());
        println!("dims: range {d}, algebra {algebra}, ideal {ideal}, blocks {:?}", report.dims.block_dims);
    }
    for check in &report.checks {
        let label = match check.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "skipped",
        };
        let mut detail = String::new();
        for (key, value) in check.residuals.iter().take(3) {
            detail.push_str(&format!(" {key}={value:.3e}"));
        }
        if let Some(err) = &check.error {
            detail.push_str(&format!(" error: {err}"));
        }
        if let Some(reason) = &check.skip_reason {
            detail.push_str(&format!(" ({reason})"));
        }
        println!("  {:<20} {label}{detail}", check.name);
    }
    println!(
        "verdict: {}",
        if report.all_passed { "PASS" } else { "FAIL" }
    );
}

fn configure_thread_pool() {
    if let Ok(threads) = std::env::var("CE_LAB_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

fn certify_command(
    file: &Path,
    json_out: Option<&Path>,
    common: &CommonOpts,
    proof_steps_only: bool,
) -> Result<bool, String> {
    let problem = read_problem(file)?;
    let opts = common.pipeline_options();
    let report = if proof_steps_only {
        run_proof_steps(&problem, &opts)
    } else {
        run_pipeline(&problem, &opts)
    }
    .map_err(|e| format!("{}: {e}", file.display()))?;
    print_report(&report, common.quiet);
    if let Some(path) = json_out {
        write_json(path, &report)?;
    }
    Ok(report.all_passed)
}

fn build_command(kind: &str, n: usize, seed: u64, out: &Path) -> Result<(), String> {
    let parsed = InstanceKind::parse(kind)
        .ok_or_else(|| format!("unknown builder kind `{kind}`"))?;
    let map = ce_core::builders::random_instance(n, parsed, seed)
        .map_err(|e| format!("builder failed: {e}"))?;
    let kraus = map
        .kraus()
        .map(|ops| ops.iter().map(matrix_to_json).collect::<Vec<_>>());
    // Emit the realized matrices so the file is self-contained and stays
    // valid even if builder internals change.
    let problem = ProblemFile {
        n,
        kraus,
        choi: if map.kraus().is_some() {
            None
        } else {
            Some(matrix_to_json(map.choi()))
        },
        builder: None,
        tolerances: None,
        checks: None,
    };
    write_json(out, &problem)
}

fn corpus_command(
    count: usize,
    n_max: usize,
    json_out: Option<&Path>,
    common: &CommonOpts,
) -> Result<bool, String> {
    if !(3..=8).contains(&n_max) {
        return Err("corpus requires 3 <= n-max <= 8".into());
    }
    if count == 0 {
        return Err("corpus requires a positive count".into());
    }
    let config = CorpusConfig {
        count,
        n_max,
        seed: common.seed,
        options: common.pipeline_options(),
    };
    let summary = run_corpus(&config);
    if !common.quiet {
        println!(
            "corpus: {} instances generated ({} planned), seed {}",
            summary.generated, summary.requested, summary.seed
        );
        for (name, agg) in &summary.per_check {
            let worst = agg
                .worst
                .iter()
                .take(2)
                .map(|(k, v)| format!("{k}={v:.3e}"))
                .collect::<Vec<_>>()
                .join(" ");
            println!(
                "  {:<20} pass {:>3}  fail {:>3}  skipped {:>3}  {worst}",
                name, agg.pass, agg.fail, agg.skipped
            );
        }
        println!(
            "contrast instances (range not product-closed, all checks pass): {:?}",
            summary.contrast_instances
        );
        println!(
            "verdict: {}",
            if summary.all_passed { "PASS" } else { "FAIL" }
        );
    }
    if let Some(path) = json_out {
        write_json(path, &summary)?;
    }
    Ok(summary.all_passed)
}

fn main() -> ExitCode {
    configure_thread_pool();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Certify {
            file,
            json_out,
            common,
        } => certify_command(file, json_out.as_deref(), common, false),
        Command::ProofSteps {
            file,
            json_out,
            common,
        } => certify_command(file, json_out.as_deref(), common, true),
        Command::Build { kind, n, seed, out } => {
            build_command(kind, *n, *seed, out).map(|()| true)
        }
        Command::Corpus {
            count,
            n_max,
            json_out,
            common,
        } => corpus_command(*count, *n_max, json_out.as_deref(), common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
