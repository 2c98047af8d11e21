use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use netpov::aggregation::{fgt_naive, fgt_network_adjusted};
use netpov::axioms::{run_axiom_suite, AxiomStatus, GeneratorSettings, StructureSpec};
use netpov::bounds::{attainable_scores, bracketing_scores, summarize, MAX_ENUMERATION_D};
use netpov::io::{
    read_config_document, read_dataset, render_person_table, render_report, round_sig, run_report,
    to_json, write_output, ConfigDocument, KSpec, ReportOptions,
};
use netpov::weights::implied_weights;
use netpov::{Error, MethodologyConfig};

#[derive(Parser)]
#[command(
    name = "netpov",
    version,
    about = "Network-adjusted multidimensional poverty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the poverty report for a dataset.
    Compute(ComputeArgs),
    /// Print count bounds, per-dimension jumps and attainable scores.
    Bounds(ConfigArgs),
    /// Print the weights implied by a symmetric dependence matrix.
    ImpliedWeights(ConfigArgs),
    /// Run the axiom verification suite.
    Axioms(AxiomArgs),
    /// Sweep one matrix entry and compare the adjusted and naive indices.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override the gap exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Absolute identification cutoff.
    #[arg(long, conflicts_with = "k_fraction")]
    k: Option<f64>,
    /// Identification cutoff as a share of the score ceiling.
    #[arg(long)]
    k_fraction: Option<f64>,
}

impl Overrides {
    fn k_spec(&self) -> Option<KSpec> {
        self.k
            .map(KSpec::Absolute)
            .or(self.k_fraction.map(KSpec::Fraction))
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a flat per-person CSV table.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Include the naive index, which adding connections can inflate.
    #[arg(long)]
    diagnostic_naive: bool,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
}

#[derive(Args)]
struct AxiomArgs {
    /// Fixed configuration; random structures are drawn when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gap exponents to test; defaults to 0, 1 and 2.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, default_value_t = 6)]
    d_max: usize,
    /// Draw symmetric matrices only.
    #[arg(long)]
    symmetric: bool,
    /// Keep weights uniform.
    #[arg(long)]
    uniform_weights: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Affected dimension (1-based row of the matrix).
    #[arg(long, default_value_t = 1)]
    row: usize,
    /// Affecting dimension (1-based column of the matrix).
    #[arg(long, default_value_t = 2)]
    col: usize,
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

enum Failure {
    Error(Error),
    AxiomViolation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<MethodologyConfig, Error> {
    read_config_document(path)?.resolve(overrides.alpha, overrides.k_spec())
}

fn warn_between_scores(config: &MethodologyConfig) {
    if config.d() > MAX_ENUMERATION_D {
        return;
    }
    if let Ok(scores) = attainable_scores(config.structure(), config.weights()) {
        if let Some((lo, hi)) = bracketing_scores(&scores, config.k()) {
            eprintln!(
                "warning: k = {} lies strictly between attainable counts {} and {}; \
                 every k in that interval identifies the same persons",
                round_sig(config.k()),
                round_sig(lo),
                round_sig(hi)
            );
        }
    }
}

fn compute(args: &ComputeArgs) -> Result<(), Failure> {
    let config = load(&args.config, &args.overrides)?;
    let dataset = read_dataset(&args.dataset)?;
    warn_between_scores(&config);
    let report = run_report(
        &dataset,
        &config,
        ReportOptions {
            diagnostic_naive: args.diagnostic_naive,
        },
    )?;
    write_output(args.out.as_deref(), &render_report(&report)?)?;
    if let Some(table) = &args.table {
        write_output(Some(table), &render_person_table(&report)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsOutput {
    d: usize,
    d_bar: f64,
    d_under: f64,
    d_tilde: f64,
    score_ceiling: f64,
    weighted_floor: f64,
    deltas: Vec<f64>,
    sigma: f64,
    sigma_cols: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attainable_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_bracket: Option<(f64, f64)>,
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| round_sig(x)).collect()
}

fn bounds(args: &ConfigArgs) -> Result<(), Failure> {
    let doc = read_config_document(&args.config)?;
    let m = doc.structure()?;
    let w = doc.weight_vector(m.d())?;
    let s = summarize(&m, &w);
    let scores = if m.d() <= MAX_ENUMERATION_D {
        Some(attainable_scores(&m, &w)?)
    } else {
        None
    };
    let k = args.k.or(match doc.k_spec() {
        Some(KSpec::Absolute(k)) => Some(k),
        Some(KSpec::Fraction(f)) => Some(f * s.score_ceiling),
        None => None,
    });
    let k_bracket = match (&scores, k) {
        (Some(sc), Some(k)) => bracketing_scores(sc, k).map(|(a, b)| (round_sig(a), round_sig(b))),
        _ => None,
    };
    let out = BoundsOutput {
        d: s.d,
        d_bar: round_sig(s.d_bar),
        d_under: round_sig(s.d_under),
        d_tilde: round_sig(s.d_tilde),
        score_ceiling: round_sig(s.score_ceiling),
        weighted_floor: round_sig(s.weighted_floor),
        deltas: rounded(&s.deltas),
        sigma: round_sig(s.sigma),
        sigma_cols: rounded(&s.sigma_cols),
        attainable_scores: scores.as_deref().map(rounded),
        k: k.map(round_sig),
        k_bracket,
    };
    write_output(args.out.as_deref(), &to_json(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ImpliedOutput {
    weights: Vec<f64>,
    deltas: Vec<f64>,
    sigma_cols: Vec<f64>,
    d_bar: f64,
}

fn implied(args: &ConfigArgs) -> Result<(), Failure> {
    let m = read_config_document(&args.config)?.structure()?;
    let iw = implied_weights(&m)?;
    let out = ImpliedOutput {
        weights: rounded(iw.weights.as_slice()),
        deltas: rounded(&iw.deltas),
        sigma_cols: rounded(&iw.sigma_cols),
        d_bar: round_sig(iw.d_bar),
    };
    write_output(args.out.as_deref(), &to_json(&out)?)?;
    Ok(())
}

fn axioms(args: &AxiomArgs) -> Result<(), Failure> {
    let spec = match &args.config {
        Some(path) => {
            let doc: ConfigDocument = read_config_document(path)?;
            StructureSpec::Fixed(doc.resolve(Some(doc.alpha.unwrap_or(0.0)), None)?)
        }
        None => StructureSpec::Random {
            symmetric: args.symmetric,
            weighted: !args.uniform_weights,
        },
    };
    let settings = GeneratorSettings {
        trials: args.trials,
        n_range: (args.n_min, args.n_max),
        d_range: (args.d_min, args.d_max),
        seed: args.seed,
    };
    let alphas = if args.alpha.is_empty() {
        vec![0.0, 1.0, 2.0]
    } else {
        args.alpha.clone()
    };
    let mut reports = Vec::new();
    for alpha in alphas {
        reports.extend(run_axiom_suite(&spec, alpha, &settings)?);
    }
    for r in &mut reports {
        r.worst_violation = round_sig(r.worst_violation);
    }
    write_output(args.out.as_deref(), &to_json(&reports)?)?;
    if reports.iter().any(|r| r.status == AxiomStatus::Fail) {
        return Err(Failure::AxiomViolation);
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    entry: f64,
    adjusted: f64,
    naive: f64,
    naive_numerator: f64,
    score_ceiling: f64,
    poor_count: usize,
}

fn compare(args: &CompareArgs) -> Result<(), Failure> {
    if args.steps == 0 {
        return Err(Error::Config("steps must be positive".into()).into());
    }
    let base = load(&args.config, &args.overrides)?;
    let y = read_dataset(&args.dataset)?.matrix;
    let mut rows = Vec::with_capacity(args.steps + 1);
    for s in 0..=args.steps {
        let entry = s as f64 / args.steps as f64;
        let m = base.structure().with_entry(args.row, args.col, entry)?;
        let config = MethodologyConfig::new(
            base.alpha(),
            base.k(),
            m.clone(),
            base.weights().clone(),
            base.cutoffs().clone(),
        )?;
        let adjusted = fgt_network_adjusted(&y, &config)?;
        let naive = fgt_naive(&y, config.cutoffs(), &m, config.alpha(), config.k())?;
        rows.push(CompareRow {
            entry: round_sig(entry),
            adjusted: round_sig(adjusted.value),
            naive: round_sig(naive.value),
            naive_numerator: round_sig(naive.numerator),
            score_ceiling: round_sig(adjusted.denominator / y.n() as f64),
            poor_count: adjusted.poor,
        });
    }
    write_output(args.out.as_deref(), &to_json(&rows)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Bounds(a) => bounds(a),
        Command::ImpliedWeights(a) => implied(a),
        Command::Axioms(a) => axioms(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::AxiomViolation) => {
            eprintln!("error: axiom violations found");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 1 })
        }
    }
}
