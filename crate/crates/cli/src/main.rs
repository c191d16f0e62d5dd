//! Command-line driver for attribution, monotonicity checks, axiom audits,
//! model training, and data generation.
//!
//! Exit codes: 0 clean, 1 violations found, 2 usage/configuration error,
//! 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mono_attrib::additive::{
    build_model, certify_constraints, AdditiveMonotoneModel, Architecture,
};
use mono_attrib::attribution::{
    attribute, AttributionMethod, AttributionResult, IGConfig, QuadratureRule,
};
use mono_attrib::axioms::{audit_matrix, grid_audit, AuditReport, AxiomCheckConfig};
use mono_attrib::data::{
    gen_synthetic, ingest_csv, split, write_csv, BadRowPolicy, Dataset, IngestConfig,
};
use mono_attrib::monotonicity::{
    check_effective_weak_pairwise, check_individual, check_strong_pairwise, MonotonicityReport,
    ProbeConfig,
};
use mono_attrib::report::{
    canonical_json, emit_report, AttributionTable, ReportDocument, ReportFormat,
};
use mono_attrib::train::{auc, train, TrainConfig};
use mono_attrib::zoo;
use mono_attrib::{Error, ModelHandle, MonotoneSpec, Point};

#[derive(Parser)]
#[command(
    name = "mono-attrib",
    about = "Feature attribution engines with a monotonicity axiom auditor",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one attribution vector.
    Attribute(AttributeArgs),
    /// Probe a model's own monotonicity properties.
    CheckMono(CheckMonoArgs),
    /// Audit all four axioms for both attribution methods.
    Audit(AuditArgs),
    /// Train an additive monotone model.
    Train(TrainArgs),
    /// Evaluate a trained model's ranking quality (AUC).
    Evaluate(EvaluateArgs),
    /// Generate a synthetic credit-style dataset.
    GenData(GenDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ig,
    Bshap,
}

impl From<MethodArg> for AttributionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ig => AttributionMethod::IntegratedGradients,
            MethodArg::Bshap => AttributionMethod::BaselineShapley,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Midpoint,
    Trapezoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct AttributeArgs {
    /// Model: a zoo id (`zoo:log_diminishing` or bare), or a trained model
    /// JSON file.
    #[arg(long)]
    model: String,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Comma-separated coordinates.
    #[arg(long)]
    explicand: String,
    /// Comma-separated coordinates, or `zero`.
    #[arg(long, default_value = "zero")]
    baseline: String,
    /// Quadrature intervals for integrated gradients.
    #[arg(long, default_value_t = 300)]
    steps: usize,
    #[arg(long, value_enum, default_value = "midpoint")]
    rule: RuleArg,
    /// Print canonical JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckMonoArgs {
    #[arg(long)]
    model: String,
    /// Monotonicity declaration JSON; defaults to the model's own.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also probe a full lattice with this many levels per feature.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "zero")]
    baseline: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    #[arg(long, default_value_t = 300)]
    steps: usize,
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    /// Also explain this instance under both methods (comma-separated).
    #[arg(long)]
    explicand: Option<String>,
    /// Features to sweep in a lattice audit (comma-separated indices).
    #[arg(long)]
    grid_dims: Option<String>,
    /// Lattice levels (comma-separated values), required with --grid-dims.
    #[arg(long)]
    grid_levels: Option<String>,
    /// Report destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct TrainArgs {
    /// `synthetic:N` or a CSV path.
    #[arg(long)]
    data: String,
    /// Architecture JSON; defaults to one priority group over the three
    /// past-due counts.
    #[arg(long)]
    arch: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    epochs: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f64,
    /// Fraction of rows used for training (the rest is the test split).
    #[arg(long, default_value_t = 0.75)]
    train_ratio: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model JSON file.
    #[arg(long)]
    model: PathBuf,
    /// `synthetic:N` or a CSV path.
    #[arg(long)]
    data: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Attribute(args) => cmd_attribute(args),
        Command::CheckMono(args) => cmd_check_mono(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::GenData(args) => cmd_gen_data(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parameter(_)
        | Error::Config(_)
        | Error::UnknownExample { .. }
        | Error::UnknownModel(_)
        | Error::DimensionMismatch { .. }
        | Error::SpaceMismatch(_)
        | Error::Capacity { .. } => 2,
        _ => 3,
    }
}

/// A resolved model plus its default monotonicity declaration.
struct ResolvedModel {
    handle: ModelHandle,
    spec: MonotoneSpec,
}

fn resolve_model(arg: &str) -> Result<ResolvedModel, Error> {
    if let Some(id) = arg.strip_prefix("zoo:") {
        let ex = zoo::get_example(id)?;
        return Ok(ResolvedModel {
            handle: ex.model().clone(),
            spec: ex.spec().clone(),
        });
    }
    if arg.ends_with(".json") || Path::new(arg).exists() {
        let model = AdditiveMonotoneModel::load_json(Path::new(arg))?;
        return Ok(ResolvedModel {
            spec: model.monotone_spec(),
            handle: model.handle(),
        });
    }
    // Bare zoo id.
    let ex = zoo::get_example(arg)?;
    Ok(ResolvedModel {
        handle: ex.model().clone(),
        spec: ex.spec().clone(),
    })
}

fn load_spec(path: &Path) -> Result<MonotoneSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("`{part}` is not a number")))
        })
        .collect()
}

fn parse_indices(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("`{part}` is not an index")))
        })
        .collect()
}

fn parse_point(model: &ModelHandle, text: &str) -> Result<Point, Error> {
    if text == "zero" {
        return model.space().origin();
    }
    Point::new(model.space(), parse_vector(text)?)
}

fn load_dataset(arg: &str, seed: u64) -> Result<Dataset, Error> {
    if let Some(n) = arg.strip_prefix("synthetic:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Parameter(format!("`{n}` is not a row count")))?;
        return gen_synthetic(n, seed);
    }
    let ingest = ingest_csv(
        Path::new(arg),
        &IngestConfig {
            on_bad_row: BadRowPolicy::Skip,
            ..IngestConfig::default()
        },
    )?;
    let s = &ingest.summary;
    eprintln!(
        "ingested {} rows ({} dropped missing, {} skipped malformed, {} past-dues capped{})",
        s.rows_kept,
        s.dropped_missing,
        s.skipped_bad,
        s.truncated_past_dues,
        if s.age_column_dropped {
            ", age column dropped"
        } else {
            ""
        }
    );
    Ok(ingest.dataset)
}

fn cmd_attribute(args: AttributeArgs) -> Result<ExitCode, Error> {
    let resolved = resolve_model(&args.model)?;
    let model = &resolved.handle;
    let explicand = parse_point(model, &args.explicand)?;
    let baseline = parse_point(model, &args.baseline)?;
    let ig = IGConfig {
        steps: args.steps,
        rule: match args.rule {
            RuleArg::Midpoint => QuadratureRule::Midpoint,
            RuleArg::Trapezoid => QuadratureRule::Trapezoid,
        },
    };
    let result = attribute(args.method.into(), model, &explicand, &baseline, &ig)?;
    let table = AttributionTable::from_result("instance", model.space(), &result);
    if args.json {
        print!("{}", canonical_json(&table)?);
    } else {
        print_attribution(model, &result);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_attribution(model: &ModelHandle, result: &AttributionResult) {
    println!(
        "{} attribution of {} against baseline {:?}",
        result.method(),
        model.id(),
        result.baseline().coords()
    );
    println!("{:<24} {:>16} {:>16}", "feature", "value", "normalized");
    let normalized = result.normalized();
    for (i, name) in model.space().names().iter().enumerate() {
        let norm = normalized[i]
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".to_string());
        println!("{name:<24} {:>16.6} {norm:>16}", result.values()[i]);
    }
    let sum: f64 = result.values().iter().sum();
    println!(
        "sum = {sum:.6}, completeness gap = {:.3e}",
        result.completeness_gap()
    );
}

fn cmd_check_mono(args: CheckMonoArgs) -> Result<ExitCode, Error> {
    let resolved = resolve_model(&args.model)?;
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => resolved.spec,
    };
    let config = ProbeConfig {
        samples: args.samples,
        seed: args.seed,
        grid_resolution: args.grid,
        ..ProbeConfig::default()
    };

    let mut reports: Vec<MonotonicityReport> = Vec::new();
    if !spec.individual().is_empty() {
        reports.push(check_individual(&resolved.handle, &spec, &config)?);
    }
    if !spec.effective_weak_pairs().is_empty() {
        reports.push(check_effective_weak_pairwise(
            &resolved.handle,
            &spec,
            &config,
        )?);
    }
    if !spec.strong_pairs().is_empty() {
        reports.push(check_strong_pairwise(&resolved.handle, &spec, &config)?);
    }
    if reports.is_empty() {
        return Err(Error::Parameter(
            "the monotonicity declaration is empty; nothing to check".into(),
        ));
    }

    if args.json {
        print!("{}", canonical_json(&reports)?);
    } else {
        println!(
            "{:<16} {:>10} {:>12} verdict",
            "property", "checked", "violations"
        );
        for r in &reports {
            println!(
                "{:<16} {:>10} {:>12} {}",
                r.property.to_string(),
                r.checked,
                r.violations,
                r.verdict
            );
            for w in r.witnesses.iter().take(3) {
                println!(
                    "  witness: {:?} -> {:?} lowers f by {:.3e}",
                    w.x.coords(),
                    w.x_star.coords(),
                    w.margin
                );
            }
        }
    }

    if reports.iter().any(|r| r.is_violated()) {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_audit(args: AuditArgs) -> Result<ExitCode, Error> {
    let resolved = resolve_model(&args.model)?;
    let model = &resolved.handle;
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => resolved.spec,
    };
    let baseline = parse_point(model, &args.baseline)?;
    let config = AxiomCheckConfig {
        samples: args.samples,
        seed: args.seed,
        tolerance: args.tolerance,
        ig: IGConfig::with_steps(args.steps),
        ..AxiomCheckConfig::default()
    };

    let audit = audit_matrix(model, &baseline, &spec, &config)?;
    print_audit(&audit);

    let mut document = ReportDocument::new(model.id(), baseline.coords().to_vec());
    if let Some(text) = &args.explicand {
        let explicand = parse_point(model, text)?;
        for method in [
            AttributionMethod::IntegratedGradients,
            AttributionMethod::BaselineShapley,
        ] {
            let result = attribute(method, model, &explicand, &baseline, &config.ig)?;
            document.push_attribution(AttributionTable::from_result(
                "instance",
                model.space(),
                &result,
            ));
        }
    }

    let violated = audit.any_axiom_violation();
    document.attach_audit(audit);

    match (&args.grid_dims, &args.grid_levels) {
        (Some(dims), Some(levels)) => {
            let grid = grid_audit(
                model,
                &baseline,
                &spec,
                &parse_indices(dims)?,
                &parse_vector(levels)?,
                &config,
            )?;
            println!(
                "grid audit: {} points, IG violations {}, BShap violations {}",
                grid.points.len(),
                grid.ig_violation_count,
                grid.bshap_violation_count
            );
            document.attach_grid(grid);
        }
        (None, None) => {}
        _ => {
            return Err(Error::Parameter(
                "--grid-dims and --grid-levels go together".into(),
            ))
        }
    }

    if let Some(out) = &args.out {
        let format = match args.format {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        };
        emit_report(&document, format, out)?;
        println!("report written to {}", out.display());
    }

    if violated {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn print_audit(audit: &AuditReport) {
    println!(
        "model: {}  baseline: {:?}",
        audit.model_id,
        audit.baseline.coords()
    );
    if !audit.monotonicity.is_empty() {
        println!("model monotonicity:");
        for r in &audit.monotonicity {
            println!(
                "  {:<16} checked {:>8}  {}",
                r.property.to_string(),
                r.checked,
                r.verdict
            );
        }
    }
    println!(
        "{:<7} {:<6} {:<20} {:>8} {:>8} {:>11} {:>12}",
        "method", "axiom", "verdict", "checked", "skipped", "violations", "max|gap|"
    );
    for v in &audit.verdicts {
        println!(
            "{:<7} {:<6} {:<20} {:>8} {:>8} {:>11} {:>12.3e}",
            v.method.to_string(),
            v.axiom.to_string(),
            v.verdict.to_string(),
            v.checked,
            v.skipped,
            v.violations,
            v.max_completeness_gap
        );
    }
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode, Error> {
    let data = load_dataset(&args.data, args.seed)?;
    let arch = match &args.arch {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_json::from_str::<Architecture>(&text)?
        }
        None => {
            if data.dim() != 9 {
                return Err(Error::Parameter(format!(
                    "no --arch given and the default credit architecture needs 9 features, \
                     data has {}",
                    data.dim()
                )));
            }
            Architecture::grouped(vec![0, 1, 2])
        }
    };
    let (train_set, test_set) = split(&data, args.train_ratio, args.seed)?;
    let model = build_model("trained", data.schema(), &arch, args.seed)?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        seed: args.seed,
        refit_knots: true,
    };
    let outcome = train(&model, &train_set, &config)?;

    let scores: Vec<f64> = (0..test_set.len())
        .map(|i| outcome.model.value(test_set.row(i)))
        .collect();
    let test_auc = auc(&scores, test_set.labels())?;
    let report = certify_constraints(&outcome.model);
    println!(
        "trained on {} rows, tested on {}: loss {:.5} -> {:.5}, test AUC {:.4}, constraints {}",
        train_set.len(),
        test_set.len(),
        outcome.loss_history.first().unwrap(),
        outcome.loss_history.last().unwrap(),
        test_auc,
        if report.certified {
            "certified"
        } else {
            "NOT CERTIFIED"
        }
    );
    outcome.model.save_json(&args.out)?;
    println!("model written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode, Error> {
    let model = AdditiveMonotoneModel::load_json(&args.model)?;
    let data = load_dataset(&args.data, args.seed)?;
    if data.dim() != model.space().dim() {
        return Err(Error::DimensionMismatch {
            expected: model.space().dim(),
            actual: data.dim(),
        });
    }
    let scores: Vec<f64> = (0..data.len()).map(|i| model.value(data.row(i))).collect();
    let value = auc(&scores, data.labels())?;
    println!("AUC = {value:.6}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_data(args: GenDataArgs) -> Result<ExitCode, Error> {
    let data = gen_synthetic(args.n, args.seed)?;
    write_csv(&data, &args.out)?;
    println!(
        "wrote {} rows to {} (prevalence {:.4})",
        data.len(),
        args.out.display(),
        data.prevalence()
    );
    Ok(ExitCode::SUCCESS)
}
