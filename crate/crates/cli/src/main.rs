use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catreg_core::eval::{crossval, Method, MethodReport, MreScale};
use catreg_core::ingest::{backfire, ingest_csv, GearingTable, IngestConfig, QuestionnaireSchema, RemovalReport};
use catreg_core::pipeline::{compare_baseline, run_pipeline, ModelConfig, PipelineResult, PredictInput, SerializedModel};
use catreg_core::scaling::{catreg_fit, CatregConfig, CatregFit};
use catreg_core::stepwise::StepwiseConfig;
use catreg_core::{Dataset, Error, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "catreg", version, about = "Optimal-scaling regression and stepwise selection for defect prediction")]
struct Cli {
    /// JSON tool configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (fold shuffling, ALS restarts)
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Count,
    Log,
}

impl From<ScaleArg> for MreScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Count => MreScale::Count,
            ScaleArg::Log => MreScale::Log,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    DummyOls,
    CatregStepwise,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Dataset JSON, or a response CSV to ingest first
    #[arg(long)]
    data: PathBuf,
    /// Gearing table JSON (CSV input only)
    #[arg(long)]
    gearing: Option<PathBuf>,
    /// Questionnaire schema JSON (CSV input only)
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of folds
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    mre_scale: Option<ScaleArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a response CSV into a dataset file
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Drop rows beyond this many standard deviations on any ln metric
        #[arg(long)]
        outlier_zmax: Option<f64>,
        /// Also write the removal report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// One categorical regression on all predictors
    Fit {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Categorical regression and stepwise selection until the predictor set is stable
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        /// Write the final model file here
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Evaluate a model file
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// NAME=VALUE; category label, quantified number, or raw positive size
        #[arg(long = "value", value_name = "NAME=VALUE")]
        values: Vec<String>,
    },
    /// k-fold cross-validation of one method
    Crossval {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::CatregStepwise)]
        method: MethodArg,
    },
    /// Cross-validate the dummy-coded baseline and the two-step method on shared folds
    Compare {
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Function points from SLOC per language
    Backfire {
        /// LANGUAGE=SLOC
        #[arg(long = "sloc", value_name = "LANG=COUNT", required = true)]
        sloc: Vec<String>,
        #[arg(long)]
        gearing: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CrossvalSection {
    k: Option<usize>,
    mre_scale: Option<MreScale>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ToolConfig {
    catreg: CatregConfig,
    stepwise: StepwiseConfig,
    max_rounds: Option<usize>,
    ingest: IngestConfig,
    crossval: CrossvalSection,
}

const DEFAULT_K: usize = 6;

impl ToolConfig {
    fn load(path: Option<&Path>) -> catreg_core::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        }
    }

    fn model_config(&self, seed: u64, max_rounds: Option<usize>) -> ModelConfig {
        let mut config = ModelConfig {
            catreg: self.catreg.clone(),
            stepwise: self.stepwise.clone(),
            ..ModelConfig::default()
        };
        config.catreg.seed = seed;
        if let Some(r) = max_rounds.or(self.max_rounds) {
            config.max_rounds = r;
        }
        config
    }

    fn ingest_config(&self, data: &DataArgs) -> catreg_core::Result<IngestConfig> {
        let mut config = self.ingest.clone();
        if let Some(g) = &data.gearing {
            config.gearing = GearingTable::load(g)?;
        }
        if let Some(s) = &data.schema {
            config.schema = Some(QuestionnaireSchema::load(s)?);
        }
        Ok(config)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_dataset(data: &DataArgs, tool: &ToolConfig) -> catreg_core::Result<Dataset> {
    if is_csv(&data.data) {
        let text = fs::read_to_string(&data.data)?;
        let (dataset, report) = ingest_csv(&text, &tool.ingest_config(data)?)?;
        if !report.removed.is_empty() {
            eprintln!("ingest: removed {} row(s)", report.removed.len());
        }
        Ok(dataset)
    } else {
        Dataset::load(&data.data)
    }
}

fn parse_pair(text: &str) -> catreg_core::Result<(String, String)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("expected NAME=VALUE, got `{text}`")))?;
    Ok((name.trim().to_string(), value.trim().to_string()))
}

#[derive(Serialize)]
struct Seeded<'a, T: Serialize> {
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct FitOutput<'a> {
    seed: u64,
    fit: &'a CatregFit,
}

#[derive(Serialize)]
struct BackfireOutput {
    sloc: BTreeMap<String, f64>,
    function_points: f64,
}

fn fit_table(seed: u64, fit: &CatregFit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {seed}");
    let _ = writeln!(
        out,
        "R2 {:.4}  adjusted R2 {:.4}  iterations {}  converged {}",
        fit.r_squared, fit.adj_r_squared, fit.iterations, fit.converged
    );
    let _ = writeln!(out, "{:<16} {:>10} {:>10}", "variable", "beta", "p");
    for ((name, beta), p) in fit.predictors.iter().zip(&fit.coefficients).zip(&fit.p_values) {
        let p = p.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{name:<16} {beta:>10.4} {p:>10}");
    }
    for d in &fit.diagnostics {
        let _ = writeln!(out, "note: {d}");
    }
    out
}

fn pipeline_table(seed: u64, result: &PipelineResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {seed}");
    for round in &result.rounds {
        let _ = writeln!(
            out,
            "round {}: {} candidates, catreg R2 {:.4} (adj {:.4}), selected [{}]",
            round.round,
            round.candidates.len(),
            round.catreg.r_squared,
            round.catreg.adj_r_squared,
            round.selected.join(", ")
        );
    }
    let _ = writeln!(out, "converged {}  empty model {}", result.converged, result.empty_model);
    let fit = &result.final_fit;
    let _ = writeln!(out, "final R2 {:.4}  adjusted R2 {:.4}", fit.r_squared, fit.adj_r_squared);
    let _ = writeln!(out, "{:<16} {:>10} {:>10} {:>10}", "variable", "B", "beta", "p");
    let _ = writeln!(out, "{:<16} {:>10.4}", "(constant)", result.final_model.intercept);
    for (i, (name, b)) in result.final_model.coefficients.iter().enumerate() {
        let _ = writeln!(
            out,
            "{name:<16} {b:>10.4} {:>10.4} {:>10.4}",
            fit.standardized[i], fit.coefficients[i].p_value
        );
    }
    out
}

fn method_table(report: &MethodReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} | k = {} | seed = {} | MRE on {:?} scale",
        report.method.label(),
        report.k,
        report.seed,
        report.mre_scale
    );
    let _ = writeln!(out, "{:<12} {:>8} {:>8} {:>10}", "Experiment", "train", "test", "MMRE");
    for f in &report.folds {
        let _ = writeln!(out, "{:<12} {:>8} {:>8} {:>10.4}", f.fold, f.n_train, f.n_test, f.mmre);
    }
    let _ = writeln!(out, "{:<12} {:>8} {:>8} {:>10.4}", "Average", "", "", report.average_mmre);
    let _ = writeln!(out, "unpredictable rows: {}", report.unpredictable_count());
    out
}

fn removal_table(dataset: &Dataset, report: &RemovalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kept {} rows, {} variables", dataset.n(), dataset.variables().len());
    for r in &report.removed {
        let _ = writeln!(out, "removed {}: {}", r.row_id, r.reasons.join("; "));
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> catreg_core::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit(output: Option<&Path>, text: &str) -> catreg_core::Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> catreg_core::Result<()> {
    let tool = ToolConfig::load(cli.config.as_deref())?;
    let seed = cli.seed;
    let table = cli.format == Format::Table;
    let text = match cli.command {
        Command::Ingest {
            data,
            outlier_zmax,
            report,
        } => {
            let mut config = tool.ingest_config(&data)?;
            if outlier_zmax.is_some() {
                config.outlier_zmax = outlier_zmax;
            }
            let csv = fs::read_to_string(&data.data)?;
            let (dataset, removal) = ingest_csv(&csv, &config)?;
            if let Some(path) = report {
                fs::write(path, to_json(&removal)?)?;
            }
            eprint!("{}", removal_table(&dataset, &removal));
            // the dataset file is always JSON so it can be read back
            dataset.to_json()? + "\n"
        }
        Command::Fit { data } => {
            let dataset = load_dataset(&data, &tool)?;
            let config = tool.model_config(seed, None);
            let fit = catreg_fit(&dataset, &dataset.predictor_names(), &config.catreg)?;
            if table {
                fit_table(seed, &fit)
            } else {
                to_json(&FitOutput { seed, fit: &fit })?
            }
        }
        Command::Pipeline {
            data,
            model_out,
            max_rounds,
        } => {
            let dataset = load_dataset(&data, &tool)?;
            let config = tool.model_config(seed, max_rounds);
            let result = run_pipeline(&dataset, None, &config)?;
            if let Some(path) = model_out {
                result.final_model.save(path)?;
            }
            if table {
                pipeline_table(seed, &result)
            } else {
                to_json(&Seeded { seed, body: &result })?
            }
        }
        Command::Predict { model, values } => {
            let model = SerializedModel::load(model)?;
            let mut inputs = IndexMap::new();
            for pair in &values {
                let (name, value) = parse_pair(pair)?;
                let input = match value.parse::<f64>() {
                    Ok(x) => PredictInput::Number(x),
                    Err(_) => PredictInput::Label(value),
                };
                inputs.insert(name, input);
            }
            let prediction = model.predict(&inputs)?;
            if table {
                format!(
                    "ln estimate {:.6}\ndefect estimate {:.6}\n",
                    prediction.ln_estimate, prediction.defect_estimate
                )
            } else {
                to_json(&prediction)?
            }
        }
        Command::Crossval { eval, method } => {
            let dataset = load_dataset(&eval.data, &tool)?;
            let config = tool.model_config(seed, None);
            let k = eval.k.or(tool.crossval.k).unwrap_or(DEFAULT_K);
            let scale = eval.mre_scale.map(MreScale::from).or(tool.crossval.mre_scale).unwrap_or_default();
            let method = match method {
                MethodArg::DummyOls => Method::DummyOls,
                MethodArg::CatregStepwise => Method::CatregStepwise,
            };
            let report = crossval(&dataset, k, seed, method, &config, scale)?;
            if table {
                method_table(&report)
            } else {
                to_json(&report)?
            }
        }
        Command::Compare { eval } => {
            let dataset = load_dataset(&eval.data, &tool)?;
            let config = tool.model_config(seed, None);
            let k = eval.k.or(tool.crossval.k).unwrap_or(DEFAULT_K);
            let scale = eval.mre_scale.map(MreScale::from).or(tool.crossval.mre_scale).unwrap_or_default();
            let report = compare_baseline(&dataset, k, seed, &config, scale)?;
            if table {
                report.render_table()
            } else {
                to_json(&report)?
            }
        }
        Command::Backfire { sloc, gearing } => {
            let gearing = match gearing {
                Some(path) => GearingTable::load(path)?,
                None => tool.ingest.gearing.clone(),
            };
            let mut counts = BTreeMap::new();
            for pair in &sloc {
                let (lang, count) = parse_pair(pair)?;
                let count: f64 = count
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("SLOC for `{lang}` is not a number")))?;
                if !(count >= 0.0) {
                    return Err(Error::InvalidInput(format!("SLOC for `{lang}` is negative")));
                }
                counts.insert(lang, count);
            }
            let fp = backfire(&counts, &gearing)?;
            if table {
                format!("function points {fp:.4}\n")
            } else {
                to_json(&BackfireOutput {
                    sloc: counts,
                    function_points: fp,
                })?
            }
        }
    };
    emit(cli.output.as_deref(), &text)
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 1,
        ErrorKind::Numerical => 2,
        ErrorKind::Io => 3,
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
