use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use nncert::analysis::{
    chsh, critical_visibility, fritz_chsh, postselected_chsh, range_grid, records_to_csv, sweep,
    BisectionConfig, VisibilityFamily,
};
use nncert::generators::{BipartiteBox, ExampleKind};
use nncert::oracles::{classify, OracleConfig};
use nncert::{format, Correlation, Error};

#[derive(Parser, Debug)]
#[command(name = "nncert", version, about = "Classify 3-chain network correlations")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Feasibility threshold of the oracles.
    #[arg(long, global = true, default_value_t = 1e-7)]
    eps: f64,
    /// Grid points per axis of the square oracle's outer search (at least 8).
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
    /// Refinement rounds of the square oracle's outer search.
    #[arg(long, global = true, default_value_t = 3)]
    refine: usize,
    /// Seesaw restarts.
    #[arg(long, global = true, default_value_t = 16)]
    restarts: usize,
    /// Seesaw seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bisection tolerance.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Report format; sweeps default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Leave the `timestamp` field out of JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named example correlation as an nncert-corr-v1 file.
    Generate {
        #[arg(long)]
        example: String,
        /// `name=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Output path; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Locate a correlation file in the hierarchy.
    Classify { file: PathBuf },
    /// Classify an example along a parameter range.
    Sweep {
        #[arg(long)]
        example: String,
        /// `name=lo:hi:step`.
        #[arg(long = "param")]
        range: String,
        /// `name=value[,name=value...]`, repeatable.
        #[arg(long)]
        fixed: Vec<String>,
    },
    /// Critical visibility of a quantum family (mnn1q or mnn2).
    Visibility {
        #[arg(long)]
        example: String,
        #[arg(long)]
        fixed: Vec<String>,
    },
    /// CHSH value of a correlation file.
    Chsh {
        file: PathBuf,
        /// Condition on Bob's output, `b=k`.
        #[arg(long, conflicts_with = "fritz")]
        postselect: Option<String>,
        /// Fritz functional at Charlie input `z=k`.
        #[arg(long)]
        fritz: Option<String>,
    },
    /// Check normalization, positivity and no-signalling of a file.
    Validate { file: PathBuf },
}

/// A failure together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCorrelation(_) | Error::UnsupportedShape(_) => 2,
            Error::Numeric(_) | Error::NoBracket(_) => 3,
            Error::Structure(_) | Error::Format(_) | Error::Parameter(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    let cfg = oracle_config(g)?;
    match &cli.command {
        Command::Generate {
            example,
            params,
            out,
        } => cmd_generate(example, params, out.as_deref()),
        Command::Classify { file } => cmd_classify(g, &cfg, file),
        Command::Sweep {
            example,
            range,
            fixed,
        } => cmd_sweep(g, &cfg, example, range, fixed),
        Command::Visibility { example, fixed } => cmd_visibility(g, &cfg, example, fixed),
        Command::Chsh {
            file,
            postselect,
            fritz,
        } => cmd_chsh(g, file, postselect.as_deref(), fritz.as_deref()),
        Command::Validate { file } => cmd_validate(g, &cfg, file),
    }
}

fn oracle_config(g: &GlobalOpts) -> Result<OracleConfig, Failure> {
    if !(g.eps > 0.0) || !(g.tol > 0.0) {
        return Err(Failure::usage("--eps and --tol must be positive"));
    }
    if g.grid < 8 {
        return Err(Failure::usage("--grid must be at least 8"));
    }
    if g.restarts == 0 {
        return Err(Failure::usage("--restarts must be at least 1"));
    }
    Ok(OracleConfig {
        eps: g.eps,
        grid_n: g.grid,
        refine_rounds: g.refine,
        restarts: g.restarts,
        seed: g.seed,
        ..OracleConfig::default()
    })
}

fn parse_number(key: &str, text: &str) -> Result<f64, Failure> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Failure::usage(format!("{key}: {text:?} is not a finite number")))
}

fn parse_assignment(item: &str) -> Result<(String, &str), Failure> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("expected name=value, got {item:?}")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Failure::usage(format!("missing name in {item:?}")));
    }
    Ok((key.to_string(), value))
}

/// Collects `name=value` items, each entry possibly comma separated.
fn parse_params<S: AsRef<str>>(items: &[S]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for item in items.iter().flat_map(|s| s.as_ref().split(',')) {
        if item.trim().is_empty() {
            continue;
        }
        let (key, value) = parse_assignment(item)?;
        let value = parse_number(&key, value)?;
        if out.insert(key.clone(), value).is_some() {
            return Err(Failure::usage(format!("parameter {key} given twice")));
        }
    }
    Ok(out)
}

/// `name=k` selector with a binary index.
fn parse_selector(text: &str, expected: &str) -> Result<usize, Failure> {
    let (key, value) = parse_assignment(text)?;
    if key != expected {
        return Err(Failure::usage(format!("expected {expected}=k, got {text:?}")));
    }
    match value.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Failure::usage(format!("{expected} must be 0 or 1, got {other:?}"))),
    }
}

fn read_correlation(path: &Path) -> Result<Correlation, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(format::from_json(&text)?)
}

fn require_valid(corr: &Correlation) -> CmdResult {
    let report = corr.validate();
    if report.is_valid {
        return Ok(());
    }
    Err(Failure::invalid(format!(
        "invalid correlation: negativity {:.3e}, normalization error {:.3e}",
        report.max_negativity, report.max_normalization_error
    )))
}

fn json_format(g: &GlobalOpts) -> CmdResult {
    match g.format {
        Some(OutputFormat::Csv) => Err(Failure::usage("csv output is only available for sweep")),
        _ => Ok(()),
    }
}

fn write_output(g: &GlobalOpts, text: &str) -> CmdResult {
    match &g.report {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(g: &GlobalOpts, body: &T) -> CmdResult {
    let mut value = serde_json::to_value(body).expect("reports serialize to JSON");
    if !g.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        match &mut value {
            Value::Object(map) => {
                map.insert("timestamp".into(), secs.into());
            }
            other => {
                let inner = other.take();
                *other = serde_json::json!({ "timestamp": secs, "result": inner });
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    text.push('\n');
    write_output(g, &text)
}

fn cmd_generate(example: &str, params: &[String], out: Option<&Path>) -> CmdResult {
    let kind = ExampleKind::from_name(example)?;
    let corr = kind.generate(&parse_params(params)?)?;
    match out {
        Some(path) => {
            format::write_file(&corr, path)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            println!(
                "wrote {} ({} probabilities, shape {}) to {}",
                kind.name(),
                corr.values().len(),
                corr.shape(),
                path.display()
            );
        }
        None => println!("{}", format::to_json(&corr)),
    }
    Ok(())
}

fn cmd_classify(g: &GlobalOpts, cfg: &OracleConfig, file: &Path) -> CmdResult {
    json_format(g)?;
    let corr = read_correlation(file)?;
    let report = classify(&corr, cfg)?;
    emit_json(g, &report)?;
    require_valid(&corr)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    example: &'a str,
    fixed: &'a BTreeMap<String, f64>,
    records: &'a [nncert::analysis::SweepRecord],
}

fn cmd_sweep(
    g: &GlobalOpts,
    cfg: &OracleConfig,
    example: &str,
    range: &str,
    fixed: &[String],
) -> CmdResult {
    let kind = ExampleKind::from_name(example)?;
    let (name, spec) = parse_assignment(range)?;
    let bounds: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = bounds[..] else {
        return Err(Failure::usage(format!("expected {name}=lo:hi:step, got {range:?}")));
    };
    let grid = range_grid(
        parse_number(&name, lo)?,
        parse_number(&name, hi)?,
        parse_number(&name, step)?,
    )?;
    let fixed = parse_params(fixed)?;
    if fixed.contains_key(&name) {
        return Err(Failure::usage(format!("{name} is both swept and fixed")));
    }
    if !kind.required().contains(&name.as_str()) && !kind.optional().contains(&name.as_str()) {
        return Err(Failure::usage(format!(
            "example {} has no parameter {name}",
            kind.name()
        )));
    }
    let records = sweep(
        &name,
        &grid,
        |value| {
            let mut params = fixed.clone();
            params.insert(name.clone(), value);
            kind.generate(&params)
        },
        cfg,
    )?;
    match g.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => write_output(g, &records_to_csv(&records)),
        OutputFormat::Json => emit_json(
            g,
            &SweepReport {
                example: kind.name(),
                fixed: &fixed,
                records: &records,
            },
        ),
    }
}

#[derive(Serialize)]
struct VisibilityReport {
    #[serde(flatten)]
    family: VisibilityFamily,
    bisection: BisectionConfig,
    #[serde(flatten)]
    result: nncert::analysis::VisibilityResult,
}

fn cmd_visibility(
    g: &GlobalOpts,
    cfg: &OracleConfig,
    example: &str,
    fixed: &[String],
) -> CmdResult {
    json_format(g)?;
    let params = parse_params(fixed)?;
    let only = |key: &str| -> Result<f64, Failure> {
        if let Some(extra) = params.keys().find(|k| k.as_str() != key) {
            return Err(Failure::usage(format!("{example} takes only {key}, got {extra}")));
        }
        params
            .get(key)
            .copied()
            .ok_or_else(|| Failure::usage(format!("{example} needs --fixed {key}=...")))
    };
    let family = match example {
        "mnn1q" => VisibilityFamily::Mnn1Quantum { mu: only("mu")? },
        "mnn2" => VisibilityFamily::Mnn2 { theta: only("theta")? },
        other => {
            return Err(Failure::usage(format!(
                "visibility supports mnn1q and mnn2, got {other:?}"
            )))
        }
    };
    let bisection = BisectionConfig {
        tol: g.tol,
        ..BisectionConfig::default()
    };
    let result = critical_visibility(family, &bisection, cfg)?;
    emit_json(
        g,
        &VisibilityReport {
            family,
            bisection,
            result,
        },
    )
}

fn cmd_chsh(
    g: &GlobalOpts,
    file: &Path,
    postselect: Option<&str>,
    fritz: Option<&str>,
) -> CmdResult {
    json_format(g)?;
    let corr = read_correlation(file)?;
    require_valid(&corr)?;
    let value = match (postselect, fritz) {
        (Some(sel), _) => postselected_chsh(&corr, parse_selector(sel, "b")?)?,
        (None, Some(sel)) => fritz_chsh(&corr, parse_selector(sel, "z")?)?,
        (None, None) => chsh(&BipartiteBox::from_correlation(&corr)?)?,
    };
    emit_json(g, &value)
}

#[derive(Serialize)]
struct ValidateReport {
    validation: nncert::ValidationReport,
    s2: nncert::S2Report,
}

fn cmd_validate(g: &GlobalOpts, cfg: &OracleConfig, file: &Path) -> CmdResult {
    json_format(g)?;
    let corr = read_correlation(file)?;
    let report = ValidateReport {
        validation: corr.validate(),
        s2: corr.check_s2(cfg.s2_tol),
    };
    emit_json(g, &report)?;
    require_valid(&corr)
}
