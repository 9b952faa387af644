//! The `rpcscreen` command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{default_holp_lambda, emit_table, run_plan, BenchmarkPlan, TableFormat};
use crate::error::{Error, Result};
use crate::io::{load_data, ranked_records, records_to_csv, write_output, LoadedData, ResponseSource};
use crate::screening::{
    lambda_presets, screen, select_top_k, sis_scores, standardize, LambdaPreset, Method, RidgeEngine, StandardizedData,
};

#[derive(Debug, Parser)]
#[command(
    name = "rpcscreen",
    version,
    about = "Ridge partial correlation screening for p >> n regression"
)]
pub struct Cli {
    /// Worker threads; overrides RPC_THREADS, which overrides the detected core count.
    #[arg(long, global = true, env = "RPC_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the predictors of one dataset and keep the top K.
    Screen(ScreenArgs),
    /// Run a Monte-Carlo benchmark plan.
    Simulate(SimulateArgs),
    /// Run every screener on one dataset and report how much their selections overlap.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Predictor matrix, rows = observations.
    #[arg(long)]
    pub x: PathBuf,
    /// Single-column response file.
    #[arg(long, required_unless_present = "y_col", conflicts_with = "y_col")]
    pub y: Option<PathBuf>,
    /// Response column of the predictor file, by header name or 0-based index.
    #[arg(long = "y-col")]
    pub y_col: Option<String>,
}

impl DataArgs {
    fn response(&self) -> ResponseSource {
        match (&self.y, &self.y_col) {
            (Some(p), _) => ResponseSource::File(p.clone()),
            (None, Some(c)) => ResponseSource::Column(c.clone()),
            (None, None) => unreachable!("clap requires one of --y and --y-col"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScreenMethod {
    Rpc,
    Holp,
    Sis,
    Fr,
}

impl From<ScreenMethod> for Method {
    fn from(m: ScreenMethod) -> Self {
        match m {
            ScreenMethod::Rpc => Method::Rpc,
            ScreenMethod::Holp => Method::Holp,
            ScreenMethod::Sis => Method::Sis,
            ScreenMethod::Fr => Method::Fr,
        }
    }
}

/// A literal penalty or a preset resolved against the loaded data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Value(f64),
    Preset(LambdaPreset),
}

impl FromStr for LambdaArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(p) = s.parse::<LambdaPreset>() {
            return Ok(LambdaArg::Preset(p));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(LambdaArg::Value(v)),
            _ => Err(Error::invalid(format!(
                "lambda must be a positive number or one of rpc1, rpc2, rpc3, got {s:?}"
            ))),
        }
    }
}

impl LambdaArg {
    pub fn resolve(self, n: usize, p: usize) -> Result<f64> {
        match self {
            LambdaArg::Value(v) => Ok(v),
            LambdaArg::Preset(preset) => Ok(lambda_presets(n, p)?.get(preset)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub method: ScreenMethod,
    /// Defaults to rpc1 for RPC and to n/p for HOLP; not accepted by SIS or FR.
    #[arg(long, value_parser = parse_lambda)]
    pub lambda: Option<LambdaArg>,
    /// Submodel size; defaults to min(n, p).
    #[arg(long)]
    pub k: Option<usize>,
    /// Output file; stdout when absent. A run manifest goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

fn parse_lambda(s: &str) -> std::result::Result<LambdaArg, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Benchmark plan JSON.
    #[arg(long)]
    pub plan: PathBuf,
    /// Receives summary.json, table.csv and table.txt.
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the plan's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Submodel size; defaults to min(n, p).
    #[arg(long)]
    pub k: Option<usize>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit status.
/// Diagnostics go to stderr as a single line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let line = match e.kind() {
                clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    "error: a subcommand is required (screen, simulate or compare)"
                }
                _ => text.lines().next().unwrap_or("error: invalid usage"),
            };
            eprintln!("{line}");
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Screen(a) => cmd_screen(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
    })
}

fn prepare(args: &DataArgs) -> Result<(LoadedData, StandardizedData)> {
    let loaded = load_data(&args.x, &args.response())?;
    let data = standardize(&loaded.x, &loaded.y)?;
    Ok((loaded, data))
}

fn resolve_k(k: Option<usize>, n: usize, p: usize) -> Result<usize> {
    match k {
        None => Ok(n.min(p)),
        Some(0) => Err(Error::invalid("k must be at least 1")),
        Some(k) if k > p => Err(Error::invalid(format!(
            "k = {k} exceeds the number of predictors p = {p}"
        ))),
        Some(k) => Ok(k),
    }
}

#[derive(Serialize)]
struct ScreenManifest<'a> {
    x: &'a Path,
    n: usize,
    p: usize,
    method: Method,
    lambda: Option<f64>,
    k: usize,
    elapsed_ms: f64,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn cmd_screen(args: &ScreenArgs) -> Result<()> {
    let start = Instant::now();
    let (loaded, data) = prepare(&args.data)?;
    let (n, p) = (data.n(), data.p());
    let method = Method::from(args.method);
    let k = match (method, args.k) {
        (Method::Fr, None) => n.saturating_sub(2).min(p).max(1),
        (_, k) => resolve_k(k, n, p)?,
    };
    let lambda = match (method, args.lambda) {
        (Method::Rpc, l) => Some(l.unwrap_or(LambdaArg::Preset(LambdaPreset::Rpc1)).resolve(n, p)?),
        (Method::Holp, Some(l)) => Some(l.resolve(n, p)?),
        (Method::Holp, None) => Some(default_holp_lambda(n, p)?),
        (_, Some(_)) => return Err(Error::invalid(format!("method {method} does not take --lambda"))),
        (_, None) => None,
    };
    let result = screen(&data, method, lambda, k)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let names = loaded.names.as_deref();
    let records = ranked_records(&result.selected, &result.scores, names);
    let body = match args.format {
        OutputFormat::Csv => records_to_csv(&records, names.is_some())?,
        OutputFormat::Json => to_json(&records)?,
    };
    write_output(args.out.as_deref(), &body)?;
    if let Some(out) = &args.out {
        let manifest = ScreenManifest {
            x: &args.data.x,
            n,
            p,
            method,
            lambda,
            k,
            elapsed_ms,
        };
        write_output(Some(&manifest_path(out)), &to_json(&manifest)?)?;
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(format!("json output: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    plan: &'a BenchmarkPlan,
    summaries: &'a [crate::bench::MetricsSummary],
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.plan).map_err(|source| Error::Io {
        path: args.plan.clone(),
        source,
    })?;
    let mut plan = BenchmarkPlan::from_json(&text)?;
    if let Some(seed) = args.seed {
        plan.setting.seed = seed;
    }
    let summaries = run_plan(&plan)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let report = SimulationReport {
        plan: &plan,
        summaries: &summaries,
    };
    write_output(Some(&args.out_dir.join("summary.json")), &to_json(&report)?)?;
    write_output(
        Some(&args.out_dir.join("table.csv")),
        &emit_table(&summaries, TableFormat::Csv)?,
    )?;
    write_output(
        Some(&args.out_dir.join("table.txt")),
        &emit_table(&summaries, TableFormat::Text)?,
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub method: String,
    pub lambda: Vec<f64>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlap {
    pub a: String,
    pub b: String,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub methods: Vec<Selection>,
    pub overlaps: Vec<Overlap>,
}

/// `|A ∩ B| / |A ∪ B|`; 1 for two empty sets.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::BTreeSet;
    let a: BTreeSet<_> = a.iter().collect();
    let b: BTreeSet<_> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// RPC1, RPC2, RPC3, URPC, HOLP and SIS on one dataset, with pairwise overlaps.
pub fn compare(data: &StandardizedData, k: usize) -> Result<Comparison> {
    let (n, p) = (data.n(), data.p());
    let presets = lambda_presets(n, p)?;
    let engine = RidgeEngine::new(data);
    let mut methods = Vec::new();
    let mut union: Vec<usize> = Vec::new();
    for (name, lambda) in ["RPC1", "RPC2", "RPC3"].into_iter().zip(presets.all()) {
        let selected = select_top_k(&engine.components(lambda)?.scores, k)?;
        for &j in &selected {
            if !union.contains(&j) {
                union.push(j);
            }
        }
        methods.push(Selection {
            method: name.into(),
            lambda: vec![lambda],
            selected,
        });
    }
    methods.push(Selection {
        method: "URPC".into(),
        lambda: presets.all().to_vec(),
        selected: union,
    });
    let holp_lambda = default_holp_lambda(n, p)?;
    methods.push(Selection {
        method: "HOLP".into(),
        lambda: vec![holp_lambda],
        selected: select_top_k(&engine.ridge_beta(holp_lambda)?, k)?,
    });
    methods.push(Selection {
        method: "SIS".into(),
        lambda: Vec::new(),
        selected: select_top_k(&sis_scores(data)?, k)?,
    });

    let mut overlaps = Vec::new();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            overlaps.push(Overlap {
                a: a.method.clone(),
                b: b.method.clone(),
                jaccard: jaccard(&a.selected, &b.selected),
            });
        }
    }
    Ok(Comparison {
        n,
        p,
        k,
        methods,
        overlaps,
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let (_, data) = prepare(&args.data)?;
    let k = resolve_k(args.k, data.n(), data.p())?;
    let report = compare(&data, k)?;
    write_output(args.out.as_deref(), &to_json(&report)?)
}
