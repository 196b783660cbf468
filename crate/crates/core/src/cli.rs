//! Command line interface.
//!
//! Every subcommand writes one artifact (JSON or CSV) to `--out` or stdout.
//! Failures print a JSON object `{"error": kind, "message": ...}` on stderr and
//! exit with 2, or with 3 for overflow and budget errors.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::approximator::{approximate_profile, ApproxParams, DEFAULT_SEED};
use crate::convolution::exact_profile_per_letter;
use crate::error::{Error, Result};
use crate::hash_family::{FamilyKind, HashFamily};
use crate::instances;
use crate::metric::{MetricSpace, Symbol, SymbolString, WILDCARD};
use crate::one_mismatch::{one_mismatch, MismatchReport};
use crate::oracle::{family_report, naive_profile};
use crate::profile::DistanceProfile;
use crate::rng::{simple_stream, Purpose};

#[derive(Debug, Parser)]
#[command(name = "metricprof", version, about = "Distance profiles under alphabet metrics")]
pub struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact profile by the quadratic or the per-letter method.
    Exact(ExactArgs),
    /// Sampled (1 ± ε) approximation of the profile.
    Approx(ApproxArgs),
    /// Match / single mismatch / more, for every offset.
    Mismatch1(MismatchArgs),
    /// Empirical check of the separating hash family at one threshold.
    HashValidate(HashValidateArgs),
    /// Timing table over grids of text and pattern lengths.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Naive,
    PerLetter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    Auto,
    Grid,
    Partition,
}

impl FamilyChoice {
    fn resolve(self, ms: &MetricSpace) -> FamilyKind {
        match self {
            FamilyChoice::Auto => FamilyKind::for_metric(ms),
            FamilyChoice::Grid => FamilyKind::Grid,
            FamilyChoice::Partition => FamilyKind::Partition,
        }
    }
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub text: PathBuf,
    #[arg(long)]
    pub pattern: PathBuf,
    /// Read text and pattern as raw bytes, byte `b` being symbol `b`.
    #[arg(long)]
    pub bytes: bool,
    /// Token standing for a don't-care position (token mode only).
    #[arg(long, default_value = "?")]
    pub wildcard: String,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Master seed: an unsigned integer or `random`.
    #[arg(long, env = "METRICPROF_SEED")]
    pub seed: Option<String>,
}

impl SeedArg {
    fn resolve(&self) -> Result<u64> {
        match self.seed.as_deref() {
            None => Ok(DEFAULT_SEED),
            Some("random") => Ok(rand::random()),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("seed must be an unsigned integer or `random`, got {s:?}"))),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, value_enum, default_value = "per-letter")]
    pub method: Method,
    /// Also run the other method and fail if they disagree beyond 1e-9 relative.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t: f64,
    #[arg(long = "k-const", default_value_t = 4.0)]
    pub k_const: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub family: FamilyChoice,
    /// Cap on the total number of sampling runs.
    #[arg(long = "max-samples", default_value_t = 50_000_000)]
    pub max_samples: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MismatchArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Symbol list source; without it tokens are numbered by first appearance.
    #[arg(long)]
    pub metric: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HashValidateArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// Threshold in normalized units (the smallest nonzero distance is 1).
    #[arg(long = "D")]
    pub threshold: f64,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub family: FamilyChoice,
    /// Write every draw as CSV rows `draw_id,symbol,bucket`.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "50,200")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub sigma: usize,
    #[arg(long = "b-d", default_value_t = 8.0)]
    pub b_d: f64,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t: f64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub output: Output,
}

/// Metric file, either form:
///
/// ```json
/// {"type": "finite", "symbols": ["a", "b"], "matrix": [[0, 1], [1, 0]]}
/// {"type": "normed", "p": 2, "symbols": ["a", "b"], "points": [[0, 0], [3, 4]]}
/// ```
///
/// `p` may be `"inf"`. Without `symbols`, the symbols are `"0"`, `"1"`, ….
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MetricFile {
    Finite {
        symbols: Option<Vec<String>>,
        matrix: Vec<Vec<f64>>,
    },
    Normed {
        p: Exponent,
        symbols: Option<Vec<String>>,
        points: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Name(String),
}

/// A loaded metric together with the token of every symbol.
pub struct LoadedMetric {
    pub metric: MetricSpace,
    pub symbols: Vec<String>,
}

impl LoadedMetric {
    pub fn parse(source: &str) -> Result<Self> {
        let file: MetricFile = serde_json::from_str(source)?;
        let (metric, symbols) = match file {
            MetricFile::Finite { symbols, matrix } => (MetricSpace::validate(&matrix)?, symbols),
            MetricFile::Normed { p, symbols, points } => {
                let p = match p {
                    Exponent::Number(p) => p,
                    Exponent::Name(s) if matches!(s.as_str(), "inf" | "Inf" | "infinity") => f64::INFINITY,
                    Exponent::Name(s) => return Err(Error::InvalidParameter(format!("unknown norm exponent {s:?}"))),
                };
                (MetricSpace::normed(&points, p)?, symbols)
            }
        };
        let symbols = match symbols {
            Some(s) if s.len() != metric.size() => {
                return Err(Error::MalformedMatrix(format!(
                    "{} symbols listed for an alphabet of size {}",
                    s.len(),
                    metric.size()
                )))
            }
            Some(s) => s,
            None => (0..metric.size()).map(|i| i.to_string()).collect(),
        };
        let mut seen = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if let Some(j) = seen.insert(s.as_str(), i) {
                return Err(Error::MalformedMatrix(format!("symbol {s:?} listed at {j} and {i}")));
            }
        }
        Ok(Self { metric, symbols })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

enum Tokens<'a> {
    Fixed(HashMap<&'a str, Symbol>),
    Interned(HashMap<String, Symbol>),
}

/// Reads text and pattern with a shared symbol mapping.
fn read_pair(inputs: &Inputs, symbols: Option<&[String]>) -> Result<(SymbolString, SymbolString)> {
    if inputs.bytes {
        let read = |p: &Path| -> Result<SymbolString> {
            let mut raw = fs::read(p)?;
            if raw.last() == Some(&b'\n') {
                raw.pop();
                if raw.last() == Some(&b'\r') {
                    raw.pop();
                }
            }
            Ok(raw.into_iter().map(Symbol::from).collect())
        };
        return Ok((read(&inputs.text)?, read(&inputs.pattern)?));
    }
    let mut tokens = match symbols {
        Some(list) => Tokens::Fixed(list.iter().enumerate().map(|(i, s)| (s.as_str(), i as Symbol)).collect()),
        None => Tokens::Interned(HashMap::new()),
    };
    let mut read = |p: &Path| -> Result<SymbolString> {
        let content = fs::read_to_string(p)?;
        content
            .split_whitespace()
            .map(|tok| {
                if tok == inputs.wildcard {
                    return Ok(WILDCARD);
                }
                match &mut tokens {
                    Tokens::Fixed(map) => map.get(tok).copied().ok_or_else(|| Error::UnknownSymbol(tok.to_string())),
                    Tokens::Interned(map) => {
                        let next = map.len() as Symbol;
                        Ok(*map.entry(tok.to_string()).or_insert(next))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(SymbolString::new)
    };
    let text = read(&inputs.text)?;
    let pattern = read(&inputs.pattern)?;
    Ok((text, pattern))
}

fn write_output(out: Option<&Path>, body: &str) -> Result<Option<String>> {
    match out {
        Some(p) => {
            fs::write(p, body)?;
            Ok(None)
        }
        None => Ok(Some(body.to_string())),
    }
}

fn profile_artifact(profile: &DistanceProfile, n: usize, m: usize, params: Value, format: Format) -> Result<String> {
    let low = profile.low_confidence_offsets();
    match format {
        Format::Json => {
            let diagnostics: Vec<_> = profile.levels.iter().map(|l| l.summary()).collect();
            let doc = json!({
                "mode": profile.mode,
                "n": n,
                "m": m,
                "offsets": profile.len(),
                "profile": profile.values,
                "scale": profile.scale,
                "params": params,
                "diagnostics": {
                    "sample_runs": profile.sample_runs,
                    "levels": diagnostics,
                },
                "low_confidence_offsets": low,
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let approx = !profile.levels.is_empty();
            let mut flags = vec![false; profile.len()];
            for &i in &low {
                flags[i] = true;
            }
            let mut s = String::from(if approx { "offset,value,low_confidence\n" } else { "offset,value\n" });
            for (i, v) in profile.values.iter().enumerate() {
                if approx {
                    s.push_str(&format!("{i},{v},{}\n", flags[i]));
                } else {
                    s.push_str(&format!("{i},{v}\n"));
                }
            }
            Ok(s)
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn run_exact(args: &ExactArgs) -> Result<Option<String>> {
    let loaded = LoadedMetric::load(&args.metric)?;
    let (text, pattern) = read_pair(&args.inputs, Some(&loaded.symbols))?;
    let compute = |method: Method| match method {
        Method::Naive => naive_profile(&text, &pattern, &loaded.metric),
        Method::PerLetter => exact_profile_per_letter(&text, &pattern, &loaded.metric),
    };
    let profile = compute(args.method)?;
    let mut params = json!({ "method": match args.method { Method::Naive => "naive", Method::PerLetter => "per-letter" } });
    if args.verify {
        let other = compute(match args.method {
            Method::Naive => Method::PerLetter,
            Method::PerLetter => Method::Naive,
        })?;
        let worst = profile
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| relative_gap(a, b))
            .fold(0.0, f64::max);
        if worst > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "naive and per-letter profiles disagree: relative gap {worst:e}"
            )));
        }
        params["verified_max_relative_gap"] = json!(worst);
    }
    let body = profile_artifact(&profile, text.len(), pattern.len(), params, args.output.format)?;
    write_output(args.output.out.as_deref(), &body)
}

fn run_approx(args: &ApproxArgs) -> Result<Option<String>> {
    let loaded = LoadedMetric::load(&args.metric)?;
    let (text, pattern) = read_pair(&args.inputs, Some(&loaded.symbols))?;
    let params = ApproxParams {
        epsilon: args.epsilon,
        t: args.t,
        k_const: args.k_const,
        master_seed: args.seed.resolve()?,
        max_sample_runs: args.max_samples,
        ..Default::default()
    };
    let family = args.family.resolve(&loaded.metric);
    let profile = approximate_profile(&text, &pattern, &loaded.metric, family, &params)?;
    let meta = json!({
        "epsilon": params.epsilon,
        "t": params.t,
        "k_const": params.k_const,
        "seed": params.master_seed,
        "family": family.name(),
        "max_samples": params.max_sample_runs,
    });
    let body = profile_artifact(&profile, text.len(), pattern.len(), meta, args.output.format)?;
    write_output(args.output.out.as_deref(), &body)
}

fn run_mismatch(args: &MismatchArgs) -> Result<Option<String>> {
    let loaded = args.metric.as_deref().map(LoadedMetric::load).transpose()?;
    let (text, pattern) = read_pair(&args.inputs, loaded.as_ref().map(|l| l.symbols.as_slice()))?;
    let labels = one_mismatch(&text, &pattern)?;
    let body = match args.output.format {
        Format::Json => {
            let values: Vec<Value> = labels
                .iter()
                .map(|l| match l {
                    MismatchReport::Match => json!("match"),
                    MismatchReport::Location(j) => json!(j),
                    MismatchReport::Many => json!("many"),
                })
                .collect();
            let doc = json!({
                "mode": "mismatch1",
                "n": text.len(),
                "m": pattern.len(),
                "offsets": labels.len(),
                "labels": values,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("offset,label\n");
            for (i, l) in labels.iter().enumerate() {
                let label = match l {
                    MismatchReport::Match => "match".to_string(),
                    MismatchReport::Location(j) => j.to_string(),
                    MismatchReport::Many => "many".to_string(),
                };
                s.push_str(&format!("{i},{label}\n"));
            }
            s
        }
    };
    write_output(args.output.out.as_deref(), &body)
}

fn run_hash_validate(args: &HashValidateArgs) -> Result<Option<String>> {
    if args.draws == 0 {
        return Err(Error::InvalidParameter("draws must be positive".into()));
    }
    let loaded = LoadedMetric::load(&args.metric)?;
    let ms = loaded.metric.normalize()?;
    let family = HashFamily::new(args.family.resolve(&ms), &ms, args.threshold)?;
    let seed = args.seed.resolve()?;
    let report = family_report(&family, args.draws, &mut simple_stream(seed, Purpose::Validation, 0));
    if let Some(path) = &args.dump {
        // same stream, so the dump shows exactly the draws that were checked
        let mut rng = simple_stream(seed, Purpose::Validation, 0);
        let mut csv = String::from("draw_id,symbol,bucket\n");
        for draw in 0..args.draws {
            let h = family.sample(&mut rng);
            for (x, b) in h.table().iter().enumerate() {
                csv.push_str(&format!("{draw},{},{b}\n", loaded.symbols[x]));
            }
        }
        fs::write(path, csv)?;
    }
    let mut doc = serde_json::to_value(&report)?;
    doc["seed"] = json!(seed);
    let body = serde_json::to_string_pretty(&doc)? + "\n";
    write_output(args.out.as_deref(), &body)
}

fn run_bench(args: &BenchArgs) -> Result<Option<String>> {
    if args.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be positive".into()));
    }
    let seed = args.seed.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ms = instances::random_metric(args.sigma, args.b_d, &mut rng);
    let params = ApproxParams {
        epsilon: args.epsilon,
        t: args.t,
        master_seed: seed,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &n in &args.n {
        let text = instances::random_string(n, args.sigma, &mut rng);
        for &m in &args.m {
            if m == 0 || m > n {
                continue;
            }
            let pattern = instances::random_string(m, args.sigma, &mut rng);
            let time = |f: &dyn Fn() -> Result<DistanceProfile>| -> Result<(f64, u64)> {
                let mut best = f64::INFINITY;
                let mut runs = 0;
                for _ in 0..args.repeats {
                    let start = Instant::now();
                    runs = f()?.sample_runs;
                    best = best.min(start.elapsed().as_secs_f64());
                }
                Ok((best, runs))
            };
            let (naive, _) = time(&|| naive_profile(&text, &pattern, &ms))?;
            let (per_letter, _) = time(&|| exact_profile_per_letter(&text, &pattern, &ms))?;
            let (approx, runs) = time(&|| approximate_profile(&text, &pattern, &ms, FamilyKind::Partition, &params))?;
            for (method, seconds, sample_runs) in [
                ("naive", naive, 0),
                ("per-letter", per_letter, 0),
                ("approx", approx, runs),
            ] {
                rows.push(json!({ "n": n, "m": m, "method": method, "seconds": seconds, "sample_runs": sample_runs }));
            }
        }
    }
    let body = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&json!({ "sigma": args.sigma, "b_d": args.b_d, "rows": rows }))? + "\n",
        Format::Csv => {
            let mut s = String::from("n,m,method,seconds,sample_runs\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r["n"], r["m"], r["method"].as_str().unwrap_or_default(), r["seconds"], r["sample_runs"]
                ));
            }
            s
        }
    };
    write_output(args.output.out.as_deref(), &body)
}

/// Runs a parsed command and returns the artifact when it goes to stdout.
pub fn execute(cli: &Cli) -> Result<Option<String>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        builder = builder.num_threads(threads);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Exact(a) => run_exact(a),
        Command::Approx(a) => run_approx(a),
        Command::Mismatch1(a) => run_mismatch(a),
        Command::HashValidate(a) => run_hash_validate(a),
        Command::Bench(a) => run_bench(a),
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::OverflowRisk { .. } | Error::BudgetExceeded { .. } => 3,
        _ => 2,
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

/// Parses `args` (program name first), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report_error("usage", e.to_string().trim());
            return 2;
        }
    };
    match execute(&cli) {
        Ok(Some(body)) => {
            print!("{body}");
            0
        }
        Ok(None) => 0,
        Err(err) => {
            report_error(err.kind(), &err.to_string());
            exit_code(&err)
        }
    }
}
