use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use credal::{
    generate_synthetic, load_report, load_samples, run_ablate, run_decisions, run_metrics, write_report, write_samples,
    Error, MetricKind, Mode, RunConfig, SyntheticSpec,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "credal", version, about = "Credal and interval set-valued classification over ensemble files")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Credal-set decisions over ensemble records.
    Cdec(DecideArgs),
    /// Interval-model decisions over single-pmf records.
    Idec(DecideArgs),
    /// Calibration, OoD ranking and region statistics of a report.
    Metrics(MetricsArgs),
    /// Write a synthetic ensemble corpus.
    Synth(SynthArgs),
    /// CDEC over nested ensemble prefixes.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct Common {
    /// TOML file with run parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    exact_ihdr: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Stop without writing a report at the first failing sample.
    #[arg(long)]
    strict: bool,
    /// Use only the first member of multi-member records (idec).
    #[arg(long)]
    collapse_ensemble: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// A report written by `cdec` or `idec`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of ece, ood, regions.
    #[arg(long, value_delimiter = ',', default_value = "ece,ood,regions")]
    metrics: Vec<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    /// TOML file with generator parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Comma-separated ensemble sizes.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn run_config(c: &Common, mode: Mode) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    if let Some(g) = c.gamma {
        cfg.gamma = g;
    }
    if let Some(e) = c.epsilon {
        cfg.epsilon = e;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.exact_ihdr |= c.exact_ihdr;
    cfg.validate()?;
    Ok(cfg)
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Usage(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_lines<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Failure> {
    let io = |e| Failure::Run(Error::Io { path: path.into(), source: e });
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn decide(args: DecideArgs, mode: Mode) -> Result<u8, Failure> {
    if mode == Mode::Cdec && args.collapse_ensemble {
        return Err(Failure::Usage("--collapse-ensemble applies to idec only".into()));
    }
    let cfg = run_config(&args.common, mode)?;
    let start = Instant::now();
    let samples = load_samples(&args.input)?;
    let batch = in_pool(args.common.jobs, || run_decisions(&samples, &cfg, args.collapse_ensemble))?;
    for (id, e) in &batch.failures {
        eprintln!("error: {id}: {e}");
    }
    let code = batch.exit_code();
    if args.strict {
        if let Some((_, e)) = batch.failures.into_iter().next() {
            return Err(Failure::Run(e));
        }
    }
    write_report(&args.output, &batch.report)?;
    let s = &batch.report.summary;
    eprintln!(
        "{}: {} samples, {} predicted, {} abstained, {} failed in {:.2?}",
        s.mode,
        s.n_samples,
        s.n_predict,
        s.n_abstain_aleatoric + s.n_abstain_epistemic,
        s.n_errors,
        start.elapsed()
    );
    Ok(code)
}

fn metrics(args: MetricsArgs) -> Result<u8, Failure> {
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let wanted = args
        .metrics
        .iter()
        .map(|m| MetricKind::parse(m.trim()).ok_or_else(|| Failure::Usage(format!("unknown metric {m:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let report = load_report(&args.input)?;
    let out = run_metrics(&report.records, cfg.n_bins, &wanted)?;
    write_lines(&args.output, &[out])?;
    eprintln!("metrics: {} records", report.records.len());
    Ok(0)
}

fn synth(args: SynthArgs) -> Result<u8, Failure> {
    let mut spec = match &args.config {
        Some(path) => SyntheticSpec::load(path)?,
        None => SyntheticSpec::default(),
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let records = generate_synthetic(&spec)?;
    write_samples(&args.output, &records)?;
    eprintln!("synth: {} records (k = {}, S = {}, seed = {})", records.len(), spec.k, spec.s, spec.seed);
    Ok(0)
}

fn ablate(args: AblateArgs) -> Result<u8, Failure> {
    let mut cfg = run_config(&args.common, Mode::Cdec)?;
    if let Some(grid) = args.grid {
        cfg.grid = grid;
        cfg.validate()?;
    }
    let samples = load_samples(&args.input)?;
    let start = Instant::now();
    let rows = in_pool(args.common.jobs, || run_ablate(&samples, &cfg, &cfg.grid))??;
    write_lines(&args.output, &rows)?;
    eprintln!("ablate: {} sizes over {} samples in {:.2?}", rows.len(), samples.len(), start.elapsed());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.verb {
        Verb::Cdec(a) => decide(a, Mode::Cdec),
        Verb::Idec(a) => decide(a, Mode::Idec),
        Verb::Metrics(a) => metrics(a),
        Verb::Synth(a) => synth(a),
        Verb::Ablate(a) => ablate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
