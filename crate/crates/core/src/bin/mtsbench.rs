use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use mtsbench::harness::{self, Analysis, ExperimentPlan, FitScope, HarnessError, ReportFormat, ResampleMode, ResultTable};
use mtsbench::scalers::ScalerMethod;
use mtsbench::tensor::SliceScheme;
use mtsbench::ts_io::{parse_ts, synth_generate, write_ts, SynthPreset, SynthSpec};

#[derive(Parser)]
#[command(name = "mtsbench", version, about = "Scaling benchmarks for multivariate time-series classification")]
struct Cli {
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, env = "MTSBENCH_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the method x dimension x resample grid on a train/test pair.
    Run(RunArgs),
    /// Analyse one or more result files.
    Report(ReportArgs),
    /// Write a synthetic dataset in `.ts` format.
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated scaling methods; the baseline always runs.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<ScalerMethod>>,
    /// Comma-separated dimensions: channels, timesteps, both, all.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<SliceScheme>>,
    #[arg(long, default_value_t = harness::DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = harness::DEFAULT_KERNELS)]
    kernels: usize,
    #[arg(long, default_value = "train")]
    fit_scope: FitScope,
    #[arg(long, default_value = "seed-only")]
    resample_mode: ResampleMode,
    /// Dataset name in the results; defaults to the train file stem.
    #[arg(long)]
    name: Option<String>,
    /// Record per-cell wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisArg {
    Best,
    DimSweep,
    Utility,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Markdown,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Result files; repeat for several datasets.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    analysis: AnalysisArg,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    /// Method for the dimension sweep; all complete methods when omitted.
    #[arg(long)]
    fixed_method: Option<ScalerMethod>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    preset: SynthPreset,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Exit code 1 for bad input, 2 for everything else.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Cell { .. } | HarnessError::Stats(_) | HarnessError::Csv(_) => Failure::Internal(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(input)
}

fn dataset_name(train: &Path) -> String {
    let stem = train.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    stem.strip_suffix("_TRAIN").unwrap_or(stem).to_string()
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<_, Failure> {
        parse_ts(&read_text(p)?).with_context(|| format!("parsing {}", p.display())).map_err(input)
    };
    let train = load(&args.train)?;
    let test = load(&args.test)?;
    let defaults = ExperimentPlan::default();
    let plan = ExperimentPlan {
        methods: args.methods.unwrap_or(defaults.methods),
        schemes: args.dims.unwrap_or(defaults.schemes),
        resamples: args.resamples,
        base_seed: args.seed,
        kernel_count: args.kernels,
        fit_scope: args.fit_scope,
        resample_mode: args.resample_mode,
        record_timing: args.timing,
    };
    let name = args.name.unwrap_or_else(|| dataset_name(&args.train));
    log::info!("running {} cells on {name}", plan.record_count());
    let table = harness::run_grid(&name, &train, &test, &plan)?;
    write_text(&args.out, &table.to_json()?)
}

fn report(args: ReportArgs) -> Result<(), Failure> {
    let tables = args
        .inputs
        .iter()
        .map(|p| {
            ResultTable::from_json(&read_text(p)?)
                .map_err(|e| input(anyhow!(e).context(format!("reading results {}", p.display()))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let analysis = match args.analysis {
        AnalysisArg::Best => Analysis::Best,
        AnalysisArg::DimSweep => Analysis::DimSweep(args.fixed_method),
        AnalysisArg::Utility => Analysis::Utility,
    };
    let format = match args.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    let text = harness::emit_report(&tables, analysis, format)?;
    match args.out {
        Some(path) => write_text(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec {
        preset: args.preset,
        n_samples: args.n,
        n_channels: args.c,
        n_timesteps: args.t,
        class_count: args.classes,
        seed: args.seed,
    };
    let data = synth_generate(&spec).map_err(input)?;
    let name = args.out.file_stem().and_then(|s| s.to_str()).unwrap_or("synthetic").to_string();
    write_text(&args.out, &write_ts(&data, &name))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = pool.install(|| match cli.command {
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
        Command::Synth(args) => synth(args),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}
