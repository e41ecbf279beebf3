use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ontic_core::dd::{DdPreparation, PathOrdering, Sampler};
use ontic_core::pd::builtin_minimal_instance;
use ontic_core::stats::SeedStream;
use ontic_harness::acceptance::run_suite;
use ontic_harness::config::{ModelKind, RunConfig};
use ontic_harness::error::HarnessError;
use ontic_harness::formats::{
    classify_ppp, dp_table_csv, read_json, read_pd_instance, trace_json, PppFile,
};
use ontic_harness::report::run_trials;

/// Process-based ontological models of a qubit: simulation and verification.
#[derive(Debug, Parser)]
#[command(name = "ontic", version)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per (preparation, chain).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Visits per axis in one measurement window.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    /// Axis tokens: x, y, z, greatcircle:N, polar:DEG, vec:X:Y:Z[:NAME].
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory. Without it, results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Standard errors allowed in frequency verdicts.
    #[arg(long, global = true)]
    z: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a model and write the frequency report (CSV, plus JSON with --out).
    Simulate(SimulateArgs),
    /// Run the full acceptance suite.
    Verify,
    /// Print the D-P outcome table as CSV.
    DpTable,
    /// Check a P-D instance against rules (a) and (b).
    PdValidate {
        /// Instance JSON; the built-in minimal instance when omitted.
        instance: Option<PathBuf>,
    },
    /// Equivalence classes and onticity verdicts for a PPP preparation file.
    PppClassify { preps: PathBuf },
    /// Dump one generated D-D path as JSON.
    Trace {
        /// Prepared eigenstate.
        #[arg(long, default_value = "z+")]
        prep: String,
        #[arg(long, value_enum)]
        ordering: Option<OrderingArg>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Prepared eigenstates, comma-separated (e.g. z+,x+).
    #[arg(long, value_delimiter = ',')]
    prep: Option<Vec<String>>,
    /// A measurement chain as comma-separated axis names; repeatable.
    #[arg(long)]
    chain: Vec<String>,
    #[arg(long, value_enum)]
    sampler: Option<SamplerArg>,
    #[arg(long, value_enum)]
    ordering: Option<OrderingArg>,
    /// P-D instance for --model pd.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SamplerArg {
    FullPath,
    VisitCounts,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum OrderingArg {
    Shuffled,
    RoundRobin,
}

impl From<SamplerArg> for Sampler {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::FullPath => Sampler::FullPath,
            SamplerArg::VisitCounts => Sampler::VisitCounts,
        }
    }
}

impl From<OrderingArg> for PathOrdering {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::Shuffled => PathOrdering::Shuffled,
            OrderingArg::RoundRobin => PathOrdering::RoundRobin,
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, HarnessError> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = common.seed {
        config.seed = v;
    }
    if let Some(v) = common.trials {
        config.trials = v;
    }
    if let Some(v) = common.resolution {
        config.resolution = v;
    }
    if let Some(v) = &common.grid {
        config.grid = v.clone();
    }
    if let Some(v) = common.workers {
        config.workers = v;
    }
    if let Some(v) = &common.out {
        config.out = Some(v.clone());
    }
    if let Some(v) = common.z {
        config.z = v;
    }
    Ok(config)
}

/// Writes `name` under the output directory, or prints it when there is none.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<(), HarnessError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let mut config = load_config(&cli.common)?;
    let out = config.out.clone();
    let out = out.as_deref();
    match cli.command {
        Command::Simulate(args) => {
            if let Some(m) = args.model {
                config.model = m;
            }
            if let Some(p) = args.prep {
                config.preparations = p;
            }
            if !args.chain.is_empty() {
                config.chains = args
                    .chain
                    .iter()
                    .map(|c| c.split(',').map(|s| s.trim().to_string()).collect())
                    .collect();
            }
            if let Some(s) = args.sampler {
                config.sampler = s.into();
            }
            if let Some(o) = args.ordering {
                config.ordering = o.into();
            }
            if args.instance.is_some() {
                config.instance = args.instance;
            }
            let report = run_trials(&config)?;
            emit(out, "frequencies.csv", &report.to_csv()?)?;
            if out.is_some() {
                emit(out, "report.json", &report.to_json())?;
            }
            Ok(exit(report.passed()))
        }
        Command::Verify => {
            let report = run_suite(&config)?;
            let mut text = String::new();
            for c in &report.criteria {
                text.push_str(&c.line());
                text.push('\n');
                for d in &c.details {
                    text.push_str("    ");
                    text.push_str(d);
                    text.push('\n');
                }
            }
            text.push_str(if report.passed() {
                "verify: all criteria pass\n"
            } else {
                "verify: FAILED\n"
            });
            print!("{text}");
            if out.is_some() {
                emit(out, "verify.json", &report.to_json())?;
            }
            Ok(exit(report.passed()))
        }
        Command::DpTable => {
            emit(out, "dp_table.csv", &dp_table_csv()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PdValidate { instance } => {
            let instance = match instance {
                Some(path) => read_pd_instance(&path)?,
                None => builtin_minimal_instance(),
            };
            let report = instance.validate_rules()?;
            for v in &report.violations {
                println!(
                    "violation: {} on trajectory {} (start {}, measurement {}): {}",
                    v.clause, v.trajectory, v.start, v.measurement, v.detail
                );
            }
            for t in &report.unchecked {
                println!("unchecked: trajectory {t} starts at an untagged point");
            }
            println!("{} violation(s)", report.violations.len());
            if out.is_some() {
                let json =
                    serde_json::to_string_pretty(&report).expect("reports always serialize") + "\n";
                emit(out, "pd_validation.json", &json)?;
            }
            Ok(exit(report.is_valid()))
        }
        Command::PppClassify { preps } => {
            let file: PppFile = read_json(&preps)?;
            let input = file.resolve()?;
            let resolution = ontic_core::dd::Resolution::new(config.resolution)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let result = classify_ppp(&input, resolution.quantization_bound())?;
            let json =
                serde_json::to_string_pretty(&result).expect("reports always serialize") + "\n";
            emit(out, "ppp_classification.json", &json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace { prep, ordering } => {
            if let Some(o) = ordering {
                config.ordering = o.into();
            }
            config.preparations = vec![prep];
            let resolved = config.resolve()?;
            let dd = DdPreparation::new(
                resolved.preparations[0],
                &resolved.grid,
                resolved.resolution,
                config.ordering,
            )?;
            let path = dd.generate_path(&mut SeedStream::new(config.seed).rng(0));
            emit(out, "trace.json", &trace_json(&path))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
