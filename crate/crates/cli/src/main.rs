//! `pathsample`: generation, simulation, verification and benchmarking from the command line.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathsample_core::algorithms::PathLength;
use pathsample_core::commands::{
    cmd_bench, cmd_find_cutset, cmd_find_path, cmd_flow, cmd_generate, cmd_resistance, cmd_sample_edge, cmd_verify,
    BenchAlgorithm, PathMode, Report,
};
use pathsample_core::families::generate;
use pathsample_core::graph::GraphJson;
use pathsample_core::verify::VerifyOptions;
use pathsample_core::{Config, Error};

#[derive(Parser, Debug)]
#[command(name = "pathsample", version, about = "Span-program path-edge sampling with query accounting")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a constant (c_minus, c_pd, c_we, c_iqae, expander_gap, inject_failures).
    #[arg(long = "override", value_name = "NAME=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Graph JSON file.
    #[arg(long, group = "src")]
    graph: Option<PathBuf>,
    /// Family name (path, parallel_paths, clutter, lower_bound, expander_bridge, series_parallel).
    #[arg(long, group = "src")]
    family: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    #[command(flatten)]
    source: Source,
    /// Family parameters.
    #[arg(long, value_name = "K=V", num_args = 1.., requires = "family")]
    params: Vec<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Single,
    General,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Length {
    Trusted,
    Estimated,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Algorithm {
    SampleEdge,
    SinglePath,
    GeneralPath,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal flow, resistance and distribution of G(x).
    Flow(GraphArgs),
    /// Effective resistance between s and t.
    Resistance(GraphArgs),
    /// Batch of edge samples with the empirical distribution and ledger statistics.
    SampleEdge {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Single or general path finding.
    FindPath {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        /// Source of the path length used by the single-path midpoint test.
        #[arg(long, value_enum, default_value_t = Length::Trusted)]
        length: Length,
        #[arg(long)]
        seed: u64,
    },
    /// Cut-set finding under resistance and flow promises.
    FindCutset {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        r_bound: f64,
        #[arg(long)]
        g_bound: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Oracle-equivalence suites over the small-graph corpus.
    Verify {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long, default_value_t = 7)]
        spectral_max_n: usize,
        #[arg(long, default_value_t = 100)]
        spectral_samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Median ledgers over a size grid with the fitted log-log slope.
    Bench {
        #[arg(long)]
        family: String,
        #[arg(long, value_name = "K=V", num_args = 1..)]
        params: Vec<String>,
        #[arg(long, default_value = "L")]
        size_param: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Algorithm::SampleEdge)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Emit a family instance with its truth block.
    Generate {
        #[arg(long)]
        family: String,
        #[arg(long, value_name = "K=V", num_args = 1..)]
        params: Vec<String>,
    },
}

fn parse_kv(items: &[String]) -> Result<BTreeMap<String, String>, Error> {
    items
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::InvalidParameter(format!("expected K=V, got {kv:?}")))
        })
        .collect()
}

fn load(args: &GraphArgs, config: &Config) -> Result<GraphJson, Error> {
    if let Some(path) = &args.source.graph {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())));
    }
    let name = args.source.family.as_deref().expect("clap enforces a source");
    Ok(generate(name, &parse_kv(&args.params)?, config.expander_gap)?.to_json().graph)
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let mut config = Config::default();
    for o in &cli.overrides {
        let (k, v) =
            o.split_once('=').ok_or_else(|| Error::InvalidParameter(format!("expected NAME=VALUE, got {o:?}")))?;
        config.set(k.trim(), v.trim())?;
    }
    match &cli.command {
        Command::Flow(g) => cmd_flow(&load(g, &config)?),
        Command::Resistance(g) => cmd_resistance(&load(g, &config)?),
        Command::SampleEdge { g, p, trials, seed } => cmd_sample_edge(&load(g, &config)?, *p, *trials, *seed, &config),
        Command::FindPath { g, mode, p, length, seed } => {
            let mode = match mode {
                Mode::Single => PathMode::Single,
                Mode::General => PathMode::General,
            };
            let length = match length {
                Length::Trusted => PathLength::Trusted,
                Length::Estimated => PathLength::Estimated,
            };
            cmd_find_path(&load(g, &config)?, mode, *p, length, *seed, &config)
        }
        Command::FindCutset { g, r_bound, g_bound, seed } => {
            cmd_find_cutset(&load(g, &config)?, *r_bound, *g_bound, *seed, &config)
        }
        Command::Verify { max_n, spectral_max_n, spectral_samples, seed } => {
            let opts = VerifyOptions {
                max_n: *max_n,
                spectral_max_n: *spectral_max_n,
                spectral_samples: *spectral_samples,
                seed: *seed,
                ..VerifyOptions::default()
            };
            cmd_verify(&opts, &config)
        }
        Command::Bench { family, params, size_param, sizes, algorithm, p, trials, seed } => {
            let algorithm = match algorithm {
                Algorithm::SampleEdge => BenchAlgorithm::SampleEdge,
                Algorithm::SinglePath => BenchAlgorithm::SinglePath,
                Algorithm::GeneralPath => BenchAlgorithm::GeneralPath,
            };
            cmd_bench(family, &parse_kv(params)?, size_param, sizes, algorithm, *p, *trials, *seed, &config)
        }
        Command::Generate { family, params } => cmd_generate(family, &parse_kv(params)?, &config),
    }
}

fn error_json(e: &Error) -> String {
    serde_json::json!({ "kind": "error", "message": e.to_string() }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return ExitCode::from(1);
        }
    };
    let text = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("{}", error_json(&Error::Parse(format!("{}: {e}", path.display()))));
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
