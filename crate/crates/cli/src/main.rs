//! `xlsim`: run the cross-language similarity protocol from a config file.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use xlsim::methods::MethodId;

use commands::{FuseMode, TuneTarget, Workspace};
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "xlsim", version, about = "Cross-language textual similarity with word embeddings")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true, default_value = "xlsim.toml")]
    config: PathBuf,
    /// Comma-separated methods, e.g. CL-C3G,CL-WES
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Columns per distance-matrix row
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only run corpora of this granularity (chunk or sentence)
    #[arg(long, global = true)]
    granularity: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method on every corpus and write the report
    Evaluate,
    /// Tune CL-WESS POS weights or fusion weights on folds 0-1
    Tune {
        #[arg(long, value_enum)]
        target: TuneTarget,
        /// Tune on this corpus instead of the merge of all selected corpora
        #[arg(long)]
        corpus: Option<String>,
        /// Objective evaluations
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Fuse the selected methods and report the fused scores
    Fuse {
        #[arg(long, value_enum)]
        mode: FuseMode,
        /// Fusion weights file for weighted mode
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Write positive/negative score histograms of one method
    Histogram {
        #[arg(long)]
        method: String,
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Print the nearest neighbors of `lang:word`
    Neighbors {
        word: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Only list neighbors in this language
        #[arg(long)]
        lang: Option<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = Overrides {
        methods: cli.methods,
        m: cli.m,
        folds: cli.folds,
        seed: cli.seed,
        granularity: cli.granularity,
        out: cli.out,
    };
    if let Command::Histogram { method, .. } = &cli.command {
        overrides.methods = Some(vec![method.clone()]);
    }
    if matches!(cli.command, Command::Neighbors { .. }) {
        overrides.methods = Some(vec![MethodId::ClWes.name().to_string()]);
    }
    let mut config = RunConfig::load(&cli.config, overrides)?;
    if let Command::Tune { budget: Some(b), .. } = &cli.command {
        config.tune_budget = *b;
    }
    let always_space = matches!(cli.command, Command::Neighbors { .. });
    let mut ws = Workspace::load(config, always_space)?;

    let staging = match &cli.command {
        Command::Evaluate => commands::evaluate(&mut ws)?,
        Command::Tune { target, corpus, .. } => commands::tune(&mut ws, *target, corpus.as_deref())?,
        Command::Fuse { mode, weights } => commands::fuse(&mut ws, *mode, weights.as_deref())?,
        Command::Histogram { method, corpus, bins } => {
            let method: MethodId = method.parse()?;
            commands::histograms(&mut ws, method, corpus.as_deref(), *bins)?
        }
        Command::Neighbors { word, k, lang } => {
            print!("{}", commands::neighbors(&ws, word, *k, lang.as_deref())?);
            return Ok(());
        }
    };
    for path in staging.commit()? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
