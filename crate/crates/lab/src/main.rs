use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fulfillment_lab::commands::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "fulfillment-lab", version)]
#[command(about = "Fulfillment of formulas in chains of finite partial structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Signature file (JSON)
    #[arg(long)]
    sig: Option<PathBuf>,
    /// Random seed for randomized suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; never changes the report
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for the JSON report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct ChainInput {
    /// Chain file (JSON array of structures or {"segments": [..]})
    #[arg(long, conflicts_with = "segments")]
    chain: Option<PathBuf>,
    /// Arithmetic segments as a comma list, e.g. 2,5,26
    #[arg(long)]
    segments: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide fulfillment of a formula in a chain and show the trace
    Fulfill {
        /// Formula text, @file, q1..q7 or no-greatest
        #[arg(long, required_unless_present = "random")]
        formula: Option<String>,
        #[command(flatten)]
        chain: ChainInput,
        /// Values of free variables, e.g. x=3,y=0
        #[arg(long)]
        assign: Option<String>,
        /// Run N seeded end-extension cases instead
        #[arg(long)]
        random: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check Q and the no-greatest-element sentence on a square-increasing chain
    Qcheck {
        #[arg(long)]
        segments: String,
        #[command(flatten)]
        common: Common,
    },
    /// Collapse a chain for a sentence and verify the result
    Collapse {
        #[arg(long, required_unless_present = "random")]
        formula: Option<String>,
        #[command(flatten)]
        chain: ChainInput,
        /// Run N seeded random instances instead
        #[arg(long)]
        random: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a sentence on every chain over a small universe
    Probe {
        #[arg(long)]
        formula: String,
        /// Chain length
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Universe size
        #[arg(long, default_value_t = 2)]
        universe: u64,
        /// Most chains examined
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compute a Paris-Harrington number by exhausting colorings
    Ph {
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// Most colorings examined
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Audit a chain coloring and search it for a homogeneous chain
    Bcp {
        /// Coloring arity
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Defaults to |L| + m
        #[arg(long)]
        k: Option<usize>,
        /// Unary formula phi(x); defaults to 0 < x
        #[arg(long)]
        formula: Option<String>,
        /// orders or segments
        #[arg(long, default_value = "orders")]
        family: String,
        /// Largest structure in the family
        #[arg(long)]
        universe: Option<u64>,
        /// Coloring table (JSON) instead of the witness comparison
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// Most search nodes
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Count structures and chains over a small universe
    Enumerate {
        /// Longest chain counted
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        universe: u64,
        /// Most structures or chains
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

fn config(command: Command) -> ExperimentConfig {
    let base = |name: &str, common: Common| ExperimentConfig {
        sig: common.sig,
        seed: common.seed,
        workers: common.workers,
        out: common.out,
        ..ExperimentConfig::new(name)
    };
    match command {
        Command::Fulfill { formula, chain, assign, random, common } => ExperimentConfig {
            formula,
            chain: chain.chain,
            segments: chain.segments,
            assign,
            random,
            ..base("fulfill", common)
        },
        Command::Qcheck { segments, common } => ExperimentConfig { segments: Some(segments), ..base("qcheck", common) },
        Command::Collapse { formula, chain, random, common } => ExperimentConfig {
            formula,
            chain: chain.chain,
            segments: chain.segments,
            random,
            ..base("collapse", common)
        },
        Command::Probe { formula, n, universe, cap, common } => ExperimentConfig {
            formula: Some(formula),
            n: Some(n),
            universe: Some(universe),
            cap,
            ..base("probe", common)
        },
        Command::Ph { e, k, r, cap, common } => {
            ExperimentConfig { e: Some(e), k: Some(k), r: Some(r), cap, ..base("ph", common) }
        }
        Command::Bcp { n, m, k, formula, family, universe, coloring, cap, common } => ExperimentConfig {
            n: Some(n),
            m: Some(m),
            k,
            formula,
            family: Some(family),
            universe,
            coloring,
            cap,
            ..base("bcp", common)
        },
        Command::Enumerate { n, universe, cap, common } => {
            ExperimentConfig { n: Some(n), universe: Some(universe), cap, ..base("enumerate", common) }
        }
    }
}

fn main() -> ExitCode {
    let cfg = config(Cli::parse().command);
    match commands::run(&cfg) {
        Ok(report) => {
            // a closed pipe only ends the listing early
            let mut out = std::io::stdout().lock();
            let _ = report.summary.iter().try_for_each(|line| writeln!(out, "{line}"));
            if let Some(dir) = &cfg.out {
                let _ = writeln!(out, "report: {}", dir.join(format!("{}.json", report.command)).display());
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("fulfillment-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
