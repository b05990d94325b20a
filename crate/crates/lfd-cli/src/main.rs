use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lfd_cli::commands::{
    self, CheckWhat, CmdOutput, LemmaArg, ModelArg,
};
use lfd_core::lattice::MapFormat;
use lfd_core::solve::StrategyKind;

/// Exact policy inference from discrete demonstrations: solvers, hardness
/// instance generators and intractability maps.
#[derive(Parser)]
#[command(name = "lfd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file; exits 0 with a policy or 1 with bottom.
    Solve {
        /// Instance document (JSON).
        input: PathBuf,
        #[arg(long, value_enum, default_value = "backtracking")]
        strategy: StrategyArg,
        /// Search for the smallest transition budget instead of using the
        /// instance's t.
        #[arg(long)]
        minimize_t: bool,
        /// Cap for the --minimize-t search.
        #[arg(long, requires = "minimize_t")]
        t_max: Option<usize>,
        /// Draw triggers only from features occurring in the demonstrations.
        #[arg(long)]
        restrict_features: bool,
        /// Parallel workers (default: available cores). The result does not
        /// depend on this.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run one of the decidable predicates on the entities in a document;
    /// exits 0 for true, 1 for false.
    Check {
        /// Document with the entities the predicate needs.
        input: PathBuf,
        #[arg(long, value_enum)]
        what: WhatArg,
    },
    /// Build a hard inference instance from a graph; solvable iff the graph
    /// has a dominating set of size at most k.
    Reduce {
        /// Graph document (JSON: {"n": .., "edges": [[u,v], ..]}).
        graph: PathBuf,
        #[arg(long, value_enum)]
        lemma: LemmaCliArg,
        #[arg(long)]
        k: usize,
        /// Seed for the randomly selected seed-policy vertices
        /// (default: LFD_SEED or 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a graph deterministically from a seed.
    Gen {
        #[arg(long, value_enum)]
        model: ModelCliArg,
        /// Vertex count (gnp).
        #[arg(long)]
        n: Option<usize>,
        /// Edge probability (gnp).
        #[arg(long)]
        edge_prob: Option<f64>,
        /// Grid rows (grid3).
        #[arg(long)]
        rows: Option<usize>,
        /// Grid columns (grid3).
        #[arg(long)]
        cols: Option<usize>,
        /// Edge keep probability (grid3).
        #[arg(long)]
        keep_prob: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Close a raw-results file over its parameter universe and render the
    /// map; exits 3 with a report when the results conflict.
    Map {
        /// Raw-results document (JSON).
        results: PathBuf,
        /// Comma-separated row parameters (default: first half of the
        /// universe).
        #[arg(long)]
        rows: Option<String>,
        /// Comma-separated column parameters (default: rest of the universe).
        #[arg(long)]
        cols: Option<String>,
        #[arg(long, value_enum, default_value = "md")]
        format: FormatArg,
    },
    /// Report what the map says about a concrete instance under "small
    /// parameter" thresholds.
    Advise {
        /// Instance document (JSON).
        instance: PathBuf,
        /// Raw-results document (JSON).
        results: PathBuf,
        /// Comma-separated thresholds, e.g. "F=5,A=5".
        #[arg(long)]
        thresholds: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Reference,
    Backtracking,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Validity,
    Consistency,
    PolicyConsistency,
    Derivability,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaCliArg {
    Bat,
    InchistPos,
    InchistNeg,
    IncnohistPos,
    IncnohistNeg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelCliArg {
    Gnp,
    Grid3,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Md,
    Csv,
    Json,
}

fn run(cli: Cli) -> anyhow::Result<CmdOutput> {
    match cli.command {
        Command::Solve {
            input,
            strategy,
            minimize_t,
            t_max,
            restrict_features,
            jobs,
        } => commands::cmd_solve(
            &input,
            match strategy {
                StrategyArg::Reference => StrategyKind::ReferenceEnumeration,
                StrategyArg::Backtracking => StrategyKind::Backtracking,
            },
            minimize_t,
            restrict_features,
            jobs,
            t_max,
        ),
        Command::Check { input, what } => commands::cmd_check(
            &input,
            match what {
                WhatArg::Validity => CheckWhat::Validity,
                WhatArg::Consistency => CheckWhat::Consistency,
                WhatArg::PolicyConsistency => CheckWhat::PolicyConsistency,
                WhatArg::Derivability => CheckWhat::Derivability,
            },
        ),
        Command::Reduce {
            graph,
            lemma,
            k,
            seed,
        } => commands::cmd_reduce(
            &graph,
            match lemma {
                LemmaCliArg::Bat => LemmaArg::Bat,
                LemmaCliArg::InchistPos => LemmaArg::IncHistPos,
                LemmaCliArg::InchistNeg => LemmaArg::IncHistNeg,
                LemmaCliArg::IncnohistPos => LemmaArg::IncNoHistPos,
                LemmaCliArg::IncnohistNeg => LemmaArg::IncNoHistNeg,
            },
            k,
            seed,
        ),
        Command::Gen {
            model,
            n,
            edge_prob,
            rows,
            cols,
            keep_prob,
            seed,
        } => {
            let model = match model {
                ModelCliArg::Gnp => ModelArg::Gnp {
                    n: n.ok_or_else(|| anyhow::anyhow!("--n is required for gnp"))?,
                    edge_prob: edge_prob
                        .ok_or_else(|| anyhow::anyhow!("--edge-prob is required for gnp"))?,
                },
                ModelCliArg::Grid3 => ModelArg::Grid3 {
                    rows: rows.ok_or_else(|| anyhow::anyhow!("--rows is required for grid3"))?,
                    cols: cols.ok_or_else(|| anyhow::anyhow!("--cols is required for grid3"))?,
                    keep_prob: keep_prob
                        .ok_or_else(|| anyhow::anyhow!("--keep-prob is required for grid3"))?,
                },
            };
            commands::cmd_gen(model, seed)
        }
        Command::Map {
            results,
            rows,
            cols,
            format,
        } => commands::cmd_map(
            &results,
            rows.as_deref(),
            cols.as_deref(),
            match format {
                FormatArg::Md => MapFormat::Markdown,
                FormatArg::Csv => MapFormat::Csv,
                FormatArg::Json => MapFormat::Json,
            },
        ),
        Command::Advise {
            instance,
            results,
            thresholds,
        } => commands::cmd_advise(&instance, &results, &thresholds),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            print!("{}", output.stdout);
            ExitCode::from(output.exit as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
