//! `hgen`: generate synthetic hypergraph datasets, coarsen them, train the
//! denoiser, sample new hypergraphs and score them.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 algorithmic
//! failure (for example a coarsening that cannot make progress), 4 I/O.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hgen_core::datagen::DatasetKind;
use hgen_core::diffusion::Variant;

/// Input or configuration rejected before any work was done.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser, Debug)]
#[command(
    name = "hgen",
    version,
    about = "Hypergraph generation by coarsening and diffusion"
)]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Er,
    Sbm,
    Ego,
    Tree,
}

impl From<KindArg> for DatasetKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Er => DatasetKind::Er,
            KindArg::Sbm => DatasetKind::Sbm,
            KindArg::Ego => DatasetKind::Ego,
            KindArg::Tree => DatasetKind::Tree,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Deterministic,
    Free,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Deterministic => Variant::Deterministic,
            VariantArg::Free => Variant::Free,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the train, validation and test splits of a synthetic dataset.
    GenerateData {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump a random coarsening sequence of one graph, level by level.
    Coarsen {
        #[command(flatten)]
        common: Common,
        /// JSONL file of hypergraphs.
        #[arg(long)]
        input: PathBuf,
        /// Line of `input` to coarsen, counting from 0.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Output JSONL file, one line per level.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the denoiser and write a checkpoint and a loss log.
    Train {
        #[command(flatten)]
        common: Common,
        /// JSONL file of training hypergraphs.
        #[arg(long)]
        data: PathBuf,
        /// Continue from this checkpoint instead of a fresh initialization.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Output directory for `checkpoint.json` and `loss.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate hypergraphs with a trained checkpoint.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        n_target: Option<usize>,
        /// Cycle through the node counts of these graphs as targets.
        #[arg(long)]
        sizes_from: Option<PathBuf>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Output JSONL file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated hypergraphs against a test set.
    Eval {
        /// TOML run configuration; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gen: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Training set, needed for novelty.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Dataset family; selects the validity check (none for er).
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, value_enum, default_value = "json")]
        report: ReportFormat,
        /// Report file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use hgen_core::Error as E;
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io(_) => 4,
                E::CoarseningStuck { .. }
                | E::IterationCap { .. }
                | E::RetriesExhausted(_)
                | E::InconsistentStep(_)
                | E::IsolatedNode { .. } => 3,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Invalid("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    }
    match cli.command {
        Command::GenerateData { common, kind, out } => {
            commands::generate_data(&common, kind.map(Into::into), &out)
        }
        Command::Coarsen {
            common,
            input,
            index,
            out,
        } => commands::coarsen(&common, &input, index, &out),
        Command::Train {
            common,
            data,
            resume,
            out,
        } => commands::train(&common, &data, resume.as_deref(), &out),
        Command::Sample {
            common,
            checkpoint,
            count,
            n_target,
            sizes_from,
            variant,
            out,
        } => commands::sample(
            &common,
            &checkpoint,
            commands::SampleArgs {
                count,
                n_target,
                sizes_from,
                variant: variant.map(Into::into),
            },
            &out,
        ),
        Command::Eval {
            config,
            gen,
            test,
            train,
            kind,
            report,
            out,
        } => commands::eval(
            config.as_deref(),
            &gen,
            &test,
            train.as_deref(),
            kind.map(Into::into),
            report,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
