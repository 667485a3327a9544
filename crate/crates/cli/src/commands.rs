//! Subcommand bodies. Each one reads and checks every input first, computes in
//! memory, and only then touches the output paths.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hgen_core::coarsen::sample_coarsening_sequence;
use hgen_core::datagen::{make_dataset, node_count_summary, write_dataset, DatasetKind};
use hgen_core::diffusion::train::write_log_csv;
use hgen_core::diffusion::{sample_many, Checkpoint, Trainer, Variant};
use hgen_core::eval::{evaluate, Validator};
use hgen_core::io::{read_jsonl, write_jsonl};
use hgen_core::{Error, Hypergraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Common, Invalid, ReportFormat};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn read_graphs(path: &Path) -> anyhow::Result<Vec<Hypergraph>> {
    read_jsonl(path).with_context(|| format!("reading {}", path.display()))
}

/// Fails with a validation error if `path` names an existing directory.
fn check_file_target(path: &Path) -> anyhow::Result<()> {
    if path.is_dir() {
        return Err(invalid(format!("{} is a directory", path.display())));
    }
    Ok(())
}

fn check_dir_target(path: &Path) -> anyhow::Result<()> {
    if path.exists() && !path.is_dir() {
        return Err(invalid(format!(
            "{} exists and is not a directory",
            path.display()
        )));
    }
    Ok(())
}

fn create_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn generate_data(common: &Common, kind: Option<DatasetKind>, out: &Path) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    cfg.data.seed = common.seed;
    if let Some(k) = kind {
        cfg.data.kind = k;
    }
    cfg.data.validate()?;
    check_dir_target(out)?;

    let data = make_dataset(&cfg.data)?;
    let paths = write_dataset(out, cfg.data.kind, &data)?;
    for ((split, graphs), path) in data.splits().into_iter().zip(&paths) {
        let (mean, std) = node_count_summary(graphs);
        println!(
            "{split}: {} graphs, n_avg {mean:.2}, std {std:.2} -> {}",
            graphs.len(),
            path.display()
        );
    }
    println!("rejected draws: {}", data.rejected);
    Ok(())
}

#[derive(Serialize)]
struct LevelRecord<'a> {
    level: usize,
    n_left: usize,
    n_right: usize,
    connected: bool,
    /// Largest right cluster of the step that produced this level.
    max_right_cluster: Option<usize>,
    reduction_fraction: Option<f64>,
    graph: &'a hgen_core::BipartiteGraph,
}

pub fn coarsen(common: &Common, input: &Path, index: usize, out: &Path) -> anyhow::Result<()> {
    let cfg = RunConfig::load(common.config.as_deref())?;
    cfg.coarsen.validate()?;
    check_file_target(out)?;
    let graphs = read_graphs(input)?;
    let h = graphs.get(index).ok_or_else(|| {
        invalid(format!(
            "{} has {} graphs, no index {index}",
            input.display(),
            graphs.len()
        ))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let seq = match sample_coarsening_sequence(h, &cfg.coarsen, &mut rng) {
        Ok(seq) => seq,
        Err(e @ Error::CoarseningStuck { .. }) => {
            if let Error::CoarseningStuck { graph, .. } = &e {
                eprintln!("stuck graph: {graph}");
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };

    let mut text = String::new();
    for (level, g) in seq.graphs.iter().enumerate() {
        let step = level.checked_sub(1);
        let rec = LevelRecord {
            level,
            n_left: g.n_left(),
            n_right: g.n_right(),
            connected: g.is_connected(),
            max_right_cluster: step.map(|s| seq.steps[s].max_right_cluster()),
            reduction_fraction: step.map(|s| seq.reduction_fractions[s]),
            graph: g,
        };
        text.push_str(&serde_json::to_string(&rec)?);
        text.push('\n');
    }
    create_parent(out)?;
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;

    let bound = 2 * cfg.coarsen.length_bound(h.num_nodes());
    println!(
        "levels: {} (steps {}, bound {bound})",
        seq.graphs.len(),
        seq.len()
    );
    println!("max right cluster: {}", seq.max_right_cluster());
    for (level, g) in seq.graphs.iter().enumerate() {
        println!(
            "level {level}: {} x {}, connected {}",
            g.n_left(),
            g.n_right(),
            g.is_connected()
        );
    }
    Ok(())
}

pub fn train(
    common: &Common,
    data: &Path,
    resume: Option<&Path>,
    out: &Path,
) -> anyhow::Result<()> {
    let cfg = RunConfig::load(common.config.as_deref())?;
    let train_cfg = cfg.train_config(common.seed);
    train_cfg.validate()?;
    check_dir_target(out)?;
    let graphs = read_graphs(data)?;

    let start = std::time::Instant::now();
    let mut trainer = match resume {
        None => Trainer::new(&graphs, train_cfg)?,
        Some(path) => {
            let mut ck = Checkpoint::load(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            if cfg.train.steps < ck.step {
                return Err(invalid(format!(
                    "checkpoint has {} steps, more than the configured {}",
                    ck.step, cfg.train.steps
                )));
            }
            ck.config.steps = cfg.train.steps;
            Trainer::resume(&graphs, &ck)?
        }
    };
    let initial = trainer.eval_loss()?;
    let mut log = Vec::new();
    while trainer.steps_taken() < cfg.train.steps {
        log.extend(trainer.step()?);
    }
    let fin = trainer.eval_loss()?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let ck_path = out.join("checkpoint.json");
    trainer.checkpoint().save(&ck_path)?;
    write_log_csv(out.join("loss.csv"), &log)?;
    println!("steps: {}", trainer.steps_taken());
    println!("eval loss: {initial:.6} -> {fin:.6}");
    println!("elapsed: {:.1}s", start.elapsed().as_secs_f64());
    println!("checkpoint: {}", ck_path.display());
    Ok(())
}

pub struct SampleArgs {
    pub count: Option<usize>,
    pub n_target: Option<usize>,
    pub sizes_from: Option<PathBuf>,
    pub variant: Option<Variant>,
}

pub fn sample(
    common: &Common,
    checkpoint: &Path,
    args: SampleArgs,
    out: &Path,
) -> anyhow::Result<()> {
    let cfg = RunConfig::load(common.config.as_deref())?;
    check_file_target(out)?;
    let ck = Checkpoint::load(checkpoint)
        .with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let model = ck.model()?;
    let count = args.count.unwrap_or(cfg.sample.count);
    let variant = args.variant.unwrap_or(cfg.sample.variant);

    if args.n_target.is_some() && args.sizes_from.is_some() {
        return Err(invalid("give either --n-target or --sizes-from, not both"));
    }
    let targets: Vec<usize> = match (&args.sizes_from, args.n_target.or(cfg.sample.n_target)) {
        (Some(path), _) => {
            let sizes: Vec<usize> = read_graphs(path)?
                .iter()
                .map(Hypergraph::num_nodes)
                .collect();
            if sizes.is_empty() && count > 0 {
                return Err(invalid(format!("{} holds no graphs", path.display())));
            }
            (0..count).map(|i| sizes[i % sizes.len()]).collect()
        }
        (None, Some(n)) => vec![n; count],
        (None, None) => {
            return Err(invalid(
                "a target size is needed: --n-target, --sizes-from or sample.n_target",
            ));
        }
    };
    if let Some(i) = targets.iter().position(|&n| n == 0) {
        return Err(invalid(format!("target size of sample {i} is zero")));
    }

    let sc = cfg.sample_config(&ck.config.model, ck.config.noise);
    let outcomes = sample_many(&model, &targets, &sc, variant, common.seed)
        .into_iter()
        .collect::<hgen_core::Result<Vec<_>>>()?;

    let graphs: Vec<&Hypergraph> = outcomes.iter().map(|o| &o.hypergraph).collect();
    create_parent(out)?;
    write_jsonl(out, graphs.iter().copied())?;

    let hit = outcomes
        .iter()
        .zip(&targets)
        .filter(|(o, &n)| o.bipartite.n_left() == n)
        .count();
    println!("samples: {}", outcomes.len());
    println!(
        "left nodes equal to target before cleanup: {hit}/{}",
        outcomes.len()
    );
    if !outcomes.is_empty() {
        let cleaned: Vec<Hypergraph> = outcomes.iter().map(|o| o.hypergraph.clone()).collect();
        let (mean, std) = node_count_summary(&cleaned);
        println!("nodes after cleanup: mean {mean:.2}, std {std:.2}");
    }
    Ok(())
}

pub fn eval(
    config: Option<&Path>,
    gen: &Path,
    test: &Path,
    train: Option<&Path>,
    kind: Option<DatasetKind>,
    format: ReportFormat,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let cfg = RunConfig::load(config)?;
    if let Some(path) = out {
        check_file_target(path)?;
    }
    let validator = match kind {
        Some(DatasetKind::Er) => None,
        Some(DatasetKind::Sbm) => Some(Validator::Sbm),
        Some(DatasetKind::Ego) => Some(Validator::Ego),
        Some(DatasetKind::Tree) => Some(Validator::Tree),
        None => cfg.eval.validator,
    };
    let gen = read_graphs(gen)?;
    let test = read_graphs(test)?;
    let train = train.map(read_graphs).transpose()?;
    let report = evaluate(
        &gen,
        &test,
        train.as_deref(),
        validator,
        &cfg.eval.metrics(),
    )?;

    let text = match format {
        ReportFormat::Json => report.to_json() + "\n",
        ReportFormat::Csv => report.to_csv(),
    };
    match out {
        Some(path) => {
            create_parent(path)?;
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", report.to_csv());
        }
        None => print!("{text}"),
    }
    Ok(())
}
