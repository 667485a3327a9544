use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hgen_bench::{connected, denoiser, rng};
use hgen_core::coarsen::{sample_coarsening_sequence, CoarseningParams};
use hgen_core::datagen::DatasetKind;
use hgen_core::diffusion::train::training_example;
use hgen_core::diffusion::{sample_deterministic, FeatureTriple, NoiseConfig, SampleConfig};
use hgen_core::eval::{evaluate, EvalConfig, Validator};
use hgen_core::laplacian::bipartite_normalized_laplacian;
use hgen_core::star_expansion;

fn spectra(c: &mut Criterion) {
    let b = star_expansion(&connected(DatasetKind::Ego, 1));
    c.bench_function("normalized laplacian eigenvalues, ego", |bench| {
        bench.iter(|| bipartite_normalized_laplacian(&b).unwrap().eigenvalues())
    });
}

fn coarsening(c: &mut Criterion) {
    let params = CoarseningParams::default();
    for kind in [DatasetKind::Tree, DatasetKind::Sbm] {
        let h = connected(kind, 2);
        c.bench_function(&format!("coarsening sequence, {}", kind.name()), |bench| {
            bench.iter_batched(
                || rng(3),
                |mut r| sample_coarsening_sequence(&h, &params, &mut r).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
}

fn loss_and_grad(c: &mut Criterion) {
    let h = connected(DatasetKind::Tree, 4);
    let model = denoiser(5);
    let mut r = rng(6);
    let seq = sample_coarsening_sequence(&h, &CoarseningParams::default(), &mut r).unwrap();
    let ex = training_example(&seq, 0, model.config.spectral_k, 1, 0.1, &mut r).unwrap();
    let eps = FeatureTriple::standard_normal(&ex.target, &mut r);
    c.bench_function("denoiser loss and gradient, 32-node tree", |bench| {
        bench.iter(|| {
            model
                .loss_and_grad(&ex.target, &eps, 1.0, &ex.context())
                .unwrap()
        })
    });
}

fn sampling(c: &mut Criterion) {
    let model = denoiser(7);
    let cfg = SampleConfig {
        spectral_k: model.config.spectral_k,
        noise: NoiseConfig {
            sampler_steps: 8,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    group.bench_function("deterministic, 32 nodes", |bench| {
        bench.iter_batched(
            || rng(8),
            |mut r| sample_deterministic(&model, 32, &cfg, &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let gen: Vec<_> = (0..40)
        .map(|s| connected(DatasetKind::Tree, 100 + s))
        .collect();
    let test: Vec<_> = (0..40)
        .map(|s| connected(DatasetKind::Tree, 200 + s))
        .collect();
    let cfg = EvalConfig::default();
    let mut group = c.benchmark_group("evaluation");
    group.sample_size(10);
    group.bench_function("full report, 40 vs 40 trees", |bench| {
        bench.iter(|| evaluate(&gen, &test, Some(&test), Some(Validator::Tree), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    spectra,
    coarsening,
    loss_and_grad,
    sampling,
    metrics
);
criterion_main!(benches);
