use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use rmt_decoherence::dynamics::{EnsembleConfig, UNIT_TAU_H, generate_ensemble};
use rmt_decoherence::parallel::Workers;

fn ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    for n in [32, 64] {
        let cfg = EnsembleConfig::two_qubit_spectator(n, 0.03, 0.0, 32, 7);
        for (label, w) in [("sequential", Workers::SEQUENTIAL), ("parallel", Workers::ALL)] {
            g.bench_with_input(BenchmarkId::new(label, n), &cfg, |b, cfg| {
                b.iter(|| generate_ensemble(cfg, UNIT_TAU_H, w).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
