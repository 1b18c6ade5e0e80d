use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cohcert::certify::{certify_suite, SuiteConfig};
use cohcert::games::{build_cmax_instrument, canonical_povm, simulate_game};
use cohcert::linalg::random_density_matrix;
use cohcert::oneshot::one_shot_distill_mio;
use cohcert::par::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn monte_carlo(c: &mut Criterion) {
    let rho = random_density_matrix(3, 3, 1).unwrap();
    let inst = build_cmax_instrument(&rho).unwrap();
    let povm = canonical_povm(3).unwrap();
    let mut g = c.benchmark_group("monte_carlo_200k");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_game(&inst, &povm, &rho, 200_000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn one_shot_scan(c: &mut Criterion) {
    let rho = random_density_matrix(2, 2, 3).unwrap();
    let mut g = c.benchmark_group("distill_scan_m8");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| one_shot_distill_mio(&rho, 0.05, 8, exec).unwrap())
        });
    }
    g.finish();
}

fn suite(c: &mut Criterion) {
    let cfg = SuiteConfig {
        trials: 10_000,
        m_max: 3,
        epsilons: vec![0.05],
        ..SuiteConfig::new(2, 4, 11)
    };
    let mut g = c.benchmark_group("certify_qubits_4");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| certify_suite(&cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, one_shot_scan, suite);
criterion_main!(benches);
