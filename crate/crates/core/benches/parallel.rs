use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use barrier_gp::covariance::{CovarianceSpec, SparseGpFactors};
use barrier_gp::dag::{build_reference_dag, order_reference, OrderStrategy};
use barrier_gp::par::{set_execution, Execution};
use barrier_gp::workbench::{square_grid, DEFAULT_FAULTS};
use barrier_gp::{geometry::Barrier, BarrierSet, Location};

fn faults() -> BarrierSet {
    BarrierSet::new(
        DEFAULT_FAULTS
            .iter()
            .map(|s| Barrier::Polyline {
                vertices: vec![Location::new(s[0], s[1]), Location::new(s[2], s[3])],
            })
            .collect(),
    )
    .unwrap()
}

fn bench(c: &mut Criterion) {
    let barriers = faults();
    // offset grid keeps points off the fault lines
    let locs: Vec<Location> = square_grid(0.013, 1.987, 45)
        .into_iter()
        .filter(|p| !barriers.point_in_barrier(p).unwrap())
        .collect();
    let spec = CovarianceSpec::matern(1.0, 4.0, 1.5);
    let mut group = c.benchmark_group("execution");
    group.sample_size(10);
    for (name, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        set_execution(mode);
        group.bench_with_input(BenchmarkId::new("dag_build", name), &locs, |b, locs| {
            b.iter(|| {
                let ord = order_reference(locs, OrderStrategy::ByY).unwrap();
                build_reference_dag(locs, ord, 15, &barriers).unwrap()
            })
        });
        let ord = order_reference(&locs, OrderStrategy::ByY).unwrap();
        let dag = build_reference_dag(&locs, ord, 15, &barriers).unwrap();
        group.bench_with_input(BenchmarkId::new("factors", name), &dag, |b, dag| {
            b.iter(|| SparseGpFactors::compute(dag, &spec).unwrap())
        });
    }
    set_execution(Execution::Parallel);
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
