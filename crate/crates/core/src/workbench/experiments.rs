use std::fs::{self, File};
use std::io::{BufWriter, Write};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::simulate::{simulate, square_grid, SimulationSpec};
use crate::covariance::{CovarianceSpec, Family, SparseGpFactors};
use crate::dag::{build_reference_dag, order_reference, NeighborDag, OrderStrategy};
use crate::error::{Error, Result};
use crate::evaluation::{score_prediction, write_metric_rows, MetricReport, MetricRow};
use crate::geometry::predicates::{orient, within_closed};
use crate::geometry::{Barrier, BarrierSet, Location};
use crate::inference::{
    gibbs_fit, predict, starting_values, summarize, Dataset, InverseGamma, McmcChain, McmcConfig, ParamSummary,
    PredictConfig, PriorSpec, UniformBounds,
};
use crate::par;

/// True when `p` lies on a barrier edge (relevant for zero-width barriers).
pub fn on_barrier_edge(barriers: &BarrierSet, p: &Location) -> bool {
    barriers
        .edges()
        .iter()
        .any(|e| orient(&e.a, &e.b, p) == 0 && within_closed(&e.a, &e.b, p))
}

fn polylines(segments: &[[f64; 4]]) -> Result<BarrierSet> {
    BarrierSet::new(
        segments
            .iter()
            .map(|s| Barrier::Polyline {
                vertices: vec![Location::new(s[0], s[1]), Location::new(s[2], s[3])],
            })
            .collect(),
    )
}

/// Posterior summaries and held-out scores of one fitted model.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodFit {
    pub method: String,
    pub metrics: MetricReport,
    pub params: Vec<ParamSummary>,
    pub acceptance_rate: f64,
}

impl MethodFit {
    /// Posterior mean of the named parameter.
    pub fn mean_of(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.mean)
    }
}

/// Fit on `train` with neighbors ordered by `order`, predict `test` and score
/// against its responses.
#[allow(clippy::too_many_arguments)]
pub fn fit_and_score(
    method: &str,
    train: &Dataset,
    test: &Dataset,
    barriers: &BarrierSet,
    m: usize,
    order: OrderStrategy,
    priors: &PriorSpec,
    mcmc: &McmcConfig,
    stride: usize,
) -> Result<(MethodFit, McmcChain, NeighborDag)> {
    let ordering = order_reference(&train.locations, order)?;
    let dag = build_reference_dag(&train.locations, ordering, m, barriers)?;
    let (spec, _) = starting_values(train, priors);
    let chain = gibbs_fit(train, &dag, &spec, priors, mcmc)?;
    let pcfg = PredictConfig {
        stride,
        seed: mcmc.seed ^ 0x9e37_79b9_7f4a_7c15,
        ..PredictConfig::default()
    };
    let pred = predict(&chain, &dag, &test.locations, Some(&test.covariates), &pcfg)?;
    let metrics = score_prediction(&pred, &test.response)?;
    let fit = MethodFit {
        method: method.to_string(),
        metrics,
        params: summarize(&chain),
        acceptance_rate: chain.acceptance_rate,
    };
    Ok((fit, chain, dag))
}

/// Priors of the faults study.
pub fn faults_priors() -> PriorSpec {
    PriorSpec {
        tau2: InverseGamma { shape: 2.0, scale: 0.1 },
        sigma2: InverseGamma { shape: 2.0, scale: 1.0 },
        phi: UniformBounds {
            lower: 2.240,
            upper: 6.710,
        },
        nu: 1.5,
        family: Family::Matern,
    }
}

pub const FAULTS_GRID: usize = 67;
pub const FAULTS_TRUE_M: usize = 15;

/// Grid, training indices (every 6th column, every 2nd row) and the rest.
pub fn faults_layout() -> (Vec<Location>, Vec<usize>, Vec<usize>) {
    let grid = square_grid(0.0, 2.0, FAULTS_GRID);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, _) in grid.iter().enumerate() {
        let (ix, iy) = (i % FAULTS_GRID, i / FAULTS_GRID);
        if ix % 6 == 0 && iy % 2 == 0 {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    (grid, train, test)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultsReplicate {
    pub seed: u64,
    pub m: usize,
    pub bora: MethodFit,
    pub nngp: Option<MethodFit>,
}

/// One replicate of the faults study: simulate on the full grid, fit the
/// barrier-aware and barrier-blind models on the training grid and score
/// both on the remaining grid points.
pub fn faults_replicate(cfg: &ExperimentConfig, seed: u64, m: usize) -> Result<FaultsReplicate> {
    let barriers = polylines(&cfg.faults)?;
    let (grid, train_idx, test_idx) = faults_layout();
    let sim = SimulationSpec {
        spec: CovarianceSpec::matern(1.0, 4.0, 1.5),
        m: FAULTS_TRUE_M,
        order: OrderStrategy::ByY,
        beta: vec![1.0, 0.5],
        tau2: 0.1,
    };
    let full = simulate(&grid, &train_idx, &barriers, &sim, seed)?;
    let train = full.data.subset(&train_idx);
    let test = full.data.subset(&test_idx);
    let priors = faults_priors();
    let mcmc = cfg.mcmc(seed);
    let (bora, ..) = fit_and_score(
        "bora",
        &train,
        &test,
        &barriers,
        m,
        OrderStrategy::ByY,
        &priors,
        &mcmc,
        cfg.predict_stride,
    )?;
    let nngp = if cfg.fit_nngp {
        Some(
            fit_and_score(
                "nngp",
                &train,
                &test,
                &BarrierSet::empty(),
                m,
                OrderStrategy::ByY,
                &priors,
                &mcmc,
                cfg.predict_stride,
            )?
            .0,
        )
    } else {
        None
    };
    Ok(FaultsReplicate { seed, m, bora, nngp })
}

#[derive(Serialize)]
struct ParamRow<'a> {
    method: &'a str,
    replicate: usize,
    m: usize,
    parameter: &'a str,
    mean: f64,
    sd: f64,
    q025: f64,
    q975: f64,
    ess: f64,
}

/// Run every (seed, m) replicate and write `metrics.csv` and `params.csv`
/// to the output directory.
pub fn run_faults_experiment(cfg: &ExperimentConfig) -> Result<Vec<FaultsReplicate>> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64, usize)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| cfg.seeds.iter().enumerate().map(move |(r, &s)| (r + 1, s, m)))
        .collect();
    let reps = par::map_slice(&jobs, |&(_, seed, m)| faults_replicate(cfg, seed, m))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let n = faults_layout().1.len();
    let mut rows = Vec::new();
    let mut params = csv::Writer::from_writer(BufWriter::new(File::create(cfg.output_dir.join("params.csv"))?));
    for (&(r, _, _), rep) in jobs.iter().zip(&reps) {
        for fit in std::iter::once(&rep.bora).chain(rep.nngp.as_ref()) {
            rows.push(MetricRow::new(&fit.method, r, rep.m, n, &fit.metrics));
            for p in &fit.params {
                params.serialize(ParamRow {
                    method: &fit.method,
                    replicate: r,
                    m: rep.m,
                    parameter: &p.name,
                    mean: p.mean,
                    sd: p.sd,
                    q025: p.q025,
                    q975: p.q975,
                    ess: p.ess,
                })?;
            }
        }
    }
    params.flush()?;
    write_metric_rows(&rows, BufWriter::new(File::create(cfg.output_dir.join("metrics.csv"))?))?;
    Ok(reps)
}

/// Door segments on `y = 5` leaving a unit opening between `x = 4.5` and `x = 5.5`.
pub const DOORS: [[f64; 4]; 2] = [[1.9, 5.0, 4.5, 5.0], [5.5, 5.0, 8.1, 5.0]];
pub const DOORS_GRID: usize = 57;
pub const DOORS_M: usize = 10;
/// Probe points facing a closed door.
pub const DOOR_PROBES: [(f64, f64); 3] = [(3.5, 4.25), (6.5, 4.25), (3.0, 5.75)];

pub fn sliding_doors_barriers() -> BarrierSet {
    polylines(&DOORS).expect("door segments are valid")
}

/// Demo domain, graph and factors.
pub struct SlidingDoors {
    pub barriers: BarrierSet,
    /// Evaluation grid without points lying on a door.
    pub grid: Vec<Location>,
    pub dag: NeighborDag,
    pub factors: SparseGpFactors,
    pub spec: CovarianceSpec,
}

impl SlidingDoors {
    pub fn build() -> Result<Self> {
        let barriers = sliding_doors_barriers();
        let full = square_grid(2.0, 8.0, DOORS_GRID);
        let mut grid = Vec::new();
        let mut refs = Vec::new();
        for (i, p) in full.iter().enumerate() {
            if on_barrier_edge(&barriers, p) {
                continue;
            }
            grid.push(*p);
            if (i % DOORS_GRID) % 4 == 0 && (i / DOORS_GRID) % 4 == 0 {
                refs.push(*p);
            }
        }
        let spec = CovarianceSpec::exponential(1.0, 0.5);
        let ordering = order_reference(&refs, OrderStrategy::ByY)?;
        let dag = build_reference_dag(&refs, ordering, DOORS_M, &barriers)?;
        let factors = SparseGpFactors::compute(&dag, &spec)?;
        Ok(SlidingDoors {
            barriers,
            grid,
            dag,
            factors,
            spec,
        })
    }

    /// Induced covariance between two locations.
    pub fn cov(&self, a: &Location, b: &Location) -> Result<f64> {
        Ok(self.factors.covariance_field(&self.dag, a, std::slice::from_ref(b))?[0])
    }

    /// Stationary covariance at the same pair.
    pub fn stationary(&self, a: &Location, b: &Location) -> f64 {
        self.spec.kernel().cov(a.dist(b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldRow {
    pub probe: usize,
    pub x: f64,
    pub y: f64,
    pub nonstationary: f64,
    pub stationary: f64,
}

/// Covariance fields from each probe over the evaluation grid, written to
/// `covariance_field.csv` in `cfg.output_dir`.
pub fn run_sliding_doors_demo(cfg: &ExperimentConfig) -> Result<Vec<FieldRow>> {
    let demo = SlidingDoors::build()?;
    let mut rows = Vec::new();
    for (k, &(px, py)) in DOOR_PROBES.iter().enumerate() {
        let probe = Location::new(px, py);
        let field = demo.factors.covariance_field(&demo.dag, &probe, &demo.grid)?;
        for (t, c) in demo.grid.iter().zip(field) {
            rows.push(FieldRow {
                probe: k,
                x: t.x,
                y: t.y,
                nonstationary: c,
                stationary: demo.stationary(&probe, t),
            });
        }
    }
    fs::create_dir_all(&cfg.output_dir)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(cfg.output_dir.join("covariance_field.csv"))?));
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Curved coastline-like barrier: an arc of radius 6 about the origin.
pub fn arc_barrier() -> BarrierSet {
    let vertices = (0..=12)
        .map(|i| {
            let t = (10.0 + 70.0 * i as f64 / 12.0).to_radians();
            Location::new(6.0 * t.cos(), 6.0 * t.sin())
        })
        .collect();
    BarrierSet::new(vec![Barrier::Polyline { vertices }]).expect("arc is a valid polyline")
}

/// Held-out scores of an intercept-only fit under several reference orderings.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingRun {
    pub order: OrderStrategy,
    pub metrics: MetricReport,
}

/// Simulate behind [`arc_barrier`] on `[0, 10]^2` and fit the same training
/// data under x, y and sum orderings.
pub fn ordering_robustness(seed: u64, n_train: usize, n_test: usize, mcmc: &McmcConfig, stride: usize) -> Result<Vec<OrderingRun>> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Uniform};

    let barriers = arc_barrier();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(0.0, 10.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let locs: Vec<Location> = (0..n_train + n_test)
        .map(|_| Location::new(u.sample(&mut rng), u.sample(&mut rng)))
        .collect();
    let sim = SimulationSpec {
        spec: CovarianceSpec::matern(1.0, 0.5, 1.0),
        m: 10,
        order: OrderStrategy::ByY,
        beta: vec![0.0],
        tau2: 0.03,
    };
    let full = simulate(&locs, &(0..n_train).collect::<Vec<_>>(), &barriers, &sim, seed)?;
    let train = full.data.subset(&(0..n_train).collect::<Vec<_>>());
    let test = full.data.subset(&(n_train..n_train + n_test).collect::<Vec<_>>());
    let priors = PriorSpec {
        tau2: InverseGamma { shape: 2.0, scale: 0.03 },
        sigma2: InverseGamma { shape: 2.0, scale: 1.0 },
        phi: UniformBounds { lower: 0.1, upper: 2.0 },
        nu: 1.0,
        family: Family::Matern,
    };
    [OrderStrategy::ByX, OrderStrategy::ByY, OrderStrategy::BySum]
        .into_iter()
        .map(|order| {
            let (fit, ..) = fit_and_score("bora", &train, &test, &barriers, 10, order.clone(), &priors, mcmc, stride)?;
            Ok(OrderingRun {
                order,
                metrics: fit.metrics,
            })
        })
        .collect()
}

/// Write a short per-parameter report of a chain.
pub fn write_param_summary<W: Write>(chain: &McmcChain, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in summarize(chain) {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::config::DEFAULT_FAULTS;
    use super::*;

    #[test]
    fn faults_layout_sizes() {
        let (grid, train, test) = faults_layout();
        assert_eq!(grid.len(), 4489);
        assert_eq!(train.len(), 408);
        assert_eq!(test.len(), 4081);
        let b = polylines(&DEFAULT_FAULTS).unwrap();
        assert!(grid.iter().all(|p| !on_barrier_edge(&b, p)));
    }

    #[test]
    fn doors_reference_count() {
        let d = SlidingDoors::build().unwrap();
        assert_eq!(d.dag.len(), 213);
        // 24 grid points on each door
        assert_eq!(d.grid.len(), 57 * 57 - 48);
    }
}
