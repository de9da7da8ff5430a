//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line in plain `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use barrier_gp::covariance::{base_cov, CovarianceSpec, Family, SparseGpFactors};
use barrier_gp::dag::{build_reference_dag, order_reference, NeighborDag, OrderStrategy, Provenance};
use barrier_gp::evaluation::score;
use barrier_gp::geometry::Barrier;
use barrier_gp::inference::stats::{ess, sd};
use barrier_gp::inference::{
    gibbs_fit, Dataset, FixedParams, InverseGamma, McmcChain, McmcConfig, PriorSpec, UniformBounds,
};
use barrier_gp::workbench::{
    ordering_robustness, run_faults_experiment, ExperimentConfig, SlidingDoors, DOOR_PROBES,
};
use barrier_gp::{BarrierSet, Location};
use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "faults parameter recovery", faults_recovery),
        (2, "faults predictive ordering", faults_prediction),
        (3, "nearest-neighbor reduction", nngp_reduction),
        (4, "exact conditioning identity", exact_conditioning),
        (5, "precision positive definite", positive_definite),
        (6, "segment blocking vs exact predicate", geometry_oracle),
        (7, "gibbs posterior vs closed form", mcmc_oracle),
        (8, "sliding doors nonstationarity", sliding_doors),
        (9, "matern accuracy", matern_accuracy),
        (10, "metric arithmetic", metric_arithmetic),
        (11, "ordering robustness", ordering),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance {id:>2} {tag} {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance failures: {failed:?}");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- faults

struct FaultsSummary {
    beta1: f64,
    tau2: f64,
    micro: f64,
    bora_rmspe: f64,
    nngp_rmspe: f64,
    bora_coverage: f64,
}

fn faults_summary() -> &'static FaultsSummary {
    static CELL: std::sync::OnceLock<FaultsSummary> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            output_dir: dir.path().to_path_buf(),
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.iterations - cfg.burn_in, 15_000);
        let reps = run_faults_experiment(&cfg).unwrap();
        assert_eq!(reps.len(), 5);
        let avg = |f: &dyn Fn(&barrier_gp::workbench::FaultsReplicate) -> f64| {
            reps.iter().map(f).sum::<f64>() / reps.len() as f64
        };
        FaultsSummary {
            beta1: avg(&|r| r.bora.mean_of("beta1").unwrap()),
            tau2: avg(&|r| r.bora.mean_of("tau2").unwrap()),
            micro: avg(&|r| r.bora.mean_of("sigma2_phi_2nu").unwrap()),
            bora_rmspe: avg(&|r| r.bora.metrics.rmspe),
            nngp_rmspe: avg(&|r| r.nngp.as_ref().unwrap().metrics.rmspe),
            bora_coverage: avg(&|r| r.bora.metrics.coverage),
        }
    })
}

fn faults_recovery() -> Outcome {
    let s = faults_summary();
    let pass = (s.beta1 - 0.5).abs() <= 0.05 && (s.tau2 - 0.1).abs() <= 0.03 && (30.0..=98.0).contains(&s.micro);
    outcome(
        pass,
        format!(
            "beta1 {:.4} (|.-0.5|<=0.05), tau2 {:.4} (|.-0.1|<=0.03), sigma2*phi^3 {:.2} (in [30, 98])",
            s.beta1, s.tau2, s.micro
        ),
    )
}

fn faults_prediction() -> Outcome {
    let s = faults_summary();
    let pass = s.bora_rmspe < s.nngp_rmspe
        && (0.34..=0.40).contains(&s.bora_rmspe)
        && (0.90..=0.98).contains(&s.bora_coverage);
    outcome(
        pass,
        format!(
            "rmspe bora {:.4} vs nngp {:.4}, bora rmspe in [0.34, 0.40], bora coverage {:.4} in [0.90, 0.98]",
            s.bora_rmspe, s.nngp_rmspe, s.bora_coverage
        ),
    )
}

// ------------------------------------------------------ test-side kernels

fn matern_closed(sigma2: f64, phi: f64, nu: f64, d: f64) -> f64 {
    let x = phi * d;
    let r = if nu == 0.5 {
        (-x).exp()
    } else if nu == 1.5 {
        (1.0 + x) * (-x).exp()
    } else {
        unreachable!()
    };
    sigma2 * r
}

fn random_order(k: usize, rng: &mut ChaCha8Rng) -> OrderStrategy {
    match rng.random_range(0..5) {
        0 => OrderStrategy::ByX,
        1 => OrderStrategy::ByY,
        2 => OrderStrategy::BySum,
        3 => OrderStrategy::ByProductDesc,
        _ => {
            let mut p: Vec<usize> = (0..k).collect();
            p.shuffle(rng);
            OrderStrategy::Explicit(p)
        }
    }
}

/// `(I - A)^{-1} F (I - A)^{-T}` from dense local solves of the nearest-neighbor process.
fn dense_dag_cov(dag: &NeighborDag, kern: &dyn Fn(f64) -> f64) -> DMatrix<f64> {
    let k = dag.len();
    let refs = dag.refs();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut f = vec![0.0; k];
    for i in 0..k {
        let nb = dag.neighbor_indices(i);
        let c0 = kern(0.0);
        if nb.is_empty() {
            f[i] = c0;
            continue;
        }
        let g = DMatrix::from_fn(nb.len(), nb.len(), |r, c| kern(refs[nb[r]].dist(&refs[nb[c]])));
        let cv = DVector::from_fn(nb.len(), |r, _| kern(refs[i].dist(&refs[nb[r]])));
        let w = g.lu().solve(&cv).unwrap();
        f[i] = c0 - cv.dot(&w);
        for (r, &j) in nb.iter().enumerate() {
            a[(i, j)] = w[r];
        }
    }
    // L = (I - A)^{-1} by forward substitution, column by column
    let mut l = DMatrix::<f64>::zeros(k, k);
    for c in 0..k {
        for i in c..k {
            let mut v = if i == c { 1.0 } else { 0.0 };
            for j in c..i {
                v += a[(i, j)] * l[(j, c)];
            }
            l[(i, c)] = v;
        }
    }
    let fl = DMatrix::from_fn(k, k, |i, j| f[i] * l[(j, i)]);
    &l * fl
}

// --------------------------------------------------------- criterion 3

/// Uniform points on the unit square, none closer than `0.3 / sqrt(k)` to another.
fn hard_core(k: usize, rng: &mut ChaCha8Rng) -> Vec<Location> {
    let r2 = 0.09 / k as f64;
    let mut out: Vec<Location> = Vec::with_capacity(k);
    while out.len() < k {
        let p = Location::new(rng.random(), rng.random());
        if out.iter().all(|q| q.dist2(&p) >= r2) {
            out.push(p);
        }
    }
    out
}

fn nngp_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut set_mismatch = 0;
    let mut max_err: f64 = 0.0;
    let mut max_k = 0;
    for _ in 0..100 {
        let m = [5, 10, 15][rng.random_range(0..3)];
        let k = rng.random_range(m + 2..=500);
        max_k = max_k.max(k);
        let locs = hard_core(k, &mut rng);
        let order = random_order(k, &mut rng);
        let (sigma2, phi, nu) = if rng.random_bool(0.5) {
            (rng.random_range(0.5..2.0), rng.random_range(2.0..12.0), 0.5)
        } else {
            (rng.random_range(0.5..2.0), rng.random_range(4.0..12.0), 1.5)
        };
        let spec = if nu == 0.5 {
            CovarianceSpec::exponential(sigma2, phi)
        } else {
            CovarianceSpec::matern(sigma2, phi, nu)
        };
        let ordering = order_reference(&locs, order).unwrap();
        let dag = build_reference_dag(&locs, ordering, m, &BarrierSet::empty()).unwrap();
        let refs = dag.refs();
        for i in 0..k {
            let mut brute: Vec<usize> = (0..i).collect();
            brute.sort_by(|&a, &b| refs[i].dist2(&refs[a]).total_cmp(&refs[i].dist2(&refs[b])));
            brute.truncate(m);
            brute.sort_unstable();
            let mut got = dag.neighbor_indices(i);
            got.sort_unstable();
            if got != brute {
                set_mismatch += 1;
            }
        }
        let f = SparseGpFactors::compute(&dag, &spec).unwrap();
        let oracle = dense_dag_cov(&dag, &|d| matern_closed(sigma2, phi, nu, d));
        let mut e: f64 = 0.0;
        for j in 0..k {
            let col = f.cov_column(j);
            for i in 0..k {
                e = e.max((col[i] - oracle[(i, j)]).abs());
            }
        }
        max_err = max_err.max(e);
    }
    outcome(
        set_mismatch == 0 && max_err <= 1e-12,
        format!("100 configs (k up to {max_k}): {set_mismatch} neighbor-set mismatches, max |C~ - oracle| {max_err:.2e} (<= 1e-12)"),
    )
}

// --------------------------------------------------------- criterion 4

fn exact_conditioning() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = 20;
    let locs: Vec<Location> = (0..k).map(|_| Location::new(rng.random(), rng.random())).collect();
    let spec = CovarianceSpec::matern(2.0, 3.0, 1.5);
    let ordering = order_reference(&locs, OrderStrategy::BySum).unwrap();
    let dag = build_reference_dag(&locs, ordering, k - 1, &BarrierSet::empty()).unwrap();
    let f = SparseGpFactors::compute(&dag, &spec).unwrap();
    let q = f.precision().to_dense();
    let q = DMatrix::from_fn(k, k, |i, j| q[i][j]);
    let c_tilde = q.try_inverse().unwrap();
    let refs = dag.refs();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let c = matern_closed(2.0, 3.0, 1.5, refs[i].dist(&refs[j]));
            worst = worst.max((c_tilde[(i, j)] - c).abs() / c.abs());
        }
    }
    outcome(worst <= 1e-8, format!("k=20, m=19: max relative error {worst:.2e} (<= 1e-8)"))
}

// --------------------------------------------------------- criterion 5

fn cup(rng: &mut ChaCha8Rng) -> (Barrier, Vec<Location>) {
    let x0 = rng.random_range(2.0..6.0);
    let y0 = rng.random_range(1.0..7.0);
    let w = rng.random_range(1.0..2.5);
    let h = rng.random_range(1.0..2.0);
    let vertices = vec![
        Location::new(x0 + w, y0),
        Location::new(x0, y0),
        Location::new(x0, y0 + h),
        Location::new(x0 + w, y0 + h),
    ];
    // one point near the back wall: every earlier node in x order is behind a wall
    let inner = vec![Location::new(x0 + 0.05 * w, y0 + 0.5 * h)];
    (Barrier::Polyline { vertices }, inner)
}

fn random_barrier(rng: &mut ChaCha8Rng) -> Barrier {
    let x = rng.random_range(0.5..8.0);
    let y = rng.random_range(0.5..8.0);
    let w = rng.random_range(0.3..2.0);
    let h = rng.random_range(0.3..2.0);
    match rng.random_range(0..3) {
        0 => Barrier::Polygon {
            rings: vec![vec![
                Location::new(x, y),
                Location::new(x + w, y),
                Location::new(x + w, y + h),
                Location::new(x, y + h),
                Location::new(x, y),
            ]],
        },
        1 => Barrier::Polygon {
            rings: vec![vec![
                Location::new(x, y),
                Location::new(x + w, y),
                Location::new(x + 0.5 * w, y + h),
                Location::new(x, y),
            ]],
        },
        _ => Barrier::Polyline {
            vertices: vec![Location::new(x, y), Location::new(x + w, y + h), Location::new(x + 2.0 * w, y)],
        },
    }
}

fn positive_definite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = 0;
    let mut fails = Vec::new();
    let mut regenerated = 0;
    let mut escape_configs = 0;
    let mut escape_nodes = 0;
    let mut config = 0;
    while config < 100 {
        let with_cup = config % 3 == 0;
        let mut barriers: Vec<Barrier> = (0..rng.random_range(1..=3)).map(|_| random_barrier(&mut rng)).collect();
        let mut extra = Vec::new();
        if with_cup {
            let (c, inner) = cup(&mut rng);
            barriers.push(c);
            extra = inner;
        }
        let set = BarrierSet::new(barriers).unwrap();
        let k = rng.random_range(40..300);
        let mut locs = Vec::with_capacity(k + extra.len());
        while locs.len() < k {
            let p = Location::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            if !set.point_in_barrier(&p).unwrap() {
                locs.push(p);
            }
        }
        locs.extend(extra.into_iter().filter(|p| !set.point_in_barrier(p).unwrap()));
        let order = if with_cup {
            OrderStrategy::ByX
        } else {
            random_order(locs.len(), &mut rng)
        };
        let m = [5, 10, 15][rng.random_range(0..3)];
        let phi = rng.random_range(0.3..3.0);
        let spec = match rng.random_range(0..4) {
            0 => CovarianceSpec::exponential(1.0, phi),
            1 => CovarianceSpec::matern(1.0, phi, 1.5),
            2 => CovarianceSpec::matern(1.0, phi, 2.5),
            _ => CovarianceSpec::matern(1.0, phi, rng.random_range(0.3..2.0)),
        };
        let ordering = order_reference(&locs, order).unwrap();
        let dag = match build_reference_dag(&locs, ordering, m, &set) {
            Ok(d) => d,
            Err(_) => {
                regenerated += 1;
                continue;
            }
        };
        config += 1;
        let esc = dag.count_with(Provenance::GridEscape);
        if esc > 0 {
            escape_configs += 1;
            escape_nodes += esc;
        }
        let chol = SparseGpFactors::compute(&dag, &spec).and_then(|f| f.precision().cholesky());
        match chol {
            Ok(c) if c.log_det().is_finite() => ok += 1,
            other => fails.push(format!("config {config}: {:?}", other.err())),
        }
    }
    outcome(
        ok == 100 && escape_configs > 0,
        format!(
            "{ok}/100 factorized; {escape_configs} configs with {escape_nodes} grid_escape nodes; {regenerated} regenerated after build errors {fails:?}"
        ),
    )
}

// --------------------------------------------------------- criterion 6

type Q = Ratio<i64>;

#[derive(Clone, Copy, PartialEq)]
struct Pt {
    x: Q,
    y: Q,
}

impl Pt {
    fn int(x: i64, y: i64) -> Self {
        Pt {
            x: Q::from_integer(x),
            y: Q::from_integer(y),
        }
    }
}

fn sign(v: Q) -> i32 {
    if v > Q::from_integer(0) {
        1
    } else if v < Q::from_integer(0) {
        -1
    } else {
        0
    }
}

fn orient_q(a: Pt, b: Pt, c: Pt) -> i32 {
    sign((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn on_closed(a: Pt, b: Pt, c: Pt) -> bool {
    orient_q(a, b, c) == 0
        && c.x >= a.x.min(b.x)
        && c.x <= a.x.max(b.x)
        && c.y >= a.y.min(b.y)
        && c.y <= a.y.max(b.y)
}

fn param(p: Pt, q: Pt, c: Pt) -> Q {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    ((c.x - p.x) * dx + (c.y - p.y) * dy) / (dx * dx + dy * dy)
}

fn strictly_inside(ring: &[Pt], m: Pt) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if on_closed(a, b, m) {
            return false;
        }
        if (a.y > m.y) != (b.y > m.y) {
            let x = a.x + (m.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > m.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Brute force over every polygon edge, then containment of the midpoints
/// between consecutive contact parameters.
fn blocked_exact(p: Pt, q: Pt, polys: &[Vec<Pt>]) -> bool {
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    for ring in polys {
        let n = ring.len();
        let mut ts = vec![zero, one];
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            let o1 = orient_q(p, q, a);
            let o2 = orient_q(p, q, b);
            if o1 == 0 && o2 == 0 {
                let (ta, tb) = (param(p, q, a), param(p, q, b));
                let lo = ta.min(tb).max(zero);
                let hi = ta.max(tb).min(one);
                if lo < hi {
                    return true;
                }
                if lo == hi {
                    ts.push(lo);
                }
                continue;
            }
            let o3 = orient_q(a, b, p);
            let o4 = orient_q(a, b, q);
            if o1 * o2 < 0 && o3 * o4 < 0 {
                return true;
            }
            if o1 == 0 && on_closed(p, q, a) {
                ts.push(param(p, q, a));
            }
            if o2 == 0 && on_closed(p, q, b) {
                ts.push(param(p, q, b));
            }
            if o3 == 0 && on_closed(a, b, p) {
                ts.push(zero);
            }
            if o4 == 0 && on_closed(a, b, q) {
                ts.push(one);
            }
        }
        ts.sort();
        ts.dedup();
        let half = Q::new(1, 2);
        for w in ts.windows(2) {
            let t = (w[0] + w[1]) * half;
            let mid = Pt {
                x: p.x + (q.x - p.x) * t,
                y: p.y + (q.y - p.y) * t,
            };
            if strictly_inside(ring, mid) {
                return true;
            }
        }
    }
    false
}

/// Random simple polygon with integer vertices in `[0, 16]^2`.
fn random_polygon(rng: &mut ChaCha8Rng) -> Vec<(i64, i64)> {
    let mut pick3 = || {
        let mut v: Vec<i64> = Vec::new();
        while v.len() < 3 {
            let c = rng.random_range(0..=16);
            if !v.contains(&c) {
                v.push(c);
            }
        }
        v.sort_unstable();
        v
    };
    let xs = pick3();
    let ys = pick3();
    match rng.random_range(0..3) {
        0 => vec![(xs[0], ys[0]), (xs[2], ys[0]), (xs[2], ys[2]), (xs[0], ys[2])],
        1 => vec![
            (xs[0], ys[0]),
            (xs[2], ys[0]),
            (xs[2], ys[1]),
            (xs[1], ys[1]),
            (xs[1], ys[2]),
            (xs[0], ys[2]),
        ],
        _ => loop {
            let t: Vec<(i64, i64)> = (0..3)
                .map(|_| (rng.random_range(0..=16), rng.random_range(0..=16)))
                .collect();
            let o = (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0);
            if o != 0 {
                break t;
            }
        },
    }
}

fn geometry_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut disagree = 0;
    let mut blocked = 0;
    let mut first_bad = None;
    let cases = 100_000;
    for case in 0..cases {
        let polys: Vec<Vec<(i64, i64)>> = (0..rng.random_range(1..=2)).map(|_| random_polygon(&mut rng)).collect();
        let endpoint = |rng: &mut ChaCha8Rng| -> (i64, i64) {
            if rng.random_bool(0.3) {
                let ring = &polys[rng.random_range(0..polys.len())];
                ring[rng.random_range(0..ring.len())]
            } else {
                (rng.random_range(0..=16), rng.random_range(0..=16))
            }
        };
        let p = endpoint(&mut rng);
        let mut q = endpoint(&mut rng);
        while q == p {
            q = endpoint(&mut rng);
        }
        let to_loc = |v: (i64, i64)| Location::new(v.0 as f64 / 4.0, v.1 as f64 / 4.0);
        let set = BarrierSet::new(
            polys
                .iter()
                .map(|r| {
                    let mut ring: Vec<Location> = r.iter().map(|&v| to_loc(v)).collect();
                    ring.push(ring[0]);
                    Barrier::Polygon { rings: vec![ring] }
                })
                .collect(),
        )
        .unwrap();
        let got = set.segment_blocked(&to_loc(p), &to_loc(q)).unwrap();
        let rings: Vec<Vec<Pt>> = polys
            .iter()
            .map(|r| r.iter().map(|&(x, y)| Pt::int(x, y)).collect())
            .collect();
        let want = blocked_exact(Pt::int(p.0, p.1), Pt::int(q.0, q.1), &rings);
        blocked += want as usize;
        if got != want {
            disagree += 1;
            first_bad.get_or_insert((case, p, q, polys.clone(), got));
        }
    }
    outcome(
        disagree == 0,
        format!("{cases} cases ({blocked} blocked): {disagree} disagreements {first_bad:?}"),
    )
}

// --------------------------------------------------------- criterion 7

const PHI7: f64 = 3.0;
const SIGMA2_7: f64 = 1.3;
const TAU2_7: f64 = 0.2;

fn mcmc_case(m: usize, seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 30;
    let locs: Vec<Location> = (0..k).map(|_| Location::new(rng.random(), rng.random())).collect();
    let y: Vec<f64> = locs
        .iter()
        .map(|l| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (3.0 * l.x).sin() + 0.5 * z
        })
        .collect();
    let data = Dataset::without_covariates(locs, y).unwrap();
    let ordering = order_reference(&data.locations, OrderStrategy::BySum).unwrap();
    let dag = build_reference_dag(&data.locations, ordering, m, &BarrierSet::empty()).unwrap();
    let spec = CovarianceSpec::matern(SIGMA2_7, PHI7, 1.5);
    let priors = PriorSpec {
        tau2: InverseGamma { shape: 2.0, scale: 0.1 },
        sigma2: InverseGamma { shape: 2.0, scale: 1.0 },
        phi: UniformBounds { lower: 1.0, upper: 6.0 },
        nu: 1.5,
        family: Family::Matern,
    };
    let cfg = McmcConfig {
        iterations: 21_000,
        burn_in: 1000,
        thin: 1,
        seed: seed + 10,
        phi_proposal_sd: 0.3,
        adapt: true,
        fixed: FixedParams {
            beta: Some(vec![0.0]),
            tau2: Some(TAU2_7),
            sigma2: Some(SIGMA2_7),
            phi: Some(PHI7),
        },
    };
    let chain = gibbs_fit(&data, &dag, &spec, &priors, &cfg).unwrap();
    let kern = |d: f64| matern_closed(SIGMA2_7, PHI7, 1.5, d);
    // prior precision in dag order
    let q = if m == k - 1 {
        let refs = dag.refs();
        DMatrix::from_fn(k, k, |i, j| kern(refs[i].dist(&refs[j]))).try_inverse().unwrap()
    } else {
        dense_dag_cov(&dag, &kern).try_inverse().unwrap()
    };
    let yd: Vec<f64> = (0..k)
        .map(|p| {
            let l = dag.refs()[p];
            let i = data.locations.iter().position(|d| *d == l).unwrap();
            data.response[i]
        })
        .collect();
    let post = (&q + DMatrix::identity(k, k) / TAU2_7).cholesky().unwrap();
    let exact = post.solve(&(DVector::from_column_slice(&yd) / TAU2_7));
    count_outside(&chain, &exact)
}

fn count_outside(chain: &McmcChain, exact: &DVector<f64>) -> (usize, f64) {
    let mut outside = 0;
    let mut worst: f64 = 0.0;
    for p in 0..exact.len() {
        let draws: Vec<f64> = chain.w.iter().map(|w| w[p]).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let mcse = sd(&draws) / ess(&draws).sqrt();
        let z = (mean - exact[p]).abs() / mcse;
        worst = worst.max(z);
        if z >= 3.0 {
            outside += 1;
        }
    }
    (outside, worst)
}

fn mcmc_oracle() -> Outcome {
    let (full_out, full_z) = mcmc_case(29, 1);
    let (sparse_out, sparse_z) = mcmc_case(10, 2);
    outcome(
        full_out == 0 && sparse_out == 0,
        format!(
            "m=29: {full_out}/30 sites beyond 3 MCSE (max {full_z:.2}); m=10: {sparse_out}/30 beyond 3 MCSE (max {sparse_z:.2})"
        ),
    )
}

// --------------------------------------------------------- criterion 8

fn sliding_doors() -> Outcome {
    let demo = SlidingDoors::build().unwrap();
    let corr = |a: &Location, b: &Location| {
        demo.cov(a, b).unwrap() / (demo.cov(a, a).unwrap() * demo.cov(b, b).unwrap()).sqrt()
    };
    let mut below = true;
    let mut opening = true;
    let mut lines = Vec::new();
    for &(px, py) in &DOOR_PROBES {
        let p = Location::new(px, py);
        let mirror = Location::new(px, 10.0 - py);
        for dx in [-0.5, 0.0, 0.5] {
            let t = Location::new(px + dx, 10.0 - py);
            let ns = corr(&p, &t);
            let st = demo.stationary(&p, &t) / demo.spec.sigma2;
            below &= ns < st;
        }
        let across = corr(&p, &mirror);
        let a = Location::new(5.0, py);
        let b = Location::new(5.0, 10.0 - py);
        assert!((a.dist(&b) - p.dist(&mirror)).abs() < 1e-12);
        let through = corr(&a, &b);
        opening &= through > across;
        lines.push(format!(
            "({px},{py}) across {across:.4} stationary {:.4} opening {through:.4}",
            demo.stationary(&p, &mirror) / demo.spec.sigma2
        ));
    }
    let mut sym: f64 = 0.0;
    for &(px, py) in &DOOR_PROBES {
        let p = Location::new(px, py);
        for (dx, dy) in [(0.3, 0.1), (1.0, 0.7), (0.25, 2.0), (1.5, 1.5)] {
            let vals: Vec<f64> = [(dx, dy), (-dy, dx), (-dx, -dy), (dy, -dx), (dx, -dy), (-dx, dy)]
                .iter()
                .map(|&(u, v)| demo.stationary(&p, &Location::new(px + u, py + v)))
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            sym = sym.max(hi - lo);
        }
    }
    outcome(
        below && opening && sym <= 1e-12,
        format!(
            "across-door below stationary: {below}; opening above across-door: {opening}; symmetry spread {sym:.1e}; {}",
            lines.join("; ")
        ),
    )
}

// --------------------------------------------------------- criterion 9

/// `ln Gamma(z)` by upward shift and the Stirling series.
fn ln_gamma_oracle(mut z: f64) -> f64 {
    let mut shift = 0.0;
    while z < 20.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    shift + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `e^x K_nu(x)` by the trapezoid rule on `int_0^inf exp(-x cosh t) cosh(nu t) dt`.
fn bessel_k_scaled_oracle(nu: f64, x: f64) -> f64 {
    let h = 0.01;
    let mut sum = 0.5; // t = 0 term: exp(-x (cosh 0 - 1)) cosh 0 / 2
    let mut i = 1;
    loop {
        let t = h * i as f64;
        let term = (-x * (t.cosh() - 1.0) + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        i += 1;
    }
    h * sum
}

fn matern_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        let d = 10f64.powf(rng.random_range(-3.0..0.7));
        let nu = rng.random_range(0.3..3.0);
        let phi = 10f64.powf(rng.random_range(-1.0..1.0));
        let x = phi * d;
        let want = if x > 700.0 {
            0.0
        } else {
            let ln = (1.0 - nu) * 2f64.ln() - ln_gamma_oracle(nu) + nu * x.ln() - x;
            ln.exp() * bessel_k_scaled_oracle(nu, x)
        };
        let got = base_cov(d, &CovarianceSpec::matern(1.0, phi, nu)).unwrap();
        let rel = (got - want).abs() / want.abs();
        if rel > worst {
            worst = rel;
            at = (d, nu, phi);
        }
    }
    outcome(
        worst <= 1e-10,
        format!("10000 triples: max relative error {worst:.2e} (<= 1e-10) at d={:.4} nu={:.4} phi={:.4}", at.0, at.1, at.2),
    )
}

// -------------------------------------------------------- criterion 10

fn metric_arithmetic() -> Outcome {
    let three = score(&[1.0, 2.0, 4.0], &[0.0, 1.0, 3.5], &[2.0, 4.0, 4.5], &[2.0, 2.0, 2.0]).unwrap();
    // errors -1, 0, 2; widths 2, 3, 1; 2 is inside the first two intervals only
    let ok3 = three.rmspe == (5.0f64 / 3.0).sqrt()
        && three.mape == 1.0
        && three.coverage == 2.0 / 3.0
        && three.ci_width == 2.0
        && three.n_eval == 3;
    let five = score(
        &[1.5, 2.0, 2.0, 5.0, 5.0],
        &[1.0, 1.0, 2.5, 4.5, 4.0],
        &[2.0, 3.0, 3.5, 5.5, 6.0],
        &[1.0, 2.0, 3.0, 4.0, 5.0],
    )
    .unwrap();
    // errors 0.5, 0, -1, 1, 0; widths 1, 2, 1, 1, 2; 4 misses [4.5, 5.5]
    let ok5 = five.rmspe == 0.45f64.sqrt()
        && five.mape == 0.5
        && five.coverage == 0.8
        && five.ci_width == 1.4
        && five.n_eval == 5;
    outcome(ok3 && ok5, format!("3-point {three:?}; 5-point {five:?}"))
}

// -------------------------------------------------------- criterion 11

fn ordering() -> Outcome {
    let mcmc = McmcConfig {
        iterations: 3000,
        burn_in: 1000,
        seed: 1,
        ..McmcConfig::default()
    };
    let runs = ordering_robustness(1, 400, 600, &mcmc, 3).unwrap();
    let r: Vec<f64> = runs.iter().map(|r| r.metrics.rmspe).collect();
    let spread = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - r.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        spread < 0.005,
        format!(
            "rmspe x {:.4}, y {:.4}, sum {:.4}; spread {spread:.4} (< 0.005)",
            r[0], r[1], r[2]
        ),
    )
}
