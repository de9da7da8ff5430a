use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use barrier_gp::covariance::{CovarianceSpec, Family};
use barrier_gp::dag::{build_reference_dag, order_reference, write_edges_csv, NeighborDag, OrderStrategy};
use barrier_gp::evaluation::{empirical_variogram, fit_matern_variogram, phi_bounds, score};
use barrier_gp::geometry::read_barriers_wkt;
use barrier_gp::inference::{
    gibbs_fit, predict, project_nonnegative, starting_values, summarize, Dataset, InverseGamma, McmcChain, McmcConfig,
    PredictConfig, PriorSpec, UniformBounds,
};
use barrier_gp::workbench::{
    read_points_csv, run_faults_experiment, run_sliding_doors_demo, simulate, write_points_csv, Experiment,
    ExperimentConfig, PointTable, SimulationSpec,
};
use barrier_gp::{par, BarrierSet, Location};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "bgp", version, about = "Barrier-aware sparse DAG Gaussian processes")]
struct Cli {
    /// Worker threads (1 forces fully serial execution).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the neighbor graph and export its edges.
    Neighbors {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sampler and write the chain checkpoint.
    Fit {
        #[command(flatten)]
        graph: GraphArgs,
        /// TOML file with sampler and prior settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict at new sites from a saved chain.
    Predict {
        /// Training points the chain was fitted on.
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        chain: PathBuf,
        /// Prediction sites as `x,y[,cov...]`.
        #[arg(long)]
        sites: PathBuf,
        /// Use every n-th stored draw.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Clamp response draws at zero before summarizing.
        #[arg(long)]
        clamp_nonnegative: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical semivariogram and a Matérn fit.
    Variogram {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 15)]
        bins: usize,
        #[arg(long, default_value_t = 1.5)]
        nu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a synthetic field from the process at the given sites.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 1.0)]
        phi: f64,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 0.0)]
        tau2: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a canned study described by a TOML config.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a prediction CSV against held-out values.
    Score {
        /// Prediction CSV written by `predict`.
        #[arg(long)]
        predictions: PathBuf,
        /// Points with the true `value` column, in the same row order.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    points: PathBuf,
    /// WKT file with POLYGON / LINESTRING barriers.
    #[arg(long)]
    barriers: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    m: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Y)]
    order: OrderArg,
    /// Visit order for `--order file`: original point indices, one per line.
    #[arg(long, required_if_eq("order", "file"))]
    order_file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    X,
    Y,
    Sum,
    ProductDesc,
    File,
}

/// Sampler and prior settings for `fit`. Unset priors come from the data.
#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FitSettings {
    iterations: usize,
    burn_in: usize,
    thin: usize,
    phi_proposal_sd: f64,
    adapt: bool,
    family: Family,
    nu: f64,
    tau2_prior: [f64; 2],
    sigma2_prior: [f64; 2],
    phi_bounds: Option<[f64; 2]>,
}

impl Default for FitSettings {
    fn default() -> Self {
        let mcmc = McmcConfig::default();
        FitSettings {
            iterations: mcmc.iterations,
            burn_in: mcmc.burn_in,
            thin: mcmc.thin,
            phi_proposal_sd: mcmc.phi_proposal_sd,
            adapt: mcmc.adapt,
            family: Family::Matern,
            nu: 1.5,
            tau2_prior: [2.0, 0.1],
            sigma2_prior: [2.0, 1.0],
            phi_bounds: None,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if !par::init_threads(t) {
            log::warn!("thread pool already initialised; --threads {t} ignored");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Neighbors { graph, out } => {
            let table = read_points(&graph.points)?;
            let dag = build_graph(&graph, &table.locations)?;
            write_edges_csv(&dag.export_edges(), create(&out)?)?;
            eprintln!("{} nodes, {} edges -> {}", dag.len(), dag.export_edges().len(), out.display());
        }
        Command::Fit {
            graph,
            config,
            seed,
            out,
        } => {
            let settings: FitSettings = match &config {
                Some(p) => toml::from_str(&fs::read_to_string(p)?)?,
                None => FitSettings::default(),
            };
            let data = read_points(&graph.points)?.into_dataset()?;
            let dag = build_graph(&graph, &data.locations)?;
            let priors = priors_for(&data, &settings);
            priors.validate()?;
            let (spec, _) = starting_values(&data, &priors);
            let mcmc = McmcConfig {
                iterations: settings.iterations,
                burn_in: settings.burn_in,
                thin: settings.thin,
                seed,
                phi_proposal_sd: settings.phi_proposal_sd,
                adapt: settings.adapt,
                fixed: Default::default(),
            };
            let chain = gibbs_fit(&data, &dag, &spec, &priors, &mcmc)?;
            chain.write_csv(create(&out)?)?;
            for p in summarize(&chain) {
                println!(
                    "{:<16} mean {:>10.4} sd {:>9.4} 95% [{:.4}, {:.4}] ess {:.0}",
                    p.name, p.mean, p.sd, p.q025, p.q975, p.ess
                );
            }
            println!("phi acceptance {:.3}", chain.acceptance_rate);
        }
        Command::Predict {
            graph,
            chain,
            sites,
            stride,
            seed,
            clamp_nonnegative,
            out,
        } => {
            let train = read_points(&graph.points)?;
            let dag = build_graph(&graph, &train.locations)?;
            let chain = McmcChain::read_csv(BufReader::new(File::open(&chain)?))?;
            let sites = read_points(&sites)?;
            let cfg = PredictConfig {
                stride,
                seed,
                keep_draws: clamp_nonnegative,
                ..PredictConfig::default()
            };
            let covs = (chain.n_beta() > 1).then_some(sites.covariates.as_slice());
            let mut pred = predict(&chain, &dag, &sites.locations, covs, &cfg)?;
            if clamp_nonnegative {
                pred = project_nonnegative(&pred);
            }
            pred.write_csv(create(&out)?)?;
            eprintln!("{} predictions -> {}", pred.len(), out.display());
        }
        Command::Variogram { points, bins, nu, out } => {
            let data = read_points(&points)?.into_dataset()?;
            let emp = empirical_variogram(&data, bins, None)?;
            let fit = fit_matern_variogram(&emp, nu, None)?;
            if let Some(out) = out {
                let mut w = csv::Writer::from_writer(create(&out)?);
                w.write_record(["distance", "gamma", "pairs"])?;
                for i in 0..emp.centers.len() {
                    w.write_record([emp.centers[i].to_string(), emp.gamma[i].to_string(), emp.counts[i].to_string()])?;
                }
                w.flush()?;
            }
            println!(
                "tau2 {:.5} sigma2 {:.5} phi {:.5} nu {} (max pair distance {:.4})",
                fit.tau2, fit.sigma2, fit.phi, fit.nu, emp.max_pair_distance
            );
        }
        Command::Simulate {
            graph,
            sigma2,
            phi,
            nu,
            tau2,
            seed,
            out,
        } => {
            let table = read_points(&graph.points)?;
            let barriers = load_barriers(graph.barriers.as_deref())?;
            let sim = SimulationSpec {
                spec: CovarianceSpec::matern(sigma2, phi, nu),
                m: graph.m,
                order: order_strategy(&graph)?,
                beta: vec![0.0],
                tau2,
            };
            sim.spec.validate()?;
            if tau2 < 0.0 || !tau2.is_finite() {
                return Err("--tau2 must be finite and nonnegative".into());
            }
            let all: Vec<usize> = (0..table.locations.len()).collect();
            let field = simulate(&table.locations, &all, &barriers, &sim, seed)?;
            write_points_csv(&field.data, create(&out)?)?;
            eprintln!("{} simulated values -> {}", field.w.len(), out.display());
        }
        Command::Experiment { config, out } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::from_toml(&fs::read_to_string(p)?)?,
                None => ExperimentConfig::default(),
            };
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            match cfg.experiment {
                Experiment::Faults => {
                    for rep in run_faults_experiment(&cfg)? {
                        for fit in std::iter::once(&rep.bora).chain(rep.nngp.as_ref()) {
                            println!(
                                "seed {} m {} {:<5} rmspe {:.4} coverage {:.3} width {:.4}",
                                rep.seed, rep.m, fit.method, fit.metrics.rmspe, fit.metrics.coverage, fit.metrics.ci_width
                            );
                        }
                    }
                }
                Experiment::SlidingDoors => {
                    let rows = run_sliding_doors_demo(&cfg)?;
                    println!("{} covariance field rows", rows.len());
                }
                Experiment::Custom => {
                    return Err("custom experiments are run with the fit, predict and score subcommands".into());
                }
            }
            println!("results in {}", cfg.output_dir.display());
        }
        Command::Score {
            predictions,
            points,
            out,
        } => {
            let truth = read_points(&points)?
                .values
                .ok_or("truth file has no `value` column")?;
            let (mean, lower, upper) = read_prediction_columns(&predictions)?;
            let r = score(&mean, &lower, &upper, &truth)?;
            println!(
                "rmspe {:.6} mape {:.6} coverage {:.4} width {:.6} n {}",
                r.rmspe, r.mape, r.coverage, r.ci_width, r.n_eval
            );
            if let Some(out) = out {
                let mut w = csv::Writer::from_writer(create(&out)?);
                w.write_record(["rmspe", "mape", "coverage", "ci_width", "n"])?;
                w.write_record([
                    r.rmspe.to_string(),
                    r.mape.to_string(),
                    r.coverage.to_string(),
                    r.ci_width.to_string(),
                    r.n_eval.to_string(),
                ])?;
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn read_points(path: &Path) -> CliResult<PointTable> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(read_points_csv(BufReader::new(file))?)
}

fn load_barriers(path: Option<&Path>) -> CliResult<BarrierSet> {
    Ok(match path {
        Some(p) => read_barriers_wkt(p)?,
        None => BarrierSet::empty(),
    })
}

fn order_strategy(graph: &GraphArgs) -> CliResult<OrderStrategy> {
    Ok(match graph.order {
        OrderArg::X => OrderStrategy::ByX,
        OrderArg::Y => OrderStrategy::ByY,
        OrderArg::Sum => OrderStrategy::BySum,
        OrderArg::ProductDesc => OrderStrategy::ByProductDesc,
        OrderArg::File => {
            let path = graph.order_file.as_ref().ok_or("--order file needs --order-file")?;
            let text = fs::read_to_string(path)?;
            let perm = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| format!("bad index {s:?} in {}", path.display())))
                .collect::<Result<Vec<_>, _>>()?;
            OrderStrategy::Explicit(perm)
        }
    })
}

fn build_graph(graph: &GraphArgs, locations: &[Location]) -> CliResult<NeighborDag> {
    let barriers = load_barriers(graph.barriers.as_deref())?;
    let ordering = order_reference(locations, order_strategy(graph)?)?;
    let dag = build_reference_dag(locations, ordering, graph.m, &barriers)?;
    for w in dag.warnings() {
        log::warn!("{w:?}");
    }
    Ok(dag)
}

fn priors_for(data: &Dataset, s: &FitSettings) -> PriorSpec {
    let nu = match s.family {
        Family::Exponential => 0.5,
        Family::Matern => s.nu,
    };
    let (lower, upper) = match s.phi_bounds {
        Some([l, u]) => (l, u),
        None => {
            let mut d: f64 = 0.0;
            for (i, a) in data.locations.iter().enumerate() {
                for b in &data.locations[i + 1..] {
                    d = d.max(a.dist(b));
                }
            }
            phi_bounds(d, nu)
        }
    };
    PriorSpec {
        tau2: InverseGamma {
            shape: s.tau2_prior[0],
            scale: s.tau2_prior[1],
        },
        sigma2: InverseGamma {
            shape: s.sigma2_prior[0],
            scale: s.sigma2_prior[1],
        },
        phi: UniformBounds { lower, upper },
        nu,
        family: s.family,
    }
}

/// `y_mean`, `y_q025`, `y_q975` columns of a prediction CSV.
fn read_prediction_columns(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("{}: missing column {name}", path.display()))
    };
    let (im, il, iu) = (col("y_mean")?, col("y_q025")?, col("y_q975")?);
    let (mut m, mut l, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].trim().parse::<f64>();
        m.push(num(im)?);
        l.push(num(il)?);
        u.push(num(iu)?);
    }
    Ok((m, l, u))
}
