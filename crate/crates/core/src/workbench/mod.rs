//! File formats, configuration and the canned experiment drivers.

mod config;
mod experiments;
mod io;
mod simulate;

pub use config::{Experiment, ExperimentConfig, DEFAULT_FAULTS};
pub use experiments::{
    arc_barrier, faults_layout, faults_priors, faults_replicate, fit_and_score, on_barrier_edge, ordering_robustness,
    run_faults_experiment, run_sliding_doors_demo, sliding_doors_barriers, write_param_summary, FaultsReplicate,
    FieldRow, MethodFit, OrderingRun, SlidingDoors, DOORS, DOORS_GRID, DOORS_M, DOOR_PROBES, FAULTS_GRID,
    FAULTS_TRUE_M,
};
pub use io::{read_points_csv, write_points_csv, PointTable};
pub use simulate::{simulate, square_grid, SimulationSpec, Simulated};
