//! Kinetic Monte Carlo for the reduced dynamics: Gillespie trajectories of
//! the unsigned syndrome chain with Feynman–Kac sign weights.

mod engine;
mod estimate;
mod fenwick;

pub use engine::{sample_gibbs_syndrome, KmcEngine, SectorSampler, Trajectory};
pub use estimate::{
    engine_on, lifetime_scan, relevant_sectors, run_autocorrelation, AutocorrelationEstimate,
    ScanConfig, ScanMethod, ScanRow, MAX_SCAN_RING, MAX_SCAN_TORUS, MIN_TRAJECTORIES, N_BATCHES,
};
