//! Seeded trajectory ensembles.
//!
//! Trajectory `i` of an ensemble runs on `derive_seed(master_seed, i)`;
//! results are collected in index order, so the outcome is bit-identical for
//! any thread count or scheduling.

use rayon::prelude::*;

use super::{GrwSpec, SdeSpec, SpectralState, TrajectoryRecord};
use crate::dynamics::closed::trajectory_closed_spectral;
use crate::error::{Error, Result};
use crate::stats::EnsembleStats;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-trajectory seed.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x517C_C1B7_2722_0A95)))
}

/// One ensemble member specification.
#[derive(Debug, Clone)]
pub enum TrajectorySpec {
    /// Closed-form flow on a branch decomposition.
    Closed {
        spectral: SpectralState,
        lambda: f64,
        grid: Vec<f64>,
        collapse_threshold: f64,
    },
    Sde(SdeSpec),
    Grw(GrwSpec),
}

impl TrajectorySpec {
    pub fn run(&self, seed: u64) -> Result<TrajectoryRecord> {
        match self {
            TrajectorySpec::Closed {
                spectral,
                lambda,
                grid,
                collapse_threshold,
            } => trajectory_closed_spectral(spectral, *lambda, grid, seed, *collapse_threshold),
            TrajectorySpec::Sde(spec) => spec.run(seed),
            TrajectorySpec::Grw(spec) => spec.run(seed),
        }
    }

    /// Born probabilities per eigenvalue class of the initial state.
    pub fn born_probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.spectral()?.born_probabilities())
    }

    pub fn class_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.spectral()?.class_eigenvalues().to_vec())
    }

    fn spectral(&self) -> Result<SpectralState> {
        match self {
            TrajectorySpec::Closed { spectral, .. } => Ok(spectral.clone()),
            TrajectorySpec::Sde(spec) => {
                SpectralState::decompose(&spec.psi0, &spec.collapse_op, None)
            }
            TrajectorySpec::Grw(spec) => spec.spectral(),
        }
    }
}

/// All records of an ensemble plus the aggregate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub records: Vec<TrajectoryRecord>,
    pub stats: EnsembleStats,
}

/// Run `n` trajectories and aggregate outcome statistics.
pub fn run_ensemble(spec: &TrajectorySpec, n: usize, master_seed: u64) -> Result<EnsembleStats> {
    Ok(run_ensemble_records(spec, n, master_seed)?.stats)
}

/// Run `n` trajectories keeping every record.
pub fn run_ensemble_records(
    spec: &TrajectorySpec,
    n: usize,
    master_seed: u64,
) -> Result<EnsembleRun> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_trajectories",
            requirement: ">= 1",
            value: 0.0,
        });
    }
    let born = spec.born_probabilities()?;
    let class_eigenvalues = spec.class_eigenvalues()?;
    let records: Vec<TrajectoryRecord> = (0..n)
        .into_par_iter()
        .map(|i| {
            spec.run(derive_seed(master_seed, i as u64))
                .map_err(|e| Error::TrajectoryFailed {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = EnsembleStats::from_records(&records, born, class_eigenvalues);
    Ok(EnsembleRun { records, stats })
}
