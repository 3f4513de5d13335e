//! Stochastic collapse dynamics: the closed-form zero-Hamiltonian evolution,
//! a norm-preserving diffusive unraveling for general Hamiltonians, discrete
//! Gaussian-jump dynamics, and seeded trajectory ensembles.
//!
//! Every trajectory owns its random stream, seeded from
//! `derive_seed(master_seed, index)`, so ensembles are reproducible under any
//! execution order or degree of parallelism.

mod closed;
mod ensemble;
mod grw;
mod sde;

pub use closed::{
    closed_form_weights, closed_form_weights_spectral, gaussian_log_factor, sample_noise,
    sample_noise_spectral, trajectory_closed, trajectory_closed_spectral,
};
pub use ensemble::{derive_seed, run_ensemble, run_ensemble_records, EnsembleRun, TrajectorySpec};
pub use grw::{trajectory_grw, GrwSpec};
pub use sde::{trajectory_sde, SdeSpec};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{default_degeneracy_tol, eig, HermitianOperator, StateVector};

/// A trajectory is declared collapsed once the dominant branch weight exceeds
/// `1 - COLLAPSE_THRESHOLD`.
pub const COLLAPSE_THRESHOLD: f64 = 1e-6;

/// A diffusive step with `dt * ||H||_F` above this emits a warning on the
/// trajectory record.
pub const STEP_WARNING_THRESHOLD: f64 = 0.1;

/// Collapse strength and collapse operator of the continuous model.
#[derive(Debug, Clone)]
pub struct CslParams {
    pub lambda: f64,
    pub collapse_op: HermitianOperator,
}

impl CslParams {
    pub fn new(lambda: f64, collapse_op: HermitianOperator) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveLambda(lambda));
        }
        Ok(Self {
            lambda,
            collapse_op,
        })
    }
}

/// One realization of the driving noise: `B(t)` on an ascending grid with
/// `B(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl NoiseSample {
    /// `grid` must be strictly increasing with all points positive; the
    /// origin is prepended.
    pub fn new(grid: &[f64], values: Vec<f64>) -> Result<Self> {
        validate_grid(grid)?;
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        let mut times = Vec::with_capacity(grid.len() + 1);
        times.push(0.0);
        times.extend_from_slice(grid);
        let mut all = Vec::with_capacity(values.len() + 1);
        all.push(0.0);
        all.extend_from_slice(&values);
        Ok(Self { times, values: all })
    }

    /// Grid including the origin.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `B` values including `B(0) = 0`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `B` at the k-th grid point (excluding the origin).
    pub fn value_at(&self, k: usize) -> f64 {
        self.values[k + 1]
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// One branch of a state resolved against a collapse operator: its complex
/// amplitude, the eigenvalue it rides on, and the eigenvalue class it belongs
/// to. The branch vector is kept when the space is small enough to
/// materialize.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseBranch {
    pub amplitude: Complex64,
    pub eigenvalue: f64,
    pub class: usize,
    pub vector: Option<StateVector>,
}

/// A state decomposed into orthonormal branches of a collapse operator.
///
/// Branches may be finer than eigenvalue classes: two designated branches can
/// share an eigenvalue, in which case they belong to the same class and their
/// weight ratio is an invariant of the closed-form flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    branches: Vec<CollapseBranch>,
    class_eigenvalues: Vec<f64>,
}

impl SpectralState {
    /// Resolve a normalized state against a dense collapse operator; one
    /// branch per eigenvalue class, amplitudes real nonnegative (phases are
    /// absorbed into the branch vectors).
    pub fn decompose(
        psi0: &StateVector,
        collapse_op: &HermitianOperator,
        degeneracy_tol: Option<f64>,
    ) -> Result<Self> {
        psi0.require_normalized()?;
        if psi0.dim() != collapse_op.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs collapse operator dimension {}",
                psi0.dim(),
                collapse_op.dim()
            )));
        }
        let spectrum = eig(collapse_op, degeneracy_tol);
        let coords = spectrum.coordinates(psi0)?;
        let class_eigenvalues = spectrum.class_eigenvalues();
        let mut branches = Vec::with_capacity(spectrum.n_classes());
        for (class, members) in spectrum.degeneracy_classes().iter().enumerate() {
            let weight: f64 = members.iter().map(|&k| coords[k].norm_sqr()).sum();
            let amplitude = weight.sqrt();
            let vector = if amplitude > 1e-15 {
                let mut class_coords = vec![Complex64::ZERO; spectrum.dim()];
                for &k in members {
                    class_coords[k] = coords[k] / amplitude;
                }
                Some(spectrum.from_coordinates(&class_coords)?)
            } else {
                None
            };
            branches.push(CollapseBranch {
                amplitude: Complex64::new(amplitude, 0.0),
                eigenvalue: class_eigenvalues[class],
                class,
                vector,
            });
        }
        Ok(Self {
            branches,
            class_eigenvalues,
        })
    }

    /// Hand-built branch decomposition (scenario route). The branch vectors,
    /// when supplied, must be orthonormal; the squared amplitudes must sum to
    /// one.
    pub fn from_branches(
        amplitudes: Vec<Complex64>,
        eigenvalues: Vec<f64>,
        vectors: Vec<Option<StateVector>>,
    ) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyBranches);
        }
        if amplitudes.len() != eigenvalues.len() || amplitudes.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                got: eigenvalues.len(),
                expected: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::BranchNormMismatch(norm_sqr));
        }
        // orthonormality of supplied vectors
        let supplied: Vec<&StateVector> = vectors.iter().flatten().collect();
        for (i, a) in supplied.iter().enumerate() {
            for (j, b) in supplied.iter().enumerate().skip(i) {
                let g = a.inner(b)?;
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                if (g - expect).norm() > 1e-10 {
                    return Err(Error::NotOrthonormalBasis((g - expect).norm()));
                }
            }
        }

        // eigenvalue classes, ascending, grouped with the default tolerance
        let mut sorted: Vec<f64> = eigenvalues.clone();
        sorted.sort_by(f64::total_cmp);
        let tol = default_degeneracy_tol(&sorted);
        let mut class_eigenvalues: Vec<f64> = Vec::new();
        for &a in &sorted {
            match class_eigenvalues.last() {
                Some(&last) if a - last <= tol => {}
                _ => class_eigenvalues.push(a),
            }
        }
        let class_of = |a: f64| -> usize {
            class_eigenvalues
                .iter()
                .position(|&c| (a - c).abs() <= tol || a <= c)
                .unwrap_or(class_eigenvalues.len() - 1)
        };
        let branches = amplitudes
            .into_iter()
            .zip(eigenvalues)
            .zip(vectors)
            .map(|((amplitude, eigenvalue), vector)| CollapseBranch {
                amplitude,
                eigenvalue,
                class: class_of(eigenvalue),
                vector,
            })
            .collect();
        Ok(Self {
            branches,
            class_eigenvalues,
        })
    }

    pub fn branches(&self) -> &[CollapseBranch] {
        &self.branches
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_eigenvalues.len()
    }

    pub fn class_eigenvalues(&self) -> &[f64] {
        &self.class_eigenvalues
    }

    /// Squared amplitude per eigenvalue class.
    pub fn born_probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.n_classes()];
        for b in &self.branches {
            probs[b.class] += b.amplitude.norm_sqr();
        }
        probs
    }

    pub fn has_vectors(&self) -> bool {
        self.branches.iter().all(|b| b.vector.is_some() || b.amplitude.norm_sqr() == 0.0)
    }
}

/// One stochastic realization: the noise it rode on, branch weights along the
/// grid, and the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// Recorded times, all positive, ascending.
    pub times: Vec<f64>,
    /// Brownian path for the continuous models; `None` for jump dynamics.
    pub noise: Option<NoiseSample>,
    /// Normalized branch weights, one row per recorded time.
    pub branch_weights: Vec<Vec<f64>>,
    /// Eigenvalue-class index of each branch.
    pub branch_classes: Vec<usize>,
    pub class_eigenvalues: Vec<f64>,
    /// Eigenvalue class with the largest weight at the final time.
    pub final_class: usize,
    /// Whether the dominant class weight exceeded the collapse threshold.
    pub collapsed: bool,
    /// Normalized branch amplitudes at the final time.
    pub final_amplitudes: Vec<Complex64>,
    /// Dense final state when the branch vectors are materializable.
    pub final_state: Option<StateVector>,
    /// Jump times and centers (jump dynamics only).
    pub jump_times: Vec<f64>,
    pub jump_centers: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TrajectoryRecord {
    /// Collapsed outcome: the dominant eigenvalue class, or `None` while the
    /// trajectory is still spread over classes.
    pub fn outcome(&self) -> Option<usize> {
        self.collapsed.then_some(self.final_class)
    }

    pub fn n_classes(&self) -> usize {
        self.class_eigenvalues.len()
    }

    /// Aggregate branch weights into class weights at record index `k`.
    pub fn class_weights_at(&self, k: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.n_classes()];
        for (b, &weight) in self.branch_weights[k].iter().enumerate() {
            w[self.branch_classes[b]] += weight;
        }
        w
    }

    pub fn final_class_weights(&self) -> Vec<f64> {
        self.class_weights_at(self.branch_weights.len() - 1)
    }
}

/// Argmax class and collapse flag from a class-weight row.
pub(crate) fn classify(class_weights: &[f64], threshold: f64) -> (usize, bool) {
    let mut best = 0usize;
    let mut best_w = f64::NEG_INFINITY;
    for (k, &w) in class_weights.iter().enumerate() {
        if w > best_w {
            best_w = w;
            best = k;
        }
    }
    (best, best_w >= 1.0 - threshold)
}
