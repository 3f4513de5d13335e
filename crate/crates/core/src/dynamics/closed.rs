//! Closed-form collapse evolution at zero Hamiltonian.
//!
//! For an initial state `sum_i c_i |a_i>` the un-normalized solution at time
//! t under noise value B is `sum_i c_i exp(-(B - 2*lambda*t*a_i)^2 /
//! (4*lambda*t)) |a_i>`, and B(t) is Brownian with variance `lambda*t`,
//! distributed as the mixture `sum_i |c_i|^2 Normal(2*lambda*t*a_i,
//! lambda*t)`. Interior grid points are filled by exact Brownian-bridge
//! conditioning on the sampled endpoint.
//!
//! Per-trajectory draw order (fixed for reproducibility): one uniform for the
//! mixture class, one standard normal for the endpoint, then one standard
//! normal per interior grid point in ascending time order.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::{
    classify, validate_grid, CollapseBranch, CslParams, NoiseSample, SpectralState,
    TrajectoryRecord, COLLAPSE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::hilbert::StateVector;

/// Log of the branch Gaussian factor `exp(-(B - 2*lambda*t*a)^2 /
/// (4*lambda*t))`.
pub fn gaussian_log_factor(lambda: f64, t: f64, b: f64, a: f64) -> f64 {
    let d = b - 2.0 * lambda * t * a;
    -(d * d) / (4.0 * lambda * t)
}

/// Un-normalized branch amplitudes `c_i * exp(-(B - 2*lambda*t*a_i)^2 /
/// (4*lambda*t))`, one per eigenvalue class of the collapse operator.
pub fn closed_form_weights(
    psi0: &StateVector,
    params: &CslParams,
    t: f64,
    b: f64,
) -> Result<Vec<Complex64>> {
    let spectral = SpectralState::decompose(psi0, &params.collapse_op, None)?;
    closed_form_weights_spectral(&spectral, params.lambda, t, b)
}

/// Branch-resolved variant of [`closed_form_weights`]: one amplitude per
/// branch of the supplied decomposition (branches may be finer than
/// eigenvalue classes).
pub fn closed_form_weights_spectral(
    spectral: &SpectralState,
    lambda: f64,
    t: f64,
    b: f64,
) -> Result<Vec<Complex64>> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(spectral
        .branches()
        .iter()
        .map(|br| br.amplitude * gaussian_log_factor(lambda, t, b, br.eigenvalue).exp())
        .collect())
}

/// Draw `B(t)` from the mixture `sum_i |c_i|^2 Normal(2*lambda*t*a_i,
/// lambda*t)`: a class is selected with its Born weight, then the Gaussian is
/// sampled.
pub fn sample_noise<R: Rng + ?Sized>(
    psi0: &StateVector,
    params: &CslParams,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    let spectral = SpectralState::decompose(psi0, &params.collapse_op, None)?;
    sample_noise_spectral(&spectral, params.lambda, t, rng)
}

pub fn sample_noise_spectral<R: Rng + ?Sized>(
    spectral: &SpectralState,
    lambda: f64,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let probs = spectral.born_probabilities();
    let class = sample_categorical(rng, &probs);
    let a = spectral.class_eigenvalues()[class];
    let z: f64 = rng.sample(StandardNormal);
    Ok(2.0 * lambda * t * a + (lambda * t).sqrt() * z)
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Closed-form trajectory on an explicit decomposition.
///
/// Samples the final-time noise from its exact law, fills interior grid
/// values by Brownian-bridge conditioning, and evaluates normalized branch
/// weights at every grid time.
pub fn trajectory_closed_spectral(
    spectral: &SpectralState,
    lambda: f64,
    grid: &[f64],
    seed: u64,
    collapse_threshold: f64,
) -> Result<TrajectoryRecord> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    validate_grid(grid)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let t_final = *grid.last().unwrap();
    let probs = spectral.born_probabilities();
    let class = sample_categorical(&mut rng, &probs);
    let a_sel = spectral.class_eigenvalues()[class];
    let z: f64 = rng.sample(StandardNormal);
    let b_final = 2.0 * lambda * t_final * a_sel + (lambda * t_final).sqrt() * z;

    let m = grid.len();
    let mut values = Vec::with_capacity(m);
    let (mut t_prev, mut b_prev) = (0.0, 0.0);
    for (k, &t) in grid.iter().enumerate() {
        let b = if k + 1 == m {
            b_final
        } else {
            // bridge between (t_prev, b_prev) and (t_final, b_final)
            let gap = t_final - t_prev;
            let mean = b_prev + (t - t_prev) / gap * (b_final - b_prev);
            let var = lambda * (t - t_prev) * (t_final - t) / gap;
            let z: f64 = rng.sample(StandardNormal);
            mean + var.max(0.0).sqrt() * z
        };
        values.push(b);
        t_prev = t;
        b_prev = b;
    }

    let branch_weights: Vec<Vec<f64>> = grid
        .iter()
        .zip(&values)
        .map(|(&t, &b)| branch_weight_row(spectral.branches(), lambda, t, b))
        .collect();

    finish_record(
        spectral,
        seed,
        grid.to_vec(),
        Some(NoiseSample::new(grid, values)?),
        branch_weights,
        collapse_threshold,
    )
}

/// Closed-form trajectory of a state under a dense collapse operator.
pub fn trajectory_closed(
    psi0: &StateVector,
    params: &CslParams,
    grid: &[f64],
    seed: u64,
) -> Result<TrajectoryRecord> {
    let spectral = SpectralState::decompose(psi0, &params.collapse_op, None)?;
    trajectory_closed_spectral(&spectral, params.lambda, grid, seed, COLLAPSE_THRESHOLD)
}

/// Normalized squared branch weights at one (t, B) point, computed in the log
/// domain so widely separated eigenvalues cannot underflow the row.
fn branch_weight_row(branches: &[CollapseBranch], lambda: f64, t: f64, b: f64) -> Vec<f64> {
    let logs: Vec<f64> = branches
        .iter()
        .map(|br| {
            let mag = br.amplitude.norm();
            if mag == 0.0 {
                f64::NEG_INFINITY
            } else {
                mag.ln() + gaussian_log_factor(lambda, t, b, br.eigenvalue)
            }
        })
        .collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logs
        .iter()
        .map(|&l| {
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                (2.0 * (l - lmax)).exp()
            }
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights
}

/// Assemble the record tail shared by the closed-form entry points.
pub(crate) fn finish_record(
    spectral: &SpectralState,
    seed: u64,
    times: Vec<f64>,
    noise: Option<NoiseSample>,
    branch_weights: Vec<Vec<f64>>,
    collapse_threshold: f64,
) -> Result<TrajectoryRecord> {
    let branch_classes: Vec<usize> = spectral.branches().iter().map(|b| b.class).collect();
    let class_eigenvalues = spectral.class_eigenvalues().to_vec();

    let last = branch_weights.last().expect("at least one grid point");
    let mut class_weights = vec![0.0; class_eigenvalues.len()];
    for (b, &w) in last.iter().enumerate() {
        class_weights[branch_classes[b]] += w;
    }
    let (final_class, collapsed) = classify(&class_weights, collapse_threshold);

    let final_amplitudes: Vec<Complex64> = spectral
        .branches()
        .iter()
        .zip(last)
        .map(|(br, &w)| {
            let mag = br.amplitude.norm();
            if mag == 0.0 {
                Complex64::ZERO
            } else {
                (br.amplitude / mag) * w.sqrt()
            }
        })
        .collect();

    let final_state = if spectral.has_vectors() {
        let mut acc: Option<StateVector> = None;
        for (br, &amp) in spectral.branches().iter().zip(&final_amplitudes) {
            if let Some(v) = &br.vector {
                let term = v.scale(amp);
                acc = Some(match acc {
                    Some(s) => s.add(&term)?,
                    None => term,
                });
            }
        }
        acc.map(|s| s.normalize()).transpose()?
    } else {
        None
    };

    Ok(TrajectoryRecord {
        seed,
        times,
        noise,
        branch_weights,
        branch_classes,
        class_eigenvalues,
        final_class,
        collapsed,
        final_amplitudes,
        final_state,
        jump_times: Vec::new(),
        jump_centers: Vec::new(),
        warnings: Vec::new(),
    })
}
