//! Norm-preserving diffusive unraveling for a general Hamiltonian.
//!
//! Euler-Maruyama steps of
//!
//! ```text
//! d|psi> = [ -i H dt
//!            + sqrt(lambda) (A - <A>) dW
//!            - (lambda/2) (A - <A>)^2 dt ] |psi>
//! ```
//!
//! with renormalization after every step. At zero Hamiltonian the outcome
//! statistics agree with the closed-form flow; at zero lambda the scheme
//! reduces to explicit-Euler unitary evolution.
//!
//! Draw order: one standard normal per step.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::{classify, CslParams, NoiseSample, TrajectoryRecord, COLLAPSE_THRESHOLD,
    STEP_WARNING_THRESHOLD};
use crate::error::{Error, Result};
use crate::hilbert::{eig, HermitianOperator, Spectrum, StateVector};

/// Full parameter set for a diffusive trajectory.
#[derive(Debug, Clone)]
pub struct SdeSpec {
    pub psi0: StateVector,
    pub hamiltonian: Option<HermitianOperator>,
    pub collapse_op: HermitianOperator,
    /// Collapse strength; zero runs the unitary baseline.
    pub lambda: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Branch weights are recorded every `record_stride` steps (and at the
    /// final step).
    pub record_stride: usize,
    pub collapse_threshold: f64,
}

impl SdeSpec {
    pub fn new(
        psi0: StateVector,
        hamiltonian: Option<HermitianOperator>,
        collapse_op: HermitianOperator,
        lambda: f64,
        dt: f64,
        n_steps: usize,
    ) -> Result<Self> {
        let record_stride = (n_steps / 200).max(1);
        let spec = Self {
            psi0,
            hamiltonian,
            collapse_op,
            lambda,
            dt,
            n_steps,
            record_stride,
            collapse_threshold: COLLAPSE_THRESHOLD,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        self.psi0.require_normalized()?;
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                requirement: "> 0",
                value: self.dt,
            });
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                requirement: ">= 1",
                value: 0.0,
            });
        }
        if self.lambda < 0.0 {
            return Err(Error::NonPositiveLambda(self.lambda));
        }
        if self.psi0.dim() != self.collapse_op.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs collapse operator dimension {}",
                self.psi0.dim(),
                self.collapse_op.dim()
            )));
        }
        if let Some(h) = &self.hamiltonian {
            if h.dim() != self.psi0.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "state dimension {} vs Hamiltonian dimension {}",
                    self.psi0.dim(),
                    h.dim()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn run(&self, seed: u64) -> Result<TrajectoryRecord> {
        let spectrum = eig(&self.collapse_op, None);
        self.run_with_spectrum(seed, &spectrum)
    }

    pub(crate) fn run_with_spectrum(
        &self,
        seed: u64,
        spectrum: &Spectrum,
    ) -> Result<TrajectoryRecord> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let dim = self.psi0.dim();
        let dt = self.dt;
        let lambda = self.lambda;
        let sqrt_lambda = lambda.sqrt();
        let sqrt_dt = dt.sqrt();

        let mut warnings = Vec::new();
        if let Some(h) = &self.hamiltonian {
            let scale = dt * h.frobenius_norm();
            if scale > STEP_WARNING_THRESHOLD {
                warnings.push(format!(
                    "step size dt*||H|| = {scale:.3e} exceeds {STEP_WARNING_THRESHOLD}; \
                     results may be inaccurate"
                ));
            }
        }

        let a = self.collapse_op.matrix();
        let h = self.hamiltonian.as_ref().map(|h| h.matrix());

        let mut psi: Vec<Complex64> = self.psi0.amplitudes().to_vec();
        let mut a_psi = vec![Complex64::ZERO; dim];
        let mut a2_psi = vec![Complex64::ZERO; dim];
        let mut h_psi = vec![Complex64::ZERO; dim];

        let mut times = Vec::new();
        let mut noise_values = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut b_accum = 0.0f64;

        for step in 0..self.n_steps {
            matvec_into(a, &psi, &mut a_psi);
            let mean = dot_re(&psi, &a_psi);
            matvec_into(a, &a_psi, &mut a2_psi);
            if let Some(h) = h {
                matvec_into(h, &psi, &mut h_psi);
            }

            let z: f64 = rng.sample(StandardNormal);
            let dw = sqrt_dt * z;
            b_accum += sqrt_lambda * dw;

            let noise_coeff = sqrt_lambda * dw;
            let drift_coeff = 0.5 * lambda * dt;
            for i in 0..dim {
                let deviation = a_psi[i] - mean * psi[i];
                let squared = a2_psi[i] - 2.0 * mean * a_psi[i] + mean * mean * psi[i];
                let mut dpsi = noise_coeff * deviation - drift_coeff * squared;
                if h.is_some() {
                    dpsi += Complex64::new(0.0, -dt) * h_psi[i];
                }
                psi[i] += dpsi;
            }

            let norm_sqr: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
            if !norm_sqr.is_finite() || norm_sqr == 0.0 {
                return Err(Error::NonFiniteState { step });
            }
            let inv = 1.0 / norm_sqr.sqrt();
            for c in &mut psi {
                *c *= inv;
            }

            let last = step + 1 == self.n_steps;
            if (step + 1) % self.record_stride == 0 || last {
                let t = (step + 1) as f64 * dt;
                times.push(t);
                noise_values.push(b_accum);
                let state = StateVector::new(self.psi0.layout().clone(), psi.clone())?;
                rows.push(spectrum.class_weights(&state)?);
            }
        }

        let final_state = StateVector::new(self.psi0.layout().clone(), psi)?;
        let class_eigenvalues = spectrum.class_eigenvalues();
        let last_row = rows.last().expect("n_steps >= 1 records at least once");
        let (final_class, collapsed) = classify(last_row, self.collapse_threshold);
        let final_amplitudes: Vec<Complex64> = last_row
            .iter()
            .map(|&w| Complex64::new(w.max(0.0).sqrt(), 0.0))
            .collect();
        let branch_classes: Vec<usize> = (0..class_eigenvalues.len()).collect();

        Ok(TrajectoryRecord {
            seed,
            times: times.clone(),
            noise: Some(NoiseSample::new(&times, noise_values)?),
            branch_weights: rows,
            branch_classes,
            class_eigenvalues,
            final_class,
            collapsed,
            final_amplitudes,
            final_state: Some(final_state),
            jump_times: Vec::new(),
            jump_centers: Vec::new(),
            warnings,
        })
    }
}

/// Single diffusive trajectory; see [`SdeSpec`] for the full-control variant.
pub fn trajectory_sde(
    psi0: &StateVector,
    hamiltonian: Option<&HermitianOperator>,
    params: &CslParams,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<TrajectoryRecord> {
    SdeSpec::new(
        psi0.clone(),
        hamiltonian.cloned(),
        params.collapse_op.clone(),
        params.lambda,
        dt,
        n_steps,
    )?
    .run(seed)
}

fn matvec_into(matrix: &[Complex64], x: &[Complex64], y: &mut [Complex64]) {
    let dim = x.len();
    for i in 0..dim {
        let row = &matrix[i * dim..(i + 1) * dim];
        let mut acc = Complex64::ZERO;
        for (m, xv) in row.iter().zip(x) {
            acc += m * xv;
        }
        y[i] = acc;
    }
}

fn dot_re(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a.conj() * b).re).sum()
}
