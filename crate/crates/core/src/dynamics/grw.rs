//! Discrete-jump collapse dynamics on the collapse operator's spectrum.
//!
//! Jumps arrive as a Poisson process. Between jumps the state evolves
//! unitarily (exactly, through the Hamiltonian's spectrum). A jump at center
//! `a0` multiplies each eigencomponent by `exp(-(a_i - a0)^2 / (4 r_c^2))`
//! and renormalizes; the center is drawn from the density proportional to
//! the post-jump squared norm, which works out to the mixture
//! `sum_i w_i Normal(a_i, r_c^2)` over the current class weights `w_i` —
//! the Born-mimicking rule.
//!
//! Draw order: exponential gaps interleaved with (uniform class, normal
//! center) pairs at each jump, in event order.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::closed::sample_categorical;
use super::{classify, SpectralState, TrajectoryRecord, COLLAPSE_THRESHOLD};
use crate::error::{Error, Result};
use crate::hilbert::{eig, HermitianOperator, Spectrum, StateVector};

/// Full parameter set for a jump trajectory.
#[derive(Debug, Clone)]
pub struct GrwSpec {
    pub psi0: StateVector,
    pub hamiltonian: Option<HermitianOperator>,
    pub collapse_op: HermitianOperator,
    /// Mean jump frequency; zero runs pure unitary evolution.
    pub rate: f64,
    /// Gaussian smearing width in eigenvalue units.
    pub smearing: f64,
    pub t_final: f64,
    /// Branch weights are recorded on this grid spacing (plus the final
    /// time).
    pub record_dt: f64,
    pub collapse_threshold: f64,
}

impl GrwSpec {
    pub fn new(
        psi0: StateVector,
        hamiltonian: Option<HermitianOperator>,
        collapse_op: HermitianOperator,
        rate: f64,
        smearing: f64,
        t_final: f64,
        record_dt: f64,
    ) -> Result<Self> {
        let spec = Self {
            psi0,
            hamiltonian,
            collapse_op,
            rate,
            smearing,
            t_final,
            record_dt,
            collapse_threshold: COLLAPSE_THRESHOLD,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        self.psi0.require_normalized()?;
        if self.rate < 0.0 {
            return Err(Error::InvalidParameter {
                name: "rate",
                requirement: ">= 0",
                value: self.rate,
            });
        }
        if !(self.smearing > 0.0) {
            return Err(Error::InvalidParameter {
                name: "smearing",
                requirement: "> 0",
                value: self.smearing,
            });
        }
        if !(self.t_final > 0.0) {
            return Err(Error::NonPositiveTime(self.t_final));
        }
        if !(self.record_dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "record_dt",
                requirement: "> 0",
                value: self.record_dt,
            });
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
        let collapse_spectrum = eig(&self.collapse_op, None);
        let h_spectrum = self.hamiltonian.as_ref().map(|h| eig(h, None));
        self.run_with_spectra(seed, &collapse_spectrum, h_spectrum.as_ref())
    }

    pub(crate) fn run_with_spectra(
        &self,
        seed: u64,
        collapse_spectrum: &Spectrum,
        h_spectrum: Option<&Spectrum>,
    ) -> Result<TrajectoryRecord> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let gap = if self.rate > 0.0 {
            Some(Exp::new(self.rate).expect("positive rate"))
        } else {
            None
        };

        // record grid: multiples of record_dt, with t_final appended
        let mut record_times: Vec<f64> = Vec::new();
        let mut k = 1usize;
        loop {
            let t = k as f64 * self.record_dt;
            if t >= self.t_final - 1e-12 * self.t_final {
                break;
            }
            record_times.push(t);
            k += 1;
        }
        record_times.push(self.t_final);

        let mut psi = self.psi0.clone();
        let mut t = 0.0f64;
        let mut next_jump = match &gap {
            Some(g) => g.sample(&mut rng),
            None => f64::INFINITY,
        };
        let mut jump_times = Vec::new();
        let mut jump_centers = Vec::new();
        let mut rows = Vec::new();

        let evolve = |psi: &StateVector, dt: f64| -> Result<StateVector> {
            if dt == 0.0 {
                return Ok(psi.clone());
            }
            match h_spectrum {
                Some(s) => s.evolve(psi, dt),
                None => Ok(psi.clone()),
            }
        };

        for &t_rec in &record_times {
            while next_jump <= t_rec {
                psi = evolve(&psi, next_jump - t)?;
                t = next_jump;

                // jump: pick a center from the Born-mimicking mixture, smear
                let weights = collapse_spectrum.class_weights(&psi)?;
                let class = sample_categorical(&mut rng, &weights);
                let a_center = collapse_spectrum.class_eigenvalues()[class];
                let z: f64 = rng.sample(StandardNormal);
                let a0 = a_center + self.smearing * z;

                let mut coords = collapse_spectrum.coordinates(&psi)?;
                for (c, &a) in coords.iter_mut().zip(collapse_spectrum.eigenvalues()) {
                    let d = a - a0;
                    *c *= (-d * d / (4.0 * self.smearing * self.smearing)).exp();
                }
                psi = collapse_spectrum.from_coordinates(&coords)?.normalize()?;

                jump_times.push(t);
                jump_centers.push(a0);
                next_jump = t + gap.as_ref().expect("jump implies rate > 0").sample(&mut rng);
            }
            psi = evolve(&psi, t_rec - t)?;
            t = t_rec;
            rows.push(collapse_spectrum.class_weights(&psi)?);
        }

        let class_eigenvalues = collapse_spectrum.class_eigenvalues();
        let last_row = rows.last().expect("record grid is nonempty");
        let (final_class, collapsed) = classify(last_row, self.collapse_threshold);
        let final_amplitudes: Vec<Complex64> = last_row
            .iter()
            .map(|&w| Complex64::new(w.max(0.0).sqrt(), 0.0))
            .collect();
        let branch_classes: Vec<usize> = (0..class_eigenvalues.len()).collect();

        Ok(TrajectoryRecord {
            seed,
            times: record_times,
            noise: None,
            branch_weights: rows,
            branch_classes,
            class_eigenvalues,
            final_class,
            collapsed,
            final_amplitudes,
            final_state: Some(psi),
            jump_times,
            jump_centers,
            warnings: Vec::new(),
        })
    }

    /// Branch decomposition of the initial state, defining Born weights.
    pub fn spectral(&self) -> Result<SpectralState> {
        SpectralState::decompose(&self.psi0, &self.collapse_op, None)
    }
}

/// Single jump trajectory; see [`GrwSpec`] for the full-control variant.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_grw(
    psi0: &StateVector,
    hamiltonian: Option<&HermitianOperator>,
    collapse_op: &HermitianOperator,
    rate: f64,
    smearing: f64,
    t_final: f64,
    record_dt: f64,
    seed: u64,
) -> Result<TrajectoryRecord> {
    GrwSpec::new(
        psi0.clone(),
        hamiltonian.cloned(),
        collapse_op.clone(),
        rate,
        smearing,
        t_final,
        record_dt,
    )?
    .run(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemLayout;

    fn two_level_state(p0: f64) -> StateVector {
        StateVector::qubit(
            Complex64::new(p0.sqrt(), 0.0),
            Complex64::new((1.0 - p0).sqrt(), 0.0),
        )
        .unwrap()
    }

    fn z01() -> HermitianOperator {
        HermitianOperator::diagonal(SubsystemLayout::qubits(1).unwrap(), &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_rate_is_pure_unitary_evolution() {
        let psi0 = two_level_state(1.0);
        let h = HermitianOperator::pauli_x().scale(0.4);
        let record =
            trajectory_grw(&psi0, Some(&h), &z01(), 0.0, 0.1, 2.0, 0.5, 3).unwrap();
        assert!(record.jump_times.is_empty());
        let exact = eig(&h, None).evolve(&psi0, 2.0).unwrap();
        assert!(record.final_state.unwrap().max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn narrow_smearing_pins_one_class_after_the_first_jump() {
        let psi0 = two_level_state(0.5);
        let record =
            trajectory_grw(&psi0, None, &z01(), 2.0, 0.02, 5.0, 1.0, 11).unwrap();
        assert!(!record.jump_times.is_empty());
        assert!(record.collapsed);
        let w = record.final_class_weights();
        assert!(w[record.final_class] > 1.0 - 1e-9);
    }

    #[test]
    fn jump_counts_follow_the_poisson_mean() {
        let psi0 = two_level_state(0.5);
        let spec = GrwSpec::new(psi0, None, z01(), 1.0, 0.05, 10.0, 10.0).unwrap();
        let n = 2000usize;
        let mut total = 0usize;
        for seed in 0..n as u64 {
            total += spec.run(seed).unwrap().jump_times.len();
        }
        let mean = total as f64 / n as f64;
        let expected = 10.0;
        let tol = 3.0 * (expected / n as f64).sqrt();
        assert!(
            (mean - expected).abs() < tol,
            "jump count mean {mean} vs {expected} +- {tol}"
        );
    }

    #[test]
    fn jump_centers_sit_near_eigenvalues() {
        let psi0 = two_level_state(0.3);
        let record =
            trajectory_grw(&psi0, None, &z01(), 3.0, 0.05, 4.0, 1.0, 21).unwrap();
        for &c in &record.jump_centers {
            let near0 = c.abs() < 0.5;
            let near1 = (c - 1.0).abs() < 0.5;
            assert!(near0 || near1, "stray jump center {c}");
        }
    }

    #[test]
    fn parameter_validation() {
        let psi0 = two_level_state(0.5);
        assert!(GrwSpec::new(psi0.clone(), None, z01(), -1.0, 0.1, 1.0, 0.5).is_err());
        assert!(GrwSpec::new(psi0.clone(), None, z01(), 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(GrwSpec::new(psi0, None, z01(), 1.0, 0.1, 0.0, 0.5).is_err());
    }
}
