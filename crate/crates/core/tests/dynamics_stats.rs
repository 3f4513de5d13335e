//! Statistical checks of the trajectory machinery: Brownian-bridge marginals
//! against the exact law, method agreement at zero Hamiltonian, and the
//! determinism contract under different thread pools.

mod common;

use common::digest_f64s;
use num_complex::Complex64;
use qcollapse_core::dynamics::{
    run_ensemble, run_ensemble_records, trajectory_closed_spectral, SdeSpec, SpectralState,
    TrajectorySpec,
};
use qcollapse_core::hilbert::{HermitianOperator, StateVector, SubsystemLayout};
use qcollapse_core::stats::{chi_square_pvalue, contingency_chi_square};

fn two_branch(p0: f64) -> SpectralState {
    SpectralState::from_branches(
        vec![
            Complex64::new(p0.sqrt(), 0.0),
            Complex64::new((1.0 - p0).sqrt(), 0.0),
        ],
        vec![0.0, 1.0],
        vec![None, None],
    )
    .unwrap()
}

#[test]
fn bridge_marginals_follow_the_exact_gaussian_law() {
    // single eigenstate: B(t) ~ Normal(2*lambda*t*a, lambda*t) at every grid
    // point, interior values included (the bridge must reproduce the
    // unconditional marginal once the endpoint is integrated out)
    let spectral = SpectralState::from_branches(
        vec![Complex64::ONE],
        vec![0.7],
        vec![None],
    )
    .unwrap();
    let lambda = 1.3;
    let grid = [0.5, 1.0, 2.5, 4.0];
    let n = 20_000usize;
    let mut sums = [0.0f64; 4];
    let mut sq_sums = [0.0f64; 4];
    for seed in 0..n as u64 {
        let rec = trajectory_closed_spectral(&spectral, lambda, &grid, seed, 1e-6).unwrap();
        let noise = rec.noise.unwrap();
        for k in 0..grid.len() {
            let b = noise.value_at(k);
            sums[k] += b;
            sq_sums[k] += b * b;
        }
    }
    for (k, &t) in grid.iter().enumerate() {
        let mean = sums[k] / n as f64;
        let var = sq_sums[k] / n as f64 - mean * mean;
        let expected_mean = 2.0 * lambda * t * 0.7;
        let expected_var = lambda * t;
        let mean_tol = 4.0 * (expected_var / n as f64).sqrt();
        let var_tol = 5.0 * expected_var * (2.0 / n as f64).sqrt();
        assert!(
            (mean - expected_mean).abs() < mean_tol,
            "t={t}: mean {mean} vs {expected_mean} +- {mean_tol}"
        );
        assert!(
            (var - expected_var).abs() < var_tol,
            "t={t}: var {var} vs {expected_var} +- {var_tol}"
        );
    }
}

#[test]
fn diffusive_and_closed_form_outcomes_agree_at_zero_hamiltonian() {
    let n = 1500usize;
    let closed_spec = TrajectorySpec::Closed {
        spectral: two_branch(0.3),
        lambda: 1.0,
        grid: vec![4.0, 16.0],
        collapse_threshold: 1e-6,
    };
    let closed = run_ensemble(&closed_spec, n, 71).unwrap();

    let psi0 = StateVector::qubit(
        Complex64::new(0.3f64.sqrt(), 0.0),
        Complex64::new(0.7f64.sqrt(), 0.0),
    )
    .unwrap();
    let a01 = HermitianOperator::diagonal(SubsystemLayout::qubits(1).unwrap(), &[0.0, 1.0]).unwrap();
    let sde_spec = TrajectorySpec::Sde(
        SdeSpec::new(psi0, None, a01, 1.0, 2e-3, 8000)
            .unwrap()
            .with_record_stride(2000),
    );
    let sde = run_ensemble(&sde_spec, n, 72).unwrap();

    let (chi2, df) = contingency_chi_square(&closed.counts, &sde.counts);
    let p = chi_square_pvalue(chi2, df);
    assert!(
        p > 0.01,
        "method disagreement: chi2 {chi2:.3} (df {df}), p {p:.4}, counts {:?} vs {:?}",
        closed.counts,
        sde.counts
    );
}

#[test]
fn ensembles_are_identical_across_thread_pools() {
    let spec = TrajectorySpec::Closed {
        spectral: two_branch(0.3),
        lambda: 1.0,
        grid: vec![2.0, 8.0, 16.0],
        collapse_threshold: 1e-6,
    };
    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let run1 = pool1.install(|| run_ensemble_records(&spec, 300, 5).unwrap());
    let run4 = pool4.install(|| run_ensemble_records(&spec, 300, 5).unwrap());
    assert_eq!(run1, run4);

    let digest = |run: &qcollapse_core::dynamics::EnsembleRun| {
        digest_f64s(
            run.records
                .iter()
                .flat_map(|r| r.branch_weights.iter().flatten().copied()),
        )
    };
    assert_eq!(digest(&run1), digest(&run4));
}

#[test]
fn trajectory_failure_reports_the_index() {
    // an sde spec driven at an absurd step size produces non-finite
    // amplitudes; the ensemble error names the trajectory
    let psi0 = StateVector::qubit(
        Complex64::new(0.5f64.sqrt(), 0.0),
        Complex64::new(0.5f64.sqrt(), 0.0),
    )
    .unwrap();
    let a01 = HermitianOperator::diagonal(SubsystemLayout::qubits(1).unwrap(), &[0.0, 1e150])
        .unwrap();
    let spec = TrajectorySpec::Sde(SdeSpec::new(psi0, None, a01, 1e160, 1e3, 50).unwrap());
    let err = run_ensemble(&spec, 4, 1).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("trajectory"), "unexpected error: {msg}");
}
