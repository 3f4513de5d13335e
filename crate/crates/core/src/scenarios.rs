//! Named measurement setups: tracking apparatus/observer chains, environment
//! coupling, and observer architectures that track different bases.
//!
//! Conventions: pointer value 0 of a qubit is the "up"/plus branch, value 1
//! the "down"/minus branch; ready states are the 0 (respectively `e2`, see
//! [`build_ready_state_variants`]) basis states. Tracking maps are completed
//! to full unitaries controlled-copy style: outside the ready rows they copy
//! the control value into the target, which for qubits is a CNOT.

use num_complex::Complex64;

use crate::dynamics::{SpectralState, TrajectorySpec, COLLAPSE_THRESHOLD};
use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, StateVector, SubsystemLayout, UnitaryOperator};
use crate::phi::phi_max;

/// Integration scale of one resolved binary record: one bit, in nats.
pub const PHI_ONE_BIT: f64 = std::f64::consts::LN_2;

/// Collapse operator of a scenario: a dense matrix, or a designated branch
/// decomposition of the tracked state when the full space is too large to
/// materialize the operator.
#[derive(Debug, Clone)]
pub enum CollapseModel {
    Dense(HermitianOperator),
    /// Branch decomposition of the *tracked* state.
    Spectral(SpectralState),
}

/// A named experiment: initial state, the tracking unitary that entangles
/// apparatus (and observer) with the system, and a collapse model.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub layout: SubsystemLayout,
    pub initial_state: StateVector,
    pub tracking_unitary: UnitaryOperator,
    pub collapse: CollapseModel,
    pub lambda: f64,
}

impl ScenarioSpec {
    /// State after the tracking interaction.
    pub fn tracked_state(&self) -> Result<StateVector> {
        self.tracking_unitary.apply(&self.initial_state)
    }

    /// Branch decomposition of the tracked state against the collapse model.
    pub fn spectral_state(&self) -> Result<SpectralState> {
        match &self.collapse {
            CollapseModel::Dense(op) => SpectralState::decompose(&self.tracked_state()?, op, None),
            CollapseModel::Spectral(s) => Ok(s.clone()),
        }
    }

    /// Closed-form ensemble member on the given time grid.
    pub fn closed_spec(&self, grid: Vec<f64>) -> Result<TrajectorySpec> {
        Ok(TrajectorySpec::Closed {
            spectral: self.spectral_state()?,
            lambda: self.lambda,
            grid,
            collapse_threshold: COLLAPSE_THRESHOLD,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn dense_collapse_op(&self) -> Option<&HermitianOperator> {
        match &self.collapse {
            CollapseModel::Dense(op) => Some(op),
            CollapseModel::Spectral(_) => None,
        }
    }
}

fn check_branch_amplitudes(alpha: Complex64, beta: Complex64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(norm.sqrt()));
    }
    Ok(())
}

/// CNOT with `control` and `target` subsystem indices (both qubits).
fn cnot(layout: &SubsystemLayout, control: usize, target: usize) -> Result<UnitaryOperator> {
    layout.check_subsystems(&[control, target])?;
    let dim = layout.total_dim();
    let strides = layout.strides();
    let mut matrix = vec![Complex64::ZERO; dim * dim];
    for col in 0..dim {
        let c_bit = (col / strides[control]) % 2;
        let row = if c_bit == 1 {
            let t_bit = (col / strides[target]) % 2;
            if t_bit == 1 {
                col - strides[target]
            } else {
                col + strides[target]
            }
        } else {
            col
        };
        matrix[row * dim + col] = Complex64::ONE;
    }
    UnitaryOperator::new(layout.clone(), matrix)
}

/// Spin-measurement chain: a particle qubit in `alpha|0> + beta|1>`, an
/// apparatus in its ready state, optionally an observer in its ready state.
///
/// The tracking unitary copies the particle value into the apparatus and,
/// with an observer, the apparatus value into the observer, so the tracked
/// state is `alpha|00(0)> + beta|11(1)>`. The collapse operator reads the
/// last tracked subsystem in its pointer basis.
pub fn build_measurement_scenario(
    alpha: Complex64,
    beta: Complex64,
    with_observer: bool,
) -> Result<ScenarioSpec> {
    check_branch_amplitudes(alpha, beta)?;
    let names: Vec<String> = if with_observer {
        ["particle", "apparatus", "observer"]
            .map(String::from)
            .to_vec()
    } else {
        ["particle", "apparatus"].map(String::from).to_vec()
    };
    let n = names.len();
    let layout = SubsystemLayout::with_labels(vec![2; n], names)?;

    let particle = StateVector::qubit(alpha, beta)?;
    let ready = StateVector::qubit(Complex64::ONE, Complex64::ZERO)?;
    let factors: Vec<&StateVector> = std::iter::once(&particle)
        .chain(std::iter::repeat(&ready).take(n - 1))
        .collect();
    let initial_state = {
        let mut state = crate::hilbert::tensor(&factors)?;
        // carry the labeled layout
        state = StateVector::new(layout.clone(), state.amplitudes().to_vec())?;
        state
    };

    // copy particle -> apparatus, then apparatus -> observer
    let mut tracking = cnot(&layout, 0, 1)?;
    if with_observer {
        let second = cnot(&layout, 1, 2)?;
        tracking = compose(&second, &tracking)?;
    }

    let pointer = HermitianOperator::lift(&HermitianOperator::pauli_z(), &layout, n - 1)?;
    Ok(ScenarioSpec {
        name: if with_observer {
            "measurement-observer".into()
        } else {
            "measurement".into()
        },
        description: "tracking chain driven into a branch superposition, collapse on the last \
                      pointer"
            .into(),
        layout,
        initial_state,
        tracking_unitary: tracking,
        collapse: CollapseModel::Dense(pointer),
        lambda: 1.0,
    })
}

/// Matrix product `a * b` (apply `b` first).
fn compose(a: &UnitaryOperator, b: &UnitaryOperator) -> Result<UnitaryOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "composition of unitaries with dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let dim = a.dim();
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut out = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = ma[i * dim + k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * mb[k * dim + j];
            }
        }
    }
    UnitaryOperator::new(a.layout().clone(), out)
}

/// Measurement chain whose collapse operator assigns the *same* integration
/// value to both tracked branches.
///
/// The branch states are the two product pointer configurations; their
/// integration values come from [`phi_max`] and are equal by the symmetry of
/// the two computations, not by rounding. Under the closed-form flow the
/// branch weight ratio is then exactly conserved.
pub fn degenerate_pointer_scenario(alpha: Complex64, beta: Complex64) -> Result<ScenarioSpec> {
    check_branch_amplitudes(alpha, beta)?;
    let base = build_measurement_scenario(alpha, beta, true)?;
    let layout = base.layout.clone();
    let dim = layout.total_dim();

    let branch_plus = StateVector::basis_state(layout.clone(), 0)?;
    let branch_minus = StateVector::basis_state(layout.clone(), dim - 1)?;
    let phi_plus = phi_max(&branch_plus)?.phi;
    let phi_minus = phi_max(&branch_minus)?.phi;
    debug_assert_eq!(phi_plus, phi_minus, "product pointer branches integrate to 0");

    let spectral = SpectralState::from_branches(
        vec![alpha, beta],
        vec![phi_plus, phi_minus],
        vec![Some(branch_plus), Some(branch_minus)],
    )?;
    Ok(ScenarioSpec {
        name: "degenerate-pointer".into(),
        description: "equal collapse eigenvalues on both perception branches; the weight ratio \
                      is conserved"
            .into(),
        layout,
        initial_state: base.initial_state,
        tracking_unitary: base.tracking_unitary,
        collapse: CollapseModel::Spectral(spectral),
        lambda: base.lambda,
    })
}

/// Overlap of the two branch environment records: `cos(theta)^n`.
pub fn environment_overlap(n_env: usize, theta: f64) -> f64 {
    theta.cos().powi(n_env as i32)
}

/// Append `n_env` environment qubits to a branched state.
///
/// The branch is read off the designated pointer qubit: pointer value 0
/// leaves the environment in |0...0>, pointer value 1 rotates every
/// environment qubit to `cos(theta)|0> + sin(theta)|1>`, so the two
/// environment records overlap by `cos(theta)^n`. The norm is preserved.
pub fn couple_environment(
    state: &StateVector,
    pointer: usize,
    n_env: usize,
    theta: f64,
) -> Result<StateVector> {
    state.require_normalized()?;
    let layout = state.layout();
    layout.check_subsystems(&[pointer])?;
    if layout.dims()[pointer] != 2 {
        return Err(Error::InvalidScenario(
            "the pointer subsystem must be a qubit".into(),
        ));
    }
    if n_env == 0 {
        return Ok(state.clone());
    }
    let env_layout = SubsystemLayout::qubits(n_env)?;
    let new_layout = layout.concat(&env_layout)?; // checks the size limit

    let env_dim = 1usize << n_env;
    let (cos, sin) = (theta.cos(), theta.sin());
    let mut cos_pow = vec![1.0f64; n_env + 1];
    let mut sin_pow = vec![1.0f64; n_env + 1];
    for k in 1..=n_env {
        cos_pow[k] = cos_pow[k - 1] * cos;
        sin_pow[k] = sin_pow[k - 1] * sin;
    }

    let stride = layout.strides()[pointer];
    let mut out = vec![Complex64::ZERO; state.dim() * env_dim];
    for (i, &a) in state.amplitudes().iter().enumerate() {
        if a == Complex64::ZERO {
            continue;
        }
        let branch = (i / stride) % 2;
        if branch == 0 {
            out[i * env_dim] = a;
        } else {
            for e in 0..env_dim {
                let k = e.count_ones() as usize;
                out[i * env_dim + e] = a * cos_pow[n_env - k] * sin_pow[k];
            }
        }
    }
    StateVector::new(new_layout, out)
}

/// Measurement chain dressed with environment qubits, with collapse
/// eigenvalues split by the distinguishability of the environment records.
///
/// The dressed branches are orthogonal (their pointer cores already are), so
/// the closed-form flow runs exactly on two branches. Their integration
/// values are modeled as `ln 2 +- (ln 2 / 2) * (1 - overlap^2)`: identical
/// environment records (theta = 0) leave them structurally degenerate, and
/// nearly orthogonal records split them by close to one bit.
#[derive(Debug, Clone)]
pub struct EnvironmentScenario {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub n_env: usize,
    pub theta: f64,
    pub lambda: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

pub fn environment_scenario(
    alpha: Complex64,
    beta: Complex64,
    n_env: usize,
    theta: f64,
    lambda: f64,
) -> Result<EnvironmentScenario> {
    check_branch_amplitudes(alpha, beta)?;
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let overlap = environment_overlap(n_env, theta);
    let split = PHI_ONE_BIT * (1.0 - overlap * overlap);
    Ok(EnvironmentScenario {
        alpha,
        beta,
        n_env,
        theta,
        lambda,
        phi_plus: PHI_ONE_BIT + 0.5 * split,
        phi_minus: PHI_ONE_BIT - 0.5 * split,
    })
}

impl EnvironmentScenario {
    pub fn overlap(&self) -> f64 {
        environment_overlap(self.n_env, self.theta)
    }

    /// Collapse eigenvalue separation between the dressed branches.
    pub fn phi_split(&self) -> f64 {
        self.phi_plus - self.phi_minus
    }

    /// Two-branch decomposition of the dressed tracked state.
    pub fn spectral(&self) -> Result<SpectralState> {
        SpectralState::from_branches(
            vec![self.alpha, self.beta],
            vec![self.phi_plus, self.phi_minus],
            vec![None, None],
        )
    }

    /// Dense dressed state (refused beyond the materialization limit).
    pub fn dressed_state(&self) -> Result<StateVector> {
        let base = build_measurement_scenario(self.alpha, self.beta, true)?;
        let tracked = base.tracked_state()?;
        couple_environment(&tracked, 2, self.n_env, self.theta)
    }

    pub fn closed_spec(&self, grid: Vec<f64>) -> Result<TrajectorySpec> {
        Ok(TrajectorySpec::Closed {
            spectral: self.spectral()?,
            lambda: self.lambda,
            grid,
            collapse_threshold: COLLAPSE_THRESHOLD,
        })
    }

    /// Time at which `lambda * t * (phi split)^2` reaches the given target.
    pub fn time_for_suppression(&self, target: f64) -> f64 {
        let split = self.phi_split();
        target / (self.lambda * split * split)
    }
}

/// Observer architectures for the ready-state variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadyMode {
    /// Ready state `|R> = e0`; the observer copies the apparatus pointer and
    /// ends entangled with it.
    TracksPointer,
    /// Ready state `|R*> = e2`; the observer is inert under the tracking
    /// interaction and keeps a definite perception of the apparatus
    /// superposition. (`|R*>` coincides with the perception state `e2`; its
    /// action on non-superposed inputs is the same, which is our choice of
    /// completion.)
    TracksSuperposition,
    /// Ready state `(|R> + |R*>)/sqrt(2)`; collapse then selects which basis
    /// gets tracked, each with weight one half.
    SuperposedReady,
}

/// Observer with two available ready states over a three-level perception
/// space: `e0`/`e1` are the plus/minus pointer perceptions (the pointer-
/// tracking ready state is `e0`), `e2` is the perception of the apparatus
/// superposition and doubles as the superposition-tracking ready state.
///
/// A qubit observer cannot host both architectures with orthogonal ready
/// states: unitarity would force the superposition perception to be
/// orthogonal to both pointer perceptions, which needs a third dimension.
///
/// The apparatus+particle input is the entangled `(|00> + |11>)/sqrt(2)`;
/// the tracking unitary flips `e0 <-> e1` controlled on the apparatus
/// pointer and leaves `e2` alone. The collapse operator assigns 0 to the
/// pointer-perception sector and one bit to the `e2` sector, so a superposed
/// ready state collapses onto one architecture or the other with equal
/// weights.
pub fn build_ready_state_variants(mode: ReadyMode) -> Result<ScenarioSpec> {
    let layout = SubsystemLayout::with_labels(
        vec![2, 2, 3],
        ["particle", "apparatus", "observer"]
            .map(String::from)
            .to_vec(),
    )?;
    let dim = layout.total_dim();
    let r = std::f64::consts::FRAC_1_SQRT_2;

    // index (p, M, O) = 6p + 3M + O
    let idx = |p: usize, m: usize, o: usize| 6 * p + 3 * m + o;

    let mut amplitudes = vec![Complex64::ZERO; dim];
    let half = Complex64::new(r, 0.0);
    match mode {
        ReadyMode::TracksPointer => {
            amplitudes[idx(0, 0, 0)] = half;
            amplitudes[idx(1, 1, 0)] = half;
        }
        ReadyMode::TracksSuperposition => {
            amplitudes[idx(0, 0, 2)] = half;
            amplitudes[idx(1, 1, 2)] = half;
        }
        ReadyMode::SuperposedReady => {
            let quarter = Complex64::new(0.5, 0.0);
            amplitudes[idx(0, 0, 0)] = quarter;
            amplitudes[idx(1, 1, 0)] = quarter;
            amplitudes[idx(0, 0, 2)] = quarter;
            amplitudes[idx(1, 1, 2)] = quarter;
        }
    }
    let initial_state = StateVector::new(layout.clone(), amplitudes)?;

    // controlled perception update: apparatus pointer 1 swaps e0 <-> e1,
    // e2 is untouched in both sectors
    let mut matrix = vec![Complex64::ZERO; dim * dim];
    for p in 0..2 {
        for m in 0..2 {
            for o in 0..3 {
                let col = idx(p, m, o);
                let row = if m == 1 && o < 2 { idx(p, m, 1 - o) } else { col };
                matrix[row * dim + col] = Complex64::ONE;
            }
        }
    }
    let tracking = UnitaryOperator::new(layout.clone(), matrix)?;

    // one bit of integration on the superposition-perception sector
    let values: Vec<f64> = (0..dim)
        .map(|i| if i % 3 == 2 { PHI_ONE_BIT } else { 0.0 })
        .collect();
    let collapse = HermitianOperator::diagonal(layout.clone(), &values)?;

    let (name, description) = match mode {
        ReadyMode::TracksPointer => (
            "ready-tracks-pointer",
            "observer copies the apparatus pointer and ends in a branch superposition",
        ),
        ReadyMode::TracksSuperposition => (
            "ready-tracks-superposition",
            "observer keeps a definite perception of the apparatus superposition",
        ),
        ReadyMode::SuperposedReady => (
            "ready-superposed",
            "superposition of the two ready states; collapse randomizes the tracked basis",
        ),
    };
    Ok(ScenarioSpec {
        name: name.into(),
        description: description.into(),
        layout,
        initial_state,
        tracking_unitary: tracking,
        collapse: CollapseModel::Dense(collapse),
        lambda: 1.0,
    })
}

/// Competition between a pointer-diagonal collapse operator and an
/// off-diagonal drive `H = coupling * sigma_x`, starting from the 0
/// eigenstate. Strong collapse freezes the eigenstate; weak collapse lets
/// the drive swing the population.
pub fn zeno_sde_spec(
    coupling: f64,
    lambda: f64,
    dt: f64,
    n_steps: usize,
) -> Result<crate::dynamics::SdeSpec> {
    let psi0 = StateVector::qubit(Complex64::ONE, Complex64::ZERO)?;
    let collapse_op =
        HermitianOperator::diagonal(SubsystemLayout::qubits(1)?, &[0.0, 1.0])?;
    let hamiltonian = HermitianOperator::pauli_x().scale(coupling);
    crate::dynamics::SdeSpec::new(psi0, Some(hamiltonian), collapse_op, lambda, dt, n_steps)
}

/// Names and one-line descriptions of the scenarios addressable by name.
pub fn scenario_catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "measurement",
            "particle + apparatus tracking chain, collapse on the apparatus pointer",
        ),
        (
            "measurement-observer",
            "particle + apparatus + observer chain, collapse on the observer pointer",
        ),
        (
            "degenerate-pointer",
            "equal collapse eigenvalues on both branches; weight ratio conserved",
        ),
        (
            "environment",
            "branches dressed with environment qubits; record distinguishability splits the \
             collapse eigenvalues",
        ),
        (
            "ready-tracks-pointer",
            "observer architecture that tracks the pointer basis",
        ),
        (
            "ready-tracks-superposition",
            "observer architecture that tracks the superposition as a whole",
        ),
        (
            "ready-superposed",
            "superposed ready states; collapse selects the tracked basis 50/50",
        ),
        (
            "zeno",
            "diagonal collapse against an off-diagonal drive (strong collapse freezes, weak \
             collapse oscillates)",
        ),
    ]
}
