//! Experiment configuration: strict TOML with sections, unknown keys fatal.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;

use qcollapse_core::dynamics::{GrwSpec, SdeSpec, SpectralState, TrajectorySpec};
use qcollapse_core::hilbert::{HermitianOperator, StateVector, SubsystemLayout};
use qcollapse_core::phi::PhiBasisSpec;
use qcollapse_core::scenarios::{
    build_measurement_scenario, build_ready_state_variants, degenerate_pointer_scenario,
    environment_scenario, zeno_sde_spec, ReadyMode, ScenarioSpec,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dynamics: DynamicsKind,
    pub lambda: f64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    pub state: StateSection,
    pub time: TimeSection,
    #[serde(default)]
    pub collapse: Option<CollapseSection>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSection>,
    #[serde(default)]
    pub grw: Option<GrwSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum DynamicsKind {
    #[serde(rename = "csl-closed")]
    CslClosed,
    #[serde(rename = "csl-sde")]
    CslSde,
    #[serde(rename = "grw")]
    Grw,
}

impl DynamicsKind {
    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::CslClosed => "csl-closed",
            DynamicsKind::CslSde => "csl-sde",
            DynamicsKind::Grw => "grw",
        }
    }
}

/// Either a named scenario (with its parameters) or an inline state.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub scenario: Option<String>,
    pub alpha_sq: Option<f64>,
    pub n_env: Option<usize>,
    pub theta: Option<f64>,
    pub coupling: Option<f64>,
    pub dims: Option<Vec<usize>>,
    /// Complex amplitudes as `[re, im]` pairs.
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub grid: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub record_stride: Option<usize>,
    pub t_final: Option<f64>,
    pub record_dt: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSection {
    pub kind: CollapseKind,
    pub eigenvalues: Option<Vec<f64>>,
    pub phi_basis: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum CollapseKind {
    #[serde(rename = "diagonal")]
    Diagonal,
    #[serde(rename = "pauli-z")]
    PauliZ,
    #[serde(rename = "phi-basis")]
    PhiBasis,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub kind: HamiltonianKind,
    pub scale: Option<f64>,
    pub eigenvalues: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum HamiltonianKind {
    #[serde(rename = "pauli-x")]
    PauliX,
    #[serde(rename = "pauli-z")]
    PauliZ,
    #[serde(rename = "diagonal")]
    Diagonal,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrwSection {
    pub rate: f64,
    pub smearing: f64,
}

pub fn load_config(path: &std::path::Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn branch_amplitudes(alpha_sq: Option<f64>) -> Result<(Complex64, Complex64), CliError> {
    let a = alpha_sq.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&a) {
        return Err(cfg_err(format!("state.alpha_sq must lie in [0, 1], got {a}")));
    }
    Ok((
        Complex64::new(a.sqrt(), 0.0),
        Complex64::new((1.0 - a).sqrt(), 0.0),
    ))
}

/// Everything needed to execute and report one experiment.
pub struct PreparedRun {
    pub spec: TrajectorySpec,
    pub dynamics: DynamicsKind,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub output: PathBuf,
}

enum ResolvedState {
    /// Inline state or dense-scenario route.
    Dense {
        state: StateVector,
        collapse_op: Option<HermitianOperator>,
    },
    /// Branch-level route (environment scenario): closed form only.
    Spectral(SpectralState),
    /// Fully specified diffusive run (zeno scenario).
    Sde(SdeSpec),
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedRun, CliError> {
    if cfg.n_trajectories == 0 {
        return Err(cfg_err("n_trajectories must be at least 1"));
    }
    if !(cfg.lambda > 0.0) && cfg.dynamics != DynamicsKind::Grw {
        return Err(cfg_err(format!("lambda must be positive, got {}", cfg.lambda)));
    }
    if cfg.grw.is_some() && cfg.dynamics != DynamicsKind::Grw {
        return Err(cfg_err("the grw section only applies to dynamics = \"grw\""));
    }
    let resolved = resolve_state(cfg)?;
    let spec = build_spec(cfg, resolved)?;
    Ok(PreparedRun {
        spec,
        dynamics: cfg.dynamics,
        n_trajectories: cfg.n_trajectories,
        master_seed: cfg.master_seed,
        output: cfg.output.clone(),
    })
}

fn forbid(
    value_set: bool,
    key: &str,
    context: &str,
) -> Result<(), CliError> {
    if value_set {
        Err(cfg_err(format!("state.{key} does not apply to {context}")))
    } else {
        Ok(())
    }
}

fn resolve_state(cfg: &ExperimentConfig) -> Result<ResolvedState, CliError> {
    let s = &cfg.state;
    match (&s.scenario, &s.amplitudes) {
        (Some(_), Some(_)) => Err(cfg_err(
            "state.scenario and state.amplitudes are mutually exclusive",
        )),
        (None, None) => Err(cfg_err(
            "state needs either a scenario name or inline amplitudes",
        )),
        (None, Some(amps)) => {
            forbid(s.alpha_sq.is_some(), "alpha_sq", "inline states")?;
            forbid(s.n_env.is_some(), "n_env", "inline states")?;
            forbid(s.theta.is_some(), "theta", "inline states")?;
            forbid(s.coupling.is_some(), "coupling", "inline states")?;
            let dims = s
                .dims
                .clone()
                .ok_or_else(|| cfg_err("inline states need state.dims"))?;
            let layout = SubsystemLayout::new(dims)
                .map_err(|e| cfg_err(format!("state.dims: {e}")))?;
            let amplitudes: Vec<Complex64> = amps
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let state = StateVector::new(layout, amplitudes)
                .map_err(|e| cfg_err(format!("state.amplitudes: {e}")))?;
            if !state.is_normalized() {
                return Err(cfg_err(format!(
                    "inline state must be normalized, norm = {}",
                    state.norm()
                )));
            }
            let collapse_op = resolve_collapse(cfg, &state)?;
            Ok(ResolvedState::Dense {
                state,
                collapse_op: Some(collapse_op),
            })
        }
        (Some(name), None) => {
            forbid(s.dims.is_some(), "dims", "named scenarios")?;
            if cfg.collapse.is_some() {
                return Err(cfg_err(
                    "the collapse section does not apply to named scenarios (they carry their \
                     own collapse operator)",
                ));
            }
            resolve_scenario(cfg, name)
        }
    }
}

fn scenario_forbid_env(s: &StateSection, name: &str) -> Result<(), CliError> {
    forbid(
        s.n_env.is_some(),
        "n_env",
        &format!("scenario '{name}' (environment only)"),
    )?;
    forbid(
        s.theta.is_some(),
        "theta",
        &format!("scenario '{name}' (environment only)"),
    )
}

fn resolve_scenario(cfg: &ExperimentConfig, name: &str) -> Result<ResolvedState, CliError> {
    let s = &cfg.state;
    let dense_from =
        |scenario: ScenarioSpec| -> Result<ResolvedState, CliError> {
            let tracked = scenario
                .tracked_state()
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            match scenario.dense_collapse_op() {
                Some(op) => Ok(ResolvedState::Dense {
                    state: tracked,
                    collapse_op: Some(op.clone()),
                }),
                None => {
                    let spectral = scenario
                        .spectral_state()
                        .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
                    Ok(ResolvedState::Spectral(spectral))
                }
            }
        };

    match name {
        "measurement" | "measurement-observer" => {
            scenario_forbid_env(s, name)?;
            forbid(s.coupling.is_some(), "coupling", "this scenario")?;
            let (alpha, beta) = branch_amplitudes(s.alpha_sq)?;
            let scenario = build_measurement_scenario(alpha, beta, name == "measurement-observer")
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            dense_from(scenario)
        }
        "degenerate-pointer" => {
            scenario_forbid_env(s, name)?;
            forbid(s.coupling.is_some(), "coupling", "this scenario")?;
            let (alpha, beta) = branch_amplitudes(s.alpha_sq)?;
            let scenario = degenerate_pointer_scenario(alpha, beta)
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            let spectral = scenario
                .spectral_state()
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            Ok(ResolvedState::Spectral(spectral))
        }
        "environment" => {
            forbid(s.coupling.is_some(), "coupling", "this scenario")?;
            let (alpha, beta) = branch_amplitudes(s.alpha_sq)?;
            let n_env = s.n_env.unwrap_or(20);
            let theta = s.theta.unwrap_or(std::f64::consts::FRAC_PI_4);
            let scenario = environment_scenario(alpha, beta, n_env, theta, cfg.lambda)
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            let spectral = scenario
                .spectral()
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            Ok(ResolvedState::Spectral(spectral))
        }
        "ready-tracks-pointer" | "ready-tracks-superposition" | "ready-superposed" => {
            scenario_forbid_env(s, name)?;
            forbid(s.coupling.is_some(), "coupling", "this scenario")?;
            forbid(s.alpha_sq.is_some(), "alpha_sq", "the ready-state scenarios")?;
            let mode = match name {
                "ready-tracks-pointer" => ReadyMode::TracksPointer,
                "ready-tracks-superposition" => ReadyMode::TracksSuperposition,
                _ => ReadyMode::SuperposedReady,
            };
            let scenario = build_ready_state_variants(mode)
                .map_err(|e| cfg_err(format!("scenario '{name}': {e}")))?;
            dense_from(scenario)
        }
        "zeno" => {
            scenario_forbid_env(s, name)?;
            forbid(s.alpha_sq.is_some(), "alpha_sq", "the zeno scenario")?;
            if cfg.dynamics != DynamicsKind::CslSde {
                return Err(cfg_err("the zeno scenario requires dynamics = \"csl-sde\""));
            }
            let coupling = s.coupling.unwrap_or(0.25);
            let (dt, steps) = require_dt_steps(&cfg.time)?;
            let mut spec = zeno_sde_spec(coupling, cfg.lambda, dt, steps)
                .map_err(|e| cfg_err(format!("scenario 'zeno': {e}")))?;
            if let Some(stride) = cfg.time.record_stride {
                spec = spec.with_record_stride(stride);
            }
            Ok(ResolvedState::Sde(spec))
        }
        other => Err(cfg_err(format!(
            "unknown scenario '{other}'; run the scenarios subcommand for the list"
        ))),
    }
}

fn resolve_collapse(
    cfg: &ExperimentConfig,
    state: &StateVector,
) -> Result<HermitianOperator, CliError> {
    let section = cfg
        .collapse
        .as_ref()
        .ok_or_else(|| cfg_err("inline states need a collapse section"))?;
    let layout = state.layout().clone();
    match section.kind {
        CollapseKind::Diagonal => {
            let eigs = section
                .eigenvalues
                .as_ref()
                .ok_or_else(|| cfg_err("collapse.kind = \"diagonal\" needs collapse.eigenvalues"))?;
            forbid_key(section.phi_basis.is_some(), "collapse.phi_basis", "diagonal")?;
            HermitianOperator::diagonal(layout, eigs)
                .map_err(|e| cfg_err(format!("collapse.eigenvalues: {e}")))
        }
        CollapseKind::PauliZ => {
            forbid_key(section.eigenvalues.is_some(), "collapse.eigenvalues", "pauli-z")?;
            forbid_key(section.phi_basis.is_some(), "collapse.phi_basis", "pauli-z")?;
            if state.dim() != 2 {
                return Err(cfg_err("collapse.kind = \"pauli-z\" needs a single qubit"));
            }
            Ok(HermitianOperator::pauli_z())
        }
        CollapseKind::PhiBasis => {
            forbid_key(section.eigenvalues.is_some(), "collapse.eigenvalues", "phi-basis")?;
            let basis = section
                .phi_basis
                .as_deref()
                .ok_or_else(|| cfg_err("collapse.kind = \"phi-basis\" needs collapse.phi_basis"))?;
            let spec = match basis {
                "computational" => PhiBasisSpec::computational(layout)
                    .map_err(|e| cfg_err(format!("collapse.phi_basis: {e}")))?,
                "bell" => {
                    if state.dim() != 4 {
                        return Err(cfg_err(
                            "collapse.phi_basis = \"bell\" needs a two-qubit state",
                        ));
                    }
                    bell_basis(layout).map_err(|e| cfg_err(format!("collapse.phi_basis: {e}")))?
                }
                other => {
                    return Err(cfg_err(format!(
                        "unknown phi basis '{other}' (expected computational or bell)"
                    )))
                }
            };
            qcollapse_core::phi::build_phi_operator(&spec)
                .map_err(|e| cfg_err(format!("collapse operator: {e}")))
        }
    }
}

fn bell_basis(layout: SubsystemLayout) -> qcollapse_core::Result<PhiBasisSpec> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64| Complex64::new(re, 0.0);
    let states = vec![
        StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(r)])?,
        StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(-r)])?,
        StateVector::new(layout.clone(), vec![c(0.0), c(r), c(r), c(0.0)])?,
        StateVector::new(layout.clone(), vec![c(0.0), c(r), c(-r), c(0.0)])?,
    ];
    PhiBasisSpec::new(layout, states)
}

fn forbid_key(set: bool, key: &str, kind: &str) -> Result<(), CliError> {
    if set {
        Err(cfg_err(format!("{key} does not apply to collapse.kind = \"{kind}\"")))
    } else {
        Ok(())
    }
}

fn resolve_hamiltonian(
    cfg: &ExperimentConfig,
    state: &StateVector,
) -> Result<Option<HermitianOperator>, CliError> {
    let Some(section) = &cfg.hamiltonian else {
        return Ok(None);
    };
    let scale = section.scale.unwrap_or(1.0);
    let op = match section.kind {
        HamiltonianKind::PauliX => {
            if state.dim() != 2 {
                return Err(cfg_err("hamiltonian.kind = \"pauli-x\" needs a single qubit"));
            }
            HermitianOperator::pauli_x()
        }
        HamiltonianKind::PauliZ => {
            if state.dim() != 2 {
                return Err(cfg_err("hamiltonian.kind = \"pauli-z\" needs a single qubit"));
            }
            HermitianOperator::pauli_z()
        }
        HamiltonianKind::Diagonal => {
            let eigs = section.eigenvalues.as_ref().ok_or_else(|| {
                cfg_err("hamiltonian.kind = \"diagonal\" needs hamiltonian.eigenvalues")
            })?;
            HermitianOperator::diagonal(state.layout().clone(), eigs)
                .map_err(|e| cfg_err(format!("hamiltonian.eigenvalues: {e}")))?
        }
    };
    Ok(Some(op.scale(scale)))
}

fn require_grid(time: &TimeSection) -> Result<Vec<f64>, CliError> {
    for (set, key) in [
        (time.dt.is_some(), "dt"),
        (time.steps.is_some(), "steps"),
        (time.record_stride.is_some(), "record_stride"),
        (time.t_final.is_some(), "t_final"),
        (time.record_dt.is_some(), "record_dt"),
    ] {
        if set {
            return Err(cfg_err(format!(
                "time.{key} does not apply to csl-closed (use time.grid)"
            )));
        }
    }
    time.grid
        .clone()
        .ok_or_else(|| cfg_err("csl-closed needs time.grid"))
}

fn require_dt_steps(time: &TimeSection) -> Result<(f64, usize), CliError> {
    for (set, key) in [
        (time.grid.is_some(), "grid"),
        (time.t_final.is_some(), "t_final"),
        (time.record_dt.is_some(), "record_dt"),
    ] {
        if set {
            return Err(cfg_err(format!(
                "time.{key} does not apply to csl-sde (use time.dt and time.steps)"
            )));
        }
    }
    let dt = time.dt.ok_or_else(|| cfg_err("csl-sde needs time.dt"))?;
    let steps = time
        .steps
        .ok_or_else(|| cfg_err("csl-sde needs time.steps"))?;
    Ok((dt, steps))
}

fn require_grw_time(time: &TimeSection) -> Result<(f64, f64), CliError> {
    for (set, key) in [
        (time.grid.is_some(), "grid"),
        (time.dt.is_some(), "dt"),
        (time.steps.is_some(), "steps"),
        (time.record_stride.is_some(), "record_stride"),
    ] {
        if set {
            return Err(cfg_err(format!(
                "time.{key} does not apply to grw (use time.t_final and time.record_dt)"
            )));
        }
    }
    let t_final = time
        .t_final
        .ok_or_else(|| cfg_err("grw needs time.t_final"))?;
    let record_dt = time.record_dt.unwrap_or(t_final / 20.0);
    Ok((t_final, record_dt))
}

fn build_spec(cfg: &ExperimentConfig, resolved: ResolvedState) -> Result<TrajectorySpec, CliError> {
    match (cfg.dynamics, resolved) {
        (_, ResolvedState::Sde(spec)) => Ok(TrajectorySpec::Sde(spec)),
        (DynamicsKind::CslClosed, ResolvedState::Spectral(spectral)) => {
            let grid = require_grid(&cfg.time)?;
            if cfg.hamiltonian.is_some() {
                return Err(cfg_err("csl-closed does not accept a hamiltonian section"));
            }
            Ok(TrajectorySpec::Closed {
                spectral,
                lambda: cfg.lambda,
                grid,
                collapse_threshold: qcollapse_core::dynamics::COLLAPSE_THRESHOLD,
            })
        }
        (DynamicsKind::CslClosed, ResolvedState::Dense { state, collapse_op }) => {
            let grid = require_grid(&cfg.time)?;
            if cfg.hamiltonian.is_some() {
                return Err(cfg_err("csl-closed does not accept a hamiltonian section"));
            }
            let op = collapse_op.expect("dense route always carries an operator");
            let spectral = SpectralState::decompose(&state, &op, None)
                .map_err(|e| cfg_err(format!("collapse decomposition: {e}")))?;
            Ok(TrajectorySpec::Closed {
                spectral,
                lambda: cfg.lambda,
                grid,
                collapse_threshold: qcollapse_core::dynamics::COLLAPSE_THRESHOLD,
            })
        }
        (DynamicsKind::CslSde, ResolvedState::Dense { state, collapse_op }) => {
            let (dt, steps) = require_dt_steps(&cfg.time)?;
            let hamiltonian = resolve_hamiltonian(cfg, &state)?;
            let op = collapse_op.expect("dense route always carries an operator");
            let mut spec = SdeSpec::new(state, hamiltonian, op, cfg.lambda, dt, steps)
                .map_err(|e| cfg_err(format!("csl-sde: {e}")))?;
            if let Some(stride) = cfg.time.record_stride {
                spec = spec.with_record_stride(stride);
            }
            Ok(TrajectorySpec::Sde(spec))
        }
        (DynamicsKind::Grw, ResolvedState::Dense { state, collapse_op }) => {
            let (t_final, record_dt) = require_grw_time(&cfg.time)?;
            let grw = cfg
                .grw
                .as_ref()
                .ok_or_else(|| cfg_err("grw dynamics needs a grw section (rate, smearing)"))?;
            let hamiltonian = resolve_hamiltonian(cfg, &state)?;
            let op = collapse_op.expect("dense route always carries an operator");
            let spec = GrwSpec::new(
                state,
                hamiltonian,
                op,
                grw.rate,
                grw.smearing,
                t_final,
                record_dt,
            )
            .map_err(|e| cfg_err(format!("grw: {e}")))?;
            Ok(TrajectorySpec::Grw(spec))
        }
        (kind, ResolvedState::Spectral(_)) => Err(cfg_err(format!(
            "this scenario only supports dynamics = \"csl-closed\" (its collapse operator is \
             branch-level), got \"{}\"",
            kind.name()
        ))),
    }
}
