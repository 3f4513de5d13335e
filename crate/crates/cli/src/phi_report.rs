//! The `phi` subcommand: per-grain integration rows and the whole-system
//! value for a state given inline or by name.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use qcollapse_core::hilbert::{tensor, StateVector, SubsystemLayout};
use qcollapse_core::phi::{enumerate_grains, min_bipartition_entropy, phi_max};

use crate::table::fmt_f64;
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    state: StateSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSpec {
    named: Option<String>,
    dims: Option<Vec<usize>>,
    amplitudes: Option<Vec<[f64; 2]>>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn named_state(name: &str) -> Result<StateVector, CliError> {
    let bell = StateVector::bell_pair();
    match name {
        "bell" => Ok(bell),
        "ghz3" => StateVector::ghz(3).map_err(|e| cfg_err(e.to_string())),
        "ghz4" => StateVector::ghz(4).map_err(|e| cfg_err(e.to_string())),
        "w3" => StateVector::w_state(3).map_err(|e| cfg_err(e.to_string())),
        "bell-pairs" => tensor(&[&bell, &bell]).map_err(|e| cfg_err(e.to_string())),
        "product2" | "product3" => {
            let n = if name == "product2" { 2 } else { 3 };
            let q = StateVector::qubit(
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, 0.8),
            )
            .map_err(|e| cfg_err(e.to_string()))?;
            let factors: Vec<&StateVector> = std::iter::repeat(&q).take(n).collect();
            tensor(&factors).map_err(|e| cfg_err(e.to_string()))
        }
        other => Err(cfg_err(format!(
            "unknown named state '{other}' (expected bell, ghz3, ghz4, w3, bell-pairs, \
             product2, product3)"
        ))),
    }
}

fn load_state(path: &Path) -> Result<StateVector, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
    let file: StateFile =
        toml::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    let spec = file.state;
    match (&spec.named, &spec.amplitudes) {
        (Some(_), Some(_)) => Err(cfg_err(
            "state.named and state.amplitudes are mutually exclusive",
        )),
        (None, None) => Err(cfg_err("state needs either a name or inline amplitudes")),
        (Some(name), None) => {
            if spec.dims.is_some() {
                return Err(cfg_err("state.dims does not apply to named states"));
            }
            named_state(name)
        }
        (None, Some(amps)) => {
            let dims = spec
                .dims
                .clone()
                .ok_or_else(|| cfg_err("inline states need state.dims"))?;
            let layout =
                SubsystemLayout::new(dims).map_err(|e| cfg_err(format!("state.dims: {e}")))?;
            let amplitudes: Vec<Complex64> = amps
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let state = StateVector::new(layout, amplitudes)
                .map_err(|e| cfg_err(format!("state.amplitudes: {e}")))?;
            if !state.is_normalized() {
                return Err(cfg_err(format!(
                    "state must be normalized, norm = {}",
                    state.norm()
                )));
            }
            Ok(state)
        }
    }
}

pub fn report(path: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let state = load_state(path)?;
    let layout = state.layout().clone();

    let mut csv = String::from("kind,grain,min_bipartition,phi\n");
    println!(
        "{:<10} {:<22} {:<22} {}",
        "kind", "grain", "min_bipartition", "phi"
    );

    for grain in enumerate_grains(&layout) {
        let result =
            min_bipartition_entropy(&state, &grain).map_err(|e| cfg_err(e.to_string()))?;
        let cut = result
            .minimizing_bipartition
            .as_ref()
            .expect("grain route always reports a cut")
            .describe(&grain);
        println!("{:<10} {:<22} {:<22} {:.12}", "grain", grain.to_string(), cut, result.phi);
        let _ = writeln!(csv, "grain,{},{},{}", grain, cut, fmt_f64(result.phi));
    }

    let whole = phi_max(&state).map_err(|e| cfg_err(e.to_string()))?;
    let (grain_text, cut_text) = match (&whole.maximizing_grain, &whole.minimizing_bipartition) {
        (Some(grain), Some(cut)) => (grain.to_string(), cut.describe(grain)),
        _ => ("-".into(), "-".into()),
    };
    println!(
        "{:<10} {:<22} {:<22} {:.12}",
        "phi_max", grain_text, cut_text, whole.phi
    );
    let _ = writeln!(csv, "phi_max,{},{},{}", grain_text, cut_text, fmt_f64(whole.phi));

    if let Some(out) = output {
        std::fs::write(out, csv)
            .map_err(|e| cfg_err(format!("cannot write {}: {e}", out.display())))?;
        println!("report written to {}", out.display());
    }
    Ok(())
}
