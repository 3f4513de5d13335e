//! Machine-readable output: one CSV row per (trajectory, grid time) plus a
//! TOML summary next to it. Floating-point fields carry 17 significant
//! digits so files are faithful to the bits that produced them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qcollapse_core::dynamics::{EnsembleRun, TrajectoryRecord};
use qcollapse_core::stats::EnsembleStats;

use crate::CliError;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// The noise column: Brownian value for the continuous models, the most
/// recent jump center (nan before the first jump) for jump dynamics.
fn noise_column(record: &TrajectoryRecord, k: usize, t: f64) -> f64 {
    if let Some(noise) = &record.noise {
        return noise.value_at(k);
    }
    let mut latest = f64::NAN;
    for (jt, jc) in record.jump_times.iter().zip(&record.jump_centers) {
        if *jt <= t {
            latest = *jc;
        } else {
            break;
        }
    }
    latest
}

/// Header plus trajectories x grid rows, ordered by trajectory index.
pub fn render_csv(run: &EnsembleRun) -> String {
    let n_classes = run.stats.born_probabilities.len();
    let mut out = String::new();
    out.push_str("trajectory,time");
    for k in 0..n_classes {
        let _ = write!(out, ",w{k}");
    }
    out.push_str(",noise,outcome\n");

    for (idx, record) in run.records.iter().enumerate() {
        let outcome = record
            .outcome()
            .map(|c| c.to_string())
            .unwrap_or_default();
        for (k, &t) in record.times.iter().enumerate() {
            let _ = write!(out, "{idx},{}", fmt_f64(t));
            for w in record.class_weights_at(k) {
                let _ = write!(out, ",{}", fmt_f64(w));
            }
            let _ = writeln!(out, ",{},{}", fmt_f64(noise_column(record, k, t)), outcome);
        }
    }
    out
}

pub fn render_summary(stats: &EnsembleStats, dynamics: &str, master_seed: u64) -> String {
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|&v| fmt_f64(v))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let counts = stats
        .counts
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "dynamics = \"{dynamics}\"\n\
         master_seed = {master_seed}\n\
         n_trajectories = {}\n\
         n_collapsed = {}\n\
         class_eigenvalues = [{}]\n\
         counts = [{counts}]\n\
         empirical_probabilities = [{}]\n\
         born_probabilities = [{}]\n\
         chi_square = {}\n\
         chi_square_p_value = {}\n",
        stats.n_trajectories,
        stats.n_collapsed,
        join(&stats.class_eigenvalues),
        join(&stats.empirical_probabilities),
        join(&stats.born_probabilities),
        fmt_f64(stats.chi_square),
        fmt_f64(stats.p_value()),
    )
}

pub fn summary_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".summary.toml");
    PathBuf::from(name)
}

pub fn write_outputs(
    run: &EnsembleRun,
    dynamics: &str,
    master_seed: u64,
    output: &Path,
) -> Result<(), CliError> {
    let csv = render_csv(run);
    std::fs::write(output, csv)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", output.display())))?;
    let summary = render_summary(&run.stats, dynamics, master_seed);
    let spath = summary_path(output);
    std::fs::write(&spath, summary)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", spath.display())))?;
    Ok(())
}
