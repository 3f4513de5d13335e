//! Outcome statistics for trajectory ensembles.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dynamics::TrajectoryRecord;

/// Aggregate outcome statistics of an ensemble, per eigenvalue class.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_trajectories: usize,
    /// Trajectories whose dominant final class is k (every trajectory counts,
    /// collapsed or not).
    pub counts: Vec<u64>,
    /// Trajectories whose dominant weight passed the collapse threshold.
    pub n_collapsed: usize,
    pub empirical_probabilities: Vec<f64>,
    pub born_probabilities: Vec<f64>,
    /// Goodness-of-fit statistic of `counts` against the Born weights.
    pub chi_square: f64,
    pub class_eigenvalues: Vec<f64>,
}

impl EnsembleStats {
    pub fn from_records(
        records: &[TrajectoryRecord],
        born_probabilities: Vec<f64>,
        class_eigenvalues: Vec<f64>,
    ) -> Self {
        let n_classes = born_probabilities.len();
        let mut counts = vec![0u64; n_classes];
        let mut n_collapsed = 0usize;
        for r in records {
            counts[r.final_class] += 1;
            if r.collapsed {
                n_collapsed += 1;
            }
        }
        let n = records.len();
        let empirical_probabilities: Vec<f64> =
            counts.iter().map(|&c| c as f64 / n as f64).collect();
        let chi_square = chi_square_gof(&counts, &born_probabilities);
        Self {
            n_trajectories: n,
            counts,
            n_collapsed,
            empirical_probabilities,
            born_probabilities,
            chi_square,
            class_eigenvalues,
        }
    }

    /// Degrees of freedom of the goodness-of-fit test: populated Born classes
    /// minus one.
    pub fn degrees_of_freedom(&self) -> usize {
        self.born_probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .count()
            .saturating_sub(1)
    }

    /// Upper-tail p-value of the goodness-of-fit statistic.
    pub fn p_value(&self) -> f64 {
        chi_square_pvalue(self.chi_square, self.degrees_of_freedom())
    }
}

/// Pearson goodness-of-fit statistic. Classes with zero Born weight and zero
/// observations contribute nothing; observations on a zero-weight class give
/// infinity.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut chi2 = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = n as f64 * p;
        if expected > 0.0 {
            let d = c as f64 - expected;
            chi2 += d * d / expected;
        } else if c > 0 {
            return f64::INFINITY;
        }
    }
    chi2
}

/// Upper-tail probability of a chi-square variable.
pub fn chi_square_pvalue(chi2: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if !chi2.is_finite() {
        return 0.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(chi2)).clamp(0.0, 1.0)
}

/// Two-sample contingency test on outcome counts; returns the statistic and
/// its degrees of freedom. Classes empty in both samples are dropped.
pub fn contingency_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    assert_eq!(a.len(), b.len(), "count vectors must align");
    let total_a: u64 = a.iter().sum();
    let total_b: u64 = b.iter().sum();
    let total = (total_a + total_b) as f64;
    let mut chi2 = 0.0;
    let mut populated = 0usize;
    for (&ca, &cb) in a.iter().zip(b) {
        let col = (ca + cb) as f64;
        if col == 0.0 {
            continue;
        }
        populated += 1;
        for (c, row_total) in [(ca, total_a), (cb, total_b)] {
            let expected = row_total as f64 * col / total;
            if expected > 0.0 {
                let d = c as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    (chi2, populated.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_is_zero_on_exact_agreement() {
        assert_eq!(chi_square_gof(&[30, 70], &[0.3, 0.7]), 0.0);
        assert!(chi_square_gof(&[35, 65], &[0.3, 0.7]) > 0.0);
        assert!(chi_square_gof(&[1, 99], &[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn pvalue_matches_known_quantile() {
        // chi2 = 3.841 at df 1 is the 95% quantile
        let p = chi_square_pvalue(3.841, 1);
        assert!((p - 0.05).abs() < 1e-3, "p = {p}");
        assert_eq!(chi_square_pvalue(f64::INFINITY, 2), 0.0);
    }

    #[test]
    fn contingency_on_identical_samples_is_zero() {
        let (chi2, df) = contingency_chi_square(&[40, 60], &[40, 60]);
        assert_eq!(chi2, 0.0);
        assert_eq!(df, 1);
    }

    #[test]
    fn contingency_detects_disagreement() {
        let (chi2, df) = contingency_chi_square(&[90, 10], &[10, 90]);
        assert_eq!(df, 1);
        assert!(chi_square_pvalue(chi2, df) < 1e-6);
    }
}
