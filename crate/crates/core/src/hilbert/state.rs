use num_complex::Complex64;

use super::{kahan_sum, SubsystemLayout, NORM_TOL};
use crate::error::{Error, Result};

/// Complex amplitude vector over a tensor-product layout.
///
/// The `normalized` flag is set at construction when the Euclidean norm is 1
/// within `NORM_TOL`; operations with a normalization precondition check it.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: SubsystemLayout,
    normalized: bool,
}

impl StateVector {
    pub fn new(layout: SubsystemLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::LengthMismatch {
                got: amplitudes.len(),
                expected: layout.total_dim(),
            });
        }
        let mut state = Self {
            amplitudes,
            layout,
            normalized: false,
        };
        state.normalized = (state.norm() - 1.0).abs() <= NORM_TOL;
        Ok(state)
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Self::new(layout, amplitudes)
    }

    /// Single qubit `alpha|0> + beta|1>`.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(SubsystemLayout::qubits(1)?, vec![alpha, beta])
    }

    /// Bell pair (|00> + |11>)/sqrt(2).
    pub fn bell_pair() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            SubsystemLayout::qubits(2).unwrap(),
            vec![
                Complex64::new(r, 0.0),
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::new(r, 0.0),
            ],
        )
        .unwrap()
    }

    /// n-qubit GHZ state (|0...0> + |1...1>)/sqrt(2), n >= 2.
    pub fn ghz(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let layout = SubsystemLayout::qubits(n)?;
        let dim = layout.total_dim();
        let mut amplitudes = vec![Complex64::ZERO; dim];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        amplitudes[0] = Complex64::new(r, 0.0);
        amplitudes[dim - 1] = Complex64::new(r, 0.0);
        Self::new(layout, amplitudes)
    }

    /// n-qubit W state, the equal superposition of single-excitation states.
    pub fn w_state(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let layout = SubsystemLayout::qubits(n)?;
        let mut amplitudes = vec![Complex64::ZERO; layout.total_dim()];
        let r = 1.0 / (n as f64).sqrt();
        for k in 0..n {
            amplitudes[1 << (n - 1 - k)] = Complex64::new(r, 0.0);
        }
        Self::new(layout, amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        kahan_sum(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescaled copy with unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        let inv = 1.0 / n;
        let amplitudes = self.amplitudes.iter().map(|a| a * inv).collect();
        Self::new(self.layout.clone(), amplitudes)
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm()))
        }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let re = kahan_sum(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| (a.conj() * b).re),
        );
        let im = kahan_sum(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| (a.conj() * b).im),
        );
        Ok(Complex64::new(re, im))
    }

    /// Squared overlap `|<self|other>|^2`.
    pub fn overlap_sqr(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let amplitudes = self.amplitudes.iter().map(|a| a * factor).collect();
        Self::new(self.layout.clone(), amplitudes).unwrap()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.layout.clone(), amplitudes)
    }

    /// Largest entrywise distance to another state.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance up to a global phase: `min_phi || self - e^{i phi} other ||_inf`.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        let ip = match self.inner(other) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        if ip.norm() == 0.0 {
            return self.max_abs_diff(other);
        }
        let phase = ip / ip.norm();
        let rotated = other.scale(phase.conj());
        self.max_abs_diff(&rotated)
    }
}

/// Kronecker product of states in factor order.
///
/// The result layout is the concatenation of the factor layouts; a product of
/// normalized factors is normalized.
pub fn tensor(factors: &[&StateVector]) -> Result<StateVector> {
    if factors.is_empty() {
        return Err(Error::EmptyTensorFactors);
    }
    for f in factors {
        f.require_normalized()?;
    }
    let mut amplitudes = vec![Complex64::ONE];
    let mut layout = factors[0].layout.clone();
    amplitudes = kron(&amplitudes, factors[0].amplitudes());
    for f in &factors[1..] {
        layout = layout.concat(f.layout())?;
        amplitudes = kron(&amplitudes, f.amplitudes());
    }
    StateVector::new(layout, amplitudes)
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}
