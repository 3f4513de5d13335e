//! Dense complex linear algebra over small tensor-product Hilbert spaces.
//!
//! Basis indexing is row-major in subsystem order: subsystem 0 is the most
//! significant digit, so for a qubit pair the basis order is
//! |00>, |01>, |10>, |11>. All types are immutable values after construction
//! and safe to share across trajectory workers.

mod density;
mod operator;
mod state;

pub use density::{partial_trace, DensityMatrix};
pub use operator::{
    default_degeneracy_tol, eig, expectation, HermitianOperator, Spectrum, UnitaryOperator,
};
pub use state::{tensor, StateVector};

use crate::error::{Error, Result};

/// Dense state vectors larger than this are refused (2^23 amplitudes,
/// 128 MiB of Complex64). Operators are capped much lower, see
/// [`OPERATOR_DIM_LIMIT`].
pub const STATE_DIM_LIMIT: usize = 1 << 23;

/// Dense square matrices beyond this order are refused.
pub const OPERATOR_DIM_LIMIT: usize = 1 << 12;

/// Absolute tolerance for norm and Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const UNITARITY_TOL: f64 = 1e-12;

/// Ordered list of local dimensions of a tensor-product space, with optional
/// per-subsystem names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyLayout);
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::DimensionTooSmall(d));
        }
        let total: usize = dims.iter().product();
        if total > STATE_DIM_LIMIT {
            return Err(Error::DimensionTooLarge {
                dim: total,
                limit: STATE_DIM_LIMIT,
            });
        }
        Ok(Self { dims, labels: None })
    }

    pub fn with_labels(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                dims.len()
            )));
        }
        let mut layout = Self::new(dims)?;
        layout.labels = Some(labels);
        Ok(layout)
    }

    /// Layout of `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one subsystem by construction
    }

    /// Product of the local dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Stride of each subsystem in the flat basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat index of a multi-index.
    pub fn index_of(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        let strides = self.strides();
        multi.iter().zip(&strides).map(|(&m, &s)| m * s).sum()
    }

    /// Multi-index of a flat basis index.
    pub fn multi_of(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut multi = vec![0usize; self.dims.len()];
        for (k, &s) in strides.iter().enumerate() {
            multi[k] = index / s;
            index %= s;
        }
        multi
    }

    /// Concatenation of two layouts, as produced by a tensor product.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => {
                let mut l = a.clone();
                l.extend_from_slice(b);
                Some(l)
            }
            _ => None,
        };
        let mut layout = Self::new(dims)?;
        layout.labels = labels;
        Ok(layout)
    }

    /// Layout restricted to the given (sorted) subsystem indices.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&k| l[k].clone()).collect());
        let mut layout = Self::new(dims)?;
        layout.labels = labels;
        Ok(layout)
    }

    /// True when the flat dimensions match; labels are ignored.
    pub fn compatible(&self, other: &Self) -> bool {
        self.dims == other.dims
    }

    pub(crate) fn check_subsystems(&self, subsystems: &[usize]) -> Result<()> {
        for &s in subsystems {
            if s >= self.len() {
                return Err(Error::SubsystemOutOfRange(s, self.len()));
            }
        }
        Ok(())
    }
}

/// Compensated (Kahan) summation; keeps norm checks accurate for states with
/// millions of amplitudes.
pub(crate) fn kahan_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}
