use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{kahan_sum, StateVector, SubsystemLayout, HERMITICITY_TOL};
use crate::error::{Error, Result};

/// Dense density matrix over a tensor-product layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Vec<Complex64>, // row-major dim x dim
    dim: usize,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    pub fn new(layout: SubsystemLayout, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.len() != dim * dim {
            return Err(Error::LengthMismatch {
                got: matrix.len(),
                expected: dim * dim,
            });
        }
        Ok(Self {
            matrix,
            dim,
            layout,
        })
    }

    /// Projector |psi><psi| of a normalized pure state.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        state.require_normalized()?;
        let dim = state.dim();
        let a = state.amplitudes();
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                matrix[i * dim + j] = a[i] * a[j].conj();
            }
        }
        Self::new(state.layout().clone(), matrix)
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[i * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn trace(&self) -> Complex64 {
        let re = kahan_sum((0..self.dim).map(|i| self.entry(i, i).re));
        let im = kahan_sum((0..self.dim).map(|i| self.entry(i, i).im));
        Complex64::new(re, im)
    }

    /// Tr rho^2; equals 1 for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                // Tr rho^2 = sum_{ij} |rho_ij|^2 for Hermitian rho
                acc += self.entry(i, j).norm_sqr();
            }
        }
        acc
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j));
        let mut vals: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Von Neumann entropy -Tr rho ln rho in nats. Tiny negative eigenvalues
    /// from floating point are clamped to zero.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
            .sum()
    }

    /// Checks the density-matrix invariants: Hermitian and unit trace within
    /// 1e-12, eigenvalues >= -1e-12. Returns the worst violations.
    pub fn validate(&self) -> Result<()> {
        let mut herm = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                herm = herm.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "trace",
                requirement: "1 within 1e-12",
                value: tr.re,
            });
        }
        let min_eig = self
            .eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -1e-12 {
            return Err(Error::InvalidParameter {
                name: "min eigenvalue",
                requirement: ">= -1e-12",
                value: min_eig,
            });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Reduction to a subset of subsystems.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (keep, kept_layout, kept_offsets, traced_offsets) =
            trace_tables(&self.layout, keep)?;
        let _ = keep;
        let dk = kept_layout.total_dim();
        let mut out = vec![Complex64::ZERO; dk * dk];
        for (ik, &ioff) in kept_offsets.iter().enumerate() {
            for (jk, &joff) in kept_offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for &toff in &traced_offsets {
                    acc += self.entry(ioff + toff, joff + toff);
                }
                out[ik * dk + jk] = acc;
            }
        }
        DensityMatrix::new(kept_layout, out)
    }
}

/// Reduced density matrix of a pure state over the kept subsystems.
///
/// `keep` must be a nonempty strict subset of the subsystem indices; the
/// result keeps the subsystems in their original order.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let (_, kept_layout, kept_offsets, traced_offsets) = trace_tables(state.layout(), keep)?;
    let amps = state.amplitudes();
    let dk = kept_layout.total_dim();
    let mut out = vec![Complex64::ZERO; dk * dk];
    for (ik, &ioff) in kept_offsets.iter().enumerate() {
        for (jk, &joff) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for &toff in &traced_offsets {
                acc += amps[ioff + toff] * amps[joff + toff].conj();
            }
            out[ik * dk + jk] = acc;
        }
    }
    DensityMatrix::new(kept_layout, out)
}

/// Shared index bookkeeping for the partial trace: flat-offset tables for the
/// kept and traced index groups, whose sums enumerate the full flat index.
fn trace_tables(
    layout: &SubsystemLayout,
    keep: &[usize],
) -> Result<(Vec<usize>, SubsystemLayout, Vec<usize>, Vec<usize>)> {
    let n = layout.len();
    layout.check_subsystems(keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() == n {
        return Err(Error::InvalidKeepSet);
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let strides = layout.strides();
    let kept_layout = layout.restrict(&keep)?;

    let offsets = |subs: &[usize]| -> Vec<usize> {
        let dims: Vec<usize> = subs.iter().map(|&s| layout.dims()[s]).collect();
        let total: usize = dims.iter().product();
        let mut table = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut offset = 0;
            for k in (0..subs.len()).rev() {
                offset += (flat % dims[k]) * strides[subs[k]];
                flat /= dims[k];
            }
            table.push(offset);
        }
        table
    };

    let kept_offsets = offsets(&keep);
    let traced_offsets = offsets(&traced);
    Ok((keep, kept_layout, kept_offsets, traced_offsets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::tensor;

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let rho = partial_trace(&StateVector::bell_pair(), &[0]).unwrap();
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-12);
        assert!(rho.entry(0, 1).norm() < 1e-12);
        assert!((rho.entry(0, 0).im).abs() < 1e-12);
        rho.validate().unwrap();
        assert!((rho.entropy() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn product_state_reduces_to_pure_projector() {
        let phi = StateVector::qubit(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let chi = StateVector::qubit(
            Complex64::new(0.8, 0.0),
            Complex64::new(0.6, 0.0),
        )
        .unwrap();
        let product = tensor(&[&phi, &chi]).unwrap();
        let rho = partial_trace(&product, &[0]).unwrap();
        let projector = DensityMatrix::from_pure(&phi).unwrap();
        assert!(rho.max_abs_diff(&projector) < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn keep_set_validation() {
        let bell = StateVector::bell_pair();
        assert!(matches!(
            partial_trace(&bell, &[]),
            Err(Error::InvalidKeepSet)
        ));
        assert!(matches!(
            partial_trace(&bell, &[0, 1]),
            Err(Error::InvalidKeepSet)
        ));
        assert!(matches!(
            partial_trace(&bell, &[3]),
            Err(Error::SubsystemOutOfRange(3, 2))
        ));
    }

    #[test]
    fn density_partial_trace_matches_pure_route() {
        let ghz = StateVector::ghz(3).unwrap();
        let rho = DensityMatrix::from_pure(&ghz).unwrap();
        let a = rho.partial_trace(&[0, 2]).unwrap();
        let b = partial_trace(&ghz, &[0, 2]).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn w_state_single_qubit_spectrum() {
        let w = StateVector::w_state(3).unwrap();
        let rho = partial_trace(&w, &[0]).unwrap();
        let eigs = rho.eigenvalues();
        assert!((eigs[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((eigs[1] - 2.0 / 3.0).abs() < 1e-12);
        let expected = 3f64.ln() - (2.0 / 3.0) * 2f64.ln();
        assert!((rho.entropy() - expected).abs() < 1e-12);
    }
}
