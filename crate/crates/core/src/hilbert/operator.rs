use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    kahan_sum, StateVector, SubsystemLayout, HERMITICITY_TOL, OPERATOR_DIM_LIMIT, UNITARITY_TOL,
};
use crate::error::{Error, Result};

fn check_square(matrix: &[Complex64], dim: usize, layout: &SubsystemLayout) -> Result<()> {
    if layout.total_dim() != dim || matrix.len() != dim * dim {
        return Err(Error::LengthMismatch {
            got: matrix.len(),
            expected: layout.total_dim() * layout.total_dim(),
        });
    }
    if dim > OPERATOR_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: OPERATOR_DIM_LIMIT,
        });
    }
    Ok(())
}

fn matvec(matrix: &[Complex64], dim: usize, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::ZERO; dim];
    for i in 0..dim {
        let row = &matrix[i * dim..(i + 1) * dim];
        let mut acc = Complex64::ZERO;
        for (m, xv) in row.iter().zip(x) {
            acc += m * xv;
        }
        y[i] = acc;
    }
    y
}

/// Dense self-adjoint matrix over a tensor-product layout.
///
/// Construction verifies Hermiticity entrywise within `HERMITICITY_TOL`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: Vec<Complex64>, // row-major dim x dim
    dim: usize,
    layout: SubsystemLayout,
}

impl HermitianOperator {
    pub fn new(layout: SubsystemLayout, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = layout.total_dim();
        check_square(&matrix, dim, &layout)?;
        let mut max_resid = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let r = (matrix[i * dim + j] - matrix[j * dim + i].conj()).norm();
                max_resid = max_resid.max(r);
            }
        }
        if max_resid > HERMITICITY_TOL {
            return Err(Error::NotHermitian(max_resid));
        }
        Ok(Self {
            matrix,
            dim,
            layout,
        })
    }

    /// Diagonal operator with the given real eigenvalues in basis order.
    pub fn diagonal(layout: SubsystemLayout, values: &[f64]) -> Result<Self> {
        let dim = layout.total_dim();
        if values.len() != dim {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: dim,
            });
        }
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            matrix[i * dim + i] = Complex64::new(v, 0.0);
        }
        Self::new(layout, matrix)
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        Self::diagonal(layout, &vec![1.0; dim]).unwrap()
    }

    pub fn pauli_x() -> Self {
        let l = SubsystemLayout::qubits(1).unwrap();
        Self::new(
            l,
            vec![
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
            ],
        )
        .unwrap()
    }

    pub fn pauli_y() -> Self {
        let l = SubsystemLayout::qubits(1).unwrap();
        Self::new(
            l,
            vec![
                Complex64::ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::ZERO,
            ],
        )
        .unwrap()
    }

    pub fn pauli_z() -> Self {
        let l = SubsystemLayout::qubits(1).unwrap();
        Self::diagonal(l, &[1.0, -1.0]).unwrap()
    }

    /// Rank-one sum `sum_k values[k] |states[k]><states[k]|`.
    pub fn from_projectors(
        layout: SubsystemLayout,
        states: &[StateVector],
        values: &[f64],
    ) -> Result<Self> {
        if states.len() != values.len() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: states.len(),
            });
        }
        let dim = layout.total_dim();
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for (state, &v) in states.iter().zip(values) {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "projector state dimension {} vs layout dimension {}",
                    state.dim(),
                    dim
                )));
            }
            let a = state.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    matrix[i * dim + j] += a[i] * a[j].conj() * v;
                }
            }
        }
        // symmetrize away float asymmetry from the accumulation
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (matrix[i * dim + j] + matrix[j * dim + i].conj());
                matrix[i * dim + j] = avg;
                matrix[j * dim + i] = avg.conj();
            }
            matrix[i * dim + i] = Complex64::new(matrix[i * dim + i].re, 0.0);
        }
        Self::new(layout, matrix)
    }

    /// Embed a local operator on one subsystem, identity elsewhere.
    pub fn lift(local: &Self, layout: &SubsystemLayout, target: usize) -> Result<Self> {
        layout.check_subsystems(&[target])?;
        let d_local = layout.dims()[target];
        if local.dim != d_local {
            return Err(Error::DimensionMismatch(format!(
                "local operator dimension {} vs subsystem dimension {}",
                local.dim, d_local
            )));
        }
        let dim = layout.total_dim();
        let strides = layout.strides();
        let stride = strides[target];
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            let it = (i / stride) % d_local;
            let rest = i - it * stride;
            for jt in 0..d_local {
                let j = rest + jt * stride;
                matrix[i * dim + j] = local.matrix[it * d_local + jt];
            }
        }
        Self::new(layout.clone(), matrix)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for ia in 0..da {
            for ja in 0..da {
                let a = self.matrix[ia * da + ja];
                for ib in 0..db {
                    for jb in 0..db {
                        matrix[(ia * db + ib) * dim + (ja * db + jb)] =
                            a * other.matrix[ib * db + jb];
                    }
                }
            }
        }
        Self::new(layout, matrix)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let matrix = self.matrix.iter().map(|m| m * factor).collect();
        Self {
            matrix,
            dim: self.dim,
            layout: self.layout.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "sum of operators with dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.layout.clone(), matrix)
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

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dimension {} vs state dimension {}",
                self.dim,
                state.dim()
            )));
        }
        StateVector::new(state.layout().clone(), matvec(&self.matrix, self.dim, state.amplitudes()))
    }

    /// Frobenius norm; cheap scale estimate for step-size checks.
    pub fn frobenius_norm(&self) -> f64 {
        kahan_sum(self.matrix.iter().map(|m| m.norm_sqr())).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense unitary matrix; construction verifies `U^dagger U = I` within
/// `UNITARITY_TOL`.
#[derive(Debug, Clone)]
pub struct UnitaryOperator {
    matrix: Vec<Complex64>,
    dim: usize,
    layout: SubsystemLayout,
}

impl UnitaryOperator {
    pub fn new(layout: SubsystemLayout, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = layout.total_dim();
        check_square(&matrix, dim, &layout)?;
        let mut max_resid = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += matrix[k * dim + i].conj() * matrix[k * dim + j];
                }
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                max_resid = max_resid.max((acc - expect).norm());
            }
        }
        if max_resid > UNITARITY_TOL {
            return Err(Error::NotUnitary(max_resid));
        }
        Ok(Self {
            matrix,
            dim,
            layout,
        })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = Complex64::ONE;
        }
        Self {
            matrix,
            dim,
            layout,
        }
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "unitary dimension {} vs state dimension {}",
                self.dim,
                state.dim()
            )));
        }
        StateVector::new(state.layout().clone(), matvec(&self.matrix, self.dim, state.amplitudes()))
    }

    /// Max entrywise residual of `U^dagger U - I`; zero-ish for any value
    /// accepted by the constructor.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim;
        let mut max_resid = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += self.matrix[k * dim + i].conj() * self.matrix[k * dim + j];
                }
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                max_resid = max_resid.max((acc - expect).norm());
            }
        }
        max_resid
    }
}

/// Eigendecomposition of a Hermitian operator: ascending real eigenvalues,
/// orthonormal eigenvectors, and degeneracy classes grouped by tolerance.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// Column-major: eigenvector k occupies `vectors[k*dim..(k+1)*dim]`.
    vectors: Vec<Complex64>,
    degeneracy_classes: Vec<Vec<usize>>,
    degeneracy_tol: f64,
    dim: usize,
    layout: SubsystemLayout,
}

/// Default grouping tolerance: a relative slice of the spectral range with an
/// absolute floor so that numerically-identical eigenvalues always merge.
pub fn default_degeneracy_tol(eigenvalues: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &a in eigenvalues {
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let range = (hi - lo).max(0.0);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    1e-9 * range + 1e-12 * scale
}

/// Eigendecomposition with eigenvector phases fixed so the largest-magnitude
/// component of each vector is real positive. `degeneracy_tol = None` uses
/// [`default_degeneracy_tol`].
pub fn eig(op: &HermitianOperator, degeneracy_tol: Option<f64>) -> Spectrum {
    let dim = op.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| op.entry(i, j));
    let decomp = m.symmetric_eigen();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut vectors = vec![Complex64::ZERO; dim * dim];
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(decomp.eigenvalues[src]);
        let col = decomp.eigenvectors.column(src);
        // phase fix: largest-magnitude component becomes real positive
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, v) in col.iter().enumerate() {
            let mag = v.norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        let pivot = col[best];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::ONE
        };
        for (i, v) in col.iter().enumerate() {
            vectors[k * dim + i] = v * phase;
        }
    }

    let tol = degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(&eigenvalues));
    let mut degeneracy_classes: Vec<Vec<usize>> = Vec::new();
    for k in 0..dim {
        match degeneracy_classes.last_mut() {
            Some(class) if eigenvalues[k] - eigenvalues[*class.last().unwrap()] <= tol => {
                class.push(k)
            }
            _ => degeneracy_classes.push(vec![k]),
        }
    }

    Spectrum {
        eigenvalues,
        vectors,
        degeneracy_classes,
        degeneracy_tol: tol,
        dim,
        layout: op.layout().clone(),
    }
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn eigenstate(&self, k: usize) -> StateVector {
        StateVector::new(self.layout.clone(), self.eigenvector(k).to_vec()).unwrap()
    }

    pub fn degeneracy_classes(&self) -> &[Vec<usize>] {
        &self.degeneracy_classes
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn n_classes(&self) -> usize {
        self.degeneracy_classes.len()
    }

    /// Representative eigenvalue per class (arithmetic mean of members).
    pub fn class_eigenvalues(&self) -> Vec<f64> {
        self.degeneracy_classes
            .iter()
            .map(|class| class.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / class.len() as f64)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    /// Coordinates of a state in the eigenbasis: `c_k = <v_k|psi>`.
    pub fn coordinates(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "spectrum dimension {} vs state dimension {}",
                self.dim,
                state.dim()
            )));
        }
        let amps = state.amplitudes();
        Ok((0..self.dim)
            .map(|k| {
                let v = self.eigenvector(k);
                let mut acc = Complex64::ZERO;
                for (vi, ai) in v.iter().zip(amps) {
                    acc += vi.conj() * ai;
                }
                acc
            })
            .collect())
    }

    /// State from eigenbasis coordinates: `psi = sum_k c_k v_k`.
    pub fn from_coordinates(&self, coords: &[Complex64]) -> Result<StateVector> {
        if coords.len() != self.dim {
            return Err(Error::LengthMismatch {
                got: coords.len(),
                expected: self.dim,
            });
        }
        let mut amps = vec![Complex64::ZERO; self.dim];
        for (k, &c) in coords.iter().enumerate() {
            if c == Complex64::ZERO {
                continue;
            }
            for (a, v) in amps.iter_mut().zip(self.eigenvector(k)) {
                *a += c * v;
            }
        }
        StateVector::new(self.layout.clone(), amps)
    }

    /// Exact evolution `exp(-i H t) |psi>` for the operator this spectrum was
    /// computed from, used as the unitary propagator between collapse events.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let mut coords = self.coordinates(state)?;
        for (c, &a) in coords.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -a * t);
        }
        self.from_coordinates(&coords)
    }

    /// Squared weight of a state in each degeneracy class.
    pub fn class_weights(&self, state: &StateVector) -> Result<Vec<f64>> {
        let coords = self.coordinates(state)?;
        Ok(self
            .degeneracy_classes
            .iter()
            .map(|class| class.iter().map(|&k| coords[k].norm_sqr()).sum())
            .collect())
    }

    /// Reassemble `sum_k a_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> Result<HermitianOperator> {
        let states: Vec<StateVector> = (0..self.dim).map(|k| self.eigenstate(k)).collect();
        HermitianOperator::from_projectors(self.layout.clone(), &states, &self.eigenvalues)
    }
}

/// Expectation value `<psi| A |psi>`; the state must be normalized and the
/// imaginary part is discarded after a sanity check.
pub fn expectation(op: &HermitianOperator, state: &StateVector) -> Result<f64> {
    state.require_normalized()?;
    let applied = op.apply(state)?;
    let value = state.inner(&applied)?;
    debug_assert!(
        value.im.abs() <= 1e-10 * value.re.abs().max(1.0),
        "expectation of a Hermitian operator should be real, got {value}"
    );
    Ok(value.re)
}
