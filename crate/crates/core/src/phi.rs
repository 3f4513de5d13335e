//! Integrated information of pure states of composite systems.
//!
//! A *grain* is a set partition of the elementary subsystems into blocks; a
//! grain's integration `phi` is the minimum, over bipartitions of its blocks,
//! of the entanglement entropy across the cut. Entropies are in nats.
//!
//! `phi_max` — the integration of the system as a whole — is evaluated at the
//! elementary grain, i.e. it is the minimum-cut entanglement entropy over all
//! subsystem bipartitions. Coarser grains only remove candidate cuts (a block
//! straddling two independent components hides their factorization), so the
//! elementary partition is the faithful witness of whether the system can be
//! broken into independent parts: any decomposable system scores exactly 0.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, HermitianOperator, StateVector, SubsystemLayout};

/// Gram-matrix tolerance for basis orthonormality checks.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// A set partition of the subsystem indices into at least two blocks.
///
/// Canonical form: elements ascending within each block, blocks ordered by
/// their smallest element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grain {
    blocks: Vec<Vec<usize>>,
}

impl Grain {
    pub fn new(blocks: Vec<Vec<usize>>, n_subsystems: usize) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidScenario(
                "a grain needs at least two blocks".into(),
            ));
        }
        let mut seen = vec![false; n_subsystems];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidScenario("grain blocks must be nonempty".into()));
            }
            for &e in block {
                if e >= n_subsystems {
                    return Err(Error::SubsystemOutOfRange(e, n_subsystems));
                }
                if seen[e] {
                    return Err(Error::InvalidScenario(format!(
                        "subsystem {e} appears in two blocks"
                    )));
                }
                seen[e] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidScenario(
                "grain blocks must cover every subsystem".into(),
            ));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// The elementary grain with one subsystem per block.
    pub fn finest(n_subsystems: usize) -> Result<Self> {
        Self::new((0..n_subsystems).map(|k| vec![k]).collect(), n_subsystems)
    }

    fn from_rgs(rgs: &[usize]) -> Self {
        let n_blocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut blocks = vec![Vec::new(); n_blocks];
        for (idx, &label) in rgs.iter().enumerate() {
            blocks[label].push(idx);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_finest(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }
}

impl std::fmt::Display for Grain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let elems: Vec<String> = b.iter().map(|e| e.to_string()).collect();
                format!("{{{}}}", elems.join(","))
            })
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// A two-sided split of a grain's blocks, stored as block indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    /// Subsystem indices on side A of the cut, ascending.
    pub fn subsystems_a(&self, grain: &Grain) -> Vec<usize> {
        let mut subs: Vec<usize> = self
            .side_a
            .iter()
            .flat_map(|&b| grain.blocks()[b].iter().copied())
            .collect();
        subs.sort_unstable();
        subs
    }

    pub fn subsystems_b(&self, grain: &Grain) -> Vec<usize> {
        let mut subs: Vec<usize> = self
            .side_b
            .iter()
            .flat_map(|&b| grain.blocks()[b].iter().copied())
            .collect();
        subs.sort_unstable();
        subs
    }

    pub fn describe(&self, grain: &Grain) -> String {
        let fmt = |subs: Vec<usize>| {
            let elems: Vec<String> = subs.iter().map(|e| e.to_string()).collect();
            format!("{{{}}}", elems.join(","))
        };
        format!(
            "{}|{}",
            fmt(self.subsystems_a(grain)),
            fmt(self.subsystems_b(grain))
        )
    }
}

/// Result of an integration computation.
#[derive(Debug, Clone)]
pub struct PhiResult {
    pub phi: f64,
    /// Grain at which the reported value is attained; `None` for the
    /// single-subsystem convention.
    pub maximizing_grain: Option<Grain>,
    /// Bipartition of that grain minimizing the cut entropy; `None` for the
    /// single-subsystem convention.
    pub minimizing_bipartition: Option<Bipartition>,
}

impl PhiResult {
    fn convention_zero() -> Self {
        Self {
            phi: 0.0,
            maximizing_grain: None,
            minimizing_bipartition: None,
        }
    }
}

/// All set partitions of the subsystems with at least two blocks, in
/// lexicographic restricted-growth-string order. A single-subsystem layout
/// has no grains and yields an empty list (its integration is 0 by
/// convention).
pub fn enumerate_grains(layout: &SubsystemLayout) -> Vec<Grain> {
    let n = layout.len();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        if rgs.iter().any(|&label| label > 0) {
            out.push(Grain::from_rgs(&rgs));
        }
        // next restricted growth string in lexicographic order
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_prefix = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                break;
            }
            rgs[i] = 0;
            i -= 1;
        }
    }
}

/// Entanglement entropy across the cut `side_a | rest`.
///
/// The reduced state is computed on the side with the smaller total
/// dimension (ties keep side A); the entropy of either side is equal for a
/// pure state, and fixing the side makes results reproducible bit for bit.
pub fn bipartition_entropy(state: &StateVector, side_a: &[usize]) -> Result<f64> {
    state.require_normalized()?;
    let layout = state.layout();
    layout.check_subsystems(side_a)?;
    let mut a = side_a.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.is_empty() || a.len() == layout.len() {
        return Err(Error::InvalidKeepSet);
    }
    let b: Vec<usize> = (0..layout.len()).filter(|k| !a.contains(k)).collect();
    let dim_a: usize = a.iter().map(|&k| layout.dims()[k]).product();
    let dim_b: usize = b.iter().map(|&k| layout.dims()[k]).product();
    let keep = if dim_a <= dim_b { &a } else { &b };
    Ok(partial_trace(state, keep)?.entropy())
}

/// Canonical bipartitions of `n_blocks` blocks: block 0 sits on side A, masks
/// over the remaining blocks enumerate side A ascending.
fn bipartition_masks(n_blocks: usize) -> impl Iterator<Item = usize> {
    let full = (1usize << n_blocks) - 1;
    (1..full).step_by(2) // odd masks: bit 0 (block 0) always on side A
}

fn bipartition_from_mask(mask: usize, n_blocks: usize) -> Bipartition {
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    for b in 0..n_blocks {
        if mask & (1 << b) != 0 {
            side_a.push(b);
        } else {
            side_b.push(b);
        }
    }
    Bipartition { side_a, side_b }
}

/// Integration of one grain: the minimum cut entropy over bipartitions of
/// the grain's blocks, with ties resolved by canonical bipartition order.
pub fn min_bipartition_entropy(state: &StateVector, grain: &Grain) -> Result<PhiResult> {
    state.require_normalized()?;
    let n_blocks = grain.n_blocks();
    let mut best: Option<(f64, Bipartition)> = None;
    for mask in bipartition_masks(n_blocks) {
        let bipartition = bipartition_from_mask(mask, n_blocks);
        let subs_a = bipartition.subsystems_a(grain);
        let entropy = bipartition_entropy(state, &subs_a)?;
        match &best {
            Some((phi, _)) if entropy >= *phi => {}
            _ => best = Some((entropy, bipartition)),
        }
    }
    let (phi, bipartition) = best.expect("a grain has at least one bipartition");
    Ok(PhiResult {
        phi,
        maximizing_grain: Some(grain.clone()),
        minimizing_bipartition: Some(bipartition),
    })
}

/// Integration of the whole system: the minimum-cut entanglement entropy at
/// the elementary grain (see the module docs for why coarser grains are not
/// consulted). Single-subsystem layouts score 0 by convention.
pub fn phi_max(state: &StateVector) -> Result<PhiResult> {
    state.require_normalized()?;
    let n = state.layout().len();
    if n < 2 {
        return Ok(PhiResult::convention_zero());
    }
    min_bipartition_entropy(state, &Grain::finest(n)?)
}

/// Orthonormal basis over a layout, used to assemble a diagonal collapse
/// operator from per-basis-state integration values.
#[derive(Debug, Clone)]
pub struct PhiBasisSpec {
    layout: SubsystemLayout,
    basis_states: Vec<StateVector>,
}

impl PhiBasisSpec {
    /// Validates completeness and orthonormality (Gram matrix within
    /// `ORTHONORMALITY_TOL` of the identity).
    pub fn new(layout: SubsystemLayout, basis_states: Vec<StateVector>) -> Result<Self> {
        let dim = layout.total_dim();
        if basis_states.len() != dim {
            return Err(Error::IncompleteBasis {
                got: basis_states.len(),
                expected: dim,
            });
        }
        let mut max_resid = 0.0f64;
        for (i, a) in basis_states.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "basis state {} has dimension {}, layout requires {}",
                    i,
                    a.dim(),
                    dim
                )));
            }
            for (j, b) in basis_states.iter().enumerate() {
                let g = a.inner(b)?;
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                max_resid = max_resid.max((g - expect).norm());
            }
        }
        if max_resid > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormalBasis(max_resid));
        }
        Ok(Self {
            layout,
            basis_states,
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn basis_states(&self) -> &[StateVector] {
        &self.basis_states
    }

    /// The computational product basis of a layout.
    pub fn computational(layout: SubsystemLayout) -> Result<Self> {
        let dim = layout.total_dim();
        let states: Result<Vec<StateVector>> = (0..dim)
            .map(|k| StateVector::basis_state(layout.clone(), k))
            .collect();
        Self::new(layout, states?)
    }
}

/// Diagonal operator `sum_k phi_k |e_k><e_k|` with `phi_k` the integration of
/// basis state `e_k`.
pub fn build_phi_operator(spec: &PhiBasisSpec) -> Result<HermitianOperator> {
    let values: Result<Vec<f64>> = spec
        .basis_states
        .iter()
        .map(|e| Ok(phi_max(e)?.phi))
        .collect();
    HermitianOperator::from_projectors(spec.layout.clone(), &spec.basis_states, &values?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{eig, tensor};
    use std::f64::consts::LN_2;

    #[test]
    fn grain_counts_follow_bell_numbers() {
        let grains2 = enumerate_grains(&SubsystemLayout::qubits(2).unwrap());
        assert_eq!(grains2.len(), 1);
        assert_eq!(grains2[0].blocks(), &[vec![0], vec![1]]);

        assert_eq!(enumerate_grains(&SubsystemLayout::qubits(3).unwrap()).len(), 4);
        assert_eq!(enumerate_grains(&SubsystemLayout::qubits(4).unwrap()).len(), 14);
        assert!(enumerate_grains(&SubsystemLayout::new(vec![5]).unwrap()).is_empty());
    }

    #[test]
    fn grain_enumeration_is_lexicographic() {
        let grains = enumerate_grains(&SubsystemLayout::qubits(3).unwrap());
        let shown: Vec<String> = grains.iter().map(|g| g.to_string()).collect();
        assert_eq!(
            shown,
            vec!["{0,1}|{2}", "{0,2}|{1}", "{0}|{1,2}", "{0}|{1}|{2}"]
        );
    }

    #[test]
    fn bell_pair_scores_ln2() {
        let bell = StateVector::bell_pair();
        let result = phi_max(&bell).unwrap();
        assert!((result.phi - LN_2).abs() < 1e-12);
    }

    #[test]
    fn ghz_finest_grain_min_is_ln2() {
        let ghz = StateVector::ghz(3).unwrap();
        let finest = Grain::finest(3).unwrap();
        // every cut of a GHZ state carries exactly one bit
        for mask in super::bipartition_masks(3) {
            let bip = super::bipartition_from_mask(mask, 3);
            let s = bipartition_entropy(&ghz, &bip.subsystems_a(&finest)).unwrap();
            assert!((s - LN_2).abs() < 1e-12);
        }
        let result = min_bipartition_entropy(&ghz, &finest).unwrap();
        assert!((result.phi - LN_2).abs() < 1e-12);
        assert!((phi_max(&ghz).unwrap().phi - LN_2).abs() < 1e-12);
    }

    #[test]
    fn w_state_single_qubit_cut() {
        let w = StateVector::w_state(3).unwrap();
        let s = bipartition_entropy(&w, &[0]).unwrap();
        let expected = 3f64.ln() - (2.0 / 3.0) * LN_2;
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.6365).abs() < 1e-4);
    }

    #[test]
    fn product_states_score_zero_at_every_grain() {
        let q = |re: f64, im: f64| {
            StateVector::qubit(Complex64::new(re, 0.0), Complex64::new(0.0, im)).unwrap()
        };
        let product = tensor(&[&q(0.6, 0.8), &q(1.0, 0.0), &q(0.8, 0.6)]).unwrap();
        for grain in enumerate_grains(product.layout()) {
            let r = min_bipartition_entropy(&product, &grain).unwrap();
            assert!(r.phi.abs() < 1e-12, "grain {grain} scored {}", r.phi);
        }
        assert!(phi_max(&product).unwrap().phi.abs() < 1e-12);
    }

    #[test]
    fn independent_bell_pairs_score_zero_with_the_cutting_bipartition() {
        let bell = StateVector::bell_pair();
        let pairs = tensor(&[&bell, &bell]).unwrap();
        let result = phi_max(&pairs).unwrap();
        assert!(result.phi.abs() < 1e-12);
        let grain = result.maximizing_grain.unwrap();
        assert!(grain.is_finest());
        let cut = result.minimizing_bipartition.unwrap();
        assert_eq!(cut.subsystems_a(&grain), vec![0, 1]);
        assert_eq!(cut.subsystems_b(&grain), vec![2, 3]);
    }

    #[test]
    fn straddling_grains_cannot_reach_zero_for_bell_pairs() {
        // the pair-straddling grain has no factorizing cut available, which
        // is exactly why the whole-system value is taken at the finest grain
        let bell = StateVector::bell_pair();
        let pairs = tensor(&[&bell, &bell]).unwrap();
        let grain = Grain::new(vec![vec![0, 2], vec![1, 3]], 4).unwrap();
        let r = min_bipartition_entropy(&pairs, &grain).unwrap();
        assert!((r.phi - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn single_subsystem_convention() {
        let state = StateVector::new(
            SubsystemLayout::new(vec![3]).unwrap(),
            vec![Complex64::ONE, Complex64::ZERO, Complex64::ZERO],
        )
        .unwrap();
        let r = phi_max(&state).unwrap();
        assert_eq!(r.phi, 0.0);
        assert!(r.maximizing_grain.is_none());
    }

    #[test]
    fn computational_basis_gives_zero_operator() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let spec = PhiBasisSpec::computational(layout).unwrap();
        let op = build_phi_operator(&spec).unwrap();
        assert!(op.matrix().iter().all(|m| m.norm() < 1e-12));
        let s = eig(&op, None);
        assert_eq!(s.n_classes(), 1);
    }

    #[test]
    fn bell_basis_gives_ln2_identity() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        let states = vec![
            StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(r)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(-r)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(r), c(0.0)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(-r), c(0.0)]).unwrap(),
        ];
        let spec = PhiBasisSpec::new(layout.clone(), states).unwrap();
        let op = build_phi_operator(&spec).unwrap();
        let expected = HermitianOperator::identity(layout).scale(LN_2);
        assert!(op.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn mixed_basis_eigenvalues() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        let states = vec![
            StateVector::basis_state(layout.clone(), 0).unwrap(),
            StateVector::basis_state(layout.clone(), 3).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(r), c(0.0)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(-r), c(0.0)]).unwrap(),
        ];
        let spec = PhiBasisSpec::new(layout.clone(), states).unwrap();
        let op = build_phi_operator(&spec).unwrap();
        let s = eig(&op, None);
        let eigs = s.eigenvalues();
        assert!(eigs[0].abs() < 1e-12 && eigs[1].abs() < 1e-12);
        assert!((eigs[2] - LN_2).abs() < 1e-12 && (eigs[3] - LN_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let layout = SubsystemLayout::qubits(1).unwrap();
        let states = vec![
            StateVector::basis_state(layout.clone(), 0).unwrap(),
            StateVector::basis_state(layout.clone(), 0).unwrap(),
        ];
        assert!(matches!(
            PhiBasisSpec::new(layout, states),
            Err(Error::NotOrthonormalBasis(_))
        ));
    }

    #[test]
    fn operator_diagonal_matches_expectation_on_basis_states() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        let states = vec![
            StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(r)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(r), c(0.0), c(0.0), c(-r)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(r), c(0.0)]).unwrap(),
            StateVector::new(layout.clone(), vec![c(0.0), c(r), c(-r), c(0.0)]).unwrap(),
        ];
        let spec = PhiBasisSpec::new(layout, states.clone()).unwrap();
        let op = build_phi_operator(&spec).unwrap();
        for e in &states {
            let direct = crate::hilbert::expectation(&op, e).unwrap();
            let phi = phi_max(e).unwrap().phi;
            assert!((direct - phi).abs() < 1e-10);
        }
    }
}
