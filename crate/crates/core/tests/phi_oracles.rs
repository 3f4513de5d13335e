//! Integration values checked against naive full enumeration and the
//! contraction/Jacobi entropy oracle, plus the structural invariants.

mod common;

use common::{naive_entropy, naive_grain_min, naive_partitions, naive_phi_max, random_state,
    seeded_rng};
use num_complex::Complex64;
use proptest::prelude::*;
use qcollapse_core::hilbert::{tensor, StateVector, SubsystemLayout, UnitaryOperator};
use qcollapse_core::phi::{
    bipartition_entropy, enumerate_grains, min_bipartition_entropy, phi_max, Grain,
};
use std::f64::consts::LN_2;

#[test]
fn partition_oracle_counts_match_bell_numbers() {
    // 1, 2, 5, 15, 52 partitions for n = 1..=5
    for (n, bell) in [(1usize, 1usize), (2, 2), (3, 5), (4, 15), (5, 52)] {
        assert_eq!(naive_partitions(n).len(), bell);
    }
    // grains exclude the single-block partition
    for (n, grains) in [(2usize, 1usize), (3, 4), (4, 14)] {
        let layout = SubsystemLayout::qubits(n).unwrap();
        assert_eq!(enumerate_grains(&layout).len(), grains);
    }
}

#[test]
fn grain_enumeration_agrees_with_the_recursive_oracle() {
    for n in 2..=5usize {
        let layout = SubsystemLayout::qubits(n).unwrap();
        let mut fast: Vec<String> = enumerate_grains(&layout)
            .iter()
            .map(|g| g.to_string())
            .collect();
        let mut slow: Vec<String> = naive_partitions(n)
            .into_iter()
            .filter(|p| p.len() >= 2)
            .map(|p| Grain::new(p, n).unwrap().to_string())
            .collect();
        fast.sort();
        slow.sort();
        assert_eq!(fast, slow);
    }
}

#[test]
fn golden_integration_values_against_the_entropy_oracle() {
    // product state: exactly zero
    let q = |re: f64| StateVector::qubit(Complex64::new(re, 0.0), {
        let im = (1.0 - re * re).sqrt();
        Complex64::new(0.0, im)
    })
    .unwrap();
    let product = tensor(&[&q(0.6), &q(0.3), &q(0.9)]).unwrap();
    assert!(phi_max(&product).unwrap().phi.abs() <= 1e-12);

    // Bell pair: ln 2
    let bell = StateVector::bell_pair();
    let phi_bell = phi_max(&bell).unwrap().phi;
    assert!((phi_bell - LN_2).abs() < 1e-9);
    assert!((naive_entropy(&bell, &[0]) - LN_2).abs() < 1e-9);

    // GHZ: ln 2
    let ghz = StateVector::ghz(3).unwrap();
    assert!((phi_max(&ghz).unwrap().phi - LN_2).abs() < 1e-9);
    for keep in [vec![0usize], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]] {
        assert!((naive_entropy(&ghz, &keep) - LN_2).abs() < 1e-9);
    }

    // two independent bell pairs: zero, cut between the pairs
    let pairs = tensor(&[&bell, &bell]).unwrap();
    let result = phi_max(&pairs).unwrap();
    assert!(result.phi.abs() <= 1e-12);
    assert!((naive_entropy(&pairs, &[0, 1])).abs() <= 1e-12);
    let grain = result.maximizing_grain.unwrap();
    let cut = result.minimizing_bipartition.unwrap();
    assert_eq!(cut.subsystems_a(&grain), vec![0, 1]);

    // W state, cut {0}|{1,2}: ln 3 - (2/3) ln 2
    let w = StateVector::w_state(3).unwrap();
    let expected = 3f64.ln() - (2.0 / 3.0) * LN_2;
    assert!((bipartition_entropy(&w, &[0]).unwrap() - expected).abs() < 1e-9);
    assert!((naive_entropy(&w, &[0]) - expected).abs() < 1e-9);
}

#[test]
fn phi_max_equals_the_full_enumeration_oracle_on_a_random_corpus() {
    let mut rng = seeded_rng(909);
    let mut checked = 0usize;
    for (count, dims) in [
        (13usize, vec![2usize, 2, 2]),
        (6, vec![2, 3, 2]),
        (6, vec![3, 2, 2]),
        (13, vec![2, 2, 2, 2]),
        (6, vec![2, 2, 3, 2]),
        (6, vec![2, 2, 2, 3]),
    ] {
        for _ in 0..count {
            let state = random_state(&mut rng, dims.clone());
            let fast = phi_max(&state).unwrap();
            let (slow_phi, slow_cut) = naive_phi_max(&state);
            assert_eq!(
                fast.phi, slow_phi,
                "integration value mismatch on dims {dims:?}"
            );
            let grain = fast.maximizing_grain.as_ref().unwrap();
            assert!(grain.is_finest());
            let fast_cut = fast
                .minimizing_bipartition
                .as_ref()
                .unwrap()
                .subsystems_a(grain);
            assert_eq!(fast_cut, slow_cut, "selected cut mismatch on dims {dims:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 50);
}

#[test]
fn per_grain_minimum_matches_the_subset_oracle() {
    let mut rng = seeded_rng(910);
    for dims in [vec![2usize, 2, 2], vec![2, 2, 2, 2]] {
        let n = dims.len();
        let state = random_state(&mut rng, dims.clone());
        for grain in enumerate_grains(state.layout()) {
            let fast = min_bipartition_entropy(&state, &grain).unwrap();
            let (slow_phi, slow_blocks) = naive_grain_min(&state, grain.blocks());
            assert_eq!(fast.phi, slow_phi, "grain {grain} on dims {dims:?} ({n} subsystems)");
            let bip = fast.minimizing_bipartition.unwrap();
            assert_eq!(bip.side_a(), slow_blocks.as_slice());
        }
    }
}

#[test]
fn local_unitaries_leave_cut_entropies_unchanged() {
    let mut rng = seeded_rng(911);
    let state = random_state(&mut rng, vec![2, 2, 2]);
    // a non-trivial unitary on subsystem 0 only
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h = UnitaryOperator::new(
        SubsystemLayout::qubits(1).unwrap(),
        vec![
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(-r, 0.0),
        ],
    )
    .unwrap();
    // lift to the full space by acting on amplitudes blockwise
    let layout = state.layout().clone();
    let stride = layout.strides()[0];
    let mut amps = state.amplitudes().to_vec();
    for rest in 0..stride {
        let (i0, i1) = (rest, rest + stride);
        let (a, b) = (amps[i0], amps[i1]);
        let m = h.matrix();
        amps[i0] = m[0] * a + m[1] * b;
        amps[i1] = m[2] * a + m[3] * b;
    }
    let rotated = StateVector::new(layout, amps).unwrap();

    for side_a in [vec![0usize], vec![0, 1], vec![1]] {
        let before = bipartition_entropy(&state, &side_a).unwrap();
        let after = bipartition_entropy(&rotated, &side_a).unwrap();
        assert!(
            (before - after).abs() < 1e-10,
            "cut {side_a:?}: {before} vs {after}"
        );
    }
}

#[test]
fn whole_system_value_never_falls_below_any_grain_is_false_but_finest_matches() {
    // the whole-system value equals the finest grain's minimum by definition
    let mut rng = seeded_rng(912);
    let state = random_state(&mut rng, vec![2, 2, 2]);
    let finest = Grain::finest(3).unwrap();
    let at_finest = min_bipartition_entropy(&state, &finest).unwrap();
    let whole = phi_max(&state).unwrap();
    assert_eq!(whole.phi, at_finest.phi);
    assert!(whole.phi >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_is_nonnegative_and_bounded(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed);
        let state = random_state(&mut rng, vec![2, 2, 2]);
        let result = phi_max(&state).unwrap();
        prop_assert!(result.phi >= 0.0);
        // any single-qubit cut bounds the minimum by ln 2
        prop_assert!(result.phi <= LN_2 + 1e-12);
    }

    #[test]
    fn cut_entropy_respects_the_smaller_side_bound(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed.wrapping_add(77));
        let state = random_state(&mut rng, vec![2, 3, 2]);
        for (side, bound) in [(vec![0usize], 2f64.ln()), (vec![1], 3f64.ln()), (vec![0, 2], 4f64.ln())] {
            let s = bipartition_entropy(&state, &side).unwrap();
            prop_assert!(s >= -1e-12 && s <= bound + 1e-10);
        }
    }

    #[test]
    fn product_states_always_score_zero((a, b) in (0.05f64..0.95, 0.05f64..0.95)) {
        let q0 = StateVector::qubit(
            Complex64::new(a.sqrt(), 0.0),
            Complex64::new(0.0, (1.0 - a).sqrt()),
        ).unwrap();
        let q1 = StateVector::qubit(
            Complex64::new((1.0 - b).sqrt(), 0.0),
            Complex64::new(b.sqrt(), 0.0),
        ).unwrap();
        let product = tensor(&[&q0, &q1]).unwrap();
        prop_assert!(phi_max(&product).unwrap().phi.abs() < 1e-12);
    }
}
