//! Independent oracles for the integration suites: brute-force index
//! contraction for reduced states, a standalone Jacobi eigensolver for
//! entropies, and a naive full-enumeration search for integration values.
//! None of these share code paths with the library implementations they
//! check (the phi enumeration oracle deliberately reuses the library's
//! entropy kernel so value agreement can be exact; the kernel itself is
//! checked against the contraction + Jacobi route).

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use qcollapse_core::hilbert::{StateVector, SubsystemLayout};
use qcollapse_core::phi::bipartition_entropy;

/// Brute-force reduced density matrix: scan every pair of full multi-indices
/// and accumulate those whose traced components coincide.
pub fn naive_rdm(state: &StateVector, keep: &[usize]) -> Vec<Vec<Complex64>> {
    let dims = state.layout().dims().to_vec();
    let n = dims.len();
    let amps = state.amplitudes();
    let dim = amps.len();

    let to_multi = |mut flat: usize| -> Vec<usize> {
        let mut multi = vec![0usize; n];
        for k in (0..n).rev() {
            multi[k] = flat % dims[k];
            flat /= dims[k];
        }
        multi
    };
    let kept_flat = |multi: &[usize]| -> usize {
        let mut idx = 0usize;
        for &k in keep {
            idx = idx * dims[k] + multi[k];
        }
        idx
    };

    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let mut rho = vec![vec![Complex64::ZERO; dk]; dk];
    for i in 0..dim {
        let mi = to_multi(i);
        for j in 0..dim {
            let mj = to_multi(j);
            let traced_match = (0..n)
                .filter(|k| !keep.contains(k))
                .all(|k| mi[k] == mj[k]);
            if traced_match {
                rho[kept_flat(&mi)][kept_flat(&mj)] += amps[i] * amps[j].conj();
            }
        }
    }
    rho
}

/// Cyclic Jacobi eigenvalues of a complex Hermitian matrix, ascending.
pub fn jacobi_eigenvalues(matrix: &[Vec<Complex64>]) -> Vec<f64> {
    let dim = matrix.len();
    let mut a: Vec<Vec<Complex64>> = matrix.to_vec();
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .max(1e-300);

    for _sweep in 0..100 {
        let off: f64 = (0..dim)
            .flat_map(|p| ((p + 1)..dim).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].norm_sqr())
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let z = a[p][q];
                let w = z.norm();
                if w < 1e-300 {
                    continue;
                }
                // phase rotation making the pivot real: column q by
                // exp(-i phi), row q by exp(+i phi)
                let phase = z / w;
                for i in 0..dim {
                    a[i][q] *= phase.conj();
                }
                for j in 0..dim {
                    a[q][j] *= phase;
                }
                // now a[p][q] = w (real); classic real rotation
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * w);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..dim {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = aip * c - aiq * s;
                    a[i][q] = aip * s + aiq * c;
                }
                for j in 0..dim {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = apj * c - aqj * s;
                    a[q][j] = apj * s + aqj * c;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..dim).map(|i| a[i][i].re).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Von Neumann entropy from the Jacobi eigenvalues of a brute-force reduced
/// state.
pub fn naive_entropy(state: &StateVector, keep: &[usize]) -> f64 {
    let rho = naive_rdm(state, keep);
    jacobi_eigenvalues(&rho)
        .iter()
        .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
        .sum()
}

/// All set partitions of 0..n by recursive block assignment (single-block
/// partition included).
pub fn naive_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn extend(k: usize, n: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == n {
            out.push(current.clone());
            return;
        }
        for b in 0..current.len() {
            current[b].push(k);
            extend(k + 1, n, current, out);
            current[b].pop();
        }
        current.push(vec![k]);
        extend(k + 1, n, current, out);
        current.pop();
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = vec![vec![0usize]];
    extend(1, n, &mut current, &mut out);
    out
}

/// Full-enumeration integration search: every grain, every bipartition of
/// its blocks, minimum of the cut entropies. Returns the minimum and the
/// canonically-first side-A subsystem set among elementary cuts achieving it
/// (side A contains subsystem 0; rank = the subsystem bitmask).
pub fn naive_phi_max(state: &StateVector) -> (f64, Vec<usize>) {
    let n = state.layout().len();
    assert!(n >= 2);

    let mut global_min = f64::INFINITY;
    for partition in naive_partitions(n) {
        let m = partition.len();
        if m < 2 {
            continue;
        }
        // subsets of blocks, skipping empty and full
        for subset in 1..((1usize << m) - 1) {
            let mut side_a: Vec<usize> = Vec::new();
            for (b, block) in partition.iter().enumerate() {
                if subset & (1 << b) != 0 {
                    side_a.extend(block.iter().copied());
                }
            }
            side_a.sort_unstable();
            let s = bipartition_entropy(state, &side_a).unwrap();
            if s < global_min {
                global_min = s;
            }
        }
    }

    // canonically-first elementary cut achieving the minimum: smallest
    // subsystem bitmask containing subsystem 0
    let mut best_mask = usize::MAX;
    for mask in 1..((1usize << n) - 1) {
        if mask & 1 == 0 {
            continue;
        }
        let side_a: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let s = bipartition_entropy(state, &side_a).unwrap();
        if s == global_min && mask < best_mask {
            best_mask = mask;
        }
    }
    assert_ne!(best_mask, usize::MAX, "minimum must be attained at an elementary cut");
    let side_a: Vec<usize> = (0..n).filter(|&k| best_mask & (1 << k) != 0).collect();
    (global_min, side_a)
}

/// Naive per-grain minimum: independent subset enumeration over the given
/// blocks, returning the minimum and the canonically-first achieving side-A
/// block set (block 0 on side A).
pub fn naive_grain_min(state: &StateVector, blocks: &[Vec<usize>]) -> (f64, Vec<usize>) {
    let m = blocks.len();
    let mut values: Vec<(usize, f64)> = Vec::new();
    for subset in 1..((1usize << m) - 1) {
        if subset & 1 == 0 {
            continue;
        }
        let mut side_a: Vec<usize> = Vec::new();
        for (b, block) in blocks.iter().enumerate() {
            if subset & (1 << b) != 0 {
                side_a.extend(block.iter().copied());
            }
        }
        side_a.sort_unstable();
        values.push((subset, bipartition_entropy(state, &side_a).unwrap()));
    }
    let min = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    let first = values.iter().find(|&&(_, v)| v == min).unwrap().0;
    let side_a_blocks: Vec<usize> = (0..m).filter(|&b| first & (1 << b) != 0).collect();
    (min, side_a_blocks)
}

/// Haar-ish random pure state: iid complex Gaussian amplitudes, normalized.
pub fn random_state(rng: &mut ChaCha12Rng, dims: Vec<usize>) -> StateVector {
    use rand_distr::StandardNormal;
    let layout = SubsystemLayout::new(dims).unwrap();
    let amps: Vec<Complex64> = (0..layout.total_dim())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    StateVector::new(layout, amps).unwrap().normalize().unwrap()
}

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Order-insensitive digest of the floating content of an ensemble run, for
/// bit-identity comparisons across thread counts.
pub fn digest_f64s(values: impl Iterator<Item = f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
