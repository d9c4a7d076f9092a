//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::PathBuf;

use qmask::cmask::{mask_string, unmask_string, DEFAULT_DECODE_TOL};
use qmask::qcore::{fidelity_pure, CVector, Dims, C64};
use qmask::scodec::{
    describe_state, reconstruct_state, state_from_params, CodecConfig, QubitParams,
};
use qmask::verifier::{violation, StateSet};
use qmask::witness::{isometry_from_params, param_count};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Mask → unmask → rebuild, returning the fidelity with the input.
pub fn pipeline_fidelity(psi: &CVector, c: CodecConfig) -> f64 {
    let description = describe_state(psi, c).unwrap();
    let masked = mask_string(&description);
    let unveiled = unmask_string(&masked, DEFAULT_DECODE_TOL).unwrap();
    assert_eq!(unveiled, description);
    fidelity_pure(psi, &reconstruct_state(&unveiled, c).unwrap()).unwrap()
}

/// Haar-random qubit from a seeded generator.
pub fn random_qubit(rng: &mut ChaCha8Rng) -> CVector {
    loop {
        let z: Vec<C64> = (0..2)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let v = CVector::new(z).unwrap();
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v.normalized().unwrap();
        }
    }
}

/// Minimum round-trip fidelity over a grid with step `2^-(n+2)` of each
/// parameter range.
///
/// With `full` set the grid covers both ranges completely. Otherwise it
/// covers `window_bins` whole α bins centred on π/4 (where the phase error
/// weighs most), the two end α bins, and `window_bins` θ bins at the start,
/// middle and end of the phase range. The grid walks bin interiors at four
/// points per bin per axis, so every combination of in-bin offsets is hit.
pub fn fidelity_grid_min(n_bits: u32, full: bool, window_bins: u64) -> f64 {
    let c = CodecConfig::new(n_bits).unwrap();
    let sub = 4u64; // grid step 2^-(n+2)
    let bins = 1u64 << n_bits;
    let points = bins * sub;
    let alpha_step = FRAC_PI_2 / points as f64;
    let theta_step = TAU / points as f64;

    let alpha_idx: Vec<u64> = if full {
        (0..=points).collect()
    } else {
        let mid = points / 2;
        let half = window_bins * sub / 2;
        let mut v: Vec<u64> = (mid - half..mid + half).collect();
        v.extend(0..sub);
        v.extend(points - sub..=points);
        v
    };
    let theta_idx: Vec<u64> = if full {
        (0..points).collect()
    } else {
        let w = window_bins * sub;
        let mid = points / 2;
        let mut v: Vec<u64> = (0..w).collect();
        v.extend(mid - w / 2..mid + w / 2);
        v.extend(points - w..points);
        v
    };

    let mut worst: f64 = 1.0;
    for &ia in &alpha_idx {
        let alpha = (ia as f64 * alpha_step).min(FRAC_PI_2);
        for &it in &theta_idx {
            let p = QubitParams::new(alpha, it as f64 * theta_step).unwrap();
            let psi = state_from_params(p);
            let back = reconstruct_state(&describe_state(&psi, c).unwrap(), c).unwrap();
            worst = worst.min(fidelity_pure(&psi, &back).unwrap());
        }
    }
    worst
}

/// Violation through the verifier, the reference path for the τ oracle.
pub fn reference_objective(p: &[f64], s: &StateSet, dims: Dims) -> f64 {
    violation(&isometry_from_params(p, dims).unwrap(), s).unwrap()
}

/// Central-difference gradient descent with backtracking line search.
pub fn gradient_polish(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], max_steps: usize) -> (Vec<f64>, f64) {
    let h = 1e-6;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step: f64 = 1.0;
    for _ in 0..max_steps {
        let mut g = vec![0.0; x.len()];
        let mut probe = x.clone();
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            g[i] = (up - down) / (2.0 * h);
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 < 1e-20 {
            break;
        }
        step = (step * 2.0).min(4.0);
        let mut improved = false;
        while step > 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let fc = f(&cand);
            if fc <= fx - 1e-4 * step * g2 {
                let gain = fx - fc;
                x = cand;
                fx = fc;
                improved = gain > 1e-12;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TauEntry {
    pub d_b: usize,
    pub samples: usize,
    pub polished: usize,
    pub seed: u64,
    pub sampled_min: f64,
    pub polished_min: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TauFixture {
    pub state_set: String,
    pub entries: Vec<TauEntry>,
}

impl TauFixture {
    pub fn tau(&self, d_b: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.d_b == d_b)
            .unwrap_or_else(|| panic!("no τ recorded for d_B = {d_b}"))
            .tau
    }
}

pub fn tau_fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/witness_tau.json")
}

pub fn load_tau_fixture() -> TauFixture {
    let text = std::fs::read_to_string(tau_fixture_path()).expect("τ fixture present");
    serde_json::from_str(&text).expect("τ fixture parses")
}

/// Sampling oracle for the no-masking floor: evaluate `samples` uniform
/// random parameter points, polish the best `polished` of them by gradient
/// descent, and set τ to half the smallest value found.
pub fn tau_oracle(
    s: &StateSet,
    d_b: usize,
    samples: usize,
    polished: usize,
    seed: u64,
) -> TauEntry {
    let dims = Dims::new(s.dim(), d_b).unwrap();
    let n = param_count(dims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..samples {
        let p: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let j = reference_objective(&p, s, dims);
        if best.len() < polished || j < best.last().unwrap().0 {
            best.push((j, p));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(polished);
        }
    }
    let sampled_min = best[0].0;
    let f = |p: &[f64]| reference_objective(p, s, dims);
    let polished_min = best
        .iter()
        .map(|(_, p)| gradient_polish(&f, p, 400).1)
        .fold(sampled_min, f64::min);
    TauEntry {
        d_b,
        samples,
        polished,
        seed,
        sampled_min,
        polished_min,
        tau: polished_min / 2.0,
    }
}
