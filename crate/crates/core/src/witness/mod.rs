//! Search over isometries for a masker of a given state set.
//!
//! Candidates are `V(p)·ψ = exp(iH(p))·(ψ ⊗ |0⟩_B)`, which reaches every
//! isometry `H_A → H_A ⊗ H_B` for the chosen `d_B`. The search minimizes the
//! verifier's violation score from seeded random starting points. On a
//! maskable set the best score falls to numerical zero; on a set that cannot
//! be masked it stays bounded away from zero.

pub mod simplex;

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{exp_i_hermitian, CMatrix, Dims, QError, C64};
use crate::verifier::{violation, Isometry, StateSet, VerifyError};
use crate::SCHEMA_VERSION;

use self::simplex::{SimplexOptions, SimplexOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("expected {expected} parameters, got {found}")]
    ParamCount { expected: usize, found: usize },
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Linalg(#[from] QError),
}

/// Number of real parameters for a joint dimension `d = d_A·d_B`: `d²`.
pub fn param_count(dims: Dims) -> usize {
    dims.joint() * dims.joint()
}

/// Hermitian generator filled from `p`.
///
/// Order: the `d` diagonal entries first, then for each upper-triangle
/// position `(i, j)`, `i < j`, in row-major order, its real part followed by
/// its imaginary part.
pub fn generator_from_params(p: &[f64], dims: Dims) -> Result<CMatrix, WitnessError> {
    let d = dims.joint();
    if p.len() != d * d {
        return Err(WitnessError::ParamCount {
            expected: d * d,
            found: p.len(),
        });
    }
    let mut h = CMatrix::zeros(d, d);
    for (i, &v) in p[..d].iter().enumerate() {
        h.set(i, i, C64::new(v, 0.0));
    }
    let mut rest = p[d..].chunks_exact(2);
    for i in 0..d {
        for j in i + 1..d {
            let pair = rest.next().expect("length checked");
            let z = C64::new(pair[0], pair[1]);
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    Ok(h)
}

/// `ψ ↦ exp(iH(p))·(ψ ⊗ |0⟩)`.
pub fn isometry_from_params(p: &[f64], dims: Dims) -> Result<Isometry, WitnessError> {
    let u = exp_i_hermitian(&generator_from_params(p, dims)?)?;
    // ψ ⊗ |0⟩ selects the columns a·d_B of the unitary
    let v = CMatrix::from_fn(dims.joint(), dims.d_a, |row, a| u.get(row, a * dims.d_b));
    Ok(Isometry::new(v, dims)?)
}

/// Violation score of the isometry named by `p`.
pub fn objective(p: &[f64], s: &StateSet, dims: Dims) -> Result<f64, WitnessError> {
    Ok(violation(&isometry_from_params(p, dims)?, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub d_b: usize,
    /// Edge length of each fresh simplex.
    pub initial_step: f64,
    pub trace_every: usize,
}

impl SearchConfig {
    pub fn new(seed: u64, d_b: usize) -> Self {
        Self {
            restarts: 20,
            max_iters: 10_000,
            tol: 1e-13,
            seed,
            d_b,
            initial_step: 0.5,
            trace_every: 250,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_d_b(mut self, d_b: usize) -> Self {
        self.d_b = d_b;
        self
    }

    pub fn validate(&self) -> Result<(), WitnessError> {
        let bad = |m: &str| Err(WitnessError::Config(m.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be positive");
        }
        if self.initial_step.is_nan() || self.initial_step <= 0.0 {
            return bad("initial_step must be positive");
        }
        if !matches!(self.d_b, 2 | 4) {
            return bad("d_b must be 2 or 4");
        }
        Ok(())
    }

    /// Seed of restart `r`.
    pub fn restart_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub seed: u64,
    pub final_j: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best-so-far J, sampled every `trace_every` iterations, ending at `final_j`.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema_version: String,
    pub state_set: String,
    pub dims: [usize; 2],
    pub config: SearchConfig,
    pub best_j: f64,
    pub best_restart: usize,
    pub best_params: Vec<f64>,
    pub restarts: Vec<RestartTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ReportMetadata>,
}

impl WitnessReport {
    /// JSON without the wall-clock metadata; identical across reruns.
    pub fn deterministic_json(&self) -> String {
        let mut r = self.clone();
        r.metadata = None;
        serde_json::to_string(&r).expect("finite report")
    }
}

fn run_restart(
    s: &StateSet,
    dims: Dims,
    cfg: &SearchConfig,
    restart: usize,
) -> (SimplexOutcome, u64) {
    let seed = cfg.restart_seed(restart);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..param_count(dims))
        .map(|_| rng.random_range(-PI..=PI))
        .collect();
    let opts = SimplexOptions {
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        initial_step: cfg.initial_step,
        trace_every: cfg.trace_every,
    };
    let f = |p: &[f64]| objective(p, s, dims).unwrap_or(f64::INFINITY);
    (simplex::minimize(f, &x0, &opts), seed)
}

/// Runs `cfg.restarts` independent simplex searches and keeps the best.
pub fn minimize(s: &StateSet, cfg: &SearchConfig) -> Result<WitnessReport, WitnessError> {
    cfg.validate()?;
    let dims = Dims::new(s.dim(), cfg.d_b)?;
    // fail on malformed input here rather than inside the search
    objective(&vec![0.0; param_count(dims)], s, dims)?;

    let start = Instant::now();
    let outcomes: Vec<(SimplexOutcome, u64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(s, dims, cfg, r))
        .collect();

    let (best_restart, _) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.value.total_cmp(&b.1 .0.value))
        .expect("at least one restart");
    let best_params = outcomes[best_restart].0.x.clone();
    let best_j = outcomes[best_restart].0.value;
    let restarts = outcomes
        .into_iter()
        .enumerate()
        .map(|(restart, (o, seed))| RestartTrace {
            restart,
            seed,
            final_j: o.value,
            iterations: o.iterations,
            evaluations: o.evaluations,
            converged: o.converged,
            trace: o.trace,
        })
        .collect();

    Ok(WitnessReport {
        schema_version: SCHEMA_VERSION.to_string(),
        state_set: s.label().to_string(),
        dims: [dims.d_a, dims.d_b],
        config: *cfg,
        best_j,
        best_restart,
        best_params,
        restarts,
        metadata: Some(ReportMetadata {
            wall_time_s: start.elapsed().as_secs_f64(),
        }),
    })
}

/// One [`minimize`] report per ancilla dimension, all with the same seed.
pub fn sweep(
    s: &StateSet,
    d_b_values: &[usize],
    cfg: &SearchConfig,
) -> Result<Vec<WitnessReport>, WitnessError> {
    d_b_values
        .iter()
        .map(|&d_b| minimize(s, &cfg.with_d_b(d_b)))
        .collect()
}
