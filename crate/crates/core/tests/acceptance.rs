//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.
//!
//! Run with `cargo test --release -p qmask --test acceptance`.

mod support;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qmask::cmask::{encode_bit, mask_string, unmask_string, BitString, DEFAULT_DECODE_TOL};
use qmask::protocol::{run_demo, view_distance, Commitment, DescriptionSource, Verdict};
use qmask::qcore::{density_of, maximally_mixed, partial_trace, trace_distance, Dims, Subsystem};
use qmask::scodec::{reconstruction_fidelity_floor, state_from_params, CodecConfig, QubitParams};
use qmask::verifier::{is_masker, Isometry, StateSet};
use qmask::witness::{minimize, SearchConfig, WitnessReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const SEED_C2: u64 = 2;
const SEED_C3: u64 = 3;
const SEED_C4: u64 = 4;
const SEED_C5: u64 = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id} {name}: {} ({:.2}s, limit {}s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" },
    );
    pass
}

fn criterion_1() -> Outcome {
    let dims = Dims::qubits();
    let half = maximally_mixed(2);
    let mut worst_pair: f64 = 0.0;
    let mut worst_mixed: f64 = 0.0;
    for side in Subsystem::BOTH {
        let m0 = partial_trace(&density_of(&encode_bit(false)).unwrap(), dims, side).unwrap();
        let m1 = partial_trace(&density_of(&encode_bit(true)).unwrap(), dims, side).unwrap();
        worst_pair = worst_pair.max(trace_distance(&m0, &m1).unwrap());
        worst_mixed = worst_mixed
            .max(trace_distance(&m0, &half).unwrap())
            .max(trace_distance(&m1, &half).unwrap());
    }
    Outcome {
        pass: worst_pair <= 1e-12 && worst_mixed <= 1e-12,
        detail: format!(
            "max D(ρ0,ρ1) = {worst_pair:.3e}, max D(ρ,I/2) = {worst_mixed:.3e}, bound 1e-12"
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_C2);
    let mut failures = 0;
    for _ in 0..1000 {
        let len = rng.random_range(0..=64);
        let s = BitString::from_bits((0..len).map(|_| rng.random()).collect());
        if unmask_string(&mask_string(&s), DEFAULT_DECODE_TOL)
            .ok()
            .as_ref()
            != Some(&s)
        {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("1000 strings (seed {SEED_C2}), {failures} mismatches"),
    }
}

#[derive(Serialize)]
struct PipelineReport {
    seed: u64,
    precision_bits: u32,
    floor: f64,
    samples: Vec<(QubitParams, f64)>,
}

fn pipeline_report() -> PipelineReport {
    let c = CodecConfig::new(20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_C3);
    let samples = (0..100)
        .map(|_| {
            let p = QubitParams::new(
                rng.random_range(0.0..=FRAC_PI_2),
                rng.random_range(0.0..TAU),
            )
            .unwrap();
            (p, support::pipeline_fidelity(&state_from_params(p), c))
        })
        .collect();
    PipelineReport {
        seed: SEED_C3,
        precision_bits: 20,
        floor: reconstruction_fidelity_floor(c),
        samples,
    }
}

fn criterion_3(report: &PipelineReport) -> Outcome {
    // grid oracle at step 2^-22 per parameter, windowed
    let grid_min = support::fidelity_grid_min(20, false, 64);
    let worst = report.samples.iter().map(|s| s.1).fold(1.0, f64::min);
    let floor = report.floor;
    Outcome {
        pass: worst >= floor && floor <= grid_min && floor > 1.0 - 1e-9,
        detail: format!(
            "min fidelity 1-{:.3e} over 100 states (seed {SEED_C3}), floor 1-{:.3e}, grid oracle min 1-{:.3e}",
            1.0 - worst,
            1.0 - floor,
            1.0 - grid_min
        ),
    }
}

fn criterion_4() -> Outcome {
    let family = StateSet::phase_family(FRAC_PI_4, 8);
    let verdict = is_masker(&Isometry::diagonal_masker(), &family, 1e-10).unwrap();
    let search = minimize(&family, &SearchConfig::new(SEED_C4, 2).with_restarts(50)).unwrap();
    Outcome {
        pass: verdict.is_masker && search.best_j <= 1e-8,
        detail: format!(
            "diagonal masker verdict {} (J = {:.3e}); optimizer best J = {:.3e} in 50 restarts (seed {SEED_C4}), bound 1e-8",
            verdict.is_masker, verdict.violation, search.best_j
        ),
    }
}

struct WitnessRun {
    stabilizer: Vec<WitnessReport>,
    control: Vec<WitnessReport>,
}

fn witness_run() -> WitnessRun {
    let budget = |d_b| SearchConfig::new(SEED_C5, d_b).with_restarts(200);
    let run = |s: &StateSet| {
        [2, 4]
            .map(|d_b| minimize(s, &budget(d_b)).unwrap())
            .to_vec()
    };
    WitnessRun {
        stabilizer: run(&StateSet::stabilizer()),
        control: run(&StateSet::classical()),
    }
}

fn criterion_5(run: &WitnessRun) -> Outcome {
    let fixture = support::load_tau_fixture();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &run.stabilizer {
        let tau = fixture.tau(r.dims[1]);
        pass &= tau > 0.0 && r.best_j >= tau;
        parts.push(format!(
            "stabilizer d_B={} best J {:.6} vs τ {:.6}",
            r.dims[1], r.best_j, tau
        ));
    }
    for r in &run.control {
        pass &= r.best_j <= 1e-8;
        parts.push(format!("control d_B={} best J {:.3e}", r.dims[1], r.best_j));
    }
    Outcome {
        pass,
        detail: format!("200 restarts (seed {SEED_C5}); {}", parts.join("; ")),
    }
}

fn criterion_6() -> Outcome {
    let source = DescriptionSource::Params {
        params: QubitParams::new(FRAC_PI_4, PI).unwrap(),
        config: CodecConfig::new(16).unwrap(),
    };
    let honest = run_demo(&source, None).unwrap();
    let honest_ok = honest.verdict == Verdict::Accept
        && honest.concealing_audit <= 1e-12
        && !honest.binding_violated
        && honest.fidelity.unwrap() >= honest.fidelity_floor.unwrap();

    let committed = source.encode().unwrap();
    let mut session = Commitment::commit(committed.clone()).unwrap();
    let wrong = session.open(&committed.flipped(&[0])).unwrap();
    let wrong_ok = wrong.verdict == Verdict::Reject;

    let cheat = run_demo(&source, Some(&[0, 3, 5])).unwrap();
    let shift = cheat.bob_view_shift.unwrap();
    let cheat_ok = cheat.verdict == Verdict::Accept
        && cheat.claimed == committed.flipped(&[0, 3, 5])
        && shift <= 1e-12
        && cheat.binding_violated;

    // an independent look at the pre-open views
    let before = Commitment::commit(committed.clone()).unwrap();
    let after = before.cheat_phase_flip(&[0, 3, 5]).unwrap();
    let direct_shift =
        view_distance(before.bob_view().unwrap(), after.bob_view().unwrap()).unwrap();

    Outcome {
        pass: honest_ok && wrong_ok && cheat_ok && direct_shift <= 1e-12,
        detail: format!(
            "honest {:?} (audit {:.3e}); wrong claim {:?}; cheat {:?} with view shift {:.3e}, binding_violated {}",
            honest.verdict, honest.concealing_audit, wrong.verdict, cheat.verdict, shift.max(direct_shift), cheat.binding_violated
        ),
    }
}

fn criterion_7(first_c3: &PipelineReport, first_c5: &WitnessRun) -> Outcome {
    let c3 = |r: &PipelineReport| serde_json::to_string(r).unwrap();
    let c5 = |r: &WitnessRun| {
        r.stabilizer
            .iter()
            .chain(&r.control)
            .map(WitnessReport::deterministic_json)
            .collect::<Vec<_>>()
    };
    let same_c3 = c3(first_c3) == c3(&pipeline_report());
    let same_c5 = c5(first_c5) == c5(&witness_run());
    Outcome {
        pass: same_c3 && same_c5,
        detail: format!("rerun pipeline report identical: {same_c3}; rerun witness reports identical: {same_c5}"),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= check(1, "marginal independence", secs(1), criterion_1);
    all &= check(2, "classical round trip", secs(5), criterion_2);

    let mut c3 = None;
    all &= check(3, "known-state pipeline", secs(120), || {
        let r = pipeline_report();
        let o = criterion_3(&r);
        c3 = Some(r);
        o
    });
    all &= check(4, "restricted-set maskability", secs(120), criterion_4);

    let mut c5 = None;
    all &= check(5, "no-masking witness", secs(600), || {
        let r = witness_run();
        let o = criterion_5(&r);
        c5 = Some(r);
        o
    });
    all &= check(6, "commitment reduction", secs(10), criterion_6);
    all &= check(7, "determinism", secs(720), || {
        criterion_7(c3.as_ref().unwrap(), c5.as_ref().unwrap())
    });
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
