//! Qubit commitment carried out as commitment to the qubit's classical
//! description.
//!
//! Alice encodes the description as a bit-string, masks it pair by pair and
//! hands Bob the B halves. Bob's view is a list of maximally mixed qubits, so
//! the scheme conceals. To open, Alice releases her halves and Bob decodes in
//! the Bell basis. A local Z on any A half turns Φ± into Φ∓ without touching
//! Bob's marginals, so Alice can change her mind after committing: this
//! scheme is concealing but not binding. [`Commitment::cheat_phase_flip`]
//! makes that explicit.
//!
//! The simulator plays a trusted referee that holds every joint pair; moving
//! a qubit between parties moves access, never a copy.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmask::{mask_string, unmask_string, BitString, MaskedRegister, DEFAULT_DECODE_TOL};
use crate::qcore::{
    self, apply, maximally_mixed, pauli_z, trace_distance, CMatrix, Dims, QError, Subsystem,
};
use crate::scodec::{
    decode_index, decode_params, encode_index, encode_params, reconstruction_fidelity_floor,
    state_from_params, Alphabet, CodecConfig, CodecError, QubitParams,
};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("cannot commit to an empty description")]
    EmptyDescription,
    #[error("operation requires phase {expected}, session is {found}")]
    WrongPhase { expected: Phase, found: Phase },
    #[error("position {position} out of range for {len} committed bits")]
    PositionOutOfRange { position: usize, len: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Linalg(#[from] QError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Committed,
    Opened,
    Aborted,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Committed => "committed",
            Phase::Opened => "opened",
            Phase::Aborted => "aborted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: Party,
    pub payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub phase: Phase,
    pub messages: Vec<Message>,
    pub verdict: Option<Verdict>,
}

impl Transcript {
    fn say(&mut self, sender: Party, payload: impl Into<String>) {
        self.messages.push(Message {
            sender,
            payload: payload.into(),
        });
    }
}

/// A single qubit of a masked pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRef {
    pub pair: usize,
    pub side: Subsystem,
}

/// One commitment session.
#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    description: BitString,
    register: MaskedRegister,
    alice_holdings: Vec<QubitRef>,
    bob_holdings: Vec<CMatrix>,
    transcript: Transcript,
}

/// Result of an opening attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub verdict: Verdict,
    /// What Bob read from the released pairs.
    pub decoded: Option<BitString>,
    /// Position of a pair that failed to decode.
    pub tamper_position: Option<usize>,
}

fn b_marginals(r: &MaskedRegister) -> Result<Vec<CMatrix>, QError> {
    r.pairs()
        .iter()
        .map(|p| qcore::marginal(p, Dims::qubits(), Subsystem::B))
        .collect()
}

impl Commitment {
    /// Masks `description` and hands Bob the B half of every pair.
    pub fn commit(description: BitString) -> Result<Self, ProtocolError> {
        if description.is_empty() {
            return Err(ProtocolError::EmptyDescription);
        }
        let register = mask_string(&description);
        let bob_holdings = b_marginals(&register)?;
        let alice_holdings = (0..register.len())
            .map(|pair| QubitRef {
                pair,
                side: Subsystem::A,
            })
            .collect();
        let mut transcript = Transcript {
            phase: Phase::Committed,
            messages: Vec::new(),
            verdict: None,
        };
        transcript.say(
            Party::Alice,
            format!("commit: {} masked pairs, B halves sent", register.len()),
        );
        Ok(Self {
            description,
            register,
            alice_holdings,
            bob_holdings,
            transcript,
        })
    }

    pub fn phase(&self) -> Phase {
        self.transcript.phase
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn len(&self) -> usize {
        self.register.len()
    }

    pub fn is_empty(&self) -> bool {
        self.register.is_empty()
    }

    /// The string Alice committed to (simulator ground truth).
    pub fn description(&self) -> &BitString {
        &self.description
    }

    pub fn alice_holdings(&self) -> &[QubitRef] {
        &self.alice_holdings
    }

    pub fn register(&self) -> &MaskedRegister {
        &self.register
    }

    fn require_committed(&self) -> Result<(), ProtocolError> {
        match self.phase() {
            Phase::Committed => Ok(()),
            found => Err(ProtocolError::WrongPhase {
                expected: Phase::Committed,
                found,
            }),
        }
    }

    /// Bob's per-pair marginals.
    pub fn bob_view(&self) -> Result<&[CMatrix], ProtocolError> {
        self.require_committed()?;
        Ok(&self.bob_holdings)
    }

    /// Bob's whole view as one operator; limited by the joint dimension cap.
    pub fn bob_view_joint(&self) -> Result<CMatrix, ProtocolError> {
        let view = self.bob_view()?;
        let mut acc = view[0].clone();
        for m in &view[1..] {
            acc = acc.kron(m)?;
        }
        Ok(acc)
    }

    /// Alice applies Z to her half of each listed pair before opening.
    pub fn cheat_phase_flip(&self, positions: &[usize]) -> Result<Commitment, ProtocolError> {
        self.require_committed()?;
        let z_on_a = pauli_z().kron(&CMatrix::identity(2))?;
        let mut out = self.clone();
        for &position in positions {
            let pair = out.register.pairs_mut().get_mut(position).ok_or(
                ProtocolError::PositionOutOfRange {
                    position,
                    len: self.len(),
                },
            )?;
            *pair = apply(&z_on_a, pair)?;
        }
        out.bob_holdings = b_marginals(&out.register)?;
        Ok(out)
    }

    /// Alice releases her halves and claims `claimed`; Bob decodes and compares.
    pub fn open(&mut self, claimed: &BitString) -> Result<Opening, ProtocolError> {
        self.require_committed()?;
        self.transcript.phase = Phase::Opened;
        self.transcript.say(
            Party::Alice,
            format!("open: claims {claimed}, A halves released"),
        );

        let opening = if claimed.len() != self.len() {
            self.transcript.say(
                Party::Bob,
                format!(
                    "reject: claim has {} bits, commitment has {}",
                    claimed.len(),
                    self.len()
                ),
            );
            Opening {
                verdict: Verdict::Reject,
                decoded: None,
                tamper_position: None,
            }
        } else {
            match unmask_string(&self.register, DEFAULT_DECODE_TOL) {
                Ok(decoded) => {
                    let verdict = if decoded == *claimed {
                        Verdict::Accept
                    } else {
                        Verdict::Reject
                    };
                    self.transcript.say(
                        Party::Bob,
                        format!(
                            "decoded {decoded}: {}",
                            if verdict == Verdict::Accept {
                                "accept"
                            } else {
                                "reject"
                            }
                        ),
                    );
                    Opening {
                        verdict,
                        decoded: Some(decoded),
                        tamper_position: None,
                    }
                }
                Err(e) => {
                    self.transcript
                        .say(Party::Bob, format!("reject: tampering detected, {e}"));
                    Opening {
                        verdict: Verdict::Reject,
                        decoded: None,
                        tamper_position: e.position(),
                    }
                }
            }
        };
        self.transcript.verdict = Some(opening.verdict);
        Ok(opening)
    }

    pub fn abort(&mut self) -> Result<(), ProtocolError> {
        self.require_committed()?;
        self.transcript.phase = Phase::Aborted;
        self.transcript.say(Party::Alice, "abort");
        Ok(())
    }
}

/// Largest per-pair trace distance between two of Bob's views.
pub fn view_distance(a: &[CMatrix], b: &[CMatrix]) -> Result<f64, ProtocolError> {
    if a.len() != b.len() {
        return Err(QError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        }
        .into());
    }
    a.iter()
        .zip(b)
        .try_fold(0.0f64, |worst, (x, y)| Ok(worst.max(trace_distance(x, y)?)))
}

/// Where the committed description comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DescriptionSource {
    /// Fixed-point `(α, θ)`.
    Params {
        params: QubitParams,
        config: CodecConfig,
    },
    /// Index into a known alphabet.
    Alphabet { alphabet: Alphabet, index: usize },
    /// A raw bit-string.
    Bits(BitString),
}

impl DescriptionSource {
    pub fn encode(&self) -> Result<BitString, ProtocolError> {
        Ok(match self {
            DescriptionSource::Params { params, config } => encode_params(*params, *config),
            DescriptionSource::Alphabet { alphabet, index } => encode_index(*index, alphabet)?,
            DescriptionSource::Bits(b) => b.clone(),
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            DescriptionSource::Params { .. } => "params",
            DescriptionSource::Alphabet { .. } => "alphabet",
            DescriptionSource::Bits(_) => "bits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub schema_version: String,
    pub source: String,
    pub committed: BitString,
    pub claimed: BitString,
    pub cheat_positions: Vec<usize>,
    pub verdict: Verdict,
    pub tamper_position: Option<usize>,
    /// Max per-pair distance between Bob's view and his view of a commitment
    /// to the complementary string.
    pub concealing_audit: f64,
    /// Max per-pair distance between Bob's view before and after the cheat.
    pub bob_view_shift: Option<f64>,
    /// Bob accepted a string other than the one committed.
    pub binding_violated: bool,
    pub unveiled_params: Option<QubitParams>,
    pub fidelity: Option<f64>,
    pub fidelity_floor: Option<f64>,
    pub recovered_index: Option<usize>,
    pub index_match: Option<bool>,
    pub transcript: Transcript,
}

/// Commit, optionally cheat, open; report what each party could observe.
pub fn run_demo(
    source: &DescriptionSource,
    cheat: Option<&[usize]>,
) -> Result<DemoReport, ProtocolError> {
    let committed = source.encode()?;
    let mut session = Commitment::commit(committed.clone())?;

    let all: Vec<usize> = (0..committed.len()).collect();
    let reference = Commitment::commit(committed.flipped(&all))?;
    let concealing_audit = view_distance(session.bob_view()?, reference.bob_view()?)?;
    // every honest view equals I/2 per pair as well
    debug_assert!(session
        .bob_view()?
        .iter()
        .all(|m| trace_distance(m, &maximally_mixed(2)).unwrap_or(1.0) <= 1e-12));

    let cheat_positions = cheat.unwrap_or(&[]).to_vec();
    let (claimed, bob_view_shift) = match cheat {
        Some(positions) => {
            let before = session.bob_view()?.to_vec();
            session = session.cheat_phase_flip(positions)?;
            let shift = view_distance(&before, session.bob_view()?)?;
            (committed.flipped(positions), Some(shift))
        }
        None => (committed.clone(), None),
    };

    let opening = session.open(&claimed)?;
    let accepted = opening.verdict == Verdict::Accept;

    let mut report = DemoReport {
        schema_version: SCHEMA_VERSION.to_string(),
        source: source.kind().to_string(),
        binding_violated: accepted && claimed != committed,
        committed,
        claimed,
        cheat_positions,
        verdict: opening.verdict,
        tamper_position: opening.tamper_position,
        concealing_audit,
        bob_view_shift,
        unveiled_params: None,
        fidelity: None,
        fidelity_floor: None,
        recovered_index: None,
        index_match: None,
        transcript: session.transcript().clone(),
    };

    if let Some(decoded) = opening.decoded.as_ref().filter(|_| accepted) {
        match source {
            DescriptionSource::Params { params, config } => {
                let unveiled = decode_params(decoded, *config)?;
                let f = qcore::fidelity_pure(
                    &state_from_params(*params),
                    &state_from_params(unveiled),
                )?;
                report.unveiled_params = Some(unveiled);
                report.fidelity = Some(f);
                report.fidelity_floor = Some(reconstruction_fidelity_floor(*config));
            }
            DescriptionSource::Alphabet { alphabet, index } => {
                let recovered = decode_index(decoded, alphabet)?;
                report.recovered_index = Some(recovered);
                report.index_match = Some(recovered == *index);
            }
            DescriptionSource::Bits(_) => {}
        }
    }
    Ok(report)
}
