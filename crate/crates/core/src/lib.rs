//! Masking known quantum states by masking their classical descriptions.
//!
//! * [`qcore`]: dense complex linear algebra, partial trace, distances, Bell basis.
//! * [`cmask`]: Bell-phase masking of classical bit-strings.
//! * [`scodec`]: fixed-point and alphabet-index descriptions of qubit states.
//! * [`verifier`]: the masking criterion for an isometry on a state set.
//! * [`witness`]: isometry search showing which sets can and cannot be masked.
//! * [`protocol`]: qubit commitment reduced to commitment on a description.

pub mod cmask;
pub mod protocol;
pub mod qcore;
pub mod scodec;
pub mod verifier;
pub mod witness;

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: &str = "1";
