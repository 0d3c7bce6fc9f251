//! Laboratory for masking-based secure aggregation.
//!
//! The crate is organized around six pieces:
//!
//! * [`group`] — arithmetic in a safe-prime group: exponentiation,
//!   hash-to-group, baby-step giant-step discrete logs, and Lagrange
//!   reconstruction in the exponent.
//! * [`crypto`] — the protocol toolbox: Shamir secret sharing over `Z_q`,
//!   Diffie-Hellman key agreement, authenticated encryption, a PRF,
//!   Schnorr signatures, HMAC tags, and an aggregatable-signature scheme.
//! * [`protocol`] — user and server state machines for the one-time setup
//!   phase and the multi-iteration aggregation phase, with switchable
//!   hardening variants (per-iteration masks, MAC'd updates, aggregated
//!   set signatures).
//! * [`sim`] — a deterministic round-barrier message bus with dropout
//!   injection, an in-flight tampering hook, a passive eavesdropper
//!   transcript, and per-role cost metrics.
//! * [`attack`] — the eavesdropper: extracts masked exponents from
//!   round-1 traffic by discrete log, recovers cross-iteration update
//!   differences, scores them against ground truth, and runs a
//!   linear-model inversion demo.
//! * [`encoding`] — the canonical length-prefixed byte encoding shared by
//!   wire payloads, signatures, and MACs.
//!
//! Everything is deterministic for a fixed seed: party randomness comes
//! from per-party ChaCha20 streams derived in [`rng`].

pub mod attack;
pub mod crypto;
pub mod encoding;
pub mod group;
pub mod protocol;
pub mod rng;
pub mod sim;
