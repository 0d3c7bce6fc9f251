//! Run configuration shared by every party.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Round 2 of aggregation (online-set checking) is skipped.
    SemiHonest,
    /// Users sign the online set and verify everyone else's signatures.
    Malicious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// One mask secret per coordinate, reused every iteration.
    Baseline,
    /// An independent mask secret per (iteration, coordinate), all shared
    /// during setup. Immune to cross-iteration differencing.
    PerIterationMasks,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defenses {
    /// Users tag round-1 masked updates with an HMAC under a key agreed
    /// with the server.
    pub mac_updates: bool,
    /// The server compacts round-2 set signatures into one aggregate.
    pub multisig: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("threshold must satisfy 1 <= t <= n (t = {t}, n = {n})")]
    BadThreshold { t: usize, n: usize },
    #[error("user count must be in [1, 2^20]")]
    BadUserCount,
    #[error("vector length must be at least 1")]
    BadVectorLen,
    #[error("iteration count must be at least 1")]
    BadIterations,
    #[error("input bits must be in [1, 20]")]
    BadInputBits,
    #[error("n * (2^input_bits - 1) must stay below the group order q")]
    InputDomainTooLarge,
}

/// Static parameters of one protocol execution.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    /// Number of users, with identifiers `1..=n`.
    pub n: usize,
    /// Reconstruction threshold.
    pub t: usize,
    /// Number of aggregation iterations `K`.
    pub iterations: u64,
    /// Update vector length `L`.
    pub vector_len: usize,
    /// Inputs are integers in `[0, 2^input_bits)`.
    pub input_bits: u32,
    pub mode: Mode,
    pub variant: Variant,
    pub defenses: Defenses,
    pub masking_group: GroupParams,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 || self.n > (1 << 20) {
            return Err(ConfigError::BadUserCount);
        }
        if self.t == 0 || self.t > self.n {
            return Err(ConfigError::BadThreshold {
                t: self.t,
                n: self.n,
            });
        }
        if self.vector_len == 0 {
            return Err(ConfigError::BadVectorLen);
        }
        if self.iterations == 0 {
            return Err(ConfigError::BadIterations);
        }
        if self.input_bits == 0 || self.input_bits > 20 {
            return Err(ConfigError::BadInputBits);
        }
        if self.sum_bound() > *self.masking_group.q() {
            return Err(ConfigError::InputDomainTooLarge);
        }
        Ok(())
    }

    /// Exclusive upper bound on any aggregate sum:
    /// `n * (2^input_bits - 1) + 1`, the server's discrete-log search
    /// range.
    pub fn sum_bound(&self) -> BigUint {
        BigUint::from(self.n) * ((BigUint::one() << self.input_bits) - 1u32) + 1u32
    }

    /// Exclusive upper bound on a single input coordinate.
    pub fn input_bound(&self) -> u64 {
        1u64 << self.input_bits
    }

    /// Number of independent mask secrets a user holds.
    pub fn mask_rows(&self) -> usize {
        match self.variant {
            Variant::Baseline => 1,
            Variant::PerIterationMasks => self.iterations as usize,
        }
    }

    /// Row of the mask matrix used at iteration `k` (1-based).
    pub fn mask_row(&self, k: u64) -> usize {
        match self.variant {
            Variant::Baseline => 0,
            Variant::PerIterationMasks => (k - 1) as usize,
        }
    }
}
