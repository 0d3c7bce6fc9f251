//! User and server state machines for the two protocol phases.
//!
//! The setup phase runs once: users exchange signed key-agreement keys
//! through the server, derive pairwise symmetric keys, and distribute
//! encrypted Shamir shares of their mask secrets. The aggregation phase
//! runs for `K` iterations of three rounds: masked updates in the
//! exponent, an online-set check (malicious mode only), and mask
//! reconstruction in the exponent followed by the server's bounded
//! discrete log.
//!
//! Every abort condition in the two phases maps to exactly one
//! [`ProtocolAbort`] variant; there are no silent failures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod config;
pub mod messages;
pub mod server;
pub mod user;

pub use config::{Defenses, Mode, ProtocolConfig, Variant};
pub use messages::{MsgType, Party, RoundMessage};
pub use server::ServerState;
pub use user::UserState;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolAbort {
    /// Fewer than `t` users survived a setup round.
    #[error("fewer than t users available")]
    TooFewUsers,
    /// A peer signature relayed by the server failed, which honest users
    /// treat as server corruption.
    #[error("server relayed an invalid key signature for user {0}")]
    BadServerSignature(u64),
    /// Fewer than `t` well-formed round-1 updates arrived.
    #[error("fewer than t users online")]
    TooFewOnline,
    /// The announced online set contains a user outside the local set,
    /// or the local shares cannot cover it.
    #[error("online set is not covered by the local user set")]
    SetNotSubset,
    /// Fewer than `t` valid online-set signatures.
    #[error("fewer than t valid online-set signatures")]
    TooFewSignatures,
    /// The aggregated online-set signature failed verification.
    #[error("aggregate online-set signature invalid")]
    BadAggregate,
    /// Fewer than `t` reconstruction shares arrived in round 3.
    #[error("fewer than t round-3 responders")]
    TooFewResponders,
    /// A user input coordinate falls outside `[0, 2^input_bits)`.
    #[error("input coordinate out of range")]
    InputOutOfRange,
    /// The unmasking discrete log found no exponent below the bound;
    /// the aggregate is inconsistent.
    #[error("unmasked aggregate out of range")]
    NotInRange,
    /// A wire payload failed to decode where the protocol requires a
    /// well-formed message from an honest relay.
    #[error("malformed {0} message")]
    Malformed(&'static str),
}

/// Operation counts a party accumulates while stepping; the simulator
/// snapshots these per round. Exponentiations are counted in the masking
/// group only — signature work is captured by the verification counter.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounters {
    pub sig_verifications: u64,
    pub group_exponentiations: u64,
}
