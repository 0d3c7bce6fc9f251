//! The protocol's cryptographic toolbox.
//!
//! Two groups are in play. The masking group ([`crate::group::GroupParams`])
//! is small on purpose so the simulated eavesdropper can take discrete
//! logs of masked updates. Everything here that protects data in transit —
//! key agreement, encryption, signatures — runs over a fixed full-width
//! auxiliary group instead, so shrinking the masking group does not leak
//! the shares themselves.

use thiserror::Error;

pub mod ae;
pub mod ka;
pub mod mac;
pub mod prf;
pub mod shamir;
pub mod sig;

pub use ae::{ae_decrypt, ae_encrypt, Ciphertext};
pub use ka::{aux_group, ka_agree, ka_gen, KeyPair, SharedKey};
pub use mac::{mac_tag, mac_verify, MacTag};
pub use prf::prf_eval;
pub use shamir::{ss_recon, ss_share, SecretShare};
pub use sig::{
    msig_aggregate, msig_sign, msig_verify, sign, verify, AggregateSignature, SigScheme, Signature,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("threshold {t} exceeds the {n} available share indices")]
    ThresholdTooLarge { t: usize, n: usize },
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("share index invalid: {0}")]
    BadShareIndex(&'static str),
    #[error("public key is not a valid member of the auxiliary group")]
    InvalidPublicKey,
    #[error("ciphertext failed authentication")]
    AuthFailure,
    #[error("signatures carry mismatched scheme tags")]
    SchemeMismatch,
    #[error("cannot aggregate an empty signature list")]
    EmptyAggregation,
    #[error("malformed {0} encoding")]
    Malformed(&'static str),
}
