//! Keyed pseudorandom function into `Z_q`.
//!
//! A 256-bit keyed hash reduced mod `q`. The reduction bias is at most
//! `2^-(256 - bits(q))`, negligible at every group size this lab uses.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::group::Scalar;

const PRF_DOMAIN: &[u8] = b"secagg.prf.v1";

pub fn prf_eval(key: &[u8], input: &[u8], q: &BigUint) -> Scalar {
    let mut h = Sha256::new();
    h.update(PRF_DOMAIN);
    h.update((key.len() as u64).to_be_bytes());
    h.update(key);
    h.update((input.len() as u64).to_be_bytes());
    h.update(input);
    Scalar::from_biguint(BigUint::from_bytes_be(&h.finalize()), q)
}
