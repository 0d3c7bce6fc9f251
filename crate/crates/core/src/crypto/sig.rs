//! Schnorr signatures over the auxiliary group, plus an aggregatable
//! variant for the compact online-set check.
//!
//! The standard scheme commits to a nonce `r = g^k`, derives the
//! challenge from `(r, pk, msg)`, and responds with `s = k + e*sk`.
//! Nonces are derived deterministically from the secret key and message
//! so that runs replay byte-identically.
//!
//! The aggregatable scheme derives the challenge from `(pk, msg)` only,
//! which lets the server multiply commitments and add responses into one
//! constant-size signature checked with a single equation. Dropping the
//! nonce from the challenge forfeits unforgeability, so this scheme is a
//! cost model for aggregated verification — sizes and operation counts —
//! not a security mechanism. Individual and aggregate tags are kept
//! distinct so the two schemes cannot be mixed.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::encoding::{CodecError, Decoder, Encoder};
use crate::group::{GroupElement, Scalar};

use super::ka::aux_group;
use super::{CryptoError, KeyPair};

const SCHNORR_DOMAIN: &[u8] = b"secagg.sig.schnorr.v1";
const AGG_DOMAIN: &[u8] = b"secagg.sig.agg.v1";
const NONCE_DOMAIN: &[u8] = b"secagg.sig.nonce.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigScheme {
    Schnorr,
    Aggregatable,
}

impl SigScheme {
    fn tag(self) -> u8 {
        match self {
            SigScheme::Schnorr => 1,
            SigScheme::Aggregatable => 2,
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        match t {
            1 => Some(SigScheme::Schnorr),
            2 => Some(SigScheme::Aggregatable),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub scheme: SigScheme,
    pub commitment: GroupElement,
    pub response: Scalar,
}

/// Product of commitments and sum of responses over one message;
/// constant size regardless of signer count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateSignature {
    pub commitment: GroupElement,
    pub response: Scalar,
}

fn challenge_schnorr(r: &GroupElement, pk: &GroupElement, msg: &[u8]) -> Scalar {
    let aux = aux_group();
    let mut h = Sha256::new();
    h.update(SCHNORR_DOMAIN);
    h.update(r.to_bytes_padded(aux));
    h.update(pk.to_bytes_padded(aux));
    h.update(msg);
    Scalar::from_biguint(BigUint::from_bytes_be(&h.finalize()), aux.q())
}

fn challenge_agg(pk: &GroupElement, msg: &[u8]) -> Scalar {
    let aux = aux_group();
    let mut h = Sha256::new();
    h.update(AGG_DOMAIN);
    h.update(pk.to_bytes_padded(aux));
    h.update(msg);
    Scalar::from_biguint(BigUint::from_bytes_be(&h.finalize()), aux.q())
}

fn nonce(kp: &KeyPair, scheme: SigScheme, msg: &[u8]) -> Scalar {
    let aux = aux_group();
    let mut key = kp.sk.to_bytes_padded(aux.q());
    key.push(scheme.tag());
    key.extend_from_slice(NONCE_DOMAIN);
    let k = super::prf_eval(&key, msg, aux.q());
    if k.is_zero() {
        Scalar::from_u64(1, aux.q())
    } else {
        k
    }
}

fn sign_with(kp: &KeyPair, msg: &[u8], scheme: SigScheme) -> Signature {
    let aux = aux_group();
    let k = nonce(kp, scheme, msg);
    let r = aux.exp(&aux.generator(), &k);
    let e = match scheme {
        SigScheme::Schnorr => challenge_schnorr(&r, &kp.pk, msg),
        SigScheme::Aggregatable => challenge_agg(&kp.pk, msg),
    };
    let s = k.add(&e.mul(&kp.sk, aux.q()), aux.q());
    Signature {
        scheme,
        commitment: r,
        response: s,
    }
}

pub fn sign(kp: &KeyPair, msg: &[u8]) -> Signature {
    sign_with(kp, msg, SigScheme::Schnorr)
}

/// Signs in the aggregatable scheme, for rounds where the server will
/// compact the signatures.
pub fn msig_sign(kp: &KeyPair, msg: &[u8]) -> Signature {
    sign_with(kp, msg, SigScheme::Aggregatable)
}

/// Checks `g^s == r * pk^e` with the challenge rule of the signature's
/// scheme.
pub fn verify(pk: &GroupElement, msg: &[u8], sig: &Signature) -> bool {
    let aux = aux_group();
    let e = match sig.scheme {
        SigScheme::Schnorr => challenge_schnorr(&sig.commitment, pk, msg),
        SigScheme::Aggregatable => challenge_agg(pk, msg),
    };
    let lhs = aux.exp(&aux.generator(), &sig.response);
    let rhs = aux.mul(&sig.commitment, &aux.exp(pk, &e));
    lhs == rhs
}

/// Folds aggregatable signatures on one message into a single signature.
pub fn msig_aggregate(sigs: &[Signature]) -> Result<AggregateSignature, CryptoError> {
    if sigs.is_empty() {
        return Err(CryptoError::EmptyAggregation);
    }
    if sigs.iter().any(|s| s.scheme != SigScheme::Aggregatable) {
        return Err(CryptoError::SchemeMismatch);
    }
    let aux = aux_group();
    let mut commitment = aux.identity();
    let mut response = Scalar::zero();
    for s in sigs {
        commitment = aux.mul(&commitment, &s.commitment);
        response = response.add(&s.response, aux.q());
    }
    Ok(AggregateSignature {
        commitment,
        response,
    })
}

/// One-equation check of an aggregate against the full signer key list:
/// `g^S == R * prod(pk_i^{e_i})`.
pub fn msig_verify(pks: &[GroupElement], msg: &[u8], asig: &AggregateSignature) -> bool {
    if pks.is_empty() {
        return false;
    }
    let aux = aux_group();
    let lhs = aux.exp(&aux.generator(), &asig.response);
    let mut rhs = asig.commitment.clone();
    for pk in pks {
        let e = challenge_agg(pk, msg);
        rhs = aux.mul(&rhs, &aux.exp(pk, &e));
    }
    lhs == rhs
}

impl Signature {
    pub fn encode(&self) -> Vec<u8> {
        let aux = aux_group();
        let mut enc = Encoder::new();
        enc.bytes(&[self.scheme.tag()])
            .bytes(&self.commitment.to_bytes_padded(aux))
            .bytes(&self.response.to_bytes_padded(aux.q()));
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Signature, CodecError> {
        let aux = aux_group();
        let mut dec = Decoder::new(bytes);
        let tag = dec.fixed(1)?[0];
        let scheme =
            SigScheme::from_tag(tag).ok_or(CodecError::UnknownDiscriminant(tag as u64))?;
        let commitment = aux
            .element_from_bytes(dec.fixed(aux.element_width())?)
            .map_err(|_| CodecError::OutOfRange("signature commitment"))?;
        let response = aux.scalar_from_bytes(dec.fixed(aux.scalar_width())?);
        dec.expect_end()?;
        Ok(Signature {
            scheme,
            commitment,
            response,
        })
    }
}

impl AggregateSignature {
    pub fn encode(&self) -> Vec<u8> {
        let aux = aux_group();
        let mut enc = Encoder::new();
        enc.bytes(&self.commitment.to_bytes_padded(aux))
            .bytes(&self.response.to_bytes_padded(aux.q()));
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<AggregateSignature, CodecError> {
        let aux = aux_group();
        let mut dec = Decoder::new(bytes);
        let commitment = aux
            .element_from_bytes(dec.fixed(aux.element_width())?)
            .map_err(|_| CodecError::OutOfRange("aggregate commitment"))?;
        let response = aux.scalar_from_bytes(dec.fixed(aux.scalar_width())?);
        dec.expect_end()?;
        Ok(AggregateSignature {
            commitment,
            response,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::ka_gen;
    use crate::rng::seeded_rng;

    #[test]
    fn sign_verify_round_trip() {
        let mut rng = seeded_rng(1, b"sig-rt");
        let kp = ka_gen(&mut rng);
        let sig = sign(&kp, b"hello");
        assert!(verify(&kp.pk, b"hello", &sig));
    }

    #[test]
    fn other_key_rejected() {
        let mut rng = seeded_rng(2, b"sig-key");
        let kp = ka_gen(&mut rng);
        let other = ka_gen(&mut rng);
        let sig = sign(&kp, b"hello");
        assert!(!verify(&other.pk, b"hello", &sig));
    }

    #[test]
    fn flipped_message_byte_rejected() {
        let mut rng = seeded_rng(3, b"sig-msg");
        let kp = ka_gen(&mut rng);
        let sig = sign(&kp, b"hello");
        assert!(!verify(&kp.pk, b"hellp", &sig));
    }

    #[test]
    fn signatures_are_deterministic() {
        let mut rng = seeded_rng(4, b"sig-det");
        let kp = ka_gen(&mut rng);
        assert_eq!(sign(&kp, b"m"), sign(&kp, b"m"));
        assert_eq!(msig_sign(&kp, b"m"), msig_sign(&kp, b"m"));
    }

    #[test]
    fn aggregate_round_trip_various_sizes() {
        let mut rng = seeded_rng(5, b"msig-rt");
        for n in [1usize, 5, 20] {
            let parties: Vec<_> = (0..n).map(|_| ka_gen(&mut rng)).collect();
            let sigs: Vec<_> = parties.iter().map(|kp| msig_sign(kp, b"set")).collect();
            for (kp, sig) in parties.iter().zip(&sigs) {
                assert!(verify(&kp.pk, b"set", sig));
            }
            let asig = msig_aggregate(&sigs).unwrap();
            let pks: Vec<_> = parties.iter().map(|kp| kp.pk.clone()).collect();
            assert!(msig_verify(&pks, b"set", &asig), "n = {n}");
        }
    }

    #[test]
    fn aggregate_with_foreign_message_rejected() {
        let mut rng = seeded_rng(6, b"msig-bad");
        let parties: Vec<_> = (0..5).map(|_| ka_gen(&mut rng)).collect();
        let mut sigs: Vec<_> = parties.iter().map(|kp| msig_sign(kp, b"set")).collect();
        sigs[2] = msig_sign(&parties[2], b"other");
        let asig = msig_aggregate(&sigs).unwrap();
        let pks: Vec<_> = parties.iter().map(|kp| kp.pk.clone()).collect();
        assert!(!msig_verify(&pks, b"set", &asig));
    }

    #[test]
    fn aggregate_size_is_constant() {
        let mut rng = seeded_rng(7, b"msig-size");
        let mut sizes = std::collections::BTreeSet::new();
        for n in [1usize, 20] {
            let parties: Vec<_> = (0..n).map(|_| ka_gen(&mut rng)).collect();
            let sigs: Vec<_> = parties.iter().map(|kp| msig_sign(kp, b"set")).collect();
            sizes.insert(msig_aggregate(&sigs).unwrap().encode().len());
        }
        assert_eq!(sizes.len(), 1);
    }

    #[test]
    fn scheme_mixing_rejected() {
        let mut rng = seeded_rng(8, b"msig-mix");
        let kp = ka_gen(&mut rng);
        let sigs = vec![msig_sign(&kp, b"m"), sign(&kp, b"m")];
        assert_eq!(msig_aggregate(&sigs), Err(CryptoError::SchemeMismatch));
        assert_eq!(msig_aggregate(&[]), Err(CryptoError::EmptyAggregation));
    }

    #[test]
    fn signature_encoding_round_trip() {
        let mut rng = seeded_rng(9, b"sig-enc");
        let kp = ka_gen(&mut rng);
        let sig = sign(&kp, b"m");
        assert_eq!(Signature::decode(&sig.encode()).unwrap(), sig);
        let asig = msig_aggregate(&[msig_sign(&kp, b"m")]).unwrap();
        assert_eq!(AggregateSignature::decode(&asig.encode()).unwrap(), asig);
    }
}
