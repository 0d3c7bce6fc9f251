//! Diffie-Hellman key agreement over the auxiliary group.
//!
//! The auxiliary group is a fixed safe-prime group with a 256-bit
//! subgroup order, independent of the (deliberately small) masking group.
//! Key agreement, share encryption, and signatures all run here, so the
//! eavesdropper's discrete-log power over masked updates buys nothing
//! against material in transit.

use std::sync::LazyLock;

use num_bigint::BigUint;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::group::{GroupElement, GroupParams, Scalar};

use super::CryptoError;

const KEY_DOMAIN: &[u8] = b"secagg.ka.v1";

// Smallest 256-bit q >= 2^255 with q and 2q + 1 prime; generator 2.
// Primality is re-checked by a test below.
const AUX_Q_HEX: &str = "800000000000000000000000000000000000000000000000000000000001c197";
const AUX_P_HEX: &str = "1000000000000000000000000000000000000000000000000000000000003832f";

static AUX_GROUP: LazyLock<GroupParams> = LazyLock::new(|| {
    let q = BigUint::parse_bytes(AUX_Q_HEX.as_bytes(), 16).expect("aux q constant");
    let p = BigUint::parse_bytes(AUX_P_HEX.as_bytes(), 16).expect("aux p constant");
    GroupParams::new(p, q, BigUint::from(2u32), 256).expect("aux group invariants")
});

/// The fixed full-width group used for key agreement and signatures.
pub fn aux_group() -> &'static GroupParams {
    &AUX_GROUP
}

/// A key pair in the auxiliary group: `pk = g^sk`.
#[derive(Debug, Clone)]
pub struct KeyPair {
    pub sk: Scalar,
    pub pk: GroupElement,
}

/// A 32-byte symmetric key derived from a DH shared element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedKey(pub [u8; 32]);

impl SharedKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

pub fn ka_gen(rng: &mut impl Rng) -> KeyPair {
    let aux = aux_group();
    let mut sk = Scalar::random(rng, aux.q());
    while sk.is_zero() {
        sk = Scalar::random(rng, aux.q());
    }
    let pk = aux.exp(&aux.generator(), &sk);
    KeyPair { sk, pk }
}

/// Hashes the DH element into a symmetric key. Symmetric in the two
/// parties; rejects peers outside the order-q subgroup.
pub fn ka_agree(own_sk: &Scalar, peer_pk: &GroupElement) -> Result<SharedKey, CryptoError> {
    let aux = aux_group();
    if peer_pk.is_identity() || !aux.is_in_subgroup(peer_pk) {
        return Err(CryptoError::InvalidPublicKey);
    }
    let shared = aux.exp(peer_pk, own_sk);
    let mut h = Sha256::new();
    h.update(KEY_DOMAIN);
    h.update(shared.to_bytes_padded(aux));
    Ok(SharedKey(h.finalize().into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::is_probable_prime;
    use crate::rng::seeded_rng;
    use num_traits::One;

    #[test]
    fn aux_group_invariants_hold() {
        let aux = aux_group();
        let mut rng = seeded_rng(0, b"aux-check");
        assert_eq!(aux.q().bits(), 256);
        assert_eq!(aux.p(), &((aux.q() << 1u32) + 1u32));
        assert!(is_probable_prime(aux.q(), 64, &mut rng));
        assert!(is_probable_prime(aux.p(), 64, &mut rng));
        assert!(aux
            .generator()
            .value()
            .modpow(aux.q(), aux.p())
            .is_one());
    }

    #[test]
    fn agreement_is_symmetric() {
        let mut rng = seeded_rng(1, b"ka-sym");
        let u = ka_gen(&mut rng);
        let v = ka_gen(&mut rng);
        assert_eq!(
            ka_agree(&u.sk, &v.pk).unwrap(),
            ka_agree(&v.sk, &u.pk).unwrap()
        );
    }

    #[test]
    fn distinct_pairs_distinct_keys() {
        let mut rng = seeded_rng(2, b"ka-distinct");
        let parties: Vec<KeyPair> = (0..15).map(|_| ka_gen(&mut rng)).collect();
        let mut keys = std::collections::BTreeSet::new();
        let mut count = 0;
        for i in 0..parties.len() {
            for j in (i + 1)..parties.len() {
                keys.insert(ka_agree(&parties[i].sk, &parties[j].pk).unwrap().0);
                count += 1;
            }
        }
        assert!(count >= 100);
        assert_eq!(keys.len(), count, "shared-key collision");
    }

    #[test]
    fn tampered_pk_never_agrees_silently() {
        let aux = aux_group();
        let mut rng = seeded_rng(3, b"ka-tamper");
        for _ in 0..20 {
            let u = ka_gen(&mut rng);
            let v = ka_gen(&mut rng);
            let honest = ka_agree(&u.sk, &v.pk).unwrap();
            let flipped = v.pk.value() ^ BigUint::one();
            match aux.element_from_biguint(flipped) {
                Err(_) => {}
                Ok(e) => match ka_agree(&u.sk, &e) {
                    Err(CryptoError::InvalidPublicKey) => {}
                    Err(_) => unreachable!(),
                    Ok(k) => assert_ne!(k, honest),
                },
            }
        }
    }

    #[test]
    fn identity_pk_rejected() {
        let aux = aux_group();
        let mut rng = seeded_rng(4, b"ka-ident");
        let u = ka_gen(&mut rng);
        assert_eq!(
            ka_agree(&u.sk, &aux.identity()),
            Err(CryptoError::InvalidPublicKey)
        );
    }
}
