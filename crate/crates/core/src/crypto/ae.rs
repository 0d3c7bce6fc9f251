//! Authenticated encryption for share delivery.
//!
//! ChaCha20-Poly1305 with a fresh random nonce per encryption. The
//! context string — the canonical encoding of (sender, receiver, phase,
//! round) — rides as associated data, binding each ciphertext to its
//! protocol position so a share cannot be replayed elsewhere.

use chacha20poly1305::aead::{Aead, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, KeyInit, Nonce};
use rand::Rng;

use super::{CryptoError, SharedKey};

pub const NONCE_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub nonce: [u8; NONCE_LEN],
    pub body: Vec<u8>,
}

pub fn ae_encrypt(
    key: &SharedKey,
    plaintext: &[u8],
    context: &[u8],
    rng: &mut impl Rng,
) -> Ciphertext {
    let cipher = ChaCha20Poly1305::new(&Key::from(*key.as_bytes()));
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill(&mut nonce);
    let body = cipher
        .encrypt(
            &Nonce::from(nonce),
            Payload {
                msg: plaintext,
                aad: context,
            },
        )
        .expect("encryption is infallible for in-memory buffers");
    Ciphertext { nonce, body }
}

pub fn ae_decrypt(
    key: &SharedKey,
    ct: &Ciphertext,
    context: &[u8],
) -> Result<Vec<u8>, CryptoError> {
    let cipher = ChaCha20Poly1305::new(&Key::from(*key.as_bytes()));
    cipher
        .decrypt(
            &Nonce::from(ct.nonce),
            Payload {
                msg: &ct.body,
                aad: context,
            },
        )
        .map_err(|_| CryptoError::AuthFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn key(b: u8) -> SharedKey {
        SharedKey([b; 32])
    }

    #[test]
    fn round_trip() {
        let mut rng = seeded_rng(1, b"ae-rt");
        let ct = ae_encrypt(&key(1), b"share bytes", b"ctx", &mut rng);
        assert_eq!(ae_decrypt(&key(1), &ct, b"ctx").unwrap(), b"share bytes");
    }

    #[test]
    fn flipped_body_bit_fails() {
        let mut rng = seeded_rng(2, b"ae-flip");
        let mut ct = ae_encrypt(&key(1), b"share bytes", b"ctx", &mut rng);
        ct.body[0] ^= 1;
        assert_eq!(
            ae_decrypt(&key(1), &ct, b"ctx"),
            Err(CryptoError::AuthFailure)
        );
    }

    #[test]
    fn wrong_key_fails() {
        let mut rng = seeded_rng(3, b"ae-key");
        let ct = ae_encrypt(&key(1), b"share bytes", b"ctx", &mut rng);
        assert_eq!(
            ae_decrypt(&key(2), &ct, b"ctx"),
            Err(CryptoError::AuthFailure)
        );
    }

    #[test]
    fn wrong_context_fails() {
        let mut rng = seeded_rng(4, b"ae-ctx");
        let ct = ae_encrypt(&key(1), b"share bytes", b"ctx-a", &mut rng);
        assert_eq!(
            ae_decrypt(&key(1), &ct, b"ctx-b"),
            Err(CryptoError::AuthFailure)
        );
    }
}
