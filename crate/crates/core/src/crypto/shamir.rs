//! Shamir secret sharing over `Z_q`.
//!
//! Shares are evaluations of a random polynomial with the secret as its
//! constant term; indices are user identifiers, so reconstruction can be
//! keyed directly by who responded. The additive homomorphism — pointwise
//! sums of shares are shares of the summed secrets — is what lets the
//! server reconstruct a sum of masks without seeing any single one.

use num_bigint::BigUint;
use rand::Rng;

use crate::group::{lagrange_at_zero, GroupError, Scalar};

use super::CryptoError;

/// One evaluation point of a sharing polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretShare {
    pub index: u64,
    pub value: Scalar,
}

/// Evaluates the polynomial with the given coefficients (constant term
/// first) at each index. Split out so tests can pin exact polynomials.
pub fn share_polynomial(coeffs: &[Scalar], indices: &[u64], q: &BigUint) -> Vec<SecretShare> {
    indices
        .iter()
        .map(|&i| {
            let x = Scalar::from_u64(i, q);
            // Horner, highest coefficient first
            let mut acc = Scalar::zero();
            for c in coeffs.iter().rev() {
                acc = acc.mul(&x, q).add(c, q);
            }
            SecretShare {
                index: i,
                value: acc,
            }
        })
        .collect()
}

/// Splits `secret` into one share per index with reconstruction
/// threshold `t`.
pub fn ss_share(
    secret: &Scalar,
    indices: &[u64],
    t: usize,
    q: &BigUint,
    rng: &mut impl Rng,
) -> Result<Vec<SecretShare>, CryptoError> {
    if t == 0 {
        return Err(CryptoError::BadShareIndex("threshold must be at least 1"));
    }
    if t > indices.len() {
        return Err(CryptoError::ThresholdTooLarge {
            t,
            n: indices.len(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in indices {
        if i == 0 || BigUint::from(i) >= *q {
            return Err(CryptoError::BadShareIndex(
                "indices must be nonzero and below q",
            ));
        }
        if !seen.insert(i) {
            return Err(CryptoError::BadShareIndex("indices must be distinct"));
        }
    }
    let mut coeffs = Vec::with_capacity(t);
    coeffs.push(secret.clone());
    for _ in 1..t {
        coeffs.push(Scalar::random(rng, q));
    }
    Ok(share_polynomial(&coeffs, indices, q))
}

/// Recovers the secret from at least `t` shares, interpolating through
/// the `t` smallest indices.
pub fn ss_recon(shares: &[SecretShare], t: usize, q: &BigUint) -> Result<Scalar, CryptoError> {
    if shares.len() < t || t == 0 {
        return Err(CryptoError::InsufficientShares {
            needed: t.max(1),
            got: shares.len(),
        });
    }
    let mut sorted: Vec<&SecretShare> = shares.iter().collect();
    sorted.sort_by_key(|s| s.index);
    let chosen = &sorted[..t];
    let indices: Vec<u64> = chosen.iter().map(|s| s.index).collect();
    let lambdas = lagrange_at_zero(&indices, q).map_err(|e| match e {
        GroupError::DuplicateIndex(_) => CryptoError::BadShareIndex("duplicate share index"),
        _ => CryptoError::BadShareIndex("share indices collide modulo q"),
    })?;
    let mut acc = Scalar::zero();
    for s in chosen {
        acc = acc.add(&s.value.mul(&lambdas[&s.index], q), q);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn q11() -> BigUint {
        BigUint::from(11u32)
    }

    #[test]
    fn fixed_polynomial_hand_values() {
        // f(x) = 7 + 3x mod 11 over indices {1,2,3}: 10, 2, 5
        let q = q11();
        let coeffs = vec![Scalar::from_u64(7, &q), Scalar::from_u64(3, &q)];
        let shares = share_polynomial(&coeffs, &[1, 2, 3], &q);
        let values: Vec<u64> = shares
            .iter()
            .map(|s| u64::try_from(s.value.value()).unwrap())
            .collect();
        assert_eq!(values, vec![10, 2, 5]);
    }

    #[test]
    fn recon_hand_value() {
        let q = q11();
        let shares = vec![
            SecretShare {
                index: 1,
                value: Scalar::from_u64(10, &q),
            },
            SecretShare {
                index: 2,
                value: Scalar::from_u64(2, &q),
            },
        ];
        assert_eq!(ss_recon(&shares, 2, &q).unwrap(), Scalar::from_u64(7, &q));
    }

    #[test]
    fn threshold_one_shares_equal_secret() {
        let q = q11();
        let mut rng = seeded_rng(1, b"shamir-t1");
        let secret = Scalar::from_u64(6, &q);
        let shares = ss_share(&secret, &[1, 2, 3], 1, &q, &mut rng).unwrap();
        for s in shares {
            assert_eq!(s.value, secret);
        }
    }

    #[test]
    fn round_trip_random_secrets() {
        let q = q11();
        let mut rng = seeded_rng(2, b"shamir-rt");
        for _ in 0..100 {
            let secret = Scalar::random(&mut rng, &q);
            let shares = ss_share(&secret, &[1, 2, 3, 4, 5], 3, &q, &mut rng).unwrap();
            // reconstruct from an arbitrary 3-subset
            let subset = vec![shares[4].clone(), shares[1].clone(), shares[2].clone()];
            assert_eq!(ss_recon(&subset, 3, &q).unwrap(), secret);
        }
    }

    #[test]
    fn all_zero_shares_give_zero() {
        let q = q11();
        let shares: Vec<SecretShare> = (1..=3)
            .map(|i| SecretShare {
                index: i,
                value: Scalar::zero(),
            })
            .collect();
        assert!(ss_recon(&shares, 3, &q).unwrap().is_zero());
    }

    #[test]
    fn threshold_too_large_rejected() {
        let q = q11();
        let mut rng = seeded_rng(3, b"shamir-err");
        let secret = Scalar::from_u64(1, &q);
        assert_eq!(
            ss_share(&secret, &[1, 2], 3, &q, &mut rng),
            Err(CryptoError::ThresholdTooLarge { t: 3, n: 2 })
        );
    }

    #[test]
    fn insufficient_shares_rejected() {
        let q = q11();
        let shares = vec![SecretShare {
            index: 1,
            value: Scalar::zero(),
        }];
        assert_eq!(
            ss_recon(&shares, 2, &q),
            Err(CryptoError::InsufficientShares { needed: 2, got: 1 })
        );
    }

    #[test]
    fn shares_are_additively_homomorphic() {
        let q = q11();
        let mut rng = seeded_rng(4, b"shamir-hom");
        for _ in 0..50 {
            let a = Scalar::random(&mut rng, &q);
            let b = Scalar::random(&mut rng, &q);
            let sa = ss_share(&a, &[1, 2, 3, 4], 2, &q, &mut rng).unwrap();
            let sb = ss_share(&b, &[1, 2, 3, 4], 2, &q, &mut rng).unwrap();
            let summed: Vec<SecretShare> = sa
                .iter()
                .zip(&sb)
                .map(|(x, y)| SecretShare {
                    index: x.index,
                    value: x.value.add(&y.value, &q),
                })
                .collect();
            assert_eq!(ss_recon(&summed, 2, &q).unwrap(), a.add(&b, &q));
        }
    }

    /// Any t-1 shares of two different secrets are identically
    /// distributed: compare empirical share-value histograms at q = 11
    /// with a two-sample chi-square.
    #[test]
    fn t_minus_one_shares_hide_the_secret() {
        let q = q11();
        let mut rng = seeded_rng(5, b"shamir-priv");
        let trials = 10_000;
        let mut hist_a = [0u64; 11];
        let mut hist_b = [0u64; 11];
        let sa = Scalar::from_u64(3, &q);
        let sb = Scalar::from_u64(9, &q);
        for _ in 0..trials {
            let share_a = &ss_share(&sa, &[1, 2, 3], 2, &q, &mut rng).unwrap()[0];
            let share_b = &ss_share(&sb, &[1, 2, 3], 2, &q, &mut rng).unwrap()[0];
            hist_a[u64::try_from(share_a.value.value()).unwrap() as usize] += 1;
            hist_b[u64::try_from(share_b.value.value()).unwrap() as usize] += 1;
        }
        let mut stat = 0.0f64;
        for i in 0..11 {
            let (a, b) = (hist_a[i] as f64, hist_b[i] as f64);
            stat += (a - b) * (a - b) / (a + b);
        }
        // 10 degrees of freedom; 99.9th percentile is about 29.6
        assert!(stat < 29.6, "two-sample chi-square too large: {stat}");
    }
}
