//! Blind threshold BLS signatures (Boldyreva-style, type-3 pairing setting).
//!
//! A dealer shares a signing key among `n` authorities with threshold `t`.
//! A user blinds a message, collects `t` partial signatures on the blinded
//! point, unblinds each, and aggregates them with Lagrange coefficients into
//! a signature that verifies under the master key. Authorities never see the
//! message and the final signature is unlinkable to the signing session.
//!
//! Signing keys are held per cash denomination: the ledger interprets the
//! deposit value backing a bid from which denomination key signed it.

use std::collections::BTreeMap;

use rand_core::RngCore;
use thiserror::Error;

use crate::group::{self, G1Element, G2Element, GroupParams, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlindSigError {
    #[error("invalid threshold: need 1 <= t <= n and t > n/2 (got t={t}, n={n})")]
    InvalidThreshold { t: u32, n: u32 },
    #[error("blinding factor must be nonzero")]
    ZeroBlindingFactor,
    #[error("duplicate authority index {0} in partial signature set")]
    DuplicateIndex(u32),
    #[error("expected exactly {expected} partial signatures, got {got}")]
    WrongCount { expected: u32, got: u32 },
    #[error("authority index {0} out of range")]
    IndexOutOfRange(u32),
}

/// One authority's share of the signing key.
#[derive(Clone, Debug)]
pub struct KeyShare {
    /// Authority index in `1..=n`; also the evaluation point of the sharing
    /// polynomial.
    pub index: u32,
    pub secret: Scalar,
    pub verify_key: G2Element,
}

/// Dealer output: the master keypair and the per-authority shares.
#[derive(Clone, Debug)]
pub struct KeyShares {
    pub n: u32,
    pub t: u32,
    pub master_secret: Scalar,
    pub master_verify_key: G2Element,
    pub shares: Vec<KeyShare>,
}

/// Client-side state of a blind signing session.
#[derive(Clone, Debug)]
pub struct BlindingState {
    pub message: Vec<u8>,
    pub blinding_factor: Scalar,
    pub blinded_point: G1Element,
}

/// A single authority's signature over a blinded point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialBlindSig {
    pub authority_index: u32,
    pub sigma_tilde: G1Element,
}

/// Aggregated signature verifying under the master key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub sigma: G1Element,
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; group::G1_BYTES] {
        self.sigma.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; group::G1_BYTES]) -> Option<Self> {
        G1Element::from_bytes(bytes).map(|sigma| Signature { sigma })
    }
}

/// Trusted-dealer key generation: shares `v(0)` of a random degree-`t-1`
/// polynomial, giving authority `i` the evaluation `v(i)`.
///
/// Requires an honest majority, `t > n/2`.
pub fn ttp_keygen(
    params: &GroupParams,
    t: u32,
    n: u32,
    rng: &mut impl RngCore,
) -> Result<KeyShares, BlindSigError> {
    if t == 0 || t > n || 2 * t <= n {
        return Err(BlindSigError::InvalidThreshold { t, n });
    }
    let coeffs: Vec<Scalar> = (0..t).map(|_| Scalar::random(rng)).collect();
    let eval = |x: u64| {
        // Horner over the degree-(t-1) polynomial.
        let x = Scalar::from_u64(x);
        coeffs
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| acc * x + *c)
    };
    let master_secret = coeffs[0];
    let master_verify_key = params.g2.mul(&master_secret);
    let shares = (1..=n)
        .map(|i| {
            let secret = eval(i as u64);
            KeyShare {
                index: i,
                secret,
                verify_key: params.g2.mul(&secret),
            }
        })
        .collect();
    Ok(KeyShares {
        n,
        t,
        master_secret,
        master_verify_key,
        shares,
    })
}

/// Client step 1: hash the message to G1 and raise it to a fresh random
/// nonzero blinding factor.
pub fn prepare_blind_sign(message: &[u8], rng: &mut impl RngCore) -> BlindingState {
    let r = Scalar::random_nonzero(rng);
    let blinded_point = group::hash_to_g1(message).mul(&r);
    BlindingState {
        message: message.to_vec(),
        blinding_factor: r,
        blinded_point,
    }
}

/// Authority step: raise the blinded point to the share's secret exponent.
pub fn blind_sign(share: &KeyShare, blinded_point: &G1Element) -> PartialBlindSig {
    PartialBlindSig {
        authority_index: share.index,
        sigma_tilde: blinded_point.mul(&share.secret),
    }
}

/// Client step 2: strip the blinding factor off a (partial) signature by
/// raising it to `r^-1`.
pub fn unblind(
    blinding_factor: &Scalar,
    sigma_tilde: &G1Element,
) -> Result<G1Element, BlindSigError> {
    let inv = blinding_factor
        .invert()
        .ok_or(BlindSigError::ZeroBlindingFactor)?;
    Ok(sigma_tilde.mul(&inv))
}

/// Client step 3: Lagrange-interpolate exactly `t` unblinded partials at zero.
///
/// The result is independent of which `t`-subset of authorities signed.
pub fn agg_sig(partials: &[(u32, G1Element)], t: u32) -> Result<Signature, BlindSigError> {
    if partials.len() != t as usize {
        return Err(BlindSigError::WrongCount {
            expected: t,
            got: partials.len() as u32,
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for (idx, _) in partials {
        if *idx == 0 {
            return Err(BlindSigError::IndexOutOfRange(*idx));
        }
        if !seen.insert(*idx) {
            return Err(BlindSigError::DuplicateIndex(*idx));
        }
    }
    let mut sigma = G1Element::identity();
    for (i, part) in partials {
        let l = lagrange_at_zero(*i, partials.iter().map(|(j, _)| *j));
        sigma = sigma.add(&part.mul(&l));
    }
    Ok(Signature { sigma })
}

/// Lagrange coefficient at zero for index `i` over the index set `indices`.
fn lagrange_at_zero(i: u32, indices: impl Iterator<Item = u32>) -> Scalar {
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    let xi = Scalar::from_u64(i as u64);
    for j in indices {
        if j == i {
            continue;
        }
        let xj = Scalar::from_u64(j as u64);
        num = num * (-xj);
        den = den * (xi - xj);
    }
    // Distinct nonzero indices make the denominator nonzero.
    num * den.invert().expect("distinct indices")
}

/// Checks `e(H(m), y) == e(sigma, g2)`.
pub fn verify(y: &G2Element, message: &[u8], signature: &Signature) -> bool {
    let h = group::hash_to_g1(message);
    let g2 = G2Element::generator();
    group::pair(&h, y) == group::pair(&signature.sigma, &g2)
}

/// Key shares for every configured cash denomination.
///
/// Authorities sign a deposit of value `d` with the key for denomination `d`,
/// so a verified bid implicitly carries its backing amount.
#[derive(Clone, Debug, Default)]
pub struct DenominationKeys {
    keys: BTreeMap<u64, KeyShares>,
}

impl DenominationKeys {
    pub fn generate(
        params: &GroupParams,
        denominations: impl IntoIterator<Item = u64>,
        t: u32,
        n: u32,
        rng: &mut impl RngCore,
    ) -> Result<Self, BlindSigError> {
        let mut keys = BTreeMap::new();
        for d in denominations {
            keys.insert(d, ttp_keygen(params, t, n, rng)?);
        }
        Ok(DenominationKeys { keys })
    }

    pub fn get(&self, denomination: u64) -> Option<&KeyShares> {
        self.keys.get(&denomination)
    }

    pub fn denominations(&self) -> impl Iterator<Item = u64> + '_ {
        self.keys.keys().copied()
    }

    /// Master verification key per denomination, as published on the ledger.
    pub fn verify_keys(&self) -> BTreeMap<u64, G2Element> {
        self.keys
            .iter()
            .map(|(d, ks)| (*d, ks.master_verify_key))
            .collect()
    }
}
