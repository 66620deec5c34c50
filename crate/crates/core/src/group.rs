//! Type-3 bilinear group used by the blind threshold signature scheme.
//!
//! The rest of the crate depends only on the types and operations exposed
//! here; the concrete instantiation is BLS12-381. Group elements serialize
//! to their fixed-length compressed encodings (48 bytes for G1, 96 for G2),
//! which are stable across runs and feed the ledger's message hashing.

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{G1Affine, G1Projective, G2Affine, G2Projective, Gt};
use ff::Field;
use rand_core::RngCore;
use sha2::Sha256;

/// Domain separation tag for hashing messages into G1.
const HASH_TO_G1_DST: &[u8] = b"SEALBID_V1_BLS12381G1_XMD:SHA-256_SSWU_RO_";

/// Size in bits of the prime group order (the BLS12-381 scalar field).
pub const ORDER_BITS: u32 = 255;

/// Compressed G1 encoding length in bytes.
pub const G1_BYTES: usize = 48;
/// Compressed G2 encoding length in bytes.
pub const G2_BYTES: usize = 96;
/// Scalar encoding length in bytes (little-endian).
pub const SCALAR_BYTES: usize = 32;

/// Public parameters of the bilinear group: generators and the security level.
///
/// The prime order is fixed by the curve; [`GroupParams::order_bytes`] exposes
/// its canonical little-endian encoding.
#[derive(Clone, Copy, Debug)]
pub struct GroupParams {
    pub g1: G1Element,
    pub g2: G2Element,
    /// Security parameter in bits (the bit length of the group order).
    pub lambda: u32,
}

impl GroupParams {
    pub fn bls12_381() -> Self {
        GroupParams {
            g1: G1Element::generator(),
            g2: G2Element::generator(),
            lambda: ORDER_BITS,
        }
    }

    /// Little-endian encoding of the prime group order.
    pub fn order_bytes(&self) -> [u8; SCALAR_BYTES] {
        // -1 mod p, plus one, read back out as bytes.
        let minus_one = -Scalar::one();
        let mut bytes = minus_one.0.to_bytes();
        let mut carry = 1u16;
        for b in bytes.iter_mut() {
            let v = *b as u16 + carry;
            *b = v as u8;
            carry = v >> 8;
        }
        bytes
    }
}

impl Default for GroupParams {
    fn default() -> Self {
        Self::bls12_381()
    }
}

/// Field element modulo the prime group order.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Scalar(pub(crate) bls12_381::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(bls12_381::Scalar::zero())
    }

    pub fn one() -> Self {
        Scalar(bls12_381::Scalar::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(bls12_381::Scalar::from(v))
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    /// Uniformly random scalar.
    pub fn random(rng: &mut impl RngCore) -> Self {
        Scalar(bls12_381::Scalar::random(rng))
    }

    /// Uniformly random nonzero scalar.
    pub fn random_nonzero(rng: &mut impl RngCore) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn invert(&self) -> Option<Self> {
        Option::from(self.0.invert()).map(Scalar)
    }

    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; SCALAR_BYTES]) -> Option<Self> {
        Option::from(bls12_381::Scalar::from_bytes(bytes)).map(Scalar)
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

/// Element of G1 (prime-order subgroup).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct G1Element(pub(crate) G1Projective);

impl G1Element {
    pub fn generator() -> Self {
        G1Element(G1Projective::generator())
    }

    pub fn identity() -> Self {
        G1Element(G1Projective::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn mul(&self, s: &Scalar) -> Self {
        G1Element(self.0 * s.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        G1Element(self.0 + other.0)
    }

    /// Compressed encoding; stable across runs.
    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        G1Affine::from(self.0).to_compressed()
    }

    /// Decodes and checks subgroup membership.
    pub fn from_bytes(bytes: &[u8; G1_BYTES]) -> Option<Self> {
        Option::from(G1Affine::from_compressed(bytes))
            .map(|a: G1Affine| G1Element(G1Projective::from(a)))
    }
}

/// Element of G2 (prime-order subgroup).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct G2Element(pub(crate) G2Projective);

impl G2Element {
    pub fn generator() -> Self {
        G2Element(G2Projective::generator())
    }

    pub fn identity() -> Self {
        G2Element(G2Projective::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn mul(&self, s: &Scalar) -> Self {
        G2Element(self.0 * s.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        G2Element(self.0 + other.0)
    }

    pub fn to_bytes(&self) -> [u8; G2_BYTES] {
        G2Affine::from(self.0).to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; G2_BYTES]) -> Option<Self> {
        Option::from(G2Affine::from_compressed(bytes))
            .map(|a: G2Affine| G2Element(G2Projective::from(a)))
    }
}

/// Element of the pairing target group.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GtElement(Gt);

impl GtElement {
    pub fn identity() -> Self {
        GtElement(Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Gt::identity()
    }

    pub fn exp(&self, s: &Scalar) -> Self {
        GtElement(self.0 * s.0)
    }
}

/// Bilinear map e: G1 x G2 -> GT.
pub fn pair(a: &G1Element, b: &G2Element) -> GtElement {
    GtElement(bls12_381::pairing(
        &G1Affine::from(a.0),
        &G2Affine::from(b.0),
    ))
}

/// Deterministic hash of an arbitrary byte string onto the G1 subgroup.
pub fn hash_to_g1(message: &[u8]) -> G1Element {
    let point = <G1Projective as HashToCurve<ExpandMsgXmd<Sha256>>>::hash_to_curve(
        message,
        HASH_TO_G1_DST,
    );
    G1Element(point)
}
