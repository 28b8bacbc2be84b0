//! Deterministic cryptographic primitives.
//!
//! Everything in here is a pure function of its inputs: Keccak-256, the
//! positional Merkle tree, hash-to-prime, the RSA accumulator and the
//! signature predicate used for identity and disclosure checks.

mod accumulator;
mod bigint;
mod merkle;
mod prime;
mod signature;

use std::fmt;
use std::str::FromStr;

use sha3::{Digest as _, Keccak256};

pub use accumulator::{acc_verify, AccumulatorParams, AccumulatorState, Witness, RSA_2048_MODULUS};
pub use bigint::{decode_biguint, encode_biguint, to_fixed_width};
pub use merkle::{merkle_prove, merkle_root, merkle_verify, MerkleProof};
pub use prime::{hash_to_prime, is_probable_prime, MILLER_RABIN_ROUNDS};
pub use signature::{sig_verify, Ed25519Scheme, SignatureBundle, SignatureScheme, SigningKeypair};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("leaf index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("already accumulated")]
    AlreadyAccumulated,
    #[error("not accumulated")]
    NotAccumulated,
    #[error("element is not prime")]
    NotPrime,
    #[error("invalid accumulator parameters: {0}")]
    InvalidParams(&'static str),
    #[error("malformed big integer encoding")]
    MalformedBigInt,
}

/// A 32-byte Keccak-256 output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest32(pub [u8; 32]);

impl Digest32 {
    pub const ZERO: Digest32 = Digest32([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl From<[u8; 32]> for Digest32 {
    fn from(bytes: [u8; 32]) -> Self {
        Digest32(bytes)
    }
}

impl AsRef<[u8]> for Digest32 {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest32({})", self.to_hex())
    }
}

impl FromStr for Digest32 {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s.trim(), &mut out)?;
        Ok(Digest32(out))
    }
}

/// Keccak-256 with the original (pre-SHA3) padding, as used by the EVM.
pub fn keccak256(data: &[u8]) -> Digest32 {
    Digest32(Keccak256::digest(data).into())
}

/// Keccak-256 over the concatenation of several byte slices.
pub fn keccak256_concat(parts: &[&[u8]]) -> Digest32 {
    let mut hasher = Keccak256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest32(hasher.finalize().into())
}
