//! Pluggable signature predicate.
//!
//! Contracts only ever ask "does this bundle verify?". The default scheme is
//! Ed25519, which signs deterministically and verifies without randomness.

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureBundle {
    pub public_key: Vec<u8>,
    pub message: Vec<u8>,
    pub signature: Vec<u8>,
}

pub trait SignatureScheme: Send + Sync {
    /// Malformed keys or signatures verify as `false`.
    fn verify(&self, bundle: &SignatureBundle) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Ed25519Scheme;

impl SignatureScheme for Ed25519Scheme {
    fn verify(&self, bundle: &SignatureBundle) -> bool {
        let Ok(key_bytes) = <[u8; 32]>::try_from(bundle.public_key.as_slice()) else {
            return false;
        };
        let Ok(sig_bytes) = <[u8; 64]>::try_from(bundle.signature.as_slice()) else {
            return false;
        };
        let Ok(key) = VerifyingKey::from_bytes(&key_bytes) else {
            return false;
        };
        let signature = ed25519_dalek::Signature::from_bytes(&sig_bytes);
        key.verify_strict(&bundle.message, &signature).is_ok()
    }
}

/// Verifies under the default scheme.
pub fn sig_verify(bundle: &SignatureBundle) -> bool {
    Ed25519Scheme.verify(bundle)
}

/// Off-chain signing half of the default scheme, derived from a 32-byte seed.
#[derive(Clone)]
pub struct SigningKeypair {
    key: SigningKey,
}

impl SigningKeypair {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        Self { key: SigningKey::from_bytes(&seed) }
    }

    pub fn public_key(&self) -> Vec<u8> {
        self.key.verifying_key().to_bytes().to_vec()
    }

    pub fn sign(&self, message: &[u8]) -> Vec<u8> {
        self.key.sign(message).to_bytes().to_vec()
    }

    pub fn bundle(&self, message: &[u8]) -> SignatureBundle {
        SignatureBundle { public_key: self.public_key(), message: message.to_vec(), signature: self.sign(message) }
    }
}

impl std::fmt::Debug for SigningKeypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SigningKeypair({})", hex::encode(self.public_key()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_then_verify() {
        let kp = SigningKeypair::from_seed([7u8; 32]);
        let bundle = kp.bundle(b"hello");
        assert!(sig_verify(&bundle));
        assert!(sig_verify(&bundle), "verification is repeatable");
    }

    #[test]
    fn wrong_message_or_key_fails() {
        let kp = SigningKeypair::from_seed([7u8; 32]);
        let other = SigningKeypair::from_seed([8u8; 32]);
        let mut bundle = kp.bundle(b"hello");
        bundle.message = b"hellp".to_vec();
        assert!(!sig_verify(&bundle));

        let mut bundle = kp.bundle(b"hello");
        bundle.public_key = other.public_key();
        assert!(!sig_verify(&bundle));
    }

    #[test]
    fn malformed_inputs_are_false() {
        let kp = SigningKeypair::from_seed([1u8; 32]);
        let mut bundle = kp.bundle(b"m");
        bundle.signature.truncate(10);
        assert!(!sig_verify(&bundle));
        let mut bundle = kp.bundle(b"m");
        bundle.public_key = vec![0xff; 3];
        assert!(!sig_verify(&bundle));
    }

    #[test]
    fn signing_is_deterministic() {
        let kp = SigningKeypair::from_seed([3u8; 32]);
        assert_eq!(kp.sign(b"x"), kp.sign(b"x"));
    }
}
