use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::keccak256_concat;

/// Independent random streams, one per purpose, so that changing how many
/// draws one consumer makes never shifts another consumer's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Arrivals,
    Prices,
    Ids,
    Attributes,
    Tamper,
    Carbon,
    Accumulator,
    Identity,
}

impl Purpose {
    pub fn label(self) -> &'static str {
        match self {
            Purpose::Arrivals => "arrivals",
            Purpose::Prices => "prices",
            Purpose::Ids => "ids",
            Purpose::Attributes => "attributes",
            Purpose::Tamper => "tamper",
            Purpose::Carbon => "carbon",
            Purpose::Accumulator => "accumulator",
            Purpose::Identity => "identity",
        }
    }
}

/// ChaCha20 keyed with `keccak256(seed as 8 big-endian bytes || label)`.
pub fn stream(seed: u64, purpose: Purpose) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(keccak256_concat(&[&seed.to_be_bytes(), purpose.label().as_bytes()]).0)
}
