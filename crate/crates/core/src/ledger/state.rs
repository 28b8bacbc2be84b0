use std::collections::BTreeMap;

use crate::codec::Word;
use crate::crypto::{keccak256, Digest32};

pub const SECONDS_PER_DAY: u64 = 86_400;

pub type Store = BTreeMap<Word, Word>;

/// Per-contract key/value stores plus the logical clock.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainState {
    pub(crate) stores: BTreeMap<String, Store>,
    pub(crate) clock: u64,
    pub(crate) cumulative_tx_today: u64,
}

impl ChainState {
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn day(&self) -> u64 {
        self.clock / SECONDS_PER_DAY
    }

    pub fn cumulative_tx_today(&self) -> u64 {
        self.cumulative_tx_today
    }

    pub fn store(&self, contract: &str) -> Option<&Store> {
        self.stores.get(contract)
    }

    pub fn read(&self, contract: &str, key: &Word) -> Option<Word> {
        self.stores.get(contract).and_then(|s| s.get(key)).copied()
    }

    /// Advances the clock; crossing a day boundary resets the daily counter.
    pub fn advance_clock(&mut self, seconds: u64) {
        let before = self.day();
        self.clock += seconds;
        if self.day() != before {
            self.cumulative_tx_today = 0;
        }
    }

    /// Keccak over a sorted serialization of every non-empty store. The clock
    /// and counters are deliberately not part of the digest.
    pub fn digest(&self) -> Digest32 {
        let mut buf = Vec::new();
        for (name, store) in self.stores.iter().filter(|(_, s)| !s.is_empty()) {
            buf.extend_from_slice(&(name.len() as u32).to_be_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&(store.len() as u64).to_be_bytes());
            for (k, v) in store {
                buf.extend_from_slice(k);
                buf.extend_from_slice(v);
            }
        }
        keccak256(&buf)
    }
}
