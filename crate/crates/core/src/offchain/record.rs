use std::fmt;
use std::str::FromStr;

use crate::codec::{trim_padding, u64_from_word, word_padded, word_u64, Word, WORD};
use crate::crypto::{keccak256, Digest32};

use super::OffchainError;

pub const PARTICIPANT_LEN: usize = 16;
pub const MAX_REGION_LEN: usize = 16;
pub const RECORD_WORDS: usize = 6;
pub const ENCODED_LEN: usize = RECORD_WORDS * WORD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TxType {
    Buy,
    Sell,
}

impl TxType {
    pub fn tag(self) -> u64 {
        match self {
            TxType::Buy => 0,
            TxType::Sell => 1,
        }
    }

    pub fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(TxType::Buy),
            1 => Some(TxType::Sell),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            TxType::Buy => TxType::Sell,
            TxType::Sell => TxType::Buy,
        }
    }
}

/// The six field categories, in encoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Timestamp,
    Participant,
    TxType,
    Energy,
    Price,
    Region,
}

impl Field {
    pub const ALL: [Field; 6] =
        [Field::Timestamp, Field::Participant, Field::TxType, Field::Energy, Field::Price, Field::Region];

    pub fn name(self) -> &'static str {
        match self {
            Field::Timestamp => "timestamp",
            Field::Participant => "participant_id",
            Field::TxType => "tx_type",
            Field::Energy => "energy_kwh",
            Field::Price => "price_milli",
            Field::Region => "region",
        }
    }

    /// Position of this field's word in the canonical encoding.
    pub fn word_index(self) -> usize {
        Field::ALL.iter().position(|f| *f == self).expect("listed")
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = OffchainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| OffchainError::InvalidRecord(format!("unknown field `{s}`")))
    }
}

/// One off-chain energy settlement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SettlementRecord {
    /// Seconds since run start.
    pub timestamp: u64,
    pub participant_id: [u8; PARTICIPANT_LEN],
    pub tx_type: TxType,
    /// Whole kWh.
    pub energy_kwh: u64,
    /// Milli-currency per kWh.
    pub price_milli: u64,
    pub region: String,
}

impl SettlementRecord {
    pub fn validate(&self) -> Result<(), OffchainError> {
        let invalid = |m: &str| Err(OffchainError::InvalidRecord(m.to_string()));
        if self.energy_kwh == 0 {
            return invalid("energy must be positive");
        }
        if self.price_milli == 0 {
            return invalid("price must be positive");
        }
        if self.region.is_empty() || self.region.len() > MAX_REGION_LEN {
            return invalid("region must be 1..=16 bytes");
        }
        // Region words are right-padded with zeros, so a trailing NUL would
        // make two regions encode identically.
        if self.region.as_bytes().contains(&0) {
            return invalid("region must not contain NUL");
        }
        Ok(())
    }
}

/// Six words in field order.
pub fn encode_record(r: &SettlementRecord) -> Result<[u8; ENCODED_LEN], OffchainError> {
    r.validate()?;
    let words: [Word; RECORD_WORDS] = [
        word_u64(r.timestamp),
        word_padded(&r.participant_id).expect("16 bytes fit"),
        word_u64(r.tx_type.tag()),
        word_u64(r.energy_kwh),
        word_u64(r.price_milli),
        word_padded(r.region.as_bytes()).expect("validated length"),
    ];
    let mut out = [0u8; ENCODED_LEN];
    for (chunk, w) in out.chunks_exact_mut(WORD).zip(words.iter()) {
        chunk.copy_from_slice(w);
    }
    Ok(out)
}

/// Inverse of [`encode_record`]; rejects every byte string it would not produce.
pub fn decode_record(bytes: &[u8]) -> Result<SettlementRecord, OffchainError> {
    if bytes.len() != ENCODED_LEN {
        return Err(OffchainError::InvalidRecord(format!("expected {ENCODED_LEN} bytes, got {}", bytes.len())));
    }
    let word = |i: usize| -> Word { bytes[i * WORD..(i + 1) * WORD].try_into().expect("word") };
    let participant_word = word(1);
    if participant_word[PARTICIPANT_LEN..].iter().any(|b| *b != 0) {
        return Err(OffchainError::InvalidRecord("participant padding".into()));
    }
    let region_word = word(5);
    if region_word[MAX_REGION_LEN..].iter().any(|b| *b != 0) {
        return Err(OffchainError::InvalidRecord("region padding".into()));
    }
    let region = String::from_utf8(trim_padding(&region_word).to_vec())
        .map_err(|_| OffchainError::InvalidRecord("region is not utf-8".into()))?;
    let record = SettlementRecord {
        timestamp: u64_from_word(&word(0))?,
        participant_id: participant_word[..PARTICIPANT_LEN].try_into().expect("16 bytes"),
        tx_type: TxType::from_tag(u64_from_word(&word(2))?)
            .ok_or_else(|| OffchainError::InvalidRecord("tx_type tag".into()))?,
        energy_kwh: u64_from_word(&word(3))?,
        price_milli: u64_from_word(&word(4))?,
        region,
    };
    record.validate()?;
    Ok(record)
}

/// `keccak256(encode_record(r))`.
pub fn build_digest(r: &SettlementRecord) -> Result<Digest32, OffchainError> {
    Ok(keccak256(&encode_record(r)?))
}
