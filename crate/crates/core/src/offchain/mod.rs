//! Off-chain layer: canonical record encoding, digests, batch building,
//! tamper injection, the append-only record store and the replay auditor.
//!
//! Nothing here touches ledger state except [`replay_audit`], which only
//! reads public commitments.

mod audit;
mod batch;
mod record;
mod store;
mod tamper;

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::codec::CodecError;
use crate::crypto::{AccumulatorState, CryptoError, Witness};

pub use audit::{replay_audit, Anchor, AuditEntry, AuditReport, Verdict, AUDIT_CSV_HEADER};
pub use batch::{batch_id, build_batch, Batch};
pub use record::{
    build_digest, decode_record, encode_record, Field, SettlementRecord, TxType, ENCODED_LEN, MAX_REGION_LEN,
    PARTICIPANT_LEN,
};
pub use store::{log_text, parse_log, read_log, read_store, store_paths, write_store, Manifest, RecordLog};
pub use tamper::tamper;

#[derive(Debug, thiserror::Error)]
pub enum OffchainError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("batch must contain at least one record")]
    EmptyBatch,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("record {0} has no anchor")]
    MissingAnchor(usize),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("record log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fresh witnesses for every member of `state`, recomputed from scratch.
/// Call again after each add or remove.
pub fn maintain_witnesses(state: &AccumulatorState) -> BTreeMap<BigUint, Witness> {
    state.all_witnesses()
}
