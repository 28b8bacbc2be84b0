//! The two submission schemes compared in the gas experiment, plus the
//! settlement path both of them share.
//!
//! Baseline puts every record on-chain: full calldata, two packed storage
//! words per record and an event carrying the record. Proposed commits one
//! Merkle root per batching window through the verifier. After submission,
//! both schemes confirm every record through the identical
//! [`SettlementPath`] call, so only the submission path differs.

use std::sync::Arc;

use crate::codec::{word_padded, word_u64, Word, WordReader, WordWriter};
use crate::contracts::verifier::{commit_call, CommitmentKind};
use crate::contracts::{install_all, roles::grant_call};
use crate::crypto::Digest32;
use crate::ledger::{
    slot, AccountId, Call, CallContext, CallResult, Contract, GasSchedule, Ledger, Revert, Role, TxReceipt,
};
use crate::offchain::{build_batch, build_digest, decode_record, encode_record, SettlementRecord, ENCODED_LEN};

pub const BASELINE: &str = "baseline";
pub const SETTLEMENT: &str = "settlement";
pub const OPERATOR: &str = "operator";
pub const GOVERNANCE: &str = "gov";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Baseline,
    Proposed,
}

impl SchemeKind {
    pub const BOTH: [SchemeKind; 2] = [SchemeKind::Baseline, SchemeKind::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Proposed => "proposed",
        }
    }
}

/// Full on-chain submission of a window of records.
pub struct BaselineSubmission;

fn record_slots(key: &Word) -> (Word, Word) {
    (slot(b"baseline.a", &[key]), slot(b"baseline.b", &[key]))
}

// a: timestamp(8) | participant(16) | energy(8)
// b: price(8) | tx_type(1) | region(16) | pad(7)
fn pack_record(r: &SettlementRecord) -> (Word, Word) {
    let mut a = [0u8; 32];
    a[..8].copy_from_slice(&r.timestamp.to_be_bytes());
    a[8..24].copy_from_slice(&r.participant_id);
    a[24..].copy_from_slice(&r.energy_kwh.to_be_bytes());
    let mut b = [0u8; 32];
    b[..8].copy_from_slice(&r.price_milli.to_be_bytes());
    b[8] = r.tx_type.tag() as u8;
    b[9..9 + r.region.len()].copy_from_slice(r.region.as_bytes());
    (a, b)
}

impl Contract for BaselineSubmission {
    fn name(&self) -> &'static str {
        BASELINE
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        if op != "submit" {
            return Err(Revert::unknown_target());
        }
        let mut r = WordReader::new(args);
        let blob = r.dynamic()?;
        r.finish()?;
        crate::contracts::require_registered(ctx)?;
        if blob.is_empty() || blob.len() % ENCODED_LEN != 0 {
            return Err(Revert::new("malformed batch"));
        }
        for chunk in blob.chunks_exact(ENCODED_LEN) {
            let record = decode_record(chunk).map_err(|_| Revert::new("invalid record"))?;
            let key = ctx.keccak(chunk).0;
            let (a_slot, b_slot) = record_slots(&key);
            if ctx.sload(&a_slot).is_some() {
                return Err(Revert::new("duplicate record"));
            }
            let (a, b) = pack_record(&record);
            ctx.sstore(a_slot, a);
            ctx.sstore(b_slot, b);
            let mut payload = key.to_vec();
            payload.extend_from_slice(chunk);
            ctx.emit("RecordSubmitted", payload);
        }
        Ok(Vec::new())
    }
}

/// Post-submission settlement bookkeeping shared by both schemes: a
/// per-record confirmation flag plus running per-region and per-participant
/// energy totals.
pub struct SettlementPath;

impl Contract for SettlementPath {
    fn name(&self) -> &'static str {
        SETTLEMENT
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        if op != "confirm" {
            return Err(Revert::unknown_target());
        }
        let mut r = WordReader::new(args);
        let digest = r.word()?;
        let participant = r.word()?;
        let region = r.word()?;
        let energy = r.u64()?;
        let side = r.u64()?;
        r.finish()?;
        crate::contracts::require_registered(ctx)?;
        let status = slot(b"settle.status", &[&digest]);
        if ctx.sload(&status).is_some() {
            return Err(Revert::new("already confirmed"));
        }
        ctx.sstore(status, word_u64(1));
        for key in
            [slot(b"settle.region", &[&region, &side.to_be_bytes()]), slot(b"settle.participant", &[&participant])]
        {
            let total = ctx.sload(&key).map(|w| crate::codec::u64_from_word(&w)).transpose()?.unwrap_or(0);
            ctx.sstore(key, word_u64(total.saturating_add(energy)));
        }
        ctx.emit("Confirmed", WordWriter::new().word(&digest).u64(energy).finish());
        Ok(Vec::new())
    }
}

pub fn submit_call(records: &[SettlementRecord]) -> Result<Call, crate::offchain::OffchainError> {
    let mut blob = Vec::with_capacity(records.len() * ENCODED_LEN);
    for r in records {
        blob.extend_from_slice(&encode_record(r)?);
    }
    Ok(Call::new(BASELINE, "submit", WordWriter::new().dynamic(&blob).finish()))
}

pub fn confirm_call(record: &SettlementRecord, digest: &Digest32) -> Call {
    let args = WordWriter::new()
        .word(&digest.0)
        .word(&word_padded(&record.participant_id).expect("16 bytes"))
        .word(&word_padded(record.region.as_bytes()).expect("validated region"))
        .u64(record.energy_kwh)
        .u64(record.tx_type.tag())
        .finish();
    Call::new(SETTLEMENT, "confirm", args)
}

/// A ledger with every contract installed, the two harness contracts
/// registered and an operator holding the prosumer role.
pub fn scheme_ledger(schedule: &GasSchedule) -> (Ledger, AccountId) {
    let gov = AccountId::new(GOVERNANCE).expect("valid id");
    let operator = AccountId::new(OPERATOR).expect("valid id");
    let mut ledger = Ledger::new(schedule.clone(), &gov);
    install_all(&mut ledger, crate::contracts::DEFAULT_AUTH_WINDOW);
    ledger.register_contract(Arc::new(BaselineSubmission));
    ledger.register_contract(Arc::new(SettlementPath));
    let grant = ledger.execute_tx(&gov, &grant_call(&operator, Role::Prosumer));
    assert!(grant.is_success(), "operator grant");
    (ledger, operator)
}

/// Submits one window under `kind`, then confirms each record. Returns every
/// receipt in execution order.
pub fn settle_window(
    ledger: &mut Ledger,
    operator: &AccountId,
    kind: SchemeKind,
    records: &[SettlementRecord],
) -> Result<Vec<TxReceipt>, crate::offchain::OffchainError> {
    let mut receipts = Vec::with_capacity(records.len() + 1);
    let digests = match kind {
        SchemeKind::Baseline => {
            receipts.push(ledger.execute_tx(operator, &submit_call(records)?));
            records.iter().map(build_digest).collect::<Result<Vec<_>, _>>()?
        }
        SchemeKind::Proposed => {
            let batch = build_batch(records.to_vec())?;
            let call = commit_call(&batch.batch_id, CommitmentKind::BatchRoot, &batch.root, batch.len() as u64);
            receipts.push(ledger.execute_tx(operator, &call));
            batch.leaves
        }
    };
    for (r, d) in records.iter().zip(&digests) {
        receipts.push(ledger.execute_tx(operator, &confirm_call(r, d)));
    }
    Ok(receipts)
}
