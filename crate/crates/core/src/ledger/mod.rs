//! Single-node, single-writer transaction engine.
//!
//! Contracts are stateless code; all their state lives in per-contract
//! key/value stores inside [`ChainState`]. A transaction runs against a write
//! overlay that is merged on success and dropped on revert, so a reverted
//! transaction can never leave partial writes behind.

mod gas;
mod state;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::codec::{u64_from_word, word_u64, Word, WORD};
use crate::crypto::{keccak256, keccak256_concat, Digest32, Ed25519Scheme, SignatureBundle, SignatureScheme};

pub use gas::{capacity_penalty, penalized_gas, GasSchedule};
pub use state::{ChainState, Store, SECONDS_PER_DAY};

/// Store holding the role table.
pub const ROLES_STORE: &str = "roles";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("invalid account id `{0}`: 1 to 16 printable ASCII bytes required")]
    InvalidAccount(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
}

/// Flat account identifier, at most 16 printable ASCII bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId(String);

impl AccountId {
    pub const MAX_LEN: usize = 16;

    pub fn new(id: impl Into<String>) -> Result<Self, LedgerError> {
        let id = id.into();
        let ok = !id.is_empty() && id.len() <= Self::MAX_LEN && id.bytes().all(|b| b.is_ascii_graphic());
        if ok {
            Ok(AccountId(id))
        } else {
            Err(LedgerError::InvalidAccount(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl FromStr for AccountId {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AccountId::new(s)
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Governance,
    Authority,
    Prosumer,
    Auditor,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Governance, Role::Authority, Role::Prosumer, Role::Auditor];

    pub fn tag(self) -> u8 {
        match self {
            Role::Governance => 0,
            Role::Authority => 1,
            Role::Prosumer => 2,
            Role::Auditor => 3,
        }
    }

    pub fn from_tag(tag: u64) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.tag() as u64 == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Governance => "governance",
            Role::Authority => "authority",
            Role::Prosumer => "prosumer",
            Role::Auditor => "auditor",
        }
    }
}

impl FromStr for Role {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| LedgerError::UnknownRole(s.to_string()))
    }
}

/// Storage key for `(account, role)` in the role table.
pub fn role_slot(account: &AccountId, role: Role) -> Word {
    slot(b"role", &[account.as_bytes(), &[role.tag()]])
}

/// Derives a storage key from a tag and length-prefixed parts. Key derivation
/// is not metered.
pub fn slot(tag: &[u8], parts: &[&[u8]]) -> Word {
    let mut buf = Vec::with_capacity(tag.len() + parts.iter().map(|p| p.len() + 4).sum::<usize>());
    buf.extend_from_slice(tag);
    for part in parts {
        buf.extend_from_slice(&(part.len() as u32).to_be_bytes());
        buf.extend_from_slice(part);
    }
    keccak256(&buf).0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub contract: String,
    pub op: String,
    pub args: Vec<u8>,
}

impl Call {
    pub fn new(contract: &str, op: &str, args: Vec<u8>) -> Self {
        Self { contract: contract.to_string(), op: op.to_string(), args }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxStatus {
    Success,
    Reverted,
}

impl TxStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TxStatus::Success => "success",
            TxStatus::Reverted => "reverted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub contract: String,
    pub name: String,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxReceipt {
    pub tx_id: u64,
    pub clock: u64,
    pub caller: AccountId,
    pub contract: String,
    pub operation: String,
    pub status: TxStatus,
    pub gas_used: u64,
    /// Gas before the capacity penalty was applied.
    pub unpenalized_gas: u64,
    pub penalty_multiplier: f64,
    pub events: Vec<Event>,
    /// Return data of a successful call (empty on revert).
    pub output: Vec<u8>,
    pub revert_reason: Option<String>,
}

impl TxReceipt {
    pub fn is_success(&self) -> bool {
        self.status == TxStatus::Success
    }

    /// Output decoded as a single boolean word.
    pub fn output_bool(&self) -> Option<bool> {
        let w: Word = self.output.as_slice().try_into().ok()?;
        match u64_from_word(&w).ok()? {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        }
    }

    pub fn log_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.tx_id,
            self.clock,
            self.contract,
            self.operation,
            self.status.as_str(),
            self.gas_used,
            self.revert_reason.as_deref().unwrap_or("")
        )
    }
}

pub const RECEIPT_LOG_HEADER: &str = "tx_id,clock,contract,operation,status,gas_used,revert_reason";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revert {
    pub reason: String,
}

impl Revert {
    pub fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }

    pub fn unknown_target() -> Self {
        Self::new("unknown target")
    }
}

impl fmt::Display for Revert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.reason)
    }
}

impl From<crate::codec::CodecError> for Revert {
    fn from(_: crate::codec::CodecError) -> Self {
        Revert::new("malformed call")
    }
}

pub type CallResult = Result<Vec<u8>, Revert>;

/// A contract state machine. Implementations hold no mutable state of their
/// own; everything goes through the [`CallContext`].
pub trait Contract: Send + Sync {
    fn name(&self) -> &'static str;
    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult;
}

/// Execution environment for one call: metered storage, events and
/// cryptographic precompiles.
pub struct CallContext<'a> {
    contract: &'a str,
    caller: &'a AccountId,
    clock: u64,
    schedule: &'a GasSchedule,
    scheme: &'a dyn SignatureScheme,
    state: &'a ChainState,
    writes: BTreeMap<Word, Word>,
    events: Vec<Event>,
    gas: u64,
}

impl<'a> CallContext<'a> {
    pub fn caller(&self) -> &AccountId {
        self.caller
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn schedule(&self) -> &GasSchedule {
        self.schedule
    }

    pub fn gas_metered(&self) -> u64 {
        self.gas
    }

    pub fn charge(&mut self, gas: u64) {
        self.gas += gas;
    }

    fn peek(&self, key: &Word) -> Option<Word> {
        self.writes.get(key).copied().or_else(|| self.state.read(self.contract, key))
    }

    pub fn sload(&mut self, key: &Word) -> Option<Word> {
        self.charge(self.schedule.storage_read);
        self.peek(key)
    }

    /// Reads another contract's committed store.
    pub fn sload_from(&mut self, contract: &str, key: &Word) -> Option<Word> {
        self.charge(self.schedule.storage_read);
        self.state.read(contract, key)
    }

    pub fn sstore(&mut self, key: Word, value: Word) {
        let cost = if self.peek(&key).is_some() {
            self.schedule.storage_write_update
        } else {
            self.schedule.storage_write_new
        };
        self.charge(cost);
        self.writes.insert(key, value);
    }

    pub fn store_blob(&mut self, key: Word, bytes: &[u8]) {
        self.sstore(key, word_u64(bytes.len() as u64));
        for (i, chunk) in bytes.chunks(WORD).enumerate() {
            let mut w = [0u8; WORD];
            w[..chunk.len()].copy_from_slice(chunk);
            self.sstore(blob_chunk_slot(&key, i), w);
        }
    }

    pub fn load_blob(&mut self, key: &Word) -> Option<Vec<u8>> {
        let header = self.sload(key)?;
        read_blob_chunks(header, key, |k| self.sload(k))
    }

    pub fn load_blob_from(&mut self, contract: &str, key: &Word) -> Option<Vec<u8>> {
        let header = self.sload_from(contract, key)?;
        read_blob_chunks(header, key, |k| self.sload_from(contract, k))
    }

    pub fn has_role(&mut self, account: &AccountId, role: Role) -> bool {
        self.sload_from(ROLES_STORE, &role_slot(account, role)).is_some()
    }

    pub fn emit(&mut self, name: &str, payload: Vec<u8>) {
        self.charge(self.schedule.event_base + self.schedule.event_byte * payload.len() as u64);
        self.events.push(Event { contract: self.contract.to_string(), name: name.to_string(), payload });
    }

    pub fn keccak(&mut self, data: &[u8]) -> Digest32 {
        self.charge(self.schedule.hash_op);
        keccak256(data)
    }

    pub fn keccak_pair(&mut self, left: &Digest32, right: &Digest32) -> Digest32 {
        self.charge(self.schedule.hash_op);
        keccak256_concat(&[left.as_ref(), right.as_ref()])
    }

    /// Fixed-price modular exponentiation precompile.
    pub fn modexp(&mut self, base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
        self.charge(self.schedule.modexp_fixed);
        base.modpow(exponent, modulus)
    }

    /// Signature precompile, priced as one message hash plus one fixed-size
    /// modular exponentiation.
    pub fn verify_signature(&mut self, bundle: &SignatureBundle) -> bool {
        self.charge(self.schedule.hash_op + self.schedule.modexp_fixed);
        self.scheme.verify(bundle)
    }
}

fn blob_chunk_slot(key: &Word, index: usize) -> Word {
    slot(b"blob", &[key, &(index as u64).to_be_bytes()])
}

fn read_blob_chunks(header: Word, key: &Word, mut read: impl FnMut(&Word) -> Option<Word>) -> Option<Vec<u8>> {
    let len = usize::try_from(u64_from_word(&header).ok()?).ok()?;
    let mut out = Vec::with_capacity(len);
    for i in 0..len.div_ceil(WORD) {
        out.extend_from_slice(&read(&blob_chunk_slot(key, i))?);
    }
    out.truncate(len);
    Some(out)
}

/// Outcome of a read-only query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub output: Vec<u8>,
    pub gas: u64,
}

pub struct Ledger {
    schedule: GasSchedule,
    state: ChainState,
    contracts: BTreeMap<String, Arc<dyn Contract>>,
    scheme: Arc<dyn SignatureScheme>,
    receipts: Vec<TxReceipt>,
}

impl Ledger {
    /// Fresh ledger whose role table grants `governance` the governance role.
    /// That genesis entry is the only state not produced by a transaction.
    pub fn new(schedule: GasSchedule, governance: &AccountId) -> Self {
        Self::with_scheme(schedule, governance, Arc::new(Ed25519Scheme))
    }

    pub fn with_scheme(schedule: GasSchedule, governance: &AccountId, scheme: Arc<dyn SignatureScheme>) -> Self {
        let mut state = ChainState::default();
        state
            .stores
            .entry(ROLES_STORE.to_string())
            .or_default()
            .insert(role_slot(governance, Role::Governance), word_u64(1));
        Self { schedule, state, contracts: BTreeMap::new(), scheme, receipts: Vec::new() }
    }

    pub fn register_contract(&mut self, contract: Arc<dyn Contract>) {
        self.contracts.insert(contract.name().to_string(), contract);
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn clock(&self) -> u64 {
        self.state.clock
    }

    pub fn receipts(&self) -> &[TxReceipt] {
        &self.receipts
    }

    pub fn state_digest(&self) -> Digest32 {
        self.state.digest()
    }

    pub fn advance_clock(&mut self, seconds: u64) {
        self.state.advance_clock(seconds);
    }

    /// Moves the clock forward to `clock`; earlier targets are ignored.
    pub fn advance_to(&mut self, clock: u64) {
        if clock > self.state.clock {
            self.advance_clock(clock - self.state.clock);
        }
    }

    pub fn has_role(&self, account: &AccountId, role: Role) -> bool {
        self.state.read(ROLES_STORE, &role_slot(account, role)).is_some()
    }

    /// Free, unmetered blob read for off-chain views.
    pub fn read_blob(&self, contract: &str, key: &Word) -> Option<Vec<u8>> {
        let header = self.state.read(contract, key)?;
        read_blob_chunks(header, key, |k| self.state.read(contract, k))
    }

    pub fn read_slot(&self, contract: &str, key: &Word) -> Option<Word> {
        self.state.read(contract, key)
    }

    fn run(&self, caller: &AccountId, call: &Call) -> (CallResult, BTreeMap<Word, Word>, Vec<Event>, u64) {
        let Some(contract) = self.contracts.get(&call.contract) else {
            return (Err(Revert::unknown_target()), BTreeMap::new(), Vec::new(), 0);
        };
        let mut ctx = CallContext {
            contract: contract.name(),
            caller,
            clock: self.state.clock,
            schedule: &self.schedule,
            scheme: self.scheme.as_ref(),
            state: &self.state,
            writes: BTreeMap::new(),
            events: Vec::new(),
            gas: 0,
        };
        let result = contract.execute(&mut ctx, &call.op, &call.args);
        (result, ctx.writes, ctx.events, ctx.gas)
    }

    fn intrinsic_gas(&self, call: &Call) -> u64 {
        self.schedule.tx_base + self.schedule.calldata_byte * call.args.len() as u64
    }

    /// Executes one transaction atomically and appends its receipt.
    pub fn execute_tx(&mut self, caller: &AccountId, call: &Call) -> TxReceipt {
        self.state.cumulative_tx_today += 1;
        let cumulative = self.state.cumulative_tx_today;
        let (result, writes, events, metered) = self.run(caller, call);
        let unpenalized_gas = self.intrinsic_gas(call) + metered;
        let gas_used = penalized_gas(unpenalized_gas, cumulative, &self.schedule);

        let (status, events, output, revert_reason) = match result {
            Ok(output) => {
                if !writes.is_empty() {
                    self.state.stores.entry(call.contract.clone()).or_default().extend(writes);
                }
                (TxStatus::Success, events, output, None)
            }
            Err(revert) => (TxStatus::Reverted, Vec::new(), Vec::new(), Some(revert.reason)),
        };
        let receipt = TxReceipt {
            tx_id: self.receipts.len() as u64 + 1,
            clock: self.state.clock,
            caller: caller.clone(),
            contract: call.contract.clone(),
            operation: call.op.clone(),
            status,
            gas_used,
            unpenalized_gas,
            penalty_multiplier: capacity_penalty(cumulative, &self.schedule),
            events,
            output,
            revert_reason,
        };
        self.receipts.push(receipt.clone());
        receipt
    }

    /// Runs a call against current state and discards all effects, like an
    /// `eth_call`. Does not touch the daily counter or receipt history.
    pub fn query(&self, caller: &AccountId, call: &Call) -> Result<QueryResult, Revert> {
        let (result, _, _, metered) = self.run(caller, call);
        result.map(|output| QueryResult { output, gas: self.intrinsic_gas(call) + metered })
    }

    /// Line-delimited receipt log with a header line.
    pub fn receipt_log(&self) -> String {
        let mut out = String::from(RECEIPT_LOG_HEADER);
        out.push('\n');
        for r in &self.receipts {
            out.push_str(&r.log_line());
            out.push('\n');
        }
        out
    }
}
