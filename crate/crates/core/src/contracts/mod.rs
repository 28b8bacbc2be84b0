//! Contract state machines executed by the [`Ledger`](crate::ledger::Ledger).
//!
//! Each submodule exposes the contract type, call builders for its
//! operations, and free (unmetered) views over its committed storage for
//! off-chain readers such as the auditor.

pub mod accver;
pub mod carbon;
pub mod did;
pub mod disclosure;
pub mod roles;
pub mod trading;
pub mod verifier;

use std::sync::Arc;

use crate::codec::{word_padded, Word};
use crate::ledger::{AccountId, CallContext, Ledger, Revert, Role};

pub const ROLES: &str = crate::ledger::ROLES_STORE;
pub const VERIFIER: &str = "verifier";
pub const TRADING: &str = "trading";
pub const CARBON: &str = "carbon";
pub const ACCVER: &str = "accver";
pub const DID: &str = "did";
pub const SD: &str = "sd";

/// Default freshness window for identity authentication, in logical seconds.
pub const DEFAULT_AUTH_WINDOW: u64 = 300;

/// Registers the role table and all six contracts.
pub fn install_all(ledger: &mut Ledger, auth_window: u64) {
    ledger.register_contract(Arc::new(roles::Roles));
    ledger.register_contract(Arc::new(verifier::OnOffChainVerifier));
    ledger.register_contract(Arc::new(trading::EnergyTrading));
    ledger.register_contract(Arc::new(carbon::CarbonAssetRegistry));
    ledger.register_contract(Arc::new(accver::AccumulatorVerifier));
    ledger.register_contract(Arc::new(did::DidRegistry));
    ledger.register_contract(Arc::new(disclosure::SelectiveDisclosure::new(auth_window)));
}

pub(crate) fn require_role(ctx: &mut CallContext<'_>, role: Role) -> Result<(), Revert> {
    let caller = ctx.caller().clone();
    if ctx.has_role(&caller, role) {
        Ok(())
    } else {
        Err(Revert::new("unauthorized"))
    }
}

/// Any participant role; reads stop at the first match.
pub(crate) fn require_registered(ctx: &mut CallContext<'_>) -> Result<(), Revert> {
    let caller = ctx.caller().clone();
    for role in [Role::Prosumer, Role::Authority, Role::Governance, Role::Auditor] {
        if ctx.has_role(&caller, role) {
            return Ok(());
        }
    }
    Err(Revert::new("unauthorized"))
}

pub(crate) fn account_word(account: &AccountId) -> Word {
    word_padded(account.as_bytes()).expect("account ids fit in a word")
}

pub(crate) fn account_from_bytes(bytes: &[u8]) -> Option<AccountId> {
    let end = bytes.iter().position(|b| *b == 0).unwrap_or(bytes.len());
    AccountId::new(String::from_utf8(bytes[..end].to_vec()).ok()?).ok()
}

pub(crate) fn parse_account(bytes: Vec<u8>) -> Result<AccountId, Revert> {
    String::from_utf8(bytes).ok().and_then(|s| AccountId::new(s).ok()).ok_or_else(|| Revert::new("invalid account"))
}

pub(crate) fn be_u64(bytes: &[u8]) -> u64 {
    u64::from_be_bytes(bytes.try_into().expect("8 bytes"))
}
