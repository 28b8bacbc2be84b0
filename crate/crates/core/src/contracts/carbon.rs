//! CarbonAssetRegistry: credit lineages with per-owner sub-balances.
//!
//! A registered asset is a lineage with a fixed `total`. Transfers split the
//! sender's available credits into a sub-entry for the recipient under the
//! same lineage, so `sum(available) + sum(retired) <= total` stays checkable
//! as an aggregate.

use crate::codec::{Word, WordReader, WordWriter};
use crate::ledger::{slot, AccountId, Call, CallContext, CallResult, Contract, Ledger, Revert, Role};

use super::{account_from_bytes, account_word, be_u64, parse_account, require_role, CARBON};

pub const MAX_ASSET_TYPE_LEN: usize = 16;

/// One owner's view of a lineage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarbonAsset {
    pub asset_id: Word,
    pub asset_type: String,
    pub total: u64,
    pub available: u64,
    pub retired: u64,
    pub issuance_year: u64,
    pub owner: AccountId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage {
    pub asset_id: Word,
    pub asset_type: String,
    pub total: u64,
    pub issuance_year: u64,
    /// Sub-entries in creation order; the registering owner comes first.
    pub entries: Vec<CarbonAsset>,
}

impl Lineage {
    pub fn available(&self) -> u64 {
        self.entries.iter().map(|e| e.available).sum()
    }

    pub fn retired(&self) -> u64 {
        self.entries.iter().map(|e| e.retired).sum()
    }

    /// `available + retired <= total` over the whole lineage.
    pub fn is_conserved(&self) -> bool {
        self.available().checked_add(self.retired()).is_some_and(|sum| sum <= self.total)
    }

    pub fn entry(&self, owner: &AccountId) -> Option<&CarbonAsset> {
        self.entries.iter().find(|e| &e.owner == owner)
    }
}

pub struct CarbonAssetRegistry;

fn header_slot(id: &Word) -> Word {
    slot(b"carbon.header", &[id])
}

fn type_slot(id: &Word) -> Word {
    slot(b"carbon.type", &[id])
}

fn owner_slot(id: &Word, index: u64) -> Word {
    slot(b"carbon.owner", &[id, &index.to_be_bytes()])
}

fn entry_slot(id: &Word, owner: &AccountId) -> Word {
    slot(b"carbon.entry", &[id, owner.as_bytes()])
}

// header word: total(8) | year(8) | owner count(8) | pad(8)
fn pack_header(total: u64, year: u64, owners: u64) -> Word {
    let mut w = [0u8; 32];
    w[..8].copy_from_slice(&total.to_be_bytes());
    w[8..16].copy_from_slice(&year.to_be_bytes());
    w[16..24].copy_from_slice(&owners.to_be_bytes());
    w
}

fn unpack_header(w: &Word) -> (u64, u64, u64) {
    (be_u64(&w[..8]), be_u64(&w[8..16]), be_u64(&w[16..24]))
}

// entry word: available(8) | retired(8) | pad(16)
fn pack_entry(available: u64, retired: u64) -> Word {
    let mut w = [0u8; 32];
    w[..8].copy_from_slice(&available.to_be_bytes());
    w[8..16].copy_from_slice(&retired.to_be_bytes());
    w
}

fn unpack_entry(w: &Word) -> (u64, u64) {
    (be_u64(&w[..8]), be_u64(&w[8..16]))
}

pub fn register_call(asset_id: &Word, asset_type: &str, total: u64, issuance_year: u64, owner: &AccountId) -> Call {
    let args = WordWriter::new()
        .word(asset_id)
        .short(asset_type.as_bytes())
        .u64(total)
        .u64(issuance_year)
        .short(owner.as_bytes())
        .finish();
    Call::new(CARBON, "register", args)
}

pub fn transfer_call(asset_id: &Word, to: &AccountId, amount: u64) -> Call {
    Call::new(CARBON, "transfer", WordWriter::new().word(asset_id).short(to.as_bytes()).u64(amount).finish())
}

pub fn retire_call(asset_id: &Word, amount: u64) -> Call {
    Call::new(CARBON, "retire", WordWriter::new().word(asset_id).u64(amount).finish())
}

/// Unmetered read of a whole lineage.
pub fn lineage(ledger: &Ledger, id: &Word) -> Option<Lineage> {
    let (total, issuance_year, owners) = unpack_header(&ledger.read_slot(CARBON, &header_slot(id))?);
    let type_word = ledger.read_slot(CARBON, &type_slot(id))?;
    let type_end = type_word.iter().position(|b| *b == 0).unwrap_or(type_word.len());
    let asset_type = String::from_utf8(type_word[..type_end].to_vec()).ok()?;
    let mut entries = Vec::with_capacity(owners as usize);
    for i in 0..owners {
        let owner = account_from_bytes(&ledger.read_slot(CARBON, &owner_slot(id, i))?)?;
        let (available, retired) = unpack_entry(&ledger.read_slot(CARBON, &entry_slot(id, &owner))?);
        entries.push(CarbonAsset {
            asset_id: *id,
            asset_type: asset_type.clone(),
            total,
            available,
            retired,
            issuance_year,
            owner,
        });
    }
    Some(Lineage { asset_id: *id, asset_type, total, issuance_year, entries })
}

/// Unmetered read of one owner's sub-entry.
pub fn asset(ledger: &Ledger, id: &Word, owner: &AccountId) -> Option<CarbonAsset> {
    lineage(ledger, id)?.entries.into_iter().find(|e| &e.owner == owner)
}

/// Loads the header and the caller's own entry, applying the shared gate
/// order of transfer and retire.
fn load_own_entry(ctx: &mut CallContext<'_>, id: &Word, amount: u64) -> Result<(Word, (u64, u64)), Revert> {
    let header = ctx.sload(&header_slot(id)).ok_or_else(|| Revert::new("unknown asset"))?;
    let caller = ctx.caller().clone();
    let entry = ctx.sload(&entry_slot(id, &caller)).ok_or_else(|| Revert::new("unauthorized"))?;
    if amount == 0 {
        return Err(Revert::new("invalid amount"));
    }
    let (available, retired) = unpack_entry(&entry);
    if amount > available {
        return Err(Revert::new("exceeds available"));
    }
    Ok((header, (available, retired)))
}

impl Contract for CarbonAssetRegistry {
    fn name(&self) -> &'static str {
        CARBON
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        match op {
            "register" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                let asset_type = r.short(MAX_ASSET_TYPE_LEN)?;
                let total = r.u64()?;
                let year = r.u64()?;
                let owner = parse_account(r.short(AccountId::MAX_LEN)?)?;
                r.finish()?;
                require_role(ctx, Role::Authority)?;
                if total == 0 {
                    return Err(Revert::new("invalid amount"));
                }
                if asset_type.is_empty() || asset_type.contains(&0) {
                    return Err(Revert::new("invalid asset type"));
                }
                if ctx.sload(&header_slot(&id)).is_some() {
                    return Err(Revert::new("asset exists"));
                }
                let mut type_word = [0u8; 32];
                type_word[..asset_type.len()].copy_from_slice(&asset_type);
                ctx.sstore(header_slot(&id), pack_header(total, year, 1));
                ctx.sstore(type_slot(&id), type_word);
                ctx.sstore(owner_slot(&id, 0), account_word(&owner));
                ctx.sstore(entry_slot(&id, &owner), pack_entry(total, 0));
                ctx.emit(
                    "AssetRegistered",
                    WordWriter::new().word(&id).u64(total).u64(year).short(owner.as_bytes()).finish(),
                );
                Ok(Vec::new())
            }
            "transfer" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                let to = parse_account(r.short(AccountId::MAX_LEN)?)?;
                let amount = r.u64()?;
                r.finish()?;
                let (header, (available, retired)) = load_own_entry(ctx, &id, amount)?;
                let caller = ctx.caller().clone();
                if to == caller {
                    return Err(Revert::new("self transfer"));
                }
                ctx.sstore(entry_slot(&id, &caller), pack_entry(available - amount, retired));
                match ctx.sload(&entry_slot(&id, &to)) {
                    Some(w) => {
                        let (to_available, to_retired) = unpack_entry(&w);
                        ctx.sstore(entry_slot(&id, &to), pack_entry(to_available + amount, to_retired));
                    }
                    None => {
                        let (total, year, owners) = unpack_header(&header);
                        ctx.sstore(owner_slot(&id, owners), account_word(&to));
                        ctx.sstore(entry_slot(&id, &to), pack_entry(amount, 0));
                        ctx.sstore(header_slot(&id), pack_header(total, year, owners + 1));
                    }
                }
                ctx.emit(
                    "Transferred",
                    WordWriter::new().word(&id).short(caller.as_bytes()).short(to.as_bytes()).u64(amount).finish(),
                );
                Ok(Vec::new())
            }
            "retire" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                let amount = r.u64()?;
                r.finish()?;
                let (_, (available, retired)) = load_own_entry(ctx, &id, amount)?;
                let caller = ctx.caller().clone();
                ctx.sstore(entry_slot(&id, &caller), pack_entry(available - amount, retired + amount));
                ctx.emit("Retired", WordWriter::new().word(&id).short(caller.as_bytes()).u64(amount).finish());
                Ok(Vec::new())
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}
