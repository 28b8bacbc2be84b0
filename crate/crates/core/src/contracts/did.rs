//! DidRegistry: binds a DID to its controller account and rotating keys.
//! Authentication is a signed challenge over a 60-second clock bucket.

use crate::codec::{Word, WordReader, WordWriter};
use crate::crypto::SignatureBundle;
use crate::ledger::{slot, AccountId, Call, CallContext, CallResult, Contract, Ledger, Revert};

use super::{account_from_bytes, account_word, be_u64, require_registered, DID};

pub const MAX_DID_LEN: usize = 64;
pub const MAX_KEY_LEN: usize = 64;
/// Width of one authentication challenge bucket, in logical seconds.
pub const AUTH_BUCKET_SECONDS: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DidEntry {
    pub did: String,
    pub controller: AccountId,
    pub active_key: Vec<u8>,
    pub last_auth_clock: Option<u64>,
    /// `(key, clock at which it became active)`, oldest first.
    pub key_history: Vec<(Vec<u8>, u64)>,
}

pub struct DidRegistry;

pub(crate) fn entry_slot(did: &[u8]) -> Word {
    slot(b"did.entry", &[did])
}

pub(crate) fn key_slot(did: &[u8], index: u64) -> Word {
    slot(b"did.key", &[did, &index.to_be_bytes()])
}

fn key_clock_slot(did: &[u8], index: u64) -> Word {
    slot(b"did.key.clock", &[did, &index.to_be_bytes()])
}

pub(crate) fn auth_slot(did: &[u8]) -> Word {
    slot(b"did.auth", &[did])
}

// entry word: controller(16) | key count(8) | pad(8)
fn pack_entry(controller: &AccountId, keys: u64) -> Word {
    let mut w = account_word(controller);
    w[16..24].copy_from_slice(&keys.to_be_bytes());
    w
}

pub(crate) fn unpack_entry(w: &Word) -> Option<(AccountId, u64)> {
    Some((account_from_bytes(&w[..16])?, be_u64(&w[16..24])))
}

// auth word: clock(8) | bucket(8) | pad(16)
fn pack_auth(clock: u64, bucket: u64) -> Word {
    let mut w = [0u8; 32];
    w[..8].copy_from_slice(&clock.to_be_bytes());
    w[8..16].copy_from_slice(&bucket.to_be_bytes());
    w
}

pub(crate) fn unpack_auth(w: &Word) -> (u64, u64) {
    (be_u64(&w[..8]), be_u64(&w[8..16]))
}

pub fn auth_bucket(clock: u64) -> u64 {
    clock / AUTH_BUCKET_SECONDS
}

/// Message the current key signs to authorize `new_key`.
pub fn rotation_message(did: &str, new_key: &[u8]) -> Vec<u8> {
    WordWriter::new().dynamic(did.as_bytes()).dynamic(new_key).finish()
}

/// Challenge the active key signs to authenticate during `bucket`.
pub fn auth_message(did: &str, bucket: u64) -> Vec<u8> {
    WordWriter::new().dynamic(did.as_bytes()).u64(bucket).finish()
}

pub fn register_call(did: &str, public_key: &[u8]) -> Call {
    Call::new(DID, "register", WordWriter::new().dynamic(did.as_bytes()).dynamic(public_key).finish())
}

pub fn rotate_call(did: &str, new_key: &[u8], signature: &[u8]) -> Call {
    let args = WordWriter::new().dynamic(did.as_bytes()).dynamic(new_key).dynamic(signature).finish();
    Call::new(DID, "rotate", args)
}

pub fn authenticate_call(did: &str, signature: &[u8]) -> Call {
    Call::new(DID, "authenticate", WordWriter::new().dynamic(did.as_bytes()).dynamic(signature).finish())
}

/// Unmetered read of a DID entry with its full key history.
pub fn did_entry(ledger: &Ledger, did: &str) -> Option<DidEntry> {
    let d = did.as_bytes();
    let (controller, keys) = unpack_entry(&ledger.read_slot(DID, &entry_slot(d))?)?;
    let mut key_history = Vec::with_capacity(keys as usize);
    for i in 0..keys {
        let key = ledger.read_blob(DID, &key_slot(d, i))?;
        let since = crate::codec::u64_from_word(&ledger.read_slot(DID, &key_clock_slot(d, i))?).ok()?;
        key_history.push((key, since));
    }
    let active_key = key_history.last()?.0.clone();
    let last_auth_clock = ledger.read_slot(DID, &auth_slot(d)).map(|w| unpack_auth(&w).0);
    Some(DidEntry { did: did.to_string(), controller, active_key, last_auth_clock, key_history })
}

fn read_did(r: &mut WordReader<'_>) -> Result<Vec<u8>, Revert> {
    let did = r.dynamic()?;
    if did.is_empty() || did.len() > MAX_DID_LEN {
        return Err(Revert::new("invalid did"));
    }
    Ok(did)
}

fn load_entry(ctx: &mut CallContext<'_>, did: &[u8]) -> Result<(AccountId, u64), Revert> {
    let w = ctx.sload(&entry_slot(did)).ok_or_else(|| Revert::new("unknown did"))?;
    unpack_entry(&w).ok_or_else(|| Revert::new("corrupt did"))
}

fn load_active_key(ctx: &mut CallContext<'_>, did: &[u8], keys: u64) -> Result<Vec<u8>, Revert> {
    let index = keys.checked_sub(1).ok_or_else(|| Revert::new("corrupt did"))?;
    ctx.load_blob(&key_slot(did, index)).ok_or_else(|| Revert::new("corrupt did"))
}

fn push_key(ctx: &mut CallContext<'_>, did: &[u8], index: u64, key: &[u8]) {
    let clock = ctx.clock();
    ctx.store_blob(key_slot(did, index), key);
    ctx.sstore(key_clock_slot(did, index), crate::codec::word_u64(clock));
}

impl Contract for DidRegistry {
    fn name(&self) -> &'static str {
        DID
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        let mut r = WordReader::new(args);
        match op {
            "register" => {
                let did = read_did(&mut r)?;
                let key = r.dynamic()?;
                r.finish()?;
                require_registered(ctx)?;
                if key.is_empty() || key.len() > MAX_KEY_LEN {
                    return Err(Revert::new("invalid key"));
                }
                if ctx.sload(&entry_slot(&did)).is_some() {
                    return Err(Revert::new("did exists"));
                }
                let controller = ctx.caller().clone();
                ctx.sstore(entry_slot(&did), pack_entry(&controller, 1));
                push_key(ctx, &did, 0, &key);
                ctx.emit("DidRegistered", WordWriter::new().dynamic(&did).dynamic(&key).finish());
                Ok(Vec::new())
            }
            "rotate" => {
                let did = read_did(&mut r)?;
                let new_key = r.dynamic()?;
                let signature = r.dynamic()?;
                r.finish()?;
                let (controller, keys) = load_entry(ctx, &did)?;
                if new_key.is_empty() || new_key.len() > MAX_KEY_LEN {
                    return Err(Revert::new("invalid key"));
                }
                let current = load_active_key(ctx, &did, keys)?;
                let bundle = SignatureBundle {
                    public_key: current,
                    message: WordWriter::new().dynamic(&did).dynamic(&new_key).finish(),
                    signature,
                };
                if !ctx.verify_signature(&bundle) {
                    return Err(Revert::new("bad rotation"));
                }
                ctx.sstore(entry_slot(&did), pack_entry(&controller, keys + 1));
                push_key(ctx, &did, keys, &new_key);
                ctx.emit("KeyRotated", WordWriter::new().dynamic(&did).dynamic(&new_key).finish());
                Ok(Vec::new())
            }
            "authenticate" => {
                let did = read_did(&mut r)?;
                let signature = r.dynamic()?;
                r.finish()?;
                let (_, keys) = load_entry(ctx, &did)?;
                let clock = ctx.clock();
                let bucket = auth_bucket(clock);
                if let Some(w) = ctx.sload(&auth_slot(&did)) {
                    if bucket <= unpack_auth(&w).1 {
                        return Err(Revert::new("auth failed"));
                    }
                }
                let key = load_active_key(ctx, &did, keys)?;
                let bundle = SignatureBundle {
                    public_key: key,
                    message: WordWriter::new().dynamic(&did).u64(bucket).finish(),
                    signature,
                };
                if !ctx.verify_signature(&bundle) {
                    return Err(Revert::new("auth failed"));
                }
                ctx.sstore(auth_slot(&did), pack_auth(clock, bucket));
                ctx.emit("Authenticated", WordWriter::new().dynamic(&did).u64(clock).finish());
                Ok(Vec::new())
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::install_all;
    use crate::contracts::roles::grant_call;
    use crate::crypto::SigningKeypair;
    use crate::ledger::{GasSchedule, Role};

    fn setup() -> (Ledger, AccountId) {
        let gov = AccountId::new("gov").unwrap();
        let p = AccountId::new("holder").unwrap();
        let mut l = Ledger::new(GasSchedule::default(), &gov);
        install_all(&mut l, 300);
        assert!(l.execute_tx(&gov, &grant_call(&p, Role::Prosumer)).is_success());
        (l, p)
    }

    const DID_A: &str = "did:grid:a";

    fn authenticate(l: &mut Ledger, who: &AccountId, key: &SigningKeypair) -> crate::ledger::TxReceipt {
        let sig = key.sign(&auth_message(DID_A, auth_bucket(l.clock())));
        l.execute_tx(who, &authenticate_call(DID_A, &sig))
    }

    #[test]
    fn register_rotate_and_history() {
        let (mut l, p) = setup();
        let k0 = SigningKeypair::from_seed([1; 32]);
        let k1 = SigningKeypair::from_seed([2; 32]);
        let k2 = SigningKeypair::from_seed([3; 32]);
        assert!(l.execute_tx(&p, &register_call(DID_A, &k0.public_key())).is_success());
        let dup = l.execute_tx(&p, &register_call(DID_A, &k1.public_key()));
        assert_eq!(dup.revert_reason.as_deref(), Some("did exists"));

        let forged = k2.sign(&rotation_message(DID_A, &k1.public_key()));
        let r = l.execute_tx(&p, &rotate_call(DID_A, &k1.public_key(), &forged));
        assert_eq!(r.revert_reason.as_deref(), Some("bad rotation"));

        l.advance_clock(10);
        let sig = k0.sign(&rotation_message(DID_A, &k1.public_key()));
        assert!(l.execute_tx(&p, &rotate_call(DID_A, &k1.public_key(), &sig)).is_success());
        let e = did_entry(&l, DID_A).unwrap();
        assert_eq!(e.active_key, k1.public_key());
        assert_eq!(e.key_history, vec![(k0.public_key(), 0), (k1.public_key(), 10)]);
        assert_eq!(e.controller, p);

        let missing = l.execute_tx(&p, &rotate_call("did:grid:none", &k1.public_key(), &sig));
        assert_eq!(missing.revert_reason.as_deref(), Some("unknown did"));
    }

    #[test]
    fn authentication_moves_forward_only() {
        let (mut l, p) = setup();
        let k0 = SigningKeypair::from_seed([1; 32]);
        let k1 = SigningKeypair::from_seed([2; 32]);
        assert!(l.execute_tx(&p, &register_call(DID_A, &k0.public_key())).is_success());

        l.advance_to(125);
        assert!(authenticate(&mut l, &p, &k0).is_success());
        assert_eq!(did_entry(&l, DID_A).unwrap().last_auth_clock, Some(125));

        // Same bucket replayed, even with a valid signature.
        l.advance_to(170);
        let replay = authenticate(&mut l, &p, &k0);
        assert_eq!(replay.revert_reason.as_deref(), Some("auth failed"));
        assert_eq!(did_entry(&l, DID_A).unwrap().last_auth_clock, Some(125));

        // A rotated-out key stops authenticating.
        let sig = k0.sign(&rotation_message(DID_A, &k1.public_key()));
        assert!(l.execute_tx(&p, &rotate_call(DID_A, &k1.public_key(), &sig)).is_success());
        l.advance_to(200);
        assert_eq!(authenticate(&mut l, &p, &k0).revert_reason.as_deref(), Some("auth failed"));
        assert!(authenticate(&mut l, &p, &k1).is_success());
        assert_eq!(did_entry(&l, DID_A).unwrap().last_auth_clock, Some(200));
    }
}
