//! OnOffChainVerifier: write-once anchors for settlement digests and batch
//! roots. The contract never looks inside the records it anchors.

use crate::codec::{Word, WordReader, WordWriter};
use crate::crypto::Digest32;
use crate::ledger::{slot, AccountId, Call, CallContext, CallResult, Contract, Ledger, Revert};

use super::{account_from_bytes, account_word, be_u64, parse_account, require_registered, VERIFIER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitmentKind {
    SingleDigest,
    BatchRoot,
}

impl CommitmentKind {
    fn tag(self) -> u8 {
        match self {
            CommitmentKind::SingleDigest => 0,
            CommitmentKind::BatchRoot => 1,
        }
    }

    fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(CommitmentKind::SingleDigest),
            1 => Some(CommitmentKind::BatchRoot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub commitment_id: Word,
    pub kind: CommitmentKind,
    pub value: Digest32,
    pub declared_count: u64,
    pub committer: AccountId,
    pub clock: u64,
}

pub struct OnOffChainVerifier;

pub fn value_slot(id: &Word) -> Word {
    slot(b"commit.value", &[id])
}

pub fn meta_slot(id: &Word) -> Word {
    slot(b"commit.meta", &[id])
}

pub fn commit_call(id: &Word, kind: CommitmentKind, value: &Digest32, count: u64) -> Call {
    let args = WordWriter::new().word(id).u64(kind.tag() as u64).word(&value.0).u64(count).finish();
    Call::new(VERIFIER, "commit", args)
}

pub fn get_call(id: &Word) -> Call {
    Call::new(VERIFIER, "get", WordWriter::new().word(id).finish())
}

// meta word: kind(1) | count(4) | clock(8) | committer(16) | pad(3)
fn pack_meta(kind: CommitmentKind, count: u32, clock: u64, committer: &AccountId) -> Word {
    let mut w = [0u8; 32];
    w[0] = kind.tag();
    w[1..5].copy_from_slice(&count.to_be_bytes());
    w[5..13].copy_from_slice(&clock.to_be_bytes());
    w[13..29].copy_from_slice(&account_word(committer)[..16]);
    w
}

fn unpack(id: &Word, value: Word, meta: Word) -> Option<Commitment> {
    Some(Commitment {
        commitment_id: *id,
        kind: CommitmentKind::from_tag(meta[0] as u64)?,
        value: Digest32(value),
        declared_count: u32::from_be_bytes(meta[1..5].try_into().ok()?) as u64,
        clock: be_u64(&meta[5..13]),
        committer: account_from_bytes(&meta[13..29])?,
    })
}

fn encode_commitment(c: &Commitment) -> Vec<u8> {
    WordWriter::new()
        .u64(c.kind.tag() as u64)
        .word(&c.value.0)
        .u64(c.declared_count)
        .short(c.committer.as_bytes())
        .u64(c.clock)
        .finish()
}

/// Decodes the output of `get`; empty output means absent.
pub fn decode_get_output(id: &Word, output: &[u8]) -> Result<Option<Commitment>, Revert> {
    if output.is_empty() {
        return Ok(None);
    }
    let mut r = WordReader::new(output);
    let kind = CommitmentKind::from_tag(r.u64()?).ok_or_else(|| Revert::new("malformed output"))?;
    let value = Digest32(r.word()?);
    let declared_count = r.u64()?;
    let committer = parse_account(r.short(AccountId::MAX_LEN)?)?;
    let clock = r.u64()?;
    r.finish()?;
    Ok(Some(Commitment { commitment_id: *id, kind, value, declared_count, committer, clock }))
}

/// Unmetered read of a committed anchor.
pub fn commitment(ledger: &Ledger, id: &Word) -> Option<Commitment> {
    let value = ledger.read_slot(VERIFIER, &value_slot(id))?;
    let meta = ledger.read_slot(VERIFIER, &meta_slot(id))?;
    unpack(id, value, meta)
}

impl Contract for OnOffChainVerifier {
    fn name(&self) -> &'static str {
        VERIFIER
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        match op {
            "commit" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                let kind = CommitmentKind::from_tag(r.u64()?).ok_or_else(|| Revert::new("invalid commitment"))?;
                let value = r.word()?;
                let count = r.u64()?;
                r.finish()?;
                require_registered(ctx)?;
                let count_ok = match kind {
                    CommitmentKind::SingleDigest => count == 1,
                    CommitmentKind::BatchRoot => count >= 1 && count <= u32::MAX as u64,
                };
                if !count_ok {
                    return Err(Revert::new("invalid commitment"));
                }
                if ctx.sload(&meta_slot(&id)).is_some() {
                    return Err(Revert::new("commitment exists"));
                }
                let meta = pack_meta(kind, count as u32, ctx.clock(), &ctx.caller().clone());
                ctx.sstore(value_slot(&id), value);
                ctx.sstore(meta_slot(&id), meta);
                ctx.emit(
                    "Committed",
                    WordWriter::new().word(&id).u64(kind.tag() as u64).word(&value).u64(count).finish(),
                );
                Ok(Vec::new())
            }
            "get" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                r.finish()?;
                let meta = ctx.sload(&meta_slot(&id));
                let value = ctx.sload(&value_slot(&id));
                match (value, meta) {
                    (Some(v), Some(m)) => {
                        let c = unpack(&id, v, m).ok_or_else(|| Revert::new("corrupt commitment"))?;
                        Ok(encode_commitment(&c))
                    }
                    _ => Ok(Vec::new()),
                }
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::{install_all, roles::grant_call};
    use crate::crypto::keccak256;
    use crate::ledger::{GasSchedule, Role};

    fn setup() -> (Ledger, AccountId) {
        let gov = AccountId::new("gov").unwrap();
        let p = AccountId::new("prosumer").unwrap();
        let mut l = Ledger::new(GasSchedule::default(), &gov);
        install_all(&mut l, 300);
        assert!(l.execute_tx(&gov, &grant_call(&p, Role::Prosumer)).is_success());
        (l, p)
    }

    #[test]
    fn commit_is_write_once_and_retrievable() {
        let (mut l, p) = setup();
        l.advance_clock(42);
        let id = keccak256(b"id").0;
        let d = keccak256(b"digest");
        let r = l.execute_tx(&p, &commit_call(&id, CommitmentKind::SingleDigest, &d, 1));
        assert!(r.is_success(), "{:?}", r.revert_reason);
        assert_eq!(r.events[0].name, "Committed");

        let c = commitment(&l, &id).unwrap();
        assert_eq!(c.value, d);
        assert_eq!(c.kind, CommitmentKind::SingleDigest);
        assert_eq!(c.committer, p);
        assert_eq!(c.clock, 42);

        let via_tx = l.execute_tx(&p, &get_call(&id));
        assert_eq!(decode_get_output(&id, &via_tx.output).unwrap(), Some(c.clone()));
        assert_eq!(via_tx.gas_used, l.schedule().tx_base + 32 * 16 + 2 * l.schedule().storage_read);

        let before = l.state_digest();
        let dup = l.execute_tx(&p, &commit_call(&id, CommitmentKind::SingleDigest, &keccak256(b"other"), 1));
        assert_eq!(dup.revert_reason.as_deref(), Some("commitment exists"));
        assert_eq!(l.state_digest(), before);
        assert_eq!(commitment(&l, &id), Some(c));
    }

    #[test]
    fn unknown_id_is_absent() {
        let (mut l, p) = setup();
        let id = [9u8; 32];
        assert!(commitment(&l, &id).is_none());
        let r = l.execute_tx(&p, &get_call(&id));
        assert!(r.is_success());
        assert_eq!(decode_get_output(&id, &r.output).unwrap(), None);
    }

    #[test]
    fn unregistered_caller_and_bad_counts() {
        let (mut l, p) = setup();
        let stranger = AccountId::new("stranger").unwrap();
        let d = keccak256(b"d");
        let r = l.execute_tx(&stranger, &commit_call(&[1; 32], CommitmentKind::SingleDigest, &d, 1));
        assert_eq!(r.revert_reason.as_deref(), Some("unauthorized"));
        let r = l.execute_tx(&p, &commit_call(&[1; 32], CommitmentKind::SingleDigest, &d, 2));
        assert_eq!(r.revert_reason.as_deref(), Some("invalid commitment"));
        let r = l.execute_tx(&p, &commit_call(&[1; 32], CommitmentKind::BatchRoot, &d, 0));
        assert_eq!(r.revert_reason.as_deref(), Some("invalid commitment"));
        let r = l.execute_tx(&p, &commit_call(&[1; 32], CommitmentKind::BatchRoot, &d, 64));
        assert!(r.is_success());
        assert_eq!(commitment(&l, &[1; 32]).unwrap().declared_count, 64);
    }
}
