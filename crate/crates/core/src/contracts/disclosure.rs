//! SelectiveDisclosure: holders commit a Merkle root over salted attribute
//! leaves, and a requester can check one leaf through two gates.
//!
//! Gate 1 is identity: the caller must control the requester DID and that
//! DID must have authenticated within the freshness window. Nothing about
//! the holder's attributes is read unless gate 1 passes. Gate 2 is
//! attribute-level: a single-use authorization signed by the holder's active
//! key plus a Merkle inclusion proof against the holder's committed root.

use crate::codec::{Word, WordReader, WordWriter};
use crate::crypto::{keccak256_concat, merkle_verify, Digest32, MerkleProof, SignatureBundle};
use crate::ledger::{slot, AccountId, Call, CallContext, CallResult, Contract, Ledger, Revert};

use super::did::{auth_slot, entry_slot, key_slot, unpack_auth, unpack_entry, MAX_DID_LEN};
use super::{DID, SD};

/// Longest proof accepted; enough for any tree this simulator can build.
pub const MAX_PROOF_LEN: usize = 64;
pub const SALT_LEN: usize = 16;

pub struct SelectiveDisclosure {
    auth_window: u64,
}

impl SelectiveDisclosure {
    pub fn new(auth_window: u64) -> Self {
        Self { auth_window }
    }
}

/// `keccak(key || 0x00 || value || salt)`. The salt stays with the holder so
/// sibling hashes in a disclosed path reveal nothing about other attributes.
pub fn attribute_leaf(key: &[u8], value: &[u8], salt: &[u8; SALT_LEN]) -> Digest32 {
    keccak256_concat(&[key, &[0u8], value, salt])
}

/// Raw bytes the holder signs to authorize one disclosure.
pub fn authorization_message(requester_did: &str, leaf: &Digest32, nonce: u64) -> Vec<u8> {
    let mut m = Vec::with_capacity(requester_did.len() + 40);
    m.extend_from_slice(requester_did.as_bytes());
    m.extend_from_slice(leaf.as_bytes());
    m.extend_from_slice(&nonce.to_be_bytes());
    m
}

fn root_slot(holder: &[u8]) -> Word {
    slot(b"sd.root", &[holder])
}

fn nonce_slot(holder: &[u8], nonce: u64) -> Word {
    slot(b"sd.nonce", &[holder, &nonce.to_be_bytes()])
}

pub fn commit_root_call(holder_did: &str, root: &Digest32) -> Call {
    Call::new(SD, "commit_root", WordWriter::new().dynamic(holder_did.as_bytes()).word(&root.0).finish())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisclosureRequest {
    pub requester_did: String,
    pub holder_did: String,
    pub leaf: Digest32,
    pub proof: MerkleProof,
    pub nonce: u64,
    pub signature: Vec<u8>,
}

pub fn verify_attribute_call(req: &DisclosureRequest) -> Call {
    let siblings: Vec<u8> = req.proof.siblings.iter().flat_map(|d| d.0).collect();
    let args = WordWriter::new()
        .dynamic(req.requester_did.as_bytes())
        .dynamic(req.holder_did.as_bytes())
        .word(&req.leaf.0)
        .u64(req.proof.leaf_index as u64)
        .u64(req.proof.tree_size as u64)
        .dynamic(&siblings)
        .u64(req.nonce)
        .dynamic(&req.signature)
        .finish();
    Call::new(SD, "verify_attribute", args)
}

/// Unmetered read of a holder's committed root.
pub fn attribute_root(ledger: &Ledger, holder_did: &str) -> Option<Digest32> {
    ledger.read_slot(SD, &root_slot(holder_did.as_bytes())).map(Digest32)
}

fn read_did(r: &mut WordReader<'_>) -> Result<Vec<u8>, Revert> {
    let did = r.dynamic()?;
    if did.is_empty() || did.len() > MAX_DID_LEN {
        return Err(Revert::new("invalid did"));
    }
    Ok(did)
}

fn read_proof(r: &mut WordReader<'_>) -> Result<MerkleProof, Revert> {
    let malformed = || Revert::new("malformed proof");
    let leaf_index = usize::try_from(r.u64()?).map_err(|_| malformed())?;
    let tree_size = usize::try_from(r.u64()?).map_err(|_| malformed())?;
    let raw = r.dynamic()?;
    if raw.len() % 32 != 0 || raw.len() / 32 > MAX_PROOF_LEN {
        return Err(malformed());
    }
    let siblings = raw.chunks_exact(32).map(|c| Digest32(c.try_into().expect("32-byte chunk"))).collect();
    Ok(MerkleProof { leaf_index, siblings, tree_size })
}

impl SelectiveDisclosure {
    /// True when `caller` controls `did` and `did` authenticated no more
    /// than `auth_window` seconds ago.
    fn fresh_controller(&self, ctx: &mut CallContext<'_>, did: &[u8], caller: &AccountId) -> bool {
        let Some((controller, _)) = ctx.sload_from(DID, &entry_slot(did)).and_then(|w| unpack_entry(&w)) else {
            return false;
        };
        if &controller != caller {
            return false;
        }
        match ctx.sload_from(DID, &auth_slot(did)) {
            Some(w) => ctx.clock().saturating_sub(unpack_auth(&w).0) <= self.auth_window,
            None => false,
        }
    }
}

impl Contract for SelectiveDisclosure {
    fn name(&self) -> &'static str {
        SD
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        let mut r = WordReader::new(args);
        let caller = ctx.caller().clone();
        match op {
            "commit_root" => {
                let holder = read_did(&mut r)?;
                let root = r.word()?;
                r.finish()?;
                if !self.fresh_controller(ctx, &holder, &caller) {
                    return Err(Revert::new("auth required"));
                }
                ctx.sstore(root_slot(&holder), root);
                ctx.emit("RootCommitted", WordWriter::new().dynamic(&holder).word(&root).finish());
                Ok(Vec::new())
            }
            "verify_attribute" => {
                let requester = read_did(&mut r)?;
                let holder = read_did(&mut r)?;
                let leaf = Digest32(r.word()?);
                let proof = read_proof(&mut r)?;
                let nonce = r.u64()?;
                let signature = r.dynamic()?;
                r.finish()?;

                if !self.fresh_controller(ctx, &requester, &caller) {
                    return Err(Revert::new("identity gate"));
                }

                let (_, keys) = ctx
                    .sload_from(DID, &entry_slot(&holder))
                    .and_then(|w| unpack_entry(&w))
                    .ok_or_else(|| Revert::new("unknown did"))?;
                let index = keys.checked_sub(1).ok_or_else(|| Revert::new("corrupt did"))?;
                let holder_key =
                    ctx.load_blob_from(DID, &key_slot(&holder, index)).ok_or_else(|| Revert::new("corrupt did"))?;

                let mut message = requester.clone();
                message.extend_from_slice(leaf.as_bytes());
                message.extend_from_slice(&nonce.to_be_bytes());
                let bundle = SignatureBundle { public_key: holder_key, message, signature };
                let signed = ctx.verify_signature(&bundle);
                let nonce_key = nonce_slot(&holder, nonce);
                let fresh_nonce = ctx.sload(&nonce_key).is_none();
                let authorized = signed && fresh_nonce;
                if authorized {
                    ctx.sstore(nonce_key, crate::codec::word_u64(1));
                }

                ctx.charge(ctx.schedule().hash_op * proof.siblings.len() as u64);
                let included = match ctx.sload(&root_slot(&holder)) {
                    Some(root) => merkle_verify(&Digest32(root), &leaf, &proof),
                    None => false,
                };

                let result = authorized && included;
                let out = WordWriter::new().bool(result).finish();
                ctx.emit(
                    "AttributeChecked",
                    WordWriter::new().dynamic(&requester).dynamic(&holder).word(&leaf.0).bool(result).finish(),
                );
                Ok(out)
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::did::{auth_bucket, auth_message, authenticate_call, register_call};
    use crate::contracts::install_all;
    use crate::contracts::roles::grant_call;
    use crate::crypto::{merkle_prove, merkle_root, SigningKeypair};
    use crate::ledger::{GasSchedule, Role, TxReceipt};

    const HOLDER: &str = "did:grid:holder";
    const REQUESTER: &str = "did:grid:req";

    struct World {
        l: Ledger,
        holder: AccountId,
        requester: AccountId,
        holder_key: SigningKeypair,
        requester_key: SigningKeypair,
        leaves: Vec<Digest32>,
    }

    fn auth(l: &mut Ledger, who: &AccountId, did: &str, key: &SigningKeypair) -> TxReceipt {
        let sig = key.sign(&auth_message(did, auth_bucket(l.clock())));
        l.execute_tx(who, &authenticate_call(did, &sig))
    }

    fn world() -> World {
        let gov = AccountId::new("gov").unwrap();
        let holder = AccountId::new("holder").unwrap();
        let requester = AccountId::new("requester").unwrap();
        let mut l = Ledger::new(GasSchedule::default(), &gov);
        install_all(&mut l, 300);
        for a in [&holder, &requester] {
            assert!(l.execute_tx(&gov, &grant_call(a, Role::Prosumer)).is_success());
        }
        let holder_key = SigningKeypair::from_seed([4; 32]);
        let requester_key = SigningKeypair::from_seed([5; 32]);
        assert!(l.execute_tx(&holder, &register_call(HOLDER, &holder_key.public_key())).is_success());
        assert!(l.execute_tx(&requester, &register_call(REQUESTER, &requester_key.public_key())).is_success());

        let leaves: Vec<Digest32> = [("region", "EAST"), ("capacity_kw", "12"), ("licensed", "yes")]
            .iter()
            .enumerate()
            .map(|(i, (k, v))| attribute_leaf(k.as_bytes(), v.as_bytes(), &[i as u8; SALT_LEN]))
            .collect();
        l.advance_to(60);
        let root = merkle_root(&leaves).unwrap();
        let early = l.execute_tx(&holder, &commit_root_call(HOLDER, &root));
        assert_eq!(early.revert_reason.as_deref(), Some("auth required"));
        assert!(auth(&mut l, &holder, HOLDER, &holder_key).is_success());
        assert!(l.execute_tx(&holder, &commit_root_call(HOLDER, &root)).is_success());
        assert_eq!(attribute_root(&l, HOLDER), Some(root));
        World { l, holder, requester, holder_key, requester_key, leaves }
    }

    fn request(w: &World, index: usize, nonce: u64) -> DisclosureRequest {
        let leaf = w.leaves[index];
        DisclosureRequest {
            requester_did: REQUESTER.into(),
            holder_did: HOLDER.into(),
            leaf,
            proof: merkle_prove(&w.leaves, index).unwrap(),
            nonce,
            signature: w.holder_key.sign(&authorization_message(REQUESTER, &leaf, nonce)),
        }
    }

    #[test]
    fn gate_one_blocks_before_attribute_logic() {
        let mut w = world();
        let req = request(&w, 1, 7);
        let blocked = w.l.execute_tx(&w.requester, &verify_attribute_call(&req));
        assert_eq!(blocked.revert_reason.as_deref(), Some("identity gate"));
        assert!(blocked.events.is_empty());

        let rk = w.requester_key.clone();
        assert!(auth(&mut w.l, &w.requester, REQUESTER, &rk).is_success());
        // Controller mismatch is also a gate-1 failure.
        let imposter = w.l.execute_tx(&w.holder, &verify_attribute_call(&req));
        assert_eq!(imposter.revert_reason.as_deref(), Some("identity gate"));

        let ok = w.l.execute_tx(&w.requester, &verify_attribute_call(&req));
        assert_eq!(ok.output_bool(), Some(true));
        assert!(blocked.gas_used < ok.gas_used);

        w.l.advance_clock(301);
        let stale = w.l.execute_tx(&w.requester, &verify_attribute_call(&request(&w, 1, 8)));
        assert_eq!(stale.revert_reason.as_deref(), Some("identity gate"));
    }

    #[test]
    fn gate_two_outcomes() {
        let mut w = world();
        let rk = w.requester_key.clone();
        assert!(auth(&mut w.l, &w.requester, REQUESTER, &rk).is_success());

        let good = request(&w, 2, 1);
        assert_eq!(w.l.execute_tx(&w.requester, &verify_attribute_call(&good)).output_bool(), Some(true));
        // Nonces are single use.
        assert_eq!(w.l.execute_tx(&w.requester, &verify_attribute_call(&good)).output_bool(), Some(false));

        let mut wrong_signer = request(&w, 0, 2);
        wrong_signer.signature = rk.sign(&authorization_message(REQUESTER, &wrong_signer.leaf, 2));
        assert_eq!(w.l.execute_tx(&w.requester, &verify_attribute_call(&wrong_signer)).output_bool(), Some(false));

        let mut flipped = request(&w, 0, 3);
        flipped.leaf.0[0] ^= 1;
        flipped.signature = w.holder_key.sign(&authorization_message(REQUESTER, &flipped.leaf, 3));
        assert_eq!(w.l.execute_tx(&w.requester, &verify_attribute_call(&flipped)).output_bool(), Some(false));

        // A recommitted root makes old proofs stale.
        let hk = w.holder_key.clone();
        w.l.advance_clock(60);
        assert!(auth(&mut w.l, &w.holder, HOLDER, &hk).is_success());
        let new_root = merkle_root(&w.leaves[..2]).unwrap();
        assert!(w.l.execute_tx(&w.holder, &commit_root_call(HOLDER, &new_root)).is_success());
        let old = request(&w, 2, 4);
        assert_eq!(w.l.execute_tx(&w.requester, &verify_attribute_call(&old)).output_bool(), Some(false));
    }
}
