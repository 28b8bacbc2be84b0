//! AccumulatorVerifier: stores the current RSA accumulator value and checks
//! membership with a single fixed-price modular exponentiation.
//!
//! Residues travel and rest at the modulus width, so the gas of
//! `verify_membership` depends only on the modulus, never on how many members
//! the accumulator commits to.

use num_bigint::BigUint;

use crate::codec::{word_u64, Word, WordReader, WordWriter};
use crate::crypto::{acc_verify, to_fixed_width, AccumulatorParams};
use crate::ledger::{slot, Call, CallContext, CallResult, Contract, Ledger, Revert, Role};

use super::{require_role, ACCVER};

/// On-chain accumulator configuration as last set by governance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredAccumulator {
    pub params: AccumulatorParams,
    pub value: BigUint,
    pub epoch: u64,
}

pub struct AccumulatorVerifier;

fn modulus_key() -> Word {
    slot(b"acc.modulus", &[])
}

fn generator_key() -> Word {
    slot(b"acc.generator", &[])
}

fn value_key() -> Word {
    slot(b"acc.value", &[])
}

fn epoch_key() -> Word {
    slot(b"acc.epoch", &[])
}

/// Encodes `(N, g, A)`; `g` and `A` are left-padded to the modulus width.
/// Returns `None` when a residue is wider than the modulus.
pub fn set_state_call(params: &AccumulatorParams, value: &BigUint) -> Option<Call> {
    let width = params.width();
    let args = WordWriter::new()
        .dynamic(&params.modulus.to_bytes_be())
        .dynamic(&to_fixed_width(&params.generator, width)?)
        .dynamic(&to_fixed_width(value, width)?)
        .finish();
    Some(Call::new(ACCVER, "set_state", args))
}

/// Encodes a membership check with the witness at `width` bytes and the
/// element prime in one word.
pub fn verify_membership_call(width: usize, witness: &BigUint, prime: &BigUint) -> Option<Call> {
    let r: Word = to_fixed_width(prime, 32)?.try_into().ok()?;
    let args = WordWriter::new().dynamic(&to_fixed_width(witness, width)?).word(&r).finish();
    Some(Call::new(ACCVER, "verify_membership", args))
}

/// Unmetered read of the stored accumulator.
pub fn stored_accumulator(ledger: &Ledger) -> Option<StoredAccumulator> {
    let modulus = BigUint::from_bytes_be(&ledger.read_blob(ACCVER, &modulus_key())?);
    let generator = BigUint::from_bytes_be(&ledger.read_blob(ACCVER, &generator_key())?);
    let value = BigUint::from_bytes_be(&ledger.read_blob(ACCVER, &value_key())?);
    let epoch = crate::codec::u64_from_word(&ledger.read_slot(ACCVER, &epoch_key())?).ok()?;
    let params = AccumulatorParams { modulus, generator };
    Some(StoredAccumulator { params, value, epoch })
}

impl Contract for AccumulatorVerifier {
    fn name(&self) -> &'static str {
        ACCVER
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        match op {
            "set_state" => {
                let mut r = WordReader::new(args);
                let n_bytes = r.dynamic()?;
                let g_bytes = r.dynamic()?;
                let a_bytes = r.dynamic()?;
                r.finish()?;
                require_role(ctx, Role::Governance)?;
                let invalid = || Revert::new("invalid accumulator");
                if n_bytes.first().is_none_or(|b| *b == 0) {
                    return Err(invalid());
                }
                let width = n_bytes.len();
                if g_bytes.len() != width || a_bytes.len() != width {
                    return Err(invalid());
                }
                let modulus = BigUint::from_bytes_be(&n_bytes);
                let params =
                    AccumulatorParams::new(modulus.clone(), BigUint::from_bytes_be(&g_bytes)).map_err(|_| invalid())?;
                let value = BigUint::from_bytes_be(&a_bytes);
                if value < BigUint::from(1u8) || value >= params.modulus {
                    return Err(invalid());
                }
                let epoch = match ctx.sload(&epoch_key()) {
                    Some(w) => crate::codec::u64_from_word(&w)? + 1,
                    None => 1,
                };
                ctx.store_blob(modulus_key(), &n_bytes);
                ctx.store_blob(generator_key(), &g_bytes);
                ctx.store_blob(value_key(), &a_bytes);
                ctx.sstore(epoch_key(), word_u64(epoch));
                ctx.emit("AccumulatorSet", WordWriter::new().u64(epoch).dynamic(&a_bytes).finish());
                Ok(Vec::new())
            }
            "verify_membership" => {
                let mut r = WordReader::new(args);
                let w_bytes = r.dynamic()?;
                let prime = r.word()?;
                r.finish()?;
                let n_bytes = ctx.load_blob(&modulus_key()).ok_or_else(|| Revert::new("no accumulator"))?;
                let a_bytes = ctx.load_blob(&value_key()).ok_or_else(|| Revert::new("no accumulator"))?;
                if w_bytes.len() != n_bytes.len() {
                    return Err(Revert::new("invalid witness"));
                }
                let modulus = BigUint::from_bytes_be(&n_bytes);
                let value = BigUint::from_bytes_be(&a_bytes);
                let witness = BigUint::from_bytes_be(&w_bytes);
                let prime = BigUint::from_bytes_be(&prime);
                // Priced as one precompile call whether or not the residue
                // range checks pass, so the verdict does not show in gas.
                ctx.charge(ctx.schedule().modexp_fixed);
                let member = acc_verify(&value, &witness, &prime, &modulus);
                let out = WordWriter::new().bool(member).finish();
                ctx.emit("MembershipChecked", out.clone());
                Ok(out)
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}
