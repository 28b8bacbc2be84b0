//! Role table. Governance grants participant roles.

use crate::codec::{word_u64, WordReader, WordWriter};
use crate::ledger::{role_slot, AccountId, Call, CallContext, CallResult, Contract, Revert, Role};

use super::{parse_account, require_role, ROLES};

pub struct Roles;

pub fn grant_call(account: &AccountId, role: Role) -> Call {
    Call::new(ROLES, "grant", WordWriter::new().short(account.as_bytes()).u64(role.tag() as u64).finish())
}

impl Contract for Roles {
    fn name(&self) -> &'static str {
        ROLES
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        match op {
            "grant" => {
                let mut r = WordReader::new(args);
                let account = parse_account(r.short(AccountId::MAX_LEN)?)?;
                let role = Role::from_tag(r.u64()?).ok_or_else(|| Revert::new("unknown role"))?;
                r.finish()?;
                require_role(ctx, Role::Governance)?;
                let key = role_slot(&account, role);
                if ctx.sload(&key).is_some() {
                    return Err(Revert::new("role exists"));
                }
                ctx.sstore(key, word_u64(1));
                ctx.emit("RoleGranted", WordWriter::new().short(account.as_bytes()).u64(role.tag() as u64).finish());
                Ok(Vec::new())
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}
