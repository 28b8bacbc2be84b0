use std::collections::BTreeMap;

use crate::codec::Word;
use crate::contracts::carbon::{lineage, register_call, retire_call, transfer_call, Lineage};
use crate::contracts::{install_all, roles::grant_call};
use crate::ledger::{AccountId, Call, Ledger, Role};
use crate::workload::{carbon_authority, gen_carbon_script, CarbonDryRun, CarbonOpKind, CarbonScriptOp, Validity};

use super::result::{csv_field, ExpResult, Table};
use super::schemes::GOVERNANCE;
use super::{ExpError, RunConfig};

fn op_call(op: &CarbonScriptOp) -> Call {
    match &op.kind {
        CarbonOpKind::Register { asset_type, issuance_year, owner } => {
            register_call(&op.asset_id, asset_type, op.amount, *issuance_year, owner)
        }
        CarbonOpKind::Transfer { to } => transfer_call(&op.asset_id, to, op.amount),
        CarbonOpKind::Retire => retire_call(&op.asset_id, op.amount),
    }
}

fn op_name(kind: &CarbonOpKind) -> &'static str {
    match kind {
        CarbonOpKind::Register { .. } => "register",
        CarbonOpKind::Transfer { .. } => "transfer",
        CarbonOpKind::Retire => "retire",
    }
}

/// Replays the generated carbon script against a fresh registry. Invalid
/// operations must revert without touching state, and lineages must stay
/// conserved after every step.
pub fn run_exp3(config: &RunConfig) -> Result<ExpResult, ExpError> {
    let mut res = ExpResult::new("exp3");
    let script = gen_carbon_script(config.seed());
    let gov = AccountId::new(GOVERNANCE).expect("valid id");
    let authority = carbon_authority();
    let mut ledger = Ledger::new(config.schedule.clone(), &gov);
    install_all(&mut ledger, config.auth_window);
    let granted = ledger.execute_tx(&gov, &grant_call(&authority, Role::Authority)).is_success();

    let mut model = CarbonDryRun::default();
    let mut ops = Table::series("ops", "step,op,validity,actor,amount,status,revert_reason,gas_used,state_changed");
    let mut lineage_rows = Table::series("lineage", "step,asset_id,total,available,retired");
    let mut retired_so_far: BTreeMap<Word, u64> = BTreeMap::new();
    let (mut valid_ops, mut valid_accepted) = (0usize, 0usize);
    let (mut invalid_ops, mut invalid_rejected, mut invalid_untouched) = (0usize, 0usize, 0usize);
    let mut per_category: BTreeMap<Validity, (usize, usize)> = BTreeMap::new();
    let (mut conserved, mut monotone, mut model_agrees) = (true, true, true);

    for (step, op) in script.iter().enumerate() {
        let before = ledger.state_digest();
        let receipt = ledger.execute_tx(&op.actor, &op_call(op));
        let changed = ledger.state_digest() != before;
        model_agrees &= model.apply(op, &authority) == receipt.is_success();
        if op.validity == Validity::Valid {
            valid_ops += 1;
            valid_accepted += usize::from(receipt.is_success());
        } else {
            invalid_ops += 1;
            let rejected = !receipt.is_success();
            invalid_rejected += usize::from(rejected);
            invalid_untouched += usize::from(rejected && !changed);
            let c = per_category.entry(op.validity).or_default();
            c.0 += 1;
            c.1 += usize::from(rejected);
        }
        ops.push(format!(
            "{step},{},{},{},{},{},{},{},{}",
            op_name(&op.kind),
            op.validity.as_str(),
            op.actor,
            op.amount,
            receipt.status.as_str(),
            csv_field(receipt.revert_reason.as_deref().unwrap_or("")),
            receipt.gas_used,
            changed
        ));

        for id in model.assets.keys() {
            let Some(l) = lineage(&ledger, id) else {
                conserved = false;
                continue;
            };
            conserved &= l.is_conserved();
            let prev = retired_so_far.insert(*id, l.retired()).unwrap_or(0);
            monotone &= l.retired() >= prev;
            model_agrees &= lineage_matches(&l, &model);
            lineage_rows.push(format!(
                "{step},{},{},{},{}",
                crate::crypto::Digest32(*id).to_hex(),
                l.total,
                l.available(),
                l.retired()
            ));
        }
    }
    res.tables.push(ops);
    res.tables.push(lineage_rows);

    let total_retired: u64 = retired_so_far.values().sum();
    let w = &config.workload;
    res.metric("script_ops", script.len(), "ops");
    res.metric("valid_ops", valid_ops, "ops");
    res.metric("valid_accepted", valid_accepted, "ops");
    res.metric("invalid_ops", invalid_ops, "ops");
    res.metric("invalid_rejected", invalid_rejected, "ops");
    for (v, (n, rejected)) in &per_category {
        res.metric(&format!("rejected_{}", v.as_str()), format!("{rejected}/{n}"), "ops");
    }
    res.metric("lineages", model.assets.len(), "assets");
    res.metric("total_retired", total_retired, "tCO2e");
    res.metric(
        "retired_value_range",
        format!("{:.0}..{:.0}", total_retired as f64 * w.carbon_price_min, total_retired as f64 * w.carbon_price_max),
        "currency",
    );
    res.metric("final_state_digest", ledger.state_digest(), "");

    res.gate("authority_granted", granted, "registry holds the authority role");
    res.gate("valid_ops_accepted", valid_accepted == valid_ops, format!("{valid_accepted}/{valid_ops}"));
    res.gate("violations_rejected", invalid_rejected == invalid_ops, format!("{invalid_rejected}/{invalid_ops}"));
    res.gate(
        "rejections_leave_state_unchanged",
        invalid_untouched == invalid_ops,
        format!("{invalid_untouched}/{invalid_ops}"),
    );
    res.gate("lineages_conserved", conserved, "available + retired <= total after every step");
    res.gate("retirement_monotone", monotone, "per-lineage retired never decreases");
    res.gate("matches_reference_model", model_agrees, "ledger agrees with the off-ledger balance model");
    Ok(res)
}

fn lineage_matches(l: &Lineage, model: &CarbonDryRun) -> bool {
    let Some((total, owners)) = model.assets.get(&l.asset_id) else { return false };
    *total == l.total
        && owners.len() == l.entries.len()
        && l.entries.iter().all(|e| owners.get(&e.owner) == Some(&(e.available, e.retired)))
}
