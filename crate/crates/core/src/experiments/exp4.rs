use rand::{Rng, RngCore};

use crate::contracts::accver::{set_state_call, verify_membership_call};
use crate::contracts::{install_all, roles::grant_call};
use crate::crypto::{hash_to_prime, AccumulatorParams, AccumulatorState};
use crate::ledger::{AccountId, Ledger, Role};
use crate::offchain::maintain_witnesses;
use crate::workload::{stream, Purpose};

use super::result::{ExpResult, Table};
use super::schemes::GOVERNANCE;
use super::{ExpError, RunConfig};

struct SizeStats {
    size: usize,
    min: u64,
    max: u64,
    mean: f64,
    all_members: bool,
}

impl SizeStats {
    /// Peak-to-peak spread relative to the mean, in percent.
    fn variance_pct(&self) -> f64 {
        if self.mean == 0.0 {
            return 0.0;
        }
        (self.max - self.min) as f64 / self.mean * 100.0
    }
}

/// Accumulates growing member sets under a 2048-bit modulus and measures the
/// gas of on-chain membership checks at every size.
pub fn run_exp4(config: &RunConfig) -> Result<ExpResult, ExpError> {
    let mut res = ExpResult::new("exp4");
    let params = AccumulatorParams::rsa2048();
    let width = params.width();
    let gov = AccountId::new(GOVERNANCE).expect("valid id");
    let checker = AccountId::new("auditor").expect("valid id");
    let mut ledger = Ledger::new(config.schedule.clone(), &gov);
    install_all(&mut ledger, config.auth_window);
    let granted = ledger.execute_tx(&gov, &grant_call(&checker, Role::Auditor)).is_success();

    let mut rng = stream(config.seed(), Purpose::Accumulator);
    let mut series = Table::series("gas", "size,rep,member_index,verified,gas_used");
    let mut stats = Vec::new();
    let mut set_ok = true;
    let mut all_gas = Vec::new();

    for &size in &config.exp4_sizes {
        let mut state = AccumulatorState::new(params.clone());
        while state.members().len() < size {
            let mut element = [0u8; 32];
            rng.fill_bytes(&mut element);
            let prime = hash_to_prime(&element);
            if !state.contains(&prime) {
                state = state.add(&prime)?;
            }
        }
        set_ok &= ledger.execute_tx(&gov, &set_state_call(&params, state.value()).expect("residue fits")).is_success();
        let witnesses: Vec<_> = maintain_witnesses(&state).into_values().collect();
        let mut gas = Vec::with_capacity(config.exp4_reps);
        let mut all_members = true;
        for rep in 0..config.exp4_reps {
            let index = rng.gen_range(0..witnesses.len());
            let w = &witnesses[index];
            let call = verify_membership_call(width, &w.value, &w.element_prime).expect("witness fits");
            let receipt = ledger.execute_tx(&checker, &call);
            let verified = receipt.output_bool() == Some(true);
            all_members &= verified;
            series.push(format!("{size},{rep},{index},{verified},{}", receipt.gas_used));
            gas.push(receipt.gas_used);
        }
        all_gas.extend_from_slice(&gas);
        let mean = if gas.is_empty() { 0.0 } else { gas.iter().sum::<u64>() as f64 / gas.len() as f64 };
        stats.push(SizeStats {
            size,
            min: gas.iter().copied().min().unwrap_or(0),
            max: gas.iter().copied().max().unwrap_or(0),
            mean,
            all_members,
        });
    }
    res.tables.push(series);

    // Stale and revoked witnesses: remove one member from the largest set and
    // probe with witnesses computed before the removal.
    let (stale_rejected, stale_gas, revoked_rejected) = stale_probe(&mut ledger, &gov, &checker, &params, &mut rng)?;

    let mut by_size = Table::series("gas_by_size", "size,min_gas,max_gas,mean_gas,variance_pct");
    for s in &stats {
        by_size.push(format!("{},{},{},{:.2},{:.4}", s.size, s.min, s.max, s.mean, s.variance_pct()));
    }
    res.tables.push(by_size);

    let global_min = all_gas.iter().copied().min().unwrap_or(0);
    let global_max = all_gas.iter().copied().max().unwrap_or(0);
    let max_variance = stats.iter().map(SizeStats::variance_pct).fold(0.0, f64::max);
    let cross_size = if global_min == 0 { 0.0 } else { (global_max - global_min) as f64 / global_min as f64 * 100.0 };
    res.metric("modulus_bits", params.modulus.bits(), "bits");
    res.metric("sizes", config.exp4_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("/"), "members");
    res.metric("reps_per_size", config.exp4_reps, "calls");
    res.metric("verify_gas", global_max, "gas");
    res.metric("max_variance_pct", format!("{max_variance:.4}"), "%");
    res.metric("cross_size_spread_pct", format!("{cross_size:.4}"), "%");
    res.metric("stale_witness_rejected", stale_rejected, "");
    res.metric("revoked_witness_rejected", revoked_rejected, "");
    res.metric("final_state_digest", ledger.state_digest(), "");

    res.gate("setup_succeeded", granted && set_ok, "auditor granted and every set_state accepted");
    res.gate("members_verified", stats.iter().all(|s| s.all_members), format!("{} checks", all_gas.len()));
    res.gate(
        "gas_constant_across_sizes",
        global_min == global_max && !all_gas.is_empty(),
        format!("min {global_min} max {global_max}"),
    );
    res.gate("variance_below_one_percent", max_variance < 1.0, format!("{max_variance:.4}%"));
    res.gate(
        "stale_witnesses_rejected",
        stale_rejected && revoked_rejected && stale_gas == global_max,
        format!("stale probe gas {stale_gas}"),
    );
    Ok(res)
}

fn stale_probe(
    ledger: &mut Ledger,
    gov: &AccountId,
    checker: &AccountId,
    params: &AccumulatorParams,
    rng: &mut impl RngCore,
) -> Result<(bool, u64, bool), ExpError> {
    let mut state = AccumulatorState::new(params.clone());
    for _ in 0..3 {
        let mut element = [0u8; 32];
        rng.fill_bytes(&mut element);
        state = state.add(&hash_to_prime(&element))?;
    }
    let before = maintain_witnesses(&state);
    let members: Vec<_> = state.members().iter().cloned().collect();
    let after = state.remove(&members[0])?;
    ledger.execute_tx(gov, &set_state_call(params, after.value()).expect("residue fits"));
    let width = params.width();
    let check = |ledger: &mut Ledger, r| {
        let w = &before[r];
        ledger.execute_tx(checker, &verify_membership_call(width, &w.value, &w.element_prime).expect("witness fits"))
    };
    let stale = check(ledger, &members[1]);
    let revoked = check(ledger, &members[0]);
    Ok((stale.output_bool() == Some(false), stale.gas_used, revoked.output_bool() == Some(false)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sizes_have_identical_gas() {
        let c = RunConfig { exp4_sizes: vec![2, 6], exp4_reps: 3, ..RunConfig::default() };
        let r = run_exp4(&c).unwrap();
        assert!(r.passed(), "{:?}", r.gates);
        assert_eq!(r.metric_value("max_variance_pct"), Some("0.0000"));
        assert_eq!(r.table("series_gas.csv").unwrap().rows.len(), 6);
    }
}
