use crate::ledger::TxReceipt;
use crate::workload::{batch_windows, gen_energy_stream};

use super::result::{pct, ExpResult, Table};
use super::schemes::{scheme_ledger, settle_window, SchemeKind};
use super::{ExpError, RunConfig};

const SECONDS_PER_HOUR: u64 = 3_600;
/// Every n-th transaction is sampled into the penalty series.
const PENALTY_SAMPLE_EVERY: usize = 50;
pub const REPORTED_REDUCTION_PCT: f64 = 39.0;

#[derive(Debug, Clone, Copy)]
struct TxSample {
    clock: u64,
    gas_used: u64,
    unpenalized: u64,
    multiplier: f64,
}

impl From<&TxReceipt> for TxSample {
    fn from(r: &TxReceipt) -> Self {
        Self { clock: r.clock, gas_used: r.gas_used, unpenalized: r.unpenalized_gas, multiplier: r.penalty_multiplier }
    }
}

/// Total gas of settling `records` in fixed windows of `batch` on a fresh
/// ledger.
fn amortized_total(
    config: &RunConfig,
    kind: SchemeKind,
    records: &[crate::offchain::SettlementRecord],
    batch: usize,
) -> Result<(u64, bool), ExpError> {
    let (mut ledger, operator) = scheme_ledger(&config.schedule);
    let mut total = 0;
    let mut ok = true;
    for window in records.chunks(batch) {
        ledger.advance_to(window.last().expect("non-empty chunk").timestamp);
        for r in settle_window(&mut ledger, &operator, kind, window)? {
            total += r.gas_used;
            ok &= r.is_success();
        }
    }
    Ok((total, ok))
}

fn strictly_decreasing(xs: &[u64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// After the capacity threshold is crossed within a day, every further
/// transaction must carry a strictly larger multiplier and pay more than its
/// unpenalized gas. Returns (passed, penalized count, first penalized index).
fn penalty_check(samples: &[TxSample]) -> (bool, usize, Option<usize>) {
    let mut ok = true;
    let mut count = 0;
    let mut first = None;
    let mut prev: Option<(u64, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        let day = s.clock / 86_400;
        if s.multiplier > 1.0 {
            count += 1;
            first.get_or_insert(i);
            ok &= s.gas_used > s.unpenalized;
            if let Some((prev_day, prev_mult)) = prev {
                if prev_day == day {
                    ok &= s.multiplier > prev_mult;
                }
            }
            prev = Some((day, s.multiplier));
        } else {
            ok &= s.gas_used == s.unpenalized;
            prev = None;
        }
    }
    (ok && count > 0, count, first)
}

pub fn run_exp2(config: &RunConfig) -> Result<ExpResult, ExpError> {
    let mut res = ExpResult::new("exp2");
    let wl = &config.workload;
    let stream = gen_energy_stream(wl);
    let windows = batch_windows(&stream, wl);
    let records: Vec<_> = stream.iter().map(|(_, r)| r.clone()).collect();

    // Amortized gas against batch size on fresh ledgers.
    let mut amortized = Table::series("amortized", "batch_size,baseline_gas_per_record,proposed_gas_per_record");
    let sample = &records[..config.amortized_records.min(records.len())];
    let mut per_scheme: [Vec<u64>; 2] = [Vec::new(), Vec::new()];
    let mut amortized_ok = !sample.is_empty();
    for &b in &config.amortized_batch_sizes {
        let mut row = format!("{b}");
        for (i, kind) in SchemeKind::BOTH.into_iter().enumerate() {
            let (total, ok) = amortized_total(config, kind, sample, b)?;
            amortized_ok &= ok;
            per_scheme[i].push(total);
            row.push_str(&format!(",{:.2}", total as f64 / sample.len().max(1) as f64));
        }
        amortized.push(row);
    }
    res.tables.push(amortized);

    // Full day under both schemes, identical stream and windows.
    let hours = wl.hours;
    let mut hourly_gas = [vec![0u64; hours], vec![0u64; hours]];
    let mut hourly_tx = [vec![0u64; hours], vec![0u64; hours]];
    let mut hourly_mult = vec![0f64; hours];
    let mut hourly_records = vec![0usize; hours];
    let mut hourly_batches = vec![0usize; hours];
    let mut samples: [Vec<TxSample>; 2] = [Vec::new(), Vec::new()];
    let mut digests = Vec::new();
    let mut all_success = true;
    for (i, kind) in SchemeKind::BOTH.into_iter().enumerate() {
        let (mut ledger, operator) = scheme_ledger(&config.schedule);
        for w in &windows {
            let clock = stream[w.end - 1].0;
            ledger.advance_to(clock);
            let hour = (clock / SECONDS_PER_HOUR) as usize;
            if i == 0 {
                hourly_records[hour] += w.len();
                hourly_batches[hour] += 1;
            }
            for r in settle_window(&mut ledger, &operator, kind, &records[w.clone()])? {
                all_success &= r.is_success();
                hourly_gas[i][hour] += r.gas_used;
                hourly_tx[i][hour] += 1;
                if i == 0 {
                    hourly_mult[hour] += r.penalty_multiplier;
                }
                samples[i].push(TxSample::from(&r));
            }
        }
        digests.push(ledger.state_digest());
    }

    let mut hourly = Table::series("hourly", "hour,records,batches,baseline_gas,proposed_gas");
    let mut per_tx =
        Table::series("gas_per_tx", "hour,baseline_gas_per_tx,proposed_gas_per_tx,mean_penalty_multiplier");
    let mut hours_below = 0;
    let mut hours_with_records = 0;
    for h in 0..hours {
        hourly
            .push(format!("{h},{},{},{},{}", hourly_records[h], hourly_batches[h], hourly_gas[0][h], hourly_gas[1][h]));
        if hourly_records[h] > 0 {
            hours_with_records += 1;
            if hourly_gas[1][h] < hourly_gas[0][h] {
                hours_below += 1;
            }
        }
        let avg = |s: usize| match hourly_tx[s][h] {
            0 => "0.00".to_string(),
            n => format!("{:.2}", hourly_gas[s][h] as f64 / n as f64),
        };
        let mult = if hourly_tx[0][h] == 0 { 1.0 } else { hourly_mult[h] / hourly_tx[0][h] as f64 };
        per_tx.push(format!("{h},{},{},{:.6}", avg(0), avg(1), mult));
    }
    res.tables.push(hourly);
    res.tables.push(per_tx);

    let mut penalty = Table::series(
        "penalty",
        "tx_index,clock,penalty_multiplier,baseline_gas,baseline_unpenalized,proposed_gas,proposed_unpenalized",
    );
    for (i, (b, p)) in samples[0].iter().zip(&samples[1]).enumerate() {
        if i % PENALTY_SAMPLE_EVERY == 0 || i + 1 == samples[0].len() {
            penalty.push(format!(
                "{},{},{:.6},{},{},{},{}",
                i + 1,
                b.clock,
                b.multiplier,
                b.gas_used,
                b.unpenalized,
                p.gas_used,
                p.unpenalized
            ));
        }
    }
    res.tables.push(penalty);

    let total = |i: usize| hourly_gas[i].iter().sum::<u64>();
    let (baseline_total, proposed_total) = (total(0), total(1));
    let reduction = if baseline_total == 0 { 0.0 } else { 1.0 - proposed_total as f64 / baseline_total as f64 };
    let (pen_ok_b, penalized, first) = penalty_check(&samples[0]);
    let (pen_ok_p, _, _) = penalty_check(&samples[1]);
    let final_mult = samples[0].last().map_or(1.0, |s| s.multiplier);

    res.metric("records", records.len(), "records");
    res.metric("batches", windows.len(), "batches");
    res.metric("mean_batch_size", format!("{:.2}", records.len() as f64 / windows.len().max(1) as f64), "records");
    res.metric("transactions_per_scheme", samples[0].len(), "tx");
    res.metric("daily_capacity", config.schedule.daily_capacity, "tx");
    res.metric("penalized_transactions", penalized, "tx");
    res.metric("first_penalized_tx", first.map_or("none".to_string(), |i| (i + 1).to_string()), "tx index");
    res.metric("final_penalty_multiplier", format!("{final_mult:.6}"), "x");
    res.metric("baseline_total_gas", baseline_total, "gas");
    res.metric("proposed_total_gas", proposed_total, "gas");
    res.metric("cumulative_reduction", pct(reduction), "%");
    res.metric("reported_reduction", format!("{REPORTED_REDUCTION_PCT:.1}"), "%");
    res.metric("baseline_state_digest", digests[0], "");
    res.metric("proposed_state_digest", digests[1], "");

    res.gate("all_transactions_succeeded", all_success && amortized_ok, "every submission and confirmation");
    let dec_b = strictly_decreasing(&per_scheme[0]);
    let dec_p = strictly_decreasing(&per_scheme[1]);
    res.gate(
        "amortized_strictly_decreasing",
        dec_b && dec_p,
        format!("baseline={dec_b} proposed={dec_p} over sizes {:?}", config.amortized_batch_sizes),
    );
    let below = per_scheme[0].iter().zip(&per_scheme[1]).filter(|(b, p)| p < b).count();
    res.gate(
        "amortized_proposed_below_baseline",
        below == config.amortized_batch_sizes.len(),
        format!("{below}/{} batch sizes", config.amortized_batch_sizes.len()),
    );
    let every_hour = hours_with_records == hours;
    res.gate(
        "hourly_proposed_below_baseline",
        every_hour && hours_below == hours_with_records,
        format!("{hours_below}/{hours} hours ({hours_with_records} with records)"),
    );
    res.gate(
        "penalty_strictly_increasing",
        pen_ok_b && pen_ok_p,
        format!("{penalized} penalized tx after capacity {}", config.schedule.daily_capacity),
    );
    let (lo, hi) = config.reduction_band;
    let reduction_pct = reduction * 100.0;
    res.gate("reduction_in_band", (lo..=hi).contains(&reduction_pct), format!("{}% in [{lo}, {hi}]", pct(reduction)));
    Ok(res)
}
