use rand::Rng;

use crate::codec::Word;
use crate::contracts::verifier::{commit_call, CommitmentKind};
use crate::crypto::keccak256_concat;
use crate::offchain::{build_digest, log_text, parse_log, replay_audit, tamper, Anchor, Field, Manifest, Verdict};
use crate::workload::{gen_energy_stream, stream, Purpose};

use super::result::{csv_field, provenance_header, ExpResult, Table};
use super::schemes::scheme_ledger;
use super::{ExpError, RunConfig};

fn commitment_id(index: usize) -> Word {
    keccak256_concat(&[b"exp1", &(index as u64).to_be_bytes()]).0
}

/// Commits one digest per record and replays the serialized store against
/// those commitments. Tampered copies are then audited field by field.
pub fn run_exp1(config: &RunConfig) -> Result<ExpResult, ExpError> {
    let mut res = ExpResult::new("exp1");
    let stream_records = gen_energy_stream(&config.workload);
    if stream_records.len() < config.exp1_records {
        return Err(ExpError::Workload(format!(
            "workload produced {} records, exp1 needs {}",
            stream_records.len(),
            config.exp1_records
        )));
    }
    let records: Vec<_> = stream_records[..config.exp1_records].iter().map(|(_, r)| r.clone()).collect();

    let (mut ledger, operator) = scheme_ledger(&config.schedule);
    let mut anchors = Vec::with_capacity(records.len());
    let mut commits_ok = true;
    for (i, r) in records.iter().enumerate() {
        ledger.advance_to(r.timestamp);
        let id = commitment_id(i);
        let receipt =
            ledger.execute_tx(&operator, &commit_call(&id, CommitmentKind::SingleDigest, &build_digest(r)?, 1));
        commits_ok &= receipt.is_success();
        anchors.push(Anchor::Single(id));
    }

    let manifest = Manifest { seed: config.seed(), config_digest: config.digest(), count: records.len(), anchors };
    let log = provenance_header(config) + &log_text(&records)?;
    let manifest_text = manifest.to_text();
    let replayed = parse_log(&log)?;
    let replayed_manifest = Manifest::parse(&manifest_text)?;
    let report = replay_audit(&ledger, &replayed, &replayed_manifest.anchors)?;
    res.attachments.push(("records.log".into(), log));
    res.attachments.push(("records.manifest".into(), manifest_text));
    let mut audit = Table::file("audit.csv", crate::offchain::AUDIT_CSV_HEADER);
    audit.rows = report.to_csv().lines().skip(1).map(str::to_string).collect();
    res.tables.push(audit);

    let mut rng = stream(config.seed(), Purpose::Tamper);
    let mut trials = Table::series("trials", "trial,field,record_index,verdict,stored,computed,reason");
    let mut detected = 0usize;
    let mut per_field = Vec::new();
    let mut trial = 0usize;
    for field in Field::ALL {
        let mut field_detected = 0usize;
        for _ in 0..config.tamper_trials {
            let index = rng.gen_range(0..records.len());
            let forged = tamper(&records[index], field, &mut rng);
            let r = replay_audit(&ledger, std::slice::from_ref(&forged), &manifest.anchors[index..=index])?;
            let e = &r.entries[0];
            if e.verdict == Verdict::Mismatch {
                field_detected += 1;
            }
            trials.push(format!(
                "{trial},{field},{index},{},{},{},{}",
                e.verdict.as_str(),
                e.stored.map(|d| d.to_hex()).unwrap_or_default(),
                e.computed.map(|d| d.to_hex()).unwrap_or_default(),
                csv_field(e.reason.as_deref().unwrap_or(""))
            ));
            trial += 1;
        }
        detected += field_detected;
        per_field.push((field, field_detected));
    }
    res.tables.push(trials);

    let total_trials = Field::ALL.len() * config.tamper_trials;
    res.metric("records_committed", records.len(), "records");
    res.metric("replay_matched", report.matched, "records");
    res.metric("replay_total", report.total, "records");
    res.metric("tamper_trials", total_trials, "trials");
    res.metric("tamper_detected", detected, "trials");
    res.metric("false_negatives", total_trials - detected, "trials");
    for (field, n) in &per_field {
        res.metric(&format!("detected_{field}"), format!("{n}/{}", config.tamper_trials), "trials");
    }
    res.metric("final_state_digest", ledger.state_digest(), "");
    res.attachments.push(("receipts.log".into(), provenance_header(config) + &ledger.receipt_log()));

    res.gate("commits_succeeded", commits_ok, format!("{} commitments", records.len()));
    res.gate(
        "replay_reproducibility",
        report.matched == records.len() && report.total == records.len(),
        format!("{}/{}", report.matched, records.len()),
    );
    res.gate("tamper_detection", detected == total_trials, format!("{detected}/{total_trials}"));
    Ok(res)
}
