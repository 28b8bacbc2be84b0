use std::fmt;
use std::str::FromStr;

use crate::codec::Word;
use crate::contracts::verifier::{commitment, CommitmentKind};
use crate::crypto::{merkle_verify, Digest32, MerkleProof};
use crate::ledger::Ledger;

use super::{build_digest, OffchainError, SettlementRecord};

pub const AUDIT_CSV_HEADER: &str = "index,verdict,stored,computed,reason";

/// Where a record's commitment lives on-chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Anchor {
    Single(Word),
    Batched { batch_id: Word, proof: MerkleProof },
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Single(id) => write!(f, "single:{}", hex::encode(id)),
            Anchor::Batched { batch_id, proof } => {
                let siblings: Vec<String> = proof.siblings.iter().map(Digest32::to_hex).collect();
                write!(
                    f,
                    "batch:{}:{}:{}:{}",
                    hex::encode(batch_id),
                    proof.leaf_index,
                    proof.tree_size,
                    siblings.join(".")
                )
            }
        }
    }
}

fn parse_word(s: &str) -> Result<Word, OffchainError> {
    let bad = || OffchainError::Manifest(format!("bad 32-byte hex `{s}`"));
    hex::decode(s).map_err(|_| bad())?.try_into().map_err(|_| bad())
}

impl FromStr for Anchor {
    type Err = OffchainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OffchainError::Manifest(format!("bad anchor `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["single", id] => Ok(Anchor::Single(parse_word(id)?)),
            ["batch", id, index, size, siblings] => {
                let siblings = siblings
                    .split('.')
                    .filter(|x| !x.is_empty())
                    .map(|x| parse_word(x).map(Digest32))
                    .collect::<Result<_, _>>()?;
                Ok(Anchor::Batched {
                    batch_id: parse_word(id)?,
                    proof: MerkleProof {
                        leaf_index: index.parse().map_err(|_| bad())?,
                        siblings,
                        tree_size: size.parse().map_err(|_| bad())?,
                    },
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub index: usize,
    pub verdict: Verdict,
    /// The committed digest or batch root, when the anchor exists.
    pub stored: Option<Digest32>,
    pub computed: Option<Digest32>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub total: usize,
    pub matched: usize,
    /// One entry per record, ordered by index.
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn mismatched(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Mismatch)
    }

    pub fn mismatch_count(&self) -> usize {
        self.total - self.matched
    }

    pub fn to_csv(&self) -> String {
        let hex_or_empty = |d: &Option<Digest32>| d.as_ref().map(Digest32::to_hex).unwrap_or_default();
        let mut out = String::from(AUDIT_CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.index,
                e.verdict.as_str(),
                hex_or_empty(&e.stored),
                hex_or_empty(&e.computed),
                e.reason.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn check(ledger: &Ledger, index: usize, record: &SettlementRecord, anchor: &Anchor) -> AuditEntry {
    let computed = build_digest(record).ok();
    let mut entry = AuditEntry { index, verdict: Verdict::Mismatch, stored: None, computed, reason: None };
    let (id, expected_kind) = match anchor {
        Anchor::Single(id) => (id, CommitmentKind::SingleDigest),
        Anchor::Batched { batch_id, .. } => (batch_id, CommitmentKind::BatchRoot),
    };
    let Some(c) = commitment(ledger, id) else {
        entry.reason = Some("absent anchor".into());
        return entry;
    };
    entry.stored = Some(c.value);
    let Some(computed) = computed else {
        entry.reason = Some("unencodable record".into());
        return entry;
    };
    if c.kind != expected_kind {
        entry.reason = Some("kind mismatch".into());
        return entry;
    }
    let (expected_count, ok, failure) = match anchor {
        Anchor::Single(_) => (1, c.value == computed, "digest mismatch"),
        Anchor::Batched { proof, .. } => {
            (proof.tree_size as u64, merkle_verify(&c.value, &computed, proof), "proof mismatch")
        }
    };
    if c.declared_count != expected_count {
        entry.reason = Some("count mismatch".into());
    } else if !ok {
        entry.reason = Some(failure.into());
    } else {
        entry.verdict = Verdict::Match;
    }
    entry
}

/// Recomputes every record's digest and compares it against its on-chain
/// anchor, using nothing but public ledger state.
pub fn replay_audit(
    ledger: &Ledger,
    records: &[SettlementRecord],
    anchors: &[Anchor],
) -> Result<AuditReport, OffchainError> {
    if anchors.len() < records.len() {
        return Err(OffchainError::MissingAnchor(anchors.len()));
    }
    let entries: Vec<AuditEntry> =
        records.iter().zip(anchors).enumerate().map(|(i, (r, a))| check(ledger, i, r, a)).collect();
    let matched = entries.iter().filter(|e| e.verdict == Verdict::Match).count();
    Ok(AuditReport { total: entries.len(), matched, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::install_all;
    use crate::contracts::roles::grant_call;
    use crate::contracts::verifier::commit_call;
    use crate::ledger::{AccountId, GasSchedule, Role};
    use crate::offchain::{build_batch, TxType};

    fn record(i: u64) -> SettlementRecord {
        SettlementRecord {
            timestamp: 100 + i,
            participant_id: [i as u8; 16],
            tx_type: TxType::Buy,
            energy_kwh: 3,
            price_milli: 50 + i,
            region: "NORTH".into(),
        }
    }

    fn ledger() -> (Ledger, AccountId) {
        let gov = AccountId::new("gov").unwrap();
        let op = AccountId::new("operator").unwrap();
        let mut l = Ledger::new(GasSchedule::default(), &gov);
        install_all(&mut l, 300);
        assert!(l.execute_tx(&gov, &grant_call(&op, Role::Prosumer)).is_success());
        (l, op)
    }

    #[test]
    fn single_and_batched_audits() {
        let (mut l, op) = ledger();
        let records: Vec<_> = (0..5).map(record).collect();
        let mut anchors = Vec::new();
        for (i, r) in records.iter().take(2).enumerate() {
            let id = [i as u8 + 1; 32];
            let d = build_digest(r).unwrap();
            assert!(l.execute_tx(&op, &commit_call(&id, CommitmentKind::SingleDigest, &d, 1)).is_success());
            anchors.push(Anchor::Single(id));
        }
        let batch = build_batch(records[2..].to_vec()).unwrap();
        let c = commit_call(&batch.batch_id, CommitmentKind::BatchRoot, &batch.root, batch.len() as u64);
        assert!(l.execute_tx(&op, &c).is_success());
        for i in 0..batch.len() {
            anchors.push(Anchor::Batched { batch_id: batch.batch_id, proof: batch.proof(i).unwrap() });
        }

        let report = replay_audit(&l, &records, &anchors).unwrap();
        assert_eq!((report.total, report.matched), (5, 5));

        let mut tampered = records.clone();
        tampered[1].price_milli += 1;
        tampered[3].region = "SOUTH".into();
        let report = replay_audit(&l, &tampered, &anchors).unwrap();
        let reasons: Vec<_> = report.mismatched().map(|e| (e.index, e.reason.clone().unwrap())).collect();
        assert_eq!(reasons, vec![(1, "digest mismatch".into()), (3, "proof mismatch".into())]);
        assert!(report.to_csv().starts_with("index,verdict,stored,computed,reason\n0,match,"));

        let mut wrong = anchors.clone();
        wrong[0] = Anchor::Single([0xee; 32]);
        wrong[1] = Anchor::Batched { batch_id: [1; 32], proof: batch.proof(0).unwrap() };
        let report = replay_audit(&l, &records, &wrong).unwrap();
        assert_eq!(report.entries[0].reason.as_deref(), Some("absent anchor"));
        assert_eq!(report.entries[0].stored, None);
        assert_eq!(report.entries[1].reason.as_deref(), Some("kind mismatch"));

        assert!(matches!(replay_audit(&l, &records, &anchors[..3]), Err(OffchainError::MissingAnchor(3))));
    }

    #[test]
    fn anchor_text_round_trip() {
        let batch = build_batch((0..3).map(record).collect()).unwrap();
        let anchors =
            [Anchor::Single([0xab; 32]), Anchor::Batched { batch_id: batch.batch_id, proof: batch.proof(2).unwrap() }];
        for a in anchors {
            assert_eq!(a.to_string().parse::<Anchor>().unwrap(), a);
        }
        let lone = build_batch(vec![record(0)]).unwrap();
        let a = Anchor::Batched { batch_id: lone.batch_id, proof: lone.proof(0).unwrap() };
        assert_eq!(a.to_string().parse::<Anchor>().unwrap(), a);
        assert!("single:zz".parse::<Anchor>().is_err());
        assert!("other:00".parse::<Anchor>().is_err());
    }
}
