use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::Word;
use crate::crypto::keccak256_concat;
use crate::ledger::AccountId;

use super::seeds::{stream, Purpose};

/// Account holding the authority role in carbon scripts.
pub const CARBON_AUTHORITY: &str = "registry";
pub const CARBON_HOLDERS: [&str; 6] = ["holder-0", "holder-1", "holder-2", "holder-3", "holder-4", "holder-5"];
pub const REGISTERED_ASSETS: usize = 6;
pub const MIN_ACCEPTED_OPS: usize = 100;
pub const INVALID_PER_CATEGORY: usize = 10;
/// Lineage totals in tonnes, EU-ETS installation scale.
pub const ASSET_TOTAL_RANGE: (u64, u64) = (10_000, 250_000);
pub const ASSET_TYPES: [&str; 3] = ["EUA", "VCU", "CER"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarbonOpKind {
    Register { asset_type: String, issuance_year: u64, owner: AccountId },
    Transfer { to: AccountId },
    Retire,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Validity {
    Valid,
    OverTransfer,
    OverRetire,
    Unauthorized,
}

impl Validity {
    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Valid => "valid",
            Validity::OverTransfer => "over_transfer",
            Validity::OverRetire => "over_retire",
            Validity::Unauthorized => "unauthorized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarbonScriptOp {
    pub kind: CarbonOpKind,
    pub validity: Validity,
    pub asset_id: Word,
    /// Total for registration, otherwise the moved or retired quantity.
    pub amount: u64,
    pub actor: AccountId,
}

/// Per-owner `(available, retired)` balances of one lineage.
pub type OwnerBalances = BTreeMap<AccountId, (u64, u64)>;

/// Off-ledger model of registry balances, used to build the script and to
/// check it independently.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CarbonDryRun {
    /// asset -> (total, balances)
    pub assets: BTreeMap<Word, (u64, OwnerBalances)>,
}

impl CarbonDryRun {
    pub fn available(&self, asset: &Word, owner: &AccountId) -> Option<u64> {
        self.assets.get(asset)?.1.get(owner).map(|e| e.0)
    }

    /// Applies `op` if it would be accepted; returns whether it was.
    pub fn apply(&mut self, op: &CarbonScriptOp, authority: &AccountId) -> bool {
        match &op.kind {
            CarbonOpKind::Register { owner, .. } => {
                if &op.actor != authority || op.amount == 0 || self.assets.contains_key(&op.asset_id) {
                    return false;
                }
                self.assets.insert(op.asset_id, (op.amount, BTreeMap::from([(owner.clone(), (op.amount, 0))])));
                true
            }
            CarbonOpKind::Transfer { to } => {
                let Some((_, owners)) = self.assets.get_mut(&op.asset_id) else { return false };
                let Some(&(available, retired)) = owners.get(&op.actor) else { return false };
                if op.amount == 0 || op.amount > available || to == &op.actor {
                    return false;
                }
                owners.insert(op.actor.clone(), (available - op.amount, retired));
                owners.entry(to.clone()).or_insert((0, 0)).0 += op.amount;
                true
            }
            CarbonOpKind::Retire => {
                let Some((_, owners)) = self.assets.get_mut(&op.asset_id) else { return false };
                let Some(entry) = owners.get_mut(&op.actor) else { return false };
                if op.amount == 0 || op.amount > entry.0 {
                    return false;
                }
                entry.0 -= op.amount;
                entry.1 += op.amount;
                true
            }
        }
    }
}

pub fn carbon_authority() -> AccountId {
    AccountId::new(CARBON_AUTHORITY).expect("valid id")
}

pub fn carbon_holders() -> Vec<AccountId> {
    CARBON_HOLDERS.iter().map(|h| AccountId::new(*h).expect("valid id")).collect()
}

fn asset_id(seed: u64, index: usize) -> Word {
    keccak256_concat(&[b"asset", &seed.to_be_bytes(), &(index as u64).to_be_bytes()]).0
}

/// Registrations, then valid transfers and retirements until at least
/// [`MIN_ACCEPTED_OPS`] operations are accepted, then 30 invalid operations
/// (10 per category, shuffled). Each invalid op breaks exactly one gate.
pub fn gen_carbon_script(seed: u64) -> Vec<CarbonScriptOp> {
    let mut rng = stream(seed, Purpose::Carbon);
    let authority = carbon_authority();
    let holders = carbon_holders();
    let mut sim = CarbonDryRun::default();
    let mut script = Vec::new();
    let push = |sim: &mut CarbonDryRun, script: &mut Vec<CarbonScriptOp>, op: CarbonScriptOp| {
        let accepted = sim.apply(&op, &authority);
        debug_assert_eq!(accepted, op.validity == Validity::Valid);
        script.push(op);
    };

    let ids: Vec<Word> = (0..REGISTERED_ASSETS).map(|i| asset_id(seed, i)).collect();
    for (i, id) in ids.iter().enumerate() {
        let op = CarbonScriptOp {
            kind: CarbonOpKind::Register {
                asset_type: ASSET_TYPES[i % ASSET_TYPES.len()].to_string(),
                issuance_year: rng.gen_range(2021..=2025),
                owner: holders[i % holders.len()].clone(),
            },
            validity: Validity::Valid,
            asset_id: *id,
            amount: rng.gen_range(ASSET_TOTAL_RANGE.0..=ASSET_TOTAL_RANGE.1),
            actor: authority.clone(),
        };
        push(&mut sim, &mut script, op);
    }

    while script.len() < MIN_ACCEPTED_OPS {
        let funded: Vec<(Word, AccountId, u64)> = sim
            .assets
            .iter()
            .flat_map(|(id, (_, owners))| owners.iter().map(move |(o, e)| (*id, o.clone(), e.0)))
            .filter(|(_, _, available)| *available > 1)
            .collect();
        let (id, owner, available) = funded.choose(&mut rng).expect("credits remain").clone();
        let op = if rng.gen_bool(0.6) {
            let to = holders.iter().filter(|h| **h != owner).collect::<Vec<_>>().choose(&mut rng).map(|h| (*h).clone());
            CarbonScriptOp {
                kind: CarbonOpKind::Transfer { to: to.expect("several holders") },
                validity: Validity::Valid,
                asset_id: id,
                amount: rng.gen_range(1..=available / 2),
                actor: owner,
            }
        } else {
            CarbonScriptOp {
                kind: CarbonOpKind::Retire,
                validity: Validity::Valid,
                asset_id: id,
                amount: rng.gen_range(1..=(available / 4).max(1)),
                actor: owner,
            }
        };
        push(&mut sim, &mut script, op);
    }

    let mut categories: Vec<Validity> = [Validity::OverTransfer, Validity::OverRetire, Validity::Unauthorized]
        .into_iter()
        .flat_map(|v| std::iter::repeat_n(v, INVALID_PER_CATEGORY))
        .collect();
    categories.shuffle(&mut rng);
    let mut unauthorized_seen = 0usize;
    for validity in categories {
        let entries: Vec<(Word, AccountId, u64)> = sim
            .assets
            .iter()
            .flat_map(|(id, (_, owners))| owners.iter().map(move |(o, e)| (*id, o.clone(), e.0)))
            .collect();
        let (id, owner, available) = entries.choose(&mut rng).expect("assets exist").clone();
        let delta = rng.gen_range(1..=1_000);
        let other = |rng: &mut rand_chacha::ChaCha20Rng, not: &AccountId| {
            holders.iter().filter(|h| *h != not).collect::<Vec<_>>().choose(rng).map(|h| (*h).clone()).expect("holders")
        };
        let op = match validity {
            Validity::OverTransfer => CarbonScriptOp {
                kind: CarbonOpKind::Transfer { to: other(&mut rng, &owner) },
                validity,
                asset_id: id,
                amount: available + delta,
                actor: owner,
            },
            Validity::OverRetire => CarbonScriptOp {
                kind: CarbonOpKind::Retire,
                validity,
                asset_id: id,
                amount: available + delta,
                actor: owner,
            },
            Validity::Unauthorized => {
                unauthorized_seen += 1;
                // Rotates across the three operations; the amount is always
                // within bounds so only the caller check can fail.
                let owners = &sim.assets[&id].1;
                let outsider = holders.iter().find(|h| !owners.contains_key(*h)).cloned();
                match (unauthorized_seen % 3, outsider) {
                    (0, _) | (_, None) => CarbonScriptOp {
                        kind: CarbonOpKind::Register {
                            asset_type: "EUA".into(),
                            issuance_year: 2024,
                            owner: owner.clone(),
                        },
                        validity,
                        asset_id: asset_id(seed, REGISTERED_ASSETS + unauthorized_seen),
                        amount: rng.gen_range(ASSET_TOTAL_RANGE.0..=ASSET_TOTAL_RANGE.1),
                        actor: owner,
                    },
                    (1, Some(outsider)) => CarbonScriptOp {
                        kind: CarbonOpKind::Transfer { to: owner },
                        validity,
                        asset_id: id,
                        amount: available.max(1).min(1 + delta),
                        actor: outsider,
                    },
                    (_, Some(outsider)) => CarbonScriptOp {
                        kind: CarbonOpKind::Retire,
                        validity,
                        asset_id: id,
                        amount: available.max(1).min(1 + delta),
                        actor: outsider,
                    },
                }
            }
            Validity::Valid => unreachable!("only invalid categories are queued"),
        };
        push(&mut sim, &mut script, op);
    }
    script
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_shape() {
        let s = gen_carbon_script(3);
        assert_eq!(s, gen_carbon_script(3));
        let count = |v: Validity| s.iter().filter(|o| o.validity == v).count();
        assert_eq!(count(Validity::OverTransfer), 10);
        assert_eq!(count(Validity::OverRetire), 10);
        assert_eq!(count(Validity::Unauthorized), 10);
        assert!(count(Validity::Valid) >= MIN_ACCEPTED_OPS);
        let registers =
            s.iter().filter(|o| matches!(o.kind, CarbonOpKind::Register { .. }) && o.validity == Validity::Valid);
        assert!(registers.count() >= 5);
        assert!(s[..s.len() - 30].iter().all(|o| o.validity == Validity::Valid));
    }

    #[test]
    fn over_amounts_exceed_dry_run_availability() {
        for seed in 0..20 {
            let authority = carbon_authority();
            let mut sim = CarbonDryRun::default();
            for op in gen_carbon_script(seed) {
                if matches!(op.validity, Validity::OverTransfer | Validity::OverRetire) {
                    let available = sim.available(&op.asset_id, &op.actor).expect("actor owns an entry");
                    assert!(op.amount > available);
                }
                if op.validity == Validity::Unauthorized {
                    match &op.kind {
                        CarbonOpKind::Register { .. } => assert_ne!(op.actor, authority),
                        _ => assert!(sim.available(&op.asset_id, &op.actor).is_none()),
                    }
                }
                assert_eq!(sim.apply(&op, &authority), op.validity == Validity::Valid, "seed {seed}");
            }
        }
    }
}
