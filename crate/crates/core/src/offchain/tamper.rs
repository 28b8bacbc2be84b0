use rand::distributions::Alphanumeric;
use rand::Rng;

use super::{Field, SettlementRecord};

/// Upper bounds of the draw domains used when replacing a field.
pub const TAMPER_MAX_TIMESTAMP: u64 = 7 * 86_400;
pub const TAMPER_MAX_ENERGY: u64 = 10_000;
pub const TAMPER_MAX_PRICE: u64 = 100_000;

/// Returns a copy of `record` with `field` replaced by a uniformly drawn
/// valid value different from the original. Other fields are untouched.
pub fn tamper<R: Rng + ?Sized>(record: &SettlementRecord, field: Field, rng: &mut R) -> SettlementRecord {
    let mut out = record.clone();
    loop {
        match field {
            Field::Timestamp => out.timestamp = rng.gen_range(0..=TAMPER_MAX_TIMESTAMP),
            Field::Participant => out.participant_id = rng.gen(),
            Field::TxType => out.tx_type = record.tx_type.flipped(),
            Field::Energy => out.energy_kwh = rng.gen_range(1..=TAMPER_MAX_ENERGY),
            Field::Price => out.price_milli = rng.gen_range(1..=TAMPER_MAX_PRICE),
            Field::Region => {
                let len = rng.gen_range(1..=super::MAX_REGION_LEN);
                out.region = rng.sample_iter(&Alphanumeric).take(len).map(char::from).collect();
            }
        }
        if out != *record {
            return out;
        }
    }
}
