use std::fmt;

use crate::config::{ConfigError, KvMap};

/// Declared gas costs for a run. EVM-inspired magnitudes, but a simulation
/// instrument rather than real opcode pricing.
#[derive(Debug, Clone, PartialEq)]
pub struct GasSchedule {
    pub tx_base: u64,
    pub calldata_byte: u64,
    pub storage_write_new: u64,
    pub storage_write_update: u64,
    pub storage_read: u64,
    pub event_base: u64,
    pub event_byte: u64,
    pub hash_op: u64,
    pub modexp_fixed: u64,
    pub penalty_alpha: f64,
    pub daily_capacity: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            tx_base: 21_000,
            calldata_byte: 16,
            storage_write_new: 20_000,
            storage_write_update: 5_000,
            storage_read: 2_100,
            event_base: 750,
            event_byte: 8,
            hash_op: 36,
            modexp_fixed: 2_700,
            penalty_alpha: 0.5,
            daily_capacity: 20_000,
        }
    }
}

impl GasSchedule {
    /// Consumes the schedule's keys from `kv`, starting from defaults.
    pub fn from_kv(kv: &mut KvMap) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        kv.take_parsed("tx_base", &mut s.tx_base)?;
        kv.take_parsed("calldata_byte", &mut s.calldata_byte)?;
        kv.take_parsed("storage_write_new", &mut s.storage_write_new)?;
        kv.take_parsed("storage_write_update", &mut s.storage_write_update)?;
        kv.take_parsed("storage_read", &mut s.storage_read)?;
        kv.take_parsed("event_base", &mut s.event_base)?;
        kv.take_parsed("event_byte", &mut s.event_byte)?;
        kv.take_parsed("hash_op", &mut s.hash_op)?;
        kv.take_parsed("modexp_fixed", &mut s.modexp_fixed)?;
        kv.take_parsed("penalty_alpha", &mut s.penalty_alpha)?;
        kv.take_parsed("daily_capacity", &mut s.daily_capacity)?;
        if !s.penalty_alpha.is_finite() || s.penalty_alpha < 0.0 {
            return Err(ConfigError::invalid("penalty_alpha", "must be finite and >= 0"));
        }
        if s.daily_capacity == 0 {
            return Err(ConfigError::invalid("daily_capacity", "must be >= 1"));
        }
        Ok(s)
    }

    pub fn to_kv(&self, kv: &mut KvMap) {
        kv.insert("tx_base", self.tx_base);
        kv.insert("calldata_byte", self.calldata_byte);
        kv.insert("storage_write_new", self.storage_write_new);
        kv.insert("storage_write_update", self.storage_write_update);
        kv.insert("storage_read", self.storage_read);
        kv.insert("event_base", self.event_base);
        kv.insert("event_byte", self.event_byte);
        kv.insert("hash_op", self.hash_op);
        kv.insert("modexp_fixed", self.modexp_fixed);
        kv.insert("penalty_alpha", self.penalty_alpha);
        kv.insert("daily_capacity", self.daily_capacity);
    }
}

/// Single-line echo, printed in every report header.
impl fmt::Display for GasSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tx_base={} calldata_byte={} storage_write_new={} storage_write_update={} \
             storage_read={} event_base={} event_byte={} hash_op={} modexp_fixed={} \
             penalty_alpha={} daily_capacity={}",
            self.tx_base,
            self.calldata_byte,
            self.storage_write_new,
            self.storage_write_update,
            self.storage_read,
            self.event_base,
            self.event_byte,
            self.hash_op,
            self.modexp_fixed,
            self.penalty_alpha,
            self.daily_capacity
        )
    }
}

/// Congestion multiplier: 1 up to the daily capacity, then
/// `1 + alpha * (excess / capacity)^2`.
pub fn capacity_penalty(cumulative: u64, schedule: &GasSchedule) -> f64 {
    if cumulative <= schedule.daily_capacity {
        return 1.0;
    }
    1.0 + schedule.penalty_alpha * excess_ratio(cumulative, schedule).powi(2)
}

fn excess_ratio(cumulative: u64, schedule: &GasSchedule) -> f64 {
    (cumulative - schedule.daily_capacity) as f64 / schedule.daily_capacity as f64
}

/// Applies the penalty to an integer gas amount. The surcharge is rounded up,
/// so any positive penalty costs at least one extra unit.
pub fn penalized_gas(base: u64, cumulative: u64, schedule: &GasSchedule) -> u64 {
    if cumulative <= schedule.daily_capacity || schedule.penalty_alpha == 0.0 {
        return base;
    }
    let surcharge = base as f64 * schedule.penalty_alpha * excess_ratio(cumulative, schedule).powi(2);
    base + surcharge.ceil() as u64
}
