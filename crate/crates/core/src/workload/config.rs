use crate::config::{ConfigError, KvMap};

use super::HOURS_PER_DAY;

/// Double-peak diurnal profile in records per hour: a night trough of 400,
/// a morning ramp peaking at hour 9 and an evening peak at hour 19, at four
/// times the trough.
pub const DEFAULT_HOURLY_RATE: [f64; HOURS_PER_DAY] = [
    420.0, 400.0, 400.0, 400.0, 450.0, 550.0, 800.0, 1150.0, 1500.0, 1600.0, 1450.0, 1200.0, //
    1050.0, 1000.0, 1000.0, 1050.0, 1200.0, 1400.0, 1550.0, 1600.0, 1500.0, 1200.0, 850.0, 600.0,
];

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadConfig {
    pub seed: u64,
    pub hours: usize,
    /// Arrival rate for each hour of the day, records per hour.
    pub hourly_rate: Vec<f64>,
    /// Milli-currency per kWh.
    pub price_mean: f64,
    pub price_sd: f64,
    pub energy_min: u64,
    pub energy_max: u64,
    pub regions: Vec<String>,
    /// Size of the anonymous participant pool.
    pub participants: usize,
    pub batch_max: u64,
    /// Arrival rate at which the batch size halves.
    pub rate_ref: f64,
    /// Currency per tonne.
    pub carbon_price_min: f64,
    pub carbon_price_max: f64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            hours: HOURS_PER_DAY,
            hourly_rate: DEFAULT_HOURLY_RATE.to_vec(),
            price_mean: 45.0,
            price_sd: 15.0,
            energy_min: 1,
            energy_max: 50,
            regions: ["PJM-EAST", "PJM-WEST", "PJM-MIDW", "PJM-SOUTH"].map(String::from).to_vec(),
            participants: 500,
            batch_max: 64,
            rate_ref: 1_000.0,
            carbon_price_min: 60.0,
            carbon_price_max: 100.0,
        }
    }
}

impl WorkloadConfig {
    /// Takes the workload keys out of `kv`, starting from the defaults.
    pub fn from_kv(kv: &mut KvMap) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        kv.take_parsed("seed", &mut c.seed)?;
        kv.take_parsed("hours", &mut c.hours)?;
        kv.take_list("hourly_rate", &mut c.hourly_rate)?;
        kv.take_parsed("price_mean", &mut c.price_mean)?;
        kv.take_parsed("price_sd", &mut c.price_sd)?;
        kv.take_parsed("energy_min", &mut c.energy_min)?;
        kv.take_parsed("energy_max", &mut c.energy_max)?;
        kv.take_list("regions", &mut c.regions)?;
        kv.take_parsed("participants", &mut c.participants)?;
        kv.take_parsed("batch_max", &mut c.batch_max)?;
        kv.take_parsed("rate_ref", &mut c.rate_ref)?;
        kv.take_parsed("carbon_price_min", &mut c.carbon_price_min)?;
        kv.take_parsed("carbon_price_max", &mut c.carbon_price_max)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self, kv: &mut KvMap) {
        let join = |v: Vec<String>| v.join(",");
        kv.insert("seed", self.seed);
        kv.insert("hours", self.hours);
        kv.insert("hourly_rate", join(self.hourly_rate.iter().map(f64::to_string).collect()));
        kv.insert("price_mean", self.price_mean);
        kv.insert("price_sd", self.price_sd);
        kv.insert("energy_min", self.energy_min);
        kv.insert("energy_max", self.energy_max);
        kv.insert("regions", join(self.regions.clone()));
        kv.insert("participants", self.participants);
        kv.insert("batch_max", self.batch_max);
        kv.insert("rate_ref", self.rate_ref);
        kv.insert("carbon_price_min", self.carbon_price_min);
        kv.insert("carbon_price_max", self.carbon_price_max);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if self.hourly_rate.len() != HOURS_PER_DAY {
            return Err(ConfigError::invalid("hourly_rate", format!("expected {HOURS_PER_DAY} values")));
        }
        if !self.hourly_rate.iter().all(|r| finite_nonneg(*r)) {
            return Err(ConfigError::invalid("hourly_rate", "rates must be finite and non-negative"));
        }
        if !self.price_mean.is_finite() {
            return Err(ConfigError::invalid("price_mean", "must be finite"));
        }
        if !finite_nonneg(self.price_sd) {
            return Err(ConfigError::invalid("price_sd", "must be finite and non-negative"));
        }
        if self.energy_min == 0 || self.energy_min > self.energy_max {
            return Err(ConfigError::invalid("energy_min", "need 1 <= energy_min <= energy_max"));
        }
        if self.regions.is_empty() {
            return Err(ConfigError::invalid("regions", "at least one region"));
        }
        for r in &self.regions {
            if r.is_empty() || r.len() > crate::offchain::MAX_REGION_LEN || r.contains('\0') {
                return Err(ConfigError::invalid("regions", format!("`{r}` must be 1..=16 bytes without NUL")));
            }
        }
        if self.participants == 0 {
            return Err(ConfigError::invalid("participants", "must be at least 1"));
        }
        if self.batch_max == 0 {
            return Err(ConfigError::invalid("batch_max", "must be at least 1"));
        }
        if !(self.rate_ref.is_finite() && self.rate_ref > 0.0) {
            return Err(ConfigError::invalid("rate_ref", "must be positive"));
        }
        if !(finite_nonneg(self.carbon_price_min) && self.carbon_price_min <= self.carbon_price_max)
            || !self.carbon_price_max.is_finite()
        {
            return Err(ConfigError::invalid("carbon_price_min", "need 0 <= min <= max"));
        }
        Ok(())
    }

    pub fn rate_for_hour(&self, hour: usize) -> f64 {
        self.hourly_rate[hour % HOURS_PER_DAY]
    }

    /// Expected record count over `hours`.
    pub fn expected_records(&self) -> f64 {
        (0..self.hours).map(|h| self.rate_for_hour(h)).sum()
    }
}
