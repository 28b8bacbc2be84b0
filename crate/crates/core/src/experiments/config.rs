use std::path::Path;

use crate::config::{ConfigError, KvMap};
use crate::contracts::DEFAULT_AUTH_WINDOW;
use crate::crypto::{keccak256, Digest32};
use crate::ledger::GasSchedule;
use crate::workload::WorkloadConfig;

/// Everything a run depends on. One `key=value` file covers the workload,
/// the gas schedule and the per-experiment knobs; unknown keys are errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub workload: WorkloadConfig,
    pub schedule: GasSchedule,
    pub exp1_records: usize,
    /// Trials per field category.
    pub tamper_trials: usize,
    /// Records replayed at every batch size of the amortized series.
    pub amortized_records: usize,
    pub amortized_batch_sizes: Vec<usize>,
    pub exp4_sizes: Vec<usize>,
    pub exp4_reps: usize,
    /// Requests per class.
    pub exp5_requests: usize,
    pub auth_window: u64,
    /// Accepted band for the 24-hour reduction, in percent.
    pub reduction_band: (f64, f64),
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            workload: WorkloadConfig::default(),
            schedule: GasSchedule::default(),
            exp1_records: 200,
            tamper_trials: 30,
            amortized_records: 128,
            amortized_batch_sizes: vec![1, 2, 4, 8, 16, 32, 64],
            exp4_sizes: vec![10, 50, 100],
            exp4_reps: 20,
            exp5_requests: 20,
            auth_window: DEFAULT_AUTH_WINDOW,
            reduction_band: (25.0, 55.0),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut kv = KvMap::parse(text)?;
        let workload = WorkloadConfig::from_kv(&mut kv)?;
        let schedule = GasSchedule::from_kv(&mut kv)?;
        let mut c = RunConfig { workload, schedule, ..RunConfig::default() };
        kv.take_parsed("exp1_records", &mut c.exp1_records)?;
        kv.take_parsed("tamper_trials", &mut c.tamper_trials)?;
        kv.take_parsed("amortized_records", &mut c.amortized_records)?;
        kv.take_list("amortized_batch_sizes", &mut c.amortized_batch_sizes)?;
        kv.take_list("exp4_sizes", &mut c.exp4_sizes)?;
        kv.take_parsed("exp4_reps", &mut c.exp4_reps)?;
        kv.take_parsed("exp5_requests", &mut c.exp5_requests)?;
        kv.take_parsed("auth_window", &mut c.auth_window)?;
        kv.take_parsed("reduction_min_pct", &mut c.reduction_band.0)?;
        kv.take_parsed("reduction_max_pct", &mut c.reduction_band.1)?;
        kv.ensure_empty()?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::invalid("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.workload.validate()?;
        if self.amortized_batch_sizes.is_empty() || self.amortized_batch_sizes.contains(&0) {
            return Err(ConfigError::invalid("amortized_batch_sizes", "need positive sizes"));
        }
        if self.amortized_records == 0 {
            return Err(ConfigError::invalid("amortized_records", "must be positive"));
        }
        if self.exp4_sizes.is_empty() || self.exp4_sizes.contains(&0) {
            return Err(ConfigError::invalid("exp4_sizes", "need positive sizes"));
        }
        if self.exp4_reps == 0 {
            return Err(ConfigError::invalid("exp4_reps", "must be positive"));
        }
        let (lo, hi) = self.reduction_band;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ConfigError::invalid("reduction_min_pct", "need min <= max"));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.workload.seed
    }

    pub fn to_kv(&self) -> KvMap {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut kv = KvMap::default();
        self.workload.to_kv(&mut kv);
        self.schedule.to_kv(&mut kv);
        kv.insert("exp1_records", self.exp1_records);
        kv.insert("tamper_trials", self.tamper_trials);
        kv.insert("amortized_records", self.amortized_records);
        kv.insert("amortized_batch_sizes", list(&self.amortized_batch_sizes));
        kv.insert("exp4_sizes", list(&self.exp4_sizes));
        kv.insert("exp4_reps", self.exp4_reps);
        kv.insert("exp5_requests", self.exp5_requests);
        kv.insert("auth_window", self.auth_window);
        kv.insert("reduction_min_pct", self.reduction_band.0);
        kv.insert("reduction_max_pct", self.reduction_band.1);
        kv
    }

    /// keccak256 of the canonical (sorted) `key=value` text of the full
    /// configuration, seed included.
    pub fn digest(&self) -> Digest32 {
        keccak256(self.to_kv().to_text().as_bytes())
    }
}
