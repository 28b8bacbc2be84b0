//! Seeded synthetic workloads: diurnal energy settlement streams, adaptive
//! batching windows and the carbon lifecycle script.
//!
//! Everything is a pure function of the configuration and seed. Randomness
//! comes from per-purpose ChaCha20 streams (see [`stream`]).

mod carbon;
mod config;
mod energy;
mod seeds;

pub use carbon::{
    carbon_authority, carbon_holders, gen_carbon_script, CarbonDryRun, CarbonOpKind, CarbonScriptOp, Validity,
    ASSET_TOTAL_RANGE, CARBON_AUTHORITY, CARBON_HOLDERS, INVALID_PER_CATEGORY, MIN_ACCEPTED_OPS, REGISTERED_ASSETS,
};
pub use config::{WorkloadConfig, DEFAULT_HOURLY_RATE};
pub use energy::{batch_size_for, batch_windows, gen_energy_stream, participant_pool};
pub use seeds::{stream, Purpose};

pub const HOURS_PER_DAY: usize = 24;
