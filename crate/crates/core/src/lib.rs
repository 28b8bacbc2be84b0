//! Deterministic ledger simulator and audit toolkit for hybrid on-chain /
//! off-chain settlement of energy trades and carbon credits.
//!
//! The on-chain side ([`ledger`], [`contracts`]) anchors commitments and
//! enforces invariants. The off-chain side ([`offchain`], [`workload`]) keeps
//! the full records and replays audits against those anchors.
//! [`experiments`] ties them together into reproducible runs.

pub mod codec;
pub mod config;
pub mod contracts;
pub mod crypto;
pub mod experiments;
pub mod ledger;
pub mod offchain;
pub mod workload;
