//! Web-tracking measurement over crawl logs.
//!
//! The pipeline reads crawl records ([`crawl`]), labels every cookie and
//! request as first- or third-party ([`domain`]), matches request URLs against
//! ad and tracker filter lists ([`filter`]), aggregates per-visit and
//! per-country metrics ([`metrics`]) and compares countries with rank-based
//! and proportion tests ([`stats`]). [`synth`] plants known effects for
//! end-to-end checks and [`report`] renders the tables.

pub mod crawl;
pub mod domain;
pub mod filter;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod synth;
