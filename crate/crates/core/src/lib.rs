//! Outage analysis of a relay-assisted cooperative NOMA downlink.
//!
//! A source serves a pair of users `D_m` (weak) and `D_n` (strong) chosen
//! from `M` users ranked by channel gain. `D_n` decodes `s_m`, cancels it and
//! decodes `s_n`; it then forwards `s_m` through an amplify-and-forward relay
//! because no direct `D_n`–`D_m` link exists, and `D_m` keeps the better of
//! the direct and relayed copies.
//!
//! * [`orderstat`]: ordered exponential gains (CDF, PDF, sampler).
//! * [`linklevel`]: scenario parameters, geometry, per-link SINRs.
//! * [`analytic`]: closed-form outage probabilities and throughput.
//! * [`mcsim`]: reproducible parallel Monte-Carlo estimates of the same.
//! * [`scenario`], [`sweep`], [`plot`]: config files, sweeps, CSV and plots.

pub mod analytic;
pub mod error;
pub mod linklevel;
pub mod mcsim;
pub mod orderstat;
pub mod plot;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
