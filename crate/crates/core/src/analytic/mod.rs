//! Closed-form outage probabilities of the paired users and the resulting
//! delay-sensitive throughput.

mod bessel;

pub use bessel::bessel_k1;

use crate::error::{Error, Result};
use crate::linklevel::{Geometry, SystemConfig};
use crate::orderstat::{ordered_cdf, OrderStatSpec};

/// Whether the weak user may combine the relayed copy of `s_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Relaying {
    #[default]
    Enabled,
    /// Non-relaying baseline: the relay branch always fails.
    Disabled,
}

/// Outage pair and throughput at one transmit SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePoint {
    pub gamma0: f64,
    pub p_out_n: f64,
    pub p_out_m: f64,
    pub throughput: f64,
}

/// `α = γ_thm / ((a_m - a_n γ_thm) γ₀)`. Only meaningful when SIC is feasible.
fn alpha(cfg: &SystemConfig) -> f64 {
    cfg.gamma_thm / ((cfg.a_m - cfg.a_n * cfg.gamma_thm) * cfg.gamma0)
}

fn rank_cdf(cfg: &SystemConfig, rank: usize, x: f64) -> Result<f64> {
    ordered_cdf(&OrderStatSpec::new(cfg.users, rank, cfg.lambda_sd)?, x)
}

/// Outage probability of the strong user `D_n`: it must decode `s_m`, then
/// `s_n` after SIC. Certain outage when `γ_thm ≥ a_m/a_n`.
pub fn outage_strong(cfg: &SystemConfig, geo: &Geometry) -> Result<f64> {
    cfg.validate()?;
    if cfg.sic_infeasible() {
        return Ok(1.0);
    }
    let pl = geo.d_sdn().powf(cfg.theta);
    let beta = f64::max(alpha(cfg) * pl, cfg.gamma_thn * pl / (cfg.a_n * cfg.gamma0));
    rank_cdf(cfg, cfg.strong, beta)
}

/// Outage probability of the AF relay link `D_n → R → D_m` at the given hop
/// distances.
pub fn relay_link_outage_at(cfg: &SystemConfig, d_dnr: f64, d_rdm: f64) -> Result<f64> {
    cfg.validate()?;
    if !(d_dnr > 0.0 && d_rdm > 0.0) {
        return Err(Error::arg("relay hop distances must be positive"));
    }
    let pl_dnr = d_dnr.powf(cfg.theta);
    let pl_rdm = d_rdm.powf(cfg.theta);
    let th = cfg.gamma_thm;
    let g0 = cfg.gamma0;
    let t = 2.0
        * (pl_dnr * pl_rdm * th * (th + 1.0) / (g0 * g0 * cfg.lambda_dnr * cfg.lambda_rdm)).sqrt();
    let decay = (-(th / g0) * (pl_rdm / cfg.lambda_rdm + pl_dnr / cfg.lambda_dnr)).exp();
    Ok((1.0 - decay * bessel::x_k1(t)).clamp(0.0, 1.0))
}

/// Outage probability of the relay link for the scenario's geometry.
pub fn relay_link_outage(cfg: &SystemConfig, geo: &Geometry) -> Result<f64> {
    relay_link_outage_at(cfg, geo.d_dnr(), geo.d_rdm())
}

/// Outage probability of the weak user `D_m` with selection combining of the
/// direct and relayed copies.
///
/// The user is in outage when `D_n` fails to decode `s_m`, or when `D_n`
/// decodes but both the direct and relayed branches fail. The direct-branch
/// factor is the rank-`m` CDF and the `D_n` factor the rank-`n` CDF; they
/// are multiplied as if independent.
pub fn outage_weak(cfg: &SystemConfig, geo: &Geometry) -> Result<f64> {
    outage_weak_with(cfg, geo, Relaying::Enabled)
}

pub fn outage_weak_with(cfg: &SystemConfig, geo: &Geometry, relaying: Relaying) -> Result<f64> {
    cfg.validate()?;
    if cfg.sic_infeasible() {
        return Ok(1.0);
    }
    let a = alpha(cfg);
    let strong_fails = rank_cdf(cfg, cfg.strong, a * geo.d_sdn().powf(cfg.theta))?;
    let direct_fails = rank_cdf(cfg, cfg.weak, a * geo.d_sdm().powf(cfg.theta))?;
    let relay_fails = match relaying {
        Relaying::Enabled => relay_link_outage(cfg, geo)?,
        Relaying::Disabled => 1.0,
    };
    Ok((strong_fails + (1.0 - strong_fails) * direct_fails * relay_fails).clamp(0.0, 1.0))
}

/// Delay-sensitive throughput `(1 - P_n) R_n + (1 - P_m) R_m`.
pub fn throughput(cfg: &SystemConfig, p_out_n: f64, p_out_m: f64) -> Result<f64> {
    for (name, p) in [("p_out_n", p_out_n), ("p_out_m", p_out_m)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("{name} = {p} is not a probability")));
        }
    }
    Ok((1.0 - p_out_n) * cfg.rate_n + (1.0 - p_out_m) * cfg.rate_m)
}

/// Evaluates both outage probabilities and the throughput at `cfg.gamma0`.
pub fn evaluate(cfg: &SystemConfig, geo: &Geometry, relaying: Relaying) -> Result<OutagePoint> {
    let p_out_n = outage_strong(cfg, geo)?;
    let p_out_m = outage_weak_with(cfg, geo, relaying)?;
    Ok(OutagePoint {
        gamma0: cfg.gamma0,
        p_out_n,
        p_out_m,
        throughput: throughput(cfg, p_out_n, p_out_m)?,
    })
}
