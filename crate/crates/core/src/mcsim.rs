//! Monte-Carlo replay of the protocol at SINR level.
//!
//! Each trial draws one fading realization, evaluates the decoding events of
//! both users and counts outages. Trial `t` reads its random words from a
//! fixed position of a single ChaCha8 stream keyed by the seed, so the
//! estimates depend only on `(seed, trials)`: chunking and the number of
//! rayon workers change scheduling, never the numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{self, Relaying};
use crate::error::{Error, Result};
use crate::linklevel::{ChannelRealization, Geometry, LinkBudget, SystemConfig};
use crate::orderstat::{exponential_from_bits, fill_ordered_gains};

/// How the two paired S–D gains are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// One ordered draw of `M` gains supplies both ranks (physical model).
    Joint,
    /// Ranks `m` and `n` come from two independent ordered draws, matching
    /// the product form of the closed-form weak-user outage.
    #[default]
    IndependentMarginals,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::Joint => "joint",
            SamplingMode::IndependentMarginals => "independent",
        }
    }

    /// 64-bit words consumed per trial.
    fn words_per_trial(self, users: usize) -> u64 {
        let sd = match self {
            SamplingMode::Joint => users,
            SamplingMode::IndependentMarginals => 2 * users,
        };
        sd as u64 + 2
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(SamplingMode::Joint),
            "independent" | "independent-marginals" => Ok(SamplingMode::IndependentMarginals),
            other => Err(Error::arg(format!(
                "unknown sampling mode `{other}` (expected joint or independent)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Trials per parallel work item.
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 1,
            mode: SamplingMode::IndependentMarginals,
            chunk_size: 10_000,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if self.chunk_size == 0 {
            return Err(Error::arg("chunk_size must be at least 1"));
        }
        Ok(())
    }
}

/// Empirical probability of a Bernoulli event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        Self {
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Estimates for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub strong: McEstimate,
    pub weak: McEstimate,
    pub throughput: f64,
}

/// Fills `real` with one fading draw. `real` must already hold `M` S–D
/// slots, plus the second vector in independent-marginals mode.
fn draw_into<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    mode: SamplingMode,
    rng: &mut R,
    real: &mut ChannelRealization,
) {
    fill_ordered_gains(&mut real.g_sd, cfg.lambda_sd, rng);
    if mode == SamplingMode::IndependentMarginals {
        let second = real.g_sd_strong.get_or_insert_with(|| vec![0.0; cfg.users]);
        fill_ordered_gains(second, cfg.lambda_sd, rng);
    } else {
        real.g_sd_strong = None;
    }
    real.g_dnr = exponential_from_bits(rng.next_u64(), cfg.lambda_dnr);
    real.g_rdm = exponential_from_bits(rng.next_u64(), cfg.lambda_rdm);
}

/// Draws one fading realization in the given mode.
pub fn draw_realization<R: RngCore + ?Sized>(
    cfg: &SystemConfig,
    mode: SamplingMode,
    rng: &mut R,
) -> ChannelRealization {
    let mut real = ChannelRealization::uniform(cfg.users, 0.0);
    draw_into(cfg, mode, rng, &mut real);
    real
}

/// Decoding-event evaluator with the link budget precomputed.
#[derive(Debug, Clone, Copy)]
struct Events {
    budget: LinkBudget,
    weak: usize,
    strong: usize,
    gamma_thm: f64,
    gamma_thn: f64,
    relaying: Relaying,
}

impl Events {
    fn new(cfg: &SystemConfig, geo: &Geometry, relaying: Relaying) -> Self {
        Self {
            budget: LinkBudget::new(cfg, geo),
            weak: cfg.weak,
            strong: cfg.strong,
            gamma_thm: cfg.gamma_thm,
            gamma_thn: cfg.gamma_thn,
            relaying,
        }
    }

    #[inline]
    fn eval(&self, real: &ChannelRealization) -> (bool, bool) {
        let g_sdn = real.strong_gain(self.strong);
        let sic_fails = self.budget.strong_decodes_weak(g_sdn) < self.gamma_thm;
        let outage_n = sic_fails || self.budget.strong_own(g_sdn) < self.gamma_thn;
        let outage_m = sic_fails || {
            let direct_fails = self.budget.direct_weak(real.weak_gain(self.weak)) < self.gamma_thm;
            let relay_fails = match self.relaying {
                Relaying::Enabled => self.budget.relayed(real.g_dnr, real.g_rdm) < self.gamma_thm,
                Relaying::Disabled => true,
            };
            direct_fails && relay_fails
        };
        (outage_n, outage_m)
    }
}

/// Outage indicators `(D_n, D_m)` for one realization.
///
/// `D_n` is in outage when it cannot decode `s_m` or, after SIC, `s_n`.
/// `D_m` is in outage when `D_n` cannot decode `s_m`, or when both the direct
/// branch and the relayed branch fall below `γ_thm`.
pub fn outage_events(
    cfg: &SystemConfig,
    geo: &Geometry,
    real: &ChannelRealization,
) -> (bool, bool) {
    outage_events_with(cfg, geo, real, Relaying::Enabled)
}

pub fn outage_events_with(
    cfg: &SystemConfig,
    geo: &Geometry,
    real: &ChannelRealization,
    relaying: Relaying,
) -> (bool, bool) {
    Events::new(cfg, geo, relaying).eval(real)
}

/// Stream positioned at the first word of trial `first_trial`.
fn stream_at(seed: u64, mode: SamplingMode, users: usize, first_trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // word_pos counts 32-bit words
    let words = first_trial as u128 * mode.words_per_trial(users) as u128 * 2;
    rng.set_word_pos(words);
    rng
}

/// Outage counts `(D_n, D_m)` over trials `[start, end)`.
fn count_range(
    cfg: &SystemConfig,
    events: &Events,
    mc: &McConfig,
    start: u64,
    end: u64,
) -> (u64, u64) {
    let mut rng = stream_at(mc.seed, mc.mode, cfg.users, start);
    let mut real = ChannelRealization::uniform(cfg.users, 0.0);
    let (mut hits_n, mut hits_m) = (0u64, 0u64);
    for _ in start..end {
        draw_into(cfg, mc.mode, &mut rng, &mut real);
        let (out_n, out_m) = events.eval(&real);
        hits_n += out_n as u64;
        hits_m += out_m as u64;
    }
    (hits_n, hits_m)
}

/// Monte-Carlo outage estimates and throughput at `cfg.gamma0`.
pub fn estimate(cfg: &SystemConfig, geo: &Geometry, mc: &McConfig) -> Result<McResult> {
    estimate_with(cfg, geo, mc, Relaying::Enabled)
}

pub fn estimate_with(
    cfg: &SystemConfig,
    geo: &Geometry,
    mc: &McConfig,
    relaying: Relaying,
) -> Result<McResult> {
    cfg.validate()?;
    mc.validate()?;
    let events = Events::new(cfg, geo, relaying);
    let chunks = mc.trials.div_ceil(mc.chunk_size);
    let counts: Vec<(u64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * mc.chunk_size;
            let end = (start + mc.chunk_size).min(mc.trials);
            count_range(cfg, &events, mc, start, end)
        })
        .collect();
    let (hits_n, hits_m) = counts
        .iter()
        .fold((0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    let strong = McEstimate::from_counts(hits_n, mc.trials);
    let weak = McEstimate::from_counts(hits_m, mc.trials);
    Ok(McResult {
        strong,
        weak,
        throughput: analytic::throughput(cfg, strong.p_hat, weak.p_hat)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(trials: u64, mode: SamplingMode) -> McConfig {
        McConfig {
            trials,
            seed: 42,
            mode,
            chunk_size: 1000,
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let cfg = SystemConfig::default();
        for mode in [SamplingMode::Joint, SamplingMode::IndependentMarginals] {
            let mut a = ChaCha8Rng::seed_from_u64(5);
            let mut b = ChaCha8Rng::seed_from_u64(5);
            assert_eq!(
                draw_realization(&cfg, mode, &mut a),
                draw_realization(&cfg, mode, &mut b)
            );
        }
    }

    #[test]
    fn words_per_trial_match_consumption() {
        let cfg = SystemConfig::default();
        for mode in [SamplingMode::Joint, SamplingMode::IndependentMarginals] {
            let mut a = stream_at(9, mode, cfg.users, 0);
            for _ in 0..17 {
                draw_realization(&cfg, mode, &mut a);
            }
            let mut b = stream_at(9, mode, cfg.users, 17);
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn joint_mode_orders_pair() {
        let cfg = SystemConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let real = draw_realization(&cfg, SamplingMode::Joint, &mut rng);
            assert!(real.g_sd_strong.is_none());
            assert!(real.strong_gain(cfg.strong) >= real.weak_gain(cfg.weak));
        }
    }

    #[test]
    fn relay_gain_mean() {
        let cfg = SystemConfig {
            lambda_dnr: 2.5,
            ..SystemConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| draw_realization(&cfg, SamplingMode::Joint, &mut rng).g_dnr)
            .sum::<f64>()
            / n as f64;
        // exponential: sd = mean
        let sigma = 2.5 / (n as f64).sqrt();
        assert!((mean - 2.5).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn event_examples() {
        let cfg = SystemConfig::default();
        let geo = Geometry::default();
        let zero = ChannelRealization::uniform(cfg.users, 0.0);
        assert_eq!(outage_events(&cfg, &geo, &zero), (true, true));
        let big = ChannelRealization::uniform(cfg.users, 1e100);
        assert_eq!(outage_events(&cfg, &geo, &big), (false, false));

        // D_n fails SIC although D_m's direct link would succeed.
        let mut real = ChannelRealization::uniform(cfg.users, 1e100);
        real.g_sd[cfg.strong - 1] = 0.0;
        assert_eq!(outage_events(&cfg, &geo, &real), (true, true));
    }

    #[test]
    fn selection_combining_needs_both_branches_to_fail() {
        let cfg = SystemConfig::default();
        let geo = Geometry::default();
        let mut real = ChannelRealization::uniform(cfg.users, 1e100);
        real.g_sd[cfg.weak - 1] = 0.0;
        assert_eq!(outage_events(&cfg, &geo, &real), (false, false));
        assert_eq!(
            outage_events_with(&cfg, &geo, &real, Relaying::Disabled),
            (false, true)
        );
        real.g_rdm = 0.0;
        assert_eq!(outage_events(&cfg, &geo, &real), (false, true));
    }

    #[test]
    fn certain_outage_with_huge_threshold() {
        let cfg = SystemConfig {
            gamma_thm: 1e6,
            gamma_thn: 1e6,
            ..SystemConfig::default()
        };
        let r = estimate(&cfg, &Geometry::default(), &mc(20_000, SamplingMode::Joint)).unwrap();
        assert_eq!(r.strong.p_hat, 1.0);
        assert_eq!(r.weak.p_hat, 1.0);
        assert_eq!(r.weak.stderr, 0.0);
        assert_eq!(r.throughput, 0.0);
    }

    #[test]
    fn chunking_does_not_change_estimates() {
        let cfg = SystemConfig::default().with_gamma0(10.0);
        let geo = Geometry::default();
        for mode in [SamplingMode::Joint, SamplingMode::IndependentMarginals] {
            let base = McConfig {
                trials: 100_003,
                chunk_size: 1_000,
                ..mc(0, mode)
            };
            let a = estimate(&cfg, &geo, &base).unwrap();
            let b = estimate(
                &cfg,
                &geo,
                &McConfig {
                    chunk_size: 10_000,
                    ..base
                },
            )
            .unwrap();
            let c = estimate(
                &cfg,
                &geo,
                &McConfig {
                    chunk_size: 1,
                    ..base
                },
            )
            .unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn worker_count_does_not_change_estimates() {
        let cfg = SystemConfig::default().with_gamma0(31.6);
        let geo = Geometry::default();
        let m = mc(50_000, SamplingMode::IndependentMarginals);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(&cfg, &geo, &m).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn stderr_consistent() {
        let e = McEstimate::from_counts(250, 1000);
        assert_eq!(e.p_hat, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_mc_config_rejected() {
        let cfg = SystemConfig::default();
        let geo = Geometry::default();
        assert!(estimate(&cfg, &geo, &mc(0, SamplingMode::Joint)).is_err());
        let zero_chunk = McConfig {
            chunk_size: 0,
            ..mc(10, SamplingMode::Joint)
        };
        assert!(estimate(&cfg, &geo, &zero_chunk).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "joint".parse::<SamplingMode>().unwrap(),
            SamplingMode::Joint
        );
        assert_eq!(
            "independent".parse::<SamplingMode>().unwrap(),
            SamplingMode::IndependentMarginals
        );
        assert!("both".parse::<SamplingMode>().is_err());
    }
}
