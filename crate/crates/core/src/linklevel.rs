//! Scenario parameters, node geometry and per-link SINRs of the three-phase
//! protocol: source broadcast, SIC at the strong user, AF relaying to the
//! weak user.
//!
//! Everything here is linear scale. `gamma0` is `P0/N0`, shared by the
//! source, the strong user and the relay (equal transmit powers).

use crate::error::{Error, Result};
use crate::orderstat::MAX_USERS;

/// All scalar parameters of one scenario at one transmit SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Total user count `M`.
    pub users: usize,
    /// Rank of the weak user `D_m`.
    pub weak: usize,
    /// Rank of the strong user `D_n`.
    pub strong: usize,
    pub a_m: f64,
    pub a_n: f64,
    /// Average transmit SNR, linear.
    pub gamma0: f64,
    /// Path-loss exponent.
    pub theta: f64,
    pub lambda_sd: f64,
    pub lambda_dnr: f64,
    pub lambda_rdm: f64,
    /// Target rates in bit/s/Hz.
    pub rate_m: f64,
    pub rate_n: f64,
    /// Decoding thresholds, linear SINR.
    pub gamma_thm: f64,
    pub gamma_thn: f64,
}

impl Default for SystemConfig {
    /// Six users, pair (3, 6), 0.7/0.3 split, unit rates and fading means,
    /// θ = 2, at 20 dB.
    fn default() -> Self {
        Self {
            users: 6,
            weak: 3,
            strong: 6,
            a_m: 0.7,
            a_n: 0.3,
            gamma0: 100.0,
            theta: 2.0,
            lambda_sd: 1.0,
            lambda_dnr: 1.0,
            lambda_rdm: 1.0,
            rate_m: 1.0,
            rate_n: 1.0,
            gamma_thm: 1.0,
            gamma_thn: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_pair(mut self, weak: usize, strong: usize) -> Self {
        self.weak = weak;
        self.strong = strong;
        self
    }

    /// Sets both target rates and the thresholds they imply.
    pub fn with_rates(mut self, rate_m: f64, rate_n: f64) -> Result<Self> {
        self.gamma_thm = threshold_from_rate(rate_m)?;
        self.gamma_thn = threshold_from_rate(rate_n)?;
        self.rate_m = rate_m;
        self.rate_n = rate_n;
        Ok(self)
    }

    /// The SINR ceiling `a_m / a_n` of any link decoding `s_m` under NOMA.
    pub fn sic_ceiling(&self) -> f64 {
        self.a_m / self.a_n
    }

    /// True when even an infinitely strong channel cannot decode `s_m`.
    pub fn sic_infeasible(&self) -> bool {
        self.gamma_thm >= self.sic_ceiling()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.users > MAX_USERS {
            return Err(Error::OutOfRange(format!(
                "M = {} outside 1..={MAX_USERS}",
                self.users
            )));
        }
        if !(1 <= self.weak && self.weak < self.strong && self.strong <= self.users) {
            return Err(Error::arg(format!(
                "pair requires 1 <= m < n <= M, got m = {}, n = {}, M = {}",
                self.weak, self.strong, self.users
            )));
        }
        if !(self.a_m > self.a_n && self.a_n > 0.0) {
            return Err(Error::arg(format!(
                "power split requires a_m > a_n > 0, got a_m = {}, a_n = {}",
                self.a_m, self.a_n
            )));
        }
        if ((self.a_m + self.a_n) - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!(
                "power split must sum to 1, got {}",
                self.a_m + self.a_n
            )));
        }
        positive("gamma0", self.gamma0)?;
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::arg(format!(
                "theta must be >= 0, got {}",
                self.theta
            )));
        }
        positive("lambda_sd", self.lambda_sd)?;
        positive("lambda_dnr", self.lambda_dnr)?;
        positive("lambda_rdm", self.lambda_rdm)?;
        positive("gamma_thm", self.gamma_thm)?;
        positive("gamma_thn", self.gamma_thn)?;
        if !(self.rate_m >= 0.0 && self.rate_n >= 0.0) {
            return Err(Error::arg("rates must be nonnegative"));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Node distances (meters) and the two angles that fix the triangle layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    d_sdn: f64,
    d_sdm: f64,
    d_dnr: f64,
    alpha1: f64,
    alpha2: f64,
    d_dndm: f64,
    d_rdm: f64,
}

/// Law of cosines: third side opposite the included angle.
fn opposite_side(a: f64, b: f64, angle: f64) -> f64 {
    (a * a + b * b - 2.0 * a * b * angle.cos()).sqrt()
}

/// Builds the layout from the S–D_n, S–D_m and D_n–R distances, the angle
/// ∠D_m D_n R (`alpha1`) and the angle ∠D_m S D_n (`alpha2`), in radians.
pub fn derive_geometry(
    d_sdn: f64,
    d_sdm: f64,
    d_dnr: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<Geometry> {
    for (name, d) in [("d_sdn", d_sdn), ("d_sdm", d_sdm), ("d_dnr", d_dnr)] {
        positive(name, d)?;
    }
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(a > 0.0 && a < std::f64::consts::PI) {
            return Err(Error::arg(format!("{name} must lie in (0, pi), got {a}")));
        }
    }
    let d_dndm = opposite_side(d_sdm, d_sdn, alpha2);
    let d_rdm = opposite_side(d_dndm, d_dnr, alpha1);
    Ok(Geometry {
        d_sdn,
        d_sdm,
        d_dnr,
        alpha1,
        alpha2,
        d_dndm,
        d_rdm,
    })
}

impl Geometry {
    /// Same as [`derive_geometry`] with the angles in degrees.
    pub fn from_degrees(
        d_sdn: f64,
        d_sdm: f64,
        d_dnr: f64,
        alpha1_deg: f64,
        alpha2_deg: f64,
    ) -> Result<Self> {
        derive_geometry(
            d_sdn,
            d_sdm,
            d_dnr,
            alpha1_deg.to_radians(),
            alpha2_deg.to_radians(),
        )
    }

    pub fn d_sdn(&self) -> f64 {
        self.d_sdn
    }
    pub fn d_sdm(&self) -> f64 {
        self.d_sdm
    }
    pub fn d_dnr(&self) -> f64 {
        self.d_dnr
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn d_dndm(&self) -> f64 {
        self.d_dndm
    }
    pub fn d_rdm(&self) -> f64 {
        self.d_rdm
    }
}

impl Default for Geometry {
    /// d_SDn = 4 m, d_SDm = 6 m, d_DnR = 4 m, α₁ = 40°, α₂ = 60°.
    fn default() -> Self {
        Geometry::from_degrees(4.0, 6.0, 4.0, 40.0, 60.0).expect("valid default layout")
    }
}

/// One fading draw.
///
/// `g_sd` holds the `M` ascending source-to-user gains. In the
/// independent-marginals sampling mode a second ascending vector supplies
/// the strong user's gain; otherwise both ranks read from `g_sd`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g_sd: Vec<f64>,
    pub g_sd_strong: Option<Vec<f64>>,
    pub g_dnr: f64,
    pub g_rdm: f64,
}

impl ChannelRealization {
    /// Realization where every link, including every ordered S–D gain, has
    /// the same power gain.
    pub fn uniform(users: usize, gain: f64) -> Self {
        Self {
            g_sd: vec![gain; users],
            g_sd_strong: None,
            g_dnr: gain,
            g_rdm: gain,
        }
    }

    /// `|h_SDm|²` for 1-based rank `m`.
    pub fn weak_gain(&self, m: usize) -> f64 {
        self.g_sd[m - 1]
    }

    /// `|h_SDn|²` for 1-based rank `n`.
    pub fn strong_gain(&self, n: usize) -> f64 {
        self.g_sd_strong.as_deref().unwrap_or(&self.g_sd)[n - 1]
    }
}

/// Per-link `d^θ` path losses together with the SINR parameters, so hot
/// loops avoid recomputing powers.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    a_m: f64,
    a_n: f64,
    gamma0: f64,
    pl_sdm: f64,
    pl_sdn: f64,
    pl_dnr: f64,
    pl_rdm: f64,
}

impl LinkBudget {
    pub fn new(cfg: &SystemConfig, geo: &Geometry) -> Self {
        let pl = |d: f64| d.powf(cfg.theta);
        Self {
            a_m: cfg.a_m,
            a_n: cfg.a_n,
            gamma0: cfg.gamma0,
            pl_sdm: pl(geo.d_sdm),
            pl_sdn: pl(geo.d_sdn),
            pl_dnr: pl(geo.d_dnr),
            pl_rdm: pl(geo.d_rdm),
        }
    }

    #[inline]
    fn noma_sinr(&self, g: f64, path_loss: f64) -> f64 {
        self.a_m * g / (self.a_n * g + path_loss / self.gamma0)
    }

    /// S→D_m SINR decoding `s_m` with `s_n` as interference.
    #[inline]
    pub fn direct_weak(&self, g_sdm: f64) -> f64 {
        self.noma_sinr(g_sdm, self.pl_sdm)
    }

    /// SINR at D_n decoding `s_m` before SIC.
    #[inline]
    pub fn strong_decodes_weak(&self, g_sdn: f64) -> f64 {
        self.noma_sinr(g_sdn, self.pl_sdn)
    }

    /// Post-SIC SNR at D_n decoding its own `s_n`.
    #[inline]
    pub fn strong_own(&self, g_sdn: f64) -> f64 {
        self.gamma0 * self.a_n * g_sdn / self.pl_sdn
    }

    /// End-to-end SINR of the AF path D_n → R → D_m.
    #[inline]
    pub fn relayed(&self, g_dnr: f64, g_rdm: f64) -> f64 {
        let g0 = self.gamma0;
        g0 * g0 * g_rdm * g_dnr
            / (g0 * self.pl_dnr * g_rdm + g0 * self.pl_rdm * g_dnr + self.pl_rdm * self.pl_dnr)
    }

    /// Per-hop SNRs `(D_n→R, R→D_m)` of the relay path.
    pub fn hop_snrs(&self, g_dnr: f64, g_rdm: f64) -> (f64, f64) {
        (
            self.gamma0 * g_dnr / self.pl_dnr,
            self.gamma0 * g_rdm / self.pl_rdm,
        )
    }
}

pub fn sinr_direct_weak(cfg: &SystemConfig, geo: &Geometry, g: f64) -> f64 {
    LinkBudget::new(cfg, geo).direct_weak(g)
}

pub fn sinr_strong_decodes_weak(cfg: &SystemConfig, geo: &Geometry, g: f64) -> f64 {
    LinkBudget::new(cfg, geo).strong_decodes_weak(g)
}

pub fn snr_strong_own(cfg: &SystemConfig, geo: &Geometry, g: f64) -> f64 {
    LinkBudget::new(cfg, geo).strong_own(g)
}

pub fn sinr_relayed(cfg: &SystemConfig, geo: &Geometry, g_dnr: f64, g_rdm: f64) -> f64 {
    LinkBudget::new(cfg, geo).relayed(g_dnr, g_rdm)
}

/// Shannon threshold `2^R - 1` for a target rate `R`.
pub fn threshold_from_rate(rate: f64) -> Result<f64> {
    if rate >= 0.0 && rate.is_finite() {
        Ok(rate.exp2() - 1.0)
    } else {
        Err(Error::arg(format!("rate must be nonnegative, got {rate}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_geo() -> Geometry {
        // Equilateral triangles: every derived distance is 1.
        Geometry::from_degrees(1.0, 1.0, 1.0, 60.0, 60.0).unwrap()
    }

    #[test]
    fn geometry_examples() {
        let geo = Geometry::default();
        assert!((geo.d_dndm() - 28f64.sqrt()).abs() < 1e-12);
        assert!((geo.d_dndm() - 5.29150).abs() < 1e-5);
        // 44 - 8·sqrt(28)·cos 40°
        let expected = (44.0 - 8.0 * 28f64.sqrt() * 40f64.to_radians().cos()).sqrt();
        assert!((geo.d_rdm() - expected).abs() / expected < 1e-12);
        assert!((geo.d_rdm() - 3.401_733_464_654_089).abs() < 1e-12);

        let right = Geometry::from_degrees(3.0, 4.0, 1.0, 40.0, 90.0).unwrap();
        assert!((right.d_dndm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn geometry_rejects_degenerate_inputs() {
        assert!(Geometry::from_degrees(0.0, 6.0, 4.0, 40.0, 60.0).is_err());
        assert!(Geometry::from_degrees(4.0, -1.0, 4.0, 40.0, 60.0).is_err());
        assert!(Geometry::from_degrees(4.0, 6.0, 4.0, 0.0, 60.0).is_err());
        assert!(Geometry::from_degrees(4.0, 6.0, 4.0, 40.0, 180.0).is_err());
    }

    #[test]
    fn direct_weak_examples() {
        let geo = unit_geo();
        let cfg = SystemConfig {
            a_m: 1.0 - 1e-12,
            a_n: 1e-12,
            gamma0: 10.0,
            ..SystemConfig::default()
        };
        assert!((sinr_direct_weak(&cfg, &geo, 1.0) - 10.0).abs() < 1e-9);

        let cfg = SystemConfig::default().with_gamma0(10.0);
        assert!((sinr_direct_weak(&cfg, &geo, 1.0) - 1.75).abs() < 1e-12);
        let ceiling = sinr_direct_weak(&cfg, &geo, 1e100);
        assert!((ceiling - 0.7 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn strong_user_examples() {
        let geo = Geometry::default(); // d_SDn = 4
        let cfg = SystemConfig::default().with_gamma0(100.0);
        assert_eq!(sinr_strong_decodes_weak(&cfg, &geo, 0.0), 0.0);
        let v = sinr_strong_decodes_weak(&cfg, &geo, 2.0);
        assert!((v - 1.4 / 0.76).abs() < 1e-12);
        assert!((v - 1.84211).abs() < 1e-5);

        let cfg = SystemConfig::default().with_gamma0(160.0);
        assert_eq!(snr_strong_own(&cfg, &geo, 0.0), 0.0);
        assert!((snr_strong_own(&cfg, &geo, 1.0) - 3.0).abs() < 1e-12);
        let doubled = snr_strong_own(&cfg.clone().with_gamma0(320.0), &geo, 1.0);
        assert!((doubled - 6.0).abs() < 1e-12);
    }

    #[test]
    fn relayed_examples() {
        let geo = unit_geo();
        let cfg = SystemConfig::default().with_gamma0(10.0);
        assert_eq!(sinr_relayed(&cfg, &geo, 0.0, 3.0), 0.0);
        assert!((sinr_relayed(&cfg, &geo, 1.0, 1.0) - 100.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn relayed_matches_hop_form_and_is_symmetric() {
        let geo = Geometry::default();
        let cfg = SystemConfig::default().with_gamma0(37.0);
        let lb = LinkBudget::new(&cfg, &geo);
        for (g1, g2) in [(0.3, 2.0), (1.0, 1.0), (5.0, 0.01)] {
            let (s1, s2) = lb.hop_snrs(g1, g2);
            let v = lb.relayed(g1, g2);
            assert!((v - s1 * s2 / (s1 + s2 + 1.0)).abs() <= 1e-12 * v.max(1.0));
        }
        // Swap the hops: the D_n–R leg takes the R–D_m distance and gain.
        let swapped = LinkBudget {
            pl_dnr: lb.pl_rdm,
            pl_rdm: lb.pl_dnr,
            ..lb
        };
        let v = lb.relayed(0.4, 1.9);
        assert!((v - swapped.relayed(1.9, 0.4)).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_from_rate(0.0).unwrap(), 0.0);
        assert_eq!(threshold_from_rate(1.0).unwrap(), 1.0);
        assert_eq!(threshold_from_rate(2.0).unwrap(), 3.0);
        assert!(threshold_from_rate(-0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let bad_split = SystemConfig {
            a_m: 0.5,
            a_n: 0.5,
            ..SystemConfig::default()
        };
        assert!(bad_split.validate().is_err());
        assert!(SystemConfig::default().with_pair(6, 3).validate().is_err());
        assert!(SystemConfig::default().with_pair(3, 7).validate().is_err());
        let no_snr = SystemConfig::default().with_gamma0(0.0);
        assert!(no_snr.validate().is_err());
        let too_many = SystemConfig {
            users: 21,
            ..SystemConfig::default()
        };
        assert!(matches!(too_many.validate(), Err(Error::OutOfRange(_))));
    }

    proptest! {
        #[test]
        fn af_bounded_by_hops(g1 in 0.0f64..50.0, g2 in 0.0f64..50.0, db in -10.0f64..40.0) {
            let cfg = SystemConfig::default().with_gamma0(10f64.powf(db / 10.0));
            let lb = LinkBudget::new(&cfg, &Geometry::default());
            let (s1, s2) = lb.hop_snrs(g1, g2);
            let v = lb.relayed(g1, g2);
            prop_assert!(v >= 0.0);
            prop_assert!(v <= s1.min(s2) * (1.0 + 1e-12));
        }

        #[test]
        fn noma_sinr_monotone_and_capped(g in 0.0f64..100.0, dg in 1e-6f64..10.0, db in -10.0f64..40.0) {
            let cfg = SystemConfig::default().with_gamma0(10f64.powf(db / 10.0));
            let lb = LinkBudget::new(&cfg, &Geometry::default());
            let cap = cfg.sic_ceiling();
            for f in [LinkBudget::direct_weak, LinkBudget::strong_decodes_weak] {
                let lo = f(&lb, g);
                let hi = f(&lb, g + dg);
                prop_assert!(hi > lo);
                prop_assert!(hi <= cap);
            }
        }

        #[test]
        fn more_snr_never_hurts(g1 in 0.0f64..10.0, g2 in 0.0f64..10.0, db in -10.0f64..40.0, c in 1.0f64..100.0) {
            let geo = Geometry::default();
            let lo = SystemConfig::default().with_gamma0(10f64.powf(db / 10.0));
            let hi = lo.clone().with_gamma0(lo.gamma0 * c);
            let (a, b) = (LinkBudget::new(&lo, &geo), LinkBudget::new(&hi, &geo));
            prop_assert!(b.direct_weak(g1) >= a.direct_weak(g1));
            prop_assert!(b.strong_decodes_weak(g1) >= a.strong_decodes_weak(g1));
            prop_assert!(b.strong_own(g1) >= a.strong_own(g1));
            prop_assert!(b.relayed(g1, g2) >= a.relayed(g1, g2) * (1.0 - 1e-12));
        }

        #[test]
        fn layout_triangle_inequalities(
            d_sdn in 0.1f64..50.0, d_sdm in 0.1f64..50.0, d_dnr in 0.1f64..50.0,
            a1 in 1.0f64..179.0, a2 in 1.0f64..179.0,
        ) {
            let geo = Geometry::from_degrees(d_sdn, d_sdm, d_dnr, a1, a2).unwrap();
            let tol = 1e-9;
            let (x, y, z) = (d_sdn, d_sdm, geo.d_dndm());
            prop_assert!(z <= x + y + tol && x <= y + z + tol && y <= x + z + tol);
            let (x, y, z) = (geo.d_dndm(), d_dnr, geo.d_rdm());
            prop_assert!(z <= x + y + tol && x <= y + z + tol && y <= x + z + tol);
        }
    }
}
