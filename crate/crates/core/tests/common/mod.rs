//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

const GL_POINTS: usize = 20;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * gauss_legendre()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m);
    let right = gl_panel(f, m, b);
    let diff = (left + right - whole).abs();
    assert!(diff.is_finite(), "non-finite integrand on [{a}, {b}]");
    // stop at the tolerance or once the panels agree to rounding
    if depth == 0 || diff <= tol || diff <= 1e-15 * (left.abs() + right.abs()) {
        return left + right;
    }
    adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive 20-point Gauss–Legendre on [a, b] to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let f: &dyn Fn(f64) -> f64 = &f;
    // a few uniform panels first so narrow features are not missed
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| {
            let (lo, hi) = (a + j as f64 * h, a + (j + 1) as f64 * h);
            adapt(f, lo, hi, gl_panel(f, lo, hi), tol / panels as f64, 40)
        })
        .sum()
}

/// ∫_0^∞ f(u) du for an integrand that is negligible beyond `span`, computed
/// in the variable s = ln u so features near the origin are resolved.
pub fn integrate_from_zero(f: impl Fn(f64) -> f64, span: f64, tol: f64) -> f64 {
    let s_lo = (1e-24 * span).ln();
    let s_hi = span.ln();
    integrate(
        |s| {
            let u = s.exp();
            f(u) * u
        },
        s_lo,
        s_hi,
        tol,
    )
}

/// Relay-link outage by direct quadrature of its defining integral
/// 1 - ∫_a^∞ (1/λr) e^{-x/λr} exp(-γ d_n (γ0 x + d_r) / (γ0 (γ0 x - d_r γ) λn)) dx,
/// a = d_r γ / γ0, with d_n = d_DnR^θ and d_r = d_RDm^θ. Integrated in the
/// offset u = x - a, where the denominator is exactly γ0² u.
pub fn relay_outage_by_quadrature(
    gamma0: f64,
    gamma_th: f64,
    pl_dnr: f64,
    pl_rdm: f64,
    lambda_dnr: f64,
    lambda_rdm: f64,
) -> f64 {
    let a = pl_rdm * gamma_th / gamma0;
    let integrand = |u: f64| {
        let hop = (-gamma_th * pl_dnr * (gamma0 * (a + u) + pl_rdm)
            / (gamma0 * gamma0 * u * lambda_dnr))
            .exp();
        (-u / lambda_rdm).exp() / lambda_rdm * hop
    };
    let tail = (-a / lambda_rdm).exp();
    1.0 - tail * integrate_from_zero(integrand, 80.0 * lambda_rdm, 1e-14)
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let f = cdf(x);
            f64::max((j + 1) as f64 / n - f, f - j as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// High-precision K1 reference values, `(x, K1(x))`.
pub fn k1_reference() -> Vec<(f64, f64)> {
    let text = include_str!("../fixtures/k1_reference.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let (x, k) = line.split_once(',').expect("two columns");
            (x.parse().unwrap(), k.parse().unwrap())
        })
        .collect()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64))
        .collect()
}
