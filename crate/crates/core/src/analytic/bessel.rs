//! Modified Bessel function of the second kind, order one.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-17;
const MAX_ITER: usize = 10_000;

/// Below this argument the power series is used, above it the continued
/// fraction.
const SERIES_LIMIT: f64 = 2.0;

/// `K₁(x)` for `x > 0`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::arg(format!("K1 needs a positive argument, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= SERIES_LIMIT {
        k1_series(x)
    } else {
        k0_k1_continued_fraction(x).1
    })
}

/// `x·K₁(x)`, continuous at the origin where it tends to 1.
pub(crate) fn x_k1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x * bessel_k1(x).expect("nonnegative argument")
    }
}

// K1(x) = 1/x + ln(x/2) I1(x) - (x/4) Σ [ψ(k+1) + ψ(k+2)] (x²/4)^k / (k!(k+1)!)
fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0; // (x²/4)^k / (k!(k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut i1_sum = 0.0;
    let mut psi_sum = 0.0;
    for k in 0..MAX_ITER {
        let kf = k as f64;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i1_sum += term;
        psi_sum += (psi_k1 + psi_k2) * term;
        if term < EPS * i1_sum {
            break;
        }
        term *= q / ((kf + 1.0) * (kf + 2.0));
        psi_k1 = psi_k2;
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * psi_sum
}

/// Steed's method on Temme's second continued fraction; returns `(K₀, K₁)`.
fn k0_k1_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -c * a / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
