//! Order statistics of i.i.d. exponential channel power gains.
//!
//! Under Rayleigh fading the power gain `|h|²` of each source-to-user link is
//! exponential with mean `λ`. Users are indexed by ascending gain, so user `i`
//! sees the `i`-th smallest of `M` such draws. The CDF of that rank expands
//! into a finite sum of exponentials,
//!
//! ```text
//! F_i(x) = Σ_{k=0}^{i-1} Φ_{k,i} (1 - exp(-(M - i + k + 1) x / λ))
//! Φ_{k,i} = C(i-1, k) (-1)^k M! / ((M-i)! (i-1)! (M-i+k+1))
//! ```
//!
//! and every `Φ_{k,i}` is an integer, so they are computed exactly. The same
//! CDF is also a binomial tail in `p = 1 - exp(-x/λ)`, which is the form
//! [`ordered_cdf`] evaluates; [`ordered_cdf_expansion`] keeps the
//! coefficient form.

use rand::RngCore;

use crate::error::{Error, Result};

/// Largest user population accepted. Beyond this the alternating
/// coefficient sums lose too much precision in `f64`.
pub const MAX_USERS: usize = 20;

/// Rank `i` of `M` exponential(mean `lambda`) gains.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatSpec {
    users: usize,
    rank: usize,
    lambda: f64,
    phi: Vec<f64>,
}

impl OrderStatSpec {
    pub fn new(users: usize, rank: usize, lambda: f64) -> Result<Self> {
        check_rank(rank, users)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::arg(format!(
                "mean gain must be positive, got {lambda}"
            )));
        }
        let phi = (0..rank)
            .map(|k| phi_exact(k, rank, users) as f64)
            .collect();
        Ok(Self {
            users,
            rank,
            lambda,
            phi,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Decay rate (before dividing by λ) of the `k`-th exponential term.
    fn rate(&self, k: usize) -> f64 {
        (self.users - self.rank + k + 1) as f64
    }
}

fn check_rank(rank: usize, users: usize) -> Result<()> {
    if users == 0 || users > MAX_USERS {
        return Err(Error::OutOfRange(format!(
            "user count {users} outside 1..={MAX_USERS}"
        )));
    }
    if rank == 0 || rank > users {
        return Err(Error::arg(format!("rank {rank} outside 1..={users}")));
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

/// Signed integer value of Φ_{k,i}. `M!/((M-i)!(i-1)!)` is `i·C(M, i)`; the
/// final division is exact.
fn phi_exact(k: usize, rank: usize, users: usize) -> i128 {
    let (m, i, k) = (users as u128, rank as u128, k as u128);
    let numerator = i * binomial(m, i) * binomial(i - 1, k);
    let denom = m - i + k + 1;
    debug_assert_eq!(numerator % denom, 0);
    let magnitude = (numerator / denom) as i128;
    if k % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Coefficient Φ_{k,i} of the rank-`i` CDF expansion among `users` gains.
pub fn phi_coefficient(k: usize, rank: usize, users: usize) -> Result<f64> {
    check_rank(rank, users)?;
    if k >= rank {
        return Err(Error::arg(format!("term index {k} outside 0..{rank}")));
    }
    Ok(phi_exact(k, rank, users) as f64)
}

/// Density of the rank-`i` gain at `x`:
/// `i·C(M, i)/λ · (1 - e^{-x/λ})^{i-1} · e^{-(M-i+1)x/λ}`.
pub fn ordered_pdf(spec: &OrderStatSpec, x: f64) -> Result<f64> {
    check_point(x)?;
    let i = spec.rank;
    let prefactor = (i as u128 * binomial(spec.users as u128, i as u128)) as f64 / spec.lambda;
    let u = x / spec.lambda;
    let below = -(-u).exp_m1();
    Ok(prefactor * below.powi(i as i32 - 1) * (-(spec.rate(0)) * u).exp())
}

/// Density as the alternating exponential sum of the expansion form.
pub fn ordered_pdf_expansion(spec: &OrderStatSpec, x: f64) -> Result<f64> {
    check_point(x)?;
    let i = spec.rank as u128;
    let prefactor = (i * binomial(spec.users as u128, i)) as f64 / spec.lambda;
    let mut sum = Kahan::default();
    for k in 0..spec.rank {
        let c = binomial(i - 1, k as u128) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum.add(sign * c * (-spec.rate(k) * x / spec.lambda).exp());
    }
    Ok((prefactor * sum.total()).max(0.0))
}

/// CDF of the rank-`i` gain at `x`, the probability that at least `i` of the
/// `M` gains fall below `x`. Summed as a binomial tail of positive terms
/// (or one minus the complementary tail near 1), which keeps full relative
/// accuracy in the lower tail where the alternating expansion cancels.
pub fn ordered_cdf(spec: &OrderStatSpec, x: f64) -> Result<f64> {
    check_point(x)?;
    let u = x / spec.lambda;
    let below = -(-u).exp_m1();
    let above = (-u).exp();
    let m = spec.users;
    let term = |j: usize| {
        binomial(m as u128, j as u128) as f64 * below.powi(j as i32) * above.powi((m - j) as i32)
    };
    let upper: f64 = (spec.rank..=m).map(term).sum();
    let lower: f64 = (0..spec.rank).map(term).sum();
    // take whichever tail is small so the result keeps full relative accuracy
    let total = if upper <= lower { upper } else { 1.0 - lower };
    Ok(total.clamp(0.0, 1.0))
}

/// CDF through the coefficient expansion `Σ_k Φ_{k,i} (1 - e^{-(M-i+k+1)x/λ})`.
/// Exact in exact arithmetic; in floating point its absolute error is about
/// `ε·Σ|Φ_{k,i}|`.
pub fn ordered_cdf_expansion(spec: &OrderStatSpec, x: f64) -> Result<f64> {
    check_point(x)?;
    let mut sum = Kahan::default();
    for (k, phi) in spec.phi.iter().enumerate() {
        sum.add(phi * -(-spec.rate(k) * x / spec.lambda).exp_m1());
    }
    Ok(sum.total().clamp(0.0, 1.0))
}

fn check_point(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("gain must be nonnegative, got {x}")))
    }
}

/// Neumaier-compensated accumulator for the alternating coefficient sums.
#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Exponential variate with the given mean from one 64-bit word, by
/// inversion. Exactly one word per variate keeps stream positions
/// predictable for the Monte-Carlo engine.
#[inline]
pub fn exponential_from_bits(bits: u64, mean: f64) -> f64 {
    let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -mean * (-u).ln_1p()
}

/// Fills `out` with i.i.d. exponential(mean `lambda`) draws sorted ascending.
pub fn fill_ordered_gains<R: RngCore + ?Sized>(out: &mut [f64], lambda: f64, rng: &mut R) {
    for g in out.iter_mut() {
        *g = exponential_from_bits(rng.next_u64(), lambda);
    }
    out.sort_unstable_by(f64::total_cmp);
}

/// Draws `users` i.i.d. exponential(mean `lambda`) gains, sorted ascending.
pub fn sample_ordered_gains<R: RngCore + ?Sized>(
    users: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if users == 0 {
        return Err(Error::arg("need at least one user"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!(
            "mean gain must be positive, got {lambda}"
        )));
    }
    let mut gains = vec![0.0; users];
    fill_ordered_gains(&mut gains, lambda, rng);
    Ok(gains)
}
