//! Scalar bound layer: `F`, `Φ = (ln F)′`, `H`, `t₀`, the functional `J` and
//! the closed-form upper bounds. Every product is accumulated in log space.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exponent weight of `r(B_0, 0)` in the functional.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    /// `γ ∈ (0, 1]`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::OutOfRange {
                what: "gamma",
                value: gamma,
                range: "(0, 1]",
            });
        }
        Ok(Gamma(gamma))
    }

    /// `γ ∈ (0, 0.2]`, the range of the product-of-gaps bound.
    pub fn restricted(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 0.2) {
            return Err(Error::OutOfRange {
                what: "gamma",
                value: gamma,
                range: "(0, 0.2]",
            });
        }
        Ok(Gamma(gamma))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;

    fn try_from(g: f64) -> Result<Self> {
        Gamma::new(g)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

/// `x ln x` with the continuous value 0 at `x = 0`.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln F(x) = (x²+6)ln2 + (x²+1)ln x − ½(2−x)²ln(2−x) − ½(2+x)²ln(2+x)` on `(0, 2]`.
pub fn log_big_f(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 2.0) {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            range: "(0, 2]",
        });
    }
    let (m, p) = (2.0 - x, 2.0 + x);
    Ok((x * x + 6.0) * LN_2 + (x * x + 1.0) * x.ln() - 0.5 * m * xlogx(m) - 0.5 * p * xlogx(p))
}

pub fn big_f(x: f64) -> Result<f64> {
    log_big_f(x).map(f64::exp)
}

fn check_open(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            range: "(0, 2)",
        });
    }
    Ok(())
}

/// `Φ(α) = F′(α)/F(α)`.
pub fn phi(alpha: f64) -> Result<f64> {
    check_open(alpha)?;
    let a = alpha;
    Ok(2.0 * a * LN_2 + 2.0 * a * a.ln() + (a * a + 1.0) / a + (2.0 - a) * (2.0 - a).ln()
        - (2.0 + a) * (2.0 + a).ln()
        - a)
}

/// `Φ′(α) = 2ln2 + 2lnα − 1/α² − ln(4 − α²)`.
fn phi_prime(a: f64) -> f64 {
    2.0 * LN_2 + 2.0 * a.ln() - 1.0 / (a * a) - (4.0 - a * a).ln()
}

/// `H(α) = Φ(α) − Φ(2 − α)`.
pub fn h_func(alpha: f64) -> Result<f64> {
    check_open(alpha)?;
    Ok(phi(alpha)? - phi(2.0 - alpha)?)
}

/// The minimizer `t₀` of `Φ` on `(0, 2)`.
pub fn find_t0() -> Result<f64> {
    find_t0_in(0.5, 1.9)
}

/// `t₀` searched inside `[lo, hi] ⊂ (0, 2)`.
///
/// `Φ′` is increasing on `(0, 2)`, so the minimizer of `Φ` is the unique root
/// of `Φ′`; bisection on it reaches `1e-12` where a golden-section search on
/// the flat `Φ` would stall near `1e-8`.
pub fn find_t0_in(lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && lo < hi && hi < 2.0) {
        return Err(invalid(format!("bad bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    if !(phi_prime(a) < 0.0 && phi_prime(b) > 0.0) {
        return Err(Error::Numerical(format!("Φ has no interior minimum in [{lo}, {hi}]")));
    }
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if phi_prime(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `ln J = γ ln r₀ + ∑ ln r_k`.
pub fn log_j_functional(gamma: f64, r0: f64, radii: &[f64]) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma,
            range: "(0, ∞)",
        });
    }
    if let Some(r) = std::iter::once(&r0).chain(radii).find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(invalid(format!("radius {r} is not positive")));
    }
    Ok(gamma * r0.ln() + radii.iter().map(|r| r.ln()).sum::<f64>())
}

/// `J = r₀^γ ∏ r_k`.
pub fn j_functional(gamma: f64, r0: f64, radii: &[f64]) -> Result<f64> {
    log_j_functional(gamma, r0, radii).map(f64::exp)
}

fn check_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("n = {n}, need n >= 2")));
    }
    Ok(n as f64)
}

fn log_alpha_product(n: usize, alphas: &[f64]) -> Result<f64> {
    if alphas.len() != n {
        return Err(invalid(format!("expected {n} gaps, got {}", alphas.len())));
    }
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(invalid(format!("gap {a} is not positive")));
    }
    let total: f64 = alphas.iter().sum();
    if (total - 2.0).abs() > 1e-10 {
        return Err(invalid(format!("gaps sum to {total}, expected 2")));
    }
    Ok(alphas.iter().map(|a| a.ln()).sum())
}

/// `ln` of `γ^{−n/4} (∏α_k)^{1/2} F(2√γ/n)^{n/2}`.
pub fn log_theorem1_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    let nf = check_n(n)?;
    let g = Gamma::new(gamma)?.value();
    let lp = log_alpha_product(n, alphas)?;
    Ok(-0.25 * nf * g.ln() + 0.5 * lp + 0.5 * nf * log_big_f(2.0 * g.sqrt() / nf)?)
}

pub fn theorem1_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    log_theorem1_bound(n, gamma, alphas).map(f64::exp)
}

/// `ln` of `4^{n+γ/n} γ^{γ/n} nⁿ (n²−γ)^{−n−γ/n} ((n−√γ)/(n+√γ))^{2√γ}`.
pub fn log_corollary1_bound(n: usize, gamma: f64) -> Result<f64> {
    let nf = check_n(n)?;
    let g = Gamma::new(gamma)?.value();
    let s = g.sqrt();
    let e = nf + g / nf;
    Ok(e * 4f64.ln() + (g / nf) * g.ln() + nf * nf.ln() - e * (nf * nf - g).ln()
        + 2.0 * s * ((nf - s) / (nf + s)).ln())
}

pub fn corollary1_bound(n: usize, gamma: f64) -> Result<f64> {
    log_corollary1_bound(n, gamma).map(f64::exp)
}

/// Common tail `2ⁿ(2/n)^{n/2} (4γ/n²)^{γ/n} (1−γ/n²)^{−n−γ/n} ((1−√γ/n)/(1+√γ/n))^{2√γ}`.
fn log_gap_tail(nf: f64, g: f64) -> f64 {
    let s = g.sqrt();
    nf * LN_2 + 0.5 * nf * (2.0 / nf).ln() + (g / nf) * (4.0 * g / (nf * nf)).ln()
        - (nf + g / nf) * (1.0 - g / (nf * nf)).ln()
        + 2.0 * s * ((1.0 - s / nf) / (1.0 + s / nf)).ln()
}

/// `ln` of `(∏α_k)^{1/2}` times the common tail.
pub fn log_corollary2_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    let nf = check_n(n)?;
    let g = Gamma::new(gamma)?.value();
    Ok(0.5 * log_alpha_product(n, alphas)? + log_gap_tail(nf, g))
}

pub fn corollary2_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    log_corollary2_bound(n, gamma, alphas).map(f64::exp)
}

/// `ln` of `∏α_k` times the common tail; only for `γ ∈ (0, 0.2]`.
pub fn log_corollary3_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    let nf = check_n(n)?;
    let g = Gamma::restricted(gamma)?.value();
    Ok(log_alpha_product(n, alphas)? + log_gap_tail(nf, g))
}

pub fn corollary3_bound(n: usize, gamma: f64, alphas: &[f64]) -> Result<f64> {
    log_corollary3_bound(n, gamma, alphas).map(f64::exp)
}

/// Same closed form as [`corollary1_bound`]; it bounds `J` for any system
/// with `L^(γ) = 1`.
pub fn corollary4_bound(n: usize, gamma: f64) -> Result<f64> {
    corollary1_bound(n, gamma)
}

/// Bound on `J` for a system with `L^(γ)(A_n) = l`, using `J(tA) = t^{n+γ} J(A)`.
pub fn corollary4_scaled_bound(n: usize, gamma: f64, l: f64) -> Result<f64> {
    if !(l.is_finite() && l > 0.0) {
        return Err(invalid(format!("L = {l} is not positive")));
    }
    Ok((log_corollary1_bound(n, gamma)? + l.ln()).exp())
}
