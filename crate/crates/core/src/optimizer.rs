//! The simplex problem `∑ ln F(α_k) → max` subject to `∑ α_k = 2`, the check
//! that no stationary point has a gap above 1, and the randomized
//! certification harness for the product bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{log_big_f, log_j_functional, log_theorem1_bound, phi, Gamma};
use crate::domain::{DomainGeometry, Region};
use crate::error::{invalid, Error, Result};
use crate::radii::{inner_radius_analytic, SEED_STRIDE};
use crate::system::{log_l_gamma, normalize_system, RadialSystem};

/// Lower clamp keeping iterates inside the open simplex.
pub const ALPHA_FLOOR: f64 = 1e-9;
pub const DEFAULT_STARTS: usize = 20;
pub const MAX_ITERATIONS: usize = 100_000;

/// Gaps `α_k > 0` with `∑ α_k = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("empty gap list"));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 2.0)) {
            return Err(invalid(format!("gap {a} is outside (0, 2)")));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 2.0).abs() > 1e-10 {
            return Err(invalid(format!("gaps sum to {total}, expected 2")));
        }
        Ok(SimplexPoint(alphas))
    }

    pub fn equal(n: usize) -> Self {
        SimplexPoint(vec![2.0 / n as f64; n])
    }

    pub fn alphas(&self) -> &[f64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// `∑ ln F(α_k)`.
    pub fn objective(&self) -> f64 {
        log_objective(&self.0)
    }

    /// `max_k |Φ(α_k) − mean Φ|`, zero at stationary points.
    pub fn stationarity_residual(&self) -> f64 {
        let p: Vec<f64> = self.0.iter().map(|&a| phi(a).unwrap_or(f64::NAN)).collect();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        p.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
    }

    /// `‖α − 2/n‖∞`.
    pub fn distance_to_equal(&self) -> f64 {
        let e = 2.0 / self.n() as f64;
        self.0.iter().map(|a| (a - e).abs()).fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(v)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Vec<f64> {
        p.0
    }
}

fn log_objective(alphas: &[f64]) -> f64 {
    alphas.iter().map(|&a| log_big_f(a).unwrap_or(f64::NEG_INFINITY)).sum()
}

/// One accepted ascent step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: SimplexPoint,
    pub optimum: SimplexPoint,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub best: SimplexPoint,
    pub objective: f64,
    /// Trace of the start that produced `best`.
    pub trace: Vec<TraceStep>,
    pub starts: Vec<StartOutcome>,
}

impl Optimum {
    /// Largest `‖·‖∞` distance between any start's optimum and `best`.
    pub fn spread(&self) -> f64 {
        self.starts
            .iter()
            .map(|s| {
                s.optimum
                    .alphas()
                    .iter()
                    .zip(self.best.alphas())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub starts: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            tol: 1e-9,
            max_iterations: MAX_ITERATIONS,
            starts: DEFAULT_STARTS,
        }
    }
}

/// Projection of `(Φ(α_1), …, Φ(α_n))` onto the zero-sum hyperplane.
fn projected_gradient(alphas: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = alphas.iter().map(|&a| phi(a).unwrap_or(f64::NAN)).collect();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    g.into_iter().map(|x| x - mean).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Uniform point of the scaled simplex (flat Dirichlet).
fn dirichlet_gaps(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let s: f64 = w.iter().sum();
    let mut a: Vec<f64> = w.iter().map(|x| (2.0 * x / s).max(ALPHA_FLOOR)).collect();
    let total: f64 = a.iter().sum();
    a.iter_mut().for_each(|x| *x *= 2.0 / total);
    a
}

/// Projected-gradient ascent with Armijo backtracking from `start`.
pub fn ascend(start: &[f64], opts: &AscentOptions) -> Result<(SimplexPoint, Vec<TraceStep>)> {
    let mut alpha = SimplexPoint::new(start.to_vec())?.0;
    let mut f = log_objective(&alpha);
    let mut trace = Vec::new();
    let mut step: f64 = 0.1;
    for it in 0..opts.max_iterations {
        let g = projected_gradient(&alpha);
        let gn = norm(&g);
        if !gn.is_finite() {
            return Err(Error::Numerical(format!("non-finite gradient at {alpha:?}")));
        }
        if gn <= opts.tol {
            return Ok((SimplexPoint(alpha), trace));
        }
        // largest step keeping every gap above the floor
        let cap = g
            .iter()
            .zip(&alpha)
            .filter(|(gk, _)| **gk < 0.0)
            .map(|(gk, a)| (a - ALPHA_FLOOR) / -gk)
            .fold(f64::INFINITY, f64::min);
        let mut s = (2.0 * step).min(cap);
        // rounding noise of a sum of n logarithms of order one
        let slack = 64.0 * f64::EPSILON * (alpha.len() as f64 + f.abs());
        let (next, fnext) = loop {
            let cand: Vec<f64> = alpha.iter().zip(&g).map(|(a, gk)| (a + s * gk).max(ALPHA_FLOOR)).collect();
            let fc = log_objective(&cand);
            // within rounding noise of f the gradient norm decides
            let noisy = (fc - f).abs() <= slack;
            if fc >= f + 1e-4 * s * gn * gn - slack && (!noisy || norm(&projected_gradient(&cand)) < gn) {
                break (cand, fc);
            }
            s *= 0.5;
            if s < 1e-300 {
                return Err(Error::Numerical(format!("line search failed at {alpha:?}")));
            }
        };
        // re-impose ∑α = 2 after clamping
        let total: f64 = next.iter().sum();
        alpha = next.into_iter().map(|a| a * 2.0 / total).collect();
        f = if total == 2.0 { fnext } else { log_objective(&alpha) };
        step = s;
        trace.push(TraceStep {
            iteration: it + 1,
            objective: f,
            gradient_norm: gn,
            step: s,
        });
    }
    Err(Error::Numerical(format!(
        "no convergence within {} iterations",
        opts.max_iterations
    )))
}

/// Maximizes `∏ F(α_k)` over the simplex from 20 uniform random starts.
pub fn maximize_product_f(n: usize, seed: u64) -> Result<Optimum> {
    maximize_product_f_with(n, seed, &AscentOptions::default())
}

pub fn maximize_product_f_with(n: usize, seed: u64, opts: &AscentOptions) -> Result<Optimum> {
    if n < 2 {
        return Err(invalid(format!("n = {n}, need n >= 2")));
    }
    if opts.starts == 0 {
        return Err(invalid("need at least one start"));
    }
    let runs: Vec<Result<(StartOutcome, Vec<TraceStep>)>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((i as u64).wrapping_mul(SEED_STRIDE)));
            let start = dirichlet_gaps(n, &mut rng);
            let (optimum, trace) = ascend(&start, opts)?;
            Ok((
                StartOutcome {
                    start: SimplexPoint(start),
                    objective: optimum.objective(),
                    iterations: trace.len(),
                    optimum,
                },
                trace,
            ))
        })
        .collect();
    let mut starts: Vec<StartOutcome> = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, Vec<TraceStep>)> = None;
    for run in runs {
        let (outcome, trace) = run?;
        if best.as_ref().is_none_or(|(b, _)| outcome.objective > starts[*b].objective) {
            best = Some((starts.len(), trace));
        }
        starts.push(outcome);
    }
    let (index, trace) = best.expect("at least one start");
    Ok(Optimum {
        best: starts[index].optimum.clone(),
        objective: starts[index].objective,
        trace,
        starts,
    })
}

/// Outcome of testing a candidate stationary point for a gap above 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExclusionVerdict {
    /// No gap exceeds 1.
    Survives,
    /// `Φ(α_max) < Φ(2 − α_max) ≤ Φ(α_k)` for every other `k`, so the `Φ`
    /// values cannot all coincide.
    Rejected {
        index: usize,
        phi_max: f64,
        phi_reflected: f64,
        phi_min_other: f64,
    },
    /// A gap exceeds 1 but the chain of inequalities did not hold numerically.
    Inconclusive { index: usize },
}

impl ExclusionVerdict {
    pub fn survives(&self) -> bool {
        matches!(self, ExclusionVerdict::Survives)
    }
}

pub fn exclusion_check(point: &SimplexPoint) -> Result<ExclusionVerdict> {
    let a = point.alphas();
    let (index, &amax) = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    if amax <= 1.0 {
        return Ok(ExclusionVerdict::Survives);
    }
    let phi_max = phi(amax)?;
    let phi_reflected = phi(2.0 - amax)?;
    let mut phi_min_other = f64::INFINITY;
    for (k, &ak) in a.iter().enumerate() {
        if k != index {
            phi_min_other = phi_min_other.min(phi(ak)?);
        }
    }
    // for n = 2 the second link is an equality up to rounding
    let slack = 1e-12 * (1.0 + phi_reflected.abs());
    if phi_max < phi_reflected && phi_reflected <= phi_min_other + slack {
        Ok(ExclusionVerdict::Rejected {
            index,
            phi_max,
            phi_reflected,
            phi_min_other,
        })
    } else {
        Ok(ExclusionVerdict::Inconclusive { index })
    }
}

/// Radius cap as a fraction of the distance to the nearest other centre.
pub const DISK_CAP: f64 = 0.49;

/// Disjoint disks: `B_0` around 0 and `B_k` around `a_k`, each radius uniform
/// in `(0, 0.49·d]` with `d` the distance to the nearest other centre.
pub fn random_disk_config(system: &RadialSystem, seed: u64) -> Result<Vec<DomainGeometry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Complex64> = std::iter::once(Complex64::new(0.0, 0.0))
        .chain(system.points().iter().copied())
        .collect();
    disks_with(&centres, |_| 1.0 - rng.random::<f64>())
}

/// Disks at `centres` with radius `fraction(i)·0.49·d_i`, `fraction ∈ (0, 1]`.
pub fn disks_with(centres: &[Complex64], mut fraction: impl FnMut(usize) -> f64) -> Result<Vec<DomainGeometry>> {
    centres
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let d = centres
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &o)| (o - c).norm())
                .fold(f64::INFINITY, f64::min);
            DomainGeometry::new(Region::disk(c, fraction(i) * DISK_CAP * d)?, c)
        })
        .collect()
}

/// One evaluated configuration. `j_value`, `bound_value` and `ratio` are
/// exponentials of the log fields and may underflow for large `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub gamma: f64,
    pub alphas: Vec<f64>,
    pub j_value: f64,
    pub bound_value: f64,
    pub ratio: f64,
    pub l_gamma: f64,
    pub method: String,
    pub log_j: f64,
    pub log_bound: f64,
}

impl BoundReport {
    /// Report for domains `B_0, …, B_n` of `system`, with radii supplied in
    /// that order.
    pub fn from_radii(system: &RadialSystem, gamma: f64, radii: &[f64], method: &str) -> Result<Self> {
        let n = system.n();
        if radii.len() != n + 1 {
            return Err(invalid(format!("expected {} radii, got {}", n + 1, radii.len())));
        }
        let log_l = log_l_gamma(system, gamma)?;
        let log_j = log_j_functional(gamma, radii[0], &radii[1..])?;
        // the bound holds on L = 1 and scales by L for other systems
        let log_bound = log_theorem1_bound(n, gamma, system.alphas())? + log_l;
        Ok(BoundReport {
            n,
            gamma,
            alphas: system.alphas().to_vec(),
            j_value: log_j.exp(),
            bound_value: log_bound.exp(),
            ratio: (log_j - log_bound).exp(),
            l_gamma: log_l.exp(),
            method: method.to_owned(),
            log_j,
            log_bound,
        })
    }
}

/// Smallest gap of a random system. Below it `ln L^(γ)` grows like `1/α` and
/// the normalizing factor underflows.
const MIN_RANDOM_GAP: f64 = 0.01;

/// Random radial system: moduli log-uniform in `[0.5, 2]`, flat Dirichlet gaps
/// shifted to stay above [`MIN_RANDOM_GAP`].
pub fn random_system(n: usize, rng: &mut ChaCha8Rng) -> Result<RadialSystem> {
    let moduli: Vec<f64> = (0..n).map(|_| (rng.random_range(-1.0..=1.0) * std::f64::consts::LN_2).exp()).collect();
    let shrink = 1.0 - 0.5 * n as f64 * MIN_RANDOM_GAP;
    let mut alphas: Vec<f64> = dirichlet_gaps(n, rng).into_iter().map(|a| shrink * a + MIN_RANDOM_GAP).collect();
    let fix = 2.0 - alphas.iter().sum::<f64>();
    alphas[n - 1] += fix;
    RadialSystem::from_polar(&moduli, &alphas)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub n: usize,
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    pub max_ratio: f64,
    /// Trials with `ratio > 1 + 1e-12`.
    pub violations: usize,
    pub reports: Vec<BoundReport>,
}

/// Certifies `J ≤ bound` on `trials` random disk configurations over
/// `L^(γ)`-normalized random systems, with closed-form disk radii.
pub fn verify_inequality(n: usize, gamma: f64, trials: usize, seed: u64) -> Result<Verification> {
    Gamma::new(gamma)?;
    if n < 2 {
        return Err(invalid(format!("n = {n}, need n >= 2")));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((t as u64).wrapping_mul(SEED_STRIDE)));
            let system = normalize_system(&random_system(n, &mut rng)?, gamma)?;
            let domains = random_disk_config(&system, rng.random())?;
            let radii = domains
                .iter()
                .map(|d| inner_radius_analytic(d.region(), d.marked_point()))
                .collect::<Result<Vec<f64>>>()?;
            BoundReport::from_radii(&system, gamma, &radii, "analytic-disks")
        })
        .collect::<Result<Vec<BoundReport>>>()?;
    let max_ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let violations = reports.iter().filter(|r| r.ratio > 1.0 + 1e-12).count();
    Ok(Verification {
        n,
        gamma,
        trials,
        seed,
        max_ratio,
        violations,
        reports,
    })
}
