//! Inner (conformal) radii `r(B, a)`.
//!
//! Analytic regions use closed forms plus the covariance rule
//! `r(T(B), T(a)) = r(B, a)·|T′(a)|`. Polygonal regions use a
//! walk-on-spheres estimate of `log r(B, a)`, the harmonic-measure average of
//! `log|ζ − a|` over the boundary seen from `a`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainGeometry, Region};
use crate::error::{invalid, Error, Result};
use crate::geometry::Polygon;
use crate::moebius::MoebiusMap;

/// Stream-splitting increment for per-chunk seeds.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Walks per independently seeded chunk. Fixed, so that results do not
/// depend on how many threads process the chunks.
const CHUNK: usize = 2048;
/// Default shell relative to the start point's clearance. Absorbing at most
/// `ε` away from the true exit point moves `ln|ζ − a|` by at most `ε/dist(a, ∂B)`,
/// whatever the size of the region.
pub const DEFAULT_SHELL: f64 = 1e-4;

/// Share of walks allowed to hit `max_steps` before the estimate is refused.
const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Wos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub method: Method,
    /// Walks dropped for exceeding the step budget.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub excluded: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl RadiusEstimate {
    pub fn analytic(value: f64) -> Self {
        RadiusEstimate {
            value,
            std_error: 0.0,
            samples: 0,
            method: Method::Analytic,
            excluded: 0,
        }
    }

    /// Standard error of `ln value`.
    pub fn log_std_error(&self) -> f64 {
        self.std_error / self.value
    }

    fn scaled(self, factor: f64) -> Self {
        RadiusEstimate {
            value: self.value * factor,
            std_error: self.std_error * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosConfig {
    /// Absorption distance; `None` means [`DEFAULT_SHELL`] times the distance
    /// from the start point to the boundary.
    pub epsilon_shell: Option<f64>,
    pub max_steps: u32,
    pub samples: usize,
    pub seed: u64,
    /// Thread count; `None` uses the global pool. Never changes the result.
    pub workers: Option<usize>,
}

impl Default for WosConfig {
    fn default() -> Self {
        WosConfig {
            epsilon_shell: None,
            max_steps: 100_000,
            samples: 100_000,
            seed: 0,
            workers: None,
        }
    }
}

impl WosConfig {
    pub fn with_samples(samples: usize, seed: u64) -> Self {
        WosConfig {
            samples,
            seed,
            ..Default::default()
        }
    }

    /// Same settings with an independent seed stream.
    pub fn reseeded(&self, salt: u64) -> Self {
        WosConfig {
            seed: self.seed ^ salt.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03),
            ..*self
        }
    }
}

/// Closed-form inner radius for disk, half-plane, disk-exterior and Möbius
/// images of those.
pub fn inner_radius_analytic(region: &Region, point: Complex64) -> Result<f64> {
    if !region.contains(point) {
        return Err(Error::NotInterior(point));
    }
    match region {
        Region::Disk { center, radius } => Ok((radius * radius - (point - center).norm_sqr()) / radius),
        Region::HalfPlane => Ok(2.0 * point.re),
        Region::DiskExterior { center, radius } => {
            // z ↦ center + R²/z carries Disk(0, R) onto the exterior
            let r2 = Complex64::new(radius * radius, 0.0);
            let map = MoebiusMap::new(*center, r2, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
            let base = Region::Disk {
                center: Complex64::new(0.0, 0.0),
                radius: *radius,
            };
            inner_radius_analytic(&Region::moebius_image(base, map), point)
        }
        Region::MoebiusImage { base, map } => {
            let pre = pull_back(map, point)?;
            Ok(inner_radius_analytic(base, pre)? * map.derivative(pre)?.norm())
        }
        Region::Polygon(_) => Err(Error::Unsupported(
            "polygonal regions have no closed-form radius; use inner_radius_wos".into(),
        )),
    }
}

fn pull_back(map: &MoebiusMap, point: Complex64) -> Result<Complex64> {
    map.inverse().apply(point).map_err(|_| {
        Error::Singular(format!("marked point {point} is the image of ∞ under the Möbius map"))
    })
}

/// Inner radius of any supported marked domain: closed form when possible,
/// walk-on-spheres otherwise.
pub fn inner_radius(domain: &DomainGeometry, config: &WosConfig) -> Result<RadiusEstimate> {
    region_radius(domain.region(), domain.marked_point(), config)
}

fn region_radius(region: &Region, point: Complex64, config: &WosConfig) -> Result<RadiusEstimate> {
    if region.is_analytic() {
        return inner_radius_analytic(region, point).map(RadiusEstimate::analytic);
    }
    match region {
        Region::Polygon(p) => inner_radius_wos(p, point, config),
        Region::MoebiusImage { base, map } => {
            let pre = pull_back(map, point)?;
            let factor = map.derivative(pre)?.norm();
            Ok(region_radius(base, pre, config)?.scaled(factor))
        }
        _ => unreachable!("analytic regions handled above"),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    count: usize,
    mean: f64,
    m2: f64,
    failed: usize,
}

impl ChunkStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: ChunkStats) -> ChunkStats {
        if self.count == 0 {
            return ChunkStats {
                failed: self.failed + other.failed,
                ..other
            };
        }
        if other.count == 0 {
            return ChunkStats {
                failed: self.failed + other.failed,
                ..self
            };
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        ChunkStats {
            count,
            mean: self.mean + delta * other.count as f64 / count as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64,
            failed: self.failed + other.failed,
        }
    }
}

/// One walk from `start`; returns `ln|ζ − start|` at absorption, or `None`
/// when the step budget runs out.
fn walk(poly: &Polygon, start: Complex64, eps: f64, max_steps: u32, rng: &mut ChaCha8Rng) -> Option<f64> {
    let mut x = start;
    let mut steps = 0;
    loop {
        // any circle inside the region is a valid jump; the exact nearest
        // point is only needed close to the boundary
        let mut radius = poly.distance_lower_bound(x);
        if radius <= eps {
            let c = poly.closest(x);
            if c.distance <= eps {
                return Some((c.point - start).norm().ln());
            }
            radius = c.distance;
        }
        if steps == max_steps {
            return None;
        }
        let (s, co) = (rng.random::<f64>() * TAU).sin_cos();
        x += Complex64::new(co, s) * radius;
        steps += 1;
    }
}

fn run_chunk(poly: &Polygon, start: Complex64, eps: f64, config: &WosConfig, chunk: usize) -> ChunkStats {
    let seed = config.seed.wrapping_add((chunk as u64).wrapping_mul(SEED_STRIDE));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = CHUNK.min(config.samples - chunk * CHUNK);
    let mut stats = ChunkStats::default();
    for _ in 0..len {
        match walk(poly, start, eps, config.max_steps, &mut rng) {
            Some(v) => stats.push(v),
            None => stats.failed += 1,
        }
    }
    stats
}

/// Walk-on-spheres estimate of `r(B, a)` for a polygonal region.
///
/// Each walk jumps to a uniform point on the largest circle around the
/// current position that stays in `B`, and is absorbed at the nearest
/// boundary point once within `epsilon_shell` of it. The estimate is
/// `exp(mean ln|ζ − a|)`; its standard error comes from the delta method.
pub fn inner_radius_wos(poly: &Polygon, point: Complex64, config: &WosConfig) -> Result<RadiusEstimate> {
    if config.samples == 0 {
        return Err(invalid("walk-on-spheres needs at least one sample"));
    }
    let clearance = poly.boundary_distance(point);
    if !poly.contains(point) || clearance == 0.0 {
        return Err(Error::NotInterior(point));
    }
    let eps = config.epsilon_shell.unwrap_or(DEFAULT_SHELL * clearance);
    if !(eps > 0.0) {
        return Err(invalid(format!("epsilon_shell {eps} must be positive")));
    }
    if clearance <= eps {
        return Err(Error::NotInterior(point));
    }
    let chunks: Vec<usize> = (0..config.samples.div_ceil(CHUNK)).collect();
    let compute = || -> Vec<ChunkStats> {
        chunks
            .par_iter()
            .map(|&i| run_chunk(poly, point, eps, config, i))
            .collect()
    };
    let per_chunk = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(compute),
        None => compute(),
    };
    let total = per_chunk.into_iter().fold(ChunkStats::default(), ChunkStats::merge);
    if total.failed as f64 > MAX_EXCLUDED_FRACTION * config.samples as f64 || total.count == 0 {
        return Err(Error::Numerical(format!(
            "{} of {} walks exceeded {} steps",
            total.failed, config.samples, config.max_steps
        )));
    }
    let value = total.mean.exp();
    let log_se = if total.count > 1 {
        (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt()
    } else {
        1.0
    };
    Ok(RadiusEstimate {
        value,
        std_error: value * log_se,
        samples: total.count,
        method: Method::Wos,
        excluded: total.failed,
    })
}

/// `Y₃ = ∏ r_k^{σ_k} / (|d₁−d₂|^{σ₁+σ₂−σ₃} |d₁−d₃|^{σ₁−σ₂+σ₃} |d₂−d₃|^{−σ₁+σ₂+σ₃})`,
/// invariant under Möbius maps when each `r_k` transforms with `|T′(d_k)|`.
pub fn y3(sigmas: [f64; 3], radii: [f64; 3], points: [Complex64; 3]) -> Result<f64> {
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("Y₃ radii must be positive"));
    }
    let [s1, s2, s3] = sigmas;
    let [d1, d2, d3] = points;
    let dist = [(d1 - d2).norm(), (d1 - d3).norm(), (d2 - d3).norm()];
    if dist.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Singular("Y₃ needs pairwise distinct points".into()));
    }
    let numerator: f64 = sigmas.iter().zip(radii).map(|(s, r)| s * r.ln()).sum();
    let denominator = (s1 + s2 - s3) * dist[0].ln() + (s1 - s2 + s3) * dist[1].ln() + (-s1 + s2 + s3) * dist[2].ln();
    Ok((numerator - denominator).exp())
}
