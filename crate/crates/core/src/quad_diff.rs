//! The extremal quadratic differential
//! `Q(w)dw² = −((n²−γ)wⁿ + γRⁿ)/(w²(wⁿ−Rⁿ)²) dw²`.
//!
//! Double poles sit at 0 and at the n-th roots of `Rⁿ`; the simple zeros
//! solve `wⁿ = −γRⁿ/(n²−γ)`; `∞` is a zero of order `n − 2`. Horizontal
//! trajectories (`Q dw² > 0`) around each double pole are closed, and the
//! circular domains are:
//!
//! * `B_0`, swept by the loops around 0, bounded by the `n` critical arcs that
//!   join consecutive zeros;
//! * the petals `B_k ∋ a_k`, each bounded by one of those arcs and by the two
//!   critical rays running from its end zeros to `∞`.
//!
//! Petals are unbounded, so they are stored through `w ↦ 1/w` as
//! [`Region::MoebiusImage`] of a polygon.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Gamma;
use crate::domain::{DomainGeometry, Region};
use crate::error::{invalid, Error, Result};
use crate::geometry::Polygon;
use crate::moebius::MoebiusMap;
use crate::system::RadialSystem;

/// Default trace step relative to `R`.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default trajectory length budget in steps.
pub const DEFAULT_MAX_STEPS: f64 = 1e4;

/// Local error tolerance per step, relative to `R`.
const STEP_TOL: f64 = 1e-11;
/// Petal polygons cut the corner at the image of `∞` at this radius (in `1/R` units).
const CORNER_CUT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdParams {
    pub n: usize,
    pub gamma: f64,
    /// Scale: 1 for normalized systems, `L^{1/(n+γ)}` in general.
    pub r: f64,
}

impl QdParams {
    pub fn new(n: usize, gamma: f64, r: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("n = {n}, need n >= 2")));
        }
        Gamma::new(gamma)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(format!("scale R = {r} is not positive")));
        }
        Ok(QdParams { n, gamma, r })
    }

    pub fn unit(n: usize, gamma: f64) -> Result<Self> {
        Self::new(n, gamma, 1.0)
    }

    /// Scale for a system with `L^(γ)(A_n) = l`: `R^{n+γ} = l`.
    pub fn for_l_gamma(n: usize, gamma: f64, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(invalid(format!("L = {l} is not positive")));
        }
        Self::new(n, gamma, l.powf(1.0 / (n as f64 + gamma)))
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `|zero| = R (γ/(n²−γ))^{1/n}`.
    pub fn zero_modulus(&self) -> f64 {
        let nf = self.nf();
        self.r * (self.gamma / (nf * nf - self.gamma)).powf(1.0 / nf)
    }

    fn unit_scale(&self) -> QdParams {
        QdParams { r: 1.0, ..*self }
    }
}

pub fn q_value(params: &QdParams, w: Complex64) -> Result<Complex64> {
    let nf = params.nf();
    let rn = params.r.powi(params.n as i32);
    let wn = w.powu(params.n as u32);
    if w.norm() <= 1e-14 * params.r || (wn - rn).norm() <= 1e-14 * rn || !w.is_finite() {
        return Err(Error::Singular(format!("{w} is a pole of Q")));
    }
    let num = (nf * nf - params.gamma) * wn + params.gamma * rn;
    let d = wn - rn;
    Ok(-num / (w * w * d * d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    /// Simple zeros, at arguments `(2m+1)π/n`.
    pub zeros: Vec<Complex64>,
    /// Finite double poles: 0 first, then `R e^{2πik/n}`.
    pub poles: Vec<Complex64>,
    /// Order of the zero at `∞` (a regular point when 0).
    pub infinity_zero_order: usize,
}

pub fn critical_points(params: &QdParams) -> CriticalPoints {
    let nf = params.nf();
    let c = nf * nf - params.gamma;
    let rn = params.r.powi(params.n as i32);
    let rho = params.zero_modulus();
    let zeros = (0..params.n)
        .map(|m| {
            let mut z = Complex64::from_polar(rho, (2 * m + 1) as f64 * PI / nf);
            for _ in 0..3 {
                let p = c * z.powu(params.n as u32) + params.gamma * rn;
                let dp = nf * c * z.powu(params.n as u32 - 1);
                z -= p / dp;
            }
            z
        })
        .collect();
    let poles = std::iter::once(Complex64::new(0.0, 0.0))
        .chain((0..params.n).map(|k| Complex64::from_polar(params.r, 2.0 * PI * k as f64 / nf)))
        .collect();
    CriticalPoints {
        zeros,
        poles,
        infinity_zero_order: params.n - 2,
    }
}

/// `arg`s of the three critical directions at a simple zero: `Q dw² > 0`
/// along `w = w₀ + t e^{iψ}` needs `arg Q′(w₀) + 3ψ ≡ 0 (mod 2π)`.
pub fn critical_directions(params: &QdParams, zero: Complex64) -> Result<[f64; 3]> {
    let h = 1e-7 * params.r;
    let dq = (q_value(params, zero + h)? - q_value(params, zero - h)?) / (2.0 * h);
    let base = -dq.arg() / 3.0;
    Ok([0, 1, 2].map(|m| base + 2.0 * PI * m as f64 / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum TrajectoryEnd {
    /// Reached within one step of the zero with this index.
    Zero(usize),
    /// Reached within one step of the finite pole with this index.
    Pole(usize),
    /// Returned to its starting point.
    Closed,
    /// Left the plotting disk on its way to `∞`.
    Infinity,
    MaxLength,
    /// The adaptive step collapsed; the trace is truncated.
    StepUnderflow,
    /// Stopped by a caller-supplied condition.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Complex64>,
    /// Index of the zero the trajectory leaves from, if critical.
    pub from_zero: Option<usize>,
    pub end: TrajectoryEnd,
}

impl Trajectory {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryField {
    pub params: QdParams,
    pub trajectories: Vec<Trajectory>,
    pub critical_zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub infinity_zero_order: usize,
    pub step: f64,
}

fn segment_distance(c: Complex64, p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    let t = if len2 > 0.0 {
        (((c - p) * d.conj()).re / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (c - (p + d * t)).norm()
}

/// Unit-speed integrator for horizontal trajectories, `dw/dt ∝ 1/√Q(w)`,
/// working at unit scale `R = 1`.
struct Tracer {
    params: QdParams,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    h_max: f64,
    max_len: f64,
    far: f64,
}

impl Tracer {
    fn new(params: &QdParams, step: f64, max_len: f64) -> Tracer {
        let unit = params.unit_scale();
        let cp = critical_points(&unit);
        Tracer {
            params: unit,
            zeros: cp.zeros,
            poles: cp.poles,
            h_max: step,
            max_len,
            far: 3.0,
        }
    }

    /// Unit direction of the horizontal line field at `w`, on the side of `reference`.
    fn direction(&self, w: Complex64, reference: Complex64) -> Option<Complex64> {
        let q = q_value(&self.params, w).ok()?;
        let s = q.sqrt();
        let norm = s.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return None;
        }
        let d = s.conj() / norm;
        Some(if (d * reference.conj()).re < 0.0 { -d } else { d })
    }

    fn rk4(&self, w: Complex64, h: f64, reference: Complex64) -> Option<(Complex64, Complex64)> {
        let k1 = self.direction(w, reference)?;
        let k2 = self.direction(w + k1 * (0.5 * h), k1)?;
        let k3 = self.direction(w + k2 * (0.5 * h), k2)?;
        let k4 = self.direction(w + k3 * h, k3)?;
        Some((w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0), k4))
    }

    /// One accepted step by step doubling; `h` is updated in place.
    fn step(&self, w: Complex64, h: &mut f64, reference: Complex64) -> Option<(Complex64, Complex64)> {
        loop {
            let attempt = (|| {
                let full = self.rk4(w, *h, reference)?;
                let half = self.rk4(w, 0.5 * *h, reference)?;
                let two = self.rk4(half.0, 0.5 * *h, half.1)?;
                Some((full.0, two))
            })();
            match attempt {
                Some((full, (w2, d2))) => {
                    let err = (w2 - full).norm();
                    if err <= STEP_TOL {
                        let grow = if err > 0.0 { 0.9 * (STEP_TOL / err).powf(0.2) } else { 2.0 };
                        *h = (*h * grow.min(2.0)).min(self.h_max);
                        let w_new = w2 + (w2 - full) / 15.0;
                        let dir = self.direction(w_new, d2)?;
                        return Some((w_new, dir));
                    }
                    *h *= (0.9 * (STEP_TOL / err).powf(0.2)).max(0.1);
                }
                None => *h *= 0.25,
            }
            if *h < 1e-14 {
                return None;
            }
        }
    }

    /// Traces from `seed` along `dir0`. `origin` is prepended to the output
    /// (the zero a critical trajectory starts from). `target` may end the
    /// trace on a segment and supply the final point.
    fn trace(
        &self,
        origin: Option<(usize, Complex64)>,
        seed: Complex64,
        dir0: Complex64,
        target: Option<&(dyn Fn(Complex64, Complex64) -> Option<Complex64> + Sync)>,
    ) -> Trajectory {
        let mut points = Vec::new();
        if let Some((_, z)) = origin {
            points.push(z);
        }
        points.push(seed);
        let mut w = seed;
        let mut reference = match self.direction(seed, dir0) {
            Some(d) => d,
            None => {
                return Trajectory {
                    points,
                    from_zero: origin.map(|o| o.0),
                    end: TrajectoryEnd::StepUnderflow,
                }
            }
        };
        let mut h = self.h_max;
        let mut len = 0.0;
        let end = loop {
            if len > self.max_len {
                break TrajectoryEnd::MaxLength;
            }
            let Some((next, dir)) = self.step(w, &mut h, reference) else {
                break TrajectoryEnd::StepUnderflow;
            };
            len += (next - w).norm();
            if let Some(t) = target {
                if let Some(p) = t(w, next) {
                    points.push(p);
                    break TrajectoryEnd::Target;
                }
            }
            let near = |c: Complex64| segment_distance(c, w, next) < self.h_max;
            let leaving_origin = origin.is_some_and(|(_, z)| (next - z).norm() < 3.0 * self.h_max && len < 4.0 * self.h_max);
            if let Some(i) = self.zeros.iter().position(|&z| near(z)) {
                if !leaving_origin {
                    points.push(next);
                    points.push(self.zeros[i]);
                    break TrajectoryEnd::Zero(i);
                }
            }
            if let Some(i) = self.poles.iter().position(|&z| near(z)) {
                points.push(next);
                break TrajectoryEnd::Pole(i);
            }
            if origin.is_none() && len > 10.0 * self.h_max && segment_distance(seed, w, next) < self.h_max {
                points.push(seed);
                break TrajectoryEnd::Closed;
            }
            points.push(next);
            if next.norm() > self.far {
                break TrajectoryEnd::Infinity;
            }
            w = next;
            reference = dir;
        };
        Trajectory {
            points,
            from_zero: origin.map(|o| o.0),
            end,
        }
    }

    fn from_zero(&self, index: usize, psi: f64, distance: f64) -> Trajectory {
        let z = self.zeros[index];
        let d = Complex64::from_polar(1.0, psi);
        self.trace(Some((index, z)), z + d * distance, d, None)
    }

    /// Critical arc leaving zero 0 (argument `π/n`) towards zero `n − 1`, cut
    /// where it meets the positive real axis.
    fn half_arc(&self) -> Result<Vec<Complex64>> {
        let z0 = self.zeros[0];
        let target = self.zeros[self.params.n - 1];
        let heading = (target - z0).arg();
        let psi = critical_directions(&self.params, z0)?
            .into_iter()
            .max_by(|a, b| (a - heading).cos().total_cmp(&(b - heading).cos()))
            .expect("three directions");
        let seed_distance = 1e-5 * z0.norm();
        let d = Complex64::from_polar(1.0, psi);
        let cross_axis = |p: Complex64, q: Complex64| {
            (q.im <= 0.0 && p.im > 0.0).then(|| {
                let x = p.re + (q.re - p.re) * p.im / (p.im - q.im);
                Complex64::new(x, 0.0)
            })
        };
        let t = self.trace(Some((0, z0)), z0 + d * seed_distance, d, Some(&cross_axis));
        if t.end != TrajectoryEnd::Target {
            return Err(Error::Numerical(format!("critical arc ended with {:?}", t.end)));
        }
        let x = t.points.last().expect("non-empty").re;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Numerical(format!("critical arc meets the axis at {x}")));
        }
        Ok(t.points)
    }
}

/// Traces the critical trajectories leaving every zero and a few closed
/// trajectories around every finite pole. `step` is the largest step (in the
/// units of `w`) and `max_len` the length budget per trajectory.
pub fn trace_trajectories(params: &QdParams, step: f64, max_len: f64) -> Result<TrajectoryField> {
    if !(step > 0.0 && max_len > step) {
        return Err(invalid(format!("step {step} and max_len {max_len}")));
    }
    let r = params.r;
    let tracer = Tracer::new(params, step / r, max_len / r);
    let n = params.n;
    let arc_end = tracer.half_arc()?.last().expect("non-empty").re;

    // critical trajectories: three per zero
    let mut jobs: Vec<(Option<(usize, f64)>, Complex64, Complex64)> = Vec::new();
    for (i, &z) in tracer.zeros.iter().enumerate() {
        for psi in critical_directions(&tracer.params, z)? {
            jobs.push((Some((i, psi)), z, Complex64::from_polar(1.0, psi)));
        }
    }
    // closed trajectories: around 0 inside B_0, around each a_k inside its petal;
    // the field at each seed is tangent to the loop, any orientation will do
    for k in 0..n {
        let rot = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        for f in [0.3, 0.6, 0.85] {
            if k == 0 {
                jobs.push((None, Complex64::new(f * arc_end, 0.0), Complex64::new(0.0, 1.0)));
            }
            let seed = rot * (arc_end + f * (1.0 - arc_end));
            jobs.push((None, seed, rot * Complex64::new(0.0, 1.0)));
        }
    }
    let seed_distance = 2.0 * tracer.h_max;
    let traced: Vec<Trajectory> = jobs
        .par_iter()
        .map(|&(zero, seed, dir)| match zero {
            Some((i, psi)) => tracer.from_zero(i, psi, seed_distance),
            None => tracer.trace(None, seed, dir, None),
        })
        .collect();

    let mut kept: Vec<Trajectory> = Vec::new();
    for t in traced {
        if !kept.iter().any(|k| same_curve(k, &t, 3.0 * tracer.h_max)) {
            kept.push(t);
        }
    }
    let scale = |z: Complex64| z * r;
    let cp = critical_points(params);
    Ok(TrajectoryField {
        params: *params,
        trajectories: kept
            .into_iter()
            .map(|t| Trajectory {
                points: t.points.into_iter().map(scale).collect(),
                ..t
            })
            .collect(),
        critical_zeros: cp.zeros,
        poles: cp.poles,
        infinity_zero_order: cp.infinity_zero_order,
        step,
    })
}

/// Hausdorff distance below `tol`, checked at the endpoints first.
fn same_curve(a: &Trajectory, b: &Trajectory, tol: f64) -> bool {
    let (a0, a1) = (a.points[0], *a.points.last().expect("non-empty"));
    let (b0, b1) = (b.points[0], *b.points.last().expect("non-empty"));
    let ends_match = ((a0 - b0).norm() < tol && (a1 - b1).norm() < tol) || ((a0 - b1).norm() < tol && (a1 - b0).norm() < tol);
    if !ends_match && a.end != TrajectoryEnd::Closed {
        return false;
    }
    hausdorff(&a.points, &b.points) < tol
}

/// Symmetric Hausdorff distance between two polylines, vertex to polyline.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|&p| {
                if y.len() == 1 {
                    return (p - y[0]).norm();
                }
                y.windows(2).map(|s| segment_distance(p, s[0], s[1])).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Points `R e^{2πik/n}` with their circular domains: `B_0` first, then the
/// petals in order of their poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalConfig {
    pub params: QdParams,
    pub system: RadialSystem,
    pub domains: Vec<DomainGeometry>,
    /// Where the boundary of `B_0` crosses the ray through `a_1`.
    pub axis_crossing: f64,
}

/// Builds the circular domains from the critical arc between two adjacent
/// zeros, traced with largest step `step` (in units of `w`), using the
/// `2π/n` rotation and conjugation symmetry of `Q`.
pub fn extremal_config(params: &QdParams, step: f64) -> Result<ExtremalConfig> {
    if !(step > 0.0 && step < params.r) {
        return Err(invalid(format!("step {step} must lie in (0, R)")));
    }
    let (n, r) = (params.n, params.r);
    let tracer = Tracer::new(params, step / r, 100.0);
    let half = tracer.half_arc()?;
    let x = half.last().expect("non-empty").re;

    // arc A from the zero at −π/n to the zero at π/n, counter-clockwise
    let mut arc: Vec<Complex64> = half.iter().map(|z| z.conj()).collect();
    arc.extend(half.iter().rev().skip(1));
    arc.pop();

    let rotations: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut b0 = Vec::with_capacity(arc.len() * n);
    for rot in &rotations {
        b0.extend(arc.iter().map(|z| rot * z * r));
    }
    let system = RadialSystem::equally_spaced(n, r)?;
    let mut domains = vec![DomainGeometry::new(
        Region::Polygon(Polygon::new(vec![b0])?),
        Complex64::new(0.0, 0.0),
    )?];

    // petal around 1 in the u = 1/w plane: rays become segments into u = 0,
    // where a tiny corner is cut off
    let zero_hi = *half.first().expect("non-empty");
    let zero_lo = zero_hi.conj();
    let half_angle = PI / n as f64;
    let mut petal = vec![
        zero_lo.inv(),
        Complex64::from_polar(CORNER_CUT, half_angle),
        Complex64::new(CORNER_CUT, 0.0),
        Complex64::from_polar(CORNER_CUT, -half_angle),
        zero_hi.inv(),
    ];
    petal.extend(arc.iter().rev().skip(1).map(|z| z.inv()));
    for (k, rot) in rotations.iter().enumerate() {
        let ring = petal.iter().map(|u| u * rot.conj() / r).collect();
        domains.push(DomainGeometry::new(
            Region::moebius_image(Region::Polygon(Polygon::new(vec![ring])?), MoebiusMap::inversion()),
            system.points()[k],
        )?);
    }
    Ok(ExtremalConfig {
        params: *params,
        system,
        domains,
        axis_crossing: x * r,
    })
}
