//! Sector power maps `π_k(w) = −i(e^{−iθ_k}w)^{1/α_k}`, symmetrized images of
//! domain pieces, the three-point normalization and numerical checks of the
//! composition inequalities that the separating transformation yields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainGeometry, Region};
use crate::error::{invalid, Error, Result};
use crate::geometry::{ring_contains, Polygon};
use crate::moebius::MoebiusMap;
use crate::radii::{inner_radius, RadiusEstimate, WosConfig};
use crate::system::RadialSystem;

/// Angular step used to polygonize circles and to densify curves before the
/// power map is applied.
pub const ARC_STEP: f64 = 0.2 * PI / 180.0;

/// Angular slack for deciding that a point lies on a sector ray.
const RAY_TOL: f64 = 1e-9;

const MAX_SUBDIVISION: usize = 4096;
/// Relative error allowed for polygonizing arcs at [`ARC_STEP`] and mapping
/// them through powers up to `1/α ≈ 10`.
pub const GEOMETRY_TOL: f64 = 2e-5;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// `π` for the sector `θ < arg w < θ + πα`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorMap {
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
}

/// Which boundary ray a point of the closed sector sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Start,
    End,
}

impl SectorMap {
    pub fn new(k: usize, theta: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) || !theta.is_finite() {
            return Err(invalid(format!("sector with theta {theta} and alpha {alpha}")));
        }
        Ok(SectorMap { k, theta, alpha })
    }

    /// Sector `P_k` between `a_k` and `a_{k+1}` (0-based `k`).
    pub fn from_system(system: &RadialSystem, k: usize) -> Result<Self> {
        if k >= system.n() {
            return Err(invalid(format!("sector {k} of a {}-point system", system.n())));
        }
        SectorMap::new(k, system.thetas()[k], system.alphas()[k])
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.theta)
    }

    fn end_direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI * self.alpha)
    }

    /// Argument of the rotated point `u`, placed in `[0, πα]`.
    fn sector_arg(&self, u: Complex64) -> Option<f64> {
        let span = PI * self.alpha;
        let mut phi = u.arg();
        if phi < 0.0 {
            if phi + 2.0 * PI <= span + RAY_TOL {
                phi += 2.0 * PI;
            } else if phi >= -RAY_TOL {
                phi = 0.0;
            } else {
                return None;
            }
        }
        if phi > span + RAY_TOL {
            return None;
        }
        Some(phi.min(span))
    }

    /// The image of rotated point `u` in the closed right half-plane.
    fn map_rotated(&self, u: Complex64) -> Result<Complex64> {
        let phi = self
            .sector_arg(u)
            .ok_or_else(|| invalid(format!("{u} is outside the sector")))?;
        Ok(Complex64::new(0.0, -1.0) * Complex64::from_polar(u.norm().powf(1.0 / self.alpha), phi / self.alpha))
    }

    pub fn forward(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() == 0.0 || !w.is_finite() {
            return Err(Error::Singular(format!("power map at {w}")));
        }
        self.map_rotated(w * self.rotation())
    }

    pub fn inverse(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta.norm() == 0.0 || !zeta.is_finite() {
            return Err(Error::Singular(format!("inverse power map at {zeta}")));
        }
        if zeta.re < -RAY_TOL * zeta.norm() {
            return Err(invalid(format!("{zeta} is left of the imaginary axis")));
        }
        let v = Complex64::new(0.0, 1.0) * zeta;
        let phi = v.arg().clamp(0.0, PI);
        Ok(Complex64::from_polar(v.norm().powf(self.alpha), phi * self.alpha + self.theta))
    }

    /// `(1/α)|a|^{1/α − 1}`, the stretching of `π` at a ray point of modulus `|a|`.
    pub fn derivative_factor(&self, a: Complex64) -> f64 {
        a.norm().powf(1.0 / self.alpha - 1.0) / self.alpha
    }

    /// Image of a ray point of modulus `r`: `−i r^{1/α}` on the start ray,
    /// `+i r^{1/α}` on the end ray.
    pub fn ray_image(&self, r: f64, side: Side) -> Complex64 {
        let m = r.powf(1.0 / self.alpha);
        match side {
            Side::Start => Complex64::new(0.0, -m),
            Side::End => Complex64::new(0.0, m),
        }
    }

    /// The same map seen through `w ↦ 1/w`: `π(w) = 1/π'(1/w)`.
    fn inverted(&self) -> SectorMap {
        SectorMap {
            k: self.k,
            theta: -self.theta - PI * self.alpha,
            alpha: self.alpha,
        }
    }

    /// Boundary parameter of a rotated point on the sector rays: `+|u|` on the
    /// start ray, `−|u|` on the end ray, 0 at the apex.
    fn ray_parameter(&self, u: Complex64, scale: f64) -> Option<f64> {
        if u.norm() <= 1e-14 * scale {
            return Some(0.0);
        }
        let phi = self.sector_arg(u)?;
        if phi <= RAY_TOL {
            Some(u.norm())
        } else if phi >= PI * self.alpha - RAY_TOL {
            Some(-u.norm())
        } else {
            None
        }
    }

    /// Rotated point with boundary parameter `s`.
    fn ray_point(&self, s: f64) -> Complex64 {
        if s >= 0.0 {
            Complex64::new(s, 0.0)
        } else {
            self.end_direction() * -s
        }
    }

    fn ray_point_image(&self, s: f64) -> Complex64 {
        if s >= 0.0 {
            self.ray_image(s, Side::Start)
        } else {
            self.ray_image(-s, Side::End)
        }
    }
}

/// Ring approximating `|z − centre| = radius` with [`ARC_STEP`] spacing.
pub fn circle_ring(centre: Complex64, radius: f64) -> Vec<Complex64> {
    let m = (2.0 * PI / ARC_STEP).round() as usize;
    (0..m)
        .map(|j| centre + Complex64::from_polar(radius, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    s: f64,
    entry: bool,
    ring: usize,
    /// Position in the ring's node list.
    node: usize,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Vertex(Complex64),
    Cross(usize),
}

/// A connected piece of `region ∩ sector`: boundary curves inside the sector
/// (from entry to exit crossing) joined by stretches of the sector rays.
#[derive(Debug, Clone)]
struct Piece {
    /// Each curve starts and ends on a ray; endpoints carry their parameters.
    curves: Vec<(f64, Vec<Complex64>, f64)>,
    rays: Vec<(f64, f64)>,
}

impl Piece {
    fn covers(&self, s: f64) -> bool {
        self.rays.iter().any(|&(a, b)| a <= s && s <= b)
    }

    /// Closed ring of the piece in the rotated plane.
    fn ring(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for ((_, curve, _), &(a, b)) in self.curves.iter().zip(&self.rays) {
            out.extend_from_slice(curve);
            if a < 0.0 && b > 0.0 {
                out.push(Complex64::new(0.0, 0.0));
            }
        }
        out
    }
}

/// Pieces of the region bounded by `rings` (interior on the left) inside the
/// closed sector `0 ≤ arg u ≤ πα`, plus the rings that never meet the rays
/// but lie inside the sector.
fn clip_to_sector(rings: &[Vec<Complex64>], map: &SectorMap) -> Result<(Vec<Piece>, Vec<Vec<Complex64>>)> {
    let d1 = Complex64::new(1.0, 0.0);
    let d2 = map.end_direction();
    // positive on the sector side of each ray's line; zero counts as positive
    let sides = |u: Complex64| [cross(d1, u), cross(u, d2)];
    let inside = |u: Complex64| {
        let [a, b] = sides(u);
        if map.alpha <= 1.0 {
            a >= 0.0 && b >= 0.0
        } else {
            a >= 0.0 || b >= 0.0
        }
    };

    let mut crossings: Vec<Crossing> = Vec::new();
    let mut nodes: Vec<Vec<Node>> = Vec::with_capacity(rings.len());
    let mut free = Vec::new();
    for (r, ring) in rings.iter().enumerate() {
        let m = ring.len();
        let mut list = Vec::with_capacity(m + 4);
        let before = crossings.len();
        for i in 0..m {
            let (p, q) = (ring[i], ring[(i + 1) % m]);
            list.push(Node::Vertex(p));
            let (sp, sq) = (sides(p), sides(q));
            let mut here: Vec<(f64, Crossing)> = Vec::new();
            for (j, dir) in [d1, d2].into_iter().enumerate() {
                let (a, b) = (sp[j], sq[j]);
                if (a >= 0.0) == (b >= 0.0) {
                    continue;
                }
                let tau = a / (a - b);
                let x = p + (q - p) * tau;
                let t = (x * dir.conj()).re;
                if t < 0.0 {
                    continue;
                }
                if t == 0.0 {
                    return Err(Error::Numerical("boundary passes through the sector apex".into()));
                }
                here.push((
                    tau,
                    Crossing {
                        s: if j == 0 { t } else { -t },
                        entry: a < 0.0,
                        ring: r,
                        node: 0,
                    },
                ));
            }
            here.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (_, mut c) in here {
                c.node = list.len();
                list.push(Node::Cross(crossings.len()));
                crossings.push(c);
            }
        }
        if crossings.len() == before && inside(ring[0]) {
            free.push(ring.clone());
        }
        nodes.push(list);
    }

    let mut by_s: Vec<usize> = (0..crossings.len()).collect();
    by_s.sort_by(|&a, &b| crossings[a].s.total_cmp(&crossings[b].s));
    let mut next_on_ray = vec![usize::MAX; crossings.len()];
    for w in by_s.windows(2) {
        next_on_ray[w[0]] = w[1];
    }

    let mut visited = vec![false; crossings.len()];
    let mut pieces = Vec::new();
    for start in 0..crossings.len() {
        if visited[start] || !crossings[start].entry {
            continue;
        }
        let mut piece = Piece {
            curves: Vec::new(),
            rays: Vec::new(),
        };
        let mut cur = start;
        loop {
            visited[cur] = true;
            let c = crossings[cur];
            let list = &nodes[c.ring];
            let mut curve = vec![map.ray_point(c.s)];
            let mut pos = c.node;
            let exit = loop {
                pos = (pos + 1) % list.len();
                match list[pos] {
                    Node::Vertex(v) => curve.push(v),
                    Node::Cross(id) => break id,
                }
            };
            if crossings[exit].entry {
                return Err(Error::Numerical("sector clipping lost entry/exit alternation".into()));
            }
            visited[exit] = true;
            let (s_in, s_out) = (c.s, crossings[exit].s);
            curve.push(map.ray_point(s_out));
            piece.curves.push((s_in, curve, s_out));
            let next = next_on_ray[exit];
            if next == usize::MAX || !crossings[next].entry {
                return Err(Error::Numerical("sector clipping found an exit without a following entry".into()));
            }
            piece.rays.push((s_out, crossings[next].s));
            if next == start {
                break;
            }
            if visited[next] {
                return Err(Error::Numerical("sector clipping revisited a crossing".into()));
            }
            cur = next;
        }
        pieces.push(piece);
    }
    Ok((pieces, free))
}

/// Images of the segments of `path` under the rotated power map, with
/// intermediate points so that each sub-segment turns by at most `ARC_STEP`
/// around the apex and is short relative to its distance from it.
fn map_path(map: &SectorMap, path: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(path.len() * 2);
    for w in path.windows(2) {
        let (p, q) = (w[0], w[1]);
        let turn = (q / p).arg().abs();
        let rel = (q - p).norm() / p.norm().min(q.norm());
        // turn and relative length both grow by 1/α under the power map
        let m = ((turn.max(rel) / (map.alpha * ARC_STEP)).ceil() as usize).clamp(1, MAX_SUBDIVISION);
        for j in 0..m {
            out.push(map.map_rotated(p + (q - p) * (j as f64 / m as f64))?);
        }
    }
    if let Some(&last) = path.last() {
        out.push(map.map_rotated(last)?);
    }
    Ok(out)
}

fn reflect(z: Complex64) -> Complex64 {
    -z.conj()
}

/// Boundary rings of `region` in the rotated plane, interior on the left.
fn region_rings(region: &Region, map: &SectorMap) -> Result<Vec<Vec<Complex64>>> {
    let rot = map.rotation();
    let rings = match region {
        Region::Disk { center, radius } => vec![circle_ring(*center, *radius)],
        Region::Polygon(p) => p.oriented_rings(),
        _ => {
            return Err(Error::Unsupported(
                "sector symmetrization needs a disk, a polygon, or the inversion image of one".into(),
            ))
        }
    };
    Ok(rings.into_iter().map(|r| r.into_iter().map(|z| z * rot).collect()).collect())
}

/// Symmetrized image `Ω` of the component of `π(B ∩ P̄)` that contains the
/// image of the marked point, united with its mirror image in the imaginary
/// axis. The marked point of `domain` must lie on one of the sector rays or
/// at the apex.
pub fn transform_domain(domain: &DomainGeometry, map: &SectorMap) -> Result<DomainGeometry> {
    let (region, zeta) = transform_region(domain.region(), domain.marked_point(), map)?;
    DomainGeometry::new(region, zeta)
}

fn transform_region(region: &Region, point: Complex64, map: &SectorMap) -> Result<(Region, Complex64)> {
    if let Region::MoebiusImage { base, map: m } = region {
        if !m.is_inversion() {
            return Err(Error::Unsupported("only inversion images can be symmetrized".into()));
        }
        if point.norm() == 0.0 {
            return Err(Error::Singular("marked point at the apex of an inverted domain".into()));
        }
        let (inner, zeta) = transform_region(base, point.inv(), &map.inverted())?;
        return Ok((Region::moebius_image(inner, MoebiusMap::inversion()), zeta.inv()));
    }
    let rings = region_rings(region, map)?;
    let scale = rings
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(point.norm(), f64::max);
    let u_mark = point * map.rotation();
    let s_mark = map
        .ray_parameter(u_mark, scale)
        .ok_or_else(|| invalid(format!("marked point {point} is not on a ray of sector {}", map.k)))?;

    let (pieces, free) = clip_to_sector(&rings, map)?;
    let piece = pieces
        .iter()
        .find(|p| p.covers(s_mark))
        .ok_or_else(|| invalid(format!("marked point {point} is not in the clipped region")))?;
    let mut loops = Vec::new();
    for (s_in, curve, s_out) in &piece.curves {
        let mapped = map_path(map, curve)?;
        let (first, last) = (map.ray_point_image(*s_in), map.ray_point_image(*s_out));
        // vertices lying on a ray duplicate the exact endpoints up to rounding
        let tol = 1e-12 * first.norm().max(last.norm());
        let mut image = vec![first];
        image.extend(
            mapped[1..mapped.len() - 1]
                .iter()
                .filter(|z| (*z - first).norm() > tol && (*z - last).norm() > tol),
        );
        image.push(last);
        let mirror: Vec<Complex64> = image[1..image.len() - 1].iter().rev().map(|&z| reflect(z)).collect();
        image.extend(mirror);
        loops.push(image);
    }
    let outline = piece.ring();
    for ring in &free {
        if ring_contains(&outline, ring[0]) {
            push_closed_with_mirror(map, ring, &mut loops)?;
        }
    }
    let zeta = if s_mark == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        map.ray_point_image(s_mark)
    };
    Ok((Region::Polygon(Polygon::new(loops)?), zeta))
}

fn push_closed_with_mirror(map: &SectorMap, ring: &[Complex64], loops: &mut Vec<Vec<Complex64>>) -> Result<()> {
    let mut closed = ring.to_vec();
    closed.push(ring[0]);
    let mut image = map_path(map, &closed)?;
    image.pop();
    let mirror = image.iter().map(|&z| reflect(z)).collect();
    loops.push(image);
    loops.push(mirror);
    Ok(())
}

/// The Möbius map with `T(0) = 0`, `T(ω₁) = −i`, `T(ω₂) = +i`:
/// `T(z) = z/(cz + d)` with `c = i(ω₁+ω₂)/(ω₁−ω₂)`, `d = iω₁ − cω₁`.
pub fn normalize_triple(omega1: Complex64, omega2: Complex64) -> Result<MoebiusMap> {
    let scale = omega1.norm().max(omega2.norm());
    if omega1.norm() <= 1e-14 * scale || omega2.norm() <= 1e-14 * scale || (omega1 - omega2).norm() <= 1e-14 * scale {
        return Err(Error::Singular(format!("degenerate triple 0, {omega1}, {omega2}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let c = i * (omega1 + omega2) / (omega1 - omega2);
    let d = i * omega1 - c * omega1;
    MoebiusMap::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), c, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `r(B_k, a_k)` against the two images meeting at `a_k`.
    Point,
    /// `r(B_0, 0)` against the images of `B_0` in every sector.
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionEntry {
    pub inequality: Inequality,
    /// 1-based point index; 0 for the origin.
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Standard error of `ratio`.
    pub std_error: f64,
    pub verdict: Verdict,
    /// Verbose only: right-hand side when both images come from sector `k`
    /// (the image of `B_{k+1}` in place of that of `B_k` from sector `k − 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_sector_rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_sector_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub n: usize,
    pub entries: Vec<CompositionEntry>,
    pub max_ratio: f64,
    pub passed: bool,
}

fn verdict(ratio: f64, se: f64) -> Verdict {
    if ratio <= 1.0 + 3.0 * se + GEOMETRY_TOL {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn log_var(e: &RadiusEstimate) -> f64 {
    e.log_std_error().powi(2)
}

/// Estimates both sides of the point and origin inequalities for domains
/// `[B_0, B_1, …, B_n]` of `system`. Each symmetrized image gets its own
/// seed stream derived from `wos.seed`.
pub fn check_composition_bounds(
    system: &RadialSystem,
    domains: &[DomainGeometry],
    wos: &WosConfig,
    verbose: bool,
) -> Result<CompositionReport> {
    let n = system.n();
    if domains.len() != n + 1 {
        return Err(invalid(format!("expected {} domains, got {}", n + 1, domains.len())));
    }
    if domains[0].marked_point().norm() != 0.0 {
        return Err(invalid("B_0 must be marked at the origin"));
    }
    for k in 0..n {
        if (domains[k + 1].marked_point() - system.points()[k]).norm() > 1e-12 * system.points()[k].norm() {
            return Err(invalid(format!("domain {} is not marked at a_{}", k + 1, k + 1)));
        }
    }
    let mut stream = 0u64;
    let mut radius = |d: &DomainGeometry| -> Result<RadiusEstimate> {
        stream += 1;
        inner_radius(d, &wos.reseeded(stream))
    };
    let maps: Vec<SectorMap> = (0..n).map(|k| SectorMap::from_system(system, k)).collect::<Result<_>>()?;
    let mut origin_images = Vec::with_capacity(n);
    let mut start_images = Vec::with_capacity(n);
    let mut end_images = Vec::with_capacity(n);
    for (k, map) in maps.iter().enumerate() {
        origin_images.push(radius(&transform_domain(&domains[0], map)?)?);
        start_images.push(radius(&transform_domain(&domains[k + 1], map)?)?);
        end_images.push(radius(&transform_domain(&domains[(k + 1) % n + 1], map)?)?);
    }

    let mut entries = Vec::with_capacity(n + 1);
    for k in 0..n {
        let prev = (k + n - 1) % n;
        let a = system.points()[k];
        let lhs = radius(&domains[k + 1])?;
        let denominator = maps[k].derivative_factor(a) * maps[prev].derivative_factor(a);
        let rhs = (start_images[k].value * end_images[prev].value / denominator).sqrt();
        let ratio = lhs.value / rhs;
        let se = ratio * (log_var(&lhs) + 0.25 * log_var(&start_images[k]) + 0.25 * log_var(&end_images[prev])).sqrt();
        let (same_sector_rhs, same_sector_ratio) = if verbose {
            let alt = (start_images[k].value * end_images[k].value / denominator).sqrt();
            (Some(alt), Some(lhs.value / alt))
        } else {
            (None, None)
        };
        entries.push(CompositionEntry {
            inequality: Inequality::Point,
            k: k + 1,
            lhs: lhs.value,
            rhs,
            ratio,
            std_error: se,
            verdict: verdict(ratio, se),
            same_sector_rhs,
            same_sector_ratio,
        });
    }
    let lhs = radius(&domains[0])?;
    let alphas = system.alphas();
    let log_rhs: f64 = 0.5 * (0..n).map(|k| alphas[k].powi(2) * origin_images[k].value.ln()).sum::<f64>();
    let var: f64 = log_var(&lhs) + (0..n).map(|k| 0.25 * alphas[k].powi(4) * log_var(&origin_images[k])).sum::<f64>();
    let rhs = log_rhs.exp();
    let ratio = lhs.value / rhs;
    let se = ratio * var.sqrt();
    entries.push(CompositionEntry {
        inequality: Inequality::Origin,
        k: 0,
        lhs: lhs.value,
        rhs,
        ratio,
        std_error: se,
        verdict: verdict(ratio, se),
        same_sector_rhs: None,
        same_sector_ratio: None,
    });
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let passed = entries.iter().all(|e| e.verdict == Verdict::Pass);
    Ok(CompositionReport {
        n,
        entries,
        max_ratio,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_system_vertices_map_to_plus_minus_i() {
        let sys = RadialSystem::from_polar(&[1.0; 3], &[0.5, 0.7, 0.8]).unwrap();
        for k in 0..3 {
            let m = SectorMap::from_system(&sys, k).unwrap();
            let a = sys.point(k as isize);
            let b = sys.point(k as isize + 1);
            assert!((m.forward(a).unwrap() - c(0.0, -1.0)).norm() < 1e-12);
            assert!((m.forward(b).unwrap() - c(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_half_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(theta, alpha) in &[(0.0, 0.5), (1.0, 1.0), (2.0, 1.6), (5.5, 0.3)] {
            let m = SectorMap::new(0, theta, alpha).unwrap();
            for _ in 0..100 {
                let r = 10f64.powf(rng.random_range(-2.0..2.0));
                let phi = theta + rng.random_range(0.001..0.999) * PI * alpha;
                let w = Complex64::from_polar(r, phi);
                let z = m.forward(w).unwrap();
                assert!(z.re > 0.0);
                let back = m.inverse(z).unwrap();
                assert!((back - w).norm() <= 1e-12 * w.norm().max(1.0), "{w} -> {z} -> {back}");
            }
            for r in [0.3, 1.0, 4.0] {
                let start = m.forward(Complex64::from_polar(r, theta)).unwrap();
                let end = m.forward(Complex64::from_polar(r, theta + PI * alpha)).unwrap();
                assert!(start.re.abs() < 1e-12 * start.norm() && start.im < 0.0);
                assert!(end.re.abs() < 1e-12 * end.norm() && end.im > 0.0);
                assert!((start.norm() - r.powf(1.0 / alpha)).abs() < 1e-12 * start.norm());
            }
            let outside = Complex64::from_polar(1.0, theta - 0.3);
            assert!(alpha > 1.9 || m.forward(outside).is_err());
        }
    }

    #[test]
    fn derivative_factor_values() {
        let m = SectorMap::new(0, 0.0, 0.5).unwrap();
        assert!((m.derivative_factor(c(4.0, 0.0)) - 8.0).abs() < 1e-12);
        let m = SectorMap::new(0, 0.0, 0.7).unwrap();
        assert!((m.derivative_factor(c(1.0, 0.0)) - 1.0 / 0.7).abs() < 1e-14);
        for &(alpha, r) in &[(0.4, 2.0), (1.3, 0.6), (1.0, 3.0)] {
            let m = SectorMap::new(0, 0.2, alpha).unwrap();
            let a = Complex64::from_polar(r, 0.2);
            let h = Complex64::from_polar(1e-8, 0.2 + 1.0);
            let fd = (m.forward(a + h).unwrap() - m.forward(a).unwrap()).norm() / h.norm();
            let an = m.derivative_factor(a);
            assert!((fd - an).abs() <= 1e-6 * an, "{fd} vs {an}");
        }
    }

    #[test]
    fn triple_normalization() {
        let t = normalize_triple(c(0.0, -1.0), c(0.0, 1.0)).unwrap();
        assert!(t.same_map(&MoebiusMap::identity(), 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut cases = vec![(c(0.0, -2.0), c(0.0, 2.0))];
        for _ in 0..100 {
            cases.push((
                c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
                c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
            ));
        }
        for (w1, w2) in cases {
            let t = normalize_triple(w1, w2).unwrap();
            assert!(t.apply(c(0.0, 0.0)).unwrap().norm() <= 1e-12);
            assert!((t.apply(w1).unwrap() - c(0.0, -1.0)).norm() <= 1e-12);
            assert!((t.apply(w2).unwrap() - c(0.0, 1.0)).norm() <= 1e-12);
        }
        assert!(normalize_triple(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(normalize_triple(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    fn vertices(d: &DomainGeometry) -> Vec<Complex64> {
        match d.region() {
            Region::Polygon(p) => p.rings().iter().flatten().copied().collect(),
            Region::MoebiusImage { base, .. } => match base.as_ref() {
                Region::Polygon(p) => p.rings().iter().flatten().copied().collect(),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        }
    }

    fn assert_symmetric(d: &DomainGeometry) {
        let v = vertices(d);
        for z in &v {
            let m = reflect(*z);
            assert!(v.iter().any(|w| (w - m).norm() <= 1e-9), "no mirror of {z}");
        }
    }

    #[test]
    fn small_disk_at_a_k() {
        let sys = RadialSystem::from_polar(&[1.0, 1.0, 1.0], &[0.6, 0.6, 0.8]).unwrap();
        let map = SectorMap::from_system(&sys, 1).unwrap();
        let disk = DomainGeometry::disk(sys.point(1), 0.1).unwrap();
        let omega = transform_domain(&disk, &map).unwrap();
        assert!((omega.marked_point() - c(0.0, -1.0)).norm() < 1e-12);
        assert!(omega.region().contains(c(0.0, -1.0)));
        assert_symmetric(&omega);
        let other = DomainGeometry::disk(sys.point(2), 0.1).unwrap();
        let omega2 = transform_domain(&other, &map).unwrap();
        assert!((omega2.marked_point() - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn centred_disk_maps_to_centred_disk() {
        for alpha in [0.4, 1.0, 1.5] {
            let map = SectorMap::new(0, 0.3, alpha).unwrap();
            let rho = 0.7;
            let omega = transform_domain(&DomainGeometry::disk(c(0.0, 0.0), rho).unwrap(), &map).unwrap();
            assert_eq!(omega.marked_point(), c(0.0, 0.0));
            assert_symmetric(&omega);
            let expect = rho.powf(1.0 / alpha);
            for z in vertices(&omega) {
                // chord midpoints sit (1 − cos(ARC_STEP/2))/α inside the circle
                assert!((z.norm() - expect).abs() <= 1e-5 * expect, "{z} vs {expect}");
            }
        }
    }

    #[test]
    fn inverted_domains_commute_with_the_power_map() {
        let sys = RadialSystem::from_polar(&[1.2, 0.8, 1.0], &[0.5, 0.9, 0.6]).unwrap();
        let map = SectorMap::from_system(&sys, 0).unwrap();
        let a = sys.point(1);
        // a disk around a_2 and the same disk written as 1/(1/disk)
        let disk = Region::Polygon(Polygon::new(vec![circle_ring(a, 0.3)]).unwrap());
        let flipped = Polygon::new(vec![circle_ring(a, 0.3).into_iter().map(|z| z.inv()).collect()]).unwrap();
        let inverted = Region::moebius_image(Region::Polygon(flipped), MoebiusMap::inversion());
        let direct = transform_domain(&DomainGeometry::new(disk, a).unwrap(), &map).unwrap();
        let via = transform_domain(&DomainGeometry::new(inverted, a).unwrap(), &map).unwrap();
        assert!((direct.marked_point() - via.marked_point()).norm() < 1e-12);
        let Region::Polygon(p) = direct.region() else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let centre = direct.marked_point();
        for _ in 0..400 {
            let z = centre + c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if p.boundary_distance(z) > 1e-3 {
                assert_eq!(direct.region().contains(z), via.region().contains(z), "{z}");
            }
        }
    }

    #[test]
    fn origin_inequality_is_tight_for_centred_disks() {
        let sys = RadialSystem::from_polar(&[1.0, 1.3, 0.9], &[0.5, 0.7, 0.8]).unwrap();
        let mut domains = vec![DomainGeometry::disk(c(0.0, 0.0), 0.4).unwrap()];
        for k in 0..3 {
            domains.push(DomainGeometry::disk(sys.point(k), 0.2).unwrap());
        }
        let report = check_composition_bounds(&sys, &domains, &WosConfig::with_samples(20_000, 3), true).unwrap();
        assert!(report.passed, "{report:?}");
        let origin = report.entries.last().unwrap();
        assert_eq!(origin.inequality, Inequality::Origin);
        assert!((origin.ratio - 1.0).abs() <= 4.0 * origin.std_error + 0.01, "{origin:?}");
        assert!(report.entries[0].same_sector_ratio.is_some());
    }

    #[test]
    fn marked_point_must_be_on_a_ray() {
        let map = SectorMap::new(0, 0.0, 0.5).unwrap();
        let d = DomainGeometry::disk(c(1.0, 1.0), 0.1).unwrap();
        assert!(transform_domain(&d, &map).is_err());
    }
}
