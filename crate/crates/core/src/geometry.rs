//! Polygonal regions: closed rings under the even-odd rule, exact distance to
//! the boundary by segment projection, and a uniform grid for large rings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Segment count above which nearest-boundary queries go through the grid.
pub const GRID_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closest {
    pub distance: f64,
    pub point: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    p: Complex64,
    q: Complex64,
    ring: u32,
    index: u32,
}

impl Segment {
    fn closest(&self, z: Complex64) -> Closest {
        let d = self.q - self.p;
        let len2 = d.norm_sqr();
        let t = if len2 > 0.0 {
            (((z - self.p) * d.conj()).re / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let point = self.p + d * t;
        Closest {
            distance: (z - point).norm(),
            point,
        }
    }

    fn bbox(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.p.re.min(self.q.re), self.p.im.min(self.q.im)),
            Complex64::new(self.p.re.max(self.q.re), self.p.im.max(self.q.im)),
        )
    }
}

#[derive(Debug, Clone)]
struct Grid {
    origin: Complex64,
    cell: f64,
    nx: i64,
    ny: i64,
    start: Vec<u32>,
    items: Vec<u32>,
    /// Exact boundary distance from each cell centre.
    centre_distance: Vec<f64>,
}

impl Grid {
    fn build(segs: &[Segment], lo: Complex64, hi: Complex64) -> Grid {
        let w = (hi.re - lo.re).max(f64::MIN_POSITIVE);
        let h = (hi.im - lo.im).max(f64::MIN_POSITIVE);
        let n = segs.len() as f64;
        let mut cell = (w * h / n).sqrt();
        if !(cell > 0.0) || w.max(h) / cell > 2048.0 {
            cell = w.max(h) / 2048.0;
        }
        cell = cell.max(w.max(h) / 2048.0);
        let nx = ((w / cell).ceil() as i64).clamp(1, 2048);
        let ny = ((h / cell).ceil() as i64).clamp(1, 2048);
        let reach = cell * std::f64::consts::FRAC_1_SQRT_2;

        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); (nx * ny) as usize];
        for (i, s) in segs.iter().enumerate() {
            let (a, b) = s.bbox();
            let x0 = (((a.re - reach - lo.re) / cell).floor() as i64).clamp(0, nx - 1);
            let x1 = (((b.re + reach - lo.re) / cell).floor() as i64).clamp(0, nx - 1);
            let y0 = (((a.im - reach - lo.im) / cell).floor() as i64).clamp(0, ny - 1);
            let y1 = (((b.im + reach - lo.im) / cell).floor() as i64).clamp(0, ny - 1);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let centre = lo + Complex64::new((ix as f64 + 0.5) * cell, (iy as f64 + 0.5) * cell);
                    if s.closest(centre).distance <= reach * (1.0 + 1e-12) {
                        buckets[(iy * nx + ix) as usize].push(i as u32);
                    }
                }
            }
        }
        let mut start = Vec::with_capacity(buckets.len() + 1);
        let mut items = Vec::new();
        start.push(0);
        for b in buckets {
            items.extend(b);
            start.push(items.len() as u32);
        }
        let mut grid = Grid {
            origin: lo,
            cell,
            nx,
            ny,
            start,
            items,
            centre_distance: Vec::new(),
        };
        grid.centre_distance = (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| {
                let centre = lo + Complex64::new((ix as f64 + 0.5) * cell, (iy as f64 + 0.5) * cell);
                grid.closest(segs, centre).distance
            })
            .collect();
        grid
    }

    /// A lower bound for the boundary distance, `None` outside the grid or
    /// when it would be loose by more than a quarter.
    fn distance_lower_bound(&self, z: Complex64) -> Option<f64> {
        let ix = ((z.re - self.origin.re) / self.cell).floor() as i64;
        let iy = ((z.im - self.origin.im) / self.cell).floor() as i64;
        if ix < 0 || iy < 0 || ix >= self.nx || iy >= self.ny {
            return None;
        }
        let centre = self.origin + Complex64::new((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell);
        let bound = self.centre_distance[(iy * self.nx + ix) as usize] - (z - centre).norm();
        (bound > 4.0 * self.cell).then_some(bound)
    }

    fn cell_items(&self, ix: i64, iy: i64) -> &[u32] {
        let c = (iy * self.nx + ix) as usize;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }

    fn closest(&self, segs: &[Segment], z: Complex64) -> Closest {
        let ix = ((z.re - self.origin.re) / self.cell).floor() as i64;
        let iy = ((z.im - self.origin.im) / self.cell).floor() as i64;
        let (mx, my) = (self.nx - 1, self.ny - 1);
        let r0 = 0.max(-ix).max(ix - mx).max(-iy).max(iy - my);
        let r_max = ix.abs().max((ix - mx).abs()).max(iy.abs()).max((iy - my).abs());
        let mut best = Closest {
            distance: f64::INFINITY,
            point: z,
        };
        let visit = |cx: i64, cy: i64, best: &mut Closest| {
            if cx < 0 || cy < 0 || cx > mx || cy > my {
                return;
            }
            for &i in self.cell_items(cx, cy) {
                let c = segs[i as usize].closest(z);
                if c.distance < best.distance {
                    *best = c;
                }
            }
        };
        let mut r = r0;
        loop {
            if r == 0 {
                visit(ix, iy, &mut best);
            } else {
                for dx in -r..=r {
                    visit(ix + dx, iy - r, &mut best);
                    visit(ix + dx, iy + r, &mut best);
                }
                for dy in (-r + 1)..r {
                    visit(ix - r, iy + dy, &mut best);
                    visit(ix + r, iy + dy, &mut best);
                }
            }
            if best.distance <= r as f64 * self.cell || r >= r_max {
                break;
            }
            r += 1;
        }
        best
    }
}

/// A bounded region whose boundary is a set of closed, pairwise
/// non-intersecting rings; interior by the even-odd rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr", into = "PolygonRepr")]
pub struct Polygon {
    rings: Vec<Vec<Complex64>>,
    segs: Vec<Segment>,
    grid: Option<Grid>,
    lo: Complex64,
    hi: Complex64,
}

impl PartialEq for Polygon {
    fn eq(&self, other: &Self) -> bool {
        self.rings == other.rings
    }
}

/// JSON shape: either `{"rings": [[[x, y], …], …]}` or a single ring as
/// `{"vertices": [[x, y], …]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolygonRepr {
    Rings { rings: Vec<Vec<Complex64>> },
    Vertices { vertices: Vec<Complex64> },
}

impl TryFrom<PolygonRepr> for Polygon {
    type Error = Error;

    fn try_from(r: PolygonRepr) -> Result<Self> {
        match r {
            PolygonRepr::Rings { rings } => Polygon::new(rings),
            PolygonRepr::Vertices { vertices } => Polygon::new(vec![vertices]),
        }
    }
}

impl From<Polygon> for PolygonRepr {
    fn from(p: Polygon) -> Self {
        PolygonRepr::Rings { rings: p.rings }
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed-segment intersection test.
pub(crate) fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Twice the signed area of a closed ring (positive for counter-clockwise).
pub fn signed_area2(ring: &[Complex64]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| cross(ring[i], ring[(i + 1) % n])).sum()
}

fn clean_ring(ring: Vec<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(ring.len());
    for z in ring {
        if out.last() != Some(&z) {
            out.push(z);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

impl Polygon {
    /// Builds and validates a polygon. Consecutive duplicate vertices and an
    /// explicit closing vertex are dropped.
    pub fn new(rings: Vec<Vec<Complex64>>) -> Result<Self> {
        let poly = Self::build(rings)?;
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(invalid(format!(
                "boundary is not simple: segment {} of ring {} meets segment {} of ring {}",
                poly.segs[i].index, poly.segs[i].ring, poly.segs[j].index, poly.segs[j].ring
            )));
        }
        Ok(poly)
    }

    fn build(rings: Vec<Vec<Complex64>>) -> Result<Self> {
        let rings: Vec<Vec<Complex64>> = rings.into_iter().map(clean_ring).collect();
        if rings.is_empty() {
            return Err(invalid("polygon has no rings"));
        }
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut segs = Vec::new();
        for (r, ring) in rings.iter().enumerate() {
            if ring.len() < 3 {
                return Err(invalid(format!("ring {r} has fewer than 3 distinct vertices")));
            }
            if ring.iter().any(|z| !z.is_finite()) {
                return Err(invalid(format!("ring {r} has a non-finite vertex")));
            }
            if signed_area2(ring) == 0.0 {
                return Err(invalid(format!("ring {r} encloses no area")));
            }
            for (i, &p) in ring.iter().enumerate() {
                lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
                segs.push(Segment {
                    p,
                    q: ring[(i + 1) % ring.len()],
                    ring: r as u32,
                    index: i as u32,
                });
            }
        }
        let grid = (segs.len() > GRID_THRESHOLD).then(|| Grid::build(&segs, lo, hi));
        Ok(Polygon {
            rings,
            segs,
            grid,
            lo,
            hi,
        })
    }

    /// Regular `m`-gon inscribed in the circle `|z − centre| = radius`.
    pub fn regular(m: usize, centre: Complex64, radius: f64) -> Result<Self> {
        if m < 3 || !(radius > 0.0) {
            return Err(invalid("a regular polygon needs m >= 3 and a positive radius"));
        }
        let ring = (0..m)
            .map(|j| centre + Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / m as f64))
            .collect();
        Polygon::new(vec![ring])
    }

    pub fn rings(&self) -> &[Vec<Complex64>] {
        &self.rings
    }

    pub fn segment_count(&self) -> usize {
        self.segs.len()
    }

    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        (self.lo, self.hi)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    /// Nearest boundary point.
    pub fn closest(&self, z: Complex64) -> Closest {
        match &self.grid {
            Some(g) => g.closest(&self.segs, z),
            None => self.closest_brute(z),
        }
    }

    pub(crate) fn closest_brute(&self, z: Complex64) -> Closest {
        self.segs
            .iter()
            .map(|s| s.closest(z))
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("polygon has segments")
    }

    /// A cheap value `d ≤ boundary_distance(z)`, exact or within 25% of it.
    pub fn distance_lower_bound(&self, z: Complex64) -> f64 {
        self.grid
            .as_ref()
            .and_then(|g| g.distance_lower_bound(z))
            .unwrap_or_else(|| self.closest(z).distance)
    }

    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.closest(z).distance
    }

    /// Even-odd membership; points on the boundary give an unspecified answer.
    pub fn contains(&self, z: Complex64) -> bool {
        if z.re < self.lo.re || z.re > self.hi.re || z.im < self.lo.im || z.im > self.hi.im {
            return false;
        }
        let mut inside = false;
        for s in &self.segs {
            let (p, q) = (s.p, s.q);
            if (p.im > z.im) != (q.im > z.im) {
                let x = p.re + (z.im - p.im) / (q.im - p.im) * (q.re - p.re);
                if x > z.re {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Strictly interior: inside and off the boundary.
    pub fn contains_strictly(&self, z: Complex64) -> bool {
        self.contains(z) && self.boundary_distance(z) > 0.0
    }

    fn adjacent(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.segs[i], &self.segs[j]);
        if a.ring != b.ring {
            return false;
        }
        let len = self.rings[a.ring as usize].len() as u32;
        (a.index + 1) % len == b.index || (b.index + 1) % len == a.index
    }

    fn pair_intersects(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.segs[i], &self.segs[j]);
        if self.adjacent(i, j) {
            // Neighbours share one vertex; only a fold-back overlap counts.
            let shared = if a.q == b.p { a.q } else { a.p };
            let (u, v) = if a.q == b.p { (a.p, b.q) } else { (b.p, a.q) };
            let (du, dv) = (u - shared, v - shared);
            return cross(du, dv) == 0.0 && (du * dv.conj()).re > 0.0;
        }
        segments_intersect(a.p, a.q, b.p, b.q)
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        match &self.grid {
            None => {
                for i in 0..self.segs.len() {
                    for j in (i + 1)..self.segs.len() {
                        if self.pair_intersects(i, j) {
                            return Some((i, j));
                        }
                    }
                }
                None
            }
            Some(g) => {
                for c in 0..(g.nx * g.ny) as usize {
                    let cell = &g.items[g.start[c] as usize..g.start[c + 1] as usize];
                    for (x, &i) in cell.iter().enumerate() {
                        for &j in &cell[x + 1..] {
                            if self.pair_intersects(i as usize, j as usize) {
                                return Some((i as usize, j as usize));
                            }
                        }
                    }
                }
                None
            }
        }
    }

    /// Rings reoriented so that the interior lies on the left of each one:
    /// counter-clockwise at even nesting depth, clockwise at odd depth.
    pub fn oriented_rings(&self) -> Vec<Vec<Complex64>> {
        self.rings
            .iter()
            .enumerate()
            .map(|(r, ring)| {
                let probe = ring[0];
                let depth = self
                    .rings
                    .iter()
                    .enumerate()
                    .filter(|(o, other)| *o != r && ring_contains(other, probe))
                    .count();
                let ccw = signed_area2(ring) > 0.0;
                let mut out = ring.clone();
                if ccw != (depth % 2 == 0) {
                    out.reverse();
                }
                out
            })
            .collect()
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Polygon> {
        Polygon::new(
            self.rings
                .iter()
                .map(|ring| ring.iter().map(|&z| f(z)).collect())
                .collect(),
        )
    }
}

/// Even-odd test against a single ring.
pub fn ring_contains(ring: &[Complex64], z: Complex64) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        if (p.im > z.im) != (q.im > z.im) {
            let x = p.re + (z.im - p.im) / (q.im - p.im) * (q.re - p.re);
            if x > z.re {
                inside = !inside;
            }
        }
    }
    inside
}

/// Inserts vertices so that no edge is longer than `max_len`.
pub fn densify(ring: &[Complex64], max_len: f64, closed: bool) -> Vec<Complex64> {
    let n = ring.len();
    let edges = if closed { n } else { n.saturating_sub(1) };
    let mut out = Vec::with_capacity(n);
    for i in 0..edges {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        let m = ((q - p).norm() / max_len).ceil().max(1.0) as usize;
        for j in 0..m {
            out.push(p + (q - p) * (j as f64 / m as f64));
        }
    }
    if !closed {
        if let Some(&last) = ring.last() {
            out.push(last);
        }
    }
    out
}
