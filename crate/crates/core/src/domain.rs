//! Marked domains: analytic families, Möbius images and polygonal regions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Polygon;
use crate::moebius::MoebiusMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    /// `{Re z > 0}`.
    HalfPlane,
    /// `{|z − center| > radius} ∪ {∞}`.
    DiskExterior { center: Complex64, radius: f64 },
    /// `map(base)`.
    MoebiusImage { base: Box<Region>, map: MoebiusMap },
    Polygon(Polygon),
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Result<Region> {
        check_radius(radius)?;
        Ok(Region::Disk { center, radius })
    }

    pub fn disk_exterior(center: Complex64, radius: f64) -> Result<Region> {
        check_radius(radius)?;
        Ok(Region::DiskExterior { center, radius })
    }

    pub fn moebius_image(base: Region, map: MoebiusMap) -> Region {
        Region::MoebiusImage {
            base: Box::new(base),
            map,
        }
    }

    /// Open-set membership for finite points.
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::HalfPlane => z.re > 0.0,
            Region::DiskExterior { center, radius } => (z - center).norm() > *radius,
            Region::MoebiusImage { base, map } => match map.inverse().apply(z) {
                Ok(w) => base.contains(w),
                // z is the image of ∞
                Err(_) => base.contains_infinity(),
            },
            Region::Polygon(p) => p.contains_strictly(z),
        }
    }

    fn contains_infinity(&self) -> bool {
        match self {
            Region::DiskExterior { .. } => true,
            Region::MoebiusImage { base, map } => {
                let [_, _, c, d] = map.coefficients();
                if c.norm() == 0.0 {
                    base.contains_infinity()
                } else {
                    // ∞ = map(w) with w = -d/c
                    base.contains(-d / c)
                }
            }
            _ => false,
        }
    }

    /// True when no polygon is involved, so closed forms apply.
    pub fn is_analytic(&self) -> bool {
        match self {
            Region::Polygon(_) => false,
            Region::MoebiusImage { base, .. } => base.is_analytic(),
            _ => true,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid(format!("radius {radius} is not positive")));
    }
    Ok(())
}

/// A domain `B` together with its marked point `a ∈ B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct DomainGeometry {
    region: Region,
    marked_point: Complex64,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    region: Region,
    marked_point: Complex64,
}

impl TryFrom<DomainRepr> for DomainGeometry {
    type Error = Error;

    fn try_from(r: DomainRepr) -> Result<Self> {
        DomainGeometry::new(r.region, r.marked_point)
    }
}

impl From<DomainGeometry> for DomainRepr {
    fn from(d: DomainGeometry) -> Self {
        DomainRepr {
            region: d.region,
            marked_point: d.marked_point,
        }
    }
}

impl DomainGeometry {
    /// Validates radii and that the marked point is strictly interior.
    pub fn new(region: Region, marked_point: Complex64) -> Result<Self> {
        if let Region::Disk { radius, .. } | Region::DiskExterior { radius, .. } = &region {
            check_radius(*radius)?;
        }
        if !marked_point.is_finite() || !region.contains(marked_point) {
            return Err(Error::NotInterior(marked_point));
        }
        Ok(DomainGeometry {
            region,
            marked_point,
        })
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Region::disk(center, radius)?, center)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn marked_point(&self) -> Complex64 {
        self.marked_point
    }

    /// Same region with a different marked point.
    pub fn with_marked_point(&self, z: Complex64) -> Result<Self> {
        Self::new(self.region.clone(), z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn marked_point_must_be_interior() {
        assert!(DomainGeometry::new(Region::disk(c(0.0, 0.0), 1.0).unwrap(), c(0.5, 0.0)).is_ok());
        assert!(DomainGeometry::new(Region::disk(c(0.0, 0.0), 1.0).unwrap(), c(1.0, 0.0)).is_err());
        assert!(DomainGeometry::new(Region::HalfPlane, c(0.0, 3.0)).is_err());
        assert!(DomainGeometry::new(Region::HalfPlane, c(3.0, 0.0)).is_ok());
        assert!(Region::disk(c(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn moebius_image_membership() {
        // 1/z maps the exterior of the unit disk onto the punctured unit disk
        let r = Region::moebius_image(Region::disk_exterior(c(0.0, 0.0), 1.0).unwrap(), MoebiusMap::inversion());
        assert!(r.contains(c(0.5, 0.0)));
        assert!(r.contains(c(0.0, 0.0)));
        assert!(!r.contains(c(2.0, 0.0)));
    }

    #[test]
    fn json_round_trip() {
        let d = DomainGeometry::new(
            Region::moebius_image(Region::disk(c(0.0, 0.0), 1.0).unwrap(), MoebiusMap::inversion()),
            c(3.0, 0.0),
        )
        .unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: DomainGeometry = serde_json::from_str(&text).unwrap();
        assert_eq!(d, back);
        let bad = text.replace("[3.0,0.0]", "[0.5,0.0]");
        assert!(serde_json::from_str::<DomainGeometry>(&bad).is_err());
    }
}
