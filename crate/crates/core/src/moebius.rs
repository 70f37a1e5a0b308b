//! Fractional-linear maps `z ↦ (az + b)/(cz + d)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DET_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MoebiusRepr", into = "MoebiusRepr")]
pub struct MoebiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

#[derive(Serialize, Deserialize)]
struct MoebiusRepr {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<MoebiusRepr> for MoebiusMap {
    type Error = Error;

    fn try_from(r: MoebiusRepr) -> Result<Self> {
        MoebiusMap::new(r.a, r.b, r.c, r.d)
    }
}

impl From<MoebiusMap> for MoebiusRepr {
    fn from(m: MoebiusMap) -> Self {
        MoebiusRepr {
            a: m.a,
            b: m.b,
            c: m.c,
            d: m.d,
        }
    }
}

impl MoebiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > DET_TOL) || ![a, b, c, d].iter().all(|z| z.is_finite()) {
            return Err(Error::Invalid(format!("degenerate Möbius map, det = {det}")));
        }
        Ok(MoebiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        MoebiusMap { a: i, b: o, c: o, d: i }
    }

    /// `z ↦ 1/z`, an involution exchanging `0` and `∞`.
    pub fn inversion() -> Self {
        let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        MoebiusMap { a: o, b: i, c: i, d: o }
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    fn denominator(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        let scale = self.c.norm() * z.norm() + self.d.norm();
        if den.norm() <= 1e-14 * scale || !z.is_finite() {
            return Err(Error::Singular(format!("{z} is the pole of the map")));
        }
        Ok(den)
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = self.denominator(z)?;
        Ok((self.a * z + self.b) / den)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.denominator(z)?;
        Ok(self.determinant() / (den * den))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// True when both maps induce the same transformation (coefficients
    /// proportional) up to `tol` relative to the larger coefficient.
    pub fn same_map(&self, other: &MoebiusMap, tol: f64) -> bool {
        let mine = self.coefficients();
        let theirs = other.coefficients();
        let pivot = (0..4)
            .max_by(|&i, &j| mine[i].norm().total_cmp(&mine[j].norm()))
            .unwrap_or(0);
        if theirs[pivot].norm() == 0.0 {
            return false;
        }
        let lambda = mine[pivot] / theirs[pivot];
        let scale = mine[pivot].norm();
        mine.iter()
            .zip(theirs.iter())
            .all(|(m, t)| (m - lambda * t).norm() <= tol * scale)
    }

    pub fn is_inversion(&self) -> bool {
        self.same_map(&MoebiusMap::inversion(), 1e-14)
    }
}
