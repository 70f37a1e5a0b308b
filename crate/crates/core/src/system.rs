//! n-radial point systems, the `χ` function and the `L^(γ)` normalizer.
//!
//! Indices are zero-based and cyclic: `points[k]` is `a_{k+1}`, and the
//! sector `P_k` lies between `thetas[k]` and `thetas[k + 1]`.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Structural tolerance for angle bookkeeping.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// An n-radial system `A_n = {a_1, …, a_n}` with `0 = arg a_1 < … < arg a_n < 2π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct RadialSystem {
    points: Vec<Complex64>,
    /// `n + 1` angles, `thetas[0] = 0` and `thetas[n] = 2π`.
    thetas: Vec<f64>,
    /// `α_k = (θ_{k+1} − θ_k)/π`, summing to 2.
    alphas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    points: Vec<Complex64>,
}

impl TryFrom<SystemRepr> for RadialSystem {
    type Error = Error;

    fn try_from(repr: SystemRepr) -> Result<Self> {
        make_radial_system(&repr.points)
    }
}

impl From<RadialSystem> for SystemRepr {
    fn from(system: RadialSystem) -> Self {
        SystemRepr {
            points: system.points,
        }
    }
}

/// Builds a system from raw points, rejecting anything that is not already
/// in standard position (see [`rotate_to_standard`]).
pub fn make_radial_system(points: &[Complex64]) -> Result<RadialSystem> {
    let n = points.len();
    if n < 2 {
        return Err(invalid(format!("an n-radial system needs n >= 2 points, got {n}")));
    }
    for (k, p) in points.iter().enumerate() {
        if !(p.re.is_finite() && p.im.is_finite()) {
            return Err(invalid(format!("point {k} is not finite")));
        }
        if p.norm() == 0.0 {
            return Err(invalid(format!("point {k} is zero")));
        }
    }
    let first = points[0];
    if first.re <= 0.0 || first.im.abs() > STRUCTURAL_TOL * first.norm() {
        return Err(invalid(format!(
            "arg a_1 must be 0, got {} (use rotate_to_standard)",
            first.arg()
        )));
    }

    let mut thetas = Vec::with_capacity(n + 1);
    thetas.push(0.0);
    for p in &points[1..] {
        let mut t = p.im.atan2(p.re);
        if t < 0.0 {
            t += TAU;
        }
        thetas.push(t);
    }
    thetas.push(TAU);
    for k in 0..n {
        if thetas[k + 1] - thetas[k] <= STRUCTURAL_TOL {
            return Err(invalid(format!(
                "arguments must be strictly increasing: θ_{} = {} and θ_{} = {}",
                k + 1,
                thetas[k],
                k + 2,
                thetas[k + 1]
            )));
        }
    }
    let alphas = thetas.windows(2).map(|w| (w[1] - w[0]) / PI).collect();
    Ok(RadialSystem {
        points: points.to_vec(),
        thetas,
        alphas,
    })
}

/// Rotates `points` so that the first one lies on the positive real axis.
pub fn rotate_to_standard(points: &[Complex64]) -> Result<Vec<Complex64>> {
    let first = points
        .first()
        .ok_or_else(|| invalid("empty point list"))?;
    if first.norm() == 0.0 {
        return Err(invalid("point 0 is zero"));
    }
    let rot = Complex64::from_polar(1.0, -first.arg());
    let mut out: Vec<Complex64> = points.iter().map(|p| p * rot).collect();
    out[0] = Complex64::new(first.norm(), 0.0);
    Ok(out)
}

impl RadialSystem {
    /// Builds a system from moduli and exact angular gaps (`α_k`, summing to 2).
    pub fn from_polar(moduli: &[f64], alphas: &[f64]) -> Result<Self> {
        let n = moduli.len();
        if n < 2 || alphas.len() != n {
            return Err(invalid(format!(
                "need n >= 2 moduli and as many gaps, got {} and {}",
                n,
                alphas.len()
            )));
        }
        if let Some(m) = moduli.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(invalid(format!("modulus {m} is not positive")));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(invalid(format!("gap {a} is not positive")));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 2.0).abs() > STRUCTURAL_TOL {
            return Err(invalid(format!("gaps sum to {total}, expected 2")));
        }
        let mut thetas = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        thetas.push(0.0);
        for a in &alphas[..n - 1] {
            acc += a * PI;
            thetas.push(acc);
        }
        thetas.push(TAU);
        let points = moduli
            .iter()
            .zip(&thetas)
            .map(|(&r, &t)| if t == 0.0 { Complex64::new(r, 0.0) } else { Complex64::from_polar(r, t) })
            .collect();
        Ok(RadialSystem {
            points,
            thetas,
            alphas: alphas.to_vec(),
        })
    }

    /// `n` points of modulus `radius` at angles `2πk/n`.
    pub fn equally_spaced(n: usize, radius: f64) -> Result<Self> {
        Self::from_polar(&vec![radius; n], &vec![2.0 / n as f64; n])
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `a_k` with cyclic indexing.
    pub fn point(&self, k: isize) -> Complex64 {
        self.points[k.rem_euclid(self.n() as isize) as usize]
    }

    /// `α_k` with cyclic indexing, so `alpha(-1)` is the last gap.
    pub fn alpha(&self, k: isize) -> f64 {
        self.alphas[k.rem_euclid(self.n() as isize) as usize]
    }

    /// Homothety `t·A_n`; angles are kept exactly.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("scale factor {t} is not positive")));
        }
        Ok(RadialSystem {
            points: self.points.iter().map(|p| p * t).collect(),
            thetas: self.thetas.clone(),
            alphas: self.alphas.clone(),
        })
    }

    pub fn sum_alphas(&self) -> f64 {
        self.alphas.iter().sum()
    }
}

/// `χ(t) = (t + 1/t)/2`.
pub fn chi(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            range: "(0, ∞)",
        });
    }
    Ok(0.5 * (t + t.recip()))
}

/// `ln χ(e^u)` without overflow: `ln cosh u`.
pub(crate) fn log_chi_of_log(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

fn check_gamma_positive(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma,
            range: "(0, ∞)",
        });
    }
    Ok(())
}

/// `ln L^(γ)(A_n)`.
pub fn log_l_gamma(system: &RadialSystem, gamma: f64) -> Result<f64> {
    check_gamma_positive(gamma)?;
    let n = system.n() as isize;
    let mut acc = 0.0;
    for k in 0..n {
        let ak = system.alpha(k);
        let lk = system.point(k).norm().ln();
        let lk1 = system.point(k + 1).norm().ln();
        let u = (lk - lk1) / (2.0 * ak);
        acc += (1.0 - 0.5 * gamma * ak * ak) * log_chi_of_log(u);
        acc += (1.0 + 0.25 * gamma * (ak + system.alpha(k - 1))) * lk;
    }
    Ok(acc)
}

/// `L^(γ)(A_n) = ∏ χ(|a_k/a_{k+1}|^{1/(2α_k)})^{1−γα_k²/2} · ∏ |a_k|^{1+γ(α_k+α_{k−1})/4}`.
pub fn l_gamma(system: &RadialSystem, gamma: f64) -> Result<f64> {
    log_l_gamma(system, gamma).map(f64::exp)
}

/// Rescales the system so that `L^(γ) = 1`; the factor is `L^{−1/(n+γ)}`.
pub fn normalize_system(system: &RadialSystem, gamma: f64) -> Result<RadialSystem> {
    let log_l = log_l_gamma(system, gamma)?;
    system.scaled((-log_l / (system.n() as f64 + gamma)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quarter_turns() {
        let s = make_radial_system(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
        for a in s.alphas() {
            assert!((a - 0.5).abs() < 1e-15);
        }
        assert_eq!(s.thetas().len(), 5);
    }

    #[test]
    fn antipodal_pair() {
        let s = make_radial_system(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(s.alphas(), &[1.0, 1.0]);
    }

    #[test]
    fn uneven_triple() {
        let p = Complex64::from_polar(1.0, PI / 3.0);
        let s = make_radial_system(&[c(1.0, 0.0), p, c(-1.0, 0.0)]).unwrap();
        let want = [1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, w) in s.alphas().iter().zip(want) {
            assert!((a - w).abs() < 1e-14, "{a} vs {w}");
        }
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(make_radial_system(&[c(1.0, 0.0)]).is_err());
        assert!(make_radial_system(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(make_radial_system(&[c(1.0, 0.0), c(f64::INFINITY, 1.0)]).is_err());
        // arg a_1 != 0
        assert!(make_radial_system(&[c(0.0, 1.0), c(-1.0, 0.0)]).is_err());
        // duplicate argument
        assert!(make_radial_system(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 2.0)]).is_err());
        // non-monotone
        assert!(make_radial_system(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)]).is_err());
    }

    #[test]
    fn rotation_helper_is_explicit() {
        let raw = [c(0.0, 2.0), c(-1.0, 0.0)];
        assert!(make_radial_system(&raw).is_err());
        let s = make_radial_system(&rotate_to_standard(&raw).unwrap()).unwrap();
        assert_eq!(s.point(0), c(2.0, 0.0));
        assert!((s.alphas()[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(1.0).unwrap(), 1.0);
        assert_eq!(chi(2.0).unwrap(), 1.25);
        for t in [0.1, 0.5, 3.0] {
            assert!((chi(t).unwrap() - chi(1.0 / t).unwrap()).abs() < 1e-14);
        }
        assert!(chi(0.0).is_err());
        assert!(chi(-1.0).is_err());
    }

    #[test]
    fn log_chi_matches_direct() {
        for u in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            let direct = chi(f64::exp(u)).unwrap().ln();
            assert!((log_chi_of_log(u) - direct).abs() < 1e-14);
        }
        assert!(log_chi_of_log(2000.0).is_finite());
    }

    #[test]
    fn l_gamma_examples() {
        for n in 2..8 {
            let s = RadialSystem::equally_spaced(n, 1.0).unwrap();
            assert!((l_gamma(&s, 0.7).unwrap() - 1.0).abs() < 1e-14);
        }
        let s = make_radial_system(&[c(2.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert!((l_gamma(&s, 1.0).unwrap() - 8.0).abs() < 1e-12);
        let unit = normalize_system(&s, 1.0).unwrap();
        assert!((unit.point(0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((unit.point(1) - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn normalized_system_is_fixed() {
        let s = RadialSystem::equally_spaced(5, 1.0).unwrap();
        let t = normalize_system(&s, 0.5).unwrap();
        for (p, q) in s.points().iter().zip(t.points()) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    fn arb_system() -> impl Strategy<Value = RadialSystem> {
        (2usize..9).prop_flat_map(|n| {
            (
                prop::collection::vec(0.2f64..5.0, n),
                prop::collection::vec(0.05f64..1.0, n),
            )
                .prop_map(|(moduli, raw)| {
                    let total: f64 = raw.iter().sum();
                    let mut gaps: Vec<f64> = raw.iter().map(|g| 2.0 * g / total).collect();
                    let head: f64 = gaps[..gaps.len() - 1].iter().sum();
                    *gaps.last_mut().unwrap() = 2.0 - head;
                    RadialSystem::from_polar(&moduli, &gaps).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn alphas_sum_to_two(s in arb_system()) {
            prop_assert!((s.sum_alphas() - 2.0).abs() <= 1e-12);
            let rebuilt = make_radial_system(s.points()).unwrap();
            prop_assert!((rebuilt.sum_alphas() - 2.0).abs() <= 1e-12);
        }

        #[test]
        fn l_gamma_scale_law(s in arb_system(), t in 0.1f64..10.0, gamma in 0.05f64..1.0) {
            let base = l_gamma(&s, gamma).unwrap();
            let scaled = l_gamma(&s.scaled(t).unwrap(), gamma).unwrap();
            let expect = t.powf(s.n() as f64 + gamma);
            prop_assert!(((scaled / base) - expect).abs() / expect <= 1e-10);
        }

        #[test]
        fn normalization_is_idempotent(s in arb_system(), gamma in 0.05f64..1.0) {
            let once = normalize_system(&s, gamma).unwrap();
            prop_assert!((l_gamma(&once, gamma).unwrap() - 1.0).abs() <= 1e-10);
            let twice = normalize_system(&once, gamma).unwrap();
            for (p, q) in once.points().iter().zip(twice.points()) {
                prop_assert!((p - q).norm() <= 1e-10 * p.norm());
            }
        }

        #[test]
        fn chi_bounded_below(t in 1e-6f64..1e6) {
            let v = chi(t).unwrap();
            prop_assert!(v >= 1.0);
            prop_assert!((v - chi(1.0 / t).unwrap()).abs() <= 1e-14 * v);
        }
    }

    #[test]
    fn json_shape() {
        let s = make_radial_system(&[c(1.0, 0.0), c(-1.0, 0.5)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"points":[[1.0,0.0],[-1.0,0.5]]}"#);
        let back: RadialSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<RadialSystem>(r#"{"points":[[0.0,1.0],[-1.0,0.0]]}"#).is_err());
    }
}
