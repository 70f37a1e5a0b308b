//! A fast invariant suite, run by `nonoverlap selfcheck`.

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{big_f, corollary1_bound, corollary2_bound, find_t0, h_func, theorem1_bound};
use crate::error::Result;
use crate::moebius::MoebiusMap;
use crate::optimizer::{maximize_product_f, verify_inequality};
use crate::quad_diff::{critical_points, q_value, QdParams};
use crate::radii::{inner_radius_wos, WosConfig};
use crate::geometry::Polygon;
use crate::system::{chi, l_gamma, RadialSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub checks: Vec<Check>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_selfcheck(seed: u64) -> SelfCheckReport {
    let checks = vec![
        check("f-values", (|| {
            let (f1, f2) = (big_f(1.0)?, big_f(2.0)?);
            let ok = (f1 - 128.0 * 3f64.powf(-4.5)).abs() < 1e-12 && (f2 - 0.5).abs() < 1e-12;
            Ok((ok, format!("F(1) = {f1:.9}, F(2) = {f2:.9}")))
        })()),
        check("t0-and-h", (|| {
            let t0 = find_t0()?;
            let h_min = (1..1000).map(|i| h_func(1e-3 * i as f64)).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
            Ok(((t0 - 1.16938).abs() < 1e-5 && h_min > 0.0, format!("t0 = {t0:.8}, min H = {h_min:.6}")))
        })()),
        check("equal-gap-identities", (|| {
            let mut worst = 0.0f64;
            for n in 2..=8 {
                for g in [0.1, 0.5, 1.0] {
                    let eq = vec![2.0 / n as f64; n];
                    let c1 = corollary1_bound(n, g)?;
                    worst = worst
                        .max((theorem1_bound(n, g, &eq)? / c1 - 1.0).abs())
                        .max((corollary2_bound(n, g, &eq)? / c1 - 1.0).abs());
                }
            }
            Ok((worst < 1e-12, format!("max relative gap {worst:.2e}")))
        })()),
        check("chi-symmetry", (|| {
            let worst = [0.3, 1.0, 2.7].iter().map(|&t| Ok((chi(t)? - chi(1.0 / t)?).abs())).collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
            Ok((worst < 1e-14, format!("max |chi(t) - chi(1/t)| = {worst:.2e}")))
        })()),
        check("l-gamma-scaling", (|| {
            let s = RadialSystem::from_polar(&[0.8, 1.3, 1.1], &[0.5, 0.9, 0.6])?;
            let (g, t) = (0.7, 1.9);
            let ratio = l_gamma(&s.scaled(t)?, g)? / l_gamma(&s, g)?;
            let expect = t.powf(3.0 + g);
            Ok(((ratio / expect - 1.0).abs() < 1e-12, format!("ratio {ratio:.9} vs {expect:.9}")))
        })()),
        check("moebius-round-trip", (|| {
            let m = MoebiusMap::new(Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0), Complex64::new(3.0, -1.0))?;
            let z = Complex64::new(0.3, -0.7);
            let err = (m.inverse().apply(m.apply(z)?)? - z).norm();
            Ok((err < 1e-12, format!("round-trip error {err:.2e}")))
        })()),
        check("optimizer-equal-gaps", (|| {
            let mut worst = 0.0f64;
            for n in 2..=5 {
                worst = worst.max(maximize_product_f(n, seed)?.best.distance_to_equal());
            }
            Ok((worst < 1e-6, format!("max distance to equal gaps {worst:.2e}")))
        })()),
        check("random-disks", (|| {
            let v = verify_inequality(3, 0.5, 200, seed)?;
            Ok((v.violations == 0, format!("max ratio {:.6} over {} trials", v.max_ratio, v.trials)))
        })()),
        check("wos-disk", (|| {
            let poly = Polygon::regular(512, Complex64::new(0.0, 0.0), 1.0)?;
            let est = inner_radius_wos(&poly, Complex64::new(0.3, 0.0), &WosConfig::with_samples(20_000, seed))?;
            let exact = 0.91;
            let ok = (est.value - exact).abs() <= 4.0 * est.std_error + 2e-3;
            Ok((ok, format!("{:.5} ± {:.5} vs {exact}", est.value, est.std_error)))
        })()),
        check("critical-points", (|| {
            let mut worst = 0.0f64;
            for n in 2..=6 {
                let p = QdParams::unit(n, 0.8)?;
                for z in critical_points(&p).zeros {
                    worst = worst.max(q_value(&p, z)?.norm());
                }
            }
            Ok((worst < 1e-10, format!("max |Q(zero)| = {worst:.2e}")))
        })()),
    ];
    SelfCheckReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass() {
        let r = run_selfcheck(7);
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
