//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use nonoverlap::bounds::log_corollary1_bound;
use nonoverlap::geometry::densify;
use nonoverlap::optimizer::random_system;
use nonoverlap::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bound_identities() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for g in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let eq = vec![2.0 / n as f64; n];
            let c1 = corollary1_bound(n, g)?;
            worst = worst
                .max((theorem1_bound(n, g, &eq)? / c1 - 1.0).abs())
                .max((corollary2_bound(n, g, &eq)? / c1 - 1.0).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e}")))
}

fn t0_bracket() -> Outcome {
    let t0 = find_t0()?;
    Ok((t0 > 1.168 && t0 < 1.170, format!("t0 = {t0:.10}")))
}

fn h_positivity() -> Outcome {
    let mut min = f64::INFINITY;
    for i in 1..1000 {
        min = min.min(h_func(i as f64 * 1e-3)?);
    }
    let h1 = h_func(1.0)?;
    Ok((min > 0.0 && h1.abs() <= 1e-12, format!("min H = {min:.6e}, H(1) = {h1:.1e}")))
}

fn extremal_problem() -> Outcome {
    let mut worst_distance = 0.0f64;
    let mut worst_spread = 0.0f64;
    for n in 2..=8 {
        let o = maximize_product_f(n, 2024 + n as u64)?;
        worst_distance = worst_distance.max(o.best.distance_to_equal());
        worst_spread = worst_spread.max(o.spread());
        if o.starts.len() != 20 {
            return Ok((false, format!("{} starts for n = {n}", o.starts.len())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rejected = 0;
    let mut injected = 0;
    for n in 2..=8 {
        for _ in 0..50 {
            let sys = random_system(n, &mut rng)?;
            let alphas = sys.alphas();
            let big = alphas.iter().cloned().fold(0.0, f64::max);
            if big <= 1.0 {
                continue;
            }
            injected += 1;
            if matches!(exclusion_check(&SimplexPoint::new(alphas.to_vec())?)?, ExclusionVerdict::Rejected { .. }) {
                rejected += 1;
            }
        }
    }
    let ok = worst_distance <= 1e-6 && worst_spread <= 1e-6 && injected > 0 && rejected == injected;
    Ok((
        ok,
        format!("max |α − 2/n| = {worst_distance:.2e}, multistart spread {worst_spread:.2e}, rejected {rejected}/{injected} candidates"),
    ))
}

fn certification() -> Outcome {
    let mut worst = 0.0f64;
    let mut violations = 0;
    for n in 2..=6 {
        for g in [0.25, 0.5, 1.0] {
            let v = verify_inequality(n, g, 1000, 31 * n as u64 + (g * 100.0) as u64)?;
            worst = worst.max(v.max_ratio);
            violations += v.violations;
        }
    }
    Ok((worst <= 1.0 && violations == 0, format!("max ratio {worst:.9}, {violations} violations")))
}

fn wos_calibration() -> Outcome {
    let poly = Polygon::regular(256, c(0.0, 0.0), 1.0)?;
    let cfg = WosConfig::with_samples(100_000, 17);
    let disk = inner_radius_wos(&poly, c(0.0, 0.0), &cfg)?;
    let disk_ok = (disk.value - 1.0).abs() <= 0.01;

    // square mapped by a disk automorphism, polygonized, against |T′(a)|·r(square, a)
    let square = vec![c(-0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5), c(-0.5, 0.5)];
    let t = MoebiusMap::new(c(1.0, 0.0), c(0.4, 0.2), c(0.4, -0.2), c(1.0, 0.0))?;
    let a = c(0.1, -0.05);
    let fine = densify(&square, 1e-3, true);
    let image = fine.iter().map(|&z| t.apply(z)).collect::<Result<Vec<_>>>()?;
    let direct = inner_radius_wos(&Polygon::new(vec![image])?, t.apply(a)?, &cfg)?;
    let pulled = inner_radius_wos(&Polygon::new(vec![square])?, a, &cfg)?.value * t.derivative(a)?.norm();
    let cov = (direct.value / pulled - 1.0).abs();

    let runs = [None, Some(1), Some(2), Some(3)]
        .into_iter()
        .map(|w| inner_radius_wos(&poly, c(0.3, 0.2), &WosConfig { workers: w, ..WosConfig::with_samples(20_000, 99) }))
        .collect::<Result<Vec<_>>>()?;
    let deterministic = runs.windows(2).all(|p| p[0] == p[1]);
    Ok((
        disk_ok && cov <= 0.02 && deterministic,
        format!(
            "r(256-gon, 0) = {:.5} ± {:.5}, covariance gap {:.3}%, worker-independent: {deterministic}",
            disk.value,
            disk.std_error,
            100.0 * cov
        ),
    ))
}

/// `J` of the extremal configuration over `corollary1_bound`, with its
/// standard error.
fn extremal_ratio(n: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let cfg = extremal_config(&QdParams::unit(n, 1.0)?, 1e-3)?;
    let mut log_j = 0.0;
    let mut var = 0.0;
    for (i, d) in cfg.domains.iter().enumerate() {
        let e = inner_radius(d, &WosConfig::with_samples(samples, seed + i as u64))?;
        log_j += e.value.ln();
        var += e.log_std_error().powi(2);
    }
    Ok(((log_j - log_corollary1_bound(n, 1.0)?).exp(), var.sqrt()))
}

fn equality_case() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [3, 4] {
        let (ratio, sigma) = extremal_ratio(n, 1_000_000, 100 * n as u64)?;
        ok &= ratio >= 0.95 && ratio <= 1.0 + 3.0 * sigma;
        detail.push(format!("n = {n}: J/bound = {ratio:.5} (σ = {sigma:.5})"));
    }
    Ok((ok, detail.join(", ")))
}

fn composition() -> Outcome {
    let wos = WosConfig::with_samples(10_000, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut random_max = 0.0f64;
    let (mut flagged, mut failures) = (0, 0);
    for trial in 0..50u64 {
        let system = random_system(3, &mut rng)?;
        let domains = random_disk_config(&system, 1000 + trial)?;
        let report = check_composition_bounds(&system, &domains, &wos.reseeded(trial), false)?;
        random_max = random_max.max(report.max_ratio);
        if !report.passed {
            // 150 one-sided 3σ tests near equality flag about one false
            // alarm in five runs; a flag counts only if an independent
            // estimate with 4x the walks flags it again.
            flagged += 1;
            let confirm = WosConfig::with_samples(40_000, 80).reseeded(trial);
            failures += usize::from(!check_composition_bounds(&system, &domains, &confirm, false)?.passed);
        }
    }
    let cfg = extremal_config(&QdParams::unit(3, 1.0)?, 1e-3)?;
    let report = check_composition_bounds(&cfg.system, &cfg.domains, &WosConfig::with_samples(100_000, 9), false)?;
    let worst = report.entries.iter().map(|e| (e.ratio - 1.0).abs()).fold(0.0, f64::max);
    Ok((
        failures == 0 && worst <= 0.05,
        format!("random: {flagged} flagged, {failures} confirmed violations, max ratio {random_max:.4}; extremal: max |ratio − 1| = {worst:.4}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("bound identities", bound_identities, Duration::from_secs(1)),
        ("t0 bracket", t0_bracket, Duration::from_secs(1)),
        ("H positivity", h_positivity, Duration::from_secs(1)),
        ("extremal-problem optimum", extremal_problem, Duration::from_secs(10)),
        ("inequality certification", certification, Duration::from_secs(60)),
        ("walk-on-spheres calibration", wos_calibration, Duration::from_secs(30)),
        ("equality case", equality_case, Duration::from_secs(600)),
        ("composition inequalities", composition, Duration::from_secs(600)),
    ];
    let mut all = true;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok((p, d)) => (p && elapsed <= budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "criterion {} ({name}): {} | {detail} | {:.2?} of {:?}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed,
            budget
        );
    }
    if !all {
        std::process::exit(1);
    }
}
