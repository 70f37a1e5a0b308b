use std::f64::consts::PI;

use nonoverlap::radii::Method;
use nonoverlap::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn parse(json: &str) -> DomainGeometry {
    serde_json::from_str(json).unwrap()
}

#[test]
fn domain_json_formats() {
    let wos = WosConfig::with_samples(20_000, 3);
    let disk = parse(r#"{"region": {"type": "disk", "center": [0.5, 0.0], "radius": 0.2}, "marked_point": [0.6, 0.0]}"#);
    let e = inner_radius(&disk, &wos).unwrap();
    assert_eq!(e.method, Method::Analytic);
    assert!((e.value - (0.04 - 0.01) / 0.2).abs() < 1e-12);

    let half = parse(r#"{"region": {"type": "half_plane"}, "marked_point": [0.7, 3.0]}"#);
    assert!((inner_radius(&half, &wos).unwrap().value - 1.4).abs() < 1e-12);

    // the exterior of the unit disk at 2 is the inversion image of the disk at 1/2
    let ext = parse(r#"{"region": {"type": "disk_exterior", "center": [0.0, 0.0], "radius": 1.0}, "marked_point": [2.0, 0.0]}"#);
    assert!((inner_radius(&ext, &wos).unwrap().value - 3.0).abs() < 1e-12);

    let image = parse(
        r#"{"region": {"type": "moebius_image",
                       "base": {"type": "disk", "center": [0.0, 0.0], "radius": 1.0},
                       "map": {"a": [2.0, 0.0], "b": [1.0, 1.0], "c": [0.0, 0.0], "d": [1.0, 0.0]}},
            "marked_point": [1.0, 1.0]}"#,
    );
    assert!((inner_radius(&image, &wos).unwrap().value - 2.0).abs() < 1e-12);

    let ring: Vec<[f64; 2]> = (0..512)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 512.0;
            [t.cos(), t.sin()]
        })
        .collect();
    let json = format!(r#"{{"region": {{"type": "polygon", "vertices": {ring:?}}}, "marked_point": [0.0, 0.0]}}"#);
    let e = inner_radius(&parse(&json), &wos).unwrap();
    assert_eq!(e.method, Method::Wos);
    assert!((e.value - 1.0).abs() < 4.0 * e.std_error + 2e-3, "{e:?}");

    // serialization round trip keeps the geometry
    let back: DomainGeometry = serde_json::from_str(&serde_json::to_string(&image).unwrap()).unwrap();
    assert_eq!(back.marked_point(), c(1.0, 1.0));
}

#[test]
fn invalid_domains_are_rejected() {
    assert!(serde_json::from_str::<DomainGeometry>(
        r#"{"region": {"type": "disk", "center": [0.0, 0.0], "radius": 1.0}, "marked_point": [2.0, 0.0]}"#
    )
    .is_err());
    assert!(serde_json::from_str::<DomainGeometry>(
        r#"{"region": {"type": "disk", "center": [0.0, 0.0], "radius": -1.0}, "marked_point": [0.0, 0.0]}"#
    )
    .is_err());
}

#[test]
fn bound_ratio_is_scale_invariant_and_below_one() {
    let gap = 2.0 * PI / 3.0;
    let system = system::RadialSystem::from_polar(&[1.0, 1.0, 1.0], &[2.0 / 3.0; 3]).unwrap();
    let mut last: Option<f64> = None;
    for t in [0.25, 1.0, 7.0] {
        let scaled = system.scaled(t).unwrap();
        let centres: Vec<Complex64> = std::iter::once(c(0.0, 0.0)).chain((0..3).map(|k| Complex64::from_polar(t, gap * k as f64))).collect();
        let radii: Vec<f64> = centres
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let d = DomainGeometry::new(Region::disk(z, if i == 0 { 0.5 * t } else { 0.3 * t }).unwrap(), z).unwrap();
                inner_radius_analytic(d.region(), d.marked_point()).unwrap()
            })
            .collect();
        let r = BoundReport::from_radii(&scaled, 1.0, &radii, "analytic").unwrap();
        assert!(r.ratio < 1.0, "{r:?}");
        if let Some(prev) = last {
            assert!((r.ratio / prev - 1.0).abs() < 1e-12);
        }
        last = Some(r.ratio);
    }
}
