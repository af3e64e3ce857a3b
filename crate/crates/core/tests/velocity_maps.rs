use irkwave::butcher::builtin_scheme;
use irkwave::optimizer::rederive;
use irkwave::spatial::{
    group_velocity_reversal, stencil, velocity_map, Boundary, SpatialOperator, StencilKind, VelocityMap,
};

fn interior(kind: StencilKind) -> SpatialOperator {
    SpatialOperator::build(kind, 501, 1.0, Boundary::Closed).unwrap()
}

#[test]
fn qwave_thresholds() {
    let irk24 = builtin_scheme("IRK24").unwrap();
    let lele = group_velocity_reversal(&interior(StencilKind::Lele6), &irk24, 1.0, 250, 400).unwrap().unwrap();
    let cd6 = group_velocity_reversal(&interior(StencilKind::Cd6), &irk24, 1.0, 250, 400).unwrap().unwrap();
    assert!((lele - 2.27).abs() <= 0.03, "{lele}");
    assert!((cd6 - 1.94).abs() <= 0.03, "{cd6}");
}

#[test]
fn zero_dissipation_threshold_is_where_the_symbol_peaks() {
    // for |G| = 1 the group velocity changes sign with d(kh_eq)/d(kh); at a node far from
    // the ends that is the maximum of the interior symbol
    let s = stencil(StencilKind::Lele6).unwrap();
    let (mut lo, mut hi) = (1.0, 3.0);
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if s.symbol(m1) < s.symbol(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let irk24 = builtin_scheme("IRK24").unwrap();
    let got = group_velocity_reversal(&interior(StencilKind::Lele6), &irk24, 0.7, 250, 400).unwrap().unwrap();
    assert!((got - 0.5 * (lo + hi)).abs() < 1e-4, "{got} vs {}", 0.5 * (lo + hi));
}

fn max_map_difference(a: &VelocityMap, b: &VelocityMap) -> f64 {
    let vp = a.vp.iter().flatten().zip(b.vp.iter().flatten());
    let vg = a.vg.iter().flatten().zip(b.vg.iter().flatten());
    vp.chain(vg).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn asymptotic_two_stage_maps_match_gauss() {
    let op = interior(StencilKind::Lele6);
    let nc: Vec<f64> = (1..=8).map(|i| 0.4 * i as f64).collect();
    let kh: Vec<f64> = (1..=31).map(|i| 0.1 * i as f64).collect();
    let reference = velocity_map(&op, &builtin_scheme("IRK24").unwrap(), &nc, &kh, 250).unwrap();
    for name in ["S2D1", "S2D2", "S2D3"] {
        let derived = rederive(name).unwrap().solution.tableau;
        let m = velocity_map(&op, &derived, &nc, &kh, 250).unwrap();
        assert!(max_map_difference(&m, &reference) <= 1e-10, "derived {name}");
        // printed rows carry ten digits, so Y is off by up to ~2e-11
        let m = velocity_map(&op, &builtin_scheme(name).unwrap(), &nc, &kh, 250).unwrap();
        assert!(max_map_difference(&m, &reference) <= 1e-9, "published {name}");
    }
}

#[test]
fn single_cell_map() {
    let op = interior(StencilKind::Cd6);
    let m = velocity_map(&op, &builtin_scheme("IRK24").unwrap(), &[1.0], &[1.0], 250).unwrap();
    assert_eq!(m.to_csv().lines().count(), 2);
}
