use iadas::channel::{
    build_geometry, draw_das_channels, draw_rayleigh, hexagon_contains, NetworkGeometry, Point, Propagation,
    SystemShape,
};
use iadas::mathcore::RandomSeed;
use iadas::Error;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn rayleigh_grid_dimensions() {
    let shape = SystemShape::new(3, 2, 2, 1, 2).unwrap();
    let set = draw_rayleigh(shape, RandomSeed::new(1, 0));
    assert_eq!(set.links().len(), 9);
    assert!(set.links().iter().all(|h| h.shape() == (2, 2)));
}

#[test]
fn rayleigh_entries_have_unit_variance() {
    let shape = SystemShape::new(4, 25, 25, 1, 1).unwrap();
    let entries: Vec<Complex64> = (0..10)
        .flat_map(|t| {
            draw_rayleigh(shape, RandomSeed::new(3, t)).links().iter().flat_map(|h| h.iter().copied()).collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(entries.len(), 100_000);
    let n = entries.len() as f64;
    let mean = entries.iter().sum::<Complex64>() / n;
    let var = entries.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    assert!(mean.norm() <= 0.02, "mean {mean}");
    assert!((0.98..=1.02).contains(&var), "variance {var}");
    // Real and imaginary parts each carry half the power.
    let re = entries.iter().map(|z| z.re * z.re).sum::<f64>() / n;
    assert!((re - 0.5).abs() < 0.01, "real power {re}");
}

#[test]
fn rayleigh_is_deterministic_per_seed() {
    let shape = SystemShape::new(3, 4, 6, 2, 4).unwrap();
    assert_eq!(draw_rayleigh(shape, RandomSeed::new(8, 1)), draw_rayleigh(shape, RandomSeed::new(8, 1)));
    assert_ne!(draw_rayleigh(shape, RandomSeed::new(8, 1)), draw_rayleigh(shape, RandomSeed::new(8, 2)));
}

#[test]
fn geometry_layout() {
    let geom = build_geometry(300.0, 7, RandomSeed::new(1, 1)).unwrap();
    assert_eq!(geom.cells(), 7);
    assert_eq!(geom.rrus(), 5);
    assert!(geom.rru_offsets.iter().any(|p| (p.x - 200.0).abs() < 1e-12 && p.y.abs() < 1e-12));
    for off in &geom.rru_offsets[1..] {
        assert!((off.norm() - 200.0).abs() < 1e-9);
    }
    assert_eq!(geom.cell_centers[0], Point::ORIGIN);
    for c in &geom.cell_centers[1..] {
        assert!((c.norm() - 300.0 * 3f64.sqrt()).abs() < 1e-9);
        assert!((c.norm() - 519.6).abs() < 0.05);
    }
    // Neighbouring outer centres are also one lattice step apart.
    let spacing = geom.cell_centers[1].distance(&geom.cell_centers[2]);
    assert!((spacing - 300.0 * 3f64.sqrt()).abs() < 1e-9);
    for (cell, user) in geom.user_positions.iter().enumerate() {
        assert!(geom.contains(cell, user));
    }
}

#[test]
fn uniform_users_fill_the_hexagon() {
    let r = 300.0;
    let mut geom = NetworkGeometry::cluster(r, Propagation::default()).unwrap();
    let mut rng = RandomSeed::new(12, 0).rng();
    let n = 10_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let p = geom.sample_in_cell(&mut rng, 0);
        assert!(hexagon_contains(r, &p));
        sum += p.norm();
    }
    // Mean distance from the centre of a uniform point in a regular hexagon
    // of circumradius R, integrated over one of its six equilateral triangles
    // in polar coordinates: R (1/3 + ln 3 / 4).
    let analytic = r * (1.0 / 3.0 + 3f64.ln() / 4.0);
    let mean = sum / n as f64;
    assert!((mean - analytic).abs() < 0.01 * analytic, "{mean} vs {analytic}");

    // Independent check of the closed form by midpoint quadrature over the
    // wedge |θ| ≤ 30°, where the boundary is at h / cos θ.
    let h = r * 3f64.sqrt() / 2.0;
    let steps = 20_000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..steps {
        let theta = -std::f64::consts::PI / 6.0 + (i as f64 + 0.5) * (std::f64::consts::PI / 3.0) / steps as f64;
        let rho = h / theta.cos();
        num += rho.powi(3) / 3.0;
        den += rho.powi(2) / 2.0;
    }
    assert!((num / den - analytic).abs() < 1e-6 * analytic);

    geom.place_users_uniformly(&mut rng);
    assert!(geom.user_positions.iter().enumerate().all(|(c, p)| geom.contains(c, p)));
}

#[test]
fn geometry_rejects_other_user_counts() {
    assert!(matches!(build_geometry(300.0, 3, RandomSeed::new(0, 0)), Err(Error::UnsupportedTopology(_))));
    assert!(matches!(build_geometry(-1.0, 7, RandomSeed::new(0, 0)), Err(Error::DomainError(_))));
}

fn quiet_geometry() -> NetworkGeometry {
    let prop = Propagation { shadow_std_db: 0.0, ..Propagation::default() };
    NetworkGeometry::cluster(300.0, prop).unwrap()
}

#[test]
fn pathloss_floor_sets_the_reference_variance() {
    let mut geom = quiet_geometry();
    geom.user_positions[0] = geom.rru_position(0, 1);
    let shape = SystemShape::new(7, 10, 2, 1, 5).unwrap();
    let expected = 10f64.powf(-38.5 / 10.0);
    let mut power = 0.0;
    let mut count = 0usize;
    for t in 0..500 {
        let das = draw_das_channels(&geom, shape, RandomSeed::new(4, t)).unwrap();
        assert!((das.gain(0, 0, 1) / expected - 1.0).abs() < 1e-12);
        let block = das.channels.link(0, 0).columns(2, 2);
        power += block.iter().map(|z| z.norm_sqr()).sum::<f64>();
        count += block.len();
    }
    let ratio = power / count as f64 / expected;
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn doubling_distance_scales_gain_by_the_exponent() {
    let shape = SystemShape::new(7, 5, 1, 1, 5).unwrap();
    let gain_at = |d: f64| {
        let mut geom = quiet_geometry();
        geom.user_positions[0] = Point::new(d, 0.0);
        draw_das_channels(&geom, shape, RandomSeed::new(0, 0)).unwrap().gain(0, 0, 0)
    };
    let ratio = gain_at(80.0) / gain_at(40.0);
    assert!((ratio - 2f64.powf(-3.7)).abs() < 1e-12, "{ratio}");
}

#[test]
fn shadowing_residual_has_configured_spread() {
    let geom = build_geometry(300.0, 7, RandomSeed::new(2, 0)).unwrap();
    let shape = SystemShape::new(7, 5, 1, 1, 5).unwrap();
    let mut residuals = Vec::new();
    let mut t = 0;
    while residuals.len() < 100_000 {
        let das = draw_das_channels(&geom, shape, RandomSeed::new(5, t)).unwrap();
        for rx in 0..7 {
            for tx in 0..7 {
                for r in 0..5 {
                    let d = geom.user_positions[rx].distance(&geom.rru_position(tx, r));
                    residuals.push(das.gain_db(rx, tx, r) + geom.propagation.pathloss_db(d));
                }
            }
        }
        t += 1;
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let std = (residuals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 0.1, "{mean}");
    assert!((std - 8.0).abs() <= 0.1, "{std}");
}

#[test]
fn das_rejects_mismatched_shapes() {
    let geom = build_geometry(300.0, 7, RandomSeed::new(2, 0)).unwrap();
    let four = SystemShape::new(7, 8, 2, 1, 4).unwrap();
    assert!(matches!(draw_das_channels(&geom, four, RandomSeed::new(0, 0)), Err(Error::GeometryMismatch(_))));
    let three_users = SystemShape::new(3, 5, 2, 1, 5).unwrap();
    assert!(matches!(draw_das_channels(&geom, three_users, RandomSeed::new(0, 0)), Err(Error::GeometryMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn das_draws_are_deterministic_and_finite(seed in any::<u64>(), per_rru in 1usize..4) {
        let geom = build_geometry(300.0, 7, RandomSeed::new(seed, 1)).unwrap();
        let shape = SystemShape::new(7, 5 * per_rru, 2, 1, 5).unwrap();
        let a = draw_das_channels(&geom, shape, RandomSeed::new(seed, 2)).unwrap();
        let b = draw_das_channels(&geom, shape, RandomSeed::new(seed, 2)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.channels.links().iter().all(|h| h.iter().all(|z| z.re.is_finite() && z.im.is_finite())));
        prop_assert_eq!(a.gains_db.len(), 7 * 7 * 5);
    }

    #[test]
    fn shape_invariants(k in 1usize..5, nt in 1usize..9, nr in 1usize..9, ns in 1usize..5, rrus in 1usize..9) {
        let ok = nt % rrus == 0 && ns <= nt.min(nr);
        prop_assert_eq!(SystemShape::new(k, nt, nr, ns, rrus).is_ok(), ok);
        if ok {
            prop_assert_eq!(SystemShape::new(k, nt, nr, ns, rrus).unwrap().antennas_per_rru(), nt / rrus);
        }
    }
}
