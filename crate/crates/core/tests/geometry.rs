use hlayers::fields::{pair_tau, GridDensity, NegSchauderDensity};
use hlayers::geometry::{is_star_shaped, make_area_mesh, make_grid, star_center, BoundaryCurve};
use hlayers::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

#[test]
fn grid_size_is_validated() {
    for n in [0, 8, 15, 33] {
        assert!(matches!(make_grid(&BoundaryCurve::Kite, n), Err(Error::Config(_))));
    }
    assert!(matches!(make_grid(&BoundaryCurve::circle(0.0), 32), Err(Error::Config(_))));
}

#[test]
fn clockwise_curve_is_rejected() {
    let cw = BoundaryCurve::Fourier { cos: [vec![0.0, 1.0], vec![0.0, 0.0]], sin: [vec![0.0, 0.0], vec![0.0, -1.0]] };
    assert!(matches!(make_grid(&cw, 32), Err(Error::Geometry(_))));
}

#[test]
fn kite_star_center_is_inside() {
    let c = star_center(&BoundaryCurve::Kite).unwrap();
    assert!(is_star_shaped(&BoundaryCurve::Kite, c, 2048));
    let grid = make_grid(&BoundaryCurve::Kite, 128).unwrap();
    assert!(grid.winding(c));
}

#[test]
fn area_mesh_integrates_area() {
    let curve = BoundaryCurve::ellipse(2.0, 0.5);
    let mesh = make_area_mesh(&curve, 16, 64, [0.1, 0.0]).unwrap();
    assert!((mesh.area() - PI).abs() < 1e-12);
    assert!(matches!(make_area_mesh(&BoundaryCurve::Kite, 16, 64, [1.5, 0.0]), Err(Error::Geometry(_))));
}

#[test]
fn density_csv_round_trip() {
    let grid = Arc::new(make_grid(&BoundaryCurve::Kite, 32).unwrap());
    let d = GridDensity::from_fn(&grid, |t, x| C64::new(t.sin(), x[0]));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, d.to_csv()).unwrap();
    let back = GridDensity::read_csv(&grid, &path).unwrap();
    assert_eq!(back.values, d.values);
    std::fs::write(&path, "index,re,im\n0,1,0\n").unwrap();
    assert!(matches!(GridDensity::read_csv(&grid, &path), Err(Error::Shape(_))));
}

#[test]
fn distributional_pairing_needs_operator() {
    let grid = Arc::new(make_grid(&BoundaryCurve::circle(1.0), 32).unwrap());
    let one = GridDensity::constant(&grid, C64::new(1.0, 0.0));
    let tau = NegSchauderDensity::new(one.clone(), one.clone()).unwrap();
    assert!(matches!(pair_tau(&tau, &one, None), Err(Error::State(_))));
    let plain = NegSchauderDensity::from_function(one.clone());
    assert!((pair_tau(&plain, &one, None).unwrap() - 2.0 * PI).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ellipse_grid_invariants(a in 0.3f64..3.0, b in 0.3f64..3.0, half in 8usize..64) {
        let curve = BoundaryCurve::ellipse(a, b);
        let grid = make_grid(&curve, 2 * half).unwrap();
        for i in 0..grid.n {
            let nu = grid.normals[i];
            let tau = grid.tangents[i];
            prop_assert!(((nu[0] * nu[0] + nu[1] * nu[1]) - 1.0).abs() < 1e-12);
            prop_assert!((nu[0] * tau[0] + nu[1] * tau[1]).abs() < 1e-12 * grid.speed[i]);
            // outward: points away from the centre of the ellipse
            let p = grid.points[i];
            prop_assert!(p[0] * nu[0] + p[1] * nu[1] > 0.0);
        }
        prop_assert!(grid.winding([0.0, 0.0]));
        prop_assert!(!grid.winding([1.1 * a, 0.0]));
        prop_assert!((curve.area(512) - PI * a * b).abs() < 1e-10 * a * b);
    }

    #[test]
    fn circle_length_and_curvature(r in 0.1f64..10.0) {
        let grid = make_grid(&BoundaryCurve::circle(r), 64).unwrap();
        prop_assert!((grid.length() - 2.0 * PI * r).abs() < 1e-12 * r);
        for k in &grid.curvature {
            prop_assert!((k - 1.0 / r).abs() < 1e-12 / r);
        }
    }

    #[test]
    fn closest_point_of_circle(r in 0.5f64..3.0, theta in 0.0f64..(2.0 * PI), rho in 0.2f64..2.0) {
        let grid = make_grid(&BoundaryCurve::circle(r), 128).unwrap();
        let x = [rho * r * theta.cos(), rho * r * theta.sin()];
        let (_, dist, side) = grid.closest(x);
        prop_assert!((dist - (rho - 1.0).abs() * r).abs() < 1e-9);
        if (rho - 1.0).abs() > 1e-6 {
            prop_assert_eq!(side, if rho > 1.0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn pairing_is_bilinear(s in -3.0f64..3.0, m in 0u32..6) {
        let grid = Arc::new(make_grid(&BoundaryCurve::Kite, 64).unwrap());
        let u = GridDensity::from_fn(&grid, |t, _| C64::new((m as f64 * t).cos(), 0.0));
        let v = GridDensity::from_fn(&grid, |t, x| C64::new(x[1], t.sin()));
        let su = u.with_values(u.values.iter().map(|z| z * s).collect());
        let lhs = su.pair(&v).unwrap();
        let rhs = u.pair(&v).unwrap() * s;
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        prop_assert!((u.pair(&v).unwrap() - v.pair(&u).unwrap()).norm() < 1e-12);
    }
}
