use hlayers::boundary_ops::assemble_v;
use hlayers::fields::{Field, FnField, GridDensity};
use hlayers::geometry::{make_grid, BoundaryCurve, Point};
use hlayers::kernels::FundamentalSolution;
use hlayers::potentials::{
    dlp_eval, slp_eval, volume_eval, volume_eval_boundary, LayerPotential, NearField, PolarInterpolant, VolumeRule,
};
use hlayers::special::bessel_jy_upto;
use hlayers::{Error, C64};
use std::f64::consts::PI;
use std::sync::Arc;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn gauss_identity_near_and_far() {
    let grid = Arc::new(make_grid(&BoundaryCurve::Kite, 256).unwrap());
    let mu = GridDensity::constant(&grid, one());
    let fs = FundamentalSolution::laplace();
    let mut inside = vec![[-0.2, 0.1], [0.3, -0.5]];
    let mut outside = vec![[2.5, 1.0], [0.0, 3.0]];
    for (i, d) in [(10usize, 1e-3), (77, 1e-2), (150, 3e-4)] {
        let p = grid.points[i];
        let nu = grid.normals[i];
        inside.push([p[0] - d * nu[0], p[1] - d * nu[1]]);
        outside.push([p[0] + d * nu[0], p[1] + d * nu[1]]);
    }
    for v in dlp_eval(&fs, &mu, &inside).unwrap() {
        assert!((v - 1.0).norm() < 1e-10, "{v}");
    }
    for v in dlp_eval(&fs, &mu, &outside).unwrap() {
        assert!(v.norm() < 1e-10, "{v}");
    }
}

#[test]
fn proximity_error_without_upsampling() {
    let grid = Arc::new(make_grid(&BoundaryCurve::circle(1.0), 64).unwrap());
    let mu = GridDensity::constant(&grid, one());
    let pot = LayerPotential::single(FundamentalSolution::laplace(), &mu).with_near_field(NearField::direct());
    assert!(matches!(pot.value_at([0.99, 0.0]), Err(Error::Proximity { .. })));
    assert!(pot.value_at([0.0, 0.0]).is_ok());
}

#[test]
fn helmholtz_single_layer_in_disk() {
    let r = 1.5;
    let grid = Arc::new(make_grid(&BoundaryCurve::circle(r), 256).unwrap());
    let fs = FundamentalSolution::planar(C64::new(1.0, 0.0));
    let k = fs.wavenumber();
    let m = 3usize;
    let tau = GridDensity::from_fn(&grid, |t, _| C64::from_polar(1.0, m as f64 * t));
    let (_, yr) = bessel_jy_upto(m as u32, k * r).unwrap();
    let (jr, _) = bessel_jy_upto(m as u32, k * r).unwrap();
    let hm = jr[m] + C64::i() * yr[m];
    let pts: Vec<Point> = vec![[0.3, 0.2], [1.0, -0.4], [1.4995, 0.0], [0.0, -1.49]];
    let vals = slp_eval(&fs, &tau, &pts).unwrap();
    for (p, v) in pts.iter().zip(vals) {
        let rr = p[0].hypot(p[1]);
        let th = p[1].atan2(p[0]);
        let (j, _) = bessel_jy_upto(m as u32, k * rr).unwrap();
        let exact = C64::new(0.0, -PI * r / 2.0) * j[m] * hm * C64::from_polar(1.0, m as f64 * th);
        assert!((v - exact).norm() < 1e-11, "{p:?}: {v} vs {exact}");
    }
}

#[test]
fn polar_interpolant_reproduces_layer_potential() {
    let grid = Arc::new(make_grid(&BoundaryCurve::Kite, 256).unwrap());
    let fs = FundamentalSolution::planar(C64::new(1.0, 0.0));
    let tau = GridDensity::from_fn(&grid, |t, _| C64::new((t.cos()).exp(), 0.3 * (2.0 * t).sin()));
    let pot = LayerPotential::single(fs, &tau);
    let center = [-0.3, 0.0];
    let trace = assemble_v(&fs, &grid).apply(&tau.values);
    let interp = PolarInterpolant::from_field(&grid.curve, center, 40, 256, &pot, Some(&trace), 256).unwrap();
    for p in [[0.0, 0.0], [-0.9, 0.3], [0.0, 1.0], [-0.8, -1.3], [0.2, 0.01]] {
        let a = interp.value(p);
        let b = pot.value(p);
        assert!((a - b).norm() < 1e-11, "{p:?}: {a} vs {b}");
        let ga = interp.gradient(p);
        let gb = pot.gradient(p);
        assert!((ga[0] - gb[0]).norm() + (ga[1] - gb[1]).norm() < 1e-9, "{p:?}: {ga:?} vs {gb:?}");
    }
}

#[test]
fn volume_potential_of_constant_on_disk() {
    let r = 1.5;
    let curve = BoundaryCurve::circle(r);
    let unit = FnField::new(|_| C64::new(1.0, 0.0), |_| [C64::new(0.0, 0.0); 2]);
    let rule = VolumeRule { radial: 32, angular: 128, center: [0.0, 0.0] };
    let lap = FundamentalSolution::laplace();
    let pts = vec![[0.0, 0.0], [0.7, -0.2], [1.2, 0.8], [3.0, 0.0]];
    let vals = volume_eval(&lap, &unit, &curve, &pts, &rule).unwrap();
    for (p, v) in pts.iter().zip(&vals) {
        let rho2 = p[0] * p[0] + p[1] * p[1];
        let exact = if rho2 < r * r {
            rho2 / 4.0 + r * r * (2.0 * r.ln() - 1.0) / 4.0
        } else {
            r * r / 2.0 * rho2.sqrt().ln()
        };
        assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-14, "{p:?}: {v} vs {exact}");
    }
    let fs = FundamentalSolution::planar(C64::new(1.0, 0.0));
    let k = fs.wavenumber();
    let (jr, yr) = bessel_jy_upto(1, k * r).unwrap();
    let h1 = jr[1] + C64::i() * yr[1];
    let vals = volume_eval(&fs, &unit, &curve, &pts[..3], &rule).unwrap();
    for (p, v) in pts.iter().zip(&vals) {
        let rho = p[0].hypot(p[1]);
        let j0 = hlayers::special::bessel_j(0, k * rho).unwrap();
        let exact = 1.0 + k * r * PI / C64::new(0.0, 2.0) * h1 * j0;
        assert!((v - exact).norm() < 1e-12, "{p:?}: {v} vs {exact}");
    }
    let grid = make_grid(&curve, 128).unwrap();
    let on = volume_eval_boundary(&lap, &unit, &grid, 24).unwrap();
    for v in on {
        assert!((v.re - r * r * r.ln() / 2.0).abs() < 1e-12, "{v}");
    }
}
