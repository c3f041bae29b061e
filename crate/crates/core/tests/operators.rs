use hlayers::boundary_ops::{assemble_v, assemble_w, assemble_wt, steklov_poincare};
use hlayers::geometry::{make_grid, BoundaryCurve};
use hlayers::kernels::FundamentalSolution;
use hlayers::special::bessel_jy_upto;
use hlayers::C64;
use std::f64::consts::PI;
use std::sync::Arc;

fn mode(grid: &hlayers::geometry::BoundaryGrid, m: i64) -> Vec<C64> {
    grid.t.iter().map(|&t| C64::from_polar(1.0, m as f64 * t)).collect()
}

fn eig_error(op: &hlayers::boundary_ops::BoundaryOperator, m: i64, expect: C64) -> f64 {
    let e = mode(&op.grid, m);
    let out = op.apply(&e);
    out.iter().zip(&e).map(|(o, v)| (o - expect * v).norm()).fold(0.0, f64::max)
}

/// Disk eigenvalues from separation of variables, orders 0..=mmax.
fn disk_helmholtz(k: C64, r: f64, mmax: u32) -> (Vec<C64>, Vec<C64>) {
    let (j, y) = bessel_jy_upto(mmax + 1, k * r).unwrap();
    let h: Vec<C64> = j.iter().zip(&y).map(|(a, b)| a + C64::i() * b).collect();
    let d = |f: &Vec<C64>, m: usize| if m == 0 { -f[1] } else { (f[m - 1] - f[m + 1]) / 2.0 };
    let mut v = vec![];
    let mut w = vec![];
    for m in 0..=mmax as usize {
        v.push(C64::new(0.0, -PI * r / 2.0) * j[m] * h[m]);
        w.push(C64::new(0.0, -PI * r / 4.0) * k * (j[m] * d(&h, m) + d(&j, m) * h[m]));
    }
    (v, w)
}

#[test]
fn laplace_disk_spectra() {
    let r = 1.5;
    let grid = Arc::new(make_grid(&BoundaryCurve::circle(r), 256).unwrap());
    let fs = FundamentalSolution::laplace();
    let v = assemble_v(&fs, &grid);
    let w = assemble_w(&fs, &grid);
    let dtn = steklov_poincare(&grid).unwrap();
    for m in -127i64..=127 {
        let ev = if m == 0 { r * r.ln() } else { -r / (2.0 * m.abs() as f64) };
        let ew = if m == 0 { 0.5 } else { 0.0 };
        assert!(eig_error(&v, m, C64::new(ev, 0.0)) < 1e-12, "V m={m}");
        assert!(eig_error(&w, m, C64::new(ew, 0.0)) < 1e-12, "W m={m}");
        assert!(eig_error(&dtn.operator, m, C64::new(m.abs() as f64 / r, 0.0)) < 1e-10 * (1.0 + m.abs() as f64), "S m={m}");
    }
}

#[test]
fn helmholtz_disk_spectra() {
    let r = 1.5;
    let grid = Arc::new(make_grid(&BoundaryCurve::circle(r), 256).unwrap());
    for lam in [C64::new(1.0, 0.0), C64::new(1.0, 0.5)] {
        let fs = FundamentalSolution::planar(lam);
        let v = assemble_v(&fs, &grid);
        let w = assemble_w(&fs, &grid);
        let wt = assemble_wt(&fs, &grid);
        let (ev, ew) = disk_helmholtz(fs.wavenumber(), r, 40);
        for m in 0..=40i64 {
            let e1 = eig_error(&v, m, ev[m as usize]);
            let e2 = eig_error(&w, m, ew[m as usize]);
            let e3 = eig_error(&wt, -m, ew[m as usize]);
            assert!(e1 < 1e-12 && e2 < 1e-12 && e3 < 1e-12, "lam={lam} m={m}: {e1:e} {e2:e} {e3:e}");
        }
    }
}
