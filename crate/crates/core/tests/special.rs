use hlayers::special::{bessel_j, bessel_jy_upto, bessel_y, hankel1};
use hlayers::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

// Reference values from a 40-digit arbitrary-precision evaluation.
// (order, re z, im z, re J, im J, re Y, im Y)
const TABLE: &[(u32, f64, f64, f64, f64, f64, f64)] = &[
    (0, 0.5, 0.0, 0.93846980724081290423, 0.0, -0.44451873350670655715, 0.0),
    (0, 2.0, 0.0, 0.22389077914123566805, 0.0, 0.5103756726497451196, 0.0),
    (0, 7.3, 0.0, 0.28821694763501439904, 0.0, 0.062773886374037597732, 0.0),
    (0, 13.0, 0.0, 0.206926102377067811, 0.0, -0.078207864527875911021, 0.0),
    (0, 24.9, 0.0, 0.083245968353015490053, 0.0, -0.13649918399676523538, 0.0),
    (0, 26.0, 0.0, 0.1559993155224211296, 0.0, 0.012044625860755602756, 0.0),
    (0, 49.5, 0.0, 0.0019720993620572776198, 0.0, -0.11338633370291574571, 0.0),
    (1, 3.3, 0.0, 0.22066345298524115574, 0.0, 0.38785293102370988694, 0.0),
    (1, 11.2, 0.0, -0.20385314586470034845, 0.0, 0.12431267953212447625, 0.0),
    (1, 40.0, 0.0, 0.12603831803758499921, 0.0, -0.0057935058215496329412, 0.0),
    (2, 6.1, 0.0, -0.26118151160614772854, 0.0, 0.20392273223802333558, 0.0),
    (5, 20.0, 0.0, 0.15116976798239497461, 0.0, -0.10003576788953242697, 0.0),
    (10, 2.0, 0.0, 2.5153862827167367096e-7, 0.0, -129184.54220803928264, 0.0),
    (30, 45.0, 0.0, 0.045799309554040956079, 0.0, 0.12986219863426499408, 0.0),
    (80, 33.0, 0.0, 1.128783955596885478e-23, 0.0, -3.8695609240301749267e+20, 0.0),
    (3, 1.3, 0.3, 0.03612839886420465714, 0.02637721569245631344, -2.2554217861983722166, 1.4271282630003280245),
    (0, 8.0, 1.5, 0.35572123755363563061, -0.50848945293346602138, 0.55412175695677918378, 0.31348895104633086474),
    (1, 30.0, 2.0, -0.45582617477789961621, -0.29060035651881612796, 0.30255251668445763604, -0.44014951688491838641),
    (7, 0.9, 0.2, 4.4013420489721548716e-8, 8.556394108986248334e-7, -2952.591098653118666, 53423.556356149332937),
    (150, 100.0, 0.0, 2.7229021718820480749e-16, 0.0, -10456610216864.335058, 0.0),
];

/// Error scale: relative for values away from zeros, absolute against the
/// oscillation envelope near zeros.
fn scale(v: C64, x: f64) -> f64 {
    v.norm().max((2.0 / (PI * x)).sqrt().min(1.0))
}

#[test]
fn reference_table() {
    for &(n, re, im, jr, ji, yr, yi) in TABLE {
        let z = C64::new(re, im);
        let j = bessel_j(n, z).unwrap();
        let y = bessel_y(n, z).unwrap();
        let jt = C64::new(jr, ji);
        let yt = C64::new(yr, yi);
        let ej = (j - jt).norm() / if (n as f64) < re { scale(jt, re) } else { jt.norm() };
        let ey = (y - yt).norm() / if (n as f64) < re { scale(yt, re) } else { yt.norm() };
        let tol = if im == 0.0 && re <= 50.0 { 1e-13 } else { 1e-11 };
        assert!(ej < tol, "J_{n}({z}): {j} vs {jt}, rel {ej:e}");
        assert!(ey < tol, "Y_{n}({z}): {y} vs {yt}, rel {ey:e}");
    }
}

#[test]
fn values_at_origin() {
    assert_eq!(bessel_j(0, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
    assert_eq!(bessel_j(1, C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
    assert!(bessel_y(0, C64::new(0.0, 0.0)).is_err());
}

#[test]
fn domain_errors() {
    assert!(bessel_j(201, C64::new(1.0, 0.0)).is_err());
    assert!(bessel_j(0, C64::new(1e4, 0.0)).is_err());
    assert!(hankel1(0, C64::new(f64::NAN, 0.0)).is_err());
}

fn series_j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -q / (k * k) as f64;
        sum += term;
    }
    sum
}

#[test]
fn first_zero_of_j0() {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if series_j0(a) * series_j0(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let root = 0.5 * (a + b);
    assert!((root - 2.404825557695773).abs() < 1e-14);
    assert!(bessel_j(0, C64::new(2.404825557695773, 0.0)).unwrap().norm() < 1e-12);
}

/// Tanh-sinh quadrature on [a, b]; copes with integrable endpoint singularities.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = 1.0 / 64.0;
    let (c, d) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    for k in -400..=400 {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        let p = c + d * x;
        if p <= a || p >= b {
            continue;
        }
        sum += w * f(p);
    }
    sum * d * h
}

#[test]
fn y0_against_integral_representation() {
    // Y₀(x) = (4/π²) ∫₀^{π/2} cos(x cos θ) (γ + ln(2x sin²θ)) dθ
    let x = 1.0;
    let g = 0.577_215_664_901_532_9;
    let integral = tanh_sinh(|t: f64| (x * t.cos()).cos() * (g + (2.0 * x * t.sin().powi(2)).ln()), 0.0, PI / 2.0);
    let oracle = 4.0 / (PI * PI) * integral;
    let y = bessel_y(0, C64::new(x, 0.0)).unwrap();
    assert!((y.re - oracle).abs() < 1e-13, "{} vs {}", y.re, oracle);
}

#[test]
fn hankel_log_divergence() {
    let target = C64::new(0.0, 2.0 / PI);
    let mut prev = f64::INFINITY;
    for e in 2..=6 {
        let z = 10f64.powi(-e);
        let ratio = hankel1(0, C64::new(z, 0.0)).unwrap() / z.ln();
        let err = (ratio - target).norm();
        assert!(err < prev);
        assert!(err * z.ln().abs() < 1.5);
        prev = err;
    }
}

proptest! {
    #[test]
    fn wronskian(n in 0u32..40, x in 0.05f64..60.0) {
        let (j, y) = bessel_jy_upto(n + 1, C64::new(x, 0.0)).unwrap();
        let n = n as usize;
        let (dj, dy) = if n == 0 {
            (-j[1], -y[1])
        } else {
            ((j[n - 1] - j[n + 1]) / 2.0, (y[n - 1] - y[n + 1]) / 2.0)
        };
        let w = j[n] * dy - dj * y[n];
        let expect = 2.0 / (PI * x);
        let mag = (j[n] * dy).norm().max((dj * y[n]).norm()).max(expect);
        prop_assert!((w.re - expect).abs() < 1e-12 * mag, "W = {} vs {}", w, expect);
    }

    #[test]
    fn recurrence(n in 1u32..30, re in 0.1f64..40.0, im in 0.0f64..1.0) {
        let z = C64::new(re, im);
        let a = bessel_j(n - 1, z).unwrap();
        let b = bessel_j(n, z).unwrap();
        let c = bessel_j(n + 1, z).unwrap();
        let resid = a + c - 2.0 * n as f64 / z * b;
        prop_assert!(resid.norm() < 1e-12 * (a.norm() + c.norm() + b.norm() * 2.0 * n as f64 / z.norm()));
    }
}
