//! Bessel functions of the first and second kind and the Hankel function of
//! the first kind, for integer order and complex argument.
//!
//! Three regimes are used. For |z| ≤ 5 the power series (with the
//! Euler–Mascheroni logarithmic term for Y) converges without cancellation.
//! For 5 < |z| ≤ 25, J is produced by Miller's backward recurrence normalized
//! with J₀ + 2ΣJ₂ₖ = 1, and Y₀, Y₁ follow from their Neumann series in J.
//! Beyond that, the Hankel asymptotic expansion gives orders 0 and 1, and
//! higher orders of J come from backward recurrence normalized to those.
//! Y of higher order always comes from forward recurrence, which is stable.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest supported order.
pub const MAX_ORDER: u32 = 200;
/// Upper bound (exclusive) on |z|.
pub const MAX_ARG: f64 = 1.0e4;

const SERIES_RADIUS: f64 = 5.0;
const ASYMPTOTIC_RADIUS: f64 = 25.0;

fn check(order: u32, z: C64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Domain(format!("order {order} exceeds {MAX_ORDER}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= MAX_ARG {
        return Err(Error::Domain(format!("|z| = {} outside [0, {MAX_ARG})", z.norm())));
    }
    if z.norm() > ASYMPTOTIC_RADIUS && z.arg().abs() > 0.9 * PI {
        return Err(Error::Domain("argument too close to the negative real axis".into()));
    }
    Ok(())
}

/// J_order(z).
pub fn bessel_j(order: u32, z: C64) -> Result<C64> {
    check(order, z)?;
    Ok(j_sequence(order as usize, z)[order as usize])
}

/// Y_order(z). Fails at z = 0.
pub fn bessel_y(order: u32, z: C64) -> Result<C64> {
    check(order, z)?;
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("Y is unbounded at z = 0".into()));
    }
    let (_, y) = jy_sequence(order as usize, z);
    Ok(y[order as usize])
}

/// H⁽¹⁾_order(z) = J + iY. Fails at z = 0.
pub fn hankel1(order: u32, z: C64) -> Result<C64> {
    check(order, z)?;
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("H is unbounded at z = 0".into()));
    }
    let (j, y) = jy_sequence(order as usize, z);
    let n = order as usize;
    Ok(j[n] + C64::i() * y[n])
}

/// J_0..J_nmax and Y_0..Y_nmax at z ≠ 0.
pub fn bessel_jy_upto(nmax: u32, z: C64) -> Result<(Vec<C64>, Vec<C64>)> {
    check(nmax, z)?;
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("Y is unbounded at z = 0".into()));
    }
    Ok(jy_sequence(nmax as usize, z))
}

/// (J₀, J₁, Y₀, Y₁) at z ≠ 0, without range checks. Used by the kernels.
pub(crate) fn jy01(z: C64) -> [C64; 4] {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        let (j0, j1, y0, y1) = series01(z);
        [j0, j1, y0, y1]
    } else if r <= ASYMPTOTIC_RADIUS {
        let j = miller(1, z, None);
        let (y0, y1) = neumann01(&j, z);
        [j[0], j[1], y0, y1]
    } else {
        let (j0, y0) = hankel_asymptotic(0, z);
        let (j1, y1) = hankel_asymptotic(1, z);
        [j0, j1, y0, y1]
    }
}

/// Ỹ(z) = Y₀(z) − (2/π)(ln(z/2) + γ)J₀(z), the entire part of Y₀.
pub(crate) fn y0_regular(z: C64) -> C64 {
    if z.norm() <= SERIES_RADIUS {
        let q = z * z / 4.0;
        let mut term = C64::new(1.0, 0.0);
        let mut h = 0.0;
        let mut sum = C64::new(0.0, 0.0);
        for k in 1..80 {
            let kf = k as f64;
            term *= -q / (kf * kf);
            h += 1.0 / kf;
            let add = term * h;
            sum -= add;
            if add.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
        }
        sum * FRAC_2_PI
    } else {
        let [j0, _, y0, _] = jy01(z);
        y0 - FRAC_2_PI * ((z / 2.0).ln() + EULER_GAMMA) * j0
    }
}

fn j_sequence(nmax: usize, z: C64) -> Vec<C64> {
    if z.norm() <= SERIES_RADIUS {
        (0..=nmax).map(|n| series_j(n, z)).collect()
    } else if z.norm() <= ASYMPTOTIC_RADIUS {
        let mut j = miller(nmax, z, None);
        j.truncate(nmax + 1);
        j
    } else {
        let anchor = [hankel_asymptotic(0, z).0, hankel_asymptotic(1, z).0];
        let mut j = miller(nmax, z, Some(anchor));
        j.truncate(nmax + 1);
        j
    }
}

fn jy_sequence(nmax: usize, z: C64) -> (Vec<C64>, Vec<C64>) {
    let r = z.norm();
    let (j, y0, y1) = if r <= SERIES_RADIUS {
        let (_, _, y0, y1) = series01(z);
        ((0..=nmax.max(1)).map(|n| series_j(n, z)).collect::<Vec<_>>(), y0, y1)
    } else if r <= ASYMPTOTIC_RADIUS {
        let j = miller(nmax.max(1), z, None);
        let (y0, y1) = neumann01(&j, z);
        (j, y0, y1)
    } else {
        let (j0, y0) = hankel_asymptotic(0, z);
        let (j1, y1) = hankel_asymptotic(1, z);
        (miller(nmax.max(1), z, Some([j0, j1])), y0, y1)
    };
    let mut y = vec![C64::new(0.0, 0.0); nmax + 1];
    y[0] = y0;
    if nmax >= 1 {
        y[1] = y1;
    }
    for k in 1..nmax {
        y[k + 1] = (2.0 * k as f64) / z * y[k] - y[k - 1];
    }
    let mut j = j;
    j.truncate(nmax + 1);
    (j, y)
}

fn series_j(n: usize, z: C64) -> C64 {
    let q = z * z / 4.0;
    let mut lead = C64::new(1.0, 0.0);
    for k in 1..=n {
        lead *= z / (2.0 * k as f64);
    }
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    lead * sum
}

fn series01(z: C64) -> (C64, C64, C64, C64) {
    let q = z * z / 4.0;
    let log_term = (z / 2.0).ln();
    // j0 terms: (-q)^k/(k!)^2 ; j1 terms: (-q)^k/(k!(k+1)!)
    let mut t0 = C64::new(1.0, 0.0);
    let mut t1 = C64::new(1.0, 0.0);
    let mut j0 = t0;
    let mut j1s = t1;
    let mut h = 0.0;
    let mut y0s = C64::new(0.0, 0.0);
    // psi(k+1) + psi(k+2) = -2γ + 2H_k + 1/(k+1)
    let mut y1s = C64::new(-2.0 * EULER_GAMMA + 1.0, 0.0);
    for k in 1..80 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        h += 1.0 / kf;
        j0 += t0;
        j1s += t1;
        y0s += t0 * h;
        y1s += t1 * (-2.0 * EULER_GAMMA + 2.0 * h + 1.0 / (kf + 1.0));
        if t0.norm() < 1e-18 && t1.norm() < 1e-18 {
            break;
        }
    }
    let half = z / 2.0;
    let j1 = half * j1s;
    let y0 = FRAC_2_PI * ((log_term + EULER_GAMMA) * j0 - y0s);
    let y1 = -FRAC_2_PI / z + FRAC_2_PI * log_term * j1 - half * y1s / PI;
    (j0, j1, y0, y1)
}

/// Backward recurrence for J_0..J_M. With `anchor = None` the sequence is
/// normalized by J₀ + 2ΣJ₂ₖ = 1, otherwise by the larger of the supplied J₀, J₁.
fn miller(nmax: usize, z: C64, anchor: Option<[C64; 2]>) -> Vec<C64> {
    let r = z.norm();
    let top = (nmax as f64).max(r) + 12.0 * r.cbrt() + 30.0;
    let m = (top as usize + 1) & !1;
    let mut f = vec![C64::new(0.0, 0.0); m + 2];
    f[m] = C64::new(1e-30, 0.0);
    let inv = 2.0 / z;
    for k in (1..=m).rev() {
        f[k - 1] = (k as f64) * inv * f[k] - f[k + 1];
        if f[k - 1].norm() > 1e250 {
            for v in f[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = match anchor {
        None => {
            let mut s = f[0];
            for k in (2..=m).step_by(2) {
                s += 2.0 * f[k];
            }
            1.0 / s
        }
        Some([j0, j1]) => {
            if j0.norm() >= j1.norm() {
                j0 / f[0]
            } else {
                j1 / f[1]
            }
        }
    };
    for v in f.iter_mut() {
        *v *= scale;
    }
    f
}

fn neumann01(j: &[C64], z: C64) -> (C64, C64) {
    let log_term = (z / 2.0).ln() + EULER_GAMMA;
    let mut s0 = C64::new(0.0, 0.0);
    let mut s1 = C64::new(0.0, 0.0);
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / z + FRAC_2_PI * log_term * j[1] + FRAC_2_PI * s1;
    (y0, y1)
}

fn hankel_asymptotic(nu: u32, z: C64) -> (C64, C64) {
    let mu = 4.0 * (nu * nu) as f64;
    let omega = z - FRAC_PI_2 * nu as f64 - FRAC_PI_4;
    let inv = 1.0 / z;
    let i = C64::i();
    let mut a = C64::new(1.0, 0.0);
    let mut s1 = a;
    let mut s2 = a;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= inv * (mu - odd * odd) / (8.0 * k as f64);
        let mag = a.norm();
        if mag > last || mag < 1e-18 {
            break;
        }
        last = mag;
        let ik = i.powu(k as u32);
        s1 += ik * a;
        s2 += ik.conj() * a;
    }
    let pre = (2.0 / (PI * z)).sqrt();
    let h1 = pre * (i * omega).exp() * s1;
    let h2 = pre * (-i * omega).exp() * s2;
    ((h1 + h2) / 2.0, (h1 - h2) / (2.0 * i))
}
