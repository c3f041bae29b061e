//! One-dimensional rules: Gauss–Legendre, the product rule for a logarithmic
//! endpoint singularity, the periodic log-singular weights on equispaced
//! grids, and trigonometric resampling.

use num_complex::Complex64 as C64;
use rustfft::FftPlannerScalar;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre rule mapped to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Weights ωₘ on the unit Gauss–Legendre nodes with Σ ωₘ ψ(sₘ) ≈ ∫₀¹ ln(s) ψ(s) ds,
/// exact for polynomials of degree < n.
pub fn log_endpoint_weights(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (s, w) = gauss_legendre_unit(n);
    let moments: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                -1.0
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign / (k * (k + 1)) as f64
            }
        })
        .collect();
    let omega = s
        .iter()
        .zip(&w)
        .map(|(&sm, &wm)| {
            // shifted Legendre recursion at x = 2s − 1
            let x = 2.0 * sm - 1.0;
            let (mut p0, mut p1) = (1.0, x);
            let mut acc = moments[0];
            if n > 1 {
                acc += 3.0 * p1 * moments[1];
            }
            for k in 2..n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
                acc += (2 * k + 1) as f64 * p1 * moments[k];
            }
            wm * acc
        })
        .collect();
    (s, w, omega)
}

/// Weights R_j, j = 0..N−1, with Σ_j R_{|i−j|} f(t_j) ≈ ∫₀^{2π} ln(4 sin²((tᵢ−τ)/2)) f(τ) dτ
/// on the grid t_j = 2πj/N, N even.
pub fn periodic_log_weights(n_points: usize) -> Vec<f64> {
    assert!(n_points % 2 == 0 && n_points >= 2);
    let n = n_points / 2;
    let nf = n as f64;
    (0..n_points)
        .map(|j| {
            let t = PI * j as f64 / nf;
            let mut s = 0.0;
            for m in 1..n {
                s += (m as f64 * t).cos() / m as f64;
            }
            -2.0 * PI / nf * s - PI / (nf * nf) * (nf * t).cos()
        })
        .collect()
}

/// Chebyshev points of the first kind mapped to (0, 1), increasing.
pub fn chebyshev_unit(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 0.5 * (1.0 - (PI * (j as f64 + 0.5) / n as f64).cos()))
        .collect()
}

/// Trigonometric interpolation of equispaced periodic samples onto `m ≥ n`
/// equispaced points. The Nyquist coefficient of an even-length input is split
/// symmetrically.
pub fn resample_periodic(values: &[C64], m: usize) -> Vec<C64> {
    let n = values.len();
    assert!(m >= n && n > 0);
    if m == n {
        return values.to_vec();
    }
    let mut planner = FftPlannerScalar::<f64>::new();
    let mut spec = values.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut big = vec![C64::new(0.0, 0.0); m];
    let half = n / 2;
    if n % 2 == 0 {
        for k in 0..half {
            big[k] = spec[k];
        }
        for k in 1..half {
            big[m - k] = spec[n - k];
        }
        big[half] = spec[half] * 0.5;
        big[m - half] = spec[half] * 0.5;
    } else {
        for k in 0..=half {
            big[k] = spec[k];
        }
        for k in 1..=half {
            big[m - k] = spec[n - k];
        }
    }
    planner.plan_fft_inverse(m).process(&mut big);
    let scale = 1.0 / n as f64;
    big.iter().map(|v| v * scale).collect()
}

/// Fourier coefficients c_m, m = −n/2..n/2 (stored in FFT order), of
/// equispaced periodic samples, normalized so that f(t) = Σ c_m e^{imt}.
pub fn fourier_coefficients(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut spec = values.to_vec();
    FftPlannerScalar::<f64>::new().plan_fft_forward(n).process(&mut spec);
    spec.iter().map(|v| v / n as f64).collect()
}
