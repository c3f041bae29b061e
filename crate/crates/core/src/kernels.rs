//! Fundamental solutions of Δ and Δ + λ.
//!
//! In the plane, S(ξ) = ln|ξ|/(2π) for λ = 0 and S(ξ) = −(i/4)H₀⁽¹⁾(k|ξ|)
//! otherwise, with k the principal square root of λ (Im k ≥ 0). Both are
//! written as S(r) = a(r) ln r + b(r) with a, b smooth even functions of r,
//! which is the form the singular quadratures consume.

use crate::error::{Error, Result};
use crate::special::{jy01, y0_regular, EULER_GAMMA};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const INV_2PI: f64 = 0.5 / PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalSolution {
    lambda: C64,
    dim: usize,
    k: C64,
}

impl FundamentalSolution {
    pub fn new(lambda: C64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension {dim} < 2")));
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::Domain("non-finite lambda".into()));
        }
        if dim > 2 && lambda != C64::new(0.0, 0.0) {
            return Err(Error::Domain("Helmholtz kernels are only provided in two dimensions".into()));
        }
        let mut k = lambda.sqrt();
        if k.im < 0.0 {
            k = -k;
        }
        Ok(FundamentalSolution { lambda, dim, k })
    }

    /// Two-dimensional kernel for Δ + λ.
    pub fn planar(lambda: C64) -> Self {
        Self::new(lambda, 2).expect("finite lambda")
    }

    pub fn laplace() -> Self {
        Self::planar(C64::new(0.0, 0.0))
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wavenumber(&self) -> C64 {
        self.k
    }

    pub fn is_laplace(&self) -> bool {
        self.lambda == C64::new(0.0, 0.0)
    }

    /// The Laplace kernel in the same dimension.
    pub fn harmonic(&self) -> Self {
        Self::new(C64::new(0.0, 0.0), self.dim).expect("valid dimension")
    }

    fn norm(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::Shape(format!("point has {} coordinates, expected {}", xi.len(), self.dim)));
        }
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(r)
    }

    /// S(ξ).
    pub fn eval_s(&self, xi: &[f64]) -> Result<C64> {
        let r = self.norm(xi)?;
        if self.dim == 2 {
            return Ok(self.value(r));
        }
        let n = self.dim as f64;
        Ok(C64::new(r.powf(2.0 - n) / ((2.0 - n) * sphere_measure(self.dim)), 0.0))
    }

    /// ∇S(ξ).
    pub fn grad_s(&self, xi: &[f64]) -> Result<Vec<C64>> {
        let r = self.norm(xi)?;
        let d = if self.dim == 2 {
            self.derivative(r)
        } else {
            C64::new(r.powf(1.0 - self.dim as f64) / sphere_measure(self.dim), 0.0)
        };
        Ok(xi.iter().map(|&v| d * (v / r)).collect())
    }

    /// Double-layer kernel −∇S(x − y)·ν_y.
    pub fn kernel_dlp(&self, x: &[f64], y: &[f64], nu_y: &[f64]) -> Result<C64> {
        if x.len() != y.len() || y.len() != nu_y.len() {
            return Err(Error::Shape("point and normal dimensions differ".into()));
        }
        let xi: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let g = self.grad_s(&xi)?;
        Ok(-g.iter().zip(nu_y).map(|(gi, n)| gi * n).sum::<C64>())
    }

    /// S as a function of r > 0 (planar kernels only).
    #[inline]
    pub fn value(&self, r: f64) -> C64 {
        if self.is_laplace() {
            return C64::new(r.ln() * INV_2PI, 0.0);
        }
        let [j0, _, y0, _] = jy01(self.k * r);
        C64::new(0.0, -0.25) * j0 + 0.25 * y0
    }

    /// dS/dr for r > 0 (planar kernels only).
    #[inline]
    pub fn derivative(&self, r: f64) -> C64 {
        if self.is_laplace() {
            return C64::new(INV_2PI / r, 0.0);
        }
        let [_, j1, _, y1] = jy01(self.k * r);
        C64::new(0.0, 0.25) * self.k * (j1 + C64::i() * y1)
    }

    /// (S(r), dS/dr) with a single Bessel evaluation.
    #[inline]
    pub fn value_and_derivative(&self, r: f64) -> (C64, C64) {
        if self.is_laplace() {
            return (C64::new(r.ln() * INV_2PI, 0.0), C64::new(INV_2PI / r, 0.0));
        }
        let [j0, j1, y0, y1] = jy01(self.k * r);
        (
            C64::new(0.0, -0.25) * j0 + 0.25 * y0,
            C64::new(0.0, 0.25) * self.k * (j1 + C64::i() * y1),
        )
    }

    /// (a(r), b(r)) with S(r) = a(r) ln r + b(r); valid at r = 0.
    pub fn log_split(&self, r: f64) -> (C64, C64) {
        if self.is_laplace() {
            return (C64::new(INV_2PI, 0.0), C64::new(0.0, 0.0));
        }
        let z = self.k * r;
        let c = (self.k / 2.0).ln() + EULER_GAMMA;
        if r == 0.0 {
            return (C64::new(INV_2PI, 0.0), C64::new(0.0, -0.25) + c * INV_2PI);
        }
        let [j0, ..] = jy01(z);
        let a = j0 * INV_2PI;
        let b = C64::new(0.0, -0.25) * j0 + c * INV_2PI * j0 + 0.25 * y0_regular(z);
        (a, b)
    }

    /// a'(r) for the split above.
    pub fn log_split_derivative(&self, r: f64) -> C64 {
        if self.is_laplace() || r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let [_, j1, ..] = jy01(self.k * r);
        -self.k * j1 * INV_2PI
    }
}

/// (n−1)-dimensional measure of the unit sphere in ℝⁿ.
pub fn sphere_measure(n: usize) -> f64 {
    // 2π^{n/2}/Γ(n/2) through the recursion s_{n+2} = 2π s_n/n.
    let (mut s, mut m) = if n % 2 == 0 { (2.0 * PI, 2) } else { (4.0 * PI, 3) };
    while m < n {
        s *= 2.0 * PI / m as f64;
        m += 2;
    }
    if n == 1 {
        2.0
    } else {
        s
    }
}
