//! Nyström matrices of the boundary operators V, W and Wᵗ, the Laplace
//! Steklov–Poincaré map, the harmonic Green operator and the regularizer J.
//!
//! Kernels with a logarithmic singularity are split as
//! K(t, τ) = K₁(t, τ) ln(4 sin²((t − τ)/2)) + K₂(t, τ) and integrated with the
//! periodic log weights for K₁ and the trapezoid rule for K₂.

use crate::error::{Error, Result};
use crate::fields::{same_grid, Field, GridDensity, InteriorFunction, NegSchauderDensity, Shifted};
use crate::geometry::{dot, BoundaryGrid, Point};
use crate::kernels::FundamentalSolution;
use crate::potentials::{LayerPotential, PolarInterpolant};
use crate::quadrature::periodic_log_weights;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense operator acting on node values.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    pub grid: Arc<BoundaryGrid>,
    pub matrix: DMatrix<C64>,
}

impl BoundaryOperator {
    pub fn new(grid: Arc<BoundaryGrid>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != grid.n || matrix.ncols() != grid.n {
            return Err(Error::Shape(format!("{}×{} matrix on a {}-node grid", matrix.nrows(), matrix.ncols(), grid.n)));
        }
        Ok(BoundaryOperator { grid, matrix })
    }

    fn from_rows(grid: &Arc<BoundaryGrid>, rows: Vec<Vec<C64>>) -> Self {
        let n = grid.n;
        BoundaryOperator { grid: grid.clone(), matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]) }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n();
        assert_eq!(x.len(), n, "vector length does not match the operator");
        let mut out = vec![ZERO; n];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            let col = self.matrix.column(j);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * xj;
            }
        }
        out
    }

    pub fn apply_density(&self, x: &GridDensity) -> Result<GridDensity> {
        same_grid(&self.grid, &x.grid)?;
        Ok(x.with_values(self.apply(&x.values)))
    }

    /// D⁻¹AᵀD with D = diag(wᵢ): the transpose under the weighted pairing.
    pub fn weighted_transpose(&self) -> BoundaryOperator {
        let w = &self.grid.weights;
        let n = self.n();
        BoundaryOperator {
            grid: self.grid.clone(),
            matrix: DMatrix::from_fn(n, n, |i, j| self.matrix[(j, i)] * (w[j] / w[i])),
        }
    }

    /// c·I + A.
    pub fn shifted(&self, c: f64) -> BoundaryOperator {
        let mut m = self.matrix.clone();
        for i in 0..self.n() {
            m[(i, i)] += c;
        }
        BoundaryOperator { grid: self.grid.clone(), matrix: m }
    }

    pub fn compose(&self, other: &BoundaryOperator) -> BoundaryOperator {
        BoundaryOperator { grid: self.grid.clone(), matrix: &self.matrix * &other.matrix }
    }

    /// Dense matrix as CSV, one row per line, entries written as re+imi pairs of columns.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let v = self.matrix[(i, j)];
                    format!("{:e},{:e}", v.re, v.im)
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn log_sin(ti: f64, tj: f64) -> f64 {
    (4.0 * (0.5 * (ti - tj)).sin().powi(2)).ln()
}

/// Single-layer operator V.
pub fn assemble_v(fs: &FundamentalSolution, grid: &Arc<BoundaryGrid>) -> BoundaryOperator {
    let n = grid.n;
    let h = grid.step();
    let rw = periodic_log_weights(n);
    let (a0, b0) = fs.log_split(0.0);
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = grid.points[i];
            (0..n)
                .map(|j| {
                    let sj = grid.speed[j];
                    let r_w = rw[(i + n - j) % n];
                    if i == j {
                        let k1 = 0.5 * a0 * sj;
                        let k2 = (a0 * sj.ln() + b0) * sj;
                        return k1 * r_w + k2 * h;
                    }
                    let y = grid.points[j];
                    let r = (xi[0] - y[0]).hypot(xi[1] - y[1]);
                    let (a, _) = split_a(fs, r);
                    let s = fs.value(r);
                    let k1 = 0.5 * a * sj;
                    let k2 = s * sj - k1 * log_sin(grid.t[i], grid.t[j]);
                    k1 * r_w + k2 * h
                })
                .collect()
        })
        .collect();
    BoundaryOperator::from_rows(grid, rows)
}

#[inline]
fn split_a(fs: &FundamentalSolution, r: f64) -> (C64, C64) {
    if fs.is_laplace() {
        (C64::new(0.5 / PI, 0.0), ZERO)
    } else {
        (fs.log_split(r).0, fs.log_split_derivative(r))
    }
}

/// Double-layer operator W with kernel −∇S(x − y)·ν_y.
pub fn assemble_w(fs: &FundamentalSolution, grid: &Arc<BoundaryGrid>) -> BoundaryOperator {
    assemble_dl(fs, grid, false)
}

/// Adjoint double-layer operator Wᵗ with kernel ∇S(x − y)·ν_x.
pub fn assemble_wt(fs: &FundamentalSolution, grid: &Arc<BoundaryGrid>) -> BoundaryOperator {
    assemble_dl(fs, grid, true)
}

fn assemble_dl(fs: &FundamentalSolution, grid: &Arc<BoundaryGrid>, transposed: bool) -> BoundaryOperator {
    let n = grid.n;
    let h = grid.step();
    let rw = periodic_log_weights(n);
    let laplace = fs.is_laplace();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = grid.points[i];
            (0..n)
                .map(|j| {
                    let sj = grid.speed[j];
                    if i == j {
                        return C64::new(grid.curvature[i] * grid.speed[i] / (4.0 * PI) * h, 0.0);
                    }
                    let y = grid.points[j];
                    let d = [xi[0] - y[0], xi[1] - y[1]];
                    let r = d[0].hypot(d[1]);
                    let proj = if transposed { dot(d, grid.normals[i]) } else { -dot(d, grid.normals[j]) } / r;
                    let kernel = fs.derivative(r) * proj * sj;
                    if laplace {
                        return kernel * h;
                    }
                    let k1 = 0.5 * fs.log_split_derivative(r) * proj * sj;
                    let k2 = kernel - k1 * log_sin(grid.t[i], grid.t[j]);
                    k1 * rw[(i + n - j) % n] + k2 * h
                })
                .collect()
        })
        .collect();
    BoundaryOperator::from_rows(grid, rows)
}

/// 1-norm condition estimate ‖A‖₁‖A⁻¹‖₁ from an explicit inverse.
pub fn condition_1(a: &DMatrix<C64>, inv: &DMatrix<C64>) -> f64 {
    let norm1 = |m: &DMatrix<C64>| (0..m.ncols()).map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    norm1(a) * norm1(inv)
}

/// Interior Dirichlet-to-Neumann map of the Laplacian, realized through the
/// bordered single-layer system [V₀ψ + c = v, ∫ψ = 0], S v = (−½ + W₀ᵗ)ψ.
#[derive(Clone, Debug)]
pub struct SteklovPoincare {
    pub v0: BoundaryOperator,
    pub wt0: BoundaryOperator,
    pub operator: BoundaryOperator,
    pub transpose: BoundaryOperator,
    bordered_inverse: DMatrix<C64>,
    pub condition: f64,
}

pub const CAPACITY_CONDITION_LIMIT: f64 = 1e13;

/// The Steklov–Poincaré operator on `grid`.
pub fn steklov_poincare(grid: &Arc<BoundaryGrid>) -> Result<SteklovPoincare> {
    let fs = FundamentalSolution::laplace();
    let v0 = assemble_v(&fs, grid);
    let wt0 = assemble_wt(&fs, grid);
    let n = grid.n;
    let mut a = DMatrix::from_element(n + 1, n + 1, ZERO);
    a.view_mut((0, 0), (n, n)).copy_from(&v0.matrix);
    for i in 0..n {
        a[(i, n)] = C64::new(1.0, 0.0);
        a[(n, i)] = C64::new(grid.weights[i], 0.0);
    }
    let inv = a.clone().lu().try_inverse().ok_or(Error::Capacity)?;
    let condition = condition_1(&a, &inv);
    if !condition.is_finite() || condition > CAPACITY_CONDITION_LIMIT {
        return Err(Error::Capacity);
    }
    let psi = inv.view((0, 0), (n, n)).into_owned();
    let m = wt0.shifted(-0.5).matrix * psi;
    let operator = BoundaryOperator { grid: grid.clone(), matrix: m };
    let transpose = operator.weighted_transpose();
    Ok(SteklovPoincare { v0, wt0, operator, transpose, bordered_inverse: inv, condition })
}

impl SteklovPoincare {
    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.operator.grid
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.operator.apply(v)
    }

    pub fn apply_transpose(&self, mu: &[C64]) -> Vec<C64> {
        self.transpose.apply(mu)
    }

    /// (ψ, c) with V₀ψ + c = v and ∫ψ = 0.
    pub fn harmonic_density(&self, v: &[C64]) -> (Vec<C64>, C64) {
        let n = self.grid().n;
        let mut out = vec![ZERO; n + 1];
        for (j, &vj) in v.iter().enumerate() {
            let col = self.bordered_inverse.column(j);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * vj;
            }
        }
        let c = out[n];
        out.truncate(n);
        (out, c)
    }
}

/// Harmonic extension of boundary data: v₀[ψ] + c.
pub struct HarmonicExtension {
    potential: LayerPotential,
    pub constant: C64,
    pub density: GridDensity,
    pub data: GridDensity,
}

impl Field for HarmonicExtension {
    fn value(&self, x: Point) -> C64 {
        self.potential.value(x) + self.constant
    }
    fn gradient(&self, x: Point) -> [C64; 2] {
        self.potential.gradient(x)
    }
}

/// Solution of the interior Dirichlet problem for Δ with data v.
pub fn green_dirichlet(dtn: &SteklovPoincare, v: &GridDensity) -> Result<HarmonicExtension> {
    same_grid(dtn.grid(), &v.grid)?;
    let (psi, c) = dtn.harmonic_density(&v.values);
    let density = v.with_values(psi);
    let potential = LayerPotential::single(FundamentalSolution::laplace(), &density);
    Ok(HarmonicExtension { potential, constant: c, density, data: v.clone() })
}

impl HarmonicExtension {
    /// The extension as an interior function with exact trace, resampled on a
    /// polar Chebyshev–Fourier grid about `center`.
    pub fn interpolated(&self, center: Point, radial: usize) -> Result<InteriorFunction> {
        let grid = &self.data.grid;
        let interp = PolarInterpolant::from_field(&grid.curve, center, radial, grid.n, self, Some(&self.data.values), grid.n)?;
        Ok(InteriorFunction::new(Arc::new(interp)).with_trace(self.data.clone()))
    }

    pub fn as_field(self) -> Arc<dyn Field> {
        let shift = self.constant;
        Arc::new(Shifted { inner: Arc::new(self.potential), shift })
    }
}

/// J[τ] = V₀[τ − m] + m with m = ⟨τ, 1⟩/⟨1, 1⟩.
pub fn j_regularizer(dtn: &SteklovPoincare, tau: &NegSchauderDensity) -> Result<GridDensity> {
    let grid = tau.grid().clone();
    let one = GridDensity::constant(&grid, C64::new(1.0, 0.0));
    let mean = crate::fields::pair_tau(tau, &one, Some(dtn))? / grid.length();
    let values = tau.materialize(dtn)?;
    let centered: Vec<C64> = values.values.iter().map(|v| v - mean).collect();
    let applied = dtn.v0.apply(&centered);
    Ok(values.with_values(applied.into_iter().map(|v| v + mean).collect()))
}

/// ⟨∂_ν u, v⟩ = ∫ u S[v] dσ + ⟨E♯[Δu], G[v]⟩.
pub fn dist_normal_derivative(u: &InteriorFunction, v: &GridDensity, dtn: &SteklovPoincare) -> Result<C64> {
    let lap = u.laplacian.as_ref().ok_or_else(|| Error::Contract("Δu must be supplied as a negative-exponent field".into()))?;
    same_grid(dtn.grid(), &v.grid)?;
    let grid = dtn.grid();
    let trace = u.trace_on(grid)?;
    let sv = dtn.apply(&v.values);
    let boundary = grid.pair(&trace, &sv);
    let ext = green_dirichlet(dtn, v)?;
    let gv = ext.interpolated(lap.mesh.center, 40)?;
    Ok(boundary + crate::fields::pair_sharp(lap, &gv)?)
}
