//! Numerical checks of the layer-potential identities. Each check returns a
//! [`CheckReport`] with the residuals it measured.

use crate::boundary_ops::{assemble_v, assemble_w, assemble_wt, green_dirichlet, steklov_poincare, SteklovPoincare};
use crate::error::{Error, Result};
use crate::fields::{pair_tau, Field, GridDensity, InteriorFunction, NegExponentField, NegSchauderDensity};
use crate::geometry::{make_area_mesh, make_grid, star_center, BoundaryCurve, BoundaryGrid, Point};
use crate::kernels::FundamentalSolution;
use crate::potentials::{dlp_eval, slp_eval, volume_eval, volume_eval_boundary, Extrapolation, LayerPotential, PolarInterpolant, Side, VolumeRule};
use crate::special::bessel_jy_upto;
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Chebyshev rows used when an interior field is resampled on a polar grid.
const INTERP_RADIAL: usize = 40;
/// Gauss–Legendre rows of the pairing mesh for ⟨E♯Δu, G[v]⟩.
const PAIR_RADIAL: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub geometry: BoundaryCurve,
    pub lambda: [f64; 2],
    pub n: usize,
    /// Radial × angular sizes of the area mesh, if one was used.
    pub mesh: Option<[usize; 2]>,
    pub residual_max: f64,
    /// Root mean square over the test points or nodes.
    pub residual_l2: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    /// Named sub-residuals and diagnostics.
    pub details: BTreeMap<String, f64>,
}

impl CheckReport {
    pub(crate) fn build(
        name: &str,
        curve: &BoundaryCurve,
        lambda: C64,
        n: usize,
        mesh: Option<[usize; 2]>,
        residuals: &[f64],
        tolerance: f64,
        start: Instant,
        details: BTreeMap<String, f64>,
    ) -> Self {
        let finite = residuals.iter().all(|r| r.is_finite());
        let (max, l2) = if finite && !residuals.is_empty() {
            let max = residuals.iter().copied().fold(0.0, f64::max);
            let l2 = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
            (max, l2)
        } else if finite {
            (0.0, 0.0)
        } else {
            (f64::MAX, f64::MAX)
        };
        CheckReport {
            name: name.to_string(),
            geometry: curve.clone(),
            lambda: [lambda.re, lambda.im],
            n,
            mesh,
            residual_max: max,
            residual_l2: l2,
            tolerance,
            pass: finite && max <= tolerance,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            details,
        }
    }

    /// Copy with the runtime zeroed, for comparisons.
    pub fn masked(&self) -> Self {
        CheckReport { runtime_ms: 0.0, ..self.clone() }
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance must be a non-negative number, got {tol}")))
    }
}

/// A field that only supports evaluation.
struct ValueField<F>(F);

impl<F: Fn(Point) -> C64 + Send + Sync> Field for ValueField<F> {
    fn value(&self, x: Point) -> C64 {
        (self.0)(x)
    }
    fn gradient(&self, _: Point) -> [C64; 2] {
        [C64::new(f64::NAN, f64::NAN); 2]
    }
}

/// ψ(y) = exp(1 − 1/(1 − |y − c|²/ρ²)) inside the disk of radius ρ, zero outside.
pub struct Bump {
    pub center: Point,
    pub radius: f64,
}

impl Field for Bump {
    fn value(&self, y: Point) -> C64 {
        let q = ((y[0] - self.center[0]).powi(2) + (y[1] - self.center[1]).powi(2)) / (self.radius * self.radius);
        if q >= 1.0 {
            ZERO
        } else {
            C64::new((1.0 - 1.0 / (1.0 - q)).exp(), 0.0)
        }
    }
    fn gradient(&self, y: Point) -> [C64; 2] {
        let r2 = self.radius * self.radius;
        let d = [y[0] - self.center[0], y[1] - self.center[1]];
        let q = (d[0] * d[0] + d[1] * d[1]) / r2;
        if q >= 1.0 {
            return [ZERO; 2];
        }
        let psi = (1.0 - 1.0 / (1.0 - q)).exp();
        let f = -psi / (1.0 - q).powi(2) * 2.0 / r2;
        [C64::new(f * d[0], 0.0), C64::new(f * d[1], 0.0)]
    }
}

/// Sphere integral ∫_{|y−x|=ε} ∂ψ/∂ν S(x−y) − ψ ∂_ν S(x−y) dσ_y, ν outward of the ball.
pub fn sphere_integral(fs: &FundamentalSolution, x: Point, psi: &dyn Field, eps: f64, nodes: usize) -> C64 {
    let (s, ds) = fs.value_and_derivative(eps);
    let h = 2.0 * PI / nodes as f64;
    let mut acc = ZERO;
    for j in 0..nodes {
        let (sn, cs) = (j as f64 * h).sin_cos();
        let y = [x[0] + eps * cs, x[1] + eps * sn];
        let g = psi.gradient(y);
        let dpsi = g[0] * cs + g[1] * sn;
        acc += dpsi * s - psi.value(y) * ds;
    }
    acc * (eps * h)
}

/// The sphere integral tends to −ψ(x) as ε → 0. The reported residual is the
/// one at the smallest ε; the check also requires strict decrease along `eps`.
pub fn check_delta_limit(fs: &FundamentalSolution, x: Point, psi: &dyn Field, eps: &[f64], tolerance: f64) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eps must be positive and strictly decreasing".into()));
    }
    let target = psi.value(x);
    let residuals: Vec<f64> = eps.iter().map(|&e| (sphere_integral(fs, x, psi, e, 512) + target).norm()).collect();
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let mut details = BTreeMap::new();
    for (e, r) in eps.iter().zip(&residuals) {
        details.insert(format!("eps={e:e}"), *r);
    }
    details.insert("decreasing".into(), if decreasing { 1.0 } else { 0.0 });
    let last = *residuals.last().unwrap();
    let mut rep = CheckReport::build("delta_limit", &BoundaryCurve::circle(eps[0]), fs.lambda(), 512, None, &[last], tolerance, start, details);
    rep.residual_l2 = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    rep.pass &= decreasing;
    Ok(rep)
}

/// A function with known gradient and Laplacian.
#[derive(Clone)]
pub struct Manufactured {
    pub name: String,
    pub value: Arc<dyn Fn(Point) -> C64 + Send + Sync>,
    pub gradient: Arc<dyn Fn(Point) -> [C64; 2] + Send + Sync>,
    pub laplacian: Arc<dyn Fn(Point) -> C64 + Send + Sync>,
}

impl Manufactured {
    /// x² + y².
    pub fn quadratic() -> Self {
        Manufactured {
            name: "quadratic".into(),
            value: Arc::new(|p| C64::new(p[0] * p[0] + p[1] * p[1], 0.0)),
            gradient: Arc::new(|p| [C64::new(2.0 * p[0], 0.0), C64::new(2.0 * p[1], 0.0)]),
            laplacian: Arc::new(|_| C64::new(4.0, 0.0)),
        }
    }

    /// e^{iκ·x}.
    pub fn plane_wave(kappa: [f64; 2]) -> Self {
        let e = move |p: Point| C64::from_polar(1.0, kappa[0] * p[0] + kappa[1] * p[1]);
        let k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1];
        Manufactured {
            name: "plane_wave".into(),
            value: Arc::new(e),
            gradient: Arc::new(move |p| {
                let v = e(p) * C64::i();
                [v * kappa[0], v * kappa[1]]
            }),
            laplacian: Arc::new(move |p| -k2 * e(p)),
        }
    }

    pub fn constant(c: C64) -> Self {
        Manufactured {
            name: "constant".into(),
            value: Arc::new(move |_| c),
            gradient: Arc::new(|_| [ZERO; 2]),
            laplacian: Arc::new(|_| ZERO),
        }
    }
}

/// Interior points c + s(x(t) − c) for s in {0.2, 0.55, 0.85} and exterior
/// points for s in {1.3, 2}, at five angles.
pub fn probe_points(curve: &BoundaryCurve) -> Result<(Vec<Point>, Vec<Point>)> {
    let c = star_center(curve)?;
    let ray = |s: f64, t: f64| {
        let x = curve.point(t);
        [c[0] + s * (x[0] - c[0]), c[1] + s * (x[1] - c[1])]
    };
    let angles: Vec<f64> = (0..5).map(|j| 0.3 + 2.0 * PI * j as f64 / 5.0).collect();
    let inside = [0.2, 0.55, 0.85].iter().flat_map(|&s| angles.iter().map(move |&t| ray(s, t))).collect();
    let outside = [1.3, 2.0].iter().flat_map(|&s| angles.iter().map(move |&t| ray(s, t))).collect();
    Ok((inside, outside))
}

/// u(x)·[x ∈ Ω] = ∫_Ω (Δu + λu) S(x−y) dy − ∫_∂Ω ∂_ν u S(x−y) − u ∂_{ν_y} S(x−y) dσ_y.
pub fn check_third_green(
    fs: &FundamentalSolution,
    curve: &BoundaryCurve,
    u: &Manufactured,
    interior: &[Point],
    exterior: &[Point],
    n: usize,
    mesh: [usize; 2],
    tolerance: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let grid = Arc::new(make_grid(curve, n)?);
    let center = star_center(curve)?;
    let rule = VolumeRule { radial: mesh[0], angular: mesh[1], center };
    let lam = fs.lambda();
    let dudn = GridDensity::from_fn(&grid, |t, p| {
        let i = ((t / grid.step()).round() as usize) % n;
        let g = (u.gradient)(p);
        g[0] * grid.normals[i][0] + g[1] * grid.normals[i][1]
    });
    let trace = grid_values(&grid, &*u.value);
    let src_fn = {
        let value = u.value.clone();
        let laplacian = u.laplacian.clone();
        move |p: Point| laplacian(p) + lam * value(p)
    };
    let src = ValueField(src_fn);
    let points: Vec<Point> = interior.iter().chain(exterior).copied().collect();
    let vol = volume_eval(fs, &src, curve, &points, &rule)?;
    let slp = slp_eval(fs, &dudn, &points)?;
    let dlp = dlp_eval(fs, &trace, &points)?;
    let mut res_in = vec![];
    let mut res_out = vec![];
    for (j, p) in points.iter().enumerate() {
        let rhs = vol[j] - slp[j] + dlp[j];
        if j < interior.len() {
            res_in.push((rhs - (u.value)(*p)).norm());
        } else {
            res_out.push(rhs.norm());
        }
    }
    let mut details = BTreeMap::new();
    details.insert("interior".into(), res_in.iter().copied().fold(0.0, f64::max));
    details.insert("exterior".into(), res_out.iter().copied().fold(0.0, f64::max));
    let all: Vec<f64> = res_in.into_iter().chain(res_out).collect();
    Ok(CheckReport::build(&format!("third_green/{}", u.name), curve, lam, n, Some(mesh), &all, tolerance, start, details))
}

fn grid_values(grid: &Arc<BoundaryGrid>, f: &(dyn Fn(Point) -> C64 + Send + Sync)) -> GridDensity {
    GridDensity::from_fn(grid, |_, p| f(p))
}

/// G[μ](x)·[x ∈ Ω] = λ∫_Ω G[μ] S(x−y) dy + w[μ](x) − v[Sᵗμ](x).
pub fn check_representation(
    lambda: C64,
    mu: &GridDensity,
    interior: &[Point],
    exterior: &[Point],
    mesh: [usize; 2],
    tolerance: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let fs = FundamentalSolution::planar(lambda);
    let grid = mu.grid.clone();
    let curve = grid.curve.clone();
    let dtn = steklov_poincare(&grid)?;
    let ext = green_dirichlet(&dtn, mu)?;
    let st = mu.with_values(dtn.apply_transpose(&mu.values));
    let points: Vec<Point> = interior.iter().chain(exterior).copied().collect();
    let w = dlp_eval(&fs, mu, &points)?;
    let v = slp_eval(&fs, &st, &points)?;
    let vol = if fs.is_laplace() {
        vec![ZERO; points.len()]
    } else {
        let center = star_center(&curve)?;
        let angular = mesh[1].div_ceil(grid.n) * grid.n;
        let interp = PolarInterpolant::from_field(&curve, center, INTERP_RADIAL, angular, &ext, Some(&mu.values), grid.n)?;
        let rule = VolumeRule { radial: mesh[0], angular: mesh[1], center };
        volume_eval(&fs, &interp, &curve, &points, &rule)?
    };
    let mut res_in = vec![];
    let mut res_out = vec![];
    for (j, p) in points.iter().enumerate() {
        let rhs = lambda * vol[j] + w[j] - v[j];
        if j < interior.len() {
            res_in.push((ext.value(*p) - rhs).norm());
        } else {
            res_out.push(rhs.norm());
        }
    }
    let mut details = BTreeMap::new();
    details.insert("interior".into(), res_in.iter().copied().fold(0.0, f64::max));
    details.insert("exterior".into(), res_out.iter().copied().fold(0.0, f64::max));
    let all: Vec<f64> = res_in.into_iter().chain(res_out).collect();
    Ok(CheckReport::build("representation", &curve, lambda, grid.n, Some(mesh), &all, tolerance, start, details))
}

/// Trigonometric test functions 1, cos t, sin t, cos 2t, sin 2t, ... in the curve parameter.
pub fn test_basis(grid: &Arc<BoundaryGrid>, count: usize) -> Vec<GridDensity> {
    (0..count)
        .map(|j| {
            let m = j.div_ceil(2) as f64;
            GridDensity::from_fn(grid, |t, _| {
                if j == 0 {
                    C64::new(1.0, 0.0)
                } else if j % 2 == 1 {
                    C64::new((m * t).cos(), 0.0)
                } else {
                    C64::new((m * t).sin(), 0.0)
                }
            })
        })
        .collect()
}

/// v⁺[τ] as an interior function: polar interpolant with trace Vτ and Δu = −λu on a pairing mesh.
pub fn interior_single_layer(fs: &FundamentalSolution, density: &GridDensity) -> Result<InteriorFunction> {
    let grid = density.grid.clone();
    let center = star_center(&grid.curve)?;
    let pot = LayerPotential::single(*fs, density);
    let trace = assemble_v(fs, &grid).apply(&density.values);
    let interp = PolarInterpolant::from_field(&grid.curve, center, INTERP_RADIAL, grid.n, &pot, Some(&trace), grid.n)?;
    let mesh = Arc::new(make_area_mesh(&grid.curve, PAIR_RADIAL, grid.n, center)?);
    let lam = fs.lambda();
    let f0 = if fs.is_laplace() {
        vec![ZERO; mesh.len()]
    } else {
        mesh.nodes.iter().map(|&y| -lam * interp.value(y)).collect()
    };
    let lap = NegExponentField::from_values(mesh, grid.clone(), f0)?;
    Ok(InteriorFunction::new(Arc::new(interp)).with_trace(density.with_values(trace)).with_laplacian(lap))
}

/// Single layer with a pair density τ = μ₀ + Sᵗμ₁: trace continuity, and the
/// interior (distributional) and exterior (classical) normal-derivative jumps
/// tested against `basis`.
pub fn check_slp_jumps(fs: &FundamentalSolution, tau: &NegSchauderDensity, basis: &[GridDensity], tolerance: f64) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let grid = tau.grid().clone();
    let dtn = steklov_poincare(&grid)?;
    let dens = tau.materialize(&dtn)?;
    let pot = LayerPotential::single(*fs, &dens);
    let rule = Extrapolation::default();
    let inner = pot.limit(Side::Interior, &rule)?;
    let outer = pot.limit(Side::Exterior, &rule)?;
    let trace_res: Vec<f64> = inner.iter().zip(&outer).map(|(a, b)| (a - b).norm()).collect();
    let u = interior_single_layer(fs, &dens)?;
    let flux_out = pot.normal_derivative_limit(Side::Exterior, &rule)?;
    let w = assemble_w(fs, &grid);
    let mut res_in = vec![];
    let mut res_out = vec![];
    let mut res_sum = vec![];
    for v in basis {
        let wv = w.apply(&v.values);
        let minus: Vec<C64> = wv.iter().zip(&v.values).map(|(a, b)| a - 0.5 * b).collect();
        let plus: Vec<C64> = wv.iter().zip(&v.values).map(|(a, b)| a + 0.5 * b).collect();
        let lhs_in = crate::boundary_ops::dist_normal_derivative(&u, v, &dtn)?;
        let rhs_in = pair_tau(tau, &v.with_values(minus), Some(&dtn))?;
        let lhs_out = grid.pair(&flux_out, &v.values);
        let rhs_out = pair_tau(tau, &v.with_values(plus), Some(&dtn))?;
        let tv = pair_tau(tau, v, Some(&dtn))?;
        res_in.push((lhs_in - rhs_in).norm());
        res_out.push((lhs_out - rhs_out).norm());
        res_sum.push((lhs_in - lhs_out + tv).norm());
    }
    let mx = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mut details = BTreeMap::new();
    details.insert("trace".into(), mx(&trace_res));
    details.insert("interior".into(), mx(&res_in));
    details.insert("exterior".into(), mx(&res_out));
    details.insert("jump_sum".into(), mx(&res_sum));
    let all: Vec<f64> = [mx(&trace_res)].into_iter().chain(res_in).chain(res_out).collect();
    Ok(CheckReport::build("slp_jumps", &grid.curve, fs.lambda(), grid.n, Some([PAIR_RADIAL, grid.n]), &all, tolerance, start, details))
}

/// w^± = ±½μ + Wμ at the nodes, with + the interior side.
pub fn check_dlp_jump(fs: &FundamentalSolution, mu: &GridDensity, tolerance: f64) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let grid = mu.grid.clone();
    let pot = LayerPotential::double(*fs, mu);
    let rule = Extrapolation::default();
    let wmu = assemble_w(fs, &grid).apply(&mu.values);
    let inner = pot.limit(Side::Interior, &rule)?;
    let outer = pot.limit(Side::Exterior, &rule)?;
    let mut res = vec![];
    let (mut ri, mut ro) = (0.0f64, 0.0f64);
    for i in 0..grid.n {
        let a = (inner[i] - 0.5 * mu.values[i] - wmu[i]).norm();
        let b = (outer[i] + 0.5 * mu.values[i] - wmu[i]).norm();
        ri = ri.max(a);
        ro = ro.max(b);
        res.push(a.max(b));
    }
    let mut details = BTreeMap::new();
    details.insert("interior".into(), ri);
    details.insert("exterior".into(), ro);
    Ok(CheckReport::build("dlp_jump", &grid.curve, fs.lambda(), grid.n, None, &res, tolerance, start, details))
}

/// ∂_ν w⁺[μ] = ∂_ν w⁻[μ] at the nodes.
pub fn check_dlp_normal_continuity(fs: &FundamentalSolution, mu: &GridDensity, tolerance: f64) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let grid = mu.grid.clone();
    let pot = LayerPotential::double(*fs, mu);
    let rule = Extrapolation::default();
    let inner = pot.normal_derivative_limit(Side::Interior, &rule)?;
    let outer = pot.normal_derivative_limit(Side::Exterior, &rule)?;
    let res: Vec<f64> = inner.iter().zip(&outer).map(|(a, b)| (a - b).norm()).collect();
    let mut details = BTreeMap::new();
    details.insert("flux_max".into(), inner.iter().map(|v| v.norm()).fold(0.0, f64::max));
    Ok(CheckReport::build("dlp_normal_continuity", &grid.curve, fs.lambda(), grid.n, None, &res, tolerance, start, details))
}

/// V₀[Wᵗ_λη] − W₀[V_λη] − ½V₀[η] + ½V_λ[η] + λ∫_Ω S₀(x−y) v⁺_λ[η](y) dy = 0 at the nodes.
pub fn check_quasi_symmetrization(lambda: C64, eta: &NegSchauderDensity, radial: usize, tolerance: f64) -> Result<CheckReport> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    let grid = eta.grid().clone();
    let fs = FundamentalSolution::planar(lambda);
    let lap = FundamentalSolution::laplace();
    let dtn = steklov_poincare(&grid)?;
    let dens = eta.materialize(&dtn)?;
    let v0 = &dtn.v0;
    let w0 = assemble_w(&lap, &grid);
    let vl = assemble_v(&fs, &grid);
    let wtl = assemble_wt(&fs, &grid);
    let vl_eta = vl.apply(&dens.values);
    let a = v0.apply(&wtl.apply(&dens.values));
    let b = w0.apply(&vl_eta);
    let c = v0.apply(&dens.values);
    let mut vol = vec![ZERO; grid.n];
    let mut details = BTreeMap::new();
    if !fs.is_laplace() {
        let center = star_center(&grid.curve)?;
        let pot = LayerPotential::single(fs, &dens);
        let interp = PolarInterpolant::from_field(&grid.curve, center, INTERP_RADIAL, grid.n, &pot, Some(&vl_eta), grid.n)?;
        vol = volume_eval_boundary(&lap, &interp, &grid, radial)?;
    } else {
        let wt0 = &dtn.wt0;
        let comm = &v0.matrix * &wt0.matrix - &w0.matrix * &v0.matrix;
        details.insert("matrix_commutator".into(), comm.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let res: Vec<f64> = (0..grid.n).map(|i| (a[i] - b[i] - 0.5 * c[i] + 0.5 * vl_eta[i] + lambda * vol[i]).norm()).collect();
    let mesh = if fs.is_laplace() { None } else { Some([radial, grid.n]) };
    Ok(CheckReport::build("quasi_symmetrization", &grid.curve, lambda, grid.n, mesh, &res, tolerance, start, details))
}

/// Spectral data of the discrete Wᵗ_λ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WtSpectrum {
    /// Singular values of D^{1/2} Wᵗ D^{-1/2}, descending.
    pub singular_values: Vec<f64>,
    /// Singular values of the weighted J∘Wᵗ, descending.
    pub smoothed: Vec<f64>,
    /// Eigenvalues of −½I + Wᵗ, ordered by distance from −½, farthest first.
    pub eigenvalues: Vec<C64>,
    /// Slope of ln σ_m against m over the leading singular values above 1e-14 σ₁.
    pub decay_rate: f64,
}

fn weighted(grid: &BoundaryGrid, a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = grid.n;
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] * (grid.weights[i] / grid.weights[j]).sqrt())
}

fn singular_values(a: DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values of Wᵗ_λ and of J∘Wᵗ_λ, and the clustering of the spectrum
/// of −½I + Wᵗ_λ at −½. The reported residual is the largest distance from −½
/// once the `keep` farthest eigenvalues are set aside; σ_{index}/σ₁ (1-based)
/// goes to the details as `sigma_ratio`.
pub fn spectrum_wt(fs: &FundamentalSolution, grid: &Arc<BoundaryGrid>, index: usize, keep: usize, tolerance: f64) -> Result<(WtSpectrum, CheckReport)> {
    let start = Instant::now();
    check_tolerance(tolerance)?;
    if index == 0 || index > grid.n {
        return Err(Error::Config(format!("singular value index {index} outside 1..={}", grid.n)));
    }
    let wt = assemble_wt(fs, grid);
    let sigma = singular_values(weighted(grid, &wt.matrix));
    let dtn = steklov_poincare(grid)?;
    let jmat = j_matrix(&dtn);
    let smoothed = singular_values(weighted(grid, &(jmat * &wt.matrix)));
    let eig = nalgebra::Schur::try_new(wt.matrix.clone(), f64::EPSILON, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::State("eigenvalue iteration did not converge".into()))?;
    let half = C64::new(-0.5, 0.0);
    let mut eigenvalues: Vec<C64> = eig.iter().map(|e| e + half).collect();
    eigenvalues.sort_by(|a, b| (b - half).norm().total_cmp(&(a - half).norm()));
    let floor = sigma[0] * 1e-14;
    let pts: Vec<(f64, f64)> = sigma.iter().enumerate().take_while(|(_, s)| **s > floor).map(|(m, s)| (m as f64, s.ln())).collect();
    let decay_rate = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NEG_INFINITY
    };
    let outliers = eigenvalues.iter().filter(|e| (*e - half).norm() > 1e-3).count();
    let ratio = sigma[index - 1] / sigma[0];
    let spread = eigenvalues.get(keep).map_or(0.0, |e| (e - half).norm());
    let mut details = BTreeMap::new();
    details.insert("sigma_1".into(), sigma[0]);
    details.insert(format!("sigma_{index}"), sigma[index - 1]);
    details.insert("cluster_outliers".into(), outliers as f64);
    details.insert("sigma_ratio".into(), ratio);
    details.insert("decay_rate".into(), decay_rate);
    details.insert("smoothed_sigma_1".into(), smoothed[0]);
    details.insert(format!("smoothed_sigma_{index}"), smoothed[index - 1]);
    let report = CheckReport::build("spectrum_wt", &grid.curve, fs.lambda(), grid.n, None, &[spread], tolerance, start, details);
    Ok((WtSpectrum { singular_values: sigma, smoothed, eigenvalues, decay_rate }, report))
}

/// Matrix of J[τ] = V₀[τ − m] + m, m = ⟨τ, 1⟩/|∂Ω|.
fn j_matrix(dtn: &SteklovPoincare) -> DMatrix<C64> {
    let grid = dtn.grid();
    let n = grid.n;
    let len = grid.length();
    let p = DMatrix::from_fn(n, n, |_, j| C64::new(grid.weights[j] / len, 0.0));
    let id = DMatrix::<C64>::identity(n, n);
    &dtn.v0.matrix * (id - &p) + p
}

/// Eigenvalue of Wᵗ_λ (and W_λ) for the Fourier mode m on the circle of radius r:
/// −(iπkR/4)(J_m H_m' + J_m' H_m) at kR, and ½ for m = 0 when λ = 0.
pub fn disk_wt_eigenvalue(lambda: C64, r: f64, m: u32) -> Result<C64> {
    let fs = FundamentalSolution::planar(lambda);
    if fs.is_laplace() {
        return Ok(C64::new(if m == 0 { 0.5 } else { 0.0 }, 0.0));
    }
    let k = fs.wavenumber();
    let (j, y) = bessel_jy_upto(m + 1, k * r)?;
    let h: Vec<C64> = j.iter().zip(&y).map(|(a, b)| a + C64::i() * b).collect();
    let m = m as usize;
    let d = |f: &Vec<C64>| if m == 0 { -f[1] } else { (f[m - 1] - f[m + 1]) / 2.0 };
    Ok(C64::new(0.0, -PI * r / 4.0) * k * (j[m] * d(&h) + d(&j) * h[m]))
}

/// |eigenvalues| of Wᵗ_λ on the circle of radius r, one per Fourier mode of an
/// n-point grid, sorted descending.
pub fn disk_wt_oracle(lambda: C64, r: f64, n: usize) -> Result<Vec<f64>> {
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    for m in 0..=half {
        let e = disk_wt_eigenvalue(lambda, r, m as u32)?.norm();
        out.push(e);
        if m != 0 && m != half {
            out.push(e);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}
