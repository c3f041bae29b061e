//! Single-layer, double-layer and volume potentials evaluated off the boundary.
//!
//! Layer potentials use the trapezoid rule on the boundary grid. Close to the
//! curve that rule loses accuracy like exp(−2πδ/h), so the density is
//! resampled by trigonometric interpolation onto a grid refined by a power of
//! two chosen from the distance δ to the curve and the local node spacing h.

use crate::error::{Error, Result};
use crate::fields::{Field, GridDensity, NegSchauderDensity};
use crate::geometry::{cone_jacobian, dot, norm, sub, AreaMesh, BoundaryCurve, BoundaryGrid, Point};
use crate::kernels::FundamentalSolution;
use crate::quadrature::{fourier_coefficients, log_endpoint_weights, periodic_log_weights, resample_periodic};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

const ZERO: C64 = C64::new(0.0, 0.0);
const MAX_LEVELS: usize = 12;

/// Policy for targets close to the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearField {
    /// Resample the density when the plain rule is not accurate enough.
    pub upsample: bool,
    /// Without upsampling, targets closer than this many local node spacings are refused.
    pub collar: f64,
    /// Required ratio between target distance and (refined) node spacing.
    pub ratio: f64,
    /// Largest refinement factor (a power of two).
    pub max_factor: usize,
}

impl Default for NearField {
    fn default() -> Self {
        NearField { upsample: true, collar: 3.0, ratio: 5.0, max_factor: 1024 }
    }
}

impl NearField {
    pub fn direct() -> Self {
        NearField { upsample: false, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Single,
    Double,
}

/// Which side of the curve a limit is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Interior => -1.0,
            Side::Exterior => 1.0,
        }
    }
}

struct Level {
    points: Vec<Point>,
    normals: Vec<Point>,
    strength: Vec<C64>,
}

/// A layer potential with its density, ready for evaluation anywhere off ∂Ω.
pub struct LayerPotential {
    fs: FundamentalSolution,
    kind: LayerKind,
    grid: Arc<BoundaryGrid>,
    density: Vec<C64>,
    near: NearField,
    levels: Vec<OnceLock<Level>>,
}

impl LayerPotential {
    pub fn new(fs: FundamentalSolution, kind: LayerKind, density: &GridDensity) -> Self {
        LayerPotential {
            fs,
            kind,
            grid: density.grid.clone(),
            density: density.values.clone(),
            near: NearField::default(),
            levels: (0..MAX_LEVELS).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn single(fs: FundamentalSolution, density: &GridDensity) -> Self {
        Self::new(fs, LayerKind::Single, density)
    }

    pub fn double(fs: FundamentalSolution, density: &GridDensity) -> Self {
        Self::new(fs, LayerKind::Double, density)
    }

    pub fn with_near_field(mut self, near: NearField) -> Self {
        self.near = near;
        self
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &FundamentalSolution {
        &self.fs
    }

    fn level(&self, p: usize) -> &Level {
        self.levels[p].get_or_init(|| {
            let n = self.grid.n << p;
            let fine = if p == 0 { self.grid.as_ref().clone() } else { BoundaryGrid::build(&self.grid.curve, n) };
            let dens = resample_periodic(&self.density, n);
            let strength = dens.iter().zip(&fine.weights).map(|(d, w)| d * w).collect();
            Level { points: fine.points, normals: fine.normals, strength }
        })
    }

    /// Refinement level for a target, or a proximity error.
    fn choose(&self, x: Point, extra: f64) -> Result<usize> {
        let (t, dist, _) = self.grid.closest(x);
        let h = norm(self.grid.curve.eval(t).1) * self.grid.step();
        let need = (self.near.ratio + extra) * h;
        let mut p = 0;
        while dist * ((1usize << p) as f64) < need {
            p += 1;
            if p >= MAX_LEVELS || (1usize << p) > self.near.max_factor {
                return Err(Error::Proximity { distance: dist, limit: need / self.near.max_factor as f64 });
            }
        }
        if p > 0 && !self.near.upsample {
            let limit = self.near.collar * h;
            if dist < limit {
                return Err(Error::Proximity { distance: dist, limit });
            }
            return Ok(0);
        }
        Ok(p)
    }

    fn value_on(&self, lvl: &Level, x: Point) -> C64 {
        let mut acc = ZERO;
        match self.kind {
            LayerKind::Single => {
                for (y, q) in lvl.points.iter().zip(&lvl.strength) {
                    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                    acc += self.fs.value(r) * q;
                }
            }
            LayerKind::Double => {
                for ((y, nu), q) in lvl.points.iter().zip(&lvl.normals).zip(&lvl.strength) {
                    let d = [x[0] - y[0], x[1] - y[1]];
                    let r = d[0].hypot(d[1]);
                    acc -= self.fs.derivative(r) * (dot(d, *nu) / r) * q;
                }
            }
        }
        acc
    }

    fn gradient_on(&self, lvl: &Level, x: Point) -> [C64; 2] {
        let mut g = [ZERO, ZERO];
        let lambda = self.fs.lambda();
        for ((y, nu), q) in lvl.points.iter().zip(&lvl.normals).zip(&lvl.strength) {
            let d = [x[0] - y[0], x[1] - y[1]];
            let r = d[0].hypot(d[1]);
            let e = [d[0] / r, d[1] / r];
            match self.kind {
                LayerKind::Single => {
                    let ds = self.fs.derivative(r) * q;
                    g[0] += ds * e[0];
                    g[1] += ds * e[1];
                }
                LayerKind::Double => {
                    let (s, ds) = self.fs.value_and_derivative(r);
                    let d2 = -lambda * s - ds / r;
                    let en = dot(e, *nu);
                    for c in 0..2 {
                        g[c] -= (d2 * en * e[c] + ds / r * (nu[c] - en * e[c])) * q;
                    }
                }
            }
        }
        g
    }

    pub fn value_at(&self, x: Point) -> Result<C64> {
        let p = self.choose(x, 0.0)?;
        Ok(self.value_on(self.level(p), x))
    }

    pub fn gradient_at(&self, x: Point) -> Result<[C64; 2]> {
        let p = self.choose(x, 1.0)?;
        Ok(self.gradient_on(self.level(p), x))
    }

    pub fn eval(&self, points: &[Point]) -> Result<Vec<C64>> {
        points.par_iter().map(|&x| self.value_at(x)).collect()
    }

    pub fn eval_gradient(&self, points: &[Point]) -> Result<Vec<[C64; 2]>> {
        points.par_iter().map(|&x| self.gradient_at(x)).collect()
    }

    /// One-sided boundary limits of the value at every node.
    pub fn limit(&self, side: Side, rule: &Extrapolation) -> Result<Vec<C64>> {
        self.limit_with(side, rule, |x| self.value_at(x))
    }

    /// One-sided boundary limits of ν·∇ at every node (ν the outward normal of Ω).
    pub fn normal_derivative_limit(&self, side: Side, rule: &Extrapolation) -> Result<Vec<C64>> {
        let grid = self.grid.clone();
        (0..grid.n)
            .into_par_iter()
            .map(|i| {
                let nu = grid.normals[i];
                let samples = rule.offsets(&grid, i, side)?.into_iter().map(|x| {
                    let g = self.gradient_at(x)?;
                    Ok(g[0] * nu[0] + g[1] * nu[1])
                });
                rule.extrapolate(samples)
            })
            .collect()
    }

    fn limit_with(&self, side: Side, rule: &Extrapolation, f: impl Fn(Point) -> Result<C64> + Sync) -> Result<Vec<C64>> {
        let grid = &self.grid;
        (0..grid.n)
            .into_par_iter()
            .map(|i| rule.extrapolate(rule.offsets(grid, i, side)?.into_iter().map(&f)))
            .collect()
    }
}

impl Field for LayerPotential {
    fn value(&self, x: Point) -> C64 {
        self.value_at(x).unwrap_or(C64::new(f64::NAN, f64::NAN))
    }
    fn gradient(&self, x: Point) -> [C64; 2] {
        self.gradient_at(x).unwrap_or([C64::new(f64::NAN, f64::NAN); 2])
    }
}

/// Polynomial extrapolation to the boundary from samples at distances
/// jδ, j = 1..order, along the node normal, with δ = step · (local spacing).
#[derive(Clone, Copy, Debug)]
pub struct Extrapolation {
    pub order: usize,
    pub step: f64,
}

impl Default for Extrapolation {
    fn default() -> Self {
        Extrapolation { order: 8, step: 0.25 }
    }
}

impl Extrapolation {
    fn offsets(&self, grid: &BoundaryGrid, i: usize, side: Side) -> Result<Vec<Point>> {
        let h = grid.speed[i] * grid.step();
        let nu = grid.normals[i];
        let x = grid.points[i];
        Ok((1..=self.order)
            .map(|j| {
                let d = side.sign() * j as f64 * self.step * h;
                [x[0] + d * nu[0], x[1] + d * nu[1]]
            })
            .collect())
    }

    fn extrapolate(&self, samples: impl Iterator<Item = Result<C64>>) -> Result<C64> {
        // Lagrange weights at 0 for nodes 1..p: (−1)^{j+1} C(p, j)
        let p = self.order;
        let mut acc = ZERO;
        let mut binom = 1.0;
        for (j, s) in samples.enumerate() {
            let j = j + 1;
            binom *= (p + 1 - j) as f64 / j as f64;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc += s? * (sign * binom);
        }
        Ok(acc)
    }
}

/// v(x) = ∫ S(x − y) τ(y) dσ(y).
pub fn slp_eval(fs: &FundamentalSolution, tau: &GridDensity, points: &[Point]) -> Result<Vec<C64>> {
    LayerPotential::single(*fs, tau).eval(points)
}

/// w(x) = ∫ −∇S(x − y)·ν(y) μ(y) dσ(y).
pub fn dlp_eval(fs: &FundamentalSolution, mu: &GridDensity, points: &[Point]) -> Result<Vec<C64>> {
    LayerPotential::double(*fs, mu).eval(points)
}

/// How the Sᵗμ₁ part of a pair density is turned into a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// Single layer with the node values of Sᵗμ₁.
    Direct,
    /// −G[μ₁] (inside only) + λ∫G[μ₁]S + w[μ₁].
    Representation,
}

/// Discretization used for the volume terms of the representation mode.
#[derive(Clone, Copy, Debug)]
pub struct VolumeRule {
    pub radial: usize,
    pub angular: usize,
    pub center: Point,
}

/// Single layer with density τ = μ₀ + Sᵗμ₁.
pub fn slp_eval_pair(
    fs: &FundamentalSolution,
    tau: &NegSchauderDensity,
    points: &[Point],
    dtn: &crate::boundary_ops::SteklovPoincare,
    mode: PairMode,
    rule: &VolumeRule,
) -> Result<Vec<C64>> {
    if !tau.has_distributional_part() || mode == PairMode::Direct {
        let dens = tau.materialize(dtn)?;
        return slp_eval(fs, &dens, points);
    }
    let mut out = slp_eval(fs, &tau.mu0, points)?;
    let rep = sharp_transpose_potential(fs, &tau.mu1, points, dtn, rule)?;
    for (o, r) in out.iter_mut().zip(rep) {
        *o += r;
    }
    Ok(out)
}

/// v[Sᵗμ](x) through the representation −G[μ] + λ∫G[μ]S + w[μ] (no −G outside).
pub fn sharp_transpose_potential(
    fs: &FundamentalSolution,
    mu: &GridDensity,
    points: &[Point],
    dtn: &crate::boundary_ops::SteklovPoincare,
    rule: &VolumeRule,
) -> Result<Vec<C64>> {
    let ext = crate::boundary_ops::green_dirichlet(dtn, mu)?;
    let w = dlp_eval(fs, mu, points)?;
    let grid = &mu.grid;
    let inside: Vec<bool> = points.iter().map(|&x| grid.closest(x).2 < 0.0).collect();
    let g: Vec<C64> = points.par_iter().map(|&x| ext.value(x)).collect();
    let vol = if fs.is_laplace() {
        vec![ZERO; points.len()]
    } else {
        let interp = PolarInterpolant::from_field(&grid.curve, rule.center, 40, rule.angular, &ext, Some(&mu.values), grid.n)?;
        volume_eval(fs, &interp, &grid.curve, points, rule)?
    };
    Ok((0..points.len())
        .map(|j| {
            let lam = fs.lambda() * vol[j];
            if inside[j] {
                -g[j] + lam + w[j]
            } else {
                lam + w[j]
            }
        })
        .collect())
}

/// ∫_Ω S(x − y) f(y) dy. Interior targets use a polar rule centred at the
/// target with a product rule for the logarithm; exterior targets use the
/// mesh centred at `rule.center`.
pub fn volume_eval(
    fs: &FundamentalSolution,
    f: &dyn Field,
    curve: &BoundaryCurve,
    points: &[Point],
    rule: &VolumeRule,
) -> Result<Vec<C64>> {
    let probe = BoundaryGrid::build(curve, rule.angular.max(64));
    let mesh = crate::geometry::make_area_mesh(curve, rule.radial, rule.angular, rule.center)?;
    let radial = RadialLogRule::new(rule.radial);
    points
        .par_iter()
        .map(|&x| {
            let (_, dist, side) = probe.closest(x);
            if side < 0.0 {
                // the angular integrand carries ln|x(t) − x|, nearly singular at distance δ
                let speed = probe.max_spacing() / probe.step();
                let mut k = rule.angular;
                while (k as f64) * dist < 40.0 * speed && k < (1 << 16) {
                    k *= 2;
                }
                interior_volume(fs, f, curve, x, k, &radial)
            } else {
                if dist == 0.0 {
                    return Err(Error::Singularity);
                }
                Ok(mesh_volume(fs, &mesh, |k| f.value(mesh.nodes[k]), x))
            }
        })
        .collect()
}

/// Volume potential of node values on a mesh at exterior targets.
pub fn volume_eval_sampled(fs: &FundamentalSolution, mesh: &AreaMesh, values: &[C64], points: &[Point]) -> Result<Vec<C64>> {
    if values.len() != mesh.len() {
        return Err(Error::Shape("values do not match the mesh".into()));
    }
    let probe = BoundaryGrid::build(&mesh.curve, mesh.angular.max(64));
    points
        .par_iter()
        .map(|&x| {
            if probe.closest(x).2 < 0.0 {
                return Err(Error::Geometry("interior targets need an evaluable density for the re-centred rule".into()));
            }
            Ok(mesh_volume(fs, mesh, |k| values[k], x))
        })
        .collect()
}

fn mesh_volume(fs: &FundamentalSolution, mesh: &AreaMesh, f: impl Fn(usize) -> C64, x: Point) -> C64 {
    let mut acc = ZERO;
    for (k, (y, w)) in mesh.nodes.iter().zip(&mesh.weights).enumerate() {
        let r = norm(sub(x, *y));
        acc += fs.value(r) * f(k) * *w;
    }
    acc
}

/// Gauss–Legendre nodes with plain and log-product weights on [0, 1].
pub(crate) struct RadialLogRule {
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub wlog: Vec<f64>,
}

impl RadialLogRule {
    pub fn new(m: usize) -> Self {
        let (s, w, wlog) = log_endpoint_weights(m);
        RadialLogRule { s, w, wlog }
    }

    /// ∫₀¹ S(s ρ) g(s) s ds for S = a ln r + b.
    fn integrate(&self, fs: &FundamentalSolution, rho: f64, g: impl Fn(f64) -> C64) -> C64 {
        let lr = rho.ln();
        let mut acc = ZERO;
        for ((&s, &w), &wl) in self.s.iter().zip(&self.w).zip(&self.wlog) {
            let (a, b) = fs.log_split(s * rho);
            let gs = g(s) * s;
            acc += gs * (a * (wl + w * lr) + b * w);
        }
        acc
    }
}

fn interior_volume(
    fs: &FundamentalSolution,
    f: &dyn Field,
    curve: &BoundaryCurve,
    x: Point,
    angular: usize,
    radial: &RadialLogRule,
) -> Result<C64> {
    let h = 2.0 * PI / angular as f64;
    let mut acc = ZERO;
    for k in 0..angular {
        let t = k as f64 * h;
        let jac = cone_jacobian(curve, x, t);
        if jac <= 0.0 {
            return Err(Error::Geometry(format!("domain is not star-shaped with respect to {x:?}")));
        }
        let d = sub(curve.point(t), x);
        let rho = norm(d);
        acc += radial.integrate(fs, rho, |s| f.value([x[0] + s * d[0], x[1] + s * d[1]])) * (jac * h);
    }
    Ok(acc)
}

/// ∫_Ω S(x_i − y) f(y) dy at the grid nodes x_i. Each node is the apex of a
/// polar rule over Ω; the logarithm in the angular variable is handled by the
/// periodic log-singular weights. Requires Ω to be star-shaped with respect
/// to each of its boundary points.
pub fn volume_eval_boundary(fs: &FundamentalSolution, f: &dyn Field, grid: &BoundaryGrid, radial: usize) -> Result<Vec<C64>> {
    let n = grid.n;
    let h = grid.step();
    let rl = periodic_log_weights(n);
    let rule = RadialLogRule::new(radial);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.points[i];
            let mut smooth = ZERO;
            let mut logpart = ZERO;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = sub(grid.points[j], x);
                let jac = d[0] * grid.tangents[j][1] - d[1] * grid.tangents[j][0];
                if jac <= 0.0 {
                    return Err(Error::Geometry("domain is not star-shaped with respect to its boundary points".into()));
                }
                let rho = norm(d);
                let (mut a_int, mut b_int, mut c_int) = (ZERO, ZERO, ZERO);
                for ((&s, &w), &wl) in rule.s.iter().zip(&rule.w).zip(&rule.wlog) {
                    let (a, b) = fs.log_split(s * rho);
                    let fv = f.value([x[0] + s * d[0], x[1] + s * d[1]]) * s;
                    a_int += fv * a * wl;
                    b_int += fv * a * w;
                    c_int += fv * b * w;
                }
                let half = 0.5 * (grid.t[i] - grid.t[j]);
                let l = (rho * rho / (4.0 * half.sin().powi(2))).ln();
                smooth += (a_int + c_int + 0.5 * b_int * l) * jac;
                logpart += rl[(i + n - j) % n] * 0.5 * b_int * jac;
            }
            Ok(smooth * h + logpart)
        })
        .collect()
}

/// Smooth function on a star-shaped Ω̄ stored as a Chebyshev (in s) by
/// Fourier (in t) expansion over the map (s, t) ↦ c + s (x(t) − c).
pub struct PolarInterpolant {
    curve: BoundaryCurve,
    center: Point,
    lmax: usize,
    modes: Vec<i64>,
    coeffs: Vec<C64>,
    theta: Vec<f64>,
}

impl PolarInterpolant {
    /// Samples `field` on Chebyshev–Lobatto radii and `angular` angles. When
    /// `trace` is given (values at the nodes of an `trace_n`-point grid), it
    /// replaces the evaluation on the curve itself.
    pub fn from_field(
        curve: &BoundaryCurve,
        center: Point,
        radial: usize,
        angular: usize,
        field: &dyn Field,
        trace: Option<&[C64]>,
        trace_n: usize,
    ) -> Result<Self> {
        if !crate::geometry::is_star_shaped(curve, center, 4 * angular.max(256)) {
            return Err(Error::Geometry(format!("curve is not star-shaped with respect to {center:?}")));
        }
        let m = radial.max(4);
        let s: Vec<f64> = (0..m).map(|j| 0.5 * (1.0 - (PI * j as f64 / (m - 1) as f64).cos())).collect();
        let h = 2.0 * PI / angular as f64;
        let outer: Vec<Point> = (0..angular).map(|k| curve.point(k as f64 * h)).collect();
        let boundary: Option<Vec<C64>> = match trace {
            Some(tr) => {
                if tr.len() != trace_n {
                    return Err(Error::Shape("trace length mismatch".into()));
                }
                if trace_n == angular {
                    Some(tr.to_vec())
                } else if angular % trace_n == 0 {
                    Some(resample_periodic(tr, angular))
                } else {
                    return Err(Error::Shape("angular count must be a multiple of the trace grid".into()));
                }
            }
            None => None,
        };
        let mut pts = Vec::with_capacity(m * angular);
        for j in 1..m {
            for p in &outer {
                pts.push([center[0] + s[j] * (p[0] - center[0]), center[1] + s[j] * (p[1] - center[1])]);
            }
        }
        let last = (m - 2) * angular;
        let vals: Vec<C64> = pts
            .par_iter()
            .enumerate()
            .map(|(idx, &y)| match (&boundary, idx >= last) {
                (Some(b), true) => b[idx - last],
                _ => field.value(y),
            })
            .collect();
        if vals.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Proximity { distance: 0.0, limit: 0.0 });
        }
        let c0 = field.value(center);
        let mut rows = vec![vec![c0; angular]];
        for j in 1..m {
            rows.push(vals[(j - 1) * angular..j * angular].to_vec());
        }
        Ok(Self::from_samples(curve, center, &rows))
    }

    /// Builds the expansion from samples rows[j][k] at s_j (Chebyshev–Lobatto,
    /// increasing from 0 to 1) and t_k = 2πk/K.
    pub fn from_samples(curve: &BoundaryCurve, center: Point, rows: &[Vec<C64>]) -> Self {
        let m = rows.len();
        let kk = rows[0].len();
        let four: Vec<Vec<C64>> = rows.iter().map(|r| fourier_coefficients(r)).collect();
        // Chebyshev–Lobatto transform in x = 2s − 1 = −cos(πj/(m−1)).
        let big = m - 1;
        let mut cheb = vec![vec![ZERO; kk]; m];
        for l in 0..m {
            for (j, fj) in four.iter().enumerate() {
                let x = -(PI * j as f64 / big as f64).cos();
                let tl = (l as f64 * x.acos()).cos();
                let wj = if j == 0 || j == big { 0.5 } else { 1.0 };
                for (c, v) in cheb[l].iter_mut().zip(fj) {
                    *c += v * (tl * wj);
                }
            }
            let scale = if l == 0 || l == big { 1.0 / big as f64 } else { 2.0 / big as f64 };
            for c in cheb[l].iter_mut() {
                *c *= scale;
            }
        }
        let mut peak = 0.0f64;
        for row in &cheb {
            for v in row {
                peak = peak.max(v.norm());
            }
        }
        let cut = peak * 1e-16;
        let mut lmax = 0;
        for (l, row) in cheb.iter().enumerate() {
            if row.iter().any(|v| v.norm() > cut) {
                lmax = l;
            }
        }
        let half = kk / 2;
        // (mode, FFT index, factor); an even-length Nyquist term becomes a cosine
        let mut terms: Vec<(i64, usize, f64)> = Vec::new();
        for idx in 0..kk {
            if cheb.iter().any(|row| row[idx].norm() > cut) {
                if kk % 2 == 0 && idx == half {
                    terms.push((half as i64, idx, 0.5));
                    terms.push((-(half as i64), idx, 0.5));
                } else {
                    let mm = if idx <= half { idx as i64 } else { idx as i64 - kk as i64 };
                    terms.push((mm, idx, 1.0));
                }
            }
        }
        let modes: Vec<i64> = terms.iter().map(|t| t.0).collect();
        let mut coeffs = Vec::with_capacity((lmax + 1) * modes.len());
        for row in cheb.iter().take(lmax + 1) {
            for &(_, idx, factor) in &terms {
                coeffs.push(row[idx] * factor);
            }
        }
        let nt = 4 * kk.max(256);
        let mut theta = Vec::with_capacity(nt + 1);
        let mut prev = f64::NAN;
        let mut offset = 0.0;
        for q in 0..=nt {
            let t = 2.0 * PI * q as f64 / nt as f64;
            let d = sub(curve.point(t), center);
            let mut a = d[1].atan2(d[0]) + offset;
            if prev.is_finite() {
                while a < prev - PI {
                    a += 2.0 * PI;
                    offset += 2.0 * PI;
                }
                while a > prev + PI {
                    a -= 2.0 * PI;
                    offset -= 2.0 * PI;
                }
            }
            theta.push(a);
            prev = a;
        }
        PolarInterpolant { curve: curve.clone(), center, lmax, modes, coeffs, theta }
    }

    /// Polar coordinates (s, t) of y.
    pub fn coordinates(&self, y: Point) -> (f64, f64) {
        let d = sub(y, self.center);
        let r = norm(d);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let nt = self.theta.len() - 1;
        let th0 = self.theta[0];
        let mut phi = d[1].atan2(d[0]);
        while phi < th0 {
            phi += 2.0 * PI;
        }
        while phi >= th0 + 2.0 * PI {
            phi -= 2.0 * PI;
        }
        let q = self.theta.partition_point(|&v| v <= phi).clamp(1, nt);
        let (a, b) = (self.theta[q - 1], self.theta[q]);
        let mut t = 2.0 * PI * ((q - 1) as f64 + (phi - a) / (b - a)) / nt as f64;
        for _ in 0..8 {
            let (p, d1, _) = self.curve.eval(t);
            let dd = sub(p, self.center);
            let ang = dd[1].atan2(dd[0]);
            let mut diff = ang - phi;
            while diff > PI {
                diff -= 2.0 * PI;
            }
            while diff < -PI {
                diff += 2.0 * PI;
            }
            let rate = (dd[0] * d1[1] - dd[1] * d1[0]) / dot(dd, dd);
            let step = diff / rate;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let dd = sub(self.curve.point(t), self.center);
        (r / norm(dd), t)
    }

    fn radial_sums(&self, s: f64, t: f64, derivative: bool) -> (C64, C64, C64) {
        let x = 2.0 * s - 1.0;
        let nm = self.modes.len();
        let mut fm = vec![ZERO; nm];
        let mut dm = vec![ZERO; nm];
        let (mut t0, mut t1) = (1.0, x);
        let (mut u0, mut u1) = (0.0, 1.0); // U_{l−2}, U_{l−1}
        for l in 0..=self.lmax {
            let tl = if l == 0 { 1.0 } else { t1 };
            let dtl = if l == 0 { 0.0 } else { l as f64 * u1 };
            let row = &self.coeffs[l * nm..(l + 1) * nm];
            for q in 0..nm {
                fm[q] += row[q] * tl;
                if derivative {
                    dm[q] += row[q] * dtl;
                }
            }
            if l >= 1 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                let u2 = 2.0 * x * u1 - u0;
                u0 = u1;
                u1 = u2;
            }
        }
        let mut val = ZERO;
        let mut ds = ZERO;
        let mut dt = ZERO;
        for q in 0..nm {
            let m = self.modes[q] as f64;
            let e = C64::from_polar(1.0, m * t);
            val += fm[q] * e;
            if derivative {
                ds += dm[q] * e * 2.0;
                dt += fm[q] * e * C64::new(0.0, m);
            }
        }
        (val, ds, dt)
    }
}

impl Field for PolarInterpolant {
    fn value(&self, y: Point) -> C64 {
        let (s, t) = self.coordinates(y);
        self.radial_sums(s, t, false).0
    }

    fn gradient(&self, y: Point) -> [C64; 2] {
        let (s, t) = self.coordinates(y);
        if s < 1e-6 {
            let e = 1e-6;
            let fx = (self.value([y[0] + e, y[1]]) - self.value([y[0] - e, y[1]])) / (2.0 * e);
            let fy = (self.value([y[0], y[1] + e]) - self.value([y[0], y[1] - e])) / (2.0 * e);
            return [fx, fy];
        }
        let (_, ds, dt) = self.radial_sums(s, t, true);
        let (p, d1, _) = self.curve.eval(t);
        let d = sub(p, self.center);
        let tv = [s * d1[0], s * d1[1]];
        let det = d[0] * tv[1] - d[1] * tv[0];
        [(ds * tv[1] - dt * d[1]) / det, (dt * d[0] - ds * tv[0]) / det]
    }
}
