//! Smooth closed curves, their equispaced quadrature grids and polar area meshes.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// A 2π-periodic counter-clockwise parametrization of a closed curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCurve {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Kite,
    /// x_c(t) = Σₘ cos[c][m] cos(mt) + sin[c][m] sin(mt) for coordinate c.
    Fourier { cos: [Vec<f64>; 2], sin: [Vec<f64>; 2] },
}

impl BoundaryCurve {
    pub fn circle(radius: f64) -> Self {
        BoundaryCurve::Circle { radius }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        BoundaryCurve::Ellipse { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            BoundaryCurve::Circle { radius } => radius.is_finite() && *radius > 0.0,
            BoundaryCurve::Ellipse { a, b } => a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0,
            BoundaryCurve::Kite => true,
            BoundaryCurve::Fourier { cos, sin } => cos.iter().chain(sin.iter()).flatten().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid curve parameters: {self:?}")))
        }
    }

    /// Position and first two derivatives at parameter t.
    pub fn eval(&self, t: f64) -> (Point, Point, Point) {
        let (s, c) = t.sin_cos();
        match self {
            BoundaryCurve::Circle { radius: r } => ([r * c, r * s], [-r * s, r * c], [-r * c, -r * s]),
            BoundaryCurve::Ellipse { a, b } => ([a * c, b * s], [-a * s, b * c], [-a * c, -b * s]),
            BoundaryCurve::Kite => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    [c + 0.65 * c2 - 0.65, 1.5 * s],
                    [-s - 1.3 * s2, 1.5 * c],
                    [-c - 2.6 * c2, -1.5 * s],
                )
            }
            BoundaryCurve::Fourier { cos, sin } => {
                let mut x = [0.0; 2];
                let mut d1 = [0.0; 2];
                let mut d2 = [0.0; 2];
                for k in 0..2 {
                    let len = cos[k].len().max(sin[k].len());
                    for m in 0..len {
                        let a = cos[k].get(m).copied().unwrap_or(0.0);
                        let b = sin[k].get(m).copied().unwrap_or(0.0);
                        let mf = m as f64;
                        let (sm, cm) = (mf * t).sin_cos();
                        x[k] += a * cm + b * sm;
                        d1[k] += mf * (-a * sm + b * cm);
                        d2[k] -= mf * mf * (a * cm + b * sm);
                    }
                }
                (x, d1, d2)
            }
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.eval(t).0
    }

    /// Outward unit normal (x₂', −x₁')/|x'|.
    pub fn normal(&self, t: f64) -> Point {
        let d = self.eval(t).1;
        let s = norm(d);
        [d[1] / s, -d[0] / s]
    }

    /// Signed curvature, positive on convex arcs.
    pub fn curvature(&self, t: f64) -> f64 {
        let (_, d1, d2) = self.eval(t);
        cross(d1, d2) / norm(d1).powi(3)
    }

    /// Enclosed area via Green's theorem on an n-point trapezoid rule.
    pub fn area(&self, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|i| {
                let (x, d, _) = self.eval(i as f64 * h);
                0.5 * cross(x, d)
            })
            .sum::<f64>()
            * h
    }

    /// Area centroid via Green's theorem.
    pub fn centroid(&self, n: usize) -> Point {
        let h = 2.0 * PI / n as f64;
        let mut m = [0.0; 2];
        for i in 0..n {
            let (x, d, _) = self.eval(i as f64 * h);
            // ∫ x dA = ½∮ x² dy, ∫ y dA = −½∮ y² dx
            m[0] += 0.5 * x[0] * x[0] * d[1];
            m[1] -= 0.5 * x[1] * x[1] * d[0];
        }
        let a = self.area(n);
        [m[0] * h / a, m[1] * h / a]
    }

    /// Largest distance from the origin, sampled.
    pub fn bounding_radius(&self) -> f64 {
        (0..1024).map(|i| norm(self.point(2.0 * PI * i as f64 / 1024.0))).fold(0.0, f64::max)
    }
}

/// Equispaced trapezoid grid t_i = 2πi/N on a curve.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    pub curve: BoundaryCurve,
    pub n: usize,
    pub t: Vec<f64>,
    pub points: Vec<Point>,
    pub tangents: Vec<Point>,
    pub second: Vec<Point>,
    pub normals: Vec<Point>,
    pub speed: Vec<f64>,
    pub curvature: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Build the N-node grid. N must be even and at least 16.
pub fn make_grid(curve: &BoundaryCurve, n: usize) -> Result<BoundaryGrid> {
    if n % 2 != 0 || n < 16 {
        return Err(Error::Config(format!("grid size {n} must be even and at least 16")));
    }
    curve.validate()?;
    let grid = BoundaryGrid::build(curve, n);
    if grid.speed.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Geometry("vanishing speed at a grid node".into()));
    }
    if curve.area(n.max(256)) <= 0.0 {
        return Err(Error::Geometry("curve is not counter-clockwise".into()));
    }
    if grid.min_node_distance() <= 0.0 {
        return Err(Error::Geometry("curve is not injective at grid resolution".into()));
    }
    Ok(grid)
}

impl BoundaryGrid {
    pub(crate) fn build(curve: &BoundaryCurve, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut g = BoundaryGrid {
            curve: curve.clone(),
            n,
            t: Vec::with_capacity(n),
            points: Vec::with_capacity(n),
            tangents: Vec::with_capacity(n),
            second: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            speed: Vec::with_capacity(n),
            curvature: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
        };
        for i in 0..n {
            let t = i as f64 * h;
            let (x, d1, d2) = curve.eval(t);
            let s = norm(d1);
            g.t.push(t);
            g.points.push(x);
            g.tangents.push(d1);
            g.second.push(d2);
            g.normals.push([d1[1] / s, -d1[0] / s]);
            g.speed.push(s);
            g.curvature.push(cross(d1, d2) / (s * s * s));
            g.weights.push(h * s);
        }
        g
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Parameter step 2π/N.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Largest arclength spacing between neighbouring nodes.
    pub fn max_spacing(&self) -> f64 {
        self.speed.iter().fold(0.0, |a: f64, &s| a.max(s)) * self.step()
    }

    pub fn min_node_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                best = best.min(norm(sub(self.points[i], self.points[j])));
            }
        }
        best
    }

    /// Pairing Σ wᵢ aᵢ bᵢ (bilinear).
    pub fn pair<T>(&self, a: &[T], b: &[T]) -> T
    where
        T: Copy + std::ops::Mul<Output = T> + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.weights.iter().zip(a.iter().zip(b)).map(|(&w, (&x, &y))| x * y * w).sum()
    }

    /// Closest boundary parameter, distance and side (+1 outside, −1 inside).
    pub fn closest(&self, x: Point) -> (f64, f64, f64) {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        let mut t = self.t[best];
        for _ in 0..30 {
            let (p, d1, d2) = self.curve.eval(t);
            let r = sub(p, x);
            let g = dot(r, d1);
            let gp = dot(d1, d1) + dot(r, d2);
            if gp <= 0.0 {
                break;
            }
            let dt = (g / gp).clamp(-self.step(), self.step());
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (p, d1, _) = self.curve.eval(t);
        let r = sub(x, p);
        let dist = norm(r);
        if dist > 3.0 * self.max_spacing() {
            let side = if self.winding(x) { -1.0 } else { 1.0 };
            return (t, dist.min(bd.sqrt()), side);
        }
        let nu = [d1[1], -d1[0]];
        (t, dist, if dot(r, nu) > 0.0 { 1.0 } else { -1.0 })
    }

    /// Point-in-polygon test on the grid nodes.
    pub fn winding(&self, x: Point) -> bool {
        let mut inside = false;
        let n = self.n;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let xc = a[0] + (x[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if x[0] < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Tensor mesh over Ω through the map (s, t) ↦ c + s (x(t) − c), with
/// Gauss–Legendre nodes in s and the trapezoid rule in t.
#[derive(Clone, Debug)]
pub struct AreaMesh {
    pub curve: BoundaryCurve,
    pub center: Point,
    pub radial: usize,
    pub angular: usize,
    pub s: Vec<f64>,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Radial map Jacobian (x(t) − c) × x'(t); positive iff the ray is transversal.
pub fn cone_jacobian(curve: &BoundaryCurve, c: Point, t: f64) -> f64 {
    let (x, d1, _) = curve.eval(t);
    cross(sub(x, c), d1)
}

/// Check that every ray from c meets the curve once, sampled at `k` angles.
pub fn is_star_shaped(curve: &BoundaryCurve, c: Point, k: usize) -> bool {
    (0..k).all(|i| cone_jacobian(curve, c, 2.0 * PI * i as f64 / k as f64) > 0.0)
}

pub fn make_area_mesh(curve: &BoundaryCurve, radial: usize, angular: usize, center: Point) -> Result<AreaMesh> {
    if radial < 8 || angular < 8 {
        return Err(Error::Config("area mesh needs at least 8 radial and 8 angular nodes".into()));
    }
    curve.validate()?;
    if !is_star_shaped(curve, center, (4 * angular).max(1024)) {
        return Err(Error::Geometry(format!("curve is not star-shaped with respect to {center:?}")));
    }
    let (s, ws) = gauss_legendre_unit(radial);
    let h = 2.0 * PI / angular as f64;
    let mut nodes = Vec::with_capacity(radial * angular);
    let mut weights = Vec::with_capacity(radial * angular);
    for k in 0..angular {
        let t = k as f64 * h;
        let d = sub(curve.point(t), center);
        let jac = cone_jacobian(curve, center, t);
        for (sm, wm) in s.iter().zip(&ws) {
            nodes.push([center[0] + sm * d[0], center[1] + sm * d[1]]);
            weights.push(wm * sm * jac * h);
        }
    }
    Ok(AreaMesh { curve: curve.clone(), center, radial, angular, s, nodes, weights })
}

impl AreaMesh {
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A point from which `curve` is star-shaped: the centroid when it works,
/// otherwise the sampled candidate whose rays meet the curve least obliquely.
pub fn star_center(curve: &BoundaryCurve) -> Result<Point> {
    let c = curve.centroid(1024);
    if is_star_shaped(curve, c, 1024) {
        return Ok(c);
    }
    let probe = BoundaryGrid::build(curve, 256);
    let (lo, hi) = probe.points.iter().fold(([f64::MAX; 2], [f64::MIN; 2]), |(lo, hi), p| {
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    });
    let steps = 40;
    let mut best: Option<(f64, Point)> = None;
    for i in 1..steps {
        for j in 1..steps {
            let cand = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / steps as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / steps as f64,
            ];
            let margin = (0..probe.n)
                .map(|k| {
                    let d = sub(probe.points[k], cand);
                    cross(d, probe.tangents[k]) / (norm(d) * norm(probe.tangents[k]))
                })
                .fold(f64::MAX, f64::min);
            if margin > 0.0 && best.is_none_or(|(m, _)| margin > m) {
                best = Some((margin, cand));
            }
        }
    }
    match best {
        Some((_, c)) if is_star_shaped(curve, c, 1024) => Ok(c),
        _ => Err(Error::Geometry("curve is not star-shaped with respect to any sampled point".into())),
    }
}
