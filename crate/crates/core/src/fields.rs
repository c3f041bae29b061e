//! Grid-level representatives of boundary densities, negative-order boundary
//! data, negative-exponent volume fields, and the bilinear pairings between them.

use crate::boundary_ops::SteklovPoincare;
use crate::error::{Error, Result};
use crate::geometry::{AreaMesh, BoundaryGrid, Point};
use num_complex::Complex64 as C64;
use std::path::Path;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A function that can be evaluated, with its gradient, at points of the plane.
pub trait Field: Send + Sync {
    fn value(&self, x: Point) -> C64;
    fn gradient(&self, x: Point) -> [C64; 2];
}

/// A field given by closures for the value and the gradient.
pub struct FnField<F, G> {
    value: F,
    gradient: G,
}

impl<F, G> FnField<F, G>
where
    F: Fn(Point) -> C64 + Send + Sync,
    G: Fn(Point) -> [C64; 2] + Send + Sync,
{
    pub fn new(value: F, gradient: G) -> Self {
        FnField { value, gradient }
    }
}

impl<F, G> Field for FnField<F, G>
where
    F: Fn(Point) -> C64 + Send + Sync,
    G: Fn(Point) -> [C64; 2] + Send + Sync,
{
    fn value(&self, x: Point) -> C64 {
        (self.value)(x)
    }
    fn gradient(&self, x: Point) -> [C64; 2] {
        (self.gradient)(x)
    }
}

pub fn constant_field(c: C64) -> Arc<dyn Field> {
    Arc::new(FnField::new(move |_| c, |_| [ZERO, ZERO]))
}

/// A field plus a constant.
pub struct Shifted {
    pub inner: Arc<dyn Field>,
    pub shift: C64,
}

impl Field for Shifted {
    fn value(&self, x: Point) -> C64 {
        self.inner.value(x) + self.shift
    }
    fn gradient(&self, x: Point) -> [C64; 2] {
        self.inner.gradient(x)
    }
}

/// Node values of a boundary density.
#[derive(Clone, Debug)]
pub struct GridDensity {
    pub grid: Arc<BoundaryGrid>,
    pub values: Vec<C64>,
}

impl GridDensity {
    pub fn new(grid: Arc<BoundaryGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Shape(format!("{} values on a {}-node grid", values.len(), grid.n)));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Shape("non-finite density value".into()));
        }
        Ok(GridDensity { grid, values })
    }

    /// Samples f(t, x(t)) at the nodes.
    pub fn from_fn(grid: &Arc<BoundaryGrid>, f: impl Fn(f64, Point) -> C64) -> Self {
        let values = grid.t.iter().zip(&grid.points).map(|(&t, &p)| f(t, p)).collect();
        GridDensity { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Arc<BoundaryGrid>) -> Self {
        GridDensity { grid: grid.clone(), values: vec![ZERO; grid.n] }
    }

    pub fn constant(grid: &Arc<BoundaryGrid>, c: C64) -> Self {
        GridDensity { grid: grid.clone(), values: vec![c; grid.n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n);
        GridDensity { grid: self.grid.clone(), values }
    }

    /// ∫ τ dσ.
    pub fn integral(&self) -> C64 {
        self.values.iter().zip(&self.grid.weights).map(|(v, w)| v * w).sum()
    }

    /// Bilinear pairing ∫ a b dσ.
    pub fn pair(&self, other: &GridDensity) -> Result<C64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self.grid.pair(&self.values, &other.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// Reads `index,re,im` rows; lines starting with a letter or '#' are skipped.
    pub fn read_csv(grid: &Arc<BoundaryGrid>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = vec![None; grid.n];
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("line {}: {e}", ln + 1)));
            if cols.len() < 2 {
                return Err(Error::Config(format!("line {}: expected index,re[,im]", ln + 1)));
            }
            let idx: usize = cols[0].parse().map_err(|e| Error::Config(format!("line {}: {e}", ln + 1)))?;
            let re = parse(cols[1])?;
            let im = if cols.len() > 2 { parse(cols[2])? } else { 0.0 };
            if idx >= grid.n {
                return Err(Error::Shape(format!("node index {idx} outside a {}-node grid", grid.n)));
            }
            values[idx] = Some(C64::new(re, im));
        }
        let values: Option<Vec<C64>> = values.into_iter().collect();
        let values = values.ok_or_else(|| Error::Shape("density file does not cover every node".into()))?;
        GridDensity::new(grid.clone(), values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{:e},{:e}\n", v.re, v.im));
        }
        out
    }
}

pub(crate) fn same_grid(a: &Arc<BoundaryGrid>, b: &Arc<BoundaryGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.n == b.n && a.curve == b.curve) {
        Ok(())
    } else {
        Err(Error::Shape("densities live on different grids".into()))
    }
}

/// τ = μ₀ + Sᵗ[μ₁], carried as the pair (μ₀, μ₁).
#[derive(Clone, Debug)]
pub struct NegSchauderDensity {
    pub mu0: GridDensity,
    pub mu1: GridDensity,
}

impl NegSchauderDensity {
    pub fn new(mu0: GridDensity, mu1: GridDensity) -> Result<Self> {
        same_grid(&mu0.grid, &mu1.grid)?;
        Ok(NegSchauderDensity { mu0, mu1 })
    }

    pub fn from_function(mu0: GridDensity) -> Self {
        let mu1 = GridDensity::zeros(&mu0.grid);
        NegSchauderDensity { mu0, mu1 }
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.mu0.grid
    }

    pub fn has_distributional_part(&self) -> bool {
        self.mu1.values.iter().any(|v| *v != ZERO)
    }

    /// Node values of μ₀ + Sᵗμ₁.
    pub fn materialize(&self, dtn: &SteklovPoincare) -> Result<GridDensity> {
        if !self.has_distributional_part() {
            return Ok(self.mu0.clone());
        }
        same_grid(self.grid(), dtn.grid())?;
        let st = dtn.apply_transpose(&self.mu1.values);
        Ok(self.mu0.with_values(self.mu0.values.iter().zip(&st).map(|(a, b)| a + b).collect()))
    }
}

/// ⟨τ, v⟩ = ∫ μ₀ v dσ + ∫ μ₁ S[v] dσ.
pub fn pair_tau(tau: &NegSchauderDensity, v: &GridDensity, ops: Option<&SteklovPoincare>) -> Result<C64> {
    same_grid(tau.grid(), &v.grid)?;
    let mut total = tau.mu0.pair(v)?;
    if tau.has_distributional_part() {
        let dtn = ops.ok_or_else(|| Error::State("Steklov–Poincaré operator required for a distributional pairing".into()))?;
        same_grid(tau.grid(), dtn.grid())?;
        let sv = dtn.apply(&v.values);
        total += tau.grid().pair(&tau.mu1.values, &sv);
    }
    Ok(total)
}

/// f = f₀ + ∂₁f₁ + ∂₂f₂ with components sampled on an area mesh and the
/// traces of f₁, f₂ sampled on a boundary grid.
#[derive(Clone)]
pub struct NegExponentField {
    pub mesh: Arc<AreaMesh>,
    pub grid: Arc<BoundaryGrid>,
    pub components: [Vec<C64>; 3],
    pub traces: [Vec<C64>; 2],
}

impl NegExponentField {
    pub fn new(
        mesh: Arc<AreaMesh>,
        grid: Arc<BoundaryGrid>,
        components: [Vec<C64>; 3],
        traces: [Vec<C64>; 2],
    ) -> Result<Self> {
        if components.iter().any(|c| c.len() != mesh.len()) {
            return Err(Error::Shape("component length differs from the mesh size".into()));
        }
        if traces.iter().any(|t| t.len() != grid.n) {
            return Err(Error::Shape("trace length differs from the grid size".into()));
        }
        Ok(NegExponentField { mesh, grid, components, traces })
    }

    pub fn zero(mesh: Arc<AreaMesh>, grid: Arc<BoundaryGrid>) -> Self {
        let m = mesh.len();
        let n = grid.n;
        NegExponentField { mesh, grid, components: [vec![ZERO; m], vec![ZERO; m], vec![ZERO; m]], traces: [vec![ZERO; n], vec![ZERO; n]] }
    }

    /// Samples the given component fields; missing components are zero.
    pub fn sample(mesh: Arc<AreaMesh>, grid: Arc<BoundaryGrid>, parts: [Option<&dyn Field>; 3]) -> Self {
        let on_mesh = |f: Option<&dyn Field>| -> Vec<C64> {
            match f {
                Some(f) => mesh.nodes.iter().map(|&y| f.value(y)).collect(),
                None => vec![ZERO; mesh.len()],
            }
        };
        let on_grid = |f: Option<&dyn Field>| -> Vec<C64> {
            match f {
                Some(f) => grid.points.iter().map(|&y| f.value(y)).collect(),
                None => vec![ZERO; grid.n],
            }
        };
        let components = [on_mesh(parts[0]), on_mesh(parts[1]), on_mesh(parts[2])];
        let traces = [on_grid(parts[1]), on_grid(parts[2])];
        NegExponentField { mesh, grid, components, traces }
    }

    /// Only an f₀ part.
    pub fn from_values(mesh: Arc<AreaMesh>, grid: Arc<BoundaryGrid>, f0: Vec<C64>) -> Result<Self> {
        let mut f = NegExponentField::zero(mesh, grid);
        if f0.len() != f.mesh.len() {
            return Err(Error::Shape("component length differs from the mesh size".into()));
        }
        f.components[0] = f0;
        Ok(f)
    }

    fn has_divergence_part(&self) -> bool {
        self.components[1..].iter().flatten().any(|v| *v != ZERO)
            || self.traces.iter().flatten().any(|v| *v != ZERO)
    }
}

/// A function on Ω̄ with optional boundary trace and optional Δu.
#[derive(Clone)]
pub struct InteriorFunction {
    pub field: Arc<dyn Field>,
    pub trace: Option<GridDensity>,
    pub laplacian: Option<NegExponentField>,
}

impl InteriorFunction {
    pub fn new(field: Arc<dyn Field>) -> Self {
        InteriorFunction { field, trace: None, laplacian: None }
    }

    pub fn with_trace(mut self, trace: GridDensity) -> Self {
        self.trace = Some(trace);
        self
    }

    pub fn with_laplacian(mut self, laplacian: NegExponentField) -> Self {
        self.laplacian = Some(laplacian);
        self
    }

    /// Boundary values on `grid`: the stored trace, or the field at the nodes.
    pub fn trace_on(&self, grid: &Arc<BoundaryGrid>) -> Result<Vec<C64>> {
        match &self.trace {
            Some(t) => {
                same_grid(&t.grid, grid)?;
                Ok(t.values.clone())
            }
            None => Ok(grid.points.iter().map(|&p| self.field.value(p)).collect()),
        }
    }
}

/// ⟨E♯f, v⟩ = ∫_Ω f₀v + ∫_∂Ω Σⱼ νⱼ fⱼ v − Σⱼ ∫_Ω fⱼ ∂ⱼv.
pub fn pair_sharp(f: &NegExponentField, v: &InteriorFunction) -> Result<C64> {
    let mesh = &f.mesh;
    let divergence = f.has_divergence_part();
    let mut vol = ZERO;
    for (k, (&y, &w)) in mesh.nodes.iter().zip(&mesh.weights).enumerate() {
        let mut integrand = f.components[0][k] * v.field.value(y);
        if divergence {
            let g = v.field.gradient(y);
            integrand -= f.components[1][k] * g[0] + f.components[2][k] * g[1];
        }
        vol += integrand * w;
    }
    if !divergence {
        return Ok(vol);
    }
    let trace = v.trace_on(&f.grid)?;
    let grid = &f.grid;
    let bnd: C64 = (0..grid.n)
        .map(|i| {
            let nu = grid.normals[i];
            (f.traces[0][i] * nu[0] + f.traces[1][i] * nu[1]) * trace[i] * grid.weights[i]
        })
        .sum();
    Ok(vol + bnd)
}
