//! Interior Neumann problem for Δ + λ through the single-layer ansatz
//! u = v⁺[τ], (−½I + Wᵗ_λ)τ = g.

use crate::boundary_ops::{assemble_v, assemble_wt, condition_1, steklov_poincare};
use crate::error::{Error, Result};
use crate::fields::{pair_tau, Field, GridDensity, NegSchauderDensity};
use crate::geometry::{BoundaryCurve, Point};
use crate::identities::{interior_single_layer, CheckReport};
use crate::kernels::FundamentalSolution;
use crate::potentials::LayerPotential;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::time::Instant;

pub const RESONANCE_CONDITION_LIMIT: f64 = 1e10;
/// Relative bound on |∫g| for λ = 0.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;

pub struct NeumannSolution {
    pub kernel: FundamentalSolution,
    pub tau: GridDensity,
    /// Node values of the data actually solved for.
    pub data: GridDensity,
    pub potential: LayerPotential,
    /// Additive constant; nonzero only for λ = 0 (zero boundary mean).
    pub constant: C64,
    pub condition: f64,
    /// max |(−½I + Wᵗ)τ − g| over the nodes.
    pub solve_residual: f64,
}

impl Field for NeumannSolution {
    fn value(&self, x: Point) -> C64 {
        self.potential.value(x) + self.constant
    }
    fn gradient(&self, x: Point) -> [C64; 2] {
        self.potential.gradient(x)
    }
}

impl NeumannSolution {
    pub fn curve(&self) -> &BoundaryCurve {
        &self.tau.grid.curve
    }
}

/// Solves (−½I + Wᵗ_λ)τ = g densely on the grid of `g`.
pub fn solve_neumann(fs: &FundamentalSolution, g: &NegSchauderDensity) -> Result<NeumannSolution> {
    let grid = g.grid().clone();
    let data = if g.has_distributional_part() {
        g.materialize(&steklov_poincare(&grid)?)?
    } else {
        g.mu0.clone()
    };
    let n = grid.n;
    let a = assemble_wt(fs, &grid).shifted(-0.5).matrix;
    let (tau, condition) = if fs.is_laplace() {
        let flux = data.integral();
        let scale = data.values.iter().zip(&grid.weights).map(|(v, w)| v.norm() * w).sum::<f64>().max(1.0);
        if flux.norm() > COMPATIBILITY_TOLERANCE * scale {
            return Err(Error::Compatibility(flux.norm()));
        }
        // the kernel of −½I + Wᵗ₀ is the equilibrium density; ∫τ = 0 removes it
        let mut b = DMatrix::from_element(n + 1, n + 1, C64::new(0.0, 0.0));
        b.view_mut((0, 0), (n, n)).copy_from(&a);
        for i in 0..n {
            b[(i, n)] = C64::new(1.0, 0.0);
            b[(n, i)] = C64::new(grid.weights[i], 0.0);
        }
        let inv = b.clone().lu().try_inverse().ok_or(Error::Resonance(f64::INFINITY))?;
        let cond = condition_1(&b, &inv);
        check_condition(cond)?;
        let mut rhs = DVector::from_element(n + 1, C64::new(0.0, 0.0));
        rhs.rows_mut(0, n).copy_from_slice(&data.values);
        let x = inv * rhs;
        (x.rows(0, n).iter().copied().collect::<Vec<_>>(), cond)
    } else {
        let inv = a.clone().lu().try_inverse().ok_or(Error::Resonance(f64::INFINITY))?;
        let cond = condition_1(&a, &inv);
        check_condition(cond)?;
        let x = inv * DVector::from_column_slice(&data.values);
        (x.iter().copied().collect(), cond)
    };
    let at = &a * DVector::from_column_slice(&tau);
    let solve_residual = at.iter().zip(&data.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let tau = data.with_values(tau);
    let constant = if fs.is_laplace() {
        let trace = assemble_v(fs, &grid).apply(&tau.values);
        -grid.pair(&trace, &vec![C64::new(1.0, 0.0); n]) / grid.length()
    } else {
        C64::new(0.0, 0.0)
    };
    let potential = LayerPotential::single(*fs, &tau);
    Ok(NeumannSolution { kernel: *fs, tau, data, potential, constant, condition, solve_residual })
}

fn check_condition(cond: f64) -> Result<()> {
    if !cond.is_finite() || cond > RESONANCE_CONDITION_LIMIT {
        Err(Error::Resonance(cond))
    } else {
        Ok(())
    }
}

/// Weak Neumann residual max_k |⟨∂_ν u, v_k⟩ − ⟨g, v_k⟩|, a five-point
/// (Δ + λ)u residual at `samples` (reported only), and the relative error
/// against `exact` at `samples` when given. The step of the stencil is `h`.
pub fn verify_neumann(
    sol: &NeumannSolution,
    g: &NegSchauderDensity,
    basis: &[GridDensity],
    exact: Option<&dyn Field>,
    samples: &[Point],
    h: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let fs = &sol.kernel;
    let grid = sol.tau.grid.clone();
    let dtn = steklov_poincare(&grid)?;
    let u = interior_single_layer(fs, &sol.tau)?;
    let mut weak = 0.0f64;
    for v in basis {
        let lhs = crate::boundary_ops::dist_normal_derivative(&u, v, &dtn)?;
        let rhs = pair_tau(g, v, Some(&dtn))?;
        weak = weak.max((lhs - rhs).norm());
    }
    let lam = fs.lambda();
    let mut pde = 0.0f64;
    let mut vals = Vec::with_capacity(samples.len());
    for &x in samples {
        let at = |dx: f64, dy: f64| sol.potential.value_at([x[0] + dx, x[1] + dy]);
        let c = at(0.0, 0.0)?;
        let lap = (at(h, 0.0)? + at(-h, 0.0)? + at(0.0, h)? + at(0.0, -h)? - 4.0 * c) / (h * h);
        pde = pde.max((lap + lam * c).norm());
        vals.push(c + sol.constant);
    }
    let mut residuals = vec![weak];
    let mut details = BTreeMap::new();
    details.insert("weak".into(), weak);
    details.insert("pde".into(), pde);
    details.insert("condition".into(), sol.condition);
    details.insert("solve_residual".into(), sol.solve_residual);
    if let Some(ex) = exact {
        let e: Vec<C64> = samples.iter().map(|&x| ex.value(x)).collect();
        let scale = e.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let err = vals.iter().zip(&e).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        details.insert("error".into(), err);
        residuals.push(err);
    }
    Ok(CheckReport::build("neumann", &grid.curve, lam, grid.n, Some([32, grid.n]), &residuals, tolerance, start, details))
}
