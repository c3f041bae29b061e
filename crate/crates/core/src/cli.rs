//! The `hlayers` command line: verify, solve, spectrum and converge.

use crate::error::{Error, Result};
use crate::fields::{Field, GridDensity, NegSchauderDensity};
use crate::geometry::{make_grid, star_center, BoundaryCurve, BoundaryGrid, Point};
use crate::identities::{self as id, CheckReport, Manufactured};
use crate::kernels::FundamentalSolution;
use crate::neumann::{solve_neumann, verify_neumann};
use crate::special::bessel_j;
use crate::C64;
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const CHECKS: [&str; 8] = [
    "delta_limit",
    "third_green",
    "representation",
    "slp_jumps",
    "dlp_jump",
    "dlp_normal_continuity",
    "quasi_symmetrization",
    "spectrum_wt",
];

pub fn default_tolerance(check: &str) -> f64 {
    match check {
        "delta_limit" | "spectrum_wt" => 1e-3,
        "dlp_jump" => 1e-5,
        "dlp_normal_continuity" => 1e-4,
        _ => 1e-6,
    }
}

/// Boundary data for `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// g = k J_m'(kR) cos mθ on a circle; exact solution J_m(kr) cos mθ.
    DiskMode { m: u32 },
    Constant { value: [f64; 2] },
    /// `index,re,im` rows; relative paths resolve against the config file.
    Csv { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: BoundaryCurve,
    pub lambda: [f64; 2],
    pub n: usize,
    /// Radial × angular size of volume meshes.
    pub mesh: [usize; 2],
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    /// Number of trigonometric test functions in weak-form checks.
    pub basis: usize,
    pub data: Option<DataSource>,
    pub eval_points: Option<Vec<Point>>,
    /// Smallest and largest N for `converge`.
    pub n_range: Option<[usize; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: BoundaryCurve::circle(1.5),
            lambda: [1.0, 0.0],
            n: 256,
            mesh: [64, 256],
            checks: CHECKS.iter().map(|s| s.to_string()).collect(),
            tolerances: BTreeMap::new(),
            seed: 0,
            basis: 5,
            data: None,
            eval_points: None,
            n_range: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.n < 16 || self.n % 2 != 0 {
            return Err(Error::Config(format!("N must be even and at least 16, got {}", self.n)));
        }
        if self.mesh.iter().any(|&m| m < 8) {
            return Err(Error::Config("mesh sizes must be at least 8".into()));
        }
        if !self.lambda.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("lambda must be finite".into()));
        }
        for c in &self.checks {
            if !CHECKS.contains(&c.as_str()) {
                return Err(Error::Config(format!("unknown check '{c}'")));
            }
        }
        for (c, t) in &self.tolerances {
            if !CHECKS.contains(&c.as_str()) && c != "neumann" {
                return Err(Error::Config(format!("tolerance for unknown check '{c}'")));
            }
            if !(t.is_finite() && *t >= 0.0) {
                return Err(Error::Config(format!("tolerance for '{c}' must be a non-negative number")));
            }
        }
        if self.basis == 0 {
            return Err(Error::Config("the test basis needs at least one function".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances.get(check).copied().unwrap_or_else(|| default_tolerance(check))
    }

    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda[0], self.lambda[1])
    }
}

#[derive(Parser, Debug)]
#[command(name = "hlayers", version, about = "Layer-potential identity checks and interior Neumann solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized test densities (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Golden report to compare against (runtime fields masked).
    #[arg(long, global = true)]
    pub compare: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Run the identity checks and write report.json.
    Verify,
    /// Solve an interior Neumann problem and write solution.csv and diagnostics.json.
    Solve,
    /// Write the spectrum of Wᵗ to spectrum.csv.
    Spectrum,
    /// Re-run checks under N-doubling and write converge.csv.
    Converge,
}

/// Exit code for an error: 2 configuration, 3 resonance, 4 compatibility, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resonance(_) => 3,
        Error::Compatibility(_) => 4,
        Error::Config(_) | Error::Domain(_) | Error::Geometry(_) | Error::Shape(_) | Error::Capacity | Error::Io(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let (mut cfg, base) = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HLAYERS_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("HLAYERS_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Config("HLAYERS_THREADS must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn execute(cli: &Cli) -> Result<i32> {
    let (cfg, base) = load_config(cli)?;
    let pool = thread_pool()?;
    std::fs::create_dir_all(&cli.out)?;
    pool.install(|| match cli.command {
        Command::Verify => cmd_verify(&cfg, &cli.out, cli.compare.as_deref()),
        Command::Solve => cmd_solve(&cfg, &base, &cli.out),
        Command::Spectrum => cmd_spectrum(&cfg, &cli.out),
        Command::Converge => cmd_converge(&cfg, &cli.out),
    })
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// A smooth random trigonometric density of degree 3, fixed by the seed.
pub fn random_density(grid: &Arc<BoundaryGrid>, seed: u64) -> GridDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = vec![];
    for m in 0..=3 {
        let scale = 1.0 / (1.0 + (m * m) as f64);
        let a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        let b = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        coef.push((a, b));
    }
    GridDensity::from_fn(grid, |t, _| {
        coef.iter().enumerate().map(|(m, (a, b))| a * (m as f64 * t).cos() + b * (m as f64 * t).sin()).sum()
    })
}

/// Runs one named check; `third_green` yields two reports.
pub fn run_check(cfg: &RunConfig, name: &str, grid: &Arc<BoundaryGrid>) -> Result<Vec<CheckReport>> {
    let lam = cfg.lambda();
    let fs = FundamentalSolution::planar(lam);
    let tol = cfg.tolerance(name);
    let curve = &cfg.geometry;
    let seed = cfg.seed;
    let one = |r: Result<CheckReport>| r.map(|r| vec![r]);
    match name {
        "delta_limit" => {
            let x = star_center(curve)?;
            let psi = id::Bump { center: [x[0] + 0.1, x[1] - 0.05], radius: 1.0 };
            one(id::check_delta_limit(&fs, x, &psi, &[1e-1, 1e-2, 1e-3], tol))
        }
        "third_green" => {
            let (inside, outside) = id::probe_points(curve)?;
            let kappa = [1.2 * 0.3f64.cos(), 1.2 * 0.3f64.sin()];
            [Manufactured::quadratic(), Manufactured::plane_wave(kappa)]
                .iter()
                .map(|u| id::check_third_green(&fs, curve, u, &inside, &outside, cfg.n, cfg.mesh, tol))
                .collect()
        }
        "representation" => {
            let (inside, outside) = id::probe_points(curve)?;
            one(id::check_representation(lam, &random_density(grid, seed), &inside, &outside, cfg.mesh, tol))
        }
        "slp_jumps" => {
            let tau = NegSchauderDensity::new(random_density(grid, seed.wrapping_add(1)), random_density(grid, seed.wrapping_add(2)))?;
            one(id::check_slp_jumps(&fs, &tau, &id::test_basis(grid, cfg.basis), tol))
        }
        "dlp_jump" => one(id::check_dlp_jump(&fs, &random_density(grid, seed.wrapping_add(3)), tol)),
        "dlp_normal_continuity" => one(id::check_dlp_normal_continuity(&fs, &random_density(grid, seed.wrapping_add(3)), tol)),
        "quasi_symmetrization" => {
            let eta = NegSchauderDensity::new(random_density(grid, seed.wrapping_add(4)), random_density(grid, seed.wrapping_add(5)))?;
            one(id::check_quasi_symmetrization(lam, &eta, 32, tol))
        }
        "spectrum_wt" => {
            let index = 40.min(grid.n);
            one(id::spectrum_wt(&fs, grid, index, 20, tol).map(|(_, r)| r))
        }
        other => Err(Error::Config(format!("unknown check '{other}'"))),
    }
}

fn run_checks(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let grid = Arc::new(make_grid(&cfg.geometry, cfg.n)?);
    let batches: Vec<Result<Vec<CheckReport>>> = cfg.checks.par_iter().map(|c| run_check(cfg, c, &grid)).collect();
    let mut out = vec![];
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

pub fn format_table(reports: &[CheckReport]) -> String {
    let mut s = format!("{:<28} {:>6} {:>12} {:>12} {:>10}  {}\n", "check", "N", "residual", "tolerance", "ms", "status");
    for r in reports {
        s.push_str(&format!(
            "{:<28} {:>6} {:>12.3e} {:>12.3e} {:>10.0}  {}\n",
            r.name,
            r.n,
            r.residual_max,
            r.tolerance,
            r.runtime_ms,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}

/// Differences between two report lists, runtime fields ignored.
pub fn compare_reports(got: &[CheckReport], golden: &[CheckReport]) -> Vec<String> {
    let mut diffs = vec![];
    if got.len() != golden.len() {
        diffs.push(format!("{} reports, golden has {}", got.len(), golden.len()));
    }
    for (a, b) in got.iter().zip(golden) {
        if a.masked() != b.masked() {
            diffs.push(format!("{} differs from golden {}", a.name, b.name));
        }
    }
    diffs
}

pub fn cmd_verify(cfg: &RunConfig, out: &Path, compare: Option<&Path>) -> Result<i32> {
    let reports = run_checks(cfg)?;
    let json = serde_json::to_string_pretty(&reports)?;
    write_atomic(&out.join("report.json"), json.as_bytes())?;
    print!("{}", format_table(&reports));
    let mut code = if reports.iter().all(|r| r.pass) { 0 } else { 1 };
    if let Some(golden) = compare {
        let text = std::fs::read_to_string(golden)?;
        let gold: Vec<CheckReport> = serde_json::from_str(&text)?;
        let diffs = compare_reports(&reports, &gold);
        if diffs.is_empty() {
            println!("matches {}", golden.display());
        } else {
            for d in &diffs {
                eprintln!("mismatch: {d}");
            }
            code = 1;
        }
    }
    Ok(code)
}

struct DiskMode {
    k: C64,
    m: u32,
}

impl Field for DiskMode {
    fn value(&self, x: Point) -> C64 {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        bessel_j(self.m, self.k * r).unwrap_or(C64::new(f64::NAN, 0.0)) * (self.m as f64 * th).cos()
    }
    fn gradient(&self, _: Point) -> [C64; 2] {
        [C64::new(f64::NAN, f64::NAN); 2]
    }
}

/// Boundary data for a preset, with the exact solution when one is known.
pub fn preset_data(cfg: &RunConfig, grid: &Arc<BoundaryGrid>, base: &Path) -> Result<(GridDensity, Option<Box<dyn Field>>)> {
    match cfg.data.as_ref().ok_or_else(|| Error::Config("solve needs a 'data' entry".into()))? {
        DataSource::DiskMode { m } => {
            let BoundaryCurve::Circle { radius } = cfg.geometry else {
                return Err(Error::Config("disk_mode data needs a circle".into()));
            };
            let fs = FundamentalSolution::planar(cfg.lambda());
            let k = fs.wavenumber();
            let z = k * radius;
            let djm = if *m == 0 { -bessel_j(1, z)? } else { (bessel_j(m - 1, z)? - bessel_j(m + 1, z)?) / 2.0 };
            let g = GridDensity::from_fn(grid, |t, _| k * djm * (*m as f64 * t).cos());
            Ok((g, Some(Box::new(DiskMode { k, m: *m }))))
        }
        DataSource::Constant { value } => Ok((GridDensity::constant(grid, C64::new(value[0], value[1])), None)),
        DataSource::Csv { path } => {
            let p = if path.is_absolute() { path.clone() } else { base.join(path) };
            Ok((GridDensity::read_csv(grid, &p)?, None))
        }
    }
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    condition: f64,
    solve_residual: f64,
    report: &'a CheckReport,
}

pub fn cmd_solve(cfg: &RunConfig, base: &Path, out: &Path) -> Result<i32> {
    let grid = Arc::new(make_grid(&cfg.geometry, cfg.n)?);
    let (g, exact) = preset_data(cfg, &grid, base)?;
    let fs = FundamentalSolution::planar(cfg.lambda());
    let data = NegSchauderDensity::from_function(g);
    let sol = solve_neumann(&fs, &data)?;
    let samples = match &cfg.eval_points {
        Some(p) => p.clone(),
        None => match cfg.geometry {
            BoundaryCurve::Circle { radius } => (0..16)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 16.0;
                    [0.5 * radius * t.cos(), 0.5 * radius * t.sin()]
                })
                .collect(),
            _ => id::probe_points(&cfg.geometry)?.0,
        },
    };
    let report = verify_neumann(&sol, &data, &id::test_basis(&grid, cfg.basis), exact.as_deref(), &samples, 1e-3, cfg.tolerance("neumann"))?;
    let mut csv = String::from("x,y,re,im,exact_re,exact_im,abs_error\n");
    for &x in &samples {
        let u = sol.value(x);
        match &exact {
            Some(e) => {
                let v = e.value(x);
                csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n", x[0], x[1], u.re, u.im, v.re, v.im, (u - v).norm()));
            }
            None => csv.push_str(&format!("{:e},{:e},{:e},{:e},,,\n", x[0], x[1], u.re, u.im)),
        }
    }
    write_atomic(&out.join("solution.csv"), csv.as_bytes())?;
    write_atomic(&out.join("tau.csv"), sol.tau.to_csv().as_bytes())?;
    let diag = Diagnostics { condition: sol.condition, solve_residual: sol.solve_residual, report: &report };
    write_atomic(&out.join("diagnostics.json"), serde_json::to_string_pretty(&diag)?.as_bytes())?;
    print!("{}", format_table(std::slice::from_ref(&report)));
    Ok(if report.pass { 0 } else { 1 })
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let grid = Arc::new(make_grid(&cfg.geometry, cfg.n)?);
    let fs = FundamentalSolution::planar(cfg.lambda());
    let (spec, report) = id::spectrum_wt(&fs, &grid, 40.min(grid.n), 20, cfg.tolerance("spectrum_wt"))?;
    let radius = match cfg.geometry {
        BoundaryCurve::Circle { radius } => Some(radius),
        _ => None,
    };
    let oracle = match radius {
        Some(r) => Some(id::disk_wt_oracle(cfg.lambda(), r, grid.n)?),
        None => None,
    };
    let mut csv = String::from("index,sigma,smoothed,eig_re,eig_im");
    csv.push_str(if oracle.is_some() { ",oracle\n" } else { "\n" });
    for i in 0..grid.n {
        let e = spec.eigenvalues[i];
        csv.push_str(&format!("{},{:e},{:e},{:e},{:e}", i + 1, spec.singular_values[i], spec.smoothed[i], e.re, e.im));
        match &oracle {
            Some(o) => csv.push_str(&format!(",{:e}\n", o[i])),
            None => csv.push('\n'),
        }
    }
    write_atomic(&out.join("spectrum.csv"), csv.as_bytes())?;
    if let Some(r) = radius {
        let wt = crate::boundary_ops::assemble_wt(&fs, &grid);
        let mut modes = String::from("m,re,im,oracle_re,oracle_im,abs_error\n");
        for m in 0..=grid.n / 2 {
            let e: Vec<C64> = grid.t.iter().map(|&t| C64::from_polar(1.0, m as f64 * t)).collect();
            let a = wt.apply(&e);
            let q: C64 = a.iter().zip(&e).map(|(x, y)| x * y.conj()).sum::<C64>() / grid.n as f64;
            let o = id::disk_wt_eigenvalue(cfg.lambda(), r, m as u32)?;
            modes.push_str(&format!("{m},{:e},{:e},{:e},{:e},{:e}\n", q.re, q.im, o.re, o.im, (q - o).norm()));
        }
        write_atomic(&out.join("modes.csv"), modes.as_bytes())?;
    }
    write_atomic(&out.join("report.json"), serde_json::to_string_pretty(&[&report])?.as_bytes())?;
    print!("{}", format_table(std::slice::from_ref(&report)));
    Ok(0)
}

pub fn cmd_converge(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let [lo, hi] = cfg.n_range.ok_or_else(|| Error::Config("converge needs 'n_range'".into()))?;
    if lo < 16 || lo % 2 != 0 || lo > hi {
        return Err(Error::Config(format!("empty or invalid N range [{lo}, {hi}]")));
    }
    let mut ns = vec![];
    let mut n = lo;
    while n <= hi {
        ns.push(n);
        n *= 2;
    }
    let mut csv = String::from("check,n,residual_max,residual_l2\n");
    let mut all = vec![];
    for &n in &ns {
        let c = RunConfig { n, ..cfg.clone() };
        let reports = run_checks(&c)?;
        for r in &reports {
            csv.push_str(&format!("{},{},{:e},{:e}\n", r.name, r.n, r.residual_max, r.residual_l2));
        }
        all.extend(reports);
    }
    write_atomic(&out.join("converge.csv"), csv.as_bytes())?;
    print!("{}", format_table(&all));
    Ok(0)
}
