//! Residual minimization for discrete Yang-Mills connections.
//!
//! The unknowns are the `6 N M` su(2) coordinates of a connection, ordered
//! `(k, s, edge, basis)` with `k` slowest. Iterates are built from
//! coordinates, so every iterate is su(2)-valued without projection. The
//! objective is the Frobenius norm of the residual, with a finite-difference
//! gradient and a line-search descent along steepest-descent or L-BFGS
//! directions.
//!
//! Near its zero set the objective is flat to fourth order or more in many
//! directions (non-commuting constant connections make the residual cubic),
//! so steepest descent slows to a sublinear crawl; L-BFGS is the default.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cochain::TorusGrid;
use crate::error::{Error, Result};
use crate::exterior::norm_sq;
use crate::yang_mills::{Connection, Equation};

/// Steps below this size count as a stalled line search.
pub const MIN_STEP: f64 = 1e-16;

/// Starting connection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitSpec {
    Zero,
    Random { scale: f64, seed: u64 },
    File { path: PathBuf },
}

/// Step-size rule for the descent loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepRule {
    Fixed {
        step: f64,
    },
    /// Armijo backtracking. L-BFGS searches start at `initial`; steepest
    /// descent starts from the previous accepted step divided by `shrink`,
    /// capped at `initial`.
    Backtracking {
        initial: f64,
        shrink: f64,
        sufficient_decrease: f64,
    },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking {
            initial: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

/// Search direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Direction {
    Steepest,
    /// Limited-memory BFGS over the last `memory` steps.
    Lbfgs { memory: usize },
}

impl Default for Direction {
    fn default() -> Self {
        Direction::Lbfgs { memory: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    #[serde(default)]
    pub equation: Equation,
    pub init: InitSpec,
    #[serde(default)]
    pub step: StepRule,
    #[serde(default)]
    pub direction: Direction,
    /// `None` selects `1e-6 · max(1, ‖A‖∞)` at each iterate.
    #[serde(default)]
    pub fd_step: Option<f64>,
    pub tol_residual: f64,
    pub max_iters: usize,
    /// Evaluate gradient entries on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

impl SolverConfig {
    /// Defaults: `δ_A F = 0`, Armijo backtracking along L-BFGS directions,
    /// tolerance `1e-10`, 5000 iterations.
    pub fn new(grid: TorusGrid, init: InitSpec) -> Self {
        SolverConfig {
            grid,
            equation: Equation::default(),
            init,
            step: StepRule::default(),
            direction: Direction::default(),
            fd_step: None,
            tol_residual: 1e-10,
            max_iters: 5000,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let InitSpec::Random { scale, .. } = self.init {
            if !(scale > 0.0 && scale.is_finite()) {
                return bad(format!("init scale must be positive, got {scale}"));
            }
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("fd_step must be positive, got {h}"));
            }
        }
        if self.direction == (Direction::Lbfgs { memory: 0 }) {
            return bad("L-BFGS memory must be at least 1".into());
        }
        if !(self.tol_residual > 0.0 && self.tol_residual.is_finite()) {
            return bad(format!("tol_residual must be positive, got {}", self.tol_residual));
        }
        match self.step {
            StepRule::Fixed { step } if !(step > 0.0 && step.is_finite()) => {
                bad(format!("fixed step must be positive, got {step}"))
            }
            StepRule::Backtracking {
                initial,
                shrink,
                sufficient_decrease,
            } => {
                if !(initial > 0.0 && initial.is_finite()) {
                    bad(format!("initial step must be positive, got {initial}"))
                } else if !(shrink > 0.0 && shrink < 1.0) {
                    bad(format!("shrink must lie in (0, 1), got {shrink}"))
                } else if !(sufficient_decrease > 0.0 && sufficient_decrease < 1.0) {
                    bad(format!("sufficient_decrease must lie in (0, 1), got {sufficient_decrease}"))
                } else {
                    Ok(())
                }
            }
            StepRule::Fixed { .. } => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SolverConfig = serde_json::from_str(text).map_err(|e| Error::from_json("solver config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn initial_connection(&self) -> Result<Connection> {
        match &self.init {
            InitSpec::Zero => Ok(Connection::zero(self.grid)),
            InitSpec::Random { scale, seed } => Ok(Connection::random(self.grid, *scale, *seed)),
            InitSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let a = Connection::from_json(&text)?;
                if a.grid() != self.grid {
                    return Err(Error::GridMismatch {
                        expected: self.grid.to_string(),
                        found: a.grid().to_string(),
                    });
                }
                Ok(a)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Converged,
    IterLimit,
    Stalled,
}

/// One row of the trace: the state at the start of `iter` and the step
/// taken from it (0 on the final row).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    pub status: SolverStatus,
}

impl SolverTrace {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    /// Number of descent steps taken.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    /// CSV with header `iter,objective,grad_norm,step`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,grad_norm,step\n");
        for r in &self.records {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.iter, r.objective, r.grad_norm, r.step).unwrap();
        }
        out
    }
}

/// Squared residual norm `Σ ½‖R‖²_F` of the selected equation.
pub fn objective(a: &Connection, eq: Equation) -> f64 {
    norm_sq(&eq.residual(a))
}

/// `1e-6 · max(1, ‖A‖∞)` over the coordinates.
pub fn default_fd_step(params: &[f64]) -> f64 {
    1e-6 * params.iter().fold(1.0f64, |m, p| m.max(p.abs()))
}

fn objective_at(grid: TorusGrid, params: &[f64], eq: Equation) -> f64 {
    objective(&Connection::from_params(grid, params).expect("parameter length"), eq)
}

fn fd_entry(grid: TorusGrid, params: &[f64], eq: Equation, h: f64, i: usize, central: bool) -> f64 {
    let mut p = params.to_vec();
    p[i] = params[i] + h;
    let plus = objective_at(grid, &p, eq);
    if central {
        p[i] = params[i] - h;
        (plus - objective_at(grid, &p, eq)) / (2.0 * h)
    } else {
        (plus - objective_at(grid, params, eq)) / h
    }
}

fn gradient_impl(a: &Connection, eq: Equation, h: f64, central: bool, parallel: bool) -> Vec<f64> {
    let grid = a.grid();
    let params = a.to_params();
    let entry = |i| fd_entry(grid, &params, eq, h, i, central);
    // Entries are independent, so thread count cannot change any bit.
    if parallel {
        (0..params.len()).into_par_iter().map(entry).collect()
    } else {
        (0..params.len()).map(entry).collect()
    }
}

/// Central-difference gradient of [`objective`] over the coordinates.
pub fn gradient_fd(a: &Connection, eq: Equation, h: f64) -> Vec<f64> {
    gradient_impl(a, eq, h, true, false)
}

/// [`gradient_fd`] with entries evaluated on the rayon pool.
pub fn gradient_fd_parallel(a: &Connection, eq: Equation, h: f64) -> Vec<f64> {
    gradient_impl(a, eq, h, true, true)
}

/// Forward-difference gradient, an independent scheme for cross-checks.
pub fn gradient_forward(a: &Connection, eq: Equation, h: f64) -> Vec<f64> {
    gradient_impl(a, eq, h, false, false)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS curvature pairs `(s, y)`, oldest first.
struct History {
    memory: usize,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl History {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if dot(&s, &y) <= 0.0 {
            self.pairs.clear();
            return;
        }
        if self.pairs.len() == self.memory {
            self.pairs.remove(0);
        }
        self.pairs.push((s, y));
    }

    /// Two-loop recursion: `-H g`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y) in self.pairs.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push((a, rho));
        }
        if let Some((s, y)) = self.pairs.last() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y), (a, rho)) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter().map(|v| -v).collect()
    }
}

/// Armijo backtracking from `t`; `None` once the step underflows.
fn backtrack(
    mut t: f64,
    shrink: f64,
    c1: f64,
    f: f64,
    slope: f64,
    eval: impl Fn(f64) -> (Vec<f64>, f64),
) -> Option<(Vec<f64>, f64, f64)> {
    while t >= MIN_STEP {
        let (cand, fc) = eval(t);
        if fc <= f + c1 * t * slope {
            return Some((cand, fc, t));
        }
        t *= shrink;
    }
    None
}

/// Runs the descent loop from the configured start.
pub fn solve(config: &SolverConfig) -> Result<(Connection, SolverTrace)> {
    config.validate()?;
    let grid = config.grid;
    let eq = config.equation;
    let gradient = |x: &[f64]| -> Result<Vec<f64>> {
        let h = config.fd_step.unwrap_or_else(|| default_fd_step(x));
        Ok(gradient_impl(&Connection::from_params(grid, x)?, eq, h, true, config.parallel))
    };
    let mut x = config.initial_connection()?.to_params();
    let mut f = objective_at(grid, &x, eq);
    let mut g = gradient(&x)?;
    let mut history = match config.direction {
        Direction::Lbfgs { memory } => Some(History {
            memory,
            pairs: Vec::new(),
        }),
        Direction::Steepest => None,
    };
    let mut last_step = match config.step {
        StepRule::Fixed { step } => step,
        StepRule::Backtracking { initial, .. } => initial,
    };
    let mut records = Vec::new();
    let mut iter = 0;
    let status = loop {
        let mut record = IterRecord {
            iter,
            objective: f,
            grad_norm: l2(&g),
            step: 0.0,
        };
        if f <= config.tol_residual {
            records.push(record);
            break SolverStatus::Converged;
        }
        if iter >= config.max_iters {
            records.push(record);
            break SolverStatus::IterLimit;
        }
        let steepest: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut dir = match &history {
            Some(h) => h.direction(&g),
            None => steepest.clone(),
        };
        if dot(&dir, &g) >= 0.0 {
            dir = steepest.clone();
        }
        let eval = |d: &[f64], t: f64| -> (Vec<f64>, f64) {
            let cand: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
            let fc = objective_at(grid, &cand, eq);
            (cand, fc)
        };
        let (next, fnext, t) = match config.step {
            StepRule::Fixed { step } => {
                let (cand, fc) = eval(&dir, step);
                (cand, fc, step)
            }
            StepRule::Backtracking {
                initial,
                shrink,
                sufficient_decrease: c1,
            } => {
                let start = if history.is_some() { initial } else { (last_step / shrink).min(initial) };
                let found = backtrack(start, shrink, c1, f, dot(&dir, &g), |t| eval(&dir, t)).or_else(|| {
                    // A stale quasi-Newton model gets one retry along -g.
                    if history.is_some() && dir != steepest {
                        backtrack(initial, shrink, c1, f, -dot(&g, &g), |t| eval(&steepest, t))
                    } else {
                        None
                    }
                });
                match found {
                    Some(v) => v,
                    None => {
                        records.push(record);
                        break SolverStatus::Stalled;
                    }
                }
            }
        };
        let gnext = gradient(&next)?;
        if let Some(h) = history.as_mut() {
            let s = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
            h.push(s, y);
        }
        record.step = t;
        records.push(record);
        x = next;
        f = fnext;
        g = gnext;
        last_step = t;
        iter += 1;
    };
    let a = Connection::new(Connection::from_params(grid, &x)?.form().clone())?;
    Ok((a, SolverTrace { records, status }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Su2Coords;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g22() -> TorusGrid {
        TorusGrid::new(2, 2).unwrap()
    }

    fn random_cfg(seed: u64) -> SolverConfig {
        SolverConfig::new(g22(), InitSpec::Random { scale: 0.05, seed })
    }

    #[test]
    fn objective_fixtures() {
        assert_eq!(objective(&Connection::zero(g22()), Equation::Delta), 0.0);
        let c = Connection::constant(g22(), Su2Coords::new(0.3, 0.0, 0.0), Su2Coords::new(-0.7, 0.0, 0.0));
        assert_eq!(objective(&c, Equation::Delta), 0.0);
        assert_eq!(objective(&c, Equation::Dstar), 0.0);
        assert!(objective(&Connection::random(g22(), 0.1, 1), Equation::Delta) > 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = random_cfg(1);
        assert!(c.validate().is_ok());
        c.init = InitSpec::Random { scale: 0.0, seed: 1 };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = random_cfg(1);
        c.fd_step = Some(-1.0);
        assert!(c.validate().is_err());
        c.fd_step = None;
        c.step = StepRule::Backtracking {
            initial: 1.0,
            shrink: 1.0,
            sufficient_decrease: 0.1,
        };
        assert!(c.validate().is_err());
        c.step = StepRule::Fixed { step: 0.0 };
        assert!(matches!(solve(&c), Err(Error::Config(_))));
        let mut c = random_cfg(1);
        c.tol_residual = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let c = random_cfg(9);
        assert_eq!(SolverConfig::from_json(&c.to_json()).unwrap(), c);
        let minimal = r#"{"grid":"2x2","init":{"kind":"zero"},"tol_residual":1e-10,"max_iters":10}"#;
        let m = SolverConfig::from_json(minimal).unwrap();
        assert_eq!(m.equation, Equation::Delta);
        assert!(SolverConfig::from_json(r#"{"grid":"0x2","init":{"kind":"zero"},"tol_residual":1,"max_iters":1}"#).is_err());
    }

    #[test]
    fn zero_init_converges_immediately() {
        let (a, trace) = solve(&SolverConfig::new(g22(), InitSpec::Zero)).unwrap();
        assert_eq!(trace.status, SolverStatus::Converged);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].iter, 0);
        assert_eq!(trace.records[0].objective, 0.0);
        assert_eq!(trace.records[0].grad_norm, 0.0);
        assert_eq!(a, Connection::zero(g22()));
    }

    #[test]
    fn zero_budget_reports_initial_objective() {
        let mut c = random_cfg(2);
        c.max_iters = 0;
        let (_, trace) = solve(&c).unwrap();
        assert_eq!(trace.status, SolverStatus::IterLimit);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].objective, objective(&Connection::random(g22(), 0.05, 2), Equation::Delta));
    }

    #[test]
    fn seed_one_converges_monotonically() {
        let (a, trace) = solve(&random_cfg(1)).unwrap();
        assert_eq!(trace.status, SolverStatus::Converged);
        assert!(trace.iterations() <= 5000);
        assert!(trace.final_objective() <= 1e-10);
        for w in trace.records.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
        assert!(Equation::Delta.residual(&a).max_abs() <= 1e-5 * 10.0);
    }

    #[test]
    fn steepest_descent_decreases() {
        let mut c = random_cfg(1);
        c.direction = Direction::Steepest;
        c.max_iters = 200;
        let (_, trace) = solve(&c).unwrap();
        assert_eq!(trace.status, SolverStatus::IterLimit);
        for w in trace.records.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
        assert!(trace.final_objective() < 1e-3 * trace.records[0].objective);
    }

    #[test]
    fn fixed_step_runs() {
        let mut c = random_cfg(1);
        c.direction = Direction::Steepest;
        c.step = StepRule::Fixed { step: 0.01 };
        c.max_iters = 100;
        let (_, trace) = solve(&c).unwrap();
        assert_eq!(trace.records.len(), 101);
        assert!(trace.final_objective() < trace.records[0].objective);
    }

    #[test]
    fn dstar_converges_too() {
        let mut c = random_cfg(3);
        c.equation = Equation::Dstar;
        let (_, trace) = solve(&c).unwrap();
        assert_eq!(trace.status, SolverStatus::Converged);
    }

    #[test]
    fn deterministic_and_parallel_agree_bitwise() {
        let mut c = random_cfg(4);
        c.max_iters = 50;
        let (a1, t1) = solve(&c).unwrap();
        let (a2, t2) = solve(&c).unwrap();
        c.parallel = true;
        let (a3, t3) = solve(&c).unwrap();
        assert_eq!(t1.to_csv(), t2.to_csv());
        assert_eq!(t1.to_csv(), t3.to_csv());
        assert_eq!(a1.to_params(), a2.to_params());
        assert_eq!(a1.to_params(), a3.to_params());
    }

    #[test]
    fn gradient_checks() {
        let grid = TorusGrid::new(2, 3).unwrap();
        assert!(gradient_fd(&Connection::zero(grid), Equation::Delta, 1e-6).iter().all(|g| *g == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..5 {
            let a = Connection::random(grid, 0.1, seed);
            let p = a.to_params();
            let g = gradient_fd(&a, Equation::Delta, default_fd_step(&p));
            let dir: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = 1e-5;
            let shifted = |t: f64| {
                let q: Vec<f64> = p.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
                objective_at(grid, &q, Equation::Delta)
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let gd: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!((fd - gd).abs() <= 1e-8 * fd.abs().max(gd.abs()), "{fd} vs {gd}");

            let fwd = gradient_forward(&a, Equation::Delta, 1e-7);
            let scale = l2(&g);
            for (c, f) in g.iter().zip(&fwd) {
                assert!((c - f).abs() <= 1e-4 * scale);
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_flat_points() {
        let c = Connection::constant(g22(), Su2Coords::new(0.2, 0.0, 0.0), Su2Coords::new(0.5, 0.0, 0.0));
        for eq in [Equation::Delta, Equation::Dstar] {
            let g = gradient_fd(&c, eq, default_fd_step(&c.to_params()));
            assert!(l2(&g) <= 1e-8);
        }
    }

    #[test]
    fn csv_format() {
        let trace = SolverTrace {
            records: vec![IterRecord {
                iter: 0,
                objective: 0.1,
                grad_norm: 2.0,
                step: 0.0,
            }],
            status: SolverStatus::IterLimit,
        };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,objective,grad_norm,step"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "0");
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.1);
    }
}
