//! Randomized invariant suites over the whole calculus.
//!
//! Each check records the largest error seen across grids and trials. The
//! report is plain data; the CLI decides how to print it.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{su2_deviation, su2_from_coords, Mat2C, Su2Coords};
use crate::cochain::{random_mat_form, random_su2_form, shift_form, total_over_v, Degree, DiscreteForm, TorusGrid};
use crate::exterior::{
    boundary_pairing, cup, d, delta, delta_via_star, inner, inner_reduced, norm_sq, star, star_inv, star_star,
    trace_total,
};
use crate::matrix_form::{generate_matrices, matrix_residual, torus_2x2_matrices, EdgeOrdering};
use crate::yang_mills::{
    curvature, d_a, delta_a, laplacian_a, residual_delta, residual_delta_via_operators, residual_dstar,
    residual_dstar_via_operators, Connection, DeltaAMode, Equation,
};

/// Deliberate defects, for checking that the suite notices them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Perturbs one coefficient of every `⋆` result.
    CorruptStar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub grids: Vec<TorusGrid>,
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub fault: Fault,
}

impl VerifyConfig {
    /// Grids 1×1, 2×2, 3×5, 8×8 with 200 trials each.
    pub fn standard(seed: u64) -> Self {
        let grid = |n, m| TorusGrid::new(n, m).expect("nonzero");
        VerifyConfig {
            grids: vec![grid(1, 1), grid(2, 2), grid(3, 5), grid(8, 8)],
            seed,
            trials: 200,
            fault: Fault::None,
        }
    }
}

/// Largest error of one invariant against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub tol: f64,
    pub max_error: f64,
    pub samples: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tol
    }
}

/// One measured-only sample of the covariant Laplacian's quadratic form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub grid: TorusGrid,
    pub trial: usize,
    pub degree: u8,
    pub curvature_su2_deviation: f64,
    pub laplacian_inner_re: f64,
    pub laplacian_inner_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub diagnostics: Vec<Diagnostic>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest error among checks whose name is listed.
    pub fn max_error(&self, names: &[&str]) -> f64 {
        self.checks
            .iter()
            .filter(|c| names.contains(&c.name.as_str()))
            .map(|c| c.max_error)
            .fold(0.0, f64::max)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{verdict} {:<34} max_error={:.3e} tol={:.0e} samples={}",
                c.name, c.max_error, c.tol, c.samples
            )
            .unwrap();
        }
        out
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("grid,trial,degree,curvature_su2_deviation,laplacian_inner_re,laplacian_inner_im\n");
        for r in &self.diagnostics {
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e}",
                r.grid, r.trial, r.degree, r.curvature_su2_deviation, r.laplacian_inner_re, r.laplacian_inner_im
            )
            .unwrap();
        }
        out
    }
}

/// Names of the checks in report order, with tolerances.
pub const CHECKS: &[(&str, f64)] = &[
    ("d_squared", 1e-13),
    ("codifferential_squared", 1e-13),
    ("star_inverse", 1e-13),
    ("leibniz", 1e-13),
    ("codifferential_modes", 1e-13),
    ("d_delta_adjoint", 1e-12),
    ("boundary_pairing", 1e-13),
    ("inner_reduction", 1e-13),
    ("shift_invariance", 1e-12),
    ("trace_cup_swap", 1e-12),
    ("double_star_shift", 1e-12),
    ("star_adjoint", 1e-12),
    ("trace_star_cup", 1e-12),
    ("bianchi", 0.0),
    ("covariant_leibniz", 1e-13),
    ("covariant_adjoint", 1e-12),
    ("covariant_codifferential_modes", 1e-13),
    ("energy_identity", 1e-12),
    ("covariant_laplacian_self_adjoint", 1e-12),
    ("conditioned_positivity", 1e-10),
    ("positivity_equality_case", 1e-12),
    ("flat_is_yang_mills", 1e-12),
    ("residual_dstar_double_entry", 1e-13),
    ("residual_delta_double_entry", 1e-13),
    ("matrix_constants", 0.0),
    ("matrix_residual", 1e-13),
];

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            checks: CHECKS
                .iter()
                .map(|&(name, tol)| Check {
                    name: name.to_string(),
                    tol,
                    max_error: 0.0,
                    samples: 0,
                })
                .collect(),
        }
    }

    fn record(&mut self, name: &str, err: f64) {
        let c = self.checks.iter_mut().find(|c| c.name == name).expect("registered check");
        // NaN must fail, so it wins over any finite error.
        if !c.max_error.is_nan() && (err.is_nan() || err > c.max_error) {
            c.max_error = err;
        }
        c.samples += 1;
    }
}

const DEGREES: [Degree; 3] = [Degree::Zero, Degree::One, Degree::Two];

fn dist(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

fn cup_(f: &DiscreteForm, g: &DiscreteForm) -> DiscreteForm {
    cup(f, g).expect("degrees sum to at most 2")
}

fn inner_(f: &DiscreteForm, g: &DiscreteForm) -> Complex64 {
    inner(f, g).expect("same grid")
}

fn degree(r: u8) -> Degree {
    Degree::from_u8(r).expect("degree in range")
}

struct Trial<'a> {
    grid: TorusGrid,
    rng: ChaCha8Rng,
    fault: Fault,
    rec: &'a mut Recorder,
}

impl Trial<'_> {
    fn mat(&mut self, deg: Degree) -> DiscreteForm {
        random_mat_form(self.grid, deg, self.rng.gen())
    }

    fn su2(&mut self, deg: Degree) -> DiscreteForm {
        random_su2_form(self.grid, deg, 1.0, self.rng.gen())
    }

    fn star(&self, f: &DiscreteForm) -> DiscreteForm {
        let mut out = star(f);
        if self.fault == Fault::CorruptStar {
            let bumped = out.get(0, 0, 0) + Mat2C::IDENTITY.scale(1e-3);
            out.set(0, 1, 1, bumped);
        }
        out
    }

    /// A constant connection along one su(2) direction, hence flat.
    fn commuting_constant(&mut self) -> (Connection, Mat2C) {
        let u = Su2Coords::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0));
        let (x, y): (f64, f64) = (self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0));
        let scaled = |t: f64| Su2Coords::new(t * u.a1, t * u.a2, t * u.a3);
        (Connection::constant(self.grid, scaled(x), scaled(y)), su2_from_coords(u))
    }

    fn flat_calculus(&mut self) {
        for deg in [Degree::Zero, Degree::One] {
            let f = self.mat(deg);
            self.rec.record("d_squared", d(&d(&f)).max_abs());
        }
        for deg in [Degree::One, Degree::Two] {
            let g = self.mat(deg);
            self.rec.record("codifferential_squared", delta(&delta(&g)).max_abs());
            self.rec.record("codifferential_modes", delta(&g).max_abs_diff(&delta_via_star(&g)));
        }
        for deg in DEGREES {
            let f = self.mat(deg);
            let err = star_inv(&self.star(&f)).max_abs_diff(&f).max(self.star(&star_inv(&f)).max_abs_diff(&f));
            self.rec.record("star_inverse", err);
        }
        for (p, q) in [(0, 0), (0, 1), (1, 0)] {
            let (omega, phi) = (self.mat(degree(p)), self.mat(degree(q)));
            let lhs = d(&cup_(&omega, &phi));
            let rhs = cup_(&d(&omega), &phi).add(&cup_(&omega, &d(&phi)).scale(degree(p).sign()));
            self.rec.record("leibniz", lhs.max_abs_diff(&rhs));
        }
    }

    fn adjointness(&mut self) {
        for r in 0..2 {
            let (f, g) = (self.mat(degree(r)), self.mat(degree(r + 1)));
            let err = dist(inner_(&d(&f), &g), inner_(&f, &delta(&g)));
            self.rec.record("d_delta_adjoint", err);
            self.rec.record("boundary_pairing", boundary_pairing(&f, &g).expect("degrees r, r+1").max_abs());
        }
        for deg in DEGREES {
            let (f, g) = (self.mat(deg), self.mat(deg));
            let err = dist(inner_(&f, &g), inner_reduced(&f, &g).expect("same grid"));
            self.rec.record("inner_reduction", err);
        }
    }

    fn trace_identities(&mut self) {
        let psi = self.mat(Degree::Two);
        let base = total_over_v(&psi).expect("2-form");
        for (dk, ds) in [(1, 0), (0, 1), (-1, -1), (3, -2)] {
            let shifted = total_over_v(&shift_form(&psi, dk, ds)).expect("2-form");
            self.rec.record("shift_invariance", (shifted - base).max_abs());
        }
        for (p, q) in [(0, 2), (2, 0), (1, 1)] {
            let (phi, omega) = (self.mat(degree(p)), self.mat(degree(q)));
            let tr = trace_total(&cup_(&phi, &omega)).expect("2-form");
            let swapped = trace_total(&cup_(&omega, &star_star(&phi))).expect("2-form");
            self.rec.record("trace_cup_swap", dist(tr, swapped));
            let starred = trace_total(&cup_(&self.star(&phi), &self.star(&omega))).expect("2-form");
            self.rec.record("trace_star_cup", dist(tr, starred));
        }
        let omega = self.mat(Degree::One);
        let err = star_star(&omega).max_abs_diff(&shift_form(&omega, -1, -1).neg());
        self.rec.record("double_star_shift", err);
        for r in 0..3 {
            let (phi, omega) = (self.mat(degree(r)), self.mat(degree(2 - r)));
            let err = dist(inner_(&phi, &star_inv(&omega)), inner_(&self.star(&phi), &omega));
            self.rec.record("star_adjoint", err);
        }
    }

    fn gauged(&mut self, trial: usize, diagnostics: &mut Vec<Diagnostic>) {
        let a = Connection::random(self.grid, 1.0, self.rng.gen());
        let f_curv = curvature(&a);
        self.rec.record("bianchi", if d_a(&a, &f_curv.form).is_top() { 0.0 } else { f64::INFINITY });
        for (p, q) in [(0, 0), (0, 1), (1, 0)] {
            let (omega, phi) = (self.mat(degree(p)), self.mat(degree(q)));
            let lhs = d_a(&a, &cup_(&omega, &phi));
            let rhs = cup_(&d_a(&a, &omega), &phi).add(&cup_(&omega, &d_a(&a, &phi)).scale(degree(p).sign()));
            self.rec.record("covariant_leibniz", lhs.max_abs_diff(&rhs));
        }
        for r in 0..2 {
            let (f, g) = (self.mat(degree(r)), self.mat(degree(r + 1)));
            let err = dist(inner_(&d_a(&a, &f), &g), inner_(&f, &delta_a(&a, &g, DeltaAMode::Split)));
            self.rec.record("covariant_adjoint", err);
        }
        for deg in [Degree::One, Degree::Two] {
            let f = self.mat(deg);
            let base = delta_a(&a, &f, DeltaAMode::Split);
            let err = DeltaAMode::ALL
                .iter()
                .map(|&m| delta_a(&a, &f, m).max_abs_diff(&base))
                .fold(0.0, f64::max);
            self.rec.record("covariant_codifferential_modes", err);
        }
        for deg in DEGREES {
            let (f, g) = (self.mat(deg), self.mat(deg));
            let lf = laplacian_a(&a, &f);
            let (df, delf) = (d_a(&a, &f), delta_a(&a, &f, DeltaAMode::Split));
            let energy = inner_(&delf, &delf) + inner_(&df, &df);
            self.rec.record("energy_identity", dist(inner_(&lf, &f), energy));
            let err = dist(inner_(&lf, &g), inner_(&f, &laplacian_a(&a, &g)));
            self.rec.record("covariant_laplacian_self_adjoint", err);

            let h = self.su2(deg);
            let z = inner_(&laplacian_a(&a, &h), &h);
            diagnostics.push(Diagnostic {
                grid: self.grid,
                trial,
                degree: deg.as_u8(),
                curvature_su2_deviation: f_curv.su2_deviation_max,
                laplacian_inner_re: z.re,
                laplacian_inner_im: z.im,
            });
        }
        self.positivity();
        self.residuals(&a);
    }

    fn positivity(&mut self) {
        let (flat, u) = self.commuting_constant();
        for conn in [Connection::zero(self.grid), flat.clone()] {
            for deg in DEGREES {
                let f = self.su2(deg);
                let (df, delf) = (d_a(&conn, &f), delta_a(&conn, &f, DeltaAMode::Split));
                let dev = df.coeffs().iter().chain(delf.coeffs()).map(su2_deviation).fold(0.0, f64::max);
                if dev <= 1e-9 {
                    let z = inner_(&laplacian_a(&conn, &f), &f);
                    self.rec.record("conditioned_positivity", (-z.re).max(0.0));
                }
            }
        }
        // Constant 0-form commuting with the connection: Δ_A f = 0.
        let c: f64 = self.rng.gen_range(-1.0..1.0);
        let f = DiscreteForm::from_fn(self.grid, Degree::Zero, |_, _, _| u.scale(c));
        let z = inner_(&laplacian_a(&flat, &f), &f);
        let err = z
            .norm()
            .max(norm_sq(&d_a(&flat, &f)))
            .max(norm_sq(&delta_a(&flat, &f, DeltaAMode::Split)));
        self.rec.record("positivity_equality_case", err);

        let curv = curvature(&flat).form.max_abs();
        let err = if curv <= 1e-14 {
            residual_dstar(&flat).max_abs().max(residual_delta(&flat).max_abs())
        } else {
            f64::INFINITY
        };
        self.rec.record("flat_is_yang_mills", err);
    }

    fn residuals(&mut self, a: &Connection) {
        self.rec
            .record("residual_dstar_double_entry", residual_dstar(a).max_abs_diff(&residual_dstar_via_operators(a)));
        let direct = residual_delta(a);
        for mode in DeltaAMode::ALL {
            let err = direct.max_abs_diff(&residual_delta_via_operators(a, mode));
            self.rec.record("residual_delta_double_entry", err);
        }
        if self.grid == TorusGrid::new(2, 2).expect("2x2") {
            let order = EdgeOrdering::torus_2x2();
            for eq in [Equation::Dstar, Equation::Delta] {
                let m = matrix_residual(a, eq).expect("2x2 grid");
                self.rec.record("matrix_residual", m.max_abs_diff(&order.flatten(&eq.residual(a))));
            }
        }
    }
}

/// Runs every suite on every grid. Results depend only on the config.
pub fn run(config: &VerifyConfig) -> VerifyReport {
    let mut rec = Recorder::new();
    let mut diagnostics = Vec::new();
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    for &grid in &config.grids {
        if config.trials > 0 && grid == TorusGrid::new(2, 2).expect("2x2") {
            let same = generate_matrices(&EdgeOrdering::torus_2x2()) == torus_2x2_matrices();
            rec.record("matrix_constants", if same { 0.0 } else { 1.0 });
        }
        for trial in 0..config.trials {
            let mut t = Trial {
                grid,
                rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
                fault: config.fault,
                rec: &mut rec,
            };
            t.flat_calculus();
            t.adjointness();
            t.trace_identities();
            t.gauged(trial, &mut diagnostics);
        }
    }
    VerifyReport {
        checks: rec.checks,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> VerifyConfig {
        let mut c = VerifyConfig::standard(7);
        c.grids.truncate(3);
        c.trials = trials;
        c
    }

    #[test]
    fn small_run_passes() {
        let report = run(&small(5));
        assert!(report.passed(), "{}", report.summary());
        assert!(report.checks.iter().all(|c| c.samples > 0), "{}", report.summary());
        assert_eq!(report.diagnostics.len(), 3 * 5 * 3);
    }

    #[test]
    fn corrupt_star_is_caught() {
        let mut c = small(2);
        c.fault = Fault::CorruptStar;
        let report = run(&c);
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"star_inverse"), "{failed:?}");
    }

    #[test]
    fn zero_trials_is_vacuous() {
        let report = run(&small(0));
        assert!(report.passed());
        assert!(report.checks.iter().all(|c| c.samples == 0));
        assert_eq!(report.diagnostics_csv().lines().count(), 1);
    }

    #[test]
    fn deterministic() {
        let a = run(&small(2));
        let b = run(&small(2));
        assert_eq!(a.summary(), b.summary());
        assert_eq!(a.diagnostics_csv(), b.diagnostics_csv());
    }

    #[test]
    fn nan_fails() {
        let mut rec = Recorder::new();
        rec.record("leibniz", f64::NAN);
        rec.record("leibniz", 0.0);
        assert!(!rec.checks.iter().find(|c| c.name == "leibniz").unwrap().passed());
    }
}
