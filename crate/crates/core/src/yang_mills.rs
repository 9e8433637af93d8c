//! Gauged operators and the two discrete Yang-Mills residuals.
//!
//! A [`Connection`] is an su(2)-valued 1-form. Its curvature, covariant
//! derivative and covariant codifferential are built from the flat operators
//! in [`crate::exterior`]; the residuals are implemented twice, once as the
//! explicit difference equations and once by composing operators, so the two
//! can be checked against each other.

use serde::{Deserialize, Serialize};

use crate::algebra::{coords_from_su2, su2_deviation, su2_from_coords, Mat2C, Su2Coords, SU2_TOL};
use crate::cochain::{check_shape, random_su2_form, Degree, DiscreteForm, TorusGrid};
use crate::error::{Error, Result};
use crate::exterior::{cup, cup_or_vanish, d, delta, hodge_laplacian, star, star_inv, star_star};

/// An su(2)-valued discrete 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    form: DiscreteForm,
}

impl Connection {
    /// Validates degree and su(2) membership of every coefficient against `tol`.
    pub fn with_tolerance(form: DiscreteForm, tol: f64) -> Result<Self> {
        if form.degree() != Degree::One {
            return Err(Error::DegreeMismatch {
                expected: "1".into(),
                found: form.degree().as_u8(),
            });
        }
        for m in form.coeffs() {
            let deviation = su2_deviation(m);
            if deviation > tol || !deviation.is_finite() {
                return Err(Error::NotInSu2 { deviation, tol });
            }
        }
        Ok(Connection { form })
    }

    pub fn new(form: DiscreteForm) -> Result<Self> {
        Self::with_tolerance(form, SU2_TOL)
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Connection {
            form: DiscreteForm::zeros(grid, Degree::One),
        }
    }

    /// Coordinates uniform in `[-scale, scale]³` on every edge.
    pub fn random(grid: TorusGrid, scale: f64, seed: u64) -> Self {
        Connection {
            form: random_su2_form(grid, Degree::One, scale, seed),
        }
    }

    /// `A¹ ≡ a1`, `A² ≡ a2` everywhere.
    pub fn constant(grid: TorusGrid, a1: Su2Coords, a2: Su2Coords) -> Self {
        let (m1, m2) = (su2_from_coords(a1), su2_from_coords(a2));
        Connection {
            form: DiscreteForm::from_fn(grid, Degree::One, |c, _, _| if c == 0 { m1 } else { m2 }),
        }
    }

    /// Number of real coordinates, `6 N M`.
    pub fn param_len(grid: TorusGrid) -> usize {
        6 * grid.cells()
    }

    /// Builds a connection from coordinates ordered `(k, s, edge, basis)`
    /// lexicographically, `k` slowest.
    pub fn from_params(grid: TorusGrid, params: &[f64]) -> Result<Self> {
        if params.len() != Self::param_len(grid) {
            return Err(Error::GridMismatch {
                expected: format!("{} parameters for {grid}", Self::param_len(grid)),
                found: format!("{} parameters", params.len()),
            });
        }
        let m = grid.m();
        let form = DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            let base = ((k * m + s) * 2 + c) * 3;
            su2_from_coords(Su2Coords::new(params[base], params[base + 1], params[base + 2]))
        });
        Ok(Connection { form })
    }

    /// Inverse of [`Connection::from_params`].
    pub fn to_params(&self) -> Vec<f64> {
        let grid = self.grid();
        let mut out = Vec::with_capacity(Self::param_len(grid));
        for k in 0..grid.n() {
            for s in 0..grid.m() {
                for c in 0..2 {
                    let m = self.form.get(c, k, s);
                    out.extend_from_slice(&[m.0[0].im, m.0[1].re, m.0[1].im]);
                }
            }
        }
        out
    }

    pub fn form(&self) -> &DiscreteForm {
        &self.form
    }

    pub fn grid(&self) -> TorusGrid {
        self.form.grid()
    }

    /// `A^c_{k,s}` at 0-based storage indices.
    pub fn get(&self, c: usize, k: usize, s: usize) -> Mat2C {
        self.form.get(c, k, s)
    }

    pub fn to_json(&self) -> Result<String> {
        let grid = self.grid();
        let table = |c: usize| -> Vec<Vec<[f64; 3]>> {
            (0..grid.n())
                .map(|k| {
                    (0..grid.m())
                        .map(|s| coords_from_su2(&self.form.get(c, k, s), f64::INFINITY).unwrap().as_array())
                        .collect()
                })
                .collect()
        };
        let doc = ConnectionJson {
            n: grid.n(),
            m: grid.m(),
            degree: 1,
            su2: true,
            a1_coords: table(0),
            a2_coords: table(1),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::from_json("connection", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConnectionJson = serde_json::from_str(text).map_err(|e| Error::from_json("connection", e))?;
        if doc.degree != 1 {
            return Err(Error::parse("degree", format!("connections have degree 1, found {}", doc.degree)));
        }
        if !doc.su2 {
            return Err(Error::parse("su2", "connection files store su(2) coordinates; expected \"su2\": true"));
        }
        let grid = TorusGrid::new(doc.n, doc.m).map_err(|e| Error::parse("n/m", e.to_string()))?;
        check_shape("a1_coords", &doc.a1_coords, grid)?;
        check_shape("a2_coords", &doc.a2_coords, grid)?;
        for (name, table) in [("a1_coords", &doc.a1_coords), ("a2_coords", &doc.a2_coords)] {
            for (k, row) in table.iter().enumerate() {
                for (s, v) in row.iter().enumerate() {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::parse(format!("{name}[{k}][{s}]"), "non-finite coordinate"));
                    }
                }
            }
        }
        let form = DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            let table = if c == 0 { &doc.a1_coords } else { &doc.a2_coords };
            su2_from_coords(Su2Coords::from_array(table[k][s]))
        });
        Ok(Connection { form })
    }
}

#[derive(Serialize, Deserialize)]
struct ConnectionJson {
    n: usize,
    m: usize,
    degree: u8,
    su2: bool,
    a1_coords: Vec<Vec<[f64; 3]>>,
    a2_coords: Vec<Vec<[f64; 3]>>,
}

/// Curvature 2-form of a connection together with how far its coefficients
/// drift from su(2).
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub form: DiscreteForm,
    pub su2_deviation_max: f64,
}

/// `F = dA + A ∪ A`.
pub fn curvature(a: &Connection) -> Curvature {
    let form = d(&a.form).add(&cup(&a.form, &a.form).expect("1-form cup 1-form"));
    let su2_deviation_max = form.coeffs().iter().map(su2_deviation).fold(0.0, f64::max);
    Curvature { form, su2_deviation_max }
}

fn check_grid(a: &Connection, f: &DiscreteForm) {
    assert_eq!(a.grid(), f.grid(), "connection and form live on different grids");
}

/// Covariant exterior derivative `d_A f = df + A ∪ f + (-1)^{r+1} f ∪ A`.
/// On 2-forms the result is the empty degree-3 form.
pub fn d_a(a: &Connection, f: &DiscreteForm) -> DiscreteForm {
    check_grid(a, f);
    match f.degree() {
        Degree::Zero | Degree::One => {
            let sign = -f.degree().sign();
            let left = cup(&a.form, f).expect("degree checked");
            let right = cup(f, &a.form).expect("degree checked");
            d(f).add(&left).add(&right.scale(sign))
        }
        Degree::Two | Degree::Top => DiscreteForm::zeros(f.grid(), Degree::Top),
    }
}

/// Which of the three equivalent expressions to use for `δ_A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeltaAMode {
    /// `δf + ⋆⁻¹(⋆f ∪ ⋆⋆A + (-1)^{r+1} A ∪ ⋆f)`, `f` of degree `r + 1`.
    #[default]
    Split,
    /// `(-1)^r ⋆⁻¹(d⋆f + (-1)^r ⋆f ∪ ⋆⋆A + A ∪ ⋆f)`, `f` of degree `r`.
    Conjugated,
    /// `(-1)^r ⋆⁻¹ d_A ⋆f + ⋆⁻¹(⋆f ∪ (⋆⋆A + A))`, `f` of degree `r`.
    Covariant,
}

impl DeltaAMode {
    pub const ALL: [DeltaAMode; 3] = [DeltaAMode::Split, DeltaAMode::Conjugated, DeltaAMode::Covariant];
}

/// Adjoint of [`d_a`] under the inner product. On 0-forms it is the zero 0-form.
pub fn delta_a(a: &Connection, f: &DiscreteForm, mode: DeltaAMode) -> DiscreteForm {
    check_grid(a, f);
    let deg = f.degree();
    match deg {
        Degree::Zero => return DiscreteForm::zeros(f.grid(), Degree::Zero),
        Degree::Top => return DiscreteForm::zeros(f.grid(), Degree::Two),
        _ => {}
    }
    // (-1)^deg, which is also (-1)^{r+1} when f has degree r + 1.
    let sign = deg.sign();
    let sf = star(f);
    let ssa = star_star(&a.form);
    let cup_ = |x: &DiscreteForm, y: &DiscreteForm| cup(x, y).expect("degrees sum to at most 2");
    match mode {
        DeltaAMode::Split => {
            let inner = cup_(&sf, &ssa).add(&cup_(&a.form, &sf).scale(sign));
            delta(f).add(&star_inv(&inner))
        }
        DeltaAMode::Conjugated => {
            let inner = d(&sf).add(&cup_(&sf, &ssa).scale(sign)).add(&cup_(&a.form, &sf));
            star_inv(&inner).scale(sign)
        }
        DeltaAMode::Covariant => {
            let twisted = star_inv(&d_a(a, &sf)).scale(sign);
            twisted.add(&star_inv(&cup_(&sf, &ssa.add(&a.form))))
        }
    }
}

/// Covariant Laplacian `Δ_A = d_A δ_A + δ_A d_A`.
pub fn laplacian_a(a: &Connection, f: &DiscreteForm) -> DiscreteForm {
    hodge_laplacian(f, |x| d_a(a, x), |x| delta_a(a, x, DeltaAMode::Split))
}

/// `d_A(Ω ∪ Φ)` with an overflowing cup read as zero; `None` when the whole
/// expression vanishes for degree reasons.
pub fn d_a_of_cup(a: &Connection, omega: &DiscreteForm, phi: &DiscreteForm) -> Option<DiscreteForm> {
    let prod = cup_or_vanish(omega, phi)?;
    let out = d_a(a, &prod);
    (!out.is_top()).then_some(out)
}

/// `⟨e^c_{k,s}, d_A ⋆F⟩` from the explicit difference equations:
///
/// ```text
/// c = 1:  F_{k,σs} − F_{σk,σs} + A¹_{k,s} F_{k,σs} − F_{σk,σs} A¹_{k,s}
/// c = 2:  F_{σk,s} − F_{σk,σs} + A²_{k,s} F_{σk,s} − F_{σk,σs} A²_{k,s}
/// ```
pub fn residual_dstar(a: &Connection) -> DiscreteForm {
    let f = curvature(a).form;
    DiscreteForm::from_fn(a.grid(), Degree::One, |c, k, s| {
        let near = if c == 0 { f.at(0, k, s, 0, -1) } else { f.at(0, k, s, -1, 0) };
        let diag = f.at(0, k, s, -1, -1);
        let link = a.get(c, k, s);
        near - diag + link * near - diag * link
    })
}

/// The same residual through the operators: `d_A(⋆F)`.
pub fn residual_dstar_via_operators(a: &Connection) -> DiscreteForm {
    d_a(a, &star(&curvature(a).form))
}

/// The difference equations equivalent to `δ_A F = 0`, laid out like
/// [`residual_dstar`]; only the site of the trailing link differs:
///
/// ```text
/// c = 1:  F_{k,σs} − F_{σk,σs} + A¹_{k,s} F_{k,σs} − F_{σk,σs} A¹_{σk,σs}
/// c = 2:  F_{σk,s} − F_{σk,σs} + A²_{k,s} F_{σk,s} − F_{σk,σs} A²_{σk,σs}
/// ```
///
/// As a 1-form this is `⋆(δ_A F)`.
pub fn residual_delta(a: &Connection) -> DiscreteForm {
    let f = curvature(a).form;
    let af = a.form();
    DiscreteForm::from_fn(a.grid(), Degree::One, |c, k, s| {
        let near = if c == 0 { f.at(0, k, s, 0, -1) } else { f.at(0, k, s, -1, 0) };
        let diag = f.at(0, k, s, -1, -1);
        near - diag + a.get(c, k, s) * near - diag * af.at(c, k, s, -1, -1)
    })
}

/// `⋆(δ_A F)` through the operators.
pub fn residual_delta_via_operators(a: &Connection, mode: DeltaAMode) -> DiscreteForm {
    star(&delta_a(a, &curvature(a).form, mode))
}

/// Which discrete Yang-Mills equation a residual refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// `d_A ⋆F = 0`
    Dstar,
    /// `δ_A F = 0`
    #[default]
    Delta,
}

impl Equation {
    pub fn residual(self, a: &Connection) -> DiscreteForm {
        match self {
            Equation::Dstar => residual_dstar(a),
            Equation::Delta => residual_delta(a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Equation::Dstar => "dstar",
            Equation::Delta => "delta",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dstar" => Ok(Equation::Dstar),
            "delta" => Ok(Equation::Delta),
            other => Err(Error::Config(format!("unknown equation {other:?}, expected dstar or delta"))),
        }
    }
}
