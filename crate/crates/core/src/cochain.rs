//! The combinatorial N×M torus and matrix-valued cochains on it.
//!
//! Cells are labelled `(k, s)` with `k ∈ 1..=N`, `s ∈ 1..=M` at every public
//! interface that takes labels. Storage is 0-based and every access wraps
//! modulo the grid, so the periodic identifications of the torus hold by
//! construction rather than through ghost cells.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{su2_from_coords, Mat2C, Su2Coords};
use crate::error::{Error, Result};

/// Grid dimensions: `n` cells in direction 1, `m` cells in direction 2.
/// Serialized as the string `"NxM"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TorusGrid {
    n: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Config(format!("grid must be at least 1x1, got {n}x{m}")));
        }
        Ok(TorusGrid { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> usize {
        self.n * self.m
    }

    /// Maps any integer label in direction 1 to its 0-based storage index.
    pub fn wrap_k(&self, k: i64) -> usize {
        (k - 1).rem_euclid(self.n as i64) as usize
    }

    /// Maps any integer label in direction 2 to its 0-based storage index.
    pub fn wrap_s(&self, s: i64) -> usize {
        (s - 1).rem_euclid(self.m as i64) as usize
    }

    /// Flat storage index of the 0-based cell `(k0, s0)`, `k0` varying fastest.
    #[inline]
    pub fn flat(&self, k0: usize, s0: usize) -> usize {
        k0 + self.n * s0
    }

    /// Flat index of the 0-based cell `(k0 + dk, s0 + ds)` taken modulo the grid.
    #[inline]
    pub fn offset(&self, k0: usize, s0: usize, dk: isize, ds: isize) -> usize {
        let k = (k0 as isize + dk).rem_euclid(self.n as isize) as usize;
        let s = (s0 as isize + ds).rem_euclid(self.m as isize) as usize;
        self.flat(k, s)
    }

    /// Iterates 0-based `(k0, s0)` in storage order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..self.cells()).map(move |i| (i % n, i / n))
    }

    /// Parses `"NxM"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Config(format!("grid must look like NxM, got {text:?}")))?;
        let n = a.trim().parse().map_err(|_| Error::Config(format!("bad grid size {a:?}")))?;
        let m = b.trim().parse().map_err(|_| Error::Config(format!("bad grid size {b:?}")))?;
        TorusGrid::new(n, m)
    }
}

impl TryFrom<String> for TorusGrid {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        TorusGrid::parse(&text)
    }
}

impl From<TorusGrid> for String {
    fn from(g: TorusGrid) -> String {
        g.to_string()
    }
}

impl fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n, self.m)
    }
}

/// Cochain degree. `Top` is the degree-3 space of the 2-dimensional complex,
/// which has no cells; it is what the coboundary of a 2-form lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    Zero,
    One,
    Two,
    Top,
}

impl Degree {
    pub fn from_u8(r: u8) -> Option<Degree> {
        match r {
            0 => Some(Degree::Zero),
            1 => Some(Degree::One),
            2 => Some(Degree::Two),
            3 => Some(Degree::Top),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Degree::Zero => 0,
            Degree::One => 1,
            Degree::Two => 2,
            Degree::Top => 3,
        }
    }

    /// Coefficients stored per cell.
    pub fn components(self) -> usize {
        match self {
            Degree::Zero | Degree::Two => 1,
            Degree::One => 2,
            Degree::Top => 0,
        }
    }

    /// `(-1)^r`.
    pub fn sign(self) -> f64 {
        if self.as_u8().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A basis element of the chain complex, labelled 1-based. Labels may be any
/// integers; they are reduced modulo the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    /// `x_{k,s}`
    Vertex(i64, i64),
    /// `e¹_{k,s}`
    Edge1(i64, i64),
    /// `e²_{k,s}`
    Edge2(i64, i64),
    /// `V_{k,s}`
    Face(i64, i64),
}

impl Cell {
    fn degree(self) -> Degree {
        match self {
            Cell::Vertex(..) => Degree::Zero,
            Cell::Edge1(..) | Cell::Edge2(..) => Degree::One,
            Cell::Face(..) => Degree::Two,
        }
    }
}

/// How to fill a freshly made form.
#[derive(Clone, Debug, PartialEq)]
pub enum FormInit {
    Zero,
    /// One value per component; a single value is reused for both edge
    /// directions of a 1-form.
    Constant(Vec<Mat2C>),
    /// su(2) coefficients with coordinates uniform in `[-1, 1]³`.
    RandomSu2 { seed: u64 },
    /// Unconstrained coefficients, real and imaginary parts uniform in `[-1, 1]`.
    RandomMat { seed: u64 },
}

/// A matrix-valued cochain of a fixed degree on a torus grid.
///
/// Coefficients are stored component-major: component `c` of cell `(k0, s0)`
/// lives at `c * cells + k0 + n * s0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForm {
    grid: TorusGrid,
    degree: Degree,
    coeffs: Vec<Mat2C>,
}

impl DiscreteForm {
    pub fn zeros(grid: TorusGrid, degree: Degree) -> Self {
        DiscreteForm {
            grid,
            degree,
            coeffs: vec![Mat2C::ZERO; grid.cells() * degree.components()],
        }
    }

    /// Builds a form from `f(component, k0, s0)`.
    pub fn from_fn(grid: TorusGrid, degree: Degree, mut f: impl FnMut(usize, usize, usize) -> Mat2C) -> Self {
        let mut coeffs = Vec::with_capacity(grid.cells() * degree.components());
        for c in 0..degree.components() {
            for (k0, s0) in grid.iter_cells() {
                coeffs.push(f(c, k0, s0));
            }
        }
        DiscreteForm { grid, degree, coeffs }
    }

    pub fn from_coeffs(grid: TorusGrid, degree: Degree, coeffs: Vec<Mat2C>) -> Result<Self> {
        let expected = grid.cells() * degree.components();
        if coeffs.len() != expected {
            return Err(Error::GridMismatch {
                expected: format!("{expected} coefficients for degree {degree} on {grid}"),
                found: format!("{} coefficients", coeffs.len()),
            });
        }
        Ok(DiscreteForm { grid, degree, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn coeffs(&self) -> &[Mat2C] {
        &self.coeffs
    }

    /// The structurally zero form of degree 3.
    pub fn is_top(&self) -> bool {
        self.degree == Degree::Top
    }

    /// Coefficient of component `c` at the 0-based cell `(k0, s0)`.
    #[inline]
    pub fn get(&self, c: usize, k0: usize, s0: usize) -> Mat2C {
        self.coeffs[c * self.grid.cells() + self.grid.flat(k0, s0)]
    }

    /// Coefficient of component `c` at `(k0 + dk, s0 + ds)`, wrapped.
    #[inline]
    pub fn at(&self, c: usize, k0: usize, s0: usize, dk: isize, ds: isize) -> Mat2C {
        self.coeffs[c * self.grid.cells() + self.grid.offset(k0, s0, dk, ds)]
    }

    /// Sets a coefficient by 1-based (wrapped) labels.
    pub fn set(&mut self, c: usize, k: i64, s: i64, value: Mat2C) {
        let idx = c * self.grid.cells() + self.grid.flat(self.grid.wrap_k(k), self.grid.wrap_s(s));
        self.coeffs[idx] = value;
    }

    pub fn map(&self, f: impl Fn(&Mat2C) -> Mat2C) -> Self {
        DiscreteForm {
            grid: self.grid,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &DiscreteForm, f: impl Fn(&Mat2C, &Mat2C) -> Mat2C) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        DiscreteForm {
            grid: self.grid,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &DiscreteForm) -> Self {
        self.zip_with(other, |a, b| *a + *b)
    }

    pub fn sub(&self, other: &DiscreteForm) -> Self {
        self.zip_with(other, |a, b| *a - *b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -*a)
    }

    /// Largest entry modulus over all coefficients.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Mat2C::max_abs).fold(0.0, f64::max)
    }

    /// Largest entrywise difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &DiscreteForm) -> f64 {
        if self.grid != other.grid || self.degree != other.degree {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let rows = |c: usize| -> Vec<Vec<Mat2C>> {
            (0..self.grid.n)
                .map(|k0| (0..self.grid.m).map(|s0| self.get(c, k0, s0)).collect())
                .collect()
        };
        let coeffs = match self.degree {
            Degree::Zero | Degree::Two => CoeffsJson::Single(rows(0)),
            Degree::One => CoeffsJson::Pair { c1: rows(0), c2: rows(1) },
            Degree::Top => {
                return Err(Error::DegreeMismatch {
                    expected: "0, 1 or 2".into(),
                    found: 3,
                })
            }
        };
        let doc = FormJson {
            n: self.grid.n,
            m: self.grid.m,
            degree: self.degree.as_u8(),
            coeffs,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::from_json("form", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FormJson = serde_json::from_str(text).map_err(|e| Error::from_json("form", e))?;
        let grid = TorusGrid::new(doc.n, doc.m)
            .map_err(|e| Error::parse("n/m", e.to_string()))?;
        let degree = match Degree::from_u8(doc.degree) {
            Some(d @ (Degree::Zero | Degree::One | Degree::Two)) => d,
            _ => return Err(Error::parse("degree", format!("expected 0, 1 or 2, found {}", doc.degree))),
        };
        let tables: Vec<(&str, Vec<Vec<Mat2C>>)> = match (degree, doc.coeffs) {
            (Degree::One, CoeffsJson::Pair { c1, c2 }) => vec![("coeffs.c1", c1), ("coeffs.c2", c2)],
            (Degree::Zero | Degree::Two, CoeffsJson::Single(t)) => vec![("coeffs", t)],
            (Degree::One, _) => return Err(Error::parse("coeffs", "degree-1 forms need {\"c1\", \"c2\"}")),
            _ => return Err(Error::parse("coeffs", "degree-0/2 forms need an n×m array")),
        };
        let mut form = DiscreteForm::zeros(grid, degree);
        for (c, (name, table)) in tables.into_iter().enumerate() {
            check_shape(name, &table, grid)?;
            for (k0, row) in table.iter().enumerate() {
                for (s0, value) in row.iter().enumerate() {
                    if !value.is_finite() {
                        return Err(Error::parse(format!("{name}[{k0}][{s0}]"), "non-finite entry"));
                    }
                    form.coeffs[c * grid.cells() + grid.flat(k0, s0)] = *value;
                }
            }
        }
        Ok(form)
    }
}

pub(crate) fn check_shape<T>(name: &str, table: &[Vec<T>], grid: TorusGrid) -> Result<()> {
    if table.len() != grid.n {
        return Err(Error::parse(name, format!("expected {} rows, found {}", grid.n, table.len())));
    }
    for (k0, row) in table.iter().enumerate() {
        if row.len() != grid.m {
            return Err(Error::parse(
                format!("{name}[{k0}]"),
                format!("expected {} entries, found {}", grid.m, row.len()),
            ));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    n: usize,
    m: usize,
    degree: u8,
    coeffs: CoeffsJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffsJson {
    Single(Vec<Vec<Mat2C>>),
    Pair { c1: Vec<Vec<Mat2C>>, c2: Vec<Vec<Mat2C>> },
}

/// Draws su(2) coordinates uniform in `[-scale, scale]³` for every coefficient.
pub fn random_su2_form(grid: TorusGrid, degree: Degree, scale: f64, seed: u64) -> DiscreteForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DiscreteForm::from_fn(grid, degree, |_, _, _| {
        let c = Su2Coords::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        su2_from_coords(c).scale(scale)
    })
}

/// Draws unconstrained complex entries uniform in `[-1, 1]` (real and imaginary parts).
pub fn random_mat_form(grid: TorusGrid, degree: Degree, seed: u64) -> DiscreteForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DiscreteForm::from_fn(grid, degree, |_, _, _| {
        let mut parts = [[0.0; 2]; 4];
        for p in parts.iter_mut().flatten() {
            *p = rng.gen_range(-1.0..=1.0);
        }
        Mat2C::from_parts(parts)
    })
}

pub fn make_form(grid: TorusGrid, degree: Degree, init: &FormInit) -> Result<DiscreteForm> {
    Ok(match init {
        FormInit::Zero => DiscreteForm::zeros(grid, degree),
        FormInit::Constant(values) => {
            let comps = degree.components();
            let ok = values.len() == comps || (values.len() == 1 && comps > 0);
            if !ok {
                return Err(Error::Config(format!(
                    "constant init for degree {degree} needs {comps} value(s), got {}",
                    values.len()
                )));
            }
            DiscreteForm::from_fn(grid, degree, |c, _, _| values[c.min(values.len() - 1)])
        }
        FormInit::RandomSu2 { seed } => random_su2_form(grid, degree, 1.0, *seed),
        FormInit::RandomMat { seed } => random_mat_form(grid, degree, *seed),
    })
}

/// `⟨cell, f⟩`: the coefficient of `f` on a chain basis element.
pub fn pairing(f: &DiscreteForm, cell: Cell) -> Result<Mat2C> {
    if cell.degree() != f.degree {
        return Err(Error::DegreeMismatch {
            expected: f.degree.to_string(),
            found: cell.degree().as_u8(),
        });
    }
    let g = f.grid;
    let (c, k, s) = match cell {
        Cell::Vertex(k, s) | Cell::Edge1(k, s) | Cell::Face(k, s) => (0, k, s),
        Cell::Edge2(k, s) => (1, k, s),
    };
    Ok(f.get(c, g.wrap_k(k), g.wrap_s(s)))
}

/// `⟨V, Ψ⟩ = Σ_{k,s} Ψ_{k,s}`, summed in storage order.
pub fn total_over_v(psi: &DiscreteForm) -> Result<Mat2C> {
    if psi.degree != Degree::Two {
        return Err(Error::DegreeMismatch {
            expected: "2".into(),
            found: psi.degree.as_u8(),
        });
    }
    Ok(psi.coeffs.iter().fold(Mat2C::ZERO, |acc, x| acc + *x))
}

/// Result coefficient at `(k, s)` is the coefficient of `f` at `(k + dk, s + ds)`.
pub fn shift_form(f: &DiscreteForm, dk: i64, ds: i64) -> DiscreteForm {
    let g = f.grid;
    let dk = dk.rem_euclid(g.n as i64) as isize;
    let ds = ds.rem_euclid(g.m as i64) as isize;
    DiscreteForm::from_fn(g, f.degree, |c, k0, s0| f.at(c, k0, s0, dk, ds))
}
