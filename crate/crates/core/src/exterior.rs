//! Flat discrete exterior calculus on the torus: coboundary, cup product,
//! star and its inverse, codifferential, inner product and Laplacian.
//!
//! All stencils below use 0-based storage offsets: `τ` is `+1`, `σ` is `-1`.

use num_complex::Complex64;

use crate::algebra::{trace_pairing, Mat2C};
use crate::cochain::{pairing, total_over_v, Cell, Degree, DiscreteForm};
use crate::error::{Error, Result};

fn check_grids(f: &DiscreteForm, g: &DiscreteForm) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            expected: f.grid().to_string(),
            found: g.grid().to_string(),
        });
    }
    Ok(())
}

/// Coboundary `d^c`. A 2-form maps to the empty degree-3 form.
pub fn d(f: &DiscreteForm) -> DiscreteForm {
    let grid = f.grid();
    match f.degree() {
        Degree::Zero => DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            let (dk, ds) = if c == 0 { (1, 0) } else { (0, 1) };
            f.at(0, k, s, dk, ds) - f.get(0, k, s)
        }),
        Degree::One => DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| {
            f.at(1, k, s, 1, 0) - f.get(1, k, s) - f.at(0, k, s, 0, 1) + f.get(0, k, s)
        }),
        Degree::Two | Degree::Top => DiscreteForm::zeros(grid, Degree::Top),
    }
}

/// Cup product with matrix-multiplied coefficients.
///
/// Products whose total degree exceeds 2 are refused with
/// [`Error::DegreeOverflow`]; they vanish in the complex, and callers that
/// want that zero should ask for it explicitly.
pub fn cup(f: &DiscreteForm, g: &DiscreteForm) -> Result<DiscreteForm> {
    check_grids(f, g)?;
    let grid = f.grid();
    let (p, q) = (f.degree().as_u8(), g.degree().as_u8());
    if p + q > 2 {
        return Err(Error::DegreeOverflow { left: p, right: q });
    }
    let out = match (f.degree(), g.degree()) {
        (Degree::Zero, Degree::Zero) => {
            DiscreteForm::from_fn(grid, Degree::Zero, |_, k, s| f.get(0, k, s) * g.get(0, k, s))
        }
        (Degree::Zero, Degree::One) => {
            DiscreteForm::from_fn(grid, Degree::One, |c, k, s| f.get(0, k, s) * g.get(c, k, s))
        }
        (Degree::One, Degree::Zero) => DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            let (dk, ds) = if c == 0 { (1, 0) } else { (0, 1) };
            f.get(c, k, s) * g.at(0, k, s, dk, ds)
        }),
        (Degree::Zero, Degree::Two) => {
            DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| f.get(0, k, s) * g.get(0, k, s))
        }
        (Degree::Two, Degree::Zero) => {
            DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| f.get(0, k, s) * g.at(0, k, s, 1, 1))
        }
        (Degree::One, Degree::One) => DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| {
            f.get(0, k, s) * g.at(1, k, s, 1, 0) - f.get(1, k, s) * g.at(0, k, s, 0, 1)
        }),
        _ => unreachable!("degree sum checked above"),
    };
    Ok(out)
}

/// Cup product that treats an overflowing degree as the zero it is in the
/// complex. Returns `None` in that case.
pub(crate) fn cup_or_vanish(f: &DiscreteForm, g: &DiscreteForm) -> Option<DiscreteForm> {
    match cup(f, g) {
        Ok(h) => Some(h),
        Err(Error::DegreeOverflow { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

/// Discrete Hodge star `⋆: K^r → K^{2-r}`.
///
/// # Panics
/// On the degree-3 form, which has no dual.
pub fn star(f: &DiscreteForm) -> DiscreteForm {
    let grid = f.grid();
    match f.degree() {
        Degree::Zero => DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| f.get(0, k, s)),
        Degree::One => DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            if c == 0 {
                -f.at(1, k, s, 0, -1)
            } else {
                f.at(0, k, s, -1, 0)
            }
        }),
        Degree::Two => DiscreteForm::from_fn(grid, Degree::Zero, |_, k, s| f.at(0, k, s, -1, -1)),
        Degree::Top => panic!("star is not defined on degree 3"),
    }
}

/// Inverse star `⋆⁻¹: K^r → K^{2-r}`.
///
/// # Panics
/// On the degree-3 form.
pub fn star_inv(f: &DiscreteForm) -> DiscreteForm {
    let grid = f.grid();
    match f.degree() {
        Degree::Zero => DiscreteForm::from_fn(grid, Degree::Two, |_, k, s| f.at(0, k, s, 1, 1)),
        Degree::One => DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            if c == 0 {
                f.at(1, k, s, 1, 0)
            } else {
                -f.at(0, k, s, 0, 1)
            }
        }),
        Degree::Two => DiscreteForm::from_fn(grid, Degree::Zero, |_, k, s| f.get(0, k, s)),
        Degree::Top => panic!("star_inv is not defined on degree 3"),
    }
}

/// `⋆⋆`, a signed diagonal shift.
pub fn star_star(f: &DiscreteForm) -> DiscreteForm {
    star(&star(f))
}

/// Codifferential `δ^c` from the explicit difference stencils. Zero on
/// 0-forms (returned as the zero 0-form).
pub fn delta(f: &DiscreteForm) -> DiscreteForm {
    let grid = f.grid();
    match f.degree() {
        Degree::Zero => DiscreteForm::zeros(grid, Degree::Zero),
        Degree::One => DiscreteForm::from_fn(grid, Degree::Zero, |_, k, s| {
            f.at(0, k, s, -1, 0) - f.get(0, k, s) + f.at(1, k, s, 0, -1) - f.get(1, k, s)
        }),
        Degree::Two => DiscreteForm::from_fn(grid, Degree::One, |c, k, s| {
            if c == 0 {
                f.get(0, k, s) - f.at(0, k, s, 0, -1)
            } else {
                -(f.get(0, k, s) - f.at(0, k, s, -1, 0))
            }
        }),
        Degree::Top => DiscreteForm::zeros(grid, Degree::Two),
    }
}

/// Codifferential through the composition `(-1)^{r+1} ⋆⁻¹ d ⋆` on
/// `(r+1)`-forms. Kept as an independent route to [`delta`].
pub fn delta_via_star(f: &DiscreteForm) -> DiscreteForm {
    match f.degree() {
        Degree::Zero => DiscreteForm::zeros(f.grid(), Degree::Zero),
        Degree::Top => DiscreteForm::zeros(f.grid(), Degree::Two),
        deg => star_inv(&d(&star(f))).scale(deg.sign()),
    }
}

/// `tr⟨V, Ψ⟩` for a 2-form.
pub fn trace_total(psi: &DiscreteForm) -> Result<Complex64> {
    Ok(total_over_v(psi)?.trace())
}

/// Inner product `-½ tr⟨V, f ∪ ⋆g⟩`, complex-valued for general coefficients.
/// Forms of different degrees pair to zero.
pub fn inner(f: &DiscreteForm, g: &DiscreteForm) -> Result<Complex64> {
    check_grids(f, g)?;
    if f.degree() != g.degree() || f.is_top() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let top = cup(f, &star(g))?;
    Ok(-0.5 * trace_total(&top)?)
}

/// Hermitian norm `Σ ½ tr(X X†)`; agrees with `inner(f, f)` on su(2)-valued forms.
pub fn norm_sq(f: &DiscreteForm) -> f64 {
    0.5 * f.coeffs().iter().map(Mat2C::frobenius_sq).sum::<f64>()
}

/// `Σ trace_pairing` of matching coefficients: the shift-free reduction of [`inner`].
pub fn inner_reduced(f: &DiscreteForm, g: &DiscreteForm) -> Result<Complex64> {
    check_grids(f, g)?;
    if f.degree() != g.degree() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| trace_pairing(a, b)).sum())
}

/// `dδ + δd`, built from any pair of degree-raising and degree-lowering maps.
pub(crate) fn hodge_laplacian(
    f: &DiscreteForm,
    up: impl Fn(&DiscreteForm) -> DiscreteForm,
    down: impl Fn(&DiscreteForm) -> DiscreteForm,
) -> DiscreteForm {
    let deg = f.degree();
    let mut out = DiscreteForm::zeros(f.grid(), deg);
    if matches!(deg, Degree::One | Degree::Two) {
        out = out.add(&up(&down(f)));
    }
    if matches!(deg, Degree::Zero | Degree::One) {
        out = out.add(&down(&up(f)));
    }
    out
}

/// Discrete Laplacian `Δ^c = d^cδ^c + δ^cd^c`.
pub fn laplacian(f: &DiscreteForm) -> DiscreteForm {
    hodge_laplacian(f, d, delta)
}

/// The four sums making up `⟨∂V, X⟩` for a 1-form `X`:
/// `[Σ_k X¹_{k,1}, Σ_s X²_{τN,s}, Σ_k X¹_{k,τM}, Σ_s X²_{1,s}]`.
pub fn boundary_terms(x: &DiscreteForm) -> Result<[Mat2C; 4]> {
    let (n, m) = (x.grid().n() as i64, x.grid().m() as i64);
    let sum = |cells: Vec<Cell>| -> Result<Mat2C> {
        cells.into_iter().try_fold(Mat2C::ZERO, |acc, c| Ok(acc + pairing(x, c)?))
    };
    Ok([
        sum((1..=n).map(|k| Cell::Edge1(k, 1)).collect())?,
        sum((1..=m).map(|s| Cell::Edge2(n + 1, s)).collect())?,
        sum((1..=n).map(|k| Cell::Edge1(k, m + 1)).collect())?,
        sum((1..=m).map(|s| Cell::Edge2(1, s)).collect())?,
    ])
}

/// `⟨∂V, f ∪ ⋆g⟩` for `f` of degree `r ∈ {0, 1}` and `g` of degree `r + 1`.
/// Vanishes on the torus.
pub fn boundary_pairing(f: &DiscreteForm, g: &DiscreteForm) -> Result<Mat2C> {
    check_grids(f, g)?;
    let r = f.degree().as_u8();
    if r > 1 || g.degree().as_u8() != r + 1 {
        return Err(Error::DegreeMismatch {
            expected: format!("({r}, {})", r + 1),
            found: g.degree().as_u8(),
        });
    }
    let [bottom, right, top, left] = boundary_terms(&cup(f, &star(g))?)?;
    Ok((bottom - top) + (right - left))
}
