//! Block-matrix form of the discrete Yang-Mills equations on the 2×2 torus.
//!
//! Cochains are flattened into row vectors of matrices in fixed orders:
//!
//! ```text
//! [x] = [V] = [F]: (1,1) (2,1) (1,2) (2,2)
//! [e] = [A]:       e¹₁₁ e¹₂₁ e²₁₂ e²₁₁ e¹₁₂ e¹₂₂ e²₂₂ e²₂₁
//! ```
//!
//! Integer stencil matrices act on these by scalar multiplication of the
//! matrix entries; the diagonal `I_A` multiplies from the left in
//! `I_A D₁ S [F]ᵀ` and from the right in `[F] S D₂ I_A`.

use serde::Serialize;

use crate::algebra::Mat2C;
use crate::cochain::{pairing, Cell, Degree, DiscreteForm, TorusGrid};
use crate::error::{Error, Result};
use crate::exterior::{cup, d, star, star_star};
use crate::yang_mills::{curvature, Connection, Equation};

/// Which basis a [`BlockVector`] is laid out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockOrder {
    /// Vertices or faces, `[x]` / `[V]`.
    Cells,
    /// Edges, `[e]`.
    Edges,
}

/// An ordered list of matrices, one per basis element.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockVector {
    pub order: BlockOrder,
    pub entries: Vec<Mat2C>,
}

impl BlockVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs_diff(&self, other: &BlockVector) -> f64 {
        if self.order != other.order || self.len() != other.len() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }
}

/// A dense integer matrix with entries in `{-1, 0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StencilMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i8>>,
}

impl StencilMatrix {
    fn from_rows<const C: usize>(rows: &[[i8; C]]) -> Self {
        StencilMatrix {
            rows: rows.len(),
            cols: C,
            entries: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    fn zeros(rows: usize, cols: usize) -> Self {
        StencilMatrix {
            rows,
            cols,
            entries: vec![vec![0; cols]; rows],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.entries[r][c]
    }

    /// `M v` for a column of matrices.
    pub fn apply(&self, v: &[Mat2C]) -> Vec<Mat2C> {
        assert_eq!(v.len(), self.cols);
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).fold(Mat2C::ZERO, |acc, (w, x)| acc + x.scale(*w as f64)))
            .collect()
    }

    /// `v M` for a row of matrices.
    pub fn apply_left(&self, v: &[Mat2C]) -> Vec<Mat2C> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|c| (0..self.rows).fold(Mat2C::ZERO, |acc, r| acc + v[r].scale(self.entries[r][c] as f64)))
            .collect()
    }

    pub fn matmul(&self, other: &StencilMatrix) -> Vec<Vec<i64>> {
        assert_eq!(self.cols, other.rows);
        (0..self.rows)
            .map(|r| {
                (0..other.cols)
                    .map(|c| (0..self.cols).map(|i| self.get(r, i) as i64 * other.get(i, c) as i64).sum())
                    .collect()
            })
            .collect()
    }
}

/// The constant matrices `D`, `S`, `D₁`, `D₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StencilSet {
    pub d: StencilMatrix,
    pub s: StencilMatrix,
    pub d1: StencilMatrix,
    pub d2: StencilMatrix,
}

/// The four constant matrices for the 2×2 torus, as printed.
pub fn torus_2x2_matrices() -> StencilSet {
    StencilSet {
        d: StencilMatrix::from_rows(&[
            [-1, 1, 0, 0],
            [1, -1, 0, 0],
            [1, 0, -1, 0],
            [-1, 0, 1, 0],
            [0, 0, -1, 1],
            [0, 0, 1, -1],
            [0, 1, 0, -1],
            [0, -1, 0, 1],
        ]),
        s: StencilMatrix::from_rows(&[[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]),
        d1: StencilMatrix::from_rows(&[
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
        ]),
        d2: StencilMatrix::from_rows(&[
            [1, 0, 0, 1, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 0, 1],
            [0, 0, 1, 0, 1, 0, 0, 0],
            [0, 0, 0, 0, 0, 1, 1, 0],
        ]),
    }
}

/// An ordering of the edges of a grid: `(component, k0, s0)` per slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrdering {
    grid: TorusGrid,
    slots: Vec<(usize, usize, usize)>,
}

impl EdgeOrdering {
    /// `[e¹₁₁ e¹₂₁ e²₁₂ e²₁₁ e¹₁₂ e¹₂₂ e²₂₂ e²₂₁]` on the 2×2 torus.
    pub fn torus_2x2() -> Self {
        let labels = [(1, 1, 1), (1, 2, 1), (2, 1, 2), (2, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2), (2, 2, 1)];
        EdgeOrdering {
            grid: TorusGrid::new(2, 2).expect("2x2"),
            slots: labels.iter().map(|&(c, k, s)| (c - 1, k - 1, s - 1)).collect(),
        }
    }

    /// Component-major, then storage order (`k` fastest).
    pub fn canonical(grid: TorusGrid) -> Self {
        let slots = (0..2).flat_map(|c| grid.iter_cells().map(move |(k, s)| (c, k, s))).collect();
        EdgeOrdering { grid, slots }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn slots(&self) -> &[(usize, usize, usize)] {
        &self.slots
    }

    fn cell(&self, i: usize) -> Cell {
        let (c, k, s) = self.slots[i];
        let (k, s) = (k as i64 + 1, s as i64 + 1);
        if c == 0 {
            Cell::Edge1(k, s)
        } else {
            Cell::Edge2(k, s)
        }
    }

    /// Reads a 1-form into this order.
    pub fn flatten(&self, f: &DiscreteForm) -> BlockVector {
        assert_eq!(f.degree(), Degree::One);
        BlockVector {
            order: BlockOrder::Edges,
            entries: self.slots.iter().map(|&(c, k, s)| f.get(c, k, s)).collect(),
        }
    }
}

fn cell_vector(f: &DiscreteForm) -> BlockVector {
    BlockVector {
        order: BlockOrder::Cells,
        entries: f.grid().iter_cells().map(|(k, s)| f.get(0, k, s)).collect(),
    }
}

fn unit_vertex(grid: TorusGrid, flat: usize, degree: Degree) -> DiscreteForm {
    let mut f = DiscreteForm::zeros(grid, degree);
    let (k, s) = (flat % grid.n(), flat / grid.n());
    f.set(0, k as i64 + 1, s as i64 + 1, Mat2C::IDENTITY);
    f
}

fn unit_edge(order: &EdgeOrdering, i: usize) -> DiscreteForm {
    let mut f = DiscreteForm::zeros(order.grid, Degree::One);
    let (c, k, s) = order.slots[i];
    f.set(c, k as i64 + 1, s as i64 + 1, Mat2C::IDENTITY);
    f
}

fn as_scalar(m: Mat2C) -> i8 {
    let v = m.0[0].re;
    debug_assert!((m - Mat2C::IDENTITY.scale(v)).max_abs() == 0.0, "probe is not a scalar multiple of I");
    v as i8
}

/// Generates `D`, `S`, `D₁`, `D₂` for any grid and edge order by probing the
/// operators with unit cochains. Cells are taken in storage order.
pub fn generate_matrices(order: &EdgeOrdering) -> StencilSet {
    let grid = order.grid;
    let (nc, ne) = (grid.cells(), 2 * grid.cells());
    let vertex = |x: usize| {
        let (k, s) = (x % grid.n(), x / grid.n());
        Cell::Vertex(k as i64 + 1, s as i64 + 1)
    };
    let mut set = StencilSet {
        d: StencilMatrix::zeros(ne, nc),
        s: StencilMatrix::zeros(nc, nc),
        d1: StencilMatrix::zeros(ne, nc),
        d2: StencilMatrix::zeros(nc, ne),
    };
    for x in 0..nc {
        let phi = unit_vertex(grid, x, Degree::Zero);
        let dphi = d(&phi);
        for e in 0..ne {
            set.d.entries[e][x] = as_scalar(pairing(&dphi, order.cell(e)).expect("degree 1"));
            let a = unit_edge(order, e);
            let left = cup(&a, &phi).expect("1 ∪ 0");
            let right = cup(&phi, &a).expect("0 ∪ 1");
            set.d1.entries[e][x] = as_scalar(pairing(&left, order.cell(e)).expect("degree 1"));
            set.d2.entries[x][e] = as_scalar(pairing(&right, order.cell(e)).expect("degree 1"));
        }
        // Row x of S holds where the face x lands under ⋆: [⋆F] = [F] S.
        let st = star(&unit_vertex(grid, x, Degree::Two));
        for j in 0..nc {
            set.s.entries[x][j] = as_scalar(pairing(&st, vertex(j)).expect("degree 0"));
        }
    }
    set
}

/// `([A], [F], [⋆⋆A])` in the given edge order.
pub fn flatten_with(a: &Connection, order: &EdgeOrdering) -> Result<(BlockVector, BlockVector, BlockVector)> {
    if a.grid() != order.grid {
        return Err(Error::GridMismatch {
            expected: order.grid.to_string(),
            found: a.grid().to_string(),
        });
    }
    let f = curvature(a).form;
    Ok((order.flatten(a.form()), cell_vector(&f), order.flatten(&star_star(a.form()))))
}

/// `([A], [F], [⋆⋆A])` on the 2×2 torus.
pub fn flatten(a: &Connection) -> Result<(BlockVector, BlockVector, BlockVector)> {
    flatten_with(a, &EdgeOrdering::torus_2x2())
}

/// Evaluates `D S [F]ᵀ + I_A D₁ S [F]ᵀ ∓ ([F] S D₂ I_•)ᵀ` with `I_• = I_A`
/// for `d_A⋆F` (minus) and `I_{⋆⋆A}` for `δ_A F` (plus).
///
/// `S [F]ᵀ` is read as the column form of `[⋆F] = [F] S`.
pub fn matrix_residual_with(
    a: &Connection,
    eq: Equation,
    order: &EdgeOrdering,
    mats: &StencilSet,
) -> Result<BlockVector> {
    let (av, fv, ssa) = flatten_with(a, order)?;
    let star_f = mats.s.apply_left(&fv.entries);
    let diff = mats.d.apply(&star_f);
    let target = mats.d1.apply(&star_f);
    let base = mats.d2.apply_left(&star_f);
    let entries = (0..av.len())
        .map(|e| {
            let left = av.entries[e] * target[e];
            match eq {
                Equation::Dstar => diff[e] + left - base[e] * av.entries[e],
                Equation::Delta => diff[e] + left + base[e] * ssa.entries[e],
            }
        })
        .collect();
    Ok(BlockVector {
        order: BlockOrder::Edges,
        entries,
    })
}

/// The matrix residual on the 2×2 torus with the printed constants.
pub fn matrix_residual(a: &Connection, eq: Equation) -> Result<BlockVector> {
    matrix_residual_with(a, eq, &EdgeOrdering::torus_2x2(), &torus_2x2_matrices())
}
