// The 2×2 torus in block-matrix form: the constant stencil matrices, the
// flattened connection and curvature, and the matrix residual checked
// against the stencil residual.

use torus_ym::matrix_form::{flatten, generate_matrices, matrix_residual, torus_2x2_matrices, EdgeOrdering};
use torus_ym::yang_mills::{Connection, Equation};
use torus_ym::TorusGrid;

pub fn run_example() -> f64 {
    let mats = torus_2x2_matrices();
    println!("D =");
    for row in &mats.d.entries {
        println!("  {row:?}");
    }
    println!("S = {:?}", mats.s.entries);
    let generated = generate_matrices(&EdgeOrdering::torus_2x2()) == mats;
    println!("operator-probed matrices match: {generated}");

    let a = Connection::random(TorusGrid::new(2, 2).expect("valid grid"), 1.0, 5);
    let (av, fv, _) = flatten(&a).expect("2x2 grid");
    println!("[A] has {} entries, [F] has {}", av.len(), fv.len());

    let order = EdgeOrdering::torus_2x2();
    let mut worst = if generated { 0.0 } else { f64::INFINITY };
    for eq in [Equation::Dstar, Equation::Delta] {
        let m = matrix_residual(&a, eq).expect("2x2 grid");
        let diff = m.max_abs_diff(&order.flatten(&eq.residual(&a)));
        println!("{}: matrix vs stencil {diff:e}", eq.name());
        worst = f64::max(worst, diff);
    }
    worst
}

#[allow(dead_code)]
fn main() {
    run_example();
}
