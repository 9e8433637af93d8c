// Curvature of a connection and the residuals of both forms of the discrete
// Yang-Mills equations, each computed twice: from the explicit difference
// stencils and by composing operators.

use torus_ym::yang_mills::{
    curvature, residual_delta, residual_delta_via_operators, residual_dstar, residual_dstar_via_operators,
    Connection, DeltaAMode,
};
use torus_ym::{Su2Coords, TorusGrid};

pub fn run_example() -> f64 {
    let grid = TorusGrid::new(4, 4).expect("valid grid");

    let a = Connection::random(grid, 0.5, 11);
    let f = curvature(&a);
    println!("random A: max |F| = {:.6}, su(2) deviation of F = {:e}", f.form.max_abs(), f.su2_deviation_max);

    let dstar = residual_dstar(&a);
    let delta = residual_delta(&a);
    let e1 = dstar.max_abs_diff(&residual_dstar_via_operators(&a));
    let e2 = delta.max_abs_diff(&residual_delta_via_operators(&a, DeltaAMode::Covariant));
    println!("d_A⋆F: max |R| = {:.6}, stencil vs operators {e1:e}", dstar.max_abs());
    println!("δ_A F: max |R| = {:.6}, stencil vs operators {e2:e}", delta.max_abs());

    // A constant connection along one su(2) direction is flat, hence Yang-Mills.
    let flat = Connection::constant(grid, Su2Coords::new(0.2, 0.4, 0.0), Su2Coords::new(-0.3, -0.6, 0.0));
    let flat_res = residual_delta(&flat).max_abs().max(residual_dstar(&flat).max_abs());
    println!("commuting constant A: max |F| = {:e}, max residual = {flat_res:e}", curvature(&flat).form.max_abs());

    e1.max(e2).max(flat_res)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
