// The flat calculus on a 3×5 torus: coboundary, Hodge star, codifferential
// and the inner product that makes them adjoint.

use torus_ym::cochain::{random_mat_form, shift_form};
use torus_ym::exterior::{d, delta, inner, laplacian, star, star_inv, star_star};
use torus_ym::{Degree, TorusGrid};

pub fn run_example() -> f64 {
    let grid = TorusGrid::new(3, 5).expect("valid grid");
    let phi = random_mat_form(grid, Degree::Zero, 1);
    let omega = random_mat_form(grid, Degree::One, 2);

    let dd = d(&d(&phi)).max_abs();
    let deltadelta = delta(&delta(&random_mat_form(grid, Degree::Two, 3))).max_abs();
    println!("max |d d Φ|   = {dd:e}");
    println!("max |δ δ Ψ|   = {deltadelta:e}");

    let roundtrip = star_inv(&star(&omega)).max_abs_diff(&omega);
    println!("max |⋆⁻¹⋆Ω − Ω| = {roundtrip:e}");

    // ⋆⋆ on 1-forms is minus a diagonal shift, not the identity.
    let shift = star_star(&omega).max_abs_diff(&shift_form(&omega, -1, -1).neg());
    println!("max |⋆⋆Ω + Ω(k−1, s−1)| = {shift:e}");

    let lhs = inner(&d(&phi), &omega).expect("same grid");
    let rhs = inner(&phi, &delta(&omega)).expect("same grid");
    println!("(dΦ, Ω) = {lhs:.12}");
    println!("(Φ, δΩ) = {rhs:.12}");

    let lap = laplacian(&phi);
    println!("max |ΔΦ| = {:.6}", lap.max_abs());

    dd.max(deltadelta).max(roundtrip).max(shift).max((lhs - rhs).norm())
}

#[allow(dead_code)]
fn main() {
    run_example();
}
