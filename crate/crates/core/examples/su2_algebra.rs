// The coefficient algebra: su(2) coordinates, the trace pairing and the
// deviation measure used to test membership.

use torus_ym::algebra::{coords_from_su2, su2_deviation, su2_from_coords, trace_pairing, SU2_TOL};
use torus_ym::{Mat2C, Su2Coords};

pub fn run_example() -> f64 {
    let u = Su2Coords::new(0.3, -1.2, 0.5);
    let v = Su2Coords::new(2.0, 0.25, -1.0);
    let (a, b) = (su2_from_coords(u), su2_from_coords(v));
    println!("a = {a}");
    println!("b = {b}");

    // The pairing -½ tr(ab) is the Euclidean dot product of coordinates.
    let pairing = trace_pairing(&a, &b);
    println!("trace_pairing(a, b) = {pairing}, u·v = {}", u.dot(&v));

    let back = coords_from_su2(&a, SU2_TOL).expect("a is in su(2)");
    println!("coordinates recovered: {:?}", back.as_array());

    // The commutator stays in su(2); the product does not.
    let comm = a * b - b * a;
    println!("deviation of [a, b] = {:e}", su2_deviation(&comm));
    println!("deviation of ab     = {:e}", su2_deviation(&(a * b)));
    println!("deviation of I      = {:e}", su2_deviation(&Mat2C::IDENTITY));

    (pairing.re - u.dot(&v)).abs()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
