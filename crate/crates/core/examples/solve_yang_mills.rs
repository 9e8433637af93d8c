// Finding a discrete Yang-Mills connection on the 2×2 torus by minimizing
// the residual norm from a small random start.

use torus_ym::solver::{solve, InitSpec, SolverConfig};
use torus_ym::yang_mills::curvature;
use torus_ym::TorusGrid;

pub fn run_example() -> f64 {
    let grid = TorusGrid::new(2, 2).expect("valid grid");
    let config = SolverConfig::new(grid, InitSpec::Random { scale: 0.05, seed: 3 });
    let (a, trace) = solve(&config).expect("valid config");

    for r in trace.records.iter().step_by(50) {
        println!("iter {:>4}  objective {:.3e}  |grad| {:.3e}", r.iter, r.objective, r.grad_norm);
    }
    println!(
        "{:?} after {} iterations, objective {:.3e}",
        trace.status,
        trace.iterations(),
        trace.final_objective()
    );
    // Whether the limit is flat is reported, not assumed.
    println!("max |F| at the solution = {:.3e}", curvature(&a).form.max_abs());
    trace.final_objective()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
