// Every invariant suite on a few small grids, printed as one line per check.

use torus_ym::verify::{run, VerifyConfig};

pub fn run_example() -> bool {
    let mut config = VerifyConfig::standard(42);
    config.grids.truncate(3);
    config.trials = 20;
    let report = run(&config);
    print!("{}", report.summary());
    let worst = report
        .diagnostics
        .iter()
        .map(|d| d.laplacian_inner_re)
        .fold(f64::INFINITY, f64::min);
    println!("smallest Re (Δ_A f, f) over su(2) samples: {worst:.3e}");
    report.passed()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
