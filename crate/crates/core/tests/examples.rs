macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(su2_algebra);
example!(flat_calculus);
example!(curvature_and_residuals);
example!(torus_matrix_form);
example!(solve_yang_mills);
example!(verify_suite);

#[test]
fn su2_algebra_example_runs() {
    assert!(su2_algebra::run_example() <= 1e-14);
}

#[test]
fn flat_calculus_example_runs() {
    assert!(flat_calculus::run_example() <= 1e-12);
}

#[test]
fn curvature_and_residuals_example_runs() {
    assert!(curvature_and_residuals::run_example() <= 1e-13);
}

#[test]
fn torus_matrix_form_example_runs() {
    assert!(torus_matrix_form::run_example() <= 1e-13);
}

#[test]
fn solve_yang_mills_example_runs() {
    assert!(solve_yang_mills::run_example() <= 1e-10);
}

#[test]
fn verify_suite_example_runs() {
    assert!(verify_suite::run_example());
}
