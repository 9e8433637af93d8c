//! Discrete exterior calculus with 2×2 complex matrix coefficients on an
//! N×M combinatorial torus, the discrete Yang-Mills operators built on it,
//! the explicit block-matrix form of the equations on the 2×2 torus, and a
//! residual-minimizing solver for discrete Yang-Mills connections.

pub mod algebra;
pub mod cli;
pub mod cochain;
pub mod error;
pub mod exterior;
pub mod matrix_form;
pub mod solver;
pub mod verify;
pub mod yang_mills;

pub use algebra::{Mat2C, Su2Coords};
pub use cochain::{Cell, Degree, DiscreteForm, FormInit, TorusGrid};
pub use error::{Error, Result};
pub use yang_mills::{Connection, Equation};
