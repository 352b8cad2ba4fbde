//! Finite-stage approximation-by-conjugation constructions on the torus.

pub mod abc_engine;
pub mod analytic_approx;
pub mod cli;
pub mod diagnostics;
pub mod exact_torus;
pub mod tower_bounds;
