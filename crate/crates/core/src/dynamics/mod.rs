//! Hamiltonian dynamics: exact gradients, Poisson brackets, and the flow of
//! the main Hamiltonian with scattering-data extraction.

mod flow;
mod poisson;

pub use flow::{
    conserved_quantities, extract_scattering, extract_scattering_with, integrate_flow, FlowOptions,
    ScatteringData, Trajectory, DEFAULT_WINDOW_FRACTION, STABILIZATION_TOLERANCE,
};
pub use poisson::{bracket_from_gradients, grad_observable, poisson_bracket, Gradient, Observable};
