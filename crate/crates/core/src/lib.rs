//! Phase-space dynamics of open quantum systems in one dimension.
//!
//! The library propagates Wigner distribution functions exactly for
//! time-dependent quadratic potentials by following classical
//! characteristics, evaluates influence phases for harmonic environments
//! coupled linearly to a system of interest, and implements the
//! high-temperature quantum Brownian motion limit (Ornstein-Uhlenbeck
//! momentum propagator, effective-temperature law, Maxwell-Boltzmann
//! thermalization) together with a Langevin Monte Carlo estimator of the
//! reduced phase-space propagator.
//!
//! Everything is organized around a few carriers:
//!
//! * [`potential::QuadraticPotential`] - time-dependent coefficients of
//!   `V(x,t) = a(t) + b(t) x + c(t) x^2`.
//! * [`classical::AffineSymplecticMap`] - the classical flow
//!   `(x_a, p_a) -> (x_b, p_b)` as a 2x2 matrix plus drift.
//! * [`states::GaussianWignerState`] / [`states::GridWignerState`] -
//!   exact Gaussian states and sampled grids.
//! * [`influence::InfluencePhase`] - complex action-valued influence
//!   phases for single oscillators, collections and continuum baths.
//! * [`caldeira::MomentumKernel`] - the closed-form reduced momentum
//!   propagator of the ohmic high-temperature limit.
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (grid transforms, double-time quadrature, Monte Carlo ensembles) run
//! on rayon; results are bitwise independent of the worker count because
//! every reduction uses a fixed, index-ordered summation. Building with
//! `--no-default-features` yields a dependency-free sequential core with
//! identical results.

pub mod caldeira;
pub mod classical;
pub mod exec;
pub mod grid;
pub mod influence;
pub mod interp;
pub mod io;
pub mod liouville;
pub mod potential;
pub mod propagator;
pub mod quadrature;
pub mod states;

pub use classical::{
    classical_action, classical_action_boundary, classical_trajectory, flow_map,
    solve_homogeneous, AffineSymplecticMap, ClassicalTrajectory, HomogeneousBasis,
};
pub use potential::{Coefficient, QuadraticPotential};
