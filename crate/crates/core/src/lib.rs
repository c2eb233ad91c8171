//! Steady-state thermodynamics of a laser-driven four-level emitter coupled
//! to two thermal waveguides.
//!
//! The crate builds the rotating-frame Lindblad generator ([`generator`]),
//! solves for its steady state ([`solver`]), evaluates heat currents, laser
//! power, amplification factors and engine figures ([`thermo`]), and runs
//! parameter sweeps over any configuration field ([`sweep`]).

// `!(x > 0.0)` is used on purpose so NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generator;
pub mod model;
pub mod solver;
pub mod sweep;
pub mod thermo;

pub use error::{Error, Result};
pub use generator::{build_generator, build_hamiltonian, LindbladGenerator, ReducedState};
pub use model::{bose_occupation, validate, DensityMatrix, Field, SystemConfig, TransitionId};
pub use solver::{evolve, relaxation_scale, steady_state, EvolveOptions, SteadyStateReport};
pub use thermo::{heat_currents, CurrentsReport, EngineReport};
