//! Damped Euler-Bernoulli beam with end springs and dampers: Hermite finite
//! elements in space, three-level backward differences in time, energy
//! diagnostics and explicit exponential decay envelopes.

pub mod banded;
pub mod bounds;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod pipeline;
pub mod poly;
pub mod problem;
pub mod stepper;
pub mod sweep;
pub mod verify;

pub use bounds::{BoundReport, DecayBound, EnvelopeReport, Regime};
pub use diagnostics::{CurvatureMode, EnergyTrace};
pub use error::{Error, Result};
pub use fem::{Mesh, SemiDiscreteSystem};
pub use problem::{BeamProblem, Preset};
pub use stepper::{Resolution, SolutionTrace, TimeGrid, TimeStepRule};
