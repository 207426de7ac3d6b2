//! Hyperelastic wave equation with a dictionary-expanded stored energy:
//! forward operator, Fréchet derivative, adjoint, projected Landweber
//! inversion and a verification harness.
//!
//! Fields live on regular grids of the unit box with homogeneous Dirichlet
//! data; time stepping is explicit leapfrog throughout.

pub mod adjoint;
pub mod config;
pub mod dictionary;
pub mod error;
pub mod forward;
pub mod grid;
pub mod inversion;
pub mod io;
pub mod operator;
pub mod scenarios;
pub mod sensitivity;
pub mod verify;

pub use dictionary::{
    check_admissible, check_dim_condition, combine, kappa_mu, stability_constants,
    AdmissibilityThresholds, CoefficientVector, EnergyDictionary, EnergyEntry, EnergyFamily,
    SpatialWeight,
};
pub use error::{Error, Result};
pub use forward::{solve_forward, ProblemSetup, SolveReport};
pub use grid::{Grid, MaterialField, SpaceTimeField};
