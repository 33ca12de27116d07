//! Axisymmetric capillary flow solver for geodesic balls in hyperbolic and
//! spherical space.
//!
//! Hypersurfaces are radial graphs `ρ = e^{u(β)}` over the upper half-sphere of
//! the conformal half-space model, with β ∈ [0, π/2] the polar angle from the
//! symmetry axis. The crate is organised as:
//!
//! - [`spaceform`] and [`cap`]: ball and half-space models, conformal Killing
//!   fields, and the spherical-cap family of static solutions.
//! - [`grid`]: the β grid, ghost-node closures and finite differences.
//! - [`pointwise`]: closed-form support functions and mean curvature on a graph.
//! - [`flow`]: the scalar speed `G`, time stepping and the evolution driver.
//! - [`observables`]: area, wetting area, volume, energy, curvatures and
//!   Minkowski residuals.
//! - [`convergence`]: cap fitting and the isoperimetric comparison.
//! - [`config`], [`io`], [`verify`]: run configuration, output formats and the
//!   residual verification suites used by the `capflow` binary.

pub mod cap;
pub mod config;
pub mod convergence;
pub mod error;
pub mod flow;
pub mod grid;
pub mod io;
pub mod observables;
pub mod pointwise;
pub mod quadrature;
pub mod spaceform;
pub mod verify;

pub use cap::CapProfile;
pub use config::{FlowConfig, InitialProfile, RunConfig};
pub use convergence::{fit_cap, isoperimetric_check, CapFit, IsoperimetricReport};
pub use error::{ConfigError, FitError, FlowError, GeometryError};
pub use flow::{evolve, speed, stable_dt, step, Termination, Trajectory};
pub use grid::{Grid, GraphState};
pub use observables::{GraphGeometry, ObservableRecord};
pub use spaceform::{Curvature, SpaceForm};
