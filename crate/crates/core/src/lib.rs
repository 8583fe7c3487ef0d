//! One-dimensional random-field Ising chain with long-range couplings
//! `J(1) = j1`, `J(n) = n^(alpha - 2)`.
//!
//! The crate covers the energy functionals, an exact enumeration oracle,
//! single-site Monte Carlo, the run/triangle/contour geometry of
//! configurations and calculators for the explicit run-length bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod events;
pub mod exact;
pub mod geometry;
pub mod interval;
pub mod lattice;
pub mod mcmc;

pub use error::{Error, Result};
pub use events::{evaluate_event, EventSpec};
pub use exact::{ExactMeasure, ExactSampler};
pub use interval::Interval;
pub use lattice::{
    bulk_energy, boundary_energy, coupling, field_energy, sample_disorder, CouplingTable, DisorderField,
    DisorderKind, Model, ModelParams, Sign, SpinWindow,
};
pub use mcmc::{collect_snapshots, estimate_event, estimate_events, Chain, ChainConfig, EventEstimate, InitialState, UpdateRule};
