//! Simulator for amyloid-beta / tau proteopathy on parcellated brain graphs.
//!
//! The brain is modeled as two superposed weighted graphs over the same
//! parcel vertices: a *connectivity* graph (white-matter fiber strength,
//! carrier of intraneuronal tau spreading) and a *proximity* graph (spatial
//! closeness in the parenchyma, carrier of extracellular amyloid diffusion).
//! On every vertex live three coupled unknowns:
//!
//! * five amyloid-beta compartments (monomer, dimer, short/long oligomer,
//!   plaque) obeying truncated Smoluchowski coagulation with diffusion,
//!   clearance and a neuron-sourced production term,
//! * five misfolded-tau compartments with seeding at the entorhinal cortex
//!   and production driven by amyloid oligomers,
//! * a probability density `f(a)` over the degree of neuronal malfunction
//!   `a in [0,1]`, transported rightward by a nonlocal deterioration rate.
//!
//! All quantities are nondimensional; no physical units are attached to
//! time or concentration anywhere in the crate.
//!
//! Crate layout mirrors the moving parts: [`graph`] holds the weighted
//! Laplacians, [`connectome`] loads or synthesizes graphs, [`aggregation`]
//! and [`health`] provide the right-hand sides, [`engine`] advances the
//! coupled state with step-controlled RK4, [`observables`] reduces
//! snapshots to burden curves and disease indices, and [`scenarios`]
//! manages parameter presets and config files.

pub mod aggregation;
pub mod connectome;
pub mod engine;
pub mod error;
pub mod graph;
pub mod health;
pub mod observables;
pub mod scenarios;

pub use error::{Error, Result};
