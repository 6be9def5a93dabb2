//! Coupled time integration: one state holding both protein fields and the
//! health density, advanced by classic RK4 under CFL and positivity step
//! control.
//!
//! A step is accepted only if no entry fell below -1e-12 and the transport
//! CFL bound still holds for the new state; otherwise the step is retried
//! at half the size down to `dt_min`. Accepted values in [-1e-12, 0) are
//! clamped to zero and counted. Everything is sequential and in fixed
//! order, so a run is bit-reproducible.

use std::time::Instant;

use serde::Serialize;

use crate::aggregation::{abeta_rhs, tau_rhs, AggregationParams, ProteinField};
use crate::error::{Error, Result};
use crate::graph::{BrainGraph, LaplacianOperator, WeightFamily};
use crate::health::{amyloid_source, face_velocities, flux_divergence, DeteriorationParams, HealthDensity};

/// Negative values no larger than this (in magnitude) are treated as
/// round-off and clamped to zero; anything lower rejects the step.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// The coupled unknowns at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: ProteinField,
    pub tau: ProteinField,
    pub f: HealthDensity,
    /// Accepted steps so far.
    pub steps: u64,
    /// Total entries clamped from [-1e-12, 0) to zero so far.
    pub clamp_count: u64,
}

impl SimState {
    pub fn num_vertices(&self) -> usize {
        self.u.num_vertices()
    }
}

/// Derivative of a [`SimState`] (congruent layout, no time/counters).
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub du: ProteinField,
    pub dtau: ProteinField,
    pub df: Vec<f64>,
}

impl StateDerivative {
    fn zeros(num_vertices: usize, num_cells: usize) -> Self {
        Self {
            du: ProteinField::zeros(num_vertices),
            dtau: ProteinField::zeros(num_vertices),
            df: vec![0.0; num_vertices * num_cells],
        }
    }
}

/// How the integrator reacts to a rejected step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// Take `dt_init` steps unconditionally; violations are hard errors.
    Fixed,
    /// Halve the step on CFL or positivity violation, down to `dt_min`.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_max: f64,
    pub snapshot_interval: f64,
    pub mode: StepMode,
}

impl Default for IntegratorConfig {
    /// The horizon is long enough for the full rise-peak-decline pattern of
    /// the soluble curves: global amyloid monomers peak near t = 90 under
    /// the default rates, well after the seeding pulse at t = 10.
    fn default() -> Self {
        Self {
            t_end: 300.0,
            dt_init: 0.01,
            dt_min: 1e-7,
            dt_max: 0.05,
            cfl_max: 0.9,
            snapshot_interval: 0.25,
            mode: StepMode::Adaptive,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be > 0 (got {})", self.t_end)));
        }
        if !(0.0 < self.dt_min && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::Config(format!(
                "need 0 < dt_min <= dt_init <= dt_max (got {}, {}, {})",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.cfl_max > 0.0 && self.cfl_max <= 1.0) {
            return Err(Error::Config(format!(
                "cfl_max must lie in (0, 1] (got {})",
                self.cfl_max
            )));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::Config(format!(
                "snapshot_interval must be > 0 (got {})",
                self.snapshot_interval
            )));
        }
        Ok(())
    }
}

/// Immutable per-run context: graph, operators, parameters.
pub struct Simulation<'g> {
    graph: &'g BrainGraph,
    seed_mask: Vec<bool>,
    aggregation: AggregationParams,
    deterioration: DeteriorationParams,
    lap_conn: LaplacianOperator<'g>,
    lap_prox: LaplacianOperator<'g>,
}

impl<'g> Simulation<'g> {
    pub fn new(
        graph: &'g BrainGraph,
        aggregation: AggregationParams,
        deterioration: DeteriorationParams,
    ) -> Result<Self> {
        aggregation.validate()?;
        deterioration.validate()?;
        if aggregation.seed_amplitude > 0.0 && graph.seed_set().is_empty() {
            return Err(Error::Config(
                "scenario has tau seeding (c > 0) but the graph has no seed vertices \
                 (no label matches the seed markers)"
                    .into(),
            ));
        }
        Ok(Self {
            graph,
            seed_mask: graph.seed_mask(),
            aggregation,
            deterioration,
            lap_conn: graph.laplacian(WeightFamily::Connectivity),
            lap_prox: graph.laplacian(WeightFamily::Proximity),
        })
    }

    pub fn graph(&self) -> &BrainGraph {
        self.graph
    }

    pub fn aggregation(&self) -> &AggregationParams {
        &self.aggregation
    }

    pub fn deterioration(&self) -> &DeteriorationParams {
        &self.deterioration
    }

    /// Full coupled derivative at (t, u, tau, f): amyloid production from
    /// the health density, both protein systems, then the deterioration
    /// velocities and the transport flux divergence.
    pub fn coupled_rhs(
        &self,
        t: f64,
        u: &ProteinField,
        tau: &ProteinField,
        f: &HealthDensity,
        out: &mut StateDerivative,
    ) -> Result<()> {
        let n = self.graph.num_vertices();
        let num_cells = f.num_cells();

        let mut monomer_source = vec![0.0; n];
        for (m, source) in monomer_source.iter_mut().enumerate() {
            *source = amyloid_source(f.vertex(m), &self.deterioration);
        }

        abeta_rhs(u, &monomer_source, &self.aggregation, &self.lap_prox, &mut out.du)?;
        tau_rhs(tau, u, t, &self.aggregation, &self.lap_conn, &self.seed_mask, &mut out.dtau)?;

        let mut faces = vec![0.0; num_cells + 1];
        for m in 0..n {
            let row = f.vertex(m);
            if let Some(k) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::StateCorruption {
                    field: "health density",
                    vertex: m,
                    component: k,
                });
            }
            face_velocities(row, u.vertex(m), tau.vertex(m), &self.deterioration, &mut faces);
            flux_divergence(row, &faces, &mut out.df[m * num_cells..(m + 1) * num_cells]);
        }
        Ok(())
    }

    /// Largest deterioration velocity over all vertices and faces.
    pub fn max_face_velocity(&self, u: &ProteinField, tau: &ProteinField, f: &HealthDensity) -> f64 {
        let num_cells = f.num_cells();
        let mut faces = vec![0.0; num_cells + 1];
        let mut v_max = 0.0f64;
        for m in 0..self.graph.num_vertices() {
            face_velocities(f.vertex(m), u.vertex(m), tau.vertex(m), &self.deterioration, &mut faces);
            v_max = faces.iter().copied().fold(v_max, f64::max);
        }
        v_max
    }

    /// Advance to `config.t_end`, returning the snapshot sequence (the
    /// initial state, every multiple of the snapshot interval, and the
    /// final state).
    pub fn advance(&self, initial: SimState, config: &IntegratorConfig) -> Result<SimRun> {
        config.validate()?;
        let wall_start = Instant::now();
        let mut state = initial;
        let n = state.num_vertices();
        let num_cells = state.f.num_cells();
        let da = state.f.cell_width();

        let mut k1 = StateDerivative::zeros(n, num_cells);
        let mut k2 = StateDerivative::zeros(n, num_cells);
        let mut k3 = StateDerivative::zeros(n, num_cells);
        let mut k4 = StateDerivative::zeros(n, num_cells);

        let mut snapshots = vec![state.clone()];
        let mut snap_index: u64 = 1;

        // boundary steps assign t exactly, so exact comparisons are sound
        while state.t < config.t_end {
            let next_snap =
                (snap_index as f64 * config.snapshot_interval).min(config.t_end);
            let remaining = next_snap - state.t;

            let mut dt = match config.mode {
                StepMode::Fixed => config.dt_init,
                StepMode::Adaptive => {
                    let mut dt = config.dt_init.min(config.dt_max);
                    let v_max = self.max_face_velocity(&state.u, &state.tau, &state.f);
                    if v_max > 0.0 {
                        dt = dt.min(config.cfl_max * da / v_max);
                    }
                    dt
                }
            };
            let aimed_at_boundary = dt >= remaining;
            if aimed_at_boundary {
                dt = remaining;
            }

            loop {
                let candidate = self.rk4_step(&state, dt, &mut k1, &mut k2, &mut k3, &mut k4)?;
                match self.check_step(&candidate, dt, da, config) {
                    Ok(()) => {
                        let mut accepted = candidate;
                        accepted.clamp_count += clamp_small_negatives(&mut accepted);
                        accepted.t = if aimed_at_boundary && dt == remaining {
                            next_snap
                        } else {
                            state.t + dt
                        };
                        accepted.steps += 1;
                        state = accepted;
                        break;
                    }
                    Err(violation) => match config.mode {
                        StepMode::Fixed => return Err(violation),
                        StepMode::Adaptive => {
                            dt /= 2.0;
                            if dt < config.dt_min {
                                return Err(Error::StepSizeUnderflow {
                                    t: state.t,
                                    dt_min: config.dt_min,
                                });
                            }
                        }
                    },
                }
            }

            if state.t == next_snap {
                snapshots.push(state.clone());
                snap_index = (next_snap / config.snapshot_interval).round() as u64 + 1;
            }
        }

        Ok(SimRun {
            wall_time_s: wall_start.elapsed().as_secs_f64(),
            final_clamp_count: state.clamp_count,
            final_steps: state.steps,
            snapshots,
        })
    }

    fn rk4_step(
        &self,
        state: &SimState,
        dt: f64,
        k1: &mut StateDerivative,
        k2: &mut StateDerivative,
        k3: &mut StateDerivative,
        k4: &mut StateDerivative,
    ) -> Result<SimState> {
        let half = dt / 2.0;
        self.coupled_rhs(state.t, &state.u, &state.tau, &state.f, k1)?;
        let s2 = offset_state(state, k1, half);
        self.coupled_rhs(state.t + half, &s2.0, &s2.1, &s2.2, k2)?;
        let s3 = offset_state(state, k2, half);
        self.coupled_rhs(state.t + half, &s3.0, &s3.1, &s3.2, k3)?;
        let s4 = offset_state(state, k3, dt);
        self.coupled_rhs(state.t + dt, &s4.0, &s4.1, &s4.2, k4)?;

        let sixth = dt / 6.0;
        let mut next = state.clone();
        for m in 0..state.num_vertices() {
            let u = next.u.vertex_mut(m);
            for i in 0..5 {
                u[i] += sixth
                    * (k1.du.vertex(m)[i]
                        + 2.0 * k2.du.vertex(m)[i]
                        + 2.0 * k3.du.vertex(m)[i]
                        + k4.du.vertex(m)[i]);
            }
            let tau = next.tau.vertex_mut(m);
            for i in 0..5 {
                tau[i] += sixth
                    * (k1.dtau.vertex(m)[i]
                        + 2.0 * k2.dtau.vertex(m)[i]
                        + 2.0 * k3.dtau.vertex(m)[i]
                        + k4.dtau.vertex(m)[i]);
            }
        }
        let fv = next.f.values_mut();
        for (idx, value) in fv.iter_mut().enumerate() {
            *value += sixth
                * (k1.df[idx] + 2.0 * k2.df[idx] + 2.0 * k3.df[idx] + k4.df[idx]);
        }
        Ok(next)
    }

    fn check_step(
        &self,
        candidate: &SimState,
        dt: f64,
        da: f64,
        config: &IntegratorConfig,
    ) -> Result<()> {
        let min_entry = candidate
            .u
            .min_entry()
            .min(candidate.tau.min_entry())
            .min(candidate.f.min_entry());
        if min_entry < -NEGATIVITY_TOLERANCE {
            return Err(Error::StepRejected {
                t: candidate.t,
                min: min_entry,
            });
        }
        let v_max = self.max_face_velocity(&candidate.u, &candidate.tau, &candidate.f);
        if v_max > 0.0 && dt > config.cfl_max * da / v_max {
            return Err(Error::CflViolation {
                dt,
                bound: config.cfl_max * da / v_max,
            });
        }
        Ok(())
    }
}

fn offset_state(
    state: &SimState,
    k: &StateDerivative,
    h: f64,
) -> (ProteinField, ProteinField, HealthDensity) {
    let mut u = state.u.clone();
    let mut tau = state.tau.clone();
    let mut f = state.f.clone();
    for m in 0..state.num_vertices() {
        let um = u.vertex_mut(m);
        let km = k.du.vertex(m);
        for i in 0..5 {
            um[i] += h * km[i];
        }
        let tm = tau.vertex_mut(m);
        let km = k.dtau.vertex(m);
        for i in 0..5 {
            tm[i] += h * km[i];
        }
    }
    for (value, dk) in f.values_mut().iter_mut().zip(&k.df) {
        *value += h * dk;
    }
    (u, tau, f)
}

/// Zero out entries in [-tolerance, 0), returning how many were touched.
fn clamp_small_negatives(state: &mut SimState) -> u64 {
    let mut count = 0;
    let mut clamp = |x: &mut f64| {
        if *x < 0.0 && *x >= -NEGATIVITY_TOLERANCE {
            *x = 0.0;
            count += 1;
        }
    };
    for m in 0..state.u.num_vertices() {
        state.u.vertex_mut(m).iter_mut().for_each(&mut clamp);
    }
    for m in 0..state.tau.num_vertices() {
        state.tau.vertex_mut(m).iter_mut().for_each(&mut clamp);
    }
    state.f.values_mut().iter_mut().for_each(&mut clamp);
    count
}

/// Result of [`Simulation::advance`].
#[derive(Debug, Clone)]
pub struct SimRun {
    pub snapshots: Vec<SimState>,
    pub wall_time_s: f64,
    pub final_steps: u64,
    pub final_clamp_count: u64,
}

impl SimRun {
    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("a run records at least t = 0")
    }
}

/// Run provenance written next to the observables of every run.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub artifact: String,
    pub artifact_version: String,
    pub case_name: Option<String>,
    pub graph_source: String,
    pub num_vertices: usize,
    pub num_regions: usize,
    pub num_seed_vertices: usize,
    pub grid_cells: usize,
    pub aggregation: AggregationParams,
    pub deterioration: DeteriorationParams,
    pub integrator: IntegratorConfig,
    pub steps: u64,
    pub clamp_count: u64,
    pub snapshot_count: usize,
    pub wall_time_s: f64,
}
