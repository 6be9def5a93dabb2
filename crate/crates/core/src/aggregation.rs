//! Right-hand sides of the ten coagulation-diffusion equations: five
//! amyloid-beta compartments on the proximity graph and five misfolded-tau
//! compartments on the connectivity graph.
//!
//! Compartments (1-based in the math, 0-based here): monomer, dimer, short
//! oligomer, long oligomer, plaque/tangle. The top compartment is lumped:
//! it collects every coalescence whose combined length reaches 5, never
//! diffuses, and is never cleared. The loss sum of a soluble compartment
//! runs over all five partners, so attachment to an existing plaque removes
//! the soluble species without adding tracked plaque mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianOperator;

pub const NUM_COMPARTMENTS: usize = 5;

/// Per-vertex compartment concentrations for one protein.
#[derive(Debug, Clone, PartialEq)]
pub struct ProteinField {
    values: Vec<[f64; NUM_COMPARTMENTS]>,
}

impl ProteinField {
    pub fn zeros(num_vertices: usize) -> Self {
        Self {
            values: vec![[0.0; NUM_COMPARTMENTS]; num_vertices],
        }
    }

    /// Uniform monomer level, all other compartments zero.
    pub fn uniform_monomer(num_vertices: usize, level: f64) -> Self {
        let mut field = Self::zeros(num_vertices);
        for v in &mut field.values {
            v[0] = level;
        }
        field
    }

    pub fn num_vertices(&self) -> usize {
        self.values.len()
    }

    pub fn vertex(&self, m: usize) -> &[f64; NUM_COMPARTMENTS] {
        &self.values[m]
    }

    pub fn vertex_mut(&mut self, m: usize) -> &mut [f64; NUM_COMPARTMENTS] {
        &mut self.values[m]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, [f64; NUM_COMPARTMENTS]> {
        self.values.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, [f64; NUM_COMPARTMENTS]> {
        self.values.iter_mut()
    }

    pub fn min_entry(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Column of one compartment across vertices (Laplacian input layout).
    pub fn compartment_column(&self, i: usize, out: &mut [f64]) {
        for (m, v) in self.values.iter().enumerate() {
            out[m] = v[i];
        }
    }

    fn check_finite(&self, field: &'static str) -> Result<()> {
        for (m, v) in self.values.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::StateCorruption {
                        field,
                        vertex: m,
                        component: i,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Kinetic parameters shared by the two protein systems.
///
/// `diffusivity[i]` and `clearance[i]` follow the 1/(i+1) profile over the
/// four soluble compartments; the lumped top compartment neither diffuses
/// nor clears, and tau is never cleared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregationParams {
    /// Amyloid coalescence probability (alpha).
    pub alpha: f64,
    /// Tau coalescence probability (gamma).
    pub gamma: f64,
    /// Soluble-compartment diffusivities d_i.
    pub diffusivity: [f64; 4],
    /// Amyloid soluble-compartment clearance rates sigma_i.
    pub clearance: [f64; 4],
    /// Amyloid time-scale factor (epsilon); divides every amyloid equation.
    pub epsilon: f64,
    /// Tau seeding amplitude (c).
    pub seed_amplitude: f64,
    /// Tau seeding time scale (lambda).
    pub seed_timescale: f64,
    /// Amyloid-to-tau coupling strength (C_tau).
    pub coupling: f64,
    /// Oligomer-burden threshold for the coupling term (U-bar).
    pub coupling_threshold: f64,
}

impl Default for AggregationParams {
    /// Fixed table values with the disease drivers (`alpha`, `coupling`,
    /// `seed_amplitude`) switched off; scenario presets fill those in.
    fn default() -> Self {
        Self {
            alpha: 0.0,
            gamma: 4.0,
            diffusivity: [1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0],
            clearance: [1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0],
            epsilon: 0.1,
            seed_amplitude: 0.0,
            seed_timescale: 10.0,
            coupling: 0.0,
            coupling_threshold: 0.001,
        }
    }
}

impl AggregationParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("seed_amplitude", self.seed_amplitude),
            ("coupling", self.coupling),
            ("coupling_threshold", self.coupling_threshold),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0 (got {value})")));
            }
        }
        for (name, values) in [("diffusivity", &self.diffusivity), ("clearance", &self.clearance)]
        {
            if values.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Config(format!("{name} entries must be >= 0")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be > 0 (got {})",
                self.epsilon
            )));
        }
        if !(self.seed_timescale > 0.0) {
            return Err(Error::Config(format!(
                "seed_timescale must be > 0 (got {})",
                self.seed_timescale
            )));
        }
        Ok(())
    }
}

/// Gamma-shaped seeding pulse `(t/lambda) * exp(-t/lambda)`, maximal at
/// `t = lambda`. Vertex masking (seed set versus elsewhere) is the caller's
/// business.
pub fn seed_profile(t: f64, timescale: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("time must be >= 0 (got {t})")));
    }
    if !(timescale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "seed timescale must be > 0 (got {timescale})"
        )));
    }
    let s = t / timescale;
    Ok(s * (-s).exp())
}

/// Coalescence gain and loss for one vertex.
///
/// * `gain[0] = 0`; for compartments 2..4, `gain_i = (rate/2) * sum_{j=1}^{i-1} c_j c_{i-j}`.
/// * `gain[4]` collects the ordered double sum over soluble pairs whose
///   lengths add to at least 5, times the same `rate/2` prefactor.
/// * `loss_i = rate * c_i * sum_{j=1}^{5} c_j` for the four soluble
///   compartments; the top compartment loses nothing.
pub fn coalescence_terms(
    conc: &[f64; NUM_COMPARTMENTS],
    rate: f64,
) -> ([f64; NUM_COMPARTMENTS], [f64; NUM_COMPARTMENTS]) {
    let mut gain = [0.0; NUM_COMPARTMENTS];
    let mut loss = [0.0; NUM_COMPARTMENTS];
    let total: f64 = conc.iter().sum();
    let half_rate = 0.5 * rate;

    for i in 0..4 {
        loss[i] = rate * conc[i] * total;
    }
    for i in 1..4 {
        // compartment i+1 formed from ordered pairs (j+1) + (i-j) = i+1
        let mut acc = 0.0;
        for j in 0..i {
            acc += conc[j] * conc[i - 1 - j];
        }
        gain[i] = half_rate * acc;
    }
    let mut acc = 0.0;
    for j in 1..=4usize {
        for k in 1..=4usize {
            if j + k >= 5 {
                acc += conc[j - 1] * conc[k - 1];
            }
        }
    }
    gain[4] = half_rate * acc;

    (gain, loss)
}

/// Time derivative of the amyloid field.
///
/// `epsilon * du_i/dt = -d_i L u_i + gain_i - loss_i - sigma_i u_i + F(f) [i = 1]`
/// for the soluble compartments, and `epsilon * du_5/dt = gain_5` for
/// plaques; the division by epsilon is applied here. `monomer_source` is the
/// per-vertex value of the neuron production functional, and the Laplacian
/// must act on the proximity family.
pub fn abeta_rhs(
    u: &ProteinField,
    monomer_source: &[f64],
    params: &AggregationParams,
    laplacian: &LaplacianOperator<'_>,
    out: &mut ProteinField,
) -> Result<()> {
    u.check_finite("abeta")?;
    if let Some(m) = monomer_source.iter().position(|x| !x.is_finite()) {
        return Err(Error::StateCorruption {
            field: "abeta monomer source",
            vertex: m,
            component: 0,
        });
    }
    let n = u.num_vertices();
    let inv_eps = 1.0 / params.epsilon;

    let mut column = vec![0.0; n];
    let mut diffused = vec![vec![0.0; n]; 4];
    for i in 0..4 {
        u.compartment_column(i, &mut column);
        laplacian.apply(&column, &mut diffused[i]);
    }

    for m in 0..n {
        let conc = u.vertex(m);
        let (gain, loss) = coalescence_terms(conc, params.alpha);
        let derivative = out.vertex_mut(m);
        for i in 0..4 {
            let source = if i == 0 { monomer_source[m] } else { 0.0 };
            derivative[i] = (-params.diffusivity[i] * diffused[i][m] + gain[i] - loss[i]
                - params.clearance[i] * conc[i]
                + source)
                * inv_eps;
        }
        derivative[4] = gain[4] * inv_eps;
    }
    Ok(())
}

/// Time derivative of the tau field.
///
/// Monomers gain the seeding pulse on seed vertices plus the amyloid
/// coupling `C_tau * (sum_{i=2..4} u_i - U_bar)^+` read from the current
/// amyloid state at the same vertex; no clearance and no epsilon anywhere,
/// and the Laplacian must act on the connectivity family.
pub fn tau_rhs(
    tau: &ProteinField,
    u: &ProteinField,
    t: f64,
    params: &AggregationParams,
    laplacian: &LaplacianOperator<'_>,
    seed_mask: &[bool],
    out: &mut ProteinField,
) -> Result<()> {
    tau.check_finite("tau")?;
    u.check_finite("abeta")?;
    let n = tau.num_vertices();
    let pulse = params.seed_amplitude * seed_profile(t, params.seed_timescale)?;

    let mut column = vec![0.0; n];
    let mut diffused = vec![vec![0.0; n]; 4];
    for i in 0..4 {
        tau.compartment_column(i, &mut column);
        laplacian.apply(&column, &mut diffused[i]);
    }

    for m in 0..n {
        let conc = tau.vertex(m);
        let (gain, loss) = coalescence_terms(conc, params.gamma);
        let u_m = u.vertex(m);
        let oligomer_burden = u_m[1] + u_m[2] + u_m[3];
        let induced = params.coupling * (oligomer_burden - params.coupling_threshold).max(0.0);
        let seeded = if seed_mask[m] { pulse } else { 0.0 };
        let derivative = out.vertex_mut(m);
        for i in 0..4 {
            let source = if i == 0 { seeded + induced } else { 0.0 };
            derivative[i] =
                -params.diffusivity[i] * diffused[i][m] + gain[i] - loss[i] + source;
        }
        derivative[4] = gain[4];
    }
    Ok(())
}
