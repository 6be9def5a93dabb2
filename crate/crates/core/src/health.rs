//! Neuron-health transport: the malfunction density `f(a)` on a uniform
//! grid over `a in [0,1]`, the nonlocal deterioration rate that advects it
//! rightward, and the amyloid production functional it feeds back through.
//!
//! The solver is first-order conservative upwind. The deterioration rate is
//! nonnegative by construction and vanishes identically at `a = 1` (every
//! term carries a `(1 - a)` or `(b - a)^+` factor), so with a zero inflow
//! flux at `a = 0` the per-vertex mass is conserved to round-off. Face
//! positions are computed as `k / M` so that the last face sits at exactly
//! 1.0 and the boundary velocity is an exact zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell-averaged malfunction densities for all vertices.
///
/// Cell `k` of vertex `m` covers `[k/M, (k+1)/M)`; values are densities, so
/// the per-vertex mass is `sum_k f[m][k] / M` and equals 1 for a valid
/// probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct HealthDensity {
    num_vertices: usize,
    num_cells: usize,
    values: Vec<f64>,
}

impl HealthDensity {
    pub fn zeros(num_vertices: usize, num_cells: usize) -> Self {
        Self {
            num_vertices,
            num_cells,
            values: vec![0.0; num_vertices * num_cells],
        }
    }

    /// Truncated Gaussian centered at `center` with width `width`, evaluated
    /// at cell midpoints and renormalized to unit mass, identically at every
    /// vertex. This stands in for a near-delta "healthy brain" initial
    /// density.
    pub fn healthy(num_vertices: usize, num_cells: usize, center: f64, width: f64) -> Self {
        let mut profile = vec![0.0; num_cells];
        for (k, p) in profile.iter_mut().enumerate() {
            let a = cell_center(k, num_cells);
            let z = (a - center) / width;
            *p = (-0.5 * z * z).exp();
        }
        let mass: f64 = profile.iter().sum::<f64>() / num_cells as f64;
        for p in &mut profile {
            *p /= mass;
        }
        let mut values = Vec::with_capacity(num_vertices * num_cells);
        for _ in 0..num_vertices {
            values.extend_from_slice(&profile);
        }
        Self {
            num_vertices,
            num_cells,
            values,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.num_cells as f64
    }

    pub fn vertex(&self, m: usize) -> &[f64] {
        &self.values[m * self.num_cells..(m + 1) * self.num_cells]
    }

    pub fn vertex_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.values[m * self.num_cells..(m + 1) * self.num_cells]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Per-vertex total mass `sum_k f_k * da`.
    pub fn mass(&self, m: usize) -> f64 {
        self.vertex(m).iter().sum::<f64>() / self.num_cells as f64
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Midpoint of cell `k` on the unit interval split into `num_cells`.
pub fn cell_center(k: usize, num_cells: usize) -> f64 {
    (k as f64 + 0.5) / num_cells as f64
}

/// Position of face `k` (0..=num_cells); face `num_cells` is exactly 1.0.
pub fn face_position(k: usize, num_cells: usize) -> f64 {
    k as f64 / num_cells as f64
}

/// Rates of the deterioration mechanism and the neuron-sourced amyloid
/// production functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeteriorationParams {
    /// Peer-influence rate (C_G): healthier neurons are dragged by sicker ones.
    pub peer_rate: f64,
    /// Amyloid oligomer toxicity (C_S).
    pub abeta_toxicity: f64,
    /// Tau toxicity (C_T).
    pub tau_toxicity: f64,
    /// Amyloid burden threshold in the deterioration rate (U-bar_Abeta).
    pub abeta_threshold: f64,
    /// Tau burden threshold in the deterioration rate (U-bar_tau).
    pub tau_threshold: f64,
    /// Amyloid production rate (C_F).
    pub production_rate: f64,
    /// Baseline production of fully healthy neurons (mu_0).
    pub production_floor: f64,
}

impl Default for DeteriorationParams {
    fn default() -> Self {
        Self {
            peer_rate: 0.1,
            abeta_toxicity: 0.01,
            tau_toxicity: 0.01,
            abeta_threshold: 0.001,
            tau_threshold: 0.001,
            production_rate: 10.0,
            production_floor: 0.01,
        }
    }
}

impl DeteriorationParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("peer_rate", self.peer_rate),
            ("abeta_toxicity", self.abeta_toxicity),
            ("tau_toxicity", self.tau_toxicity),
            ("abeta_threshold", self.abeta_threshold),
            ("tau_threshold", self.tau_threshold),
            ("production_rate", self.production_rate),
            ("production_floor", self.production_floor),
        ];
        for (name, value) in fields {
            if !(value >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0 (got {value})")));
            }
        }
        Ok(())
    }
}

/// Deterioration rate at one position `a` for one vertex:
///
/// ```text
/// v(a) = C_G * int_0^1 (b - a)^+ f(b) db
///      + C_S (1 - a) (sum_{i=2..4} u_i - U_Abeta)^+
///      + C_T (1 - a) (sum_{i=1..5} tau_i - U_tau)^+
/// ```
///
/// Note the asymmetry fixed by the model: the amyloid sum runs over the
/// three soluble oligomer compartments, while the tau sum includes all five
/// compartments, tangles included. The integral is midpoint quadrature on
/// the cell grid.
pub fn deterioration_rate(
    f_row: &[f64],
    u_m: &[f64; 5],
    tau_m: &[f64; 5],
    params: &DeteriorationParams,
    a: f64,
) -> f64 {
    let m = f_row.len();
    let da = 1.0 / m as f64;
    let mut peer = 0.0;
    for (k, &fk) in f_row.iter().enumerate() {
        let b = cell_center(k, m);
        if b > a {
            peer += (b - a) * fk;
        }
    }
    peer *= da;

    let abeta_burden = u_m[1] + u_m[2] + u_m[3];
    let tau_burden: f64 = tau_m.iter().sum();
    params.peer_rate * peer
        + (1.0 - a)
            * (params.abeta_toxicity * (abeta_burden - params.abeta_threshold).max(0.0)
                + params.tau_toxicity * (tau_burden - params.tau_threshold).max(0.0))
}

/// Deterioration rate at every face `k/M`, `k = 0..=M`, for one vertex.
///
/// Uses suffix sums so the whole face set costs O(M); agrees with
/// [`deterioration_rate`] evaluated face by face. The last entry is an
/// exact zero.
pub fn face_velocities(
    f_row: &[f64],
    u_m: &[f64; 5],
    tau_m: &[f64; 5],
    params: &DeteriorationParams,
    out: &mut [f64],
) {
    let m = f_row.len();
    debug_assert_eq!(out.len(), m + 1);
    let da = 1.0 / m as f64;

    // suffix_mass[k] = sum_{j >= k} f_j * da, suffix_moment likewise for b*f.
    // Faces see exactly the cells whose midpoint lies to their right, which
    // for face k are the cells j >= k.
    let mut suffix_mass = 0.0;
    let mut suffix_moment = 0.0;
    let abeta_burden = u_m[1] + u_m[2] + u_m[3];
    let tau_burden: f64 = tau_m.iter().sum();
    let toxicity = params.abeta_toxicity * (abeta_burden - params.abeta_threshold).max(0.0)
        + params.tau_toxicity * (tau_burden - params.tau_threshold).max(0.0);

    out[m] = 0.0;
    for k in (0..m).rev() {
        let b = cell_center(k, m);
        suffix_mass += f_row[k] * da;
        suffix_moment += b * f_row[k] * da;
        let a = face_position(k, m);
        let v = params.peer_rate * (suffix_moment - a * suffix_mass) + (1.0 - a) * toxicity;
        debug_assert!(v >= -1e-12, "deterioration rate went negative: {v}");
        out[k] = v;
    }
}

/// Amyloid production functional `F(f) = C_F * int_0^1 (mu_0 + a)(1 - a) f da`.
///
/// Strictly positive whenever `f` has mass strictly below `a = 1`; dead
/// neurons produce nothing.
pub fn amyloid_source(f_row: &[f64], params: &DeteriorationParams) -> f64 {
    let m = f_row.len();
    let da = 1.0 / m as f64;
    let mut acc = 0.0;
    for (k, &fk) in f_row.iter().enumerate() {
        let a = cell_center(k, m);
        acc += (params.production_floor + a) * (1.0 - a) * fk;
    }
    params.production_rate * acc * da
}

/// Conservative upwind flux divergence for one vertex: writes
/// `df_k/dt = -(F_{k+1} - F_k) / da` with `F_k = v_k * f_{k-1}`, `F_0 = 0`.
///
/// Velocities must be the face values (length M+1) and nonnegative; the
/// caller guarantees `v[M] = 0` (automatic for [`face_velocities`]).
pub fn flux_divergence(f_row: &[f64], v_faces: &[f64], out: &mut [f64]) {
    let m = f_row.len();
    debug_assert_eq!(v_faces.len(), m + 1);
    debug_assert_eq!(out.len(), m);
    let inv_da = m as f64;
    let mut flux_left = 0.0; // no neuron regenerates: zero inflow at a = 0
    for k in 0..m {
        let flux_right = v_faces[k + 1] * f_row[k];
        out[k] = -(flux_right - flux_left) * inv_da;
        flux_left = flux_right;
    }
}

/// One explicit upwind step for a single vertex row, with the CFL guard.
pub fn transport_step_row(
    f_row: &mut [f64],
    v_faces: &[f64],
    dt: f64,
    cfl_max: f64,
) -> Result<()> {
    let m = f_row.len();
    let da = 1.0 / m as f64;
    let v_max = v_faces.iter().copied().fold(0.0f64, f64::max);
    let bound = if v_max > 0.0 { cfl_max * da / v_max } else { f64::INFINITY };
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let mut derivative = vec![0.0; m];
    flux_divergence(f_row, v_faces, &mut derivative);
    for (fk, dk) in f_row.iter_mut().zip(&derivative) {
        *fk += dt * dk;
    }
    Ok(())
}

/// One explicit upwind step for every vertex of a density; `v_faces` holds
/// the per-vertex face velocities concatenated ((M+1) entries per vertex).
pub fn transport_step(
    f: &mut HealthDensity,
    v_faces: &[f64],
    dt: f64,
    cfl_max: f64,
) -> Result<()> {
    let stride = f.num_cells() + 1;
    debug_assert_eq!(v_faces.len(), f.num_vertices() * stride);
    for m in 0..f.num_vertices() {
        let v = &v_faces[m * stride..(m + 1) * stride];
        transport_step_row(f.vertex_mut(m), v, dt, cfl_max)?;
    }
    Ok(())
}

/// Mean malfunction `int_0^1 a f(a) da` by midpoint quadrature.
pub fn malfunction_mean(f_row: &[f64]) -> f64 {
    let m = f_row.len();
    let da = 1.0 / m as f64;
    f_row
        .iter()
        .enumerate()
        .map(|(k, &fk)| cell_center(k, m) * fk)
        .sum::<f64>()
        * da
}
