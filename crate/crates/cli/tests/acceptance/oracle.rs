//! Independent naive implementation of the coupled right-hand side, used as
//! the equivalence oracle. Everything here is written as plain triple loops
//! over dense matrices, directly off the displayed equations, sharing no
//! code path with the library implementation.

use proteograph::aggregation::AggregationParams;
use proteograph::graph::{BrainGraph, WeightFamily};
use proteograph::health::DeteriorationParams;

pub struct NaiveState {
    pub t: f64,
    pub u: Vec<[f64; 5]>,
    pub tau: Vec<[f64; 5]>,
    /// cell averages, one row of length `cells` per vertex
    pub f: Vec<Vec<f64>>,
}

pub struct NaiveDerivative {
    pub du: Vec<[f64; 5]>,
    pub dtau: Vec<[f64; 5]>,
    pub df: Vec<Vec<f64>>,
}

pub fn dense_weights(graph: &BrainGraph, family: WeightFamily) -> Vec<Vec<f64>> {
    let n = graph.num_vertices();
    let w = graph.weights(family);
    (0..n)
        .map(|i| (0..n).map(|j| w.get(i, j)).collect())
        .collect()
}

fn laplacian_at(weights: &[Vec<f64>], g: &[f64], m: usize) -> f64 {
    let mut degree = 0.0;
    let mut acc = 0.0;
    for j in 0..g.len() {
        degree += weights[m][j];
        acc += (g[m] - g[j]) * weights[m][j];
    }
    acc / degree
}

#[allow(clippy::needless_range_loop)]
pub fn naive_coupled_rhs(
    conn: &[Vec<f64>],
    prox: &[Vec<f64>],
    seed_mask: &[bool],
    state: &NaiveState,
    agg: &AggregationParams,
    det: &DeteriorationParams,
) -> NaiveDerivative {
    let n = state.u.len();
    let cells = state.f[0].len();
    let da = 1.0 / cells as f64;
    let positive = |x: f64| if x > 0.0 { x } else { 0.0 };

    let mut du = vec![[0.0; 5]; n];
    let mut dtau = vec![[0.0; 5]; n];
    let mut df = vec![vec![0.0; cells]; n];

    for m in 0..n {
        // neuron-sourced amyloid production
        let mut production = 0.0;
        for k in 0..cells {
            let a = (k as f64 + 0.5) / cells as f64;
            production += (det.production_floor + a) * (1.0 - a) * state.f[m][k] * da;
        }
        production *= det.production_rate;

        // amyloid system
        let mut u_total = 0.0;
        for j in 0..5 {
            u_total += state.u[m][j];
        }
        for i in 1..=5usize {
            let mut rhs = 0.0;
            if i <= 4 {
                let column: Vec<f64> = (0..n).map(|v| state.u[v][i - 1]).collect();
                rhs -= agg.diffusivity[i - 1] * laplacian_at(prox, &column, m);
                rhs -= agg.alpha * state.u[m][i - 1] * u_total;
                rhs -= agg.clearance[i - 1] * state.u[m][i - 1];
            }
            if i == 1 {
                rhs += production;
            }
            if (2..=4).contains(&i) {
                let mut gain = 0.0;
                for j in 1..i {
                    gain += state.u[m][j - 1] * state.u[m][i - j - 1];
                }
                rhs += agg.alpha / 2.0 * gain;
            }
            if i == 5 {
                let mut gain = 0.0;
                for j in 1..=4usize {
                    for k in 1..=4usize {
                        if j + k >= 5 {
                            gain += state.u[m][j - 1] * state.u[m][k - 1];
                        }
                    }
                }
                rhs += agg.alpha / 2.0 * gain;
            }
            du[m][i - 1] = rhs / agg.epsilon;
        }

        // tau system
        let mut tau_total = 0.0;
        for j in 0..5 {
            tau_total += state.tau[m][j];
        }
        for i in 1..=5usize {
            let mut rhs = 0.0;
            if i <= 4 {
                let column: Vec<f64> = (0..n).map(|v| state.tau[v][i - 1]).collect();
                rhs -= agg.diffusivity[i - 1] * laplacian_at(conn, &column, m);
                rhs -= agg.gamma * state.tau[m][i - 1] * tau_total;
            }
            if i == 1 {
                if seed_mask[m] {
                    let s = state.t / agg.seed_timescale;
                    rhs += agg.seed_amplitude * s * (-s).exp();
                }
                let oligomers = state.u[m][1] + state.u[m][2] + state.u[m][3];
                rhs += agg.coupling * positive(oligomers - agg.coupling_threshold);
            }
            if (2..=4).contains(&i) {
                let mut gain = 0.0;
                for j in 1..i {
                    gain += state.tau[m][j - 1] * state.tau[m][i - j - 1];
                }
                rhs += agg.gamma / 2.0 * gain;
            }
            if i == 5 {
                let mut gain = 0.0;
                for j in 1..=4usize {
                    for k in 1..=4usize {
                        if j + k >= 5 {
                            gain += state.tau[m][j - 1] * state.tau[m][k - 1];
                        }
                    }
                }
                rhs += agg.gamma / 2.0 * gain;
            }
            dtau[m][i - 1] = rhs;
        }

        // deterioration velocity at each face, then the upwind divergence
        let abeta_burden = state.u[m][1] + state.u[m][2] + state.u[m][3];
        let tau_burden: f64 =
            state.tau[m][0] + state.tau[m][1] + state.tau[m][2] + state.tau[m][3] + state.tau[m][4];
        let velocity = |a: f64| {
            let mut peer = 0.0;
            for k in 0..cells {
                let b = (k as f64 + 0.5) / cells as f64;
                peer += positive(b - a) * state.f[m][k] * da;
            }
            det.peer_rate * peer
                + det.abeta_toxicity * (1.0 - a) * positive(abeta_burden - det.abeta_threshold)
                + det.tau_toxicity * (1.0 - a) * positive(tau_burden - det.tau_threshold)
        };
        let faces: Vec<f64> = (0..=cells)
            .map(|k| velocity(k as f64 / cells as f64))
            .collect();
        for k in 0..cells {
            let inflow = if k == 0 { 0.0 } else { faces[k] * state.f[m][k - 1] };
            let outflow = faces[k + 1] * state.f[m][k];
            df[m][k] = -(outflow - inflow) / da;
        }
    }

    NaiveDerivative { du, dtau, df }
}
