//! Parameter management: fixed table values, the five case presets (A-E),
//! initial conditions, and TOML config files.
//!
//! Cases vary three dials: amyloid agglomeration `alpha`, the
//! amyloid-to-tau coupling `C_tau`, and the entorhinal seeding amplitude
//! `c`. All other rates are fixed.
//!
//! | case | alpha | coupling | seeding |
//! |------|-------|----------|---------|
//! | A    | 10    | 0        | 0       |
//! | B    | 10    | 0        | 0.05    |
//! | C    | 10    | 10       | 0.05    |
//! | D    | 10    | 10       | 0       |
//! | E    | 0     | 10       | 0.05    |

use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregationParams, ProteinField};
use crate::engine::{IntegratorConfig, SimState};
use crate::error::{Error, Result};
use crate::graph::BrainGraph;
use crate::health::{DeteriorationParams, HealthDensity};

pub const CASE_NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

/// Initial data: a uniform trace level of amyloid monomers, no tau, and a
/// near-delta healthy malfunction density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    /// Uniform initial amyloid monomer level u_0,1 (must stay well below 1).
    pub monomer_level: f64,
    /// Center a_0 of the initial malfunction density.
    pub health_center: f64,
    /// Width sigma_a of the initial malfunction density.
    pub health_width: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            monomer_level: 0.01,
            health_center: 0.01,
            health_width: 0.005,
        }
    }
}

/// Where the run's graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    Synthetic {
        num_vertices: usize,
        num_regions: usize,
        rng_seed: u64,
    },
    GraphMl {
        path: String,
    },
    EdgeCsv {
        nodes: String,
        edges: String,
    },
}

impl Default for GraphSource {
    fn default() -> Self {
        GraphSource::Synthetic {
            num_vertices: 100,
            num_regions: 10,
            rng_seed: 42,
        }
    }
}

impl GraphSource {
    pub fn describe(&self) -> String {
        match self {
            GraphSource::Synthetic {
                num_vertices,
                num_regions,
                rng_seed,
            } => format!("synthetic(n={num_vertices}, regions={num_regions}, seed={rng_seed})"),
            GraphSource::GraphMl { path } => format!("graphml({path})"),
            GraphSource::EdgeCsv { nodes, edges } => format!("csv({nodes}, {edges})"),
        }
    }
}

/// Everything a run needs apart from the graph itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Preset letter when the config came from one, free-form otherwise.
    pub case_name: Option<String>,
    /// Cells of the malfunction grid (M).
    pub grid_cells: usize,
    /// Case-insensitive substrings of labels forming the seed set.
    pub seed_markers: Vec<String>,
    /// Merge left/right labels into one region each.
    pub merge_hemispheres: bool,
    pub graph: GraphSource,
    pub aggregation: AggregationParams,
    pub deterioration: DeteriorationParams,
    pub integrator: IntegratorConfig,
    pub initial: InitialConditions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            case_name: None,
            grid_cells: 64,
            seed_markers: vec![crate::connectome::DEFAULT_SEED_MARKER.to_string()],
            merge_hemispheres: false,
            graph: GraphSource::default(),
            aggregation: AggregationParams::default(),
            deterioration: DeteriorationParams::default(),
            integrator: IntegratorConfig::default(),
            initial: InitialConditions::default(),
        }
    }
}

impl ScenarioConfig {
    /// Hard errors for invariant violations plus soft warnings the caller
    /// should surface.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.aggregation.validate()?;
        self.deterioration.validate()?;
        self.integrator.validate()?;
        if self.grid_cells < 2 {
            return Err(Error::Config(format!(
                "grid_cells must be at least 2 (got {})",
                self.grid_cells
            )));
        }
        if !(self.initial.monomer_level >= 0.0) {
            return Err(Error::Config(format!(
                "monomer_level must be >= 0 (got {})",
                self.initial.monomer_level
            )));
        }
        if !(self.initial.health_width > 0.0) {
            return Err(Error::Config(format!(
                "health_width must be > 0 (got {})",
                self.initial.health_width
            )));
        }
        if !(0.0..=1.0).contains(&self.initial.health_center) {
            return Err(Error::Config(format!(
                "health_center must lie in [0, 1] (got {})",
                self.initial.health_center
            )));
        }
        let mut warnings = Vec::new();
        if self.initial.monomer_level > 0.1 {
            warnings.push(format!(
                "monomer_level = {} is not small compared to 1; the model assumes a trace \
                 initial amyloid level",
                self.initial.monomer_level
            ));
        }
        Ok(warnings)
    }
}

/// Preset configuration for one of the named cases.
pub fn preset(case_name: &str) -> Result<ScenarioConfig> {
    let (alpha, coupling, seeding) = match case_name.to_ascii_uppercase().as_str() {
        "A" => (10.0, 0.0, 0.0),
        "B" => (10.0, 0.0, 0.05),
        "C" => (10.0, 10.0, 0.05),
        "D" => (10.0, 10.0, 0.0),
        // with alpha = 0 no oligomers ever form, so the coupling is inert;
        // the table value is stored regardless
        "E" => (0.0, 10.0, 0.05),
        other => {
            return Err(Error::Config(format!(
                "unknown case `{other}`; valid cases: A, B, C, D, E"
            )))
        }
    };
    Ok(ScenarioConfig {
        case_name: Some(case_name.to_ascii_uppercase()),
        aggregation: AggregationParams {
            alpha,
            coupling,
            seed_amplitude: seeding,
            ..AggregationParams::default()
        },
        ..ScenarioConfig::default()
    })
}

/// Healthy-brain initial state on the given graph.
pub fn initial_state(config: &ScenarioConfig, graph: &BrainGraph) -> Result<SimState> {
    config.validate()?;
    if config.aggregation.seed_amplitude > 0.0 && graph.seed_set().is_empty() {
        return Err(Error::Config(
            "scenario has tau seeding (c > 0) but the graph has no seed vertices".into(),
        ));
    }
    let n = graph.num_vertices();
    Ok(SimState {
        t: 0.0,
        u: ProteinField::uniform_monomer(n, config.initial.monomer_level),
        tau: ProteinField::zeros(n),
        f: HealthDensity::healthy(
            n,
            config.grid_cells,
            config.initial.health_center,
            config.initial.health_width,
        ),
        steps: 0,
        clamp_count: 0,
    })
}

/// Parse a TOML config file.
pub fn parse_toml(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
        source_name: "config".into(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Serialize a config to TOML (suits round-tripping through [`parse_toml`]).
pub fn to_toml(config: &ScenarioConfig) -> String {
    toml::to_string_pretty(config).expect("scenario config serializes")
}

/// A fully commented config template for the given preset, documenting each
/// knob under its conventional symbol.
pub fn config_template(case_name: &str) -> Result<String> {
    let config = preset(case_name)?;
    let agg = &config.aggregation;
    let det = &config.deterioration;
    let integ = &config.integrator;
    let init = &config.initial;
    let graph = match &config.graph {
        GraphSource::Synthetic {
            num_vertices,
            num_regions,
            rng_seed,
        } => format!(
            "[graph]\nkind = \"synthetic\"\nnum_vertices = {num_vertices}\nnum_regions = {num_regions}\nrng_seed = {rng_seed}"
        ),
        _ => unreachable!("presets use the synthetic source"),
    };
    Ok(format!(
        r#"# proteograph scenario configuration (case {case})
# All quantities are nondimensional.

case_name = "{case}"
grid_cells = {grid}            # M: cells of the malfunction grid over a in [0,1]
seed_markers = ["entorhinal"]  # label substrings defining the seed region
merge_hemispheres = false      # fold left/right labels into one region each

{graph}

[aggregation]
alpha = {alpha}                  # coalescence probability of two amyloid polymers
gamma = {gamma}                   # coalescence probability of two tau polymers
diffusivity = [1.0, 0.5, {third:.16}, 0.25]  # d_i = 1/i, soluble compartments
clearance = [1.0, 0.5, {third:.16}, 0.25]    # sigma_i = 1/i, amyloid only
epsilon = {eps}                # time-scale factor of the amyloid equations
seed_amplitude = {c}          # c: tau seeding amplitude at the entorhinal cortex
seed_timescale = {lambda}           # lambda: the pulse (t/lambda) exp(-t/lambda) peaks here
coupling = {ctau}                # C_tau: tau production driven by amyloid oligomers
coupling_threshold = {ubar}    # U-bar: oligomer burden below which no tau is induced

[deterioration]
peer_rate = {cg}                # C_G: drag of sicker neighbors on healthier neurons
abeta_toxicity = {cs}          # C_S
tau_toxicity = {ct}            # C_T
abeta_threshold = {ua}        # U-bar_Abeta: soluble oligomer burden threshold
tau_threshold = {ut}          # U-bar_tau: total tau burden threshold
production_rate = {cf}         # C_F: amyloid production by living neurons
production_floor = {mu0}         # mu_0: residual production of fully healthy neurons

[integrator]
t_end = {tend}
dt_init = {dt}
dt_min = {dtmin:e}
dt_max = {dtmax}
cfl_max = {cfl}
snapshot_interval = {snap}
mode = "adaptive"              # "adaptive" halves rejected steps; "fixed" errors out

[initial]
monomer_level = {u01}          # u_0,1: uniform initial amyloid monomer level (<< 1)
health_center = {a0}          # a_0: center of the initial malfunction density
health_width = {sigma}         # sigma_a of the initial malfunction density
"#,
        case = config.case_name.as_deref().unwrap_or("custom"),
        grid = config.grid_cells,
        graph = graph,
        alpha = agg.alpha,
        gamma = agg.gamma,
        third = 1.0 / 3.0,
        eps = agg.epsilon,
        c = agg.seed_amplitude,
        lambda = agg.seed_timescale,
        ctau = agg.coupling,
        ubar = agg.coupling_threshold,
        cg = det.peer_rate,
        cs = det.abeta_toxicity,
        ct = det.tau_toxicity,
        ua = det.abeta_threshold,
        ut = det.tau_threshold,
        cf = det.production_rate,
        mu0 = det.production_floor,
        tend = integ.t_end,
        dt = integ.dt_init,
        dtmin = integ.dt_min,
        dtmax = integ.dt_max,
        cfl = integ.cfl_max,
        snap = integ.snapshot_interval,
        u01 = init.monomer_level,
        a0 = init.health_center,
        sigma = init.health_width,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectome::generate_synthetic;

    #[test]
    fn preset_c_carries_all_drivers() {
        let config = preset("C").unwrap();
        let a = &config.aggregation;
        assert_eq!(a.alpha, 10.0);
        assert_eq!(a.coupling, 10.0);
        assert_eq!(a.seed_amplitude, 0.05);
        assert_eq!(a.gamma, 4.0);
        assert_eq!(a.epsilon, 0.1);
        assert_eq!(a.seed_timescale, 10.0);
    }

    #[test]
    fn preset_a_removes_tau_sources() {
        let config = preset("A").unwrap();
        assert_eq!(config.aggregation.seed_amplitude, 0.0);
        assert_eq!(config.aggregation.coupling, 0.0);
    }

    #[test]
    fn preset_e_disables_amyloid_agglomeration() {
        let config = preset("E").unwrap();
        assert_eq!(config.aggregation.alpha, 0.0);
        assert_eq!(config.aggregation.coupling, 10.0);
    }

    #[test]
    fn fixed_values_golden() {
        // the full fixed-parameter table, asserted in one place
        let config = preset("C").unwrap();
        let a = &config.aggregation;
        let d = &config.deterioration;
        assert_eq!(a.diffusivity, [1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(a.clearance, [1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(a.coupling_threshold, 0.001);
        assert_eq!(d.peer_rate, 0.1);
        assert_eq!(d.abeta_toxicity, 0.01);
        assert_eq!(d.tau_toxicity, 0.01);
        assert_eq!(d.abeta_threshold, 0.001);
        assert_eq!(d.tau_threshold, 0.001);
        assert_eq!(d.production_rate, 10.0);
        assert_eq!(d.production_floor, 0.01);
    }

    #[test]
    fn unknown_case_lists_valid_ones() {
        let err = preset("Z").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown case") && msg.contains("A, B, C, D, E"), "{msg}");
    }

    #[test]
    fn lowercase_case_names_accepted() {
        assert_eq!(preset("c").unwrap(), preset("C").unwrap());
    }

    #[test]
    fn initial_state_is_healthy() {
        let graph = generate_synthetic(12, 3, 1).unwrap();
        let config = preset("C").unwrap();
        let state = initial_state(&config, &graph).unwrap();
        assert_eq!(state.t, 0.0);
        for m in 0..12 {
            assert_eq!(state.u.vertex(m), &[0.01, 0.0, 0.0, 0.0, 0.0]);
            assert_eq!(state.tau.vertex(m), &[0.0; 5]);
            assert!((state.f.mass(m) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_monomer_level_gives_zero_state() {
        let graph = generate_synthetic(6, 3, 1).unwrap();
        let mut config = preset("A").unwrap();
        config.initial.monomer_level = 0.0;
        let state = initial_state(&config, &graph).unwrap();
        assert!(state.u.iter().all(|v| v.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn toml_round_trip_is_idempotent() {
        let config = preset("D").unwrap();
        let text = to_toml(&config);
        let parsed = parse_toml(&text).unwrap();
        assert_eq!(parsed, config);
        assert_eq!(to_toml(&parsed), text);
    }

    #[test]
    fn commented_template_parses_to_its_preset() {
        for case in CASE_NAMES {
            let template = config_template(case).unwrap();
            let parsed = parse_toml(&template).unwrap();
            assert_eq!(parsed, preset(case).unwrap(), "case {case}");
        }
    }

    #[test]
    fn large_monomer_level_warns() {
        let mut config = preset("C").unwrap();
        config.initial.monomer_level = 0.5;
        let warnings = config.validate().unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn misspelled_config_keys_are_rejected() {
        let text = to_toml(&preset("C").unwrap()).replace("alpha =", "alhpa =");
        let err = parse_toml(&text).unwrap_err();
        assert!(err.to_string().contains("alhpa"), "{err}");
    }
}
