//! Command-line front end: run scenarios, sweep cases, generate synthetic
//! connectomes, validate input graphs, and emit CSV/SVG/JSON outputs.
//!
//! Exit codes: 0 success, 1 runtime or model error, 2 usage error.

mod figures;
mod plot;

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use proteograph::connectome::{
    generate_synthetic, load_edge_csv_with_markers, load_graphml_with_markers, save_edge_csv,
    RegionTable,
};
use proteograph::engine::{RunMetadata, SimRun, Simulation};
use proteograph::graph::{BrainGraph, WeightFamily};
use proteograph::observables::TimeSeriesRecord;
use proteograph::scenarios::{
    self, config_template, initial_state, parse_toml, preset, GraphSource, ScenarioConfig,
};

/// Environment variable naming the default directory for graph data files.
const DATA_DIR_ENV: &str = "PROTEOGRAPH_DATA";

#[derive(Parser)]
#[command(
    name = "proteograph",
    version,
    about = "Amyloid/tau proteopathy simulator on dual brain graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write CSV, SVG and metadata outputs.
    Run(RunArgs),
    /// Run several cases on one shared graph and compare their outcomes.
    Sweep(SweepArgs),
    /// Generate a synthetic connectome and save it as a nodes/edges CSV pair.
    Gen(GenArgs),
    /// Load a graph, check its invariants, and print a summary.
    Validate(ValidateArgs),
    /// Print a commented scenario configuration template.
    Config(ConfigArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph input: a .graphml file or a directory holding nodes.csv and
    /// edges.csv (relative paths also resolve against $PROTEOGRAPH_DATA).
    #[arg(long, conflicts_with = "synthetic")]
    graph: Option<PathBuf>,
    /// Generate a synthetic connectome with this many vertices instead.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Region count of the synthetic connectome.
    #[arg(long, default_value_t = 10)]
    regions: usize,
    /// RNG seed of the synthetic connectome.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Clone)]
struct OverrideArgs {
    /// Simulated time horizon.
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial (and maximal) integrator step.
    #[arg(long)]
    dt: Option<f64>,
    /// Cells of the malfunction grid.
    #[arg(long = "grid-m")]
    grid_m: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Scenario preset (A, B, C, D or E).
    #[arg(long, conflicts_with = "config")]
    case: Option<String>,
    /// TOML scenario configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Plot burdens on a logarithmic y axis.
    #[arg(long)]
    log_y: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Cases to run (subset of A B C D E).
    #[arg(long, num_args = 1.., value_delimiter = ' ')]
    cases: Vec<String>,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Output directory (one subdirectory per case).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Concurrent case runs.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct GenArgs {
    /// Number of vertices.
    #[arg(long)]
    synthetic: usize,
    #[arg(long, default_value_t = 10)]
    regions: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory receiving nodes.csv and edges.csv.
    #[arg(long, default_value = "graph")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Graph input, as for `run --graph`.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Preset the template starts from.
    #[arg(long, default_value = "C")]
    case: String,
}

/// Errors that are the caller's fault map to exit code 2.
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Config(args) => cmd_config(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

// ── graph and config assembly ──────────────────────────────────────────

fn resolve_data_path(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if path.is_relative() {
        if let Ok(base) = std::env::var(DATA_DIR_ENV) {
            let candidate = Path::new(&base).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load_graph(args: &GraphArgs, config: &mut ScenarioConfig) -> Result<BrainGraph, CliError> {
    match (&args.graph, args.synthetic) {
        (None, Some(n)) => {
            config.graph = GraphSource::Synthetic {
                num_vertices: n,
                num_regions: args.regions,
                rng_seed: args.seed,
            };
            generate_synthetic(n, args.regions, args.seed)
                .map_err(|e| usage(format!("--synthetic: {e}")))
        }
        (Some(path), None) => {
            let path = resolve_data_path(path);
            let markers = &config.seed_markers;
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("graphml")) {
                config.graph = GraphSource::GraphMl {
                    path: path.display().to_string(),
                };
                Ok(load_graphml_with_markers(&path, markers)
                    .with_context(|| format!("loading {}", path.display()))?)
            } else if path.is_dir() {
                let nodes = path.join("nodes.csv");
                let edges = path.join("edges.csv");
                config.graph = GraphSource::EdgeCsv {
                    nodes: nodes.display().to_string(),
                    edges: edges.display().to_string(),
                };
                Ok(load_edge_csv_with_markers(&nodes, &edges, markers)
                    .with_context(|| format!("loading {}", path.display()))?)
            } else {
                Err(usage(format!(
                    "--graph expects a .graphml file or a directory containing nodes.csv and \
                     edges.csv (got `{}`)",
                    path.display()
                )))
            }
        }
        (None, None) => {
            // fall back to the config file's graph source, if usable
            match config.graph.clone() {
                GraphSource::Synthetic {
                    num_vertices,
                    num_regions,
                    rng_seed,
                } => generate_synthetic(num_vertices, num_regions, rng_seed)
                    .map_err(|e| usage(format!("config graph: {e}"))),
                GraphSource::GraphMl { path } => Ok(load_graphml_with_markers(
                    resolve_data_path(Path::new(&path)),
                    &config.seed_markers,
                )
                .with_context(|| format!("loading {path}"))?),
                GraphSource::EdgeCsv { nodes, edges } => Ok(load_edge_csv_with_markers(
                    resolve_data_path(Path::new(&nodes)),
                    resolve_data_path(Path::new(&edges)),
                    &config.seed_markers,
                )
                .with_context(|| format!("loading {nodes}"))?),
            }
        }
        (Some(_), Some(_)) => unreachable!("clap forbids --graph with --synthetic"),
    }
}

fn scenario_from_args(
    case: &Option<String>,
    config_path: &Option<PathBuf>,
    overrides: &OverrideArgs,
) -> Result<ScenarioConfig, CliError> {
    let mut config = match (case, config_path) {
        (Some(case), None) => preset(case).map_err(|e| usage(e.to_string()))?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CliError::Runtime)?;
            parse_toml(&text).map_err(|e| usage(e.to_string()))?
        }
        (None, None) => return Err(usage("one of --case or --config is required")),
        (Some(_), Some(_)) => unreachable!("clap forbids --case with --config"),
    };
    apply_overrides(&mut config, overrides)?;
    Ok(config)
}

fn apply_overrides(config: &mut ScenarioConfig, overrides: &OverrideArgs) -> Result<(), CliError> {
    if let Some(t_end) = overrides.t_end {
        config.integrator.t_end = t_end;
    }
    if let Some(dt) = overrides.dt {
        config.integrator.dt_init = dt;
        config.integrator.dt_max = config.integrator.dt_max.max(dt);
        config.integrator.dt_min = config.integrator.dt_min.min(dt);
    }
    if let Some(m) = overrides.grid_m {
        config.grid_cells = m;
    }
    for warning in config.validate().map_err(|e| usage(e.to_string()))? {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

// ── outputs ────────────────────────────────────────────────────────────

/// Files created by one run; removed again if the run fails midway.
struct OutputSet {
    dir: PathBuf,
    created: Vec<PathBuf>,
}

impl OutputSet {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.created.push(path.clone());
        Ok(path)
    }

    fn discard(&self) {
        for path in &self.created {
            let _ = fs::remove_file(path);
        }
    }
}

struct RunOutcome {
    record: TimeSeriesRecord,
    final_a: f64,
}

fn execute_run(
    config: &ScenarioConfig,
    graph: &BrainGraph,
    out_dir: &Path,
    log_y: bool,
) -> anyhow::Result<RunOutcome> {
    let mut outputs = OutputSet::new(out_dir)?;
    match execute_run_inner(config, graph, &mut outputs, log_y) {
        Ok(outcome) => Ok(outcome),
        Err(e) => {
            outputs.discard();
            Err(e)
        }
    }
}

fn execute_run_inner(
    config: &ScenarioConfig,
    graph: &BrainGraph,
    outputs: &mut OutputSet,
    log_y: bool,
) -> anyhow::Result<RunOutcome> {
    let regions = RegionTable::from_labels(graph.labels(), config.merge_hemispheres);
    let simulation = Simulation::new(
        graph,
        config.aggregation.clone(),
        config.deterioration.clone(),
    )?;
    let state = initial_state(config, graph)?;
    let run: SimRun = simulation.advance(state, &config.integrator)?;
    let record = TimeSeriesRecord::from_snapshots(&run.snapshots, &regions)?;

    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    outputs.write("observables.csv", &csv)?;

    outputs.write(
        "global_burden.svg",
        figures::global_burden_figure(&record, log_y).as_bytes(),
    )?;
    outputs.write(
        "regional_burden.svg",
        figures::regional_burden_figure(&record, log_y).as_bytes(),
    )?;
    outputs.write("disease.svg", figures::disease_figure(&record).as_bytes())?;

    let metadata = RunMetadata {
        artifact: "proteograph".into(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        case_name: config.case_name.clone(),
        graph_source: config.graph.describe(),
        num_vertices: graph.num_vertices(),
        num_regions: regions.num_regions(),
        num_seed_vertices: graph.seed_set().len(),
        grid_cells: config.grid_cells,
        aggregation: config.aggregation.clone(),
        deterioration: config.deterioration.clone(),
        integrator: config.integrator.clone(),
        steps: run.final_steps,
        clamp_count: run.final_clamp_count,
        snapshot_count: run.snapshots.len(),
        wall_time_s: run.wall_time_s,
    };
    outputs.write(
        "metadata.json",
        serde_json::to_string_pretty(&metadata)?.as_bytes(),
    )?;

    let final_a = *record.global_a.last().expect("run has snapshots");
    Ok(RunOutcome { record, final_a })
}

// ── subcommands ────────────────────────────────────────────────────────

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut config = scenario_from_args(&args.case, &args.config, &args.overrides)?;
    let graph = load_graph(&args.graph, &mut config)?;
    let outcome = execute_run(&config, &graph, &args.out, args.log_y)?;
    println!(
        "wrote {} ({} snapshots, {} vertices, final disease index {:.6})",
        args.out.display(),
        outcome.record.num_snapshots(),
        graph.num_vertices(),
        outcome.final_a
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.cases.is_empty() {
        return Err(usage("--cases requires at least one case (A, B, C, D or E)"));
    }
    if args.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    // validate every case before any work
    let mut case_configs = Vec::new();
    for case in &args.cases {
        let mut config = preset(case).map_err(|e| usage(e.to_string()))?;
        apply_overrides(&mut config, &args.overrides)?;
        case_configs.push(config);
    }
    let mut shared = case_configs[0].clone();
    let graph = load_graph(&args.graph, &mut shared)?;
    for config in &mut case_configs {
        config.graph = shared.graph.clone();
    }
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(CliError::Runtime)?;

    // parallel over cases; the graph is shared read-only
    struct CaseResult {
        case: String,
        outcome: anyhow::Result<RunOutcome>,
    }
    let queue: Mutex<VecDeque<(String, ScenarioConfig)>> = Mutex::new(
        args.cases
            .iter()
            .map(|c| c.to_ascii_uppercase())
            .zip(case_configs)
            .collect(),
    );
    let results: Mutex<Vec<CaseResult>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..args.workers.min(args.cases.len()) {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some((case, config)) = job else { break };
                let out_dir = args.out.join(format!("case_{case}"));
                let outcome = execute_run(&config, &graph, &out_dir, false);
                results.lock().unwrap().push(CaseResult { case, outcome });
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.case.cmp(&b.case));

    let mut failures = 0;
    let mut ranking: Vec<(String, f64)> = Vec::new();
    let mut curves: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for result in &results {
        match &result.outcome {
            Ok(outcome) => {
                println!("case {}: ok (final disease index {:.6})", result.case, outcome.final_a);
                ranking.push((result.case.clone(), outcome.final_a));
                curves.push((
                    format!("case {}", result.case),
                    outcome.record.times.clone(),
                    outcome.record.global_a.clone(),
                ));
            }
            Err(e) => {
                println!("case {}: FAILED ({e:#})", result.case);
                failures += 1;
            }
        }
    }

    if !curves.is_empty() {
        let overlay = figures::disease_overlay_figure(&curves);
        fs::write(args.out.join("disease_overlay.svg"), overlay)
            .context("writing overlay")
            .map_err(CliError::Runtime)?;
    }
    ranking.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut table = String::from("case,final_A\n");
    println!("ranking (most severe first):");
    for (case, final_a) in &ranking {
        table.push_str(&format!("{case},{final_a:.16e}\n"));
        println!("  {case}  {final_a:.6}");
    }
    fs::write(args.out.join("ranking.csv"), table)
        .context("writing ranking")
        .map_err(CliError::Runtime)?;

    if failures > 0 {
        Err(CliError::Runtime(anyhow!("{failures} case(s) failed")))
    } else {
        Ok(())
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let graph = generate_synthetic(args.synthetic, args.regions, args.seed)
        .map_err(|e| usage(e.to_string()))?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(CliError::Runtime)?;
    let nodes = args.out.join("nodes.csv");
    let edges = args.out.join("edges.csv");
    save_edge_csv(&graph, &nodes, &edges).map_err(|e| CliError::Runtime(e.into()))?;
    println!(
        "wrote {} and {} ({} vertices, {} connectivity edges, {} seed vertices)",
        nodes.display(),
        edges.display(),
        graph.num_vertices(),
        graph.weights(WeightFamily::Connectivity).num_edges(),
        graph.seed_set().len()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let mut config = ScenarioConfig::default();
    let graph_args = GraphArgs {
        graph: Some(args.graph),
        synthetic: None,
        regions: 0,
        seed: 0,
    };
    let graph = load_graph(&graph_args, &mut config)?;
    let regions = RegionTable::from_labels(graph.labels(), false);
    let conn = graph.weights(WeightFamily::Connectivity);
    let prox = graph.weights(WeightFamily::Proximity);
    println!("vertices:            {}", graph.num_vertices());
    println!("connectivity edges:  {}", conn.num_edges());
    println!("proximity edges:     {}", prox.num_edges());
    println!("regions:             {}", regions.num_regions());
    println!("seed vertices:       {}", graph.seed_set().len());
    for (family, degrees) in [
        ("connectivity", graph.degrees(WeightFamily::Connectivity)),
        ("proximity", graph.degrees(WeightFamily::Proximity)),
    ] {
        let min = degrees.iter().copied().fold(f64::INFINITY, f64::min);
        let max = degrees.iter().copied().fold(0.0f64, f64::max);
        println!("{family} degree range: [{min:.6}, {max:.6}]");
    }
    println!(
        "connectivity graph connected: {}",
        is_connected(conn, graph.num_vertices())
    );
    if graph.seed_set().is_empty() {
        eprintln!("warning: no seed vertices; scenarios with tau seeding will be rejected");
    }
    Ok(())
}

fn is_connected(w: &proteograph::graph::SparseWeights, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(j, _) in w.neighbors(v) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

fn cmd_config(args: ConfigArgs) -> Result<(), CliError> {
    let template = config_template(&args.case).map_err(|e| usage(e.to_string()))?;
    // template must stay in sync with the preset it names
    debug_assert!(scenarios::parse_toml(&template).is_ok());
    print!("{template}");
    Ok(())
}
