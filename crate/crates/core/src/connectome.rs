//! Connectome loading (GraphML / CSV), region tables, and the synthetic
//! cluster generator used for desk-scale runs and tests.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{build_proximity_weights, default_proximity_params, BrainGraph, SparseWeights};

/// Default substring (case-insensitive) marking seed-region vertex labels.
pub const DEFAULT_SEED_MARKER: &str = "entorhinal";

/// Vertices whose label contains any marker, case-insensitively.
pub fn detect_seed_set(labels: &[String], markers: &[String]) -> Vec<usize> {
    let lowered: Vec<String> = markers.iter().map(|m| m.to_lowercase()).collect();
    labels
        .iter()
        .enumerate()
        .filter(|(_, label)| {
            let l = label.to_lowercase();
            lowered.iter().any(|m| !m.is_empty() && l.contains(m))
        })
        .map(|(i, _)| i)
        .collect()
}

/// Ordered partition of the vertex set into named anatomical regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTable {
    names: Vec<String>,
    vertex_region: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl RegionTable {
    /// Group vertices by label (first-appearance order). With
    /// `merge_hemispheres`, common left/right affixes are stripped first so
    /// that e.g. `hippocampus_L` and `hippocampus_R` share one region.
    pub fn from_labels(labels: &[String], merge_hemispheres: bool) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vertex_region = Vec::with_capacity(labels.len());
        for label in labels {
            let name = if merge_hemispheres {
                strip_hemisphere(label)
            } else {
                label.clone()
            };
            let region = *index.entry(name.clone()).or_insert_with(|| {
                names.push(name);
                names.len() - 1
            });
            vertex_region.push(region);
        }
        let mut members = vec![Vec::new(); names.len()];
        for (v, &r) in vertex_region.iter().enumerate() {
            members[r].push(v);
        }
        Self {
            names,
            vertex_region,
            members,
        }
    }

    pub fn num_regions(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn region_of(&self, vertex: usize) -> usize {
        self.vertex_region[vertex]
    }

    pub fn members(&self, region: usize) -> &[usize] {
        &self.members[region]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

fn strip_hemisphere(label: &str) -> String {
    let lower = label.to_lowercase();
    for prefix in ["lh.", "rh.", "lh_", "rh_", "left_", "right_"] {
        if lower.starts_with(prefix) {
            return label[prefix.len()..].to_string();
        }
    }
    for suffix in ["_l", "_r", ".l", ".r", "_left", "_right"] {
        if lower.ends_with(suffix) {
            return label[..label.len() - suffix.len()].to_string();
        }
    }
    label.to_string()
}

fn parse_err(source: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.display().to_string(),
        message: message.into(),
    }
}

/// Load a GraphML connectome.
///
/// Expected subset: `<key>` declarations mapping ids to the attribute names
/// `label`/`name` (node), `x`, `y`, `z` (node) and `weight`/`strength`/`value`
/// (edge); nodes and edges carrying `<data>` for those keys. The proximity
/// family is built from coordinates with the default kernel parameters, and
/// vertices whose label contains any seed marker form the seed set.
pub fn load_graphml(path: impl AsRef<Path>) -> Result<BrainGraph> {
    load_graphml_with_markers(path, &[DEFAULT_SEED_MARKER.to_string()])
}

pub fn load_graphml_with_markers(
    path: impl AsRef<Path>,
    seed_markers: &[String],
) -> Result<BrainGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut reader = Reader::from_str(&text);
    reader.config_mut().trim_text(true);

    // key id -> canonical attribute name
    let mut key_names: HashMap<String, String> = HashMap::new();

    struct NodeRec {
        id: String,
        data: HashMap<String, String>,
    }
    struct EdgeRec {
        id: String,
        source: String,
        target: String,
        data: HashMap<String, String>,
    }

    let mut nodes: Vec<NodeRec> = Vec::new();
    let mut edges: Vec<EdgeRec> = Vec::new();

    enum Scope {
        None,
        Node,
        Edge,
    }
    let mut scope = Scope::None;
    let mut current_key: Option<String> = None;
    let mut buf = Vec::new();

    loop {
        match reader.read_event_into(&mut buf) {
            Err(e) => return Err(parse_err(path, format!("malformed XML: {e}"))),
            Ok(Event::Eof) => break,
            Ok(Event::Start(ref e)) | Ok(Event::Empty(ref e)) => {
                let name = e.name();
                let tag = String::from_utf8_lossy(name.as_ref()).to_string();
                let mut attrs: HashMap<String, String> = HashMap::new();
                for attr in e.attributes().flatten() {
                    attrs.insert(
                        String::from_utf8_lossy(attr.key.as_ref()).to_string(),
                        String::from_utf8_lossy(&attr.value).to_string(),
                    );
                }
                match tag.as_str() {
                    "key" => {
                        if let (Some(id), Some(attr_name)) =
                            (attrs.get("id"), attrs.get("attr.name"))
                        {
                            key_names.insert(id.clone(), attr_name.to_lowercase());
                        }
                    }
                    "node" => {
                        let id = attrs
                            .get("id")
                            .ok_or_else(|| parse_err(path, "node without id"))?
                            .clone();
                        nodes.push(NodeRec {
                            id,
                            data: HashMap::new(),
                        });
                        scope = Scope::Node;
                    }
                    "edge" => {
                        let source = attrs
                            .get("source")
                            .ok_or_else(|| parse_err(path, "edge without source"))?
                            .clone();
                        let target = attrs
                            .get("target")
                            .ok_or_else(|| parse_err(path, "edge without target"))?
                            .clone();
                        let id = attrs
                            .get("id")
                            .cloned()
                            .unwrap_or_else(|| format!("{source}->{target}"));
                        edges.push(EdgeRec {
                            id,
                            source,
                            target,
                            data: HashMap::new(),
                        });
                        scope = Scope::Edge;
                    }
                    "data" => {
                        current_key = attrs
                            .get("key")
                            .map(|k| key_names.get(k).cloned().unwrap_or_else(|| k.clone()));
                    }
                    _ => {}
                }
            }
            Ok(Event::Text(ref t)) => {
                if let Some(key) = current_key.take() {
                    let value = t
                        .unescape()
                        .map_err(|e| parse_err(path, format!("bad data text: {e}")))?
                        .to_string();
                    match scope {
                        Scope::Node => {
                            if let Some(node) = nodes.last_mut() {
                                node.data.insert(key, value);
                            }
                        }
                        Scope::Edge => {
                            if let Some(edge) = edges.last_mut() {
                                edge.data.insert(key, value);
                            }
                        }
                        Scope::None => {}
                    }
                }
            }
            Ok(Event::End(ref e)) => {
                let tag = String::from_utf8_lossy(e.name().as_ref()).to_string();
                if tag == "node" || tag == "edge" {
                    scope = Scope::None;
                }
                if tag == "data" {
                    current_key = None;
                }
            }
            _ => {}
        }
        buf.clear();
    }

    if nodes.is_empty() {
        return Err(parse_err(path, "no nodes found"));
    }

    let pick = |data: &HashMap<String, String>, candidates: &[&str]| -> Option<String> {
        candidates.iter().find_map(|c| data.get(*c).cloned())
    };

    let mut labels = Vec::with_capacity(nodes.len());
    let mut coordinates = Vec::with_capacity(nodes.len());
    let mut id_to_index: HashMap<String, usize> = HashMap::new();
    for (i, node) in nodes.iter().enumerate() {
        let label = pick(&node.data, &["label", "name"]).ok_or_else(|| {
            parse_err(path, format!("node {}: missing attribute `label`", node.id))
        })?;
        let mut coord = [0.0f64; 3];
        for (axis, names) in [("x", ["x", "posx"]), ("y", ["y", "posy"]), ("z", ["z", "posz"])] {
            let raw = pick(&node.data, &names).ok_or_else(|| {
                parse_err(path, format!("node {}: missing attribute `{axis}`", node.id))
            })?;
            coord[match axis {
                "x" => 0,
                "y" => 1,
                _ => 2,
            }] = raw.trim().parse::<f64>().map_err(|_| {
                parse_err(
                    path,
                    format!("node {}: attribute `{axis}` is not numeric: `{raw}`", node.id),
                )
            })?;
        }
        labels.push(label);
        coordinates.push(coord);
        id_to_index.insert(node.id.clone(), i);
    }

    let mut edge_list = Vec::with_capacity(edges.len());
    for edge in &edges {
        let src = *id_to_index.get(&edge.source).ok_or_else(|| {
            parse_err(
                path,
                format!("edge {}: unknown source node `{}`", edge.id, edge.source),
            )
        })?;
        let dst = *id_to_index.get(&edge.target).ok_or_else(|| {
            parse_err(
                path,
                format!("edge {}: unknown target node `{}`", edge.id, edge.target),
            )
        })?;
        let raw = pick(&edge.data, &["weight", "strength", "value"]).ok_or_else(|| {
            parse_err(path, format!("edge {}: missing attribute `weight`", edge.id))
        })?;
        let weight: f64 = raw.trim().parse().map_err(|_| {
            parse_err(
                path,
                format!("edge {}: weight is not numeric: `{raw}`", edge.id),
            )
        })?;
        if weight < 0.0 {
            return Err(parse_err(
                path,
                format!("edge {}: negative weight {weight}", edge.id),
            ));
        }
        edge_list.push((src, dst, weight));
    }

    assemble(coordinates, labels, edge_list, seed_markers)
}

/// Load a connectome from a nodes/edges CSV pair.
///
/// `nodes.csv` columns: `id,label,x,y,z`; `edges.csv` columns:
/// `src,dst,weight`. Header rows are required; duplicate undirected edges
/// are summed.
pub fn load_edge_csv(
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<BrainGraph> {
    load_edge_csv_with_markers(nodes_path, edges_path, &[DEFAULT_SEED_MARKER.to_string()])
}

pub fn load_edge_csv_with_markers(
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
    seed_markers: &[String],
) -> Result<BrainGraph> {
    let nodes_path = nodes_path.as_ref();
    let edges_path = edges_path.as_ref();

    let mut labels = Vec::new();
    let mut coordinates = Vec::new();
    let mut id_to_index: HashMap<i64, usize> = HashMap::new();

    let reader = BufReader::new(File::open(nodes_path)?);
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let row = line_no + 1;
        if line_no == 0 {
            let header = line.to_lowercase();
            if !header.starts_with("id") {
                return Err(parse_err(
                    nodes_path,
                    "missing header row (expected `id,label,x,y,z`)",
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(
                nodes_path,
                format!("row {row}: expected 5 columns `id,label,x,y,z`, got {}", fields.len()),
            ));
        }
        let id: i64 = fields[0].parse().map_err(|_| {
            parse_err(nodes_path, format!("row {row}: node id `{}` is not an integer", fields[0]))
        })?;
        let mut coord = [0.0f64; 3];
        for (k, name) in ["x", "y", "z"].iter().enumerate() {
            coord[k] = fields[2 + k].parse().map_err(|_| {
                parse_err(
                    nodes_path,
                    format!("row {row}: column `{name}` is not numeric: `{}`", fields[2 + k]),
                )
            })?;
        }
        if id_to_index.insert(id, labels.len()).is_some() {
            return Err(parse_err(nodes_path, format!("row {row}: duplicate node id {id}")));
        }
        labels.push(fields[1].to_string());
        coordinates.push(coord);
    }
    if labels.is_empty() {
        return Err(parse_err(nodes_path, "no node rows"));
    }

    let mut edge_list = Vec::new();
    let reader = BufReader::new(File::open(edges_path)?);
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let row = line_no + 1;
        if line_no == 0 {
            let header = line.to_lowercase();
            if !header.starts_with("src") {
                return Err(parse_err(
                    edges_path,
                    "missing header row (expected `src,dst,weight`)",
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                edges_path,
                format!("row {row}: expected 3 columns `src,dst,weight`, got {}", fields.len()),
            ));
        }
        let endpoint = |field: &str| -> Result<usize> {
            let id: i64 = field.parse().map_err(|_| {
                parse_err(edges_path, format!("row {row}: endpoint `{field}` is not an integer"))
            })?;
            id_to_index.get(&id).copied().ok_or_else(|| {
                parse_err(edges_path, format!("row {row}: unknown node id {id}"))
            })
        };
        let src = endpoint(fields[0])?;
        let dst = endpoint(fields[1])?;
        let weight: f64 = fields[2].parse().map_err(|_| {
            parse_err(edges_path, format!("row {row}: weight is not numeric: `{}`", fields[2]))
        })?;
        if weight < 0.0 {
            return Err(parse_err(edges_path, format!("row {row}: negative weight {weight}")));
        }
        edge_list.push((src, dst, weight));
    }

    assemble(coordinates, labels, edge_list, seed_markers)
}

/// Write a graph back to the nodes/edges CSV pair accepted by
/// [`load_edge_csv`], at full double precision.
pub fn save_edge_csv(
    graph: &BrainGraph,
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<()> {
    let mut nodes = BufWriter::new(File::create(nodes_path)?);
    writeln!(nodes, "id,label,x,y,z")?;
    for (i, (coord, label)) in graph
        .coordinates()
        .iter()
        .zip(graph.labels())
        .enumerate()
    {
        writeln!(
            nodes,
            "{i},{label},{:.16e},{:.16e},{:.16e}",
            coord[0], coord[1], coord[2]
        )?;
    }
    nodes.flush()?;

    let mut edges = BufWriter::new(File::create(edges_path)?);
    writeln!(edges, "src,dst,weight")?;
    for (i, j, w) in graph
        .weights(crate::graph::WeightFamily::Connectivity)
        .edges()
    {
        writeln!(edges, "{i},{j},{w:.16e}")?;
    }
    edges.flush()?;
    Ok(())
}

fn assemble(
    coordinates: Vec<[f64; 3]>,
    labels: Vec<String>,
    edge_list: Vec<(usize, usize, f64)>,
    seed_markers: &[String],
) -> Result<BrainGraph> {
    let n = coordinates.len();
    let conn = SparseWeights::from_edges(n, edge_list)?;
    let (cutoff, decay) = default_proximity_params(&coordinates);
    let prox = build_proximity_weights(&coordinates, cutoff, decay)?;
    let seed_set = detect_seed_set(&labels, seed_markers);
    BrainGraph::new(coordinates, labels, conn, prox, seed_set)
}

/// Deterministic synthetic connectome: one Gaussian vertex cluster per
/// region, centers spread over a sphere, connectivity dense within regions
/// and sparse between neighboring regions. The first two regions are the
/// left/right entorhinal cortex and form the seed set.
pub fn generate_synthetic(
    num_vertices: usize,
    num_regions: usize,
    rng_seed: u64,
) -> Result<BrainGraph> {
    if num_regions < 3 || num_vertices < num_regions {
        return Err(Error::InvalidArgument(format!(
            "need num_vertices >= num_regions >= 3 (got {num_vertices}, {num_regions})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scatter = Normal::new(0.0, 0.6).unwrap();

    let sphere_radius = 10.0;
    let centers = fibonacci_sphere(num_regions, sphere_radius);

    let mut region_names = vec!["entorhinal_L".to_string(), "entorhinal_R".to_string()];
    for r in 2..num_regions {
        region_names.push(format!("region_{:02}", r + 1));
    }

    // near-even vertex split, remainder to the leading regions
    let base = num_vertices / num_regions;
    let rem = num_vertices % num_regions;
    let mut labels = Vec::with_capacity(num_vertices);
    let mut coordinates = Vec::with_capacity(num_vertices);
    let mut region_members: Vec<Vec<usize>> = vec![Vec::new(); num_regions];
    for r in 0..num_regions {
        let size = base + usize::from(r < rem);
        for _ in 0..size {
            let v = labels.len();
            labels.push(region_names[r].clone());
            coordinates.push([
                centers[r][0] + scatter.sample(&mut rng),
                centers[r][1] + scatter.sample(&mut rng),
                centers[r][2] + scatter.sample(&mut rng),
            ]);
            region_members[r].push(v);
        }
    }

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    // dense intra-region connectivity
    for members in &region_members {
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                edges.push((members[a], members[b], 0.5 + 0.5 * rng.random::<f64>()));
            }
        }
    }
    // ring over regions guarantees connectivity
    for r in 0..num_regions {
        let s = (r + 1) % num_regions;
        edges.push((
            region_members[r][0],
            region_members[s][0],
            0.1 + 0.1 * rng.random::<f64>(),
        ));
    }
    // a couple of geometric shortcuts per region (2 nearest center neighbors)
    for r in 0..num_regions {
        let mut others: Vec<(usize, f64)> = (0..num_regions)
            .filter(|&s| s != r)
            .map(|s| {
                let d: f64 = (0..3)
                    .map(|k| (centers[r][k] - centers[s][k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (s, d)
            })
            .collect();
        others.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for &(s, _) in others.iter().take(2) {
            if r < s {
                edges.push((
                    region_members[r][0],
                    region_members[s][0],
                    0.05 + 0.05 * rng.random::<f64>(),
                ));
            }
        }
    }

    let conn = SparseWeights::from_edges(num_vertices, edges)?;
    let (cutoff, decay) = default_proximity_params(&coordinates);
    let prox = build_proximity_weights(&coordinates, cutoff, decay)?;
    let seed_set = detect_seed_set(&labels, &[DEFAULT_SEED_MARKER.to_string()]);
    BrainGraph::new(coordinates, labels, conn, prox, seed_set)
}

/// Evenly spread points on a sphere (golden-angle spiral).
fn fibonacci_sphere(count: usize, radius: f64) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|i| {
            let y = if count == 1 {
                0.0
            } else {
                1.0 - 2.0 * (i as f64) / ((count - 1) as f64)
            };
            let r = (1.0 - y * y).max(0.0).sqrt();
            let theta = golden * i as f64;
            [
                radius * r * theta.cos(),
                radius * y,
                radius * r * theta.sin(),
            ]
        })
        .collect()
}
