//! Figure builders: turn a [`TimeSeriesRecord`] into the three standard SVG
//! figures of a run, plus the sweep overlay.

use proteograph::observables::TimeSeriesRecord;

use crate::plot::{line_chart, panel_grid, ChartConfig, Series};

fn is_seed_region(name: &str) -> bool {
    name.to_lowercase().contains("entorhinal")
}

/// Per-series point budget keeping a whole figure under the 2 MB limit.
/// Figures with few series keep every sample; many-region figures get
/// strided polylines (the CSV always holds the full-resolution data).
fn point_cap(total_series: usize) -> usize {
    (120_000 / total_series.max(1)).max(100)
}

fn zip_series_capped(times: &[f64], values: &[f64], cap: usize) -> Vec<(f64, f64)> {
    let n = times.len();
    let stride = n.div_ceil(cap).max(1);
    let mut points: Vec<(f64, f64)> = (0..n)
        .step_by(stride)
        .map(|i| (times[i], values[i]))
        .collect();
    if let (Some(&last_t), Some(&last_v)) = (times.last(), values.last()) {
        if points.last().map(|p| p.0) != Some(last_t) {
            points.push((last_t, last_v));
        }
    }
    points
}

fn zip_series(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    zip_series_capped(times, values, usize::MAX)
}

/// Two panels: global amyloid and tau burdens per compartment.
pub fn global_burden_figure(record: &TimeSeriesRecord, log_y: bool) -> String {
    let compartment_names = ["monomers", "dimers", "short oligomers", "long oligomers", "plaques/tangles"];
    let mut panels = Vec::new();
    for (protein, prefix) in [("amyloid-beta", "u"), ("tau", "tau")] {
        let mut series = Vec::new();
        for i in 0..5 {
            let values = if prefix == "u" {
                record.u_series(i)
            } else {
                record.tau_series(i)
            };
            series.push(Series::new(
                format!("{prefix}{} ({})", i + 1, compartment_names[i]),
                zip_series(&record.times, &values),
                i,
            ));
        }
        panels.push((
            ChartConfig {
                title: format!("global {protein} burden"),
                x_label: "t".into(),
                y_label: "vertex-mean concentration".into(),
                log_y,
                ..ChartConfig::default()
            },
            series,
        ));
    }
    panel_grid("", &panels, 2)
}

/// Six panels: per-region monomers, soluble oligomers (sum of lengths 2-4),
/// and insoluble clusters, for each protein. Seed (entorhinal) regions are
/// dashed.
pub fn regional_burden_figure(record: &TimeSeriesRecord, log_y: bool) -> String {
    let groups: [(&str, Vec<usize>); 3] = [
        ("monomers", vec![0]),
        ("oligomers", vec![1, 2, 3]),
        ("plaques / tangles", vec![4]),
    ];
    let cap = point_cap(6 * record.region_names.len());
    let mut panels = Vec::new();
    for prefix in ["u", "tau"] {
        for (group_name, compartments) in &groups {
            let mut series = Vec::new();
            for (r, name) in record.region_names.iter().enumerate() {
                let values: Vec<f64> = (0..record.num_snapshots())
                    .map(|s| {
                        compartments
                            .iter()
                            .map(|&i| {
                                if prefix == "u" {
                                    record.regional_u[s][r][i]
                                } else {
                                    record.regional_tau[s][r][i]
                                }
                            })
                            .sum()
                    })
                    .collect();
                let mut sr =
                    Series::new(name.clone(), zip_series_capped(&record.times, &values, cap), r);
                if is_seed_region(name) {
                    sr = sr.dashed();
                }
                series.push(sr);
            }
            panels.push((
                ChartConfig {
                    title: format!(
                        "{} {group_name} per region",
                        if prefix == "u" { "amyloid" } else { "tau" }
                    ),
                    x_label: "t".into(),
                    y_label: String::new(),
                    log_y,
                    legend: record.region_names.len() <= 12,
                    width: 460.0,
                    height: 340.0,
                },
                series,
            ));
        }
    }
    panel_grid("", &panels, 3)
}

/// Regional disease indices (seed regions dashed) next to the global index.
pub fn disease_figure(record: &TimeSeriesRecord) -> String {
    let cap = point_cap(2 * (record.region_names.len() + 1));
    let mut regional = Vec::new();
    for (r, name) in record.region_names.iter().enumerate() {
        let mut sr = Series::new(
            name.clone(),
            zip_series_capped(&record.times, &record.regional_a_series(r), cap),
            r,
        );
        if is_seed_region(name) {
            sr = sr.dashed();
        }
        regional.push(sr);
    }
    let global = vec![Series::new(
        "A(t)",
        zip_series(&record.times, &record.global_a),
        0,
    )];
    let panels = vec![
        (
            ChartConfig {
                title: "disease index per region".into(),
                y_label: "mean malfunction".into(),
                legend: record.region_names.len() <= 12,
                ..ChartConfig::default()
            },
            regional,
        ),
        (
            ChartConfig {
                title: "disease index, whole brain".into(),
                y_label: "mean malfunction".into(),
                ..ChartConfig::default()
            },
            global,
        ),
    ];
    panel_grid("", &panels, 2)
}

/// One chart overlaying the global disease index of several runs.
pub fn disease_overlay_figure(curves: &[(String, Vec<f64>, Vec<f64>)]) -> String {
    let series: Vec<Series> = curves
        .iter()
        .enumerate()
        .map(|(i, (label, times, values))| Series::new(label.clone(), zip_series(times, values), i))
        .collect();
    line_chart(
        &ChartConfig {
            title: "disease index, whole brain".into(),
            y_label: "mean malfunction".into(),
            ..ChartConfig::default()
        },
        &series,
    )
}
