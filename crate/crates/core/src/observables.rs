//! Reduction of snapshot sequences to the reported quantities: global and
//! per-region compartment burdens, the per-vertex/per-region/global disease
//! indices, peak detection, and the CSV export schema.

use std::io::{self, BufRead, Write};

use crate::aggregation::ProteinField;
use crate::connectome::RegionTable;
use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::health::{malfunction_mean, HealthDensity};

/// Vertex-mean concentration per compartment (all parcels weigh equally).
pub fn global_burden(field: &ProteinField) -> [f64; 5] {
    let n = field.num_vertices() as f64;
    let mut sums = [0.0; 5];
    for v in field.iter() {
        for i in 0..5 {
            sums[i] += v[i];
        }
    }
    sums.map(|s| s / n)
}

/// Per-region vertex-mean concentration per compartment.
///
/// The region-size-weighted average of the regional means recovers the
/// global mean exactly.
pub fn regional_burden(field: &ProteinField, regions: &RegionTable) -> Result<Vec<[f64; 5]>> {
    let mut out = Vec::with_capacity(regions.num_regions());
    for r in 0..regions.num_regions() {
        let members = regions.members(r);
        if members.is_empty() {
            return Err(Error::Config(format!(
                "region `{}` has no vertices",
                regions.names()[r]
            )));
        }
        let mut sums = [0.0; 5];
        for &m in members {
            let v = field.vertex(m);
            for i in 0..5 {
                sums[i] += v[i];
            }
        }
        out.push(sums.map(|s| s / members.len() as f64));
    }
    Ok(out)
}

/// Disease indices: mean malfunction per vertex, per region, and globally.
#[derive(Debug, Clone)]
pub struct DiseaseIndices {
    pub per_vertex: Vec<f64>,
    pub per_region: Vec<f64>,
    pub global: f64,
}

pub fn disease_indices(f: &HealthDensity, regions: &RegionTable) -> DiseaseIndices {
    let per_vertex: Vec<f64> = (0..f.num_vertices())
        .map(|m| malfunction_mean(f.vertex(m)))
        .collect();
    let per_region: Vec<f64> = (0..regions.num_regions())
        .map(|r| {
            let members = regions.members(r);
            members.iter().map(|&m| per_vertex[m]).sum::<f64>() / members.len() as f64
        })
        .collect();
    let global = per_vertex.iter().sum::<f64>() / per_vertex.len() as f64;
    DiseaseIndices {
        per_vertex,
        per_region,
        global,
    }
}

/// Sampled observable series for a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    pub times: Vec<f64>,
    /// `[snapshot][compartment]`
    pub global_u: Vec<[f64; 5]>,
    pub global_tau: Vec<[f64; 5]>,
    pub global_a: Vec<f64>,
    /// `[snapshot][region][compartment]`
    pub regional_u: Vec<Vec<[f64; 5]>>,
    pub regional_tau: Vec<Vec<[f64; 5]>>,
    /// `[snapshot][region]`
    pub regional_a: Vec<Vec<f64>>,
    pub region_names: Vec<String>,
}

impl TimeSeriesRecord {
    pub fn from_snapshots(snapshots: &[SimState], regions: &RegionTable) -> Result<Self> {
        let mut record = TimeSeriesRecord {
            times: Vec::new(),
            global_u: Vec::new(),
            global_tau: Vec::new(),
            global_a: Vec::new(),
            regional_u: Vec::new(),
            regional_tau: Vec::new(),
            regional_a: Vec::new(),
            region_names: regions.names().to_vec(),
        };
        for state in snapshots {
            if let Some(&last) = record.times.last() {
                if state.t <= last {
                    return Err(Error::InvalidArgument(format!(
                        "snapshot times must increase strictly ({last} then {})",
                        state.t
                    )));
                }
            }
            let indices = disease_indices(&state.f, regions);
            record.times.push(state.t);
            record.global_u.push(global_burden(&state.u));
            record.global_tau.push(global_burden(&state.tau));
            record.global_a.push(indices.global);
            record.regional_u.push(regional_burden(&state.u, regions)?);
            record.regional_tau.push(regional_burden(&state.tau, regions)?);
            record.regional_a.push(indices.per_region);
        }
        Ok(record)
    }

    pub fn num_snapshots(&self) -> usize {
        self.times.len()
    }

    /// Global series of one amyloid compartment (0-based).
    pub fn u_series(&self, compartment: usize) -> Vec<f64> {
        self.global_u.iter().map(|v| v[compartment]).collect()
    }

    pub fn tau_series(&self, compartment: usize) -> Vec<f64> {
        self.global_tau.iter().map(|v| v[compartment]).collect()
    }

    pub fn regional_a_series(&self, region: usize) -> Vec<f64> {
        self.regional_a.iter().map(|row| row[region]).collect()
    }

    pub fn regional_u_series(&self, region: usize, compartment: usize) -> Vec<f64> {
        self.regional_u
            .iter()
            .map(|row| row[region][compartment])
            .collect()
    }

    pub fn regional_tau_series(&self, region: usize, compartment: usize) -> Vec<f64> {
        self.regional_tau
            .iter()
            .map(|row| row[region][compartment])
            .collect()
    }

    /// CSV schema: `time`, `u1..u5`, `tau1..tau5`, `A`, then per-region
    /// blocks `<region>/u1..u5`, `<region>/tau1..tau5`, `<region>/A`.
    /// Values carry 17 significant digits and parse back bit-identically.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let mut header = String::from("time");
        for i in 1..=5 {
            header.push_str(&format!(",u{i}"));
        }
        for i in 1..=5 {
            header.push_str(&format!(",tau{i}"));
        }
        header.push_str(",A");
        for name in &self.region_names {
            let name = sanitize(name);
            for i in 1..=5 {
                header.push_str(&format!(",{name}/u{i}"));
            }
            for i in 1..=5 {
                header.push_str(&format!(",{name}/tau{i}"));
            }
            header.push_str(&format!(",{name}/A"));
        }
        writeln!(w, "{header}")?;

        for s in 0..self.num_snapshots() {
            let mut line = format!("{:.16e}", self.times[s]);
            for i in 0..5 {
                line.push_str(&format!(",{:.16e}", self.global_u[s][i]));
            }
            for i in 0..5 {
                line.push_str(&format!(",{:.16e}", self.global_tau[s][i]));
            }
            line.push_str(&format!(",{:.16e}", self.global_a[s]));
            for r in 0..self.region_names.len() {
                for i in 0..5 {
                    line.push_str(&format!(",{:.16e}", self.regional_u[s][r][i]));
                }
                for i in 0..5 {
                    line.push_str(&format!(",{:.16e}", self.regional_tau[s][r][i]));
                }
                line.push_str(&format!(",{:.16e}", self.regional_a[s][r]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parse a CSV produced by [`Self::write_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse {
                source_name: "csv".into(),
                message: "empty file".into(),
            })?
            .map_err(Error::Io)?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 12 || columns[0] != "time" {
            return Err(Error::Parse {
                source_name: "csv".into(),
                message: "unexpected header".into(),
            });
        }
        let mut region_names = Vec::new();
        let mut c = 12;
        while c < columns.len() {
            let name = columns[c]
                .split('/')
                .next()
                .unwrap_or_default()
                .to_string();
            region_names.push(name);
            c += 11;
        }

        let mut record = TimeSeriesRecord {
            times: Vec::new(),
            global_u: Vec::new(),
            global_tau: Vec::new(),
            global_a: Vec::new(),
            regional_u: Vec::new(),
            regional_tau: Vec::new(),
            regional_a: Vec::new(),
            region_names,
        };
        for (row, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        source_name: "csv".into(),
                        message: format!("row {}: non-numeric field `{v}`", row + 2),
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != columns.len() {
                return Err(Error::Parse {
                    source_name: "csv".into(),
                    message: format!("row {}: wrong field count", row + 2),
                });
            }
            record.times.push(fields[0]);
            record.global_u.push([fields[1], fields[2], fields[3], fields[4], fields[5]]);
            record
                .global_tau
                .push([fields[6], fields[7], fields[8], fields[9], fields[10]]);
            record.global_a.push(fields[11]);
            let mut ru = Vec::new();
            let mut rtau = Vec::new();
            let mut ra = Vec::new();
            let mut c = 12;
            for _ in 0..record.region_names.len() {
                ru.push([fields[c], fields[c + 1], fields[c + 2], fields[c + 3], fields[c + 4]]);
                rtau.push([
                    fields[c + 5],
                    fields[c + 6],
                    fields[c + 7],
                    fields[c + 8],
                    fields[c + 9],
                ]);
                ra.push(fields[c + 10]);
                c += 11;
            }
            record.regional_u.push(ru);
            record.regional_tau.push(rtau);
            record.regional_a.push(ra);
        }
        Ok(record)
    }
}

fn sanitize(name: &str) -> String {
    name.replace([',', '\n', '\r'], ";")
}

/// Peak analysis of one series.
#[derive(Debug, Clone, Copy)]
pub struct PeakInfo {
    pub max: f64,
    pub argmax_time: f64,
    pub final_value: f64,
    /// Maximum strictly inside the window and final value at most 90% of it.
    pub peaked: bool,
}

pub fn peak_info(times: &[f64], values: &[f64]) -> PeakInfo {
    assert_eq!(times.len(), values.len());
    assert!(!values.is_empty());
    let mut argmax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = i;
        }
    }
    let max = values[argmax];
    let final_value = *values.last().unwrap();
    let interior = argmax > 0 && argmax + 1 < values.len();
    PeakInfo {
        max,
        argmax_time: times[argmax],
        final_value,
        peaked: interior && final_value <= 0.9 * max,
    }
}
