use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::{i_over_n_ccdf, RunReport, SimulationOutput};
use crate::rf::linear_to_db;
use crate::selection::write_assignments;
use crate::Result;

pub fn write_report(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsRow {
    slot: usize,
    num_links: usize,
    lf_count: usize,
    lf_rate: f64,
    f_con: usize,
    edge_count: usize,
    delta_r_hat: f64,
    gamma_v: f64,
    reuse_count: usize,
    switch_events: usize,
    continuity_events: usize,
    num_subgraphs: usize,
    cut_edges: usize,
    mean_block_density: f64,
}

#[derive(Serialize)]
struct AllocationRow {
    slot: usize,
    gateway: u32,
    antenna: usize,
    sat: i64,
    color: u32,
    reuse: u32,
    i_over_n_db: Option<f64>,
}

#[derive(Serialize)]
struct TimingRow {
    slot: usize,
    selection_ms: f64,
    interference_ms: f64,
    graph_ms: f64,
    coloring_ms: f64,
    recolor_ms: f64,
    vsu_ms: f64,
    max_subgraph_ms: f64,
    sum_subgraph_ms: f64,
}

/// Writes `report.json`, `metrics.csv`, `allocation.csv`, `assignments.csv`,
/// `allocation.geojson`, `ccdf.csv` and `timing.csv` into `dir`.
pub fn write_outputs(out: &SimulationOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_report(&out.report, dir.join("report.json"))?;

    let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
    for s in &out.report.slots {
        w.serialize(MetricsRow {
            slot: s.slot,
            num_links: s.num_links,
            lf_count: s.lf_count,
            lf_rate: s.lf_rate,
            f_con: s.f_con,
            edge_count: s.edge_count,
            delta_r_hat: s.delta_r_hat,
            gamma_v: s.gamma_v,
            reuse_count: s.reuse_count,
            switch_events: s.switch_events,
            continuity_events: s.continuity_events,
            num_subgraphs: s.num_subgraphs,
            cut_edges: s.cut_edges,
            mean_block_density: s.mean_block_density,
        })?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("allocation.csv"))?;
    for rec in &out.slots {
        for (v, e) in rec.assignment.entries.iter().enumerate() {
            w.serialize(AllocationRow {
                slot: rec.assignment.slot,
                gateway: e.gateway_id,
                antenna: e.antenna,
                sat: e.sat.map_or(-1, |s| s.0 as i64),
                color: rec.colors[v],
                reuse: rec.reuse[v],
                i_over_n_db: rec.i_over_n[v].map(linear_to_db),
            })?;
        }
    }
    w.flush()?;

    write_assignments(dir.join("assignments.csv"), out.slots.iter().map(|r| &r.assignment))?;

    let samples: Vec<f64> = out
        .slots
        .iter()
        .flat_map(|r| r.i_over_n.iter().flatten().map(|&x| linear_to_db(x)))
        .collect();
    let mut w = csv::Writer::from_path(dir.join("ccdf.csv"))?;
    w.write_record(["i_over_n_db", "ccdf"])?;
    for (x, p) in i_over_n_ccdf(&samples) {
        w.write_record([x.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("timing.csv"))?;
    for s in &out.report.slots {
        let t = &s.timing;
        w.serialize(TimingRow {
            slot: s.slot,
            selection_ms: t.selection_ms,
            interference_ms: t.interference_ms,
            graph_ms: t.graph_ms,
            coloring_ms: t.coloring_ms,
            recolor_ms: t.recolor_ms,
            vsu_ms: t.vsu_ms,
            max_subgraph_ms: t.subgraph_ms.iter().copied().fold(0.0, f64::max),
            sum_subgraph_ms: t.subgraph_ms.iter().sum(),
        })?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("allocation.geojson"))?);
    serde_json::to_writer(&mut w, &geojson(out))?;
    w.flush()?;
    Ok(())
}

fn geojson(out: &SimulationOutput) -> serde_json::Value {
    let mut features = Vec::new();
    for g in &out.config.gateways {
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [g.longitude_deg, g.latitude_deg]},
            "properties": {"kind": "gateway", "gateway": g.id, "n_antennas": g.n_antennas},
        }));
    }
    for rec in &out.slots {
        for (v, e) in rec.assignment.entries.iter().enumerate() {
            let (Some(sat), Some((lat, lon))) = (e.sat, rec.sat_subpoints[v]) else {
                continue;
            };
            let gw = out.config.gateways.iter().find(|g| g.id == e.gateway_id).expect("gateway exists");
            features.push(json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[gw.longitude_deg, gw.latitude_deg], [lon, lat]],
                },
                "properties": {
                    "kind": "link",
                    "slot": rec.assignment.slot,
                    "gateway": e.gateway_id,
                    "antenna": e.antenna,
                    "sat": sat.0,
                    "color": rec.colors[v],
                    "reuse": rec.reuse[v],
                },
            }));
        }
    }
    json!({"type": "FeatureCollection", "features": features})
}
