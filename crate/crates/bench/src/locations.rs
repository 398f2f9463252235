use std::io::Write;

use anyhow::Result;
use chainloc::{distance, Instance, Point};
use serde::Serialize;

use crate::grid::ResultRecord;

pub const LOCATIONS_HEADER: &str = "class,x,y,weight";
/// Distance under which a new facility counts as located at a cluster.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationRow {
    pub class: &'static str,
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Every entity of `instance` plus the record's new facilities. Demand rows
/// carry buying power, facility rows attractiveness.
pub fn emit_locations(instance: &Instance, record: &ResultRecord, new_attractiveness: f64) -> Result<Vec<LocationRow>> {
    let points = record.points().ok_or_else(|| anyhow::anyhow!("record carries no layout"))?;
    let mut rows = Vec::with_capacity(instance.n() + points.len() + 20);
    let row = |class, p: Point, weight| LocationRow { class, x: p.x, y: p.y, weight };
    rows.extend(instance.demand().iter().map(|d| row("demand", d.location, d.buying_power)));
    rows.extend(instance.competitors().iter().map(|c| row("competitor", c.location, c.attractiveness)));
    rows.extend(instance.clusters().iter().map(|c| row("cluster", c.location, c.attractiveness)));
    rows.extend(instance.fixed_chain().iter().map(|f| row("fixed_chain", f.location, f.attractiveness)));
    rows.extend(points.into_iter().map(|p| row("new_facility", p, new_attractiveness)));
    Ok(rows)
}

pub fn write_locations<W: Write>(rows: &[LocationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(LOCATIONS_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Number of new facilities within `tolerance` of some cluster.
pub fn cluster_coincidences(instance: &Instance, facilities: &[Point], tolerance: f64) -> usize {
    facilities
        .iter()
        .filter(|&&f| instance.clusters().iter().any(|c| distance(c.location, f) < tolerance))
        .count()
}
