//! Problem instances: demand, competitors, clusters and pre-existing chain
//! facilities, plus the reproducible generator and the sectioned text format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::lcg::{LcgState, LcgStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandPoint {
    pub location: Point,
    pub buying_power: f64,
}

/// A competing facility selling the chain's product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompetitorFacility {
    pub location: Point,
    pub attractiveness: f64,
}

/// A facility selling a different product; the second stop of a
/// multipurpose trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterFacility {
    pub location: Point,
    pub attractiveness: f64,
}

/// An existing facility of the chain. Part of the chain's capture, never
/// moved by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedChainFacility {
    pub location: Point,
    pub attractiveness: f64,
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    demand: Vec<DemandPoint>,
    competitors: Vec<CompetitorFacility>,
    clusters: Vec<ClusterFacility>,
    fixed_chain: Vec<FixedChainFacility>,
    total_buying_power: f64,
}

fn check_point(what: &str, idx: usize, p: Point) -> Result<()> {
    if p.x.is_finite() && p.y.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} {idx} has non-finite coordinates")))
    }
}

fn check_positive(what: &str, idx: usize, field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} {idx}: {field} must be positive and finite, got {v}")))
    }
}

impl Instance {
    pub fn new(
        demand: Vec<DemandPoint>,
        competitors: Vec<CompetitorFacility>,
        clusters: Vec<ClusterFacility>,
        fixed_chain: Vec<FixedChainFacility>,
    ) -> Result<Self> {
        if demand.is_empty() {
            return Err(Error::Validation("no demand points".into()));
        }
        for (i, d) in demand.iter().enumerate() {
            check_point("demand point", i, d.location)?;
            check_positive("demand point", i, "buying power", d.buying_power)?;
        }
        for (k, c) in competitors.iter().enumerate() {
            check_point("competitor", k, c.location)?;
            check_positive("competitor", k, "attractiveness", c.attractiveness)?;
        }
        for (m, c) in clusters.iter().enumerate() {
            check_point("cluster", m, c.location)?;
            check_positive("cluster", m, "attractiveness", c.attractiveness)?;
        }
        for (j, f) in fixed_chain.iter().enumerate() {
            check_point("fixed chain facility", j, f.location)?;
            check_positive("fixed chain facility", j, "attractiveness", f.attractiveness)?;
        }
        if competitors.is_empty() && fixed_chain.is_empty() {
            return Err(Error::Validation(
                "instance needs at least one competitor or fixed chain facility".into(),
            ));
        }
        let total_buying_power: f64 = demand.iter().map(|d| d.buying_power).sum();
        if !(total_buying_power > 0.0 && total_buying_power.is_finite()) {
            return Err(Error::Validation("total buying power must be positive".into()));
        }
        Ok(Self { demand, competitors, clusters, fixed_chain, total_buying_power })
    }

    pub fn demand(&self) -> &[DemandPoint] {
        &self.demand
    }

    pub fn competitors(&self) -> &[CompetitorFacility] {
        &self.competitors
    }

    pub fn clusters(&self) -> &[ClusterFacility] {
        &self.clusters
    }

    pub fn fixed_chain(&self) -> &[FixedChainFacility] {
        &self.fixed_chain
    }

    pub fn n(&self) -> usize {
        self.demand.len()
    }

    pub fn total_buying_power(&self) -> f64 {
        self.total_buying_power
    }

    /// Copy of this instance with every coordinate shifted by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(
            self.demand
                .iter()
                .map(|d| DemandPoint { location: d.location.translate(dx, dy), ..*d })
                .collect(),
            self.competitors
                .iter()
                .map(|c| CompetitorFacility { location: c.location.translate(dx, dy), ..*c })
                .collect(),
            self.clusters
                .iter()
                .map(|c| ClusterFacility { location: c.location.translate(dx, dy), ..*c })
                .collect(),
            self.fixed_chain
                .iter()
                .map(|f| FixedChainFacility { location: f.location.translate(dx, dy), ..*f })
                .collect(),
        )
    }
}

/// Seeds for the independent generator streams, one per entity class and
/// attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSet {
    pub demand: LcgState,
    pub buying_power: LcgState,
    pub competitors: LcgState,
    pub competitor_attractiveness: LcgState,
    pub clusters: LcgState,
    pub cluster_attractiveness: LcgState,
}

impl SeedSet {
    pub const DEFAULT_DEMAND: u64 = 97_531;
    pub const DEFAULT_BUYING_POWER: u64 = 24_681;
    pub const DEFAULT_COMPETITORS: u64 = 11_111;
    pub const DEFAULT_COMPETITOR_ATTRACTIVENESS: u64 = 31_413;
    pub const DEFAULT_CLUSTERS: u64 = 77_777;
    pub const DEFAULT_CLUSTER_ATTRACTIVENESS: u64 = 13_579;

    pub fn from_seeds(seeds: [u64; 6]) -> Result<Self> {
        Ok(Self {
            demand: LcgState::new(seeds[0])?,
            buying_power: LcgState::new(seeds[1])?,
            competitors: LcgState::new(seeds[2])?,
            competitor_attractiveness: LcgState::new(seeds[3])?,
            clusters: LcgState::new(seeds[4])?,
            cluster_attractiveness: LcgState::new(seeds[5])?,
        })
    }

    /// Derive all six streams from a single user seed `s`: stream `k` starts at
    /// the state reached after `k·1000` steps from `s`.
    pub fn derived(seed: u64) -> Result<Self> {
        let mut s = LcgState::new(seed)?;
        let mut out = [s; 6];
        for slot in out.iter_mut() {
            *slot = s;
            for _ in 0..1000 {
                s = s.next();
            }
        }
        Ok(Self {
            demand: out[0],
            buying_power: out[1],
            competitors: out[2],
            competitor_attractiveness: out[3],
            clusters: out[4],
            cluster_attractiveness: out[5],
        })
    }
}

impl Default for SeedSet {
    fn default() -> Self {
        Self::from_seeds([
            Self::DEFAULT_DEMAND,
            Self::DEFAULT_BUYING_POWER,
            Self::DEFAULT_COMPETITORS,
            Self::DEFAULT_COMPETITOR_ATTRACTIVENESS,
            Self::DEFAULT_CLUSTERS,
            Self::DEFAULT_CLUSTER_ATTRACTIVENESS,
        ])
        .expect("default seeds are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub competitors: usize,
    pub clusters: usize,
    /// Coordinates are drawn in `[lo, hi]²`.
    pub region: (f64, f64),
    pub buying_power: (f64, f64),
    pub competitor_attractiveness: (f64, f64),
    pub cluster_attractiveness: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            competitors: 10,
            clusters: 10,
            region: (0.0, 10.0),
            buying_power: (0.0, 2.0),
            competitor_attractiveness: (0.5, 2.0),
            cluster_attractiveness: (0.5, 2.0),
        }
    }
}

fn check_range(name: &str, (a, b): (f64, f64)) -> Result<()> {
    if a < b && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} range ({a}, {b}) is empty")))
    }
}

fn draw_points(seed: LcgState, count: usize, (lo, hi): (f64, f64)) -> Vec<Point> {
    let mut s = LcgStream::new(seed);
    (0..count)
        .map(|_| {
            let x = s.draw(lo, hi);
            let y = s.draw(lo, hi);
            Point::new(x, y)
        })
        .collect()
}

fn draw_values(seed: LcgState, count: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    let mut s = LcgStream::new(seed);
    (0..count).map(|_| s.draw(lo, hi)).collect()
}

/// Deterministic uniform-square instance with `n` demand points.
///
/// Each point consumes two consecutive draws of its class's coordinate stream
/// (x, then y). With the default `[0, 10]` region a coordinate is `r/100000`.
/// Buying power and attractiveness come from their own streams.
pub fn generate_instance(n: usize, seeds: &SeedSet, config: &GeneratorConfig) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    check_range("region", config.region)?;
    check_range("buying power", config.buying_power)?;
    check_range("competitor attractiveness", config.competitor_attractiveness)?;
    check_range("cluster attractiveness", config.cluster_attractiveness)?;
    if config.buying_power.0 < 0.0
        || config.competitor_attractiveness.0 < 0.0
        || config.cluster_attractiveness.0 < 0.0
    {
        return Err(Error::InvalidArgument("weight ranges must be non-negative".into()));
    }

    let demand = draw_points(seeds.demand, n, config.region)
        .into_iter()
        .zip(draw_values(seeds.buying_power, n, config.buying_power))
        .map(|(location, buying_power)| DemandPoint { location, buying_power })
        .collect();
    let competitors = draw_points(seeds.competitors, config.competitors, config.region)
        .into_iter()
        .zip(draw_values(
            seeds.competitor_attractiveness,
            config.competitors,
            config.competitor_attractiveness,
        ))
        .map(|(location, attractiveness)| CompetitorFacility { location, attractiveness })
        .collect();
    let clusters = draw_points(seeds.clusters, config.clusters, config.region)
        .into_iter()
        .zip(draw_values(
            seeds.cluster_attractiveness,
            config.clusters,
            config.cluster_attractiveness,
        ))
        .map(|(location, attractiveness)| ClusterFacility { location, attractiveness })
        .collect();

    Instance::new(demand, competitors, clusters, Vec::new())
}

const SECTIONS: [&str; 4] = ["DEMAND", "COMPETITORS", "CLUSTERS", "FIXED_CHAIN"];

/// Serialise to the sectioned text format. Values are written in Rust's
/// shortest round-trip decimal form, so reading back is exact.
pub fn format_instance(instance: &Instance) -> String {
    let mut out = String::from("# chainloc instance v1\n");
    let mut section = |name: &str, weight: &str, rows: &mut dyn Iterator<Item = (Point, f64)>| {
        let _ = writeln!(out, "{name}");
        let _ = writeln!(out, "x,y,{weight}");
        for (p, w) in rows {
            let _ = writeln!(out, "{:?},{:?},{:?}", p.x, p.y, w);
        }
    };
    section(
        SECTIONS[0],
        "buying_power",
        &mut instance.demand.iter().map(|d| (d.location, d.buying_power)),
    );
    section(
        SECTIONS[1],
        "attractiveness",
        &mut instance.competitors.iter().map(|c| (c.location, c.attractiveness)),
    );
    section(
        SECTIONS[2],
        "attractiveness",
        &mut instance.clusters.iter().map(|c| (c.location, c.attractiveness)),
    );
    section(
        SECTIONS[3],
        "attractiveness",
        &mut instance.fixed_chain.iter().map(|f| (f.location, f.attractiveness)),
    );
    out
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_instance(instance))
        .map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    parse_instance(&text, path)
}

/// Parse the sectioned format. `origin` only labels error messages.
pub fn parse_instance(text: &str, origin: &Path) -> Result<Instance> {
    let mut rows: [Vec<(Point, f64)>; 4] = Default::default();
    let mut current: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(s) = SECTIONS.iter().position(|&name| line.eq_ignore_ascii_case(name)) {
            current = Some(s);
            continue;
        }
        let parse_err = |field: &str, message: String| Error::Parse {
            path: origin.to_owned(),
            line: line_no,
            field: field.to_owned(),
            message,
        };
        let Some(section) = current else {
            return Err(parse_err("section", format!("record `{line}` before any section header")));
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let weight_name = if section == 0 { "buying_power" } else { "attractiveness" };
        if fields.len() == 3 && fields[0] == "x" && fields[1] == "y" && fields[2] == weight_name {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(
                "record",
                format!("expected 3 comma-separated fields, found {}", fields.len()),
            ));
        }
        let mut values = [0.0; 3];
        for (v, (name, text)) in values.iter_mut().zip(["x", "y", weight_name].into_iter().zip(&fields)) {
            *v = text
                .parse::<f64>()
                .map_err(|e| parse_err(name, format!("`{text}`: {e}")))?;
        }
        rows[section].push((Point::new(values[0], values[1]), values[2]));
    }

    let [demand, competitors, clusters, fixed] = rows;
    Instance::new(
        demand.into_iter().map(|(location, buying_power)| DemandPoint { location, buying_power }).collect(),
        competitors
            .into_iter()
            .map(|(location, attractiveness)| CompetitorFacility { location, attractiveness })
            .collect(),
        clusters
            .into_iter()
            .map(|(location, attractiveness)| ClusterFacility { location, attractiveness })
            .collect(),
        fixed
            .into_iter()
            .map(|(location, attractiveness)| FixedChainFacility { location, attractiveness })
            .collect(),
    )
}
