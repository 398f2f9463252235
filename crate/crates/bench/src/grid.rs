use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use chainloc::{
    generate_instance, multistart_optimize, read_instance, DecayKind, DecayModel, GeneratorConfig, Instance,
    OptimizerConfig, Point, SeedSet, TripMix,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DESK_NS: [usize; 5] = [100, 200, 500, 1000, 2000];
pub const PAPER_NS: [usize; 9] = [100, 200, 500, 1000, 2000, 5000, 10000, 15000, 20000];
pub const DEFAULT_PS: [usize; 8] = [1, 2, 3, 4, 5, 10, 15, 20];
pub const DEFAULT_PIS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const DESK_STARTS: usize = 20;
pub const PAPER_STARTS: usize = 100;

#[derive(Debug, Clone)]
pub enum InstanceSource {
    Generated { seeds: SeedSet, config: GeneratorConfig },
    /// Directory holding one `n<N>.txt` instance file per size.
    Directory(PathBuf),
}

impl Default for InstanceSource {
    fn default() -> Self {
        InstanceSource::Generated { seeds: SeedSet::default(), config: GeneratorConfig::default() }
    }
}

impl InstanceSource {
    pub fn file_for(dir: &Path, n: usize) -> PathBuf {
        dir.join(format!("n{n}.txt"))
    }

    pub fn load(&self, n: usize) -> Result<Instance> {
        match self {
            InstanceSource::Generated { seeds, config } => {
                Ok(generate_instance(n, seeds, config).with_context(|| format!("generating n={n}"))?)
            }
            InstanceSource::Directory(dir) => {
                let path = Self::file_for(dir, n);
                let inst = read_instance(&path).with_context(|| format!("loading {}", path.display()))?;
                anyhow::ensure!(inst.n() == n, "{} holds {} demand points, expected {n}", path.display(), inst.n());
                Ok(inst)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub n: usize,
    pub p: usize,
    pub pi: f64,
    pub decay: DecayKind,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub ns: Vec<usize>,
    pub ps: Vec<usize>,
    pub pis: Vec<f64>,
    /// Decay kinds with their λ.
    pub decays: Vec<(DecayKind, f64)>,
    pub optimizer: OptimizerConfig,
    pub source: InstanceSource,
    /// Cells run concurrently; 1 keeps timings undisturbed.
    pub parallel_cells: usize,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            ns: DESK_NS.to_vec(),
            ps: DEFAULT_PS.to_vec(),
            pis: DEFAULT_PIS.to_vec(),
            decays: vec![
                (DecayKind::Power, DecayKind::Power.default_lambda()),
                (DecayKind::Exponential, DecayKind::Exponential.default_lambda()),
            ],
            optimizer: OptimizerConfig { starts: DESK_STARTS, ..Default::default() },
            source: InstanceSource::default(),
            parallel_cells: 1,
        }
    }
}

impl ExperimentGrid {
    /// All nine instance sizes with 100 starts per cell.
    pub fn paper_scale() -> Self {
        Self {
            ns: PAPER_NS.to_vec(),
            optimizer: OptimizerConfig { starts: PAPER_STARTS, ..Default::default() },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(!self.ns.is_empty(), "no instance sizes");
        anyhow::ensure!(!self.ps.is_empty(), "no facility counts");
        anyhow::ensure!(!self.pis.is_empty(), "no multipurpose proportions");
        anyhow::ensure!(!self.decays.is_empty(), "no decay models");
        anyhow::ensure!(self.ns.iter().all(|&n| n >= 1), "instance sizes must be positive");
        anyhow::ensure!(self.ps.iter().all(|&p| p >= 1), "facility counts must be positive");
        for &pi in &self.pis {
            anyhow::ensure!((0.0..=1.0).contains(&pi), "π = {pi} is outside [0, 1]");
        }
        Ok(())
    }

    /// Cells in run order: n, then decay, then p, then π.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &(decay, lambda) in &self.decays {
                for &p in &self.ps {
                    for &pi in &self.pis {
                        out.push(GridCell { n, p, pi, decay, lambda });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub n: usize,
    pub p: usize,
    pub pi: f64,
    pub decay: String,
    pub lambda: f64,
    pub proportion: f64,
    pub total_share: f64,
    pub starts: usize,
    /// Wall-clock minutes for all starts.
    pub minutes: f64,
    /// Best layout; not part of the CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<[f64; 2]>>,
}

impl ResultRecord {
    pub fn decay_kind(&self) -> Result<DecayKind> {
        Ok(self.decay.parse()?)
    }

    pub fn points(&self) -> Option<Vec<Point>> {
        self.layout.as_ref().map(|l| l.iter().map(|&[x, y]| Point::new(x, y)).collect())
    }
}

/// Optimise one cell on `instance`.
pub fn run_cell(cell: &GridCell, instance: &Instance, optimizer: &OptimizerConfig) -> Result<ResultRecord> {
    let decay = DecayModel::new(cell.decay, Some(cell.lambda), instance)?;
    let mix = TripMix::new(cell.pi)?;
    let started = Instant::now();
    let best = multistart_optimize(instance, cell.p, &decay, mix, optimizer)?;
    let minutes = started.elapsed().as_secs_f64() / 60.0;
    Ok(ResultRecord {
        n: cell.n,
        p: cell.p,
        pi: cell.pi,
        decay: cell.decay.name().to_owned(),
        lambda: cell.lambda,
        proportion: best.proportion,
        total_share: best.value,
        starts: optimizer.starts,
        minutes,
        layout: Some(best.layout.points().iter().map(|p| [p.x, p.y]).collect()),
    })
}

#[derive(Debug, Default)]
pub struct GridReport {
    pub records: Vec<ResultRecord>,
    pub failures: Vec<(GridCell, String)>,
}

impl GridReport {
    pub fn summary(&self) -> String {
        let mut s = format!("{} cells completed, {} failed\n", self.records.len(), self.failures.len());
        for (cell, err) in &self.failures {
            s.push_str(&format!(
                "  FAILED n={} p={} pi={} decay={}: {err}\n",
                cell.n, cell.p, cell.pi, cell.decay
            ));
        }
        s
    }
}

/// Run every cell of `grid`. A cell whose instance cannot be obtained or
/// whose optimisation fails is reported and skipped.
pub fn run_grid(grid: &ExperimentGrid) -> Result<GridReport> {
    grid.validate()?;
    let mut instances: BTreeMap<usize, std::result::Result<Instance, String>> = BTreeMap::new();
    for &n in &grid.ns {
        instances.entry(n).or_insert_with(|| grid.source.load(n).map_err(|e| format!("{e:#}")));
    }
    let cells = grid.cells();
    let run = |cell: &GridCell| -> std::result::Result<ResultRecord, String> {
        let inst = instances[&cell.n].as_ref().map_err(Clone::clone)?;
        run_cell(cell, inst, &grid.optimizer).map_err(|e| format!("{e:#}"))
    };
    let outcomes: Vec<_> = if grid.parallel_cells > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(grid.parallel_cells).build()?;
        pool.install(|| cells.par_iter().map(run).collect())
    } else {
        cells.iter().map(run).collect()
    };

    let mut report = GridReport::default();
    for (cell, outcome) in cells.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) => report.records.push(r),
            Err(e) => report.failures.push((cell, e)),
        }
    }
    Ok(report)
}
