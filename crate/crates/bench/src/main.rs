use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chainloc::validation::MIN_GRID_RESOLUTION;
use chainloc::{
    conservation_audit, generate_instance, grid_oracle_p1, random_baseline, read_instance,
    write_instance, DecayKind, DecayModel, GeneratorConfig, Instance, LcgState, OptimizerConfig, SeedSet,
    TripMix,
};
use chainloc_bench::grid::{self, ExperimentGrid, GridCell, InstanceSource, ResultRecord};
use chainloc_bench::locations::{cluster_coincidences, emit_locations, write_locations, COINCIDENCE_TOLERANCE};
use chainloc_bench::tables::{render_tables, write_results};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chainloc", version, about = "Chain facility location with multipurpose shopping trips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multistart optimisation of one cell.
    Solve(SolveArgs),
    /// Run an experiment grid and print tables.
    Grid(GridArgs),
    /// Grid-search oracle for a single new facility.
    Oracle {
        #[command(flatten)]
        src: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 201)]
        resolution: usize,
        #[arg(long, default_value_t = 1.0)]
        attractiveness: f64,
    },
    /// Mean share of uniformly random layouts.
    Baseline {
        #[command(flatten)]
        src: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 24_681)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        attractiveness: f64,
    },
    /// Solve one cell and dump every location as `class,x,y,weight`.
    Locations(SolveArgs),
}

#[derive(Args, Clone)]
struct GenArgs {
    /// Derive all six generator streams from this seed instead of the
    /// built-in defaults.
    #[arg(long)]
    gen_seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    competitors: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
}

impl GenArgs {
    fn seeds(&self) -> Result<SeedSet> {
        Ok(match self.gen_seed {
            Some(s) => SeedSet::derived(s)?,
            None => SeedSet::default(),
        })
    }

    fn config(&self) -> GeneratorConfig {
        GeneratorConfig { competitors: self.competitors, clusters: self.clusters, ..Default::default() }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance file; when absent, an instance with `--n` demand points is generated.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[command(flatten)]
    gen: GenArgs,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        match &self.instance {
            Some(path) => Ok(read_instance(path)?),
            None => Ok(generate_instance(self.n, &self.gen.seeds()?, &self.gen.config())?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DecayArg {
    Power,
    Exp,
}

impl From<DecayArg> for DecayKind {
    fn from(d: DecayArg) -> Self {
        match d {
            DecayArg::Power => DecayKind::Power,
            DecayArg::Exp => DecayKind::Exponential,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "power")]
    decay: DecayArg,
    /// Decay parameter; defaults to 2 for power and 1 for exponential decay.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pi: f64,
}

impl ModelArgs {
    fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(DecayKind::from(self.decay).default_lambda())
    }
}

#[derive(Args, Clone)]
struct OptArgs {
    #[arg(long, default_value_t = grid::DESK_STARTS)]
    starts: usize,
    /// Seed of the start-layout stream.
    #[arg(long, default_value_t = OptimizerConfig::DEFAULT_SEED)]
    seed: u64,
    /// Attractiveness of each new facility.
    #[arg(long, default_value_t = 1.0)]
    attractiveness: f64,
    /// Search the demand bounding box expanded by this fraction per side
    /// instead of [0,10]².
    #[arg(long)]
    box_margin: Option<f64>,
}

impl OptArgs {
    fn config(&self, instance: Option<&Instance>) -> Result<OptimizerConfig> {
        let mut cfg = OptimizerConfig {
            starts: self.starts,
            seed: LcgState::new(self.seed)?,
            attractiveness: self.attractiveness,
            ..Default::default()
        };
        if let (Some(margin), Some(inst)) = (self.box_margin, instance) {
            cfg.search_box = chainloc::SearchBox::around(inst.demand().iter().map(|d| d.location), margin)
                .context("empty demand set")?;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    src: InstanceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opt: OptArgs,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    decay: Option<Vec<DecayArg>>,
    /// λ for power decay.
    #[arg(long, default_value_t = 2.0)]
    power_lambda: f64,
    /// λ for exponential decay.
    #[arg(long, default_value_t = 1.0)]
    exp_lambda: f64,
    #[command(flatten)]
    opt: OptArgs,
    /// Read `n<N>.txt` instance files from this directory.
    #[arg(long)]
    instances_dir: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    /// All nine instance sizes up to n=20000 and 100 starts.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1)]
    parallel_cells: usize,
    /// Results file (CSV or JSON by `--format`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_records(records: &[ResultRecord], format: Format, out: &Option<PathBuf>) -> Result<()> {
    let mut w = output(out)?;
    match format {
        Format::Csv => write_results(records, &mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, records)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<(Instance, ResultRecord)> {
    let instance = args.src.load()?;
    let cfg = args.opt.config(Some(&instance))?;
    let cell = GridCell {
        n: instance.n(),
        p: args.p,
        pi: args.model.pi,
        decay: args.model.decay.into(),
        lambda: args.model.lambda(),
    };
    let record = grid::run_cell(&cell, &instance, &cfg)?;
    Ok((instance, record))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { gen, n, out } => {
            let inst = generate_instance(n, &gen.seeds()?, &gen.config())?;
            write_instance(&inst, &out)?;
            eprintln!("wrote {} demand points to {}", inst.n(), out.display());
        }
        Command::Solve(args) => {
            let (instance, record) = solve(&args)?;
            let decay = DecayModel::new(args.model.decay.into(), args.model.lambda, &instance)?;
            let layout = chainloc::ChainLayout::for_instance(
                &instance,
                &record.points().unwrap_or_default(),
                args.opt.attractiveness,
            )?;
            let residual = conservation_audit(&instance, &layout, &decay, TripMix::new(args.model.pi)?)?;
            eprintln!(
                "proportion {:.5}  share {:.6}  conservation residual {residual:.1e}",
                record.proportion, record.total_share
            );
            write_records(std::slice::from_ref(&record), args.format, &args.out)?;
        }
        Command::Grid(args) => {
            let mut grid = if args.full { ExperimentGrid::paper_scale() } else { ExperimentGrid::default() };
            if let Some(n) = args.n {
                grid.ns = n;
            }
            if let Some(p) = args.p {
                grid.ps = p;
            }
            if let Some(pi) = args.pi {
                grid.pis = pi;
            }
            if let Some(decays) = args.decay {
                grid.decays = decays
                    .into_iter()
                    .map(|d| {
                        let kind = DecayKind::from(d);
                        (kind, if kind == DecayKind::Power { args.power_lambda } else { args.exp_lambda })
                    })
                    .collect();
            } else {
                grid.decays = vec![(DecayKind::Power, args.power_lambda), (DecayKind::Exponential, args.exp_lambda)];
            }
            let starts = if args.full && args.opt.starts == grid::DESK_STARTS { grid::PAPER_STARTS } else { args.opt.starts };
            grid.optimizer = OptimizerConfig { starts, ..args.opt.config(None)? };
            grid.source = match args.instances_dir {
                Some(dir) => InstanceSource::Directory(dir),
                None => InstanceSource::Generated { seeds: args.gen.seeds()?, config: args.gen.config() },
            };
            grid.parallel_cells = args.parallel_cells.max(1);

            let report = grid::run_grid(&grid)?;
            print!("{}", render_tables(&report.records));
            eprint!("{}", report.summary());
            if args.out.is_some() {
                write_records(&report.records, args.format, &args.out)?;
            }
            if report.records.is_empty() {
                bail!("every cell failed");
            }
        }
        Command::Oracle { src, model, resolution, attractiveness } => {
            if resolution < MIN_GRID_RESOLUTION {
                bail!("--resolution must be at least {MIN_GRID_RESOLUTION}");
            }
            let instance = src.load()?;
            let decay = DecayModel::new(model.decay.into(), model.lambda, &instance)?;
            let r = grid_oracle_p1(
                &instance,
                &decay,
                TripMix::new(model.pi)?,
                resolution,
                &chainloc::SearchBox::default(),
                attractiveness,
            )?;
            println!("x,y,total_share,proportion");
            println!("{},{},{},{}", r.point.x, r.point.y, r.value, r.proportion);
        }
        Command::Baseline { src, model, p, trials, seed, attractiveness } => {
            let instance = src.load()?;
            let decay = DecayModel::new(model.decay.into(), model.lambda, &instance)?;
            let mix = TripMix::new(model.pi)?;
            let mean = random_baseline(
                &instance,
                p,
                &decay,
                mix,
                trials,
                LcgState::new(seed)?,
                &chainloc::SearchBox::default(),
                attractiveness,
            )?;
            // Share each facility would get if all incumbents and newcomers were alike.
            let incumbents = instance.competitors().len() + instance.fixed_chain().len();
            println!("mean_proportion,even_split");
            println!("{mean},{}", p as f64 / (incumbents + p) as f64);
        }
        Command::Locations(args) => {
            let (instance, record) = solve(&args)?;
            let rows = emit_locations(&instance, &record, args.opt.attractiveness)?;
            write_locations(&rows, output(&args.out)?)?;
            let at_clusters =
                cluster_coincidences(&instance, &record.points().unwrap_or_default(), COINCIDENCE_TOLERANCE);
            eprintln!("{at_clusters} of {} new facilities located at a cluster", record.p);
        }
    }
    Ok(())
}
