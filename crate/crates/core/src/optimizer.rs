//! Multistart projected quasi-Newton ascent on the `2p` coordinates of the
//! new chain facilities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, SearchBox};
use crate::instance::Instance;
use crate::lcg::{LcgState, LcgStream};
use crate::market::{
    captured_market_share, captured_sum, chain_weights, competitor_constants, mix_totals,
    ChainFacility, ChainLayout, CompetitorConstants, DecayKind, DecayModel, TripMix,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub search_box: SearchBox,
    /// Finite-difference step as a fraction of the box diagonal.
    pub gradient_step: f64,
    /// Stop when the projected gradient's max-norm falls below this.
    pub tol_grad: f64,
    /// Stop when an accepted step improves the objective by less than this
    /// fraction of its value.
    pub tol_obj: f64,
    pub max_iters: usize,
    pub seed: LcgState,
    /// Attractiveness of every new facility.
    pub attractiveness: f64,
}

impl OptimizerConfig {
    pub const DEFAULT_SEED: u64 = 123_457;
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 100,
            search_box: SearchBox::default(),
            gradient_step: 1e-6,
            tol_grad: 1e-6,
            tol_obj: 1e-9,
            max_iters: 2000,
            seed: LcgState::new(Self::DEFAULT_SEED).expect("default seed is valid"),
            attractiveness: 1.0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidArgument("at least one start is required".into()));
        }
        if !self.search_box.is_valid() {
            return Err(Error::InvalidArgument(format!("degenerate search box {:?}", self.search_box)));
        }
        for (name, v) in [
            ("gradient step", self.gradient_step),
            ("gradient tolerance", self.tol_grad),
            ("objective tolerance", self.tol_obj),
            ("attractiveness", self.attractiveness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn absolute_step(&self) -> f64 {
        self.gradient_step * self.search_box.diagonal()
    }
}

/// A locally optimal layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub layout: ChainLayout,
    /// `M(X)` at `layout`.
    pub value: f64,
    pub proportion: f64,
    pub start_value: f64,
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl Solution {
    /// Builds a solution after re-evaluating `layout`; `value` must agree
    /// with the market model to 1e-9 relative.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        instance: &Instance,
        decay: &DecayModel,
        mix: TripMix,
        constants: &CompetitorConstants,
        layout: ChainLayout,
        value: f64,
        start_value: f64,
        start_index: usize,
        iterations: usize,
        converged: bool,
    ) -> Result<Self> {
        let report = captured_market_share(instance, &layout, decay, mix, constants)?;
        if (report.total - value).abs() > 1e-9 * report.total.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InconsistentSolution { claimed: value, actual: report.total });
        }
        Ok(Self {
            layout,
            value,
            proportion: report.proportion,
            start_value,
            start_index,
            iterations,
            converged,
        })
    }
}

/// Objective `M(X)` (captured buying power, not the proportion).
pub fn objective(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
) -> Result<f64> {
    Ok(captured_market_share(instance, layout, decay, mix, constants)?.total)
}

/// Finite-difference gradient. `one_sided[k]` marks coordinates where the
/// central stencil would leave the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub one_sided: Vec<bool>,
}

impl Gradient {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Objective restricted to the variable coordinates, with the incremental
/// evaluation used for finite differences.
struct Problem<'a> {
    instance: &'a Instance,
    constants: &'a CompetitorConstants,
    mix: TripMix,
    variable_attr: Vec<f64>,
    fixed: Vec<ChainFacility>,
    bounds: SearchBox,
}

impl<'a> Problem<'a> {
    fn new(
        instance: &'a Instance,
        layout: &ChainLayout,
        mix: TripMix,
        constants: &'a CompetitorConstants,
        bounds: SearchBox,
    ) -> Self {
        Self {
            instance,
            constants,
            mix,
            variable_attr: layout.variable.iter().map(|f| f.attractiveness).collect(),
            fixed: layout.fixed.clone(),
            bounds,
        }
    }

    fn facilities<'c>(&'c self, coords: &'c [f64]) -> impl Iterator<Item = ChainFacility> + 'c {
        coords
            .chunks_exact(2)
            .zip(&self.variable_attr)
            .map(|(c, &attractiveness)| ChainFacility { location: Point::new(c[0], c[1]), attractiveness })
            .chain(self.fixed.iter().copied())
    }

    fn totals(&self, sp: &[f64], mp: &[f64]) -> f64 {
        let single = self.mix.needs_single().then(|| captured_sum(self.instance, sp, &self.constants.c1));
        let multi = self.mix.needs_multi().then(|| captured_sum(self.instance, mp, &self.constants.c2));
        mix_totals(self.mix, single, multi)
    }

    /// Same arithmetic, in the same order, as `captured_market_share`.
    fn value(&self, coords: &[f64]) -> f64 {
        let facilities: Vec<ChainFacility> = self.facilities(coords).collect();
        let w = chain_weights(self.instance, facilities.iter(), self.mix, self.constants);
        self.totals(&w.sp, &w.mp)
    }

    fn buffers(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.instance.n();
        let sp = if self.mix.needs_single() { vec![0.0; n] } else { Vec::new() };
        let mp = if self.mix.needs_multi() { vec![0.0; n] } else { Vec::new() };
        (sp, mp)
    }

    fn gradient(&self, coords: &[f64], step: f64) -> Gradient {
        let p = self.variable_attr.len();
        let facilities: Vec<ChainFacility> = self.facilities(coords).collect();

        // Per-facility contributions and their totals.
        let mut contrib = Vec::with_capacity(p);
        let (mut total_sp, mut total_mp) = self.buffers();
        for f in &facilities[..p] {
            let (mut sp, mut mp) = self.buffers();
            self.constants.accumulate_facility(self.instance, f.location, f.attractiveness, &mut sp, &mut mp);
            contrib.push((sp, mp));
        }
        let w = chain_weights(self.instance, facilities.iter(), self.mix, self.constants);
        total_sp.copy_from_slice(&w.sp);
        total_mp.copy_from_slice(&w.mp);
        let base = self.totals(&total_sp, &total_mp);

        let mut values = vec![0.0; 2 * p];
        let mut one_sided = vec![false; 2 * p];
        let (mut others_sp, mut others_mp) = self.buffers();
        let (mut sp, mut mp) = self.buffers();

        for j in 0..p {
            for (o, (t, c)) in others_sp.iter_mut().zip(total_sp.iter().zip(&contrib[j].0)) {
                *o = t - c;
            }
            for (o, (t, c)) in others_mp.iter_mut().zip(total_mp.iter().zip(&contrib[j].1)) {
                *o = t - c;
            }
            let mut moved = |loc: Point| -> f64 {
                sp.copy_from_slice(&others_sp);
                mp.copy_from_slice(&others_mp);
                self.constants.accumulate_facility(self.instance, loc, self.variable_attr[j], &mut sp, &mut mp);
                self.totals(&sp, &mp)
            };
            let here = facilities[j].location;
            for axis in 0..2 {
                let k = 2 * j + axis;
                let (lo, hi) = self.bounds.bounds_of(k);
                let v = coords[k];
                let at = |value: f64| if axis == 0 { Point::new(value, here.y) } else { Point::new(here.x, value) };
                values[k] = if v - step < lo {
                    one_sided[k] = true;
                    (moved(at(v + step)) - base) / step
                } else if v + step > hi {
                    one_sided[k] = true;
                    (base - moved(at(v - step))) / step
                } else {
                    (moved(at(v + step)) - moved(at(v - step))) / (2.0 * step)
                };
            }
        }
        Gradient { values, one_sided }
    }
}

/// Finite-difference gradient of [`objective`] with respect to the variable
/// coordinates `(x1, y1, ..., xp, yp)`. `step` is absolute. Coordinates
/// within `step` of a side of `bounds` use a one-sided difference.
pub fn gradient_fd(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    step: f64,
    bounds: &SearchBox,
) -> Result<Gradient> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    // Validates constants, mix and chain.
    captured_market_share(instance, layout, decay, mix, constants)?;
    let problem = Problem::new(instance, layout, mix, constants, *bounds);
    Ok(problem.gradient(&layout.coords(), step))
}

/// Zero out ascent components that would push an at-bound coordinate outward.
fn project_gradient(bounds: &SearchBox, x: &[f64], g: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(k, (&xk, &gk))| {
            let (lo, hi) = bounds.bounds_of(k);
            if (xk <= lo && gk < 0.0) || (xk >= hi && gk > 0.0) {
                0.0
            } else {
                gk
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense inverse-Hessian approximation for `-M`.
struct InverseHessian {
    dim: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl InverseHessian {
    fn identity(dim: usize, scale: f64) -> Self {
        let mut h = vec![0.0; dim * dim];
        for k in 0..dim {
            h[k * dim + k] = scale;
        }
        Self { dim, h, fresh: true }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|r| dot(&self.h[r * self.dim..(r + 1) * self.dim], v)).collect()
    }

    /// BFGS update with step `s` and gradient change `y` of the minimised
    /// function. Skipped unless the curvature condition holds.
    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        if !(sy > 1e-12 * dot(s, s).sqrt() * dot(y, y).sqrt()) {
            return;
        }
        let n = self.dim;
        if self.fresh {
            let scale = sy / dot(y, y);
            *self = Self::identity(n, scale);
            self.fresh = false;
        }
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        let rho = 1.0 / sy;
        for r in 0..n {
            for c in 0..n {
                self.h[r * n + c] += -rho * (hy[r] * s[c] + s[r] * hy[c]) + (rho * rho * yhy + rho) * s[r] * s[c];
            }
        }
    }
}

const ARMIJO: f64 = 1e-4;
/// Snap radius for kink points, as a fraction of the box diagonal.
const SNAP_RADIUS: f64 = 1e-4;
const MAX_SNAP_ROUNDS: usize = 3;
const MAX_BACKTRACKS: usize = 60;

struct LocalRun {
    coords: Vec<f64>,
    value: f64,
    start_value: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(problem: &Problem<'_>, start: Vec<f64>, config: &OptimizerConfig, mut trace: Option<&mut Vec<f64>>) -> Result<LocalRun> {
    let bounds = problem.bounds;
    let step = config.absolute_step();
    let dim = start.len();

    let mut x = start;
    let mut f = problem.value(&x);
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let start_value = f;
    if let Some(t) = trace.as_deref_mut() {
        t.push(f);
    }
    let mut grad = problem.gradient(&x, step).values;
    let mut hess: Option<InverseHessian> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        let pg = project_gradient(&bounds, &x, &grad);
        let pg_norm = pg.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if pg_norm < config.tol_grad {
            converged = true;
            break;
        }

        let h = hess.get_or_insert_with(|| {
            let scale = 0.05 * bounds.diagonal() / dot(&pg, &pg).sqrt();
            InverseHessian::identity(dim, scale)
        });
        let mut dir = h.apply(&pg);
        for (d, g) in dir.iter_mut().zip(&pg) {
            if *g == 0.0 {
                *d = 0.0;
            }
        }
        if !(dot(&dir, &pg) > 0.0) {
            *h = InverseHessian::identity(dim, 0.05 * bounds.diagonal() / dot(&pg, &pg).sqrt());
            dir = h.apply(&pg);
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> =
                x.iter().zip(&dir).enumerate().map(|(k, (&xk, &dk))| bounds.clamp_coord(k, xk + t * dk)).collect();
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let predicted = dot(&grad, &moved);
            if moved.iter().all(|&m| m == 0.0) {
                break;
            }
            let f_trial = problem.value(&trial);
            if f_trial > f && f_trial >= f + ARMIJO * predicted.max(0.0) {
                accepted = Some((trial, f_trial));
                break;
            }
            t *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            if hess.as_ref().is_some_and(|h| !h.fresh) {
                // Stale curvature; retry once from a scaled identity.
                hess = None;
                continue;
            }
            converged = pg_norm < config.tol_grad.sqrt();
            break;
        };

        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(f_new);
        }
        let grad_new = problem.gradient(&x_new, step).values;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad.iter().zip(&grad_new).map(|(old, new)| old - new).collect();
        if let Some(h) = hess.as_mut() {
            h.update(&s, &y);
        }
        let improvement = f_new - f;
        x = x_new;
        f = f_new;
        grad = grad_new;
        if improvement <= config.tol_obj * f.abs() {
            converged = true;
            break;
        }
    }

    Ok(LocalRun { coords: x, value: f, start_value, iterations, converged })
}

/// Locations where the objective is not differentiable in a facility's
/// position: clusters (multipurpose tour leg `d(X, Y_m)`) and, under
/// exponential decay, demand points (`d_i(X)`). Local optima often sit
/// exactly on them, where the finite-difference ascent stalls a few
/// micro-units away.
pub fn kink_points(instance: &Instance, decay: &DecayModel, mix: TripMix) -> Vec<Point> {
    let mut pts = Vec::new();
    if mix.needs_multi() {
        pts.extend(instance.clusters().iter().map(|c| c.location));
    }
    if decay.kind() == DecayKind::Exponential {
        pts.extend(instance.demand().iter().map(|d| d.location));
    }
    pts
}

/// Moves each facility onto a kink point within `radius` when that does not
/// lower the objective. Returns whether anything moved.
fn snap_to_kinks(problem: &Problem<'_>, kinks: &[Point], radius: f64, x: &mut [f64], f: &mut f64) -> bool {
    let mut moved = false;
    for j in 0..x.len() / 2 {
        let here = Point::new(x[2 * j], x[2 * j + 1]);
        let nearest = kinks
            .iter()
            .filter(|&&k| problem.bounds.contains(k))
            .map(|&k| (distance(k, here), k))
            .filter(|&(d, _)| d > 0.0 && d <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((_, target)) = nearest else { continue };
        let mut trial = x.to_vec();
        trial[2 * j] = target.x;
        trial[2 * j + 1] = target.y;
        let value = problem.value(&trial);
        if value > *f {
            x.copy_from_slice(&trial);
            *f = value;
            moved = true;
        }
    }
    moved
}

fn check_start(bounds: &SearchBox, layout: &ChainLayout) -> Result<()> {
    if layout.variable.is_empty() {
        return Err(Error::InvalidArgument("layout has no variable facilities".into()));
    }
    if let Some(f) = layout.variable.iter().find(|f| !bounds.contains(f.location)) {
        return Err(Error::InvalidArgument(format!(
            "start location ({}, {}) lies outside the search box",
            f.location.x, f.location.y
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn local_inner(
    instance: &Instance,
    start: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    config: &OptimizerConfig,
    start_index: usize,
    trace: Option<&mut Vec<f64>>,
) -> Result<Solution> {
    config.validate()?;
    check_start(&config.search_box, start)?;
    // Validates constants against the instance before any evaluation.
    captured_market_share(instance, start, decay, mix, constants)?;
    let problem = Problem::new(instance, start, mix, constants, config.search_box);
    let mut trace = trace;
    let mut run = ascend(&problem, start.coords(), config, trace.as_deref_mut())?;
    let kinks = kink_points(instance, decay, mix);
    let radius = SNAP_RADIUS * config.search_box.diagonal();
    for _ in 0..MAX_SNAP_ROUNDS {
        let (mut x, mut f) = (run.coords.clone(), run.value);
        if !snap_to_kinks(&problem, &kinks, radius, &mut x, &mut f) {
            break;
        }
        let mut again = ascend(&problem, x, config, trace.as_deref_mut())?;
        // No ascent step from a kink: a non-smooth local maximum.
        again.converged |= again.iterations == 0;
        run = LocalRun {
            start_value: run.start_value,
            iterations: run.iterations + again.iterations + 1,
            ..again
        };
    }
    Solution::new(
        instance,
        decay,
        mix,
        constants,
        start.with_coords(&run.coords),
        run.value,
        run.start_value,
        start_index,
        run.iterations,
        run.converged,
    )
}

/// Projected quasi-Newton ascent from `start`, staying inside
/// `config.search_box`. The returned value is never below the start value.
pub fn local_optimize(
    instance: &Instance,
    start: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    config: &OptimizerConfig,
) -> Result<Solution> {
    local_inner(instance, start, decay, mix, constants, config, 0, None)
}

/// As [`local_optimize`], also returning the objective after every accepted
/// step (the first entry is the start value).
pub fn local_optimize_traced(
    instance: &Instance,
    start: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    config: &OptimizerConfig,
) -> Result<(Solution, Vec<f64>)> {
    let mut trace = Vec::new();
    let sol = local_inner(instance, start, decay, mix, constants, config, 0, Some(&mut trace))?;
    Ok((sol, trace))
}

/// Start layouts drawn from `config.seed`: `2p` draws per start, in
/// `(x1, y1, ..., xp, yp)` order, uniform in the search box.
pub fn start_layouts(instance: &Instance, p: usize, config: &OptimizerConfig) -> Result<Vec<ChainLayout>> {
    let b = config.search_box;
    let mut stream = LcgStream::new(config.seed);
    (0..config.starts)
        .map(|_| {
            let points: Vec<Point> = (0..p)
                .map(|_| {
                    let x = stream.draw(b.x_min, b.x_max);
                    let y = stream.draw(b.y_min, b.y_max);
                    Point::new(x, y)
                })
                .collect();
            ChainLayout::for_instance(instance, &points, config.attractiveness)
        })
        .collect()
}

/// Every start's outcome plus the best solution.
#[derive(Debug)]
pub struct MultistartOutcome {
    pub best: Solution,
    /// Final value per start; `None` for a failed start.
    pub values: Vec<Option<f64>>,
    pub failures: Vec<(usize, Error)>,
}

/// Runs `config.starts` local ascents and keeps the best. Ties in value go
/// to the lowest start index, so the result does not depend on scheduling.
pub fn multistart_detailed(
    instance: &Instance,
    p: usize,
    decay: &DecayModel,
    mix: TripMix,
    config: &OptimizerConfig,
) -> Result<MultistartOutcome> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    config.validate()?;
    let constants = competitor_constants(instance, decay)?;
    let starts = start_layouts(instance, p, config)?;

    let results: Vec<Result<Solution>> = starts
        .par_iter()
        .enumerate()
        .map(|(idx, start)| local_inner(instance, start, decay, mix, &constants, config, idx, None))
        .collect();

    let mut best: Option<Solution> = None;
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(sol) => {
                values.push(Some(sol.value));
                if best.as_ref().is_none_or(|b| sol.value > b.value) {
                    best = Some(sol);
                }
            }
            Err(e) => {
                values.push(None);
                failures.push((idx, e));
            }
        }
    }
    let best = best.ok_or(Error::AllStartsFailed(config.starts))?;
    Ok(MultistartOutcome { best, values, failures })
}

pub fn multistart_optimize(
    instance: &Instance,
    p: usize,
    decay: &DecayModel,
    mix: TripMix,
    config: &OptimizerConfig,
) -> Result<Solution> {
    multistart_detailed(instance, p, decay, mix, config).map(|o| o.best)
}
