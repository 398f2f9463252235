//! Gravity-model market share with single-purpose and multipurpose trips.
//!
//! For a demand point `i` every facility (chain or competitor) gets a
//! single-purpose weight and a multipurpose weight; the chain captures
//! `b_i · w/(w + C_i)` for each trip type, where `w` sums the chain's weights
//! and `C_i` sums the competitors'. Competitor sums depend only on the
//! instance, so they are computed once per (instance, decay) as
//! [`CompetitorConstants`].
//!
//! Power decay (exponent λ, λ = 2 by default):
//!
//! * single purpose: `A / (αb_i + d_i²(X))^{λ/2}`
//! * multipurpose with cluster m: `A·A'_m / (d(X,Y_m) + √(αb_i + d_i²(X)) + √(αb_i + d_i²(Y_m)))^λ`
//!
//! Exponential decay:
//!
//! * single purpose: `A·e^{-2λ d_i(X)}`
//! * multipurpose with cluster m: `A·A'_m·e^{-λ(d_i(X) + d(X,Y_m) + d_i(Y_m))}`
//!
//! Competitor constants use exactly the same expressions with the competitor's
//! location and attractiveness.

use crate::error::{Error, Result};
use crate::geometry::{distance, distance_sq, Point};
use crate::instance::Instance;

/// Numerator of the distance correction `α = 24 / Σb_i`.
pub const ALPHA_NUMERATOR: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayKind {
    Power,
    Exponential,
}

impl DecayKind {
    pub fn name(self) -> &'static str {
        match self {
            DecayKind::Power => "power",
            DecayKind::Exponential => "exp",
        }
    }

    pub fn default_lambda(self) -> f64 {
        match self {
            DecayKind::Power => 2.0,
            DecayKind::Exponential => 1.0,
        }
    }
}

impl std::str::FromStr for DecayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" | "pow" => Ok(DecayKind::Power),
            "exp" | "exponential" => Ok(DecayKind::Exponential),
            other => Err(Error::InvalidArgument(format!("unknown decay kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for DecayKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Distance decay bound to an instance. Power decay carries `α = 24/Σb_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    kind: DecayKind,
    lambda: f64,
    alpha: f64,
}

impl DecayModel {
    /// Power decay with λ = 2 and α bound to `instance`.
    pub fn power(instance: &Instance) -> Self {
        Self {
            kind: DecayKind::Power,
            lambda: 2.0,
            alpha: ALPHA_NUMERATOR / instance.total_buying_power(),
        }
    }

    /// Exponential decay with the given λ.
    pub fn exponential(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { kind: DecayKind::Exponential, lambda, alpha: 0.0 })
    }

    /// `kind` with parameter `lambda` (or the kind's default) bound to `instance`.
    pub fn new(kind: DecayKind, lambda: Option<f64>, instance: &Instance) -> Result<Self> {
        let lambda = lambda.unwrap_or(kind.default_lambda());
        check_lambda(lambda)?;
        Ok(match kind {
            DecayKind::Power => Self { lambda, ..Self::power(instance) },
            DecayKind::Exponential => Self { kind, lambda, alpha: 0.0 },
        })
    }

    pub fn kind(&self) -> DecayKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Distance correction; zero for exponential decay.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check_bound_to(&self, instance: &Instance) -> Result<()> {
        if self.kind == DecayKind::Power {
            let total = instance.total_buying_power();
            if !(total > 0.0) {
                return Err(Error::InvalidArgument("power decay needs positive total buying power".into()));
            }
            let expected = ALPHA_NUMERATOR / total;
            if ((self.alpha - expected) / expected).abs() > 1e-12 {
                return Err(Error::ConstantsMismatch(format!(
                    "power decay alpha {} is not 24/Σb = {expected}",
                    self.alpha
                )));
            }
        }
        Ok(())
    }

    /// `q^{-λ/2}` for the squared corrected distance `q = αb + d²`.
    #[inline]
    fn power_single(&self, q: f64) -> f64 {
        if self.lambda == 2.0 {
            1.0 / q
        } else {
            q.powf(-0.5 * self.lambda)
        }
    }

    /// `leg^{-λ}` for a multipurpose tour length.
    #[inline]
    fn power_tour(&self, leg: f64) -> f64 {
        if self.lambda == 2.0 {
            1.0 / (leg * leg)
        } else {
            leg.powf(-self.lambda)
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("decay parameter must be positive, got {lambda}")))
    }
}

/// Proportion π of multipurpose trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripMix {
    pi: f64,
}

impl TripMix {
    pub fn new(pi: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&pi) {
            Ok(Self { pi })
        } else {
            Err(Error::InvalidArgument(format!("multipurpose proportion must be in [0, 1], got {pi}")))
        }
    }

    pub const fn single_purpose() -> Self {
        Self { pi: 0.0 }
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub(crate) fn needs_single(&self) -> bool {
        self.pi < 1.0
    }

    pub(crate) fn needs_multi(&self) -> bool {
        self.pi > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainFacility {
    pub location: Point,
    pub attractiveness: f64,
}

/// The chain: `p` variable new facilities plus the instance's fixed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLayout {
    pub variable: Vec<ChainFacility>,
    pub fixed: Vec<ChainFacility>,
}

impl ChainLayout {
    pub fn new(variable: Vec<ChainFacility>, fixed: Vec<ChainFacility>) -> Result<Self> {
        if variable.is_empty() && fixed.is_empty() {
            return Err(Error::EmptyChain);
        }
        for f in variable.iter().chain(&fixed) {
            if !(f.attractiveness > 0.0 && f.attractiveness.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "chain attractiveness must be positive, got {}",
                    f.attractiveness
                )));
            }
        }
        Ok(Self { variable, fixed })
    }

    /// New facilities at `points`, all with attractiveness `attractiveness`,
    /// joined by the instance's fixed chain facilities.
    pub fn for_instance(instance: &Instance, points: &[Point], attractiveness: f64) -> Result<Self> {
        let variable = points.iter().map(|&location| ChainFacility { location, attractiveness }).collect();
        let fixed = instance
            .fixed_chain()
            .iter()
            .map(|f| ChainFacility { location: f.location, attractiveness: f.attractiveness })
            .collect();
        Self::new(variable, fixed)
    }

    pub fn p(&self) -> usize {
        self.variable.len()
    }

    /// Variable coordinates flattened as `(x1, y1, x2, y2, ...)`.
    pub fn coords(&self) -> Vec<f64> {
        self.variable.iter().flat_map(|f| [f.location.x, f.location.y]).collect()
    }

    /// Same layout with variable facilities moved to `coords`.
    pub fn with_coords(&self, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), 2 * self.variable.len(), "coordinate vector length");
        let variable = self
            .variable
            .iter()
            .zip(coords.chunks_exact(2))
            .map(|(f, c)| ChainFacility { location: Point::new(c[0], c[1]), ..*f })
            .collect();
        Self { variable, fixed: self.fixed.clone() }
    }

    pub fn points(&self) -> Vec<Point> {
        self.variable.iter().map(|f| f.location).collect()
    }

    pub fn facilities(&self) -> impl Iterator<Item = &ChainFacility> {
        self.variable.iter().chain(&self.fixed)
    }
}

/// Per-demand-point competitor masses `C_i⁽¹⁾` (single purpose) and `C_i⁽²⁾`
/// (multipurpose), plus layout-independent cluster terms reused by every
/// evaluation.
#[derive(Debug, Clone)]
pub struct CompetitorConstants {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    decay: DecayModel,
    total_buying_power: f64,
    /// `αb_i` (power) or 0 (exponential).
    alpha_b: Vec<f64>,
    /// Row-major `n × p'`: `√(αb_i + d_i²(Y_m))` for power, `e^{-λ d_i(Y_m)}`
    /// for exponential.
    cluster_leg: Vec<f64>,
    cluster_points: Vec<Point>,
    cluster_attr: Vec<f64>,
}

impl CompetitorConstants {
    pub fn decay(&self) -> &DecayModel {
        &self.decay
    }

    pub fn n(&self) -> usize {
        self.c1.len()
    }

    fn check_matches(&self, instance: &Instance, decay: &DecayModel) -> Result<()> {
        if self.c1.len() != instance.n() {
            return Err(Error::ConstantsMismatch(format!(
                "{} demand points in constants, {} in instance",
                self.c1.len(),
                instance.n()
            )));
        }
        if self.cluster_points.len() != instance.clusters().len() {
            return Err(Error::ConstantsMismatch("cluster count differs".into()));
        }
        if self.decay != *decay {
            return Err(Error::ConstantsMismatch("decay model differs".into()));
        }
        if self.total_buying_power.to_bits() != instance.total_buying_power().to_bits() {
            return Err(Error::ConstantsMismatch("total buying power differs".into()));
        }
        Ok(())
    }

    /// Adds the single-purpose and multipurpose weights of a facility at
    /// `loc` with attractiveness `attr` to `sp`/`mp` (one slot per demand
    /// point). Either output may be skipped with an empty slice.
    pub(crate) fn accumulate_facility(
        &self,
        instance: &Instance,
        loc: Point,
        attr: f64,
        sp: &mut [f64],
        mp: &mut [f64],
    ) {
        let want_sp = !sp.is_empty();
        let want_mp = !mp.is_empty() && !self.cluster_points.is_empty();
        let n_clusters = self.cluster_points.len();
        let decay = &self.decay;
        let lambda = decay.lambda;

        match decay.kind {
            DecayKind::Power => {
                // d(X, Y_m) does not depend on the demand point.
                let to_cluster: Vec<f64> =
                    if want_mp { self.cluster_points.iter().map(|&y| distance(loc, y)).collect() } else { Vec::new() };
                for (i, d) in instance.demand().iter().enumerate() {
                    let q = self.alpha_b[i] + distance_sq(d.location, loc);
                    if want_sp {
                        sp[i] += attr * decay.power_single(q);
                    }
                    if want_mp {
                        let s = q.sqrt();
                        let legs = &self.cluster_leg[i * n_clusters..(i + 1) * n_clusters];
                        let mut acc = 0.0;
                        for ((&dxy, &t), &a) in to_cluster.iter().zip(legs).zip(&self.cluster_attr) {
                            acc += a * decay.power_tour(dxy + s + t);
                        }
                        mp[i] += attr * acc;
                    }
                }
            }
            DecayKind::Exponential => {
                // A'_m·e^{-λ d(X, Y_m)}
                let to_cluster: Vec<f64> = if want_mp {
                    self.cluster_points
                        .iter()
                        .zip(&self.cluster_attr)
                        .map(|(&y, &a)| a * (-lambda * distance(loc, y)).exp())
                        .collect()
                } else {
                    Vec::new()
                };
                for (i, d) in instance.demand().iter().enumerate() {
                    let e = (-lambda * distance(d.location, loc)).exp();
                    if want_sp {
                        sp[i] += attr * e * e;
                    }
                    if want_mp {
                        let legs = &self.cluster_leg[i * n_clusters..(i + 1) * n_clusters];
                        let acc: f64 = to_cluster.iter().zip(legs).map(|(u, v)| u * v).sum();
                        mp[i] += attr * e * acc;
                    }
                }
            }
        }
    }
}

/// Precompute `C_i⁽¹⁾` and `C_i⁽²⁾` for every demand point. Competitors are
/// the instance's competitor list; fixed chain facilities are not included.
pub fn competitor_constants(instance: &Instance, decay: &DecayModel) -> Result<CompetitorConstants> {
    decay.check_bound_to(instance)?;
    let n = instance.n();
    let clusters = instance.clusters();
    let alpha_b: Vec<f64> = instance.demand().iter().map(|d| decay.alpha * d.buying_power).collect();

    let mut cluster_leg = Vec::with_capacity(n * clusters.len());
    for (i, d) in instance.demand().iter().enumerate() {
        for c in clusters {
            cluster_leg.push(match decay.kind {
                DecayKind::Power => (alpha_b[i] + distance_sq(d.location, c.location)).sqrt(),
                DecayKind::Exponential => (-decay.lambda * distance(d.location, c.location)).exp(),
            });
        }
    }

    let mut constants = CompetitorConstants {
        c1: vec![0.0; n],
        c2: vec![0.0; n],
        decay: *decay,
        total_buying_power: instance.total_buying_power(),
        alpha_b,
        cluster_leg,
        cluster_points: clusters.iter().map(|c| c.location).collect(),
        cluster_attr: clusters.iter().map(|c| c.attractiveness).collect(),
    };
    let mut c1 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    for k in instance.competitors() {
        constants.accumulate_facility(instance, k.location, k.attractiveness, &mut c1, &mut c2);
    }
    constants.c1 = c1;
    constants.c2 = c2;
    Ok(constants)
}

/// Chain capture fractions at one demand point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandCapture {
    /// `w/(w + C_i⁽¹⁾)`; `None` when single-purpose trips were not evaluated (π = 1).
    pub single: Option<f64>,
    /// `w/(w + C_i⁽²⁾)`; `None` when multipurpose trips were not evaluated (π = 0).
    pub multi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareReport {
    /// `M(X)` in buying-power units.
    pub total: f64,
    /// `M(X)/Σb_i`.
    pub proportion: f64,
    pub total_buying_power: f64,
    /// Market share if every trip were single purpose, when evaluated.
    pub single_purpose: Option<f64>,
    /// Market share if every trip were multipurpose, when evaluated.
    pub multipurpose: Option<f64>,
    pub per_demand: Option<Vec<DemandCapture>>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Per-demand chain weight totals for one layout.
pub(crate) struct ChainWeights {
    pub sp: Vec<f64>,
    pub mp: Vec<f64>,
}

fn check_inputs(instance: &Instance, layout: &ChainLayout, decay: &DecayModel, mix: TripMix, constants: &CompetitorConstants) -> Result<()> {
    constants.check_matches(instance, decay)?;
    if layout.variable.is_empty() && layout.fixed.is_empty() {
        return Err(Error::EmptyChain);
    }
    if mix.needs_multi() && instance.clusters().is_empty() {
        return Err(Error::InvalidArgument("multipurpose trips (π > 0) need at least one cluster".into()));
    }
    Ok(())
}

pub(crate) fn chain_weights<'a>(
    instance: &Instance,
    facilities: impl Iterator<Item = &'a ChainFacility>,
    mix: TripMix,
    constants: &CompetitorConstants,
) -> ChainWeights {
    let n = instance.n();
    let mut sp = if mix.needs_single() { vec![0.0; n] } else { Vec::new() };
    let mut mp = if mix.needs_multi() { vec![0.0; n] } else { Vec::new() };
    for f in facilities {
        constants.accumulate_facility(instance, f.location, f.attractiveness, &mut sp, &mut mp);
    }
    ChainWeights { sp, mp }
}

/// `Σ_i b_i·w_i/(w_i + C_i)` in index order.
#[inline]
pub(crate) fn captured_sum(instance: &Instance, weights: &[f64], constants: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for ((d, &w), &c) in instance.demand().iter().zip(weights).zip(constants) {
        acc.add(d.buying_power * (w / (w + c)));
    }
    acc.value()
}

/// Combine the two trip-type totals as `(1-π)·single + π·multi`.
pub(crate) fn mix_totals(mix: TripMix, single: Option<f64>, multi: Option<f64>) -> f64 {
    let pi = mix.pi();
    let s = if mix.needs_single() { (1.0 - pi) * single.unwrap_or(0.0) } else { 0.0 };
    let m = if mix.needs_multi() { pi * multi.unwrap_or(0.0) } else { 0.0 };
    s + m
}

fn share(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    breakdown: bool,
) -> Result<ShareReport> {
    check_inputs(instance, layout, decay, mix, constants)?;
    let w = chain_weights(instance, layout.facilities(), mix, constants);
    let single = mix.needs_single().then(|| captured_sum(instance, &w.sp, &constants.c1));
    let multi = mix.needs_multi().then(|| captured_sum(instance, &w.mp, &constants.c2));
    let total = mix_totals(mix, single, multi);

    let per_demand = breakdown.then(|| {
        (0..instance.n())
            .map(|i| DemandCapture {
                single: mix.needs_single().then(|| w.sp[i] / (w.sp[i] + constants.c1[i])),
                multi: mix.needs_multi().then(|| w.mp[i] / (w.mp[i] + constants.c2[i])),
            })
            .collect()
    });
    let total_buying_power = instance.total_buying_power();
    Ok(ShareReport {
        total,
        proportion: total / total_buying_power,
        total_buying_power,
        single_purpose: single,
        multipurpose: multi,
        per_demand,
    })
}

/// Captured market share `M(X)` of the chain (variable and fixed facilities).
pub fn captured_market_share(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
) -> Result<ShareReport> {
    share(instance, layout, decay, mix, constants, false)
}

/// As [`captured_market_share`], with per-demand-point capture fractions.
pub fn captured_market_share_detailed(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
) -> Result<ShareReport> {
    share(instance, layout, decay, mix, constants, true)
}

pub fn share_proportion(report: &ShareReport) -> f64 {
    report.total / report.total_buying_power
}
