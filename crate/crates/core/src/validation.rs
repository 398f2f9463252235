//! Independent checks on the model and the optimizer: a dense grid oracle for
//! a single new facility, a conservation audit, and random placement as a
//! baseline.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, SearchBox};
use crate::instance::Instance;
use crate::lcg::{LcgState, LcgStream};
use crate::optimizer::kink_points;
use crate::market::{
    captured_market_share, chain_weights, competitor_constants, ChainLayout, CompetitorConstants,
    DecayModel, TripMix,
};

pub const MIN_GRID_RESOLUTION: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub point: Point,
    pub value: f64,
    pub proportion: f64,
    /// Best value on the coarse grid alone.
    pub coarse_value: f64,
}

/// `a` beats `b`: larger value, or equal value at the lexicographically
/// smaller point.
fn better(a: (Point, f64), b: (Point, f64)) -> bool {
    a.1 > b.1 || (a.1 == b.1 && (a.0.x, a.0.y) < (b.0.x, b.0.y))
}

fn best_of(nodes: &[Point], values: &[f64]) -> (Point, f64) {
    let mut best = (nodes[0], values[0]);
    for (&p, &v) in nodes.iter().zip(values).skip(1) {
        if better((p, v), best) {
            best = (p, v);
        }
    }
    best
}

fn evaluate_nodes(
    instance: &Instance,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
    attractiveness: f64,
    nodes: &[Point],
) -> Result<Vec<f64>> {
    nodes
        .par_iter()
        .map(|&p| {
            let layout = ChainLayout::for_instance(instance, &[p], attractiveness)?;
            Ok(captured_market_share(instance, &layout, decay, mix, constants)?.total)
        })
        .collect()
}

/// Best single new facility location by exhaustive search: a
/// `resolution × resolution` grid over `bounds` plus every kink point, then a
/// 10× finer 21×21 grid spanning one coarse cell either side of the best
/// node.
pub fn grid_oracle_p1(
    instance: &Instance,
    decay: &DecayModel,
    mix: TripMix,
    resolution: usize,
    bounds: &SearchBox,
    attractiveness: f64,
) -> Result<OracleResult> {
    if resolution < MIN_GRID_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least {MIN_GRID_RESOLUTION}, got {resolution}"
        )));
    }
    if !bounds.is_valid() {
        return Err(Error::InvalidArgument(format!("degenerate search box {bounds:?}")));
    }
    let constants = competitor_constants(instance, decay)?;
    let hx = bounds.width() / (resolution - 1) as f64;
    let hy = bounds.height() / (resolution - 1) as f64;

    let coarse: Vec<Point> = (0..resolution)
        .flat_map(|i| {
            (0..resolution).map(move |j| {
                let x = if i + 1 == resolution { bounds.x_max } else { bounds.x_min + i as f64 * hx };
                let y = if j + 1 == resolution { bounds.y_max } else { bounds.y_min + j as f64 * hy };
                Point::new(x, y)
            })
        })
        .collect();
    // The objective has kinks at clusters (and demand points under
    // exponential decay); optima there are narrow cones a mesh can straddle.
    let mut coarse = coarse;
    coarse.extend(kink_points(instance, decay, mix).into_iter().filter(|&k| bounds.contains(k)));
    let values = evaluate_nodes(instance, decay, mix, &constants, attractiveness, &coarse)?;
    let (centre, coarse_value) = best_of(&coarse, &values);

    let fine: Vec<Point> = (-10..=10)
        .flat_map(|a| (-10..=10).map(move |b| (a, b)))
        .map(|(a, b)| Point::new(centre.x + a as f64 * hx / 10.0, centre.y + b as f64 * hy / 10.0))
        .filter(|&p| bounds.contains(p))
        .collect();
    let fine_values = evaluate_nodes(instance, decay, mix, &constants, attractiveness, &fine)?;
    let mut best = (centre, coarse_value);
    let refined = best_of(&fine, &fine_values);
    if better(refined, best) {
        best = refined;
    }
    Ok(OracleResult {
        point: best.0,
        value: best.1,
        proportion: best.1 / instance.total_buying_power(),
        coarse_value,
    })
}

/// Largest `|chain fraction + competitor fraction − 1|` over demand points and
/// evaluated trip types.
pub fn conservation_audit(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
) -> Result<f64> {
    let constants = competitor_constants(instance, decay)?;
    conservation_audit_with(instance, layout, decay, mix, &constants)
}

/// As [`conservation_audit`], taking the chain's denominators from
/// `constants`. Competitor fractions are rebuilt facility by facility from the
/// instance, so constants that disagree with the instance show up as a
/// residual.
pub fn conservation_audit_with(
    instance: &Instance,
    layout: &ChainLayout,
    decay: &DecayModel,
    mix: TripMix,
    constants: &CompetitorConstants,
) -> Result<f64> {
    // Reject inconsistent inputs the same way the model does.
    captured_market_share(instance, layout, decay, mix, constants)?;
    let reference = competitor_constants(instance, decay)?;
    let n = instance.n();
    let chain = chain_weights(instance, layout.facilities(), mix, &reference);

    let (want_sp, want_mp) = (mix.needs_single(), mix.needs_multi());
    let per_competitor: Vec<(Vec<f64>, Vec<f64>)> = instance
        .competitors()
        .iter()
        .map(|k| {
            let mut sp = if want_sp { vec![0.0; n] } else { Vec::new() };
            let mut mp = if want_mp { vec![0.0; n] } else { Vec::new() };
            reference.accumulate_facility(instance, k.location, k.attractiveness, &mut sp, &mut mp);
            (sp, mp)
        })
        .collect();

    let residual = |w: f64, supplied: f64, weights: &mut dyn Iterator<Item = f64>| -> f64 {
        let weights: Vec<f64> = weights.collect();
        let mass: f64 = weights.iter().sum();
        let denom = w + mass;
        let competitor: f64 = weights.iter().map(|a| a / denom).sum();
        let captured = w / (w + supplied);
        (captured + competitor - 1.0).abs()
    };

    let mut worst = 0.0f64;
    for i in 0..n {
        if want_sp {
            let r = residual(chain.sp[i], constants.c1[i], &mut per_competitor.iter().map(|c| c.0[i]));
            worst = worst.max(r);
        }
        if want_mp {
            let r = residual(chain.mp[i], constants.c2[i], &mut per_competitor.iter().map(|c| c.1[i]));
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Mean captured proportion over `trials` layouts of `p` facilities placed
/// uniformly in `bounds` (draws from `seed`, x then y per facility).
#[allow(clippy::too_many_arguments)]
pub fn random_baseline(
    instance: &Instance,
    p: usize,
    decay: &DecayModel,
    mix: TripMix,
    trials: usize,
    seed: LcgState,
    bounds: &SearchBox,
    attractiveness: f64,
) -> Result<f64> {
    if trials == 0 || p == 0 {
        return Err(Error::InvalidArgument("random baseline needs p ≥ 1 and trials ≥ 1".into()));
    }
    let constants = competitor_constants(instance, decay)?;
    let mut stream = LcgStream::new(seed);
    let mut sum = 0.0;
    for _ in 0..trials {
        let points: Vec<Point> = (0..p)
            .map(|_| {
                let x = stream.draw(bounds.x_min, bounds.x_max);
                let y = stream.draw(bounds.y_min, bounds.y_max);
                Point::new(x, y)
            })
            .collect();
        let layout = ChainLayout::for_instance(instance, &points, attractiveness)?;
        sum += captured_market_share(instance, &layout, decay, mix, &constants)?.proportion;
    }
    Ok(sum / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CompetitorFacility, DemandPoint, GeneratorConfig, SeedSet};

    #[test]
    fn resolution_floor() {
        let inst = generate_instance(10, &SeedSet::default(), &GeneratorConfig::default()).unwrap();
        let decay = DecayModel::power(&inst);
        let r = grid_oracle_p1(&inst, &decay, TripMix::single_purpose(), 100, &SearchBox::default(), 1.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn flat_objective_picks_smallest_node() {
        // Exponential decay with λ tiny and everything far away: a flat
        // landscape up to rounding. A single demand point with no
        // competitors but one fixed chain facility makes the share exactly 1
        // everywhere.
        let inst = Instance::new(
            vec![DemandPoint { location: Point::new(5.0, 5.0), buying_power: 1.0 }],
            vec![],
            vec![],
            vec![crate::instance::FixedChainFacility { location: Point::new(1.0, 1.0), attractiveness: 1.0 }],
        )
        .unwrap();
        let decay = DecayModel::exponential(1.0).unwrap();
        let r = grid_oracle_p1(&inst, &decay, TripMix::single_purpose(), 101, &SearchBox::default(), 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.point, Point::new(0.0, 0.0));
    }

    #[test]
    fn baseline_rejects_zero_trials() {
        let inst = Instance::new(
            vec![DemandPoint { location: Point::new(5.0, 5.0), buying_power: 1.0 }],
            vec![CompetitorFacility { location: Point::new(1.0, 1.0), attractiveness: 1.0 }],
            vec![],
            vec![],
        )
        .unwrap();
        let decay = DecayModel::power(&inst);
        let seed = LcgState::new(3).unwrap();
        let b = SearchBox::default();
        assert!(random_baseline(&inst, 1, &decay, TripMix::single_purpose(), 0, seed, &b, 1.0).is_err());
        assert!(random_baseline(&inst, 1, &decay, TripMix::single_purpose(), 5, seed, &b, 1.0).is_ok());
    }
}
