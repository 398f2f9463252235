//! Direct transcription of the captured-share formulas, evaluated with plain
//! loops and no precomputation. Used as an independent reference.

#![allow(dead_code)]

use chainloc::{distance, DecayKind, Instance, Point};

pub struct Facility {
    pub at: Point,
    pub attr: f64,
}

/// `M(X)` by brute force.
pub fn naive_share(inst: &Instance, chain: &[Facility], kind: DecayKind, lambda: f64, pi: f64) -> f64 {
    let total_b: f64 = inst.demand().iter().map(|d| d.buying_power).sum();
    let alpha = 24.0 / total_b;
    let mut single = 0.0;
    let mut multi = 0.0;
    for d in inst.demand() {
        let b = d.buying_power;
        let di = |x: Point| distance(d.location, x);
        let (sp_w, sp_c, mp_w, mp_c);
        match kind {
            DecayKind::Power => {
                let f1 = |x: Point| (alpha * b + di(x).powi(2)).powf(-lambda / 2.0);
                let f2 = |x: Point, y: Point| {
                    (distance(x, y) + (alpha * b + di(x).powi(2)).sqrt() + (alpha * b + di(y).powi(2)).sqrt())
                        .powf(-lambda)
                };
                sp_w = chain.iter().map(|f| f.attr * f1(f.at)).sum::<f64>();
                sp_c = inst.competitors().iter().map(|k| k.attractiveness * f1(k.location)).sum::<f64>();
                mp_w = inst
                    .clusters()
                    .iter()
                    .map(|m| m.attractiveness * chain.iter().map(|f| f.attr * f2(f.at, m.location)).sum::<f64>())
                    .sum::<f64>();
                mp_c = inst
                    .competitors()
                    .iter()
                    .map(|k| {
                        inst.clusters()
                            .iter()
                            .map(|m| k.attractiveness * m.attractiveness * f2(k.location, m.location))
                            .sum::<f64>()
                    })
                    .sum::<f64>();
            }
            DecayKind::Exponential => {
                let f1 = |x: Point| (-2.0 * lambda * di(x)).exp();
                let f2 = |x: Point, y: Point| (-lambda * (di(x) + distance(x, y) + di(y))).exp();
                sp_w = chain.iter().map(|f| f.attr * f1(f.at)).sum::<f64>();
                sp_c = inst.competitors().iter().map(|k| k.attractiveness * f1(k.location)).sum::<f64>();
                mp_w = inst
                    .clusters()
                    .iter()
                    .map(|m| m.attractiveness * chain.iter().map(|f| f.attr * f2(f.at, m.location)).sum::<f64>())
                    .sum::<f64>();
                mp_c = inst
                    .competitors()
                    .iter()
                    .map(|k| {
                        inst.clusters()
                            .iter()
                            .map(|m| k.attractiveness * m.attractiveness * f2(k.location, m.location))
                            .sum::<f64>()
                    })
                    .sum::<f64>();
            }
        }
        single += b * sp_w / (sp_w + sp_c);
        if pi > 0.0 {
            multi += b * mp_w / (mp_w + mp_c);
        }
    }
    (1.0 - pi) * single + pi * multi
}
