use chainloc::validation::conservation_audit_with;
use chainloc::*;

fn bench(n: usize) -> Instance {
    generate_instance(n, &SeedSet::default(), &GeneratorConfig::default()).unwrap()
}

#[test]
fn audit_detects_perturbed_constants() {
    let inst = bench(40);
    let layout = ChainLayout::for_instance(&inst, &[Point::new(3.0, 3.0), Point::new(6.0, 7.0)], 1.0).unwrap();
    for kind in [DecayKind::Power, DecayKind::Exponential] {
        let decay = DecayModel::new(kind, None, &inst).unwrap();
        let mix = TripMix::new(0.5).unwrap();
        let clean = competitor_constants(&inst, &decay).unwrap();
        assert!(conservation_audit_with(&inst, &layout, &decay, mix, &clean).unwrap() < 1e-9);

        let mut bad = clean.clone();
        bad.c1.iter_mut().for_each(|c| *c *= 1.01);
        let residual = conservation_audit_with(&inst, &layout, &decay, mix, &bad).unwrap();
        assert!(residual > 1e-6, "{kind}: {residual}");
    }
}

#[test]
fn audit_without_clusters_at_pi_zero() {
    let base = bench(30);
    let inst = Instance::new(base.demand().to_vec(), base.competitors().to_vec(), vec![], vec![]).unwrap();
    let decay = DecayModel::power(&inst);
    let layout = ChainLayout::for_instance(&inst, &[Point::new(5.0, 5.0)], 1.0).unwrap();
    let r = conservation_audit(&inst, &layout, &decay, TripMix::single_purpose()).unwrap();
    assert!(r < 1e-9);
}

#[test]
fn finer_grid_never_worse() {
    let inst = bench(40);
    for kind in [DecayKind::Power, DecayKind::Exponential] {
        let decay = DecayModel::new(kind, None, &inst).unwrap();
        let mix = TripMix::new(0.3).unwrap();
        let coarse = grid_oracle_p1(&inst, &decay, mix, 101, &SearchBox::default(), 1.0).unwrap();
        // 201 nodes per axis halves the spacing, so every 101-grid node is kept.
        let fine = grid_oracle_p1(&inst, &decay, mix, 201, &SearchBox::default(), 1.0).unwrap();
        assert!(fine.coarse_value >= coarse.coarse_value);
        assert!(fine.value >= coarse.value - 1e-12 * coarse.value, "{kind}");
        assert!(fine.value >= fine.coarse_value);
    }
}

#[test]
fn random_placement_near_even_split() {
    // Ten incumbents and one newcomer: about 1/11 of the market.
    let inst = bench(100);
    for kind in [DecayKind::Power, DecayKind::Exponential] {
        let decay = DecayModel::new(kind, None, &inst).unwrap();
        let seed = LcgState::new(24_681).unwrap();
        let mean = random_baseline(&inst, 1, &decay, TripMix::single_purpose(), 500, seed, &SearchBox::default(), 1.0)
            .unwrap();
        assert!((mean - 1.0 / 11.0).abs() < 0.03, "{kind}: {mean}");
    }
}

#[test]
fn optimized_beats_random_placement() {
    let inst = bench(100);
    let seed = LcgState::new(13_579).unwrap();
    for kind in [DecayKind::Power, DecayKind::Exponential] {
        let decay = DecayModel::new(kind, None, &inst).unwrap();
        for p in [1, 3] {
            for pi in [0.0, 1.0] {
                let mix = TripMix::new(pi).unwrap();
                let cfg = OptimizerConfig { starts: 10, ..Default::default() };
                let best = multistart_optimize(&inst, p, &decay, mix, &cfg).unwrap();
                let base = random_baseline(&inst, p, &decay, mix, 200, seed, &SearchBox::default(), 1.0).unwrap();
                assert!(best.proportion >= base);
            }
        }
    }
}
