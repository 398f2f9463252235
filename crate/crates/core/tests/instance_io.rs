use chainloc::instance::{parse_instance, FixedChainFacility};
use chainloc::*;
use proptest::prelude::*;
use std::path::Path;

#[test]
fn generated_instance_survives_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n100.txt");
    let inst = generate_instance(100, &SeedSet::default(), &GeneratorConfig::default()).unwrap();
    write_instance(&inst, &path).unwrap();
    assert_eq!(read_instance(&path).unwrap(), inst);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_instance("/nonexistent/instance.txt").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn zero_buying_power_file_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "DEMAND\nx,y,buying_power\n1,2,0.0\nCOMPETITORS\n3,3,1\n").unwrap();
    assert!(matches!(read_instance(&path), Err(Error::Validation(_))));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-9..1e3f64, any::<f64>().prop_filter("positive", |v| v.is_finite() && *v > 0.0)]
}

proptest! {
    #[test]
    fn text_format_is_exact(
        demand in prop::collection::vec((finite(), finite(), positive()), 1..20),
        comps in prop::collection::vec((finite(), finite(), positive()), 0..5),
        clusters in prop::collection::vec((finite(), finite(), positive()), 0..5),
        fixed in prop::collection::vec((finite(), finite(), positive()), 1..3),
    ) {
        let total: f64 = demand.iter().map(|d| d.2).sum();
        prop_assume!(total.is_finite());
        let inst = Instance::new(
            demand.iter().map(|&(x, y, b)| DemandPoint { location: Point::new(x, y), buying_power: b }).collect(),
            comps.iter().map(|&(x, y, a)| CompetitorFacility { location: Point::new(x, y), attractiveness: a }).collect(),
            clusters.iter().map(|&(x, y, a)| ClusterFacility { location: Point::new(x, y), attractiveness: a }).collect(),
            fixed.iter().map(|&(x, y, a)| FixedChainFacility { location: Point::new(x, y), attractiveness: a }).collect(),
        ).unwrap();
        let text = instance::format_instance(&inst);
        prop_assert_eq!(parse_instance(&text, Path::new("mem")).unwrap(), inst);
    }

    #[test]
    fn generator_is_pure(n in 1usize..60, seed in 1u64..999_999) {
        prop_assume!(seed % 5 != 0);
        let seeds = SeedSet::derived(seed).unwrap();
        let cfg = GeneratorConfig::default();
        let a = generate_instance(n, &seeds, &cfg).unwrap();
        let b = generate_instance(n, &seeds, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        for d in a.demand() {
            prop_assert!((0.0..=10.0).contains(&d.location.x) && (0.0..=10.0).contains(&d.location.y));
            prop_assert!(d.buying_power > 0.0 && d.buying_power < 2.0);
        }
    }
}
