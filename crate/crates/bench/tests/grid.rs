use chainloc::*;
use chainloc_bench::grid::{run_cell, run_grid, ExperimentGrid, GridCell, InstanceSource};
use chainloc_bench::locations::{cluster_coincidences, emit_locations};
use chainloc_bench::tables::{read_results, render_tables, results_csv};

fn small_grid(ns: Vec<usize>, ps: Vec<usize>, pis: Vec<f64>) -> ExperimentGrid {
    let mut g = ExperimentGrid { ns, ps, pis, ..Default::default() };
    g.optimizer.starts = 4;
    g
}

fn bench(n: usize) -> Instance {
    generate_instance(n, &SeedSet::default(), &GeneratorConfig::default()).unwrap()
}

#[test]
fn one_cell_grid_prints_one_row() {
    let mut g = small_grid(vec![60], vec![2], vec![0.4]);
    g.decays = vec![(DecayKind::Power, 2.0)];
    let report = run_grid(&g).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.failures.is_empty());
    let t = render_tables(&report.records);
    let rows: Vec<&str> = t.lines().filter(|l| l.starts_with("   2 |")).collect();
    assert_eq!(rows.len(), 2, "{t}");
    assert!(t.starts_with("Results for n=60 (Power Decay, lambda=2)"));
    assert!(t.contains("Run Time in Minutes for all 4 Runs"));
}

#[test]
fn run_cell_is_deterministic_apart_from_timing() {
    let inst = bench(80);
    let cfg = OptimizerConfig { starts: 5, ..Default::default() };
    let cell = GridCell { n: 80, p: 3, pi: 0.6, decay: DecayKind::Exponential, lambda: 1.0 };
    let mut a = run_cell(&cell, &inst, &cfg).unwrap();
    let mut b = run_cell(&cell, &inst, &cfg).unwrap();
    a.minutes = 0.0;
    b.minutes = 0.0;
    assert_eq!(a, b);
}

#[test]
fn printed_proportions_match_recomputed_share() {
    let g = small_grid(vec![50], vec![1, 3], vec![0.0, 0.5, 1.0]);
    let report = run_grid(&g).unwrap();
    let inst = bench(50);
    let table = render_tables(&report.records);
    for r in &report.records {
        let decay = DecayModel::new(r.decay_kind().unwrap(), Some(r.lambda), &inst).unwrap();
        let c = competitor_constants(&inst, &decay).unwrap();
        let layout = ChainLayout::for_instance(&inst, &r.points().unwrap(), 1.0).unwrap();
        let m = captured_market_share(&inst, &layout, &decay, TripMix::new(r.pi).unwrap(), &c).unwrap();
        let recomputed = format!("{:.5}", m.total / inst.total_buying_power());
        assert_eq!(format!("{:.5}", r.proportion), recomputed);
        assert!(table.contains(&recomputed));
        assert!(r.proportion > 0.0 && r.proportion < 1.0);
    }
}

#[test]
fn csv_reingestion_reproduces_tables() {
    let g = small_grid(vec![40], vec![1, 2], vec![0.0, 0.2]);
    let report = run_grid(&g).unwrap();
    let back = read_results(results_csv(&report.records).as_bytes()).unwrap();
    assert_eq!(render_tables(&back), render_tables(&report.records));
}

#[test]
fn location_dump_for_ten_facilities() {
    let inst = bench(100);
    let cfg = OptimizerConfig { starts: 2, ..Default::default() };
    let cell = GridCell { n: 100, p: 10, pi: 1.0, decay: DecayKind::Power, lambda: 2.0 };
    let rec = run_cell(&cell, &inst, &cfg).unwrap();
    let rows = emit_locations(&inst, &rec, 1.0).unwrap();
    assert_eq!(rows.len(), 130);
    for (class, count) in [("demand", 100), ("competitor", 10), ("cluster", 10), ("new_facility", 10)] {
        assert_eq!(rows.iter().filter(|r| r.class == class).count(), count, "{class}");
    }
    let b = SearchBox::default();
    assert!(rows.iter().all(|r| b.contains(Point::new(r.x, r.y))));
    let n = cluster_coincidences(&inst, &rec.points().unwrap(), 1e-3);
    assert!(n <= 10);
}

#[test]
fn coincidence_count_sees_facility_on_cluster() {
    let inst = bench(20);
    let on = inst.clusters()[3].location;
    let near = Point::new(on.x + 5e-4, on.y);
    let far = Point::new(on.x + 0.5, on.y);
    assert_eq!(cluster_coincidences(&inst, &[on, near, far], 1e-3), 2);
}

#[test]
fn record_without_layout_cannot_be_dumped() {
    let inst = bench(20);
    let cfg = OptimizerConfig { starts: 1, ..Default::default() };
    let cell = GridCell { n: 20, p: 1, pi: 0.0, decay: DecayKind::Power, lambda: 2.0 };
    let mut rec = run_cell(&cell, &inst, &cfg).unwrap();
    rec.layout = None;
    assert!(emit_locations(&inst, &rec, 1.0).is_err());
}

#[test]
fn missing_instance_fails_cell_but_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    write_instance(&bench(30), InstanceSource::file_for(dir.path(), 30)).unwrap();
    let mut g = small_grid(vec![30, 45], vec![1], vec![0.0]);
    g.decays = vec![(DecayKind::Power, 2.0)];
    g.source = InstanceSource::Directory(dir.path().to_path_buf());
    let report = run_grid(&g).unwrap();
    assert_eq!(report.records.len(), 1);
    assert_eq!(report.records[0].n, 30);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].0.n, 45);
    assert!(report.summary().contains("1 cells completed, 1 failed"));
    assert!(report.summary().contains("n45.txt"));
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(run_grid(&small_grid(vec![], vec![1], vec![0.0])).is_err());
    assert!(run_grid(&small_grid(vec![10], vec![1], vec![1.5])).is_err());
    assert!(run_grid(&small_grid(vec![10], vec![], vec![0.0])).is_err());
}

#[test]
fn default_grid_shape() {
    let g = ExperimentGrid::default();
    assert_eq!(g.cells().len(), 5 * 2 * 8 * 6);
    assert_eq!(g.optimizer.starts, 20);
    let full = ExperimentGrid::paper_scale();
    assert_eq!(*full.ns.last().unwrap(), 20_000);
    assert_eq!(full.optimizer.starts, 100);
    // 72 power + 72 exponential experiments per instance size.
    assert_eq!(full.cells().iter().filter(|c| c.n == 100).count(), 96);
}
