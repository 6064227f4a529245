use pcsma::experiments::{cmd_star_sweep, cmd_table1, Aggregate, StarSettings, Table1Settings};
use pcsma::report::ExperimentReport;

#[test]
fn complete_graph_row_agrees_across_methods() {
    let settings = Table1Settings {
        edge_probs: vec![1.0],
        slots: 1_000_000,
        ..Table1Settings::default()
    };
    let report = cmd_table1(&settings).unwrap();
    let exact = report.num(0, "exact").unwrap();
    for col in ["simulation", "renewal_classic", "renewal_extended"] {
        let v = report.num(0, col).unwrap();
        assert!((v - exact).abs() < 1e-3, "{col} = {v}, exact = {exact}");
    }
    assert_eq!(report.num(0, "edges"), Some(45.0));
}

#[test]
fn table1_exact_stays_within_simulation_interval() {
    let settings = Table1Settings {
        edge_probs: vec![0.3, 0.6],
        slots: 400_000,
        aggregate: Aggregate::Mean,
        ..Table1Settings::default()
    };
    let report = cmd_table1(&settings).unwrap();
    for r in 0..report.rows.len() {
        let exact = report.num(r, "exact").unwrap();
        let sim = report.num(r, "simulation").unwrap();
        let ci = report.num(r, "simulation_ci").unwrap();
        assert!((exact - sim).abs() <= 3.0 * ci, "row {r}: {exact} vs {sim} ± {ci}");
    }
}

#[test]
fn table1_is_reproducible_and_round_trips() {
    let settings = Table1Settings {
        n: 6,
        edge_probs: vec![0.2, 0.8],
        slots: 20_000,
        ..Table1Settings::default()
    };
    let a = cmd_table1(&settings).unwrap();
    let b = cmd_table1(&settings).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.metadata.config_hash, b.metadata.config_hash);

    let json = serde_json::to_string(&a.to_json()).unwrap();
    let back = ExperimentReport::from_json(&json).unwrap();
    assert_eq!(back.rows, a.rows);

    let csv = ExperimentReport::from_csv(&a.to_csv().unwrap()).unwrap();
    for r in 0..a.rows.len() {
        for col in ["exact", "renewal_extended", "simulation"] {
            let (x, y) = (a.num(r, col).unwrap(), csv.num(r, col).unwrap());
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-300));
        }
    }
}

#[test]
fn star_sweep_hub_loses_throughput_as_packets_lengthen() {
    let report = cmd_star_sweep(&StarSettings::default()).unwrap();
    let hub: Vec<f64> = (0..report.rows.len()).map(|r| report.num(r, "hub_exact").unwrap()).collect();
    assert!(hub.windows(2).all(|w| w[1] < w[0]));
    let rel: Vec<f64> = (0..report.rows.len())
        .map(|r| report.num(r, "peripheral_rel_underestimate").unwrap())
        .collect();
    assert!(rel.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn empty_graph_row_matches_single_node_formula() {
    let settings = Table1Settings {
        edge_probs: vec![0.0],
        slots: 50_000,
        ..Table1Settings::default()
    };
    let report = cmd_table1(&settings).unwrap();
    let (p, t) = (0.5, 2.0);
    let exact = report.num(0, "exact").unwrap();
    assert!((exact - p * t / (1.0 - p + p * t)).abs() < 1e-12);
    assert!(report.num(0, "renewal_classic").unwrap() < exact / 100.0);
}

#[test]
fn region_boundaries_trade_off_and_nest_outward() {
    use pcsma::experiments::{cmd_region, RegionSettings};
    use pcsma::{ConflictGraph, OptimizerConfig, Topology};

    let report = cmd_region(&RegionSettings {
        graph: ConflictGraph::named(Topology::Path, 3).unwrap(),
        packet_slots: vec![2, 3, 4],
        pinned: vec![0],
        pair: (1, 2),
        steps: 10,
        optimizer: OptimizerConfig::new(vec![0.0; 3]),
        p0: vec![0.0, 0.5, 0.5],
    })
    .unwrap();
    let curve = |t: f64| -> Vec<(f64, f64)> {
        (0..report.rows.len())
            .filter(|&r| report.num(r, "T") == Some(t))
            .map(|r| (report.num(r, "S_1").unwrap(), report.num(r, "S_2").unwrap()))
            .collect()
    };
    let curves: Vec<_> = [2.0, 3.0, 4.0].map(curve).into();
    for c in &curves {
        assert_eq!(c.len(), 11);
        assert!(c.windows(2).all(|w| w[1].0 >= w[0].0 - 1e-9 && w[1].1 <= w[0].1 + 1e-9));
    }
    for pair in curves.windows(2) {
        for a in &pair[0] {
            assert!(pair[1].iter().any(|b| b.0 >= a.0 - 1e-9 && b.1 >= a.1 - 1e-9));
        }
    }
}

#[test]
fn converged_interior_optimum_has_small_gradient() {
    use pcsma::optimizer::{gradient, optimize, GradientMode};
    use pcsma::{ConflictGraph, NetworkConfig, OptimizerConfig, Topology};

    let template = NetworkConfig::new(ConflictGraph::named(Topology::Path, 3).unwrap(), vec![0.5; 3], 2).unwrap();
    let mut opt = OptimizerConfig::new(vec![0.6, 0.6, 0.3]);
    opt.gradient = GradientMode::AnalyticPath3;
    opt.tol = 1e-7;
    let trace = optimize(&template, &opt, &[0.5; 3]).unwrap();
    assert!(trace.converged);
    let p = &trace.final_iterate().p;
    assert!(p.iter().all(|&x| x > opt.lo && x < opt.hi));
    let g = gradient(p, &template, &opt).unwrap();
    assert!(g.iter().all(|d| d.abs() <= 10.0 * opt.tol), "{g:?}");
}
