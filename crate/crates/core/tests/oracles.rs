mod common;

use approx::assert_abs_diff_eq;
use pcsma::chain::{build_chain, stationary};
use pcsma::{
    exact_throughput, partition_function, renewal_classic, simulate, throughput_closed_form,
    ConflictGraph, NetworkConfig, SimConfig, Topology,
};

fn path3(p: [f64; 3]) -> NetworkConfig {
    NetworkConfig::new(ConflictGraph::named(Topology::Path, 3).unwrap(), p.to_vec(), 2).unwrap()
}

#[test]
fn exact_engine_matches_brute_force_grid() {
    let mut rng = common::rng(11);
    for g in common::graph_corpus(4) {
        for t in 1..=3 {
            let p = common::random_p(&mut rng, g.n(), 0.05, 0.95);
            let bf = common::BruteForce::new(&g, &p, t);
            let cfg = NetworkConfig::new(g.clone(), p, t).unwrap();
            let s = exact_throughput(&cfg).unwrap();
            for (a, b) in s.iter().zip(bf.throughput()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn enumerated_states_are_exactly_the_reachable_grid_points() {
    let mut rng = common::rng(12);
    for g in common::graph_corpus(4) {
        for t in 2..=3 {
            let p = common::random_p(&mut rng, g.n(), 0.05, 0.95);
            let bf = common::BruteForce::new(&g, &p, t);
            let cfg = NetworkConfig::new(g.clone(), p, t).unwrap();
            let chain = build_chain(&cfg).unwrap();
            let reachable = bf.reachable();
            assert_eq!(chain.num_states(), reachable.len());
            for code in reachable {
                let a: Vec<u16> = bf.decode(code).into_iter().map(|x| x as u16).collect();
                assert!(chain.index_of(&a).is_some(), "missing {a:?}");
            }
        }
    }
}

#[test]
fn pair_with_three_slot_packets_never_reaches_offset_counters() {
    let g = ConflictGraph::named(Topology::Complete, 2).unwrap();
    let cfg = NetworkConfig::new(g, vec![0.4, 0.6], 3).unwrap();
    let chain = build_chain(&cfg).unwrap();
    assert!(chain.index_of(&[1, 2]).is_none());
    assert!(chain.index_of(&[2, 1]).is_none());
    for s in [[0, 0], [2, 0], [0, 2], [2, 2], [1, 0], [0, 1], [1, 1]] {
        assert!(chain.index_of(&s).is_some(), "{s:?} should be reachable");
    }
    assert_eq!(chain.num_states(), 7);
}

#[test]
fn three_node_transition_matrix_matches_printed_table() {
    let p = [0.2, 0.35, 0.7];
    let [p0, p1, p2] = p;
    let (q0, q1, q2) = (1.0 - p0, 1.0 - p1, 1.0 - p2);
    let order: [[u16; 3]; 8] = [
        [0, 0, 0],
        [0, 0, 1],
        [0, 1, 0],
        [0, 1, 1],
        [1, 0, 0],
        [1, 0, 1],
        [1, 1, 0],
        [1, 1, 1],
    ];
    let table = [
        [q0 * q1 * q2, q0 * q1 * p2, q0 * p1 * q2, q0 * p1 * p2, p0 * q1 * q2, p0 * q1 * p2, p0 * p1 * q2, p0 * p1 * p2],
        [q0, 0.0, 0.0, 0.0, p0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [q2, p2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ];
    let chain = build_chain(&path3(p)).unwrap();
    assert_eq!(chain.num_states(), 8);
    for (r, from) in order.iter().enumerate() {
        let s = chain.index_of(from).unwrap();
        for (c, to) in order.iter().enumerate() {
            let u = chain.index_of(to).unwrap();
            assert_abs_diff_eq!(chain.transition_prob(s, u), table[r][c], epsilon = 1e-15);
        }
    }
}

#[test]
fn three_node_stationary_masses_match_printed_values() {
    let p = [0.3, 0.6, 0.45];
    let [p0, p1, p2] = p;
    let q1 = 1.0 - p1;
    let z = 1.0 + q1 * p2 + q1 * p0 + p1 + q1 * p0 * p2;
    let chain = build_chain(&path3(p)).unwrap();
    let pi = stationary(&chain).unwrap().pi;
    let at = |s: [u16; 3]| pi[chain.index_of(&s).unwrap()];
    assert_abs_diff_eq!(at([0, 0, 0]), 1.0 / z, epsilon = 1e-13);
    assert_abs_diff_eq!(at([0, 0, 1]), q1 * p2 / z, epsilon = 1e-13);
    assert_abs_diff_eq!(at([1, 0, 0]), p0 * q1 / z, epsilon = 1e-13);
    assert_abs_diff_eq!(partition_function(&path3(p)).unwrap(), z, epsilon = 1e-13);
}

#[test]
fn half_probability_path_brute_force_value() {
    let g = ConflictGraph::named(Topology::Path, 3).unwrap();
    let bf = common::BruteForce::new(&g, &[0.5; 3], 2).throughput();
    assert_abs_diff_eq!(bf[0], 0.75 / 2.125, epsilon = 1e-12);
    assert_abs_diff_eq!(bf[0], 0.352941, epsilon = 1e-6);
    let s = exact_throughput(&path3([0.5; 3])).unwrap();
    assert_abs_diff_eq!(s[0], bf[0], epsilon = 1e-12);
    assert_abs_diff_eq!(s[1], 0.25 / 2.125, epsilon = 1e-12);
    assert_abs_diff_eq!(s[2], s[0], epsilon = 1e-12);
}

#[test]
fn isolated_nodes_follow_single_server_formula() {
    for t in [1, 2, 5] {
        let p = vec![0.1, 0.5, 0.9];
        let cfg = NetworkConfig::new(ConflictGraph::empty(3).unwrap(), p.clone(), t).unwrap();
        let s = exact_throughput(&cfg).unwrap();
        for (si, pi) in s.iter().zip(&p) {
            let tf = t as f64;
            assert_abs_diff_eq!(*si, pi * tf / (1.0 - pi + pi * tf), epsilon = 1e-12);
        }
    }
}

#[test]
fn product_form_agrees_with_brute_force() {
    let mut rng = common::rng(13);
    for g in common::graph_corpus(4) {
        let p = common::random_p(&mut rng, g.n(), 0.01, 0.99);
        let bf = common::BruteForce::new(&g, &p, 2).throughput();
        let cfg = NetworkConfig::new(g, p, 2).unwrap();
        let pf = throughput_closed_form(&cfg).unwrap();
        for (a, b) in pf.iter().zip(&bf) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }
}

#[test]
fn renewal_is_exact_on_cliques_against_brute_force() {
    let mut rng = common::rng(14);
    for n in 2..=4 {
        for t in [2, 4] {
            let g = ConflictGraph::named(Topology::Complete, n).unwrap();
            let p = common::random_p(&mut rng, n, 0.05, 0.95);
            let bf = common::BruteForce::new(&g, &p, t).throughput();
            let cfg = NetworkConfig::new(g, p, t).unwrap();
            for (a, b) in renewal_classic(&cfg).iter().zip(&bf) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn single_node_throughput_grows_with_its_own_probability() {
    let g = ConflictGraph::named(Topology::Path, 3).unwrap();
    let mut prev = 0.0;
    for k in 1..=9 {
        let p = vec![k as f64 / 10.0, 0.4, 0.4];
        let s = exact_throughput(&NetworkConfig::new(g.clone(), p, 3).unwrap()).unwrap();
        assert!(s[0] > prev);
        prev = s[0];
    }
}

#[test]
fn simulator_tracks_brute_force_on_a_cycle() {
    let g = ConflictGraph::named(Topology::Cycle, 4).unwrap();
    let p = vec![0.2, 0.5, 0.3, 0.6];
    let bf = common::BruteForce::new(&g, &p, 3).throughput();
    let cfg = NetworkConfig::new(g, p, 3).unwrap();
    let sim = simulate(&SimConfig::new(cfg, 400_000, 9).unwrap());
    for i in 0..4 {
        assert!((sim.throughput[i] - bf[i]).abs() <= 4.0 * sim.ci_halfwidth[i]);
    }
}
