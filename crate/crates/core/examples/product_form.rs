//! Product-form weights for two-slot packets: every busy node contributes
//! `p_i`, every idle node blocked by a busy neighbor contributes `1 - p_i`.

use pcsma::{
    exact_throughput, partition_function, state_weight, throughput_closed_form, ConflictGraph,
    NetworkConfig,
};

fn main() -> pcsma::Result<()> {
    let graph = ConflictGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])?;
    let cfg = NetworkConfig::new(graph, vec![0.2, 0.4, 0.6, 0.3], 2)?;

    for state in [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 1], [1, 0, 1, 0]] {
        let w = state_weight(&state, &cfg)?;
        println!("{}  busy {:?}  blocked {:?}  weight {:.6}", w.state, w.g1, w.g2, w.weight);
    }
    println!("Z = {:.9}", partition_function(&cfg)?);

    let closed = throughput_closed_form(&cfg)?;
    let exact = exact_throughput(&cfg)?;
    for i in 0..cfg.n() {
        println!("S_{i}: product form {:.12}  chain {:.12}", closed[i], exact[i]);
    }
    Ok(())
}
