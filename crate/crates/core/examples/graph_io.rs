//! Building, generating, parsing and serializing conflict graphs.

use pcsma::{ConflictGraph, Topology};

fn main() -> pcsma::Result<()> {
    let named = r#"{"n": 3, "names": ["ap", "laptop", "phone"], "edges": [["ap", "laptop"], ["laptop", "phone"]]}"#;
    let g = ConflictGraph::parse(named)?;
    println!("parsed {} nodes, edges {:?}, names {:?}", g.n(), g.edges(), g.names());

    let listed = "# a square\nn=4\n0 1\n1 2\n2 3\n3 0\n";
    let square = ConflictGraph::parse(listed)?;
    assert_eq!(square, ConflictGraph::named(Topology::Cycle, 4)?);
    println!("square as JSON: {}", square.to_json());

    for q in [0.1, 0.5, 0.9] {
        let er = ConflictGraph::erdos_renyi(10, q, 7)?;
        println!("G(10, {q}) seed 7: {} edges, complete: {}", er.edge_count(), er.is_complete());
    }
    print!("star edge list:\n{}", ConflictGraph::named(Topology::Star, 4)?.to_edge_list());

    match ConflictGraph::from_edges(3, [(0, 0)]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
