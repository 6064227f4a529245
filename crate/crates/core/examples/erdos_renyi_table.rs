//! Ten-node Erdős–Rényi sweep: simulation, both renewal formulas and the exact
//! chain for node 0 at each edge probability.
//!
//! Pass a slot count as the first argument (default 200000).

use pcsma::experiments::{cmd_table1, Table1Settings};

fn main() -> pcsma::Result<()> {
    let slots = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let report = cmd_table1(&Table1Settings {
        slots,
        ..Table1Settings::default()
    })?;
    print!("{}", report.to_table());
    println!("config hash {}", report.metadata.config_hash);
    Ok(())
}
