//! Star topology swept over packet duration: the exact chain against the
//! neighborhood renewal approximation. Writes `star_sweep.csv` and a gnuplot
//! script into the system temp directory.

use pcsma::experiments::{cmd_star_sweep, StarSettings};
use pcsma::report::gnuplot_script;

fn main() -> pcsma::Result<()> {
    let report = cmd_star_sweep(&StarSettings {
        packet_slots: vec![1, 2, 4, 8, 16, 32],
        ..StarSettings::default()
    })?;
    print!("{}", report.to_table());

    let dir = std::env::temp_dir();
    let csv = dir.join("star_sweep.csv");
    std::fs::write(&csv, report.to_csv()?)?;
    let script = gnuplot_script(
        &csv.to_string_lossy(),
        &report,
        "T",
        &["peripheral_exact", "peripheral_renewal_extended"],
        "Peripheral throughput in a five-node star",
    );
    std::fs::write(dir.join("star_sweep.gp"), script)?;
    println!("wrote {}", csv.display());
    Ok(())
}
