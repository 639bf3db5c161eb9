//! Mean conductance against the high-frequency Mayr estimate G_min + I_m²/(2 P_M).

use arcmem::analysis::table1_reproduction;
use arcmem::cli::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset("table1")?;
    let rows = table1_reproduction(&s.arc, &s.circuit, &s.run_settings())?;
    println!(
        "{:>7} {:>8} {:>9} {:>9} {:>7}",
        "f[kHz]", "I_m[A]", "g_mean", "estimate", "error"
    );
    for r in rows {
        println!(
            "{:>7} {:>8.4} {:>9.5} {:>9.5} {:>6.1}%",
            r.f / 1e3,
            r.i_m,
            r.g_mean,
            r.hf_estimate,
            100.0 * r.rel_error
        );
    }
    Ok(())
}
