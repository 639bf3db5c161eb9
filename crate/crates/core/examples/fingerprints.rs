//! The three memristor fingerprints for the Fig. 3 arc over 0.4-11 kHz.

use arcmem::analysis::{fingerprint_report, Tolerances};
use arcmem::cli::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset("fig3")?;
    let freqs = &s.sweep.as_ref().expect("fig3 sweeps f").values;
    let report = fingerprint_report(&s.arc, &s.circuit, freqs, &s.run_settings(), &Tolerances::default())?;

    println!("at {} Hz:", report.f);
    for p in &report.pinch_points {
        println!(
            "  pinch at t = {:.6} s, du/di = {:.5} Ω, concavity {:?}, u = {:.1e} V",
            p.t_star, p.slope, p.concavity, p.voltage_at
        );
    }
    println!("  fp1 (equal slopes, opposite concavity): {}", report.fp1_pass);
    println!("  fp2 (u and i vanish together): {}", report.fp2_pass);
    println!("loop collapse ({:?}):", report.fp3_verdict);
    for p in &report.fp3_evidence {
        match &p.outcome {
            Ok(m) => println!(
                "  {:>6} Hz  area {:>9.4}  width {:.4}",
                p.f, m.lobe_area, m.loop_width_metric
            ),
            Err(e) => println!("  {:>6} Hz  failed: {e}", p.f),
        }
    }
    Ok(())
}
