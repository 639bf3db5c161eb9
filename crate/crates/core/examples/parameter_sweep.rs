//! How the Cassie loss coefficient K reshapes the loop (the Fig. 4a sweep).

use arcmem::analysis::{parameter_sweep, SweepAxis};
use arcmem::cli::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset("fig4a")?;
    let values = [0.0, 0.3, 1.0, 2.0, 5.0];
    let points = parameter_sweep(&s.arc, &s.circuit, SweepAxis::K, &values, &s.run_settings(), 400)?;
    for p in points {
        let run = p.outcome?;
        let u_max = run.waveform.iter().map(|w| w.u.abs()).fold(0.0, f64::max);
        println!(
            "K = {:<4} I_peak {:>7.2} A  u_max {:>6.2} V  area {:>8.2}  width {:.3}",
            p.value, run.metrics.i_peak, u_max, run.metrics.lobe_area, run.metrics.loop_width_metric
        );
    }
    Ok(())
}
