//! Settle the Fig. 1 arc at 50 Hz and print a coarse view of the u-i loop.

use arcmem::analysis::{loop_metrics, sample_waveform};
use arcmem::cli::Scenario;
use arcmem::settle_to_periodic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset("fig1")?;
    let settled = settle_to_periodic(&s.arc, &s.circuit, s.initial_state, &s.integrator, &s.settle)?;
    println!(
        "settled after {} periods (residual {:.1e}), {} accepted steps",
        settled.report.periods_integrated, settled.report.period_map_residual, settled.trajectory.stats.accepted
    );

    let m = loop_metrics(&settled.trajectory)?;
    println!(
        "I_peak = {:.3} A, g in [{:.4}, {:.4}] S, lobe area {:.2} V·A",
        m.i_peak, m.g_min_observed, m.g_max_observed, m.lobe_area
    );

    println!("{:>10} {:>10} {:>10} {:>10}", "t [ms]", "i [A]", "u [V]", "g [S]");
    for w in sample_waveform(&settled.trajectory, &s.circuit, 20) {
        println!("{:>10.3} {:>10.3} {:>10.3} {:>10.4}", 1e3 * w.t, w.i, w.u, w.g);
    }
    Ok(())
}
