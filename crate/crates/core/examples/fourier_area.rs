//! Loop area two ways: quadrature of u di/dt and the harmonic-product sum.

use arcmem::analysis::{area_from_fourier, fourier_coefficients, lobe_area, pinch_points};
use arcmem::cli::Scenario;
use arcmem::settle_to_periodic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset("fig1")?;
    let settled = settle_to_periodic(&s.arc, &s.circuit, s.initial_state, &s.integrator, &s.settle)?;
    let traj = &settled.trajectory;
    let t_star = pinch_points(traj)?[0].t_star;
    let direct = lobe_area(traj, t_star);
    for k_max in [5, 10, 20, 50] {
        let spec = fourier_coefficients(traj, k_max);
        let series = area_from_fourier(&spec, &s.circuit);
        println!(
            "k_max {k_max:>2}: series {series:.6}  direct {direct:.6}  rel diff {:.1e}  (u residual {:.1e})",
            (series - direct).abs() / direct.abs(),
            spec.residual_voltage
        );
    }
    Ok(())
}
