//! Mayr conductance under an imposed sinusoidal current: closed form against
//! direct integration.

use std::f64::consts::PI;

use arcmem::model::{mayr_rhs, mayr_sinusoidal_g, ArcParameters, SigmaLaw, ThetaLaw};
use arcmem::{integrate, ArcState, IntegratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arc = ArcParameters {
        g_min: 1e-8,
        i0: 4.8,
        k: 0.5,
        u_c: 30.0,
        p_m: 20.0,
        theta_law: ThetaLaw::Constant { theta: 2e-4 },
        sigma_law: SigmaLaw::Gaussian,
    };
    let (i_m, f) = (3.821, 3e3);
    let w = 2.0 * PI * f;
    let t_end = 30.0 / f;
    let traj = integrate(
        |t, s| Ok((i_m * w * (w * t).cos(), mayr_rhs(&arc, i_m * (w * t).sin(), s.g))),
        ArcState::new(0.0, 0.1),
        (0.0, t_end),
        &IntegratorConfig::for_period(1.0 / f),
    )?;
    for k in 0..8 {
        let t = t_end - (1.0 / f) * (1.0 - k as f64 / 8.0);
        let exact = mayr_sinusoidal_g(&arc, i_m, f, t)?;
        println!(
            "t = {:.6} s  integrated {:.8}  closed form {:.8}",
            t,
            traj.state_at(t).g,
            exact
        );
    }
    println!(
        "high-frequency mean {:.6} S",
        arcmem::model::hf_limit_conductance(&arc, i_m)
    );
    Ok(())
}
