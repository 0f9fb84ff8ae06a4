//! Leonard-pair relations and the elimination identity at random phase
//! points, for one pencil of each model family.
//!
//! cargo run --example algebra_checks

use heun_pencil::models::build_a1;
use heun_pencil::verification::check_algebra;
use heun_pencil::{build_poeschl_teller, build_zv_gyrostat, PencilCoefficients, PhasePoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        build_poeschl_teller(
            0.3,
            0.8,
            -0.4,
            PencilCoefficients::new([0.2, 0.0, 0.5, -0.7, 1.0])?,
        )?,
        build_zv_gyrostat(
            1.0,
            PencilCoefficients::new([0.0, 1.0, 0.3, 0.2, 0.5])?,
            PhasePoint::su2(0.6, 0.8, 0.3),
        )?,
        build_a1(
            1.0,
            0.5,
            -0.3,
            PencilCoefficients::new([0.2, 1.0, 0.3, 0.4, 0.5])?,
        )?,
    ];
    for model in &models {
        println!("{} (tau = {:?})", model.name, model.tau.as_array());
        for c in check_algebra(model, 1000, 42, 1e-9) {
            println!(
                "  {:<16} {:>9.2e}  {}",
                c.name,
                c.max_residual,
                if c.pass { "ok" } else { "FAIL" }
            );
        }
    }

    // One structure constant off by 1e-3 is enough to break Z^2 = Phi.
    let gyro = &models[1];
    let mut phi = gyro.phi;
    phi.alpha[0][0] += 1e-3;
    let broken = check_algebra(&gyro.with_phi(phi), 1000, 42, 1e-9);
    let failing: Vec<_> = broken
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    println!("corrupted alpha_00: failing checks {failing:?}");
    Ok(())
}
