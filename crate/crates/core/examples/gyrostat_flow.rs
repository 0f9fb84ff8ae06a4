//! Integrates the Zhukovsky-Volterra gyrostat under a generic Heun pencil and
//! reports conserved quantities and the quartic governing X(t).
//!
//! cargo run --example gyrostat_flow

use heun_pencil::elliptic::classify_dynamics;
use heun_pencil::verification::assembled_quartic;
use heun_pencil::{
    build_zv_gyrostat, integrate_flow, Elimination, IntegratorConfig, PencilCoefficients,
    PhasePoint,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
    let model = build_zv_gyrostat(1.0, PencilCoefficients::new([0.0, 1.0, 0.3, 0.2, 0.5])?, x0)?;
    let traj = integrate_flow(&model, &x0, &IntegratorConfig::default())?;

    println!("{} samples, {} accepted steps", traj.len(), traj.steps);
    println!("W0 = {:.15}", traj.initial_energy());
    println!(
        "drift: W {:.1e}, Q {:.1e}, S^2 {:.1e}",
        traj.drift.w,
        traj.drift.q,
        traj.drift.s2.unwrap_or(0.0)
    );

    let p4 = assembled_quartic(&model, &traj, Elimination::X);
    println!("Xdot^2 = P4(X), P4 coefficients (c0..c4) = {:?}", p4.c);
    println!("{:?}", classify_dynamics(&p4));

    let xs = traj.series("X");
    for i in (0..traj.len()).step_by(500) {
        println!(
            "t = {:5.1}  X = {:+.12}  Z = {:+.12}",
            traj.times[i],
            xs[i],
            traj.series("Z")[i]
        );
    }
    Ok(())
}
