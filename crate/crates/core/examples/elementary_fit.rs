//! When W = tau4 Y + tau0 the X motion is elementary: the quartic drops to a
//! quadratic and X(t) is trigonometric or exponential.
//!
//! cargo run --example elementary_fit

use heun_pencil::elliptic::classify_dynamics;
use heun_pencil::verification::{assembled_quartic, fit_elementary};
use heun_pencil::{
    build_poeschl_teller, integrate_flow, Elimination, IntegratorConfig, PencilCoefficients,
    PhasePoint,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w_is_y = PencilCoefficients::new([0.0, 0.0, 0.0, 0.0, 1.0])?;
    // bounded well, then an unbounded orbit for the exponential branch
    for (b0, b1, b2, x0, t_end) in [
        (0.0, 0.5, -3.0, PhasePoint::canonical(0.7, 0.0), 50.0),
        (1.0, 0.5, 0.0, PhasePoint::canonical(0.7, 0.2), 2.0),
    ] {
        let model = build_poeschl_teller(b0, b1, b2, w_is_y)?;
        let traj = integrate_flow(
            &model,
            &x0,
            &IntegratorConfig {
                t_end,
                ..Default::default()
            },
        )?;
        let p4 = assembled_quartic(&model, &traj, Elimination::X);
        println!(
            "beta = ({b0}, {b1}, {b2}): P4 = {:?}, {:?}",
            p4.c,
            classify_dynamics(&p4).kind
        );
        let fit = fit_elementary(&traj, Elimination::X)?;
        println!(
            "  {:?}: xi1 = {:.9}, xi2 = {:.9}, xi0 = {:.9}, omega = {:.12}, residual {:.1e}",
            fit.branch, fit.xi1, fit.xi2, fit.xi0, fit.omega, fit.residual
        );
        // for P4 = c2 x^2 + c1 x + c0 the frequency is sqrt(|c2|)
        println!("  sqrt(|c2|) = {:.12}", p4.c[2].abs().sqrt());
    }
    Ok(())
}
