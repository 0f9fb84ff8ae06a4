//! Turning-point-seeded Weierstrass solution against the integrated orbit of
//! the relativistic A1 pencil.
//!
//! cargo run --example closed_form

use heun_pencil::elliptic::closed_form_solution;
use heun_pencil::models::build_a1;
use heun_pencil::verification::{assembled_quartic, compare_closed_form};
use heun_pencil::{integrate_flow, Elimination, IntegratorConfig, PencilCoefficients, PhasePoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = build_a1(
        1.0,
        0.5,
        -0.3,
        PencilCoefficients::new([0.2, 1.0, 0.3, 0.4, 0.5])?,
    )?;
    let traj = integrate_flow(
        &model,
        &PhasePoint::canonical(0.8, 0.3),
        &IntegratorConfig::default(),
    )?;

    let check = compare_closed_form(&traj, &model, Elimination::X, 1e-6);
    println!(
        "{}: sup |X_closed - X_integrated| = {:.2e} (pass: {})",
        check.name, check.max_residual, check.pass
    );

    // The same comparison by hand, seeded at the smallest sampled X.
    let p4 = assembled_quartic(&model, &traj, Elimination::X);
    let xs = traj.series("X");
    let i_min = (0..xs.len())
        .min_by(|&a, &b| xs[a].total_cmp(&xs[b]))
        .unwrap();
    let mut root = xs[i_min];
    for _ in 0..30 {
        root -= p4.eval(root) / p4.eval_derivative(root);
    }
    // vertex of the parabola through the three samples around the minimum
    let (xm, x0, xp) = (xs[i_min - 1], xs[i_min], xs[i_min + 1]);
    let t_star = traj.times[i_min] - 0.5 * traj.dt_out * (xp - xm) / (xp - 2.0 * x0 + xm);
    println!(
        "turning point at t* = {t_star:.6}: X = {root:.12}, P4(X) = {:.1e}",
        p4.eval(root)
    );
    for offset in [25, 50, 100] {
        let j = i_min + offset;
        let x = closed_form_solution(&p4, root, traj.times[j] - t_star)?;
        println!(
            "  t = {:.2}: closed form {x:.9}, integrated {:.9}",
            traj.times[j], xs[j]
        );
    }
    Ok(())
}
