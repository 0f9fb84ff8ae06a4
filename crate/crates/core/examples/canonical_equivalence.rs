//! The pencil Hamiltonians against their canonically transformed direct
//! forms: same X(t) from matched initial data.
//!
//! cargo run --example canonical_equivalence

use heun_pencil::dynamics::{integrate_hamiltonian, Direction};
use heun_pencil::models::{
    a1_direct_hamiltonian, a1_direct_point, build_a1, pt_direct_hamiltonian, pt_direct_point,
    pt_equivalent_betas,
};
use heun_pencil::{
    build_poeschl_teller, integrate_flow, IntegratorConfig, ModelSpec, Observable,
    PencilCoefficients, PhasePoint,
};

fn compare(
    model: &ModelSpec,
    direct: &Observable,
    direct_x0: PhasePoint,
    x0: PhasePoint,
) -> Result<f64, Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig {
        t_end: 20.0,
        ..Default::default()
    };
    let a = integrate_flow(model, &x0, &cfg)?;
    let b = integrate_hamiltonian(direct, &direct_x0, &cfg, Direction::Forward, |p| {
        model.check_domain(p)
    })?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(p, q)| (p.coords()[0].sinh().powi(2) - q.coords()[0].sinh().powi(2)).abs())
        .fold(0.0, f64::max))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x0 = PhasePoint::canonical(0.8, 0.3);

    let pt = build_poeschl_teller(
        0.3,
        0.8,
        -0.4,
        PencilCoefficients::new([0.2, 0.0, 0.1, 2.0, 1.0])?,
    )?;
    let betas = pt_equivalent_betas(&pt)?;
    let direct = pt_direct_hamiltonian(betas);
    println!("Poeschl-Teller direct form beta0..beta4 = {betas:?}");
    println!(
        "  sup |dX| over [0, 20] = {:.1e}",
        compare(&pt, &direct.observable, pt_direct_point(&pt, &x0)?, x0)?
    );

    let a1 = build_a1(
        1.0,
        0.5,
        -0.3,
        PencilCoefficients::new([0.2, 1.0, 0.3, 0.4, 0.5])?,
    )?;
    let h = a1_direct_hamiltonian(&a1)?;
    let y0 = a1_direct_point(&a1, &x0)?;
    println!(
        "A1: pencil energy {:.12}, direct energy {:.12}",
        a1.w.value(&x0),
        h.value(&y0)
    );
    println!(
        "  sup |dX| over [0, 20] = {:.1e}",
        compare(&a1, &h, y0, x0)?
    );
    Ok(())
}
