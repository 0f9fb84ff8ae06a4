//! Sweeps random pencils and compares the elliptic invariants of the X and Y
//! quartics, including pencils with a constant term.
//!
//! cargo run --example invariant_sweep

use heun_pencil::elliptic::quartic_invariants;
use heun_pencil::models::{build_a1, pencil_value_at};
use heun_pencil::verification::check_invariant_match;
use heun_pencil::{
    assemble_quartic, build_zv_gyrostat, pi_polynomials, Elimination, PencilCoefficients,
    PhasePoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let bases = [
        build_zv_gyrostat(
            0.7,
            PencilCoefficients::new([0.0, 1.0, 0.0, 0.0, 0.0])?,
            PhasePoint::su2(0.6, 0.8, 0.3),
        )?,
        build_a1(
            1.0,
            0.5,
            -0.3,
            PencilCoefficients::new([0.0, 1.0, 0.0, 0.0, 0.0])?,
        )?,
    ];
    for base in &bases {
        let mut worst: f64 = 0.0;
        let mut skipped = 0;
        for _ in 0..200 {
            let tau: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let model = base.with_tau(PencilCoefficients::new(tau)?)?;
            let w0 = pencil_value_at(&model, &model.random_point(&mut rng));
            let c = check_invariant_match(&model, w0, 1e-8);
            if c.is_skipped() {
                skipped += 1;
            } else {
                worst = worst.max(c.max_residual);
            }
        }
        println!(
            "{}: 200 pencils, {skipped} not elliptic, worst relative mismatch {worst:.1e}",
            base.name
        );
    }

    let model = bases[0].with_tau(PencilCoefficients::new([0.4, 1.0, 0.3, 0.2, 0.5])?)?;
    for which in [Elimination::X, Elimination::Y] {
        let p = assemble_quartic(&pi_polynomials(&model.tau, &model.phi, which), 0.25);
        println!(
            "{} quartic {:?} -> {:?}",
            which.label(),
            p.c,
            quartic_invariants(&p)
        );
    }
    Ok(())
}
