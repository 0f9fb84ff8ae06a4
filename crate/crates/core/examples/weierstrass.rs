//! Weierstrass P on the real axis: differential equation, Laurent expansion
//! and the real period located from the pole.
//!
//! cargo run --example weierstrass

use heun_pencil::elliptic::{weierstrass_p, EllipticInvariants};

fn main() {
    let inv = EllipticInvariants::new(4.0, 0.0);
    println!(
        "g2 = {}, g3 = {}, discriminant {}",
        inv.g2,
        inv.g3,
        inv.discriminant()
    );
    for z in [0.05, 0.2, 0.5, 1.0, 1.5] {
        let (p, dp) = weierstrass_p(z, &inv).unwrap();
        let residual = dp * dp - (4.0 * p.powi(3) - inv.g2 * p - inv.g3);
        let laurent = z.powi(-2) + inv.g2 * z * z / 20.0 + inv.g3 * z.powi(4) / 28.0;
        println!("z = {z:4}: P = {p:>14.9}  P' = {dp:>15.9}  ODE residual {residual:+.1e}  P - Laurent(z^4) {:+.1e}", p - laurent);
    }

    // P is real and even; P' changes sign at the half period, where P = e1.
    let (mut a, mut b) = (0.5, 3.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if weierstrass_p(m, &inv).unwrap().1 < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let half = 0.5 * (a + b);
    println!(
        "real half period {half:.12}, P there {:.12} (e1 = 1)",
        weierstrass_p(half, &inv).unwrap().0
    );
    println!(
        "pole at 2 omega: {:?}",
        weierstrass_p(2.0 * half, &inv).map(|v| v.0)
    );
}
