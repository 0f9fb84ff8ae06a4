//! Bi-quadratic structure polynomial, the Heun pencil and the elimination
//! polynomials that turn Hamilton's equations into `xdot^2 = P4(x)`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PencilError {
    #[error("pencil coefficients must be finite")]
    NonFinite,
    #[error("tau1..tau4 are all zero: a constant pencil generates no flow")]
    Constant,
}

/// Dense polynomial with `N` coefficients, lowest degree first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensePoly<const N: usize> {
    pub c: [f64; N],
}

pub type QuadraticPolynomial = DensePoly<3>;
pub type CubicPolynomial = DensePoly<4>;
pub type QuarticPolynomial = DensePoly<5>;

impl<const N: usize> Serialize for DensePoly<N> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.c.as_slice().serialize(s)
    }
}

impl<const N: usize> Default for DensePoly<N> {
    fn default() -> Self {
        DensePoly { c: [0.0; N] }
    }
}

impl<const N: usize> DensePoly<N> {
    pub const fn new(c: [f64; N]) -> Self {
        DensePoly { c }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    /// First derivative at `x`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..N).rev() {
            acc = acc * x + k as f64 * self.c[k];
        }
        acc
    }

    /// Second derivative at `x`.
    pub fn eval_second_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..N).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * self.c[k];
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Highest `k` with `|c_k| >= rel_tol * max|c_i|`; zero for the zero polynomial.
    pub fn effective_degree(&self, rel_tol: f64) -> usize {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        (0..N)
            .rev()
            .find(|&k| self.c[k].abs() >= rel_tol * scale)
            .unwrap_or(0)
    }

    /// Same polynomial with room for more coefficients.
    pub fn widen<const M: usize>(&self) -> DensePoly<M> {
        assert!(M >= N, "cannot widen to fewer coefficients");
        let mut c = [0.0; M];
        c[..N].copy_from_slice(&self.c);
        DensePoly { c }
    }

    /// Drops trailing coefficients. Callers guarantee they are zero.
    fn narrow<const M: usize>(&self) -> DensePoly<M> {
        debug_assert!(self.c[M.min(N)..].iter().all(|&v| v == 0.0));
        let mut c = [0.0; M];
        let n = M.min(N);
        c[..n].copy_from_slice(&self.c[..n]);
        DensePoly { c }
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= k);
        DensePoly { c }
    }

    /// Product truncated to a quartic; panics if the true degree exceeds four.
    pub fn mul_quartic<const M: usize>(&self, other: &DensePoly<M>) -> QuarticPolynomial {
        let mut c = [0.0; 5];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                if *a == 0.0 || *b == 0.0 {
                    continue;
                }
                assert!(i + j <= 4, "product exceeds degree four");
                c[i + j] += a * b;
            }
        }
        DensePoly { c }
    }
}

impl<const N: usize> Add for DensePoly<N> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for DensePoly<N> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for DensePoly<N> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul<f64> for DensePoly<N> {
    type Output = Self;

    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

/// `Phi(x, y) = sum_ij alpha[i][j] x^i y^j`, degree at most two in each variable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BiQuadratic {
    pub alpha: [[f64; 3]; 3],
}

/// Value and partial derivatives of `Phi` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
}

impl BiQuadratic {
    pub const fn new(alpha: [[f64; 3]; 3]) -> Self {
        BiQuadratic { alpha }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        phi_eval(self, x, y).value
    }
}

/// `Phi` together with its exact partials.
pub fn phi_eval(phi: &BiQuadratic, x: f64, y: f64) -> PhiValue {
    let xp = [1.0, x, x * x];
    let yp = [1.0, y, y * y];
    let mut out = PhiValue {
        value: 0.0,
        dx: 0.0,
        dy: 0.0,
    };
    for i in 0..3 {
        for j in 0..3 {
            let a = phi.alpha[i][j];
            out.value += a * xp[i] * yp[j];
            if i > 0 {
                out.dx += a * i as f64 * xp[i - 1] * yp[j];
            }
            if j > 0 {
                out.dy += a * j as f64 * xp[i] * yp[j - 1];
            }
        }
    }
    out
}

/// `Phi` read as a quadratic in `y` (the `u` polynomials) and in `x` (the `v` ones):
/// `Phi = u[2](x) y^2 + u[1](x) y + u[0](x) = v[2](y) x^2 + v[1](y) x + v[0](y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvPolynomials {
    pub u: [QuadraticPolynomial; 3],
    pub v: [QuadraticPolynomial; 3],
}

pub fn extract_uv(phi: &BiQuadratic) -> UvPolynomials {
    let a = &phi.alpha;
    let u = std::array::from_fn(|i| QuadraticPolynomial::new([a[0][i], a[1][i], a[2][i]]));
    let v = std::array::from_fn(|i| QuadraticPolynomial::new([a[i][0], a[i][1], a[i][2]]));
    UvPolynomials { u, v }
}

/// The five pencil parameters `tau0..tau4` of
/// `W = tau1 X Y + tau2 Z + tau3 X + tau4 Y + tau0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 5]")]
pub struct PencilCoefficients {
    tau: [f64; 5],
}

impl From<PencilCoefficients> for [f64; 5] {
    fn from(t: PencilCoefficients) -> Self {
        t.tau
    }
}

impl PencilCoefficients {
    /// `tau = [tau0, tau1, tau2, tau3, tau4]`.
    pub fn new(tau: [f64; 5]) -> Result<Self, PencilError> {
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(PencilError::NonFinite);
        }
        if tau[1..].iter().all(|&t| t == 0.0) {
            return Err(PencilError::Constant);
        }
        Ok(PencilCoefficients { tau })
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.tau
    }

    pub fn tau0(&self) -> f64 {
        self.tau[0]
    }
    pub fn tau1(&self) -> f64 {
        self.tau[1]
    }
    pub fn tau2(&self) -> f64 {
        self.tau[2]
    }
    pub fn tau3(&self) -> f64 {
        self.tau[3]
    }
    pub fn tau4(&self) -> f64 {
        self.tau[4]
    }

    /// No `XY`, `Z` or `X` term: the flow of `W` is then the flow of `Y`.
    pub fn is_elementary_for_x(&self) -> bool {
        self.tau[1] == 0.0 && self.tau[2] == 0.0 && self.tau[3] == 0.0
    }

    /// Mirror image for the `Y` dynamics.
    pub fn is_elementary_for_y(&self) -> bool {
        self.tau[1] == 0.0 && self.tau[2] == 0.0 && self.tau[4] == 0.0
    }
}

/// `tau1 x y + tau2 z + tau3 x + tau4 y + tau0`.
pub fn heun_value(tau: &PencilCoefficients, x: f64, y: f64, z: f64) -> f64 {
    let [t0, t1, t2, t3, t4] = tau.tau;
    t1 * x * y + t2 * z + t3 * x + t4 * y + t0
}

/// `Q = z^2 - Phi(x, y)`.
pub fn casimir_q(phi: &BiQuadratic, x: f64, y: f64, z: f64) -> f64 {
    z * z - phi.value(x, y)
}

/// Which Hamilton equation is squared: `{X, W}` or `{Y, W}` (the tilde case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Elimination {
    X,
    Y,
}

impl Elimination {
    pub fn label(self) -> &'static str {
        match self {
            Elimination::X => "X",
            Elimination::Y => "Y",
        }
    }
}

/// Coefficients of `{X, W}^2 = pi2(X) W^2 + pi3(X) W + pi4(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiPolynomials {
    pub pi2: QuadraticPolynomial,
    pub pi3: CubicPolynomial,
    pub pi4: QuarticPolynomial,
}

/// Elimination polynomials for the `X` equation, or for `Y` with `u -> v`
/// and `tau3 <-> tau4`.
///
/// With `A = tau1 x + tau4` and `C = tau3 x + tau0`:
/// ```text
/// pi2 = U2
/// pi3 = A U1 - 2 C U2
/// pi4 = U2 C^2 - U1 A C + U0 A^2 + tau2^2/4 (U1^2 - 4 U2 U0)
/// ```
/// The `U2 C^2` term is required: without it `W = tau3 X + tau0` would give a
/// nonzero `{X, W}^2`.
pub fn pi_polynomials(
    tau: &PencilCoefficients,
    phi: &BiQuadratic,
    which: Elimination,
) -> PiPolynomials {
    let uv = extract_uv(phi);
    let [t0, t1, t2, mut t3, mut t4] = tau.tau;
    let [p0, p1, p2] = match which {
        Elimination::X => uv.u,
        Elimination::Y => {
            std::mem::swap(&mut t3, &mut t4);
            uv.v
        }
    };
    let a = DensePoly::new([t4, t1]);
    let c = DensePoly::new([t0, t3]);

    let pi3 = a.mul_quartic(&p1) - c.mul_quartic(&p2).scale(2.0);
    let pi4 = p2.mul_quartic(&c.mul_quartic(&c)) - p1.mul_quartic(&a.mul_quartic(&c))
        + p0.mul_quartic(&a.mul_quartic(&a))
        + (p1.mul_quartic(&p1) - p2.mul_quartic(&p0).scale(4.0)).scale(0.25 * t2 * t2);
    PiPolynomials {
        pi2: p2,
        pi3: pi3.narrow(),
        pi4,
    }
}

/// `P4(x) = pi2(x) w^2 + pi3(x) w + pi4(x)`.
pub fn assemble_quartic(pis: &PiPolynomials, w: f64) -> QuarticPolynomial {
    pis.pi2.widen::<5>().scale(w * w) + pis.pi3.widen::<5>().scale(w) + pis.pi4
}

/// `{X, W}` from the algebra relations alone:
/// `tau1 x z + tau2/2 Phi_y + tau4 z`.
pub fn bracket_x_w(tau: &PencilCoefficients, phi: &BiQuadratic, x: f64, y: f64, z: f64) -> f64 {
    let d = phi_eval(phi, x, y);
    tau.tau1() * x * z + 0.5 * tau.tau2() * d.dy + tau.tau4() * z
}

/// `{Y, W} = -tau1 y z - tau2/2 Phi_x - tau3 z`.
pub fn bracket_y_w(tau: &PencilCoefficients, phi: &BiQuadratic, x: f64, y: f64, z: f64) -> f64 {
    let d = phi_eval(phi, x, y);
    -tau.tau1() * y * z - 0.5 * tau.tau2() * d.dx - tau.tau3() * z
}
