//! Phase-space geometry: canonical `(q, p)` and Lie–Poisson su(2).
//!
//! Observables carry analytic gradients; every bracket and vector field is
//! assembled from those gradients with the chain rule. Finite differences
//! only show up in [`gradient_check`], which tests use as an oracle.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhaseKind {
    /// One degree of freedom with `{q, p} = 1`.
    Canonical,
    /// Generators `s1, s2, s3` with `{s_i, s_k} = eps_ikl s_l`.
    SU2,
}

impl PhaseKind {
    pub fn dim(self) -> usize {
        match self {
            PhaseKind::Canonical => 2,
            PhaseKind::SU2 => 3,
        }
    }

    pub fn coordinate_labels(self) -> &'static [&'static str] {
        match self {
            PhaseKind::Canonical => &["q", "p"],
            PhaseKind::SU2 => &["s1", "s2", "s3"],
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseKind::Canonical => f.write_str("canonical"),
            PhaseKind::SU2 => f.write_str("su2"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("phase-space kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: PhaseKind,
        found: PhaseKind,
    },
    #[error("expected {expected} coordinates, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite coordinate in phase point")]
    NonFinite,
}

/// A point of one of the two supported phase spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhasePoint {
    Canonical { q: f64, p: f64 },
    SU2 { s: [f64; 3] },
}

impl PhasePoint {
    pub fn canonical(q: f64, p: f64) -> Self {
        PhasePoint::Canonical { q, p }
    }

    pub fn su2(s1: f64, s2: f64, s3: f64) -> Self {
        PhasePoint::SU2 { s: [s1, s2, s3] }
    }

    pub fn kind(&self) -> PhaseKind {
        match self {
            PhasePoint::Canonical { .. } => PhaseKind::Canonical,
            PhasePoint::SU2 { .. } => PhaseKind::SU2,
        }
    }

    pub fn coords(&self) -> CoordVector {
        match *self {
            PhasePoint::Canonical { q, p } => CoordVector::new2(q, p),
            PhasePoint::SU2 { s } => CoordVector::new3(s),
        }
    }

    pub fn from_coords(kind: PhaseKind, c: &[f64]) -> Result<Self, PhaseError> {
        if c.len() != kind.dim() {
            return Err(PhaseError::Dimension {
                expected: kind.dim(),
                found: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(PhaseError::NonFinite);
        }
        Ok(match kind {
            PhaseKind::Canonical => PhasePoint::canonical(c[0], c[1]),
            PhaseKind::SU2 => PhasePoint::su2(c[0], c[1], c[2]),
        })
    }

    /// `self + h * v`, componentwise.
    pub fn displaced(&self, v: &CoordVector, h: f64) -> Self {
        match *self {
            PhasePoint::Canonical { q, p } => PhasePoint::canonical(q + h * v[0], p + h * v[1]),
            PhasePoint::SU2 { s } => {
                PhasePoint::su2(s[0] + h * v[0], s[1] + h * v[1], s[2] + h * v[2])
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().as_slice().iter().all(|v| v.is_finite())
    }
}

/// Fixed-capacity coordinate vector (length 2 or 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordVector {
    dim: usize,
    c: [f64; 3],
}

/// Right-hand side of Hamilton's equations at a point.
pub type TangentVector = CoordVector;

impl CoordVector {
    pub fn new2(a: f64, b: f64) -> Self {
        CoordVector {
            dim: 2,
            c: [a, b, 0.0],
        }
    }

    pub fn new3(c: [f64; 3]) -> Self {
        CoordVector { dim: 3, c }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "phase spaces have dimension 2 or 3");
        CoordVector { dim, c: [0.0; 3] }
    }

    pub fn len(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn dot(&self, other: &CoordVector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for CoordVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> CoordVector + Send + Sync;

/// A smooth function on phase space together with its analytic gradient.
///
/// Evaluating an observable at a point of the wrong kind yields `NaN`;
/// the bracket operations check kinds up front and report an error instead.
#[derive(Clone)]
pub struct Observable {
    label: String,
    kind: PhaseKind,
    eval: Arc<EvalFn>,
    grad: Arc<GradFn>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Observable {
    /// Observable on the canonical plane. `grad` returns `(dF/dq, dF/dp)`.
    pub fn canonical<F, G>(label: impl Into<String>, eval: F, grad: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Observable {
            label: label.into(),
            kind: PhaseKind::Canonical,
            eval: Arc::new(move |c: &[f64]| eval(c[0], c[1])),
            grad: Arc::new(move |c: &[f64]| {
                let (a, b) = grad(c[0], c[1]);
                CoordVector::new2(a, b)
            }),
        }
    }

    /// Observable on su(2)*.
    pub fn su2<F, G>(label: impl Into<String>, eval: F, grad: G) -> Self
    where
        F: Fn(&[f64; 3]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    {
        Observable {
            label: label.into(),
            kind: PhaseKind::SU2,
            eval: Arc::new(move |c: &[f64]| eval(&[c[0], c[1], c[2]])),
            grad: Arc::new(move |c: &[f64]| CoordVector::new3(grad(&[c[0], c[1], c[2]]))),
        }
    }

    /// The `index`-th coordinate function.
    pub fn coordinate(kind: PhaseKind, index: usize) -> Self {
        assert!(index < kind.dim(), "coordinate index out of range");
        let label = kind.coordinate_labels()[index];
        let dim = kind.dim();
        Observable {
            label: label.to_string(),
            kind,
            eval: Arc::new(move |c: &[f64]| c[index]),
            grad: Arc::new(move |_: &[f64]| {
                let mut g = CoordVector::zeros(dim);
                g.c[index] = 1.0;
                g
            }),
        }
    }

    pub fn constant(kind: PhaseKind, value: f64) -> Self {
        let dim = kind.dim();
        Observable {
            label: format!("{value}"),
            kind,
            eval: Arc::new(move |_: &[f64]| value),
            grad: Arc::new(move |_: &[f64]| CoordVector::zeros(dim)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn value(&self, x: &PhasePoint) -> f64 {
        if x.kind() != self.kind {
            return f64::NAN;
        }
        (self.eval)(x.coords().as_slice())
    }

    pub fn gradient(&self, x: &PhasePoint) -> CoordVector {
        if x.kind() != self.kind {
            let mut g = CoordVector::zeros(x.kind().dim());
            g.c = [f64::NAN; 3];
            return g;
        }
        (self.grad)(x.coords().as_slice())
    }

    fn check_kind(&self, x: &PhasePoint) -> Result<(), PhaseError> {
        if x.kind() != self.kind {
            return Err(PhaseError::KindMismatch {
                expected: self.kind,
                found: x.kind(),
            });
        }
        Ok(())
    }

    /// Pointwise product; the gradient follows the product rule.
    pub fn product(&self, other: &Observable) -> Observable {
        assert_eq!(
            self.kind, other.kind,
            "product of observables of different kinds"
        );
        let (fa, ga, fb, gb) = (
            self.eval.clone(),
            self.grad.clone(),
            other.eval.clone(),
            other.grad.clone(),
        );
        let (fa2, fb2) = (fa.clone(), fb.clone());
        Observable {
            label: format!("({})*({})", self.label, other.label),
            kind: self.kind,
            eval: Arc::new(move |c: &[f64]| fa(c) * fb(c)),
            grad: Arc::new(move |c: &[f64]| {
                let (a, b) = (fa2(c), fb2(c));
                let (da, db) = (ga(c), gb(c));
                let mut g = CoordVector::zeros(da.dim);
                for i in 0..da.dim {
                    g.c[i] = da.c[i] * b + a * db.c[i];
                }
                g
            }),
        }
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Observable, b: f64) -> Observable {
        assert_eq!(
            self.kind, other.kind,
            "sum of observables of different kinds"
        );
        let (fa, ga, fb, gb) = (
            self.eval.clone(),
            self.grad.clone(),
            other.eval.clone(),
            other.grad.clone(),
        );
        Observable {
            label: format!("{a}*({}) + {b}*({})", self.label, other.label),
            kind: self.kind,
            eval: Arc::new(move |c: &[f64]| a * fa(c) + b * fb(c)),
            grad: Arc::new(move |c: &[f64]| {
                let (da, db) = (ga(c), gb(c));
                let mut g = CoordVector::zeros(da.dim);
                for i in 0..da.dim {
                    g.c[i] = a * da.c[i] + b * db.c[i];
                }
                g
            }),
        }
    }
}

/// `{F, G}` at `x`.
///
/// Canonical: `F_q G_p - F_p G_q`. su(2): `s . (grad F x grad G)`, which gives
/// `{s_i, s_k} = eps_ikl s_l` on the coordinate functions.
pub fn poisson_bracket(f: &Observable, g: &Observable, x: &PhasePoint) -> Result<f64, PhaseError> {
    f.check_kind(x)?;
    g.check_kind(x)?;
    let (df, dg) = (f.gradient(x), g.gradient(x));
    Ok(match x {
        PhasePoint::Canonical { .. } => df[0] * dg[1] - df[1] * dg[0],
        PhasePoint::SU2 { s } => {
            let c = cross(&df.c, &dg.c);
            s[0] * c[0] + s[1] * c[1] + s[2] * c[2]
        }
    })
}

/// Vector field of `H`, normalised so that `dF/dt = {F, H}` for every `F`.
pub fn hamiltonian_vector_field(
    h: &Observable,
    x: &PhasePoint,
) -> Result<TangentVector, PhaseError> {
    h.check_kind(x)?;
    let dh = h.gradient(x);
    Ok(match x {
        PhasePoint::Canonical { .. } => CoordVector::new2(dh[1], -dh[0]),
        PhasePoint::SU2 { s } => CoordVector::new3(cross(&dh.c, s)),
    })
}

/// Largest deviation between the analytic gradient of `f` and a central
/// difference with step `h * max(1, |x_i|)` in each coordinate.
pub fn gradient_check(f: &Observable, x: &PhasePoint, h: f64) -> f64 {
    assert!(h > 0.0, "finite-difference step must be positive");
    let analytic = f.gradient(x);
    let base = x.coords();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let step = h * base[i].abs().max(1.0);
        let mut e = CoordVector::zeros(base.len());
        e.c[i] = 1.0;
        let fp = f.value(&x.displaced(&e, step));
        let fm = f.value(&x.displaced(&e, -step));
        let fd = (fp - fm) / (2.0 * step);
        worst = worst.max((analytic[i] - fd).abs());
    }
    worst
}

/// `S^2 = s1^2 + s2^2 + s3^2`.
pub fn su2_casimir(x: &PhasePoint) -> Result<f64, PhaseError> {
    match x {
        PhasePoint::SU2 { s } => Ok(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]),
        PhasePoint::Canonical { .. } => Err(PhaseError::KindMismatch {
            expected: PhaseKind::SU2,
            found: PhaseKind::Canonical,
        }),
    }
}

/// The Casimir `S^2` as an observable.
pub fn su2_casimir_observable() -> Observable {
    Observable::su2(
        "S2",
        |s| s[0] * s[0] + s[1] * s[1] + s[2] * s[2],
        |s| [2.0 * s[0], 2.0 * s[1], 2.0 * s[2]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q() -> Observable {
        Observable::coordinate(PhaseKind::Canonical, 0)
    }

    fn p() -> Observable {
        Observable::coordinate(PhaseKind::Canonical, 1)
    }

    fn s(i: usize) -> Observable {
        Observable::coordinate(PhaseKind::SU2, i)
    }

    fn random_point(rng: &mut ChaCha8Rng, kind: PhaseKind) -> PhasePoint {
        match kind {
            PhaseKind::Canonical => {
                PhasePoint::canonical(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            }
            PhaseKind::SU2 => PhasePoint::su2(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
        }
    }

    fn sample_observables(kind: PhaseKind) -> Vec<Observable> {
        match kind {
            PhaseKind::Canonical => vec![
                Observable::canonical("q^2 p", |q, p| q * q * p, |q, p| (2.0 * q * p, q * q)),
                Observable::canonical(
                    "sin q + p^3",
                    |q, p| q.sin() + p.powi(3),
                    |q, p| (q.cos(), 3.0 * p * p),
                ),
                Observable::canonical(
                    "cosh p sinh q",
                    |q, p| p.cosh() * q.sinh(),
                    |q, p| (p.cosh() * q.cosh(), p.sinh() * q.sinh()),
                ),
            ],
            PhaseKind::SU2 => vec![
                Observable::su2("s1 s2", |s| s[0] * s[1], |s| [s[1], s[0], 0.0]),
                Observable::su2(
                    "s3^2 + s1",
                    |s| s[2] * s[2] + s[0],
                    |s| [1.0, 0.0, 2.0 * s[2]],
                ),
                Observable::su2(
                    "s1 s2 s3",
                    |s| s[0] * s[1] * s[2],
                    |s| [s[1] * s[2], s[0] * s[2], s[0] * s[1]],
                ),
            ],
        }
    }

    #[test]
    fn canonical_coordinates_bracket_to_one() {
        let x = PhasePoint::canonical(0.4, -1.3);
        assert_eq!(poisson_bracket(&q(), &p(), &x).unwrap(), 1.0);
        assert_eq!(poisson_bracket(&p(), &q(), &x).unwrap(), -1.0);
    }

    #[test]
    fn su2_structure_constants() {
        let x = PhasePoint::su2(0.3, 0.4, 0.5);
        assert!((poisson_bracket(&s(0), &s(1), &x).unwrap() - 0.5).abs() < 1e-15);
        assert!((poisson_bracket(&s(1), &s(2), &x).unwrap() - 0.3).abs() < 1e-15);
        assert!((poisson_bracket(&s(2), &s(0), &x).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn self_bracket_vanishes() {
        for kind in [PhaseKind::Canonical, PhaseKind::SU2] {
            let x = match kind {
                PhaseKind::Canonical => PhasePoint::canonical(0.7, 0.2),
                PhaseKind::SU2 => PhasePoint::su2(0.1, -0.8, 0.4),
            };
            for f in sample_observables(kind) {
                assert_eq!(poisson_bracket(&f, &f, &x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let x = PhasePoint::su2(1.0, 0.0, 0.0);
        assert!(matches!(
            poisson_bracket(&q(), &p(), &x),
            Err(PhaseError::KindMismatch { .. })
        ));
        assert!(hamiltonian_vector_field(&q(), &x).is_err());
        assert!(su2_casimir(&PhasePoint::canonical(0.0, 1.0)).is_err());
        assert!(q().value(&x).is_nan());
    }

    #[test]
    fn free_particle_field() {
        let h = Observable::canonical("p^2/2", |_, p| 0.5 * p * p, |_, p| (0.0, p));
        let v = hamiltonian_vector_field(&h, &PhasePoint::canonical(0.0, 2.0)).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn rotation_about_third_axis() {
        let v = hamiltonian_vector_field(&s(2), &PhasePoint::su2(1.0, 0.0, 0.0)).unwrap();
        // d/dt F = {F, H}: ds2/dt = {s2, s3} = s1 = 1
        assert_eq!(v.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn bracket_matches_field_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [PhaseKind::Canonical, PhaseKind::SU2] {
            let obs = sample_observables(kind);
            for _ in 0..100 {
                let x = random_point(&mut rng, kind);
                for f in &obs {
                    for h in &obs {
                        let b = poisson_bracket(f, h, &x).unwrap();
                        let v = hamiltonian_vector_field(h, &x).unwrap();
                        let d = f.gradient(&x).dot(&v);
                        assert!((b - d).abs() < 1e-12 * b.abs().max(1.0), "{b} vs {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_check_examples() {
        let x = PhasePoint::canonical(1.0, 0.0);
        let sq = Observable::canonical("q^2", |q, _| q * q, |q, _| (2.0 * q, 0.0));
        assert!(gradient_check(&sq, &x, 1e-6) < 1e-9);

        let sinh2 = Observable::canonical(
            "sinh^2 q",
            |q, _| q.sinh().powi(2),
            |q, _| ((2.0 * q).sinh(), 0.0),
        );
        assert!(gradient_check(&sinh2, &PhasePoint::canonical(0.7, 0.0), 1e-6) < 1e-8);

        let triple = &sample_observables(PhaseKind::SU2)[2];
        assert!(gradient_check(triple, &PhasePoint::su2(1.0, 1.0, 1.0), 1e-6) < 1e-8);
    }

    #[test]
    fn gradient_check_flags_wrong_gradient() {
        let bad = Observable::canonical("q^2", |q, _| q * q, |q, _| (q, 0.0));
        assert!(gradient_check(&bad, &PhasePoint::canonical(1.0, 0.0), 1e-6) > 0.5);
    }

    #[test]
    fn casimir_values_and_centrality() {
        assert!((su2_casimir(&PhasePoint::su2(0.6, 0.8, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(su2_casimir(&PhasePoint::su2(1.0, 0.0, 0.0)).unwrap(), 1.0);
        let c = su2_casimir_observable();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = random_point(&mut rng, PhaseKind::SU2);
            for i in 0..3 {
                assert!(poisson_bracket(&c, &s(i), &x).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn antisymmetry_leibniz_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for kind in [PhaseKind::Canonical, PhaseKind::SU2] {
            let obs = sample_observables(kind);
            let (f, g, h) = (&obs[0], &obs[1], &obs[2]);
            let fg = f.product(g);
            for _ in 0..100 {
                let x = random_point(&mut rng, kind);
                let ab = poisson_bracket(f, g, &x).unwrap();
                let ba = poisson_bracket(g, f, &x).unwrap();
                assert!((ab + ba).abs() <= 1e-14 * ab.abs().max(1.0));

                let lhs = poisson_bracket(&fg, h, &x).unwrap();
                let rhs = f.value(&x) * poisson_bracket(g, h, &x).unwrap()
                    + poisson_bracket(f, h, &x).unwrap() * g.value(&x);
                assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
            }
        }

        // Jacobi on coordinate functions: the inner bracket is again linear
        // (su(2)) or constant (canonical), so it is an exact observable.
        let coords = [s(0), s(1), s(2)];
        for _ in 0..100 {
            let x = random_point(&mut rng, PhaseKind::SU2);
            let b = |i: usize, j: usize| {
                // {s_i, s_j} = eps_ijk s_k
                let k = 3 - i - j;
                let sign = if (i + 1) % 3 == j { 1.0 } else { -1.0 };
                coords[k].linear_combination(sign, &Observable::constant(PhaseKind::SU2, 0.0), 0.0)
            };
            for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let total = poisson_bracket(&coords[i], &b(j, k), &x).unwrap()
                    + poisson_bracket(&coords[j], &b(k, i), &x).unwrap()
                    + poisson_bracket(&coords[k], &b(i, j), &x).unwrap();
                assert!(total.abs() < 1e-10);
            }
        }
    }
}
