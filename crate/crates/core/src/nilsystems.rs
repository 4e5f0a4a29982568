//! The two explicit 2-step nilsystems: the skew product on the 2-torus and
//! the Heisenberg nilmanifold, with orbit generation and Birkhoff averages.
//!
//! Ergodicity criteria for these systems are arithmetic ("alpha irrational",
//! "t1, t2 rationally independent") and undecidable on floats, so parameters
//! carry an explicit declaration: exact rationals give reproducible periodic
//! systems, doubles are declared irrational by the caller and the declaration
//! travels with the output metadata.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{doubling_checkpoints, CesaroSeries};

const ONE_SNAP: f64 = 1e-12;

/// Reduction to `[0, 1)`, snapping values within 1e-12 of 1 down to 0 so
/// that interval invariants stay testable.
pub fn mod1(x: f64) -> f64 {
    let mut r = x - x.floor();
    if r >= 1.0 - ONE_SNAP {
        r = 0.0;
    }
    if r == 0.0 {
        // normalize -0.0
        r = 0.0;
    }
    r
}

/// `n * alpha mod 1` with a compensated product, so large `n` does not chew
/// through the fractional precision.
pub fn mul_mod1(n: i64, alpha: f64) -> f64 {
    let nf = n as f64;
    let hi = nf * alpha;
    let lo = nf.mul_add(alpha, -hi);
    mod1(mod1(hi) + lo)
}

/// A rotation parameter: an exact reduced rational or a double declared
/// irrational by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationNumber {
    Rational { num: i64, den: u64 },
    Irrational(f64),
}

impl RotationNumber {
    pub fn rational(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let g = gcd(num.unsigned_abs(), den);
        Ok(RotationNumber::Rational {
            num: num / g as i64,
            den: den / g,
        })
    }

    /// `(sqrt 5 - 1) / 2`, declared irrational.
    pub fn golden() -> Self {
        RotationNumber::Irrational((5.0f64.sqrt() - 1.0) / 2.0)
    }

    pub fn irrational(value: f64) -> Self {
        RotationNumber::Irrational(value)
    }

    pub fn value(&self) -> f64 {
        match self {
            RotationNumber::Rational { num, den } => *num as f64 / *den as f64,
            RotationNumber::Irrational(v) => *v,
        }
    }

    /// The caller-declared ergodicity intent recorded in output metadata.
    pub fn declared_irrational(&self) -> bool {
        matches!(self, RotationNumber::Irrational(_))
    }

    pub fn describe(&self) -> String {
        match self {
            RotationNumber::Rational { num, den } => {
                format!("{}/{} (exact rational)", num, den)
            }
            RotationNumber::Irrational(v) => {
                format!("{} (declared irrational)", crate::fmt_f64(*v))
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A point of the 2-torus carrying the skew product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewPoint {
    pub x: f64,
    pub y: f64,
}

impl SkewPoint {
    pub fn new(x: f64, y: f64) -> Self {
        SkewPoint {
            x: mod1(x),
            y: mod1(y),
        }
    }
}

/// One step of `T(x, y) = (x + alpha, y + 2x + alpha)`.
pub fn skew_step(p: SkewPoint, alpha: f64) -> SkewPoint {
    SkewPoint {
        x: mod1(p.x + alpha),
        y: mod1(p.y + 2.0 * p.x + alpha),
    }
}

/// `T^n` in closed form: `(x + n alpha, y + 2 n x + n^2 alpha)`.
pub fn skew_power(p: SkewPoint, alpha: f64, n: i64) -> SkewPoint {
    let na = mul_mod1(n, alpha);
    let n2a = mul_mod1(
        n.checked_mul(n).expect("n^2 fits in i64"),
        alpha,
    );
    let two_nx = mul_mod1(2 * n, p.x);
    SkewPoint {
        x: mod1(p.x + na),
        y: mod1(p.y + two_nx + n2a),
    }
}

/// An element of the Heisenberg group `R^3` with
/// `(x, y, z) * (x', y', z') = (x + x', y + y', z + z' + x y')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergElement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergElement {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        HeisenbergElement { x, y, z }
    }

    pub fn identity() -> Self {
        HeisenbergElement::new(0.0, 0.0, 0.0)
    }

    /// `g^-1 = (-x, -y, -z + x y)`; `g * g^-1` is exactly the identity.
    pub fn inverse(self) -> HeisenbergElement {
        HeisenbergElement {
            x: -self.x,
            y: -self.y,
            z: -self.z + self.x * self.y,
        }
    }

    /// `[g, h] = g^-1 h^-1 g h`.
    pub fn commutator(self, h: HeisenbergElement) -> HeisenbergElement {
        self.inverse() * h.inverse() * self * h
    }

    /// `g^n = (n x, n y, n z + C(n,2) x y)`.
    pub fn pow(self, n: i64) -> HeisenbergElement {
        let nf = n as f64;
        let choose2 = nf * (nf - 1.0) / 2.0;
        HeisenbergElement {
            x: nf * self.x,
            y: nf * self.y,
            z: nf * self.z + choose2 * self.x * self.y,
        }
    }

}

impl std::ops::Mul for HeisenbergElement {
    type Output = HeisenbergElement;

    fn mul(self, rhs: HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
            z: self.z + rhs.z + self.x * rhs.y,
        }
    }
}

/// Canonical representative of a coset `g Lambda`, `Lambda = Z^3`, with all
/// coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergPoint {
    pub fn representative(self) -> HeisenbergElement {
        HeisenbergElement::new(self.x, self.y, self.z)
    }
}

/// Right-multiplies by the lattice element that lands the representative in
/// the fundamental domain: `a = -floor(x)`, `b = -floor(y)`, then
/// `c = -floor(z + x b)`. Idempotent, and constant on cosets.
pub fn reduce_mod_lattice(g: HeisenbergElement) -> HeisenbergPoint {
    // g * (a, b, c) = (x + a, y + b, z + c + x b)
    let b = -g.y.floor();
    let z_mid = g.z + g.x * b;
    HeisenbergPoint {
        x: mod1(g.x),
        y: mod1(g.y),
        z: mod1(z_mid),
    }
}

/// Left translation `p -> reduce(t * p~)` for any representative `p~`.
pub fn nil_step(p: HeisenbergPoint, t: HeisenbergElement) -> HeisenbergPoint {
    reduce_mod_lattice(t * p.representative())
}

/// Partial Birkhoff averages of `observable` along the orbit of `start`,
/// at doubling checkpoints up to `n`.
pub fn birkhoff_series<P, S, F>(start: P, step: S, observable: F, n: u64) -> CesaroSeries
where
    P: Clone,
    S: Fn(&P) -> P,
    F: Fn(&P) -> Complex64,
{
    assert!(n >= 1);
    let checkpoints = doubling_checkpoints(n);
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut point = start;
    let mut sum = Complex64::ZERO;
    let mut count = 0u64;
    for &c in &checkpoints {
        while count < c {
            sum += observable(&point);
            point = step(&point);
            count += 1;
        }
        values.push(sum / c as f64);
    }
    CesaroSeries::from_scalars(checkpoints, values)
}

/// The orbit `start, T(start), .., T^(n-1)(start)` of the skew product.
pub fn skew_orbit(start: SkewPoint, alpha: f64, n: u64) -> Vec<SkewPoint> {
    let mut out = Vec::with_capacity(n as usize);
    let mut p = start;
    for _ in 0..n {
        out.push(p);
        p = skew_step(p, alpha);
    }
    out
}

/// The orbit of a Heisenberg coset under translation by `t`.
pub fn heisenberg_orbit(start: HeisenbergPoint, t: HeisenbergElement, n: u64) -> Vec<HeisenbergPoint> {
    let mut out = Vec::with_capacity(n as usize);
    let mut p = start;
    for _ in 0..n {
        out.push(p);
        p = nil_step(p, t);
    }
    out
}

/// `e(2 pi i c)` for a coordinate value `c`.
pub fn phase(c: f64) -> Complex64 {
    let theta = std::f64::consts::TAU * c;
    Complex64::new(theta.cos(), theta.sin())
}
