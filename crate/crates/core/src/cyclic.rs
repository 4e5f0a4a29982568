//! Complex-valued functions on `Z/NZ` with the uniform probability measure,
//! and their Fourier analysis.
//!
//! The Fourier transform carries the `1/N` on the forward side (probability
//! Haar convention), so that the degree-2 uniformity norm equals the `l^4`
//! norm of the transform with no extra scaling. The fast path goes through
//! an FFT; a naive `O(N^2)` transform is kept as the oracle path.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// The finite cyclic group `Z/NZ`, `N >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CyclicGroup {
    order: usize,
}

impl CyclicGroup {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::EmptyGroup);
        }
        Ok(CyclicGroup { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Reduces an integer into `0..N`.
    pub fn reduce(&self, x: i64) -> usize {
        let n = self.order as i64;
        (((x % n) + n) % n) as usize
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let s = a + b;
        if s >= self.order {
            s - self.order
        } else {
            s
        }
    }

    /// `e(x*freq/N)` viewed as a function on the group.
    pub fn character(&self, freq: i64) -> GroupFunction {
        let n = self.order;
        let values = (0..n)
            .map(|x| unit_phase(TAU * (x as f64) * (freq as f64) / n as f64))
            .collect();
        GroupFunction {
            group: *self,
            values,
        }
    }
}

fn unit_phase(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// A complex-valued function on `Z/NZ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    group: CyclicGroup,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: CyclicGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::LengthMismatch {
                expected: group.order(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GroupFunction { group, values })
    }

    pub fn constant(group: CyclicGroup, c: Complex64) -> Self {
        GroupFunction {
            group,
            values: vec![c; group.order()],
        }
    }

    pub fn zero(group: CyclicGroup) -> Self {
        Self::constant(group, Complex64::ZERO)
    }

    /// Indicator function of a subset given by representatives mod `N`.
    pub fn indicator(group: CyclicGroup, set: &[i64]) -> Self {
        let mut values = vec![Complex64::ZERO; group.order()];
        for &x in set {
            values[group.reduce(x)] = Complex64::ONE;
        }
        GroupFunction { group, values }
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, x: i64) -> Complex64 {
        self.values[self.group.reduce(x)]
    }

    fn check_same_group(&self, other: &GroupFunction) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                left: self.group.order(),
                right: other.group.order(),
            });
        }
        Ok(())
    }

    /// `(1/N) * sum_x f(x)`.
    pub fn mean(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum / self.len() as f64
    }

    /// The translate `x -> f(x+t)`.
    pub fn shift(&self, t: i64) -> GroupFunction {
        let n = self.len();
        let t = self.group.reduce(t);
        let mut values = Vec::with_capacity(n);
        values.extend_from_slice(&self.values[t..]);
        values.extend_from_slice(&self.values[..t]);
        GroupFunction {
            group: self.group,
            values,
        }
    }

    pub fn conjugate(&self) -> GroupFunction {
        GroupFunction {
            group: self.group,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn pointwise_multiply(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.check_same_group(other)?;
        Ok(GroupFunction {
            group: self.group,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.check_same_group(other)?;
        Ok(GroupFunction {
            group: self.group,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.check_same_group(other)?;
        Ok(GroupFunction {
            group: self.group,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> GroupFunction {
        GroupFunction {
            group: self.group,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `L^2` norm with respect to the uniform probability measure.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s / self.len() as f64).sqrt()
    }

    /// Forward transform, fast path: `f^(xi) = (1/N) sum_x f(x) e(-x*xi/N)`.
    pub fn fourier_transform(&self) -> FourierCoefficients {
        let n = self.len();
        let mut buf = self.values.clone();
        fft_forward(&mut buf);
        let scale = 1.0 / n as f64;
        for v in &mut buf {
            *v *= scale;
        }
        FourierCoefficients {
            group: self.group,
            coefficients: buf,
        }
    }

    /// Forward transform by direct `O(N^2)` summation (oracle path).
    pub fn fourier_transform_naive(&self) -> FourierCoefficients {
        let n = self.len();
        let mut coefficients = Vec::with_capacity(n);
        for xi in 0..n {
            let mut acc = Complex64::ZERO;
            for (x, v) in self.values.iter().enumerate() {
                let theta = -TAU * ((x * xi) % n) as f64 / n as f64;
                acc += v * unit_phase(theta);
            }
            coefficients.push(acc / n as f64);
        }
        FourierCoefficients {
            group: self.group,
            coefficients,
        }
    }

    /// CSV with header `index,re,im`, one row per element, ascending index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i, crate::fmt_f64(v.re), crate::fmt_f64(v.im));
        }
        out
    }

    /// Parses the `index,re,im` CSV format. Rows must cover `0..N-1` in order.
    pub fn from_csv(text: &str) -> Result<GroupFunction> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            row: 0,
            message: "empty input".into(),
        })?;
        if header.trim() != "index,re,im" {
            return Err(Error::Parse {
                row: 0,
                message: format!("expected header 'index,re,im', got '{}'", header.trim()),
            });
        }
        let mut values = Vec::new();
        for (row, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let idx: usize = parse_field(parts.next(), row, "index")?;
            if idx != values.len() {
                return Err(Error::Parse {
                    row,
                    message: format!("expected index {}, got {}", values.len(), idx),
                });
            }
            let re: f64 = parse_field(parts.next(), row, "re")?;
            let im: f64 = parse_field(parts.next(), row, "im")?;
            if parts.next().is_some() {
                return Err(Error::Parse {
                    row,
                    message: "too many fields".into(),
                });
            }
            values.push(Complex64::new(re, im));
        }
        let group = CyclicGroup::new(values.len())?;
        GroupFunction::new(group, values)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, row: usize, name: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        row,
        message: format!("missing field '{}'", name),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("invalid {} '{}'", name, raw.trim()),
    })
}

/// Fourier coefficients of a [`GroupFunction`], indexed by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    group: CyclicGroup,
    coefficients: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, xi: i64) -> Complex64 {
        self.coefficients[self.group.reduce(xi)]
    }

    /// `(sum_xi |f^(xi)|^4)^(1/4)`.
    pub fn l4_norm(&self) -> f64 {
        let s: f64 = self
            .coefficients
            .iter()
            .map(|c| {
                let m = c.norm_sqr();
                m * m
            })
            .sum();
        s.powf(0.25)
    }

    /// Inversion `f(x) = sum_xi f^(xi) e(+x*xi/N)` (no scaling: the forward
    /// transform already carried the `1/N`).
    pub fn inverse(&self) -> GroupFunction {
        let mut buf = self.coefficients.clone();
        fft_inverse(&mut buf);
        GroupFunction {
            group: self.group,
            values: buf,
        }
    }
}

// rustfft planners memoize twiddles per length; keep one planner per process.
fn fft_forward(buf: &mut [Complex64]) {
    static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    planner.plan_fft_forward(buf.len()).process(buf);
}

fn fft_inverse(buf: &mut [Complex64]) {
    static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    planner.plan_fft_inverse(buf.len()).process(buf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn group(n: usize) -> CyclicGroup {
        CyclicGroup::new(n).unwrap()
    }

    #[test]
    fn mean_of_constant_is_constant() {
        let f = GroupFunction::constant(group(8), Complex64::ONE);
        assert_eq!(f.mean(), Complex64::ONE);
    }

    #[test]
    fn mean_of_sign_function_vanishes() {
        let f = GroupFunction::new(
            group(2),
            vec![Complex64::ONE, -Complex64::ONE],
        )
        .unwrap();
        assert_eq!(f.mean(), Complex64::ZERO);
    }

    #[test]
    fn mean_of_half_indicator() {
        let f = GroupFunction::indicator(group(4), &[0, 2]);
        assert_eq!(f.mean(), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let f = GroupFunction::indicator(group(5), &[1, 3]);
        assert_eq!(f.shift(0), f);
    }

    #[test]
    fn shift_rotates_values() {
        let f = GroupFunction::new(
            group(3),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        let g = f.shift(1);
        assert_eq!(
            g.values(),
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, 0.0)
            ]
        );
    }

    #[test]
    fn shifts_compose_additively() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = sampling::random_function(&mut rng, group(12));
        let lhs = f.shift(5).shift(9);
        let rhs = f.shift(14);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn transform_of_constant_is_delta_at_zero() {
        let f = GroupFunction::constant(group(8), Complex64::ONE);
        let hat = f.fourier_transform();
        assert!((hat.coefficient(0) - Complex64::ONE).norm() < 1e-12);
        for xi in 1..8 {
            assert!(hat.coefficient(xi as i64).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_of_character_is_delta_at_frequency() {
        // Independent check by direct summation.
        let g = group(16);
        let f = g.character(3);
        let naive = f.fourier_transform_naive();
        let fast = f.fourier_transform();
        for xi in 0..16 {
            let expected = if xi == 3 { Complex64::ONE } else { Complex64::ZERO };
            assert!((naive.coefficient(xi) - expected).norm() < 1e-12);
            assert!((fast.coefficient(xi) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_on_random_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let f = sampling::random_function(&mut rng, group(16));
        let hat = f.fourier_transform();
        let lhs: f64 = hat.coefficients().iter().map(|c| c.norm_sqr()).sum();
        let rhs: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 16.0;
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn multiply_by_one_and_conjugation_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = sampling::random_function(&mut rng, group(9));
        let one = GroupFunction::constant(group(9), Complex64::ONE);
        assert_eq!(f.pointwise_multiply(&one).unwrap(), f);
        assert_eq!(f.conjugate().conjugate(), f);
        let sq = f.pointwise_multiply(&f.conjugate()).unwrap();
        for (v, w) in sq.values().iter().zip(f.values()) {
            assert!((v.re - w.norm_sqr()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn group_mismatch_rejected() {
        let f = GroupFunction::constant(group(4), Complex64::ONE);
        let g = GroupFunction::constant(group(5), Complex64::ONE);
        assert!(matches!(
            f.pointwise_multiply(&g),
            Err(Error::GroupMismatch { left: 4, right: 5 })
        ));
    }

    #[test]
    fn non_finite_values_rejected() {
        let err = GroupFunction::new(group(2), vec![Complex64::ONE, Complex64::new(f64::NAN, 0.0)]);
        assert!(matches!(err, Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn csv_round_trip_and_bad_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = sampling::random_function(&mut rng, group(6));
        let text = f.to_csv();
        let back = GroupFunction::from_csv(&text).unwrap();
        assert_eq!(f, back);

        let bad = "index,re,im\n0,1.0,zzz\n";
        match GroupFunction::from_csv(bad) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    proptest::proptest! {
        #[test]
        fn inversion_reconstructs(seed in 0u64..500, n in 1usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sampling::random_function(&mut rng, group(n));
            let back = f.fourier_transform().inverse();
            for (a, b) in f.values().iter().zip(back.values()) {
                proptest::prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn shift_preserves_mean(seed in 0u64..500, n in 1usize..64, t in -200i64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sampling::random_function(&mut rng, group(n));
            proptest::prop_assert!((f.shift(t).mean() - f.mean()).norm() < 1e-12);
        }

        #[test]
        fn parseval_holds(seed in 0u64..500, n in 1usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sampling::random_function(&mut rng, group(n));
            let hat = f.fourier_transform();
            let lhs: f64 = hat.coefficients().iter().map(|c| c.norm_sqr()).sum();
            let rhs: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            proptest::prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn naive_and_fast_transforms_agree(seed in 0u64..200, n in 1usize..48) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sampling::random_function(&mut rng, group(n));
            let naive = f.fourier_transform_naive();
            let fast = f.fourier_transform();
            for (a, b) in naive.coefficients().iter().zip(fast.coefficients()) {
                proptest::prop_assert!((a - b).norm() < 1e-10);
            }
        }
    }
}
