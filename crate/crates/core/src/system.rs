//! Finite measure-preserving systems: a point set `{0, .., M-1}`, a
//! permutation standing in for the transformation, and invariant
//! probability weights.
//!
//! A finite system is ergodic exactly when the permutation is a single
//! cycle and the weights are uniform; the ergodic theorem then becomes an
//! exact statement about full-cycle averages, which is what the cube-measure
//! machinery in [`crate::cube`] relies on.

use num_complex::Complex64;

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    perm: Vec<usize>,
    weights: Vec<f64>,
}

impl FiniteSystem {
    /// Builds a system from a permutation and invariant probability weights.
    pub fn new(perm: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let m = perm.len();
        if m == 0 {
            return Err(Error::NotPermutation);
        }
        let mut seen = vec![false; m];
        for &p in &perm {
            if p >= m || seen[p] {
                return Err(Error::NotPermutation);
            }
            seen[p] = true;
        }
        if weights.len() != m {
            return Err(Error::BadWeights {
                reason: format!("expected {} weights, got {}", m, weights.len()),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::BadWeights {
                reason: "weights must be finite and nonnegative".into(),
            });
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights {
                reason: format!("weights sum to {}, expected 1", total),
            });
        }
        for (i, &p) in perm.iter().enumerate() {
            if (weights[p] - weights[i]).abs() > WEIGHT_TOL {
                return Err(Error::BadWeights {
                    reason: format!("weights not invariant at index {}", i),
                });
            }
        }
        Ok(FiniteSystem { perm, weights })
    }

    /// The rotation `x -> x+1` on `Z/NZ` with uniform weights.
    pub fn cyclic_rotation(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroup);
        }
        let perm = (0..n).map(|i| (i + 1) % n).collect();
        let weights = vec![1.0 / n as f64; n];
        Ok(FiniteSystem { perm, weights })
    }

    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// `T^n(i)` for any integer `n` (negative powers walk the inverse).
    pub fn apply_pow(&self, i: usize, n: i64) -> usize {
        // Walk within the cycle through i using its length.
        let cycle = self.cycle_through(i);
        let len = cycle.len() as i64;
        let pos = cycle.iter().position(|&x| x == i).expect("i on its own cycle");
        let idx = (((pos as i64 + n) % len) + len) % len;
        cycle[idx as usize]
    }

    fn cycle_through(&self, start: usize) -> Vec<usize> {
        let mut cycle = vec![start];
        let mut x = self.perm[start];
        while x != start {
            cycle.push(x);
            x = self.perm[x];
        }
        cycle
    }

    /// All cycles of the permutation, each in traversal order.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.size();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let cycle = self.cycle_through(start);
            for &x in &cycle {
                seen[x] = true;
            }
            out.push(cycle);
        }
        out
    }

    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.size() as f64;
        self.weights.iter().all(|w| (w - target).abs() <= WEIGHT_TOL)
    }

    /// Single cycle and uniform weights.
    pub fn is_ergodic(&self) -> bool {
        self.is_uniform() && self.cycles().len() == 1
    }

    pub fn require_ergodic(&self) -> Result<()> {
        if self.is_ergodic() {
            Ok(())
        } else {
            Err(Error::NotErgodic)
        }
    }

    /// Cycle length through 0 for ergodic systems (= the system size).
    pub fn period(&self) -> Result<usize> {
        self.require_ergodic()?;
        Ok(self.size())
    }

    /// For an ergodic system, the points in orbit order starting at 0,
    /// i.e. `order[j] = T^j(0)`. Relabeling by this order turns the system
    /// into the standard rotation on `Z/MZ`.
    pub fn orbit_order(&self) -> Result<Vec<usize>> {
        self.require_ergodic()?;
        Ok(self.cycle_through(0))
    }

    /// The m-fold product system `T x ... x T` on tuples encoded in base M.
    pub fn product_power(&self, m: u32) -> Result<FiniteSystem> {
        let size = (self.size() as u128).checked_pow(m).ok_or(Error::BudgetExceeded {
            required: u128::MAX,
            cap: crate::budget::DEFAULT_MATERIALIZE_CAP,
        })?;
        crate::budget::Budget::default().check_support(size)?;
        let size = size as usize;
        let base = self.size();
        let mut perm = Vec::with_capacity(size);
        let mut weights = Vec::with_capacity(size);
        for code in 0..size {
            let mut c = code;
            let mut image = 0usize;
            let mut w = 1.0;
            let mut place = 1usize;
            for _ in 0..m {
                let digit = c % base;
                image += self.perm[digit] * place;
                w *= self.weights[digit];
                c /= base;
                place *= base;
            }
            perm.push(image);
            weights.push(w);
        }
        FiniteSystem::new(perm, weights)
    }

    /// Weighted mean of a function against the invariant measure.
    pub fn mean(&self, f: &SystemFunction) -> Result<Complex64> {
        f.check_len(self.size())?;
        Ok(f.values()
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * *w)
            .sum())
    }

    /// `L^2(mu)` norm.
    pub fn l2_norm(&self, f: &SystemFunction) -> Result<f64> {
        f.check_len(self.size())?;
        Ok(f.values()
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.norm_sqr() * *w)
            .sum::<f64>()
            .sqrt())
    }

    /// The composition `x -> f(T^n x)`.
    pub fn compose_pow(&self, f: &SystemFunction, n: i64) -> Result<SystemFunction> {
        f.check_len(self.size())?;
        let m = self.size();
        // Precompute T^n as a table by walking each cycle once.
        let mut table = vec![0usize; m];
        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let cycle = self.cycle_through(start);
            let len = cycle.len() as i64;
            let shift = (((n % len) + len) % len) as usize;
            for (j, &x) in cycle.iter().enumerate() {
                table[x] = cycle[(j + shift) % cycle.len()];
                seen[x] = true;
            }
        }
        SystemFunction::new((0..m).map(|x| f.values()[table[x]]).collect())
    }
}

/// Replaces a function by its average over each cycle of the permutation:
/// the exact conditional expectation on the invariant algebra.
pub fn invariant_conditional_expectation(
    sys: &FiniteSystem,
    f: &SystemFunction,
) -> Result<SystemFunction> {
    f.check_len(sys.size())?;
    let mut out = vec![Complex64::ZERO; sys.size()];
    for cycle in sys.cycles() {
        let total_w: f64 = cycle.iter().map(|&x| sys.weights()[x]).sum();
        let avg = if total_w > 0.0 {
            cycle
                .iter()
                .map(|&x| f.values()[x] * sys.weights()[x])
                .sum::<Complex64>()
                / total_w
        } else {
            Complex64::ZERO
        };
        for &x in &cycle {
            out[x] = avg;
        }
    }
    SystemFunction::new(out)
}

/// A complex-valued function on the points of a finite system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFunction {
    values: Vec<Complex64>,
}

impl SystemFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(SystemFunction { values })
    }

    pub fn constant(size: usize, c: Complex64) -> Self {
        SystemFunction {
            values: vec![c; size],
        }
    }

    pub fn indicator(size: usize, set: &[usize]) -> Self {
        let mut values = vec![Complex64::ZERO; size];
        for &x in set {
            values[x] = Complex64::ONE;
        }
        SystemFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn conjugate(&self) -> SystemFunction {
        SystemFunction {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn pointwise_multiply(&self, other: &SystemFunction) -> Result<SystemFunction> {
        other.check_len(self.len())?;
        Ok(SystemFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SystemFunction) -> Result<SystemFunction> {
        other.check_len(self.len())?;
        Ok(SystemFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Rejects any value with modulus above `1 + slack`.
    pub fn require_bounded_by_one(&self) -> Result<()> {
        for (index, v) in self.values.iter().enumerate() {
            let modulus = v.norm();
            if modulus > 1.0 + 1e-12 {
                return Err(Error::SupNormExceeded { index, modulus });
            }
        }
        Ok(())
    }

    /// From a function on `Z/NZ` (same point labels).
    pub fn from_group_function(f: &crate::cyclic::GroupFunction) -> SystemFunction {
        SystemFunction {
            values: f.values().to_vec(),
        }
    }
}
