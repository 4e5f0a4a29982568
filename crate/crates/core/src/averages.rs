//! Multiple ergodic averages on finite ergodic systems and on orbits, with
//! the finite-scale forms of the bounding inequalities.
//!
//! On a finite ergodic system every Cesàro limit is attained exactly at one
//! full period, so the limsup statements about linear, polynomial and cubic
//! averages become plain inequalities checked at `N = period`. Orbit-sourced
//! averages (nilsystems) only ever report stabilized values with their
//! Cauchy-tail diagnostics; no limit is claimed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{doubling_checkpoints, CesaroSeries};
use crate::system::{FiniteSystem, SystemFunction};

/// An integer-valued polynomial stored in the binomial basis:
/// `p(n) = sum_j c_j * C(n, j)` with integer coefficients, which is
/// integer-valued on all of `Z` by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPolynomial {
    coeffs: Vec<i64>,
}

impl IntegerPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntegerPolynomial { coeffs }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(vec![c])
    }

    /// `p(n) = a n`.
    pub fn linear(a: i64) -> Self {
        Self::new(vec![0, a])
    }

    /// `p(n) = n^2 = C(n,1) + 2 C(n,2)`.
    pub fn square() -> Self {
        Self::new(vec![0, 1, 2])
    }

    /// `p(n) = n^2 + n`.
    pub fn square_plus_n() -> Self {
        Self::new(vec![0, 2, 2])
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Direct evaluation in extended precision (reference path).
    pub fn eval(&self, n: i64) -> i128 {
        let mut total = 0i128;
        for (j, &c) in self.coeffs.iter().enumerate() {
            total += c as i128 * binomial(n, j);
        }
        total
    }

    /// `p(offset), p(offset+1), .., p(offset+count-1)` reduced mod `modulus`,
    /// generated by an incremental difference table: `O(degree)` per step
    /// and exact, since the binomial basis makes all differences integral.
    pub fn residues(&self, modulus: usize, count: usize, offset: i64) -> Vec<usize> {
        let m = modulus as i64;
        let d = self.coeffs.len();
        if d == 0 {
            return vec![0; count];
        }
        // diffs[i] = (i-th finite difference of p at the current n) mod m
        let mut diffs: Vec<i64> = (0..d)
            .map(|i| {
                let mut total = 0i128;
                for (j, &c) in self.coeffs.iter().enumerate().skip(i) {
                    total += c as i128 * binomial(offset, j - i);
                }
                (((total % m as i128) + m as i128) % m as i128) as i64
            })
            .collect();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(diffs[0] as usize);
            for i in 0..d - 1 {
                diffs[i] = (diffs[i] + diffs[i + 1]) % m;
            }
        }
        out
    }
}

/// Generalized binomial coefficient `C(n, j)` for any integer `n`, integral
/// by construction.
fn binomial(n: i64, j: usize) -> i128 {
    let mut num = 1i128;
    for i in 0..j {
        num *= n as i128 - i as i128;
    }
    let mut den = 1i128;
    for i in 1..=j {
        den *= i as i128;
    }
    num / den
}

/// A finished averaging run: checkpointed summaries plus the exact averaged
/// function at the final length.
#[derive(Debug, Clone)]
pub struct AverageRun {
    pub series: CesaroSeries,
    pub final_function: SystemFunction,
}

/// Cycle coordinates of an ergodic system: relabeled function tables where
/// the transformation becomes `j -> j+1 mod P`.
struct CycleView {
    period: usize,
    tables: Vec<Vec<Complex64>>,
    order: Vec<usize>,
}

impl CycleView {
    fn new(sys: &FiniteSystem, fs: &[SystemFunction]) -> Result<CycleView> {
        let order = sys.orbit_order()?;
        for f in fs {
            f.check_len(sys.size())?;
        }
        let tables = fs
            .iter()
            .map(|f| order.iter().map(|&x| f.values()[x]).collect())
            .collect();
        Ok(CycleView {
            period: order.len(),
            tables,
            order,
        })
    }

    /// Converts a function in cycle coordinates back to original labels.
    fn unrelabel(&self, values: Vec<Complex64>) -> SystemFunction {
        let mut out = vec![Complex64::ZERO; self.period];
        for (j, &x) in self.order.iter().enumerate() {
            out[x] = values[j];
        }
        SystemFunction::new(out).expect("averages of finite values are finite")
    }
}

fn summarize(sums: &[Complex64], count: f64) -> (Vec<Complex64>, Complex64, f64) {
    let p = sums.len() as f64;
    let avg: Vec<Complex64> = sums.iter().map(|s| s / count).collect();
    let mean = avg.iter().sum::<Complex64>() / p;
    let l2 = (avg.iter().map(|v| v.norm_sqr()).sum::<f64>() / p).sqrt();
    (avg, mean, l2)
}

fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let p = a.len() as f64;
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / p)
        .sqrt()
}

/// `(1/N) sum_(n<N) f_1(T^n x) f_2(T^(2n ) x) .. f_k(T^(kn) x)`, reported at
/// doubling checkpoints. Exact at `N = period`.
pub fn linear_average(
    sys: &FiniteSystem,
    fs: &[SystemFunction],
    n: u64,
    offset: i64,
) -> Result<AverageRun> {
    let polys: Vec<IntegerPolynomial> = (1..=fs.len() as i64)
        .map(IntegerPolynomial::linear)
        .collect();
    polynomial_average(sys, fs, &polys, n, offset)
}

/// The polynomial-times average `(1/N) sum_n prod_i f_i(T^(p_i(n)) x)`.
pub fn polynomial_average(
    sys: &FiniteSystem,
    fs: &[SystemFunction],
    polys: &[IntegerPolynomial],
    n: u64,
    offset: i64,
) -> Result<AverageRun> {
    if fs.is_empty() || fs.len() != polys.len() {
        return Err(Error::FamilySize {
            expected: polys.len().max(1),
            got: fs.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("averaging length must be positive".into()));
    }
    let view = CycleView::new(sys, fs)?;
    let p = view.period;
    let residues: Vec<Vec<usize>> = polys
        .iter()
        .map(|poly| poly.residues(p, n as usize, offset))
        .collect();

    let checkpoints = doubling_checkpoints(n);
    let mut sums = vec![Complex64::ZERO; p];
    let mut means = Vec::new();
    let mut l2s = Vec::new();
    let mut deltas = Vec::new();
    let mut prev_avg: Option<Vec<Complex64>> = None;
    let mut step = 0usize;
    let mut final_avg = Vec::new();
    for &c in &checkpoints {
        while (step as u64) < c {
            for (start, sum) in sums.iter_mut().enumerate() {
                let mut prod = Complex64::ONE;
                for (table, res) in view.tables.iter().zip(&residues) {
                    let idx = start + res[step];
                    let idx = if idx >= p { idx % p } else { idx };
                    prod *= table[idx];
                }
                *sum += prod;
            }
            step += 1;
        }
        let (avg, mean, l2) = summarize(&sums, c as f64);
        if let Some(prev) = &prev_avg {
            deltas.push(l2_distance(&avg, prev));
        }
        means.push(mean);
        l2s.push(l2);
        prev_avg = Some(avg.clone());
        final_avg = avg;
    }
    Ok(AverageRun {
        series: CesaroSeries::from_function_summaries(checkpoints, means, l2s, deltas),
        final_function: view.unrelabel(final_avg),
    })
}

/// `(1/N^k) sum_(n in {0..N-1}^k) prod_(eps != 0) f_eps(T^(n . eps) x)`.
/// The family is indexed by the nonzero vertices: entry `v - 1` carries the
/// function at vertex `v`.
pub fn cubic_average(
    sys: &FiniteSystem,
    family: &[SystemFunction],
    n: u64,
    offset: i64,
) -> Result<AverageRun> {
    let k = vertex_order(family.len())?;
    if n == 0 {
        return Err(Error::InvalidInput("averaging length must be positive".into()));
    }
    let view = CycleView::new(sys, family)?;
    let p = view.period;

    let checkpoints = doubling_checkpoints(n);
    let mut means = Vec::new();
    let mut l2s = Vec::new();
    let mut deltas = Vec::new();
    let mut prev_avg: Option<Vec<Complex64>> = None;
    let mut final_avg = Vec::new();
    for &c in &checkpoints {
        let mut sums = vec![Complex64::ZERO; p];
        let mut grid = vec![0u64; k as usize];
        loop {
            // shifts n . eps mod p for each nonzero vertex
            let shifts: Vec<usize> = (1..1usize << k)
                .map(|v| {
                    let mut e = 0u64;
                    for (i, &g) in grid.iter().enumerate() {
                        if (v >> i) & 1 == 1 {
                            e += g;
                        }
                    }
                    ((e as i64 + offset).rem_euclid(p as i64)) as usize
                })
                .collect();
            for (start, sum) in sums.iter_mut().enumerate() {
                let mut prod = Complex64::ONE;
                for (table, &s) in view.tables.iter().zip(&shifts) {
                    let idx = start + s;
                    let idx = if idx >= p { idx - p } else { idx };
                    prod *= table[idx];
                }
                *sum += prod;
            }
            let mut carry = 0;
            while carry < grid.len() {
                grid[carry] += 1;
                if grid[carry] < c {
                    break;
                }
                grid[carry] = 0;
                carry += 1;
            }
            if carry == grid.len() {
                break;
            }
        }
        let count = (c as f64).powi(k as i32);
        let (avg, mean, l2) = summarize(&sums, count);
        if let Some(prev) = &prev_avg {
            deltas.push(l2_distance(&avg, prev));
        }
        means.push(mean);
        l2s.push(l2);
        prev_avg = Some(avg.clone());
        final_avg = avg;
    }
    Ok(AverageRun {
        series: CesaroSeries::from_function_summaries(checkpoints, means, l2s, deltas),
        final_function: view.unrelabel(final_avg),
    })
}

/// Orbit-sourced linear multiple average: the scalar sequence
/// `(1/N) sum_(n<N) prod_i f_i(T^((i+1) n) x)` at doubling checkpoints.
/// One cursor per slot advances `i+1` steps per increment of `n`, so the
/// whole run is a single forward pass.
pub fn linear_average_orbit<P, S, F>(
    start: &P,
    step: S,
    observables: &[F],
    n: u64,
) -> Result<CesaroSeries>
where
    P: Clone,
    S: Fn(&P) -> P,
    F: Fn(&P) -> Complex64,
{
    if observables.is_empty() {
        return Err(Error::FamilySize {
            expected: 1,
            got: 0,
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("averaging length must be positive".into()));
    }
    let checkpoints = doubling_checkpoints(n);
    let mut cursors: Vec<P> = vec![start.clone(); observables.len()];
    let mut sum = Complex64::ZERO;
    let mut count = 0u64;
    let mut values = Vec::with_capacity(checkpoints.len());
    for &c in &checkpoints {
        while count < c {
            let mut prod = Complex64::ONE;
            for (obs, cursor) in observables.iter().zip(&cursors) {
                prod *= obs(cursor);
            }
            sum += prod;
            for (i, cursor) in cursors.iter_mut().enumerate() {
                for _ in 0..=i {
                    *cursor = step(cursor);
                }
            }
            count += 1;
        }
        values.push(sum / c as f64);
    }
    Ok(CesaroSeries::from_scalars(checkpoints, values))
}

fn vertex_order(family_len: usize) -> Result<u32> {
    let total = family_len + 1;
    if family_len == 0 || !total.is_power_of_two() {
        return Err(Error::FamilySize {
            expected: if family_len < 3 { 3 } else { 7 },
            got: family_len,
        });
    }
    Ok(total.trailing_zeros())
}

fn require_bounded(fs: &[SystemFunction]) -> Result<()> {
    for f in fs {
        f.require_bounded_by_one()?;
    }
    Ok(())
}

/// Full-period progression bound: `min_l (l * ||f_l||_k) - ||A_P||_(L^2)`,
/// nonnegative up to rounding. All inputs bounded by 1.
pub fn semiprog_bound_check(sys: &FiniteSystem, fs: &[SystemFunction]) -> Result<f64> {
    require_bounded(fs)?;
    let p = sys.period()? as u64;
    let k = fs.len() as u32;
    let run = linear_average(sys, fs, p, 0)?;
    let avg_norm = sys.l2_norm(&run.final_function)?;
    let mut bound = f64::INFINITY;
    for (i, f) in fs.iter().enumerate() {
        let norm = crate::cube::seminorm_recursive(sys, f, k)?;
        bound = bound.min((i as f64 + 1.0) * norm);
    }
    Ok(bound - avg_norm)
}

/// Full-period cubic bound: `min_eps ||f_eps||_k - ||cubic A_P||_(L^2)`.
pub fn cubic_bound_check(sys: &FiniteSystem, family: &[SystemFunction]) -> Result<f64> {
    require_bounded(family)?;
    let k = vertex_order(family.len())?;
    let p = sys.period()? as u64;
    let run = cubic_average(sys, family, p, 0)?;
    let avg_norm = sys.l2_norm(&run.final_function)?;
    let mut bound = f64::INFINITY;
    for f in family {
        bound = bound.min(crate::cube::seminorm_recursive(sys, f, k)?);
    }
    Ok(bound - avg_norm)
}

/// Full-period cubic recurrence: the averaged measure of
/// `intersect_eps T^(n.eps) A` minus `mu(A)^(2^k)`; nonnegative up to
/// rounding.
pub fn cubic_recurrence_check(sys: &FiniteSystem, set: &[usize], k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    let order = sys.orbit_order()?;
    let p = order.len();
    let mut member = vec![false; p];
    for (j, &x) in order.iter().enumerate() {
        if set.contains(&x) {
            member[j] = true;
        }
    }
    let density = member.iter().filter(|&&b| b).count() as f64 / p as f64;

    let vertices = 1usize << k;
    let mut total = 0.0f64;
    let mut grid = vec![0usize; k as usize];
    loop {
        let mut count = 0usize;
        'point: for z in 0..p {
            for v in 0..vertices {
                let mut idx = z;
                for (i, &g) in grid.iter().enumerate() {
                    if (v >> i) & 1 == 1 {
                        idx += g;
                    }
                }
                if !member[idx % p] {
                    continue 'point;
                }
            }
            count += 1;
        }
        total += count as f64 / p as f64;
        let mut carry = 0;
        while carry < grid.len() {
            grid[carry] += 1;
            if grid[carry] < p {
                break;
            }
            grid[carry] = 0;
            carry += 1;
        }
        if carry == grid.len() {
            break;
        }
    }
    let average = total / (p as f64).powi(k as i32);
    Ok(average - density.powi(vertices as i32))
}

/// Finite-period van der Corput gap for a periodic sequence of vectors with
/// norms at most 1:
/// `(1/P) sum_h |(1/P) sum_n <xi_n, xi_(n+h)>| - ||(1/P) sum_n xi_n||^2`.
/// Nonnegative up to rounding; exact for periodic sequences.
pub fn vdc_finite(vectors: &[Vec<Complex64>]) -> Result<f64> {
    let p = vectors.len();
    if p == 0 {
        return Err(Error::InvalidInput("empty sequence".into()));
    }
    let dim = vectors[0].len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::SupNormExceeded {
                index,
                modulus: norm,
            });
        }
    }
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    let mut lhs = 0.0;
    for h in 0..p {
        let mut corr = Complex64::ZERO;
        for n in 0..p {
            corr += inner(&vectors[n], &vectors[(n + h) % p]);
        }
        lhs += (corr / p as f64).norm();
    }
    lhs /= p as f64;

    let mut mean = vec![Complex64::ZERO; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let mean_norm_sqr: f64 = mean.iter().map(|z| (z / p as f64).norm_sqr()).sum();
    Ok(lhs - mean_norm_sqr)
}

/// Replacing one slot of a linear average by a projected function moves the
/// average by at most the slot index times the seminorm of the difference:
/// returns `l * ||f_l - g||_k - ||A(f_1..f_k) - A(.., g, ..)||_(L^2)`,
/// nonnegative up to rounding (`l` is the 1-based slot index).
pub fn characteristic_projection_gap(
    sys: &FiniteSystem,
    fs: &[SystemFunction],
    slot: usize,
    replacement: &SystemFunction,
) -> Result<f64> {
    require_bounded(fs)?;
    replacement.require_bounded_by_one()?;
    if slot >= fs.len() {
        return Err(Error::InvalidInput(format!(
            "slot {} out of range for {} functions",
            slot,
            fs.len()
        )));
    }
    let p = sys.period()? as u64;
    let k = fs.len() as u32;
    let base = linear_average(sys, fs, p, 0)?;
    let mut replaced = fs.to_vec();
    replaced[slot] = replacement.clone();
    let other = linear_average(sys, &replaced, p, 0)?;
    let diff = base.final_function.sub(&other.final_function)?;
    let moved = sys.l2_norm(&diff)?;
    let residual = fs[slot].sub(replacement)?;
    let norm = crate::cube::seminorm_recursive(sys, &residual, k)?;
    Ok((slot as f64 + 1.0) * norm - moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::CyclicGroup;
    use crate::sampling;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rotation(n: usize) -> FiniteSystem {
        FiniteSystem::cyclic_rotation(n).unwrap()
    }

    fn character(n: usize, freq: i64) -> SystemFunction {
        SystemFunction::from_group_function(&CyclicGroup::new(n).unwrap().character(freq))
    }

    #[test]
    fn polynomial_evaluation_and_residues_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let coeffs: Vec<i64> = (0..rng.random_range(1usize..=5))
                .map(|_| rng.random_range(-20i64..=20))
                .collect();
            let p = IntegerPolynomial::new(coeffs);
            let modulus = rng.random_range(2usize..=17);
            let offset = rng.random_range(-30i64..=30);
            let fast = p.residues(modulus, 40, offset);
            for (i, &r) in fast.iter().enumerate() {
                let direct = p.eval(offset + i as i64).rem_euclid(modulus as i128);
                assert_eq!(r as i128, direct, "poly {:?} at {}", p, offset + i as i64);
            }
        }
    }

    #[test]
    fn square_preset_is_n_squared() {
        let p = IntegerPolynomial::square();
        for n in -10i64..=10 {
            assert_eq!(p.eval(n), (n * n) as i128);
        }
        let q = IntegerPolynomial::square_plus_n();
        for n in -10i64..=10 {
            assert_eq!(q.eval(n), (n * n + n) as i128);
        }
    }

    #[test]
    fn degree_one_average_is_the_mean_at_full_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = rotation(7);
        let f = sampling::bounded_system_function(&mut rng, 7);
        let run = linear_average(&sys, std::slice::from_ref(&f), 7, 0).unwrap();
        let mean = sys.mean(&f).unwrap();
        for v in run.final_function.values() {
            assert!((v - mean).norm() < 1e-12);
        }
    }

    #[test]
    fn character_pair_average_vanishes_pointwise() {
        // (1/5) sum_n chi(x+n) chi(x+2n) carries the nonzero frequency 3n
        let sys = rotation(5);
        let chi = character(5, 1);
        let run = linear_average(&sys, &[chi.clone(), chi.clone()], 5, 0).unwrap();
        for v in run.final_function.values() {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn all_ones_average_is_one() {
        let sys = rotation(6);
        let one = SystemFunction::constant(6, Complex64::ONE);
        let run = linear_average(&sys, &[one.clone(), one.clone(), one], 6, 0).unwrap();
        assert!((run.series.final_value() - Complex64::ONE).norm() < 1e-12);
        assert!((run.series.final_l2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_polynomials_freeze_the_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = rotation(8);
        let f = sampling::bounded_system_function(&mut rng, 8);
        let g = sampling::bounded_system_function(&mut rng, 8);
        let polys = vec![IntegerPolynomial::constant(0), IntegerPolynomial::constant(0)];
        let run = polynomial_average(&sys, &[f.clone(), g.clone()], &polys, 16, 0).unwrap();
        let expected = f.pointwise_multiply(&g).unwrap();
        for (a, b) in run.final_function.values().iter().zip(expected.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_character_average_matches_direct_summation() {
        let n = 5usize;
        let sys = rotation(n);
        let chi = character(n, 1);
        let run = polynomial_average(&sys, std::slice::from_ref(&chi), &[IntegerPolynomial::square()], n as u64, 0)
            .unwrap();
        // direct oracle: (1/5) sum_n chi(x + n^2)
        for x in 0..n {
            let direct: Complex64 = (0..n)
                .map(|m| chi.values()[(x + m * m) % n])
                .sum::<Complex64>()
                / n as f64;
            assert!((run.final_function.values()[x] - direct).norm() < 1e-12);
        }
        // Gauss-sum modulus: |avg| = sqrt(5)/5 at every point
        let expected = (n as f64).sqrt() / n as f64;
        for v in run.final_function.values() {
            assert!((v.norm() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_polynomials_reproduce_linear_average_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sys = rotation(9);
        let fs: Vec<SystemFunction> = (0..3)
            .map(|_| sampling::bounded_system_function(&mut rng, 9))
            .collect();
        let polys: Vec<IntegerPolynomial> =
            (1..=3).map(|i| IntegerPolynomial::linear(i as i64)).collect();
        let a = linear_average(&sys, &fs, 20, 0).unwrap();
        let b = polynomial_average(&sys, &fs, &polys, 20, 0).unwrap();
        assert_eq!(a.final_function, b.final_function);
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn interval_offset_shifts_the_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sys = rotation(7);
        let f = sampling::bounded_system_function(&mut rng, 7);
        // full-period average is offset-invariant
        let a = linear_average(&sys, std::slice::from_ref(&f), 7, 0).unwrap();
        let b = linear_average(&sys, std::slice::from_ref(&f), 7, 3).unwrap();
        for (x, y) in a.final_function.values().iter().zip(b.final_function.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn cubic_all_ones_is_one() {
        let sys = rotation(4);
        let one = SystemFunction::constant(4, Complex64::ONE);
        let run = cubic_average(&sys, &[one.clone(), one.clone(), one], 4, 0).unwrap();
        assert!((run.series.final_value() - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn cubic_matches_two_dimensional_form() {
        // (1/N^2) sum_(m,n) f(T^m x) g(T^n x) h(T^(m+n) x)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6usize;
        let sys = rotation(n);
        let f = sampling::bounded_system_function(&mut rng, n);
        let g = sampling::bounded_system_function(&mut rng, n);
        let h = sampling::bounded_system_function(&mut rng, n);
        let run = cubic_average(&sys, &[f.clone(), g.clone(), h.clone()], n as u64, 0).unwrap();
        for x in 0..n {
            let mut direct = Complex64::ZERO;
            for m in 0..n {
                for nn in 0..n {
                    direct += f.values()[(x + m) % n]
                        * g.values()[(x + nn) % n]
                        * h.values()[(x + m + nn) % n];
                }
            }
            direct /= (n * n) as f64;
            assert!((run.final_function.values()[x] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn cubic_integral_matches_cube_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 5usize;
        let sys = rotation(n);
        let family: Vec<SystemFunction> = (0..3)
            .map(|_| sampling::bounded_system_function(&mut rng, n))
            .collect();
        let run = cubic_average(&sys, &family, n as u64, 0).unwrap();
        let integral = sys.mean(&run.final_function).unwrap();
        let measure = crate::cube::build_cube_measure(&sys, 2, &crate::Budget::default()).unwrap();
        let mut completed = vec![SystemFunction::constant(n, Complex64::ONE)];
        completed.extend(family.iter().cloned());
        let joined = measure.integrate(&completed).unwrap();
        assert!(
            (integral - joined).norm() < 1e-10,
            "integral={} joined={}",
            integral,
            joined
        );
    }

    #[test]
    fn semiprog_equality_for_constants() {
        let sys = rotation(8);
        let one = SystemFunction::constant(8, Complex64::ONE);
        let gap = semiprog_bound_check(&sys, &[one.clone(), one]).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn semiprog_on_random_sign_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = CyclicGroup::new(16).unwrap();
        let sys = rotation(16);
        for k in 2..=3usize {
            for _ in 0..10 {
                let fs: Vec<SystemFunction> = (0..k)
                    .map(|_| {
                        SystemFunction::from_group_function(&sampling::pm_one_function(&mut rng, g))
                    })
                    .collect();
                let gap = semiprog_bound_check(&sys, &fs).unwrap();
                assert!(gap >= -1e-9, "k={} gap={}", k, gap);
            }
        }
    }

    #[test]
    fn semiprog_zero_mean_character_kills_the_average() {
        let sys = rotation(9);
        let chi = character(9, 2);
        let run = linear_average(&sys, std::slice::from_ref(&chi), 9, 0).unwrap();
        assert!(sys.l2_norm(&run.final_function).unwrap() < 1e-12);
        let gap = semiprog_bound_check(&sys, &[chi]).unwrap();
        assert!(gap.abs() < 1e-9);
    }

    #[test]
    fn semiprog_rejects_unbounded_input() {
        let sys = rotation(4);
        let two = SystemFunction::constant(4, Complex64::new(2.0, 0.0));
        assert!(matches!(
            semiprog_bound_check(&sys, &[two]),
            Err(Error::SupNormExceeded { .. })
        ));
    }

    #[test]
    fn cubic_bound_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sys = rotation(8);
        for _ in 0..10 {
            let family: Vec<SystemFunction> = (0..3)
                .map(|_| sampling::bounded_system_function(&mut rng, 8))
                .collect();
            let gap = cubic_bound_check(&sys, &family).unwrap();
            assert!(gap >= -1e-9, "gap={}", gap);
        }
        let one = SystemFunction::constant(8, Complex64::ONE);
        let equality = cubic_bound_check(&sys, &[one.clone(), one.clone(), one]).unwrap();
        assert!(equality.abs() < 1e-12);
        // a zero-mean character at k=1 cancels over the full period, so both
        // sides vanish
        let chi = character(8, 3);
        let zero_case = cubic_bound_check(&sys, std::slice::from_ref(&chi)).unwrap();
        assert!(zero_case.abs() < 1e-9);
    }

    #[test]
    fn cubic_recurrence_even_residues() {
        // A = {0,2} in Z/4: averaged intersection measure is 1/8, the
        // density bound is 1/16, so the gap is exactly 1/16.
        let sys = rotation(4);
        let gap = cubic_recurrence_check(&sys, &[0, 2], 2).unwrap();
        assert!((gap - 1.0 / 16.0).abs() < 1e-12);
        let whole = cubic_recurrence_check(&sys, &[0, 1, 2, 3], 2).unwrap();
        assert!(whole.abs() < 1e-12);
    }

    #[test]
    fn cubic_recurrence_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.random_range(3usize..=12);
            let sys = rotation(n);
            let set = sampling::random_subset(&mut rng, n, 0.5);
            let gap = cubic_recurrence_check(&sys, &set, 2).unwrap();
            assert!(gap >= -1e-9, "N={} set={:?} gap={}", n, set, gap);
        }
    }

    #[test]
    fn vdc_constant_sequence_is_tight() {
        let v = vec![Complex64::new(0.6, 0.8)];
        let gap = vdc_finite(&vec![v; 10]).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn vdc_on_rotating_unit_vectors() {
        // xi_n = n-th root of unity in C^1: the averaged autocorrelations
        // all have modulus 1 while the mean vanishes.
        let p = 8usize;
        let vectors: Vec<Vec<Complex64>> = (0..p)
            .map(|n| {
                let theta = std::f64::consts::TAU * n as f64 / p as f64;
                vec![Complex64::new(theta.cos(), theta.sin())]
            })
            .collect();
        let gap = vdc_finite(&vectors).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vdc_random_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let p = rng.random_range(2usize..=32);
            let dim = rng.random_range(1usize..=4);
            let vectors: Vec<Vec<Complex64>> = (0..p)
                .map(|_| {
                    let mut v: Vec<Complex64> =
                        (0..dim).map(|_| sampling::complex_box(&mut rng)).collect();
                    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if norm > 1.0 {
                        for z in v.iter_mut() {
                            *z /= norm;
                        }
                    }
                    v
                })
                .collect();
            let gap = vdc_finite(&vectors).unwrap();
            assert!(gap >= -1e-9, "gap={}", gap);
        }
        let too_big = vec![vec![Complex64::new(2.0, 0.0)]];
        assert!(matches!(
            vdc_finite(&too_big),
            Err(Error::SupNormExceeded { .. })
        ));
    }

    #[test]
    fn projection_by_identity_moves_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sys = rotation(8);
        let fs: Vec<SystemFunction> = (0..2)
            .map(|_| sampling::bounded_system_function(&mut rng, 8))
            .collect();
        let gap = characteristic_projection_gap(&sys, &fs, 1, &fs[1]).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn projection_to_the_mean_obeys_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let sys = rotation(8);
        for slot in 0..2usize {
            for _ in 0..10 {
                let fs: Vec<SystemFunction> = (0..2)
                    .map(|_| sampling::bounded_system_function(&mut rng, 8))
                    .collect();
                let mean = sys.mean(&fs[slot]).unwrap();
                let proj = SystemFunction::constant(8, mean);
                let gap = characteristic_projection_gap(&sys, &fs, slot, &proj).unwrap();
                assert!(gap >= -1e-9, "slot={} gap={}", slot, gap);
            }
        }
    }

    #[test]
    fn projection_zero_mean_character_bound() {
        let sys = rotation(9);
        let chi = character(9, 4);
        let zero = SystemFunction::constant(9, Complex64::ZERO);
        // difference is the full average itself, bounded by 1 * ||chi||_1
        let gap = characteristic_projection_gap(&sys, &[chi], 0, &zero).unwrap();
        assert!(gap >= -1e-9);
    }
}
