//! The progression-counting form on `Z/NZ`, arithmetic-progression counts
//! in subsets, and the generalized von Neumann bound.
//!
//! Progressions here wrap modulo N (the group-theoretic convention). Counts
//! of genuine, non-wrapping progressions inside `{0, .., N-1}` are a separate
//! statistic ([`count_aps_interval`]), since the finite combinatorial
//! statement lives on an interval rather than the cyclic group.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::cyclic::{CyclicGroup, GroupFunction};
use crate::error::{Error, Result};
use crate::gowers;

/// The multilinear counting form of length `ell`: one function per position.
#[derive(Debug, Clone)]
pub struct ProgressionForm {
    functions: Vec<GroupFunction>,
}

impl ProgressionForm {
    pub fn new(functions: Vec<GroupFunction>) -> Result<Self> {
        if functions.len() < 2 {
            return Err(Error::ShortProgression);
        }
        let group = functions[0].group();
        for f in &functions[1..] {
            if f.group() != group {
                return Err(Error::GroupMismatch {
                    left: group.order(),
                    right: f.group().order(),
                });
            }
        }
        Ok(ProgressionForm { functions })
    }

    pub fn diagonal(f: &GroupFunction, ell: usize) -> Result<Self> {
        Self::new(vec![f.clone(); ell])
    }

    pub fn ell(&self) -> usize {
        self.functions.len()
    }

    pub fn group(&self) -> CyclicGroup {
        self.functions[0].group()
    }

    pub fn functions(&self) -> &[GroupFunction] {
        &self.functions
    }
}

/// `(1/N^2) sum_(x,y) prod_i f_i(x + i*y)` by direct `O(N^2 * ell)` summation.
pub fn ap_form(form: &ProgressionForm) -> Complex64 {
    let n = form.group().order();
    let ell = form.ell();
    let tables: Vec<&[Complex64]> = form.functions.iter().map(|f| f.values()).collect();
    let mut total = Complex64::ZERO;
    for x in 0..n {
        for y in 0..n {
            let mut prod = tables[0][x];
            let mut point = x;
            for table in tables.iter().take(ell).skip(1) {
                point += y;
                if point >= n {
                    point -= n;
                }
                prod *= table[point];
            }
            total += prod;
        }
    }
    total / (n * n) as f64
}

/// Fast path for length 3: `sum_xi f0^(xi) f1^(-2 xi) f2^(xi)`.
pub fn ap_form_fft3(
    f0: &GroupFunction,
    f1: &GroupFunction,
    f2: &GroupFunction,
) -> Result<Complex64> {
    let form = ProgressionForm::new(vec![f0.clone(), f1.clone(), f2.clone()])?;
    let group = form.group();
    let n = group.order() as i64;
    let h0 = f0.fourier_transform();
    let h1 = f1.fourier_transform();
    let h2 = f2.fourier_transform();
    // With the 1/N forward convention the two grid averages cancel the
    // normalization exactly: no further scaling.
    let mut total = Complex64::ZERO;
    for xi in 0..n {
        total += h0.coefficient(xi) * h1.coefficient(-2 * xi) * h2.coefficient(xi);
    }
    Ok(total)
}

/// Counting report for progressions of length `ell` inside a subset.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct APReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell: usize,
    pub set_size: usize,
    /// Cyclic progressions `(a, d)` with `d != 0` fully inside the set.
    pub nondegenerate_count: u64,
    /// Same count including the degenerate `d = 0` progressions; equals
    /// `N^2` times the counting form on the indicator function.
    pub inclusive_count: u64,
    pub lambda_value: f64,
}

/// Exhaustive cyclic count over all `(a, d)` pairs.
pub fn count_aps(group: CyclicGroup, set: &[i64], ell: usize) -> Result<APReport> {
    if ell < 2 {
        return Err(Error::ShortProgression);
    }
    let n = group.order();
    let mut member = vec![false; n];
    for &x in set {
        member[group.reduce(x)] = true;
    }
    let set_size = member.iter().filter(|&&b| b).count();

    let mut nondegenerate = 0u64;
    for a in 0..n {
        if !member[a] {
            continue;
        }
        'd: for d in 1..n {
            let mut point = a;
            for _ in 1..ell {
                point = group.add(point, d);
                if !member[point] {
                    continue 'd;
                }
            }
            nondegenerate += 1;
        }
    }

    let indicator_points: Vec<i64> = (0..n as i64).filter(|&x| member[x as usize]).collect();
    let indicator = GroupFunction::indicator(group, &indicator_points);
    let lambda = ap_form(&ProgressionForm::diagonal(&indicator, ell)?);
    debug_assert!(lambda.im.abs() < 1e-9);
    let inclusive_real = lambda.re * (n * n) as f64;
    let inclusive_count = inclusive_real.round();
    if (inclusive_real - inclusive_count).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "inclusive count {} did not round to an integer",
            inclusive_real
        )));
    }
    debug_assert_eq!(inclusive_count as u64, nondegenerate + set_size as u64);

    Ok(APReport {
        n,
        ell,
        set_size,
        nondegenerate_count: nondegenerate,
        inclusive_count: inclusive_count as u64,
        lambda_value: lambda.re,
    })
}

/// Non-wrapping progressions inside the interval `{0, .., N-1}`:
/// `a + (ell-1) d <= N-1`, `d >= 1`. A separate statistic from the cyclic
/// count; reported alongside it, never mixed.
pub fn count_aps_interval(group: CyclicGroup, set: &[i64], ell: usize) -> Result<u64> {
    if ell < 2 {
        return Err(Error::ShortProgression);
    }
    let n = group.order();
    let mut member = vec![false; n];
    for &x in set {
        member[group.reduce(x)] = true;
    }
    let mut count = 0u64;
    for a in 0..n {
        if !member[a] {
            continue;
        }
        'd: for d in 1..n {
            if a + (ell - 1) * d >= n {
                break;
            }
            for j in 1..ell {
                if !member[a + j * d] {
                    continue 'd;
                }
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Generalized von Neumann gap: `min_i ||f_i||_(ell-1) - |Lambda(f_0..)|`.
/// All inputs must be bounded by 1 in modulus; the result is nonnegative up
/// to rounding (`>= -1e-9`).
pub fn von_neumann_gap(form: &ProgressionForm, budget: &Budget) -> Result<f64> {
    for f in form.functions() {
        for (index, v) in f.values().iter().enumerate() {
            let modulus = v.norm();
            if modulus > 1.0 + 1e-12 {
                return Err(Error::SupNormExceeded { index, modulus });
            }
        }
    }
    let k = (form.ell() - 1) as u32;
    let mut min_norm = f64::INFINITY;
    for f in form.functions() {
        let norm = if k == 0 {
            f.sup_norm()
        } else {
            gowers_norm_recursive_or_closed(f, k, budget)?
        };
        min_norm = min_norm.min(norm);
    }
    Ok(min_norm - ap_form(form).norm())
}

fn gowers_norm_recursive_or_closed(f: &GroupFunction, k: u32, _budget: &Budget) -> Result<f64> {
    gowers::gowers_norm_recursive(f, k)
}

/// Splits `f` into its mean and the zero-mean remainder.
pub fn mean_uniform_split(f: &GroupFunction) -> (Complex64, GroupFunction) {
    let m = f.mean();
    let uniform = f
        .sub(&GroupFunction::constant(f.group(), m))
        .expect("same group by construction");
    (m, uniform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn group(n: usize) -> CyclicGroup {
        CyclicGroup::new(n).unwrap()
    }

    #[test]
    fn constant_form_is_one() {
        let one = GroupFunction::constant(group(7), Complex64::ONE);
        let form = ProgressionForm::diagonal(&one, 4).unwrap();
        assert!((ap_form(&form) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn point_indicator_on_z5() {
        // Enumerating the 25 pairs (x, y): only (0, 0) keeps all three
        // points at 0, so the form is 1/25.
        let f = GroupFunction::indicator(group(5), &[0]);
        let form = ProgressionForm::diagonal(&f, 3).unwrap();
        let v = ap_form(&form);
        assert!((v.re - 1.0 / 25.0).abs() < 1e-12 && v.im.abs() < 1e-14);
    }

    #[test]
    fn even_residues_on_z4() {
        // x in {0,2} and even y keep the whole progression inside the set:
        // 4 of the 16 pairs contribute.
        let f = GroupFunction::indicator(group(4), &[0, 2]);
        let form = ProgressionForm::diagonal(&f, 3).unwrap();
        let v = ap_form(&form);
        assert!((v.re - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fft3_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = rng.random_range(2usize..=128);
            let g = group(n);
            let f0 = sampling::random_function(&mut rng, g);
            let f1 = sampling::random_function(&mut rng, g);
            let f2 = sampling::random_function(&mut rng, g);
            let direct = ap_form(&ProgressionForm::new(vec![f0.clone(), f1.clone(), f2.clone()]).unwrap());
            let fast = ap_form_fft3(&f0, &f1, &f2).unwrap();
            assert!(
                (direct - fast).norm() < 1e-9,
                "N={} direct={} fast={}",
                n,
                direct,
                fast
            );
        }
    }

    #[test]
    fn fft3_character_orthogonality() {
        let g = group(16);
        let f0 = g.character(3);
        let one = GroupFunction::constant(g, Complex64::ONE);
        let v = ap_form_fft3(&f0, &one, &one).unwrap();
        assert!(v.norm() < 1e-10);
        let all_ones = ap_form_fft3(&one, &one, &one).unwrap();
        assert!((all_ones - Complex64::ONE).norm() < 1e-10);
    }

    #[test]
    fn full_set_counts() {
        let g = group(9);
        let all: Vec<i64> = (0..9).collect();
        for ell in 2..=4 {
            let report = count_aps(g, &all, ell).unwrap();
            assert_eq!(report.nondegenerate_count, 9 * 8);
            assert_eq!(report.inclusive_count, 81);
            assert!((report.lambda_value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_has_no_nondegenerate_progressions() {
        let report = count_aps(group(7), &[0], 3).unwrap();
        assert_eq!(report.nondegenerate_count, 0);
        assert_eq!(report.inclusive_count, 1);
    }

    #[test]
    fn even_residues_report_on_z4() {
        let report = count_aps(group(4), &[0, 2], 3).unwrap();
        assert_eq!(report.nondegenerate_count, 2);
        assert_eq!(report.inclusive_count, 4);
        assert!((report.lambda_value - 0.25).abs() < 1e-12);
        // The interval statistic differs: 0,2,4 leaves the interval.
        assert_eq!(count_aps_interval(group(4), &[0, 2], 3).unwrap(), 0);
        assert_eq!(count_aps_interval(group(5), &[0, 2, 4], 3).unwrap(), 1);
    }

    #[test]
    fn inclusive_identity_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let n = rng.random_range(3usize..=40);
            let set: Vec<i64> = sampling::random_subset(&mut rng, n, 0.4)
                .into_iter()
                .map(|x| x as i64)
                .collect();
            let ell = rng.random_range(2usize..=4);
            let report = count_aps(group(n), &set, ell).unwrap();
            let lambda_scaled = report.lambda_value * (n * n) as f64;
            assert!((lambda_scaled - report.inclusive_count as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn report_serializes_with_stable_fields() {
        let report = count_aps(group(4), &[0, 2], 3).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["N"], 4);
        assert_eq!(json["ell"], 3);
        assert_eq!(json["set_size"], 2);
        assert_eq!(json["nondegenerate_count"], 2);
        assert_eq!(json["inclusive_count"], 4);
    }

    #[test]
    fn von_neumann_gap_zero_for_constants() {
        let one = GroupFunction::constant(group(8), Complex64::ONE);
        let form = ProgressionForm::diagonal(&one, 3).unwrap();
        let gap = von_neumann_gap(&form, &Budget::default()).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn von_neumann_gap_on_random_sign_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let g = group(16);
            let fns: Vec<GroupFunction> =
                (0..3).map(|_| sampling::pm_one_function(&mut rng, g)).collect();
            let form = ProgressionForm::new(fns).unwrap();
            let gap = von_neumann_gap(&form, &Budget::default()).unwrap();
            assert!(gap >= -1e-9, "gap {}", gap);
        }
    }

    #[test]
    fn von_neumann_character_slot_kills_the_form() {
        let g = group(11);
        let chi = g.character(4);
        let one = GroupFunction::constant(g, Complex64::ONE);
        let form = ProgressionForm::new(vec![chi, one.clone(), one]).unwrap();
        let lambda = ap_form(&form);
        assert!(lambda.norm() < 1e-12);
        let gap = von_neumann_gap(&form, &Budget::default()).unwrap();
        assert!(gap >= -1e-9);
    }

    #[test]
    fn von_neumann_rejects_unbounded_inputs() {
        let g = group(6);
        let big = GroupFunction::constant(g, Complex64::new(1.5, 0.0));
        let form = ProgressionForm::diagonal(&big, 3).unwrap();
        assert!(matches!(
            von_neumann_gap(&form, &Budget::default()),
            Err(Error::SupNormExceeded { .. })
        ));
    }

    #[test]
    fn split_parts() {
        let f = GroupFunction::indicator(group(8), &[0, 1, 2, 3]);
        let (mean, uniform) = mean_uniform_split(&f);
        assert!((mean - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(uniform.mean().norm() < 1e-12);
        for v in uniform.values() {
            assert!((v.re.abs() - 0.5).abs() < 1e-12);
        }
        let c = GroupFunction::constant(group(8), Complex64::new(0.25, -1.0));
        let (cm, cu) = mean_uniform_split(&c);
        assert!((cm - Complex64::new(0.25, -1.0)).norm() < 1e-12);
        assert!(cu.sup_norm() < 1e-12);
    }

    #[test]
    fn form_is_multilinear_under_the_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = group(12);
        let f = sampling::random_function(&mut rng, g);
        let (mean, uniform) = mean_uniform_split(&f);
        let mean_fn = GroupFunction::constant(g, mean);
        let direct = ap_form(&ProgressionForm::diagonal(&f, 3).unwrap());
        let mut expanded = Complex64::ZERO;
        for mask in 0..8u32 {
            let pick = |bit: u32| {
                if mask >> bit & 1 == 1 {
                    uniform.clone()
                } else {
                    mean_fn.clone()
                }
            };
            expanded += ap_form(&ProgressionForm::new(vec![pick(0), pick(1), pick(2)]).unwrap());
        }
        assert!((direct - expanded).norm() < 1e-9);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn multilinear_in_each_slot(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(3usize..=16);
            let g = group(n);
            let a = sampling::random_function(&mut rng, g);
            let b = sampling::random_function(&mut rng, g);
            let c = sampling::random_function(&mut rng, g);
            let d = sampling::random_function(&mut rng, g);
            let alpha = sampling::complex_box(&mut rng);
            // slot 1 linearity: Lambda(a, b + alpha*d, c)
            let combo = b.add(&d.scale(alpha)).unwrap();
            let lhs = ap_form(&ProgressionForm::new(vec![a.clone(), combo, c.clone()]).unwrap());
            let rhs = ap_form(&ProgressionForm::new(vec![a.clone(), b, c.clone()]).unwrap())
                + alpha * ap_form(&ProgressionForm::new(vec![a, d, c]).unwrap());
            proptest::prop_assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
