//! Uniformity norms on `Z/NZ` along three independent evaluation paths.
//!
//! * [`gowers_norm_recursive`] — the inductive definition: `||f||_1` is the
//!   modulus of the mean, and `||f||_(k+1)` averages `||f . conj(f_t)||_k^(2^k)`
//!   over all translates `t`.
//! * [`gowers_norm_closed`] — the closed `(k+1)`-fold average over
//!   `(x, t_1, .., t_k)` of the conjugation-twisted vertex product. This is
//!   the budget-guarded oracle path.
//! * [`u2_via_fourier`] — for `k = 2` only, the `l^4` norm of the Fourier
//!   transform.
//!
//! The paths share no arithmetic and must agree; `verify` and the acceptance
//! suite enforce this.
//!
//! Vertex indexing: a vertex of the k-cube is an index `v` in `0..2^k` whose
//! bit `i` (from the least significant end) is the coordinate `eps_(i+1)`,
//! so `eps . t = sum_i bit_i(v) * t[i]` and `|eps| = popcount(v)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::budget::Budget;
use crate::cyclic::GroupFunction;
use crate::error::{Error, Result};

/// A vertex of the k-cube with its bit coordinates and weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeVertex {
    k: u32,
    index: usize,
}

impl CubeVertex {
    pub fn new(k: u32, index: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroOrder);
        }
        if index >= 1 << k {
            return Err(Error::LengthMismatch {
                expected: 1 << k,
                got: index,
            });
        }
        Ok(CubeVertex { k, index })
    }

    pub fn all(k: u32) -> impl Iterator<Item = CubeVertex> {
        (0..1usize << k).map(move |index| CubeVertex { k, index })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Coordinate `eps_i` (1-based, as bit `i-1` of the index).
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.k);
        (self.index >> (i - 1)) & 1 == 1
    }

    /// `|eps|`, the number of set coordinates.
    pub fn weight(&self) -> u32 {
        self.index.count_ones()
    }

    /// `eps . t = sum_i eps_i t_i`.
    pub fn dot(&self, t: &[usize], modulus: usize) -> usize {
        let mut acc = 0usize;
        for (i, &ti) in t.iter().enumerate() {
            if (self.index >> i) & 1 == 1 {
                acc = (acc + ti) % modulus;
            }
        }
        acc
    }

    pub fn is_origin(&self) -> bool {
        self.index == 0
    }
}

/// A choice of one function per vertex of the k-cube, all on one group.
#[derive(Debug, Clone)]
pub struct VertexFamily {
    k: u32,
    functions: Vec<GroupFunction>,
}

impl VertexFamily {
    pub fn new(k: u32, functions: Vec<GroupFunction>) -> Result<Self> {
        check_order(k)?;
        let expected = 1usize << k;
        if functions.len() != expected {
            return Err(Error::FamilySize {
                expected,
                got: functions.len(),
            });
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
        Ok(VertexFamily { k, functions })
    }

    /// The family with every vertex carrying the same function.
    pub fn from_single(f: &GroupFunction, k: u32) -> Result<Self> {
        check_order(k)?;
        Ok(VertexFamily {
            k,
            functions: vec![f.clone(); 1 << k],
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn group(&self) -> crate::cyclic::CyclicGroup {
        self.functions[0].group()
    }

    pub fn functions(&self) -> &[GroupFunction] {
        &self.functions
    }
}

/// Orders above this are out of scope (the work grows like `N^(k+1)`).
pub const MAX_ORDER: u32 = 6;

fn check_order(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    if k > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "uniformity norms are supported up to order {}, got {}",
            MAX_ORDER, k
        )));
    }
    Ok(())
}

/// `||f||_k` by the inductive definition; `k = 0` is rejected.
pub fn gowers_norm_recursive(f: &GroupFunction, k: u32) -> Result<f64> {
    check_order(k)?;
    let u = box_power_recursive(f.values(), k);
    Ok(root_2k(u, k))
}

fn root_2k(u: f64, k: u32) -> f64 {
    u.max(0.0).powf(1.0 / (1u64 << k) as f64)
}

/// `||f||_k^(2^k)` by unrolling the induction down to `||.||_1 = |mean|`.
/// Nonnegative by construction.
fn box_power_recursive(values: &[Complex64], k: u32) -> f64 {
    let n = values.len();
    if k == 1 {
        let sum: Complex64 = values.iter().sum();
        return sum.norm_sqr() / (n * n) as f64;
    }
    // Doubled copy avoids reducing x+t mod N in the inner loop.
    let mut doubled = Vec::with_capacity(2 * n);
    doubled.extend_from_slice(values);
    doubled.extend_from_slice(values);
    let mut product = vec![Complex64::ZERO; n];
    let mut acc = 0.0;
    for t in 0..n {
        for x in 0..n {
            product[x] = values[x] * doubled[x + t].conj();
        }
        acc += box_power_recursive(&product, k - 1);
    }
    acc / n as f64
}

/// `||f||_k` by the closed `(k+1)`-fold average (oracle path).
///
/// Refuses when the `N^(k+1)` grid exceeds the operation budget.
pub fn gowers_norm_closed(f: &GroupFunction, k: u32, budget: &Budget) -> Result<f64> {
    check_order(k)?;
    let family = VertexFamily::from_single(f, k)?;
    let z = box_integral(&family, true, budget)?;
    let scale = f.sup_norm().powi(1 << k);
    let u = certify_real_nonnegative(z, scale)?;
    Ok(root_2k(u, k))
}

/// `(sum_xi |f^(xi)|^4)^(1/4)`: the degree-2 norm read off the Fourier side.
pub fn u2_via_fourier(f: &GroupFunction) -> f64 {
    f.fourier_transform().l4_norm()
}

/// Same quantity through the naive DFT (no FFT anywhere on this path).
pub fn u2_via_fourier_naive(f: &GroupFunction) -> f64 {
    f.fourier_transform_naive().l4_norm()
}

/// The box inner product WITHOUT conjugations: the full average over
/// `(x, t)` of `prod_eps f_eps(x + eps . t)`.
pub fn gowers_inner_product(family: &VertexFamily, budget: &Budget) -> Result<Complex64> {
    box_integral(family, false, budget)
}

/// The conjugation-twisted variant: `C^|eps|` applied to each vertex
/// function, so the diagonal family recovers `||f||_k^(2^k)`.
pub fn gowers_inner_product_conjugated(
    family: &VertexFamily,
    budget: &Budget,
) -> Result<Complex64> {
    box_integral(family, true, budget)
}

/// Certifies that a box integral that is real-nonnegative in exact
/// arithmetic is so numerically: tiny negative real parts (and imaginary
/// dust) are clamped, anything larger is an implementation bug.
pub(crate) fn certify_real_nonnegative(z: Complex64, scale: f64) -> Result<f64> {
    let tol = 1e-12 * scale.max(1.0);
    if z.re < -tol {
        return Err(Error::NegativeBoxIntegral { value: z.re });
    }
    if z.im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::NegativeBoxIntegral { value: z.im });
    }
    Ok(z.re.max(0.0))
}

fn box_integral(family: &VertexFamily, conjugated: bool, budget: &Budget) -> Result<Complex64> {
    let n = family.group().order();
    let k = family.k();
    budget.check_grid(n, k + 1)?;
    let mut working: Vec<Vec<Complex64>> = family
        .functions
        .iter()
        .enumerate()
        .map(|(v, f)| {
            if conjugated && (v.count_ones() & 1) == 1 {
                f.conjugate().values().to_vec()
            } else {
                f.values().to_vec()
            }
        })
        .collect();

    // Peel the top cube coordinate in parallel; the per-t partial sums are
    // reduced in index order so the result is independent of scheduling.
    let top_sum = if k >= 2 && n * n >= 1 << 12 {
        let halves: Vec<Vec<Complex64>> = working.split_off(1 << (k - 1));
        let lower = working;
        let partials: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|t| {
                let paired: Vec<Vec<Complex64>> = lower
                    .iter()
                    .zip(&halves)
                    .map(|(lo, hi)| pair_product(lo, hi, t))
                    .collect();
                box_sum(&paired)
            })
            .collect();
        partials.into_iter().sum()
    } else {
        box_sum(&working)
    };

    let denom = (n as f64).powi(k as i32 + 1);
    Ok(top_sum / denom)
}

/// Plain sum over `(x, t_1..t_j)` of the vertex product for `2^j` tables,
/// peeling one cube coordinate per recursion level.
fn box_sum(tables: &[Vec<Complex64>]) -> Complex64 {
    let n = tables[0].len();
    if tables.len() == 1 {
        return tables[0].iter().sum();
    }
    let half = tables.len() / 2;
    let mut acc = Complex64::ZERO;
    for t in 0..n {
        let paired: Vec<Vec<Complex64>> = tables[..half]
            .iter()
            .zip(&tables[half..])
            .map(|(lo, hi)| pair_product(lo, hi, t))
            .collect();
        acc += box_sum(&paired);
    }
    acc
}

fn pair_product(lo: &[Complex64], hi: &[Complex64], t: usize) -> Vec<Complex64> {
    let n = lo.len();
    (0..n)
        .map(|x| {
            let shifted = if x + t >= n { x + t - n } else { x + t };
            lo[x] * hi[shifted]
        })
        .collect()
}
