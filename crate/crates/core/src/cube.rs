//! Cube measures and seminorms on finite ergodic systems, computed exactly.
//!
//! The order-k cube measure lives on tuples indexed by the vertices of the
//! k-cube. It is built by induction: the order-0 measure is the system
//! measure, and each step takes the relatively independent self-joining over
//! the invariant algebra of the previous product system. On a finite ergodic
//! system every conditional expectation is a plain cycle average, so the
//! joining is a finite sum over cycles and the construction is exact: the
//! support turns out to be the uniform measure on
//! `{(x + eps . t) : x, t_1, .., t_k}` in cycle coordinates.
//!
//! Vertex indexing matches [`crate::gowers`]: bit `i` of a vertex index is
//! the cube coordinate `eps_(i+1)`, and the induction step appends the top
//! bit, so the first half of a tuple is the `eps_(k+1) = 0` face.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gowers::certify_real_nonnegative;
use crate::system::{FiniteSystem, SystemFunction};

/// Explicit, finitely supported cube measure of order `k`: the uniform
/// probability measure on a set of `2^k`-point tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeMeasure {
    k: u32,
    base_size: usize,
    /// Sorted, duplicate-free tuples; each carries weight `1 / support.len()`.
    support: Vec<Vec<u16>>,
}

impl CubeMeasure {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn vertices(&self) -> usize {
        1 << self.k
    }

    pub fn support(&self) -> &[Vec<u16>] {
        &self.support
    }

    pub fn atom_weight(&self) -> f64 {
        1.0 / self.support.len() as f64
    }

    /// Integral of a product `prod_v f_v(x_v)` over the measure.
    pub fn integrate(&self, family: &[SystemFunction]) -> Result<Complex64> {
        self.check_family(family)?;
        let tables: Vec<&[Complex64]> = family.iter().map(|f| f.values()).collect();
        let mut total = Complex64::ZERO;
        for atom in &self.support {
            let mut prod = Complex64::ONE;
            for (v, &point) in atom.iter().enumerate() {
                prod *= tables[v][point as usize];
            }
            total += prod;
        }
        Ok(total * self.atom_weight())
    }

    /// Integral of the conjugation-twisted product: vertices of odd weight
    /// enter conjugated.
    pub fn integrate_conjugated(&self, family: &[SystemFunction]) -> Result<Complex64> {
        let twisted: Vec<SystemFunction> = family
            .iter()
            .enumerate()
            .map(|(v, f)| {
                if v.count_ones() & 1 == 1 {
                    f.conjugate()
                } else {
                    f.clone()
                }
            })
            .collect();
        self.integrate(&twisted)
    }

    fn check_family(&self, family: &[SystemFunction]) -> Result<()> {
        if family.len() != self.vertices() {
            return Err(Error::FamilySize {
                expected: self.vertices(),
                got: family.len(),
            });
        }
        for f in family {
            f.check_len(self.base_size)?;
        }
        Ok(())
    }

    /// Distribution of the coordinate at one vertex.
    pub fn marginal(&self, vertex: usize) -> Vec<f64> {
        let mut counts = vec![0u64; self.base_size];
        for atom in &self.support {
            counts[atom[vertex] as usize] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / self.support.len() as f64)
            .collect()
    }

    /// CSV dump: one column per vertex in eps-lexicographic order
    /// (`eps_1` most significant), then the weight.
    pub fn to_csv(&self) -> String {
        let k = self.k as usize;
        let mut header: Vec<String> = Vec::new();
        let mut column_vertex: Vec<usize> = Vec::new();
        for j in 0..self.vertices() {
            // eps-lex position j reads eps_1..eps_k as binary, most
            // significant first; internal indices store eps_1 in bit 0.
            let mut v = 0usize;
            for i in 0..k {
                if (j >> (k - 1 - i)) & 1 == 1 {
                    v |= 1 << i;
                }
            }
            column_vertex.push(v);
            let bits: String = (0..k)
                .map(|i| if (j >> (k - 1 - i)) & 1 == 1 { '1' } else { '0' })
                .collect();
            header.push(format!("x_{}", bits));
        }
        let mut out = String::new();
        let _ = writeln!(out, "{},weight", header.join(","));
        let w = crate::fmt_f64(self.atom_weight());
        for atom in &self.support {
            let row: Vec<String> = column_vertex
                .iter()
                .map(|&v| atom[v].to_string())
                .collect();
            let _ = writeln!(out, "{},{}", row.join(","), w);
        }
        out
    }
}

/// Builds the order-k cube measure of an ergodic finite system.
pub fn build_cube_measure(sys: &FiniteSystem, k: u32, budget: &Budget) -> Result<CubeMeasure> {
    sys.require_ergodic()?;
    let m = sys.size();
    if m > u16::MAX as usize {
        return Err(Error::BudgetExceeded {
            required: m as u128,
            cap: u16::MAX as u64,
        });
    }
    // order 0: the system measure itself
    let mut support: Vec<Vec<u16>> = (0..m).map(|i| vec![i as u16]).collect();
    for _level in 0..k {
        budget.check_support(support.len() as u128 * m as u128)?;
        support = joining_step(sys, &support);
    }
    Ok(CubeMeasure {
        k,
        base_size: m,
        support,
    })
}

/// One induction step: the relatively independent self-joining over the
/// invariant algebra of the product system, realized as the union over
/// cycles `C` of `C x C`. Ergodicity forces every cycle on the support to
/// have the full period, which keeps the measure uniform.
fn joining_step(sys: &FiniteSystem, support: &[Vec<u16>]) -> Vec<Vec<u16>> {
    let m = sys.size();
    let index: HashMap<&[u16], usize> = support
        .iter()
        .enumerate()
        .map(|(i, atom)| (atom.as_slice(), i))
        .collect();
    let image = |atom: &[u16]| -> Vec<u16> {
        atom.iter().map(|&p| sys.apply(p as usize) as u16).collect()
    };
    let mut seen = vec![false; support.len()];
    let mut next: Vec<Vec<u16>> = Vec::with_capacity(support.len() * m);
    for start in 0..support.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = index[image(&support[start]).as_slice()];
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = index[image(&support[cur]).as_slice()];
        }
        assert_eq!(
            cycle.len(),
            m,
            "ergodic base must give full-period cycles on the cube support"
        );
        for &a in &cycle {
            for &b in &cycle {
                let mut tuple = support[a].clone();
                tuple.extend_from_slice(&support[b]);
                next.push(tuple);
            }
        }
    }
    next.sort_unstable();
    debug_assert!(next.windows(2).all(|w| w[0] != w[1]));
    next
}

/// The order-k seminorm: `2^k`-th root of the conjugation-twisted diagonal
/// integral against the cube measure.
pub fn seminorm(sys: &FiniteSystem, f: &SystemFunction, k: u32, budget: &Budget) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    let measure = build_cube_measure(sys, k, budget)?;
    seminorm_on(&measure, f)
}

/// Same, against a prebuilt measure.
pub fn seminorm_on(measure: &CubeMeasure, f: &SystemFunction) -> Result<f64> {
    if measure.k() == 0 {
        return Err(Error::ZeroOrder);
    }
    let family = vec![f.clone(); measure.vertices()];
    let z = measure.integrate_conjugated(&family)?;
    let scale = f.sup_norm().powi(measure.vertices() as i32);
    let u = certify_real_nonnegative(z, scale)?;
    Ok(u.powf(1.0 / measure.vertices() as f64))
}

/// The seminorm through the recursion: the limit in the defining relation
/// is realized exactly as the average over one full period,
/// `||f||_(k+1)^(2^(k+1)) = (1/P) sum_n ||f . conj(f o T^n)||_k^(2^k)`.
pub fn seminorm_recursive(sys: &FiniteSystem, f: &SystemFunction, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    sys.require_ergodic()?;
    f.check_len(sys.size())?;
    let u = seminorm_power(sys, f.values(), k);
    Ok(u.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

fn seminorm_power(sys: &FiniteSystem, values: &[Complex64], k: u32) -> f64 {
    let m = sys.size();
    if k == 1 {
        let mean: Complex64 = values
            .iter()
            .zip(sys.weights())
            .map(|(v, w)| v * *w)
            .sum();
        return mean.norm_sqr();
    }
    // walk T^n incrementally
    let mut position: Vec<usize> = (0..m).collect();
    let mut product = vec![Complex64::ZERO; m];
    let mut acc = 0.0;
    for _n in 0..m {
        for x in 0..m {
            product[x] = values[x] * values[position[x]].conj();
        }
        acc += seminorm_power(sys, &product, k - 1);
        for p in position.iter_mut() {
            *p = sys.apply(*p);
        }
    }
    acc / m as f64
}

/// Correlation against the shifted diagonal measure at shift `s`:
/// `(1/P) sum_z f0(z) f1(z + s)` in cycle coordinates. On these systems the
/// maximal rotation factor is everything, so no projection is applied.
pub fn mu_s_correlation(
    sys: &FiniteSystem,
    f0: &SystemFunction,
    f1: &SystemFunction,
    s: i64,
) -> Result<Complex64> {
    let order = sys.orbit_order()?;
    f0.check_len(sys.size())?;
    f1.check_len(sys.size())?;
    let p = order.len();
    let shift = (((s % p as i64) + p as i64) % p as i64) as usize;
    let mut acc = Complex64::ZERO;
    for j in 0..p {
        acc += f0.values()[order[j]] * f1.values()[order[(j + shift) % p]];
    }
    Ok(acc / p as f64)
}

/// The order-2 integral in closed form: the full triple average over
/// `(z, s, t)` of `f00(z) f01(z+s) f10(z+t) f11(z+s+t)` in cycle
/// coordinates. Literal triple loop; the oracle side of the order-2 checks.
pub fn mu2_explicit(
    sys: &FiniteSystem,
    f00: &SystemFunction,
    f01: &SystemFunction,
    f10: &SystemFunction,
    f11: &SystemFunction,
) -> Result<Complex64> {
    let order = sys.orbit_order()?;
    for f in [f00, f01, f10, f11] {
        f.check_len(sys.size())?;
    }
    let p = order.len();
    let relabel = |f: &SystemFunction| -> Vec<Complex64> {
        order.iter().map(|&x| f.values()[x]).collect()
    };
    let (a, b, c, d) = (relabel(f00), relabel(f01), relabel(f10), relabel(f11));
    let mut total = Complex64::ZERO;
    for z in 0..p {
        for s in 0..p {
            let pair = a[z] * b[(z + s) % p];
            for t in 0..p {
                total += pair * c[(z + t) % p] * d[(z + s + t) % p];
            }
        }
    }
    Ok(total / (p * p * p) as f64)
}

/// An isometry of the k-cube: a permutation of the axes composed with a
/// set of axis flips, acting on vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeIsometry {
    k: u32,
    axis_perm: Vec<u32>,
    flips: u32,
}

impl CubeIsometry {
    pub fn new(k: u32, axis_perm: Vec<u32>, flips: u32) -> Result<Self> {
        if axis_perm.len() != k as usize {
            return Err(Error::NotCubeIsometry);
        }
        let mut seen = vec![false; k as usize];
        for &a in &axis_perm {
            if a >= k || seen[a as usize] {
                return Err(Error::NotCubeIsometry);
            }
            seen[a as usize] = true;
        }
        if k < 32 && flips >= 1 << k {
            return Err(Error::NotCubeIsometry);
        }
        Ok(CubeIsometry {
            k,
            axis_perm,
            flips,
        })
    }

    pub fn identity(k: u32) -> Self {
        CubeIsometry {
            k,
            axis_perm: (0..k).collect(),
            flips: 0,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Image of a vertex: output bit `i` is input bit `axis_perm[i]`,
    /// xor the flip bit.
    pub fn vertex_image(&self, v: usize) -> usize {
        let mut out = self.flips as usize;
        for (i, &a) in self.axis_perm.iter().enumerate() {
            if (v >> a) & 1 == 1 {
                out ^= 1 << i;
            }
        }
        out
    }

    /// Recovers an isometry from an arbitrary vertex permutation, rejecting
    /// permutations that are not affine-linear with a permutation matrix part.
    pub fn from_vertex_map(map: &[usize]) -> Result<Self> {
        let size = map.len();
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::NotCubeIsometry);
        }
        let k = size.trailing_zeros();
        let flips = map[0];
        let mut axis_perm = vec![0u32; k as usize];
        let mut seen = vec![false; k as usize];
        for i in 0..k as usize {
            let d = map[1 << i] ^ flips;
            if d.count_ones() != 1 {
                return Err(Error::NotCubeIsometry);
            }
            let target = d.trailing_zeros() as usize;
            if seen[target] {
                return Err(Error::NotCubeIsometry);
            }
            seen[target] = true;
            axis_perm[i] = target as u32;
        }
        // check full linearity, then invert: our convention reads bits
        // through axis_perm on the input side.
        for (v, &image) in map.iter().enumerate() {
            let mut expect = flips;
            for i in 0..k as usize {
                if (v >> i) & 1 == 1 {
                    expect ^= map[1 << i] ^ flips;
                }
            }
            if image != expect {
                return Err(Error::NotCubeIsometry);
            }
        }
        // map sends bit i to bit axis_perm_fwd[i]; vertex_image reads bit
        // axis_perm[i] into bit i, so invert the permutation and carry the
        // flips across.
        let mut inverse = vec![0u32; k as usize];
        for (i, &a) in axis_perm.iter().enumerate() {
            inverse[a as usize] = i as u32;
        }
        let iso = CubeIsometry::new(k, inverse, flips as u32)?;
        // paranoia: the recovered isometry must reproduce the map
        for (v, &image) in map.iter().enumerate() {
            if iso.vertex_image(v) != image {
                return Err(Error::NotCubeIsometry);
            }
        }
        Ok(iso)
    }

    /// All `2^k k!` isometries of the k-cube.
    pub fn enumerate(k: u32) -> Vec<CubeIsometry> {
        fn perms(items: Vec<u32>) -> Vec<Vec<u32>> {
            if items.len() <= 1 {
                return vec![items];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.clone();
                let head = rest.remove(i);
                for mut tail in perms(rest) {
                    tail.insert(0, head);
                    out.push(tail);
                }
            }
            out
        }
        let mut out = Vec::new();
        for axis_perm in perms((0..k).collect()) {
            for flips in 0..(1u32 << k) {
                out.push(CubeIsometry {
                    k,
                    axis_perm: axis_perm.clone(),
                    flips,
                });
            }
        }
        out
    }
}

/// Pushes the measure through a cube isometry: `(sigma x)_eps = x_(sigma(eps))`.
/// Cube measures are invariant under every isometry, so the result compares
/// equal to the input as a weighted set.
pub fn apply_cube_symmetry(measure: &CubeMeasure, sigma: &CubeIsometry) -> Result<CubeMeasure> {
    if sigma.k() != measure.k() {
        return Err(Error::NotCubeIsometry);
    }
    let vertices = measure.vertices();
    let mut support: Vec<Vec<u16>> = measure
        .support
        .iter()
        .map(|atom| {
            (0..vertices)
                .map(|v| atom[sigma.vertex_image(v)])
                .collect()
        })
        .collect();
    support.sort_unstable();
    Ok(CubeMeasure {
        k: measure.k,
        base_size: measure.base_size,
        support,
    })
}

/// A side of the k-cube: the vertices with coordinate `axis` equal to `bit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Side {
    pub axis: u32,
    pub bit: bool,
}

/// Applies `T^power` to the coordinates lying on one side. Cube measures
/// are invariant under all side transformations.
pub fn apply_side_transformation(
    sys: &FiniteSystem,
    measure: &CubeMeasure,
    side: Side,
    power: i64,
) -> Result<CubeMeasure> {
    if side.axis >= measure.k() {
        return Err(Error::BadSide {
            axis: side.axis as usize,
            k: measure.k() as usize,
        });
    }
    if sys.size() != measure.base_size() {
        return Err(Error::LengthMismatch {
            expected: measure.base_size(),
            got: sys.size(),
        });
    }
    let table = power_table(sys, power);
    let mut support: Vec<Vec<u16>> = measure
        .support
        .iter()
        .map(|atom| {
            atom.iter()
                .enumerate()
                .map(|(v, &p)| {
                    if ((v >> side.axis) & 1 == 1) == side.bit {
                        table[p as usize] as u16
                    } else {
                        p
                    }
                })
                .collect()
        })
        .collect();
    support.sort_unstable();
    Ok(CubeMeasure {
        k: measure.k,
        base_size: measure.base_size,
        support,
    })
}

/// Applies `T^power` to every coordinate (the diagonal transformation).
pub fn apply_diagonal_transformation(
    sys: &FiniteSystem,
    measure: &CubeMeasure,
    power: i64,
) -> Result<CubeMeasure> {
    if sys.size() != measure.base_size() {
        return Err(Error::LengthMismatch {
            expected: measure.base_size(),
            got: sys.size(),
        });
    }
    let table = power_table(sys, power);
    let mut support: Vec<Vec<u16>> = measure
        .support
        .iter()
        .map(|atom| atom.iter().map(|&p| table[p as usize] as u16).collect())
        .collect();
    support.sort_unstable();
    Ok(CubeMeasure {
        k: measure.k,
        base_size: measure.base_size,
        support,
    })
}

fn power_table(sys: &FiniteSystem, power: i64) -> Vec<usize> {
    (0..sys.size()).map(|i| sys.apply_pow(i, power)).collect()
}

/// Checks that the joint action of the `2k` side transformations is
/// transitive on the support (the finite shadow of ergodicity of the side
/// action), by breadth-first search.
pub fn side_action_transitive(sys: &FiniteSystem, measure: &CubeMeasure) -> Result<bool> {
    if measure.support.is_empty() {
        return Ok(true);
    }
    if sys.size() != measure.base_size() {
        return Err(Error::LengthMismatch {
            expected: measure.base_size(),
            got: sys.size(),
        });
    }
    let index: HashMap<&[u16], usize> = measure
        .support
        .iter()
        .enumerate()
        .map(|(i, atom)| (atom.as_slice(), i))
        .collect();
    let forward = power_table(sys, 1);
    let mut visited = vec![false; measure.support.len()];
    let mut queue = vec![0usize];
    visited[0] = true;
    let mut count = 1usize;
    while let Some(cur) = queue.pop() {
        for axis in 0..measure.k() {
            for bit in [false, true] {
                let image: Vec<u16> = measure.support[cur]
                    .iter()
                    .enumerate()
                    .map(|(v, &p)| {
                        if ((v >> axis) & 1 == 1) == bit {
                            forward[p as usize] as u16
                        } else {
                            p
                        }
                    })
                    .collect();
                let next = *index
                    .get(image.as_slice())
                    .expect("side transformations preserve the support");
                if !visited[next] {
                    visited[next] = true;
                    count += 1;
                    queue.push(next);
                }
            }
        }
    }
    Ok(count == measure.support.len())
}
