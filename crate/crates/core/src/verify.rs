//! The seeded property battery: every inequality and identity the library
//! stands on, run as randomized checks with reproducible ChaCha8 streams.
//!
//! Each property draws its instances from a stream derived from the global
//! seed and the property's position in the table, so `--only <name>` replays
//! exactly what the full battery ran.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::averages;
use crate::budget::Budget;
use crate::cube::{self, CubeIsometry, CubeMeasure, Side};
use crate::cyclic::{CyclicGroup, GroupFunction};
use crate::gowers;
use crate::nilsystems::{self, HeisenbergElement, RotationNumber, SkewPoint};
use crate::progressions::{self, ProgressionForm};
use crate::sampling;
use crate::series::TAIL_WINDOW;
use crate::system::{FiniteSystem, SystemFunction};

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub quick: bool,
    /// Overrides every property's default tolerance when set.
    pub tol_override: Option<f64>,
    /// Run only the property with this exact name.
    pub only: Option<String>,
    pub budget: Budget,
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed figure: minimal gap for inequalities, maximal
    /// discrepancy for agreements, as stated in `detail`.
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

impl PropertyReport {
    pub fn line(&self) -> String {
        format!(
            "{} {:<32} worst={:<12} tol={:<8} cases={:<5} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            format!("{:.3e}", self.worst),
            format!("{:.0e}", self.tolerance),
            self.cases,
            self.detail
        )
    }

    pub fn replay(&self, cfg: &VerifyConfig) -> String {
        format!(
            "replay: ergolab verify --seed {}{} --only {}",
            cfg.seed,
            if cfg.quick { " --quick" } else { "" },
            self.name
        )
    }
}

struct Outcome {
    passed: bool,
    worst: f64,
    cases: usize,
    detail: String,
}

impl Outcome {
    /// Inequality check: passes when the minimal gap stays above `-tol`.
    fn min_gap(worst: f64, cases: usize, tol: f64, what: &str) -> Outcome {
        Outcome {
            passed: worst >= -tol,
            worst,
            cases,
            detail: format!("min gap of {}", what),
        }
    }

    /// Agreement check: passes when the maximal discrepancy is below `tol`.
    fn max_delta(worst: f64, cases: usize, tol: f64, what: &str) -> Outcome {
        Outcome {
            passed: worst <= tol,
            worst,
            cases,
            detail: format!("max |delta| of {}", what),
        }
    }

    fn exact(failures: usize, cases: usize, what: &str) -> Outcome {
        Outcome {
            passed: failures == 0,
            worst: failures as f64,
            cases,
            detail: format!("failures of {}", what),
        }
    }
}

type PropertyFn = fn(&VerifyConfig, &mut ChaCha8Rng, f64) -> Outcome;

struct Property {
    name: &'static str,
    default_tol: f64,
    run: PropertyFn,
}

fn table() -> Vec<Property> {
    vec![
        Property { name: "fourier_inversion", default_tol: 1e-10, run: p_fourier_inversion },
        Property { name: "shift_mean_invariance", default_tol: 1e-12, run: p_shift_mean },
        Property { name: "parseval", default_tol: 1e-10, run: p_parseval },
        Property { name: "gowers_monotonicity", default_tol: 1e-9, run: p_gowers_monotone },
        Property { name: "gowers_subadditivity", default_tol: 1e-9, run: p_gowers_subadd },
        Property { name: "gowers_positivity", default_tol: 0.0, run: p_gowers_positivity },
        Property { name: "gowers_translation_invariance", default_tol: 1e-10, run: p_gowers_translation },
        Property { name: "gowers_three_path_agreement", default_tol: 1e-9, run: p_gowers_three_path },
        Property { name: "gowers_cauchy_schwarz", default_tol: 1e-9, run: p_gowers_cs },
        Property { name: "von_neumann_bound", default_tol: 1e-9, run: p_von_neumann },
        Property { name: "ap_count_identity", default_tol: 1e-6, run: p_ap_count },
        Property { name: "ap_multilinearity", default_tol: 1e-9, run: p_ap_multilinear },
        Property { name: "ap_fft3_agreement", default_tol: 1e-9, run: p_ap_fft3 },
        Property { name: "heisenberg_axioms", default_tol: 1e-12, run: p_heisenberg_axioms },
        Property { name: "heisenberg_nilpotency", default_tol: 1e-12, run: p_heisenberg_nilpotent },
        Property { name: "coset_reduction", default_tol: 1e-12, run: p_coset_reduction },
        Property { name: "skew_orbit_histogram", default_tol: 3.0, run: p_skew_histogram },
        Property { name: "seminorm_norm_identity", default_tol: 1e-9, run: p_seminorm_gowers },
        Property { name: "seminorm_recursive_agreement", default_tol: 1e-9, run: p_seminorm_recursive },
        Property { name: "seminorm_monotonicity", default_tol: 1e-9, run: p_seminorm_monotone },
        Property { name: "cube_cauchy_schwarz", default_tol: 1e-9, run: p_cube_cs },
        Property { name: "cube_marginals", default_tol: 1e-12, run: p_cube_marginals },
        Property { name: "cube_symmetries", default_tol: 0.0, run: p_cube_symmetries },
        Property { name: "side_invariance", default_tol: 0.0, run: p_side_invariance },
        Property { name: "side_action_transitivity", default_tol: 0.0, run: p_side_transitive },
        Property { name: "mu2_triple_agreement", default_tol: 1e-10, run: p_mu2_triple },
        Property { name: "semiprog_bound", default_tol: 1e-9, run: p_semiprog },
        Property { name: "cubic_bound", default_tol: 1e-9, run: p_cubic_bound },
        Property { name: "cubic_recurrence", default_tol: 1e-9, run: p_cubic_recurrence },
        Property { name: "van_der_corput", default_tol: 1e-9, run: p_vdc },
        Property { name: "polynomial_mode_consistency", default_tol: 0.0, run: p_poly_consistency },
        Property { name: "cesaro_tail_decrease", default_tol: 0.9, run: p_cesaro_tail },
    ]
}

pub fn battery_names() -> Vec<&'static str> {
    table().iter().map(|p| p.name).collect()
}

/// Runs the battery (or the single `--only` property) and returns one
/// report per property in table order.
pub fn run_battery(cfg: &VerifyConfig) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    for (index, prop) in table().into_iter().enumerate() {
        if let Some(only) = &cfg.only {
            if only != prop.name {
                continue;
            }
        }
        let tol = cfg.tol_override.unwrap_or(prop.default_tol);
        let mut rng = sampling::stream(cfg.seed, index as u64 + 1);
        let outcome = (prop.run)(cfg, &mut rng, tol);
        out.push(PropertyReport {
            name: prop.name,
            passed: outcome.passed,
            worst: outcome.worst,
            tolerance: tol,
            cases: outcome.cases,
            detail: outcome.detail,
        });
    }
    out
}

fn cases(cfg: &VerifyConfig, quick: usize, full: usize) -> usize {
    if cfg.quick {
        quick
    } else {
        full
    }
}

fn random_group(rng: &mut ChaCha8Rng, max: usize) -> CyclicGroup {
    CyclicGroup::new(rng.random_range(2..=max)).unwrap()
}

// ---------------------------------------------------------------- cyclic

fn p_fourier_inversion(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 60);
    let max_n = if cfg.quick { 64 } else { 256 };
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, max_n);
        let f = sampling::random_function(rng, g);
        let back = f.fourier_transform().inverse();
        for (a, b) in f.values().iter().zip(back.values()) {
            worst = worst.max((a - b).norm());
        }
    }
    Outcome::max_delta(worst, n_cases, tol, "f vs inverse(transform(f))")
}

fn p_shift_mean(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 30, 120);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, 128);
        let f = sampling::random_function(rng, g);
        let t = rng.random_range(-300i64..300);
        worst = worst.max((f.shift(t).mean() - f.mean()).norm());
    }
    Outcome::max_delta(worst, n_cases, tol, "mean(shift(f,t)) vs mean(f)")
}

fn p_parseval(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 30, 120);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, 128);
        let f = sampling::random_function(rng, g);
        let lhs: f64 = f
            .fourier_transform()
            .coefficients()
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        let rhs: f64 =
            f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / f.len() as f64;
        worst = worst.max((lhs - rhs).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "sum|f^|^2 vs (1/N)sum|f|^2")
}

// ---------------------------------------------------------------- gowers

fn p_gowers_monotone(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 24, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let n = [8usize, 16, 32, 64][rng.random_range(0..4)];
        let k = rng.random_range(1u32..=3);
        let f = sampling::bounded_function(rng, CyclicGroup::new(n).unwrap());
        let lo = gowers::gowers_norm_recursive(&f, k).unwrap();
        let hi = gowers::gowers_norm_recursive(&f, k + 1).unwrap();
        worst = worst.min(hi - lo);
    }
    Outcome::min_gap(worst, n_cases, tol, "||f||_(k+1) - ||f||_k")
}

fn p_gowers_subadd(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 24, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let g = random_group(rng, 48);
        let k = rng.random_range(1u32..=3);
        let f = sampling::bounded_function(rng, g);
        let h = sampling::bounded_function(rng, g);
        let sum = f.add(&h).unwrap();
        let gap = gowers::gowers_norm_recursive(&f, k).unwrap()
            + gowers::gowers_norm_recursive(&h, k).unwrap()
            - gowers::gowers_norm_recursive(&sum, k).unwrap();
        worst = worst.min(gap);
    }
    Outcome::min_gap(worst, n_cases, tol, "||f||_k + ||g||_k - ||f+g||_k")
}

fn p_gowers_positivity(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let n_cases = cases(cfg, 16, 100);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let g = random_group(rng, 64);
        let f = sampling::random_function(rng, g);
        worst = worst.min(gowers::gowers_norm_recursive(&f, 2).unwrap());
    }
    Outcome {
        passed: worst > 0.0,
        worst,
        cases: n_cases,
        detail: "min U^2 over nonzero random f (must stay positive)".into(),
    }
}

fn p_gowers_translation(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 16, 100);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, 32);
        let f = sampling::bounded_function(rng, g);
        let t = rng.random_range(-100i64..100);
        let k = rng.random_range(1u32..=3);
        let a = gowers::gowers_norm_recursive(&f, k).unwrap();
        let b = gowers::gowers_norm_recursive(&f.shift(t), k).unwrap();
        worst = worst.max((a - b).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "||shift(f,t)||_k vs ||f||_k")
}

fn p_gowers_three_path(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 100);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, 32);
        let f = sampling::bounded_function(rng, g);
        for k in 1..=3u32 {
            let rec = gowers::gowers_norm_recursive(&f, k).unwrap();
            let closed = gowers::gowers_norm_closed(&f, k, &cfg.budget).unwrap();
            worst = worst.max((rec - closed).abs());
            if k == 2 {
                worst = worst.max((rec - gowers::u2_via_fourier(&f)).abs());
            }
        }
    }
    Outcome::max_delta(worst, n_cases, tol, "recursive vs closed vs Fourier")
}

fn p_gowers_cs(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 24, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let g = random_group(rng, 16);
        let k = rng.random_range(1u32..=3);
        let fns: Vec<GroupFunction> = (0..1usize << k)
            .map(|_| sampling::bounded_function(rng, g))
            .collect();
        let family = gowers::VertexFamily::new(k, fns.clone()).unwrap();
        let lhs = gowers::gowers_inner_product(&family, &cfg.budget)
            .unwrap()
            .norm();
        let rhs: f64 = fns
            .iter()
            .map(|f| gowers::gowers_norm_recursive(f, k).unwrap())
            .product();
        worst = worst.min(rhs - lhs);
    }
    Outcome::min_gap(worst, n_cases, tol, "prod ||f_eps||_k - |box product|")
}

// ---------------------------------------------------------------- progressions

fn p_von_neumann(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 24, 200);
    let mut worst = f64::INFINITY;
    for i in 0..n_cases {
        let ell = 3 + (i % 2);
        let n = [8usize, 16, 32][i % 3];
        let g = CyclicGroup::new(n).unwrap();
        let fns: Vec<GroupFunction> = (0..ell)
            .map(|_| sampling::bounded_function(rng, g))
            .collect();
        let form = ProgressionForm::new(fns).unwrap();
        let gap = progressions::von_neumann_gap(&form, &cfg.budget).unwrap();
        worst = worst.min(gap);
    }
    Outcome::min_gap(worst, n_cases, tol, "min||f_i||_(l-1) - |Lambda|")
}

fn p_ap_count(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 12, 60);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let n = rng.random_range(3usize..=40);
        let density = rng.random_range(0.2..0.8);
        let set: Vec<i64> = sampling::random_subset(rng, n, density)
            .into_iter()
            .map(|x| x as i64)
            .collect();
        let ell = rng.random_range(2usize..=4);
        let report = progressions::count_aps(CyclicGroup::new(n).unwrap(), &set, ell).unwrap();
        let scaled = report.lambda_value * (n * n) as f64;
        worst = worst.max((scaled - report.inclusive_count as f64).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "N^2 Lambda vs integer (a,d) count")
}

fn p_ap_multilinear(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 16, 100);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, 24);
        let a = sampling::random_function(rng, g);
        let b = sampling::random_function(rng, g);
        let c = sampling::random_function(rng, g);
        let d = sampling::random_function(rng, g);
        let alpha = sampling::complex_box(rng);
        let combo = b.add(&d.scale(alpha)).unwrap();
        let lhs = progressions::ap_form(
            &ProgressionForm::new(vec![a.clone(), combo, c.clone()]).unwrap(),
        );
        let rhs = progressions::ap_form(&ProgressionForm::new(vec![a.clone(), b, c.clone()]).unwrap())
            + alpha * progressions::ap_form(&ProgressionForm::new(vec![a, d, c]).unwrap());
        worst = worst.max((lhs - rhs).norm());
    }
    Outcome::max_delta(worst, n_cases, tol, "slot linearity of Lambda")
}

fn p_ap_fft3(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 12, 60);
    let max_n = if cfg.quick { 128 } else { 512 };
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_group(rng, max_n);
        let f0 = sampling::random_function(rng, g);
        let f1 = sampling::random_function(rng, g);
        let f2 = sampling::random_function(rng, g);
        let direct = progressions::ap_form(
            &ProgressionForm::new(vec![f0.clone(), f1.clone(), f2.clone()]).unwrap(),
        );
        let fast = progressions::ap_form_fft3(&f0, &f1, &f2).unwrap();
        worst = worst.max((direct - fast).norm());
    }
    Outcome::max_delta(worst, n_cases, tol, "direct Lambda_3 vs frequency sum")
}

// ---------------------------------------------------------------- nilsystems

fn random_heisenberg(rng: &mut ChaCha8Rng, scale: f64) -> HeisenbergElement {
    HeisenbergElement::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

fn p_heisenberg_axioms(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 30, 100);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_heisenberg(rng, 3.0);
        let h = random_heisenberg(rng, 3.0);
        let k = random_heisenberg(rng, 3.0);
        let lhs = (g * h) * k;
        let rhs = g * (h * k);
        worst = worst
            .max((lhs.x - rhs.x).abs())
            .max((lhs.y - rhs.y).abs())
            .max((lhs.z - rhs.z).abs());
        let e = g * g.inverse();
        worst = worst.max(e.x.abs()).max(e.y.abs()).max(e.z.abs());
        let idg = g * HeisenbergElement::identity();
        worst = worst
            .max((idg.x - g.x).abs())
            .max((idg.y - g.y).abs())
            .max((idg.z - g.z).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "associativity, inverse, identity")
}

fn p_heisenberg_nilpotent(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 30, 100);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_heisenberg(rng, 3.0);
        let h = random_heisenberg(rng, 3.0);
        let k = random_heisenberg(rng, 3.0);
        let c = g.commutator(h).commutator(k);
        worst = worst.max(c.x.abs()).max(c.y.abs()).max(c.z.abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "[[g,h],k] vs identity")
}

fn p_coset_reduction(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 50, 200);
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let g = random_heisenberg(rng, 4.0);
        let p = nilsystems::reduce_mod_lattice(g);
        for c in [p.x, p.y, p.z] {
            if !(0.0..1.0).contains(&c) {
                worst = worst.max(1.0);
            }
        }
        let again = nilsystems::reduce_mod_lattice(p.representative());
        worst = worst
            .max((again.x - p.x).abs())
            .max((again.y - p.y).abs())
            .max((again.z - p.z).abs());
        let lam = HeisenbergElement::new(
            rng.random_range(-5i64..=5) as f64,
            rng.random_range(-5i64..=5) as f64,
            rng.random_range(-5i64..=5) as f64,
        );
        let moved = nilsystems::reduce_mod_lattice(g * lam);
        worst = worst
            .max((moved.x - p.x).abs())
            .max((moved.y - p.y).abs())
            .max((moved.z - p.z).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "idempotence and coset invariance")
}

fn p_skew_histogram(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    // Occupancy of a 16x16 grid along one long orbit. The aggregate
    // chi-square statistic must sit within 3 sigma of its multinomial
    // expectation (a max over 256 per-cell deviations would flag ordinary
    // sampling noise). Diagnostic, not proof.
    let steps: u64 = if cfg.quick { 1 << 14 } else { 1 << 16 };
    let alpha = RotationNumber::golden().value();
    let mut p = SkewPoint::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    let mut counts = vec![0u64; 256];
    for _ in 0..steps {
        let cx = (p.x * 16.0) as usize % 16;
        let cy = (p.y * 16.0) as usize % 16;
        counts[16 * cx + cy] += 1;
        p = nilsystems::skew_step(p, alpha);
    }
    let expected = steps as f64 / 256.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = 255.0f64;
    let sigma = (2.0 * dof).sqrt();
    let worst = (chi2 - dof).abs() / sigma;
    Outcome::max_delta(worst, 256, tol, "chi-square deviation in sigma units")
}

// ---------------------------------------------------------------- cube measures

struct MeasureCache {
    map: HashMap<(usize, u32), CubeMeasure>,
}

impl MeasureCache {
    fn new() -> Self {
        MeasureCache {
            map: HashMap::new(),
        }
    }

    fn get(&mut self, n: usize, k: u32, budget: &Budget) -> &CubeMeasure {
        self.map.entry((n, k)).or_insert_with(|| {
            let sys = FiniteSystem::cyclic_rotation(n).unwrap();
            cube::build_cube_measure(&sys, k, budget).unwrap()
        })
    }
}

fn p_seminorm_gowers(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 9, 45);
    let max_n = if cfg.quick { 8 } else { 16 };
    let mut cache = MeasureCache::new();
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=max_n);
        let k = rng.random_range(1u32..=3);
        let g = CyclicGroup::new(n).unwrap();
        let f = sampling::bounded_function(rng, g);
        let sf = SystemFunction::from_group_function(&f);
        let measure = cache.get(n, k, &cfg.budget);
        let semi = cube::seminorm_on(measure, &sf).unwrap();
        let gowers_val = gowers::gowers_norm_closed(&f, k, &cfg.budget).unwrap();
        worst = worst.max((semi - gowers_val).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "cube seminorm vs uniformity norm")
}

fn p_seminorm_recursive(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 8, 40);
    let mut cache = MeasureCache::new();
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=16);
        let k = rng.random_range(1u32..=3);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let f = sampling::bounded_system_function(rng, n);
        let direct = cube::seminorm_on(cache.get(n, k, &cfg.budget), &f).unwrap();
        let rec = cube::seminorm_recursive(&sys, &f, k).unwrap();
        worst = worst.max((direct - rec).abs());
    }
    Outcome::max_delta(worst, n_cases, tol, "joining integral vs recursion")
}

fn p_seminorm_monotone(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 12, 100);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=16);
        let k = rng.random_range(1u32..=2);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let f = sampling::bounded_system_function(rng, n);
        let lo = cube::seminorm_recursive(&sys, &f, k).unwrap();
        let hi = cube::seminorm_recursive(&sys, &f, k + 1).unwrap();
        worst = worst.min(hi - lo);
    }
    Outcome::min_gap(worst, n_cases, tol, "|||f|||_(k+1) - |||f|||_k")
}

fn p_cube_cs(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 24, 200);
    let mut cache = MeasureCache::new();
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=16);
        let k = rng.random_range(1u32..=3);
        let family: Vec<SystemFunction> = (0..1usize << k)
            .map(|_| sampling::bounded_system_function(rng, n))
            .collect();
        let measure = cache.get(n, k, &cfg.budget);
        let lhs = measure.integrate(&family).unwrap().norm();
        let mut rhs = 1.0f64;
        for f in &family {
            rhs *= cube::seminorm_on(measure, f).unwrap();
        }
        worst = worst.min(rhs - lhs);
    }
    Outcome::min_gap(worst, n_cases, tol, "prod |||f_eps|||_k - |integral|")
}

fn p_cube_marginals(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 6, 18);
    let mut cache = MeasureCache::new();
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=8);
        let k = rng.random_range(1u32..=3);
        let measure = cache.get(n, k, &cfg.budget);
        for v in 0..measure.vertices() {
            for p in measure.marginal(v) {
                worst = worst.max((p - 1.0 / n as f64).abs());
            }
        }
    }
    Outcome::max_delta(worst, n_cases, tol, "vertex marginals vs base measure")
}

fn p_cube_symmetries(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let n_cases = cases(cfg, 3, 8);
    let mut cache = MeasureCache::new();
    let mut failures = 0usize;
    let mut total = 0usize;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=8);
        let k = rng.random_range(1u32..=3);
        let measure = cache.get(n, k, &cfg.budget).clone();
        for sigma in CubeIsometry::enumerate(k) {
            total += 1;
            if cube::apply_cube_symmetry(&measure, &sigma).unwrap() != measure {
                failures += 1;
            }
        }
    }
    Outcome::exact(failures, total, "measure equality under cube isometries")
}

fn p_side_invariance(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let n_cases = cases(cfg, 3, 8);
    let mut cache = MeasureCache::new();
    let mut failures = 0usize;
    let mut total = 0usize;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=8);
        let k = rng.random_range(1u32..=3);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let measure = cache.get(n, k, &cfg.budget).clone();
        for axis in 0..k {
            for bit in [false, true] {
                total += 1;
                let moved =
                    cube::apply_side_transformation(&sys, &measure, Side { axis, bit }, 1)
                        .unwrap();
                if moved != measure {
                    failures += 1;
                }
            }
            // opposite sides compose to the diagonal
            total += 1;
            let once = cube::apply_side_transformation(
                &sys,
                &measure,
                Side { axis, bit: false },
                1,
            )
            .unwrap();
            let both =
                cube::apply_side_transformation(&sys, &once, Side { axis, bit: true }, 1)
                    .unwrap();
            if both != cube::apply_diagonal_transformation(&sys, &measure, 1).unwrap() {
                failures += 1;
            }
        }
    }
    Outcome::exact(failures, total, "measure equality under side maps")
}

fn p_side_transitive(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let n_cases = cases(cfg, 3, 8);
    let mut failures = 0usize;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=8);
        let k = rng.random_range(1u32..=2);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let measure = cube::build_cube_measure(&sys, k, &cfg.budget).unwrap();
        if !cube::side_action_transitive(&sys, &measure).unwrap() {
            failures += 1;
        }
    }
    Outcome::exact(failures, n_cases, "joint side action reaches the whole support")
}

fn p_mu2_triple(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 8, 40);
    let max_n = if cfg.quick { 12 } else { 32 };
    let mut cache = MeasureCache::new();
    let mut worst = 0.0f64;
    for _ in 0..n_cases {
        let n = rng.random_range(2usize..=max_n);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let fs: Vec<SystemFunction> = (0..4)
            .map(|_| sampling::bounded_system_function(rng, n))
            .collect();
        let explicit = cube::mu2_explicit(&sys, &fs[0], &fs[1], &fs[2], &fs[3]).unwrap();
        let decomposed: Complex64 = (0..n as i64)
            .map(|s| {
                cube::mu_s_correlation(&sys, &fs[0], &fs[1], s).unwrap()
                    * cube::mu_s_correlation(&sys, &fs[2], &fs[3], s).unwrap()
            })
            .sum::<Complex64>()
            / n as f64;
        let joined = cache.get(n, 2, &cfg.budget).integrate(&fs).unwrap();
        worst = worst
            .max((explicit - decomposed).norm())
            .max((explicit - joined).norm())
            .max((decomposed - joined).norm());
    }
    Outcome::max_delta(worst, n_cases, tol, "explicit vs decomposition vs joining")
}

// ---------------------------------------------------------------- averages

fn p_semiprog(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let n = rng.random_range(3usize..=16);
        let k = rng.random_range(1usize..=3);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let fs: Vec<SystemFunction> = (0..k)
            .map(|_| sampling::bounded_system_function(rng, n))
            .collect();
        worst = worst.min(averages::semiprog_bound_check(&sys, &fs).unwrap());
    }
    Outcome::min_gap(worst, n_cases, tol, "min(l |||f_l|||_k) - ||A_P||_2")
}

fn p_cubic_bound(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let k = rng.random_range(2u32..=3);
        let n = if k == 3 {
            rng.random_range(2usize..=8)
        } else {
            rng.random_range(2usize..=16)
        };
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let family: Vec<SystemFunction> = (0..(1usize << k) - 1)
            .map(|_| sampling::bounded_system_function(rng, n))
            .collect();
        worst = worst.min(averages::cubic_bound_check(&sys, &family).unwrap());
    }
    Outcome::min_gap(worst, n_cases, tol, "min |||f_eps|||_k - ||cubic A_P||_2")
}

fn p_cubic_recurrence(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let k = rng.random_range(2u32..=3);
        let n = if k == 3 {
            rng.random_range(2usize..=8)
        } else {
            rng.random_range(2usize..=16)
        };
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let density = rng.random_range(0.3..0.9);
        let set = sampling::random_subset(rng, n, density);
        worst = worst.min(averages::cubic_recurrence_check(&sys, &set, k).unwrap());
    }
    Outcome::min_gap(worst, n_cases, tol, "avg mu(cap T^(n.eps)A) - mu(A)^(2^k)")
}

fn p_vdc(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    let n_cases = cases(cfg, 20, 200);
    let mut worst = f64::INFINITY;
    for _ in 0..n_cases {
        let p = rng.random_range(2usize..=64);
        let dim = rng.random_range(1usize..=4);
        let vectors: Vec<Vec<Complex64>> = (0..p)
            .map(|_| {
                let mut v: Vec<Complex64> =
                    (0..dim).map(|_| sampling::complex_box(rng)).collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1.0 {
                    for z in v.iter_mut() {
                        *z /= norm;
                    }
                }
                v
            })
            .collect();
        worst = worst.min(averages::vdc_finite(&vectors).unwrap());
    }
    Outcome::min_gap(worst, n_cases, tol, "avg |autocorrelation| - ||mean||^2")
}

fn p_poly_consistency(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, _tol: f64) -> Outcome {
    let n_cases = cases(cfg, 8, 40);
    let mut failures = 0usize;
    for _ in 0..n_cases {
        let n = rng.random_range(3usize..=16);
        let k = rng.random_range(1usize..=3);
        let sys = FiniteSystem::cyclic_rotation(n).unwrap();
        let fs: Vec<SystemFunction> = (0..k)
            .map(|_| sampling::bounded_system_function(rng, n))
            .collect();
        let polys: Vec<averages::IntegerPolynomial> = (1..=k as i64)
            .map(averages::IntegerPolynomial::linear)
            .collect();
        let steps = rng.random_range(1u64..=3 * n as u64);
        let a = averages::linear_average(&sys, &fs, steps, 0).unwrap();
        let b = averages::polynomial_average(&sys, &fs, &polys, steps, 0).unwrap();
        if a.final_function != b.final_function || a.series != b.series {
            failures += 1;
        }
    }
    Outcome::exact(failures, n_cases, "linear mode vs linear polynomials (bitwise)")
}

fn phase_y(p: &SkewPoint) -> Complex64 {
    nilsystems::phase(p.y)
}

fn p_cesaro_tail(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, tol: f64) -> Outcome {
    // Fraction of seeded starts whose windowed Cauchy-tail statistic is
    // non-increasing across the doubling checkpoints; `tol` is the required
    // fraction.
    let (len, first_cp, starts_per_k): (u64, u64, usize) = if cfg.quick {
        (1 << 14, 1 << 10, 5)
    } else {
        (1 << 20, 1 << 14, 10)
    };
    let alpha = RotationNumber::golden().value();
    let mut monotone = 0usize;
    let mut total = 0usize;
    for k in [2usize, 3] {
        for _ in 0..starts_per_k {
            let start = SkewPoint::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let obs: Vec<fn(&SkewPoint) -> Complex64> = vec![phase_y; k];
            let series = averages::linear_average_orbit(
                &start,
                |p| nilsystems::skew_step(*p, alpha),
                &obs,
                len,
            )
            .unwrap();
            let cps = series.checkpoints();
            let tails = series.tail_sequence(TAIL_WINDOW);
            let sel: Vec<f64> = tails
                .iter()
                .enumerate()
                .filter(|(j, _)| cps[j + 1] >= first_cp)
                .map(|(_, t)| *t)
                .collect();
            total += 1;
            if sel.windows(2).all(|w| w[1] <= w[0]) {
                monotone += 1;
            }
        }
    }
    let fraction = monotone as f64 / total as f64;
    Outcome {
        passed: fraction >= tol,
        worst: fraction,
        cases: total,
        detail: "fraction of starts with non-increasing tail".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_battery_is_green_and_deterministic() {
        let cfg = VerifyConfig {
            seed: 1,
            quick: true,
            ..VerifyConfig::default()
        };
        let reports = run_battery(&cfg);
        assert_eq!(reports.len(), battery_names().len());
        for r in &reports {
            assert!(r.passed, "{}\n{}", r.line(), r.replay(&cfg));
        }
        let again = run_battery(&cfg);
        for (a, b) in reports.iter().zip(&again) {
            assert_eq!(a.worst.to_bits(), b.worst.to_bits(), "{}", a.name);
        }
    }

    #[test]
    fn only_filter_selects_one_property() {
        let cfg = VerifyConfig {
            seed: 3,
            quick: true,
            only: Some("parseval".into()),
            ..VerifyConfig::default()
        };
        let reports = run_battery(&cfg);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].name, "parseval");
    }

    #[test]
    fn corrupted_tolerance_fails() {
        let cfg = VerifyConfig {
            seed: 1,
            quick: true,
            tol_override: Some(1e-16),
            only: Some("fourier_inversion".into()),
            ..VerifyConfig::default()
        };
        let reports = run_battery(&cfg);
        assert!(!reports[0].passed);
    }
}
