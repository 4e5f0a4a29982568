//! `ergolab` — batch CLI over the ergolab-core library.
//!
//! Every subcommand is deterministic given its flags and seed: randomized
//! inputs come from ChaCha8 streams, numbers are printed with 17 significant
//! digits, and identical invocations produce byte-identical output files.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 operation budget exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use ergolab_core::averages::{self, IntegerPolynomial};
use ergolab_core::budget::Budget;
use ergolab_core::cube;
use ergolab_core::cyclic::{CyclicGroup, GroupFunction};
use ergolab_core::fmt_f64;
use ergolab_core::gowers;
use ergolab_core::nilsystems::{
    self, HeisenbergElement, HeisenbergPoint, RotationNumber, SkewPoint,
};
use ergolab_core::progressions;
use ergolab_core::sampling;
use ergolab_core::system::{FiniteSystem, SystemFunction};
use ergolab_core::verify::{self, VerifyConfig};
use ergolab_core::Error as CoreError;

const ENV_BUDGET: &str = "ERGOLAB_BUDGET";

#[derive(Parser)]
#[command(
    name = "ergolab",
    about = "Uniformity norms, cube measures and multiple ergodic averages on finite models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Seed for any randomized inputs (ChaCha8 streams).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Agreement tolerance reported alongside multi-path results.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Operation cap for brute-force oracle paths
    /// (ERGOLAB_BUDGET overrides the default; this flag overrides both).
    #[arg(long)]
    budget: Option<u64>,
    /// Write the primary result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format where both are supported.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Uniformity norms of a function on Z/NZ by every available path.
    Gowers(GowersArgs),
    /// Progression counts and the counting form for a subset of Z/NZ.
    Ap(ApArgs),
    /// Orbits and Birkhoff averages of the two built-in nilsystems.
    Nil(NilArgs),
    /// Cube measures and seminorms on the cyclic rotation.
    Cube(CubeArgs),
    /// Multiple ergodic averages (linear, polynomial, cubic).
    Avg(AvgArgs),
    /// Run the seeded property battery.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GowersArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Group order (defaults to the input length when --input is given).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Norm order k >= 1.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Read the function from an index,re,im CSV file.
    #[arg(long, conflicts_with_all = ["constant", "random"])]
    input: Option<PathBuf>,
    /// Use the constant function RE[,IM].
    #[arg(long = "const")]
    constant: Option<String>,
    /// Use a seeded random function bounded by 1.
    #[arg(long, default_value_t = false)]
    random: bool,
    /// Evaluate the degree-2 Fourier path with the naive DFT instead of the FFT.
    #[arg(long, value_enum, default_value_t = DftPath::Fast)]
    dft: DftPath,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DftPath {
    Fast,
    Naive,
}

#[derive(Args)]
struct ApArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Group order.
    #[arg(long = "N")]
    n: usize,
    /// Progression length (>= 2).
    #[arg(long)]
    ell: usize,
    /// Comma-separated subset of Z/NZ, e.g. 0,4,8.
    #[arg(long)]
    set: Option<String>,
    /// Sample a random subset of this density instead of --set.
    #[arg(long, conflicts_with = "set")]
    density: Option<f64>,
}

#[derive(Args)]
struct NilArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Which nilsystem to run.
    #[arg(long, value_enum)]
    system: NilSystem,
    /// Rotation number for the skew system: `golden`, `P/Q`, or a float
    /// (floats are recorded as declared-irrational).
    #[arg(long)]
    alpha: Option<String>,
    /// Translation element t1,t2,t3 for the Heisenberg system.
    #[arg(long)]
    t: Option<String>,
    /// Start point (x,y for skew; x,y,z for heisenberg). Default: origin.
    #[arg(long)]
    start: Option<String>,
    /// Orbit length.
    #[arg(long)]
    steps: u64,
    /// Observable for series mode: e(2 pi i <coordinate>).
    #[arg(long, value_enum, default_value_t = Observable::EY)]
    observable: Observable,
    /// Emit Birkhoff partial averages (series) or the raw orbit.
    #[arg(long, value_enum, default_value_t = NilMode::Series)]
    mode: NilMode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NilSystem {
    Skew,
    Heisenberg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Observable {
    #[value(name = "e_x")]
    EX,
    #[value(name = "e_y")]
    EY,
    #[value(name = "e_z")]
    EZ,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NilMode {
    Series,
    Orbit,
}

#[derive(Args)]
struct CubeArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Rotation size.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Cube order k >= 1.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Read the function from an index,re,im CSV file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the explicit cube-measure support as CSV here.
    #[arg(long)]
    dump_measure: Option<PathBuf>,
}

#[derive(Args)]
struct AvgArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Averaging mode.
    #[arg(long, value_enum)]
    mode: AvgMode,
    /// Rotation size.
    #[arg(long = "N")]
    n: usize,
    /// Number of functions (linear/polynomial) or cube order (cubic).
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Averaging length; defaults to the period N.
    #[arg(long)]
    steps: Option<u64>,
    /// Interval offset: average over [offset, offset+steps).
    #[arg(long, default_value_t = 0)]
    offset: i64,
    /// Polynomials in the binomial basis, one per function:
    /// "c0,c1,..;c0,c1,.." (polynomial mode).
    #[arg(long)]
    polys: Option<String>,
    /// Named polynomial family (polynomial mode).
    #[arg(long, value_enum, conflicts_with = "polys")]
    preset: Option<PolyPreset>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AvgMode {
    Linear,
    Polynomial,
    Cubic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolyPreset {
    /// p1(n) = n, p2(n) = n^2.
    Fw1,
    /// p1(n) = n^2, p2(n) = n^2 + n.
    Fw2,
}

#[derive(Args)]
struct VerifyArgs {
    /// Battery seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reduced sizes (seconds instead of minutes).
    #[arg(long, default_value_t = false)]
    quick: bool,
    /// Override every property's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Run a single property by name.
    #[arg(long)]
    only: Option<String>,
    /// Operation cap override.
    #[arg(long)]
    budget: Option<u64>,
    /// List property names and exit.
    #[arg(long, default_value_t = false)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {:#}", err);
            match err.downcast_ref::<CoreError>() {
                Some(e) if e.is_budget() => 3,
                _ => 2,
            }
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Gowers(args) => cmd_gowers(args),
        Command::Ap(args) => cmd_ap(args),
        Command::Nil(args) => cmd_nil(args),
        Command::Cube(args) => cmd_cube(args),
        Command::Avg(args) => cmd_avg(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn budget_from(flag: Option<u64>) -> Budget {
    let mut budget = Budget::default();
    if let Ok(value) = std::env::var(ENV_BUDGET) {
        if let Ok(cap) = value.parse::<u64>() {
            budget.op_cap = cap;
        }
    }
    if let Some(cap) = flag {
        budget.op_cap = cap;
    }
    budget
}

fn emit(common: &CommonOpts, text: &str) -> anyhow::Result<()> {
    match &common.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

fn load_function(
    n: Option<usize>,
    input: &Option<PathBuf>,
    constant: &Option<String>,
    random: bool,
    seed: u64,
) -> anyhow::Result<GroupFunction> {
    if let Some(path) = input {
        let text = fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {}", path.display(), e))?;
        let f = GroupFunction::from_csv(&text)
            .map_err(|e| anyhow::anyhow!("{}: {}", path.display(), e))?;
        if let Some(n) = n {
            if n != f.len() {
                anyhow::bail!(CoreError::LengthMismatch {
                    expected: n,
                    got: f.len()
                });
            }
        }
        return Ok(f);
    }
    let n = n.ok_or_else(|| anyhow::anyhow!("--N is required without --input"))?;
    let group = CyclicGroup::new(n)?;
    if let Some(text) = constant {
        let c = parse_complex(text)?;
        return Ok(GroupFunction::constant(group, c));
    }
    if random {
        let mut rng = sampling::rng(seed);
        return Ok(sampling::bounded_function(&mut rng, group));
    }
    anyhow::bail!("provide one of --input, --const, --random")
}

fn parse_complex(text: &str) -> anyhow::Result<Complex64> {
    let mut parts = text.split(',');
    let re: f64 = parts
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("invalid real part in '{}'", text))?;
    let im: f64 = match parts.next() {
        Some(part) => part
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("invalid imaginary part in '{}'", text))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        anyhow::bail!("too many components in complex number '{}'", text);
    }
    Ok(Complex64::new(re, im))
}

fn parse_floats(text: &str, expected: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("invalid {} '{}'", what, text))?;
    if values.len() != expected {
        anyhow::bail!("{} needs {} components, got {}", what, expected, values.len());
    }
    Ok(values)
}

// ---------------------------------------------------------------- gowers

fn cmd_gowers(args: GowersArgs) -> anyhow::Result<u8> {
    if args.k == 0 {
        anyhow::bail!(CoreError::ZeroOrder);
    }
    let budget = budget_from(args.common.budget);
    let f = load_function(
        args.n,
        &args.input,
        &args.constant,
        args.random,
        args.common.seed,
    )?;
    let recursive = gowers::gowers_norm_recursive(&f, args.k)?;
    let closed = match gowers::gowers_norm_closed(&f, args.k, &budget) {
        Ok(v) => Some(v),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e.into()),
    };
    let fourier = if args.k == 2 {
        Some(match args.dft {
            DftPath::Fast => gowers::u2_via_fourier(&f),
            DftPath::Naive => gowers::u2_via_fourier_naive(&f),
        })
    } else {
        None
    };

    let mut values = vec![recursive];
    values.extend(closed);
    values.extend(fourier);
    let max_delta = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .fold(0.0f64, f64::max);

    let mut report = serde_json::Map::new();
    report.insert("N".into(), f.len().into());
    report.insert("k".into(), args.k.into());
    report.insert("recursive".into(), recursive.into());
    if let Some(v) = closed {
        report.insert("closed".into(), v.into());
    } else {
        report.insert("closed_skipped".into(), "budget".into());
    }
    if let Some(v) = fourier {
        report.insert("fourier".into(), v.into());
    }
    report.insert("max_delta".into(), max_delta.into());
    report.insert("tolerance".into(), args.common.tol.into());
    report.insert("agree".into(), (max_delta <= args.common.tol).into());

    let text = match args.common.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let mut out = String::from("path,value\n");
            out.push_str(&format!("recursive,{}\n", fmt_f64(recursive)));
            if let Some(v) = closed {
                out.push_str(&format!("closed,{}\n", fmt_f64(v)));
            }
            if let Some(v) = fourier {
                out.push_str(&format!("fourier,{}\n", fmt_f64(v)));
            }
            out.push_str(&format!("max_delta,{}\n", fmt_f64(max_delta)));
            out
        }
    };
    emit(&args.common, &text)?;
    Ok(0)
}

// ---------------------------------------------------------------- ap

fn cmd_ap(args: ApArgs) -> anyhow::Result<u8> {
    let group = CyclicGroup::new(args.n)?;
    let set: Vec<i64> = if let Some(text) = &args.set {
        text.split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| anyhow::anyhow!("invalid set '{}'", text))?
    } else if let Some(density) = args.density {
        if !(0.0..=1.0).contains(&density) {
            anyhow::bail!("density must lie in [0, 1]");
        }
        let mut rng = sampling::rng(args.common.seed);
        sampling::random_subset(&mut rng, args.n, density)
            .into_iter()
            .map(|x| x as i64)
            .collect()
    } else {
        anyhow::bail!("provide --set or --density");
    };
    let report = progressions::count_aps(group, &set, args.ell)?;
    let interval = progressions::count_aps_interval(group, &set, args.ell)?;

    let text = match args.common.format {
        Format::Json => {
            let mut value = serde_json::to_value(&report)?;
            // the non-wrapping interval statistic rides along, clearly named
            value.as_object_mut().unwrap().insert(
                "interval_nonwrapping_count".into(),
                interval.into(),
            );
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
        Format::Csv => format!(
            "N,ell,set_size,nondegenerate_count,inclusive_count,lambda_value,interval_nonwrapping_count\n{},{},{},{},{},{},{}\n",
            report.n,
            report.ell,
            report.set_size,
            report.nondegenerate_count,
            report.inclusive_count,
            fmt_f64(report.lambda_value),
            interval
        ),
    };
    emit(&args.common, &text)?;
    Ok(0)
}

// ---------------------------------------------------------------- nil

fn parse_alpha(text: &str) -> anyhow::Result<RotationNumber> {
    if text == "golden" {
        return Ok(RotationNumber::golden());
    }
    if let Some((p, q)) = text.split_once('/') {
        let num: i64 = p.trim().parse()?;
        let den: u64 = q.trim().parse()?;
        return Ok(RotationNumber::rational(num, den)?);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| anyhow::anyhow!("invalid rotation number '{}'", text))?;
    Ok(RotationNumber::irrational(value))
}

fn observable_of(p_x: f64, p_y: f64, p_z: Option<f64>, obs: Observable) -> Complex64 {
    match obs {
        Observable::EX => nilsystems::phase(p_x),
        Observable::EY => nilsystems::phase(p_y),
        Observable::EZ => nilsystems::phase(p_z.unwrap_or(0.0)),
    }
}

fn cmd_nil(args: NilArgs) -> anyhow::Result<u8> {
    if args.steps == 0 {
        anyhow::bail!("--steps must be positive");
    }
    let mut meta = Vec::new();
    let body = match args.system {
        NilSystem::Skew => {
            let alpha = parse_alpha(args.alpha.as_deref().unwrap_or("golden"))?;
            meta.push("# system: skew product on T^2".to_string());
            meta.push(format!("# alpha: {}", alpha.describe()));
            meta.push(format!(
                "# ergodicity: {} (ergodic iff alpha is irrational)",
                if alpha.declared_irrational() {
                    "declared ergodic"
                } else {
                    "declared non-ergodic, periodic"
                }
            ));
            let start = match &args.start {
                Some(text) => {
                    let v = parse_floats(text, 2, "start point")?;
                    SkewPoint::new(v[0], v[1])
                }
                None => SkewPoint::new(0.0, 0.0),
            };
            meta.push(format!("# start: {},{}", fmt_f64(start.x), fmt_f64(start.y)));
            let a = alpha.value();
            match args.mode {
                NilMode::Series => {
                    if args.observable == Observable::EZ {
                        anyhow::bail!("the skew system has no z coordinate");
                    }
                    let series = nilsystems::birkhoff_series(
                        start,
                        |p| nilsystems::skew_step(*p, a),
                        |p| observable_of(p.x, p.y, None, args.observable),
                        args.steps,
                    );
                    series.to_csv_birkhoff()
                }
                NilMode::Orbit => {
                    let orbit = nilsystems::skew_orbit(start, a, args.steps);
                    let mut out = String::from("n,x,y\n");
                    for (i, p) in orbit.iter().enumerate() {
                        out.push_str(&format!("{},{},{}\n", i, fmt_f64(p.x), fmt_f64(p.y)));
                    }
                    out
                }
            }
        }
        NilSystem::Heisenberg => {
            let t_text = args
                .t
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--t t1,t2,t3 is required for heisenberg"))?;
            // each component is a rotation-number-style value, so rational
            // vs declared-irrational intent is recorded per coordinate
            let parts: Vec<RotationNumber> = t_text
                .split(',')
                .map(parse_alpha)
                .collect::<anyhow::Result<_>>()?;
            if parts.len() != 3 {
                anyhow::bail!("translation needs 3 components, got {}", parts.len());
            }
            let t = HeisenbergElement::new(parts[0].value(), parts[1].value(), parts[2].value());
            meta.push("# system: heisenberg nilmanifold".to_string());
            for (name, part) in ["t1", "t2", "t3"].iter().zip(&parts) {
                meta.push(format!("# {}: {}", name, part.describe()));
            }
            meta.push(
                "# ergodicity: ergodic iff t1, t2 are rationally independent \
                 (declared forms above)"
                    .to_string(),
            );
            let start = match &args.start {
                Some(text) => {
                    let v = parse_floats(text, 3, "start point")?;
                    nilsystems::reduce_mod_lattice(HeisenbergElement::new(v[0], v[1], v[2]))
                }
                None => HeisenbergPoint {
                    x: 0.0,
                    y: 0.0,
                    z: 0.0,
                },
            };
            meta.push(format!(
                "# start: {},{},{}",
                fmt_f64(start.x),
                fmt_f64(start.y),
                fmt_f64(start.z)
            ));
            match args.mode {
                NilMode::Series => {
                    let series = nilsystems::birkhoff_series(
                        start,
                        |p| nilsystems::nil_step(*p, t),
                        |p| observable_of(p.x, p.y, Some(p.z), args.observable),
                        args.steps,
                    );
                    series.to_csv_birkhoff()
                }
                NilMode::Orbit => {
                    let orbit = nilsystems::heisenberg_orbit(start, t, args.steps);
                    let mut out = String::from("n,x,y,z\n");
                    for (i, p) in orbit.iter().enumerate() {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            i,
                            fmt_f64(p.x),
                            fmt_f64(p.y),
                            fmt_f64(p.z)
                        ));
                    }
                    out
                }
            }
        }
    };
    let text = format!("{}\n{}", meta.join("\n"), body);
    emit(&args.common, &text)?;
    Ok(0)
}

// ---------------------------------------------------------------- cube

fn cmd_cube(args: CubeArgs) -> anyhow::Result<u8> {
    if args.k == 0 {
        anyhow::bail!(CoreError::ZeroOrder);
    }
    let budget = budget_from(args.common.budget);
    let f = match &args.input {
        Some(_) => load_function(args.n, &args.input, &None, false, args.common.seed)?,
        None => load_function(args.n, &None, &None, true, args.common.seed)?,
    };
    let n = f.len();
    let sys = FiniteSystem::cyclic_rotation(n)?;
    let sf = SystemFunction::from_group_function(&f);

    let measure = cube::build_cube_measure(&sys, args.k, &budget)?;
    let direct = cube::seminorm_on(&measure, &sf)?;
    let recursive = cube::seminorm_recursive(&sys, &sf, args.k)?;
    let uniformity = match gowers::gowers_norm_closed(&f, args.k, &budget) {
        Ok(v) => Some(v),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e.into()),
    };
    let mut values = vec![direct, recursive];
    values.extend(uniformity);
    let max_delta = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .fold(0.0f64, f64::max);

    if let Some(path) = &args.dump_measure {
        fs::write(path, measure.to_csv())?;
    }

    let mut report = serde_json::Map::new();
    report.insert("N".into(), n.into());
    report.insert("k".into(), args.k.into());
    report.insert("support_size".into(), measure.support().len().into());
    report.insert("seminorm_joining".into(), direct.into());
    report.insert("seminorm_recursive".into(), recursive.into());
    if let Some(v) = uniformity {
        report.insert("uniformity_norm".into(), v.into());
    }
    report.insert("max_delta".into(), max_delta.into());
    report.insert("tolerance".into(), args.common.tol.into());
    report.insert("agree".into(), (max_delta <= args.common.tol).into());

    let text = match args.common.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let mut out = String::from("path,value\n");
            out.push_str(&format!("joining,{}\n", fmt_f64(direct)));
            out.push_str(&format!("recursive,{}\n", fmt_f64(recursive)));
            if let Some(v) = uniformity {
                out.push_str(&format!("uniformity,{}\n", fmt_f64(v)));
            }
            out.push_str(&format!("max_delta,{}\n", fmt_f64(max_delta)));
            out
        }
    };
    emit(&args.common, &text)?;
    Ok(0)
}

// ---------------------------------------------------------------- avg

fn parse_polys(text: &str) -> anyhow::Result<Vec<IntegerPolynomial>> {
    text.split(';')
        .map(|part| {
            let coeffs: Vec<i64> = part
                .split(',')
                .map(|c| c.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| anyhow::anyhow!("invalid polynomial '{}'", part))?;
            Ok(IntegerPolynomial::new(coeffs))
        })
        .collect()
}

fn cmd_avg(args: AvgArgs) -> anyhow::Result<u8> {
    let n = args.n;
    let sys = FiniteSystem::cyclic_rotation(n)?;
    let steps = args.steps.unwrap_or(n as u64);
    let mut rng = sampling::rng(args.common.seed);

    let run = match args.mode {
        AvgMode::Linear => {
            let fs: Vec<SystemFunction> = (0..args.k)
                .map(|_| sampling::bounded_system_function(&mut rng, n))
                .collect();
            averages::linear_average(&sys, &fs, steps, args.offset)?
        }
        AvgMode::Polynomial => {
            let polys = if let Some(preset) = args.preset {
                match preset {
                    PolyPreset::Fw1 => vec![
                        IntegerPolynomial::linear(1),
                        IntegerPolynomial::square(),
                    ],
                    PolyPreset::Fw2 => vec![
                        IntegerPolynomial::square(),
                        IntegerPolynomial::square_plus_n(),
                    ],
                }
            } else if let Some(text) = &args.polys {
                parse_polys(text)?
            } else {
                anyhow::bail!("polynomial mode needs --polys or --preset");
            };
            let fs: Vec<SystemFunction> = (0..polys.len())
                .map(|_| sampling::bounded_system_function(&mut rng, n))
                .collect();
            averages::polynomial_average(&sys, &fs, &polys, steps, args.offset)?
        }
        AvgMode::Cubic => {
            if args.k == 0 || args.k > 6 {
                anyhow::bail!("cubic mode needs 1 <= k <= 6");
            }
            let family: Vec<SystemFunction> = (0..(1usize << args.k) - 1)
                .map(|_| sampling::bounded_system_function(&mut rng, n))
                .collect();
            averages::cubic_average(&sys, &family, steps, args.offset)?
        }
    };

    emit(&args.common, &run.series.to_csv_average())?;
    Ok(0)
}

// ---------------------------------------------------------------- verify

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    if args.list {
        for name in verify::battery_names() {
            println!("{}", name);
        }
        return Ok(0);
    }
    if let Some(only) = &args.only {
        if !verify::battery_names().contains(&only.as_str()) {
            anyhow::bail!("unknown property '{}'; see `ergolab verify --list`", only);
        }
    }
    let cfg = VerifyConfig {
        seed: args.seed,
        quick: args.quick,
        tol_override: args.tol,
        only: args.only.clone(),
        budget: budget_from(args.budget),
    };
    let reports = verify::run_battery(&cfg);
    let mut failed = 0usize;
    for report in &reports {
        println!("{}", report.line());
        if !report.passed {
            failed += 1;
            println!("     {}", report.replay(&cfg));
        }
    }
    println!(
        "verify: {} properties, {} failed (seed {}{})",
        reports.len(),
        failed,
        cfg.seed,
        if cfg.quick { ", quick" } else { "" }
    );
    Ok(if failed == 0 { 0 } else { 1 })
}
