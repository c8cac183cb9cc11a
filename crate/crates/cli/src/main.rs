//! Command-line harness: generators, formula checks, exact `c₁`, isometric
//! probes, assemblies and the lower-bound scan.
//!
//! Exit status is 0 when every asserted inequality holds, 1 when one fails
//! and 2 for usage, input or cap errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use twisted_l1::assembly::{
    corollary53_pipelines, pipeline_thm41, pipeline_thm51, pipeline_thm52, AssemblyOptions,
};
use twisted_l1::cutcone::{embed_isometric, exact_c1, sampled_c1, IsometricOutcome, EXACT_CUT_CAP};
use twisted_l1::gallery::{
    c1_growth_scan, concave_twisted_cube, equilateral_embedding, nr_gauges, nr_twisted_cube,
    stable_lowerbound_space, MAX_SCAN_K,
};
use twisted_l1::gauge::ConcaveGauge;
use twisted_l1::tableau::example64_tableau;
use twisted_l1::twisted::{
    build_twisted_union, check_cross_bounds, closed_form_concave, closed_form_nr, cross_distance_oracle, Layer,
};
use twisted_l1::{Error, FiniteMetricSpace, TwistedUnionSpec};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "twisted-l1", version, about = "Twisted unions of finite metrics and their L1 embeddings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Seed recorded in every artifact and used by sampled modes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file. Defaults to the output directory when set, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for outputs when `--out` is absent.
    #[arg(long, global = true, env = "TWISTED_L1_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Absolute tolerance for formula comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare closed forms and cross-distance bounds with shortest paths.
    VerifyFormulas {
        /// Grid such as `n=1..5;alpha=0.6,0.75,1;r=0.5,1,2`.
        #[arg(long, default_value = "n=1..5;alpha=0.6,0.75,1.0;r=0.5,1,2")]
        grid: String,
        /// Adds this amount to every closed-form value (harness self-test).
        #[arg(long, hide = true)]
        perturb: Option<f64>,
    },
    /// Exact minimal L1 distortion of a metric file.
    C1 {
        metric: PathBuf,
        /// Allow up to this many points using sampled cuts; the result is
        /// labeled UPPER_BOUND_ONLY.
        #[arg(long)]
        cap_override: Option<usize>,
        /// Random cuts drawn in sampled mode.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
    /// Isometric cut-cone membership with a separating inequality on failure.
    EmbedIsometric { metric: PathBuf },
    /// Assemble an explicit embedding of a twisted union spec.
    Assemble {
        spec: PathBuf,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        /// Multiply the first two components before assembly.
        #[arg(long)]
        rescale: Option<f64>,
        /// Basepoint index of M.
        #[arg(long)]
        basepoint: Option<usize>,
    },
    /// Exact c1 of the stable union for k = 2..=kmax with tableau limits (CSV).
    LowerboundScan {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
    /// Emit a named instance as JSON.
    Generate {
        #[command(subcommand)]
        what: Generate,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    #[value(name = "41")]
    T41,
    #[value(name = "51")]
    T51,
    #[value(name = "52")]
    T52,
    #[value(name = "corollary53")]
    Corollary53,
}

#[derive(Subcommand, Debug)]
enum Generate {
    /// Twisted Hamming cube with weights |x-y|^(1/2a) and |x-y|/r^(2a-1).
    NrCube {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        r: f64,
    },
    /// Twisted Hamming cube with clamped gauges given as JSON.
    ConcaveCube {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        omega0: String,
        #[arg(long)]
        omega1: String,
        #[arg(long)]
        r: f64,
    },
    /// Truncated stable union on 2k points.
    StableUnion {
        #[arg(long)]
        k: usize,
    },
    /// Equilateral metric, or its embedding with `--embedding`.
    Equilateral {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        embedding: bool,
    },
}

/// Artifact plus whether every asserted inequality held.
struct Output {
    name: &'static str,
    ext: &'static str,
    body: String,
    passed: bool,
}

fn stamp(mut v: Value, command: &str, common: &Common) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        map.insert("command".into(), json!(command));
        map.insert("seed".into(), json!(common.seed));
    }
    v
}

fn json_output(name: &'static str, value: Value, passed: bool) -> anyhow::Result<Output> {
    Ok(Output {
        name,
        ext: "json",
        body: serde_json::to_string_pretty(&value)? + "\n",
        passed,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Grid {
    n: Vec<usize>,
    alpha: Vec<f64>,
    r: Vec<f64>,
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow::anyhow!("{key}: {s:?}: {e}")))
        .collect()
}

fn parse_grid(raw: &str) -> anyhow::Result<Grid> {
    let mut grid = Grid {
        n: Vec::new(),
        alpha: Vec::new(),
        r: Vec::new(),
    };
    for part in raw.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("grid entry {part:?} is not key=value"))?;
        match key.trim() {
            "n" => {
                grid.n = match value.split_once("..") {
                    Some((a, b)) => (a.trim().parse()?..=b.trim().parse()?).collect(),
                    None => parse_list("n", value)?,
                }
            }
            "alpha" => grid.alpha = parse_list("alpha", value)?,
            "r" => grid.r = parse_list("r", value)?,
            other => bail!("unknown grid key {other:?}"),
        }
    }
    if grid.n.is_empty() || grid.alpha.is_empty() || grid.r.is_empty() {
        bail!("grid {raw:?} is empty in at least one of n, alpha, r");
    }
    if let Some(n) = grid.n.iter().find(|&&n| !(1..=5).contains(&n)) {
        bail!("grid dimension {n} outside 1..=5");
    }
    Ok(grid)
}

#[derive(Debug, Serialize)]
struct InstanceResult {
    n: usize,
    alpha: f64,
    r: f64,
    pairs: usize,
    max_formula_error: f64,
    /// First pair whose closed form misses the shortest-path value.
    formula_witness: Option<String>,
    max_cross_oracle_error: f64,
    cross_bound_violations: usize,
    cross_bound_witness: Option<(usize, usize)>,
    passed: bool,
    millis: u128,
}

fn verify_instance(n: usize, alpha: f64, r: f64, tol: f64, perturb: f64) -> anyhow::Result<InstanceResult> {
    let start = Instant::now();
    let spec = nr_twisted_cube(n, alpha, r)?;
    let space = build_twisted_union(&spec)?;
    let (w0, w1) = nr_gauges(alpha, r)?;
    let size = 1usize << n;
    let mut max_err = 0.0f64;
    let mut witness = None;
    let mut pairs = 0;
    for x in 0..size {
        for y in 0..size {
            let t = f64::from((x ^ y).count_ones());
            for a in [Layer::Zero, Layer::One] {
                for b in [Layer::Zero, Layer::One] {
                    if x == y && a == b {
                        continue;
                    }
                    let actual = space.d(x, a, y, b);
                    let nr = closed_form_nr(x as u64, a, y as u64, b, alpha, r)? + perturb;
                    let concave = closed_form_concave(t, a, b, &w0, &w1, r)? + perturb;
                    for value in [nr, concave] {
                        let err = (value - actual).abs();
                        if err > tol && witness.is_none() {
                            witness = Some(format!("({x},{a:?})-({y},{b:?}): {value} vs {actual}"));
                        }
                        max_err = max_err.max(err);
                    }
                    pairs += 1;
                }
            }
        }
    }
    let mut max_oracle = 0.0f64;
    for x in 0..size {
        for y in 0..size {
            let o = cross_distance_oracle(&spec, x, y).value;
            max_oracle = max_oracle.max((o - space.cross(x, y)).abs());
        }
    }
    let bounds = check_cross_bounds(&space);
    let violations = bounds.lemma34_violations.len() + bounds.lemma35_violations.len() + bounds.exact_violations.len();
    let bound_witness = bounds
        .lemma34_violations
        .iter()
        .chain(&bounds.lemma35_violations)
        .chain(&bounds.exact_violations)
        .next()
        .copied();
    Ok(InstanceResult {
        n,
        alpha,
        r,
        pairs,
        max_formula_error: max_err,
        passed: witness.is_none() && violations == 0 && max_oracle <= tol,
        formula_witness: witness,
        max_cross_oracle_error: max_oracle,
        cross_bound_violations: violations,
        cross_bound_witness: bound_witness,
        millis: start.elapsed().as_millis(),
    })
}

fn verify_formulas(common: &Common, grid: &str, perturb: Option<f64>) -> anyhow::Result<Output> {
    if !(common.tolerance >= f64::EPSILON) {
        bail!("tolerance {} is below machine epsilon", common.tolerance);
    }
    let grid = parse_grid(grid)?;
    let mut points: Vec<(usize, f64, f64)> = Vec::new();
    for &n in &grid.n {
        for &a in &grid.alpha {
            for &r in &grid.r {
                points.push((n, a, r));
            }
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(points.len());
    let tol = common.tolerance;
    let delta = perturb.unwrap_or(0.0);
    // grid points are split into interleaved shares; results are re-sorted
    let mut results: Vec<(usize, anyhow::Result<InstanceResult>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let points = &points;
                s.spawn(move || {
                    points
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, &(n, a, r))| (i, verify_instance(n, a, r, tol, delta)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    results.sort_by_key(|(i, _)| *i);
    let instances = results
        .into_iter()
        .map(|(_, r)| r)
        .collect::<anyhow::Result<Vec<_>>>()?;
    let passed = instances.iter().all(|i| i.passed);
    let failures = instances.iter().filter(|i| !i.passed).count();
    let report = json!({
        "config": { "grid": grid, "tolerance": tol, "perturb": perturb },
        "instances": instances,
        "failures": failures,
        "passed": passed,
    });
    json_output("verify-formulas", stamp(report, "verify-formulas", common), passed)
}

fn c1(common: &Common, path: &Path, cap_override: Option<usize>, samples: usize) -> anyhow::Result<Output> {
    let space: FiniteMetricSpace = read_json(path)?;
    let n = space.len();
    let cert = match cap_override {
        Some(cap) if n > EXACT_CUT_CAP => {
            if n > cap {
                return Err(Error::SizeCap { n, cap }.into());
            }
            sampled_c1(&space, samples, common.seed)?
        }
        _ => exact_c1(&space)?,
    };
    let mut v = serde_json::to_value(&cert)?;
    v["points"] = json!(n);
    v["input"] = json!(path.display().to_string());
    let passed = cert.is_finite();
    json_output("c1", stamp(v, "c1", common), passed)
}

fn embed(common: &Common, path: &Path) -> anyhow::Result<Output> {
    let space: FiniteMetricSpace = read_json(path)?;
    let outcome = embed_isometric(&space)?;
    let embeds = matches!(outcome, IsometricOutcome::Embeds(_));
    let mut v = serde_json::to_value(&outcome)?;
    if let Value::Object(map) = &mut v {
        map.insert("embeds".into(), json!(embeds));
    }
    json_output("embed-isometric", stamp(v, "embed-isometric", common), true)
}

fn assemble(
    common: &Common,
    path: &Path,
    theorem: TheoremArg,
    rescale: Option<f64>,
    basepoint: Option<usize>,
) -> anyhow::Result<Output> {
    let spec: TwistedUnionSpec = read_json(path)?;
    let opts = AssemblyOptions {
        basepoint,
        component_rescale: rescale,
        ..Default::default()
    };
    let (v, passed) = match theorem {
        TheoremArg::Corollary53 => {
            let cmp = corollary53_pipelines(&spec)?;
            (serde_json::to_value(&cmp)?, cmp.passed())
        }
        t => {
            let space = build_twisted_union(&spec)?;
            let a = match t {
                TheoremArg::T41 => pipeline_thm41(&space, &opts)?,
                TheoremArg::T51 => pipeline_thm51(&space, &opts)?,
                _ => pipeline_thm52(&space, &opts)?,
            };
            let passed = a.report.passed();
            let mut v = serde_json::to_value(&a.report)?;
            v["embedding"] = serde_json::to_value(&a.embedding)?;
            (v, passed)
        }
    };
    json_output("assemble", stamp(v, "assemble", common), passed)
}

fn lowerbound_scan(kmax: usize) -> anyhow::Result<Output> {
    if kmax > MAX_SCAN_K {
        return Err(Error::SizeCap { n: 2 * kmax, cap: 2 * MAX_SCAN_K }.into());
    }
    let rows = c1_growth_scan(kmax)?;
    let mut csv = String::from("schema_version,k,points,c1,tableau_S,tableau_L\n");
    let mut passed = true;
    let mut prev = 0.0f64;
    for row in &rows {
        let (s, l) = if row.k >= 3 {
            let t = example64_tableau(row.k)?.limits()?;
            passed &= t.s == 3.0 * t.l;
            (format!("{}", t.s), format!("{}", t.l))
        } else {
            (String::new(), String::new())
        };
        passed &= row.c1 >= prev - 1e-7 && row.c1 < 3.0;
        prev = prev.max(row.c1);
        writeln!(csv, "{SCHEMA_VERSION},{},{},{:.9},{s},{l}", row.k, row.points, row.c1)?;
    }
    Ok(Output {
        name: "lowerbound-scan",
        ext: "csv",
        body: csv,
        passed,
    })
}

fn generate(common: &Common, what: &Generate) -> anyhow::Result<Output> {
    let v = match what {
        Generate::NrCube { n, alpha, r } => {
            let spec = nr_twisted_cube(*n, *alpha, *r)?;
            stamp(serde_json::to_value(&spec)?, "generate nr-cube", common)
        }
        Generate::ConcaveCube { n, omega0, omega1, r } => {
            let w0: ConcaveGauge = serde_json::from_str(omega0).context("parsing --omega0")?;
            let w1: ConcaveGauge = serde_json::from_str(omega1).context("parsing --omega1")?;
            let spec = concave_twisted_cube(*n, &w0, &w1, *r)?;
            stamp(serde_json::to_value(&spec)?, "generate concave-cube", common)
        }
        Generate::StableUnion { k } => {
            let s = stable_lowerbound_space(*k)?;
            stamp(serde_json::to_value(s.metric())?, "generate stable-union", common)
        }
        Generate::Equilateral { k, c, embedding } => {
            let e = equilateral_embedding(*k, *c)?;
            let v = if *embedding {
                serde_json::to_value(&e)?
            } else {
                let m = FiniteMetricSpace::from_fn(e.labels().to_vec(), |_, _| *c)?;
                serde_json::to_value(&m)?
            };
            stamp(v, "generate equilateral", common)
        }
    };
    json_output("generate", v, true)
}

fn write_output(common: &Common, out: &Output) -> anyhow::Result<()> {
    let path = match (&common.out, &common.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir.join(format!("{}.{}", out.name, out.ext)))
        }
        (None, None) => None,
    };
    match path {
        Some(p) => fs::write(&p, &out.body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", out.body);
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let common = &cli.common;
    match &cli.command {
        Command::VerifyFormulas { grid, perturb } => verify_formulas(common, grid, *perturb),
        Command::C1 {
            metric,
            cap_override,
            samples,
        } => c1(common, metric, *cap_override, *samples),
        Command::EmbedIsometric { metric } => embed(common, metric),
        Command::Assemble {
            spec,
            theorem,
            rescale,
            basepoint,
        } => assemble(common, spec, *theorem, *rescale, *basepoint),
        Command::LowerboundScan { kmax } => lowerbound_scan(*kmax),
        Command::Generate { what } => generate(common, what),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| write_output(&cli.common, &out).map(|()| out.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: an asserted inequality failed; see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
