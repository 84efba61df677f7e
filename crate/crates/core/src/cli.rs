//! The `pluripot` command line: one subcommand per experiment, optional
//! JSON config overridden by flags. The primary artifact goes to stdout
//! unless `--out DIR` is given.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acceptance;
use crate::basis::{dims, MultiIndexBasis};
use crate::design::{optimal_measure, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::energy::{run_energy_case, EnergyCase, DEFAULT_EXTENT, DEFAULT_N};
use crate::error::{Error, Result};
use crate::experiments::{bvr, bvr_csv, BvrConfig};
use crate::fekete::{fekete_moments, fekete_search, moments_csv, tfd_table, tfd_csv, DEFAULT_MAX_PASSES};
use crate::geometry::{rat_to_f64, ConvexBody};
use crate::gram::GramSystem;
use crate::measure::{make_grid, DiscreteMeasure, GridSpec, Point, WeightSpec};
use crate::output::{csv, fmt_f64, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pluripot", version, about = "Weighted polynomial spaces on convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// `d_n`, `l_n` and `f_n` for `n = 1..=n_max`.
    Dims(Common),
    /// Discrete weighted Fekete points at degree `n`.
    Fekete(Common),
    /// Transfinite-diameter table `δ^{w,n}` for `n = 1..=n_max`.
    Tfd(Common),
    /// Gram matrix and log-determinant.
    Gram(Common),
    /// Bergman function on the grid or at points from `--z-file`.
    Bergman(Common),
    /// D-optimal (Kiefer–Wolfowitz) measure on the grid.
    Optimal(Common),
    /// Discrete mutual energy of a named case.
    Energy(Common),
    /// Ball-volume-ratio experiment from a JSON config.
    Bvr(Common),
    /// Runs every acceptance criterion and prints a pass/fail table.
    AllAcceptance(Common),
}

#[derive(Debug, Args, Default)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `simplex(d)`, `box(d)`, `interval(a,b)` or a JSON body file.
    #[arg(long)]
    body: Option<String>,
    /// Grid name such as `interval(-1,1,chebyshev,2000)` or JSON.
    #[arg(long)]
    grid: Option<String>,
    /// `zero`, `const(c)` or `quadratic(c)`.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long = "n-max")]
    n_max: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    #[arg(long = "max-passes")]
    max_passes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: `PLURIPOT_THREADS`, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Points for `bergman`: one per line, `re_1,im_1,...,re_d,im_d`.
    #[arg(long = "z-file")]
    z_file: Option<PathBuf>,
    /// Energy case: `interval-vs-torus`, `disk-vs-torus`, `torus-shift(c)`.
    #[arg(long)]
    case: Option<String>,
    /// Energy lattice size.
    #[arg(long = "N")]
    big_n: Option<usize>,
    /// Side length of the energy square.
    #[arg(long)]
    extent: Option<f64>,
}

/// Config file form of the common flags.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub body: Option<String>,
    pub grid: Option<serde_json::Value>,
    pub weight: Option<String>,
    pub n: Option<u64>,
    pub n_max: Option<u64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_passes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub z_file: Option<PathBuf>,
    pub case: Option<String>,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub extent: Option<f64>,
}

/// A failure tagged with the module/operation that raised it.
struct Failure {
    context: &'static str,
    error: Error,
}

trait Context<T> {
    fn ctx(self, context: &'static str) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<Error>> Context<T> for std::result::Result<T, E> {
    fn ctx(self, context: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure { context, error: e.into() })
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn missing(context: &'static str, what: &str) -> Failure {
    Failure { context, error: Error::InvalidParameter(format!("missing --{what}")) }
}

impl Common {
    /// Fills unset flags from `--config`.
    fn merge_config(mut self) -> CliResult<Self> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = fs::read_to_string(path).ctx("cli/config")?;
        let c: ExperimentConfig = serde_json::from_str(&text).ctx("cli/config")?;
        let grid = c.grid.map(|g| match g {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        });
        self.body = self.body.or(c.body);
        self.grid = self.grid.or(grid);
        self.weight = self.weight.or(c.weight);
        self.n = self.n.or(c.n);
        self.n_max = self.n_max.or(c.n_max);
        self.tol = self.tol.or(c.tol);
        self.max_iters = self.max_iters.or(c.max_iters);
        self.max_passes = self.max_passes.or(c.max_passes);
        self.seed = self.seed.or(c.seed);
        self.out = self.out.or(c.out);
        self.threads = self.threads.or(c.threads);
        self.z_file = self.z_file.or(c.z_file);
        self.case = self.case.or(c.case);
        self.big_n = self.big_n.or(c.big_n);
        self.extent = self.extent.or(c.extent);
        Ok(self)
    }

    fn body(&self) -> CliResult<ConvexBody> {
        let spec = self.body.as_deref().ok_or_else(|| missing("geometry/parse", "body"))?;
        if Path::new(spec).is_file() {
            let text = fs::read_to_string(spec).ctx("geometry/read")?;
            return ConvexBody::from_json(&text).ctx("geometry/from_json");
        }
        ConvexBody::from_name(spec).ctx("geometry/parse")
    }

    fn grid(&self) -> CliResult<DiscreteMeasure> {
        let spec = self.grid.as_deref().ok_or_else(|| missing("measures/parse", "grid"))?;
        make_grid(&GridSpec::parse(spec).ctx("measures/parse")?).ctx("measures/make_grid")
    }

    fn weight(&self) -> CliResult<WeightSpec> {
        WeightSpec::from_name(self.weight.as_deref().unwrap_or("zero")).ctx("measures/weight")
    }

    fn n(&self) -> CliResult<u64> {
        self.n.ok_or_else(|| missing("cli/args", "n"))
    }

    fn n_max(&self) -> CliResult<u64> {
        match self.n_max.or(self.n) {
            Some(0) => Err(Failure { context: "cli/args", error: Error::InvalidParameter("empty n-range".into()) }),
            Some(n) => Ok(n),
            None => Err(missing("cli/args", "n-max")),
        }
    }
}

/// Artifacts of one run: the primary one (printed when there is no
/// `--out`) and any extra files.
struct Artifacts {
    primary: (&'static str, String),
    extra: Vec<(&'static str, String)>,
}

impl Artifacts {
    fn one(name: &'static str, text: String) -> Self {
        Artifacts { primary: (name, text), extra: Vec::new() }
    }

    fn emit(&self, out: Option<&Path>) -> CliResult<()> {
        match out {
            None => {
                print!("{}", self.primary.1);
                if !self.primary.1.ends_with('\n') {
                    println!();
                }
            }
            Some(dir) => {
                fs::create_dir_all(dir).ctx("cli/write")?;
                for (name, text) in std::iter::once(&self.primary).chain(&self.extra) {
                    fs::write(dir.join(name), text).ctx("cli/write")?;
                }
            }
        }
        Ok(())
    }
}

fn points_csv(dim: usize, points: &[Point], extra: &[(&str, &[f64])]) -> String {
    let mut header: Vec<String> = (1..=dim).flat_map(|c| [format!("re_{c}"), format!("im_{c}")]).collect();
    header.extend(extra.iter().map(|(h, _)| h.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv(
        &header,
        points.iter().enumerate().map(|(i, p)| {
            let mut row: Vec<String> = p.iter().flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)]).collect();
            row.extend(extra.iter().map(|(_, col)| fmt_f64(col[i])));
            row
        }),
    )
}

fn read_points(path: &Path, dim: usize) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("re") {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1))))
            .collect::<Result<_>>()?;
        if nums.len() != 2 * dim {
            return Err(Error::DimensionMismatch { expected: 2 * dim, got: nums.len() });
        }
        points.push(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    Ok(points)
}

fn cmd_dims(a: &Common) -> CliResult<Artifacts> {
    let body = a.body()?;
    let rows = (1..=a.n_max()?).map(|n| dims(&body, n)).collect::<Result<Vec<_>>>().ctx("poly-basis/dims")?;
    Ok(Artifacts::one(
        "dims.csv",
        csv(
            &["n", "d_n", "l_n", "f_n"],
            rows.iter().map(|r| vec![r.n.to_string(), r.d_n.to_string(), r.l_n.to_string(), fmt_f64(rat_to_f64(&r.f_n))]),
        ),
    ))
}

fn cmd_fekete(a: &Common) -> CliResult<Artifacts> {
    let (body, grid, weight) = (a.body()?, a.grid()?, a.weight()?);
    let basis = MultiIndexBasis::new(&body, a.n()?).ctx("poly-basis/basis")?;
    let r = fekete_search(&grid, &weight, &basis, a.max_passes.unwrap_or(DEFAULT_MAX_PASSES)).ctx("vandermonde-fekete/fekete_search")?;
    let moments = fekete_moments(&r.points).ctx("vandermonde-fekete/moments")?;
    Ok(Artifacts {
        primary: ("fekete.json", to_json(&r)),
        extra: vec![("fekete_points.csv", points_csv(body.dim(), &r.points, &[])), ("moments.csv", moments_csv(&moments))],
    })
}

fn cmd_tfd(a: &Common) -> CliResult<Artifacts> {
    let (body, grid, weight) = (a.body()?, a.grid()?, a.weight()?);
    let rows = tfd_table(&body, &grid, &weight, a.n_max()?, a.max_passes.unwrap_or(DEFAULT_MAX_PASSES))
        .ctx("vandermonde-fekete/tfd_table")?;
    Ok(Artifacts::one("tfd.csv", tfd_csv(&rows)))
}

#[derive(Serialize)]
struct GramSummary {
    n: u64,
    d_n: usize,
    logdet: f64,
    logdet_scaled: f64,
    l_n: u64,
    jittered: bool,
    gram: Vec<Vec<[f64; 2]>>,
}

fn gram_system(a: &Common) -> CliResult<GramSystem> {
    let (body, grid, weight) = (a.body()?, a.grid()?, a.weight()?);
    let basis = MultiIndexBasis::new(&body, a.n()?).ctx("poly-basis/basis")?;
    let g = GramSystem::build(&basis, &grid, &weight).ctx("gram-bergman/gram")?;
    g.ensure_nondegenerate().ctx("gram-bergman/gram")?;
    Ok(g)
}

fn cmd_gram(a: &Common) -> CliResult<Artifacts> {
    let g = gram_system(a)?;
    let s = g.logdet_scaled().ctx("gram-bergman/logdet")?;
    let m = g.gram();
    let summary = GramSummary {
        n: g.basis().n(),
        d_n: g.basis().len(),
        logdet: g.logdet(),
        logdet_scaled: s.value,
        l_n: s.l_n,
        jittered: g.was_jittered(),
        gram: (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m.col(j)[i].re, m.col(j)[i].im]).collect()).collect(),
    };
    Ok(Artifacts::one("gram.json", to_json(&summary)))
}

fn cmd_bergman(a: &Common) -> CliResult<Artifacts> {
    let g = gram_system(a)?;
    let dim = g.basis().dim();
    let points = match &a.z_file {
        Some(path) => read_points(path, dim).ctx("gram-bergman/read_points")?,
        None => g.measure().points().to_vec(),
    };
    let b = g.bergman_at(&points, true).ctx("gram-bergman/bergman")?;
    let log_b: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    Ok(Artifacts::one("bergman.csv", points_csv(dim, &points, &[("B", &b), ("log_B", &log_b)])))
}

#[derive(Serialize)]
struct DesignSummary {
    d_n: usize,
    kw_gap: f64,
    logdet: f64,
    iterations: usize,
    converged: bool,
    support: usize,
}

fn cmd_optimal(a: &Common) -> CliResult<(Artifacts, bool)> {
    let (body, grid, weight) = (a.body()?, a.grid()?, a.weight()?);
    let basis = MultiIndexBasis::new(&body, a.n()?).ctx("poly-basis/basis")?;
    let r = optimal_measure(&grid, &weight, &basis, a.tol.unwrap_or(DEFAULT_TOL), a.max_iters.unwrap_or(DEFAULT_MAX_ITERS))
        .ctx("optimal-design/optimal_measure")?;
    let summary = DesignSummary {
        d_n: r.d_n,
        kw_gap: r.kw_gap,
        logdet: r.logdet,
        iterations: r.iterations,
        converged: r.converged,
        support: r.measure.len(),
    };
    Ok((
        Artifacts { primary: ("optimal.csv", r.to_csv(&grid)), extra: vec![("optimal.json", to_json(&summary))] },
        r.converged,
    ))
}

fn cmd_energy(a: &Common) -> CliResult<Artifacts> {
    let case = EnergyCase::from_name(a.case.as_deref().unwrap_or("interval-vs-torus")).ctx("extremal-energy/case")?;
    let r = run_energy_case(&case, a.big_n.unwrap_or(DEFAULT_N), a.extent.unwrap_or(DEFAULT_EXTENT))
        .ctx("extremal-energy/energy_1d")?;
    Ok(Artifacts::one("energy.json", to_json(&r)))
}

fn cmd_bvr(a: &Common) -> CliResult<Artifacts> {
    let path = a.config.as_ref().ok_or_else(|| missing("extremal-energy/bvr", "config"))?;
    let text = fs::read_to_string(path).ctx("extremal-energy/bvr")?;
    let config = BvrConfig::from_json(&text).ctx("extremal-energy/bvr")?;
    let rows = bvr(&config).ctx("extremal-energy/bvr")?;
    Ok(Artifacts::one("bvr.csv", bvr_csv(&rows)))
}

fn cmd_acceptance() -> (Artifacts, bool) {
    let reports = acceptance::run_all();
    let mut table = String::new();
    for r in &reports {
        table.push_str(&r.line());
        table.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    table.push_str(&format!("{passed}/{} criteria passed\n", reports.len()));
    (
        Artifacts { primary: ("acceptance.txt", table), extra: vec![("acceptance.json", to_json(&reports))] },
        passed == reports.len(),
    )
}

fn threads(requested: Option<usize>) -> CliResult<()> {
    let from_env = std::env::var("PLURIPOT_THREADS").ok().map(|s| s.trim().parse::<usize>());
    let n = match (requested, from_env) {
        (Some(n), _) => Some(n),
        (None, Some(Ok(n))) => Some(n),
        (None, Some(Err(e))) => {
            return Err(Failure { context: "cli/threads", error: Error::Parse(format!("PLURIPOT_THREADS: {e}")) })
        }
        (None, None) => None,
    };
    if let Some(n) = n {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(command: Command) -> CliResult<i32> {
    let (args, name) = match command {
        Command::Dims(a) => (a, "dims"),
        Command::Fekete(a) => (a, "fekete"),
        Command::Tfd(a) => (a, "tfd"),
        Command::Gram(a) => (a, "gram"),
        Command::Bergman(a) => (a, "bergman"),
        Command::Optimal(a) => (a, "optimal"),
        Command::Energy(a) => (a, "energy"),
        Command::Bvr(a) => (a, "bvr"),
        Command::AllAcceptance(a) => (a, "all-acceptance"),
    };
    let args = if name == "bvr" { args } else { args.merge_config()? };
    threads(args.threads)?;
    let mut code = EXIT_OK;
    let artifacts = match name {
        "dims" => cmd_dims(&args)?,
        "fekete" => cmd_fekete(&args)?,
        "tfd" => cmd_tfd(&args)?,
        "gram" => cmd_gram(&args)?,
        "bergman" => cmd_bergman(&args)?,
        "optimal" => {
            let (art, converged) = cmd_optimal(&args)?;
            if !converged {
                eprintln!("pluripot: optimal-design/optimal_measure: not converged within the iteration limit");
                code = EXIT_NUMERICAL;
            }
            art
        }
        "energy" => cmd_energy(&args)?,
        "bvr" => cmd_bvr(&args)?,
        _ => {
            let (art, all) = cmd_acceptance();
            if !all {
                code = EXIT_NUMERICAL;
            }
            art
        }
    };
    artifacts.emit(args.out.as_deref())?;
    Ok(code)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure { context, error }) => {
            eprintln!("pluripot: {context}: {error}");
            if error.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            }
        }
    }
}
