//! Command-line front end: solve, generate, compare, bench and spectrum.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 non-convergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{shift_bound, DEFAULT_RHO};
use crate::doubling::{self, RemedyPolicy, Solution, SolverConfig};
use crate::error::{Error, Result};
use crate::extract::{self, DensityKind, Dipoles, EigenResult};
use crate::matkernel::{self, c64, CMatrix, STRUCTURE_TOL};
use crate::oracle::{self, OracleMethod};
use crate::problem::{self, BseHamiltonian, GeneratorKind, GeneratorSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;

/// Reported `prec` floor; identical spectra would otherwise give `−∞`.
pub const PREC_FLOOR: f64 = -16.0;

pub const THREADS_ENV: &str = "BSE_DOUBLING_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bse-doubling", version, about = "Doubling eigensolver for Bethe-Salpeter Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Solve H x = λ x for H = [A, B; -conj(B), -conj(A)].
    Solve(SolveArgs),
    /// Write a test problem as two Matrix Market files.
    Generate(GenerateArgs),
    /// Compare the doubling solver against dense baselines.
    Compare(CompareArgs),
    /// Time the doubling solver against dense eig on random problems.
    Bench(BenchArgs),
    /// Broadened density of states or absorption from a solve output.
    Spectrum(SpectrumArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Generate(_) => "generate",
            Command::Compare(_) => "compare",
            Command::Bench(_) => "bench",
            Command::Spectrum(_) => "spectrum",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// Shift α: "auto" or a positive number.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Convergence tolerance on ‖E_k‖_F.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 60)]
    pub max_iter: u32,
    #[arg(long, default_value_t = 1e-8)]
    pub breakdown_tol: f64,
    #[arg(long, default_value = "auto")]
    pub remedy: RemedyPolicy,
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the Newton correction of the converged limit.
    #[arg(long)]
    pub no_refine: bool,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolverConfig> {
        let alpha = match self.alpha.as_str() {
            "auto" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("--alpha must be 'auto' or a number, got '{s}'")))?,
            ),
        };
        let cfg = SolverConfig {
            conv_tol: self.tol,
            max_iter: self.max_iter,
            breakdown_tol: self.breakdown_tol,
            remedy: self.remedy,
            beta: self.beta,
            kappa: self.kappa,
            seed: self.seed,
            rho: self.rho,
            alpha,
            refine: !self.no_refine,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub input_a: PathBuf,
    #[arg(long)]
    pub input_b: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Also write the 2n right eigenvectors (columns).
    #[arg(long)]
    pub vectors: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Order of A and B (ignored by fixture kinds).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kind: GeneratorKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal shift of A.
    #[arg(long, default_value_t = 0.0)]
    pub gap: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub out_a: PathBuf,
    #[arg(long)]
    pub out_b: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub input_a: PathBuf,
    #[arg(long)]
    pub input_b: PathBuf,
    /// Comma-separated subset of da, direct, pencil.
    #[arg(long, default_value = "da,direct,pencil")]
    pub methods: String,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 60)]
    pub max_iter: u32,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Comma-separated problem orders.
    #[arg(long, default_value = "16,32,64")]
    pub sizes: String,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal shift of A; defaults to 4√n.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// JSON written by `solve`.
    #[arg(long)]
    pub eigs: PathBuf,
    #[arg(long, default_value = "dos")]
    pub kind: DensityKind,
    /// Gaussian width; defaults to the spectral extent / 200.
    #[arg(long)]
    pub broadening: Option<f64>,
    /// Frequency grid lo:step:hi; defaults to 2001 points over 1.5× the extent.
    #[arg(long)]
    pub grid: Option<String>,
    /// Matrix Market 2n×2 array holding d_r and d_l as columns.
    #[arg(long)]
    pub dipoles: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub bse_doubling: &'static str,
    pub faer: &'static str,
}

/// Provenance written under `"manifest"`. Wall-clock figures live only under
/// `timing` so the rest of the output is reproducible byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub flags: serde_json::Value,
    pub seed: u64,
    pub versions: Versions,
    pub threads: usize,
    pub timing: BTreeMap<String, f64>,
    pub events: Vec<EventRecord>,
}

impl RunManifest {
    fn new(cmd: &Command, seed: u64, threads: usize) -> Self {
        RunManifest {
            command: cmd.name(),
            flags: serde_json::to_value(cmd).unwrap_or(serde_json::Value::Null),
            seed,
            versions: Versions {
                bse_doubling: env!("CARGO_PKG_VERSION"),
                faer: "0.24",
            },
            threads,
            timing: BTreeMap::new(),
            events: Vec::new(),
        }
    }
}

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Clock(Instant::now())
    }

    fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<c64> for ComplexRecord {
    fn from(z: c64) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for c64 {
    fn from(z: ComplexRecord) -> Self {
        c64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EventRecord {
    pub k: u32,
    pub kind: doubling::EventKind,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub manifest: RunManifest,
    pub n: usize,
    pub alpha: f64,
    pub iterations: u32,
    pub converged: bool,
    pub regime: doubling::Regime,
    pub events: Vec<EventRecord>,
    pub eigenvalues: Vec<ComplexRecord>,
    /// Decomposition residual; `null` when extraction failed.
    pub residual: Option<f64>,
    pub rayleigh_residual: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<ComplexRecord>>>,
}

/// The parts of a solve output needed to rebuild spectra.
#[derive(Debug, Deserialize)]
pub struct EigsFile {
    pub eigenvalues: Vec<ComplexRecord>,
    #[serde(default)]
    pub eigenvectors: Option<Vec<Vec<ComplexRecord>>>,
}

impl EigsFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn into_result(self) -> Result<EigenResult> {
        let values: Vec<c64> = self.eigenvalues.into_iter().map(c64::from).collect();
        let vectors = match self.eigenvectors {
            None => matkernel::zeros(values.len(), 0),
            Some(cols) => {
                let dim = values.len();
                if cols.len() != dim || cols.iter().any(|c| c.len() != dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "eigenvectors must be {dim} columns of length {dim}"
                    )));
                }
                CMatrix::from_fn(dim, dim, |i, j| cols[j][i].into())
            }
        };
        EigenResult::from_full(values, vectors)
    }
}

/// Outcome of one solve: either fully converged or a partial result.
pub struct SolveRun {
    pub solution: Solution,
    pub converged: bool,
    pub result: Option<EigenResult>,
    pub residuals: Option<extract::ResidualReport>,
}

/// Run the solver and extract eigenpairs, keeping partial output on non-convergence.
pub fn solve_problem(p: &BseHamiltonian, cfg: &SolverConfig) -> Result<SolveRun> {
    let (solution, converged) = match doubling::run(p, cfg) {
        Ok(s) => (s, true),
        Err(Error::NotConverged(s)) => (*s, false),
        Err(e) => return Err(e),
    };
    let result = extract::eigenpairs(p, &solution.report.f_limit).ok();
    let residuals = result.as_ref().and_then(|r| extract::residuals(p, r, None).ok());
    Ok(SolveRun {
        solution,
        converged,
        result,
        residuals,
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn records(m: &CMatrix) -> Vec<Vec<ComplexRecord>> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].into()).collect()).collect()
}

fn cmd_solve(cmd: &Command, args: &SolveArgs, threads: usize) -> Result<u8> {
    let cfg = args.solver.config()?;
    let mut manifest = RunManifest::new(cmd, cfg.seed, threads);
    let clock = Clock::start();
    let p = problem::load_mtx(&args.input_a, &args.input_b, STRUCTURE_TOL)?;
    manifest.timing.insert("load_ms".into(), clock.ms());

    let clock = Clock::start();
    let run = solve_problem(&p, &cfg)?;
    manifest.timing.insert("solve_ms".into(), clock.ms());

    let report = &run.solution.report;
    let events: Vec<EventRecord> = report
        .events
        .iter()
        .map(|e| EventRecord {
            k: e.k,
            kind: e.kind,
            detail: e.detail.clone(),
        })
        .collect();
    manifest.events = events.clone();
    let mut warnings = report.warnings.clone();
    if run.result.is_none() {
        warnings.push("eigenvalue extraction failed".into());
    }
    let out = SolveOutput {
        n: p.n(),
        alpha: report.alpha(),
        iterations: report.iterations,
        converged: run.converged,
        regime: report.regime,
        events,
        eigenvalues: run
            .result
            .as_ref()
            .map(|r| r.full_values.iter().map(|&z| z.into()).collect())
            .unwrap_or_default(),
        residual: run.residuals.map(|r| r.decomposition_residual),
        rayleigh_residual: run.residuals.map(|r| r.rayleigh_residual),
        warnings,
        eigenvectors: match (&run.result, args.vectors) {
            (Some(r), true) => Some(records(&r.right_vectors)),
            _ => None,
        },
        manifest,
    };
    write_json(Some(&args.output), &out)?;
    if run.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "bse-doubling: not converged after {} iterations (results written to {})",
            report.iterations,
            args.output.display()
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let n = if args.kind.is_fixture() {
        if args.n.is_some() {
            eprintln!("bse-doubling: warning: --n is ignored for kind {}", args.kind);
        }
        0
    } else {
        args.n
            .ok_or_else(|| Error::InvalidArgument(format!("--n is required for kind {}", args.kind)))?
    };
    let spec = GeneratorSpec::new(args.kind, n, args.seed)
        .with_gap(args.gap)
        .with_scale(args.scale);
    let p = problem::generate(&spec)?;
    problem::save_mtx(&p, &args.out_a, &args.out_b, &[spec.describe()])?;
    Ok(EXIT_OK)
}

#[derive(Debug, Default, Serialize)]
pub struct MethodSummary {
    /// Mean over trials of `prec` against the direct baseline, floored at −16.
    pub prec: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_trials: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct CompareOutput {
    pub manifest: RunManifest,
    pub n: usize,
    pub trials: usize,
    /// Shift drawn for each doubling trial.
    pub alphas: Vec<f64>,
    pub methods: BTreeMap<String, MethodSummary>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CompareMethod {
    Da,
    Oracle(OracleMethod),
}

impl CompareMethod {
    fn name(self) -> &'static str {
        match self {
            CompareMethod::Da => "da",
            CompareMethod::Oracle(m) => m.as_str(),
        }
    }
}

fn parse_methods(s: &str) -> Result<Vec<CompareMethod>> {
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m = match t {
            "da" => CompareMethod::Da,
            other => CompareMethod::Oracle(other.parse()?),
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("--methods is empty".into()));
    }
    Ok(out)
}

fn floor_prec(p: f64) -> f64 {
    p.max(PREC_FLOOR)
}

fn cmd_compare(cmd: &Command, args: &CompareArgs, threads: usize) -> Result<u8> {
    if args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let methods = parse_methods(&args.methods)?;
    let mut manifest = RunManifest::new(cmd, args.seed, threads);
    let p = problem::load_mtx(&args.input_a, &args.input_b, STRUCTURE_TOL)?;
    let baseline = oracle::eig_direct(&p)?;
    let bound = shift_bound(&p, args.rho);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut alphas = Vec::new();
    let mut warnings = Vec::new();
    let mut summaries: BTreeMap<String, MethodSummary> = BTreeMap::new();
    let mut elapsed: BTreeMap<String, f64> = BTreeMap::new();
    let t = args.trials as f64;

    for trial in 0..args.trials {
        for &m in &methods {
            let clock = Clock::start();
            let (values, residual, iterations) = match m {
                CompareMethod::Da => {
                    let alpha = rng.random_range(bound..2.0 * bound);
                    alphas.push(alpha);
                    let cfg = SolverConfig {
                        conv_tol: args.tol,
                        max_iter: args.max_iter,
                        rho: args.rho,
                        seed: args.seed.wrapping_add(trial as u64),
                        alpha: Some(alpha),
                        ..SolverConfig::default()
                    };
                    let run = solve_problem(&p, &cfg)?;
                    if !run.converged {
                        warnings.push(format!("trial {trial}: doubling did not converge"));
                    }
                    let values = run.result.map(|r| r.full_values).unwrap_or_default();
                    let residual = run.residuals.map_or(f64::INFINITY, |r| r.decomposition_residual);
                    let summary = summaries.entry(m.name().into()).or_default();
                    *summary.converged_trials.get_or_insert(0) += usize::from(run.converged);
                    (values, residual, Some(run.solution.report.iterations))
                }
                CompareMethod::Oracle(method) => {
                    let r = oracle::eig_oracle(&p, method)?;
                    let residual = r.residual(&p);
                    (r.values, residual, None)
                }
            };
            *elapsed.entry(m.name().into()).or_default() += clock.ms() / t;
            let prec = if values.is_empty() {
                0.0
            } else {
                floor_prec(oracle::prec(&baseline.values, &values)?)
            };
            let summary = summaries.entry(m.name().into()).or_default();
            summary.prec += prec / t;
            summary.residual += residual / t;
            if let Some(it) = iterations {
                *summary.iterations.get_or_insert(0.0) += it as f64 / t;
            }
        }
    }
    for (name, ms) in elapsed {
        manifest.timing.insert(format!("{name}.eTime_ms"), ms);
    }
    let any_failed = summaries
        .get("da")
        .and_then(|s| s.converged_trials)
        .is_some_and(|c| c < args.trials);
    let out = CompareOutput {
        manifest,
        n: p.n(),
        trials: args.trials,
        alphas,
        methods: summaries,
        warnings,
    };
    write_json(args.output.as_deref(), &out)?;
    Ok(if any_failed { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub trials: usize,
    pub converged_trials: usize,
    pub iterations_mean: f64,
    pub iterations_max: u32,
    /// Worst `prec` of the doubling spectrum against dense eig, floored at −16.
    pub prec_worst: f64,
    pub residual_worst: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchOutput {
    pub manifest: RunManifest,
    pub rows: Vec<BenchRow>,
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidArgument(format!("bad size '{t}' in --sizes")))
        })
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("--sizes is empty".into()));
    }
    Ok(sizes)
}

fn cmd_bench(cmd: &Command, args: &BenchArgs, threads: usize) -> Result<u8> {
    if args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let sizes = parse_sizes(&args.sizes)?;
    let mut manifest = RunManifest::new(cmd, args.seed, threads);
    let mut rows = Vec::new();
    let mut all_converged = true;
    for n in sizes {
        let gap = args.gap.unwrap_or(4.0 * (n as f64).sqrt());
        let (mut da_ms, mut eig_ms) = (0.0, 0.0);
        let mut row = BenchRow {
            n,
            trials: args.trials,
            converged_trials: 0,
            iterations_mean: 0.0,
            iterations_max: 0,
            prec_worst: PREC_FLOOR,
            residual_worst: 0.0,
        };
        for trial in 0..args.trials {
            let spec = GeneratorSpec::new(GeneratorKind::RandomComplex, n, args.seed.wrapping_add(trial as u64)).with_gap(gap);
            let p = problem::generate(&spec)?;
            let clock = Clock::start();
            let run = solve_problem(&p, &SolverConfig::default())?;
            da_ms += clock.ms();
            let clock = Clock::start();
            let reference = oracle::eig_direct(&p)?;
            eig_ms += clock.ms();

            let it = run.solution.report.iterations;
            row.converged_trials += usize::from(run.converged);
            row.iterations_mean += it as f64 / args.trials as f64;
            row.iterations_max = row.iterations_max.max(it);
            match (&run.result, run.residuals) {
                (Some(r), Some(res)) => {
                    row.prec_worst = row.prec_worst.max(floor_prec(oracle::prec(&reference.values, &r.full_values)?));
                    row.residual_worst = row.residual_worst.max(res.decomposition_residual);
                }
                _ => row.residual_worst = f64::INFINITY,
            }
        }
        all_converged &= row.converged_trials == row.trials;
        let t = args.trials as f64;
        manifest.timing.insert(format!("n{n}.da_ms"), da_ms / t);
        manifest.timing.insert(format!("n{n}.eig_ms"), eig_ms / t);
        rows.push(row);
    }
    write_json(args.output.as_deref(), &BenchOutput { manifest, rows })?;
    Ok(if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn read_dipoles(path: &Path, dim: usize) -> Result<Dipoles> {
    let m = problem::read_mtx(path)?.matrix;
    if m.nrows() != dim || m.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "{}: dipoles must be {dim}×2, got {}×{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Dipoles {
        d_r: (0..dim).map(|i| m[(i, 0)]).collect(),
        d_l: (0..dim).map(|i| m[(i, 1)]).collect(),
    })
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<u8> {
    let result = EigsFile::read(&args.eigs)?.into_result()?;
    let dipoles = match (&args.dipoles, args.kind) {
        (Some(p), _) => Some(read_dipoles(p, result.full_values.len())?),
        (None, DensityKind::Absorption) => return Err(Error::MissingDipoles),
        (None, DensityKind::Dos) => None,
    };
    let grid = match &args.grid {
        Some(g) => extract::parse_grid(g)?,
        None => extract::covering_grid(&result.full_values, 1.5, 2001),
    };
    let broadening = args
        .broadening
        .unwrap_or_else(|| extract::default_broadening(&result.full_values));
    let density = extract::spectral_density(&result, &grid, broadening, args.kind, dipoles.as_ref())?;
    let csv = density.to_csv();
    match &args.output {
        Some(p) => fs::write(p, csv).map_err(|e| Error::io(p, e))?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

/// Kernel thread count from [`THREADS_ENV`]; unset means sequential.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a nonnegative integer, got '{s}'"))),
    }
}

pub fn execute(cli: &Cli) -> Result<u8> {
    let threads = threads_from_env()?;
    matkernel::set_threads(threads);
    let cmd = &cli.command;
    match cmd {
        Command::Solve(a) => cmd_solve(cmd, a, threads),
        Command::Generate(a) => cmd_generate(a),
        Command::Compare(a) => cmd_compare(cmd, a, threads),
        Command::Bench(a) => cmd_bench(cmd, a, threads),
        Command::Spectrum(a) => cmd_spectrum(a),
    }
}

/// Parse `args` (including the program name) and run. Usage errors exit 1.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bse-doubling: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_flag() {
        let cli = Cli::try_parse_from(["x", "solve", "--input-a", "a", "--input-b", "b", "--output", "o"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        assert_eq!(a.solver.config().unwrap().alpha, None);
        assert_eq!(a.solver.rho, DEFAULT_RHO);
        let cli = Cli::try_parse_from(["x", "solve", "--input-a", "a", "--input-b", "b", "--output", "o", "--alpha", "1.5"])
            .unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        assert_eq!(a.solver.config().unwrap().alpha, Some(1.5));
        let cli = Cli::try_parse_from(["x", "solve", "--input-a", "a", "--input-b", "b", "--output", "o", "--alpha", "big"])
            .unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        assert!(matches!(a.solver.config(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn remedy_and_kind_parse() {
        assert!(Cli::try_parse_from(["x", "solve", "--input-a", "a", "--input-b", "b", "--output", "o", "--remedy", "nope"]).is_err());
        assert!(Cli::try_parse_from(["x", "generate", "--kind", "mystery", "--out-a", "a", "--out-b", "b"]).is_err());
        assert!(Cli::try_parse_from(["x", "generate", "--kind", "breakdown-fixture", "--out-a", "a", "--out-b", "b"]).is_ok());
    }

    #[test]
    fn method_and_size_lists() {
        assert_eq!(
            parse_methods("da, pencil,da").unwrap(),
            vec![CompareMethod::Da, CompareMethod::Oracle(OracleMethod::Pencil)]
        );
        assert!(parse_methods("qr").is_err());
        assert!(parse_methods("").is_err());
        assert_eq!(parse_sizes("4,8").unwrap(), vec![4, 8]);
        assert!(parse_sizes("4,0").is_err());
    }

    #[test]
    fn manifest_flags_are_flat() {
        let cli = Cli::try_parse_from(["x", "solve", "--input-a", "a", "--input-b", "b", "--output", "o"]).unwrap();
        let m = RunManifest::new(&cli.command, 0, 1);
        assert_eq!(m.command, "solve");
        assert_eq!(m.flags["remedy"], "auto");
        assert_eq!(m.flags["max_iter"], 60);
        assert_eq!(m.flags["input_a"], "a");
    }

    #[test]
    fn prec_floor() {
        assert_eq!(floor_prec(f64::NEG_INFINITY), PREC_FLOOR);
        assert_eq!(floor_prec(-3.0), -3.0);
    }
}
