//! `scatter1d`: transfer matrices, spectral scans, approximations and
//! single-mode inverse design for potentials described in JSON.
//!
//! Exit codes: 0 success, 2 bad input, 3 solver failure,
//! 4 spectral singularity, 5 failed verification.

mod complex;
mod output;

use clap::{Args, Parser, Subcommand};
use complex::parse_complex;
use scatter1d::approx_engines::{born_first, dyson_order1, dyson_order2};
use scatter1d::inverse_design::{
    solve_single_mode, verify_amplitudes, write_profile_csv, BlockOptions, DesignOptions, DesignSpec, GapPolicy,
    DEFAULT_ALPHA_CAP, DEFAULT_VERIFY_TOL,
};
use scatter1d::numeric_engines::{transfer_matrix, Solver};
use scatter1d::schema::{potential_from_json, PotentialDocument, PotentialSpec, SCHEMA_VERSION};
use scatter1d::spectral_scan::{scan, Entry, ScanOptions, DEFAULT_ZERO_THRESHOLD};
use scatter1d::transfer_core::{amplitudes_from_matrix_with, classify, ScatteringData};
use scatter1d::{Potential, ScatterError, C64};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scatter1d", version, about = "One-dimensional scattering by complex finite-range potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transfer matrix and amplitudes at one wavenumber.
    Solve(SolveArgs),
    /// Sweep a wavenumber range and refine real zeros of the matrix entries.
    Scan(ScanArgs),
    /// Born and Dyson approximations against the reference solver.
    Approx(ApproxArgs),
    /// Build a potential with prescribed amplitudes at one wavenumber.
    Design(DesignArgs),
    /// Re-check a potential against target amplitudes.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Potential document; `-` reads stdin.
    #[arg(long)]
    spec: PathBuf,
    /// exact, dynamical, or auto (closed form when available).
    #[arg(long, default_value = "auto", value_parser = parse_solver)]
    solver: Solver,
    /// Tolerance of the dynamical engine.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    tol: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_positive)]
    k: f64,
    /// Zero threshold for classification, relative to the matrix max-norm.
    #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD, value_parser = parse_positive)]
    zero_tol: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_positive)]
    k_min: f64,
    #[arg(long, value_parser = parse_positive)]
    k_max: f64,
    /// Grid size; defaults to 512 points per unit of k·L.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ZERO_THRESHOLD, value_parser = parse_positive)]
    zero_tol: f64,
    /// Per-point CSV; stdout when neither this nor --output is given.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads for the grid.
    #[arg(long, env = "SCATTER1D_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_positive)]
    k: f64,
}

#[derive(Args)]
struct Targets {
    #[arg(long, value_parser = parse_positive)]
    k0: f64,
    /// Left reflection amplitude, `re,im` or `mag@deg`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    r_left: C64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    r_right: C64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    t: C64,
    /// Allowed max amplitude residual of the forward check.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOL, value_parser = parse_positive)]
    verify_tol: f64,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    targets: Targets,
    /// Winding number for every block; default picks the smallest with α below --alpha-cap.
    #[arg(long)]
    winding: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_ALPHA_CAP, value_parser = parse_positive)]
    alpha_cap: f64,
    /// Minimum gap between consecutive blocks.
    #[arg(long, default_value_t = 0.0)]
    min_gap: f64,
    /// Write the potential document here.
    #[arg(long)]
    out_spec: Option<PathBuf>,
    /// Write a sampled profile (x, Re v, Im v) here.
    #[arg(long)]
    out_profile: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    profile_points: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    targets: Targets,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    tol: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse().map_err(|e: ScatterError| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a finite positive number, got '{s}'")),
    }
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<ScatterError> for Failure {
    fn from(e: ScatterError) -> Self {
        let code = match &e {
            ScatterError::SpectralSingularity { .. } => 4,
            ScatterError::VerificationFailure(_) => 5,
            ScatterError::ZeroTransmission => {
                return Failure::input(format!("zero transmission unrealizable: {e}"));
            }
            ScatterError::Json(_)
            | ScatterError::InvalidInput(_)
            | ScatterError::InvalidPotential(_)
            | ScatterError::InvalidWavenumber(_)
            | ScatterError::UnreachableReflection { .. } => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn load_potential(path: &Path) -> Result<Potential, Failure> {
    let mut text = String::new();
    let read = if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map(|_| ())
    };
    read.map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    potential_from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::input(e.to_string()))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn document(p: &Potential) -> PotentialDocument {
    PotentialDocument { schema: SCHEMA_VERSION.into(), potential: PotentialSpec::from(p) }
}

#[derive(Serialize)]
struct SolveRecord {
    schema: &'static str,
    command: &'static str,
    k: f64,
    solver: Solver,
    #[serde(rename = "M")]
    matrix: scatter1d::TransferMatrix,
    #[serde(rename = "R_l")]
    r_left: Option<C64>,
    #[serde(rename = "R_r")]
    r_right: Option<C64>,
    #[serde(rename = "T")]
    t: Option<C64>,
    det_residual: f64,
    classification: Vec<&'static str>,
    cpa_ratio: Option<C64>,
}

fn cmd_solve(a: SolveArgs) -> Outcome {
    let p = load_potential(&a.common.spec)?;
    let solver = a.common.solver.resolve(&p);
    let m = transfer_matrix(&p, a.k, solver, a.common.tol)?;
    let cls = classify(&m, a.zero_tol);
    let data = if cls.spectral_singularity { None } else { amplitudes_from_matrix_with(&m, 0.0).ok() };
    let rec = SolveRecord {
        schema: SCHEMA_VERSION,
        command: "solve",
        k: a.k,
        solver,
        matrix: m,
        r_left: data.map(|d| d.r_left),
        r_right: data.map(|d| d.r_right),
        t: data.map(|d| d.t),
        det_residual: m.det_residual(),
        classification: cls.labels(),
        cpa_ratio: cls.cpa_ratio,
    };
    emit(&output::to_json(&rec), a.common.output.as_deref())?;
    if cls.spectral_singularity {
        eprintln!("spectral singularity at k = {}: amplitudes undefined", a.k);
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    schema: &'static str,
    command: &'static str,
    k_min: f64,
    k_max: f64,
    points: usize,
    solver: Solver,
    failed_points: usize,
    max_unitarity_violation: Option<f64>,
    singular_points: &'a [scatter1d::spectral_scan::ZeroReport],
}

fn cmd_scan(a: ScanArgs) -> Outcome {
    if a.k_min >= a.k_max {
        return Err(Failure::input(format!("k-min {} must be below k-max {}", a.k_min, a.k_max)));
    }
    if let Some(n) = a.threads {
        if n == 0 {
            return Err(Failure::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 3, message: e.to_string() })?;
    }
    let p = load_potential(&a.common.spec)?;
    let points = match a.points {
        Some(n) if n >= 2 => n,
        Some(n) => return Err(Failure::input(format!("--points must be at least 2, got {n}"))),
        None => {
            let (lo, hi) = p.support();
            let n = (512.0 * (a.k_max - a.k_min) * (hi - lo)).ceil();
            n.clamp(64.0, 200_000.0) as usize
        }
    };
    let solver = a.common.solver.resolve(&p);
    let opts = ScanOptions { solver, tol: a.common.tol, zero_threshold: a.zero_tol, refine: [true; 4] };
    let res = scan(&p, a.k_min, a.k_max, points, opts)?;
    let summary = ScanSummary {
        schema: SCHEMA_VERSION,
        command: "scan",
        k_min: a.k_min,
        k_max: a.k_max,
        points,
        solver,
        failed_points: res.points.iter().filter(|pt| pt.error.is_some()).count(),
        max_unitarity_violation: res.max_unitarity_violation,
        singular_points: &res.singular_points,
    };
    match (&a.csv, &a.common.output) {
        (None, None) => {
            res.write_csv(std::io::stdout().lock())?;
        }
        (csv, out) => {
            if let Some(path) = csv {
                let mut w = create(path)?;
                res.write_csv(&mut w)?;
                w.flush().map_err(|e| Failure::input(e.to_string()))?;
            }
            emit(&output::to_json(&summary), out.as_deref())?;
        }
    }
    for z in &res.singular_points {
        if z.entry == Entry::M22 {
            eprintln!("spectral singularity near k = {:.12}", z.k);
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ApproxEntry {
    method: &'static str,
    amplitudes: Option<ScatteringData>,
    /// Max amplitude distance from the reference.
    error: Option<f64>,
    failure: Option<String>,
}

#[derive(Serialize)]
struct ApproxRecord {
    schema: &'static str,
    command: &'static str,
    k: f64,
    reference_solver: Solver,
    reference: ScatteringData,
    approximations: Vec<ApproxEntry>,
}

fn cmd_approx(a: ApproxArgs) -> Outcome {
    let p = load_potential(&a.common.spec)?;
    let solver = a.common.solver.resolve(&p);
    let m = transfer_matrix(&p, a.k, solver, a.common.tol)?;
    let reference = amplitudes_from_matrix_with(&m, DEFAULT_ZERO_THRESHOLD)?;
    let runs: [(&'static str, scatter1d::Result<ScatteringData>); 3] = [
        ("born", born_first(&p, a.k)),
        ("dyson1", dyson_order1(&p, a.k).map(|r| r.data)),
        ("dyson2", dyson_order2(&p, a.k).map(|r| r.data)),
    ];
    let approximations = runs
        .into_iter()
        .map(|(method, r)| match r {
            Ok(d) => ApproxEntry { method, amplitudes: Some(d), error: Some(d.distance(&reference)), failure: None },
            Err(e) => ApproxEntry { method, amplitudes: None, error: None, failure: Some(e.to_string()) },
        })
        .collect();
    let rec = ApproxRecord { schema: SCHEMA_VERSION, command: "approx", k: a.k, reference_solver: solver, reference, approximations };
    emit(&output::to_json(&rec), a.common.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DesignRecord<'a> {
    schema: &'static str,
    command: &'static str,
    passed: bool,
    design: &'a scatter1d::inverse_design::SingleModeDesign,
    potential: PotentialDocument,
}

fn cmd_design(a: DesignArgs) -> Outcome {
    let t = &a.targets;
    let spec = DesignSpec::new(t.k0, t.r_left, t.r_right, t.t)?;
    let opts = DesignOptions {
        block: BlockOptions { winding: a.winding, alpha_cap: a.alpha_cap, verify_tol: t.verify_tol },
    };
    let design = solve_single_mode(&spec, &GapPolicy::Compact { min_gap: a.min_gap }, opts)?;
    let passed = design.matrix_residual <= 5.0 * t.verify_tol;
    let doc = document(&design.potential);
    if let Some(path) = &a.out_spec {
        emit(&output::to_json(&doc), Some(path))?;
    }
    if let Some(path) = &a.out_profile {
        let (lo, hi) = design.potential.support();
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let mut w = create(path)?;
        write_profile_csv(&design.potential, lo, hi, a.profile_points.max(2), &mut w)?;
        w.flush().map_err(|e| Failure::input(e.to_string()))?;
    }
    let rec = DesignRecord { schema: SCHEMA_VERSION, command: "design", passed, design: &design, potential: doc };
    emit(&output::to_json(&rec), a.output.as_deref())?;
    if !passed {
        return Err(Failure { code: 5, message: format!("matrix residual {:e} exceeds {:e}", design.matrix_residual, 5.0 * t.verify_tol) });
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyRecord {
    schema: &'static str,
    command: &'static str,
    k0: f64,
    passed: bool,
    verify_tol: f64,
    max_residual: f64,
    achieved: ScatteringData,
    target: ScatteringData,
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let p = load_potential(&a.spec)?;
    let t = &a.targets;
    let spec = DesignSpec::new(t.k0, t.r_left, t.r_right, t.t)?;
    let check = verify_amplitudes(&p, &spec, a.tol, t.verify_tol)?;
    let rec = VerifyRecord {
        schema: SCHEMA_VERSION,
        command: "verify",
        k0: t.k0,
        passed: check.passed,
        verify_tol: t.verify_tol,
        max_residual: check.max_residual,
        achieved: check.achieved,
        target: check.target,
    };
    emit(&output::to_json(&rec), a.output.as_deref())?;
    if !check.passed {
        eprintln!("verification failed: residual {:e} exceeds {:e}", check.max_residual, t.verify_tol);
        return Ok(ExitCode::from(5));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Design(a) => cmd_design(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
