//! Command-line front end: computes curvature invariants of slant-submanifold
//! instance files, verifies the sharp delta-Casorati bounds, sweeps random
//! instances, builds equality cases, and inspects the proof machinery.
//!
//! Exit codes: 0 success, 2 input error, 3 internal invariant failure,
//! 4 bound violation.

mod io;
mod reports;

use casorati::casorati_delta::{
    delta_from_extremes, hyperplane_extremes, oracle_extremum, ExtremizeConfig, ExtremumKind,
};
use casorati::invariants::{casorati as casorati_curvature, scalar_two_route, InvariantReport};
use casorati::slant_model::random_instance;
use casorati::verifier::{
    build_equality_instance, check_bound_with_extremes, hessian_spectrum, solve_critical_system,
    BoundRequest, CheckOptions,
};
use casorati::{CasoratiError, DeltaConvention};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use io::InstanceFile;
use reports::*;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unparsable files, invalid parameters. Exit code 2.
    Input(String),
    /// A library-level consistency check failed. Exit code 3.
    Internal(String),
    /// The verified bound was violated beyond tolerance. Exit code 4.
    Violation(String),
}

impl From<CasoratiError> for CliError {
    fn from(err: CasoratiError) -> Self {
        match err {
            CasoratiError::InternalCheck(msg) => CliError::Internal(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
            CliError::Violation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) | CliError::Violation(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "casorati",
    version,
    about = "Curvature invariants and sharp delta-Casorati bounds for slant submanifolds of quaternionic space forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ConventionArg {
    /// delta_c coefficient (n+1)/(2n), consistent with the generalized family
    #[default]
    Standard,
    /// older delta_c coefficient (n+1)/(2n(n-1))
    Legacy,
}

impl From<ConventionArg> for DeltaConvention {
    fn from(value: ConventionArg) -> Self {
        match value {
            ConventionArg::Standard => DeltaConvention::Standard,
            ConventionArg::Legacy => DeltaConvention::Legacy,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum BoundArg {
    /// delta_C(r; n-1) or hat delta_C(r; n-1), chosen by r
    #[default]
    Generalized,
    /// delta_c(n-1)
    NormalizedInf,
    /// hat delta_c(n-1)
    NormalizedSup,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum, PartialEq)]
enum FormatArg {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compute tau, rho, ||H||^2, Casorati curvature and inf/sup C(L)
    Invariants {
        /// Instance file (JSON)
        instance: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Report destination (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the curvature bound for parameter r, with equality classification
    Check {
        instance: PathBuf,
        /// Positive parameter of the generalized bound; r = n(n-1) is excluded
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value_t)]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value_t)]
        bound: BoundArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Relative equality-detection threshold [default: 1e-9]
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the bound over a grid of random instances
    Sweep {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Curvature constants, comma separated
        #[arg(
            long = "c-list",
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-4,0,4"
        )]
        c_list: Vec<f64>,
        /// Slant angles in radians, comma separated
        #[arg(
            long = "theta-grid",
            value_delimiter = ',',
            default_values_t = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3]
        )]
        theta_grid: Vec<f64>,
        /// Bound parameters, comma separated
        #[arg(long = "r-grid", value_delimiter = ',', default_value = "2,6,11,18,30")]
        r_grid: Vec<f64>,
        /// Number of random instances
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the proof machinery: critical system and Hessian spectrum
    Proof {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an equality-case instance file for parameter r
    Equality {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: f64,
        /// Common diagonal value of the shape operator
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        /// Slant angle of the emitted instance [default: pi/4]
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        /// Curvature constant of the emitted instance
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the sphere optimizer against the brute-force grid oracle
    OracleCompare {
        instance: PathBuf,
        /// Points per angle in the oracle's global grid
        #[arg(long, default_value_t = 24)]
        resolution: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Seed precedence: --seed flag, then CASORATI_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("CASORATI_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Invariants {
            instance,
            seed,
            out,
        } => cmd_invariants(&instance, seed, out.as_deref()),
        Command::Check {
            instance,
            r,
            convention,
            bound,
            seed,
            tolerance,
            out,
        } => cmd_check(
            &instance,
            r,
            convention,
            bound,
            seed,
            tolerance,
            out.as_deref(),
        ),
        Command::Sweep {
            n,
            m,
            c_list,
            theta_grid,
            r_grid,
            count,
            amplitude,
            seed,
            format,
            out,
        } => cmd_sweep(SweepParams {
            n,
            m,
            c_list,
            theta_grid,
            r_grid,
            count,
            amplitude,
            seed: resolve_seed(seed),
            format,
            out,
        }),
        Command::Proof { n, r, out } => cmd_proof(n, r, out.as_deref()),
        Command::Equality {
            n,
            m,
            r,
            a,
            theta,
            c,
            out,
        } => cmd_equality(n, m, r, a, theta, c, out.as_deref()),
        Command::OracleCompare {
            instance,
            resolution,
            seed,
            out,
        } => cmd_oracle_compare(&instance, resolution, seed, out.as_deref()),
    }
}

/// Internal consistency of a freshly computed invariant report.
fn verify_report_invariants(
    inst: &casorati::SlantInstance,
    report: &InvariantReport,
) -> Result<(), CliError> {
    scalar_two_route(inst).map_err(CliError::from)?;
    let n = inst.tangent_dim() as f64;
    let scale = 1.0 + report.h_norm_sq.abs();
    if (report.h_norm_sq - n * report.casorati).abs() > 1e-12 * scale {
        return Err(CliError::Internal(
            "h_norm_sq does not equal n * casorati".into(),
        ));
    }
    let rho = 2.0 * report.tau / (n * (n - 1.0));
    if (report.rho - rho).abs() > 1e-12 * (1.0 + rho.abs()) {
        return Err(CliError::Internal(
            "rho does not match 2 tau / n(n-1)".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct InvariantsBody {
    input: InstanceFile,
    invariants: InvariantsJson,
    extremes: Vec<ExtremumJson>,
}

fn cmd_invariants(
    path: &std::path::Path,
    seed: Option<u64>,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = resolve_seed(seed);
    let file = InstanceFile::read(path)?;
    let inst = file.to_instance()?;
    let report = InvariantReport::compute(&inst);
    verify_report_invariants(&inst, &report)?;
    let extremes = hyperplane_extremes(inst.sff(), seed, &ExtremizeConfig::default())?;
    let body = InvariantsBody {
        input: file,
        invariants: InvariantsJson::from(&report),
        extremes: vec![
            ExtremumJson::from(&extremes.inf),
            ExtremumJson::from(&extremes.sup),
        ],
    };
    io::emit(&Envelope::new("invariants", seed, started, body), out)
}

#[derive(Serialize)]
struct CheckBody {
    input: InstanceFile,
    tolerance: f64,
    invariants: InvariantsJson,
    delta: DeltaJson,
    verification: VerificationJson,
}

fn cmd_check(
    path: &std::path::Path,
    r: f64,
    convention: ConventionArg,
    bound: BoundArg,
    seed: Option<u64>,
    tolerance: Option<f64>,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = resolve_seed(seed);
    let file = InstanceFile::read(path)?;
    let inst = file.to_instance()?;
    let options = CheckOptions {
        equality_tol: tolerance.unwrap_or(casorati::verifier::EQUALITY_TOL),
        extremize: ExtremizeConfig::default(),
    };
    let request = match bound {
        BoundArg::Generalized => BoundRequest::Generalized { r },
        BoundArg::NormalizedInf => BoundRequest::NormalizedInf,
        BoundArg::NormalizedSup => BoundRequest::NormalizedSup,
    };
    let report = InvariantReport::compute(&inst);
    verify_report_invariants(&inst, &report)?;
    let extremes = hyperplane_extremes(inst.sff(), seed, &options.extremize)?;
    let verification = check_bound_with_extremes(&inst, request, &extremes, &options)?;
    // The convention flag only affects the reported delta values; the bound
    // itself is always evaluated with the standard coefficient.
    let delta = delta_from_extremes(
        inst.tangent_dim(),
        casorati_curvature(inst.sff()),
        &extremes,
        verification.r,
        convention.into(),
    )?;
    if !verification.proper {
        eprintln!(
            "note: theta = {} is non-proper, outside the theorem's hypothesis",
            inst.theta()
        );
    }
    let slack = verification.slack;
    let body = CheckBody {
        input: file,
        tolerance: options.equality_tol,
        invariants: InvariantsJson::from(&report),
        delta: DeltaJson::from(&delta),
        verification: VerificationJson::from(&verification),
    };
    io::emit(&Envelope::new("check", seed, started, body), out)?;
    if slack < -options.equality_tol {
        return Err(CliError::Violation(format!(
            "bound violated: slack = {slack:.3e}"
        )));
    }
    Ok(())
}

struct SweepParams {
    n: usize,
    m: usize,
    c_list: Vec<f64>,
    theta_grid: Vec<f64>,
    r_grid: Vec<f64>,
    count: usize,
    amplitude: f64,
    seed: u64,
    format: FormatArg,
    out: Option<PathBuf>,
}

#[derive(Serialize, Clone)]
struct SweepRecord {
    index: usize,
    seed: u64,
    c: f64,
    theta: f64,
    r: f64,
    status: String,
    proper: Option<bool>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    slack: Option<f64>,
    equality_detected: Option<bool>,
}

#[derive(Serialize)]
struct SweepSummary {
    instances: usize,
    records: usize,
    errors: usize,
    min_slack: Option<f64>,
    violations: usize,
}

#[derive(Serialize)]
struct SweepBody {
    n: usize,
    m: usize,
    c_list: Vec<f64>,
    theta_grid: Vec<f64>,
    r_grid: Vec<f64>,
    count: usize,
    amplitude: f64,
    records: Vec<SweepRecord>,
    summary: SweepSummary,
}

fn cmd_sweep(params: SweepParams) -> Result<(), CliError> {
    let started = Instant::now();
    if params.count == 0
        || params.c_list.is_empty()
        || params.theta_grid.is_empty()
        || params.r_grid.is_empty()
    {
        return Err(CliError::Input(
            "sweep needs count >= 1 and nonempty c/theta/r grids".into(),
        ));
    }
    let options = CheckOptions::default();
    // Instances fan out across worker threads; records come back in
    // deterministic input order.
    let records: Vec<SweepRecord> = (0..params.count)
        .into_par_iter()
        .flat_map_iter(|index| {
            let c = params.c_list[index % params.c_list.len()];
            let theta = params.theta_grid[(index / params.c_list.len()) % params.theta_grid.len()];
            let instance_seed = params.seed.wrapping_add(index as u64);
            let base = SweepRecord {
                index,
                seed: instance_seed,
                c,
                theta,
                r: f64::NAN,
                status: String::new(),
                proper: None,
                lhs: None,
                rhs: None,
                slack: None,
                equality_detected: None,
            };
            let prepared = random_instance(
                params.n,
                params.m,
                c,
                theta,
                params.amplitude,
                instance_seed,
            )
            .map_err(|e| e.to_string())
            .and_then(|inst| {
                hyperplane_extremes(inst.sff(), instance_seed, &options.extremize)
                    .map(|ex| (inst, ex))
                    .map_err(|e| e.to_string())
            });
            params
                .r_grid
                .iter()
                .map(move |&r| {
                    let mut record = base.clone();
                    record.r = r;
                    match &prepared {
                        Ok((inst, extremes)) => {
                            match check_bound_with_extremes(
                                inst,
                                BoundRequest::Generalized { r },
                                extremes,
                                &options,
                            ) {
                                Ok(v) => {
                                    record.status = "ok".into();
                                    record.proper = Some(v.proper);
                                    record.lhs = Some(v.lhs);
                                    record.rhs = Some(v.rhs);
                                    record.slack = Some(v.slack);
                                    record.equality_detected = Some(v.equality_detected);
                                }
                                Err(e) => record.status = format!("error: {e}"),
                            }
                        }
                        Err(e) => record.status = format!("error: {e}"),
                    }
                    record
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let errors = records.iter().filter(|r| r.status != "ok").count();
    let min_slack = records
        .iter()
        .filter_map(|r| r.slack)
        .min_by(|a, b| a.total_cmp(b));
    let violations = records
        .iter()
        .filter(|r| r.slack.is_some_and(|s| s < -1e-9))
        .count();
    let summary = SweepSummary {
        instances: params.count,
        records: records.len(),
        errors,
        min_slack,
        violations,
    };
    eprintln!(
        "sweep: {} records, {} errors, min slack {:?}, {:.1?}",
        records.len(),
        errors,
        min_slack,
        started.elapsed()
    );

    match params.format {
        FormatArg::Json => {
            let body = SweepBody {
                n: params.n,
                m: params.m,
                c_list: params.c_list,
                theta_grid: params.theta_grid,
                r_grid: params.r_grid,
                count: params.count,
                amplitude: params.amplitude,
                records,
                summary,
            };
            io::emit(
                &Envelope::new("sweep", params.seed, started, body),
                params.out.as_deref(),
            )?;
        }
        FormatArg::Csv => {
            let mut text = String::from(
                "index,seed,c,theta,r,status,proper,lhs,rhs,slack,equality_detected\n",
            );
            for rec in &records {
                let opt_f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
                let opt_b = |v: Option<bool>| v.map_or(String::new(), |x| x.to_string());
                text.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{},{},{},{},{},{}\n",
                    rec.index,
                    rec.seed,
                    rec.c,
                    rec.theta,
                    rec.r,
                    rec.status,
                    opt_b(rec.proper),
                    opt_f(rec.lhs),
                    opt_f(rec.rhs),
                    opt_f(rec.slack),
                    opt_b(rec.equality_detected),
                ));
            }
            match params.out.as_deref() {
                Some(path) => std::fs::write(path, text).map_err(|e| {
                    CliError::Input(format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{text}"),
            }
        }
    }
    if violations > 0 {
        return Err(CliError::Violation(format!(
            "{violations} sweep records violate the bound"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ProofBody {
    n: usize,
    r: f64,
    critical: CriticalJson,
    hessian: HessianJson,
}

fn cmd_proof(n: usize, r: f64, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let critical = solve_critical_system(n, r)?;
    let spectrum = hessian_spectrum(n, r)?;
    eprintln!("Hessian spectrum for n = {n}, r = {r}:");
    eprintln!("  {:>20} {:>20} {:>12}", "numeric", "closed form", "error");
    for (got, want) in spectrum
        .hessian_eigs
        .iter()
        .zip(spectrum.expected_eigs.iter())
    {
        eprintln!("  {got:>20.12} {want:>20.12} {:>12.3e}", (got - want).abs());
    }
    eprintln!(
        "  critical residual {:.3e}, P(h_c) = {:.3e}",
        spectrum.critical_residual, spectrum.p_at_critical
    );
    let body = ProofBody {
        n,
        r,
        critical: CriticalJson::from(&critical),
        hessian: HessianJson::from(&spectrum),
    };
    io::emit(&Envelope::new("proof", 0, started, body), out)
}

fn cmd_equality(
    n: usize,
    m: usize,
    r: f64,
    a: f64,
    theta: f64,
    c: f64,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let inst = build_equality_instance(n, m, c, theta, r, a)?;
    let label = format!("equality case r={r}, a={a}");
    let file = InstanceFile::from_instance(&inst, None, Some(label));
    io::emit(&file, out)
}

#[derive(Serialize)]
struct OracleSideJson {
    kind: String,
    optimizer: f64,
    oracle: f64,
    gap: f64,
    converged: bool,
}

#[derive(Serialize)]
struct OracleCompareBody {
    input: InstanceFile,
    resolution: usize,
    results: Vec<OracleSideJson>,
}

fn cmd_oracle_compare(
    path: &std::path::Path,
    resolution: usize,
    seed: Option<u64>,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = resolve_seed(seed);
    let file = InstanceFile::read(path)?;
    let inst = file.to_instance()?;
    let mut results = Vec::new();
    for kind in [ExtremumKind::Inf, ExtremumKind::Sup] {
        let opt = casorati::casorati_delta::extremize_hyperplane(
            inst.sff(),
            kind,
            seed,
            &ExtremizeConfig::default(),
        )?;
        let oracle = oracle_extremum(inst.sff(), kind, resolution)?;
        let gap = opt.value - oracle;
        let name = match kind {
            ExtremumKind::Inf => "inf",
            ExtremumKind::Sup => "sup",
        };
        println!(
            "{name}: optimizer {:.12e}, oracle {oracle:.12e}, gap {gap:.3e}",
            opt.value
        );
        results.push(OracleSideJson {
            kind: name.to_string(),
            optimizer: opt.value,
            oracle,
            gap,
            converged: opt.converged,
        });
    }
    let body = OracleCompareBody {
        input: file,
        resolution,
        results,
    };
    io::emit(&Envelope::new("oracle-compare", seed, started, body), out)
}
