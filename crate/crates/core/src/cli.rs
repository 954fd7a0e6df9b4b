//! Command-line front end: argument parsing, dispatch and exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::collinear::{
    canonical_orderings, moulton_enumerate, pairwise_distinct, solution_p_vector, solve_ordering, CollinearOptions,
    Ordering,
};
use crate::distgeo::DistanceVector;
use crate::energetics::MassVector;
use crate::error::{Error, Result};
use crate::oracle::{cross_validate, identity_fuzzer};
use crate::report::{
    emit_report, CollinearReport, CollinearSolutionJson, Command, CrossValidationReport, IdentityReport, InputFile,
    MoultonReport, ProbeReportJson, Provenance, Status, Tolerances, TrapezoidReport, SCHEMA_VERSION,
};
use crate::trapezoid5::{
    initial_guess_symmetric, solve_critical_point, solve_default, uniqueness_probe, SolveOptions, CLASSIFY_TOL,
    CLUSTER_TOL, SOLVER_TOL,
};

/// Parses `1,2.5,3` into a mass vector.
pub fn parse_masses(s: &str) -> std::result::Result<MassVector, String> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("malformed mass list: {t:?} is not a number")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    MassVector::new(values).map_err(|e| match e {
        Error::InvalidInput(msg) => msg,
        other => other.to_string(),
    })
}

/// Parses `1,3,2` (or `1-3-2`) into an ordering.
pub fn parse_ordering(s: &str) -> std::result::Result<Ordering, String> {
    let perm = s
        .split([',', '-'])
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("malformed ordering: {t:?}")))
        .collect::<std::result::Result<Vec<usize>, String>>()?;
    Ordering::new(perm).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "ccdist", version, about = "Central configurations in mutual-distance coordinates")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,

    /// Comma-separated positive masses.
    #[arg(long, global = true, value_parser = parse_masses)]
    masses: Option<MassVector>,

    /// JSON file with a "masses" array (and optionally a solution).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    #[arg(long, global = true, env = "CCDIST_SEED", default_value_t = 0)]
    seed: u64,

    /// Solver tolerance on the residual norm.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,

    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Left-to-right body order for solve-collinear, e.g. 1,3,2.
    #[arg(long, global = true, value_parser = parse_ordering)]
    ordering: Option<Ordering>,

    /// Random starts for uniqueness-probe.
    #[arg(long, global = true, default_value_t = 100)]
    starts: usize,

    /// Random trials for verify-identities.
    #[arg(long, global = true, default_value_t = 1000)]
    trials: u64,

    /// Top-to-base ratio of the symmetric starting trapezoid.
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Height of the symmetric starting trapezoid.
    #[arg(long, global = true)]
    height: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum CliCommand {
    /// Solve the five-body isosceles-trapezoid system.
    SolveTrapezoid,
    /// Solve the collinear problem for one ordering.
    SolveCollinear,
    /// Solve every collinear ordering up to reflection.
    EnumerateMoulton,
    /// Randomized checks of the distance-geometry identities.
    VerifyIdentities,
    /// Compare a distance-space solution with the position-space solver.
    CrossValidate,
    /// Multi-start search for trapezoid critical points.
    UniquenessProbe,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::SolveTrapezoid => Command::SolveTrapezoid,
            CliCommand::SolveCollinear => Command::SolveCollinear,
            CliCommand::EnumerateMoulton => Command::EnumerateMoulton,
            CliCommand::VerifyIdentities => Command::VerifyIdentities,
            CliCommand::CrossValidate => Command::CrossValidate,
            CliCommand::UniquenessProbe => Command::UniquenessProbe,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Absent only for verify-identities.
    pub masses: Option<MassVector>,
    /// Solution distances supplied through `--input`.
    pub distances: Option<DistanceVector>,
    pub ordering: Option<Ordering>,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub output: Option<PathBuf>,
    pub starts: usize,
    pub trials: u64,
    pub rho: Option<f64>,
    pub height: Option<f64>,
}

impl RunConfig {
    fn masses(&self) -> Result<&MassVector> {
        self.masses.as_ref().ok_or_else(|| Error::Usage("--masses or --input is required".into()))
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { solver: self.tol, classification: CLASSIFY_TOL, cluster: CLUSTER_TOL }
    }

    fn provenance(&self, iterations: Vec<usize>) -> Provenance {
        Provenance::new(self.seed, self.tolerances(), iterations)
    }
}

/// Validated configuration from command-line arguments (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    config_from(cli)
}

fn config_from(cli: Cli) -> Result<RunConfig> {
    let command = Command::from(cli.command);
    let mut masses = cli.masses;
    let mut distances = None;
    let mut ordering = cli.ordering;
    if let Some(path) = &cli.input {
        if masses.is_some() {
            return Err(Error::Usage("--masses and --input are mutually exclusive".into()));
        }
        let input = InputFile::read(path)?;
        distances = input.distances()?;
        if ordering.is_none() {
            ordering = input.ordering.clone().map(Ordering::new).transpose()?;
        }
        masses = Some(input.masses);
    }
    if masses.is_none() && command != Command::VerifyIdentities {
        return Err(Error::Usage(format!("{} requires --masses or --input", command.name())));
    }
    let tol = cli.tol.unwrap_or(SOLVER_TOL);
    if !(tol > 0.0) {
        return Err(Error::Usage("--tol must be positive".into()));
    }
    if let Some(m) = &masses {
        if matches!(command, Command::SolveTrapezoid | Command::UniquenessProbe) && m.n() != 5 {
            return Err(Error::Usage(format!("{} needs exactly five masses, got {}", command.name(), m.n())));
        }
        if let Some(o) = &ordering {
            if o.len() != m.n() {
                return Err(Error::Usage(format!("ordering has {} bodies, masses {}", o.len(), m.n())));
            }
        }
    }
    Ok(RunConfig {
        command,
        masses,
        distances,
        ordering,
        seed: cli.seed,
        tol,
        max_iter: cli.max_iter,
        output: cli.output,
        starts: cli.starts,
        trials: cli.trials,
        rho: cli.rho,
        height: cli.height,
    })
}

/// Exit code and the JSON text written for a finished run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: String,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let out = cfg.output.as_deref();
    match cfg.command {
        Command::SolveTrapezoid => {
            let m = cfg.masses()?;
            let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, inertia_target: None };
            let sol = match (cfg.rho, cfg.height) {
                (None, None) => solve_default(m, &opts)?,
                (rho, h) => {
                    solve_critical_point(m, &initial_guess_symmetric(m, rho.unwrap_or(0.5), h.unwrap_or(1.0))?, &opts)?
                }
            };
            let status = if !sol.membership.in_t {
                Status::InvalidRegion
            } else if !sol.flags.all_pass() || !sol.symmetry.violated.is_empty() {
                Status::ClassificationFailed
            } else {
                Status::Ok
            };
            let mut rep = TrapezoidReport::new(&sol, m, status, cfg.provenance(vec![sol.iterations]));
            if status == Status::InvalidRegion {
                rep.provenance.note =
                    Some(format!("not geometrically realizable: {}", sol.membership.violated.join("; ")));
            } else {
                rep.cross_validation = Some(cross_validate(&sol.r, m)?.max_relative_error);
            }
            let code = if status == Status::Ok { 0 } else { 2 };
            Ok(RunOutcome { exit_code: code, report: emit_report(&rep, out)? })
        }
        Command::SolveCollinear => {
            let m = cfg.masses()?;
            let ordering = cfg.ordering.clone().unwrap_or_else(|| Ordering::identity(m.n()));
            let opts = CollinearOptions { tol: cfg.tol, max_iter: cfg.max_iter };
            let sol = solve_ordering(m, &ordering, &opts)?;
            let cv = if m.n() >= 3 { Some(cross_validate(&sol.r, m)?.max_relative_error) } else { None };
            let rep = CollinearReport {
                schema_version: SCHEMA_VERSION,
                command: Command::SolveCollinear,
                masses: m.clone(),
                solution: CollinearSolutionJson::from(&sol),
                residual_norm: sol.residual_norm,
                spectrum: sol.spectrum.clone(),
                p_vector: if m.n() >= 2 { solution_p_vector(&sol, m)? } else { vec![] },
                cross_validation: cv,
                provenance: cfg.provenance(vec![sol.iterations]),
            };
            Ok(RunOutcome { exit_code: 0, report: emit_report(&rep, out)? })
        }
        Command::EnumerateMoulton => {
            let m = cfg.masses()?;
            let opts = CollinearOptions { tol: cfg.tol, max_iter: cfg.max_iter };
            let sols = moulton_enumerate(m, &opts)?;
            let expected = canonical_orderings(m.n()).len();
            let distinct = pairwise_distinct(&sols);
            let rep = MoultonReport {
                schema_version: SCHEMA_VERSION,
                command: Command::EnumerateMoulton,
                masses: m.clone(),
                count: sols.len(),
                expected,
                distinct,
                solutions: sols.iter().map(CollinearSolutionJson::from).collect(),
                provenance: cfg.provenance(sols.iter().map(|s| s.iterations).collect()),
            };
            let code = if distinct && sols.len() == expected { 0 } else { 2 };
            Ok(RunOutcome { exit_code: code, report: emit_report(&rep, out)? })
        }
        Command::VerifyIdentities => {
            let fuzz = identity_fuzzer(cfg.seed, cfg.trials)?;
            let code = if fuzz.passed { 0 } else { 2 };
            let rep = IdentityReport {
                schema_version: SCHEMA_VERSION,
                command: Command::VerifyIdentities,
                report: fuzz,
                provenance: cfg.provenance(vec![]),
            };
            Ok(RunOutcome { exit_code: code, report: emit_report(&rep, out)? })
        }
        Command::CrossValidate => {
            let m = cfg.masses()?;
            let (r, iterations) = match &cfg.distances {
                Some(r) => (r.clone(), vec![]),
                None if m.n() == 5 => {
                    let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, inertia_target: None };
                    let sol = solve_default(m, &opts)?;
                    (sol.r, vec![sol.iterations])
                }
                None => {
                    let ordering = cfg.ordering.clone().unwrap_or_else(|| Ordering::identity(m.n()));
                    let sol = solve_ordering(m, &ordering, &CollinearOptions { tol: cfg.tol, max_iter: cfg.max_iter })?;
                    (sol.r, vec![sol.iterations])
                }
            };
            let cv = cross_validate(&r, m)?;
            let rep = CrossValidationReport::new(&r, m, &cv, cfg.provenance(iterations));
            let code = if cv.passed { 0 } else { 2 };
            Ok(RunOutcome { exit_code: code, report: emit_report(&rep, out)? })
        }
        Command::UniquenessProbe => {
            let m = cfg.masses()?;
            let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, inertia_target: None };
            let probe = uniqueness_probe(m, cfg.starts, cfg.seed, &opts)?;
            let code = match probe.cluster_count {
                0 => 1,
                1 => 0,
                _ => 2,
            };
            let rep = ProbeReportJson {
                schema_version: SCHEMA_VERSION,
                command: Command::UniquenessProbe,
                masses: m.clone(),
                report: probe,
                provenance: cfg.provenance(vec![]),
            };
            Ok(RunOutcome { exit_code: code, report: emit_report(&rep, out)? })
        }
    }
}

/// Full program: parse, run, report errors on stderr; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    match config_from(cli).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => outcome.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
