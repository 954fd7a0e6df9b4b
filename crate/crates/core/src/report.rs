//! Versioned JSON reports and fixtures.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collinear::{delta_bracket, CollinearSolution, SigmaEntry};
use crate::constraints::ConstraintReport;
use crate::distgeo::{pairs, DistanceVector};
use crate::energetics::MassVector;
use crate::error::{Error, Result};
use crate::oracle::{CrossValidation, FuzzReport};
use crate::trapezoid5::{ClassificationFlags, ProbeReport, SymmetryVerdict, TrapezoidSolution};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveTrapezoid,
    SolveCollinear,
    EnumerateMoulton,
    VerifyIdentities,
    CrossValidate,
    UniquenessProbe,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveTrapezoid => "solve-trapezoid",
            Command::SolveCollinear => "solve-collinear",
            Command::EnumerateMoulton => "enumerate-moulton",
            Command::VerifyIdentities => "verify-identities",
            Command::CrossValidate => "cross-validate",
            Command::UniquenessProbe => "uniqueness-probe",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub solver: f64,
    pub classification: f64,
    pub cluster: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub iterations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Provenance {
    pub fn new(seed: u64, tolerances: Tolerances, iterations: Vec<usize>) -> Self {
        Self { tool: format!("ccdist {}", env!("CARGO_PKG_VERSION")), seed, tolerances, iterations, note: None }
    }
}

/// `"r_ij"` key of a pair; two-digit labels are separated by an underscore.
pub fn pair_key(i: usize, j: usize, n: usize) -> String {
    if n < 10 {
        format!("r_{i}{j}")
    } else {
        format!("r_{i}_{j}")
    }
}

pub fn distance_map(r: &DistanceVector) -> BTreeMap<String, f64> {
    pairs(r.n()).zip(r.entries()).map(|((i, j), v)| (pair_key(i, j, r.n()), *v)).collect()
}

/// Distances from an `"r_ij"` map for `n` bodies; other keys are ignored.
pub fn distances_from_map(map: &BTreeMap<String, f64>, n: usize) -> Result<DistanceVector> {
    let entries = pairs(n)
        .map(|(i, j)| {
            let key = pair_key(i, j, n);
            map.get(&key).copied().ok_or_else(|| Error::InvalidInput(format!("missing distance {key}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    DistanceVector::new(n, entries)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSolutionJson {
    #[serde(flatten)]
    pub distances: BTreeMap<String, f64>,
    pub delta: f64,
    pub omega: f64,
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InvalidRegion,
    ClassificationFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidReport {
    pub schema_version: u32,
    pub command: Command,
    pub status: Status,
    pub masses: MassVector,
    pub solution: TrapezoidSolutionJson,
    pub residual_norm: f64,
    pub zeta: Vec<f64>,
    pub classification: ClassificationFlags,
    pub symmetry: SymmetryVerdict,
    pub membership: ConstraintReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<f64>,
    pub provenance: Provenance,
}

impl TrapezoidReport {
    pub fn new(sol: &TrapezoidSolution, m: &MassVector, status: Status, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: Command::SolveTrapezoid,
            status,
            masses: m.clone(),
            solution: TrapezoidSolutionJson {
                distances: distance_map(&sol.r),
                delta: sol.multipliers.delta,
                omega: sol.multipliers.omega,
                theta: sol.multipliers.theta,
            },
            residual_norm: sol.residual_norm,
            zeta: sol.spectrum.clone(),
            classification: sol.flags.clone(),
            symmetry: sol.symmetry.clone(),
            membership: sol.membership.clone(),
            cross_validation: None,
            provenance,
        }
    }

    pub fn distances(&self) -> Result<DistanceVector> {
        distances_from_map(&self.solution.distances, self.masses.n())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearSolutionJson {
    pub ordering: Vec<usize>,
    #[serde(flatten)]
    pub distances: BTreeMap<String, f64>,
    pub delta: f64,
    pub sigma: Vec<SigmaEntry>,
    pub gaps: Vec<f64>,
    pub positions: Vec<f64>,
    pub residual_norm: f64,
    pub spectrum: Vec<f64>,
    pub s_signs: Vec<i8>,
    pub delta_bracket: [f64; 2],
    pub iterations: usize,
}

impl From<&CollinearSolution> for CollinearSolutionJson {
    fn from(s: &CollinearSolution) -> Self {
        let (lo, hi) = delta_bracket(&s.gaps);
        Self {
            ordering: s.ordering.perm().to_vec(),
            distances: distance_map(&s.r),
            delta: s.delta,
            sigma: s.sigma.clone(),
            gaps: s.gaps.clone(),
            positions: s.positions.clone(),
            residual_norm: s.residual_norm,
            spectrum: s.spectrum.clone(),
            s_signs: s.s_signs.clone(),
            delta_bracket: [lo, hi],
            iterations: s.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearReport {
    pub schema_version: u32,
    pub command: Command,
    pub masses: MassVector,
    pub solution: CollinearSolutionJson,
    pub residual_norm: f64,
    pub spectrum: Vec<f64>,
    pub p_vector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoultonReport {
    pub schema_version: u32,
    pub command: Command,
    pub masses: MassVector,
    pub count: usize,
    pub expected: usize,
    pub distinct: bool,
    pub solutions: Vec<CollinearSolutionJson>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub schema_version: u32,
    pub command: Command,
    pub report: FuzzReport,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub schema_version: u32,
    pub command: Command,
    pub masses: MassVector,
    pub distances: BTreeMap<String, f64>,
    pub max_relative_error: f64,
    pub passed: bool,
    pub oracle_positions: Vec<[f64; 2]>,
    pub oracle_delta: f64,
    pub oracle_residual: f64,
    pub provenance: Provenance,
}

impl CrossValidationReport {
    pub fn new(r: &DistanceVector, m: &MassVector, cv: &CrossValidation, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: Command::CrossValidate,
            masses: m.clone(),
            distances: distance_map(r),
            max_relative_error: cv.max_relative_error,
            passed: cv.passed,
            oracle_positions: cv.oracle.x.points().to_vec(),
            oracle_delta: cv.oracle.delta,
            oracle_residual: cv.oracle.max_body_residual,
            provenance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReportJson {
    pub schema_version: u32,
    pub command: Command,
    pub masses: MassVector,
    pub report: ProbeReport,
    pub provenance: Provenance,
}

/// Serializes `value` as pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn emit_report<T: Serialize>(value: &T, path: Option<&Path>) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(text)
}

pub fn read_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Masses, and optionally a distance solution and ordering, read from a JSON file.
///
/// Any report written by this crate qualifies, as does a bare
/// `{"masses": [...]}` document.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct InputFile {
    pub masses: MassVector,
    #[serde(default)]
    pub solution: Option<BTreeMap<String, serde_json::Value>>,
    #[serde(default)]
    pub ordering: Option<Vec<usize>>,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    /// The `"r_ij"` entries of the embedded solution, if present.
    pub fn distances(&self) -> Result<Option<DistanceVector>> {
        let Some(sol) = &self.solution else { return Ok(None) };
        let map: BTreeMap<String, f64> = sol
            .iter()
            .filter(|(k, _)| k.starts_with("r_"))
            .filter_map(|(k, v)| v.as_f64().map(|f| (k.clone(), f)))
            .collect();
        distances_from_map(&map, self.masses.n()).map(Some)
    }
}
