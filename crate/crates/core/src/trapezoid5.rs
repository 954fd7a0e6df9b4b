//! The trapezoidal five-body problem: P₁, P₂, P₃ collinear on one base,
//! P₄P₅ the parallel base, solved as the 13-unknown critical-point system of
//! W₂₄₅ = U + mδ(I − I₀) + ωT₂ + θL₁₂₃.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{l_constraint, membership, t2, v5_k5, ConstraintReport};
use crate::distgeo::{
    distances_from_positions, pairs, quadruple_areas, DistanceVector, PairDistances, PlanarConfiguration,
};
use crate::energetics::{force_scale, inertia_raw, potential_raw, r_entry, s_entry, MassVector, MultiplierSet};
use crate::error::{Error, Result};
use crate::numerics::{damped_newton, max_abs, symmetric_eigenvalues, NewtonOptions};

pub const SOLVER_TOL: f64 = 1e-12;
pub const CLASSIFY_TOL: f64 = 1e-9;
pub const CLUSTER_TOL: f64 = 1e-6;

// Packed slots of the ten pairs.
const R12: usize = 0;
const R13: usize = 1;
const R14: usize = 2;
const R15: usize = 3;
const R23: usize = 4;
const R24: usize = 5;
const R25: usize = 6;
const R34: usize = 7;
const R35: usize = 8;
const R45: usize = 9;

const PAIRS5: [(usize, usize); 10] = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5)];

/// Starting point `(r, δ, ω, θ)` for the Newton solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidGuess {
    pub r: Vec<f64>,
    pub multipliers: MultiplierSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Rectangle,
    SymmetricIsosceles,
    AsymmetricR13GtR45,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub class: SymmetryClass,
    /// r₁₂ − r₂₃, r₁₄ − r₃₅, r₁₅ − r₃₄, r₂₄ − r₂₅ after canonical relabeling.
    pub constraint_defects: [f64; 4],
    /// m₁ − m₃, m₄ − m₅ after canonical relabeling.
    pub mass_defects: [f64; 2],
    /// True when the mirror 1↔3, 4↔5 was applied to get r₁₄ ≤ r₃₅.
    pub mirrored: bool,
    pub violated: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationFlags {
    pub delta_positive: bool,
    pub omega_positive: bool,
    pub theta_positive: bool,
    pub r24_eq_r25: bool,
    pub inequality_chain: bool,
    pub spectrum_positive: bool,
    pub spectrum_matches_numeric: bool,
    pub violated: Vec<String>,
}

impl ClassificationFlags {
    pub fn all_pass(&self) -> bool {
        self.violated.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSolution {
    pub r: DistanceVector,
    pub multipliers: MultiplierSet,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// ζ₁..ζ₁₀ in closed form.
    pub spectrum: Vec<f64>,
    pub flags: ClassificationFlags,
    pub symmetry: SymmetryVerdict,
    pub membership: ConstraintReport,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Normalization target; `None` means I₀ = 1/(2m).
    pub inertia_target: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: SOLVER_TOL, max_iter: 200, inertia_target: None }
    }
}

fn check_five(m: &MassVector) -> Result<()> {
    if m.n() != 5 {
        return Err(Error::InvalidInput(format!("the trapezoid problem has five bodies, got {}", m.n())));
    }
    Ok(())
}

fn mm(m: &MassVector, slot: usize) -> f64 {
    let (i, j) = PAIRS5[slot];
    m.m(i) * m.m(j)
}

fn residuals_raw(r: &[f64], mult: &MultiplierSet, m: &MassVector, i0: f64) -> [f64; 13] {
    let MultiplierSet { delta, omega: w, theta } = *mult;
    let s = |k: usize| s_entry(r[k], 1.0, mm(m, k), delta);
    [
        s(R12) + theta,
        s(R13) + 2.0 * r[R45] * w - theta,
        s(R14) - 2.0 * r[R14] * w,
        s(R15) + 2.0 * r[R15] * w,
        s(R23) + theta,
        s(R24),
        s(R25),
        s(R34) + 2.0 * r[R34] * w,
        s(R35) - 2.0 * r[R35] * w,
        s(R45) + 2.0 * r[R13] * w,
        inertia_raw(r, m) - i0,
        t2(r),
        l_constraint(r, [1, 2, 3]),
    ]
}

/// ∇_r T₂ in packed order.
fn grad_t2(r: &[f64]) -> [f64; 10] {
    let mut g = [0.0; 10];
    g[R13] = 2.0 * r[R45];
    g[R45] = 2.0 * r[R13];
    g[R14] = -2.0 * r[R14];
    g[R15] = 2.0 * r[R15];
    g[R34] = 2.0 * r[R34];
    g[R35] = -2.0 * r[R35];
    g
}

fn grad_l123() -> [f64; 10] {
    let mut g = [0.0; 10];
    g[R12] = 1.0;
    g[R13] = -1.0;
    g[R23] = 1.0;
    g
}

fn hessian_raw(r: &[f64], delta: f64, omega: f64, m: &MassVector) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(10, 10);
    for k in 0..10 {
        h[(k, k)] = r_entry(r[k], 1.0, mm(m, k), delta);
    }
    h[(R14, R14)] -= 2.0 * omega;
    h[(R15, R15)] += 2.0 * omega;
    h[(R34, R34)] += 2.0 * omega;
    h[(R35, R35)] -= 2.0 * omega;
    h[(R13, R45)] = 2.0 * omega;
    h[(R45, R13)] = 2.0 * omega;
    h
}

fn jacobian_raw(z: &[f64], m: &MassVector) -> DMatrix<f64> {
    let r = &z[..10];
    let (delta, omega) = (z[10], z[11]);
    let mut j = DMatrix::zeros(13, 13);
    j.view_mut((0, 0), (10, 10)).copy_from(&hessian_raw(r, delta, omega, m));
    let gt = grad_t2(r);
    let gl = grad_l123();
    for k in 0..10 {
        let d_inertia = mm(m, k) * r[k] / m.total();
        j[(k, 10)] = mm(m, k) * r[k];
        j[(k, 11)] = gt[k];
        j[(k, 12)] = gl[k];
        j[(10, k)] = d_inertia;
        j[(11, k)] = gt[k];
        j[(12, k)] = gl[k];
    }
    j
}

/// The thirteen residuals: ∇_r W₂₄₅ followed by I − I₀, T₂ and L₁₂₃.
pub fn residual_system(r: &DistanceVector, mult: &MultiplierSet, m: &MassVector) -> Result<[f64; 13]> {
    check_five(m)?;
    if r.n() != 5 {
        return Err(Error::InvalidInput("five-body distance vector required".into()));
    }
    Ok(residuals_raw(r.entries(), mult, m, m.inertia_target()))
}

/// The Lagrangian W₂₄₅ itself, for derivative checks.
pub fn w245<D: PairDistances + ?Sized>(r: &D, mult: &MultiplierSet, m: &MassVector) -> f64 {
    potential_raw(r, m)
        + m.total() * mult.delta * (inertia_raw(r, m) - m.inertia_target())
        + mult.omega * t2(r)
        + mult.theta * l_constraint(r, [1, 2, 3])
}

/// Isosceles trapezoid P₁=(−1,0), P₂=(s,0), P₃=(1,0), P₄=(ρ+c,h), P₅=(−ρ+c,h)
/// scaled to I = I₀, with multipliers consistent with S₂₄ = 0 and the θ and ω
/// relations of the stationarity equations.
pub fn initial_guess(m: &MassVector, rho: f64, h: f64, p2_offset: f64, top_shift: f64) -> Result<TrapezoidGuess> {
    check_five(m)?;
    if !(rho > 0.0 && h > 0.0) {
        return Err(Error::InvalidInput(format!("shape needs rho > 0 and h > 0, got ({rho}, {h})")));
    }
    if !(p2_offset.abs() < 1.0) {
        return Err(Error::InvalidInput("P2 must lie strictly between P1 and P3".into()));
    }
    let x = PlanarConfiguration::new(vec![
        [-1.0, 0.0],
        [p2_offset, 0.0],
        [1.0, 0.0],
        [rho + top_shift, h],
        [-rho + top_shift, h],
    ])?;
    let r0 = distances_from_positions(&x)?;
    let s = (m.inertia_target() / inertia_raw(&r0, m)).sqrt();
    let r: Vec<f64> = r0.entries().iter().map(|v| v * s).collect();
    let delta = r[R24].powi(-3);
    let theta = -s_entry(r[R12], m.m(1), m.m(2), delta);
    let omega = s_entry(r[R14], m.m(1), m.m(4), delta) / (2.0 * r[R14]);
    Ok(TrapezoidGuess { r, multipliers: MultiplierSet { delta, omega, theta } })
}

/// Symmetric starting point: P₂ at the midpoint, ρ = r₄₅/r₁₃ relative to a base of 2.
pub fn initial_guess_symmetric(m: &MassVector, rho: f64, h: f64) -> Result<TrapezoidGuess> {
    initial_guess(m, rho, h, 0.0, 0.0)
}

/// Solves for a critical point of W₂₄₅ on M⁺₂₄₅ without requiring geometric
/// realizability; the result carries the membership report and flags.
pub fn solve_critical_point(m: &MassVector, guess: &TrapezoidGuess, opts: &SolveOptions) -> Result<TrapezoidSolution> {
    check_five(m)?;
    if guess.r.len() != 10 {
        return Err(Error::Precondition(format!("guess has {} distances, expected 10", guess.r.len())));
    }
    if let Some(k) = guess.r.iter().position(|v| !(*v > 0.0)) {
        let (i, j) = PAIRS5[k];
        return Err(Error::Precondition(format!("guess distance r_{i}{j} = {} is not positive", guess.r[k])));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let i0 = opts.inertia_target.unwrap_or(m.inertia_target());
    let mut z0 = guess.r.clone();
    z0.extend([guess.multipliers.delta, guess.multipliers.omega, guess.multipliers.theta]);
    let residual = |z: &[f64]| -> Option<Vec<f64>> {
        if z[..10].iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let mult = MultiplierSet { delta: z[10], omega: z[11], theta: z[12] };
        Some(residuals_raw(&z[..10], &mult, m, i0).to_vec())
    };
    let scale = force_scale(&guess.r[..], m);
    let nopts = NewtonOptions { tol: opts.tol, max_iter: opts.max_iter, scale, ..Default::default() };
    let out = damped_newton(&z0, residual, |z| jacobian_raw(z, m), &nopts)?;
    let r = DistanceVector::new(5, out.x[..10].to_vec())?;
    let multipliers = MultiplierSet { delta: out.x[10], omega: out.x[11], theta: out.x[12] };
    Ok(assemble(r, multipliers, out.residual, out.residual_norm, out.iterations, m))
}

fn assemble(
    r: DistanceVector,
    multipliers: MultiplierSet,
    residuals: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
    m: &MassVector,
) -> TrapezoidSolution {
    let spectrum = spectrum_closed_form(&r, multipliers.delta, multipliers.omega, m).to_vec();
    let report = membership(&r, m).expect("five bodies");
    let mut sol = TrapezoidSolution {
        r,
        multipliers,
        residuals,
        residual_norm,
        iterations,
        spectrum,
        flags: ClassificationFlags {
            delta_positive: false,
            omega_positive: false,
            theta_positive: false,
            r24_eq_r25: false,
            inequality_chain: false,
            spectrum_positive: false,
            spectrum_matches_numeric: false,
            violated: vec![],
        },
        symmetry: SymmetryVerdict {
            class: SymmetryClass::Violation,
            constraint_defects: [0.0; 4],
            mass_defects: [0.0; 2],
            mirrored: false,
            violated: vec![],
        },
        membership: report,
    };
    sol.flags = evaluate_flags(&sol, m);
    sol.symmetry = symmetry_analysis(&sol, m);
    sol
}

/// Damped Newton on the 13×13 system; the converged point must lie in T₂₄₅.
pub fn newton_solve(m: &MassVector, guess: &TrapezoidGuess, opts: &SolveOptions) -> Result<TrapezoidSolution> {
    let sol = solve_critical_point(m, guess, opts)?;
    if !sol.membership.in_t {
        let reason = sol.membership.violated.join("; ");
        let report = Box::new(sol.membership.clone());
        return Err(Error::InvalidRegion { reason, solution: Box::new(sol), report });
    }
    Ok(sol)
}

/// Solution with an explicit mass vector check of the inputs it was built from.
pub fn solution_from_parts(r: DistanceVector, multipliers: MultiplierSet, m: &MassVector) -> Result<TrapezoidSolution> {
    check_five(m)?;
    let res = residual_system(&r, &multipliers, m)?.to_vec();
    let norm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(assemble(r, multipliers, res, norm, 0, m))
}

/// D²W₂₄₅ with respect to r.
pub fn hessian_w245(r: &DistanceVector, delta: f64, omega: f64, m: &MassVector) -> DMatrix<f64> {
    hessian_raw(r.entries(), delta, omega, m)
}

/// ζ₁..ζ₁₀ in closed form.
pub fn spectrum_closed_form(r: &DistanceVector, delta: f64, omega: f64, m: &MassVector) -> [f64; 10] {
    let e = r.entries();
    let big_r = |k: usize| r_entry(e[k], 1.0, mm(m, k), delta);
    let (a, b) = (big_r(R13), big_r(R45));
    let root = ((b - a).powi(2) + 16.0 * omega * omega).sqrt();
    [
        big_r(R12),
        big_r(R23),
        big_r(R24),
        big_r(R25),
        big_r(R14) - 2.0 * omega,
        big_r(R15) + 2.0 * omega,
        big_r(R34) + 2.0 * omega,
        big_r(R35) - 2.0 * omega,
        0.5 * (a + b + root),
        0.5 * (a + b - root),
    ]
}

/// Largest relative gap between sorted closed-form and numerical spectra.
pub fn spectrum_discrepancy(r: &DistanceVector, delta: f64, omega: f64, m: &MassVector) -> f64 {
    let mut closed = spectrum_closed_form(r, delta, omega, m).to_vec();
    closed.sort_by(f64::total_cmp);
    let numeric = symmetric_eigenvalues(&hessian_w245(r, delta, omega, m));
    let scale = max_abs(&closed);
    closed.iter().zip(&numeric).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
}

/// Evaluates every sign and ordering relation without failing.
pub fn evaluate_flags(sol: &TrapezoidSolution, m: &MassVector) -> ClassificationFlags {
    let r = &sol.r;
    let MultiplierSet { delta, omega, theta } = sol.multipliers;
    let mut violated = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            violated.push(what.to_string());
        }
        ok
    };
    let delta_positive = check(delta > 0.0, "delta > 0");
    let omega_positive = check(omega > 0.0, "omega > 0");
    let theta_positive = check(theta > 0.0, "theta > 0");
    let rc = if delta > 0.0 { delta.powf(-1.0 / 3.0) } else { f64::NAN };
    let r24_eq_r25 = check(
        (r.r(2, 4) - rc).abs() < CLASSIFY_TOL * rc && (r.r(2, 5) - rc).abs() < CLASSIFY_TOL * rc,
        "r24 = r25 = delta^(-1/3)",
    );
    let short = [r.r(1, 2), r.r(2, 3), r.r(1, 5), r.r(3, 4), r.r(4, 5)];
    let mid = r.r(2, 4).max(r.r(2, 5));
    let mid_lo = r.r(2, 4).min(r.r(2, 5));
    let inequality_chain = check(
        short.iter().all(|&v| v > 0.0 && v < mid_lo) && mid < r.r(1, 4) && mid < r.r(3, 5),
        "0 < r12, r23, r15, r34, r45 < r24 = r25 < r14, r35",
    );
    let spectrum_positive = check(sol.spectrum.iter().all(|&z| z > 0.0), "all zeta > 0");
    let spectrum_matches_numeric =
        check(spectrum_discrepancy(r, delta, omega, m) < CLASSIFY_TOL, "closed-form zeta equal numerical eigenvalues");
    ClassificationFlags {
        delta_positive,
        omega_positive,
        theta_positive,
        r24_eq_r25,
        inequality_chain,
        spectrum_positive,
        spectrum_matches_numeric,
        violated,
    }
}

/// Asserts the sign analysis; fails naming every violated relation.
pub fn classify(sol: &TrapezoidSolution, m: &MassVector) -> Result<ClassificationFlags> {
    let flags = evaluate_flags(sol, m);
    if flags.all_pass() {
        Ok(flags)
    } else {
        Err(Error::Classification { violated: flags.violated })
    }
}

/// Shape analysis after relabeling so that r₁₄ ≤ r₃₅.
pub fn symmetry_analysis(sol: &TrapezoidSolution, m: &MassVector) -> SymmetryVerdict {
    let r = &sol.r;
    let mirrored = r.r(1, 4) > r.r(3, 5);
    // Mirror 1↔3, 4↔5 keeps 2 fixed.
    let map = |b: usize| if mirrored { [0, 3, 2, 1, 5, 4][b] } else { b };
    let d = |i: usize, j: usize| r.r(map(i), map(j));
    let w = |i: usize| m.m(map(i));

    let scale = r.max_entry();
    let mscale = m.masses().iter().cloned().fold(0.0, f64::max);
    let tol = CLASSIFY_TOL * scale;
    let mtol = CLASSIFY_TOL * mscale;
    let constraint_defects = [d(1, 2) - d(2, 3), d(1, 4) - d(3, 5), d(1, 5) - d(3, 4), d(2, 4) - d(2, 5)];
    let mass_defects = [w(1) - w(3), w(4) - w(5)];
    let mut violated = Vec::new();

    let class = if (d(1, 3) - d(4, 5)).abs() < tol {
        for (k, what) in [(1, "r14 = r35"), (2, "r15 = r34"), (0, "r12 = r23")] {
            if constraint_defects[k].abs() >= tol {
                violated.push(format!("parallelogram case requires {what}"));
            }
        }
        SymmetryClass::Rectangle
    } else if d(1, 3) < d(4, 5) {
        if (d(1, 2) - d(1, 3) / 2.0).abs() >= tol {
            violated.push("r12 = r13/2".into());
        }
        for (k, what) in ["r12 = r23", "r14 = r35", "r15 = r34", "r24 = r25"].iter().enumerate() {
            if constraint_defects[k].abs() >= tol {
                violated.push((*what).into());
            }
        }
        for (k, what) in ["m1 = m3", "m4 = m5"].iter().enumerate() {
            if mass_defects[k].abs() >= mtol {
                violated.push((*what).into());
            }
        }
        SymmetryClass::SymmetricIsosceles
    } else {
        if d(1, 2) > d(2, 3) + tol {
            violated.push("r13 > r45 requires r12 <= r23".into());
        }
        if w(1) > w(3) + mtol {
            violated.push("r13 > r45 requires m1 <= m3".into());
        }
        if w(4) < w(5) - mtol {
            violated.push("r13 > r45 requires m4 >= m5".into());
        }
        SymmetryClass::AsymmetricR13GtR45
    };
    let class = if violated.is_empty() { class } else { SymmetryClass::Violation };
    SymmetryVerdict { class, constraint_defects, mass_defects, mirrored, violated }
}

/// η multipliers of the determinant constraints and the resulting ∇_r W̃.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta3: f64,
    pub eta4: f64,
    pub eta5: f64,
    /// The ten components ∂W̃/∂r_ij in packed order.
    pub gradient: Vec<f64>,
    /// max_ij |S_ij|, the natural size of the gradient terms.
    pub scale: f64,
    pub max_residual: f64,
}

/// Quadruple of each η, and the pair whose equation defines it.
const ETA_QUADS: [([usize; 4], (usize, usize)); 3] =
    [([1, 2, 4, 5], (4, 5)), ([1, 2, 3, 5], (3, 5)), ([1, 2, 3, 4], (3, 4))];

pub fn eta_multipliers(x: &PlanarConfiguration, m: &MassVector, delta: f64) -> Result<EtaReport> {
    check_five(m)?;
    if x.len() != 5 {
        return Err(Error::InvalidInput("five planar points required".into()));
    }
    let r = distances_from_positions(x)?;
    let s: Vec<f64> = pairs(5).map(|(i, j)| s_entry(r.r(i, j), m.m(i), m.m(j), delta)).collect();
    let s_of = |i: usize, j: usize| s[crate::distgeo::pair_index(i, j, 5).unwrap().linear];
    let area_floor = 1e-12 * r.max_entry().powi(2);

    let mut etas = [0.0; 3];
    let mut areas = Vec::with_capacity(3);
    for (q, (quad, (a, b))) in ETA_QUADS.iter().enumerate() {
        let ar = quadruple_areas(x, *quad)?;
        let pos = |body: usize| quad.iter().position(|&v| v == body).unwrap();
        let (da, db) = (ar[pos(*a)], ar[pos(*b)]);
        for d in [da, db] {
            if d.value.abs() < area_floor {
                return Err(Error::CollinearDegeneracy(d.triple));
            }
        }
        etas[q] = s_of(*a, *b) / r.r(*a, *b) / (64.0 * da.value * db.value);
        areas.push(ar);
    }
    let gradient: Vec<f64> = pairs(5)
        .map(|(i, j)| {
            let mut g = s_of(i, j);
            for (q, (quad, _)) in ETA_QUADS.iter().enumerate() {
                let (pi, pj) = (quad.iter().position(|&v| v == i), quad.iter().position(|&v| v == j));
                if let (Some(pi), Some(pj)) = (pi, pj) {
                    g += etas[q] * crate::distgeo::cm_gradient_entry(r.r(i, j), &areas[q][pi], &areas[q][pj]);
                }
            }
            g
        })
        .collect();
    let scale = max_abs(&s);
    let max_residual = max_abs(&gradient);
    Ok(EtaReport { eta3: etas[0], eta4: etas[1], eta5: etas[2], gradient, scale, max_residual })
}

/// One cluster of converged critical points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeCluster {
    pub representative: Vec<f64>,
    pub multipliers: MultiplierSet,
    pub count: usize,
    pub realizable: bool,
    pub symmetry: SymmetryClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub starts: usize,
    pub seed: u64,
    /// Newton converged (realizable or not).
    pub converged: usize,
    /// Converged and inside T₂₄₅.
    pub realizable: usize,
    pub failed: usize,
    pub clusters: Vec<ProbeCluster>,
    pub cluster_count: usize,
    pub realizable_cluster_count: usize,
    pub message: String,
}

/// Randomized feasible start for probe index `k`.
pub fn random_guess(m: &MassVector, seed: u64, k: u64) -> Result<TrapezoidGuess> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let rho = rng.random_range(0.2..0.9);
    let h = rng.random_range(0.3..3.0);
    let offset = rng.random_range(-0.5..0.5);
    let shift = rng.random_range(-0.3..0.3) * rho;
    initial_guess(m, rho, h, offset, shift)
}

/// Multi-start Newton; converged critical points are clustered by distance.
pub fn uniqueness_probe(m: &MassVector, starts: usize, seed: u64, opts: &SolveOptions) -> Result<ProbeReport> {
    check_five(m)?;
    if starts < 2 {
        return Err(Error::Precondition("uniqueness probe needs at least two starts".into()));
    }
    let runs: Vec<Option<TrapezoidSolution>> = (0..starts as u64)
        .into_par_iter()
        .map(|k| random_guess(m, seed, k).and_then(|g| solve_critical_point(m, &g, opts)).ok())
        .collect();

    let mut clusters: Vec<ProbeCluster> = Vec::new();
    let mut converged = 0;
    let mut realizable = 0;
    for sol in runs.iter().flatten() {
        converged += 1;
        let ok = sol.membership.in_t;
        realizable += ok as usize;
        let r = sol.r.entries();
        let scale = sol.r.max_entry();
        match clusters.iter_mut().find(|c| {
            c.representative.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < CLUSTER_TOL * scale
        }) {
            Some(c) => {
                c.count += 1;
                c.realizable |= ok;
            }
            None => clusters.push(ProbeCluster {
                representative: r.to_vec(),
                multipliers: sol.multipliers,
                count: 1,
                realizable: ok,
                symmetry: sol.symmetry.class,
            }),
        }
    }
    let cluster_count = clusters.len();
    let realizable_cluster_count = clusters.iter().filter(|c| c.realizable).count();
    let message = match (cluster_count, realizable_cluster_count) {
        (0, _) => "no solution found".to_string(),
        (c, rc) => format!("{c} critical-point cluster(s), {rc} realizable"),
    };
    Ok(ProbeReport {
        starts,
        seed,
        converged,
        realizable,
        failed: starts - converged,
        clusters,
        cluster_count,
        realizable_cluster_count,
        message,
    })
}

/// Along m = (1, m₂, 1, M, M), finds the m₂ at which the symmetric critical
/// point is geometrically realizable (K₅ = K₄ = 0), by secant iteration in log m₂.
pub fn realizable_symmetric_masses(m45: f64, m2_guess: f64) -> Result<(MassVector, TrapezoidSolution)> {
    let opts = SolveOptions::default();
    let solve = |lm2: f64, start: Option<&TrapezoidGuess>| -> Result<(f64, TrapezoidSolution)> {
        let m = MassVector::new(vec![1.0, lm2.exp(), 1.0, m45, m45])?;
        let sol = match start {
            Some(g) => solve_critical_point(&m, g, &opts).or_else(|_| solve_default(&m, &opts))?,
            None => solve_default(&m, &opts)?,
        };
        let (_, k5) = v5_k5(&sol.r);
        Ok((k5 / sol.r.r(1, 3).powi(3), sol))
    };
    let as_guess = |s: &TrapezoidSolution| TrapezoidGuess { r: s.r.entries().to_vec(), multipliers: s.multipliers };

    let mut x0 = m2_guess.ln();
    let (mut f0, s0) = solve(x0, None)?;
    let mut x1 = x0 + 0.05;
    let (mut f1, mut s1) = solve(x1, Some(&as_guess(&s0)))?;
    for _ in 0..60 {
        if f1 == 0.0 || f1 == f0 {
            break;
        }
        let step = (-f1 * (x1 - x0) / (f1 - f0)).clamp(-0.5, 0.5);
        let (f2, s2) = solve(x1 + step, Some(&as_guess(&s1)))?;
        (x0, f0) = (x1, f1);
        (x1, f1, s1) = (x1 + step, f2, s2);
        if step.abs() < 1e-15 {
            break;
        }
    }
    let m = MassVector::new(vec![1.0, x1.exp(), 1.0, m45, m45])?;
    let sol = newton_solve(&m, &as_guess(&s1), &opts)?;
    Ok((m, sol))
}

/// Tries a short list of symmetric starting shapes until Newton converges.
pub fn solve_default(m: &MassVector, opts: &SolveOptions) -> Result<TrapezoidSolution> {
    let mut last = None;
    for (rho, h) in [(0.5, 1.0), (0.5, 0.6), (0.7, 0.8), (0.3, 1.5), (0.8, 0.5), (0.4, 2.5)] {
        match solve_critical_point(m, &initial_guess_symmetric(m, rho, h)?, opts) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd_jacobian;

    fn unit() -> MassVector {
        MassVector::new(vec![1.0; 5]).unwrap()
    }

    #[test]
    fn s24_s25_vanish_at_critical_radius() {
        let m = unit();
        let g = initial_guess_symmetric(&m, 0.5, 1.0).unwrap();
        let r = DistanceVector::new(5, g.r.clone()).unwrap();
        let res = residual_system(&r, &g.multipliers, &m).unwrap();
        assert!(res[5].abs() < 1e-13 && res[6].abs() < 1e-13);
        assert!(res[11].abs() < 1e-14 && res[12].abs() < 1e-14);
        assert!(res[10].abs() < 1e-14 * m.inertia_target());
        assert!(g.multipliers.delta > 0.0);
    }

    #[test]
    fn residuals_are_gradient_of_w245() {
        let m = MassVector::new(vec![1.0, 2.0, 0.7, 1.3, 0.9]).unwrap();
        let r = [0.5, 1.1, 1.3, 0.9, 0.7, 1.0, 0.8, 1.2, 0.95, 0.6];
        let mult = MultiplierSet { delta: 1.7, omega: 0.4, theta: 0.3 };
        let res = residuals_raw(&r, &mult, &m, m.inertia_target());
        let h = 1e-6;
        for k in 0..10 {
            let mut p = r;
            p[k] += h;
            let mut q = r;
            q[k] -= h;
            let fd = (w245(&p, &mult, &m) - w245(&q, &mult, &m)) / (2.0 * h);
            assert!((fd - res[k]).abs() < 1e-7 * res[k].abs().max(1.0), "slot {k}: {fd} vs {}", res[k]);
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let m = MassVector::new(vec![1.0, 2.0, 0.7, 1.3, 0.9]).unwrap();
        let z = [0.5, 1.1, 1.3, 0.9, 0.7, 1.0, 0.8, 1.2, 0.95, 0.6, 1.7, 0.4, 0.3];
        let f = |z: &[f64]| {
            let mult = MultiplierSet { delta: z[10], omega: z[11], theta: z[12] };
            residuals_raw(&z[..10], &mult, &m, m.inertia_target()).to_vec()
        };
        let fd = fd_jacobian(&z, f, 1e-7);
        let an = jacobian_raw(&z, &m);
        assert!((fd - an).abs().max() < 1e-6);
    }

    #[test]
    fn hessian_and_spectrum() {
        let m = MassVector::new(vec![1.0, 2.0, 0.7, 1.3, 0.9]).unwrap();
        let r = DistanceVector::new(5, vec![0.5, 1.1, 1.3, 0.9, 0.7, 1.0, 0.8, 1.2, 0.95, 0.6]).unwrap();
        let h0 = hessian_w245(&r, 1.5, 0.0, &m);
        assert_eq!(h0.clone() - DMatrix::from_diagonal(&h0.diagonal()), DMatrix::zeros(10, 10));
        let z = spectrum_closed_form(&r, 1.5, 0.0, &m);
        let (a, b) = (r_entry(1.1, 1.0, 0.7, 1.5), r_entry(0.6, 1.3, 0.9, 1.5));
        assert!((z[8] - a.max(b)).abs() < 1e-12 && (z[9] - a.min(b)).abs() < 1e-12);

        let h = hessian_w245(&r, 1.5, 0.37, &m);
        assert_eq!(h, h.transpose());
        assert!(spectrum_discrepancy(&r, 1.5, 0.37, &m) < 1e-12);
    }

    #[test]
    fn hessian_matches_second_differences() {
        let m = MassVector::new(vec![1.0, 2.0, 0.7, 1.3, 0.9]).unwrap();
        let r = [0.5, 1.1, 1.3, 0.9, 0.7, 1.0, 0.8, 1.2, 0.95, 0.6];
        let mult = MultiplierSet { delta: 1.7, omega: 0.4, theta: 0.3 };
        let h = hessian_raw(&r, mult.delta, mult.omega, &m);
        let g = |x: &[f64]| residuals_raw(x, &mult, &m, m.inertia_target())[..10].to_vec();
        let fd = fd_jacobian(&r, g, 1e-5);
        let scale = h.abs().max();
        assert!((fd - h).abs().max() < 1e-5 * scale);
    }

    #[test]
    fn zero_distance_guess_is_rejected() {
        let m = unit();
        let mut g = initial_guess_symmetric(&m, 0.5, 1.0).unwrap();
        g.r[3] = 0.0;
        let err = newton_solve(&m, &g, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    fn synthetic(r: Vec<f64>, m: &MassVector) -> TrapezoidSolution {
        let r = DistanceVector::new(5, r).unwrap();
        solution_from_parts(r, MultiplierSet { delta: 1.0, omega: 1.0, theta: 1.0 }, m).unwrap()
    }

    #[test]
    fn symmetry_classes_on_synthetic_vectors() {
        let m = unit();
        // Rectangle: r13 = r45.
        let a = 1.0f64;
        let b = 0.8f64;
        let d = (a * a + b * b).sqrt();
        let e = (0.25 + b * b).sqrt();
        let rect = vec![0.5, a, d, b, 0.5, e, e, b, d, a];
        assert_eq!(symmetry_analysis(&synthetic(rect, &m), &m).class, SymmetryClass::Rectangle);

        // r13 > r45, r12 < r23 with m1 < m3 and m4 > m5.
        let mm = MassVector::new(vec![0.8, 1.0, 1.2, 1.1, 0.9]).unwrap();
        let v = vec![0.9, 2.0, 1.6, 1.2, 1.1, 1.3, 1.3, 1.25, 1.7, 1.0];
        let verdict = symmetry_analysis(&synthetic(v.clone(), &mm), &mm);
        assert_eq!(verdict.class, SymmetryClass::AsymmetricR13GtR45, "{verdict:?}");
        // Same distances with m1 > m3 contradicts the derived inequality.
        let bad = MassVector::new(vec![1.2, 1.0, 0.8, 1.1, 0.9]).unwrap();
        let verdict = symmetry_analysis(&synthetic(v, &bad), &bad);
        assert_eq!(verdict.class, SymmetryClass::Violation);
        assert!(verdict.violated.iter().any(|s| s.contains("m1 <= m3")));

        // r13 < r45 without symmetry is a violation.
        let w = vec![0.5, 1.0, 1.6, 1.2, 0.5, 1.3, 1.31, 1.2, 1.6, 1.4];
        assert_eq!(symmetry_analysis(&synthetic(w, &m), &m).class, SymmetryClass::Violation);
    }

    #[test]
    fn mirror_relabeling_applied_when_r14_exceeds_r35() {
        let mm = MassVector::new(vec![1.2, 1.0, 0.8, 0.9, 1.1]).unwrap();
        // Mirror image of the asymmetric vector above.
        let v = vec![1.1, 2.0, 1.7, 1.25, 0.9, 1.3, 1.3, 1.2, 1.6, 1.0];
        let verdict = symmetry_analysis(&synthetic(v, &mm), &mm);
        assert!(verdict.mirrored);
        assert_eq!(verdict.class, SymmetryClass::AsymmetricR13GtR45, "{verdict:?}");
    }

    #[test]
    fn classification_flags_catch_perturbations() {
        let m = unit();
        let sol = solve_default(&m, &SolveOptions::default()).unwrap();
        assert!(classify(&sol, &m).is_ok(), "{:?}", sol.flags);

        let mut e = sol.r.entries().to_vec();
        e[R24] += 1e-3;
        let bumped = solution_from_parts(DistanceVector::new(5, e).unwrap(), sol.multipliers, &m).unwrap();
        let flags = evaluate_flags(&bumped, &m);
        assert!(!flags.r24_eq_r25);
        assert!(matches!(classify(&bumped, &m), Err(Error::Classification { .. })));

        let mut mult = sol.multipliers;
        mult.omega = -mult.omega;
        let flipped = solution_from_parts(sol.r.clone(), mult, &m).unwrap();
        assert!(!evaluate_flags(&flipped, &m).omega_positive);
    }

    #[test]
    fn zeta5_closed_form_at_solution() {
        let m = MassVector::new(vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        let sol = solve_default(&m, &SolveOptions::default()).unwrap();
        let z5 = sol.spectrum[4];
        let expect = 3.0 * m.m(1) * m.m(4) / sol.r.r(1, 4).powi(3);
        assert!((z5 - expect).abs() < 1e-9 * expect);
    }
}
