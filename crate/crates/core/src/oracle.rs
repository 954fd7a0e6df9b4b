//! Position-space ground truth: a direct solver of ∇U + λ∇I = 0 in the plane,
//! distance-to-position reconstruction and randomized identity checks.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collinear::{psi_transform, solution_p_vector, solve_ordering, CollinearOptions, Ordering};
use crate::constraints::{heron_factorization, l_constraint, t2, v2_k2, v4_k4, v5_k5, F2_BODIES, F4_BODIES, F5_BODIES};
use crate::distgeo::{
    cayley_menger_with, cm_gradient_entry, distances_from_positions, pair_index, pairs, quadruple_areas,
    DistanceVector, PlanarConfiguration,
};
use crate::energetics::{force_scale, s_entry, MassVector};
use crate::error::{Error, Result};
use crate::numerics::{damped_newton, max_abs, norm2, LinearSolve, NewtonOptions};

pub const ORACLE_TOL: f64 = 1e-12;
pub const CROSS_VALIDATION_TOL: f64 = 1e-8;
/// Per-body residual bound relative to the largest pairwise force.
pub const BODY_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: PlanarConfiguration,
    pub lambda: f64,
    /// λ/m, comparable with the distance-space δ.
    pub delta: f64,
    pub residual_norm: f64,
    /// max_i |∇ᵢU + λ∇ᵢI| / max_ij m_i m_j / r_ij².
    pub max_body_residual: f64,
    pub iterations: usize,
    pub gauge: String,
}

fn center(x: &[f64], m: &MassVector) -> [f64; 2] {
    let mut c = [0.0; 2];
    for k in 0..m.n() {
        c[0] += m.m(k + 1) * x[2 * k];
        c[1] += m.m(k + 1) * x[2 * k + 1];
    }
    [c[0] / m.total(), c[1] / m.total()]
}

fn inertia_flat(x: &[f64], m: &MassVector) -> f64 {
    let c = center(x, m);
    (0..m.n()).map(|k| 0.5 * m.m(k + 1) * ((x[2 * k] - c[0]).powi(2) + (x[2 * k + 1] - c[1]).powi(2))).sum()
}

/// ∇U + λ∇I stacked per body.
fn body_forces(x: &[f64], lambda: f64, m: &MassVector) -> Vec<f64> {
    let n = m.n();
    let c = center(x, m);
    let mut f = vec![0.0; 2 * n];
    for (i, j) in pairs(n) {
        let (a, b) = (i - 1, j - 1);
        let d = [x[2 * b] - x[2 * a], x[2 * b + 1] - x[2 * a + 1]];
        let r3 = d[0].hypot(d[1]).powi(3);
        let w = m.m(i) * m.m(j) / r3;
        for t in 0..2 {
            f[2 * a + t] += w * d[t];
            f[2 * b + t] -= w * d[t];
        }
    }
    for k in 0..n {
        for t in 0..2 {
            f[2 * k + t] += lambda * m.m(k + 1) * (x[2 * k + t] - c[t]);
        }
    }
    f
}

fn oracle_residual(z: &[f64], m: &MassVector, axis: (usize, usize)) -> Vec<f64> {
    let n = m.n();
    let x = &z[..2 * n];
    let mut out = body_forces(x, z[2 * n], m);
    let c = center(x, m);
    out.extend(c);
    out.push(x[2 * (axis.1 - 1) + 1] - x[2 * (axis.0 - 1) + 1]);
    out.push(inertia_flat(x, m) - m.inertia_target());
    out
}

fn oracle_jacobian(z: &[f64], m: &MassVector, axis: (usize, usize)) -> DMatrix<f64> {
    let n = m.n();
    let x = &z[..2 * n];
    let lambda = z[2 * n];
    let c = center(x, m);
    let mut jac = DMatrix::zeros(2 * n + 4, 2 * n + 1);
    for (i, j) in pairs(n) {
        let (a, b) = (i - 1, j - 1);
        let d = [x[2 * b] - x[2 * a], x[2 * b + 1] - x[2 * a + 1]];
        let r2 = d[0] * d[0] + d[1] * d[1];
        let r = r2.sqrt();
        let w = m.m(i) * m.m(j);
        // ∂/∂x_b of w d/r³ on body a.
        for s in 0..2 {
            for t in 0..2 {
                let delta_st = if s == t { 1.0 } else { 0.0 };
                let h = w * (delta_st / r.powi(3) - 3.0 * d[s] * d[t] / r.powi(5));
                jac[(2 * a + s, 2 * b + t)] += h;
                jac[(2 * a + s, 2 * a + t)] -= h;
                jac[(2 * b + s, 2 * b + t)] -= h;
                jac[(2 * b + s, 2 * a + t)] += h;
            }
        }
    }
    for k in 0..n {
        for l in 0..n {
            let v = lambda * m.m(k + 1) * ((k == l) as u8 as f64 - m.m(l + 1) / m.total());
            for t in 0..2 {
                jac[(2 * k + t, 2 * l + t)] += v;
            }
        }
        for t in 0..2 {
            jac[(2 * k + t, 2 * n)] = m.m(k + 1) * (x[2 * k + t] - c[t]);
            jac[(2 * n + t, 2 * k + t)] = m.m(k + 1) / m.total();
            jac[(2 * n + 3, 2 * k + t)] = m.m(k + 1) * (x[2 * k + t] - c[t]);
        }
    }
    jac[(2 * n + 2, 2 * (axis.1 - 1) + 1)] += 1.0;
    jac[(2 * n + 2, 2 * (axis.0 - 1) + 1)] -= 1.0;
    jac
}

/// Centered, rotated so that body `axis.0 → axis.1` points along +x, and scaled to I = I₀.
fn normalize(x: &PlanarConfiguration, m: &MassVector, axis: (usize, usize)) -> Vec<f64> {
    let flat = x.flat();
    let c = center(&flat, m);
    let (pa, pb) = (x.point(axis.0), x.point(axis.1));
    let ang = (pb[1] - pa[1]).atan2(pb[0] - pa[0]);
    let (sn, cs) = (-ang).sin_cos();
    let mut out: Vec<f64> = flat
        .chunks(2)
        .flat_map(|p| {
            let (u, v) = (p[0] - c[0], p[1] - c[1]);
            [cs * u - sn * v, sn * u + cs * v]
        })
        .collect();
    let s = (m.inertia_target() / inertia_flat(&out, m)).sqrt();
    out.iter_mut().for_each(|v| *v *= s);
    out
}

/// Newton (Gauss–Newton on the gauge-fixed system) for a planar central configuration.
pub fn solve_positions(m: &MassVector, guess: &PlanarConfiguration, tol: f64) -> Result<OracleSolution> {
    let axis = if m.n() >= 3 { (1, 3) } else { (1, 2) };
    solve_positions_gauged(m, guess, tol, axis)
}

/// [`solve_positions`] with the pinned direction along body `axis.0 → axis.1`.
pub fn solve_positions_gauged(
    m: &MassVector,
    guess: &PlanarConfiguration,
    tol: f64,
    axis: (usize, usize),
) -> Result<OracleSolution> {
    let n = m.n();
    if guess.len() != n || n < 2 {
        return Err(Error::InvalidInput(format!("{} points for {} masses", guess.len(), n)));
    }
    if axis.0 == axis.1 || axis.0 == 0 || axis.1 == 0 || axis.0 > n || axis.1 > n {
        return Err(Error::InvalidInput(format!("invalid gauge axis {axis:?}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let x0 = normalize(guess, m, axis);
    let r0 = distances_from_positions(&PlanarConfiguration::from_flat(&x0)?)?;
    // λ from the least-squares fit of ∇U = −λ∇I at the guess.
    let fu = body_forces(&x0, 0.0, m);
    let gi = body_forces(&x0, 1.0, m).iter().zip(&fu).map(|(a, b)| a - b).collect::<Vec<_>>();
    let lambda0 = -fu.iter().zip(&gi).map(|(a, b)| a * b).sum::<f64>() / gi.iter().map(|v| v * v).sum::<f64>();
    let mut z0 = x0;
    z0.push(lambda0);

    let scale = force_scale(&r0, m);
    let collision_floor = 1e-9 * r0.max_entry();
    let residual = |z: &[f64]| -> Option<Vec<f64>> {
        for (i, j) in pairs(n) {
            let d = (z[2 * j - 2] - z[2 * i - 2]).hypot(z[2 * j - 1] - z[2 * i - 1]);
            if d < collision_floor {
                return None;
            }
        }
        Some(oracle_residual(z, m, axis))
    };
    let opts = NewtonOptions { tol, max_iter: 100, solve: LinearSolve::LeastSquares, scale, ..Default::default() };
    let out = damped_newton(&z0, residual, |z| oracle_jacobian(z, m, axis), &opts)?;
    let x = PlanarConfiguration::from_flat(&out.x[..2 * n])?;
    let lambda = out.x[2 * n];
    let forces = body_forces(&out.x[..2 * n], lambda, m);
    let fs = force_scale(&distances_from_positions(&x)?, m);
    let max_body = (0..n).map(|k| forces[2 * k].hypot(forces[2 * k + 1])).fold(0.0, f64::max) / fs;
    Ok(OracleSolution {
        x,
        lambda,
        delta: lambda / m.total(),
        residual_norm: out.residual_norm,
        max_body_residual: max_body,
        iterations: out.iterations,
        gauge: format!("center of mass at origin; P{}->P{} along +x; I = I0", axis.0, axis.1),
    })
}

/// Planar points realizing `r`: P₁ at the origin, P₃ on the +x axis, the rest
/// by trilateration from P₁ and P₃, upper half-plane first.
pub fn reconstruct_positions(r: &DistanceVector) -> Result<PlanarConfiguration> {
    let n = r.n();
    if n < 3 {
        return Err(Error::Reconstruction("at least three bodies are needed".into()));
    }
    let scale = r.max_entry();
    let r13 = r.r(1, 3);
    let mut pts: Vec<Option<[f64; 2]>> = vec![None; n];
    pts[0] = Some([0.0, 0.0]);
    pts[2] = Some([r13, 0.0]);
    for k in (2..=n).filter(|&k| k != 3) {
        let (a, b) = (r.r(1, k), r.r(3, k));
        let x = (a * a - b * b + r13 * r13) / (2.0 * r13);
        let y2 = a * a - x * x;
        if y2 < -1e-9 * scale * scale {
            return Err(Error::Reconstruction(format!("bodies 1, 3, {k} violate the triangle inequality")));
        }
        let y = if y2.abs() < 1e-12 * scale * scale { 0.0 } else { y2.max(0.0).sqrt() };
        let mismatch = |cand: [f64; 2]| -> f64 {
            pts.iter()
                .enumerate()
                .filter(|(q, p)| p.is_some() && *q != 0 && *q != 2)
                .map(|(q, p)| {
                    let p = p.unwrap();
                    ((cand[0] - p[0]).hypot(cand[1] - p[1]) - r.r(q + 1, k)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (up, down) = ([x, y], [x, -y]);
        pts[k - 1] = Some(if mismatch(down) < mismatch(up) { down } else { up });
    }
    let x = PlanarConfiguration::new(pts.into_iter().map(|p| p.unwrap()).collect())?;
    let back = distances_from_positions(&x)?;
    for (k, (i, j)) in pairs(n).enumerate() {
        let (got, want) = (back.entries()[k], r.entries()[k]);
        if (got - want).abs() > 1e-9 * want {
            return Err(Error::Reconstruction(format!(
                "r_{i}{j} = {want} is not reproduced by a planar configuration (got {got})"
            )));
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub max_relative_error: f64,
    pub passed: bool,
    pub reconstruction: PlanarConfiguration,
    pub oracle: OracleSolution,
}

/// Reconstructs positions from `sol_r`, re-solves in position space and
/// returns the largest relative distance discrepancy.
pub fn cross_validate(sol_r: &DistanceVector, m: &MassVector) -> Result<CrossValidation> {
    if sol_r.n() != m.n() {
        return Err(Error::InvalidInput("distance and mass counts differ".into()));
    }
    let reconstruction = reconstruct_positions(sol_r)?;
    let oracle = solve_positions(m, &reconstruction, ORACLE_TOL)?;
    let r = distances_from_positions(&oracle.x)?;
    let max_relative_error =
        r.entries().iter().zip(sol_r.entries()).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    Ok(CrossValidation {
        max_relative_error,
        passed: max_relative_error < CROSS_VALIDATION_TOL,
        reconstruction,
        oracle,
    })
}

/// Coefficients of Euler's quintic, highest degree first.
pub fn euler_quintic_coefficients(m1: f64, m2: f64, m3: f64) -> [f64; 6] {
    [m2 + m3, 2.0 * m2 + 3.0 * m3, m2 + 3.0 * m3, -(3.0 * m1 + m2), -(3.0 * m1 + 2.0 * m2), -(m1 + m2)]
}

/// Euler's quintic at ρ = r₁₂/r₂₃ for bodies ordered 1, 2, 3 on the line.
pub fn euler_quintic_residual(m1: f64, m2: f64, m3: f64, rho: f64) -> f64 {
    euler_quintic_coefficients(m1, m2, m3).iter().fold(0.0, |acc, c| acc * rho + c)
}

/// Number of sign changes in the quintic's coefficient sequence.
pub fn descartes_sign_changes(m1: f64, m2: f64, m3: f64) -> usize {
    euler_quintic_coefficients(m1, m2, m3).windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

/// Result of one family of randomized identity checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzCheck {
    pub name: String,
    pub tolerance: f64,
    pub max_error: f64,
    pub samples: usize,
    /// Trial indices that exceeded the tolerance; rerun with the same seed to reproduce.
    pub failures: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub trials: u64,
    pub degenerate_samples: u64,
    pub checks: Vec<FuzzCheck>,
    pub passed: bool,
}

pub const FACTORIZATION_TOL: f64 = 1e-10;
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-6;
pub const AREA_TOL: f64 = 1e-12;

const CHECK_NAMES: [(&str, f64); 9] = [
    ("chain_rule", FINITE_DIFFERENCE_TOL),
    ("oriented_area", AREA_TOL),
    ("sine", AREA_TOL),
    ("factor_f2", FACTORIZATION_TOL),
    ("factor_f4", FACTORIZATION_TOL),
    ("factor_f5", FACTORIZATION_TOL),
    ("heron", FACTORIZATION_TOL),
    ("cm_gradient", FINITE_DIFFERENCE_TOL),
    ("eta_gradient_orthogonality", FINITE_DIFFERENCE_TOL),
];

struct Trial {
    errors: [f64; 9],
    degenerate: bool,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn random_planar(rng: &mut ChaCha8Rng, degenerate: bool) -> PlanarConfiguration {
    loop {
        let mut pts: Vec<[f64; 2]> =
            (0..5).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        if degenerate {
            let t: f64 = rng.random_range(-0.5..1.5);
            pts[2] = [pts[0][0] + t * (pts[1][0] - pts[0][0]), pts[0][1] + t * (pts[1][1] - pts[0][1])];
        }
        let far =
            pts.iter().enumerate().all(|(a, p)| pts[a + 1..].iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.05));
        if far {
            return PlanarConfiguration::new(pts).expect("separated points");
        }
    }
}

fn rel(err: f64, size: f64) -> f64 {
    if size == 0.0 {
        err
    } else {
        err / size
    }
}

fn wedge_from(x: &PlanarConfiguration, a: usize, b: usize) -> f64 {
    let (o, p, q) = (x.point(1), x.point(a), x.point(b));
    (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
}

/// W = U + mδI + Σ η_q F_q as a function of r, and its r-gradient at a planar point.
fn chain_rule_error(x: &PlanarConfiguration, m: &MassVector, delta: f64, eta: [f64; 3]) -> f64 {
    let quads = [F2_BODIES, F4_BODIES, F5_BODIES];
    let w_of = |flat: &[f64]| -> f64 {
        let r: Vec<f64> = pairs(5)
            .map(|(i, j)| (flat[2 * j - 2] - flat[2 * i - 2]).hypot(flat[2 * j - 1] - flat[2 * i - 1]))
            .collect();
        let mut w = 0.0;
        for (k, (i, j)) in pairs(5).enumerate() {
            w += m.m(i) * m.m(j) * (1.0 / r[k] + delta * r[k] * r[k] / 2.0);
        }
        for (q, quad) in quads.iter().enumerate() {
            w += eta[q] * cayley_menger_with(&r[..], quad).expect("four bodies");
        }
        w
    };
    let r = distances_from_positions(x).expect("separated points");
    let mut grad_r = vec![0.0; 10];
    for (k, (i, j)) in pairs(5).enumerate() {
        grad_r[k] = s_entry(r.r(i, j), m.m(i), m.m(j), delta);
    }
    for (q, quad) in quads.iter().enumerate() {
        let areas = quadruple_areas(x, *quad).expect("valid quad");
        for a in 0..4 {
            for b in a + 1..4 {
                let (i, j) = (quad[a], quad[b]);
                let k = pair_index(i, j, 5).expect("pair").linear;
                grad_r[k] += eta[q] * cm_gradient_entry(r.r(i, j), &areas[a], &areas[b]);
            }
        }
    }
    let mut grad_x = vec![0.0; 10];
    for (k, (i, j)) in pairs(5).enumerate() {
        let (p, q) = (x.point(i), x.point(j));
        for t in 0..2 {
            let dr = (p[t] - q[t]) / r.r(i, j);
            grad_x[2 * (i - 1) + t] += grad_r[k] * dr;
            grad_x[2 * (j - 1) + t] -= grad_r[k] * dr;
        }
    }
    let flat = x.flat();
    let h = 1e-6;
    let central = |k: usize, h: f64| {
        let (mut a, mut b) = (flat.clone(), flat.clone());
        a[k] += h;
        b[k] -= h;
        (w_of(&a) - w_of(&b)) / (2.0 * h)
    };
    let fd: Vec<f64> = (0..10).map(|k| (4.0 * central(k, h / 2.0) - central(k, h)) / 3.0).collect();
    let size = max_abs(&grad_x).max(max_abs(&grad_r));
    rel(grad_x.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max), size)
}

fn run_trial(seed: u64, trial: u64) -> Trial {
    let mut rng = trial_rng(seed, trial);
    let degenerate = rng.random_bool(0.05);
    let x = random_planar(&mut rng, degenerate);
    let m = MassVector::new((0..5).map(|_| rng.random_range(0.5..2.0)).collect()).expect("positive");
    let delta = rng.random_range(0.5..2.0);
    let eta = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let mut errors = [0.0; 9];

    errors[0] = chain_rule_error(&x, &m, delta, eta);

    let r1: Vec<f64> = (2..=5).map(|k| (x.point(k)[0] - x.point(1)[0]).hypot(x.point(k)[1] - x.point(1)[1])).collect();
    let plucker = wedge_from(&x, 2, 5) * wedge_from(&x, 3, 4) - wedge_from(&x, 2, 4) * wedge_from(&x, 3, 5)
        + wedge_from(&x, 4, 5) * wedge_from(&x, 2, 3);
    errors[1] = rel(plucker.abs(), r1.iter().product());

    let phi = |a: usize, b: usize| {
        let (o, p, q) = (x.point(1), x.point(a), x.point(b));
        let ang = (q[1] - o[1]).atan2(q[0] - o[0]) - (p[1] - o[1]).atan2(p[0] - o[0]);
        ang.rem_euclid(2.0 * PI)
    };
    errors[2] = (phi(2, 5).sin() * phi(3, 4).sin() - phi(2, 4).sin() * phi(3, 5).sin()
        + phi(4, 5).sin() * phi(2, 3).sin())
    .abs();

    let rv: Vec<f64> = (0..10).map(|_| rng.random_range(0.1..10.0)).collect();
    let r = DistanceVector::new(5, rv).expect("positive");
    let cm = |b: &[usize; 4]| cayley_menger_with(&r, b).expect("four bodies");
    let (v2, k2) = v2_k2(&r);
    let t = t2(&r);
    let f2 = cm(&F2_BODIES);
    errors[3] = rel((f2 - (v2 * t - 2.0 * k2 * k2)).abs(), f2.abs().max((v2 * t).abs()).max(2.0 * k2 * k2));
    let l = l_constraint(&r, [1, 2, 3]);
    for (slot, (f, (v, k))) in [(cm(&F4_BODIES), v4_k4(&r)), (cm(&F5_BODIES), v5_k5(&r))].into_iter().enumerate() {
        errors[4 + slot] = rel((f - (v * l - 2.0 * k * k)).abs(), f.abs().max((v * l).abs()).max(2.0 * k * k));
    }
    let (q, heron_res) = heron_factorization(&r);
    let f3 = cayley_menger_with(&r, &[1, 2, 3]).expect("three bodies");
    errors[6] = rel(heron_res.abs(), f3.abs().max((q * l).abs()));

    // ∂F/∂r_ij against central differences for the quadruple {1,2,3,5}.
    let rx = distances_from_positions(&x).expect("separated points");
    let areas = quadruple_areas(&x, F4_BODIES).expect("valid quad");
    let mut fd_err: f64 = 0.0;
    let mut size: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            let (i, j) = (F4_BODIES[a], F4_BODIES[b]);
            let k = pair_index(i, j, 5).expect("pair").linear;
            let h = 1e-6 * rx.entries()[k];
            let (mut up, mut dn) = (rx.entries().to_vec(), rx.entries().to_vec());
            up[k] += h;
            dn[k] -= h;
            let fd = (cayley_menger_with(&up[..], &F4_BODIES).unwrap()
                - cayley_menger_with(&dn[..], &F4_BODIES).unwrap())
                / (2.0 * h);
            let an = cm_gradient_entry(rx.r(i, j), &areas[a], &areas[b]);
            fd_err = fd_err.max((fd - an).abs());
            size = size.max(an.abs()).max(rx.entries()[k].powi(5));
        }
    }
    errors[7] = rel(fd_err, size);

    // A planar motion keeps every determinant at zero: ∇_r F · ∂r/∂x = 0.
    let mut orth: f64 = 0.0;
    for quad in [F2_BODIES, F4_BODIES, F5_BODIES] {
        let ar = quadruple_areas(&x, quad).expect("valid quad");
        let mut gx = [0.0; 10];
        let mut size: f64 = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                let (i, j) = (quad[a], quad[b]);
                let g = cm_gradient_entry(rx.r(i, j), &ar[a], &ar[b]);
                size = size.max(g.abs()).max(rx.r(i, j).powi(5));
                let (p, q) = (x.point(i), x.point(j));
                for t in 0..2 {
                    let dr = (p[t] - q[t]) / rx.r(i, j);
                    gx[2 * (i - 1) + t] += g * dr;
                    gx[2 * (j - 1) + t] -= g * dr;
                }
            }
        }
        orth = orth.max(rel(max_abs(&gx), size));
    }
    errors[8] = orth;
    Trial { errors, degenerate }
}

/// Randomized checks of the chain rule, area and sine identities, the
/// determinant factorizations and determinant gradients.
pub fn identity_fuzzer(seed: u64, trials: u64) -> Result<FuzzReport> {
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let results: Vec<Trial> = (0..trials).into_par_iter().map(|t| run_trial(seed, t)).collect();
    let checks: Vec<FuzzCheck> = CHECK_NAMES
        .iter()
        .enumerate()
        .map(|(c, (name, tol))| FuzzCheck {
            name: name.to_string(),
            tolerance: *tol,
            max_error: results.iter().map(|t| t.errors[c]).fold(0.0, f64::max),
            samples: results.len(),
            failures: (0..trials).filter(|&t| !(results[t as usize].errors[c] < *tol)).collect(),
        })
        .collect();
    let passed = checks.iter().all(|c| c.failures.is_empty());
    let degenerate_samples = results.iter().filter(|t| t.degenerate).count() as u64;
    Ok(FuzzReport { seed, trials, degenerate_samples, checks, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub cells: usize,
    /// Angle of the grid minimizer on the unit circle of p-coordinates.
    pub argmin_angle: f64,
    pub argmin_p: [f64; 2],
    pub u_min: f64,
    pub cell_width: f64,
    pub newton_angle: f64,
    /// |newton_angle − argmin_angle| in cell widths.
    pub cells_apart: f64,
    /// min(U at the two end cells) / U_min.
    pub endpoint_ratio: f64,
}

/// Grid minimum of U over the arc of normalized collinear configurations with order 1, 2, 3.
pub fn brute_force_minimum(m: &MassVector, cells: usize) -> Result<BruteForceResult> {
    if m.n() != 3 {
        return Err(Error::Precondition(format!("brute force is limited to three bodies, got {}", m.n())));
    }
    if cells < 2 {
        return Err(Error::InvalidInput("at least two grid cells are needed".into()));
    }
    let psi = psi_transform(m)?;
    // Arc endpoints: r₁₂ = 0 and r₂₃ = 0.
    let e0 = psi.p_coordinates(&[0.0, 1.0]);
    let e1 = psi.p_coordinates(&[1.0, 1.0]);
    let a0 = e0[1].atan2(e0[0]);
    let span = (e1[1].atan2(e1[0]) - a0 + PI).rem_euclid(2.0 * PI) - PI;
    let width = span.abs() / cells as f64;
    let u_at = |ang: f64| -> f64 {
        let r = psi.r_from_p(&[ang.cos(), ang.sin()]);
        let (r12, r13) = (r[0], r[1]);
        let r23 = r13 - r12;
        m.m(1) * m.m(2) / r12 + m.m(1) * m.m(3) / r13 + m.m(2) * m.m(3) / r23
    };
    let angle = |k: usize| a0 + span * (k as f64 + 0.5) / cells as f64;
    let (kmin, u_min) =
        (0..cells)
            .map(|k| (k, u_at(angle(k))))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let argmin_angle = angle(kmin);

    let sol = solve_ordering(m, &Ordering::identity(3), &CollinearOptions::default())?;
    let p = solution_p_vector(&sol, m)?;
    let newton_angle = p[1].atan2(p[0]);
    let diff = (newton_angle - argmin_angle + PI).rem_euclid(2.0 * PI) - PI;
    Ok(BruteForceResult {
        cells,
        argmin_angle,
        argmin_p: [argmin_angle.cos(), argmin_angle.sin()],
        u_min,
        cell_width: width,
        newton_angle,
        cells_apart: diff.abs() / width,
        endpoint_ratio: u_at(angle(0)).min(u_at(angle(cells - 1))) / u_min,
    })
}

/// Regular polygon of `n` points, anticlockwise from (1, 0).
pub fn regular_polygon(n: usize) -> PlanarConfiguration {
    PlanarConfiguration::new(
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                [a.cos(), a.sin()]
            })
            .collect(),
    )
    .expect("distinct vertices")
}

/// Norm of ∇U + λ∇I at given positions, relative to the largest pairwise force.
pub fn position_residual(x: &PlanarConfiguration, lambda: f64, m: &MassVector) -> Result<f64> {
    let f = body_forces(&x.flat(), lambda, m);
    Ok(norm2(&f) / force_scale(&distances_from_positions(x)?, m))
}
