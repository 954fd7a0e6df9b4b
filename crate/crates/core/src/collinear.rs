//! Collinear central configurations: per-ordering solves, Moulton
//! enumeration and the Γ / γ / Ψ coordinates of the normalized inertia form.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distgeo::{pair_count, pairs, DistanceVector};
use crate::energetics::{force_scale, inertia_raw, r_entry, s_entry, MassVector};
use crate::error::{Error, Result};
use crate::numerics::{damped_newton, norm2, symmetric_eigenvalues, NewtonOptions};

pub const SOLVER_TOL: f64 = 1e-12;
pub const MAX_ENUMERATION_BODIES: usize = 8;

/// Left-to-right order of bodies on the line, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering {
    perm: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Ordering::new(v)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.perm
    }
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n + 1];
        for &p in &perm {
            if p == 0 || p > n || seen[p] {
                return Err(Error::InvalidInput(format!("{perm:?} is not a permutation of 1..{n}")));
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (1..=n).collect() }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self { perm: self.perm.iter().rev().copied().collect() }
    }

    /// Reflection-canonical: first body label smaller than the last.
    pub fn is_canonical(&self) -> bool {
        self.perm.len() < 2 || self.perm[0] < self.perm[self.perm.len() - 1]
    }

    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.reversed()
        }
    }

    /// Masses in positional order.
    pub fn positional_masses(&self, m: &MassVector) -> Result<MassVector> {
        if m.n() != self.len() {
            return Err(Error::InvalidInput(format!("ordering of {} bodies, {} masses", self.len(), m.n())));
        }
        m.permuted(&self.perm)
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.perm.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

/// All reflection-canonical orderings of `n` bodies in lexicographic order.
pub fn canonical_orderings(n: usize) -> Vec<Ordering> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (1..=n).collect();
    loop {
        let o = Ordering { perm: perm.clone() };
        if o.is_canonical() {
            out.push(o);
        }
        // Next lexicographic permutation.
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else { break };
        let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// σ_ij multiplier for positions 1 < i < j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearSolution {
    pub ordering: Ordering,
    /// g_k = x_{k+1} − x_k in positional order.
    pub gaps: Vec<f64>,
    /// Coordinates by position, center of mass at the origin.
    pub positions: Vec<f64>,
    pub delta: f64,
    pub sigma: Vec<SigmaEntry>,
    /// Body residuals by position followed by I − I₀.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Diagonal Hessian entries m_i m_j (δ + 2/r_ij³) in positional pair order.
    pub spectrum: Vec<f64>,
    /// Signs of S_ij in positional pair order (−1, 0, +1).
    pub s_signs: Vec<i8>,
    /// Distances keyed by body labels.
    pub r: DistanceVector,
}

impl CollinearSolution {
    /// Distances in positional order (r_ij between the i-th and j-th body from the left).
    pub fn positional_distances(&self) -> Vec<f64> {
        positional_r(&self.gaps)
    }

    /// r₁₂/r₂₃ for three bodies in positional order.
    pub fn gap_ratio(&self) -> f64 {
        self.gaps[0] / self.gaps[1]
    }
}

fn positional_r(gaps: &[f64]) -> Vec<f64> {
    let n = gaps.len() + 1;
    let mut x = vec![0.0; n];
    for k in 1..n {
        x[k] = x[k - 1] + gaps[k - 1];
    }
    pairs(n).map(|(i, j)| x[j - 1] - x[i - 1]).collect()
}

fn body_residuals(r: &[f64], delta: f64, mp: &MassVector) -> Vec<f64> {
    let n = mp.n();
    let mut res = vec![0.0; n];
    for (k, (i, j)) in pairs(n).enumerate() {
        let s = s_entry(r[k], mp.m(i), mp.m(j), delta);
        res[j - 1] += s;
        res[i - 1] -= s;
    }
    res
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearResiduals {
    /// Σ_{i<j} S_ij − Σ_{k>j} S_jk for each position j.
    pub body: Vec<f64>,
    pub normalization_defect: f64,
}

/// Stationarity residuals of the collinear Lagrangian for `ordering`.
pub fn residuals_collinear(
    gaps: &[f64],
    delta: f64,
    m: &MassVector,
    ordering: &Ordering,
) -> Result<CollinearResiduals> {
    let mp = ordering.positional_masses(m)?;
    if gaps.len() + 1 != mp.n() {
        return Err(Error::InvalidInput(format!("{} gaps for {} bodies", gaps.len(), mp.n())));
    }
    if let Some(k) = gaps.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::Precondition(format!("gap {} = {} is not positive", k + 1, gaps[k])));
    }
    let r = positional_r(gaps);
    Ok(CollinearResiduals {
        body: body_residuals(&r, delta, &mp),
        normalization_defect: inertia_raw(&r, &mp) - mp.inertia_target(),
    })
}

fn system(z: &[f64], mp: &MassVector) -> Vec<f64> {
    let n = mp.n();
    let r = positional_r(&z[..n - 1]);
    let mut out = body_residuals(&r, z[n - 1], mp);
    out.truncate(n - 1);
    out.push(inertia_raw(&r, mp) - mp.inertia_target());
    out
}

fn system_jacobian(z: &[f64], mp: &MassVector) -> DMatrix<f64> {
    let n = mp.n();
    let delta = z[n - 1];
    let r = positional_r(&z[..n - 1]);
    let mut jac = DMatrix::zeros(n, n);
    for (k, (i, j)) in pairs(n).enumerate() {
        let w = mp.m(i) * mp.m(j);
        let ds_dr = r_entry(r[k], mp.m(i), mp.m(j), delta);
        let ds_dd = w * r[k];
        let di_dr = w * r[k] / mp.total();
        // r_ij depends on gaps i..j-1 (1-based positions).
        for g in i..j {
            if j - 1 < n - 1 {
                jac[(j - 1, g - 1)] += ds_dr;
            }
            if i - 1 < n - 1 {
                jac[(i - 1, g - 1)] -= ds_dr;
            }
            jac[(n - 1, g - 1)] += di_dr;
        }
        if j - 1 < n - 1 {
            jac[(j - 1, n - 1)] += ds_dd;
        }
        if i - 1 < n - 1 {
            jac[(i - 1, n - 1)] -= ds_dd;
        }
    }
    jac
}

/// Equal gaps scaled so that I = I₀.
pub fn uniform_gaps(mp: &MassVector) -> Vec<f64> {
    let n = mp.n();
    let g = vec![1.0; n - 1];
    let s = (mp.inertia_target() / inertia_raw(&positional_r(&g), mp)).sqrt();
    g.iter().map(|v| v * s).collect()
}

/// δ balancing the first body's equation for the given gaps.
fn delta_guess(gaps: &[f64], mp: &MassVector) -> f64 {
    let n = mp.n();
    let r = positional_r(gaps);
    let (mut num, mut den) = (0.0, 0.0);
    for k in 2..=n {
        let w = mp.m(1) * mp.m(k);
        num += w * r[k - 2].powi(-2);
        den += w * r[k - 2];
    }
    num / den
}

#[derive(Clone, Copy, Debug)]
pub struct CollinearOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CollinearOptions {
    fn default() -> Self {
        Self { tol: SOLVER_TOL, max_iter: 200 }
    }
}

/// Solve for the collinear central configuration with the given body order.
pub fn solve_ordering(m: &MassVector, ordering: &Ordering, opts: &CollinearOptions) -> Result<CollinearSolution> {
    let mp = ordering.positional_masses(m)?;
    if mp.n() < 2 {
        return Err(Error::InvalidInput("at least two bodies are needed".into()));
    }
    solve_ordering_from(m, ordering, &uniform_gaps(&mp), opts)
}

/// Same as [`solve_ordering`] from explicit initial gaps (rescaled to I = I₀).
pub fn solve_ordering_from(
    m: &MassVector,
    ordering: &Ordering,
    initial_gaps: &[f64],
    opts: &CollinearOptions,
) -> Result<CollinearSolution> {
    let mp = ordering.positional_masses(m)?;
    let n = mp.n();
    if initial_gaps.len() + 1 != n || initial_gaps.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::Precondition("initial gaps must be n-1 positive lengths".into()));
    }
    let s = (mp.inertia_target() / inertia_raw(&positional_r(initial_gaps), &mp)).sqrt();
    let g0: Vec<f64> = initial_gaps.iter().map(|g| g * s).collect();
    let mut z0 = g0.clone();
    z0.push(delta_guess(&g0, &mp));

    let residual = |z: &[f64]| -> Option<Vec<f64>> {
        if z[..n - 1].iter().any(|g| !(*g > 0.0)) {
            return None;
        }
        Some(system(z, &mp))
    };
    let scale = force_scale(&positional_r(&g0)[..], &mp);
    let nopts = NewtonOptions { tol: opts.tol, max_iter: opts.max_iter, scale, ..Default::default() };
    let out = damped_newton(&z0, residual, |z| system_jacobian(z, &mp), &nopts)?;
    let gaps = out.x[..n - 1].to_vec();
    let delta = out.x[n - 1];
    if let Some(k) = gaps.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::InvalidOrdering { ordering: ordering.clone(), index: k + 1, value: gaps[k] });
    }
    let sol = assemble(ordering, &mp, gaps, delta, out.iterations)?;
    check_invariants(&sol, &mp)?;
    Ok(sol)
}

fn assemble(
    ordering: &Ordering,
    mp: &MassVector,
    gaps: Vec<f64>,
    delta: f64,
    iterations: usize,
) -> Result<CollinearSolution> {
    let n = mp.n();
    let rp = positional_r(&gaps);
    let mut residuals = body_residuals(&rp, delta, mp);
    residuals.push(inertia_raw(&rp, mp) - mp.inertia_target());
    let residual_norm = norm2(&residuals);

    let mut x = vec![0.0; n];
    for k in 1..n {
        x[k] = x[k - 1] + gaps[k - 1];
    }
    let c: f64 = x.iter().zip(mp.masses()).map(|(xi, mi)| xi * mi).sum::<f64>() / mp.total();
    let positions: Vec<f64> = x.iter().map(|xi| xi - c).collect();

    let s: Vec<f64> = pairs(n).zip(&rp).map(|((i, j), r)| s_entry(*r, mp.m(i), mp.m(j), delta)).collect();
    let sigma =
        pairs(n).zip(&s).filter(|((i, _), _)| *i > 1).map(|((i, j), v)| SigmaEntry { i, j, value: -v }).collect();
    let s_signs = s
        .iter()
        .map(|v| {
            if *v > 0.0 {
                1
            } else if *v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let spectrum = pairs(n).zip(&rp).map(|((i, j), r)| r_entry(*r, mp.m(i), mp.m(j), delta)).collect();

    // Distances by body label: position k holds body perm[k-1].
    let perm = ordering.perm();
    let mut pos_of = vec![0; n + 1];
    for (k, &b) in perm.iter().enumerate() {
        pos_of[b] = k;
    }
    let by_body: Vec<f64> = pairs(n).map(|(a, b)| (x[pos_of[a]] - x[pos_of[b]]).abs()).collect();
    Ok(CollinearSolution {
        ordering: ordering.clone(),
        gaps,
        positions,
        delta,
        sigma,
        residuals,
        residual_norm,
        iterations,
        spectrum,
        s_signs,
        r: DistanceVector::new(n, by_body)?,
    })
}

/// The δ bracket r₁ₙ⁻³ < δ < min(r₁₂⁻³, r₂₃⁻³, r_{n−2,n−1}⁻³, r_{n−1,n}⁻³) in positional labels.
pub fn delta_bracket(gaps: &[f64]) -> (f64, f64) {
    let n = gaps.len() + 1;
    let total: f64 = gaps.iter().sum();
    let mut upper = f64::INFINITY;
    for k in [0, 1, n.saturating_sub(3), n - 2] {
        if k < gaps.len() {
            upper = upper.min(gaps[k].powi(-3));
        }
    }
    (total.powi(-3), upper)
}

fn check_invariants(sol: &CollinearSolution, mp: &MassVector) -> Result<()> {
    let (lo, hi) = delta_bracket(&sol.gaps);
    let fail = |reason: String| Err(Error::CollinearInvariant { ordering: sol.ordering.clone(), reason });
    if !(lo < sol.delta && sol.delta < hi) && mp.n() > 2 {
        return fail(format!("delta = {} outside ({lo}, {hi})", sol.delta));
    }
    if sol.spectrum.iter().any(|z| !(*z > 0.0)) {
        return fail("non-positive Hessian entry".into());
    }
    Ok(())
}

/// Solutions for every reflection-canonical ordering, sorted by ordering.
pub fn moulton_enumerate(m: &MassVector, opts: &CollinearOptions) -> Result<Vec<CollinearSolution>> {
    let n = m.n();
    if n > MAX_ENUMERATION_BODIES {
        return Err(Error::Precondition(format!("enumeration is limited to {MAX_ENUMERATION_BODIES} bodies, got {n}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput("at least two bodies are needed".into()));
    }
    let results: Vec<(Ordering, Result<CollinearSolution>)> = canonical_orderings(n)
        .into_par_iter()
        .map(|o| {
            let r = solve_ordering(m, &o, opts);
            (o, r)
        })
        .collect();
    let failed: Vec<Ordering> = results.iter().filter(|(_, r)| r.is_err()).map(|(o, _)| o.clone()).collect();
    if !failed.is_empty() {
        return Err(Error::EnumerationIncomplete { failed });
    }
    let mut sols: Vec<CollinearSolution> = results.into_iter().map(|(_, r)| r.unwrap()).collect();
    sols.sort_by(|a, b| a.ordering.cmp(&b.ordering));
    Ok(sols)
}

/// True when no two solutions share a body-labeled distance vector (relative 1e−8).
pub fn pairwise_distinct(sols: &[CollinearSolution]) -> bool {
    let scale = sols.iter().map(|s| s.r.max_entry()).fold(0.0, f64::max);
    let tol = 1e-8 * scale;
    let mut order: Vec<&CollinearSolution> = sols.iter().collect();
    order.sort_by(|a, b| a.r.entries()[0].total_cmp(&b.r.entries()[0]));
    for (a, sa) in order.iter().enumerate() {
        for sb in &order[a + 1..] {
            if sb.r.entries()[0] - sa.r.entries()[0] >= tol {
                break;
            }
            let gap = sa.r.entries().iter().zip(sb.r.entries()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if gap < tol {
                return false;
            }
        }
    }
    true
}

/// Multi-start check that an ordering has a single solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingProbe {
    pub ordering: Ordering,
    pub starts: usize,
    pub converged: usize,
    pub clusters: usize,
    /// Largest relative gap deviation among converged runs.
    pub spread: f64,
}

pub fn ordering_probe(
    m: &MassVector,
    ordering: &Ordering,
    starts: usize,
    seed: u64,
    opts: &CollinearOptions,
) -> Result<OrderingProbe> {
    let n = ordering.len();
    let sols: Vec<Vec<f64>> = (0..starts as u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let g: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.1..1.0)).collect();
            solve_ordering_from(m, ordering, &g, opts).ok().map(|s| s.gaps)
        })
        .collect();
    let mut reps: Vec<&Vec<f64>> = Vec::new();
    let mut spread: f64 = 0.0;
    for g in &sols {
        let scale = g.iter().cloned().fold(0.0, f64::max);
        if let Some(first) = sols.first() {
            let d = g.iter().zip(first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            spread = spread.max(d);
        }
        if !reps.iter().any(|r| r.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-6 * scale) {
            reps.push(g);
        }
    }
    Ok(OrderingProbe { ordering: ordering.clone(), starts, converged: sols.len(), clusters: reps.len(), spread })
}

/// Hessian diagonal m_i m_j (δ + 2/r_ij³) over all pairs.
pub fn hessian_collinear(r: &DistanceVector, delta: f64, m: &MassVector) -> Result<Vec<f64>> {
    if r.n() != m.n() {
        return Err(Error::InvalidInput("distance and mass counts differ".into()));
    }
    Ok(pairs(m.n()).map(|(i, j)| r_entry(r.r(i, j), m.m(i), m.m(j), delta)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaMatrix {
    /// Row-major (n−1)×(n−1) matrix over indices 2..n.
    pub matrix: Vec<Vec<f64>>,
    pub positive_definite: bool,
    pub diagonally_dominant: bool,
    /// Row-wise diag − Σ|off-diagonal|, equal to m_1 m_k.
    pub dominance_margins: Vec<f64>,
    pub min_eigenvalue: f64,
}

fn gamma_dmatrix(m: &MassVector) -> DMatrix<f64> {
    let n = m.n();
    let total = m.total();
    DMatrix::from_fn(n - 1, n - 1, |a, b| {
        let (j, k) = (a + 2, b + 2);
        if j == k {
            m.m(k) * (total - m.m(k))
        } else {
            -m.m(j) * m.m(k)
        }
    })
}

/// Γ with rᵀΓr = 2m·I for r = (r₁₂, ..., r₁ₙ) on a line.
pub fn gamma_matrix(m: &MassVector) -> Result<GammaMatrix> {
    if m.n() < 2 {
        return Err(Error::InvalidInput("at least two bodies are needed".into()));
    }
    let g = gamma_dmatrix(m);
    let k = g.nrows();
    let dominance_margins: Vec<f64> =
        (0..k).map(|a| g[(a, a)] - (0..k).filter(|&b| b != a).map(|b| g[(a, b)].abs()).sum::<f64>()).collect();
    let min_eigenvalue = symmetric_eigenvalues(&g)[0];
    Ok(GammaMatrix {
        matrix: (0..k).map(|a| (0..k).map(|b| g[(a, b)]).collect()).collect(),
        positive_definite: min_eigenvalue > 0.0 && g.clone().cholesky().is_some(),
        diagonally_dominant: dominance_margins.iter().all(|d| *d > 0.0),
        dominance_margins,
        min_eigenvalue,
    })
}

fn upper_factor(m: &MassVector) -> Result<DMatrix<f64>> {
    let chol =
        gamma_dmatrix(m).cholesky().ok_or_else(|| Error::Precondition("Gamma is not positive definite".into()))?;
    Ok(chol.l().transpose())
}

/// Pivots γ₂..γₙ of completing the square in rᵀΓr from r₁₂ onward.
pub fn gamma_recursion(m: &MassVector) -> Result<Vec<f64>> {
    let u = upper_factor(m)?;
    let g: Vec<f64> = u.diagonal().iter().map(|d| d * d).collect();
    if let Some(v) = g.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Precondition(format!("gamma pivot {v} is not positive")));
    }
    Ok(g)
}

/// Σ γ_k (r_k + Σ_{l>k} c_kl r_l)², the completed-square form of rᵀΓr.
pub fn completed_square(m: &MassVector, r1: &[f64]) -> Result<f64> {
    let u = upper_factor(m)?;
    let gam = gamma_recursion(m)?;
    let k = u.nrows();
    Ok((0..k)
        .map(|a| {
            let lin: f64 = (a..k).map(|b| u[(a, b)] / u[(a, a)] * r1[b]).sum();
            gam[a] * lin * lin
        })
        .sum())
}

/// rᵀΓr.
pub fn gamma_form(m: &MassVector, r1: &[f64]) -> f64 {
    let g = gamma_dmatrix(m);
    let v = nalgebra::DVector::from_column_slice(r1);
    (v.transpose() * &g * &v)[(0, 0)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiTransform {
    /// Upper triangular, p = Ψ⁻¹ r.
    pub psi_inv: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    /// max |Ψ Ψ⁻¹ − I|.
    pub roundtrip_error: f64,
}

pub fn psi_transform(m: &MassVector) -> Result<PsiTransform> {
    let psi_inv = upper_factor(m)?;
    let psi = psi_inv.clone().try_inverse().ok_or_else(|| Error::Precondition("Psi^-1 is singular".into()))?;
    let k = psi.nrows();
    let roundtrip_error = (&psi * &psi_inv - DMatrix::identity(k, k)).abs().max();
    Ok(PsiTransform { psi_inv, psi, roundtrip_error })
}

impl PsiTransform {
    pub fn p_coordinates(&self, r1: &[f64]) -> Vec<f64> {
        (&self.psi_inv * nalgebra::DVector::from_column_slice(r1)).iter().copied().collect()
    }

    pub fn r_from_p(&self, p: &[f64]) -> Vec<f64> {
        (&self.psi * nalgebra::DVector::from_column_slice(p)).iter().copied().collect()
    }
}

/// p-vector of a solution: Ψ⁻¹ applied to (r₁₂, ..., r₁ₙ) in positional order.
pub fn solution_p_vector(sol: &CollinearSolution, m: &MassVector) -> Result<Vec<f64>> {
    let mp = sol.ordering.positional_masses(m)?;
    let n = mp.n();
    let r1: Vec<f64> = (1..n).map(|k| sol.gaps[..k].iter().sum()).collect();
    Ok(psi_transform(&mp)?.p_coordinates(&r1))
}

/// Outcome of the basis check for the collinearity constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LijkReport {
    pub n: usize,
    pub basis_size: usize,
    pub rank: usize,
    pub independent: bool,
    /// Every ∇L_ijk equals ∇L₁ᵢⱼ − ∇L₁ᵢₖ + ∇L₁ⱼₖ exactly.
    pub span_identity: bool,
}

fn grad_l(n: usize, i: usize, j: usize, k: usize) -> Vec<i64> {
    let mut g = vec![0i64; pair_count(n)];
    let idx = |a, b| crate::distgeo::pair_index(a, b, n).unwrap().linear;
    g[idx(i, j)] += 1;
    g[idx(i, k)] -= 1;
    g[idx(j, k)] += 1;
    g
}

/// Integer rank by fraction-free elimination.
fn exact_rank(mut rows: Vec<Vec<i128>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            for cc in c + 1..cols {
                rows[r][cc] = (rows[rank][c] * rows[r][cc] - rows[r][c] * rows[rank][cc]) / prev;
            }
            rows[r][c] = 0;
        }
        prev = rows[rank][c];
        rank += 1;
    }
    rank
}

/// Rank and span test for ∇L₁ₗₚ, 1 < l < p ≤ n.
pub fn lijk_basis_check(n: usize) -> Result<LijkReport> {
    if !(3..=12).contains(&n) {
        return Err(Error::InvalidInput(format!("basis check supports 3..=12 bodies, got {n}")));
    }
    let basis: Vec<Vec<i64>> =
        (2..=n).flat_map(|l| (l + 1..=n).map(move |p| (l, p))).map(|(l, p)| grad_l(n, 1, l, p)).collect();
    let rank = exact_rank(basis.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect());
    let mut span_identity = true;
    for i in 2..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                let lhs = grad_l(n, i, j, k);
                let (a, b, c) = (grad_l(n, 1, i, j), grad_l(n, 1, i, k), grad_l(n, 1, j, k));
                span_identity &= lhs.iter().enumerate().all(|(t, v)| *v == a[t] - b[t] + c[t]);
            }
        }
    }
    let basis_size = basis.len();
    Ok(LijkReport { n, basis_size, rank, independent: rank == basis_size, span_identity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> MassVector {
        MassVector::new(vec![1.0; n]).unwrap()
    }

    #[test]
    fn residuals_vanish_at_hand_solution() {
        let res = residuals_collinear(&[1.0, 1.0], 5.0 / 12.0, &ones(3), &Ordering::identity(3)).unwrap();
        assert!(res.body.iter().all(|v| v.abs() < 1e-15), "{:?}", res.body);
    }

    #[test]
    fn residuals_sum_to_zero_and_reverse_antisymmetrically() {
        let m = MassVector::new(vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let res = residuals_collinear(&[0.3, 0.5, 0.3], 2.7, &m, &Ordering::identity(4)).unwrap();
        assert!(res.body.iter().sum::<f64>().abs() < 1e-13);
        for k in 0..4 {
            assert!((res.body[k] + res.body[3 - k]).abs() < 1e-13);
        }
    }

    #[test]
    fn nonpositive_gap_rejected() {
        assert!(residuals_collinear(&[1.0, 0.0], 1.0, &ones(3), &Ordering::identity(3)).is_err());
    }

    #[test]
    fn equal_masses_three_bodies_is_symmetric() {
        let sol = solve_ordering(&ones(3), &Ordering::identity(3), &CollinearOptions::default()).unwrap();
        assert!((sol.gap_ratio() - 1.0).abs() < 1e-12);
        assert!(sol.sigma.len() == 1 && sol.sigma[0].i == 2 && sol.sigma[0].j == 3);
    }

    #[test]
    fn canonical_orderings_count() {
        assert_eq!(canonical_orderings(3).len(), 3);
        assert_eq!(canonical_orderings(4).len(), 12);
        assert_eq!(canonical_orderings(5).len(), 60);
        assert!(canonical_orderings(4).iter().all(|o| o.is_canonical()));
        assert_eq!(Ordering::new(vec![3, 1, 2]).unwrap().canonical().perm(), &[2, 1, 3]);
        assert!(Ordering::new(vec![1, 1, 2]).is_err());
        assert_eq!(Ordering::new(vec![2, 3, 1]).unwrap().to_string(), "2-3-1");
    }

    #[test]
    fn enumeration_guard() {
        let m = ones(9);
        assert!(matches!(moulton_enumerate(&m, &CollinearOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn gamma_for_three_equal_masses() {
        let g = gamma_matrix(&ones(3)).unwrap();
        assert_eq!(g.matrix, vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert!((g.min_eigenvalue - 1.0).abs() < 1e-14);
        assert!(g.positive_definite && g.diagonally_dominant);
        let gam = gamma_recursion(&ones(3)).unwrap();
        assert!((gam[0] - 2.0).abs() < 1e-15 && (gam[1] - 1.5).abs() < 1e-15);
        let psi = psi_transform(&ones(3)).unwrap();
        let expect = [[2f64.sqrt(), -1.0 / 2f64.sqrt()], [0.0, 1.5f64.sqrt()]];
        for (a, row) in expect.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                assert!((psi.psi_inv[(a, b)] - v).abs() < 1e-15);
            }
        }
        assert!(psi.roundtrip_error < 1e-15);
    }

    #[test]
    fn gamma_base_case_and_margins() {
        let m = MassVector::new(vec![0.7, 1.3, 2.1, 0.4]).unwrap();
        let g = gamma_matrix(&m).unwrap();
        assert_eq!(gamma_recursion(&m).unwrap()[0], m.m(2) * (m.total() - m.m(2)));
        for (k, d) in g.dominance_margins.iter().enumerate() {
            assert!((d - m.m(1) * m.m(k + 2)).abs() < 1e-14);
        }
    }

    #[test]
    fn hessian_collinear_entry() {
        let r = DistanceVector::new(2, vec![1.0]).unwrap();
        assert_eq!(hessian_collinear(&r, 1.0, &ones(2)).unwrap(), vec![3.0]);
    }

    #[test]
    fn lijk_basis() {
        for n in 3..=7 {
            let rep = lijk_basis_check(n).unwrap();
            assert!(rep.independent && rep.span_identity, "{rep:?}");
            assert_eq!(rep.basis_size, (n - 1) * (n - 2) / 2);
        }
    }
}
