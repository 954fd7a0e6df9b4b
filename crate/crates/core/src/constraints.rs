//! Trapezoid and collinearity constraints, the V/K factor polynomials and
//! membership in the five-body constraint sets.

use serde::{Deserialize, Serialize};

use crate::distgeo::{cayley_menger_with, is_realizable, scaled_slack, DistanceVector, PairDistances};
use crate::energetics::{inertia_raw, MassVector};
use crate::error::{Error, Result};

/// Equality tolerance before scaling by the polynomial degree.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Bodies of the three Cayley–Menger determinants used for the trapezoid:
/// F_i is the determinant with body i deleted.
pub const F2_BODIES: [usize; 4] = [1, 3, 4, 5];
pub const F4_BODIES: [usize; 4] = [1, 2, 3, 5];
pub const F5_BODIES: [usize; 4] = [1, 2, 3, 4];

/// T₂ = 2r₁₃r₄₅ − r₁₄² + r₁₅² + r₃₄² − r₃₅².
pub fn t2<D: PairDistances + ?Sized>(r: &D) -> f64 {
    let d = |i, j| r.dist(i, j);
    2.0 * d(1, 3) * d(4, 5) - d(1, 4).powi(2) + d(1, 5).powi(2) + d(3, 4).powi(2) - d(3, 5).powi(2)
}

/// L_{i,j,k} = r_ij − r_ik + r_jk.
pub fn l_constraint<D: PairDistances + ?Sized>(r: &D, triple: [usize; 3]) -> f64 {
    let [i, j, k] = triple;
    r.dist(i, j) - r.dist(i, k) + r.dist(j, k)
}

/// (V₂, K₂) with F(1,3,4,5) = V₂T₂ − 2K₂².
pub fn v2_k2<D: PairDistances + ?Sized>(r: &D) -> (f64, f64) {
    let d = |i, j| r.dist(i, j);
    let (r13, r14, r15, r34, r35, r45) = (d(1, 3), d(1, 4), d(1, 5), d(3, 4), d(3, 5), d(4, 5));
    let v2 = -2.0
        * (r35 * r35 * (r13 - r45).powi(2) - r14 * r14 * r35 * r35 + (r13 * r13 - r15 * r15) * (r45 * r45 - r34 * r34));
    let k2 = r13 * (r34 * r34 - r35 * r35 - r45 * r45) + r45 * (r13 * r13 - r15 * r15 + r35 * r35);
    (v2, k2)
}

/// (V, K) factoring the determinant of {1,2,3,p} as V·L₁₂₃ − 2K².
fn v_k_apex<D: PairDistances + ?Sized>(r: &D, p: usize) -> (f64, f64) {
    let d = |i, j| r.dist(i, j);
    let (r12, r13, r23) = (d(1, 2), d(1, 3), d(2, 3));
    let (r1p, r2p, r3p) = (d(1, p), d(2, p), d(3, p));
    let v = 2.0
        * (r12 - r13 - r23)
        * ((r12 * r13 - r1p * r1p).powi(2) + (r23 * r23 - r2p * r2p - r3p * r3p) * r1p * r1p - r13 * r13 * r2p * r2p
            + (r2p * r2p - r12 * r12) * r3p * r3p);
    let k = r13 * (r12 * r12 + r1p * r1p - r2p * r2p) - r12 * (r13 * r13 + r1p * r1p - r3p * r3p);
    (v, k)
}

/// (V₄, K₄) with F(1,2,3,5) = V₄L₁₂₃ − 2K₄².
pub fn v4_k4<D: PairDistances + ?Sized>(r: &D) -> (f64, f64) {
    v_k_apex(r, 5)
}

/// (V₅, K₅) with F(1,2,3,4) = V₅L₁₂₃ − 2K₅².
pub fn v5_k5<D: PairDistances + ?Sized>(r: &D) -> (f64, f64) {
    v_k_apex(r, 4)
}

/// Heron factor Q of the first three bodies and the residual F₃ − Q·L₁₂₃.
pub fn heron_factorization<D: PairDistances + ?Sized>(r: &D) -> (f64, f64) {
    let (r12, r13, r23) = (r.dist(1, 2), r.dist(1, 3), r.dist(2, 3));
    let q = (r12 - r13 - r23) * (r12 + r13 - r23) * (r12 + r13 + r23);
    let f3 = cayley_menger_with(r, &[1, 2, 3]).expect("three bodies");
    (q, f3 - q * l_constraint(r, [1, 2, 3]))
}

/// The three determinants F₂, F₄, F₅ of a five-body vector.
pub fn trapezoid_determinants<D: PairDistances + ?Sized>(r: &D) -> (f64, f64, f64) {
    let f = |b: &[usize; 4]| cayley_menger_with(r, b).expect("four bodies");
    (f(&F2_BODIES), f(&F4_BODIES), f(&F5_BODIES))
}

/// Parallelism of determinant gradients with constraint gradients on H₂₄₅.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCollinearityReport {
    pub v2: f64,
    pub v4: f64,
    pub v5: f64,
    /// Relative error ‖∇F₂ − V₂∇T₂‖ / ‖V₂∇T₂‖.
    pub err_f2: f64,
    pub err_f4: f64,
    pub err_f5: f64,
    pub passed: bool,
}

pub const GRADIENT_TOL: f64 = 1e-6;

fn fd_gradient(entries: &[f64], f: impl Fn(&[f64]) -> f64, h: f64) -> Vec<f64> {
    let mut x = entries.to_vec();
    (0..entries.len())
        .map(|k| {
            x[k] = entries[k] + h;
            let fp = f(&x);
            x[k] = entries[k] - h;
            let fm = f(&x);
            x[k] = entries[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

/// Checks ∇F₂ = V₂∇T₂ and ∇F₄ = V₄∇L₁₂₃, ∇F₅ = V₅∇L₁₂₃ by finite differences.
pub fn gradient_collinearity(r: &DistanceVector) -> Result<GradientCollinearityReport> {
    if r.n() != 5 {
        return Err(Error::Precondition(format!("five bodies required, got {}", r.n())));
    }
    let scale = r.max_entry();
    let tol = |deg| scaled_slack(MEMBERSHIP_TOL, scale, deg);
    let real = is_realizable(r);
    let (_, k2) = v2_k2(r);
    let (_, k4) = v4_k4(r);
    let (_, k5) = v5_k5(r);
    let checks = [
        (t2(r).abs() < tol(2), "T2 = 0"),
        (l_constraint(r, [1, 2, 3]).abs() < tol(1), "L123 = 0"),
        (real.realizable && real.g2, "r in G and G2"),
        (k2.abs() < tol(3) && k4.abs() < tol(3) && k5.abs() < tol(3), "K2 = K4 = K5 = 0"),
    ];
    if let Some((_, what)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(Error::Precondition(format!("r is not in H245: {what} fails")));
    }

    let e = r.entries();
    let h = 1e-6 * scale;
    let cm = |b: [usize; 4]| move |x: &[f64]| cayley_menger_with(x, &b).expect("four bodies");
    let g_f2 = fd_gradient(e, cm(F2_BODIES), h);
    let g_f4 = fd_gradient(e, cm(F4_BODIES), h);
    let g_f5 = fd_gradient(e, cm(F5_BODIES), h);
    let g_t2 = fd_gradient(e, t2, h);
    let g_l = fd_gradient(e, |x| l_constraint(x, [1, 2, 3]), h);

    let (v2, _) = v2_k2(r);
    let (v4, _) = v4_k4(r);
    let (v5, _) = v5_k5(r);
    let scaled = |v: f64, g: &[f64]| g.iter().map(|x| v * x).collect::<Vec<_>>();
    let err_f2 = rel_err(&g_f2, &scaled(v2, &g_t2));
    let err_f4 = rel_err(&g_f4, &scaled(v4, &g_l));
    let err_f5 = rel_err(&g_f5, &scaled(v5, &g_l));
    let passed = err_f2 < GRADIENT_TOL && err_f4 < GRADIENT_TOL && err_f5 < GRADIENT_TOL;
    Ok(GradientCollinearityReport { v2, v4, v5, err_f2, err_f4, err_f5, passed })
}

/// Constraint values and membership in M⁺₂₄₅, N₂₄₅, H₂₄₅ and T₂₄₅.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub t2: f64,
    pub l123: f64,
    pub inertia_defect: f64,
    pub f2: f64,
    pub f4: f64,
    pub f5: f64,
    pub k2: f64,
    pub k4: f64,
    pub k5: f64,
    /// Triangle inequalities and F(1,2,3,4,5) ≤ 0.
    pub in_g: bool,
    pub in_g2: bool,
    pub in_m_plus: bool,
    pub in_n: bool,
    pub in_h: bool,
    pub in_t: bool,
    /// Predicates that failed, in words.
    pub violated: Vec<String>,
    /// Which determinants decide realizability.
    pub note: String,
}

pub fn membership(r: &DistanceVector, m: &MassVector) -> Result<ConstraintReport> {
    if r.n() != 5 || m.n() != 5 {
        return Err(Error::InvalidInput("membership is defined for five bodies".into()));
    }
    let scale = r.max_entry();
    let tol = |deg| scaled_slack(MEMBERSHIP_TOL, scale, deg);
    let t2v = t2(r);
    let l = l_constraint(r, [1, 2, 3]);
    let i0 = m.inertia_target();
    let defect = inertia_raw(r, m) - i0;
    let (f2, f4, f5) = trapezoid_determinants(r);
    let (_, k2) = v2_k2(r);
    let (_, k4) = v4_k4(r);
    let (_, k5) = v5_k5(r);
    let real = is_realizable(r);

    let mut violated = real.violated.clone();
    let mut check = |ok: bool, what: String| {
        if !ok {
            violated.push(what);
        }
        ok
    };
    let i_ok = check(defect.abs() < MEMBERSHIP_TOL * i0, format!("I - I0 = {defect:e}"));
    let t_ok = check(t2v.abs() < tol(2), format!("T2 = {t2v:e}"));
    let l_ok = check(l.abs() < tol(1), format!("L123 = {l:e}"));
    let f_ok = [(f2, "F2"), (f4, "F4"), (f5, "F5")]
        .into_iter()
        .map(|(v, name)| check(v.abs() < tol(6), format!("{name} = {v:e}")))
        .filter(|ok| !ok)
        .count()
        == 0;

    let in_g = real.realizable;
    let in_g2 = real.g2;
    let in_m_plus = i_ok && t_ok && l_ok;
    let in_n = in_g && in_g2 && i_ok && f_ok;
    let in_h = in_g && in_g2 && t_ok && l_ok;
    let in_t = in_m_plus && in_n && in_h;
    Ok(ConstraintReport {
        t2: t2v,
        l123: l,
        inertia_defect: defect,
        f2,
        f4,
        f5,
        k2,
        k4,
        k5,
        in_g,
        in_g2,
        in_m_plus,
        in_n,
        in_h,
        in_t,
        violated,
        note: "realizable iff F2 = F4 = F5 = 0 on top of T2 = L123 = 0".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distgeo::{distances_from_positions, PlanarConfiguration};

    /// Isosceles trapezoid with bases on y = 0 and y = h, P₂ at parameter s on P₁P₃.
    fn trapezoid(a: f64, b: f64, c: f64, h: f64, s: f64) -> DistanceVector {
        let p1 = [-a, 0.0];
        let p3 = [a, 0.0];
        let p2 = [-a + s * 2.0 * a, 0.0];
        let x = PlanarConfiguration::new(vec![p1, p2, p3, [b + c, h], [-b + c, h]]).unwrap();
        distances_from_positions(&x).unwrap()
    }

    #[test]
    fn t2_vanishes_on_rectangle_and_trapezoids() {
        let (a, b) = (1.3f64, 0.7f64);
        let d = (a * a + b * b).sqrt();
        // r13 r14 r15 r34 r35 r45 over bodies 1,3,4,5 only; body 2 arbitrary.
        let r = DistanceVector::new(5, vec![1.0, a, d, b, 1.0, 1.0, 1.0, b, d, a]).unwrap();
        assert!(t2(&r).abs() < 1e-14);

        let r = trapezoid(1.0, 0.5, 0.0, 1.0, 0.5);
        assert!((r.r(1, 3) - 2.0).abs() < 1e-15 && (r.r(4, 5) - 1.0).abs() < 1e-15);
        assert!((r.r(1, 5) - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((r.r(1, 4) - 3.25f64.sqrt()).abs() < 1e-15);
        assert!(t2(&r).abs() < 1e-14);

        let r = trapezoid(1.0, 0.3, 0.25, 0.8, 0.37);
        assert!(t2(&r).abs() < 1e-14);
    }

    #[test]
    fn t2_nonzero_on_generic_quadrilateral() {
        let x = PlanarConfiguration::new(vec![[0.0, 0.0], [0.4, 0.1], [1.0, 0.0], [0.9, 0.8], [0.1, 0.6]]).unwrap();
        let r = distances_from_positions(&x).unwrap();
        assert!(t2(&r).abs() > 1e-3);
    }

    #[test]
    fn l_constraint_cases() {
        assert_eq!(l_constraint(&[1.0, 2.0, 1.0], [1, 2, 3]), 0.0);
        assert_eq!(l_constraint(&[1.0, 1.0, 1.0], [1, 2, 3]), 1.0);
    }

    #[test]
    fn heron_cases() {
        let (q, res) = heron_factorization(&[1.0, 1.0, 1.0]);
        assert!((q + 3.0).abs() < 1e-15 && res.abs() < 1e-14);
        let (_, res) = heron_factorization(&[1.0, 2.0, 1.0]);
        assert!(res.abs() < 1e-14);
    }

    #[test]
    fn factor_geometric_values() {
        let (a, b, c, h, s) = (1.1, 0.45, 0.2, 0.7, 0.3);
        let r = trapezoid(a, b, c, h, s);
        let (v2, k2) = v2_k2(&r);
        let (v4, k4) = v4_k4(&r);
        let (v5, k5) = v5_k5(&r);
        let (r13, r45) = (r.r(1, 3), r.r(4, 5));
        assert!((v2 - 8.0 * h * h * r13 * r45).abs() < 1e-12, "{v2}");
        let target = 16.0 * h * h * r.r(1, 2) * r13 * r.r(2, 3);
        assert!((v4 - target).abs() < 1e-12 && (v5 - target).abs() < 1e-12);
        assert!(k2.abs() < 1e-14 && k4.abs() < 1e-14 && k5.abs() < 1e-14);
    }

    #[test]
    fn gradient_collinearity_on_trapezoid() {
        let r = trapezoid(1.0, 0.4, 0.15, 0.9, 0.42);
        let rep = gradient_collinearity(&r).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.v4 - rep.v5).abs() < 1e-12 * rep.v4.abs());
    }

    #[test]
    fn gradient_collinearity_rejects_generic_points() {
        let r = DistanceVector::new(5, vec![1.0, 1.2, 1.1, 0.9, 0.8, 1.3, 1.0, 0.7, 1.05, 0.95]).unwrap();
        assert!(matches!(gradient_collinearity(&r), Err(Error::Precondition(_))));
    }

    #[test]
    fn membership_of_scaled_trapezoid() {
        let m = MassVector::new(vec![1.0, 0.7, 1.0, 2.0, 2.0]).unwrap();
        let r = trapezoid(1.0, 0.4, 0.0, 0.9, 0.5);
        let s = (m.inertia_target() / inertia_raw(&r, &m)).sqrt();
        let rep = membership(&r.scaled(s).unwrap(), &m).unwrap();
        assert!(rep.in_t && rep.in_m_plus && rep.in_n && rep.in_h, "{:?}", rep.violated);

        let rep = membership(&r.scaled(1.1 * s).unwrap(), &m).unwrap();
        assert!(!rep.in_m_plus && !rep.in_t && rep.in_h);

        let bad = DistanceVector::new(5, vec![10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let rep = membership(&bad, &m).unwrap();
        assert!(!rep.in_g && !rep.in_h && !rep.in_n && !rep.in_t);
    }
}
