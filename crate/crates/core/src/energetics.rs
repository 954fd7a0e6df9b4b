//! Newtonian potential, moment of inertia and the S/R kernels (G = 1).

use serde::{Deserialize, Serialize};

use crate::distgeo::{pairs, DistanceVector, PairDistances, PlanarConfiguration};
use crate::error::{Error, Result};

/// Positive masses with cached total `m` and normalization `I₀ = 1/(2m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassVector {
    masses: Vec<f64>,
    total: f64,
    inertia_target: f64,
}

impl TryFrom<Vec<f64>> for MassVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MassVector::new(v)
    }
}

impl From<MassVector> for Vec<f64> {
    fn from(m: MassVector) -> Self {
        m.masses
    }
}

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidInput("mass list is empty".into()));
        }
        if let Some((k, v)) = masses.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("mass must be positive (m_{} = {v})", k + 1)));
        }
        let total: f64 = masses.iter().sum();
        Ok(Self { masses, total, inertia_target: 1.0 / (2.0 * total) })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    /// Mass of 1-based body `i`.
    pub fn m(&self, i: usize) -> f64 {
        self.masses[i - 1]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn inertia_target(&self) -> f64 {
        self.inertia_target
    }

    /// Masses relabeled so body `k` of the result is body `perm[k-1]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&p| self.m(p)).collect())
    }
}

/// Lagrange multipliers: δ = λ/m for the inertia constraint, ω for the
/// trapezoid constraint and θ for the collinearity constraint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSet {
    pub delta: f64,
    pub omega: f64,
    pub theta: f64,
}

fn check_n(r: &DistanceVector, m: &MassVector) -> Result<()> {
    if r.n() != m.n() {
        return Err(Error::InvalidInput(format!("{} distances-bodies vs {} masses", r.n(), m.n())));
    }
    Ok(())
}

pub(crate) fn potential_raw<D: PairDistances + ?Sized>(r: &D, m: &MassVector) -> f64 {
    pairs(m.n()).map(|(i, j)| m.m(i) * m.m(j) / r.dist(i, j)).sum()
}

pub(crate) fn inertia_raw<D: PairDistances + ?Sized>(r: &D, m: &MassVector) -> f64 {
    pairs(m.n()).map(|(i, j)| m.m(i) * m.m(j) * r.dist(i, j).powi(2)).sum::<f64>() / (2.0 * m.total())
}

/// U = Σ m_i m_j / r_ij.
pub fn potential(r: &DistanceVector, m: &MassVector) -> Result<f64> {
    check_n(r, m)?;
    Ok(potential_raw(r, m))
}

/// U evaluated on raw packed entries; zero or negative distances are reported.
pub fn potential_checked(entries: &[f64], m: &MassVector) -> Result<f64> {
    let r = DistanceVector::new(m.n(), entries.to_vec())?;
    potential(&r, m)
}

/// I = (1/2m) Σ m_i m_j r_ij².
pub fn inertia(r: &DistanceVector, m: &MassVector) -> Result<f64> {
    check_n(r, m)?;
    Ok(inertia_raw(r, m))
}

/// Position form ½ Σ m_i |x_i − c|² about the center of mass.
pub fn inertia_positions(x: &PlanarConfiguration, m: &MassVector) -> Result<f64> {
    if x.len() != m.n() {
        return Err(Error::InvalidInput("position and mass counts differ".into()));
    }
    let c = center_of_mass(x, m);
    Ok(0.5
        * x.points()
            .iter()
            .zip(m.masses())
            .map(|(p, mi)| mi * ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)))
            .sum::<f64>())
}

pub fn center_of_mass(x: &PlanarConfiguration, m: &MassVector) -> [f64; 2] {
    let mut c = [0.0; 2];
    for (p, mi) in x.points().iter().zip(m.masses()) {
        c[0] += mi * p[0];
        c[1] += mi * p[1];
    }
    [c[0] / m.total(), c[1] / m.total()]
}

/// S_ij = m_i m_j r_ij (δ − r_ij⁻³), the r_ij-derivative of U + mδ·I.
#[inline]
pub fn s_entry(r_ij: f64, m_i: f64, m_j: f64, delta: f64) -> f64 {
    m_i * m_j * r_ij * (delta - r_ij.powi(-3))
}

/// R_ij = m_i m_j (δ + 2/r_ij³), the second r_ij-derivative of U + mδ·I.
#[inline]
pub fn r_entry(r_ij: f64, m_i: f64, m_j: f64, delta: f64) -> f64 {
    m_i * m_j * (delta + 2.0 / r_ij.powi(3))
}

/// Largest pairwise force magnitude m_i m_j / r_ij², the natural residual scale.
pub fn force_scale<D: PairDistances + ?Sized>(r: &D, m: &MassVector) -> f64 {
    pairs(m.n()).map(|(i, j)| m.m(i) * m.m(j) / r.dist(i, j).powi(2)).fold(0.0, f64::max)
}

/// Packed vector of all S_ij.
pub fn s_vector<D: PairDistances + ?Sized>(r: &D, m: &MassVector, delta: f64) -> Vec<f64> {
    pairs(m.n()).map(|(i, j)| s_entry(r.dist(i, j), m.m(i), m.m(j), delta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_and_inertia_small_cases() {
        let two = MassVector::new(vec![1.0, 1.0]).unwrap();
        let r = DistanceVector::new(2, vec![1.0]).unwrap();
        assert_eq!(potential(&r, &two).unwrap(), 1.0);
        assert_eq!(inertia(&r, &two).unwrap(), 0.25);

        let three = MassVector::new(vec![1.0; 3]).unwrap();
        let eq = DistanceVector::new(3, vec![1.0; 3]).unwrap();
        assert!((potential(&eq, &three).unwrap() - 3.0).abs() < 1e-15);
        assert!((inertia(&eq, &three).unwrap() - 0.5).abs() < 1e-15);
        let doubled = eq.scaled(2.0).unwrap();
        assert!((potential(&doubled, &three).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_distance_is_a_singularity() {
        let m = MassVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(potential_checked(&[1.0, 0.0, 1.0], &m), Err(Error::Singularity { i: 1, j: 3, .. })));
    }

    #[test]
    fn nonpositive_mass_rejected() {
        let err = MassVector::new(vec![1.0, 0.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("mass must be positive"));
        assert!(MassVector::new(vec![1.0, -2.0]).is_err());
        assert!(MassVector::new(vec![]).is_err());
    }

    #[test]
    fn kernels() {
        assert_eq!(s_entry(1.0, 1.0, 1.0, 1.0), 0.0);
        assert_eq!(s_entry(2.0, 1.0, 1.0, 1.0), 1.75);
        assert_eq!(r_entry(1.0, 1.0, 1.0, 1.0), 3.0);
    }

    #[test]
    fn mass_vector_serde_roundtrip() {
        let m = MassVector::new(vec![1.0, 2.5, 3.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[1.0,2.5,3.0]");
        let back: MassVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MassVector>("[1.0,0.0]").is_err());
    }
}
