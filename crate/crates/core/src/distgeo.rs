//! Pair indexing, Cayley–Menger determinants, oriented areas and
//! realizability predicates for mutual-distance vectors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::determinant;

/// Number of unordered pairs among `n` bodies.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Body count whose pair count is `len`, if any.
pub fn bodies_for_pairs(len: usize) -> Option<usize> {
    let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
    (pair_count(n) == len).then_some(n)
}

#[inline]
fn packed_offset(i: usize, j: usize, n: usize) -> usize {
    (i - 1) * (2 * n - i) / 2 + (j - i - 1)
}

/// A pair `(i, j)` of 1-based body indices with `i < j`, together with its
/// offset in the lexicographic packing `(1,2), (1,3), ..., (n-1,n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub linear: usize,
}

impl PairIndex {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= j || j > n {
            return Err(Error::Index { i, j, n });
        }
        Ok(Self { i, j, linear: packed_offset(i, j, n) })
    }

    /// Inverse of the packing.
    pub fn from_linear(linear: usize, n: usize) -> Result<Self> {
        if linear >= pair_count(n) {
            return Err(Error::Index { i: linear, j: linear, n });
        }
        let mut rest = linear;
        for i in 1..n {
            let row = n - i;
            if rest < row {
                return Ok(Self { i, j: i + 1 + rest, linear });
            }
            rest -= row;
        }
        unreachable!("offset bounded by pair_count")
    }
}

pub fn pair_index(i: usize, j: usize, n: usize) -> Result<PairIndex> {
    PairIndex::new(i, j, n)
}

/// All pairs of `n` bodies in packed order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
}

/// Anything that can answer "what is r_ij" for 1-based bodies, in either order.
pub trait PairDistances {
    fn body_count(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;
}

impl PairDistances for [f64] {
    fn body_count(&self) -> usize {
        bodies_for_pairs(self.len()).expect("slice length is not a pair count")
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self[packed_offset(a, b, self.body_count())]
    }
}

impl<const N: usize> PairDistances for [f64; N] {
    fn body_count(&self) -> usize {
        self.as_slice().body_count()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.as_slice().dist(i, j)
    }
}

impl PairDistances for Vec<f64> {
    fn body_count(&self) -> usize {
        self.as_slice().body_count()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.as_slice().dist(i, j)
    }
}

/// Packed, strictly positive mutual distances of `n` bodies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistances", into = "RawDistances")]
pub struct DistanceVector {
    n: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistances {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawDistances> for DistanceVector {
    type Error = Error;
    fn try_from(raw: RawDistances) -> Result<Self> {
        DistanceVector::new(raw.n, raw.entries)
    }
}

impl From<DistanceVector> for RawDistances {
    fn from(d: DistanceVector) -> Self {
        RawDistances { n: d.n, entries: d.entries }
    }
}

impl DistanceVector {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != pair_count(n) {
            return Err(Error::InvalidInput(format!(
                "{} distances given, {} bodies need {}",
                entries.len(),
                n,
                pair_count(n)
            )));
        }
        for (k, &v) in entries.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                let p = PairIndex::from_linear(k, n)?;
                return Err(Error::Singularity { i: p.i, j: p.j, value: v });
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds from a packed slice, inferring `n` from its length.
    pub fn from_packed(entries: &[f64]) -> Result<Self> {
        let n = bodies_for_pairs(entries.len())
            .ok_or_else(|| Error::InvalidInput(format!("{} is not a pair count", entries.len())))?;
        Self::new(n, entries.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// r_ij for 1-based bodies in either order. Panics on an invalid pair.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        assert!(a >= 1 && a < b && b <= self.n, "invalid pair ({i},{j}) for n = {}", self.n);
        self.entries[packed_offset(a, b, self.n)]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().cloned().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|r| r * s).collect())
    }

    /// Restriction to the listed bodies, renumbered 1..k in the given order.
    pub fn restrict(&self, bodies: &[usize]) -> Result<Self> {
        for &b in bodies {
            if b == 0 || b > self.n {
                return Err(Error::Index { i: b, j: b, n: self.n });
            }
        }
        let k = bodies.len();
        let mut out = Vec::with_capacity(pair_count(k));
        for (a, b) in pairs(k) {
            let (bi, bj) = (bodies[a - 1], bodies[b - 1]);
            if bi == bj {
                return Err(Error::InvalidInput(format!("body {bi} listed twice")));
            }
            out.push(self.r(bi, bj));
        }
        Self::new(k, out)
    }
}

impl PairDistances for DistanceVector {
    fn body_count(&self) -> usize {
        self.n
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.r(i, j)
    }
}

/// Planar point set with pairwise distinct points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarConfiguration {
    points: Vec<[f64; 2]>,
}

impl PlanarConfiguration {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if points[a] == points[b] {
                    return Err(Error::DegenerateConfiguration(a + 1, b + 1));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point of 1-based body `i`.
    pub fn point(&self, i: usize) -> [f64; 2] {
        self.points[i - 1]
    }

    /// Flattened coordinates `x1, y1, x2, y2, ...`.
    pub fn flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("odd number of planar coordinates".into()));
        }
        Self::new(coords.chunks(2).map(|c| [c[0], c[1]]).collect())
    }
}

/// Pairwise distances of a planar point set in packed order.
pub fn distances_from_positions(x: &PlanarConfiguration) -> Result<DistanceVector> {
    let n = x.len();
    let entries = pairs(n)
        .map(|(i, j)| {
            let (p, q) = (x.point(i), x.point(j));
            (q[0] - p[0]).hypot(q[1] - p[1])
        })
        .collect();
    DistanceVector::new(n, entries)
}

/// Cayley–Menger determinant from a pairwise-distance lookup over `bodies`.
pub fn cayley_menger_with<D: PairDistances + ?Sized>(r: &D, bodies: &[usize]) -> Result<f64> {
    let k = bodies.len();
    if k < 3 {
        return Err(Error::Arity(k));
    }
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for a in 1..=k {
        m[(0, a)] = 1.0;
        m[(a, 0)] = 1.0;
        for b in a + 1..=k {
            let d = r.dist(bodies[a - 1], bodies[b - 1]);
            m[(a, b)] = d * d;
            m[(b, a)] = d * d;
        }
    }
    Ok(determinant(m))
}

/// Cayley–Menger determinant of all bodies of `sub`.
pub fn cayley_menger(sub: &DistanceVector) -> Result<f64> {
    let bodies: Vec<usize> = (1..=sub.n()).collect();
    cayley_menger_with(sub, &bodies)
}

/// Cayley–Menger determinant of the listed bodies of `r`.
pub fn cayley_menger_of(r: &DistanceVector, bodies: &[usize]) -> Result<f64> {
    for &b in bodies {
        if b == 0 || b > r.n() {
            return Err(Error::Index { i: b, j: b, n: r.n() });
        }
    }
    cayley_menger_with(r, bodies)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Volume of the `k`-point simplex with Cayley–Menger value `f`.
pub fn volume_from_cm(f: f64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Arity(k));
    }
    let signed = if k.is_multiple_of(2) { f } else { -f };
    if signed < 0.0 {
        return Err(Error::NonRealizable { value: f, k });
    }
    let c = 2f64.powi(k as i32 - 1) * factorial(k - 1).powi(2);
    Ok((signed / c).sqrt())
}

/// Signed triangle area as a minor of a quadruple.
///
/// `triple` is stored ascending; `slot` is the 1-based position of the
/// deleted body in the sorted quadruple, giving the sign `(-1)^(slot+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedArea {
    pub value: f64,
    pub triple: [usize; 3],
    pub slot: usize,
}

fn wedge(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Oriented area of `triple` carrying the minor sign for deletion slot `slot`.
///
/// An unsorted triple is sorted first and the permutation parity is applied,
/// so swapping two indices flips the sign.
pub fn oriented_area(x: &PlanarConfiguration, triple: [usize; 3], slot: usize) -> Result<OrientedArea> {
    let n = x.len();
    for &b in &triple {
        if b == 0 || b > n {
            return Err(Error::Index { i: b, j: b, n });
        }
    }
    if !(1..=4).contains(&slot) {
        return Err(Error::InvalidInput(format!("deletion slot {slot} outside 1..=4")));
    }
    let mut sorted = triple;
    let mut parity = 1.0;
    for a in 0..3 {
        for b in 0..2 - a {
            if sorted[b] > sorted[b + 1] {
                sorted.swap(b, b + 1);
                parity = -parity;
            }
        }
    }
    if sorted[0] == sorted[1] || sorted[1] == sorted[2] {
        return Err(Error::InvalidInput(format!("repeated body in triple {triple:?}")));
    }
    let sign = if slot % 2 == 1 { 1.0 } else { -1.0 };
    let w = wedge(x.point(sorted[0]), x.point(sorted[1]), x.point(sorted[2]));
    Ok(OrientedArea { value: parity * sign * 0.5 * w, triple: sorted, slot })
}

/// The four minors Δ_i of a quadruple, indexed like `quad`.
pub fn quadruple_areas(x: &PlanarConfiguration, quad: [usize; 4]) -> Result<[OrientedArea; 4]> {
    let mut sorted = quad;
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("repeated body in quadruple {quad:?}")));
    }
    let area_for = |body: usize| -> Result<OrientedArea> {
        let t = sorted.iter().position(|&b| b == body).unwrap() + 1;
        let rest: Vec<usize> = sorted.iter().copied().filter(|&b| b != body).collect();
        oriented_area(x, [rest[0], rest[1], rest[2]], t)
    };
    Ok([area_for(quad[0])?, area_for(quad[1])?, area_for(quad[2])?, area_for(quad[3])?])
}

/// ∂F/∂r_ij = −64 r_ij Δ_i Δ_j for a planar quadruple.
pub fn cm_gradient_entry(r_ij: f64, area_i: &OrientedArea, area_j: &OrientedArea) -> f64 {
    -64.0 * r_ij * area_i.value * area_j.value
}

/// Outcome of the realizability predicates on a distance vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityReport {
    /// Triangle inequalities and the sign of the full determinant.
    pub realizable: bool,
    /// Strict triangle inequalities over {1,3,4,5} plus F(1,3,4,5) ≥ 0.
    pub g2: bool,
    /// Triples (i,j,k) with r_ij + r_jk < r_ik beyond slack.
    pub triangle_violations: Vec<[usize; 3]>,
    /// Cayley–Menger value of all five bodies.
    pub f5_full: Option<f64>,
    pub f4_1345: Option<f64>,
    /// Every 4-point determinant is non-negative. Not part of the set G;
    /// triangle inequalities plus the full-determinant sign do not imply it.
    pub embeddable: bool,
    pub violated: Vec<String>,
}

/// Slack for an equality or sign test on a polynomial of the given degree.
pub fn scaled_slack(base: f64, scale: f64, degree: i32) -> f64 {
    base * scale.powi(degree)
}

/// Geometric realizability of a distance vector.
///
/// Triangle inequalities are checked over every triple; for five bodies the
/// full determinant must be non-positive and the strict set over {1,3,4,5}
/// is evaluated as well.
pub fn is_realizable(r: &DistanceVector) -> RealizabilityReport {
    let n = r.n();
    let scale = r.max_entry();
    let tri_slack = scaled_slack(1e-10, scale, 2);
    let mut violations = Vec::new();
    let mut violated = Vec::new();
    for (i, j, k) in triples(n) {
        // Each of the three sides must not exceed the sum of the other two.
        for (a, b, c) in [(i, j, k), (j, i, k), (i, k, j)] {
            if r.r(a, b) + r.r(b, c) < r.r(a, c) - tri_slack {
                violations.push([a, b, c]);
                violated.push(format!("r_{a}{b} + r_{b}{c} < r_{a}{c}"));
            }
        }
    }
    let mut realizable = violations.is_empty();
    let mut f5_full = None;
    let mut f4_1345 = None;
    let mut g2 = false;
    if n == 5 {
        let f = cayley_menger(r).expect("five bodies");
        f5_full = Some(f);
        if f > scaled_slack(1e-10, scale, 8) {
            realizable = false;
            violated.push(format!("F(1,2,3,4,5) = {f:e} > 0"));
        }
        let quad = [1, 3, 4, 5];
        let mut strict = true;
        for (x, y, z) in [(1, 3, 4), (1, 3, 5), (1, 4, 5), (3, 4, 5)] {
            for (a, b, c) in [(x, y, z), (y, x, z), (x, z, y)] {
                if r.r(a, b) + r.r(b, c) <= r.r(a, c) + tri_slack {
                    strict = false;
                    violated.push(format!("G2: r_{a}{b} + r_{b}{c} <= r_{a}{c}"));
                }
            }
        }
        let f4 = cayley_menger_of(r, &quad).expect("valid bodies");
        f4_1345 = Some(f4);
        if f4 < -scaled_slack(1e-10, scale, 6) {
            strict = false;
            violated.push(format!("G2: F(1,3,4,5) = {f4:e} < 0"));
        }
        g2 = strict;
    }
    let quad_slack = scaled_slack(1e-10, scale, 6);
    let embeddable =
        realizable && quadruples(n).all(|q| cayley_menger_with(r, &q).map(|f| f >= -quad_slack).unwrap_or(false));
    RealizabilityReport { realizable, g2, triangle_violations: violations, f5_full, f4_1345, embeddable, violated }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (1..=n).flat_map(move |i| (i + 1..=n).flat_map(move |j| (j + 1..=n).map(move |k| (i, j, k))))
}

fn quadruples(n: usize) -> impl Iterator<Item = [usize; 4]> {
    triples(n).flat_map(move |(i, j, k)| (k + 1..=n).map(move |l| [i, j, k, l]))
}
