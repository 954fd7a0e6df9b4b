use ccdist::collinear::{
    completed_square, gamma_form, gamma_matrix, gamma_recursion, psi_transform, residuals_collinear, Ordering,
};
use ccdist::constraints::{heron_factorization, l_constraint, membership, t2, v2_k2, v4_k4, v5_k5};
use ccdist::distgeo::{
    cayley_menger_with, cm_gradient_entry, distances_from_positions, is_realizable, pair_index, quadruple_areas,
    PairIndex,
};
use ccdist::energetics::{inertia, inertia_positions, potential};
use ccdist::numerics::symmetric_eigenvalues;
use ccdist::trapezoid5::{hessian_w245, spectrum_closed_form, w245};
use ccdist::{DistanceVector, MassVector, MultiplierSet, PlanarConfiguration};
use proptest::prelude::*;

fn points(n: usize) -> impl Strategy<Value = PlanarConfiguration> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n).prop_filter_map("separated points", |v| {
        let pts: Vec<[f64; 2]> = v.into_iter().map(|(x, y)| [x, y]).collect();
        let far =
            pts.iter().enumerate().all(|(a, p)| pts[a + 1..].iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.05));
        far.then(|| PlanarConfiguration::new(pts).unwrap())
    })
}

fn masses(n: usize) -> impl Strategy<Value = MassVector> {
    prop::collection::vec(0.1f64..10.0, n).prop_map(|v| MassVector::new(v).unwrap())
}

fn positive_r(n: usize) -> impl Strategy<Value = DistanceVector> {
    prop::collection::vec(0.1f64..10.0, n * (n - 1) / 2).prop_map(move |v| DistanceVector::new(n, v).unwrap())
}

fn rel(a: f64, b: f64, size: f64) -> f64 {
    (a - b).abs() / size.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pair_index_is_a_bijection(n in 2usize..30, seed in any::<u64>()) {
        let count = n * (n - 1) / 2;
        let k = (seed % count as u64) as usize;
        let p = PairIndex::from_linear(k, n).unwrap();
        prop_assert!(p.i < p.j && p.j <= n);
        prop_assert_eq!(pair_index(p.i, p.j, n).unwrap().linear, k);
    }

    #[test]
    fn distances_invariant_under_rigid_motion(x in points(5), ang in 0.0f64..6.3, tx in -3.0f64..3.0, ty in -3.0f64..3.0) {
        let (s, c) = ang.sin_cos();
        let moved = PlanarConfiguration::new(
            x.points().iter().map(|p| [c * p[0] - s * p[1] + tx, s * p[0] + c * p[1] + ty]).collect(),
        ).unwrap();
        let (a, b) = (distances_from_positions(&x).unwrap(), distances_from_positions(&moved).unwrap());
        for (u, v) in a.entries().iter().zip(b.entries()) {
            prop_assert!(rel(*u, *v, *u) < 1e-12);
        }
    }

    #[test]
    fn planar_distances_are_realizable(x in points(5)) {
        let r = distances_from_positions(&x).unwrap();
        let rep = is_realizable(&r);
        prop_assert!(rep.realizable && rep.embeddable, "{:?}", rep);
    }

    #[test]
    fn homogeneity(r in positive_r(5), m in masses(5), s in 0.1f64..10.0) {
        let rs = r.scaled(s).unwrap();
        let (u, us) = (potential(&r, &m).unwrap(), potential(&rs, &m).unwrap());
        let (i, is) = (inertia(&r, &m).unwrap(), inertia(&rs, &m).unwrap());
        prop_assert!(rel(us, u / s, u / s) < 1e-14);
        prop_assert!(rel(is, s * s * i, s * s * i) < 1e-14);
    }

    #[test]
    fn inertia_distance_and_position_forms_agree(x in points(6), m in masses(6)) {
        let a = inertia(&distances_from_positions(&x).unwrap(), &m).unwrap();
        let b = inertia_positions(&x, &m).unwrap();
        prop_assert!(rel(a, b, b) < 1e-12);
    }

    #[test]
    fn determinant_factorizations(r in positive_r(5)) {
        let cm = |b: &[usize]| cayley_menger_with(&r, b).unwrap();
        let (v2, k2) = v2_k2(&r);
        let f2 = cm(&[1, 3, 4, 5]);
        let t = t2(&r);
        prop_assert!(rel(f2, v2 * t - 2.0 * k2 * k2, f2.abs().max((v2 * t).abs()).max(2.0 * k2 * k2)) < 1e-10);
        let l = l_constraint(&r, [1, 2, 3]);
        for (f, (v, k)) in [(cm(&[1, 2, 3, 5]), v4_k4(&r)), (cm(&[1, 2, 3, 4]), v5_k5(&r))] {
            prop_assert!(rel(f, v * l - 2.0 * k * k, f.abs().max((v * l).abs()).max(2.0 * k * k)) < 1e-10);
        }
        let (q, res) = heron_factorization(&r);
        prop_assert!(res.abs() <= 1e-10 * cm(&[1, 2, 3]).abs().max((q * l).abs()));
    }

    #[test]
    fn cm_gradient_matches_finite_differences(x in points(4)) {
        let r = distances_from_positions(&x).unwrap();
        let areas = quadruple_areas(&x, [1, 2, 3, 4]).unwrap();
        let scale = r.max_entry().powi(5);
        for a in 0..4 {
            for b in a + 1..4 {
                let k = pair_index(a + 1, b + 1, 4).unwrap().linear;
                let h = 1e-6 * r.entries()[k];
                let (mut up, mut dn) = (r.entries().to_vec(), r.entries().to_vec());
                up[k] += h;
                dn[k] -= h;
                let fd = (cayley_menger_with(&up[..], &[1, 2, 3, 4]).unwrap()
                    - cayley_menger_with(&dn[..], &[1, 2, 3, 4]).unwrap()) / (2.0 * h);
                let an = cm_gradient_entry(r.entries()[k], &areas[a], &areas[b]);
                prop_assert!((fd - an).abs() < 1e-6 * scale.max(an.abs()), "{} vs {}", fd, an);
            }
        }
    }

    #[test]
    fn gamma_structure(m in prop::collection::vec(0.1f64..10.0, 3..9)) {
        let m = MassVector::new(m).unwrap();
        let g = gamma_matrix(&m).unwrap();
        prop_assert!(g.positive_definite && g.diagonally_dominant);
        for (k, d) in g.dominance_margins.iter().enumerate() {
            prop_assert!(rel(*d, m.m(1) * m.m(k + 2), m.m(1) * m.m(k + 2)) < 1e-12);
        }
        prop_assert!(gamma_recursion(&m).unwrap().iter().all(|v| *v > 0.0));
        prop_assert!(psi_transform(&m).unwrap().roundtrip_error < 1e-12);
    }

    #[test]
    fn completed_square_reproduces_form(m in prop::collection::vec(0.1f64..10.0, 3..9), seed in prop::collection::vec(0.0f64..3.0, 8)) {
        let m = MassVector::new(m).unwrap();
        let r1: Vec<f64> = seed[..m.n() - 1].to_vec();
        let (a, b) = (completed_square(&m, &r1).unwrap(), gamma_form(&m, &r1));
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
    }

    #[test]
    fn p_coordinates_preserve_the_form(m in prop::collection::vec(0.1f64..10.0, 3..7), seed in prop::collection::vec(0.1f64..3.0, 6)) {
        let m = MassVector::new(m).unwrap();
        let r1: Vec<f64> = seed[..m.n() - 1].to_vec();
        let psi = psi_transform(&m).unwrap();
        let p = psi.p_coordinates(&r1);
        let norm2: f64 = p.iter().map(|v| v * v).sum();
        prop_assert!(rel(norm2, gamma_form(&m, &r1), norm2) < 1e-12);
        let back = psi.r_from_p(&p);
        for (a, b) in back.iter().zip(&r1) {
            prop_assert!(rel(*a, *b, *b) < 1e-12);
        }
    }

    #[test]
    fn collinear_residuals_reverse_antisymmetrically(m in masses(5), gaps in prop::collection::vec(0.1f64..2.0, 4), delta in 0.1f64..10.0) {
        let o = Ordering::identity(5);
        let a = residuals_collinear(&gaps, delta, &m, &o).unwrap();
        let rev_gaps: Vec<f64> = gaps.iter().rev().copied().collect();
        let rev = residuals_collinear(&rev_gaps, delta, &m, &o.reversed()).unwrap();
        let size = a.body.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        prop_assert!(a.body.iter().sum::<f64>().abs() < 1e-12 * size.max(1.0));
        for k in 0..5 {
            prop_assert!((a.body[k] + rev.body[4 - k]).abs() < 1e-12 * size.max(1.0));
        }
    }

    #[test]
    fn trapezoid_spectrum_matches_eigenvalues(r in positive_r(5), m in masses(5), delta in 0.1f64..50.0, omega in -20.0f64..20.0) {
        let closed = {
            let mut z = spectrum_closed_form(&r, delta, omega, &m).to_vec();
            z.sort_by(f64::total_cmp);
            z
        };
        let numeric = symmetric_eigenvalues(&hessian_w245(&r, delta, omega, &m));
        let size = numeric.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (a, b) in closed.iter().zip(&numeric) {
            prop_assert!((a - b).abs() < 1e-9 * size);
        }
    }

    #[test]
    fn w245_is_invariant_under_mirror_relabeling(r in positive_r(5), m in masses(5), delta in 0.1f64..5.0, omega in -2.0f64..2.0, theta in -2.0f64..2.0) {
        // Mirror 1↔3, 4↔5 maps T₂ to itself and L₁₂₃ to itself.
        let map = [0usize, 3, 2, 1, 5, 4];
        let mirrored: Vec<f64> = ccdist::distgeo::pairs(5)
            .map(|(i, j)| r.r(map[i].min(map[j]), map[i].max(map[j])))
            .collect();
        let rm = DistanceVector::new(5, mirrored).unwrap();
        let mm = m.permuted(&[3, 2, 1, 5, 4]).unwrap();
        let mult = MultiplierSet { delta, omega, theta };
        let (a, b) = (w245(&r, &mult, &m), w245(&rm, &mult, &mm));
        prop_assert!(rel(a, b, a.abs().max(1.0)) < 1e-12);
    }

    #[test]
    fn membership_sets_are_nested(r in positive_r(5), m in masses(5)) {
        let rep = membership(&r, &m).unwrap();
        prop_assert_eq!(rep.in_t, rep.in_m_plus && rep.in_n && rep.in_h);
        if rep.in_t {
            prop_assert!(rep.in_g && rep.in_g2);
        }
    }
}
