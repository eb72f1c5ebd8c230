mod common;

use aek_core::evolute::{
    direction_sextic, discriminant_d, evolute_directions, solve_evolute_point, RootOptions,
};
use aek_core::frames::{Patch, Point3};
use aek_core::invariants::{
    angle_gap, center_of_affine_curvature, cubic_form, moutard_center, moutard_quadric, section_projection,
    su_cone_direction, transon_covector, transon_gradients, Center, TangentDirection,
};
use aek_core::jets::{monomials, Jet};
use aek_core::linalg;
use aek_core::midplanes::{
    envelope_limit_probe, mid_plane, verify_lemma_main3, verify_lemma_main4, PointPair,
};
use aek_core::{normalize_at, rotate_frame, AffineMap3, BlaschkeFrame, Jet2, Mode, Rotation, Scalar, SurfaceModel};
use common::*;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| r(n, d))
}

fn frame() -> impl Strategy<Value = BlaschkeFrame> {
    (
        rat(),
        rat(),
        proptest::array::uniform5(rat()),
        proptest::array::uniform6(rat()),
    )
        .prop_map(|(a, b, f4, f5)| BlaschkeFrame::from_coefficients(a, b, f4, f5).unwrap())
}

fn unit() -> impl Strategy<Value = [Scalar; 2]> {
    (-20i64..=20, 1i64..=9).prop_map(rational_unit)
}

fn jet(order: usize) -> impl Strategy<Value = Jet2> {
    let n = monomials::<2>(order).len();
    proptest::collection::vec(rat(), n).prop_map(move |cs| {
        Jet2::from_terms(order, Mode::Rational, monomials::<2>(order).into_iter().zip(cs)).unwrap()
    })
}

fn linear_sub() -> impl Strategy<Value = [Jet2; 2]> {
    proptest::array::uniform4(rat()).prop_map(|m| {
        let row = |p: &Scalar, q: &Scalar| {
            Jet2::from_terms(3, Mode::Rational, [([1, 0], p.clone()), ([0, 1], q.clone())]).unwrap()
        };
        [row(&m[0], &m[1]), row(&m[2], &m[3])]
    })
}

fn float_surface() -> impl Strategy<Value = SurfaceModel> {
    proptest::array::uniform7(-0.5f64..0.5).prop_map(|c| {
        let terms = [
            ([2, 0], 0.5 + 0.2 * c[0]),
            ([0, 2], 0.5),
            ([1, 1], 0.1 * c[1]),
            ([3, 0], 0.3 * c[2]),
            ([1, 2], 0.3 * c[3]),
            ([2, 1], 0.3 * c[4]),
            ([4, 0], c[5]),
            ([2, 2], c[6]),
        ];
        let j = Jet2::from_terms(4, Mode::Float, terms.map(|(e, v)| (e, Scalar::Float(v)))).unwrap();
        SurfaceModel::polynomial(j, Patch::new((-0.2, 0.2), (-0.2, 0.2))).unwrap()
    })
}

fn unimodular() -> impl Strategy<Value = AffineMap3> {
    (proptest::array::uniform9(-0.4f64..0.4), proptest::array::uniform3(-1.0f64..1.0)).prop_map(|(m, t)| {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = m[3 * i + j] + if i == j { 1.0 } else { 0.0 };
            }
        }
        let lin = a.map(|row| row.map(Scalar::Float));
        let det = linalg::det3(&lin).to_f64();
        let k = det.abs().powf(-1.0 / 3.0) * det.signum();
        let lin = a.map(|row| row.map(|c| Scalar::Float(c * k)));
        AffineMap3::new(lin, t.map(Scalar::Float)).unwrap()
    })
}

fn frame_point(f: &BlaschkeFrame, p: [f64; 2]) -> [f64; 3] {
    let at = [Scalar::Float(p[0]), Scalar::Float(p[1])];
    [p[0], p[1], f.normalized().eval(&at).unwrap().to_f64()]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(p in jet(3), q in jet(3), s in jet(3)) {
        prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
        prop_assert_eq!(p.mul(&q).unwrap().mul(&s).unwrap(), p.mul(&q.mul(&s).unwrap()).unwrap());
        prop_assert_eq!(
            p.mul(&q.add(&s).unwrap()).unwrap(),
            p.mul(&q).unwrap().add(&p.mul(&s).unwrap()).unwrap()
        );
        prop_assert_eq!(p.add(&q).unwrap(), q.add(&p).unwrap());
    }

    #[test]
    fn linear_composition_associates(p in jet(3), a in linear_sub(), b in linear_sub()) {
        let ab = [a[0].compose(&b).unwrap(), a[1].compose(&b).unwrap()];
        prop_assert_eq!(p.compose(&a).unwrap().compose(&b).unwrap(), p.compose(&ab).unwrap());
    }

    #[test]
    fn partials_commute(p in jet(4)) {
        prop_assert_eq!(
            p.partial(0).unwrap().partial(1).unwrap(),
            p.partial(1).unwrap().partial(0).unwrap()
        );
    }

    #[test]
    fn float_mode_tracks_rational(
        a in proptest::collection::vec(-1000i64..=1000, 21),
        b in proptest::collection::vec(-1000i64..=1000, 21),
    ) {
        let mk = |v: &[i64], mode| {
            Jet2::from_terms(5, mode, monomials::<2>(5).into_iter().zip(v.iter().map(|&n| Scalar::ratio(mode, n, 1000)))).unwrap()
        };
        let exact = mk(&a, Mode::Rational).mul(&mk(&b, Mode::Rational)).unwrap();
        let float = mk(&a, Mode::Float).mul(&mk(&b, Mode::Float)).unwrap();
        for (x, y) in exact.coeffs().iter().zip(float.coeffs()) {
            let (x, y) = (x.to_f64(), y.to_f64());
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn pick_invariant_under_rotation(f in frame(), d in unit()) {
        let rot = Rotation::from_unit(d[0].clone(), d[1].clone()).unwrap();
        let g = rotate_frame(&f, &rot).unwrap();
        let pick = |f: &BlaschkeFrame| &(&f.a() * &f.a()) + &(&f.b() * &f.b());
        prop_assert_eq!(pick(&f), pick(&g));
        prop_assert!(g.satisfies_normal_form());
    }

    #[test]
    fn cubic_rotates_with_three_theta(f in frame(), theta in 0.0f64..6.3) {
        let ff = f.to_mode(Mode::Float).unwrap();
        let g = rotate_frame(&ff, &Rotation::from_angle(theta)).unwrap();
        let phi = ff.a().to_f64().atan2(ff.b().to_f64());
        let psi = g.a().to_f64().atan2(g.b().to_f64());
        let diff = (phi - 3.0 * theta - psi).rem_euclid(std::f64::consts::TAU);
        if ff.a().to_f64().hypot(ff.b().to_f64()) > 1e-9 {
            prop_assert!(diff.min(std::f64::consts::TAU - diff) < 1e-9);
        }
    }

    #[test]
    fn euler_relation(f in frame(), d in unit()) {
        let g = transon_covector(&f, &d).unwrap();
        let [gx, gy] = transon_gradients(&f, &d).unwrap();
        let lhs = linalg::scale3(&g, &r(3, 1));
        let rhs = linalg::add3(&linalg::scale3(&gx, &d[0]), &linalg::scale3(&gy, &d[1]));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cone_line_lies_in_transon_plane(f in frame(), d in unit()) {
        let t = TangentDirection::new(d[0].clone(), d[1].clone()).unwrap();
        if let Ok(s) = su_cone_direction(&f, &t) {
            prop_assert!(linalg::dot3(&transon_covector(&f, &d).unwrap(), &s).is_zero());
        }
    }

    #[test]
    fn moutard_center_on_cone_line(f in frame(), d in unit()) {
        let t = TangentDirection::new(d[0].clone(), d[1].clone()).unwrap();
        let s = su_cone_direction(&f, &t).unwrap();
        let c = match moutard_center(&f, &t).unwrap() {
            Center::Finite(x) | Center::AtInfinity(x) => x,
        };
        prop_assert!(linalg::cross3(&s, &c).iter().all(Scalar::is_zero));
    }

    #[test]
    fn moutard_quadric_contains_osculating_conics(f in frame(), d in unit()) {
        let t = TangentDirection::new(d[0].clone(), d[1].clone()).unwrap();
        let rotated = rotate_frame(&f, &t.rotation()).unwrap().to_mode(Mode::Float).unwrap();
        let q = moutard_quadric(&rotated, &TangentDirection::e1(Mode::Float)).unwrap();
        for lambda in [-1.0, 0.0, 1.0] {
            let sec = section_projection(&rotated, &Scalar::Float(lambda)).unwrap();
            // conic 2z = x² + 2p xz + q z² with the section's 4-jet
            let c3 = sec.a3.to_f64() / 6.0;
            let c4 = sec.a4.to_f64() / 24.0;
            let p = 2.0 * c3;
            let qq = 8.0 * (c4 - p * p / 2.0);
            let mut checked = 0;
            for k in 0..10 {
                let z = 0.2 * 0.5f64.powi(k);
                let disc = (p * p - qq) * z * z + 2.0 * z;
                if disc < 0.0 {
                    continue;
                }
                for sign in [-1.0, 1.0] {
                    let x = -p * z + sign * disc.sqrt();
                    let pt = [x, lambda * z, z].map(Scalar::Float);
                    prop_assert!(q.eval(&pt).to_f64().abs() < 1e-10);
                    checked += 1;
                }
            }
            prop_assert!(checked > 0);
        }
    }

    #[test]
    fn center_of_affine_curvature_is_moutard_center(f in frame(), theta in 0.0f64..std::f64::consts::PI) {
        let f = f.to_mode(Mode::Float).unwrap();
        let t = TangentDirection::from_angle(theta);
        if let (Ok(Center::Finite(x)), Ok(Center::Finite(y))) = (center_of_affine_curvature(&f, &t), moutard_center(&f, &t)) {
            prop_assert!(rel_gap(&linalg::to_f64_3(&x), &linalg::to_f64_3(&y)) < 1e-10);
        }
    }

    #[test]
    fn moutard_center_rotates_with_frame(f in frame(), d in unit(), e in unit()) {
        let rot = Rotation::from_unit(d[0].clone(), d[1].clone()).unwrap();
        let t = TangentDirection::new(e[0].clone(), e[1].clone()).unwrap();
        let tl = rot.apply_inverse(&[e[0].clone(), e[1].clone(), r(0, 1)]);
        let t_new = TangentDirection::new(tl[0].clone(), tl[1].clone()).unwrap();
        let g = rotate_frame(&f, &rot).unwrap();
        let back = match moutard_center(&g, &t_new).unwrap() {
            Center::Finite(x) => Center::Finite(rot.apply(&x)),
            Center::AtInfinity(x) => Center::AtInfinity(rot.apply(&x)),
        };
        prop_assert_eq!(back, moutard_center(&f, &t).unwrap());
    }

    #[test]
    fn d_identity(f in frame(), d in unit()) {
        let want = &r(-3, 32) * &direction_sextic(&f).eval(&d);
        prop_assert_eq!(discriminant_d(&f, &d).unwrap(), want);
    }

    #[test]
    fn directions_are_antipodally_symmetric(f in frame()) {
        let f = f.to_mode(Mode::Float).unwrap();
        let flipped = rotate_frame(&f, &Rotation::from_angle(std::f64::consts::PI)).unwrap();
        let a = evolute_directions(&f, &RootOptions::default());
        let b = evolute_directions(&flipped, &RootOptions::default());
        prop_assert_eq!(a.roots().len(), b.roots().len());
        for (x, y) in a.roots().iter().zip(b.roots()) {
            prop_assert!(angle_gap(x.theta, y.theta) < 1e-9);
        }
        prop_assert!(a.roots().len() <= 6);
    }

    #[test]
    fn solutions_are_moutard_centers(f in frame()) {
        let f = f.to_mode(Mode::Float).unwrap();
        for root in evolute_directions(&f, &RootOptions::default()).roots() {
            let s = solve_evolute_point(&f, &TangentDirection::from_angle(root.theta), 1e-8).unwrap();
            if let Some(gap) = s.moutard_gap {
                prop_assert!(gap < 1e-10);
            }
            let q = direction_sextic(&f);
            prop_assert!(q.eval_angle(root.theta).abs() < 1e-8 * q.coeffs_f64().iter().map(|c| c.abs()).fold(1.0, f64::max));
        }
    }

    #[test]
    fn mid_plane_contains_midpoint_and_tangent_line(
        f in frame(),
        p1 in proptest::array::uniform2(-0.3f64..0.3),
        p2 in proptest::array::uniform2(-0.3f64..0.3),
    ) {
        let f = f.to_mode(Mode::Float).unwrap();
        prop_assume!((p1[0] - p2[0]).hypot(p1[1] - p2[1]) > 1e-3);
        let pair = PointPair::new(p1.map(Scalar::Float), p2.map(Scalar::Float));
        let plane = mid_plane(&f, &pair).unwrap();
        let (x1, x2) = (frame_point(&f, p1), frame_point(&f, p2));
        let m = [0, 1, 2].map(|i| Scalar::Float(0.5 * (x1[i] + x2[i])));
        prop_assert!(plane.eval(&m).to_f64().abs() < 1e-12);
        // tangent planes n·X = n·x with n = (−f_u, −f_v, 1)
        let grad = |p: [f64; 2]| {
            let at = [Scalar::Float(p[0]), Scalar::Float(p[1])];
            let fu = f.normalized().partial(0).unwrap().eval(&at).unwrap().to_f64();
            let fv = f.normalized().partial(1).unwrap().eval(&at).unwrap().to_f64();
            [-fu, -fv, 1.0]
        };
        let (n1, n2) = (grad(p1), grad(p2));
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let dir = [n1[1] * n2[2] - n1[2] * n2[1], n1[2] * n2[0] - n1[0] * n2[2], n1[0] * n2[1] - n1[1] * n2[0]];
        let dn = dot(dir, dir).sqrt();
        prop_assume!(dn > 1e-6);
        let dir = dir.map(|c| c / dn);
        let rows = [n1, n2, dir].map(|r| r.map(Scalar::Float));
        let rhs = [dot(n1, x1), dot(n2, x2), 0.0].map(Scalar::Float);
        let inv = linalg::inv3(&rows).unwrap();
        let base = linalg::to_f64_3(&linalg::mat_vec(&inv, &rhs));
        for s in [0.0, 1.0] {
            let pt = [0, 1, 2].map(|i| Scalar::Float(base[i] + s * dir[i]));
            prop_assert!(plane.eval(&pt).to_f64().abs() < 1e-10 * (1.0 + base.iter().map(|c| c.abs()).fold(0.0, f64::max)));
        }
    }

    #[test]
    fn envelope_rows_converge(f in frame(), theta in 0.0f64..std::f64::consts::PI, shift in proptest::array::uniform2(-1.0f64..1.0)) {
        let probe = envelope_limit_probe(&f, &TangentDirection::from_angle(theta), &[1e-3, 3e-4, 1e-4], shift).unwrap();
        for (k, order) in probe.orders.iter().enumerate() {
            // exact limits leave only rounding amplified by t⁻³
            let tiny = probe.gaps[k].iter().all(|g| *g < 1e-8);
            prop_assert!(tiny || order.is_some_and(|o| o >= 0.95), "row {}: {:?}", k, probe.gaps[k]);
        }
    }

    #[test]
    fn round_trip_and_covariance(s in float_surface(), map in unimodular(), p in proptest::array::uniform2(-0.1f64..0.1), x in proptest::array::uniform3(-2.0f64..2.0)) {
        let f = normalize_at(&s, &s.chart_point(p).unwrap()).unwrap();
        let pt = Point3(x.map(Scalar::Float));
        let back = f.push_forward(&f.pull_back(&pt));
        prop_assert!(rel_gap(&linalg::to_f64_3(&back.0), &x) < 1e-12);

        let moved = s.transformed(&map).unwrap();
        let g = normalize_at(&moved, &moved.chart_point(p).unwrap()).unwrap();
        let want = map.compose(f.world_from_local());
        let got = g.world_from_local();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((want.linear()[i][j].to_f64() - got.linear()[i][j].to_f64()).abs() < 1e-10);
            }
            prop_assert!((want.translation()[i].to_f64() - got.translation()[i].to_f64()).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn expansion_identities_exact(f in frame()) {
        prop_assert_eq!(verify_lemma_main3(&f).unwrap().nonzero_terms, 0);
        prop_assert_eq!(verify_lemma_main4(&f).unwrap().nonzero_terms, 0);
    }
}

#[test]
fn cubic_form_is_apolar_in_frames() {
    let mut g = rng(11);
    for _ in 0..20 {
        let f = random_frame(&mut g);
        let c = cubic_form(&f);
        // trace-free: 3f30 + f12 = 0 and 3f03 + f21 = 0
        assert!((&(&r(3, 1) * &c.c(3, 0)) + &c.c(1, 2)).is_zero());
        assert!((&(&r(3, 1) * &c.c(0, 3)) + &c.c(2, 1)).is_zero());
    }
    let _ = Jet::<2>::zero(2, Mode::Rational);
}
