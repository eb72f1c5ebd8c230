use aek_core::evolute::{trace_evolute, TraceOptions};
use aek_core::frames::{FrameError, Height, Patch};
use aek_core::evolute::EvoluteError;
use aek_core::invariants::Center;
use aek_core::{Jet2, Mode, Scalar, SurfaceModel};

fn poly(terms: &[([u8; 2], f64)]) -> Jet2 {
    let deg = terms.iter().map(|(e, _)| (e[0] + e[1]) as usize).max().unwrap();
    Jet2::from_terms(deg, Mode::Float, terms.iter().map(|(e, c)| (*e, Scalar::Float(*c)))).unwrap()
}

#[test]
fn sphere_traces_to_its_center() {
    let s = SurfaceModel::new(
        Height::SphereCap {
            center: [0.0, 0.0, 1.0].map(Scalar::Float),
            radius: Scalar::Float(1.0),
        },
        Patch::new((-0.4, 0.4), (-0.4, 0.4)),
    )
    .unwrap();
    let res = trace_evolute(&s, &TraceOptions::grid(5)).unwrap();
    assert_eq!(res.successes(), 25);
    assert_eq!(res.branches.len(), 1);
    let b = &res.branches[0];
    assert!(b.degenerate);
    assert_eq!(b.samples.len(), 25);
    for x in &b.samples {
        let Center::Finite(c) = &x.center_world else { panic!("{x:?}") };
        for (k, want) in [0.0, 0.0, 1.0].iter().enumerate() {
            assert!((c[k].to_f64() - want).abs() < 1e-10);
        }
    }
}

#[test]
fn nonconvex_samples_are_reported_and_skipped() {
    let jet = poly(&[([2, 0], 0.5), ([0, 2], 0.5), ([3, 0], 1.0), ([1, 2], -1.0)]);
    let s = SurfaceModel::new_unchecked(Height::Polynomial(jet), Patch::new((-0.3, 0.3), (-0.3, 0.3)));
    let res = trace_evolute(&s, &TraceOptions::grid(7)).unwrap();
    let bad: Vec<_> = res.samples.iter().filter(|x| x.outcome.is_err()).collect();
    assert!(!bad.is_empty());
    assert!(bad
        .iter()
        .all(|x| x.outcome == Err(EvoluteError::Frame(FrameError::NonConvexPoint)) && x.chart[0] < 0.0));
    assert!(res.successes() > 0);
    assert!(!res.branches.is_empty());
    for b in &res.branches {
        assert!(b.max_angle_jump < 0.2);
    }
}

#[test]
fn worked_example_has_six_seeds_at_the_origin() {
    let jet = poly(&[([2, 0], 0.5), ([0, 2], 0.5), ([3, 0], 1.0), ([1, 2], -3.0)]);
    let s = SurfaceModel::polynomial(jet, Patch::new((-0.05, 0.05), (-0.05, 0.05))).unwrap();
    let res = trace_evolute(&s, &TraceOptions::grid(3)).unwrap();
    let origin = res.samples.iter().position(|x| x.index == (1, 1)).unwrap();
    let data = res.samples[origin].outcome.as_ref().unwrap();
    let mut angles: Vec<f64> = data.points.iter().map(|p| p.root.theta).collect();
    angles.sort_by(f64::total_cmp);
    assert_eq!(angles.len(), 6);
    for (k, t) in angles.iter().enumerate() {
        assert!((t - k as f64 * std::f64::consts::PI / 6.0).abs() < 1e-8);
    }
    let ids: std::collections::BTreeSet<usize> = res
        .branch_of()
        .iter()
        .filter(|((si, _), _)| *si == origin)
        .map(|(_, id)| *id)
        .collect();
    assert_eq!(ids.len(), 6);
}
