use std::collections::HashSet;
use std::time::Instant;

use hypertoric::arrangement::{enumerate_faces, FacePoset, PeriodicArrangement};
use hypertoric::cosheaf::refine_cells;
use hypertoric::skeleton::{
    annulus_points, attach_microsheaf_cosheaf, build_skeleton, euler_characteristic, euler_oracle,
    flow_report, flow_to_skeleton, liouville_check_2d, Cover, Eta, FiberLabel, FlowParams, Limit,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn poset(d: usize, fams: &[(Vec<i64>, BigRational)]) -> FacePoset {
    enumerate_faces(&PeriodicArrangement::from_i64(d, fams).unwrap()).unwrap()
}

fn pants() -> FacePoset {
    poset(1, &[(vec![1], q(0, 1))])
}

fn examples() -> Vec<(FacePoset, i64)> {
    vec![
        (pants(), -1),
        (poset(1, &[]), 0),
        (poset(1, &[(vec![1], q(0, 1)), (vec![1], q(1, 3))]), -2),
        (poset(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))]), 1),
        (
            poset(
                2,
                &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5)), (vec![1, 1], q(1, 7))],
            ),
            3,
        ),
        (poset(2, &[(vec![1, 0], q(0, 1))]), 0),
    ]
}

#[test]
fn pants_strata() {
    let p = pants();
    let s = build_skeleton(&p).unwrap();
    let v = p.faces_of_dim(0)[0];
    let ch = p.chambers()[0];
    assert_eq!(s.strata_over(v).len(), 4);
    assert_eq!(s.strata_over(ch).len(), 1);
    assert_eq!(s.strata.len(), 5);
    let dims: Vec<usize> = s.strata_over(v).iter().map(|&i| s.strata[i].dim).collect();
    assert_eq!(dims.iter().filter(|&&d| d == 0).count(), 2);
    assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 2);
    // each arc has both endpoints, each point is an end of the chamber
    let fiber = s.incidences.iter().filter(|i| matches!(i.cover, Cover::Fiber { .. })).count();
    let base = s.incidences.iter().filter(|i| matches!(i.cover, Cover::Base { .. })).count();
    assert_eq!((fiber, base), (4, 2));
    assert!(s.projection_is_poset_map());
}

#[test]
fn strata_counts() {
    for (p, _) in examples() {
        let s = build_skeleton(&p).unwrap();
        let mut total = 0;
        for f in 0..p.faces.len() {
            let c = p.faces[f].codim;
            assert_eq!(s.strata_over(f).len(), 4usize.pow(c as u32));
            total += 4usize.pow(c as u32);
        }
        assert_eq!(s.strata.len(), total);
        assert!(s.projection_is_poset_map());
    }
    let t = poset(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))]);
    let s = build_skeleton(&t).unwrap();
    assert_eq!(s.strata_over(t.faces_of_dim(0)[0]).len(), 16);
}

#[test]
fn euler_characteristics() {
    for (p, chi) in examples() {
        let s = build_skeleton(&p).unwrap();
        let cells = refine_cells(&p, &vec![q(1, 2); p.d()]).unwrap();
        assert_eq!(euler_characteristic(&s, &cells), chi);
        assert_eq!(euler_oracle(&p.arrangement), chi);
    }
}

#[test]
fn fibers_have_vanishing_euler_characteristic() {
    for (p, _) in examples() {
        let s = build_skeleton(&p).unwrap();
        for f in 0..p.faces.len() {
            if p.faces[f].codim == 0 {
                continue;
            }
            let chi: i64 = s
                .strata_over(f)
                .iter()
                .map(|&i| {
                    let arcs = s.strata[i].labels.iter().filter(|l| l.is_arc()).count();
                    if arcs % 2 == 0 { 1 } else { -1 }
                })
                .sum();
            assert_eq!(chi, 0);
        }
    }
}

#[test]
fn local_models() {
    for (p, _) in examples() {
        let s = build_skeleton(&p).unwrap();
        for i in 0..s.strata.len() {
            assert!(hypertoric::skeleton::local_model_check(&s, i), "stratum {i}");
        }
    }
}

#[test]
fn pants_point_star() {
    let p = pants();
    let s = build_skeleton(&p).unwrap();
    let v = p.faces_of_dim(0)[0];
    let plus = s.stratum(v, &[FiberLabel::PlusPoint]).unwrap();
    let above: HashSet<usize> = s
        .incidences
        .iter()
        .filter(|i| i.lower == plus)
        .map(|i| i.upper)
        .collect();
    // two arcs and one ray
    assert_eq!(above.len(), 3);
    assert!(above.contains(&s.stratum(v, &[FiberLabel::UpperArc]).unwrap()));
    assert!(above.contains(&s.stratum(v, &[FiberLabel::LowerArc]).unwrap()));
    assert!(above.contains(&s.stratum(p.chambers()[0], &[]).unwrap()));
}

#[test]
fn microsheaf_dictionary() {
    for (p, _) in examples() {
        let s = build_skeleton(&p).unwrap();
        let (sheaf, dict) = attach_microsheaf_cosheaf(&s).unwrap();
        assert_eq!(dict.len(), s.strata.len());
        assert_eq!(sheaf.stalks.len(), p.faces.len());
        for f in 0..p.faces.len() {
            let names: HashSet<&str> = dict
                .iter()
                .filter(|e| e.face == f)
                .map(|e| e.element.as_str())
                .collect();
            assert_eq!(names.len(), 4usize.pow(p.faces[f].codim as u32));
            assert!(!names.contains("0"));
        }
    }
    let p = pants();
    let s = build_skeleton(&p).unwrap();
    let (_, dict) = attach_microsheaf_cosheaf(&s).unwrap();
    let v = p.faces_of_dim(0)[0];
    let upper = s.stratum(v, &[FiberLabel::UpperArc]).unwrap();
    let lower = s.stratum(v, &[FiberLabel::LowerArc]).unwrap();
    assert_eq!(dict[upper].element, "H0.x");
    assert_eq!(dict[lower].element, "H0.y");
}

#[test]
fn area_on_the_ends() {
    let p = FlowParams::new(0.1, 0.3);
    for th in [0.0, 0.7, 2.0, 4.5] {
        for r in [0.3, 0.8, 1.05] {
            assert!((p.area(r, th) - 0.3 / r).abs() < 1e-12);
        }
        for r in [1.95, 2.5, 7.0] {
            assert!((p.area(r, th) - r).abs() < 1e-12);
        }
    }
    let huge = liouville_check_2d(&FlowParams::new(0.1, 1e6), 100);
    assert!(!huge.positive && huge.min_f < 0.0);
    // a c below the bisected bound is fine, above is not
    let ok = liouville_check_2d(&FlowParams::new(0.1, huge.c_max * 0.99), 100);
    assert!(ok.positive);
    let bad = liouville_check_2d(&FlowParams::new(0.1, huge.c_max * 1.01), 100);
    assert!(!bad.positive);
}

#[test]
fn eta_round_trip() {
    let e = Eta::new(vec![1.1, 1.4, 1.9], vec![0.0, 0.3, 1.0]).unwrap();
    let s = serde_json::to_string(&e).unwrap();
    let back: Eta = serde_json::from_str(&s).unwrap();
    assert_eq!(e, back);
    assert!(serde_json::from_str::<Eta>(r#"{"knots":[1,2],"values":[0,0.5]}"#).is_err());
    assert!(Eta::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_none());
}

#[test]
fn flow_examples() {
    let p = FlowParams::admissible(0.1, 400);
    let inner = flow_to_skeleton(&p, [0.5 * 1f64.cos(), 0.5 * 1f64.sin()]).unwrap();
    assert_eq!(inner.limit, Limit::Circle);
    // radial: the angle does not move
    let a = inner.end[1].atan2(inner.end[0]);
    assert!((a - 1.0).abs() < 1e-9);
    let out = flow_to_skeleton(&p, [3.0, 0.0]).unwrap();
    assert_eq!(out.limit, Limit::RayPlus);
    assert_eq!(out.max_abs_y, 0.0);
    assert!(out.end[0] > 1.0);
    let neg = flow_to_skeleton(&p, [-4.0, 0.0]).unwrap();
    assert_eq!(neg.limit, Limit::RayMinus);
}

#[test]
fn annulus_flow() {
    let start = Instant::now();
    let p = FlowParams::admissible(0.1, 400);
    let mut pts = annulus_points(100, 7, 1.2, 1.9);
    pts.extend([[1.5, 0.0], [-1.5, 0.0], [1.85, 0.0], [-1.25, 0.0]]);
    let rep = flow_report(&p, 400, &pts).unwrap();
    assert!(rep.area.positive, "{}", rep.area.min_f);
    assert_eq!(rep.converged, pts.len());
    assert!(rep.max_distance < 1e-3);
    assert!(rep.all_monotone);
    for tr in &rep.trajectories[100..] {
        assert!(tr.max_abs_y < 1e-9, "{:?}", tr.start);
    }
    assert!(rep.passed());
    eprintln!("annulus flow: {:?}", start.elapsed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn eta_is_monotone(
        mid in prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 0..4),
        r in 0.5f64..2.5,
        dr in 1e-4f64..0.2,
    ) {
        let mut knots = vec![1.1];
        let mut vals = vec![0.0];
        let (mut k, mut v) = (1.1, 0.0);
        let kt: f64 = mid.iter().map(|m| m.0).sum::<f64>() + 0.3;
        let vt: f64 = mid.iter().map(|m| m.1).sum::<f64>() + 0.3;
        for (a, b) in &mid {
            k += 0.8 * a / kt;
            v += b / vt;
            knots.push(k);
            vals.push(v);
        }
        knots.push(1.9);
        vals.push(1.0);
        let e = Eta::new(knots, vals).unwrap();
        prop_assert!(e.value(r + dr) >= e.value(r) - 1e-12);
        prop_assert!(e.deriv(r) >= -1e-12);
        if r > 1.1 && r < 1.9 {
            prop_assert!(e.value(r) > 0.0 && e.value(r) < 1.0);
        }
    }

    #[test]
    fn random_skeleta_match_oracle(
        d in 1usize..3,
        fams in prop::collection::vec((prop::sample::select(vec![0usize, 1, 2, 3]), 0i64..7, 3i64..8), 0..3),
    ) {
        let normals: [Vec<i64>; 4] = if d == 1 {
            [vec![1], vec![1], vec![2], vec![1]]
        } else {
            [vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]
        };
        let fams: Vec<(Vec<i64>, BigRational)> =
            fams.into_iter().map(|(i, n, m)| (normals[i].clone(), q(n, m))).collect();
        let arr = PeriodicArrangement::from_i64(d, &fams).unwrap();
        if let Ok(p) = enumerate_faces(&arr) {
            if let Ok(s) = build_skeleton(&p) {
                let cells = refine_cells(&p, &vec![q(1, 2); d])
                    .or_else(|_| refine_cells(&p, &vec![q(3, 7); d]));
                if let Ok(cells) = cells {
                    prop_assert_eq!(euler_characteristic(&s, &cells), euler_oracle(&arr));
                }
                prop_assert!(s.projection_is_poset_map());
            }
        }
    }
}
