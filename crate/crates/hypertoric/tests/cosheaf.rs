use std::time::Instant;

use hypertoric::arrangement::{enumerate_faces, FacePoset, PeriodicArrangement};
use hypertoric::beilinson::Flavor;
use hypertoric::cosheaf::{
    build_cosheaf, collapse_and_complete, compare_stalks, global_algebra, reduce_cosheaf,
    refine_cells, verify_reduction_commutes, CosheafError,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn poset(d: usize, fams: &[(Vec<i64>, BigRational)]) -> FacePoset {
    enumerate_faces(&PeriodicArrangement::from_i64(d, fams).unwrap()).unwrap()
}

fn circle() -> FacePoset {
    poset(1, &[(vec![1], q(0, 1))])
}

fn empty_circle() -> FacePoset {
    poset(1, &[])
}

fn two_point_circle() -> FacePoset {
    poset(1, &[(vec![1], q(0, 1)), (vec![1], q(1, 3))])
}

fn square_torus() -> FacePoset {
    poset(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))])
}

#[test]
fn circle_cells() {
    let c = refine_cells(&circle(), &[q(1, 2)]).unwrap();
    assert_eq!(c.counts(), vec![2, 2]);
    let c = refine_cells(&empty_circle(), &[q(1, 2)]).unwrap();
    assert_eq!(c.counts(), vec![1, 1]);
    let t = refine_cells(&square_torus(), &[q(1, 2), q(1, 2)]).unwrap();
    assert_eq!(t.counts(), vec![4, 8, 4]);
    assert!(matches!(
        refine_cells(&circle(), &[q(0, 1)]),
        Err(CosheafError::NonTransverseCut { .. })
    ));
}

#[test]
fn circle_stalks() {
    let p = circle();
    let b0 = build_cosheaf(&p, Flavor::B0).unwrap();
    let v = p.faces_of_dim(0)[0];
    let ch = p.chambers()[0];
    assert_eq!(b0.stalks[v].pres.vertices.len(), 2);
    assert_eq!(b0.stalks[ch].pres.vertices.len(), 1);
    assert!(b0.stalks[ch].pres.generators.is_empty());
    let b = build_cosheaf(&p, Flavor::B).unwrap();
    assert_eq!(b.stalks[ch].rewrite.basis(4).unwrap().dims(), vec![1, 0, 2, 0, 2]);
    let r = reduce_cosheaf(&b).unwrap();
    assert!(compare_stalks(&b0, &r, 6)
        .unwrap()
        .iter()
        .all(|rep| rep.isomorphic));
}

#[test]
fn torus_stalks_reduce() {
    let p = square_torus();
    let b = build_cosheaf(&p, Flavor::B).unwrap();
    let b0 = build_cosheaf(&p, Flavor::B0).unwrap();
    let r = reduce_cosheaf(&b).unwrap();
    for rep in compare_stalks(&b0, &r, 4).unwrap() {
        assert!(rep.isomorphic, "{:?}", rep.reason);
    }
}

#[test]
fn pants_mirror() {
    let start = Instant::now();
    let p = circle();
    let cells = refine_cells(&p, &[q(1, 2)]).unwrap();
    let g = global_algebra(&build_cosheaf(&p, Flavor::B0).unwrap(), &cells).unwrap();
    let c = collapse_and_complete(g, 10).unwrap();
    assert_eq!(c.collapsed.vertices.len(), 1);
    assert_eq!(c.dims(8).unwrap(), vec![1, 2, 2, 2, 2, 2, 2, 2, 2]);
    eprintln!("pants: {:?}", start.elapsed());
}

#[test]
fn empty_circle_is_local_systems() {
    let p = empty_circle();
    let cells = refine_cells(&p, &[q(1, 2)]).unwrap();
    let g = global_algebra(&build_cosheaf(&p, Flavor::B0).unwrap(), &cells).unwrap();
    let c = collapse_and_complete(g, 8).unwrap();
    assert_eq!(c.collapsed.vertices.len(), 1);
    // one invertible loop of degree one
    assert_eq!(c.dims(4).unwrap(), vec![1, 2, 2, 2, 2]);
}

/// Monomials x^a y^b w^m of degree a + b + 2m not divisible by xyw, a
/// basis of Z[x, y, w] / (w (1 + xy) - 1).
fn localized_oracle(n: usize) -> Vec<usize> {
    (0..=n)
        .map(|deg| {
            let mut count = 0;
            for m in 0..=deg / 2 {
                for a in 0..=deg - 2 * m {
                    let b = deg - 2 * m - a;
                    if !(a > 0 && b > 0 && m > 0) {
                        count += 1;
                    }
                }
            }
            count
        })
        .collect()
}

#[test]
fn self_mirror() {
    let p = circle();
    let cells = refine_cells(&p, &[q(1, 2)]).unwrap();
    let g = global_algebra(&build_cosheaf(&p, Flavor::B).unwrap(), &cells).unwrap();
    let c = collapse_and_complete(g, 10).unwrap();
    assert_eq!(c.collapsed.vertices.len(), 1);
    assert_eq!(c.dims(6).unwrap(), localized_oracle(6));
    let pres = &c.collapsed;
    let comm = pres
        .expr(&[(1, &["c0/H0.x", "c0/H0.y"]), (-1, &["c0/H0.y", "c0/H0.x"])])
        .unwrap();
    assert!(c.rewrite.normal_form(&comm).unwrap().is_zero());
    // (1 + xy) times t^-1 is the unit
    let prod = pres
        .expr(&[(1, &["c0/H0.t^-1"]), (1, &["c0/H0.x", "c0/H0.y", "c0/H0.t^-1"])])
        .unwrap();
    assert_eq!(c.rewrite.normal_form(&prod).unwrap(), pres.one());
}

#[test]
fn reduction_on_circles() {
    for (p, deg) in [(circle(), 6), (two_point_circle(), 6)] {
        let cells = refine_cells(&p, &[q(1, 2)]).unwrap();
        let rep = verify_reduction_commutes(&p, &cells, deg).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }
}

#[test]
fn reduction_on_torus() {
    let start = Instant::now();
    let p = square_torus();
    let cells = refine_cells(&p, &[q(1, 2), q(1, 2)]).unwrap();
    let rep = verify_reduction_commutes(&p, &cells, 4).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
    eprintln!("torus: {:?} {:?}", rep.dims_b0, start.elapsed());
}

#[test]
fn cut_shift_does_not_matter() {
    for (p, deg) in [(circle(), 6), (two_point_circle(), 6), (square_torus(), 4)] {
        for flavor in [Flavor::B0, Flavor::B] {
            let sheaf = build_cosheaf(&p, flavor).unwrap();
            let dims: Vec<Vec<usize>> = [q(1, 2), q(1, 7)]
                .into_iter()
                .map(|s| {
                    let cells = refine_cells(&p, &vec![s; p.d()]).unwrap();
                    let g = global_algebra(&sheaf, &cells).unwrap();
                    collapse_and_complete(g, deg + 4).unwrap().dims(deg).unwrap()
                })
                .collect();
            assert_eq!(dims[0], dims[1], "{flavor:?}");
        }
    }
}

#[test]
fn glued_lattice_is_central() {
    use hypertoric::cosheaf::glued_central;
    let p = two_point_circle();
    let sheaf = build_cosheaf(&p, Flavor::B).unwrap();
    let cells = refine_cells(&p, &[q(1, 2)]).unwrap();
    let g = global_algebra(&sheaf, &cells).unwrap();
    let c = collapse_and_complete(g, 10).unwrap();
    for z in glued_central(&sheaf, &cells, &c.glued).unwrap() {
        let zc = c.transport.central_image(&z).unwrap();
        hypertoric::ncalg::quotient_central(&c.rewrite, &[zc]).unwrap();
    }
}

fn small_arrangement() -> impl Strategy<Value = (usize, Vec<(Vec<i64>, (i64, i64))>)> {
    let fam2 = prop::sample::select(vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]);
    let off = (0i64..7, 3i64..8);
    prop_oneof![
        prop::collection::vec((Just(vec![1i64]), off.clone()), 0..4).prop_map(|f| (1usize, f)),
        prop::collection::vec((fam2, off), 1..3).prop_map(|f| (2usize, f)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_cosheaves_are_functorial((d, fams) in small_arrangement()) {
        let fams: Vec<(Vec<i64>, BigRational)> =
            fams.into_iter().map(|(a, (n, m))| (a, q(n, m))).collect();
        let arr = PeriodicArrangement::from_i64(d, &fams).unwrap();
        if let Ok(p) = enumerate_faces(&arr) {
            for flavor in [Flavor::B0, Flavor::B] {
                prop_assert!(build_cosheaf(&p, flavor).is_ok());
            }
        }
    }
}
