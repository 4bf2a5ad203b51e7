use hypertoric::arrangement::{
    deck_act, enumerate_faces, face_local_data, genericity_check, lifted_cells_in_box,
    LiftedFace, PeriodicArrangement,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn arr(d: usize, fams: &[(Vec<i64>, BigRational)]) -> PeriodicArrangement {
    PeriodicArrangement::from_i64(d, fams).unwrap()
}

fn even(x: &BigInt) -> bool {
    (x % BigInt::from(2)).is_zero()
}

/// All integer vectors in `[-r, r]^d`.
fn box_points(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-r..=r).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Whether `b = a + 2 A lambda` for some small `lambda`.
fn translates(a: &PeriodicArrangement, x: &[BigInt], y: &[BigInt]) -> bool {
    box_points(a.d, 3).iter().any(|lam| {
        a.families.iter().enumerate().all(|(i, f)| {
            let dot: BigInt = f
                .conormal
                .iter()
                .zip(lam)
                .map(|(c, l)| c * BigInt::from(*l))
                .sum();
            &x[i] + dot * 2 == y[i]
        })
    })
}

/// Counts chambers by sampling random exact points in the fundamental domain
/// and identifying labels up to brute-force translation.
fn sampled_chambers(a: &PeriodicArrangement, samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = 10007;
    let mut classes: Vec<Vec<BigInt>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..samples {
        let u: Vec<BigRational> = (0..a.d).map(|_| q(rng.gen_range(0..den), den)).collect();
        let h = a.label_of(&u);
        if h.iter().any(even) {
            continue;
        }
        if !seen.insert(h.clone()) {
            continue;
        }
        if !classes.iter().any(|c| translates(a, c, &h)) {
            classes.push(h);
        }
    }
    classes.len()
}

fn examples() -> Vec<PeriodicArrangement> {
    vec![
        arr(1, &[(vec![1], q(0, 1))]),
        arr(1, &[(vec![1], q(1, 3)), (vec![-1], q(0, 1))]),
        arr(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))]),
        arr(
            2,
            &[(vec![1, 0], q(1, 7)), (vec![0, 1], q(2, 7)), (vec![1, 1], q(1, 2))],
        ),
        arr(
            2,
            &[(vec![1, 0], q(1, 5)), (vec![0, 1], q(1, 3)), (vec![1, -1], q(1, 2))],
        ),
    ]
}

#[test]
fn chamber_counts_match_sampling() {
    for (k, a) in examples().iter().enumerate() {
        let p = enumerate_faces(a).unwrap();
        let sampled = sampled_chambers(a, 10_000, 17 + k as u64);
        assert_eq!(p.chambers().len(), sampled, "arrangement {k}");
    }
}

#[test]
fn three_families_counts() {
    // Lines x = c, y = c', x + y = c'' on T^2: vertices are the pairwise
    // intersections, |det| = 1 each, so 3 vertices, 6 edges, 3 chambers.
    let p = enumerate_faces(&examples()[3]).unwrap();
    assert_eq!(p.faces_of_dim(0).len(), 3);
    assert_eq!(p.faces_of_dim(1).len(), 6);
    assert_eq!(p.faces_of_dim(2).len(), 3);
}

#[test]
fn euler_relation_on_examples() {
    for a in examples() {
        assert_eq!(enumerate_faces(&a).unwrap().euler_sum(), 0);
    }
}

#[test]
fn deck_action_free_with_correct_quotient() {
    for a in examples() {
        let p = enumerate_faces(&a).unwrap();
        let lo = vec![q(-1, 1); a.d];
        let hi = vec![q(2, 1); a.d];
        let lifted: Vec<_> = lifted_cells_in_box(&a, &lo, &hi, false)
            .into_iter()
            .filter(|c| !c.label.iter().any(even))
            .collect();
        let mut classes: Vec<Vec<BigInt>> = Vec::new();
        for c in &lifted {
            let lf = p.locate(&c.label).unwrap();
            for lam in box_points(a.d, 2) {
                if lam.iter().all(|x| *x == 0) {
                    continue;
                }
                let lam: Vec<BigInt> = lam.into_iter().map(BigInt::from).collect();
                let moved = deck_act(&p, &lam, &lf);
                assert_ne!(p.label(&moved), c.label, "nonzero translation fixes a chamber");
            }
            if !classes.iter().any(|k| translates(&a, k, &c.label)) {
                classes.push(c.label.clone());
            }
        }
        assert_eq!(classes.len(), p.chambers().len());
    }
}

#[test]
fn deck_identity_and_unit_shift() {
    let a = &examples()[0];
    let p = enumerate_faces(a).unwrap();
    let v = LiftedFace {
        face: 0,
        shift: vec![BigInt::zero()],
    };
    assert_eq!(deck_act(&p, &[BigInt::zero()], &v), v);
    let w = deck_act(&p, &[BigInt::from(1)], &v);
    assert_eq!(p.faces[0].active[0].m, BigInt::zero());
    // active wall m = 0 becomes m = 1
    assert_eq!(p.label(&w)[0], BigInt::from(2));
}

fn arb_arrangement() -> impl Strategy<Value = PeriodicArrangement> {
    (1usize..=2).prop_flat_map(|d| {
        prop::collection::vec(
            (prop::collection::vec(-2i64..=2, d), 1i64..97),
            d..=d + 2,
        )
        .prop_map(move |fams| {
            let fams: Vec<(Vec<i64>, BigRational)> = fams
                .into_iter()
                .map(|(a, o)| (a, q(o, 97)))
                .collect();
            PeriodicArrangement::from_i64(d, &fams).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generic_arrangements_are_consistent(a in arb_arrangement()) {
        prop_assume!(genericity_check(&a).passed);
        let p = enumerate_faces(&a).unwrap();
        if a.conormal_matrix().rank() == a.d {
            prop_assert_eq!(p.euler_sum(), 0);
        }
        for f in &p.faces {
            // the rep point realizes the label exactly
            prop_assert_eq!(a.label_of(&f.rep_point), f.label.clone());
            let ld = face_local_data(&p, f.index).unwrap();
            prop_assert!(ld.adapted_splitting.is_unimodular());
            for (r, act) in ld.active.iter().enumerate() {
                prop_assert_eq!(ld.adapted_splitting.row(r), act.conormal.clone());
            }
        }
        for inc in &p.incidences {
            let up = &p.faces[inc.upper];
            let low = &p.faces[inc.lower];
            prop_assert_eq!(up.codim + 1, low.codim);
            let upper_lift = p.label(&LiftedFace { face: inc.upper, shift: inc.shift.clone() });
            for (i, (x, y)) in upper_lift.iter().zip(&low.label).enumerate() {
                if i == inc.wall {
                    prop_assert_eq!(x - y, BigInt::from(inc.side.sign()));
                } else {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }
}
