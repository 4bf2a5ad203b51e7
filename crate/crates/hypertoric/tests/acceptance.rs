//! One line per acceptance criterion. Runs without the test harness so the
//! lines always show; exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hypertoric::arrangement::{
    build_arrangement, deck_act, enumerate_faces, genericity_check, lifted_cells_in_box,
    ArrangementError, FacePoset, PeriodicArrangement,
};
use hypertoric::beilinson::{b0_stalk, b_center_polys, b_reduce, b_stalk, Flavor};
use hypertoric::cli::{run, JobSpec};
use hypertoric::cosheaf::{
    build_cosheaf, collapse_and_complete, global_algebra, refine_cells, verify_reduction_commutes,
};
use hypertoric::lattice::{row_hnf, IntMatrix, RationalPoint, ToriSequence};
use hypertoric::ncalg::{center_up_to, complete, iso_check, AlgebraMap, Poly};
use hypertoric::skeleton::{
    annulus_points, build_skeleton, euler_characteristic, euler_oracle, flow_report,
    local_model_check, FlowParams,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn arr(d: usize, fams: &[(Vec<i64>, BigRational)]) -> PeriodicArrangement {
    PeriodicArrangement::from_i64(d, fams).unwrap()
}

fn poset(d: usize, fams: &[(Vec<i64>, BigRational)]) -> FacePoset {
    enumerate_faces(&arr(d, fams)).unwrap()
}

fn circle() -> FacePoset {
    poset(1, &[(vec![1], q(0, 1))])
}

fn two_point_circle() -> FacePoset {
    poset(1, &[(vec![1], q(0, 1)), (vec![1], q(1, 3))])
}

fn square_torus() -> FacePoset {
    poset(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))])
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: u64) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < Duration::from_secs(limit), format!("runtime {t:?} over {limit} s"))?;
    Ok(t)
}

fn span_hnf(a: &[Poly], b: &[Poly]) -> (IntMatrix, IntMatrix) {
    let mut monos: Vec<_> = a
        .iter()
        .chain(b)
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()).collect::<Vec<_>>())
        .collect();
    monos.sort();
    monos.dedup();
    let mat = |ps: &[Poly]| {
        let rows = ps
            .iter()
            .map(|p| monos.iter().map(|m| BigInt::from(p.coeff(m))).collect())
            .collect();
        row_hnf(&IntMatrix::from_rows(monos.len(), rows))
    };
    (mat(a), mat(b))
}

fn center_of_b() -> Outcome {
    let start = Instant::now();
    let rw = complete(&b_stalk(), 16).map_err(|e| e.to_string())?;
    for d in 0..=8u32 {
        let c = center_up_to(&rw, d).map_err(|e| e.to_string())?;
        // t has degree 2, so filtration d allows |k| <= d / 2
        let expected: Vec<Poly> = b_center_polys(d / 2)
            .iter()
            .map(|p| rw.normal_form(p).unwrap())
            .collect();
        let (a, b) = span_hnf(&c, &expected);
        ensure(a == b, format!("span differs at filtration {d}"))?;
    }
    let t = within(start, 10)?;
    Ok(format!("D = 0..8 spans agree, {t:.2?}"))
}

fn reduction() -> Outcome {
    let r = b_reduce().map_err(|e| e.to_string())?;
    let rr = complete(&r, 8).map_err(|e| e.to_string())?;
    let b0 = b0_stalk();
    let r0 = complete(&b0, 8).map_err(|e| e.to_string())?;
    let map = AlgebraMap::by_name(&b0, &r).map_err(|e| e.to_string())?;
    let rep = iso_check(&r0, &rr, &map, 6).map_err(|e| e.to_string())?;
    ensure(rep.isomorphic, format!("{:?}", rep.reason))?;
    let basis: HashSet<String> = rr
        .basis(6)
        .map_err(|e| e.to_string())?
        .monos
        .iter()
        .map(|m| r.format_mono(m))
        .collect();
    let want: HashSet<String> = ["e:1", "e:2", "x", "y"].iter().map(|s| s.to_string()).collect();
    ensure(basis == want, format!("basis {basis:?}"))?;
    Ok(format!("iso to B0, basis {{e1, e2, x, y}}, dims {:?}", rep.dims_target))
}

fn pants_mirror() -> Outcome {
    let start = Instant::now();
    let p = circle();
    let cells = refine_cells(&p, &[q(1, 2)]).map_err(|e| e.to_string())?;
    let sheaf = build_cosheaf(&p, Flavor::B0).map_err(|e| e.to_string())?;
    let g = global_algebra(&sheaf, &cells).map_err(|e| e.to_string())?;
    let c = collapse_and_complete(g, 12).map_err(|e| e.to_string())?;
    let dims = c.dims(8).map_err(|e| e.to_string())?;
    // Z[x, y] / (xy): 1, then x^a and y^b
    let oracle: Vec<usize> = (0..=8).map(|k| if k == 0 { 1 } else { 2 }).collect();
    ensure(dims == oracle, format!("dims {dims:?}"))?;
    let pres = &c.collapsed;
    for w in [["c0/H0.x", "c0/H0.y"], ["c0/H0.y", "c0/H0.x"]] {
        let m = pres.expr(&[(1, &w)]).map_err(|e| e.to_string())?;
        ensure(c.rewrite.normal_form(&m).unwrap().is_zero(), "xy or yx nonzero")?;
    }
    for k in 1..=8 {
        for g in ["c0/H0.x", "c0/H0.y"] {
            let word = vec![g; k];
            let m = pres.expr(&[(1, &word)]).map_err(|e| e.to_string())?;
            ensure(!c.rewrite.normal_form(&m).unwrap().is_zero(), "power vanished")?;
        }
    }
    let t = within(start, 30)?;
    Ok(format!("dims {dims:?}, XY = YX = 0, {t:.2?}"))
}

/// x^a y^b w^m not divisible by xyw, graded by a + b + 2m.
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

fn self_mirror() -> Outcome {
    let start = Instant::now();
    let p = circle();
    let cells = refine_cells(&p, &[q(1, 2)]).map_err(|e| e.to_string())?;
    let sheaf = build_cosheaf(&p, Flavor::B).map_err(|e| e.to_string())?;
    let g = global_algebra(&sheaf, &cells).map_err(|e| e.to_string())?;
    let c = collapse_and_complete(g, 10).map_err(|e| e.to_string())?;
    let pres = &c.collapsed;
    ensure(pres.vertices.len() == 1, "more than one vertex after collapse")?;
    let comm = pres
        .expr(&[(1, &["c0/H0.x", "c0/H0.y"]), (-1, &["c0/H0.y", "c0/H0.x"])])
        .map_err(|e| e.to_string())?;
    ensure(c.rewrite.normal_form(&comm).unwrap().is_zero(), "xy - yx nonzero")?;
    let inv = pres
        .expr(&[(1, &["c0/H0.t^-1"]), (1, &["c0/H0.x", "c0/H0.y", "c0/H0.t^-1"])])
        .map_err(|e| e.to_string())?;
    ensure(c.rewrite.normal_form(&inv).unwrap() == pres.one(), "1 + xy not inverted")?;
    let dims = c.dims(6).map_err(|e| e.to_string())?;
    ensure(dims == localized_oracle(6), format!("dims {dims:?}"))?;
    let t = within(start, 60)?;
    Ok(format!("commutative, (1+xy) invertible, dims {dims:?}, {t:.2?}"))
}

fn global_reduction() -> Outcome {
    let mut parts = Vec::new();
    for (name, p) in [
        ("one-vertex circle", circle()),
        ("two-vertex circle", two_point_circle()),
        ("square torus", square_torus()),
    ] {
        let cells = refine_cells(&p, &vec![q(1, 2); p.d()]).map_err(|e| e.to_string())?;
        let rep = verify_reduction_commutes(&p, &cells, 4).map_err(|e| e.to_string())?;
        ensure(rep.passed(), format!("{name}: {:?}", rep.failures))?;
        parts.push(format!("{name} {:?}", rep.dims_b0));
    }
    Ok(parts.join("; "))
}

fn even(x: &BigInt) -> bool {
    (x % BigInt::from(2)).is_zero()
}

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

fn sampled_chambers(a: &PeriodicArrangement, samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = 10007;
    let mut classes: Vec<Vec<BigInt>> = Vec::new();
    let mut seen = HashSet::new();
    for _ in 0..samples {
        let u: Vec<BigRational> = (0..a.d).map(|_| q(rng.gen_range(0..den), den)).collect();
        let h = a.label_of(&u);
        if h.iter().any(even) || !seen.insert(h.clone()) {
            continue;
        }
        if !classes.iter().any(|c| translates(a, c, &h)) {
            classes.push(h);
        }
    }
    classes.len()
}

fn arrangement_examples() -> Vec<PeriodicArrangement> {
    vec![
        arr(1, &[(vec![1], q(0, 1))]),
        arr(1, &[(vec![1], q(1, 3)), (vec![-1], q(0, 1))]),
        arr(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))]),
        arr(2, &[(vec![1, 0], q(1, 7)), (vec![0, 1], q(2, 7)), (vec![1, 1], q(1, 2))]),
    ]
}

fn chamber_combinatorics() -> Outcome {
    let mut counts = Vec::new();
    for (k, a) in arrangement_examples().iter().enumerate() {
        let p = enumerate_faces(a).map_err(|e| e.to_string())?;
        let sampled = sampled_chambers(a, 10_000, 101 + k as u64);
        ensure(
            p.chambers().len() == sampled,
            format!("arrangement {k}: {} chambers, sampled {sampled}", p.chambers().len()),
        )?;
        ensure(p.euler_sum() == 0, format!("arrangement {k}: euler {}", p.euler_sum()))?;
        counts.push(sampled);
    }
    Ok(format!("chambers {counts:?} match 10^4 samples, euler 0"))
}

fn deck_action() -> Outcome {
    for (k, a) in arrangement_examples().iter().enumerate() {
        let p = enumerate_faces(a).map_err(|e| e.to_string())?;
        let lo = vec![q(-1, 1); a.d];
        let hi = vec![q(2, 1); a.d];
        let mut classes: Vec<Vec<BigInt>> = Vec::new();
        for c in lifted_cells_in_box(a, &lo, &hi, false)
            .into_iter()
            .filter(|c| !c.label.iter().any(even))
        {
            let lf = p.locate(&c.label).ok_or("unlocated chamber")?;
            for lam in box_points(a.d, 2) {
                if lam.iter().all(|x| *x == 0) {
                    continue;
                }
                let lam: Vec<BigInt> = lam.into_iter().map(BigInt::from).collect();
                ensure(
                    p.label(&deck_act(&p, &lam, &lf)) != c.label,
                    format!("arrangement {k}: translation fixes a chamber"),
                )?;
            }
            if !classes.iter().any(|x| translates(a, x, &c.label)) {
                classes.push(c.label.clone());
            }
        }
        ensure(
            classes.len() == p.chambers().len(),
            format!("arrangement {k}: {} orbits vs {} chambers", classes.len(), p.chambers().len()),
        )?;
    }
    Ok("free on lifted chambers, orbits = chambers on 4 arrangements".into())
}

fn skeleton_euler() -> Outcome {
    let mut got = Vec::new();
    for (name, p, want) in [
        ("pants", circle(), -1),
        ("two-point circle", two_point_circle(), -2),
        ("square torus", square_torus(), 1),
    ] {
        let s = build_skeleton(&p).map_err(|e| e.to_string())?;
        let cells = refine_cells(&p, &vec![q(1, 2); p.d()]).map_err(|e| e.to_string())?;
        let chi = euler_characteristic(&s, &cells);
        let oracle = euler_oracle(&p.arrangement);
        ensure(chi == want && oracle == want, format!("{name}: {chi} / oracle {oracle}"))?;
        got.push(format!("{name} {chi}"));
    }
    Ok(got.join(", "))
}

fn local_product() -> Outcome {
    let mut total = 0;
    let torus = square_torus();
    for p in [circle(), two_point_circle(), torus.clone(), poset(1, &[])] {
        let s = build_skeleton(&p).map_err(|e| e.to_string())?;
        for i in 0..s.strata.len() {
            ensure(local_model_check(&s, i), format!("stratum {i}"))?;
        }
        total += s.strata.len();
    }
    let s = build_skeleton(&torus).map_err(|e| e.to_string())?;
    let v = torus.faces_of_dim(0)[0];
    let over = s.strata_over(v);
    ensure(over.len() == 16, format!("{} strata over the vertex", over.len()))?;
    ensure(over.iter().all(|&i| local_model_check(&s, i)), "vertex stratum")?;
    Ok(format!("{total} strata, 16/16 over the d = 2 vertex"))
}

fn liouville() -> Outcome {
    let start = Instant::now();
    let params = FlowParams::admissible(0.1, 400);
    let mut pts = annulus_points(100, 2024, 1.2, 1.9);
    let axis = [[1.5, 0.0], [-1.5, 0.0], [1.3, 0.0], [-1.8, 0.0], [3.0, 0.0], [-2.5, 0.0]];
    pts.extend(axis);
    let rep = flow_report(&params, 400, &pts).map_err(|e| e.to_string())?;
    ensure(rep.area.positive, format!("min F = {}", rep.area.min_f))?;
    let random = &rep.trajectories[..100];
    let worst = random.iter().map(|t| t.distance).fold(0.0, f64::max);
    ensure(
        random.iter().all(|t| t.limit != hypertoric::skeleton::Limit::NotConverged),
        "a trajectory did not converge",
    )?;
    ensure(worst < 1e-3, format!("distance {worst}"))?;
    let off = rep.trajectories[100..].iter().map(|t| t.max_abs_y).fold(0.0, f64::max);
    ensure(off <= 1e-9, format!("axis drift {off}"))?;
    let t = within(start, 60)?;
    Ok(format!(
        "c = {:.4}, min F = {:.3e}, max distance {worst:.1e}, axis drift {off:.1e}, {t:.2?}",
        params.c, rep.area.min_f
    ))
}

fn degenerate_input() -> Outcome {
    let seq = ToriSequence::from_columns_i64(2, &[vec![1, 1]]).map_err(|e| e.to_string())?;
    let a = build_arrangement(&seq, &RationalPoint::new(vec![BigRational::zero()]))
        .map_err(|e| e.to_string())?;
    ensure(!genericity_check(&a).passed, "genericity passed")?;
    match enumerate_faces(&a) {
        Err(ArrangementError::NonGeneric(f)) => ensure(!f.is_empty(), "no flats listed")?,
        other => return Err(format!("expected NonGeneric, got {:?}", other.map(|p| p.faces.len()))),
    }
    let job = JobSpec::from_json(
        r#"{"seq":{"n":2,"iota":[[1,1]]},"beta":["0"],"commands":["arrange","global"]}"#,
    )
    .map_err(|e| e.to_string())?;
    let b = run(&job);
    let kind = b.stages[0].error.as_ref().map(|e| e.kind.clone());
    ensure(
        b.exit_code == 2 && kind.as_deref() == Some("NonGenericArrangement"),
        format!("exit {} kind {kind:?}", b.exit_code),
    )?;
    Ok("NonGenericArrangement, exit code 2, no perturbation".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("center of B", center_of_b),
        ("reduction of B", reduction),
        ("pair-of-pants mirror", pants_mirror),
        ("self-mirror space", self_mirror),
        ("global reduction identity", global_reduction),
        ("chamber/face combinatorics", chamber_combinatorics),
        ("deck action", deck_action),
        ("skeleton Euler characteristics", skeleton_euler),
        ("local product structure", local_product),
        ("2D Liouville model", liouville),
        ("degenerate input", degenerate_input),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match out {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
