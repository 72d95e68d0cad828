use massart_core::data::*;
use massart_core::learner::{ChowSweep, OracleLearner};
use massart_core::tester::*;
use massart_core::Limits;

fn lim() -> Limits {
    Limits::default()
}

fn e1(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

fn model(d: usize, t: f64, eta: f64) -> MassartModel {
    MassartModel::constant(Halfspace::new(e1(d), t).unwrap(), eta)
}

#[test]
fn gaussian_data_passes_the_mass_test() {
    let slices = build_slices(0.05, 0.25, 1.0).unwrap();
    let passing = (0..20u64)
        .filter(|&s| {
            let data = Generator::Massart { d: 3, n: 100_000, model: model(3, 0.0, 0.0) }.generate(s, &lim()).unwrap();
            slice_mass_test(&data, &e1(3), &slices, 0.02).iter().all(|o| o.pass)
        })
        .count();
    assert!(passing >= 19, "{passing}/20");
}

#[test]
fn mass_shift_fails_its_slice() {
    let slices = build_slices(0.05, 0.25, 1.0).unwrap();
    let target = *slices.iter().find(|s| s.contains(0.1)).unwrap();
    let failing = (0..20u64)
        .filter(|&s| {
            let g = Generator::SliceMassShift { d: 3, n: 100_000, model: model(3, 0.0, 0.1), slice: Interval { lo: target.lo, hi: target.hi }, shift: 0.06 };
            let data = g.generate(100 + s, &lim()).unwrap();
            !slice_mass_test(&data, &e1(3), &slices, 0.01)[target.index - 1].pass
        })
        .count();
    assert!(failing >= 19, "{failing}/20");
}

#[test]
fn empty_light_slice_passes() {
    let far = Slice { lo: 2.9, hi: 3.0, index: 1 };
    assert!(far.gaussian_mass() < 0.01);
    assert!(mass_check(0, 1000, far.gaussian_mass(), 0.01).pass);
}

#[test]
fn moment_test_on_gaussian_and_skewed_slices() {
    let slice = Slice { lo: -0.25, hi: 0.25, index: 1 };
    let basis = orthobasis(&e1(4)).unwrap();
    let clean = (0..20u64)
        .filter(|&s| {
            let data = Generator::Massart { d: 4, n: 100_000, model: model(4, 0.0, 0.0) }.generate(200 + s, &lim()).unwrap();
            moment_test(&data, &e1(4), &slice, &basis, 3, 0.05, 50, &lim()).unwrap().pass
        })
        .count();
    assert!(clean >= 19, "{clean}/20");
    let skewed = (0..20u64)
        .filter(|&s| {
            let g = Generator::OrthogonalSkew { d: 4, n: 100_000, model: model(4, 0.0, 0.0), slice: Interval { lo: -0.25, hi: 0.25 }, deviation: 0.25 };
            let data = g.generate(300 + s, &lim()).unwrap();
            !moment_test(&data, &e1(4), &slice, &basis, 3, 0.05, 50, &lim()).unwrap().pass
        })
        .count();
    assert!(skewed >= 19, "{skewed}/20");
}

#[test]
fn certificate_examples() {
    let basis = orthobasis(&e1(3)).unwrap();
    let slice = Slice { lo: 0.25, hi: 0.75, index: 1 };
    let (eta, eps) = (0.2, 0.05);
    let beta = 1.0 - 2.0 * eta;

    // Noiseless labels: every weight is 1 - beta + eps > 0.
    let h = Halfspace::new(e1(3), 0.0).unwrap();
    let data = Generator::Massart { d: 3, n: 20_000, model: model(3, 0.0, 0.0) }.generate(1, &lim()).unwrap();
    let c = nonneg_certificate(&data, &slice, &h, &basis, 2, beta, eps, 0.0, 50, &lim()).unwrap();
    assert!(c.pass && c.min_eigenvalue.unwrap() >= 0.0);

    let massart = (0..20u64)
        .filter(|&s| {
            let data = Generator::Massart { d: 3, n: 100_000, model: model(3, 0.0, eta) }.generate(400 + s, &lim()).unwrap();
            nonneg_certificate(&data, &slice, &h, &basis, 2, beta, eps, 0.05, 50, &lim()).unwrap().pass
        })
        .count();
    assert!(massart >= 19, "{massart}/20");

    let excess = (0..20u64)
        .filter(|&s| {
            let g = Generator::NoiseExcess { d: 3, n: 100_000, model: model(3, 0.0, eta), slice: Interval { lo: slice.lo, hi: slice.hi }, excess: 0.15 };
            let data = g.generate(500 + s, &lim()).unwrap();
            !nonneg_certificate(&data, &slice, &h, &basis, 0, beta, eps, 0.0, 50, &lim()).unwrap().pass
        })
        .count();
    assert!(excess >= 19, "{excess}/20");
}

#[test]
fn projected_gaussian_is_standard() {
    let w = Halfspace::new(sample_gaussian(5, 1, 3), 0.0).unwrap().v;
    let u = orthobasis(&w).unwrap();
    let x = sample_gaussian(5, 100_000, 4);
    let mut cov = [[0.0f64; 4]; 4];
    for row in x.chunks_exact(5) {
        let z: Vec<f64> = (0..4).map(|j| u.column(j).iter().zip(row).map(|(a, b)| a * b).sum()).collect();
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += z[i] * z[j] / 1e5;
            }
        }
    }
    for (i, row) in cov.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 0.03, "cov[{i}][{j}] = {c}");
        }
    }
}

fn desk_params(d: usize) -> TesterParams {
    let o = Overrides { l: Some(2), n: Some(100_000), delta_slice: Some(0.25), tau_p: Some(0.02), tau_m: Some(0.05), psd_tol: Some(0.05), ..Default::default() };
    schedule(0.05, 0.1, 0.2, 0.3, d, &o, &lim()).unwrap()
}

#[test]
fn tester_is_deterministic_and_reports_every_slice() {
    let p = desk_params(3);
    let target = Halfspace::new(vec![0.6, 0.0, 0.8], 0.3).unwrap();
    let g = Generator::Massart { d: 3, n: p.n, model: MassartModel::constant(target, 0.2) };
    let a = g.generate(1, &lim()).unwrap();
    let b = g.generate(2, &lim()).unwrap();
    let r1 = run_tester(&OracleLearner, &a, &b, &p, &lim()).unwrap();
    let r2 = run_tester(&OracleLearner, &a, &b, &p, &lim()).unwrap();
    assert_eq!(serde_json::to_vec(&r1).unwrap(), serde_json::to_vec(&r2).unwrap());
    assert_eq!(r1.per_slice.len(), build_slices(0.05, 0.25, 1.0).unwrap().len());
    assert!(r1.per_slice.windows(2).all(|w| w[0].slice.index + 1 == w[1].slice.index));
}

#[test]
fn tester_rotation_invariance() {
    let p = desk_params(3);
    let target = Halfspace::new(vec![1.0, 2.0, -1.0], -0.2).unwrap();
    let g = Generator::Massart { d: 3, n: p.n, model: MassartModel::constant(target, 0.2) };
    let a = g.generate(5, &lim()).unwrap();
    let b = g.generate(6, &lim()).unwrap();
    let q = random_orthogonal(3, 7);
    let r = run_tester(&OracleLearner, &a, &b, &p, &lim()).unwrap();
    let rr = run_tester(&OracleLearner, &a.rotated(&q).unwrap(), &b.rotated(&q).unwrap(), &p, &lim()).unwrap();
    assert_eq!(r.verdict, rr.verdict);
    assert!((r.empirical_error - rr.empirical_error).abs() < 1e-12);
    for (s, t) in r.per_slice.iter().zip(&rr.per_slice) {
        assert_eq!(s.count, t.count);
        if let (Some(x), Some(y)) = (s.min_eigenvalue, t.min_eigenvalue) {
            assert!((x - y).abs() < 1e-6, "slice {}: {x} vs {y}", s.slice.index);
        }
    }
}

#[test]
fn learner_failure_is_not_a_verdict() {
    let p = desk_params(3);
    let g = Generator::Massart { d: 3, n: 50, model: model(3, 0.0, 0.1) };
    let a = g.generate(1, &lim()).unwrap();
    let err = run_tester(&ChowSweep { gamma: 0.3 }, &a, &a, &p, &lim()).unwrap_err();
    assert!(matches!(err, TesterError::Learner(_)), "{err}");
}
