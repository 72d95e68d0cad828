use massart_core::data::*;
use massart_core::learner::*;
use massart_core::special::normal_quantile;
use massart_core::tester::Overrides;
use massart_core::tester::Verdict;
use massart_core::Limits;

fn lim() -> Limits {
    Limits::default()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

#[test]
fn oracle_returns_the_plant() {
    let target = Halfspace::new(vec![3.0, 4.0], 0.25).unwrap();
    let data = Generator::Massart { d: 2, n: 10, model: MassartModel::constant(target.clone(), 0.1) }.generate(1, &lim()).unwrap();
    assert_eq!(OracleLearner.learn(&data).unwrap(), target);
    assert!(bias_of(&target) >= 0.3);
}

#[test]
fn chow_recovers_a_noiseless_direction() {
    let v = Halfspace::new(sample_gaussian(4, 1, 42), 0.0).unwrap();
    let data = Generator::Massart { d: 4, n: 100_000, model: MassartModel::constant(v.clone(), 0.0) }.generate(2, &lim()).unwrap();
    let h = ChowSweep { gamma: 0.5 }.learn(&data).unwrap();
    assert!(angle(&h.v, &v.v) <= 0.05, "angle {}", angle(&h.v, &v.v));
    assert!(data.error_of(&h) <= 0.02);
}

#[test]
fn chow_excess_under_massart_noise() {
    let v = Halfspace::new(sample_gaussian(4, 1, 43), 0.0).unwrap();
    let data = Generator::Massart { d: 4, n: 100_000, model: MassartModel::constant(v, 0.2) }.generate(3, &lim()).unwrap();
    let h = ChowSweep { gamma: 0.5 }.learn(&data).unwrap();
    let opt = opt_error_bruteforce(&data, 0.5, 1000, 4).unwrap();
    assert!(data.error_of(&h) - opt <= 0.05, "{} vs {opt}", data.error_of(&h));
}

#[test]
fn chow_degenerate_inputs() {
    let target = Halfspace::new(vec![1.0, 0.0, 0.0], 0.0).unwrap();
    let small = Generator::Massart { d: 3, n: 99, model: MassartModel::constant(target.clone(), 0.0) }.generate(1, &lim()).unwrap();
    assert!(matches!(ChowSweep { gamma: 0.5 }.learn(&small), Err(LearnerError::Degenerate(_))));
    // All labels +1 at gamma = 1/2: the sweep is held to the origin cell.
    let mut plus = Generator::Massart { d: 3, n: 1000, model: MassartModel::constant(target, 0.0) }.generate(2, &lim()).unwrap();
    plus.y.iter_mut().for_each(|y| *y = 1);
    match (ChowSweep { gamma: 0.5 }).learn(&plus) {
        Ok(h) => {
            assert_eq!(h.t, 0.0);
            let half = plus.rows().filter(|r| h.classify(r) == -1).count() as f64 / 1000.0;
            assert!((plus.error_of(&h) - half).abs() < 1e-12);
        }
        Err(e) => assert!(matches!(e, LearnerError::Degenerate(_)), "{e}"),
    }
}

#[test]
fn spec_rejects_unknown_keys() {
    let s: LearnerSpec = serde_json::from_str(r#"{"kind":"chow_sweep","gamma":0.3,"epsilon_prime":0.0,"config":{"nope":1}}"#).unwrap();
    assert!(s.build().is_err());
    assert!(serde_json::from_str::<LearnerSpec>(r#"{"kind":"chow_sweep","gamma":0.3,"epsilon_prime":0.0,"extra":1}"#).is_err());
}

#[test]
fn external_learner_reads_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, r#"{"v":[0.0,1.0],"t":0.5}"#).unwrap();
    let mut cfg = serde_json::Map::new();
    cfg.insert("path".into(), serde_json::Value::String(path.display().to_string()));
    let spec = LearnerSpec { kind: LearnerKind::External, gamma: 0.3, epsilon_prime: 0.0, config: cfg };
    let data = Generator::Massart { d: 2, n: 10, model: MassartModel::constant(Halfspace::new(vec![1.0, 0.0], 0.0).unwrap(), 0.0) }.generate(1, &lim()).unwrap();
    assert_eq!(spec.build().unwrap().learn(&data).unwrap(), Halfspace { v: vec![0.0, 1.0], t: 0.5 });
}

fn desk(eps: f64) -> BiasAgnosticConfig {
    BiasAgnosticConfig {
        epsilon: eps,
        delta: 0.1,
        eta: 0.1,
        overrides: Overrides { l: Some(2), n: Some(100_000), delta_slice: Some(0.25), tau_p: Some(0.02), tau_m: Some(0.1), psd_tol: Some(eps), min_count: Some(2000), ..Default::default() },
        learner: LearnerSpec::oracle(0.5),
        max_iterations: 40,
    }
}

#[test]
fn half_bias_stops_after_two_acceptances() {
    let target = Halfspace::new(sample_gaussian(4, 1, 5), 0.0).unwrap();
    let src = GeneratorSource { generator: Generator::Massart { d: 4, n: 1, model: MassartModel::constant(target, 0.1) }, seed: 9, limits: lim() };
    let out = bias_agnostic(&src, &desk(0.1), &lim()).unwrap();
    assert_eq!(out.termination, Termination::StopRule, "{:?}", out.trace);
    assert_eq!(out.trace.len(), 2, "{:?}", out.trace);
    assert_eq!(out.trace[0].gamma, 1.0);
    assert_eq!(out.trace[0].gamma_effective, 0.5);
    assert!(out.trace.iter().all(|e| e.verdict == Verdict::Accept));
    assert!(out.validation_size >= (8.0f64 / 0.01).ceil() as usize);
}

#[test]
fn quarter_bias_trace_halves() {
    let target = Halfspace { v: Halfspace::new(sample_gaussian(4, 1, 6), 0.0).unwrap().v, t: -normal_quantile(0.25) };
    let src = GeneratorSource { generator: Generator::Massart { d: 4, n: 1, model: MassartModel::constant(target, 0.1) }, seed: 10, limits: lim() };
    let out = bias_agnostic(&src, &desk(0.1), &lim()).unwrap();
    assert!(out.trace.windows(2).all(|w| w[1].gamma == w[0].gamma / 2.0));
    assert!(out.trace.iter().filter(|e| e.verdict == Verdict::Accept).count() >= 2);
}
