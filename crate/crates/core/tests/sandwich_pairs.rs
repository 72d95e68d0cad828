use massart_core::sandwich::*;
use massart_core::Limits;

fn opts() -> VerifyOptions {
    VerifyOptions { grid_size: 2000, ..VerifyOptions::default() }
}

#[test]
fn default_profile_dominates_at_the_origin() {
    let consts = profile(DEFAULT_PROFILE).unwrap();
    let pair = build_sandwich(0.0, 0.4, &consts, &Limits::default()).unwrap();
    let r = verify_pair(&pair, &opts());
    assert!(r.pointwise_pass, "max violation {:e}", r.max_violation);
    assert!(r.degree <= pair.degree_bound);
    // Far left of the threshold the indicator is zero and p_- sits below it.
    let x = massart_core::Scalar::from_f64(-10.0, pair.precision);
    assert!(pair.p_minus.eval(&x).to_f64() <= 0.0);
    assert!(pair.p_plus.eval(&x).to_f64() >= 0.0);
}

#[test]
fn negative_thresholds_reflect() {
    let consts = profile(DEFAULT_PROFILE).unwrap();
    let pos = verify_pair(&build_sandwich(1.0, 0.4, &consts, &Limits::default()).unwrap(), &opts());
    let neg = verify_pair(&build_sandwich(-1.0, 0.4, &consts, &Limits::default()).unwrap(), &opts());
    assert!(neg.reflected && !pos.reflected);
    assert!(neg.pointwise_pass && pos.pointwise_pass);
    assert_eq!(pos.degree, neg.degree);
}

#[test]
fn out_of_range_requests_are_errors() {
    let consts = profile(DEFAULT_PROFILE).unwrap();
    assert!(matches!(build_sandwich(0.0, 0.5, &consts, &Limits::default()), Err(SandwichError::AlphaOutOfRange(_))));
    assert!(matches!(build_sandwich(0.0, 0.0, &consts, &Limits::default()), Err(SandwichError::AlphaOutOfRange(_))));
    let tight = Limits { degree_cap: 10, ..Limits::default() };
    assert!(matches!(build_sandwich(0.0, 0.4, &consts, &tight), Err(SandwichError::DegreeCap { .. })));
    assert!(matches!(profile("nope"), Err(SandwichError::UnknownProfile(_))));
}

#[test]
fn verification_report_field_names() {
    let consts = profile(DEFAULT_PROFILE).unwrap();
    let r = verify_pair(&build_sandwich(0.5, 0.4, &consts, &Limits::default()).unwrap(), &VerifyOptions { grid_size: 200, ..VerifyOptions::default() });
    let v = serde_json::to_value(&r).unwrap();
    for key in ["t", "alpha", "m", "k", "B", "w", "delta_bump", "degree", "gap_ratio", "max_violation", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}
