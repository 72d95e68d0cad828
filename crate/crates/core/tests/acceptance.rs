//! Prints one PASS/FAIL line per acceptance criterion.
//!
//! `ACCEPTANCE_ONLY=4,7` restricts the run, `ACCEPTANCE_OUT=dir` writes each
//! report as `criterion-<id>.json`, and `ACCEPTANCE_STRICT=1` exits nonzero
//! when any criterion fails.

use massart_core::acceptance::{Suite, SuiteConfig, CRITERIA};

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let out = std::env::var_os("ACCEPTANCE_OUT").map(std::path::PathBuf::from);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).expect("create ACCEPTANCE_OUT");
    }

    let suite = Suite::new(SuiteConfig::default());
    println!("acceptance: seed {} trials {} profile {}", suite.cfg.seed, suite.cfg.trials, suite.cfg.profile);
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| only.as_ref().is_none_or(|o| o.contains(&c.id))) {
        let r = suite.run(c.id);
        println!("{}  [{:.1}s]", r.line(), r.seconds);
        if let Some(dir) = &out {
            std::fs::write(dir.join(format!("criterion-{}.json", c.id)), r.report_bytes()).expect("write report");
        }
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {failed} failing");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
