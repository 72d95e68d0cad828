//! `massart`: builds sandwich pairs, runs tester experiments and the
//! acceptance battery, and writes JSON and CSV reports.
//!
//! Exit codes: 0 on success or a majority of accepts, 1 on a failed check
//! or a rejecting majority, 2 on usage and configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use massart_core::acceptance::{Suite, SuiteConfig, CRITERIA};
use massart_core::data::{read_binary, write_binary, write_csv, Generator};
use massart_core::experiment::{aggregate, BiasAgnosticExperiment, TesterExperiment};
use massart_core::learner::{BiasAgnosticConfig, LearnerSpec, Termination};
use massart_core::sandwich::{build_sandwich, profile, SandwichConstants, SandwichPair, VerificationReport, VerifyOptions, DEFAULT_PROFILE};
use massart_core::scalar::Scalar;
use massart_core::tester::{Overrides, Verdict};
use massart_core::Limits;

#[derive(Parser)]
#[command(name = "massart", version, about = "Tester-learner for Massart halfspaces and sandwiching polynomials")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and verify sandwich pairs for a list of (t, alpha) cells.
    Sandwich(Common),
    /// Seeded tester trials.
    Tester(Common),
    /// The acceptance battery.
    Suite {
        #[command(flatten)]
        common: Common,
        /// List the criteria without running them.
        #[arg(long)]
        list: bool,
    },
    /// The unknown-bias wrapper.
    BiasAgnostic(Common),
    #[command(subcommand)]
    Dataset(DatasetCmd),
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Sample a dataset and write it in the binary format.
    Generate(Common),
    /// Convert a binary dataset to CSV.
    Export {
        /// Binary dataset with its `.json` sidecar next to it.
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Keys every command accepts.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Global {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cell {
    t: f64,
    alpha: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SandwichConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(default = "default_cells")]
    cells: Vec<Cell>,
    #[serde(default = "default_profile")]
    profile: String,
    /// Explicit constants; replace the profile when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constants: Option<SandwichConstants>,
    #[serde(default)]
    verify: VerifyOptions,
    #[serde(default = "default_plot_points")]
    plot_points: usize,
    #[serde(default)]
    limits: Limits,
}

fn default_cells() -> Vec<Cell> {
    vec![Cell { t: 0.0, alpha: 0.4 }]
}

fn default_profile() -> String {
    DEFAULT_PROFILE.to_string()
}

fn default_plot_points() -> usize {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TesterConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    generator: Generator,
    learner: LearnerSpec,
    epsilon: f64,
    delta: f64,
    eta: f64,
    gamma: f64,
    #[serde(default)]
    overrides: Overrides,
    #[serde(default = "default_opt_dirs")]
    opt_dirs: usize,
    #[serde(default)]
    limits: Limits,
}

fn default_opt_dirs() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasAgnosticCliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    generator: Generator,
    config: BiasAgnosticConfig,
    #[serde(default = "default_eval_n")]
    eval_n: usize,
    #[serde(default = "default_opt_dirs")]
    opt_dirs: usize,
    #[serde(default)]
    limits: Limits,
}

fn default_eval_n() -> usize {
    20_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteCliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(default = "default_profile")]
    profile: String,
    #[serde(default)]
    completeness_overrides: Overrides,
    #[serde(default)]
    limits: Limits,
    /// Criteria to run; all when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    only: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    generator: Generator,
    /// Also write `dataset.csv`.
    #[serde(default)]
    csv: bool,
    #[serde(default)]
    limits: Limits,
}

/// Usage and configuration problems, reported with exit code 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn load<T: DeserializeOwned>(path: Option<&Path>, empty: &str) -> Result<T> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| config_err(format!("reading {}: {e}", p.display())))?,
        None if empty.is_empty() => return Err(config_err("this command needs --config")),
        None => empty.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| config_err(format!("invalid config: {e}")))
}

/// Flag values win over config values.
fn resolve(g: &mut Global, c: &Common, need_seed: bool) -> Result<PathBuf> {
    if c.seed.is_some() {
        g.seed = c.seed;
    }
    if c.trials.is_some() {
        g.trials = c.trials;
    }
    if c.out.is_some() {
        g.output_dir.clone_from(&c.out);
    }
    if need_seed && g.seed.is_none() {
        return Err(config_err("this command is randomized: pass --seed or set `seed` in the config"));
    }
    if g.trials == Some(0) {
        return Err(config_err("trials must be at least 1"));
    }
    let out = g.output_dir.clone().ok_or_else(|| config_err("no output directory: pass --out or set `output_dir`"))?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn apply_precision(limits: &mut Limits, bits: Option<usize>) {
    if let Some(b) = bits {
        limits.precision_bits = b;
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

macro_rules! globals {
    ($cfg:expr) => {
        Global { seed: $cfg.seed, trials: $cfg.trials, precision_bits: $cfg.precision_bits, output_dir: $cfg.output_dir.clone() }
    };
}

macro_rules! set_globals {
    ($cfg:expr, $g:expr) => {{
        $cfg.seed = $g.seed;
        $cfg.trials = $g.trials;
        $cfg.precision_bits = $g.precision_bits;
        $cfg.output_dir = $g.output_dir.clone();
    }};
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Sandwich(c) => cmd_sandwich(&c),
        Cmd::Tester(c) => cmd_tester(&c),
        Cmd::Suite { common, list } => cmd_suite(&common, list),
        Cmd::BiasAgnostic(c) => cmd_bias_agnostic(&c),
        Cmd::Dataset(DatasetCmd::Generate(c)) => cmd_dataset_generate(&c),
        Cmd::Dataset(DatasetCmd::Export { input, out }) => cmd_dataset_export(&input, &out),
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum CellOutcome {
    Built(Box<VerificationReport>),
    Failed { t: f64, alpha: f64, error: String, pass: bool },
}

/// `x, h, p_minus, p_plus` over `[t - 3B, t + 3B]`.
fn plot_csv(pair: &SandwichPair, points: usize) -> String {
    let t = pair.threshold;
    let r = 3.0 * pair.params.b;
    let mut s = String::from("x,h,p_minus,p_plus\n");
    let rows: Vec<String> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = if points == 1 { t } else { t - r + 2.0 * r * i as f64 / (points - 1) as f64 };
            let sx = Scalar::from_f64(x, pair.precision);
            let h = if x >= t { 1 } else { 0 };
            format!("{x},{h},{},{}\n", pair.p_minus.eval(&sx).to_f64(), pair.p_plus.eval(&sx).to_f64())
        })
        .collect();
    rows.iter().for_each(|r| s.push_str(r));
    s
}

fn cmd_sandwich(c: &Common) -> Result<u8> {
    let mut cfg: SandwichConfig = load(c.config.as_deref(), "{}")?;
    let mut g = globals!(cfg);
    let out = resolve(&mut g, c, false)?;
    set_globals!(cfg, g);
    apply_precision(&mut cfg.limits, cfg.precision_bits);
    let consts = match cfg.constants {
        Some(k) => k,
        None => profile(&cfg.profile).map_err(|e| config_err(e.to_string()))?,
    };
    if cfg.cells.is_empty() {
        return Err(config_err("no cells given"));
    }
    write_json(&out.join("resolved-config.json"), &cfg)?;

    let outcomes: Vec<(CellOutcome, Option<String>)> = cfg
        .cells
        .iter()
        .map(|cell| match build_sandwich(cell.t, cell.alpha, &consts, &cfg.limits) {
            Ok(pair) => {
                let report = massart_core::sandwich::verify_pair(&pair, &cfg.verify);
                (CellOutcome::Built(Box::new(report)), Some(plot_csv(&pair, cfg.plot_points)))
            }
            Err(e) => (CellOutcome::Failed { t: cell.t, alpha: cell.alpha, error: e.to_string(), pass: false }, None),
        })
        .collect();

    let mut table = Vec::new();
    let mut all = true;
    for (i, (o, csv)) in outcomes.iter().enumerate() {
        let stem = format!("cell-{i:02}");
        write_json(&out.join(format!("{stem}.json")), o)?;
        if let Some(csv) = csv {
            std::fs::write(out.join(format!("{stem}.csv")), csv)?;
        }
        let row = match o {
            CellOutcome::Built(r) => {
                all &= r.pass;
                println!(
                    "{stem} t={} alpha={} m={} k={} degree={} gap_ratio={:.4e} max_violation={:.3e} pass={}",
                    r.t, r.alpha, r.m, r.k, r.degree, r.gap_ratio, r.max_violation, r.pass
                );
                serde_json::json!({ "cell": stem, "t": r.t, "alpha": r.alpha, "m": r.m, "k": r.k, "degree": r.degree, "gap_ratio": r.gap_ratio, "pointwise_pass": r.pointwise_pass, "gap_pass": r.gap_pass, "pass": r.pass })
            }
            CellOutcome::Failed { t, alpha, error, .. } => {
                all = false;
                println!("{stem} t={t} alpha={alpha} error: {error}");
                serde_json::json!({ "cell": stem, "t": t, "alpha": alpha, "error": error, "pass": false })
            }
        };
        table.push(row);
    }
    write_json(&out.join("summary.json"), &serde_json::json!({ "constants": consts, "cells": table, "pass": all }))?;
    Ok(if all { 0 } else { 1 })
}

fn cmd_tester(c: &Common) -> Result<u8> {
    let mut cfg: TesterConfig = load(c.config.as_deref(), "")?;
    let mut g = globals!(cfg);
    let out = resolve(&mut g, c, true)?;
    set_globals!(cfg, g);
    cfg.trials.get_or_insert(1);
    apply_precision(&mut cfg.limits, cfg.precision_bits);
    let exp = TesterExperiment {
        generator: cfg.generator.clone(),
        learner: cfg.learner.clone(),
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        eta: cfg.eta,
        gamma: cfg.gamma,
        overrides: cfg.overrides.clone(),
        opt_dirs: cfg.opt_dirs,
    };
    let params = exp.params(&cfg.limits).map_err(|e| config_err(e.to_string()))?;
    write_json(&out.join("resolved-config.json"), &cfg)?;
    write_json(&out.join("params.json"), &params)?;
    let trials = exp.run(cfg.trials.unwrap_or(1), cfg.seed.expect("resolved"), &cfg.limits)?;
    for t in &trials {
        write_json(&out.join(format!("trial-{:03}.json", t.trial)), &t.report)?;
    }
    let agg = aggregate(&trials);
    write_json(&out.join("aggregate.json"), &agg)?;
    println!(
        "accepted {}/{} mean_error={} opt_ref={} excess={} rejects={:?}",
        agg.accepted,
        agg.trials,
        fmt_opt(agg.mean_error),
        fmt_opt(agg.opt_ref),
        fmt_opt(agg.excess),
        agg.reject_kinds
    );
    let accepts = trials.iter().filter(|t| t.report.verdict == Verdict::Accept).count();
    Ok(if 2 * accepts > trials.len() { 0 } else { 1 })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.4}"))
}

fn cmd_suite(c: &Common, list: bool) -> Result<u8> {
    if list {
        for k in &CRITERIA {
            println!("{:>2} {:<22} {}", k.id, k.name, k.description);
        }
        return Ok(0);
    }
    let mut cfg: SuiteCliConfig = load(c.config.as_deref(), "{}")?;
    let defaults = SuiteConfig::default();
    cfg.seed.get_or_insert(defaults.seed);
    cfg.trials.get_or_insert(defaults.trials);
    let mut g = globals!(cfg);
    let out = resolve(&mut g, c, true)?;
    set_globals!(cfg, g);
    apply_precision(&mut cfg.limits, cfg.precision_bits);
    if let Some(bad) = cfg.only.iter().find(|i| !(1..=CRITERIA.len()).contains(i)) {
        return Err(config_err(format!("no criterion {bad}")));
    }
    write_json(&out.join("resolved-config.json"), &cfg)?;
    let suite = Suite::new(SuiteConfig {
        seed: cfg.seed.expect("resolved"),
        trials: cfg.trials.expect("resolved"),
        profile: cfg.profile.clone(),
        completeness_overrides: cfg.completeness_overrides.clone(),
        limits: cfg.limits,
    });
    let mut rows = Vec::new();
    let mut all = true;
    for k in CRITERIA.iter().filter(|k| cfg.only.is_empty() || cfg.only.contains(&k.id)) {
        let r = suite.run(k.id);
        println!("{}  [{:.1}s]", r.line(), r.seconds);
        std::fs::write(out.join(format!("criterion-{:02}.json", k.id)), r.report_bytes())?;
        all &= r.pass;
        rows.push(serde_json::json!({ "id": r.id, "name": r.name, "pass": r.pass, "summary": r.summary }));
    }
    write_json(&out.join("summary.json"), &serde_json::json!({ "criteria": rows, "pass": all }))?;
    println!("{}", if all { "suite: all criteria pass" } else { "suite: FAILED" });
    Ok(if all { 0 } else { 1 })
}

fn cmd_bias_agnostic(c: &Common) -> Result<u8> {
    let mut cfg: BiasAgnosticCliConfig = load(c.config.as_deref(), "")?;
    let mut g = globals!(cfg);
    let out = resolve(&mut g, c, true)?;
    set_globals!(cfg, g);
    cfg.trials.get_or_insert(1);
    apply_precision(&mut cfg.limits, cfg.precision_bits);
    cfg.generator.model().validate().map_err(|e| config_err(e.to_string()))?;
    write_json(&out.join("resolved-config.json"), &cfg)?;
    let exp = BiasAgnosticExperiment { generator: cfg.generator.clone(), config: cfg.config.clone(), eval_n: cfg.eval_n, opt_dirs: cfg.opt_dirs };
    let trials = exp.run(cfg.trials.unwrap_or(1), cfg.seed.expect("resolved"), &cfg.limits)?;
    let mut capped = false;
    for t in &trials {
        write_json(&out.join(format!("trial-{:03}.json", t.trial)), t)?;
        let gammas: Vec<String> = t.trace.iter().map(|e| format!("{}:{:?}", e.gamma, e.verdict)).collect();
        match &t.failure {
            Some(f) => {
                capped = true;
                println!("trial {} failed: {f}", t.trial);
            }
            None => println!(
                "trial {} error={} opt_ref={} stop={:?} trace=[{}]",
                t.trial,
                fmt_opt(t.error),
                fmt_opt(t.opt_reference),
                t.termination.unwrap_or(Termination::IterationCap),
                gammas.join(" ")
            ),
        }
    }
    let within = trials.iter().filter(|t| t.within).count();
    write_json(&out.join("aggregate.json"), &serde_json::json!({ "trials": trials.len(), "within_opt_plus_eps": within, "failures": trials.iter().filter(|t| t.failure.is_some()).count() }))?;
    if capped {
        bail!(ConfigError("the wrapper failed in at least one trial".into()));
    }
    Ok(0)
}

fn cmd_dataset_generate(c: &Common) -> Result<u8> {
    let mut cfg: DatasetConfig = load(c.config.as_deref(), "")?;
    let mut g = globals!(cfg);
    let out = resolve(&mut g, c, true)?;
    set_globals!(cfg, g);
    apply_precision(&mut cfg.limits, cfg.precision_bits);
    cfg.generator.model().validate().map_err(|e| config_err(e.to_string()))?;
    write_json(&out.join("resolved-config.json"), &cfg)?;
    let data = cfg.generator.generate(cfg.seed.expect("resolved"), &cfg.limits)?;
    write_binary(&data, &out.join("dataset.bin"))?;
    if cfg.csv {
        write_csv(&data, &out.join("dataset.csv"))?;
    }
    println!("wrote {} rows of dimension {} to {}", data.n, data.d, out.display());
    Ok(0)
}

fn cmd_dataset_export(input: &Path, out: &Path) -> Result<u8> {
    let data = read_binary(input).map_err(|e| config_err(format!("reading {}: {e}", input.display())))?;
    std::fs::create_dir_all(out)?;
    let stem = input.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
    let path = out.join(format!("{stem}.csv"));
    write_csv(&data, &path)?;
    write_json(&out.join("resolved-config.json"), &serde_json::json!({ "input": input, "output_dir": out }))?;
    println!("wrote {}", path.display());
    Ok(0)
}
