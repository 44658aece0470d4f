//! Experiment configuration, scenarios and output.
//!
//! [`run`] executes one configured scenario, writes its CSV files and a
//! `summary.json` to the output directory, and reports pass/fail against the
//! configured thresholds.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod selftest;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{validate, Diagnostic, ExperimentConfig, Scenario, Severity};

use crate::dynamics::Scheme;
use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "UNDULANT_THREADS";

/// One thresholded quantity of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub condition: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!("<= {bound:e}"),
            passed: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!(">= {bound:e}"),
            passed: value >= bound,
        }
    }

    pub fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!("{target} +/- {tolerance}"),
            passed: (value - target).abs() <= tolerance,
        }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self {
            name: name.into(),
            value: if passed { 1.0 } else { 0.0 },
            condition: "holds".into(),
            passed,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:e} ({})", self.name, self.value, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitReport {
    pub scenario: Scenario,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub summary: Value,
    pub summary_path: PathBuf,
}

impl ExitReport {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Worker threads: `UNDULANT_THREADS` if set and positive, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on up to [`worker_count`] threads; results keep input order.
pub fn fan_out<I: Sync, O: Send>(items: &[I], f: impl Fn(&I) -> O + Sync) -> Vec<O> {
    let workers = worker_count().min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<O>>> = Mutex::new(items.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let out = f(&items[k]);
                slots.lock().expect("no worker panicked")[k] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|o| o.expect("every item processed"))
        .collect()
}

/// Validates, runs the scenario and writes its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<ExitReport> {
    let diagnostics = validate(cfg);
    if let Some(d) = diagnostics.iter().find(|d| d.severity == Severity::Error) {
        return Err(Error::Config {
            path: d.path.clone(),
            message: d.message.clone(),
        });
    }
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let outcome = match cfg.scenario {
        Scenario::OperatorSelftest => scenarios::operator_selftest(cfg, dir),
        Scenario::PulseSpeed => scenarios::pulse_speed(cfg, dir),
        Scenario::Symmetrization => scenarios::symmetrization(cfg, dir),
        Scenario::EffectiveComparison => scenarios::effective_comparison(cfg, dir),
    }?;
    let passed = outcome.checks.iter().all(|c| c.passed);
    let warnings: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
    let summary = json!({
        "scenario": cfg.scenario.name(),
        "seed": cfg.seed,
        "passed": passed,
        "checks": outcome.checks,
        "results": outcome.results,
        "files": outcome.files,
        "warnings": warnings,
        "config": cfg,
    });
    let summary_path = dir.join("summary.json");
    output::write_json(&summary_path, &summary)?;
    Ok(ExitReport {
        scenario: cfg.scenario,
        passed,
        checks: outcome.checks,
        summary,
        summary_path,
    })
}

/// The quick built-in suite behind `undulant selftest`: operator invariants,
/// envelope checker soundness and the observed orders of both schemes.
pub fn builtin_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut checks = selftest::operator_suite(seed, 5, 20, 1e-12)?.checks();
    checks.extend(selftest::envelope_soundness());
    let dts = [0.04, 0.02, 0.01, 0.005];
    for (scheme, target, tol) in [(Scheme::ImexEuler, 1.0, 0.1), (Scheme::ImexCn, 2.0, 0.2)] {
        let r = selftest::convergence_study(scheme, &dts)?;
        let name = match scheme {
            Scheme::ImexEuler => "order_imex_euler",
            Scheme::ImexCn => "order_imex_cn",
        };
        checks.push(Check::within(name, r.observed_order(), target, tol));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_out_keeps_order() {
        let items: Vec<u64> = (0..37).collect();
        let out = fan_out(&items, |&k| k * k);
        assert_eq!(out, items.iter().map(|k| k * k).collect::<Vec<_>>());
        assert!(fan_out(&[] as &[u64], |&k| k).is_empty());
    }

    #[test]
    fn check_constructors() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_least("b", 0.5, 1.0).passed);
        assert!(Check::within("c", 2.3, 2.0, 0.4).passed);
        assert!(!Check::within("c", 2.5, 2.0, 0.4).passed);
        assert_eq!(Check::flag("d", true).to_string(), "PASS d: 1e0 (holds)");
    }
}
