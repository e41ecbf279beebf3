//! Acceptance suite: one pass/fail line per criterion at the default run
//! settings (seed 42, 13-axis grid, R = 100, N = 10⁵, z = 4).
//!
//! Criterion 9 drives the `ontic` binary: `verify --seed 42` twice, then
//! with one worker and with eight, comparing stdout and the JSON report
//! byte for byte.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ontic_harness::acceptance::{self, CriterionResult};
use ontic_harness::config::RunConfig;
use ontic_harness::HarnessError;

struct Outcome {
    result: CriterionResult,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.result.passed && self.budget.is_none_or(|b| self.elapsed <= b)
    }
}

fn timed(
    budget: Option<Duration>,
    f: impl FnOnce() -> Result<CriterionResult, HarnessError>,
) -> Outcome {
    let start = Instant::now();
    let result = f().expect("criterion ran");
    Outcome {
        result,
        elapsed: start.elapsed(),
        budget,
    }
}

fn verify_run(out: &Path, workers: &str) -> (Vec<u8>, Vec<u8>, Option<i32>) {
    let output = Command::new(env!("CARGO_BIN_EXE_ontic"))
        .args(["verify", "--seed", "42", "--workers", workers, "--out"])
        .arg(out)
        .output()
        .expect("ontic runs");
    let json = std::fs::read(out.join("verify.json")).unwrap_or_default();
    (output.stdout, json, output.status.code())
}

fn binary_determinism() -> CriterionResult {
    let dir = tempfile::tempdir().expect("temp dir");
    let a = verify_run(&dir.path().join("a"), "1");
    let b = verify_run(&dir.path().join("b"), "1");
    let c = verify_run(&dir.path().join("c"), "8");
    let repeat = a == b;
    let workers = a == c;
    let exit_ok = a.2 == Some(0);
    CriterionResult {
        id: 9,
        name: "Determinism".into(),
        passed: repeat && workers && exit_ok && !a.1.is_empty(),
        details: vec![
            format!("verify exit code {:?}, report {} bytes", a.2, a.1.len()),
            format!("second run identical: {repeat}; --workers 1 vs 8 identical: {workers}"),
        ],
    }
}

fn main() -> ExitCode {
    let config = RunConfig::default();
    assert_eq!(
        (config.seed, config.trials, config.resolution, config.z),
        (42, 100_000, 100, 4.0)
    );
    let resolved = config.resolve().expect("default config resolves");
    assert_eq!(resolved.grid.len(), 13);
    assert_eq!(resolved.resolution.quantization_bound(), 1.0 / 200.0);

    let second = Duration::from_secs(1);
    let outcomes = [
        timed(Some(Duration::from_secs(60)), || {
            acceptance::born_reproduction(&config, &resolved)
        }),
        timed(None, || {
            acceptance::trivial_probabilities(&config, &resolved)
        }),
        timed(None, || acceptance::repeatability(&config, &resolved)),
        timed(None, || acceptance::sequential_chain(&config, &resolved)),
        timed(Some(second), || Ok(acceptance::dp_table())),
        timed(Some(second), acceptance::pd_rules),
        timed(Some(Duration::from_secs(10)), || {
            acceptance::ppp_structure(&config, &resolved)
        }),
        timed(None, || acceptance::onticity(&config, &resolved)),
        timed(None, || Ok(binary_determinism())),
    ];

    let mut failed = 0;
    for o in &outcomes {
        let budget = match o.budget {
            Some(b) => format!(" (budget {:.0?})", b),
            None => String::new(),
        };
        println!(
            "criterion {} {}: {} in {:.2?}{budget}",
            o.result.id,
            if o.passed() { "PASS" } else { "FAIL" },
            o.result.name,
            o.elapsed
        );
        for d in &o.result.details {
            println!("    {d}");
        }
        if !o.passed() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
