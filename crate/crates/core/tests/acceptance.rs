//! Acceptance run: one PASS/FAIL line per criterion, each with its runtime against the
//! allowed budget. Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ffdioph::suites::{run_suite, SuiteConfig, SuiteReport};

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    runs: Vec<(&'static str, SuiteConfig)>,
}

fn cfg() -> SuiteConfig {
    SuiteConfig::default()
}

fn criteria() -> Vec<Criterion> {
    let secs = Duration::from_secs;
    vec![
        Criterion { id: 1, title: "phi-sum identity, q in {2,3,4}, l <= 5", budget: secs(30), runs: vec![("phi-sum", cfg())] },
        Criterion { id: 2, title: "phi*D1 bounds, q in {2,3,4}, l <= 5", budget: secs(60), runs: vec![("d1", cfg())] },
        Criterion {
            id: 3,
            title: "product of minima = covolume on 200 lattices per (q,d); lambda_1 vs brute force",
            budget: secs(120),
            runs: vec![("minkowski", cfg())],
        },
        Criterion {
            id: 4,
            title: "point-count formula = brute force on 100 lattices, radii q^-2..q^2",
            budget: secs(120),
            runs: vec![("counting", cfg())],
        },
        Criterion {
            id: 5,
            title: "covering radii q^2 e = lambda_d; invariance under 50x20 isometries",
            budget: secs(60),
            runs: vec![("covering", cfg())],
        },
        Criterion {
            id: 6,
            title: "Farey lattice covolume and lambda_1 = r(u), deg b <= 4, d <= 3, q in {2,3}",
            budget: secs(120),
            runs: vec![("farey", cfg())],
        },
        Criterion {
            id: 7,
            title: "best-approximation laws on all rational theta, deg <= 4, d <= 2, q = 2",
            budget: secs(120),
            runs: vec![("best-approx", cfg())],
        },
        Criterion { id: 8, title: "fiber counts (q-1)q^k, k <= 3", budget: secs(30), runs: vec![("fiber", cfg())] },
        Criterion {
            id: 9,
            title: "upper-structure child sums and contraction at s = upper_bound",
            budget: secs(300),
            runs: vec![("upper", cfg())],
        },
        Criterion {
            id: 10,
            title: "lower-structure windows, nesting and separation (q=2, d=2, eps=1/4, N=1)",
            budget: secs(300),
            runs: vec![("lower", cfg())],
        },
        Criterion {
            id: 11,
            title: "X_n, degree-sum, shell and F_N-sum counting bounds",
            budget: secs(600),
            runs: vec![("counting-bounds", cfg())],
        },
        Criterion {
            id: 12,
            title: "DI certificate (q=2, d=2, eps=1/4, N=1, 4 steps): di_test and byte-identical replay",
            budget: secs(300),
            runs: vec![("certificate", SuiteConfig { steps: Some(4), ..cfg() })],
        },
        Criterion {
            id: 13,
            title: "bound formulas: documented values, limit at 2^-20, region edges",
            budget: secs(1),
            runs: vec![("bounds", cfg())],
        },
    ]
}

fn failures(report: &SuiteReport) -> Vec<String> {
    report
        .results
        .iter()
        .filter(|c| !c.pass)
        .map(|c| match &c.error {
            Some(e) => format!("{}: error {e}", c.name),
            None => format!("{}: {}", c.name, c.detail),
        })
        .collect()
}

fn main() -> ExitCode {
    let mut failed = 0;
    for c in criteria() {
        let start = Instant::now();
        let mut cases = 0;
        let mut problems = Vec::new();
        for (suite, config) in &c.runs {
            match run_suite(suite, config) {
                Ok(report) => {
                    cases += report.cases;
                    problems.extend(failures(&report));
                }
                Err(e) => problems.push(format!("{suite}: {e}")),
            }
        }
        let elapsed = start.elapsed();
        if elapsed > c.budget {
            problems.push(format!("runtime {:.2?} exceeds {:?}", elapsed, c.budget));
        }
        let verdict = if problems.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2}: {} [{cases} cases, {:.2?} of {:?}]",
            c.id, c.title, elapsed, c.budget
        );
        for p in &problems {
            println!("       {p}");
        }
        if !problems.is_empty() {
            failed += 1;
        }
    }
    println!("acceptance: {} of 13 criteria pass", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
