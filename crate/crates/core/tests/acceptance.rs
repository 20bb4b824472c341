//! Acceptance suite: one line per criterion, then a single assertion that
//! every criterion passed. Run with `--nocapture` to see the report.

use conjchan::montecarlo::{estimate_mi, McConfig};
use conjchan::verify::{self, CheckResult, MC_CASES};
use conjchan::{build_scheme, LogBase};

const TOL_BITS: f64 = 1e-9;
const MC_SAMPLES: usize = 200_000;
const MC_SEED: u64 = 0x5eed_0007;

struct Criterion {
    label: &'static str,
    checks: Vec<CheckResult>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn report(&self) {
        println!(
            "{} {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.label
        );
        for c in &self.checks {
            println!("    {c}");
        }
    }
}

fn deterministic_across_threads() -> CheckResult {
    let mut mismatches = Vec::new();
    for &(id, n, g) in &MC_CASES {
        let spec = build_scheme(id, n, g, None).unwrap();
        let config = McConfig::new(MC_SAMPLES, MC_SEED);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_mi(&spec, config, LogBase::Bits).unwrap())
        };
        let one = run(1);
        if one != run(1) || one != run(4) {
            mismatches.push(id.as_str());
        }
    }
    CheckResult {
        name: "mc_deterministic".into(),
        passed: mismatches.is_empty(),
        observed: mismatches.len() as f64,
        expected: 0.0,
        detail: format!("repeated runs and 1 vs 4 threads; mismatches: {mismatches:?}"),
    }
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            label: "1 engine equals closed form on the n and g grids (1e-9 bits)",
            checks: vec![verify::engine_vs_formula(TOL_BITS)],
        },
        Criterion {
            label: "2 gain invariance (1e-9 bits) and strict decrease in g",
            checks: verify::gain_dependence(TOL_BITS),
        },
        Criterion {
            label: "3 crossings at n=2 and n=4 (1e-6)",
            checks: verify::crossings(),
        },
        Criterion {
            label: "4 high-gain limits at g=1e6 (1e-3 bits), squeezed single use at n=1 is 0.87066 (1e-4)",
            checks: verify::high_gain_limits(),
        },
        Criterion {
            label: "5 optimizer matches closed-form variances (1e-6 rel), conjugate EPR optimum",
            checks: verify::optimizer_agreement(),
        },
        Criterion {
            label: "6 unity-gain equivalences (1e-9 bits)",
            checks: verify::equivalences(TOL_BITS),
        },
        Criterion {
            label: "7 sampling oracle within 3 SE, SE <= 0.02 bits, deterministic",
            checks: {
                let mut c = verify::monte_carlo(MC_SAMPLES, MC_SEED);
                c.push(deterministic_across_threads());
                c
            },
        },
        Criterion {
            label: "8 threshold curve: 4/(2g-1), constants {4,2,1} within 5%, none at g=1",
            checks: verify::thresholds(),
        },
        Criterion {
            label: "9 random sequences physical, S Omega S^T = Omega (1e-10)",
            checks: verify::physicality(1_000, MC_SEED, conjchan::gaussian::COMMUTATOR),
        },
    ];
    for c in &criteria {
        c.report();
    }
    let failed: Vec<&str> = criteria
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.label)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
