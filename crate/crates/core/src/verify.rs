//! Consistency checks between the engine, the closed forms, the optimizer and
//! the sampling oracle. Each check returns a [`CheckResult`]; [`run_suite`]
//! runs all of them.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::closed_forms::{formula_mi, high_gain_limit, optimal_variance};
use crate::error::Result;
use crate::gaussian::{AmpTarget, GaussianState, SymplecticOp, COMMUTATOR};
use crate::montecarlo::{estimate_mi, McConfig};
use crate::optimize::{
    crossing_threshold, maximize_variance, threshold_curve, DEFAULT_BRACKET, DEFAULT_LOG_TOL,
    THRESHOLD_VARIANTS,
};
use crate::scalar::LogBase;
use crate::schemes::{evaluate, SchemeId};

/// Gains used by the grid checks.
pub const GAIN_GRID: [f64; 6] = [1.0, 1.5, 2.0, 5.0, 10.0, 100.0];

/// Twenty evenly spaced photon numbers in `(0, 10]`.
pub fn budget_grid() -> Vec<f64> {
    (1..=20).map(|i| 0.5 * i as f64).collect()
}

/// Scheme, budget and gain of the sampling spot checks.
pub const MC_CASES: [(SchemeId, f64, f64); 6] = [
    (SchemeId::Coh2dSingle, 1.0, 1.0),
    (SchemeId::ConjCoherent, 2.0, 5.0),
    (SchemeId::Sq1dSingle, 1.0, 2.0),
    (SchemeId::EprDisplaced, 2.0, 1.0),
    (SchemeId::EprConjugate, 0.5, 10.0),
    (SchemeId::DenseCoding, 1.0, 5.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation, or the observed value for threshold checks.
    pub observed: f64,
    /// Allowed deviation or expected value.
    pub expected: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(
        name: &str,
        passed: bool,
        observed: f64,
        expected: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.to_string(),
            passed,
            observed,
            expected,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, err: impl fmt::Display) -> Self {
        Self::new(name, false, f64::NAN, f64::NAN, format!("error: {err}"))
    }

    fn from_result(name: &str, r: Result<CheckResult>) -> Self {
        r.unwrap_or_else(|e| Self::failed(name, e))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} observed={:<12.6e} expected={:<12.6e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Bound for engine-vs-formula, gain-invariance and equivalence checks (bits).
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub physicality_trials: usize,
    /// Commutator of the symplectic form used by the physicality check.
    pub commutator: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            samples: 200_000,
            seed: 20_240_901,
            physicality_trials: 1_000,
            commutator: COMMUTATOR,
        }
    }
}

fn bits(id: SchemeId, n: f64, g: f64) -> Result<f64> {
    evaluate(id, n, g, None, LogBase::Bits)
}

fn formula_bits(id: SchemeId, n: f64, g: f64) -> Result<f64> {
    formula_mi(id, n, g, LogBase::Bits)
}

/// Largest `|engine − formula|` over every scheme on the budget and gain grids.
pub fn engine_vs_formula(tolerance: f64) -> CheckResult {
    const NAME: &str = "engine_vs_formula";
    let run = || -> Result<CheckResult> {
        let mut worst = (0.0f64, String::new());
        for id in SchemeId::ALL {
            for &n in &budget_grid() {
                for &g in &GAIN_GRID {
                    let d = (bits(id, n, g)? - formula_bits(id, n, g)?).abs();
                    if d > worst.0 || worst.1.is_empty() {
                        worst = (d, format!("worst at {id} n={n} g={g}"));
                    }
                }
            }
        }
        Ok(CheckResult::new(
            NAME,
            worst.0 <= tolerance,
            worst.0,
            tolerance,
            worst.1,
        ))
    };
    CheckResult::from_result(NAME, run())
}

/// Gain-invariant schemes are flat in `g`; the others strictly decrease.
pub fn gain_dependence(tolerance: f64) -> Vec<CheckResult> {
    let flat = || -> Result<CheckResult> {
        let mut worst = (0.0f64, String::new());
        for id in SchemeId::GAIN_INVARIANT {
            for &n in &budget_grid() {
                let values = GAIN_GRID
                    .iter()
                    .map(|&g| bits(id, n, g))
                    .collect::<Result<Vec<_>>>()?;
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi - lo > worst.0 || worst.1.is_empty() {
                    worst = (hi - lo, format!("worst spread at {id} n={n}"));
                }
            }
        }
        Ok(CheckResult::new(
            "gain_invariance",
            worst.0 <= tolerance,
            worst.0,
            tolerance,
            worst.1,
        ))
    };
    let decreasing = || -> Result<CheckResult> {
        let mut worst_step = f64::INFINITY;
        let mut detail = String::from("all strictly decreasing");
        for id in SchemeId::GAIN_VARIANT {
            for &n in &budget_grid() {
                let values = GAIN_GRID
                    .iter()
                    .map(|&g| bits(id, n, g))
                    .collect::<Result<Vec<_>>>()?;
                for (k, w) in values.windows(2).enumerate() {
                    let step = w[0] - w[1];
                    if step < worst_step {
                        worst_step = step;
                        if step <= 0.0 {
                            detail = format!("{id} n={n} not decreasing at g={}", GAIN_GRID[k + 1]);
                        }
                    }
                }
            }
        }
        Ok(CheckResult::new(
            "gain_monotone",
            worst_step > 0.0,
            worst_step,
            0.0,
            detail,
        ))
    };
    vec![
        CheckResult::from_result("gain_invariance", flat()),
        CheckResult::from_result("gain_monotone", decreasing()),
    ]
}

/// Crossings between the gain-invariant 2D alphabets at two and four photons.
pub fn crossings() -> Vec<CheckResult> {
    let bracket = DEFAULT_BRACKET;
    [
        ("crossing_epr_vs_conj", SchemeId::EprDisplaced, 2.0),
        ("crossing_coh_vs_conj", SchemeId::Coh2dDouble, 4.0),
    ]
    .into_iter()
    .map(
        |(name, a, expected)| match crossing_threshold(a, SchemeId::ConjCoherent, 1.0, bracket) {
            Ok(n) => CheckResult::new(
                name,
                (n - expected).abs() <= 1e-6,
                n,
                expected,
                format!("{a} vs conj_coh_2"),
            ),
            Err(e) => CheckResult::failed(name, e),
        },
    )
    .collect()
}

/// Formulas at `g = 10⁶` against the high-gain limits, plus one reference value.
pub fn high_gain_limits() -> Vec<CheckResult> {
    let limits = || -> Result<CheckResult> {
        let mut worst = (0.0f64, String::new());
        for id in SchemeId::GAIN_VARIANT {
            for &n in &budget_grid() {
                let d = (formula_bits(id, n, 1e6)? - high_gain_limit(id, n, LogBase::Bits)?).abs();
                if d > worst.0 || worst.1.is_empty() {
                    worst = (d, format!("worst at {id} n={n}"));
                }
            }
        }
        Ok(CheckResult::new(
            "high_gain_limit",
            worst.0 <= 1e-3,
            worst.0,
            1e-3,
            worst.1,
        ))
    };
    let spot = || -> Result<CheckResult> {
        let v = high_gain_limit(SchemeId::Sq1dSingle, 1.0f64, LogBase::Bits)?;
        Ok(CheckResult::new(
            "high_gain_squeezed_n1",
            (v - 0.87066).abs() <= 1e-4,
            v,
            0.87066,
            "1d_sq_1 at n=1, g→∞",
        ))
    };
    vec![
        CheckResult::from_result("high_gain_limit", limits()),
        CheckResult::from_result("high_gain_squeezed_n1", spot()),
    ]
}

/// Golden-section optima against the closed-form variances, and the
/// conjugate-EPR optimum `V = 1/(1+n)`.
pub fn optimizer_agreement() -> Vec<CheckResult> {
    let budgets = [0.5, 1.0, 2.0, 5.0];
    let gains = [1.0, 2.0, 10.0, 1e6];
    let variances = || -> Result<CheckResult> {
        let mut worst = (0.0f64, String::new());
        for id in [
            SchemeId::Sq1dSingle,
            SchemeId::Sq1dDouble,
            SchemeId::EprDisplaced,
            SchemeId::DenseCoding,
        ] {
            for &n in &budgets {
                for &g in &gains {
                    let found = maximize_variance(id, n, g, DEFAULT_LOG_TOL)?.argmax;
                    let want = optimal_variance(id, n, g)?;
                    let rel = (found - want).abs() / want;
                    if rel > worst.0 || worst.1.is_empty() {
                        worst = (rel, format!("worst at {id} n={n} g={g}"));
                    }
                }
            }
        }
        Ok(CheckResult::new(
            "optimizer_variance",
            worst.0 <= 1e-6,
            worst.0,
            1e-6,
            worst.1,
        ))
    };
    let conjugate = || -> Result<CheckResult> {
        let mut worst_v = 0.0f64;
        let mut worst_mi = 0.0f64;
        for &n in &budgets {
            for &g in &gains {
                let r = maximize_variance(SchemeId::EprConjugate, n, g, DEFAULT_LOG_TOL)?;
                let want_v = 1.0 / (1.0 + n);
                worst_v = worst_v.max((r.argmax - want_v).abs() / want_v);
                worst_mi =
                    worst_mi.max((r.max_mi - 2.0 * n.ln_1p() / std::f64::consts::LN_2).abs());
            }
        }
        Ok(CheckResult::new(
            "optimizer_epr_conj",
            worst_v <= 1e-6 && worst_mi <= 1e-9,
            worst_v,
            1e-6,
            format!("relative V error; max MI error {worst_mi:.3e} (bound 1e-9)"),
        ))
    };
    vec![
        CheckResult::from_result("optimizer_variance", variances()),
        CheckResult::from_result("optimizer_epr_conj", conjugate()),
    ]
}

/// At unity gain the conjugate alphabets match the individually prepared ones.
pub fn equivalences(tolerance: f64) -> Vec<CheckResult> {
    [
        (
            "equiv_coh_conj",
            SchemeId::Coh1dDouble,
            SchemeId::ConjCoherent,
        ),
        (
            "equiv_sq_epr_conj",
            SchemeId::Sq1dDouble,
            SchemeId::EprConjugate,
        ),
    ]
    .into_iter()
    .map(|(name, a, b)| {
        let run = || -> Result<CheckResult> {
            let mut worst = 0.0f64;
            for &n in &budget_grid() {
                worst = worst.max((bits(a, n, 1.0)? - bits(b, n, 1.0)?).abs());
            }
            Ok(CheckResult::new(
                name,
                worst <= tolerance,
                worst,
                tolerance,
                format!("{a} vs {b} at g=1"),
            ))
        };
        CheckResult::from_result(name, run())
    })
    .collect()
}

/// Sampling estimates within three standard errors of the closed forms.
pub fn monte_carlo(samples: usize, seed: u64) -> Vec<CheckResult> {
    MC_CASES
        .iter()
        .map(|&(id, n, g)| {
            let name = format!("mc_{id}");
            let run = || -> Result<CheckResult> {
                let spec = crate::schemes::build_scheme(id, n, g, None)?;
                let e = estimate_mi(&spec, McConfig::new(samples, seed), LogBase::Bits)?;
                let truth = formula_bits(id, n, g)?;
                let err = (e.estimate - truth).abs();
                Ok(CheckResult::new(
                    &name,
                    err <= 3.0 * e.standard_error && e.standard_error <= 0.02,
                    err,
                    3.0 * e.standard_error,
                    format!(
                        "n={n} g={g} estimate={:.5} se={:.5} truth={truth:.5}",
                        e.estimate, e.standard_error
                    ),
                ))
            };
            CheckResult::from_result(&name, run())
        })
        .collect()
}

/// Threshold curve: exact values for the coherent variant, the ordering of the
/// large-gain constants, and no threshold for the squeezed double use at `g = 1`.
pub fn thresholds() -> Vec<CheckResult> {
    let exact = || -> Result<CheckResult> {
        let grid = [2.0f64, 5.0, 10.0];
        let curve = threshold_curve(SchemeId::Coh1dDouble, &grid)?;
        let mut worst = 0.0f64;
        for (g, n) in curve.points {
            let want = 4.0 / (2.0 * g - 1.0);
            worst = worst.max(n.map_or(f64::INFINITY, |n| (n - want).abs()));
        }
        Ok(CheckResult::new(
            "threshold_coh_exact",
            worst <= 1e-6,
            worst,
            1e-6,
            "n* = 4/(2g-1) at g=2,5,10",
        ))
    };
    let constants = || -> Result<CheckResult> {
        let expected = [4.0, 2.0, 1.0];
        let mut worst = 0.0f64;
        let mut found = Vec::new();
        for (variant, want) in THRESHOLD_VARIANTS.into_iter().zip(expected) {
            let c = threshold_curve(variant, &[1e3])?
                .asymptotic_constant
                .unwrap_or(f64::NAN);
            found.push(format!("{variant}={c:.4}"));
            worst = worst.max(((c - want) / want).abs());
        }
        let worst = if worst.is_nan() { f64::INFINITY } else { worst };
        Ok(CheckResult::new(
            "threshold_constants",
            worst <= 0.05,
            worst,
            0.05,
            found.join(" "),
        ))
    };
    let none = || -> Result<CheckResult> {
        let curve = threshold_curve(SchemeId::Sq1dDouble, &[1.0])?;
        let n = curve.points[0].1;
        Ok(CheckResult::new(
            "threshold_sq_unity_none",
            n.is_none(),
            n.unwrap_or(f64::NAN),
            f64::NAN,
            "1d_sq_2 at g=1 has no threshold",
        ))
    };
    vec![
        CheckResult::from_result("threshold_coh_exact", exact()),
        CheckResult::from_result("threshold_constants", constants()),
        CheckResult::from_result("threshold_sq_unity_none", none()),
    ]
}

/// One random operation; returns the new state and the symplectic matrix
/// behind it (the dilation for amplifiers).
fn random_step(
    state: &GaussianState<f64>,
    rng: &mut ChaCha20Rng,
) -> Result<(GaussianState<f64>, SymplecticOp<f64>)> {
    let modes = state.num_modes();
    let a = rng.gen_range(0..modes);
    let b = (a + rng.gen_range(1..modes.max(2))) % modes;
    let v = 1.0 - rng.gen::<f64>();
    let two_mode = modes > 1;
    match rng.gen_range(0..6) {
        0 => {
            let (dx, dp) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let op = SymplecticOp::displacement(modes, a, dx, dp)?;
            Ok((state.apply(&op)?, op))
        }
        1 => {
            let op = SymplecticOp::squeezer(modes, a, v)?;
            Ok((state.apply(&op)?, op))
        }
        2 if two_mode => {
            let op = SymplecticOp::two_mode_squeezer(modes, a, b, v)?;
            Ok((state.apply(&op)?, op))
        }
        3 if two_mode => {
            let op = SymplecticOp::beam_splitter(modes, a, b, rng.gen::<f64>())?;
            Ok((state.apply(&op)?, op))
        }
        4 if two_mode => {
            let g = rng.gen_range(1.0..=10.0);
            let op = SymplecticOp::bogoliubov_amplifier(modes, a, b, g)?;
            Ok((state.amplify(AmpTarget::Pair(a, b), g)?, op))
        }
        _ => {
            let g = rng.gen_range(1.0..=10.0);
            let op = SymplecticOp::bogoliubov_amplifier(2, 0, 1, g)?;
            Ok((state.amplify(AmpTarget::Single(a), g)?, op))
        }
    }
}

/// Random operation sequences on vacuum stay physical, and every symplectic
/// matrix they use preserves the symplectic form.
pub fn physicality(trials: usize, seed: u64, commutator: f64) -> Vec<CheckResult> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst_eig = f64::INFINITY;
    let mut worst_defect = 0.0f64;
    let mut first_failure = String::new();
    for trial in 0..trials {
        let modes = rng.gen_range(1..=3);
        let steps = rng.gen_range(1..=6);
        let run = |rng: &mut ChaCha20Rng| -> Result<(GaussianState<f64>, f64)> {
            let mut state = GaussianState::vacuum(modes)?;
            let mut defect = 0.0f64;
            for _ in 0..steps {
                let (next, op) = random_step(&state, rng)?;
                defect = defect.max(op.symplectic_defect());
                state = next;
            }
            Ok((state, defect))
        };
        match run(&mut rng) {
            Ok((state, defect)) => {
                let report = state.check_physical_with_commutator(commutator);
                worst_eig = worst_eig.min(report.min_symplectic_eigenvalue);
                worst_defect = worst_defect.max(defect);
                if !report.passed {
                    failures += 1;
                    if first_failure.is_empty() {
                        first_failure = format!(
                            "; first failure at trial {trial}: min symplectic eigenvalue {:.6}",
                            report.min_symplectic_eigenvalue
                        );
                    }
                }
            }
            Err(e) => {
                failures += 1;
                if first_failure.is_empty() {
                    first_failure = format!("; trial {trial} errored: {e}");
                }
            }
        }
    }
    vec![
        CheckResult::new(
            "physicality_random",
            failures == 0,
            failures as f64,
            0.0,
            format!("{trials} sequences, min symplectic eigenvalue {worst_eig:.9}{first_failure}"),
        ),
        CheckResult::new(
            "symplectic_form",
            worst_defect <= 1e-10,
            worst_defect,
            1e-10,
            "max |S Ω Sᵀ − Ω|",
        ),
    ]
}

/// A covariance below the uncertainty bound must be rejected.
pub fn negative_control(commutator: f64) -> CheckResult {
    const NAME: &str = "rejects_unphysical";
    let run = || -> Result<CheckResult> {
        let cov = crate::linalg::Matrix::from_diag(&[0.5, 0.5]);
        let state = GaussianState::from_moments(vec![0.0, 0.0], cov)?;
        let report = state.check_physical_with_commutator(commutator);
        Ok(CheckResult::new(
            NAME,
            !report.passed,
            report.min_symplectic_eigenvalue,
            1.0,
            "diag(0.5, 0.5) must fail",
        ))
    };
    CheckResult::from_result(NAME, run())
}

/// Every check, in a fixed order.
pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = vec![engine_vs_formula(opts.tolerance)];
    out.extend(gain_dependence(opts.tolerance));
    out.extend(crossings());
    out.extend(high_gain_limits());
    out.extend(optimizer_agreement());
    out.extend(equivalences(opts.tolerance));
    out.extend(monte_carlo(opts.samples, opts.seed));
    out.extend(thresholds());
    out.extend(physicality(
        opts.physicality_trials,
        opts.seed,
        opts.commutator,
    ));
    out.push(negative_control(opts.commutator));
    out
}
