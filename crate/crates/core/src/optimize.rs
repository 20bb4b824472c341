//! Golden-section maximisation of free variances and bisection for the
//! photon numbers at which two schemes exchange rank.

use crate::closed_forms::formula_mi;
use crate::error::{invalid, Error, Result};
use crate::scalar::{LogBase, Scalar};
use crate::schemes::{build_scheme, SchemeId};

/// Lower end of the squeezing search bracket.
pub const MIN_VARIANCE: f64 = 1e-6;
/// Default golden-section tolerance, absolute in `ln V`.
pub const DEFAULT_LOG_TOL: f64 = 1e-10;
/// Default photon-number bracket for crossings.
pub const DEFAULT_BRACKET: (f64, f64) = (1e-6, 100.0);
/// Crossing resolution in photons.
pub const CROSSING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult<T> {
    pub argmax: T,
    pub max_mi: T,
    pub iterations: usize,
    /// Final bracket width in `ln V`.
    pub bracket_width: T,
}

/// Maximises `f` on `[lo, hi]` by golden-section search, assuming unimodality.
/// Returns `(argmax, max, iterations, final width)`.
pub fn golden_section_max<T: Scalar>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    tol: T,
) -> (T, T, usize, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > tol && iterations < 10_000 {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    // endpoints of the final bracket can beat the interior probes on a
    // boundary maximum
    let candidates = [(x, fx), (a, f(a)), (b, f(b))];
    let (x, fx) = candidates.into_iter().fold(
        (x, fx),
        |best, cand| if cand.1 > best.1 { cand } else { best },
    );
    (x, fx, iterations, b - a)
}

/// Bisection for a sign change of `f` on `[lo, hi]` down to width `tol`.
pub fn bisect<T: Scalar>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoCrossing {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let a_positive = fa > T::zero();
    while (b - a).abs() > tol {
        let m = a + (b - a) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm > T::zero()) == a_positive {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a + (b - a) / T::lit(2.0))
}

/// Finds the smallest feasible `ln V` in `[lo, hi]` given that `hi` is feasible.
fn feasible_floor<T: Scalar>(feasible: impl Fn(T) -> bool, lo: T, hi: T, tol: T) -> T {
    if feasible(lo) {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = a + (b - a) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        if feasible(m) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Numerically optimises the free variance of scheme `id` by golden-section
/// search over `ln V ∈ [ln 10⁻⁶, 0]`, evaluating the simulation engine.
///
/// The bracket is first shrunk to the region where the photon budget can be
/// met. `tol` is absolute in `ln V`, i.e. relative in `V`.
pub fn maximize_variance<T: Scalar>(
    id: SchemeId,
    n: T,
    g: T,
    tol: T,
) -> Result<OptimizationResult<T>> {
    if id.free_variance().is_none() {
        return Err(Error::NoFreeVariance(id.as_str()));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tolerance", tol.to_f64_lossy(), "must be positive"));
    }
    let feasible = |u: T| build_scheme(id, n, g, Some(u.exp())).is_ok();
    let hi = T::zero();
    if !feasible(hi) {
        return Err(Error::EmptyFeasibleRegion);
    }
    let lo = feasible_floor(feasible, T::lit(MIN_VARIANCE).ln(), hi, tol / T::lit(16.0));
    let objective = |u: T| {
        build_scheme(id, n, g, Some(u.exp()))
            .and_then(|s| s.evaluate(LogBase::Bits))
            .unwrap_or(T::neg_infinity())
    };
    if hi - lo <= tol {
        let v = hi;
        return Ok(OptimizationResult {
            argmax: v.exp(),
            max_mi: objective(v),
            iterations: 0,
            bracket_width: hi - lo,
        });
    }
    let (u, mi, iterations, width) = golden_section_max(objective, lo, hi, tol);
    if !mi.is_finite() {
        return Err(Error::EmptyFeasibleRegion);
    }
    Ok(OptimizationResult {
        argmax: u.exp(),
        max_mi: mi,
        iterations,
        bracket_width: width,
    })
}

/// Photon number at which the closed forms of two schemes cross at gain `g`.
pub fn crossing_threshold<T: Scalar>(a: SchemeId, b: SchemeId, g: T, bracket: (T, T)) -> Result<T> {
    let diff = |n: T| {
        let fa = formula_mi(a, n, g, LogBase::Nats);
        let fb = formula_mi(b, n, g, LogBase::Nats);
        match (fa, fb) {
            (Ok(x), Ok(y)) => x - y,
            _ => T::nan(),
        }
    };
    bisect(diff, bracket.0, bracket.1, T::lit(CROSSING_TOL))
}

/// Baseline every gain-dependent variant is compared against.
pub const THRESHOLD_BASELINE: SchemeId = SchemeId::Coh2dDouble;

/// Variants in descending order of their asymptotic constant.
pub const THRESHOLD_VARIANTS: [SchemeId; 3] = [
    SchemeId::Sq1dDouble,
    SchemeId::Coh1dDouble,
    SchemeId::Sq1dSingle,
];

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve<T> {
    pub variant: SchemeId,
    /// `(g, n*)`, with `None` where no threshold exists inside the bracket.
    pub points: Vec<(T, Option<T>)>,
    /// `c` in `n* ≈ c / g`, taken at the largest gain with a threshold.
    pub asymptotic_constant: Option<T>,
}

/// Photon number above which the double-use 2D coherent alphabet beats
/// `variant`, for each gain on the grid.
pub fn threshold_curve<T: Scalar>(variant: SchemeId, g_grid: &[T]) -> Result<ThresholdCurve<T>> {
    if variant.is_gain_invariant() {
        return Err(Error::GainInvariant(variant.as_str()));
    }
    let bracket = (T::lit(DEFAULT_BRACKET.0), T::lit(DEFAULT_BRACKET.1));
    let mut points = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        match crossing_threshold(variant, THRESHOLD_BASELINE, g, bracket) {
            Ok(n) => points.push((g, Some(n))),
            Err(Error::NoCrossing { .. }) => points.push((g, None)),
            Err(e) => return Err(e),
        }
    }
    let asymptotic_constant = points
        .iter()
        .filter_map(|&(g, n)| n.map(|n| (g, n)))
        .fold(None, |best: Option<(T, T)>, (g, n)| match best {
            Some((bg, _)) if bg >= g => best,
            _ => Some((g, n)),
        })
        .map(|(g, n)| g * n);
    Ok(ThresholdCurve {
        variant,
        points,
        asymptotic_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx, _, w) =
            golden_section_max(|x: f64| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 4.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
        assert!(w <= 1e-10);
    }

    #[test]
    fn golden_section_boundary_max() {
        let (x, _, _, _) = golden_section_max(|x: f64| x, 0.0, 1.0, 1e-9);
        assert!((x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-9),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn squeezed_single_use_optimum() {
        let r = maximize_variance(SchemeId::Sq1dSingle, 1.0, 1.0, DEFAULT_LOG_TOL).unwrap();
        assert!((r.argmax - 1.0 / 3.0).abs() < 1e-7);
        assert!((r.max_mi - 3f64.log2()).abs() < 1e-12, "{r:?}");
        assert!(r.bracket_width <= DEFAULT_LOG_TOL);
    }

    #[test]
    fn epr_optima() {
        let r = maximize_variance(SchemeId::EprDisplaced, 2.0, 1.0, DEFAULT_LOG_TOL).unwrap();
        assert!((r.argmax - 1.0 / 3.0).abs() < 1e-7);
        assert!((r.max_mi - 5f64.log2()).abs() < 1e-12);
        let r = maximize_variance(SchemeId::EprConjugate, 1.0, 5.0, DEFAULT_LOG_TOL).unwrap();
        assert!((r.argmax - 0.5).abs() < 1e-7);
        assert!((r.max_mi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_rejects_fixed_schemes() {
        assert!(matches!(
            maximize_variance(SchemeId::ConjCoherent, 1.0, 1.0, 1e-8),
            Err(Error::NoFreeVariance(_))
        ));
    }

    #[test]
    fn zero_budget_pins_variance_to_vacuum() {
        let r = maximize_variance(SchemeId::Sq1dDouble, 0.0f64, 2.0, 1e-8).unwrap();
        assert!((r.argmax - 1.0).abs() < 1e-6);
        assert_eq!(r.max_mi, 0.0);
    }

    #[test]
    fn reported_crossings() {
        let b = (1e-6f64, 100.0);
        let n = crossing_threshold(SchemeId::EprDisplaced, SchemeId::ConjCoherent, 3.0, b).unwrap();
        assert!((n - 2.0).abs() < 1e-6);
        let n = crossing_threshold(SchemeId::Coh2dDouble, SchemeId::ConjCoherent, 1.0, b).unwrap();
        assert!((n - 4.0).abs() < 1e-6);
        // (1 + n/2)² = 1 + 2gn/(2g−1)  ⇒  n* = 4/(2g−1)
        let n = crossing_threshold(SchemeId::Coh2dDouble, SchemeId::Coh1dDouble, 2.0, b).unwrap();
        assert!((n - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn crossing_is_symmetric() {
        let b = (1e-6, 100.0);
        let ab = crossing_threshold(SchemeId::Coh2dDouble, SchemeId::Sq1dSingle, 7.0, b).unwrap();
        let ba = crossing_threshold(SchemeId::Sq1dSingle, SchemeId::Coh2dDouble, 7.0, b).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn threshold_curve_for_coherent_double_use() {
        let c = threshold_curve(SchemeId::Coh1dDouble, &[10.0f64]).unwrap();
        let n = c.points[0].1.unwrap();
        assert!((n - 4.0 / 19.0).abs() < 1e-6);
        let c = threshold_curve(SchemeId::Sq1dDouble, &[1.0, 2.0]).unwrap();
        assert_eq!(c.points[0].1, None);
        assert!(c.points[1].1.is_some());
        assert!(threshold_curve(SchemeId::ConjCoherent, &[2.0]).is_err());
    }
}
