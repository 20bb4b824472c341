//! Analytic mutual-information expressions, optimal free variances and
//! high-gain limits for every scheme in the catalog.
//!
//! Everything is evaluated in nats (with `ln_1p` where the argument is
//! `1 + small`) and converted to the requested base at the end. A photon
//! budget of zero returns exactly zero.

use crate::error::{invalid, Error, Result};
use crate::scalar::{LogBase, Scalar};
use crate::schemes::SchemeId;

fn check_budget<T: Scalar>(n: T) -> Result<()> {
    if !(n >= T::zero()) || !n.is_finite() {
        return Err(invalid(
            "photon budget",
            n.to_f64_lossy(),
            "must be finite and non-negative",
        ));
    }
    Ok(())
}

fn check_gain<T: Scalar>(g: T) -> Result<()> {
    if !(g >= T::one()) || !g.is_finite() {
        return Err(invalid(
            "gain",
            g.to_f64_lossy(),
            "must be finite and at least 1",
        ));
    }
    Ok(())
}

/// Optimal squeezing variance for a homodyned squeezed alphabet behind a
/// single-mode amplifier, where `a` is four times the per-use second-moment
/// budget (`4(n+½)` single use, `2(n+1)` per use of a double use).
fn squeezed_optimum<T: Scalar>(a: T, g: T) -> T {
    let one = T::one();
    (g + (g * g + (g - one) * (g - one + a * g)).sqrt()) / (g - one + a * g)
}

/// SNR of a homodyned squeezed alphabet at squeezing `v` behind gain `g`.
fn squeezed_snr<T: Scalar>(a: T, g: T, v: T) -> T {
    (g * a - g * v - g / v) / (g * v + g - T::one())
}

/// Closed-form mutual information of scheme `id` at budget `n` and gain `g`.
///
/// Gain-invariant schemes accept and ignore `g`.
pub fn formula_mi<T: Scalar>(id: SchemeId, n: T, g: T, base: LogBase) -> Result<T> {
    check_budget(n)?;
    check_gain(g)?;
    if n == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let nats = match id {
        SchemeId::Coh1dSingle => half * (T::lit(4.0) * g * n / (two * g - one)).ln_1p(),
        SchemeId::Sq1dSingle => {
            let a = T::lit(4.0) * (n + half);
            let v = squeezed_optimum(a, g);
            half * squeezed_snr(a, g, v).ln_1p()
        }
        SchemeId::Coh2dSingle => n.ln_1p(),
        SchemeId::Coh1dDouble => (two * g * n / (two * g - one)).ln_1p(),
        SchemeId::Sq1dDouble => {
            let a = two * (n + one);
            let v = squeezed_optimum(a, g);
            squeezed_snr(a, g, v).ln_1p()
        }
        SchemeId::Coh2dDouble => two * (n / two).ln_1p(),
        SchemeId::EprDisplaced => (n + n * n / two).ln_1p(),
        SchemeId::ConjCoherent => (two * n).ln_1p(),
        SchemeId::EprConjugate => two * n.ln_1p(),
        SchemeId::DenseCoding => (n + n * n).ln_1p(),
    };
    Ok(base.from_nats(nats))
}

/// Optimal free variance (squeezing `V_γ` or two-mode squeezing `V`).
pub fn optimal_variance<T: Scalar>(id: SchemeId, n: T, g: T) -> Result<T> {
    check_budget(n)?;
    check_gain(g)?;
    let one = T::one();
    let v = match id {
        SchemeId::Sq1dSingle => squeezed_optimum(T::lit(4.0) * (n + T::lit(0.5)), g),
        SchemeId::Sq1dDouble => squeezed_optimum(T::lit(2.0) * (n + one), g),
        SchemeId::EprDisplaced | SchemeId::EprConjugate => one / (one + n),
        SchemeId::DenseCoding => one / (T::lit(2.0) * n + one),
        other => return Err(Error::NoFreeVariance(other.as_str())),
    };
    Ok(v)
}

/// Limit `g → ∞` of the gain-dependent schemes.
pub fn high_gain_limit<T: Scalar>(id: SchemeId, n: T, base: LogBase) -> Result<T> {
    check_budget(n)?;
    if id.is_gain_invariant() {
        return Err(Error::GainInvariant(id.as_str()));
    }
    if n == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let nats = match id {
        SchemeId::Coh1dSingle => half * (two * n).ln_1p(),
        SchemeId::Coh1dDouble => n.ln_1p(),
        SchemeId::Sq1dSingle => {
            let r = (n + one).sqrt();
            let num = r * (T::lit(4.0) * n + T::lit(3.0)).powi(2);
            let den = T::lit(5.0) * r + T::lit(4.0) * n * (r + one) + T::lit(4.0);
            half * (num / den).ln()
        }
        SchemeId::Sq1dDouble => {
            let r = T::SQRT_2() * (n + two).sqrt();
            let num = r * (two * n + T::lit(3.0)).powi(2);
            let den = two * r * n + T::lit(4.0) * n + T::lit(5.0) * r + T::lit(8.0);
            (num / den).ln()
        }
        other => return Err(Error::GainInvariant(other.as_str())),
    };
    Ok(base.from_nats(nats.max(T::zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use SchemeId::*;

    fn bits(id: SchemeId, n: f64, g: f64) -> f64 {
        formula_mi(id, n, g, LogBase::Bits).unwrap()
    }

    #[test]
    fn reported_spot_values() {
        assert!((bits(Coh1dSingle, 1.0, 1.0) - 0.5 * 5f64.log2()).abs() < 1e-15);
        assert!((bits(Coh1dSingle, 1.0, 2.0) - 0.5 * (11.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((bits(Coh1dSingle, 1.0, 2.0) - 0.93722).abs() < 1e-4);
        assert!((bits(EprDisplaced, 2.0, 1.0) - 5f64.log2()).abs() < 1e-14);
        assert!((bits(ConjCoherent, 2.0, 1.0) - 5f64.log2()).abs() < 1e-14);
        assert!((bits(DenseCoding, 1.0, 1.0) - 3f64.log2()).abs() < 1e-15);
        assert!((bits(Coh2dSingle, 1.0, 7.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unity_gain_squeezed_forms() {
        for n in [0.3, 1.0, 4.0] {
            assert!((bits(Sq1dSingle, n, 1.0) - (1.0 + 2.0 * n).log2()).abs() < 1e-13);
            assert!((bits(Sq1dDouble, n, 1.0) - 2.0 * (1.0 + n).log2()).abs() < 1e-13);
            assert!((bits(Coh1dDouble, n, 1.0) - (1.0 + 2.0 * n).log2()).abs() < 1e-13);
            assert!((bits(Coh2dDouble, n, 1.0) - 2.0 * (1.0 + n / 2.0).log2()).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_budget_is_exactly_zero() {
        for id in SchemeId::ALL {
            assert_eq!(bits(id, 0.0, 3.0), 0.0);
        }
    }

    #[test]
    fn optimal_variances() {
        assert!((optimal_variance(Sq1dSingle, 1.0f64, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(optimal_variance(EprDisplaced, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(optimal_variance(EprConjugate, 2.0, 9.0).unwrap(), 1.0 / 3.0);
        assert_eq!(optimal_variance(DenseCoding, 1.0, 1.0).unwrap(), 1.0 / 3.0);
        let lim = (1.0 + 2.0 * 2f64.sqrt()) / 7.0;
        assert!((optimal_variance(Sq1dSingle, 1.0, 1e12).unwrap() - lim).abs() < 1e-9);
        assert!((lim - 0.54692).abs() < 1e-5);
        assert!(matches!(
            optimal_variance(ConjCoherent, 1.0, 1.0),
            Err(Error::NoFreeVariance(_))
        ));
    }

    #[test]
    fn high_gain_spot_values() {
        let l = |id, n| high_gain_limit(id, n, LogBase::Bits).unwrap();
        assert!((l(Coh1dSingle, 1.0) - 0.5 * 3f64.log2()).abs() < 1e-15);
        assert!((l(Sq1dSingle, 1.0) - 0.87066).abs() < 1e-4);
        assert!((l(Coh1dDouble, 3.0) - 2.0).abs() < 1e-15);
        assert_eq!(l(Sq1dSingle, 0.0), 0.0);
        assert_eq!(l(Sq1dDouble, 0.0), 0.0);
        assert!(high_gain_limit(EprConjugate, 1.0, LogBase::Bits).is_err());
    }

    #[test]
    fn large_gain_approaches_limits() {
        for id in [Coh1dSingle, Sq1dSingle, Coh1dDouble, Sq1dDouble] {
            for n in [0.5, 1.0, 3.0, 10.0] {
                let lim = high_gain_limit(id, n, LogBase::Bits).unwrap();
                assert!((bits(id, n, 1e6) - lim).abs() < 1e-3, "{id:?} n={n}");
            }
        }
    }

    #[test]
    fn base_conversion() {
        let b = bits(EprConjugate, 2.0, 1.0);
        let n = formula_mi(EprConjugate, 2.0, 1.0, LogBase::Nats).unwrap();
        assert!((b * std::f64::consts::LN_2 - n).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(formula_mi(Coh1dSingle, -1.0, 1.0, LogBase::Bits).is_err());
        assert!(formula_mi(Coh1dSingle, 1.0, 0.5, LogBase::Bits).is_err());
    }
}
