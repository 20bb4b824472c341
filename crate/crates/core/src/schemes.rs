//! Catalog of communication schemes: single and double use of 1D/2D
//! coherent and squeezed alphabets, and the phase-conjugated and
//! entanglement-assisted two-mode schemes read out by a Bell measurement.
//!
//! Double-use schemes spend a *total* photon budget `n` over both modes and
//! draw independent symbols for each use. Non-conjugate double-use schemes
//! amplify each mode separately; the two-mode conjugate/entangled schemes
//! pass both modes through one two-input amplifier.

use std::fmt;
use std::str::FromStr;

use crate::closed_forms;
use crate::detection::{
    bell, gaussian_mi, heterodyne, homodyne, joint_statistics, JointStatistics,
};
use crate::detection::{MeasurementModel, ModulationModel};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{Channel, GaussianMap, GaussianState, Quadrature};
use crate::scalar::{LogBase, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// 1D coherent alphabet, homodyne, one use.
    Coh1dSingle,
    /// 1D squeezed alphabet, homodyne, one use.
    Sq1dSingle,
    /// 2D coherent alphabet, heterodyne, one use.
    Coh2dSingle,
    Coh1dDouble,
    Sq1dDouble,
    Coh2dDouble,
    /// Displacement on one arm of a two-mode squeezed state, Bell readout.
    EprDisplaced,
    /// Phase-conjugated coherent pairs `|α⟩|α*⟩`, Bell readout.
    ConjCoherent,
    /// Phase-conjugated displacements on both arms of a two-mode squeezed state.
    EprConjugate,
    /// Like [`SchemeId::EprDisplaced`] but only the displaced mode is charged photons.
    DenseCoding,
}

/// Kind of free variance a scheme carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeVariance {
    /// Single-mode squeezing `V_γ` applied to every signal mode.
    Squeezing,
    /// Two-mode squeezing `V ∈ (0, 1]` across the pair.
    TwoModeSqueezing,
}

impl SchemeId {
    pub const ALL: [SchemeId; 10] = [
        SchemeId::Coh1dSingle,
        SchemeId::Sq1dSingle,
        SchemeId::Coh2dSingle,
        SchemeId::Coh1dDouble,
        SchemeId::Sq1dDouble,
        SchemeId::Coh2dDouble,
        SchemeId::EprDisplaced,
        SchemeId::ConjCoherent,
        SchemeId::EprConjugate,
        SchemeId::DenseCoding,
    ];

    /// Schemes whose mutual information does not depend on the gain.
    pub const GAIN_INVARIANT: [SchemeId; 6] = [
        SchemeId::Coh2dSingle,
        SchemeId::Coh2dDouble,
        SchemeId::EprDisplaced,
        SchemeId::ConjCoherent,
        SchemeId::EprConjugate,
        SchemeId::DenseCoding,
    ];

    /// Schemes degraded by phase-insensitive amplification.
    pub const GAIN_VARIANT: [SchemeId; 4] = [
        SchemeId::Coh1dSingle,
        SchemeId::Sq1dSingle,
        SchemeId::Coh1dDouble,
        SchemeId::Sq1dDouble,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Coh1dSingle => "1d_coh_1",
            SchemeId::Sq1dSingle => "1d_sq_1",
            SchemeId::Coh2dSingle => "2d_coh_1",
            SchemeId::Coh1dDouble => "1d_coh_2",
            SchemeId::Sq1dDouble => "1d_sq_2",
            SchemeId::Coh2dDouble => "2d_coh_2",
            SchemeId::EprDisplaced => "epr_disp_2",
            SchemeId::ConjCoherent => "conj_coh_2",
            SchemeId::EprConjugate => "epr_conj_2",
            SchemeId::DenseCoding => "dense_coding",
        }
    }

    pub fn free_variance(self) -> Option<FreeVariance> {
        match self {
            SchemeId::Sq1dSingle | SchemeId::Sq1dDouble => Some(FreeVariance::Squeezing),
            SchemeId::EprDisplaced | SchemeId::EprConjugate | SchemeId::DenseCoding => {
                Some(FreeVariance::TwoModeSqueezing)
            }
            _ => None,
        }
    }

    pub fn is_gain_invariant(self) -> bool {
        Self::GAIN_INVARIANT.contains(&self)
    }

    pub fn num_modes(self) -> usize {
        match self {
            SchemeId::Coh1dSingle | SchemeId::Sq1dSingle | SchemeId::Coh2dSingle => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Intrinsic (zero-symbol) state preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preparation<T> {
    Vacuum,
    /// Every mode squeezed to x-variance `V_γ`.
    Squeezed(T),
    /// Modes 0 and 1 two-mode squeezed to joint variance `V`.
    TwoModeSqueezed(T),
}

/// A fully specified experiment: preparation, modulation, channel, detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec<T> {
    pub id: SchemeId,
    pub num_modes: usize,
    pub prep: Preparation<T>,
    pub modulation: ModulationModel<T>,
    pub channel: Channel<T>,
    pub detector: MeasurementModel,
    /// Target mean photon number.
    pub budget: T,
    /// Modes whose photons count against the budget.
    pub signal_modes: Vec<usize>,
    /// Per-quadrature symbol variance `V_s`.
    pub symbol_variance: T,
}

fn unit<T: Scalar>(dim: usize, entries: &[(usize, f64)]) -> Vec<T> {
    let mut v = vec![T::zero(); dim];
    for &(i, s) in entries {
        v[i] = T::lit(s);
    }
    v
}

/// Builds scheme `id` at photon budget `n` and gain `g`. The free variance,
/// if any, defaults to its closed-form optimum.
pub fn build_scheme<T: Scalar>(
    id: SchemeId,
    n: T,
    g: T,
    variance: Option<T>,
) -> Result<SchemeSpec<T>> {
    if !(n >= T::zero()) || !n.is_finite() {
        return Err(invalid(
            "photon budget",
            n.to_f64_lossy(),
            "must be finite and non-negative",
        ));
    }
    if !(g >= T::one()) || !g.is_finite() {
        return Err(invalid(
            "gain",
            g.to_f64_lossy(),
            "must be finite and at least 1",
        ));
    }
    let kind = id.free_variance();
    let v = match (kind, variance) {
        (None, Some(_)) => return Err(Error::NoFreeVariance(id.as_str())),
        (None, None) => T::one(),
        (Some(_), Some(v)) => v,
        (Some(_), None) => closed_forms::optimal_variance(id, n, g)?,
    };
    match kind {
        Some(FreeVariance::Squeezing) if !(v > T::zero()) || !v.is_finite() => {
            return Err(invalid(
                "squeezing variance",
                v.to_f64_lossy(),
                "must be positive and finite",
            ));
        }
        Some(FreeVariance::TwoModeSqueezing) if !(v > T::zero() && v <= T::one()) => {
            return Err(invalid(
                "two-mode squeezing variance",
                v.to_f64_lossy(),
                "must lie in (0, 1]",
            ));
        }
        _ => {}
    }

    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    // photons held by the squeezing itself, V + 1/V - 2
    let excess = v + v.recip() - two;
    let symbol_variance = match id {
        SchemeId::Coh1dSingle => four * n,
        SchemeId::Sq1dSingle => four * n - excess,
        SchemeId::Coh2dSingle => two * n,
        SchemeId::Coh1dDouble => two * n,
        SchemeId::Sq1dDouble => two * n - excess,
        SchemeId::Coh2dDouble => n,
        SchemeId::EprDisplaced => two * n - excess,
        SchemeId::ConjCoherent => n,
        SchemeId::EprConjugate => n - excess / two,
        SchemeId::DenseCoding => two * n - excess / two,
    };
    let slack = T::epsilon() * T::lit(1e3) * (one + n + v.recip());
    if symbol_variance < -slack {
        return Err(Error::InfeasibleBudget {
            scheme: id.as_str(),
            budget: n.to_f64_lossy(),
            symbol_variance: symbol_variance.to_f64_lossy(),
        });
    }
    let symbol_variance = symbol_variance.max(T::zero());

    let num_modes = id.num_modes();
    let dim = 2 * num_modes;
    let (x0, p0, x1, p1) = (0, 1, 2, 3);
    let columns: Vec<Vec<T>> = match id {
        SchemeId::Coh1dSingle | SchemeId::Sq1dSingle => vec![unit(dim, &[(x0, 1.0)])],
        SchemeId::Coh2dSingle => vec![unit(dim, &[(x0, 1.0)]), unit(dim, &[(p0, 1.0)])],
        SchemeId::Coh1dDouble | SchemeId::Sq1dDouble => {
            vec![unit(dim, &[(x0, 1.0)]), unit(dim, &[(x1, 1.0)])]
        }
        SchemeId::Coh2dDouble => (0..4).map(|i| unit(dim, &[(i, 1.0)])).collect(),
        SchemeId::EprDisplaced | SchemeId::DenseCoding => {
            vec![unit(dim, &[(x0, 1.0)]), unit(dim, &[(p0, 1.0)])]
        }
        SchemeId::ConjCoherent | SchemeId::EprConjugate => vec![
            unit(dim, &[(x0, 1.0), (x1, 1.0)]),
            unit(dim, &[(p0, 1.0), (p1, -1.0)]),
        ],
    };
    let modulation = ModulationModel::isotropic(symbol_variance, &columns)?;

    let prep = match kind {
        None => Preparation::Vacuum,
        Some(FreeVariance::Squeezing) => Preparation::Squeezed(v),
        Some(FreeVariance::TwoModeSqueezing) => Preparation::TwoModeSqueezed(v),
    };

    let (channel, detector) = match id {
        SchemeId::Coh1dSingle | SchemeId::Sq1dSingle => (
            Channel::SingleMode {
                modes: vec![0],
                gain: g,
            },
            homodyne(0, Quadrature::X),
        ),
        SchemeId::Coh2dSingle => (
            Channel::SingleMode {
                modes: vec![0],
                gain: g,
            },
            heterodyne(0),
        ),
        SchemeId::Coh1dDouble | SchemeId::Sq1dDouble => (
            Channel::SingleMode {
                modes: vec![0, 1],
                gain: g,
            },
            homodyne(0, Quadrature::X).and(homodyne(1, Quadrature::X)),
        ),
        SchemeId::Coh2dDouble => (
            Channel::SingleMode {
                modes: vec![0, 1],
                gain: g,
            },
            heterodyne(0).and(heterodyne(1)),
        ),
        SchemeId::EprDisplaced
        | SchemeId::ConjCoherent
        | SchemeId::EprConjugate
        | SchemeId::DenseCoding => (
            Channel::JointPair {
                modes: (0, 1),
                gain: g,
            },
            bell(0, 1),
        ),
    };

    let signal_modes = match id {
        SchemeId::DenseCoding => vec![0],
        _ => (0..num_modes).collect(),
    };

    Ok(SchemeSpec {
        id,
        num_modes,
        prep,
        modulation,
        channel,
        detector,
        budget: n,
        signal_modes,
        symbol_variance,
    })
}

impl<T: Scalar> SchemeSpec<T> {
    /// The zero-symbol state entering the channel.
    pub fn prepared_state(&self) -> Result<GaussianState<T>> {
        let vac = GaussianState::vacuum(self.num_modes)?;
        match self.prep {
            Preparation::Vacuum => Ok(vac),
            Preparation::Squeezed(v) => (0..self.num_modes).try_fold(vac, |s, m| s.squeeze(m, v)),
            Preparation::TwoModeSqueezed(v) => vac.two_mode_squeeze(0, 1, v),
        }
    }

    /// Ensemble-average state of the alphabet before the channel.
    pub fn average_state(&self) -> Result<GaussianState<T>> {
        let prepared = self.prepared_state()?;
        let cov = prepared.cov() + &self.modulation.displacement_cov();
        GaussianState::from_moments(prepared.mean().to_vec(), cov)
    }

    /// Free variance the scheme was built with, if it has one.
    pub fn free_variance(&self) -> Option<T> {
        match self.prep {
            Preparation::Vacuum => None,
            Preparation::Squeezed(v) | Preparation::TwoModeSqueezed(v) => Some(v),
        }
    }

    /// Channel followed by detector, as one map onto the measured quadratures.
    pub fn readout_map(&self) -> Result<GaussianMap<T>> {
        Ok(self
            .channel
            .to_map(self.num_modes)?
            .then(&self.detector.to_map(self.num_modes)?))
    }

    pub fn joint_statistics(&self) -> Result<JointStatistics<T>> {
        joint_statistics(
            &self.prepared_state()?,
            &self.modulation,
            &self.detector,
            &self.channel,
        )
    }

    /// Mean photons of the average input state over the signal modes.
    pub fn photon_budget(&self) -> Result<T> {
        let avg = self.average_state()?;
        Ok(self.signal_modes.iter().map(|&m| avg.mode_photons(m)).sum())
    }

    /// Mutual information computed by propagating moments through the engine.
    pub fn evaluate(&self, base: LogBase) -> Result<T> {
        gaussian_mi(&self.joint_statistics()?, base)
    }
}

/// Builds and evaluates in one call.
pub fn evaluate<T: Scalar>(
    id: SchemeId,
    n: T,
    g: T,
    variance: Option<T>,
    base: LogBase,
) -> Result<T> {
    build_scheme(id, n, g, variance)?.evaluate(base)
}

/// Total photon budget of a scheme.
pub fn photon_budget<T: Scalar>(spec: &SchemeSpec<T>) -> Result<T> {
    spec.photon_budget()
}
