//! Gaussian modulation, Gaussian detectors, and the mutual information of
//! jointly Gaussian symbols and outcomes.

use crate::error::{Error, Result};
use crate::gaussian::{Channel, GaussianMap, GaussianState, Quadrature, SymplecticOp};
use crate::linalg::Matrix;
use crate::scalar::{LogBase, Scalar};

/// Relative tolerance for the PSD checks on symbol and joint covariances.
pub const PSD_TOL: f64 = 1e-10;
/// Guard on `det Σ_{o|s}` below which the information is reported as unbounded.
pub const SINGULAR_DET: f64 = 1e-300;

fn min_eigenvalue<T: Scalar>(m: &Matrix<T>) -> T {
    m.symmetric_eigen().0.first().copied().unwrap_or(T::zero())
}

fn is_psd<T: Scalar>(m: &Matrix<T>) -> bool {
    let tol = T::lit(PSD_TOL).max(T::epsilon() * T::lit(64.0)) * T::one().max(m.max_abs());
    min_eigenvalue(m) >= -tol
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

/// Gaussian symbol alphabet `s ~ N(0, Σ_s)` encoded as displacement `E s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationModel<T> {
    symbol_cov: Matrix<T>,
    encode: Matrix<T>,
}

impl<T: Scalar> ModulationModel<T> {
    pub fn new(symbol_cov: Matrix<T>, encode: Matrix<T>) -> Result<Self> {
        if !symbol_cov.is_square() || encode.cols() != symbol_cov.rows() || encode.rows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "symbol covariance {}x{} with encode map {}x{}",
                symbol_cov.rows(),
                symbol_cov.cols(),
                encode.rows(),
                encode.cols()
            )));
        }
        if !symbol_cov.is_finite() || !encode.is_finite() {
            return Err(Error::DimensionMismatch(
                "modulation contains non-finite entries".into(),
            ));
        }
        if !is_psd(&symbol_cov) {
            return Err(Error::DimensionMismatch(
                "symbol covariance is not positive semidefinite".into(),
            ));
        }
        Ok(Self {
            symbol_cov: symbol_cov.symmetrize(),
            encode,
        })
    }

    /// Independent symbols of common variance, one per listed quadrature
    /// combination. Each entry of `columns` is the displacement one unit of
    /// that symbol produces.
    pub fn isotropic(variance: T, columns: &[Vec<T>]) -> Result<Self> {
        let k = columns.len();
        let dim = columns.first().map_or(0, |c| c.len());
        let encode = Matrix::from_fn(dim, k, |i, j| columns[j][i]);
        Self::new(Matrix::identity(k).scale(variance), encode)
    }

    pub fn symbol_dim(&self) -> usize {
        self.symbol_cov.rows()
    }

    pub fn symbol_cov(&self) -> &Matrix<T> {
        &self.symbol_cov
    }

    pub fn encode_map(&self) -> &Matrix<T> {
        &self.encode
    }

    /// Covariance the modulation adds to the ensemble-average state, `E Σ_s Eᵀ`.
    pub fn displacement_cov(&self) -> Matrix<T> {
        self.encode.congruence(&self.symbol_cov)
    }
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

/// Mode reference inside a detector: either a mode of the incoming state or a
/// vacuum ancilla the detector brings along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    Signal(usize),
    Ancilla(usize),
}

impl Port {
    fn resolve(self, num_modes: usize) -> usize {
        match self {
            Port::Signal(m) => m,
            Port::Ancilla(a) => num_modes + a,
        }
    }

    fn shift_ancilla(self, by: usize) -> Self {
        match self {
            Port::Ancilla(a) => Port::Ancilla(a + by),
            s => s,
        }
    }
}

/// Passive detector network followed by homodyne readout of some quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    ancillas: usize,
    splitters: Vec<(Port, Port, f64)>,
    measured: Vec<(Port, Quadrature)>,
}

/// Homodyne detection of one quadrature of `mode`.
pub fn homodyne(mode: usize, quadrature: Quadrature) -> MeasurementModel {
    MeasurementModel {
        ancillas: 0,
        splitters: Vec::new(),
        measured: vec![(Port::Signal(mode), quadrature)],
    }
}

/// Heterodyne detection: split `mode` with a vacuum ancilla on a balanced
/// beam splitter, then read x on one output and p on the other.
pub fn heterodyne(mode: usize) -> MeasurementModel {
    let (s, a) = (Port::Signal(mode), Port::Ancilla(0));
    MeasurementModel {
        ancillas: 1,
        splitters: vec![(s, a, 0.5)],
        measured: vec![(s, Quadrature::X), (a, Quadrature::P)],
    }
}

/// Continuous-variable Bell measurement: balanced beam splitter across the
/// pair, x on the first output and p on the second.
pub fn bell(a: usize, b: usize) -> MeasurementModel {
    let (pa, pb) = (Port::Signal(a), Port::Signal(b));
    MeasurementModel {
        ancillas: 0,
        splitters: vec![(pa, pb, 0.5)],
        measured: vec![(pa, Quadrature::X), (pb, Quadrature::P)],
    }
}

impl MeasurementModel {
    /// Runs `other` alongside `self`, with its own ancillas.
    pub fn and(mut self, other: MeasurementModel) -> Self {
        let shift = self.ancillas;
        self.splitters.extend(
            other
                .splitters
                .into_iter()
                .map(|(a, b, t)| (a.shift_ancilla(shift), b.shift_ancilla(shift), t)),
        );
        self.measured.extend(
            other
                .measured
                .into_iter()
                .map(|(p, q)| (p.shift_ancilla(shift), q)),
        );
        self.ancillas += other.ancillas;
        self
    }

    pub fn num_outcomes(&self) -> usize {
        self.measured.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn measured(&self) -> &[(Port, Quadrature)] {
        &self.measured
    }

    /// Drops the `index`-th measured quadrature.
    pub fn discard(mut self, index: usize) -> Self {
        self.measured.remove(index);
        self
    }

    /// Linear map from a `num_modes`-mode state to the measured quadratures.
    pub fn to_map<T: Scalar>(&self, num_modes: usize) -> Result<GaussianMap<T>> {
        let total = num_modes + self.ancillas;
        let check = |p: Port| -> Result<usize> {
            let m = p.resolve(num_modes);
            if let Port::Signal(s) = p {
                if s >= num_modes {
                    return Err(Error::ModeOutOfRange { mode: s, num_modes });
                }
            }
            Ok(m)
        };
        let mut map = GaussianMap::append_vacuum(num_modes, self.ancillas);
        for &(a, b, t) in &self.splitters {
            let op = SymplecticOp::beam_splitter(total, check(a)?, check(b)?, T::lit(t))?;
            map = map.then(&op.to_map());
        }
        let mut seen = Vec::with_capacity(self.measured.len());
        let mut rows = Vec::with_capacity(self.measured.len());
        for &(p, q) in &self.measured {
            let m = check(p)?;
            if seen.contains(&m) {
                return Err(Error::ConflictingMeasurement(m));
            }
            seen.push(m);
            rows.push(q.index(m));
        }
        Ok(map.then(&GaussianMap::select_quadratures(2 * total, &rows)))
    }
}

// ---------------------------------------------------------------------------
// Joint statistics and mutual information
// ---------------------------------------------------------------------------

/// Second moments of jointly Gaussian symbols `s` (k) and outcomes `o` (m).
#[derive(Debug, Clone, PartialEq)]
pub struct JointStatistics<T> {
    pub ss: Matrix<T>,
    pub so: Matrix<T>,
    pub oo: Matrix<T>,
}

impl<T: Scalar> JointStatistics<T> {
    pub fn new(ss: Matrix<T>, so: Matrix<T>, oo: Matrix<T>) -> Result<Self> {
        let (k, m) = (ss.rows(), oo.rows());
        if !ss.is_square() || !oo.is_square() || so.rows() != k || so.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "Σ_ss {}x{}, Σ_so {}x{}, Σ_oo {}x{}",
                ss.rows(),
                ss.cols(),
                so.rows(),
                so.cols(),
                oo.rows(),
                oo.cols()
            )));
        }
        let js = Self { ss, so, oo };
        if !is_psd(&js.stacked()) {
            return Err(Error::DimensionMismatch(
                "joint covariance is not positive semidefinite".into(),
            ));
        }
        Ok(js)
    }

    pub fn symbol_dim(&self) -> usize {
        self.ss.rows()
    }

    pub fn outcome_dim(&self) -> usize {
        self.oo.rows()
    }

    /// `[[Σ_ss, Σ_so], [Σ_soᵀ, Σ_oo]]`.
    pub fn stacked(&self) -> Matrix<T> {
        let k = self.symbol_dim();
        Matrix::from_fn(
            k + self.outcome_dim(),
            k + self.outcome_dim(),
            |i, j| match (i < k, j < k) {
                (true, true) => self.ss[(i, j)],
                (true, false) => self.so[(i, j - k)],
                (false, true) => self.so[(j, i - k)],
                (false, false) => self.oo[(i - k, j - k)],
            },
        )
    }

    /// Outcome covariance conditioned on the symbol, `Σ_oo − Σ_soᵀ Σ_ss⁺ Σ_so`.
    pub fn conditional_cov(&self) -> Matrix<T> {
        let pinv = self.ss.psd_pseudo_inverse(T::epsilon() * T::lit(1e3));
        let explained = self.so.transpose().congruence(&pinv);
        (&self.oo - &explained).symmetrize()
    }

    /// Restricts to a subset of outcomes.
    pub fn select_outcomes(&self, keep: &[usize]) -> Self {
        let all: Vec<usize> = (0..self.symbol_dim()).collect();
        Self {
            ss: self.ss.clone(),
            so: self.so.select(&all, keep),
            oo: self.oo.select(keep, keep),
        }
    }

    /// Reparameterises symbols `s ↦ A s` and outcomes `o ↦ B o`.
    pub fn transform(&self, symbols: &Matrix<T>, outcomes: &Matrix<T>) -> Self {
        Self {
            ss: symbols.congruence(&self.ss),
            so: &(symbols * &self.so) * &outcomes.transpose(),
            oo: outcomes.congruence(&self.oo),
        }
    }
}

/// Propagates a prepared (zero-symbol) state and its modulation through an
/// amplifying channel and a detector, returning the symbol/outcome moments.
pub fn joint_statistics<T: Scalar>(
    prepared: &GaussianState<T>,
    modulation: &ModulationModel<T>,
    measurement: &MeasurementModel,
    channel: &Channel<T>,
) -> Result<JointStatistics<T>> {
    let num_modes = prepared.num_modes();
    if modulation.encode_map().rows() != 2 * num_modes {
        return Err(Error::DimensionMismatch(format!(
            "encode map targets {} quadratures but the state has {}",
            modulation.encode_map().rows(),
            2 * num_modes
        )));
    }
    let total = channel
        .to_map(num_modes)?
        .then(&measurement.to_map(num_modes)?);
    let noise = total.apply_cov(prepared.cov());
    let gain = &total.x * modulation.encode_map();
    let signal = gain.congruence(modulation.symbol_cov());
    let so = modulation.symbol_cov() * &gain.transpose();
    JointStatistics::new(
        modulation.symbol_cov().clone(),
        so,
        (&noise + &signal).symmetrize(),
    )
}

/// Mutual information `½ log det Σ_oo − ½ log det Σ_{o|s}` in the given base.
pub fn gaussian_mi<T: Scalar>(js: &JointStatistics<T>, base: LogBase) -> Result<T> {
    let det_oo = js.oo.det();
    let det_cond = js.conditional_cov().det();
    let guard = T::lit(SINGULAR_DET);
    if !(det_cond > guard) || !(det_oo > guard) {
        return Err(Error::UnboundedInformation);
    }
    let nats = (det_oo.ln() - det_cond.ln()) / T::lit(2.0);
    Ok(base.from_nats(nats.max(T::zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::AmpTarget;

    fn one_by_one(ss: f64, so: f64, oo: f64) -> JointStatistics<f64> {
        JointStatistics::new(
            Matrix::from_diag(&[ss]),
            Matrix::from_diag(&[so]),
            Matrix::from_diag(&[oo]),
        )
        .unwrap()
    }

    fn coherent_1d(vs: f64) -> ModulationModel<f64> {
        ModulationModel::isotropic(vs, &[vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn scalar_channel_reduces_to_shannon() {
        let mi = gaussian_mi(&one_by_one(4.0, 4.0, 5.0), LogBase::Bits).unwrap();
        assert!((mi - 0.5 * 5f64.log2()).abs() < 1e-15);
        assert!((mi - 1.160964047443681).abs() < 1e-12);
        assert_eq!(
            gaussian_mi(&one_by_one(4.0, 0.0, 5.0), LogBase::Bits).unwrap(),
            0.0
        );
        let nats = gaussian_mi(&one_by_one(4.0, 4.0, 5.0), LogBase::Nats).unwrap();
        assert!((nats - 0.5 * 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_outcome_is_unbounded() {
        let js = one_by_one(2.0, 2.0, 2.0);
        assert_eq!(
            gaussian_mi(&js, LogBase::Bits),
            Err(Error::UnboundedInformation)
        );
    }

    #[test]
    fn non_psd_statistics_rejected() {
        let r = JointStatistics::new(
            Matrix::from_diag(&[1.0]),
            Matrix::from_diag(&[3.0]),
            Matrix::from_diag(&[1.0]),
        );
        assert!(r.is_err());
    }

    #[test]
    fn homodyne_adds_vacuum_noise() {
        let m = homodyne(0, Quadrature::X);
        assert_eq!(m.num_outcomes(), 1);
        assert_eq!(homodyne(0, Quadrature::P).num_outcomes(), 1);
        let vac = GaussianState::<f64>::vacuum(1).unwrap();
        let js = joint_statistics(&vac, &coherent_1d(4.0), &m, &Channel::Identity).unwrap();
        assert_eq!(js.ss[(0, 0)], 4.0);
        assert_eq!(js.so[(0, 0)], 4.0);
        assert_eq!(js.oo[(0, 0)], 5.0);
    }

    #[test]
    fn amplified_homodyne_statistics() {
        let vac = GaussianState::<f64>::vacuum(1).unwrap();
        let ch = Channel::SingleMode {
            modes: vec![0],
            gain: 2.0,
        };
        let js =
            joint_statistics(&vac, &coherent_1d(4.0), &homodyne(0, Quadrature::X), &ch).unwrap();
        assert!((js.oo[(0, 0)] - 11.0).abs() < 1e-12);
        let snr = js.so[(0, 0)].powi(2)
            / js.ss[(0, 0)]
            / (js.oo[(0, 0)] - js.so[(0, 0)].powi(2) / js.ss[(0, 0)]);
        assert!((snr - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn heterodyne_of_vacuum_and_coherent() {
        let m = heterodyne(0);
        assert_eq!(m.num_outcomes(), 2);
        let map = m.to_map::<f64>(1).unwrap();
        let vac = GaussianState::<f64>::vacuum(1).unwrap();
        let out_cov = map.apply_cov(vac.cov());
        assert!(out_cov.max_abs_diff(&Matrix::identity(2)) < 1e-15);
        let coh = vac.displace(0, 2.0, 0.0).unwrap();
        let mean = map.apply_mean(coh.mean());
        assert!((mean[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(mean[1].abs() < 1e-15);
    }

    #[test]
    fn bell_detector_reads_conjugate_pairs() {
        let (x, p) = (0.9, 0.4);
        let map = bell(0, 1).to_map::<f64>(2).unwrap();
        let vac = GaussianState::<f64>::vacuum(2).unwrap();
        let conj = vac.displace(0, x, p).unwrap().displace(1, x, -p).unwrap();
        let m = map.apply_mean(conj.mean());
        assert!((m[0] - 2f64.sqrt() * x).abs() < 1e-15);
        assert!((m[1].abs() - 2f64.sqrt() * p).abs() < 1e-15);
        let same = vac.displace(0, x, p).unwrap().displace(1, x, p).unwrap();
        assert!(map.apply_mean(same.mean())[1].abs() < 1e-15);
        assert!(map.apply_cov(vac.cov()).max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn conflicting_readout_rejected() {
        let m = homodyne(0, Quadrature::X).and(homodyne(0, Quadrature::P));
        assert!(matches!(
            m.to_map::<f64>(1),
            Err(Error::ConflictingMeasurement(0))
        ));
        assert!(homodyne(3, Quadrature::X).to_map::<f64>(1).is_err());
    }

    #[test]
    fn combined_heterodynes_use_separate_ancillas() {
        let m = heterodyne(0).and(heterodyne(1));
        assert_eq!(m.num_ancillas(), 2);
        let map = m.to_map::<f64>(2).unwrap();
        let vac = GaussianState::<f64>::vacuum(2).unwrap();
        assert!(map.apply_cov(vac.cov()).max_abs_diff(&Matrix::identity(4)) < 1e-15);
    }

    #[test]
    fn zero_symbol_variance_carries_no_information() {
        let vac = GaussianState::<f64>::vacuum(2).unwrap();
        let modulation =
            ModulationModel::isotropic(0.0, &[vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, -1.0]])
                .unwrap();
        let js = joint_statistics(&vac, &modulation, &bell(0, 1), &Channel::Identity).unwrap();
        assert!(js.so.max_abs() == 0.0);
        assert_eq!(gaussian_mi(&js, LogBase::Bits).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let vac = GaussianState::<f64>::vacuum(2).unwrap();
        let r = joint_statistics(
            &vac,
            &coherent_1d(1.0),
            &homodyne(0, Quadrature::X),
            &Channel::Identity,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn amplified_state_matches_channel_map() {
        let vac = GaussianState::<f64>::vacuum(1).unwrap();
        let direct = vac.amplify(AmpTarget::Single(0), 3.0).unwrap();
        let via = Channel::SingleMode {
            modes: vec![0],
            gain: 3.0,
        }
        .to_map(1)
        .unwrap();
        assert_eq!(direct, vac.apply_map(&via).unwrap());
    }
}
