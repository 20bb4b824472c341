//! Multimode Gaussian states and the linear phase-space maps acting on them.
//!
//! Quadratures are interleaved `(x₁, p₁, …, x_M, p_M)` with `[x, p] = 2i`, so
//! the vacuum covariance is the identity and the symplectic form `Ω` has
//! blocks `[[0, 2], [-2, 0]]`.

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Off-diagonal entry of each 2×2 block of `Ω` under `[x, p] = 2i`.
pub const COMMUTATOR: f64 = 2.0;

/// Allowed negative part of `V + iΩ/2`. Widened to `64 d ε ‖V‖` for large
/// covariances, whose entries carry no more absolute precision than that.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Tolerance on covariance asymmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic form for `num_modes` modes with `[x, p] = i·commutator`.
pub fn omega_with<T: Scalar>(num_modes: usize, commutator: T) -> Matrix<T> {
    let mut w = Matrix::zeros(2 * num_modes, 2 * num_modes);
    for k in 0..num_modes {
        w[(2 * k, 2 * k + 1)] = commutator;
        w[(2 * k + 1, 2 * k)] = -commutator;
    }
    w
}

pub fn omega<T: Scalar>(num_modes: usize) -> Matrix<T> {
    omega_with(num_modes, T::lit(COMMUTATOR))
}

/// Which quadrature of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    /// Index of this quadrature of `mode` in the interleaved ordering.
    pub fn index(self, mode: usize) -> usize {
        match self {
            Quadrature::X => 2 * mode,
            Quadrature::P => 2 * mode + 1,
        }
    }
}

fn check_mode(mode: usize, num_modes: usize) -> Result<()> {
    if mode >= num_modes {
        return Err(Error::ModeOutOfRange { mode, num_modes });
    }
    Ok(())
}

fn check_pair(a: usize, b: usize, num_modes: usize) -> Result<()> {
    check_mode(a, num_modes)?;
    check_mode(b, num_modes)?;
    if a == b {
        return Err(Error::RepeatedMode(a));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Symplectic (unitary) operations
// ---------------------------------------------------------------------------

/// Phase-space action of a Gaussian unitary: `r ↦ S r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp<T> {
    pub matrix: Matrix<T>,
    pub displacement: Vec<T>,
}

impl<T: Scalar> SymplecticOp<T> {
    pub fn identity(num_modes: usize) -> Self {
        Self {
            matrix: Matrix::identity(2 * num_modes),
            displacement: vec![T::zero(); 2 * num_modes],
        }
    }

    pub fn num_modes(&self) -> usize {
        self.matrix.rows() / 2
    }

    pub fn displacement(num_modes: usize, mode: usize, dx: T, dp: T) -> Result<Self> {
        check_mode(mode, num_modes)?;
        let mut op = Self::identity(num_modes);
        op.displacement[2 * mode] = dx;
        op.displacement[2 * mode + 1] = dp;
        Ok(op)
    }

    /// Single-mode squeezer `diag(√V, 1/√V)`: takes vacuum to x-variance `V`.
    pub fn squeezer(num_modes: usize, mode: usize, variance: T) -> Result<Self> {
        check_mode(mode, num_modes)?;
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(invalid(
                "squeezing variance",
                variance.to_f64_lossy(),
                "must be positive and finite",
            ));
        }
        let mut op = Self::identity(num_modes);
        let s = variance.sqrt();
        op.matrix[(2 * mode, 2 * mode)] = s;
        op.matrix[(2 * mode + 1, 2 * mode + 1)] = s.recip();
        Ok(op)
    }

    /// Two-mode squeezer `a₁ ↦ cosh r a₁ − sinh r a₂†` with `e^{-2r} = V`.
    ///
    /// On vacuum, `(x₁+x₂)/√2` and `(p₁−p₂)/√2` end up with variance `V`.
    pub fn two_mode_squeezer(num_modes: usize, a: usize, b: usize, variance: T) -> Result<Self> {
        check_pair(a, b, num_modes)?;
        if !(variance > T::zero() && variance <= T::one()) {
            return Err(invalid(
                "two-mode squeezing variance",
                variance.to_f64_lossy(),
                "must lie in (0, 1]",
            ));
        }
        let r = -variance.ln() / T::lit(2.0);
        let (ch, sh) = (r.cosh(), r.sinh());
        let mut m = Matrix::identity(2 * num_modes);
        let (xa, pa, xb, pb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        m[(xa, xa)] = ch;
        m[(xa, xb)] = -sh;
        m[(pa, pa)] = ch;
        m[(pa, pb)] = sh;
        m[(xb, xb)] = ch;
        m[(xb, xa)] = -sh;
        m[(pb, pb)] = ch;
        m[(pb, pa)] = sh;
        Ok(Self {
            matrix: m,
            displacement: vec![T::zero(); 2 * num_modes],
        })
    }

    /// Beam splitter `a ↦ √t a + √(1−t) b`, `b ↦ √t b − √(1−t) a`.
    pub fn beam_splitter(num_modes: usize, a: usize, b: usize, transmittance: T) -> Result<Self> {
        check_pair(a, b, num_modes)?;
        if !(transmittance >= T::zero() && transmittance <= T::one()) {
            return Err(invalid(
                "transmittance",
                transmittance.to_f64_lossy(),
                "must lie in [0, 1]",
            ));
        }
        let tt = transmittance.sqrt();
        let rr = (T::one() - transmittance).sqrt();
        let mut m = Matrix::identity(2 * num_modes);
        for q in 0..2 {
            let (ia, ib) = (2 * a + q, 2 * b + q);
            m[(ia, ia)] = tt;
            m[(ia, ib)] = rr;
            m[(ib, ia)] = -rr;
            m[(ib, ib)] = tt;
        }
        Ok(Self {
            matrix: m,
            displacement: vec![T::zero(); 2 * num_modes],
        })
    }

    /// Two-mode Bogoliubov amplifier `a ↦ √g a + √(g−1) b†` and symmetrically for `b`.
    pub fn bogoliubov_amplifier(num_modes: usize, a: usize, b: usize, gain: T) -> Result<Self> {
        check_pair(a, b, num_modes)?;
        check_gain(gain)?;
        let sg = gain.sqrt();
        let sh = (gain - T::one()).sqrt();
        let mut m = Matrix::identity(2 * num_modes);
        let (xa, pa, xb, pb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        m[(xa, xa)] = sg;
        m[(xa, xb)] = sh;
        m[(pa, pa)] = sg;
        m[(pa, pb)] = -sh;
        m[(xb, xb)] = sg;
        m[(xb, xa)] = sh;
        m[(pb, pb)] = sg;
        m[(pb, pa)] = -sh;
        Ok(Self {
            matrix: m,
            displacement: vec![T::zero(); 2 * num_modes],
        })
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn symplectic_defect(&self) -> T {
        let w = omega::<T>(self.num_modes());
        self.matrix.congruence(&w).max_abs_diff(&w)
    }

    pub fn to_map(&self) -> GaussianMap<T> {
        let n = self.matrix.rows();
        GaussianMap {
            x: self.matrix.clone(),
            y: Matrix::zeros(n, n),
            d: self.displacement.clone(),
        }
    }
}

fn check_gain<T: Scalar>(gain: T) -> Result<()> {
    if !(gain >= T::one()) || !gain.is_finite() {
        return Err(invalid(
            "gain",
            gain.to_f64_lossy(),
            "must be finite and at least 1",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// General Gaussian maps
// ---------------------------------------------------------------------------

/// Affine Gaussian map `μ ↦ X μ + d`, `V ↦ X V Xᵀ + Y`.
///
/// `X` may be rectangular: embedding ancillas and tracing out modes are maps
/// too, as is the final selection of measured quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMap<T> {
    pub x: Matrix<T>,
    pub y: Matrix<T>,
    pub d: Vec<T>,
}

impl<T: Scalar> GaussianMap<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            x: Matrix::identity(dim),
            y: Matrix::zeros(dim, dim),
            d: vec![T::zero(); dim],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.x.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.x.rows()
    }

    /// Appends `extra` vacuum modes after the existing `num_modes`.
    pub fn append_vacuum(num_modes: usize, extra: usize) -> Self {
        let n_in = 2 * num_modes;
        let n_out = 2 * (num_modes + extra);
        let x = Matrix::from_fn(
            n_out,
            n_in,
            |i, j| if i == j { T::one() } else { T::zero() },
        );
        let y = Matrix::zeros(n_in, n_in).direct_sum(&Matrix::identity(2 * extra));
        Self {
            x,
            y,
            d: vec![T::zero(); n_out],
        }
    }

    /// Keeps the listed quadrature rows (in the given order) and drops the rest.
    pub fn select_quadratures(dim: usize, rows: &[usize]) -> Self {
        let x = Matrix::from_fn(rows.len(), dim, |i, j| {
            if rows[i] == j {
                T::one()
            } else {
                T::zero()
            }
        });
        Self {
            x,
            y: Matrix::zeros(rows.len(), rows.len()),
            d: vec![T::zero(); rows.len()],
        }
    }

    pub fn partial_trace(num_modes: usize, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::NoModes);
        }
        let mut rows = Vec::with_capacity(2 * keep.len());
        for &m in keep {
            check_mode(m, num_modes)?;
            if rows.contains(&(2 * m)) {
                return Err(Error::RepeatedMode(m));
            }
            rows.push(2 * m);
            rows.push(2 * m + 1);
        }
        Ok(Self::select_quadratures(2 * num_modes, &rows))
    }

    /// Single-mode phase-insensitive amplifier on `mode`, built literally as
    /// vacuum idler + two-mode Bogoliubov map + trace over the idler.
    pub fn single_mode_amplifier(num_modes: usize, mode: usize, gain: T) -> Result<Self> {
        check_mode(mode, num_modes)?;
        check_gain(gain)?;
        let embed = Self::append_vacuum(num_modes, 1);
        let amp = SymplecticOp::bogoliubov_amplifier(num_modes + 1, mode, num_modes, gain)?;
        let keep: Vec<usize> = (0..num_modes).collect();
        let trace = Self::partial_trace(num_modes + 1, &keep)?;
        Ok(embed.then(&amp.to_map()).then(&trace))
    }

    /// Composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        assert_eq!(
            self.output_dim(),
            next.input_dim(),
            "map composition dimension mismatch"
        );
        let x = &next.x * &self.x;
        let y = &next.x.congruence(&self.y) + &next.y;
        let mut d = next.x.mul_vec(&self.d);
        for (di, ni) in d.iter_mut().zip(&next.d) {
            *di = *di + *ni;
        }
        Self {
            x,
            y: y.symmetrize(),
            d,
        }
    }

    /// Pushes a mean vector through the map.
    pub fn apply_mean(&self, mean: &[T]) -> Vec<T> {
        let mut out = self.x.mul_vec(mean);
        for (o, d) in out.iter_mut().zip(&self.d) {
            *o = *o + *d;
        }
        out
    }

    /// Pushes a covariance through the map.
    pub fn apply_cov(&self, cov: &Matrix<T>) -> Matrix<T> {
        (&self.x.congruence(cov) + &self.y).symmetrize()
    }
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// Which modes a phase-insensitive amplifier acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmpTarget {
    /// One signal mode with a fresh vacuum idler that is traced out.
    Single(usize),
    /// Two signal modes that serve as each other's idler.
    Pair(usize, usize),
}

/// Amplification stage of a communication channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel<T> {
    Identity,
    /// Independent single-mode amplifiers with common gain.
    SingleMode {
        modes: Vec<usize>,
        gain: T,
    },
    /// One two-input amplifier across a pair of modes.
    JointPair {
        modes: (usize, usize),
        gain: T,
    },
}

impl<T: Scalar> Channel<T> {
    pub fn gain(&self) -> T {
        match self {
            Channel::Identity => T::one(),
            Channel::SingleMode { gain, .. } | Channel::JointPair { gain, .. } => *gain,
        }
    }

    pub fn to_map(&self, num_modes: usize) -> Result<GaussianMap<T>> {
        match self {
            Channel::Identity => Ok(GaussianMap::identity(2 * num_modes)),
            Channel::SingleMode { modes, gain } => {
                let mut map = GaussianMap::identity(2 * num_modes);
                for &m in modes {
                    map = map.then(&GaussianMap::single_mode_amplifier(num_modes, m, *gain)?);
                }
                Ok(map)
            }
            Channel::JointPair {
                modes: (a, b),
                gain,
            } => Ok(SymplecticOp::bogoliubov_amplifier(num_modes, *a, *b, *gain)?.to_map()),
        }
    }
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Outcome of a physicality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport<T> {
    pub passed: bool,
    /// Smallest symplectic eigenvalue, in units of the vacuum value.
    pub min_symplectic_eigenvalue: T,
    /// Smallest eigenvalue of `V + iΩ/2` (zero for a pure state).
    pub min_uncertainty_eigenvalue: T,
    pub asymmetry: T,
    /// Bound applied to the negative part of `min_uncertainty_eigenvalue`.
    pub tolerance: T,
}

/// Gaussian state of `M` bosonic modes: first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T> {
    num_modes: usize,
    mean: Vec<T>,
    cov: Matrix<T>,
}

impl<T: Scalar> GaussianState<T> {
    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::NoModes);
        }
        Ok(Self {
            num_modes,
            mean: vec![T::zero(); 2 * num_modes],
            cov: Matrix::identity(2 * num_modes),
        })
    }

    /// Assembles a state from raw moments. Dimensions and symmetry are
    /// checked; physicality is not (see [`GaussianState::check_physical`]).
    pub fn from_moments(mean: Vec<T>, cov: Matrix<T>) -> Result<Self> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "mean vector length {} is not a positive even number",
                mean.len()
            )));
        }
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{} but mean has length {}",
                cov.rows(),
                cov.cols(),
                mean.len()
            )));
        }
        if cov.max_abs_diff(&cov.transpose()) > T::lit(SYMMETRY_TOL) * T::one().max(cov.max_abs()) {
            return Err(Error::DimensionMismatch(
                "covariance is not symmetric".into(),
            ));
        }
        Ok(Self {
            num_modes: mean.len() / 2,
            mean,
            cov: cov.symmetrize(),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix<T> {
        &self.cov
    }

    pub fn apply_map(&self, map: &GaussianMap<T>) -> Result<Self> {
        if map.input_dim() != 2 * self.num_modes
            || map.output_dim() % 2 != 0
            || map.output_dim() == 0
        {
            return Err(Error::DimensionMismatch(format!(
                "map {}→{} applied to a {}-mode state",
                map.input_dim(),
                map.output_dim(),
                self.num_modes
            )));
        }
        Ok(Self {
            num_modes: map.output_dim() / 2,
            mean: map.apply_mean(&self.mean),
            cov: map.apply_cov(&self.cov),
        })
    }

    pub fn apply(&self, op: &SymplecticOp<T>) -> Result<Self> {
        self.apply_map(&op.to_map())
    }

    pub fn displace(&self, mode: usize, dx: T, dp: T) -> Result<Self> {
        self.apply(&SymplecticOp::displacement(self.num_modes, mode, dx, dp)?)
    }

    pub fn squeeze(&self, mode: usize, variance: T) -> Result<Self> {
        self.apply(&SymplecticOp::squeezer(self.num_modes, mode, variance)?)
    }

    pub fn two_mode_squeeze(&self, a: usize, b: usize, variance: T) -> Result<Self> {
        self.apply(&SymplecticOp::two_mode_squeezer(
            self.num_modes,
            a,
            b,
            variance,
        )?)
    }

    pub fn beam_splitter(&self, a: usize, b: usize, transmittance: T) -> Result<Self> {
        self.apply(&SymplecticOp::beam_splitter(
            self.num_modes,
            a,
            b,
            transmittance,
        )?)
    }

    pub fn amplify(&self, target: AmpTarget, gain: T) -> Result<Self> {
        let channel = match target {
            AmpTarget::Single(m) => Channel::SingleMode {
                modes: vec![m],
                gain,
            },
            AmpTarget::Pair(a, b) => Channel::JointPair {
                modes: (a, b),
                gain,
            },
        };
        self.apply_map(&channel.to_map(self.num_modes)?)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        self.apply_map(&GaussianMap::partial_trace(self.num_modes, keep)?)
    }

    /// Mean photon number of one mode, `(⟨x²⟩ + ⟨p²⟩)/4 − ½`.
    pub fn mode_photons(&self, mode: usize) -> T {
        let (ix, ip) = (2 * mode, 2 * mode + 1);
        let x2 = self.cov[(ix, ix)] + self.mean[ix] * self.mean[ix];
        let p2 = self.cov[(ip, ip)] + self.mean[ip] * self.mean[ip];
        (x2 + p2) / T::lit(4.0) - T::lit(0.5)
    }

    /// Total mean photon number summed over all modes.
    pub fn mean_photons(&self) -> T {
        (0..self.num_modes).map(|m| self.mode_photons(m)).sum()
    }

    /// Symplectic eigenvalues in ascending order, normalised so vacuum gives 1.
    ///
    /// Singular values of the antisymmetric `B = V^{1/2} J V^{1/2}`, each of
    /// which appears twice.
    pub fn symplectic_eigenvalues(&self) -> Vec<T> {
        symplectic_eigenvalues(&self.cov)
    }

    pub fn check_physical(&self) -> PhysicalityReport<T> {
        self.check_physical_with_commutator(T::lit(COMMUTATOR))
    }

    /// Physicality test `V + iΩ/2 ≥ 0` for a form `Ω` with the given
    /// commutator, via the real representation `[[V, -J], [J, V]]`.
    pub fn check_physical_with_commutator(&self, commutator: T) -> PhysicalityReport<T> {
        let dim = self.cov.rows();
        let norm = self.cov.max_abs();
        let asymmetry = self.cov.max_abs_diff(&self.cov.transpose());
        let j = omega_with::<T>(self.num_modes, commutator / T::lit(2.0));
        let v = self.cov.symmetrize();
        let real_form = Matrix::from_fn(2 * dim, 2 * dim, |r, c| match (r < dim, c < dim) {
            (true, true) => v[(r, c)],
            (false, false) => v[(r - dim, c - dim)],
            (true, false) => -j[(r, c - dim)],
            (false, true) => j[(r - dim, c)],
        });
        let (eig, _) = real_form.symmetric_eigen();
        let lowest = eig[0];
        let scale = commutator.abs() / T::lit(COMMUTATOR);
        let min_nu = self
            .symplectic_eigenvalues()
            .first()
            .copied()
            .unwrap_or(T::zero())
            / scale;
        let tolerance = T::lit(PHYSICAL_TOL).max(T::epsilon() * T::lit(64.0 * dim as f64) * norm);
        PhysicalityReport {
            passed: lowest >= -tolerance && asymmetry <= T::lit(SYMMETRY_TOL) * norm.max(T::one()),
            min_symplectic_eigenvalue: min_nu,
            min_uncertainty_eigenvalue: lowest,
            asymmetry,
            tolerance,
        }
    }
}

/// Symplectic eigenvalues of a covariance matrix (vacuum ↦ 1), ascending.
/// A covariance with a negative eigenvalue reports its negative part as a zero
/// eigenvalue, which always fails the physicality bound.
pub fn symplectic_eigenvalues<T: Scalar>(cov: &Matrix<T>) -> Vec<T> {
    let n = cov.rows() / 2;
    let j = omega_with::<T>(n, T::one());
    let root = cov.psd_sqrt();
    let b = &(&root * &j) * &root;
    // [[0, B], [Bᵀ, 0]] has eigenvalues ±σ(B) without squaring the spread
    let dim = 2 * n;
    let embedded = Matrix::from_fn(2 * dim, 2 * dim, |r, c| match (r < dim, c < dim) {
        (true, false) => b[(r, c - dim)],
        (false, true) => b[(c, r - dim)],
        _ => T::zero(),
    });
    let (eig, _) = embedded.symmetric_eigen();
    // the upper half holds each symplectic eigenvalue twice
    eig[dim..]
        .chunks(2)
        .map(|pair| {
            (pair.iter().copied().fold(T::zero(), |a, x| a + x) / T::lit(pair.len() as f64))
                .max(T::zero())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vacuum_has_identity_covariance() {
        let v = GaussianState::<f64>::vacuum(2).unwrap();
        assert_eq!(v.cov(), &Matrix::identity(4));
        assert!(v.mean().iter().all(|&m| m == 0.0));
        assert_eq!(GaussianState::<f64>::vacuum(1).unwrap().mean_photons(), 0.0);
        assert_eq!(GaussianState::<f64>::vacuum(0), Err(Error::NoModes));
    }

    #[test]
    fn displacement_moves_mean_only() {
        let v = GaussianState::<f64>::vacuum(1).unwrap();
        let d = v.displace(0, 2.0, 0.0).unwrap();
        assert_eq!(d.mean(), &[2.0, 0.0]);
        assert_eq!(d.cov(), v.cov());
        assert!(close(d.mean_photons(), 1.0, 1e-15));
        assert_eq!(v.displace(0, 0.0, 0.0).unwrap(), v);
        assert!(matches!(
            v.displace(1, 1.0, 0.0),
            Err(Error::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn squeezing_vacuum() {
        let v = GaussianState::<f64>::vacuum(1).unwrap();
        assert_eq!(v.squeeze(0, 1.0).unwrap(), v);
        let s = v.squeeze(0, 0.25).unwrap();
        assert!(close(s.cov()[(0, 0)], 0.25, 1e-15));
        assert!(close(s.cov()[(1, 1)], 4.0, 1e-15));
        for vg in [0.01, 0.3, 0.9, 2.5] {
            let s = v.squeeze(0, vg).unwrap();
            assert!(close(s.cov()[(0, 0)] * s.cov()[(1, 1)], 1.0, 1e-12));
            assert!(close(s.mean_photons(), (vg + 1.0 / vg - 2.0) / 4.0, 1e-12));
        }
        assert!(v.squeeze(0, 0.0).is_err());
        assert!(v.squeeze(0, -1.0).is_err());
    }

    #[test]
    fn two_mode_squeezing_correlations() {
        let v = GaussianState::<f64>::vacuum(2).unwrap();
        assert_eq!(
            v.two_mode_squeeze(0, 1, 1.0).unwrap().cov(),
            &Matrix::identity(4)
        );
        let t = v.two_mode_squeeze(0, 1, 0.5).unwrap();
        let c = t.cov();
        let var_sum_x = (c[(0, 0)] + c[(2, 2)] + 2.0 * c[(0, 2)]) / 2.0;
        let var_diff_x = (c[(0, 0)] + c[(2, 2)] - 2.0 * c[(0, 2)]) / 2.0;
        let var_diff_p = (c[(1, 1)] + c[(3, 3)] - 2.0 * c[(1, 3)]) / 2.0;
        assert!(close(var_sum_x, 0.5, 1e-14));
        assert!(close(var_diff_x, 2.0, 1e-14));
        assert!(close(var_diff_p, 0.5, 1e-14));
        for vv in [0.1, 0.5, 0.77] {
            let t = v.two_mode_squeeze(0, 1, vv).unwrap();
            let r = -f64::ln(vv) / 2.0;
            let expect = (vv + 1.0 / vv - 2.0) / 4.0;
            assert!(close(expect, r.sinh().powi(2), 1e-12));
            assert!(close(t.mode_photons(0), expect, 1e-12));
            assert!(close(t.mode_photons(1), expect, 1e-12));
        }
        assert!(v.two_mode_squeeze(0, 1, 1.5).is_err());
        assert!(v.two_mode_squeeze(0, 0, 0.5).is_err());
    }

    #[test]
    fn beam_splitter_routes_conjugate_means() {
        let v = GaussianState::<f64>::vacuum(2).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!(
                v.beam_splitter(0, 1, t)
                    .unwrap()
                    .cov()
                    .max_abs_diff(&Matrix::identity(4))
                    < 1e-15
            );
        }
        let (x, p) = (0.7, -1.3);
        let s = v.displace(0, x, p).unwrap().displace(1, x, -p).unwrap();
        assert_eq!(s.beam_splitter(0, 1, 1.0).unwrap().mean(), s.mean());
        let out = s.beam_splitter(0, 1, 0.5).unwrap();
        let r2 = 2f64.sqrt();
        assert!(close(out.mean()[0], r2 * x, 1e-14));
        assert!(close(out.mean()[1], 0.0, 1e-14));
        assert!(close(out.mean()[2], 0.0, 1e-14));
        // rotation convention: the second port carries (p₂ − p₁)/√2
        assert!(close(out.mean()[3], -r2 * p, 1e-14));
        assert!(v.beam_splitter(0, 1, 1.2).is_err());
    }

    #[test]
    fn single_mode_amplifier_adds_idler_noise() {
        let v = GaussianState::<f64>::vacuum(1).unwrap();
        let a = v.amplify(AmpTarget::Single(0), 2.0).unwrap();
        assert!(a.cov().max_abs_diff(&Matrix::from_diag(&[3.0, 3.0])) < 1e-14);
        let report = a.check_physical();
        assert!(report.passed);
        assert!(close(report.min_symplectic_eigenvalue, 3.0, 1e-12));
        let c = v.displace(0, 1.0, -2.0).unwrap();
        assert_eq!(c.amplify(AmpTarget::Single(0), 1.0).unwrap(), c);
        assert!(v.amplify(AmpTarget::Single(0), 0.5).is_err());
    }

    #[test]
    fn single_mode_amplifier_matches_closed_form() {
        let s = GaussianState::<f64>::vacuum(2)
            .unwrap()
            .two_mode_squeeze(0, 1, 0.3)
            .unwrap()
            .squeeze(1, 0.6)
            .unwrap()
            .displace(0, 1.0, 0.5)
            .unwrap();
        for g in [1.0, 1.5, 2.0, 10.0] {
            let a = s.amplify(AmpTarget::Single(0), g).unwrap();
            let v = s.cov();
            let mut expect = v.clone();
            let sg = f64::sqrt(g);
            for i in 0..4 {
                for j in 0..4 {
                    let fi = if i < 2 { sg } else { 1.0 };
                    let fj = if j < 2 { sg } else { 1.0 };
                    expect[(i, j)] = fi * fj * v[(i, j)];
                }
            }
            expect[(0, 0)] += g - 1.0;
            expect[(1, 1)] += g - 1.0;
            assert!(a.cov().max_abs_diff(&expect) < 1e-12, "g = {g}");
            assert!(close(a.mean()[0], sg, 1e-12));
            assert!(close(a.mean()[1], 0.5 * sg, 1e-12));
        }
    }

    #[test]
    fn joint_amplifier_preserves_bell_snr() {
        let (x, p) = (0.8, 0.3);
        let base = GaussianState::<f64>::vacuum(2)
            .unwrap()
            .two_mode_squeeze(0, 1, 0.4)
            .unwrap();
        let s = base.displace(0, x, p).unwrap().displace(1, x, -p).unwrap();
        let bell_x = |st: &GaussianState<f64>| {
            let c = st.cov();
            let m = st.mean();
            (
                (m[0] + m[2]) / 2f64.sqrt(),
                (c[(0, 0)] + c[(2, 2)] + 2.0 * c[(0, 2)]) / 2.0,
            )
        };
        let bell_p = |st: &GaussianState<f64>| {
            let c = st.cov();
            let m = st.mean();
            (
                (m[1] - m[3]) / 2f64.sqrt(),
                (c[(1, 1)] + c[(3, 3)] - 2.0 * c[(1, 3)]) / 2.0,
            )
        };
        let (mx0, vx0) = bell_x(&s);
        let (mp0, vp0) = bell_p(&s);
        for g in [1.0, 1.7, 5.0, 40.0] {
            let a = s.amplify(AmpTarget::Pair(0, 1), g).unwrap();
            let k = g.sqrt() + (g - 1.0).sqrt();
            let (mx, vx) = bell_x(&a);
            let (mp, vp) = bell_p(&a);
            assert!(close(mx, k * mx0, 1e-12));
            assert!(close(mp, k * mp0, 1e-12));
            assert!(close(vx, k * k * vx0, 1e-10));
            assert!(close(vp, k * k * vp0, 1e-10));
            assert!(close(mx * mx / vx, mx0 * mx0 / vx0, 1e-12));
        }
    }

    #[test]
    fn partial_trace_of_tms_is_thermal() {
        let vac2 = GaussianState::<f64>::vacuum(2).unwrap();
        assert_eq!(
            vac2.partial_trace(&[0]).unwrap(),
            GaussianState::vacuum(1).unwrap()
        );
        assert_eq!(vac2.partial_trace(&[0, 1]).unwrap(), vac2);
        let vv = 0.3;
        let t = vac2
            .two_mode_squeeze(0, 1, vv)
            .unwrap()
            .partial_trace(&[1])
            .unwrap();
        let th = (vv + 1.0 / vv) / 2.0;
        assert!(t.cov().max_abs_diff(&Matrix::from_diag(&[th, th])) < 1e-13);
        assert_eq!(vac2.partial_trace(&[]), Err(Error::NoModes));
    }

    #[test]
    fn physicality_detects_sub_vacuum_noise() {
        let v = GaussianState::<f64>::vacuum(1).unwrap();
        let r = v.check_physical();
        assert!(r.passed);
        assert!(close(r.min_symplectic_eigenvalue, 1.0, 1e-12));
        let bad =
            GaussianState::from_moments(vec![0.0, 0.0], Matrix::from_diag(&[0.5, 0.5])).unwrap();
        let r = bad.check_physical();
        assert!(!r.passed);
        assert!(close(r.min_symplectic_eigenvalue, 0.5, 1e-12));
        // a doubled commutator makes vacuum itself look unphysical
        assert!(!v.check_physical_with_commutator(4.0).passed);
        // the sign of Ω does not matter for a real covariance
        assert!(v.check_physical_with_commutator(-2.0).passed);
    }

    #[test]
    fn tms_then_balanced_splitter_is_product_of_squeezers() {
        let vv = 0.35;
        let out = GaussianState::<f64>::vacuum(2)
            .unwrap()
            .two_mode_squeeze(0, 1, vv)
            .unwrap()
            .beam_splitter(0, 1, 0.5)
            .unwrap();
        let expect = Matrix::from_diag(&[vv, 1.0 / vv, 1.0 / vv, vv]);
        assert!(out.cov().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn exposed_unitaries_are_symplectic() {
        let ops = [
            SymplecticOp::<f64>::squeezer(3, 1, 0.02).unwrap(),
            SymplecticOp::two_mode_squeezer(3, 0, 2, 0.05).unwrap(),
            SymplecticOp::beam_splitter(3, 2, 1, 0.37).unwrap(),
            SymplecticOp::bogoliubov_amplifier(3, 0, 1, 7.5).unwrap(),
            SymplecticOp::displacement(3, 2, 1.0, 3.0).unwrap(),
        ];
        for op in &ops {
            assert!(op.symplectic_defect() < 1e-10, "{op:?}");
        }
    }

    #[test]
    fn mean_photons_additive_and_passive_invariant() {
        let a = GaussianState::<f64>::vacuum(2)
            .unwrap()
            .squeeze(0, 0.4)
            .unwrap()
            .amplify(AmpTarget::Single(1), 3.0)
            .unwrap();
        let n0 = a.partial_trace(&[0]).unwrap().mean_photons();
        let n1 = a.partial_trace(&[1]).unwrap().mean_photons();
        assert!(close(a.mean_photons(), n0 + n1, 1e-13));
        let b = a.beam_splitter(0, 1, 0.23).unwrap();
        assert!(close(b.mean_photons(), a.mean_photons(), 1e-12));
    }

    #[test]
    fn works_in_single_precision() {
        let v = GaussianState::<f32>::vacuum(1).unwrap();
        let a = v.amplify(AmpTarget::Single(0), 2.0).unwrap();
        assert!((a.cov()[(0, 0)] - 3.0).abs() < 1e-5);
        assert!(a.check_physical().passed);
    }
}
