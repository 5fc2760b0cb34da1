//! Physical parameters of the generalized optomechanical model and the
//! closed-form spectrum of its undriven Hamiltonian.
//!
//! All frequencies and rates are expressed in units of the bare mechanical
//! frequency, so `omega_m` is 1 for every preset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rates and frequencies of the cavity + mechanics system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T = f64> {
    /// Cavity frequency (lab frame).
    pub omega_c: T,
    /// Bare mechanical frequency.
    pub omega_m: T,
    /// Single-photon radiation-pressure coupling.
    pub g0: T,
    /// Cross-Kerr coupling.
    pub g_ck: T,
    /// Cavity energy decay rate.
    pub kappa: T,
    /// Mechanical damping rate.
    pub gamma_m: T,
    /// Thermal phonon occupation of the mechanical bath.
    pub nbar_m: T,
    /// Cavity-drive detuning `omega_c - omega_d`.
    pub delta_c: T,
    /// Drive amplitude.
    pub drive: T,
}

/// Energy reference for [`SystemParams::eigen_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Frame rotating at the drive frequency (`omega_c` replaced by `delta_c`).
    Rotating,
}

/// Resonant transition family `|0,0> -> |m, n~(m)>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resonance {
    SinglePhoton,
    TwoPhoton,
}

/// Closed-form spectral data of one eigenstate `|m>|n~(m)>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint<T = f64> {
    pub m: usize,
    pub n: usize,
    pub xi_m: T,
    pub delta_m: T,
    pub energy_lab: T,
    pub energy_rotating: T,
}

impl<T: Scalar> Default for SystemParams<T> {
    fn default() -> Self {
        Self::blockade_reference()
    }
}

impl<T: Scalar> SystemParams<T> {
    /// Photon-blockade reference point: g0 = 0.7, g_ck/g0 = 0.25,
    /// kappa = 0.1, gamma_m = 0.001, drive/kappa = 0.01, nbar = 0, driven
    /// on the zero-phonon single-photon resonance.
    pub fn blockade_reference() -> Self {
        let g0 = T::lit(0.7);
        let g_ck = T::lit(0.175);
        let kappa = T::lit(0.1);
        let mut p = Self {
            omega_c: T::lit(100.0),
            omega_m: T::one(),
            g0,
            g_ck,
            kappa,
            gamma_m: T::lit(0.001),
            nbar_m: T::zero(),
            delta_c: T::zero(),
            drive: kappa * T::lit(0.01),
        };
        p.delta_c = p.delta_m(1).expect("reference parameters are regular");
        p
    }

    /// Cat-state reference point: g0 = 1.2, g_ck/g0 = 0.25, omega_c = 100,
    /// closed system, no drive.
    pub fn cat_reference() -> Self {
        Self {
            omega_c: T::lit(100.0),
            omega_m: T::one(),
            g0: T::lit(1.2),
            g_ck: T::lit(0.3),
            kappa: T::zero(),
            gamma_m: T::zero(),
            nbar_m: T::zero(),
            delta_c: T::zero(),
            drive: T::zero(),
        }
    }

    /// Checks sign constraints and that `omega_m - m g_ck > 0` for every
    /// photon number up to `m_max`.
    pub fn validate(&self, m_max: usize) -> Result<()> {
        if !(self.omega_m > T::zero()) {
            return Err(Error::Domain(format!("omega_m must be positive, got {}", self.omega_m)));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
            ("nbar_m", self.nbar_m),
        ] {
            if !(v >= T::zero()) {
                return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        for m in 0..=m_max {
            self.shifted_frequency(m)?;
        }
        Ok(())
    }

    /// Mechanical frequency in the m-photon sector, `omega_m - m g_ck`.
    pub fn shifted_frequency(&self, m: usize) -> Result<T> {
        let w = self.omega_m - T::from_usize_lossy(m) * self.g_ck;
        if w > T::zero() {
            Ok(w)
        } else {
            Err(Error::SingularDenominator { photons: m, value: w.to_f64().unwrap_or(f64::NAN) })
        }
    }

    /// m-photon mechanical displacement `m g0 / (omega_m - m g_ck)`.
    pub fn xi_m(&self, m: usize) -> Result<T> {
        let w = self.shifted_frequency(m)?;
        Ok(T::from_usize_lossy(m) * self.g0 / w)
    }

    /// m-photon energy shift `g0^2 m^2 / (omega_m - m g_ck)`.
    pub fn delta_m(&self, m: usize) -> Result<T> {
        let w = self.shifted_frequency(m)?;
        let mf = T::from_usize_lossy(m);
        Ok(self.g0 * self.g0 * mf * mf / w)
    }

    pub fn eigen_energy(&self, m: usize, n: usize, frame: Frame) -> Result<T> {
        let w = self.shifted_frequency(m)?;
        let mf = T::from_usize_lossy(m);
        let carrier = match frame {
            Frame::Lab => self.omega_c,
            Frame::Rotating => self.delta_c,
        };
        Ok(mf * carrier + w * T::from_usize_lossy(n) - self.delta_m(m)?)
    }

    pub fn spectral_point(&self, m: usize, n: usize) -> Result<SpectralPoint<T>> {
        Ok(SpectralPoint {
            m,
            n,
            xi_m: self.xi_m(m)?,
            delta_m: self.delta_m(m)?,
            energy_lab: self.eigen_energy(m, n, Frame::Lab)?,
            energy_rotating: self.eigen_energy(m, n, Frame::Rotating)?,
        })
    }

    /// Detuning that makes `|0,0> -> |1,n~(1)>` (single) or
    /// `|0,0> -> |2,n~(2)>` (two-photon) resonant.
    pub fn optimal_detuning(&self, kind: Resonance, n: usize) -> Result<T> {
        let nf = T::from_usize_lossy(n);
        match kind {
            Resonance::SinglePhoton => Ok(self.delta_m(1)? - nf * self.shifted_frequency(1)?),
            Resonance::TwoPhoton => {
                Ok((self.delta_m(2)? - nf * self.shifted_frequency(2)?) / T::lit(2.0))
            }
        }
    }

    /// Copy of `self` with `delta_c` moved onto the zero-phonon
    /// single-photon resonance.
    pub fn at_single_photon_resonance(&self) -> Result<Self> {
        Ok(Self { delta_c: self.delta_m(1)?, ..*self })
    }
}

/// Coupling `g0/omega_m` at which the zero-phonon single-photon resonance
/// coincides with the n-th two-photon sideband, for cross-Kerr ratio
/// `g_ck/omega_m`.
pub fn resonance_curve_g0<T: Scalar>(n: usize, g_ck: T) -> Result<T> {
    if n == 0 {
        return Err(Error::Domain("sideband index must be >= 1".into()));
    }
    let one = T::one();
    let a = one - T::lit(2.0) * g_ck;
    if !(a > T::zero()) || g_ck < T::zero() {
        return Err(Error::Domain(format!("g_ck = {g_ck} outside [0, 1/2)")));
    }
    let half_n = T::from_usize_lossy(n) / T::lit(2.0);
    Ok((half_n * a * a * (one - g_ck)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table_params() -> SystemParams {
        SystemParams { g0: 0.7, g_ck: 0.175, ..SystemParams::blockade_reference() }
    }

    #[test]
    fn xi_and_delta_examples() {
        let p = table_params();
        assert_eq!(p.xi_m(0).unwrap(), 0.0);
        assert_abs_diff_eq!(p.xi_m(1).unwrap(), 28.0 / 33.0, epsilon = 1e-15);
        let no_kerr = SystemParams { g_ck: 0.0, ..p };
        assert_abs_diff_eq!(no_kerr.xi_m(1).unwrap(), 0.7, epsilon = 1e-15);
        assert_eq!(p.delta_m(0).unwrap(), 0.0);
        assert_abs_diff_eq!(p.delta_m(1).unwrap(), 0.5939394, epsilon = 1e-7);
        assert_abs_diff_eq!(p.delta_m(2).unwrap(), 3.0153846, epsilon = 1e-7);
        assert_abs_diff_eq!(p.delta_m(2).unwrap() / 2.0, 1.5077, epsilon = 1e-4);
    }

    #[test]
    fn singular_denominator() {
        let p = SystemParams { g_ck: 0.5, ..table_params() };
        assert!(p.xi_m(1).is_ok());
        assert!(matches!(p.xi_m(2), Err(Error::SingularDenominator { photons: 2, .. })));
        assert!(matches!(p.delta_m(3), Err(Error::SingularDenominator { .. })));
        assert!(p.validate(1).is_ok());
        assert!(p.validate(2).is_err());
    }

    #[test]
    fn validate_rejects_negative_rates() {
        let p = SystemParams { kappa: -0.1, ..table_params() };
        assert!(matches!(p.validate(3), Err(Error::Domain(_))));
    }

    #[test]
    fn eigen_energies() {
        let p = table_params();
        for n in 0..5 {
            assert_abs_diff_eq!(p.eigen_energy(0, n, Frame::Lab).unwrap(), n as f64, epsilon = 1e-14);
        }
        let d1 = SystemParams { delta_c: -0.231, ..p };
        assert_abs_diff_eq!(d1.eigen_energy(1, 1, Frame::Rotating).unwrap(), 0.0, epsilon = 1e-3);
        let p1 = SystemParams { delta_c: 1.183, ..p };
        assert_abs_diff_eq!(p1.eigen_energy(2, 1, Frame::Rotating).unwrap(), 0.0, epsilon = 2e-3);
        let sp = p.spectral_point(2, 3).unwrap();
        assert_abs_diff_eq!(sp.energy_lab, 200.0 + 0.65 * 3.0 - sp.delta_m, epsilon = 1e-12);
    }

    #[test]
    fn optimal_detunings_match_table() {
        let p = table_params();
        let single = [0.594, -0.231, -1.056, -1.881, -2.706, -3.531];
        for (n, want) in single.iter().enumerate() {
            let got = p.optimal_detuning(Resonance::SinglePhoton, n).unwrap();
            assert_abs_diff_eq!(got, *want, epsilon = 1e-3);
        }
        let two = [(0, 1.508), (1, 1.183), (2, 0.858), (3, 0.533), (5, -0.117), (8, -1.092)];
        for (n, want) in two {
            let got = p.optimal_detuning(Resonance::TwoPhoton, n).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-3);
        }
        let no_kerr = SystemParams { g_ck: 0.0, ..p };
        assert_abs_diff_eq!(
            no_kerr.optimal_detuning(Resonance::SinglePhoton, 0).unwrap(),
            0.49,
            epsilon = 1e-15
        );
    }

    #[test]
    fn resonance_curve_examples() {
        assert_abs_diff_eq!(resonance_curve_g0(2, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(resonance_curve_g0(1, 0.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(resonance_curve_g0(1, 0.1).unwrap(), 0.5366563, epsilon = 1e-7);
        assert!(resonance_curve_g0(1, 0.5).is_err());
        assert!(resonance_curve_g0(0, 0.1).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let p: SystemParams<f32> = SystemParams { g0: 0.7, g_ck: 0.175, ..SystemParams::blockade_reference() };
        assert!((p.delta_m(1).unwrap() - 0.5939394).abs() < 1e-6);
        assert!((resonance_curve_g0::<f32>(1, 0.1).unwrap() - 0.5366563).abs() < 1e-6);
    }
}
