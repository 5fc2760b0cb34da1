//! Weak-drive photon statistics from the long-time perturbative amplitudes,
//! in the exact-sideband form and its Lamb-Dicke limit.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Frame, SystemParams};
use crate::operators::HilbertSpec;
use crate::scalar::Scalar;
use crate::specfun::franck_condon_matrix;

/// Drive-to-linewidth ratio above which the perturbative amplitudes are
/// no longer trustworthy.
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;

/// Largest weight the last tenth of a sideband sum may carry.
pub const SIDEBAND_TAIL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsMethod {
    ExactSideband,
    LambDicke,
    MasterEquation,
}

impl StatsMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            StatsMethod::ExactSideband => "exact-sideband",
            StatsMethod::LambDicke => "lamb-dicke",
            StatsMethod::MasterEquation => "master-equation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStats<T = f64> {
    pub p0: T,
    pub p1: T,
    pub p2: T,
    pub g2: T,
    pub method: StatsMethod,
}

impl<T: Scalar> PhotonStats<T> {
    fn from_probabilities(p1: T, p2: T, method: StatsMethod) -> Self {
        Self { p0: T::one() - p1 - p2, p1, p2, g2: T::lit(2.0) * p2 / (p1 * p1), method }
    }
}

/// Long-time amplitudes with the mechanics starting in `|0>`; `c1[n]` and
/// `c2[n]` multiply `|1, n~(1)>` and `|2, n~(2)>`. Global phases are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable<T = f64> {
    pub c0: Vec<Complex<T>>,
    pub c1: Vec<Complex<T>>,
    pub c2: Vec<Complex<T>>,
    /// `drive / kappa`.
    pub drive_ratio: T,
}

impl<T: Scalar> AmplitudeTable<T> {
    pub fn probability(&self, m: usize) -> T {
        let c = match m {
            0 => &self.c0,
            1 => &self.c1,
            2 => &self.c2,
            _ => return T::zero(),
        };
        c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// `sum_s sum_n |C_{s,n}|^2`; equals one up to `O(drive^2/kappa^2)`.
    pub fn norm_sum(&self) -> T {
        self.probability(0) + self.probability(1) + self.probability(2)
    }

    pub fn is_weak_drive(&self) -> bool {
        self.drive_ratio.to_f64().is_some_and(|r| r <= WEAK_DRIVE_LIMIT)
    }
}

fn tail_check<T: Scalar>(c: &[Complex<T>]) -> Result<()> {
    let total = c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    if total == T::zero() {
        return Ok(());
    }
    let start = c.len() - c.len().div_ceil(10);
    let tail = c[start..].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let frac = (tail / total).to_f64().unwrap_or(f64::NAN);
    if !(frac <= SIDEBAND_TAIL_LIMIT) {
        return Err(Error::NonConvergedSum { tail_fraction: frac, terms: c.len() });
    }
    Ok(())
}

/// Sideband sums truncated at `spec.n_mech` phonons.
pub fn longtime_amplitudes<T: Scalar>(params: &SystemParams<T>, spec: &HilbertSpec) -> Result<AmplitudeTable<T>> {
    let nm = spec.n_mech;
    params.validate(2)?;
    let half_kappa = params.kappa / T::lit(2.0);
    let fc10 = franck_condon_matrix(1, 0, nm, params)?;
    let fc21 = franck_condon_matrix(2, 1, nm, params)?;

    let mut den1 = Vec::with_capacity(nm);
    let mut den2 = Vec::with_capacity(nm);
    for n in 0..nm {
        den1.push(Complex::new(params.eigen_energy(1, n, Frame::Rotating)?, -half_kappa));
        den2.push(Complex::new(params.eigen_energy(2, n, Frame::Rotating)?, -params.kappa));
    }
    for (m, d) in den1.iter().map(|d| (1usize, d)).chain(den2.iter().map(|d| (2usize, d))) {
        if d.norm_sqr() == T::zero() {
            return Err(Error::SingularDenominator { photons: m, value: 0.0 });
        }
    }

    let omega = Complex::new(params.drive, T::zero());
    let mut c0 = vec![Complex::zero(); nm];
    c0[0] = Complex::new(T::one(), T::zero());
    let c1: Vec<Complex<T>> = (0..nm).map(|n| -omega * fc10[(n, 0)] / den1[n]).collect();

    let inner: Vec<Complex<T>> = (0..nm).map(|l| fc10[(l, 0)] / den1[l]).collect();
    let pref = omega * omega * T::lit(2.0).sqrt();
    let c2: Vec<Complex<T>> = (0..nm)
        .map(|n| {
            let s = (0..nm).fold(Complex::zero(), |acc, l| acc + fc21[(n, l)] * inner[l]);
            pref * s / den2[n]
        })
        .collect();

    tail_check(&c1)?;
    tail_check(&c2)?;
    // The inner sum over the one-photon manifold is truncated as well.
    tail_check(&inner)?;

    let drive_ratio = if params.kappa > T::zero() { params.drive / params.kappa } else { T::infinity() };
    Ok(AmplitudeTable { c0, c1, c2, drive_ratio })
}

/// `P1 = sum |C1|^2`, `P2 = sum |C2|^2`, `g2 = 2 P2 / P1^2`.
pub fn photon_stats_exact<T: Scalar>(params: &SystemParams<T>, spec: &HilbertSpec) -> Result<PhotonStats<T>> {
    let amps = longtime_amplitudes(params, spec)?;
    Ok(PhotonStats::from_probabilities(amps.probability(1), amps.probability(2), StatsMethod::ExactSideband))
}

/// Closed forms with all phonon sidebands dropped.
pub fn photon_stats_lamb_dicke<T: Scalar>(params: &SystemParams<T>) -> Result<PhotonStats<T>> {
    let d1 = params.delta_c - params.delta_m(1)?;
    let d2 = T::lit(2.0) * params.delta_c - params.delta_m(2)?;
    let k2 = params.kappa * params.kappa;
    let om2 = params.drive * params.drive;
    let l1 = d1 * d1 + k2 / T::lit(4.0);
    let l2 = d2 * d2 + k2;
    let p1 = om2 / l1;
    let p2 = T::lit(2.0) * om2 * om2 / (l2 * l1);
    Ok(PhotonStats {
        p0: T::one() - p1 - p2,
        p1,
        p2,
        g2: (T::lit(4.0) * d1 * d1 + k2) / l2,
        method: StatsMethod::LambDicke,
    })
}

/// Lamb-Dicke `g2` with the drive on the single-photon resonance.
pub fn g2_single_photon_resonance<T: Scalar>(params: &SystemParams<T>) -> Result<T> {
    let d = T::lit(2.0) * params.delta_m(1)? - params.delta_m(2)?;
    let k2 = params.kappa * params.kappa;
    Ok(k2 / (d * d + k2))
}

/// Lamb-Dicke `g2` with the drive on the two-photon resonance.
pub fn g2_two_photon_resonance<T: Scalar>(params: &SystemParams<T>) -> Result<T> {
    let d = params.delta_m(2)? - T::lit(2.0) * params.delta_m(1)?;
    let k2 = params.kappa * params.kappa;
    Ok((d * d + k2) / k2)
}
