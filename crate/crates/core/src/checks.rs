//! Numerical identity checks shared by the test suite and the command line.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catstate::{cat_snapshot, cat_state_vector, detection_time, Branch};
use crate::error::Result;
use crate::model::SystemParams;
use crate::operators::{propagator_direct, propagator_factored_with, HilbertSpec, NuSign, SpectralPropagator};
use crate::quasiprob::{perpendicular_angle, quadrature_dist_numeric, wigner_marginal, Axis};
use crate::specfun::franck_condon_matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Worst deviation found.
    pub value: f64,
    pub tol: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

/// Reference propagator for [`propagator_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorOracle {
    /// Exponential of the Hamiltonian truncated at the same cutoff.
    Truncated,
    /// Exact eigendecomposition of each photon-number block at a larger
    /// mechanical cutoff, compared on the same interior block.
    Spectral { n_mech: usize },
}

/// `n` evenly spaced times covering `[0, 2 pi / (omega_m - g_ck)]`.
pub fn revival_times(params: &SystemParams, n: usize) -> Result<Vec<f64>> {
    let period = 2.0 * PI / params.shifted_frequency(1)?;
    Ok((0..n).map(|k| period * k as f64 / (n.max(2) - 1) as f64).collect())
}

/// Largest deviation of the factored propagator from a reference on the
/// block `m <= max_photons`, `n <= max_phonons`.
pub fn propagator_check(
    params: &SystemParams,
    spec: HilbertSpec,
    times: &[f64],
    max_phonons: usize,
    nu_sign: NuSign,
    oracle: PropagatorOracle,
) -> Result<CheckResult> {
    let max_photons = spec.n_cav - 1;
    let spectral = match oracle {
        PropagatorOracle::Spectral { n_mech } => Some(SpectralPropagator::new(params, spec.n_cav, n_mech)?),
        PropagatorOracle::Truncated => None,
    };
    let mut worst = 0.0f64;
    for &t in times {
        let u = propagator_factored_with(t, params, spec, nu_sign)?;
        let reference = match &spectral {
            Some(sp) => sp.at(t, spec)?,
            None => propagator_direct(t, params, spec)?,
        };
        worst = worst.max(u.max_abs_diff_on(&reference, max_photons, max_phonons));
    }
    let name = match oracle {
        PropagatorOracle::Truncated => format!("propagator vs expm (n_mech {})", spec.n_mech),
        PropagatorOracle::Spectral { n_mech } => format!("propagator vs block eigendecomposition (n_mech {n_mech})"),
    };
    Ok(CheckResult { name, value: worst, tol: 1e-6 })
}

/// `max |U^dag U - I|` of the factored propagator on the zero- and
/// one-photon sectors, phonons `<= max_phonons`.
pub fn unitarity_check(params: &SystemParams, n_mech: usize, times: &[f64], max_phonons: usize) -> Result<CheckResult> {
    let spec = HilbertSpec::new(2, n_mech)?;
    let mut worst = 0.0f64;
    for &t in times {
        let u = propagator_factored_with(t, params, spec, NuSign::Minus)?;
        for m in 0..2 {
            let b = u.block(m, m);
            let g = b.adjoint() * &b;
            for i in 0..=max_phonons {
                for j in 0..=max_phonons {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g[(i, j)] - Complex64::new(want, 0.0)).norm());
                }
            }
        }
    }
    Ok(CheckResult { name: format!("factored propagator unitarity (n_mech {n_mech})"), value: worst, tol: 1e-8 })
}

/// `max_n |sum_l |<n~(1)|l~(0)>|^2 - 1|` for `n <= max_n`, summing `size` terms.
pub fn franck_condon_completeness(params: &SystemParams, max_n: usize, size: usize) -> Result<CheckResult> {
    let fc = franck_condon_matrix(1, 0, size, params)?;
    let worst = (0..=max_n)
        .map(|n| ((0..size).map(|l| fc[(n, l)].norm_sqr()).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(CheckResult { name: "Franck-Condon completeness".into(), value: worst, tol: 1e-8 })
}

/// Tomographic identity for the cat at the detection time: the Wigner
/// marginal perpendicular to `theta` against the quadrature distribution.
pub fn wigner_marginal_check(params: &SystemParams, branch: Branch, n_mech: usize) -> Result<CheckResult> {
    let ts = detection_time(params)?;
    let v = cat_state_vector(ts, branch, params, n_mech)?;
    let rho = &v * v.adjoint();
    let beta = cat_snapshot(ts, params)?.beta;
    let x = Axis::new(-3.0, 6.0, 37)?;
    let vs = Axis::new(-6.0, 6.0, 121)?;
    let mut worst = 0.0f64;
    for theta in [perpendicular_angle(beta), perpendicular_angle(beta) + PI / 2.0] {
        let m = wigner_marginal(&rho, theta, x, vs)?;
        let q = quadrature_dist_numeric(&rho, theta, x)?;
        worst = worst.max(m.max_abs_diff(&q)?);
    }
    Ok(CheckResult { name: format!("Wigner marginal vs quadrature ({branch})"), value: worst, tol: 1e-3 })
}
