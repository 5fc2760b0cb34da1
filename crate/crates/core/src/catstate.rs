//! Mechanical cat states from a cavity prepared in `(|0> + |1>)/sqrt 2`:
//! closed-form displacement and phase, conditional states after projecting
//! the cavity onto `|+->`, and their fidelities with the ideal cats.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{standard_channels, DensityMatrix, EvolveOptions, EvolveStats, LindbladSpec, Liouvillian};
use crate::model::SystemParams;
use crate::operators::{build_h_gom, expm, propagator_factored, HilbertSpec};
use crate::specfun::log_factorial;

/// `1 +- cos(theta) e^{-|beta|^2/2}` below this marks a degenerate branch.
pub const DEGENERATE_NORM: f64 = 1e-12;
/// Branch probability below which conditioning is refused.
pub const DEGENERATE_PROB: f64 = 1e-12;
/// Coherent-state weight allowed beyond the mechanical cutoff.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-8;

/// Outcome of projecting the cavity onto `|+-> = (|0> +- |1>)/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            _ => Err(Error::Domain(format!("unknown branch '{s}', expected plus or minus"))),
        }
    }
}

/// `pi / (omega_m - g_ck)`: first maximum of `|beta(t)|`.
pub fn detection_time(params: &SystemParams) -> Result<f64> {
    Ok(std::f64::consts::PI / params.shifted_frequency(1)?)
}

/// Mechanical displacement `beta(t)` of the one-photon branch and the
/// relative phase `theta(t)` it accrues.
pub fn beta_theta(t: f64, params: &SystemParams) -> Result<(Complex64, f64)> {
    let w = params.shifted_frequency(1)?;
    let beta = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * t)) * (params.g0 / w);
    let theta = -params.omega_c * t + params.g0 * params.g0 * (w * t - (w * t).sin()) / (w * w);
    Ok((beta, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatSnapshot {
    pub t: f64,
    pub beta: Complex64,
    pub theta: f64,
    /// `None` when the branch is degenerate.
    pub norm_plus: Option<f64>,
    pub norm_minus: Option<f64>,
    pub prob_plus: f64,
    pub prob_minus: f64,
}

impl CatSnapshot {
    pub fn norm(&self, branch: Branch) -> Result<f64> {
        let n = match branch {
            Branch::Plus => self.norm_plus,
            Branch::Minus => self.norm_minus,
        };
        n.ok_or_else(|| Error::DegenerateCat(2.0 * self.prob(branch)))
    }

    pub fn prob(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.prob_plus,
            Branch::Minus => self.prob_minus,
        }
    }
}

pub fn cat_snapshot(t: f64, params: &SystemParams) -> Result<CatSnapshot> {
    let (beta, theta) = beta_theta(t, params)?;
    let overlap = theta.cos() * (-beta.norm_sqr() / 2.0).exp();
    let norm = |q: f64| if q < DEGENERATE_NORM { None } else { Some((2.0 * q).powf(-0.5)) };
    Ok(CatSnapshot {
        t,
        beta,
        theta,
        norm_plus: norm(1.0 + overlap),
        norm_minus: norm(1.0 - overlap),
        prob_plus: (1.0 + overlap) / 2.0,
        prob_minus: (1.0 - overlap) / 2.0,
    })
}

/// Fock amplitudes `e^{-|beta|^2/2} beta^n / sqrt(n!)` for `n < n_max`,
/// with the weight left beyond the cutoff.
pub fn coherent_amplitudes(beta: Complex64, n_max: usize) -> (Vec<Complex64>, f64) {
    let r = beta.norm();
    let phase = if r > 0.0 { beta / r } else { Complex64::new(1.0, 0.0) };
    let mut out = Vec::with_capacity(n_max);
    let mut ph = Complex64::new(1.0, 0.0);
    let mut kept = 0.0;
    for n in 0..n_max {
        let mag = if n == 0 {
            (-r * r / 2.0).exp()
        } else if r == 0.0 {
            0.0
        } else {
            (-r * r / 2.0 + n as f64 * r.ln() - 0.5 * log_factorial::<f64>(n)).exp()
        };
        out.push(ph * mag);
        kept += mag * mag;
        ph *= phase;
    }
    (out, (1.0 - kept).max(0.0))
}

/// `N+-(|0> +- e^{i theta}|beta>)` in the mechanical Fock basis.
pub fn cat_state_vector(t: f64, branch: Branch, params: &SystemParams, n_mech: usize) -> Result<DVector<Complex64>> {
    let snap = cat_snapshot(t, params)?;
    let norm = snap.norm(branch)?;
    cat_vector_from(snap.beta, snap.theta, norm, branch, n_mech)
}

fn cat_vector_from(beta: Complex64, theta: f64, norm: f64, branch: Branch, n_mech: usize) -> Result<DVector<Complex64>> {
    let (coh, tail) = coherent_amplitudes(beta, n_mech);
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::TruncationLoss { weight: tail, limit: COHERENT_TAIL_LIMIT });
    }
    let rel = Complex64::from_polar(branch.sign(), theta);
    let mut v = DVector::from_iterator(n_mech, coh.into_iter().map(|c| rel * c));
    v[0] += 1.0;
    Ok(v * Complex64::new(norm, 0.0))
}

/// Result of propagating `(|0> + |1>)|0>/sqrt 2` with the factored
/// propagator and comparing to `[|0,0> + e^{i theta}|1>|beta>]/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedEvolutionReport {
    pub t: f64,
    /// Largest coefficient deviation of the factored propagator.
    pub max_deviation: f64,
    /// Same comparison using a direct exponential of the truncated
    /// one-photon block.
    pub direct_deviation: f64,
    /// Norm of the one-photon branch; `1/sqrt 2` for all t.
    pub one_photon_norm: f64,
}

impl ClosedEvolutionReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.direct_deviation <= tol
    }
}

pub fn closed_evolution_check(t: f64, params: &SystemParams, spec: HilbertSpec) -> Result<ClosedEvolutionReport> {
    let spec = HilbertSpec::new(spec.n_cav.max(2), spec.n_mech)?;
    let nm = spec.n_mech;
    let (beta, theta) = beta_theta(t, params)?;
    let (coh, tail) = coherent_amplitudes(beta, nm);
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::TruncationLoss { weight: tail, limit: COHERENT_TAIL_LIMIT });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut expected = DVector::<Complex64>::zeros(spec.dim());
    expected[spec.index(0, 0)] = Complex64::new(h, 0.0);
    for (n, c) in coh.iter().enumerate() {
        expected[spec.index(1, n)] = Complex64::from_polar(h, theta) * c;
    }
    let mut psi0 = DVector::<Complex64>::zeros(spec.dim());
    psi0[spec.index(0, 0)] = Complex64::new(h, 0.0);
    psi0[spec.index(1, 0)] = Complex64::new(h, 0.0);

    let u = propagator_factored(t, params, spec)?;
    let psi = &u.matrix * &psi0;
    let max_deviation = (&psi - &expected).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let one_photon_norm = (0..nm).map(|n| psi[spec.index(1, n)].norm_sqr()).sum::<f64>().sqrt();

    let hg = build_h_gom(spec, params);
    let mut direct = DVector::<Complex64>::zeros(spec.dim());
    for m in 0..2 {
        let blk = expm(&hg.block(m, m), Complex64::new(0.0, -t))?;
        for n in 0..nm {
            direct[spec.index(m, n)] = blk[(n, 0)] * Complex64::new(h, 0.0);
        }
    }
    let direct_deviation = (&direct - &expected).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    Ok(ClosedEvolutionReport { t, max_deviation, direct_deviation, one_photon_norm })
}

/// Mechanical state conditioned on detecting the cavity in `|+->`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub branch: Branch,
    /// `Theta_{jk} = rho_{0j,0k} + rho_{1j,1k} +- (rho_{0j,1k} + rho_{1j,0k})`.
    pub theta_matrix: DMatrix<Complex64>,
    /// `Theta / (2 P)`.
    pub rho_b: DMatrix<Complex64>,
    pub prob: f64,
}

fn theta_matrix(rho: &DensityMatrix, branch: Branch) -> Result<DMatrix<Complex64>> {
    let spec = rho.spec;
    if spec.n_cav < 2 {
        return Err(Error::InvalidSpace("conditioning needs at least two photon levels".into()));
    }
    let nm = spec.n_mech;
    let blk = |m: usize, mp: usize| rho.rho.view((m * nm, mp * nm), (nm, nm));
    let s = Complex64::new(branch.sign(), 0.0);
    Ok(blk(0, 0) + blk(1, 1) + (blk(0, 1) + blk(1, 0)) * s)
}

/// `(P+, P-)` for any two-mode state.
pub fn branch_probabilities(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let p = |b| theta_matrix(rho, b).map(|th| th.trace().re / 2.0);
    Ok((p(Branch::Plus)?, p(Branch::Minus)?))
}

pub fn condition_branch(rho: &DensityMatrix, branch: Branch) -> Result<ConditionalState> {
    let theta_matrix = theta_matrix(rho, branch)?;
    let prob = theta_matrix.trace().re / 2.0;
    if !(prob >= DEGENERATE_PROB) {
        return Err(Error::DegenerateBranch(prob));
    }
    let rho_b = &theta_matrix / Complex64::new(2.0 * prob, 0.0);
    Ok(ConditionalState { branch, theta_matrix, rho_b, prob })
}

pub fn condition_open_system(rho: &DensityMatrix) -> Result<(ConditionalState, ConditionalState)> {
    Ok((condition_branch(rho, Branch::Plus)?, condition_branch(rho, Branch::Minus)?))
}

/// `<Phi+-(t)| rho_b |Phi+-(t)>` as the double sum over `Theta` with
/// coherent-state coefficients.
pub fn fidelity_vs_target(cond: &ConditionalState, t: f64, params: &SystemParams) -> Result<f64> {
    let snap = cat_snapshot(t, params)?;
    let norm = snap.norm(cond.branch)?;
    let nm = cond.theta_matrix.nrows();
    let (coh, tail) = coherent_amplitudes(snap.beta, nm);
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::TruncationLoss { weight: tail, limit: COHERENT_TAIL_LIMIT });
    }
    let s = cond.branch.sign();
    let left: Vec<Complex64> = (0..nm)
        .map(|j| {
            let d = if j == 0 { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) + Complex64::from_polar(s, -snap.theta) * coh[j].conj()
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nm {
        for k in 0..nm {
            acc += cond.theta_matrix[(j, k)] * left[j] * left[k].conj();
        }
    }
    Ok((acc * (norm * norm / (2.0 * cond.prob))).re)
}

/// Same fidelity by contracting `rho_b` with the target vector.
pub fn fidelity_direct(cond: &ConditionalState, t: f64, params: &SystemParams) -> Result<f64> {
    let phi = cat_state_vector(t, cond.branch, params, cond.rho_b.nrows())?;
    Ok((phi.adjoint() * &cond.rho_b * &phi)[(0, 0)].re)
}

/// Initial state `(|0> + |1>)|0>/sqrt 2`.
pub fn cat_initial_state(spec: HilbertSpec) -> DensityMatrix {
    let mut rho = DensityMatrix::vacuum(spec);
    let (a, b) = (spec.index(0, 0), spec.index(1, 0));
    for (i, j) in [(a, a), (a, b), (b, a), (b, b)] {
        rho.rho[(i, j)] = Complex64::new(0.5, 0.0);
    }
    rho
}

/// Master equation with `H_gom` and the standard channels, integrated in the
/// frame rotating at `omega_c` (the drive is ignored).
pub fn cat_lindblad(spec: HilbertSpec, params: &SystemParams) -> Result<LindbladSpec> {
    params.validate(spec.n_cav - 1)?;
    let rotating = SystemParams { omega_c: 0.0, ..*params };
    LindbladSpec::new(build_h_gom(spec, &rotating), standard_channels(spec, params))
}

/// Open-system evolution of the cat protocol; `observe` receives lab-frame
/// states at every time of `times`.
///
/// `a^dag a` commutes with `H_gom` and the dissipators are invariant under
/// `a -> a e^{-i phi}`, so the `omega_c a^dag a` term is removed during
/// integration and restored exactly as the phase `e^{-i omega_c t (m - m')}`.
pub fn evolve_cat<F>(params: &SystemParams, spec: HilbertSpec, times: &[f64], mut observe: F) -> Result<EvolveStats>
where
    F: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
{
    let ls = cat_lindblad(spec, params)?;
    let liou = Liouvillian::new(&ls);
    let rho0 = cat_initial_state(spec);
    let nm = spec.n_mech;
    liou.evolve_observe(&rho0, times, &EvolveOptions::default(), |k, t, r| {
        let mut lab = r.clone();
        for i in 0..spec.dim() {
            for j in 0..spec.dim() {
                let dm = (i / nm) as f64 - (j / nm) as f64;
                if dm != 0.0 {
                    lab.rho[(i, j)] *= Complex64::from_polar(1.0, -params.omega_c * t * dm);
                }
            }
        }
        observe(k, t, &lab)
    })
}

/// Lab-frame state at `t`.
pub fn open_cat_state(params: &SystemParams, spec: HilbertSpec, t: f64) -> Result<DensityMatrix> {
    let mut out = None;
    evolve_cat(params, spec, &[0.0, t], |k, _, r| {
        if k == 1 {
            out = Some(r.clone());
        }
        Ok(())
    })?;
    Ok(out.unwrap_or_else(|| cat_initial_state(spec)))
}

/// One time point of an open-system cat run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatSeriesPoint {
    pub t: f64,
    pub prob_plus: f64,
    pub prob_minus: f64,
    /// `None` where the branch (or its target) is degenerate.
    pub fidelity_plus: Option<f64>,
    pub fidelity_minus: Option<f64>,
}

pub fn open_cat_series(params: &SystemParams, spec: HilbertSpec, times: &[f64]) -> Result<Vec<CatSeriesPoint>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_cat(params, spec, times, |_, t, rho| {
        let (pp, pm) = branch_probabilities(rho)?;
        let fid = |b: Branch| -> Result<Option<f64>> {
            match condition_branch(rho, b) {
                Ok(c) => match fidelity_vs_target(&c, t, params) {
                    Ok(f) => Ok(Some(f)),
                    Err(Error::DegenerateCat(_)) => Ok(None),
                    Err(e) => Err(e),
                },
                Err(Error::DegenerateBranch(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        out.push(CatSeriesPoint { t, prob_plus: pp, prob_minus: pm, fidelity_plus: fid(Branch::Plus)?, fidelity_minus: fid(Branch::Minus)? });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn fig6() -> SystemParams {
        SystemParams::cat_reference()
    }

    #[test]
    fn beta_theta_values() {
        let p = fig6();
        let (b0, th0) = beta_theta(0.0, &p).unwrap();
        assert_eq!((b0.norm(), th0), (0.0, 0.0));
        let ts = detection_time(&p).unwrap();
        assert_abs_diff_eq!(ts, PI / 0.7, epsilon = 1e-15);
        let (b, _) = beta_theta(ts, &p).unwrap();
        assert_abs_diff_eq!(b.norm(), 2.4 / 0.7, epsilon = 1e-12);
        assert!(b.norm() > 3.0);
        let (b2, _) = beta_theta(2.0 * ts, &p).unwrap();
        assert!(b2.norm() < 1e-12);
    }

    #[test]
    fn snapshot_probabilities() {
        let p = fig6();
        let s0 = cat_snapshot(0.0, &p).unwrap();
        assert_eq!((s0.prob_plus, s0.prob_minus), (1.0, 0.0));
        assert!(matches!(s0.norm(Branch::Minus), Err(Error::DegenerateCat(_))));
        assert!(matches!(cat_state_vector(0.0, Branch::Minus, &p, 10), Err(Error::DegenerateCat(_))));
        let ss = cat_snapshot(detection_time(&p).unwrap(), &p).unwrap();
        assert!((ss.prob_plus - 0.5).abs() < 3e-3 && (ss.prob_minus - 0.5).abs() < 3e-3);
        for k in 0..50 {
            let s = cat_snapshot(k as f64 * 0.19, &p).unwrap();
            assert_abs_diff_eq!(s.prob_plus + s.prob_minus, 1.0, epsilon = 1e-15);
            for b in [Branch::Plus, Branch::Minus] {
                if let Ok(n) = s.norm(b) {
                    assert_abs_diff_eq!(s.prob(b), 1.0 / (4.0 * n * n), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn cat_vectors() {
        let p = fig6();
        let ts = detection_time(&p).unwrap();
        let vp = cat_state_vector(ts, Branch::Plus, &p, 60).unwrap();
        let vm = cat_state_vector(ts, Branch::Minus, &p, 60).unwrap();
        assert_abs_diff_eq!(vp.norm(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vm.norm(), 1.0, epsilon = 1e-10);
        // <Phi+|Phi-> = -2i N+ N- Im(e^{i theta} <0|beta>).
        let s = cat_snapshot(ts, &p).unwrap();
        let c0 = (-s.beta.norm_sqr() / 2.0).exp();
        let want = Complex64::new(0.0, -2.0 * (Complex64::from_polar(1.0, s.theta) * c0).im)
            * (s.norm_plus.unwrap() * s.norm_minus.unwrap());
        let got = (vp.adjoint() * &vm)[(0, 0)];
        assert!((got - want).norm() < 1e-12);

        let z = cat_state_vector(0.0, Branch::Plus, &p, 8).unwrap();
        assert_abs_diff_eq!(z[0].re, 1.0, epsilon = 1e-15);
        assert!(matches!(cat_state_vector(ts, Branch::Plus, &p, 15), Err(Error::TruncationLoss { .. })));
    }

    #[test]
    fn closed_evolution_consistency() {
        let p = fig6();
        let spec = HilbertSpec::cat_default();
        let ts = detection_time(&p).unwrap();
        for t in [0.0, 0.9, ts, 1.7 * ts] {
            let r = closed_evolution_check(t, &p, spec).unwrap();
            assert!(r.passed(1e-8), "{r:?}");
            assert_abs_diff_eq!(r.one_photon_norm, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
        }
    }

    #[test]
    fn conditioning_pure_closed_state() {
        let p = fig6();
        let spec = HilbertSpec::new(2, 40).unwrap();
        let t = 2.2;
        let snap = cat_snapshot(t, &p).unwrap();
        let mut psi = DVector::<Complex64>::zeros(spec.dim());
        let (coh, _) = coherent_amplitudes(snap.beta, 40);
        psi[0] = Complex64::new(0.5f64.sqrt(), 0.0);
        for n in 0..40 {
            psi[spec.index(1, n)] = Complex64::from_polar(0.5f64.sqrt(), snap.theta) * coh[n];
        }
        let rho = DensityMatrix::from_pure(spec, &psi).unwrap();
        let (cp, cm) = condition_open_system(&rho).unwrap();
        assert_abs_diff_eq!(cp.prob, snap.prob_plus, epsilon = 1e-12);
        assert_abs_diff_eq!(cp.prob + cm.prob, 1.0, epsilon = 1e-12);
        for c in [&cp, &cm] {
            assert_abs_diff_eq!(c.rho_b.trace().re, 1.0, epsilon = 1e-12);
            let f = fidelity_vs_target(c, t, &p).unwrap();
            assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(fidelity_direct(c, t, &p).unwrap(), f, epsilon = 1e-12);
        }
        assert!(matches!(
            condition_branch(&cat_initial_state(spec), Branch::Minus),
            Err(Error::DegenerateBranch(_))
        ));
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("plus".parse::<Branch>().unwrap(), Branch::Plus);
        assert_eq!("-".parse::<Branch>().unwrap(), Branch::Minus);
        assert!("up".parse::<Branch>().is_err());
    }
}
