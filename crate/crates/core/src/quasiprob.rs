//! Wigner functions and rotated-quadrature distributions of the mechanical
//! mode, in closed form for pure cats and from a Fock-basis density matrix.
//!
//! Convention: `W(eta) = (2/pi) Tr[rho D(eta) (-1)^{b^dag b} D^dag(eta)]`,
//! normalized to one over `d Re(eta) d Im(eta)`. A coherent state `|beta>`
//! peaks at `eta = beta`.

use std::f64::consts::{FRAC_2_PI, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catstate::{cat_snapshot, Branch};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::specfun::{displacement_matrix, log_factorial, oscillator_wavefunctions};

/// Largest population allowed in the top Fock level of a density matrix.
pub const TOP_LEVEL_LIMIT: f64 = 1e-6;
/// Coherent-state series terms below this are dropped.
pub const SERIES_CUTOFF: f64 = 1e-14;

/// Uniform sampling of a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || n < 2 || max <= min {
            return Err(Error::Domain(format!("bad axis [{min}, {max}] with {n} points")));
        }
        Ok(Axis { min, max, n })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// `[-2, 5] x [-3.5, 3.5]` at 141 x 141 points.
pub fn default_wigner_axes() -> (Axis, Axis) {
    (Axis { min: -2.0, max: 5.0, n: 141 }, Axis { min: -3.5, max: 3.5, n: 141 })
}

/// `X in [-4, 7]` at 551 points.
pub fn default_quadrature_axis() -> Axis {
    Axis { min: -4.0, max: 7.0, n: 551 }
}

/// Smallest box containing `0` and `beta` padded by `margin` on every side,
/// sampled at (at most) `step`.
pub fn covering_wigner_axes(beta: Complex64, margin: f64, step: f64) -> Result<(Axis, Axis)> {
    let axis = |a: f64, b: f64| {
        let (lo, hi) = (a.min(b) - margin, a.max(b) + margin);
        Axis::new(lo, hi, ((hi - lo) / step).ceil() as usize + 1)
    };
    Ok((axis(0.0, beta.re)?, axis(0.0, beta.im)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridKind {
    Wigner,
    Quadrature { theta: f64 },
}

/// Sampled `W(eta)` (two axes) or `P[X(theta)]` (one axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub kind: GridKind,
    /// `Re(eta)` for Wigner grids, `X` for quadratures.
    pub re: Axis,
    pub im: Option<Axis>,
    /// Row-major in `im`: index `j * re.n + i`.
    pub values: Vec<f64>,
    /// Largest imaginary part discarded while evaluating.
    pub max_imag: f64,
}

impl PhaseSpaceGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.re.n + i_re]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoid rule over the grid.
    pub fn integral(&self) -> f64 {
        let w = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let nr = self.re.n;
        match self.im {
            None => self.values.iter().enumerate().map(|(i, v)| w(i, nr) * v).sum::<f64>() * self.re.step(),
            Some(im) => {
                let mut s = 0.0;
                for j in 0..im.n {
                    for i in 0..nr {
                        s += w(i, nr) * w(j, im.n) * self.values[j * nr + i];
                    }
                }
                s * self.re.step() * im.step()
            }
        }
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceGrid) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), found: other.values.len() });
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
    }
}

fn wigner_grid_from(re: Axis, im: Axis, mut f: impl FnMut(Complex64) -> Result<Complex64>) -> Result<PhaseSpaceGrid> {
    let mut values = Vec::with_capacity(re.n * im.n);
    let mut max_imag = 0.0f64;
    for j in 0..im.n {
        let y = im.point(j);
        for i in 0..re.n {
            let w = f(Complex64::new(re.point(i), y))?;
            max_imag = max_imag.max(w.im.abs());
            values.push(w.re);
        }
    }
    Ok(PhaseSpaceGrid { kind: GridKind::Wigner, re, im: Some(im), values, max_imag })
}

/// Closed-form Wigner function of the cat branch at time `t`:
/// `(2N^2/pi)[e^{-2|eta|^2} + e^{-2|beta-eta|^2} +- 2 Re(e^{-i theta} e^{-|beta|^2/2 + 2 beta^* eta - 2|eta|^2})]`.
pub fn wigner_cat_analytic(t: f64, branch: Branch, params: &SystemParams, re: Axis, im: Axis) -> Result<PhaseSpaceGrid> {
    let snap = cat_snapshot(t, params)?;
    let norm = snap.norm(branch)?;
    let (beta, theta) = (snap.beta, snap.theta);
    let pre = 2.0 * norm * norm / PI;
    let s = branch.sign();
    wigner_grid_from(re, im, |eta| {
        let cross = Complex64::from_polar(1.0, -theta)
            * (-beta.norm_sqr() / 2.0 + 2.0 * beta.conj() * eta - 2.0 * eta.norm_sqr()).exp();
        let w = (-2.0 * eta.norm_sqr()).exp() + (-2.0 * (beta - eta).norm_sqr()).exp() + 2.0 * s * cross.re;
        Ok(Complex64::new(pre * w, 0.0))
    })
}

fn check_top_level(rho: &DMatrix<Complex64>) -> Result<()> {
    if !rho.is_square() || rho.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: rho.ncols() });
    }
    let n = rho.nrows();
    let top = rho[(n - 1, n - 1)].re;
    if top > TOP_LEVEL_LIMIT {
        return Err(Error::TruncationLoss { weight: top, limit: TOP_LEVEL_LIMIT });
    }
    Ok(())
}

/// `W(eta)` of a mechanical density matrix, `(2/pi) sum_jk rho_jk (-1)^j <k|D(2 eta)|j>`.
/// The imaginary part is returned, not discarded.
pub fn wigner_point(rho: &DMatrix<Complex64>, eta: Complex64) -> Complex64 {
    let n = rho.nrows();
    let d = displacement_matrix(n, n, eta * 2.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..n {
            row += rho[(j, k)] * d[(k, j)];
        }
        if j % 2 == 0 {
            acc += row;
        } else {
            acc -= row;
        }
    }
    acc * FRAC_2_PI
}

pub fn wigner_numeric(rho: &DMatrix<Complex64>, re: Axis, im: Axis) -> Result<PhaseSpaceGrid> {
    check_top_level(rho)?;
    wigner_grid_from(re, im, |eta| Ok(wigner_point(rho, eta)))
}

/// `ln |e^{-|beta|^2/2} beta^n / sqrt(n!)|`.
fn ln_coherent_mag(r: f64, n: usize) -> f64 {
    if n == 0 {
        -r * r / 2.0
    } else {
        -r * r / 2.0 + n as f64 * r.ln() - 0.5 * log_factorial::<f64>(n)
    }
}

/// Number of Fock terms of `|beta>` kept before they fall below the cutoff.
fn coherent_terms(r: f64) -> usize {
    if r == 0.0 {
        return 1;
    }
    let mut n = (r * r).ceil() as usize;
    while ln_coherent_mag(r, n) > SERIES_CUTOFF.ln() {
        n += 1;
    }
    n
}

/// `P[X(theta)]` for the cat branch at time `t`:
/// `N^2 |<X|0> +- e^{i theta_t} <X(theta)|beta>|^2`.
pub fn quadrature_dist_cat(t: f64, branch: Branch, theta: f64, params: &SystemParams, x: Axis) -> Result<PhaseSpaceGrid> {
    let snap = cat_snapshot(t, params)?;
    let norm = snap.norm(branch)?;
    let r = snap.beta.norm();
    let count = coherent_terms(r);
    let step = Complex64::from_polar(1.0, snap.beta.arg() - theta);
    let coeffs: Vec<Complex64> = (0..count)
        .map(|n| step.powu(n as u32) * ln_coherent_mag(r, n).exp() * Complex64::from_polar(branch.sign(), snap.theta))
        .collect();
    let values = x
        .points()
        .into_iter()
        .map(|xv| {
            let psi = oscillator_wavefunctions(count, xv);
            let mut amp = Complex64::new(psi[0], 0.0);
            for (c, p) in coeffs.iter().zip(&psi) {
                amp += c * p;
            }
            norm * norm * amp.norm_sqr()
        })
        .collect();
    Ok(PhaseSpaceGrid { kind: GridKind::Quadrature { theta }, re: x, im: None, values, max_imag: 0.0 })
}

/// `P[X(theta)] = sum_jk rho_jk <X(theta)|j><k|X(theta)>` with
/// `<X(theta)|n> = e^{-i n theta} psi_n(X)`.
pub fn quadrature_point(rho: &DMatrix<Complex64>, theta: f64, xv: f64) -> Complex64 {
    let n = rho.nrows();
    let psi = oscillator_wavefunctions(n, xv);
    let v: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(psi[j], -(j as f64) * theta)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..n {
            row += rho[(j, k)] * v[k].conj();
        }
        acc += v[j] * row;
    }
    acc
}

pub fn quadrature_dist_numeric(rho: &DMatrix<Complex64>, theta: f64, x: Axis) -> Result<PhaseSpaceGrid> {
    check_top_level(rho)?;
    let mut max_imag = 0.0f64;
    let values = x
        .points()
        .into_iter()
        .map(|xv| {
            let p = quadrature_point(rho, theta, xv);
            max_imag = max_imag.max(p.im.abs());
            p.re
        })
        .collect();
    Ok(PhaseSpaceGrid { kind: GridKind::Quadrature { theta }, re: x, im: None, values, max_imag })
}

/// Tomographic projection of the Wigner function,
/// `P(X) = (1/sqrt 2) int W(e^{i theta}(X/sqrt 2 + i v)) dv`, by the
/// trapezoid rule over `v`.
pub fn wigner_marginal(rho: &DMatrix<Complex64>, theta: f64, x: Axis, v: Axis) -> Result<PhaseSpaceGrid> {
    check_top_level(rho)?;
    let rot = Complex64::from_polar(1.0, theta);
    let h = v.step();
    let mut max_imag = 0.0f64;
    let mut values = Vec::with_capacity(x.n);
    for xv in x.points() {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..v.n {
            let wt = if j == 0 || j + 1 == v.n { 0.5 } else { 1.0 };
            s += wigner_point(rho, rot * Complex64::new(xv / 2f64.sqrt(), v.point(j))) * wt;
        }
        let p = s * h / 2f64.sqrt();
        max_imag = max_imag.max(p.im.abs());
        values.push(p.re);
    }
    Ok(PhaseSpaceGrid { kind: GridKind::Quadrature { theta }, re: x, im: None, values, max_imag })
}

/// Quadrature angle perpendicular to the separation of the cat components,
/// `arg(beta) - pi/2`.
pub fn perpendicular_angle(beta: Complex64) -> f64 {
    beta.arg() - PI / 2.0
}

/// `max - min` of `W` along the line through `beta/2` perpendicular to
/// `beta`, for `|v| <= half_width`.
pub fn fringe_contrast(rho: &DMatrix<Complex64>, beta: Complex64, half_width: f64, samples: usize) -> Result<f64> {
    if beta.norm() == 0.0 {
        return Err(Error::Domain("fringe contrast needs a nonzero displacement".into()));
    }
    check_top_level(rho)?;
    let dir = Complex64::new(0.0, 1.0) * beta / beta.norm();
    let axis = Axis::new(-half_width, half_width, samples)?;
    let ws: Vec<f64> = axis.points().into_iter().map(|v| wigner_point(rho, beta / 2.0 + dir * v).re).collect();
    Ok(crate::analysis::peak_to_peak(&ws))
}

/// `max - min` of `P[X(theta)]` over `|X| <= half_width`.
pub fn oscillation_amplitude(rho: &DMatrix<Complex64>, theta: f64, half_width: f64, samples: usize) -> Result<f64> {
    let grid = quadrature_dist_numeric(rho, theta, Axis::new(-half_width, half_width, samples)?)?;
    Ok(crate::analysis::peak_to_peak(&grid.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catstate::{cat_state_vector, detection_time};
    use approx::assert_abs_diff_eq;

    fn pure(v: &nalgebra::DVector<Complex64>) -> DMatrix<Complex64> {
        v * v.adjoint()
    }

    fn vacuum(n: usize) -> DMatrix<Complex64> {
        let mut r = DMatrix::zeros(n, n);
        r[(0, 0)] = Complex64::new(1.0, 0.0);
        r
    }

    #[test]
    fn axis_points() {
        let a = Axis::new(-4.0, 7.0, 551).unwrap();
        assert_abs_diff_eq!(a.step(), 0.02, epsilon = 1e-15);
        assert_eq!(a.point(550), 7.0);
        assert!(Axis::new(1.0, 0.0, 5).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn vacuum_values() {
        let p = SystemParams::cat_reference();
        let ax = Axis::new(-1.0, 1.0, 5).unwrap();
        let w = wigner_cat_analytic(0.0, Branch::Plus, &p, ax, ax).unwrap();
        assert_abs_diff_eq!(w.value(2, 2), 2.0 / PI, epsilon = 1e-15);
        let wn = wigner_numeric(&vacuum(10), ax, ax).unwrap();
        assert!(w.max_abs_diff(&wn).unwrap() < 1e-8);
        let q = quadrature_dist_cat(0.0, Branch::Plus, 0.3, &p, ax).unwrap();
        assert_abs_diff_eq!(q.values[2], 0.5641896, epsilon = 1e-7);
    }

    /// Direct evaluation of `(1/pi) sum_l (-1)^l <l|D^dag(eta) rho D(eta)|l>`
    /// with a wide intermediate basis.
    fn wigner_by_parity_sum(rho: &DMatrix<Complex64>, eta: Complex64) -> f64 {
        let n = rho.nrows();
        let wide = n + 60;
        let d = displacement_matrix(wide, n, -eta);
        let m = &d * rho * d.adjoint();
        let s: f64 = (0..wide).map(|l| if l % 2 == 0 { m[(l, l)].re } else { -m[(l, l)].re }).sum();
        s * 2.0 / PI
    }

    #[test]
    fn numeric_matches_parity_sum() {
        let p = SystemParams::cat_reference();
        let t = 3.1;
        let rho = pure(&cat_state_vector(t, Branch::Minus, &p, 50).unwrap());
        for eta in [Complex64::new(0.3, -0.2), Complex64::new(1.7, 0.4), Complex64::new(-0.5, 1.1)] {
            let w = wigner_point(&rho, eta);
            assert!(w.im.abs() < 1e-10);
            assert_abs_diff_eq!(w.re, wigner_by_parity_sum(&rho, eta), epsilon = 1e-9);
        }
    }

    #[test]
    fn pure_cat_cross_formula() {
        let p = SystemParams::cat_reference();
        let ts = detection_time(&p).unwrap();
        let ax = Axis::new(-2.0, 5.0, 29).unwrap();
        let ay = Axis::new(-3.5, 3.5, 29).unwrap();
        for t in [0.7 * ts, ts] {
            for b in [Branch::Plus, Branch::Minus] {
                let rho = pure(&cat_state_vector(t, b, &p, 60).unwrap());
                let wa = wigner_cat_analytic(t, b, &p, ax, ay).unwrap();
                let wn = wigner_numeric(&rho, ax, ay).unwrap();
                assert!(wa.max_abs_diff(&wn).unwrap() < 1e-6);
                assert!(wn.max_imag < 1e-10);
                assert!(wn.max().abs() <= 2.0 / PI + 1e-6 && wn.min().abs() <= 2.0 / PI + 1e-6);

                let x = default_quadrature_axis();
                let th = perpendicular_angle(cat_snapshot(t, &p).unwrap().beta);
                let qa = quadrature_dist_cat(t, b, th, &p, x).unwrap();
                let qn = quadrature_dist_numeric(&rho, th, x).unwrap();
                assert!(qa.max_abs_diff(&qn).unwrap() < 1e-6);
                assert_abs_diff_eq!(qa.integral(), 1.0, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn normalization_on_covering_grid() {
        let p = SystemParams::cat_reference();
        let ts = detection_time(&p).unwrap();
        let beta = cat_snapshot(ts, &p).unwrap().beta;
        let (ax, ay) = covering_wigner_axes(beta, 2.5, 0.05).unwrap();
        let w = wigner_cat_analytic(ts, Branch::Minus, &p, ax, ay).unwrap();
        assert_abs_diff_eq!(w.integral(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn thermal_quadrature() {
        let n = 60;
        let nbar: f64 = 1.0;
        let mut rho = DMatrix::zeros(n, n);
        for k in 0..n {
            rho[(k, k)] = Complex64::new((nbar / (1.0 + nbar)).powi(k as i32) / (1.0 + nbar), 0.0);
        }
        let var = (2.0 * nbar + 1.0) / 2.0;
        let x = Axis::new(-3.0, 3.0, 13).unwrap();
        for th in [0.0, 1.1] {
            let q = quadrature_dist_numeric(&rho, th, x).unwrap();
            for (i, xv) in x.points().into_iter().enumerate() {
                let g = (-xv * xv / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
                assert_abs_diff_eq!(q.values[i], g, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn marginal_matches_quadrature() {
        let p = SystemParams::cat_reference();
        let ts = detection_time(&p).unwrap();
        let x = Axis::new(-3.0, 5.0, 17).unwrap();
        let v = Axis::new(-6.0, 6.0, 121).unwrap();
        let coh = {
            let (c, _) = crate::catstate::coherent_amplitudes(Complex64::new(1.0, 0.5), 40);
            pure(&nalgebra::DVector::from_vec(c))
        };
        let cat = pure(&cat_state_vector(ts, Branch::Plus, &p, 60).unwrap());
        for rho in [vacuum(20), coh, cat] {
            for th in [0.0, -PI / 2.0, 0.8] {
                let m = wigner_marginal(&rho, th, x, v).unwrap();
                let q = quadrature_dist_numeric(&rho, th, x).unwrap();
                assert!(m.max_abs_diff(&q).unwrap() < 1e-3);
            }
        }
    }

    #[test]
    fn truncation_guard() {
        let mut rho = vacuum(5);
        rho[(4, 4)] = Complex64::new(1e-3, 0.0);
        let ax = Axis::new(0.0, 1.0, 2).unwrap();
        assert!(matches!(wigner_numeric(&rho, ax, ax), Err(Error::TruncationLoss { .. })));
        assert!(matches!(quadrature_dist_numeric(&rho, 0.0, ax), Err(Error::TruncationLoss { .. })));
    }

    #[test]
    fn cat_observables_exceed_mixture() {
        let p = SystemParams::cat_reference();
        let ts = detection_time(&p).unwrap();
        let beta = cat_snapshot(ts, &p).unwrap().beta;
        let cat = pure(&cat_state_vector(ts, Branch::Plus, &p, 60).unwrap());
        let mut mix = cat.clone();
        let n = mix.nrows();
        // Drop the coherences between |0> and |beta>.
        for j in 1..n {
            mix[(0, j)] = Complex64::new(0.0, 0.0);
            mix[(j, 0)] = Complex64::new(0.0, 0.0);
        }
        let tr = mix.trace();
        mix /= tr;
        let th = perpendicular_angle(beta);
        assert!(fringe_contrast(&cat, beta, 2.0, 81).unwrap() > fringe_contrast(&mix, beta, 2.0, 81).unwrap());
        assert!(oscillation_amplitude(&cat, th, 1.5, 151).unwrap() > oscillation_amplitude(&mix, th, 1.5, 151).unwrap());
    }
}
