//! Truncated two-mode Fock space, the model Hamiltonians, and the closed-form
//! propagator of the undriven Hamiltonian.
//!
//! Basis ordering is cavity-major: index `i = m * n_mech + n` for photon
//! number `m` and phonon number `n`, so each photon-number sector is a
//! contiguous `n_mech x n_mech` block.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::specfun::displacement_matrix;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cutoffs of the cavity and mechanical Fock spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpec {
    /// Cavity dimension (occupations `0..n_cav`).
    pub n_cav: usize,
    /// Mechanical dimension (occupations `0..n_mech`).
    pub n_mech: usize,
}

impl HilbertSpec {
    pub fn new(n_cav: usize, n_mech: usize) -> Result<Self> {
        let spec = Self { n_cav, n_mech };
        spec.validate()?;
        Ok(spec)
    }

    /// Photon-blockade default: photons 0..3, 30 phonon levels.
    pub fn blockade_default() -> Self {
        Self { n_cav: 4, n_mech: 30 }
    }

    /// Cat-state default: photons 0..1, 60 phonon levels.
    pub fn cat_default() -> Self {
        Self { n_cav: 2, n_mech: 60 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cav < 2 || self.n_mech < 2 {
            return Err(Error::InvalidSpace(format!(
                "cutoffs must be >= 2, got n_cav = {}, n_mech = {}",
                self.n_cav, self.n_mech
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_cav * self.n_mech
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n_mech + n
    }

    /// Largest phonon number inside the "interior" (top 20% of the
    /// mechanical levels excluded) used for truncation-sensitive checks.
    pub fn interior_max_phonon(&self) -> usize {
        self.n_mech - self.n_mech.div_ceil(5)
    }
}

/// Dense operator on the truncated two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub spec: HilbertSpec,
    pub matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(spec: HilbertSpec, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = spec.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { spec, matrix })
    }

    pub fn zeros(spec: HilbertSpec) -> Self {
        Self { spec, matrix: DMatrix::zeros(spec.dim(), spec.dim()) }
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        Self { spec, matrix: DMatrix::identity(spec.dim(), spec.dim()) }
    }

    pub fn dagger(&self) -> Self {
        Self { spec: self.spec, matrix: self.matrix.adjoint() }
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `<m, n| O |m', n'>`.
    pub fn element(&self, m: usize, n: usize, mp: usize, np: usize) -> Complex64 {
        self.matrix[(self.spec.index(m, n), self.spec.index(mp, np))]
    }

    /// Photon-number block `(m, m')` as an `n_mech x n_mech` matrix.
    pub fn block(&self, m: usize, mp: usize) -> DMatrix<Complex64> {
        let nm = self.spec.n_mech;
        self.matrix.view((m * nm, mp * nm), (nm, nm)).into_owned()
    }

    /// Largest entry of `|self - other|` restricted to photon numbers
    /// `<= max_photons` and phonon numbers `<= max_phonons`.
    pub fn max_abs_diff_on(&self, other: &Operator, max_photons: usize, max_phonons: usize) -> f64 {
        let mut worst = 0.0f64;
        let m_top = max_photons.min(self.spec.n_cav - 1);
        let n_top = max_phonons.min(self.spec.n_mech - 1);
        for m in 0..=m_top {
            for n in 0..=n_top {
                let i = self.spec.index(m, n);
                for mp in 0..=m_top {
                    for np in 0..=n_top {
                        let j = self.spec.index(mp, np);
                        worst = worst.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
                    }
                }
            }
        }
        worst
    }
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Ladder and number operators of both modes on the product space.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub a: Operator,
    pub a_dag: Operator,
    pub b: Operator,
    pub b_dag: Operator,
    pub n_a: Operator,
    pub n_b: Operator,
}

pub fn build_mode_operators(spec: HilbertSpec) -> ModeOperators {
    let mut a = Operator::zeros(spec);
    let mut b = Operator::zeros(spec);
    let mut n_a = Operator::zeros(spec);
    let mut n_b = Operator::zeros(spec);
    for m in 0..spec.n_cav {
        for n in 0..spec.n_mech {
            let i = spec.index(m, n);
            n_a.matrix[(i, i)] = Complex64::new(m as f64, 0.0);
            n_b.matrix[(i, i)] = Complex64::new(n as f64, 0.0);
            if m + 1 < spec.n_cav {
                a.matrix[(i, spec.index(m + 1, n))] = Complex64::new(((m + 1) as f64).sqrt(), 0.0);
            }
            if n + 1 < spec.n_mech {
                b.matrix[(i, spec.index(m, n + 1))] = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
            }
        }
    }
    ModeOperators { a_dag: a.dagger(), b_dag: b.dagger(), a, b, n_a, n_b }
}

/// `carrier a^dag a + omega_m b^dag b - g0 a^dag a (b + b^dag) - g_ck a^dag a b^dag b`.
fn photon_conserving_hamiltonian(spec: HilbertSpec, params: &SystemParams, carrier: f64) -> Operator {
    let mut h = Operator::zeros(spec);
    for m in 0..spec.n_cav {
        let mf = m as f64;
        for n in 0..spec.n_mech {
            let nf = n as f64;
            let i = spec.index(m, n);
            h.matrix[(i, i)] = Complex64::new(carrier * mf + params.omega_m * nf - params.g_ck * mf * nf, 0.0);
            if n + 1 < spec.n_mech {
                let j = spec.index(m, n + 1);
                let v = Complex64::new(-params.g0 * mf * (nf + 1.0).sqrt(), 0.0);
                h.matrix[(j, i)] = v;
                h.matrix[(i, j)] = v;
            }
        }
    }
    h
}

/// Lab-frame generalized optomechanical Hamiltonian.
pub fn build_h_gom(spec: HilbertSpec, params: &SystemParams) -> Operator {
    photon_conserving_hamiltonian(spec, params, params.omega_c)
}

/// Undriven Hamiltonian in the frame rotating at the drive frequency.
pub fn build_h_rotating(spec: HilbertSpec, params: &SystemParams) -> Operator {
    photon_conserving_hamiltonian(spec, params, params.delta_c)
}

/// Rotating-frame Hamiltonian plus the drive `drive (a + a^dag)`.
pub fn build_h_driven(spec: HilbertSpec, params: &SystemParams) -> Operator {
    let mut h = build_h_rotating(spec, params);
    for m in 0..spec.n_cav - 1 {
        let v = Complex64::new(params.drive * ((m + 1) as f64).sqrt(), 0.0);
        for n in 0..spec.n_mech {
            let (i, j) = (spec.index(m, n), spec.index(m + 1, n));
            h.matrix[(i, j)] += v;
            h.matrix[(j, i)] += v;
        }
    }
    h
}

/// Driven Hamiltonian with the non-Hermitian cavity loss `-i kappa/2 a^dag a`.
pub fn build_h_eff(spec: HilbertSpec, params: &SystemParams) -> Operator {
    let mut h = build_h_driven(spec, params);
    for m in 0..spec.n_cav {
        for n in 0..spec.n_mech {
            let i = spec.index(m, n);
            h.matrix[(i, i)] -= I * (params.kappa * m as f64 / 2.0);
        }
    }
    h
}

/// Photon-number-resolved coefficients of the factored propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorFactors {
    pub t: f64,
    /// Coefficient of the `(a^dag a)^2` phase, per photon number.
    pub mu: Vec<f64>,
    /// Coefficient of the `(a^dag a)^3` phase, per photon number.
    pub nu: Vec<f64>,
    /// Displacement per photon; the m-photon sector is displaced by `m * lambda[m]`.
    pub lambda: Vec<Complex64>,
}

pub fn propagator_factors(t: f64, params: &SystemParams, spec: HilbertSpec) -> Result<PropagatorFactors> {
    let g0 = params.g0;
    let mut mu = Vec::with_capacity(spec.n_cav);
    let mut nu = Vec::with_capacity(spec.n_cav);
    let mut lambda = Vec::with_capacity(spec.n_cav);
    for m in 0..spec.n_cav {
        let w = params.shifted_frequency(m)?;
        mu.push(g0 * g0 * (params.omega_m * t - (w * t).sin()) / (w * w));
        nu.push(params.g_ck * g0 * g0 * t / (w * w));
        lambda.push((ONE - Complex64::from_polar(1.0, -w * t)) * (g0 / w));
    }
    Ok(PropagatorFactors { t, mu, nu, lambda })
}

/// Sign of the `(a^dag a)^3` phase in the factored propagator.
///
/// [`NuSign::Minus`] is the correct form; `Plus` exists only so that
/// verification can demonstrate it detects a wrong sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuSign {
    #[default]
    Minus,
    Plus,
}

/// `U(t) = exp(-i H_gom t)` assembled sector by sector from the closed form
/// `e^{-i omega_c t m} e^{i mu m^2} e^{-+i nu m^3} D(m lambda) e^{-i (omega_m - m g_ck) t b^dag b}`.
pub fn propagator_factored(t: f64, params: &SystemParams, spec: HilbertSpec) -> Result<Operator> {
    propagator_factored_with(t, params, spec, NuSign::Minus)
}

pub fn propagator_factored_with(
    t: f64,
    params: &SystemParams,
    spec: HilbertSpec,
    nu_sign: NuSign,
) -> Result<Operator> {
    let f = propagator_factors(t, params, spec)?;
    let nm = spec.n_mech;
    let sign = match nu_sign {
        NuSign::Minus => -1.0,
        NuSign::Plus => 1.0,
    };
    let mut u = Operator::zeros(spec);
    for m in 0..spec.n_cav {
        let mf = m as f64;
        let phase = Complex64::from_polar(
            1.0,
            -params.omega_c * t * mf + f.mu[m] * mf * mf + sign * f.nu[m] * mf * mf * mf,
        );
        let disp = displacement_matrix(nm, nm, f.lambda[m] * mf);
        let w = params.shifted_frequency(m)?;
        for k in 0..nm {
            let free = phase * Complex64::from_polar(1.0, -w * t * k as f64);
            for n in 0..nm {
                u.matrix[(spec.index(m, n), spec.index(m, k))] = disp[(n, k)] * free;
            }
        }
    }
    Ok(u)
}

/// `exp(scale * op)` by Pade scaling and squaring.
pub fn expm(op: &DMatrix<Complex64>, scale: Complex64) -> Result<DMatrix<Complex64>> {
    if op.nrows() != op.ncols() {
        return Err(Error::DimensionMismatch { expected: op.nrows(), found: op.ncols() });
    }
    Ok((op * scale).exp())
}

/// `exp(-i t H)` for Hermitian `H` through its eigendecomposition.
pub fn expm_hermitian(h: &DMatrix<Complex64>, t: f64) -> Result<DMatrix<Complex64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, e) in eig.eigenvalues.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -e * t);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= ph;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Direct propagator `exp(-i H_gom t)` of the truncated Hamiltonian,
/// exponentiated sector by sector (the Hamiltonian conserves photon number).
pub fn propagator_direct(t: f64, params: &SystemParams, spec: HilbertSpec) -> Result<Operator> {
    let h = build_h_gom(spec, params);
    let nm = spec.n_mech;
    let mut u = Operator::zeros(spec);
    for m in 0..spec.n_cav {
        let blk = expm(&h.block(m, m), -I * t)?;
        u.matrix.view_mut((m * nm, m * nm), (nm, nm)).copy_from(&blk);
    }
    Ok(u)
}

/// `exp(-i H_gom t)` from a one-off eigendecomposition of each photon-number
/// block at a large mechanical cutoff, evaluated cheaply at many times.
///
/// Each block of `H_gom` is a real symmetric tridiagonal matrix, so the
/// decomposition is real and the time dependence is a diagonal phase.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    n_mech: usize,
    blocks: Vec<(Vec<f64>, DMatrix<f64>)>,
}

impl SpectralPropagator {
    pub fn new(params: &SystemParams, n_cav: usize, n_mech: usize) -> Result<Self> {
        HilbertSpec::new(n_cav, n_mech)?;
        let mut blocks = Vec::with_capacity(n_cav);
        for m in 0..n_cav {
            let mf = m as f64;
            let w = params.omega_m - params.g_ck * mf;
            let mut h = DMatrix::<f64>::zeros(n_mech, n_mech);
            for n in 0..n_mech {
                h[(n, n)] = params.omega_c * mf + w * n as f64;
                if n + 1 < n_mech {
                    let v = -params.g0 * mf * ((n + 1) as f64).sqrt();
                    h[(n, n + 1)] = v;
                    h[(n + 1, n)] = v;
                }
            }
            let eig = SymmetricEigen::new(h);
            blocks.push((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors));
        }
        Ok(Self { n_mech, blocks })
    }

    pub fn n_mech(&self) -> usize {
        self.n_mech
    }

    /// Propagator elements restricted to the (smaller or equal) space `out`.
    pub fn at(&self, t: f64, out: HilbertSpec) -> Result<Operator> {
        if out.n_cav > self.blocks.len() || out.n_mech > self.n_mech {
            return Err(Error::DimensionMismatch { expected: self.n_mech, found: out.n_mech });
        }
        let mut u = Operator::zeros(out);
        for m in 0..out.n_cav {
            let (vals, vecs) = &self.blocks[m];
            let phases: Vec<Complex64> = vals.iter().map(|e| Complex64::from_polar(1.0, -e * t)).collect();
            for i in 0..out.n_mech {
                for j in 0..out.n_mech {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, ph) in phases.iter().enumerate() {
                        acc += ph * (vecs[(i, k)] * vecs[(j, k)]);
                    }
                    u.matrix[(out.index(m, i), out.index(m, j))] = acc;
                }
            }
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Frame;
    use std::f64::consts::PI;

    fn fig6() -> SystemParams {
        SystemParams::cat_reference()
    }

    #[test]
    fn ladder_elements_and_commutator() {
        let spec = HilbertSpec::new(4, 5).unwrap();
        let ops = build_mode_operators(spec);
        assert_eq!(ops.a.element(0, 0, 1, 0), ONE);
        assert_eq!(ops.b.element(2, 1, 2, 2), Complex64::new(2f64.sqrt(), 0.0));
        let comm = &ops.a.matrix * &ops.a_dag.matrix - &ops.a_dag.matrix * &ops.a.matrix;
        for m in 0..4 {
            for n in 0..5 {
                let i = spec.index(m, n);
                let want = if m == 3 { -3.0 } else { 1.0 };
                assert!((comm[(i, i)].re - want).abs() < 1e-14);
            }
        }
        let na = &ops.a_dag.matrix * &ops.a.matrix;
        assert!(max_abs(&(na - &ops.n_a.matrix)) < 1e-14);
    }

    #[test]
    fn invalid_space_rejected() {
        assert!(matches!(HilbertSpec::new(1, 10), Err(Error::InvalidSpace(_))));
        assert_eq!(HilbertSpec::new(2, 60).unwrap().interior_max_phonon(), 48);
    }

    #[test]
    fn h_gom_structure() {
        let spec = HilbertSpec::new(3, 20).unwrap();
        let mut p = fig6();
        let h = build_h_gom(spec, &p);
        assert!(h.hermiticity_error() < 1e-12);
        assert!((h.element(2, 4, 2, 3).re + p.g0 * 2.0 * 2.0).abs() < 1e-14);
        let ops = build_mode_operators(spec);
        let comm = &ops.n_a.matrix * &h.matrix - &h.matrix * &ops.n_a.matrix;
        assert_eq!(max_abs(&comm), 0.0);

        p.g0 = 0.0;
        p.g_ck = 0.0;
        let h0 = build_h_gom(spec, &p);
        for m in 0..3 {
            for n in 0..20 {
                let i = spec.index(m, n);
                assert_eq!(h0.matrix[(i, i)].re, m as f64 * p.omega_c + n as f64);
            }
        }
    }

    #[test]
    fn block_eigenvalues_match_spectrum() {
        let p = SystemParams::blockade_reference();
        let spec = HilbertSpec::new(3, 60).unwrap();
        let h = build_h_gom(spec, &p);
        for m in 0..3 {
            let mut ev: Vec<f64> = SymmetricEigen::new(h.block(m, m)).eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // The two-photon block is displaced furthest and converges lower.
            let top = if m < 2 { 30 } else { 20 };
            for (n, e) in ev.iter().enumerate().take(top) {
                let want = p.eigen_energy(m, n, Frame::Lab).unwrap();
                assert!((e - want).abs() < 1e-8, "m={m} n={n}: {e} vs {want}");
            }
        }
    }

    #[test]
    fn driven_and_effective_hamiltonians() {
        let spec = HilbertSpec::new(4, 6).unwrap();
        let mut p = SystemParams::blockade_reference();
        p.drive = 0.0;
        assert_eq!(build_h_driven(spec, &p), build_h_rotating(spec, &p));
        p.drive = 0.3;
        let hd = build_h_driven(spec, &p);
        assert!(hd.hermiticity_error() < 1e-12);
        assert!((hd.element(2, 3, 1, 3).re - 0.3 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(hd.element(2, 3, 0, 3), Complex64::new(0.0, 0.0));
        assert_eq!(hd.element(2, 3, 1, 2), Complex64::new(0.0, 0.0));

        let he = build_h_eff(spec, &p);
        let anti = (&he.matrix - he.matrix.adjoint()) * Complex64::new(0.0, 0.5);
        for m in 0..4 {
            for n in 0..6 {
                let i = spec.index(m, n);
                assert!((anti[(i, i)].re - p.kappa * m as f64 / 2.0).abs() < 1e-14);
            }
        }
        p.kappa = 0.0;
        assert!(build_h_eff(spec, &p).hermiticity_error() < 1e-14);
    }

    #[test]
    fn undriven_effective_block_decay_rates() {
        let spec = HilbertSpec::new(3, 12).unwrap();
        let mut p = SystemParams::blockade_reference();
        p.drive = 0.0;
        let he = build_h_eff(spec, &p);
        for m in 0..3 {
            let ev = he.block(m, m).schur().eigenvalues().unwrap();
            for z in ev.iter() {
                assert!((z.im + p.kappa * m as f64 / 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn propagator_factor_values() {
        let spec = HilbertSpec::cat_default();
        let p = fig6();
        let f0 = propagator_factors(0.0, &p, spec).unwrap();
        assert!(f0.mu.iter().chain(&f0.nu).all(|v| *v == 0.0));
        assert!(f0.lambda.iter().all(|z| z.norm() == 0.0));
        let f = propagator_factors(PI / 0.7, &p, spec).unwrap();
        assert!((f.lambda[1] - Complex64::new(2.4 / 0.7, 0.0)).norm() < 1e-12);
        let f2 = propagator_factors(2.0 * PI / 0.7, &p, spec).unwrap();
        assert!(f2.lambda[1].norm() < 1e-12);
        assert!((f2.nu[1] - 2.0 * f.nu[1]).abs() < 1e-12);
        let mut bad = p;
        bad.g_ck = 1.0;
        assert!(matches!(propagator_factors(1.0, &bad, spec), Err(Error::SingularDenominator { .. })));
    }

    #[test]
    fn factored_propagator_group_properties() {
        let spec = HilbertSpec::new(3, 60).unwrap();
        let p = fig6();
        let id = propagator_factored(0.0, &p, spec).unwrap();
        assert!(id.max_abs_diff_on(&Operator::identity(spec), 2, 59) < 1e-14);

        let (t1, t2) = (0.7, 1.9);
        let u1 = propagator_factored(t1, &p, spec).unwrap();
        let u2 = propagator_factored(t2, &p, spec).unwrap();
        let u12 = propagator_factored(t1 + t2, &p, spec).unwrap();
        // The product needs intermediate levels above the window, so compare
        // on a narrow interior where the 60-level sums have converged.
        let prod = Operator { spec, matrix: &u1.matrix * &u2.matrix };
        assert!(prod.max_abs_diff_on(&u12, 1, 10) < 1e-6);
        let uu = Operator { spec, matrix: &u1.matrix * u1.matrix.adjoint() };
        assert!(uu.max_abs_diff_on(&Operator::identity(spec), 1, 10) < 1e-8);
    }

    #[test]
    fn expm_basics() {
        let z = DMatrix::<Complex64>::zeros(3, 3);
        assert!(max_abs(&(expm(&z, ONE).unwrap() - DMatrix::identity(3, 3))) < 1e-15);
        let one = DMatrix::from_element(1, 1, ONE);
        let e = expm(&one, I * PI).unwrap();
        assert!((e[(0, 0)] + ONE).norm() < 1e-14);
        assert!(expm(&DMatrix::<Complex64>::zeros(2, 3), ONE).is_err());
    }

    #[test]
    fn expm_reproduces_displacement_elements() {
        let n = 60;
        let x = 1.3;
        let mut gen = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n - 1 {
            let s = ((k + 1) as f64).sqrt();
            gen[(k + 1, k)] = Complex64::new(s, 0.0);
            gen[(k, k + 1)] = Complex64::new(-s, 0.0);
        }
        let d = expm(&gen, Complex64::new(x, 0.0)).unwrap();
        let exact = displacement_matrix(n, n, Complex64::new(x, 0.0));
        let top = n - 4 * (x * x).ceil() as usize - 10;
        let mut worst = 0.0f64;
        for i in 0..top {
            for j in 0..top {
                worst = worst.max((d[(i, j)] - exact[(i, j)]).norm());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn expm_routes_agree_for_hermitian_input() {
        let spec = HilbertSpec::new(2, 40).unwrap();
        let h = build_h_gom(spec, &fig6()).block(1, 1);
        let a = expm(&h, -I * 2.3).unwrap();
        let b = expm_hermitian(&h, 2.3).unwrap();
        assert!(max_abs(&(a - b)) < 1e-10);
    }

    #[test]
    fn spectral_oracle_matches_direct_expm_at_same_cutoff() {
        let p = fig6();
        let spec = HilbertSpec::new(2, 30).unwrap();
        let sp = SpectralPropagator::new(&p, 2, 30).unwrap();
        let a = sp.at(1.7, spec).unwrap();
        let b = propagator_direct(1.7, &p, spec).unwrap();
        assert!(max_abs(&(a.matrix - b.matrix)) < 1e-10);
    }
}
