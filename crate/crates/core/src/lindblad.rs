//! Lindblad master equation on the truncated two-mode space: Liouvillian
//! action, adaptive time evolution, steady states and observables.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blockade::{PhotonStats, StatsMethod};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::operators::{build_h_driven, build_mode_operators, max_abs, HilbertSpec, Operator};
use crate::sparse::Csr;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Density matrix on the two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub spec: HilbertSpec,
    pub rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(spec: HilbertSpec, rho: DMatrix<Complex64>) -> Result<Self> {
        let d = spec.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows().max(rho.ncols()) });
        }
        Ok(Self { spec, rho })
    }

    /// `|0,0><0,0|`.
    pub fn vacuum(spec: HilbertSpec) -> Self {
        let mut rho = DMatrix::zeros(spec.dim(), spec.dim());
        rho[(0, 0)] = ONE;
        Self { spec, rho }
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn from_pure(spec: HilbertSpec, psi: &DVector<Complex64>) -> Result<Self> {
        if psi.len() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), found: psi.len() });
        }
        Ok(Self { spec, rho: psi * psi.adjoint() })
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.rho - self.rho.adjoint()))
    }

    /// Replaces `rho` by its Hermitian part and returns the asymmetry that
    /// was removed.
    pub fn symmetrize(&mut self) -> f64 {
        let drift = self.hermiticity_error();
        self.rho = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        drift
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(op rho)`.
    pub fn expectation(&self, op: &Operator) -> Complex64 {
        self.rho.iter().zip(op.matrix.transpose().iter()).map(|(r, o)| r * o).sum()
    }

    /// Photon-number distribution `P_m = sum_n <m,n|rho|m,n>`.
    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..self.spec.n_cav)
            .map(|m| (0..self.spec.n_mech).map(|n| self.rho[(self.spec.index(m, n), self.spec.index(m, n))].re).sum())
            .collect()
    }

    /// Mechanical state with the cavity traced out.
    pub fn reduced_mechanical(&self) -> DMatrix<Complex64> {
        let nm = self.spec.n_mech;
        let mut out = DMatrix::zeros(nm, nm);
        for m in 0..self.spec.n_cav {
            out += self.rho.view((m * nm, m * nm), (nm, nm));
        }
        out
    }
}

/// A decay channel `rate * D[op]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub op: Operator,
    pub rate: f64,
}

/// Hamiltonian plus decay channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub hamiltonian: Operator,
    pub channels: Vec<Channel>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: Operator, channels: Vec<Channel>) -> Result<Self> {
        for c in &channels {
            if c.op.spec != hamiltonian.spec {
                return Err(Error::DimensionMismatch { expected: hamiltonian.spec.dim(), found: c.op.spec.dim() });
            }
            if !(c.rate >= 0.0 && c.rate.is_finite()) {
                return Err(Error::Domain(format!("channel rate must be finite and >= 0, got {}", c.rate)));
            }
        }
        Ok(Self { hamiltonian, channels })
    }

    /// Driven rotating-frame Hamiltonian with cavity loss and a thermal
    /// mechanical bath.
    pub fn from_params(spec: HilbertSpec, params: &SystemParams) -> Result<Self> {
        params.validate(spec.n_cav - 1)?;
        Self::new(build_h_driven(spec, params), standard_channels(spec, params))
    }

    pub fn spec(&self) -> HilbertSpec {
        self.hamiltonian.spec
    }
}

/// `[(a, kappa), (b, gamma (nbar + 1)), (b^dag, gamma nbar)]`.
pub fn standard_channels(spec: HilbertSpec, params: &SystemParams) -> Vec<Channel> {
    let ops = build_mode_operators(spec);
    vec![
        Channel { op: ops.a, rate: params.kappa },
        Channel { op: ops.b, rate: params.gamma_m * (params.nbar_m + 1.0) },
        Channel { op: ops.b_dag, rate: params.gamma_m * params.nbar_m },
    ]
}

/// Liouvillian in the form `-i (K rho - rho K^dag) + sum rate o rho o^dag`
/// with `K = H - (i/2) sum rate o^dag o`, optionally similarity-scaled.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    spec: HilbertSpec,
    k: Csr,
    jumps: Vec<(Csr, f64)>,
}

impl Liouvillian {
    pub fn new(ls: &LindbladSpec) -> Self {
        Self::build(ls, None)
    }

    /// Liouvillian acting on `X = S^-1 rho S^-1` with `S = diag(scale)`.
    fn build(ls: &LindbladSpec, scale: Option<&[f64]>) -> Self {
        let mut k = ls.hamiltonian.matrix.clone();
        for c in ls.channels.iter().filter(|c| c.rate > 0.0) {
            k -= (c.op.matrix.adjoint() * &c.op.matrix) * (I * (c.rate / 2.0));
        }
        let similarity = |m: &DMatrix<Complex64>| match scale {
            None => m.clone(),
            Some(s) => DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[j] / s[i])),
        };
        let jumps = ls
            .channels
            .iter()
            .filter(|c| c.rate > 0.0)
            .map(|c| (Csr::from_dense(&similarity(&c.op.matrix)), c.rate))
            .collect();
        Self { spec: ls.spec(), k: Csr::from_dense(&similarity(&k)), jumps }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    /// `L(x)` for any square `x`.
    pub fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let xd = x.adjoint();
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        self.k.mul_add(-I, x, &mut out);
        out += self.k.mul(&xd).adjoint() * I;
        for (o, rate) in &self.jumps {
            let j = o.mul(&xd).adjoint();
            o.mul_add(Complex64::new(*rate, 0.0), &j, &mut out);
        }
        out
    }

    /// `L(x)` for Hermitian `x`; about half the work of [`Self::apply`].
    pub fn apply_hermitian(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let kx = self.k.mul(x);
        let mut out = (kx.adjoint() - kx) * I;
        for (o, rate) in &self.jumps {
            let j = o.mul(x).adjoint();
            o.mul_add(Complex64::new(*rate, 0.0), &j, &mut out);
        }
        out
    }
}

/// `d rho / dt` for the given master equation.
pub fn apply_liouvillian(ls: &LindbladSpec, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    if rho.spec != ls.spec() {
        return Err(Error::DimensionMismatch { expected: ls.spec().dim(), found: rho.spec.dim() });
    }
    Ok(Liouvillian::new(ls).apply(&rho.rho))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; `None` picks one from the grid spacing.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, h_min: 1e-12, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `max|rho - rho^dag|` seen before the per-step symmetrization.
    pub max_hermiticity_drift: f64,
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Liouvillian {
    /// Integrates from `rho0` at `t_grid[0]`, calling `observe(k, t_k, rho)`
    /// at every grid time (including the first).
    pub fn evolve_observe<F>(
        &self,
        rho0: &DensityMatrix,
        t_grid: &[f64],
        opts: &EvolveOptions,
        mut observe: F,
    ) -> Result<EvolveStats>
    where
        F: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
    {
        if rho0.spec != self.spec {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), found: rho0.spec.dim() });
        }
        if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain("time grid must be non-decreasing".into()));
        }
        let mut stats = EvolveStats::default();
        let Some(&t0) = t_grid.first() else { return Ok(stats) };
        let mut state = rho0.clone();
        let mut t = t0;
        observe(0, t, &state)?;

        let span = t_grid.last().copied().unwrap_or(t0) - t0;
        let mut h = opts.h_init.unwrap_or((span / 100.0).clamp(1e-6, 0.05));
        let mut k1 = self.apply(&state.rho);
        let d = state.rho.nrows();
        let mut ks: Vec<DMatrix<Complex64>> = Vec::with_capacity(7);

        for (idx, &target) in t_grid.iter().enumerate().skip(1) {
            while t < target {
                if stats.accepted + stats.rejected >= opts.max_steps {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
                let remaining = target - t;
                let last = h >= remaining;
                let step = if last { remaining } else { h };

                ks.clear();
                ks.push(k1.clone());
                let mut y5 = state.rho.clone();
                for s in 1..7 {
                    let mut y = state.rho.clone();
                    for (j, kj) in ks.iter().enumerate() {
                        let a = A[s][j];
                        if a != 0.0 {
                            y.zip_apply(kj, |yv, kv| *yv += kv * (step * a));
                        }
                    }
                    if s == 6 {
                        y5 = y.clone();
                    }
                    ks.push(self.apply(&y));
                }
                let mut err = 0.0f64;
                for i in 0..d * d {
                    let mut e = Complex64::new(0.0, 0.0);
                    for (s, kk) in ks.iter().enumerate() {
                        if E[s] != 0.0 {
                            e += kk[i] * E[s];
                        }
                    }
                    let scale = opts.atol + opts.rtol * state.rho[i].norm().max(y5[i].norm());
                    err = err.max((e * step).norm() / scale);
                }

                if err <= 1.0 {
                    t = if last { target } else { t + step };
                    state.rho = y5;
                    let drift = state.symmetrize();
                    stats.max_hermiticity_drift = stats.max_hermiticity_drift.max(drift);
                    k1 = self.apply(&state.rho);
                    stats.accepted += 1;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !last || step >= h {
                        h = step * grow;
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                    if h < opts.h_min {
                        return Err(Error::StepSizeUnderflow { t, h });
                    }
                }
            }
            observe(idx, t, &state)?;
        }
        Ok(stats)
    }
}

/// States at every time of `t_grid`, starting from `rho0` at `t_grid[0]`.
pub fn evolve(ls: &LindbladSpec, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(t_grid.len());
    Liouvillian::new(ls).evolve_observe(rho0, t_grid, &EvolveOptions::default(), |_, _, r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyStateMethod {
    /// Preconditioned GMRES on the trace-constrained, photon-scaled
    /// Liouvillian.
    #[default]
    Krylov,
    /// Time integration from vacuum until stationary.
    Integrate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateOptions {
    pub method: SteadyStateMethod,
    /// Relative residual target of the linear solve.
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Per-photon scale `s` of the unknowns (`rho = S X S`, `S = diag(s^m)`);
    /// `None` uses `min(1, drive/kappa)` read off the operators.
    pub photon_scale: Option<f64>,
    /// Starting guess (vacuum if `None`).
    pub initial: Option<DensityMatrix>,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { method: SteadyStateMethod::Krylov, tol: 1e-12, max_iter: 3000, restart: 60, photon_scale: None, initial: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `max|L(rho)|` of the returned state.
    pub residual: f64,
    /// Krylov iterations or accepted integration steps.
    pub iterations: usize,
    pub method: SteadyStateMethod,
}

/// Largest `max|L rho|` accepted for a steady state.
pub const STEADY_RESIDUAL_LIMIT: f64 = 1e-9;

pub fn steady_state(ls: &LindbladSpec) -> Result<DensityMatrix> {
    steady_state_with(ls, &SteadyStateOptions::default()).map(|s| s.rho)
}

pub fn steady_state_with(ls: &LindbladSpec, opts: &SteadyStateOptions) -> Result<SteadyState> {
    let kappa = cavity_loss_rate(ls);
    if !(kappa > 0.0) {
        return Err(Error::Domain("steady state needs cavity loss (kappa > 0)".into()));
    }
    match opts.method {
        SteadyStateMethod::Krylov => steady_state_krylov(ls, opts, kappa),
        SteadyStateMethod::Integrate => steady_state_integrate(ls, opts, kappa),
    }
}

/// Total rate of channels that remove a photon from `|1,0>`.
fn cavity_loss_rate(ls: &LindbladSpec) -> f64 {
    let spec = ls.spec();
    let (i, j) = (spec.index(0, 0), spec.index(1, 0));
    ls.channels.iter().map(|c| c.rate * c.op.matrix[(i, j)].norm_sqr()).sum()
}

/// Largest matrix element coupling neighbouring photon numbers.
fn drive_strength(ls: &LindbladSpec) -> f64 {
    let spec = ls.spec();
    let h = &ls.hamiltonian.matrix;
    let mut w = 0.0f64;
    for n in 0..spec.n_mech {
        for np in 0..spec.n_mech {
            w = w.max(h[(spec.index(0, n), spec.index(1, np))].norm());
        }
    }
    w
}

fn steady_state_integrate(ls: &LindbladSpec, opts: &SteadyStateOptions, kappa: f64) -> Result<SteadyState> {
    let spec = ls.spec();
    let liou = Liouvillian::new(ls);
    let mut rho = opts.initial.clone().unwrap_or_else(|| DensityMatrix::vacuum(spec));
    let window = 10.0 / kappa;
    let t_max = 200.0 / kappa;
    let mut t = 0.0;
    let mut steps = 0;
    let evo = EvolveOptions::default();
    while t < t_max {
        let prev = rho.clone();
        let mut next = None;
        let stats = liou.evolve_observe(&rho, &[0.0, window], &evo, |k, _, r| {
            if k == 1 {
                next = Some(r.clone());
            }
            Ok(())
        })?;
        steps += stats.accepted;
        rho = next.expect("final grid time observed");
        t += window;
        let change = max_abs(&(&rho.rho - &prev.rho));
        let rate = max_abs(&liou.apply(&rho.rho));
        if rate < 1e-10 || change < 1e-10 {
            return Ok(SteadyState { rho, residual: rate, iterations: steps, method: SteadyStateMethod::Integrate });
        }
    }
    Err(Error::NonConvergence(format!("not stationary after t = {t_max}")))
}

/// Approximate inverse of the trace-constrained Liouvillian built from the
/// photon-number-diagonal blocks of `H` and the channel decay rates in
/// their eigenbasis.
struct BlockPreconditioner {
    n_mech: usize,
    n_cav: usize,
    vecs: Vec<DMatrix<Complex64>>,
    /// `1 / (-i (E_p - E_q) - (G_p + G_q)/2)` per block pair, stored as
    /// `inv[m * n_cav + m'][(p, q)]`.
    inv: Vec<DMatrix<Complex64>>,
}

impl BlockPreconditioner {
    fn new(ls: &LindbladSpec) -> Self {
        let spec = ls.spec();
        let (nc, nm) = (spec.n_cav, spec.n_mech);
        let mut decay = DMatrix::<Complex64>::zeros(spec.dim(), spec.dim());
        for c in ls.channels.iter().filter(|c| c.rate > 0.0) {
            decay += (c.op.matrix.adjoint() * &c.op.matrix) * Complex64::new(c.rate, 0.0);
        }
        let mut vecs = Vec::with_capacity(nc);
        let mut energies = Vec::with_capacity(nc);
        let mut widths = Vec::with_capacity(nc);
        for m in 0..nc {
            let blk = ls.hamiltonian.block(m, m);
            let eig = SymmetricEigen::new((&blk + blk.adjoint()) * Complex64::new(0.5, 0.0));
            let v = eig.eigenvectors;
            let g = decay.view((m * nm, m * nm), (nm, nm));
            let gp: Vec<f64> = (0..nm).map(|p| (v.column(p).adjoint() * g * v.column(p))[(0, 0)].re).collect();
            energies.push(eig.eigenvalues.iter().copied().collect::<Vec<f64>>());
            widths.push(gp);
            vecs.push(v);
        }
        // Block-0 eigenvector closest to |0,0>: its population carries the
        // trace constraint.
        let ground = (0..nm).max_by(|&a, &b| vecs[0][(0, a)].norm().total_cmp(&vecs[0][(0, b)].norm())).unwrap_or(0);
        let floor = 1e-6;
        let mut inv = Vec::with_capacity(nc * nc);
        for m in 0..nc {
            for mp in 0..nc {
                inv.push(DMatrix::from_fn(nm, nm, |p, q| {
                    let mut den = Complex64::new(
                        -(widths[m][p] + widths[mp][q]) / 2.0,
                        -(energies[m][p] - energies[mp][q]),
                    );
                    if m == 0 && mp == 0 && p == ground && q == ground {
                        den += ONE;
                    }
                    if den.norm() < floor {
                        den = Complex64::new(-floor, den.im);
                    }
                    ONE / den
                }));
            }
        }
        Self { n_mech: nm, n_cav: nc, vecs, inv }
    }

    fn apply(&self, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (nc, nm) = (self.n_cav, self.n_mech);
        let mut x = DMatrix::zeros(y.nrows(), y.ncols());
        for m in 0..nc {
            for mp in 0..nc {
                let yb = y.view((m * nm, mp * nm), (nm, nm));
                let mut t = self.vecs[m].adjoint() * yb * &self.vecs[mp];
                t.component_mul_assign(&self.inv[m * nc + mp]);
                let xb = &self.vecs[m] * t * self.vecs[mp].adjoint();
                x.view_mut((m * nm, mp * nm), (nm, nm)).copy_from(&xb);
            }
        }
        (&x + x.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

fn real_dot(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn steady_state_krylov(ls: &LindbladSpec, opts: &SteadyStateOptions, kappa: f64) -> Result<SteadyState> {
    let spec = ls.spec();
    let d = spec.dim();
    let s = opts.photon_scale.unwrap_or_else(|| {
        let w = drive_strength(ls);
        if w > 0.0 { (w / kappa).min(1.0) } else { 1.0 }
    });
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("photon scale must lie in (0, 1], got {s}")));
    }
    let scale: Vec<f64> = (0..d).map(|i| s.powi((i / spec.n_mech) as i32)).collect();
    let liou = Liouvillian::build(ls, Some(&scale));
    let pre = BlockPreconditioner::new(ls);

    let weights: Vec<f64> = scale.iter().map(|v| v * v).collect();
    let tau = |x: &DMatrix<Complex64>| -> f64 { (0..d).map(|i| weights[i] * x[(i, i)].re).sum() };
    let op = |x: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let mut y = liou.apply_hermitian(x);
        y[(0, 0)] += tau(x);
        y
    };
    let mut b = DMatrix::<Complex64>::zeros(d, d);
    b[(0, 0)] = ONE;
    let b_norm = 1.0;

    let mut x = match &opts.initial {
        Some(r) => {
            if r.spec != spec {
                return Err(Error::DimensionMismatch { expected: d, found: r.spec.dim() });
            }
            DMatrix::from_fn(d, d, |i, j| r.rho[(i, j)] / (scale[i] * scale[j]))
        }
        None => b.clone(),
    };

    let restart = opts.restart.max(2);
    let mut iterations = 0;
    let mut converged = false;
    let mut last_res = f64::INFINITY;
    while iterations < opts.max_iter {
        let r = &b - op(&x);
        let beta = real_dot(&r, &r).sqrt();
        last_res = beta / b_norm;
        if last_res <= opts.tol {
            converged = true;
            break;
        }
        let mut v: Vec<DMatrix<Complex64>> = vec![r / Complex64::new(beta, 0.0)];
        let mut z: Vec<DMatrix<Complex64>> = Vec::with_capacity(restart);
        let mut h = vec![vec![0.0f64; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0f64; restart], vec![0.0f64; restart]);
        let mut g = vec![0.0f64; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for j in 0..restart {
            let zj = pre.apply(&v[j]);
            let mut w = op(&zj);
            z.push(zj);
            for i in 0..=j {
                let hij = real_dot(&v[i], &w);
                h[i][j] = hij;
                w.zip_apply(&v[i], |wv, vv| *wv -= vv * hij);
            }
            // One reorthogonalization pass keeps the basis orthogonal at
            // the 1e-12 residuals we ask for.
            for i in 0..=j {
                let c = real_dot(&v[i], &w);
                h[i][j] += c;
                w.zip_apply(&v[i], |wv, vv| *wv -= vv * c);
            }
            let hn = real_dot(&w, &w).sqrt();
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let den = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / den;
            sn[j] = h[j + 1][j] / den;
            h[j][j] = den;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            k_used = j + 1;
            if hn > 0.0 {
                v.push(w / Complex64::new(hn, 0.0));
            }
            if (g[j + 1].abs() / b_norm) <= opts.tol * 0.5 || hn == 0.0 || iterations >= opts.max_iter {
                break;
            }
        }
        let mut y = vec![0.0f64; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for l in i + 1..k_used {
                acc -= h[i][l] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        for (zi, yi) in z.iter().zip(&y) {
            x.zip_apply(zi, |xv, zv| *xv += zv * *yi);
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "Krylov solve stalled at relative residual {last_res:e} after {iterations} iterations"
        )));
    }

    let mut rho = DensityMatrix { spec, rho: DMatrix::from_fn(d, d, |i, j| x[(i, j)] * (scale[i] * scale[j])) };
    rho.symmetrize();
    let tr = rho.trace().re;
    rho.rho /= Complex64::new(tr, 0.0);
    let residual = max_abs(&Liouvillian::new(ls).apply(&rho.rho));
    if !(residual < STEADY_RESIDUAL_LIMIT) {
        return Err(Error::NonConvergence(format!("steady-state residual {residual:e}")));
    }
    Ok(SteadyState { rho, residual, iterations, method: SteadyStateMethod::Krylov })
}

/// Photon and phonon statistics of a two-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `P_m` for every photon number in the space.
    pub photon_probs: Vec<f64>,
    pub n_photons: f64,
    pub n_phonons: f64,
    /// `<a^dag a^dag a a> / <a^dag a>^2`.
    pub g2: f64,
}

impl Observables {
    pub fn p(&self, m: usize) -> f64 {
        self.photon_probs.get(m).copied().unwrap_or(0.0)
    }

    pub fn photon_stats(&self) -> PhotonStats {
        PhotonStats { p0: self.p(0), p1: self.p(1), p2: self.p(2), g2: self.g2, method: StatsMethod::MasterEquation }
    }
}

pub fn observables(rho: &DensityMatrix) -> Result<Observables> {
    let probs = rho.photon_distribution();
    let n_photons: f64 = probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
    let pairs: f64 = probs.iter().enumerate().map(|(m, p)| (m * m.saturating_sub(1)) as f64 * p).sum();
    let spec = rho.spec;
    let mut n_phonons = 0.0;
    for m in 0..spec.n_cav {
        for n in 0..spec.n_mech {
            let i = spec.index(m, n);
            n_phonons += n as f64 * rho.rho[(i, i)].re;
        }
    }
    if n_photons < 1e-14 {
        return Err(Error::ZeroPhotonNumber(n_photons));
    }
    Ok(Observables { photon_probs: probs, n_photons, n_phonons, g2: pairs / (n_photons * n_photons) })
}
