use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use optomech::lindblad::*;
use optomech::operators::{build_h_gom, build_mode_operators, expm_hermitian, max_abs};
use optomech::{Error, HilbertSpec, SystemParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Deterministic Hermitian, positive, unit-trace matrix.
fn mixed_state(spec: HilbertSpec) -> DensityMatrix {
    let d = spec.dim();
    let g = DMatrix::from_fn(d, d, |i, j| c(((i * 7 + j * 3) as f64).sin(), ((i + 2 * j) as f64 * 0.37).cos()));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    DensityMatrix::new(spec, rho).unwrap()
}

fn blockade(spec: HilbertSpec) -> SystemParams {
    let _ = spec;
    SystemParams::blockade_reference()
}

#[test]
fn vacuum_is_fixed_point_without_drive() {
    let spec = HilbertSpec::new(3, 8).unwrap();
    let mut p = blockade(spec);
    p.drive = 0.0;
    p.g0 = 0.0;
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let d = apply_liouvillian(&ls, &DensityMatrix::vacuum(spec)).unwrap();
    assert_eq!(max_abs(&d), 0.0);
}

#[test]
fn liouvillian_is_trace_free_and_consistent() {
    let spec = HilbertSpec::new(3, 6).unwrap();
    let p = SystemParams { nbar_m: 0.7, gamma_m: 0.05, drive: 0.2, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let rho = mixed_state(spec);
    let l = Liouvillian::new(&ls);
    let d = l.apply(&rho.rho);
    assert!(d.trace().norm() < 1e-13);
    assert!(max_abs(&(l.apply_hermitian(&rho.rho) - &d)) < 1e-13);

    // Dense reference: -i[H, rho] + sum rate (o rho o^dag - {o^dag o, rho}/2).
    let h = &ls.hamiltonian.matrix;
    let mut want = (h * &rho.rho - &rho.rho * h) * c(0.0, -1.0);
    for ch in &ls.channels {
        let o = &ch.op.matrix;
        let odo = o.adjoint() * o;
        want += (o * &rho.rho * o.adjoint() - (&odo * &rho.rho + &rho.rho * &odo) * c(0.5, 0.0)) * c(ch.rate, 0.0);
    }
    assert!(max_abs(&(d - want)) < 1e-13);

    // Non-Hermitian input through the general route.
    let x = DMatrix::from_fn(spec.dim(), spec.dim(), |i, j| c((i as f64 - j as f64) * 0.1, (i * j) as f64 * 0.01));
    let mut want = (h * &x - &x * h) * c(0.0, -1.0);
    for ch in &ls.channels {
        let o = &ch.op.matrix;
        let odo = o.adjoint() * o;
        want += (o * &x * o.adjoint() - (&odo * &x + &x * &odo) * c(0.5, 0.0)) * c(ch.rate, 0.0);
    }
    assert!(max_abs(&(l.apply(&x) - want)) < 1e-12);
}

#[test]
fn single_photon_decays_at_kappa() {
    let spec = HilbertSpec::new(2, 4).unwrap();
    let p = SystemParams { g0: 0.0, g_ck: 0.0, drive: 0.0, gamma_m: 0.0, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let mut psi = DVector::zeros(spec.dim());
    psi[spec.index(1, 0)] = c(1.0, 0.0);
    let rho = DensityMatrix::from_pure(spec, &psi).unwrap();
    let d = apply_liouvillian(&ls, &rho).unwrap();
    let ops = build_mode_operators(spec);
    let rate = DensityMatrix { spec, rho: d }.expectation(&ops.n_a);
    assert!((rate.re + p.kappa).abs() < 1e-15);

    let times: Vec<f64> = (0..=20).map(|k| k as f64 * 2.0).collect();
    let states = evolve(&ls, &rho, &times).unwrap();
    for (t, s) in times.iter().zip(&states) {
        let n = s.expectation(&ops.n_a).re;
        assert!((n - (-p.kappa * t).exp()).abs() < 1e-8, "t = {t}: {n}");
    }
}

#[test]
fn closed_evolution_matches_exponential() {
    let spec = HilbertSpec::new(2, 30).unwrap();
    let p = SystemParams { omega_c: 0.0, ..SystemParams::cat_reference() };
    let ls = LindbladSpec::new(build_h_gom(spec, &p), vec![]).unwrap();
    let mut psi = DVector::zeros(spec.dim());
    psi[spec.index(0, 0)] = c(0.5f64.sqrt(), 0.0);
    psi[spec.index(1, 0)] = c(0.5f64.sqrt(), 0.0);
    let rho0 = DensityMatrix::from_pure(spec, &psi).unwrap();
    let t = 3.1;
    let states = evolve(&ls, &rho0, &[0.0, t]).unwrap();
    let u = expm_hermitian(&ls.hamiltonian.matrix, t).unwrap();
    let phi = u * psi;
    let fid = (phi.adjoint() * &states[1].rho * &phi)[(0, 0)].re;
    assert!(fid >= 1.0 - 1e-8, "{fid}");
}

#[test]
fn trace_hermiticity_and_positivity_preserved() {
    let spec = HilbertSpec::new(3, 10).unwrap();
    let p = SystemParams { drive: 0.05, gamma_m: 0.01, nbar_m: 0.5, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let rho0 = mixed_state(spec);
    let times: Vec<f64> = (0..=10).map(|k| k as f64 * 10.0).collect();
    let l = Liouvillian::new(&ls);
    let mut worst_trace = 0.0f64;
    let mut worst_eig = 0.0f64;
    let stats = l
        .evolve_observe(&rho0, &times, &EvolveOptions::default(), |_, _, r| {
            worst_trace = worst_trace.max((r.trace() - c(1.0, 0.0)).norm());
            worst_eig = worst_eig.min(r.min_eigenvalue());
            assert!(r.hermiticity_error() < 1e-10);
            Ok(())
        })
        .unwrap();
    assert!(worst_trace < 1e-8, "{worst_trace}");
    assert!(worst_eig >= -1e-8, "{worst_eig}");
    assert!(stats.max_hermiticity_drift < 1e-10);
}

#[test]
fn undriven_steady_states() {
    let spec = HilbertSpec::new(2, 30).unwrap();
    let mut p = SystemParams { drive: 0.0, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let ss = steady_state(&ls).unwrap();
    assert!(max_abs(&(ss.rho - DensityMatrix::vacuum(spec).rho)) < 1e-10);

    p.gamma_m = 0.05;
    p.nbar_m = 1.0;
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let ss = steady_state_with(&ls, &SteadyStateOptions::default()).unwrap();
    assert!(ss.residual < 1e-9);
    let mech = ss.rho.reduced_mechanical();
    let nb: f64 = (0..30).map(|n| n as f64 * mech[(n, n)].re).sum();
    // Truncated geometric distribution with ratio 1/2.
    let z: f64 = (0..30).map(|n| 0.5f64.powi(n)).sum();
    let want: f64 = (0..30).map(|n| n as f64 * 0.5f64.powi(n)).sum::<f64>() / z;
    assert!((nb - want).abs() < 1e-6 && (nb - 1.0).abs() < 1e-6, "{nb}");
}

#[test]
fn krylov_and_integration_agree() {
    let spec = HilbertSpec::new(3, 12).unwrap();
    let p = SystemParams { kappa: 0.5, gamma_m: 0.2, drive: 0.05, g0: 0.4, g_ck: 0.1, delta_c: 0.2, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let a = steady_state_with(&ls, &SteadyStateOptions::default()).unwrap();
    let b = steady_state_with(&ls, &SteadyStateOptions { method: SteadyStateMethod::Integrate, ..Default::default() })
        .unwrap();
    // Integration carries its atol times the Liouvillian norm.
    assert!(a.residual < 1e-9 && b.residual < 1e-8, "{} {}", a.residual, b.residual);
    assert!(max_abs(&(&a.rho.rho - &b.rho.rho)) < 1e-7, "{}", max_abs(&(&a.rho.rho - &b.rho.rho)));
    let (oa, ob) = (observables(&a.rho).unwrap(), observables(&b.rho).unwrap());
    assert!(((oa.g2 - ob.g2) / ob.g2).abs() < 1e-3);
}

#[test]
fn steady_state_requires_cavity_loss() {
    let spec = HilbertSpec::new(2, 5).unwrap();
    let p = SystemParams { kappa: 0.0, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    assert!(matches!(steady_state(&ls), Err(Error::Domain(_))));
}

#[test]
fn observables_of_simple_states() {
    let spec = HilbertSpec::new(4, 3).unwrap();
    let p = SystemParams { g0: 0.0, g_ck: 0.0, delta_c: 0.0, ..blockade(spec) };
    let ls = LindbladSpec::from_params(spec, &p).unwrap();
    let ss = steady_state(&ls).unwrap();
    let o = observables(&ss).unwrap();
    assert!((o.g2 - 1.0).abs() < 1e-3, "{}", o.g2);
    let n_coh = 4.0 * p.drive * p.drive / (p.kappa * p.kappa);
    assert!((o.n_photons - n_coh).abs() / n_coh < 1e-3);

    let mut psi = DVector::zeros(spec.dim());
    psi[spec.index(1, 2)] = c(1.0, 0.0);
    let fock = DensityMatrix::from_pure(spec, &psi).unwrap();
    let o = observables(&fock).unwrap();
    assert_eq!(o.g2, 0.0);
    assert_eq!(o.n_phonons, 2.0);
    assert!(matches!(observables(&DensityMatrix::vacuum(spec)), Err(Error::ZeroPhotonNumber(_))));
}
