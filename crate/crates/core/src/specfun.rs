//! Special functions and Fock-basis matrix elements of the displacement
//! operator `D(x) = exp(x b^dag - x^* b)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::Result;
use crate::model::SystemParams;
use crate::scalar::Scalar;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// `ln(n!)`. Exact products below 21, Stirling series above.
pub fn log_factorial<T: Scalar>(n: usize) -> T {
    T::lit(log_factorial_f64(n))
}

fn log_factorial_f64(n: usize) -> f64 {
    if n <= 20 {
        let mut f: u64 = 1;
        for k in 2..=n as u64 {
            f *= k;
        }
        return (f as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Truncation error of this series is below 1e-19 for n > 20.
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    x * x.ln() - x + 0.5 * x.ln() + LN_SQRT_2PI + series
}

fn log_factorial_table(n_max: usize) -> Vec<f64> {
    (0..=n_max).map(log_factorial_f64).collect()
}

/// Associated Laguerre polynomial `L_n^k(x)` by upward recurrence in `n`.
pub fn laguerre_assoc<T: Scalar>(n: usize, k: i64, x: T) -> T {
    *laguerre_assoc_seq(n, k, x).last().expect("non-empty")
}

/// `[L_0^k(x), ..., L_{n_max}^k(x)]`.
pub fn laguerre_assoc_seq<T: Scalar>(n_max: usize, k: i64, x: T) -> Vec<T> {
    let kf = T::from_i64(k).expect("order representable");
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(T::one());
    if n_max == 0 {
        return out;
    }
    out.push(T::one() + kf - x);
    for j in 1..n_max {
        let jf = T::from_usize_lossy(j);
        let next = ((T::lit(2.0) * jf + T::one() + kf - x) * out[j] - (jf + kf) * out[j - 1])
            / (jf + T::one());
        out.push(next);
    }
    out
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite<T: Scalar>(n: usize, x: T) -> T {
    *hermite_seq(n, x).last().expect("non-empty")
}

/// `[H_0(x), ..., H_{n_max}(x)]`.
pub fn hermite_seq<T: Scalar>(n_max: usize, x: T) -> Vec<T> {
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(T::one());
    if n_max == 0 {
        return out;
    }
    out.push(two * x);
    for j in 1..n_max {
        let next = two * x * out[j] - two * T::from_usize_lossy(j) * out[j - 1];
        out.push(next);
    }
    out
}

/// Normalized oscillator eigenfunctions `<x|n> = H_n(x) e^{-x^2/2} / sqrt(sqrt(pi) 2^n n!)`
/// for `n = 0..count`, with the normalization applied in log space.
pub fn oscillator_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let h = hermite_seq(count - 1, x);
    let ln_sqrt_pi = 0.5 * std::f64::consts::PI.ln();
    let ln2 = std::f64::consts::LN_2;
    h.iter()
        .enumerate()
        .map(|(n, hn)| {
            let ln_norm = 0.5 * (ln_sqrt_pi + n as f64 * ln2 + log_factorial_f64(n));
            hn * (-0.5 * x * x - ln_norm).exp()
        })
        .collect()
}

/// Unit-modulus `(z/|z|)^power`, or 1 for `z == 0`.
fn unit_power<T: Scalar>(z: Complex<T>, power: usize) -> Complex<T> {
    if z.is_zero() {
        return Complex::new(T::one(), T::zero());
    }
    Complex::from_polar(T::one(), z.arg() * T::from_usize_lossy(power))
}

/// `<n| D(x) |l>` in closed form through associated Laguerre polynomials.
pub fn displacement_element<T: Scalar>(n: usize, l: usize, x: Complex<T>) -> Complex<T> {
    if x.is_zero() {
        return if n == l { Complex::new(T::one(), T::zero()) } else { Complex::zero() };
    }
    let r2 = x.norm_sqr();
    let ln_r = x.norm().ln();
    let (low, d, phase) = if l >= n {
        (n, l - n, unit_power(-x.conj(), l - n))
    } else {
        (l, n - l, unit_power(x, n - l))
    };
    let high = low + d;
    let ln_mag = T::lit(0.5) * (log_factorial::<T>(low) - log_factorial::<T>(high)) - r2 / T::lit(2.0)
        + T::from_usize_lossy(d) * ln_r;
    phase * (ln_mag.exp() * laguerre_assoc(low, d as i64, r2))
}

/// The `rows x cols` upper-left block of `D(x)` in the Fock basis.
///
/// Each diagonal shares one Laguerre order, so the block costs one
/// recurrence per diagonal.
pub fn displacement_matrix<T: Scalar>(rows: usize, cols: usize, x: Complex<T>) -> DMatrix<Complex<T>> {
    let mut out = DMatrix::from_element(rows, cols, Complex::zero());
    if x.is_zero() {
        for i in 0..rows.min(cols) {
            out[(i, i)] = Complex::new(T::one(), T::zero());
        }
        return out;
    }
    let lf = log_factorial_table(rows + cols);
    let r2 = x.norm_sqr();
    let ln_r = x.norm().ln().to_f64().expect("finite");
    let gauss = -r2.to_f64().expect("finite") / 2.0;
    let upper_unit = unit_power(-x.conj(), 1);
    let lower_unit = unit_power(x, 1);

    // upper triangle, l = n + d
    for d in 0..cols {
        let count = rows.min(cols - d);
        if count == 0 {
            break;
        }
        let lag = laguerre_assoc_seq(count - 1, d as i64, r2);
        let phase = upper_unit.powu(d as u32);
        for n in 0..count {
            let ln_mag = 0.5 * (lf[n] - lf[n + d]) + gauss + d as f64 * ln_r;
            out[(n, n + d)] = phase * (T::lit(ln_mag.exp()) * lag[n]);
        }
    }
    // strict lower triangle, n = l + d
    for d in 1..rows {
        let count = cols.min(rows - d);
        if count == 0 {
            break;
        }
        let lag = laguerre_assoc_seq(count - 1, d as i64, r2);
        let phase = lower_unit.powu(d as u32);
        for l in 0..count {
            let ln_mag = 0.5 * (lf[l] - lf[l + d]) + gauss + d as f64 * ln_r;
            out[(l + d, l)] = phase * (T::lit(ln_mag.exp()) * lag[l]);
        }
    }
    out
}

/// Franck-Condon factor `<n~(m)| l~(m')>` between displaced number states of
/// the m- and m'-photon sectors.
pub fn franck_condon<T: Scalar>(
    n: usize,
    m: usize,
    l: usize,
    m_prime: usize,
    params: &SystemParams<T>,
) -> Result<Complex<T>> {
    let shift = params.xi_m(m_prime)? - params.xi_m(m)?;
    Ok(displacement_element(n, l, Complex::new(shift, T::zero())))
}

/// Matrix `[<n~(m)| l~(m')>]` for `n, l < size`.
pub fn franck_condon_matrix<T: Scalar>(
    m: usize,
    m_prime: usize,
    size: usize,
    params: &SystemParams<T>,
) -> Result<DMatrix<Complex<T>>> {
    let shift = params.xi_m(m_prime)? - params.xi_m(m)?;
    Ok(displacement_matrix(size, size, Complex::new(shift, T::zero())))
}

/// First-order (Lamb-Dicke) expansion of [`franck_condon`].
pub fn franck_condon_lamb_dicke<T: Scalar>(
    n: usize,
    m: usize,
    l: usize,
    m_prime: usize,
    params: &SystemParams<T>,
) -> Result<T> {
    let diff = params.xi_m(m)? - params.xi_m(m_prime)?;
    let mut v = if n == l { T::one() } else { T::zero() };
    if n == l + 1 {
        v = v - diff * T::from_usize_lossy(l + 1).sqrt();
    }
    if n + 1 == l {
        v = v + diff * T::from_usize_lossy(l).sqrt();
    }
    Ok(v)
}
