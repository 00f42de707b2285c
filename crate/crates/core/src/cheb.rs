//! Chebyshev expansions: coefficients from the discrete Fourier sum over
//! Chebyshev–Lobatto samples, Clenshaw evaluation, and degree selection for
//! the normalized inverse target.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::target_fn::TargetSpec;

/// Largest number of angles `choose_degree` will return unless told otherwise.
pub const DEFAULT_NA_CAP: usize = 100_000_000;

/// Above this many multiply-adds `compute_coeffs_auto` switches to the FFT.
const DIRECT_WORK_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Truncated expansion `sum_{k=0}^{N_c} c_k T_k(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries<T> {
    coeffs: Vec<T>,
    parity: Parity,
}

impl<T: Real> ChebSeries<T> {
    /// Builds a series, zeroing the coefficients the parity forbids.
    /// Those coefficients must already be negligible.
    pub fn new(mut coeffs: Vec<T>, parity: Parity) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a Chebyshev series needs at least c_0"));
        }
        let tol = parity_tolerance::<T>();
        let forbidden = match parity {
            Parity::Odd => 0,
            Parity::Even => 1,
            Parity::None => return Ok(Self { coeffs, parity }),
        };
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k % 2 == forbidden {
                if c.abs() > tol {
                    return Err(Error::ParityViolation {
                        index: k,
                        value: c.to_f64_lossy(),
                    });
                }
                *c = T::zero();
            }
        }
        Ok(Self { coeffs, parity })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `N_c`, the highest retained index.
    pub fn degree_nc(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `N_a = N_c + 1`.
    pub fn num_angles(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, s: T) -> T {
        eval_series(self, s)
    }
}

fn parity_tolerance<T: Real>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(1e3))
}

fn validate_sizes(nc: usize, nq: usize) -> Result<()> {
    if nq < nc || nq == 0 {
        return Err(Error::QuadratureTooSmall { nq, nc });
    }
    Ok(())
}

/// Samples `f(-cos(j pi / N_q))` for `j = 0 .. 2 N_q`.
fn sample<T: Real>(f: &impl Fn(T) -> T, nq: usize) -> Result<Vec<T>> {
    let step = T::PI() / T::of_usize(nq);
    (0..2 * nq)
        .map(|j| {
            let s = -(T::of_usize(j) * step).cos();
            let v = f(s);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample {
                    s: s.to_f64_lossy(),
                    value: v.to_f64_lossy(),
                })
            }
        })
        .collect()
}

fn weight<T: Real>(k: usize, nq: usize) -> T {
    let two_nq = T::of_usize(2 * nq);
    let w = if k == 0 { T::one() } else { T::of(2.0) } / two_nq;
    if k % 2 == 1 {
        -w
    } else {
        w
    }
}

/// Coefficients `c_0 .. c_{N_c}` from `2 N_q` samples by the direct cosine sum,
/// `c_k = (2 - delta_k0) / (2 N_q) (-1)^k Re sum_j f(-cos(j pi/N_q)) e^{i k j pi / N_q}`.
pub fn compute_coeffs<T: Real>(
    f: impl Fn(T) -> T,
    degree_nc: usize,
    quadrature_nq: usize,
    parity: Parity,
) -> Result<ChebSeries<T>> {
    validate_sizes(degree_nc, quadrature_nq)?;
    let samples = sample(&f, quadrature_nq)?;
    let period = 2 * quadrature_nq;
    let step = T::PI() / T::of_usize(quadrature_nq);
    let cos_table: Vec<T> = (0..period).map(|m| (T::of_usize(m) * step).cos()).collect();
    let coeffs = (0..=degree_nc)
        .map(|k| {
            let mut acc = T::zero();
            let mut idx = 0usize;
            for g in &samples {
                acc += *g * cos_table[idx];
                idx += k;
                if idx >= period {
                    idx %= period;
                }
            }
            weight::<T>(k, quadrature_nq) * acc
        })
        .collect();
    ChebSeries::new(coeffs, parity)
}

/// Same sum as [`compute_coeffs`] evaluated with one length-`2 N_q` FFT.
pub fn compute_coeffs_fft<T: Real>(
    f: impl Fn(T) -> T,
    degree_nc: usize,
    quadrature_nq: usize,
    parity: Parity,
) -> Result<ChebSeries<T>> {
    validate_sizes(degree_nc, quadrature_nq)?;
    let samples = sample(&f, quadrature_nq)?;
    let mut buf: Vec<Complex<T>> = samples
        .into_iter()
        .map(|re| Complex::new(re, T::zero()))
        .collect();
    let mut planner = FftPlanner::<T>::new();
    // inverse transform: sum_j g_j e^{+2 pi i k j / (2 N_q)}
    planner.plan_fft_inverse(buf.len()).process(&mut buf);
    let coeffs = buf
        .iter()
        .take(degree_nc + 1)
        .enumerate()
        .map(|(k, z)| weight::<T>(k, quadrature_nq) * z.re)
        .collect();
    ChebSeries::new(coeffs, parity)
}

/// Direct sum for small problems, FFT otherwise.
pub fn compute_coeffs_auto<T: Real>(
    f: impl Fn(T) -> T,
    degree_nc: usize,
    quadrature_nq: usize,
    parity: Parity,
) -> Result<ChebSeries<T>> {
    if (degree_nc + 1).saturating_mul(2 * quadrature_nq) <= DIRECT_WORK_LIMIT {
        compute_coeffs(f, degree_nc, quadrature_nq, parity)
    } else {
        compute_coeffs_fft(f, degree_nc, quadrature_nq, parity)
    }
}

/// Clenshaw evaluation of `sum_k c_k T_k(s)`.
pub fn eval_series<T: Real>(series: &ChebSeries<T>, s: T) -> T {
    clenshaw(series.coeffs(), s)
}

/// Clenshaw recurrence on a raw coefficient slice.
pub fn clenshaw<T: Real>(coeffs: &[T], s: T) -> T {
    match coeffs.len() {
        0 => return T::zero(),
        1 => return coeffs[0],
        _ => {}
    }
    let two_s = s + s;
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    for &c in coeffs[1..].iter().rev() {
        let b0 = c + two_s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + s * b1 - b2
}

/// Smallest even `N_a` whose truncation tail `sum_{k >= N_a} |c_k|` of the
/// normalized target expansion is at most `eps_target`.
pub fn choose_degree(spec: &TargetSpec<f64>, eps_target: f64) -> Result<usize> {
    choose_degree_capped(spec, eps_target, DEFAULT_NA_CAP)
}

pub fn choose_degree_capped(spec: &TargetSpec<f64>, eps_target: f64, cap: usize) -> Result<usize> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::invalid(format!(
            "eps_target must lie in (0, 1), got {eps_target}"
        )));
    }
    let mut reference = 64usize;
    loop {
        let series = compute_coeffs_fft(|s| spec.eval(s), reference, reference, Parity::Odd)?;
        let nc = tail_cutoff(series.coeffs(), eps_target);
        let na = nc + 1;
        if na > cap {
            return Err(Error::DegreeCap { required: na, cap });
        }
        if 4 * nc <= reference {
            return Ok(na);
        }
        reference *= 2;
    }
}

/// Smallest odd `N_c >= 1` with `sum_{k > N_c} |c_k| <= eps`.
fn tail_cutoff(coeffs: &[f64], eps: f64) -> usize {
    let mut tail = 0.0;
    let mut nc = coeffs.len() - 1;
    // walk down while the tail including c_nc still fits under eps
    while nc > 1 {
        let next = tail + coeffs[nc].abs();
        if next > eps {
            break;
        }
        tail = next;
        nc -= 1;
    }
    if nc.is_multiple_of(2) {
        nc + 1
    } else {
        nc
    }
}
