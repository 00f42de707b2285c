//! Angle conventions and evaluation of the QSP polynomial
//! `P[alpha](s) = Re U_00`, `U = e^{i alpha_0 Z} prod_{l>=1} W(s) e^{i alpha_l Z}`,
//! with `W(s) = [[s, i sqrt(1-s^2)], [i sqrt(1-s^2), s]]`.
//!
//! The free functions take raw `alpha` slices and accept any sequence.
//! [`AngleSet`] carries the structural invariants (even length, inversion
//! symmetry) and the metadata of where a sequence came from.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Circuit angles.
    Phi,
    /// `theta_j = phi_j - pi/2`.
    Theta,
    /// `phi_j - pi/4` at both ends, `phi_j - pi/2` elsewhere.
    Alpha,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Phi => "phi",
            Convention::Theta => "theta",
            Convention::Alpha => "alpha",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(Convention::Phi),
            "theta" => Ok(Convention::Theta),
            "alpha" => Ok(Convention::Alpha),
            other => Err(Error::invalid(format!("unknown angle convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Solved,
    Estimated,
    Loaded,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Solved => "solved",
            Origin::Estimated => "estimated",
            Origin::Loaded => "loaded",
        })
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solved" => Ok(Origin::Solved),
            "estimated" => Ok(Origin::Estimated),
            "loaded" => Ok(Origin::Loaded),
            other => Err(Error::invalid(format!("unknown angle origin '{other}'"))),
        }
    }
}

/// Shift that takes `phi_j` to the given convention (`value = phi - shift`).
fn shift<T: Real>(convention: Convention, j: usize, n: usize) -> T {
    match convention {
        Convention::Phi => T::zero(),
        Convention::Theta => T::FRAC_PI_2(),
        Convention::Alpha if j == 0 || j + 1 == n => T::FRAC_PI_4(),
        Convention::Alpha => T::FRAC_PI_2(),
    }
}

/// Re-expresses a raw angle sequence in another convention.
pub fn convert_values<T: Real>(values: &[T], from: Convention, to: Convention) -> Vec<T> {
    let n = values.len();
    if from == to {
        return values.to_vec();
    }
    values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let phi = v + shift::<T>(from, j, n);
            phi - shift::<T>(to, j, n)
        })
        .collect()
}

/// A phase sequence with its convention and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet<T> {
    convention: Convention,
    values: Vec<T>,
    kappa_qsvt: T,
    eta: T,
    origin: Origin,
    eps_reported: Option<T>,
}

impl<T: Real> AngleSet<T> {
    /// Validates length parity and exact inversion symmetry.
    pub fn new(
        convention: Convention,
        values: Vec<T>,
        kappa_qsvt: T,
        eta: T,
        origin: Origin,
    ) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::OddAngleCount(n));
        }
        if let Some(j) = (0..n / 2).find(|&j| values[j] != values[n - 1 - j]) {
            return Err(Error::NotSymmetric(j));
        }
        if !(kappa_qsvt >= T::one()) {
            return Err(Error::invalid(format!("kappa_qsvt must be >= 1, got {kappa_qsvt:?}")));
        }
        if !(eta > T::zero() && eta < T::one()) {
            return Err(Error::invalid(format!("eta must lie in (0, 1), got {eta:?}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("angle values must be finite"));
        }
        Ok(Self {
            convention,
            values,
            kappa_qsvt,
            eta,
            origin,
            eps_reported: None,
        })
    }

    /// Builds the full symmetric sequence from its first half.
    pub fn from_half(
        convention: Convention,
        half: &[T],
        kappa_qsvt: T,
        eta: T,
        origin: Origin,
    ) -> Result<Self> {
        let mut values = half.to_vec();
        values.extend(half.iter().rev());
        Self::new(convention, values, kappa_qsvt, eta, origin)
    }

    pub fn with_eps_reported(mut self, eps: Option<T>) -> Self {
        self.eps_reported = eps;
        self
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// First `N_a / 2` values; the rest is their mirror image.
    pub fn half(&self) -> &[T] {
        &self.values[..self.values.len() / 2]
    }

    pub fn num_angles(&self) -> usize {
        self.values.len()
    }

    pub fn kappa(&self) -> T {
        self.kappa_qsvt
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn eps_reported(&self) -> Option<T> {
        self.eps_reported
    }

    pub fn convert(&self, to: Convention) -> AngleSet<T> {
        AngleSet {
            convention: to,
            values: convert_values(&self.values, self.convention, to),
            ..self.clone()
        }
    }

    /// Values in the requested convention without cloning metadata.
    pub fn values_in(&self, to: Convention) -> Vec<T> {
        convert_values(&self.values, self.convention, to)
    }

    /// `P(s)` for this set, via the half-length symmetric kernel.
    pub fn poly(&self, s: T) -> Result<T> {
        check_domain(s)?;
        Ok(SymmetricQsp::from_angles(self).value(s))
    }
}

fn check_domain<T: Real>(s: T) -> Result<()> {
    if s.abs() <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfDomain(s.to_f64_lossy()))
    }
}

fn check_len<T>(alpha: &[T]) -> Result<()> {
    if alpha.len() < 2 {
        return Err(Error::invalid(format!(
            "QSP evaluation needs N_a >= 2, got {}",
            alpha.len()
        )));
    }
    Ok(())
}

#[inline]
fn phase<T: Real>(a: T) -> Complex<T> {
    let (sin, cos) = a.sin_cos();
    Complex::new(cos, sin)
}

#[inline]
fn w_parts<T: Real>(s: T) -> (T, T) {
    (s, (T::one() - s * s).max(T::zero()).sqrt())
}

/// `(a, b) * W`.
#[inline]
fn row_times_w<T: Real>(r: [Complex<T>; 2], s: T, t: T) -> [Complex<T>; 2] {
    let it = Complex::new(T::zero(), t);
    [r[0] * s + r[1] * it, r[0] * it + r[1] * s]
}

/// `W * (a, b)^T`; `W` is symmetric so this is the same map.
#[inline]
fn w_times_col<T: Real>(c: [Complex<T>; 2], s: T, t: T) -> [Complex<T>; 2] {
    row_times_w(c, s, t)
}

/// Multiplication by `e^{i a Z}` given `e^{i a}`; diagonal, so side does not matter.
#[inline]
fn times_phase<T: Real>(v: [Complex<T>; 2], e: Complex<T>) -> [Complex<T>; 2] {
    [v[0] * e, v[1] * e.conj()]
}

/// `P[alpha](s) = Re U_00`, accumulating the first row of `U` left to right.
pub fn eval_poly<T: Real>(alpha: &[T], s: T) -> Result<T> {
    check_len(alpha)?;
    check_domain(s)?;
    Ok(eval_poly_unchecked(alpha, s))
}

fn eval_poly_unchecked<T: Real>(alpha: &[T], s: T) -> T {
    let (s, t) = w_parts(s);
    let mut row = [phase(alpha[0]), Complex::new(T::zero(), T::zero())];
    for &a in &alpha[1..] {
        row = times_phase(row_times_w(row, s, t), phase(a));
    }
    row[0].re
}

/// The full 2x2 product `U[alpha](s)`.
pub fn eval_unitary<T: Real>(alpha: &[T], s: T) -> Result<[[Complex<T>; 2]; 2]> {
    check_len(alpha)?;
    check_domain(s)?;
    let (s, t) = w_parts(s);
    let e0 = phase(alpha[0]);
    let zero = Complex::new(T::zero(), T::zero());
    let mut u = [[e0, zero], [zero, e0.conj()]];
    for &a in &alpha[1..] {
        let e = phase(a);
        for row in u.iter_mut() {
            *row = times_phase(row_times_w(*row, s, t), e);
        }
    }
    Ok(u)
}

/// `P[alpha](s)` and `dP/d alpha_l` for every `l`.
///
/// With `U = A_l e^{i alpha_l Z} B_l`, the derivative is
/// `Re (e_0^T A_l (iZ) e^{i alpha_l Z} B_l e_0)`: one backward pass builds the
/// suffix columns, one forward pass the prefix rows.
pub fn eval_poly_grad<T: Real>(alpha: &[T], s: T) -> Result<(T, Vec<T>)> {
    check_len(alpha)?;
    check_domain(s)?;
    let n = alpha.len();
    let (s, t) = w_parts(s);
    let phases: Vec<Complex<T>> = alpha.iter().map(|&a| phase(a)).collect();
    let zero = Complex::new(T::zero(), T::zero());

    // suffix[l] = e^{i alpha_l Z} W e^{i alpha_{l+1} Z} ... W e^{i alpha_{n-1} Z} e_0
    let mut suffix = vec![[zero, zero]; n];
    suffix[n - 1] = [phases[n - 1], zero];
    for l in (0..n - 1).rev() {
        suffix[l] = times_phase(w_times_col(suffix[l + 1], s, t), phases[l]);
    }

    let mut grad = Vec::with_capacity(n);
    let mut row = [Complex::new(T::one(), T::zero()), zero];
    for l in 0..n {
        if l > 0 {
            row = row_times_w(times_phase(row, phases[l - 1]), s, t);
        }
        grad.push(i_z_form(row, suffix[l]));
    }
    // same operation order as eval_poly, so the values agree bit for bit
    let value = times_phase(row, phases[n - 1])[0].re;
    Ok((value, grad))
}

/// `Re (r (iZ) c)`.
#[inline]
fn i_z_form<T: Real>(r: [Complex<T>; 2], c: [Complex<T>; 2]) -> T {
    // i (r0 c0 - r1 c1), real part = -Im(r0 c0 - r1 c1)
    -(r[0] * c[0] - r[1] * c[1]).im
}

/// Element-wise [`eval_poly`]; the output order follows `s_grid`.
pub fn eval_poly_batch<T: Real>(alpha: &[T], s_grid: &[T]) -> Result<Vec<T>> {
    check_len(alpha)?;
    if let Some(&bad) = s_grid.iter().find(|s| s.abs() > T::one()) {
        return Err(Error::OutOfDomain(bad.to_f64_lossy()));
    }
    Ok(s_grid
        .par_iter()
        .map(|&s| eval_poly_unchecked(alpha, s))
        .collect())
}

/// Evaluator for inversion-symmetric sequences.
///
/// With `V = e^{i a_0 Z} W ... W e^{i a_{d-1} Z}` over the first half,
/// `U = V W V^T`, so `P = Re(v W v^T)` for the first row `v` of `V`; the
/// gradient with respect to each mirrored pair is `2 Re(r_j (iZ) c_j)`.
#[derive(Debug, Clone)]
pub struct SymmetricQsp<T> {
    phases: Vec<Complex<T>>,
}

impl<T: Real> SymmetricQsp<T> {
    /// From the first half of an `alpha`-convention sequence.
    pub fn from_half_alpha(half: &[T]) -> Self {
        Self {
            phases: half.iter().map(|&a| phase(a)).collect(),
        }
    }

    pub fn from_angles(angles: &AngleSet<T>) -> Self {
        let alpha = angles.values_in(Convention::Alpha);
        Self::from_half_alpha(&alpha[..alpha.len() / 2])
    }

    /// Number of free parameters, `N_a / 2`.
    pub fn half_len(&self) -> usize {
        self.phases.len()
    }

    fn first_row(&self, s: T, t: T) -> [Complex<T>; 2] {
        let zero = Complex::new(T::zero(), T::zero());
        let mut row = [self.phases[0], zero];
        for &e in &self.phases[1..] {
            row = times_phase(row_times_w(row, s, t), e);
        }
        row
    }

    /// `P(s)`; `s` must lie in `[-1, 1]`.
    pub fn value(&self, s: T) -> T {
        let (s, t) = w_parts(s);
        let v = self.first_row(s, t);
        let w = w_times_col(v, s, t);
        (v[0] * w[0] + v[1] * w[1]).re
    }

    /// Returns `P(s)` and adds `weight(P(s)) * dP/da_j` into `grad[j]`.
    /// `rows` is scratch space, resized as needed.
    pub fn value_and_grad_into(
        &self,
        s: T,
        grad: &mut [T],
        rows: &mut Vec<[Complex<T>; 2]>,
        weight: impl FnOnce(T) -> T,
    ) -> T {
        let d = self.phases.len();
        let (s, t) = w_parts(s);
        let zero = Complex::new(T::zero(), T::zero());
        rows.clear();
        let mut row = [Complex::new(T::one(), T::zero()), zero];
        for &e in &self.phases {
            rows.push(row);
            row = row_times_w(times_phase(row, e), s, t);
        }
        // row = v W at this point
        let v = times_phase(rows[d - 1], self.phases[d - 1]);
        let w = w_times_col(v, s, t);
        let value = (v[0] * w[0] + v[1] * w[1]).re;

        let weight = weight(value);
        let two_w = weight + weight;
        let mut col = times_phase(w, self.phases[d - 1]);
        grad[d - 1] += two_w * i_z_form(rows[d - 1], col);
        for j in (0..d - 1).rev() {
            col = times_phase(w_times_col(col, s, t), self.phases[j]);
            grad[j] += two_w * i_z_form(rows[j], col);
        }
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    use twofloat::TwoFloat;

    fn random_alpha(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let half: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        half.iter().chain(half.iter().rev()).copied().collect()
    }

    /// Full 2x2 matrix product in double-double arithmetic.
    fn oracle_poly(alpha: &[f64], s: f64) -> f64 {
        type C = Complex<TwoFloat>;
        let z = TwoFloat::from(0.0);
        let s_dd = TwoFloat::from(s);
        let t_dd = (TwoFloat::from(1.0) - s_dd * s_dd).sqrt();
        let mul = |a: [[C; 2]; 2], b: [[C; 2]; 2]| {
            let mut out = [[C::new(z, z); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            out
        };
        let rot = |a: f64| {
            let a = TwoFloat::from(a);
            let (sn, cs) = (a.sin(), a.cos());
            [[C::new(cs, sn), C::new(z, z)], [C::new(z, z), C::new(cs, -sn)]]
        };
        let w = [[C::new(s_dd, z), C::new(z, t_dd)], [C::new(z, t_dd), C::new(s_dd, z)]];
        let mut u = rot(alpha[0]);
        for &a in &alpha[1..] {
            u = mul(mul(u, w), rot(a));
        }
        u[0][0].re.hi()
    }

    #[test]
    fn convention_examples() {
        let phi = AngleSet::new(Convention::Phi, vec![FRAC_PI_2; 4], 10.0, 0.125, Origin::Loaded).unwrap();
        assert!(phi.convert(Convention::Theta).values().iter().all(|&v| v == 0.0));
        let alpha = phi.convert(Convention::Alpha);
        assert_abs_diff_eq!(alpha.values()[0], FRAC_PI_4, epsilon = 1e-16);
        assert_abs_diff_eq!(alpha.values()[3], FRAC_PI_4, epsilon = 1e-16);
        assert_eq!(alpha.values()[1], 0.0);
        assert_eq!("theta".parse::<Convention>().unwrap(), Convention::Theta);
        assert!("psi".parse::<Convention>().is_err());
    }

    #[test]
    fn angle_set_validation() {
        let ok = |v: Vec<f64>| AngleSet::new(Convention::Phi, v, 10.0, 0.125, Origin::Loaded);
        assert!(matches!(ok(vec![0.1, 0.2, 0.1]), Err(Error::OddAngleCount(3))));
        assert!(matches!(ok(vec![0.1, 0.2, 0.3, 0.1]), Err(Error::NotSymmetric(1))));
        assert!(ok(vec![]).is_err());
        assert!(ok(vec![0.1, 0.1]).is_ok());
        assert!(AngleSet::new(Convention::Phi, vec![0.1, 0.1], 0.5, 0.125, Origin::Loaded).is_err());
    }

    #[test]
    fn zero_alpha_gives_chebyshev() {
        let alpha = vec![0.0; 4];
        assert_abs_diff_eq!(eval_poly(&alpha, 0.5).unwrap(), -1.0, epsilon = 1e-15);
        for n in [2usize, 5, 64, 301] {
            let alpha = vec![0.0; n];
            for i in 0..101 {
                let s = -1.0 + 2.0 * i as f64 / 100.0;
                let expected = ((n - 1) as f64 * s.acos()).cos();
                assert_abs_diff_eq!(eval_poly(&alpha, s).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn value_at_one_is_cos_of_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alpha = random_alpha(&mut rng, 17);
        let total: f64 = alpha.iter().sum();
        assert_abs_diff_eq!(eval_poly(&alpha, 1.0).unwrap(), total.cos(), epsilon = 1e-13);
        let (_, grad) = eval_poly_grad(&alpha, 1.0).unwrap();
        for g in grad {
            assert_abs_diff_eq!(g, -total.sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn matches_double_double_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alpha = random_alpha(&mut rng, 64);
        let got = eval_poly(&alpha, 0.3).unwrap();
        assert_abs_diff_eq!(got, oracle_poly(&alpha, 0.3), epsilon = 1e-13);
        for _ in 0..10 {
            let s = rng.gen_range(-1.0..1.0);
            assert_abs_diff_eq!(eval_poly(&alpha, s).unwrap(), oracle_poly(&alpha, s), epsilon = 1e-13);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        assert!(matches!(eval_poly(&[0.0, 0.0], 1.5), Err(Error::OutOfDomain(_))));
        assert!(eval_poly(&[0.0], 0.5).is_err());
        assert!(eval_poly_grad(&[0.0, 0.0], -1.01).is_err());
        assert!(eval_poly_batch(&[0.0, 0.0], &[0.1, 2.0]).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut alpha = random_alpha(&mut rng, 32);
        let s = 0.4;
        let (value, grad) = eval_poly_grad(&alpha, s).unwrap();
        assert_eq!(value, eval_poly(&alpha, s).unwrap());
        let h = 1e-6;
        for l in 0..alpha.len() {
            let orig = alpha[l];
            alpha[l] = orig + h;
            let plus = eval_poly(&alpha, s).unwrap();
            alpha[l] = orig - h;
            let minus = eval_poly(&alpha, s).unwrap();
            alpha[l] = orig;
            assert_abs_diff_eq!(grad[l], (plus - minus) / (2.0 * h), epsilon = 1e-6);
        }
    }

    #[test]
    fn symmetric_gradient_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let alpha = random_symmetric(&mut rng, 40);
        let (_, grad) = eval_poly_grad(&alpha, 0.77).unwrap();
        let n = grad.len();
        for j in 0..n / 2 {
            assert_abs_diff_eq!(grad[j], grad[n - 1 - j], epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetric_kernel_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 4, 10, 128] {
            let alpha = random_symmetric(&mut rng, n);
            let kernel = SymmetricQsp::from_half_alpha(&alpha[..n / 2]);
            let mut grad = vec![0.0; n / 2];
            let mut rows = Vec::new();
            for _ in 0..5 {
                let s = rng.gen_range(-1.0..1.0);
                let (value, full) = eval_poly_grad(&alpha, s).unwrap();
                grad.iter_mut().for_each(|g| *g = 0.0);
                let v = kernel.value_and_grad_into(s, &mut grad, &mut rows, |_| 1.0);
                assert_abs_diff_eq!(v, value, epsilon = 1e-13);
                assert_abs_diff_eq!(kernel.value(s), value, epsilon = 1e-13);
                for j in 0..n / 2 {
                    assert_abs_diff_eq!(grad[j], full[j] + full[n - 1 - j], epsilon = 1e-12);
                }
            }
        }
    }

    fn unitarity_defect(u: &[[Complex<f64>; 2]; 2]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex::new(0.0, 0.0);
                for k in 0..2 {
                    acc += u[k][i].conj() * u[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    #[test]
    fn unitary_stays_unitary() {
        // Rounding drift grows linearly with the length for random phases,
        // about 1e-16 per factor.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (n, bound) in [(10_000usize, 1e-12), (100_000, 1e-11)] {
            let alpha = random_alpha(&mut rng, n);
            let u = eval_unitary(&alpha, 0.61).unwrap();
            assert!(unitarity_defect(&u) <= bound, "n = {n}");
            assert_abs_diff_eq!(u[0][0].re, eval_poly(&alpha, 0.61).unwrap(), epsilon = 1e-11);
        }
    }

    #[test]
    fn batch_matches_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alpha = random_alpha(&mut rng, 50);
        let grid: Vec<f64> = (0..1001).map(|i| -1.0 + 2.0 * i as f64 / 1000.0).collect();
        let batch = eval_poly_batch(&alpha, &grid).unwrap();
        for (s, b) in grid.iter().zip(&batch) {
            assert_eq!(b.to_bits(), eval_poly(&alpha, *s).unwrap().to_bits());
        }
        assert!(eval_poly_batch(&alpha, &[]).unwrap().is_empty());
        assert_eq!(eval_poly_batch(&alpha, &[0.5]).unwrap(), vec![eval_poly(&alpha, 0.5).unwrap()]);
    }

    #[test]
    fn f32_evaluation() {
        let alpha = [0.3_f32, -0.2, 0.1, -0.2, 0.3];
        let a64: Vec<f64> = alpha.iter().map(|&a| a as f64).collect();
        let p32 = eval_poly(&alpha, 0.25_f32).unwrap() as f64;
        assert_abs_diff_eq!(p32, eval_poly(&a64, 0.25).unwrap(), epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn conversions_round_trip(half in proptest::collection::vec(-3.0_f64..3.0, 1..20)) {
            let set = AngleSet::from_half(Convention::Phi, &half, 10.0, 0.125, Origin::Loaded).unwrap();
            for via in [Convention::Alpha, Convention::Theta] {
                let back = set.convert(via).convert(Convention::Phi);
                for (a, b) in back.values().iter().zip(set.values()) {
                    prop_assert!((a - b).abs() <= 1e-15);
                }
                // symmetry survives conversion exactly
                let conv = set.convert(via);
                prop_assert!(AngleSet::new(via, conv.values().to_vec(), 10.0, 0.125, Origin::Loaded).is_ok());
            }
            let a = set.convert(Convention::Alpha);
            let t = set.convert(Convention::Theta);
            let n = set.num_angles();
            for j in 0..n {
                let edge = if j == 0 || j + 1 == n { FRAC_PI_4 } else { 0.0 };
                prop_assert!((a.values()[j] - (t.values()[j] + edge)).abs() <= 1e-15);
            }
        }

        #[test]
        fn polynomial_bounded(seed in 0u64..1000, s in -1.0_f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alpha = random_alpha(&mut rng, 30);
            prop_assert!(eval_poly(&alpha, s).unwrap().abs() <= 1.0 + 1e-15);
        }

        #[test]
        fn symmetric_sequences_give_odd_polynomials(seed in 0u64..1000, s in 0.0_f64..1.0) {
            // even N_a: degree N_a - 1 is odd, and symmetric phases keep Re U_00 odd
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alpha = random_symmetric(&mut rng, 24);
            let p = eval_poly(&alpha, s).unwrap();
            let m = eval_poly(&alpha, -s).unwrap();
            prop_assert!((p + m).abs() <= 1e-10);
        }
    }
}
