//! Compression of a bank of high-precision angle sets into metaparameters.
//!
//! Two models are fitted:
//!
//! * the amplitude `Theta_max(kappa) = sum_l c_ampl[l] / kappa^l`, against
//!   `theta_max = max_j |theta_j|` of every bank entry;
//! * the envelope of one reference set. Its normalized shifted angles
//!   `theta_j / theta_max` over the first half are split by sign into a
//!   positive and a negative subsequence, each placed on a uniform grid
//!   `r in [0, 1]` (edge-most angle at `r = 0`, central angle at `r = 1`) and
//!   fitted with the even basis `T_{2l}(r) = cos(2 l arccos r)`.
//!
//! The sign class of index `j < N_a/2` depends only on its distance from the
//! centre, `N_a/2 - 1 - j`: odd distances carry positive angles, even
//! distances (including the central angle) negative ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstsq::{self, LeastSquaresFit};
use crate::qsp_eval::{AngleSet, Convention};

pub const DEFAULT_N_AMPL: usize = 5;
pub const DEFAULT_N_SH: usize = 20;

/// Normalized angles below this magnitude are not used for sign validation.
const SIGN_CHECK_FLOOR: f64 = 1e-7;

/// Solved angle sets ordered by strictly increasing `kappa`, all at one `eta`.
#[derive(Debug, Clone)]
pub struct ReferenceBank {
    entries: Vec<AngleSet<f64>>,
}

impl ReferenceBank {
    pub fn new(mut entries: Vec<AngleSet<f64>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Bank("no reference sets".into()));
        }
        entries.sort_by(|a, b| a.kappa().total_cmp(&b.kappa()));
        if let Some(w) = entries.windows(2).find(|w| w[0].kappa() == w[1].kappa()) {
            return Err(Error::Bank(format!("duplicate kappa {}", w[0].kappa())));
        }
        let eta = entries[0].eta();
        if let Some(e) = entries.iter().find(|e| (e.eta() - eta).abs() > 1e-12 * eta) {
            return Err(Error::Bank(format!(
                "inconsistent eta: {} at kappa {} versus {eta}",
                e.eta(),
                e.kappa()
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[AngleSet<f64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.kappa()).collect()
    }

    pub fn eta(&self) -> f64 {
        self.entries[0].eta()
    }

    pub fn get(&self, kappa: f64) -> Option<&AngleSet<f64>> {
        self.entries
            .iter()
            .find(|e| (e.kappa() - kappa).abs() <= 1e-12 * kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResiduals {
    pub ampl: f64,
    pub env_pos: f64,
    pub env_neg: f64,
}

/// Compressed description of the angle family.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaParams {
    pub kappa_ref: f64,
    pub na_ref: usize,
    pub eta: f64,
    pub c_ampl: Vec<f64>,
    pub c_sh_pos: Vec<f64>,
    pub c_sh_neg: Vec<f64>,
    pub fit_residuals: FitResiduals,
    pub bank_kappas: Vec<f64>,
}

impl MetaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_ref >= 1.0) {
            return Err(Error::invalid(format!("kappa_ref must be >= 1, got {}", self.kappa_ref)));
        }
        if self.na_ref < 8 || !self.na_ref.is_multiple_of(2) {
            return Err(Error::TooFewAngles(self.na_ref));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.c_ampl.is_empty() {
            return Err(Error::invalid("c_ampl is empty"));
        }
        if self.c_sh_pos.is_empty() || self.c_sh_pos.len() != self.c_sh_neg.len() {
            return Err(Error::Dimension {
                expected: self.c_sh_pos.len(),
                got: self.c_sh_neg.len(),
            });
        }
        let all = self.c_ampl.iter().chain(&self.c_sh_pos).chain(&self.c_sh_neg);
        if all.clone().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite metaparameter"));
        }
        Ok(())
    }

    /// `Theta_max(kappa)` from the amplitude coefficients.
    pub fn theta_max(&self, kappa: f64) -> f64 {
        amplitude_model(&self.c_ampl, kappa)
    }
}

/// `max_j |theta_j|`.
pub fn extract_theta_max(angles: &AngleSet<f64>) -> f64 {
    angles
        .values_in(Convention::Theta)
        .iter()
        .fold(0.0, |m, t| m.max(t.abs()))
}

/// `sum_l c[l] / kappa^l`, summed from `l = 0` upwards.
pub fn amplitude_model(c_ampl: &[f64], kappa: f64) -> f64 {
    let inv = 1.0 / kappa;
    let mut power = 1.0;
    let mut total = 0.0;
    for c in c_ampl {
        total += c * power;
        power *= inv;
    }
    total
}

/// Least-squares fit of `Theta_max` in the basis `{kappa^-l}`.
pub fn fit_amplitude_data(kappas: &[f64], theta_max: &[f64], n_ampl: usize) -> Result<LeastSquaresFit> {
    if kappas.len() != theta_max.len() {
        return Err(Error::Dimension {
            expected: kappas.len(),
            got: theta_max.len(),
        });
    }
    if n_ampl == 0 {
        return Err(Error::invalid("n_ampl must be positive"));
    }
    let design: Vec<f64> = kappas
        .iter()
        .flat_map(|&k| (0..n_ampl).map(move |l| k.powi(-(l as i32))))
        .collect();
    lstsq::solve(&design, kappas.len(), n_ampl, theta_max)
}

pub fn fit_amplitude(bank: &ReferenceBank, n_ampl: usize) -> Result<LeastSquaresFit> {
    let kappas = bank.kappas();
    let theta: Vec<f64> = bank.entries().iter().map(extract_theta_max).collect();
    fit_amplitude_data(&kappas, &theta, n_ampl)
}

/// `(N_pos, N_neg) = (floor(N_a/4), N_a/2 - floor(N_a/4))`.
pub fn envelope_counts(na: usize) -> (usize, usize) {
    let pos = na / 4;
    (pos, na / 2 - pos)
}

/// Whether first-half index `j` carries a positive angle.
pub fn is_positive_slot(j: usize, na: usize) -> bool {
    (na / 2 - 1 - j) % 2 == 1
}

/// Normalized positive and negative subsequences of the first half, each in
/// increasing-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

pub fn split_envelope(angles: &AngleSet<f64>) -> Result<Envelope> {
    let na = angles.num_angles();
    let theta = angles.values_in(Convention::Theta);
    let theta_max = theta.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if theta_max == 0.0 {
        return Err(Error::invalid("all shifted angles are zero"));
    }
    let half: Vec<f64> = theta[..na / 2].iter().map(|t| t / theta_max).collect();

    let d = half.len();
    if half[d - 1] >= 0.0 {
        return Err(Error::SignPattern(d - 1, d));
    }
    for j in 1..d {
        let (a, b) = (half[j - 1], half[j]);
        if a.abs() > SIGN_CHECK_FLOOR && b.abs() > SIGN_CHECK_FLOOR && a * b > 0.0 {
            return Err(Error::SignPattern(j - 1, j));
        }
    }

    let (n_pos, n_neg) = envelope_counts(na);
    let mut env = Envelope {
        pos: Vec::with_capacity(n_pos),
        neg: Vec::with_capacity(n_neg),
    };
    for (j, v) in half.into_iter().enumerate() {
        if is_positive_slot(j, na) {
            env.pos.push(v);
        } else {
            env.neg.push(v);
        }
    }
    Ok(env)
}

/// Inverse of the split: interleaves the two subsequences back into the
/// first half of a length-`na` sequence.
pub fn merge_envelope(pos: &[f64], neg: &[f64], na: usize) -> Result<Vec<f64>> {
    if na < 2 || !na.is_multiple_of(2) {
        return Err(Error::OddAngleCount(na));
    }
    let (n_pos, n_neg) = envelope_counts(na);
    if pos.len() != n_pos {
        return Err(Error::Dimension {
            expected: n_pos,
            got: pos.len(),
        });
    }
    if neg.len() != n_neg {
        return Err(Error::Dimension {
            expected: n_neg,
            got: neg.len(),
        });
    }
    let (mut p, mut n) = (pos.iter(), neg.iter());
    Ok((0..na / 2)
        .map(|j| {
            let next = if is_positive_slot(j, na) { p.next() } else { n.next() };
            *next.expect("counts match the slot pattern")
        })
        .collect())
}

/// `r_j = j / (m - 1)`.
pub fn envelope_grid(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "envelope grid needs at least 2 points, got {m}"
        )));
    }
    let step = 1.0 / (m - 1) as f64;
    Ok((0..m).map(|j| if j + 1 == m { 1.0 } else { j as f64 * step }).collect())
}

/// `T_0 .. T_{n-1}` of `u = 2 r^2 - 1`, i.e. `cos(2 l arccos r)`.
fn even_basis(r: f64, n: usize, out: &mut Vec<f64>) {
    let u = 2.0 * r * r - 1.0;
    out.clear();
    let (mut t0, mut t1) = (1.0, u);
    for l in 0..n {
        out.push(if l == 0 { t0 } else { t1 });
        if l > 0 {
            let t2 = 2.0 * u * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
    }
}

/// Least-squares fit of `G(r_j) = values[j]` with `sum_l c_l cos(2 l arccos r)`.
pub fn fit_envelope(values: &[f64], n_sh: usize) -> Result<LeastSquaresFit> {
    let grid = envelope_grid(values.len())?;
    if n_sh == 0 {
        return Err(Error::invalid("n_sh must be positive"));
    }
    let mut design = Vec::with_capacity(grid.len() * n_sh);
    let mut row = Vec::with_capacity(n_sh);
    for &r in &grid {
        even_basis(r, n_sh, &mut row);
        design.extend_from_slice(&row);
    }
    lstsq::solve(&design, grid.len(), n_sh, values)
}

/// Fits the amplitude model on the whole bank and the envelopes on the
/// entry at `envelope_ref_kappa`.
pub fn build_meta(
    bank: &ReferenceBank,
    envelope_ref_kappa: f64,
    n_ampl: usize,
    n_sh: usize,
) -> Result<MetaParams> {
    let reference = bank.get(envelope_ref_kappa).ok_or_else(|| {
        Error::Bank(format!("envelope reference kappa {envelope_ref_kappa} is not in the bank"))
    })?;
    let na_ref = reference.num_angles();
    let (n_pos, _) = envelope_counts(na_ref);
    if n_pos < 2 {
        return Err(Error::TooFewAngles(na_ref));
    }
    let max_kappa = bank.kappas().last().copied().unwrap_or(envelope_ref_kappa);
    if envelope_ref_kappa < max_kappa {
        log::info!(
            "envelope reference kappa {envelope_ref_kappa} is below the largest bank kappa {max_kappa}"
        );
    }

    let ampl = fit_amplitude(bank, n_ampl)?;
    let env = split_envelope(reference)?;
    let pos = fit_envelope(&env.pos, n_sh)?;
    let neg = fit_envelope(&env.neg, n_sh)?;
    Ok(MetaParams {
        kappa_ref: reference.kappa(),
        na_ref,
        eta: bank.eta(),
        c_ampl: ampl.coeffs,
        c_sh_pos: pos.coeffs,
        c_sh_neg: neg.coeffs,
        fit_residuals: FitResiduals {
            ampl: ampl.max_residual,
            env_pos: pos.max_residual,
            env_neg: neg.max_residual,
        },
        bank_kappas: bank.kappas(),
    })
}
