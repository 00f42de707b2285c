//! On-disk formats: angle and metaparameter JSON, system descriptions, CSV
//! reports, and estimator timing.
//!
//! Every JSON file carries a `version` field that is checked before the rest
//! of the document is interpreted. Writes go to a temporary file in the
//! target directory which is then renamed over the destination.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::angle_estimator::{estimate_angles, EstimateRequest};
use crate::error::{Error, Result};
use crate::meta_fit::{FitResiduals, MetaParams, ReferenceBank};
use crate::qsp_eval::{AngleSet, Convention, Origin};
use crate::verifier::{
    build_test_matrix_f, build_test_matrix_sin, DiagonalSystem, ErrorSweep, InversionReport,
    SvdSystem, SystemKind,
};

pub const ANGLE_FILE_VERSION: u32 = 1;
pub const META_FILE_VERSION: u32 = 1;
pub const SYSTEM_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleFile {
    pub version: u32,
    pub convention: Convention,
    pub kappa_qsvt: f64,
    pub eta: f64,
    pub eps_reported: Option<f64>,
    pub n_a: usize,
    pub origin: Origin,
    pub values: Vec<f64>,
}

impl AngleFile {
    /// Stores the set in the phi convention.
    pub fn from_set(set: &AngleSet<f64>) -> Self {
        let values = set.values_in(Convention::Phi);
        Self {
            version: ANGLE_FILE_VERSION,
            convention: Convention::Phi,
            kappa_qsvt: set.kappa(),
            eta: set.eta(),
            eps_reported: set.eps_reported(),
            n_a: values.len(),
            origin: set.origin(),
            values,
        }
    }

    pub fn into_set(self) -> Result<AngleSet<f64>> {
        if self.n_a != self.values.len() {
            return Err(Error::Dimension {
                expected: self.n_a,
                got: self.values.len(),
            });
        }
        Ok(AngleSet::new(
            self.convention,
            self.values,
            self.kappa_qsvt,
            self.eta,
            self.origin,
        )?
        .with_eps_reported(self.eps_reported))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFile {
    pub version: u32,
    pub kappa_ref: f64,
    pub na_ref: usize,
    pub eta: f64,
    pub c_ampl: Vec<f64>,
    pub c_sh_pos: Vec<f64>,
    pub c_sh_neg: Vec<f64>,
    pub fit_residuals: FitResiduals,
    pub bank_kappas: Vec<f64>,
}

impl From<&MetaParams> for MetaFile {
    fn from(m: &MetaParams) -> Self {
        Self {
            version: META_FILE_VERSION,
            kappa_ref: m.kappa_ref,
            na_ref: m.na_ref,
            eta: m.eta,
            c_ampl: m.c_ampl.clone(),
            c_sh_pos: m.c_sh_pos.clone(),
            c_sh_neg: m.c_sh_neg.clone(),
            fit_residuals: m.fit_residuals,
            bank_kappas: m.bank_kappas.clone(),
        }
    }
}

impl MetaFile {
    pub fn into_meta(self) -> Result<MetaParams> {
        let meta = MetaParams {
            kappa_ref: self.kappa_ref,
            na_ref: self.na_ref,
            eta: self.eta,
            c_ampl: self.c_ampl,
            c_sh_pos: self.c_sh_pos,
            c_sh_neg: self.c_sh_neg,
            fit_residuals: self.fit_residuals,
            bank_kappas: self.bank_kappas,
        };
        meta.validate()?;
        Ok(meta)
    }
}

/// Test system description; built systems are regenerated from their
/// parameters on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    InverseApprox { kappa: f64, eta_a: f64, n_x: u32 },
    Sine { n_x: u32, xi_max: f64 },
    Diagonal { diagonal: Vec<f64> },
    Svd(SvdSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub version: u32,
    #[serde(flatten)]
    pub system: SystemSpec,
}

/// A loaded system, ready for inversion.
#[derive(Debug, Clone)]
pub enum LoadedSystem {
    Diagonal(DiagonalSystem),
    Svd(SvdSystem),
}

impl SystemSpec {
    pub fn build(&self) -> Result<LoadedSystem> {
        Ok(match self {
            SystemSpec::InverseApprox { kappa, eta_a, n_x } => {
                LoadedSystem::Diagonal(build_test_matrix_f(*kappa, *eta_a, *n_x)?)
            }
            SystemSpec::Sine { n_x, xi_max } => {
                LoadedSystem::Diagonal(build_test_matrix_sin(*n_x, *xi_max)?)
            }
            SystemSpec::Diagonal { diagonal } => {
                LoadedSystem::Diagonal(DiagonalSystem::new(diagonal.clone(), SystemKind::Custom)?)
            }
            SystemSpec::Svd(svd) => {
                svd.validate()?;
                LoadedSystem::Svd(svd.clone())
            }
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn load_json<T: DeserializeOwned>(path: &Path, expected: u32) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let json_err = |source| Error::Json {
        path: path.to_path_buf(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    let found = value.get("version").and_then(|v| v.as_u64());
    match found {
        Some(v) if v == expected as u64 => {}
        Some(v) => {
            return Err(Error::SchemaVersion {
                found: u32::try_from(v).unwrap_or(u32::MAX),
                expected,
            })
        }
        None => {
            return Err(Error::invalid(format!(
                "{}: missing or non-integer 'version' field",
                path.display()
            )))
        }
    }
    serde_json::from_value(value).map_err(json_err)
}

pub fn save_angles(path: &Path, set: &AngleSet<f64>) -> Result<()> {
    save_json(path, &AngleFile::from_set(set))
}

pub fn load_angles(path: &Path) -> Result<AngleSet<f64>> {
    load_json::<AngleFile>(path, ANGLE_FILE_VERSION)?.into_set()
}

pub fn save_meta(path: &Path, meta: &MetaParams) -> Result<()> {
    save_json(path, &MetaFile::from(meta))
}

pub fn load_meta(path: &Path) -> Result<MetaParams> {
    load_json::<MetaFile>(path, META_FILE_VERSION)?.into_meta()
}

pub fn save_system(path: &Path, system: &SystemSpec) -> Result<()> {
    save_json(
        path,
        &SystemFile {
            version: SYSTEM_FILE_VERSION,
            system: system.clone(),
        },
    )
}

pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    load_json::<SystemFile>(path, SYSTEM_FILE_VERSION)?.system.build()
}

/// Expands a list of files and directories into the `.json` files they name,
/// sorted by path. Directories are not searched recursively.
pub fn collect_json_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for entry in fs::read_dir(input).map_err(io_err(input))? {
                let path = entry.map_err(io_err(input))?.path();
                if path.is_file() && path.extension().is_some_and(|e| e == "json") {
                    out.push(path);
                }
            }
        } else {
            out.push(input.clone());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Loads every angle file named by `inputs`; `kappa` comes from the file
/// contents, never from the file name.
pub fn load_bank(inputs: &[PathBuf]) -> Result<ReferenceBank> {
    let paths = collect_json_paths(inputs)?;
    if paths.is_empty() {
        return Err(Error::Bank("no reference files found".into()));
    }
    let sets = paths
        .iter()
        .map(|p| load_angles(p))
        .collect::<Result<Vec<_>>>()?;
    ReferenceBank::new(sets)
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut text = String::with_capacity(64);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

pub fn write_sweep_csv(path: &Path, sweep: &ErrorSweep) -> Result<()> {
    write_csv(
        path,
        "s,p_value,target,error",
        (0..sweep.s_values.len()).map(|i| {
            format!(
                "{},{},{},{}",
                sweep.s_values[i], sweep.p_values[i], sweep.target_values[i], sweep.errors[i]
            )
        }),
    )
}

pub fn write_invert_csv(path: &Path, qsvt: &[f64], exact: &[f64]) -> Result<()> {
    if qsvt.len() != exact.len() {
        return Err(Error::Dimension {
            expected: qsvt.len(),
            got: exact.len(),
        });
    }
    write_csv(
        path,
        "index,qsvt_value,exact_value,error",
        qsvt.iter()
            .zip(exact)
            .enumerate()
            .map(|(i, (q, e))| format!("{i},{q},{e},{}", q - e)),
    )
}

pub fn write_inversion_report_csv(path: &Path, report: &InversionReport) -> Result<()> {
    write_invert_csv(path, &report.qsvt, &report.exact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub kappa0: f64,
    pub n_a: usize,
    /// Median wall time of the estimation.
    pub seconds: f64,
}

/// Times `estimate_angles` for each `kappa0`, taking the median of `repeats`
/// runs (at least one).
pub fn bench_estimate(meta: &MetaParams, kappas: &[f64], repeats: usize) -> Result<Vec<BenchRow>> {
    let repeats = repeats.max(1);
    kappas
        .iter()
        .map(|&kappa0| {
            let request = EstimateRequest::new(kappa0, meta);
            let mut times = Vec::with_capacity(repeats);
            let mut n_a = 0;
            for _ in 0..repeats {
                let start = Instant::now();
                let set = estimate_angles(&request)?;
                times.push(start.elapsed().as_secs_f64());
                n_a = set.num_angles();
            }
            times.sort_by(f64::total_cmp);
            let mid = times.len() / 2;
            let seconds = if times.len() % 2 == 1 {
                times[mid]
            } else {
                0.5 * (times[mid - 1] + times[mid])
            };
            Ok(BenchRow {
                kappa0,
                n_a,
                seconds,
            })
        })
        .collect()
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut text = String::from("kappa0,n_a,seconds\n");
    for r in rows {
        let _ = writeln!(text, "{},{},{}", r.kappa0, r.n_a, r.seconds);
    }
    text
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn linear_r_squared(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("need at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x values are all equal"));
    }
    if syy == 0.0 {
        return Ok(1.0);
    }
    Ok(sxy * sxy / (sxx * syy))
}
