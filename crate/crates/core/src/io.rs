// Copyright 2026 The casimir-spectroscopy contributors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

//! On-disk formats: dataset directories, force-curve and spectrum CSVs with
//! JSON sidecars, measured gradient files, and model files.
//!
//! Floats are written in shortest round-trip scientific notation, so reading
//! a file and writing it again reproduces it byte for byte. Every writer goes
//! through a temporary sibling that is renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{MeasuredGradientFile, MeasuredRow};
use crate::dielectric::{DielectricModel, DrudeParams, SpectrumSample, TabulatedOptics};
use crate::error::{Error, Result};
use crate::inversion::{Forest, ScoreRow};
use crate::lifshitz::{CurveKind, ForceCurve};
use crate::synth::{Dataset, DatasetSpec, Partition, Sample};

pub const SPEC_FILE: &str = "spec.json";
pub const SPECTRA_FILE: &str = "spectra.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const SPLIT_FILE: &str = "split.csv";
pub const MODELS_FILE: &str = "models.json";

/// Shortest round-trip decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

/// Writes `bytes` to `path` without ever exposing a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let tmp = temp_sibling(path);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Creates the directory `path` by filling a temporary sibling with `fill`
/// and renaming it; an existing directory at `path` is replaced.
pub fn write_dir_atomic(path: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let tmp = temp_sibling(path);
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir(&tmp)?;
    let result = fill(&tmp).and_then(|_| {
        if path.exists() {
            fs::remove_dir_all(path)?;
        }
        Ok(fs::rename(&tmp, path)?)
    });
    if result.is_err() {
        let _ = fs::remove_dir_all(&tmp);
    }
    result
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

/// CSV with a header row; cells are written as given.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let name = path.display().to_string();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::input(format!("{name}: {e}")))?;
    let found = r
        .headers()
        .map_err(|e| Error::input(format!("{name}: {e}")))?
        .clone();
    let required = header.iter().filter(|h| !h.starts_with('?')).count();
    let matches = found.len() >= required
        && found.len() <= header.len()
        && found
            .iter()
            .zip(header)
            .all(|(f, h)| f == h.trim_start_matches('?'));
    if !matches {
        return Err(Error::input(format!(
            "{name}: expected header {}, found {}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|rec| rec.map_err(|e| Error::input(format!("{name}: {e}"))))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::input(format!("line {line}: missing {what}")))?;
    raw.parse()
        .map_err(|_| Error::input(format!("line {line}: cannot parse {what} from {raw:?}")))
}

fn finite(rec: &csv::StringRecord, i: usize, what: &str) -> Result<f64> {
    let v: f64 = field(rec, i, what)?;
    if !v.is_finite() {
        let line = rec.position().map_or(0, |p| p.line());
        return Err(Error::input(format!("line {line}: {what} is not finite")));
    }
    Ok(v)
}

// ---------------------------------------------------------------- datasets

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    id: u64,
    model: DielectricModel,
}

pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    write_dir_atomic(dir, |tmp| {
        fs::write(tmp.join(SPEC_FILE), to_json_pretty(&dataset.spec)?)?;
        let spectra = dataset.samples.iter().flat_map(|s| {
            let grid = s.spectrum.grid.points();
            (0..grid.len()).map(move |k| {
                vec![
                    s.id.to_string(),
                    k.to_string(),
                    fmt_f64(grid[k]),
                    fmt_f64(s.spectrum.eps_real[k]),
                    fmt_f64(s.spectrum.eps_imag[k]),
                ]
            })
        });
        fs::write(
            tmp.join(SPECTRA_FILE),
            csv_bytes(
                &[
                    "sample_id",
                    "grid_index",
                    "omega_rad_s",
                    "eps_real",
                    "eps_imag",
                ],
                spectra,
            )?,
        )?;
        let curves = dataset.samples.iter().flat_map(|s| {
            s.curve
                .separations
                .iter()
                .zip(&s.curve.values)
                .map(move |(d, v)| vec![s.id.to_string(), fmt_f64(*d), fmt_f64(*v)])
        });
        fs::write(
            tmp.join(CURVES_FILE),
            csv_bytes(&["sample_id", "d_m", "value"], curves)?,
        )?;
        let split = dataset
            .samples
            .iter()
            .zip(&dataset.split)
            .map(|(s, p)| vec![s.id.to_string(), p.as_str().to_string()]);
        fs::write(
            tmp.join(SPLIT_FILE),
            csv_bytes(&["sample_id", "partition"], split)?,
        )?;
        let models: Vec<ModelRecord> = dataset
            .samples
            .iter()
            .map(|s| ModelRecord {
                id: s.id,
                model: s.model.clone(),
            })
            .collect();
        let mut bytes = serde_json::to_vec(&models)?;
        bytes.push(b'\n');
        fs::write(tmp.join(MODELS_FILE), bytes)?;
        Ok(())
    })
}

// Groups consecutive records by their leading sample id, in file order.
fn group_by_id(records: Vec<csv::StringRecord>) -> Result<Vec<(u64, Vec<csv::StringRecord>)>> {
    let mut groups: Vec<(u64, Vec<csv::StringRecord>)> = Vec::new();
    for rec in records {
        let id: u64 = field(&rec, 0, "sample_id")?;
        match groups.last_mut() {
            Some((last, rows)) if *last == id => rows.push(rec),
            _ => {
                if groups.iter().any(|(g, _)| *g == id) {
                    return Err(Error::input(format!(
                        "rows of sample {id} are not contiguous"
                    )));
                }
                groups.push((id, vec![rec]));
            }
        }
    }
    Ok(groups)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let spec: DatasetSpec = read_json(&dir.join(SPEC_FILE))?;
    spec.validate()?;
    let models: Vec<ModelRecord> = read_json(&dir.join(MODELS_FILE))?;

    let spectra = group_by_id(read_csv(
        &dir.join(SPECTRA_FILE),
        &[
            "sample_id",
            "grid_index",
            "omega_rad_s",
            "eps_real",
            "eps_imag",
        ],
    )?)?;
    let curves = group_by_id(read_csv(
        &dir.join(CURVES_FILE),
        &["sample_id", "d_m", "value"],
    )?)?;
    let split = read_csv(&dir.join(SPLIT_FILE), &["sample_id", "partition"])?;

    let n = models.len();
    if spectra.len() != n || curves.len() != n || split.len() != n {
        return Err(Error::input(format!(
            "{}: file sample counts disagree ({n} models, {} spectra, {} curves, {} split rows)",
            dir.display(),
            spectra.len(),
            curves.len(),
            split.len()
        )));
    }

    let mut samples = Vec::with_capacity(n);
    let mut partitions = Vec::with_capacity(n);
    for (k, record) in models.into_iter().enumerate() {
        let id = record.id;
        let (sid, srows) = &spectra[k];
        let (cid, crows) = &curves[k];
        let split_id: u64 = field(&split[k], 0, "sample_id")?;
        if *sid != id || *cid != id || split_id != id {
            return Err(Error::input(format!(
                "sample order differs between files at sample {id}"
            )));
        }
        if srows.len() != spec.grid.len() {
            return Err(Error::input(format!(
                "sample {id}: spectrum length differs from the grid"
            )));
        }
        let mut eps_real = Vec::with_capacity(srows.len());
        let mut eps_imag = Vec::with_capacity(srows.len());
        for (k, rec) in srows.iter().enumerate() {
            let index: usize = field(rec, 1, "grid_index")?;
            let omega = finite(rec, 2, "omega_rad_s")?;
            if index != k || omega != spec.grid.points()[k] {
                return Err(Error::input(format!(
                    "sample {id}: grid row {k} does not match spec"
                )));
            }
            eps_real.push(finite(rec, 3, "eps_real")?);
            eps_imag.push(finite(rec, 4, "eps_imag")?);
        }
        let mut separations = Vec::with_capacity(crows.len());
        let mut values = Vec::with_capacity(crows.len());
        for rec in crows {
            separations.push(finite(rec, 1, "d_m")?);
            values.push(finite(rec, 2, "value")?);
        }
        let partition = match split[k].get(1) {
            Some("train") => Partition::Train,
            Some("validation") => Partition::Validation,
            other => {
                return Err(Error::input(format!(
                    "sample {id}: unknown partition {other:?}"
                )))
            }
        };
        samples.push(Sample {
            id,
            model: record.model,
            spectrum: SpectrumSample::new(spec.grid.clone(), eps_real, eps_imag)?,
            curve: ForceCurve::new(separations, values, spec.curve_kind)?,
        });
        partitions.push(partition);
    }
    let dataset = Dataset {
        spec,
        samples,
        split: partitions,
    };
    dataset.check_invariants()?;
    Ok(dataset)
}

// ---------------------------------------------------------- curves, spectra

/// Metadata stored next to a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSidecar {
    pub kind: CurveKind,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

/// `curve.csv` → `curve.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn curve_csv(curve: &ForceCurve) -> Result<Vec<u8>> {
    let rows = curve
        .separations
        .iter()
        .zip(&curve.values)
        .map(|(d, v)| vec![fmt_f64(*d), fmt_f64(*v)]);
    csv_bytes(&["d_m", "value"], rows)
}

pub fn write_curve(path: &Path, curve: &ForceCurve, sidecar: &CurveSidecar) -> Result<()> {
    if sidecar.kind != curve.kind {
        return Err(Error::input("sidecar kind differs from the curve kind"));
    }
    write_atomic(path, &curve_csv(curve)?)?;
    write_atomic(&sidecar_path(path), &to_json_pretty(sidecar)?)
}

pub fn read_curve(path: &Path) -> Result<(ForceCurve, CurveSidecar)> {
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Err(Error::input(format!(
            "missing sidecar {}",
            meta_path.display()
        )));
    }
    let sidecar: CurveSidecar = read_json(&meta_path)?;
    let rows = read_csv(path, &["d_m", "value"])?;
    let mut d = Vec::with_capacity(rows.len());
    let mut v = Vec::with_capacity(rows.len());
    for rec in &rows {
        d.push(finite(rec, 0, "d_m")?);
        v.push(finite(rec, 1, "value")?);
    }
    let curve = ForceCurve::new(d, v, sidecar.kind)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    Ok((curve, sidecar))
}

pub fn spectrum_csv(spectrum: &SpectrumSample) -> Result<Vec<u8>> {
    let grid = spectrum.grid.points();
    let rows = (0..grid.len()).map(|k| {
        vec![
            fmt_f64(grid[k]),
            fmt_f64(spectrum.eps_real[k]),
            fmt_f64(spectrum.eps_imag[k]),
        ]
    });
    csv_bytes(&["omega_rad_s", "eps_real", "eps_imag"], rows)
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumSample> {
    let rows = read_csv(path, &["omega_rad_s", "eps_real", "eps_imag"])?;
    let mut w = Vec::with_capacity(rows.len());
    let mut re = Vec::with_capacity(rows.len());
    let mut im = Vec::with_capacity(rows.len());
    for rec in &rows {
        w.push(finite(rec, 0, "omega_rad_s")?);
        re.push(finite(rec, 1, "eps_real")?);
        im.push(finite(rec, 2, "eps_imag")?);
    }
    SpectrumSample::new(crate::dielectric::FrequencyGrid::new(w)?, re, im)
}

/// Reads `omega_rad_s,eps_imag` rows; `low_freq` supplies the Drude tail
/// below the table.
pub fn read_tabulated_optics(
    path: &Path,
    low_freq: Option<DrudeParams>,
) -> Result<TabulatedOptics> {
    let rows = read_csv(path, &["omega_rad_s", "eps_imag"])?;
    let mut w = Vec::with_capacity(rows.len());
    let mut im = Vec::with_capacity(rows.len());
    for rec in &rows {
        w.push(finite(rec, 0, "omega_rad_s")?);
        im.push(finite(rec, 1, "eps_imag")?);
    }
    TabulatedOptics::new(w, im, low_freq)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn tabulated_optics_csv(table: &TabulatedOptics) -> Result<Vec<u8>> {
    let rows = table
        .frequencies()
        .iter()
        .zip(table.eps_imag())
        .map(|(w, e)| vec![fmt_f64(*w), fmt_f64(*e)]);
    csv_bytes(&["omega_rad_s", "eps_imag"], rows)
}

// ------------------------------------------------------- measured gradients

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSidecar {
    pub radius_m: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

pub fn read_measured(path: &Path) -> Result<MeasuredGradientFile> {
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Err(Error::input(format!(
            "missing sidecar {}",
            meta_path.display()
        )));
    }
    let meta: MeasuredSidecar = read_json(&meta_path)?;
    let records = read_csv(path, &["d_m", "gradient_N_per_m", "?sigma_N_per_m"])?;
    let rows = records
        .iter()
        .map(|rec| {
            Ok(MeasuredRow {
                d: finite(rec, 0, "d_m")?,
                gradient: finite(rec, 1, "gradient_N_per_m")?,
                sigma: match rec.get(2) {
                    Some(s) if !s.is_empty() => Some(finite(rec, 2, "sigma_N_per_m")?),
                    _ => None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MeasuredGradientFile::new(rows, meta.radius_m, meta.temperature_k)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn write_measured(path: &Path, file: &MeasuredGradientFile) -> Result<()> {
    let with_sigma = file.rows.iter().any(|r| r.sigma.is_some());
    let header: &[&str] = if with_sigma {
        &["d_m", "gradient_N_per_m", "sigma_N_per_m"]
    } else {
        &["d_m", "gradient_N_per_m"]
    };
    let rows = file.rows.iter().map(|r| {
        let mut row = vec![fmt_f64(r.d), fmt_f64(r.gradient)];
        if with_sigma {
            row.push(r.sigma.map(fmt_f64).unwrap_or_default());
        }
        row
    });
    write_atomic(path, &csv_bytes(header, rows)?)?;
    let meta = MeasuredSidecar {
        radius_m: file.radius,
        temperature_k: file.temperature,
    };
    write_atomic(&sidecar_path(path), &to_json_pretty(&meta)?)
}

// ------------------------------------------------------------------ models

pub fn forest_json(forest: &Forest) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec(forest)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_forest(path: &Path) -> Result<Forest> {
    let forest: Forest = read_json(path)?;
    forest
        .validate()
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    Ok(forest)
}

pub fn grid_scores_csv(table: &[ScoreRow]) -> Result<Vec<u8>> {
    let rows = table.iter().map(|r| {
        vec![
            r.hyper.n_trees.to_string(),
            r.hyper
                .max_depth
                .map_or("unlimited".into(), |d| d.to_string()),
            r.hyper.min_samples_leaf.to_string(),
            fmt_f64(r.hyper.max_features_fraction),
            r.hyper.bootstrap.to_string(),
            r.hyper.n_ensembles.to_string(),
            fmt_f64(r.mean_r2),
            r.fold_r2
                .iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(";"),
        ]
    });
    csv_bytes(
        &[
            "n_trees",
            "max_depth",
            "min_samples_leaf",
            "max_features_fraction",
            "bootstrap",
            "n_ensembles",
            "mean_r2",
            "fold_r2",
        ],
        rows,
    )
}

/// Writes an arbitrary numeric table with the given header.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    csv_bytes(
        header,
        rows.into_iter()
            .map(|r| r.into_iter().map(fmt_f64).collect()),
    )
}
