//! Early fusion: per-modality feature matrices are concatenated column-wise
//! on the shared segment grid, then z-scored with statistics from the
//! training rows only.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SegmentGrid;

/// Standard deviations at or below this are treated as constant columns.
pub const MIN_STD: f64 = 1e-12;

/// Row-major matrix of per-segment features with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: Vec<f64>,
    n_rows: usize,
}

impl FeatureMatrix {
    /// A matrix with `n_rows` rows and no columns.
    pub fn empty(n_rows: usize) -> Self {
        Self {
            names: Vec::new(),
            data: Vec::new(),
            n_rows,
        }
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(Error::invalid(format!(
                "row {i} has {} values but there are {} columns",
                r.len(),
                names.len()
            )));
        }
        Self::from_flat(names, rows.concat(), rows.len())
    }

    pub fn from_flat(names: Vec<String>, data: Vec<f64>, n_rows: usize) -> Result<Self> {
        if data.len() != names.len() * n_rows {
            return Err(Error::invalid(format!(
                "{} values do not fill {n_rows} rows of {} columns",
                data.len(),
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::invalid(format!("duplicate feature name {dup:?}")));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            let c = i % names.len();
            return Err(Error::invalid(format!(
                "non-finite value in row {} column {:?}",
                i / names.len(),
                names[c]
            )));
        }
        Ok(Self { names, data, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            data,
            n_rows: idx.len(),
        }
    }

    /// CSV with `segment_index,t_center_s` followed by one column per feature.
    pub fn write_csv(&self, grid: &SegmentGrid, w: impl Write) -> Result<()> {
        if grid.n_segments() != self.n_rows {
            return Err(Error::Alignment {
                left: grid.n_segments(),
                right: self.n_rows,
            });
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(
            ["segment_index", "t_center_s"]
                .into_iter()
                .chain(self.names.iter().map(String::as_str)),
        )?;
        for (k, row) in self.rows().enumerate() {
            let mut rec = vec![k.to_string(), format!("{:.3}", grid.center_s(k))];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Column-wise concatenation, `audio` columns first. A matrix without
/// columns acts as the identity regardless of its row count.
pub fn fuse(audio: &FeatureMatrix, kin: &FeatureMatrix) -> Result<FeatureMatrix> {
    if audio.n_cols() == 0 {
        return Ok(kin.clone());
    }
    if kin.n_cols() == 0 {
        return Ok(audio.clone());
    }
    if audio.n_rows != kin.n_rows {
        return Err(Error::Alignment {
            left: audio.n_rows,
            right: kin.n_rows,
        });
    }
    let names: Vec<String> = audio.names.iter().chain(&kin.names).cloned().collect();
    let mut data = Vec::with_capacity(audio.data.len() + kin.data.len());
    for i in 0..audio.n_rows {
        data.extend_from_slice(audio.row(i));
        data.extend_from_slice(kin.row(i));
    }
    FeatureMatrix::from_flat(names, data, audio.n_rows)
}

/// Per-column z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    #[serde(default)]
    pub fitted_on: usize,
}

impl Standardizer {
    /// Mean and population standard deviation over `train_rows` only.
    pub fn fit(fm: &FeatureMatrix, train_rows: &[usize]) -> Result<Self> {
        if train_rows.is_empty() {
            return Err(Error::EmptyTraining);
        }
        if let Some(&bad) = train_rows.iter().find(|&&r| r >= fm.n_rows()) {
            return Err(Error::invalid(format!(
                "training row {bad} out of range for {} rows",
                fm.n_rows()
            )));
        }
        let n_cols = fm.n_cols();
        // Welford's update, one pass over the selected rows.
        let mut means = vec![0.0; n_cols];
        let mut m2 = vec![0.0; n_cols];
        for (count, &r) in train_rows.iter().enumerate() {
            let n = (count + 1) as f64;
            for (j, &x) in fm.row(r).iter().enumerate() {
                let delta = x - means[j];
                means[j] += delta / n;
                m2[j] += delta * (x - means[j]);
            }
        }
        let n = train_rows.len() as f64;
        let stds = m2.iter().map(|v| (v.max(0.0) / n).sqrt()).collect();
        Ok(Self {
            names: fm.names().to_vec(),
            means,
            stds,
            fitted_on: train_rows.len(),
        })
    }

    /// `(x − mean) / std`, or 0 for columns whose std is at most [`MIN_STD`].
    pub fn transform(&self, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
        if fm.n_cols() != self.means.len() {
            return Err(Error::Dimension {
                expected: self.means.len(),
                got: fm.n_cols(),
            });
        }
        if fm.names() != self.names.as_slice() {
            return Err(Error::invalid("feature names differ from those the standardizer was fitted on"));
        }
        let n_cols = fm.n_cols();
        let data = fm
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let j = i % n_cols;
                if self.stds[j] > MIN_STD {
                    (x - self.means[j]) / self.stds[j]
                } else {
                    0.0
                }
            })
            .collect();
        FeatureMatrix::from_flat(fm.names().to_vec(), data, fm.n_rows())
    }
}

pub fn fit_standardizer(fm: &FeatureMatrix, train_rows: &[usize]) -> Result<Standardizer> {
    Standardizer::fit(fm, train_rows)
}

pub fn standardize(fm: &FeatureMatrix, s: &Standardizer) -> Result<FeatureMatrix> {
    s.transform(fm)
}
