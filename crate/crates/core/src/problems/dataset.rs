use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Labelled feature matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    d: usize,
    k: usize,
}

impl Dataset {
    /// Builds a dataset from rows of length `d`. `K` is one more than the
    /// largest label.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("dataset has no samples".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidDataset("feature dimension is zero".into()));
        }
        let mut features = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidDataset(format!(
                    "sample {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("sample {i} feature {j} is not finite")));
            }
            features.extend_from_slice(row);
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Dataset { features, labels, d, k })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// Gaussian blobs with unit covariance, one per class.
///
/// Class means form a regular simplex with pairwise distance
/// `class_separation`, expressed in an orthonormal basis of the sum-zero
/// subspace and embedded in the first `min(d, K - 1)` coordinates; when
/// `d < K - 1` the trailing simplex coordinates are dropped. Labels cycle
/// `0, 1, ..., K-1` so every class is present.
pub fn synth_classification(seed: u64, k: usize, d: usize, n_samples: usize, class_separation: f64) -> Result<Dataset> {
    if k < 2 {
        return Err(Error::InvalidDataset(format!("need at least two classes, got {k}")));
    }
    if d < 1 {
        return Err(Error::InvalidDataset("feature dimension must be at least 1".into()));
    }
    if n_samples < k {
        return Err(Error::InvalidDataset(format!("{n_samples} samples cannot cover {k} classes")));
    }
    if !(class_separation.is_finite() && class_separation >= 0.0) {
        return Err(Error::InvalidDataset(format!("class separation {class_separation} must be nonnegative")));
    }
    let scale = class_separation / std::f64::consts::SQRT_2;
    let means: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let mut mu = vec![0.0; d];
            for (j, slot) in mu.iter_mut().enumerate().take(k - 1) {
                *slot = scale * helmert(j + 1, c);
            }
            mu
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let c = i % k;
        let row = means[c]
            .iter()
            .map(|mu| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + z
            })
            .collect();
        rows.push(row);
        labels.push(c);
    }
    Dataset::new(rows, labels)
}

/// Entry `(row, col)` of the Helmert basis of the sum-zero subspace, `row >= 1`.
fn helmert(row: usize, col: usize) -> f64 {
    let norm = ((row * (row + 1)) as f64).sqrt();
    if col < row {
        1.0 / norm
    } else if col == row {
        -(row as f64) / norm
    } else {
        0.0
    }
}

/// Reads `label,f1,...,fd` rows. The first row is a header when its label
/// field is non-numeric and its remaining fields are not all numbers. Labels are arbitrary strings re-indexed
/// densely in order of first appearance.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io { path: shown.clone(), reason: e.to_string() })?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut width = None;
    for (n, record) in reader.records().enumerate() {
        let line = n + 1;
        let record = record.map_err(|e| Error::Parse { path: shown.clone(), line, reason: e.to_string() })?;
        let line = record.position().map_or(line, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().skip(1).map(str::parse::<f64>).collect();
        let label_numeric = record[0].parse::<f64>().is_ok();
        if n == 0 && !label_numeric && parsed.is_err() {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::Parse { path: shown.clone(), line, reason: "row needs a label and at least one feature".into() });
        }
        let feats = parsed.map_err(|e| Error::Parse { path: shown.clone(), line, reason: format!("non-numeric feature: {e}") })?;
        match width {
            None => width = Some(feats.len()),
            Some(w) if w != feats.len() => {
                return Err(Error::Parse {
                    path: shown.clone(),
                    line,
                    reason: format!("ragged row: {} features, expected {w}", feats.len()),
                });
            }
            _ => {}
        }
        if let Some(j) = feats.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse { path: shown.clone(), line, reason: format!("feature {} is not finite", j + 1) });
        }
        let next = index.len();
        labels.push(*index.entry(record[0].to_string()).or_insert(next));
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(Error::Parse { path: shown, line: 0, reason: "no data rows".into() });
    }
    Dataset::new(rows, labels)
}
