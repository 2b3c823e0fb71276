// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_NAMES};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub target: f64,
}

/// Labeled rows sharing one feature schema and one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    feature_names: Vec<String>,
    target: String,
    rows: Vec<Sample>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, target: impl Into<String>, rows: Vec<Sample>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let mut ids = HashSet::new();
        for r in &rows {
            if r.features.len() != feature_names.len() {
                return Err(Error::Dimension {
                    expected: feature_names.len(),
                    found: r.features.len(),
                });
            }
            if !r.target.is_finite() || r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("row `{}` has a non-finite value", r.id)));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            feature_names,
            target: target.into(),
            rows,
        })
    }

    /// Dataset over the standard circuit feature schema.
    pub fn from_features<I>(target: impl Into<String>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, FeatureVector, f64)>,
    {
        let rows = rows
            .into_iter()
            .map(|(id, f, target)| Sample {
                id,
                features: f.0.to_vec(),
                target,
            })
            .collect();
        Self::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), target, rows)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.id.as_str())
    }

    /// Writes `circuit_id`, one column per feature, then the target column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["circuit_id"];
        header.extend(self.feature_names.iter().map(String::as_str));
        header.push(&self.target);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.id.clone()];
            rec.extend(r.features.iter().map(|v| v.to_string()));
            rec.push(r.target.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<dataset>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "circuit_id" {
            return Err(Error::Data(
                "dataset needs `circuit_id`, features and a target column".into(),
            ));
        }
        let last = headers.len() - 1;
        let feature_names: Vec<String> = headers.iter().skip(1).take(last - 1).map(String::from).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let cell = |j: usize| -> Result<f64> {
                rec[j]
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {}: column `{}` is not a number", i + 1, &headers[j])))
            };
            let features = (1..last).map(cell).collect::<Result<Vec<_>>>()?;
            rows.push(Sample {
                id: rec[0].to_string(),
                features,
                target: cell(last)?,
            });
        }
        Self::new(feature_names, &headers[last], rows)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    fn subset(&self, rows: Vec<Sample>) -> Self {
        Dataset {
            feature_names: self.feature_names.clone(),
            target: self.target.clone(),
            rows,
        }
    }
}

/// Seeded shuffle split into `round(fraction * n)` training rows and the rest,
/// keeping at least one row on each side.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::out_of_range("train fraction", train_fraction));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Data(format!("cannot split {n} row(s)")));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.rows[i].clone()).collect();
    Ok((
        dataset.subset(pick(&order[..n_train])),
        dataset.subset(pick(&order[n_train..])),
    ))
}
