//! Late fusion of per-classifier class scores and argmax prediction.
//!
//! Score files are CSV with a `sample_id,<label_1>,...,<label_C>` header and
//! one row of non-negative decimal scores per sample.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("fusion needs at least {need} score matrices, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("invalid score matrix: {0}")]
    Invalid(String),
    #[error("score csv: {0}")]
    Csv(String),
}

/// Rows of class scores keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    sample_ids: Vec<String>,
    class_labels: Vec<String>,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    /// Scores must be finite and non-negative, sample ids unique and every
    /// row as long as `class_labels`.
    pub fn new(
        sample_ids: Vec<String>,
        class_labels: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, FusionError> {
        if rows.len() != sample_ids.len() {
            return Err(FusionError::ShapeMismatch(format!(
                "{} rows for {} sample ids",
                rows.len(),
                sample_ids.len()
            )));
        }
        let mut scores = Vec::with_capacity(rows.len() * class_labels.len());
        for (id, row) in sample_ids.iter().zip(&rows) {
            if row.len() != class_labels.len() {
                return Err(FusionError::ShapeMismatch(format!(
                    "row {id:?} has {} scores for {} classes",
                    row.len(),
                    class_labels.len()
                )));
            }
            scores.extend_from_slice(row);
        }
        Self::from_flat(sample_ids, class_labels, scores)
    }

    fn from_flat(
        sample_ids: Vec<String>,
        class_labels: Vec<String>,
        scores: Vec<f64>,
    ) -> Result<Self, FusionError> {
        if let Some(bad) = scores.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(FusionError::Invalid(format!(
                "score {bad} is negative or non-finite"
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = sample_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(FusionError::Invalid(format!("duplicate sample id {dup:?}")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = class_labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(FusionError::Invalid(format!(
                "duplicate class label {dup:?}"
            )));
        }
        Ok(Self {
            sample_ids,
            class_labels,
            scores,
        })
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn rows(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.classes();
        &self.scores[i * c..(i + 1) * c]
    }

    pub fn get(&self, row: usize, class: usize) -> f64 {
        self.scores[row * self.classes() + class]
    }

    /// Multiplies row `row` by `factor > 0`.
    pub fn scale_row(&mut self, row: usize, factor: f64) {
        let c = self.classes();
        for s in &mut self.scores[row * c..(row + 1) * c] {
            *s *= factor;
        }
    }

    pub fn read_csv(input: impl Read) -> Result<Self, FusionError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = rdr
            .headers()
            .map_err(|e| FusionError::Csv(e.to_string()))?
            .clone();
        if headers.get(0) != Some("sample_id") {
            return Err(FusionError::Csv(format!(
                "first header column must be `sample_id`, got {:?}",
                headers.get(0)
            )));
        }
        let class_labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut sample_ids = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| FusionError::Csv(e.to_string()))?;
            let mut fields = rec.iter();
            sample_ids.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .map(|f| {
                    f64::from_str(f)
                        .map_err(|_| FusionError::Csv(format!("row {}: bad score {f:?}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(sample_ids, class_labels, rows)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), FusionError> {
        let csv_err = |e: csv::Error| FusionError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["sample_id".to_string()];
        header.extend(self.class_labels.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (i, id) in self.sample_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|s| s.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| FusionError::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Fusion rule for [`fuse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMethod {
    Multiply,
    Average,
    Max,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 3] = [
        FusionMethod::Multiply,
        FusionMethod::Average,
        FusionMethod::Max,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FusionMethod::Multiply => "multiply",
            FusionMethod::Average => "average",
            FusionMethod::Max => "max",
        }
    }
}

impl FromStr for FusionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FusionMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown fusion method {s:?}"))
    }
}

fn check_compatible(matrices: &[ScoreMatrix]) -> Result<(), FusionError> {
    if matrices.len() < 2 {
        return Err(FusionError::TooFew {
            need: 2,
            got: matrices.len(),
        });
    }
    let first = &matrices[0];
    for (i, m) in matrices.iter().enumerate().skip(1) {
        if m.rows() != first.rows() || m.classes() != first.classes() {
            return Err(FusionError::ShapeMismatch(format!(
                "matrix {i} is {}x{}, matrix 0 is {}x{}",
                m.rows(),
                m.classes(),
                first.rows(),
                first.classes()
            )));
        }
        if m.class_labels != first.class_labels {
            return Err(FusionError::IdMismatch(format!(
                "matrix {i} class labels {:?} differ from {:?}",
                m.class_labels, first.class_labels
            )));
        }
        if m.sample_ids != first.sample_ids {
            return Err(FusionError::IdMismatch(format!(
                "matrix {i} sample ids differ from matrix 0"
            )));
        }
    }
    Ok(())
}

fn combine(
    matrices: &[ScoreMatrix],
    init: f64,
    step: impl Fn(f64, f64) -> f64,
    finish: impl Fn(f64) -> f64,
) -> Result<ScoreMatrix, FusionError> {
    check_compatible(matrices)?;
    let first = &matrices[0];
    let scores = (0..first.scores.len())
        .map(|i| finish(matrices.iter().fold(init, |acc, m| step(acc, m.scores[i]))))
        .collect();
    Ok(ScoreMatrix {
        sample_ids: first.sample_ids.clone(),
        class_labels: first.class_labels.clone(),
        scores,
    })
}

/// Elementwise product, not renormalised.
pub fn multiply_fuse(matrices: &[ScoreMatrix]) -> Result<ScoreMatrix, FusionError> {
    combine(matrices, 1.0, |a, b| a * b, |v| v)
}

pub fn average_fuse(matrices: &[ScoreMatrix]) -> Result<ScoreMatrix, FusionError> {
    let k = matrices.len() as f64;
    combine(matrices, 0.0, |a, b| a + b, |v| v / k)
}

pub fn max_fuse(matrices: &[ScoreMatrix]) -> Result<ScoreMatrix, FusionError> {
    combine(matrices, 0.0, f64::max, |v| v)
}

pub fn fuse(matrices: &[ScoreMatrix], method: FusionMethod) -> Result<ScoreMatrix, FusionError> {
    match method {
        FusionMethod::Multiply => multiply_fuse(matrices),
        FusionMethod::Average => average_fuse(matrices),
        FusionMethod::Max => max_fuse(matrices),
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// `(sample_id, predicted label)` per row.
pub fn predict(m: &ScoreMatrix) -> Vec<(String, String)> {
    (0..m.rows())
        .map(|i| {
            (
                m.sample_ids[i].clone(),
                m.class_labels[argmax(m.row(i))].clone(),
            )
        })
        .collect()
}

/// Fraction of rows whose prediction equals `truth(sample_id)`.
pub fn accuracy(m: &ScoreMatrix, truth: impl Fn(&str) -> Option<String>) -> f64 {
    if m.rows() == 0 {
        return 0.0;
    }
    let correct = predict(m)
        .into_iter()
        .filter(|(id, label)| truth(id).as_deref() == Some(label.as_str()))
        .count();
    correct as f64 / m.rows() as f64
}
