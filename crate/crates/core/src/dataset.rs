//! Row-major point matrices and labelled datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::arg(format!("row {i} has {} columns, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact would yield nothing for zero columns; rows are still rows.
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Per-point labels at several hierarchy levels, `n x h`, level 1 coarsest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLabels {
    n: usize,
    h: usize,
    data: Vec<i64>,
}

impl LevelLabels {
    /// Builds the table and checks that each level refines the one above it.
    pub fn new(n: usize, h: usize, data: Vec<i64>) -> Result<Self> {
        if h == 0 {
            return Err(Error::arg("level labels need at least one level"));
        }
        if data.len() != n * h {
            return Err(Error::arg(format!(
                "level label table has {} entries, expected {n}x{h}",
                data.len()
            )));
        }
        let labels = Self { n, h, data };
        labels.check_refinement()?;
        Ok(labels)
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let h = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != h) {
            return Err(Error::arg("level label rows have differing lengths"));
        }
        Self::new(rows.len(), h, rows.concat())
    }

    /// A single level holding flat class labels.
    pub fn flat(labels: &[i64]) -> Self {
        Self {
            n: labels.len(),
            h: 1,
            data: labels.to_vec(),
        }
    }

    fn check_refinement(&self) -> Result<()> {
        use std::collections::HashMap;
        for l in 1..self.h {
            let mut parent: HashMap<i64, i64> = HashMap::new();
            for i in 0..self.n {
                let fine = self.get(i, l);
                let coarse = self.get(i, l - 1);
                if let Some(&p) = parent.get(&fine) {
                    if p != coarse {
                        return Err(Error::arg(format!(
                            "level {} label {fine} spans level {} labels {p} and {coarse}",
                            l + 1,
                            l
                        )));
                    }
                } else {
                    parent.insert(fine, coarse);
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.h
    }

    /// Label of point `i` at zero-based level `level` (0 = coarsest).
    pub fn get(&self, i: usize, level: usize) -> i64 {
        self.data[i * self.h + level]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.h..(i + 1) * self.h]
    }

    pub fn finest(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, self.h - 1)).collect()
    }

    pub fn select(&self, indices: &[usize]) -> LevelLabels {
        let mut data = Vec::with_capacity(indices.len() * self.h);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        LevelLabels {
            n: indices.len(),
            h: self.h,
            data,
        }
    }
}

/// Points plus optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Matrix,
    flat_labels: Option<Vec<i64>>,
    level_labels: Option<LevelLabels>,
}

impl Dataset {
    pub fn new(points: Matrix) -> Result<Self> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(Error::arg(format!(
                "dataset must have n >= 1 and d >= 1, got {}x{}",
                points.rows(),
                points.cols()
            )));
        }
        if !points.is_finite() {
            return Err(Error::arg("dataset contains non-finite coordinates"));
        }
        Ok(Self {
            points,
            flat_labels: None,
            level_labels: None,
        })
    }

    pub fn with_flat_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::arg(format!(
                "{} flat labels for {} points",
                labels.len(),
                self.n()
            )));
        }
        self.flat_labels = Some(labels);
        Ok(self)
    }

    pub fn with_level_labels(mut self, labels: LevelLabels) -> Result<Self> {
        if labels.n() != self.n() {
            return Err(Error::arg(format!(
                "{} level-label rows for {} points",
                labels.n(),
                self.n()
            )));
        }
        self.level_labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn flat_labels(&self) -> Option<&[i64]> {
        self.flat_labels.as_deref()
    }

    pub fn level_labels(&self) -> Option<&LevelLabels> {
        self.level_labels.as_ref()
    }

    /// Flat ground truth: explicit flat labels, else the finest level.
    pub fn ground_truth(&self) -> Option<Vec<i64>> {
        self.flat_labels
            .clone()
            .or_else(|| self.level_labels.as_ref().map(LevelLabels::finest))
    }

    /// Replaces the coordinates, keeping labels.
    pub fn with_points(&self, points: Matrix) -> Result<Self> {
        if points.rows() != self.n() {
            return Err(Error::arg("replacement points have a different row count"));
        }
        let mut out = Dataset::new(points)?;
        out.flat_labels = self.flat_labels.clone();
        out.level_labels = self.level_labels.clone();
        Ok(out)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            points: self.points.select_rows(indices),
            flat_labels: self
                .flat_labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            level_labels: self.level_labels.as_ref().map(|l| l.select(indices)),
        }
    }
}
