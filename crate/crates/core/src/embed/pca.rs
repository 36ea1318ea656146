use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::error::{Error, Result};
use crate::rng::{domain, SeedStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaConfig {
    /// Above this input dimension the leading directions are found by power
    /// iteration instead of a full eigendecomposition.
    pub dense_max_dim: usize,
    pub power_max_iter: usize,
    pub power_tol: f64,
}

impl Default for PcaConfig {
    fn default() -> Self {
        Self {
            dense_max_dim: 1024,
            power_max_iter: 2000,
            power_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `h x d`, orthonormal rows in decreasing order of variance.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

pub fn pca_fit(points: &Matrix, h: usize) -> Result<PcaModel> {
    pca_fit_with(points, h, &PcaConfig::default())
}

pub fn pca_fit_with(points: &Matrix, h: usize, config: &PcaConfig) -> Result<PcaModel> {
    let (n, d) = (points.rows(), points.cols());
    if h == 0 || h > n.min(d) {
        return Err(Error::arg(format!("embedding dimension {h} outside 1..={}", n.min(d))));
    }
    let mut mean = vec![0.0; d];
    for row in points.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = Matrix::new(
        n,
        d,
        points
            .iter_rows()
            .flat_map(|row| row.iter().zip(&mean).map(|(v, m)| v - m))
            .collect(),
    )?;

    let (mut components, explained_variance) = if d <= config.dense_max_dim {
        dense_components(&centered, h)
    } else {
        power_components(&centered, h, config)
    };
    for i in 0..h {
        orient(components.row_mut(i));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

/// Flip so the largest-magnitude entry (first one on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn dense_components(centered: &Matrix, h: usize) -> (Matrix, Vec<f64>) {
    let (n, d) = (centered.rows(), centered.cols());
    let x = DMatrix::from_row_slice(n, d, centered.as_slice());
    let cov = (x.transpose() * &x) / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut comps = Matrix::zeros(h, d);
    let mut vars = Vec::with_capacity(h);
    for (r, &c) in order.iter().take(h).enumerate() {
        for j in 0..d {
            comps.row_mut(r)[j] = eig.eigenvectors[(j, c)];
        }
        vars.push(eig.eigenvalues[c].max(0.0));
    }
    (comps, vars)
}

/// `cov * v` without forming the covariance.
fn cov_times(centered: &Matrix, v: &[f64]) -> Vec<f64> {
    let n = centered.rows() as f64;
    let mut out = vec![0.0; centered.cols()];
    for row in centered.iter_rows() {
        let p: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
        for (o, a) in out.iter_mut().zip(row) {
            *o += p * a;
        }
    }
    out.iter_mut().for_each(|o| *o /= n);
    out
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn power_components(centered: &Matrix, h: usize, config: &PcaConfig) -> (Matrix, Vec<f64>) {
    let d = centered.cols();
    let mut rng = SeedStream::new(0).derive(domain::POWER_ITERATION).rng(0);
    let mut comps = Matrix::zeros(h, d);
    let mut vars = Vec::with_capacity(h);
    for r in 0..h {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut lambda = 0.0;
        for _ in 0..config.power_max_iter {
            for p in 0..r {
                let prev = comps.row(p);
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            normalize(&mut v);
            let mut w = cov_times(centered, &v);
            for p in 0..r {
                let prev = comps.row(p);
                let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            let next = normalize(&mut w);
            let done = (next - lambda).abs() <= config.power_tol * next.max(f64::MIN_POSITIVE);
            lambda = next;
            v = w;
            if done || next == 0.0 {
                break;
            }
        }
        comps.row_mut(r).copy_from_slice(&v);
        vars.push(lambda);
    }
    (comps, vars)
}

pub fn pca_transform(model: &PcaModel, points: &Matrix) -> Result<Matrix> {
    let d = model.mean.len();
    if points.cols() != d {
        return Err(Error::arg(format!(
            "model expects {d} input dimensions, got {}",
            points.cols()
        )));
    }
    let h = model.components.rows();
    let mut out = Vec::with_capacity(points.rows() * h);
    for row in points.iter_rows() {
        for c in model.components.iter_rows() {
            out.push(row.iter().zip(&model.mean).zip(c).map(|((x, m), w)| (x - m) * w).sum());
        }
    }
    Matrix::new(points.rows(), h, out)
}
