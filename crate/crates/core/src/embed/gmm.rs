use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{squared_distance, Matrix};
use crate::error::{Error, Result};
use crate::rng::{domain, SeedStream};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    #[default]
    Spherical,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmConfig {
    pub covariance: CovarianceKind,
    /// Stop once the log-likelihood gain falls below `tol * |previous|`.
    pub tol: f64,
    pub max_iter: usize,
    pub var_floor: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            covariance: CovarianceKind::Spherical,
            tol: 1e-6,
            max_iter: 300,
            var_floor: 1e-6,
        }
    }
}

/// Mixture of axis-aligned Gaussians. `variances` is `k x dim` for diagonal
/// and `k x 1` for spherical components.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    weights: Vec<f64>,
    means: Matrix,
    variances: Matrix,
}

impl GmmParams {
    pub fn new(weights: Vec<f64>, means: Matrix, variances: Matrix) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::Validation("mixture without components".into()));
        }
        if means.rows() != k || variances.rows() != k {
            return Err(Error::Validation(format!(
                "{k} weights but {} means and {} variance rows",
                means.rows(),
                variances.rows()
            )));
        }
        if variances.cols() != 1 && variances.cols() != means.cols() {
            return Err(Error::Validation(format!(
                "variance rows have {} entries, expected 1 or {}",
                variances.cols(),
                means.cols()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Validation(format!("mixture weight {w} is not positive")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("mixture weights sum to {sum}, not 1")));
        }
        if !means.is_finite() {
            return Err(Error::Validation("mixture means are not finite".into()));
        }
        if let Some(v) = variances.as_slice().iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Validation(format!("variance {v} is not positive")));
        }
        Ok(Self {
            weights,
            means,
            variances,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &Matrix {
        &self.means
    }

    pub fn variances(&self) -> &Matrix {
        &self.variances
    }

    pub fn covariance(&self) -> CovarianceKind {
        if self.variances.cols() == 1 && self.dim() != 1 {
            CovarianceKind::Spherical
        } else {
            CovarianceKind::Diagonal
        }
    }

    fn variance(&self, c: usize, j: usize) -> f64 {
        let row = self.variances.row(c);
        if row.len() == 1 {
            row[0]
        } else {
            row[j]
        }
    }

    /// `ln p(x | component c)`.
    pub fn log_density(&self, c: usize, x: &[f64]) -> f64 {
        let mean = self.means.row(c);
        let mut s = 0.0;
        for (j, (xj, mj)) in x.iter().zip(mean).enumerate() {
            let v = self.variance(c, j);
            let diff = xj - mj;
            s += LN_2PI + v.ln() + diff * diff / v;
        }
        -0.5 * s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignRule {
    /// Component with the largest likelihood, mixing weights ignored.
    #[default]
    Likelihood,
    /// Component with the largest posterior probability.
    Posterior,
}

/// Most likely component for `x`; ties go to the smaller index.
pub fn assign(gmm: &GmmParams, x: &[f64], rule: AssignRule) -> Result<usize> {
    if x.len() != gmm.dim() {
        return Err(Error::arg(format!(
            "point has {} dimensions, mixture has {}",
            x.len(),
            gmm.dim()
        )));
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for c in 0..gmm.k() {
        let mut score = gmm.log_density(c, x);
        if rule == AssignRule::Posterior {
            score += gmm.weights[c].ln();
        }
        if score > best_score {
            best = c;
            best_score = score;
        }
    }
    Ok(best)
}

pub fn assign_all(gmm: &GmmParams, points: &Matrix, rule: AssignRule) -> Result<Vec<usize>> {
    points.iter_rows().map(|x| assign(gmm, x, rule)).collect()
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub params: GmmParams,
    /// Log-likelihood before every M-step, plus the final value.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Components re-seeded after collapsing to zero responsibility.
    pub reseeds: usize,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Responsibilities (row-major `n x k`) and per-point log-likelihoods.
fn e_step(gmm: &GmmParams, points: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let k = gmm.k();
    let rows: Vec<(Vec<f64>, f64)> = (0..points.rows())
        .into_par_iter()
        .map(|i| {
            let x = points.row(i);
            let mut lp: Vec<f64> = (0..k).map(|c| gmm.weights[c].ln() + gmm.log_density(c, x)).collect();
            let total = log_sum_exp(&lp);
            lp.iter_mut().for_each(|v| *v = (*v - total).exp());
            (lp, total)
        })
        .collect();
    let mut resp = Vec::with_capacity(points.rows() * k);
    let mut ll = Vec::with_capacity(points.rows());
    for (r, t) in rows {
        resp.extend(r);
        ll.push(t);
    }
    (resp, ll)
}

/// Per-dimension population variance of the whole sample.
fn pooled_variance(points: &Matrix) -> Vec<f64> {
    let (n, d) = (points.rows() as f64, points.cols());
    let mut mean = vec![0.0; d];
    for row in points.iter_rows() {
        mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for row in points.iter_rows() {
        for j in 0..d {
            var[j] += (row[j] - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    var
}

fn variance_row(per_dim: &[f64], kind: CovarianceKind, floor: f64) -> Vec<f64> {
    match kind {
        CovarianceKind::Diagonal => per_dim.iter().map(|v| v.max(floor)).collect(),
        CovarianceKind::Spherical => {
            vec![(per_dim.iter().sum::<f64>() / per_dim.len() as f64).max(floor)]
        }
    }
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
fn kmeans_pp(points: &Matrix, k: usize, stream: &SeedStream) -> Vec<usize> {
    let n = points.rows();
    let mut rng = stream.derive(domain::GMM_INIT).rng(0);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = points
        .iter_rows()
        .map(|x| squared_distance(x, points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if nearest[pick] == 0.0 {
                pick = nearest.iter().rposition(|&w| w > 0.0).expect("positive mass");
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, x) in points.iter_rows().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(x, points.row(next)));
        }
    }
    chosen
}

/// Fits a `k`-component mixture by EM from a k-means++ start.
///
/// A component whose total responsibility vanishes is re-seeded at the point
/// the current model explains worst, with the pooled variance.
pub fn gmm_fit(points: &Matrix, k: usize, stream: &SeedStream, config: &GmmConfig) -> Result<GmmFit> {
    let (n, d) = (points.rows(), points.cols());
    if k == 0 || k > n {
        return Err(Error::arg(format!("component count {k} outside 1..={n}")));
    }
    if !points.is_finite() {
        return Err(Error::Numeric("input points are not finite".into()));
    }
    if config.var_floor.is_nan()
        || config.var_floor <= 0.0
        || config.tol.is_nan()
        || config.tol < 0.0
        || config.max_iter == 0
    {
        return Err(Error::Config("invalid EM settings".into()));
    }
    let pooled = pooled_variance(points);
    let start_var = variance_row(&pooled, config.covariance, config.var_floor);
    let means = points.select_rows(&kmeans_pp(points, k, stream));
    let variances = Matrix::new(k, start_var.len(), start_var.repeat(k))?;
    let mut params = GmmParams::new(vec![1.0 / k as f64; k], means, variances)?;

    let mut trace = Vec::new();
    let mut converged = false;
    let mut reseeds = 0;
    let mut iterations = 0;
    while iterations < config.max_iter {
        let (resp, point_ll) = e_step(&params, points);
        let ll: f64 = point_ll.iter().sum();
        if !ll.is_finite() {
            return Err(Error::Numeric(format!("log-likelihood became {ll}")));
        }
        if let Some(&prev) = trace.last() {
            if ll - prev < config.tol * f64::abs(prev) {
                trace.push(ll);
                converged = true;
                break;
            }
        }
        trace.push(ll);
        iterations += 1;

        let mut mass = vec![0.0; k];
        let mut means = vec![0.0; k * d];
        for i in 0..n {
            let x = points.row(i);
            for c in 0..k {
                let r = resp[i * k + c];
                mass[c] += r;
                for j in 0..d {
                    means[c * d + j] += r * x[j];
                }
            }
        }
        let mut var_rows = Vec::with_capacity(k);
        let mut weights = vec![0.0; k];
        let mut worst: Vec<usize> = (0..n).collect();
        worst.sort_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]).then(a.cmp(&b)));
        let mut next_worst = 0;
        for c in 0..k {
            if mass[c] <= 1e-12 * n as f64 {
                let p = worst[next_worst % n];
                next_worst += 1;
                means[c * d..(c + 1) * d].copy_from_slice(points.row(p));
                var_rows.push(start_var.clone());
                weights[c] = 1.0 / n as f64;
                reseeds += 1;
                continue;
            }
            means[c * d..(c + 1) * d].iter_mut().for_each(|m| *m /= mass[c]);
            let mut per_dim = vec![0.0; d];
            for i in 0..n {
                let r = resp[i * k + c];
                let x = points.row(i);
                for j in 0..d {
                    per_dim[j] += r * (x[j] - means[c * d + j]).powi(2);
                }
            }
            per_dim.iter_mut().for_each(|v| *v /= mass[c]);
            var_rows.push(variance_row(&per_dim, config.covariance, config.var_floor));
            weights[c] = mass[c] / n as f64;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let cols = var_rows[0].len();
        params = GmmParams::new(
            weights,
            Matrix::new(k, d, means)?,
            Matrix::new(k, cols, var_rows.concat())?,
        )?;
    }
    if !converged {
        let (_, point_ll) = e_step(&params, points);
        trace.push(point_ll.iter().sum());
    }
    Ok(GmmFit {
        params,
        log_likelihood: trace,
        iterations,
        converged,
        reseeds,
    })
}
