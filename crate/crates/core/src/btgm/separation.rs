//! Plug-in evaluation of the exact-recovery conditions for Ward's method on
//! spherical Gaussian mixtures. Everything here is closed-form arithmetic on
//! the mixture parameters; nothing is sampled.
//!
//! Logarithms are natural. `S_i = sigma_i (sqrt(d) + 2 sqrt(log n))` bounds the
//! radius of sample cluster `i` with high probability, and
//! `D+_ij = |mu_i - mu_j| + S_i + S_j`, `D-_ij = |mu_i - mu_j| - S_i - S_j`.

use serde::{Deserialize, Serialize};

use super::mixture::{Hierarchy, MixtureSpec};
use super::BtgmSpec;
use crate::dataset::euclidean;
use crate::error::{Error, Result};

/// Constants of the flat recovery condition. The defaults come from the
/// concentration argument behind it: `n >= 16 log(k) / w_i` for multiplicities,
/// and the `(5 + 12 sqrt(nu))` separation factor rounded up at `nu = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Constants {
    pub c: f64,
    pub c0: f64,
}

impl Default for Theorem1Constants {
    fn default() -> Self {
        Self { c: 17.0, c0: 16.0 }
    }
}

/// How the within-set diameters of two sets are combined on the right-hand side
/// of the hierarchical condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetBoundForm {
    #[default]
    Max,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Constants {
    pub c1: f64,
    pub form: SetBoundForm,
}

impl Default for Theorem2Constants {
    fn default() -> Self {
        Self {
            c1: 8.0,
            form: SetBoundForm::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryConstants {
    pub c: f64,
    pub c0: f64,
    pub c1: f64,
}

impl Default for CorollaryConstants {
    fn default() -> Self {
        Self {
            c: 17.0,
            c0: 16.0,
            c1: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBound {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    /// Separation the flat condition asks of this pair.
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPair {
    /// 1-based level, finest first.
    pub level: usize,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub d_minus: f64,
    pub first_diameter: f64,
    pub second_diameter: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `lhs >= rhs` (strictly greater when `strict`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub pass: bool,
}

impl Condition {
    fn new(name: impl Into<String>, lhs: f64, rhs: f64, strict: bool) -> Self {
        let pass = if strict { lhs > rhs } else { lhs >= rhs };
        Self {
            name: name.into(),
            lhs,
            rhs,
            strict,
            pass,
        }
    }

    fn slack(&self) -> f64 {
        slack(self.lhs, self.rhs)
    }
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs >= rhs {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

fn tightest(pairs: &[PairBound]) -> Option<&PairBound> {
    pairs.iter().fold(None, |best: Option<&PairBound>, p| match best {
        Some(b) if slack(b.distance, b.required) <= slack(p.distance, p.required) => Some(b),
        _ => Some(p),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub n: usize,
    pub radius: Vec<f64>,
    pub nu: f64,
    pub pairs: Vec<PairBound>,
    pub level_nu: Vec<f64>,
    pub level_pairs: Vec<LevelPair>,
    pub conditions: Vec<Condition>,
    /// Name of the condition with the least slack.
    pub binding: Option<String>,
    pub pass: bool,
}

impl SeparationReport {
    /// Pair with the least slack under the flat condition.
    pub fn tightest_pair(&self) -> Option<&PairBound> {
        tightest(&self.pairs)
    }

    fn finish(mut self) -> Self {
        self.pass = self.conditions.iter().all(|c| c.pass);
        self.binding = self
            .conditions
            .iter()
            .min_by(|a, b| a.slack().total_cmp(&b.slack()))
            .map(|c| c.name.clone());
        self
    }
}

fn radius_bound(sigma: f64, d: usize, n: usize) -> f64 {
    sigma * ((d as f64).sqrt() + 2.0 * (n as f64).ln().sqrt())
}

fn pair_table(mixture: &MixtureSpec, n: usize, required: impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<PairBound>) {
    let comps = mixture.components();
    let radius: Vec<f64> = comps
        .iter()
        .map(|c| radius_bound(c.std_dev, mixture.dim(), n))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            let distance = euclidean(&comps[i].mean, &comps[j].mean);
            let req = required(i, j);
            pairs.push(PairBound {
                i,
                j,
                distance,
                d_plus: distance + radius[i] + radius[j],
                d_minus: distance - radius[i] - radius[j],
                required: req,
                pass: distance >= req,
            });
        }
    }
    (radius, pairs)
}

/// Flat recovery: every pair of means at least
/// `c sqrt(nu) (sigma_i + sigma_j)(sqrt(d) + sqrt(log n))` apart, and
/// `n >= c0 log(k) / w_min`.
pub fn check_theorem1(mixture: &MixtureSpec, n: usize, constants: Theorem1Constants) -> Result<SeparationReport> {
    mixture.validate()?;
    if n == 0 {
        return Err(Error::arg("sample size must be at least 1"));
    }
    let nu = mixture.weight_ratio();
    let noise = (mixture.dim() as f64).sqrt() + (n as f64).ln().sqrt();
    let comps = mixture.components();
    let (radius, pairs) = pair_table(mixture, n, |i, j| {
        constants.c * nu.sqrt() * (comps[i].std_dev + comps[j].std_dev) * noise
    });

    let mut conditions = Vec::new();
    if let Some(p) = tightest(&pairs) {
        conditions.push(Condition::new(
            format!("separation of components {} and {}", p.i, p.j),
            p.distance,
            p.required,
            false,
        ));
    }
    let k = mixture.k() as f64;
    conditions.push(Condition::new(
        "sample size n >= c0 log(k) / w_min",
        n as f64,
        constants.c0 * k.ln() / mixture.min_weight(),
        false,
    ));
    Ok(SeparationReport {
        n,
        radius,
        nu,
        pairs,
        level_nu: Vec::new(),
        level_pairs: Vec::new(),
        conditions,
        binding: None,
        pass: false,
    }
    .finish())
}

/// Hierarchical recovery: at every level, for every pair of sets `I != J`,
/// `D-_{I,J} >= c1 sqrt(nu_l) max{D+_{I,I}, D+_{J,J}}` (or the sum of the two
/// diameters under [`SetBoundForm::Sum`]).
pub fn check_theorem2(
    mixture: &MixtureSpec,
    hierarchy: &Hierarchy,
    n: usize,
    constants: Theorem2Constants,
) -> Result<SeparationReport> {
    mixture.validate()?;
    if n == 0 {
        return Err(Error::arg("sample size must be at least 1"));
    }
    // re-validate against this mixture's component count
    let hierarchy = Hierarchy::new(hierarchy.levels().to_vec(), mixture.k())?;
    let comps = mixture.components();
    let (radius, pairs) = pair_table(mixture, n, |_, _| 0.0);
    let k = comps.len();
    let mut dist = vec![0.0; k * k];
    for p in &pairs {
        dist[p.i * k + p.j] = p.distance;
        dist[p.j * k + p.i] = p.distance;
    }
    let d_plus = |i: usize, j: usize| dist[i * k + j] + radius[i] + radius[j];
    let d_minus = |i: usize, j: usize| dist[i * k + j] - radius[i] - radius[j];
    let diameter = |set: &[usize]| {
        set.iter()
            .flat_map(|&i| set.iter().map(move |&j| (i, j)))
            .map(|(i, j)| d_plus(i, j))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut level_nu = Vec::new();
    let mut level_pairs = Vec::new();
    let mut conditions = Vec::new();
    for (l, sets) in hierarchy.levels().iter().enumerate() {
        let weights: Vec<f64> = sets.iter().map(|s| s.iter().map(|&i| comps[i].weight).sum()).collect();
        let nu = if sets.len() < 2 {
            1.0
        } else {
            let hi = weights.iter().cloned().fold(0.0, f64::max);
            let lo = weights.iter().cloned().fold(f64::INFINITY, f64::min);
            hi / lo
        };
        level_nu.push(nu);
        let diam: Vec<f64> = sets.iter().map(|s| diameter(s)).collect();
        let mut tightest_set: Option<LevelPair> = None;
        for a in 0..sets.len() {
            for b in (a + 1)..sets.len() {
                let gap = sets[a]
                    .iter()
                    .flat_map(|&i| sets[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| d_minus(i, j))
                    .fold(f64::INFINITY, f64::min);
                let combined = match constants.form {
                    SetBoundForm::Max => diam[a].max(diam[b]),
                    SetBoundForm::Sum => diam[a] + diam[b],
                };
                let bound = constants.c1 * nu.sqrt() * combined;
                let pair = LevelPair {
                    level: l + 1,
                    first: sets[a].clone(),
                    second: sets[b].clone(),
                    d_minus: gap,
                    first_diameter: diam[a],
                    second_diameter: diam[b],
                    bound,
                    pass: gap >= bound,
                };
                if tightest_set
                    .as_ref()
                    .is_none_or(|t| slack(gap, bound) < slack(t.d_minus, t.bound))
                {
                    tightest_set = Some(pair.clone());
                }
                level_pairs.push(pair);
            }
        }
        if let Some(t) = tightest_set {
            conditions.push(Condition::new(
                format!("level {} sets {:?} vs {:?}", l + 1, t.first, t.second),
                t.d_minus,
                t.bound,
                false,
            ));
        }
    }
    Ok(SeparationReport {
        n,
        radius,
        nu: mixture.weight_ratio(),
        pairs,
        level_nu,
        level_pairs,
        conditions,
        binding: None,
        pass: false,
    }
    .finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub k: usize,
    /// `2(2 c1 + 1) / (alpha - c1)`; absent when `alpha <= c1`.
    pub c2: Option<f64>,
    pub conditions: Vec<Condition>,
    pub pass: bool,
}

/// Closed-form conditions for a BTGM: `alpha > c1`,
/// `m >= 2 max{c, c2} (sqrt(d) + sqrt(log n))` and `n >= c0 k log k`.
pub fn check_corollary(spec: &BtgmSpec, n: usize, constants: CorollaryConstants) -> Result<CorollaryReport> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::arg("sample size must be at least 1"));
    }
    let k = spec.components();
    let c1 = constants.c1;
    let c2 = (spec.alpha > c1).then(|| 2.0 * (2.0 * c1 + 1.0) / (spec.alpha - c1));
    let mut conditions = vec![Condition::new("alpha > c1", spec.alpha, c1, true)];
    let noise = (spec.dim as f64).sqrt() + (n as f64).ln().sqrt();
    let margin_rhs = match c2 {
        Some(c2) => 2.0 * constants.c.max(c2) * noise,
        None => f64::INFINITY,
    };
    conditions.push(Condition::new(
        "margin m >= 2 max{c, c2} (sqrt(d) + sqrt(log n))",
        spec.margin,
        margin_rhs,
        false,
    ));
    let kf = k as f64;
    conditions.push(Condition::new(
        "sample size n >= c0 k log k",
        n as f64,
        constants.c0 * kf * kf.ln(),
        false,
    ));
    let pass = conditions.iter().all(|c| c.pass);
    Ok(CorollaryReport {
        k,
        c2,
        conditions,
        pass,
    })
}
