use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LevelLabels, Matrix};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std_dev: f64,
}

/// Spherical Gaussian mixture, optionally carrying the level labels of a
/// planted hierarchy (one row of labels per component, coarsest first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<Vec<i64>>>,
}

impl MixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let spec = Self {
            components,
            levels: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_levels(mut self, levels: Vec<Vec<i64>>) -> Result<Self> {
        if levels.len() != self.k() {
            return Err(Error::arg(format!(
                "{} level rows for {} components",
                levels.len(),
                self.k()
            )));
        }
        LevelLabels::from_rows(&levels)?;
        self.levels = Some(levels);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::arg("mixture has no components"))?;
        let d = first.mean.len();
        if d == 0 {
            return Err(Error::arg("mixture means have dimension 0"));
        }
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::arg(format!("component {i} weight {} is not positive", c.weight)));
            }
            if !(c.std_dev.is_finite() && c.std_dev > 0.0) {
                return Err(Error::arg(format!(
                    "component {i} std dev {} is not positive",
                    c.std_dev
                )));
            }
            if c.mean.len() != d {
                return Err(Error::arg(format!(
                    "component {i} mean has dimension {}, expected {d}",
                    c.mean.len()
                )));
            }
            if c.mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg(format!("component {i} mean is not finite")));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::arg(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    pub fn levels(&self) -> Option<&[Vec<i64>]> {
        self.levels.as_deref()
    }

    pub fn weight_ratio(&self) -> f64 {
        let (lo, hi) = self.components.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
            (lo.min(c.weight), hi.max(c.weight))
        });
        if self.k() < 2 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn min_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).fold(f64::INFINITY, f64::min)
    }

    fn pick_component(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        self.k() - 1
    }
}

/// Draws `n` i.i.d. points: component by weight, then `N(mu, sigma^2 I)`.
///
/// Point `i` uses its own stream `stream.rng(i)`: one uniform for the
/// component, then `d` standard normals (ziggurat method, `rand_distr`).
pub fn sample(mixture: &MixtureSpec, n: usize, stream: SeedStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::arg("sample size must be at least 1"));
    }
    let assignment: Vec<usize> = (0..n)
        .map(|i| mixture.pick_component(stream.rng(i as u64).random::<f64>()))
        .collect();
    draw(mixture, &assignment, stream)
}

/// Draws exactly `counts[c]` points from component `c`, in component order.
pub fn sample_counts(mixture: &MixtureSpec, counts: &[usize], stream: SeedStream) -> Result<Dataset> {
    if counts.len() != mixture.k() {
        return Err(Error::arg(format!(
            "{} counts for {} components",
            counts.len(),
            mixture.k()
        )));
    }
    let assignment: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect();
    if assignment.is_empty() {
        return Err(Error::arg("sample size must be at least 1"));
    }
    draw(mixture, &assignment, stream)
}

fn draw(mixture: &MixtureSpec, assignment: &[usize], stream: SeedStream) -> Result<Dataset> {
    mixture.validate()?;
    let d = mixture.dim();
    let mut data = Vec::with_capacity(assignment.len() * d);
    for (i, &c) in assignment.iter().enumerate() {
        let comp = &mixture.components[c];
        let mut rng = stream.rng(i as u64);
        // keep the component draw in the stream even when it is not used, so
        // the noise of point i is the same under both samplers
        let _: f64 = rng.random();
        for &mu in &comp.mean {
            let z: f64 = rng.sample(StandardNormal);
            data.push(mu + comp.std_dev * z);
        }
    }
    let points = Matrix::new(assignment.len(), d, data)?;
    let flat: Vec<i64> = assignment.iter().map(|&c| c as i64).collect();
    let mut ds = Dataset::new(points)?.with_flat_labels(flat)?;
    if let Some(levels) = &mixture.levels {
        let rows: Vec<Vec<i64>> = assignment.iter().map(|&c| levels[c].clone()).collect();
        ds = ds.with_level_labels(LevelLabels::from_rows(&rows)?)?;
    }
    Ok(ds)
}

/// Nested partitions of component indices, finest level first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hierarchy {
    levels: Vec<Vec<Vec<usize>>>,
}

impl Hierarchy {
    /// Each level must partition `0..k` and refine the next level.
    pub fn new(levels: Vec<Vec<Vec<usize>>>, k: usize) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Structural("hierarchy has no levels".into()));
        }
        for (l, level) in levels.iter().enumerate() {
            let mut owner = vec![usize::MAX; k];
            for (s, set) in level.iter().enumerate() {
                if set.is_empty() {
                    return Err(Error::Structural(format!("level {} has an empty set", l + 1)));
                }
                for &i in set {
                    if i >= k || owner[i] != usize::MAX {
                        return Err(Error::Structural(format!(
                            "level {} does not partition 0..{k} (index {i})",
                            l + 1
                        )));
                    }
                    owner[i] = s;
                }
            }
            if owner.contains(&usize::MAX) {
                return Err(Error::Structural(format!("level {} misses components", l + 1)));
            }
            if l > 0 {
                // every finer set must sit inside one coarser set
                for set in &levels[l - 1] {
                    let target = owner[set[0]];
                    if set.iter().any(|&i| owner[i] != target) {
                        return Err(Error::Structural(format!(
                            "level {} does not refine level {}",
                            l,
                            l + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Vec<Vec<usize>>] {
        &self.levels
    }

    pub fn singletons(k: usize) -> Self {
        Self {
            levels: vec![(0..k).map(|i| vec![i]).collect()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btgm::BtgmSpec;

    #[test]
    fn degenerate_noise_returns_means() {
        let spec = BtgmSpec::new(2, 3.0, 2.0, 4).unwrap();
        let mix = spec.mixture(1e-12).unwrap();
        let ds = sample(&mix, 50, SeedStream::new(1)).unwrap();
        let labels = ds.flat_labels().unwrap();
        for (i, row) in ds.points().iter_rows().enumerate() {
            let mu = &mix.components()[labels[i] as usize].mean;
            for (x, m) in row.iter().zip(mu) {
                assert!((x - m).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let mix = BtgmSpec::new(3, 8.0, 2.0, 10).unwrap().mixture(1.0).unwrap();
        let a = sample(&mix, 200, SeedStream::new(9)).unwrap();
        let b = sample(&mix, 200, SeedStream::new(9)).unwrap();
        assert_eq!(a, b);
        let c = sample(&mix, 200, SeedStream::new(10)).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn level_labels_are_bit_prefixes() {
        let mix = BtgmSpec::new(3, 1.0, 2.0, 3).unwrap().mixture(1.0).unwrap();
        let ds = sample_counts(&mix, &[1; 8], SeedStream::new(0)).unwrap();
        let levels = ds.level_labels().unwrap();
        assert_eq!(levels.row(5), &[1, 2, 5]);
        assert_eq!(levels.row(2), &[0, 1, 2]);
    }

    #[test]
    fn counts_sampler_matches_per_point_noise() {
        // with one component both samplers see identical streams
        let mix = MixtureSpec::new(vec![Component {
            weight: 1.0,
            mean: vec![0.0, 0.0],
            std_dev: 1.0,
        }])
        .unwrap();
        let a = sample(&mix, 10, SeedStream::new(3)).unwrap();
        let b = sample_counts(&mix, &[10], SeedStream::new(3)).unwrap();
        assert_eq!(a.points(), b.points());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let bad = MixtureSpec::new(vec![Component {
            weight: 0.5,
            mean: vec![0.0],
            std_dev: 1.0,
        }]);
        assert!(bad.is_err());
    }

    #[test]
    fn hierarchy_validation() {
        let ok = Hierarchy::new(vec![vec![vec![0], vec![1], vec![2]], vec![vec![0, 1], vec![2]]], 3);
        assert!(ok.is_ok());
        let not_refined = Hierarchy::new(vec![vec![vec![0, 2], vec![1]], vec![vec![0, 1], vec![2]]], 3);
        assert!(matches!(not_refined, Err(Error::Structural(_))));
        let overlap = Hierarchy::new(vec![vec![vec![0, 1], vec![1, 2]]], 3);
        assert!(matches!(overlap, Err(Error::Structural(_))));
    }
}
