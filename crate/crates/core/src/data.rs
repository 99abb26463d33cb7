//! Labeled datasets: construction, synthetic generation, splitting, and the
//! CSV interchange format.
//!
//! All randomness flows through explicit 64-bit seeds; the same seed always
//! reproduces the same bytes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::floatfmt::float17;
use crate::linalg::l2_norm;

/// Slack for the norm-bound check; scaling into the ball can land a hair
/// above the bound in the last ulp.
const NORM_TOLERANCE: f64 = 1e-9;

/// One feature vector with a binary label in `{+1, -1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    x: Vec<f64>,
    y: i8,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: i8) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::input(format!("label must be +1 or -1, got {y}")));
        }
        if x.is_empty() {
            return Err(Error::input("feature vector must be nonempty"));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::input("feature entries must be finite"));
        }
        Ok(LabeledExample { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> i8 {
        self.y
    }
}

/// An ordered, norm-bounded sample of labeled examples sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    dim: usize,
    norm_bound: f64,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>, norm_bound: f64) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::input("dataset must contain at least one example"));
        }
        if !(norm_bound.is_finite() && norm_bound > 0.0) {
            return Err(Error::input("norm bound must be positive and finite"));
        }
        let dim = examples[0].x.len();
        for (i, ex) in examples.iter().enumerate() {
            if ex.x.len() != dim {
                return Err(Error::input(format!(
                    "example {i} has dimension {}, expected {dim}",
                    ex.x.len()
                )));
            }
            let norm = l2_norm(&ex.x);
            if norm > norm_bound + NORM_TOLERANCE {
                return Err(Error::input(format!(
                    "example {i} has norm {norm} exceeding bound {norm_bound}"
                )));
            }
        }
        Ok(Dataset {
            examples,
            dim,
            norm_bound,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn get(&self, i: usize) -> &LabeledExample {
        &self.examples[i]
    }

    /// CSV with header `y,x1,...,xd`; labels as `+1`/`-1`, floats with 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y");
        for j in 1..=self.dim {
            out.push_str(&format!(",x{j}"));
        }
        out.push('\n');
        for ex in &self.examples {
            out.push_str(if ex.y == 1 { "+1" } else { "-1" });
            for v in &ex.x {
                out.push(',');
                out.push_str(&float17(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the `to_csv` format. When `norm_bound` is `None` the tightest
    /// bound (the maximum example norm) is used.
    pub fn from_csv(text: &str, norm_bound: Option<f64>) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse("empty dataset csv"))?;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.first() != Some(&"y") || fields.len() < 2 {
            return Err(Error::parse(format!("bad dataset header: {header}")));
        }
        let dim = fields.len() - 1;
        let mut examples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != dim + 1 {
                return Err(Error::parse(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    cells.len(),
                    dim + 1
                )));
            }
            let y = match cells[0] {
                "+1" => 1,
                "-1" => -1,
                other => return Err(Error::parse(format!("bad label {other:?} on row {}", lineno + 2))),
            };
            let mut x = Vec::with_capacity(dim);
            for cell in &cells[1..] {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::parse(format!("bad float {cell:?} on row {}", lineno + 2)))?;
                x.push(v);
            }
            examples.push(LabeledExample::new(x, y)?);
        }
        if examples.is_empty() {
            return Err(Error::parse("dataset csv has no data rows"));
        }
        let bound = match norm_bound {
            Some(b) => b,
            None => examples
                .iter()
                .map(|ex| l2_norm(&ex.x))
                .fold(f64::MIN_POSITIVE, f64::max),
        };
        Dataset::new(examples, bound)
    }
}

/// Balanced two-class sample from per-class Gaussian clusters, rescaled as a
/// whole so every example lies in the `norm_bound`-ball.
///
/// The first `m/2` draws carry label `+1`, the rest `-1`; cluster centers are
/// drawn once per seed.
pub fn synth_gaussian_mixture(
    seed: u64,
    m: usize,
    d: usize,
    clusters_per_class: usize,
    norm_bound: f64,
) -> Result<Dataset> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::input(format!("sample count must be even and positive, got {m}")));
    }
    if d == 0 {
        return Err(Error::input("feature dimension must be at least 1"));
    }
    if clusters_per_class == 0 {
        return Err(Error::input("clusters_per_class must be at least 1"));
    }
    if !(norm_bound.is_finite() && norm_bound > 0.0) {
        return Err(Error::input("norm bound must be positive and finite"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Center spread of 3 standard deviations keeps clusters distinguishable
    // after the rescale without hand-placing anything.
    const CENTER_SCALE: f64 = 3.0;
    let mut centers = Vec::with_capacity(2 * clusters_per_class);
    for _ in 0..2 * clusters_per_class {
        let center: Vec<f64> = (0..d)
            .map(|_| CENTER_SCALE * rng.sample::<f64, _>(StandardNormal))
            .collect();
        centers.push(center);
    }

    let mut raw: Vec<(Vec<f64>, i8)> = Vec::with_capacity(m);
    for i in 0..m {
        let (label, class_idx) = if i < m / 2 { (1, 0) } else { (-1, 1) };
        let cluster = rng.random_range(0..clusters_per_class);
        let center = &centers[class_idx * clusters_per_class + cluster];
        let x: Vec<f64> = center
            .iter()
            .map(|c| c + rng.sample::<f64, _>(StandardNormal))
            .collect();
        raw.push((x, label));
    }

    let max_norm = raw.iter().map(|(x, _)| l2_norm(x)).fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { norm_bound / max_norm } else { 1.0 };
    let examples = raw
        .into_iter()
        .map(|(x, y)| LabeledExample::new(x.iter().map(|v| v * scale).collect(), y))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(examples, norm_bound)
}

/// Disjoint seeded partition of `data` into a train and test side.
pub fn train_test_split(seed: u64, data: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::input(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let m = data.len();
    let train_len = (m as f64 * train_fraction).floor() as usize;
    if train_len == 0 || train_len == m {
        return Err(Error::input(format!(
            "fraction {train_fraction} leaves an empty side for {m} examples"
        )));
    }
    let mut indices: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let take = |ids: &[usize]| -> Result<Dataset> {
        Dataset::new(
            ids.iter().map(|&i| data.examples[i].clone()).collect(),
            data.norm_bound,
        )
    };
    Ok((take(&indices[..train_len])?, take(&indices[train_len..])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_labels_and_mixed_dims() {
        assert!(LabeledExample::new(vec![1.0], 0).is_err());
        assert!(LabeledExample::new(vec![f64::NAN], 1).is_err());
        let exs = vec![
            LabeledExample::new(vec![0.1, 0.2], 1).unwrap(),
            LabeledExample::new(vec![0.1], -1).unwrap(),
        ];
        assert!(Dataset::new(exs, 1.0).is_err());
    }

    #[test]
    fn rejects_norm_violations() {
        let exs = vec![LabeledExample::new(vec![3.0, 4.0], 1).unwrap()];
        assert!(Dataset::new(exs.clone(), 1.0).is_err());
        assert!(Dataset::new(exs, 5.0).is_ok());
    }

    #[test]
    fn synth_is_balanced_and_inside_the_ball() {
        let data = synth_gaussian_mixture(7, 100, 2, 2, 1.0).unwrap();
        assert_eq!(data.len(), 100);
        let positives = data.examples().iter().filter(|e| e.y() == 1).count();
        assert_eq!(positives, 50);
        for ex in data.examples() {
            assert!(l2_norm(ex.x()) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let a = synth_gaussian_mixture(7, 40, 3, 2, 1.0).unwrap();
        let b = synth_gaussian_mixture(7, 40, 3, 2, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn different_seeds_differ() {
        let a = synth_gaussian_mixture(7, 40, 2, 2, 1.0).unwrap();
        let b = synth_gaussian_mixture(8, 40, 2, 2, 1.0).unwrap();
        assert_ne!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn rejects_odd_sample_counts() {
        assert!(synth_gaussian_mixture(1, 9, 2, 1, 1.0).is_err());
    }

    #[test]
    fn split_partitions_the_multiset() {
        let data = synth_gaussian_mixture(3, 10, 2, 1, 1.0).unwrap();
        let (train, test) = train_test_split(11, &data, 0.5).unwrap();
        assert_eq!(train.len(), 5);
        assert_eq!(test.len(), 5);

        let mut all: Vec<String> = train
            .examples()
            .iter()
            .chain(test.examples())
            .map(|e| format!("{:?}", e))
            .collect();
        let mut orig: Vec<String> = data.examples().iter().map(|e| format!("{:?}", e)).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_is_deterministic_and_rejects_empty_sides() {
        let data = synth_gaussian_mixture(3, 10, 2, 1, 1.0).unwrap();
        let a = train_test_split(5, &data, 0.3).unwrap();
        let b = train_test_split(5, &data, 0.3).unwrap();
        assert_eq!(a, b);
        assert!(train_test_split(5, &data, 0.05).is_err());
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let data = synth_gaussian_mixture(42, 12, 3, 2, 2.0).unwrap();
        let csv = data.to_csv();
        assert!(csv.starts_with("y,x1,x2,x3\n"));
        let back = Dataset::from_csv(&csv, Some(2.0)).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(Dataset::from_csv("", None).is_err());
        assert!(Dataset::from_csv("y,x1\n+2,0.5\n", None).is_err());
        assert!(Dataset::from_csv("y,x1\n+1,zebra\n", None).is_err());
        assert!(Dataset::from_csv("y,x1\n+1\n", None).is_err());
    }
}
