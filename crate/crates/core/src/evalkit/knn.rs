use rayon::prelude::*;

use super::EvalError;
use crate::fusion::ScoreMatrix;
use crate::rasterizer::JtmCanvas;

/// A rendered map flattened to `[0, 1]` RGB channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub sample_id: String,
    pub label: String,
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl ImageSample {
    pub fn from_canvas(
        sample_id: impl Into<String>,
        label: impl Into<String>,
        canvas: &JtmCanvas,
    ) -> Self {
        Self {
            sample_id: sample_id.into(),
            label: label.into(),
            width: canvas.width(),
            height: canvas.height(),
            data: canvas.pixels().iter().flat_map(|c| c.channels()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    /// Root-mean-square difference over all channels.
    #[default]
    L2Pixel,
}

impl DistanceMetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::L2Pixel => {
                let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (sum / a.len().max(1) as f64).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    /// Softmin temperature in distance units.
    pub temperature: f64,
    pub metric: DistanceMetric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 1,
            temperature: 0.01,
            metric: DistanceMetric::L2Pixel,
        }
    }
}

/// Scores every test image against the labelled training images.
///
/// For each class the mean distance to its `k` nearest training images
/// (fewer if the class has fewer) is turned into a score by a softmin over
/// classes. Classes without training images score 0. Rows sum to 1.
pub fn knn_scores(
    train: &[ImageSample],
    test: &[ImageSample],
    classes: &[String],
    config: &KnnConfig,
) -> Result<ScoreMatrix, EvalError> {
    if train.is_empty() {
        return Err(EvalError::Empty("no training images".into()));
    }
    if config.k == 0 || !(config.temperature > 0.0 && config.temperature.is_finite()) {
        return Err(EvalError::Empty(format!(
            "k must be at least 1 and temperature positive, got k={} temperature={}",
            config.k, config.temperature
        )));
    }
    let (w, h, len) = (train[0].width, train[0].height, train[0].data.len());
    if let Some(bad) = train
        .iter()
        .chain(test)
        .find(|s| s.width != w || s.height != h || s.data.len() != len)
    {
        return Err(EvalError::DimMismatch(format!(
            "{:?} is {}x{}, expected {w}x{h}",
            bad.sample_id, bad.width, bad.height
        )));
    }
    if let Some(bad) = train.iter().find(|s| !classes.contains(&s.label)) {
        return Err(EvalError::Empty(format!(
            "training label {:?} is not in the class list",
            bad.label
        )));
    }
    let class_of: Vec<usize> = train
        .iter()
        .map(|s| classes.iter().position(|c| *c == s.label).expect("checked"))
        .collect();
    let rows: Vec<Vec<f64>> = test
        .par_iter()
        .map(|t| {
            let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); classes.len()];
            for (s, &c) in train.iter().zip(&class_of) {
                per_class[c].push(config.metric.distance(&t.data, &s.data));
            }
            let means: Vec<Option<f64>> = per_class
                .into_iter()
                .map(|mut d| {
                    if d.is_empty() {
                        return None;
                    }
                    d.sort_by(f64::total_cmp);
                    let k = config.k.min(d.len());
                    Some(d[..k].iter().sum::<f64>() / k as f64)
                })
                .collect();
            softmin(&means, config.temperature)
        })
        .collect();
    let ids = test.iter().map(|s| s.sample_id.clone()).collect();
    Ok(ScoreMatrix::new(ids, classes.to_vec(), rows)?)
}

fn softmin(distances: &[Option<f64>], temperature: f64) -> Vec<f64> {
    let best = distances
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = distances
        .iter()
        .map(|d| d.map_or(0.0, |d| (-(d - best) / temperature).exp()))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{argmax, predict};

    fn img(id: &str, label: &str, data: Vec<f64>) -> ImageSample {
        ImageSample {
            sample_id: id.into(),
            label: label.into(),
            width: data.len() as u32,
            height: 1,
            data,
        }
    }

    fn classes(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_image_wins() {
        let train = vec![
            img("a0", "a", vec![0.0, 0.0, 0.0]),
            img("b0", "b", vec![1.0, 1.0, 1.0]),
        ];
        let test = vec![img("t", "?", vec![1.0, 1.0, 1.0])];
        let m = knn_scores(&train, &test, &classes(&["a", "b"]), &KnnConfig::default()).unwrap();
        assert_eq!(argmax(m.row(0)), 1);
        assert!((m.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equidistant_classes_tie_to_first() {
        let train = vec![img("a0", "a", vec![0.0]), img("b0", "b", vec![1.0])];
        let test = vec![img("t", "?", vec![0.5])];
        let m = knn_scores(&train, &test, &classes(&["a", "b"]), &KnnConfig::default()).unwrap();
        assert_eq!(m.row(0), &[0.5, 0.5]);
        assert_eq!(predict(&m)[0].1, "a");
    }

    #[test]
    fn absent_class_scores_zero() {
        let train = vec![img("a0", "a", vec![0.0])];
        let test = vec![img("t", "?", vec![0.3])];
        let m = knn_scores(&train, &test, &classes(&["a", "b"]), &KnnConfig::default()).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let train = vec![img("a0", "a", vec![0.0, 0.0])];
        let test = vec![img("t", "?", vec![0.3])];
        let err = knn_scores(&train, &test, &classes(&["a"]), &KnnConfig::default()).unwrap_err();
        assert!(matches!(err, EvalError::DimMismatch(_)));
        assert!(knn_scores(&[], &test, &classes(&["a"]), &KnnConfig::default()).is_err());
    }

    #[test]
    fn matches_exhaustive_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let labels = ["x", "y", "z"];
        let mut rand_img =
            |id: String, label: &str| img(&id, label, (0..12).map(|_| rng.gen::<f64>()).collect());
        let train: Vec<ImageSample> = (0..15)
            .map(|i| rand_img(format!("tr{i}"), labels[i % 3]))
            .collect();
        let test: Vec<ImageSample> = (0..6).map(|i| rand_img(format!("te{i}"), "?")).collect();
        let cfg = KnnConfig {
            k: 2,
            temperature: 0.05,
            ..KnnConfig::default()
        };
        let m = knn_scores(&train, &test, &classes(&labels), &cfg).unwrap();
        for (r, t) in test.iter().enumerate() {
            // Oracle: repeated selection of the closest unused neighbour.
            let mut means = Vec::new();
            for l in labels {
                let mut pool: Vec<f64> = train
                    .iter()
                    .filter(|s| s.label == l)
                    .map(|s| {
                        let mut acc = 0.0;
                        for i in 0..12 {
                            acc += (t.data[i] - s.data[i]).powi(2);
                        }
                        (acc / 12.0).sqrt()
                    })
                    .collect();
                let mut picked = 0.0;
                for _ in 0..2 {
                    let (i, d) = pool
                        .iter()
                        .copied()
                        .enumerate()
                        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                        .unwrap();
                    picked += d;
                    pool.remove(i);
                }
                means.push(picked / 2.0);
            }
            let lo = means.iter().cloned().fold(f64::MAX, f64::min);
            let e: Vec<f64> = means.iter().map(|d| (-(d - lo) / 0.05).exp()).collect();
            let z: f64 = e.iter().sum();
            for c in 0..3 {
                assert!((m.get(r, c) - e[c] / z).abs() < 1e-12);
            }
            assert!((m.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
