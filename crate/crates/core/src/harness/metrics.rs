use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::episode::EpisodeResult;
use super::HarnessError;

/// Success, shortest length, executed length, budget fraction. Enough to
/// compute every suite metric.
pub trait Outcome {
    fn success(&self) -> bool;
    fn shortest(&self) -> f64;
    fn path_length(&self) -> f64;
    fn time_fraction(&self) -> f64;
}

impl Outcome for EpisodeResult {
    fn success(&self) -> bool {
        self.success
    }
    fn shortest(&self) -> f64 {
        self.shortest
    }
    fn path_length(&self) -> f64 {
        self.path_length
    }
    fn time_fraction(&self) -> f64 {
        self.time_fraction
    }
}

/// Bare metric inputs, for hand-built fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub success: bool,
    pub shortest: f64,
    pub path_length: f64,
    pub time_fraction: f64,
}

impl Sample {
    pub fn success(shortest: f64, path_length: f64, time_fraction: f64) -> Self {
        Self {
            success: true,
            shortest,
            path_length,
            time_fraction,
        }
    }

    pub fn failure(shortest: f64, path_length: f64) -> Self {
        Self {
            success: false,
            shortest,
            path_length,
            time_fraction: 1.0,
        }
    }
}

impl Outcome for Sample {
    fn success(&self) -> bool {
        self.success
    }
    fn shortest(&self) -> f64 {
        self.shortest
    }
    fn path_length(&self) -> f64 {
        self.path_length
    }
    fn time_fraction(&self) -> f64 {
        self.time_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sr,
    Spl,
    Pace,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Sr, Metric::Spl, Metric::Pace];

    pub fn term<O: Outcome + ?Sized>(self, o: &O) -> f64 {
        match self {
            Metric::Sr => f64::from(u8::from(o.success())),
            Metric::Spl => spl_term(o),
            Metric::Pace => 1.0 - o.time_fraction(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sr => "sr",
            Metric::Spl => "spl",
            Metric::Pace => "pace",
        }
    }
}

pub fn spl_term<O: Outcome + ?Sized>(o: &O) -> f64 {
    if o.success() {
        o.shortest() / o.shortest().max(o.path_length())
    } else {
        0.0
    }
}

pub fn mean_metric<O: Outcome>(results: &[O], metric: Metric) -> Result<f64, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Empty);
    }
    if metric == Metric::Spl && results.iter().any(|r| !(r.shortest() > 0.0)) {
        return Err(HarnessError::NonPositiveShortest);
    }
    Ok(results.iter().map(|r| metric.term(r)).sum::<f64>() / results.len() as f64)
}

pub fn sr<O: Outcome>(results: &[O]) -> Result<f64, HarnessError> {
    mean_metric(results, Metric::Sr)
}

pub fn spl<O: Outcome>(results: &[O]) -> Result<f64, HarnessError> {
    mean_metric(results, Metric::Spl)
}

pub fn pace<O: Outcome>(results: &[O]) -> Result<f64, HarnessError> {
    mean_metric(results, Metric::Pace)
}

/// The metric over episodes whose shortest path is below `threshold`;
/// `None` when no episode qualifies.
pub fn cumulative<O: Outcome + Clone>(results: &[O], metric: Metric, threshold: f64) -> Option<f64> {
    let subset: Vec<O> = results.iter().filter(|r| r.shortest() < threshold).cloned().collect();
    mean_metric(&subset, metric).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub episodes: usize,
    pub sr: Option<f64>,
    pub spl: Option<f64>,
    pub pace: Option<f64>,
}

pub fn cumulative_curve<O: Outcome + Clone>(results: &[O], thresholds: &[f64]) -> Vec<CurvePoint> {
    thresholds
        .iter()
        .map(|&l| CurvePoint {
            threshold: l,
            episodes: results.iter().filter(|r| r.shortest() < l).count(),
            sr: cumulative(results, Metric::Sr, l),
            spl: cumulative(results, Metric::Spl, l),
            pace: cumulative(results, Metric::Pace, l),
        })
        .collect()
}

/// Evenly spaced thresholds from `step` up past the longest episode.
pub fn default_thresholds<O: Outcome>(results: &[O], step: f64) -> Vec<f64> {
    let longest = results.iter().map(|r| r.shortest()).fold(0.0, f64::max);
    let n = (longest / step).floor() as usize + 1;
    (1..=n).map(|k| k as f64 * step).collect()
}

/// Percentile bootstrap interval for the mean of paired differences
/// `a[i] - b[i]`.
pub fn paired_bootstrap(a: &[f64], b: &[f64], resamples: usize, confidence: f64, seed: u64) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired samples");
    assert!(!a.is_empty(), "need at least one pair");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..d.len()).map(|_| d[rng.random_range(0..d.len())]).sum::<f64>() / d.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(tail), at(1.0 - tail))
}
