//! Monte Carlo estimation of the mean intersection number and of the count
//! distribution `{Aᵢ(N)}`.
//!
//! Sample `i` is drawn from `SeedSpec::new(master_seed, i)`, counted, and
//! stored at position `i`; the summary is reduced in index order. The result
//! is therefore a function of the configuration alone, whatever the worker
//! count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::curve::SobolevOrder;
use crate::error::{Error, Result};
use crate::exact::{mean_intersections_exact, MeanValue};
use crate::exec::Execution;
use crate::intersection::{count_intersections, CountingConfig};
use crate::sampling::{sample_max_norm_weighted_pair, sample_pair, CurvePair, SeedSpec};

/// Discard rates above this mark the result with a warning.
pub const MAX_DISCARD_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    /// Density proportional to `max(‖f‖, ‖g‖)^k`.
    MaxNormWeighted(f64),
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::MaxNormWeighted(k) => write!(f, "maxnorm:{k}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(Distribution::Uniform);
        }
        if let Some(k) = s.strip_prefix("maxnorm:") {
            let k: f64 = k
                .parse()
                .map_err(|_| Error::Precondition(format!("bad exponent in {s:?}")))?;
            if !k.is_finite() || k < 0.0 {
                return Err(Error::Precondition(format!(
                    "weight exponent must be >= 0, got {k}"
                )));
            }
            return Ok(Distribution::MaxNormWeighted(k));
        }
        Err(Error::Precondition(format!(
            "unknown distribution {s:?}; expected uniform or maxnorm:<k>"
        )))
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub degree: usize,
    pub r: SobolevOrder,
    pub num_samples: u64,
    pub master_seed: u64,
    pub worker_count: usize,
    pub counting: CountingConfig,
    pub distribution: Distribution,
}

impl ExperimentConfig {
    pub fn new(degree: usize, r: SobolevOrder, num_samples: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            degree,
            r,
            num_samples,
            master_seed,
            worker_count: 1,
            counting: CountingConfig::for_degree(degree, r),
            distribution: Distribution::Uniform,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.worker_count = workers;
        self
    }

    pub fn with_distribution(mut self, d: Distribution) -> Self {
        self.distribution = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::Precondition("num_samples must be >= 1".into()));
        }
        if self.worker_count == 0 {
            return Err(Error::Precondition("worker_count must be >= 1".into()));
        }
        if let Distribution::MaxNormWeighted(k) = self.distribution {
            if !k.is_finite() || k < 0.0 {
                return Err(Error::Precondition(format!(
                    "weight exponent must be >= 0, got {k}"
                )));
            }
        }
        self.counting.validate()
    }

    pub fn execution(&self) -> Execution {
        Execution::with_workers(self.worker_count)
    }

    pub fn draw(&self, index: u64) -> Result<CurvePair> {
        let seed = SeedSpec::new(self.master_seed, index);
        match self.distribution {
            Distribution::Uniform => Ok(sample_pair(self.degree, self.r, seed)),
            Distribution::MaxNormWeighted(k) => {
                sample_max_norm_weighted_pair(self.degree, self.r, k, seed)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleRecord {
    pub sample_index: u64,
    pub count: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Non-degenerate samples per intersection count.
    pub histogram: BTreeMap<usize, u64>,
    pub degenerate_discards: u64,
    pub samples_used: u64,
    pub exact: MeanValue,
    pub z_score_vs_exact: f64,
    pub discard_rate: f64,
    /// Set when the discard rate exceeds [`MAX_DISCARD_RATE`].
    pub warning: bool,
}

impl ExperimentResult {
    /// `|mean - exact| ≤ k·stderr`.
    pub fn within_sigma(&self, k: f64) -> bool {
        (self.mean - self.exact.approx).abs() <= k * self.stderr
    }
}

pub fn count_samples(cfg: &ExperimentConfig) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    cfg.execution()
        .map(0..cfg.num_samples, |i| {
            let pair = cfg.draw(i)?;
            let res = count_intersections(&pair.f, &pair.g, &cfg.counting)?;
            Ok(SampleRecord {
                sample_index: i,
                count: res.count,
                degenerate: res.degenerate,
            })
        })
        .into_iter()
        .collect()
}

pub fn summarize(cfg: &ExperimentConfig, records: &[SampleRecord]) -> ExperimentResult {
    let mut histogram = BTreeMap::new();
    let (mut sum, mut sum_sq, mut used, mut discards) = (0u128, 0u128, 0u64, 0u64);
    for rec in records {
        if rec.degenerate {
            discards += 1;
            continue;
        }
        *histogram.entry(rec.count).or_insert(0) += 1;
        sum += rec.count as u128;
        sum_sq += (rec.count as u128).pow(2);
        used += 1;
    }
    let n = used as f64;
    let mean = if used > 0 { sum as f64 / n } else { f64::NAN };
    let variance = if used > 1 {
        // exact integer centering before the single division
        let centered = sum_sq as f64 - (sum as f64) * (sum as f64) / n;
        (centered / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let stderr = (variance / n).sqrt();
    let exact = mean_intersections_exact(cfg.degree as u64, cfg.r);
    let z = if stderr > 0.0 {
        (mean - exact.approx) / stderr
    } else if mean == exact.approx {
        0.0
    } else {
        f64::INFINITY.copysign(mean - exact.approx)
    };
    let discard_rate = discards as f64 / records.len().max(1) as f64;
    ExperimentResult {
        mean,
        variance,
        stderr,
        ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
        histogram,
        degenerate_discards: discards,
        samples_used: used,
        exact,
        z_score_vs_exact: z,
        discard_rate,
        warning: discard_rate > MAX_DISCARD_RATE,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    Ok(summarize(cfg, &count_samples(cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub count: usize,
    /// Empirical relative volume `Âᵢ`.
    pub frequency: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionEstimate {
    pub bins: Vec<HistogramBin>,
    /// Two-sided normal quantile used for every band.
    pub z: f64,
    pub result: ExperimentResult,
}

impl DistributionEstimate {
    pub fn mean(&self) -> f64 {
        self.bins.iter().map(|b| b.count as f64 * b.frequency).sum()
    }
}

/// Wilson score interval for `successes / n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Normalized histogram over the even counts `0, 2, …, 4N²` with
/// simultaneous 95% Wilson bands (Bonferroni over the bins).
pub fn estimate_distribution(cfg: &ExperimentConfig) -> Result<DistributionEstimate> {
    let result = run_experiment(cfg)?;
    Ok(distribution_from(result))
}

pub fn distribution_from(result: ExperimentResult) -> DistributionEstimate {
    let n = result.samples_used;
    let keys: Vec<usize> = result.histogram.keys().copied().collect();
    let bins = keys.len().max(1) as f64;
    let z = Normal::standard().inverse_cdf(1.0 - 0.05 / (2.0 * bins));
    let bins = keys
        .iter()
        .map(|&k| {
            let hits = result.histogram[&k];
            let (lo, hi) = wilson_interval(hits, n, z);
            HistogramBin {
                count: k,
                frequency: hits as f64 / n as f64,
                lo,
                hi,
            }
        })
        .collect();
    DistributionEstimate { bins, z, result }
}

/// Runs the max-norm-weighted experiment (`L₂`) and compares it with the
/// uniform-ball exact mean.
pub fn weighted_invariance_check(
    degree: usize,
    k: f64,
    samples: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<ExperimentResult> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Precondition(format!(
            "weight exponent must be >= 0, got {k}"
        )));
    }
    let cfg = ExperimentConfig::new(degree, SobolevOrder::L2, samples, master_seed)
        .with_workers(exec.workers())
        .with_distribution(Distribution::MaxNormWeighted(k));
    run_experiment(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_never_meets() {
        let cfg = ExperimentConfig::new(0, SobolevOrder(0), 100, 1);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.mean, 0.0);
        assert_eq!(res.histogram, BTreeMap::from([(0, 100)]));
        assert_eq!(res.z_score_vs_exact, 0.0);
    }

    #[test]
    fn summary_statistics() {
        let cfg = ExperimentConfig::new(1, SobolevOrder(0), 6, 1);
        let recs: Vec<SampleRecord> = [2, 0, 4, 2, 2, 7]
            .iter()
            .enumerate()
            .map(|(i, &c)| SampleRecord {
                sample_index: i as u64,
                count: c,
                degenerate: c == 7,
            })
            .collect();
        let res = summarize(&cfg, &recs);
        assert_eq!(res.samples_used, 5);
        assert_eq!(res.degenerate_discards, 1);
        assert!((res.mean - 2.0).abs() < 1e-15);
        assert!((res.variance - 2.0).abs() < 1e-15);
        assert!((res.stderr - (2.0f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!(res.warning);
        let hist_mean: f64 = res
            .histogram
            .iter()
            .map(|(&k, &v)| k as f64 * v as f64)
            .sum::<f64>()
            / 5.0;
        assert_eq!(hist_mean, res.mean);
    }

    #[test]
    fn distribution_parsing() {
        assert_eq!(
            "uniform".parse::<Distribution>().unwrap(),
            Distribution::Uniform
        );
        assert_eq!(
            "maxnorm:4".parse::<Distribution>().unwrap(),
            Distribution::MaxNormWeighted(4.0)
        );
        assert!("maxnorm:-1".parse::<Distribution>().is_err());
        assert!("gauss".parse::<Distribution>().is_err());
        assert_eq!(
            Distribution::MaxNormWeighted(2.5).to_string(),
            "maxnorm:2.5"
        );
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn k_zero_matches_uniform_run() {
        let uni = run_experiment(&ExperimentConfig::new(1, SobolevOrder(0), 300, 8)).unwrap();
        let weighted = weighted_invariance_check(1, 0.0, 300, 8, Execution::Sequential).unwrap();
        assert_eq!(uni, weighted);
        assert!(weighted_invariance_check(1, -2.0, 10, 8, Execution::Sequential).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::new(1, SobolevOrder(0), 0, 1);
        assert!(run_experiment(&cfg).is_err());
        cfg.num_samples = 10;
        cfg.worker_count = 0;
        assert!(run_experiment(&cfg).is_err());
    }
}
