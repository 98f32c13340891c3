//! Cross-benchmark statistics: standard errors, the statistical/device
//! noise decomposition, mean scores and score–QV correlation.

use crate::error::{Error, Result};
use crate::sim::{CountsHistogram, Measurement};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;

/// Benchmark value with its 1σ standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreWithError {
    pub value: f64,
    pub stderr: f64,
}

impl ScoreWithError {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr: stderr.abs() }
    }

    /// Arithmetic mean with errors combined in quadrature: `√(Σσ²)/k`.
    pub fn mean_quadrature(parts: &[ScoreWithError]) -> Self {
        let k = parts.len() as f64;
        let value = parts.iter().map(|s| s.value).sum::<f64>() / k;
        let var: f64 = parts.iter().map(|s| s.stderr * s.stderr).sum();
        Self::new(value, var.sqrt() / k)
    }
}

impl std::fmt::Display for ScoreWithError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.value, self.stderr)
    }
}

/// `√(p̂(1−p̂)/n)`.
pub fn binomial_stderr(p: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n).sqrt()
}

/// Mean and standard deviation (n − 1 denominator) of a sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One observation for the noise fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePoint {
    pub shots: f64,
    pub score: f64,
    /// Standard error of `score`, when known.
    #[serde(default)]
    pub stderr: Option<f64>,
}

/// `score ≈ n_s/√N + n_d` with non-negative coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFit {
    pub n_s: f64,
    pub n_d: f64,
    pub n_s_err: f64,
    pub n_d_err: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Non-negative (weighted) least squares of score against `(1/√N, 1)`.
///
/// With per-point errors the fit is weighted by `1/σ²` and the parameter
/// covariance is scaled by the reduced χ² when that exceeds one; without them
/// the covariance comes from the residual variance.
pub fn fit_noise(points: &[ScorePoint]) -> Result<NoiseFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.shots).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: distinct.len() });
    }
    if points.iter().any(|p| p.shots.is_nan() || p.shots <= 0.0 || !p.score.is_finite()) {
        return Err(Error::InvalidConfig("noise fit needs positive shots and finite scores".into()));
    }
    let weighted = points.iter().all(|p| p.stderr.is_some_and(|s| s > 0.0));
    let w: Vec<f64> = points
        .iter()
        .map(|p| if weighted { 1.0 / p.stderr.unwrap().powi(2) } else { 1.0 })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| 1.0 / p.shots.sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.score).collect();

    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..points.len() {
        sw += w[i];
        sx += w[i] * x[i];
        sxx += w[i] * x[i] * x[i];
        sy += w[i] * y[i];
        sxy += w[i] * x[i] * y[i];
    }
    let det = sw * sxx - sx * sx;
    let rss = |a: f64, b: f64| -> f64 {
        (0..points.len()).map(|i| w[i] * (y[i] - a * x[i] - b).powi(2)).sum()
    };

    // Candidate solutions on the feasible region; the unconstrained one is
    // used whenever it is feasible.
    let mut candidates: Vec<(f64, f64, usize)> = Vec::new();
    let a = (sw * sxy - sx * sy) / det;
    let b = (sxx * sy - sx * sxy) / det;
    if a >= 0.0 && b >= 0.0 {
        candidates.push((a, b, 2));
    } else {
        candidates.push((0.0, (sy / sw).max(0.0), 1));
        candidates.push(((sxy / sxx).max(0.0), 0.0, 1));
    }
    let (n_s, n_d, free) = candidates
        .into_iter()
        .min_by(|p, q| rss(p.0, p.1).total_cmp(&rss(q.0, q.1)))
        .expect("at least one candidate");

    let m = points.len() as f64;
    let chi2 = rss(n_s, n_d);
    let dof = (m - free as f64).max(1.0);
    let scale = if weighted { (chi2 / dof).max(1.0) } else { chi2 / dof };
    let (var_s, var_d) = match free {
        2 => (scale * sw / det, scale * sxx / det),
        _ if n_s == 0.0 => (scale * sw / det, scale / sw),
        _ => (scale / sxx, scale * sxx / det),
    };
    let residual = ((0..points.len()).map(|i| (y[i] - n_s * x[i] - n_d).powi(2)).sum::<f64>() / m).sqrt();
    Ok(NoiseFit { n_s, n_d, n_s_err: var_s.sqrt(), n_d_err: var_d.sqrt(), residual })
}

/// Bin sizes `2^k` from the largest one allowing two bins down to 4.
pub fn bin_sizes(shots: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut b = 1u64 << (63 - (shots / 2).max(1).leading_zeros());
    while b >= 4 {
        out.push(b);
        b /= 2;
    }
    out
}

/// Shot-level resampling for the noise fit: every job's shots are shuffled
/// and cut into bins of each size from [`bin_sizes`]; bin `k` of all jobs
/// forms one reduced run that `score` evaluates. Returns one point per bin
/// size with the mean score over at most `max_bins` bins and its standard
/// error.
pub fn resample_scores<R: Rng>(
    measurements: &[Measurement],
    max_bins: usize,
    rng: &mut R,
    mut score: impl FnMut(&[Measurement]) -> Result<f64>,
) -> Result<Vec<ScorePoint>> {
    let mut shot_lists: Vec<Vec<Option<&String>>> = Vec::with_capacity(measurements.len());
    for m in measurements {
        let h = m
            .as_counts()
            .ok_or_else(|| Error::MissingData("resampling needs sampled histograms".into()))?;
        let mut shots: Vec<Option<&String>> = Vec::with_capacity(h.shots as usize);
        for (k, &n) in &h.counts {
            shots.extend(std::iter::repeat_n(Some(k), n as usize));
        }
        shots.resize(h.shots as usize, None);
        shots.shuffle(rng);
        shot_lists.push(shots);
    }
    let min_shots = shot_lists.iter().map(Vec::len).min().unwrap_or(0) as u64;
    let mut points = Vec::new();
    for size in bin_sizes(min_shots) {
        let n_bins = ((min_shots / size) as usize).min(max_bins);
        let mut scores = Vec::with_capacity(n_bins);
        for bin in 0..n_bins {
            let lo = bin * size as usize;
            let run: Vec<Measurement> = shot_lists
                .iter()
                .map(|shots| {
                    let mut h = CountsHistogram::new(size);
                    for s in shots[lo..lo + size as usize].iter().flatten() {
                        *h.counts.entry((*s).clone()).or_insert(0) += 1;
                    }
                    Measurement::Counts(h)
                })
                .collect();
            scores.push(score(&run)?);
        }
        let (mean, std) = mean_std(&scores);
        let stderr = if n_bins > 1 { Some(std / (n_bins as f64).sqrt()) } else { None };
        points.push(ScorePoint { shots: size as f64, score: mean, stderr });
    }
    Ok(points)
}

pub const BENCHMARKS: [&str; 6] = ["bell", "sm", "mandelbrot", "line", "matinv", "platonic"];

/// Converts a benchmark's overall score into an error score where 0 is
/// perfect.
pub fn normalized_error(benchmark: &str, score: f64) -> Result<f64> {
    Ok(match benchmark {
        "platonic" => score / 2.0,
        "line" => score / std::f64::consts::SQRT_2,
        "bell" => {
            if score <= 0.0 {
                1.0
            } else {
                ((1.5 - score) / score).clamp(0.0, 1.0)
            }
        }
        "sm" | "mandelbrot" | "matinv" => score,
        other => return Err(Error::InvalidConfig(format!("unknown benchmark {other}"))),
    })
}

/// Reciprocal of the mean normalized error score over all six benchmarks.
pub fn mean_score(scores: &BTreeMap<String, ScoreWithError>) -> Result<f64> {
    let mut total = 0.0;
    for b in BENCHMARKS {
        let s = scores.get(b).ok_or_else(|| Error::MissingBenchmark(b.to_string()))?;
        total += normalized_error(b, s.value)?;
    }
    Ok(BENCHMARKS.len() as f64 / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub device: String,
    pub scores: BTreeMap<String, ScoreWithError>,
    pub normalized: BTreeMap<String, f64>,
    pub mean_score: Option<f64>,
    #[serde(default)]
    pub quantum_volume: Option<f64>,
}

impl DeviceReport {
    pub fn new(device: impl Into<String>, scores: BTreeMap<String, ScoreWithError>, qv: Option<f64>) -> Result<Self> {
        let normalized = scores
            .iter()
            .map(|(k, s)| Ok((k.clone(), normalized_error(k, s.value)?)))
            .collect::<Result<_>>()?;
        let mean_score = mean_score(&scores).ok();
        Ok(Self { device: device.into(), scores, normalized, mean_score, quantum_volume: qv })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// `1 − p` of the two-sided t-test with `n − 2` degrees of freedom.
    pub confidence: f64,
}

/// Pearson correlation between scores and quantum volumes.
pub fn correlate(scores: &[f64], qv: &[f64], log2_qv: bool) -> Result<Correlation> {
    if scores.len() != qv.len() {
        return Err(Error::InvalidConfig("score and QV lists differ in length".into()));
    }
    let n = scores.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    let ys: Vec<f64> = if log2_qv { qv.iter().map(|v| v.log2()).collect() } else { qv.to_vec() };
    let (mx, my) = (scores.iter().sum::<f64>() / n as f64, ys.iter().sum::<f64>() / n as f64);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in scores.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidConfig("correlation undefined for constant data".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let confidence = if (1.0 - r.abs()) < 1e-15 {
        1.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let p = 2.0 * (1.0 - dist.cdf(t.abs()));
        1.0 - p
    };
    Ok(Correlation { r, confidence })
}
