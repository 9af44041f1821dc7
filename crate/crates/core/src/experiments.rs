//! Monte Carlo fidelity experiments on fabricated circuits and the summary
//! statistics reported for them.
//!
//! Each trial draws everything it needs (input state or solution mode, then
//! one fabrication of the circuit) from its own stream keyed by
//! `(seed, trial index)`. Trials run on a rayon pool and their fidelities
//! are stored by index before any reduction, so results do not depend on the
//! number of workers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_in_place, AmplitudeVector, Circuit};
use crate::error::{Error, Result};
use crate::generators::{grover_search, qft};
use crate::noise::{realize_unchecked, trial_rng, NoiseParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Haar-random inputs through a fabricated `F_d`.
    Qft,
    /// Full search circuit on `d` items with a random marked item.
    Grover,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Qft => "qft",
            ExperimentKind::Grover => "grover",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qft" => Ok(ExperimentKind::Qft),
            "grover" | "grover-search" => Ok(ExperimentKind::Grover),
            other => Err(Error::InvalidExperiment(format!("unknown experiment kind '{other}'"))),
        }
    }
}

/// Whether the simulated state is renormalized before the overlap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityConvention {
    /// `|⟨Ψ|Φ⟩|²`; photon loss lowers the fidelity.
    #[default]
    Unnormalized,
    /// `|⟨Ψ|Φ⟩|² / ‖Φ‖²`; fidelity conditioned on the photon surviving.
    Normalized,
}

impl FidelityConvention {
    pub fn name(self) -> &'static str {
        match self {
            FidelityConvention::Unnormalized => "unnormalized",
            FidelityConvention::Normalized => "normalized",
        }
    }
}

impl fmt::Display for FidelityConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FidelityConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unnormalized" => Ok(FidelityConvention::Unnormalized),
            "normalized" => Ok(FidelityConvention::Normalized),
            other => Err(Error::InvalidExperiment(format!("unknown fidelity convention '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub modes: usize,
    pub trials: usize,
    pub noise: NoiseParams,
    pub seed: u64,
    pub convention: FidelityConvention,
}

impl ExperimentSpec {
    /// Default noise, unnormalized fidelity.
    pub fn new(kind: ExperimentKind, modes: usize, trials: usize, seed: u64) -> Self {
        ExperimentSpec {
            kind,
            modes,
            trials,
            noise: NoiseParams::default(),
            seed,
            convention: FidelityConvention::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidExperiment("trials must be at least 1".into()));
        }
        self.noise.validate()?;
        match self.kind {
            ExperimentKind::Qft => qft(self.modes).map(|_| ()),
            ExperimentKind::Grover => grover_search(self.modes, 1).map(|_| ()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub width: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub stats: SummaryStats,
    /// Per-trial fidelities in trial order.
    pub fidelities: Vec<f64>,
}

/// Haar-random pure state from Box–Muller complex Gaussians:
/// `z_k = √(−2 ln x_k)·e^{2πi y_k}` with `x_k, y_k` uniform on `(0, 1)`,
/// normalized to unit Euclidean length.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> AmplitudeVector {
    let mut z: Vec<Complex64> = (0..d)
        .map(|_| {
            let x: f64 = rng.sample(Open01);
            let y: f64 = rng.sample(Open01);
            Complex64::from_polar((-2.0 * x.ln()).sqrt(), 2.0 * PI * y)
        })
        .collect();
    let norm = crate::circuit::norm(&z);
    z.iter_mut().for_each(|a| *a /= norm);
    z
}

/// Squared overlap of the ideal and simulated outputs, in `[0, 1]`.
///
/// `ideal` is expected to be normalized; its norm is divided out anyway so
/// identical inputs give exactly 1.
pub fn fidelity(ideal: &[Complex64], simulated: &[Complex64], convention: FidelityConvention) -> Result<f64> {
    if ideal.len() != simulated.len() {
        return Err(Error::DimensionMismatch { expected: ideal.len(), actual: simulated.len() });
    }
    let overlap: Complex64 = ideal.iter().zip(simulated).map(|(a, b)| a.conj() * b).sum();
    let ideal_sq: f64 = ideal.iter().map(Complex64::norm_sqr).sum();
    let denom = match convention {
        FidelityConvention::Unnormalized => ideal_sq * ideal_sq,
        FidelityConvention::Normalized => ideal_sq * simulated.iter().map(Complex64::norm_sqr).sum::<f64>(),
    };
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((overlap.norm_sqr() / denom).clamp(0.0, 1.0))
}

fn run_indexed<F>(trials: usize, workers: Option<usize>, trial: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    let collect = || (0..trials as u64).into_par_iter().map(&trial).collect::<Vec<f64>>();
    match workers {
        None => Ok(collect()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidExperiment(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(collect))
        }
    }
}

fn require_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidExperiment(format!("expected a {kind} spec, got {}", spec.kind)));
    }
    spec.validate()
}

fn finish(spec: &ExperimentSpec, fidelities: Vec<f64>) -> Result<ExperimentResult> {
    let stats = summarize(&fidelities)?;
    Ok(ExperimentResult { spec: *spec, stats, fidelities })
}

/// Per-trial fidelities of Haar-random inputs through a fabricated `F_d`
/// against the ideal circuit's output.
pub fn qft_fidelities(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Vec<f64>> {
    require_kind(spec, ExperimentKind::Qft)?;
    let ideal = qft(spec.modes)?;
    let d = spec.modes;
    run_indexed(spec.trials, workers, |t| {
        let mut rng = trial_rng(spec.seed, t);
        let input = haar_state(d, &mut rng);
        let fabricated = realize_unchecked(&ideal, &spec.noise, &mut rng);
        let mut expected = input.clone();
        apply_in_place(&ideal, &mut expected);
        let mut actual = input;
        apply_in_place(&fabricated, &mut actual);
        fidelity(&expected, &actual, spec.convention).expect("equal dimensions")
    })
}

pub fn run_qft_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentResult> {
    finish(spec, qft_fidelities(spec, workers)?)
}

/// Per-trial fidelities of the fabricated search circuit, fed a photon in
/// mode 1, against the lossless circuit's output for the same marked item.
pub fn grover_fidelities(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Vec<f64>> {
    require_kind(spec, ExperimentKind::Grover)?;
    let d = spec.modes;
    let circuits: Vec<Circuit> = (1..=d).map(|s| grover_search(d, s)).collect::<Result<_>>()?;
    let mut e1 = vec![Complex64::new(0.0, 0.0); d];
    e1[0] = Complex64::new(1.0, 0.0);
    let ideal_outputs: Vec<AmplitudeVector> = circuits
        .iter()
        .map(|c| {
            let mut out = e1.clone();
            apply_in_place(c, &mut out);
            out
        })
        .collect();
    run_indexed(spec.trials, workers, |t| {
        let mut rng = trial_rng(spec.seed, t);
        let s = rng.random_range(0..d);
        let fabricated = realize_unchecked(&circuits[s], &spec.noise, &mut rng);
        let mut actual = e1.clone();
        apply_in_place(&fabricated, &mut actual);
        fidelity(&ideal_outputs[s], &actual, spec.convention).expect("equal dimensions")
    })
}

pub fn run_grover_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentResult> {
    finish(spec, grover_fidelities(spec, workers)?)
}

pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentResult> {
    match spec.kind {
        ExperimentKind::Qft => run_qft_experiment(spec, workers),
        ExperimentKind::Grover => run_grover_experiment(spec, workers),
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `(n − 1)·q`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

const MAX_BINS: usize = 100_000;

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Freedman–Diaconis histogram: width `2·IQR·n^{−1/3}`, `⌈(max − min)/w⌉`
/// bins starting at the minimum, the maximum falling in the last bin.
///
/// With zero IQR or zero range everything goes into one bin (of width
/// `max − min`, or 1 when all values coincide).
pub fn fd_histogram(values: &[f64]) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sorted = sorted_copy(values);
    Ok(fd_histogram_sorted(&sorted, values))
}

fn fd_histogram_sorted(sorted: &[f64], values: &[f64]) -> Vec<HistogramBin> {
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    let range = max - min;
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    if range <= 0.0 || iqr <= 0.0 {
        let width = if range > 0.0 { range } else { 1.0 };
        return vec![HistogramBin { lower: min, width, count: n }];
    }
    let mut width = 2.0 * iqr / (n as f64).cbrt();
    let mut bins = (range / width).ceil() as usize;
    if bins > MAX_BINS {
        bins = MAX_BINS;
        width = range / bins as f64;
    }
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - min) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin { lower: min + k as f64 * width, width, count })
        .collect()
}

/// Mean, population std, median and Freedman–Diaconis histogram.
pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sorted = sorted_copy(values);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) { 0.5 * (sorted[mid - 1] + sorted[mid]) } else { sorted[mid] };
    let histogram = fd_histogram_sorted(&sorted, values);
    Ok(SummaryStats { mean, std: var.sqrt(), median, histogram })
}
