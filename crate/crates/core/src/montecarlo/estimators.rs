//! Mutual-information estimators over [`ChannelSamples`].
//!
//! Registered names: `plugin` (Gaussian covariance fit) and `binned`
//! (discrete MI between input index and output cell, 16 bins per axis).

use std::collections::{BTreeMap, HashMap};

use once_cell::sync::Lazy;

use super::ChannelSamples;
use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Number of contiguous chunks used for standard errors.
pub const STDERR_SPLITS: usize = 10;
/// Half-width of the binning box in per-axis standard deviations.
pub const CLIP_SIGMAS: f64 = 5.0;

pub trait MiEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Estimate in nats.
    fn estimate(&self, samples: &ChannelSamples) -> Result<f64>;
}

type Constructor = fn() -> Box<dyn MiEstimator>;

static REGISTRY: Lazy<BTreeMap<&'static str, Constructor>> = Lazy::new(|| {
    let mut m: BTreeMap<&'static str, Constructor> = BTreeMap::new();
    m.insert("plugin", || Box::new(PluginEstimator));
    m.insert("binned", || Box::new(BinnedEstimator::new(16)));
    m
});

pub fn estimator_names() -> Vec<&'static str> {
    REGISTRY.keys().copied().collect()
}

pub fn build_estimator(name: &str) -> Result<Box<dyn MiEstimator>> {
    REGISTRY.get(name).map(|ctor| ctor()).ok_or_else(|| {
        Error::InvalidInput(format!(
            "unknown estimator '{name}' (available: {})",
            estimator_names().join(", ")
        ))
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PluginEstimator;

impl MiEstimator for PluginEstimator {
    fn name(&self) -> &'static str {
        "plugin"
    }

    fn estimate(&self, samples: &ChannelSamples) -> Result<f64> {
        mi_plugin(samples)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BinnedEstimator {
    pub bins_per_axis: usize,
}

impl BinnedEstimator {
    pub fn new(bins_per_axis: usize) -> Self {
        Self { bins_per_axis }
    }
}

impl MiEstimator for BinnedEstimator {
    fn name(&self) -> &'static str {
        "binned"
    }

    fn estimate(&self, samples: &ChannelSamples) -> Result<f64> {
        mi_binned(samples, self.bins_per_axis)
    }
}

/// `(1/2) log(det Cov(outputs) / det Cov(outputs - K^{-1} inputs))`.
pub fn mi_plugin(samples: &ChannelSamples) -> Result<f64> {
    let dim = samples.dim();
    if samples.len() < dim + 2 {
        return invalid(format!(
            "plug-in estimator needs at least {} samples, got {}",
            dim + 2,
            samples.len()
        ));
    }
    let out = linalg::sample_covariance(&samples.outputs)?;
    let noise = linalg::sample_covariance(&samples.residuals())?;
    let singular = |_| Error::Numerical("singular sample covariance".into());
    let logdet_out = linalg::logdet_pd(&out).map_err(singular)?;
    let logdet_noise = linalg::logdet_pd(&noise).map_err(singular)?;
    Ok(0.5 * (logdet_out - logdet_noise))
}

/// Discrete mutual information between the input index and the output
/// cell on a regular grid of `bins_per_axis` cells per coordinate.
///
/// The grid spans the sample mean +/- 5 standard deviations per axis and
/// outliers land in the edge cells. Grids whose counts divide each other
/// are nested, so the estimate never decreases under such refinement.
pub fn mi_binned(samples: &ChannelSamples, bins_per_axis: usize) -> Result<f64> {
    let index = samples
        .input_index
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("binned estimator needs discrete-ensemble samples".into()))?;
    if bins_per_axis < 2 {
        return invalid("bins_per_axis must be at least 2");
    }
    if samples.is_empty() {
        return invalid("no samples");
    }
    let dim = samples.dim();
    let cells = (bins_per_axis as u128)
        .checked_pow(dim as u32)
        .filter(|&c| c <= u64::MAX as u128);
    if cells.is_none() {
        return invalid("too many bins for the output dimension");
    }
    let n = samples.len() as f64;
    let mean = linalg::sample_mean(&samples.outputs);
    let mut lower = vec![0.0; dim];
    let mut width = vec![1.0; dim];
    for a in 0..dim {
        let var = samples
            .outputs
            .iter()
            .map(|w| (w[a] - mean[a]).powi(2))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        let half = if sd > 0.0 { CLIP_SIGMAS * sd } else { 0.5 };
        lower[a] = mean[a] - half;
        width[a] = 2.0 * half / bins_per_axis as f64;
    }

    let mut joint: HashMap<(usize, u64), u64> = HashMap::new();
    let mut input_counts: HashMap<usize, u64> = HashMap::new();
    let mut cell_counts: HashMap<u64, u64> = HashMap::new();
    for (w, &i) in samples.outputs.iter().zip(index) {
        let mut cell = 0u64;
        for a in 0..dim {
            let b = ((w[a] - lower[a]) / width[a]).floor();
            let b = b.clamp(0.0, (bins_per_axis - 1) as f64) as u64;
            cell = cell * bins_per_axis as u64 + b;
        }
        *joint.entry((i, cell)).or_default() += 1;
        *input_counts.entry(i).or_default() += 1;
        *cell_counts.entry(cell).or_default() += 1;
    }
    if input_counts.len() < 2 {
        return Ok(0.0);
    }
    // Deterministic summation order.
    let mut terms: Vec<((usize, u64), u64)> = joint.into_iter().collect();
    terms.sort_unstable_by_key(|&(k, _)| k);
    let mi = terms
        .iter()
        .map(|&((i, cell), c)| {
            let c = c as f64;
            c / n * (c * n / (input_counts[&i] as f64 * cell_counts[&cell] as f64)).ln()
        })
        .sum::<f64>();
    Ok(mi.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiEstimate {
    pub value: f64,
    /// Standard error of `value`, from the spread of chunk estimates.
    pub stderr: f64,
    pub chunk_values: Vec<f64>,
}

/// Full-sample estimate plus a standard error from `STDERR_SPLITS`
/// contiguous chunks: `sd(chunk estimates) / sqrt(splits)`.
pub fn estimate_with_stderr(estimator: &dyn MiEstimator, samples: &ChannelSamples) -> Result<MiEstimate> {
    let value = estimator.estimate(samples)?;
    let n = samples.len();
    let k = STDERR_SPLITS;
    if n < k * (samples.dim() + 2) {
        return invalid(format!(
            "need at least {} samples for split standard errors",
            k * (samples.dim() + 2)
        ));
    }
    let chunk_values = (0..k)
        .map(|c| estimator.estimate(&samples.slice(c * n / k, (c + 1) * n / k)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = chunk_values.iter().sum::<f64>() / k as f64;
    let var = chunk_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(MiEstimate {
        value,
        stderr: (var / k as f64).sqrt(),
        chunk_values,
    })
}
