use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RocketError};
use crate::tensor::Dataset3D;

pub const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];

/// One random dilated convolution kernel over a subset of channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub length: usize,
    /// Sorted, distinct channel indices.
    pub channels: Vec<usize>,
    /// `channels.len() x length`, channel-major. Centred over the whole kernel.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: usize,
}

impl Kernel {
    pub fn channel_weights(&self, slot: usize) -> &[f64] {
        &self.weights[slot * self.length..(slot + 1) * self.length]
    }

    /// Number of convolution outputs on a series of `timesteps` values.
    pub fn output_len(&self, timesteps: usize) -> usize {
        timesteps + 2 * self.padding - (self.length - 1) * self.dilation
    }

    /// Convolution outputs for one sample (`channels x timesteps`, row-major),
    /// zero-padded, plus bias.
    pub fn convolve(&self, sample: &[f64], timesteps: usize, out: &mut Vec<f64>) {
        let out_len = self.output_len(timesteps);
        out.clear();
        out.resize(out_len, self.bias);
        for (slot, &ch) in self.channels.iter().enumerate() {
            let series = &sample[ch * timesteps..(ch + 1) * timesteps];
            for (j, &w) in self.channel_weights(slot).iter().enumerate() {
                // input index of output i is i + shift - padding
                let shift = j * self.dilation;
                let first = self.padding.saturating_sub(shift);
                let last = (timesteps + self.padding).saturating_sub(shift).min(out_len);
                if first >= last {
                    continue;
                }
                let src = &series[first + shift - self.padding..last + shift - self.padding];
                for (o, &x) in out[first..last].iter_mut().zip(src) {
                    *o += w * x;
                }
            }
        }
    }

    /// `(ppv, max)` for one sample.
    pub fn features(&self, sample: &[f64], timesteps: usize, scratch: &mut Vec<f64>) -> (f64, f64) {
        self.convolve(sample, timesteps, scratch);
        let positive = scratch.iter().filter(|&&v| v > 0.0).count();
        let max = scratch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (positive as f64 / scratch.len() as f64, max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBank {
    pub kernels: Vec<Kernel>,
    pub seed: u64,
    pub fit_channels: usize,
    pub fit_timesteps: usize,
}

impl KernelBank {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// Draws `count` kernels for data with `channels x timesteps` shape.
pub fn generate_kernels(
    seed: u64,
    channels: usize,
    timesteps: usize,
    count: usize,
) -> Result<KernelBank, RocketError> {
    if timesteps < 2 {
        return Err(RocketError::SeriesTooShort(timesteps));
    }
    if channels == 0 {
        return Err(RocketError::NoChannels);
    }
    if count == 0 {
        return Err(RocketError::NoKernels);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bias_dist = Uniform::new(-1.0, 1.0).expect("valid range");
    let max_subset_exp = ((channels + 1) as f64).log2();

    let kernels = (0..count)
        .map(|_| {
            let length = KERNEL_LENGTHS[rng.random_range(0..KERNEL_LENGTHS.len())].min(timesteps);

            let u: f64 = rng.random_range(0.0..max_subset_exp);
            let subset = (u.exp2().floor() as usize).clamp(1, channels);
            let mut picked = index::sample(&mut rng, channels, subset).into_vec();
            picked.sort_unstable();

            let mut weights: Vec<f64> =
                (0..subset * length).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mean = weights.iter().sum::<f64>() / weights.len() as f64;
            weights.iter_mut().for_each(|w| *w -= mean);

            let bias = bias_dist.sample(&mut rng);

            let dilation = if length > 1 && timesteps > length {
                let max_exp = ((timesteps - 1) as f64 / (length - 1) as f64).log2();
                let a: f64 = rng.random_range(0.0..max_exp);
                (a.exp2().floor() as usize).max(1)
            } else {
                1
            };
            let padding = if rng.random_bool(0.5) { (length - 1) * dilation / 2 } else { 0 };

            Kernel { length, channels: picked, weights, bias, dilation, padding }
        })
        .collect();

    Ok(KernelBank { kernels, seed, fit_channels: channels, fit_timesteps: timesteps })
}

/// PPV and MAX features for every sample; `N x 2k`, kernel-major
/// `(ppv, max)` pairs.
pub fn featurize(data: &Dataset3D, bank: &KernelBank) -> Result<FeatureMatrix, RocketError> {
    let (n, c, t) = data.shape();
    if c != bank.fit_channels || t != bank.fit_timesteps {
        return Err(RocketError::ShapeMismatch {
            expected: (bank.fit_channels, bank.fit_timesteps),
            actual: (c, t),
        });
    }
    let cols = 2 * bank.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |scratch, s| {
            let sample = data.sample(s);
            let mut row = Vec::with_capacity(cols);
            for kernel in &bank.kernels {
                let (ppv, max) = kernel.features(sample, t, scratch);
                row.push(ppv);
                row.push(max);
            }
            row
        })
        .collect();
    Ok(FeatureMatrix::from_rows(n, cols, rows.concat()))
}
