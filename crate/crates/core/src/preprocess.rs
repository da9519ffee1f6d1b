//! Correlation-filter pixel selection and Z-score standardization.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::{AngleChannel, GRID_CELLS};
use crate::regress::{train_eval_trial, PipelineConfig};
use crate::scalar::{mean, Real};
use crate::trial::TrialDataset;

/// Pearson product-moment correlation.
///
/// A sequence with zero variance has no defined correlation; it is reported as
/// `0` so that never-loaded pixels drop out of the filter quietly.
pub fn pearson_r<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooShort { len: x.len(), min: 2 });
    }
    if is_constant(x) || is_constant(y) {
        return Ok(T::zero());
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Ok(T::zero());
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

fn is_constant<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

/// Pixels retained by the correlation filter, shared by all four angle models.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSelection<T = f64> {
    indices: Vec<usize>,
    threshold: T,
}

impl<T: Real> PixelSelection<T> {
    /// Wraps an explicit index list; it must be strictly increasing, in range and nonempty.
    pub fn new(indices: Vec<usize>, threshold: T) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySelection { threshold: threshold.to_f64_lossy() });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("selection indices must be strictly increasing".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= GRID_CELLS) {
            return Err(Error::InvalidArgument(format!("pixel index {bad} out of range")));
        }
        Ok(Self { indices, threshold })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Largest absolute correlation of every pixel with any of the four angles,
/// computed over `range`.
///
/// Equivalent to calling [`pearson_r`] per pixel and channel, but sweeps the
/// frames contiguously (two passes: means, then centred cross-products).
pub fn pixel_correlations<T: Real>(trial: &TrialDataset<T>, range: Range<usize>) -> Result<Vec<T>> {
    check_range(trial, &range)?;
    let frames = &trial.frames[range.clone()];
    let angles: Vec<Vec<T>> =
        AngleChannel::ALL.iter().map(|&ch| trial.angle_series(ch)[range.clone()].to_vec()).collect();
    let centred: Vec<Option<Vec<T>>> = angles
        .iter()
        .map(|a| {
            if is_constant(a) {
                return None;
            }
            let m = mean(a);
            Some(a.iter().map(|&v| v - m).collect())
        })
        .collect();
    let angle_ss: Vec<T> =
        centred.iter().map(|c| c.as_ref().map_or(T::zero(), |c| c.iter().map(|&v| v * v).sum())).collect();

    let n = T::from_usize_lossy(frames.len());
    let mut means = vec![T::zero(); GRID_CELLS];
    let mut constant = vec![true; GRID_CELLS];
    for f in frames {
        for ((m, k), (&v, &v0)) in means.iter_mut().zip(constant.iter_mut()).zip(f.values.iter().zip(&frames[0].values)) {
            *m += v;
            *k &= v == v0;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);

    let mut sxx = vec![T::zero(); GRID_CELLS];
    let mut sxy = vec![[T::zero(); 4]; GRID_CELLS];
    for (k, f) in frames.iter().enumerate() {
        let da: [T; 4] = std::array::from_fn(|c| centred[c].as_ref().map_or(T::zero(), |v| v[k]));
        for i in 0..GRID_CELLS {
            let dx = f.values[i] - means[i];
            sxx[i] += dx * dx;
            for c in 0..4 {
                sxy[i][c] += dx * da[c];
            }
        }
    }
    Ok((0..GRID_CELLS)
        .map(|i| {
            if constant[i] || !(sxx[i] > T::zero()) {
                return T::zero();
            }
            (0..4)
                .filter(|&c| angle_ss[c] > T::zero())
                .map(|c| (sxy[i][c] / (sxx[i] * angle_ss[c]).sqrt()).abs().min(T::one()))
                .fold(T::zero(), T::max)
        })
        .collect())
}

fn check_range<T: Real>(trial: &TrialDataset<T>, range: &Range<usize>) -> Result<()> {
    if range.end > trial.len() || range.start >= range.end {
        return Err(Error::InvalidArgument(format!(
            "training range {}..{} invalid for trial of {} samples",
            range.start,
            range.end,
            trial.len()
        )));
    }
    if range.len() < 2 {
        return Err(Error::TooShort { len: range.len(), min: 2 });
    }
    Ok(())
}

/// Selects every pixel whose absolute correlation with at least one angle
/// channel exceeds `threshold` over the training range.
pub fn select_pixels<T: Real>(trial: &TrialDataset<T>, training_range: Range<usize>, threshold: T) -> Result<PixelSelection<T>> {
    if !(threshold >= T::zero() && threshold < T::one()) {
        return Err(Error::InvalidArgument(format!("threshold must lie in [0, 1), got {threshold}")));
    }
    let corr = pixel_correlations(trial, training_range)?;
    select_from_correlations(&corr, threshold)
}

/// Applies the threshold to precomputed correlations.
pub fn select_from_correlations<T: Real>(corr: &[T], threshold: T) -> Result<PixelSelection<T>> {
    let indices: Vec<usize> = corr.iter().enumerate().filter(|(_, &r)| r > threshold).map(|(i, _)| i).collect();
    PixelSelection::new(indices, threshold)
}

/// Per-channel standardization parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreParams<T = f64> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> ZScoreParams<T> {
    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

/// Fits mean and population standard deviation for each channel.
pub fn zscore_fit<T: Real, S: AsRef<[T]>>(series: &[S]) -> Result<ZScoreParams<T>> {
    let mut means = Vec::with_capacity(series.len());
    let mut stds = Vec::with_capacity(series.len());
    for (c, s) in series.iter().enumerate() {
        let s = s.as_ref();
        if s.len() < 2 {
            return Err(Error::TooShort { len: s.len(), min: 2 });
        }
        let m = mean(s);
        let var = s.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(s.len());
        let sd = var.sqrt();
        if is_constant(s) || !(sd > T::zero()) {
            return Err(Error::ZeroVariance { channel: c });
        }
        means.push(m);
        stds.push(sd);
    }
    Ok(ZScoreParams { mean: means, std: stds })
}

/// `(v - mean) / std`, channel by channel.
pub fn zscore_apply<T: Real, S: AsRef<[T]>>(series: &[S], params: &ZScoreParams<T>) -> Result<Vec<Vec<T>>> {
    map_channels(series, params, |v, m, s| (v - m) / s)
}

/// `v * std + mean`, channel by channel.
pub fn zscore_invert<T: Real, S: AsRef<[T]>>(series: &[S], params: &ZScoreParams<T>) -> Result<Vec<Vec<T>>> {
    map_channels(series, params, |v, m, s| v * s + m)
}

fn map_channels<T: Real, S: AsRef<[T]>>(
    series: &[S],
    params: &ZScoreParams<T>,
    f: impl Fn(T, T, T) -> T,
) -> Result<Vec<Vec<T>>> {
    if series.len() != params.channels() {
        return Err(Error::ChannelMismatch { expected: params.channels(), got: series.len() });
    }
    Ok(series
        .iter()
        .enumerate()
        .map(|(c, s)| s.as_ref().iter().map(|&v| f(v, params.mean[c], params.std[c])).collect())
        .collect())
}

/// Outcome of evaluating one threshold candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScore<T = f64> {
    pub threshold: T,
    /// Mean validation R² over every trial and channel, `None` when skipped.
    pub mean_r2: Option<T>,
}

/// Runs the full train/evaluate pipeline for each candidate threshold and
/// returns the one with the highest mean validation R² (ties go to the smaller
/// threshold), together with the per-candidate scores.
///
/// A candidate that leaves any trial with an empty selection is skipped.
pub fn grid_search_threshold<T: Real>(
    trials: &[TrialDataset<T>],
    candidates: &[T],
    config: &PipelineConfig<T>,
) -> Result<(T, Vec<ThresholdScore<T>>)> {
    if trials.is_empty() {
        return Err(Error::InvalidArgument("no trials".into()));
    }
    let per_trial = trials.iter().map(|t| threshold_r2_sums(t, candidates, config)).collect::<Result<Vec<_>>>()?;
    pick_threshold(candidates, &per_trial)
}

/// Per-candidate sum of validation R² over the four channels of one trial,
/// with the number of terms; `None` where the candidate empties the selection.
pub fn threshold_r2_sums<T: Real>(
    trial: &TrialDataset<T>,
    candidates: &[T],
    config: &PipelineConfig<T>,
) -> Result<Vec<Option<(T, usize)>>> {
    candidates
        .iter()
        .map(|&threshold| {
            let cfg = PipelineConfig { threshold, ..*config };
            let fit = match train_eval_trial(trial, &cfg) {
                Ok(fit) => fit,
                Err(Error::EmptySelection { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut acc = T::zero();
            for ch in &fit.channels {
                acc += ch.as_ref().map_err(Clone::clone)?.1.r2;
            }
            Ok(Some((acc, fit.channels.len())))
        })
        .collect()
}

/// Pools per-trial sums from [`threshold_r2_sums`] into mean R² per candidate
/// and picks the best one.
pub fn pick_threshold<T: Real>(candidates: &[T], per_trial: &[Vec<Option<(T, usize)>>]) -> Result<(T, Vec<ThresholdScore<T>>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no threshold candidates".into()));
    }
    let scores: Vec<ThresholdScore<T>> = candidates
        .iter()
        .enumerate()
        .map(|(k, &threshold)| {
            let mut acc = T::zero();
            let mut n = 0usize;
            for sums in per_trial {
                match sums.get(k).copied().flatten() {
                    Some((s, m)) => {
                        acc += s;
                        n += m;
                    }
                    None => return ThresholdScore { threshold, mean_r2: None },
                }
            }
            ThresholdScore { threshold, mean_r2: (n > 0).then(|| acc / T::from_usize_lossy(n)) }
        })
        .collect();
    let best = scores
        .iter()
        .filter_map(|s| s.mean_r2.map(|r2| (s.threshold, r2)))
        .fold(None::<(T, T)>, |best, (t, r2)| match best {
            Some((bt, br)) if br > r2 || (br == r2 && bt <= t) => Some((bt, br)),
            _ => Some((t, r2)),
        })
        .ok_or_else(|| Error::EmptySelection { threshold: candidates[0].to_f64_lossy() })?;
    Ok((best.0, scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basic_cases() {
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // Direct evaluation: dx = (-1,0,1), dy = (-4/3,-1/3,5/3);
        // sxy = 3, sxx = 2, syy = 42/9  =>  r = 3 / sqrt(2 * 42/9) = 3 / sqrt(28/3).
        let r: f64 = pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.981_980_506_061_965_6).abs() < 1e-12);
        assert!((r - 3.0 / (28.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pearson_degenerate_and_errors() {
        assert_eq!(pearson_r(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(pearson_r(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(pearson_r(&[1.0], &[1.0]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn pearson_single_precision() {
        let r = pearson_r(&[1.0f32, 2.0, 3.0], &[1.0f32, 2.0, 4.0]).unwrap();
        assert!((r - 0.981_980_5).abs() < 1e-6);
    }

    #[test]
    fn zscore_hand_values() {
        let p = zscore_fit(&[vec![1.0, 2.0, 3.0], vec![10.0, 0.0, 5.0]]).unwrap();
        assert_eq!(p.mean[0], 2.0);
        assert!((p.std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(p.mean[1], 5.0);
        assert!((p.std[1] - (50.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(matches!(zscore_fit(&[vec![1.0, 2.0], vec![5.0, 5.0]]), Err(Error::ZeroVariance { channel: 1 })));
        assert!(matches!(zscore_fit(&[vec![1.0]]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn zscore_zero_maps_to_mean_and_channel_check() {
        let p = ZScoreParams { mean: vec![3.0, -1.0], std: vec![2.0, 0.5] };
        assert_eq!(zscore_invert(&[vec![0.0], vec![0.0]], &p).unwrap(), vec![vec![3.0], vec![-1.0]]);
        assert!(matches!(zscore_apply(&[vec![0.0]], &p), Err(Error::ChannelMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn selection_validation() {
        assert!(PixelSelection::new(vec![3, 2], 0.1).is_err());
        assert!(PixelSelection::new(vec![1, 1], 0.1).is_err());
        assert!(PixelSelection::new(vec![GRID_CELLS], 0.1).is_err());
        assert!(matches!(PixelSelection::<f64>::new(vec![], 0.1), Err(Error::EmptySelection { .. })));
        assert_eq!(select_from_correlations(&[0.1, 0.5, 0.15, 0.16], 0.15).unwrap().indices(), &[1, 3]);
    }
}
