//! Linear-interpolation regridding of irregularly sampled streams onto a
//! uniform millisecond grid.

use crate::error::{Error, Result};
use crate::grid::{Condition, GRID_CELLS};
use crate::scalar::Real;
use crate::trial::{validate_trial, AngleSample, PressureFrame, TrialDataset};

/// Irregularly sampled multichannel stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries<T = f64> {
    times: Vec<f64>,
    values: Vec<Vec<T>>,
    width: usize,
}

impl<T: Real> RawSeries<T> {
    /// Builds a series, checking strictly increasing times and a common width.
    pub fn new(times: Vec<f64>, values: Vec<Vec<T>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch { left: times.len(), right: values.len() });
        }
        if times.is_empty() {
            return Err(Error::EmptySeries);
        }
        let width = values[0].len();
        for (k, v) in values.iter().enumerate() {
            if v.len() != width {
                return Err(Error::BadWidth { width: v.len(), expected: width });
            }
            if !times[k].is_finite() {
                return Err(Error::NonFinite { what: "timestamp" });
            }
            if k > 0 && times[k] <= times[k - 1] {
                return Err(Error::NonMonotonic { index: k });
            }
        }
        Ok(Self { times, values, width })
    }

    pub fn from_pairs(samples: impl IntoIterator<Item = (f64, Vec<T>)>) -> Result<Self> {
        let (times, values) = samples.into_iter().unzip();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// Grid times `t_start, t_start + period, ...` up to and including `t_end`.
pub fn uniform_grid(t_start: f64, t_end: f64, period_ms: i64) -> Vec<f64> {
    let period = period_ms as f64;
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = t_start + k as f64 * period;
        if t > t_end {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

/// Resamples `series` onto the uniform grid spanning `[t_start, t_end]`.
///
/// Each output value is the linear interpolation between the two raw samples
/// that bracket the grid time. No extrapolation is performed.
pub fn resample_linear<T: Real>(
    series: &RawSeries<T>,
    period_ms: i64,
    t_start: f64,
    t_end: f64,
) -> Result<Vec<Vec<T>>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if period_ms <= 0 {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period_ms}")));
    }
    if t_end < t_start {
        return Err(Error::InvalidArgument(format!("empty grid span [{t_start}, {t_end}]")));
    }
    let (lo, hi) = (series.start(), series.end());
    for t in [t_start, t_end] {
        if t < lo || t > hi {
            return Err(Error::OutOfRange { t, start: lo, end: hi });
        }
    }
    let grid = uniform_grid(t_start, t_end, period_ms);
    let times = series.times();
    let mut out = Vec::with_capacity(grid.len());
    // Index of the left bracketing sample; grid is increasing so it only advances.
    let mut left = 0usize;
    for &t in &grid {
        while left + 1 < times.len() && times[left + 1] <= t {
            left += 1;
        }
        if times[left] == t || left + 1 == times.len() {
            out.push(series.values()[left].clone());
            continue;
        }
        let (t0, t1) = (times[left], times[left + 1]);
        let w = T::lit((t - t0) / (t1 - t0));
        let v0 = &series.values()[left];
        let v1 = &series.values()[left + 1];
        out.push(v0.iter().zip(v1).map(|(&a, &b)| lerp(a, b, w)).collect());
    }
    Ok(out)
}

#[inline]
fn lerp<T: Real>(a: T, b: T, w: T) -> T {
    let v = a + w * (b - a);
    // Rounding must never leave the bracket.
    v.max(a.min(b)).min(a.max(b))
}

/// Resamples a pressure stream and an angle stream onto a common uniform grid
/// and assembles a validated trial.
///
/// The grid starts at the later of the two stream starts (rounded up to an
/// integer millisecond) and stops at or before the earlier of the two ends.
pub fn align_streams<T: Real>(
    pressure: &RawSeries<T>,
    angles: &RawSeries<T>,
    period_ms: i64,
    condition: Condition,
    trial_id: &str,
    participant_id: &str,
) -> Result<TrialDataset<T>> {
    if pressure.is_empty() || angles.is_empty() {
        return Err(Error::EmptySeries);
    }
    if pressure.width() != GRID_CELLS {
        return Err(Error::BadWidth { width: pressure.width(), expected: GRID_CELLS });
    }
    if angles.width() != 4 {
        return Err(Error::BadWidth { width: angles.width(), expected: 4 });
    }
    let start = pressure.start().max(angles.start()).ceil();
    let end = pressure.end().min(angles.end());
    if start > end {
        return Err(Error::NoOverlap);
    }
    let p = resample_linear(pressure, period_ms, start, end)?;
    let a = resample_linear(angles, period_ms, start, end)?;
    let t0 = start as i64;
    let frames = p
        .into_iter()
        .enumerate()
        .map(|(k, values)| PressureFrame { t_ms: t0 + k as i64 * period_ms, values })
        .collect();
    let angles = a
        .into_iter()
        .enumerate()
        .map(|(k, v)| AngleSample::from_array(t0 + k as i64 * period_ms, [v[0], v[1], v[2], v[3]]))
        .collect();
    validate_trial(TrialDataset {
        trial_id: trial_id.to_string(),
        participant_id: participant_id.to_string(),
        condition,
        period_ms,
        frames,
        angles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_series(samples: &[(f64, f64)]) -> RawSeries<f64> {
        RawSeries::from_pairs(samples.iter().map(|&(t, v)| (t, vec![v]))).unwrap()
    }

    #[test]
    fn constant_signal() {
        let s = scalar_series(&[(0.0, 5.0), (7.0, 5.0), (31.0, 5.0)]);
        let out = resample_linear(&s, 20, 0.0, 20.0).unwrap();
        assert_eq!(out, vec![vec![5.0], vec![5.0]]);
    }

    #[test]
    fn midpoint_interpolation() {
        let s = scalar_series(&[(0.0, 0.0), (40.0, 4.0)]);
        let out = resample_linear(&s, 20, 20.0, 20.0).unwrap();
        assert_eq!(out, vec![vec![2.0]]);
    }

    #[test]
    fn ramp_at_120hz_is_exact() {
        let samples: Vec<(f64, f64)> =
            (0..=3600).map(|k| (k as f64 * 1000.0 / 120.0, 0.75 * k as f64 * 1000.0 / 120.0 * 1e-3 - 12.0)).collect();
        let s = scalar_series(&samples);
        let out = resample_linear(&s, 20, 0.0, 30000.0).unwrap();
        assert_eq!(out.len(), 1501);
        for (k, v) in out.iter().enumerate() {
            let t = k as f64 * 20.0;
            assert!((v[0] - (0.75 * t * 1e-3 - 12.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_extrapolation() {
        let s = scalar_series(&[(10.0, 0.0), (50.0, 1.0)]);
        assert!(matches!(resample_linear(&s, 20, 0.0, 40.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(resample_linear(&s, 20, 10.0, 60.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(resample_linear(&s, 0, 10.0, 50.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rejects_malformed_series() {
        assert!(matches!(RawSeries::<f64>::new(vec![], vec![]), Err(Error::EmptySeries)));
        assert!(matches!(
            RawSeries::new(vec![0.0, 0.0], vec![vec![1.0], vec![2.0]]),
            Err(Error::NonMonotonic { index: 1 })
        ));
        assert!(matches!(
            RawSeries::new(vec![0.0, 1.0], vec![vec![1.0], vec![2.0, 3.0]]),
            Err(Error::BadWidth { .. })
        ));
    }

    fn uniform_streams(t0: f64, t1: f64, step: f64) -> (RawSeries<f64>, RawSeries<f64>) {
        let n = ((t1 - t0) / step).round() as usize + 1;
        let times: Vec<f64> = (0..n).map(|k| t0 + k as f64 * step).collect();
        let p = times.iter().map(|&t| vec![t * 1e-3; GRID_CELLS]).collect();
        let a = times.iter().map(|&t| vec![t * 1e-2, 1.0, 2.0, -t * 1e-3]).collect();
        (RawSeries::new(times.clone(), p).unwrap(), RawSeries::new(times, a).unwrap())
    }

    #[test]
    fn align_uses_span_intersection() {
        let (p, _) = uniform_streams(0.0, 30000.0, 20.0);
        let (_, a) = uniform_streams(100.0, 30100.0, 20.0);
        let trial = align_streams(&p, &a, 20, Condition::Nothing, "t", "p").unwrap();
        assert_eq!(trial.frames[0].t_ms, 100);
        assert!(trial.frames.last().unwrap().t_ms <= 30000);
        assert_eq!(trial.len(), 1496);
    }

    #[test]
    fn align_is_fixed_point_on_uniform_input() {
        let (p, a) = uniform_streams(0.0, 2000.0, 20.0);
        let trial = align_streams(&p, &a, 20, Condition::Rubber, "t", "p").unwrap();
        assert_eq!(trial.len(), p.len());
        for (k, f) in trial.frames.iter().enumerate() {
            assert_eq!(f.t_ms as f64, p.times()[k]);
            assert_eq!(&f.values, &p.values()[k]);
            assert_eq!(trial.angles[k].to_array().to_vec(), a.values()[k]);
        }
    }

    #[test]
    fn align_rejects_disjoint_spans() {
        let (p, _) = uniform_streams(0.0, 1000.0, 20.0);
        let (_, a) = uniform_streams(2000.0, 3000.0, 20.0);
        assert_eq!(align_streams(&p, &a, 20, Condition::Nothing, "t", "p").unwrap_err(), Error::NoOverlap);
    }
}
