//! Pressure frames, angle samples and the uniformly sampled trial that ties
//! them together.

use crate::error::{Error, Result};
use crate::grid::{AngleChannel, Condition, GRID_CELLS};
use crate::scalar::Real;

/// Default resampling period of the pipeline.
pub const DEFAULT_PERIOD_MS: i64 = 20;

/// One timestamped 48×48 pressure image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureFrame<T = f64> {
    pub t_ms: i64,
    pub values: Vec<T>,
}

impl<T: Real> PressureFrame<T> {
    pub fn new(t_ms: i64, values: Vec<T>) -> Result<Self> {
        let frame = Self { t_ms, values };
        frame.check(0)?;
        Ok(frame)
    }

    pub fn zeros(t_ms: i64) -> Self {
        Self { t_ms, values: vec![T::zero(); GRID_CELLS] }
    }

    /// Sum over all cells.
    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    fn check(&self, frame: usize) -> Result<()> {
        if self.values.len() != GRID_CELLS {
            return Err(Error::BadWidth { width: self.values.len(), expected: GRID_CELLS });
        }
        for (cell, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "pressure" });
            }
            if v < T::zero() {
                return Err(Error::NegativePressure { frame, cell, value: v.to_f64_lossy() });
            }
        }
        Ok(())
    }
}

/// The four sagittal-plane angles at one instant, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSample<T = f64> {
    pub t_ms: i64,
    pub ankle_deg: T,
    pub knee_deg: T,
    pub hip_deg: T,
    pub upper_deg: T,
}

impl<T: Real> AngleSample<T> {
    pub fn from_array(t_ms: i64, a: [T; 4]) -> Self {
        Self { t_ms, ankle_deg: a[0], knee_deg: a[1], hip_deg: a[2], upper_deg: a[3] }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.ankle_deg, self.knee_deg, self.hip_deg, self.upper_deg]
    }

    pub fn get(&self, channel: AngleChannel) -> T {
        self.to_array()[channel.index()]
    }
}

/// Time-aligned, uniformly sampled pressure and angle streams of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset<T = f64> {
    pub trial_id: String,
    pub participant_id: String,
    pub condition: Condition,
    pub period_ms: i64,
    pub frames: Vec<PressureFrame<T>>,
    pub angles: Vec<AngleSample<T>>,
}

impl<T: Real> TrialDataset<T> {
    /// Assembles and validates a trial.
    pub fn new(
        trial_id: impl Into<String>,
        participant_id: impl Into<String>,
        condition: Condition,
        period_ms: i64,
        frames: Vec<PressureFrame<T>>,
        angles: Vec<AngleSample<T>>,
    ) -> Result<Self> {
        validate_trial(Self {
            trial_id: trial_id.into(),
            participant_id: participant_id.into(),
            condition,
            period_ms,
            frames,
            angles,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Angle series of one channel.
    pub fn angle_series(&self, channel: AngleChannel) -> Vec<T> {
        self.angles.iter().map(|a| a.get(channel)).collect()
    }

    /// Time series of one pixel.
    pub fn pixel_series(&self, index: usize) -> Vec<T> {
        self.frames.iter().map(|f| f.values[index]).collect()
    }
}

/// Checks every structural invariant of a trial and hands it back unchanged.
pub fn validate_trial<T: Real>(trial: TrialDataset<T>) -> Result<TrialDataset<T>> {
    if trial.period_ms <= 0 {
        return Err(Error::InvalidArgument(format!("period_ms must be positive, got {}", trial.period_ms)));
    }
    if trial.frames.len() != trial.angles.len() {
        return Err(Error::LengthMismatch { left: trial.frames.len(), right: trial.angles.len() });
    }
    if trial.frames.len() < 2 {
        return Err(Error::TooShort { len: trial.frames.len(), min: 2 });
    }
    for (k, (f, a)) in trial.frames.iter().zip(&trial.angles).enumerate() {
        if f.t_ms != a.t_ms {
            return Err(Error::NonUniformSampling { index: k, gap_ms: a.t_ms - f.t_ms, period_ms: 0 });
        }
        if k > 0 {
            let gap = f.t_ms - trial.frames[k - 1].t_ms;
            if gap != trial.period_ms {
                return Err(Error::NonUniformSampling { index: k, gap_ms: gap, period_ms: trial.period_ms });
            }
        }
        f.check(k)?;
        if a.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "angle" });
        }
    }
    Ok(trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(times: &[i64]) -> TrialDataset<f64> {
        TrialDataset {
            trial_id: "t".into(),
            participant_id: "p".into(),
            condition: Condition::Nothing,
            period_ms: 20,
            frames: times.iter().map(|&t| PressureFrame::zeros(t)).collect(),
            angles: times.iter().map(|&t| AngleSample::from_array(t, [1.0, 2.0, 3.0, 4.0])).collect(),
        }
    }

    #[test]
    fn accepts_uniform_trial() {
        let times: Vec<i64> = (0..1500).map(|k| k * 20).collect();
        let t = trial(&times);
        let v = validate_trial(t.clone()).unwrap();
        assert_eq!(v, t);
        // idempotent
        assert_eq!(validate_trial(v.clone()).unwrap(), v);
    }

    #[test]
    fn rejects_irregular_spacing() {
        let err = validate_trial(trial(&[20, 40, 61])).unwrap_err();
        assert!(matches!(err, Error::NonUniformSampling { index: 2, gap_ms: 21, .. }));
    }

    #[test]
    fn rejects_negative_pressure() {
        let mut t = trial(&[0, 20, 40]);
        t.frames[1].values[7] = -0.1;
        assert!(matches!(validate_trial(t).unwrap_err(), Error::NegativePressure { frame: 1, cell: 7, .. }));
    }

    #[test]
    fn rejects_length_mismatch_and_short() {
        let mut t = trial(&[0, 20, 40]);
        t.angles.pop();
        assert!(matches!(validate_trial(t).unwrap_err(), Error::LengthMismatch { .. }));
        assert!(matches!(validate_trial(trial(&[0])).unwrap_err(), Error::TooShort { .. }));
    }

    #[test]
    fn rejects_misaligned_streams_and_bad_width() {
        let mut t = trial(&[0, 20, 40]);
        t.angles[1].t_ms = 21;
        assert!(matches!(validate_trial(t).unwrap_err(), Error::NonUniformSampling { .. }));
        let mut t = trial(&[0, 20]);
        t.frames[0].values.pop();
        assert!(matches!(validate_trial(t).unwrap_err(), Error::BadWidth { .. }));
    }
}
