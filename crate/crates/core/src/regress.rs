//! Closed-form Ridge readout, prediction, error metrics and the per-trial
//! train/evaluate pipeline.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::{AngleChannel, Condition, GRID_CELLS};
use crate::linalg::{dot, Cholesky};
use crate::preprocess::{select_pixels, zscore_fit, PixelSelection, ZScoreParams};
use crate::scalar::{mean, Real};
use crate::trial::{PressureFrame, TrialDataset};

/// Standardized pressure matrix: one row per selected pixel, one column per
/// time step, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DesignMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{rows}×{cols} matrix needs {} entries, got {}", rows * cols, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "design matrix" });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds the matrix from rows given as slices.
    pub fn from_rows<S: AsRef<[T]>>(rows: &[S]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.as_ref().len() != cols {
                return Err(Error::DimensionMismatch("ragged design matrix rows".into()));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data)
    }

    /// Selected, standardized pixels of `frames`.
    pub fn from_frames(frames: &[PressureFrame<T>], selection: &PixelSelection<T>, z: &ZScoreParams<T>) -> Result<Self> {
        if z.channels() != selection.len() {
            return Err(Error::ChannelMismatch { expected: selection.len(), got: z.channels() });
        }
        for f in frames {
            if f.values.len() != GRID_CELLS {
                return Err(Error::BadWidth { width: f.values.len(), expected: GRID_CELLS });
            }
        }
        let cols = frames.len();
        let mut data = Vec::with_capacity(selection.len() * cols);
        for (row, &px) in selection.indices().iter().enumerate() {
            let (m, s) = (z.mean[row], z.std[row]);
            data.extend(frames.iter().map(|f| (f.values[px] - m) / s));
        }
        Self::new(selection.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `P x` for `x` of length `cols`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Pᵀ w` for `w` of length `rows`.
    pub fn tr_mul_vec(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (i, &wi) in w.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.row(i)) {
                *o += wi * p;
            }
        }
        out
    }

    /// `P Pᵀ + λ I`, row-major `rows × rows`.
    pub fn regularized_gram(&self, lambda: T) -> Vec<T> {
        let n = self.rows;
        let mut g = vec![T::zero(); n * n];
        for i in 0..n {
            let ri = self.row(i);
            for j in 0..=i {
                let v = dot(ri, self.row(j));
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
            g[i * n + i] += lambda;
        }
        g
    }
}

/// Factored normal equations for one design matrix and λ, reusable across
/// targets that share the matrix.
#[derive(Debug, Clone)]
pub struct RidgeSolver<'a, T> {
    design: &'a DesignMatrix<T>,
    factor: Cholesky<T>,
}

impl<'a, T: Real> RidgeSolver<'a, T> {
    pub fn new(design: &'a DesignMatrix<T>, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive and finite, got {lambda}")));
        }
        if design.rows() == 0 || design.cols() == 0 {
            return Err(Error::DimensionMismatch("empty design matrix".into()));
        }
        let factor = Cholesky::factor(&design.regularized_gram(lambda), design.rows())?;
        Ok(Self { design, factor })
    }

    /// Weights minimizing `Σ_k (θ_k − w·p_k)² + λ‖w‖²`.
    pub fn fit(&self, theta: &[T]) -> Result<Vec<T>> {
        if theta.len() != self.design.cols() {
            return Err(Error::DimensionMismatch(format!(
                "target has {} samples, design matrix has {} columns",
                theta.len(),
                self.design.cols()
            )));
        }
        let w = self.factor.solve(&self.design.mul_vec(theta))?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite ridge weights".into()));
        }
        Ok(w)
    }
}

/// Closed-form Ridge weights `w = θ Pᵀ (P Pᵀ + λI)⁻¹`, obtained by solving
/// `(P Pᵀ + λI) w = P θ` through a Cholesky factorization.
pub fn ridge_fit<T: Real>(design: &DesignMatrix<T>, theta: &[T], lambda: T) -> Result<Vec<T>> {
    RidgeSolver::new(design, lambda)?.fit(theta)
}

/// Residual sum of squares plus `λ Σ w²`; `ridge_fit` returns its exact minimizer.
pub fn ridge_loss<T: Real>(w: &[T], design: &DesignMatrix<T>, theta: &[T], lambda: T) -> Result<T> {
    if w.len() != design.rows() || theta.len() != design.cols() {
        return Err(Error::DimensionMismatch(format!(
            "weights {} / targets {} vs design {}×{}",
            w.len(),
            theta.len(),
            design.rows(),
            design.cols()
        )));
    }
    let fitted = design.tr_mul_vec(w);
    let rss: T = theta.iter().zip(&fitted).map(|(&y, &f)| (y - f) * (y - f)).sum();
    Ok(rss + lambda * w.iter().map(|&v| v * v).sum::<T>())
}

/// Trained readout for one angle channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel<T = f64> {
    pub channel: AngleChannel,
    pub lambda: T,
    pub selection: PixelSelection<T>,
    /// One channel per selected pixel, in selection order.
    pub pressure_z: ZScoreParams<T>,
    /// Single channel.
    pub angle_z: ZScoreParams<T>,
    pub weights: Vec<T>,
}

impl<T: Real> RidgeModel<T> {
    /// Checks the structural invariants of a model assembled from parts.
    pub fn validate(&self) -> Result<()> {
        let n = self.selection.len();
        if self.weights.len() != n {
            return Err(Error::DimensionMismatch(format!("{} weights for {} pixels", self.weights.len(), n)));
        }
        if self.pressure_z.channels() != n || self.pressure_z.std.len() != n {
            return Err(Error::ChannelMismatch { expected: n, got: self.pressure_z.channels() });
        }
        if self.angle_z.channels() != 1 || self.angle_z.std.len() != 1 {
            return Err(Error::ChannelMismatch { expected: 1, got: self.angle_z.channels() });
        }
        if !(self.lambda > T::zero()) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !finite(&self.weights) || !finite(&self.pressure_z.mean) || !finite(&self.angle_z.mean) {
            return Err(Error::NonFinite { what: "model" });
        }
        if self.pressure_z.std.iter().chain(&self.angle_z.std).any(|&s| !(s > T::zero()) || !s.is_finite()) {
            return Err(Error::InvalidArgument("standard deviations must be positive".into()));
        }
        Ok(())
    }
}

/// Angle estimates in degrees for each frame.
///
/// Selected pixels are standardized with the model's frozen parameters, the
/// linear readout is applied and the result is mapped back to degrees.
pub fn predict<T: Real>(model: &RidgeModel<T>, frames: &[PressureFrame<T>]) -> Result<Vec<T>> {
    let design = DesignMatrix::from_frames(frames, &model.selection, &model.pressure_z)?;
    let (m, s) = (model.angle_z.mean[0], model.angle_z.std[0]);
    Ok(design.tr_mul_vec(&model.weights).into_iter().map(|z| z * s + m).collect())
}

/// Root mean square error.
pub fn rmse<T: Real>(measured: &[T], estimated: &[T]) -> Result<T> {
    if measured.len() != estimated.len() {
        return Err(Error::LengthMismatch { left: measured.len(), right: estimated.len() });
    }
    if measured.is_empty() {
        return Err(Error::TooShort { len: 0, min: 1 });
    }
    let ss: T = measured.iter().zip(estimated).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((ss / T::from_usize_lossy(measured.len())).sqrt())
}

/// Coefficient of determination against the mean of `measured`.
pub fn r_squared<T: Real>(measured: &[T], estimated: &[T]) -> Result<T> {
    if measured.len() != estimated.len() {
        return Err(Error::LengthMismatch { left: measured.len(), right: estimated.len() });
    }
    if measured.len() < 2 {
        return Err(Error::TooShort { len: measured.len(), min: 2 });
    }
    let m = mean(measured);
    let ss_tot: T = measured.iter().map(|&y| (y - m) * (y - m)).sum();
    if !(ss_tot > T::zero()) || measured.iter().all(|&y| y == measured[0]) {
        return Err(Error::ZeroVariance { channel: 0 });
    }
    let ss_res: T = measured.iter().zip(estimated).map(|(&y, &f)| (y - f) * (y - f)).sum();
    Ok(T::one() - ss_res / ss_tot)
}

/// Validation metrics of one (trial, channel) pair, in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T = f64> {
    pub trial_id: String,
    pub participant_id: String,
    pub condition: Condition,
    pub channel: AngleChannel,
    pub rmse_deg: T,
    pub r2: T,
    pub n_validation: usize,
}

/// Hyperparameters of the per-trial pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig<T = f64> {
    pub lambda: T,
    pub threshold: T,
    /// Leading seconds discarded before splitting.
    pub warmup_s: T,
    /// Train:validation proportions of the post-warmup samples.
    pub train_parts: u32,
    pub validation_parts: u32,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(10.0),
            threshold: T::lit(0.15),
            warmup_s: T::lit(3.0),
            train_parts: 5,
            validation_parts: 1,
        }
    }
}

impl<T: Real> PipelineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.threshold >= T::zero() && self.threshold < T::one()) {
            return Err(Error::InvalidArgument(format!("threshold must lie in [0, 1), got {}", self.threshold)));
        }
        if !(self.warmup_s >= T::zero()) || !self.warmup_s.is_finite() {
            return Err(Error::InvalidArgument(format!("warmup must be non-negative, got {}", self.warmup_s)));
        }
        if self.train_parts == 0 || self.validation_parts == 0 {
            return Err(Error::InvalidArgument("split proportions must be positive".into()));
        }
        Ok(())
    }

    /// Training and validation index ranges for a trial of `len` samples.
    pub fn split(&self, len: usize, period_ms: i64) -> Result<(Range<usize>, Range<usize>)> {
        self.validate()?;
        let warmup = (self.warmup_s.to_f64_lossy() * 1000.0 / period_ms as f64).round() as usize;
        let usable = len.saturating_sub(warmup);
        let parts = (self.train_parts + self.validation_parts) as usize;
        let train = usable * self.train_parts as usize / parts;
        let val = usable - train;
        if train < 2 || val < 2 {
            return Err(Error::TooShort { len, min: warmup + 2 * parts });
        }
        Ok((warmup..warmup + train, warmup + train..len))
    }
}

/// One channel's outcome: the trained model and its validation report.
pub type ChannelFit<T> = Result<(RidgeModel<T>, EvalReport<T>)>;

/// Everything `train_eval_trial` produces for one trial.
#[derive(Debug, Clone)]
pub struct TrialFit<T = f64> {
    pub selection: PixelSelection<T>,
    pub train: Range<usize>,
    pub validation: Range<usize>,
    /// Indexed like [`AngleChannel::ALL`].
    pub channels: Vec<ChannelFit<T>>,
}

impl<T: Real> TrialFit<T> {
    pub fn channel(&self, channel: AngleChannel) -> &ChannelFit<T> {
        &self.channels[channel.index()]
    }

    /// Reports of the channels that trained successfully.
    pub fn reports(&self) -> impl Iterator<Item = &EvalReport<T>> {
        self.channels.iter().filter_map(|c| c.as_ref().ok().map(|(_, r)| r))
    }
}

/// Drops the warm-up, splits the remainder contiguously (validation is the
/// tail), fits the shared pixel selection and standardization on the training
/// part, trains one readout per angle channel and scores it on validation.
///
/// A constant angle channel fails alone; the other channels still train.
pub fn train_eval_trial<T: Real>(trial: &TrialDataset<T>, config: &PipelineConfig<T>) -> Result<TrialFit<T>> {
    let (train, validation) = config.split(trial.len(), trial.period_ms)?;
    let selection = select_pixels(trial, train.clone(), config.threshold)?;
    let train_frames = &trial.frames[train.clone()];
    let pixel_rows: Vec<Vec<T>> =
        selection.indices().iter().map(|&px| train_frames.iter().map(|f| f.values[px]).collect()).collect();
    let pressure_z = zscore_fit(&pixel_rows)?;
    let design = DesignMatrix::from_frames(train_frames, &selection, &pressure_z)?;
    let solver = RidgeSolver::new(&design, config.lambda)?;

    let channels = AngleChannel::ALL
        .iter()
        .map(|&channel| -> ChannelFit<T> {
            let series = trial.angle_series(channel);
            let train_angles = &series[train.clone()];
            let angle_z = zscore_fit(&[train_angles]).map_err(|_| Error::ConstantAngle(channel))?;
            let (m, s) = (angle_z.mean[0], angle_z.std[0]);
            let theta: Vec<T> = train_angles.iter().map(|&v| (v - m) / s).collect();
            let weights = solver.fit(&theta)?;
            let model = RidgeModel {
                channel,
                lambda: config.lambda,
                selection: selection.clone(),
                pressure_z: pressure_z.clone(),
                angle_z,
                weights,
            };
            let measured = &series[validation.clone()];
            let estimated = predict(&model, &trial.frames[validation.clone()])?;
            let report = EvalReport {
                trial_id: trial.trial_id.clone(),
                participant_id: trial.participant_id.clone(),
                condition: trial.condition,
                channel,
                rmse_deg: rmse(measured, &estimated)?,
                r2: r_squared(measured, &estimated).map_err(|_| Error::ConstantAngle(channel))?,
                n_validation: measured.len(),
            };
            Ok((model, report))
        })
        .collect();
    Ok(TrialFit { selection, train, validation, channels })
}
