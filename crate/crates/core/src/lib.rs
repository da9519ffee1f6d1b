//! Estimation of lower-limb joint angles and upper-body posture from plantar
//! pressure distributions.
//!
//! Pressure images from a 48×48 sheet sensor are regridded to a uniform rate,
//! filtered down to the pixels that correlate with the angles, standardized,
//! and mapped to each angle by a closed-form Ridge readout. The crate also
//! carries the statistics used to compare ground-contact conditions and a
//! synthetic squat/pressure generator for running the whole experiment
//! without recorded data.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar for the common cases.

pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod preprocess;
pub mod regress;
pub mod resample;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod synth;
pub mod trial;

pub use error::{Error, Result};
pub use io::{
    export_weight_map, load_model, load_trial, save_model, save_trial, TrialFilePair, WeightMap,
};
pub use grid::{cell_of, flat_index, AngleChannel, Condition, GRID_CELLS, GRID_SIDE};
pub use preprocess::{
    grid_search_threshold, pearson_r, select_pixels, zscore_apply, zscore_fit, zscore_invert, PixelSelection,
    ZScoreParams,
};
pub use regress::{
    predict, r_squared, ridge_fit, ridge_loss, rmse, train_eval_trial, DesignMatrix, EvalReport, PipelineConfig,
    RidgeModel, TrialFit,
};
pub use resample::{align_streams, resample_linear, RawSeries};
pub use scalar::Real;
pub use stats::{
    compare_conditions, f_test_var, shapiro_coefficients, shapiro_wilk, welch_t, ComparisonResult, Metric,
    TestResult,
};
pub use trial::{validate_trial, AngleSample, PressureFrame, TrialDataset};

pub type PressureFrame64 = PressureFrame<f64>;
pub type PressureFrame32 = PressureFrame<f32>;
pub type AngleSample64 = AngleSample<f64>;
pub type AngleSample32 = AngleSample<f32>;
pub type TrialDataset64 = TrialDataset<f64>;
pub type TrialDataset32 = TrialDataset<f32>;
pub type RawSeries64 = RawSeries<f64>;
pub type RawSeries32 = RawSeries<f32>;
pub type RidgeModel64 = RidgeModel<f64>;
pub type RidgeModel32 = RidgeModel<f32>;
pub type DesignMatrix64 = DesignMatrix<f64>;
pub type DesignMatrix32 = DesignMatrix<f32>;
pub type EvalReport64 = EvalReport<f64>;
pub type EvalReport32 = EvalReport<f32>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type PipelineConfig32 = PipelineConfig<f32>;
pub type ComparisonResult64 = ComparisonResult<f64>;
pub type ComparisonResult32 = ComparisonResult<f32>;
