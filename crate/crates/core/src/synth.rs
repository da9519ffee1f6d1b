//! Synthetic squat trials: a sagittal joint-angle trajectory, a plantar
//! pressure forward model with a heterogeneous foot, and the ground-contact
//! condition transforms.
//!
//! The forward model is this crate's operationalization of foot morphology:
//! every loaded cell has its own stiffness and its own smooth, fine-grained
//! response to the joint configuration. Condition B (rubber) blurs that
//! structure away; condition C (rigid plate) collapses each foot to an affine
//! field carrying only force and centre of pressure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{cell_of, flat_index, AngleChannel, Condition, GRID_CELLS, GRID_SIDE};
use crate::linalg::Cholesky;
use crate::scalar::Real;
use crate::trial::{validate_trial, AngleSample, PressureFrame, TrialDataset, DEFAULT_PERIOD_MS};

// Independent random streams derived from one seed.
const STREAM_TRAJECTORY: u64 = 1;
const STREAM_TISSUE: u64 = 2;
const STREAM_SENSOR: u64 = 3;
const STREAM_FOOT: u64 = 4;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Squat motion parameters; per-channel arrays follow [`AngleChannel::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SquatConfig<T = f64> {
    pub period_s: T,
    pub duration_s: T,
    pub sample_period_ms: i64,
    pub amplitude_deg: [T; 4],
    pub neutral_deg: [T; 4],
    /// Phase lead of each channel, radians.
    pub phase_rad: [T; 4],
    /// Stationary standard deviation of the per-channel pose noise.
    pub noise_sd: T,
    /// Lag-one autocorrelation of the pose noise (AR(1) per channel).
    pub noise_autocorr: T,
    pub seed: u64,
}

impl<T: Real> Default for SquatConfig<T> {
    fn default() -> Self {
        let l = T::lit;
        Self {
            period_s: l(2.0),
            duration_s: l(30.0),
            sample_period_ms: DEFAULT_PERIOD_MS,
            amplitude_deg: [l(15.0), l(35.0), l(30.0), l(15.0)],
            neutral_deg: [l(10.0), l(30.0), l(35.0), l(15.0)],
            phase_rad: [l(0.0), l(0.3), l(0.6), l(1.0)],
            noise_sd: l(1.5),
            noise_autocorr: l(0.97),
            seed: 0,
        }
    }
}

impl<T: Real> SquatConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.period_s > T::zero()) || !(self.duration_s > T::zero()) || self.sample_period_ms <= 0 {
            return Err(Error::InvalidArgument("squat period, duration and sample period must be positive".into()));
        }
        if self.amplitude_deg.iter().any(|&a| !(a >= T::zero())) || !(self.noise_sd >= T::zero()) {
            return Err(Error::InvalidArgument("amplitudes and noise must be non-negative".into()));
        }
        if !(self.noise_autocorr >= T::zero() && self.noise_autocorr < T::one()) {
            return Err(Error::InvalidArgument("noise autocorrelation must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Number of samples on the uniform grid.
    pub fn samples(&self) -> usize {
        (self.duration_s.to_f64_lossy() * 1000.0 / self.sample_period_ms as f64).round() as usize
    }

    /// Normalized deviation `(θ − neutral) / amplitude` of each channel;
    /// channels with amplitude below one degree are scaled by one degree.
    pub fn normalized(&self, sample: &AngleSample<T>) -> [T; 4] {
        let a = sample.to_array();
        std::array::from_fn(|c| (a[c] - self.neutral_deg[c]) / self.amplitude_deg[c].max(T::one()))
    }
}

/// Sinusoidal squat with a shared period, per-channel phase and seeded,
/// temporally correlated Gaussian pose noise.
pub fn squat_trajectory<T: Real>(config: &SquatConfig<T>) -> Result<Vec<AngleSample<T>>> {
    config.validate()?;
    let n = config.samples();
    let mut rng = rng_for(config.seed, STREAM_TRAJECTORY);
    let rho = config.noise_autocorr;
    let innovation = config.noise_sd * (T::one() - rho * rho).sqrt();
    let mut noise = [T::zero(); 4];
    for v in noise.iter_mut() {
        *v = config.noise_sd * normal::<T>(&mut rng);
    }
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t_ms = k as i64 * config.sample_period_ms;
        if k > 0 {
            for v in noise.iter_mut() {
                *v = rho * *v + innovation * normal::<T>(&mut rng);
            }
        }
        let phase = two_pi * T::lit(t_ms as f64 / 1000.0) / config.period_s;
        let a: [T; 4] = std::array::from_fn(|c| {
            config.neutral_deg[c] + config.amplitude_deg[c] * (phase + config.phase_rad[c]).sin() + noise[c]
        });
        out.push(AngleSample::from_array(t_ms, a));
    }
    Ok(out)
}

/// Parameters of the pose-to-pressure forward model.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureModel<T = f64> {
    /// Strength of the per-cell compliance response to the joint configuration.
    pub morphology_gain: T,
    /// Gain of the squat-depth nonlinearity driving the centre-of-pressure shift.
    pub cop_gain: T,
    /// Length scale (cells) of the planar load gradient.
    pub slope_cells: T,
    /// Proportional per-cell tissue noise applied in the forward model.
    pub tissue_noise_sd: T,
    /// Proportional sensor noise applied after the condition transform.
    pub sensor_noise_sd: T,
}

impl<T: Real> Default for PressureModel<T> {
    fn default() -> Self {
        Self {
            morphology_gain: T::lit(0.15),
            cop_gain: T::lit(1.0),
            slope_cells: T::lit(40.0),
            tissue_noise_sd: T::lit(0.05),
            sensor_noise_sd: T::lit(0.6),
        }
    }
}

/// Foot footprint and tissue heterogeneity of one synthetic participant.
#[derive(Debug, Clone, PartialEq)]
pub struct FootModel<T = f64> {
    /// Loaded cells (both feet), row-major.
    pub mask: Vec<bool>,
    /// Per-cell stiffness; positive on the mask, zero elsewhere.
    pub stiffness: Vec<T>,
    /// Per-channel compliance response maps, zero off the mask.
    pub compliance: [Vec<T>; 4],
    pub body_weight: T,
}

/// Column separating the left and right foot.
pub const MIDLINE_COL: usize = GRID_SIDE / 2;

/// Two foot-shaped regions: forefoot and heel ellipses joined by a midfoot band.
pub fn foot_mask() -> Vec<bool> {
    let mut mask = vec![false; GRID_CELLS];
    for (side, c0) in [(-1.0f64, 16.5f64), (1.0, 31.5)] {
        for (i, m) in mask.iter_mut().enumerate() {
            let (r, c) = cell_of(i);
            let (r, c) = (r as f64, c as f64);
            let fore = ((r - 16.0) / 8.0).powi(2) + ((c - c0) / 4.6).powi(2) <= 1.0;
            let heel = ((r - 32.0) / 6.0).powi(2) + ((c - c0) / 3.6).powi(2) <= 1.0;
            // Midfoot band sits toward the lateral edge.
            let mid = (20.0..=30.0).contains(&r) && (c - (c0 + side * 1.0)).abs() <= 2.6;
            *m |= fore || heel || mid;
        }
    }
    mask
}

impl<T: Real> FootModel<T> {
    /// Draws a participant's foot: log-normal stiffness with smooth spatial
    /// correlation and unit-variance compliance maps with fine-grained
    /// correlation.
    pub fn generate(seed: u64, body_weight: T) -> Result<Self> {
        if !(body_weight > T::zero()) {
            return Err(Error::InvalidArgument("body weight must be positive".into()));
        }
        let mask = foot_mask();
        let mut rng = rng_for(seed, STREAM_FOOT);
        let stiff_field = smooth_unit_field::<T>(&mut rng, T::lit(1.5));
        let stiffness = stiff_field
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| if m { (T::lit(0.35) * v).exp() } else { T::zero() })
            .collect();
        let compliance = std::array::from_fn(|_| {
            let f = smooth_unit_field::<T>(&mut rng, T::one());
            f.into_iter().zip(&mask).map(|(v, &m)| if m { v } else { T::zero() }).collect()
        });
        let mut foot = Self { mask, stiffness, compliance, body_weight };
        foot.balance();
        foot.validate()?;
        Ok(foot)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mask.len() != GRID_CELLS || self.stiffness.len() != GRID_CELLS {
            return Err(Error::BadWidth { width: self.mask.len().min(self.stiffness.len()), expected: GRID_CELLS });
        }
        if !self.mask.iter().any(|&m| m) {
            return Err(Error::InvalidArgument("foot mask is empty".into()));
        }
        for (i, (&m, &k)) in self.mask.iter().zip(&self.stiffness).enumerate() {
            if m && !(k > T::zero()) || !m && k != T::zero() {
                return Err(Error::InvalidArgument(format!("stiffness inconsistent with mask at cell {i}")));
            }
        }
        if self.compliance.iter().any(|c| c.len() != GRID_CELLS) {
            return Err(Error::BadWidth { width: 0, expected: GRID_CELLS });
        }
        if !(self.body_weight > T::zero()) {
            return Err(Error::InvalidArgument("body weight must be positive".into()));
        }
        Ok(())
    }

    /// Tilts each foot's stiffness by a log-linear factor so its weighted
    /// centroid coincides with the foot's cell centroid, then gives each foot a
    /// mass proportional to its cell count. A neutral stance then loads the
    /// mask symmetrically.
    fn balance(&mut self) {
        for plate in self.plates() {
            let n = T::from_usize_lossy(plate.len());
            let pos: Vec<(T, T)> = plate.iter().map(|&i| cell_of(i)).map(|(r, c)| (T::from_usize_lossy(r), T::from_usize_lossy(c))).collect();
            let rc = pos.iter().fold(T::zero(), |a, p| a + p.0) / n;
            let cc = pos.iter().fold(T::zero(), |a, p| a + p.1) / n;
            for _ in 0..50 {
                let mut m = [T::zero(); 6]; // sum, r, c, rr, rc, cc (centred)
                for (&i, &(r, c)) in plate.iter().zip(&pos) {
                    let (dr, dc, k) = (r - rc, c - cc, self.stiffness[i]);
                    m[0] += k;
                    m[1] += k * dr;
                    m[2] += k * dc;
                    m[3] += k * dr * dr;
                    m[4] += k * dr * dc;
                    m[5] += k * dc * dc;
                }
                let (mr, mc) = (m[1] / m[0], m[2] / m[0]);
                if mr.abs() + mc.abs() < T::lit(1e-12) {
                    break;
                }
                // Newton step on the weighted mean offset.
                let (vrr, vrc, vcc) = (m[3] / m[0] - mr * mr, m[4] / m[0] - mr * mc, m[5] / m[0] - mc * mc);
                let det = vrr * vcc - vrc * vrc;
                let beta = -(vcc * mr - vrc * mc) / det;
                let gamma = -(vrr * mc - vrc * mr) / det;
                for (&i, &(r, c)) in plate.iter().zip(&pos) {
                    self.stiffness[i] *= (beta * (r - rc) + gamma * (c - cc)).exp();
                }
            }
            let sum: T = plate.iter().map(|&i| self.stiffness[i]).sum();
            for &i in &plate {
                self.stiffness[i] *= n / sum;
            }
        }
    }

    /// Unweighted centroid (row, col) of the mask.
    pub fn mask_centroid(&self) -> (T, T) {
        let mut acc = (T::zero(), T::zero());
        let mut n = 0usize;
        for i in self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i) {
            let (r, c) = cell_of(i);
            acc.0 += T::from_usize_lossy(r);
            acc.1 += T::from_usize_lossy(c);
            n += 1;
        }
        let n = T::from_usize_lossy(n);
        (acc.0 / n, acc.1 / n)
    }

    /// Flat indices of each foot's cells (left, right).
    pub fn plates(&self) -> Vec<Vec<usize>> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, _) in self.mask.iter().enumerate().filter(|(_, &m)| m) {
            if cell_of(i).1 < MIDLINE_COL {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        [left, right].into_iter().filter(|p| !p.is_empty()).collect()
    }
}

/// White noise smoothed by a Gaussian of `sigma` cells, rescaled to unit variance.
fn smooth_unit_field<T: Real>(rng: &mut ChaCha8Rng, sigma: T) -> Vec<T> {
    let noise: Vec<T> = (0..GRID_CELLS).map(|_| normal(rng)).collect();
    let f = gaussian_blur(&noise, sigma);
    let m = crate::scalar::mean(&f);
    let sd = (f.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(GRID_CELLS)).sqrt();
    f.into_iter().map(|v| (v - m) / sd).collect()
}

/// Mass-preserving separable Gaussian blur of a grid.
///
/// Each source cell spreads its value with a kernel truncated at 3σ and
/// renormalized over the in-grid footprint, so the grid total is unchanged.
pub fn gaussian_blur<T: Real>(grid: &[T], sigma: T) -> Vec<T> {
    if !(sigma > T::zero()) {
        return grid.to_vec();
    }
    let radius = (T::lit(3.0) * sigma).ceil().to_usize().unwrap_or(0).max(1);
    let kernel: Vec<T> = (0..=radius)
        .map(|d| {
            let d = T::from_usize_lossy(d);
            (-(d * d) / (T::lit(2.0) * sigma * sigma)).exp()
        })
        .collect();
    // In-grid kernel mass for a source at each position along one axis.
    let norms: Vec<T> = (0..GRID_SIDE)
        .map(|p| {
            let lo = p.saturating_sub(radius);
            let hi = (p + radius).min(GRID_SIDE - 1);
            (lo..=hi).map(|q| kernel[p.abs_diff(q)]).sum()
        })
        .collect();
    let spread = |src: &[T], along_rows: bool| -> Vec<T> {
        let mut out = vec![T::zero(); GRID_CELLS];
        for (i, &v) in src.iter().enumerate() {
            if v == T::zero() {
                continue;
            }
            let (r, c) = cell_of(i);
            let p = if along_rows { c } else { r };
            let scale = v / norms[p];
            let lo = p.saturating_sub(radius);
            let hi = (p + radius).min(GRID_SIDE - 1);
            for q in lo..=hi {
                let j = if along_rows { flat_index(r, q) } else { flat_index(q, c) };
                out[j] += scale * kernel[p.abs_diff(q)];
            }
        }
        out
    };
    spread(&spread(grid, true), false)
}

/// Squat depth in `(-1, 1)` driving the anterior centre-of-pressure shift.
pub fn squat_depth<T: Real>(x: &[T; 4], model: &PressureModel<T>) -> T {
    let knee = x[AngleChannel::Knee.index()];
    let hip = x[AngleChannel::Hip.index()];
    (model.cop_gain * T::lit(0.5) * (knee + hip)).tanh()
}

/// Noise-free pressure field for one pose, scaled to the body weight.
pub fn pressure_field<T: Real>(
    x: &[T; 4],
    foot: &FootModel<T>,
    model: &PressureModel<T>,
) -> Vec<T> {
    let depth = squat_depth(x, model);
    let (r0, _) = foot.mask_centroid();
    let floor = T::lit(0.05);
    let mut p = vec![T::zero(); GRID_CELLS];
    for (i, v) in p.iter_mut().enumerate() {
        if !foot.mask[i] {
            continue;
        }
        let r = T::from_usize_lossy(cell_of(i).0);
        // Toes are at low rows, so a deeper squat loads the low rows.
        let planar = (T::one() + depth * (r0 - r) / model.slope_cells).max(floor);
        let response: T = (0..4).map(|c| foot.compliance[c][i] * x[c]).sum();
        *v = foot.stiffness[i] * planar * (model.morphology_gain * response).exp();
    }
    rescale_total(&mut p, foot.body_weight);
    p
}

fn rescale_total<T: Real>(values: &mut [T], total: T) {
    let sum: T = values.iter().copied().sum();
    if sum > T::zero() {
        let s = total / sum;
        values.iter_mut().for_each(|v| *v *= s);
    }
}

/// Forward model for one pose: the planar, stiffness- and compliance-modulated
/// field of [`pressure_field`] with proportional tissue noise, clipped at zero
/// and rescaled so the total equals the body weight.
pub fn pressure_from_pose<T: Real>(
    angles: &AngleSample<T>,
    squat: &SquatConfig<T>,
    foot: &FootModel<T>,
    model: &PressureModel<T>,
    rng: &mut ChaCha8Rng,
) -> PressureFrame<T> {
    let x = squat.normalized(angles);
    let mut p = pressure_field(&x, foot, model);
    if model.tissue_noise_sd > T::zero() {
        for (v, &m) in p.iter_mut().zip(&foot.mask) {
            if m {
                *v = (*v * (T::one() + model.tissue_noise_sd * normal::<T>(rng))).max(T::zero());
            }
        }
        rescale_total(&mut p, foot.body_weight);
    }
    PressureFrame { t_ms: angles.t_ms, values: p }
}

/// Centre of pressure (row, col) of a field; `None` when the field is empty.
pub fn center_of_pressure<T: Real>(values: &[T]) -> Option<(T, T)> {
    let mut acc = (T::zero(), T::zero(), T::zero());
    for (i, &v) in values.iter().enumerate() {
        let (r, c) = cell_of(i);
        acc.0 += v;
        acc.1 += v * T::from_usize_lossy(r);
        acc.2 += v * T::from_usize_lossy(c);
    }
    (acc.0 > T::zero()).then(|| (acc.1 / acc.0, acc.2 / acc.0))
}

/// How a condition alters the pressure reaching the sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTransform<T = f64> {
    pub kind: Condition,
    /// Gaussian σ in cells for the rubber plate.
    pub blur_radius_cells: T,
    /// Flat indices covered by each rigid plate.
    pub plates: Vec<Vec<usize>>,
}

impl<T: Real> ConditionTransform<T> {
    /// Default transform for `kind`: σ = 2 cells of blur for rubber, one plate
    /// per foot for plastic.
    pub fn for_foot(kind: Condition, foot: &FootModel<T>) -> Self {
        Self { kind, blur_radius_cells: T::lit(2.0), plates: foot.plates() }
    }
}

/// Affine field `α + β·row + γ·col` over `plate` with the same total and
/// first moments (hence the same centre of pressure) as `values` there.
pub fn plate_field<T: Real>(values: &[T], plate: &[usize]) -> Result<Vec<T>> {
    let mut gram = [T::zero(); 9];
    let mut rhs = [T::zero(); 3];
    for &i in plate {
        let (r, c) = cell_of(i);
        let basis = [T::one(), T::from_usize_lossy(r), T::from_usize_lossy(c)];
        for a in 0..3 {
            rhs[a] += basis[a] * values[i];
            for b in 0..3 {
                gram[a * 3 + b] += basis[a] * basis[b];
            }
        }
    }
    let coef = Cholesky::factor(&gram, 3)?.solve(&rhs)?;
    Ok(plate
        .iter()
        .map(|&i| {
            let (r, c) = cell_of(i);
            coef[0] + coef[1] * T::from_usize_lossy(r) + coef[2] * T::from_usize_lossy(c)
        })
        .collect())
}

/// Applies a ground-contact condition to every frame.
///
/// A is the identity. B blurs each frame with a normalized Gaussian. C
/// replaces each plate region by its moment-matched affine field, clips at
/// zero and rescales the plate back to its original total.
pub fn apply_condition<T: Real>(frames: &[PressureFrame<T>], transform: &ConditionTransform<T>) -> Result<Vec<PressureFrame<T>>> {
    match transform.kind {
        Condition::Nothing => Ok(frames.to_vec()),
        Condition::Rubber => Ok(frames
            .iter()
            .map(|f| PressureFrame { t_ms: f.t_ms, values: gaussian_blur(&f.values, transform.blur_radius_cells) })
            .collect()),
        Condition::Plastic => frames
            .iter()
            .map(|f| {
                let mut values = f.values.clone();
                for plate in &transform.plates {
                    let total: T = plate.iter().map(|&i| f.values[i]).sum();
                    let mut field: Vec<T> = plate_field(&f.values, plate)?.into_iter().map(|v| v.max(T::zero())).collect();
                    rescale_total(&mut field, total);
                    for (&i, v) in plate.iter().zip(field) {
                        values[i] = v;
                    }
                }
                Ok(PressureFrame { t_ms: f.t_ms, values })
            })
            .collect(),
    }
}

/// Proportional sensor noise, clipped at zero, with the frame total restored.
pub fn add_sensor_noise<T: Real>(frame: &mut PressureFrame<T>, sd: T, rng: &mut ChaCha8Rng) {
    if !(sd > T::zero()) {
        return;
    }
    let total = frame.total();
    for v in frame.values.iter_mut().filter(|v| **v > T::zero()) {
        *v = (*v * (T::one() + sd * normal::<T>(rng))).max(T::zero());
    }
    rescale_total(&mut frame.values, total);
}

/// Generates one complete trial: trajectory, forward model, condition,
/// sensor noise, then validation.
#[allow(clippy::too_many_arguments)]
pub fn generate_trial<T: Real>(
    trial_id: &str,
    participant_id: &str,
    seed: u64,
    condition: Condition,
    squat: &SquatConfig<T>,
    foot: &FootModel<T>,
    model: &PressureModel<T>,
) -> Result<TrialDataset<T>> {
    foot.validate()?;
    let squat = SquatConfig { seed, ..squat.clone() };
    let angles = squat_trajectory(&squat)?;
    let mut tissue = rng_for(seed, STREAM_TISSUE);
    let frames: Vec<PressureFrame<T>> =
        angles.iter().map(|a| pressure_from_pose(a, &squat, foot, model, &mut tissue)).collect();
    let mut frames = apply_condition(&frames, &ConditionTransform::for_foot(condition, foot))?;
    let mut sensor = rng_for(seed, STREAM_SENSOR);
    for f in frames.iter_mut() {
        add_sensor_noise(f, model.sensor_noise_sd, &mut sensor);
    }
    validate_trial(TrialDataset {
        trial_id: trial_id.to_string(),
        participant_id: participant_id.to_string(),
        condition,
        period_ms: squat.sample_period_ms,
        frames,
        angles,
    })
}

/// Trial counts per condition for each participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Design {
    pub participants: usize,
    pub nothing: usize,
    pub rubber: usize,
    pub plastic: usize,
}

impl Default for Design {
    /// Seven participants, five bare trials and three with each plate.
    fn default() -> Self {
        Self { participants: 7, nothing: 5, rubber: 3, plastic: 3 }
    }
}

impl Design {
    pub fn per_condition(&self, condition: Condition) -> usize {
        match condition {
            Condition::Nothing => self.nothing,
            Condition::Rubber => self.rubber,
            Condition::Plastic => self.plastic,
        }
    }

    pub fn total(&self) -> usize {
        self.participants * (self.nothing + self.rubber + self.plastic)
    }
}

/// Recipe for one trial of a batch; generation is independent per plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub trial_id: String,
    pub participant_id: String,
    pub participant_seed: u64,
    pub seed: u64,
    pub condition: Condition,
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_add(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Enumerates every trial of `design`, restricted to `conditions`.
pub fn plan_batch(design: &Design, conditions: &[Condition], base_seed: u64) -> Vec<TrialPlan> {
    let mut plans = Vec::new();
    for p in 0..design.participants {
        let participant_seed = mix(base_seed, p as u64);
        for &condition in &Condition::ALL {
            if !conditions.contains(&condition) {
                continue;
            }
            for rep in 0..design.per_condition(condition) {
                let seed = mix(participant_seed, ((condition as u64) << 16) | rep as u64 | 1 << 40);
                plans.push(TrialPlan {
                    trial_id: format!("P{:02}-{}{}", p + 1, condition.letter(), rep + 1),
                    participant_id: format!("P{:02}", p + 1),
                    participant_seed,
                    seed,
                    condition,
                });
            }
        }
    }
    plans
}

impl TrialPlan {
    /// Body weight of the plan's participant, 55–75 force units.
    pub fn body_weight<T: Real>(&self) -> T {
        T::lit(55.0 + 20.0 * ((self.participant_seed >> 11) as f64 / (1u64 << 53) as f64))
    }

    pub fn foot<T: Real>(&self) -> Result<FootModel<T>> {
        FootModel::generate(self.participant_seed, self.body_weight())
    }

    pub fn generate<T: Real>(&self, squat: &SquatConfig<T>, model: &PressureModel<T>) -> Result<TrialDataset<T>> {
        let foot = self.foot()?;
        generate_trial(&self.trial_id, &self.participant_id, self.seed, self.condition, squat, &foot, model)
    }
}
