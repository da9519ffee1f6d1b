//! Line-based text formats: trial CSVs, model files, weight maps (CSV and
//! plain PGM) and the evaluation/comparison report tables.
//!
//! Every format has a fixed header, uses `.` as the decimal separator and
//! writes floating-point values with 17 significant digits (exact zeros are
//! written as `0`), so `f64` values survive a save/load cycle bit for bit.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{cell_of, AngleChannel, Condition, GRID_CELLS, GRID_SIDE};
use crate::preprocess::{PixelSelection, ZScoreParams};
use crate::regress::{EvalReport, RidgeModel};
use crate::resample::{align_streams, RawSeries};
use crate::scalar::Real;
use crate::stats::{ComparisonResult, Metric, TestResult};
use crate::trial::TrialDataset;

/// Current model file version.
pub const MODEL_VERSION: u32 = 1;

pub const ANGLES_HEADER: &str = "t_ms,ankle_deg,knee_deg,hip_deg,upper_deg";

/// `t_ms,p_0,...,p_2303`.
pub fn pressure_header() -> String {
    let mut h = String::from("t_ms");
    for i in 0..GRID_CELLS {
        write!(h, ",p_{i}").unwrap();
    }
    h
}

/// Formats a value with 17 significant digits; exact zero becomes `0`.
pub fn fmt_num<T: Real>(v: T) -> String {
    let v = v.to_f64_lossy();
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_num<T: Real>(s: &str, line: usize) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse { line, msg: format!("invalid number `{}`", s.trim()) })?;
    T::from_f64(v).ok_or_else(|| Error::Parse { line, msg: format!("value `{s}` not representable") })
}

fn join_nums<T: Real>(values: &[T]) -> String {
    values.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(",")
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String>)> + use<>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let owned = path.to_path_buf();
    Ok(BufReader::new(file).lines().enumerate().map(move |(i, l)| (i + 1, l.map_err(|e| io_err(&owned, e)))))
}

/// Reads a timestamped CSV with a fixed header into a raw series.
fn read_series<T: Real>(path: &Path, header: &str) -> Result<RawSeries<T>> {
    let width = header.split(',').count() - 1;
    let mut lines = open_lines(path)?;
    let (_, first) = lines.next().ok_or(Error::HeaderMismatch { line: 1, msg: "file is empty".into() })?;
    if first?.trim_end() != header {
        return Err(Error::HeaderMismatch { line: 1, msg: "unexpected column names or order".into() });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, text) in lines {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let mut fields = text.split(',');
        let t: f64 = parse_num(fields.next().unwrap_or(""), line)?;
        let row: Vec<T> = fields.map(|f| parse_num(f, line)).collect::<Result<_>>()?;
        if row.len() != width {
            return Err(Error::Parse { line, msg: format!("expected {} values, found {}", width, row.len()) });
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Parse { line, msg: "timestamps must be strictly increasing".into() });
            }
        }
        times.push(t);
        values.push(row);
    }
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    RawSeries::new(times, values)
}

pub fn read_pressure_series<T: Real>(path: &Path) -> Result<RawSeries<T>> {
    read_series(path, &pressure_header())
}

pub fn read_angle_series<T: Real>(path: &Path) -> Result<RawSeries<T>> {
    read_series(path, ANGLES_HEADER)
}

/// Paths and labels of one recorded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFilePair {
    pub pressure: PathBuf,
    pub angles: PathBuf,
    pub trial_id: String,
    pub participant_id: String,
    pub condition: Condition,
    pub period_ms: i64,
}

/// Loads both files and aligns them onto the uniform grid.
///
/// Files that are already uniform at `period_ms` with identical spans load
/// unchanged; irregular timestamps are linearly resampled.
pub fn load_trial<T: Real>(pair: &TrialFilePair) -> Result<TrialDataset<T>> {
    let pressure = read_pressure_series(&pair.pressure)?;
    let angles = read_angle_series(&pair.angles)?;
    align_streams(&pressure, &angles, pair.period_ms, pair.condition, &pair.trial_id, &pair.participant_id)
}

/// Writes the pressure and angle CSVs of a trial.
pub fn save_trial<T: Real>(trial: &TrialDataset<T>, pressure: &Path, angles: &Path) -> Result<()> {
    let mut w = create(pressure)?;
    let werr = |e| io_err(pressure, e);
    writeln!(w, "{}", pressure_header()).map_err(werr)?;
    let mut line = String::new();
    for f in &trial.frames {
        line.clear();
        write!(line, "{}", f.t_ms).unwrap();
        for &v in &f.values {
            line.push(',');
            line.push_str(&fmt_num(v));
        }
        writeln!(w, "{line}").map_err(werr)?;
    }
    w.flush().map_err(werr)?;

    let mut w = create(angles)?;
    let werr = |e| io_err(angles, e);
    writeln!(w, "{ANGLES_HEADER}").map_err(werr)?;
    for a in &trial.angles {
        writeln!(w, "{},{}", a.t_ms, join_nums(&a.to_array())).map_err(werr)?;
    }
    w.flush().map_err(werr)
}

/// Serializes a model as versioned `key=value` lines.
pub fn model_to_string<T: Real>(model: &RidgeModel<T>) -> String {
    let idx: Vec<String> = model.selection.indices().iter().map(|i| i.to_string()).collect();
    let mut s = String::new();
    writeln!(s, "version={MODEL_VERSION}").unwrap();
    writeln!(s, "channel={}", model.channel).unwrap();
    writeln!(s, "lambda={}", fmt_num(model.lambda)).unwrap();
    writeln!(s, "threshold={}", fmt_num(model.selection.threshold())).unwrap();
    writeln!(s, "selection={}", idx.join(",")).unwrap();
    writeln!(s, "pressure_mean={}", join_nums(&model.pressure_z.mean)).unwrap();
    writeln!(s, "pressure_std={}", join_nums(&model.pressure_z.std)).unwrap();
    writeln!(s, "angle_mean={}", fmt_num(model.angle_z.mean[0])).unwrap();
    writeln!(s, "angle_std={}", fmt_num(model.angle_z.std[0])).unwrap();
    writeln!(s, "weights={}", join_nums(&model.weights)).unwrap();
    s
}

const MODEL_KEYS: [&str; 10] = [
    "version",
    "channel",
    "lambda",
    "threshold",
    "selection",
    "pressure_mean",
    "pressure_std",
    "angle_mean",
    "angle_std",
    "weights",
];

/// Parses the text produced by [`model_to_string`].
pub fn model_from_str<T: Real>(text: &str) -> Result<RidgeModel<T>> {
    let mut fields: [Option<(usize, &str)>; 10] = [None; 10];
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        if raw.trim().is_empty() {
            continue;
        }
        let (key, value) = raw.split_once('=').ok_or(Error::Parse { line, msg: "expected key=value".into() })?;
        let slot = MODEL_KEYS
            .iter()
            .position(|k| *k == key.trim())
            .ok_or_else(|| Error::Parse { line, msg: format!("unknown key `{}`", key.trim()) })?;
        if fields[slot].is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key `{}`", key.trim()) });
        }
        if slot == 0 {
            let found: u32 = value.trim().parse().map_err(|_| Error::Parse { line, msg: "invalid version".into() })?;
            if found != MODEL_VERSION {
                return Err(Error::VersionMismatch { found, expected: MODEL_VERSION });
            }
        }
        fields[slot] = Some((line, value.trim()));
    }
    if !text.ends_with('\n') {
        return Err(Error::Parse { line: last_line.max(1), msg: "file truncated: missing final newline".into() });
    }
    let get = |k: usize| fields[k].ok_or_else(|| Error::Parse { line: last_line + 1, msg: format!("missing key `{}`", MODEL_KEYS[k]) });
    get(0)?;
    let list = |k: usize| -> Result<Vec<T>> {
        let (line, v) = get(k)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',').map(|s| parse_num(s, line)).collect()
    };
    let scalar = |k: usize| -> Result<T> {
        let (line, v) = get(k)?;
        parse_num(v, line)
    };
    let (cl, channel) = get(1)?;
    let channel: AngleChannel = channel.parse().map_err(|_| Error::Parse { line: cl, msg: format!("unknown channel `{channel}`") })?;
    let (sl, sel) = get(4)?;
    let indices: Vec<usize> = sel
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| Error::Parse { line: sl, msg: format!("invalid pixel index `{s}`") }))
        .collect::<Result<_>>()?;
    let selection = PixelSelection::new(indices, scalar(3)?).map_err(|e| Error::Parse { line: sl, msg: e.to_string() })?;
    let model = RidgeModel {
        channel,
        lambda: scalar(2)?,
        selection,
        pressure_z: ZScoreParams { mean: list(5)?, std: list(6)? },
        angle_z: ZScoreParams { mean: vec![scalar(7)?], std: vec![scalar(8)?] },
        weights: list(9)?,
    };
    model.validate().map_err(|e| Error::Parse { line: last_line, msg: e.to_string() })?;
    Ok(model)
}

pub fn save_model<T: Real>(model: &RidgeModel<T>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(model_to_string(model).as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn load_model<T: Real>(path: &Path) -> Result<RidgeModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    model_from_str(&text)
}

/// Absolute readout weights scattered onto the sensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap<T = f64> {
    pub values: Vec<T>,
}

/// `|w|` at every selected pixel, zero elsewhere.
pub fn export_weight_map<T: Real>(model: &RidgeModel<T>) -> WeightMap<T> {
    let mut values = vec![T::zero(); GRID_CELLS];
    for (&px, &w) in model.selection.indices().iter().zip(&model.weights) {
        values[px] = w.abs();
    }
    WeightMap { values }
}

impl<T: Real> WeightMap<T> {
    /// 48 rows of 48 values under a `row,col_0,...,col_47` header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row");
        for c in 0..GRID_SIDE {
            write!(s, ",col_{c}").unwrap();
        }
        s.push('\n');
        for r in 0..GRID_SIDE {
            write!(s, "{r},{}", join_nums(&self.values[r * GRID_SIDE..(r + 1) * GRID_SIDE])).unwrap();
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let expected = Self { values: vec![T::zero(); GRID_CELLS] }.to_csv();
        let header = expected.lines().next().unwrap_or_default();
        match lines.next() {
            Some((_, h)) if h.trim_end() == header => {}
            _ => return Err(Error::HeaderMismatch { line: 1, msg: "weight map header".into() }),
        }
        let mut values = Vec::with_capacity(GRID_CELLS);
        let mut rows = 0;
        for (i, l) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let line = i + 1;
            let mut fields = l.split(',');
            let r: usize = fields.next().unwrap_or("").trim().parse().map_err(|_| Error::Parse { line, msg: "row index".into() })?;
            if r != rows {
                return Err(Error::Parse { line, msg: format!("expected row {rows}, found {r}") });
            }
            let row: Vec<T> = fields.map(|f| parse_num(f, line)).collect::<Result<_>>()?;
            if row.len() != GRID_SIDE {
                return Err(Error::Parse { line, msg: format!("expected {GRID_SIDE} values, found {}", row.len()) });
            }
            if row.iter().any(|&v| v < T::zero()) {
                return Err(Error::Parse { line, msg: "weight magnitudes must be non-negative".into() });
            }
            values.extend(row);
            rows += 1;
        }
        if rows != GRID_SIDE {
            return Err(Error::Parse { line: rows + 2, msg: format!("expected {GRID_SIDE} rows, found {rows}") });
        }
        Ok(Self { values })
    }

    /// 8-bit levels: the largest magnitude maps to 255, zero to 0.
    pub fn levels(&self) -> Vec<u8> {
        let max = self.values.iter().copied().fold(T::zero(), T::max);
        self.values
            .iter()
            .map(|&v| {
                if max > T::zero() {
                    (v / max * T::lit(255.0)).round().to_f64_lossy().clamp(0.0, 255.0) as u8
                } else {
                    0
                }
            })
            .collect()
    }

    /// Plain (`P2`) grayscale PGM.
    pub fn to_pgm(&self) -> String {
        let levels = self.levels();
        let mut s = format!("P2\n{GRID_SIDE} {GRID_SIDE}\n255\n");
        for r in 0..GRID_SIDE {
            let row: Vec<String> = levels[r * GRID_SIDE..(r + 1) * GRID_SIDE].iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * GRID_SIDE + col]
    }

    /// Selected-cell positions with nonzero weight.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.values.iter().enumerate().filter(|(_, &v)| v > T::zero()).map(|(i, _)| cell_of(i)).collect()
    }
}

pub const REPORT_HEADER: &str = "trial_id,participant_id,condition,channel,rmse_deg,r2,n_validation,status,detail";

fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// One row of the evaluation table: either a report or a recorded failure.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportRow<T = f64> {
    Ok(EvalReport<T>),
    Failed {
        trial_id: String,
        participant_id: String,
        condition: Condition,
        channel: Option<AngleChannel>,
        error: Error,
    },
}

pub fn reports_to_csv<T: Real>(rows: &[ReportRow<T>]) -> String {
    let mut s = format!("{REPORT_HEADER}\n");
    for row in rows {
        match row {
            ReportRow::Ok(r) => writeln!(
                s,
                "{},{},{},{},{},{},{},ok,",
                clean(&r.trial_id),
                clean(&r.participant_id),
                r.condition,
                r.channel,
                fmt_num(r.rmse_deg),
                fmt_num(r.r2),
                r.n_validation
            ),
            ReportRow::Failed { trial_id, participant_id, condition, channel, error } => writeln!(
                s,
                "{},{},{},{},,,,{},{}",
                clean(trial_id),
                clean(participant_id),
                condition,
                channel.map_or("all".to_string(), |c| c.to_string()),
                error.code(),
                clean(&error.to_string())
            ),
        }
        .unwrap();
    }
    s
}

/// Successful reports of an evaluation table; failure rows are skipped.
pub fn reports_from_csv<T: Real>(text: &str) -> Result<Vec<EvalReport<T>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == REPORT_HEADER => {}
        _ => return Err(Error::HeaderMismatch { line: 1, msg: "evaluation report header".into() }),
    }
    let mut out = Vec::new();
    for (i, l) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let line = i + 1;
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse { line, msg: format!("expected 9 fields, found {}", f.len()) });
        }
        if f[7] != "ok" {
            continue;
        }
        let bad = |msg: &str| Error::Parse { line, msg: msg.to_string() };
        out.push(EvalReport {
            trial_id: f[0].to_string(),
            participant_id: f[1].to_string(),
            condition: f[2].parse().map_err(|_| bad("condition"))?,
            channel: f[3].parse().map_err(|_| bad("channel"))?,
            rmse_deg: parse_num(f[4], line)?,
            r2: parse_num(f[5], line)?,
            n_validation: f[6].parse().map_err(|_| bad("n_validation"))?,
        });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str = "condition,channel,n,rmse_mean,rmse_sd,r2_mean,r2_sd,rmse_summary,r2_summary";

/// Mean ± sample standard deviation of both metrics per condition and
/// channel, e.g. `3.3 ± 1.3` degrees.
pub fn summary_to_csv<T: Real>(reports: &[EvalReport<T>]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for cond in Condition::ALL {
        for ch in AngleChannel::ALL {
            let rows: Vec<&EvalReport<T>> = reports.iter().filter(|r| r.condition == cond && r.channel == ch).collect();
            if rows.is_empty() {
                continue;
            }
            let stat = |m: Metric| {
                let v: Vec<T> = rows.iter().map(|r| m.of(r)).collect();
                let mean = crate::scalar::mean(&v);
                let sd = if v.len() > 1 { crate::scalar::sample_variance(&v).sqrt() } else { T::zero() };
                (mean.to_f64_lossy(), sd.to_f64_lossy())
            };
            let (rm, rs) = stat(Metric::Rmse);
            let (qm, qs) = stat(Metric::R2);
            writeln!(
                s,
                "{cond},{ch},{},{},{},{},{},{rm:.1} ± {rs:.1},{qm:.2} ± {qs:.2}",
                rows.len(),
                fmt_num(rm),
                fmt_num(rs),
                fmt_num(qm),
                fmt_num(qs)
            )
            .unwrap();
        }
    }
    s
}

pub const COMPARISON_HEADER: &str = "metric,channel,group_a,group_b,n_a,n_b,mean_a,sd_a,mean_b,sd_b,\
sw_w_a,sw_p_a,sw_w_b,sw_p_b,f_stat,f_df1,f_df2,f_p,welch_t,welch_df,welch_p,significant";

fn test_cols<T: Real>(t: &TestResult<T>) -> String {
    format!("{},{}", fmt_num(t.statistic), fmt_num(t.p_value))
}

pub fn comparisons_to_csv<T: Real>(rows: &[ComparisonResult<T>]) -> String {
    let mut s = format!("{COMPARISON_HEADER}\n");
    let opt = |v: Option<T>| v.map_or(String::new(), fmt_num);
    for c in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.metric,
            c.channel,
            c.group_a,
            c.group_b,
            c.n_a,
            c.n_b,
            fmt_num(c.mean_a),
            fmt_num(c.sd_a),
            fmt_num(c.mean_b),
            fmt_num(c.sd_b),
            test_cols(&c.normality_a),
            test_cols(&c.normality_b),
            fmt_num(c.variance_test.statistic),
            opt(c.variance_test.df),
            opt(c.variance_test.df2),
            fmt_num(c.variance_test.p_value),
            format_args!("{},{},{}", fmt_num(c.welch.statistic), opt(c.welch.df), fmt_num(c.welch.p_value)),
            c.significant
        )
        .unwrap();
    }
    s
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(contents.as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}
