//! Hypothesis tests used to compare estimation accuracy between conditions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{AngleChannel, Condition};
use crate::regress::EvalReport;
use crate::scalar::{mean, sample_variance, Real};
use crate::special::{f_upper_tail, normal_quantile, normal_sf, student_t_two_sided};

/// Significance level used for every comparison.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    ShapiroWilk,
    FVariance,
    WelchT,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::ShapiroWilk => "shapiro_wilk",
            TestKind::FVariance => "f_var",
            TestKind::WelchT => "welch_t",
        })
    }
}

/// Statistic, p-value and degrees of freedom of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult<T = f64> {
    pub kind: TestKind,
    pub statistic: T,
    pub p_value: T,
    /// Degrees of freedom (numerator for the F-test, Welch–Satterthwaite for t).
    pub df: Option<T>,
    /// Denominator degrees of freedom of the F-test.
    pub df2: Option<T>,
}

fn clamp_p<T: Real>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

/// Largest sample accepted by [`shapiro_wilk`].
pub const SHAPIRO_MAX_N: usize = 5000;

fn poly<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Upper half of Royston's antisymmetric Shapiro–Wilk coefficients for
/// sample size `n ≥ 3`; element `i` weights `x[n-1-i] - x[i]` of the sorted
/// sample.
pub fn shapiro_coefficients<T: Real>(n: usize) -> Vec<T> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    assert!(n >= 3, "Shapiro-Wilk needs at least 3 samples");
    let half = n / 2;
    let an = T::from_usize_lossy(n);
    let mut a = vec![T::zero(); half];
    if n == 3 {
        a[0] = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    } else {
        let an25 = an + T::lit(0.25);
        let m: Vec<T> = (1..=half)
            .map(|i| normal_quantile((T::from_usize_lossy(i) - T::lit(0.375)) / an25))
            .collect();
        let summ2 = T::lit(2.0) * m.iter().map(|&v| v * v).sum::<T>();
        let ssumm2 = summ2.sqrt();
        let rsn = T::one() / an.sqrt();
        let two = T::lit(2.0);
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - two * m[0] * m[0] - two * m[1] * m[1])
                / (T::one() - two * a1 * a1 - two * a2 * a2))
                .sqrt();
            a[1] = a2;
            (2, fac)
        } else {
            let fac = ((summ2 - two * m[0] * m[0]) / (T::one() - two * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    a
}

/// Shapiro–Wilk W test with Royston's coefficient approximation and p-value
/// transform (algorithm AS R94), valid for `3 ≤ n ≤ 5000`.
pub fn shapiro_wilk<T: Real>(sample: &[T]) -> Result<TestResult<T>> {
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = sample.len();
    if n < 3 {
        return Err(Error::TooShort { len: n, min: 3 });
    }
    if n > SHAPIRO_MAX_N {
        return Err(Error::TooLarge { len: n, max: SHAPIRO_MAX_N });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "sample" });
    }
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let range = x[n - 1] - x[0];
    if !(range > T::zero()) {
        return Err(Error::DegenerateSample);
    }

    let half = n / 2;
    let an = T::from_usize_lossy(n);
    let a = shapiro_coefficients::<T>(n);

    // Work on range-scaled data for conditioning.
    let xs: Vec<T> = x.iter().map(|&v| (v - x[0]) / range).collect();
    let b: T = (0..half).map(|i| a[i] * (xs[n - 1 - i] - xs[i])).sum();
    let mx = mean(&xs);
    let ss: T = xs.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let w = (b * b / ss).min(T::one());

    let p = if n == 3 {
        let pi6 = T::lit(6.0 / std::f64::consts::PI);
        let stqr = T::lit(std::f64::consts::FRAC_PI_3);
        (pi6 * (w.sqrt().asin() - stqr)).max(T::zero())
    } else {
        let w1 = T::one() - w;
        if w1 <= T::zero() {
            T::one()
        } else {
            let mut y = w1.ln();
            let lnn = an.ln();
            let (m, s) = if n <= 11 {
                let gamma = poly(&G, an);
                if y >= gamma {
                    // W is so small that the approximation saturates.
                    return Ok(TestResult { kind: TestKind::ShapiroWilk, statistic: w, p_value: T::lit(1e-99), df: None, df2: None });
                }
                y = -(gamma - y).ln();
                (poly(&C3, an), poly(&C4, an).exp())
            } else {
                (poly(&C5, lnn), poly(&C6, lnn).exp())
            };
            normal_sf((y - m) / s)
        }
    };
    Ok(TestResult { kind: TestKind::ShapiroWilk, statistic: w, p_value: clamp_p(p), df: None, df2: None })
}

/// Two-sample F-test for equal variances.
///
/// `F` is the larger sample variance over the smaller (divisor `n − 1`), and
/// the p-value doubles the upper tail, capped at 1.
pub fn f_test_var<T: Real>(a: &[T], b: &[T]) -> Result<TestResult<T>> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::TooShort { len: s.len(), min: 2 });
        }
    }
    let (va, vb) = (sample_variance(a), sample_variance(b));
    if !(va > T::zero()) || !(vb > T::zero()) {
        return Err(Error::DegenerateSample);
    }
    let (top, bottom, n_top, n_bottom) =
        if vb > va { (vb, va, b.len(), a.len()) } else { (va, vb, a.len(), b.len()) };
    let f = top / bottom;
    let d1 = T::from_usize_lossy(n_top - 1);
    let d2 = T::from_usize_lossy(n_bottom - 1);
    let p = (T::lit(2.0) * f_upper_tail(f, d1, d2)).min(T::one());
    Ok(TestResult { kind: TestKind::FVariance, statistic: f, p_value: clamp_p(p), df: Some(d1), df2: Some(d2) })
}

/// Welch's unequal-variance t-test, two-sided, with Welch–Satterthwaite
/// degrees of freedom.
pub fn welch_t<T: Real>(a: &[T], b: &[T]) -> Result<TestResult<T>> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::TooShort { len: s.len(), min: 2 });
        }
    }
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (ma, mb) = (mean(a), mean(b));
    let (qa, qb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = qa + qb;
    let diff = ma - mb;
    if !(se2 > T::zero()) {
        if diff == T::zero() {
            return Err(Error::DegenerateBoth);
        }
        let t = if diff > T::zero() { T::infinity() } else { T::neg_infinity() };
        let df = na + nb - T::lit(2.0);
        return Ok(TestResult { kind: TestKind::WelchT, statistic: t, p_value: T::zero(), df: Some(df), df2: None });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (na - T::one()) + qb * qb / (nb - T::one()));
    let p = student_t_two_sided(t, df);
    Ok(TestResult { kind: TestKind::WelchT, statistic: t, p_value: clamp_p(p), df: Some(df), df2: None })
}

/// Accuracy metric compared across conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Rmse,
    R2,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Rmse, Metric::R2];

    pub fn of<T: Real>(self, report: &EvalReport<T>) -> T {
        match self {
            Metric::Rmse => report.rmse_deg,
            Metric::R2 => report.r2,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Rmse => "rmse",
            Metric::R2 => "r2",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rmse" => Ok(Metric::Rmse),
            "r2" => Ok(Metric::R2),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// Full two-group comparison of one metric on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult<T = f64> {
    pub metric: Metric,
    pub channel: AngleChannel,
    pub group_a: Condition,
    pub group_b: Condition,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: T,
    pub sd_a: T,
    pub mean_b: T,
    pub sd_b: T,
    pub normality_a: TestResult<T>,
    pub normality_b: TestResult<T>,
    pub variance_test: TestResult<T>,
    pub welch: TestResult<T>,
    /// `welch.p_value < 0.05`.
    pub significant: bool,
}

/// Minimum number of reports per group.
pub const MIN_GROUP: usize = 3;

/// Extracts `metric` for `channel` from both groups and runs the normality,
/// variance and Welch tests.
pub fn compare_conditions<T: Real>(
    reports_a: &[EvalReport<T>],
    reports_b: &[EvalReport<T>],
    metric: Metric,
    channel: AngleChannel,
) -> Result<ComparisonResult<T>> {
    let pick = |reports: &[EvalReport<T>]| -> Result<(Vec<T>, Condition)> {
        let rows: Vec<&EvalReport<T>> = reports.iter().filter(|r| r.channel == channel).collect();
        if rows.len() < MIN_GROUP {
            return Err(Error::InsufficientGroup { len: rows.len(), min: MIN_GROUP });
        }
        Ok((rows.iter().map(|r| metric.of(r)).collect(), rows[0].condition))
    };
    let (a, group_a) = pick(reports_a)?;
    let (b, group_b) = pick(reports_b)?;
    let welch = welch_t(&a, &b)?;
    Ok(ComparisonResult {
        metric,
        channel,
        group_a,
        group_b,
        n_a: a.len(),
        n_b: b.len(),
        mean_a: mean(&a),
        sd_a: sample_variance(&a).sqrt(),
        mean_b: mean(&b),
        sd_b: sample_variance(&b).sqrt(),
        normality_a: shapiro_wilk(&a)?,
        normality_b: shapiro_wilk(&b)?,
        variance_test: f_test_var(&a, &b)?,
        significant: welch.p_value < T::lit(ALPHA),
        welch,
    })
}
