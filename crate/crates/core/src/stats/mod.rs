//! The inferential-statistics battery: paired tests, effect sizes,
//! multiplicity corrections, bootstrap power, and drift-severity metrics.

pub mod special;

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use special::{normal_cdf, student_t_two_sided_p};

/// Paired differences `delta_i = |eps_raw,i| - |eps_mit,i|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    deltas: Vec<f64>,
}

impl PairedSample {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.len() < 2 {
            return Err(Error::invalid("paired sample needs at least two deltas"));
        }
        if deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("paired deltas must be finite"));
        }
        Ok(Self { deltas })
    }

    /// Builds the sample from per-repetition raw/mitigated absolute errors.
    pub fn from_abs_errors(raw: &[f64], mitigated: &[f64]) -> Result<Self> {
        if raw.len() != mitigated.len() {
            return Err(Error::invalid("raw and mitigated error lists differ in length"));
        }
        Self::new(raw.iter().zip(mitigated).map(|(r, m)| r.abs() - m.abs()).collect())
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn n(&self) -> usize {
        self.deltas.len()
    }

    pub fn mean(&self) -> f64 {
        self.deltas.iter().sum::<f64>() / self.n() as f64
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.deltas.iter().map(|d| (d - m) * (d - m)).sum();
        (ss / (self.n() - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<f64>,
    pub method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    pub cohens_d: f64,
    pub cliffs_delta: f64,
}

/// Two-sided paired t-test of H0: mean delta = 0.
pub fn paired_t_test(sample: &PairedSample) -> Result<TestResult> {
    let sd = sample.sd();
    if sd == 0.0 {
        return Err(Error::degenerate("zero-variance deltas admit no t statistic"));
    }
    let n = sample.n() as f64;
    let t = sample.mean() / (sd / n.sqrt());
    Ok(TestResult {
        statistic: t,
        p_value: student_t_two_sided_p(t, n - 1.0),
        df: Some(n - 1.0),
        method: "paired-t".into(),
    })
}

/// Two-sided Wilcoxon signed-rank test. Zero deltas are dropped before
/// ranking. Exact null distribution up to 25 nonzero deltas, normal
/// approximation with tie and continuity correction above.
pub fn wilcoxon_signed_rank(sample: &PairedSample) -> Result<TestResult> {
    let nonzero: Vec<f64> = sample.deltas().iter().copied().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::degenerate("all deltas are zero"));
    }
    let n = nonzero.len();
    let ranks = average_ranks_of_magnitudes(&nonzero);
    let w_plus: f64 =
        nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| *r).sum();

    let p = if n <= 25 {
        exact_signed_rank_p(&ranks, w_plus)
    } else {
        // normal approximation with tie correction
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = tie_group_sizes(&nonzero)
            .into_iter()
            .map(|t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if var <= 0.0 {
            return Err(Error::degenerate("zero-variance rank distribution"));
        }
        let diff = w_plus - mean;
        let z = (diff - 0.5 * diff.signum()) / var.sqrt();
        (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0)
    };
    Ok(TestResult { statistic: w_plus, p_value: p, df: None, method: "wilcoxon-signed-rank".into() })
}

/// Ranks of |values| (1-based), with average ranks for ties.
fn average_ranks_of_magnitudes(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].abs().partial_cmp(&values[b].abs()).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len()
            && values[order[j + 1]].abs() == values[order[i]].abs()
        {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn tie_group_sizes(values: &[f64]) -> Vec<usize> {
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::new();
    let mut i = 0;
    while i < mags.len() {
        let mut j = i;
        while j + 1 < mags.len() && mags[j + 1] == mags[i] {
            j += 1;
        }
        if j > i {
            out.push(j - i + 1);
        }
        i = j + 1;
    }
    out
}

/// Exact two-sided p over the 2^n sign-assignment null, computed by dynamic
/// programming over the (doubled, hence integral) rank values.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let scaled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = scaled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    for &u in &scaled {
        for s in (u..=total).rev() {
            counts[s] += counts[s - u];
        }
    }
    let denom = 2.0f64.powi(ranks.len() as i32);
    let w2 = (2.0 * w_plus).round() as usize;
    let le: f64 = counts[..=w2].iter().sum();
    let ge: f64 = counts[w2..].iter().sum();
    (2.0 * le.min(ge) / denom).min(1.0)
}

/// Cohen's d for paired data: mean delta over its sample standard deviation.
pub fn cohens_d(sample: &PairedSample) -> Result<f64> {
    let sd = sample.sd();
    if sd == 0.0 {
        return Err(Error::degenerate("zero-variance deltas admit no effect size"));
    }
    Ok(sample.mean() / sd)
}

/// Cliff's delta on paired differences: `(N_> - N_<) / n`. Zeros count in
/// the denominator only.
pub fn cliffs_delta(sample: &PairedSample) -> f64 {
    let pos = sample.deltas().iter().filter(|d| **d > 0.0).count() as f64;
    let neg = sample.deltas().iter().filter(|d| **d < 0.0).count() as f64;
    (pos - neg) / sample.n() as f64
}

/// Bonferroni adjustment: `min(1, m p)` elementwise.
pub fn bonferroni(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len() as f64;
    p_values.iter().map(|p| (m * p).min(1.0)).collect()
}

/// Benjamini-Hochberg step-up adjusted values, returned in input order.
pub fn benjamini_hochberg(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (1..=m).rev() {
        let idx = order[rank - 1];
        running = running.min(m as f64 * p_values[idx] / rank as f64);
        adjusted[idx] = running.min(1.0);
    }
    adjusted
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub n_reps: usize,
    pub power: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub alpha: f64,
    pub n_boot: usize,
    pub points: Vec<PowerPoint>,
}

impl PowerCurve {
    /// First grid point reaching the target power, if any.
    pub fn smallest_n_reaching(&self, target: f64) -> Option<usize> {
        self.points.iter().find(|p| p.power >= target).map(|p| p.n_reps)
    }
}

/// Bootstrap estimate of the paired t-test's power at each candidate
/// repetition count: resample `n` deltas with replacement `n_boot` times and
/// count rejections at level `alpha`. Degenerate resamples count as
/// non-rejections. Deterministic given the random source.
pub fn bootstrap_power<R: Rng + ?Sized>(
    sample: &PairedSample,
    n_grid: &[usize],
    alpha: f64,
    n_boot: usize,
    rng: &mut R,
) -> Result<PowerCurve> {
    if n_boot < 100 {
        return Err(Error::invalid("n_boot must be at least 100"));
    }
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::invalid("alpha must be in (0, 1)"));
    }
    let deltas = sample.deltas();
    let mut points = Vec::with_capacity(n_grid.len());
    let mut resample = Vec::new();
    for &n in n_grid {
        if n < 2 {
            return Err(Error::invalid("power grid entries must be at least 2"));
        }
        let mut rejections = 0usize;
        for _ in 0..n_boot {
            resample.clear();
            resample.extend((0..n).map(|_| deltas[rng.random_range(0..deltas.len())]));
            let boot = PairedSample { deltas: resample.clone() };
            if let Ok(t) = paired_t_test(&boot) {
                if t.p_value < alpha {
                    rejections += 1;
                }
            }
        }
        let power = rejections as f64 / n_boot as f64;
        let half = 1.96 * (power * (1.0 - power) / n_boot as f64).sqrt();
        points.push(PowerPoint {
            n_reps: n,
            power,
            ci_lo: (power - half).max(0.0),
            ci_hi: (power + half).min(1.0),
        });
    }
    Ok(PowerCurve { alpha, n_boot, points })
}

/// Replicated measurements grouped by time point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    points: Vec<TimePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub time_h: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(points: Vec<TimePoint>) -> Result<Self> {
        if points.iter().any(|p| p.values.is_empty()) {
            return Err(Error::invalid("every time point needs at least one replicate"));
        }
        if points.iter().flat_map(|p| p.values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("replicate values must be finite"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TimePoint] {
        &self.points
    }

    pub fn group_means(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.values.iter().sum::<f64>() / p.values.len() as f64)
            .collect()
    }

    fn grand_mean(&self) -> f64 {
        let (sum, count) = self
            .points
            .iter()
            .fold((0.0, 0usize), |(s, c), p| (s + p.values.iter().sum::<f64>(), c + p.values.len()));
        sum / count as f64
    }
}

/// Fraction of total variance between time points (one-way ANOVA
/// SS_between / SS_total over replicate values).
pub fn eta_squared(series: &TimeSeries) -> Result<f64> {
    if series.points.len() < 2 {
        return Err(Error::invalid("eta squared needs at least two time points"));
    }
    let grand = series.grand_mean();
    let mut ss_between = 0.0;
    let mut ss_total = 0.0;
    for p in &series.points {
        let gm = p.values.iter().sum::<f64>() / p.values.len() as f64;
        ss_between += p.values.len() as f64 * (gm - grand) * (gm - grand);
        ss_total += p.values.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>();
    }
    if ss_total == 0.0 {
        return Err(Error::degenerate("zero total variance"));
    }
    Ok(ss_between / ss_total)
}

/// Lag-1 autocorrelation of an ordered series:
/// `sum (x_t - xbar)(x_{t+1} - xbar) / sum (x_t - xbar)^2`.
pub fn lag1_autocorr(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::invalid("lag-1 autocorrelation needs at least three values"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let denom: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom == 0.0 {
        return Err(Error::degenerate("constant series"));
    }
    let num: f64 = values.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Ok(num / denom)
}

/// One-way random-effects intraclass correlation, ICC(1), with the
/// unequal-group-size adjustment `k0 = (N - sum n_g^2 / N) / (G - 1)`.
/// Negative estimates clamp to zero.
pub fn icc_oneway(series: &TimeSeries) -> Result<f64> {
    let groups = &series.points;
    if groups.len() < 2 {
        return Err(Error::invalid("ICC needs at least two groups"));
    }
    if groups.iter().any(|g| g.values.len() < 2) {
        return Err(Error::invalid("ICC needs at least two replicates per group"));
    }
    let g = groups.len() as f64;
    let n_total: usize = groups.iter().map(|p| p.values.len()).sum();
    let n = n_total as f64;
    let grand = series.grand_mean();
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for p in groups {
        let gm = p.values.iter().sum::<f64>() / p.values.len() as f64;
        ss_between += p.values.len() as f64 * (gm - grand) * (gm - grand);
        ss_within += p.values.iter().map(|v| (v - gm) * (v - gm)).sum::<f64>();
    }
    let ms_between = ss_between / (g - 1.0);
    let ms_within = ss_within / (n - g);
    if ms_between == 0.0 && ms_within == 0.0 {
        return Err(Error::degenerate("no variance in any group"));
    }
    let sq_sizes: f64 = groups.iter().map(|p| (p.values.len() as f64).powi(2)).sum();
    let k0 = (n - sq_sizes / n) / (g - 1.0);
    let icc = (ms_between - ms_within) / (ms_between + (k0 - 1.0) * ms_within);
    Ok(icc.clamp(0.0, 1.0))
}

/// Kish's effective sample size `n / (1 + (n - 1) icc)`.
pub fn kish_neff(n: usize, icc: f64) -> f64 {
    let nf = n as f64;
    nf / (1.0 + (nf - 1.0) * icc)
}

/// Effect-size estimate from reported summary values:
/// `(e_mit - e_raw) / sigma_improvement`.
pub fn estimate_d_from_summary(e_raw: f64, e_mit: f64, sigma_improvement: f64) -> Result<f64> {
    if sigma_improvement <= 0.0 || !sigma_improvement.is_finite() {
        return Err(Error::invalid("sigma_improvement must be positive"));
    }
    Ok((e_mit - e_raw) / sigma_improvement)
}

/// Multiplicative circuit fidelity bound `(1 - p)^m`.
pub fn circuit_fidelity_bound(p: f64, m: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    (1.0 - p).powi(m as i32)
}

/// Ordinary least squares slope of `ln y` against `ln x`; all inputs must be
/// positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("need matching x/y lists with at least two points"));
    }
    if xs.iter().chain(ys.iter()).any(|v| *v <= 0.0) {
        return Err(Error::invalid("log-log regression needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::degenerate("zero spread in x"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
