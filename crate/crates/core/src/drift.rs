//! Longitudinal harness: repeated identical ZNE experiments across simulated
//! wall-clock time, and the drift-severity metrics over the outcome.

use crate::error::{Error, Result};
use crate::noise::TimedNoiseModel;
use crate::scenario;
use crate::seed::{derive_seed2, fnv1a64};
use crate::sim::{expectation, simulate};
use crate::stats::{
    cohens_d, eta_squared, icc_oneway, kish_neff, lag1_autocorr, paired_t_test,
    special::student_t_two_sided_p, PairedSample, TimePoint, TimeSeries,
};
use crate::sweep::{classify, ConfigPoint, OutcomeClass};
use crate::zne::ZneKernel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Evenly spaced measurement schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub interval_h: f64,
    pub duration_h: f64,
    pub label: String,
}

impl Schedule {
    pub fn new(interval_h: f64, duration_h: f64, label: impl Into<String>) -> Result<Self> {
        if !(interval_h > 0.0) {
            return Err(Error::invalid("schedule interval must be positive"));
        }
        if duration_h < interval_h {
            return Err(Error::invalid("schedule duration must cover at least one interval"));
        }
        Ok(Self { interval_h, duration_h, label: label.into() })
    }

    /// Times 0, dt, 2dt, ...; `floor(duration/interval) + 1` points.
    pub fn time_points(&self) -> Vec<f64> {
        let n = (self.duration_h / self.interval_h).floor() as usize + 1;
        (0..n).map(|i| i as f64 * self.interval_h).collect()
    }
}

/// A longitudinal experiment definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScenario {
    pub label: String,
    pub noise: TimedNoiseModel,
    pub schedule: Schedule,
    pub trotter_depth: usize,
    pub zne: crate::zne::ZneConfig,
    pub n_reps: usize,
    pub alpha: f64,
}

impl DriftScenario {
    pub fn config_point(&self) -> ConfigPoint {
        ConfigPoint {
            noise_preset: format!("drift:{}", self.label),
            trotter_depth: self.trotter_depth,
            n_shots: self.zne.n_shots,
            n_reps: self.n_reps,
            folding: self.zne.strategy,
            extrapolation: self.zne.method,
            scale_factors: self.zne.scale_factors.clone(),
            swept: None,
            variant_label: "default".into(),
        }
    }
}

/// Per-time-point raw and mitigated estimates of one longitudinal run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongitudinalResult {
    pub label: String,
    pub times: Vec<f64>,
    /// raw (lambda_1) estimates, one inner vec per time point
    pub raw: Vec<Vec<f64>>,
    /// mitigated estimates, same shape
    pub mitigated: Vec<Vec<f64>>,
    pub e_ideal: f64,
    pub n_reps: usize,
    pub config_digest: u64,
    pub master_seed: u64,
}

impl LongitudinalResult {
    /// Per-time-point paired samples `|eps_raw| - |eps_mit|`.
    pub fn per_time_point_samples(&self) -> Result<Vec<PairedSample>> {
        self.raw
            .iter()
            .zip(&self.mitigated)
            .map(|(r, m)| {
                let deltas = r
                    .iter()
                    .zip(m)
                    .map(|(r, m)| (r - self.e_ideal).abs() - (m - self.e_ideal).abs())
                    .collect();
                PairedSample::new(deltas)
            })
            .collect()
    }

    /// Per-time-point Cohen's d of mitigated vs raw error.
    pub fn per_time_point_d(&self) -> Result<Vec<f64>> {
        self.per_time_point_samples()?.iter().map(cohens_d).collect()
    }

    /// Raw lambda_1 estimates grouped by time point.
    pub fn raw_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(
            self.times
                .iter()
                .zip(&self.raw)
                .map(|(&t, v)| TimePoint { time_h: t, values: v.clone() })
                .collect(),
        )
    }
}

/// Runs `n_reps` independent ZNE repetitions at every scheduled time point.
/// Noise is a pure function of the scheduled time, so time points execute in
/// parallel; the seed of cell `(t, i)` is derived from
/// `(master_seed, digest, t, i)`.
pub fn run_longitudinal(
    config: &ConfigPoint,
    noise: &TimedNoiseModel,
    schedule: &Schedule,
    n_reps: usize,
    master_seed: u64,
) -> Result<LongitudinalResult> {
    if n_reps < 2 {
        return Err(Error::invalid("n_reps must be at least 2"));
    }
    let circuit = scenario::qtc(config.trotter_depth)?;
    let observable = scenario::default_observable();
    let e_ideal = expectation(
        &simulate(&circuit, &TimedNoiseModel::ideal(), 0.0)?,
        &observable,
    )?;
    let digest = fnv1a64(
        format!("{}|schedule={},{}", config.canonical_string(), schedule.interval_h, schedule.duration_h)
            .as_bytes(),
    );
    let times = schedule.time_points();
    let zcfg = config.zne_config();
    let cells: Vec<(Vec<f64>, Vec<f64>)> = times
        .par_iter()
        .enumerate()
        .map(|(ti, &t)| -> Result<(Vec<f64>, Vec<f64>)> {
            let kernel = ZneKernel::prepare(&circuit, &observable, noise, &zcfg, t)?;
            let mut raw = Vec::with_capacity(n_reps);
            let mut mit = Vec::with_capacity(n_reps);
            for rep in 0..n_reps {
                let seed = derive_seed2(master_seed, digest, ti as u64, rep as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let est = kernel.sample(&mut rng)?;
                raw.push(est.raw_value);
                mit.push(est.mitigated_value);
            }
            Ok((raw, mit))
        })
        .collect::<Result<_>>()?;
    let (raw, mitigated) = cells.into_iter().unzip();
    Ok(LongitudinalResult {
        label: schedule.label.clone(),
        times,
        raw,
        mitigated,
        e_ideal,
        n_reps,
        config_digest: digest,
        master_seed,
    })
}

/// Convenience entry point for a whole scenario.
pub fn run_scenario(scenario: &DriftScenario, master_seed: u64) -> Result<LongitudinalResult> {
    run_longitudinal(
        &scenario.config_point(),
        &scenario.noise,
        &scenario.schedule,
        scenario.n_reps,
        master_seed,
    )
}

/// Drift-severity metrics over a longitudinal run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSeverity {
    /// Fraction of total variance between time points.
    pub eta_squared: f64,
    /// Lag-1 autocorrelation of the per-time-point means.
    pub r1: f64,
    /// Within-time-point intraclass correlation, ICC(1), clamped to [0, 1].
    pub icc: f64,
    /// Kish effective repetitions per time point.
    pub n_eff: f64,
    pub d_min: f64,
    pub d_max: f64,
}

pub fn severity(result: &LongitudinalResult) -> Result<DriftSeverity> {
    if result.times.len() < 3 {
        return Err(Error::invalid("severity metrics need at least three time points"));
    }
    let series = result.raw_series()?;
    let eta = eta_squared(&series)?;
    let icc = icc_oneway(&series)?;
    let r1 = lag1_autocorr(&series.group_means())?;
    let ds = result.per_time_point_d()?;
    let d_min = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DriftSeverity {
        eta_squared: eta,
        r1,
        icc,
        n_eff: kish_neff(result.n_reps, icc),
        d_min,
        d_max,
    })
}

/// How apparent effectiveness varies purely with execution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllusionReport {
    pub severity: DriftSeverity,
    pub d_min: f64,
    pub d_max: f64,
    /// `d_max / d_min`; absent when the extremal effects straddle zero.
    pub illusion_ratio: Option<f64>,
    pub sign_crossing: bool,
    pub per_time_point_classes: Vec<OutcomeClass>,
    /// Set when the extremal time points disagree about significance once
    /// the effective sample size replaces the nominal one.
    pub neff_significance_flip: bool,
}

/// Significance of effect `d` at level `alpha` with the effective sample
/// size in place of the nominal count: t = d sqrt(n_eff) on
/// `max(1, round(n_eff) - 1)` degrees of freedom.
pub fn neff_adjusted_significant(d: f64, n_eff: f64, alpha: f64) -> bool {
    let df = ((n_eff.round() as i64) - 1).max(1) as f64;
    student_t_two_sided_p(d * n_eff.sqrt(), df) < alpha
}

pub fn illusion_report(result: &LongitudinalResult, alpha: f64) -> Result<IllusionReport> {
    let sev = severity(result)?;
    let samples = result.per_time_point_samples()?;
    let ds = result.per_time_point_d()?;
    let classes = samples
        .iter()
        .zip(&ds)
        .map(|(s, &d)| match paired_t_test(s) {
            Ok(t) => classify(&t, d, alpha),
            Err(_) => OutcomeClass::Degenerate,
        })
        .collect();
    let both_positive = sev.d_min > 0.0 && sev.d_max > 0.0;
    let flip = neff_adjusted_significant(sev.d_max, sev.n_eff, alpha)
        != neff_adjusted_significant(sev.d_min, sev.n_eff, alpha);
    Ok(IllusionReport {
        severity: sev,
        d_min: sev.d_min,
        d_max: sev.d_max,
        illusion_ratio: both_positive.then(|| sev.d_max / sev.d_min),
        sign_crossing: !both_positive,
        per_time_point_classes: classes,
        neff_significance_flip: flip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{DriftProfile, NoiseSpec};
    use crate::scenario::default_zne_config;

    fn quick_scenario(drift: DriftProfile, duration_h: f64) -> DriftScenario {
        let mut zne = default_zne_config();
        zne.n_shots = 512;
        DriftScenario {
            label: "test".into(),
            noise: TimedNoiseModel {
                base: NoiseSpec::GlobalDepolarising { p1: 0.001, p2: 0.01 },
                drift,
            },
            schedule: Schedule::new(1.0, duration_h, "test").unwrap(),
            trotter_depth: 1,
            zne,
            n_reps: 6,
            alpha: 0.05,
        }
    }

    #[test]
    fn schedule_point_counts() {
        assert_eq!(Schedule::new(0.5, 12.0, "d").unwrap().time_points().len(), 25);
        assert_eq!(Schedule::new(0.5, 48.0, "w").unwrap().time_points().len(), 97);
        assert_eq!(Schedule::new(2.0, 7.0, "odd").unwrap().time_points().len(), 4);
        assert!(Schedule::new(0.0, 12.0, "bad").is_err());
        assert!(Schedule::new(2.0, 1.0, "bad").is_err());
    }

    #[test]
    fn longitudinal_run_is_reproducible_and_shaped() {
        let sc = quick_scenario(DriftProfile::Constant, 5.0);
        let a = run_scenario(&sc, 7).unwrap();
        let b = run_scenario(&sc, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times.len(), 6);
        assert!(a.raw.iter().all(|r| r.len() == 6));
    }

    #[test]
    fn step_change_shifts_time_point_means() {
        let sc = quick_scenario(DriftProfile::StepChange { t0_h: 2.5, delta: 0.08 }, 5.0);
        let r = run_scenario(&sc, 3).unwrap();
        let means: Vec<f64> =
            r.raw.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let before = (means[0] + means[1] + means[2]) / 3.0;
        let after = (means[3] + means[4] + means[5]) / 3.0;
        // higher error rate after the step -> visibly smaller raw signal
        assert!(before - after > 0.05, "before {before}, after {after}");
    }

    #[test]
    fn severity_reports_kish_identity_when_icc_zero() {
        // independent replicates make ICC clamp to ~0, so n_eff ~ n_reps
        let sc = quick_scenario(DriftProfile::Constant, 6.0);
        let r = run_scenario(&sc, 11).unwrap();
        let sev = severity(&r).unwrap();
        assert!(sev.icc < 0.3);
        assert!(sev.n_eff > sc.n_reps as f64 * 0.5);
    }

    #[test]
    fn neff_adjustment_can_flip_significance() {
        // moderate effect: clearly significant at n = 30, not at n_eff = 4
        assert!(neff_adjusted_significant(0.8, 30.0, 0.05));
        assert!(!neff_adjusted_significant(0.8, 4.0, 0.05));
    }

    #[test]
    fn identical_deltas_give_unit_ratio() {
        // time points shift but the per-point deltas are identical
        let r = LongitudinalResult {
            label: "synthetic".into(),
            times: vec![0.0, 1.0, 2.0],
            raw: vec![vec![0.3, 0.4, 0.5], vec![0.4, 0.5, 0.6], vec![0.5, 0.6, 0.7]],
            mitigated: vec![vec![0.1, 0.15, 0.2], vec![0.2, 0.25, 0.3], vec![0.3, 0.35, 0.4]],
            e_ideal: 0.0,
            n_reps: 3,
            config_digest: 0,
            master_seed: 0,
        };
        let rep = illusion_report(&r, 0.05).unwrap();
        let ratio = rep.illusion_ratio.unwrap();
        assert!((ratio - 1.0).abs() < 1e-9);
        assert!(!rep.sign_crossing);
    }

    #[test]
    fn sign_crossing_replaces_ratio() {
        let r = LongitudinalResult {
            label: "synthetic".into(),
            times: vec![0.0, 1.0, 2.0],
            raw: vec![vec![0.3, 0.4, 0.5], vec![0.1, 0.15, 0.2], vec![0.3, 0.4, 0.5]],
            mitigated: vec![vec![0.1, 0.15, 0.2], vec![0.3, 0.4, 0.5], vec![0.1, 0.15, 0.2]],
            e_ideal: 0.0,
            n_reps: 3,
            config_digest: 0,
            master_seed: 0,
        };
        let rep = illusion_report(&r, 0.05).unwrap();
        assert_eq!(rep.illusion_ratio, None);
        assert!(rep.sign_crossing);
    }
}
