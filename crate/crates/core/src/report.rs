//! Plot-ready CSV emission. Schemas are fixed: column order is stable,
//! numbers carry 12 significant digits, line endings are LF.

use crate::drift::LongitudinalResult;
use crate::error::Result;
use crate::stats::{paired_t_test, special::student_t_critical, PowerCurve};
use crate::sweep::{classify, ConfigResult, OutcomeClass};

/// Formats with 12 significant digits (%.12g style): plain decimal notation
/// in a readable exponent range, scientific otherwise, trailing zeros
/// trimmed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if trimmed == "-0" {
            "0".into()
        } else {
            trimmed
        }
    } else {
        format!("{x:.11e}")
    }
}

fn opt12(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt12)
}

fn class_label(c: Option<OutcomeClass>) -> &'static str {
    c.map_or("unclassified", |c| c.label())
}

pub const HEATMAP_HEADER: &str = "noise_preset,trotter_depth,axis,variant,n_reps,mean_delta,\
cohens_d,cliffs_delta,p_raw,p_bonf,p_bh,class_raw,class_bonf,class_bh";

/// One row per executed configuration, in execution order.
pub fn heatmap_csv(results: &[ConfigResult]) -> String {
    let mut out = String::from(HEATMAP_HEADER);
    out.push('\n');
    for r in results {
        let d = r.effects.as_ref().map(|e| e.cohens_d);
        let cliff = r.effects.as_ref().map(|e| e.cliffs_delta);
        let p_raw = r.t_result.as_ref().map(|t| t.p_value);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.config.noise_preset,
            r.config.trotter_depth,
            r.config.axis_label(),
            r.config.variant_label,
            r.n_reps,
            fmt12(r.mean_delta),
            opt12(d),
            opt12(cliff),
            opt12(p_raw),
            opt12(r.p_bonferroni),
            opt12(r.p_bh),
            r.class_raw.label(),
            class_label(r.class_bonferroni),
            class_label(r.class_bh),
        ));
    }
    out
}

pub const TIMESERIES_HEADER: &str =
    "session,time_h,mean_raw,ci95_lo,ci95_hi,mean_mitigated,cohens_d,class";

/// One row per time point of a longitudinal run with a t-based 95% CI on the
/// raw mean.
pub fn timeseries_csv(result: &LongitudinalResult, alpha: f64) -> Result<String> {
    let samples = result.per_time_point_samples()?;
    let ds = result.per_time_point_d()?;
    let n = result.n_reps as f64;
    let t_crit = student_t_critical(0.05, n - 1.0);
    let mut out = String::from(TIMESERIES_HEADER);
    out.push('\n');
    for (i, &t) in result.times.iter().enumerate() {
        let raw = &result.raw[i];
        let mean_raw = raw.iter().sum::<f64>() / n;
        let sd_raw = (raw.iter().map(|v| (v - mean_raw) * (v - mean_raw)).sum::<f64>()
            / (n - 1.0))
            .sqrt();
        let half = t_crit * sd_raw / n.sqrt();
        let mean_mit = result.mitigated[i].iter().sum::<f64>() / n;
        let class = match paired_t_test(&samples[i]) {
            Ok(res) => classify(&res, ds[i], alpha),
            Err(_) => OutcomeClass::Degenerate,
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            result.label,
            fmt12(t),
            fmt12(mean_raw),
            fmt12(mean_raw - half),
            fmt12(mean_raw + half),
            fmt12(mean_mit),
            fmt12(ds[i]),
            class.label(),
        ));
    }
    Ok(out)
}

pub const POWER_HEADER: &str = "n_reps,power,ci_lo,ci_hi";

pub fn power_csv(curve: &PowerCurve) -> String {
    let mut out = String::from(POWER_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.n_reps,
            fmt12(p.power),
            fmt12(p.ci_lo),
            fmt12(p.ci_hi)
        ));
    }
    out
}
