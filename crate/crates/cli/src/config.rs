//! Experiment definition files. One TOML file fully describes a run; the
//! resolved config is digested into the run manifest so every output can be
//! traced back to its exact parameters.

use serde::{Deserialize, Serialize};
use zne_lab::drift::{DriftScenario, Schedule};
use zne_lab::noise::TimedNoiseModel;
use zne_lab::scenario;
use zne_lab::seed::fnv1a64;
use zne_lab::sweep::{AxisSpec, CorrectionFamily, SweepScenario};
use zne_lab::zne::{ExtrapolationMethod, FoldingStrategy, ScaleFactorSet, ZneConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sweep,
    Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub noise_presets: Vec<String>,
    #[serde(default)]
    pub correction_family: CorrectionFamily,
    pub trotter_depths: Vec<usize>,
    pub shots: AxisSpec<u64>,
    pub reps: AxisSpec<usize>,
    pub folding: AxisSpec<FoldingStrategy>,
    pub extrapolation: AxisSpec<ExtrapolationMethod>,
    pub scale_factors: AxisSpec<ScaleFactorSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub noise: TimedNoiseModel,
    pub interval_h: f64,
    pub duration_h: f64,
    pub trotter_depth: usize,
    pub n_shots: u64,
    pub n_reps: usize,
    pub folding: FoldingStrategy,
    pub extrapolation: ExtrapolationMethod,
    pub scale_factors: ScaleFactorSet,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(format!("alpha {} outside (0, 1)", self.alpha));
        }
        match self.kind {
            ExperimentKind::Sweep => {
                let s = self.sweep.as_ref().ok_or("kind = sweep needs a [sweep] section")?;
                if s.noise_presets.is_empty() || s.trotter_depths.is_empty() {
                    return Err("sweep needs at least one noise preset and one depth".into());
                }
                for p in &s.noise_presets {
                    zne_lab::noise::preset(p).map_err(|e| e.to_string())?;
                }
                self.to_sweep_scenario()?
                    .configs()
                    .map_err(|e| e.to_string())?;
            }
            ExperimentKind::Drift => {
                let scenario = self.to_drift_scenario()?;
                scenario.zne.validate().map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }

    pub fn to_sweep_scenario(&self) -> Result<SweepScenario, String> {
        let s = self.sweep.as_ref().ok_or("missing [sweep] section")?;
        Ok(SweepScenario {
            label: self.name.clone(),
            noise_presets: s.noise_presets.clone(),
            trotter_depths: s.trotter_depths.clone(),
            shots: s.shots.clone(),
            reps: s.reps.clone(),
            folding: s.folding.clone(),
            extrapolation: s.extrapolation.clone(),
            scale_factors: s.scale_factors.clone(),
            alpha: self.alpha,
            correction_family: s.correction_family,
        })
    }

    pub fn to_drift_scenario(&self) -> Result<DriftScenario, String> {
        let d = self.drift.as_ref().ok_or("missing [drift] section")?;
        Ok(DriftScenario {
            label: self.name.clone(),
            noise: d.noise.clone(),
            schedule: Schedule::new(d.interval_h, d.duration_h, self.name.clone())
                .map_err(|e| e.to_string())?,
            trotter_depth: d.trotter_depth,
            zne: ZneConfig {
                strategy: d.folding,
                method: d.extrapolation,
                scale_factors: d.scale_factors.clone(),
                n_shots: d.n_shots,
            },
            n_reps: d.n_reps,
            alpha: self.alpha,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Digest of the fully resolved config, stable across platforms.
    pub fn digest_hex(&self) -> String {
        format!("{:016x}", fnv1a64(self.to_toml().as_bytes()))
    }

    /// The shipped one-at-a-time sweep.
    pub fn khan_sweep() -> Self {
        let s = scenario::khan_sweep();
        ExperimentConfig {
            name: s.label.clone(),
            kind: ExperimentKind::Sweep,
            master_seed: scenario::DEFAULT_MASTER_SEED,
            alpha: s.alpha,
            sweep: Some(SweepSection {
                noise_presets: s.noise_presets,
                correction_family: s.correction_family,
                trotter_depths: s.trotter_depths,
                shots: s.shots,
                reps: s.reps,
                folding: s.folding,
                extrapolation: s.extrapolation,
                scale_factors: s.scale_factors,
            }),
            drift: None,
        }
    }

    fn from_drift_scenario(s: DriftScenario) -> Self {
        ExperimentConfig {
            name: s.label.clone(),
            kind: ExperimentKind::Drift,
            master_seed: scenario::DEFAULT_MASTER_SEED,
            alpha: s.alpha,
            sweep: None,
            drift: Some(DriftSection {
                noise: s.noise,
                interval_h: s.schedule.interval_h,
                duration_h: s.schedule.duration_h,
                trotter_depth: s.trotter_depth,
                n_shots: s.zne.n_shots,
                n_reps: s.n_reps,
                folding: s.zne.strategy,
                extrapolation: s.zne.method,
                scale_factors: s.zne.scale_factors,
            }),
        }
    }

    pub fn drift_weekend() -> Self {
        Self::from_drift_scenario(scenario::drift_weekend())
    }

    pub fn drift_day1() -> Self {
        Self::from_drift_scenario(scenario::drift_day1())
    }

    pub fn drift_day2() -> Self {
        Self::from_drift_scenario(scenario::drift_day2())
    }

    pub fn drift_constant_control() -> Self {
        Self::from_drift_scenario(scenario::drift_constant_control())
    }
}


#[cfg(test)]
mod config_file_sync {
    use super::*;
    use std::path::Path;

    // The files under configs/ must stay in lockstep with the built-ins.
    // Run with SYNC_CONFIGS=1 to regenerate them.
    #[test]
    fn shipped_files_match_builtins() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let pairs = [
            ("khan_sweep.toml", ExperimentConfig::khan_sweep()),
            ("drift_weekend.toml", ExperimentConfig::drift_weekend()),
            ("drift_day1.toml", ExperimentConfig::drift_day1()),
            ("drift_day2.toml", ExperimentConfig::drift_day2()),
            ("drift_constant.toml", ExperimentConfig::drift_constant_control()),
        ];
        if std::env::var_os("SYNC_CONFIGS").is_some() {
            std::fs::create_dir_all(&root).unwrap();
            for (file, config) in &pairs {
                std::fs::write(root.join(file), config.to_toml()).unwrap();
            }
        }
        for (file, config) in pairs {
            let path = root.join(file);
            let text = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("{}: {e} (set SYNC_CONFIGS=1 to generate)", path.display()));
            let parsed = ExperimentConfig::parse(&text).unwrap();
            assert_eq!(parsed, config, "{file} drifted from the built-in definition");
        }
    }
}
