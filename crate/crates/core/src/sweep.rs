//! The reproduction pipeline: parameter-space definition, one-at-a-time
//! enumeration, repeated execution with the statistics battery, and
//! classification into active/inert parameters.

use crate::error::{Error, Result};
use crate::noise::preset;
use crate::scenario;
use crate::seed::{derive_seed, fnv1a64};
use crate::sim::{expectation, simulate};
use crate::stats::{
    benjamini_hochberg, bonferroni, cliffs_delta, cohens_d, paired_t_test, wilcoxon_signed_rank,
    EffectSizes, PairedSample, TestResult,
};
use crate::zne::{ExtrapolationMethod, FoldingStrategy, ScaleFactorSet, ZneConfig, ZneKernel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeClass {
    SignificantlyBetter,
    NotSignificant,
    SignificantlyWorse,
    Degenerate,
}

impl OutcomeClass {
    pub fn label(&self) -> &'static str {
        match self {
            OutcomeClass::SignificantlyBetter => "significantly-better",
            OutcomeClass::NotSignificant => "not-significant",
            OutcomeClass::SignificantlyWorse => "significantly-worse",
            OutcomeClass::Degenerate => "degenerate",
        }
    }
}

/// Whether a parameter value came from the original experiment's
/// documentation, was an assumed default, or is a swept alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Documented,
    UndocumentedDefault,
    SweptAlternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisId {
    NoisePreset,
    TrotterDepth,
    Shots,
    Reps,
    Folding,
    Extrapolation,
    ScaleFactors,
}

impl AxisId {
    pub const ALL: [AxisId; 7] = [
        AxisId::NoisePreset,
        AxisId::TrotterDepth,
        AxisId::Shots,
        AxisId::Reps,
        AxisId::Folding,
        AxisId::Extrapolation,
        AxisId::ScaleFactors,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            AxisId::NoisePreset => "noise",
            AxisId::TrotterDepth => "depth",
            AxisId::Shots => "shots",
            AxisId::Reps => "reps",
            AxisId::Folding => "folding",
            AxisId::Extrapolation => "extrapolation",
            AxisId::ScaleFactors => "scale_factors",
        }
    }
}

/// One axis of the parameter space: a default plus swept alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec<T> {
    pub default: T,
    #[serde(default = "Vec::new")]
    pub alternatives: Vec<T>,
    pub provenance: Provenance,
}

impl<T: PartialEq> AxisSpec<T> {
    pub fn documented(default: T) -> Self {
        Self { default, alternatives: Vec::new(), provenance: Provenance::Documented }
    }

    pub fn assumed(default: T, alternatives: Vec<T>) -> Self {
        Self { default, alternatives, provenance: Provenance::UndocumentedDefault }
    }

    fn validate(&self, axis: AxisId) -> Result<()> {
        if self.alternatives.iter().any(|a| *a == self.default) {
            return Err(Error::invalid(format!(
                "axis {} lists its default among the alternatives",
                axis.label()
            )));
        }
        Ok(())
    }
}

/// The six-axis reproduction parameter space for one experiment family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub noise: AxisSpec<String>,
    pub depth: AxisSpec<usize>,
    pub shots: AxisSpec<u64>,
    pub reps: AxisSpec<usize>,
    pub folding: AxisSpec<FoldingStrategy>,
    pub extrapolation: AxisSpec<ExtrapolationMethod>,
    pub scale_factors: AxisSpec<ScaleFactorSet>,
}

impl ParameterSpace {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate(AxisId::NoisePreset)?;
        self.depth.validate(AxisId::TrotterDepth)?;
        self.shots.validate(AxisId::Shots)?;
        self.reps.validate(AxisId::Reps)?;
        self.folding.validate(AxisId::Folding)?;
        self.extrapolation.validate(AxisId::Extrapolation)?;
        self.scale_factors.validate(AxisId::ScaleFactors)?;
        Ok(())
    }

    fn baseline(&self) -> ConfigPoint {
        ConfigPoint {
            noise_preset: self.noise.default.clone(),
            trotter_depth: self.depth.default,
            n_shots: self.shots.default,
            n_reps: self.reps.default,
            folding: self.folding.default,
            extrapolation: self.extrapolation.default,
            scale_factors: self.scale_factors.default.clone(),
            swept: None,
            variant_label: "default".into(),
        }
    }
}

/// One fully specified experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub noise_preset: String,
    pub trotter_depth: usize,
    pub n_shots: u64,
    pub n_reps: usize,
    pub folding: FoldingStrategy,
    pub extrapolation: ExtrapolationMethod,
    pub scale_factors: ScaleFactorSet,
    /// Axis deviating from the defaults; `None` marks the baseline.
    pub swept: Option<AxisId>,
    pub variant_label: String,
}

impl ConfigPoint {
    /// Stable textual form used for digests and seed derivation.
    pub fn canonical_string(&self) -> String {
        format!(
            "noise={};depth={};shots={};reps={};folding={};extrapolation={};scales={}",
            self.noise_preset,
            self.trotter_depth,
            self.n_shots,
            self.n_reps,
            self.folding.label(),
            self.extrapolation.label(),
            self.scale_factors.label(),
        )
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }

    pub fn axis_label(&self) -> &str {
        self.swept.map_or("baseline", |a| a.label())
    }

    pub fn provenance(&self, axis: AxisId, space: &ParameterSpace) -> Provenance {
        if self.swept == Some(axis) {
            return Provenance::SweptAlternative;
        }
        match axis {
            AxisId::NoisePreset => space.noise.provenance,
            AxisId::TrotterDepth => space.depth.provenance,
            AxisId::Shots => space.shots.provenance,
            AxisId::Reps => space.reps.provenance,
            AxisId::Folding => space.folding.provenance,
            AxisId::Extrapolation => space.extrapolation.provenance,
            AxisId::ScaleFactors => space.scale_factors.provenance,
        }
    }

    pub fn zne_config(&self) -> ZneConfig {
        ZneConfig {
            strategy: self.folding,
            method: self.extrapolation,
            scale_factors: self.scale_factors.clone(),
            n_shots: self.n_shots,
        }
    }
}

/// Baseline first, then one configuration per (axis, alternative) pair, in
/// axis declaration order.
pub fn enumerate_oat(space: &ParameterSpace) -> Result<Vec<ConfigPoint>> {
    space.validate()?;
    let base = space.baseline();
    let mut out = vec![base.clone()];
    for n in &space.noise.alternatives {
        let mut c = base.clone();
        c.noise_preset = n.clone();
        c.swept = Some(AxisId::NoisePreset);
        c.variant_label = n.clone();
        out.push(c);
    }
    for &d in &space.depth.alternatives {
        let mut c = base.clone();
        c.trotter_depth = d;
        c.swept = Some(AxisId::TrotterDepth);
        c.variant_label = d.to_string();
        out.push(c);
    }
    for &s in &space.shots.alternatives {
        let mut c = base.clone();
        c.n_shots = s;
        c.swept = Some(AxisId::Shots);
        c.variant_label = s.to_string();
        out.push(c);
    }
    for &r in &space.reps.alternatives {
        let mut c = base.clone();
        c.n_reps = r;
        c.swept = Some(AxisId::Reps);
        c.variant_label = r.to_string();
        out.push(c);
    }
    for &f in &space.folding.alternatives {
        let mut c = base.clone();
        c.folding = f;
        c.swept = Some(AxisId::Folding);
        c.variant_label = f.label().to_string();
        out.push(c);
    }
    for &e in &space.extrapolation.alternatives {
        let mut c = base.clone();
        c.extrapolation = e;
        c.swept = Some(AxisId::Extrapolation);
        c.variant_label = e.label();
        out.push(c);
    }
    for s in &space.scale_factors.alternatives {
        let mut c = base.clone();
        c.scale_factors = s.clone();
        c.swept = Some(AxisId::ScaleFactors);
        c.variant_label = s.label();
        out.push(c);
    }
    Ok(out)
}

/// Full statistics for one executed configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: ConfigPoint,
    pub n_reps: usize,
    pub e_ideal: f64,
    pub mean_delta: f64,
    pub paired: PairedSample,
    pub t_result: Option<TestResult>,
    pub wilcoxon: Option<TestResult>,
    pub effects: Option<EffectSizes>,
    pub p_bonferroni: Option<f64>,
    pub p_bh: Option<f64>,
    pub class_raw: OutcomeClass,
    pub class_bonferroni: Option<OutcomeClass>,
    pub class_bh: Option<OutcomeClass>,
    pub degenerate_reason: Option<String>,
    /// Repetitions where the exponential fit fell back to linear.
    pub exponential_fallbacks: usize,
}

/// The classification rule: significantly better (p < alpha, d > 0), not
/// significant (p >= alpha), significantly worse (p < alpha, d < 0).
pub fn classify(t_result: &TestResult, d: f64, alpha: f64) -> OutcomeClass {
    if t_result.p_value < alpha {
        if d > 0.0 {
            OutcomeClass::SignificantlyBetter
        } else if d < 0.0 {
            OutcomeClass::SignificantlyWorse
        } else {
            OutcomeClass::NotSignificant
        }
    } else {
        OutcomeClass::NotSignificant
    }
}

/// Runs `n_reps` independent repetitions of `config` and computes the test
/// battery. Bit-reproducible given `master_seed`: repetition `i` uses the
/// seed derived from `(master_seed, config digest, i)`.
pub fn run_config(config: &ConfigPoint, n_reps: usize, master_seed: u64) -> Result<ConfigResult> {
    run_config_at(config, n_reps, master_seed, None, 0.0, scenario::DEFAULT_ALPHA)
}

/// As [`run_config`], with an explicit noise model (for drifted runs), a
/// wall-clock time and a significance level.
pub fn run_config_at(
    config: &ConfigPoint,
    n_reps: usize,
    master_seed: u64,
    noise: Option<&crate::noise::TimedNoiseModel>,
    time_h: f64,
    alpha: f64,
) -> Result<ConfigResult> {
    if n_reps < 2 {
        return Err(Error::invalid("n_reps must be at least 2"));
    }
    let circuit = scenario::qtc(config.trotter_depth)?;
    let observable = scenario::default_observable();
    let preset_model;
    let model = match noise {
        Some(m) => m,
        None => {
            preset_model = preset(&config.noise_preset)?;
            &preset_model
        }
    };
    let kernel = ZneKernel::prepare(&circuit, &observable, model, &config.zne_config(), time_h)?;
    let ideal_state = simulate(&circuit, &crate::noise::TimedNoiseModel::ideal(), time_h)?;
    let e_ideal = expectation(&ideal_state, &observable)?;

    let digest = config.digest();
    let mut deltas = Vec::with_capacity(n_reps);
    let mut fallbacks = 0usize;
    for i in 0..n_reps {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, digest, i as u64));
        let est = kernel.sample(&mut rng)?;
        if est.exponential_fallback {
            fallbacks += 1;
        }
        deltas.push((est.raw_value - e_ideal).abs() - (est.mitigated_value - e_ideal).abs());
    }
    let paired = PairedSample::new(deltas)?;
    let mean_delta = paired.mean();
    let wilcoxon = wilcoxon_signed_rank(&paired).ok();
    let (t_result, effects, class_raw, degenerate_reason) = match paired_t_test(&paired) {
        Ok(t) => {
            let d = cohens_d(&paired)?;
            let effects = EffectSizes { cohens_d: d, cliffs_delta: cliffs_delta(&paired) };
            let class = classify(&t, d, alpha);
            (Some(t), Some(effects), class, None)
        }
        Err(Error::DegenerateSample(reason)) => {
            (None, None, OutcomeClass::Degenerate, Some(reason))
        }
        Err(e) => return Err(e),
    };
    Ok(ConfigResult {
        config: config.clone(),
        n_reps,
        e_ideal,
        mean_delta,
        paired,
        t_result,
        wilcoxon,
        effects,
        p_bonferroni: None,
        p_bh: None,
        class_raw,
        class_bonferroni: None,
        class_bh: None,
        degenerate_reason,
        exponential_fallbacks: fallbacks,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub better: usize,
    pub worse: usize,
    pub not_significant: usize,
}

impl ClassCounts {
    fn add(&mut self, class: OutcomeClass) {
        match class {
            OutcomeClass::SignificantlyBetter => self.better += 1,
            OutcomeClass::SignificantlyWorse => self.worse += 1,
            OutcomeClass::NotSignificant => self.not_significant += 1,
            OutcomeClass::Degenerate => {}
        }
    }

    pub fn significant(&self) -> usize {
        self.better + self.worse
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSummary {
    /// Number of corrected p-values (degenerate cells excluded). Under
    /// per-preset families this sums the family sizes.
    pub family_size: usize,
    pub degenerate: usize,
    pub raw: ClassCounts,
    pub bonferroni: ClassCounts,
    pub benjamini_hochberg: ClassCounts,
}

impl CorrectionSummary {
    fn merged_with(&self, other: &CorrectionSummary) -> CorrectionSummary {
        let add = |a: ClassCounts, b: ClassCounts| ClassCounts {
            better: a.better + b.better,
            worse: a.worse + b.worse,
            not_significant: a.not_significant + b.not_significant,
        };
        CorrectionSummary {
            family_size: self.family_size + other.family_size,
            degenerate: self.degenerate + other.degenerate,
            raw: add(self.raw, other.raw),
            bonferroni: add(self.bonferroni, other.bonferroni),
            benjamini_hochberg: add(self.benjamini_hochberg, other.benjamini_hochberg),
        }
    }
}

/// Adjusts all t-test p-values jointly across `results` (the correction
/// family), re-classifies under both corrections, and tallies outcomes.
/// Degenerate cells are excluded from the family but keep their class.
pub fn apply_corrections(results: &mut [ConfigResult], alpha: f64) -> Result<CorrectionSummary> {
    if results.is_empty() {
        return Err(Error::invalid("empty result family"));
    }
    let member_idx: Vec<usize> =
        (0..results.len()).filter(|&i| results[i].t_result.is_some()).collect();
    let p_raw: Vec<f64> = member_idx
        .iter()
        .map(|&i| results[i].t_result.as_ref().expect("filtered").p_value)
        .collect();
    let p_bonf = bonferroni(&p_raw);
    let p_bh = benjamini_hochberg(&p_raw);

    let mut summary = CorrectionSummary {
        family_size: member_idx.len(),
        degenerate: results.len() - member_idx.len(),
        raw: ClassCounts::default(),
        bonferroni: ClassCounts::default(),
        benjamini_hochberg: ClassCounts::default(),
    };
    for (k, &i) in member_idx.iter().enumerate() {
        let d = results[i].effects.as_ref().expect("non-degenerate").cohens_d;
        let t = results[i].t_result.clone().expect("filtered");
        let class_b = classify(&TestResult { p_value: p_bonf[k], ..t.clone() }, d, alpha);
        let class_h = classify(&TestResult { p_value: p_bh[k], ..t }, d, alpha);
        results[i].p_bonferroni = Some(p_bonf[k]);
        results[i].p_bh = Some(p_bh[k]);
        results[i].class_bonferroni = Some(class_b);
        results[i].class_bh = Some(class_h);
        summary.raw.add(results[i].class_raw);
        summary.bonferroni.add(class_b);
        summary.benjamini_hochberg.add(class_h);
    }
    for r in results.iter_mut() {
        if r.t_result.is_none() {
            r.class_bonferroni = Some(OutcomeClass::Degenerate);
            r.class_bh = Some(OutcomeClass::Degenerate);
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Raw,
    Bonferroni,
    BenjaminiHochberg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub axis: AxisId,
    pub variant: String,
    pub regime: Regime,
    pub from: OutcomeClass,
    pub to: OutcomeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisActivity {
    pub axis: AxisId,
    pub active_raw: bool,
    pub active_bonferroni: Option<bool>,
    pub active_bh: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityReport {
    pub axes: Vec<AxisActivity>,
    pub transitions: Vec<Transition>,
}

/// Judges each swept axis active or inert: an axis is active iff any of its
/// variants lands in a different outcome class than the baseline under the
/// same correction regime. `results` must contain exactly one family
/// (a baseline plus its one-at-a-time variants).
pub fn activity_report(results: &[ConfigResult]) -> Result<ActivityReport> {
    let baseline = results
        .iter()
        .find(|r| r.config.swept.is_none())
        .ok_or_else(|| Error::invalid("result family is missing its baseline"))?;
    let mut axes = Vec::new();
    let mut transitions = Vec::new();
    for axis in AxisId::ALL {
        let variants: Vec<&ConfigResult> =
            results.iter().filter(|r| r.config.swept == Some(axis)).collect();
        if variants.is_empty() {
            continue;
        }
        let mut activity = AxisActivity {
            axis,
            active_raw: false,
            active_bonferroni: None,
            active_bh: None,
        };
        for v in variants {
            if v.class_raw != baseline.class_raw {
                activity.active_raw = true;
                transitions.push(Transition {
                    axis,
                    variant: v.config.variant_label.clone(),
                    regime: Regime::Raw,
                    from: baseline.class_raw,
                    to: v.class_raw,
                });
            }
            for (regime, get, slot) in [
                (
                    Regime::Bonferroni,
                    (v.class_bonferroni, baseline.class_bonferroni),
                    &mut activity.active_bonferroni,
                ),
                (Regime::BenjaminiHochberg, (v.class_bh, baseline.class_bh), &mut activity.active_bh),
            ] {
                if let (Some(vc), Some(bc)) = get {
                    let active = slot.get_or_insert(false);
                    if vc != bc {
                        *active = true;
                        transitions.push(Transition {
                            axis,
                            variant: v.config.variant_label.clone(),
                            regime,
                            from: bc,
                            to: vc,
                        });
                    }
                }
            }
        }
        axes.push(activity);
    }
    Ok(ActivityReport { axes, transitions })
}

/// Which results are corrected jointly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionFamily {
    /// All sweep cells form one family (the default).
    #[default]
    FullSweep,
    /// One family per noise preset.
    PerNoisePreset,
}

/// A grid of experiment families: every noise preset crossed with every
/// Trotter depth, each carrying the same swept axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepScenario {
    pub label: String,
    pub noise_presets: Vec<String>,
    pub trotter_depths: Vec<usize>,
    pub shots: AxisSpec<u64>,
    pub reps: AxisSpec<usize>,
    pub folding: AxisSpec<FoldingStrategy>,
    pub extrapolation: AxisSpec<ExtrapolationMethod>,
    pub scale_factors: AxisSpec<ScaleFactorSet>,
    pub alpha: f64,
    #[serde(default)]
    pub correction_family: CorrectionFamily,
}

impl SweepScenario {
    /// The one-family parameter space at a fixed (preset, depth) grid cell.
    pub fn family_space(&self, noise_preset: &str, depth: usize) -> ParameterSpace {
        ParameterSpace {
            noise: AxisSpec::documented(noise_preset.to_string()),
            depth: AxisSpec::documented(depth),
            shots: self.shots.clone(),
            reps: self.reps.clone(),
            folding: self.folding.clone(),
            extrapolation: self.extrapolation.clone(),
            scale_factors: self.scale_factors.clone(),
        }
    }

    pub fn configs(&self) -> Result<Vec<ConfigPoint>> {
        let mut out = Vec::new();
        for preset_name in &self.noise_presets {
            for &depth in &self.trotter_depths {
                out.extend(enumerate_oat(&self.family_space(preset_name, depth))?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyActivity {
    pub noise_preset: String,
    pub trotter_depth: usize,
    pub report: ActivityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub label: String,
    pub master_seed: u64,
    pub alpha: f64,
    pub results: Vec<ConfigResult>,
    pub summary: CorrectionSummary,
    pub families: Vec<FamilyActivity>,
}

/// Runs the whole scenario. Configurations are independent, so they run in
/// parallel; per-repetition seeds keep the output identical for any degree
/// of parallelism.
pub fn run_sweep(scenario: &SweepScenario, master_seed: u64) -> Result<SweepOutput> {
    let configs = scenario.configs()?;
    let mut results: Vec<ConfigResult> = configs
        .par_iter()
        .map(|c| run_config_at(c, c.n_reps, master_seed, None, 0.0, scenario.alpha))
        .collect::<Result<_>>()?;
    let summary = match scenario.correction_family {
        CorrectionFamily::FullSweep => apply_corrections(&mut results, scenario.alpha)?,
        CorrectionFamily::PerNoisePreset => {
            // configs() iterates presets in the outer loop, so each preset's
            // cells form a contiguous run
            let mut merged: Option<CorrectionSummary> = None;
            let mut start = 0;
            while start < results.len() {
                let preset = results[start].config.noise_preset.clone();
                let end = start
                    + results[start..]
                        .iter()
                        .take_while(|r| r.config.noise_preset == preset)
                        .count();
                let part = apply_corrections(&mut results[start..end], scenario.alpha)?;
                merged = Some(match merged {
                    None => part,
                    Some(m) => m.merged_with(&part),
                });
                start = end;
            }
            merged.ok_or_else(|| Error::invalid("sweep produced no results"))?
        }
    };
    let mut families = Vec::new();
    for preset_name in &scenario.noise_presets {
        for &depth in &scenario.trotter_depths {
            let family: Vec<ConfigResult> = results
                .iter()
                .filter(|r| {
                    r.config.noise_preset == *preset_name && r.config.trotter_depth == depth
                })
                .cloned()
                .collect();
            families.push(FamilyActivity {
                noise_preset: preset_name.clone(),
                trotter_depth: depth,
                report: activity_report(&family)?,
            });
        }
    }
    Ok(SweepOutput {
        label: scenario.label.clone(),
        master_seed,
        alpha: scenario.alpha,
        results,
        summary,
        families,
    })
}
