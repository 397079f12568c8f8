//! Time-varying noise models: base specifications plus drift profiles.

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::seed;
use crate::sim::DensityState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateClass {
    OneQubit,
    TwoQubit,
}

/// Per-support error rates emulating a hardware calibration snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNoise {
    /// One-qubit depolarising rate per qubit index.
    pub one_qubit: Vec<f64>,
    /// Two-qubit depolarising rate per (unordered) qubit pair.
    pub two_qubit: Vec<PairRate>,
    /// Optional readout flip probability per qubit. Carried so snapshots can
    /// describe measurement error; the shipped pipeline folds it into the
    /// sampled expectation via [`readout_factor`].
    #[serde(default)]
    pub readout: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    pub a: usize,
    pub b: usize,
    pub p: f64,
}

impl SnapshotNoise {
    fn validate(&self) -> Result<()> {
        let all = self
            .one_qubit
            .iter()
            .chain(self.two_qubit.iter().map(|r| &r.p))
            .chain(self.readout.iter());
        for &p in all {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("snapshot probability {p} outside [0,1]")));
            }
        }
        Ok(())
    }

    fn pair_rate(&self, x: usize, y: usize) -> Option<f64> {
        let (lo, hi) = (x.min(y), x.max(y));
        self.two_qubit
            .iter()
            .find(|r| (r.a.min(r.b), r.a.max(r.b)) == (lo, hi))
            .map(|r| r.p)
    }

    fn class_median(&self, class: GateClass) -> f64 {
        let mut v: Vec<f64> = match class {
            GateClass::OneQubit => self.one_qubit.clone(),
            GateClass::TwoQubit => self.two_qubit.iter().map(|r| r.p).collect(),
        };
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = v.len() / 2;
        if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) }
    }
}

/// The noise specification at a fixed instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseSpec {
    /// No noise at all; drift never turns this into noise.
    Ideal,
    /// One depolarising rate per gate class.
    GlobalDepolarising { p1: f64, p2: f64 },
    /// Heterogeneous per-support rates, snapshot style.
    Snapshot { rates: SnapshotNoise },
    /// Two-qubit gates effectively destroyed, as on a backend whose
    /// entangler calibration has collapsed.
    NoiseFloor { p2: f64 },
}

impl NoiseSpec {
    fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Ideal => Ok(()),
            NoiseSpec::GlobalDepolarising { p1, p2 } => {
                for p in [p1, p2] {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::invalid(format!("depolarising rate {p} outside [0,1]")));
                    }
                }
                Ok(())
            }
            NoiseSpec::Snapshot { rates } => rates.validate(),
            NoiseSpec::NoiseFloor { p2 } => {
                if !(0.0..=1.0).contains(p2) {
                    return Err(Error::invalid(format!("noise-floor rate {p2} outside [0,1]")));
                }
                Ok(())
            }
        }
    }

    fn class_rate(&self, class: GateClass) -> f64 {
        match (self, class) {
            (NoiseSpec::Ideal, _) => 0.0,
            (NoiseSpec::GlobalDepolarising { p1, .. }, GateClass::OneQubit) => *p1,
            (NoiseSpec::GlobalDepolarising { p2, .. }, GateClass::TwoQubit) => *p2,
            (NoiseSpec::Snapshot { rates }, c) => rates.class_median(c),
            (NoiseSpec::NoiseFloor { .. }, GateClass::OneQubit) => 0.0,
            (NoiseSpec::NoiseFloor { p2 }, GateClass::TwoQubit) => *p2,
        }
    }
}

/// How error rates move with wall-clock time. The produced offset is added
/// to the base rate of every gate class, then clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftProfile {
    Constant,
    /// Rates jump by `delta` at `t0_h` and stay there.
    StepChange { t0_h: f64, delta: f64 },
    /// Rates ramp linearly from the base value at t = 0.
    LinearRamp { slope_per_h: f64 },
    /// Rates shift by `delta` inside a nightly window on a 24 h clock.
    /// The window may wrap midnight (start 21, end 6).
    DiurnalShift { night_start_h: f64, night_end_h: f64, delta: f64 },
    /// Discretised AR(1) offsets on a grid of `dt_h` hours: the offset at
    /// grid index k is `x_k = rho x_{k-1} + sigma eps_k`, with `eps_k`
    /// standard normal draws derived functionally from `(seed, k)`.
    Ar1 { rho: f64, sigma: f64, seed: u64, dt_h: f64 },
}

impl DriftProfile {
    fn validate(&self) -> Result<()> {
        match self {
            DriftProfile::Ar1 { rho, sigma, dt_h, .. } => {
                if rho.abs() >= 1.0 {
                    return Err(Error::invalid(format!("AR1 requires |rho| < 1, got {rho}")));
                }
                if *sigma < 0.0 || *dt_h <= 0.0 {
                    return Err(Error::invalid("AR1 requires sigma >= 0 and dt_h > 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Additive rate offset at time `t_h`.
    pub fn offset_at(&self, t_h: f64) -> f64 {
        match *self {
            DriftProfile::Constant => 0.0,
            DriftProfile::StepChange { t0_h, delta } => {
                if t_h >= t0_h {
                    delta
                } else {
                    0.0
                }
            }
            DriftProfile::LinearRamp { slope_per_h } => slope_per_h * t_h,
            DriftProfile::DiurnalShift { night_start_h, night_end_h, delta } => {
                let h = t_h.rem_euclid(24.0);
                let inside = if night_start_h <= night_end_h {
                    h >= night_start_h && h < night_end_h
                } else {
                    h >= night_start_h || h < night_end_h
                };
                if inside {
                    delta
                } else {
                    0.0
                }
            }
            DriftProfile::Ar1 { rho, sigma, seed: s, dt_h } => {
                let k = (t_h / dt_h).round().max(0.0) as u64;
                let mut x = 0.0;
                for j in 0..=k {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_seed(s, 0xA41, j));
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    x = rho * x + sigma * eps;
                }
                x
            }
        }
    }
}

/// A noise specification plus its drift profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedNoiseModel {
    pub base: NoiseSpec,
    pub drift: DriftProfile,
}

impl TimedNoiseModel {
    pub fn new(base: NoiseSpec, drift: DriftProfile) -> Result<Self> {
        base.validate()?;
        drift.validate()?;
        Ok(Self { base, drift })
    }

    pub fn ideal() -> Self {
        Self { base: NoiseSpec::Ideal, drift: DriftProfile::Constant }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self.base, NoiseSpec::Ideal)
    }

    /// Class-level error rate at `t_h`: base rate modulated by drift and
    /// clamped to [0, 1]. For snapshots the class rate is the median over
    /// the class's entries. The ideal model stays exactly zero.
    pub fn error_rate_at(&self, class: GateClass, t_h: f64) -> f64 {
        if self.is_ideal() {
            return 0.0;
        }
        (self.base.class_rate(class) + self.drift.offset_at(t_h)).clamp(0.0, 1.0)
    }

    /// Resolves per-gate rates at a fixed time. Evaluating the drift offset
    /// once per circuit keeps AR(1) evaluation off the per-gate path.
    pub fn resolver(&self, t_h: f64) -> NoiseResolver<'_> {
        let offset = if self.is_ideal() { 0.0 } else { self.drift.offset_at(t_h) };
        NoiseResolver { model: self, offset }
    }

    /// Readout deflation factor for a Z string on `support`: each qubit
    /// flipping with probability r scales the string expectation by
    /// `prod (1 - 2 r_q)`. Models without readout entries give 1.
    pub fn readout_factor(&self, support: &[usize]) -> f64 {
        match &self.base {
            NoiseSpec::Snapshot { rates } if !rates.readout.is_empty() => support
                .iter()
                .map(|&q| 1.0 - 2.0 * rates.readout.get(q).copied().unwrap_or(0.0))
                .product(),
            _ => 1.0,
        }
    }
}

/// Per-gate rate lookup at one instant.
pub struct NoiseResolver<'a> {
    model: &'a TimedNoiseModel,
    offset: f64,
}

impl NoiseResolver<'_> {
    pub fn rate_for(&self, gate: &Gate) -> f64 {
        let base = match (&self.model.base, gate) {
            (NoiseSpec::Ideal, _) => return 0.0,
            (NoiseSpec::Snapshot { rates }, Gate::Entangler { control, target }) => rates
                .pair_rate(*control, *target)
                .unwrap_or_else(|| rates.class_median(GateClass::TwoQubit)),
            (NoiseSpec::Snapshot { rates }, g) => {
                let q = g.support()[0];
                rates
                    .one_qubit
                    .get(q)
                    .copied()
                    .unwrap_or_else(|| rates.class_median(GateClass::OneQubit))
            }
            (spec, g) => {
                let class =
                    if g.is_two_qubit() { GateClass::TwoQubit } else { GateClass::OneQubit };
                spec.class_rate(class)
            }
        };
        (base + self.offset).clamp(0.0, 1.0)
    }
}

/// Applies the model's channel for `gate` at time `t_h` to the state.
pub fn apply_noise(state: &mut DensityState, gate: &Gate, model: &TimedNoiseModel, t_h: f64) {
    let p = model.resolver(t_h).rate_for(gate);
    if p > 0.0 {
        state.depolarise(&gate.support(), p);
    }
}

/// Median two-qubit error reported for the IBM Kyoto backend.
pub const KYOTO_P2: f64 = 0.00947;
/// Median two-qubit error reported for the IBM Marrakesh backend.
pub const MARRAKESH_P2: f64 = 0.00241;
/// Two-qubit rate used by the noise-floor preset.
pub const NOISE_FLOOR_P2: f64 = 0.999;

pub const PRESET_NAMES: [&str; 5] = [
    "ideal",
    "kyoto-depolarising",
    "marrakesh-depolarising",
    "noise-floor",
    "osaka-snapshot-like",
];

/// Returns a named noise model. Depolarising presets take the one-qubit rate
/// as one tenth of the cited two-qubit median.
pub fn preset(name: &str) -> Result<TimedNoiseModel> {
    let base = match name {
        "ideal" => NoiseSpec::Ideal,
        "kyoto-depolarising" => {
            NoiseSpec::GlobalDepolarising { p1: KYOTO_P2 / 10.0, p2: KYOTO_P2 }
        }
        "marrakesh-depolarising" => {
            NoiseSpec::GlobalDepolarising { p1: MARRAKESH_P2 / 10.0, p2: MARRAKESH_P2 }
        }
        "noise-floor" => NoiseSpec::NoiseFloor { p2: NOISE_FLOOR_P2 },
        "osaka-snapshot-like" => NoiseSpec::Snapshot { rates: osaka_snapshot_like() },
        other => {
            return Err(Error::invalid(format!(
                "unknown noise preset '{other}'; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    TimedNoiseModel::new(base, DriftProfile::Constant)
}

/// Heterogeneous rates drawn deterministically around a 0.9% two-qubit
/// median, emulating a calibration snapshot of an Osaka-class device.
fn osaka_snapshot_like() -> SnapshotNoise {
    let mut rng = ChaCha8Rng::seed_from_u64(0x05AA_2024);
    let mut lognormal = |median: f64, spread: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        (median.ln() + spread * z).exp().clamp(1e-5, 0.08)
    };
    let one_qubit: Vec<f64> = (0..8).map(|_| lognormal(0.0009, 0.35)).collect();
    let two_qubit: Vec<PairRate> =
        (0..7).map(|i| PairRate { a: i, b: i + 1, p: lognormal(0.009, 0.35) }).collect();
    SnapshotNoise { one_qubit, two_qubit, readout: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_depolarising_rate() {
        let m = preset("kyoto-depolarising").unwrap();
        for t in [0.0, 5.0, 100.0] {
            assert_abs_diff_eq!(m.error_rate_at(GateClass::TwoQubit, t), 0.00947);
            assert_abs_diff_eq!(m.error_rate_at(GateClass::OneQubit, t), 0.000947);
        }
    }

    #[test]
    fn step_change_adds_delta_after_t0() {
        let m = TimedNoiseModel::new(
            NoiseSpec::GlobalDepolarising { p1: 0.000947, p2: 0.00947 },
            DriftProfile::StepChange { t0_h: 9.5, delta: 0.005 },
        )
        .unwrap();
        assert_abs_diff_eq!(m.error_rate_at(GateClass::TwoQubit, 9.0), 0.00947);
        assert_abs_diff_eq!(m.error_rate_at(GateClass::TwoQubit, 10.0), 0.01447, epsilon = 1e-15);
    }

    #[test]
    fn zero_slope_ramp_is_identity() {
        let m = TimedNoiseModel::new(
            NoiseSpec::GlobalDepolarising { p1: 0.001, p2: 0.01 },
            DriftProfile::LinearRamp { slope_per_h: 0.0 },
        )
        .unwrap();
        assert_abs_diff_eq!(m.error_rate_at(GateClass::TwoQubit, 77.0), 0.01);
    }

    #[test]
    fn rates_clamp_to_unit_interval() {
        let m = TimedNoiseModel::new(
            NoiseSpec::NoiseFloor { p2: 0.999 },
            DriftProfile::StepChange { t0_h: 0.0, delta: 0.5 },
        )
        .unwrap();
        assert_eq!(m.error_rate_at(GateClass::TwoQubit, 1.0), 1.0);
        let m = TimedNoiseModel::new(
            NoiseSpec::GlobalDepolarising { p1: 0.001, p2: 0.01 },
            DriftProfile::LinearRamp { slope_per_h: -1.0 },
        )
        .unwrap();
        assert_eq!(m.error_rate_at(GateClass::OneQubit, 5.0), 0.0);
    }

    #[test]
    fn diurnal_window_wraps_midnight() {
        let drift = DriftProfile::DiurnalShift { night_start_h: 21.0, night_end_h: 6.0, delta: 0.02 };
        assert_eq!(drift.offset_at(22.0), 0.02);
        assert_eq!(drift.offset_at(3.0), 0.02);
        assert_eq!(drift.offset_at(27.0), 0.02); // 27 h = 3 am next day
        assert_eq!(drift.offset_at(12.0), 0.0);
        assert_eq!(drift.offset_at(45.5), 0.02); // 21.5 on day 2
    }

    #[test]
    fn ar1_is_deterministic_and_validated() {
        let drift = DriftProfile::Ar1 { rho: 0.9, sigma: 0.002, seed: 7, dt_h: 0.5 };
        let a = drift.offset_at(12.0);
        let b = drift.offset_at(12.0);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(TimedNoiseModel::new(
            NoiseSpec::Ideal,
            DriftProfile::Ar1 { rho: 1.0, sigma: 0.1, seed: 0, dt_h: 0.5 }
        )
        .is_err());
    }

    #[test]
    fn ideal_ignores_drift() {
        let m = TimedNoiseModel::new(
            NoiseSpec::Ideal,
            DriftProfile::StepChange { t0_h: 0.0, delta: 0.9 },
        )
        .unwrap();
        assert_eq!(m.error_rate_at(GateClass::TwoQubit, 5.0), 0.0);
        let g = Gate::Entangler { control: 0, target: 1 };
        assert_eq!(m.resolver(5.0).rate_for(&g), 0.0);
    }

    #[test]
    fn presets_resolve_and_unknown_is_rejected() {
        for name in PRESET_NAMES {
            preset(name).unwrap();
        }
        let err = preset("tokyo").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kyoto-depolarising"), "error should list presets: {msg}");
    }

    #[test]
    fn marrakesh_rate_matches_report() {
        let m = preset("marrakesh-depolarising").unwrap();
        assert_abs_diff_eq!(m.error_rate_at(GateClass::TwoQubit, 0.0), 0.00241);
    }

    #[test]
    fn osaka_snapshot_is_deterministic_and_near_the_median() {
        let a = preset("osaka-snapshot-like").unwrap();
        let b = preset("osaka-snapshot-like").unwrap();
        assert_eq!(a, b);
        let two = a.error_rate_at(GateClass::TwoQubit, 0.0);
        assert!((0.003..0.03).contains(&two), "two-qubit median {two} too far from 0.9%");
    }

    #[test]
    fn snapshot_lookup_prefers_exact_pair() {
        let rates = SnapshotNoise {
            one_qubit: vec![0.001, 0.002],
            two_qubit: vec![PairRate { a: 0, b: 1, p: 0.02 }, PairRate { a: 1, b: 2, p: 0.04 }],
            readout: vec![],
        };
        let m = TimedNoiseModel::new(NoiseSpec::Snapshot { rates }, DriftProfile::Constant).unwrap();
        let r = m.resolver(0.0);
        assert_eq!(r.rate_for(&Gate::Entangler { control: 1, target: 0 }), 0.02);
        assert_eq!(r.rate_for(&Gate::Entangler { control: 2, target: 1 }), 0.04);
        // unknown pair falls back to the class median
        assert_abs_diff_eq!(r.rate_for(&Gate::Entangler { control: 0, target: 3 }), 0.03);
        assert_eq!(r.rate_for(&Gate::RotX { qubit: 1, angle: 0.3 }), 0.002);
    }

    #[test]
    fn readout_factor_defaults_to_one() {
        let m = preset("kyoto-depolarising").unwrap();
        assert_eq!(m.readout_factor(&[0, 1]), 1.0);
        let rates = SnapshotNoise {
            one_qubit: vec![0.001],
            two_qubit: vec![],
            readout: vec![0.1, 0.25],
        };
        let m = TimedNoiseModel::new(NoiseSpec::Snapshot { rates }, DriftProfile::Constant).unwrap();
        assert_abs_diff_eq!(m.readout_factor(&[0]), 0.8);
        assert_abs_diff_eq!(m.readout_factor(&[0, 1]), 0.8 * 0.5);
    }

    #[test]
    fn full_mixing_on_one_qubit_gate() {
        let mut s = DensityState::zero_state(1).unwrap();
        let g = Gate::RotX { qubit: 0, angle: 0.0 };
        let m = TimedNoiseModel::new(
            NoiseSpec::GlobalDepolarising { p1: 1.0, p2: 1.0 },
            DriftProfile::Constant,
        )
        .unwrap();
        apply_noise(&mut s, &g, &m, 0.0);
        assert_abs_diff_eq!(s.z_string_expectation(1), 0.0, epsilon = 1e-12);
    }
}
