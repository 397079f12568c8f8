//! Digital zero-noise extrapolation: unitary folding, extrapolation-model
//! fitting, Richardson coefficients, and variance amplification.

use crate::circuit::{Circuit, Gate, Observable};
use crate::error::{Error, Result};
use crate::noise::TimedNoiseModel;
use crate::sim::{sample_from_term_means, simulate, ShotEstimate};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Strictly increasing noise scale factors, all >= 1, at least two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScaleFactorSet {
    factors: Vec<f64>,
}

impl ScaleFactorSet {
    pub fn new(factors: Vec<f64>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::invalid("need at least two scale factors"));
        }
        for &f in &factors {
            if !f.is_finite() || f < 1.0 {
                return Err(Error::invalid(format!("scale factor {f} must be >= 1")));
            }
        }
        if factors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "scale factors must be strictly increasing (duplicates not allowed)",
            ));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| format!("{f}")).collect();
        parts.join(",")
    }
}

impl TryFrom<Vec<f64>> for ScaleFactorSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScaleFactorSet::new(v)
    }
}

impl From<ScaleFactorSet> for Vec<f64> {
    fn from(s: ScaleFactorSet) -> Vec<f64> {
        s.factors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldingStrategy {
    #[serde(rename = "global")]
    GlobalFold,
    #[serde(rename = "local-left")]
    LocalFoldLeft,
    #[serde(rename = "local-right")]
    LocalFoldRight,
}

impl FoldingStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            FoldingStrategy::GlobalFold => "global",
            FoldingStrategy::LocalFoldLeft => "local-left",
            FoldingStrategy::LocalFoldRight => "local-right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtrapolationMethod {
    Linear,
    Polynomial { degree: usize },
    Exponential,
    Richardson,
}

impl ExtrapolationMethod {
    pub fn label(&self) -> String {
        match self {
            ExtrapolationMethod::Linear => "linear".into(),
            ExtrapolationMethod::Polynomial { degree } => format!("polynomial-{degree}"),
            ExtrapolationMethod::Exponential => "exponential".into(),
            ExtrapolationMethod::Richardson => "richardson".into(),
        }
    }
}

/// Folds `circuit` to amplify noise by `lambda` while preserving its ideal
/// unitary action exactly.
///
/// Whole folds append `(C_adj_reversed ++ C)` copies; the fractional residue
/// folds `s = round(d (lambda - (2n+1)) / 2)` single gates in place within
/// the first copy, chosen from the left, the right, or a start-anchored
/// evenly strided subset for the global strategy. Rounding is half-to-even.
pub fn fold(circuit: &Circuit, lambda: f64, strategy: FoldingStrategy) -> Result<Circuit> {
    if !lambda.is_finite() || lambda < 1.0 {
        return Err(Error::invalid(format!("fold scale factor {lambda} must be >= 1")));
    }
    let d = circuit.len();
    let n_whole = ((lambda - 1.0) / 2.0).floor() as usize;
    let residue = lambda - (2 * n_whole + 1) as f64;
    let s = round_half_even(d as f64 * residue / 2.0).min(d);

    let mut marked = vec![false; d];
    match strategy {
        FoldingStrategy::LocalFoldLeft => marked[..s].fill(true),
        FoldingStrategy::LocalFoldRight => marked[d - s..].fill(true),
        FoldingStrategy::GlobalFold => {
            // start-anchored even stride: indices floor(j d / s)
            for j in 0..s {
                marked[(j * d) / s] = true;
            }
        }
    }
    let mut gates: Vec<Gate> = Vec::with_capacity(d + 2 * (n_whole * d + s));
    for (i, g) in circuit.gates().iter().enumerate() {
        gates.push(*g);
        if marked[i] {
            gates.push(g.adjoint());
            gates.push(*g);
        }
    }
    for _ in 0..n_whole {
        gates.extend(circuit.gates().iter().rev().map(Gate::adjoint));
        gates.extend(circuit.gates().iter().copied());
    }
    Ok(circuit.with_gates(gates, format!("{}@x{lambda}", circuit.label())))
}

fn round_half_even(x: f64) -> usize {
    let floor = x.floor();
    let frac = x - floor;
    let f = floor as usize;
    if frac > 0.5 {
        f + 1
    } else if frac < 0.5 {
        f
    } else if f % 2 == 0 {
        f
    } else {
        f + 1
    }
}

/// Lagrange coefficients for Richardson extrapolation to lambda = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichardsonCoefficients {
    c: Vec<f64>,
}

impl RichardsonCoefficients {
    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Pre-experiment variance amplification bound, `sum |c_k|`.
    pub fn amplification_bound(&self) -> f64 {
        self.c.iter().map(|c| c.abs()).sum()
    }

    /// Variance multiplier for equal per-point variances, `sum c_k^2`.
    pub fn variance_factor(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum()
    }

    pub fn sum(&self) -> f64 {
        self.c.iter().sum()
    }
}

/// `c_k = prod_{j != k} lambda_j / (lambda_j - lambda_k)`, the Lagrange basis
/// at zero. The coefficients always sum to 1.
pub fn richardson_coefficients(set: &ScaleFactorSet) -> RichardsonCoefficients {
    let l = set.factors();
    let c = (0..l.len())
        .map(|k| {
            (0..l.len())
                .filter(|&j| j != k)
                .map(|j| l[j] / (l[j] - l[k]))
                .product()
        })
        .collect();
    RichardsonCoefficients { c }
}

/// `sum |c_k|`, computable from the scale factors alone.
pub fn variance_amplification_bound(set: &ScaleFactorSet) -> f64 {
    richardson_coefficients(set).amplification_bound()
}

/// One measured point of the noise-scaling curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub lambda: f64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Result of extrapolating measured points to lambda = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub variance: f64,
    /// Set when the exponential model was requested but sign-mixed or zero
    /// estimates forced the linear fallback.
    pub exponential_fallback: bool,
}

/// Fits the requested model and evaluates it at lambda = 0, propagating the
/// per-point standard errors through the (linearised) estimator.
pub fn extrapolate(points: &[ZnePoint], method: ExtrapolationMethod) -> Result<Extrapolation> {
    if points.len() < 2 {
        return Err(Error::invalid("extrapolation needs at least two points"));
    }
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.estimate).collect();
    let sigmas: Vec<f64> = points.iter().map(|p| p.std_error).collect();

    match method {
        ExtrapolationMethod::Richardson => {
            let set = ScaleFactorSet::new(lambdas)?;
            let coeffs = richardson_coefficients(&set);
            let c = coeffs.coefficients();
            let value = c.iter().zip(&ys).map(|(c, y)| c * y).sum();
            let variance = c.iter().zip(&sigmas).map(|(c, s)| (c * s).powi(2)).sum();
            Ok(Extrapolation { value, variance, exponential_fallback: false })
        }
        ExtrapolationMethod::Linear => {
            let w = intercept_weights(&lambdas, 1)?;
            Ok(weighted_value(&w, &ys, &sigmas))
        }
        ExtrapolationMethod::Polynomial { degree } => {
            if degree == 0 {
                return Err(Error::invalid("polynomial degree must be at least 1"));
            }
            if degree > points.len() - 1 {
                return Err(Error::invalid(format!(
                    "polynomial degree {degree} exceeds K-1 = {}",
                    points.len() - 1
                )));
            }
            let w = intercept_weights(&lambdas, degree)?;
            Ok(weighted_value(&w, &ys, &sigmas))
        }
        ExtrapolationMethod::Exponential => {
            let sign = ys[0].signum();
            let usable = ys.iter().all(|&y| y != 0.0 && y.signum() == sign);
            if !usable {
                // The log transform is undefined on sign-mixed data; fall
                // back to the linear fit and flag it.
                let w = intercept_weights(&lambdas, 1)?;
                let mut out = weighted_value(&w, &ys, &sigmas);
                out.exponential_fallback = true;
                return Ok(out);
            }
            let logs: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
            let w = intercept_weights(&lambdas, 1)?;
            let log_at_zero: f64 = w.iter().zip(&logs).map(|(w, z)| w * z).sum();
            let value = sign * log_at_zero.exp();
            // first-order propagation: d value / d y_i = value * w_i / y_i
            let variance = w
                .iter()
                .zip(&ys)
                .zip(&sigmas)
                .map(|((w, y), s)| (value * w / y * s).powi(2))
                .sum();
            Ok(Extrapolation { value, variance, exponential_fallback: false })
        }
    }
}

fn weighted_value(w: &[f64], ys: &[f64], sigmas: &[f64]) -> Extrapolation {
    let value = w.iter().zip(ys).map(|(w, y)| w * y).sum();
    let variance = w.iter().zip(sigmas).map(|(w, s)| (w * s).powi(2)).sum();
    Extrapolation { value, variance, exponential_fallback: false }
}

/// Weights `w` of the least-squares polynomial intercept: the fitted value at
/// zero is `w . y`. Solved through a QR decomposition of the Vandermonde
/// matrix rather than the normal equations.
fn intercept_weights(lambdas: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = lambdas.len();
    let m = degree + 1;
    if m > n {
        return Err(Error::invalid("not enough points for the requested degree"));
    }
    let x = DMatrix::from_fn(n, m, |i, j| lambdas[i].powi(j as i32));
    let qr = x.qr();
    let q = qr.q();
    let r = qr.r();
    if (0..m).any(|i| r[(i, i)].abs() < 1e-12) {
        return Err(Error::invalid("degenerate design matrix (duplicate scale factors?)"));
    }
    // w = Q (R^-T e_0); then value(0) = e_0^T beta = w . y
    let e0 = DVector::from_fn(m, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let v = r
        .transpose()
        .solve_lower_triangular(&e0)
        .ok_or_else(|| Error::invalid("singular triangular system in least squares"))?;
    let w = q * v;
    Ok(w.iter().copied().collect())
}

/// Shot and model configuration of one ZNE estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    pub strategy: FoldingStrategy,
    pub method: ExtrapolationMethod,
    pub scale_factors: ScaleFactorSet,
    pub n_shots: u64,
}

impl ZneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::invalid("n_shots must be at least 1"));
        }
        if let ExtrapolationMethod::Polynomial { degree } = self.method {
            if degree == 0 || degree > self.scale_factors.k() - 1 {
                return Err(Error::invalid(format!(
                    "polynomial degree {degree} invalid for K = {}",
                    self.scale_factors.k()
                )));
            }
        }
        Ok(())
    }
}

/// A single mitigated estimate with its raw companion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneEstimate {
    pub mitigated_value: f64,
    pub raw_value: f64,
    pub per_lambda: Vec<ShotEstimate>,
    pub variance_estimate: f64,
    pub exponential_fallback: bool,
}

/// Precomputed per-lambda exact expectations for one (circuit, observable,
/// noise, time, config) cell.
///
/// Everything random in a repetition is shot sampling, so the folded-circuit
/// simulations can be shared across repetitions: `sample` draws one
/// repetition's estimate and is bit-identical to calling [`run_zne`] with the
/// same random source.
pub struct ZneKernel {
    config: ZneConfig,
    observable: Observable,
    /// term means per lambda, readout deflation already applied
    term_means: Vec<Vec<f64>>,
}

impl ZneKernel {
    pub fn prepare(
        circuit: &Circuit,
        observable: &Observable,
        noise: &TimedNoiseModel,
        config: &ZneConfig,
        time_h: f64,
    ) -> Result<Self> {
        config.validate()?;
        let mut term_means = Vec::with_capacity(config.scale_factors.k());
        for &lambda in config.scale_factors.factors() {
            let folded = fold(circuit, lambda, config.strategy)?;
            let state = simulate(&folded, noise, time_h)?;
            let means: Vec<f64> = state
                .term_expectations(observable)?
                .iter()
                .zip(observable.terms())
                .map(|(e, t)| e * noise.readout_factor(&t.support))
                .collect();
            term_means.push(means);
        }
        Ok(Self { config: config.clone(), observable: observable.clone(), term_means })
    }

    /// Draws one repetition: shot-samples every lambda, then extrapolates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ZneEstimate> {
        let mut per_lambda = Vec::with_capacity(self.term_means.len());
        for means in &self.term_means {
            per_lambda.push(sample_from_term_means(
                means,
                &self.observable,
                self.config.n_shots,
                rng,
            )?);
        }
        self.extrapolate_points(per_lambda)
    }

    /// Zero-shot-noise estimate from the exact expectations.
    pub fn exact(&self) -> Result<ZneEstimate> {
        let per_lambda: Vec<ShotEstimate> = self
            .term_means
            .iter()
            .map(|means| {
                let value = means
                    .iter()
                    .zip(self.observable.terms())
                    .map(|(e, t)| e * t.weight)
                    .sum();
                ShotEstimate { value, std_error: 0.0, n_shots: 0 }
            })
            .collect();
        self.extrapolate_points(per_lambda)
    }

    fn extrapolate_points(&self, per_lambda: Vec<ShotEstimate>) -> Result<ZneEstimate> {
        let points: Vec<ZnePoint> = self
            .config
            .scale_factors
            .factors()
            .iter()
            .zip(&per_lambda)
            .map(|(&lambda, est)| ZnePoint {
                lambda,
                estimate: est.value,
                std_error: est.std_error,
            })
            .collect();
        let ex = extrapolate(&points, self.config.method)?;
        Ok(ZneEstimate {
            mitigated_value: ex.value,
            raw_value: per_lambda[0].value,
            per_lambda,
            variance_estimate: ex.variance,
            exponential_fallback: ex.exponential_fallback,
        })
    }
}

/// Folds, simulates, shot-samples and extrapolates one repetition.
pub fn run_zne<R: Rng + ?Sized>(
    circuit: &Circuit,
    observable: &Observable,
    noise: &TimedNoiseModel,
    config: &ZneConfig,
    time_h: f64,
    rng: &mut R,
) -> Result<ZneEstimate> {
    ZneKernel::prepare(circuit, observable, noise, config, time_h)?.sample(rng)
}
