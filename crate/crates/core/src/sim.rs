//! Exact density-matrix simulation with per-gate noise channels.

use crate::circuit::{Circuit, Gate, Observable, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::noise::TimedNoiseModel;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// Dense 2^n x 2^n density matrix, row-major, qubit q = bit q of the index.
#[derive(Debug, Clone)]
pub struct DensityState {
    n_qubits: usize,
    dim: usize,
    data: Vec<C64>,
}

impl DensityState {
    /// The all-zeros pure state `|0..0><0..0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "density state supports 1..={MAX_QUBITS} qubits, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        let mut data = vec![C64::ZERO; dim * dim];
        data[0] = C64::ONE;
        Ok(Self { n_qubits, dim, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest deviation from `rho == rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let a = self.data[r * self.dim + c];
                let b = self.data[c * self.dim + r].conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Applies the gate's ideal unitary action, `rho -> U rho U^dagger`.
    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::RotX { qubit, angle } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                let u = [
                    [C64::new(c, 0.0), C64::new(0.0, -s)],
                    [C64::new(0.0, -s), C64::new(c, 0.0)],
                ];
                self.apply_unitary1(&u, qubit);
            }
            Gate::RotZ { qubit, angle } => {
                let u = [
                    [C64::from_polar(1.0, -angle / 2.0), C64::ZERO],
                    [C64::ZERO, C64::from_polar(1.0, angle / 2.0)],
                ];
                self.apply_unitary1(&u, qubit);
            }
            Gate::Hadamard { qubit } => {
                let h = 1.0 / f64::sqrt(2.0);
                let u = [
                    [C64::new(h, 0.0), C64::new(h, 0.0)],
                    [C64::new(h, 0.0), C64::new(-h, 0.0)],
                ];
                self.apply_unitary1(&u, qubit);
            }
            Gate::Entangler { control, target } => {
                // Local index = control bit + 2 * target bit.
                let mut u = [[C64::ZERO; 4]; 4];
                u[0][0] = C64::ONE;
                u[2][2] = C64::ONE;
                u[3][1] = C64::ONE;
                u[1][3] = C64::ONE;
                self.apply_unitary2(&u, control, target);
            }
        }
    }

    fn apply_unitary1(&mut self, u: &[[C64; 2]; 2], q: usize) {
        debug_assert!(q < self.n_qubits);
        let dim = self.dim;
        let bit = 1usize << q;
        let low = bit - 1;
        // rho -> U rho
        for base in 0..dim / 2 {
            let i0 = ((base & !low) << 1) | (base & low);
            let i1 = i0 | bit;
            for j in 0..dim {
                let a = self.data[i0 * dim + j];
                let b = self.data[i1 * dim + j];
                self.data[i0 * dim + j] = u[0][0] * a + u[0][1] * b;
                self.data[i1 * dim + j] = u[1][0] * a + u[1][1] * b;
            }
        }
        // rho -> rho U^dagger
        for base in 0..dim / 2 {
            let j0 = ((base & !low) << 1) | (base & low);
            let j1 = j0 | bit;
            for i in 0..dim {
                let a = self.data[i * dim + j0];
                let b = self.data[i * dim + j1];
                self.data[i * dim + j0] = a * u[0][0].conj() + b * u[0][1].conj();
                self.data[i * dim + j1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    fn apply_unitary2(&mut self, u: &[[C64; 4]; 4], qa: usize, qb: usize) {
        debug_assert!(qa != qb && qa < self.n_qubits && qb < self.n_qubits);
        let dim = self.dim;
        let (lo, hi) = (qa.min(qb), qa.max(qb));
        let (blo, bhi) = (1usize << lo, 1usize << hi);
        let mlow = blo - 1;
        let mmid = (bhi >> 1) - blo; // bits between lo and hi, in compressed space
        let idx4 = |base: usize| {
            // deposit two zero bits at positions lo and hi
            let x = ((base & !mlow & !mmid) << 2) | ((base & mmid) << 1) | (base & mlow);
            [
                x,
                x | (1 << qa),
                x | (1 << qb),
                x | (1 << qa) | (1 << qb),
            ]
        };
        for base in 0..dim / 4 {
            let rows = idx4(base);
            for j in 0..dim {
                let v = [
                    self.data[rows[0] * dim + j],
                    self.data[rows[1] * dim + j],
                    self.data[rows[2] * dim + j],
                    self.data[rows[3] * dim + j],
                ];
                for k in 0..4 {
                    self.data[rows[k] * dim + j] =
                        u[k][0] * v[0] + u[k][1] * v[1] + u[k][2] * v[2] + u[k][3] * v[3];
                }
            }
        }
        for base in 0..dim / 4 {
            let cols = idx4(base);
            for i in 0..dim {
                let v = [
                    self.data[i * dim + cols[0]],
                    self.data[i * dim + cols[1]],
                    self.data[i * dim + cols[2]],
                    self.data[i * dim + cols[3]],
                ];
                for k in 0..4 {
                    self.data[i * dim + cols[k]] = v[0] * u[k][0].conj()
                        + v[1] * u[k][1].conj()
                        + v[2] * u[k][2].conj()
                        + v[3] * u[k][3].conj();
                }
            }
        }
    }

    /// k-qubit depolarising channel on `support`:
    /// `rho -> (1-p) rho + p (I/2^k (x) tr_support rho)`.
    pub fn depolarise(&mut self, support: &[usize], p: f64) {
        debug_assert!((0.0..=1.0).contains(&p));
        if p == 0.0 {
            return;
        }
        let dim = self.dim;
        let k = support.len();
        let sup_dim = 1usize << k;
        let rest_dim = dim >> k;
        let mut sup_mask = 0usize;
        for &q in support {
            sup_mask |= 1 << q;
        }
        // expansion tables: compressed rest/support values -> full-index bits
        let rest_expand: Vec<usize> = (0..rest_dim)
            .map(|mut rs| {
                let mut out = 0usize;
                for q in 0..self.n_qubits {
                    if sup_mask & (1 << q) == 0 {
                        out |= (rs & 1) << q;
                        rs >>= 1;
                    }
                }
                out
            })
            .collect();
        let sup_expand: Vec<usize> = (0..sup_dim)
            .map(|sv| {
                let mut out = 0usize;
                let mut b = 0;
                for &q in support {
                    out |= ((sv >> b) & 1) << q;
                    b += 1;
                }
                out
            })
            .collect();

        // sigma = tr_support rho, on the rest register
        let mut sigma = vec![C64::ZERO; rest_dim * rest_dim];
        for (ri, &re_i) in rest_expand.iter().enumerate() {
            for (rj, &re_j) in rest_expand.iter().enumerate() {
                let mut acc = C64::ZERO;
                for &se in &sup_expand {
                    acc += self.data[(re_i | se) * dim + (re_j | se)];
                }
                sigma[ri * rest_dim + rj] = acc;
            }
        }
        for v in self.data.iter_mut() {
            *v *= 1.0 - p;
        }
        let w = p / sup_dim as f64;
        for (ri, &re_i) in rest_expand.iter().enumerate() {
            for (rj, &re_j) in rest_expand.iter().enumerate() {
                let add = sigma[ri * rest_dim + rj] * w;
                for &se in &sup_expand {
                    self.data[(re_i | se) * dim + (re_j | se)] += add;
                }
            }
        }
    }

    /// Expectation of a single Z string given by its support bit mask.
    pub fn z_string_expectation(&self, mask: usize) -> f64 {
        let mut v = 0.0;
        for i in 0..self.dim {
            let sign = if ((i & mask).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            v += sign * self.data[i * self.dim + i].re;
        }
        v
    }

    fn term_mask(&self, support: &[usize]) -> Result<usize> {
        let mut mask = 0usize;
        for &q in support {
            if q >= self.n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "observable touches qubit {q} but the state has {} qubits",
                    self.n_qubits
                )));
            }
            mask |= 1 << q;
        }
        Ok(mask)
    }

    /// Exact per-term expectations of `obs` on this state.
    pub fn term_expectations(&self, obs: &Observable) -> Result<Vec<f64>> {
        let imag: f64 = (0..self.dim).map(|i| self.data[i * self.dim + i].im.abs()).sum();
        assert!(imag < 1e-10, "density matrix diagonal has imaginary residue {imag}");
        obs.terms()
            .iter()
            .map(|t| Ok(self.z_string_expectation(self.term_mask(&t.support)?)))
            .collect()
    }
}

/// Simulates `circuit` from the all-zeros state, applying after each gate the
/// noise channel `noise` assigns to that gate class at wall-clock `time`.
pub fn simulate(circuit: &Circuit, noise: &TimedNoiseModel, time_h: f64) -> Result<DensityState> {
    let mut state = DensityState::zero_state(circuit.n_qubits())?;
    let resolver = noise.resolver(time_h);
    for gate in circuit.gates() {
        state.apply_gate(gate);
        let p = resolver.rate_for(gate);
        if p > 0.0 {
            state.depolarise(&gate.support(), p);
        }
    }
    Ok(state)
}

/// Exact expectation value `tr(rho O)` of a Z-string observable.
pub fn expectation(state: &DensityState, obs: &Observable) -> Result<f64> {
    let per_term = state.term_expectations(obs)?;
    Ok(per_term.iter().zip(obs.terms()).map(|(e, t)| e * t.weight).sum())
}

/// A shot-sampled estimate of an expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_shots: u64,
}

/// Draws `n_shots` outcomes per observable term from its exact +/-1
/// eigenvalue distribution and aggregates the weighted empirical means.
///
/// With `w_t` the term weights and `m_t`, `s_t` the per-term empirical mean
/// and standard deviation, the estimate is `sum w_t m_t` with standard error
/// `sqrt(sum w_t^2 s_t^2 / n)`. Deterministic given the random source.
pub fn sample_shots<R: Rng + ?Sized>(
    state: &DensityState,
    obs: &Observable,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotEstimate> {
    let exact = state.term_expectations(obs)?;
    sample_from_term_means(&exact, obs, n_shots, rng)
}

/// Shot sampling from precomputed per-term expectations. Split out so ZNE can
/// inject readout-deflated term means without re-simulating.
pub fn sample_from_term_means<R: Rng + ?Sized>(
    term_means: &[f64],
    obs: &Observable,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotEstimate> {
    if n_shots == 0 {
        return Err(Error::invalid("n_shots must be at least 1"));
    }
    let n = n_shots as f64;
    let mut value = 0.0;
    let mut var_of_mean = 0.0;
    for (e, term) in term_means.iter().zip(obs.terms()) {
        let p_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let hits = Binomial::new(n_shots, p_plus)
            .expect("clamped probability is valid")
            .sample(rng);
        let mean = 2.0 * (hits as f64) / n - 1.0;
        // +/-1 outcomes: sum of squared deviations = n (1 - mean^2)
        let sample_var = if n_shots > 1 { n * (1.0 - mean * mean) / (n - 1.0) } else { 0.0 };
        value += term.weight * mean;
        var_of_mean += term.weight * term.weight * sample_var / n;
    }
    Ok(ShotEstimate { value, std_error: var_of_mean.sqrt(), n_shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_qtc;
    use crate::noise::{DriftProfile, NoiseSpec, TimedNoiseModel};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ideal() -> TimedNoiseModel {
        TimedNoiseModel { base: NoiseSpec::Ideal, drift: DriftProfile::Constant }
    }

    #[test]
    fn empty_circuit_is_ground_state() {
        let c = Circuit::new(3, vec![], "empty").unwrap();
        let s = simulate(&c, &ideal(), 0.0).unwrap();
        assert_abs_diff_eq!(s.matrix()[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-12);
        let z0 = expectation(&s, &Observable::single_z(0)).unwrap();
        assert_abs_diff_eq!(z0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pi_rotation_flips_z() {
        let c = Circuit::new(2, vec![Gate::RotX { qubit: 0, angle: PI }], "flip").unwrap();
        let s = simulate(&c, &ideal(), 0.0).unwrap();
        let z0 = expectation(&s, &Observable::single_z(0)).unwrap();
        assert_abs_diff_eq!(z0, -1.0, epsilon = 1e-12);
        let z1 = expectation(&s, &Observable::single_z(1)).unwrap();
        assert_abs_diff_eq!(z1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hadamard_zeroes_z() {
        let c = Circuit::new(1, vec![Gate::Hadamard { qubit: 0 }], "h").unwrap();
        let s = simulate(&c, &ideal(), 0.0).unwrap();
        assert_abs_diff_eq!(
            expectation(&s, &Observable::single_z(0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn entangler_computes_parity() {
        // |00> -RotX(pi) on control-> |1>c, then CX makes |11>
        let c = Circuit::new(
            2,
            vec![Gate::RotX { qubit: 0, angle: PI }, Gate::Entangler { control: 0, target: 1 }],
            "cx",
        )
        .unwrap();
        let s = simulate(&c, &ideal(), 0.0).unwrap();
        assert_abs_diff_eq!(
            expectation(&s, &Observable::single_z(1)).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        let zz = Observable::new(vec![(vec![0, 1], 1.0)]).unwrap();
        assert_abs_diff_eq!(expectation(&s, &zz).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_depolarising_gives_maximally_mixed_marginal() {
        let mut s = DensityState::zero_state(2).unwrap();
        s.depolarise(&[0], 1.0);
        assert_abs_diff_eq!(s.z_string_expectation(0b01), 0.0, epsilon = 1e-12);
        // untouched qubit keeps its value
        assert_abs_diff_eq!(s.z_string_expectation(0b10), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_depolarising_scales_pauli_expectation() {
        let mut s = DensityState::zero_state(1).unwrap();
        s.depolarise(&[0], 0.2);
        assert_abs_diff_eq!(s.z_string_expectation(1), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_state_has_zero_z_strings() {
        let mut s = DensityState::zero_state(3).unwrap();
        s.depolarise(&[0, 1], 1.0);
        s.depolarise(&[2], 1.0);
        for mask in 1..8usize {
            assert_abs_diff_eq!(s.z_string_expectation(mask), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_free_expectation_is_time_independent() {
        let c = build_qtc(4, 2, 0.7, 0.3).unwrap();
        let obs = Observable::single_z(0);
        let e0 = expectation(&simulate(&c, &ideal(), 0.0).unwrap(), &obs).unwrap();
        for t in [1.0, 13.5, 200.0] {
            let et = expectation(&simulate(&c, &ideal(), t).unwrap(), &obs).unwrap();
            assert_abs_diff_eq!(et, e0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenstate_sampling_is_exact() {
        let s = DensityState::zero_state(2).unwrap();
        let obs = Observable::single_z(1);
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let est = sample_shots(&s, &obs, 500, &mut rng).unwrap();
            assert_eq!(est.value, 1.0);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let c = build_qtc(4, 1, 0.7, 0.3).unwrap();
        let s = simulate(&c, &ideal(), 0.0).unwrap();
        let obs = Observable::single_z(0);
        let a = sample_shots(&s, &obs, 4096, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_shots(&s, &obs, 4096, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_shots_rejected() {
        let s = DensityState::zero_state(1).unwrap();
        let obs = Observable::single_z(0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_shots(&s, &obs, 0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn observable_dimension_mismatch_is_reported() {
        let s = DensityState::zero_state(2).unwrap();
        let obs = Observable::single_z(5);
        assert!(matches!(expectation(&s, &obs), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mixed_state_sampling_concentrates() {
        // maximally mixed single qubit: estimate within +/-0.05 of 0 at 4096
        // shots for the wide majority of seeds (3 sigma ~ 0.047)
        let mut s = DensityState::zero_state(1).unwrap();
        s.depolarise(&[0], 1.0);
        let obs = Observable::single_z(0);
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let est = sample_shots(&s, &obs, 4096, &mut rng).unwrap();
            if est.value.abs() < 0.05 {
                ok += 1;
            }
        }
        assert!(ok >= 99, "only {ok}/100 seeds concentrated");
    }
}
