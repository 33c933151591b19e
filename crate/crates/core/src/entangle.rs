//! Time-bin entangled photon pairs from a walk-shaped SPDC pump, and
//! two-station joint HOM measurement statistics.
//!
//! A pump pulse prepared in `sum_j a_j |t_j>` drives SPDC at low gain, so the
//! signal-idler pair emerges as `sum_j a_j |t_j>|t_j>` (higher-order terms
//! neglected). Each station interferes its photon with a locally engineered
//! reference, realizing the two-element POVM `{E_ab, E_b}` with
//! `E_ab = (I - V |phi><phi|)/2`; the two HOM events are independent, so
//! joint statistics are products of the local elements.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hom::NoiseModel;
use crate::quantum::{BasisLabel, PureState};

/// Complex pump amplitudes over the time-bin grid, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpProfile {
    amplitudes: Vec<Complex64>,
}

impl PumpProfile {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes
                .into_iter()
                .map(|a| a / Complex64::from(norm))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// One measurement station: its reference photon and detection noise.
#[derive(Debug, Clone, PartialEq)]
pub struct StationConfig {
    pub reference: PureState,
    pub noise: NoiseModel,
}

/// The signal-idler state `sum_j a_j |t_j>|t_j>` generated by a pump with
/// amplitudes `a_j`; Schmidt coefficients equal `|a_j|`.
pub fn spdc_entangled_state(pump: &PumpProfile) -> PureState {
    let n = pump.dim();
    let mut amplitudes = vec![Complex64::default(); n * n];
    for (j, &a) in pump.amplitudes().iter().enumerate() {
        amplitudes[j * n + j] = a;
    }
    PureState::new(amplitudes, BasisLabel::TimeBin).expect("unit norm by construction")
}

/// The two-element HOM POVM of a station: `(E_ab, E_b)` with
/// `E_ab = (I - V |phi><phi|)/2` and `E_b = I - E_ab`.
pub fn station_povm(config: &StationConfig) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = config.reference.dim();
    let identity = DMatrix::from_diagonal_element(dim, dim, Complex64::from(1.0));
    let projector = config.reference.amplitudes() * config.reference.amplitudes().adjoint();
    let e_ab = (&identity - projector * Complex64::from(config.noise.visibility()))
        * Complex64::from(0.5);
    let e_b = identity - &e_ab;
    (e_ab, e_b)
}

/// Probability that both stations record an anti-bunching event:
/// `<Psi| E_ab^A ⊗ E_ab^B |Psi>`.
pub fn joint_antibunching(
    state: &PureState,
    alice: &StationConfig,
    bob: &StationConfig,
) -> Result<f64> {
    let n = alice.reference.dim();
    if bob.reference.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bob.reference.dim(),
        });
    }
    if state.dim() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: state.dim(),
        });
    }
    let (e_alice, _) = station_povm(alice);
    let (e_bob, _) = station_povm(bob);
    // Reshape the bipartite vector as a matrix (Alice index slow), so that
    // (A ⊗ B)|Psi> = vec(A M B^T).
    let m = DMatrix::from_fn(n, n, |i, j| state.amplitude(i * n + j));
    let transformed = &e_alice * m * e_bob.transpose();
    let mut overlap = Complex64::default();
    for i in 0..n {
        for j in 0..n {
            overlap += state.amplitude(i * n + j).conj() * transformed[(i, j)];
        }
    }
    Ok(overlap.re.clamp(0.0, 0.25))
}

/// Joint anti-bunching probabilities over a grid of reference pairs; entry
/// `(i, j)` pairs Alice's reference `i` with Bob's reference `j`. Both
/// stations share the given noise model.
pub fn correlation_table(
    state: &PureState,
    alice_refs: &[PureState],
    bob_refs: &[PureState],
    noise: &NoiseModel,
) -> Result<Vec<Vec<f64>>> {
    let mut table = Vec::with_capacity(alice_refs.len());
    for a in alice_refs {
        let alice = StationConfig {
            reference: a.clone(),
            noise: *noise,
        };
        let mut row = Vec::with_capacity(bob_refs.len());
        for b in bob_refs {
            let bob = StationConfig {
                reference: b.clone(),
                noise: *noise,
            };
            row.push(joint_antibunching(state, &alice, &bob)?);
        }
        table.push(row);
    }
    Ok(table)
}
