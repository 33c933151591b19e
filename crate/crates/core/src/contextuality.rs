//! CHSH-type noncontextuality test on hybrid polarization-time states.
//!
//! A single photon entangled between its time-bin and polarization degrees
//! of freedom violates the bound |S| ≤ 2 that holds for every noncontextual
//! classical model, with the quantum maximum 2√2. The time-qubit side is
//! measured through the HOM scheme (the observable's eigenstates serve as
//! reference photons), the polarization side by direct projection.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::quantum::{convex_mixture, BasisLabel, DensityMatrix, Observable, PureState};

/// The four measurement settings of a CHSH evaluation: `a` act on the time
/// qubit, `b` on the polarization qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshSettings {
    pub a0: Observable,
    pub a1: Observable,
    pub b0: Observable,
    pub b1: Observable,
}

/// Estimated CHSH quantity with its four correlators and propagated
/// Poissonian standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub s_value: f64,
    pub correlators: [f64; 4],
    pub standard_error: f64,
}

/// The maximally entangled polarization-time single-photon state
/// `(|t0>|H> + |t1>|V>)/sqrt(2)` in canonical hybrid ordering.
///
/// Both reduced states are maximally mixed, and the stated optimal settings
/// reach the quantum bound |S| = 2√2 on it.
pub fn hybrid_entangled_state() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(
        vec![
            Complex64::new(s, 0.0),
            Complex64::default(),
            Complex64::default(),
            Complex64::new(s, 0.0),
        ],
        BasisLabel::Hybrid { time_dim: 2 },
    )
    .expect("normalized by construction")
}

/// Correlator `Tr[(A ⊗ B) rho]` with `A` on the time qubit (slow index) and
/// `B` on the polarization qubit (fast index).
pub fn correlator(state: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    let joint = a.matrix().kronecker(b.matrix());
    if joint.nrows() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: joint.nrows(),
        });
    }
    let product = joint * state.matrix();
    Ok(product.trace().re)
}

/// The optimal settings for the hybrid entangled state: `{sigma_z, sigma_x}`
/// on time and `{(sigma_x + sigma_z)/sqrt(2), (sigma_x - sigma_z)/sqrt(2)}`
/// on polarization.
pub fn optimal_settings() -> ChshSettings {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = Observable::pauli_x();
    let z = Observable::pauli_z();
    ChshSettings {
        a0: z.clone(),
        a1: x.clone(),
        b0: Observable::linear_combination(s, &x, s, &z).expect("valid observable"),
        b1: Observable::linear_combination(s, &x, -s, &z).expect("valid observable"),
    }
}

/// `S = <A0 B0> - <A0 B1> + <A1 B0> + <A1 B1>`.
pub fn chsh_value(state: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    Ok(correlator(state, &settings.a0, &settings.b0)?
        - correlator(state, &settings.a0, &settings.b1)?
        + correlator(state, &settings.a1, &settings.b0)?
        + correlator(state, &settings.a1, &settings.b1)?)
}

/// Isotropic noise: `v * rho + (1 - v) * I/d`.
pub fn white_noise_mix(state: &DensityMatrix, v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name: "white_noise_visibility",
            value: v,
            min: 0.0,
            max: 1.0,
        });
    }
    let mixed = DensityMatrix::maximally_mixed(state.dim())?;
    convex_mixture(&[(state.clone(), v), (mixed, 1.0 - v)])
}

/// Count-level CHSH simulation mirroring the experimental chain.
///
/// Per setting pair, the time qubit is measured through the HOM two-outcome
/// element `E_phi = (I - |phi><phi|)/2` at each of the observable's two
/// eigenstates (half the photon-pair budget each), coincident with a
/// projective polarization outcome. Anti-bunching counts are Poissonian;
/// correlators use anti-bunching counts only, normalized per method (a),
/// which reduces to the contrast `sum (-a) b C_ab / total`. The standard
/// error propagates the Poissonian fluctuations of all counts.
pub fn simulate_chsh(
    state: &DensityMatrix,
    settings: &ChshSettings,
    shots_per_setting: u64,
    seed: u64,
) -> Result<ChshResult> {
    if shots_per_setting == 0 {
        return Err(Error::InvalidParameter(
            "shots_per_setting must be at least 1".into(),
        ));
    }
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: state.dim(),
        });
    }
    let pairs = [
        (&settings.a0, &settings.b0),
        (&settings.a0, &settings.b1),
        (&settings.a1, &settings.b0),
        (&settings.a1, &settings.b1),
    ];
    let mut correlators = [0.0; 4];
    let mut variances = [0.0; 4];
    for (index, (a, b)) in pairs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let (phi_plus, phi_minus) = a.qubit_eigenstates(BasisLabel::TimeBin)?;
        let budget = shots_per_setting as f64 / 2.0;
        let identity = DMatrix::from_diagonal_element(2, 2, Complex64::from(1.0));
        let mut total = 0.0;
        let mut contrast = 0.0;
        for (a_outcome, phi) in [(1.0, &phi_plus), (-1.0, &phi_minus)] {
            // HOM anti-bunching element at unit visibility.
            let projector = phi.amplitudes() * phi.amplitudes().adjoint();
            let e_ab = (&identity - projector) * Complex64::from(0.5);
            for b_outcome in [1.0, -1.0] {
                let pol_proj =
                    (&identity + b.matrix() * Complex64::from(b_outcome)) * Complex64::from(0.5);
                let joint = e_ab.kronecker(&pol_proj);
                let lambda = (joint * state.matrix()).trace().re.max(0.0);
                let counts = poisson_draw(budget * lambda, &mut rng) as f64;
                total += counts;
                // Anti-bunching with reference phi_a flags the orthogonal
                // time outcome, hence the -a weight.
                contrast += -a_outcome * b_outcome * counts;
            }
        }
        if total == 0.0 {
            return Err(Error::ZeroCounts {
                reason: "no coincidences recorded for a CHSH setting",
            });
        }
        let estimate = contrast / total;
        correlators[index] = estimate;
        variances[index] = (1.0 - estimate * estimate).max(0.0) / total;
    }
    let s_value = correlators[0] - correlators[1] + correlators[2] + correlators[3];
    let standard_error = variances.iter().sum::<f64>().sqrt();
    Ok(ChshResult {
        s_value,
        correlators,
        standard_error,
    })
}

fn poisson_draw(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let sample: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    sample as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        partial_trace, random_pure_state_rng, trace_distance, Subsystem,
    };
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

    #[test]
    fn hybrid_state_reduces_to_maximally_mixed() {
        let rho = hybrid_entangled_state().to_density();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let time = partial_trace(&rho, Subsystem::Second, (2, 2)).unwrap();
        let pol = partial_trace(&rho, Subsystem::First, (2, 2)).unwrap();
        assert!(trace_distance(&time, &mixed).unwrap() < 1e-12);
        assert!(trace_distance(&pol, &mixed).unwrap() < 1e-12);
        // Amplitude on |t0>|H> is 1/sqrt(2).
        assert_abs_diff_eq!(
            hybrid_entangled_state().amplitude(0).re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn correlator_basis_cases() {
        let z = Observable::pauli_z();
        // Both branches of the entangled state carry aligned z-outcomes.
        let entangled = hybrid_entangled_state().to_density();
        assert_abs_diff_eq!(correlator(&entangled, &z, &z).unwrap(), 1.0, epsilon = 1e-12);
        // Product eigenstate.
        let product = PureState::time_bin(2, 0)
            .unwrap()
            .tensor(&PureState::horizontal())
            .to_density();
        assert_abs_diff_eq!(correlator(&product, &z, &z).unwrap(), 1.0, epsilon = 1e-12);
        // Dimension mismatch is rejected.
        let small = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(correlator(&small, &z, &z).is_err());
    }

    #[test]
    fn optimal_settings_are_anticommuting_involutions() {
        let settings = optimal_settings();
        for obs in [&settings.a0, &settings.a1, &settings.b0, &settings.b1] {
            let square = obs.matrix() * obs.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(square[(i, j)].re, expected, epsilon = 1e-12);
                    assert_abs_diff_eq!(square[(i, j)].im, 0.0, epsilon = 1e-12);
                }
            }
        }
        let anti = settings.b0.matrix() * settings.b1.matrix()
            + settings.b1.matrix() * settings.b0.matrix();
        for entry in anti.iter() {
            assert_abs_diff_eq!(entry.norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn chsh_saturates_tsirelson_on_the_entangled_state() {
        let rho = hybrid_entangled_state().to_density();
        let s = chsh_value(&rho, &optimal_settings()).unwrap();
        assert_abs_diff_eq!(s, TSIRELSON, epsilon = 1e-12);
    }

    #[test]
    fn chsh_on_product_state() {
        let rho = PureState::time_bin(2, 0)
            .unwrap()
            .tensor(&PureState::horizontal())
            .to_density();
        let s = chsh_value(&rho, &optimal_settings()).unwrap();
        assert_abs_diff_eq!(s, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_scales_chsh_linearly() {
        let rho = hybrid_entangled_state().to_density();
        for v in [0.0, 0.3, 0.7, 0.9702, 1.0] {
            let noisy = white_noise_mix(&rho, v).unwrap();
            let s = chsh_value(&noisy, &optimal_settings()).unwrap();
            assert_abs_diff_eq!(s, v * TSIRELSON, epsilon = 1e-12);
        }
        // The experimental value corresponds to v = 0.9702.
        let noisy = white_noise_mix(&rho, 0.9702).unwrap();
        let s = chsh_value(&noisy, &optimal_settings()).unwrap();
        assert_abs_diff_eq!(s, 2.744, epsilon = 1e-3);
    }

    #[test]
    fn chsh_is_linear_in_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let settings = optimal_settings();
        for _ in 0..50 {
            let rho1 = random_pure_state_rng(4, &mut rng).unwrap().to_density();
            let rho2 = random_pure_state_rng(4, &mut rng).unwrap().to_density();
            let mix = convex_mixture(&[(rho1.clone(), 0.5), (rho2.clone(), 0.5)]).unwrap();
            let lhs = chsh_value(&mix, &settings).unwrap();
            let rhs = 0.5 * chsh_value(&rho1, &settings).unwrap()
                + 0.5 * chsh_value(&rho2, &settings).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    fn random_observable(rng: &mut ChaCha8Rng) -> Observable {
        let psi = random_pure_state_rng(2, rng).unwrap();
        let perp = psi.orthogonal().unwrap();
        let m = psi.amplitudes() * psi.amplitudes().adjoint()
            - perp.amplitudes() * perp.amplitudes().adjoint();
        Observable::new(m).unwrap()
    }

    fn random_settings(rng: &mut ChaCha8Rng) -> ChshSettings {
        ChshSettings {
            a0: random_observable(rng),
            a1: random_observable(rng),
            b0: random_observable(rng),
            b1: random_observable(rng),
        }
    }

    #[test]
    fn tsirelson_bound_holds_for_random_states_and_settings() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..10_000 {
            let settings = random_settings(&mut rng);
            let rho = random_pure_state_rng(4, &mut rng).unwrap().to_density();
            let s = chsh_value(&rho, &settings).unwrap();
            assert!(s.abs() <= TSIRELSON + 1e-9, "S = {s}");
        }
    }

    #[test]
    fn classical_bound_holds_for_product_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        for _ in 0..10_000 {
            let settings = random_settings(&mut rng);
            let time = random_pure_state_rng(2, &mut rng).unwrap();
            let pol = random_pure_state_rng(2, &mut rng).unwrap();
            let rho = time.tensor(&pol).to_density();
            let s = chsh_value(&rho, &settings).unwrap();
            assert!(s.abs() <= 2.0 + 1e-9, "S = {s}");
        }
    }

    #[test]
    fn simulation_concentrates_on_the_ideal_value() {
        let rho = hybrid_entangled_state().to_density();
        let result = simulate_chsh(&rho, &optimal_settings(), 1_000_000, 21).unwrap();
        assert!(
            (2.82..=2.84).contains(&result.s_value),
            "S = {}",
            result.s_value
        );
        let again = simulate_chsh(&rho, &optimal_settings(), 1_000_000, 21).unwrap();
        assert_eq!(result, again);
    }

    #[test]
    fn simulation_reproduces_noisy_experimental_value() {
        let rho = white_noise_mix(&hybrid_entangled_state().to_density(), 0.9702).unwrap();
        let result = simulate_chsh(&rho, &optimal_settings(), 1_000_000, 33).unwrap();
        assert!(result.standard_error < 0.01);
        assert!(
            (result.s_value - 2.744).abs() <= 3.0 * result.standard_error,
            "S = {} ± {}",
            result.s_value,
            result.standard_error
        );
        assert!(result.s_value.abs() <= TSIRELSON + 5.0 * result.standard_error);
    }

    #[test]
    fn simulated_separable_states_respect_classical_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        for trial in 0..20 {
            let time = random_pure_state_rng(2, &mut rng).unwrap();
            let pol = random_pure_state_rng(2, &mut rng).unwrap();
            let rho = time.tensor(&pol).to_density();
            let settings = if rng.gen_bool(0.5) {
                optimal_settings()
            } else {
                random_settings(&mut rng)
            };
            let result = simulate_chsh(&rho, &settings, 100_000, 1000 + trial).unwrap();
            assert!(
                result.s_value.abs() <= 2.0 + 5.0 * result.standard_error,
                "S = {} ± {}",
                result.s_value,
                result.standard_error
            );
        }
    }
}
