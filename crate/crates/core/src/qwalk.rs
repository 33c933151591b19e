//! Discrete-time quantum walk on time bins with a polarization coin, and
//! numerical synthesis of arbitrary time-bin qudit states.
//!
//! One walk step applies an SU(2) coin to the polarization and then a
//! conditional shift `S = sum_k |k><k| ⊗ |↓><↓| + |k+1><k| ⊗ |↑><↑|` that
//! delays the `↑` component by one bin. Choosing the coins step by step and
//! finally projecting the coin steers the walker into an arbitrary
//! superposition of bins, with the squared projection norm as the success
//! probability. Amplitudes are indexed `2 * bin + coin` with coin 0 = `|↑>`,
//! matching the crate's canonical hybrid ordering.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::{bfgs, nelder_mead, BfgsOptions, NelderMeadOptions};
use crate::quantum::{BasisLabel, PureState};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Euler angles of an SU(2) coin, canonicalized to `theta ∈ [0, π]` and
/// phases in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    pub theta: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl CoinParams {
    /// Accepts angles already in canonical range.
    pub fn new(theta: f64, phi1: f64, phi2: f64) -> Result<Self> {
        for (name, value, max) in [("theta", theta, PI), ("phi1", phi1, TAU), ("phi2", phi2, TAU)] {
            let open_end = max == TAU && value == max;
            if !value.is_finite() || !(0.0..=max).contains(&value) || open_end {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    min: 0.0,
                    max,
                });
            }
        }
        Ok(Self { theta, phi1, phi2 })
    }

    /// Folds arbitrary finite angles into canonical range. The coin matrix
    /// changes only by a global phase: `U(2π-θ, φ1+π, φ2+π) = -U(θ, φ1, φ2)`.
    pub fn canonical(theta: f64, phi1: f64, phi2: f64) -> Result<Self> {
        if !theta.is_finite() || !phi1.is_finite() || !phi2.is_finite() {
            return Err(Error::InvalidParameter(
                "coin angles must be finite".into(),
            ));
        }
        let mut theta = theta.rem_euclid(TAU);
        let mut phi1 = phi1;
        let mut phi2 = phi2;
        if theta > PI {
            theta = TAU - theta;
            phi1 += PI;
            phi2 += PI;
        }
        Ok(Self {
            theta,
            phi1: phi1.rem_euclid(TAU),
            phi2: phi2.rem_euclid(TAU),
        })
    }
}

/// Coin unitary `U = Rz(phi2) Ry(theta) Rz(phi1)` with
/// `Ry(θ) = [[cos θ/2, sin θ/2], [-sin θ/2, cos θ/2]]` and
/// `Rz(φ) = diag(1, e^{iφ})`, so `(π/2, 0, π)` is exactly the Hadamard coin.
pub fn angles_to_coin(params: &CoinParams) -> Matrix2<Complex64> {
    coin_matrix(params.theta, params.phi1, params.phi2)
}

fn coin_matrix(theta: f64, phi1: f64, phi2: f64) -> Matrix2<Complex64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e1 = Complex64::new(0.0, phi1).exp();
    let e2 = Complex64::new(0.0, phi2).exp();
    Matrix2::new(
        Complex64::from(c),
        e1 * s,
        -e2 * s,
        e1 * e2 * c,
    )
}

/// Joint coin-walker state over `n_bins` time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    amplitudes: Vec<Complex64>,
    step_count: usize,
}

impl WalkState {
    /// Validates unit norm and that the support lies within bins
    /// `{0, ..., step_count}`.
    pub fn new(amplitudes: Vec<Complex64>, step_count: usize) -> Result<Self> {
        if amplitudes.len() < 2 || !amplitudes.len().is_multiple_of(2) {
            return Err(Error::EmptyState);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        let n_bins = amplitudes.len() / 2;
        for bin in (step_count + 1)..n_bins {
            if amplitudes[2 * bin].norm() > 1e-12 || amplitudes[2 * bin + 1].norm() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "support outside the light cone: bin {bin} occupied after {step_count} steps"
                )));
            }
        }
        Ok(Self {
            amplitudes,
            step_count,
        })
    }

    /// The walker at bin 0 with the given coin state, before any steps.
    pub fn at_origin(n_bins: usize, coin: &PureState) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::EmptyState);
        }
        if coin.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coin.dim(),
            });
        }
        let mut amplitudes = vec![Complex64::default(); 2 * n_bins];
        amplitudes[0] = coin.amplitude(0);
        amplitudes[1] = coin.amplitude(1);
        Self::new(amplitudes, 0)
    }

    pub fn n_bins(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude at `(bin, coin)` with coin 0 = `|↑>`.
    pub fn amplitude(&self, bin: usize, coin: usize) -> Complex64 {
        self.amplitudes[2 * bin + coin]
    }
}

/// The conditional-shift operator on `n_bins` bins as a matrix.
///
/// The `↑` column of the top bin is zero: the operator is an isometry only
/// on states without `↑` amplitude in the last bin, and walk evolution
/// rejects such states instead of wrapping them around.
pub fn shift_operator(n_bins: usize) -> Result<DMatrix<Complex64>> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter(
            "shift operator needs at least 2 bins".into(),
        ));
    }
    let dim = 2 * n_bins;
    let mut m = DMatrix::from_element(dim, dim, Complex64::default());
    let one = Complex64::from(1.0);
    for k in 0..n_bins {
        // |k, ↓> stays.
        m[(2 * k + 1, 2 * k + 1)] = one;
        // |k, ↑> moves to |k+1, ↑>.
        if k + 1 < n_bins {
            m[(2 * (k + 1), 2 * k)] = one;
        }
    }
    Ok(m)
}

/// Applies the shift in place; errors if `↑` amplitude occupies the top bin.
fn apply_shift(amplitudes: &mut [Complex64]) -> Result<()> {
    let n_bins = amplitudes.len() / 2;
    let top = amplitudes[2 * (n_bins - 1)].norm();
    if top > 1e-12 {
        return Err(Error::TopBinOccupied { amplitude: top });
    }
    for bin in (1..n_bins).rev() {
        amplitudes[2 * bin] = amplitudes[2 * (bin - 1)];
    }
    amplitudes[0] = Complex64::default();
    Ok(())
}

fn apply_coin(amplitudes: &mut [Complex64], coin: &Matrix2<Complex64>, max_bin: usize) {
    for bin in 0..=max_bin {
        let up = amplitudes[2 * bin];
        let down = amplitudes[2 * bin + 1];
        amplitudes[2 * bin] = coin[(0, 0)] * up + coin[(0, 1)] * down;
        amplitudes[2 * bin + 1] = coin[(1, 0)] * up + coin[(1, 1)] * down;
    }
}

/// Evolves a walk state by one coin-then-shift step per coin in the
/// sequence. Needs `n_bins ≥ step_count + len(coins) + 1` so the light cone
/// stays inside the allocated bins.
pub fn walk_evolve(initial: &WalkState, coins: &[CoinParams]) -> Result<WalkState> {
    let needed = initial.step_count() + coins.len() + 1;
    if initial.n_bins() < needed {
        return Err(Error::CapacityOverflow {
            needed,
            capacity: initial.n_bins(),
        });
    }
    let mut amplitudes = initial.amplitudes.clone();
    let mut support = initial.step_count();
    for params in coins {
        let coin = angles_to_coin(params);
        apply_coin(&mut amplitudes, &coin, support);
        apply_shift(&mut amplitudes)?;
        support += 1;
    }
    Ok(WalkState {
        amplitudes,
        step_count: support,
    })
}

/// Projects the coin onto `coin_state`, returning the collapsed walker and
/// the success probability (the squared norm before renormalization).
pub fn project_coin(state: &WalkState, coin_state: &PureState) -> Result<(PureState, f64)> {
    if coin_state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: coin_state.dim(),
        });
    }
    let n_bins = state.n_bins();
    let mut walker = Vec::with_capacity(n_bins);
    let mut probability = 0.0;
    for bin in 0..n_bins {
        let amp = coin_state.amplitude(0).conj() * state.amplitude(bin, 0)
            + coin_state.amplitude(1).conj() * state.amplitude(bin, 1);
        probability += amp.norm_sqr();
        walker.push(amp);
    }
    if probability < 1e-12 {
        return Err(Error::ProjectionAnnihilates { probability });
    }
    let walker = PureState::normalized(walker, BasisLabel::TimeBin)?;
    Ok((walker, probability))
}

/// A coin sequence that prepares a target walker state.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    /// One coin per walk step.
    pub coins: Vec<CoinParams>,
    /// Coin state to project on after the last step; the optimizer works
    /// with a fixed `|↑>` projection preceded by a free final coin rotation,
    /// which is folded into this state.
    pub projection: PureState,
    /// `|<target|walker>|^2` of the collapsed walker.
    pub fidelity: f64,
    /// Probability of the coin projection succeeding.
    pub success_probability: f64,
}

struct SynthesisProblem {
    target: Vec<Complex64>,
    n_steps: usize,
}

impl SynthesisProblem {
    fn n_bins(&self) -> usize {
        self.n_steps + 1
    }

    /// Walker coefficients after the walk and the final coin rotation,
    /// taking the `|↑>` component of every bin.
    fn walker(&self, params: &[f64]) -> Vec<Complex64> {
        let n_bins = self.n_bins();
        let mut amplitudes = vec![Complex64::default(); 2 * n_bins];
        amplitudes[0] = Complex64::from(1.0);
        for step in 0..self.n_steps {
            let coin = coin_matrix(
                params[3 * step],
                params[3 * step + 1],
                params[3 * step + 2],
            );
            apply_coin(&mut amplitudes, &coin, step);
            apply_shift(&mut amplitudes).expect("capacity covers the light cone");
        }
        let last = 3 * self.n_steps;
        let final_coin = coin_matrix(params[last], params[last + 1], params[last + 2]);
        apply_coin(&mut amplitudes, &final_coin, self.n_steps);
        (0..n_bins).map(|bin| amplitudes[2 * bin]).collect()
    }

    fn fidelity_and_success(&self, params: &[f64]) -> (f64, f64) {
        let walker = self.walker(params);
        let success: f64 = walker.iter().map(|a| a.norm_sqr()).sum();
        if success < 1e-15 {
            return (0.0, success);
        }
        let overlap: Complex64 = self
            .target
            .iter()
            .zip(&walker)
            .map(|(t, w)| t.conj() * w)
            .sum();
        (overlap.norm_sqr() / success, success)
    }

    /// `(1 - F^2) + 0.1 (1 - P)`: fidelity first, ties broken toward higher
    /// success probability.
    fn objective(&self, params: &[f64]) -> f64 {
        let (fidelity, success) = self.fidelity_and_success(params);
        (1.0 - fidelity * fidelity) + 0.1 * (1.0 - success)
    }
}

/// Searches for coin sequences preparing `target` in `n_steps` walk steps.
///
/// Derivative-free simplex search over the `3 (n_steps + 1)` coin angles
/// (walk coins plus the final rotation), restarted from `restarts` seeded
/// random initializations with a quasi-Newton polish of each candidate; the
/// best objective wins, earliest restart on ties. Reported fidelity and
/// success probability are recomputed through [`walk_evolve`] and
/// [`project_coin`] from the returned parameters.
pub fn synthesize(
    target: &PureState,
    n_steps: usize,
    restarts: usize,
    seed: u64,
) -> Result<SynthesisResult> {
    let dim = target.dim();
    if n_steps + 1 < dim {
        return Err(Error::TooFewSteps {
            dim,
            needed: dim - 1,
            got: n_steps,
        });
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter(
            "at least one restart is required".into(),
        ));
    }
    let n_bins = n_steps + 1;
    let mut padded = vec![Complex64::default(); n_bins];
    padded[..dim].copy_from_slice(target.amplitudes().as_slice());
    let problem = SynthesisProblem {
        target: padded,
        n_steps,
    };
    let n_params = 3 * (n_steps + 1);
    let nm_opts = NelderMeadOptions {
        max_evals: 350 * n_params,
        f_tol: 1e-13,
        x_tol: 1e-9,
        initial_step: 0.6,
    };
    let polish_opts = BfgsOptions {
        max_iterations: 250,
        grad_tol: 1e-10,
        step_tol: 1e-13,
        fd_step: 1e-7,
    };

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let x0: Vec<f64> = (0..n_params)
            .map(|k| {
                if k % 3 == 0 {
                    rng.gen_range(0.0..PI)
                } else {
                    rng.gen_range(0.0..TAU)
                }
            })
            .collect();
        let coarse = nelder_mead(|p| problem.objective(p), &x0, &nm_opts);
        let polished = bfgs(|p| problem.objective(p), &coarse.x, &polish_opts);
        let candidate = if polished.f < coarse.f {
            (polished.f, restart, polished.x)
        } else {
            (coarse.f, restart, coarse.x)
        };
        let replace = match &best {
            None => true,
            Some((f, _, _)) => candidate.0 < *f,
        };
        if replace {
            best = Some(candidate);
        }
    }
    let (_, _, params) = best.expect("restarts >= 1");

    let coins: Vec<CoinParams> = (0..n_steps)
        .map(|step| {
            CoinParams::canonical(
                params[3 * step],
                params[3 * step + 1],
                params[3 * step + 2],
            )
        })
        .collect::<Result<_>>()?;
    // Fold the final coin rotation into the projection state: projecting on
    // |↑> after F equals projecting on F†|↑> directly.
    let last = 3 * n_steps;
    let final_coin = coin_matrix(params[last], params[last + 1], params[last + 2]);
    let projection = PureState::normalized(
        vec![final_coin[(0, 0)].conj(), final_coin[(0, 1)].conj()],
        BasisLabel::Polarization,
    )?;

    let initial = WalkState::at_origin(n_bins, &PureState::horizontal())?;
    let evolved = walk_evolve(&initial, &coins)?;
    let (walker, success_probability) = project_coin(&evolved, &projection)?;
    let overlap: Complex64 = problem
        .target
        .iter()
        .zip(walker.amplitudes().iter())
        .map(|(t, w)| t.conj() * w)
        .sum();
    Ok(SynthesisResult {
        coins,
        projection,
        fidelity: overlap.norm_sqr(),
        success_probability,
    })
}
