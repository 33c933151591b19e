//! The Hong-Ou-Mandel measurement model.
//!
//! Interfering an unknown target photon with a pure reference photon on a
//! balanced beam splitter gives an anti-bunching (coincidence) probability of
//!
//! ```text
//! P_ab = (1 - V <phi_ref| rho |phi_ref>) / 2
//! ```
//!
//! where `V` is the HOM visibility calibrated on indistinguishable photons.
//! `P_ab` ranges from 0 (target equals reference) to 1/2 (orthogonal, fully
//! distinguishable photons), so inverting it measures the overlap. This
//! module supplies that forward model, a Gaussian temporal-mode description
//! of delay scans, Poissonian count simulation, the three count-normalization
//! estimators, and a second-quantized oracle that re-derives the probability
//! from two-photon interference alone.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, PureState};

/// Gaussian wavepacket description of the time-bin grid.
///
/// Wavepacket amplitudes are `f(t) ∝ exp(-t^2 / (2 sigma_t^2))` with
/// `sigma_t = coherence_time / sqrt(2)`, so the amplitude overlap of two
/// packets displaced by `delta` is `exp(-delta^2 / (4 sigma_t^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalModeModel {
    bin_spacing: f64,
    coherence_time: f64,
}

impl TemporalModeModel {
    pub fn new(bin_spacing_ps: f64, coherence_time_ps: f64) -> Result<Self> {
        if bin_spacing_ps <= 0.0 || !bin_spacing_ps.is_finite() {
            return Err(Error::OutOfRange {
                name: "bin_spacing",
                value: bin_spacing_ps,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if coherence_time_ps <= 0.0 || !coherence_time_ps.is_finite() {
            return Err(Error::OutOfRange {
                name: "coherence_time",
                value: coherence_time_ps,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        Ok(Self {
            bin_spacing: bin_spacing_ps,
            coherence_time: coherence_time_ps,
        })
    }

    pub fn bin_spacing(&self) -> f64 {
        self.bin_spacing
    }

    pub fn coherence_time(&self) -> f64 {
        self.coherence_time
    }

    /// Wavepacket width `sigma_t = coherence_time / sqrt(2)`.
    pub fn sigma_t(&self) -> f64 {
        self.coherence_time / std::f64::consts::SQRT_2
    }

    /// Amplitude overlap between neighboring bins; < 0.01 for the default
    /// 8 ps spacing and 2.3 ps coherence time.
    pub fn adjacent_bin_overlap(&self) -> f64 {
        bin_overlap(self.bin_spacing, self)
    }
}

impl Default for TemporalModeModel {
    /// 8 ps bin spacing, 2.3 ps coherence time.
    fn default() -> Self {
        Self {
            bin_spacing: 8.0,
            coherence_time: 2.3,
        }
    }
}

/// Detection noise: HOM dip visibility, accidental coincidences as a fraction
/// of the mean signal counts, and the expected coincidences per setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    visibility: f64,
    accidental_rate: f64,
    mean_counts: f64,
}

impl NoiseModel {
    pub fn new(visibility: f64, accidental_rate: f64, mean_counts: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) || !visibility.is_finite() {
            return Err(Error::OutOfRange {
                name: "visibility",
                value: visibility,
                min: 0.0,
                max: 1.0,
            });
        }
        if accidental_rate < 0.0 || !accidental_rate.is_finite() {
            return Err(Error::OutOfRange {
                name: "accidental_rate",
                value: accidental_rate,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        if mean_counts <= 0.0 || !mean_counts.is_finite() {
            return Err(Error::OutOfRange {
                name: "mean_counts",
                value: mean_counts,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        Ok(Self {
            visibility,
            accidental_rate,
            mean_counts,
        })
    }

    /// Noise-free chain: unit visibility, no accidentals, 1e4 counts.
    pub fn ideal() -> Self {
        Self {
            visibility: 1.0,
            accidental_rate: 0.0,
            mean_counts: 1e4,
        }
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn accidental_rate(&self) -> f64 {
        self.accidental_rate
    }

    pub fn mean_counts(&self) -> f64 {
        self.mean_counts
    }
}

impl Default for NoiseModel {
    /// The calibration of the reference experiment: V = 98.5%, no accidental
    /// subtraction, 1e4 coincidences per setting.
    fn default() -> Self {
        Self {
            visibility: 0.985,
            accidental_rate: 0.0,
            mean_counts: 1e4,
        }
    }
}

/// One HOM projection: the reference state, the relative delay, and the
/// noise of the detection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSetting {
    pub reference: PureState,
    pub delay_ps: f64,
    pub noise: NoiseModel,
}

impl HomSetting {
    /// Zero-delay projection onto `reference`.
    pub fn at_zero_delay(reference: PureState, noise: NoiseModel) -> Self {
        Self {
            reference,
            delay_ps: 0.0,
            noise,
        }
    }
}

/// Raw coincidence counts together with the setting that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub antibunching: u64,
    pub bunching: u64,
    pub setting: HomSetting,
}

/// Anti-bunching probability `(1 - V <phi|rho|phi>) / 2`.
///
/// Reduces to `(1 - |<phi|psi>|^2)/2` for a pure target at unit visibility.
pub fn antibunching_probability(
    target: &DensityMatrix,
    reference: &PureState,
    visibility: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::OutOfRange {
            name: "visibility",
            value: visibility,
            min: 0.0,
            max: 1.0,
        });
    }
    let overlap = target.expectation(reference)?.clamp(0.0, 1.0);
    Ok(((1.0 - visibility * overlap) / 2.0).clamp(0.0, 0.5))
}

/// Inverts the anti-bunching relation: `|<phi|psi>|^2 = 1 - 2 p_ab`.
///
/// Noisy estimates slightly outside `[0, 0.5]` are clamped into range;
/// values beyond ±0.05 outside are rejected as corrupt data.
pub fn overlap_from_antibunching(p_ab: f64) -> Result<f64> {
    if !p_ab.is_finite() || !(-0.05..=0.55).contains(&p_ab) {
        return Err(Error::CorruptProbability { value: p_ab });
    }
    let p = p_ab.clamp(0.0, 0.5);
    Ok(1.0 - 2.0 * p)
}

/// Amplitude overlap of two wavepackets displaced by `delay`:
/// `exp(-delay^2 / (4 sigma_t^2))`.
pub fn bin_overlap(delay_ps: f64, model: &TemporalModeModel) -> f64 {
    let sigma = model.sigma_t();
    (-delay_ps * delay_ps / (4.0 * sigma * sigma)).exp()
}

/// Effective overlap `<phi_delta| rho |phi_delta>` of a reference displaced
/// by `delay` against the target's bin grid.
///
/// The displaced reference is matched to the nearest whole-bin shift
/// `k = round(delay / spacing)`: amplitudes move by `k` bins (dropping any
/// that leave the space) and the interference term is attenuated by the
/// squared wavepacket overlap of the residual sub-bin displacement. Whenever
/// the reference grid lines up with the target grid the overlap is exact.
pub fn displaced_overlap(
    target: &DensityMatrix,
    reference: &PureState,
    delay_ps: f64,
    model: &TemporalModeModel,
) -> Result<f64> {
    if reference.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: reference.dim(),
        });
    }
    if !delay_ps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delay must be finite (got {delay_ps})"
        )));
    }
    let spacing = model.bin_spacing();
    let shift = (delay_ps / spacing).round();
    let residual = delay_ps - shift * spacing;
    let kappa = bin_overlap(residual, model);
    let dim = target.dim() as i64;
    let mut shifted = DVector::from_element(target.dim(), Complex64::default());
    for bin in 0..dim {
        let moved = bin + shift as i64;
        if (0..dim).contains(&moved) {
            shifted[moved as usize] = reference.amplitude(bin as usize);
        }
    }
    let weighted = target.matrix() * &shifted;
    let term = shifted.dotc(&weighted).re;
    Ok((kappa * kappa * term).clamp(0.0, 1.0))
}

/// One point of a delay scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub delay_ps: f64,
    pub p_antibunch: f64,
    pub p_bunch: f64,
}

/// HOM delay scan: anti-bunching and bunching probabilities per delay.
///
/// Accidental coincidences enter as a delay-independent additive rate on
/// both outcomes, so the reported probabilities stay coincidence-normalized
/// (`p_bunch = 1 - p_antibunch`).
pub fn hom_scan(
    target: &DensityMatrix,
    reference: &PureState,
    delays_ps: &[f64],
    model: &TemporalModeModel,
    noise: &NoiseModel,
) -> Result<Vec<ScanPoint>> {
    let mut points = Vec::with_capacity(delays_ps.len());
    for &delay in delays_ps {
        let overlap = displaced_overlap(target, reference, delay, model)?;
        let p0 = ((1.0 - noise.visibility() * overlap) / 2.0).clamp(0.0, 0.5);
        let a = noise.accidental_rate();
        let p = (p0 + a) / (1.0 + 2.0 * a);
        points.push(ScanPoint {
            delay_ps: delay,
            p_antibunch: p,
            p_bunch: 1.0 - p,
        });
    }
    Ok(points)
}

/// Draws Poissonian coincidence counts for a model probability `p_ab`.
///
/// Anti-bunching counts follow `Poisson(N p_ab + N a)` and bunching counts
/// `Poisson(N (1 - p_ab) + N a)`, with `N` and `a` taken from the setting's
/// noise model. Deterministic for a given seed.
pub fn simulate_counts(p_ab: f64, setting: &HomSetting, seed: u64) -> Result<CountRecord> {
    if !(0.0..=0.5).contains(&p_ab) {
        return Err(Error::OutOfRange {
            name: "p_ab",
            value: p_ab,
            min: 0.0,
            max: 0.5,
        });
    }
    let noise = &setting.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accidental = noise.mean_counts() * noise.accidental_rate();
    let antibunching = poisson_draw(noise.mean_counts() * p_ab + accidental, &mut rng);
    let bunching = poisson_draw(noise.mean_counts() * (1.0 - p_ab) + accidental, &mut rng);
    Ok(CountRecord {
        antibunching,
        bunching,
        setting: setting.clone(),
    })
}

fn poisson_draw(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    let sample: f64 = dist.sample(rng);
    sample as u64
}

/// Method (a): normalize against the orthogonal-reference projection.
///
/// The two anti-bunching probabilities of a reference and its orthogonal
/// complement sum to 0.5 at zero delay, so
/// `p = 0.5 C_ref / (C_ref + C_orth)`.
pub fn estimate_p_method_a(counts_ref: &CountRecord, counts_orth: &CountRecord) -> Result<f64> {
    let total = counts_ref.antibunching + counts_orth.antibunching;
    if total == 0 {
        return Err(Error::ZeroCounts {
            reason: "reference and orthogonal anti-bunching counts are both zero",
        });
    }
    Ok(0.5 * counts_ref.antibunching as f64 / total as f64)
}

/// Method (b): normalize against pseudo-number-resolved bunching counts.
///
/// A bunched pair splits onto distinct detectors of its output port with
/// probability `2 r (1 - r) eta`, so the raw bunching counts are corrected
/// by that factor before forming `p = C_ab / (C_ab + C_b')`.
pub fn estimate_p_method_b(
    record: &CountRecord,
    splitting_ratio: f64,
    efficiency: f64,
) -> Result<f64> {
    if !(splitting_ratio > 0.0 && splitting_ratio < 1.0) {
        return Err(Error::OutOfRange {
            name: "splitting_ratio",
            value: splitting_ratio,
            min: 0.0,
            max: 1.0,
        });
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::OutOfRange {
            name: "efficiency",
            value: efficiency,
            min: 0.0,
            max: 1.0,
        });
    }
    let detect = 2.0 * splitting_ratio * (1.0 - splitting_ratio) * efficiency;
    let corrected_bunching = record.bunching as f64 / detect;
    let total = record.antibunching as f64 + corrected_bunching;
    if total == 0.0 {
        return Err(Error::ZeroCounts {
            reason: "corrected coincidence total is zero",
        });
    }
    Ok(record.antibunching as f64 / total)
}

/// Method (c): normalize against a far-delay point where the photons are
/// always distinguishable (`p = 0.5` there), so `p = 0.5 C_dip / C_far`.
///
/// The far record must come from a delay where `bin_overlap` is below 1e-3.
pub fn estimate_p_method_c(counts_dip: &CountRecord, counts_far: &CountRecord) -> Result<f64> {
    if counts_far.antibunching == 0 {
        return Err(Error::ZeroCounts {
            reason: "far-delay anti-bunching counts are zero",
        });
    }
    Ok(0.5 * counts_dip.antibunching as f64 / counts_far.antibunching as f64)
}

/// Brute-force second-quantized check of the anti-bunching law.
///
/// Builds the two-photon state `a†(psi) b†(phi) |vac>` over `2d` modes
/// (d temporal bins × 2 beam-splitter input paths), applies the balanced
/// beam-splitter unitary to the path index of every mode, and sums the
/// probabilities of all outcomes with exactly one photon in each output
/// path. Agrees with [`antibunching_probability`] at unit visibility by
/// construction of the physics, not by sharing a formula.
pub fn fock_oracle(target: &PureState, reference: &PureState) -> Result<f64> {
    let d = target.dim();
    if reference.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: reference.dim(),
        });
    }
    let modes = 2 * d;
    // Mode layout: path a occupies indices 0..d, path b indices d..2d.
    // Two-photon amplitudes: state = sum_{m,n} M[m,n] a†_m a†_n |vac>.
    let mut pair_amps = DMatrix::from_element(modes, modes, Complex64::default());
    for i in 0..d {
        for j in 0..d {
            pair_amps[(i, d + j)] = target.amplitude(i) * reference.amplitude(j);
        }
    }
    // Balanced beam splitter on the path index, acting identically on every
    // temporal bin: a†_(i,a) -> (a†_(i,a) + a†_(i,b))/sqrt(2) and
    // a†_(i,b) -> (a†_(i,a) - a†_(i,b))/sqrt(2).
    let s = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut splitter = DMatrix::from_element(modes, modes, Complex64::default());
    for i in 0..d {
        splitter[(i, i)] = s;
        splitter[(d + i, i)] = s;
        splitter[(i, d + i)] = s;
        splitter[(d + i, d + i)] = -s;
    }
    // Creation operators transform linearly, so M -> U M U^T.
    let transformed = &splitter * pair_amps * splitter.transpose();
    // The amplitude of the unordered outcome {m, n} (m != n) is the
    // symmetrized coefficient M[m,n] + M[n,m].
    let symmetrized = &transformed + transformed.transpose();
    let mut p_ab = 0.0;
    for i in 0..d {
        for j in 0..d {
            p_ab += symmetrized[(i, d + j)].norm_sqr();
        }
    }
    Ok(p_ab)
}
