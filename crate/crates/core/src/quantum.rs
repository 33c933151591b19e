//! Finite-dimensional quantum states and the dense linear algebra behind them.
//!
//! States live in small Hilbert spaces (d ≤ ~64): time bins, polarization, or
//! their tensor product. The canonical ordering of a hybrid space is
//! time-major with the polarization index fastest, i.e. `(t0H, t0V, t1H,
//! t1V, ...)`; hybrid states are built as `time.tensor(&pol)` and every index
//! computation in the crate assumes that layout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for unit-norm checks on state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for Hermiticity, PSD, and trace checks on operators.
pub const OPERATOR_TOL: f64 = 1e-10;

/// Which degree of freedom a [`PureState`]'s amplitudes are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// Discrete temporal modes `|t_0>, |t_1>, ...` of any dimension. Also
    /// used as the generic label for composite time-bin spaces.
    TimeBin,
    /// Photon polarization, `|H>` at index 0 and `|V>` at index 1.
    Polarization,
    /// Time ⊗ polarization in canonical ordering; dimension is `2 * time_dim`.
    Hybrid { time_dim: usize },
}

/// A normalized complex amplitude vector over a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    basis: BasisLabel,
}

impl PureState {
    /// Builds a state from amplitudes that must already have unit norm.
    pub fn new(amplitudes: Vec<Complex64>, basis: BasisLabel) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        Self::check_basis(v.len(), basis)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v,
            basis,
        })
    }

    /// Builds a state from arbitrary amplitudes, rescaling to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>, basis: BasisLabel) -> Result<Self> {
        let mut v = DVector::from_vec(amplitudes);
        Self::check_basis(v.len(), basis)?;
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized { norm });
        }
        v /= Complex64::from(norm);
        Ok(Self {
            amplitudes: v,
            basis,
        })
    }

    fn check_basis(dim: usize, basis: BasisLabel) -> Result<()> {
        if dim == 0 {
            return Err(Error::EmptyState);
        }
        match basis {
            BasisLabel::TimeBin => Ok(()),
            BasisLabel::Polarization if dim == 2 => Ok(()),
            BasisLabel::Polarization => Err(Error::BasisMismatch {
                reason: format!("polarization basis requires dimension 2, got {dim}"),
            }),
            BasisLabel::Hybrid { time_dim } if dim == 2 * time_dim && time_dim >= 1 => Ok(()),
            BasisLabel::Hybrid { time_dim } => Err(Error::BasisMismatch {
                reason: format!("hybrid basis requires dimension 2*{time_dim}, got {dim}"),
            }),
        }
    }

    /// The basis state `|index>` in a `dim`-dimensional space.
    pub fn basis_state(dim: usize, index: usize, basis: BasisLabel) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::default(); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps, basis)
    }

    /// Time-bin basis state `|t_index>`.
    pub fn time_bin(dim: usize, index: usize) -> Result<Self> {
        Self::basis_state(dim, index, BasisLabel::TimeBin)
    }

    /// `|+> = (|t0> + |t1>)/sqrt(2)`.
    pub fn plus() -> Self {
        Self::superposition(Complex64::new(1.0, 0.0))
    }

    /// `|-> = (|t0> - |t1>)/sqrt(2)`.
    pub fn minus() -> Self {
        Self::superposition(Complex64::new(-1.0, 0.0))
    }

    /// `|+i> = (|t0> + i|t1>)/sqrt(2)`.
    pub fn plus_i() -> Self {
        Self::superposition(Complex64::new(0.0, 1.0))
    }

    /// `|-i> = (|t0> - i|t1>)/sqrt(2)`.
    pub fn minus_i() -> Self {
        Self::superposition(Complex64::new(0.0, -1.0))
    }

    fn superposition(phase: Complex64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            vec![Complex64::new(s, 0.0), phase * s],
            BasisLabel::TimeBin,
        )
        .expect("qubit superposition is normalized")
    }

    /// Horizontal polarization `|H>`.
    pub fn horizontal() -> Self {
        Self::basis_state(2, 0, BasisLabel::Polarization).expect("valid")
    }

    /// Vertical polarization `|V>`.
    pub fn vertical() -> Self {
        Self::basis_state(2, 1, BasisLabel::Polarization).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn basis(&self) -> BasisLabel {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// The state orthogonal to a qubit: `(a, b) -> (-conj(b), conj(a))`.
    pub fn orthogonal(&self) -> Result<Self> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        Self::new(
            vec![-self.amplitudes[1].conj(), self.amplitudes[0].conj()],
            self.basis,
        )
    }

    /// Kronecker product, left factor major. `time.tensor(&pol)` yields the
    /// canonical hybrid ordering.
    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        let basis = combine_labels(self.basis, other.basis, self.dim());
        Self {
            amplitudes: DVector::from_column_slice(amps.as_slice()),
            basis,
        }
    }

    /// The rank-one projector `|psi><psi|`.
    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { matrix: m }
    }
}

fn combine_labels(a: BasisLabel, b: BasisLabel, a_dim: usize) -> BasisLabel {
    match (a, b) {
        (BasisLabel::TimeBin, BasisLabel::Polarization) => BasisLabel::Hybrid { time_dim: a_dim },
        (BasisLabel::Polarization, BasisLabel::Polarization) => BasisLabel::Polarization,
        // Products of time-bin spaces (and any other combination) keep the
        // generic time-bin label; only the canonical time ⊗ pol order earns
        // the hybrid label.
        _ => BasisLabel::TimeBin,
    }
}

/// `<a|b>`. Errors on dimension mismatch.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// A Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (elementwise, 1e-10), positivity (eigenvalues
    /// ≥ -1e-10), and unit trace (1e-10).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::EmptyState);
        }
        let max_dev = hermiticity_deviation(&matrix);
        if max_dev > OPERATOR_TOL {
            return Err(Error::NotHermitian { max_dev });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > OPERATOR_TOL || trace.im.abs() > OPERATOR_TOL {
            return Err(Error::TraceNotUnit { trace: trace.re });
        }
        let sym = symmetrize(&matrix);
        let (eigenvalues, _) = hermitian_eigen(&sym);
        let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -OPERATOR_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { matrix: sym })
    }

    /// `I/d`, the maximally mixed state.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyState);
        }
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::from(1.0 / dim as f64));
        Ok(Self { matrix: m })
    }

    /// Trusted constructor for matrices that are PSD and unit-trace by
    /// construction (projectors, T†T/Tr parametrizations); only symmetrizes.
    pub(crate) fn from_trusted(matrix: DMatrix<Complex64>) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `Tr[rho^2]`, 1 for pure states, 1/d for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        let mut acc = Complex64::default();
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc += self.matrix[(i, k)] * self.matrix[(k, i)];
            }
        }
        acc.re
    }

    /// `<phi|rho|phi>`, the Born probability weight on a pure reference.
    pub fn expectation(&self, phi: &PureState) -> Result<f64> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: phi.dim(),
            });
        }
        let v = &self.matrix * phi.amplitudes();
        Ok(phi.amplitudes().dotc(&v).re)
    }

    /// Kronecker product of two density matrices.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Eigenvalues in ascending order (real by Hermiticity).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut max_dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    max_dev
}

fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::from(0.5)
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching eigenvector columns.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Eigenvalues below the rounding floor of the eigensolver and the matrix
/// products feeding it. Square roots amplify that noise from ~1e-16 to ~1e-8,
/// so such values must be treated as exact zeros.
fn sqrt_clamped(values: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-14 * (1.0 + max);
    values
        .iter()
        .map(move |&v| if v < floor { 0.0 } else { v.sqrt() })
}

/// Hermitian matrix square root with eigenvalues clamped at zero, so that
/// PSD violations at rounding scale cannot produce NaN.
fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (values, vectors) = hermitian_eigen(m);
    let sqrt_diag = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        sqrt_clamped(&values).map(Complex64::from),
    ));
    &vectors * sqrt_diag * vectors.adjoint()
}

/// Uhlmann fidelity `F = Tr[sqrt(sqrt(a) b sqrt(a))]^2`, symmetric in its
/// arguments and equal to `|<psi|phi>|^2` for pure inputs.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let root = psd_sqrt(a.matrix());
    let inner = &root * b.matrix() * &root;
    let (values, _) = hermitian_eigen(&symmetrize(&inner));
    let tr: f64 = sqrt_clamped(&values).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `0.5 * ||a - b||_1`, the trace distance.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let (values, _) = hermitian_eigen(&diff);
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Which tensor factor [`partial_trace`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// Trace out the left (slow-index) factor.
    First,
    /// Trace out the right (fast-index) factor.
    Second,
}

/// Partial trace over one factor of a bipartite state with dimensions
/// `(d1, d2)` (left-major indexing, matching [`PureState::tensor`]).
pub fn partial_trace(
    rho: &DensityMatrix,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<DensityMatrix> {
    let (d1, d2) = dims;
    if d1 * d2 != rho.dim() || d1 == 0 || d2 == 0 {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: d1 * d2,
        });
    }
    let m = rho.matrix();
    let kept = match traced {
        Subsystem::First => d2,
        Subsystem::Second => d1,
    };
    let mut out = DMatrix::from_element(kept, kept, Complex64::default());
    match traced {
        Subsystem::First => {
            for i in 0..d2 {
                for j in 0..d2 {
                    let mut acc = Complex64::default();
                    for k in 0..d1 {
                        acc += m[(k * d2 + i, k * d2 + j)];
                    }
                    out[(i, j)] = acc;
                }
            }
        }
        Subsystem::Second => {
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut acc = Complex64::default();
                    for k in 0..d2 {
                        acc += m[(i * d2 + k, j * d2 + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Convex combination `sum_i w_i rho_i`. Weights must be non-negative and
/// sum to 1 within 1e-12.
pub fn convex_mixture(components: &[(DensityMatrix, f64)]) -> Result<DensityMatrix> {
    if components.is_empty() {
        return Err(Error::InvalidParameter(
            "mixture needs at least one component".into(),
        ));
    }
    let dim = components[0].0.dim();
    let mut sum = 0.0;
    for (rho, w) in components {
        if *w < 0.0 {
            return Err(Error::NegativeWeight { weight: *w });
        }
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.dim(),
            });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::WeightSum { sum });
    }
    let mut out = DMatrix::from_element(dim, dim, Complex64::default());
    for (rho, w) in components {
        out += rho.matrix() * Complex64::from(*w);
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Haar-uniform random pure state, deterministic for a given seed.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_state_rng(dim, &mut rng)
}

/// Haar-uniform random pure state drawn from a caller-provided RNG; useful
/// for batch sampling.
pub fn random_pure_state_rng<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::EmptyState);
    }
    // A vector of iid complex Gaussians, normalized, is Haar-uniform.
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::normalized(amps, BasisLabel::TimeBin)
}

/// A two-outcome observable: Hermitian with eigenvalues ±1 (both present).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: DMatrix<Complex64>,
}

impl Observable {
    /// Validates Hermiticity, `M^2 = I` within 1e-10, and that the spectrum
    /// contains both outcomes (rejects ±identity).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::EmptyState);
        }
        let max_dev = hermiticity_deviation(&matrix);
        if max_dev > OPERATOR_TOL {
            return Err(Error::NotHermitian { max_dev });
        }
        let square = &matrix * &matrix;
        let mut dev: f64 = 0.0;
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                let expected = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::default()
                };
                dev = dev.max((square[(i, j)] - expected).norm());
            }
        }
        if dev > OPERATOR_TOL {
            return Err(Error::NotInvolution { max_dev: dev });
        }
        // M^2 = I makes the spectrum ±1; Tr = (count of +1) - (count of -1).
        let d = matrix.nrows() as f64;
        if matrix.trace().re.abs() > d - 0.5 {
            return Err(Error::TrivialObservable);
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    /// Pauli X on a qubit.
    pub fn pauli_x() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        Self { matrix: m }
    }

    /// Pauli Y on a qubit.
    pub fn pauli_y() -> Self {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                c(0.0),
            ],
        );
        Self { matrix: m }
    }

    /// Pauli Z on a qubit.
    pub fn pauli_z() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Linear combination `(alpha A + beta B)`, validated as an observable.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        let m = a.matrix() * Complex64::from(alpha) + b.matrix() * Complex64::from(beta);
        Self::new(m)
    }

    /// Eigenstates of a qubit observable, +1 eigenvector first.
    pub fn qubit_eigenstates(&self, basis: BasisLabel) -> Result<(PureState, PureState)> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        let (values, vectors) = hermitian_eigen(&self.matrix);
        // Ascending order puts -1 first.
        debug_assert!(values[0] < values[1]);
        let minus = PureState::normalized(vectors.column(0).iter().cloned().collect(), basis)?;
        let plus = PureState::normalized(vectors.column(1).iter().cloned().collect(), basis)?;
        Ok((plus, minus))
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
