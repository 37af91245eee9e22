//! Dense Hermitian spectral computations on a box.
//!
//! Resolvents are formed by LU solves of `H - z`; the residual, not the
//! method, is what the checks in [`identities`] hold them to.

mod eigen;
pub mod identities;
pub mod minors;

use num_complex::Complex64;

use crate::lattice::HamiltonianSample;
use crate::CMatrix;

pub use eigen::{eig_hermitian, hermitian_eigenvalues, tridiagonal_eigenvalues};
pub use identities::{det_identity_check, krein_check, positivity_margins, schur_check, SchurResidual};
pub use minors::{
    binomial, brute_force_minor_sum, elementary_symmetric, sum_principal_minors, BRUTE_FORCE_MAX_SITES,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not Hermitian (max |H - H*| = {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("imaginary part of the energy must be positive, got {0}")]
    NonPositiveImaginary(f64),
    #[error("site index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("site index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("site subset must be nonempty{0}")]
    InvalidSubset(&'static str),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("{what} has eigenvalue {min_eigenvalue:e}; expected positive definite")]
    NotPositive { what: &'static str, min_eigenvalue: f64 },
    #[error("order n = {n} outside 1..={size}")]
    OrderOutOfRange { n: usize, size: usize },
    #[error("minor sum {brute} (brute force) disagrees with e_n = {newton} (Newton)")]
    MinorMismatch { brute: f64, newton: f64 },
    #[error("fractional moment exponent must lie in (0, 1), got {0}")]
    InvalidExponent(f64),
}

/// `z = E + iε` with `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergy {
    re: f64,
    im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Result<Self, SpectralError> {
        if !(im > 0.0 && im.is_finite()) || !re.is_finite() {
            return Err(SpectralError::NonPositiveImaginary(im));
        }
        Ok(ComplexEnergy { re, im })
    }

    /// The energy `(a + b + i|J|)/2` that dominates the indicator of `J`
    /// by `|J|` times the Poisson kernel.
    pub fn for_interval(j: Interval) -> Result<Self, SpectralError> {
        Self::new(0.5 * (j.lo + j.hi), 0.5 * j.len())
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Half-open energy interval `[lo, hi)`. An interval with `hi <= lo` is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn centered(center: f64, length: f64) -> Self {
        Interval::new(center - 0.5 * length, center + 0.5 * length)
    }

    /// Lebesgue measure `|J|`.
    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// Ascending eigenvalues with unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

pub(crate) fn check_square(h: &CMatrix) -> Result<(), SpectralError> {
    if h.nrows() != h.ncols() {
        return Err(SpectralError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn check_hermitian(h: &CMatrix) -> Result<(), SpectralError> {
    check_square(h)?;
    let n = h.nrows();
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            asymmetry = asymmetry.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if asymmetry > 1e-12 * h.norm() {
        return Err(SpectralError::NonHermitian { asymmetry });
    }
    Ok(())
}

fn shifted(h: &CMatrix, z: Complex64) -> CMatrix {
    let mut m = h.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= z;
    }
    m
}

/// `R(z) = (H - z)^{-1}`.
pub fn resolvent(h: &CMatrix, z: ComplexEnergy) -> Result<CMatrix, SpectralError> {
    check_square(h)?;
    shifted(h, z.z())
        .lu()
        .try_inverse()
        .ok_or(SpectralError::Singular("resolvent"))
}

/// `(M - M*) / 2i`, the Hermitian imaginary part of a square matrix.
pub fn imaginary_part(m: &CMatrix) -> CMatrix {
    let two_i = Complex64::new(0.0, 2.0);
    (m - m.adjoint()).map(|c| c / two_i)
}

pub(crate) fn validate_subset(subset: &[usize], len: usize) -> Result<(), SpectralError> {
    if subset.is_empty() {
        return Err(SpectralError::InvalidSubset(""));
    }
    let mut seen = vec![false; len];
    for &i in subset {
        if i >= len {
            return Err(SpectralError::IndexOutOfRange { index: i, len });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(SpectralError::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// `P_Δ (H - z)^{-1} P_Δ` as an `n x n` matrix, via `n` column solves.
pub fn green_submatrix(h: &CMatrix, z: ComplexEnergy, subset: &[usize]) -> Result<CMatrix, SpectralError> {
    check_square(h)?;
    validate_subset(subset, h.nrows())?;
    let n = h.nrows();
    let mut rhs = CMatrix::zeros(n, subset.len());
    for (col, &site) in subset.iter().enumerate() {
        rhs[(site, col)] = Complex64::new(1.0, 0.0);
    }
    let cols = shifted(h, z.z())
        .lu()
        .solve(&rhs)
        .ok_or(SpectralError::Singular("Green function"))?;
    Ok(CMatrix::from_fn(subset.len(), subset.len(), |r, c| cols[(subset[r], c)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenFlavor {
    /// `g_Δ(z)` built from `H_Λ`.
    Full,
    /// `g̃_Δ(z)` built from `H_Λ - V_Δ`, independent of the potential on `Δ`.
    Reduced,
}

#[derive(Debug, Clone)]
pub struct GreenBlock {
    pub subset: Vec<usize>,
    pub matrix: CMatrix,
    pub energy: ComplexEnergy,
    pub flavor: GreenFlavor,
}

impl GreenBlock {
    pub fn dim(&self) -> usize {
        self.subset.len()
    }
}

/// `H_Λ - V_Δ`: the sample with its potential removed on the subset.
pub fn reduced_hamiltonian(sample: &HamiltonianSample, subset: &[usize]) -> CMatrix {
    let mut h = sample.matrix().clone();
    let v = sample.potential();
    for &i in subset {
        h[(i, i)] -= Complex64::new(v[i], 0.0);
    }
    h
}

pub fn green_block(
    sample: &HamiltonianSample,
    z: ComplexEnergy,
    subset: &[usize],
    flavor: GreenFlavor,
) -> Result<GreenBlock, SpectralError> {
    validate_subset(subset, sample.len())?;
    let matrix = match flavor {
        GreenFlavor::Full => green_submatrix(sample.matrix(), z, subset)?,
        GreenFlavor::Reduced => green_submatrix(&reduced_hamiltonian(sample, subset), z, subset)?,
    };
    Ok(GreenBlock {
        subset: subset.to_vec(),
        matrix,
        energy: z,
        flavor,
    })
}

/// Log-determinant of a Hermitian positive definite matrix from its
/// eigenvalues; eigenvalues below `-1e-12` are reported as a fault.
pub fn log_det_positive(m: &CMatrix, what: &'static str) -> Result<f64, SpectralError> {
    let eigs = hermitian_eigenvalues(m)?;
    let min = eigs.first().copied().unwrap_or(f64::INFINITY);
    if min < -1e-12 {
        return Err(SpectralError::NotPositive {
            what,
            min_eigenvalue: min,
        });
    }
    if min <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(eigs.iter().map(|l| l.ln()).sum())
}

/// `log det Im g_Δ(z)`.
pub fn log_det_im(block: &GreenBlock) -> Result<f64, SpectralError> {
    log_det_positive(&imaginary_part(&block.matrix), "Im g_Δ(z)")
}

/// `det Im g_Δ(z)`, evaluated in log space.
pub fn det_im(block: &GreenBlock) -> Result<f64, SpectralError> {
    Ok(log_det_im(block)?.exp())
}

/// `Tr E(J)`: number of eigenvalues in `[lo, hi)`.
pub fn count_in(eigenvalues: &[f64], j: Interval) -> usize {
    eigenvalues.iter().filter(|&&e| j.contains(e)).count()
}

pub fn count_eigenvalues(h: &CMatrix, j: Interval) -> Result<usize, SpectralError> {
    if j.is_empty() {
        return Ok(0);
    }
    Ok(count_in(&hermitian_eigenvalues(h)?, j))
}

/// Checks `Tr_{H_n} E(J)^{∧n} = C(k, n)` with `k = Tr E(J)`, evaluating the
/// left side as `e_n` of the 0/1 spectrum of the projection.
pub fn wedge_count_check(h: &CMatrix, j: Interval, n: usize) -> Result<bool, SpectralError> {
    let k = count_eigenvalues(h, j)?;
    Ok(wedge_trace_matches(k, h.nrows(), n))
}

pub(crate) fn wedge_trace_matches(k: usize, size: usize, n: usize) -> bool {
    let projection_spectrum: Vec<f64> = (0..size).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    let wedge_trace = elementary_symmetric(&projection_spectrum, n);
    let expected = if k >= n { binomial(k, n) } else { 0.0 };
    (wedge_trace - expected).abs() <= 1e-9 * expected.max(1.0)
}

/// `|G_Λ(x, y; z)|^s`.
pub fn frac_moment(
    sample: &HamiltonianSample,
    x: usize,
    y: usize,
    z: ComplexEnergy,
    s: f64,
) -> Result<f64, SpectralError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(SpectralError::InvalidExponent(s));
    }
    let g = green_column(sample.matrix(), z, y)?;
    if x >= g.len() {
        return Err(SpectralError::IndexOutOfRange { index: x, len: g.len() });
    }
    Ok(g[x].norm().powf(s))
}

/// Column `G(·, x; z) = (H - z)^{-1} e_x` of the resolvent.
pub fn green_column(h: &CMatrix, z: ComplexEnergy, x: usize) -> Result<Vec<Complex64>, SpectralError> {
    check_square(h)?;
    let n = h.nrows();
    if x >= n {
        return Err(SpectralError::IndexOutOfRange { index: x, len: n });
    }
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(n);
    rhs[x] = Complex64::new(1.0, 0.0);
    let col = shifted(h, z.z())
        .lu()
        .solve(&rhs)
        .ok_or(SpectralError::Singular("Green function"))?;
    Ok(col.iter().copied().collect())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub(crate) fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

#[cfg(test)]
pub(crate) fn to_complex(m: &nalgebra::DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}
