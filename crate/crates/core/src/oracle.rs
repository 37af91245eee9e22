//! Quadrature checks of the closed-form integrals behind the eigenvalue
//! correlation bounds: the complex Gaussian representation of
//! `1/sqrt(det M)`, two Cauchy-type line integrals and the `n <= 2` case
//! of the bound `∫ det Im[(diag(v) - A)^{-1}] dv <= π^n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quadrature::{integrate, integrate_real_line, QuadratureError, QuadratureSpec};
use crate::spectral::{hermitian_eigenvalues, imaginary_part};
use crate::CMatrix;

/// Contract for [`gauss_repr_check`].
pub const GAUSS_TOLERANCE: f64 = 1e-6;
/// Contract for the line integrals.
pub const LINE_TOLERANCE: f64 = 1e-8;
/// Contract for the `n = 1` lemma value.
pub const LEMMA_N1_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("only n = 1 or n = 2 is supported, got {0}")]
    Dimension(usize),
    #[error("truncation bound {bound:e} exceeds tolerance {tolerance:e}; increase the truncation radius")]
    Truncation { bound: f64, tolerance: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Quadrature value against a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheck {
    pub value: Complex64,
    pub reference: Complex64,
    pub discrepancy: f64,
    /// Quadrature error estimate plus any truncation bound.
    pub error_bound: f64,
}

impl OracleCheck {
    fn new(value: Complex64, reference: Complex64, error_bound: f64) -> Self {
        OracleCheck {
            value,
            reference,
            discrepancy: (value - reference).norm(),
            error_bound,
        }
    }
}

fn check_dimension(m: &CMatrix) -> Result<usize, OracleError> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(OracleError::Precondition(format!("matrix is {}x{}", n, m.ncols())));
    }
    if !(1..=2).contains(&n) {
        return Err(OracleError::Dimension(n));
    }
    Ok(n)
}

/// Eigenvalues of a complex symmetric `n x n` matrix, `n <= 2`.
fn small_eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let half_trace = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let root = (half_trace * half_trace - det).sqrt();
    vec![half_trace + root, half_trace - root]
}

/// Smallest eigenvalue of a real symmetric matrix of size 1 or 2.
fn min_eigenvalue_real(a: [[f64; 2]; 2], n: usize) -> f64 {
    if n == 1 {
        return a[0][0];
    }
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let diff = 0.5 * (a[0][0] - a[1][1]);
    mean - diff.hypot(a[0][1])
}

/// Compares `e^{inπ/4} ∫ e^{-i<u,Mu>/2} d^n u / (2π)^{n/2}` with
/// `Π_k μ_k^{-1/2}` over the eigenvalues `μ_k` of `M` (principal roots).
///
/// `M = B - iA` must be complex symmetric with `A` positive definite. The
/// integral runs over `[-R, R]^n`, `R = spec.truncation_radius`; the
/// neglected mass is bounded by the Gaussian envelope `e^{-a|u|²/2}`,
/// `a = λ_min(A)`, and must not exceed `spec.abs_tol`.
pub fn gauss_repr_check(m: &CMatrix, spec: &QuadratureSpec) -> Result<OracleCheck, OracleError> {
    let n = check_dimension(m)?;
    let asymmetry = (m - m.transpose()).norm();
    if asymmetry > 1e-14 * m.norm() {
        return Err(OracleError::Precondition(format!(
            "M must be complex symmetric (|M - M^T| = {asymmetry:e})"
        )));
    }
    let mut a = [[0.0; 2]; 2];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = -m[(i, j)].im;
        }
    }
    let a_min = min_eigenvalue_real(a, n);
    if !(a_min > 0.0) {
        return Err(OracleError::Precondition(format!(
            "A = -Im M must be positive definite (min eigenvalue {a_min:e})"
        )));
    }
    let r = spec.truncation_radius;
    let tail = if n == 1 {
        // Mills ratio: ∫_R^∞ e^{-a u²/2} du <= e^{-aR²/2} / (aR)
        2.0 * (-0.5 * a_min * r * r).exp() / (a_min * r * (2.0 * PI).sqrt())
    } else {
        // the square contains the disk of radius R
        (-0.5 * a_min * r * r).exp() / a_min
    };
    if tail > 0.5 * spec.abs_tol {
        return Err(OracleError::Truncation {
            bound: tail,
            tolerance: spec.abs_tol,
        });
    }
    let minus_half_i = Complex64::new(0.0, -0.5);
    let (value, error) = if n == 1 {
        let m00 = m[(0, 0)];
        let half = QuadratureSpec {
            abs_tol: 0.5 * spec.abs_tol,
            ..*spec
        };
        let est = integrate(|u| Ok((minus_half_i * m00 * u * u).exp()), -r, r, &half)?;
        (est.value / (2.0 * PI).sqrt(), est.error / (2.0 * PI).sqrt())
    } else {
        let (m00, m01, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let inner = QuadratureSpec {
            abs_tol: spec.abs_tol / (8.0 * r),
            ..*spec
        };
        let outer = QuadratureSpec {
            abs_tol: 0.25 * spec.abs_tol,
            ..*spec
        };
        let mut inner_error = 0.0f64;
        let est = integrate(
            |u| {
                let e = integrate(
                    |w| Ok((minus_half_i * (m00 * u * u + 2.0 * m01 * u * w + m11 * w * w)).exp()),
                    -r,
                    r,
                    &inner,
                )?;
                inner_error = inner_error.max(e.error);
                Ok(e.value)
            },
            -r,
            r,
            &outer,
        )?;
        (est.value / (2.0 * PI), (est.error + 2.0 * r * inner_error) / (2.0 * PI))
    };
    let phase = Complex64::from_polar(1.0, n as f64 * PI / 4.0);
    let reference = small_eigenvalues(m)
        .into_iter()
        .map(|mu| mu.sqrt().inv())
        .product::<Complex64>();
    Ok(OracleCheck::new(phase * value, reference, error + tail))
}

/// `∫ dx / |a x + b|²` against `π / Im(conj(b) a)`.
pub fn gv_line_integral_check(a: Complex64, b: Complex64, spec: &QuadratureSpec) -> Result<OracleCheck, OracleError> {
    let im = (b.conj() * a).im;
    if !(im > 0.0) {
        return Err(OracleError::Precondition(format!("Im(conj(b)·a) = {im} must be positive")));
    }
    // |ax + b|² = |a|² ((x - c)² + w²) with c + iw = -b/a
    let shift = -b / a;
    let est = integrate_real_line(
        |x| Ok(Complex64::new(1.0 / (a * x + b).norm_sqr(), 0.0)),
        shift.re,
        shift.im.abs(),
        spec,
    )?;
    Ok(OracleCheck::new(est.value, Complex64::new(PI / im, 0.0), est.error))
}

/// `∫ dx / (a x² + b x + c)` against `2π / sqrt(4ac - b²)`.
pub fn gv_quadratic_integral_check(a: f64, b: f64, c: f64, spec: &QuadratureSpec) -> Result<OracleCheck, OracleError> {
    let disc = 4.0 * a * c - b * b;
    if !(a > 0.0) || !(disc > 0.0) {
        return Err(OracleError::Precondition(format!(
            "need a > 0 and 4ac - b² > 0, got a = {a}, 4ac - b² = {disc}"
        )));
    }
    let est = integrate_real_line(
        |x| Ok(Complex64::new(1.0 / (a * x * x + b * x + c), 0.0)),
        -b / (2.0 * a),
        disc.sqrt() / (2.0 * a),
        spec,
    )?;
    Ok(OracleCheck::new(est.value, Complex64::new(2.0 * PI / disc.sqrt(), 0.0), est.error))
}

/// `∫_{R^n} det Im[(diag(v) - A)^{-1}] dv` and its upper bound `π^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    pub n: usize,
    pub value: f64,
    pub bound: f64,
    pub error_bound: f64,
}

impl LemmaCheck {
    /// `value <= bound + error_bound`.
    pub fn holds(&self) -> bool {
        self.value <= self.bound + self.error_bound
    }
}

fn det_im_inverse(k: [[Complex64; 2]; 2]) -> f64 {
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    let inv = [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]];
    // Im X = (X - X*)/2i for the 2x2 inverse X
    let im = |i: usize, j: usize| (inv[i][j] - inv[j][i].conj()) / Complex64::new(0.0, 2.0);
    (im(0, 0) * im(1, 1) - im(0, 1) * im(1, 0)).re
}

/// Integrals over the whole line use the substitution `v = Re a + Im a·tan θ`
/// per coordinate, so no truncation is needed.
pub fn gv_lemma_check(a: &CMatrix, spec: &QuadratureSpec) -> Result<LemmaCheck, OracleError> {
    let n = check_dimension(a)?;
    let im_a = imaginary_part(a);
    let min = hermitian_eigenvalues(&im_a)
        .map_err(|e| OracleError::Precondition(e.to_string()))?
        .first()
        .copied()
        .unwrap_or(0.0);
    if !(min > 0.0) {
        return Err(OracleError::Precondition(format!(
            "Im A must be positive definite (min eigenvalue {min:e})"
        )));
    }
    let bound = PI.powi(n as i32);
    if n == 1 {
        let a0 = a[(0, 0)];
        let est = integrate_real_line(
            |v| Ok(Complex64::new(a0.im / (v - a0).norm_sqr(), 0.0)),
            a0.re,
            a0.im,
            spec,
        )?;
        return Ok(LemmaCheck {
            n,
            value: est.value.re,
            bound,
            error_bound: est.error,
        });
    }
    let (a00, a01, a10, a11) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let inner = QuadratureSpec {
        abs_tol: spec.abs_tol / (10.0 * PI),
        ..*spec
    };
    let outer = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let mut inner_error = 0.0f64;
    let est = integrate_real_line(
        |v1| {
            let e = integrate_real_line(
                |v2| {
                    let k = [[Complex64::new(v1, 0.0) - a00, -a01], [-a10, Complex64::new(v2, 0.0) - a11]];
                    Ok(Complex64::new(det_im_inverse(k), 0.0))
                },
                a11.re,
                a11.im,
                &inner,
            )?;
            inner_error = inner_error.max(e.error);
            Ok(e.value)
        },
        a00.re,
        a00.im,
        &outer,
    )?;
    Ok(LemmaCheck {
        n,
        value: est.value.re,
        bound,
        error_bound: est.error + PI * inner_error,
    })
}

/// One line of the oracle suite.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub check: String,
    /// Discrepancy, or `value - bound` for the `n = 2` lemma.
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleOutcome {
    fn discrepancy(check: String, c: &OracleCheck, tolerance: f64) -> Self {
        OracleOutcome {
            check,
            measured: c.discrepancy,
            tolerance,
            passed: c.discrepancy <= tolerance,
        }
    }
}

fn outcome(check: String, tolerance: f64, r: Result<OracleOutcome, OracleError>) -> OracleOutcome {
    r.unwrap_or_else(|e| OracleOutcome {
        check: format!("{check}: {e}"),
        measured: f64::NAN,
        tolerance,
        passed: false,
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix2(a: Complex64, b: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, b, d])
}

/// Random real symmetric 2x2 with eigenvalues in `[lo, hi]`.
fn random_spd(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [[f64; 2]; 2] {
    let (l1, l2) = (rng.random_range(lo..hi), rng.random_range(lo..hi));
    let t: f64 = rng.random_range(0.0..PI);
    let (s, co) = t.sin_cos();
    [
        [l1 * co * co + l2 * s * s, (l1 - l2) * co * s],
        [(l1 - l2) * co * s, l1 * s * s + l2 * co * co],
    ]
}

/// Fixed examples plus `draws` random instances of every check. Parameter
/// ranges: Gaussian `B` entries in `[-1, 1]`, `λ(A) ∈ [0.5, 2]`; line
/// integrals with `Im(conj(b)a) >= 0.05`; lemma with `λ(Im A) ∈ [0.2, 2]`.
pub fn oracle_suite(seed: u64, draws: usize) -> Vec<OracleOutcome> {
    let tight = QuadratureSpec::with_tolerance(1e-11);
    let gauss_spec = QuadratureSpec::with_tolerance(1e-9);
    let plane_spec = QuadratureSpec::with_tolerance(1e-9);
    let mut out = Vec::new();

    let gauss = |name: String, m: CMatrix| {
        outcome(
            name.clone(),
            GAUSS_TOLERANCE,
            gauss_repr_check(&m, &gauss_spec).map(|r| OracleOutcome::discrepancy(name, &r, GAUSS_TOLERANCE)),
        )
    };
    let line = |name: String, a: Complex64, b: Complex64| {
        outcome(
            name.clone(),
            LINE_TOLERANCE,
            gv_line_integral_check(a, b, &tight).map(|r| OracleOutcome::discrepancy(name, &r, LINE_TOLERANCE)),
        )
    };
    let quad = |name: String, a: f64, b: f64, cc: f64| {
        outcome(
            name.clone(),
            LINE_TOLERANCE,
            gv_quadratic_integral_check(a, b, cc, &tight)
                .map(|r| OracleOutcome::discrepancy(name, &r, LINE_TOLERANCE)),
        )
    };
    let lemma = |name: String, m: CMatrix| {
        let spec = if m.nrows() == 1 { tight } else { plane_spec };
        let tol = if m.nrows() == 1 { LEMMA_N1_TOLERANCE } else { spec.abs_tol };
        outcome(
            name.clone(),
            tol,
            gv_lemma_check(&m, &spec).map(|r| {
                if r.n == 1 {
                    let d = (r.value - PI).abs();
                    OracleOutcome {
                        check: name,
                        measured: d,
                        tolerance: tol,
                        passed: d <= tol,
                    }
                } else {
                    OracleOutcome {
                        check: name,
                        measured: r.value - r.bound,
                        tolerance: r.error_bound.max(tol),
                        passed: r.value <= r.bound + r.error_bound.max(tol),
                    }
                }
            }),
        )
    };

    out.push(gauss("gauss_repr n=1 M=-i".into(), CMatrix::from_element(1, 1, c(0.0, -1.0))));
    out.push(gauss("gauss_repr n=1 M=1-i".into(), CMatrix::from_element(1, 1, c(1.0, -1.0))));
    out.push(gauss(
        "gauss_repr n=2 M=diag(1-i,2-i)".into(),
        matrix2(c(1.0, -1.0), c(0.0, 0.0), c(2.0, -1.0)),
    ));
    out.push(line("gv_line a=1 b=-i".into(), c(1.0, 0.0), c(0.0, -1.0)));
    out.push(line("gv_line a=2 b=-i".into(), c(2.0, 0.0), c(0.0, -1.0)));
    out.push(quad("gv_quadratic a=1 b=0 c=1".into(), 1.0, 0.0, 1.0));
    out.push(quad("gv_quadratic a=1 b=1 c=1".into(), 1.0, 1.0, 1.0));
    out.push(lemma("gv_lemma n=1 A=i".into(), CMatrix::from_element(1, 1, c(0.0, 1.0))));
    out.push(lemma("gv_lemma n=2 A=diag(i,i)".into(), matrix2(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 1.0))));
    out.push(lemma("gv_lemma n=2 A=[[i,0.3],[0.3,i]]".into(), matrix2(c(0.0, 1.0), c(0.3, 0.0), c(0.0, 1.0))));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..draws {
        let n = 1 + k % 2;
        let a = random_spd(&mut rng, 0.5, 2.0);
        let m = if n == 1 {
            CMatrix::from_element(1, 1, c(rng.random_range(-1.0..1.0), -a[0][0].clamp(0.5, 2.0)))
        } else {
            let b = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            matrix2(c(b[0], -a[0][0]), c(b[1], -a[0][1]), c(b[2], -a[1][1]))
        };
        out.push(gauss(format!("gauss_repr random #{k} n={n}"), m));

        let a_line = Complex64::from_polar(rng.random_range(0.2..3.0), rng.random_range(-PI..PI));
        let b_line = loop {
            let b = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            if (b.conj() * a_line).im.abs() >= 0.05 {
                break if (b.conj() * a_line).im > 0.0 { b } else { b.conj() * (a_line / a_line.conj()) };
            }
        };
        out.push(line(format!("gv_line random #{k}"), a_line, b_line));

        let qa = rng.random_range(0.1..3.0);
        let qb = rng.random_range(-3.0..3.0);
        let qc = (qb * qb + rng.random_range(0.05..4.0)) / (4.0 * qa);
        out.push(quad(format!("gv_quadratic random #{k}"), qa, qb, qc));

        let im = random_spd(&mut rng, 0.2, 2.0);
        let m = if n == 1 {
            CMatrix::from_element(1, 1, c(rng.random_range(-2.0..2.0), im[0][0]))
        } else {
            let re = [rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0)];
            matrix2(c(re[0], im[0][0]), c(re[1], im[0][1]), c(re[2], im[1][1]))
        };
        out.push(lemma(format!("gv_lemma random #{k} n={n}"), m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one(z: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    #[test]
    fn gaussian_examples() {
        let spec = QuadratureSpec::with_tolerance(1e-9);
        let r = gauss_repr_check(&one(c(0.0, -1.0)), &spec).unwrap();
        let expected = Complex64::from_polar(1.0, PI / 4.0);
        assert!((r.reference - expected).norm() < 1e-15);
        assert!(r.discrepancy < 1e-8, "{r:?}");
        let r = gauss_repr_check(&one(c(1.0, -1.0)), &spec).unwrap();
        assert!(r.discrepancy < GAUSS_TOLERANCE, "{r:?}");
        let r = gauss_repr_check(&matrix2(c(1.0, -1.0), c(0.0, 0.0), c(2.0, -1.0)), &spec).unwrap();
        let separable = (c(1.0, -1.0).sqrt() * c(2.0, -1.0).sqrt()).inv();
        assert!((r.reference - separable).norm() < 1e-14);
        assert!(r.discrepancy < GAUSS_TOLERANCE, "{r:?}");
    }

    #[test]
    fn gaussian_preconditions() {
        let spec = QuadratureSpec::with_tolerance(1e-9);
        assert!(matches!(
            gauss_repr_check(&one(c(1.0, 0.5)), &spec),
            Err(OracleError::Precondition(_))
        ));
        let nonsym = CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.1, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        assert!(gauss_repr_check(&nonsym, &spec).is_err());
        let short = QuadratureSpec {
            truncation_radius: 2.0,
            ..spec
        };
        assert!(matches!(
            gauss_repr_check(&one(c(0.0, -1.0)), &short),
            Err(OracleError::Truncation { .. })
        ));
        assert!(matches!(
            gauss_repr_check(&CMatrix::zeros(3, 3), &spec),
            Err(OracleError::Dimension(3))
        ));
    }

    #[test]
    fn line_integrals() {
        let spec = QuadratureSpec::with_tolerance(1e-11);
        let r = gv_line_integral_check(c(1.0, 0.0), c(0.0, -1.0), &spec).unwrap();
        assert_abs_diff_eq!(r.value.re, PI, epsilon = 1e-10);
        let r = gv_line_integral_check(c(2.0, 0.0), c(0.0, -1.0), &spec).unwrap();
        assert_abs_diff_eq!(r.reference.re, PI / 2.0, epsilon = 1e-15);
        assert!(r.discrepancy < LINE_TOLERANCE);
        assert!(gv_line_integral_check(c(1.0, 0.0), c(0.0, 1.0), &spec).is_err());
        let r = gv_quadratic_integral_check(1.0, 1.0, 1.0, &spec).unwrap();
        assert_abs_diff_eq!(r.reference.re, 2.0 * PI / 3f64.sqrt(), epsilon = 1e-15);
        assert!(r.discrepancy < LINE_TOLERANCE);
        assert!(gv_quadratic_integral_check(1.0, 2.0, 1.0, &spec).is_err());
    }

    #[test]
    fn lemma_cases() {
        let spec = QuadratureSpec::with_tolerance(1e-11);
        let r = gv_lemma_check(&one(c(0.3, 0.7)), &spec).unwrap();
        assert_abs_diff_eq!(r.value, PI, epsilon = LEMMA_N1_TOLERANCE);
        let spec2 = QuadratureSpec::with_tolerance(1e-9);
        let r = gv_lemma_check(&matrix2(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 1.0)), &spec2).unwrap();
        assert_abs_diff_eq!(r.value, PI * PI, epsilon = 1e-8);
        let r = gv_lemma_check(&matrix2(c(0.0, 1.0), c(0.3, 0.0), c(0.0, 1.0)), &spec2).unwrap();
        assert!(r.holds());
        assert!(r.value < PI * PI - r.error_bound, "{r:?}");
        assert!(gv_lemma_check(&one(c(0.0, -1.0)), &spec).is_err());
    }

    #[test]
    fn small_suite_passes() {
        let suite = oracle_suite(3, 6);
        assert_eq!(suite.len(), 10 + 4 * 6);
        for o in &suite {
            assert!(o.passed, "{o:?}");
        }
    }
}
