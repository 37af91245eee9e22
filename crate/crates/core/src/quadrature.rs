//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued
//! integrands, with helpers for integrals over the whole real line.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature error estimate {error:e} exceeds tolerance {tolerance:e} after {intervals} subintervals")]
    ToleranceNotMet {
        error: f64,
        tolerance: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

/// Integration rule parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Absolute error target for the whole integral.
    pub abs_tol: f64,
    /// Subdivision budget.
    pub max_intervals: usize,
    /// Half-width of the box used when an integrand is truncated to a
    /// bounded domain (Gaussian integrals).
    pub truncation_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-11,
            max_intervals: 4000,
            truncation_radius: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    /// Error estimate; on success it is at most the requested tolerance.
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadratureError>
where
    F: FnMut(f64) -> Result<Complex64, QuadratureError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<Complex64, QuadratureError> {
        let v = f(x)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QuadratureError::NonFinite(x));
        }
        Ok(v)
    };
    let fc = eval(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = eval(center - dx)? + eval(center + dx)?;
        kron += pair * WGK[k];
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    Ok(Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).norm(),
    })
}

/// `∫_a^b f(x) dx` to absolute tolerance `spec.abs_tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> Result<Complex64, QuadratureError>,
{
    let mut segments = vec![kronrod(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= spec.abs_tol {
            let value = segments.iter().map(|s| s.value).sum();
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= spec.max_intervals {
            return Err(QuadratureError::ToleranceNotMet {
                error,
                tolerance: spec.abs_tol,
                intervals: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(kronrod(&mut f, s.a, mid)?);
        segments.push(kronrod(&mut f, mid, s.b)?);
        evaluations += 30;
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64), QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    let est = integrate(|x| Ok(Complex64::new(f(x), 0.0)), a, b, spec)?;
    Ok((est.value.re, est.error))
}

/// `∫_R f(x) dx` through `x = center + scale·tan θ`, so the domain becomes
/// `(-π/2, π/2)` and integrands decaying like `1/x²` stay bounded. No
/// truncation is involved.
pub fn integrate_real_line<F>(
    mut f: F,
    center: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> Result<Complex64, QuadratureError>,
{
    assert!(scale > 0.0, "scale must be positive");
    integrate(
        |theta| {
            let c = theta.cos();
            let jacobian = scale / (c * c);
            Ok(f(center + scale * theta.tan())? * jacobian)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        spec,
    )
}

/// `∫_{R²} f(x, y) dx dy` as nested [`integrate_real_line`] calls. Inner
/// integrals run at `spec.abs_tol / 10π`; the reported error adds the
/// outer estimate and the worst inner tolerance times the mapped outer
/// measure `π`.
pub fn integrate_plane<F>(
    mut f: F,
    center: (f64, f64),
    scale: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64, f64) -> Result<Complex64, QuadratureError>,
{
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / (10.0 * std::f64::consts::PI),
        ..*spec
    };
    let mut inner_error = 0.0f64;
    let mut evaluations = 0usize;
    let outer_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let outer = integrate_real_line(
        |x| {
            let inner = integrate_real_line(|y| f(x, y), center.1, scale.1, &inner_spec)?;
            inner_error = inner_error.max(inner.error);
            evaluations += inner.evaluations;
            Ok(inner.value)
        },
        center.0,
        scale.0,
        &outer_spec,
    )?;
    Ok(Estimate {
        value: outer.value,
        error: outer.error + std::f64::consts::PI * inner_error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        let (v, _) = integrate_real(|x| x.powi(6) - 3.0 * x, -1.0, 2.0, &spec).unwrap();
        assert_abs_diff_eq!(v, (128.0 + 1.0) / 7.0 - 4.5, epsilon = 1e-13);
    }

    #[test]
    fn peaked_and_oscillatory() {
        let spec = QuadratureSpec::with_tolerance(1e-12);
        let (v, err) = integrate_real(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &spec).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!(err <= 1e-12);
        assert_abs_diff_eq!(v, exact, epsilon = 1e-9);
        let est = integrate(|x| Ok(Complex64::new(0.0, 20.0 * x).exp()), 0.0, PI, &spec).unwrap();
        let exact = (Complex64::new(0.0, 20.0 * PI).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((est.value - exact).norm() < 1e-11);
    }

    #[test]
    fn whole_line_cauchy_kernel() {
        let spec = QuadratureSpec::with_tolerance(1e-12);
        let est = integrate_real_line(|x| Ok(Complex64::new(1.0 / (1.0 + x * x), 0.0)), 0.0, 1.0, &spec).unwrap();
        assert_abs_diff_eq!(est.value.re, PI, epsilon = 1e-11);
        // off-center, narrow peak
        let eps = 0.01;
        let est = integrate_real_line(
            |x| Ok(Complex64::new(eps / ((x - 3.0).powi(2) + eps * eps), 0.0)),
            3.0,
            eps,
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(est.value.re, PI, epsilon = 1e-10);
    }

    #[test]
    fn plane_product() {
        let spec = QuadratureSpec::with_tolerance(1e-10);
        let est = integrate_plane(
            |x, y| Ok(Complex64::new(1.0 / ((1.0 + x * x) * (4.0 + (y - 1.0).powi(2))), 0.0)),
            (0.0, 1.0),
            (1.0, 2.0),
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(est.value.re, PI * PI / 2.0, epsilon = 1e-9);
        assert!(est.error <= 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadratureSpec {
            abs_tol: 1e-14,
            max_intervals: 4,
            truncation_radius: 1.0,
        };
        let r = integrate_real(|x| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &spec);
        assert!(matches!(r, Err(QuadratureError::ToleranceNotMet { .. })));
        let r = integrate_real(|x| 1.0 / x, -1.0, 1.0, &QuadratureSpec::default());
        assert!(r.is_err());
    }
}
