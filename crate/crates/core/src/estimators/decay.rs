use num_complex::Complex64;

use super::stats::linear_fit;
use super::{EstimatorError, McConfig, McEstimate};
use crate::spectral::{ComplexEnergy, SpectralError};
use crate::CMatrix;

/// Means below this are treated as numerically zero.
const MOMENT_FLOOR: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayStatus {
    Ok,
    /// Some mean moment is zero (e.g. no hopping): the slope is `-inf`.
    BelowFloor,
}

impl DecayStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayStatus::Ok => "ok",
            DecayStatus::BelowFloor => "below floor",
        }
    }
}

/// Least-squares fit of `log E|G(o, y)|^s` against `|y - o|`, with `y`
/// running from the box center `o` along the first axis.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub energy: f64,
    pub epsilon: f64,
    pub s: f64,
    pub origin: usize,
    pub distances: Vec<usize>,
    pub moments: Vec<McEstimate>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub status: DecayStatus,
}

/// Row `G(x, ·; z)`, i.e. the solution of `(H - z)^T u = e_x`.
fn green_row(h: &CMatrix, z: Complex64, x: usize) -> Result<Vec<Complex64>, SpectralError> {
    let n = h.nrows();
    let mut m = h.transpose();
    for i in 0..n {
        m[(i, i)] -= z;
    }
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(n);
    rhs[x] = Complex64::new(1.0, 0.0);
    let row = m.lu().solve(&rhs).ok_or(SpectralError::Singular("Green function"))?;
    Ok(row.iter().copied().collect())
}

pub fn frac_moment_decay(config: &McConfig, energy: f64, epsilon: f64, s: f64) -> Result<DecayFit, EstimatorError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(SpectralError::InvalidExponent(s).into());
    }
    let z = ComplexEnergy::new(energy, epsilon)?;
    let lattice = config.model.lattice();
    let origin = lattice.center();
    let base = lattice.coords(origin);
    let targets: Vec<usize> = (1..)
        .map_while(|d| {
            let mut c = base.clone();
            c[0] += d;
            lattice.index(&c)
        })
        .collect();
    if targets.len() < 3 {
        return Err(EstimatorError::InvalidParameter(format!(
            "degenerate fit: only {} distances along the first axis",
            targets.len()
        )));
    }
    let per_realization = config.map_realizations(|sample| {
        let row = green_row(sample.matrix(), z.z(), origin)?;
        Ok(targets.iter().map(|&y| row[y].norm().powf(s)).collect::<Vec<f64>>())
    })?;
    let moments: Vec<McEstimate> = (0..targets.len())
        .map(|k| McEstimate::from_values(&per_realization.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect();
    let distances: Vec<usize> = (1..=targets.len()).collect();
    let below = moments.iter().any(|m| !(m.mean > MOMENT_FLOOR));
    let (slope, intercept, r_squared, status) = if below {
        (f64::NEG_INFINITY, f64::NAN, f64::NAN, DecayStatus::BelowFloor)
    } else {
        let x: Vec<f64> = distances.iter().map(|&d| d as f64).collect();
        let y: Vec<f64> = moments.iter().map(|m| m.mean.ln()).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y);
        (slope, intercept, r2, DecayStatus::Ok)
    };
    Ok(DecayFit {
        energy,
        epsilon,
        s,
        origin,
        distances,
        moments,
        slope,
        intercept,
        r_squared,
        status,
    })
}
