//! Exact per-realization identities for Green blocks: Schur complement,
//! Kreĭn's rank-`n` formula, positivity of imaginary parts and the
//! determinant factorization used to average out the potential on `Δ`.

use num_complex::Complex64;

use super::{
    green_block, hermitian_eigenvalues, imaginary_part, log_det_positive, real_diagonal, resolvent,
    spectral_norm, validate_subset, ComplexEnergy, GreenFlavor, SpectralError,
};
use crate::lattice::HamiltonianSample;
use crate::CMatrix;

fn inverse(m: &CMatrix, what: &'static str) -> Result<CMatrix, SpectralError> {
    m.clone().lu().try_inverse().ok_or(SpectralError::Singular(what))
}

fn potential_on(sample: &HamiltonianSample, subset: &[usize]) -> CMatrix {
    let v: Vec<f64> = subset.iter().map(|&i| sample.potential()[i]).collect();
    real_diagonal(&v)
}

/// `‖g_Δ(z) - (V_Δ + g̃_Δ(z)^{-1})^{-1}‖₂`.
pub fn krein_check(sample: &HamiltonianSample, z: ComplexEnergy, subset: &[usize]) -> Result<f64, SpectralError> {
    let g = green_block(sample, z, subset, GreenFlavor::Full)?;
    let reduced = green_block(sample, z, subset, GreenFlavor::Reduced)?;
    let reduced_inv = inverse(&reduced.matrix, "reduced Green block")?;
    let krein = inverse(&(potential_on(sample, subset) + reduced_inv), "V_Δ + g̃_Δ^{-1}")?;
    Ok(spectral_norm(&(g.matrix - krein)))
}

/// Smallest eigenvalues of `Im g_Δ(z)` and of `-Im g̃_Δ(z)^{-1}`; both are
/// positive whenever `Im z > 0`.
pub fn positivity_margins(
    sample: &HamiltonianSample,
    z: ComplexEnergy,
    subset: &[usize],
) -> Result<(f64, f64), SpectralError> {
    let g = green_block(sample, z, subset, GreenFlavor::Full)?;
    let reduced = green_block(sample, z, subset, GreenFlavor::Reduced)?;
    let reduced_inv = inverse(&reduced.matrix, "reduced Green block")?;
    let im_g = hermitian_eigenvalues(&imaginary_part(&g.matrix))?;
    let neg_im_inv = hermitian_eigenvalues(&(-imaginary_part(&reduced_inv)))?;
    Ok((im_g[0], neg_im_inv[0]))
}

/// Relative gap between `det Im g_Δ` and
/// `det(-Im g̃_Δ^{-1}) / |det(V_Δ + g̃_Δ^{-1})|²`.
pub fn det_identity_check(
    sample: &HamiltonianSample,
    z: ComplexEnergy,
    subset: &[usize],
) -> Result<f64, SpectralError> {
    let g = green_block(sample, z, subset, GreenFlavor::Full)?;
    let reduced = green_block(sample, z, subset, GreenFlavor::Reduced)?;
    let reduced_inv = inverse(&reduced.matrix, "reduced Green block")?;

    let log_lhs = log_det_positive(&imaginary_part(&g.matrix), "Im g_Δ(z)")?;
    let log_num = log_det_positive(&(-imaginary_part(&reduced_inv)), "-Im g̃_Δ(z)^{-1}")?;
    let denom: Complex64 = (potential_on(sample, subset) + reduced_inv).lu().determinant();
    if denom.norm() == 0.0 {
        return Err(SpectralError::Singular("V_Δ + g̃_Δ^{-1}"));
    }
    let log_rhs = log_num - 2.0 * denom.norm().ln();
    // |L - R| / L = |1 - exp(log R - log L)|
    Ok((-(log_rhs - log_lhs).exp_m1()).abs())
}

/// Residuals of the Schur complement representation of the resolvent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurResidual {
    /// `‖P R P - (H_eff(z) - z)^{-1}‖₂`
    pub effective: f64,
    /// `[PP, PQ, QP, QQ]` block residuals of the full block inverse.
    pub blocks: [f64; 4],
}

impl SchurResidual {
    pub fn max(&self) -> f64 {
        self.blocks.iter().copied().fold(self.effective, f64::max)
    }
}

fn sub(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Compares the directly inverted resolvent with its Schur complement form
/// for the coordinate projection onto `p`:
///
/// ```text
/// R = [ S⁻¹               -S⁻¹ H_PQ R_Q                  ]
///     [ -R_Q H_QP S⁻¹      R_Q + R_Q H_QP S⁻¹ H_PQ R_Q    ]
/// ```
///
/// with `R_Q = (H_QQ - z)^{-1}` and `S = H_PP - z - H_PQ R_Q H_QP = H_eff(z) - z`.
pub fn schur_check(h: &CMatrix, z: ComplexEnergy, p: &[usize]) -> Result<SchurResidual, SpectralError> {
    super::check_square(h)?;
    let n = h.nrows();
    validate_subset(p, n)?;
    if p.len() == n {
        return Err(SpectralError::InvalidSubset(" and proper"));
    }
    let mut in_p = vec![false; n];
    for &i in p {
        in_p[i] = true;
    }
    let q: Vec<usize> = (0..n).filter(|&i| !in_p[i]).collect();
    let zc = z.z();

    let h_pp = sub(h, p, p);
    let h_pq = sub(h, p, &q);
    let h_qp = sub(h, &q, p);
    let mut h_qq_shifted = sub(h, &q, &q);
    for i in 0..q.len() {
        h_qq_shifted[(i, i)] -= zc;
    }
    let r_q = inverse(&h_qq_shifted, "QHQ - z")?;

    let h_eff = &h_pp - &h_pq * &r_q * &h_qp;
    let mut s = h_eff;
    for i in 0..p.len() {
        s[(i, i)] -= zc;
    }
    let s_inv = inverse(&s, "Schur complement")?;

    let r = resolvent(h, z)?;
    let block_pp = s_inv.clone();
    let block_pq = -(&s_inv * &h_pq * &r_q);
    let block_qp = -(&r_q * &h_qp * &s_inv);
    let block_qq = &r_q + &r_q * &h_qp * &s_inv * &h_pq * &r_q;

    let direct_pp = sub(&r, p, p);
    let effective = spectral_norm(&(&direct_pp - &block_pp));
    let blocks = [
        effective,
        spectral_norm(&(sub(&r, p, &q) - block_pq)),
        spectral_norm(&(sub(&r, &q, p) - block_qp)),
        spectral_norm(&(sub(&r, &q, &q) - block_qq)),
    ];
    Ok(SchurResidual { effective, blocks })
}
