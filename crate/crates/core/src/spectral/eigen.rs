use nalgebra::linalg::{SymmetricEigen, SymmetricTridiagonal};

use super::{check_hermitian, SpectralDecomposition, SpectralError};
use crate::CMatrix;

const QL_MAX_SWEEPS: usize = 60;

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &CMatrix) -> Result<SpectralDecomposition, SpectralError> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: h.clone(),
        });
    }
    let max_iterations = 64 * n.max(8);
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, max_iterations).ok_or(
        SpectralError::NoConvergence {
            iterations: max_iterations,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only. Tridiagonal input goes straight to the QL
/// iteration; anything else is Householder-reduced first.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>, SpectralError> {
    check_hermitian(h)?;
    let n = h.nrows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![h[(0, 0)].re]),
        _ => {}
    }
    let (diag, off) = if is_tridiagonal(h) {
        // a Hermitian tridiagonal matrix is unitarily similar (diagonal phase
        // gauge) to the real one with |h_{i,i+1}| off the diagonal
        (
            (0..n).map(|i| h[(i, i)].re).collect::<Vec<_>>(),
            (0..n - 1).map(|i| h[(i, i + 1)].norm()).collect::<Vec<_>>(),
        )
    } else {
        let (d, e) = SymmetricTridiagonal::new(h.clone()).unpack_tridiagonal();
        (d.iter().copied().collect(), e.iter().copied().collect())
    };
    tridiagonal_eigenvalues(diag, &off)
}

fn is_tridiagonal(h: &CMatrix) -> bool {
    let n = h.nrows();
    (0..n).all(|j| (j + 2..n).all(|i| h[(i, j)].re == 0.0 && h[(i, j)].im == 0.0))
}

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off`, by implicit QL with Wilkinson-type shifts.
pub fn tridiagonal_eigenvalues(mut diag: Vec<f64>, off: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal must have n - 1 entries");
    let mut e: Vec<f64> = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(SpectralError::NoConvergence { iterations: sweeps });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}
