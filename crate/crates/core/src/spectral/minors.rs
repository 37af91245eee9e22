//! Sums of principal minors and the `n`-fermion trace `Tr A^{∧n} = e_n(a_1, ..., a_N)`.

use super::{check_hermitian, hermitian_eigenvalues, SpectralError};
use crate::CMatrix;

/// Largest `N` for which [`sum_principal_minors`] also enumerates minors.
pub const BRUTE_FORCE_MAX_SITES: usize = 14;

const CROSS_CHECK_RTOL: f64 = 1e-9;

/// `C(k, n)` as a float.
pub fn binomial(k: usize, n: usize) -> f64 {
    if n > k {
        return 0.0;
    }
    let n = n.min(k - n);
    (0..n).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Elementary symmetric polynomial `e_n(values)` via Newton's identities
/// `k e_k = Σ_{i=1}^k (-1)^{i-1} e_{k-i} p_i` on the power sums `p_i`.
pub fn elementary_symmetric(values: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > values.len() {
        return 0.0;
    }
    let power_sums: Vec<f64> = (1..=n as i32)
        .map(|i| values.iter().map(|v| v.powi(i)).sum())
        .collect();
    let mut e = vec![1.0f64; n + 1];
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 1..=k {
            let term = e[k - i] * power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e[k] = acc / k as f64;
    }
    e[n]
}

/// Calls `f` with every increasing `n`-subset of `0..size`.
pub(crate) fn for_each_subset(size: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if n > size {
        return;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        f(&idx);
        match (0..n).rev().find(|&k| idx[k] < size - n + k) {
            None => return,
            Some(k) => {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
}

/// `Σ_{|Δ|=n} det(P_Δ A P_Δ)` by enumerating all `C(N, n)` principal minors.
pub fn brute_force_minor_sum(a: &CMatrix, n: usize) -> f64 {
    let size = a.nrows();
    let mut total = 0.0;
    for_each_subset(size, n, |subset| {
        let minor = CMatrix::from_fn(n, n, |r, c| a[(subset[r], subset[c])]);
        // principal minors of a Hermitian matrix are real
        total += minor.lu().determinant().re;
    });
    total
}

/// `Σ_{|Δ|=n} det(P_Δ A P_Δ) = e_n(eigenvalues of A)`.
///
/// Returns the eigenvalue route. For `N <= 14` the minors are also
/// enumerated and the two must agree to `1e-9` relative to the scale
/// `e_n(|a_1|, ..., |a_N|)`, which bounds both sides term by term.
pub fn sum_principal_minors(a: &CMatrix, n: usize) -> Result<f64, SpectralError> {
    check_hermitian(a)?;
    let size = a.nrows();
    if n == 0 || n > size {
        return Err(SpectralError::OrderOutOfRange { n, size });
    }
    let eigenvalues = hermitian_eigenvalues(a)?;
    let newton = elementary_symmetric(&eigenvalues, n);
    if size <= BRUTE_FORCE_MAX_SITES {
        let brute = brute_force_minor_sum(a, n);
        let moduli: Vec<f64> = eigenvalues.iter().map(|x| x.abs()).collect();
        let scale = elementary_symmetric(&moduli, n).max(newton.abs()).max(f64::MIN_POSITIVE);
        if (brute - newton).abs() > CROSS_CHECK_RTOL * scale {
            return Err(SpectralError::MinorMismatch { brute, newton });
        }
    }
    Ok(newton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::real_diagonal;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 3), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(14, 7), 3432.0);
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let mut count = 0;
        for_each_subset(10, 10, |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(3, 4, |_| panic!("no subsets"));
    }

    #[test]
    fn diagonal_example() {
        let a = real_diagonal(&[1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(sum_principal_minors(&a, 2).unwrap(), 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(brute_force_minor_sum(&a, 2), 11.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_gives_binomials() {
        for size in 1..=9 {
            let a = CMatrix::identity(size, size);
            for n in 1..=size {
                assert_abs_diff_eq!(sum_principal_minors(&a, n).unwrap(), binomial(size, n), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn order_out_of_range() {
        let a = CMatrix::identity(3, 3);
        assert!(matches!(sum_principal_minors(&a, 0), Err(SpectralError::OrderOutOfRange { .. })));
        assert!(matches!(sum_principal_minors(&a, 4), Err(SpectralError::OrderOutOfRange { .. })));
    }

    #[test]
    fn random_hermitian_six_order_three() {
        let mut a = CMatrix::zeros(6, 6);
        for i in 0..6 {
            a[(i, i)] = Complex64::new((i as f64 * 0.7).sin(), 0.0);
            for j in i + 1..6 {
                a[(i, j)] = Complex64::new((i * j) as f64 * 0.13 - 0.4, (i + 2 * j) as f64 * 0.05 - 0.3);
                a[(j, i)] = a[(i, j)].conj();
            }
        }
        let brute = brute_force_minor_sum(&a, 3);
        let newton = sum_principal_minors(&a, 3).unwrap();
        assert!((brute - newton).abs() <= 1e-9 * brute.abs().max(1e-300), "{brute} vs {newton}");
    }
}
