//! Reproducible Monte Carlo over disorder realizations.
//!
//! Realization `r` of a run is the pure function `model.sample((seed, r))`.
//! Realizations are evaluated in parallel on a dedicated pool of
//! `workers` threads, collected in index order and reduced sequentially,
//! so every output is bit-identical for any worker count.

mod decay;
mod spacing;
pub mod stats;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::lattice::{HamiltonianSample, LatticeError, Model, SeedRecord};
use crate::spectral::{
    self, binomial, det_im, green_block, hermitian_eigenvalues, imaginary_part, resolvent, sum_principal_minors,
    ComplexEnergy, GreenFlavor, Interval, SpectralError,
};

pub use decay::{frac_moment_decay, DecayFit, DecayStatus};
pub use spacing::{rescaled_points, spacing_experiment, spacing_from_spectra, HistogramBin, SpacingStats};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("realization {realization}: {source}")]
    Realization {
        realization: u64,
        #[source]
        source: SpectralError,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Model plus sampling plan. Results depend on `(model, samples, master_seed)` only.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub model: Model,
    pub samples: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(model: Model, samples: usize, master_seed: u64) -> Self {
        McConfig {
            model,
            samples,
            master_seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_model(&self, model: Model) -> Self {
        McConfig { model, ..self.clone() }
    }

    pub fn seed(&self, realization: usize) -> SeedRecord {
        SeedRecord::new(self.master_seed, realization as u64)
    }

    /// Evaluates `f` on every realization; the first failing realization in
    /// index order is reported.
    pub fn map_realizations<T, F>(&self, f: F) -> Result<Vec<T>, EstimatorError>
    where
        T: Send,
        F: Fn(&HamiltonianSample) -> Result<T, SpectralError> + Sync,
    {
        if self.samples == 0 {
            return Err(EstimatorError::InvalidParameter("sample count must be positive".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| EstimatorError::ThreadPool(e.to_string()))?;
        let results: Vec<Result<T, EstimatorError>> = pool.install(|| {
            (0..self.samples)
                .into_par_iter()
                .map(|r| {
                    let sample = self.model.sample(self.seed(r))?;
                    f(&sample).map_err(|source| EstimatorError::Realization {
                        realization: r as u64,
                        source,
                    })
                })
                .collect()
        });
        results.into_iter().collect()
    }
}

/// Sample mean with standard error `sd / sqrt(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Index-ordered reduction. With one sample the standard error is 0.
    pub fn from_values(values: &[f64]) -> Self {
        let m = values.len();
        assert!(m > 0, "no samples");
        let mean = values.iter().sum::<f64>() / m as f64;
        let stderr = if m > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr,
            samples: m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

/// A Monte Carlo estimate against an upper bound on its expectation.
/// PASS iff `mean <= bound + 3·stderr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub estimate: McEstimate,
    pub bound: f64,
    pub slack: f64,
    pub z_score: f64,
    pub verdict: Verdict,
}

impl BoundCheck {
    pub fn new(estimate: McEstimate, bound: f64) -> Self {
        let slack = bound - estimate.mean;
        let z_score = if estimate.stderr > 0.0 {
            slack / estimate.stderr
        } else if slack >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        let verdict = if estimate.mean <= bound + 3.0 * estimate.stderr {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        BoundCheck {
            estimate,
            bound,
            slack,
            z_score,
            verdict,
        }
    }
}

/// `π^n ‖ρ‖∞^n`.
pub fn minami_bound(n: usize, sup_density: f64) -> f64 {
    (PI * sup_density).powi(n as i32)
}

/// `(π^n / n!) ‖ρ‖∞^n |J|^n |Λ|^n`.
pub fn wegner_bound(n: usize, sup_density: f64, interval_len: f64, sites: usize) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    (PI * sup_density * interval_len * sites as f64).powi(n as i32) / factorial
}

/// `E det Im g_Δ(z)` against `π^n ‖ρ‖∞^n`.
pub fn mc_minami(config: &McConfig, z: ComplexEnergy, subset: &[usize]) -> Result<BoundCheck, EstimatorError> {
    spectral::validate_subset(subset, config.model.lattice().len())?;
    let values = config.map_realizations(|sample| {
        let block = green_block(sample, z, subset, GreenFlavor::Full)?;
        det_im(&block)
    })?;
    let bound = minami_bound(subset.len(), config.model.density().sup_density());
    Ok(BoundCheck::new(McEstimate::from_values(&values), bound))
}

/// Eigenvalue counts `Tr E(J)` for every realization.
pub fn interval_counts(config: &McConfig, j: Interval) -> Result<Vec<usize>, EstimatorError> {
    config.map_realizations(|sample| Ok(spectral::count_in(&hermitian_eigenvalues(sample.matrix())?, j)))
}

/// `P(Tr E(J) >= n)` from precomputed counts, against the `n`-level bound.
pub fn wegner_check_from_counts(counts: &[usize], n: usize, sup_density: f64, j: Interval, sites: usize) -> BoundCheck {
    let hits: Vec<f64> = counts.iter().map(|&k| if k >= n { 1.0 } else { 0.0 }).collect();
    BoundCheck::new(McEstimate::from_values(&hits), wegner_bound(n, sup_density, j.len(), sites))
}

/// Empirical `P(Tr E_Λ(J) >= n)` against `(π^n/n!) ‖ρ‖∞^n |J|^n |Λ|^n`.
pub fn mc_wegner_nlevel(config: &McConfig, j: Interval, n: usize) -> Result<BoundCheck, EstimatorError> {
    Ok(mc_wegner_levels(config, j, &[n])?.remove(0))
}

/// Several levels on one shared set of realizations.
pub fn mc_wegner_levels(config: &McConfig, j: Interval, levels: &[usize]) -> Result<Vec<BoundCheck>, EstimatorError> {
    if let Some(&n) = levels.iter().find(|&&n| n == 0) {
        return Err(EstimatorError::InvalidParameter(format!("level n = {n} must be at least 1")));
    }
    if !(j.lo.is_finite() && j.hi.is_finite()) {
        return Err(EstimatorError::InvalidParameter("interval must be bounded".into()));
    }
    let counts = interval_counts(config, j)?;
    let rho = config.model.density().sup_density();
    let sites = config.model.lattice().len();
    Ok(levels
        .iter()
        .map(|&n| wegner_check_from_counts(&counts, n, rho, j, sites))
        .collect())
}

/// `N(E) = E[#{E_j <= E}] / |Λ|`.
pub fn estimate_ids(config: &McConfig, energy: f64) -> Result<McEstimate, EstimatorError> {
    Ok(estimate_ids_grid(config, &[energy])?.remove(0))
}

/// IDS on a grid from a single pass over the realizations.
pub fn estimate_ids_grid(config: &McConfig, energies: &[f64]) -> Result<Vec<McEstimate>, EstimatorError> {
    let sites = config.model.lattice().len() as f64;
    let per_realization = config.map_realizations(|sample| {
        let eigs = hermitian_eigenvalues(sample.matrix())?;
        Ok(energies
            .iter()
            .map(|&e| eigs.partition_point(|&x| x <= e) as f64 / sites)
            .collect::<Vec<f64>>())
    })?;
    Ok(column_estimates(&per_realization, energies.len()))
}

/// Central difference `(N(E+h) - N(E-h)) / 2h`; the standard error is that
/// of the per-realization difference quotient.
pub fn estimate_dos(config: &McConfig, energy: f64, h: f64) -> Result<McEstimate, EstimatorError> {
    Ok(estimate_dos_grid(config, &[energy], h)?.remove(0))
}

pub fn estimate_dos_grid(config: &McConfig, energies: &[f64], h: f64) -> Result<Vec<McEstimate>, EstimatorError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(EstimatorError::InvalidParameter(format!("DOS bandwidth h must be positive, got {h}")));
    }
    let sites = config.model.lattice().len() as f64;
    let per_realization = config.map_realizations(|sample| {
        let eigs = hermitian_eigenvalues(sample.matrix())?;
        Ok(energies
            .iter()
            .map(|&e| {
                let above = eigs.partition_point(|&x| x <= e + h);
                let below = eigs.partition_point(|&x| x <= e - h);
                (above - below) as f64 / (sites * 2.0 * h)
            })
            .collect::<Vec<f64>>())
    })?;
    Ok(column_estimates(&per_realization, energies.len()))
}

fn column_estimates(rows: &[Vec<f64>], cols: usize) -> Vec<McEstimate> {
    (0..cols)
        .map(|c| {
            let column: Vec<f64> = rows.iter().map(|row| row[c]).collect();
            McEstimate::from_values(&column)
        })
        .collect()
}

/// Relative residuals of `Σ_{|Δ|=2} det Im g_Δ = [(Tr Im R)² - Tr (Im R)²] / 2`
/// on one realization: brute-force pair sum against the trace formula, and
/// the minor sum of `Im R` (via `e_2` of its spectrum) against the same.
pub fn pair_trace_identity(sample: &HamiltonianSample, z: ComplexEnergy) -> Result<f64, SpectralError> {
    let im_r = imaginary_part(&resolvent(sample.matrix(), z)?);
    let n = im_r.nrows();
    let trace: f64 = (0..n).map(|i| im_r[(i, i)].re).sum();
    let trace_sq: f64 = (&im_r * &im_r).trace().re;
    let formula = 0.5 * (trace * trace - trace_sq);
    let mut pair_sum = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let block = green_block(sample, z, &[x, y], GreenFlavor::Full)?;
            pair_sum += det_im(&block)?;
        }
    }
    let e2 = if n >= 2 { sum_principal_minors(&im_r, 2)? } else { 0.0 };
    let scale = formula.abs().max(f64::MIN_POSITIVE);
    Ok(((pair_sum - formula).abs() / scale).max((e2 - formula).abs() / scale))
}

/// Upper bound `C(|Λ|, n) π^n ‖ρ‖∞^n` on `E Tr (Im R)^{∧n}`.
pub fn fermionic_trace_bound(n: usize, sites: usize, sup_density: f64) -> f64 {
    binomial(sites, n) * minami_bound(n, sup_density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Background, DisorderDensity, LatticeBox, MagneticField};
    use approx::assert_abs_diff_eq;

    fn uniform_chain(n: usize, bg: Background) -> Model {
        Model::new(LatticeBox::chain(n).unwrap(), bg, DisorderDensity::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_abs_diff_eq!(minami_bound(1, 1.0), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(minami_bound(2, 1.0), 9.869_604_401_089_358, epsilon = 1e-14);
        assert_abs_diff_eq!(wegner_bound(2, 1.0, 0.01, 10), PI * PI / 200.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wegner_bound(1, 1.0, 0.05, 10), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wegner_bound(3, 1.0, 0.01, 10), PI.powi(3) / 6.0 * 1e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(minami_bound(2, 0.5), PI * PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn estimate_statistics() {
        let e = McEstimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert_abs_diff_eq!(e.stderr, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        assert_eq!(McEstimate::from_values(&[7.0]).stderr, 0.0);
    }

    #[test]
    fn verdicts_allow_three_standard_errors() {
        let est = McEstimate {
            mean: 1.2,
            stderr: 0.1,
            samples: 100,
        };
        assert_eq!(BoundCheck::new(est, 1.0).verdict, Verdict::Pass);
        assert_eq!(BoundCheck::new(est, 0.85).verdict, Verdict::Fail);
        let c = BoundCheck::new(est, 1.5);
        assert_abs_diff_eq!(c.slack, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.z_score, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn minami_small_run_is_reproducible_across_workers() {
        let cfg = McConfig::new(uniform_chain(8, Background::Laplacian), 200, 17);
        let z = ComplexEnergy::new(0.5, 0.1).unwrap();
        let a = mc_minami(&cfg, z, &[3, 4]).unwrap();
        let b = mc_minami(&cfg.clone().with_workers(4), z, &[3, 4]).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate.mean > 0.0);
        assert_eq!(a.verdict, Verdict::Pass);
    }

    #[test]
    fn realization_faults_carry_the_index() {
        let cfg = McConfig::new(uniform_chain(4, Background::Laplacian), 5, 1);
        let err = cfg
            .map_realizations(|s| {
                if s.seed().unwrap().realization >= 2 {
                    Err(SpectralError::Singular("test"))
                } else {
                    Ok(())
                }
            })
            .unwrap_err();
        assert!(matches!(err, EstimatorError::Realization { realization: 2, .. }));
        let empty = McConfig::new(uniform_chain(4, Background::Laplacian), 0, 1);
        assert!(mc_minami(&empty, ComplexEnergy::new(0.0, 1.0).unwrap(), &[0]).is_err());
    }

    #[test]
    fn wegner_levels_are_monotone_and_consistent() {
        let cfg = McConfig::new(uniform_chain(10, Background::Laplacian), 2000, 5);
        let j = Interval::centered(0.5, 0.3);
        let checks = mc_wegner_levels(&cfg, j, &[1, 2, 3]).unwrap();
        assert!(checks[0].estimate.mean >= checks[1].estimate.mean);
        assert!(checks[1].estimate.mean >= checks[2].estimate.mean);
        let counts = interval_counts(&cfg, j).unwrap();
        let zero = counts.iter().filter(|&&k| k == 0).count() as f64 / counts.len() as f64;
        assert_abs_diff_eq!(checks[0].estimate.mean, 1.0 - zero, epsilon = 1e-15);
        assert!(mc_wegner_levels(&cfg, j, &[0]).is_err());
    }

    #[test]
    fn ids_extremes_and_dos_of_diagonal_model() {
        let cfg = McConfig::new(uniform_chain(20, Background::Zero), 300, 3);
        let ids = estimate_ids_grid(&cfg, &[-0.1, 1.1]).unwrap();
        assert_eq!(ids[0].mean, 0.0);
        assert_eq!(ids[1].mean, 1.0);
        let dos = estimate_dos(&cfg, 0.5, 0.05).unwrap();
        assert!((dos.mean - 1.0).abs() < 3.0 * dos.stderr + 1e-12, "{dos:?}");
        assert!(estimate_dos(&cfg, 0.5, 0.0).is_err());
    }

    #[test]
    fn dos_is_the_difference_quotient_of_ids() {
        let cfg = McConfig::new(uniform_chain(12, Background::Laplacian), 200, 5);
        let (e, h) = (1.3, 0.2);
        let ids = estimate_ids_grid(&cfg, &[e - h, e + h]).unwrap();
        let dos = estimate_dos(&cfg, e, h).unwrap();
        assert_abs_diff_eq!(dos.mean, (ids[1].mean - ids[0].mean) / (2.0 * h), epsilon = 1e-12);
    }

    #[test]
    fn pair_trace_identity_holds_for_magnetic_samples() {
        let model = uniform_chain(
            7,
            Background::Magnetic(MagneticField::Landau {
                flux: 0.0,
                axis_phases: vec![0.9],
            }),
        );
        let s = model.sample(SeedRecord::new(2, 2)).unwrap();
        let r = pair_trace_identity(&s, ComplexEnergy::new(2.0, 0.2).unwrap()).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
