use super::stats::{chi_square_poisson, ks_distance_exponential, ks_p_value, ChiSquareTest};
use super::{EstimatorError, McConfig, McEstimate};
use crate::lattice::HamiltonianSample;
use crate::spectral::{hermitian_eigenvalues, SpectralError};

use statrs::distribution::{Discrete, Poisson};

/// `{|Λ|(E_j - E)}` over all eigenvalues of the realization, ascending.
pub fn rescaled_points(sample: &HamiltonianSample, energy: f64) -> Result<Vec<f64>, SpectralError> {
    let eigs = hermitian_eigenvalues(sample.matrix())?;
    Ok(rescale(&eigs, sample.len(), energy))
}

fn rescale(eigenvalues: &[f64], sites: usize, energy: f64) -> Vec<f64> {
    let n = sites as f64;
    eigenvalues.iter().map(|e| n * (e - energy)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub count: u64,
    pub observed: u64,
    /// `M · Poisson(2W n̂).pmf(count)`
    pub expected: f64,
}

/// Level statistics of the rescaled spectrum near one energy.
#[derive(Debug, Clone)]
pub struct SpacingStats {
    pub energy: f64,
    pub window: f64,
    pub sites: usize,
    pub realizations: usize,
    /// Bandwidth used for the DOS estimate.
    pub bandwidth: f64,
    pub dos: McEstimate,
    /// Gap from each rescaled point in `[-W, W)` to the next point of the
    /// same realization, pooled over realizations.
    pub gaps: Vec<f64>,
    /// KS distance of `gaps` to `Exponential(n̂(E))`.
    pub ks_distance: f64,
    pub ks_p_value: f64,
    /// Points in `[-W, W)` per realization.
    pub counts: Vec<u64>,
    /// `2W n̂(E)`
    pub expected_count: f64,
    pub histogram: Vec<HistogramBin>,
    pub chi_square: Option<ChiSquareTest>,
}

impl SpacingStats {
    pub fn mean_count(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.counts.len() as f64
    }
}

/// Spacing statistics from precomputed ascending spectra (one per
/// realization) and a given DOS estimate.
pub fn spacing_from_spectra(
    spectra: &[Vec<f64>],
    sites: usize,
    energy: f64,
    window: f64,
    dos: McEstimate,
    bandwidth: f64,
) -> Result<SpacingStats, EstimatorError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(EstimatorError::InvalidParameter(format!("window W must be positive, got {window}")));
    }
    if !(dos.mean > 0.0) {
        return Err(EstimatorError::InvalidParameter(format!(
            "density of states estimate n(E) = {} must be positive",
            dos.mean
        )));
    }
    if spectra.is_empty() {
        return Err(EstimatorError::InvalidParameter("no spectra".into()));
    }
    let mut gaps = Vec::new();
    let mut counts = Vec::with_capacity(spectra.len());
    for eigs in spectra {
        let points = rescale(eigs, sites, energy);
        let mut count = 0u64;
        for (j, &p) in points.iter().enumerate() {
            if (-window..window).contains(&p) {
                count += 1;
                if let Some(&next) = points.get(j + 1) {
                    gaps.push(next - p);
                }
            }
        }
        counts.push(count);
    }
    let ks_distance = ks_distance_exponential(&gaps, dos.mean);
    let ks_p_value = ks_p_value(ks_distance, gaps.len());
    let expected_count = 2.0 * window * dos.mean;
    let poisson = Poisson::new(expected_count)
        .map_err(|e| EstimatorError::InvalidParameter(format!("Poisson reference: {e}")))?;
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let histogram = (0..=max_count)
        .map(|k| HistogramBin {
            count: k,
            observed: counts.iter().filter(|&&c| c == k).count() as u64,
            expected: counts.len() as f64 * poisson.pmf(k),
        })
        .collect();
    let chi_square = chi_square_poisson(&counts, expected_count, 5.0);
    Ok(SpacingStats {
        energy,
        window,
        sites,
        realizations: spectra.len(),
        bandwidth,
        dos,
        gaps,
        ks_distance,
        ks_p_value,
        counts,
        expected_count,
        histogram,
        chi_square,
    })
}

/// Pools rescaled points near `energy` over the realizations of `config`.
/// `n̂(E)` comes from the same spectra with bandwidth `bandwidth`.
pub fn spacing_experiment(
    config: &McConfig,
    energy: f64,
    window: f64,
    bandwidth: f64,
) -> Result<SpacingStats, EstimatorError> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(EstimatorError::InvalidParameter(format!(
            "DOS bandwidth h must be positive, got {bandwidth}"
        )));
    }
    let sites = config.model.lattice().len();
    let spectra = config.map_realizations(|sample| hermitian_eigenvalues(sample.matrix()))?;
    let dos_values: Vec<f64> = spectra
        .iter()
        .map(|eigs| {
            let above = eigs.partition_point(|&x| x <= energy + bandwidth);
            let below = eigs.partition_point(|&x| x <= energy - bandwidth);
            (above - below) as f64 / (sites as f64 * 2.0 * bandwidth)
        })
        .collect();
    let dos = McEstimate::from_values(&dos_values);
    spacing_from_spectra(&spectra, sites, energy, window, dos, bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Background, DisorderDensity, LatticeBox, Model};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Homogeneous Poisson process of intensity `rate` (in rescaled units)
    /// on `[-span, span]`, mapped back to energies around `energy`.
    fn poisson_spectrum(rng: &mut ChaCha8Rng, rate: f64, span: f64, sites: usize, energy: f64) -> Vec<f64> {
        let mut x = -span;
        let mut out = Vec::new();
        loop {
            let u: f64 = rng.random();
            x += -(1.0 - u).ln() / rate;
            if x > span {
                return out;
            }
            out.push(energy + x / sites as f64);
        }
    }

    fn known_dos(rate: f64) -> McEstimate {
        McEstimate {
            mean: rate,
            stderr: 0.0,
            samples: 1,
        }
    }

    #[test]
    fn rescaling() {
        let model = Model::new(
            LatticeBox::chain(10).unwrap(),
            Background::Zero,
            DisorderDensity::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let mut v = vec![0.0; 10];
        v[3] = 0.55;
        v[4] = 0.5;
        let s = model.sample_with_potential(v).unwrap();
        let p = rescaled_points(&s, 0.5).unwrap();
        assert!(p.contains(&0.0));
        assert!(p.iter().any(|&x| (x - 0.5).abs() < 1e-12));
        let shifted = rescaled_points(&s, 0.6).unwrap();
        for (a, b) in p.iter().zip(&shifted) {
            assert_abs_diff_eq!(b - a, -10.0 * 0.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthetic_poisson_spectra_converge() {
        let rate = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut last = f64::INFINITY;
        for realizations in [50usize, 500, 5000] {
            let spectra: Vec<Vec<f64>> =
                (0..realizations).map(|_| poisson_spectrum(&mut rng, rate, 40.0, 100, 1.0)).collect();
            let stats = spacing_from_spectra(&spectra, 100, 1.0, 10.0, known_dos(rate), 0.05).unwrap();
            assert!(stats.gaps.iter().all(|&g| g >= 0.0));
            let hist_total: u64 = stats.histogram.iter().map(|b| b.observed).sum();
            assert_eq!(hist_total as usize, stats.realizations);
            assert!(stats.ks_distance < 1.7 / (stats.gaps.len() as f64).sqrt(), "{}", stats.ks_distance);
            assert!(stats.chi_square.as_ref().unwrap().p_value > 1e-3);
            last = last.min(stats.ks_distance);
        }
        assert!(last < 0.02);
    }

    #[test]
    fn rejects_nonpositive_dos() {
        let spectra = vec![vec![0.0, 1.0]];
        assert!(spacing_from_spectra(&spectra, 2, 0.5, 1.0, known_dos(0.0), 0.05).is_err());
        assert!(spacing_from_spectra(&spectra, 2, 0.5, 0.0, known_dos(1.0), 0.05).is_err());
    }

    #[test]
    fn experiment_on_diagonal_model_matches_density() {
        // V-only model: eigenvalues are i.i.d. uniform, so rescaled points
        // form a binomial process of intensity 1 near the center
        let model = Model::new(
            LatticeBox::chain(400).unwrap(),
            Background::Zero,
            DisorderDensity::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let cfg = McConfig::new(model, 300, 21);
        let stats = spacing_experiment(&cfg, 0.5, 5.0, 0.05).unwrap();
        assert!((stats.dos.mean - 1.0).abs() < 4.0 * stats.dos.stderr);
        assert!(stats.ks_distance < 0.06, "{}", stats.ks_distance);
    }
}
