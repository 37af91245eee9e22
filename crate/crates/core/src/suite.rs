//! Randomized sweeps of the exact matrix identities over models, energies
//! and site subsets.

use std::f64::consts::TAU;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Background, DisorderDensity, LatticeBox, MagneticField, Model, SeedRecord};
use crate::spectral::{
    brute_force_minor_sum, det_identity_check, elementary_symmetric, hermitian_eigenvalues, krein_check,
    positivity_margins, schur_check, ComplexEnergy,
};
use crate::CMatrix;

/// Largest box used by [`identity_sweep`].
pub const MAX_SITES: usize = 64;

pub const BACKGROUND_KINDS: [&str; 4] = ["laplacian", "periodic", "magnetic", "decaying"];

/// Worst residuals over a sweep, with the case that produced each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdentitySweep {
    pub triples: usize,
    pub krein: Worst,
    pub determinant: Worst,
    pub schur: Worst,
    /// Smallest eigenvalue over `Im g_Δ` and `-Im g̃_Δ^{-1}`; reported as a
    /// maximum of its negation so that "worst" means largest.
    pub negative_positivity: Worst,
    pub per_background: [usize; 4],
    pub per_dimension: [usize; 2],
    pub epsilon_range: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Worst {
    pub value: f64,
    pub case: String,
}

impl Worst {
    fn update(&mut self, value: f64, case: &str) {
        if value > self.value || self.case.is_empty() || value.is_nan() {
            self.value = value;
            self.case = case.to_string();
        }
    }
}

fn random_background(rng: &mut ChaCha8Rng, kind: usize, lattice: &LatticeBox) -> Background {
    let d = lattice.dimension();
    match kind {
        0 => Background::Laplacian,
        1 => {
            let period: Vec<usize> = (0..d).map(|_| rng.random_range(1..=3)).collect();
            let cells = period.iter().product();
            Background::PeriodicPotential {
                period,
                values: (0..cells).map(|_| rng.random_range(-1.0..1.0)).collect(),
            }
        }
        2 => Background::Magnetic(MagneticField::Landau {
            flux: if d > 1 { rng.random_range(0.0..1.0) } else { 0.0 },
            axis_phases: (0..d).map(|_| rng.random_range(0.0..TAU)).collect(),
        }),
        _ => Background::DecayingHopping {
            amplitude: rng.random_range(0.2..1.5),
            rate: rng.random_range(0.3..2.0),
            radius: if rng.random_bool(0.5) { None } else { Some(rng.random_range(1.0..4.0)) },
        },
    }
}

fn random_density(rng: &mut ChaCha8Rng) -> DisorderDensity {
    if rng.random_bool(0.5) {
        let lo = rng.random_range(-2.0..1.0);
        DisorderDensity::uniform(lo, lo + rng.random_range(0.5..6.0)).expect("valid uniform density")
    } else {
        let pieces = rng.random_range(1..=4);
        let mut x = rng.random_range(-3.0..0.0);
        let mut breakpoints = vec![x];
        for _ in 0..pieces {
            x += rng.random_range(0.2..2.0);
            breakpoints.push(x);
        }
        let weights = (0..pieces).map(|_| rng.random_range(0.1..1.0)).collect();
        DisorderDensity::piecewise_constant(breakpoints, weights).expect("valid piecewise density")
    }
}

fn random_box(rng: &mut ChaCha8Rng, two_dimensional: bool) -> LatticeBox {
    if two_dimensional {
        let a = rng.random_range(2..=8usize);
        let b = rng.random_range(1..=(MAX_SITES / a).min(8));
        LatticeBox::new(vec![a, b]).expect("valid box")
    } else {
        LatticeBox::chain(rng.random_range(2..=MAX_SITES)).expect("valid box")
    }
}

/// Kreĭn, determinant, Schur/block-inverse and positivity residuals over
/// `triples` random `(model, z, Δ)`: 1D and 2D boxes with `|Λ| <= 64`,
/// backgrounds cycling through the four kinds, uniform or piecewise
/// densities, `Re z` across the spectrum, `Im z ∈ [0.05, 2]` log-uniform and
/// `1 <= |Δ| <= 4` (always a proper subset).
pub fn identity_sweep(seed: u64, triples: usize) -> Result<IdentitySweep, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IdentitySweep {
        triples,
        epsilon_range: (f64::INFINITY, f64::NEG_INFINITY),
        ..Default::default()
    };
    for t in 0..triples {
        let kind = t % 4;
        let two_d = (t / 4) % 2 == 1;
        let lattice = random_box(&mut rng, two_d);
        let background = random_background(&mut rng, kind, &lattice);
        let density = random_density(&mut rng);
        let model = Model::new(lattice, background, density).map_err(|e| format!("triple {t}: {e}"))?;
        let sample = model
            .sample(SeedRecord::new(seed, t as u64))
            .map_err(|e| format!("triple {t}: {e}"))?;
        let n = sample.len();
        let eps = (0.05f64.ln() + rng.random_range(0.0..1.0) * (2.0f64 / 0.05).ln()).exp();
        let eigs = hermitian_eigenvalues(sample.matrix()).map_err(|e| format!("triple {t}: {e}"))?;
        let (lo, hi) = (eigs[0], eigs[n - 1]);
        let energy = rng.random_range(lo - 0.5..hi + 0.5);
        let z = ComplexEnergy::new(energy, eps).expect("positive imaginary part");
        let size = rng.random_range(1..=4usize.min(n - 1));
        let subset = sample_indices(&mut rng, n, size).into_vec();
        let case = format!(
            "triple {t}: {} {:?}, z = {energy:.6}+{eps:.6}i, Δ = {subset:?}",
            BACKGROUND_KINDS[kind],
            model.lattice().sides()
        );
        let fail = |e: crate::spectral::SpectralError| format!("{case}: {e}");

        out.krein.update(krein_check(&sample, z, &subset).map_err(fail)?, &case);
        out.determinant.update(det_identity_check(&sample, z, &subset).map_err(fail)?, &case);
        out.schur.update(schur_check(sample.matrix(), z, &subset).map_err(fail)?.max(), &case);
        let (a, b) = positivity_margins(&sample, z, &subset).map_err(fail)?;
        out.negative_positivity.update(-a.min(b), &case);
        out.per_background[kind] += 1;
        out.per_dimension[usize::from(two_d)] += 1;
        out.epsilon_range = (out.epsilon_range.0.min(eps), out.epsilon_range.1.max(eps));
    }
    Ok(out)
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = rng.random_range(-2.0..2.0f64).into();
        for j in i + 1..n {
            let v = num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
    a
}

/// Largest relative gap between the enumerated minor sums and `e_n` of the
/// spectrum, over `draws` random Hermitian matrices of size `1..=max_size`
/// and every order `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSweep {
    pub draws: usize,
    pub comparisons: usize,
    /// `|brute - e_n| / max(|e_n|, |brute|)`
    pub max_relative: f64,
    /// `|brute - e_n| / e_n(|λ|)`
    pub max_scaled: f64,
}

pub fn minor_sum_sweep(seed: u64, draws: usize, max_size: usize) -> Result<MinorSweep, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = MinorSweep {
        draws,
        comparisons: 0,
        max_relative: 0.0,
        max_scaled: 0.0,
    };
    for k in 0..draws {
        let size = 1 + k % max_size;
        let a = random_hermitian(&mut rng, size);
        let eigs = hermitian_eigenvalues(&a).map_err(|e| format!("draw {k}: {e}"))?;
        let moduli: Vec<f64> = eigs.iter().map(|x| x.abs()).collect();
        for n in 1..=size {
            let brute = brute_force_minor_sum(&a, n);
            let newton = elementary_symmetric(&eigs, n);
            let gap = (brute - newton).abs();
            let rel = gap / newton.abs().max(brute.abs()).max(f64::MIN_POSITIVE);
            let scaled = gap / elementary_symmetric(&moduli, n).max(f64::MIN_POSITIVE);
            out.max_relative = out.max_relative.max(rel);
            out.max_scaled = out.max_scaled.max(scaled);
            out.comparisons += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_identity_sweep_covers_all_kinds() {
        let s = identity_sweep(4, 40).unwrap();
        assert_eq!(s.per_background, [10; 4]);
        assert_eq!(s.per_dimension, [20, 20]);
        assert!(s.krein.value < 1e-9, "{:?}", s.krein);
        assert!(s.determinant.value < 1e-8, "{:?}", s.determinant);
        assert!(s.schur.value < 1e-9, "{:?}", s.schur);
        assert!(s.negative_positivity.value < 1e-12, "{:?}", s.negative_positivity);
        assert!(s.epsilon_range.0 >= 0.05 && s.epsilon_range.1 <= 2.0);
    }

    #[test]
    fn minor_sums_agree() {
        let s = minor_sum_sweep(1, 20, 6).unwrap();
        assert_eq!(s.comparisons, 3 * 21 + 1 + 2);
        assert!(s.max_scaled < 1e-12, "{s:?}");
    }
}
