//! Random ensembles: Haar unitaries, Hilbert-Schmidt states and
//! zero-grounded GUE meters.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eig, ComplexMatrix, ZERO};
use crate::quantum::{shift_to_zero_ground, DensityOperator, Observable, UnitaryOperator};

pub type TrialRng = ChaCha20Rng;

/// Seed of trial `index` under `master_seed` (SplitMix64 finaliser).
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master_seed: u64, index: u64) -> TrialRng {
    ChaCha20Rng::seed_from_u64(trial_seed(master_seed, index))
}

/// Complex standard normal with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix of i.i.d. complex standard normals.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal pushed into `Q`. Gram-Schmidt yields a positive real
/// diagonal directly.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryOperator {
    assert!(d >= 1);
    let g = ginibre(d, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // Two passes of modified Gram-Schmidt keep orthogonality at roundoff.
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        cols.push(v);
    }
    let q = ComplexMatrix::from_fn(d, |i, j| cols[j][i]);
    UnitaryOperator::new(q).expect("Gram-Schmidt output is unitary")
}

/// Hilbert-Schmidt random state `GG†/tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    assert!(d >= 1);
    let g = ginibre(d, rng);
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    DensityOperator::from_computed(&gg.scale(1.0 / tr)).expect("Hilbert-Schmidt sample is a state")
}

/// GUE sample `(G + G†)/2`.
pub fn gue<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(d, rng).hermitian_part()
}

/// Shifted GUE meter: a GUE sample moved so its lowest eigenvalue is zero.
pub fn random_meter<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Observable {
    assert!(d >= 2);
    let h = Observable::new(gue(d, rng)).expect("GUE sample is Hermitian");
    shift_to_zero_ground(&h)
}

/// Shifted GUE meter whose zero eigenspace has dimension `kernel_dim`:
/// the GUE spectrum `λ_1 ≤ … ≤ λ_d` becomes `max(λ_i − λ_z, 0)` with
/// `z = kernel_dim`, keeping the GUE eigenvectors. `kernel_dim = 1`
/// reproduces [`random_meter`].
pub fn random_meter_with_kernel<R: Rng + ?Sized>(
    d: usize,
    kernel_dim: usize,
    rng: &mut R,
) -> Observable {
    assert!(d >= 2 && kernel_dim >= 1 && kernel_dim < d);
    let eig = hermitian_eig(&gue(d, rng)).expect("GUE sample is Hermitian");
    let floor = eig.values[kernel_dim - 1];
    let shifted: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| if i < kernel_dim { 0.0 } else { x - floor })
        .collect();
    let v = &eig.vectors;
    let m = ComplexMatrix::from_fn(d, |i, j| {
        let mut acc = ZERO;
        for (k, &x) in shifted.iter().enumerate() {
            if x != 0.0 {
                acc += v[(i, k)] * v[(j, k)].conj() * x;
            }
        }
        acc
    });
    let obs = Observable::new(m).expect("reconstructed meter is Hermitian");
    shift_to_zero_ground(&obs)
}
