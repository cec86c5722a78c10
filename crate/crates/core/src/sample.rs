//! Seeded random generators for algebra elements, densities and unitaries.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matcore::{nearest_unitary, BlockMatrix, BlockProfile, CMatrix, C64};

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

/// Complex Ginibre element.
pub fn gaussian(rng: &mut impl Rng, profile: &BlockProfile) -> BlockMatrix {
    BlockMatrix::from_blocks(profile.dims().iter().map(|&n| gaussian_matrix(rng, n, n)).collect())
        .expect("profile blocks are square")
}

pub fn hermitian(rng: &mut impl Rng, profile: &BlockProfile) -> BlockMatrix {
    gaussian(rng, profile).hermitian_part()
}

/// Haar-ish random unitary (polar factor of a Ginibre matrix).
pub fn unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    nearest_unitary(&gaussian_matrix(rng, n, n))
}

pub fn block_unitary(rng: &mut impl Rng, profile: &BlockProfile) -> BlockMatrix {
    BlockMatrix::from_blocks(profile.dims().iter().map(|&n| unitary(rng, n)).collect()).expect("square")
}

/// Positive definite density with unit trace and smallest eigenvalue bounded
/// away from zero.
pub fn faithful_density(rng: &mut impl Rng, profile: &BlockProfile) -> BlockMatrix {
    let g = gaussian(rng, profile);
    let mut rho = &(&g * &g.adjoint()) + &BlockMatrix::identity(profile).scale_real(0.2);
    rho = rho.hermitian_part();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Diagonal positive weights summing to one.
pub fn probability_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Orthogonal projection onto the span of `k` random vectors in each block
/// (`k` clipped to the block size).
pub fn projection(rng: &mut impl Rng, profile: &BlockProfile, ranks: &[usize]) -> BlockMatrix {
    let blocks = profile
        .dims()
        .iter()
        .zip(ranks)
        .map(|(&n, &k)| {
            let u = unitary(rng, n);
            let mut p = CMatrix::zeros(n, n);
            for j in 0..k.min(n) {
                let col = u.column(j);
                p += &CMatrix::outer(&col, &col);
            }
            p
        })
        .collect();
    BlockMatrix::from_blocks(blocks).expect("square")
}
