use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::SuperOperator;
use crate::exponent::Exponent;
use crate::matcore::{jacobi_svd, polar, schatten_norm, BlockMatrix};
use crate::sample;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Stop a restart once the objective gains less than this.
    pub gain_tol: f64,
    /// Use the exact singular value at `p = q = 2`.
    pub exact_at_22: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iter: 200, seed: 0, gain_tol: 1e-10, exact_at_22: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub lower_bound: f64,
    pub certified: bool,
    /// Iterations used by the best restart.
    pub iterations: usize,
    pub seed: u64,
    pub restarts: usize,
}

/// Maximizer of `Re tr(x* g)` over the unit ball of `L^s`: `u|g|^{s*−1}`
/// normalized, with the limiting forms at `s = 1` and `s = ∞`.
pub fn ball_maximizer(g: &BlockMatrix, s: Exponent) -> BlockMatrix {
    let pd = polar(g);
    if g.max_abs() == 0.0 {
        return BlockMatrix::zeros(g.profile());
    }
    let x = match s {
        Exponent::Infinity => pd.u.clone(),
        _ if s == Exponent::ONE => {
            let (top, count) = pd.top_right_projection(1e-12);
            (&pd.u * &top).scale_real(1.0 / count as f64)
        }
        _ => &pd.u * &pd.abs_power(1.0 / (s.value() - 1.0)),
    };
    normalize(x, s)
}

fn normalize(x: BlockMatrix, s: Exponent) -> BlockMatrix {
    let n = schatten_norm(&x, s).expect("norm exponent");
    if n > 0.0 {
        x.scale_real(1.0 / n)
    } else {
        x
    }
}

/// Largest singular value of the materialized map, the exact `L² → L²` norm.
pub fn hs_operator_norm(c: &SuperOperator) -> f64 {
    jacobi_svd(c.materialize()).singular_values.into_iter().fold(0.0, f64::max)
}

pub fn operator_norm(c: &SuperOperator, restarts: usize, max_iter: usize, seed: u64) -> NormEstimate {
    operator_norm_with(c, &NormOptions { restarts, max_iter, seed, ..NormOptions::default() })
}

/// Best value of `‖C(x)‖_q / ‖x‖_p` found by alternating maximization, or the
/// certified value at `(2, 2)`.
pub fn operator_norm_with(c: &SuperOperator, opts: &NormOptions) -> NormEstimate {
    if opts.exact_at_22 && c.p() == Exponent::TWO && c.q() == Exponent::TWO {
        return NormEstimate {
            lower_bound: hs_operator_norm(c),
            certified: true,
            iterations: 0,
            seed: opts.seed,
            restarts: 0,
        };
    }
    c.materialize();
    let runs: Vec<(f64, usize)> =
        (0..opts.restarts.max(1)).into_par_iter().map(|r| single_restart(c, opts, r as u64)).collect();
    let (best, iterations) = runs.iter().fold((0.0f64, 0usize), |acc, &(v, it)| if v > acc.0 { (v, it) } else { acc });
    NormEstimate { lower_bound: best, certified: false, iterations, seed: opts.seed, restarts: opts.restarts.max(1) }
}

fn single_restart(c: &SuperOperator, opts: &NormOptions, stream: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let (p, q) = (c.p(), c.q());
    let q_dual = q.conjugate();
    let objective = |x: &BlockMatrix| schatten_norm(&c.apply_unchecked(x), q).expect("norm exponent");

    let mut x = normalize(sample::gaussian(&mut rng, c.domain()), p);
    let mut best = objective(&x);
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let g = c.apply_unchecked(&x);
        if g.max_abs() == 0.0 {
            break;
        }
        let y = ball_maximizer(&g, q_dual);
        let h = c.hs_adjoint_apply(&y);
        if h.max_abs() == 0.0 {
            break;
        }
        let next = ball_maximizer(&h, p);
        let value = objective(&next);
        let gain = value - best;
        if value > best {
            best = value;
        }
        x = next;
        if gain < opts.gain_tol {
            break;
        }
    }
    (best, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{BlockProfile, CMatrix};

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn left_multiplication_norm() {
        let c = BlockMatrix::from_real_diags(&[&[2.0, 3.0]]).unwrap();
        let op = SuperOperator::left_multiplication(&c, Exponent::TWO, Exponent::TWO).unwrap();
        let est = operator_norm(&op, 16, 200, 0);
        assert!(est.certified);
        assert!((est.lower_bound - 3.0).abs() < 1e-12);
        let slow = operator_norm_with(&op, &NormOptions { exact_at_22: false, ..NormOptions::default() });
        assert!(!slow.certified);
        assert!((slow.lower_bound - 3.0).abs() < 1e-8);
    }

    #[test]
    fn identity_has_norm_one() {
        let profile = BlockProfile::new(vec![2, 1]).unwrap();
        for p in ["1", "1.5", "2", "3", "inf"] {
            let op = SuperOperator::identity(&profile, e(p)).unwrap();
            let est = operator_norm(&op, 4, 50, 3);
            assert!((est.lower_bound - 1.0).abs() < 1e-9, "p = {p}: {}", est.lower_bound);
        }
    }

    #[test]
    fn ball_maximizer_attains_dual_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let profile = BlockProfile::new(vec![3, 2]).unwrap();
        for s in ["1", "1.5", "2", "4", "inf"] {
            let s = e(s);
            let g = sample::gaussian(&mut rng, &profile);
            let x = ball_maximizer(&g, s);
            assert!((schatten_norm(&x, s).unwrap() - 1.0).abs() < 1e-10);
            let value = x.hs_inner(&g).re;
            let dual = schatten_norm(&g, s.conjugate()).unwrap();
            assert!((value - dual).abs() < 1e-9 * dual, "s = {s}: {value} vs {dual}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let profile = BlockProfile::new(vec![2]).unwrap();
        let m = sample::gaussian_matrix(&mut rng, 4, 4);
        let op = SuperOperator::from_matrix(profile.clone(), e("3"), profile, e("1.5"), m).unwrap();
        let a = operator_norm(&op, 8, 100, 42);
        let b = operator_norm(&op, 8, 100, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_operator() {
        let profile = BlockProfile::new(vec![2]).unwrap();
        let op = SuperOperator::from_matrix(profile.clone(), e("3"), profile, e("2"), CMatrix::zeros(4, 4)).unwrap();
        assert_eq!(operator_norm(&op, 2, 10, 0).lower_bound, 0.0);
    }
}
