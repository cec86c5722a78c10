//! Spectral kernel: cyclic Jacobi for Hermitian blocks, one-sided Jacobi SVD,
//! and the functional calculus built on them.

use super::block::BlockMatrix;
use super::dense::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::exponent::Exponent;

const MAX_SWEEPS: usize = 60;
const OFFDIAG_REL: f64 = 1e-13;
const SVD_ORTH_REL: f64 = 1e-15;

/// Absolute part of the default Hermiticity tolerance.
pub const HERMITIAN_ABS_TOL: f64 = 1e-8;
/// Relative part of the default Hermiticity tolerance.
pub const HERMITIAN_REL_TOL: f64 = 1e-10;
/// Eigenvalues at or below this fraction of the spectral radius count as kernel.
pub const SUPPORT_REL_CUTOFF: f64 = 1e-12;

/// Default tolerance for `H = H*` given the size of `H`.
pub fn default_hermitian_tol(h: &BlockMatrix) -> f64 {
    HERMITIAN_ABS_TOL + HERMITIAN_REL_TOL * h.max_abs()
}

/// Rotation `U = [[c, s], [-s·e^{-iθ}, c·e^{-iθ}]]` diagonalising the 2x2
/// Hermitian matrix `[[alpha, gamma], [conj(gamma), beta]]` via `U* A U`.
#[derive(Clone, Copy)]
struct Rotation {
    c: f64,
    s: f64,
    phase: C64, // e^{-iθ}
}

impl Rotation {
    fn new(alpha: f64, beta: f64, gamma: C64) -> Option<Self> {
        let g = gamma.norm();
        if g == 0.0 || !g.is_finite() {
            return None;
        }
        let phase = (gamma / g).conj();
        let phase = phase / phase.norm();
        let theta = (beta - alpha) / (2.0 * g);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        // signum(0) = 1 in Rust, so t = 1 when alpha == beta
        let c = 1.0 / (t * t + 1.0).sqrt();
        Some(Self { c, s: t * c, phase })
    }

    /// `A <- A U` on columns `p, q`.
    fn apply_right(&self, a: &mut CMatrix, p: usize, q: usize) {
        for k in 0..a.nrows() {
            let ap = a[(k, p)];
            let aq = a[(k, q)];
            a[(k, p)] = ap * self.c - aq * self.phase * self.s;
            a[(k, q)] = ap * self.s + aq * self.phase * self.c;
        }
    }

    /// `A <- U* A` on rows `p, q`.
    fn apply_left_adjoint(&self, a: &mut CMatrix, p: usize, q: usize) {
        let pc = self.phase.conj();
        for k in 0..a.ncols() {
            let ap = a[(p, k)];
            let aq = a[(q, k)];
            a[(p, k)] = ap * self.c - aq * pc * self.s;
            a[(q, k)] = ap * self.s + aq * pc * self.c;
        }
    }
}

/// Eigendecomposition of a single Hermitian matrix by cyclic Jacobi sweeps.
/// The input is symmetrised first. Eigenvalues are ascending; eigenvectors
/// are the columns of the returned unitary.
pub fn jacobi_eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(h.is_square(), "eigendecomposition needs a square matrix");
    let n = h.nrows();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius();
    if scale > 0.0 && n > 1 {
        let threshold = OFFDIAG_REL * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let Some(rot) = Rotation::new(a[(p, p)].re, a[(q, q)].re, a[(p, q)]) else {
                        continue;
                    };
                    rot.apply_right(&mut a, p, q);
                    rot.apply_left_adjoint(&mut a, p, q);
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                    rot.apply_right(&mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Singular value decomposition `A = W V*` with `W = U diag(σ)` from
/// one-sided Jacobi on the columns of `A`.
pub struct Svd {
    /// `A V`: orthogonal columns whose norms are the singular values.
    pub scaled_left: CMatrix,
    pub singular_values: Vec<f64>,
    pub right: CMatrix,
}

pub fn jacobi_svd(a: &CMatrix) -> Svd {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    // columns below this squared norm count as zero; rotating against them
    // only feeds subnormal noise into V
    let negligible = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() * (f64::EPSILON * f64::EPSILON);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..w.nrows() {
                    let (x, y) = (w[(k, p)], w[(k, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if alpha <= negligible || beta <= negligible || gamma.norm() <= SVD_ORTH_REL * (alpha * beta).sqrt() {
                    continue;
                }
                if let Some(rot) = Rotation::new(alpha, beta, gamma) {
                    rot.apply_right(&mut w, p, q);
                    rot.apply_right(&mut v, p, q);
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let singular_values =
        (0..n).map(|j| (0..w.nrows()).map(|k| w[(k, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    Svd { scaled_left: w, singular_values, right: v }
}

/// Per-block eigendecomposition.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    pub values: Vec<Vec<f64>>,
    pub vectors: BlockMatrix,
}

impl BlockEigen {
    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values.iter().flatten().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// `V f(Λ) V*` blockwise.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> BlockMatrix {
        let blocks = self
            .values
            .iter()
            .zip(self.vectors.blocks())
            .map(|(vals, vecs)| {
                let n = vals.len();
                let fv: Vec<C64> = vals.iter().map(|&x| f(x)).collect();
                CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| vecs[(i, k)] * fv[k] * vecs[(j, k)].conj()).sum())
            })
            .collect();
        BlockMatrix::from_blocks(blocks).expect("eigenvector blocks are square")
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> BlockMatrix {
        self.map(|x| C64::new(f(x), 0.0))
    }
}

/// Eigendecomposition of a Hermitian block matrix.
///
/// Fails with `NotHermitian` when `‖H − H*‖` exceeds `tol`; otherwise the
/// Hermitian part is diagonalised.
pub fn hermitian_eig(h: &BlockMatrix, tol: f64) -> Result<BlockEigen> {
    let defect = h.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(eig_unchecked(h))
}

pub(crate) fn eig_unchecked(h: &BlockMatrix) -> BlockEigen {
    let mut values = Vec::with_capacity(h.profile().num_blocks());
    let mut vectors = Vec::with_capacity(h.profile().num_blocks());
    for b in h.blocks() {
        let (vals, vecs) = jacobi_eigh(b);
        values.push(vals);
        vectors.push(vecs);
    }
    BlockEigen { values, vectors: BlockMatrix::from_blocks(vectors).expect("square blocks") }
}

fn psd_eig(p: &BlockMatrix) -> Result<BlockEigen> {
    let eig = hermitian_eig(p, default_hermitian_tol(p))?;
    let min = eig.min_eigenvalue();
    if min < -1e-10 * eig.max_abs_eigenvalue().max(1.0) {
        return Err(Error::NotPsd { min_eig: min });
    }
    Ok(eig)
}

/// Spectral power `P^t` of a positive semidefinite `P`, with `0^t = 0` on the
/// kernel (so `t = 0` yields the support projection).
pub fn frac_power(p: &BlockMatrix, t: f64) -> Result<BlockMatrix> {
    let eig = psd_eig(p)?;
    let cutoff = SUPPORT_REL_CUTOFF * eig.max_abs_eigenvalue();
    if t < 0.0 && eig.values.iter().flatten().any(|&x| x <= cutoff) {
        return Err(Error::SingularNegativePower);
    }
    Ok(eig.map_real(|x| if x > cutoff { x.powf(t) } else { 0.0 }))
}

/// Support projection of a positive semidefinite element.
pub fn support_projection(p: &BlockMatrix) -> Result<BlockMatrix> {
    frac_power(p, 0.0)
}

/// All singular values, block by block.
pub fn singular_values(x: &BlockMatrix) -> Vec<f64> {
    x.blocks().iter().flat_map(|b| jacobi_svd(b).singular_values).collect()
}

fn lp_sum(values: &[f64], p: Exponent) -> f64 {
    let max = values.iter().fold(0.0f64, |m, &s| m.max(s));
    match p {
        Exponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        _ => {
            let pv = p.value();
            max * values.iter().map(|&s| (s / max).powf(pv)).sum::<f64>().powf(1.0 / pv)
        }
    }
}

/// Schatten `p`-norm across all blocks.
pub fn schatten_norm(x: &BlockMatrix, p: Exponent) -> Result<f64> {
    p.check_norm_exponent()?;
    Ok(lp_sum(&singular_values(x), p))
}

/// Schatten `p` quasi-norm for any `p > 0` (used where Hölder exponents drop below one).
pub fn schatten_quasi_norm(x: &BlockMatrix, p: Exponent) -> f64 {
    lp_sum(&singular_values(x), p)
}

/// Operator norm (largest singular value).
pub fn op_norm(x: &BlockMatrix) -> f64 {
    lp_sum(&singular_values(x), Exponent::Infinity)
}

/// Polar decomposition `x = u |x|`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub u: BlockMatrix,
    pub abs: BlockMatrix,
    /// Right singular vectors and singular values per block, for callers that
    /// need powers of `|x|` without a second decomposition.
    pub right: BlockMatrix,
    pub singular_values: Vec<Vec<f64>>,
}

impl Polar {
    /// `|x|^t` with `0^t = 0`.
    pub fn abs_power(&self, t: f64) -> BlockMatrix {
        let cutoff = self.cutoff();
        let eig = BlockEigen { values: self.singular_values.clone(), vectors: self.right.clone() };
        eig.map_real(|s| if s > cutoff { s.powf(t) } else { 0.0 })
    }

    fn cutoff(&self) -> f64 {
        SUPPORT_REL_CUTOFF * self.singular_values.iter().flatten().fold(0.0f64, |m, &s| m.max(s))
    }

    /// Projection onto the singular vectors with the largest singular value
    /// (within a relative tolerance), per the whole block matrix.
    pub fn top_right_projection(&self, rel: f64) -> (BlockMatrix, usize) {
        let max = self.singular_values.iter().flatten().fold(0.0f64, |m, &s| m.max(s));
        let eig = BlockEigen { values: self.singular_values.clone(), vectors: self.right.clone() };
        let count = self.singular_values.iter().flatten().filter(|&&s| max > 0.0 && s >= max * (1.0 - rel)).count();
        (eig.map_real(|s| if max > 0.0 && s >= max * (1.0 - rel) { 1.0 } else { 0.0 }), count)
    }
}

pub fn polar(x: &BlockMatrix) -> Polar {
    let svds: Vec<Svd> = x.blocks().iter().map(jacobi_svd).collect();
    let smax = svds.iter().flat_map(|s| s.singular_values.iter()).fold(0.0f64, |m, &s| m.max(s));
    let cutoff = SUPPORT_REL_CUTOFF * smax;
    let mut us = Vec::with_capacity(svds.len());
    let mut abss = Vec::with_capacity(svds.len());
    let mut rights = Vec::with_capacity(svds.len());
    let mut svals = Vec::with_capacity(svds.len());
    for svd in svds {
        let n = svd.right.nrows();
        let mut u = CMatrix::zeros(n, n);
        let mut abs = CMatrix::zeros(n, n);
        for k in 0..n {
            let s = svd.singular_values[k];
            let vk = svd.right.column(k);
            abs += &CMatrix::outer(&vk, &vk).scale_real(s);
            if s > cutoff {
                let uk: Vec<C64> = svd.scaled_left.column(k).iter().map(|z| z / s).collect();
                u += &CMatrix::outer(&uk, &vk);
            }
        }
        us.push(u);
        abss.push(abs);
        rights.push(svd.right);
        svals.push(svd.singular_values);
    }
    Polar {
        u: BlockMatrix::from_blocks(us).expect("square"),
        abs: BlockMatrix::from_blocks(abss).expect("square"),
        right: BlockMatrix::from_blocks(rights).expect("square"),
        singular_values: svals,
    }
}

/// Nearest unitary to an almost-unitary square matrix (the polar factor).
pub fn nearest_unitary(m: &CMatrix) -> CMatrix {
    let svd = jacobi_svd(m);
    let n = m.nrows();
    let mut u = CMatrix::zeros(n, n);
    for k in 0..n {
        let s = svd.singular_values[k];
        let vk = svd.right.column(k);
        let uk: Vec<C64> = svd.scaled_left.column(k).iter().map(|z| z / s).collect();
        u += &CMatrix::outer(&uk, &vk);
    }
    u
}

/// `‖U*U − 1‖` entrywise max.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (&(&u.adjoint() * u) - &CMatrix::identity(u.ncols())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::block::BlockProfile;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_eigen() {
        let h = BlockMatrix::from_real_diags(&[&[3.0, 1.0]]).unwrap();
        let e = hermitian_eig(&h, 1e-8).unwrap();
        assert_eq!(e.values[0], vec![1.0, 3.0]);
        let v = e.vectors.block(0);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((v[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_two_by_two() {
        let h = BlockMatrix::single(CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]));
        let e = hermitian_eig(&h, 1e-8).unwrap();
        assert!((e.values[0][0] - 1.0).abs() < 1e-14);
        assert!((e.values[0][1] - 3.0).abs() < 1e-14);
        let v = e.vectors.block(0);
        let s = 1.0 / 2f64.sqrt();
        // columns equal (1,-1)/√2 and (1,1)/√2 up to phase
        assert!(((v[(0, 0)] * v[(1, 0)].conj()).re + 0.5).abs() < 1e-14);
        assert!(((v[(0, 1)] * v[(1, 1)].conj()).re - 0.5).abs() < 1e-14);
        assert!((v[(0, 0)].norm() - s).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = BlockMatrix::single(CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]));
        assert!(matches!(hermitian_eig(&h, 1e-8), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let profile = BlockProfile::new(vec![5]).unwrap();
        for _ in 0..20 {
            let h = sample::hermitian(&mut rng, &profile);
            let e = hermitian_eig(&h, 1e-8).unwrap();
            let back = e.map_real(|x| x);
            let scale = 1.0 + op_norm(&h);
            assert!(back.dist(&h) < 1e-10 * scale);
            assert!(unitarity_defect(e.vectors.block(0)) < 1e-10);
            assert!(e.values[0].windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn svd_of_wide_and_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (rows, cols) in [(5, 13), (1, 5), (8, 9), (4, 9), (6, 6)] {
            let a = sample::gaussian_matrix(&mut rng, rows, cols);
            let svd = jacobi_svd(&a);
            let vv = &svd.right.adjoint() * &svd.right;
            assert!(vv.dist(&CMatrix::identity(cols)) < 1e-12, "{rows}x{cols}");
            assert!((&svd.scaled_left * &svd.right.adjoint()).dist(&a) < 1e-12);
            let top = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
            let (vals, _) = jacobi_eigh(&(&a * &a.adjoint()));
            assert!((top - vals.last().unwrap().sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn powers() {
        let p = BlockMatrix::from_real_diags(&[&[4.0, 9.0]]).unwrap();
        let r = frac_power(&p, 0.5).unwrap();
        assert!(r.dist(&BlockMatrix::from_real_diags(&[&[2.0, 3.0]]).unwrap()) < 1e-14);

        let p = BlockMatrix::from_real_diags(&[&[4.0, 0.0]]).unwrap();
        let r = frac_power(&p, 0.5).unwrap();
        assert!(r.dist(&BlockMatrix::from_real_diags(&[&[2.0, 0.0]]).unwrap()) < 1e-14);
        assert!(matches!(frac_power(&p, -0.5), Err(Error::SingularNegativePower)));
        let supp = frac_power(&p, 0.0).unwrap();
        assert!(supp.dist(&BlockMatrix::from_real_diags(&[&[1.0, 0.0]]).unwrap()) < 1e-14);

        let p = BlockMatrix::single(CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]));
        let sq = frac_power(&p, 2.0).unwrap();
        assert!(sq.dist(&(&p * &p)) < 1e-12);
        assert!(frac_power(&p, 1.0).unwrap().dist(&p) < 1e-13);

        let neg = BlockMatrix::from_real_diags(&[&[1.0, -1.0]]).unwrap();
        assert!(matches!(frac_power(&neg, 0.5), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn schatten_examples() {
        let x = BlockMatrix::from_real_diags(&[&[3.0, 4.0]]).unwrap();
        let n = |p: &str| schatten_norm(&x, p.parse().unwrap()).unwrap();
        assert!((n("1") - 7.0).abs() < 1e-14);
        assert!((n("2") - 5.0).abs() < 1e-14);
        assert!((n("inf") - 4.0).abs() < 1e-14);
        let e12 = BlockMatrix::single(CMatrix::unit(3, 0, 2));
        for p in ["1", "1.5", "2", "3", "inf"] {
            assert!((schatten_norm(&e12, p.parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(
            schatten_norm(&x, Exponent::from_f64(0.5).unwrap()),
            Err(Error::BadExponent(_))
        ));
    }

    #[test]
    fn polar_examples() {
        let x = BlockMatrix::from_real_diags(&[&[2.0, 0.0]]).unwrap();
        let pd = polar(&x);
        assert!(pd.abs.dist(&x) < 1e-14);
        assert!(pd.u.dist(&BlockMatrix::from_real_diags(&[&[1.0, 0.0]]).unwrap()) < 1e-14);

        let m1 = BlockMatrix::single(CMatrix::from_rows(&[vec![c(-1.0)]]));
        let pd = polar(&m1);
        assert!((pd.u.block(0)[(0, 0)] - c(-1.0)).norm() < 1e-15);
        assert!((pd.abs.block(0)[(0, 0)] - c(1.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let profile = BlockProfile::new(vec![3]).unwrap();
        for _ in 0..20 {
            let x = sample::gaussian(&mut rng, &profile);
            let pd = polar(&x);
            assert!((&pd.u * &pd.abs).dist(&x) < 1e-10);
            let abs2 = frac_power(&(&x.adjoint() * &x), 0.5).unwrap();
            assert!(pd.abs.dist(&abs2) < 1e-9);
        }
    }
}
