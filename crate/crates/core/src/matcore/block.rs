use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::dense::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Block sizes `n_1..n_k` of a direct sum `M_{n_1} ⊕ … ⊕ M_{n_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockProfile(Vec<usize>);

impl BlockProfile {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidProfile("profile has no blocks".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidProfile(format!("block {pos} has size 0")));
        }
        Ok(Self(dims))
    }

    /// Commutative profile of `n` one-dimensional blocks.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self, block: usize) -> usize {
        self.0[block]
    }

    /// Size of the block-diagonal carrier matrix, `Σ n_i`.
    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }

    /// Linear dimension of the algebra, `Σ n_i²`.
    pub fn vec_dim(&self) -> usize {
        self.0.iter().map(|n| n * n).sum()
    }

    /// Matrix-unit coordinates `(block, row, col)` in vectorisation order.
    pub fn basis_indices(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(b, &n)| (0..n).flat_map(move |i| (0..n).map(move |j| (b, i, j))))
    }

    /// Position of `(block, row, col)` in the vectorisation.
    pub fn flat_index(&self, block: usize, row: usize, col: usize) -> usize {
        let offset: usize = self.0[..block].iter().map(|n| n * n).sum();
        offset + row * self.0[block] + col
    }

    pub fn unit(&self, block: usize, row: usize, col: usize) -> BlockMatrix {
        let mut m = BlockMatrix::zeros(self);
        m.blocks[block][(row, col)] = C64::new(1.0, 0.0);
        m
    }

    /// Hilbert–Schmidt orthonormal basis of matrix units.
    pub fn basis(&self) -> Vec<BlockMatrix> {
        self.basis_indices().map(|(b, i, j)| self.unit(b, i, j)).collect()
    }
}

impl TryFrom<Vec<usize>> for BlockProfile {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BlockProfile> for Vec<usize> {
    fn from(p: BlockProfile) -> Self {
        p.0
    }
}

impl fmt::Display for BlockProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Block-diagonal complex matrix over a fixed profile.
#[derive(Clone, PartialEq)]
pub struct BlockMatrix {
    profile: BlockProfile,
    blocks: Vec<CMatrix>,
}

impl BlockMatrix {
    pub fn zeros(profile: &BlockProfile) -> Self {
        Self {
            profile: profile.clone(),
            blocks: profile.dims().iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn identity(profile: &BlockProfile) -> Self {
        Self {
            profile: profile.clone(),
            blocks: profile.dims().iter().map(|&n| CMatrix::identity(n)).collect(),
        }
    }

    /// Builds from square blocks; the profile is read off the block sizes.
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        let mut dims = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if !b.is_square() {
                return Err(Error::InvalidProfile(format!(
                    "block {i} is {}x{}, not square",
                    b.nrows(),
                    b.ncols()
                )));
            }
            dims.push(b.nrows());
        }
        Ok(Self { profile: BlockProfile::new(dims)?, blocks })
    }

    /// Single-block element.
    pub fn single(m: CMatrix) -> Self {
        Self::from_blocks(vec![m]).expect("single block must be square and non-empty")
    }

    pub fn from_real_diags(diags: &[&[f64]]) -> Result<Self> {
        Self::from_blocks(diags.iter().map(|d| CMatrix::from_real_diag(d)).collect())
    }

    /// Diagonal element of a commutative profile `[1; n]`.
    pub fn commutative(values: &[f64]) -> Result<Self> {
        Self::from_blocks(values.iter().map(|&v| CMatrix::from_real_diag(&[v])).collect())
    }

    pub fn from_vector(profile: &BlockProfile, v: &[C64]) -> Self {
        assert_eq!(v.len(), profile.vec_dim(), "vector length does not match profile");
        let mut blocks = Vec::with_capacity(profile.num_blocks());
        let mut offset = 0;
        for &n in profile.dims() {
            blocks.push(CMatrix::from_vec(n, n, v[offset..offset + n * n].to_vec()));
            offset += n * n;
        }
        Self { profile: profile.clone(), blocks }
    }

    pub fn to_vector(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect()
    }

    pub fn profile(&self) -> &BlockProfile {
        &self.profile
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut CMatrix {
        &mut self.blocks[i]
    }

    pub fn ensure_profile(&self, profile: &BlockProfile) -> Result<()> {
        if &self.profile == profile {
            Ok(())
        } else {
            Err(Error::ProfileMismatch {
                expected: profile.dims().to_vec(),
                got: self.profile.dims().to_vec(),
            })
        }
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { profile: self.profile.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        assert_eq!(self.profile, other.profile, "block profile mismatch");
        Self {
            profile: self.profile.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(CMatrix::adjoint)
    }

    pub fn transpose(&self) -> Self {
        self.map_blocks(CMatrix::transpose)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(CMatrix::trace).sum()
    }

    /// Hilbert–Schmidt inner product `tr(self* other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.profile, other.profile);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum::<C64>())
            .sum()
    }

    /// Bilinear trace pairing `tr(self · other)`.
    pub fn trace_pairing(&self, other: &Self) -> C64 {
        assert_eq!(self.profile, other.profile);
        let mut acc = ZERO;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let n = a.nrows();
            for i in 0..n {
                for j in 0..n {
                    acc += a[(i, j)] * b[(j, i)];
                }
            }
        }
        acc
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|b| b.frobenius().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(CMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(CMatrix::hermitian_defect).fold(0.0, f64::max)
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(CMatrix::hermitian_part)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.zip_blocks(other, CMatrix::commutator)
    }

    /// Largest entrywise difference.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(self.profile, other.profile);
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dist(b)).fold(0.0, f64::max)
    }

    /// Whether the element is central (commutes with every matrix unit),
    /// i.e. a scalar on each block.
    pub fn is_central(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let n = b.nrows();
            let s = b[(0, 0)];
            (0..n).all(|i| (0..n).all(|j| (b[(i, j)] - if i == j { s } else { ZERO }).norm() <= tol))
        })
    }

    /// Central projection onto the chosen blocks.
    pub fn central_projection(profile: &BlockProfile, chosen: &[bool]) -> Self {
        assert_eq!(chosen.len(), profile.num_blocks());
        Self {
            profile: profile.clone(),
            blocks: profile
                .dims()
                .iter()
                .zip(chosen)
                .map(|(&n, &on)| if on { CMatrix::identity(n) } else { CMatrix::zeros(n, n) })
                .collect(),
        }
    }
}

impl<'a> Add<&'a BlockMatrix> for &'a BlockMatrix {
    type Output = BlockMatrix;
    fn add(self, rhs: &'a BlockMatrix) -> BlockMatrix {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a BlockMatrix> for &'a BlockMatrix {
    type Output = BlockMatrix;
    fn sub(self, rhs: &'a BlockMatrix) -> BlockMatrix {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a BlockMatrix> for &'a BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, rhs: &'a BlockMatrix) -> BlockMatrix {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Add for BlockMatrix {
    type Output = BlockMatrix;
    fn add(self, rhs: BlockMatrix) -> BlockMatrix {
        &self + &rhs
    }
}

impl Sub for BlockMatrix {
    type Output = BlockMatrix;
    fn sub(self, rhs: BlockMatrix) -> BlockMatrix {
        &self - &rhs
    }
}

impl Mul for BlockMatrix {
    type Output = BlockMatrix;
    fn mul(self, rhs: BlockMatrix) -> BlockMatrix {
        &self * &rhs
    }
}

impl Neg for &BlockMatrix {
    type Output = BlockMatrix;
    fn neg(self) -> BlockMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockMatrix").field("profile", &self.profile).field("blocks", &self.blocks).finish()
    }
}
