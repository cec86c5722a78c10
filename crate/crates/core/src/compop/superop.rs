use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::jordan::{apply, JordanMorphismSpec, LinearMap};
use crate::matcore::{BlockMatrix, BlockProfile, CMatrix, C64};
use crate::vnops::Weight;

type Action = dyn Fn(&BlockMatrix) -> BlockMatrix + Send + Sync;

/// Linear map `L^p(M₁) → L^q(M₂)` given by its action, with the matrix form
/// (columns indexed by matrix units of the domain) materialized on demand.
#[derive(Clone)]
pub struct SuperOperator {
    domain: BlockProfile,
    p: Exponent,
    codomain: BlockProfile,
    q: Exponent,
    action: Arc<Action>,
    matrix: Arc<OnceLock<CMatrix>>,
}

impl fmt::Debug for SuperOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuperOperator")
            .field("domain", &self.domain)
            .field("p", &self.p)
            .field("codomain", &self.codomain)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl SuperOperator {
    pub fn new(
        domain: BlockProfile,
        p: Exponent,
        codomain: BlockProfile,
        q: Exponent,
        action: impl Fn(&BlockMatrix) -> BlockMatrix + Send + Sync + 'static,
    ) -> Result<Self> {
        p.check_norm_exponent()?;
        q.check_norm_exponent()?;
        Ok(Self { domain, p, codomain, q, action: Arc::new(action), matrix: Arc::new(OnceLock::new()) })
    }

    /// Operator with the given matrix form; `m` has `codomain.vec_dim()` rows
    /// and `domain.vec_dim()` columns.
    pub fn from_matrix(domain: BlockProfile, p: Exponent, codomain: BlockProfile, q: Exponent, m: CMatrix) -> Result<Self> {
        if m.nrows() != codomain.vec_dim() || m.ncols() != domain.vec_dim() {
            return Err(Error::InvalidProfile(format!(
                "superoperator matrix is {}x{}, expected {}x{} for {domain} -> {codomain}",
                m.nrows(),
                m.ncols(),
                codomain.vec_dim(),
                domain.vec_dim()
            )));
        }
        let cod = codomain.clone();
        let mat = m.clone();
        let op = Self::new(domain, p, codomain, q, move |x| BlockMatrix::from_vector(&cod, &mat.mul_vec(&x.to_vector())))?;
        let _ = op.matrix.set(m);
        Ok(op)
    }

    pub fn identity(profile: &BlockProfile, p: Exponent) -> Result<Self> {
        Self::new(profile.clone(), p, profile.clone(), p, |x| x.clone())
    }

    /// `x ↦ c·x`.
    pub fn left_multiplication(c: &BlockMatrix, p: Exponent, q: Exponent) -> Result<Self> {
        let c = c.clone();
        let profile = c.profile().clone();
        Self::new(profile.clone(), p, profile, q, move |x| &c * x)
    }

    /// `x ↦ x·c`.
    pub fn right_multiplication(c: &BlockMatrix, p: Exponent, q: Exponent) -> Result<Self> {
        let c = c.clone();
        let profile = c.profile().clone();
        Self::new(profile.clone(), p, profile, q, move |x| x * &c)
    }

    pub fn domain(&self) -> &BlockProfile {
        &self.domain
    }

    pub fn codomain(&self) -> &BlockProfile {
        &self.codomain
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    pub fn apply(&self, x: &BlockMatrix) -> Result<BlockMatrix> {
        x.ensure_profile(&self.domain)?;
        Ok((self.action)(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &BlockMatrix) -> BlockMatrix {
        (self.action)(x)
    }

    pub fn materialize(&self) -> &CMatrix {
        self.matrix.get_or_init(|| {
            let n1 = self.domain.vec_dim();
            let n2 = self.codomain.vec_dim();
            let mut m = CMatrix::zeros(n2, n1);
            for (k, e) in self.domain.basis().iter().enumerate() {
                m.set_column(k, &(self.action)(e).to_vector());
            }
            m
        })
    }

    /// Hilbert–Schmidt adjoint `C^H` applied to `y`.
    pub fn hs_adjoint_apply(&self, y: &BlockMatrix) -> BlockMatrix {
        BlockMatrix::from_vector(&self.domain, &self.materialize().adjoint_mul_vec(&y.to_vector()))
    }

    /// Same action, relabelled exponents.
    pub fn with_exponents(&self, p: Exponent, q: Exponent) -> Result<Self> {
        p.check_norm_exponent()?;
        q.check_norm_exponent()?;
        Ok(Self { p, q, ..self.clone() })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SuperOperator) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(Error::ProfileMismatch { expected: self.domain.dims().to_vec(), got: inner.codomain.dims().to_vec() });
        }
        if inner.q != self.p {
            return Err(Error::ExponentMismatch(format!("inner map lands in L^{}, outer expects L^{}", inner.q, self.p)));
        }
        let (a, b) = (self.action.clone(), inner.action.clone());
        Self::new(inner.domain.clone(), inner.p, self.codomain.clone(), self.q, move |x| a(&b(x)))
    }

    /// `self + s·other` on the same spaces.
    pub fn add_scaled(&self, s: C64, other: &SuperOperator) -> Result<Self> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::ProfileMismatch { expected: self.domain.dims().to_vec(), got: other.domain.dims().to_vec() });
        }
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(self.domain.clone(), self.p, self.codomain.clone(), self.q, move |x| &a(x) + &b(x).scale(s))
    }

    /// Dual map for the bilinear trace pairing, `tr(g·C(x)) = tr(C*(g)·x)`,
    /// from `L^{q*}` to `L^{p*}`.
    pub fn trace_dual(&self) -> Result<Self> {
        let m = self.materialize().clone();
        let dom = self.domain.clone();
        let cod = self.codomain.clone();
        let basis_images: Vec<(usize, usize, usize, BlockMatrix)> = dom
            .basis_indices()
            .enumerate()
            .map(|(k, (b, i, j))| (b, i, j, BlockMatrix::from_vector(&cod, &m.column(k))))
            .collect();
        let dom2 = dom.clone();
        Self::new(cod.clone(), self.q.conjugate(), dom.clone(), self.p.conjugate(), move |g| {
            let mut out = BlockMatrix::zeros(&dom2);
            for (b, i, j, img) in &basis_images {
                // (C*(g))_{ji} = tr(g C(e_ij))
                out.block_mut(*b)[(*j, *i)] = g.trace_pairing(img);
            }
            out
        })
    }

    /// Max deviation of the action from additivity and homogeneity on
    /// matrix-unit pairs; zero for a genuinely linear action.
    pub fn linearity_residual(&self) -> f64 {
        let basis = self.domain.basis();
        let alpha = C64::new(0.6, -1.3);
        let mut worst: f64 = 0.0;
        for (k, e) in basis.iter().enumerate() {
            let f = &basis[(k + 1) % basis.len()];
            let lhs = (self.action)(&(e + &f.scale(alpha)));
            let rhs = &(self.action)(e) + &(self.action)(f).scale(alpha);
            worst = worst.max(lhs.dist(&rhs));
        }
        worst
    }
}

impl LinearMap for SuperOperator {
    fn domain(&self) -> &BlockProfile {
        &self.domain
    }

    fn codomain(&self) -> &BlockProfile {
        &self.codomain
    }

    fn map(&self, a: &BlockMatrix) -> BlockMatrix {
        (self.action)(a)
    }
}

/// `C_J(x) = h₂^{1/2q} J(h₁^{−1/2p} x h₁^{−1/2p}) h₂^{1/2q}`.
pub fn build_composition(j: &JordanMorphismSpec, w1: &Weight, w2: &Weight, p: Exponent, q: Exponent) -> Result<SuperOperator> {
    p.check_norm_exponent()?;
    q.check_norm_exponent()?;
    if q.cmp_exp(p) == std::cmp::Ordering::Greater {
        return Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() });
    }
    w1.ensure_faithful()?;
    w2.ensure_faithful()?;
    for (w, expected) in [(w1, j.profile1()), (w2, j.profile2())] {
        if w.profile() != expected {
            return Err(Error::ProfileMismatch { expected: expected.dims().to_vec(), got: w.profile().dims().to_vec() });
        }
    }
    let left = if p.is_infinite() { None } else { Some(w1.power(-p.recip() / 2.0)?) };
    let right = if q.is_infinite() { None } else { Some(w2.power(q.recip() / 2.0)?) };
    let j = j.clone();
    SuperOperator::new(j.profile1().clone(), p, j.profile2().clone(), q, move |x| {
        let a = match &left {
            Some(s) => &(s * x) * s,
            None => x.clone(),
        };
        let ja = apply(&j, &a).expect("profile checked");
        match &right {
            Some(s) => &(s * &ja) * s,
            None => ja,
        }
    })
}
