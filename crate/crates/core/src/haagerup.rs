//! Haagerup `L^p` structure at finite dimension.
//!
//! `L^p_φ(M)` is the matrix carrier with the Schatten `p`-norm; the weight
//! only enters through the symmetric embedding `a ↦ h^{1/2p} a h^{1/2p}` and
//! the Kosaki map `x ↦ h^{1/2p*} x h^{1/2p*}` into `L^1`.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{polar, schatten_norm, BlockMatrix, C64};
use crate::vnops::Weight;

/// An element of `L^p` together with its exponent.
#[derive(Clone, Debug)]
pub struct LpElement {
    pub x: BlockMatrix,
    pub p: Exponent,
}

impl LpElement {
    pub fn new(x: BlockMatrix, p: Exponent) -> Result<Self> {
        p.check_norm_exponent()?;
        Ok(Self { x, p })
    }

    pub fn norm(&self) -> f64 {
        schatten_norm(&self.x, self.p).expect("exponent checked on construction")
    }

    pub fn adjoint(&self) -> Self {
        Self { x: self.x.adjoint(), p: self.p }
    }
}

/// `(p, q, r)` with `1/q = 1/p + 1/r`, `q ≤ p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentTriple {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
}

impl ExponentTriple {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        p.check_norm_exponent()?;
        q.check_norm_exponent()?;
        let r = Exponent::holder_complement(p, q)?;
        Ok(Self { p, q, r })
    }

    pub fn p_conjugate(&self) -> Exponent {
        self.p.conjugate()
    }

    /// `|1/q − 1/p − 1/r|`.
    pub fn defect(&self) -> f64 {
        (self.q.recip() - self.p.recip() - self.r.recip()).abs()
    }
}

/// Symmetric embedding `i^(p)(a) = h^{1/2p} a h^{1/2p}`; `p = ∞` is the identity.
pub fn embed(w: &Weight, a: &BlockMatrix, p: Exponent) -> Result<LpElement> {
    p.check_norm_exponent()?;
    w.ensure_faithful()?;
    a.ensure_profile(w.profile())?;
    if p.is_infinite() {
        return Ok(LpElement { x: a.clone(), p });
    }
    let s = w.power(p.recip() / 2.0)?;
    Ok(LpElement { x: &(&s * a) * &s, p })
}

/// Inverse of [`embed`].
pub fn unembed(w: &Weight, x: &LpElement) -> Result<BlockMatrix> {
    w.ensure_faithful()?;
    x.x.ensure_profile(w.profile())?;
    if x.p.is_infinite() {
        return Ok(x.x.clone());
    }
    let s = w.power(-x.p.recip() / 2.0)?;
    Ok(&(&s * &x.x) * &s)
}

/// Kosaki map `κ_p(x) = h^{1/2p*} x h^{1/2p*}` into `L^1`.
pub fn kosaki_embed(w: &Weight, x: &LpElement) -> Result<LpElement> {
    w.ensure_faithful()?;
    x.x.ensure_profile(w.profile())?;
    let pc = x.p.conjugate();
    let s = w.power(pc.recip() / 2.0)?;
    Ok(LpElement { x: &(&s * &x.x) * &s, p: Exponent::ONE })
}

/// Trace functional on `L^1`.
pub fn tr(x: &LpElement) -> C64 {
    x.x.trace()
}

/// Both sides of Hölder's inequality `‖xy‖_q ≤ ‖x‖_p ‖y‖_r`.
pub fn holder_check(x: &LpElement, y: &LpElement, triple: &ExponentTriple) -> Result<(f64, f64)> {
    if x.p != triple.p || y.p != triple.r {
        return Err(Error::ExponentMismatch(format!(
            "got ({}, {}), triple expects ({}, {})",
            x.p, y.p, triple.p, triple.r
        )));
    }
    let lhs = schatten_norm(&(&x.x * &y.x), triple.q)?;
    Ok((lhs, x.norm() * y.norm()))
}

/// Norming element for `‖b‖_r = sup{‖bg‖_s : ‖g‖_t ≤ 1}` with
/// `1/s = 1/r + 1/t`: `g = |b|^{r/t}` scaled to unit `t`-norm.
pub fn norming_element(b: &BlockMatrix, r: Exponent, t: Exponent) -> Result<BlockMatrix> {
    if r.is_infinite() || t.is_infinite() {
        return Err(Error::ExponentMismatch("norming element needs finite r and t".into()));
    }
    let pd = polar(b);
    let g = pd.abs_power(r.value() / t.value());
    let n = schatten_norm(&g, t)?;
    Ok(if n > 0.0 { g.scale_real(1.0 / n) } else { g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{BlockProfile, CMatrix};
    use crate::sample;
    use crate::vnops::evaluate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn embed_examples() {
        let w = Weight::from_diags(&[&[0.7, 0.3]]).unwrap();
        let e12 = w.profile().unit(0, 0, 1);
        let x = embed(&w, &e12, e("2")).unwrap();
        let expected = 0.21f64.powf(0.25);
        assert!((x.x.block(0)[(0, 1)].re - expected).abs() < 1e-14);
        assert!((expected - 0.676948).abs() < 1e-6);

        let id = BlockMatrix::identity(w.profile());
        assert!(embed(&w, &id, Exponent::ONE).unwrap().x.dist(w.density()) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = sample::gaussian(&mut rng, w.profile());
        assert_eq!(embed(&w, &a, Exponent::Infinity).unwrap().x, a);

        let nf = Weight::from_diags(&[&[1.0, 0.0]]).unwrap();
        assert!(matches!(embed(&nf, &a, e("2")), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn unembed_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let profile = BlockProfile::new(vec![3, 1]).unwrap();
        let w = Weight::new(sample::faithful_density(&mut rng, &profile)).unwrap();
        for p in ["1", "1.5", "2", "4"] {
            let hp = w.power(e(p).recip()).unwrap();
            let back = unembed(&w, &LpElement::new(hp, e(p)).unwrap()).unwrap();
            assert!(back.dist(&BlockMatrix::identity(&profile)) < 1e-9);
            let a = sample::gaussian(&mut rng, &profile);
            let rt = unembed(&w, &embed(&w, &a, e(p)).unwrap()).unwrap();
            assert!(rt.dist(&a) < 1e-9 * (1.0 + a.max_abs()));
        }
        let a = sample::gaussian(&mut rng, &profile);
        let x = LpElement::new(a.clone(), Exponent::Infinity).unwrap();
        assert_eq!(unembed(&w, &x).unwrap(), a);
    }

    #[test]
    fn kosaki_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let profile = BlockProfile::new(vec![2, 2]).unwrap();
        let w = Weight::new(sample::faithful_density(&mut rng, &profile)).unwrap();
        let a = sample::gaussian(&mut rng, &profile);
        for p in ["1.5", "2", "3", "inf"] {
            let k = kosaki_embed(&w, &embed(&w, &a, e(p)).unwrap()).unwrap();
            assert!(k.x.dist(&embed(&w, &a, Exponent::ONE).unwrap().x) < 1e-9);
            assert_eq!(k.p, Exponent::ONE);
        }
        let half = Weight::new(BlockMatrix::identity(&BlockProfile::new(vec![2]).unwrap()).scale_real(0.5)).unwrap();
        let x = sample::gaussian(&mut rng, half.profile());
        // h^{1/4} on each side
        let k = kosaki_embed(&half, &LpElement::new(x.clone(), e("2")).unwrap()).unwrap();
        assert!(k.x.dist(&x.scale_real(0.5f64.sqrt())) < 1e-14);
        // p = ∞ uses h^{1/2}
        let w1 = Weight::from_diags(&[&[0.25, 0.04]]).unwrap();
        let y = BlockMatrix::single(CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]));
        let k = kosaki_embed(&w1, &LpElement::new(y, Exponent::Infinity).unwrap()).unwrap();
        assert!((k.x.block(0)[(0, 1)].re - 0.5 * 0.2).abs() < 1e-14);
    }

    #[test]
    fn trace_examples() {
        let w = Weight::from_diags(&[&[0.7, 0.3]]).unwrap();
        let h = LpElement::new(w.density().clone(), Exponent::ONE).unwrap();
        assert!((tr(&h).re - 1.0).abs() < 1e-14);
        let a = BlockMatrix::from_real_diags(&[&[1.0, 2.0]]).unwrap();
        let x = embed(&w, &a, Exponent::ONE).unwrap();
        assert!((tr(&x).re - 1.3).abs() < 1e-14);
        assert!((tr(&x) - evaluate(&w, &a).unwrap()).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let z = LpElement::new(sample::gaussian(&mut rng, w.profile()), Exponent::ONE).unwrap();
        assert!((tr(&z.adjoint()) - tr(&z).conj()).norm() < 1e-14);
    }

    #[test]
    fn holder_examples() {
        let profile = BlockProfile::new(vec![3]).unwrap();
        let t = ExponentTriple::new(e("2"), e("1")).unwrap();
        assert_eq!(t.r, e("2"));
        let id = LpElement::new(BlockMatrix::identity(&profile), e("2")).unwrap();
        let (l, r) = holder_check(&id, &id, &t).unwrap();
        assert!((l - 3.0).abs() < 1e-14 && (r - 3.0).abs() < 1e-14);

        let x = LpElement::new(BlockMatrix::from_real_diags(&[&[1.0, 0.0]]).unwrap(), e("3")).unwrap();
        let y = LpElement::new(BlockMatrix::from_real_diags(&[&[0.0, 1.0]]).unwrap(), e("3")).unwrap();
        let t = ExponentTriple::new(e("3"), e("1.5")).unwrap();
        let (l, _) = holder_check(&x, &y, &t).unwrap();
        assert_eq!(l, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let p4 = BlockProfile::new(vec![4]).unwrap();
        for _ in 0..20 {
            let x = LpElement::new(sample::gaussian(&mut rng, &p4), e("3")).unwrap();
            let y = LpElement::new(sample::gaussian(&mut rng, &p4), e("3")).unwrap();
            let (l, r) = holder_check(&x, &y, &t).unwrap();
            assert!(l <= r + 1e-9);
        }
        let wrong = LpElement::new(BlockMatrix::identity(&p4), e("2")).unwrap();
        assert!(matches!(holder_check(&wrong, &wrong, &t), Err(Error::ExponentMismatch(_))));
        assert!(ExponentTriple::new(e("1"), e("2")).is_err());
        assert!(ExponentTriple::new(e("2.5"), e("2.5")).unwrap().r.is_infinite());
    }

    #[test]
    fn positivity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let profile = BlockProfile::new(vec![3, 2]).unwrap();
        for _ in 0..10 {
            let w = Weight::new(sample::faithful_density(&mut rng, &profile)).unwrap();
            let g = sample::gaussian(&mut rng, &profile);
            let a = &g * &g.adjoint();
            for p in ["1", "1.5", "2", "4", "inf"] {
                let x = embed(&w, &a, e(p)).unwrap();
                let min = crate::matcore::hermitian_eig(&x.x, 1e-9).unwrap().min_eigenvalue();
                assert!(min >= -1e-12, "p = {p}: min eigenvalue {min}");
            }
        }
    }
}
