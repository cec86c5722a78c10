use super::SuperOperator;
use crate::error::{Error, Result};
use crate::matcore::{BlockMatrix, BlockProfile};
use crate::vnops::Weight;

/// Multiplier recovered from a module map, with the module-identity residual
/// measured on the matrix-unit basis.
#[derive(Clone, Debug)]
pub struct Multiplier {
    pub c: BlockMatrix,
    pub residual: f64,
    pub tolerance: f64,
}

fn check_domain(t: &SuperOperator, w: &Weight) -> Result<()> {
    w.ensure_faithful()?;
    if t.domain() != w.profile() || t.codomain() != w.profile() {
        return Err(Error::ProfileMismatch { expected: w.profile().dims().to_vec(), got: t.domain().dims().to_vec() });
    }
    Ok(())
}

fn h_power(t: &SuperOperator, w: &Weight, sign: f64) -> Result<BlockMatrix> {
    if t.p().is_infinite() {
        Ok(BlockMatrix::identity(w.profile()))
    } else {
        w.power(sign * t.p().recip())
    }
}

fn verify(
    profile: &BlockProfile,
    lhs: impl Fn(&BlockMatrix) -> BlockMatrix,
    rhs: impl Fn(&BlockMatrix) -> BlockMatrix,
) -> (f64, f64, usize) {
    let mut worst = (0.0f64, 0usize);
    let mut scale: f64 = 1.0;
    for (k, a) in profile.basis().iter().enumerate() {
        let l = lhs(a);
        let r = rhs(a);
        scale = scale.max(l.max_abs()).max(r.max_abs());
        let res = l.dist(&r);
        if res > worst.0 {
            worst = (res, k);
        }
    }
    (worst.0, scale, worst.1)
}

/// For a right-module map `T(x·a) = T(x)·a` on `L^p`, returns `c` with
/// `T(x) = c·x`, namely `c = T(h^{1/p})·h^{−1/p}`.
pub fn recover_left_multiplier(t: &SuperOperator, w: &Weight) -> Result<Multiplier> {
    check_domain(t, w)?;
    let hp = h_power(t, w, 1.0)?;
    let hm = h_power(t, w, -1.0)?;
    let c = &t.apply_unchecked(&hp) * &hm;
    let (residual, scale, witness) =
        verify(w.profile(), |a| t.apply_unchecked(&(&hp * a)), |a| &(&c * &hp) * a);
    let tolerance = 1e-8 * scale;
    if residual >= tolerance {
        return Err(Error::NotModuleMap { residual, witness });
    }
    Ok(Multiplier { c, residual, tolerance })
}

/// For a left-module map `T(a·x) = a·T(x)`, returns `c` with `T(x) = x·c`,
/// namely `c = h^{−1/p}·T(h^{1/p})`.
pub fn recover_right_multiplier(t: &SuperOperator, w: &Weight) -> Result<Multiplier> {
    check_domain(t, w)?;
    let hp = h_power(t, w, 1.0)?;
    let hm = h_power(t, w, -1.0)?;
    let c = &hm * &t.apply_unchecked(&hp);
    let (residual, scale, witness) =
        verify(w.profile(), |a| t.apply_unchecked(&(a * &hp)), |a| &(a * &hp) * &c);
    let tolerance = 1e-8 * scale;
    if residual >= tolerance {
        return Err(Error::NotModuleMap { residual, witness });
    }
    Ok(Multiplier { c, residual, tolerance })
}

/// Density `b` of the functional `x ↦ tr(C(x))`, i.e. `tr(b·x) = tr(C(x))`.
pub fn trace_functional_density(c: &SuperOperator) -> Result<BlockMatrix> {
    Ok(c.trace_dual()?.apply_unchecked(&BlockMatrix::identity(c.codomain())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use crate::matcore::CMatrix;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_upper_triangular() {
        let c = BlockMatrix::single(CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]));
        let t = SuperOperator::left_multiplication(&c, Exponent::TWO, Exponent::TWO).unwrap();
        let w = Weight::from_diags(&[&[0.6, 0.4]]).unwrap();
        let m = recover_left_multiplier(&t, &w).unwrap();
        assert!(m.c.dist(&c) < 1e-14);
    }

    #[test]
    fn identity_recovers_unit() {
        let p = BlockProfile::new(vec![2, 1]).unwrap();
        let w = Weight::normalized_trace(&p);
        let t = SuperOperator::identity(&p, "3".parse().unwrap()).unwrap();
        let m = recover_left_multiplier(&t, &w).unwrap();
        assert!(m.c.dist(&BlockMatrix::identity(&p)) < 1e-14);
    }

    #[test]
    fn transpose_is_not_a_module_map() {
        let p = BlockProfile::new(vec![2]).unwrap();
        let w = Weight::normalized_trace(&p);
        let t = SuperOperator::new(p.clone(), Exponent::TWO, p.clone(), Exponent::TWO, |x| x.transpose()).unwrap();
        match recover_left_multiplier(&t, &w) {
            Err(Error::NotModuleMap { witness, residual }) => {
                // witness e₁₂
                assert_eq!(p.basis_indices().nth(witness), Some((0, 0, 1)));
                assert!(residual > 0.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dual_is_right_multiplier() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = BlockProfile::new(vec![3, 2]).unwrap();
        let w = Weight::new(sample::faithful_density(&mut rng, &p)).unwrap();
        let c = sample::gaussian(&mut rng, &p);
        let t = SuperOperator::left_multiplication(&c, "3".parse().unwrap(), "1.5".parse().unwrap()).unwrap();
        let dual = t.trace_dual().unwrap();
        assert_eq!(dual.p(), "3".parse().unwrap());
        let m = recover_right_multiplier(&dual, &w).unwrap();
        assert!(m.c.dist(&c) < 1e-8);
        assert!(recover_left_multiplier(&dual, &w).is_err());
    }
}
