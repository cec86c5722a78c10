use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SuperOperator;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::jordan::{verify_jordan, JordanMorphismSpec, JordanReport, LinearMap, Tile, TileKind};
use crate::matcore::{jacobi_eigh, nearest_unitary, BlockMatrix, BlockProfile, CMatrix, C64};
use crate::sample;
use crate::vnops::{projection_defect, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Random self-adjoint elements whose spectral projections are probed.
    pub random_probes: usize,
    pub seed: u64,
    pub projection_tol: f64,
    /// Diagonal 0/1 patterns are enumerated up to this total dimension.
    pub max_pattern_dim: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { random_probes: 200, seed: 0, projection_tol: 1e-7, max_pattern_dim: 12 }
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub morphism: Option<JordanMorphismSpec>,
    /// Projection (or Jordan probe) whose image fails, on rejection.
    pub witness: Option<BlockMatrix>,
    /// Worst projection defect of `J₀(e)` over the probe family.
    pub projection_residual: f64,
    pub jordan: Option<JordanReport>,
    /// Max deviation of the reconstructed tile spec from `J₀` on matrix units.
    pub reconstruction_residual: Option<f64>,
    pub probes: usize,
}

/// `J₀(a) = h₂^{−1/2q} S(h₁^{1/2p} a h₁^{1/2p}) h₂^{−1/2q}`, materialized.
struct Pulled {
    domain: BlockProfile,
    codomain: BlockProfile,
    matrix: CMatrix,
}

impl LinearMap for Pulled {
    fn domain(&self) -> &BlockProfile {
        &self.domain
    }

    fn codomain(&self) -> &BlockProfile {
        &self.codomain
    }

    fn map(&self, a: &BlockMatrix) -> BlockMatrix {
        BlockMatrix::from_vector(&self.codomain, &self.matrix.mul_vec(&a.to_vector()))
    }
}

fn pull_back(s: &SuperOperator, w1: &Weight, w2: &Weight) -> Result<Pulled> {
    let (p, q) = (s.p(), s.q());
    let left = if p.is_infinite() { None } else { Some(w1.power(p.recip() / 2.0)?) };
    let right = if q.is_infinite() { None } else { Some(w2.power(-q.recip() / 2.0)?) };
    let dom = s.domain().clone();
    let cod = s.codomain().clone();
    let mut matrix = CMatrix::zeros(cod.vec_dim(), dom.vec_dim());
    for (k, e) in dom.basis().iter().enumerate() {
        let x = match &left {
            Some(h) => &(h * e) * h,
            None => e.clone(),
        };
        let y = s.apply_unchecked(&x);
        let a = match &right {
            Some(h) => &(h * &y) * h,
            None => y,
        };
        matrix.set_column(k, &a.to_vector());
    }
    Ok(Pulled { domain: dom, codomain: cod, matrix })
}

fn probe_projections(profile: &BlockProfile, opts: &ClassifyOptions) -> Vec<BlockMatrix> {
    let mut probes = Vec::new();
    let n = profile.total_dim();
    if n <= opts.max_pattern_dim {
        let slots: Vec<(usize, usize)> =
            profile.dims().iter().enumerate().flat_map(|(b, &d)| (0..d).map(move |i| (b, i))).collect();
        for mask in 1u64..(1u64 << n) {
            let mut e = BlockMatrix::zeros(profile);
            for (bit, &(b, i)) in slots.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    e.block_mut(b)[(i, i)] = C64::new(1.0, 0.0);
                }
            }
            probes.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_probes {
        let h = sample::hermitian(&mut rng, profile);
        for (b, block) in h.blocks().iter().enumerate() {
            let (_, vecs) = jacobi_eigh(block);
            let d = block.nrows();
            let mut acc = CMatrix::zeros(d, d);
            for k in 0..d {
                let v = vecs.column(k);
                let rank_one = CMatrix::outer(&v, &v);
                acc += &rank_one;
                let mut e = BlockMatrix::zeros(profile);
                *e.block_mut(b) = rank_one;
                probes.push(e);
                if k + 1 < d && k > 0 {
                    let mut cumulative = BlockMatrix::zeros(profile);
                    *cumulative.block_mut(b) = acc.clone();
                    probes.push(cumulative);
                }
            }
        }
    }
    probes
}

/// Decides whether `S: L^p(M₁) → L^q(M₂)` preserves characteristic
/// functions, i.e. is `C_J` for a Jordan *-morphism `J`, and recovers `J` in
/// tile form when it is.
pub fn classify_characteristic_preserving(
    s: &SuperOperator,
    w1: &Weight,
    w2: &Weight,
    p: Exponent,
    q: Exponent,
) -> Result<Classification> {
    classify_with(s, w1, w2, p, q, &ClassifyOptions::default())
}

pub fn classify_with(
    s: &SuperOperator,
    w1: &Weight,
    w2: &Weight,
    p: Exponent,
    q: Exponent,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    if s.p() != p || s.q() != q {
        return Err(Error::ExponentMismatch(format!("operator acts L^{} -> L^{}, asked for ({p}, {q})", s.p(), s.q())));
    }
    w1.ensure_faithful()?;
    w2.ensure_faithful()?;
    for (w, expected) in [(w1, s.domain()), (w2, s.codomain())] {
        if w.profile() != expected {
            return Err(Error::ProfileMismatch { expected: expected.dims().to_vec(), got: w.profile().dims().to_vec() });
        }
    }
    let j0 = pull_back(s, w1, w2)?;

    let probes = probe_projections(s.domain(), opts);
    let mut worst = (0.0f64, None);
    for e in &probes {
        let img = j0.map(e);
        let defect = projection_defect(&img);
        if defect > worst.0 {
            worst = (defect, Some(e.clone()));
        }
    }
    let projection_residual = worst.0;
    if projection_residual > opts.projection_tol {
        return Ok(Classification {
            verdict: Verdict::Reject,
            morphism: None,
            witness: worst.1,
            projection_residual,
            jordan: None,
            reconstruction_residual: None,
            probes: probes.len(),
        });
    }

    let report = verify_jordan(&j0, 20, opts.seed);
    if !report.pass {
        return Ok(Classification {
            verdict: Verdict::Reject,
            morphism: None,
            witness: report.witness.clone(),
            projection_residual,
            jordan: Some(report),
            reconstruction_residual: None,
            probes: probes.len(),
        });
    }

    let spec = reconstruct(&j0)?;
    let mut residual: f64 = 0.0;
    for a in s.domain().basis() {
        residual = residual.max(crate::jordan::apply(&spec, &a)?.dist(&j0.map(&a)));
    }
    let verdict = if residual < 1e-8 { Verdict::Accept } else { Verdict::Reject };
    Ok(Classification {
        verdict,
        morphism: (verdict == Verdict::Accept).then_some(spec),
        witness: None,
        projection_residual,
        jordan: Some(report),
        reconstruction_residual: Some(residual),
        probes: probes.len(),
    })
}

/// Orthonormal basis of the range of a (numerical) projection block.
fn range_basis(block: &CMatrix) -> Vec<Vec<C64>> {
    let (vals, vecs) = jacobi_eigh(&block.hermitian_part());
    vals.iter().enumerate().filter(|(_, &v)| v > 0.5).map(|(k, _)| vecs.column(k)).collect()
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Columns `vectors` extended to an orthonormal basis by Gram–Schmidt against
/// the standard basis, then snapped to the nearest unitary.
fn complete_unitary(m: usize, vectors: &[Vec<C64>]) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = vectors.to_vec();
    for k in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); m];
        v[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut u = CMatrix::zeros(m, m);
    for (j, c) in cols.iter().enumerate() {
        u.set_column(j, c);
    }
    nearest_unitary(&u)
}

/// Tile form of a linear map already known to be a Jordan *-morphism.
fn reconstruct(j0: &Pulled) -> Result<JordanMorphismSpec> {
    let p1 = j0.domain.clone();
    let p2 = j0.codomain.clone();
    let mut columns: Vec<Vec<Vec<C64>>> = vec![Vec::new(); p2.num_blocks()];
    let mut tiles = Vec::new();
    for (i, &n) in p1.dims().iter().enumerate() {
        let image = |r: usize, c: usize| j0.map(&p1.unit(i, r, c));
        let e11 = image(0, 0);
        let hom_part = if n == 1 { e11.clone() } else { &(&e11 * &image(0, 1)) * &image(1, 0) };
        let anti_part = &e11 - &hom_part;
        for (kind, part) in [(TileKind::H, &hom_part), (TileKind::A, &anti_part)] {
            for dst in 0..p2.num_blocks() {
                for v in range_basis(part.block(dst)) {
                    let offset = columns[dst].len();
                    for k in 0..n {
                        let mover = match kind {
                            TileKind::H => image(k, 0),
                            TileKind::A => image(0, k),
                        };
                        columns[dst].push(mover.block(dst).mul_vec(&v));
                    }
                    tiles.push(Tile::new(i, dst, offset, kind));
                }
            }
        }
    }
    let unitaries = columns
        .iter()
        .enumerate()
        .map(|(dst, cols)| {
            let m = p2.dim(dst);
            if cols.len() > m {
                return Err(Error::InvalidMorphism(format!("block {dst}: {} image vectors exceed dimension {m}", cols.len())));
            }
            Ok(Some(complete_unitary(m, cols)))
        })
        .collect::<Result<Vec<_>>>()?;
    JordanMorphismSpec::new(p1, p2, tiles, unitaries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compop::build_composition;

    fn m(n: usize) -> BlockProfile {
        BlockProfile::new(vec![n]).unwrap()
    }

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn accepts_identity_and_transpose() {
        let w = Weight::from_diags(&[&[0.7, 0.3]]).unwrap();
        for (j, kind) in [(JordanMorphismSpec::identity(&m(2)), TileKind::H), (JordanMorphismSpec::transpose(&m(2)), TileKind::A)] {
            let s = build_composition(&j, &w, &w, e("2"), e("1")).unwrap();
            let c = classify_characteristic_preserving(&s, &w, &w, e("2"), e("1")).unwrap();
            assert_eq!(c.verdict, Verdict::Accept);
            let spec = c.morphism.unwrap();
            assert_eq!(spec.tiles().len(), 1);
            assert_eq!(spec.tiles()[0].kind, kind);
            assert!(c.reconstruction_residual.unwrap() < 1e-8);
        }
    }

    #[test]
    fn rejects_trace_perturbation() {
        let w = Weight::from_diags(&[&[0.7, 0.3]]).unwrap();
        let s = build_composition(&JordanMorphismSpec::identity(&m(2)), &w, &w, e("2"), e("2")).unwrap();
        let e11 = m(2).unit(0, 0, 0);
        let bump = SuperOperator::new(m(2), e("2"), m(2), e("2"), move |x| e11.scale(x.trace())).unwrap();
        let bad = s.add_scaled(C64::new(0.1, 0.0), &bump).unwrap();
        let c = classify_characteristic_preserving(&bad, &w, &w, e("2"), e("2")).unwrap();
        assert_eq!(c.verdict, Verdict::Reject);
        assert!(c.projection_residual > 1e-3);
        let witness = c.witness.unwrap();
        assert!(projection_defect(&witness) < 1e-9);
    }

    #[test]
    fn mixed_tiles_with_partial_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let p1 = BlockProfile::new(vec![2, 1, 2]).unwrap();
        let p2 = BlockProfile::new(vec![5, 2]).unwrap();
        let j = JordanMorphismSpec::new(
            p1.clone(),
            p2.clone(),
            vec![
                Tile::new(0, 0, 0, TileKind::H),
                Tile::new(0, 0, 2, TileKind::A),
                Tile::new(1, 0, 4, TileKind::H),
                Tile::new(0, 1, 0, TileKind::A).with_unitary(sample::unitary(&mut rng, 2)),
            ],
            vec![Some(sample::unitary(&mut rng, 5)), None],
        )
        .unwrap();
        let w1 = Weight::new(sample::faithful_density(&mut rng, &p1)).unwrap();
        let w2 = Weight::new(sample::faithful_density(&mut rng, &p2)).unwrap();
        let s = build_composition(&j, &w1, &w2, e("3"), e("1.5")).unwrap();
        let c = classify_characteristic_preserving(&s, &w1, &w2, e("3"), e("1.5")).unwrap();
        assert_eq!(c.verdict, Verdict::Accept);
        let spec = c.morphism.unwrap();
        for a in p1.basis() {
            let lhs = crate::jordan::apply(&spec, &a).unwrap();
            let rhs = crate::jordan::apply(&j, &a).unwrap();
            assert!(lhs.dist(&rhs) < 1e-8);
        }
        let kinds: Vec<TileKind> = spec.tiles().iter().map(|t| t.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == TileKind::A).count(), 2);
    }
}
