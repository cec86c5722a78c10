//! Normal Jordan *-morphisms between direct sums of matrix blocks, stored in
//! canonical tile form.
//!
//! A tile copies one source block (or its transpose) into a diagonal window
//! of a destination block, optionally conjugated by a unitary; each
//! destination block may then be conjugated by a block unitary. Every Jordan
//! *-morphism between finite-dimensional algebras has this form, and the tile
//! list makes the central projection `z` separating the homomorphic part from
//! the antihomomorphic part explicit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{unitarity_defect, BlockMatrix, BlockProfile, CMatrix, C64};
use crate::sample;
use crate::vnops::{generate_algebra, modular_conjugate, Projection, SubalgebraBasis, Weight};

/// Linear map between block algebras, the common interface of tile specs and
/// raw superoperators.
pub trait LinearMap {
    fn domain(&self) -> &BlockProfile;
    fn codomain(&self) -> &BlockProfile;
    /// Applies the map; `a` must already match [`LinearMap::domain`].
    fn map(&self, a: &BlockMatrix) -> BlockMatrix;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileKind {
    /// Homomorphic copy `a ↦ V a V*`.
    H,
    /// Antihomomorphic copy `a ↦ V aᵀ V*`.
    A,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tile {
    pub src_block: usize,
    pub dst_block: usize,
    pub offset: usize,
    pub kind: TileKind,
    pub conj_unitary: Option<CMatrix>,
}

impl Tile {
    pub fn new(src_block: usize, dst_block: usize, offset: usize, kind: TileKind) -> Self {
        Self { src_block, dst_block, offset, kind, conj_unitary: None }
    }

    pub fn with_unitary(mut self, u: CMatrix) -> Self {
        self.conj_unitary = Some(u);
        self
    }
}

const UNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct JordanMorphismSpec {
    profile1: BlockProfile,
    profile2: BlockProfile,
    tiles: Vec<Tile>,
    block_unitaries: Vec<Option<CMatrix>>,
}

impl JordanMorphismSpec {
    /// Validates tile placement and unitaries. `block_unitaries` is either
    /// empty or has one (optional) entry per destination block.
    pub fn new(
        profile1: BlockProfile,
        profile2: BlockProfile,
        tiles: Vec<Tile>,
        block_unitaries: Vec<Option<CMatrix>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMorphism(msg));
        for (k, t) in tiles.iter().enumerate() {
            if t.src_block >= profile1.num_blocks() {
                return bad(format!("tiles[{k}].src: block {} does not exist in {profile1}", t.src_block));
            }
            if t.dst_block >= profile2.num_blocks() {
                return bad(format!("tiles[{k}].dst: block {} does not exist in {profile2}", t.dst_block));
            }
            let n = profile1.dim(t.src_block);
            let m = profile2.dim(t.dst_block);
            if t.offset + n > m {
                return bad(format!(
                    "tiles[{k}].offset: window {}..{} exceeds destination block size {m}",
                    t.offset,
                    t.offset + n
                ));
            }
            if let Some(u) = &t.conj_unitary {
                if u.nrows() != n || u.ncols() != n {
                    return bad(format!("tiles[{k}].unitary: expected {n}x{n}, got {}x{}", u.nrows(), u.ncols()));
                }
                let d = unitarity_defect(u);
                if d > UNITARY_TOL {
                    return bad(format!("tiles[{k}].unitary: not unitary (defect {d:.3e})"));
                }
            }
        }
        for (a, ta) in tiles.iter().enumerate() {
            for (b, tb) in tiles.iter().enumerate().skip(a + 1) {
                if ta.dst_block != tb.dst_block {
                    continue;
                }
                let ra = ta.offset..ta.offset + profile1.dim(ta.src_block);
                let rb = tb.offset..tb.offset + profile1.dim(tb.src_block);
                if ra.start < rb.end && rb.start < ra.end {
                    return bad(format!("tiles[{a}] and tiles[{b}] overlap in destination block {}", ta.dst_block));
                }
            }
        }
        let block_unitaries = if block_unitaries.is_empty() {
            vec![None; profile2.num_blocks()]
        } else {
            if block_unitaries.len() != profile2.num_blocks() {
                return bad(format!(
                    "block_unitaries: expected {} entries, got {}",
                    profile2.num_blocks(),
                    block_unitaries.len()
                ));
            }
            for (j, u) in block_unitaries.iter().enumerate() {
                if let Some(u) = u {
                    let m = profile2.dim(j);
                    if u.nrows() != m || u.ncols() != m {
                        return bad(format!("block_unitaries[{j}]: expected {m}x{m}, got {}x{}", u.nrows(), u.ncols()));
                    }
                    let d = unitarity_defect(u);
                    if d > UNITARY_TOL {
                        return bad(format!("block_unitaries[{j}]: not unitary (defect {d:.3e})"));
                    }
                }
            }
            block_unitaries
        };
        Ok(Self { profile1, profile2, tiles, block_unitaries })
    }

    pub fn identity(profile: &BlockProfile) -> Self {
        let tiles = (0..profile.num_blocks()).map(|i| Tile::new(i, i, 0, TileKind::H)).collect();
        Self::new(profile.clone(), profile.clone(), tiles, vec![]).expect("identity tiles are valid")
    }

    /// `a ↦ aᵀ` blockwise.
    pub fn transpose(profile: &BlockProfile) -> Self {
        let tiles = (0..profile.num_blocks()).map(|i| Tile::new(i, i, 0, TileKind::A)).collect();
        Self::new(profile.clone(), profile.clone(), tiles, vec![]).expect("transpose tiles are valid")
    }

    pub fn profile1(&self) -> &BlockProfile {
        &self.profile1
    }

    pub fn profile2(&self) -> &BlockProfile {
        &self.profile2
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn block_unitaries(&self) -> &[Option<CMatrix>] {
        &self.block_unitaries
    }

    /// Effective kind: one-dimensional source blocks count as homomorphic.
    pub fn effective_kind(&self, tile: &Tile) -> TileKind {
        if self.profile1.dim(tile.src_block) == 1 {
            TileKind::H
        } else {
            tile.kind
        }
    }

    fn assemble(&self, a: &BlockMatrix) -> BlockMatrix {
        let mut out = BlockMatrix::zeros(&self.profile2);
        for t in &self.tiles {
            let src = a.block(t.src_block);
            let mut content = match t.kind {
                TileKind::H => src.clone(),
                TileKind::A => src.transpose(),
            };
            if let Some(v) = &t.conj_unitary {
                content = &(v * &content) * &v.adjoint();
            }
            out.block_mut(t.dst_block).write_diagonal_window(t.offset, &content);
        }
        self.conjugate_blocks(out)
    }

    fn conjugate_blocks(&self, mut m: BlockMatrix) -> BlockMatrix {
        for (j, u) in self.block_unitaries.iter().enumerate() {
            if let Some(u) = u {
                let b = &(u * m.block(j)) * &u.adjoint();
                *m.block_mut(j) = b;
            }
        }
        m
    }

    /// Image of the unit, `J(1)`.
    pub fn unit_image(&self) -> BlockMatrix {
        self.assemble(&BlockMatrix::identity(&self.profile1))
    }

    /// True when every source and destination block is covered by exactly one
    /// full-size tile, i.e. `J` is a *-isomorphism or *-antiisomorphism
    /// blockwise.
    pub fn is_bijective(&self) -> bool {
        let mut src_hits = vec![0usize; self.profile1.num_blocks()];
        let mut dst_hits = vec![0usize; self.profile2.num_blocks()];
        for t in &self.tiles {
            src_hits[t.src_block] += 1;
            dst_hits[t.dst_block] += 1;
            if self.profile1.dim(t.src_block) != self.profile2.dim(t.dst_block) {
                return false;
            }
        }
        src_hits.iter().all(|&c| c == 1) && dst_hits.iter().all(|&c| c == 1)
    }
}

impl LinearMap for JordanMorphismSpec {
    fn domain(&self) -> &BlockProfile {
        &self.profile1
    }

    fn codomain(&self) -> &BlockProfile {
        &self.profile2
    }

    fn map(&self, a: &BlockMatrix) -> BlockMatrix {
        self.assemble(a)
    }
}

/// `J(a)`.
pub fn apply(j: &JordanMorphismSpec, a: &BlockMatrix) -> Result<BlockMatrix> {
    a.ensure_profile(&j.profile1)?;
    Ok(j.assemble(a))
}

/// Result of probing a linear map for the Jordan identities.
#[derive(Clone, Debug)]
pub struct JordanReport {
    pub probes: usize,
    pub max_adjoint_residual: f64,
    pub max_square_residual: f64,
    pub max_linearity_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Probe element with the largest residual when the check fails.
    pub witness: Option<BlockMatrix>,
    pub witness_kind: Option<&'static str>,
}

impl JordanReport {
    pub fn max_residual(&self) -> f64 {
        self.max_adjoint_residual.max(self.max_square_residual).max(self.max_linearity_residual)
    }
}

/// Structured self-adjoint probes: `e_ij + e_ji` and `i(e_ij − e_ji)`.
pub(crate) fn structured_self_adjoint_probes(profile: &BlockProfile) -> Vec<BlockMatrix> {
    let mut probes = Vec::new();
    for (b, &n) in profile.dims().iter().enumerate() {
        for i in 0..n {
            for j in i..n {
                let s = &profile.unit(b, i, j) + &profile.unit(b, j, i);
                probes.push(if i == j { s.scale_real(0.5) } else { s });
                if i < j {
                    let d = &profile.unit(b, i, j) - &profile.unit(b, j, i);
                    probes.push(d.scale(C64::new(0.0, 1.0)));
                }
            }
        }
    }
    probes
}

/// Checks `J(a*) = J(a)*`, `J(a²) = J(a)²` and linearity on structured probes
/// and `samples` seeded random elements.
pub fn verify_jordan<M: LinearMap + ?Sized>(map: &M, samples: usize, seed: u64) -> JordanReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = map.domain().clone();
    let mut self_adjoint = structured_self_adjoint_probes(&dom);
    let structured = self_adjoint.len();
    for _ in 0..samples {
        self_adjoint.push(sample::hermitian(&mut rng, &dom));
    }

    let mut scale: f64 = 1.0;
    let mut adj: f64 = 0.0;
    let mut sq: f64 = 0.0;
    let mut lin: f64 = 0.0;
    let mut worst: (f64, Option<BlockMatrix>, Option<&'static str>) = (0.0, None, None);

    for a in &self_adjoint {
        let ja = map.map(a);
        scale = scale.max(a.max_abs().powi(2)).max(ja.max_abs().powi(2));
        let r_adj = ja.hermitian_defect();
        let r_sq = map.map(&(a * a)).dist(&(&ja * &ja));
        adj = adj.max(r_adj);
        sq = sq.max(r_sq);
        if r_adj > worst.0 {
            worst = (r_adj, Some(a.clone()), Some("adjoint"));
        }
        if r_sq > worst.0 {
            worst = (r_sq, Some(a.clone()), Some("square"));
        }
    }
    let generic = samples.max(4);
    for _ in 0..generic {
        let x = sample::gaussian(&mut rng, &dom);
        let y = sample::gaussian(&mut rng, &dom);
        let alpha = C64::new(0.3, -1.1);
        let beta = C64::new(-0.7, 0.4);
        let jx = map.map(&x);
        let jy = map.map(&y);
        let combo = &x.scale(alpha) + &y.scale(beta);
        let r_lin = map.map(&combo).dist(&(&jx.scale(alpha) + &jy.scale(beta)));
        let r_adj = map.map(&x.adjoint()).dist(&jx.adjoint());
        lin = lin.max(r_lin);
        adj = adj.max(r_adj);
        if r_lin > worst.0 {
            worst = (r_lin, Some(combo), Some("linearity"));
        }
        if r_adj > worst.0 {
            worst = (r_adj, Some(x.clone()), Some("adjoint"));
        }
    }
    let tolerance = 1e-9 * scale;
    let pass = adj.max(sq).max(lin) < tolerance;
    JordanReport {
        probes: structured + samples + generic,
        max_adjoint_residual: adj,
        max_square_residual: sq,
        max_linearity_residual: lin,
        scale,
        tolerance,
        pass,
        witness: if pass { None } else { worst.1 },
        witness_kind: if pass { None } else { worst.2 },
    }
}

/// Density of the functional `a ↦ f(a)` in trace form: `ρ_{rc} = f(e_{cr})`.
pub(crate) fn density_of_functional(profile: &BlockProfile, f: impl Fn(&BlockMatrix) -> C64) -> BlockMatrix {
    let mut blocks = Vec::with_capacity(profile.num_blocks());
    for (b, &n) in profile.dims().iter().enumerate() {
        blocks.push(CMatrix::from_fn(n, n, |r, c| f(&profile.unit(b, c, r))));
    }
    BlockMatrix::from_blocks(blocks).expect("square blocks")
}

/// Weight `k` on the source with `k(a) = φ₂(J(a))`.
pub fn pushforward_density(j: &JordanMorphismSpec, w2: &Weight) -> Result<Weight> {
    pushforward_of_map(j, w2)
}

pub(crate) fn pushforward_of_map<M: LinearMap + ?Sized>(j: &M, w2: &Weight) -> Result<Weight> {
    w2.ensure_faithful()?;
    if j.codomain() != w2.profile() {
        return Err(Error::ProfileMismatch { expected: j.codomain().dims().to_vec(), got: w2.profile().dims().to_vec() });
    }
    let rho = density_of_functional(j.domain(), |a| w2.density().trace_pairing(&j.map(a)));
    let k = Weight::new(rho)?;
    for a in j.domain().basis() {
        let lhs = k.density().trace_pairing(&a);
        let rhs = w2.density().trace_pairing(&j.map(&a));
        if (lhs - rhs).norm() > 1e-9 {
            return Err(Error::Numerical(format!("pushforward density mismatch {:.3e}", (lhs - rhs).norm())));
        }
    }
    Ok(k)
}

/// Split of `J` into its homomorphic part `zJ` and antihomomorphic part
/// `(J(1) − z)J`, with the induced weights on the source.
#[derive(Clone, Debug)]
pub struct ZDecomposition {
    /// Central projection of the generated algebra carrying the homomorphic part.
    pub z: Projection,
    /// Support of `φ₂∘J` (central in the source).
    pub e: Projection,
    pub e_z: Projection,
    pub e_1mz: Projection,
    pub phi_j: Weight,
    pub phi_z: Weight,
    pub phi_1mz: Weight,
    /// Generated algebra of the image.
    pub image_algebra: SubalgebraBasis,
    pub z_central_residual: f64,
}

pub fn decompose(j: &JordanMorphismSpec, w2: &Weight) -> Result<ZDecomposition> {
    w2.ensure_faithful()?;
    if j.profile2() != w2.profile() {
        return Err(Error::ProfileMismatch { expected: j.profile2().dims().to_vec(), got: w2.profile().dims().to_vec() });
    }
    let p1 = j.profile1();
    let mut covered = vec![false; p1.num_blocks()];
    let mut hom = vec![false; p1.num_blocks()];
    let mut anti = vec![false; p1.num_blocks()];
    let mut z = BlockMatrix::zeros(j.profile2());
    for t in j.tiles() {
        covered[t.src_block] = true;
        match j.effective_kind(t) {
            TileKind::H => {
                hom[t.src_block] = true;
                let n = p1.dim(t.src_block);
                let mut window = z.block(t.dst_block).clone();
                for i in 0..n {
                    window[(t.offset + i, t.offset + i)] = C64::new(1.0, 0.0);
                }
                *z.block_mut(t.dst_block) = window;
            }
            TileKind::A => anti[t.src_block] = true,
        }
    }
    let z = j.conjugate_blocks(z);

    let images: Vec<BlockMatrix> = p1.basis().iter().map(|a| j.map(a)).collect();
    let nonzero: Vec<BlockMatrix> = images.iter().filter(|x| x.max_abs() > 0.0).cloned().collect();
    let image_algebra = if nonzero.is_empty() {
        generate_algebra(&[BlockMatrix::zeros(j.profile2())])?
    } else {
        generate_algebra(&nonzero)?
    };
    let mut z_central_residual: f64 = 0.0;
    for b in image_algebra.elements() {
        z_central_residual = z_central_residual.max(z.commutator(b).max_abs());
    }
    if z_central_residual > 1e-9 {
        return Err(Error::Numerical(format!("z is not central in the image algebra ({z_central_residual:.3e})")));
    }
    if !nonzero.is_empty() && !image_algebra.contains(&z, 1e-8) {
        return Err(Error::Numerical("z does not lie in the image algebra".into()));
    }

    let j1 = j.unit_image();
    let one_minus_z = &j1 - &z;
    let rho2 = w2.density();
    let phi_j = pushforward_density(j, w2)?;
    let phi_z = Weight::new(density_of_functional(p1, |a| rho2.trace_pairing(&(&z * &j.map(a)))))?;
    let phi_1mz = Weight::new(density_of_functional(p1, |a| rho2.trace_pairing(&(&one_minus_z * &j.map(a)))))?;

    Ok(ZDecomposition {
        z: Projection::new(z)?,
        e: Projection::new(BlockMatrix::central_projection(p1, &covered))?,
        e_z: Projection::new(BlockMatrix::central_projection(p1, &hom))?,
        e_1mz: Projection::new(BlockMatrix::central_projection(p1, &anti))?,
        phi_j,
        phi_z,
        phi_1mz,
        image_algebra,
        z_central_residual,
    })
}

/// Whether `σ_t^{φ₂}(B) ⊆ B` for the sampled `t`.
pub fn is_modular_invariant(b: &SubalgebraBasis, w2: &Weight, t_samples: &[f64]) -> Result<bool> {
    w2.ensure_faithful()?;
    for x in b.elements() {
        for &t in t_samples {
            let moved = modular_conjugate(w2, t, x)?;
            if b.residual(&moved) >= 1e-8 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vnops::{evaluate, weights_commute, DEFAULT_T_SAMPLES};

    fn m(n: usize) -> BlockProfile {
        BlockProfile::new(vec![n]).unwrap()
    }

    struct DiagonalPart(BlockProfile);

    impl LinearMap for DiagonalPart {
        fn domain(&self) -> &BlockProfile {
            &self.0
        }
        fn codomain(&self) -> &BlockProfile {
            &self.0
        }
        fn map(&self, a: &BlockMatrix) -> BlockMatrix {
            a.map_blocks(|b| CMatrix::from_fn(b.nrows(), b.ncols(), |i, j| if i == j { b[(i, j)] } else { C64::new(0.0, 0.0) }))
        }
    }

    fn a_plus_at() -> JordanMorphismSpec {
        JordanMorphismSpec::new(m(2), m(4), vec![Tile::new(0, 0, 0, TileKind::H), Tile::new(0, 0, 2, TileKind::A)], vec![])
            .unwrap()
    }

    #[test]
    fn apply_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = sample::gaussian(&mut rng, &m(2));
        assert_eq!(apply(&JordanMorphismSpec::identity(&m(2)), &a).unwrap(), a);
        assert_eq!(apply(&JordanMorphismSpec::transpose(&m(2)), &a).unwrap(), a.transpose());
        let img = apply(&a_plus_at(), &a).unwrap();
        assert_eq!(img.block(0).submatrix(0, 0, 2, 2), *a.block(0));
        assert_eq!(img.block(0).submatrix(2, 2, 2, 2), a.block(0).transpose());
        assert_eq!(img.block(0)[(0, 3)], C64::new(0.0, 0.0));
        assert!(matches!(apply(&a_plus_at(), &BlockMatrix::zeros(&m(3))), Err(Error::ProfileMismatch { .. })));
    }

    #[test]
    fn validation() {
        let overflow = JordanMorphismSpec::new(m(2), m(2), vec![Tile::new(0, 0, 1, TileKind::H)], vec![]);
        match overflow {
            Err(Error::InvalidMorphism(msg)) => assert!(msg.starts_with("tiles[0].offset"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let overlap = JordanMorphismSpec::new(
            m(2),
            m(3),
            vec![Tile::new(0, 0, 0, TileKind::H), Tile::new(0, 0, 1, TileKind::A)],
            vec![],
        );
        assert!(matches!(overlap, Err(Error::InvalidMorphism(_))));
        let not_unitary = Tile::new(0, 0, 0, TileKind::H).with_unitary(CMatrix::from_real_diag(&[1.0, 2.0]));
        assert!(JordanMorphismSpec::new(m(2), m(2), vec![not_unitary], vec![]).is_err());
    }

    #[test]
    fn verify_examples() {
        let id = verify_jordan(&JordanMorphismSpec::identity(&m(3)), 10, 1);
        assert!(id.pass);
        assert_eq!(id.max_residual(), 0.0);
        assert!(verify_jordan(&JordanMorphismSpec::transpose(&m(3)), 10, 1).pass);
        assert!(verify_jordan(&a_plus_at(), 10, 1).pass);

        let bad = verify_jordan(&DiagonalPart(m(2)), 5, 1);
        assert!(!bad.pass);
        // a = e12 + e21 squares to 1 but maps to 0
        let witness_pattern = &m(2).unit(0, 0, 1) + &m(2).unit(0, 1, 0);
        let w = bad.witness.unwrap();
        assert!(w.dist(&witness_pattern) < 1e-15, "{w:?}");
        assert_eq!(bad.witness_kind, Some("square"));
        assert!((bad.max_square_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_identity() {
        let w2 = Weight::from_diags(&[&[0.6, 0.4]]).unwrap();
        let d = decompose(&JordanMorphismSpec::identity(&m(2)), &w2).unwrap();
        let one = BlockMatrix::identity(&m(2));
        assert!(d.z.matrix().dist(&one) < 1e-15);
        assert!(d.e.matrix().dist(&one) < 1e-15);
        assert!(d.e_z.matrix().dist(&one) < 1e-15);
        assert_eq!(d.e_1mz.rank(), 0);
        assert!(d.phi_j.density().dist(w2.density()) < 1e-14);
    }

    #[test]
    fn decompose_direct_sum_with_transpose() {
        let w2 = Weight::normalized_trace(&m(4));
        let d = decompose(&a_plus_at(), &w2).unwrap();
        let z = BlockMatrix::from_real_diags(&[&[1.0, 1.0, 0.0, 0.0]]).unwrap();
        assert!(d.z.matrix().dist(&z) < 1e-15);
        let quarter = BlockMatrix::identity(&m(2)).scale_real(0.25);
        assert!(d.phi_z.density().dist(&quarter) < 1e-14);
        assert!(d.phi_1mz.density().dist(&quarter) < 1e-14);
        let sum = d.phi_z.density() + d.phi_1mz.density();
        assert!(d.phi_j.density().dist(&sum) < 1e-14);
        assert_eq!(d.image_algebra.dim(), 8);
    }

    #[test]
    fn decompose_killed_block() {
        let p1 = BlockProfile::new(vec![2, 3]).unwrap();
        let j = JordanMorphismSpec::new(p1.clone(), m(2), vec![Tile::new(0, 0, 0, TileKind::H)], vec![]).unwrap();
        let w2 = Weight::from_diags(&[&[0.3, 0.7]]).unwrap();
        let d = decompose(&j, &w2).unwrap();
        assert!(d.e.matrix().dist(&BlockMatrix::central_projection(&p1, &[true, false])) < 1e-15);
        // J vanishes on (1 − e)M₁
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = sample::gaussian(&mut rng, &p1);
        let one_minus_e = &BlockMatrix::identity(&p1) - d.e.matrix();
        let killed = &(&one_minus_e * &a) * &one_minus_e;
        assert_eq!(apply(&j, &killed).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn pushforward_examples() {
        let w = Weight::from_diags(&[&[0.2, 0.8]]).unwrap();
        let k = pushforward_density(&JordanMorphismSpec::identity(&m(2)), &w).unwrap();
        assert!(k.density().dist(w.density()) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = sample::unitary(&mut rng, 3);
        let j = JordanMorphismSpec::new(m(3), m(3), vec![Tile::new(0, 0, 0, TileKind::H)], vec![Some(u.clone())]).unwrap();
        let w2 = Weight::new(sample::faithful_density(&mut rng, &m(3))).unwrap();
        let k = pushforward_density(&j, &w2).unwrap();
        let expected = &(&u.adjoint() * w2.density().block(0)) * &u;
        assert!(k.density().block(0).dist(&expected) < 1e-13);

        let k = pushforward_density(&a_plus_at(), &Weight::trace(&m(4)).scaled(0.25).unwrap()).unwrap();
        assert!(k.density().dist(&BlockMatrix::identity(&m(2)).scale_real(0.5)) < 1e-15);
        let a = sample::gaussian(&mut rng, &m(2));
        let lhs = evaluate(&k, &a).unwrap();
        let rhs = evaluate(&Weight::normalized_trace(&m(4)), &apply(&a_plus_at(), &a).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn modular_invariance_examples() {
        let full = generate_algebra(&m(2).basis()).unwrap();
        let w = Weight::from_diags(&[&[1.0, 2.0]]).unwrap();
        assert!(is_modular_invariant(&full, &w, &DEFAULT_T_SAMPLES).unwrap());
        let diag = generate_algebra(&[m(2).unit(0, 0, 0), m(2).unit(0, 1, 1)]).unwrap();
        assert!(is_modular_invariant(&diag, &w, &DEFAULT_T_SAMPLES).unwrap());
        let flip = &m(2).unit(0, 0, 1) + &m(2).unit(0, 1, 0);
        let b = generate_algebra(&[BlockMatrix::identity(&m(2)), flip]).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(!is_modular_invariant(&b, &w, &DEFAULT_T_SAMPLES).unwrap());
    }

    #[test]
    fn split_parts_commute_for_isomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = BlockProfile::new(vec![2, 3]).unwrap();
        let j = JordanMorphismSpec::new(
            p.clone(),
            p.clone(),
            vec![Tile::new(0, 0, 0, TileKind::H), Tile::new(1, 1, 0, TileKind::A)],
            vec![Some(sample::unitary(&mut rng, 2)), Some(sample::unitary(&mut rng, 3))],
        )
        .unwrap();
        assert!(j.is_bijective());
        let w2 = Weight::new(sample::faithful_density(&mut rng, &p)).unwrap();
        let d = decompose(&j, &w2).unwrap();
        assert!(weights_commute(&d.phi_z, &d.phi_1mz).unwrap());
    }
}
