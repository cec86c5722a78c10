#![allow(dead_code)]

use nclp::jordan::{JordanMorphismSpec, Tile, TileKind};
use nclp::sample;
use nclp::vnops::Weight;
use nclp::{BlockProfile, Exponent};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn e(s: &str) -> Exponent {
    s.parse().unwrap()
}

pub fn random_profile(rng: &mut impl Rng, max_blocks: usize, max_dim: usize) -> BlockProfile {
    let blocks = rng.random_range(1..=max_blocks);
    BlockProfile::new((0..blocks).map(|_| rng.random_range(1..=max_dim)).collect()).unwrap()
}

pub fn random_weight(rng: &mut impl Rng, profile: &BlockProfile) -> Weight {
    Weight::new(sample::faithful_density(rng, profile)).unwrap()
}

fn random_kind(rng: &mut impl Rng) -> TileKind {
    if rng.random_bool(0.5) {
        TileKind::H
    } else {
        TileKind::A
    }
}

/// Random tile spec with mixed kinds, repeated copies, killed source blocks
/// and unfilled destination corners.
pub fn random_tile_spec(rng: &mut impl Rng) -> JordanMorphismSpec {
    let p1 = random_profile(rng, 3, 2);
    let mut copies: Vec<(usize, TileKind)> = Vec::new();
    for (i, _) in p1.dims().iter().enumerate() {
        for _ in 0..rng.random_range(0..=2) {
            copies.push((i, random_kind(rng)));
        }
    }
    if copies.is_empty() {
        copies.push((0, random_kind(rng)));
    }
    copies.shuffle(rng);
    let n_dst = rng.random_range(1..=2usize).min(copies.len());
    let mut fill = vec![0usize; n_dst];
    let mut tiles = Vec::new();
    for (k, (src, kind)) in copies.into_iter().enumerate() {
        let dst = if k < n_dst { k } else { rng.random_range(0..n_dst) };
        let n = p1.dim(src);
        let mut tile = Tile::new(src, dst, fill[dst], kind);
        if rng.random_bool(0.5) {
            tile = tile.with_unitary(sample::unitary(rng, n));
        }
        tiles.push(tile);
        fill[dst] += n;
    }
    let dims: Vec<usize> = fill.iter().map(|&f| f + rng.random_range(0..=1)).collect();
    let unitaries = dims.iter().map(|&m| rng.random_bool(0.7).then(|| sample::unitary(rng, m))).collect();
    JordanMorphismSpec::new(p1, BlockProfile::new(dims).unwrap(), tiles, unitaries).unwrap()
}

/// Random *-isomorphism or *-antiisomorphism (blockwise kinds may differ).
pub fn random_bijective_spec(rng: &mut impl Rng) -> JordanMorphismSpec {
    let p1 = random_profile(rng, 3, 3);
    let mut perm: Vec<usize> = (0..p1.num_blocks()).collect();
    perm.shuffle(rng);
    let mut dims2 = vec![0; p1.num_blocks()];
    for (i, &j) in perm.iter().enumerate() {
        dims2[j] = p1.dim(i);
    }
    let all_anti = rng.random_bool(0.3);
    let all_hom = !all_anti && rng.random_bool(0.4);
    let tiles = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let kind = if all_anti {
                TileKind::A
            } else if all_hom {
                TileKind::H
            } else {
                random_kind(rng)
            };
            Tile::new(i, j, 0, kind)
        })
        .collect();
    let unitaries = dims2.iter().map(|&m| Some(sample::unitary(rng, m))).collect();
    JordanMorphismSpec::new(p1, BlockProfile::new(dims2).unwrap(), tiles, unitaries).unwrap()
}
