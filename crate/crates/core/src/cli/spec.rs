//! Spec-file grammar (JSON). Complex numbers are `[re, im]` pairs and
//! matrices are lists of rows.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::classical::{FiniteMeasureSpace, PointMap};
use crate::exponent::Exponent;
use crate::jordan::{JordanMorphismSpec, Tile, TileKind};
use crate::matcore::{BlockMatrix, BlockProfile, CMatrix, C64};
use crate::vnops::Weight;

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

const KNOWN_SECTIONS: [&str; 8] =
    ["algebra1", "algebra2", "weight1", "weight2", "morphism", "exponents", "measure", "superoperator"];

#[derive(Debug, Default, Deserialize)]
pub struct SpecFile {
    pub algebra1: Option<Vec<usize>>,
    pub algebra2: Option<Vec<usize>>,
    pub weight1: Option<Vec<RawMatrix>>,
    pub weight2: Option<Vec<RawMatrix>>,
    pub morphism: Option<MorphismSection>,
    pub exponents: Option<ExponentSection>,
    pub measure: Option<MeasureSection>,
    pub superoperator: Option<RawMatrix>,
    #[serde(flatten)]
    pub unknown: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSection {
    pub tiles: Vec<TileSection>,
    #[serde(default)]
    pub block_unitaries: Vec<Option<RawMatrix>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSection {
    pub src: usize,
    pub dst: usize,
    #[serde(default)]
    pub offset: usize,
    pub kind: TileKind,
    pub unitary: Option<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub pairs: Option<Vec<(Exponent, Exponent)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub atoms1: Option<Vec<String>>,
    pub masses1: Vec<f64>,
    pub atoms2: Option<Vec<String>>,
    pub masses2: Vec<f64>,
    pub map: Vec<Option<usize>>,
}

/// Parses the document, reporting the failing field path with line and
/// column.
pub fn parse(text: &str) -> Result<(SpecFile, Vec<String>), String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: SpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            format!("{inner}")
        } else {
            format!("{path}: {inner}")
        }
    })?;
    let warnings = spec
        .unknown
        .keys()
        .filter(|k| !KNOWN_SECTIONS.contains(&k.as_str()))
        .map(|k| format!("unknown section `{k}` ignored"))
        .collect();
    Ok((spec, warnings))
}

pub fn matrix(raw: &RawMatrix, path: &str) -> Result<CMatrix, String> {
    let n = raw.len();
    if let Some(i) = raw.iter().position(|row| row.len() != n) {
        return Err(format!("{path}[{i}]: row has {} entries, expected {n}", raw[i].len()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(raw[i][j][0], raw[i][j][1])))
}

pub fn rect_matrix(raw: &RawMatrix, rows: usize, cols: usize, path: &str) -> Result<CMatrix, String> {
    if raw.len() != rows {
        return Err(format!("{path}: {} rows, expected {rows}", raw.len()));
    }
    if let Some(i) = raw.iter().position(|row| row.len() != cols) {
        return Err(format!("{path}[{i}]: row has {} entries, expected {cols}", raw[i].len()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| C64::new(raw[i][j][0], raw[i][j][1])))
}

impl SpecFile {
    pub fn profile(&self, which: u8) -> Result<BlockProfile, String> {
        let (name, dims) = match which {
            1 => ("algebra1", &self.algebra1),
            _ => ("algebra2", &self.algebra2),
        };
        let dims = dims.clone().ok_or_else(|| format!("{name}: section missing"))?;
        BlockProfile::new(dims).map_err(|e| format!("{name}: {e}"))
    }

    pub fn weight(&self, which: u8) -> Result<Weight, String> {
        let (name, raw) = match which {
            1 => ("weight1", &self.weight1),
            _ => ("weight2", &self.weight2),
        };
        let raw = raw.as_ref().ok_or_else(|| format!("{name}: section missing"))?;
        let profile = self.profile(which)?;
        if raw.len() != profile.num_blocks() {
            return Err(format!("{name}: {} blocks, algebra{which} has {}", raw.len(), profile.num_blocks()));
        }
        let mut blocks = Vec::with_capacity(raw.len());
        for (b, m) in raw.iter().enumerate() {
            let path = format!("{name}[{b}]");
            let m = matrix(m, &path)?;
            if m.nrows() != profile.dim(b) {
                return Err(format!("{path}: size {}, expected {}", m.nrows(), profile.dim(b)));
            }
            blocks.push(m);
        }
        let density = BlockMatrix::from_blocks(blocks).map_err(|e| format!("{name}: {e}"))?;
        Weight::new(density).map_err(|e| format!("{name}: {e}"))
    }

    pub fn morphism(&self) -> Result<JordanMorphismSpec, String> {
        let section = self.morphism.as_ref().ok_or("morphism: section missing")?;
        let p1 = self.profile(1)?;
        let p2 = self.profile(2)?;
        let mut tiles = Vec::with_capacity(section.tiles.len());
        for (k, t) in section.tiles.iter().enumerate() {
            let mut tile = Tile::new(t.src, t.dst, t.offset, t.kind);
            if let Some(u) = &t.unitary {
                tile = tile.with_unitary(matrix(u, &format!("morphism.tiles[{k}].unitary"))?);
            }
            tiles.push(tile);
        }
        let mut unitaries = Vec::with_capacity(section.block_unitaries.len());
        for (j, u) in section.block_unitaries.iter().enumerate() {
            unitaries.push(match u {
                Some(u) => Some(matrix(u, &format!("morphism.block_unitaries[{j}]"))?),
                None => None,
            });
        }
        JordanMorphismSpec::new(p1, p2, tiles, unitaries).map_err(|e| match e {
            crate::Error::InvalidMorphism(msg) => format!("morphism.{msg}"),
            other => format!("morphism: {other}"),
        })
    }

    /// Command-line flags take precedence over the `exponents` section.
    pub fn exponents(&self, p: Option<Exponent>, q: Option<Exponent>) -> Result<(Exponent, Exponent), String> {
        let section = self.exponents.as_ref();
        let p = p.or(section.and_then(|s| s.p)).ok_or("exponent p missing: pass --p or set exponents.p")?;
        let q = q.or(section.and_then(|s| s.q)).ok_or("exponent q missing: pass --q or set exponents.q")?;
        Ok((p, q))
    }

    pub fn measure(&self) -> Result<(PointMap, FiniteMeasureSpace, FiniteMeasureSpace), String> {
        let m = self.measure.as_ref().ok_or("measure: section missing")?;
        let space = |labels: &Option<Vec<String>>, masses: &Vec<f64>, name: &str| {
            match labels {
                Some(l) => FiniteMeasureSpace::with_labels(l.clone(), masses.clone()),
                None => FiniteMeasureSpace::new(masses.clone()),
            }
            .map_err(|e| format!("measure.{name}: {e}"))
        };
        let m1 = space(&m.atoms1, &m.masses1, "masses1")?;
        let m2 = space(&m.atoms2, &m.masses2, "masses2")?;
        if m.map.len() != m2.len() {
            return Err(format!("measure.map: {} entries, masses2 has {}", m.map.len(), m2.len()));
        }
        let t = PointMap::new(m.map.clone(), m1.len()).map_err(|e| format!("measure.map: {e}"))?;
        Ok((t, m1, m2))
    }
}
