//! Commutative layer: finite measure spaces, point maps and composition
//! operators `f ↦ f∘T` between weighted sequence spaces.
//!
//! Functions are carried in the `L^p` picture of the diagonal algebra: the
//! element representing `f ∈ L^p(X, m)` is `x = m^{1/p} f`, so the Schatten
//! norm of `x` is the weighted `p`-norm of `f`.

use rayon::prelude::*;
use serde::Serialize;

use crate::compop::{build_composition, operator_norm_with, NormEstimate, NormOptions, SuperOperator};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::jordan::{JordanMorphismSpec, Tile, TileKind};
use crate::matcore::{BlockMatrix, BlockProfile};
use crate::vnops::Weight;

/// Largest atom count accepted by [`eps_delta_modulus`].
pub const MAX_ENUMERATION_ATOMS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    masses: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        let labels = (1..=masses.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, masses)
    }

    pub fn with_labels(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMeasure("measure space has no atoms".into()));
        }
        if labels.len() != masses.len() {
            return Err(Error::InvalidMeasure(format!("{} labels for {} atoms", labels.len(), masses.len())));
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidMeasure(format!("atom {i} has mass {}; masses must be positive", masses[i])));
        }
        Ok(Self { labels, masses })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn profile(&self) -> BlockProfile {
        BlockProfile::diagonal(self.len()).expect("non-empty")
    }

    /// The measure as a diagonal weight.
    pub fn weight(&self) -> Weight {
        Weight::new(BlockMatrix::commutative(&self.masses).expect("non-empty")).expect("positive masses")
    }
}

/// Point map `T: Y ⊆ X₂ → X₁`, stored as `T(y)` for every atom of `X₂`
/// (`None` off `Y`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    images: Vec<Option<usize>>,
    target_len: usize,
}

impl PointMap {
    pub fn new(images: Vec<Option<usize>>, target_len: usize) -> Result<Self> {
        if let Some((y, t)) = images.iter().enumerate().find_map(|(y, t)| t.filter(|&t| t >= target_len).map(|t| (y, t))) {
            return Err(Error::InvalidMeasure(format!("map sends atom {y} to {t}, but the target has {target_len} atoms")));
        }
        Ok(Self { images, target_len })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).map(Some).collect(), target_len: n }
    }

    pub fn images(&self) -> &[Option<usize>] {
        &self.images
    }

    pub fn source_len(&self) -> usize {
        self.images.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// Atoms of `Y`.
    pub fn domain(&self) -> Vec<usize> {
        self.images.iter().enumerate().filter_map(|(y, t)| t.map(|_| y)).collect()
    }

    fn check(&self, m1: &FiniteMeasureSpace, m2: &FiniteMeasureSpace) -> Result<()> {
        if self.target_len != m1.len() || self.images.len() != m2.len() {
            return Err(Error::InvalidMeasure(format!(
                "map {} -> {} atoms does not fit spaces with {} and {} atoms",
                self.images.len(),
                self.target_len,
                m2.len(),
                m1.len()
            )));
        }
        Ok(())
    }
}

/// Partition of `Y` into the atoms of `Σ_T`, the preimages `T⁻¹(a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

pub fn sigma_t(t: &PointMap) -> Partition {
    let blocks = (0..t.target_len)
        .map(|a| t.domain().into_iter().filter(|&y| t.images[y] == Some(a)).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect();
    Partition { blocks }
}

/// `m₂∘T⁻¹` on the atoms of `X₁`.
pub fn pushforward(t: &PointMap, m2: &FiniteMeasureSpace) -> Vec<f64> {
    let mut out = vec![0.0; t.target_len];
    for (y, img) in t.images.iter().enumerate() {
        if let Some(a) = img {
            out[*a] += m2.masses[y];
        }
    }
    out
}

/// Atoms of `X₁` charged by the pushforward.
pub fn support(t: &PointMap, m2: &FiniteMeasureSpace) -> Vec<usize> {
    pushforward(t, m2).iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(a, _)| a).collect()
}

/// `f_J = d(m₂∘T⁻¹)/dm₁`.
pub fn rn_derivative(t: &PointMap, m1: &FiniteMeasureSpace, m2: &FiniteMeasureSpace) -> Result<Vec<f64>> {
    t.check(m1, m2)?;
    Ok(pushforward(t, m2).iter().zip(&m1.masses).map(|(n, m)| n / m).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub r: Exponent,
    pub norm_f: f64,
    pub bound: f64,
}

fn weighted_norm(values: &[f64], masses: &[f64], r: Exponent) -> f64 {
    match r {
        Exponent::Infinity => values.iter().fold(0.0, |m, &v| m.max(v.abs())),
        _ => {
            let rv = r.value();
            values.iter().zip(masses).map(|(v, m)| m * v.abs().powf(rv)).sum::<f64>().powf(1.0 / rv)
        }
    }
}

fn root(x: f64, q: Exponent) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(q.recip())
    }
}

fn check_order(p: Exponent, q: Exponent) -> Result<()> {
    p.check_norm_exponent()?;
    q.check_norm_exponent()?;
    if q.cmp_exp(p) == std::cmp::Ordering::Greater {
        return Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() });
    }
    Ok(())
}

/// `r = p/(p−q)`, `‖f_J‖_r` and the bound `‖f_J‖_r^{1/q}` on `‖C_T‖`.
pub fn criterion(t: &PointMap, m1: &FiniteMeasureSpace, m2: &FiniteMeasureSpace, p: Exponent, q: Exponent) -> Result<Criterion> {
    check_order(p, q)?;
    let r = Exponent::ratio_complement(p, q)?;
    let f = rn_derivative(t, m1, m2)?;
    let norm_f = weighted_norm(&f, &m1.masses, r);
    Ok(Criterion { r, norm_f, bound: root(norm_f, q) })
}

fn picture_weight(mass: f64, p: Exponent) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        mass.powf(p.recip())
    }
}

/// Operator on diagonal `L^p` pictures given by `(dst, src, coefficient)`
/// triples.
fn sparse_diagonal(
    src_len: usize,
    p: Exponent,
    dst_len: usize,
    q: Exponent,
    entries: Vec<(usize, usize, f64)>,
) -> Result<SuperOperator> {
    let dom = BlockProfile::diagonal(src_len)?;
    let cod = BlockProfile::diagonal(dst_len)?;
    let cod2 = cod.clone();
    SuperOperator::new(dom, p, cod, q, move |x| {
        let mut out = BlockMatrix::zeros(&cod2);
        for &(dst, src, c) in &entries {
            out.block_mut(dst)[(0, 0)] += x.block(src)[(0, 0)] * c;
        }
        out
    })
}

#[derive(Clone, Debug)]
pub struct ClassicalOperator {
    pub operator: SuperOperator,
    pub criterion: Criterion,
    /// `‖C_T‖` attained by the extremal function of the Hölder step.
    pub exact_norm: f64,
    pub maximizer: NormEstimate,
}

/// `(C_T f)(y) = f(T(y))` on `Y`, `0` off `Y`, from `L^p(X₁, m₁)` to
/// `L^q(X₂, m₂)`.
pub fn build_classical(
    t: &PointMap,
    m1: &FiniteMeasureSpace,
    m2: &FiniteMeasureSpace,
    p: Exponent,
    q: Exponent,
) -> Result<ClassicalOperator> {
    let crit = criterion(t, m1, m2, p, q)?;
    let entries = t
        .domain()
        .into_iter()
        .map(|y| {
            let a = t.images[y].expect("in domain");
            (y, a, picture_weight(m2.masses[y], q) / picture_weight(m1.masses[a], p))
        })
        .collect();
    let operator = sparse_diagonal(m1.len(), p, m2.len(), q, entries)?;
    let exact_norm = extremal_norm(t, m1, m2, p, q)?;
    if exact_norm > crit.bound + 1e-9 {
        return Err(Error::Numerical(format!("norm {exact_norm} exceeds the criterion bound {}", crit.bound)));
    }
    let maximizer = operator_norm_with(&operator, &NormOptions { restarts: 4, max_iter: 200, seed: 0, ..NormOptions::default() });
    Ok(ClassicalOperator { operator, criterion: crit, exact_norm, maximizer })
}

/// Ratio `‖C_T f‖_q / ‖f‖_p` for the Hölder-extremal `f ∝ f_J^{1/(p−q)}`
/// (singleton indicators when `p = q`).
fn extremal_norm(t: &PointMap, m1: &FiniteMeasureSpace, m2: &FiniteMeasureSpace, p: Exponent, q: Exponent) -> Result<f64> {
    let f_j = rn_derivative(t, m1, m2)?;
    let ratio = |f: &[f64]| {
        let num: Vec<f64> = (0..m2.len()).map(|y| t.images[y].map_or(0.0, |a| f[a])).collect();
        let top = weighted_norm(&num, &m2.masses, q);
        let bottom = weighted_norm(f, &m1.masses, p);
        if bottom > 0.0 {
            top / bottom
        } else {
            0.0
        }
    };
    if p.cmp_exp(q) == std::cmp::Ordering::Equal {
        let best = (0..m1.len())
            .map(|a| {
                let mut f = vec![0.0; m1.len()];
                f[a] = 1.0;
                ratio(&f)
            })
            .fold(0.0, f64::max);
        return Ok(best);
    }
    let exponent = if p.is_infinite() { 0.0 } else { 1.0 / (p.value() - q.value()) };
    let f: Vec<f64> = f_j.iter().map(|&v| if v > 0.0 { v.powf(exponent) } else { 0.0 }).collect();
    Ok(ratio(&f))
}

#[derive(Clone, Debug)]
pub struct PipelineStep {
    pub name: &'static str,
    pub operator: SuperOperator,
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    /// Atoms of `X₁` in the support `Z` of `m₂∘T⁻¹`.
    pub support: Vec<usize>,
    pub sigma_t: Partition,
    pub steps: Vec<PipelineStep>,
}

impl Pipeline {
    pub fn composite(&self) -> Result<SuperOperator> {
        let mut acc = self.steps[0].operator.clone();
        for step in &self.steps[1..] {
            acc = step.operator.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// Factorization of `C_T` as restriction to `Z`, change of weights
/// `m₁|_Z → m₂∘T⁻¹`, the isometry `f ↦ f∘T` onto `Σ_T`-measurable functions,
/// the refinement inclusion into `L^q(Y)`, and extension by zero. Needs a
/// non-empty `Y`.
pub fn five_step_pipeline(t: &PointMap, m1: &FiniteMeasureSpace, m2: &FiniteMeasureSpace, p: Exponent, q: Exponent) -> Result<Pipeline> {
    check_order(p, q)?;
    t.check(m1, m2)?;
    let z = support(t, m2);
    if z.is_empty() {
        return Err(Error::InvalidMeasure("the point map has empty domain; C_T is the zero operator".into()));
    }
    let nu = pushforward(t, m2);
    let partition = sigma_t(t);
    let y = t.domain();

    let restrict = sparse_diagonal(m1.len(), p, z.len(), p, z.iter().enumerate().map(|(k, &a)| (k, a, 1.0)).collect())?;
    let change = sparse_diagonal(
        z.len(),
        p,
        z.len(),
        q,
        z.iter().enumerate().map(|(k, &a)| (k, k, picture_weight(nu[a], q) / picture_weight(m1.masses[a], p))).collect(),
    )?;
    // partition blocks are listed in increasing order of their image atom, as is z
    let lift = sparse_diagonal(z.len(), q, partition.blocks.len(), q, (0..z.len()).map(|k| (k, k, 1.0)).collect())?;
    let mut refine_entries = Vec::new();
    for (b, block) in partition.blocks.iter().enumerate() {
        let block_mass: f64 = block.iter().map(|&y| m2.masses[y]).sum();
        for &atom in block {
            let pos = y.iter().position(|&v| v == atom).expect("block inside Y");
            refine_entries.push((pos, b, picture_weight(m2.masses[atom], q) / picture_weight(block_mass, q)));
        }
    }
    let refine = sparse_diagonal(partition.blocks.len(), q, y.len(), q, refine_entries)?;
    let extend = sparse_diagonal(y.len(), q, m2.len(), q, y.iter().enumerate().map(|(k, &atom)| (atom, k, 1.0)).collect())?;

    Ok(Pipeline {
        support: z,
        sigma_t: partition,
        steps: vec![
            PipelineStep { name: "restrict", operator: restrict },
            PipelineStep { name: "change-of-weights", operator: change },
            PipelineStep { name: "lift", operator: lift },
            PipelineStep { name: "refine", operator: refine },
            PipelineStep { name: "extend", operator: extend },
        ],
    })
}

/// Largest deviation between two operators on the matrix-unit basis.
pub fn basis_distance(a: &SuperOperator, b: &SuperOperator) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for e in a.domain().basis() {
        worst = worst.max(a.apply(&e)?.dist(&b.apply(&e)?));
    }
    Ok(worst)
}

/// `δ* = min{φ₁(E) : φ₀(E) ≥ ε}` over subsets of atoms (`+∞` if no subset
/// reaches `ε`); every `δ < δ*` witnesses the ε-δ condition.
pub fn eps_delta_modulus(phi0: &[f64], phi1: &[f64], eps: f64) -> Result<f64> {
    if phi0.len() != phi1.len() {
        return Err(Error::InvalidMeasure(format!("{} and {} atoms", phi0.len(), phi1.len())));
    }
    let n = phi0.len();
    if n > MAX_ENUMERATION_ATOMS {
        return Err(Error::TooLarge { atoms: n, limit: MAX_ENUMERATION_ATOMS });
    }
    let subset_mass = |w: &[f64], mask: u32| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum::<f64>();
    let best = (0u32..(1u32 << n))
        .into_par_iter()
        .filter(|&mask| subset_mass(phi0, mask) >= eps)
        .map(|mask| subset_mass(phi1, mask))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalConsistency {
    pub residual: f64,
    pub pass: bool,
}

/// The point map as a tile spec between commutative algebras.
pub fn point_map_morphism(t: &PointMap) -> Result<JordanMorphismSpec> {
    let tiles = t.domain().into_iter().map(|y| Tile::new(t.images[y].expect("in domain"), y, 0, TileKind::H)).collect();
    JordanMorphismSpec::new(BlockProfile::diagonal(t.target_len)?, BlockProfile::diagonal(t.source_len())?, tiles, vec![])
}

/// Compares [`build_classical`] with the noncommutative `C_J` for the
/// diagonal encoding of the same data.
pub fn diagonal_consistency(
    t: &PointMap,
    m1: &FiniteMeasureSpace,
    m2: &FiniteMeasureSpace,
    p: Exponent,
    q: Exponent,
) -> Result<DiagonalConsistency> {
    let classical = build_classical(t, m1, m2, p, q)?;
    let nc = build_composition(&point_map_morphism(t)?, &m1.weight(), &m2.weight(), p, q)?;
    let residual = basis_distance(&classical.operator, &nc)?;
    Ok(DiagonalConsistency { residual, pass: residual < 1e-9 })
}

/// Function `f` on `X₁` in the `L^p` picture.
pub fn picture(f: &[f64], m: &FiniteMeasureSpace, p: Exponent) -> BlockMatrix {
    let values: Vec<f64> = f.iter().zip(&m.masses).map(|(v, &mass)| v * picture_weight(mass, p)).collect();
    BlockMatrix::commutative(&values).expect("non-empty")
}
