use std::cmp::Ordering;

use serde::Serialize;

use super::{build_composition, operator_norm_with, NormEstimate, NormOptions, SuperOperator};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::jordan::{pushforward_density, JordanMorphismSpec};
use crate::matcore::{hermitian_eig, schatten_norm, BlockMatrix};
use crate::vnops::{commute_report, Weight};

/// Bounded change of weights `h^{1/2p} a h^{1/2p} ↦ k^{1/2q} a k^{1/2q}`,
/// realized as `x ↦ d x d*` with `d = k^{1/2q} h^{−1/2p}`.
#[derive(Clone, Debug)]
pub struct ChangeOfWeights {
    pub d: BlockMatrix,
    pub r: Exponent,
    /// `‖|d|²‖_r`.
    pub bound: f64,
    pub operator: SuperOperator,
}

pub fn change_of_weights(w: &Weight, w0: &Weight, p: Exponent, q: Exponent) -> Result<ChangeOfWeights> {
    p.check_norm_exponent()?;
    q.check_norm_exponent()?;
    if q.cmp_exp(p) == Ordering::Greater {
        return Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() });
    }
    w.ensure_faithful()?;
    if w.profile() != w0.profile() {
        return Err(Error::ProfileMismatch { expected: w.profile().dims().to_vec(), got: w0.profile().dims().to_vec() });
    }
    let r = Exponent::holder_complement(p, q)?;
    let k_part = if q.is_infinite() { w0.support_projection().into_matrix() } else { w0.power(q.recip() / 2.0)? };
    let h_part = if p.is_infinite() { BlockMatrix::identity(w.profile()) } else { w.power(-p.recip() / 2.0)? };
    let d = &k_part * &h_part;
    let bound = schatten_norm(&(&d.adjoint() * &d), r)?;
    let (dl, dr) = (d.clone(), d.adjoint());
    let operator = SuperOperator::new(w.profile().clone(), p, w.profile().clone(), q, move |x| &(&dl * x) * &dr)?;
    Ok(ChangeOfWeights { d, r, bound, operator })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleEntry {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub bound: f64,
    pub estimate: NormEstimate,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleReport {
    pub ratio: Exponent,
    pub entries: Vec<ScaleEntry>,
}

impl ScaleReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// `p / q` as an exponent-valued ratio (`∞/∞ = 1`).
pub fn exponent_ratio(p: Exponent, q: Exponent) -> Result<Exponent> {
    match (p.is_infinite(), q.is_infinite()) {
        (true, true) => Ok(Exponent::ONE),
        (true, false) => Ok(Exponent::Infinity),
        (false, true) => Err(Error::ExponentOrder { p: p.to_string(), q: q.to_string() }),
        (false, false) => match Exponent::exact_quotient(p, q) {
            Some(ratio) => Exponent::rational(*ratio.numer(), *ratio.denom()),
            None => Exponent::from_f64(p.value() / q.value()),
        },
    }
}

fn same_exponent(a: Exponent, b: Exponent) -> bool {
    match (a, b) {
        (Exponent::Infinity, Exponent::Infinity) => true,
        (Exponent::Infinity, _) | (_, Exponent::Infinity) => false,
        _ if a.is_exact() && b.is_exact() => a.cmp_exp(b) == Ordering::Equal,
        _ => (a.recip() - b.recip()).abs() < 1e-12,
    }
}

/// Runs [`change_of_weights`] for every pair with `p/q = ratio` and compares
/// the estimated norm with the pair's bound.
pub fn change_of_weights_scale(
    w: &Weight,
    w0: &Weight,
    ratio: Exponent,
    pairs: &[(Exponent, Exponent)],
    opts: &NormOptions,
) -> Result<ScaleReport> {
    for &(p, q) in pairs {
        let got = exponent_ratio(p, q)?;
        if !same_exponent(got, ratio) {
            return Err(Error::RatioMismatch { expected: ratio.to_string(), got: got.to_string() });
        }
    }
    let mut entries = Vec::with_capacity(pairs.len());
    for &(p, q) in pairs {
        let cw = change_of_weights(w, w0, p, q)?;
        let estimate = operator_norm_with(&cw.operator, opts);
        let pass = estimate.lower_bound <= cw.bound + 1e-6 * cw.bound.max(1.0);
        entries.push(ScaleEntry { p, q, r: cw.r, bound: cw.bound, estimate, pass });
    }
    Ok(ScaleReport { ratio, entries })
}

#[derive(Clone, Debug)]
pub struct ContractionInclusion {
    /// Smallest `C` with `φ₂∘ι ≤ C·φ_B`.
    pub domination: f64,
    pub operator: SuperOperator,
}

/// Extension of `h_B^{1/2p} a h_B^{1/2p} ↦ h₂^{1/2p} ι(a) h₂^{1/2p}` for an
/// inclusion `ι` given in tile form.
pub fn contraction_inclusion(iota: &JordanMorphismSpec, w_b: &Weight, w2: &Weight, p: Exponent) -> Result<ContractionInclusion> {
    if w_b.profile() != iota.profile1() {
        return Err(Error::ProfileMismatch { expected: iota.profile1().dims().to_vec(), got: w_b.profile().dims().to_vec() });
    }
    let k = pushforward_density(iota, w2)?;
    let support = w_b.support_projection().into_matrix();
    let outside = &BlockMatrix::identity(w_b.profile()) - &support;
    let leak = (&(&outside * k.density()) * &outside).max_abs();
    if leak > 1e-12 * (1.0 + k.density().max_abs()) {
        return Err(Error::DominationFails(format!(
            "φ₂∘ι charges the complement of supp(φ_B) (mass {leak:.3e})"
        )));
    }
    w_b.ensure_faithful()?;
    let s = w_b.power(-0.5)?;
    let rel = &(&s * k.density()) * &s;
    let domination = hermitian_eig(&rel.hermitian_part(), 1e-8)?.max_abs_eigenvalue();
    if !domination.is_finite() {
        return Err(Error::DominationFails("domination constant is not finite".into()));
    }
    let operator = build_composition(iota, w_b, w2, p, p)?;
    Ok(ContractionInclusion { domination, operator })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingReport {
    pub min_gap_eigenvalue: f64,
    pub holds: bool,
}

/// Checks `h_J^{1/q} ≤ h_z^{1/q} + h_{1−z}^{1/q}` for commuting parts.
pub fn splitting_inequality_check(h_j: &Weight, h_z: &Weight, h_1mz: &Weight, q: Exponent) -> Result<SplittingReport> {
    q.check_norm_exponent()?;
    let cr = commute_report(h_z, h_1mz)?;
    if !cr.commute {
        return Err(Error::NotCommuting { residual: cr.density_commutator });
    }
    let sum = h_z.density() + h_1mz.density();
    let residual = sum.dist(h_j.density());
    if residual > 1e-9 {
        return Err(Error::NotSummable { residual });
    }
    let t = q.recip();
    let gap = &(&h_z.power(t)? + &h_1mz.power(t)?) - &h_j.power(t)?;
    let min_gap_eigenvalue = hermitian_eig(&gap.hermitian_part(), 1e-8)?.min_eigenvalue();
    Ok(SplittingReport { min_gap_eigenvalue, holds: min_gap_eigenvalue >= -1e-9 })
}
