//! Finite-dimensional von Neumann algebras: trace-form weights, projections,
//! supports, the modular group, centralizers and generated subalgebras.

use crate::error::{Error, Result};
use crate::matcore::{
    eig_unchecked, op_norm, BlockEigen, BlockMatrix, BlockProfile, C64, SUPPORT_REL_CUTOFF,
};

/// Relative Hermiticity / positivity tolerance applied to densities on load.
pub const DENSITY_TOL: f64 = 1e-10;
/// Projection identities `e = e* = e²` are checked to this tolerance.
pub const PROJECTION_TOL: f64 = 1e-8;
/// Gram–Schmidt rank tolerance for generated subalgebras.
pub const RANK_TOL: f64 = 1e-9;

/// A weight `φ(a) = Σ_i tr(ρ_i a_i)` given by its density `ρ ⪰ 0`.
#[derive(Clone, Debug)]
pub struct Weight {
    density: BlockMatrix,
    eig: BlockEigen,
    cutoff: f64,
    faithful: bool,
}

impl Weight {
    pub fn new(density: BlockMatrix) -> Result<Self> {
        let scale = 1.0 + density.max_abs();
        let defect = density.hermitian_defect();
        if defect > DENSITY_TOL * scale {
            return Err(Error::NotHermitian { defect, tol: DENSITY_TOL * scale });
        }
        let density = density.hermitian_part();
        let eig = eig_unchecked(&density);
        let min = eig.min_eigenvalue();
        let max = eig.max_abs_eigenvalue();
        if min < -DENSITY_TOL * scale {
            return Err(Error::NotPsd { min_eig: min });
        }
        let cutoff = SUPPORT_REL_CUTOFF * max;
        let faithful = max > 0.0 && min > cutoff;
        Ok(Self { density, eig, cutoff, faithful })
    }

    /// The trace `a ↦ Σ tr(a_i)` (identity density).
    pub fn trace(profile: &BlockProfile) -> Self {
        Self::new(BlockMatrix::identity(profile)).expect("identity is a valid density")
    }

    /// The tracial state `tr / total_dim`.
    pub fn normalized_trace(profile: &BlockProfile) -> Self {
        Self::new(BlockMatrix::identity(profile).scale_real(1.0 / profile.total_dim() as f64))
            .expect("scaled identity is a valid density")
    }

    pub fn from_diags(diags: &[&[f64]]) -> Result<Self> {
        Self::new(BlockMatrix::from_real_diags(diags)?)
    }

    pub fn density(&self) -> &BlockMatrix {
        &self.density
    }

    pub fn profile(&self) -> &BlockProfile {
        self.density.profile()
    }

    pub fn eigen(&self) -> &BlockEigen {
        &self.eig
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    pub fn ensure_faithful(&self) -> Result<()> {
        if self.faithful {
            Ok(())
        } else {
            Err(Error::NotFaithful { min_eig: self.min_eigenvalue() })
        }
    }

    /// `h^t` with the support convention `0^t = 0`; negative `t` needs a
    /// faithful weight.
    pub fn power(&self, t: f64) -> Result<BlockMatrix> {
        if t < 0.0 {
            self.ensure_faithful()?;
        }
        let cutoff = self.cutoff;
        Ok(self.eig.map_real(|x| if x > cutoff { x.powf(t) } else { 0.0 }))
    }

    /// `h^{it}` on the support (unitary when the weight is faithful).
    pub fn imaginary_power(&self, t: f64) -> BlockMatrix {
        let cutoff = self.cutoff;
        self.eig.map(|x| if x > cutoff { C64::new(0.0, t * x.ln()).exp() } else { C64::new(0.0, 0.0) })
    }

    pub fn evaluate(&self, a: &BlockMatrix) -> Result<C64> {
        evaluate(self, a)
    }

    pub fn support_projection(&self) -> Projection {
        support_projection(self)
    }

    /// Weight obtained by scaling the density.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.density.scale_real(s))
    }
}

/// Self-adjoint idempotent element.
#[derive(Clone, Debug)]
pub struct Projection(BlockMatrix);

impl Projection {
    pub fn new(e: BlockMatrix) -> Result<Self> {
        let r = projection_defect(&e);
        if r > PROJECTION_TOL {
            return Err(Error::Numerical(format!("not a projection (defect {r:.3e})")));
        }
        Ok(Self(e))
    }

    pub fn matrix(&self) -> &BlockMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> BlockMatrix {
        self.0
    }

    pub fn rank(&self) -> usize {
        self.0.trace().re.round() as usize
    }
}

/// `max(‖e − e*‖, ‖e² − e‖)` entrywise.
pub fn projection_defect(e: &BlockMatrix) -> f64 {
    e.hermitian_defect().max((&(e * e) - e).max_abs())
}

/// `φ(a) = Σ_i tr(ρ_i a_i)`.
pub fn evaluate(w: &Weight, a: &BlockMatrix) -> Result<C64> {
    a.ensure_profile(w.profile())?;
    Ok(w.density.trace_pairing(a))
}

/// Spectral projection of the density onto eigenvalues above `1e−12·‖ρ‖_∞`.
pub fn support_projection(w: &Weight) -> Projection {
    let cutoff = w.cutoff;
    Projection(w.eig.map_real(|x| if x > cutoff { 1.0 } else { 0.0 }))
}

/// Local absolute continuity `w0 ≪_loc w1`; in finite dimensions this is
/// `supp(w0) ≤ supp(w1)`, tested as `e f e = e`.
pub fn locally_absolutely_continuous(w0: &Weight, w1: &Weight) -> Result<bool> {
    w0.density.ensure_profile(w1.profile())?;
    let e = support_projection(w0).0;
    let f = support_projection(w1).0;
    Ok((&(&e * &f) * &e).dist(&e) < PROJECTION_TOL)
}

/// Modular automorphism `σ_t(a) = h^{it} a h^{−it}`.
pub fn modular_conjugate(w: &Weight, t: f64, a: &BlockMatrix) -> Result<BlockMatrix> {
    w.ensure_faithful()?;
    a.ensure_profile(w.profile())?;
    let u = w.imaginary_power(t);
    Ok(&(&u * a) * &u.adjoint())
}

/// Outcome of the two centralizer tests.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralizerTests {
    /// `‖hd − dh‖_∞`.
    pub commutator_norm: f64,
    pub commutator_threshold: f64,
    /// `max_t ‖σ_t(d) − d‖_∞`.
    pub orbit_residual: f64,
    pub orbit_threshold: f64,
    pub by_commutator: bool,
    pub by_orbit: bool,
}

impl CentralizerTests {
    pub fn agree(&self) -> bool {
        self.by_commutator == self.by_orbit
    }
}

/// Default sample times for modular-orbit tests.
pub const DEFAULT_T_SAMPLES: [f64; 4] = [0.37, 1.0, 2.71, 6.1];

/// Runs both the commutator test and the modular-orbit test for `d ∈ M^φ`.
pub fn centralizer_tests(w: &Weight, d: &BlockMatrix, t_samples: &[f64]) -> Result<CentralizerTests> {
    w.ensure_faithful()?;
    d.ensure_profile(w.profile())?;
    let h = &w.density;
    let commutator_norm = op_norm(&h.commutator(d));
    let commutator_threshold = 1e-9 * (1.0 + op_norm(d)) * op_norm(h);
    let mut orbit_residual: f64 = 0.0;
    for &t in t_samples {
        let moved = modular_conjugate(w, t, d)?;
        orbit_residual = orbit_residual.max(op_norm(&(&moved - d)));
    }
    let orbit_threshold = 1e-8;
    Ok(CentralizerTests {
        commutator_norm,
        commutator_threshold,
        orbit_residual,
        orbit_threshold,
        by_commutator: commutator_norm < commutator_threshold,
        by_orbit: orbit_residual < orbit_threshold,
    })
}

/// Membership of `d` in the centralizer of `w`, decided by `[h, d] = 0` and
/// cross-checked against the modular orbit of `d` over `t_samples`.
pub fn in_centralizer(w: &Weight, d: &BlockMatrix, t_samples: &[f64]) -> Result<bool> {
    let tests = centralizer_tests(w, d, t_samples)?;
    if !tests.agree() {
        return Err(Error::Numerical(format!(
            "commutator test ({:.3e}) and orbit test ({:.3e}) disagree",
            tests.commutator_norm, tests.orbit_residual
        )));
    }
    Ok(tests.by_commutator)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommuteReport {
    pub support_commutator: f64,
    pub density_commutator: f64,
    pub commute: bool,
}

pub fn commute_report(w: &Weight, v: &Weight) -> Result<CommuteReport> {
    v.density.ensure_profile(w.profile())?;
    let e = support_projection(w).0;
    let f = support_projection(v).0;
    let support_commutator = op_norm(&e.commutator(&f));
    let g = &e * &f;
    let hw = &(&g * &w.density) * &g;
    let hv = &(&g * &v.density) * &g;
    let density_commutator = op_norm(&hw.commutator(&hv));
    let scale = 1.0 + op_norm(&w.density) * op_norm(&v.density);
    Ok(CommuteReport {
        support_commutator,
        density_commutator,
        commute: support_commutator < 1e-9 && density_commutator < 1e-9 * scale,
    })
}

/// Whether two weights commute: their supports commute and the densities,
/// compressed to the common support, commute.
pub fn weights_commute(w: &Weight, v: &Weight) -> Result<bool> {
    Ok(commute_report(w, v)?.commute)
}

/// Hilbert–Schmidt orthonormal basis of a *-subalgebra.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    profile: BlockProfile,
    elements: Vec<BlockMatrix>,
}

impl SubalgebraBasis {
    pub fn profile(&self) -> &BlockProfile {
        &self.profile
    }

    pub fn elements(&self) -> &[BlockMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &BlockMatrix) -> BlockMatrix {
        let mut acc = BlockMatrix::zeros(&self.profile);
        for b in &self.elements {
            acc = &acc + &b.scale(b.hs_inner(x));
        }
        acc
    }

    /// Hilbert–Schmidt distance from `x` to the span.
    pub fn residual(&self, x: &BlockMatrix) -> f64 {
        (x - &self.project(x)).frobenius()
    }

    pub fn contains(&self, x: &BlockMatrix, tol: f64) -> bool {
        self.residual(x) < tol * (1.0 + x.frobenius())
    }

    /// Largest distance from the span over all products `b_i b_j` and adjoints.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.elements {
            worst = worst.max(self.residual(&a.adjoint()));
            for b in &self.elements {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        worst
    }

    /// Unit of the subalgebra: support of `Σ b b*`.
    pub fn unit(&self) -> BlockMatrix {
        let mut s = BlockMatrix::zeros(&self.profile);
        for b in &self.elements {
            s = &s + &(b * &b.adjoint());
        }
        let eig = eig_unchecked(&s);
        let cutoff = 1e-9 * eig.max_abs_eigenvalue();
        eig.map_real(|x| if x > cutoff { 1.0 } else { 0.0 })
    }
}

fn orthogonalise(basis: &[BlockMatrix], x: &BlockMatrix) -> BlockMatrix {
    let mut r = x.clone();
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for b in basis {
            r = &r - &b.scale(b.hs_inner(&r));
        }
    }
    r
}

fn try_extend(basis: &mut Vec<BlockMatrix>, x: &BlockMatrix) -> bool {
    let scale = x.frobenius();
    if scale == 0.0 {
        return false;
    }
    let r = orthogonalise(basis, x);
    let norm = r.frobenius();
    if norm > RANK_TOL * scale.max(1.0) {
        basis.push(r.scale_real(1.0 / norm));
        true
    } else {
        false
    }
}

/// Smallest *-algebra containing the generators, as an orthonormal basis.
pub fn generate_algebra(generators: &[BlockMatrix]) -> Result<SubalgebraBasis> {
    let first = generators.first().ok_or_else(|| Error::Numerical("no generators".into()))?;
    let profile = first.profile().clone();
    let mut basis: Vec<BlockMatrix> = Vec::new();
    for g in generators {
        g.ensure_profile(&profile)?;
        try_extend(&mut basis, g);
        try_extend(&mut basis, &g.adjoint());
    }
    let limit = profile.vec_dim() + 1;
    let mut processed = 0;
    let mut rounds = 0;
    // every pair (i, j) with max(i, j) >= processed is still unchecked
    while processed < basis.len() {
        rounds += 1;
        if rounds > limit {
            return Err(Error::NoConvergence { iterations: rounds });
        }
        let end = basis.len();
        for i in 0..end {
            for j in 0..end {
                if i < processed && j < processed {
                    continue;
                }
                let p = &basis[i] * &basis[j];
                try_extend(&mut basis, &p);
                if basis.len() > profile.vec_dim() {
                    return Err(Error::NoConvergence { iterations: rounds });
                }
            }
            let a = basis[i].adjoint();
            try_extend(&mut basis, &a);
        }
        processed = end;
    }
    Ok(SubalgebraBasis { profile, elements: basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::CMatrix;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: C64, b: f64, tol: f64) -> bool {
        (a - C64::new(b, 0.0)).norm() < tol
    }

    #[test]
    fn evaluate_examples() {
        let p = BlockProfile::new(vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = sample::gaussian(&mut rng, &p);
        let tr = Weight::trace(&p);
        assert!((evaluate(&tr, &a).unwrap() - a.trace()).norm() < 1e-14);

        let w = Weight::from_diags(&[&[0.7, 0.3]]).unwrap();
        let a = BlockMatrix::from_real_diags(&[&[1.0, 2.0]]).unwrap();
        assert!(close(evaluate(&w, &a).unwrap(), 1.3, 1e-14));

        let w = Weight::new(sample::faithful_density(&mut rng, &p)).unwrap();
        let x = sample::gaussian(&mut rng, &p);
        let v = evaluate(&w, &(&x.adjoint() * &x)).unwrap();
        assert!(v.re > 0.0 && v.im.abs() < 1e-14);

        let other = BlockProfile::new(vec![3]).unwrap();
        assert!(matches!(
            evaluate(&w, &BlockMatrix::zeros(&other)),
            Err(Error::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_densities() {
        assert!(matches!(Weight::from_diags(&[&[1.0, -0.5]]), Err(Error::NotPsd { .. })));
        let nh = BlockMatrix::single(CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]));
        assert!(matches!(Weight::new(nh), Err(Error::NotHermitian { .. })));
        assert!(!Weight::from_diags(&[&[1.0, 0.0]]).unwrap().is_faithful());
    }

    #[test]
    fn support_examples() {
        let w = Weight::from_diags(&[&[0.5, 0.5]]).unwrap();
        assert!(support_projection(&w).matrix().dist(&BlockMatrix::identity(w.profile())) < 1e-14);
        let w = Weight::from_diags(&[&[1.0, 0.0]]).unwrap();
        let e = support_projection(&w);
        assert!(e.matrix().dist(&BlockMatrix::from_real_diags(&[&[1.0, 0.0]]).unwrap()) < 1e-14);
        assert_eq!(e.rank(), 1);

        // conjugated diagonal case
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = BlockMatrix::single(sample::unitary(&mut rng, 3));
        let d = BlockMatrix::from_real_diags(&[&[2.0, 0.0, 3.0]]).unwrap();
        let w = Weight::new(&(&u * &d) * &u.adjoint()).unwrap();
        let expected =
            &(&u * &BlockMatrix::from_real_diags(&[&[1.0, 0.0, 1.0]]).unwrap()) * &u.adjoint();
        let e = support_projection(&w);
        assert!(e.matrix().dist(&expected) < 1e-10);
        assert!((w.density() * e.matrix()).dist(w.density()) < 1e-9);
    }

    #[test]
    fn local_absolute_continuity_examples() {
        let faithful = Weight::from_diags(&[&[0.4, 0.6]]).unwrap();
        let any = Weight::from_diags(&[&[0.0, 2.0]]).unwrap();
        assert!(locally_absolutely_continuous(&any, &faithful).unwrap());
        let a = Weight::from_diags(&[&[1.0, 0.0]]).unwrap();
        let b = Weight::from_diags(&[&[0.0, 1.0]]).unwrap();
        assert!(!locally_absolutely_continuous(&a, &b).unwrap());
        let full = Weight::from_diags(&[&[1.0, 1.0]]).unwrap();
        assert!(!locally_absolutely_continuous(&full, &a).unwrap());
        assert!(locally_absolutely_continuous(&a, &full).unwrap());
    }

    #[test]
    fn modular_examples() {
        let p = BlockProfile::new(vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = sample::gaussian(&mut rng, &p);
        let w = Weight::normalized_trace(&p);
        for t in [0.0, 0.3, -2.0] {
            assert!(modular_conjugate(&w, t, &a).unwrap().dist(&a) < 1e-13);
        }
        let w = Weight::from_diags(&[&[4.0, 1.0]]).unwrap();
        let e12 = p.unit(0, 0, 1);
        for t in [0.0, 0.5, 1.7] {
            let got = modular_conjugate(&w, t, &e12).unwrap();
            let phase = C64::new(0.0, t * 4f64.ln()).exp();
            assert!(got.dist(&e12.scale(phase)) < 1e-13);
        }
        let diag = BlockMatrix::from_real_diags(&[&[3.0, -1.0]]).unwrap();
        assert!(modular_conjugate(&w, 1.3, &diag).unwrap().dist(&diag) < 1e-13);
        let nf = Weight::from_diags(&[&[1.0, 0.0]]).unwrap();
        assert!(matches!(modular_conjugate(&nf, 1.0, &diag), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn centralizer_examples() {
        let w = Weight::from_diags(&[&[1.0, 2.0]]).unwrap();
        let d = BlockMatrix::from_real_diags(&[&[5.0, -1.0]]).unwrap();
        assert!(in_centralizer(&w, &d, &DEFAULT_T_SAMPLES).unwrap());
        let e12 = w.profile().unit(0, 0, 1);
        assert!(!in_centralizer(&w, &e12, &DEFAULT_T_SAMPLES).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = BlockProfile::new(vec![3, 2]).unwrap();
        let w = Weight::new(sample::faithful_density(&mut rng, &p)).unwrap();
        let h = w.density();
        // f(h) = 2h^2 - h + 3
        let fh = &(&(h * h).scale_real(2.0) - h) + &BlockMatrix::identity(&p).scale_real(3.0);
        assert!(in_centralizer(&w, &fh, &DEFAULT_T_SAMPLES).unwrap());
    }

    #[test]
    fn commuting_weights_examples() {
        let a = Weight::from_diags(&[&[1.0, 2.0]]).unwrap();
        let b = Weight::from_diags(&[&[0.3, 0.1]]).unwrap();
        assert!(weights_commute(&a, &b).unwrap());
        let s = Weight::new(BlockMatrix::single(CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]))).unwrap();
        let r = commute_report(&a, &s).unwrap();
        assert!(!r.commute);
        assert!((r.density_commutator - 1.0).abs() < 1e-12);
        assert!(weights_commute(&s, &s).unwrap());
    }

    #[test]
    fn generated_algebras() {
        let m2 = BlockProfile::new(vec![2]).unwrap();
        let alg = generate_algebra(&m2.basis()).unwrap();
        assert_eq!(alg.dim(), 4);

        let m4 = BlockProfile::new(vec![4]).unwrap();
        let gens: Vec<BlockMatrix> = m2
            .basis()
            .iter()
            .map(|a| {
                let mut m = CMatrix::zeros(4, 4);
                m.write_diagonal_window(0, a.block(0));
                m.write_diagonal_window(2, &a.block(0).transpose());
                BlockMatrix::single(m)
            })
            .collect();
        let alg = generate_algebra(&gens).unwrap();
        assert_eq!(alg.dim(), 8);
        let mut x = CMatrix::zeros(4, 4);
        x[(0, 1)] = C64::new(1.0, 0.0);
        assert!(alg.contains(&BlockMatrix::single(x), 1e-8));
        assert!(alg.closure_residual() < 1e-8);
        for g in &gens {
            assert!(alg.residual(g) < 1e-8);
        }

        let unit = generate_algebra(&[BlockMatrix::identity(&m4)]).unwrap();
        assert_eq!(unit.dim(), 1);
        assert!(unit.unit().dist(&BlockMatrix::identity(&m4)) < 1e-12);
    }
}
