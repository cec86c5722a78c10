use serde_json::{json, Value};

use super::report::{matrix, number, object};
use super::spec::{rect_matrix, SpecFile};
use super::{CommonArgs, Failure, Outcome, EXIT_PASS, EXIT_REFUSAL};
use crate::classical::{basis_distance, build_classical, criterion, diagonal_consistency, five_step_pipeline, pushforward, rn_derivative, sigma_t};
use crate::compop::{
    build_composition, change_of_weights as cw, change_of_weights_scale, classify_with, operator_norm_with, ClassifyOptions,
    NormOptions, SuperOperator, Verdict,
};
use crate::exponent::Exponent;
use crate::jordan::{verify_jordan, JordanMorphismSpec, TileKind};
use crate::matcore::BlockMatrix;
use crate::vnops::{centralizer_tests, commute_report, modular_conjugate, DEFAULT_T_SAMPLES};
use num_rational::Ratio;

type CmdResult = Result<Outcome, Failure>;

const SANDWICH_TOL: f64 = 1e-6;

fn pass_fail(ok: bool) -> (&'static str, i32) {
    if ok {
        ("PASS", EXIT_PASS)
    } else {
        ("FAIL", EXIT_REFUSAL)
    }
}

fn check_order(p: Exponent, q: Exponent) -> Result<(), Failure> {
    p.check_norm_exponent()?;
    q.check_norm_exponent()?;
    if q.cmp_exp(p) == std::cmp::Ordering::Greater {
        return Err(Failure::Refusal(format!(
            "q = {q} exceeds p = {p}; composition operators L^p -> L^q are only considered for q <= p (the regime p < q is excluded)"
        )));
    }
    Ok(())
}

fn norm_options(a: &CommonArgs) -> NormOptions {
    NormOptions { restarts: a.restarts, seed: a.seed, ..NormOptions::default() }
}

fn norm_tolerances(opts: &NormOptions) -> Vec<(&'static str, f64)> {
    vec![("gain", opts.gain_tol), ("sandwich", SANDWICH_TOL)]
}

fn morphism_value(j: &JordanMorphismSpec) -> Value {
    let tiles: Vec<Value> = j
        .tiles()
        .iter()
        .map(|t| {
            let mut v = json!({
                "src": t.src_block,
                "dst": t.dst_block,
                "offset": t.offset,
                "kind": match t.kind { TileKind::H => "H", TileKind::A => "A" },
            });
            if let Some(u) = &t.conj_unitary {
                v["unitary"] = matrix(&BlockMatrix::single(u.clone()))[0].clone();
            }
            v
        })
        .collect();
    let unitaries: Vec<Value> = j
        .block_unitaries()
        .iter()
        .map(|u| match u {
            Some(u) => matrix(&BlockMatrix::single(u.clone()))[0].clone(),
            None => Value::Null,
        })
        .collect();
    json!({ "tiles": tiles, "block_unitaries": unitaries })
}

fn is_plain_identity(j: &JordanMorphismSpec) -> bool {
    j.profile1() == j.profile2()
        && j.tiles().len() == j.profile1().num_blocks()
        && j.tiles().iter().all(|t| {
            t.src_block == t.dst_block && t.offset == 0 && t.conj_unitary.is_none() && j.effective_kind(t) == TileKind::H
        })
        && j.block_unitaries().iter().all(Option::is_none)
}

pub fn check_jordan(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let j = spec.morphism()?;
    let rep = verify_jordan(&j, a.samples, a.seed);
    let (verdict, exit_code) = pass_fail(rep.pass);
    let results = object(vec![
        ("probes", json!(rep.probes)),
        ("max_adjoint_residual", number(rep.max_adjoint_residual)),
        ("max_square_residual", number(rep.max_square_residual)),
        ("max_linearity_residual", number(rep.max_linearity_residual)),
        ("scale", number(rep.scale)),
        ("tolerance", number(rep.tolerance)),
        ("witness_kind", rep.witness_kind.map_or(Value::Null, |k| Value::String(k.into()))),
        ("witness", rep.witness.as_ref().map_or(Value::Null, matrix)),
    ]);
    Ok(Outcome { verdict, exit_code, results, tolerances: vec![("jordan_relative", 1e-9)], seed: Some(a.seed) })
}

pub fn norm(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let (p, q) = spec.exponents(a.p, a.q)?;
    check_order(p, q)?;
    let j = spec.morphism()?;
    let w1 = spec.weight(1)?;
    let w2 = spec.weight(2)?;
    let op = build_composition(&j, &w1, &w2, p, q)?;
    let opts = norm_options(a);
    let est = operator_norm_with(&op, &opts);
    let bound = if is_plain_identity(&j) { Some(cw(&w1, &w2, p, q)?) } else { None };
    let ok = bound.as_ref().is_none_or(|b| est.lower_bound <= b.bound + SANDWICH_TOL);
    let (verdict, exit_code) = pass_fail(ok);
    let results = object(vec![
        ("p", json!(p.to_string())),
        ("q", json!(q.to_string())),
        ("lower_bound", number(est.lower_bound)),
        ("certified", json!(est.certified)),
        ("iterations", json!(est.iterations)),
        ("restarts", json!(est.restarts)),
        ("r", bound.as_ref().map_or(Value::Null, |b| json!(b.r.to_string()))),
        ("upper_bound", bound.as_ref().map_or(Value::Null, |b| number(b.bound))),
    ]);
    Ok(Outcome { verdict, exit_code, results, tolerances: norm_tolerances(&opts), seed: Some(a.seed) })
}

pub fn classify(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let (p, q) = spec.exponents(a.p, a.q)?;
    let p1 = spec.profile(1)?;
    let p2 = spec.profile(2)?;
    let w1 = spec.weight(1)?;
    let w2 = spec.weight(2)?;
    let raw = spec.superoperator.as_ref().ok_or("superoperator: section missing")?;
    let m = rect_matrix(raw, p2.vec_dim(), p1.vec_dim(), "superoperator")?;
    let s = SuperOperator::from_matrix(p1, p, p2, q, m)?;
    let opts = ClassifyOptions { seed: a.seed, ..ClassifyOptions::default() };
    let c = classify_with(&s, &w1, &w2, p, q, &opts)?;
    let (verdict, exit_code) = match c.verdict {
        Verdict::Accept => ("ACCEPT", EXIT_PASS),
        Verdict::Reject => ("REJECT", EXIT_REFUSAL),
    };
    let results = object(vec![
        ("probes", json!(c.probes)),
        ("projection_residual", number(c.projection_residual)),
        ("jordan_residual", c.jordan.as_ref().map_or(Value::Null, |r| number(r.max_residual()))),
        ("reconstruction_residual", c.reconstruction_residual.map_or(Value::Null, number)),
        ("morphism", c.morphism.as_ref().map_or(Value::Null, morphism_value)),
        ("witness", c.witness.as_ref().map_or(Value::Null, matrix)),
    ]);
    Ok(Outcome {
        verdict,
        exit_code,
        results,
        tolerances: vec![("projection", opts.projection_tol), ("reconstruction", 1e-8), ("jordan_relative", 1e-9)],
        seed: Some(a.seed),
    })
}

pub fn change_of_weights(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let h = spec.weight(1)?;
    let k = spec.weight(2)?;
    let opts = norm_options(a);
    if let Some(ratio) = a.r {
        let pairs = match spec.exponents.as_ref().and_then(|e| e.pairs.clone()) {
            Some(pairs) => pairs,
            None => vec![(ratio, Exponent::ONE), (ratio.scaled(Ratio::from_integer(2)), Exponent::TWO)],
        };
        for &(p, q) in &pairs {
            check_order(p, q)?;
        }
        let rep = change_of_weights_scale(&h, &k, ratio, &pairs, &opts)?;
        let (verdict, exit_code) = pass_fail(rep.all_pass());
        let entries: Vec<Value> = rep
            .entries
            .iter()
            .map(|e| {
                json!({
                    "p": e.p.to_string(),
                    "q": e.q.to_string(),
                    "r": e.r.to_string(),
                    "bound": number(e.bound),
                    "lower_bound": number(e.estimate.lower_bound),
                    "certified": e.estimate.certified,
                    "pass": e.pass,
                })
            })
            .collect();
        let results = object(vec![("ratio", json!(ratio.to_string())), ("pairs", Value::Array(entries))]);
        return Ok(Outcome { verdict, exit_code, results, tolerances: norm_tolerances(&opts), seed: Some(a.seed) });
    }
    let (p, q) = spec.exponents(a.p, a.q)?;
    check_order(p, q)?;
    let c = cw(&h, &k, p, q)?;
    let est = operator_norm_with(&c.operator, &opts);
    let (verdict, exit_code) = pass_fail(est.lower_bound <= c.bound + SANDWICH_TOL);
    let results = object(vec![
        ("p", json!(p.to_string())),
        ("q", json!(q.to_string())),
        ("r", json!(c.r.to_string())),
        ("d", matrix(&c.d)),
        ("bound", number(c.bound)),
        ("lower_bound", number(est.lower_bound)),
        ("certified", json!(est.certified)),
    ]);
    Ok(Outcome { verdict, exit_code, results, tolerances: norm_tolerances(&opts), seed: Some(a.seed) })
}

pub fn classical(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let (p, q) = spec.exponents(a.p, a.q)?;
    check_order(p, q)?;
    let (t, m1, m2) = spec.measure()?;
    let crit = criterion(&t, &m1, &m2, p, q)?;
    let op = build_classical(&t, &m1, &m2, p, q)?;
    let pipeline_residual = if t.domain().is_empty() {
        None
    } else {
        let pl = five_step_pipeline(&t, &m1, &m2, p, q)?;
        Some(basis_distance(&pl.composite()?, &op.operator)?)
    };
    let diag = diagonal_consistency(&t, &m1, &m2, p, q)?;
    let ok = op.exact_norm <= crit.bound + 1e-9 && pipeline_residual.is_none_or(|r| r < 1e-10) && diag.pass;
    let (verdict, exit_code) = pass_fail(ok);
    let label = |i: usize| json!(m1.labels()[i]);
    let results = object(vec![
        ("r", json!(crit.r.to_string())),
        ("norm_f", number(crit.norm_f)),
        ("bound", number(crit.bound)),
        ("measured_norm", number(op.exact_norm)),
        ("maximizer_lower_bound", number(op.maximizer.lower_bound)),
        ("pipeline_residual", pipeline_residual.map_or(Value::Null, number)),
        ("diagonal_residual", number(diag.residual)),
        ("pushforward", Value::Array(pushforward(&t, &m2).into_iter().map(number).collect())),
        ("rn_derivative", Value::Array(rn_derivative(&t, &m1, &m2)?.into_iter().map(number).collect())),
        (
            "support",
            Value::Array(crate::classical::support(&t, &m2).into_iter().map(label).collect()),
        ),
        (
            "sigma_t",
            Value::Array(
                sigma_t(&t)
                    .blocks
                    .iter()
                    .map(|b| Value::Array(b.iter().map(|&y| json!(m2.labels()[y])).collect()))
                    .collect(),
            ),
        ),
    ]);
    Ok(Outcome {
        verdict,
        exit_code,
        results,
        tolerances: vec![("bound", 1e-9), ("pipeline", 1e-10), ("diagonal", 1e-9)],
        seed: None,
    })
}

pub fn modular(spec: &SpecFile, a: &CommonArgs) -> CmdResult {
    let w = spec.weight(1)?;
    let v = spec.weight(2)?;
    if w.profile() != v.profile() {
        return Err(Failure::Input(format!("algebra1 {} and algebra2 {} differ", w.profile(), v.profile())));
    }
    let ts: Vec<f64> = a.t.clone().unwrap_or_else(|| DEFAULT_T_SAMPLES.to_vec());
    let cr = commute_report(&w, &v)?;
    let ct = centralizer_tests(&w, v.density(), &ts)?;
    let mut orbit = Vec::with_capacity(ts.len());
    for &t in &ts {
        let moved = modular_conjugate(&w, t, v.density())?;
        orbit.push(json!({ "t": number(t), "residual": number(moved.dist(v.density())) }));
    }
    let (verdict, exit_code) = pass_fail(ct.agree());
    let results = object(vec![
        ("weights_commute", json!(cr.commute)),
        ("support_commutator", number(cr.support_commutator)),
        ("density_commutator", number(cr.density_commutator)),
        ("commutator_norm", number(ct.commutator_norm)),
        ("orbit_residual", number(ct.orbit_residual)),
        ("in_centralizer_by_commutator", json!(ct.by_commutator)),
        ("in_centralizer_by_orbit", json!(ct.by_orbit)),
        ("orbit", Value::Array(orbit)),
    ]);
    Ok(Outcome {
        verdict,
        exit_code,
        results,
        tolerances: vec![
            ("commute", 1e-9),
            ("commutator_threshold", ct.commutator_threshold),
            ("orbit_threshold", ct.orbit_threshold),
        ],
        seed: None,
    })
}
