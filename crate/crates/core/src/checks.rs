//! Seeded property suites behind the `check` command.
//!
//! Each suite replays the library's key invariants at fixed tolerances on
//! randomized inputs and reports per-property pass/fail with the worst
//! residual observed. All randomness flows from the one seed.

use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{
    in_cone, scalarize, scalarize_inf_oracle, GeneratorSet, ScalarizationDirection, Scalarizer,
};
use crate::error::{Error, Result};
use crate::manifold::{
    comparison_residual, dist, exp_map, geodesic, grad_sq_dist, inner, log_map, sample_point,
    sample_tangent, ManifoldId, ManifoldPoint,
};
use crate::par;
use crate::problem::{
    c_convexity_audit, eval_objective, objective_gradients, scalarized_subgradient,
    ProblemInstance, SquaredDistance, VectorObjective,
};
use crate::proxpoint::{descent_audit, fejer_audit, run, LambdaSchedule, OuterConfig};
use crate::sharpness::{
    dist_to_neg_cone, estimate_sharpness_modulus, scalar_transfer_audit, LevelSet, SharpnessQuery,
};
use crate::subsolver::InnerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Scalarization,
    Subgradient,
    Fejer,
    Sharpness,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Scalarization => "scalarization",
            Suite::Subgradient => "subgradient",
            Suite::Fejer => "fejer",
            Suite::Sharpness => "sharpness",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "scalarization" => Ok(Suite::Scalarization),
            "subgradient" => Ok(Suite::Subgradient),
            "fejer" => Ok(Suite::Fejer),
            "sharpness" => Ok(Suite::Sharpness),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidConfig(format!("unknown suite: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    /// Worst residual observed, in the units of the property.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyResult {
    fn new(name: &str, worst: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.to_string(),
            pass: worst <= tolerance,
            worst,
            tolerance,
            samples,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
    pub all_pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, properties: Vec<PropertyResult>) -> Self {
        let all_pass = properties.iter().all(|p| p.pass);
        Self {
            suite: suite.name().to_string(),
            seed,
            properties,
            all_pass,
        }
    }
}

/// Top-level report for one `check` invocation.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub schema_version: String,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub all_pass: bool,
}

/// Run the named suite (or all of them, fanned across workers when the
/// parallel feature is on).
pub fn run_check(suite: Suite, seed: u64) -> Result<CheckReport> {
    let list: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Geometry,
            Suite::Scalarization,
            Suite::Subgradient,
            Suite::Fejer,
            Suite::Sharpness,
        ],
        single => vec![single],
    };
    let reports: Vec<Result<SuiteReport>> =
        par::map_indexed(list.len(), |i| run_single(list[i], seed));
    let suites = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let all_pass = suites.iter().all(|s| s.all_pass);
    Ok(CheckReport {
        schema_version: "1".to_string(),
        seed,
        suites,
        all_pass,
    })
}

fn run_single(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let properties = match suite {
        Suite::Geometry => geometry_suite(seed)?,
        Suite::Scalarization => scalarization_suite(seed)?,
        Suite::Subgradient => subgradient_suite(seed)?,
        Suite::Fejer => fejer_suite(seed)?,
        Suite::Sharpness => sharpness_suite(seed)?,
        Suite::All => unreachable!("expanded by run_check"),
    };
    Ok(SuiteReport::new(suite, seed, properties))
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

fn geometry_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let manifolds = [
        ManifoldId::Euclidean(2),
        ManifoldId::Euclidean(3),
        ManifoldId::Hyperboloid(2),
        ManifoldId::Hyperboloid(3),
    ];
    let mut out = Vec::new();

    let per = 500;
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for &m in &manifolds {
        for _ in 0..per {
            let p = sample_point(m, &mut rng, 2.0);
            let v = sample_tangent(&p, &mut rng, 10.0);
            let q = exp_map(&p, &v)?;
            let w = log_map(&p, &q)?;
            let back = exp_map(&p, &w)?;
            worst_roundtrip = worst_roundtrip.max(dist(&back, &q)?);
            worst_norm = worst_norm.max((w.norm() - dist(&p, &q)?).abs());
            // Length of the initial velocity equals the geodesic length.
            worst_norm = worst_norm.max((dist(&p, &q)? - v.norm()).abs());
        }
    }
    out.push(PropertyResult::new(
        "exp_log_round_trip",
        worst_roundtrip,
        1e-8,
        per * manifolds.len(),
    ));
    out.push(PropertyResult::new(
        "log_norm_equals_dist",
        worst_norm,
        1e-9,
        per * manifolds.len(),
    ));

    let per = 200;
    let mut worst_grad: f64 = 0.0;
    for &m in &manifolds {
        for _ in 0..per {
            let q = sample_point(m, &mut rng, 2.0);
            let p = sample_point(m, &mut rng, 2.0);
            let g = grad_sq_dist(&q, &p)?;
            for _ in 0..4 {
                let u = sample_tangent(&p, &mut rng, 1.0);
                let u = u.scale(1.0 / u.norm().max(1e-12));
                let h = 1e-5;
                let fp = dist(&q, &exp_map(&p, &u.scale(h))?)?.powi(2);
                let fm = dist(&q, &exp_map(&p, &u.scale(-h))?)?.powi(2);
                let fd = (fp - fm) / (2.0 * h);
                let an = inner(&g, &u)?;
                worst_grad = worst_grad.max((fd - an).abs() / (1.0 + an.abs()));
            }
        }
    }
    out.push(PropertyResult::new(
        "grad_sq_dist_finite_difference",
        worst_grad,
        1e-5,
        per * manifolds.len() * 4,
    ));

    let triples = 1000;
    let mut worst_hyp: f64 = 0.0;
    for _ in 0..triples {
        let p1 = sample_point(ManifoldId::Hyperboloid(2), &mut rng, 3.0);
        let p2 = sample_point(ManifoldId::Hyperboloid(2), &mut rng, 3.0);
        let p3 = sample_point(ManifoldId::Hyperboloid(2), &mut rng, 3.0);
        let r = comparison_residual(&p1, &p2, &p3)?;
        worst_hyp = worst_hyp.max(-r);
    }
    out.push(PropertyResult::new(
        "comparison_residual_nonnegative_hyperbolic",
        worst_hyp,
        1e-9,
        triples,
    ));

    let mut worst_flat: f64 = 0.0;
    for _ in 0..triples {
        let p1 = sample_point(ManifoldId::Euclidean(3), &mut rng, 5.0);
        let p2 = sample_point(ManifoldId::Euclidean(3), &mut rng, 5.0);
        let p3 = sample_point(ManifoldId::Euclidean(3), &mut rng, 5.0);
        worst_flat = worst_flat.max(comparison_residual(&p1, &p2, &p3)?.abs());
    }
    out.push(PropertyResult::new(
        "comparison_residual_zero_flat",
        worst_flat,
        1e-9,
        triples,
    ));

    let per = 400;
    let mut worst_sc: f64 = 0.0;
    for &m in &manifolds {
        for _ in 0..per {
            let q = sample_point(m, &mut rng, 2.0);
            let a = sample_point(m, &mut rng, 2.0);
            let b = sample_point(m, &mut rng, 2.0);
            let t = rng.gen_range(0.0..1.0);
            let gt = geodesic(&a, &b, t)?;
            let lhs = dist(&q, &gt)?.powi(2);
            let rhs = (1.0 - t) * dist(&q, &a)?.powi(2) + t * dist(&q, &b)?.powi(2)
                - t * (1.0 - t) * dist(&a, &b)?.powi(2);
            worst_sc = worst_sc.max(lhs - rhs);
        }
    }
    out.push(PropertyResult::new(
        "squared_distance_strong_convexity",
        worst_sc,
        1e-8,
        per * manifolds.len(),
    ));

    Ok(out)
}

// ---------------------------------------------------------------------------
// scalarization
// ---------------------------------------------------------------------------

fn scalarization_fixtures() -> Result<Vec<(GeneratorSet, ScalarizationDirection)>> {
    let orthant2 = GeneratorSet::orthant(2)?;
    let orthant3 = GeneratorSet::orthant(3)?;
    let turned = GeneratorSet::custom(vec![vec![1.0, -1.0], vec![1.0, 1.0]])?;
    Ok(vec![
        (
            GeneratorSet::scalar(),
            ScalarizationDirection::new(vec![1.0], &GeneratorSet::scalar())?,
        ),
        (
            orthant2.clone(),
            ScalarizationDirection::unit(vec![1.0, 1.0], &orthant2)?,
        ),
        (
            orthant3.clone(),
            ScalarizationDirection::unit(vec![1.0, 2.0, 1.0], &orthant3)?,
        ),
        (
            turned.clone(),
            ScalarizationDirection::unit(vec![1.0, 0.2], &turned)?,
        ),
    ])
}

fn sample_vec<R: Rng>(rng: &mut R, m: usize, scale: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn scalarization_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixtures = scalarization_fixtures()?;
    let mut out = Vec::new();

    let total = 10_000;
    let mut worst_affine: f64 = 0.0;
    for _ in 0..total {
        let (gens, e) = &fixtures[rng.gen_range(0..fixtures.len())];
        let m = gens.m();
        let y = sample_vec(&mut rng, m, 5.0);
        let alpha: f64 = rng.gen_range(-3.0..3.0);
        let t: f64 = rng.gen_range(0.01..4.0);
        let moved: Vec<f64> = y
            .iter()
            .zip(e.e())
            .map(|(yc, ec)| t * yc + alpha * ec)
            .collect();
        let lhs = scalarize(&moved, e, gens)?;
        let rhs = t * scalarize(&y, e, gens)? + alpha;
        worst_affine = worst_affine.max((lhs - rhs).abs());
    }
    out.push(PropertyResult::new(
        "scalarize_affine_along_direction",
        worst_affine,
        1e-10,
        total,
    ));

    let mut worst_mono: f64 = 0.0;
    let mut used = 0;
    while used < total {
        let (gens, e) = &fixtures[rng.gen_range(0..fixtures.len())];
        let m = gens.m();
        let y = sample_vec(&mut rng, m, 5.0);
        let c = sample_vec(&mut rng, m, 3.0);
        if !in_cone(&c, gens, false)? {
            continue;
        }
        used += 1;
        let shifted: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a + b).collect();
        let fy = scalarize(&y, e, gens)?;
        let fyc = scalarize(&shifted, e, gens)?;
        worst_mono = worst_mono.max(fy - fyc);
    }
    out.push(PropertyResult::new(
        "scalarize_monotone_in_cone_order",
        worst_mono,
        1e-12,
        total,
    ));

    let pairs = 2_000;
    let tol = 1e-8;
    let mut worst_equiv: f64 = 0.0;
    for _ in 0..pairs {
        let (gens, e) = &fixtures[rng.gen_range(0..fixtures.len())];
        let y = sample_vec(&mut rng, gens.m(), 5.0);
        let closed = scalarize(&y, e, gens)?;
        let oracle = scalarize_inf_oracle(&y, e, gens, tol)?;
        worst_equiv = worst_equiv.max((closed - oracle).abs());
    }
    out.push(PropertyResult::new(
        "max_form_matches_inf_form",
        worst_equiv,
        2.0 * tol,
        pairs,
    ));

    let mut sublevel_failures = 0;
    let mut checked = 0;
    for _ in 0..pairs {
        let (gens, e) = &fixtures[rng.gen_range(0..fixtures.len())];
        let y = sample_vec(&mut rng, gens.m(), 2.0);
        let f = scalarize(&y, e, gens)?;
        if f.abs() <= 1e-9 {
            continue;
        }
        checked += 1;
        let neg: Vec<f64> = y.iter().map(|c| -c).collect();
        if (f < 0.0) != in_cone(&neg, gens, false)? {
            sublevel_failures += 1;
        }
    }
    out.push(
        PropertyResult::new(
            "nonpositive_value_iff_negated_membership",
            sublevel_failures as f64,
            0.0,
            checked,
        )
        .with_detail(format!("{sublevel_failures} sign mismatches")),
    );

    let mut pointed_failures = 0;
    for _ in 0..pairs {
        let (gens, _) = &fixtures[rng.gen_range(0..fixtures.len())];
        let y = sample_vec(&mut rng, gens.m(), 2.0);
        if y.iter().map(|c| c * c).sum::<f64>().sqrt() <= 1e-5 {
            continue;
        }
        let neg: Vec<f64> = y.iter().map(|c| -c).collect();
        if in_cone(&y, gens, false)? && in_cone(&neg, gens, false)? {
            pointed_failures += 1;
        }
    }
    out.push(PropertyResult::new(
        "pointedness_probe",
        pointed_failures as f64,
        0.0,
        pairs,
    ));

    Ok(out)
}

// ---------------------------------------------------------------------------
// subgradient
// ---------------------------------------------------------------------------

fn builtin_convex_objectives() -> Result<Vec<(Arc<dyn VectorObjective>, GeneratorSet)>> {
    let e2 = ManifoldId::Euclidean(2);
    let h2 = ManifoldId::Hyperboloid(2);
    let ep = |c: &[f64]| ManifoldPoint::new(e2, c.to_vec()).unwrap();
    Ok(vec![
        (
            Arc::new(SquaredDistance::new(e2, vec![ep(&[0.0, 0.0])])?),
            GeneratorSet::scalar(),
        ),
        (
            Arc::new(SquaredDistance::new(
                e2,
                vec![ep(&[0.0, 0.0]), ep(&[1.0, 0.0])],
            )?),
            GeneratorSet::orthant(2)?,
        ),
        (
            Arc::new(SquaredDistance::new(
                e2,
                vec![ep(&[0.0, 0.0]), ep(&[1.0, 0.0]), ep(&[0.0, 1.0])],
            )?),
            GeneratorSet::orthant(3)?,
        ),
        (
            Arc::new(SquaredDistance::new(
                h2,
                vec![
                    ManifoldPoint::from_spatial(h2, &[0.4, 0.1])?,
                    ManifoldPoint::from_spatial(h2, &[-0.5, 0.6])?,
                ],
            )?),
            GeneratorSet::orthant(2)?,
        ),
    ])
}

fn subgradient_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixtures = builtin_convex_objectives()?;
    let mut out = Vec::new();

    let per = 200;
    let mut worst_grad: f64 = 0.0;
    for (objective, _) in &fixtures {
        for _ in 0..per {
            let p = sample_point(objective.manifold(), &mut rng, 1.5);
            let grads = objective_gradients(objective.as_ref(), &p)?;
            let u = sample_tangent(&p, &mut rng, 1.0);
            let u = u.scale(1.0 / u.norm().max(1e-12));
            let h = 1e-5;
            let fp = eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(h))?)?;
            let fm = eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(-h))?)?;
            for (i, g) in grads.iter().enumerate() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let an = inner(g, &u)?;
                worst_grad = worst_grad.max((fd - an).abs() / (1.0 + an.abs()));
            }
        }
    }
    out.push(PropertyResult::new(
        "builtin_gradients_finite_difference",
        worst_grad,
        1e-5,
        per * fixtures.len(),
    ));

    let pairs = 1000;
    let mut worst_ineq: f64 = 0.0;
    for (objective, gens) in &fixtures {
        let e = ScalarizationDirection::unit(vec![1.0; gens.m()], gens)?;
        let kernel = Scalarizer::new(&e, gens)?;
        for _ in 0..pairs / 4 {
            let p = sample_point(objective.manifold(), &mut rng, 1.5);
            let q = sample_point(objective.manifold(), &mut rng, 1.5);
            let w = scalarized_subgradient(objective.as_ref(), &p, &e, gens)?;
            let f_p = kernel.value(&eval_objective(objective.as_ref(), &p)?);
            let f_q = kernel.value(&eval_objective(objective.as_ref(), &q)?);
            let lin = inner(&w, &log_map(&p, &q)?)?;
            worst_ineq = worst_ineq.max(f_p + lin - f_q);
        }
    }
    out.push(PropertyResult::new(
        "subgradient_inequality_convex_builtins",
        worst_ineq,
        1e-8,
        pairs,
    ));

    let per = 500;
    let mut worst_danskin: f64 = 0.0;
    let mut used = 0;
    for (objective, gens) in &fixtures {
        let e = ScalarizationDirection::unit(vec![1.0; gens.m()], gens)?;
        let kernel = Scalarizer::new(&e, gens)?;
        let mut tried = 0;
        while used < per * fixtures.len() && tried < per {
            tried += 1;
            let p = sample_point(objective.manifold(), &mut rng, 1.5);
            let vals = kernel.piece_values(&eval_objective(objective.as_ref(), &p)?);
            let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let gap = vals
                .iter()
                .filter(|v| (top - **v).abs() > 0.0)
                .fold(f64::INFINITY, |a, v| a.min(top - v));
            if gap < 1e-3 {
                continue; // near-tie: one-sided derivative, skip
            }
            used += 1;
            let w = scalarized_subgradient(objective.as_ref(), &p, &e, gens)?;
            let u = sample_tangent(&p, &mut rng, 1.0);
            let u = u.scale(1.0 / u.norm().max(1e-12));
            let h = 1e-6;
            let fp = kernel.value(&eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(h))?)?);
            let fm =
                kernel.value(&eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(-h))?)?);
            let fd = (fp - fm) / (2.0 * h);
            let an = inner(&w, &u)?;
            worst_danskin = worst_danskin.max((fd - an).abs() / (1.0 + an.abs()));
        }
    }
    out.push(PropertyResult::new(
        "directional_derivative_at_non_ties",
        worst_danskin,
        1e-5,
        used,
    ));

    let convex_report = {
        let (objective, gens) = &fixtures[1];
        c_convexity_audit(objective.as_ref(), gens, 1000, seed)?
    };
    out.push(
        PropertyResult::new(
            "convexity_audit_accepts_convex_fixture",
            (-convex_report.worst_margin).max(0.0),
            1e-8,
            convex_report.samples,
        )
        .with_detail(format!("{} violations", convex_report.violations)),
    );

    let nonconvex_report = {
        let instance = ProblemInstance::nonconvex_pair(2)?;
        c_convexity_audit(instance.objective.as_ref(), &instance.generators, 1000, seed)?
    };
    out.push(
        PropertyResult::new(
            "convexity_audit_flags_nonconvex_fixture",
            if nonconvex_report.violations > 0 { 0.0 } else { 1.0 },
            0.0,
            nonconvex_report.samples,
        )
        .with_detail(format!(
            "{} violations, worst margin {:.3e}",
            nonconvex_report.violations, nonconvex_report.worst_margin
        )),
    );

    Ok(out)
}

// ---------------------------------------------------------------------------
// fejer
// ---------------------------------------------------------------------------

fn fejer_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let e2 = ManifoldId::Euclidean(2);
    let ep = |c: &[f64]| ManifoldPoint::new(e2, c.to_vec()).unwrap();
    let inner_cfg = InnerConfig {
        max_iters: 4_000,
        ..InnerConfig::default()
    };

    // Scalar fixture with its a-priori witness (the minimizer).
    let scalar = ProblemInstance::squared_distance(e2, vec![ep(&[0.0, 0.0])])?;
    let outer = OuterConfig {
        lambda: LambdaSchedule::Constant { value: 2.0 },
        ..OuterConfig::default_for(1)
    };
    let trace = run(&scalar, &ep(&[1.0, 0.3]), &outer, &inner_cfg)?;
    let witness = scalar.witness.clone().unwrap();
    let report = fejer_audit(&scalar, &trace, &witness, 1e-10)?;
    out.push(
        PropertyResult::new(
            "scalar_distance_monotone_to_witness",
            report.max_violation,
            1e-10,
            trace.iterations(),
        )
        .with_detail(format!("dominates={}", report.witness_dominates)),
    );
    out.push(PropertyResult::new(
        "scalar_iterates_bounded_by_witness_distance",
        if report.bound_ok { 0.0 } else { 1.0 },
        0.0,
        trace.iterations(),
    ));

    // Bi-objective fixture: distance monotone toward the terminal iterate,
    // descent chain in the cone order.
    let pair = ProblemInstance::squared_distance(e2, vec![ep(&[0.0, 0.0]), ep(&[1.0, 0.0])])?;
    let outer = OuterConfig::default_for(2);
    let mut worst_violation: f64 = 0.0;
    let mut worst_descent: f64 = 0.0;
    let runs = 5;
    let mut total_iters = 0;
    for _ in 0..runs {
        let p0 = sample_point(e2, &mut rng, 2.5);
        let trace = run(&pair, &p0, &outer, &inner_cfg)?;
        total_iters += trace.iterations();
        let terminal = trace.terminal().point.clone();
        let report = fejer_audit(&pair, &trace, &terminal, 1e-10)?;
        if report.witness_dominates {
            worst_violation = worst_violation.max(report.max_violation);
        }
        let descent = descent_audit(&trace, &pair.generators)?;
        worst_descent = worst_descent.max((-descent.worst_cone_margin).max(0.0));
        worst_descent = worst_descent.max(descent.worst_lyapunov_excess.max(0.0));
    }
    out.push(PropertyResult::new(
        "biobjective_distance_monotone_to_terminal",
        worst_violation,
        1e-10,
        total_iters,
    ));
    out.push(PropertyResult::new(
        "biobjective_descent_chain",
        worst_descent,
        1e-10,
        total_iters,
    ));

    // Hyperbolic pair.
    let h2 = ManifoldId::Hyperboloid(2);
    let fermat = ProblemInstance::squared_distance(
        h2,
        vec![
            ManifoldPoint::from_spatial(h2, &[0.5, 0.0])?,
            ManifoldPoint::from_spatial(h2, &[-0.5, 0.4])?,
        ],
    )?;
    let trace = run(
        &fermat,
        &sample_point(h2, &mut rng, 1.5),
        &OuterConfig::default_for(2),
        &inner_cfg,
    )?;
    let terminal = trace.terminal().point.clone();
    let report = fejer_audit(&fermat, &trace, &terminal, 1e-10)?;
    let descent = descent_audit(&trace, &fermat.generators)?;
    out.push(PropertyResult::new(
        "hyperbolic_distance_monotone_to_terminal",
        if report.witness_dominates { report.max_violation } else { 1.0 },
        1e-10,
        trace.iterations(),
    ));
    out.push(PropertyResult::new(
        "hyperbolic_descent_chain",
        (-descent.worst_cone_margin).max(0.0).max(descent.worst_lyapunov_excess.max(0.0)),
        1e-10,
        trace.iterations(),
    ));

    // The non-convex fixture must still produce a well-formed advisory
    // report (violations are expected, not a suite failure).
    let nonconvex = ProblemInstance::nonconvex_pair(2)?;
    let trace = run(
        &nonconvex,
        &ep(&[1.0, 1.0]),
        &OuterConfig {
            max_outer: 5,
            ..OuterConfig::default_for(2)
        },
        &inner_cfg,
    )?;
    let descent = descent_audit(&trace, &nonconvex.generators)?;
    out.push(
        PropertyResult::new("nonconvex_audit_reports_cleanly", 0.0, 0.0, trace.iterations())
            .with_detail(format!(
                "cone violations: {}, lyapunov violations: {}",
                descent.cone_violations.len(),
                descent.lyapunov_violations.len()
            )),
    );

    Ok(out)
}

// ---------------------------------------------------------------------------
// sharpness
// ---------------------------------------------------------------------------

fn sharpness_suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e2 = ManifoldId::Euclidean(2);
    let ep = |c: &[f64]| ManifoldPoint::new(e2, c.to_vec()).unwrap();
    let mut out = Vec::new();

    let radial_probes = |rng: &mut ChaCha8Rng, radii: &[f64]| -> Vec<ManifoldPoint> {
        radii
            .iter()
            .map(|r| {
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                ep(&[r * angle.cos(), r * angle.sin()])
            })
            .collect()
    };

    let norm_objective: Arc<dyn VectorObjective> = Arc::new(crate::problem::FnObjective::new(
        e2,
        1,
        |p: &ManifoldPoint| vec![p.coords().iter().map(|c| c * c).sum::<f64>().sqrt()],
    ));
    let origin_level = LevelSet::Samples(vec![ep(&[0.0, 0.0])]);
    let orthant1 = GeneratorSet::orthant(1)?;

    let radii: Vec<f64> = (0..40).map(|i| 10.0_f64.powf(-3.0 + i as f64 * 0.1)).collect();
    let q = SharpnessQuery {
        objective: norm_objective.clone(),
        candidate: ep(&[0.0, 0.0]),
        level_set: origin_level.clone(),
        probes: radial_probes(&mut rng, &radii),
    };
    let est = estimate_sharpness_modulus(&q, &orthant1)?;
    out.push(PropertyResult::new(
        "norm_modulus_is_one",
        (est.modulus - 1.0).abs(),
        1e-6,
        est.probes,
    ));

    let sq_objective: Arc<dyn VectorObjective> = Arc::new(crate::problem::FnObjective::new(
        e2,
        1,
        |p: &ManifoldPoint| vec![p.coords().iter().map(|c| c * c).sum::<f64>()],
    ));
    let q = SharpnessQuery {
        objective: sq_objective,
        candidate: ep(&[0.0, 0.0]),
        level_set: origin_level.clone(),
        probes: radial_probes(&mut rng, &[1e-2, 7e-3, 4e-3, 1e-3]),
    };
    let est = estimate_sharpness_modulus(&q, &orthant1)?;
    out.push(PropertyResult::new(
        "squared_norm_modulus_vanishes",
        est.modulus,
        1e-2,
        est.probes,
    ));

    let e1 = ScalarizationDirection::new(vec![1.0], &orthant1)?;
    let q = SharpnessQuery {
        objective: norm_objective,
        candidate: ep(&[0.0, 0.0]),
        level_set: origin_level,
        probes: radial_probes(&mut rng, &[0.01, 0.1, 1.0, 4.0]),
    };
    let transfer = scalar_transfer_audit(&q, &e1, &orthant1, 1e-6)?;
    out.push(
        PropertyResult::new(
            "sharpness_transfers_to_scalarization",
            if transfer.pass && transfer.hypothesis_met { 0.0 } else { 1.0 },
            0.0,
            q.probes.len(),
        )
        .with_detail(format!(
            "tau_vector={:.6}, tau_scalar={:.6}",
            transfer.tau_vector, transfer.tau_scalar
        )),
    );

    // Projection-residual facts about the orthant distance.
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let y = sample_vec(&mut rng, 2, 2.0);
        let z = sample_vec(&mut rng, 2, 2.0);
        let dy = dist_to_neg_cone(&y, &GeneratorSet::orthant(2)?)?;
        let dz = dist_to_neg_cone(&z, &GeneratorSet::orthant(2)?)?;
        let gap: f64 = y
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst = worst.max((dy - dz).abs() - gap);
    }
    out.push(PropertyResult::new(
        "neg_cone_distance_lipschitz",
        worst,
        1e-12,
        500,
    ));

    Ok(out)
}
