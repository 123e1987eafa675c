//! Outer proximal point loop: schedules the proximal parameters and
//! scalarization directions, drives the inner solver, records the trace,
//! and provides the convergence audits (distance monotonicity toward a
//! dominating witness, cone descent, scalarized Lyapunov decrease).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cone::{GeneratorSet, ScalarizationDirection, Scalarizer};
use crate::error::{Error, Result};
use crate::manifold::{dist, ManifoldPoint};
use crate::problem::{dominates, eval_objective, ProblemInstance};
use crate::subsolver::{solve_subproblem, InnerConfig, SubStatus, SubproblemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSchedule {
    Constant { value: f64 },
    /// Explicit prefix; the last value repeats once exhausted.
    Sequence { values: Vec<f64> },
}

impl LambdaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            LambdaSchedule::Constant { value } => *value,
            LambdaSchedule::Sequence { values } => values[k.min(values.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionSchedule {
    Fixed { e: Vec<f64> },
    Cyclic { directions: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterConfig {
    pub lambda: LambdaSchedule,
    /// Upper bound enforced on every scheduled proximal parameter.
    pub lambda_max: f64,
    /// Scalarization directions; normalized to unit norm at validation.
    pub direction: DirectionSchedule,
    /// Stop once the geodesic step falls to this threshold.
    pub tol_step: f64,
    pub max_outer: usize,
    /// Master seed for anything randomized built on top of a run (sweeps,
    /// check suites); the run itself is deterministic.
    pub seed: u64,
}

impl OuterConfig {
    /// Defaults for an `m`-objective problem: constant parameter 1, fixed
    /// direction `(1,..,1)/sqrt(m)`.
    pub fn default_for(m: usize) -> Self {
        Self {
            lambda: LambdaSchedule::Constant { value: 1.0 },
            lambda_max: 1e6,
            direction: DirectionSchedule::Fixed { e: vec![1.0; m] },
            tol_step: 1e-7,
            max_outer: 500,
            seed: 0,
        }
    }

    pub fn validate(&self, gens: &GeneratorSet) -> Result<Schedules> {
        let check_lambda = |v: f64| -> Result<()> {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "proximal parameter must be positive, got {v}"
                )));
            }
            if v > self.lambda_max {
                return Err(Error::InvalidConfig(format!(
                    "proximal parameter {v} exceeds the bound {}",
                    self.lambda_max
                )));
            }
            Ok(())
        };
        match &self.lambda {
            LambdaSchedule::Constant { value } => check_lambda(*value)?,
            LambdaSchedule::Sequence { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidConfig("empty parameter sequence".into()));
                }
                for &v in values {
                    check_lambda(v)?;
                }
            }
        }
        let raw: Vec<Vec<f64>> = match &self.direction {
            DirectionSchedule::Fixed { e } => vec![e.clone()],
            DirectionSchedule::Cyclic { directions } => {
                if directions.is_empty() {
                    return Err(Error::InvalidConfig("empty direction list".into()));
                }
                directions.clone()
            }
        };
        let directions = raw
            .into_iter()
            .map(|e| ScalarizationDirection::unit(e, gens))
            .collect::<Result<Vec<_>>>()?;
        if self.tol_step.is_nan() || self.tol_step <= 0.0 {
            return Err(Error::InvalidConfig("tol_step must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
        }
        Ok(Schedules {
            lambda: self.lambda.clone(),
            directions,
        })
    }
}

/// Validated schedules: every direction is unit-norm and interior to the
/// dual description of the cone.
#[derive(Debug)]
pub struct Schedules {
    lambda: LambdaSchedule,
    directions: Vec<ScalarizationDirection>,
}

impl Schedules {
    pub fn lambda_at(&self, k: usize) -> f64 {
        self.lambda.at(k)
    }

    pub fn direction_at(&self, k: usize) -> &ScalarizationDirection {
        &self.directions[k % self.directions.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    StepConverged,
    MaxOuter,
    InnerFailure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::StepConverged => "step_converged",
            RunStatus::MaxOuter => "max_outer",
            RunStatus::InnerFailure => "inner_failure",
        }
    }
}

/// One row of the outer trace. Record `k` holds the iterate `p^k`; the
/// stored parameter/direction pair is the one used by step `k` out of it.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub k: usize,
    pub point: ManifoldPoint,
    pub objective: Vec<f64>,
    /// Scalarized objective at this iterate under this record's direction.
    pub scalarized: f64,
    /// Geodesic step from the previous iterate (0 for the start record).
    pub step: f64,
    /// Constraint residual reported by the solve that produced this iterate.
    pub feas_residual: f64,
    pub inner_iters: usize,
    pub inner_status: Option<SubStatus>,
    pub wall_ms: f64,
    pub lambda: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn terminal(&self) -> &TraceRecord {
        self.records.last().expect("trace holds the start record")
    }
}

/// Run the outer loop from `p0`.
pub fn run(
    instance: &ProblemInstance,
    p0: &ManifoldPoint,
    outer: &OuterConfig,
    inner: &InnerConfig,
) -> Result<SolveTrace> {
    let sched = outer.validate(&instance.generators)?;
    p0.validate()?;
    if p0.manifold() != instance.objective.manifold() {
        return Err(Error::ManifoldMismatch {
            expected: instance.objective.manifold(),
            found: p0.manifold(),
        });
    }
    if let Some(w) = &instance.witness {
        if !dominates(instance, w, p0, 1e-9)? {
            return Err(Error::InvalidConfig(
                "declared witness does not dominate the start point".into(),
            ));
        }
    }

    let objective = instance.objective.as_ref();
    let f0 = eval_objective(objective, p0)?;
    let scal0 = Scalarizer::new(sched.direction_at(0), &instance.generators)?.value(&f0);
    let mut records = vec![TraceRecord {
        k: 0,
        point: p0.clone(),
        objective: f0,
        scalarized: scal0,
        step: 0.0,
        feas_residual: 0.0,
        inner_iters: 0,
        inner_status: None,
        wall_ms: 0.0,
        lambda: sched.lambda_at(0),
        direction: sched.direction_at(0).e().to_vec(),
    }];

    let mut current = p0.clone();
    let mut status = RunStatus::MaxOuter;
    for k in 0..outer.max_outer {
        let lambda = sched.lambda_at(k);
        let direction = sched.direction_at(k);
        let started = Instant::now();
        let spec = SubproblemSpec {
            objective,
            anchor: &current,
            lambda,
            direction,
            generators: &instance.generators,
            inner,
        };
        let res = solve_subproblem(&spec)?;
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        if res.status == SubStatus::Failed {
            status = RunStatus::InnerFailure;
            break;
        }
        let step = dist(&res.point, &current)?;
        current = res.point;
        let f_cur = eval_objective(objective, &current)?;
        let next_dir = sched.direction_at(k + 1);
        let scalarized = Scalarizer::new(next_dir, &instance.generators)?.value(&f_cur);
        records.push(TraceRecord {
            k: k + 1,
            point: current.clone(),
            objective: f_cur,
            scalarized,
            step,
            feas_residual: res.feasibility_residual,
            inner_iters: res.inner_iterations,
            inner_status: Some(res.status),
            wall_ms,
            lambda: sched.lambda_at(k + 1),
            direction: next_dir.e().to_vec(),
        });
        if step <= outer.tol_step {
            status = RunStatus::StepConverged;
            break;
        }
    }

    Ok(SolveTrace { records, status })
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FejerReport {
    /// Whether the witness was verified to dominate every iterate (in that
    /// case a monotonicity violation is a hard failure, otherwise the audit
    /// is advisory).
    pub witness_dominates: bool,
    pub violations: Vec<(usize, f64)>,
    pub max_violation: f64,
    /// Boundedness consequence: every iterate stays within
    /// `2 dist(p0, w)` of the start, within slack.
    pub bound_ok: bool,
    pub hard_failure: bool,
    pub slack: f64,
}

impl FejerReport {
    pub fn passed(&self) -> bool {
        !self.hard_failure
    }

    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that the distances from a witness to the iterates are nonincreasing
/// within `slack`. A witness that dominates every iterate makes this a hard
/// property of the method; any other witness makes the report advisory.
pub fn fejer_audit(
    instance: &ProblemInstance,
    trace: &SolveTrace,
    w: &ManifoldPoint,
    slack: f64,
) -> Result<FejerReport> {
    let f_w = eval_objective(instance.objective.as_ref(), w)?;
    let mut witness_dominates = true;
    for rec in &trace.records {
        let diff: Vec<f64> = rec.objective.iter().zip(&f_w).map(|(a, b)| a - b).collect();
        if instance.generators.min_inner(&diff)?.0 < -1e-10 {
            witness_dominates = false;
            break;
        }
    }

    let mut violations = Vec::new();
    let mut max_violation: f64 = 0.0;
    let mut prev = dist(w, &trace.records[0].point)?;
    for rec in &trace.records[1..] {
        let cur = dist(w, &rec.point)?;
        let excess = cur - prev - slack;
        if excess > 0.0 {
            violations.push((rec.k, excess));
            max_violation = max_violation.max(excess);
        }
        prev = cur;
    }

    let d0w = dist(&trace.records[0].point, w)?;
    let bound_ok = trace.records.iter().try_fold(true, |ok, rec| {
        dist(&trace.records[0].point, &rec.point).map(|d| ok && d <= 2.0 * d0w + slack)
    })?;

    let hard_failure = witness_dominates && !violations.is_empty();
    Ok(FejerReport {
        witness_dominates,
        violations,
        max_violation,
        bound_ok,
        hard_failure,
        slack,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    /// Steps whose objective change left the cone (margin below `-slack`).
    pub cone_violations: Vec<(usize, f64)>,
    /// Steps violating the scalarized Lyapunov decrease.
    pub lyapunov_violations: Vec<(usize, f64)>,
    /// Most negative cone margin across all steps.
    pub worst_cone_margin: f64,
    /// Largest Lyapunov excess across all steps (negative when satisfied).
    pub worst_lyapunov_excess: f64,
    pub slack: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.cone_violations.is_empty() && self.lyapunov_violations.is_empty()
    }
}

/// Check the per-step descent certificates: `F(p^{k+1})` dominated by
/// `F(p^k)` in the cone order, and the scalarized Lyapunov inequality
/// `f_k(F(p^{k+1})) + (lambda_k/2) d^2(p^{k+1}, p^k) <= f_k(F(p^k))`.
pub fn descent_audit(trace: &SolveTrace, gens: &GeneratorSet) -> Result<DescentReport> {
    let slack = 1e-10;
    let mut cone_violations = Vec::new();
    let mut lyapunov_violations = Vec::new();
    let mut worst_cone_margin = f64::INFINITY;
    let mut worst_lyapunov_excess = f64::NEG_INFINITY;
    for pair in trace.records.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let diff: Vec<f64> = prev
            .objective
            .iter()
            .zip(&next.objective)
            .map(|(a, b)| a - b)
            .collect();
        let margin = gens.min_inner(&diff)?.0;
        worst_cone_margin = worst_cone_margin.min(margin);
        if margin < -slack {
            cone_violations.push((next.k, -margin));
        }

        let direction = ScalarizationDirection::new(prev.direction.clone(), gens)?;
        let f_next = Scalarizer::new(&direction, gens)?.value(&next.objective);
        let lhs = f_next + 0.5 * prev.lambda * next.step * next.step;
        let excess = lhs - prev.scalarized;
        worst_lyapunov_excess = worst_lyapunov_excess.max(excess);
        if excess > slack {
            lyapunov_violations.push((next.k, excess));
        }
    }
    if trace.records.len() < 2 {
        worst_cone_margin = 0.0;
        worst_lyapunov_excess = 0.0;
    }
    Ok(DescentReport {
        cone_violations,
        lyapunov_violations,
        worst_cone_margin,
        worst_lyapunov_excess,
        slack,
    })
}
