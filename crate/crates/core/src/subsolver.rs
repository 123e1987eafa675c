//! Inner solver for one proximal subproblem: minimize
//!
//! `phi(p) = f(F(p)) + (lambda/2) dist(p, anchor)^2`
//!
//! over the descent set `{ p : F(p) <= F(anchor) }` in the cone order,
//! starting from the feasible anchor.
//!
//! The workhorse is a projection-free subgradient method with constraint
//! switching: at an infeasible iterate it steps against a subgradient of the
//! constraint residual, otherwise against a subgradient of the scalarized
//! objective plus the proximal pull. The best feasible iterate (by `phi`) is
//! tracked throughout, so the returned point never loses to the anchor.
//!
//! Because the subgradient phase resolves kinks only at `O(1/t)`, an
//! active-set Newton polish refines its output to near machine precision:
//! it detects the active objective pieces and constraints, solves the
//! resulting smooth KKT system in normal coordinates by damped Newton with
//! finite-differenced curvature, and is accepted only if it is feasible and
//! does not increase `phi`. The polish can be disabled per config.

use std::collections::VecDeque;

use crate::cone::{GeneratorSet, ScalarizationDirection, Scalarizer};
use crate::error::{Error, Result};
use crate::manifold::{dist, exp_map, log_map, metric_dot, orthonormal_basis, ManifoldPoint};
use crate::problem::{combine_tangents, eval_objective, objective_gradients, VectorObjective};

/// Parameters of the inner solver.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InnerConfig {
    /// Iteration cap of the subgradient phase.
    pub max_iters: usize,
    /// Iterations to run before the improvement window may trigger a stop.
    pub min_iters: usize,
    /// Width of the improvement window used by the stopping rule.
    pub window: usize,
    /// Stop when the best-value improvements over the window total less
    /// than `tol_opt * (1 + |phi|)`.
    pub tol_opt: f64,
    /// Feasibility tolerance on the constraint residual.
    pub tol_feas: f64,
    /// Step constant: step sizes are `c / (lambda * (t + 1))`.
    pub step_c: f64,
    /// Geodesic step-length clamp. Iterates straying beyond twice this
    /// distance from the anchor are reset to the best feasible point:
    /// far out on the hyperboloid the ambient coordinates grow like
    /// `cosh(r)` and tangent arithmetic loses all precision, so the search
    /// region must stay bounded. Raise it for problems whose subproblem
    /// minimizers are farther than this from the anchor.
    pub max_step_norm: f64,
    /// Run the active-set Newton polish after the subgradient phase.
    pub polish: bool,
    /// Also solve by smoothing the max (softmax continuation) and record the
    /// distance between the two answers. Diagnostic only, never the result.
    pub cross_check: bool,
    /// Emit per-iteration progress to stderr.
    pub verbose: bool,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            min_iters: 200,
            window: 25,
            tol_opt: 1e-8,
            tol_feas: 1e-10,
            step_c: 2.0,
            max_step_norm: 10.0,
            polish: true,
            cross_check: false,
            verbose: false,
        }
    }
}

/// One proximal subproblem.
pub struct SubproblemSpec<'a> {
    pub objective: &'a dyn VectorObjective,
    pub anchor: &'a ManifoldPoint,
    pub lambda: f64,
    pub direction: &'a ScalarizationDirection,
    pub generators: &'a GeneratorSet,
    pub inner: &'a InnerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubStatus {
    Converged,
    MaxIters,
    Failed,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub point: ManifoldPoint,
    /// `phi` at the returned point.
    pub objective_value: f64,
    /// Constraint residual at the returned point (feasible iff <= tol_feas).
    pub feasibility_residual: f64,
    /// KKT residual norm when the polish ran, otherwise the norm of the
    /// aggregated subgradient at the returned point.
    pub optimality_estimate: f64,
    pub inner_iterations: usize,
    pub status: SubStatus,
    /// Distance between the main answer and the smoothed cross-check solve,
    /// when requested.
    pub cross_check_gap: Option<f64>,
}

/// Constraint residual `g(p) = max_i <F(p) - F(anchor), z_i>` over the
/// (l1-normalized) generators; `p` is in the descent set iff `g(p) <= 0`.
pub fn feasibility_residual(p: &ManifoldPoint, spec: &SubproblemSpec) -> Result<f64> {
    let f_p = eval_objective(spec.objective, p)?;
    let f_anchor = eval_objective(spec.objective, spec.anchor)?;
    let diff: Vec<f64> = f_p.iter().zip(&f_anchor).map(|(a, b)| a - b).collect();
    Ok(spec.generators.max_inner(&diff)?.0)
}

fn constraint_residual(gens: &GeneratorSet, f_p: &[f64], f_anchor: &[f64]) -> Result<(f64, usize)> {
    let diff: Vec<f64> = f_p.iter().zip(f_anchor).map(|(a, b)| a - b).collect();
    gens.max_inner(&diff)
}

/// Solve one proximal subproblem.
pub fn solve_subproblem(spec: &SubproblemSpec) -> Result<SubproblemResult> {
    if spec.lambda.is_nan() || spec.lambda <= 0.0 || !spec.lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "proximal parameter must be positive, got {}",
            spec.lambda
        )));
    }
    let cfg = spec.inner;
    let scalarizer = Scalarizer::new(spec.direction, spec.generators)?;
    let f_anchor = eval_objective(spec.objective, spec.anchor)?;
    let (anchor_res, _) = constraint_residual(spec.generators, &f_anchor, &f_anchor)?;
    if anchor_res > cfg.tol_feas {
        return Ok(SubproblemResult {
            point: spec.anchor.clone(),
            objective_value: scalarizer.value(&f_anchor),
            feasibility_residual: anchor_res,
            optimality_estimate: f64::INFINITY,
            inner_iterations: 0,
            status: SubStatus::Failed,
            cross_check_gap: None,
        });
    }

    let phi_of = |f_p: &[f64], d_anchor: f64| -> f64 {
        scalarizer.value(f_p) + 0.5 * spec.lambda * d_anchor * d_anchor
    };

    let mut best_point = spec.anchor.clone();
    let mut best_phi = phi_of(&f_anchor, 0.0);
    let mut best_feas = anchor_res.max(0.0);

    let mut q = spec.anchor.clone();
    let mut window: VecDeque<f64> = VecDeque::with_capacity(cfg.window);
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..cfg.max_iters {
        iterations = t + 1;
        let f_q = eval_objective(spec.objective, &q)?;
        let (g_q, g_idx) = constraint_residual(spec.generators, &f_q, &f_anchor)?;
        let grads = objective_gradients(spec.objective, &q)?;

        let mut improvement = 0.0;
        let step_dir = if g_q > cfg.tol_feas {
            // Infeasible: descend on the constraint residual (active
            // generator gives the subgradient).
            combine_tangents(&q, &spec.generators.generators()[g_idx], &grads)?
        } else {
            let d_anchor = dist(&q, spec.anchor)?;
            let phi_q = phi_of(&f_q, d_anchor);
            if !phi_q.is_finite() {
                return Err(Error::NonFinite("inner objective".into()));
            }
            if phi_q < best_phi {
                improvement = best_phi - phi_q;
                best_phi = phi_q;
                best_point = q.clone();
                best_feas = g_q.max(0.0);
            }
            let (weights, _) = scalarizer.active_weights(&f_q);
            let w = combine_tangents(&q, &weights, &grads)?;
            let pull = log_map(&q, spec.anchor)?;
            w.add(&pull.scale(-spec.lambda))?
        };

        if window.len() == cfg.window {
            window.pop_front();
        }
        window.push_back(improvement);
        if t + 1 >= cfg.min_iters && window.len() == cfg.window {
            let total: f64 = window.iter().sum();
            if total < cfg.tol_opt * (1.0 + best_phi.abs()) && best_feas <= cfg.tol_feas {
                converged = true;
                break;
            }
        }

        let alpha = cfg.step_c / (spec.lambda * (t + 1) as f64);
        let mut step = step_dir.scale(-alpha);
        let norm = step.norm();
        if norm > cfg.max_step_norm {
            step = step.scale(cfg.max_step_norm / norm);
        }
        // Excursion guard: a clamp computed from a degraded tangent norm can
        // let an iterate escape the region where ambient arithmetic is
        // trustworthy; pull such iterates back to the best feasible point.
        let next = if norm.is_finite() {
            exp_map(&q, &step).ok()
        } else {
            None
        };
        q = match next {
            Some(point) => match dist(&point, spec.anchor) {
                Ok(d) if d.is_finite() && d <= 2.0 * cfg.max_step_norm => point,
                _ => best_point.clone(),
            },
            None => best_point.clone(),
        };

        if cfg.verbose && (t + 1) % 5000 == 0 {
            eprintln!("    inner t={:>6}  phi_best={best_phi:.12e}  g={g_q:.3e}", t + 1);
        }
    }

    let mut optimality = {
        let f_b = eval_objective(spec.objective, &best_point)?;
        let grads = objective_gradients(spec.objective, &best_point)?;
        let (weights, _) = scalarizer.active_weights(&f_b);
        let w = combine_tangents(&best_point, &weights, &grads)?;
        let pull = log_map(&best_point, spec.anchor)?;
        w.add(&pull.scale(-spec.lambda))?.norm()
    };
    let mut polished = false;

    if cfg.polish {
        if let Some(pol) = newton::polish(spec, &scalarizer, &f_anchor, &best_point) {
            let f_pol = eval_objective(spec.objective, &pol.point)?;
            let (g_pol, _) = constraint_residual(spec.generators, &f_pol, &f_anchor)?;
            let d_pol = dist(&pol.point, spec.anchor)?;
            let phi_pol = phi_of(&f_pol, d_pol);
            if phi_pol.is_finite()
                && g_pol <= cfg.tol_feas
                && phi_pol <= best_phi + 1e-12 * (1.0 + best_phi.abs())
            {
                best_point = pol.point;
                best_phi = phi_pol;
                best_feas = g_pol.max(0.0);
                optimality = pol.kkt_residual;
                polished = true;
            } else if cfg.verbose {
                eprintln!(
                    "    polish rejected: phi {phi_pol:.6e} vs best {best_phi:.6e}, g {g_pol:.3e}"
                );
            }
        }
    }

    let cross_check_gap = if cfg.cross_check {
        let smoothed = solve_subproblem_smoothed(spec)?;
        Some(dist(&best_point, &smoothed)?)
    } else {
        None
    };

    let status = if converged || polished {
        SubStatus::Converged
    } else {
        SubStatus::MaxIters
    };
    Ok(SubproblemResult {
        point: best_point,
        objective_value: best_phi,
        feasibility_residual: best_feas,
        optimality_estimate: optimality,
        inner_iterations: iterations,
        status,
        cross_check_gap,
    })
}

/// Alternative route to the subproblem: replace both finite maxima by
/// log-sum-exp smoothing with geometrically decreasing temperature, handle
/// the constraint by a quadratic penalty with increasing weight, and run
/// gradient descent with backtracking. Coarse; used only to cross-check
/// the main solver, never as the returned answer.
pub fn solve_subproblem_smoothed(spec: &SubproblemSpec) -> Result<ManifoldPoint> {
    let scalarizer = Scalarizer::new(spec.direction, spec.generators)?;
    let f_anchor = eval_objective(spec.objective, spec.anchor)?;
    let lambda = spec.lambda;

    let lse = |vals: &[f64], tau: f64| -> (f64, Vec<f64>) {
        let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = vals.iter().map(|v| ((v - vmax) / tau).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let smooth = vmax + tau * sum.ln();
        let weights = exps.iter().map(|e| e / sum).collect();
        (smooth, weights)
    };

    let mut p = spec.anchor.clone();
    let mut tau = 1e-1;
    let mut rho = 1e2;
    for _stage in 0..7 {
        for _ in 0..150 {
            let f_p = eval_objective(spec.objective, &p)?;
            let grads = objective_gradients(spec.objective, &p)?;
            let obj_vals = scalarizer.piece_values(&f_p);
            let (obj_smooth, obj_w) = lse(&obj_vals, tau);
            let con_vals: Vec<f64> = spec
                .generators
                .generators()
                .iter()
                .map(|z| {
                    z.iter()
                        .zip(f_p.iter().zip(&f_anchor))
                        .map(|(zc, (a, b))| zc * (a - b))
                        .sum()
                })
                .collect();
            let (con_smooth, con_w) = lse(&con_vals, tau);
            let d = dist(&p, spec.anchor)?;
            let violation = con_smooth.max(0.0);
            let value = obj_smooth + 0.5 * lambda * d * d + 0.5 * rho * violation * violation;

            // Total weight per objective component.
            let m = f_p.len();
            let mut total_w = vec![0.0; m];
            for (j, wj) in obj_w.iter().enumerate() {
                for (i, c) in scalarizer.piece_weights(j).iter().enumerate() {
                    total_w[i] += wj * c;
                }
            }
            if violation > 0.0 {
                for (zi, wi) in spec.generators.generators().iter().zip(&con_w) {
                    for i in 0..m {
                        total_w[i] += rho * violation * wi * zi[i];
                    }
                }
            }
            let mut grad = combine_tangents(&p, &total_w, &grads)?;
            let pull = log_map(&p, spec.anchor)?;
            grad = grad.add(&pull.scale(-lambda))?;
            let gnorm = grad.norm();
            if gnorm < 1e-13 {
                break;
            }

            // Backtracking line search.
            let mut alpha = 1.0 / (lambda + 10.0);
            let mut moved = false;
            for _ in 0..30 {
                let cand = exp_map(&p, &grad.scale(-alpha))?;
                let f_c = eval_objective(spec.objective, &cand)?;
                let (o_c, _) = lse(&scalarizer.piece_values(&f_c), tau);
                let con_c: Vec<f64> = spec
                    .generators
                    .generators()
                    .iter()
                    .map(|z| {
                        z.iter()
                            .zip(f_c.iter().zip(&f_anchor))
                            .map(|(zc, (a, b))| zc * (a - b))
                            .sum()
                    })
                    .collect();
                let (cc, _) = lse(&con_c, tau);
                let d_c = dist(&cand, spec.anchor)?;
                let viol_c = cc.max(0.0);
                let v_c = o_c + 0.5 * lambda * d_c * d_c + 0.5 * rho * viol_c * viol_c;
                if v_c <= value - 1e-4 * alpha * gnorm * gnorm {
                    p = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        tau *= 0.1;
        rho *= 10.0;
    }
    Ok(p)
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
/// Systems here are tiny (dimension + active pieces + active constraints).
pub(crate) fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for (row, av) in a.iter().enumerate() {
        if av.len() != n || row >= n {
            return None;
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

mod newton {
    //! Active-set KKT polish.
    //!
    //! At a constrained minimizer with active objective pieces `A` and active
    //! constraints `B` there exist convex multipliers `theta` on `A` and
    //! nonnegative multipliers `nu` on `B` with
    //!
    //! `sum_A theta_j grad l_j(p) + sum_B nu_i grad g_i(p) - lambda log_p(anchor) = 0`,
    //!
    //! all `l_j`, `j in A`, equal, and `g_i = 0` for `i in B`. The system is
    //! solved by damped Newton in normal coordinates at the current center,
    //! with curvature from central finite differences and analytic
    //! multiplier columns. Wrong active-set guesses are repaired by sign
    //! checks on the multipliers and violation checks on the left-out pieces.

    use super::*;

    pub(super) struct Polished {
        pub point: ManifoldPoint,
        pub kkt_residual: f64,
    }

    /// Full tangent basis or nothing (degenerate at extreme coordinates).
    fn full_basis(p: &ManifoldPoint) -> Option<Vec<crate::manifold::TangentVector>> {
        let basis = orthonormal_basis(p);
        (basis.len() == p.manifold().dim()).then_some(basis)
    }

    struct Workspace<'a> {
        spec: &'a SubproblemSpec<'a>,
        scalarizer: &'a Scalarizer,
        f_anchor: &'a [f64],
    }

    impl Workspace<'_> {
        fn piece_values(&self, f_p: &[f64]) -> (Vec<f64>, Vec<f64>) {
            let obj = self.scalarizer.piece_values(f_p);
            let con = self
                .spec
                .generators
                .generators()
                .iter()
                .map(|z| {
                    z.iter()
                        .zip(f_p.iter().zip(self.f_anchor))
                        .map(|(zc, (a, b))| zc * (a - b))
                        .sum()
                })
                .collect();
            (obj, con)
        }

        /// KKT residual at `p` for the active sets, with the stationarity
        /// part expressed in the (fixed) basis supplied by the caller.
        fn residual(
            &self,
            p: &ManifoldPoint,
            basis: &[crate::manifold::TangentVector],
            active_obj: &[usize],
            active_con: &[usize],
            theta: &[f64],
            nu: &[f64],
        ) -> Result<Vec<f64>> {
            let f_p = eval_objective(self.spec.objective, p)?;
            let grads = objective_gradients(self.spec.objective, p)?;
            let m = f_p.len();
            let mut total_w = vec![0.0; m];
            for (j, &piece) in active_obj.iter().enumerate() {
                let w = self.scalarizer.piece_weights(piece);
                for i in 0..m {
                    total_w[i] += theta[j] * w[i];
                }
            }
            for (b, &con) in active_con.iter().enumerate() {
                let z = &self.spec.generators.generators()[con];
                for i in 0..m {
                    total_w[i] += nu[b] * z[i];
                }
            }
            let stat = combine_tangents(p, &total_w, &grads)?;
            let pull = log_map(p, self.spec.anchor)?;
            let stat = stat.add(&pull.scale(-self.spec.lambda))?;

            let manifold = p.manifold();
            let mut r: Vec<f64> = basis
                .iter()
                .map(|b| metric_dot(manifold, stat.coords(), b.coords()))
                .collect();
            let (obj_vals, con_vals) = self.piece_values(&f_p);
            for &piece in &active_obj[1..] {
                r.push(obj_vals[piece] - obj_vals[active_obj[0]]);
            }
            for &con in active_con {
                r.push(con_vals[con]);
            }
            Ok(r)
        }
    }

    pub(super) fn polish(
        spec: &SubproblemSpec,
        scalarizer: &Scalarizer,
        f_anchor: &[f64],
        start: &ManifoldPoint,
    ) -> Option<Polished> {
        let ws = Workspace {
            spec,
            scalarizer,
            f_anchor,
        };
        let f_start = eval_objective(spec.objective, start).ok()?;
        let (obj_vals, _) = ws.piece_values(&f_start);
        let scale = 1.0 + spec.lambda + obj_vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        if let Some(done) = polish_incremental(&ws, start, scale) {
            return Some(done);
        }
        // The incremental repair can talk itself into an inconsistent
        // working set (say, an objective tie plus a constraint circle that
        // never meet). The piece and constraint counts are tiny here, so
        // enumerating active-set combinations is cheap and settles it.
        polish_enumerate(&ws, start, scale)
    }

    fn polish_incremental(
        ws: &Workspace,
        start: &ManifoldPoint,
        scale: f64,
    ) -> Option<Polished> {
        let spec = ws.spec;
        let f_start = eval_objective(spec.objective, start).ok()?;
        let (obj_vals, _) = ws.piece_values(&f_start);
        let top = obj_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut active_obj: Vec<usize> = (0..obj_vals.len())
            .filter(|&j| top - obj_vals[j] <= 1e-5 * scale)
            .collect();
        // The working constraint set starts empty and grows on violation:
        // at the anchor every constraint sits exactly on its boundary, so
        // seeding from near-activity would make the KKT system singular.
        let mut active_con: Vec<usize> = Vec::new();

        let mut center = start.clone();
        let mut theta = vec![1.0 / active_obj.len() as f64; active_obj.len()];
        let mut nu: Vec<f64> = Vec::new();

        for _round in 0..12 {
            let converged = newton_loop(
                ws,
                &mut center,
                &active_obj,
                &active_con,
                &mut theta,
                &mut nu,
                scale,
            )?;
            if !converged {
                return None;
            }

            // Multiplier sign checks.
            if let Some(worst) = argmin_below(&theta, -1e-8) {
                if active_obj.len() < 2 {
                    return None;
                }
                active_obj.remove(worst);
                theta = vec![1.0 / active_obj.len() as f64; active_obj.len()];
                continue;
            }
            if let Some(worst) = argmin_below(&nu, -1e-8) {
                active_con.remove(worst);
                nu.remove(worst);
                continue;
            }

            // Left-out pieces must not exceed the active level, left-out
            // constraints must stay feasible.
            let f_c = eval_objective(spec.objective, &center).ok()?;
            let (obj_vals, con_vals) = ws.piece_values(&f_c);
            let level = obj_vals[active_obj[0]];
            if let Some(j) = (0..obj_vals.len())
                .filter(|j| !active_obj.contains(j))
                .find(|&j| obj_vals[j] > level + 1e-9 * scale)
            {
                active_obj.push(j);
                theta = vec![1.0 / active_obj.len() as f64; active_obj.len()];
                continue;
            }
            if let Some(i) = (0..con_vals.len())
                .filter(|i| !active_con.contains(i))
                .find(|&i| con_vals[i] > spec.inner.tol_feas)
            {
                active_con.push(i);
                nu.push(0.0);
                continue;
            }

            let basis = full_basis(&center)?;
            let r = ws
                .residual(&center, &basis, &active_obj, &active_con, &theta, &nu)
                .ok()?;
            let res_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            return Some(Polished {
                point: center,
                kkt_residual: res_norm,
            });
        }
        None
    }

    /// Exhaustive active-set search: for every nonempty subset of objective
    /// pieces and every subset of constraints, solve the KKT system and keep
    /// the consistent candidate (multiplier signs, level checks, global
    /// feasibility) with the lowest subproblem value. Only attempted for the
    /// small piece/constraint counts this solver targets.
    fn polish_enumerate(ws: &Workspace, start: &ManifoldPoint, scale: f64) -> Option<Polished> {
        let spec = ws.spec;
        let n_pieces = ws.scalarizer.num_pieces();
        let n_cons = spec.generators.len();
        if n_pieces > 4 || n_cons > 4 {
            return None;
        }
        let mut piece_masks: Vec<u32> = (1..(1u32 << n_pieces)).collect();
        piece_masks.sort_by_key(|m| (m.count_ones(), *m));
        let mut con_masks: Vec<u32> = (0..(1u32 << n_cons)).collect();
        con_masks.sort_by_key(|m| (m.count_ones(), *m));

        let mut best: Option<(f64, Polished)> = None;
        for &pm in &piece_masks {
            for &cm in &con_masks {
                let active_obj: Vec<usize> =
                    (0..n_pieces).filter(|j| pm & (1 << j) != 0).collect();
                let active_con: Vec<usize> = (0..n_cons).filter(|i| cm & (1 << i) != 0).collect();
                let mut center = start.clone();
                let mut theta = vec![1.0 / active_obj.len() as f64; active_obj.len()];
                let mut nu = vec![0.0; active_con.len()];
                let Some(true) = newton_loop(
                    ws,
                    &mut center,
                    &active_obj,
                    &active_con,
                    &mut theta,
                    &mut nu,
                    scale,
                ) else {
                    continue;
                };
                if let Some(done) =
                    validate_candidate(ws, &center, &active_obj, &active_con, &theta, &nu, scale)
                {
                    let f_c = match eval_objective(spec.objective, &done.point) {
                        Ok(f) => f,
                        Err(_) => continue,
                    };
                    let d = match dist(&done.point, spec.anchor) {
                        Ok(d) => d,
                        Err(_) => continue,
                    };
                    let phi = ws.scalarizer.value(&f_c) + 0.5 * spec.lambda * d * d;
                    if best.as_ref().is_none_or(|(b, _)| phi < *b) {
                        best = Some((phi, done));
                    }
                }
            }
        }
        best.map(|(_, done)| done)
    }

    /// Full KKT consistency at a converged candidate: simplex multipliers
    /// nonnegative, constraint multipliers nonnegative, no left-out piece
    /// above the active level, every constraint satisfied.
    fn validate_candidate(
        ws: &Workspace,
        center: &ManifoldPoint,
        active_obj: &[usize],
        active_con: &[usize],
        theta: &[f64],
        nu: &[f64],
        scale: f64,
    ) -> Option<Polished> {
        let spec = ws.spec;
        if theta.iter().any(|&t| t < -1e-8) || nu.iter().any(|&v| v < -1e-8) {
            return None;
        }
        let f_c = eval_objective(spec.objective, center).ok()?;
        let (obj_vals, con_vals) = ws.piece_values(&f_c);
        let level = obj_vals[active_obj[0]];
        if (0..obj_vals.len())
            .filter(|j| !active_obj.contains(j))
            .any(|j| obj_vals[j] > level + 1e-9 * scale)
        {
            return None;
        }
        if con_vals.iter().any(|&g| g > spec.inner.tol_feas) {
            return None;
        }
        let basis = full_basis(center)?;
        let r = ws
            .residual(center, &basis, active_obj, active_con, theta, nu)
            .ok()?;
        let res_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res_norm > 1e-7 * scale {
            return None;
        }
        Some(Polished {
            point: center.clone(),
            kkt_residual: res_norm,
        })
    }

    fn argmin_below(vals: &[f64], threshold: f64) -> Option<usize> {
        let mut worst = None;
        let mut worst_val = threshold;
        for (i, &v) in vals.iter().enumerate() {
            if v < worst_val {
                worst_val = v;
                worst = Some(i);
            }
        }
        worst
    }

    /// Damped Newton on the KKT system for fixed active sets. Returns
    /// `Some(true)` on convergence, `Some(false)` when it stalls above the
    /// tolerance, `None` on singular systems or geometry failures.
    #[allow(clippy::too_many_arguments)]
    fn newton_loop(
        ws: &Workspace,
        center: &mut ManifoldPoint,
        active_obj: &[usize],
        active_con: &[usize],
        theta: &mut Vec<f64>,
        nu: &mut Vec<f64>,
        scale: f64,
    ) -> Option<bool> {
        let spec = ws.spec;
        let n = center.manifold().dim();
        let n_free_theta = active_obj.len() - 1;
        let n_unknowns = n + n_free_theta + active_con.len();
        let tol = 1e-12 * scale;
        let fd_h = 1e-6;

        for _iter in 0..40 {
            let basis = full_basis(center)?;
            close_simplex(theta);
            let r = ws
                .residual(center, &basis, active_obj, active_con, theta, nu)
                .ok()?;
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= tol {
                return Some(true);
            }

            // Jacobian: FD columns for the displacement, analytic columns
            // for the multipliers.
            let mut jac = vec![vec![0.0; n_unknowns]; r.len()];
            for k in 0..n {
                let plus = exp_map(center, &basis[k].scale(fd_h)).ok()?;
                let minus = exp_map(center, &basis[k].scale(-fd_h)).ok()?;
                let rp = ws
                    .residual(&plus, &basis, active_obj, active_con, theta, nu)
                    .ok()?;
                let rm = ws
                    .residual(&minus, &basis, active_obj, active_con, theta, nu)
                    .ok()?;
                for (row, (a, b)) in rp.iter().zip(&rm).enumerate() {
                    jac[row][k] = (a - b) / (2.0 * fd_h);
                }
            }
            let grads = objective_gradients(spec.objective, center).ok()?;
            let manifold = center.manifold();
            for (col_off, &piece) in active_obj.iter().skip(1).enumerate() {
                // d stat / d theta_j with theta_0 eliminated.
                let w_j = ws.scalarizer.piece_weights(piece);
                let w_0 = ws.scalarizer.piece_weights(active_obj[0]);
                let dw: Vec<f64> = w_j.iter().zip(&w_0).map(|(a, b)| a - b).collect();
                let dstat = combine_tangents(center, &dw, &grads).ok()?;
                for (row, b) in basis.iter().enumerate() {
                    jac[row][n + col_off] = metric_dot(manifold, dstat.coords(), b.coords());
                }
            }
            for (col_off, &con) in active_con.iter().enumerate() {
                let z = &spec.generators.generators()[con];
                let dstat = combine_tangents(center, z, &grads).ok()?;
                for (row, b) in basis.iter().enumerate() {
                    jac[row][n + n_free_theta + col_off] =
                        metric_dot(manifold, dstat.coords(), b.coords());
                }
            }

            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut delta = solve_linear(jac, rhs)?;
            // Guard against wild steps from a bad local model.
            let disp_norm = delta[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            let cap = 10.0 * (1.0 + scale);
            if disp_norm > cap {
                let shrink = cap / disp_norm;
                for d in delta.iter_mut() {
                    *d *= shrink;
                }
            }

            // Damped update. The free theta unknowns are theta[1..]; the
            // head is implied by the simplex constraint.
            let mut accepted = false;
            let mut s = 1.0;
            for _ in 0..25 {
                let mut disp = crate::manifold::TangentVector::zero(center.clone());
                for (k, b) in basis.iter().enumerate() {
                    disp = disp.add(&b.scale(s * delta[k])).ok()?;
                }
                let cand = exp_map(center, &disp).ok()?;
                let mut theta_cand = theta.clone();
                for j in 0..n_free_theta {
                    theta_cand[1 + j] += s * delta[n + j];
                }
                close_simplex(&mut theta_cand);
                let mut nu_cand = nu.clone();
                for (b, nc) in nu_cand.iter_mut().enumerate() {
                    *nc += s * delta[n + n_free_theta + b];
                }
                let cand_basis = match full_basis(&cand) {
                    Some(b) => b,
                    None => {
                        s *= 0.5;
                        continue;
                    }
                };
                if let Ok(rc) = ws.residual(
                    &cand,
                    &cand_basis,
                    active_obj,
                    active_con,
                    &theta_cand,
                    &nu_cand,
                ) {
                    let rc_norm = rc.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if rc_norm < r_norm {
                        *center = cand;
                        *theta = theta_cand;
                        *nu = nu_cand;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                // Stalled; report convergence state by the residual reached.
                return Some(r_norm <= 1e-7 * scale);
            }
        }

        let basis = full_basis(center)?;
        close_simplex(theta);
        let r = ws
            .residual(center, &basis, active_obj, active_con, theta, nu)
            .ok()?;
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(r_norm <= 1e-7 * scale)
    }

    /// Recompute the head multiplier from the simplex constraint.
    fn close_simplex(theta: &mut [f64]) {
        let tail: f64 = theta[1..].iter().sum();
        theta[0] = 1.0 - tail;
    }
}
