//! Independent flat-space reference: the max-scalarization proximal loop
//! for quadratic objectives `F_i(p) = |p - a_i|^2` on `R^n` under the
//! componentwise order.
//!
//! For the orthant cone and the fixed direction `(1,..,1)/sqrt(m)`, the
//! general solver's iteration reduces to
//!
//! `p^{k+1} = argmin { max_i F_i(p) + (lambda_k / (2 sqrt(m))) |p - p^k|^2
//!                    : F(p) <= F(p^k) }`,
//!
//! which this module implements directly on `Vec<f64>` with no shared code:
//! its own subgradient phase, its own active-set Newton (with the analytic
//! Jacobian the quadratics admit), its own linear solver. `compare` runs
//! both and checks the iterates against each other.

/// Inner-solver knobs mirrored from the main config.
#[derive(Debug, Clone, Copy)]
pub struct FlatInner {
    pub max_iters: usize,
    pub min_iters: usize,
    pub window: usize,
    pub tol_opt: f64,
    pub tol_feas: f64,
    pub step_c: f64,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn values(anchors: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    anchors.iter().map(|a| sq_dist(p, a)).collect()
}

fn argmax(vals: &[f64]) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            idx = i;
        }
    }
    idx
}

/// Gaussian elimination with partial pivoting (local copy; this module has
/// to stay independent of the library under test).
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
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
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
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

/// One proximal subproblem of the flat loop, to high accuracy.
fn solve_flat_subproblem(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    lambda_tilde: f64,
    inner: &FlatInner,
) -> Vec<f64> {
    let f_anchor = values(anchors, anchor_pt);
    let phi = |p: &[f64]| -> f64 {
        let v = values(anchors, p);
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            + 0.5 * lambda_tilde * sq_dist(p, anchor_pt)
    };
    let feas = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&f_anchor)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    };

    // Subgradient phase with constraint switching.
    let mut q = anchor_pt.to_vec();
    let mut best = anchor_pt.to_vec();
    let mut best_phi = phi(anchor_pt);
    let mut window = std::collections::VecDeque::with_capacity(inner.window);
    for t in 0..inner.max_iters {
        let v = values(anchors, &q);
        let g = feas(&v);
        let mut improvement = 0.0;
        let dir: Vec<f64> = if g > inner.tol_feas {
            let shifted: Vec<f64> = v.iter().zip(&f_anchor).map(|(a, b)| a - b).collect();
            let i = argmax(&shifted);
            q.iter().zip(&anchors[i]).map(|(p, a)| 2.0 * (p - a)).collect()
        } else {
            let phi_q = phi(&q);
            if phi_q < best_phi {
                improvement = best_phi - phi_q;
                best_phi = phi_q;
                best = q.clone();
            }
            let i = argmax(&v);
            q.iter()
                .zip(&anchors[i])
                .zip(anchor_pt)
                .map(|((p, a), c)| 2.0 * (p - a) + lambda_tilde * (p - c))
                .collect()
        };
        if window.len() == inner.window {
            window.pop_front();
        }
        window.push_back(improvement);
        if t + 1 >= inner.min_iters && window.len() == inner.window {
            let total: f64 = window.iter().sum();
            if total < inner.tol_opt * (1.0 + best_phi.abs()) {
                break;
            }
        }
        let alpha = inner.step_c / (lambda_tilde * (t + 1) as f64);
        for (pc, dc) in q.iter_mut().zip(&dir) {
            *pc -= alpha * dc;
        }
    }

    // Active-set Newton polish.
    if let Some(p) = flat_polish(anchors, anchor_pt, lambda_tilde, inner, &best) {
        let v = values(anchors, &p);
        if feas(&v) <= inner.tol_feas && phi(&p) <= best_phi + 1e-12 * (1.0 + best_phi.abs()) {
            return p;
        }
    }
    best
}

fn flat_polish(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    lambda_tilde: f64,
    inner: &FlatInner,
    start: &[f64],
) -> Option<Vec<f64>> {
    let m = anchors.len();
    let v0 = values(anchors, start);
    let scale = 1.0 + lambda_tilde + v0.iter().cloned().fold(0.0f64, f64::max);
    let top = v0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<usize> = (0..m).filter(|&i| top - v0[i] <= 1e-5 * scale).collect();

    if let Some(p) = flat_polish_incremental(
        anchors, anchor_pt, lambda_tilde, inner, start, active, scale,
    ) {
        return Some(p);
    }
    // Enumerate active-set combinations when the incremental repair ends in
    // an inconsistent working set; counts are tiny here.
    if m > 4 {
        return None;
    }
    let mut piece_masks: Vec<u32> = (1..(1u32 << m)).collect();
    piece_masks.sort_by_key(|x| (x.count_ones(), *x));
    let mut con_masks: Vec<u32> = (0..(1u32 << m)).collect();
    con_masks.sort_by_key(|x| (x.count_ones(), *x));
    let phi = |p: &[f64]| -> f64 {
        values(anchors, p)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
            + 0.5 * lambda_tilde * sq_dist(p, anchor_pt)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &pm in &piece_masks {
        for &cm in &con_masks {
            let active: Vec<usize> = (0..m).filter(|i| pm & (1 << i) != 0).collect();
            let bound: Vec<usize> = (0..m).filter(|i| cm & (1 << i) != 0).collect();
            let mut p = start.to_vec();
            let mut theta = vec![1.0 / active.len() as f64; active.len()];
            let mut nu = vec![0.0; bound.len()];
            if flat_newton(
                anchors, anchor_pt, lambda_tilde, &active, &bound, &mut p, &mut theta, &mut nu,
                scale,
            ) != Some(true)
            {
                continue;
            }
            if !flat_consistent(
                anchors, anchor_pt, inner, &active, &theta, &nu, &p, scale,
            ) {
                continue;
            }
            let value = phi(&p);
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

#[allow(clippy::too_many_arguments)]
fn flat_polish_incremental(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    lambda_tilde: f64,
    inner: &FlatInner,
    start: &[f64],
    mut active: Vec<usize>,
    scale: f64,
) -> Option<Vec<f64>> {
    let m = anchors.len();
    let f_anchor = values(anchors, anchor_pt);
    let mut bound: Vec<usize> = Vec::new();
    let mut p = start.to_vec();
    let mut theta = vec![1.0 / active.len() as f64; active.len()];
    let mut nu: Vec<f64> = Vec::new();

    for _round in 0..12 {
        if flat_newton(
            anchors, anchor_pt, lambda_tilde, &active, &bound, &mut p, &mut theta, &mut nu, scale,
        ) != Some(true)
        {
            return None;
        }

        if let Some(j) = theta
            .iter()
            .enumerate()
            .filter(|(_, &t)| t < -1e-8)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, _)| j)
        {
            if active.len() < 2 {
                return None;
            }
            active.remove(j);
            theta = vec![1.0 / active.len() as f64; active.len()];
            continue;
        }
        if let Some(b) = nu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < -1e-8)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(b, _)| b)
        {
            bound.remove(b);
            nu.remove(b);
            continue;
        }
        let v = values(anchors, &p);
        let level = v[active[0]];
        if let Some(i) = (0..m)
            .filter(|i| !active.contains(i))
            .find(|&i| v[i] > level + 1e-9 * scale)
        {
            active.push(i);
            theta = vec![1.0 / active.len() as f64; active.len()];
            continue;
        }
        if let Some(i) = (0..m)
            .filter(|i| !bound.contains(i))
            .find(|&i| v[i] - f_anchor[i] > inner.tol_feas)
        {
            bound.push(i);
            nu.push(0.0);
            continue;
        }
        return Some(p);
    }
    None
}

/// Full KKT consistency at a converged flat candidate.
#[allow(clippy::too_many_arguments)]
fn flat_consistent(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    inner: &FlatInner,
    active: &[usize],
    theta: &[f64],
    nu: &[f64],
    p: &[f64],
    scale: f64,
) -> bool {
    if theta.iter().any(|&t| t < -1e-8) || nu.iter().any(|&v| v < -1e-8) {
        return false;
    }
    let f_anchor = values(anchors, anchor_pt);
    let v = values(anchors, p);
    let level = v[active[0]];
    if (0..anchors.len())
        .filter(|i| !active.contains(i))
        .any(|i| v[i] > level + 1e-9 * scale)
    {
        return false;
    }
    v.iter().zip(&f_anchor).all(|(a, b)| a - b <= inner.tol_feas)
}

/// Damped Newton on the flat KKT system for fixed active sets; all piece
/// Hessians are `2 I`, so the Jacobian is analytic.
#[allow(clippy::too_many_arguments)]
fn flat_newton(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    lambda_tilde: f64,
    active: &[usize],
    bound: &[usize],
    p: &mut Vec<f64>,
    theta: &mut Vec<f64>,
    nu: &mut Vec<f64>,
    scale: f64,
) -> Option<bool> {
    let n = anchor_pt.len();
    let f_anchor = values(anchors, anchor_pt);
    let nfree = active.len() - 1;
    let rows = n + nfree + bound.len();

    for _iter in 0..30 {
        let mut r = vec![0.0; rows];
        for d in 0..n {
            let mut s = lambda_tilde * (p[d] - anchor_pt[d]);
            for (j, &i) in active.iter().enumerate() {
                s += theta[j] * 2.0 * (p[d] - anchors[i][d]);
            }
            for (b, &i) in bound.iter().enumerate() {
                s += nu[b] * 2.0 * (p[d] - anchors[i][d]);
            }
            r[d] = s;
        }
        let v = values(anchors, p);
        for (j, &i) in active.iter().enumerate().skip(1) {
            r[n + j - 1] = v[i] - v[active[0]];
        }
        for (b, &i) in bound.iter().enumerate() {
            r[n + nfree + b] = v[i] - f_anchor[i];
        }
        let rnorm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rnorm <= 1e-12 * scale {
            return Some(true);
        }

        let mut jac = vec![vec![0.0; rows]; rows];
        let coef = 2.0 * (theta.iter().sum::<f64>() + nu.iter().sum::<f64>()) + lambda_tilde;
        for d in 0..n {
            jac[d][d] = coef;
        }
        for (j, &i) in active.iter().enumerate().skip(1) {
            for d in 0..n {
                let col = n + j - 1;
                jac[d][col] = 2.0 * (anchors[active[0]][d] - anchors[i][d]);
                jac[n + j - 1][d] =
                    2.0 * (p[d] - anchors[i][d]) - 2.0 * (p[d] - anchors[active[0]][d]);
            }
        }
        for (b, &i) in bound.iter().enumerate() {
            for d in 0..n {
                let col = n + nfree + b;
                jac[d][col] = 2.0 * (p[d] - anchors[i][d]);
                jac[n + nfree + b][d] = 2.0 * (p[d] - anchors[i][d]);
            }
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = gauss_solve(jac, rhs)?;

        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..25 {
            let mut pc = p.clone();
            for d in 0..n {
                pc[d] += s * delta[d];
            }
            let mut tc = theta.clone();
            for j in 1..active.len() {
                tc[j] += s * delta[n + j - 1];
            }
            tc[0] = 1.0 - tc[1..].iter().sum::<f64>();
            let mut nc = nu.clone();
            for b in 0..bound.len() {
                nc[b] += s * delta[n + nfree + b];
            }
            let rn =
                flat_residual_norm(anchors, anchor_pt, lambda_tilde, &pc, active, bound, &tc, &nc);
            if rn < rnorm {
                *p = pc;
                *theta = tc;
                *nu = nc;
                moved = true;
                break;
            }
            s *= 0.5;
        }
        if !moved {
            let rn =
                flat_residual_norm(anchors, anchor_pt, lambda_tilde, p, active, bound, theta, nu);
            return Some(rn <= 1e-7 * scale);
        }
    }
    let rn = flat_residual_norm(anchors, anchor_pt, lambda_tilde, p, active, bound, theta, nu);
    Some(rn <= 1e-7 * scale)
}

#[allow(clippy::too_many_arguments)]
fn flat_residual_norm(
    anchors: &[Vec<f64>],
    anchor_pt: &[f64],
    lambda_tilde: f64,
    p: &[f64],
    active: &[usize],
    bound: &[usize],
    theta: &[f64],
    nu: &[f64],
) -> f64 {
    let n = p.len();
    let f_anchor = values(anchors, anchor_pt);
    let v = values(anchors, p);
    let mut acc = 0.0;
    for d in 0..n {
        let mut s = lambda_tilde * (p[d] - anchor_pt[d]);
        for (j, &i) in active.iter().enumerate() {
            s += theta[j] * 2.0 * (p[d] - anchors[i][d]);
        }
        for (b, &i) in bound.iter().enumerate() {
            s += nu[b] * 2.0 * (p[d] - anchors[i][d]);
        }
        acc += s * s;
    }
    for &i in &active[1..] {
        let e = v[i] - v[active[0]];
        acc += e * e;
    }
    for &i in bound {
        let e = v[i] - f_anchor[i];
        acc += e * e;
    }
    acc.sqrt()
}

/// Run the flat proximal loop; returns the iterates including the start.
pub fn run_flat(
    anchors: &[Vec<f64>],
    start: &[f64],
    lambda_at: impl Fn(usize) -> f64,
    tol_step: f64,
    max_outer: usize,
    inner: &FlatInner,
) -> Vec<Vec<f64>> {
    let m = anchors.len() as f64;
    let mut iterates = vec![start.to_vec()];
    let mut current = start.to_vec();
    for k in 0..max_outer {
        let lambda_tilde = lambda_at(k) / m.sqrt();
        let next = solve_flat_subproblem(anchors, &current, lambda_tilde, inner);
        let step = norm_sq(&sub(&next, &current)).sqrt();
        current = next;
        iterates.push(current.clone());
        if step <= tol_step {
            break;
        }
    }
    iterates
}
