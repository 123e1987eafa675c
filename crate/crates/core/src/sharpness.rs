//! Weak-sharp-minimum diagnostics.
//!
//! A candidate `p_hat` is a weak sharp minimum of `G` with modulus `tau`
//! when `d(G(p) - G(p_hat), -C) >= tau * d(p, W)` for every `p` outside the
//! level set `W = { q : G(q) = G(p_hat) }`. These audits estimate the best
//! such `tau` over a finite probe set. A positive estimate is numerical
//! evidence on the probed region, not a proof; the reports carry a hash of
//! the probe set so results are reproducible.
//!
//! Only the orthant cone is supported here: the distance to `-C` for a
//! general polyhedral cone is a quadratic program, which is out of scope.

use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cone::{GeneratorSet, ScalarizationDirection, Scalarizer};
use crate::error::{Error, Result};
use crate::manifold::{dist, ManifoldPoint};
use crate::par;
use crate::problem::{eval_objective, VectorObjective};

/// Level set `W` of the candidate value: explicit samples or a closed-form
/// distance callback (available for the built-in fixtures).
#[derive(Clone)]
pub enum LevelSet {
    Samples(Vec<ManifoldPoint>),
    DistanceFn(Arc<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>),
}

/// One sharpness question: objective, candidate, level-set description,
/// probe points.
pub struct SharpnessQuery {
    pub objective: Arc<dyn VectorObjective>,
    pub candidate: ManifoldPoint,
    pub level_set: LevelSet,
    pub probes: Vec<ManifoldPoint>,
}

/// Load probe or level-set samples from the point-list CSV format: one
/// point per row, ambient coordinates only, comma-separated.
pub fn load_points_csv(text: &str, manifold: crate::manifold::ManifoldId) -> Result<Vec<ManifoldPoint>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let coords = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::IllPosed(format!("row {}: bad float {f:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(ManifoldPoint::new(manifold, coords)?);
    }
    Ok(points)
}

/// Euclidean distance from `y` to the negative orthant:
/// the norm of the positive part of `y`.
pub fn dist_to_neg_cone(y: &[f64], cone: &GeneratorSet) -> Result<f64> {
    if !cone.is_orthant() {
        return Err(Error::UnsupportedCone(
            "distance to -C is implemented for the orthant only".into(),
        ));
    }
    if y.len() != cone.m() {
        return Err(Error::DimensionMismatch {
            expected: cone.m(),
            found: y.len(),
        });
    }
    Ok(y.iter().map(|c| c.max(0.0).powi(2)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusEstimate {
    /// `min` over probes of `d(G(p)-G(p_hat), -C) / d(p, W)`.
    pub modulus: f64,
    pub probes: usize,
    /// Index of the probe attaining the minimum ratio.
    pub argmin_probe: usize,
    /// SHA-256 over the probe coordinates, hex-encoded.
    pub probe_hash: String,
}

fn probe_hash(probes: &[ManifoldPoint]) -> String {
    let mut hasher = Sha256::new();
    for p in probes {
        for c in p.coords() {
            hasher.update(c.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn level_distance(q: &SharpnessQuery, p: &ManifoldPoint) -> Result<f64> {
    match &q.level_set {
        LevelSet::Samples(samples) => {
            let mut best = f64::INFINITY;
            for s in samples {
                best = best.min(dist(p, s)?);
            }
            Ok(best)
        }
        LevelSet::DistanceFn(f) => Ok(f(p)),
    }
}

fn validate_query(q: &SharpnessQuery, cone: &GeneratorSet) -> Result<Vec<f64>> {
    if q.probes.is_empty() {
        return Err(Error::IllPosed("probe set is empty".into()));
    }
    let g_hat = eval_objective(q.objective.as_ref(), &q.candidate)?;
    if let LevelSet::Samples(samples) = &q.level_set {
        for s in samples {
            let g_s = eval_objective(q.objective.as_ref(), s)?;
            let err: f64 = g_s
                .iter()
                .zip(&g_hat)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if err > 1e-8 {
                return Err(Error::IllPosed(format!(
                    "level-set sample off the candidate level by {err}"
                )));
            }
        }
    }
    if cone.m() != q.objective.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: q.objective.num_objectives(),
            found: cone.m(),
        });
    }
    Ok(g_hat)
}

/// Estimate the sharpness modulus of the candidate over the probe set.
pub fn estimate_sharpness_modulus(
    q: &SharpnessQuery,
    cone: &GeneratorSet,
) -> Result<ModulusEstimate> {
    let g_hat = validate_query(q, cone)?;
    let ratios: Vec<Result<f64>> = par::map_indexed(q.probes.len(), |i| {
        let p = &q.probes[i];
        let dw = level_distance(q, p)?;
        if dw.is_nan() || dw <= 0.0 {
            return Err(Error::IllPosed(format!(
                "probe {i} has zero distance to the level set"
            )));
        }
        let g_p = eval_objective(q.objective.as_ref(), p)?;
        let diff: Vec<f64> = g_p.iter().zip(&g_hat).map(|(a, b)| a - b).collect();
        Ok(dist_to_neg_cone(&diff, cone)? / dw)
    });
    let mut modulus = f64::INFINITY;
    let mut argmin = 0;
    for (i, r) in ratios.into_iter().enumerate() {
        let r = r?;
        if r < modulus {
            modulus = r;
            argmin = i;
        }
    }
    Ok(ModulusEstimate {
        modulus,
        probes: q.probes.len(),
        argmin_probe: argmin,
        probe_hash: probe_hash(&q.probes),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    /// Modulus estimate of the vector problem.
    pub tau_vector: f64,
    /// Modulus estimate of the scalarized problem `p -> f(G(p) - G(p_hat))`.
    pub tau_scalar: f64,
    /// Threshold above which the vector estimate counts as sharp.
    pub threshold: f64,
    pub hypothesis_met: bool,
    /// Sharp vector estimate must transfer to a positive scalar estimate;
    /// vacuously true when the hypothesis is not met.
    pub pass: bool,
    pub probe_hash: String,
}

/// Audit the transfer of weak sharpness from the vector problem to its
/// scalarization: if the vector modulus estimate clears the threshold, the
/// scalarized problem must show a positive modulus on the same probes.
pub fn scalar_transfer_audit(
    q: &SharpnessQuery,
    direction: &ScalarizationDirection,
    gens: &GeneratorSet,
    threshold: f64,
) -> Result<TransferReport> {
    let vector = estimate_sharpness_modulus(q, gens)?;
    let g_hat = eval_objective(q.objective.as_ref(), &q.candidate)?;
    let kernel = Scalarizer::new(direction, gens)?;

    let ratios: Vec<Result<f64>> = par::map_indexed(q.probes.len(), |i| {
        let p = &q.probes[i];
        let dw = level_distance(q, p)?;
        if dw.is_nan() || dw <= 0.0 {
            return Err(Error::IllPosed(format!(
                "probe {i} has zero distance to the level set"
            )));
        }
        let g_p = eval_objective(q.objective.as_ref(), p)?;
        let shifted: Vec<f64> = g_p.iter().zip(&g_hat).map(|(a, b)| a - b).collect();
        // The scalarized objective vanishes at the candidate, so the
        // sharpness ratio is just its value over the level-set distance.
        Ok(kernel.value(&shifted) / dw)
    });
    let mut tau_scalar = f64::INFINITY;
    for r in ratios {
        tau_scalar = tau_scalar.min(r?);
    }

    let hypothesis_met = vector.modulus > threshold;
    Ok(TransferReport {
        tau_vector: vector.modulus,
        tau_scalar,
        threshold,
        hypothesis_met,
        pass: !hypothesis_met || tau_scalar > 0.0,
        probe_hash: vector.probe_hash,
    })
}
