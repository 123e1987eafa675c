//! Vector objectives `F: M -> R^m` with value and Riemannian gradient
//! oracles, a small library of built-in test problems with known
//! weakly-efficient sets, and convexity/subgradient machinery.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{GeneratorSet, ScalarizationDirection, Scalarizer};
use crate::error::{Error, Result};
use crate::manifold::{
    dist, exp_map, geodesic, log_map, orthonormal_basis, sample_point, ManifoldId, ManifoldPoint,
    TangentVector,
};
use crate::par;

/// A continuously differentiable map `F: M -> R^m`.
///
/// Implementations with analytic gradients should override [`gradients`];
/// the default falls back to central geodesic finite differences (accuracy
/// around `1e-8` relative, versus machine precision for analytic oracles).
///
/// [`gradients`]: VectorObjective::gradients
pub trait VectorObjective: Send + Sync {
    fn manifold(&self) -> ManifoldId;

    /// Number of objective components `m`.
    fn num_objectives(&self) -> usize;

    fn value(&self, p: &ManifoldPoint) -> Result<Vec<f64>>;

    /// Riemannian gradients of the components, tangent at `p`.
    fn gradients(&self, p: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        fd_gradients(self, p)
    }

    /// Whether the problem declares itself convex with respect to the cone
    /// order (enables the uniqueness/descent guarantees of the solver).
    fn convexity_declared(&self) -> bool {
        false
    }
}

/// Central geodesic finite differences along an orthonormal tangent basis.
fn fd_gradients<F: VectorObjective + ?Sized>(
    objective: &F,
    p: &ManifoldPoint,
) -> Result<Vec<TangentVector>> {
    let m = objective.num_objectives();
    let basis = orthonormal_basis(p);
    if basis.len() != p.manifold().dim() {
        return Err(Error::InvalidPoint(
            "tangent basis degenerate at this point".into(),
        ));
    }
    let h = 1e-6;
    let mut partials = vec![vec![0.0; basis.len()]; m];
    for (d, b) in basis.iter().enumerate() {
        let fp = objective.value(&exp_map(p, &b.scale(h))?)?;
        let fm = objective.value(&exp_map(p, &b.scale(-h))?)?;
        for i in 0..m {
            partials[i][d] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mut grads = Vec::with_capacity(m);
    for comps in partials {
        let mut coords = vec![0.0; p.manifold().ambient_dim()];
        for (w, b) in comps.iter().zip(&basis) {
            for (c, bc) in coords.iter_mut().zip(b.coords()) {
                *c += w * bc;
            }
        }
        grads.push(TangentVector::new(p.clone(), coords)?);
    }
    Ok(grads)
}

fn check_point<F: VectorObjective + ?Sized>(objective: &F, p: &ManifoldPoint) -> Result<()> {
    if p.manifold() != objective.manifold() {
        return Err(Error::ManifoldMismatch {
            expected: objective.manifold(),
            found: p.manifold(),
        });
    }
    Ok(())
}

/// Evaluate `F(p)`, checking the manifold and finiteness of the output.
pub fn eval_objective<F: VectorObjective + ?Sized>(
    objective: &F,
    p: &ManifoldPoint,
) -> Result<Vec<f64>> {
    check_point(objective, p)?;
    let v = objective.value(p)?;
    if v.len() != objective.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: objective.num_objectives(),
            found: v.len(),
        });
    }
    if !v.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite("objective value".into()));
    }
    Ok(v)
}

/// Gradients of all components at `p`, checking the manifold.
pub fn objective_gradients<F: VectorObjective + ?Sized>(
    objective: &F,
    p: &ManifoldPoint,
) -> Result<Vec<TangentVector>> {
    check_point(objective, p)?;
    objective.gradients(p)
}

/// Subgradient of the scalarized objective `p -> f(F(p))` at `p`:
/// with `z*` the active generator of `f(F(p))`, returns
/// `(1/<e,z*>) sum_i z*_i grad F_i(p)`.
pub fn scalarized_subgradient<F: VectorObjective + ?Sized>(
    objective: &F,
    p: &ManifoldPoint,
    direction: &ScalarizationDirection,
    gens: &GeneratorSet,
) -> Result<TangentVector> {
    let values = eval_objective(objective, p)?;
    let kernel = Scalarizer::new(direction, gens)?;
    let (weights, _) = kernel.active_weights(&values);
    let grads = objective_gradients(objective, p)?;
    combine_tangents(p, &weights, &grads)
}

/// Weighted sum of tangent vectors at `p`.
pub(crate) fn combine_tangents(
    p: &ManifoldPoint,
    weights: &[f64],
    grads: &[TangentVector],
) -> Result<TangentVector> {
    let mut coords = vec![0.0; p.manifold().ambient_dim()];
    for (w, g) in weights.iter().zip(grads) {
        if *w == 0.0 {
            continue;
        }
        for (c, gc) in coords.iter_mut().zip(g.coords()) {
            *c += w * gc;
        }
    }
    TangentVector::new(p.clone(), coords)
}

// ---------------------------------------------------------------------------
// Built-in objectives
// ---------------------------------------------------------------------------

/// `F_i(p) = dist(p, a_i)^2` for a list of anchor points. On Euclidean space
/// these are the classic quadratics `|p - a_i|^2`; on the hyperboloid they
/// form a geodesically convex multi-anchor (Fermat-Weber-type) objective.
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    manifold: ManifoldId,
    anchors: Vec<ManifoldPoint>,
}

impl SquaredDistance {
    pub fn new(manifold: ManifoldId, anchors: Vec<ManifoldPoint>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::InvalidConfig("at least one anchor required".into()));
        }
        for a in &anchors {
            if a.manifold() != manifold {
                return Err(Error::ManifoldMismatch {
                    expected: manifold,
                    found: a.manifold(),
                });
            }
            a.validate()?;
        }
        Ok(Self { manifold, anchors })
    }

    pub fn anchors(&self) -> &[ManifoldPoint] {
        &self.anchors
    }
}

impl VectorObjective for SquaredDistance {
    fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    fn num_objectives(&self) -> usize {
        self.anchors.len()
    }

    fn value(&self, p: &ManifoldPoint) -> Result<Vec<f64>> {
        self.anchors
            .iter()
            .map(|a| dist(p, a).map(|d| d * d))
            .collect()
    }

    fn gradients(&self, p: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        // grad of dist(., a)^2 at p is -2 log_p(a).
        self.anchors
            .iter()
            .map(|a| log_map(p, a).map(|v| v.scale(-2.0)))
            .collect()
    }

    fn convexity_declared(&self) -> bool {
        true
    }
}

/// Deliberately non-convex fixture `F(p) = (|p|^2, -|p|^2)` on `R^n`,
/// for negative tests of the convexity audit and descent checks.
#[derive(Debug, Clone)]
pub struct NonconvexPair {
    dim: usize,
}

impl NonconvexPair {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl VectorObjective for NonconvexPair {
    fn manifold(&self) -> ManifoldId {
        ManifoldId::Euclidean(self.dim)
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn value(&self, p: &ManifoldPoint) -> Result<Vec<f64>> {
        let sq: f64 = p.coords().iter().map(|c| c * c).sum();
        Ok(vec![sq, -sq])
    }

    fn gradients(&self, p: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        let g: Vec<f64> = p.coords().iter().map(|c| 2.0 * c).collect();
        let neg: Vec<f64> = g.iter().map(|c| -c).collect();
        Ok(vec![
            TangentVector::new(p.clone(), g)?,
            TangentVector::new(p.clone(), neg)?,
        ])
    }
}

/// Objective defined by closures, for custom problems built via the library
/// API. Without a gradient closure, gradients fall back to geodesic finite
/// differences.
type ValueFn = Box<dyn Fn(&ManifoldPoint) -> Vec<f64> + Send + Sync>;
type GradFn = Box<dyn Fn(&ManifoldPoint) -> Vec<TangentVector> + Send + Sync>;

pub struct FnObjective {
    manifold: ManifoldId,
    m: usize,
    value_fn: ValueFn,
    grad_fn: Option<GradFn>,
    convex: bool,
}

impl FnObjective {
    pub fn new(
        manifold: ManifoldId,
        m: usize,
        value_fn: impl Fn(&ManifoldPoint) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            manifold,
            m,
            value_fn: Box::new(value_fn),
            grad_fn: None,
            convex: false,
        }
    }

    pub fn with_gradients(
        mut self,
        grad_fn: impl Fn(&ManifoldPoint) -> Vec<TangentVector> + Send + Sync + 'static,
    ) -> Self {
        self.grad_fn = Some(Box::new(grad_fn));
        self
    }

    pub fn declare_convex(mut self) -> Self {
        self.convex = true;
        self
    }
}

impl VectorObjective for FnObjective {
    fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    fn num_objectives(&self) -> usize {
        self.m
    }

    fn value(&self, p: &ManifoldPoint) -> Result<Vec<f64>> {
        Ok((self.value_fn)(p))
    }

    fn gradients(&self, p: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        match &self.grad_fn {
            Some(g) => Ok(g(p)),
            None => fd_gradients(self, p),
        }
    }

    fn convexity_declared(&self) -> bool {
        self.convex
    }
}

// ---------------------------------------------------------------------------
// Reference sets and problem instances
// ---------------------------------------------------------------------------

/// Known weakly-efficient set of a test problem, used by audits.
#[derive(Debug, Clone)]
pub enum ReferenceSet {
    Points(Vec<ManifoldPoint>),
    /// Geodesic segment between two points (the weak Pareto set of a pair of
    /// squared-distance objectives).
    Segment(ManifoldPoint, ManifoldPoint),
}

impl ReferenceSet {
    /// Distance from `p` to the set. For segments this minimizes the convex
    /// map `t -> dist(p, gamma(t))` by ternary search.
    pub fn distance_to(&self, p: &ManifoldPoint) -> Result<f64> {
        match self {
            ReferenceSet::Points(pts) => {
                let mut best = f64::INFINITY;
                for q in pts {
                    best = best.min(dist(p, q)?);
                }
                Ok(best)
            }
            ReferenceSet::Segment(a, b) => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    let d1 = dist(p, &geodesic(a, b, m1)?)?;
                    let d2 = dist(p, &geodesic(a, b, m2)?)?;
                    if d1 <= d2 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                dist(p, &geodesic(a, b, 0.5 * (lo + hi))?)
            }
        }
    }
}

/// A vector optimization problem: objective, ordering cone, and optional
/// ground truth used by the audits.
#[derive(Clone)]
pub struct ProblemInstance {
    pub objective: Arc<dyn VectorObjective>,
    pub generators: GeneratorSet,
    /// Known weakly-efficient set, when available.
    pub reference: Option<ReferenceSet>,
    /// A point whose objective value is expected to dominate every iterate
    /// of a run started anywhere (only available a priori for scalar
    /// problems; audits fall back to the terminal iterate otherwise).
    pub witness: Option<ManifoldPoint>,
}

impl ProblemInstance {
    pub fn new(objective: Arc<dyn VectorObjective>, generators: GeneratorSet) -> Result<Self> {
        if generators.m() != objective.num_objectives() {
            return Err(Error::DimensionMismatch {
                expected: objective.num_objectives(),
                found: generators.m(),
            });
        }
        Ok(Self {
            objective,
            generators,
            reference: None,
            witness: None,
        })
    }

    pub fn with_reference(mut self, reference: ReferenceSet) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_witness(mut self, witness: ManifoldPoint) -> Self {
        self.witness = Some(witness);
        self
    }

    /// Squared-distance instance with the orthant order. Fills in the known
    /// weakly-efficient set (the anchor for one objective, the geodesic
    /// segment between anchors for two) and, in the scalar case, the anchor
    /// as the domination witness.
    pub fn squared_distance(manifold: ManifoldId, anchors: Vec<ManifoldPoint>) -> Result<Self> {
        let m = anchors.len();
        let objective = SquaredDistance::new(manifold, anchors.clone())?;
        let gens = if m == 1 {
            GeneratorSet::scalar()
        } else {
            GeneratorSet::orthant(m)?
        };
        let mut instance = Self::new(Arc::new(objective), gens)?;
        instance.reference = match m {
            1 => Some(ReferenceSet::Points(vec![anchors[0].clone()])),
            2 => Some(ReferenceSet::Segment(anchors[0].clone(), anchors[1].clone())),
            _ => None,
        };
        if m == 1 {
            instance.witness = Some(anchors[0].clone());
        }
        Ok(instance)
    }

    pub fn nonconvex_pair(dim: usize) -> Result<Self> {
        Self::new(Arc::new(NonconvexPair::new(dim)), GeneratorSet::orthant(2)?)
    }
}

// ---------------------------------------------------------------------------
// Convexity audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub samples: usize,
    pub violations: usize,
    /// Most negative cone margin seen (a violation when below `-slack`).
    pub worst_margin: f64,
    pub worst_witness: Option<(ManifoldPoint, ManifoldPoint, f64)>,
    pub slack: f64,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Monte-Carlo audit of cone convexity: draws random geodesic segments and
/// checks `F(gamma(t))` against the chord `(1-t) F(p) + t F(q)` in the cone
/// order, with slack `1e-8`.
pub fn c_convexity_audit<F: VectorObjective + ?Sized>(
    objective: &F,
    gens: &GeneratorSet,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    let slack = 1e-8;
    let radius = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let manifold = objective.manifold();
    let cases: Vec<(ManifoldPoint, ManifoldPoint, f64)> = (0..samples)
        .map(|_| {
            let p = sample_point(manifold, &mut rng, radius);
            let q = sample_point(manifold, &mut rng, radius);
            let t = rng.gen_range(0.0..1.0);
            (p, q, t)
        })
        .collect();

    let margins: Vec<Result<f64>> = par::map_indexed(cases.len(), |i| {
        let (p, q, t) = &cases[i];
        let fp = eval_objective(objective, p)?;
        let fq = eval_objective(objective, q)?;
        let mid = geodesic(p, q, *t)?;
        let fmid = eval_objective(objective, &mid)?;
        let chord: Vec<f64> = fp
            .iter()
            .zip(&fq)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        let diff: Vec<f64> = chord.iter().zip(&fmid).map(|(c, m)| c - m).collect();
        Ok(gens.min_inner(&diff)?.0)
    });

    let mut worst = f64::INFINITY;
    let mut worst_idx = None;
    let mut violations = 0;
    for (i, m) in margins.into_iter().enumerate() {
        let m = m?;
        if m < worst {
            worst = m;
            worst_idx = Some(i);
        }
        if m < -slack {
            violations += 1;
        }
    }
    Ok(ConvexityReport {
        samples,
        violations,
        worst_margin: if samples == 0 { 0.0 } else { worst },
        worst_witness: worst_idx.map(|i| cases[i].clone()),
        slack,
    })
}

/// Verify that a claimed domination witness satisfies
/// `F(w) <= F(p)` in the cone order, within `slack`.
pub fn dominates(
    instance: &ProblemInstance,
    w: &ManifoldPoint,
    p: &ManifoldPoint,
    slack: f64,
) -> Result<bool> {
    let fw = eval_objective(instance.objective.as_ref(), w)?;
    let fp = eval_objective(instance.objective.as_ref(), p)?;
    let diff: Vec<f64> = fp.iter().zip(&fw).map(|(a, b)| a - b).collect();
    Ok(instance.generators.min_inner(&diff)?.0 >= -slack)
}

// Re-exported for audits that need the raw order check.
pub use crate::cone::leq_cone as cone_leq;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::sample_tangent;

    fn epoint(coords: &[f64]) -> ManifoldPoint {
        ManifoldPoint::new(ManifoldId::Euclidean(coords.len()), coords.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_values() {
        let f = SquaredDistance::new(
            ManifoldId::Euclidean(2),
            vec![epoint(&[0.0, 0.0]), epoint(&[1.0, 0.0])],
        )
        .unwrap();
        let v = eval_objective(&f, &epoint(&[0.0, 0.0])).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);

        let scalar = SquaredDistance::new(ManifoldId::Euclidean(2), vec![epoint(&[0.0, 0.0])]).unwrap();
        let v = eval_objective(&scalar, &epoint(&[3.0, 4.0])).unwrap();
        assert_eq!(v, vec![25.0]);
    }

    #[test]
    fn fermat_anchor_evaluation() {
        let m = ManifoldId::Hyperboloid(2);
        let a1 = ManifoldPoint::from_spatial(m, &[0.0, 0.0]).unwrap();
        let a2 = ManifoldPoint::from_spatial(m, &[1.0, 0.0]).unwrap();
        let d = dist(&a1, &a2).unwrap();
        let f = SquaredDistance::new(m, vec![a1.clone(), a2]).unwrap();
        let v = eval_objective(&f, &a1).unwrap();
        assert!(v[0].abs() < 1e-12);
        assert!((v[1] - d * d).abs() < 1e-12);
    }

    #[test]
    fn quadratic_gradients() {
        let f = SquaredDistance::new(ManifoldId::Euclidean(2), vec![epoint(&[0.0, 0.0])]).unwrap();
        let g = objective_gradients(&f, &epoint(&[1.0, 1.0])).unwrap();
        assert_eq!(g[0].coords(), &[2.0, 2.0]);
        // Stationary at the anchor.
        let g = objective_gradients(&f, &epoint(&[0.0, 0.0])).unwrap();
        assert_eq!(g[0].coords(), &[0.0, 0.0]);
    }

    #[test]
    fn builtin_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hm = ManifoldId::Hyperboloid(2);
        let objectives: Vec<Box<dyn VectorObjective>> = vec![
            Box::new(
                SquaredDistance::new(
                    ManifoldId::Euclidean(2),
                    vec![epoint(&[0.0, 0.0]), epoint(&[1.0, 0.0])],
                )
                .unwrap(),
            ),
            Box::new(
                SquaredDistance::new(
                    hm,
                    vec![
                        ManifoldPoint::from_spatial(hm, &[0.2, 0.1]).unwrap(),
                        ManifoldPoint::from_spatial(hm, &[-0.4, 0.6]).unwrap(),
                    ],
                )
                .unwrap(),
            ),
            Box::new(NonconvexPair::new(2)),
        ];
        for objective in &objectives {
            for _ in 0..30 {
                let p = sample_point(objective.manifold(), &mut rng, 1.5);
                let grads = objective_gradients(objective.as_ref(), &p).unwrap();
                let u = sample_tangent(&p, &mut rng, 1.0);
                let u = u.scale(1.0 / u.norm().max(1e-12));
                let h = 1e-5;
                let fp = eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(h)).unwrap()).unwrap();
                let fm =
                    eval_objective(objective.as_ref(), &exp_map(&p, &u.scale(-h)).unwrap()).unwrap();
                for (i, g) in grads.iter().enumerate() {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    let an = crate::manifold::inner(g, &u).unwrap();
                    assert!(
                        (fd - an).abs() <= 1e-5 * (1.0 + an.abs()),
                        "component {i}: fd {fd} vs analytic {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn scalarized_subgradient_examples() {
        // Scalar case reduces to the plain gradient.
        let scalar = SquaredDistance::new(ManifoldId::Euclidean(2), vec![epoint(&[0.0, 0.0])]).unwrap();
        let z = GeneratorSet::scalar();
        let e = ScalarizationDirection::new(vec![1.0], &z).unwrap();
        let w = scalarized_subgradient(&scalar, &epoint(&[1.0, 0.0]), &e, &z).unwrap();
        assert_eq!(w.coords(), &[2.0, 0.0]);

        // Bi-objective: active component selected by the scalarization.
        let f = SquaredDistance::new(
            ManifoldId::Euclidean(2),
            vec![epoint(&[0.0, 0.0]), epoint(&[1.0, 0.0])],
        )
        .unwrap();
        let z = GeneratorSet::orthant(2).unwrap();
        let e = ScalarizationDirection::new(vec![1.0, 1.0], &z).unwrap();
        let w = scalarized_subgradient(&f, &epoint(&[1.0, 0.0]), &e, &z).unwrap();
        assert_eq!(w.coords(), &[2.0, 0.0]);

        // Tie broken toward the lowest generator index.
        let w = scalarized_subgradient(&f, &epoint(&[0.5, 0.0]), &e, &z).unwrap();
        assert_eq!(w.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn convexity_audit_verdicts() {
        let z = GeneratorSet::orthant(2).unwrap();
        let convex = SquaredDistance::new(
            ManifoldId::Euclidean(2),
            vec![epoint(&[0.0, 0.0]), epoint(&[1.0, 0.0])],
        )
        .unwrap();
        let report = c_convexity_audit(&convex, &z, 500, 42).unwrap();
        assert!(report.passed(), "worst margin {}", report.worst_margin);

        let hm = ManifoldId::Hyperboloid(2);
        let fermat = SquaredDistance::new(
            hm,
            vec![
                ManifoldPoint::from_spatial(hm, &[0.3, 0.0]).unwrap(),
                ManifoldPoint::from_spatial(hm, &[-0.3, 0.5]).unwrap(),
            ],
        )
        .unwrap();
        let report = c_convexity_audit(&fermat, &z, 500, 42).unwrap();
        assert!(report.passed(), "worst margin {}", report.worst_margin);

        let nonconvex = NonconvexPair::new(2);
        let report = c_convexity_audit(&nonconvex, &z, 500, 42).unwrap();
        assert!(!report.passed());
        assert!(report.worst_witness.is_some());
    }

    #[test]
    fn segment_distance() {
        let a = epoint(&[0.0, 0.0]);
        let b = epoint(&[1.0, 0.0]);
        let seg = ReferenceSet::Segment(a, b);
        assert!((seg.distance_to(&epoint(&[0.5, 2.0])).unwrap() - 2.0).abs() < 1e-9);
        assert!((seg.distance_to(&epoint(&[2.0, 0.0])).unwrap() - 1.0).abs() < 1e-9);
        assert!(seg.distance_to(&epoint(&[0.25, 0.0])).unwrap() < 1e-9);
    }
}
