//! Hadamard manifold geometry: flat Euclidean space and the hyperboloid
//! (Lorentz) model of hyperbolic space.
//!
//! Points and tangent vectors are stored in ambient coordinates. For the
//! hyperboloid `H^n` the ambient space is Minkowski `R^{n+1}` with inner
//! product `<p,q>_L = -p_0 q_0 + sum_i p_i q_i`; valid points satisfy
//! `<p,p>_L = -1` with `p_0 > 0`, and tangent vectors at `p` satisfy
//! `<p,v>_L = 0`. Both geometries have closed-form `dist`/`exp`/`log`,
//! so every operation here is exact up to rounding.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the on-manifold / in-tangent invariants.
pub const POINT_TOL: f64 = 1e-9;

/// Below this norm, `exp` returns the base point and `log` the zero vector.
const TINY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldId {
    /// Flat `R^n`.
    Euclidean(usize),
    /// Upper sheet of the unit hyperboloid in Minkowski `R^{n+1}`.
    Hyperboloid(usize),
}

impl ManifoldId {
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldId::Euclidean(n) | ManifoldId::Hyperboloid(n) => n,
        }
    }

    /// Length of the ambient coordinate vector.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldId::Euclidean(n) => n,
            ManifoldId::Hyperboloid(n) => n + 1,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, ManifoldId::Euclidean(_))
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ManifoldId::Euclidean(n) => write!(f, "euclidean({n})"),
            ManifoldId::Hyperboloid(n) => write!(f, "hyperboloid({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPoint {
    manifold: ManifoldId,
    coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    coords: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minkowski inner product `-a_0 b_0 + sum_{i>=1} a_i b_i`.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + dot(&a[1..], &b[1..])
}

pub(crate) fn metric_dot(manifold: ManifoldId, a: &[f64], b: &[f64]) -> f64 {
    match manifold {
        ManifoldId::Euclidean(_) => dot(a, b),
        ManifoldId::Hyperboloid(_) => minkowski_dot(a, b),
    }
}

impl ManifoldPoint {
    /// Validating constructor. Hyperboloid points must satisfy
    /// `<p,p>_L = -1` within [`POINT_TOL`] and have positive first
    /// coordinate.
    pub fn new(manifold: ManifoldId, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != manifold.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: manifold.ambient_dim(),
                found: coords.len(),
            });
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if let ManifoldId::Hyperboloid(_) = manifold {
            let q = minkowski_dot(&coords, &coords);
            // Tolerance relative to the ambient scale: the self-product is a
            // difference of squares of magnitude |p|^2, so an absolute bound
            // is not representable for far-out points.
            let scale = 1.0 + coords.iter().map(|c| c * c).sum::<f64>();
            if (q + 1.0).abs() > POINT_TOL * scale {
                return Err(Error::InvalidPoint(format!(
                    "Minkowski self-product {q} is not -1 within {POINT_TOL} at scale {scale:.3e}"
                )));
            }
            if coords[0] <= 0.0 {
                return Err(Error::InvalidPoint(
                    "first coordinate must be positive on the upper sheet".into(),
                ));
            }
        }
        Ok(Self { manifold, coords })
    }

    /// Lift spatial coordinates onto the manifold: identity for Euclidean,
    /// `p_0 = sqrt(1 + |x|^2)` for the hyperboloid.
    pub fn from_spatial(manifold: ManifoldId, spatial: &[f64]) -> Result<Self> {
        match manifold {
            ManifoldId::Euclidean(_) => Self::new(manifold, spatial.to_vec()),
            ManifoldId::Hyperboloid(n) => {
                if spatial.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: spatial.len(),
                    });
                }
                let mut coords = Vec::with_capacity(n + 1);
                coords.push((1.0 + dot(spatial, spatial)).sqrt());
                coords.extend_from_slice(spatial);
                Self::new(manifold, coords)
            }
        }
    }

    /// Origin of the manifold: zero vector / hyperboloid north pole.
    pub fn origin(manifold: ManifoldId) -> Self {
        match manifold {
            ManifoldId::Euclidean(n) => Self {
                manifold,
                coords: vec![0.0; n],
            },
            ManifoldId::Hyperboloid(n) => {
                let mut coords = vec![0.0; n + 1];
                coords[0] = 1.0;
                Self { manifold, coords }
            }
        }
    }

    pub fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Re-checks the on-manifold invariant (used on deserialized data).
    pub fn validate(&self) -> Result<()> {
        Self::new(self.manifold, self.coords.clone()).map(|_| ())
    }

    /// Restore the hyperboloid constraint exactly by recomputing the first
    /// coordinate from the spatial part. No-op on Euclidean points.
    fn reproject(mut self) -> Self {
        if let ManifoldId::Hyperboloid(_) = self.manifold {
            let s = dot(&self.coords[1..], &self.coords[1..]);
            self.coords[0] = (1.0 + s).sqrt();
        }
        self
    }
}

impl TangentVector {
    /// Validating constructor: hyperboloid tangents must satisfy
    /// `<p,v>_L = 0` within [`POINT_TOL`].
    pub fn new(base: ManifoldPoint, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != base.manifold.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: base.manifold.ambient_dim(),
                found: coords.len(),
            });
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidTangent("non-finite coordinate".into()));
        }
        if let ManifoldId::Hyperboloid(_) = base.manifold {
            let q = minkowski_dot(base.coords(), &coords);
            let scale = 1.0
                + base.coords().iter().map(|c| c * c).sum::<f64>()
                + coords.iter().map(|c| c * c).sum::<f64>();
            if q.abs() > POINT_TOL * scale {
                return Err(Error::InvalidTangent(format!(
                    "Minkowski product with base is {q}, not 0"
                )));
            }
        }
        Ok(Self { base, coords })
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        let n = base.manifold.ambient_dim();
        Self {
            base,
            coords: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        norm_of(self.base.manifold, &self.coords)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &TangentVector) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(Self {
            base: self.base.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Remove any component along the base point (hyperboloid drift guard).
    fn reorthogonalize(mut self) -> Self {
        if let ManifoldId::Hyperboloid(_) = self.base.manifold {
            let q = minkowski_dot(self.base.coords(), &self.coords);
            // <p,p>_L = -1, so v + <p,v>_L p is Minkowski-orthogonal to p.
            for (c, p) in self.coords.iter_mut().zip(self.base.coords()) {
                *c += q * p;
            }
        }
        self
    }
}

fn norm_of(manifold: ManifoldId, v: &[f64]) -> f64 {
    metric_dot(manifold, v, v).max(0.0).sqrt()
}

/// Hyperboloid distance pieces, computed stably.
///
/// Returns `(c, d)` where `c = <q-p, q-p>_L` is the squared Minkowski chord
/// and `d` the geodesic distance. Near coincident points the naive
/// `acosh(-<p,q>_L)` loses all precision to cancellation between ambient
/// products; the chord form keeps absolute accuracy at the scale of the
/// coordinate difference, via `d = log1p(c/2 + sqrt(c (1 + c/4)))`.
fn hyper_chord_dist(p: &[f64], q: &[f64]) -> (f64, f64) {
    let beta = -minkowski_dot(p, q);
    if beta >= 1.5 {
        let d = beta.acosh();
        (2.0 * (beta - 1.0), d)
    } else {
        let diff: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
        let c = minkowski_dot(&diff, &diff).max(0.0);
        let sc = c.sqrt();
        let d = (c / 2.0 + sc * (1.0 + c / 4.0).sqrt()).ln_1p();
        (c, d)
    }
}

/// Riemannian inner product of two tangent vectors at the same base point.
pub fn inner(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if u.base != v.base {
        return Err(Error::BaseMismatch);
    }
    Ok(metric_dot(u.base.manifold, &u.coords, &v.coords))
}

fn check_pair(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<()> {
    if p.manifold != q.manifold {
        return Err(Error::ManifoldMismatch {
            expected: p.manifold,
            found: q.manifold,
        });
    }
    p.validate()?;
    q.validate()
}

/// Riemannian distance.
pub fn dist(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<f64> {
    check_pair(p, q)?;
    Ok(match p.manifold {
        ManifoldId::Euclidean(_) => p
            .coords
            .iter()
            .zip(&q.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        ManifoldId::Hyperboloid(_) => hyper_chord_dist(&p.coords, &q.coords).1,
    })
}

/// Exponential map: endpoint of the geodesic leaving `p` with velocity `v`.
pub fn exp_map(p: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    if *p != v.base {
        return Err(Error::BaseMismatch);
    }
    let out = match p.manifold {
        ManifoldId::Euclidean(_) => ManifoldPoint {
            manifold: p.manifold,
            coords: p.coords.iter().zip(&v.coords).map(|(a, b)| a + b).collect(),
        },
        ManifoldId::Hyperboloid(_) => {
            let r = v.norm();
            if r < TINY {
                return Ok(p.clone());
            }
            let (ch, sh) = (r.cosh(), r.sinh());
            let coords = p
                .coords
                .iter()
                .zip(&v.coords)
                .map(|(pc, vc)| ch * pc + sh * vc / r)
                .collect();
            ManifoldPoint {
                manifold: p.manifold,
                coords,
            }
            .reproject()
        }
    };
    if !out.coords.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite("exponential map".into()));
    }
    Ok(out)
}

/// Inverse exponential map: initial velocity of the geodesic from `p` to `q`.
/// Satisfies `|log(p,q)| = dist(p,q)` and `exp(p, log(p,q)) = q`.
pub fn log_map(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
    check_pair(p, q)?;
    Ok(match p.manifold {
        ManifoldId::Euclidean(_) => TangentVector {
            base: p.clone(),
            coords: q.coords.iter().zip(&p.coords).map(|(b, a)| b - a).collect(),
        },
        ManifoldId::Hyperboloid(_) => {
            let (c, d) = hyper_chord_dist(&p.coords, &q.coords);
            if d < TINY {
                return Ok(TangentVector::zero(p.clone()));
            }
            // q - beta p is tangent at p with Minkowski norm sqrt(beta^2-1);
            // written via the chord as (q - p) - (c/2) p to avoid the
            // cancellation of the ambient products for nearby points.
            let denom = (c * (1.0 + c / 4.0)).sqrt();
            let scale = d / denom;
            let coords = q
                .coords
                .iter()
                .zip(&p.coords)
                .map(|(qc, pc)| scale * ((qc - pc) - 0.5 * c * pc))
                .collect();
            TangentVector {
                base: p.clone(),
                coords,
            }
            .reorthogonalize()
        }
    })
}

/// Riemannian gradient of `p -> dist(q, p)^2`, a tangent vector at `p`.
/// Equals `-2 log(p, q)`.
pub fn grad_sq_dist(q: &ManifoldPoint, p: &ManifoldPoint) -> Result<TangentVector> {
    Ok(log_map(p, q)?.scale(-2.0))
}

/// Point at parameter `t` on the geodesic from `p` (t=0) to `q` (t=1).
pub fn geodesic(p: &ManifoldPoint, q: &ManifoldPoint, t: f64) -> Result<ManifoldPoint> {
    let v = log_map(p, q)?;
    exp_map(p, &v.scale(t))
}

/// Residual of the nonpositive-curvature law-of-cosines comparison:
///
/// `d^2(p1,p2) - [d^2(p1,p3) + d^2(p3,p2) - 2 <log(p3,p1), log(p3,p2)>]`
///
/// Nonnegative on Hadamard manifolds, identically zero in flat space.
pub fn comparison_residual(
    p1: &ManifoldPoint,
    p2: &ManifoldPoint,
    p3: &ManifoldPoint,
) -> Result<f64> {
    comparison_residual_with_factor(p1, p2, p3, 2.0)
}

/// Same residual with a configurable coefficient on the inner-product term.
/// Only the coefficient 2 yields a valid comparison (see the unit tests, which
/// demonstrate that coefficient 1 fails already on flat triangles).
pub(crate) fn comparison_residual_with_factor(
    p1: &ManifoldPoint,
    p2: &ManifoldPoint,
    p3: &ManifoldPoint,
    factor: f64,
) -> Result<f64> {
    check_pair(p1, p2)?;
    let d12 = dist(p1, p2)?;
    let d13 = dist(p1, p3)?;
    let d32 = dist(p3, p2)?;
    let u = log_map(p3, p1)?;
    let v = log_map(p3, p2)?;
    let ip = inner(&u, &v)?;
    Ok(d12 * d12 - (d13 * d13 + d32 * d32 - factor * ip))
}

/// Deterministic orthonormal basis of the tangent space at `p`, built by
/// Gram-Schmidt over the projected ambient axes.
pub fn orthonormal_basis(p: &ManifoldPoint) -> Vec<TangentVector> {
    let n = p.manifold.dim();
    let amb = p.manifold.ambient_dim();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for axis in 0..amb {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; amb];
        v[axis] = 1.0;
        if let ManifoldId::Hyperboloid(_) = p.manifold {
            let s = minkowski_dot(p.coords(), &v);
            for (c, pc) in v.iter_mut().zip(p.coords()) {
                *c += s * pc;
            }
        }
        for b in &basis {
            let s = metric_dot(p.manifold, &v, b);
            for (c, bc) in v.iter_mut().zip(b) {
                *c -= s * bc;
            }
        }
        let nrm = norm_of(p.manifold, &v);
        if nrm > 1e-8 {
            for c in v.iter_mut() {
                *c /= nrm;
            }
            basis.push(v);
        }
    }
    // For points at extreme coordinates the Gram-Schmidt can lose vectors to
    // cancellation; callers that need a full basis must check the length.
    basis
        .into_iter()
        .map(|coords| TangentVector {
            base: p.clone(),
            coords,
        })
        .collect()
}

/// Random tangent vector at `p` with norm uniform in `(0, max_norm]`.
pub fn sample_tangent<R: Rng>(p: &ManifoldPoint, rng: &mut R, max_norm: f64) -> TangentVector {
    let basis = orthonormal_basis(p);
    let mut dir: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nrm = dot(&dir, &dir).sqrt();
    if nrm < 1e-9 {
        dir[0] = 1.0;
    }
    let nrm = dot(&dir, &dir).sqrt();
    let target = rng.gen_range(0.0..1.0_f64) * max_norm;
    let mut coords = vec![0.0; p.manifold().ambient_dim()];
    for (w, b) in dir.iter().zip(&basis) {
        for (c, bc) in coords.iter_mut().zip(b.coords()) {
            *c += w / nrm * target * bc;
        }
    }
    TangentVector {
        base: p.clone(),
        coords,
    }
}

/// Random point within geodesic radius `radius` of the origin.
pub fn sample_point<R: Rng>(manifold: ManifoldId, rng: &mut R, radius: f64) -> ManifoldPoint {
    let origin = ManifoldPoint::origin(manifold);
    let v = sample_tangent(&origin, rng, radius);
    exp_map(&origin, &v).expect("sampled tangent is valid")
}
