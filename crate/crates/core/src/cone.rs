//! Ordering cones described by a finite generator set, and the associated
//! nonlinear scalarization.
//!
//! A generator set `Z = {z_1, .., z_r}` in `R^m` defines the cone
//! `C = { y : <y, z_j> >= 0 for all j }` and the partial order
//! `a <= b  iff  b - a in C`. For a direction `e` with `<e, z_j> > 0` for
//! every generator, the scalarization
//!
//! `f(y) = max_j <y, z_j> / <e, z_j>`
//!
//! equals `inf { t : t e in y + C }`; both routes are implemented and the
//! bisection form serves as an independent oracle for the closed-form max.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack for cone-membership comparisons. All generators are
/// l1-normalized at construction, so inner products live at unit scale.
pub const CONE_TOL: f64 = 1e-12;

/// Finite generator set of an ordering cone in `R^m`.
///
/// Generators are l1-normalized at construction; this makes membership
/// tolerances scale-free and keeps the constraint residuals of the solver
/// comparable across problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    m: usize,
    generators: Vec<Vec<f64>>,
}

impl GeneratorSet {
    /// The cone of the scalar case: `C = R_+`, `Z = {1}`.
    pub fn scalar() -> Self {
        Self {
            m: 1,
            generators: vec![vec![1.0]],
        }
    }

    /// Nonnegative orthant of `R^m`: `Z` is the canonical basis.
    pub fn orthant(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGenerator("dimension must be positive".into()));
        }
        let generators = (0..m)
            .map(|i| {
                let mut z = vec![0.0; m];
                z[i] = 1.0;
                z
            })
            .collect();
        Ok(Self { m, generators })
    }

    /// Custom generator list; each vector is l1-normalized.
    pub fn custom(generators: Vec<Vec<f64>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidGenerator("empty generator list".into()));
        }
        let m = generators[0].len();
        if m == 0 {
            return Err(Error::InvalidGenerator("zero-dimensional generator".into()));
        }
        let mut normalized = Vec::with_capacity(generators.len());
        for z in generators {
            if z.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: z.len(),
                });
            }
            if !z.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidGenerator("non-finite generator".into()));
            }
            let l1: f64 = z.iter().map(|c| c.abs()).sum();
            if l1 <= 0.0 {
                return Err(Error::InvalidGenerator("zero generator supplied".into()));
            }
            normalized.push(z.iter().map(|c| c / l1).collect());
        }
        Ok(Self {
            m,
            generators: normalized,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// True when the generators are exactly the canonical basis of `R^m`.
    pub fn is_orthant(&self) -> bool {
        self.generators.len() == self.m
            && self.generators.iter().enumerate().all(|(i, z)| {
                z.iter()
                    .enumerate()
                    .all(|(j, &c)| if i == j { c == 1.0 } else { c == 0.0 })
            })
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: y.len(),
            });
        }
        Ok(())
    }

    /// Smallest inner product of `y` against the generators, with the
    /// attaining index (lowest index on ties).
    pub fn min_inner(&self, y: &[f64]) -> Result<(f64, usize)> {
        self.check_dim(y)?;
        let mut best = f64::INFINITY;
        let mut idx = 0;
        for (j, z) in self.generators.iter().enumerate() {
            let v = dot(y, z);
            if v < best {
                best = v;
                idx = j;
            }
        }
        Ok((best, idx))
    }

    /// Largest inner product of `y` against the generators, with the
    /// attaining index (lowest index on ties).
    pub fn max_inner(&self, y: &[f64]) -> Result<(f64, usize)> {
        self.check_dim(y)?;
        let mut best = f64::NEG_INFINITY;
        let mut idx = 0;
        for (j, z) in self.generators.iter().enumerate() {
            let v = dot(y, z);
            if v > best {
                best = v;
                idx = j;
            }
        }
        Ok((best, idx))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cone membership. Non-strict tests `<y, z_j> >= -CONE_TOL` for every
/// generator; strict tests `<y, z_j> > CONE_TOL` (interior membership).
pub fn in_cone(y: &[f64], gens: &GeneratorSet, strict: bool) -> Result<bool> {
    let (min, _) = gens.min_inner(y)?;
    Ok(if strict { min > CONE_TOL } else { min >= -CONE_TOL })
}

/// Cone order: `a <= b` iff `b - a` lies in the cone (strict: interior).
pub fn leq_cone(a: &[f64], b: &[f64], gens: &GeneratorSet, strict: bool) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    in_cone(&diff, gens, strict)
}

/// A direction in the interior of the cone, i.e. `<e, z_j> > 0` for every
/// generator. Directions scheduled by the outer solver are additionally
/// unit-norm; use [`ScalarizationDirection::unit`] for those.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizationDirection {
    e: Vec<f64>,
}

impl ScalarizationDirection {
    pub fn new(e: Vec<f64>, gens: &GeneratorSet) -> Result<Self> {
        gens.check_dim(&e)?;
        if !e.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDirection("non-finite coordinate".into()));
        }
        for (j, z) in gens.generators().iter().enumerate() {
            let d = dot(&e, z);
            if d <= 0.0 {
                return Err(Error::InvalidDirection(format!(
                    "<e, z_{j}> = {d} is not positive"
                )));
            }
        }
        Ok(Self { e })
    }

    /// Normalizes `e` to unit Euclidean norm, then validates.
    pub fn unit(e: Vec<f64>, gens: &GeneratorSet) -> Result<Self> {
        let norm = dot(&e, &e).sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDirection("zero direction".into()));
        }
        Self::new(e.into_iter().map(|c| c / norm).collect(), gens)
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn is_unit(&self) -> bool {
        (dot(&self.e, &self.e).sqrt() - 1.0).abs() <= 1e-9
    }
}

/// Precomputed scalarization kernel: caches `1 / <e, z_j>` so the hot path
/// of the inner solver is a single pass over the generators.
#[derive(Debug, Clone)]
pub struct Scalarizer {
    weights: Vec<Vec<f64>>,
    inv_denom: Vec<f64>,
    e: Vec<f64>,
}

impl Scalarizer {
    pub fn new(direction: &ScalarizationDirection, gens: &GeneratorSet) -> Result<Self> {
        gens.check_dim(direction.e())?;
        let mut inv_denom = Vec::with_capacity(gens.len());
        for (j, z) in gens.generators().iter().enumerate() {
            let d = dot(direction.e(), z);
            if d <= 0.0 {
                return Err(Error::InvalidDirection(format!(
                    "<e, z_{j}> = {d} is not positive"
                )));
            }
            inv_denom.push(1.0 / d);
        }
        Ok(Self {
            weights: gens.generators().to_vec(),
            inv_denom,
            e: direction.e().to_vec(),
        })
    }

    pub fn direction(&self) -> &[f64] {
        &self.e
    }

    /// Scalarized value together with the active generator index
    /// (lowest index wins ties, for determinism).
    pub fn value_active(&self, y: &[f64]) -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut idx = 0;
        for (j, z) in self.weights.iter().enumerate() {
            let v = dot(y, z) * self.inv_denom[j];
            if v > best {
                best = v;
                idx = j;
            }
        }
        (best, idx)
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.value_active(y).0
    }

    /// Weight vector of the active piece: `z* / <e, z*>`.
    pub fn active_weights(&self, y: &[f64]) -> (Vec<f64>, usize) {
        let (_, j) = self.value_active(y);
        (self.piece_weights(j), j)
    }

    /// Weight vector of piece `j`: `z_j / <e, z_j>`.
    pub fn piece_weights(&self, j: usize) -> Vec<f64> {
        self.weights[j]
            .iter()
            .map(|c| c * self.inv_denom[j])
            .collect()
    }

    /// All piece values `<y, z_j> / <e, z_j>` in generator order.
    pub fn piece_values(&self, y: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.inv_denom)
            .map(|(z, inv)| dot(y, z) * inv)
            .collect()
    }

    pub fn num_pieces(&self) -> usize {
        self.weights.len()
    }
}

/// Closed-form scalarization `f(y) = max_j <y, z_j> / <e, z_j>`.
pub fn scalarize(y: &[f64], direction: &ScalarizationDirection, gens: &GeneratorSet) -> Result<f64> {
    scalarize_active(y, direction, gens).map(|(v, _)| v)
}

/// Closed-form scalarization plus the index of the attaining generator.
pub fn scalarize_active(
    y: &[f64],
    direction: &ScalarizationDirection,
    gens: &GeneratorSet,
) -> Result<(f64, usize)> {
    gens.check_dim(y)?;
    Ok(Scalarizer::new(direction, gens)?.value_active(y))
}

/// Independent route to the scalarization: bisection on
/// `inf { t : t e - y in C }`, bracketing by geometric growth.
///
/// Agrees with [`scalarize`] within `tol`; used as the oracle for it.
pub fn scalarize_inf_oracle(
    y: &[f64],
    direction: &ScalarizationDirection,
    gens: &GeneratorSet,
    tol: f64,
) -> Result<f64> {
    gens.check_dim(y)?;
    if tol <= 0.0 {
        return Err(Error::IllPosed("tolerance must be positive".into()));
    }
    let e = direction.e();
    let member = |t: f64| -> Result<bool> {
        let shifted: Vec<f64> = e.iter().zip(y).map(|(ec, yc)| t * ec - yc).collect();
        let (min, _) = gens.min_inner(&shifted)?;
        Ok(min >= 0.0)
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while !member(hi)? {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::IllPosed("upper bracket exceeded 2^60".into()));
        }
    }
    let mut lo = -1.0;
    grow = 0;
    while member(lo)? {
        lo *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::IllPosed("lower bracket exceeded 2^60".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if member(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
