//! Dense lattice scans over coordinate boxes.
//!
//! These exhaustive scans back the brute-force oracles: subproblem argmin
//! checks and grid weak-efficiency tests. They are embarrassingly parallel
//! and deterministic (tie-breaking by lattice index).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::par;

/// A regular lattice over the box `[lo, hi]` with spacing `step`,
/// including both endpoints of every axis.
#[derive(Debug, Clone)]
pub struct BoxGrid {
    lo: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
}

impl BoxGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, step: f64) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if step.is_nan() || step <= 0.0 || !step.is_finite() {
            return Err(Error::IllPosed("grid step must be positive".into()));
        }
        let mut counts = Vec::with_capacity(lo.len());
        for (l, h) in lo.iter().zip(&hi) {
            if h < l {
                return Err(Error::IllPosed("grid box has hi < lo".into()));
            }
            counts.push(((h - l) / step).floor() as usize + 1);
        }
        Ok(Self { lo, step, counts })
    }

    /// Lattice with a fixed number of points per axis instead of a spacing.
    pub fn with_counts(lo: Vec<f64>, hi: Vec<f64>, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::IllPosed("need at least 2 points per axis".into()));
        }
        let span = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| h - l)
            .fold(f64::NEG_INFINITY, f64::max);
        let step = span / (points_per_axis - 1) as f64;
        let mut g = Self::new(lo, hi, step)?;
        // Uniform axis counts keep the lattice rectangular.
        g.counts = vec![points_per_axis; g.lo.len()];
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Decode a flat lattice index into coordinates (mixed-radix).
    pub fn point_into(&self, mut idx: usize, out: &mut [f64]) {
        for d in (0..self.counts.len()).rev() {
            let digit = idx % self.counts[d];
            idx /= self.counts[d];
            out[d] = self.lo[d] + digit as f64 * self.step;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.lo.len()];
        self.point_into(idx, &mut out);
        out
    }

    /// Exhaustive argmin of `f` over the lattice. The parallel path folds
    /// over index chunks with one reusable coordinate buffer per split, so
    /// the scan stays allocation-free per point.
    #[cfg(feature = "parallel")]
    pub fn argmin(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> (Vec<f64>, f64, usize) {
        let dim = self.lo.len();
        let better = |a: (usize, f64), b: (usize, f64)| -> (usize, f64) {
            if a.1.is_nan() {
                return b;
            }
            if b.1.is_nan() {
                return a;
            }
            if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        };
        let (idx, val) = (0..self.len())
            .into_par_iter()
            .with_min_len(4096)
            .fold(
                || (0usize, f64::NAN, vec![0.0; dim]),
                |(bi, bv, mut buf), i| {
                    self.point_into(i, &mut buf);
                    let v = f(&buf);
                    let (bi, bv) = better((bi, bv), (i, v));
                    (bi, bv, buf)
                },
            )
            .map(|(bi, bv, _)| (bi, bv))
            .reduce(|| (0usize, f64::NAN), better);
        (self.point(idx), val, idx)
    }

    /// Exhaustive argmin of `f` over the lattice.
    #[cfg(not(feature = "parallel"))]
    pub fn argmin(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> (Vec<f64>, f64, usize) {
        self.argmin_seq(f)
    }

    /// Sequential variant of [`BoxGrid::argmin`], kept for the bench suite.
    pub fn argmin_seq(&self, f: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64, usize) {
        let dim = self.lo.len();
        let mut buf = vec![0.0; dim];
        let (idx, val) = par::indexed_min_seq(self.len(), |i| {
            self.point_into(i, &mut buf);
            f(&buf)
        });
        (self.point(idx), val, idx)
    }

    /// True if `pred` holds at any lattice point.
    #[cfg(feature = "parallel")]
    pub fn any(&self, pred: impl Fn(&[f64]) -> bool + Sync) -> bool {
        let dim = self.lo.len();
        (0..self.len())
            .into_par_iter()
            .with_min_len(4096)
            .map_with(vec![0.0; dim], |buf, i| {
                self.point_into(i, buf);
                pred(buf)
            })
            .any(|hit| hit)
    }

    /// True if `pred` holds at any lattice point.
    #[cfg(not(feature = "parallel"))]
    pub fn any(&self, pred: impl Fn(&[f64]) -> bool + Sync) -> bool {
        let dim = self.lo.len();
        let mut buf = vec![0.0; dim];
        (0..self.len()).any(|i| {
            self.point_into(i, &mut buf);
            pred(&buf)
        })
    }
}
