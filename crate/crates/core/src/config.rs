//! Run configuration: a single JSON document with sections
//! `{manifold, problem, cone, outer, inner, output}`. Unknown keys are
//! rejected everywhere, and every module-level invariant is validated
//! before a run starts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cone::GeneratorSet;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldId, ManifoldPoint};
use crate::problem::ProblemInstance;
use crate::proxpoint::{DirectionSchedule, LambdaSchedule, OuterConfig};
use crate::subsolver::InnerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldCfg {
    /// "euclidean" or "hyperboloid".
    pub kind: String,
    pub dim: usize,
}

impl ManifoldCfg {
    pub fn id(&self) -> Result<ManifoldId> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("manifold.dim must be at least 1".into()));
        }
        match self.kind.as_str() {
            "euclidean" => Ok(ManifoldId::Euclidean(self.dim)),
            "hyperboloid" => Ok(ManifoldId::Hyperboloid(self.dim)),
            other => Err(Error::InvalidConfig(format!(
                "unknown manifold kind: {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemCfg {
    /// Built-in problem name: "sqdist" (components `dist(p, a_i)^2`) or
    /// "nonconvex_pair" (the negative-test fixture).
    pub name: String,
    #[serde(default)]
    pub anchors: Vec<Vec<f64>>,
    pub start: Vec<f64>,
    /// Interpret anchor/start coordinates as spatial coordinates to be
    /// lifted onto the manifold (hyperboloid convenience).
    #[serde(default)]
    pub spatial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCfg {
    /// "scalar", "orthant", or "custom".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
}

impl ConeCfg {
    pub fn build(&self, m: usize) -> Result<GeneratorSet> {
        match self.kind.as_str() {
            "scalar" => {
                if m != 1 {
                    return Err(Error::InvalidConfig(format!(
                        "scalar cone requires one objective, problem has {m}"
                    )));
                }
                Ok(GeneratorSet::scalar())
            }
            "orthant" => GeneratorSet::orthant(m),
            "custom" => {
                let gens = self
                    .generators
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("custom cone needs generators".into()))?;
                let set = GeneratorSet::custom(gens)?;
                if set.m() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: set.m(),
                    });
                }
                Ok(set)
            }
            other => Err(Error::InvalidConfig(format!("unknown cone kind: {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterCfg {
    pub lambda: LambdaSchedule,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    /// Defaults to the fixed direction `(1,..,1)/sqrt(m)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<DirectionSchedule>,
    #[serde(default = "default_tol_step")]
    pub tol_step: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_lambda_max() -> f64 {
    1e6
}

fn default_tol_step() -> f64 {
    1e-7
}

fn default_max_outer() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputCfg {
    pub trace_csv: String,
    pub result_json: String,
    /// Write real wall-clock times into the trace. Off by default so trace
    /// files stay byte-reproducible run to run.
    pub timing: bool,
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self {
            trace_csv: "trace.csv".to_string(),
            result_json: "result.json".to_string(),
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldCfg,
    pub problem: ProblemCfg,
    pub cone: ConeCfg,
    pub outer: OuterCfg,
    #[serde(default)]
    pub inner: InnerConfig,
    #[serde(default)]
    pub output: OutputCfg,
}

/// Everything needed to run: validated instance, start point, schedules.
pub struct BuiltRun {
    pub instance: ProblemInstance,
    pub start: ManifoldPoint,
    pub outer: OuterConfig,
    pub inner: InnerConfig,
    pub output: OutputCfg,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn point(&self, manifold: ManifoldId, coords: &[f64]) -> Result<ManifoldPoint> {
        if self.problem.spatial {
            ManifoldPoint::from_spatial(manifold, coords)
        } else {
            ManifoldPoint::new(manifold, coords.to_vec())
        }
    }

    /// Validate the whole document and build the runnable pieces.
    pub fn build(&self) -> Result<BuiltRun> {
        let manifold = self.manifold.id()?;
        let start = self.point(manifold, &self.problem.start)?;

        let (instance, m) = match self.problem.name.as_str() {
            "sqdist" => {
                if self.problem.anchors.is_empty() {
                    return Err(Error::InvalidConfig("sqdist needs at least one anchor".into()));
                }
                let anchors = self
                    .problem
                    .anchors
                    .iter()
                    .map(|a| self.point(manifold, a))
                    .collect::<Result<Vec<_>>>()?;
                let m = anchors.len();
                let mut instance = ProblemInstance::squared_distance(manifold, anchors)?;
                instance.generators = self.cone.build(m)?;
                (instance, m)
            }
            "nonconvex_pair" => {
                if !manifold.is_euclidean() {
                    return Err(Error::InvalidConfig(
                        "nonconvex_pair is a flat-space fixture".into(),
                    ));
                }
                let mut instance = ProblemInstance::nonconvex_pair(manifold.dim())?;
                instance.generators = self.cone.build(2)?;
                (instance, 2)
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown builtin problem: {other}"
                )))
            }
        };

        let outer = OuterConfig {
            lambda: self.outer.lambda.clone(),
            lambda_max: self.outer.lambda_max,
            direction: self
                .outer
                .direction
                .clone()
                .unwrap_or(DirectionSchedule::Fixed { e: vec![1.0; m] }),
            tol_step: self.outer.tol_step,
            max_outer: self.outer.max_outer,
            seed: self.outer.seed,
        };
        // Surfaces schedule errors (positivity, bounds, direction validity)
        // before any work happens.
        outer.validate(&instance.generators)?;

        let bad = |v: f64| v.is_nan() || v < 0.0;
        let step_c = self.inner.step_c;
        if bad(self.inner.tol_opt) || bad(self.inner.tol_feas) || step_c.is_nan() || step_c <= 0.0 {
            return Err(Error::InvalidConfig(
                "inner tolerances must be nonnegative and step_c positive".into(),
            ));
        }

        Ok(BuiltRun {
            instance,
            start,
            outer,
            inner: self.inner.clone(),
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> String {
        r#"{
            "manifold": {"kind": "euclidean", "dim": 2},
            "problem": {"name": "sqdist", "anchors": [[0.0, 0.0], [1.0, 0.0]], "start": [2.0, 2.0]},
            "cone": {"kind": "orthant"},
            "outer": {"lambda": {"kind": "constant", "value": 1.0}, "seed": 7},
            "inner": {"max_iters": 2000},
            "output": {"trace_csv": "t.csv", "result_json": "r.json", "timing": false}
        }"#
        .to_string()
    }

    #[test]
    fn parse_serialize_parse_is_identity() {
        let cfg = RunConfig::from_json(&sample_json()).unwrap();
        let text = cfg.to_json().unwrap();
        let again = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = sample_json().replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn zero_lambda_rejected_with_positivity_message() {
        let bad = sample_json().replace("\"value\": 1.0", "\"value\": 0.0");
        let cfg = RunConfig::from_json(&bad).unwrap();
        let err = match cfg.build() {
            Err(e) => e.to_string(),
            Ok(_) => panic!("zero lambda accepted"),
        };
        assert!(err.contains("positive"), "message: {err}");
    }

    #[test]
    fn hyperboloid_spatial_lift() {
        let text = r#"{
            "manifold": {"kind": "hyperboloid", "dim": 2},
            "problem": {"name": "sqdist", "anchors": [[0.5, 0.0], [-0.5, 0.3]], "start": [1.0, 1.0], "spatial": true},
            "cone": {"kind": "orthant"},
            "outer": {"lambda": {"kind": "constant", "value": 1.0}}
        }"#;
        let built = RunConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(built.start.manifold(), ManifoldId::Hyperboloid(2));
        assert!(built.start.validate().is_ok());
        assert_eq!(built.instance.generators.m(), 2);
    }

    #[test]
    fn scalar_cone_requires_single_objective() {
        let bad = sample_json().replace("\"kind\": \"orthant\"", "\"kind\": \"scalar\"");
        let cfg = RunConfig::from_json(&bad).unwrap();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn custom_cone_built_and_normalized() {
        let text = sample_json().replace(
            "{\"kind\": \"orthant\"}",
            "{\"kind\": \"custom\", \"generators\": [[2.0, 0.0], [1.0, 1.0]]}",
        );
        let built = RunConfig::from_json(&text).unwrap().build().unwrap();
        assert_eq!(
            built.instance.generators.generators(),
            &[vec![1.0, 0.0], vec![0.5, 0.5]]
        );
    }
}
