//! Randomized invariants over the geometry, the scalarization, the
//! sharpness measures, and the file formats.

use proptest::prelude::*;
use std::sync::Arc;

use geoprox::cone::{in_cone, scalarize, scalarize_inf_oracle, GeneratorSet, ScalarizationDirection};
use geoprox::config::RunConfig;
use geoprox::manifold::{
    comparison_residual, dist, exp_map, geodesic, log_map, ManifoldId, ManifoldPoint,
};
use geoprox::problem::FnObjective;
use geoprox::sharpness::{dist_to_neg_cone, estimate_sharpness_modulus, LevelSet, SharpnessQuery};
use geoprox::trace_io::{csv_to_rows, rows_to_csv, CsvRow};

fn hyper_point(spatial: &[f64]) -> ManifoldPoint {
    ManifoldPoint::from_spatial(ManifoldId::Hyperboloid(spatial.len()), spatial).unwrap()
}

fn epoint(coords: &[f64]) -> ManifoldPoint {
    ManifoldPoint::new(ManifoldId::Euclidean(coords.len()), coords.to_vec()).unwrap()
}

fn spatial2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exp_log_round_trip_hyperboloid(p in spatial2(), dir in spatial2(), len in 0.0..10.0f64) {
        let p = hyper_point(&p);
        let basis = geoprox::manifold::orthonormal_basis(&p);
        let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt().max(1e-9);
        let v = basis[0]
            .scale(len * dir[0] / norm)
            .add(&basis[1].scale(len * dir[1] / norm))
            .unwrap();
        let q = exp_map(&p, &v).unwrap();
        let w = log_map(&p, &q).unwrap();
        let back = exp_map(&p, &w).unwrap();
        prop_assert!(dist(&back, &q).unwrap() <= 1e-8);
        prop_assert!((w.norm() - dist(&p, &q).unwrap()).abs() <= 1e-9);
        prop_assert!((dist(&p, &q).unwrap() - v.norm()).abs() <= 1e-9 * (1.0 + len));
    }

    #[test]
    fn comparison_residual_signs(a in spatial2(), b in spatial2(), c in spatial2()) {
        let (p1, p2, p3) = (hyper_point(&a), hyper_point(&b), hyper_point(&c));
        prop_assert!(comparison_residual(&p1, &p2, &p3).unwrap() >= -1e-9);
        let (q1, q2, q3) = (epoint(&a), epoint(&b), epoint(&c));
        prop_assert!(comparison_residual(&q1, &q2, &q3).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn squared_distance_strongly_convex_along_geodesics(
        q in spatial2(), a in spatial2(), b in spatial2(), t in 0.0..1.0f64
    ) {
        for (q, a, b) in [
            (hyper_point(&q), hyper_point(&a), hyper_point(&b)),
            (epoint(&q), epoint(&a), epoint(&b)),
        ] {
            let gt = geodesic(&a, &b, t).unwrap();
            let lhs = dist(&q, &gt).unwrap().powi(2);
            let rhs = (1.0 - t) * dist(&q, &a).unwrap().powi(2)
                + t * dist(&q, &b).unwrap().powi(2)
                - t * (1.0 - t) * dist(&a, &b).unwrap().powi(2);
            prop_assert!(lhs <= rhs + 1e-8);
        }
    }

    #[test]
    fn scalarization_affine_and_monotone(
        y in prop::collection::vec(-5.0..5.0f64, 2),
        c in prop::collection::vec(0.0..3.0f64, 2),
        alpha in -3.0..3.0f64,
        t in 0.01..4.0f64,
    ) {
        let gens = GeneratorSet::orthant(2).unwrap();
        let e = ScalarizationDirection::unit(vec![1.0, 1.0], &gens).unwrap();
        let moved: Vec<f64> = y.iter().zip(e.e()).map(|(yc, ec)| t * yc + alpha * ec).collect();
        let lhs = scalarize(&moved, &e, &gens).unwrap();
        let rhs = t * scalarize(&y, &e, &gens).unwrap() + alpha;
        prop_assert!((lhs - rhs).abs() <= 1e-10);

        // c has nonnegative coordinates, so it lies in the orthant cone.
        let shifted: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a + b).collect();
        prop_assert!(
            scalarize(&y, &e, &gens).unwrap() <= scalarize(&shifted, &e, &gens).unwrap() + 1e-12
        );
    }

    #[test]
    fn scalarization_routes_agree(y in prop::collection::vec(-5.0..5.0f64, 3)) {
        let gens = GeneratorSet::orthant(3).unwrap();
        let e = ScalarizationDirection::unit(vec![1.0, 2.0, 1.0], &gens).unwrap();
        let closed = scalarize(&y, &e, &gens).unwrap();
        let oracle = scalarize_inf_oracle(&y, &e, &gens, 1e-8).unwrap();
        prop_assert!((closed - oracle).abs() <= 2e-8);

        if closed.abs() > 1e-9 {
            let neg: Vec<f64> = y.iter().map(|c| -c).collect();
            prop_assert_eq!(closed < 0.0, in_cone(&neg, &gens, false).unwrap());
        }
    }

    #[test]
    fn neg_cone_distance_is_projection_residual(
        y in prop::collection::vec(-2.0..2.0f64, 3),
        z in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let orthant = GeneratorSet::orthant(3).unwrap();
        let dy = dist_to_neg_cone(&y, &orthant).unwrap();
        let neg: Vec<f64> = y.iter().map(|c| -c).collect();
        prop_assert_eq!(dy <= 1e-12, in_cone(&neg, &orthant, false).unwrap());
        let dz = dist_to_neg_cone(&z, &orthant).unwrap();
        let gap: f64 = y.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!((dy - dz).abs() <= gap + 1e-12);
    }

    #[test]
    fn modulus_monotone_under_probe_refinement(
        radii in prop::collection::vec(0.01..5.0f64, 2..6),
        extra in prop::collection::vec(0.01..5.0f64, 1..4),
    ) {
        let objective: Arc<dyn geoprox::VectorObjective> =
            Arc::new(FnObjective::new(ManifoldId::Euclidean(2), 1, |p| {
                vec![p.coords().iter().map(|c| c * c).sum::<f64>().sqrt()]
            }));
        let probes = |rs: &[f64]| -> Vec<ManifoldPoint> {
            rs.iter()
                .enumerate()
                .map(|(i, r)| {
                    let a = 0.9 * i as f64;
                    epoint(&[r * a.cos(), r * a.sin()])
                })
                .collect()
        };
        let orthant = GeneratorSet::orthant(1).unwrap();
        let query = |pts: Vec<ManifoldPoint>| SharpnessQuery {
            objective: objective.clone(),
            candidate: epoint(&[0.0, 0.0]),
            level_set: LevelSet::Samples(vec![epoint(&[0.0, 0.0])]),
            probes: pts,
        };
        let base = estimate_sharpness_modulus(&query(probes(&radii)), &orthant).unwrap();
        let mut all = radii.clone();
        all.extend(extra);
        let refined = estimate_sharpness_modulus(&query(probes(&all)), &orthant).unwrap();
        prop_assert!(refined.modulus <= base.modulus + 1e-15);
    }

    #[test]
    fn csv_rows_round_trip(
        rows in prop::collection::vec(
            (
                0usize..100,
                prop::collection::vec(-1e6..1e6f64, 2),
                prop::collection::vec(-1e6..1e6f64, 3),
                0usize..10_000,
            ),
            1..8,
        )
    ) {
        let rows: Vec<CsvRow> = rows
            .into_iter()
            .enumerate()
            .map(|(k, (iters, objective, coords, extra))| CsvRow {
                k,
                step: objective[0] / 3.0,
                f_value: objective[1] * 7.0,
                feas_residual: -objective[0].abs() * 1e-12,
                inner_iters: iters + extra,
                wall_ms: 0.0,
                objective,
                coords,
            })
            .collect();
        let text = rows_to_csv(&rows).unwrap();
        let parsed = csv_to_rows(&text).unwrap();
        prop_assert_eq!(rows_to_csv(&parsed).unwrap(), text);
        for (a, b) in rows.iter().zip(&parsed) {
            prop_assert_eq!(a.step.to_bits(), b.step.to_bits());
            prop_assert_eq!(a.f_value.to_bits(), b.f_value.to_bits());
            for (x, y) in a.coords.iter().zip(&b.coords) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn config_round_trip_identity(
        lambda in 0.001..100.0f64,
        seed in any::<u64>(),
        tol in 1e-10..1e-3f64,
        anchors in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..4),
        start in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        let cone = if anchors.len() == 1 { "scalar" } else { "orthant" };
        let text = serde_json::json!({
            "manifold": {"kind": "euclidean", "dim": 2},
            "problem": {"name": "sqdist", "anchors": anchors, "start": start},
            "cone": {"kind": cone},
            "outer": {"lambda": {"kind": "constant", "value": lambda}, "seed": seed, "tol_step": tol},
        })
        .to_string();
        let cfg = RunConfig::from_json(&text).unwrap();
        let serialized = cfg.to_json().unwrap();
        let again = RunConfig::from_json(&serialized).unwrap();
        prop_assert_eq!(cfg, again);
    }
}
