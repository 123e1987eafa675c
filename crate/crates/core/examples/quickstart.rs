//! Minimize a two-anchor objective on the hyperbolic plane and audit the
//! run.
//!
//! Run: cargo run --release --example quickstart

use geoprox::manifold::{dist, ManifoldId, ManifoldPoint};
use geoprox::problem::ProblemInstance;
use geoprox::proxpoint::{descent_audit, fejer_audit, run, OuterConfig};
use geoprox::subsolver::InnerConfig;

fn main() -> geoprox::Result<()> {
    let h2 = ManifoldId::Hyperboloid(2);
    let a1 = ManifoldPoint::from_spatial(h2, &[0.6, 0.0])?;
    let a2 = ManifoldPoint::from_spatial(h2, &[-0.4, 0.5])?;
    // F(p) = (dist(p, a1)^2, dist(p, a2)^2) under the componentwise order;
    // the weakly efficient set is the geodesic segment between the anchors.
    let instance = ProblemInstance::squared_distance(h2, vec![a1, a2])?;

    let start = ManifoldPoint::from_spatial(h2, &[1.5, 1.2])?;
    let outer = OuterConfig::default_for(2);
    let inner = InnerConfig::default();
    let trace = run(&instance, &start, &outer, &inner)?;

    println!(
        "{:?} after {} outer iterations",
        trace.status,
        trace.iterations()
    );
    for rec in &trace.records {
        println!(
            "  k={:<3} F=({:.6}, {:.6})  step={:.3e}",
            rec.k, rec.objective[0], rec.objective[1], rec.step
        );
    }

    let terminal = trace.terminal().point.clone();
    if let Some(reference) = &instance.reference {
        println!(
            "distance to the efficient segment: {:.3e}",
            reference.distance_to(&terminal)?
        );
    }

    let descent = descent_audit(&trace, &instance.generators)?;
    println!("cone descent at every step: {}", descent.passed());
    let fejer = fejer_audit(&instance, &trace, &terminal, 1e-10)?;
    println!(
        "distances to the terminal iterate nonincreasing: {} (dominates={})",
        fejer.monotone(),
        fejer.witness_dominates
    );
    let gap = dist(&trace.records[0].point, &terminal)?;
    println!("total geodesic travel bound 2*d(p0, w) = {:.6}", 2.0 * gap);
    Ok(())
}
