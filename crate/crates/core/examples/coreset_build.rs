//! Build a universal weak coreset for a planar instance and reuse it for
//! several constraint families.

use std::time::Instant;

use uwcoreset::candidates::CandidateParams;
use uwcoreset::cli::{generate, GeneratorConfig, GeneratorKind};
use uwcoreset::constraints::ConstraintSpec;
use uwcoreset::coreset::{build_universal_weak_coreset, CoresetMode, SummaryParams};
use uwcoreset::meta::{solve_constrained, SolveOptions};

fn main() -> uwcoreset::Result<()> {
    let (k, eps) = (3, 0.3);
    let inst = generate(&GeneratorConfig { kind: GeneratorKind::PlanarBlobs, n: 5000, facilities: 40, k, labels: 1, z: 1, seed: 1 })?;
    let start = Instant::now();
    let coreset = build_universal_weak_coreset(
        &inst,
        eps,
        CoresetMode::Metric,
        7,
        CandidateParams { eta: 30, ..CandidateParams::new(k, eps, 0) },
        SummaryParams { per_ring: Some(20), ..SummaryParams::new(0.05, 0) },
    )?;
    println!(
        "n = {}: |J| = {}, |S| = {}, alpha = {}, built in {:.2?}",
        inst.n(),
        coreset.candidates.len(),
        coreset.summary.len(),
        coreset.meta.alpha,
        start.elapsed()
    );

    let w = inst.total_weight();
    for (name, spec) in [
        ("unconstrained", ConstraintSpec::Unconstrained),
        ("at least 30% per cluster", ConstraintSpec::Balanced { lower: vec![0.3 * w; k], upper: vec![w; k] }),
        ("at most 40% per cluster", ConstraintSpec::Balanced { lower: vec![0.0; k], upper: vec![0.4 * w; k] }),
    ] {
        let r = solve_constrained(&coreset, &inst, &spec, &SolveOptions::default())?;
        println!(
            "{name}: centers {:?}, summary cost {:.1}, full cost {:.1}, {} tuples",
            r.centers, r.cost_on_summary, r.cost_on_full, r.tuples_evaluated
        );
    }
    Ok(())
}
