//! Empirical checks of both coreset guarantees on a labeled instance.

use uwcoreset::candidates::CandidateParams;
use uwcoreset::cli::{generate, GeneratorConfig, GeneratorKind};
use uwcoreset::constraints::{ConstraintSpec, FractionBounds, LDiversityReading};
use uwcoreset::coreset::{build_universal_weak_coreset, CoresetMode, SummaryParams};
use uwcoreset::meta::SolveOptions;
use uwcoreset::oracle::{verify_property_a, verify_property_b};

fn main() -> uwcoreset::Result<()> {
    let (k, eps) = (2, 0.3);
    let inst = generate(&GeneratorConfig { kind: GeneratorKind::PlanarBlobs, n: 300, facilities: 10, k, labels: 2, z: 1, seed: 5 })?;
    let coreset = build_universal_weak_coreset(
        &inst,
        eps,
        CoresetMode::Metric,
        3,
        CandidateParams { eta: 6, ..CandidateParams::new(k, eps, 0) },
        SummaryParams { per_ring: Some(10), ..SummaryParams::new(0.05, 0) },
    )?;
    println!("|J| = {}, |S| = {} of {}", coreset.candidates.len(), coreset.summary.len(), inst.n());

    let b = verify_property_b(&inst, &coreset, 200, eps, 0.95, 1)?;
    println!(
        "cost preservation: {:.1}% of {} profiles within 1 +- {eps}, ratios in [{:.3}, {:.3}]",
        100.0 * b.pass_fraction,
        b.trials,
        b.min_ratio,
        b.max_ratio
    );

    let spec = ConstraintSpec::FractionBounds(FractionBounds::l_diversity(k, 2, 2.5, LDiversityReading::AtLeast));
    let a = verify_property_a(&inst, &coreset, &spec, &SolveOptions::default())?;
    println!("best tuple in J: ratio {:.4} to the optimum, bound {}, holds {}", a.ratio, a.bound, a.holds);
    Ok(())
}
