//! Euclidean k-means with synthetic candidate centers built from multiset
//! means of sampled points.

use uwcoreset::candidates::CandidateParams;
use uwcoreset::cli::{generate, GeneratorConfig, GeneratorKind};
use uwcoreset::constraints::ConstraintSpec;
use uwcoreset::coreset::{build_universal_weak_coreset, CandidateSet, CoresetMode, SummaryParams};
use uwcoreset::meta::{solve_constrained, SolveOptions};

fn main() -> uwcoreset::Result<()> {
    let (k, eps) = (2, 0.5);
    let inst = generate(&GeneratorConfig { kind: GeneratorKind::PlanarBlobs, n: 400, facilities: 8, k, labels: 1, z: 2, seed: 2 })?;
    let coreset = build_universal_weak_coreset(
        &inst,
        eps,
        CoresetMode::EuclideanKmeans,
        4,
        CandidateParams { euclidean_max_candidates: 200, ..CandidateParams::new(k, eps, 0) },
        SummaryParams { per_ring: Some(15), ..SummaryParams::new(0.05, 0) },
    )?;
    if let CandidateSet::Synthetic(centers) = &coreset.candidates {
        println!("{} synthetic candidates, first {:?}", centers.len(), centers.first());
    }
    let w = inst.total_weight();
    let spec = ConstraintSpec::Balanced { lower: vec![0.4 * w; k], upper: vec![w; k] };
    let r = solve_constrained(&coreset, &inst, &spec, &SolveOptions::default())?;
    println!("balanced k-means: centers {:?}, full cost {:.1}", r.center_coords, r.cost_on_full);
    Ok(())
}
