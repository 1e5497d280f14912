//! Fair clustering with per-label fraction bounds and l-diversity.

use uwcoreset::constraints::{ConstraintSpec, FractionBounds, LDiversityReading};
use uwcoreset::coreset::WeakCoreset;
use uwcoreset::meta::{solve_constrained, SolveOptions};
use uwcoreset::model::{ClusteringInstance, Labels, MetricSpace, Objective};

fn main() -> uwcoreset::Result<()> {
    let coords = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
    let space = MetricSpace::euclidean(1, coords)?;
    let inst = ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), 2, Objective::KMedian)
        .with_labels(Labels::from_vec(vec![0, 0, 0, 1, 1]))
        .validated()?;
    let exact = WeakCoreset::exact(&inst);

    let specs = [
        ("unconstrained", ConstraintSpec::Unconstrained),
        ("each label between 20% and 80%", ConstraintSpec::FractionBounds(FractionBounds::per_cluster(&[(0.2, 0.8), (0.2, 0.8)], 2))),
        ("2.5-diverse, every label at least 40% of each cluster", ConstraintSpec::FractionBounds(FractionBounds::l_diversity(2, 2, 2.5, LDiversityReading::AtLeast))),
        ("1.5-diverse, no label above 2/3 of a cluster", ConstraintSpec::FractionBounds(FractionBounds::l_diversity(2, 2, 1.5, LDiversityReading::AtMost))),
    ];
    for (name, spec) in specs {
        match solve_constrained(&exact, &inst, &spec, &SolveOptions::default()) {
            Ok(r) => println!("{name}: centers {:?}, cost {:.4}", r.center_coords, r.cost_on_full),
            Err(e) => println!("{name}: {e}"),
        }
    }
    Ok(())
}
