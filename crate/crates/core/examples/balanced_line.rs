//! Capacity-constrained k-median on five points of a line, solved exactly.

use uwcoreset::constraints::{optimal_feasible_cost, ConstraintSpec};
use uwcoreset::coreset::WeakCoreset;
use uwcoreset::meta::{solve_constrained, SolveOptions};
use uwcoreset::model::{ClusteringInstance, MetricSpace, Objective};

fn main() -> uwcoreset::Result<()> {
    let coords = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
    let space = MetricSpace::euclidean(1, coords)?;
    let inst = ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), 2, Objective::KMedian).validated()?;

    let skew = ConstraintSpec::Balanced { lower: vec![4.0, 1.0], upper: vec![5.0, 5.0] };
    let fixed = optimal_feasible_cost(&inst, &inst.full_set(), &[1, 4], &skew)?;
    println!("centers at 1 and 10, first cluster holding at least 4: cost {}", fixed.cost);

    for (name, spec) in [
        ("unconstrained", ConstraintSpec::Unconstrained),
        ("between 2 and 3 per cluster", ConstraintSpec::Balanced { lower: vec![2.0; 2], upper: vec![3.0; 2] }),
        ("first cluster holds at least 4", skew),
    ] {
        let r = solve_constrained(&WeakCoreset::exact(&inst), &inst, &spec, &SolveOptions::default())?;
        println!("{name}: centers {:?}, cost {}, profile {:?}", r.center_coords, r.cost_on_full, r.profile);
    }
    Ok(())
}
