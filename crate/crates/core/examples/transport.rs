//! Solve a small transportation problem and check its dual certificate.

use uwcoreset::flowlp::{certify_transportation, solve_bounded_transportation, solve_transportation};
use uwcoreset::flowlp::{BoundedTransportationProblem, TransportationProblem};

fn main() -> uwcoreset::Result<()> {
    let cost = vec![vec![1.0, 4.0], vec![3.0, 1.0], vec![2.0, 2.0]];
    let p = TransportationProblem { cost: cost.clone(), supplies: vec![2.0, 1.0, 1.0], demands: vec![1.5, 2.5] };
    let sol = solve_transportation(&p)?;
    println!("fixed demands: cost {:.3}", sol.objective);
    for (s, row) in sol.flow.iter().enumerate() {
        println!("  source {s}: {row:?}");
    }
    let cert = certify_transportation(&p.cost, &sol.flow);
    println!("  certificate holds: {}", cert.holds(1e-9));

    let bounded = BoundedTransportationProblem { cost, supplies: vec![2.0, 1.0, 1.0], lower: vec![1.0, 0.0], upper: vec![3.0, f64::INFINITY] };
    let sol = solve_bounded_transportation(&bounded)?;
    println!("bounded sinks: cost {:.3}, totals {:?}", sol.objective, sol.sink_totals);
    Ok(())
}
