//! Exact solvers for the assignment subproblems: transportation, bounded
//! transportation and small dense linear programs.

mod lp;
mod transport;

pub use lp::{solve_lp, LinearProgram, LpSolution, MAX_VARIABLES};
pub use transport::{
    certify_bounded, certify_transportation, solve_bounded_transportation, solve_transportation,
    BoundedTransportationProblem, BoundedTransportationSolution, Certificate, TransportationProblem,
    TransportationSolution,
};
