mod common;

use proptest::prelude::*;
use uwcoreset::flowlp::{
    certify_bounded, certify_transportation, solve_bounded_transportation, solve_lp, solve_transportation,
    BoundedTransportationProblem, LinearProgram, TransportationProblem,
};

fn balanced_problem() -> impl Strategy<Value = TransportationProblem> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..20.0, m), n),
            prop::collection::vec(0.1f64..5.0, n),
            prop::collection::vec(0.01f64..1.0, m),
        )
            .prop_map(|(cost, supplies, shares)| {
                let total: f64 = supplies.iter().sum();
                let share_sum: f64 = shares.iter().sum();
                let demands = shares.iter().map(|s| s / share_sum * total).collect();
                TransportationProblem { cost, supplies, demands }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transport_matches_simplex(p in balanced_problem()) {
        let sol = solve_transportation(&p).unwrap();
        let lp = common::transport_lp(&p.cost, &p.supplies, &p.demands);
        prop_assert!(common::close(sol.objective, lp, 1e-7), "flow {} vs lp {}", sol.objective, lp);
        prop_assert!(certify_transportation(&p.cost, &sol.flow).holds(1e-7));
        for (row, s) in sol.flow.iter().zip(&p.supplies) {
            prop_assert!((row.iter().sum::<f64>() - s).abs() < 1e-9 * (1.0 + s));
        }
    }

    #[test]
    fn splitting_a_sink_changes_nothing(p in balanced_problem(), frac in 0.0f64..1.0) {
        let mut q = p.clone();
        for row in &mut q.cost {
            row.push(row[0]);
        }
        let d0 = q.demands[0];
        q.demands[0] = d0 * frac;
        q.demands.push(d0 * (1.0 - frac));
        let a = solve_transportation(&p).unwrap().objective;
        let b = solve_transportation(&q).unwrap().objective;
        prop_assert!(common::close(a, b, 1e-9));
    }

    #[test]
    fn row_shift_adds_constant(p in balanced_problem(), shift in 0.0f64..10.0) {
        let mut q = p.clone();
        q.cost[0].iter_mut().for_each(|c| *c += shift);
        let a = solve_transportation(&p).unwrap().objective;
        let b = solve_transportation(&q).unwrap().objective;
        prop_assert!(common::close(a + shift * p.supplies[0], b, 1e-9));
    }

    #[test]
    fn bounded_matches_simplex(p in balanced_problem(), lo in prop::collection::vec(0.0f64..1.0, 3), hi in prop::collection::vec(0.0f64..2.0, 3)) {
        let m = p.demands.len();
        let total: f64 = p.supplies.iter().sum();
        let lower: Vec<f64> = lo[..m].iter().map(|x| x * total / m as f64).collect();
        let upper: Vec<f64> = (0..m).map(|i| lower[i] + hi[i] * total).collect();
        let bp = BoundedTransportationProblem { cost: p.cost.clone(), supplies: p.supplies.clone(), lower: lower.clone(), upper: upper.clone() };
        let n = p.supplies.len();
        let mut lp = LinearProgram::new(p.cost.concat());
        for (s, &a) in p.supplies.iter().enumerate() {
            let mut row = vec![0.0; n * m];
            row[s * m..(s + 1) * m].iter_mut().for_each(|v| *v = 1.0);
            lp.add_eq(row, a);
        }
        for t in 0..m {
            let mut row = vec![0.0; n * m];
            (0..n).for_each(|s| row[s * m + t] = 1.0);
            lp.add_ge(row.clone(), lower[t]);
            lp.add_le(row, upper[t]);
        }
        match (solve_bounded_transportation(&bp), solve_lp(&lp)) {
            (Ok(sol), Ok(reference)) => {
                prop_assert!(common::close(sol.objective, reference.objective, 1e-7));
                prop_assert!(certify_bounded(&bp, &sol).unwrap().holds(1e-7));
                for t in 0..m {
                    prop_assert!(sol.sink_totals[t] >= lower[t] - 1e-9 && sol.sink_totals[t] <= upper[t] + 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "solvers disagree on feasibility: {:?} / {:?}", a.is_ok(), b.is_ok()),
        }
    }
}
