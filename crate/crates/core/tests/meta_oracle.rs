mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uwcoreset::constraints::{check_feasibility, voronoi_profile, ConstraintSpec, FractionBounds, LDiversityReading};
use uwcoreset::coreset::{build_universal_weak_coreset, CoresetMode, SummaryParams, WeakCoreset};
use uwcoreset::candidates::CandidateParams;
use uwcoreset::meta::{enumerate_center_tuples, solve_constrained, SolveOptions};
use uwcoreset::model::{ClusterProfile, ClusteringInstance, Objective};
use uwcoreset::oracle::brute_force_opt;
use uwcoreset::Error;

fn specs_for(rng: &mut impl Rng, inst: &ClusteringInstance) -> Vec<ConstraintSpec> {
    let w = inst.total_weight();
    let k = inst.k;
    let mut shares: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = shares.iter().sum();
    shares.iter_mut().for_each(|x| *x *= w / s);
    let mut specs = vec![
        ConstraintSpec::Unconstrained,
        ConstraintSpec::FixedProfile(ClusterProfile::Plain(shares)),
        ConstraintSpec::Balanced { lower: vec![w / (2 * k) as f64; k], upper: vec![w * 0.8; k] },
        ConstraintSpec::Balanced {
            lower: (0..k).map(|_| rng.random_range(0.0..w / k as f64)).collect(),
            upper: vec![w; k],
        },
    ];
    if inst.num_labels() == 2 {
        let alpha: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..0.3)).collect();
        let beta: Vec<f64> = alpha.iter().map(|a| (a + rng.random_range(0.2..1.0)).min(1.0)).collect();
        specs.push(ConstraintSpec::FractionBounds(FractionBounds { labels: 2, alpha, beta }));
        specs.push(ConstraintSpec::FractionBounds(FractionBounds::l_diversity(k, 2, 2.5, LDiversityReading::AtLeast)));
        specs.push(ConstraintSpec::FractionBounds(FractionBounds::l_diversity(k, 2, 1.5, LDiversityReading::AtMost)));
    }
    specs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_coreset_solve_matches_reference(seed in any::<u64>(), n in 2usize..=10, nf in 2usize..=6, k in 1usize..=2, m in 1usize..=2, z2 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objective = if z2 { Objective::KMeans } else { Objective::KMedian };
        let inst = common::random_instance(&mut rng, n, nf, k, m, objective);
        let coreset = WeakCoreset::exact(&inst);
        for spec in specs_for(&mut rng, &inst) {
            let reference = common::brute_force_reference(&inst, &spec);
            let solved = solve_constrained(&coreset, &inst, &spec, &SolveOptions::default());
            let oracle = brute_force_opt(&inst, &spec, &SolveOptions::default());
            match (solved, oracle, reference) {
                (Ok(s), Ok(o), Some(r)) => {
                    prop_assert!((s.cost_on_full - r).abs() <= 1e-7 * (1.0 + r), "{spec:?}: {} vs {r}", s.cost_on_full);
                    prop_assert!((o.cost - r).abs() <= 1e-7 * (1.0 + r));
                    prop_assert!(o.cost <= s.cost_on_full + 1e-9 * (1.0 + r));
                    let v = check_feasibility(&inst, &inst.full_set(), &s.assignment_on_full, &spec);
                    prop_assert!(v.is_empty(), "{v:?}");
                }
                (Err(Error::Infeasible(_)), Err(Error::Infeasible(_)), None) => {}
                (s, o, r) => prop_assert!(false, "{spec:?}: solve {:?} oracle {:?} reference {r:?}", s.map(|x| x.cost_on_full), o.map(|x| x.cost)),
            }
        }
    }

    #[test]
    fn worker_count_is_invisible(seed in any::<u64>(), n in 4usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n, 7, 3, 1, Objective::KMedian);
        let coreset = build_universal_weak_coreset(
            &inst, 0.5, CoresetMode::Metric, seed,
            CandidateParams::new(3, 0.5, 0),
            SummaryParams { per_ring: Some(2), ..SummaryParams::new(0.1, 0) },
        ).unwrap();
        let spec = ConstraintSpec::Balanced { lower: vec![1.0, 0.0, 0.0], upper: vec![f64::INFINITY; 3] };
        let run = |workers| solve_constrained(&coreset, &inst, &spec, &SolveOptions { workers, ..Default::default() }).map(|r| (r.centers, r.cost_on_summary.to_bits(), r.cost_on_full.to_bits()));
        prop_assert_eq!(run(1).ok(), run(4).ok());
    }

    #[test]
    fn own_voronoi_profile_matches_unconstrained(seed in any::<u64>(), n in 2usize..=8, nf in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n, nf, 2, 1, Objective::KMedian);
        let free = brute_force_opt(&inst, &ConstraintSpec::Unconstrained, &SolveOptions::default()).unwrap();
        let profile = voronoi_profile(&inst, &inst.full_set(), &free.centers);
        let fixed = brute_force_opt(&inst, &ConstraintSpec::FixedProfile(profile), &SolveOptions::default()).unwrap();
        prop_assert!((fixed.cost - free.cost).abs() <= 1e-9 * (1.0 + free.cost));
    }
}

#[test]
fn tuple_modes_match_nested_loops() {
    let j: Vec<usize> = (0..6).map(|i| 10 * i).collect();
    let mut combos = Vec::new();
    let mut perms = Vec::new();
    let mut multis = Vec::new();
    let mut products = Vec::new();
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                let t = vec![j[a], j[b], j[c]];
                products.push(t.clone());
                if a != b && b != c && a != c {
                    perms.push(t.clone());
                }
                if a < b && b < c {
                    combos.push(t.clone());
                }
                if a <= b && b <= c {
                    multis.push(t);
                }
            }
        }
    }
    assert_eq!(enumerate_center_tuples(&j, 3, false, false).unwrap(), combos);
    assert_eq!(enumerate_center_tuples(&j, 3, true, false).unwrap(), perms);
    assert_eq!(enumerate_center_tuples(&j, 3, false, true).unwrap(), multis);
    assert_eq!(enumerate_center_tuples(&j, 3, true, true).unwrap(), products);
}

#[test]
fn repeats_allow_duplicate_centers() {
    let inst = common::line(2, Objective::KMedian);
    let opts = SolveOptions { repeats: true, ..Default::default() };
    let r = solve_constrained(&WeakCoreset::exact(&inst), &inst, &ConstraintSpec::Unconstrained, &opts).unwrap();
    assert!((r.cost_on_full - 3.0).abs() < 1e-12);
    assert_eq!(r.tuples_evaluated, 15);
}
