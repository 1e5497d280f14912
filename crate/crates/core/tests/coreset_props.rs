mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwcoreset::candidates::{build_candidates_euclidean_means, build_candidates_metric, dz_seed, CandidateParams};
use uwcoreset::coreset::{
    build_summary, build_summary_labeled, build_universal_weak_coreset, ring_decomposition, CandidateSet, CoresetMode,
    SummaryParams,
};
use uwcoreset::model::{ClusteringInstance, MetricSpace, Objective};

fn objective(z2: bool) -> Objective {
    if z2 {
        Objective::KMeans
    } else {
        Objective::KMedian
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn rings_partition_and_bound_costs(seed in any::<u64>(), n in 1usize..40, k in 1usize..4, z2 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n, 5, k, 1, objective(z2));
        let centers = dz_seed(&inst, k, seed).unwrap();
        let rd = ring_decomposition(&inst, &centers);
        let mut seen = vec![0usize; n];
        for cluster in &rd.clusters {
            let mut max_cost: f64 = 0.0;
            for ring in &cluster.rings {
                let total: f64 = ring.weights.iter().sum();
                prop_assert!((total - ring.total_weight).abs() < 1e-12);
                for &p in &ring.points {
                    seen[p] += 1;
                    let c = inst.cost(p, cluster.center);
                    max_cost = max_cost.max(c);
                    let (lo, hi) = ring.band;
                    prop_assert!(c <= hi && (c > lo || lo == 0.0), "cost {c} outside band {:?}", ring.band);
                }
            }
            if cluster.average_cost > 0.0 {
                let bound = 2 + (max_cost / cluster.average_cost).log2().ceil().max(0.0) as usize;
                prop_assert!(cluster.rings.len() <= bound);
            } else {
                prop_assert!(cluster.rings.len() <= 1);
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn summaries_conserve_weight(seed in any::<u64>(), n in 1usize..80, per_ring in 1usize..6, m in 1usize..3, z2 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n.max(m), 6, 2, m, objective(z2));
        let params = SummaryParams { per_ring: Some(per_ring), ..SummaryParams::new(0.1, seed) };
        let s = if m > 1 {
            build_summary_labeled(&inst, 20, 0.3, &params).unwrap()
        } else {
            build_summary(&inst, 20, 0.3, &params).unwrap()
        };
        let w = inst.total_weight();
        prop_assert!((s.total_weight() - w).abs() <= 1e-12 * w.max(1.0) * n as f64);
        prop_assert!(s.weights.iter().all(|&v| v > 0.0));
        prop_assert!(s.points.windows(2).all(|p| p[0] < p[1]) && s.points.iter().all(|&p| p < inst.n()));
        let (want, got) = (inst.full_set().label_totals(&inst), s.label_totals(&inst));
        for (a, b) in want.iter().zip(&got) {
            prop_assert!((a - b).abs() <= 1e-9 * w);
        }
        let again = if m > 1 { build_summary_labeled(&inst, 20, 0.3, &params) } else { build_summary(&inst, 20, 0.3, &params) };
        prop_assert_eq!(s, again.unwrap());
    }

    #[test]
    fn metric_candidates_stay_in_facilities(seed in any::<u64>(), n in 2usize..30, nf in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n, nf, 2, 1, Objective::KMedian);
        let params = CandidateParams { eta: 12, ..CandidateParams::new(2, 0.5, seed) };
        let j = build_candidates_metric(&inst, 0.5, &params).unwrap();
        prop_assert!(j.len() <= params.eta + 2 && j.len() <= nf);
        prop_assert!(j.iter().all(|&f| f < nf) && j.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(j, build_candidates_metric(&inst, 0.5, &params).unwrap());
    }
}

#[test]
fn points_on_facilities_map_to_themselves() {
    // F = X: every draw lands on the facility at the drawn point.
    let inst = common::line(2, Objective::KMedian);
    for seed in 0..10 {
        let j = build_candidates_metric(&inst, 0.5, &CandidateParams { eta: 3, ..CandidateParams::new(2, 0.5, seed) }).unwrap();
        assert!(j.iter().all(|&f| (0..5).any(|p| inst.dist(p, f) == 0.0)));
    }
}

#[test]
fn euclidean_candidates_near_centroid() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    use rand_distr::{Distribution, Normal};
    let noise = Normal::new(0.0, 1.0).unwrap();
    let coords: Vec<Vec<f64>> = (0..60).map(|_| vec![noise.sample(&mut rng), noise.sample(&mut rng)]).collect();
    let n = coords.len();
    let mut all = coords.clone();
    all.push(vec![5.0, 5.0]);
    let space = MetricSpace::euclidean(2, all).unwrap();
    let inst = ClusteringInstance::new(space, (0..n).collect(), vec![1.0; n], vec![n], 1, Objective::KMeans);
    let centroid: Vec<f64> = (0..2).map(|d| coords.iter().map(|c| c[d]).sum::<f64>() / n as f64).collect();
    let rms = (coords.iter().map(|c| (c[0] - centroid[0]).powi(2) + (c[1] - centroid[1]).powi(2)).sum::<f64>() / n as f64).sqrt();
    let j = build_candidates_euclidean_means(&inst, 1.0, &CandidateParams::new(1, 1.0, 9)).unwrap();
    let best = j
        .iter()
        .map(|c| ((c[0] - centroid[0]).powi(2) + (c[1] - centroid[1]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    assert!(best < rms, "closest candidate {best}, rms radius {rms}");
}

#[test]
fn full_coreset_metadata() {
    let inst = common::line(2, Objective::KMedian);
    let build = |inst: &ClusteringInstance| {
        build_universal_weak_coreset(inst, 0.5, CoresetMode::Metric, 1, CandidateParams::new(2, 0.5, 0), SummaryParams::new(0.1, 0))
            .unwrap()
    };
    let c = build(&inst);
    assert_eq!(c.meta.alpha, 2.0);
    // Take-all: the default per-ring count dwarfs five points.
    assert_eq!(c.summary, inst.full_set());
    assert!(matches!(c.candidates, CandidateSet::Facilities(_)));

    let mut off = common::line(2, Objective::KMedian);
    let space = MetricSpace::euclidean(1, vec![vec![0.0], vec![1.0], vec![2.0], vec![9.0], vec![10.0], vec![0.5], vec![9.5]]).unwrap();
    off.space = std::sync::Arc::new(space);
    off.facilities = vec![5, 6];
    assert_eq!(build(&off).meta.alpha, 3.0);
    off.objective = Objective::KMeans;
    assert_eq!(build(&off).meta.alpha, 9.0);
}
