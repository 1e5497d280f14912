//! Exact brute-force optima and empirical checks of the two coreset
//! properties.

use rand::distr::Distribution;
use rand::seq::index;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{
    optimal_feasible_cost, profile_cost, voronoi_labeled_profile, voronoi_profile, ConstraintSpec,
};
use crate::coreset::WeakCoreset;
use crate::error::Result;
use crate::meta::{search, SolveOptions};
use crate::model::{Assignment, ClusterProfile, ClusteringInstance};
use crate::rng::{stream, StreamRng};

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// Facility positions.
    pub centers: Vec<usize>,
    pub cost: f64,
    pub assignment: Assignment,
    pub profile: ClusterProfile,
    pub tuples_evaluated: u128,
}

/// Exact minimum of `Ψ(X, C)` over all admissible tuples from `F`, with the
/// same tuple-mode rule as [`crate::meta::solve_constrained`].
pub fn brute_force_opt(inst: &ClusteringInstance, spec: &ConstraintSpec, opts: &SolveOptions) -> Result<OracleResult> {
    let all: Vec<usize> = (0..inst.num_facilities()).collect();
    let set = inst.full_set();
    let found = search(inst, &set, &all, spec, opts.mode(spec), opts)?;
    let sol = optimal_feasible_cost(inst, &set, &found.centers, spec)?;
    Ok(OracleResult {
        centers: found.centers,
        cost: sol.cost,
        assignment: sol.assignment,
        profile: sol.profile,
        tuples_evaluated: found.evaluated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub centers: Vec<usize>,
    pub profile: ClusterProfile,
    pub cost_full: f64,
    pub cost_summary: f64,
    /// `cost_full / cost_summary`; 1 when both vanish.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub passed: usize,
    pub pass_fraction: f64,
    /// Ratio farthest from 1.
    pub worst_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Trials pass when the ratio lies in `[1 - threshold, 1 + threshold]`.
    pub threshold: f64,
    pub required_fraction: f64,
    pub verdict: bool,
    pub records: Vec<TrialRecord>,
}

impl VerificationReport {
    fn from_records(records: Vec<TrialRecord>, threshold: f64, required_fraction: f64) -> Self {
        let trials = records.len();
        let passed = records.iter().filter(|r| (r.ratio - 1.0).abs() <= threshold).count();
        let pass_fraction = if trials == 0 { 1.0 } else { passed as f64 / trials as f64 };
        let worst_ratio = records
            .iter()
            .map(|r| r.ratio)
            .fold(1.0, |w, r| if (r - 1.0).abs() > (w - 1.0f64).abs() { r } else { w });
        VerificationReport {
            trials,
            passed,
            pass_fraction,
            worst_ratio,
            min_ratio: records.iter().map(|r| r.ratio).fold(1.0, f64::min),
            max_ratio: records.iter().map(|r| r.ratio).fold(1.0, f64::max),
            threshold,
            required_fraction,
            verdict: pass_fraction >= required_fraction,
            records,
        }
    }
}

/// `k` i.i.d. exponentials normalized to sum to `total`.
fn random_split(total: f64, k: usize, rng: &mut StreamRng) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|d| total * d / sum).collect()
}

/// Compares `cost_z(X, w, C, Γ)` with `cost_z(S, v, C, Γ)` on `trials` random
/// pairs: `C` is a uniform `k`-subset of `J`; `Γ` is the Voronoi profile of
/// `C` on `X` for even trials and a random consistent profile for odd ones.
/// Profiles are per label when the coreset was built per label.
pub fn verify_property_b(
    inst: &ClusteringInstance,
    coreset: &WeakCoreset,
    trials: usize,
    threshold: f64,
    required_fraction: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let (resolved, j) = coreset.resolve(inst)?;
    let full = resolved.full_set();
    let labeled = coreset.meta.labeled && resolved.labels.is_some();
    let k = resolved.k.min(j.len());
    let records: Result<Vec<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, &[t as u64]);
            let mut picks = index::sample(&mut rng, j.len(), k).into_vec();
            picks.sort_unstable();
            let mut centers: Vec<usize> = picks.into_iter().map(|i| j[i]).collect();
            // Fewer candidates than k: repeat the last one.
            centers.resize(resolved.k, *centers.last().expect("nonempty J"));
            let profile = match (t % 2 == 0, labeled) {
                (true, false) => voronoi_profile(&resolved, &full, &centers),
                (true, true) => voronoi_labeled_profile(&resolved, &full, &centers),
                (false, false) => ClusterProfile::Plain(random_split(full.total_weight(), resolved.k, &mut rng)),
                (false, true) => {
                    let m = resolved.num_labels();
                    let totals = full.label_totals(&resolved);
                    let cols: Vec<Vec<f64>> =
                        (0..m).map(|l| random_split(totals.get(l).copied().unwrap_or(0.0), resolved.k, &mut rng)).collect();
                    let values = (0..resolved.k).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
                    ClusterProfile::Labeled { labels: m, values }
                }
            };
            // Random profiles are scaled to the summary's own weights.
            let summary_profile = rescale(&profile, &full.label_totals(&resolved), &coreset.summary.label_totals(&resolved));
            let (cost_full, _) = profile_cost(&resolved, &full, &centers, &profile)?;
            let (cost_summary, _) = profile_cost(&resolved, &coreset.summary, &centers, &summary_profile)?;
            let ratio = if cost_summary == 0.0 {
                if cost_full == 0.0 { 1.0 } else { f64::INFINITY }
            } else {
                cost_full / cost_summary
            };
            Ok(TrialRecord { centers, profile, cost_full, cost_summary, ratio })
        })
        .collect();
    Ok(VerificationReport::from_records(records?, threshold, required_fraction))
}

/// Rescales `profile` from label totals `from` to label totals `to`, which
/// agree up to floating-point rounding.
fn rescale(profile: &ClusterProfile, from: &[f64], to: &[f64]) -> ClusterProfile {
    let factor = |l: usize| {
        let (a, b) = (from.get(l).copied().unwrap_or(0.0), to.get(l).copied().unwrap_or(0.0));
        if a > 0.0 { b / a } else { 1.0 }
    };
    match profile {
        ClusterProfile::Plain(v) => {
            let (a, b): (f64, f64) = (from.iter().sum(), to.iter().sum());
            let f = if a > 0.0 { b / a } else { 1.0 };
            ClusterProfile::Plain(v.iter().map(|x| x * f).collect())
        }
        ClusterProfile::Labeled { labels, values } => ClusterProfile::Labeled {
            labels: *labels,
            values: values.iter().enumerate().map(|(i, x)| x * factor(i % labels)).collect(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyAReport {
    /// Best tuple from `J` on the full point set (resolved facility positions).
    pub centers_from_j: Vec<usize>,
    pub cost_from_j: f64,
    pub optimal_centers: Vec<usize>,
    pub optimal_cost: f64,
    /// `cost_from_j / optimal_cost`; 1 when both vanish.
    pub ratio: f64,
    /// `α + ε`
    pub bound: f64,
    pub holds: bool,
}

/// Ratio of the best feasible cost achievable with centers from `J` to the
/// exact optimum over `F`, both on `(X, w)`.
pub fn verify_property_a(
    inst: &ClusteringInstance,
    coreset: &WeakCoreset,
    spec: &ConstraintSpec,
    opts: &SolveOptions,
) -> Result<PropertyAReport> {
    let opt = brute_force_opt(inst, spec, opts)?;
    let (resolved, j) = coreset.resolve(inst)?;
    let best = search(&resolved, &resolved.full_set(), &j, spec, opts.mode(spec), opts)?;
    let ratio = if opt.cost == 0.0 {
        if best.cost == 0.0 { 1.0 } else { f64::INFINITY }
    } else {
        best.cost / opt.cost
    };
    let bound = coreset.meta.alpha + coreset.meta.epsilon;
    Ok(PropertyAReport {
        centers_from_j: best.centers,
        cost_from_j: best.cost,
        optimal_centers: opt.centers,
        optimal_cost: opt.cost,
        ratio,
        bound,
        holds: ratio <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::CandidateSet;
    use crate::error::Error;
    use crate::model::{MetricSpace, Objective};

    fn line(k: usize) -> ClusteringInstance {
        let coords: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
        let space = MetricSpace::euclidean(1, coords).unwrap();
        ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), k, Objective::KMedian)
    }

    #[test]
    fn brute_force_examples() {
        let opts = SolveOptions::default();
        let r = brute_force_opt(&line(2), &ConstraintSpec::Unconstrained, &opts).unwrap();
        assert!((r.cost - 3.0).abs() < 1e-12);
        let r = brute_force_opt(&line(1), &ConstraintSpec::Unconstrained, &opts).unwrap();
        assert_eq!(r.centers, vec![2]);
        assert!((r.cost - 18.0).abs() < 1e-12);
        let r = brute_force_opt(&line(5), &ConstraintSpec::Unconstrained, &opts).unwrap();
        assert_eq!(r.cost, 0.0);
        let tight = SolveOptions { ceiling: 3, ..opts };
        assert!(matches!(
            brute_force_opt(&line(2), &ConstraintSpec::Unconstrained, &tight),
            Err(Error::CeilingExceeded { .. })
        ));
    }

    #[test]
    fn identical_sets_give_unit_ratios() {
        let inst = line(2);
        let report = verify_property_b(&inst, &WeakCoreset::exact(&inst), 40, 0.01, 1.0, 5).unwrap();
        assert_eq!(report.trials, 40);
        assert_eq!(report.passed, 40);
        assert!(report.verdict);
        assert!(report.records.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
        assert!((report.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_splits_are_consistent() {
        let mut rng = stream(1, &[]);
        let s = random_split(5.0, 3, &mut rng);
        assert!((s.iter().sum::<f64>() - 5.0).abs() < 1e-12 && s.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn property_a_ratios() {
        let inst = line(2);
        let exact = WeakCoreset::exact(&inst);
        let r = verify_property_a(&inst, &exact, &ConstraintSpec::Unconstrained, &SolveOptions::default()).unwrap();
        assert_eq!(r.ratio, 1.0);

        let mut far = exact.clone();
        far.candidates = CandidateSet::Facilities(vec![0, 3]);
        far.meta.alpha = 2.0;
        let r = verify_property_a(&inst, &far, &ConstraintSpec::Unconstrained, &SolveOptions::default()).unwrap();
        // Centers 0 and 9: cost 1 + 2 + 1 = 4.
        assert!((r.ratio - 4.0 / 3.0).abs() < 1e-12);
        assert!(r.holds);
    }
}
