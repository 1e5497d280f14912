//! Candidate center sets `J`.
//!
//! Metric mode maps sampled points to their nearest facilities, so `J ⊆ F`.
//! Euclidean k-means mode instead returns means of small multisets of
//! sampled points as synthetic center coordinates.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClusteringInstance, Objective, WeightedSet};
use crate::rng::{derive_seed, stream, StreamRng};

/// Redraws allowed in [`dz_seed`] before falling back to the farthest facility.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateParams {
    /// Number of mixed draws mapped to facilities.
    pub eta: usize,
    /// Probability that a draw is proportional to weight alone.
    pub mix: f64,
    pub seed: u64,
    pub euclidean_subset_size: usize,
    pub euclidean_base_size: usize,
    /// Ceiling on the number of multiset means; above it, means are sampled.
    pub euclidean_max_candidates: usize,
}

/// `⌈(k/ε)² · ln(2 + k/ε)⌉`, at least `k`.
pub fn default_eta(k: usize, eps: f64) -> usize {
    let r = k as f64 / eps;
    ((r * r * (2.0 + r).ln()).ceil() as usize).max(k)
}

impl CandidateParams {
    pub fn new(k: usize, eps: f64, seed: u64) -> Self {
        CandidateParams {
            eta: default_eta(k, eps),
            mix: 0.5,
            seed,
            euclidean_subset_size: (2.0 / eps).ceil() as usize,
            euclidean_base_size: ((2 * k) as f64 / eps).ceil() as usize,
            euclidean_max_candidates: 4096,
        }
    }

    pub fn check(&self, k: usize) -> Result<()> {
        if self.eta < k {
            return Err(Error::InvalidConstraint(format!("eta = {} must be at least k = {k}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(Error::InvalidConstraint(format!("mix = {} must lie in [0, 1]", self.mix)));
        }
        if self.euclidean_subset_size == 0 || self.euclidean_base_size == 0 || self.euclidean_max_candidates == 0 {
            return Err(Error::InvalidConstraint("Euclidean candidate sizes must be positive".into()));
        }
        Ok(())
    }
}

/// Index sampler over `set`; `None` when every score is zero.
fn sampler(scores: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(scores.iter().copied()).ok()
}

/// `D(x, centers)^z` for every point of `set`.
fn dz_scores(inst: &ClusteringInstance, set: &WeightedSet, centers: &[usize]) -> Vec<f64> {
    set.iter()
        .map(|(p, w)| {
            let d = centers.iter().map(|&f| inst.dist(p, f)).fold(f64::INFINITY, f64::min);
            w * inst.objective.apply(d)
        })
        .collect()
}

/// Adaptive D^z seeding restricted to the points of `set`.
pub(crate) fn dz_seed_on(inst: &ClusteringInstance, set: &WeightedSet, t: usize, rng: &mut StreamRng) -> Result<Vec<usize>> {
    let nf = inst.num_facilities();
    if t > nf {
        return Err(Error::TooLarge(format!("{t} seed centers requested, only {nf} facilities")));
    }
    if t == 0 || set.is_empty() {
        return Ok(Vec::new());
    }
    let nearest: Vec<usize> = set.points.iter().map(|&p| inst.nearest_any_facility(p).0).collect();
    let by_weight = sampler(&set.weights).ok_or(Error::NonFinite("point weights"))?;
    let mut chosen = Vec::with_capacity(t);
    let mut taken = vec![false; nf];
    // Distance from each point of `set` to its nearest chosen center.
    let mut gap = vec![f64::INFINITY; set.len()];
    while chosen.len() < t {
        let scores: Vec<f64> = if chosen.is_empty() {
            set.weights.clone()
        } else {
            gap.iter().zip(&set.weights).map(|(&d, &w)| w * inst.objective.apply(d)).collect()
        };
        let dist = sampler(&scores);
        let mut pick = None;
        for _ in 0..MAX_REDRAWS {
            let idx = match &dist {
                Some(d) => d.sample(rng),
                None => by_weight.sample(rng),
            };
            if !taken[nearest[idx]] {
                pick = Some(nearest[idx]);
                break;
            }
        }
        let f = pick.unwrap_or_else(|| farthest_unchosen(inst, &chosen, &taken));
        taken[f] = true;
        chosen.push(f);
        for (g, &p) in gap.iter_mut().zip(&set.points) {
            *g = g.min(inst.dist(p, f));
        }
    }
    Ok(chosen)
}

/// Unchosen facility maximizing the distance to the chosen ones; ties go to
/// the lowest position.
fn farthest_unchosen(inst: &ClusteringInstance, chosen: &[usize], taken: &[bool]) -> usize {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for f in (0..inst.num_facilities()).filter(|&f| !taken[f]) {
        let d = chosen.iter().map(|&c| inst.facility_dist(f, c)).fold(f64::INFINITY, f64::min);
        if d > best.1 {
            best = (f, d);
        }
    }
    best.0
}

/// `t` distinct facilities chosen by adaptive D^z sampling (in selection
/// order). Deterministic given `seed`.
pub fn dz_seed(inst: &ClusteringInstance, t: usize, seed: u64) -> Result<Vec<usize>> {
    dz_seed_on(inst, &inst.full_set(), t, &mut stream(seed, &[]))
}

/// Draws `count` point positions from `set`: with probability `mix` by
/// weight, otherwise by `w · D(x, seeds)^z`.
fn mixed_draws(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    seeds: &[usize],
    count: usize,
    mix: f64,
    rng: &mut StreamRng,
) -> Result<Vec<usize>> {
    let by_weight = sampler(&set.weights).ok_or(Error::NonFinite("point weights"))?;
    let by_dz = sampler(&dz_scores(inst, set, seeds));
    Ok((0..count)
        .map(|_| {
            let uniform = rng.random_bool(mix);
            let idx = match (&by_dz, uniform) {
                (Some(d), false) => d.sample(rng),
                _ => by_weight.sample(rng),
            };
            set.points[idx]
        })
        .collect())
}

/// `J = dz_seed(k) ∪ {nearest facility of each of eta mixed draws}`, as
/// sorted, deduplicated facility positions.
pub fn build_candidates_metric(inst: &ClusteringInstance, eps: f64, params: &CandidateParams) -> Result<Vec<usize>> {
    check_eps(eps)?;
    params.check(inst.k)?;
    let set = inst.full_set();
    let seeds = dz_seed(inst, inst.k, derive_seed(params.seed, &[0]))?;
    let draws = mixed_draws(inst, &set, &seeds, params.eta, params.mix, &mut stream(params.seed, &[1]))?;
    let mut j: BTreeSet<usize> = seeds.into_iter().collect();
    j.extend(draws.into_iter().map(|p| inst.nearest_any_facility(p).0));
    Ok(j.into_iter().collect())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConstraint(format!("epsilon = {eps} must lie in (0, 1]")))
    }
}

/// Synthetic k-means candidates: means of every size-`subset_size` multiset
/// of a sampled base set. Requires Euclidean space and `z = 2`.
pub fn build_candidates_euclidean_means(
    inst: &ClusteringInstance,
    eps: f64,
    params: &CandidateParams,
) -> Result<Vec<Vec<f64>>> {
    check_eps(eps)?;
    params.check(inst.k)?;
    if !inst.space.is_euclidean() {
        return Err(Error::Incompatible("mean candidates need a Euclidean space".into()));
    }
    if inst.objective != Objective::KMeans {
        return Err(Error::Incompatible("mean candidates need z = 2".into()));
    }
    let set = inst.full_set();
    let seeds = dz_seed(inst, inst.k, derive_seed(params.seed, &[0]))?;
    let draws = mixed_draws(inst, &set, &seeds, params.euclidean_base_size, params.mix, &mut stream(params.seed, &[2]))?;
    let base: Vec<Vec<f64>> = draws
        .iter()
        .map(|&p| inst.space.coords(inst.points[p]).expect("euclidean site").to_vec())
        .collect();
    let mut rng = stream(params.seed, &[3]);
    Ok(multiset_means(&base, params.euclidean_subset_size, params.euclidean_max_candidates, &mut rng))
}

/// Distinct means of all multisets of `size` elements drawn from the distinct
/// points of `base`. When there are more than `cap` multisets, returns the
/// distinct base points plus means of random multisets (drawn from `base`
/// with multiplicity) until `cap` means are collected or the budget of
/// attempts runs out. Output is sorted lexicographically.
pub fn multiset_means<R: Rng>(base: &[Vec<f64>], size: usize, cap: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut distinct: Vec<Vec<f64>> = base.to_vec();
    distinct.sort_by(|a, b| lex(a, b));
    distinct.dedup();
    if distinct.is_empty() || size == 0 {
        return Vec::new();
    }
    let dim = distinct[0].len();
    let mut out: BTreeSet<Key> = BTreeSet::new();
    if multiset_count(distinct.len(), size).is_some_and(|c| c <= cap as u128) {
        let mut counts = vec![0usize; distinct.len()];
        enumerate_multisets(&distinct, size, 0, &mut counts, dim, &mut out);
    } else {
        out.extend(distinct.iter().cloned().map(Key));
        let mut attempts = 0usize;
        while out.len() < cap && attempts < cap.saturating_mul(4) {
            attempts += 1;
            let mut sum = vec![0.0; dim];
            for _ in 0..size {
                let p = &base[rng.random_range(0..base.len())];
                sum.iter_mut().zip(p).for_each(|(s, x)| *s += x);
            }
            out.insert(Key(sum.into_iter().map(|s| s / size as f64).collect()));
        }
    }
    out.into_iter().map(|k| k.0).collect()
}

/// `C(n + s - 1, s)`, or `None` on overflow.
fn multiset_count(n: usize, s: usize) -> Option<u128> {
    let mut c: u128 = 1;
    for i in 0..s as u128 {
        c = c.checked_mul(n as u128 - 1 + i + 1)? / (i + 1);
    }
    Some(c)
}

fn enumerate_multisets(
    points: &[Vec<f64>],
    remaining: usize,
    from: usize,
    counts: &mut [usize],
    dim: usize,
    out: &mut BTreeSet<Key>,
) {
    if remaining == 0 {
        let total: usize = counts.iter().sum();
        let mut mean = vec![0.0; dim];
        for (c, p) in counts.iter().zip(points) {
            if *c > 0 {
                mean.iter_mut().zip(p).for_each(|(m, x)| *m += *c as f64 * x);
            }
        }
        mean.iter_mut().for_each(|m| *m /= total as f64);
        out.insert(Key(mean));
        return;
    }
    for i in from..points.len() {
        counts[i] += 1;
        enumerate_multisets(points, remaining - 1, i, counts, dim, out);
        counts[i] -= 1;
    }
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Coordinates ordered by `total_cmp`, for exact deduplication.
#[derive(Debug, Clone, PartialEq)]
struct Key(Vec<f64>);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        lex(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MetricSpace;

    fn line() -> ClusteringInstance {
        let coords: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
        let space = MetricSpace::euclidean(1, coords).unwrap();
        ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), 2, Objective::KMedian)
    }

    #[test]
    fn default_eta_values() {
        // (2/0.5)^2 * ln 6 = 28.67
        assert_eq!(default_eta(2, 0.5), 29);
        assert_eq!(default_eta(3, 1.0), 15);
    }

    #[test]
    fn single_facility_seed() {
        let space = MetricSpace::euclidean(1, vec![vec![0.0], vec![3.0], vec![5.0]]).unwrap();
        let inst = ClusteringInstance::new(space, vec![0, 1], vec![1.0, 2.0], vec![2], 1, Objective::KMedian);
        assert_eq!(dz_seed(&inst, 1, 9).unwrap(), vec![0]);
        assert!(matches!(dz_seed(&inst, 2, 9), Err(Error::TooLarge(_))));
    }

    #[test]
    fn coincident_points_fall_back_to_farthest() {
        let space = MetricSpace::euclidean(1, vec![vec![0.0], vec![1.0], vec![4.0], vec![2.0]]).unwrap();
        let inst = ClusteringInstance::new(space, vec![0, 0, 0], vec![1.0; 3], vec![0, 1, 2, 3], 3, Objective::KMedian);
        let got = dz_seed(&inst, 3, 1).unwrap();
        // Site 0 first, then the farthest (site 4), then site 2 (distance 2).
        assert_eq!(got, vec![0, 2, 3]);
    }

    #[test]
    fn seeding_is_deterministic_and_distinct() {
        let inst = line();
        for seed in 0..20 {
            let a = dz_seed(&inst, 4, seed).unwrap();
            assert_eq!(a, dz_seed(&inst, 4, seed).unwrap());
            let unique: BTreeSet<_> = a.iter().collect();
            assert_eq!(unique.len(), 4);
        }
    }

    #[test]
    fn metric_candidates_on_line() {
        let inst = line();
        let params = CandidateParams::new(2, 0.5, 42);
        let j = build_candidates_metric(&inst, 0.5, &params).unwrap();
        assert_eq!(j, build_candidates_metric(&inst, 0.5, &params).unwrap());
        assert!(j.len() <= params.eta + 2 && j.windows(2).all(|w| w[0] < w[1]));
        // Recorded on the first correct run; 29 draws over 5 points with F = X.
        assert_eq!(j, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn facilities_equal_k_gives_all() {
        let space = MetricSpace::euclidean(1, vec![vec![0.0], vec![1.0], vec![7.0], vec![8.0]]).unwrap();
        let inst = ClusteringInstance::new(space, vec![0, 1, 2, 3], vec![1.0; 4], vec![0, 3], 2, Objective::KMeans);
        let j = build_candidates_metric(&inst, 0.5, &CandidateParams::new(2, 0.5, 3)).unwrap();
        assert_eq!(j, vec![0, 1]);
    }

    #[test]
    fn multiset_mean_examples() {
        let mut rng = stream(0, &[]);
        assert_eq!(multiset_means(&[vec![1.0, 2.0]], 4, 100, &mut rng), vec![vec![1.0, 2.0]]);
        let got = multiset_means(&[vec![0.0, 0.0], vec![2.0, 0.0]], 2, 100, &mut rng);
        assert_eq!(got, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert_eq!(multiset_count(2, 2), Some(3));
        assert_eq!(multiset_count(20, 10), Some(20_030_010));
    }

    #[test]
    fn capped_means_keep_base_points() {
        let base: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let got = multiset_means(&base, 10, 200, &mut stream(5, &[]));
        assert!(got.len() <= 200);
        for p in &base {
            assert!(got.contains(p));
        }
    }

    #[test]
    fn euclidean_mode_requires_kmeans() {
        let inst = line();
        let params = CandidateParams::new(2, 0.5, 1);
        assert!(matches!(build_candidates_euclidean_means(&inst, 0.5, &params), Err(Error::Incompatible(_))));
    }
}
