//! Weighted summaries `(S, v)` and universal weak coresets `(J, S, v)`.
//!
//! The summary is stratified sampling over a ring decomposition around a D^z
//! seed: every ring keeps its exact total weight, either by keeping all of
//! its points or by `s` i.i.d. weighted draws each carrying `w(R) / s`.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{build_candidates_euclidean_means, build_candidates_metric, dz_seed_on, CandidateParams};
use crate::error::{Error, Result};
use crate::model::{ClusteringInstance, Objective, WeightedSet};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    /// Point positions, ascending.
    pub points: Vec<usize>,
    pub weights: Vec<f64>,
    pub total_weight: f64,
    /// Cost band `(low, high]` in units of `D^z`; the inner ring is `[0, Δ]`.
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRings {
    /// Facility position of the seed center.
    pub center: usize,
    /// `Δ`: weighted average cost of the cluster.
    pub average_cost: f64,
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingDecomposition {
    pub clusters: Vec<ClusterRings>,
}

impl RingDecomposition {
    pub fn ring_count(&self) -> usize {
        self.clusters.iter().map(|c| c.rings.len()).sum()
    }
}

/// Ring index of cost `c` in a cluster with average cost `delta > 0`:
/// 0 for `c <= Δ`, else the least `j` with `c <= 2^j Δ`.
fn ring_index(c: f64, delta: f64) -> usize {
    if c <= delta {
        return 0;
    }
    let mut j = (c / delta).log2().ceil().max(1.0) as usize;
    while j > 1 && c <= delta * 2f64.powi(j as i32 - 1) {
        j -= 1;
    }
    while c > delta * 2f64.powi(j as i32) {
        j += 1;
    }
    j
}

fn band(j: usize, delta: f64) -> (f64, f64) {
    if j == 0 {
        (0.0, delta)
    } else {
        (delta * 2f64.powi(j as i32 - 1), delta * 2f64.powi(j as i32))
    }
}

/// Rings of every cluster (points assigned to their nearest center of
/// `centers`, ties to the lowest cluster index). Empty rings are omitted.
/// With `max_rings`, rings past that many per cluster merge into the last.
pub(crate) fn ring_decomposition_on(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    centers: &[usize],
    max_rings: Option<usize>,
) -> RingDecomposition {
    let k = centers.len();
    let mut members: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); k];
    for (p, w) in set.iter() {
        let (i, c) = centers
            .iter()
            .map(|&f| inst.cost(p, f))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, c)| if c < best.1 { (i, c) } else { best });
        members[i].push((p, w, c));
    }
    let clusters = members
        .into_iter()
        .zip(centers)
        .map(|(mut pts, &center)| {
            pts.sort_by_key(|m| m.0);
            let weight: f64 = pts.iter().map(|m| m.1).sum();
            let cost: f64 = pts.iter().map(|m| m.1 * m.2).sum();
            let delta = if weight > 0.0 { cost / weight } else { 0.0 };
            let mut by_ring: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
            for &(p, w, c) in &pts {
                let j = if delta > 0.0 { ring_index(c, delta) } else { 0 };
                by_ring.entry(j).or_default().push((p, w));
            }
            let mut rings: Vec<Ring> = Vec::new();
            for (j, list) in by_ring {
                let merge = max_rings.is_some_and(|m| rings.len() >= m.max(1));
                let (points, weights): (Vec<usize>, Vec<f64>) = list.into_iter().unzip();
                let total: f64 = weights.iter().sum();
                let b = if delta > 0.0 { band(j, delta) } else { (0.0, 0.0) };
                if merge {
                    let last = rings.last_mut().expect("at least one ring");
                    last.points.extend(points);
                    last.weights.extend(weights);
                    last.total_weight += total;
                    last.band.1 = b.1;
                } else {
                    rings.push(Ring { points, weights, total_weight: total, band: b });
                }
            }
            ClusterRings { center, average_cost: delta, rings }
        })
        .collect();
    RingDecomposition { clusters }
}

/// Ring decomposition of the whole point set around `centers`.
pub fn ring_decomposition(inst: &ClusteringInstance, centers: &[usize]) -> RingDecomposition {
    ring_decomposition_on(inst, &inst.full_set(), centers, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryParams {
    /// Constant in the default per-ring sample count.
    pub c0: f64,
    pub delta: f64,
    pub seed: u64,
    /// Ring budget per cluster; later rings merge into the last one.
    pub max_rings_per_cluster: usize,
    /// Overrides the default per-ring sample count.
    pub per_ring: Option<usize>,
}

impl SummaryParams {
    pub fn new(delta: f64, seed: u64) -> Self {
        SummaryParams { c0: 4.0, delta, seed, max_rings_per_cluster: 16, per_ring: None }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConstraint(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) || self.max_rings_per_cluster == 0 || self.per_ring == Some(0) {
            return Err(Error::InvalidConstraint("summary parameters must be positive".into()));
        }
        Ok(())
    }

    /// `R`: total ring budget for `k` clusters.
    pub fn ring_budget(&self, k: usize) -> usize {
        k * self.max_rings_per_cluster
    }

    /// `s = ⌈c0 · ε^{-2z} · (k ln|J| + ln(R/δ))⌉` unless overridden.
    pub fn per_ring_samples(&self, k: usize, eps: f64, z: u32, j_size: usize) -> usize {
        if let Some(s) = self.per_ring {
            return s;
        }
        let r = self.ring_budget(k) as f64;
        let log_term = k as f64 * (j_size.max(1) as f64).ln() + (r / self.delta).ln();
        let s = self.c0 * eps.powi(-2 * z as i32) * log_term;
        (s.ceil() as usize).max(1)
    }
}

/// Samples ring by ring. `tag` separates the RNG streams of label classes.
fn summarize_set(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    per_ring: usize,
    params: &SummaryParams,
    tag: u64,
) -> Result<Vec<(usize, f64)>> {
    if set.is_empty() {
        return Ok(Vec::new());
    }
    let seeds = dz_seed_on(inst, set, inst.k, &mut stream(params.seed, &[tag, 0]))?;
    let rings = ring_decomposition_on(inst, set, &seeds, Some(params.max_rings_per_cluster));
    let tasks: Vec<(usize, usize, &Ring)> = rings
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.rings.iter().enumerate().map(move |(r, ring)| (i, r, ring)))
        .collect();
    let parts: Vec<Vec<(usize, f64)>> = tasks
        .par_iter()
        .map(|&(i, r, ring)| {
            if ring.points.len() <= per_ring {
                return ring.points.iter().copied().zip(ring.weights.iter().copied()).collect();
            }
            let mut rng = stream(params.seed, &[tag, 1, i as u64, r as u64]);
            let index = WeightedIndex::new(ring.weights.iter().copied()).expect("positive ring weights");
            let mut hits = vec![0usize; ring.points.len()];
            for _ in 0..per_ring {
                hits[index.sample(&mut rng)] += 1;
            }
            let unit = ring.total_weight / per_ring as f64;
            ring.points
                .iter()
                .zip(hits)
                .filter(|&(_, h)| h > 0)
                .map(|(&p, h)| (p, unit * h as f64))
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

fn into_set(mut pairs: Vec<(usize, f64)>) -> WeightedSet {
    pairs.sort_by_key(|p| p.0);
    let (points, weights) = pairs.into_iter().unzip();
    WeightedSet { points, weights }
}

/// `(S, v)` for the whole point set, sampled with `s` per ring where `s`
/// uses `j_size` as `|J|`.
pub fn build_summary(
    inst: &ClusteringInstance,
    j_size: usize,
    eps: f64,
    params: &SummaryParams,
) -> Result<WeightedSet> {
    params.check()?;
    let s = params.per_ring_samples(inst.k, eps, inst.objective.z(), j_size);
    Ok(into_set(summarize_set(inst, &inst.full_set(), s, params, 0)?))
}

/// Union of independent summaries of every label class.
pub fn build_summary_labeled(
    inst: &ClusteringInstance,
    j_size: usize,
    eps: f64,
    params: &SummaryParams,
) -> Result<WeightedSet> {
    params.check()?;
    if inst.labels.is_none() {
        return Err(Error::MissingLabels);
    }
    let s = params.per_ring_samples(inst.k, eps, inst.objective.z(), j_size);
    let mut pairs = Vec::new();
    for j in 0..inst.num_labels() {
        pairs.extend(summarize_set(inst, &inst.label_class(j), s, params, j as u64 + 1)?);
    }
    Ok(into_set(pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoresetMode {
    Metric,
    EuclideanKmeans,
}

/// `J`: facility positions, or synthetic centers in Euclidean mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CandidateSet {
    Facilities(Vec<usize>),
    Synthetic(Vec<Vec<f64>>),
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        match self {
            CandidateSet::Facilities(f) => f.len(),
            CandidateSet::Synthetic(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetMeta {
    pub mode: CoresetMode,
    pub alpha: f64,
    pub z: u32,
    pub epsilon: f64,
    pub delta: f64,
    /// Master seed; candidate and summary seeds derive from it.
    pub seed: u64,
    pub candidates: CandidateParams,
    pub summary: SummaryParams,
    /// The `|J|` bound used for the per-ring sample count.
    pub j_bound: usize,
    pub per_ring_samples: usize,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakCoreset {
    pub candidates: CandidateSet,
    pub summary: WeightedSet,
    pub meta: CoresetMeta,
}

impl WeakCoreset {
    /// The instance the candidates refer to (synthetic centers appended as
    /// facilities) and `J` as facility positions in it.
    pub fn resolve(&self, inst: &ClusteringInstance) -> Result<(ClusteringInstance, Vec<usize>)> {
        if self.meta.z != inst.objective.z() {
            return Err(Error::Incompatible(format!(
                "coreset built for z = {}, instance has z = {}",
                self.meta.z,
                inst.objective.z()
            )));
        }
        if let Some(&p) = self.summary.points.iter().find(|&&p| p >= inst.n()) {
            return Err(Error::Incompatible(format!("summary point {p} is not in the instance")));
        }
        match &self.candidates {
            CandidateSet::Facilities(f) => {
                if let Some(&bad) = f.iter().find(|&&f| f >= inst.num_facilities()) {
                    return Err(Error::Incompatible(format!("candidate {bad} is not a facility")));
                }
                Ok((inst.clone(), f.clone()))
            }
            CandidateSet::Synthetic(coords) => inst.with_extra_facilities(coords),
        }
    }

    /// `J = F`, `S = X`, `v = w`: the uncompressed coreset.
    pub fn exact(inst: &ClusteringInstance) -> Self {
        let k = inst.k;
        WeakCoreset {
            candidates: CandidateSet::Facilities((0..inst.num_facilities()).collect()),
            summary: inst.full_set(),
            meta: CoresetMeta {
                mode: CoresetMode::Metric,
                alpha: 1.0,
                z: inst.objective.z(),
                epsilon: 0.0,
                delta: 0.0,
                seed: 0,
                candidates: CandidateParams::new(k, 1.0, 0),
                summary: SummaryParams::new(0.5, 0),
                j_bound: inst.num_facilities(),
                per_ring_samples: inst.n(),
                labeled: inst.labels.is_some(),
            },
        }
    }
}

/// Approximation factor claimed for Property (A).
pub fn claimed_alpha(inst: &ClusteringInstance, mode: CoresetMode) -> f64 {
    match (mode, inst.objective, inst.points_within_facilities()) {
        (CoresetMode::EuclideanKmeans, _, _) => 1.0,
        (CoresetMode::Metric, Objective::KMedian, true) => 2.0,
        (CoresetMode::Metric, Objective::KMedian, false) => 3.0,
        (CoresetMode::Metric, Objective::KMeans, true) => 4.0,
        (CoresetMode::Metric, Objective::KMeans, false) => 9.0,
    }
}

/// Builds `(J, S, v)`. The summary is per label class when the instance has
/// labels. Candidate and summary seeds inside the params are replaced by
/// seeds derived from `seed`.
pub fn build_universal_weak_coreset(
    inst: &ClusteringInstance,
    eps: f64,
    mode: CoresetMode,
    seed: u64,
    candidate_params: CandidateParams,
    summary_params: SummaryParams,
) -> Result<WeakCoreset> {
    let candidate_params = CandidateParams { seed: derive_seed(seed, &[1]), ..candidate_params };
    let summary_params = SummaryParams { seed: derive_seed(seed, &[2]), ..summary_params };
    summary_params.check()?;
    let (candidates, j_bound) = match mode {
        CoresetMode::Metric => (
            CandidateSet::Facilities(build_candidates_metric(inst, eps, &candidate_params)?),
            candidate_params.eta + inst.k,
        ),
        CoresetMode::EuclideanKmeans => (
            CandidateSet::Synthetic(build_candidates_euclidean_means(inst, eps, &candidate_params)?),
            candidate_params.euclidean_max_candidates,
        ),
    };
    let labeled = inst.labels.is_some();
    let summary = if labeled {
        build_summary_labeled(inst, j_bound, eps, &summary_params)?
    } else {
        build_summary(inst, j_bound, eps, &summary_params)?
    };
    let z = inst.objective.z();
    let meta = CoresetMeta {
        mode,
        alpha: claimed_alpha(inst, mode),
        z,
        epsilon: eps,
        delta: summary_params.delta,
        seed,
        per_ring_samples: summary_params.per_ring_samples(inst.k, eps, z, j_bound),
        candidates: candidate_params,
        summary: summary_params,
        j_bound,
        labeled,
    };
    Ok(WeakCoreset { candidates, summary, meta })
}
