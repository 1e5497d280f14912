//! Exhaustive search over center tuples drawn from `J`, scored on the summary
//! and finalized on the full point set.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{optimal_feasible_cost, ConstraintSpec, FeasibleSolution};
use crate::coreset::WeakCoreset;
use crate::error::{Error, Result};
use crate::model::{Assignment, ClusterProfile, ClusteringInstance, WeightedSet};

/// Default ceiling on the number of tuples a search may enumerate.
pub const DEFAULT_TUPLE_CEILING: u128 = 1_000_000;

/// Which `k`-tuples over `n` items are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TupleMode {
    pub ordered: bool,
    pub repeats: bool,
}

fn binomial(n: u128, r: u128) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut c: u128 = 1;
    for i in 0..r {
        c = c.checked_mul(n - i)? / (i + 1);
    }
    Some(c)
}

/// The tuples of a [`TupleMode`] in lexicographic order, addressable by rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    pub n: usize,
    pub k: usize,
    pub mode: TupleMode,
}

impl TupleSpace {
    pub fn new(n: usize, k: usize, mode: TupleMode) -> Result<Self> {
        if !mode.repeats && k > n {
            return Err(Error::Incompatible(format!("k = {k} distinct centers from {n} candidates")));
        }
        Ok(TupleSpace { n, k, mode })
    }

    /// Completions of a prefix of length `t` whose last index is `last`;
    /// `None` on overflow.
    fn completions(&self, t: usize, last: usize) -> Option<u128> {
        let (n, r) = (self.n as u128, (self.k - t) as u128);
        match (self.mode.ordered, self.mode.repeats) {
            (false, false) => binomial(n - last as u128 - 1, r),
            (false, true) => binomial(n - last as u128 + r - 1, r),
            (true, false) => (0..r).try_fold(1u128, |acc, i| acc.checked_mul(n - t as u128 - i)),
            (true, true) => (0..r).try_fold(1u128, |acc, _| acc.checked_mul(n)),
        }
    }

    /// Number of tuples, or `None` when it does not fit in `u128`.
    pub fn count(&self) -> Option<u128> {
        if self.k == 0 {
            return Some(1);
        }
        let (n, k) = (self.n as u128, self.k as u128);
        match (self.mode.ordered, self.mode.repeats) {
            (false, false) => binomial(n, k),
            (false, true) => binomial(n + k - 1, k),
            (true, false) => (0..k).try_fold(1u128, |acc, i| acc.checked_mul(n - i)),
            (true, true) => (0..k).try_fold(1u128, |acc, _| acc.checked_mul(n)),
        }
    }

    /// The tuple at `rank` (indices into the candidate list).
    pub fn unrank(&self, mut rank: u128) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k);
        let mut used = vec![false; self.n];
        for t in 0..self.k {
            let lo = match (self.mode.ordered, out.last()) {
                (false, Some(&prev)) => prev + usize::from(!self.mode.repeats),
                _ => 0,
            };
            #[allow(clippy::needless_range_loop)]
            for i in lo..self.n {
                if self.mode.ordered && !self.mode.repeats && used[i] {
                    continue;
                }
                let c = self.completions(t + 1, i).unwrap_or(u128::MAX);
                if rank < c {
                    out.push(i);
                    used[i] = true;
                    break;
                }
                rank -= c;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let count = self.count().expect("tuple count overflows u128");
        (0..count).map(move |r| self.unrank(r))
    }
}

/// All `k`-tuples of `j` in lexicographic order of positions in `j`.
pub fn enumerate_center_tuples(j: &[usize], k: usize, ordered: bool, repeats: bool) -> Result<Vec<Vec<usize>>> {
    let space = TupleSpace::new(j.len(), k, TupleMode { ordered, repeats })?;
    Ok(space.iter().map(|t| t.into_iter().map(|i| j[i]).collect()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Ordered tuples; defaults to ordered exactly when the spec is not
    /// symmetric across cluster indices.
    pub ordered: Option<bool>,
    pub repeats: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Stop at the first tuple (in enumeration order) at or below this cost.
    pub cost_target: Option<f64>,
    pub ceiling: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { ordered: None, repeats: false, workers: 0, cost_target: None, ceiling: DEFAULT_TUPLE_CEILING }
    }
}

impl SolveOptions {
    pub fn mode(&self, spec: &ConstraintSpec) -> TupleMode {
        TupleMode { ordered: self.ordered.unwrap_or(!spec.is_symmetric()), repeats: self.repeats }
    }
}

/// Winner of a tuple search.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SearchOutcome {
    pub centers: Vec<usize>,
    pub cost: f64,
    pub evaluated: u128,
}

/// Runs `f` on a pool of `workers` threads (the global pool for 0).
pub fn run_in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Minimizes `Ψ(set, C)` over tuples `C` from `candidates`. The result is the
/// minimum by `(cost, rank)`, so it does not depend on the worker count.
pub(crate) fn search(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    candidates: &[usize],
    spec: &ConstraintSpec,
    mode: TupleMode,
    opts: &SolveOptions,
) -> Result<SearchOutcome> {
    spec.validate(inst)?;
    let space = TupleSpace::new(candidates.len(), inst.k, mode)?;
    let count = space.count().unwrap_or(u128::MAX);
    if count > opts.ceiling {
        return Err(Error::CeilingExceeded { needed: count, ceiling: opts.ceiling });
    }
    let score = |rank: u128| -> Result<Option<(f64, u128)>> {
        let centers: Vec<usize> = space.unrank(rank).into_iter().map(|i| candidates[i]).collect();
        match optimal_feasible_cost(inst, set, &centers, spec) {
            Ok(sol) => Ok(Some((sol.cost, rank))),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let ranks = 0..count as u64;
    let best: Result<Option<(f64, u128)>> = run_in_pool(opts.workers, || match opts.cost_target {
        Some(target) => ranks
            .into_par_iter()
            .map(|r| score(r as u128))
            .find_first(|s| match s {
                Ok(Some((c, _))) => *c <= target,
                Ok(None) => false,
                Err(_) => true,
            })
            .unwrap_or_else(|| full_scan(count, &score)),
        None => full_scan(count, &score),
    })?;
    let (cost, rank) = best?.ok_or_else(|| Error::Infeasible("no center tuple admits a feasible assignment".into()))?;
    let evaluated = if opts.cost_target.is_some_and(|t| cost <= t) { rank + 1 } else { count };
    let centers = space.unrank(rank).into_iter().map(|i| candidates[i]).collect();
    Ok(SearchOutcome { centers, cost, evaluated })
}

fn full_scan(count: u128, score: &(impl Fn(u128) -> Result<Option<(f64, u128)>> + Sync)) -> Result<Option<(f64, u128)>> {
    (0..count as u64)
        .into_par_iter()
        .map(|r| score(r as u128))
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(x), Some(y)) => Some(if y.0.total_cmp(&x.0).then(y.1.cmp(&x.1)).is_lt() { y } else { x }),
                    (x, None) => x,
                    (None, y) => y,
                })
            },
        )
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    /// Facility positions in the resolved instance.
    pub centers: Vec<usize>,
    /// Coordinates of the centers when the space is Euclidean.
    pub center_coords: Option<Vec<Vec<f64>>>,
    pub cost_on_summary: f64,
    pub cost_on_full: f64,
    pub assignment_on_full: Assignment,
    pub profile: ClusterProfile,
    pub tuples_evaluated: u128,
    pub ordered: bool,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Optimal feasible assignment of the whole point set to `centers`.
pub fn finalize_assignment(
    inst: &ClusteringInstance,
    centers: &[usize],
    spec: &ConstraintSpec,
) -> Result<FeasibleSolution> {
    optimal_feasible_cost(inst, &inst.full_set(), centers, spec)
}

/// Best tuple from `J` on `(S, v)`, then the exact feasible assignment of
/// `(X, w)` to it.
pub fn solve_constrained(
    coreset: &WeakCoreset,
    inst: &ClusteringInstance,
    spec: &ConstraintSpec,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    let (resolved, j) = coreset.resolve(inst)?;
    let mode = opts.mode(spec);
    let found = search(&resolved, &coreset.summary, &j, spec, mode, opts)?;
    let full = finalize_assignment(&resolved, &found.centers, spec)?;
    let center_coords = resolved.space.is_euclidean().then(|| {
        found
            .centers
            .iter()
            .map(|&f| resolved.space.coords(resolved.facilities[f]).expect("euclidean site").to_vec())
            .collect()
    });
    Ok(SolveResult {
        centers: found.centers,
        center_coords,
        cost_on_summary: found.cost,
        cost_on_full: full.cost,
        assignment_on_full: full.assignment,
        profile: full.profile,
        tuples_evaluated: found.evaluated,
        ordered: mode.ordered,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
