//! Real-valued transportation solvers.
//!
//! Sources are inserted one at a time and routed along shortest augmenting
//! paths in the residual network (successive shortest paths). Because the
//! number of sinks is small in every clustering use, the residual network is
//! collapsed onto the sinks: moving mass of source `x` from sink `j` to sink
//! `j'` is a sink-to-sink arc of cost `c(x, j') - c(x, j)`, available while
//! `x` still sends positive flow to `j`. Per sink pair the cheapest such arc
//! is kept in a lazily cleaned heap, so each augmentation costs
//! `O(m^3 + m^2 log n)` for `m` sinks.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Balanced transportation problem. `cost[s][t]` is the unit cost from source
/// `s` to sink `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportationProblem {
    pub cost: Vec<Vec<f64>>,
    pub supplies: Vec<f64>,
    pub demands: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportationSolution {
    pub flow: Vec<Vec<f64>>,
    pub objective: f64,
}

/// Transportation with lower and upper bounds on the total received by each
/// sink instead of fixed demands.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedTransportationProblem {
    pub cost: Vec<Vec<f64>>,
    pub supplies: Vec<f64>,
    pub lower: Vec<f64>,
    /// May contain `f64::INFINITY`.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedTransportationSolution {
    pub flow: Vec<Vec<f64>>,
    pub objective: f64,
    pub sink_totals: Vec<f64>,
}

/// Dual potentials certifying optimality of a transportation flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub source_potentials: Vec<f64>,
    pub sink_potentials: Vec<f64>,
    /// Minimum of `c(s,t) - u_s - v_t` over all allowed arcs.
    pub min_reduced_cost: f64,
    /// Maximum of `|c(s,t) - u_s - v_t|` over arcs carrying flow.
    pub max_support_reduced_cost: f64,
    /// Whether Bellman-Ford found a negative residual cycle.
    pub negative_cycle: bool,
}

impl Certificate {
    /// Complementary slackness within `tol`, scaled by the largest cost magnitude.
    pub fn holds(&self, tol: f64) -> bool {
        !self.negative_cycle && self.min_reduced_cost >= -tol && self.max_support_reduced_cost <= tol
    }
}

fn check_costs(cost: &[Vec<f64>], sources: usize, sinks: usize) -> Result<()> {
    if cost.len() != sources || cost.iter().any(|r| r.len() != sinks) {
        return Err(Error::Dimension(format!("cost matrix must be {sources} x {sinks}")));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cost matrix"));
    }
    Ok(())
}

fn check_amounts(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

pub fn solve_transportation(p: &TransportationProblem) -> Result<TransportationSolution> {
    check_costs(&p.cost, p.supplies.len(), p.demands.len())?;
    check_amounts(&p.supplies, "supplies")?;
    check_amounts(&p.demands, "demands")?;
    let supply: f64 = p.supplies.iter().sum();
    let demand: f64 = p.demands.iter().sum();
    if (supply - demand).abs() > 1e-9 * supply.max(demand).max(f64::MIN_POSITIVE) {
        return Err(Error::Unbalanced { supply, demand });
    }
    let flow = solve_masked(&p.cost, &p.supplies, &p.demands)?;
    let objective = objective(&p.cost, &flow);
    Ok(TransportationSolution { flow, objective })
}

/// Reduces lower bounds away: each sink splits into a mandatory part with
/// demand `l` and an optional part with demand `u - l`, and a dummy source
/// absorbs the slack `Σu - Σsupply` through the optional parts at zero cost.
pub fn solve_bounded_transportation(p: &BoundedTransportationProblem) -> Result<BoundedTransportationSolution> {
    let k = p.lower.len();
    if p.upper.len() != k {
        return Err(Error::Dimension("lower and upper bounds differ in length".into()));
    }
    check_costs(&p.cost, p.supplies.len(), k)?;
    check_amounts(&p.supplies, "supplies")?;
    check_amounts(&p.lower, "lower bounds")?;
    if p.upper.iter().any(|u| u.is_nan() || *u < 0.0) {
        return Err(Error::NonFinite("upper bounds"));
    }
    let (transformed, total) = transform_bounded(p)?;
    let flow = solve_masked(&transformed.cost, &transformed.supplies, &transformed.demands)?;

    let n = p.supplies.len();
    let mut out = vec![vec![0.0; k]; n];
    for (row, frow) in out.iter_mut().zip(&flow) {
        for i in 0..k {
            row[i] = frow[i] + frow[k + i];
        }
    }
    let sink_totals: Vec<f64> = (0..k).map(|i| out.iter().map(|r| r[i]).sum()).collect();
    let objective = objective(&p.cost, &out);
    debug_assert!((sink_totals.iter().sum::<f64>() - total).abs() <= 1e-9 * total.max(1.0));
    Ok(BoundedTransportationSolution { flow: out, objective, sink_totals })
}

fn transform_bounded(p: &BoundedTransportationProblem) -> Result<(TransportationProblem, f64)> {
    let k = p.lower.len();
    let total: f64 = p.supplies.iter().sum();
    let tol = 1e-9 * total.max(f64::MIN_POSITIVE);
    if let Some(i) = (0..k).find(|&i| p.lower[i] > p.upper[i]) {
        return Err(Error::Infeasible(format!(
            "cluster {i}: lower bound {} exceeds upper bound {}",
            p.lower[i], p.upper[i]
        )));
    }
    let upper: Vec<f64> = p.upper.iter().map(|&u| u.min(total)).collect();
    let lower_sum: f64 = p.lower.iter().sum();
    let upper_sum: f64 = upper.iter().sum();
    if lower_sum > total + tol {
        return Err(Error::Infeasible(format!(
            "lower bounds sum to {lower_sum}, more than the total weight {total}"
        )));
    }
    if upper_sum < total - tol {
        return Err(Error::Infeasible(format!(
            "upper bounds sum to {upper_sum}, less than the total weight {total}"
        )));
    }
    let lower: Vec<f64> = p.lower.iter().map(|&l| l.min(total)).collect();
    let mut cost: Vec<Vec<f64>> = p
        .cost
        .iter()
        .map(|row| row.iter().chain(row.iter()).copied().collect())
        .collect();
    let mut supplies = p.supplies.clone();
    let mut demands: Vec<f64> = lower.clone();
    demands.extend(upper.iter().zip(&lower).map(|(u, l)| (u - l).max(0.0)));
    let slack = (demands.iter().sum::<f64>() - total).max(0.0);
    let mut dummy = vec![f64::INFINITY; k];
    dummy.extend(std::iter::repeat_n(0.0, k));
    cost.push(dummy);
    supplies.push(slack);
    Ok((TransportationProblem { cost, supplies, demands }, total))
}

fn objective(cost: &[Vec<f64>], flow: &[Vec<f64>]) -> f64 {
    cost.iter()
        .zip(flow)
        .flat_map(|(c, f)| c.iter().zip(f))
        .filter(|(_, f)| **f > 0.0)
        .map(|(c, f)| c * f)
        .sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Copy)]
enum Pred {
    None,
    Direct,
    /// Mass of `source` moves from sink `from` to this sink.
    Via { from: usize, source: usize },
}

/// Solves a transportation problem in which `f64::INFINITY` marks a forbidden
/// arc. Zero-supply sources and zero-demand sinks are dropped before solving
/// and come back with zero flow. Supplies and demands must already balance.
pub(crate) fn solve_masked(cost: &[Vec<f64>], supplies: &[f64], demands: &[f64]) -> Result<Vec<Vec<f64>>> {
    let total: f64 = supplies.iter().sum();
    let mut full = vec![vec![0.0; demands.len()]; supplies.len()];
    if total <= 0.0 {
        return Ok(full);
    }
    // Absorb rounding-level imbalance so the last source always finds room.
    let demand_total: f64 = demands.iter().sum();
    let scale = if demand_total > 0.0 { total / demand_total } else { 1.0 };
    let eps = 1e-13 * total;
    let rows: Vec<usize> = (0..supplies.len()).filter(|&s| supplies[s] > eps).collect();
    let cols: Vec<usize> = (0..demands.len()).filter(|&t| demands[t] > eps).collect();
    let m = cols.len();
    let c = |r: usize, j: usize| cost[rows[r]][cols[j]];

    let mut flow = vec![vec![0.0; m]; rows.len()];
    let mut remaining: Vec<f64> = cols.iter().map(|&t| demands[t] * scale).collect();
    // heaps[j * m + j2] holds Key(c(x,j2) - c(x,j), x) for sources x that send to j.
    let mut heaps: Vec<BinaryHeap<Reverse<Key>>> = (0..m * m).map(|_| BinaryHeap::new()).collect();
    let mut dist = vec![f64::INFINITY; m];
    let mut pred = vec![Pred::None; m];
    let mut edges = vec![(f64::INFINITY, usize::MAX); m * m];
    let budget = 64 * (rows.len() + m) * (m + 1) + 1024;
    let mut augmentations = 0usize;

    for r in 0..rows.len() {
        let mut left = supplies[rows[r]];
        while left > eps {
            augmentations += 1;
            if augmentations > budget {
                return Err(Error::Numerical("transportation augmentation budget exhausted".into()));
            }
            for j in 0..m {
                for j2 in 0..m {
                    edges[j * m + j2] = (f64::INFINITY, usize::MAX);
                    if j == j2 {
                        continue;
                    }
                    let heap = &mut heaps[j * m + j2];
                    while let Some(Reverse(Key(w, x))) = heap.peek().copied() {
                        if flow[x][j] > eps {
                            edges[j * m + j2] = (w, x);
                            break;
                        }
                        heap.pop();
                    }
                }
            }
            for j in 0..m {
                dist[j] = c(r, j);
                pred[j] = if dist[j].is_finite() { Pred::Direct } else { Pred::None };
            }
            // Bellman-Ford over the sinks; residual cycles are nonnegative.
            for _ in 0..m {
                let mut changed = false;
                for j in 0..m {
                    if !dist[j].is_finite() {
                        continue;
                    }
                    for j2 in 0..m {
                        let (w, x) = edges[j * m + j2];
                        if !w.is_finite() {
                            continue;
                        }
                        let cand = dist[j] + w;
                        if !dist[j2].is_finite() || cand < dist[j2] - 1e-12 * (1.0 + dist[j2].abs()) {
                            dist[j2] = cand;
                            pred[j2] = Pred::Via { from: j, source: x };
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let end = (0..m)
                .filter(|&j| remaining[j] > eps && dist[j].is_finite())
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
                .ok_or_else(|| Error::Infeasible("no sink can absorb the remaining supply".into()))?;

            let mut delta = left.min(remaining[end]);
            let mut j = end;
            let mut steps = 0;
            while let Pred::Via { from, source } = pred[j] {
                delta = delta.min(flow[source][from]);
                j = from;
                steps += 1;
                if steps > m {
                    return Err(Error::Numerical("cycle in augmenting path".into()));
                }
            }
            let mut j = end;
            loop {
                match pred[j] {
                    Pred::Via { from, source } => {
                        add_flow(&mut flow, &mut heaps, source, j, delta, m, &c, eps);
                        flow[source][from] -= delta;
                        if flow[source][from] <= eps {
                            flow[source][from] = 0.0;
                        }
                        j = from;
                    }
                    Pred::Direct => {
                        add_flow(&mut flow, &mut heaps, r, j, delta, m, &c, eps);
                        break;
                    }
                    Pred::None => unreachable!("path reconstructed from a reachable sink"),
                }
            }
            left -= delta;
            remaining[end] -= delta;
            if remaining[end] <= eps {
                remaining[end] = 0.0;
            }
        }
    }

    for (r, &s) in rows.iter().enumerate() {
        for (j, &t) in cols.iter().enumerate() {
            full[s][t] = flow[r][j];
        }
    }
    Ok(full)
}

#[allow(clippy::too_many_arguments)]
fn add_flow(
    flow: &mut [Vec<f64>],
    heaps: &mut [BinaryHeap<Reverse<Key>>],
    x: usize,
    j: usize,
    delta: f64,
    m: usize,
    c: &impl Fn(usize, usize) -> f64,
    eps: f64,
) {
    let was_empty = flow[x][j] <= eps;
    flow[x][j] += delta;
    if was_empty && flow[x][j] > eps {
        let base = c(x, j);
        for j2 in 0..m {
            let target = c(x, j2);
            if j2 != j && target.is_finite() {
                heaps[j * m + j2].push(Reverse(Key(target - base, x)));
            }
        }
    }
}

/// Computes dual potentials for `flow` by Bellman-Ford on its residual
/// network. Independent of the solver: any flow can be certified.
/// `f64::INFINITY` costs are treated as absent arcs.
pub fn certify_transportation(cost: &[Vec<f64>], flow: &[Vec<f64>]) -> Certificate {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    let scale = cost
        .iter()
        .flatten()
        .filter(|c| c.is_finite())
        .fold(1.0f64, |a, c| a.max(c.abs()));
    let support_tol = 1e-12 * flow.iter().flatten().fold(0.0f64, |a, f| a.max(*f));
    // Node ids: sources 0..n, sinks n..n+m. Shortest distances from a virtual root.
    let mut d = vec![0.0f64; n + m];
    let mut negative_cycle = true;
    let relax_tol = 1e-13 * scale;
    for _ in 0..=(n + m) {
        let mut changed = false;
        for s in 0..n {
            for t in 0..m {
                let c = cost[s][t];
                if !c.is_finite() {
                    continue;
                }
                if d[s] + c < d[n + t] - relax_tol {
                    d[n + t] = d[s] + c;
                    changed = true;
                }
                if flow[s][t] > support_tol && d[n + t] - c < d[s] - relax_tol {
                    d[s] = d[n + t] - c;
                    changed = true;
                }
            }
        }
        if !changed {
            negative_cycle = false;
            break;
        }
    }
    let source_potentials: Vec<f64> = d[..n].iter().map(|v| -v).collect();
    let sink_potentials: Vec<f64> = d[n..].to_vec();
    let mut min_reduced_cost = f64::INFINITY;
    let mut max_support_reduced_cost = 0.0f64;
    for s in 0..n {
        for t in 0..m {
            let c = cost[s][t];
            if !c.is_finite() {
                continue;
            }
            let rc = (c - source_potentials[s] - sink_potentials[t]) / scale;
            min_reduced_cost = min_reduced_cost.min(rc);
            if flow[s][t] > support_tol {
                max_support_reduced_cost = max_support_reduced_cost.max(rc.abs());
            }
        }
    }
    Certificate {
        source_potentials,
        sink_potentials,
        min_reduced_cost,
        max_support_reduced_cost,
        negative_cycle,
    }
}

/// Certifies a bounded solution on the lower-bound-eliminated network.
pub fn certify_bounded(p: &BoundedTransportationProblem, sol: &BoundedTransportationSolution) -> Result<Certificate> {
    let (transformed, _) = transform_bounded(p)?;
    let k = p.lower.len();
    let total: f64 = p.supplies.iter().sum();
    let lower: Vec<f64> = p.lower.iter().map(|&l| l.min(total)).collect();
    // Both copies of a sink share costs, so any split of a real source's flow
    // between them has the same objective; fill the mandatory copies first.
    let mut flow = vec![vec![0.0; 2 * k]; transformed.supplies.len()];
    let mut need = lower.clone();
    for (s, row) in sol.flow.iter().enumerate() {
        for i in 0..k {
            let mandatory = row[i].min(need[i]);
            need[i] -= mandatory;
            flow[s][i] = mandatory;
            flow[s][k + i] = row[i] - mandatory;
        }
    }
    let dummy = transformed.supplies.len() - 1;
    for i in 0..k {
        let optional_used: f64 = flow[..dummy].iter().map(|r| r[k + i]).sum();
        flow[dummy][k + i] = (transformed.demands[k + i] - optional_used).max(0.0);
    }
    Ok(certify_transportation(&transformed.cost, &flow))
}
