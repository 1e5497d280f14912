//! Constraint families and the cost functionals built on them.
//!
//! For a weighted set `B` and a center tuple `C` (facility positions):
//!
//! * [`assignment_cost`] evaluates a fixed fractional assignment,
//! * [`profile_cost`] / [`labeled_profile_cost`] minimize over assignments
//!   consistent with a cluster profile,
//! * [`optimal_feasible_cost`] minimizes over every assignment satisfying a
//!   [`ConstraintSpec`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowlp::{
    solve_bounded_transportation, solve_lp, solve_transportation, BoundedTransportationProblem, LinearProgram,
    TransportationProblem,
};
use crate::model::{Assignment, ClusterProfile, ClusteringInstance, WeightedSet};

/// Absolute tolerance for [`check_feasibility`].
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Which reading of "l-diversity" to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LDiversityReading {
    /// Every label makes up at least `1/l` of every cluster.
    #[default]
    AtLeast,
    /// No label makes up more than `1/l` of any cluster.
    AtMost,
}

/// Bounds `α_{i,j} <= (weight of label j in cluster i) / (weight of cluster i) <= β_{i,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionBounds {
    pub labels: usize,
    /// `alpha[i * labels + j]`
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl FractionBounds {
    /// One `(α_i, β_i)` pair per cluster, applied to every label.
    pub fn per_cluster(pairs: &[(f64, f64)], labels: usize) -> Self {
        let alpha = pairs.iter().flat_map(|&(a, _)| std::iter::repeat_n(a, labels)).collect();
        let beta = pairs.iter().flat_map(|&(_, b)| std::iter::repeat_n(b, labels)).collect();
        FractionBounds { labels, alpha, beta }
    }

    pub fn l_diversity(k: usize, labels: usize, l: f64, reading: LDiversityReading) -> Self {
        let pair = match reading {
            LDiversityReading::AtLeast => (1.0 / l, 1.0),
            LDiversityReading::AtMost => (0.0, 1.0 / l),
        };
        Self::per_cluster(&vec![pair; k], labels)
    }

    pub fn k(&self) -> usize {
        self.alpha.len() / self.labels.max(1)
    }

    fn same_for_every_cluster(&self) -> bool {
        let m = self.labels;
        self.alpha.chunks(m).all(|c| c == &self.alpha[..m]) && self.beta.chunks(m).all(|c| c == &self.beta[..m])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSpec {
    Unconstrained,
    FixedProfile(ClusterProfile),
    /// Per-cluster bounds on total assigned weight; `upper` may be infinite.
    Balanced { lower: Vec<f64>, upper: Vec<f64> },
    FractionBounds(FractionBounds),
}

impl ConstraintSpec {
    /// Structural checks against an instance (bound ranges, shapes, labels).
    pub fn validate(&self, inst: &ClusteringInstance) -> Result<()> {
        let k = inst.k;
        match self {
            ConstraintSpec::Unconstrained => Ok(()),
            ConstraintSpec::FixedProfile(profile) => {
                if profile.k() != k {
                    return Err(Error::InvalidConstraint(format!("profile has {} clusters, k = {k}", profile.k())));
                }
                if let ClusterProfile::Labeled { labels, .. } = profile {
                    if inst.labels.is_none() && *labels > 1 {
                        return Err(Error::MissingLabels);
                    }
                }
                Ok(())
            }
            ConstraintSpec::Balanced { lower, upper } => {
                if lower.len() != k || upper.len() != k {
                    return Err(Error::InvalidConstraint(format!("balanced bounds must have length k = {k}")));
                }
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if !(l.is_finite() && *l >= 0.0 && !u.is_nan() && l <= u) {
                        return Err(Error::InvalidConstraint(format!(
                            "cluster {i}: need 0 <= lower <= upper, got [{l}, {u}]"
                        )));
                    }
                }
                Ok(())
            }
            ConstraintSpec::FractionBounds(fb) => {
                if inst.labels.is_none() {
                    return Err(Error::MissingLabels);
                }
                if fb.labels == 0 || fb.alpha.len() != k * fb.labels || fb.beta.len() != k * fb.labels {
                    return Err(Error::InvalidConstraint(format!(
                        "fraction bounds must have k x m = {k} x {} entries",
                        fb.labels
                    )));
                }
                if fb.labels < inst.num_labels() {
                    return Err(Error::InvalidConstraint(format!(
                        "fraction bounds cover {} labels, instance has {}",
                        fb.labels,
                        inst.num_labels()
                    )));
                }
                for (a, b) in fb.alpha.iter().zip(&fb.beta) {
                    if !(0.0..=1.0).contains(a) || !(0.0..=1.0).contains(b) || a > b {
                        return Err(Error::InvalidConstraint(format!("need 0 <= alpha <= beta <= 1, got [{a}, {b}]")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether permuting cluster indices leaves the constraint unchanged.
    pub fn is_symmetric(&self) -> bool {
        match self {
            ConstraintSpec::Unconstrained => true,
            ConstraintSpec::FixedProfile(_) => false,
            ConstraintSpec::Balanced { lower, upper } => {
                lower.iter().all(|l| *l == lower[0]) && upper.iter().all(|u| *u == upper[0])
            }
            ConstraintSpec::FractionBounds(fb) => fb.same_for_every_cluster(),
        }
    }

    pub fn is_labeled(&self) -> bool {
        matches!(
            self,
            ConstraintSpec::FractionBounds(_) | ConstraintSpec::FixedProfile(ClusterProfile::Labeled { .. })
        )
    }
}

/// An optimal feasible assignment and what it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSolution {
    pub cost: f64,
    pub assignment: Assignment,
    pub profile: ClusterProfile,
}

fn check_centers(inst: &ClusteringInstance, centers: &[usize]) -> Result<()> {
    if centers.len() != inst.k {
        return Err(Error::Incompatible(format!("{} centers given, k = {}", centers.len(), inst.k)));
    }
    if let Some(&bad) = centers.iter().find(|&&f| f >= inst.num_facilities()) {
        return Err(Error::Incompatible(format!("center {bad} is not a facility")));
    }
    Ok(())
}

/// `Σ_i Σ_x σ(x,i) · D(x, c_i)^z` for a fixed assignment over `set`.
pub fn assignment_cost(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    sigma: &Assignment,
    centers: &[usize],
) -> Result<f64> {
    check_centers(inst, centers)?;
    sigma.check_conservation(set)?;
    Ok(sigma
        .entries
        .iter()
        .map(|e| e.mass * inst.cost(e.point, centers[e.cluster]))
        .sum())
}

fn cost_matrix(inst: &ClusteringInstance, set: &WeightedSet, centers: &[usize]) -> Vec<Vec<f64>> {
    set.points
        .iter()
        .map(|&p| centers.iter().map(|&f| inst.cost(p, f)).collect())
        .collect()
}

fn flow_to_assignment(set: &WeightedSet, flow: &[Vec<f64>]) -> Assignment {
    let mut a = Assignment::default();
    for (&p, row) in set.points.iter().zip(flow) {
        for (i, &mass) in row.iter().enumerate() {
            a.push(p, i, mass);
        }
    }
    a
}

/// Nearest-center assignment; ties go to the lowest cluster index.
pub fn voronoi_assignment(inst: &ClusteringInstance, set: &WeightedSet, centers: &[usize]) -> (f64, Assignment) {
    let mut a = Assignment::default();
    let mut cost = 0.0;
    for (p, w) in set.iter() {
        let (i, c) = centers
            .iter()
            .map(|&f| inst.cost(p, f))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, c)| if c < best.1 { (i, c) } else { best });
        a.push(p, i, w);
        cost += w * c;
    }
    (cost, a)
}

/// Weight captured by each center under the nearest-center rule.
pub fn voronoi_profile(inst: &ClusteringInstance, set: &WeightedSet, centers: &[usize]) -> ClusterProfile {
    let (_, a) = voronoi_assignment(inst, set, centers);
    ClusterProfile::Plain(a.cluster_totals(centers.len()))
}

/// Per-label version of [`voronoi_profile`].
pub fn voronoi_labeled_profile(inst: &ClusteringInstance, set: &WeightedSet, centers: &[usize]) -> ClusterProfile {
    let (_, a) = voronoi_assignment(inst, set, centers);
    let totals = a.cluster_label_totals(inst);
    ClusterProfile::Labeled { labels: inst.num_labels(), values: totals.concat() }
}

/// `cost_z(B, C, Γ)` for a plain profile: a transportation problem with point
/// weights as supplies and `Γ` as demands.
pub fn profile_cost(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    centers: &[usize],
    profile: &ClusterProfile,
) -> Result<(f64, Assignment)> {
    check_centers(inst, centers)?;
    let ClusterProfile::Plain(targets) = profile else {
        return labeled_profile_cost(inst, set, centers, profile);
    };
    if targets.len() != centers.len() {
        return Err(Error::InvalidProfile(format!("profile has {} entries, k = {}", targets.len(), centers.len())));
    }
    profile.check_consistent(set, inst)?;
    let problem = TransportationProblem {
        cost: cost_matrix(inst, set, centers),
        supplies: set.weights.clone(),
        demands: targets.clone(),
    };
    let sol = solve_transportation(&problem)?;
    Ok((sol.objective, flow_to_assignment(set, &sol.flow)))
}

/// `cost_z(B, C, Γ)` for a labeled profile: one transportation problem per
/// label class.
pub fn labeled_profile_cost(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    centers: &[usize],
    profile: &ClusterProfile,
) -> Result<(f64, Assignment)> {
    check_centers(inst, centers)?;
    let labels = match profile {
        ClusterProfile::Labeled { labels, .. } => *labels,
        ClusterProfile::Plain(_) => return profile_cost(inst, set, centers, profile),
    };
    if profile.k() != centers.len() {
        return Err(Error::InvalidProfile(format!("profile has {} clusters, k = {}", profile.k(), centers.len())));
    }
    if labels > 1 && inst.labels.is_none() {
        return Err(Error::MissingLabels);
    }
    profile.check_consistent(set, inst)?;
    let mut total = 0.0;
    let mut assignment = Assignment::default();
    for j in 0..labels {
        let (points, weights): (Vec<usize>, Vec<f64>) = set.iter().filter(|&(p, _)| inst.label(p) == j).unzip();
        if points.is_empty() {
            continue;
        }
        let class = WeightedSet::new(points, weights);
        let demands = (0..centers.len()).map(|i| profile.value(i, j)).collect();
        let problem = TransportationProblem {
            cost: cost_matrix(inst, &class, centers),
            supplies: class.weights.clone(),
            demands,
        };
        let sol = solve_transportation(&problem)?;
        total += sol.objective;
        assignment.entries.extend(flow_to_assignment(&class, &sol.flow).entries);
    }
    Ok((total, assignment))
}

fn realized(inst: &ClusteringInstance, a: &Assignment, labeled: bool) -> ClusterProfile {
    if labeled {
        ClusterProfile::Labeled { labels: inst.num_labels(), values: a.cluster_label_totals(inst).concat() }
    } else {
        ClusterProfile::Plain(a.cluster_totals(inst.k))
    }
}

/// `Ψ(B, C)`: the cheapest assignment of `set` to `centers` satisfying `spec`.
pub fn optimal_feasible_cost(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    centers: &[usize],
    spec: &ConstraintSpec,
) -> Result<FeasibleSolution> {
    check_centers(inst, centers)?;
    spec.validate(inst)?;
    let (cost, assignment) = match spec {
        ConstraintSpec::Unconstrained => voronoi_assignment(inst, set, centers),
        ConstraintSpec::FixedProfile(profile) => profile_cost(inst, set, centers, profile)?,
        ConstraintSpec::Balanced { lower, upper } => {
            let problem = BoundedTransportationProblem {
                cost: cost_matrix(inst, set, centers),
                supplies: set.weights.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
            };
            let sol = solve_bounded_transportation(&problem)?;
            (sol.objective, flow_to_assignment(set, &sol.flow))
        }
        ConstraintSpec::FractionBounds(fb) => fraction_lp(inst, set, centers, fb)?,
    };
    let profile = realized(inst, &assignment, spec.is_labeled());
    Ok(FeasibleSolution { cost, assignment, profile })
}

fn fraction_lp(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    centers: &[usize],
    fb: &FractionBounds,
) -> Result<(f64, Assignment)> {
    let k = centers.len();
    let n = set.len();
    let var = |p: usize, i: usize| p * k + i;
    let costs = cost_matrix(inst, set, centers);
    let mut lp = LinearProgram::new(costs.concat());
    for (p, &w) in set.weights.iter().enumerate() {
        let mut row = vec![0.0; n * k];
        for i in 0..k {
            row[var(p, i)] = 1.0;
        }
        lp.add_eq(row, w);
    }
    for i in 0..k {
        for j in 0..fb.labels {
            let (alpha, beta) = (fb.alpha[i * fb.labels + j], fb.beta[i * fb.labels + j]);
            // α·Σ_x σ(x,i) - Σ_{x∈X_j} σ(x,i) <= 0
            if alpha > 0.0 {
                let mut row = vec![0.0; n * k];
                for (p, &point) in set.points.iter().enumerate() {
                    row[var(p, i)] = alpha - f64::from(u8::from(inst.label(point) == j));
                }
                lp.add_le(row, 0.0);
            }
            // Σ_{x∈X_j} σ(x,i) - β·Σ_x σ(x,i) <= 0
            if beta < 1.0 {
                let mut row = vec![0.0; n * k];
                for (p, &point) in set.points.iter().enumerate() {
                    row[var(p, i)] = f64::from(u8::from(inst.label(point) == j)) - beta;
                }
                lp.add_le(row, 0.0);
            }
        }
    }
    let sol = solve_lp(&lp)?;
    let mut a = Assignment::default();
    for (p, &point) in set.points.iter().enumerate() {
        // Clean simplex round-off so each point's masses add up to its weight.
        let masses: Vec<f64> = (0..k).map(|i| sol.x[var(p, i)].max(0.0)).collect();
        let sum: f64 = masses.iter().sum();
        let w = set.weights[p];
        for (i, m) in masses.into_iter().enumerate() {
            a.push(point, i, if sum > 0.0 { m * w / sum } else { 0.0 });
        }
    }
    let cost = a.entries.iter().map(|e| e.mass * inst.cost(e.point, centers[e.cluster])).sum();
    Ok((cost, a))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    Conservation { point: usize, assigned: f64, weight: f64 },
    ProfileMismatch { cluster: usize, label: Option<usize>, target: f64, actual: f64 },
    BelowLower { cluster: usize, bound: f64, actual: f64 },
    AboveUpper { cluster: usize, bound: f64, actual: f64 },
    FractionBelow { cluster: usize, label: usize, bound: f64, fraction: f64 },
    FractionAbove { cluster: usize, label: usize, bound: f64, fraction: f64 },
    MissingLabels,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintViolation::Conservation { point, assigned, weight } => {
                write!(f, "point {point}: assigned {assigned}, weight {weight}")
            }
            ConstraintViolation::ProfileMismatch { cluster, label, target, actual } => match label {
                Some(j) => write!(f, "cluster {cluster}, label {j}: target {target}, got {actual}"),
                None => write!(f, "cluster {cluster}: target {target}, got {actual}"),
            },
            ConstraintViolation::BelowLower { cluster, bound, actual } => {
                write!(f, "cluster {cluster}: total {actual} below lower bound {bound}")
            }
            ConstraintViolation::AboveUpper { cluster, bound, actual } => {
                write!(f, "cluster {cluster}: total {actual} above upper bound {bound}")
            }
            ConstraintViolation::FractionBelow { cluster, label, bound, fraction } => {
                write!(f, "cluster {cluster}, label {label}: fraction {fraction} below {bound}")
            }
            ConstraintViolation::FractionAbove { cluster, label, bound, fraction } => {
                write!(f, "cluster {cluster}, label {label}: fraction {fraction} above {bound}")
            }
            ConstraintViolation::MissingLabels => write!(f, "constraint needs labels"),
        }
    }
}

/// Lists every way `sigma` fails `spec` on `set` (empty when feasible within
/// [`FEASIBILITY_TOL`] per constraint).
pub fn check_feasibility(
    inst: &ClusteringInstance,
    set: &WeightedSet,
    sigma: &Assignment,
    spec: &ConstraintSpec,
) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let k = inst.k;
    let mut per_point = vec![0.0; inst.n()];
    for e in &sigma.entries {
        per_point[e.point] += e.mass;
    }
    for (p, w) in set.iter() {
        if (per_point[p] - w).abs() > FEASIBILITY_TOL {
            out.push(ConstraintViolation::Conservation { point: p, assigned: per_point[p], weight: w });
        }
    }
    let totals = sigma.cluster_totals(k);
    match spec {
        ConstraintSpec::Unconstrained => {}
        ConstraintSpec::FixedProfile(ClusterProfile::Plain(targets)) => {
            for (i, (&t, &a)) in targets.iter().zip(&totals).enumerate() {
                if (t - a).abs() > FEASIBILITY_TOL {
                    out.push(ConstraintViolation::ProfileMismatch { cluster: i, label: None, target: t, actual: a });
                }
            }
        }
        ConstraintSpec::FixedProfile(profile @ ClusterProfile::Labeled { labels, .. }) => {
            let by_label = sigma.cluster_label_totals(inst);
            for (i, row) in by_label.iter().enumerate() {
                for j in 0..*labels {
                    let actual = row.get(j).copied().unwrap_or(0.0);
                    let target = profile.value(i, j);
                    if (target - actual).abs() > FEASIBILITY_TOL {
                        out.push(ConstraintViolation::ProfileMismatch { cluster: i, label: Some(j), target, actual });
                    }
                }
            }
        }
        ConstraintSpec::Balanced { lower, upper } => {
            for i in 0..k {
                if totals[i] < lower[i] - FEASIBILITY_TOL {
                    out.push(ConstraintViolation::BelowLower { cluster: i, bound: lower[i], actual: totals[i] });
                }
                if totals[i] > upper[i] + FEASIBILITY_TOL {
                    out.push(ConstraintViolation::AboveUpper { cluster: i, bound: upper[i], actual: totals[i] });
                }
            }
        }
        ConstraintSpec::FractionBounds(fb) => {
            if inst.labels.is_none() {
                out.push(ConstraintViolation::MissingLabels);
                return out;
            }
            let by_label = sigma.cluster_label_totals(inst);
            for i in 0..k {
                for j in 0..fb.labels {
                    let part = by_label[i].get(j).copied().unwrap_or(0.0);
                    let (alpha, beta) = (fb.alpha[i * fb.labels + j], fb.beta[i * fb.labels + j]);
                    let fraction = if totals[i] > 0.0 { part / totals[i] } else { 0.0 };
                    if alpha * totals[i] - part > FEASIBILITY_TOL {
                        out.push(ConstraintViolation::FractionBelow { cluster: i, label: j, bound: alpha, fraction });
                    }
                    if part - beta * totals[i] > FEASIBILITY_TOL {
                        out.push(ConstraintViolation::FractionAbove { cluster: i, label: j, bound: beta, fraction });
                    }
                }
            }
        }
    }
    out
}
