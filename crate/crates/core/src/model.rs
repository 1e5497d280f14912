//! Instance representation: metric spaces, weighted point sets, cluster
//! profiles and fractional assignments.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Relative tolerance used for weight and profile bookkeeping.
pub const REL_TOL: f64 = 1e-9;

/// Distance oracle over a dense set of sites (points and facilities share it).
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    Euclidean { dim: usize, coords: Vec<Vec<f64>> },
    /// Row-major `size x size` matrix.
    Explicit { size: usize, matrix: Vec<f64> },
}

impl MetricSpace {
    pub fn euclidean(dim: usize, coords: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("euclidean dimension must be positive".into()));
        }
        if let Some(bad) = coords.iter().position(|c| c.len() != dim) {
            return Err(Error::Dimension(format!(
                "site {bad} has {} coordinates, expected {dim}",
                coords[bad].len()
            )));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coordinates"));
        }
        Ok(MetricSpace::Euclidean { dim, coords })
    }

    pub fn explicit(size: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != size * size {
            return Err(Error::Dimension(format!(
                "distance matrix has {} entries, expected {}",
                matrix.len(),
                size * size
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("distance matrix"));
        }
        Ok(MetricSpace::Explicit { size, matrix })
    }

    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Euclidean { coords, .. } => coords.len(),
            MetricSpace::Explicit { size, .. } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, MetricSpace::Euclidean { .. })
    }

    pub fn coords(&self, site: usize) -> Option<&[f64]> {
        match self {
            MetricSpace::Euclidean { coords, .. } => coords.get(site).map(Vec::as_slice),
            MetricSpace::Explicit { .. } => None,
        }
    }

    /// Checked distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        let len = self.len();
        for index in [a, b] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(self.dist(a, b))
    }

    #[inline]
    pub(crate) fn dist(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        match self {
            MetricSpace::Euclidean { coords, .. } => coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            MetricSpace::Explicit { size, matrix } => matrix[a * size + b],
        }
    }

    /// Multiplies every distance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            MetricSpace::Euclidean { dim, coords } => MetricSpace::Euclidean {
                dim: *dim,
                coords: coords
                    .iter()
                    .map(|c| c.iter().map(|v| v * factor).collect())
                    .collect(),
            },
            MetricSpace::Explicit { size, matrix } => MetricSpace::Explicit {
                size: *size,
                matrix: matrix.iter().map(|v| v * factor).collect(),
            },
        }
    }

    /// Returns a copy with extra Euclidean sites appended, plus their site indices.
    pub fn with_extra_sites(&self, extra: &[Vec<f64>]) -> Result<(Self, Vec<usize>)> {
        match self {
            MetricSpace::Euclidean { dim, coords } => {
                let first = coords.len();
                let mut all = coords.clone();
                all.extend(extra.iter().cloned());
                let space = MetricSpace::euclidean(*dim, all)?;
                Ok((space, (first..first + extra.len()).collect()))
            }
            MetricSpace::Explicit { .. } => Err(Error::Incompatible(
                "synthetic centers require a euclidean space".into(),
            )),
        }
    }

    /// Triples `(a, b, c)` with `d(a,c) > d(a,b) + d(b,c) + 1e-9` among
    /// `samples` random triples.
    pub fn sampled_triangle_violations(&self, samples: usize, seed: u64) -> Vec<(usize, usize, usize)> {
        let n = self.len();
        if n < 3 {
            return Vec::new();
        }
        let mut rng = rng::stream(seed, &[0x7a1a]);
        (0..samples)
            .filter_map(|_| {
                let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                self.violates_triangle(a, b, c).then_some((a, b, c))
            })
            .collect()
    }

    /// Exhaustive O(n^3) triangle-inequality check.
    pub fn triangle_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.violates_triangle(a, b, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    fn violates_triangle(&self, a: usize, b: usize, c: usize) -> bool {
        self.dist(a, c) > self.dist(a, b) + self.dist(b, c) + 1e-9
    }
}

/// Nearest site of `candidates` to site `x`; ties go to the lowest site index.
pub fn nearest_facility(space: &MetricSpace, x: usize, candidates: &[usize]) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::EmptyFacilitySet);
    }
    let mut best: Option<(usize, f64)> = None;
    for &f in candidates {
        let d = space.distance(x, f)?;
        best = match best {
            Some((bf, bd)) if bd < d || (bd == d && bf < f) => Some((bf, bd)),
            _ => Some((f, d)),
        };
    }
    Ok(best.expect("nonempty"))
}

/// The clustering objective: k-median (`z = 1`) or k-means (`z = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    KMedian,
    KMeans,
}

impl Objective {
    pub fn from_z(z: u32) -> Result<Self> {
        match z {
            1 => Ok(Objective::KMedian),
            2 => Ok(Objective::KMeans),
            other => Err(Error::Incompatible(format!("z must be 1 or 2, got {other}"))),
        }
    }

    pub fn z(self) -> u32 {
        match self {
            Objective::KMedian => 1,
            Objective::KMeans => 2,
        }
    }

    /// `d^z`
    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Objective::KMedian => d,
            Objective::KMeans => d * d,
        }
    }
}

/// Label map `X -> [m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub of: Vec<usize>,
    pub count: usize,
}

impl Labels {
    /// Builds labels with `count` inferred as `max + 1`.
    pub fn from_vec(of: Vec<usize>) -> Self {
        let count = of.iter().max().map_or(0, |m| m + 1);
        Labels { of, count }
    }
}

/// A weighted clustering instance `(X, F, w, k)` over a shared metric space.
///
/// Points and facilities are referred to by their position in `points` and
/// `facilities`; those vectors map positions to site indices of `space`.
#[derive(Debug, Clone)]
pub struct ClusteringInstance {
    pub space: Arc<MetricSpace>,
    pub points: Vec<usize>,
    pub weights: Vec<f64>,
    pub facilities: Vec<usize>,
    pub k: usize,
    pub objective: Objective,
    pub labels: Option<Labels>,
}

impl ClusteringInstance {
    pub fn new(
        space: MetricSpace,
        points: Vec<usize>,
        weights: Vec<f64>,
        facilities: Vec<usize>,
        k: usize,
        objective: Objective,
    ) -> Self {
        ClusteringInstance {
            space: Arc::new(space),
            points,
            weights,
            facilities,
            k,
            objective,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    /// Validates and returns the instance, or the violation report.
    pub fn validated(self) -> Result<Self> {
        let report = validate_instance(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidInstance(report))
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.as_ref().map_or(1, |l| l.count)
    }

    pub fn label(&self, point: usize) -> usize {
        self.labels.as_ref().map_or(0, |l| l.of[point])
    }

    /// Distance from point `p` to facility `f`.
    #[inline]
    pub fn dist(&self, p: usize, f: usize) -> f64 {
        self.space.dist(self.points[p], self.facilities[f])
    }

    /// `D(p, f)^z`
    #[inline]
    pub fn cost(&self, p: usize, f: usize) -> f64 {
        self.objective.apply(self.dist(p, f))
    }

    pub fn facility_dist(&self, f: usize, g: usize) -> f64 {
        self.space.dist(self.facilities[f], self.facilities[g])
    }

    /// Nearest of the facilities `among` (facility positions) to point `p`.
    /// Ties go to the lowest facility position.
    pub fn nearest_facility(&self, p: usize, among: &[usize]) -> Result<(usize, f64)> {
        if among.is_empty() {
            return Err(Error::EmptyFacilitySet);
        }
        let mut best = (usize::MAX, f64::INFINITY);
        for &f in among {
            let d = self.dist(p, f);
            if d < best.1 || (d == best.1 && f < best.0) {
                best = (f, d);
            }
        }
        Ok(best)
    }

    /// Nearest facility over all of `F`.
    pub fn nearest_any_facility(&self, p: usize) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for f in 0..self.facilities.len() {
            let d = self.dist(p, f);
            if d < best.1 {
                best = (f, d);
            }
        }
        best
    }

    /// Whether every point coincides (distance zero) with some facility.
    pub fn points_within_facilities(&self) -> bool {
        (0..self.n()).all(|p| (0..self.facilities.len()).any(|f| self.dist(p, f) == 0.0))
    }

    /// Copy of the instance with all distances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ClusteringInstance {
            space: Arc::new(self.space.scaled(factor)),
            ..self.clone()
        }
    }

    /// Appends Euclidean facilities at `coords`, returning the new instance and
    /// the facility positions of the appended centers.
    pub fn with_extra_facilities(&self, coords: &[Vec<f64>]) -> Result<(Self, Vec<usize>)> {
        let (space, sites) = self.space.with_extra_sites(coords)?;
        let first = self.facilities.len();
        let mut facilities = self.facilities.clone();
        facilities.extend(sites);
        let inst = ClusteringInstance {
            space: Arc::new(space),
            facilities,
            ..self.clone()
        };
        Ok((inst, (first..first + coords.len()).collect()))
    }

    /// The whole point set with its original weights.
    pub fn full_set(&self) -> WeightedSet {
        WeightedSet {
            points: (0..self.n()).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Points of label `label` with their original weights.
    pub fn label_class(&self, label: usize) -> WeightedSet {
        let points: Vec<usize> = (0..self.n()).filter(|&p| self.label(p) == label).collect();
        let weights = points.iter().map(|&p| self.weights[p]).collect();
        WeightedSet { points, weights }
    }
}

/// A weighted subset of the instance's points (`(X, w)` or a summary `(S, v)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSet {
    /// Point positions in the owning instance.
    pub points: Vec<usize>,
    pub weights: Vec<f64>,
}

impl WeightedSet {
    pub fn new(points: Vec<usize>, weights: Vec<f64>) -> Self {
        WeightedSet { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Total weight per label.
    pub fn label_totals(&self, inst: &ClusteringInstance) -> Vec<f64> {
        let mut totals = vec![0.0; inst.num_labels()];
        for (p, w) in self.iter() {
            totals[inst.label(p)] += w;
        }
        totals
    }
}

/// Per-cluster weight targets `Γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClusterProfile {
    Plain(Vec<f64>),
    /// `values[i * labels + j]` is the weight of label `j` in cluster `i`.
    Labeled { labels: usize, values: Vec<f64> },
}

impl ClusterProfile {
    pub fn k(&self) -> usize {
        match self {
            ClusterProfile::Plain(v) => v.len(),
            ClusterProfile::Labeled { labels, values } => values.len() / (*labels).max(1),
        }
    }

    /// Total weight targeted at each cluster.
    pub fn cluster_totals(&self) -> Vec<f64> {
        match self {
            ClusterProfile::Plain(v) => v.clone(),
            ClusterProfile::Labeled { labels, values } => {
                values.chunks(*labels).map(|c| c.iter().sum()).collect()
            }
        }
    }

    pub fn value(&self, cluster: usize, label: usize) -> f64 {
        match self {
            ClusterProfile::Plain(v) => v[cluster],
            ClusterProfile::Labeled { labels, values } => values[cluster * labels + label],
        }
    }

    /// Checks consistency with `set`: nonnegative entries and totals matching
    /// the set's weight (per label for labeled profiles).
    pub fn check_consistent(&self, set: &WeightedSet, inst: &ClusteringInstance) -> Result<()> {
        let values = match self {
            ClusterProfile::Plain(v) => v,
            ClusterProfile::Labeled { values, .. } => values,
        };
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProfile("entries must be finite and nonnegative".into()));
        }
        let total = set.total_weight();
        match self {
            ClusterProfile::Plain(v) => {
                let sum: f64 = v.iter().sum();
                if (sum - total).abs() > REL_TOL * total.max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidProfile(format!(
                        "profile sums to {sum}, point weight is {total}"
                    )));
                }
            }
            ClusterProfile::Labeled { labels, values } => {
                if *labels == 0 || values.len() % labels != 0 {
                    return Err(Error::InvalidProfile("labeled profile has ragged shape".into()));
                }
                let label_totals = set.label_totals(inst);
                if label_totals.len() > *labels {
                    return Err(Error::InvalidProfile(format!(
                        "instance has {} labels, profile has {labels}",
                        label_totals.len()
                    )));
                }
                for j in 0..*labels {
                    let want = label_totals.get(j).copied().unwrap_or(0.0);
                    let sum: f64 = values.iter().skip(j).step_by(*labels).sum();
                    if (sum - want).abs() > REL_TOL * total.max(f64::MIN_POSITIVE) {
                        return Err(Error::InvalidProfile(format!(
                            "label {j}: profile sums to {sum}, label weight is {want}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub point: usize,
    pub cluster: usize,
    pub mass: f64,
}

/// Sparse fractional assignment `σ: X × [k] → R+`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub entries: Vec<AssignmentEntry>,
}

impl Assignment {
    pub fn push(&mut self, point: usize, cluster: usize, mass: f64) {
        if mass > 0.0 {
            self.entries.push(AssignmentEntry { point, cluster, mass });
        }
    }

    pub fn cluster_totals(&self, k: usize) -> Vec<f64> {
        let mut totals = vec![0.0; k];
        for e in &self.entries {
            totals[e.cluster] += e.mass;
        }
        totals
    }

    /// `totals[i][j]`: mass of label `j` in cluster `i`.
    pub fn cluster_label_totals(&self, inst: &ClusteringInstance) -> Vec<Vec<f64>> {
        let mut totals = vec![vec![0.0; inst.num_labels()]; inst.k];
        for e in &self.entries {
            totals[e.cluster][inst.label(e.point)] += e.mass;
        }
        totals
    }

    /// Verifies `Σ_i σ(x, i) = w(x)` for every point of `set`, and that no mass
    /// is negative or placed on points outside `set`.
    pub fn check_conservation(&self, set: &WeightedSet) -> Result<()> {
        let max_point = set.points.iter().copied().max().map_or(0, |m| m + 1);
        let mut slot = vec![usize::MAX; max_point];
        for (i, &p) in set.points.iter().enumerate() {
            slot[p] = i;
        }
        let mut assigned = vec![0.0; set.len()];
        for e in &self.entries {
            if e.mass < 0.0 || !e.mass.is_finite() {
                return Err(Error::WeightConservation { point: e.point, assigned: e.mass, weight: 0.0 });
            }
            match slot.get(e.point) {
                Some(&s) if s != usize::MAX => assigned[s] += e.mass,
                _ => {
                    return Err(Error::WeightConservation { point: e.point, assigned: e.mass, weight: 0.0 })
                }
            }
        }
        for (i, (p, w)) in set.iter().enumerate() {
            if (assigned[i] - w).abs() > REL_TOL * w.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::WeightConservation { point: p, assigned: assigned[i], weight: w });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveWeight { point: usize, weight: f64 },
    WeightCountMismatch { points: usize, weights: usize },
    KIsZero,
    KExceedsFacilities { k: usize, facilities: usize },
    SiteOutOfRange { role: &'static str, position: usize, site: usize },
    LabelCountMismatch { points: usize, labels: usize },
    LabelOutOfRange { point: usize, label: usize, count: usize },
    NonzeroDiagonal { site: usize, value: f64 },
    Asymmetric { a: usize, b: usize },
    NegativeDistance { a: usize, b: usize },
    NoPoints,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveWeight { point, weight } => {
                write!(f, "nonpositive weight {weight} on point {point}")
            }
            Violation::WeightCountMismatch { points, weights } => {
                write!(f, "{points} points but {weights} weights")
            }
            Violation::KIsZero => write!(f, "k must be positive"),
            Violation::KExceedsFacilities { k, facilities } => {
                write!(f, "k = {k} exceeds the number of facilities ({facilities})")
            }
            Violation::SiteOutOfRange { role, position, site } => {
                write!(f, "{role} {position} refers to missing site {site}")
            }
            Violation::LabelCountMismatch { points, labels } => {
                write!(f, "{points} points but {labels} labels")
            }
            Violation::LabelOutOfRange { point, label, count } => {
                write!(f, "point {point} has label {label}, outside [0, {count})")
            }
            Violation::NonzeroDiagonal { site, value } => {
                write!(f, "d({site},{site}) = {value}, expected 0")
            }
            Violation::Asymmetric { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            Violation::NegativeDistance { a, b } => write!(f, "d({a},{b}) is negative"),
            Violation::NoPoints => write!(f, "instance has no points"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Sampled triangle-inequality failures; reported, never fatal.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Number of random triples checked per explicit matrix.
pub const TRIANGLE_SAMPLES: usize = 1000;

/// Lists every violated instance invariant without modifying the instance.
pub fn validate_instance(inst: &ClusteringInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let sites = inst.space.len();

    if inst.points.is_empty() {
        v.push(Violation::NoPoints);
    }
    if inst.weights.len() != inst.points.len() {
        v.push(Violation::WeightCountMismatch { points: inst.points.len(), weights: inst.weights.len() });
    }
    for (point, &weight) in inst.weights.iter().enumerate() {
        if !(weight > 0.0 && weight.is_finite()) {
            v.push(Violation::NonPositiveWeight { point, weight });
        }
    }
    if inst.k == 0 {
        v.push(Violation::KIsZero);
    }
    if inst.k > inst.facilities.len() {
        v.push(Violation::KExceedsFacilities { k: inst.k, facilities: inst.facilities.len() });
    }
    for (role, list) in [("point", &inst.points), ("facility", &inst.facilities)] {
        for (position, &site) in list.iter().enumerate() {
            if site >= sites {
                v.push(Violation::SiteOutOfRange { role, position, site });
            }
        }
    }
    if let Some(labels) = &inst.labels {
        if labels.of.len() != inst.points.len() {
            v.push(Violation::LabelCountMismatch { points: inst.points.len(), labels: labels.of.len() });
        }
        for (point, &label) in labels.of.iter().enumerate() {
            if label >= labels.count {
                v.push(Violation::LabelOutOfRange { point, label, count: labels.count });
            }
        }
    }
    if let MetricSpace::Explicit { size, matrix } = inst.space.as_ref() {
        for a in 0..*size {
            let diag = matrix[a * size + a];
            if diag != 0.0 {
                v.push(Violation::NonzeroDiagonal { site: a, value: diag });
            }
            for b in a + 1..*size {
                let (ab, ba) = (matrix[a * size + b], matrix[b * size + a]);
                if ab < 0.0 || ba < 0.0 {
                    v.push(Violation::NegativeDistance { a, b });
                }
                if (ab - ba).abs() > 1e-12 {
                    v.push(Violation::Asymmetric { a, b });
                }
            }
        }
        let bad = inst.space.sampled_triangle_violations(TRIANGLE_SAMPLES, 0);
        if let Some(&(a, b, c)) = bad.first() {
            report.warnings.push(format!(
                "{} of {TRIANGLE_SAMPLES} sampled triples violate the triangle inequality, e.g. ({a},{b},{c})",
                bad.len()
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line_instance() -> ClusteringInstance {
        let coords: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
        let space = MetricSpace::euclidean(1, coords).unwrap();
        ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), 2, Objective::KMedian)
    }

    #[test]
    fn euclidean_distance() {
        let space = MetricSpace::euclidean(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(space.distance(0, 1).unwrap(), 5.0);
        assert_eq!(space.distance(1, 1).unwrap(), 0.0);
        assert!(matches!(space.distance(0, 2), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn explicit_lookup() {
        let space = MetricSpace::explicit(2, vec![0.0, 7.5, 7.5, 0.0]).unwrap();
        assert_eq!(space.distance(0, 1).unwrap(), 7.5);
        assert_eq!(space.distance(0, 0).unwrap(), 0.0);
        assert!(MetricSpace::explicit(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn nearest_facility_rules() {
        let coords: Vec<Vec<f64>> = [2.0, 1.0, 9.0, 5.0].iter().map(|&x| vec![x]).collect();
        let space = MetricSpace::euclidean(1, coords).unwrap();
        assert_eq!(nearest_facility(&space, 0, &[1, 2]).unwrap(), (1, 1.0));
        assert_eq!(nearest_facility(&space, 3, &[2, 1]).unwrap(), (1, 4.0));
        assert_eq!(nearest_facility(&space, 3, &[2]).unwrap(), (2, 4.0));
        assert!(matches!(nearest_facility(&space, 0, &[]), Err(Error::EmptyFacilitySet)));
    }

    #[test]
    fn validation_reports() {
        let inst = line_instance();
        assert!(validate_instance(&inst).is_valid());

        let mut bad = line_instance();
        bad.weights[2] = 0.0;
        let report = validate_instance(&bad);
        assert_eq!(report.violations, vec![Violation::NonPositiveWeight { point: 2, weight: 0.0 }]);

        let mut bad = line_instance();
        bad.k = 6;
        let report = validate_instance(&bad);
        assert_eq!(report.violations, vec![Violation::KExceedsFacilities { k: 6, facilities: 5 }]);
        assert!(report.to_string().contains("exceeds"));
    }

    #[test]
    fn explicit_checks() {
        let space = MetricSpace::explicit(3, vec![0.0, 1.0, 10.0, 1.0, 0.0, 1.0, 10.0, 1.0, 0.0]).unwrap();
        assert!(!space.triangle_violations().is_empty());
        let inst = ClusteringInstance::new(space, vec![0, 1, 2], vec![1.0; 3], vec![0, 1, 2], 1, Objective::KMedian);
        let report = validate_instance(&inst);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);

        let space = MetricSpace::explicit(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        let inst = ClusteringInstance::new(space, vec![0, 1], vec![1.0; 2], vec![0, 1], 1, Objective::KMedian);
        assert_eq!(validate_instance(&inst).violations, vec![Violation::Asymmetric { a: 0, b: 1 }]);
    }

    #[test]
    fn profile_and_assignment_invariants() {
        let inst = line_instance();
        let set = inst.full_set();
        assert!(ClusterProfile::Plain(vec![3.0, 2.0]).check_consistent(&set, &inst).is_ok());
        assert!(ClusterProfile::Plain(vec![3.0, 1.0]).check_consistent(&set, &inst).is_err());

        let mut a = Assignment::default();
        for p in 0..5 {
            a.push(p, usize::from(p >= 3), 1.0);
        }
        assert!(a.check_conservation(&set).is_ok());
        assert_eq!(a.cluster_totals(2), vec![3.0, 2.0]);
        a.entries[0].mass = 0.5;
        assert!(matches!(a.check_conservation(&set), Err(Error::WeightConservation { point: 0, .. })));
    }
}
