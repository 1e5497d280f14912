//! File formats, instance generators and the command-line driver.
//!
//! Every file is pretty-printed JSON with a trailing newline. Commands take
//! `--seed` and write byte-identical files for identical arguments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateParams;
use crate::constraints::{ConstraintSpec, FractionBounds, LDiversityReading};
use crate::coreset::{build_universal_weak_coreset, CandidateSet, CoresetMeta, CoresetMode, SummaryParams, WeakCoreset};
use crate::error::{Error, Result};
use crate::meta::{solve_constrained, SolveOptions, SolveResult, DEFAULT_TUPLE_CEILING};
use crate::model::{ClusterProfile, ClusteringInstance, Labels, MetricSpace, Objective, WeightedSet};
use crate::oracle::{brute_force_opt, verify_property_a, verify_property_b};
use crate::rng::stream;

/// Largest instance file accepted, in bytes.
pub const MAX_INSTANCE_BYTES: u64 = 100 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

/// A facility: coordinates in Euclidean files, a matrix index in explicit ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FacilityEntry {
    Index(usize),
    Coords(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub metric: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub points: Vec<PointEntry>,
    pub facilities: Vec<FacilityEntry>,
    pub k: usize,
    pub z: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_matrix: Option<Vec<f64>>,
}

impl InstanceFile {
    /// Builds and validates the instance.
    pub fn to_instance(&self) -> Result<ClusteringInstance> {
        let objective = Objective::from_z(self.z)?;
        let weights: Vec<f64> = self.points.iter().map(|p| p.weight).collect();
        let (space, points, facilities) = match self.metric {
            MetricKind::Euclidean => {
                let mut coords = Vec::with_capacity(self.points.len() + self.facilities.len());
                for (i, p) in self.points.iter().enumerate() {
                    coords.push(p.coords.clone().ok_or_else(|| Error::Dimension(format!("point {i} has no coords")))?);
                }
                for (i, f) in self.facilities.iter().enumerate() {
                    match f {
                        FacilityEntry::Coords(c) => coords.push(c.clone()),
                        FacilityEntry::Index(_) => {
                            return Err(Error::Dimension(format!("facility {i} needs coordinates")));
                        }
                    }
                }
                let dim = self.dim.or_else(|| coords.first().map(Vec::len)).unwrap_or(0);
                let n = self.points.len();
                let space = MetricSpace::euclidean(dim, coords)?;
                (space, (0..n).collect(), (n..n + self.facilities.len()).collect())
            }
            MetricKind::Explicit => {
                let matrix = self
                    .distance_matrix
                    .clone()
                    .ok_or_else(|| Error::Dimension("explicit metric needs distance_matrix".into()))?;
                let size = (matrix.len() as f64).sqrt().round() as usize;
                let space = MetricSpace::explicit(size, matrix)?;
                let points = self
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.index.ok_or_else(|| Error::Dimension(format!("point {i} has no index"))))
                    .collect::<Result<Vec<_>>>()?;
                let facilities = self
                    .facilities
                    .iter()
                    .enumerate()
                    .map(|(i, f)| match f {
                        FacilityEntry::Index(x) => Ok(*x),
                        FacilityEntry::Coords(_) => Err(Error::Dimension(format!("facility {i} needs an index"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                (space, points, facilities)
            }
        };
        let mut inst = ClusteringInstance::new(space, points, weights, facilities, self.k, objective);
        let labeled = self.points.iter().filter(|p| p.label.is_some()).count();
        if labeled == self.points.len() && labeled > 0 {
            inst = inst.with_labels(Labels::from_vec(self.points.iter().map(|p| p.label.unwrap_or(0)).collect()));
        } else if labeled > 0 {
            return Err(Error::InvalidConstraint("either every point or no point carries a label".into()));
        }
        inst.validated()
    }

    pub fn from_instance(inst: &ClusteringInstance) -> Self {
        let label = |p: usize| inst.labels.as_ref().map(|l| l.of[p]);
        match inst.space.as_ref() {
            MetricSpace::Euclidean { dim, .. } => InstanceFile {
                metric: MetricKind::Euclidean,
                dim: Some(*dim),
                points: (0..inst.n())
                    .map(|p| PointEntry {
                        coords: inst.space.coords(inst.points[p]).map(<[f64]>::to_vec),
                        index: None,
                        weight: inst.weights[p],
                        label: label(p),
                    })
                    .collect(),
                facilities: inst
                    .facilities
                    .iter()
                    .map(|&s| FacilityEntry::Coords(inst.space.coords(s).expect("euclidean site").to_vec()))
                    .collect(),
                k: inst.k,
                z: inst.objective.z(),
                distance_matrix: None,
            },
            MetricSpace::Explicit { matrix, .. } => InstanceFile {
                metric: MetricKind::Explicit,
                dim: None,
                points: (0..inst.n())
                    .map(|p| PointEntry { coords: None, index: Some(inst.points[p]), weight: inst.weights[p], label: label(p) })
                    .collect(),
                facilities: inst.facilities.iter().map(|&s| FacilityEntry::Index(s)).collect(),
                k: inst.k,
                z: inst.objective.z(),
                distance_matrix: Some(matrix.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub point: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetParamsEntry {
    pub mode: CoresetMode,
    pub candidates: CandidateParams,
    pub summary: SummaryParams,
    pub j_bound: usize,
    pub per_ring_samples: usize,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetFile {
    #[serde(rename = "J")]
    pub j: CandidateSet,
    #[serde(rename = "S")]
    pub s: Vec<SummaryEntry>,
    pub alpha: f64,
    pub z: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub params: CoresetParamsEntry,
}

impl From<&WeakCoreset> for CoresetFile {
    fn from(c: &WeakCoreset) -> Self {
        let m = &c.meta;
        CoresetFile {
            j: c.candidates.clone(),
            s: c.summary.iter().map(|(point, weight)| SummaryEntry { point, weight }).collect(),
            alpha: m.alpha,
            z: m.z,
            epsilon: m.epsilon,
            delta: m.delta,
            seed: m.seed,
            params: CoresetParamsEntry {
                mode: m.mode,
                candidates: m.candidates.clone(),
                summary: m.summary.clone(),
                j_bound: m.j_bound,
                per_ring_samples: m.per_ring_samples,
                labeled: m.labeled,
            },
        }
    }
}

impl From<CoresetFile> for WeakCoreset {
    fn from(f: CoresetFile) -> Self {
        let (points, weights) = f.s.into_iter().map(|e| (e.point, e.weight)).unzip();
        WeakCoreset {
            candidates: f.j,
            summary: WeightedSet::new(points, weights),
            meta: CoresetMeta {
                mode: f.params.mode,
                alpha: f.alpha,
                z: f.z,
                epsilon: f.epsilon,
                delta: f.delta,
                seed: f.seed,
                candidates: f.params.candidates,
                summary: f.params.summary,
                j_bound: f.params.j_bound,
                per_ring_samples: f.params.per_ring_samples,
                labeled: f.params.labeled,
            },
        }
    }
}

/// Per-cluster vector, or `k x m` matrix indexed `[cluster][label]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerCluster {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl PerCluster {
    fn broadcast(&self, k: usize, m: usize) -> Result<Vec<f64>> {
        match self {
            PerCluster::Vector(v) if v.len() == k => Ok(v.iter().flat_map(|&x| std::iter::repeat_n(x, m)).collect()),
            PerCluster::Matrix(rows) if rows.len() == k && rows.iter().all(|r| r.len() == m) => Ok(rows.concat()),
            _ => Err(Error::InvalidConstraint(format!("expected {k} values or a {k} x {m} matrix"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConstraintFile {
    Unconstrained,
    Profile {
        gamma: PerCluster,
    },
    Balanced {
        lower: Vec<f64>,
        /// `null` means unbounded.
        upper: Vec<Option<f64>>,
    },
    Fractions {
        alpha: PerCluster,
        beta: PerCluster,
    },
    Ldiversity {
        l: f64,
        #[serde(default)]
        direction: LDiversityReading,
    },
}

impl ConstraintFile {
    pub fn to_spec(&self, inst: &ClusteringInstance) -> Result<ConstraintSpec> {
        let (k, m) = (inst.k, inst.num_labels());
        let spec = match self {
            ConstraintFile::Unconstrained => ConstraintSpec::Unconstrained,
            ConstraintFile::Profile { gamma: PerCluster::Vector(v) } => ConstraintSpec::FixedProfile(ClusterProfile::Plain(v.clone())),
            ConstraintFile::Profile { gamma: PerCluster::Matrix(rows) } => {
                let labels = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != labels) {
                    return Err(Error::InvalidProfile("profile matrix is ragged".into()));
                }
                ConstraintSpec::FixedProfile(ClusterProfile::Labeled { labels, values: rows.concat() })
            }
            ConstraintFile::Balanced { lower, upper } => ConstraintSpec::Balanced {
                lower: lower.clone(),
                upper: upper.iter().map(|u| u.unwrap_or(f64::INFINITY)).collect(),
            },
            ConstraintFile::Fractions { alpha, beta } => ConstraintSpec::FractionBounds(FractionBounds {
                labels: m,
                alpha: alpha.broadcast(k, m)?,
                beta: beta.broadcast(k, m)?,
            }),
            ConstraintFile::Ldiversity { l, direction } => {
                if l.is_nan() || *l < 1.0 {
                    return Err(Error::InvalidConstraint(format!("l = {l} must be at least 1")));
                }
                ConstraintSpec::FractionBounds(FractionBounds::l_diversity(k, m, *l, *direction))
            }
        };
        spec.validate(inst)?;
        Ok(spec)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<ClusteringInstance> {
    let size = fs::metadata(path)?.len();
    if size > MAX_INSTANCE_BYTES {
        return Err(Error::TooLarge(format!("instance file is {size} bytes, limit is {MAX_INSTANCE_BYTES}")));
    }
    let file: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.to_instance()
}

pub fn read_coreset(path: &Path) -> Result<WeakCoreset> {
    let file: CoresetFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(file.into())
}

pub fn read_constraint(path: &Path, inst: &ClusteringInstance) -> Result<ConstraintSpec> {
    let file: ConstraintFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.to_spec(inst)
}

/// Writes `point,cluster,mass` rows.
pub fn write_assignment_csv(path: &Path, result: &SolveResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in &result.assignment_on_full.entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Line,
    PlanarBlobs,
    RandomMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub n: usize,
    pub facilities: usize,
    pub k: usize,
    /// Number of labels; 1 means unlabeled.
    pub labels: usize,
    pub z: u32,
    pub seed: u64,
}

fn random_labels(n: usize, m: usize, rng: &mut impl Rng) -> Option<Labels> {
    (m > 1).then(|| Labels { of: (0..n).map(|_| rng.random_range(0..m)).collect(), count: m })
}

/// Builds a synthetic instance. `line` with `n = 5` is `{0, 1, 2, 9, 10}`
/// with unit weights and `F = X`.
pub fn generate(cfg: &GeneratorConfig) -> Result<ClusteringInstance> {
    if cfg.n == 0 || cfg.k == 0 {
        return Err(Error::InvalidConstraint("n and k must be positive".into()));
    }
    let objective = Objective::from_z(cfg.z)?;
    let mut rng = stream(cfg.seed, &[]);
    let inst = match cfg.kind {
        GeneratorKind::Line => {
            let left = cfg.n.div_ceil(2);
            let coords: Vec<Vec<f64>> =
                (0..cfg.n).map(|i| if i < left { vec![i as f64] } else { vec![9.0 + (i - left) as f64] }).collect();
            let space = MetricSpace::euclidean(1, coords)?;
            let inst = ClusteringInstance::new(space, (0..cfg.n).collect(), vec![1.0; cfg.n], (0..cfg.n).collect(), cfg.k, objective);
            match random_labels(cfg.n, cfg.labels, &mut rng) {
                Some(l) => inst.with_labels(l),
                None => inst,
            }
        }
        GeneratorKind::PlanarBlobs => {
            let noise = Normal::new(0.0, 5.0).expect("valid normal");
            let centers: Vec<[f64; 2]> =
                (0..cfg.k).map(|_| [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)]).collect();
            let coords: Vec<Vec<f64>> = (0..cfg.n)
                .map(|_| {
                    let c = centers[rng.random_range(0..cfg.k)];
                    vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]
                })
                .collect();
            let weights: Vec<f64> = (0..cfg.n).map(|_| rng.random_range(0.5..1.5)).collect();
            let labels = random_labels(cfg.n, cfg.labels, &mut rng);
            let nf = cfg.facilities.min(cfg.n);
            let mut chosen = index::sample(&mut rng, cfg.n, nf).into_vec();
            chosen.sort_unstable();
            let mut all = coords.clone();
            all.extend(chosen.iter().map(|&i| coords[i].clone()));
            let space = MetricSpace::euclidean(2, all)?;
            let inst = ClusteringInstance::new(space, (0..cfg.n).collect(), weights, (cfg.n..cfg.n + nf).collect(), cfg.k, objective);
            match labels {
                Some(l) => inst.with_labels(l),
                None => inst,
            }
        }
        GeneratorKind::RandomMetric => {
            let n = cfg.n;
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let w = rng.random_range(1.0..10.0);
                    d[i * n + j] = w;
                    d[j * n + i] = w;
                }
            }
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let via = d[i * n + m] + d[m * n + j];
                        if via < d[i * n + j] {
                            d[i * n + j] = via;
                        }
                    }
                }
            }
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let labels = random_labels(n, cfg.labels, &mut rng);
            let mut facilities = index::sample(&mut rng, n, cfg.facilities.min(n)).into_vec();
            facilities.sort_unstable();
            let space = MetricSpace::explicit(n, d)?;
            let inst = ClusteringInstance::new(space, (0..n).collect(), weights, facilities, cfg.k, objective);
            match labels {
                Some(l) => inst.with_labels(l),
                None => inst,
            }
        }
    };
    inst.validated()
}

#[derive(Debug, Parser)]
#[command(name = "uwcoreset", version, about = "Universal weak coresets for constrained k-median and k-means")]
pub struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for enumeration and trials (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Cost exponent; overrides the instance's value when given.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub z: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Build a universal weak coreset.
    Coreset(CoresetArgs),
    /// Pick centers on a coreset and assign the full instance.
    Solve(SolveArgs),
    /// Exact optimum by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Empirically check the coreset properties.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GeneratorKind,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Facility count (planar-blobs and random-metric).
    #[arg(long, default_value_t = 10)]
    pub facilities: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Number of labels; 1 means unlabeled.
    #[arg(long, default_value_t = 1)]
    pub labels: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Metric,
    EuclideanKmeans,
}

#[derive(Debug, Args)]
pub struct CoresetArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Metric)]
    pub mode: ModeArg,
    /// Mixed draws for the candidate set.
    #[arg(long)]
    pub eta: Option<usize>,
    /// Probability of a weight-proportional draw.
    #[arg(long)]
    pub mix: Option<f64>,
    /// Constant in the per-ring sample count.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Fixed per-ring sample count.
    #[arg(long)]
    pub per_ring: Option<usize>,
    #[arg(long)]
    pub max_rings: Option<usize>,
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[arg(long)]
    pub base_size: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Coreset file; without one, every facility and point is used.
    #[arg(long)]
    pub coreset: Option<PathBuf>,
    /// Constraint file; unconstrained when absent.
    #[arg(long)]
    pub constraint: Option<PathBuf>,
    /// Enumerate ordered tuples regardless of constraint symmetry.
    #[arg(long, conflicts_with = "unordered")]
    pub ordered: bool,
    #[arg(long)]
    pub unordered: bool,
    /// Allow a facility to appear more than once in a tuple.
    #[arg(long)]
    pub repeats: bool,
    #[arg(long)]
    pub cost_target: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TUPLE_CEILING)]
    pub ceiling: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub assignment_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub constraint: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TUPLE_CEILING)]
    pub ceiling: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    A,
    B,
    Both,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub coreset: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::B)]
    pub which: Which,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Ratio window half-width; defaults to the coreset's epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fraction of trials that must land in the window.
    #[arg(long, default_value_t = 0.95)]
    pub required: f64,
    /// Constraint used for the candidate-quality check.
    #[arg(long)]
    pub constraint: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TUPLE_CEILING)]
    pub ceiling: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, exit_code: 0 }
    }
}

fn load_instance(path: &Path, z: Option<u32>) -> Result<ClusteringInstance> {
    let mut inst = read_instance(path)?;
    if let Some(z) = z {
        inst.objective = Objective::from_z(z)?;
    }
    Ok(inst)
}

fn load_spec(path: Option<&Path>, inst: &ClusteringInstance) -> Result<ConstraintSpec> {
    path.map_or(Ok(ConstraintSpec::Unconstrained), |p| read_constraint(p, inst))
}

pub fn cmd_generate(args: &GenerateArgs, seed: u64, z: Option<u32>) -> Result<Outcome> {
    let inst = generate(&GeneratorConfig {
        kind: args.kind,
        n: args.n,
        facilities: args.facilities,
        k: args.k,
        labels: args.labels,
        z: z.unwrap_or(1),
        seed,
    })?;
    write_json(&args.out, &InstanceFile::from_instance(&inst))?;
    Ok(Outcome::ok(format!(
        "wrote {} points, {} facilities, k = {} to {}\n",
        inst.n(),
        inst.num_facilities(),
        inst.k,
        args.out.display()
    )))
}

pub fn cmd_coreset(args: &CoresetArgs, seed: u64, z: Option<u32>) -> Result<Outcome> {
    let inst = load_instance(&args.instance, z)?;
    let defaults = CandidateParams::new(inst.k, args.epsilon, 0);
    let candidates = CandidateParams {
        eta: args.eta.unwrap_or(defaults.eta),
        mix: args.mix.unwrap_or(defaults.mix),
        euclidean_subset_size: args.subset_size.unwrap_or(defaults.euclidean_subset_size),
        euclidean_base_size: args.base_size.unwrap_or(defaults.euclidean_base_size),
        euclidean_max_candidates: args.max_candidates.unwrap_or(defaults.euclidean_max_candidates),
        ..defaults
    };
    let base = SummaryParams::new(args.delta, 0);
    let summary = SummaryParams {
        c0: args.c0.unwrap_or(base.c0),
        max_rings_per_cluster: args.max_rings.unwrap_or(base.max_rings_per_cluster),
        per_ring: args.per_ring,
        ..base
    };
    let mode = match args.mode {
        ModeArg::Metric => CoresetMode::Metric,
        ModeArg::EuclideanKmeans => CoresetMode::EuclideanKmeans,
    };
    let start = Instant::now();
    let coreset = build_universal_weak_coreset(&inst, args.epsilon, mode, seed, candidates, summary)?;
    let elapsed = start.elapsed().as_secs_f64();
    write_json(&args.out, &CoresetFile::from(&coreset))?;
    Ok(Outcome::ok(format!(
        "|J| = {}\n|S| = {}\nalpha = {}\nbuild time = {elapsed:.3} s\n",
        coreset.candidates.len(),
        coreset.summary.len(),
        coreset.meta.alpha
    )))
}

pub fn cmd_solve(args: &SolveArgs, workers: usize, z: Option<u32>) -> Result<Outcome> {
    let inst = load_instance(&args.instance, z)?;
    let coreset = match &args.coreset {
        Some(p) => read_coreset(p)?,
        None => WeakCoreset::exact(&inst),
    };
    let spec = load_spec(args.constraint.as_deref(), &inst)?;
    let opts = SolveOptions {
        ordered: if args.ordered { Some(true) } else if args.unordered { Some(false) } else { None },
        repeats: args.repeats,
        workers,
        cost_target: args.cost_target,
        ceiling: args.ceiling,
    };
    let result = solve_constrained(&coreset, &inst, &spec, &opts)?;
    if let Some(out) = &args.out {
        write_json(out, &result)?;
    }
    if let Some(csv) = &args.assignment_csv {
        write_assignment_csv(csv, &result)?;
    }
    let mut text = to_json(&result)?;
    let _ = writeln!(text, "\n{:<18} {}", "centers", format_list(&result.centers));
    let _ = writeln!(text, "{:<18} {}", "cost on summary", result.cost_on_summary);
    let _ = writeln!(text, "{:<18} {}", "cost on full", result.cost_on_full);
    let _ = writeln!(text, "{:<18} {}", "cluster totals", format_list(&result.profile.cluster_totals()));
    let _ = writeln!(text, "{:<18} {}", "tuples evaluated", result.tuples_evaluated);
    let _ = writeln!(text, "{:<18} {:.3} s", "time", result.wall_time_secs);
    Ok(Outcome::ok(text))
}

fn format_list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn cmd_oracle(args: &OracleArgs, workers: usize, z: Option<u32>) -> Result<Outcome> {
    let inst = load_instance(&args.instance, z)?;
    let spec = load_spec(args.constraint.as_deref(), &inst)?;
    let opts = SolveOptions { workers, ceiling: args.ceiling, ..Default::default() };
    let result = brute_force_opt(&inst, &spec, &opts)?;
    if let Some(out) = &args.out {
        write_json(out, &result)?;
    }
    Ok(Outcome::ok(to_json(&result)?))
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    property_a: Option<crate::oracle::PropertyAReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    property_b: Option<crate::oracle::VerificationReport>,
    passed: bool,
}

pub fn cmd_verify(args: &VerifyArgs, seed: u64, workers: usize, z: Option<u32>) -> Result<Outcome> {
    let inst = load_instance(&args.instance, z)?;
    let coreset = read_coreset(&args.coreset)?;
    let spec = load_spec(args.constraint.as_deref(), &inst)?;
    let threshold = args.epsilon.unwrap_or(coreset.meta.epsilon);
    let opts = SolveOptions { workers, ceiling: args.ceiling, ..Default::default() };
    let property_a = match args.which {
        Which::A | Which::Both => Some(verify_property_a(&inst, &coreset, &spec, &opts)?),
        Which::B => None,
    };
    let property_b = match args.which {
        Which::B | Which::Both => {
            Some(crate::meta::run_in_pool(workers, || verify_property_b(&inst, &coreset, args.trials, threshold, args.required, seed))??)
        }
        Which::A => None,
    };
    let passed = property_a.as_ref().is_none_or(|r| r.holds) && property_b.as_ref().is_none_or(|r| r.verdict);
    let output = VerifyOutput { property_a, property_b, passed };
    if let Some(out) = &args.out {
        write_json(out, &output)?;
    }
    let mut text = String::new();
    if let Some(a) = &output.property_a {
        let _ = writeln!(text, "property A: ratio {} (bound {}) {}", a.ratio, a.bound, verdict(a.holds));
    }
    if let Some(b) = &output.property_b {
        let _ = writeln!(
            text,
            "property B: {}/{} trials within 1 ± {} (worst ratio {}) {}",
            b.passed,
            b.trials,
            b.threshold,
            b.worst_ratio,
            verdict(b.verdict)
        );
    }
    Ok(Outcome { stdout: text, exit_code: if passed { 0 } else { 1 } })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, cli.seed, cli.z),
        Command::Coreset(a) => cmd_coreset(a, cli.seed, cli.z),
        Command::Solve(a) => cmd_solve(a, cli.workers, cli.z),
        Command::Oracle(a) => cmd_oracle(a, cli.workers, cli.z),
        Command::Verify(a) => cmd_verify(a, cli.seed, cli.workers, cli.z),
    }
}
