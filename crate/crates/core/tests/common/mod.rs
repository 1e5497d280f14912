//! Test-side instance builders and independent oracles.
#![allow(dead_code)]

use rand::Rng;
use uwcoreset::constraints::ConstraintSpec;
use uwcoreset::flowlp::{solve_lp, LinearProgram};
use uwcoreset::model::{ClusterProfile, ClusteringInstance, Labels, MetricSpace, Objective};

pub fn line(k: usize, objective: Objective) -> ClusteringInstance {
    let coords: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 9.0, 10.0].iter().map(|&x| vec![x]).collect();
    let space = MetricSpace::euclidean(1, coords).unwrap();
    ClusteringInstance::new(space, (0..5).collect(), vec![1.0; 5], (0..5).collect(), k, objective)
}

/// Random planar instance: `n` points and `nf` facilities in `[0, 10]^2`,
/// weights in `[0.5, 2]`, `m` labels (unlabeled when `m <= 1`). Every label
/// occurs at least once.
pub fn random_instance(rng: &mut impl Rng, n: usize, nf: usize, k: usize, m: usize, objective: Objective) -> ClusteringInstance {
    let mut coords: Vec<Vec<f64>> =
        (0..n + nf).map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]).collect();
    // Round to a grid so ties occur.
    if rng.random_bool(0.3) {
        coords.iter_mut().flatten().for_each(|x| *x = x.round());
    }
    let space = MetricSpace::euclidean(2, coords).unwrap();
    let weights = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let inst = ClusteringInstance::new(space, (0..n).collect(), weights, (n..n + nf).collect(), k, objective);
    if m > 1 {
        let of = (0..n).map(|i| if i < m { i } else { rng.random_range(0..m) }).collect();
        inst.with_labels(Labels { of, count: m })
    } else {
        inst
    }
}

/// Minimizes `c·x` subject to `Ax = b` (rows of a transportation problem)
/// and `x >= 0` with the crate's simplex code, independent of the flow solver.
pub fn transport_lp(cost: &[Vec<f64>], supplies: &[f64], demands: &[f64]) -> f64 {
    let (n, m) = (supplies.len(), demands.len());
    let mut lp = LinearProgram::new(cost.concat());
    for (s, &a) in supplies.iter().enumerate() {
        let mut row = vec![0.0; n * m];
        row[s * m..(s + 1) * m].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, a);
    }
    for (t, &b) in demands.iter().enumerate() {
        let mut row = vec![0.0; n * m];
        for s in 0..n {
            row[s * m + t] = 1.0;
        }
        lp.add_eq(row, b);
    }
    solve_lp(&lp).unwrap().objective
}

/// A label class as `(weight, cost to center 0, cost to center 1)` triples,
/// sorted by how much cheaper center 0 is.
struct Class {
    items: Vec<(f64, f64, f64)>,
    total: f64,
}

impl Class {
    /// Cheapest cost of sending `s` of this class to center 0 and the rest to
    /// center 1 (fractional knapsack).
    fn cost(&self, s: f64) -> f64 {
        let mut left = s;
        let mut cost = 0.0;
        for &(w, c0, c1) in &self.items {
            let take = left.clamp(0.0, w);
            cost += take * c0 + (w - take) * c1;
            left -= take;
        }
        cost
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for &(w, _, _) in &self.items {
            acc += w;
            out.push(acc);
        }
        *out.last_mut().unwrap() = self.total;
        out
    }
}

/// `g · a <= h` over the per-label masses `a` sent to center 0.
type Half = (Vec<f64>, f64);

/// Exact `Ψ(X, (c0, c1))` for two centers without any LP or flow code: the
/// optimum only depends on the mass `a_j` of each label class sent to `c0`,
/// the cost is convex piecewise linear in `a`, so some vertex of the
/// arrangement formed by the constraint boundaries and the breakpoint planes
/// `a_j = const` is optimal. Handles one or two classes. `None` if infeasible.
pub fn two_center_oracle(inst: &ClusteringInstance, centers: &[usize], spec: &ConstraintSpec) -> Option<f64> {
    assert_eq!(centers.len(), 2);
    let per_label = matches!(
        spec,
        ConstraintSpec::FractionBounds(_) | ConstraintSpec::FixedProfile(ClusterProfile::Labeled { .. })
    );
    let m = if per_label { inst.num_labels() } else { 1 };
    assert!(m <= 2, "oracle handles at most two classes");
    let classes: Vec<Class> = (0..m)
        .map(|j| {
            let mut items: Vec<(f64, f64, f64)> = (0..inst.n())
                .filter(|&p| !per_label || inst.label(p) == j)
                .map(|p| (inst.weights[p], inst.cost(p, centers[0]), inst.cost(p, centers[1])))
                .collect();
            items.sort_by(|a, b| (a.1 - a.2).total_cmp(&(b.1 - b.2)));
            let total = items.iter().map(|i| i.0).sum();
            Class { items, total }
        })
        .collect();
    let w: f64 = classes.iter().map(|c| c.total).sum();
    let ones = vec![1.0; m];
    let unit = |j: usize, s: f64| {
        let mut g = vec![0.0; m];
        g[j] = s;
        g
    };
    let mut halves: Vec<Half> = Vec::new();
    for (j, c) in classes.iter().enumerate() {
        halves.push((unit(j, -1.0), 0.0));
        halves.push((unit(j, 1.0), c.total));
    }
    match spec {
        ConstraintSpec::Unconstrained => {}
        ConstraintSpec::FixedProfile(ClusterProfile::Plain(g)) => {
            halves.push((ones.clone(), g[0]));
            halves.push((ones.iter().map(|x| -x).collect(), -g[0]));
        }
        ConstraintSpec::FixedProfile(p @ ClusterProfile::Labeled { .. }) => {
            for j in 0..m {
                halves.push((unit(j, 1.0), p.value(0, j)));
                halves.push((unit(j, -1.0), -p.value(0, j)));
            }
        }
        ConstraintSpec::Balanced { lower, upper } => {
            // l0 <= Σa <= u0 and l1 <= W - Σa <= u1
            halves.push((ones.iter().map(|x| -x).collect(), -lower[0]));
            if upper[0].is_finite() {
                halves.push((ones.clone(), upper[0]));
            }
            halves.push((ones.clone(), w - lower[1]));
            if upper[1].is_finite() {
                halves.push((ones.iter().map(|x| -x).collect(), upper[1] - w));
            }
        }
        ConstraintSpec::FractionBounds(fb) => {
            #[allow(clippy::needless_range_loop)]
            for j in 0..m {
                let (a0, b0) = (fb.alpha[j], fb.beta[j]);
                let (a1, b1) = (fb.alpha[fb.labels + j], fb.beta[fb.labels + j]);
                // α0 Σa - a_j <= 0 and a_j - β0 Σa <= 0
                halves.push(((0..m).map(|i| a0 - f64::from(u8::from(i == j))).collect(), 0.0));
                halves.push(((0..m).map(|i| f64::from(u8::from(i == j)) - b0).collect(), 0.0));
                // α1 (W - Σa) <= W_j - a_j <= β1 (W - Σa)
                halves.push(((0..m).map(|i| f64::from(u8::from(i == j)) - a1).collect(), classes[j].total - a1 * w));
                halves.push(((0..m).map(|i| b1 - f64::from(u8::from(i == j))).collect(), b1 * w - classes[j].total));
            }
        }
    }
    let mut planes: Vec<Half> = halves.clone();
    for (j, c) in classes.iter().enumerate() {
        planes.extend(c.breakpoints().into_iter().map(|b| (unit(j, 1.0), b)));
    }
    let scale = 1.0 + w;
    let feasible = |a: &[f64]| halves.iter().all(|(g, h)| dot(g, a) <= h + 1e-9 * scale);
    let eval = |a: &[f64]| classes.iter().zip(a).map(|(c, &s)| c.cost(s.clamp(0.0, c.total))).sum::<f64>();
    let mut best: Option<f64> = None;
    let mut consider = |a: Vec<f64>| {
        if a.iter().all(|x| x.is_finite()) && feasible(&a) {
            let c = eval(&a);
            best = Some(best.map_or(c, |b: f64| b.min(c)));
        }
    };
    match m {
        1 => {
            for (g, h) in &planes {
                if g[0].abs() > 1e-12 {
                    consider(vec![h / g[0]]);
                }
            }
        }
        _ => {
            for (i, (g1, h1)) in planes.iter().enumerate() {
                for (g2, h2) in &planes[i + 1..] {
                    let det = g1[0] * g2[1] - g1[1] * g2[0];
                    if det.abs() > 1e-12 {
                        consider(vec![(h1 * g2[1] - g1[1] * h2) / det, (g1[0] * h2 - h1 * g2[0]) / det]);
                    }
                }
            }
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact `Ψ` for a single center: everything goes to it.
pub fn one_center_oracle(inst: &ClusteringInstance, center: usize, spec: &ConstraintSpec) -> Option<f64> {
    let w = inst.total_weight();
    let cost: f64 = (0..inst.n()).map(|p| inst.weights[p] * inst.cost(p, center)).sum();
    let tol = 1e-9 * (1.0 + w);
    let ok = match spec {
        ConstraintSpec::Unconstrained => true,
        ConstraintSpec::FixedProfile(p) => p.cluster_totals().iter().all(|&g| (g - w).abs() <= tol),
        ConstraintSpec::Balanced { lower, upper } => lower[0] <= w + tol && w <= upper[0] + tol,
        ConstraintSpec::FractionBounds(fb) => inst.full_set().label_totals(inst).iter().enumerate().all(|(j, &t)| {
            fb.alpha[j] * w <= t + tol && t <= fb.beta[j] * w + tol
        }),
    };
    ok.then_some(cost)
}

/// Exact optimum over every ordered pair (or single facility) of `F`.
pub fn brute_force_reference(inst: &ClusteringInstance, spec: &ConstraintSpec) -> Option<f64> {
    let nf = inst.num_facilities();
    let mut best: Option<f64> = None;
    let mut keep = |c: Option<f64>| {
        if let Some(c) = c {
            best = Some(best.map_or(c, |b: f64| b.min(c)));
        }
    };
    match inst.k {
        1 => (0..nf).for_each(|f| keep(one_center_oracle(inst, f, spec))),
        2 => {
            for f in 0..nf {
                for g in 0..nf {
                    if f != g {
                        keep(two_center_oracle(inst, &[f, g], spec));
                    }
                }
            }
        }
        _ => panic!("reference oracle handles k <= 2"),
    }
    best
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
