//! Dense two-phase simplex with Bland's rule.

use crate::error::{Error, Result};

/// Largest number of structural variables accepted by [`solve_lp`].
pub const MAX_VARIABLES: usize = 20_000;

const PIVOT_TOL: f64 = 1e-9;

/// `min c·x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`, `x >= lower`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    /// Defaults to zero for every variable.
    pub lower_bounds: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    /// Largest constraint violation of `x`, absolute.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_matrix
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, b)| (dot(r) - b).abs());
        let ub = self
            .ineq_matrix
            .iter()
            .zip(&self.ineq_rhs)
            .map(|(r, b)| (dot(r) - b).max(0.0));
        let lb = x.iter().enumerate().map(|(i, v)| (self.lower(i) - v).max(0.0));
        eq.chain(ub).chain(lb).fold(0.0, f64::max)
    }

    fn lower(&self, i: usize) -> f64 {
        self.lower_bounds.as_ref().map_or(0.0, |l| l[i])
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if n > MAX_VARIABLES {
            return Err(Error::TooLarge(format!("{n} variables exceeds the limit of {MAX_VARIABLES}")));
        }
        let rows_ok = |m: &[Vec<f64>], rhs: &[f64]| m.len() == rhs.len() && m.iter().all(|r| r.len() == n);
        if !rows_ok(&self.eq_matrix, &self.eq_rhs) || !rows_ok(&self.ineq_matrix, &self.ineq_rhs) {
            return Err(Error::Dimension("constraint rows do not match the variable count".into()));
        }
        if self.lower_bounds.as_ref().is_some_and(|l| l.len() != n) {
            return Err(Error::Dimension("lower bounds do not match the variable count".into()));
        }
        let all = self
            .objective
            .iter()
            .chain(self.eq_matrix.iter().flatten())
            .chain(&self.eq_rhs)
            .chain(self.ineq_matrix.iter().flatten())
            .chain(&self.ineq_rhs)
            .chain(self.lower_bounds.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear program"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[row].clone();
        for (r, line) in self.a.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost` over columns `allowed`. Bland's rule.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool, budget: &mut usize) -> Result<()> {
        let rhs = self.cols;
        loop {
            if *budget == 0 {
                return Err(Error::Numerical("simplex iteration limit reached".into()));
            }
            *budget -= 1;
            // reduced cost d_j = c_j - c_B B^-1 A_j
            let mut is_basic = vec![false; self.cols];
            for &b in &self.basis {
                is_basic[b] = true;
            }
            let entering = (0..self.cols).filter(|&j| allowed(j)).find(|&j| {
                if is_basic[j] {
                    return false;
                }
                let d = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.a)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                d < -PIVOT_TOL
            });
            let Some(col) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.a.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    leave = match leave {
                        Some((lr, lratio))
                            if lratio < ratio - 1e-12
                                || ((lratio - ratio).abs() <= 1e-12 && self.basis[lr] < self.basis[r]) =>
                        {
                            Some((lr, lratio))
                        }
                        _ => Some((r, ratio)),
                    };
                }
            }
            let Some((row, _)) = leave else { return Err(Error::Unbounded) };
            self.pivot(row, col);
        }
    }
}

/// Solves `p` with a dense two-phase simplex. Feasibility is reported within
/// `1e-7` absolute per constraint.
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution> {
    p.check()?;
    let n = p.num_vars();
    let lower: Vec<f64> = (0..n).map(|i| p.lower(i)).collect();
    let shifted_rhs = |row: &[f64], b: f64| b - row.iter().zip(&lower).map(|(a, l)| a * l).sum::<f64>();

    let n_eq = p.eq_matrix.len();
    let n_ub = p.ineq_matrix.len();
    let rows = n_eq + n_ub;
    // Columns: structural 0..n, slacks n..n+n_ub, artificials after that.
    let slack0 = n;
    let art0 = n + n_ub;

    let mut a: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut needs_artificial = Vec::with_capacity(rows);
    for (row, &b) in p.eq_matrix.iter().zip(&p.eq_rhs) {
        let rhs = shifted_rhs(row, b);
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut line = vec![0.0; art0];
        for (dst, v) in line.iter_mut().zip(row) {
            *dst = sign * v;
        }
        line.push(sign * rhs);
        a.push(line);
        needs_artificial.push(true);
    }
    for (i, (row, &b)) in p.ineq_matrix.iter().zip(&p.ineq_rhs).enumerate() {
        let rhs = shifted_rhs(row, b);
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut line = vec![0.0; art0];
        for (dst, v) in line.iter_mut().zip(row) {
            *dst = sign * v;
        }
        line[slack0 + i] = sign;
        line.push(sign * rhs);
        a.push(line);
        needs_artificial.push(sign < 0.0);
    }
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let cols = art0 + n_art;
    let mut basis = Vec::with_capacity(rows);
    let mut next_art = art0;
    for (r, line) in a.iter_mut().enumerate() {
        let rhs = line.pop().expect("rhs");
        line.resize(cols, 0.0);
        if needs_artificial[r] {
            line[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(slack0 + (r - n_eq));
        }
        line.push(rhs);
    }
    let mut t = Tableau { a, basis, cols };
    let mut budget = 50_000 + 50 * (rows + cols);

    let rhs_scale = t.a.iter().fold(1.0f64, |m, r| m.max(r[cols].abs()));
    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if j >= art0 { 1.0 } else { 0.0 }).collect();
        t.optimize(&phase1, &|_| true, &mut budget)?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.a)
            .filter(|(&b, _)| b >= art0)
            .map(|(_, row)| row[cols])
            .sum();
        if infeasibility > 1e-9 * rhs_scale {
            return Err(Error::Infeasible(format!("phase one ended with residual {infeasibility:e}")));
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.a.len() {
            if t.basis[r] >= art0 {
                match (0..art0).find(|&j| t.a[r][j].abs() > PIVOT_TOL) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.a.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
    let mut phase2 = p.objective.clone();
    phase2.resize(cols, 0.0);
    t.optimize(&phase2, &|j| j < art0, &mut budget)?;

    let mut x = lower;
    for (&b, row) in t.basis.iter().zip(&t.a) {
        if b < n {
            x[b] += row[cols];
        }
    }
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_only() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_ge(vec![1.0], 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!((sol.objective - 3.0).abs() < 1e-9);

        let lp = LinearProgram { lower_bounds: Some(vec![3.0]), ..LinearProgram::new(vec![1.0]) };
        assert!((solve_lp(&lp).unwrap().objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_equality() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!(lp.max_violation(&sol.x) < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        lp.add_ge(vec![1.0], 2.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Infeasible(_))));

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_le(vec![-1.0, 1.0], 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![2.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![2.0, 2.0], 4.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_oversized_and_malformed() {
        let lp = LinearProgram::new(vec![0.0; MAX_VARIABLES + 1]);
        assert!(matches!(solve_lp(&lp), Err(Error::TooLarge(_))));
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Dimension(_))));
    }
}
