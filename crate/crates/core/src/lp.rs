//! Dense two-phase revised simplex for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Sized for the problems built in [`crate::certify`]: a few hundred rows and
//! tens of thousands of columns. The basis inverse is kept explicitly, updated
//! by row operations and rebuilt with Gauss–Jordan elimination every
//! [`SimplexOptions::refactor_every`] pivots. Pricing is Dantzig's rule with a
//! fallback to Bland's rule when the objective stalls; the ratio test is the
//! two-pass Harris test.

use std::fmt;

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: usize,
    /// Pivots without objective progress before switching to Bland's rule.
    pub stall_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-10,
            optimality_tol: 1e-10,
            pivot_tol: 1e-9,
            refactor_every: 64,
            max_iterations: 200_000,
            stall_limit: 150,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpFailure {
    Infeasible { phase_one_objective: f64 },
    Unbounded,
    Singular { condition: f64 },
    IterationLimit { iterations: usize },
}

impl fmt::Display for LpFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpFailure::Infeasible { phase_one_objective } => {
                write!(f, "infeasible (phase-one objective {phase_one_objective:e})")
            }
            LpFailure::Unbounded => write!(f, "unbounded"),
            LpFailure::Singular { condition } => {
                write!(f, "singular basis (condition estimate {condition:e})")
            }
            LpFailure::IterationLimit { iterations } => {
                write!(f, "iteration limit reached after {iterations} pivots")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers `y` with `cᵀ − yᵀA ≥ 0` at optimality.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// 1-norm condition estimate of the final basis.
    pub condition: f64,
}

/// An LP in standard form with dense, column-major storage.
#[derive(Clone, Debug)]
pub struct StandardLp {
    rows: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl StandardLp {
    pub fn new(b: Vec<f64>) -> Self {
        Self {
            rows: b.len(),
            a: Vec::new(),
            b,
            c: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }

    /// Appends a column and returns its index.
    pub fn push_column(&mut self, cost: f64, entries: &[f64]) -> usize {
        assert_eq!(entries.len(), self.rows, "column length must equal row count");
        self.a.extend_from_slice(entries);
        self.c.push(cost);
        self.c.len() - 1
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.a[j * self.rows..(j + 1) * self.rows]
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.c[j]
    }

    pub fn solve(&self, opts: &SimplexOptions) -> Result<LpSolution, LpFailure> {
        Simplex::new(self, opts).run()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Simplex<'a> {
    lp: &'a StandardLp,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    /// Row signs applied so that `b ≥ 0`.
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    // scratch
    y: Vec<f64>,
    u: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardLp, opts: &'a SimplexOptions) -> Self {
        let m = lp.rows;
        let n = lp.cols();
        let sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = lp.b.iter().zip(&sign).map(|(v, s)| v * s).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut is_basic = vec![false; n + m];
        for flag in is_basic.iter_mut().skip(n) {
            *flag = true;
        }
        Self {
            lp,
            opts,
            m,
            n,
            xb: b.clone(),
            sign,
            b,
            basis: (n..n + m).collect(),
            is_basic,
            binv,
            iterations: 0,
            y: vec![0.0; m],
            u: vec![0.0; m],
        }
    }

    fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j >= self.n {
            return v[j - self.n];
        }
        let col = self.lp.column(j);
        let mut acc = 0.0;
        for i in 0..self.m {
            acc += col[i] * self.sign[i] * v[i];
        }
        acc
    }

    fn cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.n {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j >= self.n {
                    0.0
                } else {
                    self.lp.c[j]
                }
            }
        }
    }

    /// `u = B⁻¹ A_j`.
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        if j >= self.n {
            let r = j - self.n;
            for i in 0..m {
                self.u[i] = self.binv[i * m + r];
            }
            return;
        }
        let col = self.lp.column(j);
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for k in 0..m {
                acc += row[k] * col[k] * self.sign[k];
            }
            self.u[i] = acc;
        }
    }

    /// `y = c_Bᵀ B⁻¹`.
    fn btran(&mut self, phase: Phase) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let cb = self.cost(self.basis[k], phase);
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[k * m..(k + 1) * m];
            for i in 0..m {
                self.y[i] += cb * row[i];
            }
        }
    }

    fn objective(&self, phase: Phase) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &x)| self.cost(j, phase) * x)
            .sum()
    }

    /// Rebuilds `B⁻¹` from scratch and recomputes the basic solution.
    fn refactor(&mut self) -> Result<f64, LpFailure> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j >= self.n {
                mat[(j - self.n) * m + k] = 1.0;
            } else {
                let col = self.lp.column(j);
                for i in 0..m {
                    mat[i * m + k] = col[i] * self.sign[i];
                }
            }
        }
        let norm_b = one_norm(&mat, m);
        let inv = invert(mat, m).ok_or(LpFailure::Singular { condition: f64::INFINITY })?;
        let condition = norm_b * one_norm(&inv, m);
        if !(condition < 1e13) {
            return Err(LpFailure::Singular { condition });
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.b).map(|(r, b)| r * b).sum();
            self.xb[i] = if v < 0.0 && v > -self.opts.feasibility_tol * 1e3 { 0.0 } else { v };
        }
        Ok(condition)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let m = self.m;
        let ur = self.u[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v /= ur;
        }
        for (i, row) in before.chunks_exact_mut(m).enumerate() {
            let f = self.u[i];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (off, row) in after.chunks_exact_mut(m).enumerate() {
            let f = self.u[r + 1 + off];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    fn iterate(&mut self, phase: Phase) -> Result<(), LpFailure> {
        let mut best_obj = self.objective(phase);
        let mut stalled = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(LpFailure::IterationLimit {
                    iterations: self.iterations,
                });
            }
            if since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            }
            let bland = stalled > self.opts.stall_limit;
            self.btran(phase);

            // Pricing.
            let mut entering = None;
            let mut best = -self.opts.optimality_tol;
            for j in 0..self.n + self.m {
                if self.is_basic[j] || (phase == Phase::Two && j >= self.n) {
                    continue;
                }
                let d = self.cost(j, phase) - self.col_dot(j, &self.y);
                if bland {
                    if d < -self.opts.optimality_tol {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };

            self.ftran(q);
            let r = self.ratio_test(phase, bland).ok_or(LpFailure::Unbounded)?;
            let theta = (self.xb[r] / self.u[r]).max(0.0);
            for i in 0..self.m {
                self.xb[i] -= theta * self.u[i];
                if self.xb[i] < 0.0 && self.xb[i] > -self.opts.feasibility_tol {
                    self.xb[i] = 0.0;
                }
            }
            self.xb[r] = theta;
            self.pivot(r, q);
            self.iterations += 1;
            since_refactor += 1;

            let obj = self.objective(phase);
            if obj < best_obj - 1e-13 * best_obj.abs().max(1.0) {
                best_obj = obj;
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
    }

    fn ratio_test(&self, phase: Phase, bland: bool) -> Option<usize> {
        let tol = self.opts.pivot_tol;
        // A basic artificial in phase two must leave before it can move.
        if phase == Phase::Two {
            let mut pick = None;
            let mut best = tol;
            for i in 0..self.m {
                if self.basis[i] >= self.n && self.u[i].abs() > best {
                    best = self.u[i].abs();
                    pick = Some(i);
                }
            }
            if pick.is_some() {
                return pick;
            }
        }
        if bland {
            let mut min_ratio = f64::INFINITY;
            let mut pick: Option<usize> = None;
            for i in 0..self.m {
                if self.u[i] > tol {
                    let ratio = self.xb[i].max(0.0) / self.u[i];
                    let better = ratio < min_ratio - 1e-15
                        || (ratio <= min_ratio + 1e-15
                            && pick.is_some_and(|p| self.basis[i] < self.basis[p]));
                    if pick.is_none() || better {
                        min_ratio = ratio.min(min_ratio);
                        pick = Some(i);
                    }
                }
            }
            return pick;
        }
        let mut theta_max = f64::INFINITY;
        for i in 0..self.m {
            if self.u[i] > tol {
                theta_max = theta_max.min((self.xb[i].max(0.0) + self.opts.feasibility_tol) / self.u[i]);
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        let mut pick = None;
        let mut best = 0.0;
        for i in 0..self.m {
            if self.u[i] > tol && self.xb[i].max(0.0) / self.u[i] <= theta_max && self.u[i] > best {
                best = self.u[i];
                pick = Some(i);
            }
        }
        pick
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn expel_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if self.basis[r] < self.n {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut pick = None;
            let mut best = 1e-7;
            for j in 0..self.n {
                if self.is_basic[j] {
                    continue;
                }
                let alpha = self.col_dot(j, &row).abs();
                if alpha > best {
                    best = alpha;
                    pick = Some(j);
                }
            }
            if let Some(q) = pick {
                self.ftran(q);
                let theta = self.xb[r] / self.u[r];
                for i in 0..m {
                    self.xb[i] -= theta * self.u[i];
                }
                self.xb[r] = theta;
                self.pivot(r, q);
            }
        }
    }

    fn run(mut self) -> Result<LpSolution, LpFailure> {
        self.iterate(Phase::One)?;
        self.refactor()?;
        let infeas = self.objective(Phase::One);
        let scale = self.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if infeas > 1e-8 * scale {
            return Err(LpFailure::Infeasible {
                phase_one_objective: infeas,
            });
        }
        self.expel_artificials();
        self.refactor()?;
        self.iterate(Phase::Two)?;
        let condition = self.refactor()?;

        let mut x = vec![0.0; self.n];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                x[j] = self.xb[k].max(0.0);
            }
        }
        self.btran(Phase::Two);
        let duals: Vec<f64> = self.y.iter().zip(&self.sign).map(|(y, s)| y * s).collect();
        let objective = x.iter().zip(&self.lp.c).map(|(x, c)| x * c).sum();
        Ok(LpSolution {
            x,
            objective,
            duals,
            iterations: self.iterations,
            condition,
        })
    }
}

fn one_norm(mat: &[f64], m: usize) -> f64 {
    (0..m)
        .map(|k| (0..m).map(|i| mat[i * m + k].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss–Jordan inverse with partial pivoting; `None` when singular.
fn invert(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for col in 0..m {
        let (mut piv, mut best) = (col, 0.0);
        for r in col..m {
            let v = a[r * m + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-13 * scale {
            return None;
        }
        if piv != col {
            for k in 0..m {
                a.swap(piv * m + k, col * m + k);
                inv.swap(piv * m + k, col * m + k);
            }
        }
        let p = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[col * m + k];
                inv[r * m + k] -= f * inv[col * m + k];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn small_lp_with_slacks() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  (optimum 36 at (2, 6))
        let mut lp = StandardLp::new(vec![4.0, 12.0, 18.0]);
        lp.push_column(-3.0, &[1.0, 0.0, 3.0]);
        lp.push_column(-5.0, &[0.0, 2.0, 2.0]);
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            lp.push_column(0.0, &e);
        }
        let sol = lp.solve(&SimplexOptions::default()).unwrap();
        assert!(close(sol.objective, -36.0));
        assert!(close(sol.x[0], 2.0) && close(sol.x[1], 6.0));
        // Dual feasibility: c_j - yᵀA_j >= 0 for all columns.
        for j in 0..lp.cols() {
            let red = lp.cost(j) - lp.column(j).iter().zip(&sol.duals).map(|(a, y)| a * y).sum::<f64>();
            assert!(red > -1e-9);
        }
        // Strong duality.
        let by: f64 = [4.0, 12.0, 18.0].iter().zip(&sol.duals).map(|(b, y)| b * y).sum();
        assert!(close(by, sol.objective));
    }

    #[test]
    fn detects_infeasibility() {
        // x + y = 1, x + y = 2
        let mut lp = StandardLp::new(vec![1.0, 2.0]);
        lp.push_column(0.0, &[1.0, 1.0]);
        lp.push_column(0.0, &[1.0, 1.0]);
        assert!(matches!(
            lp.solve(&SimplexOptions::default()),
            Err(LpFailure::Infeasible { .. })
        ));
    }

    #[test]
    fn detects_unboundedness() {
        // min -x s.t. x - y = 0
        let mut lp = StandardLp::new(vec![0.0]);
        lp.push_column(-1.0, &[1.0]);
        lp.push_column(0.0, &[-1.0]);
        assert_eq!(lp.solve(&SimplexOptions::default()).unwrap_err(), LpFailure::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        // x + y = -(-3) written as -x - y = -3, duplicated; min x + 2y.
        let mut lp = StandardLp::new(vec![-3.0, -3.0]);
        lp.push_column(1.0, &[-1.0, -1.0]);
        lp.push_column(2.0, &[-1.0, -1.0]);
        let sol = lp.solve(&SimplexOptions::default()).unwrap();
        assert!(close(sol.objective, 3.0));
        assert!(close(sol.x[0], 3.0));
    }

    #[test]
    fn degenerate_transportation_problem() {
        // 3x3 transportation with equal supplies and demands: heavily degenerate.
        let supply = [1.0, 1.0, 1.0];
        let demand = [1.0, 1.0, 1.0];
        let cost = [[4.0, 1.0, 3.0], [2.0, 5.0, 1.0], [1.0, 3.0, 2.0]];
        let mut b = supply.to_vec();
        b.extend_from_slice(&demand);
        let mut lp = StandardLp::new(b);
        for i in 0..3 {
            for j in 0..3 {
                let mut col = [0.0; 6];
                col[i] = 1.0;
                col[3 + j] = 1.0;
                lp.push_column(cost[i][j], &col);
            }
        }
        let sol = lp.solve(&SimplexOptions::default()).unwrap();
        // Best assignment: (0,1), (1,2), (2,0) with cost 3.
        assert!(close(sol.objective, 3.0));
    }
}
