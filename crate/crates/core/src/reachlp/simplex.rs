//! Two-phase revised simplex over `x >= 0` with a dense explicit basis inverse.
//!
//! The engine keeps its basis between calls to [`SimplexEngine::minimize`], so a
//! sequence of objectives over the same polytope is solved with warm starts.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::reachlp::lp::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use crate::tolerances::{LP_FEASIBILITY, LP_OPTIMALITY, LP_PIVOT};

const REFACTOR_EVERY: usize = 100;
const DEGENERATE_BEFORE_BLAND: usize = 100;
// entries below this are treated as exact zeros
const ALPHA_ZERO: f64 = 1e-11;
const REPAIR_PIVOTS: usize = 500;
const REFINE_ROUNDS: usize = 2;
// pivots below this are only taken right after a refactorization
const PIVOT_SAFE: f64 = 1e-5;
// relative size of a vanishing LU pivot
const SINGULAR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
    Failed,
}

#[derive(Debug, Clone)]
pub struct SimplexEngine {
    lp: LinearProgram,
    m: usize,
    n_struct: usize,
    col_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    col_val: Vec<f64>,
    kind: Vec<ColKind>,
    blocked: Vec<bool>,
    b: Vec<f64>,
    basis: Vec<usize>,
    // column -> basis row, usize::MAX when nonbasic
    position: Vec<usize>,
    // column-major m x m
    binv: Vec<f64>,
    x_b: Vec<f64>,
    updates: usize,
    feasible: bool,
    failed: bool,
    // last basis known to be primal feasible
    home: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

impl SimplexEngine {
    /// Builds the standard form and runs phase 1.
    pub fn new(lp: &LinearProgram) -> crate::Result<Self> {
        let mut engine = Self::standard_form(lp)?;
        engine.phase_one();
        Ok(engine)
    }

    /// Starts from the basis spanned by `columns` (structural indices), completed
    /// with slacks and artificials. Falls back to phase 1 when that basis is
    /// singular or not primal feasible.
    pub fn with_basis(lp: &LinearProgram, columns: &[usize]) -> crate::Result<Self> {
        let mut engine = Self::standard_form(lp)?;
        if engine.install_basis(columns) {
            engine.feasible = true;
            for (c, k) in engine.kind.iter().enumerate() {
                if *k == ColKind::Artificial {
                    engine.blocked[c] = true;
                }
            }
            engine.home = engine.basis.clone();
            return Ok(engine);
        }
        Self::new(lp)
    }

    fn install_basis(&mut self, columns: &[usize]) -> bool {
        let m = self.m;
        let mut basis = vec![usize::MAX; m];
        let mut used = vec![false; self.kind.len()];
        // slacks first, they only cover their own row
        for c in self.n_struct..self.kind.len() {
            if self.kind[c] == ColKind::Slack {
                let (r, _) = self.column(c).next().unwrap();
                if basis[r] == usize::MAX && self.col_val[self.col_ptr[c]] > 0.0 {
                    basis[r] = c;
                    used[c] = true;
                }
            }
        }
        let mut free: Vec<usize> = (0..m).filter(|&r| basis[r] == usize::MAX).collect();
        let mut hint: Vec<usize> = columns.iter().copied().filter(|&c| c < self.n_struct && !self.blocked[c]).collect();
        hint.sort_unstable();
        hint.dedup();
        if hint.len() > free.len() {
            return false;
        }
        // structural columns take the remaining rows in order; the inverse does the rest
        for (r, c) in free.drain(..hint.len()).zip(hint) {
            basis[r] = c;
            used[c] = true;
        }
        for r in 0..m {
            if basis[r] == usize::MAX {
                let c = (self.n_struct..self.kind.len())
                    .find(|&c| !used[c] && self.column(c).next().map(|e| e.0) == Some(r));
                match c {
                    Some(c) => {
                        basis[r] = c;
                        used[c] = true;
                    }
                    None => return false,
                }
            }
        }
        let saved = (self.basis.clone(), self.position.clone());
        for &c in &self.basis {
            self.position[c] = usize::MAX;
        }
        for (r, &c) in basis.iter().enumerate() {
            self.position[c] = r;
        }
        self.basis = basis;
        let ok = self.refactor()
            && self.x_b.iter().zip(&self.basis).all(|(&v, &c)| {
                v >= -LP_FEASIBILITY && (self.kind[c] != ColKind::Artificial || v.abs() <= LP_FEASIBILITY)
            });
        if !ok {
            (self.basis, self.position) = saved;
            self.binv.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..m {
                self.binv[r * m + r] = 1.0;
            }
            self.x_b = self.b.clone();
            self.updates = 0;
        }
        ok
    }

    fn standard_form(lp: &LinearProgram) -> crate::Result<Self> {
        lp.validate()?;
        let m = lp.num_constraints();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut b = Vec::with_capacity(m);
        let mut rel = Vec::with_capacity(m);
        for (r, row) in lp.constraints().iter().enumerate() {
            let flip = row.rhs < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            for &(j, v) in &row.coeffs {
                cols[j].push((r as u32, s * v));
            }
            b.push(s * row.rhs);
            rel.push(match (row.relation, flip) {
                (Relation::Eq, _) => Relation::Eq,
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            });
        }
        let mut kind = vec![ColKind::Structural; n];
        let mut blocked: Vec<bool> = (0..n).map(|j| lp.is_fixed_zero(j)).collect();
        let mut basis = vec![usize::MAX; m];
        for r in 0..m {
            match rel[r] {
                Relation::Le => {
                    basis[r] = cols.len();
                    cols.push(vec![(r as u32, 1.0)]);
                    kind.push(ColKind::Slack);
                    blocked.push(false);
                }
                Relation::Ge => {
                    cols.push(vec![(r as u32, -1.0)]);
                    kind.push(ColKind::Slack);
                    blocked.push(false);
                }
                Relation::Eq => {}
            }
        }
        for r in 0..m {
            if basis[r] == usize::MAX {
                basis[r] = cols.len();
                cols.push(vec![(r as u32, 1.0)]);
                kind.push(ColKind::Artificial);
                blocked.push(false);
            }
        }
        let total = cols.len();
        let mut col_ptr = Vec::with_capacity(total + 1);
        let mut col_idx = Vec::new();
        let mut col_val = Vec::new();
        col_ptr.push(0);
        for c in &cols {
            for &(r, v) in c {
                col_idx.push(r);
                col_val.push(v);
            }
            col_ptr.push(col_idx.len());
        }
        let mut position = vec![usize::MAX; total];
        for (r, &c) in basis.iter().enumerate() {
            position[c] = r;
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let x_b = b.clone();
        Ok(Self {
            lp: lp.clone(),
            m,
            n_struct: n,
            col_ptr,
            col_idx,
            col_val,
            kind,
            blocked,
            b,
            basis,
            position,
            binv,
            x_b,
            updates: 0,
            feasible: false,
            failed: false,
            home: Vec::new(),
            iterations: 0,
            max_iterations: 50_000 + 20 * (m + total),
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn num_vars(&self) -> usize {
        self.n_struct
    }

    /// Structural columns in the current basis.
    pub fn basic_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.basis.iter().copied().filter(|&c| c < self.n_struct).collect();
        cols.sort_unstable();
        cols
    }

    fn phase_one(&mut self) {
        let cost: Vec<f64> = self
            .kind
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        let needs = self.basis.iter().any(|&c| self.kind[c] == ColKind::Artificial);
        if needs {
            match self.run(&cost, true) {
                Outcome::Optimal => {}
                _ => {
                    self.failed = true;
                    return;
                }
            }
        }
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.x_b)
            .filter(|(&c, _)| self.kind[c] == ColKind::Artificial)
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.feasible = infeas <= LP_FEASIBILITY * scale;
        if self.feasible {
            self.home = self.basis.clone();
            for r in 0..self.m {
                if self.kind[self.basis[r]] == ColKind::Artificial {
                    self.x_b[r] = 0.0;
                }
            }
            for (c, k) in self.kind.iter().enumerate() {
                if *k == ColKind::Artificial {
                    self.blocked[c] = true;
                }
            }
        }
    }

    /// Minimizes `cost . x` over the polytope, starting from the current basis.
    pub fn minimize(&mut self, cost: &[f64]) -> LpSolution {
        assert_eq!(cost.len(), self.n_struct);
        let start = self.iterations;
        if self.failed {
            return self.status_only(LpStatus::Failed, start);
        }
        if !self.feasible {
            return self.status_only(LpStatus::Infeasible, start);
        }
        let mut full = vec![0.0; self.kind.len()];
        full[..self.n_struct].copy_from_slice(cost);
        let mut attempts = 0;
        loop {
            let outcome = self.run(&full, false);
            if outcome == Outcome::Unbounded {
                return self.status_only(LpStatus::Unbounded, start);
            }
            if outcome == Outcome::Optimal {
                let mut values = self.structural_values();
                if !self.lp.is_feasible(&values) && self.refactor() && self.repair() {
                    values = self.structural_values();
                    if self.lp.is_feasible(&values) && self.price(&full, &self.duals(&full), false).is_some() {
                        // repair moved off the optimum, keep going
                        attempts += 1;
                        if attempts <= 3 {
                            continue;
                        }
                    }
                }
                if self.lp.is_feasible(&values) {
                    self.home = self.basis.clone();
                    let objective_value = cost.iter().zip(&values).map(|(c, v)| c * v).sum();
                    return LpSolution {
                        status: LpStatus::Optimal,
                        values,
                        objective_value,
                        iterations: self.iterations - start,
                    };
                }
            }
            // drifted or singular: go back to the last feasible basis
            attempts += 1;
            if attempts > 3 || !self.restore_home() {
                return self.status_only(LpStatus::Failed, start);
            }
        }
    }

    fn restore_home(&mut self) -> bool {
        if self.home.len() != self.m {
            return false;
        }
        for &c in &self.basis {
            self.position[c] = usize::MAX;
        }
        self.basis = self.home.clone();
        for (r, &c) in self.basis.iter().enumerate() {
            self.position[c] = r;
        }
        self.refactor() && self.repair()
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let c_b: Vec<f64> = self.basis.iter().map(|&c| cost[c]).collect();
        (0..m)
            .map(|k| self.binv[k * m..(k + 1) * m].iter().zip(&c_b).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Drives negative basic values back to zero by minimizing their sum.
    fn repair(&mut self) -> bool {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for _ in 0..REPAIR_PIVOTS {
            if self.x_b.iter().all(|&v| v >= -LP_FEASIBILITY) {
                for v in &mut self.x_b {
                    *v = v.max(0.0);
                }
                return true;
            }
            let cost_b: Vec<f64> = self.x_b.iter().map(|&v| if v < -LP_FEASIBILITY { -1.0 } else { 0.0 }).collect();
            let y: Vec<f64> = (0..m)
                .map(|k| self.binv[k * m..(k + 1) * m].iter().zip(&cost_b).map(|(a, b)| a * b).sum())
                .collect();
            let mut q = None;
            let mut best = -LP_OPTIMALITY;
            for j in 0..self.kind.len() {
                if self.blocked[j] || self.position[j] != usize::MAX {
                    continue;
                }
                let d: f64 = -self.column(j).map(|(k, v)| y[k] * v).sum::<f64>();
                if d < best {
                    best = d;
                    q = Some(j);
                }
            }
            let Some(q) = q else {
                return false;
            };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            for (k, v) in self.column(q) {
                for (a, bk) in alpha.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *a += v * bk;
                }
            }
            // feasible rows must stay feasible, negative rows stop where they reach zero
            let mut pick = None;
            let mut theta = f64::INFINITY;
            for r in 0..m {
                let x = self.x_b[r];
                let artificial = self.kind[self.basis[r]] == ColKind::Artificial;
                let t = if artificial && alpha[r].abs() > LP_PIVOT {
                    0.0
                } else if x >= -LP_FEASIBILITY && alpha[r] > LP_PIVOT {
                    x.max(0.0) / alpha[r]
                } else if x < -LP_FEASIBILITY && alpha[r] < -LP_PIVOT {
                    x / alpha[r]
                } else {
                    continue;
                };
                if t < theta || (t == theta && pick.is_some_and(|p: usize| alpha[r].abs() > alpha[p].abs())) {
                    theta = t;
                    pick = Some(r);
                }
            }
            let Some(r) = pick else {
                return false;
            };
            self.pivot(r, q, &alpha, theta);
            self.iterations += 1;
        }
        false
    }

    /// Current basic solution restricted to the structural variables.
    pub fn structural_values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.n_struct];
        for (r, &c) in self.basis.iter().enumerate() {
            if c < self.n_struct {
                values[c] = self.x_b[r].max(0.0);
            }
        }
        values
    }

    fn status_only(&self, status: LpStatus, start: usize) -> LpSolution {
        LpSolution {
            status,
            values: Vec::new(),
            objective_value: f64::NAN,
            iterations: self.iterations - start,
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, z) = (self.col_ptr[j], self.col_ptr[j + 1]);
        self.col_idx[a..z].iter().zip(&self.col_val[a..z]).map(|(&r, &v)| (r as usize, v))
    }

    fn run(&mut self, cost: &[f64], phase_one: bool) -> Outcome {
        let m = self.m;
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Outcome::Failed;
            }
            if self.updates >= REFACTOR_EVERY && !(self.refactor() && (phase_one || self.repair())) {
                return Outcome::Failed;
            }
            // y = c_B^T B^{-1}
            let c_b: Vec<f64> = self.basis.iter().map(|&c| cost[c]).collect();
            for (k, yk) in y.iter_mut().enumerate() {
                let col = &self.binv[k * m..(k + 1) * m];
                *yk = col.iter().zip(&c_b).map(|(a, b)| a * b).sum();
            }
            let bland = degenerate >= DEGENERATE_BEFORE_BLAND;
            let Some(q) = self.price(cost, &y, bland) else {
                return Outcome::Optimal;
            };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            for (k, v) in self.column(q) {
                let col = &self.binv[k * m..(k + 1) * m];
                for (a, bk) in alpha.iter_mut().zip(col) {
                    *a += v * bk;
                }
            }
            let Some(r) = self.ratio_test(&alpha, bland, phase_one) else {
                return Outcome::Unbounded;
            };
            if alpha[r].abs() < PIVOT_SAFE && self.updates > 0 {
                // small pivots may be update noise, recheck on a fresh factorization
                if !(self.refactor() && (phase_one || self.repair())) {
                    return Outcome::Failed;
                }
                continue;
            }
            let theta = if self.kind[self.basis[r]] == ColKind::Artificial && !phase_one {
                0.0
            } else {
                (self.x_b[r] / alpha[r]).max(0.0)
            };
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &alpha, theta);
            self.iterations += 1;
        }
    }

    fn price(&self, cost: &[f64], y: &[f64], bland: bool) -> Option<usize> {
        let mut best = None;
        let mut best_d = -LP_OPTIMALITY;
        for j in 0..self.kind.len() {
            if self.blocked[j] || self.position[j] != usize::MAX {
                continue;
            }
            let mut d = cost[j];
            for (k, v) in self.column(j) {
                d -= y[k] * v;
            }
            if d < best_d {
                if bland {
                    return Some(j);
                }
                best_d = d;
                best = Some(j);
            }
        }
        best
    }

    fn ratio_test(&self, alpha: &[f64], bland: bool, phase_one: bool) -> Option<usize> {
        let m = self.m;
        // basic artificials are pinned at zero once phase 1 is over
        if !phase_one {
            let mut pick = None;
            let mut best = LP_PIVOT;
            for r in 0..m {
                if self.kind[self.basis[r]] == ColKind::Artificial && alpha[r].abs() > best {
                    best = alpha[r].abs();
                    pick = Some(r);
                }
            }
            if pick.is_some() {
                return pick;
            }
        }
        // every entry that can drive its row negative bounds the step, but
        // the pivot is the largest entry within that bound
        let bound_rows = |r: &usize| alpha[*r] > ALPHA_ZERO;
        if bland {
            let least = (0..m)
                .filter(bound_rows)
                .map(|r| self.x_b[r].max(0.0) / alpha[r])
                .fold(f64::INFINITY, f64::min);
            if !least.is_finite() {
                return None;
            }
            return (0..m)
                .filter(|&r| alpha[r] > LP_PIVOT && self.x_b[r].max(0.0) / alpha[r] <= least + 1e-12)
                .min_by_key(|&r| self.basis[r])
                .or_else(|| {
                    (0..m)
                        .filter(bound_rows)
                        .filter(|&r| self.x_b[r].max(0.0) / alpha[r] <= least + 1e-12)
                        .max_by(|&a, &b| alpha[a].total_cmp(&alpha[b]))
                });
        }
        let mut bound = f64::INFINITY;
        for r in (0..m).filter(bound_rows) {
            bound = bound.min((self.x_b[r].max(0.0) + LP_FEASIBILITY) / alpha[r]);
        }
        if !bound.is_finite() {
            return None;
        }
        let mut pick = None;
        let mut best = 0.0;
        for r in (0..m).filter(bound_rows) {
            if self.x_b[r].max(0.0) / alpha[r] <= bound && alpha[r] > best {
                best = alpha[r];
                pick = Some(r);
            }
        }
        pick
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            self.x_b[i] -= theta * alpha[i];
            if self.x_b[i] < 0.0 && self.x_b[i] > -LP_FEASIBILITY {
                self.x_b[i] = 0.0;
            }
        }
        self.x_b[r] = theta;
        let ar = alpha[r];
        for k in 0..m {
            let col = &mut self.binv[k * m..(k + 1) * m];
            let t = col[r];
            if t == 0.0 {
                continue;
            }
            let t = t / ar;
            for (i, (c, a)) in col.iter_mut().zip(alpha).enumerate() {
                if i != r {
                    *c -= a * t;
                }
            }
            col[r] = t;
        }
        let old = self.basis[r];
        self.position[old] = usize::MAX;
        self.basis[r] = q;
        self.position[q] = r;
        self.updates += 1;
    }

    fn solve_basis(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (k, &bk) in rhs.iter().enumerate() {
            if bk != 0.0 {
                for (o, v) in out.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *o += v * bk;
                }
            }
        }
        out
    }

    /// Recomputes `B^{-1}` and `x_B` from scratch.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        if m == 0 {
            return true;
        }
        let mut dense = Mat::<f64>::zeros(m, m);
        for (c, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.column(j) {
                dense[(r, c)] = v;
            }
        }
        let lu = dense.partial_piv_lu();
        let u = lu.U();
        let scale = (0..m).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
        if (0..m).any(|i| u[(i, i)].abs() <= SINGULAR * scale) {
            return false;
        }
        let inv = lu.inverse();
        for c in 0..m {
            for (r, slot) in self.binv[c * m..(c + 1) * m].iter_mut().enumerate() {
                *slot = inv[(r, c)];
            }
        }
        let mut x = self.solve_basis(&self.b);
        for _ in 0..REFINE_ROUNDS {
            let mut residual = self.b.clone();
            for (&j, &v) in self.basis.iter().zip(&x) {
                for (r, a) in self.column(j) {
                    residual[r] -= a * v;
                }
            }
            for (xi, d) in x.iter_mut().zip(self.solve_basis(&residual)) {
                *xi += d;
            }
        }
        for (xb, s) in self.x_b.iter_mut().zip(x) {
            *xb = if s < 0.0 && s > -LP_FEASIBILITY { 0.0 } else { s };
        }
        self.updates = 0;
        true
    }
}

/// Solves `lp` from scratch.
pub fn solve_lp(lp: &LinearProgram) -> crate::Result<LpSolution> {
    let mut engine = SimplexEngine::new(lp)?;
    let cost: Vec<f64> = match lp.sense() {
        Sense::Minimize => lp.objective().to_vec(),
        Sense::Maximize => lp.objective().iter().map(|c| -c).collect(),
    };
    let mut sol = engine.minimize(&cost);
    if sol.is_optimal() {
        sol.objective_value = lp.evaluate(&sol.values);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, 3.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_with_fixed_column() {
        // min x0 + 2 x1 + 3 x2, x0 + x1 + x2 = 1, x0 fixed to 0
        let mut lp = LinearProgram::new(3, Sense::Minimize);
        for (j, c) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.fix_zero(0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.values[0], 0.0);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 4.0);
        let s = solve_lp(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_reuses_basis() {
        let mut lp = LinearProgram::new(3, Sense::Minimize);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0);
        let mut e = SimplexEngine::new(&lp).unwrap();
        let a = e.minimize(&[1.0, 2.0, 3.0]);
        let b = e.minimize(&[3.0, 2.0, 1.0]);
        assert!((a.objective_value - 1.0).abs() < 1e-12);
        assert!((b.objective_value - 1.0).abs() < 1e-12);
        assert!((b.values[2] - 1.0).abs() < 1e-12);
        let c = e.minimize(&[3.0, 2.0, 1.0]);
        assert_eq!(c.iterations, 0);
    }
}

