use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::LP_FEASIBILITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over nonnegative variables, some of which may be fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    fixed_zero: Vec<bool>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            sense,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            fixed_zero: vec![false; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_fixed_zero(&self, j: usize) -> bool {
        self.fixed_zero[j]
    }

    pub fn num_fixed(&self) -> usize {
        self.fixed_zero.iter().filter(|&&f| f).count()
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn set_objective_vector(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn fix_zero(&mut self, j: usize) {
        self.fixed_zero[j] = true;
    }

    /// Adds a row; duplicate column entries are summed. Returns the row index.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, v) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.constraints.push(Constraint { coeffs: merged, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Lp("non-finite objective coefficient".into()));
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Lp(format!("row {r}: non-finite right-hand side")));
            }
            for &(j, v) in &row.coeffs {
                if j >= self.num_vars {
                    return Err(Error::Lp(format!("row {r}: column {j} out of range")));
                }
                if !v.is_finite() {
                    return Err(Error::Lp(format!("row {r}: non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Objective value of `x` in the program's own sense.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest scaled constraint violation of `x`, including bounds and fixings.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(-v);
            if self.fixed_zero[j] {
                worst = worst.max(v.abs());
            }
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().map(|&(j, v)| v * x[j]).sum();
            let scale = 1.0 + row.rhs.abs();
            let viol = match row.relation {
                Relation::Eq => (lhs - row.rhs).abs(),
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
            };
            worst = worst.max(viol / scale);
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.max_violation(x) <= LP_FEASIBILITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Numerical trouble or iteration guard; never a silent wrong optimum.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
