//! Exact rational linear programming.
//!
//! Dense two-phase simplex over `Rat` with Bland's rule (no cycling, no
//! tolerances). Infeasible systems come back with a Farkas certificate that
//! is re-verified before being returned.

use num_traits::{One, Signed, Zero};

use crate::{Error, Rat, Result};

/// Constraint sense. `Ge` rows are normalized to `Le` on entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

/// A single linear constraint `coeffs · x (rel) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub rel: Relation,
    pub rhs: Rat,
}

impl Constraint {
    pub fn le(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Relation::Le, rhs }
    }

    pub fn ge(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rel: Relation::Le,
            rhs: -rhs,
        }
    }

    pub fn eq(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint { coeffs, rel: Relation::Eq, rhs }
    }
}

/// Farkas infeasibility certificate: one multiplier per constraint,
/// nonnegative on `Le` rows, with `y^T C = 0` and `y^T b < 0`.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rat>,
}

impl FarkasCertificate {
    /// Independent check of the certificate against the constraint system.
    pub fn verify(&self, n_vars: usize, constraints: &[Constraint]) -> bool {
        if self.multipliers.len() != constraints.len() {
            return false;
        }
        for (y, c) in self.multipliers.iter().zip(constraints) {
            if c.rel == Relation::Le && y.is_negative() {
                return false;
            }
        }
        let mut combo = vec![Rat::zero(); n_vars];
        let mut rhs = Rat::zero();
        for (y, c) in self.multipliers.iter().zip(constraints) {
            for (j, a) in c.coeffs.iter().enumerate() {
                combo[j] += y * a;
            }
            rhs += y * &c.rhs;
        }
        combo.iter().all(Zero::is_zero) && rhs.is_negative()
    }
}

#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible(Vec<Rat>),
    Infeasible(FarkasCertificate),
}

#[derive(Debug, Clone)]
pub enum Optimum {
    Optimal { value: Rat, point: Vec<Rat> },
    Unbounded,
    Infeasible(FarkasCertificate),
}

struct Tableau {
    /// m x ncols coefficient rows, rhs kept separate.
    a: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    cost: Vec<Rat>,
    basis: Vec<usize>,
    n_vars: usize,
    n_slack: usize,
    m: usize,
    /// row sign flips applied to reach rhs >= 0
    flips: Vec<bool>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        2 * self.n_vars + self.n_slack + self.m
    }

    fn art_col(&self, row: usize) -> usize {
        2 * self.n_vars + self.n_slack + row
    }

    fn new(n_vars: usize, constraints: &[Constraint]) -> Self {
        let m = constraints.len();
        let n_slack = constraints.iter().filter(|c| c.rel == Relation::Le).count();
        let ncols = 2 * n_vars + n_slack + m;
        let mut a = vec![vec![Rat::zero(); ncols]; m];
        let mut rhs = vec![Rat::zero(); m];
        let mut flips = vec![false; m];
        let mut next_slack = 2 * n_vars;
        for (i, c) in constraints.iter().enumerate() {
            assert_eq!(c.coeffs.len(), n_vars, "constraint arity mismatch");
            let flip = c.rhs.is_negative();
            flips[i] = flip;
            let sign = if flip { -Rat::one() } else { Rat::one() };
            for (j, v) in c.coeffs.iter().enumerate() {
                a[i][j] = &sign * v;
                a[i][n_vars + j] = -(&sign * v);
            }
            if c.rel == Relation::Le {
                a[i][next_slack] = sign.clone();
                next_slack += 1;
            }
            a[i][2 * n_vars + n_slack + i] = Rat::one();
            rhs[i] = &sign * &c.rhs;
        }
        let basis: Vec<usize> = (0..m).map(|i| 2 * n_vars + n_slack + i).collect();
        // phase-I reduced costs: c_j - pi^T A_j with pi = 1
        let mut cost = vec![Rat::zero(); ncols];
        for (j, cj) in cost.iter_mut().enumerate() {
            let col_sum: Rat = a.iter().map(|row| row[j].clone()).sum();
            let direct = if j >= 2 * n_vars + n_slack { Rat::one() } else { Rat::zero() };
            *cj = direct - col_sum;
        }
        Tableau { a, rhs, cost, basis, n_vars, n_slack, m, flips }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        debug_assert!(!p.is_zero());
        for v in self.a[row].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[row] = &self.rhs[row] / &p;
        for r in 0..self.m {
            if r == row || self.a[r][col].is_zero() {
                continue;
            }
            let f = self.a[r][col].clone();
            for j in 0..self.ncols() {
                let delta = &f * &self.a[row][j];
                self.a[r][j] = &self.a[r][j] - &delta;
            }
            let delta = &f * &self.rhs[row];
            self.rhs[r] = &self.rhs[r] - &delta;
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for j in 0..self.ncols() {
                let delta = &f * &self.a[row][j];
                self.cost[j] = &self.cost[j] - &delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland-rule minimization over the allowed columns. Returns false when
    /// an improving column has no positive pivot (unbounded).
    fn run(&mut self, allow: impl Fn(usize) -> bool) -> bool {
        loop {
            let Some(enter) = (0..self.ncols())
                .find(|&j| allow(j) && self.cost[j].is_negative())
            else {
                return true;
            };
            let mut leave: Option<usize> = None;
            let mut best: Option<Rat> = None;
            for r in 0..self.m {
                if self.a[r][enter].is_positive() {
                    let ratio = &self.rhs[r] / &self.a[r][enter];
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            ratio < *b
                                || (ratio == *b
                                    && self.basis[r] < self.basis[leave.unwrap()])
                        }
                    };
                    if better {
                        best = Some(ratio);
                        leave = Some(r);
                    }
                }
            }
            match leave {
                Some(r) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn phase_one_value(&self) -> Rat {
        let art0 = 2 * self.n_vars + self.n_slack;
        (0..self.m)
            .filter(|&r| self.basis[r] >= art0)
            .map(|r| self.rhs[r].clone())
            .sum()
    }

    fn extract_point(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.n_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                x[b] += &self.rhs[r];
            } else if b < 2 * self.n_vars {
                x[b - self.n_vars] -= &self.rhs[r];
            }
        }
        x
    }

    /// Farkas multipliers from the optimal phase-I reduced costs.
    fn farkas(&self) -> FarkasCertificate {
        let mut multipliers = Vec::with_capacity(self.m);
        for i in 0..self.m {
            // pi_i = 1 - reduced_cost(artificial_i); mu_i = sign_i * pi_i
            let pi = Rat::one() - self.cost[self.art_col(i)].clone();
            let mu = if self.flips[i] { -pi } else { pi };
            multipliers.push(-mu);
        }
        FarkasCertificate { multipliers }
    }

    /// After a zero-value phase I, pivot leftover basic artificials out (or
    /// leave them on all-zero rows, which are redundant constraints).
    fn purge_artificials(&mut self) {
        let art0 = 2 * self.n_vars + self.n_slack;
        for r in 0..self.m {
            if self.basis[r] < art0 {
                continue;
            }
            if let Some(col) = (0..art0).find(|&j| !self.a[r][j].is_zero()) {
                self.pivot(r, col);
            }
        }
    }

    fn load_costs(&mut self, objective_min: &[Rat]) {
        // reduced costs for cost vector c over structural columns:
        // red_j = c_j - sum_r c_basis(r) * a[r][j]
        let art0 = 2 * self.n_vars + self.n_slack;
        let col_cost = |j: usize| -> Rat {
            if j < self.n_vars {
                objective_min[j].clone()
            } else if j < 2 * self.n_vars {
                -objective_min[j - self.n_vars].clone()
            } else {
                Rat::zero()
            }
        };
        let basis_costs: Vec<Rat> = self.basis.iter().map(|&b| col_cost(b)).collect();
        for j in 0..art0 {
            let mut red = col_cost(j);
            for (bc, row) in basis_costs.iter().zip(&self.a) {
                if !bc.is_zero() {
                    red -= bc * &row[j];
                }
            }
            self.cost[j] = red;
        }
        for j in art0..self.ncols() {
            self.cost[j] = Rat::zero();
        }
    }
}

/// Decide feasibility of `constraints` over free variables `x in R^n_vars`.
pub fn feasible_point(n_vars: usize, constraints: &[Constraint]) -> Result<Feasibility> {
    let mut t = Tableau::new(n_vars, constraints);
    if !t.run(|_| true) {
        return Err(Error::Internal("phase I cannot be unbounded".into()));
    }
    if t.phase_one_value().is_zero() {
        Ok(Feasibility::Feasible(t.extract_point()))
    } else {
        let cert = t.farkas();
        if !cert.verify(n_vars, constraints) {
            return Err(Error::Internal("Farkas certificate failed verification".into()));
        }
        Ok(Feasibility::Infeasible(cert))
    }
}

/// Maximize `objective · x` subject to `constraints`, x free.
pub fn maximize(n_vars: usize, objective: &[Rat], constraints: &[Constraint]) -> Result<Optimum> {
    assert_eq!(objective.len(), n_vars);
    let mut t = Tableau::new(n_vars, constraints);
    if !t.run(|_| true) {
        return Err(Error::Internal("phase I cannot be unbounded".into()));
    }
    if !t.phase_one_value().is_zero() {
        let cert = t.farkas();
        if !cert.verify(n_vars, constraints) {
            return Err(Error::Internal("Farkas certificate failed verification".into()));
        }
        return Ok(Optimum::Infeasible(cert));
    }
    t.purge_artificials();
    let minimize: Vec<Rat> = objective.iter().map(|c| -c).collect();
    t.load_costs(&minimize);
    let art0 = 2 * t.n_vars + t.n_slack;
    if !t.run(|j| j < art0) {
        return Ok(Optimum::Unbounded);
    }
    let point = t.extract_point();
    let value: Rat = objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .sum();
    Ok(Optimum::Optimal { value, point })
}
