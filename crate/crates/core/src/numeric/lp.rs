//! Exact two-phase simplex over [`Rational`].
//!
//! Every pivot uses Bland's rule (lowest-index improving column enters,
//! lowest-index basic variable leaves on ratio ties), so the solver terminates
//! on degenerate programs and the returned vertex is a deterministic function
//! of the input.

use serde::{Deserialize, Serialize};

use super::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable box; `None` means unbounded on that side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VariableBounds {
    pub fn non_negative() -> Self {
        VariableBounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        VariableBounds {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn free() -> Self {
        VariableBounds {
            lower: None,
            upper: None,
        }
    }
}

/// `maximize objective·x + objective_offset` subject to `constraints` and `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub objective_offset: Rational,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VariableBounds>,
}

/// A constraint that holds with equality at a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tight {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSolution {
    pub values: Vec<Rational>,
    pub objective_value: Rational,
    /// Every row and bound active at `values`, in ascending order.
    pub tight: Vec<Tight>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("objective is unbounded above")]
    Unbounded,
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

impl LinearProgram {
    /// A program over `objective.len()` non-negative variables with no rows.
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            objective_offset: Rational::zero(),
            constraints: Vec::new(),
            bounds: vec![VariableBounds::non_negative(); n],
        }
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VariableBounds) {
        self.bounds[var] = bounds;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_variables();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x) + &self.objective_offset
    }

    pub fn row_activity(&self, row: usize, x: &[Rational]) -> Rational {
        dot(&self.constraints[row].coefficients, x)
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_variables() {
            return false;
        }
        let rows_ok = self.constraints.iter().all(|row| {
            let lhs = dot(&row.coefficients, x);
            match row.relation {
                Relation::Le => lhs <= row.rhs,
                Relation::Ge => lhs >= row.rhs,
                Relation::Eq => lhs == row.rhs,
            }
        });
        let bounds_ok = self.bounds.iter().zip(x).all(|(b, v)| {
            b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u)
        });
        rows_ok && bounds_ok
    }

    /// Rows and bounds satisfied with equality at `x`.
    pub fn tight_set(&self, x: &[Rational]) -> Vec<Tight> {
        let mut tight = Vec::new();
        for (i, row) in self.constraints.iter().enumerate() {
            if dot(&row.coefficients, x) == row.rhs {
                tight.push(Tight::Row(i));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.as_ref() == Some(&x[j]) {
                tight.push(Tight::Lower(j));
            }
            if b.upper.as_ref() == Some(&x[j]) {
                tight.push(Tight::Upper(j));
            }
        }
        tight
    }
}

fn dot(a: &[Rational], x: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (c, v) in a.iter().zip(x) {
        if !c.is_zero() && !v.is_zero() {
            acc += c * v;
        }
    }
    acc
}

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone)]
enum Substitution {
    /// `x = lower + col`
    Shift { col: usize, lower: Rational },
    /// `x = upper - col`
    Reflect { col: usize, upper: Rational },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows × (cols + 1)`, the last entry of each row is its right-hand side.
    cells: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds minus the current objective.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.cells[row][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.cells[row][col].recip();
        if !inv.is_one() {
            for v in self.cells[row].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.cells[row]);
        let nonzero: Vec<usize> = (0..=self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, other) in self.cells.iter_mut().enumerate() {
            if i == row || other.is_empty() {
                continue;
            }
            let factor = other[col].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &nonzero {
                other[j] -= &factor * &pivot_row[j];
            }
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for &j in &nonzero {
                self.cost[j] -= &factor * &pivot_row[j];
            }
        }
        self.cells[row] = pivot_row;
        self.basis[row] = col;
    }

    /// Recompute reduced costs for `costs` against the current basis.
    fn price(&mut self, costs: &[Rational]) {
        let mut cost: Vec<Rational> = costs.to_vec();
        cost.resize(self.cols + 1, Rational::zero());
        for (row, &b) in self.basis.iter().enumerate() {
            let factor = cost[b].clone();
            if factor.is_zero() {
                continue;
            }
            for (j, v) in self.cells[row].iter().enumerate() {
                if !v.is_zero() {
                    cost[j] -= &factor * v;
                }
            }
        }
        self.cost = cost;
    }

    /// Bland's-rule simplex over the allowed columns. Returns `false` if unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.cost[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for row in 0..self.cells.len() {
                let a = &self.cells[row][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(row) / a;
                let better = match &best {
                    None => true,
                    Some((r, q)) => ratio < *q || (ratio == *q && self.basis[row] < self.basis[*r]),
                };
                if better {
                    best = Some((row, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Solve `lp` to an optimal vertex.
pub fn solve_vertex_optimal(lp: &LinearProgram) -> Result<VertexSolution, LpError> {
    lp.validate()?;
    let n = lp.num_variables();

    // Rewrite every variable through non-negative columns.
    let mut subs = Vec::with_capacity(n);
    let mut structural = 0usize;
    for b in &lp.bounds {
        let sub = match (&b.lower, &b.upper) {
            (Some(lower), _) => {
                structural += 1;
                Substitution::Shift {
                    col: structural - 1,
                    lower: lower.clone(),
                }
            }
            (None, Some(upper)) => {
                structural += 1;
                Substitution::Reflect {
                    col: structural - 1,
                    upper: upper.clone(),
                }
            }
            (None, None) => {
                structural += 2;
                Substitution::Split {
                    pos: structural - 2,
                    neg: structural - 1,
                }
            }
        };
        subs.push(sub);
    }

    // Rows over structural columns: (coefficients, relation, rhs).
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); structural];
        let mut rhs = c.rhs.clone();
        for (a, sub) in c.coefficients.iter().zip(&subs) {
            if a.is_zero() {
                continue;
            }
            match sub {
                Substitution::Shift { col, lower } => {
                    coeffs[*col] = a.clone();
                    rhs -= a * lower;
                }
                Substitution::Reflect { col, upper } => {
                    coeffs[*col] = -a;
                    rhs -= a * upper;
                }
                Substitution::Split { pos, neg } => {
                    coeffs[*pos] = a.clone();
                    coeffs[*neg] = -a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for (b, sub) in lp.bounds.iter().zip(&subs) {
        if let (Substitution::Shift { col, lower }, Some(upper)) = (sub, &b.upper) {
            let mut coeffs = vec![Rational::zero(); structural];
            coeffs[*col] = Rational::one();
            rows.push((coeffs, Relation::Le, upper - lower));
        }
    }

    // Normalize to non-negative right-hand sides.
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for a in coeffs.iter_mut() {
                *a = -&*a;
            }
            *rhs = -&*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificial_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_slack = structural;
    let first_artificial = structural + slack_count;
    let cols = first_artificial + artificial_count;

    let mut cells = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut next_slack, mut next_artificial) = (first_slack, first_artificial);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(cols + 1, Rational::zero());
        row[cols] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_artificial] = Rational::one();
                basis.push(next_artificial);
                next_artificial += 1;
            }
            Relation::Eq => {
                row[next_artificial] = Rational::one();
                basis.push(next_artificial);
                next_artificial += 1;
            }
        }
        cells.push(row);
    }

    let mut tab = Tableau {
        cells,
        cost: Vec::new(),
        basis,
        cols,
    };

    // Phase 1: drive the artificial sum to zero.
    if artificial_count > 0 {
        let mut phase1 = vec![Rational::zero(); cols];
        for c in phase1.iter_mut().skip(first_artificial) {
            *c = -Rational::one();
        }
        tab.price(&phase1);
        let all = vec![true; cols];
        tab.optimize(&all);
        if tab.cost[cols].is_positive() {
            // cost[cols] = -(phase-1 objective) = sum of artificials > 0
            return Err(LpError::Infeasible);
        }
        // Pivot degenerate artificials out of the basis or drop redundant rows.
        let mut row = 0;
        while row < tab.cells.len() {
            if tab.basis[row] >= first_artificial {
                match (0..first_artificial).find(|&j| !tab.cells[row][j].is_zero()) {
                    Some(col) => tab.pivot(row, col),
                    None => {
                        tab.cells.remove(row);
                        tab.basis.remove(row);
                        continue;
                    }
                }
            }
            row += 1;
        }
    }

    // Phase 2 over structural and slack columns.
    let mut costs = vec![Rational::zero(); cols];
    for (a, sub) in lp.objective.iter().zip(&subs) {
        match sub {
            Substitution::Shift { col, .. } => costs[*col] = a.clone(),
            Substitution::Reflect { col, .. } => costs[*col] = -a,
            Substitution::Split { pos, neg } => {
                costs[*pos] = a.clone();
                costs[*neg] = -a;
            }
        }
    }
    tab.price(&costs);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_artificial).collect();
    if !tab.optimize(&allowed) {
        return Err(LpError::Unbounded);
    }

    let mut column_values = vec![Rational::zero(); cols];
    for (row, &b) in tab.basis.iter().enumerate() {
        column_values[b] = tab.rhs(row).clone();
    }
    let values: Vec<Rational> = subs
        .iter()
        .map(|sub| match sub {
            Substitution::Shift { col, lower } => lower + &column_values[*col],
            Substitution::Reflect { col, upper } => upper - &column_values[*col],
            Substitution::Split { pos, neg } => &column_values[*pos] - &column_values[*neg],
        })
        .collect();

    let objective_value = lp.evaluate(&values);
    let tight = lp.tight_set(&values);
    Ok(VertexSolution {
        values,
        objective_value,
        tight,
    })
}
