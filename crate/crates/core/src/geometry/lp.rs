//! Dense two-phase tableau simplex over exact rationals.
//!
//! Variables are free unless marked nonnegative; free variables are split
//! into a difference of two nonnegative columns. Pivoting uses Dantzig's rule
//! and falls back to Bland's rule after a run of degenerate pivots, which
//! rules out cycling.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub maximize: bool,
    pub constraints: Vec<Constraint>,
    pub nonneg: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A feasibility problem (zero objective) over `num_vars` free variables.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            maximize: true,
            constraints: Vec::new(),
            nonneg: vec![false; num_vars],
        }
    }

    pub fn maximize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self.maximize = true;
        self
    }

    pub fn minimize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self.maximize = false;
        self
    }

    pub fn set_nonneg(&mut self, var: usize) {
        self.nonneg[var] = true;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

/// Column kinds in the working tableau.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Col {
    Pos(usize),
    Neg(usize),
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs followed by the objective value.
    z: Vec<Rational>,
    basis: Vec<usize>,
    cols: Vec<Col>,
}

const DEGENERATE_LIMIT: usize = 50;

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut cols = Vec::new();
        let mut var_cols = Vec::with_capacity(lp.num_vars);
        for j in 0..lp.num_vars {
            let pos = cols.len();
            cols.push(Col::Pos(j));
            let neg = if lp.nonneg[j] {
                None
            } else {
                cols.push(Col::Neg(j));
                Some(cols.len() - 1)
            };
            var_cols.push((pos, neg));
        }
        let structural = cols.len();

        // Normalize to nonnegative right-hand sides and count auxiliary columns.
        let mut normalized = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            if c.rhs.is_negative() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                let coeffs: Vec<Rational> = c.coeffs.iter().map(|x| -x).collect();
                normalized.push((coeffs, rel, -&c.rhs));
            } else {
                normalized.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
            }
        }
        let n_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let width = structural + n_slack + n_art + 1;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut next_slack = structural;
        let mut next_art = structural + n_slack;
        cols.extend(std::iter::repeat_n(Col::Slack, n_slack));
        cols.extend(std::iter::repeat_n(Col::Artificial, n_art));
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Rational::zero(); width];
            for (j, a) in coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (pos, neg) = var_cols[j];
                row[pos] = a.clone();
                if let Some(neg) = neg {
                    row[neg] = -a;
                }
            }
            row[width - 1] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, z: vec![Rational::zero(); width], basis, cols }
    }

    fn width(&self) -> usize {
        self.cols.len() + 1
    }

    /// Recomputes reduced costs for the maximization objective `c` (per column).
    fn set_objective(&mut self, c: &[Rational]) {
        let w = self.width();
        let mut z: Vec<Rational> = (0..w)
            .map(|j| if j < w - 1 { -&c[j] } else { Rational::zero() })
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (zj, a) in z.iter_mut().zip(row.iter()) {
                if !a.is_zero() {
                    *zj += cb * a;
                }
            }
        }
        self.z = z;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &f * &prow[j];
                row[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.z);
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective. Returns false if unbounded.
    fn optimize(&mut self, allowed: impl Fn(Col) -> bool) -> bool {
        let w = self.width();
        let mut bland = false;
        let mut stalled = 0;
        loop {
            let mut enter = None;
            for j in 0..w - 1 {
                if !self.z[j].is_negative() || !allowed(self.cols[j]) {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && self.z[j] < self.z[e] => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[w - 1] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return false };
            if ratio.is_zero() {
                stalled += 1;
                if stalled >= DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
            self.pivot(r, c);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let w = self.width();
        let has_art = self.cols.contains(&Col::Artificial);
        if has_art {
            let c: Vec<Rational> = self
                .cols
                .iter()
                .map(|k| if *k == Col::Artificial { -Rational::one() } else { Rational::zero() })
                .collect();
            self.set_objective(&c);
            self.optimize(|_| true);
            if self.z[w - 1].is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-valued artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.cols[self.basis[i]] == Col::Artificial {
                    let entering = (0..w - 1)
                        .find(|&j| self.cols[j] != Col::Artificial && !self.rows[i][j].is_zero());
                    match entering {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        let sign = if lp.maximize { Rational::one() } else { -Rational::one() };
        let c: Vec<Rational> = self
            .cols
            .iter()
            .map(|k| match k {
                Col::Pos(j) => &sign * &lp.objective[*j],
                Col::Neg(j) => -(&sign * &lp.objective[*j]),
                _ => Rational::zero(),
            })
            .collect();
        self.set_objective(&c);
        if !self.optimize(|k| k != Col::Artificial) {
            return LpOutcome::Unbounded;
        }

        let mut point = vec![Rational::zero(); lp.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            let v = &self.rows[i][w - 1];
            match self.cols[b] {
                Col::Pos(j) => point[j] += v,
                Col::Neg(j) => point[j] -= v,
                _ => {}
            }
        }
        let value = &sign * &self.z[w - 1];
        LpOutcome::Optimal { value, point }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn small_bounded_program() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (8/5, 6/5), value 14/5
        let mut lp = LinearProgram::new(2).maximize(vec![qi(1), qi(1)]);
        lp.set_nonneg(0);
        lp.set_nonneg(1);
        lp.add(vec![qi(1), qi(2)], Relation::Le, qi(4));
        lp.add(vec![qi(3), qi(1)], Relation::Le, qi(6));
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal { value: q(14, 5), point: vec![q(8, 5), q(6, 5)] }
        );
    }

    #[test]
    fn unbounded_and_infeasible() {
        let mut lp = LinearProgram::new(1).maximize(vec![qi(1)]);
        lp.add(vec![qi(1)], Relation::Ge, qi(0));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);

        let mut lp = LinearProgram::new(1);
        lp.add(vec![qi(1)], Relation::Ge, qi(2));
        lp.add(vec![qi(1)], Relation::Le, qi(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |x - 3| style: min t s.t. t >= x - 3, t >= 3 - x, x = -1 -> t = 4
        let mut lp = LinearProgram::new(2).minimize(vec![qi(0), qi(1)]);
        lp.add(vec![qi(1), qi(-1)], Relation::Le, qi(3));
        lp.add(vec![qi(-1), qi(-1)], Relation::Le, qi(-3));
        lp.add(vec![qi(1), qi(0)], Relation::Eq, qi(-1));
        assert_eq!(lp.solve().value(), Some(&qi(4)));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2).maximize(vec![qi(1), qi(0)]);
        lp.add(vec![qi(1), qi(1)], Relation::Eq, qi(1));
        lp.add(vec![qi(2), qi(2)], Relation::Eq, qi(2));
        lp.set_nonneg(0);
        lp.set_nonneg(1);
        assert_eq!(lp.solve().value(), Some(&qi(1)));
    }
}
