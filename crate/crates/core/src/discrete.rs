//! Discrete losses over a finite outcome set, their Bayes risks and level sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, LinearProgram, LpOutcome, Polyhedron, Relation, Vector};
use crate::rational::Rational;

/// Checks that `p` is a probability vector over `n` outcomes.
pub fn check_distribution(p: &[Rational], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    if let Some(x) = p.iter().find(|x| x.is_negative()) {
        return Err(Error::NotDistribution(format!("negative entry {x}")));
    }
    let total: Rational = p.iter().sum();
    if !total.is_one() {
        return Err(Error::NotDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Indices with positive probability.
pub fn support(p: &[Rational]) -> Vec<usize> {
    (0..p.len()).filter(|&i| p[i].is_positive()).collect()
}

/// All distributions over `n` outcomes with entries in `{0, 1/m, ..., 1}`,
/// in lexicographic order of their numerators.
pub fn simplex_grid(n: usize, m: u32) -> Vec<Vector> {
    assert!(n >= 1 && m >= 1);
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fn rec(i: usize, left: u32, counts: &mut Vec<u32>, m: u32, out: &mut Vec<Vector>) {
        let n = counts.len();
        if i == n - 1 {
            counts[i] = left;
            out.push(counts.iter().map(|&c| Rational::new(c as i64, m as i64)).collect());
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, m, out);
        }
    }
    rec(0, m, &mut counts, m, &mut out);
    out
}

/// A loss `ℓ : R × Y → R` given as a matrix `matrix[r][y]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteLoss {
    pub outcomes: Vec<String>,
    pub reports: Vec<String>,
    pub matrix: Vec<Vec<Rational>>,
}

/// Optimal expected loss at a distribution together with all optimal reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BayesRisk {
    pub risk: Rational,
    pub optimal: Vec<usize>,
}

impl DiscreteLoss {
    pub fn new(outcomes: Vec<String>, reports: Vec<String>, matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let loss = DiscreteLoss { outcomes, reports, matrix };
        loss.validate()?;
        Ok(loss)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outcomes.is_empty() || self.reports.is_empty() {
            return Err(Error::Invalid("loss needs at least one outcome and one report".into()));
        }
        if self.matrix.len() != self.reports.len() {
            return Err(Error::Dimension { expected: self.reports.len(), got: self.matrix.len() });
        }
        for row in &self.matrix {
            if row.len() != self.outcomes.len() {
                return Err(Error::Dimension { expected: self.outcomes.len(), got: row.len() });
            }
        }
        let mut seen = HashSet::new();
        for r in &self.reports {
            if !seen.insert(r) {
                return Err(Error::Invalid(format!("duplicate report label `{r}`")));
            }
        }
        let mut seen = HashSet::new();
        for y in &self.outcomes {
            if !seen.insert(y) {
                return Err(Error::Invalid(format!("duplicate outcome label `{y}`")));
            }
        }
        Ok(())
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn n_reports(&self) -> usize {
        self.reports.len()
    }

    pub fn report_index(&self, label: &str) -> Option<usize> {
        self.reports.iter().position(|r| r == label)
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|y| y == label)
    }

    /// `⟨p, ℓ(r)⟩`.
    pub fn expected_loss(&self, r: usize, p: &[Rational]) -> Result<Rational> {
        check_distribution(p, self.n_outcomes())?;
        Ok(dot(&self.matrix[r], p))
    }

    /// `min_r ⟨p, ℓ(r)⟩` and the set of minimizers.
    pub fn bayes_risk(&self, p: &[Rational]) -> Result<BayesRisk> {
        check_distribution(p, self.n_outcomes())?;
        Ok(self.bayes_risk_unchecked(p))
    }

    pub(crate) fn bayes_risk_unchecked(&self, p: &[Rational]) -> BayesRisk {
        let mut risk: Option<Rational> = None;
        let mut optimal = Vec::new();
        for (r, row) in self.matrix.iter().enumerate() {
            let v = dot(row, p);
            match &risk {
                Some(best) if v > *best => {}
                Some(best) if v == *best => optimal.push(r),
                _ => {
                    risk = Some(v);
                    optimal = vec![r];
                }
            }
        }
        BayesRisk { risk: risk.expect("nonempty report set"), optimal }
    }

    /// `γ_r = {p ∈ Δ : r is optimal for p}` as a polyhedron in `R^n`.
    pub fn level_set(&self, r: usize) -> Polyhedron {
        let mut cell = Polyhedron::simplex(self.n_outcomes());
        for (s, row) in self.matrix.iter().enumerate() {
            if s == r {
                continue;
            }
            let normal: Vector = self.matrix[r].iter().zip(row).map(|(a, b)| a - b).collect();
            if normal.iter().all(Rational::is_zero) {
                continue;
            }
            cell.add_le(normal, Rational::zero());
        }
        cell
    }

    /// For each report, a distribution at which it is the unique minimizer,
    /// or `None` if its level set is not full-dimensional.
    pub fn uniqueness_witnesses(&self) -> Vec<Option<Vector>> {
        (0..self.n_reports()).map(|r| self.uniqueness_witness(r)).collect()
    }

    fn uniqueness_witness(&self, r: usize) -> Option<Vector> {
        let n = self.n_outcomes();
        // Variables p_1..p_n (nonnegative) and s; maximize s subject to
        // ⟨p, ℓ(r) - ℓ(r')⟩ + s <= 0, p_y >= s, s <= 1.
        let mut obj = vec![Rational::zero(); n + 1];
        obj[n] = Rational::one();
        let mut lp = LinearProgram::new(n + 1).maximize(obj);
        for y in 0..n {
            lp.set_nonneg(y);
        }
        let mut sum = vec![Rational::one(); n + 1];
        sum[n] = Rational::zero();
        lp.add(sum, Relation::Eq, Rational::one());
        for (s, row) in self.matrix.iter().enumerate() {
            if s == r {
                continue;
            }
            let mut a: Vector = self.matrix[r].iter().zip(row).map(|(x, y)| x - y).collect();
            a.push(Rational::one());
            lp.add(a, Relation::Le, Rational::zero());
        }
        for y in 0..n {
            lp.add_sparse(&[(n, Rational::one()), (y, -Rational::one())], Relation::Le, Rational::zero());
        }
        lp.add_sparse(&[(n, Rational::one())], Relation::Le, Rational::one());
        match lp.solve() {
            LpOutcome::Optimal { value, mut point } if value.is_positive() => {
                point.truncate(n);
                let br = self.bayes_risk_unchecked(&point);
                debug_assert_eq!(br.optimal, vec![r]);
                Some(point)
            }
            _ => None,
        }
    }

    /// Succeeds with one uniqueness witness per report, or reports the
    /// redundant reports.
    pub fn check_non_redundant(&self) -> Result<Vec<Vector>> {
        let witnesses = self.uniqueness_witnesses();
        let redundant: Vec<String> = witnesses
            .iter()
            .zip(&self.reports)
            .filter(|(w, _)| w.is_none())
            .map(|(_, r)| r.clone())
            .collect();
        if !redundant.is_empty() {
            return Err(Error::Redundant(redundant));
        }
        Ok(witnesses.into_iter().map(Option::unwrap).collect())
    }

    /// The restriction to reports with full-dimensional level sets.
    pub fn trimmed(&self) -> DiscreteLoss {
        let keep: Vec<usize> = self
            .uniqueness_witnesses()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_some())
            .map(|(r, _)| r)
            .collect();
        DiscreteLoss {
            outcomes: self.outcomes.clone(),
            reports: keep.iter().map(|&r| self.reports[r].clone()).collect(),
            matrix: keep.iter().map(|&r| self.matrix[r].clone()).collect(),
        }
    }

    pub fn property(&self) -> FiniteProperty {
        FiniteProperty {
            reports: self.reports.clone(),
            cells: (0..self.n_reports()).map(|r| self.level_set(r)).collect(),
        }
    }
}

/// A finite property: one level-set polyhedron in the simplex per report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProperty {
    pub reports: Vec<String>,
    pub cells: Vec<Polyhedron>,
}

/// Result of a refinement test between two finite properties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refinement {
    Refines,
    /// A full-dimensional cell of the finer property that fits in no coarse
    /// cell, with a distribution in its interior.
    Fails { report: String, interior: Vector },
}

/// Relative-interior point of a cell inside the simplex, if full-dimensional.
pub fn cell_interior_point(cell: &Polyhedron) -> Option<Vector> {
    let cell = cell.simplified();
    let n = cell.dim;
    let mut obj = vec![Rational::zero(); n + 1];
    obj[n] = Rational::one();
    let mut lp = LinearProgram::new(n + 1).maximize(obj);
    for h in &cell.inequalities {
        let mut a = h.normal.clone();
        a.push(Rational::one());
        lp.add(a, Relation::Le, h.offset.clone());
    }
    for h in &cell.equalities {
        let mut a = h.normal.clone();
        a.push(Rational::zero());
        lp.add(a, Relation::Eq, h.offset.clone());
    }
    lp.add_sparse(&[(n, Rational::one())], Relation::Le, Rational::one());
    match lp.solve() {
        LpOutcome::Optimal { value, mut point } if value.is_positive() => {
            point.truncate(n);
            Some(point)
        }
        _ => None,
    }
}

/// Whether every full-dimensional cell of `fine` lies inside some cell of `coarse`.
pub fn refinement_check(fine: &FiniteProperty, coarse: &FiniteProperty) -> Result<Refinement> {
    for (label, cell) in fine.reports.iter().zip(&fine.cells) {
        let Some(interior) = cell_interior_point(cell) else { continue };
        if !coarse.cells.iter().any(|c| cell.is_subset_of(c)) {
            return Ok(Refinement::Fails { report: label.clone(), interior });
        }
    }
    Ok(Refinement::Refines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn zero_one3() -> DiscreteLoss {
        let labels: Vec<String> = (1..=3).map(|i| i.to_string()).collect();
        let matrix = (0..3).map(|r| (0..3).map(|y| if r == y { qi(0) } else { qi(1) }).collect()).collect();
        DiscreteLoss::new(labels.clone(), labels, matrix).unwrap()
    }

    #[test]
    fn grid_counts_and_order() {
        assert_eq!(simplex_grid(2, 2), vec![vec![qi(0), qi(1)], vec![q(1, 2), q(1, 2)], vec![qi(1), qi(0)]]);
        assert_eq!(simplex_grid(4, 8).len(), 165);
    }

    #[test]
    fn rejects_bad_distributions() {
        let l = zero_one3();
        assert!(matches!(l.bayes_risk(&[q(1, 2), q(1, 2)]), Err(Error::Dimension { .. })));
        assert!(matches!(l.bayes_risk(&[q(1, 2), q(1, 2), q(1, 2)]), Err(Error::NotDistribution(_))));
    }

    #[test]
    fn witnesses_are_unique_minimizers() {
        let l = zero_one3();
        for (r, w) in l.check_non_redundant().unwrap().iter().enumerate() {
            assert_eq!(l.bayes_risk(w).unwrap().optimal, vec![r]);
        }
    }
}
