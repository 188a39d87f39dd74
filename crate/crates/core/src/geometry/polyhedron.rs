use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::lp::{LinearProgram, LpOutcome, Relation};
use super::{dot, independent_rows, solve_square, Vector};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// The constraint `normal · x <= offset` (or `=` when used as an equality).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: Rational) -> Self {
        Halfspace { normal, offset }
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x)
    }

    fn is_trivial(&self) -> bool {
        self.normal.iter().all(Rational::is_zero)
    }
}

/// A polyhedron `{x : A x <= b, E x = e}` in halfspace form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub dim: usize,
    pub inequalities: Vec<Halfspace>,
    pub equalities: Vec<Halfspace>,
}

impl Polyhedron {
    /// The whole space `R^dim`.
    pub fn universe(dim: usize) -> Self {
        Polyhedron { dim, inequalities: Vec::new(), equalities: Vec::new() }
    }

    /// The probability simplex in `R^n`.
    pub fn simplex(n: usize) -> Self {
        let mut p = Self::universe(n);
        p.add_eq(vec![Rational::one(); n], Rational::one());
        for i in 0..n {
            let mut a = vec![Rational::zero(); n];
            a[i] = -Rational::one();
            p.add_le(a, Rational::zero());
        }
        p
    }

    pub fn point(x: &[Rational]) -> Self {
        let mut p = Self::universe(x.len());
        for (i, xi) in x.iter().enumerate() {
            let mut a = vec![Rational::zero(); x.len()];
            a[i] = Rational::one();
            p.add_eq(a, xi.clone());
        }
        p
    }

    /// A one-dimensional interval with optional endpoints.
    pub fn interval(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        let mut p = Self::universe(1);
        if let Some(lo) = lo {
            p.add_le(vec![-Rational::one()], -lo);
        }
        if let Some(hi) = hi {
            p.add_le(vec![Rational::one()], hi);
        }
        p
    }

    /// The axis-aligned box `lo <= x <= hi`.
    pub fn cube(lo: &[Rational], hi: &[Rational]) -> Self {
        let d = lo.len();
        let mut p = Self::universe(d);
        for i in 0..d {
            let mut a = vec![Rational::zero(); d];
            a[i] = Rational::one();
            p.add_le(a.clone(), hi[i].clone());
            a[i] = -Rational::one();
            p.add_le(a, -&lo[i]);
        }
        p
    }

    pub fn add_le(&mut self, normal: Vector, offset: Rational) {
        assert_eq!(normal.len(), self.dim);
        self.inequalities.push(Halfspace { normal, offset });
    }

    pub fn add_eq(&mut self, normal: Vector, offset: Rational) {
        assert_eq!(normal.len(), self.dim);
        self.equalities.push(Halfspace { normal, offset });
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.inequalities.iter().all(|h| h.value(x) <= h.offset)
            && self.equalities.iter().all(|h| h.value(x) == h.offset)
    }

    /// Writes this polyhedron's constraints on variables `offset..offset + dim` of `lp`.
    pub fn constrain(&self, lp: &mut LinearProgram, offset: usize) {
        for (h, rel) in self
            .inequalities
            .iter()
            .map(|h| (h, Relation::Le))
            .chain(self.equalities.iter().map(|h| (h, Relation::Eq)))
        {
            let terms: Vec<(usize, Rational)> = h
                .normal
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(i, a)| (offset + i, a.clone()))
                .collect();
            lp.add_sparse(&terms, rel, h.offset.clone());
        }
    }

    /// Maximizes (or minimizes) a linear objective over the polyhedron.
    pub fn optimize(&self, objective: &[Rational], maximize: bool) -> LpOutcome {
        let lp = LinearProgram::new(self.dim);
        let mut lp = if maximize { lp.maximize(objective.to_vec()) } else { lp.minimize(objective.to_vec()) };
        self.constrain(&mut lp, 0);
        lp.solve()
    }

    pub fn feasible_point(&self) -> Option<Vector> {
        if self.contains(&vec![Rational::zero(); self.dim]) {
            return Some(vec![Rational::zero(); self.dim]);
        }
        match self.optimize(&vec![Rational::zero(); self.dim], true) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        let mut p = self.clone();
        p.inequalities.extend(other.inequalities.iter().cloned());
        p.equalities.extend(other.equalities.iter().cloned());
        p
    }

    /// `true` iff `self ⊆ other` (an empty `self` is contained in everything).
    pub fn is_subset_of(&self, other: &Polyhedron) -> bool {
        if self.is_empty() {
            return true;
        }
        let fits = |h: &Halfspace, upper: bool| {
            let obj: Vector = if upper { h.normal.clone() } else { h.normal.iter().map(|a| -a).collect() };
            let bound = if upper { h.offset.clone() } else { -&h.offset };
            match self.optimize(&obj, true) {
                LpOutcome::Optimal { value, .. } => value <= bound,
                _ => false,
            }
        };
        other.inequalities.iter().all(|h| fits(h, true))
            && other.equalities.iter().all(|h| fits(h, true) && fits(h, false))
    }

    pub fn same_set(&self, other: &Polyhedron) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// Per-coordinate bounds; `None` marks an unbounded direction.
    /// Returns `None` for an empty polyhedron.
    pub fn bounding_box(&self) -> Option<Vec<(Option<Rational>, Option<Rational>)>> {
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut e = vec![Rational::zero(); self.dim];
            e[i] = Rational::one();
            let hi = match self.optimize(&e, true) {
                LpOutcome::Optimal { value, .. } => Some(value),
                LpOutcome::Unbounded => None,
                LpOutcome::Infeasible => return None,
            };
            let lo = match self.optimize(&e, false) {
                LpOutcome::Optimal { value, .. } => Some(value),
                _ => None,
            };
            out.push((lo, hi));
        }
        Some(out)
    }

    pub fn is_bounded(&self) -> bool {
        match self.bounding_box() {
            Some(b) => b.iter().all(|(lo, hi)| lo.is_some() && hi.is_some()),
            None => true,
        }
    }

    /// Vertices of a bounded polyhedron, sorted lexicographically.
    pub fn vertices(&self) -> Result<Vec<Vector>> {
        if !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        Ok(self.basic_points())
    }

    /// Basic feasible points: feasible points where the active constraints
    /// have full rank. These are the vertices when the polyhedron is pointed,
    /// and the result is empty when it contains a line.
    pub fn basic_points(&self) -> Vec<Vector> {
        let Some(eqs) = independent_rows(&self.equalities) else {
            return Vec::new();
        };
        if eqs.len() > self.dim {
            return Vec::new();
        }
        let need = self.dim - eqs.len();
        let ineqs: Vec<&Halfspace> = self.inequalities.iter().filter(|h| !h.is_trivial()).collect();
        if self.inequalities.iter().any(|h| h.is_trivial() && h.offset.is_negative()) {
            return Vec::new();
        }
        let mut found = BTreeSet::new();
        for subset in (0..ineqs.len()).combinations(need) {
            let mut a: Vec<Vector> = eqs.iter().map(|h| h.normal.clone()).collect();
            let mut b: Vector = eqs.iter().map(|h| h.offset.clone()).collect();
            for &k in &subset {
                a.push(ineqs[k].normal.clone());
                b.push(ineqs[k].offset.clone());
            }
            if let Some(x) = solve_square(a, b) {
                if self.contains(&x) {
                    found.insert(x);
                }
            }
        }
        found.into_iter().collect()
    }

    /// Number of square systems `basic_points` would solve.
    pub fn basis_count(&self) -> u128 {
        let m = self.inequalities.len() as u128;
        let k = self.dim.saturating_sub(self.equalities.len()) as u128;
        let mut c: u128 = 1;
        for i in 0..k.min(m) {
            c = c.saturating_mul(m - i) / (i + 1);
        }
        if k > m {
            0
        } else {
            c
        }
    }

    /// Removes duplicate and trivially satisfied constraints.
    pub fn simplified(&self) -> Polyhedron {
        let mut ineq: Vec<Halfspace> = Vec::new();
        for h in &self.inequalities {
            if h.is_trivial() && !h.offset.is_negative() {
                continue;
            }
            if !ineq.contains(h) {
                ineq.push(h.clone());
            }
        }
        let mut eq: Vec<Halfspace> = Vec::new();
        for h in &self.equalities {
            if h.is_trivial() && h.offset.is_zero() {
                continue;
            }
            // Scale so the leading coefficient is 1, making duplicates identical.
            let h = match h.normal.iter().find(|a| !a.is_zero()) {
                Some(lead) => {
                    let inv = lead.recip();
                    Halfspace { normal: h.normal.iter().map(|a| a * &inv).collect(), offset: &h.offset * &inv }
                }
                None => h.clone(),
            };
            let h = &h;
            if !eq.contains(h) {
                eq.push(h.clone());
            }
        }
        Polyhedron { dim: self.dim, inequalities: ineq, equalities: eq }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |h: &Halfspace| {
            let mut s = String::new();
            for (i, a) in h.normal.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let sign = if a.is_negative() { "-" } else { "+" };
                let mag = a.abs();
                let coef = if mag.is_one() { String::new() } else { format!("{mag}*") };
                if s.is_empty() {
                    s = format!("{}{coef}x{}", if a.is_negative() { "-" } else { "" }, i + 1);
                } else {
                    s = format!("{s} {sign} {coef}x{}", i + 1);
                }
            }
            if s.is_empty() {
                s = "0".into();
            }
            s
        };
        let mut parts: Vec<String> = self.equalities.iter().map(|h| format!("{} = {}", term(h), h.offset)).collect();
        parts.extend(self.inequalities.iter().map(|h| format!("{} <= {}", term(h), h.offset)));
        if parts.is_empty() {
            write!(f, "R^{}", self.dim)
        } else {
            write!(f, "{{x : {}}}", parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn simplex_vertices_are_unit_vectors() {
        let v = Polyhedron::simplex(3).vertices().unwrap();
        assert_eq!(
            v,
            vec![
                vec![qi(0), qi(0), qi(1)],
                vec![qi(0), qi(1), qi(0)],
                vec![qi(1), qi(0), qi(0)]
            ]
        );
    }

    #[test]
    fn unbounded_vertices_error() {
        let p = Polyhedron::interval(Some(qi(1)), None);
        assert_eq!(p.vertices(), Err(Error::Unbounded));
        assert_eq!(p.basic_points(), vec![vec![qi(1)]]);
    }

    #[test]
    fn containment() {
        let a = Polyhedron::interval(Some(qi(0)), Some(q(1, 2)));
        let b = Polyhedron::interval(Some(qi(-1)), Some(qi(1)));
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        let half_line = Polyhedron::interval(Some(qi(0)), None);
        assert!(!half_line.is_subset_of(&b));
        assert!(a.same_set(&a.intersect(&b)));
    }
}
