//! Convex polyhedral surrogates `L(u)_y = max_j (a_yj · u + b_yj)`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::discrete::{check_distribution, simplex_grid, support};
use crate::error::{Error, Result};
use crate::geometry::{dot, BoxGrid, LinearProgram, LpOutcome, Polyhedron, Relation, Vector};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vector,
    pub b: Rational,
}

impl AffinePiece {
    pub fn new(a: Vector, b: Rational) -> Self {
        AffinePiece { a, b }
    }

    pub fn constant(d: usize, b: Rational) -> Self {
        AffinePiece { a: vec![Rational::zero(); d], b }
    }

    pub fn eval(&self, u: &[Rational]) -> Rational {
        dot(&self.a, u) + &self.b
    }
}

/// Set of `(outcome, piece)` pairs that are tight on an entire optimal face.
pub type Signature = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralLoss {
    pub dim: usize,
    pub outcomes: Vec<String>,
    pub pieces: Vec<Vec<AffinePiece>>,
}

/// Minimum of the expected surrogate at a distribution.
#[derive(Clone, Debug)]
pub struct ExpectedMinimum {
    pub risk: Rational,
    /// `Γ(p)` in halfspace form.
    pub argmin: Polyhedron,
    pub signature: Signature,
    /// The optimal point found by the solver.
    pub point: Vector,
}

/// One member of the optimal-set family `𝒰`.
#[derive(Clone, Debug)]
pub struct OptimalSet {
    pub argmin: Polyhedron,
    pub signature: Signature,
    /// First grid distribution whose argmin is this set.
    pub witness: Vector,
    pub point: Vector,
}

#[derive(Clone, Debug)]
pub struct OptimalSetFamily {
    pub members: Vec<OptimalSet>,
    pub grid_m: u32,
}

impl OptimalSetFamily {
    pub fn sets(&self) -> Vec<&Polyhedron> {
        self.members.iter().map(|m| &m.argmin).collect()
    }

    pub fn signatures(&self) -> BTreeSet<Signature> {
        self.members.iter().map(|m| m.signature.clone()).collect()
    }
}

impl PolyhedralLoss {
    pub fn new(dim: usize, outcomes: Vec<String>, pieces: Vec<Vec<AffinePiece>>) -> Result<Self> {
        let loss = PolyhedralLoss { dim, outcomes, pieces };
        loss.validate()?;
        Ok(loss)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outcomes.len() != self.pieces.len() {
            return Err(Error::Dimension { expected: self.outcomes.len(), got: self.pieces.len() });
        }
        for (y, ps) in self.outcomes.iter().zip(&self.pieces) {
            if ps.is_empty() {
                return Err(Error::Invalid(format!("outcome `{y}` has no affine pieces")));
            }
            for p in ps {
                if p.a.len() != self.dim {
                    return Err(Error::Dimension { expected: self.dim, got: p.a.len() });
                }
            }
        }
        Ok(())
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    fn check_point(&self, u: &[Rational]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: u.len() });
        }
        Ok(())
    }

    pub fn eval_outcome(&self, y: usize, u: &[Rational]) -> Rational {
        self.pieces[y].iter().map(|p| p.eval(u)).max().expect("nonempty pieces")
    }

    /// `L(u) ∈ R^Y`.
    pub fn eval(&self, u: &[Rational]) -> Result<Vector> {
        self.check_point(u)?;
        Ok((0..self.n_outcomes()).map(|y| self.eval_outcome(y, u)).collect())
    }

    /// Indices of the pieces of outcome `y` attaining the maximum at `u`.
    pub fn active_pieces(&self, y: usize, u: &[Rational]) -> Vec<usize> {
        let vals: Vec<Rational> = self.pieces[y].iter().map(|p| p.eval(u)).collect();
        let best = vals.iter().max().expect("nonempty pieces");
        (0..vals.len()).filter(|&j| vals[j] == *best).collect()
    }

    /// `⟨p, L(u)⟩`.
    pub fn expected(&self, p: &[Rational], u: &[Rational]) -> Result<Rational> {
        check_distribution(p, self.n_outcomes())?;
        self.check_point(u)?;
        Ok(support(p).into_iter().map(|y| &p[y] * self.eval_outcome(y, u)).sum())
    }

    /// Drops duplicate pieces within each outcome.
    pub fn deduplicated(&self) -> PolyhedralLoss {
        let pieces = self
            .pieces
            .iter()
            .map(|ps| {
                let mut seen = BTreeSet::new();
                ps.iter().filter(|p| seen.insert((*p).clone())).cloned().collect()
            })
            .collect();
        PolyhedralLoss { dim: self.dim, outcomes: self.outcomes.clone(), pieces }
    }

    /// Epigraph program over `(u, t_y for y in supp)`; returns it with the support.
    fn epigraph(&self, p: &[Rational]) -> (LinearProgram, Vec<usize>) {
        let supp = support(p);
        let d = self.dim;
        let n = d + supp.len();
        let mut obj = vec![Rational::zero(); n];
        for (k, &y) in supp.iter().enumerate() {
            obj[d + k] = p[y].clone();
        }
        let mut lp = LinearProgram::new(n).minimize(obj);
        for (k, &y) in supp.iter().enumerate() {
            for piece in &self.pieces[y] {
                let mut row = piece.a.clone();
                row.resize(n, Rational::zero());
                row[d + k] = -Rational::one();
                lp.add(row, Relation::Le, -&piece.b);
            }
        }
        (lp, supp)
    }

    /// Minimizes `⟨p, L(u)⟩` and recovers the full optimal face `Γ(p)`.
    pub fn minimize_expected(&self, p: &[Rational]) -> Result<ExpectedMinimum> {
        check_distribution(p, self.n_outcomes())?;
        let d = self.dim;
        let (lp, supp) = self.epigraph(p);
        let (risk, opt) = match lp.solve() {
            LpOutcome::Optimal { value, point } => (value, point),
            LpOutcome::Unbounded => {
                return Err(Error::UnboundedProgram("expected loss is unbounded below".into()))
            }
            LpOutcome::Infeasible => unreachable!("epigraph programs are always feasible"),
        };
        let u_opt: Vector = opt[..d].to_vec();

        // Candidates: pieces tight at the optimal point.
        let mut candidates: Vec<BTreeSet<usize>> = supp
            .iter()
            .enumerate()
            .map(|(k, &y)| {
                let t = &opt[d + k];
                (0..self.pieces[y].len()).filter(|&j| self.pieces[y][j].eval(&u_opt) == *t).collect()
            })
            .collect();

        // Remove candidates that are slack somewhere on the optimal face. An
        // outcome with a single candidate is settled, since every outcome in
        // the support keeps at least one piece tight across the whole face.
        loop {
            let open: Vec<(usize, usize)> = candidates
                .iter()
                .enumerate()
                .filter(|(_, c)| c.len() > 1)
                .flat_map(|(k, c)| c.iter().map(move |&j| (k, j)))
                .collect();
            if open.is_empty() {
                break;
            }
            let n0 = d + supp.len();
            let n = n0 + open.len();
            let mut obj = vec![Rational::zero(); n];
            for i in n0..n {
                obj[i] = Rational::one();
            }
            let mut face = LinearProgram::new(n).maximize(obj);
            for i in n0..n {
                face.set_nonneg(i);
                face.add_sparse(&[(i, Rational::one())], Relation::Le, Rational::one());
            }
            let slot: HashMap<(usize, usize), usize> =
                open.iter().enumerate().map(|(i, &kj)| (kj, n0 + i)).collect();
            for (k, &y) in supp.iter().enumerate() {
                for (j, piece) in self.pieces[y].iter().enumerate() {
                    let mut row = piece.a.clone();
                    row.resize(n, Rational::zero());
                    row[d + k] = -Rational::one();
                    if let Some(&s) = slot.get(&(k, j)) {
                        row[s] = Rational::one();
                    }
                    face.add(row, Relation::Le, -&piece.b);
                }
            }
            let mut level = vec![Rational::zero(); n];
            for (k, &y) in supp.iter().enumerate() {
                level[d + k] = p[y].clone();
            }
            face.add(level, Relation::Le, risk.clone());
            let (value, point) = match face.solve() {
                LpOutcome::Optimal { value, point } => (value, point),
                other => unreachable!("face program must be bounded and feasible: {other:?}"),
            };
            if value.is_zero() {
                break;
            }
            let u: Vector = point[..d].to_vec();
            for (k, &y) in supp.iter().enumerate() {
                let t = &point[d + k];
                candidates[k].retain(|&j| self.pieces[y][j].eval(&u) == *t);
            }
        }

        let mut argmin = Polyhedron::universe(d);
        let mut signature = Vec::new();
        for (k, &y) in supp.iter().enumerate() {
            let tight = &candidates[k];
            let rep = *tight.iter().next().expect("some piece is tight on the whole face");
            let base = &self.pieces[y][rep];
            for (j, piece) in self.pieces[y].iter().enumerate() {
                if j == rep {
                    continue;
                }
                let normal: Vector = piece.a.iter().zip(&base.a).map(|(x, z)| x - z).collect();
                let offset = &base.b - &piece.b;
                if tight.contains(&j) {
                    argmin.add_eq(normal, offset);
                } else {
                    argmin.add_le(normal, offset);
                }
            }
            signature.extend(tight.iter().map(|&j| (y, j)));
        }
        Ok(ExpectedMinimum { risk, argmin: argmin.simplified(), signature, point: u_opt })
    }

    /// `min_u ⟨p, L(u)⟩`, computed through the dual program
    /// `max Σ λ_yj b_yj` s.t. `Σ_j λ_yj = p_y`, `Σ λ_yj a_yj = 0`, `λ >= 0`.
    pub fn bayes_risk(&self, p: &[Rational]) -> Result<Rational> {
        check_distribution(p, self.n_outcomes())?;
        let supp = support(p);
        let mut cols: Vec<(usize, &AffinePiece)> = Vec::new();
        for (k, &y) in supp.iter().enumerate() {
            for piece in &self.pieces[y] {
                cols.push((k, piece));
            }
        }
        let n = cols.len();
        let obj: Vector = cols.iter().map(|(_, pc)| pc.b.clone()).collect();
        let mut lp = LinearProgram::new(n).maximize(obj);
        for j in 0..n {
            lp.set_nonneg(j);
        }
        for (k, &y) in supp.iter().enumerate() {
            let row: Vector =
                cols.iter().map(|(kk, _)| if *kk == k { Rational::one() } else { Rational::zero() }).collect();
            lp.add(row, Relation::Eq, p[y].clone());
        }
        for i in 0..self.dim {
            let row: Vector = cols.iter().map(|(_, pc)| pc.a[i].clone()).collect();
            if row.iter().all(Rational::is_zero) {
                continue;
            }
            lp.add(row, Relation::Eq, Rational::zero());
        }
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Ok(value),
            _ => Err(Error::UnboundedProgram("expected loss is unbounded below".into())),
        }
    }

    /// Distinct optimal sets `Γ(p)` over every grid distribution of
    /// resolution `m`, keyed by signature.
    pub fn enumerate_optimal_sets(&self, m: u32) -> Result<OptimalSetFamily> {
        if m == 0 {
            return Err(Error::Invalid("grid resolution must be positive".into()));
        }
        let mut seen: BTreeSet<Signature> = BTreeSet::new();
        let mut members: Vec<OptimalSet> = Vec::new();
        for p in simplex_grid(self.n_outcomes(), m) {
            let min = self.minimize_expected(&p)?;
            if !seen.insert(min.signature.clone()) {
                continue;
            }
            // Different supports can produce the same set under different signatures.
            if members.iter().any(|o| same_optimal_set(o, &min.argmin, &min.point)) {
                continue;
            }
            members.push(OptimalSet { argmin: min.argmin, signature: min.signature, witness: p, point: min.point });
        }
        Ok(OptimalSetFamily { members, grid_m: m })
    }

    /// Signatures of sets that appear at resolution `2m` but not at `m`. An empty
    /// result is the completeness certificate for the family at `m`.
    pub fn family_refinement_gap(&self, m: u32) -> Result<Vec<Signature>> {
        let coarse = self.enumerate_optimal_sets(m)?;
        let fine = self.enumerate_optimal_sets(2 * m)?;
        Ok(fine
            .members
            .into_iter()
            .filter(|f| !coarse.members.iter().any(|c| same_optimal_set(c, &f.argmin, &f.point)))
            .map(|f| f.signature)
            .collect())
    }

    /// Affine pieces of `⟨p, L(·)⟩` attaining the maximum at `u`, after
    /// merging pieces that coincide as functions.
    fn weighted_active(&self, p: &[Rational], u: &[Rational]) -> BTreeSet<(Vector, Rational)> {
        let mut acc: BTreeSet<(Vector, Rational)> = BTreeSet::new();
        acc.insert((vec![Rational::zero(); self.dim], Rational::zero()));
        for y in 0..self.n_outcomes() {
            if p[y].is_zero() {
                continue;
            }
            let act = self.active_pieces(y, u);
            let mut next = BTreeSet::new();
            for (a, b) in &acc {
                for &j in &act {
                    let pc = &self.pieces[y][j];
                    let a2: Vector = a.iter().zip(&pc.a).map(|(x, z)| x + &p[y] * z).collect();
                    next.insert((a2, b + &p[y] * &pc.b));
                }
            }
            acc = next;
        }
        acc
    }

    /// Whether `⟨p, L⟩` and `⟨p', L⟩` induce the same cell partition of the
    /// grid (cells are labeled by their sets of active affine pieces).
    pub fn check_diagram_invariance(&self, p: &[Rational], p2: &[Rational], grid: &BoxGrid) -> Result<bool> {
        for q in [p, p2] {
            check_distribution(q, self.n_outcomes())?;
            if !q.iter().all(Rational::is_positive) {
                return Err(Error::Invalid("diagram invariance needs distributions in the open simplex".into()));
            }
        }
        if grid.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: grid.dim() });
        }
        let labels = |q: &[Rational]| {
            let mut ids: HashMap<BTreeSet<(Vector, Rational)>, usize> = HashMap::new();
            grid.points()
                .iter()
                .map(|u| {
                    let key = self.weighted_active(q, u);
                    let next = ids.len();
                    *ids.entry(key).or_insert(next)
                })
                .collect::<Vec<usize>>()
        };
        Ok(labels(p) == labels(p2))
    }
}

fn same_optimal_set(member: &OptimalSet, argmin: &Polyhedron, point: &[Rational]) -> bool {
    member.argmin.contains(point) && argmin.contains(&member.point) && member.argmin.same_set(argmin)
}
