use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lp::{LinearProgram, LpOutcome, Relation};
use super::polyhedron::Polyhedron;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "linf")]
    LInf,
}

impl Norm {
    pub fn of(&self, v: &[Rational]) -> Rational {
        match self {
            Norm::L1 => v.iter().map(Rational::abs).sum(),
            Norm::LInf => v.iter().map(Rational::abs).fold(Rational::zero(), Rational::max),
        }
    }

    pub fn between(&self, a: &[Rational], b: &[Rational]) -> Rational {
        let diff: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.of(&diff)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::LInf => "linf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "L1" => Ok(Norm::L1),
            "linf" | "Linf" | "LInf" | "inf" => Ok(Norm::LInf),
            _ => Err(Error::Parse(format!("unknown norm `{s}` (expected l1 or linf)"))),
        }
    }
}

/// Appends `‖x - u‖ <= t` to `lp`, where `x` occupies `x_off..x_off+d`, `u`
/// occupies `u_off..` (or is the constant `u_const`), and `t` is variable `t_var`.
/// For l1 the auxiliary variables start at `aux_off` and must be nonnegative.
fn norm_ball_constraints(
    lp: &mut LinearProgram,
    norm: Norm,
    d: usize,
    x_off: usize,
    u: Either<'_>,
    t_var: usize,
    aux_off: usize,
) {
    let one = Rational::one();
    let neg = -Rational::one();
    for i in 0..d {
        // x_i - u_i <= w_i  and  u_i - x_i <= w_i, with w_i = t (linf) or s_i (l1).
        let w = match norm {
            Norm::LInf => t_var,
            Norm::L1 => aux_off + i,
        };
        let (mut up, mut down) = (vec![(x_off + i, one.clone()), (w, neg.clone())], vec![(x_off + i, neg.clone()), (w, neg.clone())]);
        let (rhs_up, rhs_down) = match u {
            Either::Var(u_off) => {
                up.push((u_off + i, neg.clone()));
                down.push((u_off + i, one.clone()));
                (Rational::zero(), Rational::zero())
            }
            Either::Const(c) => (c[i].clone(), -&c[i]),
        };
        lp.add_sparse(&up, Relation::Le, rhs_up);
        lp.add_sparse(&down, Relation::Le, rhs_down);
    }
    if norm == Norm::L1 {
        let mut terms: Vec<(usize, Rational)> = (0..d).map(|i| (aux_off + i, one.clone())).collect();
        terms.push((t_var, neg));
        lp.add_sparse(&terms, Relation::Le, Rational::zero());
    }
}

#[derive(Clone, Copy)]
enum Either<'a> {
    Var(usize),
    Const(&'a [Rational]),
}

fn aux_count(norm: Norm, d: usize) -> usize {
    match norm {
        Norm::L1 => d,
        Norm::LInf => 0,
    }
}

/// `inf_{x in P} ‖x - u‖`, solved as a linear program.
pub fn point_set_distance(p: &Polyhedron, u: &[Rational], norm: Norm) -> Result<Rational> {
    if u.len() != p.dim {
        return Err(Error::Dimension { expected: p.dim, got: u.len() });
    }
    if p.contains(u) {
        return Ok(Rational::zero());
    }
    let d = p.dim;
    let aux = aux_count(norm, d);
    let n = d + 1 + aux;
    let t = d;
    let mut obj = vec![Rational::zero(); n];
    obj[t] = Rational::one();
    let mut lp = LinearProgram::new(n).minimize(obj);
    for j in d..n {
        lp.set_nonneg(j);
    }
    p.constrain(&mut lp, 0);
    norm_ball_constraints(&mut lp, norm, d, 0, Either::Const(u), t, d + 1);
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::EmptySet),
        LpOutcome::Unbounded => Err(Error::UnboundedProgram("distance".into())),
    }
}

/// Whether the polyhedra share a common point.
pub fn sets_intersect(family: &[&Polyhedron]) -> bool {
    let Some(first) = family.first() else { return true };
    let mut p = (*first).clone();
    for q in &family[1..] {
        p = p.intersect(q);
    }
    !p.is_empty()
}

/// `min_u max_j d(U_j, u)`: the smallest radius at which the closed
/// thickenings of the family share a point.
pub fn thickening_radius(family: &[&Polyhedron], norm: Norm) -> Result<Rational> {
    let Some(first) = family.first() else { return Ok(Rational::zero()) };
    let d = first.dim;
    let aux = aux_count(norm, d);
    let k = family.len();
    // Layout: u | x_1..x_k | t | aux_1..aux_k
    let t = d * (k + 1);
    let n = t + 1 + k * aux;
    let mut obj = vec![Rational::zero(); n];
    obj[t] = Rational::one();
    let mut lp = LinearProgram::new(n).minimize(obj);
    for j in t..n {
        lp.set_nonneg(j);
    }
    for (j, member) in family.iter().enumerate() {
        if member.dim != d {
            return Err(Error::Dimension { expected: d, got: member.dim });
        }
        let x_off = d * (j + 1);
        member.constrain(&mut lp, x_off);
        norm_ball_constraints(&mut lp, norm, d, x_off, Either::Var(0), t, t + 1 + j * aux);
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::EmptySet),
        LpOutcome::Unbounded => Err(Error::UnboundedProgram("thickening radius".into())),
    }
}

/// Whether the open `eps`-thickenings of every member share a point, i.e.
/// `sup_u (eps - max_j d(U_j, u)) > 0`.
pub fn thickened_family_intersects(family: &[&Polyhedron], eps: &Rational, norm: Norm) -> Result<bool> {
    if !eps.is_positive() {
        return Err(Error::Invalid(format!("epsilon must be positive, got {eps}")));
    }
    Ok(&thickening_radius(family, norm)? < eps)
}
