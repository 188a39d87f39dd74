//! Exact polyhedral geometry: linear programs, halfspace polyhedra and
//! point-to-set distances under the l1 and l-infinity norms.

pub mod distance;
pub mod lp;
pub mod polyhedron;

pub use distance::{
    point_set_distance, sets_intersect, thickened_family_intersects, thickening_radius, Norm,
};
pub use lp::{LinearProgram, LpOutcome, Relation};
pub use polyhedron::{Halfspace, Polyhedron};

use crate::rational::Rational;

pub type Vector = Vec<Rational>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(c: &Rational, a: &[Rational]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn format_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Solves the square system `a x = b` exactly; `None` if singular.
pub fn solve_square(mut a: Vec<Vector>, mut b: Vector) -> Option<Vector> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            let v = &a[col][j] * &inv;
            a[col][j] = v;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                let d = &f * &a[col][j];
                a[r][j] -= d;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    Some(b)
}

/// Row-reduces `rows` (each with a trailing right-hand side) and returns an
/// independent subset spanning the same affine constraints, or `None` if the
/// system is inconsistent.
pub fn independent_rows(rows: &[Halfspace]) -> Option<Vec<Halfspace>> {
    let mut basis: Vec<(Vector, Rational, usize)> = Vec::new();
    let mut kept = Vec::new();
    for h in rows {
        let mut v = h.normal.clone();
        let mut rhs = h.offset.clone();
        for (bv, br, pivot) in &basis {
            if v[*pivot].is_zero() {
                continue;
            }
            let f = &v[*pivot] / &bv[*pivot];
            for (x, y) in v.iter_mut().zip(bv) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            rhs -= &f * br;
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(pivot) => {
                basis.push((v, rhs, pivot));
                kept.push(h.clone());
            }
            None if rhs.is_zero() => {}
            None => return None,
        }
    }
    Some(kept)
}

/// A regular grid over an axis-aligned box: `lo_i + k * step <= hi_i`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BoxGrid {
    pub lo: Vector,
    pub hi: Vector,
    pub step: Rational,
}

impl BoxGrid {
    pub fn new(lo: Vector, hi: Vector, step: Rational) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(step.is_positive(), "grid step must be positive");
        BoxGrid { lo, hi, step }
    }

    /// The cube `[-r, r]^d` with the given step.
    pub fn symmetric(d: usize, radius: Rational, step: Rational) -> Self {
        Self::new(vec![-&radius; d], vec![radius; d], step)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn axis(&self, i: usize) -> Vec<Rational> {
        let mut v = Vec::new();
        let mut x = self.lo[i].clone();
        while x <= self.hi[i] {
            v.push(x.clone());
            x += &self.step;
        }
        v
    }

    pub fn points(&self) -> Vec<Vector> {
        let axes: Vec<Vec<Rational>> = (0..self.dim()).map(|i| self.axis(i)).collect();
        let mut out: Vec<Vector> = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for x in axis {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}
