//! Top-k classification and its hinge-type surrogate.

use itertools::Itertools;

use crate::discrete::DiscreteLoss;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::link::Link;
use crate::polyhedral::{AffinePiece, PolyhedralLoss};
use crate::rational::Rational;

fn check(n: usize, k: usize) -> Result<()> {
    if !(2 <= k && k < n) {
        return Err(Error::Invalid(format!("top-k needs 2 <= k < n, got n = {n}, k = {k}")));
    }
    Ok(())
}

fn subset_label(s: &[usize]) -> String {
    format!("{{{}}}", s.iter().map(|i| (i + 1).to_string()).join(","))
}

/// `k`-subsets of `0..n` in lexicographic order.
pub fn top_k_reports(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k).collect()
}

/// `ℓ(r)_y = 1 - r_y` over `k`-subsets `r`.
pub fn top_k_loss(n: usize, k: usize) -> Result<DiscreteLoss> {
    check(n, k)?;
    let subsets = top_k_reports(n, k);
    let matrix = subsets
        .iter()
        .map(|s| (0..n).map(|y| if s.contains(&y) { Rational::zero() } else { Rational::one() }).collect())
        .collect();
    DiscreteLoss::new(
        (1..=n).map(|i| i.to_string()).collect(),
        subsets.iter().map(|s| subset_label(s)).collect(),
        matrix,
    )
}

/// `L(u)_y = (1 - u_y + (1/k) Σ_{i<=k} (u - e_y)_[i])_+`, written as the
/// maximum over `k`-subsets `K` of `1 - u_y + (1/k) Σ_{i∈K} (u - e_y)_i`, and 0.
pub fn top_k_surrogate(n: usize, k: usize) -> Result<PolyhedralLoss> {
    check(n, k)?;
    let inv_k = Rational::new(1, k as i64);
    let pieces = (0..n)
        .map(|y| {
            let mut ps: Vec<AffinePiece> = top_k_reports(n, k)
                .into_iter()
                .map(|set| {
                    let mut a = vec![Rational::zero(); n];
                    a[y] = -Rational::one();
                    for &i in &set {
                        a[i] += &inv_k;
                    }
                    let b = if set.contains(&y) { Rational::one() - &inv_k } else { Rational::one() };
                    AffinePiece::new(a, b)
                })
                .collect();
            ps.push(AffinePiece::constant(n, Rational::zero()));
            ps
        })
        .collect();
    PolyhedralLoss::new(n, (1..=n).map(|i| i.to_string()).collect(), pieces)
}

/// Direct evaluation of the top-k surrogate by sorting.
pub fn top_k_surrogate_direct(k: usize, u: &[Rational], y: usize) -> Rational {
    let mut shifted: Vec<Rational> = u.to_vec();
    shifted[y] -= Rational::one();
    shifted.sort_by(|a, b| b.cmp(a));
    let top: Rational = shifted.iter().take(k).sum();
    (Rational::one() - &u[y] + top / Rational::from_integer(k as i64)).positive_part()
}

/// The `k` largest coordinates, ties broken towards smaller indices.
#[derive(Clone, Copy, Debug)]
pub struct TopKLink {
    pub n: usize,
    pub k: usize,
}

impl Link for TopKLink {
    fn link(&self, u: &[Rational]) -> Result<usize> {
        if u.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: u.len() });
        }
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|a, b| u[*b].cmp(&u[*a]).then(a.cmp(b)));
        let mut chosen: Vec<usize> = idx[..self.k].to_vec();
        chosen.sort();
        Ok(top_k_reports(self.n, self.k).iter().position(|s| *s == chosen).expect("k-subset"))
    }
}

/// Permutations of `(1,0,0)`, `(1,1,0)` and `(2,1,0)`.
pub fn top2_lattice_reports() -> Vec<Vector> {
    let mut pts: Vec<Vec<i64>> = Vec::new();
    for base in [[1, 0, 0], [1, 1, 0], [2, 1, 0]] {
        for perm in base.iter().copied().permutations(3) {
            if !pts.contains(&perm) {
                pts.push(perm);
            }
        }
    }
    pts.sort();
    pts.into_iter().map(|p| p.into_iter().map(Rational::from_integer).collect()).collect()
}

/// `ℓ²(r)_y = 0` if `r_y = 2`, else `1 - r_y + ⟨r, 1 - e_y⟩ / 2`, on
/// [`top2_lattice_reports`].
pub fn embedded_top2_loss() -> DiscreteLoss {
    let reports = top2_lattice_reports();
    let half = Rational::new(1, 2);
    let matrix = reports
        .iter()
        .map(|r| {
            (0..3)
                .map(|y| {
                    if r[y] == Rational::from_integer(2) {
                        Rational::zero()
                    } else {
                        let others: Rational = (0..3).filter(|&i| i != y).map(|i| r[i].clone()).sum();
                        Rational::one() - &r[y] + &half * others
                    }
                })
                .collect()
        })
        .collect();
    DiscreteLoss {
        outcomes: (1..=3).map(|i| i.to_string()).collect(),
        reports: reports.iter().map(|r| crate::geometry::format_vector(r)).collect(),
        matrix,
    }
}
