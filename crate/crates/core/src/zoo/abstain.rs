//! Classification with an abstain option and its binary-encoded surrogate.

use crate::discrete::DiscreteLoss;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::geometry::{Norm, Vector};
use crate::link::Link;
use crate::polyhedral::{AffinePiece, PolyhedralLoss};
use crate::rational::{q, Rational};

pub const ABSTAIN: &str = "⊥";

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// `ℓ(y', y) = 1[y' ≠ y]` for labels and `ℓ(⊥, y) = α`.
pub fn abstain_loss(n: usize, alpha: Rational) -> Result<DiscreteLoss> {
    if n < 2 {
        return Err(Error::Invalid("abstain loss needs at least two labels".into()));
    }
    let mut reports = labels(n);
    reports.push(ABSTAIN.into());
    let mut matrix: Vec<Vector> = (0..n)
        .map(|r| (0..n).map(|y| if r == y { Rational::zero() } else { Rational::one() }).collect())
        .collect();
    matrix.push(vec![alpha; n]);
    DiscreteLoss::new(labels(n), reports, matrix)
}

/// Number of bits `⌈log2 n⌉` used by the surrogate.
pub fn code_length(n: usize) -> usize {
    let mut d = 0;
    while (1usize << d) < n {
        d += 1;
    }
    d.max(1)
}

/// `B(y) ∈ {-1, 1}^d`: the binary digits of the label index (most significant
/// first) with 0 mapped to -1.
pub fn binary_code(n: usize, y: usize) -> Vec<i64> {
    let d = code_length(n);
    (0..d).map(|j| if (y >> (d - 1 - j)) & 1 == 1 { 1 } else { -1 }).collect()
}

/// `L(u)_y = max(max_j (B(y)_j u_j + 1), 0)`.
pub fn abstain_surrogate(n: usize) -> Result<PolyhedralLoss> {
    if n < 2 {
        return Err(Error::Invalid("abstain surrogate needs at least two labels".into()));
    }
    let d = code_length(n);
    let pieces = (0..n)
        .map(|y| {
            let code = binary_code(n, y);
            let mut ps: Vec<AffinePiece> = (0..d)
                .map(|j| {
                    let mut a = vec![Rational::zero(); d];
                    a[j] = Rational::from_integer(code[j]);
                    AffinePiece::new(a, Rational::one())
                })
                .collect();
            ps.push(AffinePiece::constant(d, Rational::zero()));
            ps
        })
        .collect();
    PolyhedralLoss::new(d, labels(n), pieces)
}

/// `φ(y) = -B(y)`, `φ(⊥) = 0`, aligned with [`abstain_loss`] reports.
pub fn abstain_embedding(n: usize) -> Embedding {
    let d = code_length(n);
    let mut reports = labels(n);
    reports.push(ABSTAIN.into());
    let mut points: Vec<Vector> =
        (0..n).map(|y| binary_code(n, y).iter().map(|&b| Rational::from_integer(-b)).collect()).collect();
    points.push(vec![Rational::zero(); d]);
    Embedding { reports, points }
}

/// Closed-form links: abstain when `min_i |u_i| <= 1/2` (l-infinity) or
/// `‖u‖_1 <= 1` (l1), otherwise the label whose code is `sgn(-u)`, with
/// `sgn(0) = +1`.
#[derive(Clone, Copy, Debug)]
pub struct AbstainLink {
    pub n: usize,
    pub norm: Norm,
}

impl AbstainLink {
    pub fn new(n: usize, norm: Norm) -> Self {
        AbstainLink { n, norm }
    }

    pub fn abstains(&self, u: &[Rational]) -> bool {
        match self.norm {
            Norm::LInf => u.iter().any(|x| x.abs() <= q(1, 2)),
            Norm::L1 => Norm::L1.of(u) <= Rational::one(),
        }
    }
}

impl Link for AbstainLink {
    fn link(&self, u: &[Rational]) -> Result<usize> {
        let d = code_length(self.n);
        if u.len() != d {
            return Err(Error::Dimension { expected: d, got: u.len() });
        }
        if self.abstains(u) {
            return Ok(self.n);
        }
        let y = u.iter().fold(0usize, |acc, x| (acc << 1) | usize::from(!x.is_positive()));
        Ok(if y < self.n { y } else { self.n })
    }
}
