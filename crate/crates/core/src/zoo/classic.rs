use crate::discrete::DiscreteLoss;
use crate::embedding::Embedding;
use crate::error::Result;
use crate::polyhedral::{AffinePiece, PolyhedralLoss};
use crate::rational::{qi, Rational};

/// Class labels `"1".."n"`, or `"+1", "-1"` in the binary case.
pub fn class_labels(n: usize) -> Vec<String> {
    if n == 2 {
        vec!["+1".into(), "-1".into()]
    } else {
        (1..=n).map(|i| i.to_string()).collect()
    }
}

/// `ℓ(r, y) = 1[r ≠ y]`.
pub fn zero_one(n: usize) -> DiscreteLoss {
    let labels = class_labels(n);
    let matrix = (0..n)
        .map(|r| (0..n).map(|y| if r == y { Rational::zero() } else { Rational::one() }).collect())
        .collect();
    DiscreteLoss { outcomes: labels.clone(), reports: labels, matrix }
}

/// Hinge loss `(1 - u y)_+` on outcomes `(+1, -1)`.
pub fn hinge() -> PolyhedralLoss {
    PolyhedralLoss {
        dim: 1,
        outcomes: class_labels(2),
        pieces: vec![
            vec![AffinePiece::new(vec![qi(-1)], qi(1)), AffinePiece::constant(1, qi(0))],
            vec![AffinePiece::new(vec![qi(1)], qi(1)), AffinePiece::constant(1, qi(0))],
        ],
    }
}

/// `+1 ↦ 1`, `-1 ↦ -1`.
pub fn hinge_embedding() -> Embedding {
    Embedding { reports: class_labels(2), points: vec![vec![qi(1)], vec![qi(-1)]] }
}

/// Sign link for the hinge: `u >= 0 ↦ +1`.
pub fn hinge_link(u: &[Rational]) -> Result<usize> {
    Ok(if u[0].is_negative() { 1 } else { 0 })
}

/// Twice the 0-1 loss, embedded by the hinge.
pub fn twice_zero_one(n: usize) -> DiscreteLoss {
    let mut l = zero_one(n);
    for row in &mut l.matrix {
        for x in row.iter_mut() {
            *x = &*x * qi(2);
        }
    }
    l
}
