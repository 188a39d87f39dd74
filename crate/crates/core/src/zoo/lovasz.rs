//! Set functions, the Lovász extension and the Lovász hinge.
//!
//! Subsets of `N = {1..k}` are bitmasks with bit `i` standing for element
//! `i + 1`. Outcomes and reports are sign vectors: element `i` in the set
//! corresponds to coordinate `+1`.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::discrete::DiscreteLoss;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::link::Link;
use crate::polyhedral::{AffinePiece, PolyhedralLoss};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SetFunction {
    pub k: usize,
    /// `values[S]` for every bitmask `S < 2^k`.
    pub values: Vec<Rational>,
}

/// `"(+1,-1,...)"` for the sign vector of `mask`.
pub fn sign_label(k: usize, mask: usize) -> String {
    let parts: Vec<&str> = (0..k).map(|i| if mask >> i & 1 == 1 { "+1" } else { "-1" }).collect();
    format!("({})", parts.join(","))
}

/// `χ_S ∈ {-1, 1}^k`.
pub fn sign_vector(k: usize, mask: usize) -> Vector {
    (0..k).map(|i| if mask >> i & 1 == 1 { Rational::one() } else { -Rational::one() }).collect()
}

impl SetFunction {
    pub fn new(k: usize, values: Vec<Rational>) -> Result<Self> {
        if k == 0 || k > 12 {
            return Err(Error::Invalid(format!("set functions need 1 <= k <= 12, got {k}")));
        }
        if values.len() != 1 << k {
            return Err(Error::Dimension { expected: 1 << k, got: values.len() });
        }
        Ok(SetFunction { k, values })
    }

    /// The modular function `S ↦ Σ_{i∈S} w_i`.
    pub fn modular(weights: &[Rational]) -> Self {
        let k = weights.len();
        let values = (0..1usize << k)
            .map(|s| (0..k).filter(|i| s >> i & 1 == 1).map(|i| weights[i].clone()).sum())
            .collect();
        SetFunction { k, values }
    }

    pub fn full(&self) -> usize {
        (1 << self.k) - 1
    }

    pub fn value(&self, mask: usize) -> &Rational {
        &self.values[mask]
    }

    pub fn is_normalized(&self) -> bool {
        self.values[0].is_zero()
    }

    pub fn is_increasing(&self) -> bool {
        (0..1usize << self.k)
            .all(|s| (0..self.k).all(|i| s >> i & 1 == 1 || self.values[s | 1 << i] >= self.values[s]))
    }

    /// Second differences `f(S+i) - f(S) - f(S+i+j) + f(S+j)` over all
    /// `S` and distinct `i, j ∉ S`.
    fn second_differences(&self) -> impl Iterator<Item = Rational> + '_ {
        (0..1usize << self.k).flat_map(move |s| {
            (0..self.k).tuple_combinations().filter_map(move |(i, j)| {
                if s >> i & 1 == 1 || s >> j & 1 == 1 {
                    return None;
                }
                let (si, sj, sij) = (s | 1 << i, s | 1 << j, s | 1 << i | 1 << j);
                Some(&self.values[si] - &self.values[s] - &self.values[sij] + &self.values[sj])
            })
        })
    }

    pub fn is_submodular(&self) -> bool {
        self.second_differences().all(|d| !d.is_negative())
    }

    pub fn is_modular(&self) -> bool {
        self.second_differences().all(|d| d.is_zero())
    }

    /// `f̄ = 2^{-k} Σ_S f(S)`.
    pub fn mean_value(&self) -> Rational {
        let total: Rational = self.values.iter().sum();
        total / Rational::from_integer(1 << self.k)
    }

    /// The Lovász extension by sorting:
    /// `F(w) = Σ_i w_{π(i)} (f(T_i) - f(T_{i-1}))` with `w` sorted decreasingly.
    pub fn lovasz_extension(&self, w: &[Rational]) -> Result<Rational> {
        if w.len() != self.k {
            return Err(Error::Dimension { expected: self.k, got: w.len() });
        }
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by(|a, b| w[*b].cmp(&w[*a]).then(a.cmp(b)));
        let mut prev = 0usize;
        let mut total = Rational::zero();
        for &i in &order {
            let next = prev | 1 << i;
            total += &w[i] * (&self.values[next] - &self.values[prev]);
            prev = next;
        }
        Ok(total)
    }

    /// Direct evaluation `F((1 - u ⊙ χ_S)_+)`.
    pub fn hinge_value(&self, outcome: usize, u: &[Rational]) -> Result<Rational> {
        let chi = sign_vector(self.k, outcome);
        let x: Vector = u.iter().zip(&chi).map(|(ui, c)| (Rational::one() - ui * c).positive_part()).collect();
        self.lovasz_extension(&x)
    }

    fn require_hinge_preconditions(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::Precondition("set function must satisfy f(∅) = 0".into()));
        }
        if !self.is_increasing() {
            return Err(Error::Precondition("set function must be increasing".into()));
        }
        if !self.is_submodular() {
            return Err(Error::Precondition("the Lovász hinge is polyhedral only for submodular f".into()));
        }
        Ok(())
    }

    /// `ℓ^f(A)_S = f(A △ S)` over sign-vector reports and outcomes.
    pub fn set_loss(&self) -> DiscreteLoss {
        let labels: Vec<String> = (0..1usize << self.k).map(|s| sign_label(self.k, s)).collect();
        let matrix = (0..1usize << self.k)
            .map(|a| (0..1usize << self.k).map(|s| self.values[a ^ s].clone()).collect())
            .collect();
        DiscreteLoss { outcomes: labels.clone(), reports: labels, matrix }
    }

    /// The Lovász hinge `L^f(u)_S = F((1 - u ⊙ χ_S)_+)` as a max of affine pieces.
    ///
    /// For submodular increasing `f`, `F(x_+) = max_{π, A} Σ_{i∈A} s^π_i x_i`
    /// where `s^π` is the greedy vertex of the base polytope for ordering `π`.
    pub fn lovasz_hinge(&self) -> Result<PolyhedralLoss> {
        self.require_hinge_preconditions()?;
        if self.k > 5 {
            return Err(Error::Invalid("piece enumeration is limited to k <= 5".into()));
        }
        let k = self.k;
        let greedy: BTreeSet<Vector> = (0..k)
            .permutations(k)
            .map(|perm| {
                let mut s = vec![Rational::zero(); k];
                let mut prev = 0usize;
                for &i in &perm {
                    let next = prev | 1 << i;
                    s[i] = &self.values[next] - &self.values[prev];
                    prev = next;
                }
                s
            })
            .collect();
        let outcomes: Vec<String> = (0..1usize << k).map(|s| sign_label(k, s)).collect();
        let pieces = (0..1usize << k)
            .map(|outcome| {
                let chi = sign_vector(k, outcome);
                let mut ps: BTreeSet<AffinePiece> = BTreeSet::new();
                for s in &greedy {
                    for clip in 0..1usize << k {
                        // Σ_{i ∈ clip} s_i (1 - χ_i u_i)
                        let mut a = vec![Rational::zero(); k];
                        let mut b = Rational::zero();
                        for i in (0..k).filter(|i| clip >> i & 1 == 1) {
                            b += &s[i];
                            a[i] = -(&s[i] * &chi[i]);
                        }
                        ps.insert(AffinePiece::new(a, b));
                    }
                }
                ps.into_iter().collect()
            })
            .collect();
        PolyhedralLoss::new(k, outcomes, pieces)
    }

    /// The loss on `{-1, 0, 1}^k` lattice reports `(A, B)` with `A ∩ B = ∅`:
    /// `ℓ̂((A, B), S) = f(A △ S \ B) + f(A △ S ∪ B)`.
    pub fn restricted_loss(&self) -> DiscreteLoss {
        let k = self.k;
        let reports = restricted_reports(k);
        let outcomes: Vec<String> = (0..1usize << k).map(|s| sign_label(k, s)).collect();
        let matrix = reports
            .iter()
            .map(|&(a, b)| {
                (0..1usize << k)
                    .map(|s| {
                        let sym = a ^ s;
                        &self.values[sym & !b] + &self.values[sym | b]
                    })
                    .collect()
            })
            .collect();
        let labels = reports.iter().map(|&(a, b)| lattice_label(k, a, b)).collect();
        DiscreteLoss { outcomes, reports: labels, matrix }
    }

    /// A distribution at which the Lovász hinge with the sign link fails to
    /// be calibrated, for submodular, increasing, non-modular `f`.
    pub fn inconsistency_witness(&self) -> Result<InconsistencyWitness> {
        self.require_hinge_preconditions()?;
        if self.is_modular() {
            return Err(Error::Precondition("f is modular; the Lovász hinge is then consistent".into()));
        }
        if let Some(i) = (0..self.k).find(|i| !self.values[1 << i].is_positive()) {
            return Err(Error::Precondition(format!("f({{{}}}) must be positive", i + 1)));
        }
        let k = self.k;
        let n = 1usize << k;
        let mean = self.mean_value();
        let f_n = self.values[self.full()].clone();
        let two = Rational::from_integer(2);
        let epsilon = (&two * &mean - &f_n) / (Rational::from_integer(4) * &mean);
        let uniform = Rational::new(1, n as i64);
        let mut p: Vector = vec![(Rational::one() - &epsilon) * &uniform; n];
        p[0] += &epsilon;

        let target = self.set_loss();
        let target_optimal = target.bayes_risk(&p)?.optimal;
        let restricted = self.restricted_loss();
        let restricted_risk = restricted.bayes_risk(&p)?;
        let reports = restricted_reports(k);
        let full_b = reports.iter().position(|&(a, b)| a == 0 && b == self.full()).expect("(∅, N) is a report");
        let baseline = restricted.expected_loss(full_b, &p)?;
        let pure_reports_worse = reports
            .iter()
            .enumerate()
            .filter(|(_, (_, b))| *b == 0)
            .all(|(r, _)| restricted.expected_loss(r, &p).map(|v| v > baseline).unwrap_or(false));

        let hinge = self.lovasz_hinge()?;
        let surrogate_risk = hinge.bayes_risk(&p)?;
        let link = SignLink::new(k);
        let mut violations = Vec::new();
        for &r in &restricted_risk.optimal {
            let (a, b) = reports[r];
            let u = lattice_point(k, a, b);
            let optimal_for_l = hinge.expected(&p, &u)? == surrogate_risk;
            let linked = link.link(&u)?;
            if optimal_for_l && !target_optimal.contains(&linked) {
                violations.push((restricted.reports[r].clone(), target.reports[linked].clone()));
            }
        }
        let holds = target_optimal == vec![0]
            && pure_reports_worse
            && restricted_risk.risk == surrogate_risk
            && !violations.is_empty();
        Ok(InconsistencyWitness {
            p,
            epsilon,
            mean,
            target_optimal: target_optimal.iter().map(|&r| target.reports[r].clone()).collect(),
            restricted_optimal: restricted_risk.optimal.iter().map(|&r| restricted.reports[r].clone()).collect(),
            surrogate_risk,
            violations,
            holds,
        })
    }
}

/// Certificate produced by [`SetFunction::inconsistency_witness`].
#[derive(Clone, Debug)]
pub struct InconsistencyWitness {
    /// `(1 - ε) p̄ + ε δ_∅`.
    pub p: Vector,
    pub epsilon: Rational,
    pub mean: Rational,
    /// `γ(p)` for `ℓ^f`; expected to be the all-negative report alone.
    pub target_optimal: Vec<String>,
    /// Optimal lattice reports `(A, B)` of the restricted loss.
    pub restricted_optimal: Vec<String>,
    pub surrogate_risk: Rational,
    /// `(lattice report, linked report)` pairs optimal for the surrogate but
    /// linked outside `γ(p)`.
    pub violations: Vec<(String, String)>,
    pub holds: bool,
}

/// Disjoint pairs `(A, B)` in lexicographic order of bitmasks.
pub fn restricted_reports(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..1usize << k {
        for b in 0..1usize << k {
            if a & b == 0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// `u_i = 0` for `i ∈ B`, `+1` for `i ∈ A`, `-1` otherwise.
pub fn lattice_point(k: usize, a: usize, b: usize) -> Vector {
    (0..k)
        .map(|i| {
            if b >> i & 1 == 1 {
                Rational::zero()
            } else if a >> i & 1 == 1 {
                Rational::one()
            } else {
                -Rational::one()
            }
        })
        .collect()
}

pub fn lattice_label(k: usize, a: usize, b: usize) -> String {
    let parts: Vec<&str> = (0..k)
        .map(|i| if b >> i & 1 == 1 { "0" } else if a >> i & 1 == 1 { "+1" } else { "-1" })
        .collect();
    format!("({})", parts.join(","))
}

/// All points of `{-1, 0, 1}^k`.
pub fn lattice_points(k: usize) -> Vec<Vector> {
    restricted_reports(k).into_iter().map(|(a, b)| lattice_point(k, a, b)).collect()
}

/// `u ↦ {i : u_i >= 0}` (ties to `+1` by default) as a report bitmask.
#[derive(Clone, Copy, Debug)]
pub struct SignLink {
    pub k: usize,
    pub zero_positive: bool,
}

impl SignLink {
    pub fn new(k: usize) -> Self {
        SignLink { k, zero_positive: true }
    }
}

impl Link for SignLink {
    fn link(&self, u: &[Rational]) -> Result<usize> {
        if u.len() != self.k {
            return Err(Error::Dimension { expected: self.k, got: u.len() });
        }
        Ok((0..self.k)
            .filter(|&i| u[i].is_positive() || (u[i].is_zero() && self.zero_positive))
            .fold(0, |m, i| m | 1 << i))
    }
}

/// Weighted Hamming loss `ℓ(A)_S = |A △ S|`.
pub fn hamming(k: usize) -> DiscreteLoss {
    SetFunction::modular(&vec![Rational::one(); k]).set_loss()
}
