//! Embeddings of discrete losses by polyhedral surrogates: construction,
//! verification and extraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::discrete::{simplex_grid, DiscreteLoss};
use crate::error::{Error, Result};
use crate::geometry::{format_vector, Polyhedron, Vector};
use crate::polyhedral::{AffinePiece, OptimalSetFamily, PolyhedralLoss};
use crate::rational::Rational;

/// Report → point in `R^d`, aligned with a discrete loss's report list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub reports: Vec<String>,
    pub points: Vec<Vector>,
}

impl Embedding {
    pub fn new(reports: Vec<String>, points: Vec<Vector>) -> Result<Self> {
        if reports.len() != points.len() {
            return Err(Error::Dimension { expected: reports.len(), got: points.len() });
        }
        if let Some(d) = points.first().map(Vec::len) {
            if let Some(bad) = points.iter().find(|p| p.len() != d) {
                return Err(Error::Dimension { expected: d, got: bad.len() });
            }
        }
        Ok(Embedding { reports, points })
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn point(&self, report: &str) -> Option<&Vector> {
        self.reports.iter().position(|r| r == report).map(|i| &self.points[i])
    }

    pub fn is_injective(&self) -> bool {
        let distinct: BTreeSet<&Vector> = self.points.iter().collect();
        distinct.len() == self.points.len()
    }

    /// Re-indexes the embedding to follow `loss.reports`.
    pub fn aligned_with(&self, loss: &DiscreteLoss) -> Result<Embedding> {
        let points = loss
            .reports
            .iter()
            .map(|r| {
                self.point(r)
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("embedding has no point for report `{r}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Embedding::new(loss.reports.clone(), points)
    }

    pub fn to_map(&self) -> BTreeMap<String, Vector> {
        self.reports.iter().cloned().zip(self.points.iter().cloned()).collect()
    }

    pub fn from_map(map: &BTreeMap<String, Vector>) -> Result<Self> {
        Embedding::new(map.keys().cloned().collect(), map.values().cloned().collect())
    }
}

/// The conjugate construction `L(u)_y = C(u) - u_y` with
/// `C(u) = max_r max_{q ∈ vert(γ_r)} ⟨q, u⟩ + ⟨q, ℓ(r)⟩`, which embeds a
/// non-redundant `ℓ` via `φ(r) = -ℓ(r)`.
pub fn conjugate_surrogate(loss: &DiscreteLoss) -> Result<(PolyhedralLoss, Embedding)> {
    loss.validate()?;
    loss.check_non_redundant()?;
    let n = loss.n_outcomes();
    let mut conj: BTreeSet<AffinePiece> = BTreeSet::new();
    for (r, row) in loss.matrix.iter().enumerate() {
        for q in loss.level_set(r).vertices()? {
            let b = crate::geometry::dot(&q, row);
            conj.insert(AffinePiece::new(q, b));
        }
    }
    let pieces: Vec<Vec<AffinePiece>> = (0..n)
        .map(|y| {
            conj.iter()
                .map(|pc| {
                    let mut a = pc.a.clone();
                    a[y] -= Rational::one();
                    AffinePiece::new(a, pc.b.clone())
                })
                .collect()
        })
        .collect();
    let surrogate = PolyhedralLoss::new(n, loss.outcomes.clone(), pieces)?;
    let points = loss.matrix.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
    Ok((surrogate, Embedding::new(loss.reports.clone(), points)?))
}

/// Outcome of checking that `(L, φ)` embeds `ℓ` on a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingCheck {
    /// Per report: `L(φ(r)) == ℓ(r)`.
    pub loss_match: Vec<bool>,
    /// Grid distributions where `r ∈ γ(p)` and `φ(r) ∈ Γ(p)` disagree.
    pub property_mismatches: Vec<(Vector, String)>,
    /// `max_p |risk_L(p) - risk_ℓ(p)|` over the grid.
    pub bayes_gap: Rational,
}

impl EmbeddingCheck {
    pub fn verified(&self) -> bool {
        self.loss_match.iter().all(|&b| b) && self.property_mismatches.is_empty() && self.bayes_gap.is_zero()
    }
}

pub fn verify_embedding(
    surrogate: &PolyhedralLoss,
    loss: &DiscreteLoss,
    embedding: &Embedding,
    m: u32,
) -> Result<EmbeddingCheck> {
    let emb = embedding.aligned_with(loss)?;
    if !emb.is_injective() {
        return Err(Error::Invalid("embedding is not injective".into()));
    }
    if surrogate.outcomes.len() != loss.n_outcomes() {
        return Err(Error::Dimension { expected: loss.n_outcomes(), got: surrogate.outcomes.len() });
    }
    let mut loss_match = Vec::new();
    let mut images = Vec::new();
    for (r, u) in emb.points.iter().enumerate() {
        let v = surrogate.eval(u)?;
        loss_match.push(v == loss.matrix[r]);
        images.push(v);
    }
    let mut property_mismatches = Vec::new();
    let mut bayes_gap = Rational::zero();
    for p in simplex_grid(loss.n_outcomes(), m) {
        let discrete = loss.bayes_risk_unchecked(&p);
        let risk = surrogate.bayes_risk(&p)?;
        bayes_gap = bayes_gap.max((&risk - &discrete.risk).abs());
        for (r, v) in images.iter().enumerate() {
            let in_gamma = discrete.optimal.contains(&r);
            let in_argmin = crate::geometry::dot(&p, v) == risk;
            if in_gamma != in_argmin {
                property_mismatches.push((p.clone(), loss.reports[r].clone()));
            }
        }
    }
    Ok(EmbeddingCheck { loss_match, property_mismatches, bayes_gap })
}

/// `max_p |risk_L(p) - risk_ℓ(p)|` over the grid of resolution `m`.
pub fn bayes_risk_gap(surrogate: &PolyhedralLoss, loss: &DiscreteLoss, m: u32) -> Result<Rational> {
    if surrogate.outcomes.len() != loss.n_outcomes() {
        return Err(Error::Dimension { expected: loss.n_outcomes(), got: surrogate.outcomes.len() });
    }
    let mut gap = Rational::zero();
    for p in simplex_grid(loss.n_outcomes(), m) {
        let a = surrogate.bayes_risk(&p)?;
        let b = loss.bayes_risk_unchecked(&p).risk;
        gap = gap.max((a - b).abs());
    }
    Ok(gap)
}

/// A discrete loss recovered from a surrogate, with its embedding.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub loss: DiscreteLoss,
    pub embedding: Embedding,
    pub family: OptimalSetFamily,
}

/// Upper bound on square systems solved per member when collecting vertices.
const VERTEX_BUDGET: u128 = 20_000;

/// Recovers the discrete loss embedded by `L`: every optimal set contributes
/// candidate reports (its vertices and solver point), and candidates whose
/// loss vectors are never uniquely optimal are discarded.
pub fn extract_embedded_loss(surrogate: &PolyhedralLoss, m: u32) -> Result<Extraction> {
    let family = surrogate.enumerate_optimal_sets(m)?;
    // Loss vector → (best vertex, first solver point).
    let mut chosen: BTreeMap<Vector, (Option<Vector>, Vector)> = BTreeMap::new();
    let mut order: Vec<Vector> = Vec::new();
    for member in &family.members {
        let vertices =
            if member.argmin.basis_count() <= VERTEX_BUDGET { member.argmin.basic_points() } else { Vec::new() };
        for u in vertices.iter().chain(std::iter::once(&member.point)) {
            let is_vertex = vertices.contains(u);
            let v = surrogate.eval(u)?;
            let entry = chosen.entry(v.clone()).or_insert_with(|| {
                order.push(v.clone());
                (None, u.clone())
            });
            if is_vertex && entry.0.as_ref().is_none_or(|w| u < w) {
                entry.0 = Some(u.clone());
            }
        }
    }
    let candidates = DiscreteLoss {
        outcomes: surrogate.outcomes.clone(),
        reports: (0..order.len()).map(|i| i.to_string()).collect(),
        matrix: order.clone(),
    };
    let witnesses = candidates.uniqueness_witnesses();
    let mut kept: Vec<(Vector, Vector)> = Vec::new();
    for (v, w) in order.iter().zip(&witnesses) {
        if w.is_some() {
            let (vertex, point) = &chosen[v];
            kept.push((vertex.clone().unwrap_or_else(|| point.clone()), v.clone()));
        }
    }
    kept.sort();
    let reports: Vec<String> = kept.iter().map(|(u, _)| format_vector(u)).collect();
    let loss = DiscreteLoss::new(surrogate.outcomes.clone(), reports.clone(), kept.iter().map(|(_, v)| v.clone()).collect())?;
    let embedding = Embedding::new(reports, kept.into_iter().map(|(u, _)| u).collect())?;
    Ok(Extraction { loss, embedding, family })
}

/// Extraction at resolution `m`, certified by agreement with resolution `2m`.
pub fn extract_certified(surrogate: &PolyhedralLoss, m: u32) -> Result<Extraction> {
    let coarse = extract_embedded_loss(surrogate, m)?;
    let fine = extract_embedded_loss(surrogate, 2 * m)?;
    let a: BTreeSet<&Vector> = coarse.loss.matrix.iter().collect();
    let b: BTreeSet<&Vector> = fine.loss.matrix.iter().collect();
    if a != b {
        return Err(Error::GridTooCoarse(format!(
            "resolution {m} recovers {} reports but {} recovers {}",
            a.len(),
            2 * m,
            b.len()
        )));
    }
    Ok(coarse)
}

/// `Γ_u = {p ∈ Δ : ⟨p, L(u)⟩ <= risk(p)}`, where `risk` is the Bayes risk of
/// the embedded loss `ℓ̂` (equal to that of `L`).
pub fn surrogate_level_set(surrogate: &PolyhedralLoss, u: &[Rational], embedded: &DiscreteLoss) -> Result<Polyhedron> {
    let v = surrogate.eval(u)?;
    let mut cell = Polyhedron::simplex(embedded.n_outcomes());
    for row in &embedded.matrix {
        let normal: Vector = v.iter().zip(row).map(|(a, b)| a - b).collect();
        cell.add_le(normal, Rational::zero());
    }
    Ok(cell.simplified())
}

/// Removes every cell strictly contained in another cell; among identical
/// cells only the first is kept.
pub fn trim_property(cells: &[(String, Polyhedron)]) -> Vec<(String, Polyhedron)> {
    let n = cells.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[j] {
                continue;
            }
            if cells[i].1.is_subset_of(&cells[j].1) {
                let equal = cells[j].1.is_subset_of(&cells[i].1);
                if !equal || j < i {
                    keep[i] = false;
                    break;
                }
            }
        }
    }
    cells.iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c.clone()).collect()
}
