//! Links from surrogate reports to discrete reports: the epsilon-thickened
//! construction, epsilon validation and calibration audits.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;

use crate::discrete::{check_distribution, simplex_grid, DiscreteLoss};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::geometry::{
    dot, format_vector, point_set_distance, sets_intersect, thickening_radius, BoxGrid, Norm, Polyhedron, Vector,
};
use crate::polyhedral::{OptimalSetFamily, PolyhedralLoss};
use crate::rational::Rational;

/// Maps a surrogate report `u` to the index of a discrete report.
pub trait Link {
    fn link(&self, u: &[Rational]) -> Result<usize>;
}

impl<F: Fn(&[Rational]) -> Result<usize>> Link for F {
    fn link(&self, u: &[Rational]) -> Result<usize> {
        self(u)
    }
}

/// `R_U = {r : φ(r) ∈ U}` for every member `U`; errors if some `R_U` is empty.
pub fn report_sets(family: &[&Polyhedron], embedding: &Embedding) -> Result<Vec<BTreeSet<usize>>> {
    family
        .iter()
        .map(|set| {
            let rs: BTreeSet<usize> =
                (0..embedding.points.len()).filter(|&r| set.contains(&embedding.points[r])).collect();
            if rs.is_empty() {
                Err(Error::Invalid(format!("optimal set {set} contains no embedded report")))
            } else {
                Ok(rs)
            }
        })
        .collect()
}

/// A subfamily with empty intersection and the radius at which its closed
/// thickenings start to meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubfamilyCheck {
    pub members: Vec<usize>,
    pub radius: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonCertificate {
    pub epsilon: Rational,
    pub norm: Norm,
    /// All minimal subfamilies (of size at most `d + 1`) with empty intersection.
    pub checks: Vec<SubfamilyCheck>,
    /// Smallest radius among `checks`; `None` when every subfamily intersects.
    pub critical_radius: Option<Rational>,
}

/// Minimal subfamilies with empty intersection and their thickening radii.
///
/// By Helly's theorem a family of convex sets in `R^d` with empty
/// intersection has an empty subfamily of size at most `d + 1`, and the
/// thickening radius can only grow when sets are added, so these checks
/// decide validity of every epsilon exactly.
pub fn disjoint_subfamilies(family: &[&Polyhedron], norm: Norm) -> Result<Vec<SubfamilyCheck>> {
    let Some(first) = family.first() else { return Ok(Vec::new()) };
    let d = first.dim;
    let max_size = (d + 1).min(family.len());
    let mut dominated: HashSet<Vec<usize>> = HashSet::new();
    let mut checks = Vec::new();
    for size in 2..=max_size {
        for combo in (0..family.len()).combinations(size) {
            let has_empty_part = size > 2
                && (0..size).any(|skip| {
                    let sub: Vec<usize> =
                        combo.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &x)| x).collect();
                    dominated.contains(&sub)
                });
            if has_empty_part {
                dominated.insert(combo);
                continue;
            }
            let sets: Vec<&Polyhedron> = combo.iter().map(|&i| family[i]).collect();
            if !sets_intersect(&sets) {
                let radius = thickening_radius(&sets, norm)?;
                checks.push(SubfamilyCheck { members: combo.clone(), radius });
                dominated.insert(combo);
            }
        }
    }
    Ok(checks)
}

/// The largest candidate `eps` such that no subfamily with empty
/// intersection has intersecting open `eps`-thickenings.
pub fn max_valid_epsilon(family: &[&Polyhedron], norm: Norm, candidates: &[Rational]) -> Result<EpsilonCertificate> {
    if candidates.iter().any(|e| !e.is_positive()) {
        return Err(Error::Invalid("epsilon candidates must be positive".into()));
    }
    let checks = disjoint_subfamilies(family, norm)?;
    let critical_radius = checks.iter().map(|c| c.radius.clone()).min();
    let valid = |e: &Rational| critical_radius.as_ref().is_none_or(|r| e <= r);
    let epsilon = candidates.iter().filter(|e| valid(e)).max().cloned().ok_or(Error::NoValidEpsilon)?;
    Ok(EpsilonCertificate { epsilon, norm, checks, critical_radius })
}

/// `Ψ(u) = ∩ {R_U : d(U, u) < ε}` with a deterministic choice from `Ψ(u)`.
#[derive(Clone, Debug)]
pub struct ThickenedLink {
    pub members: Vec<Polyhedron>,
    pub report_sets: Vec<BTreeSet<usize>>,
    pub reports: Vec<String>,
    pub norm: Norm,
    pub epsilon: Rational,
    /// Report indices in order of preference when `Ψ(u)` has several elements.
    pub preference: Vec<usize>,
    boxes: Vec<Vec<(Option<Rational>, Option<Rational>)>>,
}

impl ThickenedLink {
    /// Builds the link. Ties prefer the reports listed in `priority`, then the
    /// lexicographically smallest label.
    pub fn new(
        family: &OptimalSetFamily,
        embedding: &Embedding,
        norm: Norm,
        epsilon: Rational,
        priority: &[String],
    ) -> Result<Self> {
        Self::from_sets(family.sets().into_iter().cloned().collect(), embedding, norm, epsilon, priority)
    }

    pub fn from_sets(
        members: Vec<Polyhedron>,
        embedding: &Embedding,
        norm: Norm,
        epsilon: Rational,
        priority: &[String],
    ) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let refs: Vec<&Polyhedron> = members.iter().collect();
        let report_sets = report_sets(&refs, embedding)?;
        let mut preference = Vec::new();
        for label in priority {
            let idx = embedding
                .reports
                .iter()
                .position(|r| r == label)
                .ok_or_else(|| Error::Invalid(format!("tie-break report `{label}` is not embedded")))?;
            if !preference.contains(&idx) {
                preference.push(idx);
            }
        }
        let mut rest: Vec<usize> = (0..embedding.reports.len()).filter(|i| !preference.contains(i)).collect();
        rest.sort_by(|a, b| embedding.reports[*a].cmp(&embedding.reports[*b]));
        preference.extend(rest);
        let boxes = members.iter().map(|m| m.bounding_box().ok_or(Error::EmptySet)).collect::<Result<_>>()?;
        Ok(ThickenedLink {
            members,
            report_sets,
            reports: embedding.reports.clone(),
            norm,
            epsilon,
            preference,
            boxes,
        })
    }

    /// Whether `d(U_i, u) < ε`, using a bounding-box lower bound and a
    /// membership test before falling back to a distance program.
    pub fn is_near(&self, i: usize, u: &[Rational]) -> Result<bool> {
        let gaps = self.boxes[i].iter().zip(u).map(|((lo, hi), x)| {
            let below = lo.as_ref().map_or(Rational::zero(), |l| (l - x).positive_part());
            let above = hi.as_ref().map_or(Rational::zero(), |h| (x - h).positive_part());
            below.max(above)
        });
        let lower = match self.norm {
            Norm::L1 => gaps.sum::<Rational>(),
            Norm::LInf => gaps.fold(Rational::zero(), Rational::max),
        };
        if lower >= self.epsilon {
            return Ok(false);
        }
        if self.members[i].contains(u) {
            return Ok(true);
        }
        Ok(point_set_distance(&self.members[i], u, self.norm)? < self.epsilon)
    }

    /// The envelope `Ψ(u)` as a set of report indices.
    pub fn envelope(&self, u: &[Rational]) -> Result<BTreeSet<usize>> {
        let mut psi: BTreeSet<usize> = (0..self.reports.len()).collect();
        for i in 0..self.members.len() {
            if self.is_near(i, u)? {
                psi = psi.intersection(&self.report_sets[i]).copied().collect();
            }
        }
        if psi.is_empty() {
            return Err(Error::EmptyEnvelope(format_vector(u)));
        }
        Ok(psi)
    }

    pub fn choose(&self, psi: &BTreeSet<usize>) -> usize {
        *self.preference.iter().find(|r| psi.contains(r)).expect("nonempty envelope")
    }
}

impl Link for ThickenedLink {
    fn link(&self, u: &[Rational]) -> Result<usize> {
        let psi = self.envelope(u)?;
        Ok(self.choose(&psi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every grid report linked outside `γ(p)` has positive excess loss.
    Evidence,
    /// A grid report is optimal for `L` at `p` but links outside `γ(p)`.
    Violation,
    /// Every grid report links into `γ(p)`.
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Evidence => "evidence",
            Verdict::Violation => "violation",
            Verdict::Vacuous => "vacuous",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditEntry {
    pub p: Vector,
    pub risk: Rational,
    /// `min {⟨p, L(u)⟩ - risk : u on the grid, ψ(u) ∉ γ(p)}`.
    pub gap: Option<Rational>,
    pub witness: Option<Vector>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct CalibrationScan {
    pub entries: Vec<AuditEntry>,
}

impl CalibrationScan {
    pub fn violations(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Violation)
    }

    pub fn min_gap(&self) -> Option<Rational> {
        self.entries.iter().filter_map(|e| e.gap.clone()).min()
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Surrogate values and links precomputed on a report grid.
pub struct GridTable {
    pub points: Vec<Vector>,
    pub values: Vec<Vector>,
    pub links: Vec<usize>,
}

impl GridTable {
    pub fn new(surrogate: &PolyhedralLoss, link: &dyn Link, grid: &BoxGrid) -> Result<Self> {
        if grid.dim() != surrogate.dim {
            return Err(Error::Dimension { expected: surrogate.dim, got: grid.dim() });
        }
        let points = grid.points();
        let mut values = Vec::with_capacity(points.len());
        let mut links = Vec::with_capacity(points.len());
        for u in &points {
            values.push(surrogate.eval(u)?);
            links.push(link.link(u)?);
        }
        Ok(GridTable { points, values, links })
    }
}

fn audit_with_table(
    surrogate: &PolyhedralLoss,
    link: &dyn Link,
    loss: &DiscreteLoss,
    p: &[Rational],
    table: &GridTable,
) -> Result<AuditEntry> {
    check_distribution(p, loss.n_outcomes())?;
    let risk = surrogate.bayes_risk(p)?;
    let gamma = loss.bayes_risk_unchecked(p).optimal;
    let mut best: Option<(Rational, usize)> = None;
    for (i, (v, r)) in table.values.iter().zip(&table.links).enumerate() {
        if gamma.contains(r) {
            continue;
        }
        let excess = dot(p, v) - &risk;
        if best.as_ref().is_none_or(|(b, _)| excess < *b) {
            best = Some((excess, i));
        }
    }
    let Some((gap, i)) = best else {
        return Ok(AuditEntry { p: p.to_vec(), risk, gap: None, witness: None, verdict: Verdict::Vacuous });
    };
    let witness = table.points[i].clone();
    let verdict = if gap.is_positive() {
        Verdict::Evidence
    } else {
        // Re-derive the violation independently: the witness must lie in the
        // primal optimal face and link outside γ(p).
        let primal = surrogate.minimize_expected(p)?;
        let linked = link.link(&witness)?;
        if primal.risk != risk || !primal.argmin.contains(&witness) || gamma.contains(&linked) {
            return Err(Error::Invalid(format!(
                "violation at p = {} failed re-verification",
                format_vector(p)
            )));
        }
        Verdict::Violation
    };
    Ok(AuditEntry { p: p.to_vec(), risk, gap: Some(gap), witness: Some(witness), verdict })
}

/// Calibration audit at a single distribution over a report grid.
pub fn calibration_audit(
    surrogate: &PolyhedralLoss,
    link: &dyn Link,
    loss: &DiscreteLoss,
    p: &[Rational],
    grid: &BoxGrid,
) -> Result<AuditEntry> {
    let table = GridTable::new(surrogate, link, grid)?;
    audit_with_table(surrogate, link, loss, p, &table)
}

/// Audits every distribution of the simplex grid of resolution `m`.
pub fn calibration_scan(
    surrogate: &PolyhedralLoss,
    link: &dyn Link,
    loss: &DiscreteLoss,
    m: u32,
    grid: &BoxGrid,
) -> Result<CalibrationScan> {
    let table = GridTable::new(surrogate, link, grid)?;
    let entries = simplex_grid(loss.n_outcomes(), m)
        .iter()
        .map(|p| audit_with_table(surrogate, link, loss, p, &table))
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibrationScan { entries })
}

/// Slope estimate `ĉ = min (⟨p, L(u)⟩ - risk(p)) / d(Γ(p), u)` over samples off `Γ(p)`.
#[derive(Clone, Debug)]
pub struct SlopeEstimate {
    pub slope: Option<Rational>,
    /// `(u, excess, distance)` for every sample.
    pub samples: Vec<(Vector, Rational, Rational)>,
}

pub fn separation_slope(
    surrogate: &PolyhedralLoss,
    p: &[Rational],
    samples: &[Vector],
    norm: Norm,
) -> Result<SlopeEstimate> {
    let min = surrogate.minimize_expected(p)?;
    let mut slope: Option<Rational> = None;
    let mut rows = Vec::with_capacity(samples.len());
    for u in samples {
        let excess = surrogate.expected(p, u)? - &min.risk;
        let dist = point_set_distance(&min.argmin, u, norm)?;
        if dist.is_positive() {
            let ratio = &excess / &dist;
            slope = Some(match slope {
                Some(s) => s.min(ratio),
                None => ratio,
            });
        }
        rows.push((u.clone(), excess, dist));
    }
    Ok(SlopeEstimate { slope, samples: rows })
}

/// A bounding grid for links on `embedding`: the box of embedded points
/// widened by `margin` on every side.
pub fn embedding_box(embedding: &Embedding, margin: &Rational, step: Rational) -> BoxGrid {
    let d = embedding.dim();
    let mut lo = vec![Rational::zero(); d];
    let mut hi = vec![Rational::zero(); d];
    for i in 0..d {
        lo[i] = embedding.points.iter().map(|x| x[i].clone()).min().unwrap_or_default() - margin;
        hi[i] = embedding.points.iter().map(|x| x[i].clone()).max().unwrap_or_default() + margin;
    }
    BoxGrid::new(lo, hi, step)
}
