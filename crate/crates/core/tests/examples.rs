mod common;

use std::collections::BTreeSet;

use forge_core::discrete::{refinement_check, simplex_grid, DiscreteLoss, Refinement};
use forge_core::embedding::{
    bayes_risk_gap, conjugate_surrogate, extract_embedded_loss, trim_property, verify_embedding, Embedding,
};
use forge_core::geometry::{
    point_set_distance, sets_intersect, thickened_family_intersects, BoxGrid, LinearProgram, LpOutcome, Norm,
    Polyhedron, Relation, Vector,
};
use forge_core::link::{
    calibration_audit, calibration_scan, max_valid_epsilon, report_sets, separation_slope, Link, ThickenedLink,
    Verdict,
};
use forge_core::polyhedral::{AffinePiece, PolyhedralLoss};
use forge_core::zoo::abstain::{
    abstain_embedding, abstain_loss, abstain_surrogate, binary_code, AbstainLink, ABSTAIN,
};
use forge_core::zoo::classic::{hinge, hinge_embedding, hinge_link, twice_zero_one, zero_one};
use forge_core::zoo::lovasz::{restricted_reports, sign_vector, SetFunction, SignLink};
use forge_core::zoo::topk::{
    embedded_top2_loss, top2_lattice_reports, top_k_loss, top_k_reports, top_k_surrogate, top_k_surrogate_direct,
    TopKLink,
};
use forge_core::{q, qi, qs, Rational};

fn v(xs: &[&str]) -> Vector {
    xs.iter().map(|s| qs(s)).collect()
}

fn vi(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| qi(x)).collect()
}

fn set_fn(k: usize, values: &[Rational]) -> SetFunction {
    SetFunction::new(k, values.to_vec()).unwrap()
}

fn abstain_label(code: &[i64]) -> String {
    let y = (0..4).find(|&y| binary_code(4, y) == code).unwrap();
    (y + 1).to_string()
}

/// `min_y p_y` style oracle: brute-force minimum of a 1-D function over a grid.
fn grid_min(f: impl Fn(&Rational) -> Rational, lo: i64, hi: i64, den: i64) -> Rational {
    (lo * den..=hi * den).map(|k| f(&Rational::new(k, den))).min().unwrap()
}

// Discrete losses.

#[test]
fn expected_loss_of_zero_one_report() {
    // Outcomes are ordered (+1, -1); p(-1) = 0.3.
    let l = zero_one(2);
    let r = l.report_index("+1").unwrap();
    assert_eq!(l.expected_loss(r, &v(&["0.7", "0.3"])).unwrap(), qs("0.3"));
}

#[test]
fn expected_loss_at_point_mass_is_the_entry() {
    let l = abstain_loss(3, q(1, 3)).unwrap();
    for y in 0..3 {
        let mut p = vec![qi(0); 3];
        p[y] = qi(1);
        for r in 0..l.n_reports() {
            assert_eq!(l.expected_loss(r, &p).unwrap(), l.matrix[r][y]);
        }
    }
}

#[test]
fn abstaining_costs_alpha_everywhere() {
    let l = abstain_loss(3, q(1, 2)).unwrap();
    let r = l.report_index(ABSTAIN).unwrap();
    for p in simplex_grid(3, 5) {
        assert_eq!(l.expected_loss(r, &p).unwrap(), q(1, 2));
    }
}

#[test]
fn bayes_risk_examples() {
    let l = zero_one(2);
    let br = l.bayes_risk(&v(&["1/2", "1/2"])).unwrap();
    assert_eq!(br.risk, q(1, 2));
    assert_eq!(br.optimal, vec![0, 1]);

    let l = zero_one(3);
    let br = l.bayes_risk(&v(&["0.5", "0.3", "0.2"])).unwrap();
    assert_eq!(br.risk, q(1, 2));
    assert_eq!(br.optimal, vec![l.report_index("1").unwrap()]);

    let l = abstain_loss(3, q(1, 2)).unwrap();
    let p = v(&["1/3", "1/3", "1/3"]);
    let br = l.bayes_risk(&p).unwrap();
    let values: Vec<Rational> = (0..4).map(|r| l.expected_loss(r, &p).unwrap()).collect();
    assert_eq!(values, vec![q(2, 3), q(2, 3), q(2, 3), q(1, 2)]);
    assert_eq!(br.risk, q(1, 2));
    assert_eq!(br.optimal, vec![l.report_index(ABSTAIN).unwrap()]);
}

#[test]
fn level_set_examples() {
    let l = zero_one(2);
    let cell = l.level_set(l.report_index("+1").unwrap());
    let mut want = Polyhedron::simplex(2);
    want.add_le(vi(&[-1, 0]), q(-1, 2));
    assert!(cell.same_set(&want));

    let single = DiscreteLoss::new(vec!["a".into(), "b".into()], vec!["r".into()], vec![vi(&[3, 1])]).unwrap();
    assert!(single.level_set(0).same_set(&Polyhedron::simplex(2)));

    let l = abstain_loss(3, q(1, 2)).unwrap();
    let cell = l.level_set(l.report_index(ABSTAIN).unwrap());
    let mut want = Polyhedron::simplex(3);
    for y in 0..3 {
        let mut e = vec![qi(0); 3];
        e[y] = qi(1);
        want.add_le(e, q(1, 2));
    }
    assert!(cell.same_set(&want));
}

#[test]
fn non_redundancy_witnesses() {
    let l = zero_one(2);
    let witnesses = l.check_non_redundant().unwrap();
    for (r, p) in witnesses.iter().enumerate() {
        assert_eq!(l.bayes_risk(p).unwrap().optimal, vec![r]);
    }

    let dup = DiscreteLoss::new(
        vec!["a".into(), "b".into()],
        vec!["x".into(), "y".into(), "z".into()],
        vec![vi(&[0, 1]), vi(&[0, 1]), vi(&[1, 0])],
    )
    .unwrap();
    let msg = dup.check_non_redundant().unwrap_err().to_string();
    assert!(msg.contains('x') && msg.contains('y'), "{msg}");

    let l = abstain_loss(3, q(1, 2)).unwrap();
    let uniform = v(&["1/3", "1/3", "1/3"]);
    let bottom = l.report_index(ABSTAIN).unwrap();
    assert!(l.check_non_redundant().is_ok());
    for r in 0..l.n_reports() {
        if r != bottom {
            assert!(l.expected_loss(r, &uniform).unwrap() > l.expected_loss(bottom, &uniform).unwrap());
        }
    }
}

#[test]
fn simplex_grid_examples() {
    assert_eq!(simplex_grid(2, 2), vec![v(&["0", "1"]), v(&["1/2", "1/2"]), v(&["1", "0"])]);
    let vertices: BTreeSet<Vector> = simplex_grid(3, 1).into_iter().collect();
    let want: BTreeSet<Vector> = [vi(&[1, 0, 0]), vi(&[0, 1, 0]), vi(&[0, 0, 1])].into_iter().collect();
    assert_eq!(vertices, want);
    assert_eq!(simplex_grid(3, 4).len(), 15);
}

// Geometry.

#[test]
fn lp_examples() {
    let mut lp = LinearProgram::new(1).maximize(vi(&[1]));
    lp.add(vi(&[1]), Relation::Le, qi(3));
    assert_eq!(lp.solve(), LpOutcome::Optimal { value: qi(3), point: vi(&[3]) });

    let mut lp = LinearProgram::new(1).maximize(vi(&[1]));
    lp.add(vi(&[1]), Relation::Ge, qi(0));
    assert_eq!(lp.solve(), LpOutcome::Unbounded);

    let mut lp = LinearProgram::new(1).maximize(vi(&[1]));
    lp.add(vi(&[1]), Relation::Le, qi(0));
    lp.add(vi(&[1]), Relation::Ge, qi(1));
    assert_eq!(lp.solve(), LpOutcome::Infeasible);
}

fn vertex_set(p: &Polyhedron) -> BTreeSet<Vector> {
    p.vertices().unwrap().into_iter().collect()
}

#[test]
fn vertex_examples() {
    assert_eq!(vertex_set(&Polyhedron::simplex(2)), [vi(&[1, 0]), vi(&[0, 1])].into_iter().collect());

    let mut half = Polyhedron::simplex(2);
    half.add_le(vi(&[-1, 0]), q(-1, 2));
    assert_eq!(vertex_set(&half), [v(&["1/2", "1/2"]), vi(&[1, 0])].into_iter().collect());

    // The cap max_y p_y <= 1/2 cuts the triangle down to its midpoint triangle.
    let cell = abstain_loss(3, q(1, 2)).unwrap().level_set(3);
    let want: BTreeSet<Vector> =
        [v(&["1/2", "1/2", "0"]), v(&["1/2", "0", "1/2"]), v(&["0", "1/2", "1/2"])].into_iter().collect();
    assert_eq!(vertex_set(&cell), want);

    assert!(Polyhedron::interval(Some(qi(0)), None).vertices().is_err());
}

#[test]
fn distance_examples() {
    let square = Polyhedron::cube(&vi(&[-1, -1]), &vi(&[1, 1]));
    assert_eq!(point_set_distance(&square, &vi(&[2, 0]), Norm::LInf).unwrap(), qi(1));
    assert_eq!(point_set_distance(&Polyhedron::point(&vi(&[0, 0])), &vi(&[1, 1]), Norm::L1).unwrap(), qi(2));
    assert_eq!(point_set_distance(&square, &v(&["1/2", "-1"]), Norm::L1).unwrap(), qi(0));
    let mut empty = Polyhedron::interval(Some(qi(1)), Some(qi(0)));
    empty.add_le(vi(&[1]), qi(5));
    assert!(point_set_distance(&empty, &vi(&[0]), Norm::LInf).is_err());
}

#[test]
fn intersection_examples() {
    let a = Polyhedron::interval(Some(qi(0)), Some(qi(1)));
    let b = Polyhedron::interval(Some(qi(1)), Some(qi(2)));
    let c = Polyhedron::interval(Some(qi(2)), Some(qi(3)));
    assert!(sets_intersect(&[&a, &b]));
    assert!(!sets_intersect(&[&a, &c]));
    assert!(sets_intersect(&[&c]));

    assert!(!thickened_family_intersects(&[&a, &c], &q(1, 2), Norm::LInf).unwrap());
    assert!(thickened_family_intersects(&[&a, &c], &q(3, 4), Norm::LInf).unwrap());
    assert!(thickened_family_intersects(&[&a, &b], &q(1, 1000), Norm::L1).unwrap());
}

// Polyhedral surrogates.

#[test]
fn surrogate_evaluation_examples() {
    let l = hinge();
    assert_eq!(l.eval(&vi(&[0])).unwrap(), vi(&[1, 1]));
    assert_eq!(l.eval(&vi(&[1])).unwrap(), vi(&[0, 2]));
    assert_eq!(abstain_surrogate(4).unwrap().eval(&vi(&[0, 0])).unwrap(), vi(&[1, 1, 1, 1]));
}

#[test]
fn hinge_minimization_examples() {
    let l = hinge();
    let m = l.minimize_expected(&v(&["1/2", "1/2"])).unwrap();
    assert_eq!(m.risk, qi(1));
    assert!(m.argmin.same_set(&Polyhedron::interval(Some(qi(-1)), Some(qi(1)))));

    let m = l.minimize_expected(&vi(&[1, 0])).unwrap();
    assert_eq!(m.risk, qi(0));
    assert!(m.argmin.same_set(&Polyhedron::interval(Some(qi(1)), None)));
}

#[test]
fn abstain_minimum_at_uniform_matches_grid_oracle() {
    let p = vec![q(1, 4); 4];
    let l = abstain_surrogate(4).unwrap();
    let m = l.minimize_expected(&p).unwrap();
    // Oracle: the explicit max formula on a 1/8 grid over [-2, 2]^2.
    let formula = |u: &[Rational]| -> Rational {
        (0..4)
            .map(|y| {
                let code = binary_code(4, y);
                let best = (0..2).map(|j| qi(code[j]) * &u[j] + qi(1)).max().unwrap();
                &p[y] * best.max(qi(0))
            })
            .sum()
    };
    let oracle = BoxGrid::symmetric(2, qi(2), q(1, 8)).points().iter().map(|u| formula(u)).min().unwrap();
    assert_eq!(m.risk, qi(1));
    assert_eq!(oracle, qi(1));
    assert!(m.argmin.contains(&vi(&[0, 0])));
}

#[test]
fn surrogate_bayes_risk_examples() {
    let l = hinge();
    let p = v(&["0.7", "0.3"]);
    let oracle = grid_min(|u| l.expected(&p, std::slice::from_ref(u)).unwrap(), -3, 3, 16);
    assert_eq!(oracle, qs("0.6"));
    assert_eq!(l.bayes_risk(&p).unwrap(), qs("0.6"));
    assert_eq!(l.bayes_risk(&v(&["1/2", "1/2"])).unwrap(), qi(1));

    let l = abstain_surrogate(3).unwrap();
    for y in 0..3 {
        let mut p = vec![qi(0); 3];
        p[y] = qi(1);
        // Each outcome alone reaches 0 at u = -B(y).
        assert_eq!(l.bayes_risk(&p).unwrap(), qi(0));
    }
}

#[test]
fn hinge_optimal_sets() {
    let l = hinge();
    let coarse = l.enumerate_optimal_sets(2).unwrap();
    let want = [
        Polyhedron::interval(Some(qi(1)), None),
        Polyhedron::interval(Some(qi(-1)), Some(qi(1))),
        Polyhedron::interval(None, Some(qi(-1))),
    ];
    assert_eq!(coarse.members.len(), 3);
    for w in &want {
        assert!(coarse.sets().iter().any(|s| s.same_set(w)));
    }
    let fine = l.enumerate_optimal_sets(4).unwrap();
    assert_eq!(fine.members.len(), 5);
    for x in [-1, 1] {
        assert!(fine.sets().iter().any(|s| s.same_set(&Polyhedron::point(&vi(&[x])))));
    }
}

#[test]
fn constant_surrogate_has_one_optimal_set() {
    let l = PolyhedralLoss::new(
        2,
        vec!["a".into(), "b".into()],
        vec![vec![AffinePiece::constant(2, qi(1))], vec![AffinePiece::constant(2, qi(3))]],
    )
    .unwrap();
    let family = l.enumerate_optimal_sets(3).unwrap();
    assert_eq!(family.members.len(), 1);
    assert!(family.members[0].argmin.same_set(&Polyhedron::universe(2)));
}

#[test]
fn abstain_family_contains_embedding_cells() {
    let l = abstain_surrogate(4).unwrap();
    let family = l.enumerate_optimal_sets(8).unwrap();
    let emb = abstain_embedding(4);
    assert!(family.sets().iter().any(|s| s.same_set(&Polyhedron::point(&vi(&[0, 0])))));
    for (r, u) in emb.points.iter().enumerate() {
        let owners: Vec<_> = family.sets().into_iter().filter(|s| s.contains(u)).collect();
        assert!(!owners.is_empty(), "no member contains {}", emb.reports[r]);
    }
}

#[test]
fn diagram_invariance_examples() {
    let grid = BoxGrid::symmetric(1, qi(3), q(1, 4));
    assert!(hinge().check_diagram_invariance(&v(&["1/2", "1/2"]), &v(&["1/4", "3/4"]), &grid).unwrap());

    let l = abstain_surrogate(4).unwrap();
    let grid = BoxGrid::symmetric(2, qi(2), q(1, 4));
    let p = v(&["1/10", "2/10", "3/10", "4/10"]);
    let p2 = v(&["1/2", "1/6", "1/6", "1/6"]);
    assert!(l.check_diagram_invariance(&p, &p2, &grid).unwrap());
    assert!(l.check_diagram_invariance(&p, &p, &grid).unwrap());
    assert!(l.check_diagram_invariance(&vi(&[1, 0, 0, 0]), &p, &grid).is_err());
}

// Embeddings.

#[test]
fn conjugate_surrogate_of_zero_one() {
    let l = zero_one(2);
    let (s, emb) = conjugate_surrogate(&l).unwrap();
    assert_eq!(emb.point("+1").unwrap(), &vi(&[0, -1]));
    assert_eq!(emb.point("-1").unwrap(), &vi(&[-1, 0]));
    for (r, row) in l.matrix.iter().enumerate() {
        assert_eq!(&s.eval(&emb.points[r]).unwrap(), row);
    }
    assert_eq!(bayes_risk_gap(&s, &l, 12).unwrap(), qi(0));
}

#[test]
fn conjugate_surrogate_of_constant_loss() {
    let c = q(5, 2);
    let l = DiscreteLoss::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["only".into()],
        vec![vec![c.clone(); 3]],
    )
    .unwrap();
    let (s, _) = conjugate_surrogate(&l).unwrap();
    let mut rng = common::rng(21);
    for _ in 0..50 {
        let u: Vector = (0..3).map(|_| common::rational_in(&mut rng, -3, 3, 7)).collect();
        let top = u.iter().max().unwrap().clone();
        let want: Vector = u.iter().map(|x| &top + &c - x).collect();
        assert_eq!(s.eval(&u).unwrap(), want);
    }
    for p in simplex_grid(3, 5) {
        assert_eq!(s.bayes_risk(&p).unwrap(), c);
    }
}

#[test]
fn verify_embedding_examples() {
    let check = verify_embedding(&hinge(), &twice_zero_one(2), &hinge_embedding(), 8).unwrap();
    assert!(check.verified(), "{check:?}");

    let check = verify_embedding(&hinge(), &zero_one(2), &hinge_embedding(), 8).unwrap();
    assert_eq!(check.loss_match, vec![false, false]);

    let mut target = abstain_loss(4, q(1, 2)).unwrap();
    target.matrix.iter_mut().flatten().for_each(|x| *x = &*x * qi(2));
    let check = verify_embedding(&abstain_surrogate(4).unwrap(), &target, &abstain_embedding(4), 8).unwrap();
    assert!(check.verified(), "{check:?}");

    let collapsed = Embedding::new(hinge_embedding().reports, vec![vi(&[0]), vi(&[0])]).unwrap();
    assert!(verify_embedding(&hinge(), &twice_zero_one(2), &collapsed, 4).is_err());
}

#[test]
fn bayes_risk_gap_examples() {
    assert_eq!(bayes_risk_gap(&hinge(), &twice_zero_one(2), 16).unwrap(), qi(0));
    assert_eq!(bayes_risk_gap(&hinge(), &zero_one(2), 2).unwrap(), q(1, 2));
    let l = abstain_loss(3, q(1, 3)).unwrap();
    let (s, _) = conjugate_surrogate(&l).unwrap();
    assert_eq!(bayes_risk_gap(&s, &l, 12).unwrap(), qi(0));
}

#[test]
fn extraction_examples() {
    let ext = extract_embedded_loss(&hinge(), 4).unwrap();
    assert_eq!(common::sorted_rows(&ext.loss.matrix), vec![vi(&[0, 2]), vi(&[2, 0])]);
    for (r, u) in ext.embedding.points.iter().enumerate() {
        assert_eq!(hinge().eval(u).unwrap(), ext.loss.matrix[r]);
    }

    // With two labels the abstain row (1, 1) ties the two label rows at p =
    // (1/2, 1/2) and is never uniquely optimal, so it is not extracted.
    let l = abstain_surrogate(2).unwrap();
    let ext = extract_embedded_loss(&l, 4).unwrap();
    assert_eq!(common::sorted_rows(&ext.loss.matrix), vec![vi(&[0, 2]), vi(&[2, 0])]);
    assert_eq!(l.eval(&vi(&[0])).unwrap(), vi(&[1, 1]));
    assert_eq!(l.bayes_risk(&v(&["1/2", "1/2"])).unwrap(), qi(1));

    let ext = extract_embedded_loss(&top_k_surrogate(3, 2).unwrap(), 12).unwrap();
    let table = embedded_top2_loss();
    assert_eq!(common::sorted_rows(&ext.loss.matrix), common::sorted_rows(&table.matrix));
}

#[test]
fn trim_examples() {
    let big = Polyhedron::simplex(2);
    let mut small = Polyhedron::simplex(2);
    small.add_le(vi(&[-1, 0]), q(-1, 2));
    let trimmed = trim_property(&[("a".into(), small.clone()), ("b".into(), big.clone())]);
    assert_eq!(trimmed.len(), 1);
    assert_eq!(trimmed[0].0, "b");

    let mut other = Polyhedron::simplex(2);
    other.add_le(vi(&[1, 0]), q(1, 2));
    assert_eq!(trim_property(&[("a".into(), small.clone()), ("c".into(), other.clone())]).len(), 2);

    // Hinge level sets as cells on the simplex: the points u = +-1 own the
    // half-intervals, the interior points own single distributions.
    let l = hinge();
    let cells: Vec<(String, Polyhedron)> = [-2, -1, 0, 1, 2]
        .iter()
        .map(|&x| {
            let u = vi(&[x]);
            let cell = forge_core::embedding::surrogate_level_set(&l, &u, &twice_zero_one(2)).unwrap();
            (x.to_string(), cell)
        })
        .collect();
    let kept: BTreeSet<String> = trim_property(&cells).into_iter().map(|(r, _)| r).collect();
    assert_eq!(kept, ["-1".to_string(), "1".to_string()].into_iter().collect());
}

// Links.

#[test]
fn report_set_examples() {
    let fam = hinge().enumerate_optimal_sets(2).unwrap();
    let emb = hinge_embedding();
    let middle = fam.sets().into_iter().find(|s| s.contains(&vi(&[0]))).unwrap();
    assert_eq!(report_sets(&[middle], &emb).unwrap()[0], [0, 1].into_iter().collect());
    let single = Polyhedron::point(&vi(&[1]));
    assert_eq!(report_sets(&[&single], &emb).unwrap()[0], [0].into_iter().collect());

    let emb = abstain_embedding(4);
    let origin = Polyhedron::point(&vi(&[0, 0]));
    assert_eq!(report_sets(&[&origin], &emb).unwrap()[0], [4].into_iter().collect());
}

#[test]
fn epsilon_examples() {
    let fam = abstain_surrogate(4).unwrap().enumerate_optimal_sets(8).unwrap();
    let sets = fam.sets();
    assert_eq!(max_valid_epsilon(&sets, Norm::LInf, &[qi(1), q(1, 2), q(1, 4)]).unwrap().epsilon, q(1, 2));
    assert_eq!(max_valid_epsilon(&sets, Norm::L1, &[qi(2), qi(1), q(1, 2)]).unwrap().epsilon, qi(1));
    assert!(max_valid_epsilon(&sets, Norm::LInf, &[qi(2), qi(1)]).is_err());

    let a = Polyhedron::interval(Some(qi(0)), Some(qi(2)));
    let b = Polyhedron::interval(Some(qi(1)), Some(qi(3)));
    assert_eq!(max_valid_epsilon(&[&a, &b], Norm::LInf, &[qi(7), qi(1)]).unwrap().epsilon, qi(7));
}

fn thickened_abstain(norm: Norm, eps: Rational) -> ThickenedLink {
    let fam = abstain_surrogate(4).unwrap().enumerate_optimal_sets(8).unwrap();
    ThickenedLink::new(&fam, &abstain_embedding(4), norm, eps, &[ABSTAIN.to_string()]).unwrap()
}

#[test]
fn thickened_link_examples() {
    let link = thickened_abstain(Norm::LInf, q(1, 2));
    let label = |u: &[&str]| link.reports[link.link(&v(u)).unwrap()].clone();
    assert_eq!(label(&["0.3", "0.9"]), ABSTAIN);
    assert_eq!(label(&["0.8", "-0.9"]), abstain_label(&[-1, 1]));

    let link = thickened_abstain(Norm::L1, qi(1));
    for u in [["0", "0"], ["0.3", "0.6"], ["-0.5", "0.4"], ["0.9", "0"]] {
        assert_eq!(link.reports[link.link(&v(&u)).unwrap()], ABSTAIN);
    }
}

#[test]
fn closed_form_abstain_link_examples() {
    let emb = abstain_embedding(4);
    let linf = AbstainLink::new(4, Norm::LInf);
    let l1 = AbstainLink::new(4, Norm::L1);
    let label = |link: &AbstainLink, u: &[&str]| emb.reports[link.link(&v(u)).unwrap()].clone();
    assert_eq!(label(&linf, &["0.3", "0.9"]), ABSTAIN);
    assert_eq!(label(&l1, &["0.3", "0.9"]), abstain_label(&[-1, -1]));
    assert_eq!(label(&linf, &["0", "0"]), ABSTAIN);
    assert_eq!(label(&l1, &["0", "0"]), ABSTAIN);
    assert_eq!(label(&linf, &["2", "-2"]), abstain_label(&[-1, 1]));
    assert_eq!(label(&l1, &["2", "-2"]), abstain_label(&[-1, 1]));
}

#[test]
fn hinge_audit_has_positive_gap() {
    // p puts 3/4 on -1, so gamma(p) = {-1}; off-target reports are u >= 0,
    // where the expected hinge is minimized at u = 0 with value 1.
    let p = v(&["1/4", "3/4"]);
    let grid = BoxGrid::symmetric(1, qi(2), q(1, 4));
    let entry = calibration_audit(&hinge(), &hinge_link, &zero_one(2), &p, &grid).unwrap();
    let risk = hinge().bayes_risk(&p).unwrap();
    let oracle = grid_min(|u| hinge().expected(&p, std::slice::from_ref(u)).unwrap(), 0, 2, 4) - &risk;
    assert_eq!(entry.verdict, Verdict::Evidence);
    assert_eq!(entry.gap, Some(oracle.clone()));
    assert_eq!(oracle, q(1, 2));
}

#[test]
fn audit_is_vacuous_when_the_link_is_always_right() {
    let p = v(&["1/4", "3/4"]);
    let grid = BoxGrid::symmetric(1, qi(2), q(1, 2));
    let always_minus = |_: &[Rational]| -> forge_core::Result<usize> { Ok(1) };
    let entry = calibration_audit(&hinge(), &always_minus, &zero_one(2), &p, &grid).unwrap();
    assert_eq!(entry.verdict, Verdict::Vacuous);
    assert_eq!(entry.gap, None);
}

#[test]
fn lovasz_audit_finds_the_sign_link_violation() {
    let g = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    let l = g.lovasz_hinge().unwrap();
    let target = g.set_loss();
    let p = v(&["0.4", "0.2", "0.2", "0.2"]);
    let grid = BoxGrid::symmetric(2, qi(2), q(1, 2));
    let entry = calibration_audit(&l, &SignLink::new(2), &target, &p, &grid).unwrap();
    assert_eq!(entry.verdict, Verdict::Violation);
    let scan = calibration_scan(&l, &SignLink::new(2), &target, 8, &grid).unwrap();
    assert!(!scan.passed());
}

#[test]
fn calibration_scan_examples() {
    let mut target = abstain_loss(4, q(1, 2)).unwrap();
    target.matrix.iter_mut().flatten().for_each(|x| *x = &*x * qi(2));
    let grid = BoxGrid::symmetric(2, qi(3), q(1, 4));
    let scan = calibration_scan(&abstain_surrogate(4).unwrap(), &AbstainLink::new(4, Norm::L1), &target, 8, &grid)
        .unwrap();
    assert!(scan.passed());
    assert!(scan.min_gap().unwrap().is_positive());

    let f = SetFunction::modular(&[qi(1), qi(2)]);
    let grid = BoxGrid::symmetric(2, qi(2), q(1, 4));
    let scan = calibration_scan(&f.lovasz_hinge().unwrap(), &SignLink::new(2), &f.set_loss(), 8, &grid).unwrap();
    assert!(scan.passed());
    assert!(scan.min_gap().unwrap().is_positive());
}

#[test]
fn separation_slope_examples() {
    let est = separation_slope(&hinge(), &vi(&[1, 0]), &[vi(&[0]), vi(&[-1]), vi(&[-2])], Norm::LInf).unwrap();
    assert_eq!(est.slope, Some(qi(1)));
    for (_, excess, dist) in &est.samples {
        assert_eq!(excess, dist);
    }

    let l = abstain_surrogate(4).unwrap();
    let mut rng = common::rng(31);
    let samples: Vec<Vector> =
        (0..100).map(|_| (0..2).map(|_| common::rational_in(&mut rng, -2, 2, 100)).collect()).collect();
    let est = separation_slope(&l, &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)], &samples, Norm::LInf).unwrap();
    assert!(est.slope.unwrap().is_positive());
}

// Zoo.

#[test]
fn zoo_table_examples() {
    let l = abstain_loss(3, q(1, 2)).unwrap();
    assert_eq!(l.matrix[l.report_index(ABSTAIN).unwrap()], vec![q(1, 2); 3]);
    let l = zero_one(2);
    assert_eq!(l.outcomes, vec!["+1".to_string(), "-1".to_string()]);
    assert_eq!(l.matrix[l.report_index("+1").unwrap()], vi(&[0, 1]));

    let card = SetFunction::modular(&[qi(1), qi(1)]);
    let h = card.set_loss();
    for (r, row) in h.matrix.iter().enumerate() {
        for (s, x) in row.iter().enumerate() {
            assert_eq!(*x, qi((r ^ s).count_ones() as i64));
        }
    }
    assert_eq!(h, forge_core::zoo::lovasz::hamming(2));
}

#[test]
fn abstain_surrogate_examples() {
    let l = abstain_surrogate(4).unwrap();
    assert_eq!(l.dim, 2);
    for y in 0..4 {
        let u: Vector = binary_code(4, y).iter().map(|&b| qi(-b)).collect();
        assert_eq!(l.eval_outcome(y, &u), qi(0));
    }
    let l = abstain_surrogate(2).unwrap();
    assert_eq!(l.dim, 1);
    for u in [-3, -1, 0, 2] {
        let x = qi(u);
        assert_eq!(l.eval(std::slice::from_ref(&x)).unwrap(), vec![(-&x + qi(1)).max(qi(0)), (&x + qi(1)).max(qi(0))]);
    }
}

#[test]
fn set_function_predicates() {
    let card = SetFunction::modular(&[qi(1), qi(1)]);
    assert!(card.is_submodular() && card.is_increasing() && card.is_modular());
    let cover = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    assert!(cover.is_submodular() && cover.is_increasing() && !cover.is_modular());
    let superm = set_fn(2, &[qi(0), qi(1), qi(1), qi(3)]);
    assert!(!superm.is_submodular());
}

#[test]
fn lovasz_extension_examples() {
    let w = v(&["0.5", "0.2"]);
    assert_eq!(SetFunction::modular(&[qi(1), qi(1)]).lovasz_extension(&w).unwrap(), qs("0.7"));
    let cover = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    // Threshold oracle: E_theta f({i : w_i > theta}) for theta uniform on [0, 1].
    // The level set is {1, 2} for theta < 0.2 and {1} for 0.2 <= theta < 0.5.
    let oracle = qs("0.2") * cover.value(3) + qs("0.3") * cover.value(1);
    assert_eq!(cover.lovasz_extension(&w).unwrap(), oracle);
    assert_eq!(oracle, qs("0.5"));
    let f = set_fn(3, &[0, 2, 3, 4, 1, 3, 3, 5].map(qi));
    for s in 0..8usize {
        let ind: Vector = (0..3).map(|i| qi((s >> i & 1) as i64)).collect();
        assert_eq!(f.lovasz_extension(&ind).unwrap(), *f.value(s));
    }
}

#[test]
fn lovasz_hinge_of_all_ones_is_the_abstain_surrogate() {
    let g = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    let l = g.lovasz_hinge().unwrap();
    let a = abstain_surrogate(4).unwrap();
    // Outcome S has sign vector chi_S; abstain outcome y has code B(y) = -chi_S.
    let matching: Vec<usize> = (0..4)
        .map(|y| {
            let neg: Vector = binary_code(4, y).iter().map(|&b| qi(-b)).collect();
            (0..4).find(|&s| sign_vector(2, s) == neg).unwrap()
        })
        .collect();
    let mut rng = common::rng(41);
    for _ in 0..2000 {
        let u: Vector = (0..2).map(|_| common::rational_in(&mut rng, -3, 3, 50)).collect();
        for y in 0..4 {
            assert_eq!(a.eval_outcome(y, &u), l.eval_outcome(matching[y], &u));
        }
    }
}

#[test]
fn modular_lovasz_hinge_is_weighted_hamming_hinge_on_the_cube() {
    let weights = [qi(2), q(1, 3), qi(1)];
    let f = SetFunction::modular(&weights);
    let l = f.lovasz_hinge().unwrap();
    let mut rng = common::rng(42);
    for _ in 0..500 {
        let u: Vector = (0..3).map(|_| common::rational_in(&mut rng, -1, 1, 40)).collect();
        for s in 0..8 {
            let y = sign_vector(3, s);
            let want: Rational =
                (0..3).map(|i| &weights[i] * (qi(1) - &u[i] * &y[i]).max(qi(0))).sum();
            assert_eq!(l.eval_outcome(s, &u), want);
        }
    }
    for s in 0..8 {
        assert_eq!(l.eval_outcome(s, &sign_vector(3, s)), qi(0));
    }
    assert!(set_fn(2, &[qi(0), qi(2), qi(1), qi(1)]).lovasz_hinge().is_err());
}

#[test]
fn restricted_loss_examples() {
    let g = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    let r = g.restricted_loss();
    let reports = restricted_reports(2);
    let idx = |a: usize, b: usize| reports.iter().position(|&x| x == (a, b)).unwrap();
    for a in 0..4 {
        for s in 0..4 {
            assert_eq!(r.matrix[idx(a, 0)][s], g.value(a ^ s) * qi(2));
        }
    }
    for s in 0..4 {
        assert_eq!(r.matrix[idx(0, 3)][s], *g.value(3));
    }
    assert_eq!(r.matrix[idx(0, 1)][1], qi(1));
}

#[test]
fn mean_value_examples() {
    assert_eq!(SetFunction::modular(&[qi(1), qi(1)]).mean_value(), qi(1));
    assert_eq!(set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]).mean_value(), q(3, 4));
    assert_eq!(set_fn(3, &vec![qi(0); 8]).mean_value(), qi(0));
}

#[test]
fn inconsistency_witness_examples() {
    let g = set_fn(2, &[qi(0), qi(1), qi(1), qi(1)]);
    let w = g.inconsistency_witness().unwrap();
    assert!(w.holds);
    assert!(w.violations.iter().any(|(_, linked)| linked == "(+1,+1)"), "{:?}", w.violations);

    assert!(SetFunction::modular(&[qi(1), qi(2)]).inconsistency_witness().is_err());

    let f = set_fn(2, &[qi(0), qi(1), qi(1), q(3, 2)]);
    let w = f.inconsistency_witness().unwrap();
    assert_eq!(w.mean, q(7, 8));
    assert_eq!(w.epsilon, q(1, 14));
    assert!(w.holds);
    // Every (A, {}) report is strictly worse than (∅, N) at the witness.
    let r = f.restricted_loss();
    let reports = restricted_reports(2);
    let base = r.expected_loss(reports.iter().position(|&x| x == (0, 3)).unwrap(), &w.p).unwrap();
    for (i, &(_, b)) in reports.iter().enumerate() {
        if b == 0 {
            assert!(r.expected_loss(i, &w.p).unwrap() > base);
        }
    }
}

#[test]
fn top_k_examples() {
    assert_eq!(top_k_surrogate_direct(2, &vi(&[2, 1, 0]), 0), qi(0));
    let l = top_k_surrogate(3, 2).unwrap();
    assert_eq!(l.eval_outcome(0, &vi(&[2, 1, 0])), qi(0));

    let t = top_k_loss(3, 2).unwrap();
    let r = top_k_reports(3, 2).iter().position(|s| *s == vec![0, 1]).unwrap();
    assert_eq!(t.matrix[r], vi(&[0, 0, 1]));

    let link = TopKLink { n: 3, k: 2 };
    assert_eq!(top_k_reports(3, 2)[link.link(&v(&["0.9", "0.1", "0.5"])).unwrap()], vec![0, 2]);
    assert!(top_k_loss(3, 3).is_err());
    assert!(top_k_surrogate(3, 1).is_err());
}

#[test]
fn embedded_top2_examples() {
    let l = embedded_top2_loss();
    let pts = top2_lattice_reports();
    let row = |r: [i64; 3]| &l.matrix[pts.iter().position(|p| *p == vi(&r)).unwrap()];
    assert_eq!(row([2, 1, 0])[0], qi(0));
    assert_eq!(row([1, 1, 0])[0], q(1, 2));
    assert_eq!(row([1, 0, 0])[2], q(3, 2));
    assert_eq!(l.n_reports(), 12);
}

#[test]
fn refinement_examples() {
    let fine = embedded_top2_loss().property();
    let coarse = top_k_loss(3, 2).unwrap().property();
    match refinement_check(&fine, &coarse).unwrap() {
        Refinement::Fails { interior, .. } => {
            // The witness cell meets two top-2 cells: no single top-2 report
            // is optimal across it.
            assert!(interior.iter().all(Rational::is_positive));
        }
        Refinement::Refines => panic!("embedded property refines top-2"),
    }
    let gamma = top_k_loss(3, 2).unwrap().property();
    assert_eq!(refinement_check(&gamma, &gamma).unwrap(), Refinement::Refines);
    assert_eq!(
        refinement_check(&twice_zero_one(3).property(), &zero_one(3).property()).unwrap(),
        Refinement::Refines
    );
}
