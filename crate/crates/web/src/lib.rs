//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions return `Result<String, String>` so they can be tested
//! natively; the exported wrappers turn errors into JavaScript exceptions.

use forge_core::discrete::DiscreteLoss;
use forge_core::geometry::{format_vector, Norm};
use forge_core::link::{disjoint_subfamilies, ThickenedLink};
use forge_core::plot::{envelope_diagram, simplex_diagram};
use forge_core::polyhedral::OptimalSetFamily;
use forge_core::zoo::abstain::{abstain_embedding, abstain_loss, abstain_surrogate, ABSTAIN};
use forge_core::zoo::classic::zero_one;
use forge_core::zoo::topk::{embedded_top2_loss, top_k_loss};
use forge_core::{qi, Rational};
use wasm_bindgen::prelude::*;

/// Grid resolution used to enumerate the abstain surrogate's optimal sets.
const FAMILY_GRID: u32 = 8;

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.trim().parse::<Rational>().map_err(|e| e.to_string())
}

fn abstain_family() -> Result<OptimalSetFamily, String> {
    abstain_surrogate(4).and_then(|l| l.enumerate_optimal_sets(FAMILY_GRID)).map_err(|e| e.to_string())
}

/// Largest epsilon for which the thickened abstain link is well defined
/// under `norm`: the smallest thickening radius of a disjoint subfamily.
pub fn abstain_max_epsilon(norm: &str) -> Result<String, String> {
    let norm: Norm = norm.parse().map_err(|e: forge_core::Error| e.to_string())?;
    let family = abstain_family()?;
    let checks = disjoint_subfamilies(&family.sets(), norm).map_err(|e| e.to_string())?;
    Ok(checks.iter().map(|c| c.radius.clone()).min().map_or_else(|| "unbounded".into(), |r| r.to_string()))
}

/// SVG of the link envelope of the abstain surrogate (4 labels, 2 bits) for
/// the given norm and epsilon on `[-2, 2]^2`.
pub fn abstain_envelope(norm: &str, epsilon: &str, pixels: u32) -> Result<String, String> {
    let norm: Norm = norm.parse().map_err(|e: forge_core::Error| e.to_string())?;
    let epsilon = parse_rational(epsilon)?;
    if !(1..=256).contains(&pixels) {
        return Err("pixels must be between 1 and 256".into());
    }
    let family = abstain_family()?;
    let embedding = abstain_embedding(4);
    let link = ThickenedLink::new(&family, &embedding, norm, epsilon.clone(), &[ABSTAIN.to_string()])
        .map_err(|e| e.to_string())?;
    envelope_diagram(&link, &embedding, &qi(2), pixels as usize, &format!("Link envelope, {norm} with epsilon = {epsilon}"))
        .map_err(|e| e.to_string())
}

fn named_loss(name: &str, alpha: &str) -> Result<DiscreteLoss, String> {
    match name {
        "zero-one" => Ok(zero_one(3)),
        "abstain" => abstain_loss(3, parse_rational(alpha)?).map_err(|e| e.to_string()),
        "top-2" => top_k_loss(3, 2).map_err(|e| e.to_string()),
        "embedded-top2" => Ok(embedded_top2_loss()),
        other => Err(format!("unknown loss `{other}`")),
    }
}

/// SVG of the level sets of a three-outcome loss.
pub fn simplex_cells(name: &str, alpha: &str) -> Result<String, String> {
    let loss = named_loss(name, alpha)?;
    simplex_diagram(&loss, &format!("Level sets of {name}")).map_err(|e| e.to_string())
}

/// Bayes risk and optimal reports at `p`, given as comma-separated rationals
/// or decimals; the result is a JSON object.
pub fn bayes_optimal(name: &str, alpha: &str, p: &str) -> Result<String, String> {
    let loss = named_loss(name, alpha)?;
    let p: Vec<Rational> = p.split(',').map(parse_rational).collect::<Result<_, _>>()?;
    let sum: Rational = p.iter().cloned().sum();
    if sum.is_zero() || p.iter().any(Rational::is_negative) {
        return Err("weights must be nonnegative with a positive sum".into());
    }
    let p: Vec<Rational> = p.iter().map(|x| x / &sum).collect();
    let br = loss.bayes_risk(&p).map_err(|e| e.to_string())?;
    let expected: Vec<serde_json::Value> = (0..loss.n_reports())
        .map(|r| {
            serde_json::json!({
                "report": loss.reports[r],
                "expected_loss": loss.expected_loss(r, &p).map(|v| v.to_string()).unwrap_or_default(),
            })
        })
        .collect();
    let out = serde_json::json!({
        "p": format_vector(&p),
        "risk": br.risk.to_string(),
        "optimal": br.optimal.iter().map(|&r| loss.reports[r].clone()).collect::<Vec<_>>(),
        "expected": expected,
    });
    serde_json::to_string_pretty(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = abstainMaxEpsilon)]
pub fn js_abstain_max_epsilon(norm: &str) -> Result<String, JsError> {
    abstain_max_epsilon(norm).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = abstainEnvelope)]
pub fn js_abstain_envelope(norm: &str, epsilon: &str, pixels: u32) -> Result<String, JsError> {
    abstain_envelope(norm, epsilon, pixels).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simplexCells)]
pub fn js_simplex_cells(name: &str, alpha: &str) -> Result<String, JsError> {
    simplex_cells(name, alpha).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bayesOptimal)]
pub fn js_bayes_optimal(name: &str, alpha: &str, p: &str) -> Result<String, JsError> {
    bayes_optimal(name, alpha, p).map_err(|e| JsError::new(&e))
}

