//! Static SVG figures: simplex cell diagrams for three outcomes and region
//! diagrams of links on the plane.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::discrete::DiscreteLoss;
use crate::error::{Error, Result};
use crate::geometry::{format_vector, Vector};
use crate::link::ThickenedLink;
use crate::rational::Rational;

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title));
}

/// Barycentric projection of a distribution over three outcomes.
fn project(p: &[Rational]) -> (f64, f64) {
    let corners = [(MARGIN, MARGIN + SIZE * 0.866), (MARGIN + SIZE, MARGIN + SIZE * 0.866), (MARGIN + SIZE / 2.0, MARGIN)];
    let mut x = 0.0;
    let mut y = 0.0;
    for (w, (cx, cy)) in p.iter().zip(corners) {
        x += w.to_f64() * cx;
        y += w.to_f64() * cy;
    }
    (x, y)
}

fn polygon_order(points: &mut [(f64, f64)]) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    points.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).total_cmp(&(b.1 - cy).atan2(b.0 - cx)));
}

/// Level sets of `loss` drawn on the probability simplex. Cells of reports
/// that are never uniquely optimal are skipped.
pub fn simplex_diagram(loss: &DiscreteLoss, title: &str) -> Result<String> {
    if loss.n_outcomes() != 3 {
        return Err(Error::Invalid(format!(
            "simplex diagrams need exactly 3 outcomes, this loss has {}",
            loss.n_outcomes()
        )));
    }
    let witnesses = loss.uniqueness_witnesses();
    let height = SIZE * 0.866 + 2.0 * MARGIN + 18.0 * loss.n_reports() as f64;
    let mut out = String::new();
    header(&mut out, SIZE + 2.0 * MARGIN, height, title);
    let mut shown = 0;
    for (r, witness) in witnesses.iter().enumerate() {
        if witness.is_none() {
            continue;
        }
        let color = PALETTE[shown % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = loss.level_set(r).vertices()?.iter().map(|v| project(v)).collect();
        polygon_order(&mut pts);
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="{color}" stroke="#333" stroke-width="1"><title>{}</title></polygon>"##,
            coords.join(" "),
            escape(&loss.reports[r])
        );
        let n = pts.len() as f64;
        let (cx, cy) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle" dominant-baseline="middle" font-size="10">{}</text>"#,
            escape(&loss.reports[r])
        );
        shown += 1;
    }
    let corners = [(1, 0, 0), (0, 1, 0), (0, 0, 1)];
    for (y, (a, b, c)) in corners.iter().enumerate() {
        let (x, yy) = project(&[Rational::from_integer(*a), Rational::from_integer(*b), Rational::from_integer(*c)]);
        let dy = if y == 2 { -8.0 } else { 18.0 };
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
            yy + dy,
            escape(&loss.outcomes[y])
        );
    }
    let base = SIZE * 0.866 + MARGIN + 36.0;
    let mut row = 0;
    for (r, witness) in witnesses.iter().enumerate() {
        if witness.is_none() {
            continue;
        }
        let y = base + 18.0 * row as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{:.2}" width="12" height="12" fill="{}" stroke="#333"/><text x="{}" y="{:.2}">{} : {}</text>"##,
            y - 10.0,
            PALETTE[row % PALETTE.len()],
            MARGIN + 18.0,
            y,
            escape(&loss.reports[r]),
            escape(&format_vector(&loss.matrix[r]))
        );
        row += 1;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Colors the square `[lo, hi]` of the plane by `region(u)`, evaluated at the
/// center of each of `pixels × pixels` cells, and marks the given points.
pub fn region_diagram(
    lo: &[Rational],
    hi: &[Rational],
    pixels: usize,
    region: &dyn Fn(&[Rational]) -> Result<String>,
    marks: &[(String, Vector)],
    title: &str,
) -> Result<String> {
    if lo.len() != 2 || hi.len() != 2 {
        return Err(Error::Invalid(format!("region diagrams need a 2-dimensional report space, got {}", lo.len())));
    }
    if pixels == 0 || lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return Err(Error::Invalid("region diagram needs lo < hi and at least one pixel".into()));
    }
    let count = Rational::from_integer(pixels as i64);
    let step: Vec<Rational> = (0..2).map(|i| (&hi[i] - &lo[i]) / &count).collect();
    let half = Rational::new(1, 2);
    let mut labels: Vec<Vec<String>> = Vec::with_capacity(pixels);
    for j in 0..pixels {
        let y = &lo[1] + &step[1] * (Rational::from_integer(j as i64) + &half);
        let mut row = Vec::with_capacity(pixels);
        for i in 0..pixels {
            let x = &lo[0] + &step[0] * (Rational::from_integer(i as i64) + &half);
            row.push(region(&[x, y.clone()])?);
        }
        labels.push(row);
    }
    let mut colors: BTreeMap<String, &str> = BTreeMap::new();
    for l in labels.iter().flatten() {
        colors.entry(l.clone()).or_insert("");
    }
    for (i, c) in colors.values_mut().enumerate() {
        *c = PALETTE[i % PALETTE.len()];
    }

    let px = SIZE / pixels as f64;
    let height = SIZE + 2.0 * MARGIN + 18.0 * colors.len() as f64;
    let mut out = String::new();
    header(&mut out, SIZE + 2.0 * MARGIN, height, title);
    for (j, row) in labels.iter().enumerate() {
        let y = MARGIN + SIZE - (j + 1) as f64 * px;
        let mut i = 0;
        while i < pixels {
            let start = i;
            while i < pixels && row[i] == row[start] {
                i += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN + start as f64 * px,
                (i - start) as f64 * px + 0.5,
                px + 0.5,
                colors[&row[start]]
            );
        }
    }
    let _ = writeln!(out, r##"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#333"/>"##);
    let to_screen = |u: &[Rational]| {
        let fx = ((&u[0] - &lo[0]) / (&hi[0] - &lo[0])).to_f64();
        let fy = ((&u[1] - &lo[1]) / (&hi[1] - &lo[1])).to_f64();
        (MARGIN + fx * SIZE, MARGIN + SIZE - fy * SIZE)
    };
    if lo[0] < Rational::zero() && hi[0] > Rational::zero() && lo[1] < Rational::zero() && hi[1] > Rational::zero() {
        let (ox, oy) = to_screen(&[Rational::zero(), Rational::zero()]);
        let _ = writeln!(
            out,
            r##"<path d="M{MARGIN} {oy:.2}H{} M{ox:.2} {MARGIN}V{}" stroke="#777" stroke-dasharray="4 3"/>"##,
            MARGIN + SIZE,
            MARGIN + SIZE
        );
    }
    for (name, u) in marks {
        if u.len() != 2 || u.iter().zip(lo.iter().zip(hi)).any(|(x, (a, b))| x < a || x > b) {
            continue;
        }
        let (x, y) = to_screen(u);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="black"/><text x="{:.2}" y="{:.2}" font-weight="bold">{}</text>"#,
            x + 7.0,
            y - 7.0,
            escape(name)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.2}" font-size="10">{} .. {}</text>"#,
        MARGIN + SIZE + 14.0,
        escape(&format_vector(lo)),
        escape(&format_vector(hi))
    );
    for (row, (label, color)) in colors.iter().enumerate() {
        let y = MARGIN + SIZE + 36.0 + 18.0 * row as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{:.2}" width="12" height="12" fill="{color}" stroke="#333"/><text x="{}" y="{y:.2}">{}</text>"##,
            y - 10.0,
            MARGIN + 18.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// `Ψ(u)` written as a set of report labels.
pub fn envelope_label(link: &ThickenedLink, u: &[Rational]) -> Result<String> {
    let psi = link.envelope(u)?;
    let names: Vec<&str> = psi.iter().map(|&r| link.reports[r].as_str()).collect();
    Ok(format!("{{{}}}", names.join(", ")))
}

/// Link envelope of a thickened link on the square `[-radius, radius]^2`,
/// with its embedding points marked.
pub fn envelope_diagram(
    link: &ThickenedLink,
    embedding: &crate::embedding::Embedding,
    radius: &Rational,
    pixels: usize,
    title: &str,
) -> Result<String> {
    let lo = vec![-radius.clone(); 2];
    let hi = vec![radius.clone(); 2];
    let marks: Vec<(String, Vector)> = embedding.reports.iter().cloned().zip(embedding.points.iter().cloned()).collect();
    region_diagram(&lo, &hi, pixels, &|u| envelope_label(link, u), &marks, title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{top_k_loss, zero_one};
    use crate::qi;

    #[test]
    fn simplex_diagram_draws_one_polygon_per_cell() {
        let svg = simplex_diagram(&top_k_loss(3, 2).unwrap(), "top-2").unwrap();
        assert_eq!(svg.matches("<polygon").count(), 3);
        assert!(simplex_diagram(&zero_one(2), "binary").is_err());
    }

    #[test]
    fn region_diagram_merges_runs() {
        let svg = region_diagram(
            &[qi(-1), qi(-1)],
            &[qi(1), qi(1)],
            4,
            &|u| Ok(if u[0].is_negative() { "left".into() } else { "right".into() }),
            &[],
            "halves",
        )
        .unwrap();
        // Two runs per row plus the frame and two legend swatches.
        assert_eq!(svg.matches("<rect").count(), 1 + 4 * 2 + 1 + 2);
    }
}
