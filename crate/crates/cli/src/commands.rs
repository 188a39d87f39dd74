use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use forge_core::discrete::DiscreteLoss;
use forge_core::embedding::{conjugate_surrogate, extract_certified, verify_embedding, Embedding};
use forge_core::geometry::{format_vector, BoxGrid, Vector};
use forge_core::link::{calibration_scan, embedding_box, max_valid_epsilon, Link, ThickenedLink};
use forge_core::plot::{envelope_label, region_diagram, simplex_diagram};
use forge_core::polyhedral::PolyhedralLoss;
use forge_core::spec_io::{
    from_json, to_json, CertificateSpec, LinkSpec, LossSpec, SetFunctionSpec, SubfamilySpec, SurrogateSpec,
};
use forge_core::zoo::abstain::{abstain_embedding, abstain_loss, abstain_surrogate, AbstainLink, ABSTAIN};
use forge_core::zoo::classic::{class_labels, hinge, hinge_embedding, hinge_link, twice_zero_one, zero_one};
use forge_core::zoo::lovasz::{sign_label, SetFunction, SignLink};
use forge_core::zoo::topk::{embedded_top2_loss, top_k_loss, top_k_surrogate, TopKLink};
use forge_core::{qi, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::{Artifact, Options, Status, ZooArgs, ZooName};

fn out_dir(opts: &Options) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| PathBuf::from("forge-out"))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_run(opts: &Options, command: &str, inputs: &[&Path]) -> Result<()> {
    let config = RunConfig {
        command: command.to_string(),
        inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
        grid_m: opts.grid_m,
        norm: opts.norm,
        eps_ladder: opts.eps_ladder.clone(),
        u_box: opts.u_box.clone(),
        u_res: opts.u_res.clone(),
        seed: opts.seed,
        out: out_dir(opts),
    };
    write(&out_dir(opts), "run.json", &to_json(&config)?)
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_grid(opts: &Options) -> Result<()> {
    if opts.grid_m == 0 {
        bail!("--grid-m must be at least 1");
    }
    if !opts.u_res.is_positive() {
        bail!("--u-res must be positive");
    }
    Ok(())
}

fn load_surrogate(path: &Path) -> Result<(PolyhedralLoss, Option<Embedding>)> {
    let spec: SurrogateSpec = read(path)?;
    Ok((spec.surrogate()?, spec.embedding()?))
}

fn load_loss(path: &Path) -> Result<DiscreteLoss> {
    let spec: LossSpec = read(path)?;
    Ok(spec.loss()?)
}

fn joined(v: &[Rational]) -> String {
    v.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")
}

pub fn embed(opts: &Options, path: &Path) -> Result<Status> {
    check_grid(opts)?;
    let loss = load_loss(path)?;
    let (surrogate, embedding) = conjugate_surrogate(&loss)?;
    let check = verify_embedding(&surrogate, &loss, &embedding, opts.grid_m)?;
    let dir = out_dir(opts);
    write(&dir, "surrogate.json", &to_json(&SurrogateSpec::new(&surrogate, Some(&embedding)))?)?;
    let report = json!({
        "grid_m": opts.grid_m,
        "dimension": surrogate.dim,
        "pieces_per_outcome": surrogate.pieces.iter().map(Vec::len).collect::<Vec<_>>(),
        "loss_match": check.loss_match,
        "property_mismatches": check.property_mismatches.len(),
        "bayes_gap": check.bayes_gap.to_string(),
        "verified": check.verified(),
    });
    write(&dir, "embed-report.json", &to_json(&report)?)?;
    write_run(opts, "embed", &[path])?;
    println!("bayes risk gap on grid m = {}: {}", opts.grid_m, check.bayes_gap);
    Ok(if check.verified() { Status::Pass } else { Status::Violation })
}

pub fn extract(opts: &Options, path: &Path) -> Result<Status> {
    check_grid(opts)?;
    let (surrogate, _) = load_surrogate(path)?;
    let ext = extract_certified(&surrogate, opts.grid_m)?;
    let gap = forge_core::embedding::bayes_risk_gap(&surrogate, &ext.loss, opts.grid_m)?;
    let dir = out_dir(opts);
    write(&dir, "loss.json", &to_json(&LossSpec::new(&ext.loss, Some(&ext.embedding)))?)?;
    let report = json!({
        "grid_m": opts.grid_m,
        "certified_against_grid_m": 2 * opts.grid_m,
        "optimal_sets": ext.family.members.len(),
        "reports": ext.loss.reports,
        "bayes_gap": gap.to_string(),
    });
    write(&dir, "extract-report.json", &to_json(&report)?)?;
    write_run(opts, "extract", &[path])?;
    println!("extracted {} reports (bayes risk gap {gap})", ext.loss.n_reports());
    Ok(if gap.is_zero() { Status::Pass } else { Status::Violation })
}

fn embedding_for(opts: &Options, surrogate: &PolyhedralLoss, given: Option<Embedding>) -> Result<Embedding> {
    match given {
        Some(e) => Ok(e),
        None => Ok(extract_certified(surrogate, opts.grid_m)?.embedding),
    }
}

pub fn link(opts: &Options, path: &Path, tie_break: &[String], samples: usize) -> Result<Status> {
    check_grid(opts)?;
    let (surrogate, given) = load_surrogate(path)?;
    let embedding = embedding_for(opts, &surrogate, given)?;
    let family = surrogate.enumerate_optimal_sets(opts.grid_m)?;
    let cert = max_valid_epsilon(&family.sets(), opts.norm, &opts.eps_ladder)?;
    let link = ThickenedLink::new(&family, &embedding, opts.norm, cert.epsilon.clone(), tie_break)?;

    let grid = match &opts.u_box {
        Some(b) => b.grid(surrogate.dim, &opts.u_res),
        None => embedding_box(&embedding, &(qi(2) * &cert.epsilon), opts.u_res.clone()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let denom = 64i64;
    for _ in 0..samples {
        let u: Vector = (0..surrogate.dim)
            .map(|i| {
                let lo = (&grid.lo[i] * Rational::from_integer(denom)).floor();
                let hi = (&grid.hi[i] * Rational::from_integer(denom)).floor();
                let (lo, hi) = (lo.to_f64() as i64, hi.to_f64() as i64);
                Rational::new(rng.random_range(lo..=hi), denom)
            })
            .collect();
        link.envelope(&u).with_context(|| format!("sampled report {}", format_vector(&u)))?;
    }
    let mut self_linked = 0;
    for (r, u) in embedding.points.iter().enumerate() {
        let psi = link.envelope(u)?;
        if psi.len() == 1 {
            if link.choose(&psi) != r {
                bail!("embedded report `{}` does not link to itself", embedding.reports[r]);
            }
            self_linked += 1;
        }
    }

    let spec = LinkSpec::Thickened {
        norm: opts.norm,
        epsilon: cert.epsilon.clone(),
        grid_m: opts.grid_m,
        tie_break: tie_break.to_vec(),
        embedding: embedding.to_map(),
        certificate: Some(CertificateSpec {
            ladder: opts.eps_ladder.clone(),
            critical_radius: cert.critical_radius.clone(),
            subfamilies: cert
                .checks
                .iter()
                .map(|c| SubfamilySpec { members: c.members.clone(), radius: c.radius.clone() })
                .collect(),
        }),
    };
    let dir = out_dir(opts);
    write(&dir, "link.json", &to_json(&spec)?)?;
    let report = json!({
        "epsilon": cert.epsilon.to_string(),
        "norm": opts.norm,
        "optimal_sets": family.members.len(),
        "disjoint_subfamilies": cert.checks.len(),
        "critical_radius": cert.critical_radius.as_ref().map(Rational::to_string),
        "sampled_envelopes": samples,
        "seed": opts.seed,
        "reports_linking_to_themselves": self_linked,
    });
    write(&dir, "link-report.json", &to_json(&report)?)?;
    write_run(opts, "link", &[path])?;
    println!("epsilon = {} under {}", cert.epsilon, opts.norm);
    Ok(Status::Pass)
}

/// A link evaluator with the labels of the reports it returns.
struct LoadedLink {
    link: Box<dyn Link>,
    labels: Vec<String>,
    thickened: Option<(ThickenedLink, Embedding)>,
}

fn load_link(spec: &LinkSpec, surrogate: &PolyhedralLoss) -> Result<LoadedLink> {
    let closed = |link: Box<dyn Link>, labels: Vec<String>| LoadedLink { link, labels, thickened: None };
    Ok(match spec {
        LinkSpec::Thickened { norm, epsilon, grid_m, tie_break, embedding, .. } => {
            let embedding = Embedding::from_map(embedding)?;
            if embedding.dim() != surrogate.dim {
                bail!("link embedding has dimension {}, surrogate has {}", embedding.dim(), surrogate.dim);
            }
            let family = surrogate.enumerate_optimal_sets(*grid_m)?;
            let link = ThickenedLink::new(&family, &embedding, *norm, epsilon.clone(), tie_break)?;
            LoadedLink {
                link: Box::new(link.clone()),
                labels: embedding.reports.clone(),
                thickened: Some((link, embedding)),
            }
        }
        LinkSpec::Abstain { n, norm } => {
            let mut labels: Vec<String> = (1..=*n).map(|i| i.to_string()).collect();
            labels.push(ABSTAIN.into());
            closed(Box::new(AbstainLink::new(*n, *norm)), labels)
        }
        LinkSpec::Sign { k, zero_positive } => closed(
            Box::new(SignLink { k: *k, zero_positive: *zero_positive }),
            (0..1usize << k).map(|m| sign_label(*k, m)).collect(),
        ),
        LinkSpec::TopK { n, k } => closed(Box::new(TopKLink { n: *n, k: *k }), top_k_loss(*n, *k)?.reports),
        LinkSpec::Hinge => closed(Box::new(hinge_link), class_labels(2)),
    })
}

pub fn calibrate(opts: &Options, surrogate_path: &Path, link_path: &Path, loss_path: &Path) -> Result<Status> {
    check_grid(opts)?;
    let (surrogate, given) = load_surrogate(surrogate_path)?;
    let loss = load_loss(loss_path)?;
    if surrogate.outcomes != loss.outcomes {
        bail!("surrogate outcomes {:?} differ from loss outcomes {:?}", surrogate.outcomes, loss.outcomes);
    }
    let loaded = load_link(&read(link_path)?, &surrogate)?;
    let map: Vec<usize> = loaded
        .labels
        .iter()
        .map(|l| loss.report_index(l).with_context(|| format!("link report `{l}` is not a report of the loss")))
        .collect::<Result<_>>()?;
    let linked = |u: &[Rational]| -> forge_core::Result<usize> { Ok(map[loaded.link.link(u)?]) };

    let grid = match (&opts.u_box, &loaded.thickened, &given) {
        (Some(b), _, _) => b.grid(surrogate.dim, &opts.u_res),
        (None, Some((link, emb)), _) => embedding_box(emb, &(qi(2) * &link.epsilon), opts.u_res.clone()),
        (None, None, Some(emb)) => embedding_box(emb, &qi(2), opts.u_res.clone()),
        (None, None, None) => BoxGrid::symmetric(surrogate.dim, qi(3), opts.u_res.clone()),
    };
    let scan = calibration_scan(&surrogate, &linked, &loss, opts.grid_m, &grid)?;

    let dir = out_dir(opts);
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join("audit.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["p", "gap", "witness_u", "verdict"])?;
    for e in &scan.entries {
        w.write_record([
            joined(&e.p),
            e.gap.as_ref().map(Rational::to_string).unwrap_or_default(),
            e.witness.as_deref().map(joined).unwrap_or_default(),
            e.verdict.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    println!("wrote {}", csv_path.display());
    let violations: Vec<_> = scan.violations().collect();
    let report = json!({
        "grid_m": opts.grid_m,
        "u_box": { "lo": format_vector(&grid.lo), "hi": format_vector(&grid.hi) },
        "u_res": grid.step.to_string(),
        "distributions": scan.entries.len(),
        "min_gap": scan.min_gap().map(|g| g.to_string()),
        "violations": violations.iter().map(|e| json!({
            "p": format_vector(&e.p),
            "witness_u": e.witness.as_deref().map(format_vector),
            "gap": e.gap.as_ref().map(Rational::to_string),
        })).collect::<Vec<_>>(),
        "verdict": if violations.is_empty() { "no violation found at this resolution" } else { "certified violation" },
    });
    write(&dir, "calibrate-report.json", &to_json(&report)?)?;
    write_run(opts, "calibrate", &[surrogate_path, link_path, loss_path])?;
    match scan.min_gap() {
        Some(g) => println!("min gap {g}, {} violation(s)", violations.len()),
        None => println!("every grid report links correctly"),
    }
    Ok(if violations.is_empty() { Status::Pass } else { Status::Violation })
}

pub fn plot_simplex(opts: &Options, path: &Path) -> Result<Status> {
    let loss = load_loss(path)?;
    let title = format!("Level sets of {}", path.file_stem().and_then(|s| s.to_str()).unwrap_or("loss"));
    write(&out_dir(opts), "simplex.svg", &simplex_diagram(&loss, &title)?)?;
    write_run(opts, "plot simplex", &[path])?;
    Ok(Status::Pass)
}

pub fn plot_envelope(opts: &Options, surrogate_path: &Path, link_path: &Path) -> Result<Status> {
    check_grid(opts)?;
    let (surrogate, given) = load_surrogate(surrogate_path)?;
    if surrogate.dim != 2 {
        bail!("envelope plots need a 2-dimensional surrogate, this one has d = {}", surrogate.dim);
    }
    let loaded = load_link(&read(link_path)?, &surrogate)?;
    let emb = loaded.thickened.as_ref().map(|(_, e)| e.clone()).or(given);
    let (lo, hi) = match (&opts.u_box, &emb) {
        (Some(b), _) => (b.lo.clone(), b.hi.clone()),
        (None, Some(e)) => {
            let r = e.points.iter().flatten().map(Rational::abs).max().unwrap_or_else(Rational::zero) + qi(1);
            (-r.clone(), r)
        }
        (None, None) => (qi(-2), qi(2)),
    };
    let pixels = (((&hi - &lo) / &opts.u_res).to_f64().ceil() as usize).clamp(1, 512);
    let marks: Vec<(String, Vector)> =
        emb.map(|e| e.reports.into_iter().zip(e.points).collect()).unwrap_or_default();
    let bounds = (vec![lo.clone(); 2], vec![hi.clone(); 2]);
    let svg = match &loaded.thickened {
        Some((link, _)) => region_diagram(
            &bounds.0,
            &bounds.1,
            pixels,
            &|u| envelope_label(link, u),
            &marks,
            &format!("Link envelope, {} with epsilon = {}", link.norm, link.epsilon),
        )?,
        None => region_diagram(
            &bounds.0,
            &bounds.1,
            pixels,
            &|u| Ok(loaded.labels[loaded.link.link(u)?].clone()),
            &marks,
            "Link regions",
        )?,
    };
    write(&out_dir(opts), "envelope.svg", &svg)?;
    write_run(opts, "plot envelope", &[surrogate_path, link_path])?;
    Ok(Status::Pass)
}

fn default_set_function(k: usize) -> Result<SetFunction> {
    let values = (0..1usize << k).map(|s| if s == 0 { Rational::zero() } else { Rational::one() }).collect();
    Ok(SetFunction::new(k, values)?)
}

pub fn zoo(opts: &Options, args: &ZooArgs) -> Result<Status> {
    use Artifact::*;
    let emit = args.emit.unwrap_or(match args.name {
        ZooName::Hinge | ZooName::AbstainSurrogate | ZooName::LovaszHinge => Surrogate,
        _ => Loss,
    });
    let unsupported = || anyhow::anyhow!("`{:?}` has no {:?} artifact", args.name, emit);
    let text = match (args.name, emit) {
        (ZooName::ZeroOne, Loss) => to_json(&LossSpec::new(&zero_one(args.n.unwrap_or(2)), None))?,
        (ZooName::Hinge, Loss) => to_json(&LossSpec::new(&twice_zero_one(2), Some(&hinge_embedding())))?,
        (ZooName::Hinge, Surrogate) => to_json(&SurrogateSpec::new(&hinge(), Some(&hinge_embedding())))?,
        (ZooName::Hinge, Link) => to_json(&LinkSpec::Hinge)?,
        (ZooName::Abstain, Loss) => {
            let n = args.n.unwrap_or(3);
            to_json(&LossSpec::new(&abstain_loss(n, args.alpha.clone())?, None))?
        }
        (ZooName::AbstainSurrogate, Loss) => {
            let n = args.n.unwrap_or(4);
            let mut loss = abstain_loss(n, forge_core::q(1, 2))?;
            for row in &mut loss.matrix {
                row.iter_mut().for_each(|x| *x = &*x * qi(2));
            }
            to_json(&LossSpec::new(&loss, Some(&abstain_embedding(n))))?
        }
        (ZooName::Abstain | ZooName::AbstainSurrogate, Surrogate) => {
            let n = args.n.unwrap_or(4);
            to_json(&SurrogateSpec::new(&abstain_surrogate(n)?, Some(&abstain_embedding(n))))?
        }
        (ZooName::Abstain | ZooName::AbstainSurrogate, Link) => {
            to_json(&LinkSpec::Abstain { n: args.n.unwrap_or(4), norm: opts.norm })?
        }
        (ZooName::LovaszHinge, _) => {
            let f = match &args.set_function {
                Some(path) => read::<SetFunctionSpec>(path)?.set_function()?,
                None => default_set_function(args.k.unwrap_or(2))?,
            };
            match emit {
                Loss => to_json(&LossSpec::new(&f.set_loss(), None))?,
                Surrogate => to_json(&SurrogateSpec::new(&f.lovasz_hinge()?, None))?,
                Link => to_json(&LinkSpec::Sign { k: f.k, zero_positive: true })?,
            }
        }
        (ZooName::TopK, _) => {
            let (n, k) = (args.n.unwrap_or(3), args.k.unwrap_or(2));
            match emit {
                Loss => to_json(&LossSpec::new(&top_k_loss(n, k)?, None))?,
                Surrogate => to_json(&SurrogateSpec::new(&top_k_surrogate(n, k)?, None))?,
                Link => to_json(&LinkSpec::TopK { n, k })?,
            }
        }
        (ZooName::EmbeddedTop2, Loss) => to_json(&LossSpec::new(&embedded_top2_loss(), None))?,
        _ => return Err(unsupported()),
    };
    match &opts.out {
        Some(dir) => {
            let name = format!("{}.json", args.name.to_possible_value_name());
            write(dir, &name, &text)?;
        }
        None => print!("{text}"),
    }
    Ok(Status::Pass)
}

trait PossibleValueName {
    fn to_possible_value_name(&self) -> String;
}

impl PossibleValueName for ZooName {
    fn to_possible_value_name(&self) -> String {
        use clap::ValueEnum;
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}
