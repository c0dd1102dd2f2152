//! Command implementations. Each returns an [`Output`] or a library error,
//! which `main` maps to an exit code.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use framespace::equivalence::{
    check_round_trip, check_round_trip_prolif, check_transported, functor_f, functor_g,
    RoundTripReport,
};
use framespace::frame::{
    points, points_brute_force, Frame, DEFAULT_OPEN_BOUND, DEFAULT_ORACLE_BUDGET,
    DEFAULT_ORACLE_OPENS,
};
use framespace::io::{self, InputKind, SpaceFile};
use framespace::models::{self, interval_model, locale_model};
use framespace::prolif::{check_plog_morphism, ProlifFrameSpace, ProliferativeBase};
use framespace::random;
use framespace::space::point_of;
use framespace::spectral::{
    conjugation_check, derive_substructure_from_base, max_deviation, nilpotency_check,
    prolif_laplacian, spectrum, tunnel_laplacian, Complex64, OperatorMatrix, PermutationUnitary,
    SubstructureRelation,
};
use framespace::tunnel::{check_tgeom_morphism, TunnelFrameSpace};
use framespace::weight::{NegLog, Rational, Weight};
use framespace::{Error, Result};

use crate::report::RunReport;
use crate::{
    Cli, Command, Gen, GraphVariant, IntervalVariant, Kind, OracleKind, Output, RandomKind,
};

/// Eigenvalues within this distance count as equal.
const SPECTRUM_TOLERANCE: f64 = 1e-9;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Calls a function generic over the scalar kind the file declares.
macro_rules! by_weight {
    ($text:expr, $f:ident ( $($arg:expr),* )) => {
        match io::weight_kind($text)?.as_str() {
            "neglog" => $f::<NegLog>($($arg),*),
            _ => $f::<Rational>($($arg),*),
        }
    };
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Build { input, kind } => {
            let text = read(input)?;
            by_weight!(&text, build(&text, *kind))
        }
        Command::Points { input } => {
            let text = read(input)?;
            let f = by_weight!(&text, space_file(&text))?;
            let lines = f
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    format!(
                        "p{i}  generator {{{}}}  members {{{}}}\n",
                        p.generator.join(","),
                        p.members.join(",")
                    )
                })
                .collect();
            let mut out = Output::data(json!({ "count": f.points.len(), "points": f.points }));
            out.text = Some(lines);
            Ok(out)
        }
        Command::Metric { input } => {
            let text = read(input)?;
            let f = by_weight!(&text, space_file(&text))?;
            let mut out = Output::data(json!({ "raw": f.raw, "metric": f.metric }));
            out.text = Some(format!("raw\n{}closed\n{}", grid(&f.raw), grid(&f.metric)));
            Ok(out)
        }
        Command::Laplacian {
            input,
            substructure,
        } => {
            let text = read(input)?;
            let sub = substructure.as_deref().map(read_substructure).transpose()?;
            by_weight!(&text, laplacian(&text, sub))
        }
        Command::Spectrum {
            input,
            substructure,
        } => {
            let text = read(input)?;
            let sub = substructure.as_deref().map(read_substructure).transpose()?;
            by_weight!(&text, spectra(&text, sub))
        }
        Command::CheckEquivalence {
            input,
            substructure,
            laplacian,
        } => {
            let text = read(input)?;
            let sub = substructure.as_deref().map(read_substructure).transpose()?;
            let over = laplacian.as_deref().map(read).transpose()?;
            let name = input.display().to_string();
            by_weight!(
                &text,
                check_equivalence(&name, cli.seed, &text, sub, over.as_deref())
            )
        }
        Command::CheckMorphism { input } => {
            let text = read(input)?;
            check_morphism(&input.display().to_string(), cli.seed, &text)
        }
        Command::Gen { what } => generate(what, cli.seed),
        Command::Oracle { which, input } => {
            let text = read(input)?;
            oracle(*which, &input.display().to_string(), cli.seed, &text)
        }
    }
}

/// Right-aligned text table.
fn grid(rows: &[Vec<String>]) -> String {
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|x| format!("{x:>width$}"))
                .collect::<Vec<_>>()
                .join("  ")
                + "\n"
        })
        .collect()
}

/// Any loadable input, with spaces built where needed.
enum Space<W> {
    Tunnel(TunnelFrameSpace<W>),
    Prolif(ProlifFrameSpace<W>),
}

fn load<W: Weight>(text: &str) -> Result<Space<W>> {
    Ok(match io::input_kind(text)? {
        InputKind::Tunnel => {
            Space::Tunnel(TunnelFrameSpace::build(io::parse_tunnel_system(text)?)?)
        }
        InputKind::Prolif => Space::Prolif(ProlifFrameSpace::build(io::parse_base(text)?)?),
        InputKind::TunnelSpace => Space::Tunnel(io::parse_space_file(text)?.to_tunnel()?),
        InputKind::ProlifSpace => Space::Prolif(io::parse_space_file(text)?.to_prolif()?),
    })
}

fn space_file<W: Weight>(text: &str) -> Result<SpaceFile> {
    Ok(match load::<W>(text)? {
        Space::Tunnel(x) => SpaceFile::from_tunnel(&x),
        Space::Prolif(y) => SpaceFile::from_prolif(&y),
    })
}

fn build<W: Weight>(text: &str, kind: Option<Kind>) -> Result<Output> {
    let detected = match io::input_kind(text)? {
        InputKind::Tunnel | InputKind::TunnelSpace => Kind::Tunnel,
        InputKind::Prolif | InputKind::ProlifSpace => Kind::Prolif,
    };
    if let Some(k) = kind {
        if k != detected {
            return Err(Error::InvalidInput(format!(
                "--kind {k:?} given for a {detected:?} file"
            )));
        }
    }
    let f = space_file::<W>(text)?;
    Ok(Output::data(
        serde_json::to_value(f).expect("space files serialize"),
    ))
}

#[derive(Deserialize)]
struct SubstructureFile {
    pairs: Vec<[String; 2]>,
}

fn read_substructure(path: &Path) -> Result<SubstructureRelation> {
    let f: SubstructureFile = serde_json::from_str(&read(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(SubstructureRelation::new(
        f.pairs.into_iter().map(|[u, t]| (u, t)),
    ))
}

/// Both sides of the equivalence for any input.
fn both_sides<W: Weight>(text: &str) -> Result<(TunnelFrameSpace<W>, ProlifFrameSpace<W>)> {
    Ok(match load::<W>(text)? {
        Space::Tunnel(x) => {
            let (y, _) = functor_f(&x)?;
            (x, y)
        }
        Space::Prolif(y) => {
            let (x, _) = functor_g(&y)?;
            (x, y)
        }
    })
}

struct Laplacians<W> {
    tunnel: OperatorMatrix<W>,
    prolif: OperatorMatrix<W>,
    unitary: PermutationUnitary,
}

fn laplacians<W: Weight>(
    x: &TunnelFrameSpace<W>,
    y: &ProlifFrameSpace<W>,
    sub: Option<SubstructureRelation>,
) -> Result<Laplacians<W>> {
    let (_, corr) = functor_f(x)?;
    let sub = match sub {
        Some(s) => s,
        None => derive_substructure_from_base(&y.base, &corr)?,
    };
    Ok(Laplacians {
        tunnel: tunnel_laplacian(&x.system, &sub)?,
        prolif: prolif_laplacian(&y.base)?,
        unitary: PermutationUnitary::from_correspondence(&corr, &x.system.ids(), &y.base.ids())?,
    })
}

fn laplacian<W: Weight>(text: &str, sub: Option<SubstructureRelation>) -> Result<Output> {
    let m = match load::<W>(text)? {
        Space::Tunnel(x) => {
            let (y, _) = functor_f(&x)?;
            laplacians(&x, &y, sub)?.tunnel
        }
        Space::Prolif(y) => {
            if sub.is_some() {
                return Err(Error::InvalidInput(
                    "--substructure applies to tunnel inputs".into(),
                ));
            }
            prolif_laplacian(&y.base)?
        }
    };
    Ok(Output::data(io::matrix_json(&m)))
}

fn spectra<W: Weight>(text: &str, sub: Option<SubstructureRelation>) -> Result<Output> {
    let (x, y) = both_sides::<W>(text)?;
    let l = laplacians(&x, &y, sub)?;
    let st = spectrum(&l.tunnel)?;
    let sp = spectrum(&l.prolif)?;
    let dev = max_deviation(&st, &sp);
    let mut text = format!("{:>28}  {:>28}\n", "tunnel", "proliferative");
    for (a, b) in st.iter().zip(&sp) {
        text.push_str(&format!("{:>28}  {:>28}\n", show(a), show(b)));
    }
    text.push_str(&format!("max deviation: {dev:e}\n"));
    Ok(Output {
        json: json!({
            "basis": l.tunnel.basis,
            "tunnel": io::spectrum_json(&st),
            "prolif": io::spectrum_json(&sp),
            "max_deviation": io::round12(dev),
        }),
        text: Some(text),
        ok: true,
        timings: String::new(),
    })
}

fn show(z: &Complex64) -> String {
    format!("{} {:+}i", io::round12(z.re), io::round12(z.im))
}

fn round_trip_detail(r: &RoundTripReport) -> Value {
    if r.pass {
        Value::Null
    } else {
        json!(r.diffs().collect::<Vec<_>>())
    }
}

fn check_equivalence<W: Weight>(
    name: &str,
    seed: u64,
    text: &str,
    sub: Option<SubstructureRelation>,
    over: Option<&str>,
) -> Result<Output> {
    let mut report = RunReport::new(name, seed);
    let space = report.timed("load", || load::<W>(text))?;
    let (rt, x, y) = match space {
        Space::Tunnel(x) => {
            let rt = report.timed("round-trip", || check_round_trip(&x))?;
            let (y, _) = functor_f(&x)?;
            (rt, x, y)
        }
        Space::Prolif(y) => {
            let rt = report.timed("round-trip", || check_round_trip_prolif(&y))?;
            let (x, _) = functor_g(&y)?;
            (rt, x, y)
        }
    };
    report.check("round-trip", rt.pass, round_trip_detail(&rt));
    report.check("regenerated-frame", rt.regenerated_frame_equal, Value::Null);

    let user_supplied = sub.is_some() || over.is_some();
    match report.timed("laplacians", || laplacians(&x, &y, sub)) {
        Ok(mut l) => {
            if let Some(text) = over {
                l.prolif = io::parse_matrix(text)?;
            }
            let c = conjugation_check(&l.unitary, &l.tunnel, &l.prolif)?;
            let detail = match c.first_mismatch {
                None => Value::Null,
                Some((r, col)) => json!({
                    "row": l.prolif.basis[r],
                    "col": l.prolif.basis[col],
                    "max_discrepancy": io::round12(c.max_discrepancy),
                }),
            };
            report.check("conjugation", c.equal, detail);
            let (st, sp) = report.timed("spectra", || {
                Ok::<_, Error>((spectrum(&l.tunnel)?, spectrum(&l.prolif)?))
            })?;
            let dev = max_deviation(&st, &sp);
            report.check(
                "spectra",
                dev <= SPECTRUM_TOLERANCE,
                json!({ "max_deviation": io::round12(dev) }),
            );
        }
        // Infinite costs leave no Laplacian to compare.
        Err(Error::InvalidInput(_)) if !user_supplied => {}
        Err(e) => return Err(e),
    }
    Ok(report_output(report))
}

fn report_output(report: RunReport) -> Output {
    Output {
        json: serde_json::to_value(&report).expect("reports serialize"),
        text: Some(report.lines()),
        ok: report.passed(),
        timings: report.timing_lines(),
    }
}

#[derive(Deserialize)]
struct MorphismInput {
    source: Value,
    target: Value,
    map: std::collections::BTreeMap<String, String>,
}

fn check_morphism(name: &str, seed: u64, text: &str) -> Result<Output> {
    let m: MorphismInput = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (src_text, dst_text) = (m.source.to_string(), m.target.to_string());
    let mut report = RunReport::new(name, seed);
    match (load::<Rational>(&src_text)?, load::<Rational>(&dst_text)?) {
        (Space::Tunnel(src), Space::Tunnel(dst)) => {
            let hom = io::morphism_hom(&src.frame, &src.points, &dst.frame, &dst.points, &m.map)?;
            let v = check_tgeom_morphism(&src, &dst, &hom)?;
            report.check("frame-hom", hom.check().ok, Value::Null);
            report.check("tgeom", v.ok, json!(v.violation));
            let (tunnel, prolif) = check_transported(&src, &dst, &hom)?;
            report.check("plog-after-transport", prolif, Value::Null);
            report.check("transport-agrees", tunnel == prolif, Value::Null);
        }
        (Space::Prolif(src), Space::Prolif(dst)) => {
            let hom = io::morphism_hom(
                &src.scene_frame,
                &src.foci,
                &dst.scene_frame,
                &dst.foci,
                &m.map,
            )?;
            let v = check_plog_morphism(&src, &dst, &hom)?;
            report.check("frame-hom", hom.check().ok, Value::Null);
            report.check("plog", v.ok, json!(v.violation));
            let (gs, _) = functor_g(&src)?;
            let (gd, _) = functor_g(&dst)?;
            let moved = framespace::equivalence::transport_morphism(
                &hom,
                framespace::equivalence::Direction::ProlifToTunnel,
            );
            let t = check_tgeom_morphism(&gs, &gd, &moved)?.ok;
            report.check("tgeom-after-transport", t, Value::Null);
            report.check("transport-agrees", t == v.ok, Value::Null);
        }
        _ => {
            return Err(Error::InvalidInput(
                "source and target must be of the same kind".into(),
            ))
        }
    }
    Ok(report_output(report))
}

fn generate(what: &Gen, seed: u64) -> Result<Output> {
    let json = match what {
        Gen::Graph {
            file,
            variant,
            allow_zero,
        } => {
            let g = io::parse_graph(&read(file)?, *allow_zero)?;
            let s = match variant {
                GraphVariant::Stars => models::graph_model_stars(&g)?,
                GraphVariant::Edges => models::graph_model_edges(&g)?,
            };
            io::tunnel_system_json(&s)
        }
        Gen::Interval { n, variant } => {
            let v = match variant {
                IntervalVariant::Hull => models::IntervalVariant::Hull,
                IntervalVariant::Intersection => models::IntervalVariant::Intersection,
            };
            io::tunnel_system_json(&interval_model(*n, v)?)
        }
        Gen::Locale { frame, weights } => {
            let frame = io::parse_frame(&read(frame)?)?;
            let weights = io::parse_weights(&read(weights)?)?;
            io::tunnel_system_json(&locale_model(&frame, &weights)?)
        }
        Gen::Random { kind, max } => {
            let mut rng = random::rng(seed);
            match kind {
                RandomKind::Tunnel => {
                    io::tunnel_system_json(&random::tunnel_system(&mut rng, *max))
                }
                RandomKind::Base => io::base_json(&random::base(&mut rng, *max, false)),
                RandomKind::Graded => io::base_json(&random::base(&mut rng, *max, true)),
                RandomKind::Graph => io::graph_json(&random::connected_graph(&mut rng, *max)),
            }
        }
    };
    Ok(Output::data(json))
}

fn frame_of(text: &str) -> Result<Frame> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if v.get("carrier").is_some() {
        return io::parse_frame(text);
    }
    by_weight!(text, loaded_frame(text))
}

fn loaded_frame<W: Weight>(text: &str) -> Result<Frame> {
    Ok(match load::<W>(text)? {
        Space::Tunnel(x) => x.frame,
        Space::Prolif(y) => y.scene_frame,
    })
}

fn oracle(which: OracleKind, name: &str, seed: u64, text: &str) -> Result<Output> {
    let (label, brute, fast) = match which {
        OracleKind::Points => {
            let frame = frame_of(text)?;
            let brute: BTreeSet<Vec<_>> =
                points_brute_force(&frame, DEFAULT_ORACLE_OPENS, DEFAULT_ORACLE_BUDGET)?
                    .into_iter()
                    .collect();
            let fast: BTreeSet<Vec<_>> = points(&frame)
                .iter()
                .map(|p| p.filter(&frame, DEFAULT_OPEN_BOUND))
                .collect::<Result<_>>()?;
            let agree = brute == fast;
            (
                "points",
                json!({ "filters": brute.len(), "agree_sets": agree }),
                json!({ "points": fast.len() }),
            )
        }
        OracleKind::ShortestPath => {
            let g = io::parse_graph(text, false)?;
            let x = TunnelFrameSpace::build(models::graph_model_stars(&g)?)?;
            let sp = models::shortest_paths(&g);
            let n = g.vertices().len();
            let idx: Vec<Option<usize>> =
                (0..n).map(|v| point_of(&x.frame, &x.points, v)).collect();
            let mut mismatches = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    let d = match (idx[u], idx[v]) {
                        (Some(p), Some(q)) => x.metric.get(p, q).clone(),
                        _ => framespace::weight::Ext::Infinite,
                    };
                    if d != *sp.get(u, v) {
                        mismatches.push(json!([
                            g.vertices()[u],
                            g.vertices()[v],
                            d.render(),
                            sp.get(u, v).render()
                        ]));
                    }
                }
            }
            let agree = mismatches.is_empty() && x.points.len() == n;
            (
                "shortest-path",
                json!({ "vertices": n, "agree_sets": agree, "mismatches": mismatches }),
                json!({ "points": x.points.len() }),
            )
        }
        OracleKind::Nilpotent => {
            let (exact, zero) = by_weight!(text, nilpotent_sides(text))?;
            (
                "nilpotent",
                json!({ "agree_sets": exact == zero, "exact_nilpotent": exact }),
                json!({ "spectrum_zero": zero }),
            )
        }
    };
    let agree = brute["agree_sets"].as_bool().unwrap_or(false);
    let verdict = if agree { "AGREE" } else { "DISAGREE" };
    let json = json!({
        "instance": name,
        "seed": seed,
        "oracle": label,
        "verdict": verdict,
        "brute": brute,
        "fast": fast,
    });
    Ok(Output {
        text: Some(format!("{verdict} {label}\n")),
        json,
        ok: agree,
        timings: String::new(),
    })
}

/// Exact nilpotency of the proliferative Laplacian, and whether its float
/// spectrum is zero within tolerance.
fn nilpotent_sides<W: Weight>(text: &str) -> Result<(bool, bool)> {
    let base: ProliferativeBase<W> = match io::input_kind(text)? {
        InputKind::Prolif => io::parse_base(text)?,
        _ => {
            let (_, y) = both_sides::<W>(text)?;
            y.base
        }
    };
    let m = prolif_laplacian(&base)?;
    let zero = spectrum(&m)?.iter().all(|z| z.norm() <= SPECTRUM_TOLERANCE);
    Ok((nilpotency_check(&m), zero))
}
