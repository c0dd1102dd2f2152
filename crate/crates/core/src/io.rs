//! JSON file formats. Scalars travel as strings (`"n/d"`, `"inf"`,
//! `"-log(n/d)"`) so every value stays exact.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::composition::Composition;
use crate::error::{invalid, Error, Result};
use crate::frame::{points, Carrier, Frame, FrameHom, Point, DEFAULT_OPEN_BOUND};
use crate::metric::MetricTable;
use crate::models::WeightedGraph;
use crate::prolif::{ProlifFrameSpace, ProliferativeBase};
use crate::space::members;
use crate::spectral::OperatorMatrix;
use crate::subset::Subset;
use crate::tunnel::{InterferenceEntry, TunnelFrameSpace, TunnelSystem};
use crate::weight::{parse_rational, Ext, Rational, Weight};

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn from_value<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("file records serialize")
}

/// Renders JSON compactly, or indented when `pretty`.
pub fn render_json(value: &Value, pretty: bool) -> String {
    let out = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    out.expect("values serialize")
}

// ---- frames ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct FrameFile {
    pub carrier: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opens: Option<Vec<Vec<String>>>,
    /// Alternative to `opens`: a family whose closure is the frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<String>>>,
}

impl FrameFile {
    /// Opens in canonical order when there are at most `bound` of them,
    /// otherwise the join-irreducible generators.
    pub fn from_frame(frame: &Frame, bound: usize) -> Self {
        let c = frame.carrier();
        let names = |v: Vec<Subset>| v.iter().map(|s| c.names(s)).collect();
        match frame.opens(bound) {
            Ok(opens) => Self {
                carrier: c.ids().to_vec(),
                opens: Some(names(opens)),
                generators: None,
            },
            Err(_) => Self {
                carrier: c.ids().to_vec(),
                opens: None,
                generators: Some(names(frame.join_irreducibles())),
            },
        }
    }

    pub fn to_frame(&self) -> Result<Frame> {
        let carrier = Carrier::new(self.carrier.clone())?;
        let subsets = |v: &Vec<Vec<String>>| {
            v.iter()
                .map(|ids| carrier.subset(ids))
                .collect::<Result<Vec<_>>>()
        };
        match (&self.opens, &self.generators) {
            (Some(o), None) => Frame::from_opens(carrier.clone(), &subsets(o)?),
            (None, Some(g)) => Frame::closure(carrier.clone(), &subsets(g)?),
            _ => Err(Error::Parse(
                "a frame file needs exactly one of \"opens\" or \"generators\"".into(),
            )),
        }
    }
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    parse_json::<FrameFile>(text)?.to_frame()
}

// ---- tunnel systems ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TunnelRecord {
    pub id: String,
    pub intensity: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CostRecord {
    pub id: String,
    pub cost: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Default)]
pub struct CompositionFile {
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub composites: Vec<CostRecord>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TunnelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    pub tunnels: Vec<TunnelRecord>,
    /// `[a, b, value]` or `[a, b, value, result]`.
    #[serde(default)]
    pub interference: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition: Option<CompositionFile>,
}

fn kind_of(tag: &Option<String>) -> &str {
    tag.as_deref().unwrap_or("rational")
}

fn check_kind<W: Weight>(tag: &Option<String>) -> Result<()> {
    match kind_of(tag) {
        k if k == W::KIND => Ok(()),
        "rational" | "neglog" => Err(invalid(format!(
            "file holds {} weights, expected {}",
            kind_of(tag),
            W::KIND
        ))),
        other => Err(Error::Parse(format!("unknown weight kind {other:?}"))),
    }
}

/// The scalar kind a tunnel, base or space file declares.
pub fn weight_kind(text: &str) -> Result<String> {
    #[derive(Deserialize)]
    struct Peek {
        #[serde(default)]
        weights: Option<String>,
    }
    let peek: Peek = parse_json(text)?;
    match kind_of(&peek.weights) {
        k @ ("rational" | "neglog") => Ok(k.to_string()),
        other => Err(Error::Parse(format!("unknown weight kind {other:?}"))),
    }
}

fn composition_from_file<W: Weight>(f: &CompositionFile) -> Result<Composition<W>> {
    let mut c = Composition::default();
    for [d, e, r] in &f.compose {
        if let Some(prev) = c.compose.insert((d.clone(), e.clone()), r.clone()) {
            if prev != *r {
                return Err(invalid(format!("({d}·{e}) given twice: {prev} and {r}")));
            }
        }
    }
    for rec in &f.composites {
        if c.composites
            .insert(rec.id.clone(), Ext::parse(&rec.cost)?)
            .is_some()
        {
            return Err(invalid(format!("composite {:?} declared twice", rec.id)));
        }
    }
    Ok(c)
}

fn composition_to_file<W: Weight>(c: &Composition<W>) -> CompositionFile {
    CompositionFile {
        compose: c
            .compose
            .iter()
            .map(|((d, e), r)| [d.clone(), e.clone(), r.clone()])
            .collect(),
        composites: c
            .composites
            .iter()
            .map(|(id, v)| CostRecord {
                id: id.clone(),
                cost: v.render(),
            })
            .collect(),
    }
}

impl TunnelFile {
    pub fn from_system<W: Weight>(s: &TunnelSystem<W>) -> Self {
        Self {
            weights: (W::KIND != "rational").then(|| W::KIND.to_string()),
            tunnels: s
                .tunnels()
                .iter()
                .map(|t| TunnelRecord {
                    id: t.id.clone(),
                    intensity: t.intensity.render(),
                })
                .collect(),
            interference: s
                .entries()
                .into_iter()
                .filter(|e| e.a != e.b)
                .map(|e| {
                    let mut row = vec![e.a, e.b, e.value.render()];
                    row.extend(e.result);
                    row
                })
                .collect(),
            composition: s.record().map(composition_to_file),
        }
    }

    pub fn to_system<W: Weight>(&self) -> Result<TunnelSystem<W>> {
        check_kind::<W>(&self.weights)?;
        let tunnels = self
            .tunnels
            .iter()
            .map(|t| Ok((t.id.clone(), Ext::parse(&t.intensity)?)))
            .collect::<Result<Vec<_>>>()?;
        let entries = self
            .interference
            .iter()
            .map(|row| match row.as_slice() {
                [a, b, v] => Ok(InterferenceEntry::new(a.clone(), b.clone(), Ext::parse(v)?)),
                [a, b, v, r] => Ok(InterferenceEntry::new(a.clone(), b.clone(), Ext::parse(v)?)
                    .with_result(r.clone())),
                _ => Err(Error::Parse(format!(
                    "interference entry {row:?} must have 3 or 4 fields"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let record = self
            .composition
            .as_ref()
            .map(composition_from_file)
            .transpose()?;
        TunnelSystem::new(tunnels, entries, record)
    }
}

pub fn parse_tunnel_system<W: Weight>(text: &str) -> Result<TunnelSystem<W>> {
    parse_json::<TunnelFile>(text)?.to_system()
}

pub fn tunnel_system_json<W: Weight>(s: &TunnelSystem<W>) -> Value {
    to_value(&TunnelFile::from_system(s))
}

// ---- proliferative bases ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct BaseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    pub distinctions: Vec<CostRecord>,
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
    /// Costs of composites that are not distinctions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub composites: Vec<CostRecord>,
}

impl BaseFile {
    pub fn from_base<W: Weight>(b: &ProliferativeBase<W>) -> Self {
        let c = composition_to_file(b.composition());
        Self {
            weights: (W::KIND != "rational").then(|| W::KIND.to_string()),
            distinctions: b
                .distinctions()
                .iter()
                .map(|d| CostRecord {
                    id: d.id.clone(),
                    cost: d.cost.render(),
                })
                .collect(),
            compose: c.compose,
            composites: c.composites,
        }
    }

    pub fn to_base<W: Weight>(&self) -> Result<ProliferativeBase<W>> {
        check_kind::<W>(&self.weights)?;
        let distinctions = self
            .distinctions
            .iter()
            .map(|d| Ok((d.id.clone(), Ext::parse(&d.cost)?)))
            .collect::<Result<Vec<_>>>()?;
        let c = composition_from_file(&CompositionFile {
            compose: self.compose.clone(),
            composites: self.composites.clone(),
        })?;
        ProliferativeBase::new(distinctions, c)
    }
}

pub fn parse_base<W: Weight>(text: &str) -> Result<ProliferativeBase<W>> {
    parse_json::<BaseFile>(text)?.to_base()
}

pub fn base_json<W: Weight>(b: &ProliferativeBase<W>) -> Value {
    to_value(&BaseFile::from_base(b))
}

// ---- built spaces ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub generator: Vec<String>,
    pub members: Vec<String>,
}

/// A built frame-space with every carried table, so a space can be
/// re-read without rebuilding and compared against its own data.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SpaceFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    /// The tunnel system or proliferative base.
    pub data: Value,
    pub frame: FrameFile,
    pub points: Vec<PointRecord>,
    pub raw: Vec<Vec<String>>,
    pub metric: Vec<Vec<String>>,
}

fn table_strings<W: Weight>(m: &MetricTable<W>) -> Vec<Vec<String>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(Ext::render).collect())
        .collect()
}

fn table_from_strings<W: Weight>(
    rows: &[Vec<String>],
    n: usize,
    what: &str,
) -> Result<MetricTable<W>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!(
            "{what} table must be {n}×{n} for {n} points"
        )));
    }
    let entries = rows
        .iter()
        .map(|r| r.iter().map(|v| Ext::parse(v)).collect())
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricTable::new(entries))
}

fn point_records(frame: &Frame, pts: &[Point]) -> Vec<PointRecord> {
    let c = frame.carrier();
    pts.iter()
        .zip(members(frame, pts))
        .map(|(p, m)| PointRecord {
            generator: c.names(p.generator()),
            members: m.iter().map(|&x| c.ids()[x].clone()).collect(),
        })
        .collect()
}

fn points_from_records(frame: &Frame, recs: &[PointRecord]) -> Result<Vec<Point>> {
    let all = points(frame);
    recs.iter()
        .map(|r| {
            let g = frame.carrier().subset(&r.generator)?;
            all.iter()
                .find(|p| *p.generator() == g)
                .cloned()
                .ok_or_else(|| {
                    invalid(format!(
                        "{} does not generate a point",
                        frame.carrier().label(&g)
                    ))
                })
        })
        .collect()
}

impl SpaceFile {
    fn carried(
        kind: &str,
        weights: Option<String>,
        data: Value,
        frame: &Frame,
        pts: &[Point],
        raw: Vec<Vec<String>>,
        metric: Vec<Vec<String>>,
    ) -> Self {
        Self {
            kind: kind.to_string(),
            weights,
            data,
            frame: FrameFile::from_frame(frame, DEFAULT_OPEN_BOUND),
            points: point_records(frame, pts),
            raw,
            metric,
        }
    }

    pub fn from_tunnel<W: Weight>(x: &TunnelFrameSpace<W>) -> Self {
        let weights = (W::KIND != "rational").then(|| W::KIND.to_string());
        Self::carried(
            "tunnel",
            weights,
            tunnel_system_json(&x.system),
            &x.frame,
            &x.points,
            table_strings(&x.raw),
            table_strings(&x.metric),
        )
    }

    pub fn from_prolif<W: Weight>(y: &ProlifFrameSpace<W>) -> Self {
        let weights = (W::KIND != "rational").then(|| W::KIND.to_string());
        Self::carried(
            "prolif",
            weights,
            base_json(&y.base),
            &y.scene_frame,
            &y.foci,
            table_strings(&y.raw),
            table_strings(&y.metric),
        )
    }

    pub fn to_tunnel<W: Weight>(&self) -> Result<TunnelFrameSpace<W>> {
        if self.kind != "tunnel" {
            return Err(invalid(format!(
                "expected a tunnel space, found kind {:?}",
                self.kind
            )));
        }
        check_kind::<W>(&self.weights)?;
        let system = from_value::<TunnelFile>(self.data.clone())?.to_system()?;
        let frame = self.frame.to_frame()?;
        let pts = points_from_records(&frame, &self.points)?;
        let raw = table_from_strings(&self.raw, pts.len(), "raw")?;
        let metric = table_from_strings(&self.metric, pts.len(), "metric")?;
        Ok(TunnelFrameSpace {
            system,
            frame,
            points: pts,
            raw,
            metric,
        })
    }

    pub fn to_prolif<W: Weight>(&self) -> Result<ProlifFrameSpace<W>> {
        if self.kind != "prolif" {
            return Err(invalid(format!(
                "expected a proliferative space, found kind {:?}",
                self.kind
            )));
        }
        check_kind::<W>(&self.weights)?;
        let base = from_value::<BaseFile>(self.data.clone())?.to_base()?;
        let scene_frame = self.frame.to_frame()?;
        let foci = points_from_records(&scene_frame, &self.points)?;
        let raw = table_from_strings(&self.raw, foci.len(), "raw")?;
        let metric = table_from_strings(&self.metric, foci.len(), "metric")?;
        Ok(ProlifFrameSpace {
            base,
            scene_frame,
            foci,
            raw,
            metric,
        })
    }
}

/// What a JSON input file holds, judged by its top-level keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Tunnel,
    Prolif,
    TunnelSpace,
    ProlifSpace,
}

pub fn input_kind(text: &str) -> Result<InputKind> {
    let v: Value = parse_json(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    match (
        obj.get("kind").and_then(Value::as_str),
        obj.contains_key("tunnels"),
        obj.contains_key("distinctions"),
    ) {
        (Some("tunnel"), _, _) => Ok(InputKind::TunnelSpace),
        (Some("prolif"), _, _) => Ok(InputKind::ProlifSpace),
        (None, true, false) => Ok(InputKind::Tunnel),
        (None, false, true) => Ok(InputKind::Prolif),
        _ => Err(Error::Parse(
            "cannot tell the file kind: expected \"tunnels\", \"distinctions\" or \"kind\"".into(),
        )),
    }
}

pub fn parse_space_file(text: &str) -> Result<SpaceFile> {
    parse_json(text)
}

// ---- matrices and spectra ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub basis: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

pub fn matrix_json<W: Weight>(m: &OperatorMatrix<W>) -> Value {
    to_value(&MatrixFile {
        basis: m.basis.clone(),
        entries: m
            .entries
            .iter()
            .map(|r| r.iter().map(Weight::render).collect())
            .collect(),
    })
}

pub fn parse_matrix<W: Weight>(text: &str) -> Result<OperatorMatrix<W>> {
    let f: MatrixFile = parse_json(text)?;
    let entries = f
        .entries
        .iter()
        .map(|r| r.iter().map(|x| W::parse(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    OperatorMatrix::new(f.basis, entries)
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn spectrum_json(values: &[Complex64]) -> Value {
    Value::Array(
        values
            .iter()
            .map(|z| serde_json::json!({ "re": round12(z.re), "im": round12(z.im) }))
            .collect(),
    )
}

// ---- graphs and weights ----

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 3]>,
}

pub fn parse_graph(text: &str, allow_zero: bool) -> Result<WeightedGraph> {
    let f: GraphFile = parse_json(text)?;
    let edges = f
        .edges
        .into_iter()
        .map(|[u, v, w]| Ok((u, v, parse_rational(&w)?)))
        .collect::<Result<Vec<_>>>()?;
    WeightedGraph::new(f.vertices, edges, allow_zero)
}

pub fn graph_json(g: &WeightedGraph) -> Value {
    to_value(&GraphFile {
        vertices: g.vertices().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|(u, v, w)| {
                [
                    g.vertices()[*u].clone(),
                    g.vertices()[*v].clone(),
                    w.render(),
                ]
            })
            .collect(),
    })
}

/// A `{"element": "n/d"}` map of carrier weights.
pub fn parse_weights(text: &str) -> Result<BTreeMap<String, Rational>> {
    let raw: BTreeMap<String, String> = parse_json(text)?;
    raw.into_iter()
        .map(|(k, v)| Ok((k, parse_rational(&v)?)))
        .collect()
}

// ---- morphisms ----

/// A morphism between two spaces of the same kind, given by where each
/// carrier element of the source goes in the target.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct MorphismFile {
    pub source: Value,
    pub target: Value,
    pub map: BTreeMap<String, String>,
}

/// The point map induced by a carrier-element map: the point of `x` goes to
/// the point of `map[x]`. Every source element in a point must agree.
pub fn induced_point_map(
    src_frame: &Frame,
    src_points: &[Point],
    dst_frame: &Frame,
    dst_points: &[Point],
    map: &BTreeMap<String, String>,
) -> Result<Vec<usize>> {
    let (sc, dc) = (src_frame.carrier(), dst_frame.carrier());
    let mut out = vec![None; src_points.len()];
    for (x, y) in map {
        let xi = sc
            .index_of(x)
            .ok_or_else(|| invalid(format!("map names unknown source element {x:?}")))?;
        let yi = dc
            .index_of(y)
            .ok_or_else(|| invalid(format!("map names unknown target element {y:?}")))?;
        let (Some(p), Some(q)) = (
            crate::space::point_of(src_frame, src_points, xi),
            crate::space::point_of(dst_frame, dst_points, yi),
        ) else {
            continue;
        };
        match out[p] {
            Some(prev) if prev != q => {
                return Err(invalid(format!(
                    "map sends elements of one source point to two target points (via {x:?})"
                )));
            }
            _ => out[p] = Some(q),
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(p, q)| q.ok_or_else(|| invalid(format!("map leaves source point {p} unassigned"))))
        .collect()
}

/// The frame homomorphism `dst.frame → src.frame` whose point map is the
/// one induced by `map`.
pub fn morphism_hom(
    src_frame: &Frame,
    src_points: &[Point],
    dst_frame: &Frame,
    dst_points: &[Point],
    map: &BTreeMap<String, String>,
) -> Result<FrameHom> {
    let pm = induced_point_map(src_frame, src_points, dst_frame, dst_points, map)?;
    FrameHom::pullback(dst_frame.clone(), src_frame.clone(), &pm)
}
