//! The functors between tunnel and proliferative frame-spaces.
//!
//! Both functors relabel: tunnels become distinctions with cost equal to
//! intensity, and the frame, points and metric tables are carried over
//! unchanged. Composition data travels through [`Composition`], so the round
//! trips are exact structural identities.

use std::fmt::Write as _;

use crate::composition::{derive_interference, synthesize};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameHom, Point};
use crate::metric::MetricTable;
use crate::prolif::{ProlifFrameSpace, ProliferativeBase};
use crate::space::{check_morphism, FrameSpace};
use crate::tunnel::{InterferenceEntry, TunnelFrameSpace, TunnelSystem};
use crate::weight::Weight;

/// The bijection between tunnels and distinctions. Frames and points are
/// shared, so the identity on opens and points is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    /// `(tunnel, distinction)` pairs in tunnel order.
    pub pairs: Vec<(String, String)>,
}

impl Correspondence {
    fn identity(ids: &[String]) -> Self {
        Self {
            pairs: ids.iter().map(|id| (id.clone(), id.clone())).collect(),
        }
    }

    pub fn distinction_of(&self, tunnel: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(t, _)| t == tunnel)
            .map(|(_, d)| d.as_str())
    }

    pub fn tunnel_of(&self, distinction: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(_, d)| d == distinction)
            .map(|(t, _)| t.as_str())
    }

    /// Checks totality in both directions and `Λ(T) = C(F(T))`.
    pub fn check<W: Weight>(
        &self,
        system: &TunnelSystem<W>,
        base: &ProliferativeBase<W>,
    ) -> std::result::Result<(), String> {
        if self.pairs.len() != system.len() || self.pairs.len() != base.len() {
            return Err(format!(
                "{} pairs for {} tunnels and {} distinctions",
                self.pairs.len(),
                system.len(),
                base.len()
            ));
        }
        let mut seen = vec![false; base.len()];
        for (t, d) in &self.pairs {
            let ti = system
                .index_of(t)
                .ok_or_else(|| format!("unknown tunnel {t:?}"))?;
            let di = base
                .index_of(d)
                .ok_or_else(|| format!("unknown distinction {d:?}"))?;
            if std::mem::replace(&mut seen[di], true) {
                return Err(format!("distinction {d:?} matched twice"));
            }
            let (lambda, cost) = (&system.tunnels()[ti].intensity, base.cost(di));
            if lambda != cost {
                return Err(format!("Λ({t}) = {lambda} but C({d}) = {cost}"));
            }
        }
        Ok(())
    }
}

/// Tunnel space to proliferative space: `D = tunnels`, `C = Λ`, and the
/// composition the system carries.
pub fn functor_f<W: Weight>(
    space: &TunnelFrameSpace<W>,
) -> Result<(ProlifFrameSpace<W>, Correspondence)> {
    let system = &space.system;
    let distinctions = system.ids().into_iter().zip(system.intensities()).collect();
    let base =
        ProliferativeBase::new(distinctions, system.composition()).map_err(relabel_failure)?;
    let corr = Correspondence::identity(&system.ids());
    let out = ProlifFrameSpace {
        base,
        scene_frame: space.frame.clone(),
        foci: space.points.clone(),
        raw: space.raw.clone(),
        metric: space.metric.clone(),
    };
    Ok((out, corr))
}

/// Proliferative space to tunnel space: interference is the cheaper of the
/// two composition orders, and the composition itself rides along as the
/// system's record whenever interference alone would not reproduce it.
pub fn functor_g<W: Weight>(
    space: &ProlifFrameSpace<W>,
) -> Result<(TunnelFrameSpace<W>, Correspondence)> {
    let base = &space.base;
    let (ids, costs) = (base.ids(), base.costs());
    let interference = derive_interference(&ids, &costs, base.composition());
    let record = (synthesize(&ids, &interference) != *base.composition())
        .then(|| base.composition().clone());
    let entries = interference
        .iter()
        .map(|(&(i, j), e)| InterferenceEntry {
            a: ids[i].clone(),
            b: ids[j].clone(),
            value: e.value.clone(),
            result: e.result.map(|r| ids[r].clone()),
        })
        .collect();
    let tunnels = ids.iter().cloned().zip(costs).collect();
    let system = TunnelSystem::new(tunnels, entries, record).map_err(relabel_failure)?;
    let out = TunnelFrameSpace {
        system,
        frame: space.scene_frame.clone(),
        points: space.foci.clone(),
        raw: space.raw.clone(),
        metric: space.metric.clone(),
    };
    Ok((out, Correspondence::identity(&ids)))
}

fn relabel_failure(e: Error) -> Error {
    Error::InternalInconsistency(format!("relabeling produced an invalid object: {e}"))
}

/// One named comparison inside a round-trip report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub name: &'static str,
    pub diffs: Vec<String>,
}

impl Comparison {
    pub fn ok(&self) -> bool {
        self.diffs.is_empty()
    }
}

/// Outcome of a round-trip check. `pass` covers well-formedness and both
/// composite functors; regenerated-frame equality is reported on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTripReport {
    pub pass: bool,
    pub comparisons: Vec<Comparison>,
    /// Whether the frame rebuilt from the image's own data equals the
    /// carried frame.
    pub regenerated_frame_equal: bool,
}

impl RoundTripReport {
    fn new(comparisons: Vec<Comparison>, regenerated_frame_equal: bool) -> Self {
        let pass = comparisons.iter().all(Comparison::ok);
        Self {
            pass,
            comparisons,
            regenerated_frame_equal,
        }
    }

    pub fn diffs(&self) -> impl Iterator<Item = String> + '_ {
        self.comparisons
            .iter()
            .flat_map(|c| c.diffs.iter().map(move |d| format!("{}: {d}", c.name)))
    }
}

/// Verifies `G(F(X)) = X` and `F(G(F(X))) = F(X)` structurally. The input
/// is first compared against a fresh build from its own system, so a space
/// whose carried tables were tampered with fails with a named diff.
pub fn check_round_trip<W: Weight>(space: &TunnelFrameSpace<W>) -> Result<RoundTripReport> {
    let rebuilt = TunnelFrameSpace::build(space.system.clone())?;
    let (y, corr) = functor_f(space)?;
    let (back, _) = functor_g(&y)?;
    let (y2, _) = functor_f(&back)?;
    let mut corr_diffs = Vec::new();
    if let Err(e) = corr.check(&space.system, &y.base) {
        corr_diffs.push(e);
    }
    let regenerated = y.base.scene_frame() == space.frame;
    Ok(RoundTripReport::new(
        vec![
            Comparison {
                name: "well-formed",
                diffs: diff_tunnel_spaces(&rebuilt, space),
            },
            Comparison {
                name: "correspondence",
                diffs: corr_diffs,
            },
            Comparison {
                name: "G∘F",
                diffs: diff_tunnel_spaces(space, &back),
            },
            Comparison {
                name: "F∘G",
                diffs: diff_prolif_spaces(&y, &y2),
            },
        ],
        regenerated,
    ))
}

/// The dual check for proliferative spaces: `F(G(Y)) = Y` and
/// `G(F(G(Y))) = G(Y)`.
pub fn check_round_trip_prolif<W: Weight>(space: &ProlifFrameSpace<W>) -> Result<RoundTripReport> {
    let rebuilt = ProlifFrameSpace::build(space.base.clone())?;
    let (x, corr) = functor_g(space)?;
    let (back, _) = functor_f(&x)?;
    let (x2, _) = functor_g(&back)?;
    let mut corr_diffs = Vec::new();
    if let Err(e) = corr.check(&x.system, &space.base) {
        corr_diffs.push(e);
    }
    let regenerated = x.system.generate_frame() == space.scene_frame;
    Ok(RoundTripReport::new(
        vec![
            Comparison {
                name: "well-formed",
                diffs: diff_prolif_spaces(&rebuilt, space),
            },
            Comparison {
                name: "correspondence",
                diffs: corr_diffs,
            },
            Comparison {
                name: "F∘G",
                diffs: diff_prolif_spaces(space, &back),
            },
            Comparison {
                name: "G∘F",
                diffs: diff_tunnel_spaces(&x, &x2),
            },
        ],
        regenerated,
    ))
}

/// Structural differences between two tunnel spaces, one line per entry.
pub fn diff_tunnel_spaces<W: Weight>(
    a: &TunnelFrameSpace<W>,
    b: &TunnelFrameSpace<W>,
) -> Vec<String> {
    let mut out = Vec::new();
    let (sa, sb) = (&a.system, &b.system);
    if sa.tunnels() != sb.tunnels() {
        let show = |s: &TunnelSystem<W>| {
            s.tunnels()
                .iter()
                .map(|t| format!("{}={}", t.id, t.intensity))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push(format!("tunnels [{}] vs [{}]", show(sa), show(sb)));
    }
    let (ea, eb) = (sa.entries(), sb.entries());
    for e in &ea {
        match eb.iter().find(|f| f.a == e.a && f.b == e.b) {
            None => out.push(format!(
                "interference ({}, {}) = {} missing on the right",
                e.a, e.b, e.value
            )),
            Some(f) if f != e => out.push(format!(
                "interference ({}, {}): {}{} vs {}{}",
                e.a,
                e.b,
                e.value,
                result_suffix(&e.result),
                f.value,
                result_suffix(&f.result)
            )),
            _ => {}
        }
    }
    for f in &eb {
        if !ea.iter().any(|e| e.a == f.a && e.b == f.b) {
            out.push(format!(
                "interference ({}, {}) = {} missing on the left",
                f.a, f.b, f.value
            ));
        }
    }
    if sa.record() != sb.record() {
        out.push("composition records differ".to_string());
    }
    diff_carried(
        &mut out,
        (&a.frame, &a.points, &a.raw, &a.metric),
        (&b.frame, &b.points, &b.raw, &b.metric),
    );
    out
}

/// Structural differences between two proliferative spaces.
pub fn diff_prolif_spaces<W: Weight>(
    a: &ProlifFrameSpace<W>,
    b: &ProlifFrameSpace<W>,
) -> Vec<String> {
    let mut out = Vec::new();
    let (ba, bb) = (&a.base, &b.base);
    if ba.distinctions() != bb.distinctions() {
        out.push("distinctions or costs differ".to_string());
    }
    let (ca, cb) = (ba.composition(), bb.composition());
    for (k, r) in &ca.compose {
        match cb.compose.get(k) {
            Some(s) if s == r => {}
            Some(s) => out.push(format!("compose ({}·{}): {r} vs {s}", k.0, k.1)),
            None => out.push(format!(
                "compose ({}·{}) = {r} missing on the right",
                k.0, k.1
            )),
        }
    }
    for (k, s) in &cb.compose {
        if !ca.compose.contains_key(k) {
            out.push(format!(
                "compose ({}·{}) = {s} missing on the left",
                k.0, k.1
            ));
        }
    }
    if ca.composites != cb.composites {
        out.push("composite tables differ".to_string());
    }
    diff_carried(
        &mut out,
        (&a.scene_frame, &a.foci, &a.raw, &a.metric),
        (&b.scene_frame, &b.foci, &b.raw, &b.metric),
    );
    out
}

fn result_suffix(r: &Option<String>) -> String {
    r.as_ref().map(|r| format!(" → {r}")).unwrap_or_default()
}

type Carried<'a, W> = (
    &'a Frame,
    &'a [Point],
    &'a MetricTable<W>,
    &'a MetricTable<W>,
);

fn diff_carried<W: Weight>(out: &mut Vec<String>, a: Carried<'_, W>, b: Carried<'_, W>) {
    let (fa, pa, ra, ma) = a;
    let (fb, pb, rb, mb) = b;
    if fa.carrier() != fb.carrier() {
        out.push("carriers differ".to_string());
        return;
    }
    if fa != fb {
        let c = fa.carrier();
        let mut line = String::from("frames differ at minimal opens:");
        for x in 0..fa.width() {
            let (u, v) = (fa.minimal_open(x), fb.minimal_open(x));
            if u != v {
                let show = |s: Option<&crate::subset::Subset>| {
                    s.map_or("none".to_string(), |s| c.label(s))
                };
                let _ = write!(line, " {} {} vs {};", c.ids()[x], show(u), show(v));
            }
        }
        out.push(line);
    }
    if pa != pb {
        out.push(format!(
            "point lists differ ({} vs {} points)",
            pa.len(),
            pb.len()
        ));
        return;
    }
    for (name, x, y) in [("raw", ra, rb), ("metric", ma, mb)] {
        if x.size() != y.size() {
            out.push(format!(
                "{name} tables have sizes {} vs {}",
                x.size(),
                y.size()
            ));
            continue;
        }
        for (i, j) in x.differences(y) {
            out.push(format!(
                "{name}[{i}][{j}]: {} vs {}",
                x.get(i, j),
                y.get(i, j)
            ));
        }
    }
}

/// Direction of a transported morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    TunnelToProlif,
    ProlifToTunnel,
}

/// Reinterprets a frame homomorphism in the other category. Frames are
/// carried unchanged by both functors, so the map itself is unchanged.
pub fn transport_morphism(hom: &FrameHom, _direction: Direction) -> FrameHom {
    hom.clone()
}

/// Runs the morphism check on both sides of the equivalence and returns the
/// two verdicts, tunnel side first.
pub fn check_transported<W: Weight>(
    src: &TunnelFrameSpace<W>,
    dst: &TunnelFrameSpace<W>,
    hom: &FrameHom,
) -> Result<(bool, bool)> {
    let tunnel = check_morphism(src, dst, hom)?.ok;
    let (fs, _) = functor_f(src)?;
    let (fd, _) = functor_f(dst)?;
    let moved = transport_morphism(hom, Direction::TunnelToProlif);
    let prolif = check_morphism(&fs, &fd, &moved)?.ok;
    debug_assert_eq!(fs.frame(), src.frame());
    Ok((tunnel, prolif))
}
