//! Pieces shared by tunnel and proliferative frame-spaces: threshold sets,
//! point membership, raw infimum tables and the non-expansive morphism check.

use std::collections::BTreeSet;

use crate::error::{invalid, Result};
use crate::frame::{Frame, FrameHom, Point, Verdict};
use crate::metric::MetricTable;
use crate::subset::Subset;
use crate::weight::{Ext, Weight};

/// Threshold values at which the strict sublevel sets `{v < ε}` of a finite
/// family of values change: every distinct positive finite value, plus one
/// value above the largest finite one.
pub fn thresholds<'a, W: Weight>(values: impl IntoIterator<Item = &'a Ext<W>>) -> Vec<W> {
    let finite: BTreeSet<&W> = values.into_iter().filter_map(Ext::finite).collect();
    let mut out: Vec<W> = finite
        .iter()
        .filter(|w| !w.is_zero())
        .map(|w| (*w).clone())
        .collect();
    if let Some(max) = finite.last() {
        out.push(max.above());
    }
    out
}

/// Carrier elements "in" each point: `x ∈ p` iff the minimal open of `x`
/// belongs to the filter `p`.
pub fn members(frame: &Frame, points: &[Point]) -> Vec<Vec<usize>> {
    points
        .iter()
        .map(|p| {
            (0..frame.width())
                .filter(|&x| frame.minimal_open(x).is_some_and(|m| p.contains(m)))
                .collect()
        })
        .collect()
}

/// The raw infimum table: `d(p, q) = min { value(x, y) : x ∈ p, y ∈ q }`,
/// `inf` for an empty minimum, zero on the diagonal.
pub fn raw_table<W: Weight>(
    members: &[Vec<usize>],
    value: impl Fn(usize, usize) -> Ext<W>,
) -> MetricTable<W> {
    MetricTable::from_fn(members.len(), |p, q| {
        if p == q {
            return Ext::zero();
        }
        members[p]
            .iter()
            .flat_map(|&x| members[q].iter().map(move |&y| (x, y)))
            .map(|(x, y)| value(x, y))
            .min()
            .unwrap_or(Ext::Infinite)
    })
}

/// A frame with its points and a closed metric on them.
pub trait FrameSpace<W: Weight> {
    fn frame(&self) -> &Frame;
    fn points(&self) -> &[Point];
    fn metric(&self) -> &MetricTable<W>;
}

/// Checks that `hom: frame(dst) → frame(src)` is a frame homomorphism whose
/// induced point map `src → dst` does not increase distances.
pub fn check_morphism<W: Weight, S: FrameSpace<W>, T: FrameSpace<W>>(
    src: &S,
    dst: &T,
    hom: &FrameHom,
) -> Result<Verdict> {
    if hom.domain() != dst.frame() || hom.codomain() != src.frame() {
        return Err(invalid(
            "homomorphism must run from the target frame to the source frame",
        ));
    }
    let verdict = hom.check();
    if !verdict.ok {
        return Ok(verdict);
    }
    let map = hom.point_map()?;
    let (ds, dd) = (src.metric(), dst.metric());
    let n = src.points().len();
    for p in 0..n {
        for q in 0..n {
            let image = dd.get(map[p], map[q]);
            if image > ds.get(p, q) {
                return Ok(Verdict::fail(format!(
                    "points {p},{q} at distance {} map to points {},{} at distance {image}",
                    ds.get(p, q),
                    map[p],
                    map[q]
                )));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Checks that every basic Stone open contains a metric ball around each of
/// its points. The smallest Stone open holding `p` is `{q : q ∋ gen(p)}`,
/// and a ball below the least positive distance from `p` is its
/// zero-distance class, so only those two sets need comparing.
pub fn check_stone_balls<W: Weight, S: FrameSpace<W>>(space: &S) -> Verdict {
    let (points, d) = (space.points(), space.metric());
    let zero = Ext::zero();
    for (p, pt) in points.iter().enumerate() {
        for (q, qt) in points.iter().enumerate() {
            if *d.get(p, q) == zero && !qt.generator().is_subset(pt.generator()) {
                return Verdict::fail(format!(
                    "point {q} is at distance 0 from point {p} but outside its smallest Stone open"
                ));
            }
        }
    }
    Verdict::pass()
}

/// Indices of the points whose generator contains carrier element `x`.
pub fn points_containing(points: &[Point], x: usize) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.generator().contains(x))
        .map(|(i, _)| i)
        .collect()
}

/// The point whose generator is the minimal open of `x`, if `x` lies in the
/// frame's top element.
pub fn point_of(frame: &Frame, points: &[Point], x: usize) -> Option<usize> {
    let m: &Subset = frame.minimal_open(x)?;
    points.iter().position(|p| p.generator() == m)
}
