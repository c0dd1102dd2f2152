//! Finite frames as families of subsets closed under union and intersection.
//!
//! A finite family of subsets that contains the empty set, its own union and
//! is closed under pairwise union and intersection is the same thing as the
//! family of down-sets of a preorder on the union. The preorder is recorded
//! through the minimal open `min(x)` of every element `x`: a subset `s` of the
//! top element is open iff `min(x) ⊆ s` for every `x ∈ s`. This keeps frames
//! with very many opens (a discrete frame on 150 elements has 2^150) cheap to
//! store and query. Explicit enumeration is available under a bound.

use std::collections::{BTreeMap, HashSet};

use crate::error::{invalid, Error, Result};
use crate::subset::{canonical_sort, Subset};

/// Default cap on explicitly enumerated opens.
pub const DEFAULT_OPEN_BOUND: usize = 1 << 16;

/// Largest frame (in opens) that [`points_brute_force`] accepts by default.
pub const DEFAULT_ORACLE_OPENS: usize = 32;

/// Search-node budget of [`points_brute_force`].
pub const DEFAULT_ORACLE_BUDGET: usize = 1 << 20;

/// An ordered set of element identifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Carrier {
    ids: Vec<String>,
}

impl Carrier {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        if ids.is_empty() {
            return Err(invalid("empty carrier"));
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(invalid(format!("duplicate carrier element {id:?}")));
            }
        }
        Ok(Self { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Builds a subset from identifiers, rejecting unknown ones.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Subset> {
        let mut s = Subset::empty(self.len());
        for id in ids {
            let id = id.as_ref();
            let i = self
                .index_of(id)
                .ok_or_else(|| invalid(format!("{id:?} is not a carrier element")))?;
            s.insert(i);
        }
        Ok(s)
    }

    pub fn names(&self, s: &Subset) -> Vec<String> {
        s.iter().map(|i| self.ids[i].clone()).collect()
    }

    /// `{a,b}` style label for a subset.
    pub fn label(&self, s: &Subset) -> String {
        format!("{{{}}}", self.names(s).join(","))
    }
}

/// A finite frame of subsets of a carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    carrier: Carrier,
    /// `minimal[x]` is the smallest open containing `x`, or `None` when `x`
    /// lies outside the top element.
    minimal: Vec<Option<Subset>>,
}

impl Frame {
    /// Smallest frame containing `generators`, the empty set and their union.
    ///
    /// The minimal open around `x` is the intersection of the generators
    /// containing `x`: every open is a union of finite intersections of
    /// generators, so any open containing `x` contains that intersection.
    pub fn closure(carrier: Carrier, generators: &[Subset]) -> Result<Self> {
        let n = carrier.len();
        if let Some(g) = generators.iter().find(|g| g.width() != n) {
            return Err(invalid(format!(
                "generator over {} elements does not fit a carrier of {n}",
                g.width()
            )));
        }
        let minimal = (0..n)
            .map(|x| {
                generators
                    .iter()
                    .filter(|g| g.contains(x))
                    .fold(None, |acc: Option<Subset>, g| {
                        Some(match acc {
                            Some(m) => m.intersection(g),
                            None => g.clone(),
                        })
                    })
            })
            .collect();
        Ok(Self { carrier, minimal })
    }

    /// Accepts an explicit family of opens after checking that it is a frame.
    pub fn from_opens(carrier: Carrier, opens: &[Subset]) -> Result<Self> {
        let n = carrier.len();
        if let Some(o) = opens.iter().find(|o| o.width() != n) {
            return Err(invalid(format!(
                "open of width {} over carrier of {n}",
                o.width()
            )));
        }
        let family: HashSet<&Subset> = opens.iter().collect();
        if !family.contains(&Subset::empty(n)) {
            return Err(invalid("family does not contain the empty set"));
        }
        let top = opens.iter().fold(Subset::empty(n), |acc, o| acc.union(o));
        if !family.contains(&top) {
            return Err(invalid("family does not contain its union"));
        }
        for a in opens {
            for b in opens {
                if !family.contains(&a.union(b)) {
                    return Err(invalid(format!(
                        "{} ∪ {} is missing",
                        carrier.label(a),
                        carrier.label(b)
                    )));
                }
                if !family.contains(&a.intersection(b)) {
                    return Err(invalid(format!(
                        "{} ∩ {} is missing",
                        carrier.label(a),
                        carrier.label(b)
                    )));
                }
            }
        }
        Self::closure(carrier, opens)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn width(&self) -> usize {
        self.carrier.len()
    }

    pub fn bottom(&self) -> Subset {
        Subset::empty(self.width())
    }

    pub fn top(&self) -> Subset {
        Subset::from_indices(
            self.width(),
            (0..self.width()).filter(|&x| self.minimal[x].is_some()),
        )
    }

    /// Smallest open containing carrier element `x`.
    pub fn minimal_open(&self, x: usize) -> Option<&Subset> {
        self.minimal.get(x).and_then(Option::as_ref)
    }

    pub fn is_open(&self, s: &Subset) -> bool {
        s.width() == self.width()
            && s.iter().all(|x| match &self.minimal[x] {
                Some(m) => m.is_subset(s),
                None => false,
            })
    }

    /// Largest open contained in `s`.
    pub fn interior(&self, s: &Subset) -> Subset {
        Subset::from_indices(
            self.width(),
            s.iter()
                .filter(|&x| matches!(&self.minimal[x], Some(m) if m.is_subset(s))),
        )
    }

    /// The join-irreducible opens, in canonical order.
    pub fn join_irreducibles(&self) -> Vec<Subset> {
        let mut v: Vec<Subset> = self.minimal.iter().flatten().cloned().collect();
        canonical_sort(&mut v);
        v
    }

    /// All opens in canonical order, or `OracleBoundExceeded` past `bound`.
    pub fn opens(&self, bound: usize) -> Result<Vec<Subset>> {
        let mut seen: HashSet<Subset> = HashSet::new();
        seen.insert(self.bottom());
        for j in self.join_irreducibles() {
            let grown: Vec<Subset> = seen.iter().map(|o| o.union(&j)).collect();
            seen.extend(grown);
            if seen.len() > bound {
                return Err(Error::OracleBoundExceeded(format!(
                    "frame has more than {bound} opens"
                )));
            }
        }
        let mut v: Vec<Subset> = seen.into_iter().collect();
        canonical_sort(&mut v);
        Ok(v)
    }

    /// `¬a`: the union of all opens disjoint from `a`.
    pub fn heyting_negation(&self, a: &Subset) -> Result<Subset> {
        if !self.is_open(a) {
            return Err(invalid(format!("{} is not an open", self.carrier.label(a))));
        }
        Ok(Subset::from_indices(
            self.width(),
            (0..self.width()).filter(|&x| matches!(&self.minimal[x], Some(m) if m.is_disjoint(a))),
        ))
    }

    /// Opens with `¬¬a = a`, in canonical order.
    pub fn regular_elements(&self, bound: usize) -> Result<Vec<Subset>> {
        let mut out = Vec::new();
        for a in self.opens(bound)? {
            let nn = self.heyting_negation(&self.heyting_negation(&a)?)?;
            if nn == a {
                out.push(a);
            }
        }
        Ok(out)
    }
}

/// Explicit closure of a generator family by fixpoint iteration over
/// pairwise unions and intersections. Exponential; intended as an oracle.
pub fn closure_fixpoint(width: usize, generators: &[Subset], bound: usize) -> Result<Vec<Subset>> {
    let mut family: HashSet<Subset> = generators.iter().cloned().collect();
    family.insert(Subset::empty(width));
    family.insert(
        generators
            .iter()
            .fold(Subset::empty(width), |a, g| a.union(g)),
    );
    loop {
        let current: Vec<Subset> = family.iter().cloned().collect();
        let before = family.len();
        for (i, a) in current.iter().enumerate() {
            for b in &current[i + 1..] {
                family.insert(a.union(b));
                family.insert(a.intersection(b));
            }
            if family.len() > bound {
                return Err(Error::OracleBoundExceeded(format!(
                    "closure exceeds {bound} opens"
                )));
            }
        }
        if family.len() == before {
            break;
        }
    }
    let mut v: Vec<Subset> = family.into_iter().collect();
    canonical_sort(&mut v);
    Ok(v)
}

/// Join-irreducibles of an explicit open family: nonempty opens with exactly
/// one maximal open strictly below them.
pub fn join_irreducibles_by_covers(opens: &[Subset]) -> Vec<Subset> {
    let mut out: Vec<Subset> = opens
        .iter()
        .filter(|a| !a.is_empty())
        .filter(|a| {
            let below: Vec<&Subset> = opens.iter().filter(|b| b.is_subset(a) && b != a).collect();
            let maximal = below
                .iter()
                .filter(|b| !below.iter().any(|c| c != *b && b.is_subset(c)))
                .count();
            maximal == 1
        })
        .cloned()
        .collect();
    canonical_sort(&mut out);
    out
}

/// A completely prime filter, stored through its generator: the filter is
/// `{a open : a ⊇ generator}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    generator: Subset,
}

impl Point {
    pub fn generator(&self) -> &Subset {
        &self.generator
    }

    /// Filter membership of an open.
    pub fn contains(&self, open: &Subset) -> bool {
        self.generator.is_subset(open)
    }

    /// The filter as an explicit canonical list of opens.
    pub fn filter(&self, frame: &Frame, bound: usize) -> Result<Vec<Subset>> {
        Ok(frame
            .opens(bound)?
            .into_iter()
            .filter(|o| self.contains(o))
            .collect())
    }
}

/// One point per join-irreducible open, in canonical generator order.
pub fn points(frame: &Frame) -> Vec<Point> {
    frame
        .join_irreducibles()
        .into_iter()
        .map(|generator| Point { generator })
        .collect()
}

/// A filter written out as the canonical list of its opens.
pub type Filter = Vec<Subset>;

/// Enumerates completely prime filters by a pruned include/exclude search
/// over the explicit opens. Does not rely on the join-irreducible
/// correspondence, so it serves as an independent check of [`points`].
pub fn points_brute_force(frame: &Frame, max_opens: usize, budget: usize) -> Result<Vec<Filter>> {
    let opens = frame.opens(max_opens)?;
    let m = opens.len();
    let index: BTreeMap<&Subset, usize> = opens.iter().enumerate().map(|(i, o)| (o, i)).collect();
    // canonical order lists every subset of an open before the open itself
    let meet: Vec<Vec<usize>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| index[&opens[a].intersection(&opens[b])])
                .collect()
        })
        .collect();
    let join: Vec<Vec<usize>> = (0..m)
        .map(|a| (0..m).map(|b| index[&opens[a].union(&opens[b])]).collect())
        .collect();
    let below: Vec<Vec<bool>> = (0..m)
        .map(|a| (0..m).map(|b| opens[b].is_subset(&opens[a])).collect())
        .collect();

    struct Search<'a> {
        m: usize,
        meet: &'a [Vec<usize>],
        join: &'a [Vec<usize>],
        below: &'a [Vec<bool>],
        chosen: Vec<bool>,
        nodes: usize,
        budget: usize,
        found: Vec<Vec<bool>>,
    }

    impl Search<'_> {
        fn run(&mut self, k: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::OracleBoundExceeded(format!(
                    "filter search examined more than {} nodes",
                    self.budget
                )));
            }
            if k == self.m {
                if self.accept() {
                    self.found.push(self.chosen.clone());
                }
                return Ok(());
            }
            // include k: nonempty, and meets with earlier members stay inside
            let include_ok =
                k != 0 && (0..k).all(|b| !self.chosen[b] || self.chosen[self.meet[k][b]]);
            if include_ok {
                self.chosen[k] = true;
                self.run(k + 1)?;
                self.chosen[k] = false;
            }
            // exclude k: no earlier member lies below it
            let exclude_ok = (0..k).all(|b| !(self.chosen[b] && self.below[k][b]));
            if exclude_ok {
                self.run(k + 1)?;
            }
            Ok(())
        }

        fn accept(&self) -> bool {
            let top = self.m - 1;
            if !self.chosen[top] || self.chosen[0] {
                return false;
            }
            for a in 0..self.m {
                for b in 0..self.m {
                    let j = self.join[a][b];
                    if self.chosen[j] && !self.chosen[a] && !self.chosen[b] {
                        return false;
                    }
                    if self.chosen[a] && self.chosen[b] && !self.chosen[self.meet[a][b]] {
                        return false;
                    }
                    if self.chosen[a] && self.below[b][a] && !self.chosen[b] {
                        return false;
                    }
                }
            }
            true
        }
    }

    if m == 1 {
        // only the empty open: no filters
        return Ok(Vec::new());
    }
    let mut search = Search {
        m,
        meet: &meet,
        join: &join,
        below: &below,
        chosen: vec![false; m],
        nodes: 0,
        budget,
        found: Vec::new(),
    };
    search.run(0)?;
    let mut filters: Vec<Filter> = search
        .found
        .into_iter()
        .map(|mask| {
            (0..m)
                .filter(|&i| mask[i])
                .map(|i| opens[i].clone())
                .collect()
        })
        .collect();
    filters.sort_by(|a, b| {
        let ga = a.iter().fold(None::<Subset>, |acc, o| {
            Some(acc.map_or(o.clone(), |x| x.intersection(o)))
        });
        let gb = b.iter().fold(None::<Subset>, |acc, o| {
            Some(acc.map_or(o.clone(), |x| x.intersection(o)))
        });
        ga.unwrap().canonical_cmp(&gb.unwrap())
    });
    Ok(filters)
}

/// Outcome of a checker: pass, or the first violation found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub violation: Option<String>,
}

impl Verdict {
    pub fn pass() -> Self {
        Self {
            ok: true,
            violation: None,
        }
    }

    pub fn fail(msg: impl Into<String>) -> Self {
        Self {
            ok: false,
            violation: Some(msg.into()),
        }
    }
}

/// A map of opens `domain → codomain` claimed to be a frame homomorphism.
///
/// For a morphism of spaces `X → Y` the homomorphism runs backwards,
/// `Ω_Y → Ω_X`: `domain` is the frame of `Y`, `codomain` the frame of `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameHom {
    domain: Frame,
    codomain: Frame,
    map: BTreeMap<Subset, Subset>,
}

impl FrameHom {
    /// Requires the map to be total on the opens of `domain` and to land in
    /// the opens of `codomain`.
    pub fn new(domain: Frame, codomain: Frame, map: BTreeMap<Subset, Subset>) -> Result<Self> {
        let opens = domain.opens(DEFAULT_OPEN_BOUND)?;
        for o in &opens {
            let img = map
                .get(o)
                .ok_or_else(|| invalid(format!("map undefined on {}", domain.carrier.label(o))))?;
            if !codomain.is_open(img) {
                return Err(invalid(format!(
                    "image {} of {} is not an open of the codomain",
                    codomain.carrier.label(img),
                    domain.carrier.label(o)
                )));
            }
        }
        if map.len() != opens.len() {
            return Err(invalid("map is defined on subsets that are not opens"));
        }
        Ok(Self {
            domain,
            codomain,
            map,
        })
    }

    pub fn from_fn(domain: Frame, codomain: Frame, f: impl Fn(&Subset) -> Subset) -> Result<Self> {
        let map = domain.opens(DEFAULT_OPEN_BOUND)?.into_iter().map(|o| {
            let img = f(&o);
            (o, img)
        });
        let map = map.collect();
        Self::new(domain, codomain, map)
    }

    pub fn identity(frame: &Frame) -> Result<Self> {
        Self::from_fn(frame.clone(), frame.clone(), Subset::clone)
    }

    /// The homomorphism pulling opens back along a map of points.
    ///
    /// `point_map[i]` is the index in `points(domain)` of the image of the
    /// `i`th point of `codomain`. An open `V` is sent to the union of the
    /// generators of the codomain points mapped into `V`. Fails when some
    /// preimage is not an open, i.e. the point map is not continuous.
    pub fn pullback(domain: Frame, codomain: Frame, point_map: &[usize]) -> Result<Self> {
        let dom_points = points(&domain);
        let cod_points = points(&codomain);
        if point_map.len() != cod_points.len() {
            return Err(invalid(format!(
                "point map has {} entries for {} points",
                point_map.len(),
                cod_points.len()
            )));
        }
        if let Some(&bad) = point_map.iter().find(|&&j| j >= dom_points.len()) {
            return Err(invalid(format!("point index {bad} out of range")));
        }
        let width = codomain.width();
        let mut map = BTreeMap::new();
        for v in domain.opens(DEFAULT_OPEN_BOUND)? {
            let preimage: Vec<usize> = (0..cod_points.len())
                .filter(|&i| dom_points[point_map[i]].contains(&v))
                .collect();
            let image = preimage.iter().fold(Subset::empty(width), |acc, &i| {
                acc.union(cod_points[i].generator())
            });
            // the union must not pick up points outside the preimage
            if let Some(extra) = (0..cod_points.len())
                .find(|i| !preimage.contains(i) && cod_points[*i].generator().is_subset(&image))
            {
                return Err(invalid(format!(
                    "point map is not continuous: preimage of {} misses point {extra} below it",
                    domain.carrier.label(&v)
                )));
            }
            map.insert(v, image);
        }
        Self::new(domain, codomain, map)
    }

    pub fn domain(&self) -> &Frame {
        &self.domain
    }

    pub fn codomain(&self) -> &Frame {
        &self.codomain
    }

    pub fn apply(&self, open: &Subset) -> Option<&Subset> {
        self.map.get(open)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Subset, &Subset)> {
        self.map.iter()
    }

    /// Checks preservation of bottom, top, and all pairwise unions and
    /// intersections.
    pub fn check(&self) -> Verdict {
        let d = &self.domain;
        let c = &self.codomain;
        let label_d = |s: &Subset| d.carrier.label(s);
        if self.map[&d.bottom()] != c.bottom() {
            return Verdict::fail(format!(
                "bottom maps to {}",
                c.carrier.label(&self.map[&d.bottom()])
            ));
        }
        if self.map[&d.top()] != c.top() {
            return Verdict::fail(format!(
                "top maps to {}",
                c.carrier.label(&self.map[&d.top()])
            ));
        }
        let opens: Vec<&Subset> = self.map.keys().collect();
        for (i, a) in opens.iter().enumerate() {
            for b in &opens[i..] {
                let fa = &self.map[*a];
                let fb = &self.map[*b];
                if self.map[&a.union(b)] != fa.union(fb) {
                    return Verdict::fail(format!(
                        "union of {} and {} not preserved",
                        label_d(a),
                        label_d(b)
                    ));
                }
                if self.map[&a.intersection(b)] != fa.intersection(fb) {
                    return Verdict::fail(format!(
                        "intersection of {} and {} not preserved",
                        label_d(a),
                        label_d(b)
                    ));
                }
            }
        }
        Verdict::pass()
    }

    /// The induced map of points `codomain → domain`,
    /// `p ↦ {V : hom(V) ∈ p}`, as indices into `points(domain)`.
    pub fn point_map(&self) -> Result<Vec<usize>> {
        let dom_points = points(&self.domain);
        let opens: Vec<&Subset> = self.map.keys().collect();
        points(&self.codomain)
            .iter()
            .map(|p| {
                let filter: Vec<&Subset> = opens
                    .iter()
                    .copied()
                    .filter(|v| p.contains(&self.map[*v]))
                    .collect();
                let generator = filter
                    .iter()
                    .fold(self.domain.top(), |acc, v| acc.intersection(v));
                let target = dom_points
                    .iter()
                    .position(|q| q.generator() == &generator)
                    .ok_or_else(|| {
                        Error::InternalInconsistency(format!(
                            "induced filter with meet {} is not completely prime",
                            self.domain.carrier.label(&generator)
                        ))
                    })?;
                // the filter must be exactly the up-set of its meet
                let principal = opens.iter().filter(|v| generator.is_subset(v)).count();
                if principal != filter.len() {
                    return Err(Error::InternalInconsistency(format!(
                        "induced filter is not upward closed above {}",
                        self.domain.carrier.label(&generator)
                    )));
                }
                Ok(target)
            })
            .collect()
    }
}
