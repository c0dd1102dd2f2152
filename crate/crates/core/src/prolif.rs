//! Proliferative bases: distinctions with costs and a partial composition.

use crate::composition::{Composition, Product};
use crate::error::{invalid, Error, Result};
use crate::frame::{points, Carrier, Frame, FrameHom, Point, Verdict};
use crate::metric::MetricTable;
use crate::space::{self, FrameSpace};
use crate::subset::Subset;
use crate::weight::{Ext, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinction<W> {
    pub id: String,
    pub cost: Ext<W>,
}

/// Distinctions (sorted by identifier) with a cost function and a partial
/// associative composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProliferativeBase<W> {
    distinctions: Vec<Distinction<W>>,
    composition: Composition<W>,
    table: Vec<Vec<Option<Product<W>>>>,
}

impl<W: Weight> ProliferativeBase<W> {
    pub fn new(distinctions: Vec<(String, Ext<W>)>, composition: Composition<W>) -> Result<Self> {
        let mut distinctions: Vec<Distinction<W>> = distinctions
            .into_iter()
            .map(|(id, cost)| Distinction { id, cost })
            .collect();
        distinctions.sort_by(|a, b| a.id.cmp(&b.id));
        if distinctions.is_empty() {
            return Err(invalid("empty carrier: no distinctions"));
        }
        if let Some(w) = distinctions.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(invalid(format!("duplicate distinction {:?}", w[0].id)));
        }
        let ids: Vec<String> = distinctions.iter().map(|d| d.id.clone()).collect();
        let costs: Vec<Ext<W>> = distinctions.iter().map(|d| d.cost.clone()).collect();
        composition.validate(&ids)?;
        composition.check_associative(&ids, &costs)?;
        let table = composition.table(&ids, &costs);
        Ok(Self {
            distinctions,
            composition,
            table,
        })
    }

    /// Builds from `(d, e, result)` triples; results outside the
    /// distinctions must be listed in `composites` with their cost.
    pub fn from_triples(
        distinctions: Vec<(String, Ext<W>)>,
        compose: &[(&str, &str, &str)],
        composites: Vec<(String, Ext<W>)>,
    ) -> Result<Self> {
        let mut c = Composition::default();
        for &(d, e, r) in compose {
            let key = (d.to_string(), e.to_string());
            if let Some(prev) = c.compose.insert(key, r.to_string()) {
                if prev != r {
                    return Err(invalid(format!("({d}·{e}) given twice: {prev} and {r}")));
                }
            }
        }
        c.composites = composites.into_iter().collect();
        Self::new(distinctions, c)
    }

    pub fn len(&self) -> usize {
        self.distinctions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinctions.is_empty()
    }

    pub fn distinctions(&self) -> &[Distinction<W>] {
        &self.distinctions
    }

    pub fn ids(&self) -> Vec<String> {
        self.distinctions.iter().map(|d| d.id.clone()).collect()
    }

    pub fn costs(&self) -> Vec<Ext<W>> {
        self.distinctions.iter().map(|d| d.cost.clone()).collect()
    }

    pub fn cost(&self, i: usize) -> &Ext<W> {
        &self.distinctions[i].cost
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.distinctions
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
    }

    pub fn carrier(&self) -> Carrier {
        Carrier::new(self.ids()).expect("distinction ids are nonempty and unique")
    }

    pub fn composition(&self) -> &Composition<W> {
        &self.composition
    }

    /// `d · e`, when defined.
    pub fn product(&self, d: usize, e: usize) -> Option<&Product<W>> {
        self.table[d][e].as_ref()
    }

    fn lookup(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| invalid(format!("unknown distinction {id:?}")))
    }

    /// `N_ε(d) = {e : d·e defined and C(d·e) < ε}`.
    pub fn scene(&self, d: &str, eps: &W) -> Result<Subset> {
        let d = self.lookup(d)?;
        if eps.is_zero() {
            return Err(invalid("ε must be positive"));
        }
        Ok(self.scene_at(d, eps))
    }

    fn scene_at(&self, d: usize, eps: &W) -> Subset {
        let eps = Ext::Finite(eps.clone());
        Subset::from_indices(
            self.len(),
            (0..self.len()).filter(|&e| matches!(self.product(d, e), Some(p) if p.cost < eps)),
        )
    }

    pub fn thresholds(&self) -> Vec<W> {
        space::thresholds(self.table.iter().flatten().flatten().map(|p| &p.cost))
    }

    /// The smallest frame containing every scene.
    pub fn scene_frame(&self) -> Frame {
        let thresholds = self.thresholds();
        let generators: Vec<Subset> = (0..self.len())
            .flat_map(|d| thresholds.iter().map(move |eps| self.scene_at(d, eps)))
            .collect();
        Frame::closure(self.carrier(), &generators).expect("scenes live on the distinction carrier")
    }

    /// Cheapest composite of `d` and `e` over both composition orders.
    pub fn symmetric_cost(&self, d: usize, e: usize) -> Ext<W> {
        let a = self.product(d, e).map(|p| p.cost.clone());
        let b = self.product(e, d).map(|p| p.cost.clone());
        a.into_iter().chain(b).min().unwrap_or(Ext::Infinite)
    }

    /// `e ⪯ d`: `d = e·x` or `d = x·e` for some distinction `x`, and
    /// `C(e) ≤ C(d)`.
    pub fn refines(&self, e: usize, d: usize) -> bool {
        if self.cost(e) > self.cost(d) {
            return false;
        }
        (0..self.len()).any(|x| {
            matches!(self.product(e, x), Some(p) if p.result == Some(d))
                || matches!(self.product(x, e), Some(p) if p.result == Some(d))
        })
    }

    /// Refinements of `d` with no third distinction strictly between.
    /// `d` itself is never listed.
    pub fn immediate_refinements(&self, d: usize) -> Vec<usize> {
        self.immediate_with(d, &self.refinement_matrix())
    }

    pub fn refinement_matrix(&self) -> Vec<Vec<bool>> {
        (0..self.len())
            .map(|e| (0..self.len()).map(|d| self.refines(e, d)).collect())
            .collect()
    }

    fn immediate_with(&self, d: usize, rel: &[Vec<bool>]) -> Vec<usize> {
        (0..self.len())
            .filter(|&e| e != d && rel[e][d])
            .filter(|&e| !(0..self.len()).any(|f| f != e && f != d && rel[e][f] && rel[f][d]))
            .collect()
    }

    /// The full refinement relation with its immediate part.
    pub fn refinement_relation(&self) -> RefinementRelation {
        let rel = self.refinement_matrix();
        let n = self.len();
        let pairs = (0..n)
            .flat_map(|e| (0..n).map(move |d| (e, d)))
            .filter(|&(e, d)| rel[e][d])
            .collect();
        let immediate = (0..n)
            .flat_map(|d| {
                self.immediate_with(d, &rel)
                    .into_iter()
                    .map(move |e| (e, d))
            })
            .collect();
        RefinementRelation { pairs, immediate }
    }
}

/// `(e, d)` index pairs with `e ⪯ d`, and the immediate ones `e ≺ d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementRelation {
    pub pairs: Vec<(usize, usize)>,
    pub immediate: Vec<(usize, usize)>,
}

/// A proliferative base with its scene frame, foci and focus metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProlifFrameSpace<W> {
    pub base: ProliferativeBase<W>,
    pub scene_frame: Frame,
    pub foci: Vec<Point>,
    pub raw: MetricTable<W>,
    pub metric: MetricTable<W>,
}

/// `ρ(φ, ψ) = min { C(d·e) : d ∈ φ, e ∈ ψ }` taken over both composition
/// orders, zero on the diagonal.
pub fn raw_focus_distance<W: Weight>(
    base: &ProliferativeBase<W>,
    frame: &Frame,
    foci: &[Point],
) -> MetricTable<W> {
    let members = space::members(frame, foci);
    space::raw_table(&members, |d, e| base.symmetric_cost(d, e))
}

impl<W: Weight> ProlifFrameSpace<W> {
    pub fn build(base: ProliferativeBase<W>) -> Result<Self> {
        let scene_frame = base.scene_frame();
        let foci = points(&scene_frame);
        let raw = raw_focus_distance(&base, &scene_frame, &foci);
        let metric = raw.closure();
        metric
            .check_axioms()
            .map_err(|e| Error::InternalInconsistency(format!("closed focus metric: {e}")))?;
        Ok(Self {
            base,
            scene_frame,
            foci,
            raw,
            metric,
        })
    }

    pub fn focus_of(&self, id: &str) -> Option<usize> {
        let d = self.base.index_of(id)?;
        space::point_of(&self.scene_frame, &self.foci, d)
    }
}

impl<W: Weight> FrameSpace<W> for ProlifFrameSpace<W> {
    fn frame(&self) -> &Frame {
        &self.scene_frame
    }
    fn points(&self) -> &[Point] {
        &self.foci
    }
    fn metric(&self) -> &MetricTable<W> {
        &self.metric
    }
}

/// Morphism check in the proliferative category; `hom` runs from
/// `dst.scene_frame` to `src.scene_frame`.
pub fn check_plog_morphism<W: Weight>(
    src: &ProlifFrameSpace<W>,
    dst: &ProlifFrameSpace<W>,
    hom: &FrameHom,
) -> Result<Verdict> {
    space::check_morphism(src, dst, hom)
}
