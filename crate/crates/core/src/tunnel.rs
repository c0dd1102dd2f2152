//! Tunnel systems, their generated frames and induced Lawvere metrics.

use std::collections::{BTreeMap, HashMap};

use crate::composition::{
    derive_interference, synthesize, Composition, Interference, InterferenceTable, Product,
};
use crate::error::{invalid, Error, Result};
use crate::frame::{points, Carrier, Frame, FrameHom, Point, Verdict};
use crate::metric::MetricTable;
use crate::space::{self, FrameSpace};
use crate::subset::Subset;
use crate::weight::{Ext, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tunnel<W> {
    pub id: String,
    pub intensity: Ext<W>,
}

/// An interference entry as written in input files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceEntry<W> {
    pub a: String,
    pub b: String,
    pub value: Ext<W>,
    pub result: Option<String>,
}

impl<W> InterferenceEntry<W> {
    pub fn new(a: impl Into<String>, b: impl Into<String>, value: Ext<W>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            value,
            result: None,
        }
    }

    pub fn with_result(mut self, result: impl Into<String>) -> Self {
        self.result = Some(result.into());
        self
    }
}

/// Tunnels with intensities and a partial symmetric interference table.
///
/// Tunnels are kept sorted by identifier, so the system does not depend on
/// input order. The diagonal is always present with value zero. Entries
/// left out of the table are undefined, which is distinct from a defined
/// `inf` but behaves the same in every minimum.
///
/// `record` optionally pins the composition seen by the proliferative side
/// when it differs from the one synthesized from interference; see
/// [`crate::equivalence`]. Neighbourhoods are read from the effective
/// composition, which without a record is exactly the interference table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TunnelSystem<W> {
    tunnels: Vec<Tunnel<W>>,
    interference: InterferenceTable<W>,
    record: Option<Composition<W>>,
    table: Vec<Vec<Option<Product<W>>>>,
}

impl<W: Weight> TunnelSystem<W> {
    pub fn new(
        tunnels: Vec<(String, Ext<W>)>,
        entries: Vec<InterferenceEntry<W>>,
        record: Option<Composition<W>>,
    ) -> Result<Self> {
        let mut tunnels: Vec<Tunnel<W>> = tunnels
            .into_iter()
            .map(|(id, intensity)| Tunnel { id, intensity })
            .collect();
        tunnels.sort_by(|a, b| a.id.cmp(&b.id));
        if tunnels.is_empty() {
            return Err(invalid("empty carrier: no tunnels"));
        }
        if let Some(w) = tunnels.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(invalid(format!("duplicate tunnel {:?}", w[0].id)));
        }
        let index: HashMap<&str, usize> = tunnels
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("unknown tunnel {id:?}")))
        };

        let mut interference: InterferenceTable<W> = BTreeMap::new();
        for e in entries {
            let (i, j) = (lookup(&e.a)?, lookup(&e.b)?);
            let key = (i.min(j), i.max(j));
            let result = e.result.as_deref().map(lookup).transpose()?;
            if i == j {
                if !matches!(&e.value, Ext::Finite(w) if w.is_zero()) {
                    return Err(invalid(format!(
                        "nonzero self-interference ({}, {}) = {}",
                        e.a, e.a, e.value
                    )));
                }
                if result.is_some() {
                    return Err(invalid(format!(
                        "self-interference ({}, {}) names a result",
                        e.a, e.a
                    )));
                }
            }
            if let Some(r) = result {
                if tunnels[r].intensity != e.value {
                    return Err(invalid(format!(
                        "interference ({}, {}) = {} but its result {} has intensity {}",
                        e.a, e.b, e.value, tunnels[r].id, tunnels[r].intensity
                    )));
                }
            }
            let entry = Interference {
                value: e.value,
                result,
            };
            match interference.get(&key) {
                Some(prev) if *prev != entry => {
                    return Err(invalid(format!(
                        "asymmetric interference ({}, {}): {} vs {}",
                        e.a, e.b, prev.value, entry.value
                    )));
                }
                _ => {
                    interference.insert(key, entry);
                }
            }
        }
        for i in 0..tunnels.len() {
            interference.entry((i, i)).or_insert(Interference {
                value: Ext::zero(),
                result: None,
            });
        }

        let mut system = Self {
            tunnels,
            interference,
            record,
            table: Vec::new(),
        };
        system.validate_composition()?;
        system.table = system
            .composition()
            .table(&system.ids(), &system.intensities());
        Ok(system)
    }

    fn validate_composition(&self) -> Result<()> {
        let ids = self.ids();
        let costs = self.intensities();
        if let Some(record) = &self.record {
            record.validate(&ids)?;
            if derive_interference(&ids, &costs, record) != self.interference {
                return Err(invalid(
                    "composition record disagrees with the interference table",
                ));
            }
            if *record == synthesize(&ids, &self.interference) {
                return Err(invalid(
                    "composition record equals the synthesized composition; omit it",
                ));
            }
        }
        self.composition().check_associative(&ids, &costs)
    }

    pub fn len(&self) -> usize {
        self.tunnels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tunnels.is_empty()
    }

    pub fn tunnels(&self) -> &[Tunnel<W>] {
        &self.tunnels
    }

    pub fn ids(&self) -> Vec<String> {
        self.tunnels.iter().map(|t| t.id.clone()).collect()
    }

    pub fn intensities(&self) -> Vec<Ext<W>> {
        self.tunnels.iter().map(|t| t.intensity.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tunnels
            .binary_search_by(|t| t.id.as_str().cmp(id))
            .ok()
    }

    pub fn carrier(&self) -> Carrier {
        Carrier::new(self.ids()).expect("tunnel ids are nonempty and unique")
    }

    pub fn interference_table(&self) -> &InterferenceTable<W> {
        &self.interference
    }

    pub fn record(&self) -> Option<&Composition<W>> {
        self.record.as_ref()
    }

    /// Interference entry for an unordered pair of tunnel indices.
    pub fn interference(&self, i: usize, j: usize) -> Option<&Interference<W>> {
        self.interference.get(&(i.min(j), i.max(j)))
    }

    /// Interference value with undefined read as `inf`.
    pub fn interference_value(&self, i: usize, j: usize) -> Ext<W> {
        self.interference(i, j)
            .map_or(Ext::Infinite, |e| e.value.clone())
    }

    /// The composition the proliferative side sees.
    pub fn composition(&self) -> Composition<W> {
        match &self.record {
            Some(r) => r.clone(),
            None => synthesize(&self.ids(), &self.interference),
        }
    }

    /// Interference entries in file order: each unordered pair once.
    pub fn entries(&self) -> Vec<InterferenceEntry<W>> {
        self.interference
            .iter()
            .map(|(&(i, j), e)| InterferenceEntry {
                a: self.tunnels[i].id.clone(),
                b: self.tunnels[j].id.clone(),
                value: e.value.clone(),
                result: e.result.map(|r| self.tunnels[r].id.clone()),
            })
            .collect()
    }

    /// `U_ε(T) = {T' : interference(T, T') defined and < ε}`.
    pub fn neighbourhood(&self, tunnel: &str, eps: &W) -> Result<Subset> {
        let t = self
            .index_of(tunnel)
            .ok_or_else(|| invalid(format!("unknown tunnel {tunnel:?}")))?;
        if eps.is_zero() {
            return Err(invalid("ε must be positive"));
        }
        Ok(self.neighbourhood_at(t, eps))
    }

    fn neighbourhood_at(&self, t: usize, eps: &W) -> Subset {
        let eps = Ext::Finite(eps.clone());
        Subset::from_indices(
            self.len(),
            (0..self.len()).filter(|&u| matches!(&self.table[t][u], Some(p) if p.cost < eps)),
        )
    }

    /// Thresholds at which some neighbourhood changes shape.
    pub fn thresholds(&self) -> Vec<W> {
        space::thresholds(self.table.iter().flatten().flatten().map(|p| &p.cost))
    }

    /// The frame generated by all structural neighbourhoods.
    pub fn generate_frame(&self) -> Frame {
        let thresholds = self.thresholds();
        let generators: Vec<Subset> = (0..self.len())
            .flat_map(|t| {
                thresholds
                    .iter()
                    .map(move |eps| self.neighbourhood_at(t, eps))
            })
            .collect();
        Frame::closure(self.carrier(), &generators).expect("generators live on the tunnel carrier")
    }
}

/// A tunnel system together with its frame, points and metrics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TunnelFrameSpace<W> {
    pub system: TunnelSystem<W>,
    pub frame: Frame,
    pub points: Vec<Point>,
    pub raw: MetricTable<W>,
    pub metric: MetricTable<W>,
}

/// `d(p, q) = min { interference(T, T') : T ∈ p, T' ∈ q }` where `T ∈ p`
/// means the smallest open containing `T` lies in `p`.
pub fn raw_distance<W: Weight>(
    system: &TunnelSystem<W>,
    frame: &Frame,
    points: &[Point],
) -> MetricTable<W> {
    let members = space::members(frame, points);
    space::raw_table(&members, |x, y| system.interference_value(x, y))
}

impl<W: Weight> TunnelFrameSpace<W> {
    pub fn build(system: TunnelSystem<W>) -> Result<Self> {
        let frame = system.generate_frame();
        let points = points(&frame);
        let raw = raw_distance(&system, &frame, &points);
        let metric = raw.closure();
        metric
            .check_axioms()
            .map_err(|e| Error::InternalInconsistency(format!("closed metric: {e}")))?;
        Ok(Self {
            system,
            frame,
            points,
            raw,
            metric,
        })
    }

    /// Index of the point generated by the minimal open of tunnel `id`.
    pub fn point_of(&self, id: &str) -> Option<usize> {
        let t = self.system.index_of(id)?;
        space::point_of(&self.frame, &self.points, t)
    }
}

impl<W: Weight> FrameSpace<W> for TunnelFrameSpace<W> {
    fn frame(&self) -> &Frame {
        &self.frame
    }
    fn points(&self) -> &[Point] {
        &self.points
    }
    fn metric(&self) -> &MetricTable<W> {
        &self.metric
    }
}

/// Morphism check in the tunnel category: `hom` runs from `dst.frame` to
/// `src.frame` and its point map `src → dst` must be non-expansive.
pub fn check_tgeom_morphism<W: Weight>(
    src: &TunnelFrameSpace<W>,
    dst: &TunnelFrameSpace<W>,
    hom: &FrameHom,
) -> Result<Verdict> {
    space::check_morphism(src, dst, hom)
}
