//! Seeded instance generators for the randomized harnesses.
//!
//! All generators draw from a [`ChaCha8Rng`], so a seed fixes the instance
//! on every platform.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::composition::Composition;
use crate::error::Result;
use crate::frame::FrameHom;
use crate::models::WeightedGraph;
use crate::prolif::ProliferativeBase;
use crate::tunnel::{InterferenceEntry, TunnelFrameSpace, TunnelSystem};
use crate::weight::{q, Ext, Rational};

pub use rand::SeedableRng;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ids(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| ((b'A' + i as u8) as char).to_string())
        .collect()
}

/// A small nonnegative rational with denominator 1 to 4.
fn small_rational(rng: &mut Rng64) -> Rational {
    q(rng.gen_range(0..=12), rng.gen_range(1..=4))
}

fn positive_rational(rng: &mut Rng64) -> Rational {
    q(rng.gen_range(1..=12), rng.gen_range(1..=4))
}

/// A tunnel system with up to `max_tunnels` tunnels and finite intensities.
/// Roughly two thirds of pairs interfere; some interferences name a tunnel
/// of matching intensity as their result, and results that would break
/// associativity are dropped.
pub fn tunnel_system(rng: &mut Rng64, max_tunnels: usize) -> TunnelSystem<Rational> {
    let n = rng.gen_range(1..=max_tunnels.max(1));
    let names = ids(n);
    let lambda: Vec<Rational> = (0..n).map(|_| small_rational(rng)).collect();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(1.0 / 3.0) {
                continue;
            }
            let entry = if rng.gen_bool(0.35) {
                let r = rng.gen_range(0..n);
                InterferenceEntry::new(
                    names[i].clone(),
                    names[j].clone(),
                    Ext::Finite(lambda[r].clone()),
                )
                .with_result(names[r].clone())
            } else if rng.gen_bool(0.05) {
                InterferenceEntry::new(names[i].clone(), names[j].clone(), Ext::Infinite)
            } else {
                InterferenceEntry::new(
                    names[i].clone(),
                    names[j].clone(),
                    Ext::Finite(positive_rational(rng)),
                )
            };
            entries.push(entry);
        }
    }
    let tunnels: Vec<(String, Ext<Rational>)> = names
        .iter()
        .cloned()
        .zip(lambda.into_iter().map(Ext::Finite))
        .collect();
    loop {
        match TunnelSystem::new(tunnels.clone(), entries.clone(), None) {
            Ok(s) => return s,
            Err(_) => {
                let with_result: Vec<usize> = (0..entries.len())
                    .filter(|&k| entries[k].result.is_some())
                    .collect();
                let k = *with_result
                    .choose(rng)
                    .expect("only results can make a generated system invalid");
                entries[k].result = None;
            }
        }
    }
}

/// A proliferative base with up to `max` distinctions whose composition
/// need not be commutative. Entries are added one at a time and kept only
/// if the base stays associative. With `graded`, costs are pairwise distinct
/// and every composite costs strictly more than both factors.
pub fn base(rng: &mut Rng64, max: usize, graded: bool) -> ProliferativeBase<Rational> {
    let n = rng.gen_range(1..=max.max(1));
    let names = ids(n);
    let costs: Vec<Rational> = if graded {
        let mut pool: Vec<i64> = (1..=3 * n as i64).collect();
        pool.shuffle(rng);
        pool[..n].iter().map(|&k| q(k, 2)).collect()
    } else {
        (0..n).map(|_| small_rational(rng)).collect()
    };
    let distinctions: Vec<(String, Ext<Rational>)> = names
        .iter()
        .cloned()
        .zip(costs.iter().cloned().map(Ext::Finite))
        .collect();
    let mut comp: Composition<Rational> = Composition::default();
    let attempts = rng.gen_range(0..=2 * n);
    for k in 0..attempts {
        let (d, e) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (names[d].clone(), names[e].clone());
        if comp.compose.contains_key(&key) {
            continue;
        }
        let top = costs[d].clone().max(costs[e].clone());
        let candidates: Vec<usize> = (0..n).filter(|&r| !graded || costs[r] > top).collect();
        let mut trial = comp.clone();
        match candidates.choose(rng) {
            Some(&r) if rng.gen_bool(0.7) => {
                trial.compose.insert(key, names[r].clone());
            }
            _ => {
                let id = format!("c{k}");
                let cost = if graded {
                    top + positive_rational(rng)
                } else {
                    small_rational(rng)
                };
                trial.compose.insert(key, id.clone());
                trial.composites.insert(id, Ext::Finite(cost));
            }
        }
        if ProliferativeBase::new(distinctions.clone(), trial.clone()).is_ok() {
            comp = trial;
        }
    }
    ProliferativeBase::new(distinctions, comp).expect("every kept entry was validated")
}

/// A connected graph on up to `max_vertices` vertices with distinct
/// positive rational weights: a random spanning tree plus extra edges.
pub fn connected_graph(rng: &mut Rng64, max_vertices: usize) -> WeightedGraph {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut pairs = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        pairs.insert((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.3) {
                pairs.insert((u, v));
            }
        }
    }
    let mut used = BTreeSet::new();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = loop {
                let w = positive_rational(rng) + q(rng.gen_range(0..6), 1);
                if used.insert(w.clone()) {
                    break w;
                }
            };
            (names[u].clone(), names[v].clone(), w)
        })
        .collect();
    WeightedGraph::new(names, edges, false).expect("generated graphs are valid")
}

/// A tunnel system whose frame is discrete: `n` tunnels with pairwise
/// positive interference, so every tunnel is its own point and any point
/// map out of it is continuous.
pub fn discrete_system(rng: &mut Rng64, n: usize) -> TunnelSystem<Rational> {
    let names = ids(n);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            entries.push(InterferenceEntry::new(
                names[i].clone(),
                names[j].clone(),
                Ext::Finite(positive_rational(rng)),
            ));
        }
    }
    let tunnels = names
        .into_iter()
        .map(|id| (id, Ext::Finite(q(1, 1))))
        .collect();
    TunnelSystem::new(tunnels, entries, None)
        .expect("positive interference without results is valid")
}

/// How a generated morphism was made.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Identity,
    Collapse,
    Embedding,
}

/// A generated morphism `src → dst` with `hom: dst.frame → src.frame`.
pub struct GeneratedMorphism {
    pub kind: MorphismKind,
    pub src: TunnelFrameSpace<Rational>,
    pub dst: TunnelFrameSpace<Rational>,
    pub hom: FrameHom,
}

/// Cycles through identities, collapses onto a one-point space, and
/// injective maps of a discrete space into a random one. Embeddings are
/// non-expansive or not depending on the drawn distances.
pub fn morphism(rng: &mut Rng64, index: usize) -> Result<GeneratedMorphism> {
    let kind = [
        MorphismKind::Identity,
        MorphismKind::Collapse,
        MorphismKind::Embedding,
    ][index % 3];
    match kind {
        MorphismKind::Identity => {
            let x = TunnelFrameSpace::build(tunnel_system(rng, 6))?;
            let hom = FrameHom::identity(&x.frame)?;
            Ok(GeneratedMorphism {
                kind,
                src: x.clone(),
                dst: x,
                hom,
            })
        }
        MorphismKind::Collapse => {
            let src = TunnelFrameSpace::build(tunnel_system(rng, 6))?;
            let one =
                TunnelSystem::new(vec![("P".to_string(), Ext::Finite(q(1, 1)))], vec![], None)?;
            let dst = TunnelFrameSpace::build(one)?;
            let hom = FrameHom::pullback(
                dst.frame.clone(),
                src.frame.clone(),
                &vec![0; src.points.len()],
            )?;
            Ok(GeneratedMorphism {
                kind,
                src,
                dst,
                hom,
            })
        }
        MorphismKind::Embedding => {
            let dst = TunnelFrameSpace::build(tunnel_system(rng, 6))?;
            let k = rng.gen_range(1..=dst.points.len().min(3));
            let src = TunnelFrameSpace::build(discrete_system(rng, k))?;
            let mut targets: Vec<usize> = (0..dst.points.len()).collect();
            targets.shuffle(rng);
            let hom = FrameHom::pullback(dst.frame.clone(), src.frame.clone(), &targets[..k])?;
            Ok(GeneratedMorphism {
                kind,
                src,
                dst,
                hom,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = tunnel_system(&mut rng(7), 6);
        let b = tunnel_system(&mut rng(7), 6);
        assert_eq!(a, b);
        assert_eq!(base(&mut rng(3), 6, true), base(&mut rng(3), 6, true));
        assert_eq!(
            connected_graph(&mut rng(1), 8),
            connected_graph(&mut rng(1), 8)
        );
    }

    #[test]
    fn generated_graphs_are_connected_with_distinct_weights() {
        let mut r = rng(11);
        for _ in 0..20 {
            let g = connected_graph(&mut r, 8);
            assert!(g.is_connected());
            let ws: BTreeSet<_> = g.edges().iter().map(|e| e.2.clone()).collect();
            assert_eq!(ws.len(), g.edges().len());
        }
    }

    #[test]
    fn graded_bases_grade_strictly() {
        let mut r = rng(5);
        for _ in 0..20 {
            let b = base(&mut r, 8, true);
            let costs = b.costs();
            assert_eq!(costs.iter().collect::<BTreeSet<_>>().len(), costs.len());
        }
    }

    #[test]
    fn morphisms_build() {
        let mut r = rng(0);
        for i in 0..9 {
            let m = morphism(&mut r, i).unwrap();
            assert!(m.hom.check().ok);
        }
    }
}
