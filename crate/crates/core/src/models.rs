//! Generators for the three example models (weighted graphs, grid
//! intervals, weighted locales) together with their independent oracles.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};
use crate::frame::{Frame, DEFAULT_OPEN_BOUND};
use crate::metric::MetricTable;
use crate::spectral::OperatorMatrix;
use crate::tunnel::{InterferenceEntry, TunnelSystem};
use crate::weight::{Ext, NegLog, Rational};

/// An undirected graph with positive rational edge weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    /// `(u, v, w)` with `u < v` by vertex index, sorted.
    edges: Vec<(usize, usize, Rational)>,
}

impl WeightedGraph {
    /// Validates the graph. Zero weights fuse points and are rejected unless
    /// `allow_zero` is set; negative weights are always rejected.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, Rational)>,
        allow_zero: bool,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        if index.len() != vertices.len() {
            return Err(invalid("duplicate vertex"));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            let find = |x: &str| {
                index
                    .get(x)
                    .copied()
                    .ok_or_else(|| invalid(format!("unknown vertex {x:?}")))
            };
            let (a, b) = (find(&u)?, find(&v)?);
            if a == b {
                return Err(invalid(format!("self-loop at {u:?}")));
            }
            if w.is_negative() || (w.is_zero() && !allow_zero) {
                return Err(invalid(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(invalid(format!("duplicate edge ({u}, {v})")));
            }
            out.push((key.0, key.1, w));
        }
        out.sort();
        Ok(Self {
            vertices,
            edges: out,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Edges as `(u, v, w)` vertex-index triples.
    pub fn edges(&self) -> &[(usize, usize, Rational)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v, _) in &self.edges {
            let (a, b) = (root(&mut parent, u), root(&mut parent, v));
            parent[a] = b;
        }
        (0..n)
            .map(|x| root(&mut parent, x))
            .collect::<BTreeSet<_>>()
            .len()
            <= 1
    }

    fn edge_id(&self, e: usize) -> String {
        let (u, v, _) = &self.edges[e];
        format!("{}-{}", self.vertices[*u], self.vertices[*v])
    }
}

/// Tunnels are edges with `Λ = w`; two edges sharing a vertex interfere
/// with value `w₁ + w₂`.
pub fn graph_model_edges(g: &WeightedGraph) -> Result<TunnelSystem<Rational>> {
    let tunnels = (0..g.edges.len())
        .map(|e| (g.edge_id(e), Ext::Finite(g.edges[e].2.clone())))
        .collect();
    let mut entries = Vec::new();
    for (i, (a, b, w)) in g.edges.iter().enumerate() {
        for (j, (c, d, x)) in g.edges.iter().enumerate().skip(i + 1) {
            if a == c || a == d || b == c || b == d {
                entries.push(InterferenceEntry::new(
                    g.edge_id(i),
                    g.edge_id(j),
                    Ext::Finite(w + x),
                ));
            }
        }
    }
    TunnelSystem::new(tunnels, entries, None)
}

/// One tunnel per vertex (its star) with intensity the weighted degree;
/// stars of adjacent vertices interfere with the edge weight.
pub fn graph_model_stars(g: &WeightedGraph) -> Result<TunnelSystem<Rational>> {
    let mut degree = vec![Rational::zero(); g.vertices.len()];
    for (u, v, w) in &g.edges {
        degree[*u] += w;
        degree[*v] += w;
    }
    let tunnels = g
        .vertices
        .iter()
        .cloned()
        .zip(degree.into_iter().map(Ext::Finite))
        .collect();
    let entries = g
        .edges
        .iter()
        .map(|(u, v, w)| {
            InterferenceEntry::new(
                g.vertices[*u].clone(),
                g.vertices[*v].clone(),
                Ext::Finite(w.clone()),
            )
        })
        .collect();
    TunnelSystem::new(tunnels, entries, None)
}

/// The weighted graph Laplacian `Deg − Adj` over the vertex order.
pub fn graph_laplacian_oracle(g: &WeightedGraph) -> OperatorMatrix<Rational> {
    let mut m = OperatorMatrix::zero(g.vertices.clone());
    for (u, v, w) in &g.edges {
        m.entries[*u][*u] += w;
        m.entries[*v][*v] += w;
        m.entries[*u][*v] -= w;
        m.entries[*v][*u] -= w;
    }
    m
}

/// All-pairs shortest paths by Dijkstra from every vertex; `inf` between
/// components. Independent of the min-plus closure used for metrics.
pub fn shortest_paths(g: &WeightedGraph) -> MetricTable<Rational> {
    let n = g.vertices.len();
    let mut adj: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); n];
    for (u, v, w) in &g.edges {
        adj[*u].push((*v, w));
        adj[*v].push((*u, w));
    }
    let rows = (0..n)
        .map(|s| {
            let mut dist: Vec<Option<Rational>> = vec![None; n];
            let mut heap = BinaryHeap::new();
            dist[s] = Some(Rational::zero());
            heap.push(Reverse((Rational::zero(), s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if dist[u].as_ref().is_some_and(|best| *best < d) {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let nd = &d + w;
                    if dist[v].as_ref().is_none_or(|best| nd < *best) {
                        dist[v] = Some(nd.clone());
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
            dist.into_iter()
                .map(|d| d.map_or(Ext::Infinite, Ext::Finite))
                .collect()
        })
        .collect();
    MetricTable::new(rows)
}

/// Interference rule for the grid interval model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalVariant {
    /// Length of the smallest interval containing both.
    Hull,
    /// Length of the overlap; undefined for disjoint intervals.
    Intersection,
}

/// Tunnels are all closed intervals `[i/n, j/n]` with `0 ≤ i ≤ j ≤ n`,
/// named `[i,j]` with zero-padded grid indices, and `Λ = (j − i)/n`.
/// Self-interference is zero by convention in both variants.
pub fn interval_model(n: usize, variant: IntervalVariant) -> Result<TunnelSystem<Rational>> {
    if n == 0 {
        return Err(invalid("interval resolution must be at least 1"));
    }
    let width = n.to_string().len();
    let intervals: Vec<(usize, usize)> =
        (0..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
    let name = |(i, j): (usize, usize)| format!("[{i:0width$},{j:0width$}]");
    let len = |k: usize| Ext::Finite(Rational::new(k.into(), n.into()));
    let tunnels = intervals
        .iter()
        .map(|&iv| (name(iv), len(iv.1 - iv.0)))
        .collect();
    let mut entries = Vec::new();
    for (a, &(i, j)) in intervals.iter().enumerate() {
        for &(k, l) in &intervals[a + 1..] {
            let value = match variant {
                IntervalVariant::Hull => Some(j.max(l) - i.min(k)),
                IntervalVariant::Intersection => j.min(l).checked_sub(i.max(k)),
            };
            if let Some(v) = value {
                entries.push(InterferenceEntry::new(name((i, j)), name((k, l)), len(v)));
            }
        }
    }
    TunnelSystem::new(tunnels, entries, None)
}

/// The identifier [`interval_model`] gives the degenerate interval at grid
/// index `k`.
pub fn interval_point_id(n: usize, k: usize) -> String {
    let width = n.to_string().len();
    format!("[{k:0width$},{k:0width$}]")
}

/// Tunnels are the nonzero regular elements `a` of the frame, with
/// `Λ(a) = −log μ(a)` for the normalized weight measure `μ`; two tunnels
/// interfere with `Λ(a ∧ b)` when the meet is nonzero.
pub fn locale_model(
    frame: &Frame,
    weights: &BTreeMap<String, Rational>,
) -> Result<TunnelSystem<NegLog>> {
    let carrier = frame.carrier();
    let mut w = Vec::with_capacity(carrier.len());
    for id in carrier.ids() {
        let x = weights
            .get(id)
            .ok_or_else(|| invalid(format!("no weight for carrier element {id:?}")))?;
        if !x.is_positive() {
            return Err(invalid(format!(
                "weight of {id:?} must be positive, got {x}"
            )));
        }
        w.push(x.clone());
    }
    if let Some(extra) = weights.keys().find(|k| carrier.index_of(k).is_none()) {
        return Err(invalid(format!(
            "weight given for unknown element {extra:?}"
        )));
    }
    let mass = |s: &crate::subset::Subset| {
        s.iter()
            .map(|x| &w[x])
            .fold(Rational::zero(), |acc, x| acc + x)
    };
    let total = mass(&frame.top());
    if total.is_zero() {
        return Err(invalid(
            "μ(top) = 0: the frame's top element carries no weight",
        ));
    }
    let measure = |s: &crate::subset::Subset| NegLog::new(mass(s) / &total);

    let regular: Vec<_> = frame
        .regular_elements(DEFAULT_OPEN_BOUND)?
        .into_iter()
        .filter(|a| !a.is_empty())
        .collect();
    let tunnels = regular
        .iter()
        .map(|a| Ok((carrier.label(a), Ext::Finite(measure(a)?))))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (i, a) in regular.iter().enumerate() {
        for b in &regular[i + 1..] {
            let meet = a.intersection(b);
            if !meet.is_empty() {
                entries.push(InterferenceEntry::new(
                    carrier.label(a),
                    carrier.label(b),
                    Ext::Finite(measure(&meet)?),
                ));
            }
        }
    }
    TunnelSystem::new(tunnels, entries, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Carrier;
    use crate::tunnel::TunnelFrameSpace;
    use crate::weight::{fq, q, Weight};

    fn graph(vs: &[&str], es: &[(&str, &str, i64)]) -> WeightedGraph {
        WeightedGraph::new(
            vs.iter().map(|s| s.to_string()).collect(),
            es.iter()
                .map(|&(u, v, w)| (u.to_string(), v.to_string(), q(w, 1)))
                .collect(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn graph_validation() {
        let vs = vec!["a".to_string(), "b".to_string()];
        let e = |w| vec![("a".to_string(), "b".to_string(), q(w, 1))];
        assert!(WeightedGraph::new(vs.clone(), e(0), false).is_err());
        assert!(WeightedGraph::new(vs.clone(), e(0), true).is_ok());
        assert!(WeightedGraph::new(vs.clone(), e(-1), true).is_err());
        assert!(
            WeightedGraph::new(vs.clone(), vec![("a".into(), "a".into(), q(1, 1))], false).is_err()
        );
        assert!(WeightedGraph::new(vs, vec![("a".into(), "c".into(), q(1, 1))], false).is_err());
        assert!(!graph(&["a", "b"], &[]).is_connected());
        assert!(graph(&["a", "b"], &[("a", "b", 1)]).is_connected());
    }

    #[test]
    fn edge_model() {
        let single = graph_model_edges(&graph(&["a", "b"], &[("a", "b", 1)])).unwrap();
        assert_eq!(single.len(), 1);
        let path =
            graph_model_edges(&graph(&["a", "b", "c"], &[("a", "b", 1), ("b", "c", 2)])).unwrap();
        let (ab, bc) = (path.index_of("a-b").unwrap(), path.index_of("b-c").unwrap());
        assert_eq!(path.interference_value(ab, bc), fq(3, 1));
        let disjoint = graph_model_edges(&graph(
            &["a", "b", "c", "d"],
            &[("a", "b", 1), ("c", "d", 2)],
        ))
        .unwrap();
        assert!(disjoint.interference(0, 1).is_none());
    }

    #[test]
    fn star_model() {
        let one = TunnelFrameSpace::build(graph_model_stars(&graph(&["a"], &[])).unwrap()).unwrap();
        assert_eq!(one.points.len(), 1);
        assert_eq!(one.metric.rows(), &[vec![fq(0, 1)]]);

        let path = graph(&["a", "b", "c"], &[("a", "b", 1), ("b", "c", 2)]);
        let x = TunnelFrameSpace::build(graph_model_stars(&path).unwrap()).unwrap();
        let (pa, pc) = (x.point_of("a").unwrap(), x.point_of("c").unwrap());
        assert_eq!(*x.metric.get(pa, pc), fq(3, 1));

        let tri = graph(
            &["a", "b", "c"],
            &[("a", "b", 1), ("b", "c", 1), ("a", "c", 5)],
        );
        let x = TunnelFrameSpace::build(graph_model_stars(&tri).unwrap()).unwrap();
        let (pa, pc) = (x.point_of("a").unwrap(), x.point_of("c").unwrap());
        assert_eq!(*x.metric.get(pa, pc), fq(2, 1));
        assert_eq!(shortest_paths(&tri).get(0, 2), &fq(2, 1));
    }

    #[test]
    fn laplacian_oracle() {
        assert_eq!(
            graph_laplacian_oracle(&graph(&["a"], &[])).entries,
            vec![vec![q(0, 1)]]
        );
        let one = graph_laplacian_oracle(&graph(&["a", "b"], &[("a", "b", 4)]));
        assert_eq!(
            one.entries,
            vec![vec![q(4, 1), q(-4, 1)], vec![q(-4, 1), q(4, 1)]]
        );
        let path =
            graph_laplacian_oracle(&graph(&["a", "b", "c"], &[("a", "b", 1), ("b", "c", 2)]));
        let want: Vec<Vec<Rational>> = [[1, -1, 0], [-1, 3, -2], [0, -2, 2]]
            .iter()
            .map(|r| r.iter().map(|&x| q(x, 1)).collect())
            .collect();
        assert_eq!(path.entries, want);
    }

    #[test]
    fn interval_examples() {
        let one = interval_model(1, IntervalVariant::Hull).unwrap();
        assert_eq!(one.ids(), vec!["[0,0]", "[0,1]", "[1,1]"]);
        let (a, b) = (
            one.index_of("[0,0]").unwrap(),
            one.index_of("[1,1]").unwrap(),
        );
        assert_eq!(one.interference_value(a, b), fq(1, 1));

        let two = interval_model(2, IntervalVariant::Intersection).unwrap();
        let (l, r) = (
            two.index_of("[0,1]").unwrap(),
            two.index_of("[1,2]").unwrap(),
        );
        assert_eq!(two.interference_value(l, r), fq(0, 1));
        let (p, s) = (
            two.index_of("[0,0]").unwrap(),
            two.index_of("[2,2]").unwrap(),
        );
        assert!(two.interference(p, s).is_none());
        assert_eq!(
            interval_model(16, IntervalVariant::Hull).unwrap().len(),
            153
        );
        assert_eq!(interval_point_id(16, 3), "[03,03]");
        assert!(interval_model(0, IntervalVariant::Hull).is_err());
    }

    #[test]
    fn locale_examples() {
        let c = Carrier::new(vec!["a".into(), "b".into()]).unwrap();
        let frame = Frame::closure(
            c.clone(),
            &[c.subset(&["a"]).unwrap(), c.subset(&["b"]).unwrap()],
        )
        .unwrap();
        let weights: BTreeMap<String, Rational> =
            [("a".to_string(), q(1, 1)), ("b".to_string(), q(1, 1))].into();
        let sys = locale_model(&frame, &weights).unwrap();
        assert_eq!(sys.ids(), vec!["{a,b}", "{a}", "{b}"]);
        let a = sys.index_of("{a}").unwrap();
        assert_eq!(
            sys.tunnels()[a].intensity,
            Ext::Finite(NegLog::new(q(1, 2)).unwrap())
        );
        let top = sys.index_of("{a,b}").unwrap();
        assert!(sys.tunnels()[top].intensity.finite().unwrap().is_zero());
        assert!(sys.interference(a, sys.index_of("{b}").unwrap()).is_none());

        let empty = Frame::closure(Carrier::new(vec!["a".into()]).unwrap(), &[]).unwrap();
        assert!(locale_model(&empty, &[("a".to_string(), q(1, 1))].into()).is_err());
        assert!(locale_model(&frame, &[("a".to_string(), q(1, 1))].into()).is_err());
    }
}
