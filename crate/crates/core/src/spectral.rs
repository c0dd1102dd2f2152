//! Tunnel and proliferative Laplacians, the permutation unitary between
//! them, exact conjugation and nilpotency checks, and float spectra.
//!
//! Operators act on columns: column `T` holds the image of the basis vector
//! of `T`. Matrix entries are exact weights; floats appear only inside
//! [`spectrum`].

use std::cmp::Ordering;
use std::collections::BTreeSet;

use nalgebra::{DMatrix, Schur};
pub use num_complex::Complex64;
use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::equivalence::Correspondence;
use crate::error::{invalid, Error, Result};
use crate::prolif::ProliferativeBase;
use crate::tunnel::TunnelSystem;
use crate::weight::{Ext, Rational, Weight};

/// Default largest dimension accepted by [`spectrum`].
pub const DEFAULT_MAX_DIM: usize = 128;

/// Environment variable overriding [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "FRAMESPACE_MAX_DIM";

/// `(U, T)` pairs meaning "U is an immediate substructure of T".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubstructureRelation {
    pub pairs: BTreeSet<(String, String)>,
}

impl SubstructureRelation {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, S)>) -> Self {
        Self {
            pairs: pairs
                .into_iter()
                .map(|(u, t)| (u.into(), t.into()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A square matrix over a named basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix<W> {
    pub basis: Vec<String>,
    pub entries: Vec<Vec<W>>,
}

impl<W: Weight> OperatorMatrix<W> {
    pub fn zero(basis: Vec<String>) -> Self {
        let n = basis.len();
        Self {
            basis,
            entries: vec![vec![W::zero(); n]; n],
        }
    }

    pub fn new(basis: Vec<String>, entries: Vec<Vec<W>>) -> Result<Self> {
        let n = basis.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(invalid(format!(
                "matrix over a basis of {n} must be {n}×{n}"
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, row: usize, col: usize) -> &W {
        &self.entries[row][col]
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j].to_f64())
    }
}

fn finite_gap<W: Weight>(high: &Ext<W>, low: &Ext<W>, what: impl Fn() -> String) -> Result<W> {
    match (high, low) {
        (Ext::Finite(h), Ext::Finite(l)) => h
            .gap(l)
            .ok_or_else(|| invalid(format!("{}: {l:?} exceeds {h:?}", what()))),
        _ => Err(invalid(format!("{}: infinite gap", what()))),
    }
}

/// Column `T` carries `Λ(T) - Λ(U)` at row `U` for each pair `(U, T)`.
pub fn tunnel_laplacian<W: Weight>(
    system: &TunnelSystem<W>,
    sub: &SubstructureRelation,
) -> Result<OperatorMatrix<W>> {
    let mut m = OperatorMatrix::zero(system.ids());
    let lambda = system.intensities();
    for (u, t) in &sub.pairs {
        let find = |id: &str| {
            system
                .index_of(id)
                .ok_or_else(|| invalid(format!("substructure names unknown tunnel {id:?}")))
        };
        let (ui, ti) = (find(u)?, find(t)?);
        if ui == ti {
            return Err(invalid(format!(
                "substructure relation is reflexive at {u:?}"
            )));
        }
        let gap = finite_gap(&lambda[ti], &lambda[ui], || {
            format!("substructure ({u}, {t}) violates Λ({u}) ≤ Λ({t})")
        })?;
        m.entries[ui][ti] = gap;
    }
    Ok(m)
}

/// Column `d` carries `C(d) - C(e)` at row `e` for each immediate
/// refinement `e` of `d`.
pub fn prolif_laplacian<W: Weight>(base: &ProliferativeBase<W>) -> Result<OperatorMatrix<W>> {
    let mut m = OperatorMatrix::zero(base.ids());
    let rel = base.refinement_relation();
    for &(e, d) in &rel.immediate {
        m.entries[e][d] = finite_gap(base.cost(d), base.cost(e), || {
            format!("refinement ({}, {})", base.ids()[e], base.ids()[d])
        })?;
    }
    Ok(m)
}

/// The image of the immediate-refinement relation under the correspondence.
pub fn derive_substructure_from_base<W: Weight>(
    base: &ProliferativeBase<W>,
    corr: &Correspondence,
) -> Result<SubstructureRelation> {
    let ids = base.ids();
    let tunnel = |i: usize| {
        corr.tunnel_of(&ids[i])
            .map(str::to_string)
            .ok_or_else(|| invalid(format!("correspondence misses distinction {:?}", ids[i])))
    };
    let pairs = base
        .refinement_relation()
        .immediate
        .into_iter()
        .map(|(e, d)| Ok((tunnel(e)?, tunnel(d)?)))
        .collect::<Result<BTreeSet<_>>>()?;
    Ok(SubstructureRelation { pairs })
}

/// A permutation of basis indices: source index `i` maps to target index
/// `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationUnitary {
    perm: Vec<usize>,
}

impl PermutationUnitary {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("permutation is not a bijection"));
            }
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    /// The permutation sending tunnel basis vectors to the basis vectors of
    /// their distinctions.
    pub fn from_correspondence(
        corr: &Correspondence,
        tunnels: &[String],
        distinctions: &[String],
    ) -> Result<Self> {
        let perm = tunnels
            .iter()
            .map(|t| {
                let d = corr
                    .distinction_of(t)
                    .ok_or_else(|| invalid(format!("tunnel {t:?} has no partner")))?;
                distinctions
                    .iter()
                    .position(|x| x == d)
                    .ok_or_else(|| invalid(format!("distinction {d:?} is not in the basis")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// `P m Pᵀ` over the given target basis.
    pub fn conjugate<W: Weight>(
        &self,
        m: &OperatorMatrix<W>,
        basis: Vec<String>,
    ) -> OperatorMatrix<W> {
        let mut out = OperatorMatrix::zero(basis);
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                out.entries[self.perm[i]][self.perm[j]] = m.entries[i][j].clone();
            }
        }
        out
    }
}

/// Result of an exact conjugation test.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationReport {
    pub equal: bool,
    /// First unequal `(row, col)` of the target matrix, row-major.
    pub first_mismatch: Option<(usize, usize)>,
    /// Largest absolute entry difference, in floating point.
    pub max_discrepancy: f64,
}

/// Exact test of `U dT Uᵀ = dP`.
pub fn conjugation_check<W: Weight>(
    u: &PermutationUnitary,
    dt: &OperatorMatrix<W>,
    dp: &OperatorMatrix<W>,
) -> Result<ConjugationReport> {
    if u.len() != dt.dim() || dt.dim() != dp.dim() {
        return Err(invalid(format!(
            "dimension mismatch: permutation {}, tunnel Laplacian {}, proliferative Laplacian {}",
            u.len(),
            dt.dim(),
            dp.dim()
        )));
    }
    let moved = u.conjugate(dt, dp.basis.clone());
    let mut first = None;
    let mut max = 0f64;
    for r in 0..dp.dim() {
        for c in 0..dp.dim() {
            let (a, b) = (&moved.entries[r][c], &dp.entries[r][c]);
            if a != b {
                first.get_or_insert((r, c));
                max = max.max((a.to_f64() - b.to_f64()).abs());
            }
        }
    }
    Ok(ConjugationReport {
        equal: first.is_none(),
        first_mismatch: first,
        max_discrepancy: max,
    })
}

/// The dimension bound for [`spectrum`], read from the environment.
pub fn configured_max_dim() -> Result<usize> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            invalid(format!(
                "{MAX_DIM_ENV} must be a nonnegative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

/// Eigenvalues with multiplicity, sorted by real then imaginary part.
pub fn spectrum<W: Weight>(m: &OperatorMatrix<W>) -> Result<Vec<Complex64>> {
    spectrum_bounded(m, configured_max_dim()?)
}

/// [`spectrum`] with an explicit dimension bound.
///
/// The support digraph is split into strongly connected components first.
/// Ordering the basis by component makes the matrix block triangular, so
/// singleton components contribute their diagonal entry exactly and only
/// the remaining blocks go through Hessenberg reduction and shifted QR.
pub fn spectrum_bounded<W: Weight>(
    m: &OperatorMatrix<W>,
    max_dim: usize,
) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n > max_dim {
        return Err(Error::OracleBoundExceeded(format!(
            "dimension {n} exceeds the spectral bound {max_dim}"
        )));
    }
    let dense = m.to_f64();
    let scale = dense.iter().fold(1f64, |s, x| s.max(x.abs()));
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && !m.entries[i][j].is_zero() {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    blocks.sort();

    let mut values = Vec::with_capacity(n);
    for block in &blocks {
        if let [i] = block[..] {
            values.push(Complex64::new(dense[(i, i)], 0.0));
            continue;
        }
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |a, b| dense[(block[a], block[b])]);
        match block_eigenvalues(&sub, scale) {
            Some(found) => values.extend(found),
            None => {
                sort_canonical(&mut values);
                return Err(Error::NumericalFailure {
                    message: format!("shifted QR did not converge on a block of size {k}"),
                    partial: values.iter().map(|z| (z.re, z.im)).collect(),
                });
            }
        }
    }
    let tiny = 1e-13 * scale;
    for z in &mut values {
        if z.re.abs() < tiny {
            z.re = 0.0;
        }
        if z.im.abs() < tiny {
            z.im = 0.0;
        }
    }
    sort_canonical(&mut values);
    Ok(values)
}

/// Diagonal shifts tried in turn, as multiples of the matrix scale.
/// Francis steps can cycle on permutation-like blocks; a shift changes the
/// iteration without changing the spectrum beyond a translation.
const RETRY_SHIFTS: [f64; 4] = [0.0, 0.5, -0.375, 1.125];

fn block_eigenvalues(block: &DMatrix<f64>, scale: f64) -> Option<Vec<Complex64>> {
    let k = block.nrows();
    RETRY_SHIFTS.iter().find_map(|&t| {
        let sigma = t * scale;
        let shifted = block + DMatrix::identity(k, k) * sigma;
        Schur::try_new(shifted, f64::EPSILON, 1000 * k)
            .map(|s| s.complex_eigenvalues().iter().map(|z| z - sigma).collect())
    })
}

fn sort_canonical(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest distance between two eigenvalue multisets under a greedy
/// nearest-partner matching; `inf` when sizes differ.
pub fn max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0f64;
    for x in a {
        let best = (0..b.len()).filter(|&j| !used[j]).min_by(|&i, &j| {
            (x - b[i])
                .norm()
                .partial_cmp(&(x - b[j]).norm())
                .unwrap_or(Ordering::Equal)
        });
        if let Some(j) = best {
            used[j] = true;
            worst = worst.max((x - b[j]).norm());
        }
    }
    worst
}

/// `m^n = 0` for an `n×n` matrix. Exact rational powers are used whenever
/// every entry is rational; otherwise the entries are nonnegative gaps, no
/// cancellation can occur, and nilpotency is acyclicity of the support.
pub fn nilpotency_check<W: Weight>(m: &OperatorMatrix<W>) -> bool {
    let exact: Option<Vec<Vec<Rational>>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(Weight::exact).collect())
        .collect();
    match exact {
        Some(q) => nilpotent_exact(&q),
        None => nilpotent_by_support(m),
    }
}

/// Exact test of `q^n = 0` by repeated squaring.
pub fn nilpotent_exact(q: &[Vec<Rational>]) -> bool {
    let n = q.len();
    let mut power = q.to_vec();
    let mut k = 1;
    while k < n {
        power = mat_mul(&power, &power);
        k *= 2;
    }
    // q^(2^j) with 2^j ≥ n vanishes iff q^n does: the nilpotency index is at most n
    power.iter().flatten().all(Zero::is_zero)
}

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut out = vec![vec![<Rational as Zero>::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if Zero::is_zero(&a[i][k]) {
                continue;
            }
            for j in 0..n {
                if !Zero::is_zero(&b[k][j]) {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

/// Nilpotency for matrices with nonnegative entries: no diagonal entries
/// and no directed cycle among the nonzero entries.
pub fn nilpotent_by_support<W: Weight>(m: &OperatorMatrix<W>) -> bool {
    let n = m.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if !m.entries[i][j].is_zero() {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    !petgraph::algo::is_cyclic_directed(&graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::functor_f;
    use crate::tunnel::{InterferenceEntry, TunnelFrameSpace};
    use crate::weight::{fq, q};

    fn chain() -> ProliferativeBase<Rational> {
        ProliferativeBase::from_triples(
            vec![
                ("a".into(), fq(1, 1)),
                ("x".into(), fq(1, 1)),
                ("b".into(), fq(2, 1)),
            ],
            &[("a", "x", "b")],
            vec![],
        )
        .unwrap()
    }

    fn rmat(rows: &[&[i64]]) -> OperatorMatrix<Rational> {
        let basis = (0..rows.len()).map(|i| format!("v{i}")).collect();
        OperatorMatrix::new(
            basis,
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn two(l_a: i64, l_b: i64) -> TunnelSystem<Rational> {
        TunnelSystem::new(
            vec![("a".into(), fq(l_a, 1)), ("b".into(), fq(l_b, 1))],
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn tunnel_laplacian_examples() {
        let sys = two(1, 2);
        assert_eq!(
            tunnel_laplacian(&sys, &SubstructureRelation::default()).unwrap(),
            OperatorMatrix::zero(sys.ids())
        );
        let m = tunnel_laplacian(&sys, &SubstructureRelation::new([("a", "b")])).unwrap();
        assert_eq!(
            m.entries,
            vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]
        );
        assert!(tunnel_laplacian(&sys, &SubstructureRelation::new([("b", "a")])).is_err());
        assert!(tunnel_laplacian(&sys, &SubstructureRelation::new([("a", "a")])).is_err());
        assert!(tunnel_laplacian(&sys, &SubstructureRelation::new([("a", "z")])).is_err());

        let three = TunnelSystem::<Rational>::new(
            vec![
                ("a".into(), fq(1, 1)),
                ("b".into(), fq(2, 1)),
                ("x".into(), fq(1, 1)),
            ],
            vec![],
            None,
        )
        .unwrap();
        let m =
            tunnel_laplacian(&three, &SubstructureRelation::new([("a", "b"), ("x", "b")])).unwrap();
        let col_b: Vec<_> = (0..3).map(|r| m.get(r, 1).clone()).collect();
        assert_eq!(col_b, vec![q(1, 1), q(0, 1), q(1, 1)]);
    }

    #[test]
    fn prolif_laplacian_examples() {
        let none =
            ProliferativeBase::<Rational>::from_triples(vec![("a".into(), fq(1, 1))], &[], vec![])
                .unwrap();
        assert_eq!(
            prolif_laplacian(&none).unwrap(),
            OperatorMatrix::zero(vec!["a".into()])
        );
        let base = chain();
        let m = prolif_laplacian(&base).unwrap();
        // basis a, b, x
        assert_eq!(m.entries[0][1], q(1, 1));
        assert_eq!(m.entries[2][1], q(1, 1));
        assert_eq!(
            m.entries
                .iter()
                .flatten()
                .filter(|x| !Zero::is_zero(*x))
                .count(),
            2
        );
    }

    #[test]
    fn chain_conjugation_and_spectrum() {
        let base = chain();
        let y = crate::prolif::ProlifFrameSpace::build(base.clone()).unwrap();
        let (x, corr) = crate::equivalence::functor_g(&y).unwrap();
        let sub = derive_substructure_from_base(&base, &corr).unwrap();
        assert_eq!(sub, SubstructureRelation::new([("a", "b"), ("x", "b")]));
        let dt = tunnel_laplacian(&x.system, &sub).unwrap();
        let dp = prolif_laplacian(&base).unwrap();
        let u =
            PermutationUnitary::from_correspondence(&corr, &x.system.ids(), &base.ids()).unwrap();
        let report = conjugation_check(&u, &dt, &dp).unwrap();
        assert!(report.equal);
        assert!(nilpotency_check(&dp));
        assert!(spectrum(&dp).unwrap().iter().all(|z| z.norm() < 1e-9));

        let mut bad = dp.clone();
        bad.entries[2][1] = q(3, 2);
        let report = conjugation_check(&u, &dt, &bad).unwrap();
        assert_eq!(report.first_mismatch, Some((2, 1)));
        assert!((report.max_discrepancy - 0.5).abs() < 1e-15);
        assert!(conjugation_check(&PermutationUnitary::identity(2), &dt, &dp).is_err());
    }

    #[test]
    fn conjugation_through_functor_f() {
        let sys = TunnelSystem::<Rational>::new(
            vec![
                ("A".into(), fq(1, 1)),
                ("B".into(), fq(1, 1)),
                ("C".into(), fq(2, 1)),
            ],
            vec![InterferenceEntry::new("A", "B", fq(2, 1)).with_result("C")],
            None,
        )
        .unwrap();
        let x = TunnelFrameSpace::build(sys).unwrap();
        let (y, corr) = functor_f(&x).unwrap();
        let sub = derive_substructure_from_base(&y.base, &corr).unwrap();
        let dt = tunnel_laplacian(&x.system, &sub).unwrap();
        let dp = prolif_laplacian(&y.base).unwrap();
        let u =
            PermutationUnitary::from_correspondence(&corr, &x.system.ids(), &y.base.ids()).unwrap();
        assert!(conjugation_check(&u, &dt, &dp).unwrap().equal);
        assert_eq!(sub.len(), y.base.refinement_relation().immediate.len());
    }

    #[test]
    fn spectra_of_small_matrices() {
        let zero = rmat(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(spectrum(&zero).unwrap(), vec![Complex64::zero(); 3]);
        let diag = rmat(&[&[2, 0], &[0, 3]]);
        assert_eq!(
            spectrum(&diag).unwrap(),
            vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]
        );
        let rot = rmat(&[&[0, -1], &[1, 0]]);
        let s = spectrum(&rot).unwrap();
        assert!(max_deviation(&s, &[Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]) < 1e-12);
        let sym = rmat(&[&[2, 1], &[1, 2]]);
        let s = spectrum(&sym).unwrap();
        assert!(max_deviation(&s, &[Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)]) < 1e-12);
        assert!(matches!(
            spectrum_bounded(&sym, 1),
            Err(Error::OracleBoundExceeded(_))
        ));
    }

    #[test]
    fn cyclic_block_converges() {
        // plain Francis steps stall on the strongly connected 4-block here
        let f = |n, d| q(n, d);
        let entries = vec![
            vec![f(0, 1), f(0, 1), f(3, 2), f(0, 1), f(0, 1)],
            vec![f(0, 1), f(0, 1), f(0, 1), f(0, 1), f(4, 3)],
            vec![f(0, 1), f(0, 1), f(0, 1), f(2, 1), f(0, 1)],
            vec![f(0, 1), f(0, 1), f(0, 1), f(0, 1), f(4, 3)],
            vec![f(5, 2), f(0, 1), f(0, 1), f(2, 3), f(0, 1)],
        ];
        let m = OperatorMatrix::new((0..5).map(|i| i.to_string()).collect(), entries).unwrap();
        let values = spectrum(&m).unwrap();
        assert_eq!(values.len(), 5);
        let dense = m.to_f64().map(|x| Complex64::new(x, 0.0));
        for z in &values {
            let shifted = &dense - DMatrix::<Complex64>::identity(5, 5) * *z;
            assert!(
                shifted.determinant().norm() < 1e-9,
                "{z} is not an eigenvalue"
            );
        }
    }

    #[test]
    fn nilpotency_examples() {
        assert!(nilpotency_check(&rmat(&[&[0, 0], &[0, 0]])));
        assert!(nilpotency_check(&rmat(&[
            &[0, 0, 0],
            &[4, 0, 0],
            &[1, 7, 0]
        ])));
        assert!(!nilpotency_check(&rmat(&[&[0, 0], &[0, 1]])));
        // nilpotent with cancellation: exact powers see it, support does not
        let cancel = rmat(&[&[1, 1], &[-1, -1]]);
        assert!(nilpotency_check(&cancel));
        assert!(!nilpotent_by_support(&cancel));
    }
}
