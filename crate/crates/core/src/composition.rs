//! Partial composition tables shared by proliferative bases and the
//! auxiliary record carried by tunnel systems.
//!
//! A composite `d · e` either names a distinction of the base or an
//! auxiliary composite that exists only to carry a cost. Tunnel interference
//! synthesizes one auxiliary composite per unordered interfering pair, so a
//! tunnel system and its proliferative base hold exactly the same data.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{invalid, Result};
use crate::weight::{Ext, Weight};

/// Separator used in synthesized composite identifiers.
pub const COMPOSITE_SEPARATOR: &str = "⋈";

/// The composition operation `(d, e) ↦ d · e` with costs for composites
/// that are not distinctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition<W> {
    pub compose: BTreeMap<(String, String), String>,
    pub composites: BTreeMap<String, Ext<W>>,
}

impl<W> Default for Composition<W> {
    fn default() -> Self {
        Self {
            compose: BTreeMap::new(),
            composites: BTreeMap::new(),
        }
    }
}

/// One unordered interference entry, keyed by sorted tunnel indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interference<W> {
    pub value: Ext<W>,
    /// The tunnel produced by the interference, when it is one.
    pub result: Option<usize>,
}

pub type InterferenceTable<W> = BTreeMap<(usize, usize), Interference<W>>;

impl<W: Weight> Composition<W> {
    pub fn is_empty(&self) -> bool {
        self.compose.is_empty() && self.composites.is_empty()
    }

    /// Checks that operands are distinctions and results are distinctions or
    /// composites, and that composites do not shadow distinctions.
    pub fn validate(&self, ids: &[String]) -> Result<()> {
        let known: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        for c in self.composites.keys() {
            if known.contains(c.as_str()) {
                return Err(invalid(format!("composite {c:?} shadows a distinction")));
            }
        }
        for ((d, e), r) in &self.compose {
            for operand in [d, e] {
                if !known.contains(operand.as_str()) {
                    return Err(invalid(format!("unknown operand {operand:?} in ({d}·{e})")));
                }
            }
            if !known.contains(r.as_str()) && !self.composites.contains_key(r) {
                return Err(invalid(format!("result {r:?} of ({d}·{e}) is undeclared")));
            }
        }
        Ok(())
    }

    /// Dense lookup table over `ids`: entry `[d][e]` holds the result index
    /// (when it is a distinction) and the composite's cost.
    pub fn table(&self, ids: &[String], costs: &[Ext<W>]) -> Vec<Vec<Option<Product<W>>>> {
        let index: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let n = ids.len();
        let mut table = vec![vec![None; n]; n];
        for ((d, e), r) in &self.compose {
            let (Some(&i), Some(&j)) = (index.get(d.as_str()), index.get(e.as_str())) else {
                continue;
            };
            let result = index.get(r.as_str()).copied();
            let cost = match result {
                Some(k) => costs[k].clone(),
                None => self.composites.get(r).cloned().unwrap_or(Ext::Infinite),
            };
            table[i][j] = Some(Product { result, cost });
        }
        table
    }

    /// Finds a triple where both parenthesizations are defined and differ.
    pub fn check_associative(&self, ids: &[String], costs: &[Ext<W>]) -> Result<()> {
        let table = self.table(ids, costs);
        let n = ids.len();
        let res = |i: usize, j: usize| table[i][j].as_ref();
        for d in 0..n {
            for e in 0..n {
                let Some(Product {
                    result: Some(de), ..
                }) = res(d, e)
                else {
                    continue;
                };
                for f in 0..n {
                    let Some(Product {
                        result: Some(ef), ..
                    }) = res(e, f)
                    else {
                        continue;
                    };
                    let left = self.compose.get(&(ids[*de].clone(), ids[f].clone()));
                    let right = self.compose.get(&(ids[d].clone(), ids[*ef].clone()));
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            return Err(invalid(format!(
                                "composition not associative at ({}, {}, {}): {l} ≠ {r}",
                                ids[d], ids[e], ids[f]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A defined composite: its result (if it is a distinction) and its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product<W> {
    pub result: Option<usize>,
    pub cost: Ext<W>,
}

/// The composition a tunnel system's interference induces: both orders of
/// an interfering pair compose to the interference result, or to a fresh
/// composite carrying the interference value.
pub fn synthesize<W: Weight>(
    ids: &[String],
    interference: &InterferenceTable<W>,
) -> Composition<W> {
    let mut taken: BTreeSet<String> = ids.iter().cloned().collect();
    let mut out = Composition::default();
    for (&(i, j), entry) in interference {
        let name = match entry.result {
            Some(r) => ids[r].clone(),
            None => {
                let mut name = format!("{}{COMPOSITE_SEPARATOR}{}", ids[i], ids[j]);
                while taken.contains(&name) {
                    name.push('\'');
                }
                taken.insert(name.clone());
                out.composites.insert(name.clone(), entry.value.clone());
                name
            }
        };
        out.compose
            .insert((ids[i].clone(), ids[j].clone()), name.clone());
        out.compose.insert((ids[j].clone(), ids[i].clone()), name);
    }
    out
}

/// Symmetric interference read off a composition: the cheaper of the two
/// composition orders, with the diagonal fixed at zero.
#[allow(clippy::needless_range_loop)]
pub fn derive_interference<W: Weight>(
    ids: &[String],
    costs: &[Ext<W>],
    composition: &Composition<W>,
) -> InterferenceTable<W> {
    let table = composition.table(ids, costs);
    let n = ids.len();
    let mut out = BTreeMap::new();
    for i in 0..n {
        out.insert(
            (i, i),
            Interference {
                value: Ext::zero(),
                result: None,
            },
        );
        for j in i + 1..n {
            let best = [table[i][j].as_ref(), table[j][i].as_ref()]
                .into_iter()
                .flatten()
                .fold(None::<&Product<W>>, |best, p| match best {
                    Some(b) if b.cost <= p.cost => Some(b),
                    _ => Some(p),
                });
            if let Some(p) = best {
                out.insert(
                    (i, j),
                    Interference {
                        value: p.cost.clone(),
                        result: p.result,
                    },
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{fq, Rational};

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn synthesized_names_avoid_collisions() {
        let names = ids(&["A", "A⋈B", "B"]);
        let mut table: InterferenceTable<Rational> = BTreeMap::new();
        table.insert(
            (0, 2),
            Interference {
                value: fq(2, 1),
                result: None,
            },
        );
        let c = synthesize(&names, &table);
        assert_eq!(c.compose[&("A".to_string(), "B".to_string())], "A⋈B'");
        assert_eq!(c.composites["A⋈B'"], fq(2, 1));
        assert!(c.validate(&names).is_ok());
    }

    #[test]
    fn derive_inverts_synthesize() {
        let names = ids(&["A", "B", "C"]);
        let costs = vec![fq(1, 1), fq(2, 1), fq(3, 1)];
        let mut table: InterferenceTable<Rational> = BTreeMap::new();
        for i in 0..3 {
            table.insert(
                (i, i),
                Interference {
                    value: fq(0, 1),
                    result: None,
                },
            );
        }
        table.insert(
            (0, 1),
            Interference {
                value: fq(3, 1),
                result: Some(2),
            },
        );
        table.insert(
            (1, 2),
            Interference {
                value: fq(5, 2),
                result: None,
            },
        );
        let c = synthesize(&names, &table);
        assert_eq!(derive_interference(&names, &costs, &c), table);
    }

    #[test]
    fn associativity_violation_reported() {
        let names = ids(&["a", "b", "c"]);
        let costs = vec![fq(0, 1); 3];
        let mut c: Composition<Rational> = Composition::default();
        c.compose.insert(("a".into(), "a".into()), "a".into());
        c.compose.insert(("a".into(), "b".into()), "c".into());
        c.compose.insert(("c".into(), "b".into()), "a".into());
        c.compose.insert(("b".into(), "b".into()), "b".into());
        // (a·b)·b = c·b = a ; a·(b·b) = a·b = c
        assert!(c.check_associative(&names, &costs).is_err());
    }
}
