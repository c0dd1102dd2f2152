//! Square distance tables over points and their min-plus closure.

use crate::weight::{Embedding, Ext, Weight};

/// A square table of extended nonnegative distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricTable<W> {
    entries: Vec<Vec<Ext<W>>>,
}

impl<W: Weight> MetricTable<W> {
    /// Panics if `entries` is not square.
    pub fn new(entries: Vec<Vec<Ext<W>>>) -> Self {
        let n = entries.len();
        assert!(
            entries.iter().all(|row| row.len() == n),
            "metric table must be square"
        );
        Self { entries }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Ext<W>) -> Self {
        Self {
            entries: (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Ext<W> {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Ext<W>) {
        self.entries[i][j] = value;
    }

    pub fn rows(&self) -> &[Vec<Ext<W>>] {
        &self.entries
    }

    /// All-pairs min-plus closure (Floyd–Warshall with `inf` absorbing).
    /// Runs on exact integer images when the scalar kind provides them.
    #[allow(clippy::needless_range_loop)]
    pub fn closure(&self) -> Self {
        let n = self.size();
        let Some(e) = W::embed(&self.entries, n.max(2)) else {
            return self.closure_generic();
        };
        let inf = Embedding::<W>::INFINITE;
        let mut d = e.ints;
        for k in 0..n {
            for i in 0..n {
                let dik = d[i][k];
                if dik == inf {
                    continue;
                }
                for j in 0..n {
                    let via = dik.saturating_add(d[k][j]).min(inf);
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        let decode = |x: u64| {
            if x == inf {
                Ext::Infinite
            } else {
                Ext::Finite((e.decode)(x))
            }
        };
        Self {
            entries: d
                .into_iter()
                .map(|row| row.into_iter().map(decode).collect())
                .collect(),
        }
    }

    /// Floyd–Warshall directly on the scalar type.
    pub fn closure_generic(&self) -> Self {
        let n = self.size();
        let mut d = self.entries.clone();
        for k in 0..n {
            for i in 0..n {
                if !d[i][k].is_finite() {
                    continue;
                }
                for j in 0..n {
                    if !d[k][j].is_finite() {
                        continue;
                    }
                    let via = d[i][k].add(&d[k][j]);
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        Self { entries: d }
    }

    /// Checks zero diagonal, symmetry and the triangle inequality exactly.
    /// Returns the first violation found.
    pub fn check_axioms(&self) -> Result<(), String> {
        let n = self.size();
        for i in 0..n {
            if !matches!(&self.entries[i][i], Ext::Finite(w) if w.is_zero()) {
                return Err(format!("d({i},{i}) = {} is not zero", self.entries[i][i]));
            }
            for j in 0..n {
                if self.entries[i][j] != self.entries[j][i] {
                    return Err(format!(
                        "d({i},{j}) = {} but d({j},{i}) = {}",
                        self.entries[i][j], self.entries[j][i]
                    ));
                }
            }
        }
        let violation = match W::embed(&self.entries, 2) {
            Some(e) => {
                let inf = Embedding::<W>::INFINITE;
                let d = &e.ints;
                let add = |a: u64, b: u64| if a == inf || b == inf { inf } else { a + b };
                triples(n).find(|&(i, j, k)| d[i][j] > add(d[i][k], d[k][j]))
            }
            None => triples(n).find(|&(i, j, k)| {
                self.entries[i][j] > self.entries[i][k].add(&self.entries[k][j])
            }),
        };
        if let Some((i, j, k)) = violation {
            return Err(format!(
                "d({i},{j}) = {} exceeds d({i},{k}) + d({k},{j}) = {}",
                self.entries[i][j],
                self.entries[i][k].add(&self.entries[k][j])
            ));
        }
        Ok(())
    }

    /// Entrywise `self ≤ other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.size() == other.size()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
    }

    /// Entries that differ from `other`, as `(row, col)` pairs.
    pub fn differences(&self, other: &Self) -> Vec<(usize, usize)> {
        if self.size() != other.size() {
            return vec![(self.size(), other.size())];
        }
        let n = self.size();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.entries[i][j] != other.entries[i][j])
            .collect()
    }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{fq, Rational, Weight};

    fn table(rows: &[&[Option<i64>]]) -> MetricTable<Rational> {
        MetricTable::new(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|v| v.map_or(Ext::Infinite, |x| fq(x, 1)))
                        .collect()
                })
                .collect(),
        )
    }

    #[test]
    fn closure_shortens_detours() {
        let raw = table(&[
            &[Some(0), Some(1), Some(5)],
            &[Some(1), Some(0), Some(1)],
            &[Some(5), Some(1), Some(0)],
        ]);
        assert!(raw.check_axioms().is_err());
        let closed = raw.closure();
        assert_eq!(closed.get(0, 2), &fq(2, 1));
        assert!(closed.check_axioms().is_ok());
        assert!(closed.dominated_by(&raw));
        assert_eq!(closed.closure(), closed);
    }

    #[test]
    fn metric_is_fixed() {
        let m = table(&[&[Some(0), Some(2)], &[Some(2), Some(0)]]);
        assert_eq!(m.closure(), m);
    }

    #[test]
    fn disconnected_stays_infinite() {
        let m = table(&[
            &[Some(0), Some(3), None],
            &[Some(3), Some(0), None],
            &[None, None, Some(0)],
        ]);
        let c = m.closure();
        assert_eq!(c.get(0, 2), &Ext::Infinite);
        assert_eq!(c.get(2, 1), &Ext::Infinite);
        assert!(c.check_axioms().is_ok());
    }

    #[test]
    fn differences_name_entries() {
        let a = table(&[&[Some(0), Some(2)], &[Some(2), Some(0)]]);
        let mut b = a.clone();
        b.set(0, 1, fq(3, 1));
        assert_eq!(a.differences(&b), vec![(0, 1)]);
    }

    #[test]
    fn integer_path_matches_generic() {
        use crate::weight::q;
        let vals = [q(1, 3), q(2, 7), q(5, 2), q(1, 1), q(9, 4)];
        let n = 5;
        let raw = MetricTable::from_fn(n, |i, j| match (i, j) {
            _ if i == j => fq(0, 1),
            _ if (i + j) % 4 == 3 => Ext::Infinite,
            _ => Ext::Finite(vals[(i + j) % 5].clone()),
        });
        assert!(Rational::embed(raw.rows(), n).is_some());
        assert_eq!(raw.closure(), raw.closure_generic());
        assert_eq!(raw.check_axioms().is_ok(), raw.closure_generic() == raw);

        // denominators too large for u64 fall back to the generic path
        let big = q(1, i64::MAX).add(&q(1, i64::MAX - 2));
        let huge = MetricTable::from_fn(3, |i, j| {
            if i == j {
                fq(0, 1)
            } else {
                Ext::Finite(big.clone())
            }
        });
        assert!(Rational::embed(huge.rows(), 3).is_none());
        assert_eq!(huge.closure(), huge);
        assert!(huge.check_axioms().is_ok());
    }
}
