//! Exact nonnegative scalars used for intensities, costs and distances.
//!
//! Two scalar kinds are supported. [`Rational`] is the ordinary exact
//! rational. [`NegLog`] stores `-log(mu)` symbolically through its rational
//! argument `mu` in `(0, 1]`, which keeps the locale model exact: sums become
//! products of arguments and comparisons reverse the argument order.
//!
//! Both kinds are wrapped by [`Ext`] to add the absorbing value `inf`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A totally ordered, additive, nonnegative scalar.
pub trait Weight: Clone + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    /// Tag written into files so a reader can pick the right scalar kind.
    const KIND: &'static str;

    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    /// `self - lower`, or `None` when `lower > self`.
    fn gap(&self, lower: &Self) -> Option<Self>;
    /// Some value strictly greater than `self`.
    fn above(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn parse(text: &str) -> Result<Self>;
    fn render(&self) -> String;
    /// The value as an exact rational, when it is one.
    fn exact(&self) -> Option<Rational>;

    /// An exact embedding of a table's finite values into integers that
    /// preserves order and addition, provided any sum of at most `terms`
    /// entries stays below [`Embedding::INFINITE`].
    fn embed(_table: &[Vec<Ext<Self>>], _terms: usize) -> Option<Embedding<Self>> {
        None
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

/// Parses `"n/d"`, `"n"` or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational literal: {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let mut r = BigRational::from_integer(int.abs()) + BigRational::new(frac_num, scale);
        if negative {
            r = -r;
        }
        return Ok(r);
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Renders as `"n/d"`, or `"n"` for integers.
pub fn render_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

impl Weight for Rational {
    const KIND: &'static str = "rational";

    fn embed(table: &[Vec<Ext<Self>>], terms: usize) -> Option<Embedding<Self>> {
        let finite = || table.iter().flatten().filter_map(Ext::finite);
        let scale = finite().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let mut largest = 0u64;
        let ints = table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Ext::Infinite => Some(Embedding::<Self>::INFINITE),
                        Ext::Finite(r) => {
                            let x = (r.numer() * (&scale / r.denom())).to_u64()?;
                            largest = largest.max(x);
                            Some(x)
                        }
                    })
                    .collect::<Option<Vec<u64>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        let bound = largest.checked_mul(terms.max(1) as u64)?;
        (bound < Embedding::<Self>::INFINITE).then(|| Embedding {
            ints,
            decode: Box::new(move |x| BigRational::new(x.into(), scale.clone())),
        })
    }

    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn gap(&self, lower: &Self) -> Option<Self> {
        (lower <= self).then(|| self - lower)
    }
    fn above(&self) -> Self {
        self + BigRational::one()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn parse(text: &str) -> Result<Self> {
        let r = parse_rational(text)?;
        if r.is_negative() {
            return Err(Error::InvalidInput(format!("negative value {text:?}")));
        }
        Ok(r)
    }
    fn render(&self) -> String {
        render_rational(self)
    }
    fn exact(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Integer images of a table's entries and the map back.
pub struct Embedding<W> {
    pub ints: Vec<Vec<u64>>,
    pub decode: Box<dyn Fn(u64) -> W>,
}

impl<W> Embedding<W> {
    /// Image of `inf`; finite sums stay strictly below it.
    pub const INFINITE: u64 = u64::MAX / 4;
}

/// The value `-log(mu)` for a rational `mu` in `(0, 1]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NegLog {
    mu: Rational,
}

impl NegLog {
    pub fn new(mu: Rational) -> Result<Self> {
        if !mu.is_positive() || mu > BigRational::one() {
            return Err(Error::InvalidInput(format!(
                "-log argument must lie in (0, 1], got {}",
                render_rational(&mu)
            )));
        }
        Ok(Self { mu })
    }

    /// The rational argument `mu`.
    pub fn argument(&self) -> &Rational {
        &self.mu
    }
}

impl Ord for NegLog {
    fn cmp(&self, other: &Self) -> Ordering {
        // -log is decreasing
        other.mu.cmp(&self.mu)
    }
}

impl PartialOrd for NegLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Weight for NegLog {
    const KIND: &'static str = "neglog";

    fn zero() -> Self {
        Self { mu: One::one() }
    }
    fn add(&self, other: &Self) -> Self {
        Self {
            mu: &self.mu * &other.mu,
        }
    }
    fn gap(&self, lower: &Self) -> Option<Self> {
        (lower <= self).then(|| Self {
            mu: &self.mu / &lower.mu,
        })
    }
    fn above(&self) -> Self {
        Self {
            mu: &self.mu / BigRational::from_integer(2.into()),
        }
    }
    fn to_f64(&self) -> f64 {
        -rational_to_f64(&self.mu).ln()
    }
    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "0" {
            return Ok(Self::zero());
        }
        let inner = t
            .strip_prefix("-log(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected -log(n/d), got {text:?}")))?;
        Self::new(parse_rational(inner)?)
    }
    fn render(&self) -> String {
        format!("-log({})", render_rational(&self.mu))
    }
    fn exact(&self) -> Option<Rational> {
        // -log(mu) is irrational for every rational mu other than 1
        self.mu.is_one().then(Zero::zero)
    }
}

/// A scalar extended with an absorbing infinity. `Finite(_) < Infinite`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Ext<W> {
    Finite(W),
    Infinite,
}

impl<W: Weight> Ext<W> {
    pub fn zero() -> Self {
        Ext::Finite(W::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(&self) -> Option<&W> {
        match self {
            Ext::Finite(w) => Some(w),
            Ext::Infinite => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a.add(b)),
            _ => Ext::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Finite(w) => w.to_f64(),
            Ext::Infinite => f64::INFINITY,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "Infinity" | "∞" => Ok(Ext::Infinite),
            t => W::parse(t).map(Ext::Finite),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Ext::Finite(w) => w.render(),
            Ext::Infinite => "inf".to_string(),
        }
    }
}

impl<W: Weight> fmt::Display for Ext<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Shorthand for a finite rational `n/d`.
pub fn q(n: i64, d: i64) -> Rational {
    BigRational::new(n.into(), d.into())
}

/// Shorthand for a finite extended rational `n/d`.
pub fn fq(n: i64, d: i64) -> Ext<Rational> {
    Ext::Finite(q(n, d))
}
