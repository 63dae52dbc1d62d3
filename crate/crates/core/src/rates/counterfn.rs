//! Counterfunctions `g: ℕ → ℕ` in a small closed term language, with exact
//! evaluation over saturating naturals and the running-maximum majorant
//! `g^M(n) = max_{i ≤ n} g(i)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::bound::{BoundNat, Saturation};
use crate::error::Error;

/// A function on the naturals evaluated over saturating values.
pub trait NatFn {
    fn eval(&self, n: &BoundNat, sat: &Saturation) -> BoundNat;

    fn at(&self, n: u64, sat: &Saturation) -> BoundNat {
        self.eval(&sat.nat(n), sat)
    }
}

/// Running-maximum scans go at most this far before switching to a
/// structural upper bound.
pub const MAJORANT_SCAN_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterfunction {
    Const(u64),
    Identity,
    /// `n ↦ a·n + b`
    Affine(u64, u64),
    /// `n ↦ base^n`
    Power(u64),
    /// Finite table; arguments past the end read the last entry.
    Table(Vec<u64>),
    /// `n ↦ g(K + n)`
    Shift(Box<Counterfunction>, BoundNat),
    /// `n ↦ f(g(n))`
    Compose(Box<Counterfunction>, Box<Counterfunction>),
    Sum(Box<Counterfunction>, Box<Counterfunction>),
    Product(Box<Counterfunction>, Box<Counterfunction>),
    /// Running maximum of a term that has no closed-form majorant.
    Majorant(Box<Counterfunction>),
}

impl Counterfunction {
    pub fn shift(g: Counterfunction, by: BoundNat) -> Self {
        Counterfunction::Shift(Box::new(g), by)
    }

    pub fn compose(f: Counterfunction, g: Counterfunction) -> Self {
        Counterfunction::Compose(Box::new(f), Box::new(g))
    }

    pub fn sum(f: Counterfunction, g: Counterfunction) -> Self {
        Counterfunction::Sum(Box::new(f), Box::new(g))
    }

    pub fn product(f: Counterfunction, g: Counterfunction) -> Self {
        Counterfunction::Product(Box::new(f), Box::new(g))
    }

    /// `k ↦ (k+1)^2`
    pub fn shifted_square() -> Self {
        Self::product(Counterfunction::Affine(1, 1), Counterfunction::Affine(1, 1))
    }

    /// Sufficient syntactic test for being nondecreasing.
    pub fn is_monotone(&self) -> bool {
        use Counterfunction::*;
        match self {
            Const(_) | Identity | Affine(..) | Majorant(_) => true,
            Power(b) => *b >= 1,
            Table(v) => v.windows(2).all(|w| w[0] <= w[1]),
            Shift(g, _) => g.is_monotone(),
            Compose(f, g) | Sum(f, g) | Product(f, g) => f.is_monotone() && g.is_monotone(),
        }
    }

    /// Largest value the term ever takes, when it is bounded in closed form.
    fn supremum(&self) -> Option<u64> {
        use Counterfunction::*;
        match self {
            Const(c) => Some(*c),
            Table(v) => v.iter().copied().max(),
            Power(0) => Some(1),
            Power(1) => Some(1),
            Affine(0, b) => Some(*b),
            _ => None,
        }
    }

    fn eval_u64(&self, n: u64, sat: &Saturation) -> BoundNat {
        self.eval(&sat.nat(n), sat)
    }
}

fn prefix_max(values: &[u64]) -> Vec<u64> {
    values
        .iter()
        .scan(0u64, |m, &v| {
            *m = (*m).max(v);
            Some(*m)
        })
        .collect()
}

/// The majorant `f^M`. Closed forms are used where they exist; otherwise the
/// result scans prefixes up to [`MAJORANT_SCAN_LIMIT`] and falls back to a
/// monotone upper bound of `f` beyond it.
pub fn majorant(f: &Counterfunction) -> Counterfunction {
    use Counterfunction::*;
    if f.is_monotone() {
        return f.clone();
    }
    match f {
        Power(0) => Const(1),
        Table(v) => Table(prefix_max(v)),
        Shift(g, BoundNat::Exact(k)) if matches!(**g, Table(_)) => {
            let Table(v) = &**g else { unreachable!() };
            let skip = k.to_usize().unwrap_or(usize::MAX);
            if skip >= v.len() {
                Const(*v.last().expect("tables are nonempty"))
            } else {
                Table(prefix_max(&v[skip..]))
            }
        }
        Compose(outer, inner) if outer.is_monotone() => {
            Compose(outer.clone(), Box::new(majorant(inner)))
        }
        _ => Majorant(Box::new(f.clone())),
    }
}

/// A monotone term pointwise above `f^M`.
fn upper_majorant(f: &Counterfunction) -> Counterfunction {
    use Counterfunction::*;
    if f.is_monotone() && !matches!(f, Majorant(_)) {
        return f.clone();
    }
    match f {
        Majorant(g) => upper_majorant(g),
        Shift(g, k) => Shift(Box::new(upper_majorant(g)), k.clone()),
        Compose(a, b) => Compose(Box::new(upper_majorant(a)), Box::new(upper_majorant(b))),
        Sum(a, b) => Sum(Box::new(upper_majorant(a)), Box::new(upper_majorant(b))),
        Product(a, b) => Product(Box::new(upper_majorant(a)), Box::new(upper_majorant(b))),
        other => majorant(other),
    }
}

impl NatFn for Counterfunction {
    fn eval(&self, n: &BoundNat, sat: &Saturation) -> BoundNat {
        use Counterfunction::*;
        match self {
            Const(c) => sat.nat(*c),
            Identity => n.clone(),
            Affine(a, b) => sat.add(&sat.mul(&sat.nat(*a), n), &sat.nat(*b)),
            Power(base) => sat.pow(&sat.nat(*base), n),
            Table(v) => {
                let last = v.len() - 1;
                let idx = n.to_u64().map_or(last, |i| (i as usize).min(last));
                sat.nat(v[idx])
            }
            Shift(g, k) => g.eval(&sat.add(k, n), sat),
            Compose(f, g) => f.eval(&g.eval(n, sat), sat),
            Sum(f, g) => sat.add(&f.eval(n, sat), &g.eval(n, sat)),
            Product(f, g) => sat.mul(&f.eval(n, sat), &g.eval(n, sat)),
            Majorant(f) => match n.to_u64() {
                Some(m) if m <= MAJORANT_SCAN_LIMIT => (0..=m)
                    .map(|i| f.eval_u64(i, sat))
                    .reduce(|a, b| a.max(&b))
                    .expect("range is nonempty"),
                _ => match f.supremum() {
                    Some(s) => sat.nat(s),
                    None => upper_majorant(f).eval(n, sat),
                },
            },
        }
    }
}

impl fmt::Display for Counterfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Counterfunction::*;
        match self {
            Const(c) => write!(f, "const({c})"),
            Identity => write!(f, "id"),
            Affine(a, b) => write!(f, "affine({a},{b})"),
            Power(b) => write!(f, "pow({b})"),
            Table(v) => {
                write!(f, "table(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Shift(g, BoundNat::Exact(k)) => write!(f, "shift({g},{k})"),
            Shift(g, BoundNat::Huge) => write!(f, "shift({g},huge)"),
            Compose(a, b) => write!(f, "compose({a},{b})"),
            Sum(a, b) => write!(f, "add({a},{b})"),
            Product(a, b) => write!(f, "mul({a},{b})"),
            Majorant(g) => write!(f, "majorant({g})"),
        }
    }
}

impl FromStr for Counterfunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut parser = Parser { input: s, pos: 0 };
        let term = parser.term()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(term)
    }
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> Error {
        Error::CounterfunctionSyntax {
            input: self.input.to_string(),
            reason: format!("{reason} at offset {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.input[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> Result<(), Error> {
        self.skip_ws();
        if self.input[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let rest = &self.input[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn number(&mut self) -> Result<u64, Error> {
        self.skip_ws();
        let rest = &self.input[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a natural number"));
        }
        let value = rest[..len].parse().map_err(|_| self.error("number out of range"))?;
        self.pos += len;
        Ok(value)
    }

    fn term(&mut self) -> Result<Counterfunction, Error> {
        use Counterfunction::*;
        let name = self.ident().to_ascii_lowercase();
        let term = match name.as_str() {
            "id" | "identity" => return Ok(Identity),
            "const" => {
                self.eat('(')?;
                Const(self.number()?)
            }
            "affine" => {
                self.eat('(')?;
                let a = self.number()?;
                self.eat(',')?;
                Affine(a, self.number()?)
            }
            "pow" => {
                self.eat('(')?;
                Power(self.number()?)
            }
            "table" => {
                self.eat('(')?;
                let mut v = vec![self.number()?];
                loop {
                    self.skip_ws();
                    if self.input[self.pos..].starts_with(',') {
                        self.pos += 1;
                        v.push(self.number()?);
                    } else {
                        break;
                    }
                }
                Table(v)
            }
            "shift" => {
                self.eat('(')?;
                let g = self.term()?;
                self.eat(',')?;
                Shift(Box::new(g), BoundNat::Exact(BigUint::from(self.number()?)))
            }
            "compose" | "add" | "mul" => {
                self.eat('(')?;
                let a = Box::new(self.term()?);
                self.eat(',')?;
                let b = Box::new(self.term()?);
                match name.as_str() {
                    "compose" => Compose(a, b),
                    "add" => Sum(a, b),
                    _ => Product(a, b),
                }
            }
            "majorant" => {
                self.eat('(')?;
                majorant(&self.term()?)
            }
            "" => return Err(self.error("expected a term")),
            other => return Err(self.error(&format!("unknown constructor `{other}`"))),
        };
        self.eat(')')?;
        Ok(term)
    }
}
