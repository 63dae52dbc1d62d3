//! Finite-dimensional Euclidean arithmetic, the compact convex sets the
//! iteration lives on (boxes and balls), and their grid-based modulus of
//! total boundedness.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{BoundNat, NatFn, Saturation};

/// A point of ℝ^d with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ContractViolation("a point needs at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::ContractViolation(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    /// Builds a point from coordinates already known to be finite.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() })
        }
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.check_dim(other)?;
        Ok(Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        self.check_dim(other)?;
        Ok(Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn dist(&self, other: &Point) -> Result<f64> {
        Ok(norm(&self.sub(other)?))
    }

    pub fn dist_sq(&self, other: &Point) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.0)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn inner(u: &Point, v: &Point) -> Result<f64> {
    u.check_dim(v)?;
    Ok(u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum())
}

pub fn norm(u: &Point) -> f64 {
    u.0.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Returns `lambda * u + (1 - lambda) * v`, evaluated as `v + lambda * (u - v)` so that
/// equal endpoints and the weights 0 and 1 are reproduced exactly.
pub fn convex_combination(lambda: f64, u: &Point, v: &Point) -> Result<Point> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ContractViolation(format!("convex weight {lambda} outside [0, 1]")));
    }
    u.check_dim(v)?;
    Ok(Point(
        u.0.iter()
            .zip(&v.0)
            .map(|(&a, &b)| {
                if lambda == 1.0 {
                    a
                } else {
                    b + lambda * (a - b)
                }
            })
            .collect(),
    ))
}

/// Identity tolerance for floating-point checks of exact real identities.
pub fn identity_tolerance(magnitudes: &[f64]) -> f64 {
    1e-9 * (1.0 + magnitudes.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetKind {
    Box { lower: Point, upper: Point },
    Ball { center: Point, radius: f64 },
}

/// A compact convex subset of ℝ^d together with an integer bound on its diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSet {
    kind: SetKind,
    diameter_bound: u64,
}

impl AmbientSet {
    pub fn new_box(lower: Point, upper: Point) -> Result<Self> {
        lower.check_dim(&upper)?;
        if lower.0.iter().zip(&upper.0).any(|(l, u)| l > u) {
            return Err(Error::ContractViolation("box lower corner exceeds upper corner".into()));
        }
        let diameter = lower.dist(&upper)?;
        Ok(Self { kind: SetKind::Box { lower, upper }, diameter_bound: diameter.ceil() as u64 })
    }

    pub fn new_ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::ContractViolation(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { kind: SetKind::Ball { center, radius }, diameter_bound: (2.0 * radius).ceil() as u64 })
    }

    pub fn from_kind(kind: SetKind) -> Result<Self> {
        match kind {
            SetKind::Box { lower, upper } => Self::new_box(lower, upper),
            SetKind::Ball { center, radius } => Self::new_ball(center, radius),
        }
    }

    /// Unit cube `[0,1]^dim`.
    pub fn unit_box(dim: usize) -> Self {
        Self::new_box(Point::zeros(dim), Point(vec![1.0; dim.max(1)])).expect("unit box is valid")
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// The integer `b` with `b >= diam(C)`.
    pub fn diameter_bound(&self) -> u64 {
        self.diameter_bound
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Box { lower, .. } => lower.dim(),
            SetKind::Ball { center, .. } => center.dim(),
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match &self.kind {
            SetKind::Box { lower, upper } => x
                .0
                .iter()
                .zip(lower.0.iter().zip(&upper.0))
                .all(|(c, (l, u))| *c >= l - tol && *c <= u + tol),
            SetKind::Ball { center, radius } => {
                x.dist(center).map(|d| d <= radius + tol).unwrap_or(false)
            }
        }
    }

    /// Metric projection onto the set.
    pub fn project(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        match &self.kind {
            SetKind::Box { lower, upper } => Ok(Point(
                x.0.iter()
                    .zip(lower.0.iter().zip(&upper.0))
                    .map(|(c, (l, u))| c.clamp(*l, *u))
                    .collect(),
            )),
            SetKind::Ball { center, radius } => {
                let offset = x.sub(center)?;
                let d = norm(&offset);
                if d <= *radius {
                    Ok(x.clone())
                } else {
                    center.add(&offset.scale(radius / d))
                }
            }
        }
    }

    /// Side lengths of the smallest axis-aligned box enclosing the set.
    pub fn enclosing_sides(&self) -> Vec<f64> {
        match &self.kind {
            SetKind::Box { lower, upper } => {
                lower.0.iter().zip(&upper.0).map(|(l, u)| u - l).collect()
            }
            SetKind::Ball { center, radius } => vec![2.0 * radius; center.dim()],
        }
    }

    /// Draws a point uniformly from the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.kind {
            SetKind::Box { lower, upper } => Point(
                lower
                    .0
                    .iter()
                    .zip(&upper.0)
                    .map(|(l, u)| if u > l { rng.gen_range(*l..=*u) } else { *l })
                    .collect(),
            ),
            SetKind::Ball { center, radius } => {
                let d = center.dim();
                let dir = loop {
                    let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    let n = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if n > 1e-300 {
                        break g.into_iter().map(|c| c / n).collect::<Vec<_>>();
                    }
                };
                let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                Point(center.0.iter().zip(dir).map(|(c, u)| c + r * u).collect())
            }
        }
    }

    /// Grid modulus of total boundedness for this set.
    pub fn total_boundedness_modulus(&self) -> GridModulus {
        total_boundedness_modulus(self)
    }
}

/// Sides are stored as integer multiples of this unit, rounded up.
const SIDE_SCALE: f64 = 1e9;

/// Modulus of total boundedness from a cube-grid covering:
/// `γ(k) = Π_i ⌈s_i (k+1) ⌈√d⌉⌉`, where `s_i` are the sides of the enclosing box.
///
/// Cubes of side `1/((k+1)⌈√d⌉)` have diameter at most `1/(k+1)`, so among
/// `γ(k)+1` points two share a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModulus {
    /// Sides scaled by `SIDE_SCALE` and rounded up.
    scaled_sides: Vec<BigUint>,
    sqrt_dim_ceil: u64,
}

pub fn total_boundedness_modulus(set: &AmbientSet) -> GridModulus {
    let sides = set.enclosing_sides();
    let d = sides.len() as u64;
    let mut sqrt_dim_ceil = (d as f64).sqrt().floor() as u64;
    while sqrt_dim_ceil * sqrt_dim_ceil < d {
        sqrt_dim_ceil += 1;
    }
    let scaled_sides = sides
        .iter()
        .map(|s| BigUint::from((s * SIDE_SCALE).ceil().max(0.0) as u64))
        .collect();
    GridModulus { scaled_sides, sqrt_dim_ceil }
}

impl GridModulus {
    /// Evaluates `γ(k)` for a machine-sized `k`, returning `None` past `u64`.
    pub fn at(&self, k: u64) -> Option<u64> {
        self.eval_exact(&BigUint::from(k)).to_u64()
    }

    fn eval_exact(&self, k: &BigUint) -> BigUint {
        let scale = BigUint::from(SIDE_SCALE as u64);
        let per_side = (k + 1u32) * self.sqrt_dim_ceil;
        self.scaled_sides.iter().fold(BigUint::one(), |acc, s| {
            let cells = num_integer::Integer::div_ceil(&(s * &per_side), &scale);
            acc * cells.max(BigUint::one())
        })
    }
}

impl NatFn for GridModulus {
    fn eval(&self, n: &BoundNat, sat: &Saturation) -> BoundNat {
        match n {
            BoundNat::Exact(k) => sat.clamp(self.eval_exact(k)),
            BoundNat::Huge => {
                if self.scaled_sides.iter().any(|s| s > &BigUint::default()) {
                    BoundNat::Huge
                } else {
                    sat.nat(1u32)
                }
            }
        }
    }
}
