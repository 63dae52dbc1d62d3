//! A gallery of Lipschitz pseudo-contractions on boxes and balls, and
//! sampling-based certification of the inequalities that define their classes.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkernel::{inner, norm, AmbientSet, Point};
use crate::rates::Lipschitz;
use crate::verify::{CertReport, InequalityTally};

/// Slack for "the image lies in the domain".
pub const TOL_DOM: f64 = 1e-9;
/// Largest residual accepted at a known fixed point.
pub const TOL_FIX: f64 = 1e-12;

pub const DEFAULT_CERT_SAMPLES: usize = 10_000;
pub const DEFAULT_CERT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    PseudoContraction,
    /// κ-strict pseudo-contraction with κ = `kappa_num / kappa_den`.
    StrictPseudoContraction { kappa_num: u64, kappa_den: u64 },
    Nonexpansive,
}

impl OperatorClass {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            OperatorClass::StrictPseudoContraction { kappa_num, kappa_den } => {
                Some(*kappa_num as f64 / *kappa_den as f64)
            }
            _ => None,
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorClass::PseudoContraction => write!(f, "pseudo-contraction"),
            OperatorClass::StrictPseudoContraction { kappa_num, kappa_den } => {
                write!(f, "strict-pseudo-contraction({kappa_num}/{kappa_den})")
            }
            OperatorClass::Nonexpansive => write!(f, "nonexpansive"),
        }
    }
}

pub type MapFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// A self-map of a compact convex set with a certified Lipschitz constant.
#[derive(Clone)]
pub struct OperatorSpec {
    id: String,
    map: MapFn,
    domain: AmbientSet,
    lipschitz: Lipschitz,
    classes: Vec<OperatorClass>,
    known_fixed_points: Vec<Point>,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("lipschitz", &self.lipschitz)
            .field("classes", &self.classes)
            .field("known_fixed_points", &self.known_fixed_points)
            .finish_non_exhaustive()
    }
}

impl OperatorSpec {
    pub fn new(
        id: impl Into<String>,
        domain: AmbientSet,
        lipschitz: Lipschitz,
        classes: Vec<OperatorClass>,
        known_fixed_points: Vec<Point>,
        map: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), map: Arc::new(map), domain, lipschitz, classes, known_fixed_points }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> &AmbientSet {
        &self.domain
    }

    pub fn lipschitz(&self) -> Lipschitz {
        self.lipschitz
    }

    pub fn classes(&self) -> &[OperatorClass] {
        &self.classes
    }

    pub fn known_fixed_points(&self) -> &[Point] {
        &self.known_fixed_points
    }

    pub fn has_class(&self, class: OperatorClass) -> bool {
        self.classes.contains(&class)
    }

    pub fn strictness(&self) -> Option<f64> {
        self.classes.iter().find_map(|c| c.kappa())
    }

    /// The same map with a different claimed Lipschitz constant.
    pub fn with_lipschitz(&self, lipschitz: Lipschitz) -> Self {
        Self { lipschitz, ..self.clone() }
    }

    /// `Tx`; fails when `x` is outside the domain.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        if !self.domain.contains(x, TOL_DOM) {
            return Err(Error::DomainViolation { step: None });
        }
        Ok((self.map)(x))
    }

    /// `‖x − Tx‖`
    pub fn residual(&self, x: &Point) -> Result<f64> {
        x.dist(&self.apply(x)?)
    }
}

/// `σ(y, w) = ‖w − Tw‖ + ‖y − Tw‖`
pub fn sigma_pair(op: &OperatorSpec, y: &Point, w: &Point) -> Result<f64> {
    op.apply(y)?;
    let tw = op.apply(w)?;
    Ok(w.dist(&tw)? + y.dist(&tw)?)
}

fn sample_pairs(
    op: &OperatorSpec,
    n_samples: usize,
    seed: u64,
    mut visit: impl FnMut(&Point, &Point, &Point, &Point),
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let x = op.domain.sample(&mut rng);
        let y = op.domain.sample(&mut rng);
        let tx = (op.map)(&x);
        let ty = (op.map)(&y);
        visit(&x, &y, &tx, &ty);
    }
}

fn pair_terms(x: &Point, y: &Point, tx: &Point, ty: &Point) -> (f64, f64, f64) {
    let image = tx.dist_sq(ty).expect("same dimension");
    let source = x.dist_sq(y).expect("same dimension");
    let ux = x.sub(tx).expect("same dimension");
    let uy = y.sub(ty).expect("same dimension");
    let complement = ux.dist_sq(&uy).expect("same dimension");
    (image, source, complement)
}

/// Samples pairs and checks `‖Tx−Ty‖² ≤ ‖x−y‖² + ‖(x−Tx)−(y−Ty)‖²` with slack `tol`.
pub fn check_pseudocontraction(op: &OperatorSpec, n_samples: usize, tol: f64, seed: u64) -> CertReport {
    let mut tally = InequalityTally::new(format!("pseudo-contraction[{}]", op.id));
    sample_pairs(op, n_samples.max(1), seed, |x, y, tx, ty| {
        let (image, source, complement) = pair_terms(x, y, tx, ty);
        tally.record(image, source + complement, tol, || format!("x={x} y={y}"));
    });
    tally.finish()
}

/// The κ-strict variant: `‖Tx−Ty‖² ≤ ‖x−y‖² + κ‖(x−Tx)−(y−Ty)‖²`.
pub fn check_strict_pseudocontraction(op: &OperatorSpec, kappa: f64, n_samples: usize, tol: f64, seed: u64) -> CertReport {
    let mut tally = InequalityTally::new(format!("strict-pseudo-contraction[{}]", op.id));
    sample_pairs(op, n_samples.max(1), seed, |x, y, tx, ty| {
        let (image, source, complement) = pair_terms(x, y, tx, ty);
        tally.record(image, source + kappa * complement, tol, || format!("x={x} y={y}"));
    });
    tally.finish()
}

/// Checks `‖Tx−Ty‖ ≤ L‖x−y‖ + tol` and reports the largest observed ratio.
pub fn check_lipschitz(op: &OperatorSpec, n_samples: usize, tol: f64, seed: u64) -> CertReport {
    let lip = op.lipschitz.as_f64();
    let mut tally = InequalityTally::new(format!("lipschitz[{}]", op.id));
    let mut ratio = 0.0_f64;
    sample_pairs(op, n_samples.max(1), seed, |x, y, tx, ty| {
        let image = tx.dist(ty).expect("same dimension");
        let source = x.dist(y).expect("same dimension");
        if source > 0.0 {
            ratio = ratio.max(image / source);
        }
        tally.record(image, lip * source, tol, || format!("x={x} y={y}"));
    });
    let mut report = tally.finish();
    report.estimate = Some(ratio);
    report
}

/// Checks monotonicity of `U = Id − T`: `⟨Ux − Uy, x − y⟩ ≥ −tol`.
pub fn check_monotone_complement(op: &OperatorSpec, n_samples: usize, tol: f64, seed: u64) -> CertReport {
    let mut tally = InequalityTally::new(format!("monotone-complement[{}]", op.id));
    sample_pairs(op, n_samples.max(1), seed, |x, y, tx, ty| {
        let ux = x.sub(tx).expect("same dimension");
        let uy = y.sub(ty).expect("same dimension");
        let gap = inner(&ux.sub(&uy).expect("same dimension"), &x.sub(y).expect("same dimension"))
            .expect("same dimension");
        tally.record(0.0, gap, tol, || format!("x={x} y={y}"));
    });
    tally.finish()
}

/// Checks that sampled images stay in the domain.
pub fn check_self_map(op: &OperatorSpec, n_samples: usize, seed: u64) -> CertReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = InequalityTally::new(format!("self-map[{}]", op.id));
    for _ in 0..n_samples.max(1) {
        let x = op.domain.sample(&mut rng);
        let tx = (op.map)(&x);
        let excess = op.domain.project(&tx).and_then(|p| p.dist(&tx)).expect("same dimension");
        tally.record(excess, 0.0, TOL_DOM, || format!("x={x} Tx={tx}"));
    }
    tally.finish()
}

fn point(coords: &[f64]) -> Point {
    Point::from_raw(coords.to_vec())
}

pub const GALLERY_IDS: [&str; 5] = ["negation", "rotation-pi3", "cubic", "strict-k13", "identity"];

/// Looks up a gallery operator by identifier.
pub fn gallery_operator(id: &str) -> Option<OperatorSpec> {
    let disc = || AmbientSet::new_ball(point(&[0.0, 0.0]), 1.0).expect("valid ball");
    let segment = || AmbientSet::new_box(point(&[-1.0]), point(&[1.0])).expect("valid box");
    let one = Lipschitz::integer(1).expect("positive");
    let two = Lipschitz::integer(2).expect("positive");
    use OperatorClass::*;
    let op = match id {
        "negation" => OperatorSpec::new(
            id,
            disc(),
            one,
            vec![PseudoContraction, Nonexpansive],
            vec![point(&[0.0, 0.0])],
            |x: &Point| x.scale(-1.0),
        ),
        "rotation-pi3" => {
            let (s, c) = std::f64::consts::FRAC_PI_3.sin_cos();
            OperatorSpec::new(
                id,
                disc(),
                one,
                vec![PseudoContraction, Nonexpansive],
                vec![point(&[0.0, 0.0])],
                move |x: &Point| {
                    let v = x.coords();
                    Point::from_raw(vec![c * v[0] - s * v[1], s * v[0] + c * v[1]])
                },
            )
        }
        "cubic" => OperatorSpec::new(
            id,
            segment(),
            two,
            vec![PseudoContraction],
            vec![point(&[0.0])],
            |x: &Point| {
                let t = x.coords()[0];
                Point::from_raw(vec![t - t * t * t])
            },
        ),
        "strict-k13" => OperatorSpec::new(
            id,
            segment(),
            Lipschitz::from_strictness(1, 3).expect("κ < 1"),
            vec![PseudoContraction, StrictPseudoContraction { kappa_num: 1, kappa_den: 3 }],
            vec![point(&[0.0])],
            |x: &Point| {
                let t = x.coords()[0];
                Point::from_raw(vec![-0.5 * t - 0.5 * t * t * t])
            },
        ),
        "identity" => OperatorSpec::new(
            id,
            AmbientSet::unit_box(1),
            one,
            vec![PseudoContraction, Nonexpansive],
            vec![point(&[0.0]), point(&[0.5]), point(&[1.0])],
            |x: &Point| x.clone(),
        ),
        _ => return None,
    };
    Some(op)
}

pub fn gallery() -> Vec<OperatorSpec> {
    GALLERY_IDS.iter().map(|id| gallery_operator(id).expect("gallery ids resolve")).collect()
}

/// Largest residual over the operator's known fixed points.
pub fn max_fixed_point_residual(op: &OperatorSpec) -> Result<f64> {
    op.known_fixed_points()
        .iter()
        .map(|p| op.residual(p))
        .try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))
}

/// Distance from `x` to the closest known fixed point.
pub fn distance_to_nearest_fixed_point(op: &OperatorSpec, x: &Point) -> Option<f64> {
    op.known_fixed_points
        .iter()
        .filter_map(|p| x.sub(p).ok().map(|d| norm(&d)))
        .reduce(f64::min)
}
