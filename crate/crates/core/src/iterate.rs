//! The Ishikawa iteration
//! `x₀ = x`, `yₙ = βₙTxₙ + (1−βₙ)xₙ`, `xₙ₊₁ = αₙTyₙ + (1−αₙ)xₙ`,
//! its Mann special case (`βₙ = 0`) and the shifted view `zₙ = x_{n+K}`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::numkernel::{convex_combination, norm, Point};
use crate::operators::{OperatorSpec, TOL_DOM};
use crate::schedule::WeightSchedule;

/// Iterates that drift outside the domain by at most this much are projected
/// back; larger escapes mean the map is not a self-map and abort the run.
pub const MAX_ROUNDING_DRIFT: f64 = 1e-6;

/// Runs longer than this should use [`ishikawa_streaming`].
pub const MATERIALIZE_LIMIT: usize = 1_000_000;

/// A recorded run: `x₀..x_N`, `y₀..y_{N−1}` and the residuals `‖xₙ − Txₙ‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    x: Vec<Point>,
    y: Vec<Point>,
    residuals: Vec<f64>,
    schedule_label: String,
    operator_label: String,
    shift: usize,
    reprojections: Vec<usize>,
}

impl Trajectory {
    pub fn x(&self) -> &[Point] {
        &self.x
    }

    pub fn y(&self) -> &[Point] {
        &self.y
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Number of recorded iterates.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn schedule_label(&self) -> &str {
        &self.schedule_label
    }

    pub fn operator_label(&self) -> &str {
        &self.operator_label
    }

    /// The `K` of `zₙ = x_{n+K}`; zero for an unshifted run.
    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Steps at which a rounding drift was projected back onto the domain.
    pub fn reprojections(&self) -> &[usize] {
        &self.reprojections
    }

    /// Writes `n,c0,..,c{d-1},residual` rows, one per iterate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let dim = self.x.first().map_or(0, Point::dim);
        let coords: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
        writeln!(out, "n,{},residual", coords.join(","))?;
        for (i, (x, r)) in self.x.iter().zip(&self.residuals).enumerate() {
            write!(out, "{}", i + self.shift)?;
            for c in x.coords() {
                write!(out, ",{c}")?;
            }
            writeln!(out, ",{r}")?;
        }
        Ok(())
    }
}

fn keep_in_domain(op: &OperatorSpec, p: Point, step: usize, reprojections: &mut Vec<usize>) -> Result<Point> {
    let domain = op.domain();
    if domain.contains(&p, TOL_DOM) {
        return Ok(p);
    }
    if !domain.contains(&p, MAX_ROUNDING_DRIFT) {
        return Err(Error::DomainViolation { step: Some(step) });
    }
    reprojections.push(step);
    domain.project(&p)
}

fn run(
    op: &OperatorSpec,
    x0: &Point,
    n_steps: usize,
    alpha: impl Fn(u64) -> f64,
    beta: impl Fn(u64) -> f64,
    schedule_label: &str,
) -> Result<Trajectory> {
    if n_steps >= MATERIALIZE_LIMIT {
        return Err(Error::ContractViolation(format!(
            "{n_steps} steps exceeds the materialized limit; use the streaming runner"
        )));
    }
    let mut x = Vec::with_capacity(n_steps + 1);
    let mut y = Vec::with_capacity(n_steps);
    let mut residuals = Vec::with_capacity(n_steps + 1);
    let mut reprojections = Vec::new();

    let mut current = x0.clone();
    let mut t_current = op.apply(&current).map_err(|_| Error::DomainViolation { step: Some(0) })?;
    for n in 0..n_steps {
        let (a, b) = (alpha(n as u64), beta(n as u64));
        let yn = keep_in_domain(op, convex_combination(b, &t_current, &current)?, n, &mut reprojections)?;
        let ty = op.apply(&yn).map_err(|_| Error::DomainViolation { step: Some(n) })?;
        let next = keep_in_domain(op, convex_combination(a, &ty, &current)?, n + 1, &mut reprojections)?;
        residuals.push(current.dist(&t_current)?);
        x.push(current);
        y.push(yn);
        current = next;
        t_current = op.apply(&current).map_err(|_| Error::DomainViolation { step: Some(n + 1) })?;
    }
    residuals.push(current.dist(&t_current)?);
    x.push(current);

    Ok(Trajectory {
        x,
        y,
        residuals,
        schedule_label: schedule_label.to_string(),
        operator_label: op.id().to_string(),
        shift: 0,
        reprojections,
    })
}

/// Runs `n_steps` Ishikawa steps from `x0`, recording `n_steps + 1` iterates.
pub fn ishikawa(op: &OperatorSpec, x0: &Point, schedule: &WeightSchedule, n_steps: usize) -> Result<Trajectory> {
    run(op, x0, n_steps, |n| schedule.alpha_at(n), |n| schedule.beta_at(n), &schedule.label)
}

/// The Mann iteration: Ishikawa with `βₙ = 0`. The zero `βₙ` breaks the
/// divergence condition, so these runs are for comparison only.
pub fn mann(op: &OperatorSpec, x0: &Point, schedule: &WeightSchedule, n_steps: usize) -> Result<Trajectory> {
    run(op, x0, n_steps, |n| schedule.alpha_at(n), |_| 0.0, &format!("{}+mann", schedule.label))
}

/// `zₙ = x_{n+K}`
pub fn shifted_view(traj: &Trajectory, k: usize) -> Result<Trajectory> {
    if traj.x.is_empty() || k > traj.x.len() - 1 {
        return Err(Error::InsufficientLength { needed: k as u64, recorded: traj.x.len() });
    }
    Ok(Trajectory {
        x: traj.x[k..].to_vec(),
        y: traj.y[k.min(traj.y.len())..].to_vec(),
        residuals: traj.residuals[k..].to_vec(),
        schedule_label: traj.schedule_label.clone(),
        operator_label: traj.operator_label.clone(),
        shift: traj.shift + k,
        reprojections: traj.reprojections.iter().filter(|&&s| s >= k).map(|s| s - k).collect(),
    })
}

/// Residuals and norms of a run too long to materialize.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSummary {
    pub residuals: Vec<f64>,
    pub norms: Vec<f64>,
    pub last: Point,
    pub reprojections: usize,
}

pub fn ishikawa_streaming(
    op: &OperatorSpec,
    x0: &Point,
    schedule: &WeightSchedule,
    n_steps: usize,
) -> Result<StreamSummary> {
    let mut residuals = Vec::with_capacity(n_steps + 1);
    let mut norms = Vec::with_capacity(n_steps + 1);
    let mut reprojections = Vec::new();
    let mut current = x0.clone();
    let mut t_current = op.apply(&current).map_err(|_| Error::DomainViolation { step: Some(0) })?;
    for n in 0..n_steps {
        residuals.push(current.dist(&t_current)?);
        norms.push(norm(&current));
        let yn = keep_in_domain(
            op,
            convex_combination(schedule.beta_at(n as u64), &t_current, &current)?,
            n,
            &mut reprojections,
        )?;
        let ty = op.apply(&yn).map_err(|_| Error::DomainViolation { step: Some(n) })?;
        current = keep_in_domain(
            op,
            convex_combination(schedule.alpha_at(n as u64), &ty, &current)?,
            n + 1,
            &mut reprojections,
        )?;
        t_current = op.apply(&current).map_err(|_| Error::DomainViolation { step: Some(n + 1) })?;
    }
    residuals.push(current.dist(&t_current)?);
    norms.push(norm(&current));
    Ok(StreamSummary { residuals, norms, last: current, reprojections: reprojections.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::AmbientSet;
    use crate::operators::{gallery_operator, OperatorClass};
    use crate::rates::{Counterfunction, Lipschitz};
    use crate::schedule::{canonical_schedule, WeightSequence};

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn negation_segment() -> OperatorSpec {
        OperatorSpec::new(
            "neg-1d",
            AmbientSet::new_box(p(&[-1.0]), p(&[1.0])).unwrap(),
            Lipschitz::integer(1).unwrap(),
            vec![OperatorClass::Nonexpansive],
            vec![p(&[0.0])],
            |x: &Point| x.scale(-1.0),
        )
    }

    fn halves() -> WeightSchedule {
        WeightSchedule {
            alpha: WeightSequence::Constant(0.5),
            beta: WeightSequence::Constant(0.5),
            rate_beta: Counterfunction::Const(0),
            rate_theta: Counterfunction::Affine(4, 0),
            label: "halves".into(),
        }
    }

    #[test]
    fn identity_is_stationary() {
        let id = gallery_operator("identity").unwrap();
        let traj = ishikawa(&id, &p(&[0.3]), &canonical_schedule(), 50).unwrap();
        assert!(traj.x().iter().all(|x| *x == p(&[0.3])));
        assert!(traj.residuals().iter().all(|r| *r == 0.0));
    }

    #[test]
    fn hand_computed_first_steps() {
        let neg = negation_segment();
        let traj = ishikawa(&neg, &p(&[1.0]), &halves(), 1).unwrap();
        assert_eq!(traj.y()[0], p(&[0.0]));
        assert_eq!(traj.x()[1], p(&[0.5]));

        let traj = ishikawa(&neg, &p(&[1.0]), &canonical_schedule(), 1).unwrap();
        assert_eq!(traj.y()[0], p(&[-1.0]));
        assert_eq!(traj.x()[1], p(&[1.0]));
    }

    #[test]
    fn lengths_and_recurrence() {
        let cubic = gallery_operator("cubic").unwrap();
        let w = canonical_schedule();
        let traj = ishikawa(&cubic, &p(&[0.9]), &w, 200).unwrap();
        assert_eq!(traj.len(), 201);
        assert_eq!(traj.y().len(), 200);
        assert_eq!(traj.residuals().len(), 201);
        for n in 0..200 {
            let (x, y) = (&traj.x()[n], &traj.y()[n]);
            let a = w.alpha_at(n as u64);
            let b = w.beta_at(n as u64);
            let y_expected = cubic.apply(x).unwrap().scale(b).add(&x.scale(1.0 - b)).unwrap();
            let x_expected = cubic.apply(y).unwrap().scale(a).add(&x.scale(1.0 - a)).unwrap();
            assert!(y.dist(&y_expected).unwrap() <= 1e-12);
            assert!(traj.x()[n + 1].dist(&x_expected).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn mann_examples() {
        let neg = negation_segment();
        let traj = mann(&neg, &p(&[1.0]), &halves(), 3).unwrap();
        assert_eq!(traj.x()[1], p(&[0.0]));
        assert_eq!(traj.y(), &traj.x()[..3]);
        let id = gallery_operator("identity").unwrap();
        let traj = mann(&id, &p(&[0.7]), &canonical_schedule(), 5).unwrap();
        assert!(traj.x().iter().all(|x| *x == p(&[0.7])));
    }

    #[test]
    fn shifted_view_examples() {
        let cubic = gallery_operator("cubic").unwrap();
        let traj = ishikawa(&cubic, &p(&[0.9]), &canonical_schedule(), 1000).unwrap();
        assert_eq!(shifted_view(&traj, 0).unwrap(), traj);
        let z = shifted_view(&traj, 25).unwrap();
        assert_eq!(z.len(), 976);
        assert_eq!(z.x()[0], traj.x()[25]);
        assert_eq!(z.shift(), 25);
        assert!(matches!(shifted_view(&traj, 1001), Err(Error::InsufficientLength { .. })));
    }

    #[test]
    fn start_outside_domain_names_step_zero() {
        let cubic = gallery_operator("cubic").unwrap();
        assert_eq!(
            ishikawa(&cubic, &p(&[2.0]), &canonical_schedule(), 3).unwrap_err(),
            Error::DomainViolation { step: Some(0) }
        );
    }

    #[test]
    fn escaping_map_is_reported_with_step() {
        let leaky = OperatorSpec::new(
            "leaky",
            AmbientSet::new_box(p(&[0.0]), p(&[1.0])).unwrap(),
            Lipschitz::integer(1).unwrap(),
            vec![],
            vec![],
            |x: &Point| Point::new(vec![x.coords()[0] + 0.4]).unwrap(),
        );
        let err = ishikawa(&leaky, &p(&[0.5]), &canonical_schedule(), 10).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { step: Some(_) }));
    }

    #[test]
    fn csv_layout() {
        let neg = gallery_operator("negation").unwrap();
        let traj = ishikawa(&neg, &p(&[0.5, 0.0]), &canonical_schedule(), 2).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,c0,c1,residual");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0.5,0,1");
    }

    #[test]
    fn streaming_matches_materialized() {
        let rot = gallery_operator("rotation-pi3").unwrap();
        let x0 = p(&[0.6, 0.3]);
        let w = canonical_schedule();
        let traj = ishikawa(&rot, &x0, &w, 500).unwrap();
        let summary = ishikawa_streaming(&rot, &x0, &w, 500).unwrap();
        assert_eq!(summary.residuals, traj.residuals());
        assert_eq!(&summary.last, traj.x().last().unwrap());
    }
}
