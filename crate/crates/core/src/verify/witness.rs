use crate::error::{Error, Result};
use crate::iterate::Trajectory;
use crate::numkernel::Point;
use crate::rates::{BoundNat, Counterfunction, NatFn, Saturation};

use super::report::{CertReport, Outcome};

pub const DEFAULT_SEARCH_CAP: u64 = 100_000;
pub const DEFAULT_TRAJECTORY_LENGTH: usize = 200_000;

/// A pair `(k, g)` from the metastability statement plus how far to look for `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetastabilityQuery {
    pub k: u64,
    pub g: Counterfunction,
    pub search_cap: u64,
}

impl MetastabilityQuery {
    pub fn new(k: u64, g: Counterfunction, search_cap: u64) -> Result<Self> {
        if search_cap == 0 {
            return Err(Error::ContractViolation("search_cap must be at least 1".into()));
        }
        Ok(Self { k, g, search_cap })
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / (self.k as f64 + 1.0)
    }
}

/// Smallest `N ≥ l` with `values[N] ≤ 1/(k+1)`.
pub fn first_below(values: &[f64], l: u64, k: u64) -> Option<u64> {
    let eps = 1.0 / (k as f64 + 1.0);
    let start = usize::try_from(l).ok()?;
    values.get(start..)?.iter().position(|&v| v <= eps).map(|i| (i + start) as u64)
}

/// Smallest recorded `N ≥ l` with `‖x_N − Tx_N‖ ≤ 1/(k+1)`.
pub fn find_liminf_witness(traj: &Trajectory, l: u64, k: u64) -> Option<u64> {
    first_below(traj.residuals(), l, k)
}

fn window_within(points: &[Point], eps: f64) -> bool {
    let dim = points[0].dim();
    let mut lo = points[0].coords().to_vec();
    let mut hi = lo.clone();
    for p in &points[1..] {
        for (i, &c) in p.coords().iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
            if hi[i] - lo[i] > eps {
                return false;
            }
        }
    }
    if dim == 1 {
        return true;
    }
    let diag: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    if diag <= eps {
        return true;
    }
    let center = Point::from_raw(lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect());
    if points.iter().all(|p| p.dist(&center).expect("same dimension") <= 0.5 * eps) {
        return true;
    }
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if p.dist(q).expect("same dimension") > eps {
                return false;
            }
        }
    }
    true
}

enum Scan {
    Found(u64),
    /// Every `N < next` was rejected; `truncated` when the window at `next`
    /// ran past the recorded length rather than the cap being reached.
    Exhausted { next: u64, truncated: bool },
}

fn scan(traj: &Trajectory, q: &MetastabilityQuery, with_residuals: bool) -> Scan {
    let sat = Saturation::default();
    let eps = q.epsilon();
    let last = traj.len().saturating_sub(1) as u64;
    for n in 0..=q.search_cap {
        let end = match q.g.at(n, &sat).to_u64().and_then(|w| n.checked_add(w)) {
            Some(end) if end <= last => end,
            _ => return Scan::Exhausted { next: n, truncated: true },
        };
        let (lo, hi) = (n as usize, end as usize);
        if with_residuals && traj.residuals()[lo..=hi].iter().any(|&r| r > eps) {
            continue;
        }
        if window_within(&traj.x()[lo..=hi], eps) {
            return Scan::Found(n);
        }
    }
    Scan::Exhausted { next: q.search_cap + 1, truncated: false }
}

fn scan_to_result(s: Scan, traj: &Trajectory) -> Result<Option<u64>> {
    match s {
        Scan::Found(n) => Ok(Some(n)),
        Scan::Exhausted { truncated: false, .. } => Ok(None),
        Scan::Exhausted { next, truncated: true } => {
            Err(Error::InsufficientLength { needed: next, recorded: traj.len() })
        }
    }
}

/// Smallest `N ≤ search_cap` such that `‖x_i − x_j‖ ≤ 1/(k+1)` for all
/// `i, j ∈ [N, N + g(N)]`.
pub fn find_metastable_witness(traj: &Trajectory, q: &MetastabilityQuery) -> Result<Option<u64>> {
    scan_to_result(scan(traj, q, false), traj)
}

/// As [`find_metastable_witness`], additionally requiring
/// `‖x_i − Tx_i‖ ≤ 1/(k+1)` across the window.
pub fn find_combined_witness(traj: &Trajectory, q: &MetastabilityQuery) -> Result<Option<u64>> {
    scan_to_result(scan(traj, q, true), traj)
}

/// `bound − witness`, saturating to `f64::MAX` when the bound is not representable.
pub fn bound_margin(bound: &BoundNat, witness: u64) -> f64 {
    match bound.to_u64() {
        Some(b) => b as f64 - witness as f64,
        None if bound.is_huge() => f64::MAX,
        None => {
            let b = bound.exact().expect("exact");
            num_traits::ToPrimitive::to_f64(b).unwrap_or(f64::MAX) - witness as f64
        }
    }
}

fn judge_scan(name: &str, s: Scan, bound: &BoundNat, what: &str) -> CertReport {
    let mut report = match s {
        Scan::Found(n) => {
            let outcome = if bound.admits(n) {
                Outcome::Pass
            } else {
                Outcome::Fail(format!("smallest {what} witness {n} exceeds bound {bound}"))
            };
            let mut r = CertReport::new(name, outcome);
            r.witness = Some(n);
            r.worst_margin = bound_margin(bound, n);
            r.samples_or_steps = n + 1;
            r
        }
        Scan::Exhausted { next, truncated } => {
            let scanned_past_bound = match bound.to_u64() {
                Some(b) => b < next,
                None => false,
            };
            let outcome = if scanned_past_bound {
                Outcome::Fail(format!("no {what} witness in [0, {bound}]"))
            } else if truncated {
                Outcome::Inconclusive(format!("trajectory too short for the window at N={next}"))
            } else {
                Outcome::Inconclusive(format!("no {what} witness up to the search cap {}", next - 1))
            };
            let mut r = CertReport::new(name, outcome);
            r.samples_or_steps = next;
            r.worst_margin = bound_margin(bound, next);
            r
        }
    };
    report.bound = Some(bound.clone());
    report
}

/// Compares the smallest metastability witness against the rate `Σ(k, g)`.
pub fn check_metastability_bound(traj: &Trajectory, q: &MetastabilityQuery, sigma: &BoundNat) -> CertReport {
    let name = format!("metastability k={} g={}", q.k, q.g);
    judge_scan(&name, scan(traj, q, false), sigma, "metastability")
}

/// Compares the smallest combined witness (Cauchy window plus small residuals)
/// against `Ω(k, g)`.
pub fn check_combined_omega(traj: &Trajectory, q: &MetastabilityQuery, omega: &BoundNat) -> CertReport {
    let name = format!("combined k={} g={}", q.k, q.g);
    judge_scan(&name, scan(traj, q, true), omega, "combined")
}

/// Checks a modulus of liminf for `values` over the grid `ls × ks`: for each
/// pair there should be `N ∈ [l, bound(l, k)]` with `values[N] ≤ 1/(k+1)`.
pub fn check_liminf_sequence(
    name: &str,
    values: &[f64],
    bound: &dyn Fn(u64, u64) -> BoundNat,
    ls: &[u64],
    ks: &[u64],
) -> CertReport {
    let mut outcome = Outcome::Pass;
    let mut worst_margin = f64::MAX;
    let mut worst: Option<(u64, BoundNat)> = None;
    let mut checked = 0;
    for &l in ls {
        for &k in ks {
            checked += 1;
            let b = bound(l, k);
            let local = match first_below(values, l, k) {
                Some(n) if b.admits(n) => {
                    let margin = bound_margin(&b, n);
                    if margin < worst_margin || worst.is_none() {
                        worst_margin = margin;
                        worst = Some((n, b.clone()));
                    }
                    Outcome::Pass
                }
                Some(n) => Outcome::Fail(format!("(l,k)=({l},{k}): first witness {n} exceeds bound {b}")),
                None => match b.to_u64() {
                    Some(limit) if (limit as u128) < values.len() as u128 => {
                        Outcome::Fail(format!("(l,k)=({l},{k}): no witness in [{l}, {limit}]"))
                    }
                    _ => Outcome::Inconclusive(format!(
                        "(l,k)=({l},{k}): no witness among {} recorded values",
                        values.len()
                    )),
                },
            };
            outcome = outcome.worse(local);
        }
    }
    let mut report = CertReport::new(name, outcome);
    report.samples_or_steps = checked;
    report.worst_margin = if worst.is_some() { worst_margin } else { 0.0 };
    if let Some((n, b)) = worst {
        report.witness = Some(n);
        report.bound = Some(b);
    }
    report
}

/// [`check_liminf_sequence`] on the residuals of `traj`.
pub fn check_liminf_modulus(
    name: &str,
    traj: &Trajectory,
    bound: &dyn Fn(u64, u64) -> BoundNat,
    ls: &[u64],
    ks: &[u64],
) -> CertReport {
    check_liminf_sequence(name, traj.residuals(), bound, ls, ks)
}
