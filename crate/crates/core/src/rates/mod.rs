//! Effective moduli for the Ishikawa iteration: the liminf moduli, the
//! approximate fixed point bounds, the closedness and Fejér moduli, and the
//! recursive rates of metastability `Σ`, `Ω` and `Ω′`.
//!
//! Everything is computed over [`BoundNat`], so towers of exponentials
//! saturate instead of exhausting memory.

mod bound;
mod counterfn;
mod lipschitz;

pub use bound::{BoundNat, BoundOrdering, Saturation, DEFAULT_TAU_EXPONENT};
pub use counterfn::{majorant, Counterfunction, NatFn, MAJORANT_SCAN_LIMIT};
pub use lipschitz::{strict_pc_lipschitz, Lipschitz, LIPSCHITZ_DENOMINATOR};

use num_bigint::BigUint;
use num_integer::Integer;

use bound::ceil_sqrt;

/// `⌈1 + √(2L² + 4)⌉`, exact for rational `L`.
pub fn lipschitz_index(lipschitz: Lipschitz) -> BigUint {
    let num = lipschitz.num_big();
    let den = lipschitz.den_big();
    // √(2L²+4) = √(2·num² + 4·den²) / den; for integer m, m·den ≥ √X iff m·den ≥ ⌈√X⌉.
    let radicand = BigUint::from(2u32) * &num * &num + BigUint::from(4u32) * &den * &den;
    ceil_sqrt(&radicand).div_ceil(&den) + 1u32
}

/// `K = β(⌈1 + √(2L² + 4)⌉)`: past this index `1 − 2βₙ − L²βₙ² ≥ 1/2`.
pub fn compute_k(lipschitz: Lipschitz, rate_beta: &dyn NatFn, sat: &Saturation) -> BoundNat {
    rate_beta.eval(&sat.clamp(lipschitz_index(lipschitz)), sat)
}

fn m_of(b: u64, k: &BoundNat, sat: &Saturation) -> BoundNat {
    let b_sq_plus_one = sat.nat(BigUint::from(b) * b + 1u32);
    let k_plus_one = sat.add(k, &sat.nat(1u32));
    sat.mul(&sat.mul(&sat.nat(2u32), &b_sq_plus_one), &sat.square(&k_plus_one))
}

/// `M = 2(b² + 1)(k + 1)²`
pub fn compute_m(b: u64, k: u64, sat: &Saturation) -> BoundNat {
    m_of(b, &sat.nat(k), sat)
}

/// Modulus of liminf for the shifted sequence: `Δ(l, k) = θ(l + M)`.
pub fn delta(b: u64, theta: &dyn NatFn, l: u64, k: u64, sat: &Saturation) -> BoundNat {
    theta.eval(&sat.add(&sat.nat(l), &compute_m(b, k, sat)), sat)
}

/// `Δ̃(l, k) = K + Δ(l, k)`, the liminf modulus for the iteration itself.
pub fn delta_tilde(
    b: u64,
    theta: &dyn NatFn,
    shift: &BoundNat,
    l: u64,
    k: u64,
    sat: &Saturation,
) -> BoundNat {
    sat.add(shift, &delta(b, theta, l, k, sat))
}

/// Approximate fixed point bounds derived from the liminf moduli at `l = 0`.
#[derive(Debug, Clone)]
pub struct AfpBounds {
    b: u64,
    theta: Counterfunction,
    theta_majorant: Counterfunction,
    shift: BoundNat,
}

pub fn afp_bounds(b: u64, theta: &Counterfunction, shift: BoundNat) -> AfpBounds {
    AfpBounds { b, theta: theta.clone(), theta_majorant: majorant(theta), shift }
}

impl AfpBounds {
    /// `Δ′(k) = θ(M)`, for the shifted sequence.
    pub fn delta_prime(&self, k: u64, sat: &Saturation) -> BoundNat {
        self.theta.eval(&compute_m(self.b, k, sat), sat)
    }

    /// `Δ̃′(k) = K + θ(M)`, for the iteration.
    pub fn delta_tilde_prime(&self, k: u64, sat: &Saturation) -> BoundNat {
        sat.add(&self.shift, &self.delta_prime(k, sat))
    }

    /// `Φ(k) = θ^M(2(b² + 1)(k + 1)²)`, nondecreasing in `k`.
    pub fn phi(&self, k: u64, sat: &Saturation) -> BoundNat {
        self.theta_majorant.eval(&compute_m(self.b, k, sat), sat)
    }
}

/// Closed-form liminf modulus for `αₙ = βₙ = 1/√(n+1)`:
/// `Γ(l, k) = (⌈1 + √(2L² + 4)⌉ + 1)² + 4^(l + 2(b² + 1)(k + 1)²)`.
pub fn gamma_exp(b: u64, lipschitz: Lipschitz, l: u64, k: u64, sat: &Saturation) -> BoundNat {
    let head = sat.square(&sat.clamp(lipschitz_index(lipschitz) + 1u32));
    let exponent = sat.add(&sat.nat(l), &compute_m(b, k, sat));
    sat.add(&head, &sat.pow(&sat.nat(4u32), &exponent))
}

/// `k′ = ⌈(1 + L)(1 + k)⌉`
pub fn inflated_index(lipschitz: Lipschitz, k: u64) -> BigUint {
    let den = lipschitz.den_big();
    ((&den + lipschitz.num_big()) * (BigUint::from(k) + 1u32)).div_ceil(&den)
}

/// Modulus of liminf for `‖xₙ − xₙ₊₁‖`: `Δ̂(l, k) = Δ̃(l, k′)`.
pub fn delta_hat(
    b: u64,
    lipschitz: Lipschitz,
    rate_beta: &dyn NatFn,
    theta: &dyn NatFn,
    l: u64,
    k: u64,
    sat: &Saturation,
) -> BoundNat {
    let shift = compute_k(lipschitz, rate_beta, sat);
    let k_inflated = sat.clamp(inflated_index(lipschitz, k));
    let m = m_of(b, &k_inflated, sat);
    sat.add(&shift, &theta.eval(&sat.add(&sat.nat(l), &m), sat))
}

/// Moduli of uniform closedness of the fixed point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosednessModuli {
    lipschitz_ceil: u64,
}

pub fn closedness_moduli(lipschitz: Lipschitz) -> ClosednessModuli {
    ClosednessModuli { lipschitz_ceil: lipschitz.ceil() }
}

impl ClosednessModuli {
    /// `ω_F(k) = ⌈L⌉(4k + 4)`
    pub fn omega_f(&self, k: u64) -> BigUint {
        BigUint::from(self.lipschitz_ceil) * (BigUint::from(k) * 4u32 + 4u32)
    }

    /// `δ_F(k) = 2k + 1`
    pub fn delta_f(&self, k: u64) -> BigUint {
        BigUint::from(k) * 2u32 + 1u32
    }
}

/// Uniform Fejér modulus `χ_b(n, m, r) = 8bm(r + 1)`; independent of `n`.
pub fn fejer_modulus_chi(b: u64, _n: u64, m: u64, r: u64) -> BigUint {
    BigUint::from(8u32) * b * m * (BigUint::from(r) + 1u32)
}

/// The `G(a) = H(a) = a²` profile and its moduli.
#[derive(Debug, Clone, Copy, Default)]
pub struct FejerProfile;

impl FejerProfile {
    pub fn g(&self, a: f64) -> f64 {
        a * a
    }

    pub fn h(&self, a: f64) -> f64 {
        a * a
    }

    /// `α_G(k) = ⌈√k⌉`
    pub fn alpha_g(&self, k: u64) -> u64 {
        ceil_sqrt(&BigUint::from(k)).try_into().expect("root of a u64 fits")
    }

    /// `β_H(k) = (k + 1)²`
    pub fn beta_h(&self, k: u64) -> BigUint {
        let k1 = BigUint::from(k) + 1u32;
        &k1 * &k1
    }
}

/// The constants feeding the metastability recursions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table1Constants {
    /// `K = β(⌈1 + √(2L² + 4)⌉)`
    pub shift: BoundNat,
    /// `P = γ(⌈√(8k² + 16k + 9)⌉)`
    pub p: BoundNat,
    /// `k₀ = ⌈(⌈L⌉(4k + 4) − 1) / 2⌉`
    pub k0: BigUint,
    /// `P₀ = γ(⌈√(8k₀² + 16k₀ + 9)⌉)`
    pub p0: BoundNat,
}

fn grid_argument(k: &BigUint) -> BigUint {
    ceil_sqrt(&(BigUint::from(8u32) * k * k + BigUint::from(16u32) * k + 9u32))
}

/// `8k² + 16k + 10`
fn window_factor(k: &BigUint) -> BigUint {
    BigUint::from(8u32) * k * k + BigUint::from(16u32) * k + 10u32
}

pub fn table1_constants(
    lipschitz: Lipschitz,
    rate_beta: &dyn NatFn,
    gamma: &dyn NatFn,
    k: u64,
    sat: &Saturation,
) -> Table1Constants {
    let k_big = BigUint::from(k);
    let p = gamma.eval(&sat.clamp(grid_argument(&k_big)), sat);
    // ⌈L⌉(4k+4) ≥ 4, so the subtraction is safe.
    let k0 = (BigUint::from(lipschitz.ceil()) * (&k_big * 4u32 + 4u32) - 1u32).div_ceil(&BigUint::from(2u32));
    let p0 = gamma.eval(&sat.clamp(grid_argument(&k0)), sat);
    Table1Constants { shift: compute_k(lipschitz, rate_beta, sat), p, k0, p0 }
}

/// Iterates `step` from 0 exactly `count` times. The iterates are
/// nondecreasing, so a repeated value is a fixed point and `Huge` absorbs.
fn iterate_from_zero(count: &BoundNat, step: impl Fn(&BoundNat) -> BoundNat) -> BoundNat {
    let mut value = BoundNat::zero();
    let mut done = BigUint::default();
    loop {
        if let BoundNat::Exact(c) = count {
            if &done >= c {
                return value;
            }
        }
        let next = step(&value);
        if next == value || next.is_huge() {
            return next;
        }
        value = next;
        done += 1u32;
    }
}

/// Inputs shared by the metastability functionals.
pub struct BoundInputs<'a> {
    /// Integer upper bound on the diameter of the set.
    pub b: u64,
    pub lipschitz: Lipschitz,
    /// Rate of convergence of `βₙ → 0`.
    pub rate_beta: &'a dyn NatFn,
    /// Rate of divergence of `Σ αₙβₙ`.
    pub rate_theta: &'a Counterfunction,
    /// Modulus of total boundedness.
    pub gamma: &'a dyn NatFn,
}

impl BoundInputs<'_> {
    pub fn constants(&self, k: u64, sat: &Saturation) -> Table1Constants {
        table1_constants(self.lipschitz, self.rate_beta, self.gamma, k, sat)
    }

    fn outer(&self, inner: &BoundNat, theta_m: &Counterfunction, sat: &Saturation) -> BoundNat {
        let two_b = sat.nat(BigUint::from(2u32) * (BigUint::from(self.b) * self.b + 1u32));
        let arg = sat.mul(&two_b, &sat.square(&sat.add(inner, &sat.nat(1u32))));
        theta_m.eval(&arg, sat)
    }

    /// `(Σ̃₀)(n, k, g)` for `n = iterations`, with `g` the already shifted counterfunction.
    pub fn sigma_tilde_0(&self, iterations: &BoundNat, k: u64, g: &Counterfunction, sat: &Saturation) -> BoundNat {
        let theta_m = majorant(self.rate_theta);
        let g_m = majorant(g);
        let coeff = sat.clamp(BigUint::from(8u32) * self.b * window_factor(&BigUint::from(k)));
        iterate_from_zero(iterations, |prev| {
            let inner = sat.mul(&coeff, &g_m.eval(prev, sat));
            self.outer(&inner, &theta_m, sat)
        })
    }

    /// `(Ω̃₀)(n, k, g)` for `n = iterations`.
    pub fn omega_tilde_0(&self, iterations: &BoundNat, k: u64, g: &Counterfunction, sat: &Saturation) -> BoundNat {
        let theta_m = majorant(self.rate_theta);
        let k0 = self.constants(k, sat).k0;
        self.omega_like(iterations, k, &k0, g, sat, |arg| theta_m.eval(arg, sat))
    }

    fn omega_like(
        &self,
        iterations: &BoundNat,
        k: u64,
        k0: &BigUint,
        g: &Counterfunction,
        sat: &Saturation,
        outer: impl Fn(&BoundNat) -> BoundNat,
    ) -> BoundNat {
        let g_m = majorant(g);
        let coeff = sat.clamp(BigUint::from(8u32) * self.b * window_factor(k0));
        let floor = sat.nat(2 * k as u128 + 1);
        let two_b = sat.nat(BigUint::from(2u32) * (BigUint::from(self.b) * self.b + 1u32));
        iterate_from_zero(iterations, |prev| {
            let inner = floor.max(&sat.mul(&coeff, &g_m.eval(prev, sat)));
            outer(&sat.mul(&two_b, &sat.square(&sat.add(&inner, &sat.nat(1u32)))))
        })
    }

    /// Rate of metastability `Σ(k, g) = K + Σ̃(k, h)` with `h(n) = g(K + n)`.
    pub fn sigma(&self, k: u64, g: &Counterfunction, sat: &Saturation) -> BoundNat {
        let c = self.constants(k, sat);
        let h = Counterfunction::shift(g.clone(), c.shift.clone());
        sat.add(&c.shift, &self.sigma_tilde_0(&c.p, k, &h, sat))
    }

    /// `Ω(k, g) = K + Ω̃(k, h)`: bounds an `N` whose window is both Cauchy-tight
    /// and made of approximate fixed points.
    pub fn omega(&self, k: u64, g: &Counterfunction, sat: &Saturation) -> BoundNat {
        let c = self.constants(k, sat);
        let h = Counterfunction::shift(g.clone(), c.shift.clone());
        sat.add(&c.shift, &self.omega_tilde_0(&c.p0, k, &h, sat))
    }
}

/// `K₀ = (⌈1 + √(2L² + 4)⌉ + 1)²`
pub fn canonical_shift(lipschitz: Lipschitz, sat: &Saturation) -> BoundNat {
    let j = lipschitz_index(lipschitz) + 1u32;
    sat.clamp(&j * &j)
}

/// `Ω′(k, g) = K₀ + (Ω′₀)(P₀, k, h)` for `αₙ = βₙ = 1/√(n+1)`, with `h` shifted by `K₀`.
pub fn omega_prime(b: u64, gamma: &dyn NatFn, lipschitz: Lipschitz, k: u64, g: &Counterfunction, sat: &Saturation) -> BoundNat {
    omega_prime_with_shift(b, gamma, lipschitz, k, g, &canonical_shift(lipschitz, sat), sat)
}

/// `Ω′` with the counterfunction shifted by an explicit amount instead of `K₀`.
pub fn omega_prime_with_shift(
    b: u64,
    gamma: &dyn NatFn,
    lipschitz: Lipschitz,
    k: u64,
    g: &Counterfunction,
    h_shift: &BoundNat,
    sat: &Saturation,
) -> BoundNat {
    let canonical_beta = Counterfunction::shifted_square();
    let theta = Counterfunction::Power(4);
    let inputs = BoundInputs { b, lipschitz, rate_beta: &canonical_beta, rate_theta: &theta, gamma };
    let c = inputs.constants(k, sat);
    let h = Counterfunction::shift(g.clone(), h_shift.clone());
    let four = sat.nat(4u32);
    let tail = inputs.omega_like(&c.p0, k, &c.k0, &h, sat, |arg| sat.pow(&four, arg));
    sat.add(&canonical_shift(lipschitz, sat), &tail)
}
