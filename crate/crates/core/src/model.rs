//! Hamiltonian/Lagrangian pairs `H(x, p, u)`, `L(x, v, u)` on the circle,
//! the numerical Fenchel transform between them and probes for the
//! structural conditions the theory relies on.
//!
//! Conventions: `H(x, p, u) = sup_v p v - L(x, v, u)`, `L` is non-increasing in
//! `u` (equivalently `H` non-decreasing), convex and superlinear in `v`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::VelocityGrid;

/// Finite-difference step used for `dL/du` when no analytic value is known.
pub const FD_STEP: f64 = 1e-5;
/// Largest positive `dL/du(x, v, 0)` tolerated before monotonicity counts as broken.
pub const POSITIVITY_GUARD: f64 = 1e-8;

pub trait Model<T: Real>: Send + Sync {
    fn label(&self) -> String;

    /// The `n` of the circle `R / nZ` the model lives on.
    fn period(&self) -> T;

    fn hamiltonian(&self, x: T, p: T, u: T) -> T;

    fn lagrangian(&self, x: T, v: T, u: T) -> T;

    /// `dL/du(x, v, 0)` when known in closed form.
    fn analytic_dl_du0(&self, _x: T, _v: T) -> Option<T> {
        None
    }

    /// True when `L(x, v, u) = L(x, v, 0) + u dL/du(x, v, 0)` holds exactly.
    fn affine_in_u(&self) -> bool {
        false
    }
}

impl<T: Real, M: Model<T> + ?Sized> Model<T> for &M {
    fn label(&self) -> String {
        (**self).label()
    }
    fn period(&self) -> T {
        (**self).period()
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        (**self).hamiltonian(x, p, u)
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        (**self).lagrangian(x, v, u)
    }
    fn analytic_dl_du0(&self, x: T, v: T) -> Option<T> {
        (**self).analytic_dl_du0(x, v)
    }
    fn affine_in_u(&self) -> bool {
        (**self).affine_in_u()
    }
}

macro_rules! forward_model {
    ($ptr:ident) => {
        impl<T: Real, M: Model<T> + ?Sized> Model<T> for $ptr<M> {
            fn label(&self) -> String {
                (**self).label()
            }
            fn period(&self) -> T {
                (**self).period()
            }
            fn hamiltonian(&self, x: T, p: T, u: T) -> T {
                (**self).hamiltonian(x, p, u)
            }
            fn lagrangian(&self, x: T, v: T, u: T) -> T {
                (**self).lagrangian(x, v, u)
            }
            fn analytic_dl_du0(&self, x: T, v: T) -> Option<T> {
                (**self).analytic_dl_du0(x, v)
            }
            fn affine_in_u(&self) -> bool {
                (**self).affine_in_u()
            }
        }
    };
}
forward_model!(Box);
forward_model!(Arc);

/// Central difference `dL/du(x, v, u)` with step [`FD_STEP`].
pub fn dl_du_fd<T: Real, M: Model<T> + ?Sized>(m: &M, x: T, v: T, u: T) -> T {
    let eps = T::lit(FD_STEP);
    (m.lagrangian(x, v, u + eps) - m.lagrangian(x, v, u - eps)) / (eps + eps)
}

/// `dL/du(x, v, 0)`: analytic when the model provides it, otherwise a central difference.
pub fn partial_l_u0<T: Real, M: Model<T> + ?Sized>(m: &M, x: T, v: T) -> Result<T> {
    if let Some(d) = m.analytic_dl_du0(x, v) {
        return Ok(d);
    }
    let d = dl_du_fd(m, x, v, T::zero());
    if d > T::lit(POSITIVITY_GUARD) {
        return Err(Error::PositiveDerivative { x: x.as_f64(), v: v.as_f64(), value: d.as_f64() });
    }
    Ok(d.min(T::zero()))
}

/// `L(x, v, u) = max_p p v - H(x, p, u)` over the sample `pgrid`, refined by a
/// parabola through the discrete argmax and its neighbours.
pub fn fenchel_lagrangian<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    x: T,
    v: T,
    u: T,
    pgrid: &VelocityGrid<T>,
) -> Result<T> {
    let f = |j: usize| {
        let p = pgrid.velocity(j);
        p * v - m.hamiltonian(x, p, u)
    };
    let mut best = 0;
    let mut best_val = f(0);
    for j in 1..pgrid.count() {
        let val = f(j);
        if val > best_val {
            best = j;
            best_val = val;
        }
    }
    if best == 0 || best + 1 == pgrid.count() {
        return Err(Error::SuperlinearityBudget { p: pgrid.velocity(best).as_f64() });
    }
    let (fm, f0, fp) = (f(best - 1), best_val, f(best + 1));
    let half = T::lit(0.5);
    let a = (fm - f0 - f0 + fp) * half;
    let b = (fp - fm) * half;
    if a < T::zero() {
        Ok(f0 - b * b / (T::lit(4.0) * a))
    } else {
        Ok(f0)
    }
}

/// `x -> V(x)` part of the zoo Hamiltonians `H = p^2/2 + V(x) + a(x) u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Flat,
    /// `cos(2 pi x)`.
    Pendulum,
}

/// Coefficient `a(x)` of `u` in the zoo Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling<T> {
    None,
    Constant(T),
    /// `alpha_n(x) + shift` with `alpha(x) = cos^2(pi x)` on `[1/2, 3/2]`, zero
    /// elsewhere, extended periodically with the model period.
    Bump { shift: T },
}

/// Default bump: continuous, supported on `[1/2, 3/2]` (mod period), positive inside.
pub fn alpha_bump<T: Real>(x: T, period: T) -> T {
    let y = x - period * (x / period).floor();
    let (lo, hi) = (T::lit(0.5), T::lit(1.5));
    if y >= lo && y <= hi {
        let c = (T::PI() * y).cos();
        c * c
    } else {
        T::zero()
    }
}

/// Analytic model `H = p^2/2 + V(x) + a(x) (u + offset)`,
/// `L = v^2/2 - V(x) - a(x) (u + offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel<T> {
    period: T,
    potential: Potential,
    coupling: Coupling<T>,
    offset: T,
    label: String,
}

impl<T: Real> QuadraticModel<T> {
    pub fn new(period: T, potential: Potential, coupling: Coupling<T>, label: impl Into<String>) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::NonPositivePeriod(period.as_f64()));
        }
        Ok(Self { period, potential, coupling, offset: T::zero(), label: label.into() })
    }

    /// `H = p^2/2 + cos(2 pi x)` on `R / nZ`; critical value 1.
    pub fn pendulum(n: T) -> Result<Self> {
        Self::new(n, Potential::Pendulum, Coupling::None, format!("pendulum({n})"))
    }

    /// `H = p^2/2 + cos(2 pi x) + u`.
    pub fn discounted_linear(n: T) -> Result<Self> {
        Self::new(n, Potential::Pendulum, Coupling::Constant(T::one()), format!("discounted_linear({n})"))
    }

    /// `H = p^2/2 + cos(2 pi x) + (alpha_n(x) + shift) u`.
    pub fn alpha_coupled(n: T, shift: T) -> Result<Self> {
        if n < T::lit(2.0) {
            return Err(Error::InvalidModelParameter(format!("alpha_coupled needs period >= 2, got {n}")));
        }
        let label = if shift == T::zero() {
            format!("alpha_coupled({n})")
        } else {
            format!("alpha_coupled({n}, shift={shift})")
        };
        Self::new(n, Potential::Pendulum, Coupling::Bump { shift }, label)
    }

    /// `H = p^2/2 + k u` (no potential).
    pub fn free(n: T, k: T) -> Result<Self> {
        let label = if k == T::zero() { format!("free({n})") } else { format!("free({n}, k={k})") };
        let coupling = if k == T::zero() { Coupling::None } else { Coupling::Constant(k) };
        Self::new(n, Potential::Flat, coupling, label)
    }

    /// `H(x, p, c0 + u)`.
    pub fn shifted(&self, c0: T) -> Self {
        let mut out = self.clone();
        out.offset = self.offset + c0;
        out.label = format!("shifted({}, c0={c0})", self.label);
        out
    }

    pub fn potential(&self, x: T) -> T {
        match self.potential {
            Potential::Flat => T::zero(),
            Potential::Pendulum => (T::lit(2.0) * T::PI() * x).cos(),
        }
    }

    /// Coefficient of `u` in `H`; `dL/du = -coupling`.
    pub fn coupling(&self, x: T) -> T {
        match self.coupling {
            Coupling::None => T::zero(),
            Coupling::Constant(k) => k,
            Coupling::Bump { shift } => alpha_bump(x, self.period) + shift,
        }
    }

    pub fn offset(&self) -> T {
        self.offset
    }
}

impl<T: Real> Model<T> for QuadraticModel<T> {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn period(&self) -> T {
        self.period
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        T::lit(0.5) * p * p + self.potential(x) + self.coupling(x) * (u + self.offset)
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        T::lit(0.5) * v * v - self.potential(x) - self.coupling(x) * (u + self.offset)
    }
    fn analytic_dl_du0(&self, x: T, _v: T) -> Option<T> {
        Some(-self.coupling(x))
    }
    fn affine_in_u(&self) -> bool {
        true
    }
}

/// Parameters accepted by [`model_zoo`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZooParams {
    /// Period `n` of the circle.
    #[serde(default = "default_period")]
    pub period: f64,
    /// Constant added to the `alpha` bump (`alpha_coupled` only).
    #[serde(default)]
    pub alpha_shift: f64,
    /// Coefficient of `u` (`free` only).
    #[serde(default)]
    pub coupling: f64,
    /// Base model name (`shifted` only).
    #[serde(default)]
    pub base: Option<String>,
    /// Shift `c0` (`shifted` only).
    #[serde(default)]
    pub c0: Option<f64>,
}

fn default_period() -> f64 {
    1.0
}

impl Default for ZooParams {
    fn default() -> Self {
        Self { period: 1.0, alpha_shift: 0.0, coupling: 0.0, base: None, c0: None }
    }
}

impl ZooParams {
    pub fn with_period(period: f64) -> Self {
        Self { period, ..Self::default() }
    }
}

/// Builds a named analytic model: `pendulum`, `discounted_linear`,
/// `alpha_coupled`, `free` or `shifted` (which wraps `base` with `c0`).
pub fn model_zoo<T: Real>(name: &str, params: &ZooParams) -> Result<QuadraticModel<T>> {
    let n = T::lit(params.period);
    match name {
        "pendulum" => QuadraticModel::pendulum(n),
        "discounted_linear" => QuadraticModel::discounted_linear(n),
        "alpha_coupled" => QuadraticModel::alpha_coupled(n, T::lit(params.alpha_shift)),
        "free" => QuadraticModel::free(n, T::lit(params.coupling)),
        "shifted" => {
            let base = params
                .base
                .as_deref()
                .ok_or_else(|| Error::InvalidModelParameter("shifted needs `base`".into()))?;
            if base == "shifted" {
                return Err(Error::InvalidModelParameter("shifted cannot wrap itself".into()));
            }
            let c0 = params.c0.ok_or_else(|| Error::InvalidModelParameter("shifted needs `c0`".into()))?;
            let inner = ZooParams { base: None, c0: None, ..params.clone() };
            Ok(model_zoo::<T>(base, &inner)?.shifted(T::lit(c0)))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// `H^r(x, p) = H(x, p, r)`: the model with its `u` argument pinned.
#[derive(Debug, Clone)]
pub struct Frozen<M, T> {
    inner: M,
    r: T,
}

impl<M, T> Frozen<M, T> {
    pub fn new(inner: M, r: T) -> Self {
        Self { inner, r }
    }
}

impl<T: Real, M: Model<T>> Model<T> for Frozen<M, T> {
    fn label(&self) -> String {
        format!("{}|u={}", self.inner.label(), self.r)
    }
    fn period(&self) -> T {
        self.inner.period()
    }
    fn hamiltonian(&self, x: T, p: T, _u: T) -> T {
        self.inner.hamiltonian(x, p, self.r)
    }
    fn lagrangian(&self, x: T, v: T, _u: T) -> T {
        self.inner.lagrangian(x, v, self.r)
    }
    fn analytic_dl_du0(&self, _x: T, _v: T) -> Option<T> {
        Some(T::zero())
    }
    fn affine_in_u(&self) -> bool {
        true
    }
}

/// `H(x, p, c0 + u)` for an arbitrary model.
#[derive(Debug, Clone)]
pub struct Shifted<M, T> {
    inner: M,
    c0: T,
}

impl<M, T> Shifted<M, T> {
    pub fn new(inner: M, c0: T) -> Self {
        Self { inner, c0 }
    }
}

impl<T: Real, M: Model<T>> Model<T> for Shifted<M, T> {
    fn label(&self) -> String {
        format!("shifted({}, c0={})", self.inner.label(), self.c0)
    }
    fn period(&self) -> T {
        self.inner.period()
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        self.inner.hamiltonian(x, p, self.c0 + u)
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        self.inner.lagrangian(x, v, self.c0 + u)
    }
    fn analytic_dl_du0(&self, x: T, v: T) -> Option<T> {
        // constant in u for affine models
        if self.inner.affine_in_u() {
            self.inner.analytic_dl_du0(x, v)
        } else {
            None
        }
    }
    fn affine_in_u(&self) -> bool {
        self.inner.affine_in_u()
    }
}

/// `H(x, p, u) + u`: turns a `u`-independent model into the linearly
/// discounted one whose `lambda u_lambda` tends to minus the critical value.
#[derive(Debug, Clone)]
pub struct LinearDiscount<M> {
    inner: M,
}

impl<M> LinearDiscount<M> {
    pub fn new(inner: M) -> Self {
        Self { inner }
    }
}

impl<T: Real, M: Model<T>> Model<T> for LinearDiscount<M> {
    fn label(&self) -> String {
        format!("{}+u", self.inner.label())
    }
    fn period(&self) -> T {
        self.inner.period()
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        self.inner.hamiltonian(x, p, u) + u
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        self.inner.lagrangian(x, v, u) - u
    }
    fn analytic_dl_du0(&self, x: T, v: T) -> Option<T> {
        self.inner.analytic_dl_du0(x, v).map(|d| d - T::one())
    }
    fn affine_in_u(&self) -> bool {
        self.inner.affine_in_u()
    }
}

/// `H(x, p, k u)` with `k > 0`: rescales `dL/du` by `k` and leaves `L(., ., 0)` alone.
#[derive(Debug, Clone)]
pub struct Rescaled<M, T> {
    inner: M,
    k: T,
}

impl<M, T: Real> Rescaled<M, T> {
    pub fn new(inner: M, k: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::InvalidModelParameter(format!("rescaling factor must be positive, got {k}")));
        }
        Ok(Self { inner, k })
    }
}

impl<T: Real, M: Model<T>> Model<T> for Rescaled<M, T> {
    fn label(&self) -> String {
        format!("{}|u*{}", self.inner.label(), self.k)
    }
    fn period(&self) -> T {
        self.inner.period()
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        self.inner.hamiltonian(x, p, self.k * u)
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        self.inner.lagrangian(x, v, self.k * u)
    }
    fn analytic_dl_du0(&self, x: T, v: T) -> Option<T> {
        self.inner.analytic_dl_du0(x, v).map(|d| d * self.k)
    }
    fn affine_in_u(&self) -> bool {
        self.inner.affine_in_u()
    }
}

/// Model defined by a user Hamiltonian only; the Lagrangian comes from
/// [`fenchel_lagrangian`] over `pgrid`. Velocities whose conjugate maximiser
/// falls outside the p-budget get `L = +inf`.
pub struct FnModel<T, F> {
    period: T,
    hamiltonian: F,
    pgrid: VelocityGrid<T>,
    label: String,
}

impl<T: Real, F: Fn(T, T, T) -> T + Send + Sync> FnModel<T, F> {
    pub fn new(period: T, hamiltonian: F, pgrid: VelocityGrid<T>, label: impl Into<String>) -> Self {
        Self { period, hamiltonian, pgrid, label: label.into() }
    }
}

impl<T: Real, F: Fn(T, T, T) -> T + Send + Sync> Model<T> for FnModel<T, F> {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn period(&self) -> T {
        self.period
    }
    fn hamiltonian(&self, x: T, p: T, u: T) -> T {
        (self.hamiltonian)(x, p, u)
    }
    fn lagrangian(&self, x: T, v: T, u: T) -> T {
        fenchel_lagrangian(self, x, v, u, &self.pgrid).unwrap_or_else(|_| T::infinity())
    }
}

/// Box of `(x, v, u)` samples used by [`check_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub x_count: usize,
    pub v_max: f64,
    pub v_count: usize,
    pub u_max: f64,
    pub u_count: usize,
    /// Largest `|p|` used by the coercivity probe.
    pub p_max: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self { x_count: 32, v_max: 3.0, v_count: 25, u_max: 2.0, u_count: 9, p_max: 20.0 }
    }
}

/// A sample point; `y` is a velocity for Lagrangian probes and a momentum for Hamiltonian ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { witness: Sample, magnitude: f64 },
    Unknown { reason: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Outcome of the sampled structural probes; (L4) lives with the Mather LPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Monotonicity: `L` non-increasing in `u`.
    pub l0: Verdict,
    /// Convexity in `v` (midpoint test).
    pub l1: Verdict,
    /// Superlinearity, probed through coercivity of `H` in `p`.
    pub l2: Verdict,
    /// First-order expansion in `u` at `u = 0`.
    pub l3: Verdict,
    /// Concavity of `L` in `u`.
    pub l5: Verdict,
    /// `dL/du(., ., 0)` vanishes on every sample.
    pub dl_du0_vanishes: bool,
}

struct Worst {
    witness: Option<Sample>,
    magnitude: f64,
}

impl Worst {
    fn new() -> Self {
        Self { witness: None, magnitude: 0.0 }
    }

    fn record(&mut self, violation: f64, at: Sample) {
        if violation > self.magnitude || (self.witness.is_none() && violation > 0.0) {
            self.magnitude = violation;
            self.witness = Some(at);
        }
    }

    fn verdict(self) -> Verdict {
        match self.witness {
            Some(witness) => Verdict::Fail { witness, magnitude: self.magnitude },
            None => Verdict::Pass,
        }
    }
}

fn ladder(max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![0.0];
    }
    (0..count).map(|k| -max + 2.0 * max * k as f64 / (count - 1) as f64).collect()
}

/// Deterministic grid probes of (L0), (L1), (L2) via coercivity, (L3) and (L5).
pub fn check_conditions<T: Real, M: Model<T> + ?Sized>(m: &M, spec: &SamplingSpec) -> ConditionReport {
    let period = m.period().as_f64();
    let xs: Vec<f64> = (0..spec.x_count.max(1)).map(|i| period * i as f64 / spec.x_count.max(1) as f64).collect();
    let vs = ladder(spec.v_max, spec.v_count.max(3));
    let us = ladder(spec.u_max, spec.u_count.max(3));
    let lag = |x: f64, v: f64, u: f64| m.lagrangian(T::lit(x), T::lit(v), T::lit(u)).as_f64();
    let ham = |x: f64, p: f64, u: f64| m.hamiltonian(T::lit(x), T::lit(p), T::lit(u)).as_f64();
    let rel = |a: f64| 1e-10 * (1.0 + a.abs());

    let mut l0 = Worst::new();
    let mut l1 = Worst::new();
    let mut l5 = Worst::new();
    for &x in &xs {
        for &v in &vs {
            for w in us.windows(2) {
                let (a, b) = (lag(x, v, w[0]), lag(x, v, w[1]));
                let inc = b - a;
                if inc > rel(a) {
                    l0.record(inc, Sample { x, y: v, u: w[1] });
                }
            }
            for w in us.windows(3) {
                let (a, mid, b) = (lag(x, v, w[0]), lag(x, v, w[1]), lag(x, v, w[2]));
                let gap = 0.5 * (a + b) - mid;
                if gap > rel(mid) {
                    l5.record(gap, Sample { x, y: v, u: w[1] });
                }
            }
        }
        for &u in &us {
            for i in 0..vs.len() {
                for j in (i + 2..vs.len()).step_by(2) {
                    let mid_v = 0.5 * (vs[i] + vs[j]);
                    let mid = lag(x, mid_v, u);
                    let gap = mid - 0.5 * (lag(x, vs[i], u) + lag(x, vs[j], u));
                    if gap > rel(mid) {
                        l1.record(gap, Sample { x, y: mid_v, u });
                    }
                }
            }
        }
    }

    // coercivity: H must grow strictly along |p| = p_max/4, p_max/2, p_max
    let mut l2 = Worst::new();
    let ps = [spec.p_max / 4.0, spec.p_max / 2.0, spec.p_max];
    for &x in &xs {
        for &u in &us {
            for sign in [-1.0, 1.0] {
                let hs: Vec<f64> = ps.iter().map(|p| ham(x, sign * p, u)).collect();
                let h0 = ham(x, 0.0, u);
                for (k, w) in hs.windows(2).enumerate() {
                    if w[1] <= w[0] {
                        l2.record(w[0] - w[1] + rel(w[0]), Sample { x, y: sign * ps[k + 1], u });
                    }
                }
                if hs[2] <= h0 {
                    l2.record(h0 - hs[2] + rel(h0), Sample { x, y: sign * ps[2], u });
                }
            }
        }
    }

    let mut l3 = Worst::new();
    let mut vanishes = true;
    for &x in &xs {
        for &v in &vs {
            let d = match partial_l_u0(m, T::lit(x), T::lit(v)) {
                Ok(d) => d.as_f64(),
                Err(_) => dl_du_fd(m, T::lit(x), T::lit(v), T::zero()).as_f64(),
            };
            if d.abs() > 1e-12 {
                vanishes = false;
            }
            let base = lag(x, v, 0.0);
            let eta = |u: f64| (lag(x, v, u) - base - u * d).abs() / u.abs();
            for sign in [-1.0, 1.0] {
                let coarse = eta(sign * 1e-2);
                let fine = eta(sign * 1e-3);
                let allowed = 0.5 * coarse + 1e-7 * (1.0 + base.abs());
                if fine > allowed {
                    l3.record(fine - allowed, Sample { x, y: v, u: sign * 1e-3 });
                }
            }
        }
    }

    ConditionReport {
        l0: l0.verdict(),
        l1: l1.verdict(),
        l2: l2.verdict(),
        l3: l3.verdict(),
        l5: l5.verdict(),
        dl_du0_vanishes: vanishes,
    }
}

/// `2/pi (1 - |cos(pi x)|)`: the barrier `h(0, x)` of the 1-periodic pendulum.
pub fn pendulum_barrier_from_zero(x: f64) -> f64 {
    2.0 / PI * (1.0 - (PI * x).cos().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pgrid() -> VelocityGrid<f64> {
        VelocityGrid::new(8.0, 801).unwrap()
    }

    #[test]
    fn fenchel_examples() {
        let pend = QuadraticModel::<f64>::pendulum(1.0).unwrap();
        let l = fenchel_lagrangian(&pend, 0.0, 1.0, 0.0, &pgrid()).unwrap();
        assert_relative_eq!(l, -0.5, epsilon = 1e-12);
        for x in [0.0, 0.3, 0.77] {
            let l = fenchel_lagrangian(&pend, x, 0.0, 0.7, &pgrid()).unwrap();
            assert_relative_eq!(l, -pend.hamiltonian(x, 0.0, 0.7), epsilon = 1e-12);
        }
        let alpha = QuadraticModel::<f64>::alpha_coupled(4.0, 0.0).unwrap();
        // cos(2 pi) = 1 and alpha(1) = 1, so L = -(1 + 2)
        let l = fenchel_lagrangian(&alpha, 1.0, 0.0, 2.0, &pgrid()).unwrap();
        assert_relative_eq!(l, -3.0, epsilon = 1e-12);
        assert_relative_eq!(alpha.lagrangian(1.0, 0.0, 2.0), -3.0, epsilon = 1e-12);
    }

    #[test]
    fn fenchel_boundary_is_reported() {
        let pend = QuadraticModel::<f64>::pendulum(1.0).unwrap();
        let small = VelocityGrid::new(1.0, 21).unwrap();
        assert!(matches!(
            fenchel_lagrangian(&pend, 0.0, 2.5, 0.0, &small),
            Err(Error::SuperlinearityBudget { .. })
        ));
    }

    #[test]
    fn partial_l_u0_examples() {
        let alpha = QuadraticModel::<f64>::alpha_coupled(4.0, 0.0).unwrap();
        for x in [0.0, 0.75, 1.0, 1.3, 2.5] {
            assert_eq!(partial_l_u0(&alpha, x, 0.4).unwrap(), -alpha_bump(x, 4.0));
        }
        let lin = QuadraticModel::<f64>::discounted_linear(1.0).unwrap();
        assert_eq!(partial_l_u0(&lin, 0.2, -1.0).unwrap(), -1.0);
        let pend = QuadraticModel::<f64>::pendulum(1.0).unwrap();
        assert_eq!(partial_l_u0(&pend, 0.2, 1.0).unwrap(), 0.0);
        // the finite-difference path agrees with the analytic values
        let fn_lin = FnModel::new(1.0, |x: f64, p: f64, u: f64| 0.5 * p * p + (2.0 * PI * x).cos() + u, pgrid(), "fn");
        assert_relative_eq!(partial_l_u0(&fn_lin, 0.2, 0.5).unwrap(), -1.0, epsilon = 1e-6);
        let bad = FnModel::new(1.0, |_x: f64, p: f64, u: f64| 0.5 * p * p - u, pgrid(), "bad");
        assert!(matches!(partial_l_u0(&bad, 0.0, 0.0), Err(Error::PositiveDerivative { .. })));
    }

    #[test]
    fn zoo_examples() {
        let pend = model_zoo::<f64>("pendulum", &ZooParams::default()).unwrap();
        assert_relative_eq!(pend.hamiltonian(0.25, 1.0, 0.0), 0.5, epsilon = 1e-15);
        let alpha = model_zoo::<f64>("alpha_coupled", &ZooParams::with_period(4.0)).unwrap();
        assert_eq!(alpha.coupling(1.0), 1.0);
        assert_eq!(alpha.coupling(2.0), 0.0);
        assert_eq!(alpha.coupling(5.0), 1.0);
        assert_eq!(alpha.coupling(0.25), 0.0);
        assert!(alpha.coupling(0.75) > 0.0 && alpha.coupling(1.4) > 0.0);
        let shifted = model_zoo::<f64>(
            "shifted",
            &ZooParams { base: Some("discounted_linear".into()), c0: Some(-1.0), ..ZooParams::default() },
        )
        .unwrap();
        for x in [0.0, 0.1, 0.5] {
            assert_relative_eq!(
                shifted.hamiltonian(x, 0.0, 0.0),
                (2.0 * PI * x).cos() - 1.0,
                epsilon = 1e-15
            );
        }
        assert!(matches!(model_zoo::<f64>("duffing", &ZooParams::default()), Err(Error::UnknownModel(_))));
        assert!(model_zoo::<f64>("alpha_coupled", &ZooParams::with_period(1.0)).is_err());
    }

    #[test]
    fn generic_wrappers_match_zoo_shift() {
        let lin = QuadraticModel::<f64>::discounted_linear(1.0).unwrap();
        let a = Shifted::new(&lin, -1.0);
        let b = lin.shifted(-1.0);
        for (x, p, u) in [(0.1, 0.3, 0.2), (0.9, -2.0, -1.0)] {
            assert_eq!(a.hamiltonian(x, p, u), b.hamiltonian(x, p, u));
            assert_eq!(a.lagrangian(x, p, u), b.lagrangian(x, p, u));
        }
        let frozen = Frozen::new(&lin, 0.5);
        assert_eq!(frozen.lagrangian(0.3, 1.0, 99.0), lin.lagrangian(0.3, 1.0, 0.5));
        let disc = LinearDiscount::new(Frozen::new(&lin, 0.5));
        assert_eq!(disc.hamiltonian(0.3, 1.0, 2.0), lin.hamiltonian(0.3, 1.0, 0.5) + 2.0);
        assert_eq!(disc.analytic_dl_du0(0.3, 1.0), Some(-1.0));
    }

    #[test]
    fn condition_examples() {
        let spec = SamplingSpec::default();
        let pend = QuadraticModel::<f64>::pendulum(1.0).unwrap();
        let r = check_conditions(&pend, &spec);
        assert!(r.l0.passed() && r.l1.passed() && r.l2.passed() && r.l3.passed() && r.l5.passed());
        assert!(r.dl_du0_vanishes);

        let alpha = QuadraticModel::<f64>::alpha_coupled(4.0, 0.0).unwrap();
        let r = check_conditions(&alpha, &SamplingSpec { x_count: 64, ..spec.clone() });
        assert!(r.l0.passed() && r.l1.passed() && r.l2.passed() && r.l3.passed() && r.l5.passed());
        assert!(!r.dl_du0_vanishes);

        let bad = QuadraticModel::<f64>::free(1.0, -1.0).unwrap();
        let r = check_conditions(&bad, &spec);
        match r.l0 {
            Verdict::Fail { witness, magnitude } => {
                assert!(magnitude > 0.0);
                let w = witness;
                assert!(bad.lagrangian(w.x, w.y, w.u) > bad.lagrangian(w.x, w.y, w.u - 0.5));
            }
            other => panic!("expected (L0) failure, got {other:?}"),
        }
    }

    #[test]
    fn nonconvex_and_nonconcave_are_caught() {
        let pg = pgrid();
        // L convex in u (u^2 term in H with wrong sign for concavity of L)
        let h = FnModel::new(1.0, |_x: f64, p: f64, u: f64| 0.5 * p * p - (-u).exp(), pg, "exp");
        let r = check_conditions(&h, &SamplingSpec { x_count: 4, v_count: 7, ..SamplingSpec::default() });
        assert!(matches!(r.l5, Verdict::Fail { .. }), "{:?}", r.l5);
        // H bounded in p is not coercive
        let flat = FnModel::new(1.0, |_x: f64, p: f64, _u: f64| p.atan(), pg, "atan");
        let r = check_conditions(&flat, &SamplingSpec { x_count: 4, v_count: 7, ..SamplingSpec::default() });
        assert!(matches!(r.l2, Verdict::Fail { .. }));
    }

    proptest! {
        #[test]
        fn fenchel_round_trip(x in 0.0f64..1.0, p in -2.0f64..2.0, u in -1.0f64..1.0) {
            let m = QuadraticModel::<f64>::alpha_coupled(2.0, 0.1).unwrap();
            let vg = VelocityGrid::new(5.0, 401).unwrap();
            let recovered = vg.velocities().iter()
                .map(|&v| p * v - fenchel_lagrangian(&m, x, v, u, &pgrid()).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((recovered - m.hamiltonian(x, p, u)).abs() <= 1e-3);
        }

        #[test]
        fn affine_zoo_models_are_exactly_affine(x in 0.0f64..4.0, v in -3.0f64..3.0, u in -5.0f64..5.0) {
            for m in [
                QuadraticModel::<f64>::alpha_coupled(4.0, 0.2).unwrap(),
                QuadraticModel::<f64>::discounted_linear(4.0).unwrap(),
                QuadraticModel::<f64>::pendulum(4.0).unwrap(),
            ] {
                let d = partial_l_u0(&m, x, v).unwrap();
                prop_assert!(d <= 1e-8);
                let lhs = m.lagrangian(x, v, u) - m.lagrangian(x, v, 0.0);
                prop_assert!((lhs - u * d).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn f32_models_work() {
        let m = QuadraticModel::<f32>::pendulum(1.0).unwrap();
        assert!((m.hamiltonian(0.25, 1.0, 0.0) - 0.5).abs() < 1e-6);
    }
}
