//! The genuine-collar model in rs-coordinates: parameters, the model
//! Kähler–Einstein density, the τ-grid and volume integration.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CollarError, Result};
use crate::fields::CollarField;
use crate::numerics::{uniform_stencils, Stencil};

/// Largest `π/u` for which `e^{−π/u}` and its inverse stay comfortably inside f64.
const MAX_PI_OVER_U: f64 = 700.0;

/// Parameters of one degenerating collar.
///
/// The model ties the inner scale to the pinching parameter: `ρ = |t| = e^{−π/u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarParams {
    t: Complex64,
    u: f64,
    rho: f64,
    c: f64,
}

impl CollarParams {
    /// Collar for pinching parameter `t` and outer cut `c`.
    pub fn from_t(t: Complex64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(CollarError::InvalidCut(c));
        }
        let t_abs = t.norm();
        if !(t_abs > 0.0) || t_abs >= c * c {
            return Err(CollarError::EmptyDomain { t_abs, c_sq: c * c });
        }
        let u = -PI / t_abs.ln();
        Self::check_width(u)?;
        Ok(Self { t, u, rho: t_abs, c })
    }

    /// Collar of width `u` with real positive `t = e^{−π/u}`.
    pub fn from_u(u: f64, c: f64) -> Result<Self> {
        Self::from_u_phase(u, 0.0, c)
    }

    /// Collar of width `u` with `t = e^{−π/u} e^{i·arg}`.
    pub fn from_u_phase(u: f64, arg: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(CollarError::InvalidCut(c));
        }
        Self::check_width(u)?;
        let rho = (-PI / u).exp();
        if rho >= c * c {
            return Err(CollarError::EmptyDomain { t_abs: rho, c_sq: c * c });
        }
        Ok(Self { t: Complex64::from_polar(rho, arg), u, rho, c })
    }

    fn check_width(u: f64) -> Result<()> {
        if !(u > 0.0) || !u.is_finite() || PI / u > MAX_PI_OVER_U {
            return Err(CollarError::InvalidWidth(u));
        }
        Ok(())
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    pub fn t_abs(&self) -> f64 {
        self.rho
    }

    /// Unit-modulus phase `t/|t|`.
    pub fn t_phase(&self) -> Complex64 {
        self.t / self.rho
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cut(&self) -> f64 {
        self.c
    }

    /// Geodesic length `l = 2πu`.
    pub fn length(&self) -> f64 {
        2.0 * PI * self.u
    }

    /// τ-interval `(−π − u log c, u log c)` of the annulus `(c⁻¹ρ, c)`.
    pub fn tau_interval(&self) -> (f64, f64) {
        let lc = self.c.ln();
        (-PI - self.u * lc, self.u * lc)
    }

    /// `r = e^{τ/u}`.
    pub fn radius(&self, tau: f64) -> f64 {
        (tau / self.u).exp()
    }

    pub fn tau_of_radius(&self, r: f64) -> f64 {
        self.u * r.ln()
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        let (lo, hi) = self.tau_interval();
        if !(tau > lo && tau < hi) {
            return Err(CollarError::OutOfDomain { tau, lo, hi });
        }
        Ok(())
    }
}

/// Model density `λ = ½ u² r⁻² csc²τ` multiplying `|dz|²`.
pub fn metric_density(p: &CollarParams, tau: f64) -> Result<f64> {
    p.check_tau(tau)?;
    let r = p.radius(tau);
    let s = tau.sin();
    Ok(0.5 * p.u * p.u / (r * r * s * s))
}

/// Radius of the closed geodesic, `r* = e^{−π/(2u)}`.
pub fn geodesic_circle(p: &CollarParams) -> f64 {
    (-PI / (2.0 * p.u)).exp()
}

/// Closed τ-grid on the collar interval.
///
/// Nodes are the image of the uniform grid `s_j = j/N` under
/// `τ(s) = a + (b − a)(s − (1 − ε) sin(2πs)/(2π))`, which clusters nodes at both
/// ends where the cutoff transitions live. Weights are composite Boole in `s`.
#[derive(Debug, Clone)]
pub struct TauGrid {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dtau_ds: Vec<f64>,
    d2tau_ds2: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
}

impl TauGrid {
    /// Grid with `n` intervals (`n + 1` nodes); `n` must be a multiple of 4, at least 64.
    pub fn new(p: &CollarParams, n: usize) -> Result<Self> {
        if n < 64 || n % 4 != 0 {
            return Err(CollarError::InvalidResolution(n));
        }
        let (a, b) = p.tau_interval();
        let len = b - a;
        let eps = (2.0 * p.u).clamp(0.02, 1.0);
        let kappa = 1.0 - eps;
        let h = 1.0 / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        let mut dtau_ds = Vec::with_capacity(n + 1);
        let mut d2tau_ds2 = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let s = j as f64 * h;
            let (sn, cs) = (2.0 * PI * s).sin_cos();
            nodes.push(a + len * (s - kappa * sn / (2.0 * PI)));
            dtau_ds.push(len * (1.0 - kappa * cs));
            d2tau_ds2.push(len * kappa * 2.0 * PI * sn);
        }
        nodes[0] = a;
        nodes[n] = b;
        let boole = [7.0, 32.0, 12.0, 32.0, 7.0];
        let mut weights = vec![0.0; n + 1];
        for panel in (0..n).step_by(4) {
            for (q, w) in boole.iter().enumerate() {
                weights[panel + q] += w * 2.0 * h / 45.0;
            }
        }
        for (w, ts) in weights.iter_mut().zip(&dtau_ds) {
            *w *= ts;
        }
        let (d1, d2) = uniform_stencils(n);
        Ok(Self { n, nodes, weights, dtau_ds, d2tau_ds2, d1, d2 })
    }

    /// Number of intervals.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ g dτ` over the collar interval.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn integrate_complex(&self, g: &[Complex64]) -> Complex64 {
        g.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    fn apply(st: &Stencil, g: &[Complex64]) -> Complex64 {
        st.weights.iter().zip(&g[st.start..]).map(|(w, v)| v * *w).sum()
    }

    /// `dg/dτ` at every node.
    pub fn d_tau(&self, g: &[Complex64]) -> Vec<Complex64> {
        (0..=self.n).map(|j| Self::apply(&self.d1[j], g) * (self.n as f64) / self.dtau_ds[j]).collect()
    }

    /// `d²g/dτ²` at every node.
    pub fn d2_tau(&self, g: &[Complex64]) -> Vec<Complex64> {
        let nf = self.n as f64;
        (0..=self.n)
            .map(|j| {
                let gs = Self::apply(&self.d1[j], g) * nf;
                let gss = Self::apply(&self.d2[j], g) * (nf * nf);
                let ts = self.dtau_ds[j];
                (gss - gs * (self.d2tau_ds2[j] / ts)) / (ts * ts)
            })
            .collect()
    }

    /// Row `j` of the τ-derivative operators as `(start, d1 weights, d2 weights)`,
    /// padded to a common start.
    pub(crate) fn operator_row(&self, j: usize) -> (usize, Vec<f64>, Vec<f64>) {
        let nf = self.n as f64;
        let s1 = &self.d1[j];
        let s2 = &self.d2[j];
        debug_assert_eq!(s1.start, s2.start);
        let ts = self.dtau_ds[j];
        let tss = self.d2tau_ds2[j];
        let w1: Vec<f64> = s1.weights.iter().map(|w| w * nf / ts).collect();
        let w2: Vec<f64> = s2
            .weights
            .iter()
            .zip(&s1.weights)
            .map(|(w2, w1)| (w2 * nf * nf - w1 * nf * tss / ts) / (ts * ts))
            .collect();
        (s1.start, w1, w2)
    }
}

/// A collar with its grid and cached node data.
#[derive(Debug, Clone)]
pub struct Collar {
    params: CollarParams,
    grid: TauGrid,
    sin: Vec<f64>,
    log_r: Vec<f64>,
}

impl Collar {
    pub fn new(params: CollarParams, n: usize) -> Result<Arc<Self>> {
        let grid = TauGrid::new(&params, n)?;
        let sin = grid.nodes.iter().map(|t| t.sin()).collect();
        let log_r = grid.nodes.iter().map(|t| t / params.u).collect();
        Ok(Arc::new(Self { params, grid, sin, log_r }))
    }

    pub fn params(&self) -> &CollarParams {
        &self.params
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn u(&self) -> f64 {
        self.params.u
    }

    /// `sin τ` at the nodes.
    pub fn sin_tau(&self) -> &[f64] {
        &self.sin
    }

    /// `log r = τ/u` at the nodes.
    pub fn log_r(&self) -> &[f64] {
        &self.log_r
    }

    /// True when both collars describe the same parameters and resolution.
    pub fn same_grid(&self, other: &Collar) -> bool {
        std::ptr::eq(self, other) || (self.params == other.params && self.grid.n == other.grid.n)
    }

    /// `∫ F dv` for a function whose mode-0 profile is `g`: `πu ∫ g csc²τ dτ`.
    pub fn volume_profile(&self, g: &[Complex64]) -> Complex64 {
        let s: Complex64 =
            g.iter().zip(&self.grid.weights).zip(&self.sin).map(|((v, w), sn)| v * (*w / (sn * sn))).sum();
        s * (PI * self.params.u)
    }
}

/// `∫ f dv` over the collar; only the mode-0 profile contributes.
pub fn volume_integral(f: &CollarField) -> Complex64 {
    match f.mode(0) {
        Some(g) => f.collar().volume_profile(g),
        None => Complex64::new(0.0, 0.0),
    }
}

/// One radial moment `∫ r^{k−1} sin²τ dr` over the collar, rescaled so the
/// `u → 0` behaviour is O(1).
///
/// `k = 0` reports `u ∫ r⁻¹ sin²τ dr` (limit π/2). For `k ≠ 0` the integral is
/// divided by `u² c^{|k|}` (and by `ρ^k` when `k < 0`), with limit
/// `L²/|k| + 2L/k² + 2/|k|³`, `L = log(1/c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMoment {
    pub k: i32,
    pub u: f64,
    pub measured: f64,
    pub oracle: f64,
    pub limit: f64,
}

/// `∫ e^{a(τ−τ₀)} sin²τ dτ` antiderivative.
fn moment_antiderivative(a: f64, tau0: f64, tau: f64) -> f64 {
    if a == 0.0 {
        return tau / 2.0 - (2.0 * tau).sin() / 4.0;
    }
    let e = (a * (tau - tau0)).exp();
    e * (1.0 / (2.0 * a) - (a * (2.0 * tau).cos() + 2.0 * (2.0 * tau).sin()) / (2.0 * (a * a + 4.0)))
}

pub fn radial_moment(collar: &Collar, k: i32) -> RadialMoment {
    let p = collar.params();
    let u = p.u;
    let (lo, hi) = p.tau_interval();
    let a = k as f64 / u;
    // r^k / (c^{|k|} ρ^{min(k,0)}) = e^{a(τ − τ₀)}, with τ₀ the end where it is 1
    let tau0 = if k > 0 { hi } else { lo };
    let prefactor = if k == 0 { 1.0 } else { 1.0 / (u * u * u) };
    let g: Vec<f64> = collar.grid.nodes.iter().zip(&collar.sin).map(|(t, s)| (a * (t - tau0)).exp() * s * s).collect();
    let measured = prefactor * collar.grid.integrate(&g);
    let oracle = prefactor * (moment_antiderivative(a, tau0, hi) - moment_antiderivative(a, tau0, lo));
    let big_l = (1.0 / p.cut()).ln();
    let kk = k.unsigned_abs() as f64;
    let limit = if k == 0 { PI / 2.0 } else { big_l * big_l / kk + 2.0 * big_l / (kk * kk) + 2.0 / kk.powi(3) };
    RadialMoment { k, u, measured, oracle, limit }
}
