//! The Green operator `T = (□+1)⁻¹` on one collar, solved mode by mode as a
//! Dirichlet two-point boundary-value problem on the shared τ-grid.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collar::{volume_integral, Collar};
use crate::error::{CollarError, Result};
use crate::fields::{check_resolved, CollarField};
use crate::numerics::{BandLu, BandMatrix};
use crate::operators::box_op;

/// Boundary condition at both collar ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Boundary {
    #[default]
    DirichletZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub boundary: Boundary,
    /// Smallest accepted grid resolution of the input.
    pub min_resolution: usize,
    /// Modes with `|n|` above this are dropped (and the output flagged truncated).
    pub mode_cutoff: i32,
    /// Normwise backward error accepted for each banded solve.
    pub tolerance: f64,
    /// Relative residual accepted for `(□+1)g − f` at interior nodes.
    pub residual_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { boundary: Boundary::DirichletZero, min_resolution: 512, mode_cutoff: 32, tolerance: 1e-10, residual_tolerance: 1e-6 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-10) {
            return Err(CollarError::InvalidSpec(format!("solver tolerance {} must lie in (0, 1e-10]", self.tolerance)));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(CollarError::InvalidSpec("residual tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Output of [`solve_t`].
#[derive(Debug, Clone)]
pub struct TSolution {
    pub field: CollarField,
    /// `‖(□+1)g − f‖₀ / ‖f‖₀` over interior nodes.
    pub residual: f64,
    /// Set when `f` is not negligible on the outer tenth of the interval, so the
    /// Dirichlet ends bias the result.
    pub support_warning: bool,
}

const BAND: usize = 7;

fn mode_matrix(collar: &Collar, n: i32) -> Option<BandLu> {
    let grid = collar.grid();
    let len = grid.len();
    let u = collar.u();
    let s = collar.sin_tau();
    let k = (n * n) as f64 / (u * u);
    let mut m = BandMatrix::new(len, BAND, BAND);
    m.add(0, 0, 1.0);
    m.add(len - 1, len - 1, 1.0);
    for j in 1..len - 1 {
        let (start, _, w2) = grid.operator_row(j);
        let half = 0.5 * s[j] * s[j];
        for (q, w) in w2.iter().enumerate() {
            m.add(j, start + q, -half * w);
        }
        m.add(j, j, 1.0 + half * k);
    }
    m.factor()
}

/// True when `|f|` on the outer 10% of the τ-interval (at either end) exceeds
/// `1e-6 ‖f‖₀`.
pub fn support_violated(f: &CollarField) -> bool {
    let total = f.sup_norm();
    if total == 0.0 {
        return false;
    }
    let nodes = f.collar().grid().nodes();
    let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
    let w = 0.1 * (b - a);
    let edge = f.sup_norm_in(Some((a, a + w))).max(f.sup_norm_in(Some((b - w, b))));
    edge > 1e-6 * total
}

fn interior_sup(f: &CollarField) -> f64 {
    let nodes = f.collar().grid().nodes();
    let (a, b) = (nodes[1], nodes[nodes.len() - 2]);
    f.sup_norm_in(Some((a, b)))
}

/// `g = T f` with Dirichlet-zero ends, solved independently per angular mode.
pub fn solve_t(f: &CollarField, cfg: &SolverConfig) -> Result<TSolution> {
    cfg.validate()?;
    let collar = f.collar().clone();
    if collar.grid().resolution() < cfg.min_resolution {
        return Err(CollarError::InvalidResolution(collar.grid().resolution()));
    }
    let mut modes = BTreeMap::new();
    let mut dropped = false;
    for (n, prof) in f.modes() {
        if n.abs() > cfg.mode_cutoff {
            dropped = true;
            continue;
        }
        if prof.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            continue;
        }
        modes.insert(n, solve_mode(&collar, n, prof, cfg.tolerance)?);
    }
    let mut field = CollarField::zero(&collar).with_bandwidth(f.bandwidth());
    for (n, g) in modes {
        field = field.try_add(&CollarField::from_mode(&collar, n, g))?;
    }
    if dropped || f.truncated() {
        field = field.flag_truncated();
    }
    let scale = f.sup_norm();
    let residual = if scale == 0.0 {
        0.0
    } else {
        let back = apply_box1(&field)?;
        interior_sup(&back.try_sub(f)?) / scale
    };
    if residual > cfg.residual_tolerance {
        return Err(CollarError::Residual { residual, tolerance: cfg.residual_tolerance });
    }
    Ok(TSolution { field, residual, support_warning: support_violated(f) })
}

fn solve_mode(collar: &Collar, n: i32, f: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let lu = mode_matrix(collar, n).ok_or_else(|| CollarError::Singular(format!("mode {n} operator")))?;
    let len = f.len();
    let mut re: Vec<f64> = f.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = f.iter().map(|v| v.im).collect();
    re[0] = 0.0;
    re[len - 1] = 0.0;
    im[0] = 0.0;
    im[len - 1] = 0.0;
    let (rhs_re, rhs_im) = (re.clone(), im.clone());
    lu.solve(&mut re);
    lu.solve(&mut im);
    let g: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let check = discrete_residual(collar, n, &g, &rhs_re, &rhs_im);
    if check > tol {
        return Err(CollarError::Residual { residual: check, tolerance: tol });
    }
    Ok(g)
}

/// Normwise backward error `‖A g − b‖∞ / (‖A‖∞ ‖g‖∞ + ‖b‖∞)` of the banded system.
fn discrete_residual(collar: &Collar, n: i32, g: &[Complex64], re: &[f64], im: &[f64]) -> f64 {
    let grid = collar.grid();
    let u = collar.u();
    let s = collar.sin_tau();
    let k = (n * n) as f64 / (u * u);
    let rhs = re.iter().zip(im).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    if rhs == 0.0 {
        return 0.0;
    }
    let g_norm = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut a_norm: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for j in 1..g.len() - 1 {
        let (start, _, w2) = grid.operator_row(j);
        let d2: Complex64 = w2.iter().enumerate().map(|(q, w)| g[start + q] * *w).sum();
        let half = 0.5 * s[j] * s[j];
        let diag = 1.0 + half * k;
        a_norm = a_norm.max(w2.iter().map(|w| (half * w).abs()).sum::<f64>() + diag);
        let lhs = -d2 * half + g[j] * diag;
        worst = worst.max((lhs - Complex64::new(re[j], im[j])).norm());
    }
    worst / (a_norm * g_norm + rhs)
}

/// `T f` with the default configuration, discarding the diagnostics.
pub fn t_op(f: &CollarField) -> Result<CollarField> {
    Ok(solve_t(f, &SolverConfig::default())?.field)
}

/// `(□+1) g`.
pub fn apply_box1(g: &CollarField) -> Result<CollarField> {
    check_resolved(g)?;
    box_op(g)?.try_add(g)
}

/// `∫ g h̄ dv`.
pub fn pairing(g: &CollarField, h: &CollarField) -> Result<Complex64> {
    Ok(volume_integral(&g.try_mul(&h.conj())?))
}

/// The three quantities of the spectral inequalities `∫|Tf|² ≤ ∫Tf·f̄ ≤ ∫|f|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub tf_squared: f64,
    pub tf_pairing: f64,
    pub f_squared: f64,
}

impl SpectralReport {
    /// Largest relative violation of the two inequalities (0 when both hold).
    pub fn violation(&self) -> f64 {
        let s = self.f_squared.max(f64::MIN_POSITIVE);
        ((self.tf_squared - self.tf_pairing).max(0.0) + (self.tf_pairing - self.f_squared).max(0.0)) / s
    }
}

pub fn spectral_check(f: &CollarField, cfg: &SolverConfig) -> Result<SpectralReport> {
    let tf = solve_t(f, cfg)?.field;
    Ok(SpectralReport {
        tf_squared: pairing(&tf, &tf)?.re,
        tf_pairing: pairing(&tf, f)?.re,
        f_squared: pairing(f, f)?.re,
    })
}

/// Relative defect `|∫(Tf)h̄ − ∫f·conj(Th)| / max(|·|)`.
pub fn self_adjoint_defect(f: &CollarField, h: &CollarField, cfg: &SolverConfig) -> Result<f64> {
    let left = pairing(&solve_t(f, cfg)?.field, h)?;
    let right = pairing(f, &solve_t(h, cfg)?.field)?;
    let scale = left.norm().max(right.norm());
    Ok(if scale == 0.0 { 0.0 } else { (left - right).norm() / scale })
}

/// Relative change of `∫(Tf)h̄` when the outer cut `c` is replaced by `0.9c`.
/// `build` produces `(f, h)` on a given collar.
pub fn boundary_sensitivity(
    collar: &Arc<Collar>,
    cfg: &SolverConfig,
    build: impl Fn(&Arc<Collar>) -> Result<(CollarField, CollarField)>,
) -> Result<f64> {
    let p = collar.params();
    let narrow = crate::collar::CollarParams::from_u_phase(p.u(), p.t_phase().arg(), 0.9 * p.cut())?;
    let other = Collar::new(narrow, collar.grid().resolution())?;
    let mut vals = Vec::with_capacity(2);
    for c in [collar, &other] {
        let (f, h) = build(c)?;
        vals.push(pairing(&solve_t(&f, cfg)?.field, &h)?);
    }
    Ok((vals[0] - vals[1]).norm() / vals[0].norm().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::CollarParams;

    fn collar(u: f64, n: usize) -> Arc<Collar> {
        Collar::new(CollarParams::from_u(u, 0.5).unwrap(), n).unwrap()
    }

    /// Smooth bump supported in `(lo, hi)`, times `e^{inθ}`.
    fn bump(c: &Arc<Collar>, n: i32, lo: f64, hi: f64, amp: Complex64) -> CollarField {
        CollarField::from_fn(c, n, |t| {
            if t <= lo || t >= hi {
                return Complex64::new(0.0, 0.0);
            }
            let x = (2.0 * t - lo - hi) / (hi - lo);
            amp * (-1.0 / (1.0 - x * x)).exp()
        })
    }

    #[test]
    fn zero_maps_to_zero() {
        let c = collar(0.05, 1024);
        let s = solve_t(&CollarField::zero(&c), &SolverConfig::default()).unwrap();
        assert_eq!(s.field.sup_norm(), 0.0);
    }

    #[test]
    fn round_trip_and_maximum_principle() {
        let c = collar(0.05, 2048);
        let f = bump(&c, 0, -2.5, -0.8, Complex64::new(1.0, 0.0));
        let s = solve_t(&f, &SolverConfig::default()).unwrap();
        assert!(s.residual < 1e-9, "{}", s.residual);
        assert!(!s.support_warning);
        let g = s.field.mode(0).unwrap();
        let lo = g.iter().map(|v| v.re).fold(0.0, f64::min);
        assert!(lo >= -1e-10 * s.field.sup_norm(), "{lo}");
        assert!(s.field.sup_norm() <= f.sup_norm());
    }

    #[test]
    fn box1_of_constant_is_constant() {
        let c = collar(0.1, 512);
        let k = Complex64::new(2.5, -1.0);
        let g = apply_box1(&CollarField::constant(&c, k)).unwrap();
        assert!(g.mode(0).unwrap().iter().all(|v| (v - k).norm() < 1e-9));
    }

    #[test]
    fn spectral_and_self_adjoint_on_mixed_modes() {
        let c = collar(0.05, 2048);
        let cfg = SolverConfig::default();
        let a = bump(&c, 1, -2.6, -1.0, Complex64::new(0.7, 0.2));
        let f = a.try_add(&a.conj()).unwrap().try_add(&bump(&c, 0, -2.0, -0.5, Complex64::new(1.0, 0.0))).unwrap();
        let rep = spectral_check(&f, &cfg).unwrap();
        assert!(rep.violation() <= 1e-10, "{rep:?}");
        let h = bump(&c, 1, -1.9, -0.4, Complex64::new(0.1, 1.0));
        assert!(self_adjoint_defect(&f, &h, &cfg).unwrap() < 1e-8);
    }

    #[test]
    fn uncut_input_raises_support_warning() {
        let c = collar(0.1, 1024);
        let f = CollarField::from_fn(&c, 0, |t| Complex64::new(t.sin().powi(4), 0.0));
        let s = solve_t(&f, &SolverConfig::default()).unwrap();
        assert!(s.support_warning);
    }
}
