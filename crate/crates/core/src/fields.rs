//! Complex functions on a collar as angular Fourier modes times radial
//! profiles on the shared τ-grid, with arithmetic and Wirtinger derivatives.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::collar::Collar;
use crate::error::{CollarError, Result};

/// Default largest angular index kept by products.
pub const DEFAULT_BANDWIDTH: i32 = 8;

/// A complex function `Σ_n g_n(τ) e^{inθ}` on one collar.
#[derive(Debug, Clone)]
pub struct CollarField {
    collar: Arc<Collar>,
    modes: BTreeMap<i32, Vec<Complex64>>,
    bandwidth: i32,
    truncated: bool,
}

/// Pointwise operation selector for [`field_arith`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithOp {
    Add,
    Mul,
    Conj,
    Scale(Complex64),
}

/// Wirtinger derivative selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    Dz,
    DzBar,
}

impl CollarField {
    pub fn zero(collar: &Arc<Collar>) -> Self {
        Self { collar: collar.clone(), modes: BTreeMap::new(), bandwidth: DEFAULT_BANDWIDTH, truncated: false }
    }

    pub fn constant(collar: &Arc<Collar>, value: Complex64) -> Self {
        Self::from_mode(collar, 0, vec![value; collar.grid().len()])
    }

    /// Single-mode field `g(τ) e^{inθ}`.
    pub fn from_mode(collar: &Arc<Collar>, n: i32, profile: Vec<Complex64>) -> Self {
        assert_eq!(profile.len(), collar.grid().len(), "profile length must match the grid");
        let mut f = Self::zero(collar);
        f.bandwidth = f.bandwidth.max(n.abs());
        f.modes.insert(n, profile);
        f
    }

    /// Single-mode field with profile evaluated from `τ`.
    pub fn from_fn(collar: &Arc<Collar>, n: i32, g: impl Fn(f64) -> Complex64) -> Self {
        let p = collar.grid().nodes().iter().map(|&t| g(t)).collect();
        Self::from_mode(collar, n, p)
    }

    /// The field `z^k = r^k e^{ikθ}` (raw values).
    pub fn z_power(collar: &Arc<Collar>, k: i32) -> Self {
        let prof = collar.log_r().iter().map(|lr| Complex64::new((k as f64 * lr).exp(), 0.0)).collect();
        Self::from_mode(collar, k, prof)
    }

    pub fn collar(&self) -> &Arc<Collar> {
        &self.collar
    }

    pub fn bandwidth(&self) -> i32 {
        self.bandwidth
    }

    pub fn with_bandwidth(mut self, bandwidth: i32) -> Self {
        self.bandwidth = bandwidth.max(0);
        let bw = self.bandwidth;
        let before = self.modes.len();
        self.modes.retain(|n, _| n.abs() <= bw);
        self.truncated |= self.modes.len() != before;
        self
    }

    /// True when a product dropped modes beyond the bandwidth.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn mode(&self, n: i32) -> Option<&[Complex64]> {
        self.modes.get(&n).map(|v| v.as_slice())
    }

    pub fn modes(&self) -> impl Iterator<Item = (i32, &[Complex64])> {
        self.modes.iter().map(|(n, v)| (*n, v.as_slice()))
    }

    pub fn mode_indices(&self) -> Vec<i32> {
        self.modes.keys().copied().collect()
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.collar.same_grid(&other.collar) {
            Ok(())
        } else {
            Err(CollarError::GridMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut out = self.clone();
        out.bandwidth = self.bandwidth.max(other.bandwidth);
        out.truncated |= other.truncated;
        for (n, g) in &other.modes {
            match out.modes.get_mut(n) {
                Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
                None => {
                    out.modes.insert(*n, g.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product: angular modes convolve, profiles multiply.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = Self::zero(&self.collar);
        out.bandwidth = bw;
        out.truncated = self.truncated || other.truncated;
        for (n, g) in &self.modes {
            for (m, h) in &other.modes {
                let k = n + m;
                if k.abs() > bw {
                    out.truncated = true;
                    continue;
                }
                let acc = out.modes.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); g.len()]);
                acc.iter_mut().zip(g.iter().zip(h)).for_each(|(a, (x, y))| *a += x * y);
            }
        }
        Ok(out)
    }

    /// Complex conjugate: mode `n` maps to `−n` with conjugated profile.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.collar);
        out.bandwidth = self.bandwidth;
        out.truncated = self.truncated;
        for (n, g) in &self.modes {
            out.modes.insert(-n, g.iter().map(|v| v.conj()).collect());
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = self.clone();
        out.modes.values_mut().for_each(|g| g.iter_mut().for_each(|v| *v *= k));
        out
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    /// Multiplies every profile by a real radial function given at the nodes.
    pub fn mul_radial(&self, w: &[f64]) -> Self {
        let mut out = self.clone();
        out.modes.values_mut().for_each(|g| g.iter_mut().zip(w).for_each(|(v, x)| *v *= *x));
        out
    }

    /// Value at node `j` and angle `theta`.
    pub fn eval(&self, j: usize, theta: f64) -> Complex64 {
        self.modes.iter().map(|(n, g)| g[j] * Complex64::from_polar(1.0, *n as f64 * theta)).sum()
    }

    /// Sup of `|f|` over the grid nodes (and angular probes for multi-mode fields),
    /// optionally restricted to nodes with `lo ≤ τ ≤ hi`.
    pub fn sup_norm_in(&self, region: Option<(f64, f64)>) -> f64 {
        let nodes = self.collar.grid().nodes();
        let inside = |j: usize| region.map_or(true, |(lo, hi)| nodes[j] >= lo && nodes[j] <= hi);
        if self.modes.len() <= 1 {
            return self
                .modes
                .values()
                .flat_map(|g| g.iter().enumerate().filter(|(j, _)| inside(*j)).map(|(_, v)| v.norm()))
                .fold(0.0, f64::max);
        }
        let span = self.modes.keys().map(|n| n.abs()).max().unwrap_or(0) as usize;
        let probes = 8 * (span + 1);
        let mut best: f64 = 0.0;
        for j in (0..nodes.len()).filter(|j| inside(*j)) {
            for q in 0..probes {
                let th = 2.0 * std::f64::consts::PI * q as f64 / probes as f64;
                best = best.max(self.eval(j, th).norm());
            }
        }
        best
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_in(None)
    }

    /// Max deviation from the real-field symmetry `g_{−n} = conj(g_n)`.
    pub fn reality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (n, g) in &self.modes {
            match self.modes.get(&-n) {
                Some(h) => {
                    for (a, b) in g.iter().zip(h) {
                        d = d.max((a - b.conj()).norm());
                    }
                }
                None => d = d.max(g.iter().map(|v| v.norm()).fold(0.0, f64::max)),
            }
        }
        d
    }

    /// Drops modes whose profiles are identically below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.modes.retain(|_, g| g.iter().any(|v| v.norm() > tol));
        self
    }

    /// Largest sample-wise difference to `other` over all modes.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        let keys: std::collections::BTreeSet<i32> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        for n in keys {
            match (self.modes.get(&n), other.modes.get(&n)) {
                (Some(a), Some(b)) => a.iter().zip(b).for_each(|(x, y)| d = d.max((x - y).norm())),
                (Some(a), None) | (None, Some(a)) => a.iter().for_each(|x| d = d.max(x.norm())),
                (None, None) => {}
            }
        }
        d
    }

    pub(crate) fn flag_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub(crate) fn from_parts(collar: Arc<Collar>, modes: BTreeMap<i32, Vec<Complex64>>, bandwidth: i32) -> Self {
        Self { collar, modes, bandwidth, truncated: false }
    }
}

impl Add for &CollarField {
    type Output = CollarField;
    fn add(self, rhs: Self) -> CollarField {
        self.try_add(rhs).expect("grid mismatch")
    }
}

impl Sub for &CollarField {
    type Output = CollarField;
    fn sub(self, rhs: Self) -> CollarField {
        self.try_sub(rhs).expect("grid mismatch")
    }
}

impl Mul for &CollarField {
    type Output = CollarField;
    fn mul(self, rhs: Self) -> CollarField {
        self.try_mul(rhs).expect("grid mismatch")
    }
}

impl Neg for &CollarField {
    type Output = CollarField;
    fn neg(self) -> CollarField {
        self.scale_real(-1.0)
    }
}

/// Pointwise arithmetic; `b` is ignored for `Conj` and `Scale`.
pub fn field_arith(a: &CollarField, b: Option<&CollarField>, op: ArithOp) -> Result<CollarField> {
    let missing = || CollarError::InvalidSpec("binary operation needs two fields".into());
    match op {
        ArithOp::Add => a.try_add(b.ok_or_else(missing)?),
        ArithOp::Mul => a.try_mul(b.ok_or_else(missing)?),
        ArithOp::Conj => Ok(a.conj()),
        ArithOp::Scale(k) => Ok(a.scale(k)),
    }
}

/// Raw Wirtinger derivative `∂_z f` or `∂_z̄ f`.
pub fn wirtinger(f: &CollarField, which: Wirtinger) -> Result<CollarField> {
    check_resolved(f)?;
    let w = Weighted::from_field(f);
    let d = match which {
        Wirtinger::Dz => w.dz(),
        Wirtinger::DzBar => w.dzbar(),
    };
    Ok(d.into_field())
}

/// Rejects profiles whose sixth difference in the grid index is comparable to
/// their size, i.e. features at the grid scale. Modes below `1e-9` of the
/// field's largest mode are roundoff carriers and are skipped.
pub fn check_resolved(f: &CollarField) -> Result<()> {
    let sup_of = |g: &[Complex64]| g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let field_scale = f.modes().map(|(_, g)| sup_of(g)).fold(0.0, f64::max);
    for (n, g) in f.modes() {
        let scale = sup_of(g);
        if scale == 0.0 || scale <= 1e-9 * field_scale {
            continue;
        }
        let worst = g
            .windows(7)
            .map(|w| (w[0] - w[1] * 6.0 + w[2] * 15.0 - w[3] * 20.0 + w[4] * 15.0 - w[5] * 6.0 + w[6]).norm())
            .fold(0.0, f64::max);
        if worst > 1e-3 * scale {
            return Err(CollarError::UnderResolved(format!("mode {n}: sixth difference {:.2e} of sup {:.2e}", worst, scale)));
        }
    }
    Ok(())
}

/// A field multiplied by an explicit power of `r`: the value is `r^rpow · Σ g_n e^{inθ}`.
///
/// Operators chain Wirtinger derivatives and metric factors here so that finite
/// differences only ever act on `r`-free profiles.
#[derive(Debug, Clone)]
pub(crate) struct Weighted {
    pub collar: Arc<Collar>,
    pub modes: BTreeMap<i32, Vec<Complex64>>,
    pub rpow: i32,
    pub bandwidth: i32,
}

impl Weighted {
    pub fn from_field(f: &CollarField) -> Self {
        Self { collar: f.collar.clone(), modes: f.modes.clone(), rpow: 0, bandwidth: f.bandwidth }
    }

    fn map_modes(&self, shift: i32, drpow: i32, op: impl Fn(i32, &[Complex64]) -> Vec<Complex64>) -> Self {
        let modes = self.modes.iter().map(|(n, g)| (n + shift, op(*n, g))).collect();
        Self { collar: self.collar.clone(), modes, rpow: self.rpow + drpow, bandwidth: self.bandwidth }
    }

    /// `∂_z(r^w g e^{inθ}) = r^{w−1} e^{i(n−1)θ} (u g' + (w + n) g)/2`.
    pub fn dz(&self) -> Self {
        let u = self.collar.u();
        let w = self.rpow;
        self.map_modes(-1, -1, |n, g| {
            let d = self.collar.grid().d_tau(g);
            let k = (w + n) as f64;
            d.iter().zip(g).map(|(dg, v)| (dg * u + v * k) * 0.5).collect()
        })
    }

    /// `∂_z̄(r^w g e^{inθ}) = r^{w−1} e^{i(n+1)θ} (u g' + (w − n) g)/2`.
    pub fn dzbar(&self) -> Self {
        let u = self.collar.u();
        let w = self.rpow;
        self.map_modes(1, -1, |n, g| {
            let d = self.collar.grid().d_tau(g);
            let k = (w - n) as f64;
            d.iter().zip(g).map(|(dg, v)| (dg * u + v * k) * 0.5).collect()
        })
    }

    fn mul_node_factor(&self, drpow: i32, fac: impl Fn(usize) -> f64) -> Self {
        self.map_modes(0, drpow, |_, g| g.iter().enumerate().map(|(j, v)| v * fac(j)).collect())
    }

    /// Times `λ⁻¹ = r² · 2 sin²τ/u²`.
    pub fn mul_lambda_inv(&self) -> Self {
        let u = self.collar.u();
        let s = self.collar.sin_tau().to_vec();
        self.mul_node_factor(2, |j| 2.0 * s[j] * s[j] / (u * u))
    }

    /// Times `λ = r⁻² · u²/(2 sin²τ)`.
    #[cfg(test)]
    pub fn mul_lambda(&self) -> Self {
        let u = self.collar.u();
        let s = self.collar.sin_tau().to_vec();
        self.mul_node_factor(-2, |j| u * u / (2.0 * s[j] * s[j]))
    }

    /// Times `ρ_conf^k` with `ρ_conf = λ^{1/2} = r⁻¹ · u/(√2 |sin τ|)`.
    pub fn mul_rho_pow(&self, k: i32) -> Self {
        let u = self.collar.u();
        let s = self.collar.sin_tau().to_vec();
        self.mul_node_factor(-k, |j| (u / (SQRT_2 * s[j].abs())).powi(k))
    }

    /// Product with another weighted field (weights add, modes convolve).
    pub fn mul(&self, other: &Self) -> Self {
        let mut modes: BTreeMap<i32, Vec<Complex64>> = BTreeMap::new();
        for (n, g) in &self.modes {
            for (m, h) in &other.modes {
                let k = n + m;
                let acc = modes.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); g.len()]);
                acc.iter_mut().zip(g.iter().zip(h)).for_each(|(a, (x, y))| *a += x * y);
            }
        }
        Self { collar: self.collar.clone(), modes, rpow: self.rpow + other.rpow, bandwidth: self.bandwidth.max(other.bandwidth) }
    }

    pub fn mul_field(&self, f: &CollarField) -> Self {
        self.mul(&Self::from_field(f))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        self.map_modes(0, 0, |_, g| g.iter().map(|v| v * k).collect())
    }

    /// Sum of two fields carrying the same power of `r`.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rpow, other.rpow, "adding fields with different r-weights");
        let mut out = self.clone();
        for (n, g) in &other.modes {
            match out.modes.get_mut(n) {
                Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
                None => {
                    out.modes.insert(*n, g.clone());
                }
            }
        }
        out.bandwidth = out.bandwidth.max(other.bandwidth);
        out
    }

    pub fn conj(&self) -> Self {
        let modes = self.modes.iter().map(|(n, g)| (-n, g.iter().map(|v| v.conj()).collect())).collect();
        Self { collar: self.collar.clone(), modes, rpow: self.rpow, bandwidth: self.bandwidth }
    }

    /// Converts to a raw field, multiplying by `r^rpow` when it is nonzero.
    pub fn into_field(self) -> CollarField {
        let bw = self.modes.keys().map(|n| n.abs()).max().unwrap_or(0).max(self.bandwidth);
        if self.rpow == 0 {
            return CollarField::from_parts(self.collar, self.modes, bw);
        }
        let p = self.rpow as f64;
        let fac: Vec<f64> = self.collar.log_r().iter().map(|lr| (p * lr).exp()).collect();
        let modes = self
            .modes
            .into_iter()
            .map(|(n, g)| (n, g.iter().zip(&fac).map(|(v, f)| v * f).collect()))
            .collect();
        CollarField::from_parts(self.collar, modes, bw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::CollarParams;

    fn collar(u: f64, n: usize) -> Arc<Collar> {
        Collar::new(CollarParams::from_u(u, 0.5).unwrap(), n).unwrap()
    }

    #[test]
    fn mode_cancellation_in_products() {
        let c = collar(0.1, 256);
        let g = CollarField::from_fn(&c, 1, |t| Complex64::new(t.sin(), 0.0));
        let h = CollarField::from_fn(&c, -1, |t| Complex64::new(t.cos(), 1.0));
        let p = &g * &h;
        assert_eq!(p.mode_indices(), vec![0]);
        let prof = p.mode(0).unwrap();
        for (j, t) in c.grid().nodes().iter().enumerate() {
            assert!((prof[j] - Complex64::new(t.sin() * t.cos(), t.sin())).norm() < 1e-15);
        }
    }

    #[test]
    fn conj_is_involution() {
        let c = collar(0.1, 256);
        let g = CollarField::from_fn(&c, 3, |t| Complex64::new(t.sin(), t.cos()));
        assert_eq!(g.conj().conj().max_diff(&g), 0.0);
    }

    #[test]
    fn dz_of_z_is_one_and_dzbar_is_zero() {
        let c = collar(0.1, 1024);
        let z = CollarField::z_power(&c, 1);
        let dz = wirtinger(&z, Wirtinger::Dz).unwrap();
        assert_eq!(dz.mode_indices(), vec![0]);
        assert!(dz.mode(0).unwrap().iter().all(|v| (v - 1.0).norm() < 1e-9));
        let dzb = wirtinger(&z, Wirtinger::DzBar).unwrap();
        assert!(dzb.sup_norm() < 1e-9);
    }

    #[test]
    fn mixed_derivative_of_modulus_squared() {
        let c = collar(0.1, 1024);
        let z = CollarField::z_power(&c, 1);
        let zz = &z * &z.conj();
        let d = wirtinger(&wirtinger(&zz, Wirtinger::DzBar).unwrap(), Wirtinger::Dz).unwrap();
        let err = d.mode(0).unwrap().iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn bandwidth_truncation_is_flagged() {
        let c = collar(0.1, 256);
        let g = CollarField::from_fn(&c, 6, |_| Complex64::new(1.0, 0.0)).with_bandwidth(8);
        let p = &g * &g;
        assert!(p.truncated());
        assert!(p.mode(12).is_none());
    }
}
