//! Harmonic Beltrami differentials and holomorphic quadratic differentials on
//! collars from Laurent data, and the Weil–Petersson metric and cometric.
//!
//! Index `i < m` (with `m` the number of collars) is the pinching direction of
//! collar `i`; indices `m..n` are nondegenerate directions. All coefficient data
//! is stored in the normalized units described at the crate root.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collar::{volume_integral, Collar};
use crate::error::{CollarError, Result};
use crate::fields::{CollarField, Weighted, DEFAULT_BANDWIDTH};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How an index relates to the collar a coefficient lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCase {
    /// The pinching index of this very collar.
    Diagonal,
    /// Another pinching index.
    Degenerate,
    /// A nondegenerate index.
    Nondegenerate,
}

impl PairCase {
    pub fn of(i: usize, j: usize, m: usize) -> Self {
        if i >= m {
            Self::Nondegenerate
        } else if i == j {
            Self::Diagonal
        } else {
            Self::Degenerate
        }
    }
}

/// Laurent data `(a_k, b)` of one `A_i` on one collar, in normalized units
/// (multiplied by `σ_i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltramiSpec {
    pub case: PairCase,
    /// `(k, a_k)` with `k ≠ 0`.
    #[serde(default)]
    pub laurent: Vec<(i32, Complex64)>,
    pub b: Complex64,
}

/// Laurent data `(α_k, β)` of one `φ_i` on one collar, in normalized units
/// (divided by `σ_i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadDiffSpec {
    pub case: PairCase,
    #[serde(default)]
    pub laurent: Vec<(i32, Complex64)>,
    pub beta: Complex64,
}

/// Constants of the coefficient bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub m: f64,
}

impl Default for CoefficientBounds {
    fn default() -> Self {
        Self { m: 10.0 }
    }
}

fn laurent_sums(terms: &[(i32, Complex64)], c: f64) -> (f64, f64) {
    let neg = terms.iter().filter(|(k, _)| *k < 0).map(|(k, a)| a.norm() * c.powi(-k)).sum();
    let pos = terms.iter().filter(|(k, _)| *k > 0).map(|(k, a)| a.norm() * c.powi(*k)).sum();
    (neg, pos)
}

impl BeltramiSpec {
    /// Diagonal model: `p = 0`, `b = −u/(π t̄)`, i.e. normalized `−u e^{i arg t}/π`.
    pub fn pure(collar: &Collar) -> Self {
        Self { case: PairCase::Diagonal, laurent: Vec::new(), b: collar.params().t_phase() * (-collar.u() / PI) }
    }

    /// Off-diagonal default: `b = κ u_j u_i³/|t_i|` for a pinching index `i`
    /// (normalized `κ u_j u_i³`), `b = κ u_j` for a nondegenerate one.
    pub fn coupling(case: PairCase, kappa: f64, u_host: f64, u_index: f64) -> Self {
        let b = match case {
            PairCase::Degenerate => kappa * u_host * u_index.powi(3),
            _ => kappa * u_host,
        };
        Self { case, laurent: Vec::new(), b: Complex64::new(b, 0.0) }
    }

    pub fn zero(case: PairCase) -> Self {
        Self { case, laurent: Vec::new(), b: ZERO }
    }

    /// Checks the coefficient-sum bounds for an index of width `u_index` (unused
    /// for nondegenerate indices) on a collar of width `u_host` with cut `c`.
    pub fn validate(&self, bounds: CoefficientBounds, u_host: f64, u_index: f64, c: f64) -> Result<()> {
        let m = bounds.m;
        let (neg, pos) = laurent_sums(&self.laurent, c);
        if self.laurent.iter().any(|(k, _)| *k == 0) {
            return Err(CollarError::InvalidSpec("Laurent index 0 is carried by b".into()));
        }
        let (sum_cap, b_ok) = match self.case {
            PairCase::Diagonal => {
                let model = u_host / PI;
                (m * u_host, (self.b.norm() / model - 1.0).abs() <= m * u_host)
            }
            PairCase::Degenerate => (m * u_index.powi(3) / (u_host * u_host), self.b.norm() <= m * u_host * u_index.powi(3)),
            PairCase::Nondegenerate => (m / (u_host * u_host), self.b.norm() <= m * u_host),
        };
        if neg > sum_cap || pos > sum_cap {
            return Err(CollarError::CoefficientBound(format!("{:?} Laurent sums ({neg:.3e}, {pos:.3e}) exceed {sum_cap:.3e}", self.case)));
        }
        if !b_ok {
            return Err(CollarError::CoefficientBound(format!("{:?} constant term |b| = {:.3e} out of range", self.case, self.b.norm())));
        }
        Ok(())
    }

    pub fn max_order(&self) -> i32 {
        self.laurent.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }
}

impl QuadDiffSpec {
    /// Diagonal model `q = 0`, `β = 1`.
    pub fn pure() -> Self {
        Self { case: PairCase::Diagonal, laurent: Vec::new(), beta: Complex64::new(1.0, 0.0) }
    }

    pub fn zero(case: PairCase) -> Self {
        Self { case, laurent: Vec::new(), beta: ZERO }
    }

    pub fn validate(&self, bounds: CoefficientBounds, c: f64) -> Result<()> {
        let (neg, pos) = laurent_sums(&self.laurent, c);
        if self.laurent.iter().any(|(k, _)| *k == 0) {
            return Err(CollarError::InvalidSpec("Laurent index 0 is carried by beta".into()));
        }
        if neg > bounds.m || pos > bounds.m {
            return Err(CollarError::CoefficientBound(format!("Laurent sums ({neg:.3e}, {pos:.3e}) exceed M = {}", bounds.m)));
        }
        Ok(())
    }

    pub fn max_order(&self) -> i32 {
        self.laurent.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }
}

/// `σ_i`: `|t_i|` for pinching indices, `1` otherwise.
pub fn index_scales(collars: &[Arc<Collar>], n: usize) -> Vec<f64> {
    (0..n).map(|i| collars.get(i).map_or(1.0, |c| c.params().t_abs())).collect()
}

fn bandwidth_for(max_order: i32) -> i32 {
    (2 * max_order + DEFAULT_BANDWIDTH).max(DEFAULT_BANDWIDTH)
}

/// Beltrami data for `n` indices on `m` collars: `specs[i][j]` lives on collar `j`.
#[derive(Debug, Clone)]
pub struct BeltramiSet {
    pub collars: Vec<Arc<Collar>>,
    pub specs: Vec<Vec<BeltramiSpec>>,
    /// WP metric contribution of the compact part for nondegenerate indices
    /// (`(n − m)²` block); zero contribution elsewhere.
    pub compact_block: Option<DMatrix<Complex64>>,
}

impl BeltramiSet {
    /// The pure model on each collar, with off-diagonal couplings `κ`.
    pub fn model(collars: Vec<Arc<Collar>>, n: usize, kappa: f64, compact_scale: f64) -> Self {
        let m = collars.len();
        let specs = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| match PairCase::of(i, j, m) {
                        PairCase::Diagonal => BeltramiSpec::pure(&collars[j]),
                        case => {
                            let u_index = collars.get(i).map_or(1.0, |c| c.u());
                            BeltramiSpec::coupling(case, kappa, collars[j].u(), u_index)
                        }
                    })
                    .collect()
            })
            .collect();
        let compact_block = (n > m).then(|| DMatrix::identity(n - m, n - m) * Complex64::new(compact_scale, 0.0));
        Self { collars, specs, compact_block }
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn collar_count(&self) -> usize {
        self.collars.len()
    }

    pub fn scales(&self) -> Vec<f64> {
        index_scales(&self.collars, self.dim())
    }

    pub fn bandwidth(&self) -> i32 {
        bandwidth_for(self.specs.iter().flatten().map(BeltramiSpec::max_order).max().unwrap_or(0))
    }

    pub fn validate(&self, bounds: CoefficientBounds) -> Result<()> {
        let m = self.collar_count();
        for (i, row) in self.specs.iter().enumerate() {
            if row.len() != m {
                return Err(CollarError::InvalidSpec(format!("index {i} has {} collar specs, expected {m}", row.len())));
            }
            for (j, s) in row.iter().enumerate() {
                if s.case != PairCase::of(i, j, m) {
                    return Err(CollarError::InvalidSpec(format!("spec ({i}, {j}) tagged {:?}", s.case)));
                }
                let u_index = self.collars.get(i).map_or(1.0, |c| c.u());
                s.validate(bounds, self.collars[j].u(), u_index, self.collars[j].params().cut())?;
            }
        }
        if let Some(b) = &self.compact_block {
            if b.nrows() != self.dim() - m || b.ncols() != self.dim() - m {
                return Err(CollarError::InvalidSpec("compact block has the wrong size".into()));
            }
        }
        Ok(())
    }
}

/// Quadratic-differential data, laid out like [`BeltramiSet`].
#[derive(Debug, Clone)]
pub struct QuadDiffSet {
    pub collars: Vec<Arc<Collar>>,
    pub specs: Vec<Vec<QuadDiffSpec>>,
    /// Cometric contribution of the compact part for nondegenerate indices.
    pub compact_block: Option<DMatrix<Complex64>>,
}

impl QuadDiffSet {
    /// Pure diagonal data, zero off-diagonal data.
    pub fn model(collars: Vec<Arc<Collar>>, n: usize, compact_scale: f64) -> Self {
        let m = collars.len();
        let specs = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| match PairCase::of(i, j, m) {
                        PairCase::Diagonal => QuadDiffSpec::pure(),
                        case => QuadDiffSpec::zero(case),
                    })
                    .collect()
            })
            .collect();
        let compact_block = (n > m).then(|| DMatrix::identity(n - m, n - m) * Complex64::new(compact_scale, 0.0));
        Self { collars, specs, compact_block }
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn scales(&self) -> Vec<f64> {
        index_scales(&self.collars, self.dim())
    }

    pub fn bandwidth(&self) -> i32 {
        bandwidth_for(self.specs.iter().flatten().map(QuadDiffSpec::max_order).max().unwrap_or(0))
    }

    pub fn validate(&self, bounds: CoefficientBounds) -> Result<()> {
        let m = self.collars.len();
        for (i, row) in self.specs.iter().enumerate() {
            if row.len() != m {
                return Err(CollarError::InvalidSpec(format!("index {i} has {} collar specs, expected {m}", row.len())));
            }
            for (j, s) in row.iter().enumerate() {
                if s.case != PairCase::of(i, j, m) {
                    return Err(CollarError::InvalidSpec(format!("spec ({i}, {j}) tagged {:?}", s.case)));
                }
                s.validate(bounds, self.collars[j].params().cut())?;
            }
        }
        Ok(())
    }
}

fn check_pair(dim: usize, m: usize, i: usize, j: usize) -> Result<()> {
    if i >= dim {
        return Err(CollarError::IndexOutOfRange { index: i, dim });
    }
    if j >= m {
        return Err(CollarError::IndexOutOfRange { index: j, dim: m });
    }
    Ok(())
}

/// Profile `r^k` for `k ≥ 1` and `(ρ/r)^{|k|}` for `k ≤ −1` at the nodes.
fn laurent_radial(collar: &Collar, k: i32) -> Vec<f64> {
    let u = collar.u();
    collar
        .grid()
        .nodes()
        .iter()
        .map(|t| if k > 0 { (k as f64 * t / u).exp() } else { (-(k.abs() as f64) * (t + PI) / u).exp() })
        .collect()
}

fn add_mode(acc: &mut std::collections::BTreeMap<i32, Vec<Complex64>>, n: i32, prof: Vec<Complex64>) {
    match acc.get_mut(&n) {
        Some(v) => v.iter_mut().zip(prof).for_each(|(a, b)| *a += b),
        None => {
            acc.insert(n, prof);
        }
    }
}

/// `A_i` on collar `j`: `(z/z̄) sin²τ (p̄ + b̄)`.
pub fn beltrami_field(set: &BeltramiSet, i: usize, j: usize) -> Result<CollarField> {
    check_pair(set.dim(), set.collar_count(), i, j)?;
    let collar = &set.collars[j];
    let spec = &set.specs[i][j];
    let s2: Vec<f64> = collar.sin_tau().iter().map(|s| s * s).collect();
    let mut modes = std::collections::BTreeMap::new();
    if spec.b != ZERO {
        add_mode(&mut modes, 2, s2.iter().map(|v| spec.b.conj() * *v).collect());
    }
    for (k, a) in &spec.laurent {
        let rad = laurent_radial(collar, *k);
        add_mode(&mut modes, 2 - k, s2.iter().zip(&rad).map(|(v, r)| a.conj() * (v * r)).collect());
    }
    Ok(CollarField::from_parts(collar.clone(), modes, set.bandwidth()))
}

/// `φ_i` on collar `j` as `r⁻²` times an `r`-bounded remainder.
fn qdiff_weighted(set: &QuadDiffSet, i: usize, j: usize) -> Weighted {
    let m = set.collars.len();
    let collar = &set.collars[j];
    let spec = &set.specs[i][j];
    let prefactor = if i < m { set.collars[i].params().t_phase() * (-1.0 / PI) } else { Complex64::new(1.0, 0.0) };
    let len = collar.grid().len();
    let mut modes = std::collections::BTreeMap::new();
    if spec.beta != ZERO {
        add_mode(&mut modes, -2, vec![prefactor * spec.beta; len]);
    }
    let host_phase = collar.params().t_phase();
    for (k, a) in &spec.laurent {
        // t_j^{|k|} z^k = e^{i|k| arg t_j} (ρ/r)^{|k|} e^{ikθ} for k < 0
        let coeff = if *k < 0 { prefactor * a * host_phase.powi(k.abs()) } else { prefactor * a };
        let rad = laurent_radial(collar, *k);
        add_mode(&mut modes, k - 2, rad.iter().map(|r| coeff * *r).collect());
    }
    Weighted { collar: collar.clone(), modes, rpow: -2, bandwidth: set.bandwidth() }
}

/// `φ_i` on collar `j`: `prefactor · z⁻² (q + β)` (raw values).
pub fn qdiff_field(set: &QuadDiffSet, i: usize, j: usize) -> Result<CollarField> {
    check_pair(set.dim(), set.collars.len(), i, j)?;
    Ok(qdiff_weighted(set, i, j).into_field())
}

/// Which metric a [`MetricMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Wp,
    WpCometric,
    Ricci,
    PerturbedRicci,
}

impl MetricKind {
    fn is_cometric(self) -> bool {
        matches!(self, Self::WpCometric)
    }
}

/// Hermitian matrix with normalized entries: a metric entry `g_{ij̄}` is stored
/// as `σ_i σ_j g_{ij̄}`, a cometric entry as `g^{ij̄}/(σ_i σ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub kind: MetricKind,
    pub entries: DMatrix<Complex64>,
    pub scales: Vec<f64>,
}

impl MetricMatrix {
    pub fn new(kind: MetricKind, entries: DMatrix<Complex64>, scales: Vec<f64>) -> Self {
        Self { kind, entries, scales }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Largest `|g_{ij̄} − conj(g_{jī})|` relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale
    }

    pub fn check_hermitian(&self, tolerance: f64) -> Result<()> {
        let deviation = self.hermitian_defect();
        if deviation > tolerance {
            Err(CollarError::NotHermitian { deviation, tolerance })
        } else {
            Ok(())
        }
    }

    /// The Hermitian part `(G + G*)/2`.
    pub fn symmetrized(&self) -> Self {
        let e = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        Self { kind: self.kind, entries: e, scales: self.scales.clone() }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.dim() > 0 && self.symmetrized().entries.cholesky().is_some()
    }

    pub fn check_positive_definite(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(CollarError::NotPositiveDefinite(format!("{:?}", self.kind)))
        }
    }

    /// Inverse of the Hermitian part, in the dual normalization.
    pub fn inverse(&self) -> Result<DMatrix<Complex64>> {
        let h = self.symmetrized().entries;
        match h.clone().cholesky() {
            Some(ch) => Ok(ch.inverse()),
            None => h.try_inverse().ok_or_else(|| CollarError::Singular(format!("{:?}", self.kind))),
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.symmetrized().entries.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Entry in physical units (may overflow for tiny `|t|`).
    pub fn physical(&self, i: usize, j: usize) -> Complex64 {
        let s = self.scales[i] * self.scales[j];
        if self.kind.is_cometric() {
            self.get(i, j) * s
        } else {
            self.get(i, j) / s
        }
    }
}

/// `h_{ij̄} = Σ_collars ∫ A_i Ā_j dv`, plus the compact block.
pub fn wp_metric(set: &BeltramiSet) -> Result<MetricMatrix> {
    let n = set.dim();
    let m = set.collar_count();
    let fields: Vec<Vec<CollarField>> = (0..n).map(|i| (0..m).map(|j| beltrami_field(set, i, j)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let mut h = DMatrix::from_element(n, n, ZERO);
    for a in 0..n {
        for b in a..n {
            let v: Complex64 = (0..m).map(|j| fields[a][j].try_mul(&fields[b][j].conj()).map(|p| volume_integral(&p))).sum::<Result<Complex64>>()?;
            h[(a, b)] = v;
            h[(b, a)] = v.conj();
        }
    }
    if let Some(block) = &set.compact_block {
        for a in m..n {
            for b in m..n {
                h[(a, b)] += block[(a - m, b - m)];
            }
        }
    }
    let out = MetricMatrix::new(MetricKind::Wp, h, set.scales());
    out.check_hermitian(1e-12)?;
    Ok(out)
}

/// `h^{ij̄} = Σ_collars ∫ φ_i φ̄_j λ⁻² dv`, plus the compact block.
pub fn wp_cometric(set: &QuadDiffSet) -> Result<MetricMatrix> {
    let n = set.dim();
    let m = set.collars.len();
    let phis: Vec<Vec<Weighted>> = (0..n).map(|i| (0..m).map(|j| qdiff_weighted(set, i, j)).collect()).collect();
    let mut h = DMatrix::from_element(n, n, ZERO);
    for a in 0..n {
        for b in a..n {
            let v: Complex64 = (0..m)
                .map(|j| {
                    let p = phis[a][j].mul(&phis[b][j].conj()).mul_lambda_inv().mul_lambda_inv().into_field();
                    volume_integral(&p)
                })
                .sum();
            h[(a, b)] = v;
            h[(b, a)] = v.conj();
        }
    }
    if let Some(block) = &set.compact_block {
        for a in m..n {
            for b in m..n {
                h[(a, b)] += block[(a - m, b - m)];
            }
        }
    }
    let out = MetricMatrix::new(MetricKind::WpCometric, h, set.scales());
    if !out.is_positive_definite() {
        return Err(CollarError::Singular("WP cometric is not positive definite".into()));
    }
    Ok(out)
}

/// Sup-norm distance between `λ⁻¹ Σ_l h_{il̄} φ̄_l` and `A_i`, per index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// `max_j ‖A_i^dual − A_i‖₀ / max_j ‖A_i‖₀` for each `i` (absolute when `A_i = 0`).
    pub relative_distance: Vec<f64>,
    /// `max_j ‖A_i^dual‖₀`.
    pub dual_norm: Vec<f64>,
}

pub fn duality_check(qset: &QuadDiffSet, bset: &BeltramiSet, h: &MetricMatrix) -> Result<DualityReport> {
    let n = bset.dim();
    let m = bset.collar_count();
    if qset.dim() != n || h.dim() != n || qset.collars.len() != m {
        return Err(CollarError::InvalidSpec("duality check needs matching index sets".into()));
    }
    let mut relative_distance = Vec::with_capacity(n);
    let mut dual_norm = Vec::with_capacity(n);
    for i in 0..n {
        let (mut dist, mut norm, mut dnorm) = (0.0f64, 0.0f64, 0.0f64);
        for j in 0..m {
            let mut acc: Option<Weighted> = None;
            for l in 0..n {
                let term = qdiff_weighted(qset, l, j).conj().mul_lambda_inv().scale(h.get(i, l));
                acc = Some(match acc {
                    Some(a) => a.add(&term),
                    None => term,
                });
            }
            let dual = acc.map(Weighted::into_field).unwrap_or_else(|| CollarField::zero(&bset.collars[j]));
            let a = beltrami_field(bset, i, j)?;
            dist = dist.max(dual.try_sub(&a)?.sup_norm());
            norm = norm.max(a.sup_norm());
            dnorm = dnorm.max(dual.sup_norm());
        }
        relative_distance.push(if norm > 0.0 { dist / norm } else { dist });
        dual_norm.push(dnorm);
    }
    Ok(DualityReport { relative_distance, dual_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::CollarParams;

    fn collar(u: f64, n: usize) -> Arc<Collar> {
        Collar::new(CollarParams::from_u(u, 0.5).unwrap(), n).unwrap()
    }

    /// `πu ∫ sin^p τ csc²τ dτ` over the collar interval via antiderivatives.
    fn sin_moment(u: f64, c: f64, p: i32) -> f64 {
        let l = (1.0 / c).ln();
        let (a, b) = (-PI + u * l, -u * l);
        let anti = |t: f64| match p {
            2 => t,
            4 => t / 2.0 - (2.0 * t).sin() / 4.0,
            _ => unreachable!(),
        };
        PI * u * (anti(b) - anti(a))
    }

    #[test]
    fn pure_cometric_matches_closed_form() {
        let c = collar(0.1, 2048);
        let q = QuadDiffSet::model(vec![c], 1, 1.0);
        let h = wp_cometric(&q).unwrap();
        // |φ|² λ⁻² = 4 sin⁴τ/(π² u⁴)
        let exact = 4.0 / (PI * PI * 0.1f64.powi(4)) * sin_moment(0.1, 0.5, 4);
        assert!((h.get(0, 0).re / exact - 1.0).abs() < 1e-10);
        assert!((h.get(0, 0).re / 1999.7 - 1.0).abs() < 1e-4, "{}", h.get(0, 0));
    }

    #[test]
    fn pure_metric_matches_closed_form() {
        let c = collar(0.05, 2048);
        let b = BeltramiSet::model(vec![c], 1, 0.0, 1.0);
        b.validate(CoefficientBounds::default()).unwrap();
        let h = wp_metric(&b).unwrap();
        let exact = (0.05 / PI).powi(2) * sin_moment(0.05, 0.5, 4);
        assert!((h.get(0, 0).re / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_specs_give_zero_or_singular() {
        let c = collar(0.1, 512);
        let mut q = QuadDiffSet::model(vec![c.clone()], 1, 1.0);
        q.specs[0][0] = QuadDiffSpec::zero(PairCase::Diagonal);
        assert!(matches!(wp_cometric(&q), Err(CollarError::Singular(_))));
        assert!(qdiff_field(&q, 0, 0).unwrap().sup_norm() == 0.0);
        let mut b = BeltramiSet::model(vec![c], 1, 0.0, 1.0);
        b.specs[0][0] = BeltramiSpec::zero(PairCase::Diagonal);
        assert_eq!(wp_metric(&b).unwrap().get(0, 0), ZERO);
    }

    #[test]
    fn qdiff_with_positive_laurent_term_matches_pointwise() {
        let c = collar(0.1, 512);
        let mut q = QuadDiffSet::model(vec![c.clone()], 1, 1.0);
        q.specs[0][0].laurent = vec![(1, Complex64::new(1.0, 0.0))];
        let phi = qdiff_field(&q, 0, 0).unwrap();
        assert_eq!(phi.mode_indices(), vec![-2, -1]);
        let t = c.params().t();
        for (j, tau) in c.grid().nodes().iter().enumerate().step_by(37) {
            let theta = 0.3 + j as f64 * 0.01;
            let z = Complex64::from_polar((tau / 0.1).exp(), theta);
            // normalized: divided by |t|
            let direct = -(t / t.norm()) / PI / (z * z) * (z + 1.0);
            assert!((phi.eval(j, theta) - direct).norm() <= 1e-12 * direct.norm());
        }
    }

    #[test]
    fn beltrami_sup_and_harmonicity() {
        let u = 0.05;
        let c = collar(u, 2048);
        let b = BeltramiSet::model(vec![c.clone()], 1, 0.0, 1.0);
        let a = beltrami_field(&b, 0, 0).unwrap();
        assert!((a.sup_norm() / (u / PI) - 1.0).abs() < 1e-6);
        // λA = (u²/2) b̄ z̄⁻²: anti-holomorphic; compare the r-free profiles
        let la = Weighted::from_field(&a).mul_lambda();
        let d = la.dz();
        let sup = |w: &Weighted| w.modes.values().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((sup(&la) / (u * u * u / (2.0 * PI)) - 1.0).abs() < 1e-12);
        assert!(sup(&d) <= 1e-8 * sup(&la), "{}", sup(&d));
    }

    #[test]
    fn dual_pair_and_doubled_b() {
        let u = 0.05;
        let c = collar(u, 2048);
        let q = QuadDiffSet::model(vec![c.clone()], 1, 1.0);
        let b = BeltramiSet::model(vec![c], 1, 0.0, 1.0);
        let h = wp_metric(&b).unwrap();
        let rep = duality_check(&q, &b, &h).unwrap();
        assert!(rep.relative_distance[0] < 3.0 * u, "{rep:?}");
        let mut doubled = b.clone();
        doubled.specs[0][0].b *= 2.0;
        let rep2 = duality_check(&q, &doubled, &h).unwrap();
        assert!((rep2.relative_distance[0] - 0.5).abs() < 3.0 * u, "{rep2:?}");
    }

    #[test]
    fn metric_times_cometric_is_near_identity() {
        let u = 0.025;
        let c = collar(u, 2048);
        let h = wp_metric(&BeltramiSet::model(vec![c.clone()], 1, 0.0, 1.0)).unwrap();
        let g = wp_cometric(&QuadDiffSet::model(vec![c], 1, 1.0)).unwrap();
        let p = (&h.entries * &g.entries)[(0, 0)];
        assert!((p.re - 1.0).abs() < 3.0 * u, "{p}");
    }

    #[test]
    fn bounds_reject_large_couplings() {
        let s = BeltramiSpec::coupling(PairCase::Degenerate, 100.0, 0.1, 0.1);
        assert!(s.validate(CoefficientBounds::default(), 0.1, 0.1, 0.5).is_err());
        let s = BeltramiSpec::coupling(PairCase::Degenerate, 1.0, 0.1, 0.1);
        assert!(s.validate(CoefficientBounds::default(), 0.1, 0.1, 0.5).is_ok());
    }
}
