//! Differential operators on collar fields: Maass operators, `P`, `□`, the
//! commutator `ξ`, the second-order operator `Q`, `Cᵏ` norms and the index
//! symmetrizers used by the curvature formula.
//!
//! The conformal factor of the Maass operators is `ρ_conf = λ^{1/2}`, so that
//! `P = K₁K₀`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collar::volume_integral;
use crate::error::{CollarError, Result};
use crate::fields::{check_resolved, CollarField, Weighted};

/// Maass operator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Maass {
    /// `K_p(f) = ρ^{p−1} ∂_z(ρ^{−p} f)`, raising the weight.
    K,
    /// `L_p(f) = ρ^{−p−1} ∂_z̄(ρ^{p} f)`, lowering the weight.
    L,
}

fn same_collar(a: &CollarField, b: &CollarField) -> Result<()> {
    if a.collar().same_grid(b.collar()) {
        Ok(())
    } else {
        Err(CollarError::GridMismatch)
    }
}

pub fn maass(p: i32, f: &CollarField, which: Maass) -> Result<CollarField> {
    check_resolved(f)?;
    Ok(maass_weighted(p, &Weighted::from_field(f), which).into_field())
}

fn maass_weighted(p: i32, w: &Weighted, which: Maass) -> Weighted {
    match which {
        Maass::K => w.mul_rho_pow(-p).dz().mul_rho_pow(p - 1),
        Maass::L => w.mul_rho_pow(p).dzbar().mul_rho_pow(-p - 1),
    }
}

/// `K₀ f = ρ⁻¹ ∂_z f`.
pub fn k0(f: &CollarField) -> Result<CollarField> {
    maass(0, f, Maass::K)
}

/// `K̄₀ f = ρ⁻¹ ∂_z̄ f` (equal to `L₀ f`).
pub fn k0_bar(f: &CollarField) -> Result<CollarField> {
    maass(0, f, Maass::L)
}

/// `P(f) = ∂_z(λ⁻¹ ∂_z f)`.
pub fn op_p(f: &CollarField) -> Result<CollarField> {
    check_resolved(f)?;
    Ok(Weighted::from_field(f).dz().mul_lambda_inv().dz().into_field())
}

/// `P̄(f) = ∂_z̄(λ⁻¹ ∂_z̄ f)`.
pub fn op_p_bar(f: &CollarField) -> Result<CollarField> {
    check_resolved(f)?;
    Ok(Weighted::from_field(f).dzbar().mul_lambda_inv().dzbar().into_field())
}

/// `□f = −λ⁻¹ ∂_z∂_z̄ f`, evaluated per mode as `−½ sin²τ (g'' − n² g/u²)`.
pub fn box_op(f: &CollarField) -> Result<CollarField> {
    check_resolved(f)?;
    let c = f.collar();
    let u = c.u();
    let s = c.sin_tau();
    let mut out = CollarField::zero(c).with_bandwidth(f.bandwidth());
    for (n, g) in f.modes() {
        let g2 = c.grid().d2_tau(g);
        let k = (n * n) as f64 / (u * u);
        let prof = g2
            .iter()
            .zip(g)
            .zip(s)
            .map(|((d2, v), sj)| -(d2 - v * k) * (0.5 * sj * sj))
            .collect();
        out = out.try_add(&CollarField::from_mode(c, n, prof))?;
    }
    Ok(out)
}

/// `ξ(f) = −λ⁻¹ ∂_z(A ∂_z f)` for the Beltrami coefficient `A`.
pub fn xi(a: &CollarField, f: &CollarField) -> Result<CollarField> {
    same_collar(a, f)?;
    check_resolved(f)?;
    Ok(xi_weighted(a, f).into_field())
}

fn xi_weighted(a: &CollarField, f: &CollarField) -> Weighted {
    Weighted::from_field(f)
        .dz()
        .mul_field(a)
        .dz()
        .mul_lambda_inv()
        .scale(Complex64::new(-1.0, 0.0))
}

/// The conjugate operator `ξ̄(f) = −λ⁻¹ ∂_z̄(Ā ∂_z̄ f)`.
pub fn xi_bar(a: &CollarField, f: &CollarField) -> Result<CollarField> {
    Ok(xi(a, &f.conj())?.conj())
}

/// `Q(f) = P̄(e) P(f) − 2 f_{kl̄} □f + λ⁻¹ ∂_z f_{kl̄} ∂_z̄ f`.
pub fn q_operator(e_kl: &CollarField, f_kl: &CollarField, f: &CollarField) -> Result<CollarField> {
    same_collar(e_kl, f)?;
    same_collar(f_kl, f)?;
    let first = op_p_bar(e_kl)?.try_mul(&op_p(f)?)?;
    let second = f_kl.try_mul(&box_op(f)?)?.scale_real(-2.0);
    check_resolved(f_kl)?;
    let third = Weighted::from_field(f_kl)
        .dz()
        .mul_lambda_inv()
        .mul(&Weighted::from_field(f).dzbar())
        .into_field();
    first.try_add(&second)?.try_add(&third)
}

/// Both sides of the integration-by-parts expansion of the `Q` pairing:
/// `∫ Q_{kl̄}(e_{ij̄}) e_{αβ̄} dv` and
/// `−∫ f_{kl̄}(K₀e_{ij̄} K̄₀e_{αβ̄} + K̄₀e_{ij̄} K₀e_{αβ̄}) dv
///  − ∫ (□e_{ij̄} K₀e_{αβ̄} + □e_{αβ̄} K₀e_{ij̄}) K̄₀e_{kl̄} dv`.
///
/// The identity needs `(□+1)e_{kl̄} = f_{kl̄}` and fields vanishing at both
/// collar ends.
pub fn q_pairing_sides(e_ij: &CollarField, e_ab: &CollarField, e_kl: &CollarField, f_kl: &CollarField) -> Result<(Complex64, Complex64)> {
    let lhs = volume_integral(&q_operator(e_kl, f_kl, e_ij)?.try_mul(e_ab)?);
    let (k_ij, kb_ij) = (k0(e_ij)?, k0_bar(e_ij)?);
    let (k_ab, kb_ab) = (k0(e_ab)?, k0_bar(e_ab)?);
    let kb_kl = k0_bar(e_kl)?;
    let first = f_kl.try_mul(&k_ij.try_mul(&kb_ab)?.try_add(&kb_ij.try_mul(&k_ab)?)?)?;
    let second = box_op(e_ij)?.try_mul(&k_ab)?.try_add(&box_op(e_ab)?.try_mul(&k_ij)?)?.try_mul(&kb_kl)?;
    let rhs = -volume_integral(&first) - volume_integral(&second);
    Ok((lhs, rhs))
}

/// Region selector for norms: `τ`-bounds of a sub-annulus.
pub type Region = Option<(f64, f64)>;

/// `‖f‖_k`: the sup of `|f|` plus the sups of all Maass compositions of length
/// `≤ k`, starting from weight `weight`.
pub fn ck_norm(f: &CollarField, weight: i32, k: usize, region: Region) -> Result<f64> {
    if k > 2 {
        return Err(CollarError::UnsupportedOrder(k));
    }
    let mut total = f.sup_norm_in(region);
    let mut layer = vec![(weight, f.clone())];
    for _ in 0..k {
        let mut next = Vec::with_capacity(2 * layer.len());
        for (p, g) in &layer {
            for which in [Maass::K, Maass::L] {
                let h = maass(*p, g, which)?;
                total += h.sup_norm_in(region);
                next.push((if which == Maass::K { p + 1 } else { p - 1 }, h));
            }
        }
        layer = next;
    }
    Ok(total)
}

/// Index slots of a curvature-type expression: unbarred `(i, k, α)` and
/// barred `(j̄, l̄, β̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexTuple {
    pub i: usize,
    pub k: usize,
    pub alpha: usize,
    pub j: usize,
    pub l: usize,
    pub beta: usize,
}

impl IndexTuple {
    pub fn new(i: usize, k: usize, alpha: usize, j: usize, l: usize, beta: usize) -> Self {
        Self { i, k, alpha, j, l, beta }
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        for index in [self.i, self.k, self.alpha, self.j, self.l, self.beta] {
            if index >= dim {
                return Err(CollarError::IndexOutOfRange { index, dim });
            }
        }
        Ok(())
    }
}

/// Symmetrizer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetrizer {
    /// All 6 orderings of `(i, k, α)`.
    Sigma1,
    /// Both orderings of `(j̄, β̄)`.
    Sigma2,
    /// All 6 orderings of `(j̄, l̄, β̄)`.
    SigmaTilde1,
}

const PERM3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// The permuted tuples a symmetrizer sums over (with repetition).
pub fn permutations(t: IndexTuple, which: Symmetrizer) -> Vec<IndexTuple> {
    match which {
        Symmetrizer::Sigma1 => {
            let s = [t.i, t.k, t.alpha];
            PERM3.iter().map(|p| IndexTuple { i: s[p[0]], k: s[p[1]], alpha: s[p[2]], ..t }).collect()
        }
        Symmetrizer::Sigma2 => vec![t, IndexTuple { j: t.beta, beta: t.j, ..t }],
        Symmetrizer::SigmaTilde1 => {
            let s = [t.j, t.l, t.beta];
            PERM3.iter().map(|p| IndexTuple { j: s[p[0]], l: s[p[1]], beta: s[p[2]], ..t }).collect()
        }
    }
}

/// Sums `term` over the orderings selected by `which`.
pub fn symmetrize<T: std::iter::Sum<T>>(t: IndexTuple, which: Symmetrizer, term: impl FnMut(IndexTuple) -> T) -> T {
    permutations(t, which).into_iter().map(term).sum()
}
