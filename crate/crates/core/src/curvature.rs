//! Curvature of the Weil–Petersson metric, the Ricci metric `τ = −Ric(h)`, the
//! four-block curvature formula of the Ricci metric, and the perturbed Ricci
//! metric `τ̃ = τ + C h`.
//!
//! `e_{ij̄} = T(A_i Ā_j)` is solved collar by collar; couplings between collars
//! only enter through the index sums.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::differentials::{beltrami_field, wp_metric, BeltramiSet, MetricKind, MetricMatrix};
use crate::error::{CollarError, Result};
use crate::fields::CollarField;
use crate::green::{solve_t, SolverConfig, TSolution};
use crate::operators::{permutations, q_operator, xi, IndexTuple, Symmetrizer};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which tensor a [`CurvatureTensor`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureKind {
    Wp,
    RicciMetric,
    Perturbed,
}

/// `R_{ij̄kl̄}` with normalized entries (`σ_iσ_jσ_kσ_l R`).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    pub kind: CurvatureKind,
    pub dim: usize,
    data: Vec<Complex64>,
    pub scales: Vec<f64>,
}

impl CurvatureTensor {
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.data[self.offset(i, j, k, l)]
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn defect(&self, other: impl Fn(usize, usize, usize, usize) -> Complex64) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) - other(i, j, k, l)).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// Largest relative deviation from `R_{ij̄kl̄} = conj(R_{jīlk̄})`.
    pub fn hermitian_defect(&self) -> f64 {
        self.defect(|i, j, k, l| self.get(j, i, l, k).conj())
    }

    /// Largest relative deviation from `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄}`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        self.defect(|i, j, k, l| self.get(k, j, i, l)).max(self.defect(|i, j, k, l| self.get(i, l, k, j)))
    }
}

/// A surface model: Beltrami data on the collars and the solver used for `T`.
///
/// Curvature is only assembled when every index pinches (one index per
/// collar); nondegenerate directions would need the compact part's curvature.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub beltrami: BeltramiSet,
    pub solver: SolverConfig,
}

impl SurfaceModel {
    pub fn new(beltrami: BeltramiSet) -> Self {
        Self { beltrami, solver: SolverConfig::default() }
    }
}

/// `e_{ij̄}` on every collar, with the solver diagnostics.
pub fn e_of(i: usize, j: usize, set: &BeltramiSet, cfg: &SolverConfig) -> Result<Vec<TSolution>> {
    (0..set.collar_count())
        .map(|c| {
            let f = beltrami_field(set, i, c)?.try_mul(&beltrami_field(set, j, c)?.conj())?;
            solve_t(&f, cfg)
        })
        .collect()
}

/// `∫ a b dv` (no conjugation).
fn product_integral(a: &CollarField, b: &CollarField) -> Complex64 {
    let collar = a.collar();
    let mut acc = ZERO;
    for (n, g) in a.modes() {
        if let Some(h) = b.mode(-n) {
            let prod: Vec<Complex64> = g.iter().zip(h).map(|(x, y)| x * y).collect();
            acc += collar.volume_profile(&prod);
        }
    }
    acc
}

fn sum_collars(a: &[CollarField], b: &[CollarField]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| product_integral(x, y)).sum()
}

/// `g^{ab̄}` indexed `[(a, b)]`: the transpose of the inverse, so that
/// `Σ_b g^{ab̄} g_{cb̄} = δ_{ac}`.
fn raised(g: &MetricMatrix) -> Result<DMatrix<Complex64>> {
    Ok(g.inverse()?.transpose())
}

/// Row-major offset into an `n^k` table.
fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Fields, WP metric, WP curvature and Ricci metric of one model.
#[derive(Debug, Clone)]
pub struct CurvatureEngine {
    model: SurfaceModel,
    n: usize,
    scales: Vec<f64>,
    a: Vec<Vec<CollarField>>,
    /// `f_{ij̄}` and `e_{ij̄}` per collar, at `flat(i, j)`.
    f: Vec<Vec<CollarField>>,
    e: Vec<Vec<CollarField>>,
    h: MetricMatrix,
    h_up: DMatrix<Complex64>,
    wp: CurvatureTensor,
    tau: MetricMatrix,
    /// Largest interior residual over all `T` solves, and whether any right
    /// side reached the collar ends.
    pub max_residual: f64,
    pub support_warning: bool,
}

impl CurvatureEngine {
    pub fn new(model: SurfaceModel) -> Result<Self> {
        model.solver.validate()?;
        let set = &model.beltrami;
        let n = set.dim();
        let m = set.collar_count();
        if m == 0 || n != m {
            return Err(CollarError::InvalidSpec(format!("curvature needs one pinching index per collar, got {n} indices on {m} collars")));
        }
        let a: Vec<Vec<CollarField>> = (0..n).map(|i| (0..m).map(|c| beltrami_field(set, i, c)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let mut max_residual: f64 = 0.0;
        let mut support_warning = false;
        let mut f = Vec::with_capacity(n * n);
        let mut e = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut fs = Vec::with_capacity(m);
                let mut es = Vec::with_capacity(m);
                for c in 0..m {
                    let fij = a[i][c].try_mul(&a[j][c].conj())?;
                    let sol = solve_t(&fij, &model.solver)?;
                    max_residual = max_residual.max(sol.residual);
                    support_warning |= sol.support_warning;
                    fs.push(fij);
                    es.push(sol.field);
                }
                f.push(fs);
                e.push(es);
            }
        }
        let h = wp_metric(set)?;
        h.check_positive_definite()?;
        let h_up = raised(&h)?;
        let scales = set.scales();

        let mut wp_data = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        wp_data.push(sum_collars(&e[flat(n, &[i, j])], &f[flat(n, &[k, l])]) + sum_collars(&e[flat(n, &[i, l])], &f[flat(n, &[k, j])]));
                    }
                }
            }
        }
        let wp = CurvatureTensor { kind: CurvatureKind::Wp, dim: n, data: wp_data, scales: scales.clone() };

        let tau_m = DMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for al in 0..n {
                for be in 0..n {
                    acc += h_up[(al, be)] * wp.get(i, j, al, be);
                }
            }
            acc
        });
        let tau = MetricMatrix::new(MetricKind::Ricci, tau_m, scales.clone());
        tau.check_positive_definite()?;
        Ok(Self { model, n, scales, a, f, e, h, h_up, wp, tau, max_residual, support_warning })
    }

    pub fn model(&self) -> &SurfaceModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn wp_metric(&self) -> &MetricMatrix {
        &self.h
    }

    pub fn wp_curvature(&self) -> &CurvatureTensor {
        &self.wp
    }

    pub fn ricci_metric(&self) -> &MetricMatrix {
        &self.tau
    }

    /// `e_{ij̄}` per collar.
    pub fn e(&self, i: usize, j: usize) -> &[CollarField] {
        &self.e[flat(self.n, &[i, j])]
    }

    /// `τ̃ = τ + C h`.
    pub fn perturbed_metric(&self, c: f64) -> Result<MetricMatrix> {
        if !c.is_finite() || c < 0.0 {
            return Err(CollarError::InvalidSpec(format!("perturbation constant {c} must be finite and non-negative")));
        }
        let entries = &self.tau.entries + &self.h.entries * Complex64::new(c, 0.0);
        let out = MetricMatrix::new(MetricKind::PerturbedRicci, entries, self.scales.clone());
        out.check_positive_definite()?;
        Ok(out)
    }

    /// Builds the `ξ`, `T ξ` and `Q` tables needed for Ricci-metric curvature.
    pub fn ricci(&self) -> Result<RicciEngine<'_>> {
        RicciEngine::new(self)
    }
}

/// The four blocks of the Ricci-metric curvature formula, each split into the
/// part where every summation index equals the first index and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockValues {
    /// Blocks in order: the `T ξ ξ̄` pairing, the `Q` pairing, the `τ^{pq̄}`
    /// double contraction (sign included) and `τ h⁻¹ R`.
    pub total: [Complex64; 4],
    pub leading: [Complex64; 4],
}

impl BlockValues {
    pub fn sum(&self) -> Complex64 {
        self.total.iter().sum()
    }

    pub fn leading_sum(&self) -> Complex64 {
        self.leading.iter().sum()
    }

    /// `total − leading`, accumulated term by term.
    pub fn remainder(&self) -> [Complex64; 4] {
        std::array::from_fn(|b| self.total[b] - self.leading[b])
    }
}

/// Running sum that also tracks the leading part.
#[derive(Default, Clone, Copy)]
struct Split {
    leading: Complex64,
    rest: Complex64,
}

impl Split {
    fn add(&mut self, v: Complex64, leading: bool) {
        if leading {
            self.leading += v;
        } else {
            self.rest += v;
        }
    }
}

/// Tables for the Ricci-metric curvature of a [`CurvatureEngine`].
#[derive(Debug, Clone)]
pub struct RicciEngine<'a> {
    base: &'a CurvatureEngine,
    tau_up: DMatrix<Complex64>,
    /// `∫ T(ξ_k(e_{ij̄})) ξ̄_l(e_{αβ̄})` at `flat(k, i, j, l, α, β)`.
    t_pair: Vec<Complex64>,
    /// `∫ Q_{kl̄}(e_{ij̄}) e_{αβ̄}` at `flat(k, l, i, j, α, β)`.
    q_pair: Vec<Complex64>,
    /// `∫ ξ_k(e_{iq̄}) e_{αβ̄}` at `flat(k, i, q, α, β)`.
    xi_pair: Vec<Complex64>,
    /// `∫ ξ̄_l(e_{pj̄}) e_{γδ̄}` at `flat(l, p, j, γ, δ)`.
    xi_bar_pair: Vec<Complex64>,
    pub max_residual: f64,
}

impl<'a> RicciEngine<'a> {
    fn new(base: &'a CurvatureEngine) -> Result<Self> {
        let n = base.n;
        let m = base.model.beltrami.collar_count();
        let cfg = &base.model.solver;
        let mut max_residual = base.max_residual;
        // ξ_k(e_{ij̄}) and T of it, at flat(k, i, j)
        let mut xi_f = Vec::with_capacity(n * n * n);
        let mut txi = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut xs = Vec::with_capacity(m);
                    let mut ts = Vec::with_capacity(m);
                    for c in 0..m {
                        let x = xi(&base.a[k][c], &base.e[flat(n, &[i, j])][c])?;
                        let sol = solve_t(&x, cfg)?;
                        max_residual = max_residual.max(sol.residual);
                        xs.push(x);
                        ts.push(sol.field);
                    }
                    xi_f.push(xs);
                    txi.push(ts);
                }
            }
        }
        // ξ̄_l(e_{pj̄}) = conj(ξ_l(e_{jp̄}))
        let xi_bar = |l: usize, p: usize, j: usize| -> Vec<CollarField> { xi_f[flat(n, &[l, j, p])].iter().map(CollarField::conj).collect() };
        let e = |a: usize, b: usize| &base.e[flat(n, &[a, b])];

        let mut xi_pair = Vec::with_capacity(n.pow(5));
        let mut xi_bar_pair = Vec::with_capacity(n.pow(5));
        for k in 0..n {
            for i in 0..n {
                for q in 0..n {
                    let xb = xi_bar(k, i, q);
                    for al in 0..n {
                        for be in 0..n {
                            xi_pair.push(sum_collars(&xi_f[flat(n, &[k, i, q])], e(al, be)));
                            xi_bar_pair.push(sum_collars(&xb, e(al, be)));
                        }
                    }
                }
            }
        }

        let mut t_pair = Vec::with_capacity(n.pow(6));
        for kij in 0..n * n * n {
            for l in 0..n {
                for al in 0..n {
                    for be in 0..n {
                        t_pair.push(sum_collars(&txi[kij], &xi_bar(l, al, be)));
                    }
                }
            }
        }

        let mut q_pair = Vec::with_capacity(n.pow(6));
        for k in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let qs: Vec<CollarField> = (0..m)
                            .map(|c| q_operator(&e(k, l)[c], &base.f[flat(n, &[k, l])][c], &e(i, j)[c]))
                            .collect::<Result<_>>()?;
                        for al in 0..n {
                            for be in 0..n {
                                q_pair.push(sum_collars(&qs, e(al, be)));
                            }
                        }
                    }
                }
            }
        }
        let tau_up = raised(&base.tau)?;
        Ok(Self { base, tau_up, t_pair, q_pair, xi_pair, xi_bar_pair, max_residual })
    }

    fn idx(&self, idx: &[usize]) -> usize {
        flat(self.base.n, idx)
    }

    fn check(&self, i: usize, j: usize, k: usize, l: usize) -> Result<()> {
        IndexTuple::new(i, k, 0, j, l, 0).check(self.base.n)
    }

    /// `Σ_{σ₁} ∫ ξ_k(e_{iq̄}) e_{αβ̄}` over orderings of `(i, k, α)`.
    pub fn symmetrized_xi_pairing(&self, i: usize, k: usize, al: usize, q: usize, be: usize) -> Complex64 {
        permutations(IndexTuple::new(i, k, al, 0, 0, 0), Symmetrizer::Sigma1)
            .into_iter()
            .map(|s| self.xi_pair[self.idx(&[s.k, s.i, q, s.alpha, be])])
            .sum()
    }

    /// `Σ_{σ̃₁} ∫ ξ̄_l(e_{pj̄}) e_{γδ̄}` over orderings of `(j, l, δ)`.
    fn right_factor(&self, p: usize, j: usize, l: usize, ga: usize, de: usize) -> Complex64 {
        permutations(IndexTuple::new(0, 0, 0, j, l, de), Symmetrizer::SigmaTilde1)
            .into_iter()
            .map(|s| self.xi_bar_pair[self.idx(&[s.l, p, s.j, ga, s.beta])])
            .sum()
    }

    /// Blocks of `R_{ij̄kl̄}` for the metric `τ + C h` (`C = 0` gives `τ`).
    fn blocks(&self, i: usize, j: usize, k: usize, l: usize, tau_inverse: &DMatrix<Complex64>) -> Result<BlockValues> {
        self.check(i, j, k, l)?;
        let n = self.base.n;
        let h_up = &self.base.h_up;
        let mut out = [Split::default(); 4];

        for al in 0..n {
            for be in 0..n {
                let hab = h_up[(al, be)];
                if hab == ZERO {
                    continue;
                }
                let lead = al == i && be == i;
                let base = IndexTuple::new(i, k, al, j, l, be);
                for s1 in permutations(base, Symmetrizer::Sigma1) {
                    for s in permutations(s1, Symmetrizer::Sigma2) {
                        let first = self.t_pair[self.idx(&[s.k, s.i, s.j, s.l, s.alpha, s.beta])];
                        let second = self.t_pair[self.idx(&[s.k, s.i, s.j, s.beta, s.alpha, s.l])];
                        out[0].add(hab * (first + second), lead);
                    }
                    out[1].add(hab * self.q_pair[self.idx(&[s1.k, l, s1.i, j, s1.alpha, be])], lead);
                }
            }
        }

        for p in 0..n {
            for q in 0..n {
                let tpq = tau_inverse[(p, q)];
                if tpq == ZERO {
                    continue;
                }
                for al in 0..n {
                    for be in 0..n {
                        let left = self.base.h_up[(al, be)] * self.symmetrized_xi_pairing(i, k, al, q, be);
                        if left == ZERO {
                            continue;
                        }
                        for ga in 0..n {
                            for de in 0..n {
                                let right = h_up[(ga, de)] * self.right_factor(p, j, l, ga, de);
                                let lead = [p, q, al, be, ga, de].iter().all(|&x| x == i);
                                out[2].add(-tpq * left * right, lead);
                            }
                        }
                    }
                }
            }
        }

        for p in 0..n {
            for q in 0..n {
                let v = self.base.tau.entries[(p, j)] * h_up[(p, q)] * self.base.wp.get(i, q, k, l);
                out[3].add(v, p == i && q == i);
            }
        }
        Ok(BlockValues { total: out.map(|s| s.leading + s.rest), leading: out.map(|s| s.leading) })
    }

    /// Blocks of the Ricci-metric curvature `R_{ij̄kl̄}` (normalized).
    pub fn ricci_curvature(&self, i: usize, j: usize, k: usize, l: usize) -> Result<BlockValues> {
        self.blocks(i, j, k, l, &self.tau_up)
    }

    /// Curvature of `τ̃ = τ + C h`: `τ̃^{pq̄}` in the double contraction and an
    /// extra `C R^{WP}_{ij̄kl̄}`.
    pub fn perturbed_curvature(&self, i: usize, j: usize, k: usize, l: usize, c: f64) -> Result<Complex64> {
        let tilde = self.base.perturbed_metric(c)?;
        let b = self.blocks(i, j, k, l, &raised(&tilde)?)?;
        Ok(b.sum() + self.base.wp.get(i, j, k, l) * c)
    }

    /// The full tensor, for symmetry checks.
    pub fn tensor(&self, c: Option<f64>) -> Result<CurvatureTensor> {
        let n = self.base.n;
        let mut data = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(match c {
                            None => self.ricci_curvature(i, j, k, l)?.sum(),
                            Some(c) => self.perturbed_curvature(i, j, k, l, c)?,
                        });
                    }
                }
            }
        }
        let kind = if c.is_some() { CurvatureKind::Perturbed } else { CurvatureKind::RicciMetric };
        Ok(CurvatureTensor { kind, dim: n, data, scales: self.base.scales.clone() })
    }

    /// `∫ T(ξ_i(e_{iī})) ξ̄_i(e_{iī})` (normalized).
    pub fn t_pairing(&self, i: usize) -> Complex64 {
        self.t_pair[self.idx(&[i, i, i, i, i, i])]
    }

    /// `∫ ξ_i(e_{iī}) e_{iī}` (normalized).
    pub fn xi_pairing(&self, i: usize) -> Complex64 {
        self.xi_pair[self.idx(&[i, i, i, i, i])]
    }

    /// The four leading terms of `R_{iīiī}` and their closed-form targets.
    pub fn leading_terms(&self, i: usize) -> Result<LeadingTerms> {
        let b = self.ricci_curvature(i, i, i, i)?;
        let u = self.base.model.beltrami.collars[i].u();
        let unit = u.powi(4) / (16.0 * PI.powi(4));
        let terms = b.leading;
        let targets = [9.0 * unit, -9.0 * unit, -3.0 * unit, 9.0 * unit];
        Ok(LeadingTerms { u, terms, targets, sum: b.leading_sum(), sum_target: 3.0 * u.powi(4) / (8.0 * PI.powi(4)), remainder: b.remainder() })
    }
}

/// Leading terms of the Ricci-metric holomorphic sectional curvature on one
/// collar (normalized by `|t|⁴`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingTerms {
    pub u: f64,
    pub terms: [Complex64; 4],
    pub targets: [f64; 4],
    pub sum: Complex64,
    pub sum_target: f64,
    pub remainder: [Complex64; 4],
}

impl LeadingTerms {
    pub fn rel_errors(&self) -> [f64; 4] {
        std::array::from_fn(|b| (self.terms[b] - self.targets[b]).norm() / self.targets[b].abs())
    }
}

/// `P(u)`: the normalized holomorphic sectional curvature target for `τ + C h`.
pub fn perturbed_target(u: f64, c: f64) -> f64 {
    let p4 = PI.powi(4);
    (9.0 / (16.0 * p4) - 3.0 / (16.0 * p4) / (1.0 + 2.0 * PI * PI * c * u / 3.0)) * u.powi(4) + 3.0 * c / (8.0 * PI * PI) * u.powi(5)
}
