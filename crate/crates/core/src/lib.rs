//! Numerical laboratory for hyperbolic-collar models of degenerating Riemann
//! surfaces: Weil–Petersson, Ricci and perturbed Ricci metrics, their
//! curvature formulas, and the leading asymptotic constants.
//!
//! Index scaling: every index `i` carries a scale `σ_i` (`|t_i|` for a pinching
//! direction, `1` otherwise). Beltrami coefficients are stored multiplied by
//! `σ_i`, quadratic-differential coefficients divided by it, and metric and
//! curvature objects hold `σ`-normalized entries. This keeps `|t|⁻⁶`-sized
//! quantities representable for small collar widths.

pub mod asymptotics;
pub mod collar;
pub mod curvature;
pub mod differentials;
pub mod error;
pub mod fields;
pub mod green;
pub mod numerics;
pub mod operators;

pub use asymptotics::{approximant_errors, build_approximants, collar_taper, cutoff_eval, det_ratio, equivalence_ratios, fit_power_law, g2_spotcheck, geodesic_length_derivative_check, target_table, two_collar_model, u0, ApproximantErrors, Approximants, AsymptoticTarget, Cutoff, CutoffSpec, EquivalenceRatios, FitResult, G2Sample, LengthCheck};
pub use collar::{radial_moment, RadialMoment, geodesic_circle, metric_density, volume_integral, Collar, CollarParams, TauGrid};
pub use curvature::{e_of, perturbed_target, BlockValues, CurvatureEngine, CurvatureKind, CurvatureTensor, LeadingTerms, RicciEngine, SurfaceModel};
pub use differentials::{beltrami_field, duality_check, qdiff_field, wp_cometric, wp_metric, BeltramiSet, BeltramiSpec, CoefficientBounds, DualityReport, MetricKind, MetricMatrix, PairCase, QuadDiffSet, QuadDiffSpec};
pub use error::{CollarError, Result};
pub use fields::{field_arith, wirtinger, ArithOp, CollarField, Wirtinger};
pub use green::{apply_box1, pairing, solve_t, t_op, SolverConfig, TSolution};
pub use num_complex::Complex64;
pub use operators::{box_op, ck_norm, k0, k0_bar, maass, op_p, op_p_bar, permutations, q_operator, q_pairing_sides, symmetrize, xi, xi_bar, IndexTuple, Maass, Symmetrizer};
