use std::f64::consts::PI;
use std::sync::Arc;

use collarlab::green::spectral_check;
use collarlab::{
    cutoff_eval, fit_power_law, geodesic_length_derivative_check, permutations, radial_moment, symmetrize, Collar, CollarField,
    CollarParams, Complex64, Cutoff, CutoffSpec, IndexTuple, SolverConfig, Symmetrizer,
};
use proptest::prelude::*;

fn collar(u: f64, n: usize) -> Arc<Collar> {
    Collar::new(CollarParams::from_u(u, 0.5).unwrap(), n).unwrap()
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn width_and_modulus_round_trip(u in 0.01f64..0.3, arg in -3.0f64..3.0) {
        let p = CollarParams::from_u_phase(u, arg, 0.5).unwrap();
        prop_assert!((p.u() - u).abs() <= 1e-14 * u);
        prop_assert!((p.t_abs().ln() + PI / u).abs() <= 1e-12 * (PI / u));
        let back = CollarParams::from_t(p.t(), 0.5).unwrap();
        prop_assert!((back.u() - u).abs() <= 1e-12 * u);
    }

    #[test]
    fn cutoffs_stay_in_the_unit_interval(x in -6.0f64..0.5) {
        let spec = CutoffSpec::default();
        for which in [Cutoff::Outer, Cutoff::Inner] {
            let [v, d1, d2] = cutoff_eval(&spec, which, x);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(d1.is_finite() && d2.is_finite());
        }
    }

    #[test]
    fn power_law_fits_are_exact_on_exact_data(constant in 0.01f64..100.0, half_steps in 2u32..16) {
        let exponent = half_steps as f64 / 2.0;
        let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&u: &f64| (u, constant * u.powf(exponent))).collect();
        let fit = fit_power_law(&samples).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-9);
        prop_assert!((fit.constant / constant - 1.0).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn radial_moments_agree_with_antiderivatives(u in 0.0125f64..0.1, k in -3i32..=3) {
        let m = radial_moment(&collar(u, 1024), k);
        prop_assert!((m.measured - m.oracle).abs() <= 1e-10 * m.oracle.abs());
    }

    #[test]
    fn length_derivative_matches_within_three_u(u in 0.0125f64..0.1, arg in -3.0f64..3.0) {
        let t = Complex64::from_polar((-PI / u).exp(), arg);
        let check = geodesic_length_derivative_check(&[t], 0.5).unwrap()[0];
        prop_assert!(check.rel_err <= 3.0 * u);
    }

    #[test]
    fn conjugation_is_an_involution(re in -1.0f64..1.0, im in -1.0f64..1.0, n in -4i32..=4) {
        let c = collar(0.05, 512);
        let f = CollarField::from_fn(&c, n, |t| Complex64::new(re, im) * t.sin().powi(2));
        prop_assert_eq!(f.conj().conj().max_diff(&f), 0.0);
        let real = f.try_add(&f.conj()).unwrap();
        prop_assert!(real.reality_defect() <= 1e-15);
    }

    #[test]
    fn symmetrizers_sum_with_fixed_multiplicity(idx in proptest::array::uniform6(0usize..3), w in -5.0f64..5.0) {
        let t = IndexTuple::new(idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]);
        for (which, count) in [(Symmetrizer::Sigma1, 6.0), (Symmetrizer::Sigma2, 2.0), (Symmetrizer::SigmaTilde1, 6.0)] {
            let total: f64 = symmetrize(t, which, |_| w);
            prop_assert!((total - count * w).abs() <= 1e-12);
            // the multiset of permuted triples is preserved
            for p in permutations(t, which) {
                let mut a = [p.i, p.k, p.alpha, p.j, p.l, p.beta];
                let mut b = idx;
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn green_operator_is_contractive_and_positive(
        centre in 0.3f64..0.7, width in 0.1f64..0.25, mode in 0i32..3, amp in 0.1f64..2.0, phase in -3.0f64..3.0,
    ) {
        let c = collar(0.05, 1024);
        let (lo, hi) = c.params().tau_interval();
        let (mid, half) = (lo + centre * (hi - lo), width * (hi - lo) / 2.0);
        let part = CollarField::from_fn(&c, mode, |t| Complex64::from_polar(amp, phase) * bump((t - mid) / half));
        let f = part.try_add(&part.conj()).unwrap();
        let rep = spectral_check(&f, &SolverConfig::default()).unwrap();
        prop_assert!(rep.tf_squared <= rep.tf_pairing * (1.0 + 1e-10));
        prop_assert!(rep.tf_pairing <= rep.f_squared * (1.0 + 1e-10));
        prop_assert!(rep.tf_pairing > 0.0);
    }
}
