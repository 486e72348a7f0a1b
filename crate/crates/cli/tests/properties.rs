use collarlab_cli::{CheckRecord, RunConfig, Rule};
use proptest::prelude::*;

proptest! {
    #[test]
    fn relative_rule_matches_its_error(measured in -1e3f64..1e3, target in -1e3f64..1e3, tol in 1e-12f64..1.0) {
        let r = CheckRecord::real("s", "c", Some(0.05), measured, target, Rule::Relative { tolerance: tol });
        prop_assert!(r.rel_err.is_finite() && r.rel_err >= 0.0);
        prop_assert_eq!(r.pass, r.rel_err <= tol);
    }

    #[test]
    fn band_rule_is_membership(m in -20.0f64..20.0, lo in -10.0f64..0.0, width in 0.0f64..10.0) {
        let hi = lo + width;
        let r = CheckRecord::real("s", "b", None, m, 0.0, Rule::Band { lo, hi });
        prop_assert_eq!(r.pass, lo <= m && m <= hi);
        prop_assert_eq!(r.rel_err == 0.0, r.pass);
    }

    #[test]
    fn configs_round_trip_through_json(u_min in 0.005f64..0.05, span in 1.5f64..3.0, points in 4usize..9, seed in any::<u64>()) {
        let mut cfg = RunConfig::default();
        cfg.sweep.u_min = u_min;
        cfg.sweep.u_max = (u_min * span).min(0.15);
        cfg.sweep.points = points;
        cfg.seed = seed;
        let text = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        let pts = back.sweep_points();
        prop_assert_eq!(pts.len(), points);
        prop_assert!(pts.windows(2).all(|w| w[1] < w[0]));
        prop_assert!((pts[0] - cfg.sweep.u_max).abs() <= 1e-15 && (pts[points - 1] - u_min).abs() <= 1e-15 * 10.0);
    }
}
