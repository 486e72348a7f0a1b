//! One PASS/FAIL line per acceptance criterion, with runtimes, on the default
//! configuration. Every criterion except the equivalence-ratio stability is
//! asserted; that one is printed only (see README).

use std::io::Write;
use std::time::Instant;

use collarlab_cli::suites::{calculus_moments, operator_identities};
use collarlab_cli::{run_suite, CheckRecord, RunConfig, SuiteId, SuiteReport};

struct Outcome {
    number: usize,
    title: &'static str,
    pass: bool,
    seconds: f64,
    limit: f64,
    asserted: bool,
}

/// Every listed id has at least one record and all counted records pass.
fn ids_pass(records: &[CheckRecord], ids: &[&str]) -> bool {
    ids.iter().all(|id| {
        let mut matching = records.iter().filter(|r| r.check_id == *id).peekable();
        matching.peek().is_some() && matching.filter(|r| r.counts()).all(|r| r.pass)
    })
}

fn suite_pass(report: &SuiteReport, ids: &[&str]) -> bool {
    report.errors.is_empty() && ids_pass(&report.records, ids)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn print_failures(records: &[CheckRecord]) {
    for r in records.iter().filter(|r| r.counts() && !r.pass) {
        println!("      failing {} at u = {:?}: measured {:.6e}, target {:.6e}, rel_err {:.3e}", r.check_id, r.u, r.measured.re, r.target.re, r.rel_err);
    }
}

#[test]
fn acceptance_criteria() {
    let cfg = RunConfig::default();
    cfg.validate().unwrap();
    let mut out = Vec::new();

    let (moments, secs) = timed(|| calculus_moments(&cfg).unwrap());
    out.push(Outcome { number: 1, title: "radial-moment calculus identities", pass: ids_pass(&moments, &["moment-oracle-k0", "moment-limit-k0"]) && secs < 5.0, seconds: secs, limit: 5.0, asserted: true });
    print_failures(&moments);

    let wp = run_suite(&cfg, SuiteId::WpAsymptotics);
    out.push(Outcome { number: 2, title: "WP metric and cometric asymptotics", pass: suite_pass(&wp, &["wp-cometric", "wp-metric", "wp-cometric-reference"]) && wp.wall_clock < 30.0, seconds: wp.wall_clock, limit: 30.0, asserted: true });
    print_failures(&wp.records);

    let ricci = run_suite(&cfg, SuiteId::RicciAsymptotics);
    out.push(Outcome { number: 3, title: "Ricci metric constant and convergence", pass: suite_pass(&ricci, &["ricci-metric", "ricci-metric-convergence"]) && ricci.wall_clock < 300.0, seconds: ricci.wall_clock, limit: 300.0, asserted: true });
    print_failures(&ricci.records);

    let holo = run_suite(&cfg, SuiteId::HoloCurvature);
    out.push(Outcome { number: 4, title: "leading terms and holomorphic sectional curvature", pass: suite_pass(&holo, &["g1-term-1", "g1-term-2", "g1-term-3", "g1-term-4", "holo-sectional"]) && holo.wall_clock < 600.0, seconds: holo.wall_clock, limit: 600.0, asserted: true });
    print_failures(&holo.records);

    let green = run_suite(&cfg, SuiteId::GreenProps);
    out.push(Outcome { number: 5, title: "Green operator spectral bounds, residual, symmetry", pass: suite_pass(&green, &["green-spectral-inequalities", "green-residual", "green-self-adjoint"]) && green.wall_clock < 120.0, seconds: green.wall_clock, limit: 120.0, asserted: true });
    print_failures(&green.records);

    let approx = run_suite(&cfg, SuiteId::Approximants);
    out.push(Outcome { number: 6, title: "approximant error exponents", pass: suite_pass(&approx, &["e-approx-exponent", "xi-approx-exponent", "t-approx-exponent"]) && approx.wall_clock < 600.0, seconds: approx.wall_clock, limit: 600.0, asserted: true });
    print_failures(&approx.records);

    out.push(Outcome { number: 7, title: "T-pairing constant", pass: suite_pass(&holo, &["t-pairing"]) && holo.wall_clock < 600.0, seconds: holo.wall_clock, limit: 600.0, asserted: true });

    let perturbed = run_suite(&cfg, SuiteId::Perturbed);
    let perturbed_ids: Vec<String> = cfg.perturbation.iter().flat_map(|c| [format!("perturbed-curvature-c{c}"), format!("perturbed-positive-c{c}"), format!("perturbed-inverse-dominance-c{c}")]).collect();
    let perturbed_refs: Vec<&str> = perturbed_ids.iter().map(String::as_str).collect();
    out.push(Outcome { number: 8, title: "perturbed Ricci curvature and inverse dominance", pass: suite_pass(&perturbed, &perturbed_refs) && perturbed.wall_clock < 600.0, seconds: perturbed.wall_clock, limit: 600.0, asserted: true });
    print_failures(&perturbed.records);

    let lengths = run_suite(&cfg, SuiteId::Lengths);
    out.push(Outcome { number: 9, title: "geodesic-length derivative", pass: suite_pass(&lengths, &["length-derivative", "length-reference"]) && lengths.wall_clock < 10.0, seconds: lengths.wall_clock, limit: 10.0, asserted: true });
    print_failures(&lengths.records);

    let equiv = run_suite(&cfg, SuiteId::Equivalence);
    out.push(Outcome { number: 10, title: "equivalence ratios: bands and stability", pass: suite_pass(&equiv, &["poincare-ratio", "mcmullen-ratio", "poincare-variation", "mcmullen-variation"]) && equiv.wall_clock < 300.0, seconds: equiv.wall_clock, limit: 300.0, asserted: false });
    print_failures(&equiv.records);

    let g2 = run_suite(&cfg, SuiteId::G2Bounds);
    out.push(Outcome { number: 11, title: "off-diagonal remainder exponents", pass: suite_pass(&g2, &["g2-case1-exponent", "g2-case2-exponent", "g2-case3-exponent", "g2-case4-exponent"]) && g2.wall_clock < 900.0, seconds: g2.wall_clock, limit: 900.0, asserted: true });
    print_failures(&g2.records);

    let (identities, secs) = timed(|| operator_identities(&cfg).unwrap());
    out.push(Outcome { number: 12, title: "operator identities on seeded configurations", pass: ids_pass(&identities, &["p-factorization", "xi-harmonic-form", "q-pairing"]) && secs < 120.0, seconds: secs, limit: 120.0, asserted: true });
    print_failures(&identities);

    out.sort_by_key(|o| o.number);
    // written to the raw handle so the summary survives libtest's capture
    let mut summary = String::from("\n");
    for o in &out {
        let note = if o.asserted { "" } else { " [reported, not asserted]" };
        summary += &format!("criterion {:>2} {} {} ({:.2} s, limit {} s){note}\n", o.number, if o.pass { "PASS" } else { "FAIL" }, o.title, o.seconds, o.limit);
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(summary.as_bytes()).unwrap();
    stdout.flush().unwrap();
    let failed: Vec<usize> = out.iter().filter(|o| o.asserted && !o.pass).map(|o| o.number).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
