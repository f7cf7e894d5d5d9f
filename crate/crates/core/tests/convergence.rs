use argmaxlab::estimators::BreakDesign;
use argmaxlab::mc_harness::{ks_samples, run_break_experiment, McOptions};
use argmaxlab::process_lab::{sample_limit_argmax, ArgmaxConstraint};
use argmaxlab::Execution;

fn interior_ks(t: usize) -> f64 {
    let design = BreakDesign {
        t,
        ..BreakDesign::default()
    };
    let opts = McOptions {
        reps: 1000,
        limit_draws: 20_000,
        ..McOptions::default()
    };
    let run = run_break_experiment(&design, &opts).unwrap();
    run.argmax_report().unwrap().comparisons[0].ks
}

#[test]
fn interior_break_improves_with_t() {
    let (small, large) = (interior_ks(1000), interior_ks(4000));
    assert!(
        large <= small + 0.02,
        "KS {small} at T = 1000, {large} at T = 4000"
    );
}

#[test]
fn limit_argmax_insensitive_to_step() {
    let spec = BreakDesign::default().limit_spec().unwrap();
    let w = spec.default_half_width();
    let draw = |step, seed| {
        sample_limit_argmax(
            &spec,
            &ArgmaxConstraint::Full,
            20_000,
            w,
            step,
            seed,
            Execution::Parallel,
        )
        .unwrap()
        .argmax
    };
    let fine = draw(0.01, 1);
    let coarse = draw(0.02, 2);
    let again = draw(0.01, 3);
    let across = ks_samples(&fine, &coarse).unwrap();
    let within = ks_samples(&fine, &again).unwrap();
    // 20k vs 20k draws: the 99% two-sample band is about 1.63 sqrt(2 / 20000) = 0.016
    assert!(
        across <= 0.02,
        "step 0.01 vs 0.02: KS {across} (same step: {within})"
    );
}
