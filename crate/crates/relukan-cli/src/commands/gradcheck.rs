use crate::args::GradcheckArgs;
use crate::commands::parse_seeds;
use relukan::{all_passed, run_gradcheck, GradCheckConfig, Result};

/// Runs the full finite-difference suites and prints one line per group.
/// Returns the process exit code: 0 when every group passes, 2 otherwise.
pub fn run(args: &GradcheckArgs) -> Result<i32> {
    let seeds = parse_seeds(&args.seeds)?;
    let cfg = GradCheckConfig {
        seed: seeds[0],
        flip_s_grad: args.flip_s_grad,
        ..GradCheckConfig::default()
    };
    let reports = run_gradcheck(&cfg)?;
    for r in &reports {
        println!(
            "group={} probes={} checks={} max_rel_err={:e} {}",
            r.group,
            r.probes,
            r.checks,
            r.max_rel_err,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(if all_passed(&reports) { 0 } else { 2 })
}
