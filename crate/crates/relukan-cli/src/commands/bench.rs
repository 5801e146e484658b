use crate::args::BenchArgs;
use crate::commands::{join_u64, parse_norm, parse_seeds, resolve_models};
use crate::output::{fmt_f64, mean, median, write_csv, Metadata};
use relukan::{
    build, lookup, make_dataset, suite_functions, train, ModelKind, NetConfig, Result, Suite,
    TargetFunction, TrainConfig,
};
use std::collections::HashMap;

/// Iterations discarded before computing per-iteration statistics; the
/// first few carry allocator and cache warmup noise.
const WARMUP: usize = 10;

struct RunStats {
    per_iter_median: f64,
    total: f64,
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let functions: Vec<&TargetFunction> = match &args.function {
        Some(id) => vec![lookup(Suite::Speed, id)?],
        None => suite_functions(Suite::Speed).iter().collect(),
    };
    let models = resolve_models(args.model.as_deref())?;
    let seeds = parse_seeds(&args.seeds)?;
    let norm = parse_norm(&args.norm_mode)?;
    std::fs::create_dir_all(&args.out)?;

    let mut bench_rows = Vec::new();
    let mut ratio_rows = Vec::new();
    for f in &functions {
        let mut first_seed_stats: HashMap<&'static str, RunStats> = HashMap::new();
        for &kind in &models {
            for &seed in &seeds {
                let data = make_dataset(f, args.samples, seed)?;
                let mut nc = NetConfig::new(kind, f.widths.to_vec(), f.g, f.k);
                nc.norm_mode = norm;
                nc.init_scale = args.init_scale;
                let mut net = build(nc, seed)?;
                let report = train(&mut net, &data, None, &TrainConfig::new(args.lr, args.iters))?;
                let timed = if report.per_iter_seconds.len() > WARMUP {
                    &report.per_iter_seconds[WARMUP..]
                } else {
                    &report.per_iter_seconds[..]
                };
                let (iter_mean, iter_median) = if timed.is_empty() {
                    (0.0, 0.0)
                } else {
                    (mean(timed), median(timed))
                };
                let loss_first = report
                    .loss_history
                    .first()
                    .copied()
                    .unwrap_or(report.final_train_mse);
                bench_rows.push(vec![
                    f.id.to_string(),
                    kind.name().to_string(),
                    seed.to_string(),
                    fmt_f64(loss_first),
                    fmt_f64(report.final_train_mse),
                    fmt_f64(report.total_seconds),
                    fmt_f64(iter_mean),
                    fmt_f64(iter_median),
                ]);
                if seed == seeds[0] {
                    first_seed_stats.insert(
                        kind.name(),
                        RunStats {
                            per_iter_median: iter_median,
                            total: report.total_seconds,
                        },
                    );
                }
            }
        }
        // ratios need all three models in the same process
        if let (Some(r1), Some(r2), Some(bs)) = (
            first_seed_stats.get(ModelKind::ReluKan1.name()),
            first_seed_stats.get(ModelKind::ReluKan2.name()),
            first_seed_stats.get(ModelKind::Bspline.name()),
        ) {
            ratio_rows.push(vec![
                f.id.to_string(),
                fmt_f64(bs.per_iter_median / r1.per_iter_median),
                fmt_f64(bs.per_iter_median / r2.per_iter_median),
                fmt_f64(r2.total / r1.total),
            ]);
        }
    }
    write_csv(
        &args.out.join("bench.csv"),
        &[
            "function",
            "model",
            "seed",
            "loss_first",
            "loss_final",
            "total_seconds",
            "per_iter_mean_seconds",
            "per_iter_median_seconds",
        ],
        &bench_rows,
    )?;
    if !ratio_rows.is_empty() {
        write_csv(
            &args.out.join("ratios.csv"),
            &[
                "function",
                "bspline_over_relukan1_per_iter",
                "bspline_over_relukan2_per_iter",
                "relukan2_over_relukan1_total",
            ],
            &ratio_rows,
        )?;
    }
    let mut meta = Metadata::new("bench");
    meta.push("suite", "speed");
    meta.push(
        "functions",
        functions.iter().map(|f| f.id).collect::<Vec<_>>().join(","),
    );
    meta.push(
        "models",
        models
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
    );
    meta.push("iters", args.iters);
    meta.push("samples", args.samples);
    meta.push("lr", fmt_f64(args.lr));
    meta.push("seeds", join_u64(&seeds));
    meta.push("norm_mode", &args.norm_mode);
    meta.push("init_scale", fmt_f64(args.init_scale));
    meta.push("warmup_iterations_discarded", WARMUP);
    // this harness times CPU execution only; no accelerator comparison
    meta.push("cpu_only", true);
    meta.push("timing_includes", "forward,backward,optimizer_step");
    meta.push("timing_excludes", "dataset_generation,file_io");
    meta.write(&args.out.join("metadata.txt"))?;
    Ok(())
}
