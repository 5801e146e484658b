use crate::args::FitArgs;
use crate::commands::{join_u64, join_usize, parse_norm, parse_seeds, parse_widths, resolve_models};
use crate::output::{fmt_f64, median, write_csv, Metadata};
use relukan::{
    build, lookup, make_dataset, train, Dataset, Error, ModelKind, NetConfig, Network, Result,
    Suite, TargetFunction, TrainConfig, TEST_SEED_OFFSET,
};
use std::path::Path;

const CURVE_POINTS: usize = 401;

pub fn run(args: &FitArgs) -> Result<()> {
    let f = lookup(Suite::Fit, &args.function)?;
    let models = resolve_models(args.model.as_deref())?;
    let widths = match &args.widths {
        Some(s) => parse_widths(s)?,
        None => f.widths.to_vec(),
    };
    // reject shape mismatches before any training starts
    if widths[0] != f.arity {
        return Err(Error::Param(format!(
            "function {} takes {} input(s) but widths start at {}",
            f.id, f.arity, widths[0]
        )));
    }
    if *widths.last().unwrap() != 1 {
        return Err(Error::Param(format!(
            "fitting targets are scalar; widths must end at 1, got {widths:?}"
        )));
    }
    let g = args.grid.unwrap_or(f.g);
    let k = args.span.unwrap_or(f.k);
    let seeds = parse_seeds(&args.seeds)?;
    let norm = parse_norm(&args.norm_mode)?;
    std::fs::create_dir_all(&args.out)?;

    let mut summary_rows = Vec::new();
    let mut median_rows = Vec::new();
    for &kind in &models {
        let mut train_mses = Vec::with_capacity(seeds.len());
        let mut test_mses = Vec::with_capacity(seeds.len());
        for (i, &seed) in seeds.iter().enumerate() {
            let data = make_dataset(f, args.samples, seed)?;
            let test = make_dataset(f, args.samples, seed + TEST_SEED_OFFSET)?;
            let mut nc = NetConfig::new(kind, widths.clone(), g, k);
            nc.norm_mode = norm;
            nc.init_scale = args.init_scale;
            let mut net = build(nc, seed)?;
            let report = train(
                &mut net,
                &data,
                Some(&test),
                &TrainConfig::new(args.lr, args.iters),
            )?;
            let loss_rows: Vec<Vec<String>> = report
                .loss_history
                .iter()
                .enumerate()
                .map(|(it, l)| vec![(it + 1).to_string(), fmt_f64(*l)])
                .collect();
            write_csv(
                &args.out.join(format!("loss-{}-seed{}.csv", kind.name(), seed)),
                &["iteration", "loss"],
                &loss_rows,
            )?;
            let test_mse = report.final_test_mse.expect("trained with a test set");
            summary_rows.push(vec![
                kind.name().to_string(),
                seed.to_string(),
                fmt_f64(report.final_train_mse),
                fmt_f64(test_mse),
                fmt_f64(report.total_seconds),
            ]);
            train_mses.push(report.final_train_mse);
            test_mses.push(test_mse);
            if i == 0 {
                write_viz(&args.out, f, kind, &net, &test)?;
            }
        }
        median_rows.push(vec![
            kind.name().to_string(),
            fmt_f64(median(&train_mses)),
            fmt_f64(median(&test_mses)),
        ]);
    }
    write_csv(
        &args.out.join("summary.csv"),
        &["model", "seed", "final_train_mse", "final_test_mse", "seconds"],
        &summary_rows,
    )?;
    write_csv(
        &args.out.join("medians.csv"),
        &["model", "median_final_train_mse", "median_final_test_mse"],
        &median_rows,
    )?;

    let mut meta = Metadata::new("fit");
    meta.push("suite", "fit");
    meta.push("function", f.id);
    meta.push("closed_form", f.closed_form);
    meta.push("arity", f.arity);
    meta.push("widths", join_usize(&widths));
    meta.push("nominal_widths", join_usize(f.nominal_widths));
    meta.push("arity_corrected", f.arity_corrected());
    meta.push("grid", g);
    meta.push("span", k);
    meta.push("norm_mode", &args.norm_mode);
    meta.push(
        "norm_constant",
        fmt_f64(relukan::ReluKanConfig::new(1, 1, g, k).norm_constant()),
    );
    meta.push("init_scale", fmt_f64(args.init_scale));
    meta.push("iters", args.iters);
    meta.push("samples", args.samples);
    meta.push("lr", fmt_f64(args.lr));
    meta.push("seeds", join_u64(&seeds));
    meta.push("test_seed_offset", TEST_SEED_OFFSET);
    meta.push(
        "models",
        models
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
    );
    if f.arity == 1 {
        meta.push("curve_points", CURVE_POINTS);
    }
    meta.write(&args.out.join("metadata.txt"))?;
    Ok(())
}

/// Visualization data from the first seed's trained model: a dense
/// (x, target, prediction) grid for scalar inputs, a (target, prediction)
/// scatter over the test set otherwise.
fn write_viz(
    out: &Path,
    f: &TargetFunction,
    kind: ModelKind,
    net: &Network,
    test: &Dataset,
) -> Result<()> {
    let mut cache = net.new_cache();
    let mut y = vec![0.0; 1];
    if f.arity == 1 {
        let mut rows = Vec::with_capacity(CURVE_POINTS);
        for t in 0..CURVE_POINTS {
            let x = t as f64 / (CURVE_POINTS - 1) as f64;
            net.forward_into(&[x], &mut cache, &mut y)?;
            rows.push(vec![
                fmt_f64(x),
                fmt_f64((f.eval)(&[x])),
                fmt_f64(y[0]),
            ]);
        }
        write_csv(
            &out.join(format!("curve-{}.csv", kind.name())),
            &["x", "target", "prediction"],
            &rows,
        )
    } else {
        let mut rows = Vec::with_capacity(test.len());
        for s in 0..test.len() {
            net.forward_into(test.inputs.row(s), &mut cache, &mut y)?;
            rows.push(vec![fmt_f64(test.targets[s]), fmt_f64(y[0])]);
        }
        write_csv(
            &out.join(format!("scatter-{}.csv", kind.name())),
            &["target", "prediction"],
            &rows,
        )
    }
}
