use crate::args::ForgetArgs;
use crate::commands::{join_usize, parse_norm, parse_seeds, parse_widths};
use crate::output::{fmt_f64, write_csv, Metadata};
use relukan::{run_forget, Error, ForgetConfig, ModelKind, Result, FORGET_CENTERS, FORGET_PHASES};

pub fn run(args: &ForgetArgs) -> Result<()> {
    let kind = ModelKind::parse(&args.model)?;
    let widths = parse_widths(&args.widths)?;
    if widths[0] != 1 || *widths.last().unwrap() != 1 {
        return Err(Error::Param(format!(
            "the forgetting protocol is one-dimensional; widths must start and end at 1, got {widths:?}"
        )));
    }
    let seeds = parse_seeds(&args.seeds)?;
    let norm_mode = parse_norm(&args.norm_mode)?;
    let cfg = ForgetConfig {
        widths,
        g: args.grid,
        k: args.span,
        norm_mode,
        lr: args.lr,
        seed: seeds[0],
        samples_per_phase: args.samples,
        iters_per_phase: args.iters,
        ..ForgetConfig::default()
    };
    let report = run_forget(kind, &cfg)?;
    std::fs::create_dir_all(&args.out)?;

    let mut header: Vec<String> = vec!["phase".to_string()];
    header.extend((1..=FORGET_PHASES).map(|r| format!("region{r}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rmse_rows: Vec<Vec<String>> = report
        .rmse
        .iter()
        .enumerate()
        .map(|(p, row)| {
            let mut out = vec![(p + 1).to_string()];
            out.extend(row.iter().map(|v| fmt_f64(*v)));
            out
        })
        .collect();
    write_csv(&args.out.join("rmse.csv"), &header_refs, &rmse_rows)?;

    for (p, pred) in report.preds_after_phase.iter().enumerate() {
        let rows: Vec<Vec<String>> = report
            .grid_x
            .iter()
            .zip(report.grid_target.iter())
            .zip(pred.iter())
            .map(|((x, t), y)| vec![fmt_f64(*x), fmt_f64(*t), fmt_f64(*y)])
            .collect();
        write_csv(
            &args.out.join(format!("phase-{}.csv", p + 1)),
            &["x", "target", "prediction"],
            &rows,
        )?;
    }

    let mut meta = Metadata::new("forget");
    meta.push("model", kind.name());
    meta.push("widths", join_usize(&cfg.widths));
    meta.push("grid", cfg.g);
    meta.push("span", cfg.k);
    meta.push("norm_mode", &args.norm_mode);
    meta.push("lr", fmt_f64(cfg.lr));
    meta.push("seed", cfg.seed);
    meta.push("phases", FORGET_PHASES);
    meta.push("samples_per_phase", cfg.samples_per_phase);
    meta.push("iters_per_phase", cfg.iters_per_phase);
    meta.push("grid_points", cfg.grid_points);
    meta.push("sigma", fmt_f64(cfg.sigma));
    meta.push(
        "centers",
        FORGET_CENTERS
            .iter()
            .map(|c| fmt_f64(*c))
            .collect::<Vec<_>>()
            .join(","),
    );
    meta.write(&args.out.join("metadata.txt"))?;
    Ok(())
}
