use std::path::Path;
use std::process::{Command, Output};

fn relukan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relukan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = relukan(&[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = relukan(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fit"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = relukan(&["fit", "--function", "f1", "--frobnicate", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_function_id_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "fit",
        "--function",
        "f9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("f9"), "stderr: {msg}");
    // failed validation must not leave files behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn mismatched_widths_fail_before_any_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "fit",
        "--function",
        "f4",
        "--widths",
        "3,5,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bench_rejects_fit_only_function_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "bench",
        "--function",
        "f6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_writes_expected_files_and_all_outputs_stay_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = relukan(&[
        "fit",
        "--function",
        "f1",
        "--model",
        "relukan2",
        "--iters",
        "50",
        "--samples",
        "64",
        "--seeds",
        "1,2,3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "summary.csv",
        "medians.csv",
        "metadata.txt",
        "curve-relukan2.csv",
        "loss-relukan2-seed1.csv",
        "loss-relukan2-seed2.csv",
        "loss-relukan2-seed3.csv",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    // everything the command created lives under --out
    let entries: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("run")]);
    let summary = read(&out_dir.join("summary.csv"));
    assert!(summary.starts_with("model,seed,final_train_mse,final_test_mse,seconds"));
    assert_eq!(summary.lines().count(), 1 + 3);
    let loss = read(&out_dir.join("loss-relukan2-seed1.csv"));
    assert_eq!(loss.lines().count(), 1 + 50);
    let meta = read(&out_dir.join("metadata.txt"));
    assert!(meta.contains("command=fit"));
    assert!(meta.contains("closed_form=sin(pi*x)"));
    assert!(meta.contains("arity_corrected=false"));
}

#[test]
fn fit_arity2_emits_scatter_instead_of_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "fit",
        "--function",
        "f4",
        "--model",
        "bspline",
        "--iters",
        "20",
        "--samples",
        "32",
        "--seeds",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("scatter-bspline.csv").exists());
    assert!(!dir.path().join("curve-bspline.csv").exists());
    let scatter = read(&dir.path().join("scatter-bspline.csv"));
    assert!(scatter.starts_with("target,prediction"));
    assert_eq!(scatter.lines().count(), 1 + 32);
}

#[test]
fn fit_zero_iterations_still_writes_valid_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "fit",
        "--function",
        "f1",
        "--model",
        "relukan1",
        "--iters",
        "0",
        "--samples",
        "32",
        "--seeds",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = read(&dir.path().join("summary.csv"));
    assert_eq!(summary.lines().count(), 2);
    let loss = read(&dir.path().join("loss-relukan1-seed1.csv"));
    assert_eq!(loss.lines().count(), 1); // header only
}

#[test]
fn fit_reruns_reproduce_non_timing_outputs_bit_identically() {
    let run = |dir: &Path| {
        let out = relukan(&[
            "fit",
            "--function",
            "f2",
            "--model",
            "relukan2",
            "--iters",
            "80",
            "--samples",
            "64",
            "--seeds",
            "1,2",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    for name in [
        "medians.csv",
        "metadata.txt",
        "curve-relukan2.csv",
        "loss-relukan2-seed1.csv",
        "loss-relukan2-seed2.csv",
    ] {
        assert_eq!(
            read(&a.path().join(name)),
            read(&b.path().join(name)),
            "{name} differs between reruns"
        );
    }
    // summary matches once the timing column is dropped
    let strip = |text: String| {
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(read(&a.path().join("summary.csv"))),
        strip(read(&b.path().join("summary.csv")))
    );
}

#[test]
fn bench_single_model_skips_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "bench",
        "--function",
        "f1",
        "--model",
        "relukan1",
        "--iters",
        "30",
        "--samples",
        "64",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("bench.csv").exists());
    assert!(!dir.path().join("ratios.csv").exists());
    let meta = read(&dir.path().join("metadata.txt"));
    assert!(meta.contains("cpu_only=true"));
    assert!(meta.contains("warmup_iterations_discarded=10"));
}

#[test]
fn bench_loss_columns_are_deterministic_across_reruns() {
    let run = |dir: &Path| {
        let out = relukan(&[
            "bench",
            "--function",
            "f2",
            "--iters",
            "40",
            "--samples",
            "64",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    let losses = |dir: &Path| {
        read(&dir.join("bench.csv"))
            .lines()
            .skip(1)
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                // function, model, seed, loss_first, loss_final
                cols[..5].join(",")
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(losses(a.path()), losses(b.path()));
}

#[test]
fn forget_writes_phase_grids_and_rmse_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "forget",
        "--grid",
        "100",
        "--iters",
        "60",
        "--samples",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rmse = read(&dir.path().join("rmse.csv"));
    assert!(rmse.starts_with("phase,region1,region2,region3,region4,region5"));
    assert_eq!(rmse.lines().count(), 1 + 5);
    for p in 1..=5 {
        let grid = read(&dir.path().join(format!("phase-{p}.csv")));
        assert!(grid.starts_with("x,target,prediction"));
        assert_eq!(grid.lines().count(), 1 + 1000);
    }
}

#[test]
fn forget_rejects_multivariate_widths() {
    let dir = tempfile::tempdir().unwrap();
    let out = relukan(&[
        "forget",
        "--widths",
        "2,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gradcheck_seed_changes_probes_but_not_verdict() {
    let a = relukan(&["gradcheck", "--seeds", "1"]);
    let b = relukan(&["gradcheck", "--seeds", "99"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(
        String::from_utf8_lossy(&a.stdout),
        String::from_utf8_lossy(&b.stdout)
    );
}

#[test]
fn gradcheck_stdout_is_deterministic_for_a_seed() {
    let a = relukan(&["gradcheck", "--seeds", "7"]);
    let b = relukan(&["gradcheck", "--seeds", "7"]);
    assert_eq!(
        String::from_utf8_lossy(&a.stdout),
        String::from_utf8_lossy(&b.stdout)
    );
}
