use crate::bspline::BsplineKanLayer;
use crate::error::Result;
use crate::loss::{mse, mse_grad};
use crate::matrix::Matrix;
use crate::network::{build, Layer, LayerGrads, ModelKind, NetConfig, Network};
use crate::relukan::{NormMode, ReluKanConfig, ReluKanLayer};
use crate::rng::{Rng, PROBE_STREAM};

#[derive(Clone, Copy, Debug)]
pub struct GradCheckConfig {
    pub seed: u64,
    /// Probes per single-layer suite.
    pub probes_layer: usize,
    /// Probes for the end-to-end network suite.
    pub probes_e2e: usize,
    pub h: f64,
    pub tol: f64,
    /// Minimum distance between any sampled coordinate and the nearest
    /// basis kink or knot; keeps central differences on one smooth piece.
    pub margin: f64,
    /// Test hook: negate every S-endpoint gradient before comparing, which
    /// must make the check fail. Proves the harness can catch a sign bug.
    pub flip_s_grad: bool,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            seed: 1,
            probes_layer: 100,
            probes_e2e: 50,
            h: 1e-6,
            tol: 1e-4,
            margin: 1e-3,
            flip_s_grad: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupReport {
    pub group: &'static str,
    pub probes: usize,
    /// Number of individual partial derivatives compared.
    pub checks: usize,
    pub max_rel_err: f64,
    pub passed: bool,
}

pub fn all_passed(reports: &[GroupReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

struct Tally {
    checks: usize,
    max_rel_err: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            max_rel_err: 0.0,
        }
    }

    fn record(&mut self, analytic: f64, numeric: f64) {
        self.checks += 1;
        let e = rel_err(analytic, numeric);
        if e > self.max_rel_err {
            self.max_rel_err = e;
        }
    }
}

fn min_dist_to_endpoints(x: &[f64], s: &Matrix, e: &Matrix) -> f64 {
    let mut best = f64::INFINITY;
    for (i, &xi) in x.iter().enumerate() {
        for j in 0..s.cols() {
            best = best
                .min((xi - s.get(i, j)).abs())
                .min((xi - e.get(i, j)).abs());
        }
    }
    best
}

fn min_dist_to_knots(x: &[f64], knots: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for &xi in x {
        for &t in knots {
            best = best.min((xi - t).abs());
        }
    }
    best
}

/// One ReLU-KAN layer, random shape, objective L = Σ_c λ_c·y_c.
/// Checks ∂L/∂W, ∂L/∂S, ∂L/∂E and ∂L/∂x; alternates norm modes.
fn relukan_layer_suite(cfg: &GradCheckConfig, rng: &mut Rng) -> Result<GroupReport> {
    let mut tally = Tally::new();
    for probe in 0..cfg.probes_layer {
        let n_in = 1 + rng.index(4);
        let n_out = 1 + rng.index(4);
        let g = 3 + rng.index(8);
        let k = rng.index(4);
        let mut lc = ReluKanConfig::new(n_in, n_out, g, k);
        lc.norm_mode = if probe % 2 == 0 {
            NormMode::Constant
        } else {
            NormMode::Dynamic
        };
        // probe at unit weight scale so every partial is comfortably above
        // the comparison floor of the relative-error denominator
        lc.init_scale = 1.0;
        let mut layer = ReluKanLayer::init(lc, rng)?;
        let lambda: Vec<f64> = (0..n_out)
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect::<Result<_>>()?;
        let mut x = vec![0.0; n_in];
        loop {
            for v in x.iter_mut() {
                *v = rng.uniform(0.0, 1.0)?;
            }
            if min_dist_to_endpoints(&x, &layer.s, &layer.e) >= cfg.margin {
                break;
            }
        }
        // analytic gradients
        let (_, cache) = layer.forward(&x)?;
        let mut grads = layer.new_grads();
        let mut gx = vec![0.0; n_in];
        layer.backward_acc(&cache, &lambda, &mut grads, &mut gx)?;
        if cfg.flip_s_grad {
            for v in grads.s.data_mut() {
                *v = -*v;
            }
        }
        let lam = lambda.clone();
        let objective_of = |layer: &ReluKanLayer, x: &[f64]| -> f64 {
            let (y, _) = layer.forward(x).unwrap();
            y.iter().zip(lam.iter()).map(|(a, b)| a * b).sum()
        };
        // weights
        for c in 0..n_out {
            for idx in 0..layer.w[c].data().len() {
                let saved = layer.w[c].data()[idx];
                layer.w[c].data_mut()[idx] = saved + cfg.h;
                let up = objective_of(&layer, &x);
                layer.w[c].data_mut()[idx] = saved - cfg.h;
                let dn = objective_of(&layer, &x);
                layer.w[c].data_mut()[idx] = saved;
                tally.record(grads.w[c].data()[idx], (up - dn) / (2.0 * cfg.h));
            }
        }
        // endpoints
        for idx in 0..layer.s.data().len() {
            let saved = layer.s.data()[idx];
            layer.s.data_mut()[idx] = saved + cfg.h;
            let up = objective_of(&layer, &x);
            layer.s.data_mut()[idx] = saved - cfg.h;
            let dn = objective_of(&layer, &x);
            layer.s.data_mut()[idx] = saved;
            tally.record(grads.s.data()[idx], (up - dn) / (2.0 * cfg.h));
        }
        for idx in 0..layer.e.data().len() {
            let saved = layer.e.data()[idx];
            layer.e.data_mut()[idx] = saved + cfg.h;
            let up = objective_of(&layer, &x);
            layer.e.data_mut()[idx] = saved - cfg.h;
            let dn = objective_of(&layer, &x);
            layer.e.data_mut()[idx] = saved;
            tally.record(grads.e.data()[idx], (up - dn) / (2.0 * cfg.h));
        }
        // input
        for i in 0..n_in {
            let saved = x[i];
            let mut xv = x.clone();
            xv[i] = saved + cfg.h;
            let up = objective_of(&layer, &xv);
            xv[i] = saved - cfg.h;
            let dn = objective_of(&layer, &xv);
            tally.record(gx[i], (up - dn) / (2.0 * cfg.h));
        }
    }
    Ok(GroupReport {
        group: "relukan-layer",
        probes: cfg.probes_layer,
        checks: tally.checks,
        max_rel_err: tally.max_rel_err,
        passed: tally.max_rel_err < cfg.tol,
    })
}

/// One B-spline layer, random shape, objective L = Σ_c λ_c·y_c.
/// Checks ∂L/∂c, ∂L/∂w_b, ∂L/∂w_s and ∂L/∂x.
fn bspline_layer_suite(cfg: &GradCheckConfig, rng: &mut Rng) -> Result<GroupReport> {
    let mut tally = Tally::new();
    for _ in 0..cfg.probes_layer {
        let n_in = 1 + rng.index(4);
        let n_out = 1 + rng.index(4);
        let g = 3 + rng.index(8);
        let k = rng.index(4);
        let mut layer = BsplineKanLayer::init(n_in, n_out, g, k, rng)?;
        let lambda: Vec<f64> = (0..n_out)
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect::<Result<_>>()?;
        let mut x = vec![0.0; n_in];
        loop {
            for v in x.iter_mut() {
                *v = rng.uniform(0.0, 1.0)?;
            }
            if min_dist_to_knots(&x, &layer.grid.knots) >= cfg.margin {
                break;
            }
        }
        let (_, cache) = layer.forward(&x)?;
        let mut grads = layer.new_grads();
        let mut gx = vec![0.0; n_in];
        layer.backward_acc(&cache, &lambda, &mut grads, &mut gx)?;
        let lam = lambda.clone();
        let objective_of = |layer: &BsplineKanLayer, x: &[f64]| -> f64 {
            let (y, _) = layer.forward(x).unwrap();
            y.iter().zip(lam.iter()).map(|(a, b)| a * b).sum()
        };
        for c in 0..n_out {
            for idx in 0..layer.c[c].data().len() {
                let saved = layer.c[c].data()[idx];
                layer.c[c].data_mut()[idx] = saved + cfg.h;
                let up = objective_of(&layer, &x);
                layer.c[c].data_mut()[idx] = saved - cfg.h;
                let dn = objective_of(&layer, &x);
                layer.c[c].data_mut()[idx] = saved;
                tally.record(grads.c[c].data()[idx], (up - dn) / (2.0 * cfg.h));
            }
        }
        for idx in 0..layer.w_b.data().len() {
            let saved = layer.w_b.data()[idx];
            layer.w_b.data_mut()[idx] = saved + cfg.h;
            let up = objective_of(&layer, &x);
            layer.w_b.data_mut()[idx] = saved - cfg.h;
            let dn = objective_of(&layer, &x);
            layer.w_b.data_mut()[idx] = saved;
            tally.record(grads.w_b.data()[idx], (up - dn) / (2.0 * cfg.h));
        }
        for idx in 0..layer.w_s.data().len() {
            let saved = layer.w_s.data()[idx];
            layer.w_s.data_mut()[idx] = saved + cfg.h;
            let up = objective_of(&layer, &x);
            layer.w_s.data_mut()[idx] = saved - cfg.h;
            let dn = objective_of(&layer, &x);
            layer.w_s.data_mut()[idx] = saved;
            tally.record(grads.w_s.data()[idx], (up - dn) / (2.0 * cfg.h));
        }
        for i in 0..n_in {
            let saved = x[i];
            let mut xv = x.clone();
            xv[i] = saved + cfg.h;
            let up = objective_of(&layer, &xv);
            xv[i] = saved - cfg.h;
            let dn = objective_of(&layer, &xv);
            tally.record(gx[i], (up - dn) / (2.0 * cfg.h));
        }
    }
    Ok(GroupReport {
        group: "bspline-layer",
        probes: cfg.probes_layer,
        checks: tally.checks,
        max_rel_err: tally.max_rel_err,
        passed: tally.max_rel_err < cfg.tol,
    })
}

fn net_mse(net: &Network, inputs: &Matrix, targets: &[f64]) -> f64 {
    let mut cache = net.new_cache();
    let mut y = vec![0.0; 1];
    let mut preds = vec![0.0; targets.len()];
    for s in 0..targets.len() {
        net.forward_into(inputs.row(s), &mut cache, &mut y).unwrap();
        preds[s] = y[0];
    }
    mse(&preds, targets).unwrap()
}

/// True when no sample, at input or hidden level, sits within `margin` of a
/// kink/knot of the layer it feeds.
fn net_samples_clear(net: &Network, inputs: &Matrix, margin: f64) -> bool {
    let mut cache = net.new_cache();
    let mut y = vec![0.0; 1];
    for s in 0..inputs.rows() {
        net.forward_into(inputs.row(s), &mut cache, &mut y).unwrap();
        for (l, layer) in net.layers.iter().enumerate() {
            let level = &cache.act[l];
            let clear = match layer {
                Layer::ReluKan(rl) => min_dist_to_endpoints(level, &rl.s, &rl.e) >= margin,
                Layer::Bspline(bl) => min_dist_to_knots(level, &bl.grid.knots) >= margin,
            };
            if !clear {
                return false;
            }
        }
    }
    true
}

/// Whole-network objective: mse over a small batch, gradients accumulated
/// per sample exactly the way the trainer does it.
fn e2e_suite(
    cfg: &GradCheckConfig,
    rng: &mut Rng,
    kind: ModelKind,
    group: &'static str,
    probes: usize,
) -> Result<GroupReport> {
    const BATCH: usize = 8;
    let mut tally = Tally::new();
    for probe in 0..probes {
        let mut nc = NetConfig::new(kind, vec![2, 3, 1], 5, 3);
        nc.init_scale = 1.0;
        if kind != ModelKind::Bspline {
            nc.norm_mode = if probe % 2 == 0 {
                NormMode::Constant
            } else {
                NormMode::Dynamic
            };
        }
        let mut net = build(nc, rng.index(1 << 30) as u64)?;
        // resample the batch until every level stays clear of kinks
        let mut inputs;
        loop {
            inputs = rng.uniform_matrix(0.0, 1.0, BATCH, 2)?;
            if net_samples_clear(&net, &inputs, cfg.margin) {
                break;
            }
        }
        let targets: Vec<f64> = (0..BATCH)
            .map(|_| rng.uniform(0.0, 1.0))
            .collect::<Result<_>>()?;
        // analytic pass
        let mut cache = net.new_cache();
        let mut grads = net.new_grads();
        let mut y = vec![0.0; 1];
        let mut preds = vec![0.0; BATCH];
        let mut input_grad_s0 = vec![0.0; 2];
        for s in 0..BATCH {
            net.forward_into(inputs.row(s), &mut cache, &mut y)?;
            preds[s] = y[0];
        }
        let mut gy_all = vec![0.0; BATCH];
        mse_grad(&preds, &targets, &mut gy_all)?;
        for s in 0..BATCH {
            net.forward_into(inputs.row(s), &mut cache, &mut y)?;
            net.backward_acc(&cache, &[gy_all[s]], &mut grads)?;
            if s == 0 {
                input_grad_s0.copy_from_slice(net.input_grad(&grads));
            }
        }
        if cfg.flip_s_grad {
            for lg in &mut grads.layer {
                if let LayerGrads::ReluKan(g) = lg {
                    for v in g.s.data_mut() {
                        *v = -*v;
                    }
                }
            }
        }
        // numeric pass over every parameter slot
        let shapes = net.param_shapes();
        for (slot_idx, &(rows, cols)) in shapes.iter().enumerate() {
            let n_entries = rows * cols;
            for idx in 0..n_entries {
                let analytic = collect_grad_values(&net.layers, &grads)[slot_idx].data()[idx];
                let saved = param_matrix_mut(&mut net.layers, slot_idx).data()[idx];
                param_matrix_mut(&mut net.layers, slot_idx).data_mut()[idx] = saved + cfg.h;
                let up = net_mse(&net, &inputs, &targets);
                param_matrix_mut(&mut net.layers, slot_idx).data_mut()[idx] = saved - cfg.h;
                let dn = net_mse(&net, &inputs, &targets);
                param_matrix_mut(&mut net.layers, slot_idx).data_mut()[idx] = saved;
                tally.record(analytic, (up - dn) / (2.0 * cfg.h));
            }
        }
        // input gradient on sample 0 (per-sample mse term only)
        for i in 0..2 {
            let saved = inputs.get(0, i);
            inputs.set(0, i, saved + cfg.h);
            let up = net_mse(&net, &inputs, &targets);
            inputs.set(0, i, saved - cfg.h);
            let dn = net_mse(&net, &inputs, &targets);
            inputs.set(0, i, saved);
            tally.record(input_grad_s0[i], (up - dn) / (2.0 * cfg.h));
        }
    }
    Ok(GroupReport {
        group,
        probes,
        checks: tally.checks,
        max_rel_err: tally.max_rel_err,
        passed: tally.max_rel_err < cfg.tol,
    })
}

/// Gradient matrices in slot order, borrowed for reading.
fn collect_grad_values<'a>(layers: &[Layer], grads: &'a crate::network::NetGrads) -> Vec<&'a Matrix> {
    let mut out = Vec::new();
    for (layer, lg) in layers.iter().zip(grads.layer.iter()) {
        match (layer, lg) {
            (Layer::ReluKan(_), LayerGrads::ReluKan(g)) => {
                for w in &g.w {
                    out.push(w);
                }
                out.push(&g.s);
                out.push(&g.e);
            }
            (Layer::Bspline(_), LayerGrads::Bspline(g)) => {
                for c in &g.c {
                    out.push(c);
                }
                out.push(&g.w_b);
                out.push(&g.w_s);
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Parameter matrix at a slot index, borrowed mutably.
fn param_matrix_mut(layers: &mut [Layer], slot: usize) -> &mut Matrix {
    let mut i = 0;
    for layer in layers.iter_mut() {
        match layer {
            Layer::ReluKan(l) => {
                for w in &mut l.w {
                    if i == slot {
                        return w;
                    }
                    i += 1;
                }
                if i == slot {
                    return &mut l.s;
                }
                i += 1;
                if i == slot {
                    return &mut l.e;
                }
                i += 1;
            }
            Layer::Bspline(l) => {
                for c in &mut l.c {
                    if i == slot {
                        return c;
                    }
                    i += 1;
                }
                if i == slot {
                    return &mut l.w_b;
                }
                i += 1;
                if i == slot {
                    return &mut l.w_s;
                }
                i += 1;
            }
        }
    }
    panic!("slot index out of range");
}

/// Runs all four suites and reports per-group worst-case relative error.
pub fn run_gradcheck(cfg: &GradCheckConfig) -> Result<Vec<GroupReport>> {
    let mut rng = Rng::substream(cfg.seed, PROBE_STREAM);
    let mut reports = Vec::with_capacity(4);
    reports.push(relukan_layer_suite(cfg, &mut rng)?);
    reports.push(bspline_layer_suite(cfg, &mut rng)?);
    reports.push(e2e_suite(
        cfg,
        &mut rng,
        ModelKind::ReluKan2,
        "relukan-e2e",
        cfg.probes_e2e,
    )?);
    reports.push(e2e_suite(
        cfg,
        &mut rng,
        ModelKind::Bspline,
        "bspline-e2e",
        cfg.probes_e2e / 2,
    )?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GradCheckConfig {
        GradCheckConfig {
            probes_layer: 10,
            probes_e2e: 4,
            ..GradCheckConfig::default()
        }
    }

    #[test]
    fn small_run_passes_all_groups() {
        let reports = run_gradcheck(&small()).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(
                r.passed,
                "{}: max rel err {} over {} checks",
                r.group, r.max_rel_err, r.checks
            );
            assert!(r.checks > 0);
        }
        assert!(all_passed(&reports));
    }

    #[test]
    fn sign_flip_hook_is_caught() {
        let cfg = GradCheckConfig {
            flip_s_grad: true,
            ..small()
        };
        let reports = run_gradcheck(&cfg).unwrap();
        let layer = reports.iter().find(|r| r.group == "relukan-layer").unwrap();
        assert!(!layer.passed, "flipped S gradient must fail the check");
        assert!(!all_passed(&reports));
        // the spline suites have no S endpoint and must stay green
        let bs = reports.iter().find(|r| r.group == "bspline-layer").unwrap();
        assert!(bs.passed);
    }

    #[test]
    fn deterministic_reports() {
        let a = run_gradcheck(&small()).unwrap();
        let b = run_gradcheck(&small()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.max_rel_err, y.max_rel_err);
            assert_eq!(x.checks, y.checks);
        }
    }
}
