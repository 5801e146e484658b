use crate::dataset::{forget_region, forget_target, make_forget_phase, FORGET_PHASES};
use crate::error::Result;
use crate::network::{build, ModelKind, NetConfig, Network};
use crate::relukan::NormMode;
use crate::train::{train, TrainConfig};

/// Continual-learning protocol settings. The grid size G is much larger and
/// the order k much smaller than in the fitting experiments: narrow bases
/// are what keeps weight updates local, which is the effect under study.
#[derive(Clone, Debug)]
pub struct ForgetConfig {
    pub widths: Vec<usize>,
    pub g: usize,
    pub k: usize,
    pub norm_mode: NormMode,
    pub lr: f64,
    pub seed: u64,
    pub samples_per_phase: usize,
    pub iters_per_phase: usize,
    pub grid_points: usize,
    pub sigma: f64,
}

impl Default for ForgetConfig {
    fn default() -> Self {
        ForgetConfig {
            widths: vec![1, 1],
            g: 400,
            k: 1,
            norm_mode: NormMode::Constant,
            lr: 1e-3,
            seed: 1,
            samples_per_phase: 300,
            iters_per_phase: 500,
            grid_points: 1000,
            sigma: 0.04,
        }
    }
}

/// Results of one sequential-phase run. `rmse[p][r]` is the RMSE on region
/// r's slice of the evaluation grid measured right after training phase p
/// (both 0-based); `preds_after_phase[p]` is the full-grid prediction at
/// that same moment.
#[derive(Clone, Debug)]
pub struct ForgetReport {
    pub grid_x: Vec<f64>,
    pub grid_target: Vec<f64>,
    pub preds_after_phase: Vec<Vec<f64>>,
    pub rmse: Vec<Vec<f64>>,
}

fn predict_grid(net: &Network, grid_x: &[f64]) -> Result<Vec<f64>> {
    let mut cache = net.new_cache();
    let mut y = vec![0.0; 1];
    let mut out = Vec::with_capacity(grid_x.len());
    for &x in grid_x {
        net.forward_into(&[x], &mut cache, &mut y)?;
        out.push(y[0]);
    }
    Ok(out)
}

fn region_rmse(grid_x: &[f64], target: &[f64], pred: &[f64], region: usize) -> f64 {
    let (lo, hi) = forget_region(region);
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..grid_x.len() {
        if grid_x[i] >= lo && grid_x[i] < hi {
            let d = pred[i] - target[i];
            sum += d * d;
            count += 1;
        }
    }
    (sum / count as f64).sqrt()
}

/// Trains one network through the five phases in order, with a fresh
/// optimizer per phase (momentum from one region must not leak into the
/// next), and measures the full phase×region RMSE matrix.
pub fn run_forget(kind: ModelKind, cfg: &ForgetConfig) -> Result<ForgetReport> {
    let mut net_cfg = NetConfig::new(kind, cfg.widths.clone(), cfg.g, cfg.k);
    net_cfg.norm_mode = cfg.norm_mode;
    let mut net = build(net_cfg, cfg.seed)?;
    let grid_x: Vec<f64> = (0..cfg.grid_points)
        .map(|t| (t as f64 + 0.5) / cfg.grid_points as f64)
        .collect();
    let grid_target: Vec<f64> = grid_x.iter().map(|&x| forget_target(x, cfg.sigma)).collect();
    let train_cfg = TrainConfig::new(cfg.lr, cfg.iters_per_phase);
    let mut preds_after_phase = Vec::with_capacity(FORGET_PHASES);
    let mut rmse = Vec::with_capacity(FORGET_PHASES);
    for phase in 0..FORGET_PHASES {
        let data = make_forget_phase(phase, cfg.samples_per_phase, cfg.seed, cfg.sigma)?;
        train(&mut net, &data, None, &train_cfg)?;
        let pred = predict_grid(&net, &grid_x)?;
        let row: Vec<f64> = (0..FORGET_PHASES)
            .map(|r| region_rmse(&grid_x, &grid_target, &pred, r))
            .collect();
        preds_after_phase.push(pred);
        rmse.push(row);
    }
    Ok(ForgetReport {
        grid_x,
        grid_target,
        preds_after_phase,
        rmse,
    })
}
