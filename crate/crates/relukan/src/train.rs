use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::loss::mse;
use crate::network::Network;
use crate::optim::{Adam, AdamConfig};
use std::time::Instant;

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub iterations: usize,
}

impl TrainConfig {
    pub fn new(lr: f64, iterations: usize) -> Self {
        TrainConfig {
            adam: AdamConfig {
                lr,
                ..AdamConfig::default()
            },
            iterations,
        }
    }
}

/// Everything a single training run produces. `loss_history[i]` is the
/// full-batch MSE *before* step i+1, so entry 0 is the loss at
/// initialization; timing covers forward, backward and the optimizer step
/// but not dataset generation or file output.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub loss_history: Vec<f64>,
    pub per_iter_seconds: Vec<f64>,
    pub total_seconds: f64,
    pub final_train_mse: f64,
    pub final_test_mse: Option<f64>,
}

/// Mean squared error of the network over a dataset.
pub fn evaluate(net: &Network, data: &Dataset) -> Result<f64> {
    check_compat(net, data)?;
    let mut cache = net.new_cache();
    let mut y = vec![0.0; 1];
    let mut preds = vec![0.0; data.len()];
    for s in 0..data.len() {
        net.forward_into(data.inputs.row(s), &mut cache, &mut y)?;
        preds[s] = y[0];
    }
    mse(&preds, &data.targets)
}

fn check_compat(net: &Network, data: &Dataset) -> Result<()> {
    if net.n_out() != 1 {
        return Err(Error::Param(format!(
            "training expects a scalar output head, network has {}",
            net.n_out()
        )));
    }
    if data.inputs.cols() != net.n_in() {
        return Err(Error::Dim {
            op: "train dataset vs network input",
            lhs: (data.len(), data.inputs.cols()),
            rhs: (data.len(), net.n_in()),
        });
    }
    Ok(())
}

/// Full-batch Adam training. Every iteration accumulates per-sample
/// gradients of the mean-reduced MSE (∂L/∂pred_s = 2(pred_s − y_s)/N)
/// through one reused cache, then applies one optimizer step followed by a
/// width clamp. A non-finite loss aborts with the 1-based iteration number.
pub fn train(
    net: &mut Network,
    data: &Dataset,
    test: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<RunReport> {
    check_compat(net, data)?;
    if let Some(t) = test {
        check_compat(net, t)?;
    }
    let n = data.len();
    let mut adam = Adam::new(cfg.adam, &net.param_shapes());
    let mut cache = net.new_cache();
    let mut grads = net.new_grads();
    let mut y = vec![0.0; 1];
    let mut preds = vec![0.0; n];
    let mut loss_history = Vec::with_capacity(cfg.iterations);
    let mut per_iter_seconds = Vec::with_capacity(cfg.iterations);
    let started = Instant::now();
    for it in 0..cfg.iterations {
        let iter_started = Instant::now();
        grads.zero();
        let scale = 2.0 / n as f64;
        for s in 0..n {
            net.forward_into(data.inputs.row(s), &mut cache, &mut y)?;
            preds[s] = y[0];
            let gy = [scale * (y[0] - data.targets[s])];
            net.backward_acc(&cache, &gy, &mut grads)?;
        }
        let loss = mse(&preds, &data.targets)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite { iteration: it + 1 });
        }
        {
            let mut slots = net.param_slots(&grads);
            adam.step(&mut slots)?;
        }
        net.clamp_widths();
        loss_history.push(loss);
        per_iter_seconds.push(iter_started.elapsed().as_secs_f64());
    }
    let total_seconds = started.elapsed().as_secs_f64();
    let final_train_mse = evaluate(net, data)?;
    let final_test_mse = match test {
        Some(t) => Some(evaluate(net, t)?),
        None => None,
    };
    Ok(RunReport {
        loss_history,
        per_iter_seconds,
        total_seconds,
        final_train_mse,
        final_test_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{lookup, make_dataset, Suite};
    use crate::network::{build, Layer, ModelKind, NetConfig};
    use crate::rng::TEST_SEED_OFFSET;

    fn f1_net(seed: u64) -> Network {
        build(
            NetConfig::new(ModelKind::ReluKan2, vec![1, 1], 5, 3),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn zero_iterations_reports_initial_metrics() {
        let f = lookup(Suite::Fit, "f1").unwrap();
        let data = make_dataset(f, 64, 1).unwrap();
        let mut net = f1_net(1);
        let before = evaluate(&net, &data).unwrap();
        let report = train(&mut net, &data, None, &TrainConfig::new(1e-3, 0)).unwrap();
        assert!(report.loss_history.is_empty());
        assert!(report.per_iter_seconds.is_empty());
        assert_eq!(report.final_train_mse, before);
        assert_eq!(report.final_test_mse, None);
    }

    #[test]
    fn loss_drops_and_history_has_one_entry_per_iteration() {
        let f = lookup(Suite::Fit, "f1").unwrap();
        let data = make_dataset(f, 200, 2).unwrap();
        let test = make_dataset(f, 200, 2 + TEST_SEED_OFFSET).unwrap();
        let mut net = f1_net(2);
        let report = train(&mut net, &data, Some(&test), &TrainConfig::new(1e-3, 300)).unwrap();
        assert_eq!(report.loss_history.len(), 300);
        assert_eq!(report.per_iter_seconds.len(), 300);
        assert!(report.loss_history.iter().all(|l| l.is_finite()));
        let first = report.loss_history[0];
        let last = *report.loss_history.last().unwrap();
        assert!(
            last < 0.2 * first,
            "no meaningful progress: {first} -> {last}"
        );
        assert!(report.final_test_mse.unwrap().is_finite());
        assert!(report.total_seconds >= 0.0);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let f = lookup(Suite::Fit, "f1").unwrap();
        let run = || {
            let data = make_dataset(f, 100, 5).unwrap();
            let mut net = f1_net(5);
            train(&mut net, &data, None, &TrainConfig::new(1e-3, 50))
                .unwrap()
                .loss_history
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn poisoned_weights_abort_on_first_iteration() {
        let f = lookup(Suite::Fit, "f1").unwrap();
        let data = make_dataset(f, 32, 1).unwrap();
        let mut net = f1_net(1);
        if let Layer::ReluKan(l) = &mut net.layers[0] {
            l.w[0].set(0, 0, f64::NAN);
        }
        match train(&mut net, &data, None, &TrainConfig::new(1e-3, 10)) {
            Err(Error::NonFinite { iteration }) => assert_eq!(iteration, 1),
            other => panic!("expected non-finite abort, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_dataset_is_rejected() {
        let f4 = lookup(Suite::Fit, "f4").unwrap();
        let data = make_dataset(f4, 16, 1).unwrap();
        let mut net = f1_net(1);
        assert!(train(&mut net, &data, None, &TrainConfig::new(1e-3, 1)).is_err());
    }
}
