use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::ParamSlot;

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction; ε sits outside the square root:
///   θ ← θ − lr·m̂ / (√v̂ + ε)
/// First/second-moment state is kept per parameter slot in the order the
/// network exposes them; frozen slots keep zero state and are never touched.
pub struct Adam {
    pub cfg: AdamConfig,
    t: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        let m = shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect();
        let v = shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect();
        Adam { cfg, t: 0, m, v }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, slots: &mut [ParamSlot<'_>]) -> Result<()> {
        if slots.len() != self.m.len() {
            return Err(Error::Contract("optimizer state does not match slot count"));
        }
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - self.cfg.beta1.powf(t);
        let bc2 = 1.0 - self.cfg.beta2.powf(t);
        for (idx, slot) in slots.iter_mut().enumerate() {
            if !slot.trainable {
                continue;
            }
            if slot.value.shape() != self.m[idx].shape() {
                return Err(Error::Contract("optimizer state shape mismatch"));
            }
            let m = self.m[idx].data_mut();
            let v = self.v[idx].data_mut();
            let g = slot.grad.data();
            let p = slot.value.data_mut();
            for i in 0..p.len() {
                m[i] = self.cfg.beta1 * m[i] + (1.0 - self.cfg.beta1) * g[i];
                v[i] = self.cfg.beta2 * v[i] + (1.0 - self.cfg.beta2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p[i] -= self.cfg.lr * mhat / (vhat.sqrt() + self.cfg.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot_over<'a>(value: &'a mut Matrix, grad: &'a Matrix, trainable: bool) -> ParamSlot<'a> {
        ParamSlot {
            value,
            grad,
            trainable,
        }
    }

    #[test]
    fn first_step_with_unit_gradient_moves_by_lr() {
        // m̂ = 1, v̂ = 1 at t = 1, so Δθ = −lr/(1+ε) ≈ −lr
        let mut value = Matrix::filled(1, 1, 0.5);
        let grad = Matrix::filled(1, 1, 1.0);
        let mut adam = Adam::new(
            AdamConfig {
                lr: 0.1,
                ..AdamConfig::default()
            },
            &[(1, 1)],
        );
        let mut slots = vec![slot_over(&mut value, &grad, true)];
        adam.step(&mut slots).unwrap();
        let got = value.get(0, 0);
        assert!((got - 0.4).abs() < 1e-8, "{got}");
    }

    #[test]
    fn zero_gradient_fresh_state_is_noop() {
        let mut value = Matrix::filled(2, 3, 1.25);
        let grad = Matrix::zeros(2, 3);
        let mut adam = Adam::new(AdamConfig::default(), &[(2, 3)]);
        let mut slots = vec![slot_over(&mut value, &grad, true)];
        adam.step(&mut slots).unwrap();
        assert!(value.iter().all(|&v| v == 1.25));
    }

    #[test]
    fn frozen_slots_never_move() {
        let mut value = Matrix::filled(1, 4, 2.0);
        let grad = Matrix::filled(1, 4, 3.0);
        let mut adam = Adam::new(AdamConfig::default(), &[(1, 4)]);
        for _ in 0..5 {
            let mut slots = vec![slot_over(&mut value, &grad, false)];
            adam.step(&mut slots).unwrap();
        }
        assert!(value.iter().all(|&v| v == 2.0));
        assert_eq!(adam.steps_taken(), 5);
    }

    #[test]
    fn constant_gradient_steps_stay_near_lr() {
        // with a constant gradient, m̂/√v̂ stays 1 so every step is ≈ lr
        let mut value = Matrix::filled(1, 1, 0.0);
        let grad = Matrix::filled(1, 1, 7.5);
        let mut adam = Adam::new(
            AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            &[(1, 1)],
        );
        for i in 1..=50 {
            let mut slots = vec![slot_over(&mut value, &grad, true)];
            adam.step(&mut slots).unwrap();
            let expect = -0.01 * i as f64;
            assert!((value.get(0, 0) - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic_given_same_inputs() {
        let run = || {
            let mut value = Matrix::filled(2, 2, 0.3);
            let mut adam = Adam::new(AdamConfig::default(), &[(2, 2)]);
            for step in 0..20 {
                let grad = Matrix::from_fn(2, 2, |r, c| {
                    ((r + c + step) as f64 * 0.37).sin()
                });
                let mut slots = vec![slot_over(&mut value, &grad, true)];
                adam.step(&mut slots).unwrap();
            }
            value
        };
        assert_eq!(run(), run());
    }
}
