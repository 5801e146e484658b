use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{Rng, DATASET_STREAM};
use std::f64::consts::PI;

/// The two experiment families keep separate function id namespaces: the
/// fitting-accuracy targets and the speed-benchmark targets overlap in id
/// but not in definition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fit,
    Speed,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Fit => "fit",
            Suite::Speed => "speed",
        }
    }
}

/// One benchmark target: closed form, sampling arity, and the network shape
/// used for it. `widths` is the shape actually trained; `nominal_widths` is
/// the shape as published, which for two single-variable fitting targets
/// lists an input width larger than the function's arity (kept for the
/// record, corrected in `widths`).
pub struct TargetFunction {
    pub id: &'static str,
    pub suite: Suite,
    pub arity: usize,
    pub widths: &'static [usize],
    pub nominal_widths: &'static [usize],
    pub g: usize,
    pub k: usize,
    pub closed_form: &'static str,
    pub eval: fn(&[f64]) -> f64,
}

impl TargetFunction {
    pub fn arity_corrected(&self) -> bool {
        self.widths != self.nominal_widths
    }
}

fn fit_f1(x: &[f64]) -> f64 {
    (PI * x[0]).sin()
}
fn fit_f2(x: &[f64]) -> f64 {
    (5.0 * PI * x[0]).sin() + x[0]
}
fn fit_f3(x: &[f64]) -> f64 {
    x[0].exp()
}
fn fit_f4(x: &[f64]) -> f64 {
    (PI * x[0] + PI * x[1]).sin()
}
fn fit_f5(x: &[f64]) -> f64 {
    ((PI * x[0]).sin() + x[1] * x[1]).exp()
}
fn fit_f6(x: &[f64]) -> f64 {
    ((PI * x[0] * x[0] + PI * x[1] * x[1]).sin()
        + (PI * x[2] * x[2] + PI * x[3] * x[3]).sin())
    .exp()
}

fn speed_f2(x: &[f64]) -> f64 {
    (PI * x[0] + PI * x[1]).sin()
}
fn speed_f3(x: &[f64]) -> f64 {
    (x[0] + x[0] * x[1] + x[1] * x[1]).atan()
}
fn speed_f5(x: &[f64]) -> f64 {
    ((x[0] * x[0] + x[1] * x[1]).sin() + (x[2] * x[2] + x[3] * x[3]).sin()).exp()
}

pub static FIT_SUITE: [TargetFunction; 6] = [
    TargetFunction {
        id: "f1",
        suite: Suite::Fit,
        arity: 1,
        widths: &[1, 1],
        nominal_widths: &[1, 1],
        g: 5,
        k: 3,
        closed_form: "sin(pi*x)",
        eval: fit_f1,
    },
    TargetFunction {
        id: "f2",
        suite: Suite::Fit,
        arity: 1,
        widths: &[1, 1],
        nominal_widths: &[2, 1],
        g: 5,
        k: 3,
        closed_form: "sin(5*pi*x) + x",
        eval: fit_f2,
    },
    TargetFunction {
        id: "f3",
        suite: Suite::Fit,
        arity: 1,
        widths: &[1, 1, 1],
        nominal_widths: &[2, 1, 1],
        g: 5,
        k: 3,
        closed_form: "exp(x)",
        eval: fit_f3,
    },
    TargetFunction {
        id: "f4",
        suite: Suite::Fit,
        arity: 2,
        widths: &[2, 5, 1],
        nominal_widths: &[2, 5, 1],
        g: 5,
        k: 3,
        closed_form: "sin(pi*x1 + pi*x2)",
        eval: fit_f4,
    },
    TargetFunction {
        id: "f5",
        suite: Suite::Fit,
        arity: 2,
        widths: &[2, 5, 1],
        nominal_widths: &[2, 5, 1],
        g: 5,
        k: 3,
        closed_form: "exp(sin(pi*x1) + x2^2)",
        eval: fit_f5,
    },
    TargetFunction {
        id: "f6",
        suite: Suite::Fit,
        arity: 4,
        widths: &[4, 4, 2, 1],
        nominal_widths: &[4, 4, 2, 1],
        g: 10,
        k: 3,
        closed_form: "exp(sin(pi*(x1^2+x2^2)) + sin(pi*(x3^2+x4^2)))",
        eval: fit_f6,
    },
];

pub static SPEED_SUITE: [TargetFunction; 5] = [
    TargetFunction {
        id: "f1",
        suite: Suite::Speed,
        arity: 1,
        widths: &[1, 1],
        nominal_widths: &[1, 1],
        g: 5,
        k: 3,
        closed_form: "sin(pi*x)",
        eval: fit_f1,
    },
    TargetFunction {
        id: "f2",
        suite: Suite::Speed,
        arity: 2,
        widths: &[2, 1],
        nominal_widths: &[2, 1],
        g: 5,
        k: 3,
        closed_form: "sin(pi*x1 + pi*x2)",
        eval: speed_f2,
    },
    TargetFunction {
        id: "f3",
        suite: Suite::Speed,
        arity: 2,
        widths: &[2, 1, 1],
        nominal_widths: &[2, 1, 1],
        g: 5,
        k: 3,
        closed_form: "arctan(x1 + x1*x2 + x2^2)",
        eval: speed_f3,
    },
    TargetFunction {
        id: "f4",
        suite: Suite::Speed,
        arity: 2,
        widths: &[2, 5, 1],
        nominal_widths: &[2, 5, 1],
        g: 5,
        k: 3,
        closed_form: "exp(sin(pi*x1) + x2^2)",
        eval: fit_f5,
    },
    TargetFunction {
        id: "f5",
        suite: Suite::Speed,
        arity: 4,
        widths: &[4, 4, 2, 1],
        nominal_widths: &[4, 4, 2, 1],
        g: 10,
        k: 3,
        closed_form: "exp(sin(x1^2 + x2^2) + sin(x3^2 + x4^2))",
        eval: speed_f5,
    },
];

pub fn suite_functions(suite: Suite) -> &'static [TargetFunction] {
    match suite {
        Suite::Fit => &FIT_SUITE,
        Suite::Speed => &SPEED_SUITE,
    }
}

pub fn lookup(suite: Suite, id: &str) -> Result<&'static TargetFunction> {
    suite_functions(suite)
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| {
            let ids: Vec<&str> = suite_functions(suite).iter().map(|f| f.id).collect();
            Error::Param(format!(
                "unknown {} function '{id}' (expected one of {})",
                suite.name(),
                ids.join(", ")
            ))
        })
}

/// A sampled regression set: inputs are n×arity, row per sample.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub inputs: Matrix,
    pub targets: Vec<f64>,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Uniform samples on [0,1]^arity with targets from the closed form.
/// Draws come from a dedicated RNG substream so dataset sampling never
/// collides with weight initialization at the same seed.
pub fn make_dataset(f: &TargetFunction, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Param("dataset size must be >= 1".into()));
    }
    let mut rng = Rng::substream(seed, DATASET_STREAM);
    let mut inputs = Matrix::zeros(n, f.arity);
    let mut targets = vec![0.0; n];
    let mut row = vec![0.0; f.arity];
    for s in 0..n {
        for (a, v) in row.iter_mut().enumerate() {
            *v = rng.uniform(0.0, 1.0)?;
            inputs.set(s, a, *v);
        }
        targets[s] = (f.eval)(&row);
    }
    Ok(Dataset {
        inputs,
        targets,
        seed,
    })
}

/// Bump centers of the five-peak continual-learning target.
pub const FORGET_CENTERS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const FORGET_PHASES: usize = 5;

/// Sum of five Gaussian bumps: Σ_i exp(−(x−c_i)²/(2σ²)).
pub fn forget_target(x: f64, sigma: f64) -> f64 {
    let two_s2 = 2.0 * sigma * sigma;
    FORGET_CENTERS
        .iter()
        .map(|c| (-(x - c) * (x - c) / two_s2).exp())
        .sum()
}

/// Support interval of phase p (0-based): [p/5, (p+1)/5].
pub fn forget_region(phase: usize) -> (f64, f64) {
    (
        phase as f64 / FORGET_PHASES as f64,
        (phase + 1) as f64 / FORGET_PHASES as f64,
    )
}

/// Training samples for one phase, drawn uniformly from that phase's
/// interval only. Each (seed, phase) pair gets an independent stream.
pub fn make_forget_phase(phase: usize, n: usize, seed: u64, sigma: f64) -> Result<Dataset> {
    if phase >= FORGET_PHASES {
        return Err(Error::Param(format!(
            "phase must be 0..{FORGET_PHASES}, got {phase}"
        )));
    }
    if n == 0 {
        return Err(Error::Param("dataset size must be >= 1".into()));
    }
    let (lo, hi) = forget_region(phase);
    let phase_seed = seed * 1000 + phase as u64;
    let mut rng = Rng::substream(phase_seed, DATASET_STREAM);
    let mut inputs = Matrix::zeros(n, 1);
    let mut targets = vec![0.0; n];
    for s in 0..n {
        let x = rng.uniform(lo, hi)?;
        inputs.set(s, 0, x);
        targets[s] = forget_target(x, sigma);
    }
    Ok(Dataset {
        inputs,
        targets,
        seed: phase_seed,
    })
}
