use crate::error::{Error, Result};

/// Mean squared error over flat prediction/target slices.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Param(format!(
            "mse length mismatch: {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Param("mse over empty slices".into()));
    }
    let n = pred.len() as f64;
    let sum: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / n)
}

/// ∂mse/∂pred_i = 2·(pred_i − target_i)/N, written into `out`.
pub fn mse_grad(pred: &[f64], target: &[f64], out: &mut [f64]) -> Result<()> {
    if pred.len() != target.len() || pred.len() != out.len() {
        return Err(Error::Param(format!(
            "mse_grad length mismatch: pred {}, target {}, out {}",
            pred.len(),
            target.len(),
            out.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Param("mse_grad over empty slices".into()));
    }
    let scale = 2.0 / pred.len() as f64;
    for i in 0..pred.len() {
        out[i] = scale * (pred[i] - target[i]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_is_zero() {
        assert_eq!(mse(&[1.0, -2.0, 0.5], &[1.0, -2.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn unit_differences_average_to_one() {
        assert_eq!(mse(&[1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn worked_example() {
        // (0−1)² + (2−0)² = 5, /2 = 2.5
        assert_eq!(mse(&[0.0, 2.0], &[1.0, 0.0]).unwrap(), 2.5);
    }

    #[test]
    fn grad_worked_example() {
        let mut g = [0.0; 2];
        mse_grad(&[0.0, 2.0], &[1.0, 0.0], &mut g).unwrap();
        assert_eq!(g, [-1.0, 2.0]);
    }

    #[test]
    fn grad_matches_finite_difference() {
        let pred = [0.2, -0.7, 1.3];
        let target = [0.0, 0.1, 1.0];
        let mut g = [0.0; 3];
        mse_grad(&pred, &target, &mut g).unwrap();
        let h = 1e-7;
        for i in 0..3 {
            let mut p = pred;
            p[i] += h;
            let up = mse(&p, &target).unwrap();
            p[i] -= 2.0 * h;
            let dn = mse(&p, &target).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_and_mismatched_inputs_error() {
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        let mut g = [0.0; 1];
        assert!(mse_grad(&[1.0, 2.0], &[1.0, 2.0], &mut g).is_err());
    }
}
