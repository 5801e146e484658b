use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// σ(x) and x·σ(x) (SiLU) used by the spline layer's residual path.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

/// d/dx [x·σ(x)] = σ(x)·(1 + x·(1−σ(x)))
#[inline]
pub fn dsilu(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// Uniform extended knot vector on [0,1]: t_j = (j−k)/G for j = 0..G+2k,
/// giving G+k degree-k basis functions.
#[derive(Clone, Debug)]
pub struct BsplineGrid {
    pub g: usize,
    pub k: usize,
    pub knots: Vec<f64>,
}

impl BsplineGrid {
    pub fn new(g: usize, k: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::Param("grid count G must be >= 1".into()));
        }
        let gf = g as f64;
        let kf = k as f64;
        let knots = (0..=g + 2 * k)
            .map(|j| (j as f64 - kf) / gf)
            .collect();
        Ok(BsplineGrid { g, k, knots })
    }

    pub fn n_basis(&self) -> usize {
        self.g + self.k
    }

    /// Support midpoint of basis i (0-based): (2i+1−k)/(2G).
    pub fn center(&self, i: usize) -> f64 {
        (2.0 * i as f64 + 1.0 - self.k as f64) / (2.0 * self.g as f64)
    }

    /// Evaluates all G+k degree-k basis values at x into `out` via the
    /// iterative Cox–de Boor recurrence. Degree-0 indicators are
    /// right-continuous: N_i,0(x) = 1[t_i ≤ x < t_{i+1}].
    pub fn basis_into(&self, x: f64, out: &mut [f64]) -> Result<()> {
        let n = self.n_basis();
        if out.len() != n {
            return Err(Error::Contract("basis output buffer has wrong length"));
        }
        let k = self.k;
        let t = &self.knots;
        // degree-0 layer over all G+2k intervals
        let mut lower = vec![0.0; n + k];
        for (i, v) in lower.iter_mut().enumerate() {
            *v = if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        for d in 1..=k {
            // after this pass entries 0..n+k−d hold degree-d values
            for i in 0..n + k - d {
                let den_l = t[i + d] - t[i];
                let den_r = t[i + d + 1] - t[i + 1];
                let left = if den_l != 0.0 {
                    (x - t[i]) / den_l * lower[i]
                } else {
                    0.0
                };
                let right = if den_r != 0.0 {
                    (t[i + d + 1] - x) / den_r * lower[i + 1]
                } else {
                    0.0
                };
                lower[i] = left + right;
            }
        }
        out.copy_from_slice(&lower[..n]);
        Ok(())
    }

    /// Derivatives of all degree-k bases at x:
    /// N'_{i,k}(x) = k·[N_{i,k−1}/(t_{i+k}−t_i) − N_{i+1,k−1}/(t_{i+k+1}−t_{i+1})].
    /// Degree 0 yields all zeros (piecewise constant).
    pub fn basis_derivative_into(&self, x: f64, out: &mut [f64]) -> Result<()> {
        let n = self.n_basis();
        if out.len() != n {
            return Err(Error::Contract("derivative output buffer has wrong length"));
        }
        let k = self.k;
        if k == 0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let t = &self.knots;
        // degree k−1 values for bases 0..n+1
        let mut low = vec![0.0; n + k];
        for (i, v) in low.iter_mut().enumerate() {
            *v = if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        for d in 1..k {
            for i in 0..n + k - d {
                let den_l = t[i + d] - t[i];
                let den_r = t[i + d + 1] - t[i + 1];
                let left = if den_l != 0.0 {
                    (x - t[i]) / den_l * low[i]
                } else {
                    0.0
                };
                let right = if den_r != 0.0 {
                    (t[i + d + 1] - x) / den_r * low[i + 1]
                } else {
                    0.0
                };
                low[i] = left + right;
            }
        }
        let kf = k as f64;
        for i in 0..n {
            let den_l = t[i + k] - t[i];
            let den_r = t[i + k + 1] - t[i + 1];
            let left = if den_l != 0.0 { low[i] / den_l } else { 0.0 };
            let right = if den_r != 0.0 { low[i + 1] / den_r } else { 0.0 };
            out[i] = kf * (left - right);
        }
        Ok(())
    }
}

/// One KAN layer with B-spline edge functions
/// φ(x) = w_b·silu(x) + w_s·Σ_i c_i·B_i(x); knots stay fixed, coefficients
/// c and the two scalar gains per edge are trainable.
#[derive(Clone, Debug)]
pub struct BsplineKanLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub grid: BsplineGrid,
    /// c[o] is n_in×n_basis: spline coefficients for every input edge of
    /// output o.
    pub c: Vec<Matrix>,
    /// n_out×n_in gains on the silu path.
    pub w_b: Matrix,
    /// n_out×n_in gains on the spline path.
    pub w_s: Matrix,
}

#[derive(Clone, Debug)]
pub struct BsplineCache {
    pub x: Vec<f64>,
    /// n_in×n_basis basis values per input.
    pub bas: Matrix,
    /// n_in×n_basis basis derivatives per input.
    pub dbas: Matrix,
    pub silu: Vec<f64>,
    pub dsilu: Vec<f64>,
    /// spl[o][i] = Σ_j c[o][i][j]·bas[i][j]
    pub spl: Matrix,
}

#[derive(Clone, Debug)]
pub struct BsplineGrads {
    pub c: Vec<Matrix>,
    pub w_b: Matrix,
    pub w_s: Matrix,
}

impl BsplineGrads {
    pub fn zero(&mut self) {
        for c in &mut self.c {
            c.fill(0.0);
        }
        self.w_b.fill(0.0);
        self.w_s.fill(0.0);
    }
}

impl BsplineKanLayer {
    /// c ~ N(0, 0.1), w_b = w_s = 1.
    pub fn init(n_in: usize, n_out: usize, g: usize, k: usize, rng: &mut Rng) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::Param("layer widths must be >= 1".into()));
        }
        let grid = BsplineGrid::new(g, k)?;
        let nb = grid.n_basis();
        let mut c = Vec::with_capacity(n_out);
        for _ in 0..n_out {
            c.push(rng.normal_matrix(0.0, 0.1, n_in, nb)?);
        }
        Ok(BsplineKanLayer {
            n_in,
            n_out,
            grid,
            c,
            w_b: Matrix::filled(n_out, n_in, 1.0),
            w_s: Matrix::filled(n_out, n_in, 1.0),
        })
    }

    pub fn new_cache(&self) -> BsplineCache {
        let nb = self.grid.n_basis();
        BsplineCache {
            x: vec![0.0; self.n_in],
            bas: Matrix::zeros(self.n_in, nb),
            dbas: Matrix::zeros(self.n_in, nb),
            silu: vec![0.0; self.n_in],
            dsilu: vec![0.0; self.n_in],
            spl: Matrix::zeros(self.n_out, self.n_in),
        }
    }

    pub fn new_grads(&self) -> BsplineGrads {
        let nb = self.grid.n_basis();
        BsplineGrads {
            c: (0..self.n_out)
                .map(|_| Matrix::zeros(self.n_in, nb))
                .collect(),
            w_b: Matrix::zeros(self.n_out, self.n_in),
            w_s: Matrix::zeros(self.n_out, self.n_in),
        }
    }

    /// y_o = Σ_i [ w_b[o][i]·silu(x_i) + w_s[o][i]·Σ_j c[o][i][j]·B_j(x_i) ]
    pub fn forward_into(&self, x: &[f64], cache: &mut BsplineCache, y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_in || y.len() != self.n_out {
            return Err(Error::Dim {
                op: "bspline forward",
                lhs: (x.len(), y.len()),
                rhs: (self.n_in, self.n_out),
            });
        }
        let nb = self.grid.n_basis();
        cache.x.copy_from_slice(x);
        let mut row = vec![0.0; nb];
        for i in 0..self.n_in {
            let xi = x[i];
            self.grid.basis_into(xi, &mut row)?;
            for j in 0..nb {
                cache.bas.set(i, j, row[j]);
            }
            self.grid.basis_derivative_into(xi, &mut row)?;
            for j in 0..nb {
                cache.dbas.set(i, j, row[j]);
            }
            cache.silu[i] = silu(xi);
            cache.dsilu[i] = dsilu(xi);
        }
        for o in 0..self.n_out {
            let mut acc = 0.0;
            for i in 0..self.n_in {
                let mut s = 0.0;
                for j in 0..nb {
                    s += self.c[o].get(i, j) * cache.bas.get(i, j);
                }
                cache.spl.set(o, i, s);
                acc += self.w_b.get(o, i) * cache.silu[i] + self.w_s.get(o, i) * s;
            }
            y[o] = acc;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, BsplineCache)> {
        let mut cache = self.new_cache();
        let mut y = vec![0.0; self.n_out];
        self.forward_into(x, &mut cache, &mut y)?;
        Ok((y, cache))
    }

    /// Accumulating reverse pass:
    ///   ∂L/∂c[o][i][j] += gy_o·w_s[o][i]·B_j(x_i)
    ///   ∂L/∂w_b[o][i] += gy_o·silu(x_i)
    ///   ∂L/∂w_s[o][i] += gy_o·spl[o][i]
    ///   ∂L/∂x_i += Σ_o gy_o·(w_b[o][i]·dsilu(x_i)
    ///                        + w_s[o][i]·Σ_j c[o][i][j]·B'_j(x_i))
    pub fn backward_acc(
        &self,
        cache: &BsplineCache,
        grad_y: &[f64],
        grads: &mut BsplineGrads,
        grad_x: &mut [f64],
    ) -> Result<()> {
        if grad_y.len() != self.n_out || grad_x.len() != self.n_in {
            return Err(Error::Contract("backward buffer lengths do not match layer"));
        }
        let nb = self.grid.n_basis();
        for (o, gy) in grad_y.iter().enumerate() {
            if *gy == 0.0 {
                continue;
            }
            for i in 0..self.n_in {
                let wb = self.w_b.get(o, i);
                let ws = self.w_s.get(o, i);
                grads.w_b.set(o, i, grads.w_b.get(o, i) + gy * cache.silu[i]);
                grads
                    .w_s
                    .set(o, i, grads.w_s.get(o, i) + gy * cache.spl.get(o, i));
                let mut dspl = 0.0;
                for j in 0..nb {
                    let cur = grads.c[o].get(i, j);
                    grads.c[o].set(i, j, cur + gy * ws * cache.bas.get(i, j));
                    dspl += self.c[o].get(i, j) * cache.dbas.get(i, j);
                }
                grad_x[i] += gy * (wb * cache.dsilu[i] + ws * dspl);
            }
        }
        Ok(())
    }

    /// Brute-force reference evaluation for tests.
    pub fn forward_brute_force(&self, x: &[f64]) -> Result<Vec<f64>> {
        let nb = self.grid.n_basis();
        let mut bas = vec![0.0; nb];
        let mut y = vec![0.0; self.n_out];
        for (o, yo) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..self.n_in {
                self.grid.basis_into(x[i], &mut bas)?;
                let spl: f64 = (0..nb).map(|j| self.c[o].get(i, j) * bas[j]).sum();
                acc += self.w_b.get(o, i) * silu(x[i]) + self.w_s.get(o, i) * spl;
            }
            *yo = acc;
        }
        Ok(y)
    }
}
