use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Width floor enforced on trainable endpoint intervals after every
/// optimizer step; without it a crossed pair (e ≤ s) would zero the basis
/// permanently and, in dynamic mode, divide by zero.
pub const EPS_WIDTH: f64 = 1e-4;

/// Default multiplier on the variance-scaled weight init
/// σ = init_scale · sqrt(2/(n_in·(G+k))). Small initial weights keep early
/// Adam steps productive at the experiment iteration budgets.
pub const DEFAULT_INIT_SCALE: f64 = 0.05;

/// How the basis normalization is computed while endpoints move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// Fixed constant from the grid configuration: each basis is scaled as if
    /// its width were the initial (k+1)/G, even after endpoints drift.
    Constant,
    /// Per-entry normalization 16/(e−s)⁴ recomputed from the live endpoints,
    /// keeping every basis peak at exactly 1.
    Dynamic,
}

#[derive(Clone, Debug)]
pub struct ReluKanConfig {
    pub n_in: usize,
    pub n_out: usize,
    pub g: usize,
    pub k: usize,
    pub trainable_endpoints: bool,
    pub norm_mode: NormMode,
    pub init_scale: f64,
}

impl ReluKanConfig {
    pub fn new(n_in: usize, n_out: usize, g: usize, k: usize) -> Self {
        ReluKanConfig {
            n_in,
            n_out,
            g,
            k,
            trainable_endpoints: true,
            norm_mode: NormMode::Constant,
            init_scale: DEFAULT_INIT_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_in == 0 || self.n_out == 0 {
            return Err(Error::Param("layer widths must be >= 1".into()));
        }
        if self.g == 0 {
            return Err(Error::Param("grid count G must be >= 1".into()));
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::Param(format!(
                "init_scale must be > 0, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }

    pub fn n_basis(&self) -> usize {
        self.g + self.k
    }

    /// The quartic normalization constant r = 16·G⁴/(k+1)⁴: the value that
    /// multiplies the *squared* ReLU product so a width-(k+1)/G basis peaks
    /// at 1.
    pub fn norm_constant(&self) -> f64 {
        let g = self.g as f64;
        let k1 = (self.k + 1) as f64;
        16.0 * g.powi(4) / k1.powi(4)
    }

    /// The matrix-pipeline multiplier applied at the D stage, i.e. before
    /// squaring: √r = 4·G²/(k+1)². Since F = D⊙D, this reproduces exactly
    /// `basis_eval` with norm = r.
    pub fn d_scale(&self) -> f64 {
        let g = self.g as f64;
        let k1 = (self.k + 1) as f64;
        4.0 * g * g / (k1 * k1)
    }
}

/// Single squared-ReLU-product basis: [max(0,e−x)·max(0,x−s)]²·norm.
/// Zero outside (s, e), continuous and once-differentiable everywhere.
#[inline]
pub fn basis_eval(x: f64, s: f64, e: f64, norm: f64) -> f64 {
    let a = (e - x).max(0.0);
    let b = (x - s).max(0.0);
    let p = a * b;
    p * p * norm
}

/// Per-entry dynamic normalization 16/(e−s)⁴.
pub fn dynamic_norm(s: f64, e: f64) -> Result<f64> {
    let w = e - s;
    if !(w > 0.0) {
        return Err(Error::DegenerateBasis { s, e });
    }
    Ok(16.0 / w.powi(4))
}

/// One ReLU-KAN layer: n_in inputs, n_out outputs, G+k bases per input
/// channel. Endpoint matrices S, E are n_in×(G+k); one weight matrix of the
/// same shape per output channel.
#[derive(Clone, Debug)]
pub struct ReluKanLayer {
    pub config: ReluKanConfig,
    pub s: Matrix,
    pub e: Matrix,
    pub w: Vec<Matrix>,
}

/// Intermediates of the five-step forward pass, retained for backward.
/// Invariant: f[i][j] equals `basis_eval(x[i], s[i][j], e[i][j], norm_ij)`,
/// i.e. the j-th basis on input channel i.
#[derive(Clone, Debug)]
pub struct ReluKanCache {
    pub x: Vec<f64>,
    pub a: Matrix,
    pub b: Matrix,
    pub d: Matrix,
    pub f: Matrix,
    /// D-stage multiplier actually used per entry (√norm; uniform in
    /// constant mode).
    pub rho: Matrix,
}

/// Gradient buffers for one layer; accumulated across samples.
#[derive(Clone, Debug)]
pub struct ReluKanGrads {
    pub w: Vec<Matrix>,
    pub s: Matrix,
    pub e: Matrix,
}

impl ReluKanGrads {
    pub fn zero(&mut self) {
        for w in &mut self.w {
            w.fill(0.0);
        }
        self.s.fill(0.0);
        self.e.fill(0.0);
    }
}

impl ReluKanLayer {
    /// Builds a layer with the closed-form endpoint grid
    /// s_ij = (j−k−1)/G, e_ij = j/G (1-based j) and
    /// W ~ N(0, init_scale·sqrt(2/(n_in·(G+k)))).
    pub fn init(config: ReluKanConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let nb = config.n_basis();
        let g = config.g as f64;
        let k = config.k as f64;
        let s = Matrix::from_fn(config.n_in, nb, |_, j| (j as f64 + 1.0 - k - 1.0) / g);
        let e = Matrix::from_fn(config.n_in, nb, |_, j| (j as f64 + 1.0) / g);
        let sigma = config.init_scale * (2.0 / (config.n_in as f64 * nb as f64)).sqrt();
        let mut w = Vec::with_capacity(config.n_out);
        for _ in 0..config.n_out {
            w.push(rng.normal_matrix(0.0, sigma, config.n_in, nb)?);
        }
        Ok(ReluKanLayer { config, s, e, w })
    }

    pub fn new_cache(&self) -> ReluKanCache {
        let nb = self.config.n_basis();
        ReluKanCache {
            x: vec![0.0; self.config.n_in],
            a: Matrix::zeros(self.config.n_in, nb),
            b: Matrix::zeros(self.config.n_in, nb),
            d: Matrix::zeros(self.config.n_in, nb),
            f: Matrix::zeros(self.config.n_in, nb),
            rho: Matrix::zeros(self.config.n_in, nb),
        }
    }

    pub fn new_grads(&self) -> ReluKanGrads {
        let nb = self.config.n_basis();
        ReluKanGrads {
            w: (0..self.config.n_out)
                .map(|_| Matrix::zeros(self.config.n_in, nb))
                .collect(),
            s: Matrix::zeros(self.config.n_in, nb),
            e: Matrix::zeros(self.config.n_in, nb),
        }
    }

    fn check_cache(&self, cache: &ReluKanCache) -> Result<()> {
        if cache.x.len() != self.config.n_in
            || cache.f.shape() != (self.config.n_in, self.config.n_basis())
        {
            return Err(Error::Contract("cache shape does not match layer"));
        }
        Ok(())
    }

    /// Five-step forward pass:
    /// A = relu(E − x·1ᵀ), B = relu(x·1ᵀ − S), D = ρ·(A⊙B), F = D⊙D,
    /// y_c = ⟨W^c, F⟩. Equal to the brute-force Σ_i Σ_j w^c_ij·R_j(x_i).
    pub fn forward_into(&self, x: &[f64], cache: &mut ReluKanCache, y: &mut [f64]) -> Result<()> {
        if x.len() != self.config.n_in {
            return Err(Error::Dim {
                op: "relukan forward",
                lhs: (1, x.len()),
                rhs: (1, self.config.n_in),
            });
        }
        if y.len() != self.config.n_out {
            return Err(Error::Dim {
                op: "relukan forward output",
                lhs: (1, y.len()),
                rhs: (1, self.config.n_out),
            });
        }
        self.check_cache(cache)?;
        let nb = self.config.n_basis();
        let const_rho = self.config.d_scale();
        cache.x.copy_from_slice(x);
        for i in 0..self.config.n_in {
            let xi = x[i];
            for j in 0..nb {
                let s = self.s.get(i, j);
                let e = self.e.get(i, j);
                let rho = match self.config.norm_mode {
                    NormMode::Constant => const_rho,
                    NormMode::Dynamic => {
                        let w = e - s;
                        if !(w > 0.0) {
                            return Err(Error::DegenerateBasis { s, e });
                        }
                        4.0 / (w * w)
                    }
                };
                let a = (e - xi).max(0.0);
                let b = (xi - s).max(0.0);
                let d = rho * (a * b);
                cache.a.set(i, j, a);
                cache.b.set(i, j, b);
                cache.d.set(i, j, d);
                cache.f.set(i, j, d * d);
                cache.rho.set(i, j, rho);
            }
        }
        for (c, yc) in y.iter_mut().enumerate() {
            *yc = self.w[c].frobenius_inner(&cache.f)?;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ReluKanCache)> {
        let mut cache = self.new_cache();
        let mut y = vec![0.0; self.config.n_out];
        self.forward_into(x, &mut cache, &mut y)?;
        Ok((y, cache))
    }

    /// Reverse pass. Per entry, with gF = Σ_c grad_y[c]·w^c and gD = 2·D·gF:
    ///   ∂L/∂W^c = grad_y[c]·F
    ///   ∂L/∂E  += gD·ρ·B·1[A>0]   (dynamic: −4·F·gF/(e−s) from ∂ρ/∂e)
    ///   ∂L/∂S  += −gD·ρ·A·1[B>0]  (dynamic: +4·F·gF/(e−s))
    ///   ∂L/∂x_i += gD·ρ·(A·1[B>0] − B·1[A>0])
    /// The indicator is strict (0 at the kink), so dead regions stay exactly
    /// dead. With frozen endpoints the S/E buffers are left untouched
    /// (zeros), matching the trainable flag semantics.
    ///
    /// Gradients are *accumulated* into `grads` and `grad_x`; the caller
    /// zeroes buffers at batch boundaries.
    pub fn backward_acc(
        &self,
        cache: &ReluKanCache,
        grad_y: &[f64],
        grads: &mut ReluKanGrads,
        grad_x: &mut [f64],
    ) -> Result<()> {
        if grad_y.len() != self.config.n_out || grad_x.len() != self.config.n_in {
            return Err(Error::Contract("backward buffer lengths do not match layer"));
        }
        self.check_cache(cache)?;
        let nb = self.config.n_basis();
        let dynamic = self.config.norm_mode == NormMode::Dynamic;
        let train_se = self.config.trainable_endpoints;
        // W gradients: rank-1 in (grad_y, F).
        for (c, gy) in grad_y.iter().enumerate() {
            if *gy != 0.0 {
                grads.w[c].axpy(*gy, &cache.f)?;
            }
        }
        for i in 0..self.config.n_in {
            let mut gx = 0.0;
            for j in 0..nb {
                // gF = Σ_c gy_c · w^c_ij
                let mut gf = 0.0;
                for (c, gy) in grad_y.iter().enumerate() {
                    gf += gy * self.w[c].get(i, j);
                }
                if gf == 0.0 {
                    continue;
                }
                let a = cache.a.get(i, j);
                let b = cache.b.get(i, j);
                let d = cache.d.get(i, j);
                let rho = cache.rho.get(i, j);
                let gd = 2.0 * d * gf;
                let ind_a = if a > 0.0 { 1.0 } else { 0.0 };
                let ind_b = if b > 0.0 { 1.0 } else { 0.0 };
                gx += gd * rho * (a * ind_b - b * ind_a);
                if train_se {
                    let mut ge = gd * rho * b * ind_a;
                    let mut gs = -gd * rho * a * ind_b;
                    if dynamic {
                        // ρ = 4/(e−s)² depends on the endpoints:
                        // ∂F/∂e via ρ is −4F/(e−s), ∂F/∂s is +4F/(e−s).
                        let width = self.e.get(i, j) - self.s.get(i, j);
                        let f = cache.f.get(i, j);
                        ge += -4.0 * f * gf / width;
                        gs += 4.0 * f * gf / width;
                    }
                    grads.e.set(i, j, grads.e.get(i, j) + ge);
                    grads.s.set(i, j, grads.s.get(i, j) + gs);
                }
            }
            grad_x[i] += gx;
        }
        Ok(())
    }

    /// Repairs any interval narrower than `EPS_WIDTH` (including crossed
    /// endpoints) by moving both ends symmetrically about their midpoint.
    pub fn clamp_widths(&mut self) {
        let nb = self.config.n_basis();
        for i in 0..self.config.n_in {
            for j in 0..nb {
                let s = self.s.get(i, j);
                let e = self.e.get(i, j);
                if e - s < EPS_WIDTH {
                    let mid = 0.5 * (s + e);
                    self.s.set(i, j, mid - 0.5 * EPS_WIDTH);
                    self.e.set(i, j, mid + 0.5 * EPS_WIDTH);
                }
            }
        }
    }

    /// Brute-force reference: y_c = Σ_i Σ_j w^c_ij·basis_eval(x_i, s_ij, e_ij).
    /// Used by tests as the oracle for the matrix pipeline.
    pub fn forward_brute_force(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.config.n_in {
            return Err(Error::Dim {
                op: "relukan brute force",
                lhs: (1, x.len()),
                rhs: (1, self.config.n_in),
            });
        }
        let nb = self.config.n_basis();
        let r = self.config.norm_constant();
        let mut y = vec![0.0; self.config.n_out];
        for (c, yc) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..self.config.n_in {
                for j in 0..nb {
                    let s = self.s.get(i, j);
                    let e = self.e.get(i, j);
                    let norm = match self.config.norm_mode {
                        NormMode::Constant => r,
                        NormMode::Dynamic => dynamic_norm(s, e)?,
                    };
                    acc += self.w[c].get(i, j) * basis_eval(x[i], s, e, norm);
                }
            }
            *yc = acc;
        }
        Ok(y)
    }
}
