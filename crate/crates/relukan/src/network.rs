use crate::bspline::{BsplineCache, BsplineGrads, BsplineKanLayer};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::relukan::{NormMode, ReluKanCache, ReluKanConfig, ReluKanGrads, ReluKanLayer, DEFAULT_INIT_SCALE};
use crate::rng::{layer_stream, Rng};

/// The three model families the experiments compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// ReLU-KAN with frozen basis endpoints (only edge weights train).
    ReluKan1,
    /// ReLU-KAN with trainable endpoints.
    ReluKan2,
    /// B-spline KAN baseline (SiLU residual + spline coefficients).
    Bspline,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<ModelKind> {
        match s {
            "relukan1" => Ok(ModelKind::ReluKan1),
            "relukan2" => Ok(ModelKind::ReluKan2),
            "bspline" => Ok(ModelKind::Bspline),
            other => Err(Error::Param(format!(
                "unknown model '{other}' (expected relukan1, relukan2 or bspline)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::ReluKan1 => "relukan1",
            ModelKind::ReluKan2 => "relukan2",
            ModelKind::Bspline => "bspline",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NetConfig {
    pub kind: ModelKind,
    /// Layer widths including input and output, e.g. [2, 5, 1].
    pub widths: Vec<usize>,
    pub g: usize,
    pub k: usize,
    pub norm_mode: NormMode,
    pub init_scale: f64,
    /// Map hidden activations h ↦ (h+1)/2 between layers so they land back
    /// near the [0,1] region the bases cover. Off by default.
    pub hidden_affine: bool,
}

impl NetConfig {
    pub fn new(kind: ModelKind, widths: Vec<usize>, g: usize, k: usize) -> Self {
        NetConfig {
            kind,
            widths,
            g,
            k,
            norm_mode: NormMode::Constant,
            init_scale: DEFAULT_INIT_SCALE,
            hidden_affine: false,
        }
    }
}

pub enum Layer {
    ReluKan(ReluKanLayer),
    Bspline(BsplineKanLayer),
}

pub enum LayerCache {
    ReluKan(ReluKanCache),
    Bspline(BsplineCache),
}

pub enum LayerGrads {
    ReluKan(ReluKanGrads),
    Bspline(BsplineGrads),
}

/// Mutable handle on one parameter matrix plus its gradient buffer;
/// the optimizer walks a flat Vec of these.
pub struct ParamSlot<'a> {
    pub value: &'a mut Matrix,
    pub grad: &'a Matrix,
    pub trainable: bool,
}

pub struct NetCache {
    pub layer: Vec<LayerCache>,
    /// act[0] is the network input; act[l+1] the (squashed) output of layer l.
    pub act: Vec<Vec<f64>>,
}

pub struct NetGrads {
    pub layer: Vec<LayerGrads>,
    /// Scratch gradient buffers, one per activation level.
    gact: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zero(&mut self) {
        for g in &mut self.layer {
            match g {
                LayerGrads::ReluKan(g) => g.zero(),
                LayerGrads::Bspline(g) => g.zero(),
            }
        }
    }
}

pub struct Network {
    pub config: NetConfig,
    pub layers: Vec<Layer>,
}

/// Builds a network with per-layer RNG substreams so that adding or removing
/// layers never shifts another layer's draws.
pub fn build(config: NetConfig, seed: u64) -> Result<Network> {
    if config.widths.len() < 2 {
        return Err(Error::Param(format!(
            "widths must list at least input and output, got {:?}",
            config.widths
        )));
    }
    if config.widths.iter().any(|&w| w == 0) {
        return Err(Error::Param("every layer width must be >= 1".into()));
    }
    let mut layers = Vec::with_capacity(config.widths.len() - 1);
    for t in 0..config.widths.len() - 1 {
        let n_in = config.widths[t];
        let n_out = config.widths[t + 1];
        let mut lrng = Rng::substream(seed, layer_stream(t));
        let layer = match config.kind {
            ModelKind::ReluKan1 | ModelKind::ReluKan2 => {
                let mut lc = ReluKanConfig::new(n_in, n_out, config.g, config.k);
                lc.trainable_endpoints = config.kind == ModelKind::ReluKan2;
                lc.norm_mode = config.norm_mode;
                lc.init_scale = config.init_scale;
                Layer::ReluKan(ReluKanLayer::init(lc, &mut lrng)?)
            }
            ModelKind::Bspline => Layer::Bspline(BsplineKanLayer::init(
                n_in, n_out, config.g, config.k, &mut lrng,
            )?),
        };
        layers.push(layer);
    }
    Ok(Network { config, layers })
}

impl Network {
    pub fn n_in(&self) -> usize {
        self.config.widths[0]
    }

    pub fn n_out(&self) -> usize {
        *self.config.widths.last().unwrap()
    }

    pub fn new_cache(&self) -> NetCache {
        NetCache {
            layer: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::ReluKan(l) => LayerCache::ReluKan(l.new_cache()),
                    Layer::Bspline(l) => LayerCache::Bspline(l.new_cache()),
                })
                .collect(),
            act: self.config.widths.iter().map(|&w| vec![0.0; w]).collect(),
        }
    }

    pub fn new_grads(&self) -> NetGrads {
        NetGrads {
            layer: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::ReluKan(l) => LayerGrads::ReluKan(l.new_grads()),
                    Layer::Bspline(l) => LayerGrads::Bspline(l.new_grads()),
                })
                .collect(),
            gact: self.config.widths.iter().map(|&w| vec![0.0; w]).collect(),
        }
    }

    pub fn forward_into(&self, x: &[f64], cache: &mut NetCache, y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_in() {
            return Err(Error::Dim {
                op: "network forward",
                lhs: (1, x.len()),
                rhs: (1, self.n_in()),
            });
        }
        let last = self.layers.len() - 1;
        cache.act[0].copy_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (lo, hi) = cache.act.split_at_mut(l + 1);
            let input = &lo[l];
            let out = &mut hi[0];
            match (layer, &mut cache.layer[l]) {
                (Layer::ReluKan(layer), LayerCache::ReluKan(c)) => {
                    layer.forward_into(input, c, out)?
                }
                (Layer::Bspline(layer), LayerCache::Bspline(c)) => {
                    layer.forward_into(input, c, out)?
                }
                _ => return Err(Error::Contract("cache kind does not match layer kind")),
            }
            if self.config.hidden_affine && l < last {
                for v in out.iter_mut() {
                    *v = (*v + 1.0) * 0.5;
                }
            }
        }
        y.copy_from_slice(&cache.act[last + 1]);
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut cache = self.new_cache();
        let mut y = vec![0.0; self.n_out()];
        self.forward_into(x, &mut cache, &mut y)?;
        Ok(y)
    }

    /// Accumulates parameter gradients for one sample whose forward pass
    /// filled `cache`. Parameter buffers in `grads` are *not* zeroed here.
    pub fn backward_acc(
        &self,
        cache: &NetCache,
        grad_y: &[f64],
        grads: &mut NetGrads,
    ) -> Result<()> {
        if grad_y.len() != self.n_out() {
            return Err(Error::Contract("grad_y length does not match network output"));
        }
        let last = self.layers.len() - 1;
        grads.gact[last + 1].copy_from_slice(grad_y);
        for l in (0..self.layers.len()).rev() {
            if self.config.hidden_affine && l < last {
                // act[l+1] = (y_l + 1)/2 ⇒ ∂/∂y_l carries a factor 1/2
                for v in grads.gact[l + 1].iter_mut() {
                    *v *= 0.5;
                }
            }
            let (lo, hi) = grads.gact.split_at_mut(l + 1);
            let gin = &mut lo[l];
            let gout = &hi[0];
            gin.iter_mut().for_each(|v| *v = 0.0);
            match (&self.layers[l], &cache.layer[l], &mut grads.layer[l]) {
                (Layer::ReluKan(layer), LayerCache::ReluKan(c), LayerGrads::ReluKan(g)) => {
                    layer.backward_acc(c, gout, g, gin)?
                }
                (Layer::Bspline(layer), LayerCache::Bspline(c), LayerGrads::Bspline(g)) => {
                    layer.backward_acc(c, gout, g, gin)?
                }
                _ => return Err(Error::Contract("grad kind does not match layer kind")),
            }
        }
        Ok(())
    }

    /// Gradient of the last backward pass with respect to the network input.
    pub fn input_grad<'a>(&self, grads: &'a NetGrads) -> &'a [f64] {
        &grads.gact[0]
    }

    /// Shapes of every parameter matrix in slot order; drives optimizer
    /// state allocation.
    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::ReluKan(l) => {
                    for w in &l.w {
                        shapes.push(w.shape());
                    }
                    shapes.push(l.s.shape());
                    shapes.push(l.e.shape());
                }
                Layer::Bspline(l) => {
                    for c in &l.c {
                        shapes.push(c.shape());
                    }
                    shapes.push(l.w_b.shape());
                    shapes.push(l.w_s.shape());
                }
            }
        }
        shapes
    }

    /// Flat parameter view in a fixed order: per layer, first the per-output
    /// weight/coefficient matrices, then (S, E) for ReLU-KAN layers or
    /// (w_b, w_s) for spline layers.
    pub fn param_slots<'a>(&'a mut self, grads: &'a NetGrads) -> Vec<ParamSlot<'a>> {
        let mut slots = Vec::new();
        for (layer, lg) in self.layers.iter_mut().zip(grads.layer.iter()) {
            match (layer, lg) {
                (Layer::ReluKan(l), LayerGrads::ReluKan(g)) => {
                    let train_se = l.config.trainable_endpoints;
                    for (w, gw) in l.w.iter_mut().zip(g.w.iter()) {
                        slots.push(ParamSlot {
                            value: w,
                            grad: gw,
                            trainable: true,
                        });
                    }
                    slots.push(ParamSlot {
                        value: &mut l.s,
                        grad: &g.s,
                        trainable: train_se,
                    });
                    slots.push(ParamSlot {
                        value: &mut l.e,
                        grad: &g.e,
                        trainable: train_se,
                    });
                }
                (Layer::Bspline(l), LayerGrads::Bspline(g)) => {
                    for (c, gc) in l.c.iter_mut().zip(g.c.iter()) {
                        slots.push(ParamSlot {
                            value: c,
                            grad: gc,
                            trainable: true,
                        });
                    }
                    slots.push(ParamSlot {
                        value: &mut l.w_b,
                        grad: &g.w_b,
                        trainable: true,
                    });
                    slots.push(ParamSlot {
                        value: &mut l.w_s,
                        grad: &g.w_s,
                        trainable: true,
                    });
                }
                _ => unreachable!("grads built from this network"),
            }
        }
        slots
    }

    /// Restores the minimum basis width on every trainable-endpoint layer;
    /// call after each optimizer step.
    pub fn clamp_widths(&mut self) {
        for layer in &mut self.layers {
            if let Layer::ReluKan(l) = layer {
                if l.config.trainable_endpoints {
                    l.clamp_widths();
                }
            }
        }
    }

    /// Number of edge-weight (or spline-coefficient) parameters, excluding
    /// endpoints and gains.
    pub fn n_weights(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::ReluKan(l) => l.w.iter().map(|m| m.rows() * m.cols()).sum::<usize>(),
                Layer::Bspline(l) => l.c.iter().map(|m| m.rows() * m.cols()).sum::<usize>(),
            })
            .sum()
    }

    /// Total parameter count across all slots (trainable or not).
    pub fn n_params(&self) -> usize {
        self.param_shapes().iter().map(|&(r, c)| r * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ModelKind, widths: &[usize], g: usize, k: usize) -> NetConfig {
        NetConfig::new(kind, widths.to_vec(), g, k)
    }

    #[test]
    fn single_layer_shapes() {
        let net = build(cfg(ModelKind::ReluKan2, &[1, 1], 5, 3), 1).unwrap();
        assert_eq!(net.layers.len(), 1);
        match &net.layers[0] {
            Layer::ReluKan(l) => {
                assert_eq!(l.w.len(), 1);
                assert_eq!(l.w[0].shape(), (1, 8));
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn deep_architecture_layer_count() {
        let net = build(cfg(ModelKind::ReluKan2, &[4, 4, 2, 1], 10, 3), 1).unwrap();
        assert_eq!(net.layers.len(), 3);
        assert_eq!(net.n_in(), 4);
        assert_eq!(net.n_out(), 1);
    }

    #[test]
    fn weight_count_2_5_1() {
        let net = build(cfg(ModelKind::ReluKan2, &[2, 5, 1], 5, 3), 1).unwrap();
        // (2·8·5) + (5·8·1) = 120
        assert_eq!(net.n_weights(), 120);
    }

    #[test]
    fn too_short_widths_rejected() {
        assert!(matches!(
            build(cfg(ModelKind::ReluKan2, &[3], 5, 3), 1),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            build(cfg(ModelKind::ReluKan2, &[2, 0, 1], 5, 3), 1),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn forward_is_layer_composition() {
        let net = build(cfg(ModelKind::ReluKan2, &[2, 3, 1], 5, 3), 42).unwrap();
        let x = [0.3, 0.7];
        let y = net.forward(&x).unwrap();
        let h = match &net.layers[0] {
            Layer::ReluKan(l) => l.forward(&x).unwrap().0,
            _ => unreachable!(),
        };
        let manual = match &net.layers[1] {
            Layer::ReluKan(l) => l.forward(&h).unwrap().0,
            _ => unreachable!(),
        };
        assert!((y[0] - manual[0]).abs() < 1e-14);
    }

    #[test]
    fn hidden_affine_squashes_between_layers_only() {
        let mut c = cfg(ModelKind::ReluKan2, &[2, 3, 1], 5, 3);
        c.hidden_affine = true;
        let net = build(c, 42).unwrap();
        let x = [0.3, 0.7];
        let mut cache = net.new_cache();
        let mut y = vec![0.0];
        net.forward_into(&x, &mut cache, &mut y).unwrap();
        let h_raw = match &net.layers[0] {
            Layer::ReluKan(l) => l.forward(&x).unwrap().0,
            _ => unreachable!(),
        };
        for (stored, raw) in cache.act[1].iter().zip(h_raw.iter()) {
            assert!((stored - (raw + 1.0) * 0.5).abs() < 1e-15);
        }
        let manual = match &net.layers[1] {
            Layer::ReluKan(l) => l.forward(&cache.act[1]).unwrap().0,
            _ => unreachable!(),
        };
        assert!((y[0] - manual[0]).abs() < 1e-14); // no squash after last layer
    }

    #[test]
    fn zero_weights_everywhere_give_zero_output() {
        let mut net = build(cfg(ModelKind::ReluKan2, &[2, 3, 1], 5, 3), 7).unwrap();
        for layer in &mut net.layers {
            if let Layer::ReluKan(l) = layer {
                for w in &mut l.w {
                    w.fill(0.0);
                }
            }
        }
        let y = net.forward(&[0.4, 0.6]).unwrap();
        assert_eq!(y, vec![0.0]);
    }

    #[test]
    fn same_seed_same_init_across_kinds_with_shared_layout() {
        // relukan1 vs relukan2 differ only in the trainable flag
        let a = build(cfg(ModelKind::ReluKan1, &[2, 3, 1], 5, 3), 9).unwrap();
        let b = build(cfg(ModelKind::ReluKan2, &[2, 3, 1], 5, 3), 9).unwrap();
        for (la, lb) in a.layers.iter().zip(b.layers.iter()) {
            match (la, lb) {
                (Layer::ReluKan(la), Layer::ReluKan(lb)) => {
                    assert_eq!(la.w, lb.w);
                    assert_eq!(la.s, lb.s);
                    assert_eq!(la.e, lb.e);
                }
                _ => panic!("wrong kinds"),
            }
        }
    }

    #[test]
    fn frozen_and_trainable_get_equal_weight_gradients() {
        let x = [0.35, 0.6];
        let gy = [1.0];
        let grads_of = |kind: ModelKind| {
            let net = build(cfg(kind, &[2, 1], 5, 3), 9).unwrap();
            let mut cache = net.new_cache();
            let mut y = vec![0.0];
            net.forward_into(&x, &mut cache, &mut y).unwrap();
            let mut grads = net.new_grads();
            net.backward_acc(&cache, &gy, &mut grads).unwrap();
            match grads.layer.into_iter().next().unwrap() {
                LayerGrads::ReluKan(g) => g,
                _ => unreachable!(),
            }
        };
        let g1 = grads_of(ModelKind::ReluKan1);
        let g2 = grads_of(ModelKind::ReluKan2);
        assert_eq!(g1.w, g2.w);
        assert!(g1.s.iter().all(|&v| v == 0.0));
        assert!(g2.s.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn slot_order_and_total_count() {
        let mut net = build(cfg(ModelKind::ReluKan2, &[2, 5, 1], 5, 3), 1).unwrap();
        let grads = net.new_grads();
        let shapes = net.param_shapes();
        let slots = net.param_slots(&grads);
        assert_eq!(shapes.len(), slots.len());
        // layer 0: 5 W (2×8) + S + E; layer 1: 1 W (5×8) + S + E
        assert_eq!(slots.len(), 5 + 2 + 1 + 2);
        for (slot, shape) in slots.iter().zip(shapes.iter()) {
            assert_eq!(slot.value.shape(), *shape);
            assert_eq!(slot.grad.shape(), *shape);
        }
        // 120 weights + S,E of layer 0 (2·8 each) + S,E of layer 1 (5·8 each)
        assert_eq!(net.n_params(), 120 + 2 * 16 + 2 * 40);
    }

    #[test]
    fn bspline_network_matches_layer_composition() {
        let net = build(cfg(ModelKind::Bspline, &[2, 3, 1], 5, 3), 4).unwrap();
        let x = [0.25, 0.8];
        let y = net.forward(&x).unwrap();
        let h = match &net.layers[0] {
            Layer::Bspline(l) => l.forward(&x).unwrap().0,
            _ => unreachable!(),
        };
        let manual = match &net.layers[1] {
            Layer::Bspline(l) => l.forward(&h).unwrap().0,
            _ => unreachable!(),
        };
        assert!((y[0] - manual[0]).abs() < 1e-14);
    }

    #[test]
    fn input_gradient_chains_through_layers() {
        let net = build(cfg(ModelKind::ReluKan2, &[2, 3, 1], 5, 3), 11).unwrap();
        let x = [0.41, 0.57];
        let mut cache = net.new_cache();
        let mut y = vec![0.0];
        net.forward_into(&x, &mut cache, &mut y).unwrap();
        let mut grads = net.new_grads();
        net.backward_acc(&cache, &[1.0], &mut grads).unwrap();
        let gx = net.input_grad(&grads).to_vec();
        // central differences on the input
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fp = net.forward(&xp).unwrap()[0];
            let fm = net.forward(&xm).unwrap()[0];
            let fd = (fp - fm) / (2.0 * h);
            let rel = (fd - gx[i]).abs() / fd.abs().max(gx[i].abs()).max(1.0);
            assert!(rel < 1e-4, "i={i} fd={fd} an={}", gx[i]);
        }
    }
}
