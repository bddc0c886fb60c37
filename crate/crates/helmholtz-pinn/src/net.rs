//! Dense feedforward network with exact propagation of first and pure second
//! input derivatives, and reverse-mode parameter gradients.
//!
//! The network is a constant-shape MLP: `d` inputs, hidden layers with a smooth
//! activation, one linear output. Besides plain evaluation ([`MlpParams::forward`]),
//! every point can be evaluated as an [`InputJet`] carrying `u`, `∂u/∂x_i` and
//! `∂²u/∂x_i²` for each coordinate direction, which is what the Helmholtz
//! residual `-Δu - κ²u` needs. Jets are propagated layerwise with the
//! elementwise chain rule `z'' = σ''(a)(a')² + σ'(a)a''`; mixed partials are
//! never formed.
//!
//! Parameter gradients are reverse-mode over the jet-augmented graph, so losses
//! built from `Δu` are differentiated exactly with respect to the weights.

use std::io::{Read, Write};

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input has dimension {got}, network expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed parameter header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("parameter blob is corrupt: {0}")]
    Corrupt(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
}

/// Hidden-layer activation. The closed set matches the tuned search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sin,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sin, Activation::Sigmoid, Activation::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sin => "sin",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sin" => Some(Activation::Sin),
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    /// Activation value and first derivative at pre-activation `a`.
    #[inline]
    fn value_d1(self, a: f64) -> (f64, f64) {
        match self {
            // The cos operand is laundered through black_box so the optimizer
            // cannot fuse the pair into a combined sincos call; the jet value
            // must stay bit-identical to the plain evaluation path, which
            // computes sin alone.
            Activation::Sin => (a.sin(), std::hint::black_box(a).cos()),
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-a).exp());
                (s, s * (1.0 - s))
            }
            Activation::Tanh => {
                let t = a.tanh();
                (t, 1.0 - t * t)
            }
        }
    }

    /// Second derivative, reconstructed from the value `z = σ(a)` and `s1 = σ'(a)`.
    ///
    /// sin: σ'' = -sin = -z; tanh: σ'' = -2tσ'; sigmoid: σ'' = σ'(1-2s).
    #[inline]
    fn d2_from(self, z: f64, s1: f64) -> f64 {
        match self {
            Activation::Sin => -z,
            Activation::Sigmoid => s1 * (1.0 - 2.0 * z),
            Activation::Tanh => -2.0 * z * s1,
        }
    }

    /// Third derivative from `z` and `s1`, used by the reverse pass.
    ///
    /// sin: σ''' = -cos = -σ'; tanh: σ''' = -2σ'(1-3t²); sigmoid: σ''' = σ'(1-6s+6s²).
    #[inline]
    fn d3_from(self, z: f64, s1: f64) -> f64 {
        match self {
            Activation::Sin => -s1,
            Activation::Sigmoid => s1 * (1.0 - 6.0 * z + 6.0 * z * z),
            Activation::Tanh => -2.0 * s1 * (1.0 - 3.0 * z * z),
        }
    }
}

/// Shape of the network: input dimension, hidden widths, fixed scalar output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Architecture {
    pub fn new(
        input_dim: usize,
        hidden: Vec<usize>,
        activation: Activation,
    ) -> Result<Self, NetError> {
        if input_dim == 0 {
            return Err(NetError::InvalidArchitecture("input_dim must be >= 1".into()));
        }
        if hidden.is_empty() {
            return Err(NetError::InvalidArchitecture("at least one hidden layer".into()));
        }
        if hidden.contains(&0) {
            return Err(NetError::InvalidArchitecture("hidden widths must be >= 1".into()));
        }
        Ok(Self { input_dim, hidden, activation })
    }

    /// Constant-width shape: `depth` hidden layers of `width` neurons.
    pub fn constant_width(
        input_dim: usize,
        depth: usize,
        width: usize,
        activation: Activation,
    ) -> Result<Self, NetError> {
        Self::new(input_dim, vec![width; depth], activation)
    }

    /// Total number of layers `L` (hidden + output).
    pub fn num_layers(&self) -> usize {
        self.hidden.len() + 1
    }

    /// `(in_dim, out_dim)` of layer `l` for `l` in `0..num_layers()`.
    pub fn layer_dims(&self, l: usize) -> (usize, usize) {
        let i = if l == 0 { self.input_dim } else { self.hidden[l - 1] };
        let o = if l == self.hidden.len() { 1 } else { self.hidden[l] };
        (i, o)
    }

    /// Number of trainable parameters: `Σ_l N_l (N_{l-1} + 1)` with `N_0 = d`, `N_L = 1`.
    pub fn param_count(&self) -> usize {
        (0..self.num_layers())
            .map(|l| {
                let (i, o) = self.layer_dims(l);
                o * (i + 1)
            })
            .sum()
    }

    /// Widest layer state, used to size work buffers.
    fn max_width(&self) -> usize {
        self.hidden.iter().copied().max().unwrap().max(self.input_dim)
    }
}

/// Offsets of one layer's weights and biases inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSpan {
    w: usize,
    b: usize,
    in_dim: usize,
    out_dim: usize,
}

fn layer_spans(arch: &Architecture) -> Vec<LayerSpan> {
    let mut spans = Vec::with_capacity(arch.num_layers());
    let mut off = 0;
    for l in 0..arch.num_layers() {
        let (in_dim, out_dim) = arch.layer_dims(l);
        let w = off;
        let b = off + in_dim * out_dim;
        off = b + out_dim;
        spans.push(LayerSpan { w, b, in_dim, out_dim });
    }
    spans
}

/// All weights and biases of one network, stored flat in layer order:
/// `W¹` (row-major, out × in), `b¹`, `W²`, `b²`, …
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    arch: Architecture,
    values: Vec<f64>,
    spans: Vec<LayerSpan>,
}

impl MlpParams {
    pub fn zeros(arch: Architecture) -> Self {
        let spans = layer_spans(&arch);
        let values = vec![0.0; arch.param_count()];
        Self { arch, values, spans }
    }

    /// Glorot-uniform weights, zero biases.
    ///
    /// Each weight of layer `l` is drawn from `U[-b, b]` with
    /// `b = sqrt(6 / (fan_in + fan_out))`, layer by layer in row-major order.
    /// A fixed seed yields bit-identical parameters.
    pub fn glorot_init<R: Rng>(arch: Architecture, rng: &mut R) -> Self {
        let mut params = Self::zeros(arch);
        for l in 0..params.arch.num_layers() {
            let span = params.spans[l];
            let bound = (6.0 / (span.in_dim + span.out_dim) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for w in &mut params.values[span.w..span.w + span.in_dim * span.out_dim] {
                *w = dist.sample(rng);
            }
        }
        params
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        let s = self.spans[l];
        &self.values[s.w..s.w + s.in_dim * s.out_dim]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        let s = self.spans[l];
        &self.values[s.b..s.b + s.out_dim]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let s = self.spans[l];
        &mut self.values[s.w..s.w + s.in_dim * s.out_dim]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let s = self.spans[l];
        &mut self.values[s.b..s.b + s.out_dim]
    }

    /// Plain evaluation `u_θ(x)`: activation on hidden layers, linear output.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NetError> {
        if x.len() != self.arch.input_dim {
            return Err(NetError::ShapeMismatch { expected: self.arch.input_dim, got: x.len() });
        }
        let width = self.arch.max_width();
        let mut cur = Vec::with_capacity(width);
        cur.extend_from_slice(x);
        let mut next = vec![0.0; width];
        let last = self.arch.num_layers() - 1;
        for l in 0..=last {
            let s = self.spans[l];
            next.resize(s.out_dim, 0.0);
            for (j, slot) in next.iter_mut().enumerate() {
                let row = &self.values[s.w + j * s.in_dim..s.w + (j + 1) * s.in_dim];
                let mut a = self.values[s.b + j];
                for (w, z) in row.iter().zip(cur.iter()) {
                    a += w * z;
                }
                *slot = if l == last { a } else { self.arch.activation.value_d1(a).0 };
            }
            std::mem::swap(&mut cur, &mut next);
            cur.truncate(self.spans[l].out_dim);
        }
        Ok(cur[0])
    }

    /// Jet evaluation; allocates a transient workspace. For hot loops, reuse a
    /// [`JetWorkspace`] with [`MlpParams::forward_jet_with`].
    pub fn forward_jet(&self, x: &[f64]) -> Result<InputJet, NetError> {
        let mut ws = JetWorkspace::new(&self.arch);
        self.forward_jet_with(x, &mut ws)
    }

    /// Jet evaluation recording intermediates into `ws` for a later
    /// [`MlpParams::backward_jet`].
    pub fn forward_jet_with(&self, x: &[f64], ws: &mut JetWorkspace) -> Result<InputJet, NetError> {
        let d = self.arch.input_dim;
        if x.len() != d {
            return Err(NetError::ShapeMismatch { expected: d, got: x.len() });
        }
        debug_assert_eq!(ws.dim, d, "workspace built for a different architecture");

        // Seed the input state: z = x, ∂x_j/∂x_i = δ_ij, second partials 0.
        let s0 = &mut ws.states[0];
        s0.z.copy_from_slice(x);
        s0.zx.iter_mut().for_each(|v| *v = 0.0);
        s0.zxx.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..d {
            s0.zx[i * d + i] = 1.0;
        }

        let last = self.arch.num_layers() - 1;
        for l in 0..=last {
            let span = self.spans[l];
            let n_in = span.in_dim;
            let n_out = span.out_dim;
            let (prev_states, next_states) = ws.states.split_at_mut(l + 1);
            let prev = &prev_states[l];
            let next = &mut next_states[0];

            if l == last {
                // Output layer is affine in all jet components.
                for j in 0..n_out {
                    let row = &self.values[span.w + j * n_in..span.w + (j + 1) * n_in];
                    let mut a = self.values[span.b + j];
                    for (w, z) in row.iter().zip(&prev.z) {
                        a += w * z;
                    }
                    next.z[j] = a;
                    for i in 0..d {
                        let (mut ax, mut axx) = (0.0, 0.0);
                        let zx = &prev.zx[i * n_in..(i + 1) * n_in];
                        let zxx = &prev.zxx[i * n_in..(i + 1) * n_in];
                        for ((w, x1), x2) in row.iter().zip(zx).zip(zxx) {
                            ax += w * x1;
                            axx += w * x2;
                        }
                        next.zx[i * n_out + j] = ax;
                        next.zxx[i * n_out + j] = axx;
                    }
                }
            } else {
                let tape = &mut ws.hidden[l];
                for j in 0..n_out {
                    let row = &self.values[span.w + j * n_in..span.w + (j + 1) * n_in];
                    let mut a = self.values[span.b + j];
                    for (w, z) in row.iter().zip(&prev.z) {
                        a += w * z;
                    }
                    let (z, s1) = self.arch.activation.value_d1(a);
                    let s2 = self.arch.activation.d2_from(z, s1);
                    next.z[j] = z;
                    tape.s1[j] = s1;
                    for i in 0..d {
                        let (mut ax, mut axx) = (0.0, 0.0);
                        let zx = &prev.zx[i * n_in..(i + 1) * n_in];
                        let zxx = &prev.zxx[i * n_in..(i + 1) * n_in];
                        for ((w, x1), x2) in row.iter().zip(zx).zip(zxx) {
                            ax += w * x1;
                            axx += w * x2;
                        }
                        tape.ax[i * n_out + j] = ax;
                        tape.axx[i * n_out + j] = axx;
                        // z' = σ'(a) a';  z'' = σ''(a)(a')² + σ'(a) a''
                        next.zx[i * n_out + j] = s1 * ax;
                        next.zxx[i * n_out + j] = s2 * ax * ax + s1 * axx;
                    }
                }
            }
        }

        let out = &ws.states[last + 1];
        Ok(InputJet {
            value: out.z[0],
            dx: (0..d).map(|i| out.zx[i]).collect(),
            dxx: (0..d).map(|i| out.zxx[i]).collect(),
        })
    }

    /// Reverse pass through the jet graph recorded by the last
    /// [`MlpParams::forward_jet_with`] on `ws`. Accumulates `seed`-weighted
    /// parameter adjoints into `grad` (same flat layout as [`MlpParams::values`]).
    pub fn backward_jet(&self, ws: &mut JetWorkspace, seed: &JetSeed, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.values.len());
        let d = self.arch.input_dim;
        let act = self.arch.activation;
        let last = self.arch.num_layers() - 1;

        // Adjoint of the output state.
        let gout = &mut ws.adj_a;
        gout.reset(1, d);
        gout.z[0] = seed.value;
        for i in 0..d {
            gout.zx[i] = seed.dx[i];
            gout.zxx[i] = seed.dxx[i];
        }

        for l in (0..=last).rev() {
            let span = self.spans[l];
            let n_in = span.in_dim;
            let n_out = span.out_dim;

            // Adjoints w.r.t. the pre-activation jet (ga, gax, gaxx) are formed
            // in place inside the current output adjoint buffer.
            if l < last {
                let tape = &ws.hidden[l];
                let state_out = &ws.states[l + 1];
                let gcur = &mut ws.adj_a;
                for j in 0..n_out {
                    let z = state_out.z[j];
                    let s1 = tape.s1[j];
                    let s2 = act.d2_from(z, s1);
                    let s3 = act.d3_from(z, s1);
                    let mut ga = gcur.z[j] * s1;
                    for i in 0..d {
                        let ax = tape.ax[i * n_out + j];
                        let axx = tape.axx[i * n_out + j];
                        let gzx = gcur.zx[i * n_out + j];
                        let gzxx = gcur.zxx[i * n_out + j];
                        ga += gzx * s2 * ax + gzxx * (s3 * ax * ax + s2 * axx);
                        gcur.zx[i * n_out + j] = gzx * s1 + gzxx * 2.0 * s2 * ax;
                        gcur.zxx[i * n_out + j] = gzxx * s1;
                    }
                    gcur.z[j] = ga;
                }
            }

            // Parameter adjoints and propagation through the affine map.
            let prev_state = &ws.states[l];
            let ga_state = &ws.adj_a;
            let gprev = &mut ws.adj_b;
            gprev.reset(n_in, d);
            for j in 0..n_out {
                let row_w = span.w + j * n_in;
                let ga = ga_state.z[j];
                grad[span.b + j] += ga;
                let row = &self.values[row_w..row_w + n_in];
                {
                    let gw = &mut grad[row_w..row_w + n_in];
                    for k in 0..n_in {
                        gw[k] += ga * prev_state.z[k];
                        gprev.z[k] += row[k] * ga;
                    }
                }
                for i in 0..d {
                    let gax = ga_state.zx[i * n_out + j];
                    let gaxx = ga_state.zxx[i * n_out + j];
                    let zx = &prev_state.zx[i * n_in..(i + 1) * n_in];
                    let zxx = &prev_state.zxx[i * n_in..(i + 1) * n_in];
                    let gw = &mut grad[row_w..row_w + n_in];
                    let gpx = &mut gprev.zx[i * n_in..(i + 1) * n_in];
                    for k in 0..n_in {
                        gw[k] += gax * zx[k] + gaxx * zxx[k];
                        gpx[k] += row[k] * gax;
                    }
                    let gpxx = &mut gprev.zxx[i * n_in..(i + 1) * n_in];
                    for k in 0..n_in {
                        gpxx[k] += row[k] * gaxx;
                    }
                }
            }
            std::mem::swap(&mut ws.adj_a, &mut ws.adj_b);
        }
    }

    /// Serialize to a writer: little-endian `u32` header length, JSON header
    /// describing the [`Architecture`], then all parameter values as f64
    /// little-endian in flat layer order.
    pub fn save_to<W: Write>(&self, w: &mut W) -> Result<(), NetError> {
        let header = serde_json::to_vec(&self.arch)?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load_from<R: Read>(r: &mut R) -> Result<Self, NetError> {
        let mut len_buf = [0u8; 4];
        r.read_exact(&mut len_buf)?;
        let header_len = u32::from_le_bytes(len_buf) as usize;
        let mut header = vec![0u8; header_len];
        r.read_exact(&mut header)?;
        let arch: Architecture = serde_json::from_slice(&header)?;
        let count = arch.param_count();
        let mut values = vec![0.0f64; count];
        let mut buf = [0u8; 8];
        for v in &mut values {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(NetError::Corrupt("trailing bytes after parameter blob".into()));
        }
        let spans = layer_spans(&arch);
        Ok(Self { arch, values, spans })
    }
}

/// Value plus first and pure second partials of the network output at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct InputJet {
    pub value: f64,
    /// `∂u/∂x_i`, one entry per input coordinate.
    pub dx: Vec<f64>,
    /// `∂²u/∂x_i²`, one entry per input coordinate.
    pub dxx: Vec<f64>,
}

impl InputJet {
    pub fn laplacian(&self) -> f64 {
        self.dxx.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.dx.iter().all(|v| v.is_finite())
            && self.dxx.iter().all(|v| v.is_finite())
    }
}

/// Adjoint seed for the reverse pass: `∂L/∂u`, `∂L/∂(∂u/∂x_i)`, `∂L/∂(∂²u/∂x_i²)`.
#[derive(Debug, Clone)]
pub struct JetSeed {
    pub value: f64,
    pub dx: Vec<f64>,
    pub dxx: Vec<f64>,
}

impl JetSeed {
    pub fn zero(d: usize) -> Self {
        Self { value: 0.0, dx: vec![0.0; d], dxx: vec![0.0; d] }
    }

    pub fn value_only(d: usize, value: f64) -> Self {
        let mut s = Self::zero(d);
        s.value = value;
        s
    }
}

/// One layer's jet state: values `z` and, per direction `i`, flattened
/// `zx[i*n + j]`, `zxx[i*n + j]`.
#[derive(Debug, Clone)]
struct JetState {
    z: Vec<f64>,
    zx: Vec<f64>,
    zxx: Vec<f64>,
}

impl JetState {
    fn new(n: usize, d: usize) -> Self {
        Self { z: vec![0.0; n], zx: vec![0.0; n * d], zxx: vec![0.0; n * d] }
    }

    fn reset(&mut self, n: usize, d: usize) {
        self.z.clear();
        self.z.resize(n, 0.0);
        self.zx.clear();
        self.zx.resize(n * d, 0.0);
        self.zxx.clear();
        self.zxx.resize(n * d, 0.0);
    }
}

/// Per-hidden-layer tape entries needed by the reverse pass.
#[derive(Debug, Clone)]
struct HiddenTape {
    s1: Vec<f64>,
    ax: Vec<f64>,
    axx: Vec<f64>,
}

/// Reusable buffers for one point's jet forward + reverse pass.
#[derive(Debug, Clone)]
pub struct JetWorkspace {
    dim: usize,
    states: Vec<JetState>,
    hidden: Vec<HiddenTape>,
    adj_a: JetState,
    adj_b: JetState,
}

impl JetWorkspace {
    pub fn new(arch: &Architecture) -> Self {
        let d = arch.input_dim;
        let mut states = Vec::with_capacity(arch.num_layers() + 1);
        states.push(JetState::new(d, d));
        for l in 0..arch.num_layers() {
            let (_, out) = arch.layer_dims(l);
            states.push(JetState::new(out, d));
        }
        let hidden = arch
            .hidden
            .iter()
            .map(|&n| HiddenTape { s1: vec![0.0; n], ax: vec![0.0; n * d], axx: vec![0.0; n * d] })
            .collect();
        let w = arch.max_width();
        Self {
            dim: d,
            states,
            hidden,
            adj_a: JetState::new(w.max(1), d),
            adj_b: JetState::new(w.max(1), d),
        }
    }
}

/// Value and gradient of a scalar objective built from per-point jet
/// evaluations: `L(θ) = Σ_k c_k(jet_k)`.
///
/// `contribution` receives the point index and its jet and returns the point's
/// additive loss contribution together with its adjoint seed `∂c_k/∂jet_k`.
/// Points are processed, and adjoints accumulated, in slice order (the fixed
/// reduction order of the reproducibility contract).
///
/// A non-finite loss value or gradient entry is reported as a training fault.
pub fn param_gradient<F>(
    params: &MlpParams,
    points: &[Vec<f64>],
    contribution: F,
) -> Result<(f64, Vec<f64>), NetError>
where
    F: FnMut(usize, &InputJet) -> (f64, JetSeed),
{
    let mut ws = JetWorkspace::new(params.arch());
    let mut grad = vec![0.0; params.values().len()];
    let total = param_gradient_into(params, points, contribution, &mut ws, &mut grad)?;
    Ok((total, grad))
}

/// Buffer-reusing form of [`param_gradient`]: accumulates into `grad` (not
/// cleared first) and returns the summed contribution of `points`.
pub fn param_gradient_into<F>(
    params: &MlpParams,
    points: &[Vec<f64>],
    mut contribution: F,
    ws: &mut JetWorkspace,
    grad: &mut [f64],
) -> Result<f64, NetError>
where
    F: FnMut(usize, &InputJet) -> (f64, JetSeed),
{
    let mut total = 0.0;
    for (k, x) in points.iter().enumerate() {
        let jet = params.forward_jet_with(x, ws)?;
        let (value, seed) = contribution(k, &jet);
        total += value;
        params.backward_jet(ws, &seed, grad);
    }
    if !total.is_finite() {
        return Err(NetError::NonFinite("loss evaluation"));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(NetError::NonFinite("gradient accumulation"));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(arch: Architecture, seed: u64) -> MlpParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpParams::glorot_init(arch, &mut rng)
    }

    /// Independent naive evaluator: rebuilds per-layer nested matrices and
    /// walks them with fresh code, no shared helpers.
    fn naive_forward(p: &MlpParams, x: &[f64]) -> f64 {
        let arch = p.arch();
        let mut state: Vec<f64> = x.to_vec();
        for l in 0..arch.num_layers() {
            let (n_in, n_out) = arch.layer_dims(l);
            let w = p.weights(l);
            let b = p.biases(l);
            let mut out = Vec::new();
            for j in 0..n_out {
                let mut acc = b[j];
                for k in 0..n_in {
                    acc += w[j * n_in + k] * state[k];
                }
                if l + 1 < arch.num_layers() {
                    acc = match arch.activation {
                        Activation::Sin => acc.sin(),
                        Activation::Sigmoid => 1.0 / (1.0 + (-acc).exp()),
                        Activation::Tanh => acc.tanh(),
                    };
                }
                out.push(acc);
            }
            state = out;
        }
        state[0]
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn param_count_examples() {
        let a = Architecture::constant_width(2, 2, 275, Activation::Sin).unwrap();
        assert_eq!(a.param_count(), 77_001);
        let b = Architecture::constant_width(1, 1, 1, Activation::Sin).unwrap();
        assert_eq!(b.param_count(), 4);
        let c = Architecture::constant_width(3, 10, 207, Activation::Sin).unwrap();
        assert_eq!(c.param_count(), 388_540);
    }

    #[test]
    fn param_count_matches_flat_length_exhaustively() {
        for d in 1..=3 {
            for depth in 1..=4 {
                for width in 1..=8 {
                    let arch =
                        Architecture::constant_width(d, depth, width, Activation::Tanh).unwrap();
                    let p = MlpParams::zeros(arch.clone());
                    assert_eq!(arch.param_count(), p.values().len());
                }
            }
        }
    }

    #[test]
    fn glorot_bound_and_determinism() {
        // fan_in = fan_out = 3 gives bound exactly 1.
        let arch = Architecture::new(3, vec![3], Activation::Tanh).unwrap();
        let p = random_params(arch.clone(), 7);
        let bound = 1.0;
        assert!(p.weights(0).iter().all(|w| w.abs() <= bound));
        assert!(p.biases(0).iter().all(|&b| b == 0.0));

        let q = random_params(arch, 7);
        assert_eq!(p.values(), q.values());
    }

    #[test]
    fn glorot_statistics() {
        // 40 interior 50x50 layers give exactly 1e5 weights.
        let arch = Architecture::new(50, vec![50; 41], Activation::Tanh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = MlpParams::glorot_init(arch, &mut rng);
        let bound = (6.0f64 / 100.0).sqrt();
        let ws: Vec<f64> = (1..41).flat_map(|l| p.weights(l).to_vec()).collect();
        assert_eq!(ws.len(), 100_000);
        assert!(ws.iter().all(|w| w.abs() <= bound));
        let mean = ws.iter().sum::<f64>() / ws.len() as f64;
        let se = bound / 3.0f64.sqrt() / (ws.len() as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean} exceeds 3 se {}", 3.0 * se);
    }

    #[test]
    fn forward_constant_and_analytic() {
        // All zero weights, output bias c: network is constantly c.
        let arch = Architecture::new(2, vec![4], Activation::Sin).unwrap();
        let mut p = MlpParams::zeros(arch);
        let c = 3.25;
        p.biases_mut(1)[0] = c;
        for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0]] {
            assert_eq!(p.forward(&x).unwrap(), c);
        }

        // One hidden sin unit wired to the first input: u(x, y) = sin(x).
        let arch = Architecture::new(2, vec![1], Activation::Sin).unwrap();
        let mut p = MlpParams::zeros(arch);
        p.weights_mut(0)[0] = 1.0;
        p.weights_mut(1)[0] = 1.0;
        let x = [0.71, 0.22];
        assert!((p.forward(&x).unwrap() - x[0].sin()).abs() < 1e-15);
        let jet = p.forward_jet(&x).unwrap();
        assert!((jet.dxx[0] - (-x[0].sin())).abs() < 1e-12);
        assert!((jet.dx[0] - x[0].cos()).abs() < 1e-12);
        assert_eq!(jet.dx[1], 0.0);
        assert_eq!(jet.dxx[1], 0.0);
    }

    #[test]
    fn forward_matches_naive_evaluator() {
        for (seed, act) in [(1, Activation::Sin), (2, Activation::Sigmoid), (3, Activation::Tanh)]
        {
            let arch = Architecture::new(3, vec![7, 5], act).unwrap();
            let p = random_params(arch, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            for _ in 0..20 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                let a = p.forward(&x).unwrap();
                let b = naive_forward(&p, &x);
                assert!(rel_err(a, b) < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn jet_value_is_bitwise_forward() {
        let arch = Architecture::new(2, vec![9, 9], Activation::Tanh).unwrap();
        let p = random_params(arch, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen::<f64>()).collect();
            let jet = p.forward_jet(&x).unwrap();
            assert_eq!(jet.value.to_bits(), p.forward(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn affine_path_has_zero_second_partials() {
        // sin is locally linear at 0 only; to get an exact affine network use
        // zero hidden weights so the hidden state is constant, then the output
        // is constant: all first and second partials vanish.
        let arch = Architecture::new(2, vec![3], Activation::Tanh).unwrap();
        let mut p = MlpParams::zeros(arch);
        p.biases_mut(0).copy_from_slice(&[0.1, -0.4, 0.7]);
        p.weights_mut(1).copy_from_slice(&[1.0, 2.0, -0.5]);
        let jet = p.forward_jet(&[0.3, 0.6]).unwrap();
        assert_eq!(jet.dx, vec![0.0, 0.0]);
        assert_eq!(jet.dxx, vec![0.0, 0.0]);
    }

    #[test]
    fn jets_match_finite_differences() {
        let h = 1e-4;
        for (seed, act) in [(11, Activation::Sin), (12, Activation::Sigmoid), (13, Activation::Tanh)]
        {
            let arch = Architecture::new(2, vec![8, 8], act).unwrap();
            let p = random_params(arch, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            for _ in 0..20 {
                let x: Vec<f64> = (0..2).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect();
                let jet = p.forward_jet(&x).unwrap();
                for i in 0..2 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fp = p.forward(&xp).unwrap();
                    let fm = p.forward(&xm).unwrap();
                    let f0 = p.forward(&x).unwrap();
                    let d1 = (fp - fm) / (2.0 * h);
                    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
                    assert!(rel_err(jet.dx[i], d1) < 1e-6, "d1 {} vs {}", jet.dx[i], d1);
                    assert!(rel_err(jet.dxx[i], d2) < 1e-6, "d2 {} vs {}", jet.dxx[i], d2);
                }
            }
        }
    }

    #[test]
    fn gradient_of_plain_output_with_zero_weights() {
        // L(θ) = u_θ(x₀) with all-zero weights: only the output bias has unit
        // gradient (hidden activations are constant but the output weight row
        // also sees σ(0) ≠ 0 for sigmoid; use sin so σ(0) = 0).
        let arch = Architecture::new(2, vec![4], Activation::Sin).unwrap();
        let p = MlpParams::zeros(arch);
        let pts = vec![vec![0.4, 0.6]];
        let (val, grad) =
            param_gradient(&p, &pts, |_, jet| (jet.value, JetSeed::value_only(2, 1.0))).unwrap();
        assert_eq!(val, 0.0);
        let out_bias_idx = grad.len() - 1;
        assert_eq!(grad[out_bias_idx], 1.0);
        let nonzero: Vec<usize> =
            (0..grad.len()).filter(|&i| grad[i] != 0.0 && i != out_bias_idx).collect();
        // Output weights see σ(0)=0 inputs; first-layer weights get zero
        // adjoint through zero output weights. Everything else is zero.
        assert!(nonzero.is_empty(), "unexpected nonzero grads at {nonzero:?}");
    }

    #[test]
    fn param_gradient_matches_finite_differences() {
        // Objective mixing value, first and second partials so every adjoint
        // path through the jet graph is exercised.
        let weights = [1.0, 0.7, -0.3, 0.2, 0.9];
        let objective = |p: &MlpParams, pts: &[Vec<f64>]| -> f64 {
            pts.iter()
                .map(|x| {
                    let j = p.forward_jet(x).unwrap();
                    weights[0] * j.value * j.value
                        + weights[1] * j.dx[0]
                        + weights[2] * j.dx[1] * j.dx[1]
                        + weights[3] * j.dxx[0]
                        + weights[4] * j.dxx[1] * j.value
                })
                .sum()
        };
        for (seed, act) in [(21, Activation::Sin), (22, Activation::Sigmoid), (23, Activation::Tanh)]
        {
            let arch = Architecture::new(2, vec![6, 5], act).unwrap();
            let mut p = random_params(arch, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let pts: Vec<Vec<f64>> =
                (0..4).map(|_| (0..2).map(|_| rng.gen::<f64>()).collect()).collect();

            let (_, grad) = param_gradient(&p, &pts, |_, j| {
                let value = weights[0] * j.value * j.value
                    + weights[1] * j.dx[0]
                    + weights[2] * j.dx[1] * j.dx[1]
                    + weights[3] * j.dxx[0]
                    + weights[4] * j.dxx[1] * j.value;
                let seed = JetSeed {
                    value: 2.0 * weights[0] * j.value + weights[4] * j.dxx[1],
                    dx: vec![weights[1], 2.0 * weights[2] * j.dx[1]],
                    dxx: vec![weights[3], weights[4] * j.value],
                };
                (value, seed)
            })
            .unwrap();

            let h = 1e-5;
            for idx in 0..p.values().len() {
                let orig = p.values()[idx];
                p.values_mut()[idx] = orig + h;
                let lp = objective(&p, &pts);
                p.values_mut()[idx] = orig - h;
                let lm = objective(&p, &pts);
                p.values_mut()[idx] = orig;
                let fd = (lp - lm) / (2.0 * h);
                assert!(
                    rel_err(grad[idx], fd) < 1e-5,
                    "seed {seed} param {idx}: {} vs fd {}",
                    grad[idx],
                    fd
                );
            }
        }
    }

    #[test]
    fn param_gradient_is_linear_in_scaling() {
        let arch = Architecture::new(2, vec![5], Activation::Sin).unwrap();
        let p = random_params(arch, 31);
        let pts = vec![vec![0.2, 0.4], vec![0.8, 0.1]];
        let (v1, g1) =
            param_gradient(&p, &pts, |_, j| (j.value, JetSeed::value_only(2, 1.0))).unwrap();
        let (v2, g2) =
            param_gradient(&p, &pts, |_, j| (2.0 * j.value, JetSeed::value_only(2, 2.0))).unwrap();
        assert_eq!(v2, 2.0 * v1);
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert_eq!(*b, 2.0 * *a);
        }
    }

    #[test]
    fn non_finite_gradient_is_a_fault() {
        let arch = Architecture::new(2, vec![3], Activation::Sin).unwrap();
        let p = random_params(arch, 41);
        let pts = vec![vec![0.5, 0.5]];
        let err = param_gradient(&p, &pts, |_, _| (f64::NAN, JetSeed::zero(2))).unwrap_err();
        assert!(matches!(err, NetError::NonFinite(_)));
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let arch = Architecture::new(2, vec![3], Activation::Sin).unwrap();
        let p = MlpParams::zeros(arch);
        assert!(matches!(
            p.forward(&[0.1, 0.2, 0.3]),
            Err(NetError::ShapeMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn params_roundtrip_through_blob() {
        let arch = Architecture::new(3, vec![4, 2], Activation::Sigmoid).unwrap();
        let p = random_params(arch, 55);
        let mut buf = Vec::new();
        p.save_to(&mut buf).unwrap();
        let q = MlpParams::load_from(&mut buf.as_slice()).unwrap();
        assert_eq!(p.arch(), q.arch());
        assert_eq!(p.values(), q.values());

        buf.push(0);
        assert!(matches!(
            MlpParams::load_from(&mut buf.as_slice()),
            Err(NetError::Corrupt(_))
        ));
    }
}
