//! Graph convolution layers, attention, gated skip connections, readout
//! and predictor, composed into a configurable forward pass.
//!
//! Four variants share one architecture: plain convolutions, convolutions
//! with multi-head attention over neighbors, and either of those with a
//! learned gate blending each layer's output into its input. Hidden
//! layout is [input 22 -> 32 -> ... -> 32 -> 512 -> 512 -> 512 -> 1] at
//! the default widths.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::autodiff::{AutodiffError, NodeId, Tape, Tensor};
use crate::featurize::FEATURE_DIM;
use crate::rng::SplitMix64;

pub const DEFAULT_HIDDEN_DIM: usize = 32;
pub const DEFAULT_READOUT_DIM: usize = 512;
pub const DEFAULT_LAYERS: usize = 3;
pub const DEFAULT_HEADS: usize = 4;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("unknown {kind} \"{given}\", expected one of {expected}")]
    UnknownName {
        kind: &'static str,
        given: String,
        expected: &'static str,
    },
    #[error("variant {variant} fixes its skip behavior; combine override {mode} does not apply")]
    CombineOverrideConflict { variant: Variant, mode: CombineMode },
    #[error("at least one convolution layer is required")]
    NoLayers,
    #[error("attention needs at least one head")]
    NoHeads,
    #[error("hidden and readout widths must be positive")]
    ZeroWidth,
}

/// Which atom-state update rule and skip behavior the model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Gcn,
    GcnAttention,
    GcnGate,
    GcnAttentionGate,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Gcn,
        Variant::GcnAttention,
        Variant::GcnGate,
        Variant::GcnAttentionGate,
    ];

    pub fn uses_attention(self) -> bool {
        matches!(self, Variant::GcnAttention | Variant::GcnAttentionGate)
    }

    pub fn uses_gate(self) -> bool {
        matches!(self, Variant::GcnGate | Variant::GcnAttentionGate)
    }

    /// Skip behavior when no override is in play: plain variants add the
    /// layer input back, gated variants blend with the learned gate.
    pub fn default_combine(self) -> CombineMode {
        if self.uses_gate() {
            CombineMode::Gsc
        } else {
            CombineMode::Sc
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gcn => "gcn",
            Variant::GcnAttention => "gcn+attention",
            Variant::GcnGate => "gcn+gate",
            Variant::GcnAttentionGate => "gcn+attention+gate",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Variant, ModelError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| ModelError::UnknownName {
                kind: "variant",
                given: s.to_string(),
                expected: "gcn, gcn+attention, gcn+gate, gcn+attention+gate",
            })
    }
}

/// How attention coefficients are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttentionMode {
    /// tanh of a learned bilinear form per head, masked to the adjacency
    /// support.
    Coupling,
    /// A one-hidden-layer MLP scores each neighbor pair from the
    /// concatenated transformed states; scores pass through a row softmax
    /// over neighbors. Single shared head.
    SoftmaxConcat,
}

impl AttentionMode {
    pub fn name(self) -> &'static str {
        match self {
            AttentionMode::Coupling => "coupling",
            AttentionMode::SoftmaxConcat => "softmax-concat",
        }
    }
}

impl fmt::Display for AttentionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttentionMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<AttentionMode, ModelError> {
        match s {
            "coupling" => Ok(AttentionMode::Coupling),
            "softmax-concat" => Ok(AttentionMode::SoftmaxConcat),
            _ => Err(ModelError::UnknownName {
                kind: "attention mode",
                given: s.to_string(),
                expected: "coupling, softmax-concat",
            }),
        }
    }
}

/// How a layer's output is merged with its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    None,
    Sc,
    Gsc,
}

impl CombineMode {
    pub fn name(self) -> &'static str {
        match self {
            CombineMode::None => "none",
            CombineMode::Sc => "sc",
            CombineMode::Gsc => "gsc",
        }
    }
}

impl fmt::Display for CombineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombineMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<CombineMode, ModelError> {
        match s {
            "none" => Ok(CombineMode::None),
            "sc" => Ok(CombineMode::Sc),
            "gsc" => Ok(CombineMode::Gsc),
            _ => Err(ModelError::UnknownName {
                kind: "combine mode",
                given: s.to_string(),
                expected: "none, sc, gsc",
            }),
        }
    }
}

/// Everything needed to build or restore a model's parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub variant: Variant,
    pub layers: usize,
    pub heads: usize,
    pub attention_mode: AttentionMode,
    /// Depth-study escape hatch: force `none` or `sc` on the non-gated
    /// variants to compare against skipless stacks. Gated variants reject
    /// any override.
    pub combine_override: Option<CombineMode>,
    pub hidden_dim: usize,
    pub readout_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            variant: Variant::Gcn,
            layers: DEFAULT_LAYERS,
            heads: DEFAULT_HEADS,
            attention_mode: AttentionMode::Coupling,
            combine_override: None,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            readout_dim: DEFAULT_READOUT_DIM,
        }
    }
}

impl ModelConfig {
    pub fn with_variant(variant: Variant) -> ModelConfig {
        ModelConfig {
            variant,
            ..ModelConfig::default()
        }
    }

    pub fn effective_combine(&self) -> CombineMode {
        self.combine_override
            .unwrap_or_else(|| self.variant.default_combine())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.layers == 0 {
            return Err(ModelError::NoLayers);
        }
        if self.heads == 0 {
            return Err(ModelError::NoHeads);
        }
        if self.hidden_dim == 0 || self.readout_dim == 0 {
            return Err(ModelError::ZeroWidth);
        }
        if let Some(mode) = self.combine_override {
            let wants_gate = mode == CombineMode::Gsc;
            if wants_gate != self.variant.uses_gate() {
                return Err(ModelError::CombineOverrideConflict {
                    variant: self.variant,
                    mode,
                });
            }
        }
        Ok(())
    }
}

/// Pair-scoring MLP for softmax attention, split so the two halves of the
/// concatenated input keep separate weight blocks.
#[derive(Clone)]
pub struct ConcatMlp {
    pub w_left: Arc<Tensor>,
    pub w_right: Arc<Tensor>,
    pub b_hidden: Arc<Tensor>,
    pub w_out: Arc<Tensor>,
    pub b_out: Arc<Tensor>,
}

#[derive(Clone)]
pub struct GateParams {
    pub u_z1: Arc<Tensor>,
    pub u_z2: Arc<Tensor>,
    pub b_z: Arc<Tensor>,
}

#[derive(Clone)]
pub struct LayerParams {
    pub w: Arc<Tensor>,
    /// One coupling matrix per head; empty unless the variant uses
    /// coupling attention.
    pub couplings: Vec<Arc<Tensor>>,
    pub concat_mlp: Option<ConcatMlp>,
    pub gate: Option<GateParams>,
}

#[derive(Clone)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub embed: Arc<Tensor>,
    pub conv_layers: Vec<LayerParams>,
    pub readout_w: Arc<Tensor>,
    pub readout_b: Arc<Tensor>,
    pub dense1_w: Arc<Tensor>,
    pub dense1_b: Arc<Tensor>,
    pub dense2_w: Arc<Tensor>,
    pub dense2_b: Arc<Tensor>,
    pub dense3_w: Arc<Tensor>,
    pub dense3_b: Arc<Tensor>,
}

const ATTENTION_SCORE_HIDDEN: usize = 32;

fn glorot(rng: &mut SplitMix64, rows: usize, cols: usize, fan: (usize, usize)) -> Arc<Tensor> {
    let bound = (6.0 / (fan.0 + fan.1) as f64).sqrt();
    Arc::new(Tensor::from_fn(rows, cols, |_, _| {
        rng.uniform(-bound, bound)
    }))
}

fn zeros(rows: usize, cols: usize) -> Arc<Tensor> {
    Arc::new(Tensor::zeros(rows, cols))
}

impl ModelParams {
    /// Fresh parameters: uniform Glorot weights, zero biases. The zero
    /// gate bias starts every gate at one half.
    pub fn init(config: ModelConfig, rng: &mut SplitMix64) -> Result<ModelParams, ModelError> {
        config.validate()?;
        let d = config.hidden_dim;
        let r = config.readout_dim;

        let embed = glorot(rng, FEATURE_DIM, d, (FEATURE_DIM, d));
        let mut conv_layers = Vec::with_capacity(config.layers);
        for _ in 0..config.layers {
            let w = glorot(rng, d, d, (d, d));
            let mut couplings = Vec::new();
            let mut concat_mlp = None;
            if config.variant.uses_attention() {
                match config.attention_mode {
                    AttentionMode::Coupling => {
                        for _ in 0..config.heads {
                            couplings.push(glorot(rng, d, d, (d, d)));
                        }
                    }
                    AttentionMode::SoftmaxConcat => {
                        // Both halves act on one concatenated 2d-wide input,
                        // so the fan-in counts both blocks.
                        let h = ATTENTION_SCORE_HIDDEN;
                        concat_mlp = Some(ConcatMlp {
                            w_left: glorot(rng, d, h, (2 * d, h)),
                            w_right: glorot(rng, d, h, (2 * d, h)),
                            b_hidden: zeros(1, h),
                            w_out: glorot(rng, h, 1, (h, 1)),
                            b_out: zeros(1, 1),
                        });
                    }
                }
            }
            let gate = config.variant.uses_gate().then(|| GateParams {
                u_z1: glorot(rng, d, d, (d, d)),
                u_z2: glorot(rng, d, d, (d, d)),
                b_z: zeros(1, d),
            });
            conv_layers.push(LayerParams {
                w,
                couplings,
                concat_mlp,
                gate,
            });
        }

        Ok(ModelParams {
            config,
            embed,
            conv_layers,
            readout_w: glorot(rng, d, r, (d, r)),
            readout_b: zeros(1, r),
            dense1_w: glorot(rng, r, r, (r, r)),
            dense1_b: zeros(1, r),
            dense2_w: glorot(rng, r, r, (r, r)),
            dense2_b: zeros(1, r),
            dense3_w: glorot(rng, r, 1, (r, 1)),
            dense3_b: zeros(1, 1),
        })
    }

    /// All parameter tensors in the fixed serialization order: embed, then
    /// per layer the weight, attention tensors, and gate tensors, then
    /// readout and predictor weights with their biases.
    pub fn tensors(&self) -> Vec<&Arc<Tensor>> {
        let mut out = Vec::new();
        out.push(&self.embed);
        for layer in &self.conv_layers {
            out.push(&layer.w);
            for c in &layer.couplings {
                out.push(c);
            }
            if let Some(mlp) = &layer.concat_mlp {
                out.push(&mlp.w_left);
                out.push(&mlp.w_right);
                out.push(&mlp.b_hidden);
                out.push(&mlp.w_out);
                out.push(&mlp.b_out);
            }
            if let Some(gate) = &layer.gate {
                out.push(&gate.u_z1);
                out.push(&gate.u_z2);
                out.push(&gate.b_z);
            }
        }
        out.push(&self.readout_w);
        out.push(&self.readout_b);
        out.push(&self.dense1_w);
        out.push(&self.dense1_b);
        out.push(&self.dense2_w);
        out.push(&self.dense2_b);
        out.push(&self.dense3_w);
        out.push(&self.dense3_b);
        out
    }

    /// Mutable view in the same order as [`ModelParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Arc<Tensor>> {
        let mut out = Vec::new();
        out.push(&mut self.embed);
        for layer in &mut self.conv_layers {
            out.push(&mut layer.w);
            for c in &mut layer.couplings {
                out.push(c);
            }
            if let Some(mlp) = &mut layer.concat_mlp {
                out.push(&mut mlp.w_left);
                out.push(&mut mlp.w_right);
                out.push(&mut mlp.b_hidden);
                out.push(&mut mlp.w_out);
                out.push(&mut mlp.b_out);
            }
            if let Some(gate) = &mut layer.gate {
                out.push(&mut gate.u_z1);
                out.push(&mut gate.u_z2);
                out.push(&mut gate.b_z);
            }
        }
        out.push(&mut self.readout_w);
        out.push(&mut self.readout_b);
        out.push(&mut self.dense1_w);
        out.push(&mut self.dense1_b);
        out.push(&mut self.dense2_w);
        out.push(&mut self.dense2_b);
        out.push(&mut self.dense3_w);
        out.push(&mut self.dense3_b);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Parameter tensor shapes for a configuration, in the same order as
    /// [`ModelParams::tensors`].
    pub fn tensor_shapes(config: &ModelConfig) -> Vec<(usize, usize)> {
        let d = config.hidden_dim;
        let r = config.readout_dim;
        let mut shapes = vec![(FEATURE_DIM, d)];
        for _ in 0..config.layers {
            shapes.push((d, d));
            if config.variant.uses_attention() {
                match config.attention_mode {
                    AttentionMode::Coupling => {
                        shapes.extend(std::iter::repeat((d, d)).take(config.heads));
                    }
                    AttentionMode::SoftmaxConcat => {
                        let h = ATTENTION_SCORE_HIDDEN;
                        shapes.extend([(d, h), (d, h), (1, h), (h, 1), (1, 1)]);
                    }
                }
            }
            if config.variant.uses_gate() {
                shapes.extend([(d, d), (d, d), (1, d)]);
            }
        }
        shapes.extend([
            (d, r),
            (1, r),
            (r, r),
            (1, r),
            (r, r),
            (1, r),
            (r, 1),
            (1, 1),
        ]);
        shapes
    }

    /// Rebuild structured parameters from a flat tensor list in
    /// [`ModelParams::tensors`] order. Panics if shapes do not match the
    /// configuration; callers validate sizes first.
    pub fn from_tensors(config: ModelConfig, tensors: Vec<Arc<Tensor>>) -> ModelParams {
        let shapes = ModelParams::tensor_shapes(&config);
        assert_eq!(tensors.len(), shapes.len(), "tensor count mismatch");
        for (t, s) in tensors.iter().zip(&shapes) {
            assert_eq!(t.shape(), *s, "tensor shape mismatch");
        }

        let mut it = tensors.into_iter();
        let embed = it.next().unwrap();
        let mut conv_layers = Vec::with_capacity(config.layers);
        for _ in 0..config.layers {
            let w = it.next().unwrap();
            let mut couplings = Vec::new();
            let mut concat_mlp = None;
            if config.variant.uses_attention() {
                match config.attention_mode {
                    AttentionMode::Coupling => {
                        couplings = (0..config.heads).map(|_| it.next().unwrap()).collect();
                    }
                    AttentionMode::SoftmaxConcat => {
                        concat_mlp = Some(ConcatMlp {
                            w_left: it.next().unwrap(),
                            w_right: it.next().unwrap(),
                            b_hidden: it.next().unwrap(),
                            w_out: it.next().unwrap(),
                            b_out: it.next().unwrap(),
                        });
                    }
                }
            }
            let gate = config.variant.uses_gate().then(|| GateParams {
                u_z1: it.next().unwrap(),
                u_z2: it.next().unwrap(),
                b_z: it.next().unwrap(),
            });
            conv_layers.push(LayerParams {
                w,
                couplings,
                concat_mlp,
                gate,
            });
        }

        ModelParams {
            config,
            embed,
            conv_layers,
            readout_w: it.next().unwrap(),
            readout_b: it.next().unwrap(),
            dense1_w: it.next().unwrap(),
            dense1_b: it.next().unwrap(),
            dense2_w: it.next().unwrap(),
            dense2_b: it.next().unwrap(),
            dense3_w: it.next().unwrap(),
            dense3_b: it.next().unwrap(),
        }
    }
}

/// One convolution step: ReLU(A (H W)) with the raw self-looped adjacency,
/// summing neighbor states without degree normalization.
pub fn gcn_update(tape: &mut Tape, h: NodeId, a: NodeId, w: NodeId) -> Result<NodeId, AutodiffError> {
    let hw = tape.matmul(h, w)?;
    let agg = tape.matmul(a, hw)?;
    tape.relu(agg)
}

/// Attention coefficients for one coupling head: tanh((H W) C (H W)ᵀ)
/// masked so entries without an edge are exactly zero.
pub fn attention_coeffs(
    tape: &mut Tape,
    hw: NodeId,
    a: NodeId,
    c: NodeId,
) -> Result<NodeId, AutodiffError> {
    let hwc = tape.matmul(hw, c)?;
    let hwt = tape.transpose(hw)?;
    let scores = tape.matmul(hwc, hwt)?;
    let bounded = tape.tanh(scores)?;
    tape.hadamard(bounded, a)
}

/// Aggregate transformed neighbor states under precomputed attention
/// coefficients, averaging the heads before the activation.
pub fn attention_update_with_coeffs(
    tape: &mut Tape,
    alphas: &[NodeId],
    hw: NodeId,
) -> Result<NodeId, AutodiffError> {
    assert!(!alphas.is_empty(), "attention needs at least one head");
    let mut total: Option<NodeId> = None;
    for &alpha in alphas {
        let contribution = tape.matmul(alpha, hw)?;
        total = Some(match total {
            Some(t) => tape.add(t, contribution)?,
            None => contribution,
        });
    }
    let averaged = tape.scale(total.unwrap(), 1.0 / alphas.len() as f64)?;
    tape.relu(averaged)
}

/// Multi-head coupling attention step: coefficients per head, head
/// average, ReLU.
pub fn attention_update(
    tape: &mut Tape,
    h: NodeId,
    a: NodeId,
    w: NodeId,
    couplings: &[NodeId],
) -> Result<NodeId, AutodiffError> {
    let hw = tape.matmul(h, w)?;
    let alphas = couplings
        .iter()
        .map(|&c| attention_coeffs(tape, hw, a, c))
        .collect::<Result<Vec<_>, _>>()?;
    attention_update_with_coeffs(tape, &alphas, hw)
}

/// Pair scores from the concat MLP, row-softmaxed over each atom's
/// neighborhood. Returns an n x n coefficient matrix that is zero off the
/// adjacency support and sums to one across each row's neighbors.
pub fn softmax_attention_coeffs(
    tape: &mut Tape,
    hw: NodeId,
    a: NodeId,
    mlp: &ConcatMlpIds,
) -> Result<NodeId, AutodiffError> {
    let n = tape.value(hw).rows();
    // Selector matrices expand the n states into all n^2 ordered pairs:
    // row p = i*n + j of `left` is state i, of `right` is state j.
    let mut left_sel = Tensor::zeros(n * n, n);
    let mut right_sel = Tensor::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            left_sel.set(i * n + j, i, 1.0);
            right_sel.set(i * n + j, j, 1.0);
        }
    }
    let left_sel = tape.leaf(left_sel);
    let right_sel = tape.leaf(right_sel);
    let left = tape.matmul(left_sel, hw)?;
    let right = tape.matmul(right_sel, hw)?;
    let lw = tape.matmul(left, mlp.w_left)?;
    let rw = tape.matmul(right, mlp.w_right)?;
    let pre = tape.add(lw, rw)?;
    let pre = tape.add_row(pre, mlp.b_hidden)?;
    let hidden = tape.relu(pre)?;
    let scores = tape.matmul(hidden, mlp.w_out)?;
    let scores = tape.add_row(scores, mlp.b_out)?;
    let grid = tape.reshape(scores, n, n)?;
    tape.masked_row_softmax(grid, a)
}

pub struct ConcatMlpIds {
    pub w_left: NodeId,
    pub w_right: NodeId,
    pub b_hidden: NodeId,
    pub w_out: NodeId,
    pub b_out: NodeId,
}

pub struct GateIds {
    pub u_z1: NodeId,
    pub u_z2: NodeId,
    pub b_z: NodeId,
}

/// Merge a layer's output with its input: pass through, add, or blend by
/// a learned per-entry gate z = sigmoid(H_new U_z1 + H_old U_z2 + b_z).
pub fn combine(
    tape: &mut Tape,
    h_new: NodeId,
    h_old: NodeId,
    mode: CombineMode,
    gate: Option<&GateIds>,
) -> Result<NodeId, AutodiffError> {
    match mode {
        CombineMode::None => Ok(h_new),
        CombineMode::Sc => tape.add(h_new, h_old),
        CombineMode::Gsc => {
            let gate = gate.expect("gsc combine requires gate parameters");
            let from_new = tape.matmul(h_new, gate.u_z1)?;
            let from_old = tape.matmul(h_old, gate.u_z2)?;
            let pre = tape.add(from_new, from_old)?;
            let pre = tape.add_row(pre, gate.b_z)?;
            let z = tape.sigmoid(pre)?;
            assert_gate_range(tape.value(z));
            let (rows, cols) = tape.value(z).shape();
            let ones = tape.leaf(Tensor::filled(rows, cols, 1.0));
            let neg_z = tape.scale(z, -1.0)?;
            let one_minus_z = tape.add(ones, neg_z)?;
            let keep_new = tape.hadamard(z, h_new)?;
            let keep_old = tape.hadamard(one_minus_z, h_old)?;
            tape.add(keep_new, keep_old)
        }
    }
}

/// Graph latent: each atom state through one dense + ReLU, summed over
/// atoms. The sum makes the result independent of atom order.
pub fn readout(
    tape: &mut Tape,
    h: NodeId,
    w: NodeId,
    b: NodeId,
) -> Result<NodeId, AutodiffError> {
    let dense = tape.matmul(h, w)?;
    let dense = tape.add_row(dense, b)?;
    let active = tape.relu(dense)?;
    tape.row_sum(active)
}

/// Property head: two ReLU dense layers and a final linear scalar.
#[allow(clippy::too_many_arguments)]
pub fn predict(
    tape: &mut Tape,
    z: NodeId,
    d1w: NodeId,
    d1b: NodeId,
    d2w: NodeId,
    d2b: NodeId,
    d3w: NodeId,
    d3b: NodeId,
) -> Result<NodeId, AutodiffError> {
    let h1 = tape.matmul(z, d1w)?;
    let h1 = tape.add_row(h1, d1b)?;
    let h1 = tape.relu(h1)?;
    let h2 = tape.matmul(h1, d2w)?;
    let h2 = tape.add_row(h2, d2b)?;
    let h2 = tape.relu(h2)?;
    let out = tape.matmul(h2, d3w)?;
    tape.add_row(out, d3b)
}

/// Debug-build tripwire: coupling attention is a masked tanh and softmax
/// attention a convex weighting, so every coefficient lives in [-1, 1].
fn assert_attention_range(t: &Tensor) {
    debug_assert!(
        t.data().iter().all(|v| (-1.0..=1.0).contains(v)),
        "attention coefficient outside [-1, 1]"
    );
}

/// Debug-build tripwire: a sigmoid gate saturating to an exact 0 or 1
/// means the pre-activation blew past +-37, which training should never
/// produce.
fn assert_gate_range(t: &Tensor) {
    debug_assert!(
        t.data().iter().all(|&v| v > 0.0 && v < 1.0),
        "gate value outside (0, 1)"
    );
}

/// Handles into a built forward pass.
pub struct Forward {
    /// 1 x 1 property prediction.
    pub prediction: NodeId,
    /// Parameter nodes in [`ModelParams::tensors`] order.
    pub param_ids: Vec<NodeId>,
    /// Final atom states after the last combine, n x hidden.
    pub node_states: NodeId,
    /// Graph latent after readout, 1 x readout width.
    pub graph_latent: NodeId,
    /// Attention coefficient nodes, outer index layer, inner index head.
    pub attention: Vec<Vec<NodeId>>,
    /// Gate value nodes per layer.
    pub gates: Vec<NodeId>,
}

/// Forward-pass handles when the caller owns the parameter nodes.
pub struct ForwardParts {
    pub prediction: NodeId,
    pub node_states: NodeId,
    pub graph_latent: NodeId,
    pub attention: Vec<Vec<NodeId>>,
    pub gates: Vec<NodeId>,
}

/// Number of parameter tensors a model with this configuration carries,
/// in [`ModelParams::tensors`] order.
pub fn expected_tensor_count(config: &ModelConfig) -> usize {
    let attention = if config.variant.uses_attention() {
        match config.attention_mode {
            AttentionMode::Coupling => config.heads,
            AttentionMode::SoftmaxConcat => 5,
        }
    } else {
        0
    };
    let gate = if config.variant.uses_gate() { 3 } else { 0 };
    1 + config.layers * (1 + attention + gate) + 8
}

struct ParamCursor<'a> {
    ids: &'a [NodeId],
    pos: usize,
}

impl ParamCursor<'_> {
    fn next(&mut self) -> NodeId {
        let id = self.ids[self.pos];
        self.pos += 1;
        id
    }
}

/// Build the model's graph from parameter nodes already on the tape.
/// `ids` must follow [`ModelParams::tensors`] order for `config`.
pub fn forward_from_ids(
    tape: &mut Tape,
    config: &ModelConfig,
    ids: &[NodeId],
    x: &Tensor,
    a: &Tensor,
) -> Result<ForwardParts, ModelError> {
    config.validate()?;
    assert_eq!(
        ids.len(),
        expected_tensor_count(config),
        "parameter id list does not match the configuration"
    );
    let mut cursor = ParamCursor { ids, pos: 0 };

    let x_node = tape.leaf(x.clone());
    let a_node = tape.leaf(a.clone());

    let embed = cursor.next();
    let mut h = tape.matmul(x_node, embed)?;

    let combine_mode = config.effective_combine();
    let mut attention = Vec::new();
    let mut gates = Vec::new();

    for _ in 0..config.layers {
        let w = cursor.next();
        let h_new = if config.variant.uses_attention() {
            let hw = tape.matmul(h, w)?;
            let alphas = match config.attention_mode {
                AttentionMode::Coupling => (0..config.heads)
                    .map(|_| {
                        let c = cursor.next();
                        attention_coeffs(tape, hw, a_node, c)
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                AttentionMode::SoftmaxConcat => {
                    let mlp = ConcatMlpIds {
                        w_left: cursor.next(),
                        w_right: cursor.next(),
                        b_hidden: cursor.next(),
                        w_out: cursor.next(),
                        b_out: cursor.next(),
                    };
                    vec![softmax_attention_coeffs(tape, hw, a_node, &mlp)?]
                }
            };
            for &alpha in &alphas {
                assert_attention_range(tape.value(alpha));
            }
            attention.push(alphas.clone());
            attention_update_with_coeffs(tape, &alphas, hw)?
        } else {
            gcn_update(tape, h, a_node, w)?
        };

        h = if config.variant.uses_gate() {
            let gate = GateIds {
                u_z1: cursor.next(),
                u_z2: cursor.next(),
                b_z: cursor.next(),
            };
            let from_new = tape.matmul(h_new, gate.u_z1)?;
            let from_old = tape.matmul(h, gate.u_z2)?;
            let pre = tape.add(from_new, from_old)?;
            let pre = tape.add_row(pre, gate.b_z)?;
            let z = tape.sigmoid(pre)?;
            assert_gate_range(tape.value(z));
            gates.push(z);
            let (rows, cols) = tape.value(z).shape();
            let ones = tape.leaf(Tensor::filled(rows, cols, 1.0));
            let neg_z = tape.scale(z, -1.0)?;
            let one_minus_z = tape.add(ones, neg_z)?;
            let keep_new = tape.hadamard(z, h_new)?;
            let keep_old = tape.hadamard(one_minus_z, h)?;
            tape.add(keep_new, keep_old)?
        } else {
            combine(tape, h_new, h, combine_mode, None)?
        };
    }

    let readout_w = cursor.next();
    let readout_b = cursor.next();
    let graph_latent = readout(tape, h, readout_w, readout_b)?;

    let d1w = cursor.next();
    let d1b = cursor.next();
    let d2w = cursor.next();
    let d2b = cursor.next();
    let d3w = cursor.next();
    let d3b = cursor.next();
    let prediction = predict(tape, graph_latent, d1w, d1b, d2w, d2b, d3w, d3b)?;

    assert_eq!(cursor.pos, cursor.ids.len(), "every parameter consumed");

    Ok(ForwardParts {
        prediction,
        node_states: h,
        graph_latent,
        attention,
        gates,
    })
}

/// Build the whole model on a tape: embed, convolution stack with the
/// variant's update and combine rules, readout, predictor. Parameter
/// tensors are shared with the tape, not copied.
pub fn model_forward(
    tape: &mut Tape,
    params: &ModelParams,
    x: &Tensor,
    a: &Tensor,
) -> Result<Forward, ModelError> {
    let param_ids: Vec<NodeId> = params
        .tensors()
        .into_iter()
        .map(|t| tape.param(t.clone()))
        .collect();
    let parts = forward_from_ids(tape, &params.config, &param_ids, x, a)?;
    Ok(Forward {
        prediction: parts.prediction,
        param_ids,
        node_states: parts.node_states,
        graph_latent: parts.graph_latent,
        attention: parts.attention,
        gates: parts.gates,
    })
}
