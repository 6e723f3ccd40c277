//! Reverse-mode automatic differentiation on an append-only tape.
//!
//! A [`Tape`] is rebuilt for every forward pass (define-by-run). Each
//! operation checks shapes, evaluates eagerly, verifies the result is
//! finite, and records what it needs for the backward sweep. Calling
//! [`Tape::backward`] on a scalar node walks the tape once in reverse and
//! accumulates gradients; parameters that never reached the loss end up
//! with zero gradients rather than missing ones.
//!
//! [`grad_check`] compares those analytic gradients against central
//! differences entry by entry and reports the worst relative error. It is
//! the reference oracle the rest of the crate is tested against.

mod tensor;

pub use tensor::Tensor;
use tensor::{matmul_acc, matmul_nt, matmul_nt_acc, matmul_tn, matmul_tn_acc};

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    ShapeMismatch {
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("non-finite value produced by {op}")]
    NonFiniteValue { op: &'static str },
    #[error("non-finite gradient at node {node}")]
    NonFiniteGradient { node: usize },
    #[error("backward needs a 1x1 loss node, got {shape}")]
    NotScalar { shape: String },
    #[error("masked softmax row {row} has no support")]
    EmptySoftmaxRow { row: usize },
}

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Matmul(usize, usize),
    Add(usize, usize),
    /// Broadcast a 1 x d bias row over every row of the left operand.
    AddRow(usize, usize),
    Hadamard(usize, usize),
    Transpose(usize),
    Relu(usize),
    Tanh(usize),
    Sigmoid(usize),
    Scale(usize, f64),
    /// Column-wise sum over rows: n x d -> 1 x d. Summation runs in sorted
    /// value order per column, so any row permutation of the input produces
    /// bit-identical output.
    RowSum(usize),
    FullSum(usize),
    Mean(usize),
    Reshape(usize),
    /// Row softmax over the support of a constant 0/1 mask; entries off the
    /// support are exactly zero.
    MaskedRowSoftmax(usize, usize),
}

enum Value {
    Owned(Tensor),
    Shared(Arc<Tensor>),
}

impl Value {
    fn get(&self) -> &Tensor {
        match self {
            Value::Owned(t) => t,
            Value::Shared(t) => t,
        }
    }
}

struct Node {
    op: Op,
    value: Value,
    requires_grad: bool,
    is_param: bool,
}

/// Append-only computation record.
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

fn dims(t: &Tensor) -> String {
    format!("{}x{}", t.rows(), t.cols())
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            nodes: Vec::new(),
            grads: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        self.nodes[id.0].value.get()
    }

    /// Gradient of the last `backward` call with respect to `id`. Present
    /// for every parameter node (zero when the parameter never influenced
    /// the loss); interior gradients are consumed during the sweep.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    /// Move a gradient out of the tape, leaving `None` behind. Cheaper than
    /// cloning through [`Tape::grad`] when the tape is about to be dropped.
    pub fn take_grad(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads.get_mut(id.0).and_then(|g| g.take())
    }

    /// Record a constant input.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push_node(Op::Leaf, Value::Owned(value), false, false)
    }

    /// Record a constant input without copying its storage.
    pub fn shared_leaf(&mut self, value: Arc<Tensor>) -> NodeId {
        self.push_node(Op::Leaf, Value::Shared(value), false, false)
    }

    /// Record a trainable parameter; `backward` always materializes its
    /// gradient.
    pub fn param(&mut self, value: Arc<Tensor>) -> NodeId {
        self.push_node(Op::Leaf, Value::Shared(value), true, true)
    }

    fn push_node(&mut self, op: Op, value: Value, requires_grad: bool, is_param: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
            is_param,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn push_op(&mut self, op: Op, value: Tensor, requires_grad: bool) -> Result<NodeId, AutodiffError> {
        if !value.is_finite() {
            return Err(AutodiffError::NonFiniteValue { op: op_name(op) });
        }
        Ok(self.push_node(op, Value::Owned(value), requires_grad, false))
    }

    fn requires(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols() != tb.rows() {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul",
                left: dims(ta),
                right: dims(tb),
            });
        }
        let mut out = Tensor::zeros(ta.rows(), tb.cols());
        matmul_acc(ta, tb, out.data_mut());
        let req = self.requires(a) || self.requires(b);
        self.push_op(Op::Matmul(a.0, b.0), out, req)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(AutodiffError::ShapeMismatch {
                op: "add",
                left: dims(ta),
                right: dims(tb),
            });
        }
        let mut out = ta.clone();
        for (o, &x) in out.data_mut().iter_mut().zip(tb.data()) {
            *o += x;
        }
        let req = self.requires(a) || self.requires(b);
        self.push_op(Op::Add(a.0, b.0), out, req)
    }

    /// `a + bias` where `bias` is a 1 x d row added to every row of `a`.
    pub fn add_row(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId, AutodiffError> {
        let (ta, tb) = (self.value(a), self.value(bias));
        if tb.rows() != 1 || ta.cols() != tb.cols() {
            return Err(AutodiffError::ShapeMismatch {
                op: "add-row",
                left: dims(ta),
                right: dims(tb),
            });
        }
        let mut out = ta.clone();
        let cols = out.cols();
        for i in 0..out.rows() {
            let row = &mut out.data_mut()[i * cols..(i + 1) * cols];
            for (o, &x) in row.iter_mut().zip(tb.data()) {
                *o += x;
            }
        }
        let req = self.requires(a) || self.requires(bias);
        self.push_op(Op::AddRow(a.0, bias.0), out, req)
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(AutodiffError::ShapeMismatch {
                op: "hadamard",
                left: dims(ta),
                right: dims(tb),
            });
        }
        let mut out = ta.clone();
        for (o, &x) in out.data_mut().iter_mut().zip(tb.data()) {
            *o *= x;
        }
        let req = self.requires(a) || self.requires(b);
        self.push_op(Op::Hadamard(a.0, b.0), out, req)
    }

    pub fn transpose(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let out = self.value(a).transposed();
        let req = self.requires(a);
        self.push_op(Op::Transpose(a.0), out, req)
    }

    pub fn relu(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let mut out = self.value(a).clone();
        for x in out.data_mut() {
            *x = x.max(0.0);
        }
        let req = self.requires(a);
        self.push_op(Op::Relu(a.0), out, req)
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let mut out = self.value(a).clone();
        for x in out.data_mut() {
            *x = x.tanh();
        }
        let req = self.requires(a);
        self.push_op(Op::Tanh(a.0), out, req)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let mut out = self.value(a).clone();
        for x in out.data_mut() {
            *x = 1.0 / (1.0 + (-*x).exp());
        }
        let req = self.requires(a);
        self.push_op(Op::Sigmoid(a.0), out, req)
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> Result<NodeId, AutodiffError> {
        let mut out = self.value(a).clone();
        for x in out.data_mut() {
            *x *= factor;
        }
        let req = self.requires(a);
        self.push_op(Op::Scale(a.0, factor), out, req)
    }

    /// Sum the rows of an n x d tensor into a 1 x d row. Each column is
    /// summed in ascending value order, so the result does not depend on
    /// the order of the input rows.
    pub fn row_sum(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let ta = self.value(a);
        let (n, d) = ta.shape();
        let mut out = Tensor::zeros(1, d);
        let mut column = Vec::with_capacity(n);
        for j in 0..d {
            column.clear();
            column.extend((0..n).map(|i| ta.get(i, j)));
            column.sort_unstable_by(f64::total_cmp);
            out.set(0, j, column.iter().sum());
        }
        let req = self.requires(a);
        self.push_op(Op::RowSum(a.0), out, req)
    }

    pub fn full_sum(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let total: f64 = self.value(a).data().iter().sum();
        let req = self.requires(a);
        self.push_op(Op::FullSum(a.0), Tensor::from_vec(1, 1, vec![total]), req)
    }

    pub fn mean(&mut self, a: NodeId) -> Result<NodeId, AutodiffError> {
        let ta = self.value(a);
        let total: f64 = ta.data().iter().sum();
        let value = total / ta.len() as f64;
        let req = self.requires(a);
        self.push_op(Op::Mean(a.0), Tensor::from_vec(1, 1, vec![value]), req)
    }

    /// Reinterpret the entries of `a` in row-major order as a rows x cols
    /// tensor.
    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> Result<NodeId, AutodiffError> {
        let ta = self.value(a);
        if ta.len() != rows * cols {
            return Err(AutodiffError::ShapeMismatch {
                op: "reshape",
                left: dims(ta),
                right: format!("{rows}x{cols}"),
            });
        }
        let out = Tensor::from_vec(rows, cols, ta.data().to_vec());
        let req = self.requires(a);
        self.push_op(Op::Reshape(a.0), out, req)
    }

    /// Row-wise softmax restricted to the nonzero entries of `mask`;
    /// entries off the support are exactly zero. The mask is treated as a
    /// constant.
    pub fn masked_row_softmax(&mut self, scores: NodeId, mask: NodeId) -> Result<NodeId, AutodiffError> {
        let (ts, tm) = (self.value(scores), self.value(mask));
        if ts.shape() != tm.shape() {
            return Err(AutodiffError::ShapeMismatch {
                op: "masked-row-softmax",
                left: dims(ts),
                right: dims(tm),
            });
        }
        let (n, d) = ts.shape();
        let mut out = Tensor::zeros(n, d);
        for i in 0..n {
            let mut max = f64::NEG_INFINITY;
            for j in 0..d {
                if tm.get(i, j) != 0.0 {
                    max = max.max(ts.get(i, j));
                }
            }
            if max == f64::NEG_INFINITY {
                return Err(AutodiffError::EmptySoftmaxRow { row: i });
            }
            let mut denom = 0.0;
            for j in 0..d {
                if tm.get(i, j) != 0.0 {
                    denom += (ts.get(i, j) - max).exp();
                }
            }
            for j in 0..d {
                if tm.get(i, j) != 0.0 {
                    out.set(i, j, (ts.get(i, j) - max).exp() / denom);
                }
            }
        }
        let req = self.requires(scores);
        self.push_op(Op::MaskedRowSoftmax(scores.0, mask.0), out, req)
    }

    /// Reverse sweep from a scalar loss node. Gradients become available
    /// through [`Tape::grad`].
    pub fn backward(&mut self, loss: NodeId) -> Result<(), AutodiffError> {
        let loss_value = self.value(loss);
        if loss_value.shape() != (1, 1) {
            return Err(AutodiffError::NotScalar {
                shape: dims(loss_value),
            });
        }

        self.grads.clear();
        self.grads.resize_with(self.nodes.len(), || None);
        add_grad(
            &mut self.grads,
            &self.nodes,
            loss.0,
            Tensor::filled(1, 1, 1.0),
        );

        for i in (0..=loss.0).rev() {
            if !self.nodes[i].requires_grad {
                continue;
            }
            let Some(g) = self.grads[i].take() else {
                continue;
            };
            if matches!(self.nodes[i].op, Op::Leaf) {
                // Parameter gradient, finished accumulating. Keep it for
                // the caller; finiteness is guarded where it is consumed.
                self.grads[i] = Some(g);
                continue;
            }
            if !g.is_finite() {
                return Err(AutodiffError::NonFiniteGradient { node: i });
            }
            let nodes = &self.nodes;
            let grads = &mut self.grads;
            let input = |id: usize| nodes[id].value.get();
            let wants = |id: usize| nodes[id].requires_grad;
            match nodes[i].op {
                Op::Leaf => unreachable!("leaves are restored above"),
                Op::Matmul(a, b) => {
                    // The first contribution is written into a fresh
                    // tensor instead of zero-then-accumulate; the dense
                    // weight gradients are the hottest tensors on the
                    // tape and each gets exactly one.
                    if wants(a) {
                        match &mut grads[a] {
                            Some(da) => matmul_nt_acc(&g, input(b), da.data_mut()),
                            slot => *slot = Some(matmul_nt(&g, input(b))),
                        }
                    }
                    if wants(b) {
                        match &mut grads[b] {
                            Some(db) => matmul_tn_acc(input(a), &g, db.data_mut()),
                            slot => *slot = Some(matmul_tn(input(a), &g)),
                        }
                    }
                }
                Op::Add(a, b) => {
                    if wants(a) && wants(b) {
                        add_grad(grads, nodes, a, g.clone());
                        add_grad(grads, nodes, b, g);
                    } else if wants(a) {
                        add_grad(grads, nodes, a, g);
                    } else if wants(b) {
                        add_grad(grads, nodes, b, g);
                    }
                }
                Op::AddRow(a, bias) => {
                    if wants(bias) {
                        let d = g.cols();
                        let mut db = Tensor::zeros(1, d);
                        for i in 0..g.rows() {
                            for j in 0..d {
                                db.set(0, j, db.get(0, j) + g.get(i, j));
                            }
                        }
                        add_grad(grads, nodes, bias, db);
                    }
                    if wants(a) {
                        add_grad(grads, nodes, a, g);
                    }
                }
                Op::Hadamard(a, b) => {
                    if wants(a) && wants(b) {
                        add_grad(grads, nodes, a, mul_into(g.clone(), input(b)));
                        add_grad(grads, nodes, b, mul_into(g, input(a)));
                    } else if wants(a) {
                        add_grad(grads, nodes, a, mul_into(g, input(b)));
                    } else if wants(b) {
                        add_grad(grads, nodes, b, mul_into(g, input(a)));
                    }
                }
                Op::Transpose(a) => {
                    if wants(a) {
                        add_grad(grads, nodes, a, g.transposed());
                    }
                }
                Op::Relu(a) => {
                    if wants(a) {
                        let mut da = g;
                        for (x, &v) in da.data_mut().iter_mut().zip(input(a).data()) {
                            if v <= 0.0 {
                                *x = 0.0;
                            }
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::Tanh(a) => {
                    if wants(a) {
                        let mut da = g;
                        let y = nodes[i].value.get();
                        for (x, &t) in da.data_mut().iter_mut().zip(y.data()) {
                            *x *= 1.0 - t * t;
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::Sigmoid(a) => {
                    if wants(a) {
                        let mut da = g;
                        let y = nodes[i].value.get();
                        for (x, &s) in da.data_mut().iter_mut().zip(y.data()) {
                            *x *= s * (1.0 - s);
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::Scale(a, factor) => {
                    if wants(a) {
                        let mut da = g;
                        for x in da.data_mut() {
                            *x *= factor;
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::RowSum(a) => {
                    if wants(a) {
                        let (n, d) = input(a).shape();
                        let mut da = Tensor::zeros(n, d);
                        for i in 0..n {
                            for j in 0..d {
                                da.set(i, j, g.get(0, j));
                            }
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::FullSum(a) => {
                    if wants(a) {
                        let (n, d) = input(a).shape();
                        add_grad(grads, nodes, a, Tensor::filled(n, d, g.scalar()));
                    }
                }
                Op::Mean(a) => {
                    if wants(a) {
                        let (n, d) = input(a).shape();
                        let v = g.scalar() / (n * d) as f64;
                        add_grad(grads, nodes, a, Tensor::filled(n, d, v));
                    }
                }
                Op::Reshape(a) => {
                    if wants(a) {
                        let (n, d) = input(a).shape();
                        let da = Tensor::from_vec(n, d, g.data().to_vec());
                        add_grad(grads, nodes, a, da);
                    }
                }
                Op::MaskedRowSoftmax(a, _mask) => {
                    if wants(a) {
                        let y = self.nodes[i].value.get();
                        let (n, d) = y.shape();
                        let mut da = Tensor::zeros(n, d);
                        for r in 0..n {
                            let mut dot = 0.0;
                            for c in 0..d {
                                dot += g.get(r, c) * y.get(r, c);
                            }
                            for c in 0..d {
                                da.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                            }
                        }
                        add_grad(grads, nodes, a, da);
                    }
                }
            }
        }

        // A parameter that never fed the loss gets no flow from the sweep;
        // materialize its zero gradient so callers can rely on `grad`.
        for (slot, node) in self.grads.iter_mut().zip(&self.nodes) {
            if node.is_param && slot.is_none() {
                let t = node.value.get();
                *slot = Some(Tensor::zeros(t.rows(), t.cols()));
            }
        }
        Ok(())
    }
}

fn add_grad(grads: &mut [Option<Tensor>], nodes: &[Node], id: usize, delta: Tensor) {
    let slot = &mut grads[id];
    match slot {
        Some(g) => {
            debug_assert_eq!(g.shape(), delta.shape());
            for (x, &y) in g.data_mut().iter_mut().zip(delta.data()) {
                *x += y;
            }
        }
        None => {
            debug_assert_eq!(nodes[id].value.get().shape(), delta.shape());
            *slot = Some(delta);
        }
    }
}

fn mul_into(mut t: Tensor, other: &Tensor) -> Tensor {
    for (x, &y) in t.data_mut().iter_mut().zip(other.data()) {
        *x *= y;
    }
    t
}

fn op_name(op: Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::Matmul(..) => "matmul",
        Op::Add(..) => "add",
        Op::AddRow(..) => "add-row",
        Op::Hadamard(..) => "hadamard",
        Op::Transpose(..) => "transpose",
        Op::Relu(..) => "relu",
        Op::Tanh(..) => "tanh",
        Op::Sigmoid(..) => "sigmoid",
        Op::Scale(..) => "scale",
        Op::RowSum(..) => "row-sum",
        Op::FullSum(..) => "full-sum",
        Op::Mean(..) => "mean",
        Op::Reshape(..) => "reshape",
        Op::MaskedRowSoftmax(..) => "masked-row-softmax",
    }
}

/// A differentiable scalar function of a parameter list, expressed as a
/// tape builder so [`grad_check`] can run both the analytic and the
/// numeric side from one definition.
pub trait ScalarProgram {
    /// Build the forward graph. `params` holds one leaf per parameter
    /// tensor, in the same order the caller passed them to `grad_check`.
    fn build(&self, tape: &mut Tape, params: &[NodeId]) -> Result<NodeId, AutodiffError>;

    /// Optional shortcut evaluating the program with `params[tensor]`
    /// entry `entry` shifted by `delta`. Must compute exactly the same
    /// function as a full rebuild; `grad_check` verifies a sample of
    /// entries against the rebuild path and panics on divergence.
    fn eval_shifted(
        &self,
        _params: &[Tensor],
        _tensor: usize,
        _entry: usize,
        _delta: f64,
    ) -> Option<Result<f64, AutodiffError>> {
        None
    }
}

impl<F> ScalarProgram for F
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId, AutodiffError>,
{
    fn build(&self, tape: &mut Tape, params: &[NodeId]) -> Result<NodeId, AutodiffError> {
        self(tape, params)
    }
}

fn eval_program<P: ScalarProgram>(program: &P, params: &[Arc<Tensor>]) -> Result<f64, AutodiffError> {
    let mut tape = Tape::new();
    let ids: Vec<NodeId> = params.iter().map(|p| tape.param(p.clone())).collect();
    let loss = program.build(&mut tape, &ids)?;
    Ok(tape.value(loss).scalar())
}

/// Compare analytic gradients with central differences of step `h` for
/// every entry of every parameter tensor, returning the largest relative
/// error `|analytic - numeric| / max(1, |analytic|)`.
pub fn grad_check<P: ScalarProgram>(
    program: &P,
    params: &[Tensor],
    h: f64,
) -> Result<f64, AutodiffError> {
    let mut shared: Vec<Arc<Tensor>> = params.iter().cloned().map(Arc::new).collect();

    // Analytic side: one forward/backward pass.
    let analytic: Vec<Tensor> = {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = shared.iter().map(|p| tape.param(p.clone())).collect();
        let loss = program.build(&mut tape, &ids)?;
        tape.backward(loss)?;
        ids.iter().map(|&id| tape.grad(id).unwrap().clone()).collect()
    };

    let plain: Vec<Tensor> = params.to_vec();
    let total_entries: usize = params.iter().map(|p| p.len()).sum();
    let probe_stride = (total_entries / 64).max(1);

    let mut worst = 0.0f64;
    let mut seen = 0usize;
    for t in 0..shared.len() {
        for e in 0..shared[t].len() {
            let numeric = match (
                program.eval_shifted(&plain, t, e, h),
                program.eval_shifted(&plain, t, e, -h),
            ) {
                (Some(up), Some(down)) => {
                    let (up, down) = (up?, down?);
                    // Trust the shortcut only if it matches a full rebuild
                    // on sampled entries.
                    if seen % probe_stride == 0 {
                        let up_ref = eval_entry_shifted(program, &mut shared, t, e, h)?;
                        let down_ref = eval_entry_shifted(program, &mut shared, t, e, -h)?;
                        let tol = 1e-9 * (1.0 + up_ref.abs().max(down_ref.abs()));
                        assert!(
                            (up - up_ref).abs() <= tol && (down - down_ref).abs() <= tol,
                            "eval_shifted diverged from rebuild at tensor {t} entry {e}: \
                             {up} vs {up_ref}, {down} vs {down_ref}"
                        );
                    }
                    (up - down) / (2.0 * h)
                }
                _ => {
                    let up = eval_entry_shifted(program, &mut shared, t, e, h)?;
                    let down = eval_entry_shifted(program, &mut shared, t, e, -h)?;
                    (up - down) / (2.0 * h)
                }
            };
            let a = analytic[t].data()[e];
            let err = (a - numeric).abs() / a.abs().max(1.0);
            worst = worst.max(err);
            seen += 1;
        }
    }
    Ok(worst)
}

fn eval_entry_shifted<P: ScalarProgram>(
    program: &P,
    shared: &mut [Arc<Tensor>],
    tensor: usize,
    entry: usize,
    delta: f64,
) -> Result<f64, AutodiffError> {
    let original = shared[tensor].data()[entry];
    Arc::get_mut(&mut shared[tensor])
        .expect("no outstanding tape may hold the parameters during grad_check")
        .data_mut()[entry] = original + delta;
    let result = eval_program(program, shared);
    Arc::get_mut(&mut shared[tensor]).unwrap().data_mut()[entry] = original;
    result
}
