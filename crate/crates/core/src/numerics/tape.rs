use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2};

use crate::numerics::{Parameter, Tensor};
use crate::{Error, Result};

/// Index of a value on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

enum Op {
    /// Constant input; no gradient.
    Constant,
    /// Leaf backed by a [`Parameter`]; backward accumulates into its grad.
    Param(Parameter),
    MatMul(NodeId, NodeId),
    /// Elementwise add; rhs may be a single row broadcast over lhs rows.
    Add(NodeId, NodeId),
    /// Elementwise (Hadamard) product.
    Mul(NodeId, NodeId),
    ConcatCols(Vec<NodeId>),
    ConcatRows(Vec<NodeId>),
    SliceCols(NodeId, usize),
    SliceRows(NodeId, usize),
    Sigmoid(NodeId),
    Tanh(NodeId),
    SoftmaxRows(NodeId),
    Log(NodeId),
    Sum(NodeId),
    ScalarMul(NodeId, f64),
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Wengert list for reverse-mode differentiation.
///
/// Every forward primitive records the operation and its result; `backward`
/// replays the list in exact reverse order, applying each op's local
/// gradient rule. Parameter values are copied onto the tape at record time,
/// so a tape stays consistent even if parameters are updated afterwards.
/// Tapes are never shared across workers.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn view(t: &Tensor) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape(t.shape(), t.data()).expect("tensor invariant: len == rows*cols")
}

fn view_mut(t: &mut Tensor) -> ArrayViewMut2<'_, f64> {
    let shape = t.shape();
    ArrayViewMut2::from_shape(shape, t.data_mut()).expect("tensor invariant: len == rows*cols")
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Constant)
    }

    pub fn scalar(&mut self, value: f64) -> NodeId {
        self.constant(Tensor::scalar(value))
    }

    /// Records a parameter as a leaf; its current value is copied.
    pub fn param(&mut self, p: &Parameter) -> NodeId {
        self.push(p.value(), Op::Param(p.clone()))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ar, ac) = self.value(a).shape();
        let (br, bc) = self.value(b).shape();
        if ac != br {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: self.value(a).shape_str(),
                rhs: self.value(b).shape_str(),
            });
        }
        let mut out = Tensor::zeros(ar, bc);
        if ar == 1 {
            // row-vector times matrix: stream the matrix row-major, which
            // the blocked gemm path handles poorly at m = 1
            let x = self.value(a).data();
            let bm = self.value(b).data();
            let o = out.data_mut();
            for (k, &xv) in x.iter().enumerate() {
                if xv != 0.0 {
                    let row = &bm[k * bc..(k + 1) * bc];
                    for j in 0..bc {
                        o[j] += xv * row[j];
                    }
                }
            }
        } else {
            general_mat_mul(1.0, &view(self.value(a)), &view(self.value(b)), 0.0, &mut view_mut(&mut out));
        }
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ar, ac) = self.value(a).shape();
        let (br, bc) = self.value(b).shape();
        if !((ar == br && ac == bc) || (br == 1 && ac == bc)) {
            return Err(Error::ShapeMismatch {
                op: "add",
                lhs: self.value(a).shape_str(),
                rhs: self.value(b).shape_str(),
            });
        }
        let mut out = self.value(a).clone();
        let rhs = self.value(b);
        for r in 0..ar {
            let row = rhs.row(if br == 1 { 0 } else { r });
            let base = r * ac;
            for c in 0..ac {
                out.data_mut()[base + c] += row[c];
            }
        }
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::ShapeMismatch {
                op: "elementwise-mul",
                lhs: self.value(a).shape_str(),
                rhs: self.value(b).shape_str(),
            });
        }
        let mut out = self.value(a).clone();
        for (o, x) in out.data_mut().iter_mut().zip(self.value(b).data()) {
            *o *= *x;
        }
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::invalid("concat", "no inputs"));
        }
        let rows = self.value(parts[0]).rows();
        let mut cols = 0;
        for &p in parts {
            if self.value(p).rows() != rows {
                return Err(Error::ShapeMismatch {
                    op: "concat-cols",
                    lhs: self.value(parts[0]).shape_str(),
                    rhs: self.value(p).shape_str(),
                });
            }
            cols += self.value(p).cols();
        }
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.value(p).row(r);
                let base = r * cols + offset;
                out.data_mut()[base..base + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        Ok(self.push(out, Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::invalid("concat", "no inputs"));
        }
        let cols = self.value(parts[0]).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            if self.value(p).cols() != cols {
                return Err(Error::ShapeMismatch {
                    op: "concat-rows",
                    lhs: self.value(parts[0]).shape_str(),
                    rhs: self.value(p).shape_str(),
                });
            }
            data.extend_from_slice(self.value(p).data());
            rows += self.value(p).rows();
        }
        let out = Tensor::from_vec(rows, cols, data)?;
        Ok(self.push(out, Op::ConcatRows(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, end: usize) -> Result<NodeId> {
        let (rows, cols) = self.value(a).shape();
        if start >= end || end > cols {
            return Err(Error::invalid(
                "slice-cols",
                format!("range {}..{} out of bounds for {} columns", start, end, cols),
            ));
        }
        let width = end - start;
        let mut out = Tensor::zeros(rows, width);
        for r in 0..rows {
            let src = &self.value(a).row(r)[start..end];
            out.data_mut()[r * width..(r + 1) * width].copy_from_slice(src);
        }
        Ok(self.push(out, Op::SliceCols(a, start)))
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, end: usize) -> Result<NodeId> {
        let (rows, cols) = self.value(a).shape();
        if start >= end || end > rows {
            return Err(Error::invalid(
                "slice-rows",
                format!("range {}..{} out of bounds for {} rows", start, end, rows),
            ));
        }
        let data = self.value(a).data()[start * cols..end * cols].to_vec();
        let out = Tensor::from_vec(end - start, cols, data)?;
        Ok(self.push(out, Op::SliceRows(a, start)))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let mut out = self.value(a).clone();
        for v in out.data_mut() {
            *v = if *v >= 0.0 {
                1.0 / (1.0 + (-*v).exp())
            } else {
                let e = v.exp();
                e / (1.0 + e)
            };
        }
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let mut out = self.value(a).clone();
        for v in out.data_mut() {
            *v = v.tanh();
        }
        self.push(out, Op::Tanh(a))
    }

    /// Row-wise softmax with max subtraction for stability.
    pub fn softmax_rows(&mut self, a: NodeId) -> Result<NodeId> {
        let (rows, cols) = self.value(a).shape();
        if cols == 0 {
            return Err(Error::invalid("softmax-rows", "input has no columns"));
        }
        let mut out = self.value(a).clone();
        for r in 0..rows {
            let base = r * cols;
            let row = &mut out.data_mut()[base..base + cols];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Ok(self.push(out, Op::SoftmaxRows(a)))
    }

    /// Elementwise natural log; non-positive inputs are rejected rather than
    /// clamped so numeric bugs surface early.
    pub fn log(&mut self, a: NodeId) -> Result<NodeId> {
        if let Some((i, v)) = self.value(a).data().iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::NonPositiveLog { value: *v, index: i });
        }
        let mut out = self.value(a).clone();
        for v in out.data_mut() {
            *v = v.ln();
        }
        Ok(self.push(out, Op::Log(a)))
    }

    /// Sum of all entries, as a `1 x 1` scalar.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(total), Op::Sum(a))
    }

    pub fn scalar_mul(&mut self, a: NodeId, k: f64) -> NodeId {
        let mut out = self.value(a).clone();
        for v in out.data_mut() {
            *v *= k;
        }
        self.push(out, Op::ScalarMul(a, k))
    }

    /// Reverse pass from a scalar loss. Gradients of every reachable
    /// [`Parameter`] are *accumulated* into its grad buffer; unreached
    /// parameters are untouched. May be called more than once per tape;
    /// each call seeds only its own loss node.
    pub fn backward(&self, loss: NodeId) -> Result<()> {
        if self.value(loss).shape() != (1, 1) {
            return Err(Error::NotScalar { op: "backward", shape: self.value(loss).shape_str() });
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let dy = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(p) => p.add_to_grad(&dy),
                Op::MatMul(a, b) => {
                    if dy.rows() == 1 {
                        // contiguous hand paths for the row-vector case
                        let (_, n) = dy.shape();
                        let k = self.value(*a).cols();
                        {
                            let bm = self.value(*b);
                            let da = self.grad_slot(&mut grads, *a);
                            let dad = da.data_mut();
                            for i in 0..k {
                                let row = bm.row(i);
                                let mut acc = 0.0;
                                for j in 0..n {
                                    acc += dy.data()[j] * row[j];
                                }
                                dad[i] += acc;
                            }
                        }
                        let xv = self.value(*a);
                        let db = self.grad_slot(&mut grads, *b);
                        let dbd = db.data_mut();
                        for i in 0..k {
                            let x = xv.data()[i];
                            if x != 0.0 {
                                let base = i * n;
                                for j in 0..n {
                                    dbd[base + j] += x * dy.data()[j];
                                }
                            }
                        }
                    } else {
                        let av = view(self.value(*a));
                        let bv = view(self.value(*b));
                        let dyv = view(&dy);
                        {
                            let da = self.grad_slot(&mut grads, *a);
                            general_mat_mul(1.0, &dyv, &bv.t(), 1.0, &mut view_mut(da));
                        }
                        {
                            let db = self.grad_slot(&mut grads, *b);
                            general_mat_mul(1.0, &av.t(), &dyv, 1.0, &mut view_mut(db));
                        }
                    }
                }
                Op::Add(a, b) => {
                    {
                        let da = self.grad_slot(&mut grads, *a);
                        for (g, d) in da.data_mut().iter_mut().zip(dy.data()) {
                            *g += *d;
                        }
                    }
                    let (br, bc) = self.value(*b).shape();
                    let db = self.grad_slot(&mut grads, *b);
                    if (br, bc) == dy.shape() {
                        for (g, d) in db.data_mut().iter_mut().zip(dy.data()) {
                            *g += *d;
                        }
                    } else {
                        // broadcast row: column-sum of upstream gradient
                        for r in 0..dy.rows() {
                            let row = dy.row(r);
                            for c in 0..bc {
                                db.data_mut()[c] += row[c];
                            }
                        }
                    }
                }
                Op::Mul(a, b) => {
                    {
                        let bv = self.value(*b);
                        let da = self.grad_slot(&mut grads, *a);
                        for i in 0..dy.len() {
                            da.data_mut()[i] += dy.data()[i] * bv.data()[i];
                        }
                    }
                    let av = self.value(*a);
                    let db = self.grad_slot(&mut grads, *b);
                    for i in 0..dy.len() {
                        db.data_mut()[i] += dy.data()[i] * av.data()[i];
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (pr, pc) = self.value(p).shape();
                        let dp = self.grad_slot(&mut grads, p);
                        for r in 0..pr {
                            let src = &dy.row(r)[offset..offset + pc];
                            for c in 0..pc {
                                dp.data_mut()[r * pc + c] += src[c];
                            }
                        }
                        offset += pc;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (pr, pc) = self.value(p).shape();
                        let dp = self.grad_slot(&mut grads, p);
                        for i in 0..pr * pc {
                            dp.data_mut()[i] += dy.data()[offset * pc + i];
                        }
                        offset += pr;
                    }
                }
                Op::SliceCols(a, start) => {
                    let cols = self.value(*a).cols();
                    let width = dy.cols();
                    let da = self.grad_slot(&mut grads, *a);
                    for r in 0..dy.rows() {
                        for c in 0..width {
                            da.data_mut()[r * cols + start + c] += dy.get(r, c);
                        }
                    }
                }
                Op::SliceRows(a, start) => {
                    let cols = self.value(*a).cols();
                    let da = self.grad_slot(&mut grads, *a);
                    let base = start * cols;
                    for i in 0..dy.len() {
                        da.data_mut()[base + i] += dy.data()[i];
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let da = self.grad_slot(&mut grads, *a);
                    for i in 0..dy.len() {
                        let s = y.data()[i];
                        da.data_mut()[i] += dy.data()[i] * s * (1.0 - s);
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let da = self.grad_slot(&mut grads, *a);
                    for i in 0..dy.len() {
                        let t = y.data()[i];
                        da.data_mut()[i] += dy.data()[i] * (1.0 - t * t);
                    }
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let (rows, cols) = y.shape();
                    let da = self.grad_slot(&mut grads, *a);
                    for r in 0..rows {
                        let yr = y.row(r);
                        let dr = dy.row(r);
                        let dot: f64 = yr.iter().zip(dr).map(|(a, b)| a * b).sum();
                        for c in 0..cols {
                            da.data_mut()[r * cols + c] += yr[c] * (dr[c] - dot);
                        }
                    }
                }
                Op::Log(a) => {
                    let x = self.value(*a);
                    let da = self.grad_slot(&mut grads, *a);
                    for i in 0..dy.len() {
                        da.data_mut()[i] += dy.data()[i] / x.data()[i];
                    }
                }
                Op::Sum(a) => {
                    let g = dy.data()[0];
                    let da = self.grad_slot(&mut grads, *a);
                    for v in da.data_mut() {
                        *v += g;
                    }
                }
                Op::ScalarMul(a, k) => {
                    let k = *k;
                    let da = self.grad_slot(&mut grads, *a);
                    for i in 0..dy.len() {
                        da.data_mut()[i] += k * dy.data()[i];
                    }
                }
            }
        }
        Ok(())
    }

    fn grad_slot<'g>(&self, grads: &'g mut [Option<Tensor>], id: NodeId) -> &'g mut Tensor {
        let (r, c) = self.value(id).shape();
        grads[id.0].get_or_insert_with(|| Tensor::zeros(r, c))
    }
}
