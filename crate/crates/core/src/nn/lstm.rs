use rand::Rng;

use crate::nn::init_xavier;
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

/// Single LSTM cell with fused gate weights.
///
/// Gate pre-activations live in one `1 x 4H` row laid out as
/// `[input | forget | candidate | output]`. The forget-gate bias starts at
/// 1.0; the weight matrices are fan-scaled uniform.
pub struct LstmCell {
    input_dim: usize,
    hidden_dim: usize,
    w_x: Parameter,
    w_h: Parameter,
    bias: Parameter,
}

/// Tape handles for a cell's weights, recorded once per forward pass.
pub struct RecordedCell {
    pub(crate) wx: NodeId,
    pub(crate) wh: NodeId,
    pub(crate) b: NodeId,
}

impl LstmCell {
    pub fn new(name: &str, input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        let mut bias = Tensor::zeros(1, 4 * hidden_dim);
        for i in hidden_dim..2 * hidden_dim {
            bias.data_mut()[i] = 1.0;
        }
        LstmCell {
            input_dim,
            hidden_dim,
            w_x: Parameter::new(
                format!("{name}/w_x"),
                init_xavier(input_dim, hidden_dim, input_dim, 4 * hidden_dim, rng),
            ),
            w_h: Parameter::new(
                format!("{name}/w_h"),
                init_xavier(hidden_dim, hidden_dim, hidden_dim, 4 * hidden_dim, rng),
            ),
            bias: Parameter::new(format!("{name}/bias"), bias),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn params(&self) -> Vec<Parameter> {
        vec![self.w_x.clone(), self.w_h.clone(), self.bias.clone()]
    }

    /// Records the cell's weights on a tape once, for reuse across steps.
    pub fn record(&self, tape: &mut Tape) -> RecordedCell {
        RecordedCell {
            wx: tape.param(&self.w_x),
            wh: tape.param(&self.w_h),
            b: tape.param(&self.bias),
        }
    }

    /// One recurrence step: maps (x, h, c) to (h', c').
    pub fn step(&self, tape: &mut Tape, x: NodeId, h: NodeId, c: NodeId) -> Result<(NodeId, NodeId)> {
        let rec = self.record(tape);
        self.step_recorded(tape, &rec, x, h, c)
    }

    /// A step against weights already recorded via [`LstmCell::record`].
    pub fn step_recorded(
        &self,
        tape: &mut Tape,
        rec: &RecordedCell,
        x: NodeId,
        h: NodeId,
        c: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        if tape.value(x).shape() != (1, self.input_dim) {
            return Err(Error::ShapeMismatch {
                op: "lstm step input",
                lhs: format!("1x{}", self.input_dim),
                rhs: tape.value(x).shape_str(),
            });
        }
        let xw = tape.matmul(x, rec.wx)?;
        let hw = tape.matmul(h, rec.wh)?;
        let zsum = tape.add(xw, hw)?;
        let z = tape.add(zsum, rec.b)?;
        self.apply_gates(tape, z, c)
    }

    /// Turns one row of gate pre-activations and the previous cell state
    /// into (h', c').
    pub(crate) fn apply_gates(&self, tape: &mut Tape, z: NodeId, c: NodeId) -> Result<(NodeId, NodeId)> {
        let hd = self.hidden_dim;
        let zi = tape.slice_cols(z, 0, hd)?;
        let zf = tape.slice_cols(z, hd, 2 * hd)?;
        let zg = tape.slice_cols(z, 2 * hd, 3 * hd)?;
        let zo = tape.slice_cols(z, 3 * hd, 4 * hd)?;
        let i = tape.sigmoid(zi);
        let f = tape.sigmoid(zf);
        let g = tape.tanh(zg);
        let o = tape.sigmoid(zo);
        let fc = tape.mul(f, c)?;
        let ig = tape.mul(i, g)?;
        let c_next = tape.add(fc, ig)?;
        let tc = tape.tanh(c_next);
        let h_next = tape.mul(o, tc)?;
        Ok((h_next, c_next))
    }
}

/// Runs the cell over an `n x input_dim` matrix, returning per-step hidden
/// rows. The input projection is batched into one matmul; hidden state at
/// step t depends only on inputs 1..t.
pub fn lstm_forward(
    cell: &LstmCell,
    tape: &mut Tape,
    inputs: NodeId,
    h0: NodeId,
    c0: NodeId,
) -> Result<Vec<NodeId>> {
    let (n, d) = tape.value(inputs).shape();
    if d != cell.input_dim {
        return Err(Error::ShapeMismatch {
            op: "lstm_forward",
            lhs: format!("input_dim {}", cell.input_dim),
            rhs: tape.value(inputs).shape_str(),
        });
    }
    let rec = cell.record(tape);
    let xw = tape.matmul(inputs, rec.wx)?;
    let mut h = h0;
    let mut c = c0;
    let mut hidden = Vec::with_capacity(n);
    for t in 0..n {
        let xz = tape.slice_rows(xw, t, t + 1)?;
        let hz = tape.matmul(h, rec.wh)?;
        let zsum = tape.add(xz, hz)?;
        let z = tape.add(zsum, rec.b)?;
        let (h_next, c_next) = cell.apply_gates(tape, z, c)?;
        h = h_next;
        c = c_next;
        hidden.push(h);
    }
    Ok(hidden)
}

/// Bidirectional pass: row t of the output is
/// `concat(forward hidden at t, backward hidden at t)`, where the backward
/// cell consumes the input rows in reverse order.
pub fn bilstm_forward(
    fwd: &LstmCell,
    bwd: &LstmCell,
    tape: &mut Tape,
    inputs: NodeId,
) -> Result<NodeId> {
    if fwd.input_dim != bwd.input_dim {
        return Err(Error::ShapeMismatch {
            op: "bilstm_forward",
            lhs: format!("fwd input_dim {}", fwd.input_dim),
            rhs: format!("bwd input_dim {}", bwd.input_dim),
        });
    }
    let n = tape.value(inputs).rows();
    let zeros_f = |tape: &mut Tape, hd: usize| tape.constant(Tensor::zeros(1, hd));

    let h0 = zeros_f(tape, fwd.hidden_dim);
    let c0 = zeros_f(tape, fwd.hidden_dim);
    let hs_fwd = lstm_forward(fwd, tape, inputs, h0, c0)?;

    let mut reversed_rows = Vec::with_capacity(n);
    for t in (0..n).rev() {
        reversed_rows.push(tape.slice_rows(inputs, t, t + 1)?);
    }
    let reversed = tape.concat_rows(&reversed_rows)?;
    let h0b = zeros_f(tape, bwd.hidden_dim);
    let c0b = zeros_f(tape, bwd.hidden_dim);
    let hs_bwd_rev = lstm_forward(bwd, tape, reversed, h0b, c0b)?;

    let mut rows = Vec::with_capacity(n);
    for t in 0..n {
        rows.push(tape.concat_cols(&[hs_fwd[t], hs_bwd_rev[n - 1 - t]])?);
    }
    tape.concat_rows(&rows)
}
