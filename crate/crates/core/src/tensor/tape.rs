use super::{gemm, Tensor};
use crate::error::{Error, Result};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    /// M [a×b] · v [b]
    MatVec(Var, Var),
    /// A [a×b] · B [b×c]
    MatMul(Var, Var),
    /// A [a×b] · Bᵀ, B stored [c×b]
    MatMulNt(Var, Var),
    Hadamard(Var, Var),
    /// Each row of A [n×d] multiplied elementwise by v [d].
    MulRows(Var, Var),
    Add(Var, Var),
    Scale(Var, f64),
    Dot(Var, Var),
    Sum(Var),
    /// Column sums of A [n×d] -> [d].
    SumRows(Var),
    SoftmaxTokens(Var),
    StackRows(Vec<Var>),
    ConcatCols(Var, Var),
    Row(Var, usize),
    BceWithLogits(Var, f64),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records a forward computation and replays it in reverse.
///
/// A tape is built per forward pass and discarded afterwards; it never shares
/// buffers with the parameters it was fed, so replicas on different threads
/// each own their tape.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    macs: u64,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A value that takes no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A differentiable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn requires_grad(&self, var: Var) -> bool {
        self.nodes[var.0].requires_grad
    }

    /// Gradient after [`Tape::backward`]; `None` for nodes off the loss path.
    pub fn grad(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    pub fn take_grad(&mut self, var: Var) -> Option<Tensor> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }

    /// Multiply-accumulates performed by forward ops recorded so far.
    pub fn mac_count(&self) -> u64 {
        self.macs
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn shape(&self, var: Var) -> &[usize] {
        self.nodes[var.0].value.shape()
    }

    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var> {
        let (ms, vs) = (self.shape(m), self.shape(v));
        if ms.len() != 2 || vs.len() != 1 || ms[1] != vs[0] {
            return Err(Error::shape("matvec", ms, vs));
        }
        let (rows, inner) = (ms[0], ms[1]);
        let mut out = vec![0.0; rows];
        gemm(
            rows,
            inner,
            1,
            self.value(m).data(),
            false,
            self.value(v).data(),
            false,
            &mut out,
            false,
        );
        self.macs += (rows * inner) as u64;
        let rg = self.any_grad(&[m, v]);
        Ok(self.push(Tensor::vector(out), Op::MatVec(m, v), rg))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (as_, bs) = (self.shape(a), self.shape(b));
        if as_.len() != 2 || bs.len() != 2 || as_[1] != bs[0] {
            return Err(Error::shape("matmul", as_, bs));
        }
        let (rows, inner, cols) = (as_[0], as_[1], bs[1]);
        let mut out = vec![0.0; rows * cols];
        gemm(
            rows,
            inner,
            cols,
            self.value(a).data(),
            false,
            self.value(b).data(),
            false,
            &mut out,
            false,
        );
        self.macs += (rows * inner * cols) as u64;
        let rg = self.any_grad(&[a, b]);
        let value = Tensor::matrix(rows, cols, out)?;
        Ok(self.push(value, Op::MatMul(a, b), rg))
    }

    /// `a · bᵀ` without materializing the transpose.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (as_, bs) = (self.shape(a), self.shape(b));
        if as_.len() != 2 || bs.len() != 2 || as_[1] != bs[1] {
            return Err(Error::shape("matmul_nt", as_, bs));
        }
        let (rows, inner, cols) = (as_[0], as_[1], bs[0]);
        let mut out = vec![0.0; rows * cols];
        gemm(
            rows,
            inner,
            cols,
            self.value(a).data(),
            false,
            self.value(b).data(),
            true,
            &mut out,
            false,
        );
        self.macs += (rows * inner * cols) as u64;
        let rg = self.any_grad(&[a, b]);
        let value = Tensor::matrix(rows, cols, out)?;
        Ok(self.push(value, Op::MatMulNt(a, b), rg))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape("hadamard", self.shape(a), self.shape(b)));
        }
        let (av, bv) = (self.value(a), self.value(b));
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect();
        let value = Tensor::new(av.shape(), data)?;
        self.macs += value.len() as u64;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::Hadamard(a, b), rg))
    }

    pub fn mul_rows(&mut self, a: Var, v: Var) -> Result<Var> {
        let (as_, vs) = (self.shape(a), self.shape(v));
        if as_.len() != 2 || vs.len() != 1 || as_[1] != vs[0] {
            return Err(Error::shape("mul_rows", as_, vs));
        }
        let cols = as_[1];
        let (av, vv) = (self.value(a), self.value(v));
        let data = av
            .data()
            .iter()
            .enumerate()
            .map(|(i, x)| x * vv.data()[i % cols])
            .collect();
        let value = Tensor::new(av.shape(), data)?;
        self.macs += value.len() as u64;
        let rg = self.any_grad(&[a, v]);
        Ok(self.push(value, Op::MulRows(a, v), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape("add", self.shape(a), self.shape(b)));
        }
        let (av, bv) = (self.value(a), self.value(b));
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x + y).collect();
        let value = Tensor::new(av.shape(), data)?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::Add(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let av = self.value(a);
        let data = av.data().iter().map(|x| x * factor).collect();
        let value = Tensor {
            shape: av.shape().to_vec(),
            data,
        };
        let rg = self.any_grad(&[a]);
        self.push(value, Op::Scale(a, factor), rg)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape("dot", self.shape(a), self.shape(b)));
        }
        let (av, bv) = (self.value(a), self.value(b));
        let s: f64 = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).sum();
        self.macs += av.len() as u64;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(Tensor::scalar(s), Op::Dot(a, b), rg))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.any_grad(&[a]);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    /// Sums a `[n × d]` matrix over its rows, giving `[d]`.
    pub fn sum_rows(&mut self, a: Var) -> Result<Var> {
        let as_ = self.shape(a);
        if as_.len() != 2 {
            return Err(Error::shape("sum_rows", as_, &[]));
        }
        let cols = as_[1];
        let mut out = vec![0.0; cols];
        for row in self.value(a).data().chunks_exact(cols) {
            for (o, x) in out.iter_mut().zip(row) {
                *o += x;
            }
        }
        let rg = self.any_grad(&[a]);
        Ok(self.push(Tensor::vector(out), Op::SumRows(a), rg))
    }

    /// Softmax of a `[n × d]` matrix taken down each column, so that for every
    /// component the weights over the `n` tokens sum to one.
    pub fn softmax_over_tokens(&mut self, a: Var) -> Result<Var> {
        let av = self.value(a);
        if av.rank() != 2 {
            return Err(Error::shape("softmax_over_tokens", av.shape(), &[]));
        }
        if !av.all_finite() {
            return Err(Error::Numeric("softmax_over_tokens"));
        }
        let (rows, cols) = (av.rows(), av.cols());
        let src = av.data();
        let mut out = vec![0.0; rows * cols];
        let mut max = vec![f64::NEG_INFINITY; cols];
        for row in src.chunks_exact(cols) {
            for (m, x) in max.iter_mut().zip(row) {
                *m = m.max(*x);
            }
        }
        let mut denom = vec![0.0; cols];
        for (orow, row) in out.chunks_exact_mut(cols).zip(src.chunks_exact(cols)) {
            for j in 0..cols {
                let e = (row[j] - max[j]).exp();
                orow[j] = e;
                denom[j] += e;
            }
        }
        for orow in out.chunks_exact_mut(cols) {
            for (o, d) in orow.iter_mut().zip(&denom) {
                *o /= d;
            }
        }
        let value = Tensor::matrix(rows, cols, out)?;
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::SoftmaxTokens(a), rg))
    }

    /// Stacks equal-length vectors as the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Input("stack_rows of nothing".into()))?;
        let width = self.shape(*first).to_vec();
        if width.len() != 1 {
            return Err(Error::shape("stack_rows", &width, &[]));
        }
        let mut data = Vec::with_capacity(rows.len() * width[0]);
        for r in rows {
            if self.shape(*r) != width.as_slice() {
                return Err(Error::shape("stack_rows", &width, self.shape(*r)));
            }
            data.extend_from_slice(self.value(*r).data());
        }
        let value = Tensor::matrix(rows.len(), width[0], data)?;
        let rg = self.any_grad(rows);
        Ok(self.push(value, Op::StackRows(rows.to_vec()), rg))
    }

    /// Joins `[n × p]` and `[n × q]` side by side into `[n × (p+q)]`.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (as_, bs) = (self.shape(a), self.shape(b));
        if as_.len() != 2 || bs.len() != 2 || as_[0] != bs[0] {
            return Err(Error::shape("concat_cols", as_, bs));
        }
        let (rows, ca, cb) = (as_[0], as_[1], bs[1]);
        let (av, bv) = (self.value(a).data(), self.value(b).data());
        let mut data = Vec::with_capacity(rows * (ca + cb));
        for i in 0..rows {
            data.extend_from_slice(&av[i * ca..(i + 1) * ca]);
            data.extend_from_slice(&bv[i * cb..(i + 1) * cb]);
        }
        let value = Tensor::matrix(rows, ca + cb, data)?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::ConcatCols(a, b), rg))
    }

    /// Row `index` of a matrix as a vector.
    pub fn row(&mut self, a: Var, index: usize) -> Result<Var> {
        let av = self.value(a);
        if av.rank() != 2 || index >= av.rows() {
            return Err(Error::shape("row", av.shape(), &[index]));
        }
        let value = Tensor::vector(av.row(index).to_vec());
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::Row(a, index), rg))
    }

    /// Numerically stable binary cross-entropy of a scalar logit against a
    /// 0/1 target.
    pub fn bce_with_logits(&mut self, logit: Var, target: f64) -> Result<Var> {
        let lv = self.value(logit);
        if !lv.is_scalar() {
            return Err(Error::shape("bce_with_logits", lv.shape(), &[]));
        }
        let z = lv.item();
        let loss = z.max(0.0) - z * target + (-z.abs()).exp().ln_1p();
        if !loss.is_finite() {
            return Err(Error::Numeric("bce_with_logits"));
        }
        let rg = self.any_grad(&[logit]);
        Ok(self.push(Tensor::scalar(loss), Op::BceWithLogits(logit, target), rg))
    }

    /// Reverse pass from a scalar `loss`. Gradients accumulate over every use
    /// of a node; previous gradients on this tape are discarded.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let lv = &self.nodes[loss.0].value;
        if !lv.is_scalar() {
            return Err(Error::Contract(format!(
                "backward from non-scalar of shape {:?}",
                lv.shape()
            )));
        }
        self.grads = vec![None; self.nodes.len()];
        if !self.nodes[loss.0].requires_grad {
            return Ok(());
        }
        self.grads[loss.0] = Some(Tensor::ones(lv.shape()));

        for idx in (0..=loss.0).rev() {
            let Some(g) = self.grads[idx].take() else {
                continue;
            };
            if self.nodes[idx].requires_grad {
                self.propagate(idx, &g)?;
            }
            self.grads[idx] = Some(g);
        }
        Ok(())
    }

    fn acc(&mut self, var: Var, f: impl FnOnce(&mut [f64], &[f64])) {
        let node = &self.nodes[var.0];
        if !node.requires_grad {
            return;
        }
        let slot = self.grads[var.0].get_or_insert_with(|| Tensor::zeros(node.value.shape()));
        f(&mut slot.data, node.value.data());
    }

    fn propagate(&mut self, idx: usize, g: &Tensor) -> Result<()> {
        let op = self.nodes[idx].op.clone();
        let gd = g.data();
        match op {
            Op::Leaf => {}
            Op::MatVec(m, v) => {
                let (rows, inner) = (self.value(m).rows(), self.value(m).cols());
                let vv = self.value(v).data().to_vec();
                self.acc(m, |dm, _| gemm(rows, 1, inner, gd, false, &vv, false, dm, true));
                let mv = self.value(m).data().to_vec();
                self.acc(v, |dv, _| gemm(1, rows, inner, gd, false, &mv, false, dv, true));
            }
            Op::MatMul(a, b) => {
                let (rows, inner) = (self.value(a).rows(), self.value(a).cols());
                let cols = self.value(b).cols();
                let bv = self.value(b).data().to_vec();
                // dA = G·Bᵀ
                self.acc(a, |da, _| gemm(rows, cols, inner, gd, false, &bv, true, da, true));
                let av = self.value(a).data().to_vec();
                // dB = Aᵀ·G
                self.acc(b, |db, _| gemm(inner, rows, cols, &av, true, gd, false, db, true));
            }
            Op::MatMulNt(a, b) => {
                let (rows, inner) = (self.value(a).rows(), self.value(a).cols());
                let cols = self.value(b).rows();
                let bv = self.value(b).data().to_vec();
                // dA = G·B
                self.acc(a, |da, _| gemm(rows, cols, inner, gd, false, &bv, false, da, true));
                let av = self.value(a).data().to_vec();
                // dB = Gᵀ·A
                self.acc(b, |db, _| gemm(cols, rows, inner, gd, true, &av, false, db, true));
            }
            Op::Hadamard(a, b) => {
                let bv = self.value(b).data().to_vec();
                self.acc(a, |da, _| {
                    for ((d, g), y) in da.iter_mut().zip(gd).zip(&bv) {
                        *d += g * y;
                    }
                });
                let av = self.value(a).data().to_vec();
                self.acc(b, |db, _| {
                    for ((d, g), x) in db.iter_mut().zip(gd).zip(&av) {
                        *d += g * x;
                    }
                });
            }
            Op::MulRows(a, v) => {
                let cols = self.value(a).cols();
                let vv = self.value(v).data().to_vec();
                self.acc(a, |da, _| {
                    for (i, (d, g)) in da.iter_mut().zip(gd).enumerate() {
                        *d += g * vv[i % cols];
                    }
                });
                let av = self.value(a).data().to_vec();
                self.acc(v, |dv, _| {
                    for (i, (g, x)) in gd.iter().zip(&av).enumerate() {
                        dv[i % cols] += g * x;
                    }
                });
            }
            Op::Add(a, b) => {
                for p in [a, b] {
                    self.acc(p, |dp, _| {
                        for (d, g) in dp.iter_mut().zip(gd) {
                            *d += g;
                        }
                    });
                }
            }
            Op::Scale(a, factor) => self.acc(a, |da, _| {
                for (d, g) in da.iter_mut().zip(gd) {
                    *d += g * factor;
                }
            }),
            Op::Dot(a, b) => {
                let s = gd[0];
                let bv = self.value(b).data().to_vec();
                self.acc(a, |da, _| {
                    for (d, y) in da.iter_mut().zip(&bv) {
                        *d += s * y;
                    }
                });
                let av = self.value(a).data().to_vec();
                self.acc(b, |db, _| {
                    for (d, x) in db.iter_mut().zip(&av) {
                        *d += s * x;
                    }
                });
            }
            Op::Sum(a) => {
                let s = gd[0];
                self.acc(a, |da, _| da.iter_mut().for_each(|d| *d += s));
            }
            Op::SumRows(a) => {
                let cols = gd.len();
                self.acc(a, |da, _| {
                    for row in da.chunks_exact_mut(cols) {
                        for (d, g) in row.iter_mut().zip(gd) {
                            *d += g;
                        }
                    }
                });
            }
            Op::SoftmaxTokens(a) => {
                let y = self.nodes[idx].value.data().to_vec();
                let cols = self.nodes[idx].value.cols();
                let mut inner = vec![0.0; cols];
                for (grow, yrow) in gd.chunks_exact(cols).zip(y.chunks_exact(cols)) {
                    for j in 0..cols {
                        inner[j] += grow[j] * yrow[j];
                    }
                }
                self.acc(a, |da, _| {
                    for (i, d) in da.iter_mut().enumerate() {
                        let j = i % cols;
                        *d += y[i] * (gd[i] - inner[j]);
                    }
                });
            }
            Op::StackRows(rows) => {
                for (i, r) in rows.iter().enumerate() {
                    let width = self.value(*r).len();
                    let slice = &gd[i * width..(i + 1) * width];
                    self.acc(*r, |dr, _| {
                        for (d, g) in dr.iter_mut().zip(slice) {
                            *d += g;
                        }
                    });
                }
            }
            Op::ConcatCols(a, b) => {
                let ca = self.value(a).cols();
                let cb = self.value(b).cols();
                let width = ca + cb;
                self.acc(a, |da, _| {
                    for (drow, grow) in da.chunks_exact_mut(ca).zip(gd.chunks_exact(width)) {
                        for (d, g) in drow.iter_mut().zip(&grow[..ca]) {
                            *d += g;
                        }
                    }
                });
                self.acc(b, |db, _| {
                    for (drow, grow) in db.chunks_exact_mut(cb).zip(gd.chunks_exact(width)) {
                        for (d, g) in drow.iter_mut().zip(&grow[ca..]) {
                            *d += g;
                        }
                    }
                });
            }
            Op::Row(a, index) => {
                let cols = gd.len();
                self.acc(a, |da, _| {
                    for (d, g) in da[index * cols..(index + 1) * cols].iter_mut().zip(gd) {
                        *d += g;
                    }
                });
            }
            Op::BceWithLogits(logit, target) => {
                let z = self.value(logit).item();
                let sig = 1.0 / (1.0 + (-z).exp());
                let s = gd[0] * (sig - target);
                self.acc(logit, |dl, _| dl[0] += s);
            }
        }
        Ok(())
    }
}
