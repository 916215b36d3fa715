//! Define-by-run reverse-mode autodiff over [`Tensor`] values.
//!
//! A [`Tape`] records tensor ops as they execute; [`Tape::backward`] walks the
//! record in reverse and accumulates exact gradients for every node. Ops are
//! tensor-granular (matmul, row softmax, masked pooling, embedding lookup),
//! which keeps graphs small while staying finite-difference checkable.

use crate::tensor::Tensor;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    /// C = A^ta · B^tb
    MatMul { ta: bool, tb: bool },
    Add,
    Sub,
    Mul,
    /// (m,n) + (1,n) broadcast over rows.
    AddRow,
    Scale(f64),
    Tanh,
    Exp,
    /// Per-row softmax; masked-out entries (applied at forward time) get
    /// probability 0, which is all backward needs.
    RowSoftmax,
    /// Per-row log-softmax over the full row.
    RowLogSoftmax,
    /// Per-row log-sum-exp over allowed entries, output (m,1).
    MaskedLseRows { allow: Vec<bool> },
    /// Mean over rows with `keep == true`, output (1,n).
    MaskedMeanRows { keep: Vec<bool> },
    /// Rows rescaled to unit L2 norm.
    NormalizeRows,
    /// Rows of input[0] (the table) selected by id, output (ids.len(), n).
    EmbedLookup { ids: Vec<usize> },
    GatherRows { rows: Vec<usize> },
    /// Selected elements as a (k,1) column.
    GatherElems { coords: Vec<(usize, usize)> },
    ConcatRows,
    ConcatCols,
    SliceCols { from: usize, to: usize },
    MeanAll,
    SumAll,
    /// Elementwise sum of all inputs (same shape).
    AddN,
}

struct Node {
    op: Op,
    inputs: Vec<Var>,
    value: Tensor,
}

/// Gradient store produced by [`Tape::backward`].
pub struct Grads(Vec<Option<Tensor>>);

impl Grads {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.0[v.0].as_ref()
    }

    /// Gradient of `v`, or zeros of the given shape if `v` never received one.
    pub fn get_or_zeros(&self, v: Var, rows: usize, cols: usize) -> Tensor {
        self.0[v.0].clone().unwrap_or_else(|| Tensor::zeros(rows, cols))
    }
}

/// The op record. All graph construction goes through methods on this type.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, inputs: Vec<Var>, value: Tensor) -> Var {
        self.nodes.push(Node { op, inputs, value });
        Var(self.nodes.len() - 1)
    }

    /// Register a tensor as a graph leaf (parameter or constant).
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push(Op::Leaf, vec![], t)
    }

    pub fn scalar(&mut self, v: f64) -> Var {
        self.leaf(Tensor::new(1, 1, vec![v]))
    }

    pub fn matmul(&mut self, a: Var, b: Var, ta: bool, tb: bool) -> Var {
        let value = self.value(a).matmul(self.value(b), ta, tb);
        self.push(Op::MatMul { ta, tb }, vec![a, b], value)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape());
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p + q).collect();
        let value = Tensor::new(x.rows(), x.cols(), data);
        self.push(Op::Add, vec![a, b], value)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape());
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p - q).collect();
        let value = Tensor::new(x.rows(), x.cols(), data);
        self.push(Op::Sub, vec![a, b], value)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape());
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p * q).collect();
        let value = Tensor::new(x.rows(), x.cols(), data);
        self.push(Op::Mul, vec![a, b], value)
    }

    /// `(m,n) + (1,n)`, the bias add.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (x, r) = (self.value(a), self.value(row));
        assert_eq!(r.rows(), 1);
        assert_eq!(x.cols(), r.cols());
        let mut value = x.clone();
        for i in 0..value.rows() {
            for (v, b) in value.row_mut(i).iter_mut().zip(r.row(0)) {
                *v += b;
            }
        }
        self.push(Op::AddRow, vec![a, row], value)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).scale(s);
        self.push(Op::Scale(s), vec![a], value)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let data = x.data().iter().map(|v| v.tanh()).collect();
        let value = Tensor::new(x.rows(), x.cols(), data);
        self.push(Op::Tanh, vec![a], value)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let data = x.data().iter().map(|v| v.exp()).collect();
        let value = Tensor::new(x.rows(), x.cols(), data);
        self.push(Op::Exp, vec![a], value)
    }

    /// Row softmax; when `allow` is given, disallowed entries get probability 0
    /// and the normalization runs over allowed entries only.
    pub fn row_softmax(&mut self, a: Var, allow: Option<Vec<bool>>) -> Var {
        let x = self.value(a);
        if let Some(m) = &allow {
            assert_eq!(m.len(), x.len());
        }
        let mut value = Tensor::zeros(x.rows(), x.cols());
        let n = x.cols();
        for i in 0..x.rows() {
            let row = x.row(i);
            let amax = row
                .iter()
                .enumerate()
                .filter(|(j, _)| allow.as_ref().map_or(true, |m| m[i * n + j]))
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(amax > f64::NEG_INFINITY, "softmax row with no allowed entry");
            let mut sum = 0.0;
            let out = value.row_mut(i);
            for j in 0..n {
                if allow.as_ref().map_or(true, |m| m[i * n + j]) {
                    let e = (row[j] - amax).exp();
                    out[j] = e;
                    sum += e;
                }
            }
            for v in out.iter_mut() {
                *v /= sum;
            }
        }
        self.push(Op::RowSoftmax, vec![a], value)
    }

    pub fn row_log_softmax(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut value = x.clone();
        for i in 0..x.rows() {
            let lse = crate::tensor::log_sum_exp(x.row(i));
            for v in value.row_mut(i) {
                *v -= lse;
            }
        }
        self.push(Op::RowLogSoftmax, vec![a], value)
    }

    /// Stable per-row log-sum-exp over allowed entries, output (m,1).
    pub fn masked_lse_rows(&mut self, a: Var, allow: Vec<bool>) -> Var {
        let x = self.value(a);
        assert_eq!(allow.len(), x.len());
        let n = x.cols();
        let mut out = Vec::with_capacity(x.rows());
        for i in 0..x.rows() {
            let vals: Vec<f64> = x.row(i)
                .iter()
                .enumerate()
                .filter(|(j, _)| allow[i * n + j])
                .map(|(_, v)| *v)
                .collect();
            assert!(!vals.is_empty(), "log-sum-exp row with no allowed entry");
            out.push(crate::tensor::log_sum_exp(&vals));
        }
        let value = Tensor::new(x.rows(), 1, out);
        self.push(Op::MaskedLseRows { allow }, vec![a], value)
    }

    /// Mean over kept rows, output (1,n).
    pub fn masked_mean_rows(&mut self, a: Var, keep: Vec<bool>) -> Var {
        let x = self.value(a);
        assert_eq!(keep.len(), x.rows());
        let cnt = keep.iter().filter(|k| **k).count();
        assert!(cnt > 0, "mean over zero rows");
        let mut acc = vec![0.0; x.cols()];
        for (i, k) in keep.iter().enumerate() {
            if *k {
                for (a, v) in acc.iter_mut().zip(x.row(i)) {
                    *a += v;
                }
            }
        }
        for a in acc.iter_mut() {
            *a /= cnt as f64;
        }
        let value = Tensor::new(1, x.cols(), acc);
        self.push(Op::MaskedMeanRows { keep }, vec![a], value)
    }

    pub fn normalize_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut value = x.clone();
        for i in 0..x.rows() {
            let norm = Tensor::norm_row(x.row(i));
            assert!(norm > 0.0, "normalize_rows: zero-norm row {i}");
            for v in value.row_mut(i) {
                *v /= norm;
            }
        }
        self.push(Op::NormalizeRows, vec![a], value)
    }

    /// Select rows of a parameter table by token id.
    pub fn embed_lookup(&mut self, table: Var, ids: &[usize]) -> Var {
        let t = self.value(table);
        let mut value = Tensor::zeros(ids.len(), t.cols());
        for (i, &id) in ids.iter().enumerate() {
            assert!(id < t.rows(), "embedding id {id} out of range {}", t.rows());
            value.row_mut(i).copy_from_slice(t.row(id));
        }
        self.push(Op::EmbedLookup { ids: ids.to_vec() }, vec![table], value)
    }

    pub fn gather_rows(&mut self, a: Var, rows: &[usize]) -> Var {
        let x = self.value(a);
        let mut value = Tensor::zeros(rows.len(), x.cols());
        for (i, &r) in rows.iter().enumerate() {
            value.row_mut(i).copy_from_slice(x.row(r));
        }
        self.push(Op::GatherRows { rows: rows.to_vec() }, vec![a], value)
    }

    /// Select scattered elements into a (k,1) column.
    pub fn gather_elems(&mut self, a: Var, coords: &[(usize, usize)]) -> Var {
        let x = self.value(a);
        let data: Vec<f64> = coords.iter().map(|&(r, c)| x.get(r, c)).collect();
        let value = Tensor::new(coords.len(), 1, data);
        self.push(Op::GatherElems { coords: coords.to_vec() }, vec![a], value)
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let cols = self.value(parts[0]).cols();
        let rows: usize = parts.iter().map(|p| self.value(*p).rows()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            let t = self.value(*p);
            assert_eq!(t.cols(), cols);
            data.extend_from_slice(t.data());
        }
        self.push(Op::ConcatRows, parts.to_vec(), Tensor::new(rows, cols, data))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|p| self.value(*p).cols()).sum();
        let mut value = Tensor::zeros(rows, cols);
        let mut at = 0;
        for p in parts {
            let t = self.value(*p);
            assert_eq!(t.rows(), rows);
            for i in 0..rows {
                value.row_mut(i)[at..at + t.cols()].copy_from_slice(t.row(i));
            }
            at += t.cols();
        }
        self.push(Op::ConcatCols, parts.to_vec(), value)
    }

    pub fn slice_cols(&mut self, a: Var, from: usize, to: usize) -> Var {
        let x = self.value(a);
        assert!(from < to && to <= x.cols());
        let mut value = Tensor::zeros(x.rows(), to - from);
        for i in 0..x.rows() {
            value.row_mut(i).copy_from_slice(&x.row(i)[from..to]);
        }
        self.push(Op::SliceCols { from, to }, vec![a], value)
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let m = x.data().iter().sum::<f64>() / x.len() as f64;
        self.push(Op::MeanAll, vec![a], Tensor::new(1, 1, vec![m]))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum::<f64>();
        self.push(Op::SumAll, vec![a], Tensor::new(1, 1, vec![s]))
    }

    pub fn add_n(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let mut value = self.value(parts[0]).clone();
        for p in &parts[1..] {
            value.add_assign(self.value(*p));
        }
        self.push(Op::AddN, parts.to_vec(), value)
    }

    /// Backward from a scalar root with seed gradient 1.
    pub fn backward(&self, root: Var) -> Grads {
        assert_eq!(self.value(root).shape(), (1, 1), "backward root must be scalar");
        self.backward_seeded(root, Tensor::new(1, 1, vec![1.0]))
    }

    /// Backward from `root` with an explicit upstream gradient (a VJP).
    pub fn backward_seeded(&self, root: Var, seed: Tensor) -> Grads {
        assert_eq!(self.value(root).shape(), seed.shape());
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(seed);

        for id in (0..=root.0).rev() {
            let Some(g) = grads[id].clone() else { continue };
            let node = &self.nodes[id];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul { ta, tb } => {
                    let a = self.value(node.inputs[0]);
                    let b = self.value(node.inputs[1]);
                    let (da, db) = matmul_grads(a, b, &g, *ta, *tb);
                    accumulate(&mut grads, node.inputs[0], da);
                    accumulate(&mut grads, node.inputs[1], db);
                }
                Op::Add => {
                    accumulate(&mut grads, node.inputs[0], g.clone());
                    accumulate(&mut grads, node.inputs[1], g);
                }
                Op::Sub => {
                    accumulate(&mut grads, node.inputs[0], g.clone());
                    accumulate(&mut grads, node.inputs[1], g.scale(-1.0));
                }
                Op::Mul => {
                    let a = self.value(node.inputs[0]);
                    let b = self.value(node.inputs[1]);
                    let da = Tensor::new(
                        g.rows(),
                        g.cols(),
                        g.data().iter().zip(b.data()).map(|(p, q)| p * q).collect(),
                    );
                    let db = Tensor::new(
                        g.rows(),
                        g.cols(),
                        g.data().iter().zip(a.data()).map(|(p, q)| p * q).collect(),
                    );
                    accumulate(&mut grads, node.inputs[0], da);
                    accumulate(&mut grads, node.inputs[1], db);
                }
                Op::AddRow => {
                    accumulate(&mut grads, node.inputs[0], g.clone());
                    let mut col = vec![0.0; g.cols()];
                    for i in 0..g.rows() {
                        for (c, v) in col.iter_mut().zip(g.row(i)) {
                            *c += v;
                        }
                    }
                    accumulate(&mut grads, node.inputs[1], Tensor::new(1, g.cols(), col));
                }
                Op::Scale(s) => accumulate(&mut grads, node.inputs[0], g.scale(*s)),
                Op::Tanh => {
                    let y = &node.value;
                    let data = g
                        .data()
                        .iter()
                        .zip(y.data())
                        .map(|(gv, yv)| gv * (1.0 - yv * yv))
                        .collect();
                    accumulate(&mut grads, node.inputs[0], Tensor::new(g.rows(), g.cols(), data));
                }
                Op::Exp => {
                    let y = &node.value;
                    let data = g.data().iter().zip(y.data()).map(|(gv, yv)| gv * yv).collect();
                    accumulate(&mut grads, node.inputs[0], Tensor::new(g.rows(), g.cols(), data));
                }
                Op::RowSoftmax => {
                    // dx = p ⊙ (g − Σ_k g_k p_k); masked entries have p = 0.
                    let p = &node.value;
                    let mut dx = Tensor::zeros(p.rows(), p.cols());
                    for i in 0..p.rows() {
                        let dot = Tensor::dot_rows(g.row(i), p.row(i));
                        for j in 0..p.cols() {
                            dx.set(i, j, p.get(i, j) * (g.get(i, j) - dot));
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::RowLogSoftmax => {
                    // dx = g − softmax(x) · Σ_k g_k
                    let y = &node.value;
                    let mut dx = Tensor::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let gsum: f64 = g.row(i).iter().sum();
                        for j in 0..y.cols() {
                            dx.set(i, j, g.get(i, j) - y.get(i, j).exp() * gsum);
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::MaskedLseRows { allow } => {
                    let x = self.value(node.inputs[0]);
                    let n = x.cols();
                    let mut dx = Tensor::zeros(x.rows(), n);
                    for i in 0..x.rows() {
                        let lse = node.value.get(i, 0);
                        let gi = g.get(i, 0);
                        for j in 0..n {
                            if allow[i * n + j] {
                                dx.set(i, j, gi * (x.get(i, j) - lse).exp());
                            }
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::MaskedMeanRows { keep } => {
                    let x = self.value(node.inputs[0]);
                    let cnt = keep.iter().filter(|k| **k).count() as f64;
                    let mut dx = Tensor::zeros(x.rows(), x.cols());
                    for (i, k) in keep.iter().enumerate() {
                        if *k {
                            for j in 0..x.cols() {
                                dx.set(i, j, g.get(0, j) / cnt);
                            }
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::NormalizeRows => {
                    let x = self.value(node.inputs[0]);
                    let u = &node.value;
                    let mut dx = Tensor::zeros(x.rows(), x.cols());
                    for i in 0..x.rows() {
                        let norm = Tensor::norm_row(x.row(i));
                        let dot = Tensor::dot_rows(g.row(i), u.row(i));
                        for j in 0..x.cols() {
                            dx.set(i, j, (g.get(i, j) - dot * u.get(i, j)) / norm);
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::EmbedLookup { ids } => {
                    let table = self.value(node.inputs[0]);
                    let mut dt = Tensor::zeros(table.rows(), table.cols());
                    for (i, &id) in ids.iter().enumerate() {
                        for (d, v) in dt.row_mut(id).iter_mut().zip(g.row(i)) {
                            *d += v;
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dt);
                }
                Op::GatherRows { rows } => {
                    let x = self.value(node.inputs[0]);
                    let mut dx = Tensor::zeros(x.rows(), x.cols());
                    for (i, &r) in rows.iter().enumerate() {
                        for (d, v) in dx.row_mut(r).iter_mut().zip(g.row(i)) {
                            *d += v;
                        }
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::GatherElems { coords } => {
                    let x = self.value(node.inputs[0]);
                    let mut dx = Tensor::zeros(x.rows(), x.cols());
                    for (i, &(r, c)) in coords.iter().enumerate() {
                        let v = dx.get(r, c) + g.get(i, 0);
                        dx.set(r, c, v);
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::ConcatRows => {
                    let mut at = 0;
                    for inp in &node.inputs {
                        let t = self.value(*inp);
                        let mut di = Tensor::zeros(t.rows(), t.cols());
                        for i in 0..t.rows() {
                            di.row_mut(i).copy_from_slice(g.row(at + i));
                        }
                        at += t.rows();
                        accumulate(&mut grads, *inp, di);
                    }
                }
                Op::ConcatCols => {
                    let mut at = 0;
                    for inp in &node.inputs {
                        let t = self.value(*inp);
                        let mut di = Tensor::zeros(t.rows(), t.cols());
                        for i in 0..t.rows() {
                            di.row_mut(i).copy_from_slice(&g.row(i)[at..at + t.cols()]);
                        }
                        at += t.cols();
                        accumulate(&mut grads, *inp, di);
                    }
                }
                Op::SliceCols { from, to } => {
                    let x = self.value(node.inputs[0]);
                    let mut dx = Tensor::zeros(x.rows(), x.cols());
                    for i in 0..x.rows() {
                        dx.row_mut(i)[*from..*to].copy_from_slice(g.row(i));
                    }
                    accumulate(&mut grads, node.inputs[0], dx);
                }
                Op::MeanAll => {
                    let x = self.value(node.inputs[0]);
                    let gv = g.scalar() / x.len() as f64;
                    accumulate(
                        &mut grads,
                        node.inputs[0],
                        Tensor::new(x.rows(), x.cols(), vec![gv; x.len()]),
                    );
                }
                Op::SumAll => {
                    let x = self.value(node.inputs[0]);
                    let gv = g.scalar();
                    accumulate(
                        &mut grads,
                        node.inputs[0],
                        Tensor::new(x.rows(), x.cols(), vec![gv; x.len()]),
                    );
                }
                Op::AddN => {
                    for inp in &node.inputs {
                        accumulate(&mut grads, *inp, g.clone());
                    }
                }
            }
        }
        Grads(grads)
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(acc) => acc.add_assign(&g),
        slot => *slot = Some(g),
    }
}

fn matmul_grads(a: &Tensor, b: &Tensor, g: &Tensor, ta: bool, tb: bool) -> (Tensor, Tensor) {
    match (ta, tb) {
        // C = A·B:      dA = G·Bᵀ,  dB = Aᵀ·G
        (false, false) => (g.matmul(b, false, true), a.matmul(g, true, false)),
        // C = Aᵀ·B:     dA = B·Gᵀ,  dB = A·G
        (true, false) => (b.matmul(g, false, true), a.matmul(g, false, false)),
        // C = A·Bᵀ:     dA = G·B,   dB = Gᵀ·A
        (false, true) => (g.matmul(b, false, false), g.matmul(a, true, false)),
        // C = Aᵀ·Bᵀ:    dA = Bᵀ·Gᵀ, dB = Gᵀ·Aᵀ
        (true, true) => (b.matmul(g, true, true), g.matmul(a, true, true)),
    }
}
