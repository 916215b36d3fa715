//! Trainable utterance encoder: token embeddings, an optional bi-directional
//! self-attention block, masked mean-pooling over non-PAD positions, and a
//! residual projection head.
//!
//! The projection head is `h + tanh(h·W1 + b1)·W2 + b2` with `W2`, `b2`
//! zero-initialized, and the attention block's output map starts at zero, so
//! a freshly initialized encoder maps an utterance exactly to the mean of its
//! token-embedding rows.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::corpus::{Vocab, PAD};
use crate::error::{Error, Result};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderConfig {
    /// Embedding / hidden dimension.
    pub n: usize,
    pub use_attention: bool,
    pub dropout_rate: f64,
    /// Parameter initialization seed.
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { n: 64, use_attention: true, dropout_rate: 0.1, seed: 1 }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("encoder dimension n must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config("dropout_rate must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Single-head attention block parameters (all n×n, no biases).
#[derive(Debug, Clone)]
pub struct AttentionBlock {
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
}

/// The encoder's parameters.
#[derive(Debug, Clone)]
pub struct EncoderModel {
    pub config: EncoderConfig,
    pub vocab_size: usize,
    pub emb: Tensor,
    pub attn: Option<AttentionBlock>,
    pub proj_w1: Tensor,
    pub proj_b1: Tensor,
    pub proj_w2: Tensor,
    pub proj_b2: Tensor,
}

/// How an encode call treats dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeMode {
    /// Deterministic; no dropout.
    Eval,
    /// Fresh dropout masks derived from the given seed.
    Train { dropout_seed: u64 },
}

pub(crate) fn uniform_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, limit: f64) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect())
}

impl EncoderModel {
    pub fn init(config: &EncoderConfig, vocab_size: usize) -> Result<EncoderModel> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(Error::Config("vocab must be built before encoder init".into()));
        }
        let n = config.n;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let limit = 1.0 / (n as f64).sqrt();
        let emb = uniform_tensor(&mut rng, vocab_size, n, limit);
        let attn = if config.use_attention {
            Some(AttentionBlock {
                wq: uniform_tensor(&mut rng, n, n, limit),
                wk: uniform_tensor(&mut rng, n, n, limit),
                wv: uniform_tensor(&mut rng, n, n, limit),
                wo: Tensor::zeros(n, n),
            })
        } else {
            None
        };
        Ok(EncoderModel {
            config: config.clone(),
            vocab_size,
            emb,
            attn,
            proj_w1: uniform_tensor(&mut rng, n, n, limit),
            proj_b1: Tensor::zeros(1, n),
            proj_w2: Tensor::zeros(n, n),
            proj_b2: Tensor::zeros(1, n),
        })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn named_params(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("emb".to_string(), &self.emb)];
        if let Some(a) = &self.attn {
            out.push(("attn.wq".to_string(), &a.wq));
            out.push(("attn.wk".to_string(), &a.wk));
            out.push(("attn.wv".to_string(), &a.wv));
            out.push(("attn.wo".to_string(), &a.wo));
        }
        out.push(("proj.w1".to_string(), &self.proj_w1));
        out.push(("proj.b1".to_string(), &self.proj_b1));
        out.push(("proj.w2".to_string(), &self.proj_w2));
        out.push(("proj.b2".to_string(), &self.proj_b2));
        out
    }

    pub fn named_params_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = vec![("emb".to_string(), &mut self.emb)];
        if let Some(a) = &mut self.attn {
            out.push(("attn.wq".to_string(), &mut a.wq));
            out.push(("attn.wk".to_string(), &mut a.wk));
            out.push(("attn.wv".to_string(), &mut a.wv));
            out.push(("attn.wo".to_string(), &mut a.wo));
        }
        out.push(("proj.w1".to_string(), &mut self.proj_w1));
        out.push(("proj.b1".to_string(), &mut self.proj_b1));
        out.push(("proj.w2".to_string(), &mut self.proj_w2));
        out.push(("proj.b2".to_string(), &mut self.proj_b2));
        out
    }
}

/// Tape handles for one registration of the encoder parameters.
#[derive(Debug, Clone)]
pub(crate) struct EncoderVars {
    pub emb: Var,
    pub attn: Option<(Var, Var, Var, Var)>,
    pub proj_w1: Var,
    pub proj_b1: Var,
    pub proj_w2: Var,
    pub proj_b2: Var,
}

impl EncoderVars {
    pub fn register(tape: &mut Tape, model: &EncoderModel) -> EncoderVars {
        EncoderVars {
            emb: tape.leaf(model.emb.clone()),
            attn: model.attn.as_ref().map(|a| {
                (
                    tape.leaf(a.wq.clone()),
                    tape.leaf(a.wk.clone()),
                    tape.leaf(a.wv.clone()),
                    tape.leaf(a.wo.clone()),
                )
            }),
            proj_w1: tape.leaf(model.proj_w1.clone()),
            proj_b1: tape.leaf(model.proj_b1.clone()),
            proj_w2: tape.leaf(model.proj_w2.clone()),
            proj_b2: tape.leaf(model.proj_b2.clone()),
        }
    }

    /// Collect this registration's parameter gradients by name.
    pub fn grads(
        &self,
        grads: &crate::tape::Grads,
        model: &EncoderModel,
        out: &mut BTreeMap<String, Tensor>,
    ) {
        let mut put = |name: &str, var: Var, rows: usize, cols: usize| {
            let g = grads.get_or_zeros(var, rows, cols);
            match out.get_mut(name) {
                Some(acc) => acc.add_assign(&g),
                None => {
                    out.insert(name.to_string(), g);
                }
            }
        };
        put("emb", self.emb, model.emb.rows(), model.emb.cols());
        if let (Some((wq, wk, wv, wo)), Some(a)) = (self.attn, model.attn.as_ref()) {
            put("attn.wq", wq, a.wq.rows(), a.wq.cols());
            put("attn.wk", wk, a.wk.rows(), a.wk.cols());
            put("attn.wv", wv, a.wv.rows(), a.wv.cols());
            put("attn.wo", wo, a.wo.rows(), a.wo.cols());
        }
        put("proj.w1", self.proj_w1, model.proj_w1.rows(), model.proj_w1.cols());
        put("proj.b1", self.proj_b1, model.proj_b1.rows(), model.proj_b1.cols());
        put("proj.w2", self.proj_w2, model.proj_w2.rows(), model.proj_w2.cols());
        put("proj.b2", self.proj_b2, model.proj_b2.rows(), model.proj_b2.cols());
    }
}

fn dropout_mask(tape: &mut Tape, rng: &mut ChaCha8Rng, rows: usize, cols: usize, rate: f64) -> Var {
    let keep = 1.0 - rate;
    let data = (0..rows * cols)
        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    tape.leaf(Tensor::new(rows, cols, data))
}

fn check_tokens(tokens: &[u32], vocab_size: usize) -> Result<()> {
    if tokens.is_empty() {
        return Err(Error::InvalidInput("cannot encode an empty token sequence".into()));
    }
    if let Some(bad) = tokens.iter().find(|t| **t as usize >= vocab_size) {
        return Err(Error::InvalidInput(format!(
            "token id {bad} out of range (vocab size {vocab_size})"
        )));
    }
    if tokens.iter().all(|t| *t == PAD) {
        return Err(Error::InvalidInput("token sequence is all PAD".into()));
    }
    Ok(())
}

/// Per-token hidden states `H` (embedding plus attention block when enabled).
/// PAD positions are excluded as attention keys, so appending PAD never
/// changes non-PAD rows.
pub(crate) fn forward_states(
    tape: &mut Tape,
    vars: &EncoderVars,
    model: &EncoderModel,
    tokens: &[u32],
    mode: EncodeMode,
    rng: &mut Option<ChaCha8Rng>,
) -> Result<Var> {
    check_tokens(tokens, model.vocab_size)?;
    let ids: Vec<usize> = tokens.iter().map(|t| *t as usize).collect();
    let m = ids.len();
    let n = model.n();
    let mut x = tape.embed_lookup(vars.emb, &ids);

    if let (EncodeMode::Train { .. }, Some(r)) = (mode, rng.as_mut()) {
        if model.config.dropout_rate > 0.0 {
            let mask = dropout_mask(tape, r, m, n, model.config.dropout_rate);
            x = tape.mul(x, mask);
        }
    }

    if let Some((wq, wk, wv, wo)) = vars.attn {
        let q = tape.matmul(x, wq, false, false);
        let k = tape.matmul(x, wk, false, false);
        let v = tape.matmul(x, wv, false, false);
        let scores = tape.matmul(q, k, false, true);
        let scaled = tape.scale(scores, 1.0 / (n as f64).sqrt());
        // every query row may attend to all non-PAD keys
        let allow: Vec<bool> = (0..m * m).map(|i| tokens[i % m] != PAD).collect();
        let attn = tape.row_softmax(scaled, Some(allow));
        let ctx = tape.matmul(attn, v, false, false);
        let out = tape.matmul(ctx, wo, false, false);
        x = tape.add(x, out);
    }
    Ok(x)
}

/// Pooled utterance representation: masked mean over non-PAD rows of `H`,
/// then the residual projection head.
pub(crate) fn forward_pooled(
    tape: &mut Tape,
    vars: &EncoderVars,
    model: &EncoderModel,
    tokens: &[u32],
    mode: EncodeMode,
) -> Result<Var> {
    let mut rng = match mode {
        EncodeMode::Train { dropout_seed } => Some(ChaCha8Rng::seed_from_u64(dropout_seed)),
        EncodeMode::Eval => None,
    };
    let states = forward_states(tape, vars, model, tokens, mode, &mut rng)?;
    let keep: Vec<bool> = tokens.iter().map(|t| *t != PAD).collect();
    let pooled = tape.masked_mean_rows(states, keep);

    let lin = tape.matmul(pooled, vars.proj_w1, false, false);
    let pre = tape.add_row(lin, vars.proj_b1);
    let mut z = tape.tanh(pre);
    if let (EncodeMode::Train { .. }, Some(r)) = (mode, rng.as_mut()) {
        if model.config.dropout_rate > 0.0 {
            let mask = dropout_mask(tape, r, 1, model.n(), model.config.dropout_rate);
            z = tape.mul(z, mask);
        }
    }
    let lin2 = tape.matmul(z, vars.proj_w2, false, false);
    let resid = tape.add(pooled, lin2);
    Ok(tape.add_row(resid, vars.proj_b2))
}

/// Encode one token sequence to its n-dimensional representation.
pub fn encode(tokens: &[u32], model: &EncoderModel, mode: EncodeMode) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let vars = EncoderVars::register(&mut tape, model);
    let h = forward_pooled(&mut tape, &vars, model, tokens, mode)?;
    Ok(tape.value(h).data().to_vec())
}

/// One entry in an [`encode_gradients`] batch.
#[derive(Debug, Clone)]
pub struct EncodeInput {
    pub tokens: Vec<u32>,
    pub mode: EncodeMode,
}

/// Exact parameter gradients of the encoder outputs composed with the given
/// upstream gradients: d/dθ Σ_i ⟨h_i, upstream_i⟩.
pub fn encode_gradients(
    batch: &[EncodeInput],
    model: &EncoderModel,
    upstream: &[Vec<f64>],
) -> Result<BTreeMap<String, Tensor>> {
    if batch.len() != upstream.len() {
        return Err(Error::InvalidInput(format!(
            "encode_gradients: {} inputs but {} upstream gradients",
            batch.len(),
            upstream.len()
        )));
    }
    let mut tape = Tape::new();
    let vars = EncoderVars::register(&mut tape, model);
    let mut terms = Vec::with_capacity(batch.len());
    for (inp, up) in batch.iter().zip(upstream) {
        if up.len() != model.n() {
            return Err(Error::InvalidInput("upstream gradient has wrong length".into()));
        }
        let h = forward_pooled(&mut tape, &vars, model, &inp.tokens, inp.mode)?;
        let u = tape.leaf(Tensor::from_row(up));
        let prod = tape.mul(h, u);
        terms.push(tape.sum_all(prod));
    }
    let loss = tape.add_n(&terms);
    let grads = tape.backward(loss);
    let mut out = BTreeMap::new();
    vars.grads(&grads, model, &mut out);
    Ok(out)
}

const ENCODER_KIND: &str = "encoder";

/// Write a versioned checkpoint carrying config, vocab hash, and parameters.
pub fn save_checkpoint(model: &EncoderModel, vocab: &Vocab, path: &Path) -> Result<()> {
    let mut ck = Checkpoint::new(
        ENCODER_KIND,
        serde_json::to_value(&model.config)?,
        vocab.hash(),
    );
    ck.tensors.insert("vocab_size".into(), Tensor::new(1, 1, vec![model.vocab_size as f64]));
    for (name, t) in model.named_params() {
        ck.tensors.insert(name, t.clone());
    }
    ck.save(path)
}

/// Load a checkpoint, enforcing format version and vocab hash.
pub fn load_checkpoint(path: &Path, vocab: &Vocab) -> Result<EncoderModel> {
    let ck = Checkpoint::load(path, ENCODER_KIND, Some(&vocab.hash()))?;
    let config: EncoderConfig = serde_json::from_value(ck.config.clone())?;
    let vocab_size = ck.tensor("vocab_size")?.scalar() as usize;
    let attn = if config.use_attention {
        Some(AttentionBlock {
            wq: ck.tensor("attn.wq")?.clone(),
            wk: ck.tensor("attn.wk")?.clone(),
            wv: ck.tensor("attn.wv")?.clone(),
            wo: ck.tensor("attn.wo")?.clone(),
        })
    } else {
        None
    };
    Ok(EncoderModel {
        config,
        vocab_size,
        emb: ck.tensor("emb")?.clone(),
        attn,
        proj_w1: ck.tensor("proj.w1")?.clone(),
        proj_b1: ck.tensor("proj.b1")?.clone(),
        proj_w2: ck.tensor("proj.w2")?.clone(),
        proj_b2: ck.tensor("proj.b2")?.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Conversation, Corpus, Utterance};

    fn test_vocab() -> Vocab {
        let texts = ["alpha beta gamma delta", "epsilon zeta eta theta", "alpha zeta beta eta"];
        let utterances = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Utterance {
                conv_id: "c".into(),
                turn_index: i,
                speaker: crate::corpus::alternate_speaker(i),
                text: t.to_string(),
                tokens: vec![],
            })
            .collect();
        let corpus = Corpus { conversations: vec![Conversation { id: "c".into(), utterances }] };
        Vocab::build(&corpus, 1, 32)
    }

    fn small_model(use_attention: bool) -> EncoderModel {
        let config = EncoderConfig { n: 6, use_attention, dropout_rate: 0.1, seed: 11 };
        EncoderModel::init(&config, 16).unwrap()
    }

    /// Give all zero-initialized maps random values so gradients flow everywhere.
    fn randomize(model: &mut EncoderModel, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, t) in model.named_params_mut() {
            for v in t.data_mut() {
                *v = rng.gen_range(-0.5..0.5);
            }
        }
    }

    #[test]
    fn single_token_is_its_embedding_row_at_init() {
        let model = small_model(false);
        let h = encode(&[7], &model, EncodeMode::Eval).unwrap();
        assert_eq!(h, model.emb.row(7).to_vec());
    }

    #[test]
    fn duplicate_tokens_pool_to_the_same_vector() {
        let model = small_model(false);
        let one = encode(&[9], &model, EncodeMode::Eval).unwrap();
        let two = encode(&[9, 9], &model, EncodeMode::Eval).unwrap();
        for (a, b) in one.iter().zip(&two) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_of_embedding_rows_at_init_with_attention() {
        // attention output map starts at zero, so the whole encoder is
        // exactly mean-pool at init even with the block enabled
        let model = small_model(true);
        let toks = [3u32, 8, 5];
        let h = encode(&toks, &model, EncodeMode::Eval).unwrap();
        for j in 0..model.n() {
            let mean: f64 =
                toks.iter().map(|t| model.emb.get(*t as usize, j)).sum::<f64>() / 3.0;
            assert!((h[j] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_independent_matrix_oracle() {
        let mut model = small_model(true);
        randomize(&mut model, 42);
        let toks = [2u32, 11, 6];
        let got = encode(&toks, &model, EncodeMode::Eval).unwrap();

        // independent straight-line forward in plain Vec math
        let n = model.n();
        let a = model.attn.as_ref().unwrap();
        let rows: Vec<Vec<f64>> = toks.iter().map(|t| model.emb.row(*t as usize).to_vec()).collect();
        let matvec = |w: &Tensor, x: &[f64]| -> Vec<f64> {
            (0..n).map(|j| (0..n).map(|i| x[i] * w.get(i, j)).sum()).collect()
        };
        let q: Vec<Vec<f64>> = rows.iter().map(|r| matvec(&a.wq, r)).collect();
        let k: Vec<Vec<f64>> = rows.iter().map(|r| matvec(&a.wk, r)).collect();
        let v: Vec<Vec<f64>> = rows.iter().map(|r| matvec(&a.wv, r)).collect();
        let mut hidden = Vec::new();
        for i in 0..3 {
            let mut sc: Vec<f64> = (0..3)
                .map(|j| {
                    (0..n).map(|d| q[i][d] * k[j][d]).sum::<f64>() / (n as f64).sqrt()
                })
                .collect();
            crate::tensor::softmax_in_place(&mut sc);
            let ctx: Vec<f64> =
                (0..n).map(|d| (0..3).map(|j| sc[j] * v[j][d]).sum()).collect();
            let out = matvec(&a.wo, &ctx);
            hidden.push((0..n).map(|d| rows[i][d] + out[d]).collect::<Vec<f64>>());
        }
        let pooled: Vec<f64> =
            (0..n).map(|d| hidden.iter().map(|r| r[d]).sum::<f64>() / 3.0).collect();
        let mut z = matvec(&model.proj_w1, &pooled);
        for (j, zj) in z.iter_mut().enumerate() {
            *zj = (*zj + model.proj_b1.get(0, j)).tanh();
        }
        let lin2 = matvec(&model.proj_w2, &z);
        let expect: Vec<f64> =
            (0..n).map(|d| pooled[d] + lin2[d] + model.proj_b2.get(0, d)).collect();

        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-9, "forward mismatch: {g} vs {e}");
        }
    }

    #[test]
    fn appending_pad_never_changes_h() {
        let mut model = small_model(true);
        randomize(&mut model, 5);
        let base = encode(&[3, 8, 5], &model, EncodeMode::Eval).unwrap();
        let padded = encode(&[3, 8, 5, PAD, PAD], &model, EncodeMode::Eval).unwrap();
        for (a, b) in base.iter().zip(&padded) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_mode_is_pure() {
        let mut model = small_model(true);
        randomize(&mut model, 6);
        let a = encode(&[1, 2, 3], &model, EncodeMode::Eval).unwrap();
        let b = encode(&[1, 2, 3], &model, EncodeMode::Eval).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_and_out_of_range_inputs_error() {
        let model = small_model(false);
        assert!(encode(&[], &model, EncodeMode::Eval).is_err());
        assert!(encode(&[99], &model, EncodeMode::Eval).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut model = small_model(true);
        randomize(&mut model, 7);
        let batch = vec![EncodeInput { tokens: vec![1, 2, 3], mode: EncodeMode::Eval }];
        let grads = encode_gradients(&batch, &model, &[vec![0.0; model.n()]]).unwrap();
        for (name, g) in grads {
            assert!(g.data().iter().all(|v| *v == 0.0), "{name} nonzero");
        }
    }

    #[test]
    fn gradients_reproducible_with_fixed_dropout_seed() {
        let mut model = small_model(true);
        randomize(&mut model, 8);
        let batch = vec![EncodeInput {
            tokens: vec![4, 2, 9],
            mode: EncodeMode::Train { dropout_seed: 55 },
        }];
        let up = vec![vec![0.3; model.n()]];
        let a = encode_gradients(&batch, &model, &up).unwrap();
        let b = encode_gradients(&batch, &model, &up).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_check_attention_on_and_off() {
        for use_attention in [true, false] {
            let mut model = small_model(use_attention);
            randomize(&mut model, 13);
            let toks = vec![2u32, 7, 12];
            let u: Vec<f64> = (0..model.n()).map(|i| 0.1 * (i as f64 + 1.0)).collect();

            let batch =
                vec![EncodeInput { tokens: toks.clone(), mode: EncodeMode::Eval }];
            let grads = encode_gradients(&batch, &model, &[u.clone()]).unwrap();

            let loss = |m: &EncoderModel| -> f64 {
                let h = encode(&toks, m, EncodeMode::Eval).unwrap();
                h.iter().zip(&u).map(|(a, b)| a * b).sum()
            };
            let eps = 1e-5;
            let names: Vec<String> =
                model.named_params().iter().map(|(n, _)| n.clone()).collect();
            for name in names {
                let len = grads[&name].len();
                for idx in (0..len).step_by(7) {
                    let mut plus = model.clone();
                    let mut minus = model.clone();
                    for (n, t) in plus.named_params_mut() {
                        if n == name {
                            t.data_mut()[idx] += eps;
                        }
                    }
                    for (n, t) in minus.named_params_mut() {
                        if n == name {
                            t.data_mut()[idx] -= eps;
                        }
                    }
                    let num = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                    let ana = grads[&name].data()[idx];
                    let denom = num.abs().max(ana.abs()).max(1e-7);
                    assert!(
                        (num - ana).abs() / denom < 1e-4,
                        "{name}[{idx}]: numeric {num} vs analytic {ana} (attention={use_attention})"
                    );
                }
            }
        }
    }

    #[test]
    fn checkpoint_round_trip_and_vocab_hash_enforced() {
        let vocab = test_vocab();
        let mut model = small_model(true);
        model.vocab_size = vocab.len();
        let mut m2 = model.clone();
        randomize(&mut m2, 3);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enc.json");
        save_checkpoint(&m2, &vocab, &path).unwrap();
        let back = load_checkpoint(&path, &vocab).unwrap();
        for ((n1, t1), (n2, t2)) in m2.named_params().iter().zip(back.named_params().iter()) {
            assert_eq!(n1, n2);
            assert_eq!(t1, t2, "tensor {n1} not identical after round trip");
        }

        let other = {
            let mut texts = test_vocab();
            texts.max_len = 16; // different vocab hash
            texts
        };
        assert!(matches!(
            load_checkpoint(&path, &other).unwrap_err(),
            Error::VocabHash { .. }
        ));
    }
}
