//! Text-to-text lemmatization of entity mentions: source-string
//! construction with language tokens, training-set assembly over the
//! three data tiers, a character-level encoder-decoder with attention,
//! and prediction with a fallback-to-surface guard.
//!
//! In multilingual mode every source string is prefixed with one of the
//! language tokens `>>pl<<`, `>>cs<<`, `>>ru<<` followed by a single
//! space; monolingual mode uses the bare mention. Slavic inflection is
//! largely suffixal, so a character model is a faithful desk-scale
//! stand-in for the full-scale text-to-text transformers it abstracts;
//! those plug in behind the same [`Seq2SeqAdapter`] contract.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // tanh/exp/ln resolve through the trait without std
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapters::{LemmaExample, LemmaOrigin};
use crate::corpus::Language;
use crate::eval::normalize_lemma;
use crate::math::{Adam, Mat};
use crate::{Error, Result};

/// Language token prepended to source strings in multilingual mode.
pub fn language_token(language: Language) -> &'static str {
    match language {
        Language::Pl => ">>pl<<",
        Language::Cs => ">>cs<<",
        Language::Ru => ">>ru<<",
    }
}

/// Builds the model input for one mention: `">>xx<< mention"` in
/// multilingual mode, the bare mention otherwise.
pub fn build_source(language: Language, mention: &str, multilingual: bool) -> Result<String> {
    if mention.is_empty() {
        return Err(Error::EmptyInput("mention"));
    }
    Ok(if multilingual {
        format!("{} {mention}", language_token(language))
    } else {
        mention.to_string()
    })
}

/// The three training-data tiers; each adds sources to the previous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataTier {
    /// Shared-task annotation pairs only.
    OriginalData,
    /// Plus the PolEval 2019 lemmatization pairs.
    WithPoleval,
    /// Plus lexicon-derived pairs (SEJF, SEJFEK, translated lexicons).
    WithLexicon,
}

impl DataTier {
    /// Origins included at this tier.
    pub fn origins(self) -> &'static [LemmaOrigin] {
        match self {
            DataTier::OriginalData => &[LemmaOrigin::SharedTask],
            DataTier::WithPoleval => &[LemmaOrigin::SharedTask, LemmaOrigin::Poleval2019],
            DataTier::WithLexicon => &[
                LemmaOrigin::SharedTask,
                LemmaOrigin::Poleval2019,
                LemmaOrigin::Sejf,
                LemmaOrigin::Sejfek,
                LemmaOrigin::Translated,
            ],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DataTier::OriginalData => "original",
            DataTier::WithPoleval => "with-poleval",
            DataTier::WithLexicon => "with-lexicon",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(DataTier::OriginalData),
            "with-poleval" => Ok(DataTier::WithPoleval),
            "with-lexicon" => Ok(DataTier::WithLexicon),
            other => Err(Error::InvalidConfig(format!(
                "unknown data tier `{other}`; expected original, with-poleval or with-lexicon"
            ))),
        }
    }
}

/// Selects the examples of one tier and renders (source, target) pairs
/// in input order. Examples with empty fields are skipped (loaders
/// never produce them).
pub fn assemble_training_set(
    examples: &[LemmaExample],
    tier: DataTier,
    multilingual: bool,
) -> Vec<(String, String)> {
    let origins = tier.origins();
    examples
        .iter()
        .filter(|e| origins.contains(&e.origin) && !e.surface.is_empty() && !e.lemma.is_empty())
        .map(|e| {
            let source =
                build_source(e.language, &e.surface, multilingual).expect("surface nonempty");
            (source, e.lemma.clone())
        })
        .collect()
}

/// Behavioral contract for the generation model: deterministic greedy
/// generation from a source string.
pub trait Seq2SeqAdapter {
    fn generate(&self, source: &str) -> String;
}

const UNK: usize = 0;
const BOS: usize = 1;
const EOS: usize = 2;
const CHAR_OFFSET: usize = 3;

/// Training hyperparameters for the character model.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaTrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Character embedding width.
    pub embed_dim: usize,
    /// Decoder state width; the bidirectional encoder uses half per
    /// direction, so this must be even.
    pub hidden: usize,
    /// Whether sources carry language tokens.
    pub multilingual: bool,
}

impl Default for LemmaTrainConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            epochs: 250,
            batch_size: 16,
            learning_rate: 0.01,
            embed_dim: 32,
            hidden: 64,
            multilingual: true,
        }
    }
}

impl LemmaTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig(
                "epochs, batch_size, embed_dim and hidden must be positive".into(),
            ));
        }
        if !self.hidden.is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "hidden must be even (two encoder directions)".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Character-level encoder-decoder with dot-product attention.
///
/// Encoder: bidirectional tanh RNN over source characters; its
/// concatenated states form the attention memory. Decoder: tanh RNN
/// whose state queries the memory by dot product; the attended context
/// and state mix through one tanh layer before the output projection.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSeq2Seq {
    pub multilingual: bool,
    /// Sorted model alphabet; ids are position + 3 after unk/bos/eos.
    pub charset: Vec<char>,
    pub embed_dim: usize,
    pub hidden: usize,
    /// `(charset.len() + 3) x embed_dim`, shared by encoder and decoder.
    pub embedding: Mat,
    pub ewf: Mat,
    pub euf: Mat,
    pub ebf: Vec<f64>,
    pub ewb: Mat,
    pub eub: Mat,
    pub ebb: Vec<f64>,
    pub dw: Mat,
    pub du: Mat,
    pub db: Vec<f64>,
    pub wc: Mat,
    pub bc: Vec<f64>,
    pub wo: Mat,
    pub bo: Vec<f64>,
}

fn init_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.random_range(-0.1..0.1);
    }
    m
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

impl CharSeq2Seq {
    /// Initializes a model whose alphabet covers the given pairs.
    pub fn init(
        pairs: &[(String, String)],
        config: &LemmaTrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut chars = BTreeSet::new();
        for (source, target) in pairs {
            chars.extend(source.chars());
            chars.extend(target.chars());
        }
        let charset: Vec<char> = chars.into_iter().collect();
        let v = charset.len() + CHAR_OFFSET;
        let e = config.embed_dim;
        let h = config.hidden;
        let h2 = h / 2;
        Self {
            multilingual: config.multilingual,
            charset,
            embed_dim: e,
            hidden: h,
            embedding: init_mat(v, e, rng),
            ewf: init_mat(h2, e, rng),
            euf: init_mat(h2, h2, rng),
            ebf: vec![0.0; h2],
            ewb: init_mat(h2, e, rng),
            eub: init_mat(h2, h2, rng),
            ebb: vec![0.0; h2],
            dw: init_mat(h, e, rng),
            du: init_mat(h, h, rng),
            db: vec![0.0; h],
            wc: init_mat(h, 2 * h, rng),
            bc: vec![0.0; h],
            wo: init_mat(v, h, rng),
            bo: vec![0.0; v],
        }
    }

    fn vocab_len(&self) -> usize {
        self.charset.len() + CHAR_OFFSET
    }

    fn char_id(&self, c: char) -> usize {
        match self.charset.binary_search(&c) {
            Ok(pos) => pos + CHAR_OFFSET,
            Err(_) => UNK,
        }
    }

    fn ids_of(&self, s: &str) -> Vec<usize> {
        s.chars().map(|c| self.char_id(c)).collect()
    }

    fn id_char(&self, id: usize) -> Option<char> {
        self.charset.get(id.checked_sub(CHAR_OFFSET)?).copied()
    }

    /// Encoder forward pass over source ids.
    fn encode(&self, ids: &[usize]) -> EncTrace {
        let h2 = self.hidden / 2;
        let n = ids.len();
        let mut xs = Mat::zeros(n, self.embed_dim);
        for (i, &id) in ids.iter().enumerate() {
            xs.row_mut(i).copy_from_slice(self.embedding.row(id));
        }
        let mut hf = Mat::zeros(n, h2);
        let mut hb = Mat::zeros(n, h2);
        let mut acc = vec![0.0; h2];
        let mut rec = vec![0.0; h2];
        let mut state = vec![0.0; h2];
        for i in 0..n {
            self.ewf.mul_vec(xs.row(i), &mut acc);
            self.euf.mul_vec(&state, &mut rec);
            for j in 0..h2 {
                hf.set(i, j, (acc[j] + rec[j] + self.ebf[j]).tanh());
            }
            state.copy_from_slice(hf.row(i));
        }
        state.iter_mut().for_each(|v| *v = 0.0);
        for i in (0..n).rev() {
            self.ewb.mul_vec(xs.row(i), &mut acc);
            self.eub.mul_vec(&state, &mut rec);
            for j in 0..h2 {
                hb.set(i, j, (acc[j] + rec[j] + self.ebb[j]).tanh());
            }
            state.copy_from_slice(hb.row(i));
        }
        let mut memory = Mat::zeros(n, self.hidden);
        for i in 0..n {
            memory.row_mut(i)[..h2].copy_from_slice(hf.row(i));
            memory.row_mut(i)[h2..].copy_from_slice(hb.row(i));
        }
        EncTrace { xs, hf, hb, memory }
    }

    fn decode_step(&self, input_id: usize, prev_state: &[f64], memory: &Mat) -> DecodeStep {
        let h = self.hidden;
        let mut a = vec![0.0; h];
        self.dw.mul_vec(self.embedding.row(input_id), &mut a);
        let mut rec = vec![0.0; h];
        self.du.mul_vec(prev_state, &mut rec);
        let mut s = vec![0.0; h];
        for j in 0..h {
            s[j] = (a[j] + rec[j] + self.db[j]).tanh();
        }

        let mut alpha = vec![0.0; memory.rows()];
        for (j, slot) in alpha.iter_mut().enumerate() {
            *slot = dot(&s, memory.row(j));
        }
        softmax_in_place(&mut alpha);
        let mut context = vec![0.0; h];
        for (j, &w) in alpha.iter().enumerate() {
            for (c, m) in context.iter_mut().zip(memory.row(j)) {
                *c += w * m;
            }
        }

        let mut u = Vec::with_capacity(2 * h);
        u.extend_from_slice(&s);
        u.extend_from_slice(&context);
        let mut o = vec![0.0; h];
        self.wc.mul_vec(&u, &mut o);
        for (v, b) in o.iter_mut().zip(&self.bc) {
            *v = (*v + b).tanh();
        }

        let mut probs = vec![0.0; self.vocab_len()];
        self.wo.mul_vec(&o, &mut probs);
        for (v, b) in probs.iter_mut().zip(&self.bo) {
            *v += b;
        }
        softmax_in_place(&mut probs);
        DecodeStep {
            state: s,
            attention: alpha,
            context,
            mix: o,
            probs,
        }
    }
}

/// One decoder step's intermediate values.
struct DecodeStep {
    state: Vec<f64>,
    attention: Vec<f64>,
    context: Vec<f64>,
    mix: Vec<f64>,
    probs: Vec<f64>,
}

impl Seq2SeqAdapter for CharSeq2Seq {
    /// Greedy decoding; stops at the end symbol or a hard cap of four
    /// times the source length plus a small constant.
    fn generate(&self, source: &str) -> String {
        let ids = self.ids_of(source);
        if ids.is_empty() {
            return String::new();
        }
        let enc = self.encode(&ids);
        let cap = 4 * ids.len() + 8;
        let mut out = String::new();
        let mut state = vec![0.0; self.hidden];
        let mut input = BOS;
        for _ in 0..cap {
            let step = self.decode_step(input, &state, &enc.memory);
            let mut best = 0;
            for (i, &p) in step.probs.iter().enumerate().skip(1) {
                if p > step.probs[best] {
                    best = i;
                }
            }
            if best == EOS {
                break;
            }
            if let Some(c) = self.id_char(best) {
                out.push(c);
            }
            state = step.state;
            input = best;
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct EncTrace {
    xs: Mat,
    hf: Mat,
    hb: Mat,
    memory: Mat,
}

struct Grads {
    embedding: Mat,
    ewf: Mat,
    euf: Mat,
    ebf: Vec<f64>,
    ewb: Mat,
    eub: Mat,
    ebb: Vec<f64>,
    dw: Mat,
    du: Mat,
    db: Vec<f64>,
    wc: Mat,
    bc: Vec<f64>,
    wo: Mat,
    bo: Vec<f64>,
}

impl Grads {
    fn zeros_like(m: &CharSeq2Seq) -> Self {
        let h2 = m.hidden / 2;
        Self {
            embedding: Mat::zeros(m.vocab_len(), m.embed_dim),
            ewf: Mat::zeros(h2, m.embed_dim),
            euf: Mat::zeros(h2, h2),
            ebf: vec![0.0; h2],
            ewb: Mat::zeros(h2, m.embed_dim),
            eub: Mat::zeros(h2, h2),
            ebb: vec![0.0; h2],
            dw: Mat::zeros(m.hidden, m.embed_dim),
            du: Mat::zeros(m.hidden, m.hidden),
            db: vec![0.0; m.hidden],
            wc: Mat::zeros(m.hidden, 2 * m.hidden),
            bc: vec![0.0; m.hidden],
            wo: Mat::zeros(m.vocab_len(), m.hidden),
            bo: vec![0.0; m.vocab_len()],
        }
    }

    fn reset(&mut self) {
        for m in [
            &mut self.embedding,
            &mut self.ewf,
            &mut self.euf,
            &mut self.ewb,
            &mut self.eub,
            &mut self.dw,
            &mut self.du,
            &mut self.wc,
            &mut self.wo,
        ] {
            m.fill(0.0);
        }
        for v in [
            &mut self.ebf,
            &mut self.ebb,
            &mut self.db,
            &mut self.bc,
            &mut self.bo,
        ] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    fn scale(&mut self, s: f64) {
        for m in [
            &mut self.embedding,
            &mut self.ewf,
            &mut self.euf,
            &mut self.ewb,
            &mut self.eub,
            &mut self.dw,
            &mut self.du,
            &mut self.wc,
            &mut self.wo,
        ] {
            m.data_mut().iter_mut().for_each(|x| *x *= s);
        }
        for v in [
            &mut self.ebf,
            &mut self.ebb,
            &mut self.db,
            &mut self.bc,
            &mut self.bo,
        ] {
            v.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// Teacher-forced forward and backward pass for one pair; returns the
/// mean per-character cross-entropy.
fn pair_pass(model: &CharSeq2Seq, source: &str, target: &str, grads: &mut Grads) -> f64 {
    let h = model.hidden;
    let h2 = h / 2;
    let src_ids = model.ids_of(source);
    let enc = model.encode(&src_ids);
    let s_len = src_ids.len();

    let tgt_ids = model.ids_of(target);
    let mut inputs = vec![BOS];
    inputs.extend_from_slice(&tgt_ids);
    let mut golds = tgt_ids;
    golds.push(EOS);
    let steps = golds.len();

    // forward with full trace
    let mut states = Mat::zeros(steps, h);
    let mut alphas = Mat::zeros(steps, s_len);
    let mut contexts = Mat::zeros(steps, h);
    let mut outs = Mat::zeros(steps, h);
    let mut probs_all = Mat::zeros(steps, model.vocab_len());
    let mut loss = 0.0;
    let inv = 1.0 / steps as f64;
    {
        let mut state = vec![0.0; h];
        for t in 0..steps {
            let step = model.decode_step(inputs[t], &state, &enc.memory);
            loss -= step.probs[golds[t]].ln() * inv;
            states.row_mut(t).copy_from_slice(&step.state);
            alphas.row_mut(t).copy_from_slice(&step.attention);
            contexts.row_mut(t).copy_from_slice(&step.context);
            outs.row_mut(t).copy_from_slice(&step.mix);
            probs_all.row_mut(t).copy_from_slice(&step.probs);
            state = step.state;
        }
    }

    // backward
    let mut d_memory = Mat::zeros(s_len, h);
    let mut ds_carry = vec![0.0; h];
    for t in (0..steps).rev() {
        // output projection
        let mut d_logits: Vec<f64> = probs_all.row(t).to_vec();
        d_logits[golds[t]] -= 1.0;
        d_logits.iter_mut().for_each(|v| *v *= inv);
        grads.wo.add_outer(&d_logits, outs.row(t));
        for (b, d) in grads.bo.iter_mut().zip(&d_logits) {
            *b += d;
        }
        let mut d_o = vec![0.0; h];
        model.wo.mul_vec_transpose_acc(&d_logits, &mut d_o);

        // mix layer o = tanh(Wc [s; c] + bc)
        let mut da_o = vec![0.0; h];
        for j in 0..h {
            let o = outs.get(t, j);
            da_o[j] = d_o[j] * (1.0 - o * o);
        }
        let mut u = Vec::with_capacity(2 * h);
        u.extend_from_slice(states.row(t));
        u.extend_from_slice(contexts.row(t));
        grads.wc.add_outer(&da_o, &u);
        for (b, d) in grads.bc.iter_mut().zip(&da_o) {
            *b += d;
        }
        let mut d_u = vec![0.0; 2 * h];
        model.wc.mul_vec_transpose_acc(&da_o, &mut d_u);
        let mut ds: Vec<f64> = d_u[..h].to_vec();
        let d_context = &d_u[h..];

        // attention: context = sum_j alpha_j memory_j, scores = s . m_j
        let alpha = alphas.row(t);
        let mut d_alpha = vec![0.0; s_len];
        for j in 0..s_len {
            d_alpha[j] = dot(d_context, enc.memory.row(j));
            for (dm, dc) in d_memory.row_mut(j).iter_mut().zip(d_context) {
                *dm += alpha[j] * dc;
            }
        }
        let mix = dot(alpha, &d_alpha);
        for j in 0..s_len {
            let d_score = alpha[j] * (d_alpha[j] - mix);
            for (dsv, m) in ds.iter_mut().zip(enc.memory.row(j)) {
                *dsv += d_score * m;
            }
            let s_row = states.row(t);
            for (dm, sv) in d_memory.row_mut(j).iter_mut().zip(s_row) {
                *dm += d_score * sv;
            }
        }

        // decoder state s = tanh(Wd x + Ud s_prev + bd)
        for (dsv, c) in ds.iter_mut().zip(&ds_carry) {
            *dsv += c;
        }
        let mut da = vec![0.0; h];
        for j in 0..h {
            let s = states.get(t, j);
            da[j] = ds[j] * (1.0 - s * s);
        }
        grads.dw.add_outer(&da, model.embedding.row(inputs[t]));
        if t > 0 {
            grads.du.add_outer(&da, states.row(t - 1));
        }
        for (b, d) in grads.db.iter_mut().zip(&da) {
            *b += d;
        }
        ds_carry.iter_mut().for_each(|v| *v = 0.0);
        model.du.mul_vec_transpose_acc(&da, &mut ds_carry);
        let mut d_x = vec![0.0; model.embed_dim];
        model.dw.mul_vec_transpose_acc(&da, &mut d_x);
        for (g, d) in grads.embedding.row_mut(inputs[t]).iter_mut().zip(&d_x) {
            *g += d;
        }
    }

    // encoder backward from memory gradients
    let mut d_xs = Mat::zeros(s_len, model.embed_dim);
    let mut carry = vec![0.0; h2];
    for i in (0..s_len).rev() {
        let mut da = vec![0.0; h2];
        for j in 0..h2 {
            let dh = d_memory.get(i, j) + carry[j];
            let hv = enc.hf.get(i, j);
            da[j] = dh * (1.0 - hv * hv);
        }
        for (b, d) in grads.ebf.iter_mut().zip(&da) {
            *b += d;
        }
        grads.ewf.add_outer(&da, enc.xs.row(i));
        if i > 0 {
            grads.euf.add_outer(&da, enc.hf.row(i - 1));
        }
        carry.iter_mut().for_each(|v| *v = 0.0);
        model.euf.mul_vec_transpose_acc(&da, &mut carry);
        model.ewf.mul_vec_transpose_acc(&da, d_xs.row_mut(i));
    }
    carry.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..s_len {
        let mut da = vec![0.0; h2];
        for j in 0..h2 {
            let dh = d_memory.get(i, h2 + j) + carry[j];
            let hv = enc.hb.get(i, j);
            da[j] = dh * (1.0 - hv * hv);
        }
        for (b, d) in grads.ebb.iter_mut().zip(&da) {
            *b += d;
        }
        grads.ewb.add_outer(&da, enc.xs.row(i));
        if i + 1 < s_len {
            grads.eub.add_outer(&da, enc.hb.row(i + 1));
        }
        carry.iter_mut().for_each(|v| *v = 0.0);
        model.eub.mul_vec_transpose_acc(&da, &mut carry);
        model.ewb.mul_vec_transpose_acc(&da, d_xs.row_mut(i));
    }
    for (i, &id) in src_ids.iter().enumerate() {
        for (g, d) in grads.embedding.row_mut(id).iter_mut().zip(d_xs.row(i)) {
            *g += d;
        }
    }

    loss
}

struct Optimizers {
    embedding: Adam,
    ewf: Adam,
    euf: Adam,
    ebf: Adam,
    ewb: Adam,
    eub: Adam,
    ebb: Adam,
    dw: Adam,
    du: Adam,
    db: Adam,
    wc: Adam,
    bc: Adam,
    wo: Adam,
    bo: Adam,
}

impl Optimizers {
    fn new(m: &CharSeq2Seq, lr: f64) -> Self {
        Self {
            embedding: Adam::new(m.embedding.data().len(), lr),
            ewf: Adam::new(m.ewf.data().len(), lr),
            euf: Adam::new(m.euf.data().len(), lr),
            ebf: Adam::new(m.ebf.len(), lr),
            ewb: Adam::new(m.ewb.data().len(), lr),
            eub: Adam::new(m.eub.data().len(), lr),
            ebb: Adam::new(m.ebb.len(), lr),
            dw: Adam::new(m.dw.data().len(), lr),
            du: Adam::new(m.du.data().len(), lr),
            db: Adam::new(m.db.len(), lr),
            wc: Adam::new(m.wc.data().len(), lr),
            bc: Adam::new(m.bc.len(), lr),
            wo: Adam::new(m.wo.data().len(), lr),
            bo: Adam::new(m.bo.len(), lr),
        }
    }

    fn step(&mut self, m: &mut CharSeq2Seq, g: &Grads) {
        self.embedding
            .update(m.embedding.data_mut(), g.embedding.data());
        self.ewf.update(m.ewf.data_mut(), g.ewf.data());
        self.euf.update(m.euf.data_mut(), g.euf.data());
        self.ebf.update(&mut m.ebf, &g.ebf);
        self.ewb.update(m.ewb.data_mut(), g.ewb.data());
        self.eub.update(m.eub.data_mut(), g.eub.data());
        self.ebb.update(&mut m.ebb, &g.ebb);
        self.dw.update(m.dw.data_mut(), g.dw.data());
        self.du.update(m.du.data_mut(), g.du.data());
        self.db.update(&mut m.db, &g.db);
        self.wc.update(m.wc.data_mut(), g.wc.data());
        self.bc.update(&mut m.bc, &g.bc);
        self.wo.update(m.wo.data_mut(), g.wo.data());
        self.bo.update(&mut m.bo, &g.bo);
    }
}

/// Per-run training summary.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaTrainReport {
    pub epoch_losses: Vec<f64>,
    /// 1-based epoch whose parameters the returned model carries.
    pub selected_epoch: usize,
    /// Case-insensitive exact match of the selected checkpoint on the
    /// validation split.
    pub validation_em: Option<f64>,
}

/// Case-insensitive exact match of `generate` against targets.
pub fn exact_match(model: &impl Seq2SeqAdapter, pairs: &[(String, String)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let hits = pairs
        .iter()
        .filter(|(source, target)| {
            normalize_lemma(&model.generate(source)) == normalize_lemma(target)
        })
        .count();
    hits as f64 / pairs.len() as f64
}

/// Trains the character model. With a validation split the returned
/// model is the epoch checkpoint with the best case-insensitive exact
/// match; otherwise the final epoch.
pub fn train_lemmatizer(
    pairs: &[(String, String)],
    validation: Option<&[(String, String)]>,
    config: &LemmaTrainConfig,
) -> Result<(CharSeq2Seq, LemmaTrainReport)> {
    config.validate()?;
    let pairs: Vec<&(String, String)> = pairs
        .iter()
        .filter(|(s, t)| !s.is_empty() && !t.is_empty())
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyInput("lemma training pairs"));
    }

    let owned: Vec<(String, String)> = pairs.into_iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = CharSeq2Seq::init(&owned, config, &mut rng);
    let mut opt = Optimizers::new(&model, config.learning_rate);
    let mut grads = Grads::zeros_like(&model);

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, CharSeq2Seq)> = None;
    let mut indices: Vec<usize> = (0..owned.len()).collect();

    for epoch in 1..=config.epochs {
        for i in (1..indices.len()).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for batch in indices.chunks(config.batch_size) {
            grads.reset();
            for &i in batch {
                let (source, target) = &owned[i];
                epoch_loss += pair_pass(&model, source, target, &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            opt.step(&mut model, &grads);
        }
        let mean_loss = epoch_loss / owned.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::NonFinite("lemmatizer training loss"));
        }
        epoch_losses.push(mean_loss);

        if let Some(val) = validation {
            let em = exact_match(&model, val);
            let improved = best.as_ref().is_none_or(|(b, _, _)| em > *b);
            if improved {
                best = Some((em, epoch, model.clone()));
            }
        }
    }

    let (selected_epoch, validation_em) = match best {
        Some((em, epoch, snapshot)) => {
            model = snapshot;
            (epoch, Some(em))
        }
        None => (config.epochs, None),
    };

    Ok((
        model,
        LemmaTrainReport {
            epoch_losses,
            selected_epoch,
            validation_em,
        },
    ))
}

/// Counts degenerate generations replaced by the surface form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FallbackReport {
    pub total: usize,
    pub fallbacks: usize,
}

/// Lemmatizes one mention. Empty or runaway generations (over four
/// times the mention's character count) fall back to the mention
/// itself, so the result is always nonempty.
pub fn predict_lemma<M: Seq2SeqAdapter + ?Sized>(
    model: &M,
    language: Language,
    mention: &str,
    multilingual: bool,
    report: &mut FallbackReport,
) -> Result<String> {
    let source = build_source(language, mention, multilingual)?;
    let raw = model.generate(&source);
    report.total += 1;
    let mention_chars = mention.chars().count();
    if raw.trim().is_empty() || raw.chars().count() > 4 * mention_chars {
        report.fallbacks += 1;
        return Ok(mention.to_string());
    }
    Ok(raw)
}

/// Exact-match scores with and without language tokens, per language.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub with_tokens: BTreeMap<Language, f64>,
    pub without_tokens: BTreeMap<Language, f64>,
    /// `with - without` per language; sign and magnitude are reported,
    /// never asserted.
    pub delta: BTreeMap<Language, f64>,
}

fn em_per_language(
    model: &CharSeq2Seq,
    heldout: &[LemmaExample],
    multilingual: bool,
) -> BTreeMap<Language, f64> {
    let mut out = BTreeMap::new();
    for &language in Language::ALL.iter() {
        let pairs: Vec<(String, String)> = heldout
            .iter()
            .filter(|e| e.language == language)
            .map(|e| {
                let source = build_source(language, &e.surface, multilingual).expect("nonempty");
                (source, e.lemma.clone())
            })
            .collect();
        if !pairs.is_empty() {
            out.insert(language, exact_match(model, &pairs));
        }
    }
    out
}

/// Trains twice on the same examples, once with language tokens and
/// once without, and reports held-out exact match per language plus
/// the delta.
pub fn language_token_ablation(
    train: &[LemmaExample],
    heldout: &[LemmaExample],
    config: &LemmaTrainConfig,
) -> Result<AblationReport> {
    let with_config = LemmaTrainConfig {
        multilingual: true,
        ..config.clone()
    };
    let without_config = LemmaTrainConfig {
        multilingual: false,
        ..config.clone()
    };

    let with_pairs = assemble_training_set(train, DataTier::WithLexicon, true);
    let without_pairs = assemble_training_set(train, DataTier::WithLexicon, false);

    let (with_model, _) = train_lemmatizer(&with_pairs, None, &with_config)?;
    let (without_model, _) = train_lemmatizer(&without_pairs, None, &without_config)?;

    let with_tokens = em_per_language(&with_model, heldout, true);
    let without_tokens = em_per_language(&without_model, heldout, false);
    let mut delta = BTreeMap::new();
    for (lang, &w) in &with_tokens {
        if let Some(&wo) = without_tokens.get(lang) {
            delta.insert(*lang, w - wo);
        }
    }
    Ok(AblationReport {
        with_tokens,
        without_tokens,
        delta,
    })
}
