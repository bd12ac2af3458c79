//! Word-level NER tagger: pluggable token encoder, emission
//! projection, CRF head, training loop, and document prediction.
//!
//! Encoders work on subword pieces and expose their output through the
//! [`EncoderAdapter`] contract: pieces, a monotone piece-to-word map,
//! and one score row per piece. [`align_subwords`] reduces piece rows
//! to word rows by taking each word's first piece, the convention
//! compatible with word-level BIO scoring. A linear projection turns
//! word rows into 11 emission scores which either feed the CRF or a
//! per-token softmax, depending on configuration.
//!
//! The bundled [`DeskEncoder`] is a trainable piece embedding plus a
//! bidirectional tanh RNN, sized so the whole pipeline overfits a
//! 50-sentence corpus in seconds. Production-scale pretrained encoders
//! plug in behind the same adapter contract.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // tanh/exp/ln resolve through the trait without std
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{tokenize, Label, LabelIndex, RawDocument, Sentence, Span, TaggedSentence};
use crate::crf::{CrfMask, CrfParams, DEFAULT_MASK_PENALTY};
use crate::eval;
use crate::math::{Adam, Mat};
use crate::{Error, Result};

/// Piece embedding width of the desk encoder.
const EMBED_DIM: usize = 32;
/// Hidden width per RNN direction; encoder output width is twice this.
const HIDDEN: usize = 32;
/// Maximum characters per subword piece.
const PIECE_LEN: usize = 4;
/// The encoder identifier [`TrainConfig::encoder`] must name.
pub const DESK_ENCODER_ID: &str = "desk-birnn";

/// Encoder output for one sentence.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub pieces: Vec<String>,
    /// `piece_to_word[p]` is the word index piece `p` belongs to;
    /// monotone non-decreasing and surjective onto word indices.
    pub piece_to_word: Vec<usize>,
    /// One row per piece, encoder width columns.
    pub scores: Mat,
}

/// Behavioral contract every token encoder satisfies.
pub trait EncoderAdapter {
    /// Output width of [`EncoderAdapter::encode`] score rows.
    fn width(&self) -> usize;

    /// Encodes a tokenized sentence; every word gets at least one
    /// piece.
    fn encode(&self, tokens: &[String]) -> Result<Encoded>;
}

/// Selects each word's first piece row, producing a word-level matrix.
pub fn align_subwords(words: usize, piece_to_word: &[usize], scores: &Mat) -> Result<Mat> {
    if piece_to_word.len() != scores.rows() {
        return Err(Error::LengthMismatch {
            left: piece_to_word.len(),
            right: scores.rows(),
            context: "piece map vs score rows",
        });
    }
    let first = first_piece_indices(words, piece_to_word)?;
    let mut out = Mat::zeros(words, scores.cols());
    for (w, &p) in first.iter().enumerate() {
        out.row_mut(w).copy_from_slice(scores.row(p));
    }
    Ok(out)
}

/// First piece index per word; validates monotonicity and coverage.
fn first_piece_indices(words: usize, piece_to_word: &[usize]) -> Result<Vec<usize>> {
    let mut first = vec![usize::MAX; words];
    let mut prev = 0usize;
    for (p, &w) in piece_to_word.iter().enumerate() {
        if w < prev || w >= words {
            return Err(Error::InvalidConfig(format!(
                "piece-to-word map not monotone into 0..{words} at piece {p}"
            )));
        }
        if first[w] == usize::MAX {
            first[w] = p;
        }
        prev = w;
    }
    if let Some(w) = first.iter().position(|&p| p == usize::MAX) {
        return Err(Error::InvalidConfig(format!(
            "word {w} has no subword piece"
        )));
    }
    Ok(first)
}

/// Splits one word into pieces of at most [`PIECE_LEN`] characters.
fn word_pieces(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() {
        return vec![String::new()];
    }
    chars
        .chunks(PIECE_LEN)
        .map(|c| c.iter().collect())
        .collect()
}

/// Trainable desk-scale encoder: piece embedding plus a bidirectional
/// tanh RNN. Piece id 0 is the unknown piece.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskEncoder {
    /// Piece string to id; ids start at 1, 0 is unknown.
    pub vocab: Vec<String>,
    /// `(vocab.len() + 1) x EMBED_DIM`.
    pub embedding: Mat,
    pub wf: Mat,
    pub uf: Mat,
    pub bf: Vec<f64>,
    pub wb: Mat,
    pub ub: Mat,
    pub bb: Vec<f64>,
}

fn init_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.random_range(-0.1..0.1);
    }
    m
}

impl DeskEncoder {
    /// Builds the piece vocabulary from training tokens and initializes
    /// all weights from the given stream.
    pub fn init<'a>(tokens: impl Iterator<Item = &'a str>, rng: &mut ChaCha8Rng) -> Self {
        let mut pieces = BTreeSet::new();
        for token in tokens {
            for piece in word_pieces(token) {
                pieces.insert(piece);
            }
        }
        let vocab: Vec<String> = pieces.into_iter().collect();
        let v = vocab.len() + 1;
        Self {
            vocab,
            embedding: init_mat(v, EMBED_DIM, rng),
            wf: init_mat(HIDDEN, EMBED_DIM, rng),
            uf: init_mat(HIDDEN, HIDDEN, rng),
            bf: vec![0.0; HIDDEN],
            wb: init_mat(HIDDEN, EMBED_DIM, rng),
            ub: init_mat(HIDDEN, HIDDEN, rng),
            bb: vec![0.0; HIDDEN],
        }
    }

    fn piece_id(&self, piece: &str) -> usize {
        match self.vocab.binary_search_by(|p| p.as_str().cmp(piece)) {
            Ok(pos) => pos + 1,
            Err(_) => 0,
        }
    }

    fn split(&self, tokens: &[String]) -> (Vec<String>, Vec<usize>) {
        let mut pieces = Vec::new();
        let mut map = Vec::new();
        for (w, token) in tokens.iter().enumerate() {
            for piece in word_pieces(token) {
                pieces.push(piece);
                map.push(w);
            }
        }
        (pieces, map)
    }

    /// Full forward pass keeping the activations needed for backprop.
    fn forward_trace(&self, tokens: &[String]) -> Trace {
        let (pieces, piece_to_word) = self.split(tokens);
        let n = pieces.len();
        let ids: Vec<usize> = pieces.iter().map(|p| self.piece_id(p)).collect();

        let mut xs = Mat::zeros(n, EMBED_DIM);
        for (p, &id) in ids.iter().enumerate() {
            xs.row_mut(p).copy_from_slice(self.embedding.row(id));
        }

        let mut hf = Mat::zeros(n, HIDDEN);
        let mut acc = vec![0.0; HIDDEN];
        let mut rec = vec![0.0; HIDDEN];
        let mut state = vec![0.0; HIDDEN];
        for p in 0..n {
            self.wf.mul_vec(xs.row(p), &mut acc);
            self.uf.mul_vec(&state, &mut rec);
            for j in 0..HIDDEN {
                hf.set(p, j, (acc[j] + rec[j] + self.bf[j]).tanh());
            }
            state.copy_from_slice(hf.row(p));
        }

        let mut hb = Mat::zeros(n, HIDDEN);
        state.iter_mut().for_each(|v| *v = 0.0);
        for p in (0..n).rev() {
            self.wb.mul_vec(xs.row(p), &mut acc);
            self.ub.mul_vec(&state, &mut rec);
            for j in 0..HIDDEN {
                hb.set(p, j, (acc[j] + rec[j] + self.bb[j]).tanh());
            }
            state.copy_from_slice(hb.row(p));
        }

        let mut scores = Mat::zeros(n, 2 * HIDDEN);
        for p in 0..n {
            scores.row_mut(p)[..HIDDEN].copy_from_slice(hf.row(p));
            scores.row_mut(p)[HIDDEN..].copy_from_slice(hb.row(p));
        }
        Trace {
            ids,
            piece_to_word,
            xs,
            hf,
            hb,
            scores,
        }
    }

    /// Backpropagates `d_scores` (one row per piece) into the gradient
    /// accumulator.
    fn backward(&self, trace: &Trace, d_scores: &Mat, grads: &mut EncoderGrads) {
        let n = trace.ids.len();
        let mut d_xs = Mat::zeros(n, EMBED_DIM);

        // forward-direction RNN: gradient flows from late to early pieces
        let mut carry = vec![0.0; HIDDEN];
        for p in (0..n).rev() {
            let mut da = vec![0.0; HIDDEN];
            for j in 0..HIDDEN {
                let dh = d_scores.get(p, j) + carry[j];
                let h = trace.hf.get(p, j);
                da[j] = dh * (1.0 - h * h);
            }
            for j in 0..HIDDEN {
                grads.bf[j] += da[j];
            }
            grads.wf.add_outer(&da, trace.xs.row(p));
            if p > 0 {
                grads.uf.add_outer(&da, trace.hf.row(p - 1));
            }
            carry.iter_mut().for_each(|v| *v = 0.0);
            self.uf.mul_vec_transpose_acc(&da, &mut carry);
            self.wf.mul_vec_transpose_acc(&da, d_xs.row_mut(p));
        }

        // backward-direction RNN: its recurrence runs right to left, so
        // gradient flows from early to late pieces
        carry.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..n {
            let mut da = vec![0.0; HIDDEN];
            for j in 0..HIDDEN {
                let dh = d_scores.get(p, HIDDEN + j) + carry[j];
                let h = trace.hb.get(p, j);
                da[j] = dh * (1.0 - h * h);
            }
            for j in 0..HIDDEN {
                grads.bb[j] += da[j];
            }
            grads.wb.add_outer(&da, trace.xs.row(p));
            if p + 1 < n {
                grads.ub.add_outer(&da, trace.hb.row(p + 1));
            }
            carry.iter_mut().for_each(|v| *v = 0.0);
            self.ub.mul_vec_transpose_acc(&da, &mut carry);
            self.wb.mul_vec_transpose_acc(&da, d_xs.row_mut(p));
        }

        for (p, &id) in trace.ids.iter().enumerate() {
            let row = d_xs.row(p);
            let dst = grads.embedding.row_mut(id);
            for (d, s) in dst.iter_mut().zip(row) {
                *d += s;
            }
        }
    }
}

impl EncoderAdapter for DeskEncoder {
    fn width(&self) -> usize {
        2 * HIDDEN
    }

    fn encode(&self, tokens: &[String]) -> Result<Encoded> {
        let trace = self.forward_trace(tokens);
        Ok(Encoded {
            pieces: tokens.iter().flat_map(|t| word_pieces(t)).collect(),
            piece_to_word: trace.piece_to_word,
            scores: trace.scores,
        })
    }
}

struct Trace {
    ids: Vec<usize>,
    piece_to_word: Vec<usize>,
    xs: Mat,
    hf: Mat,
    hb: Mat,
    scores: Mat,
}

struct EncoderGrads {
    embedding: Mat,
    wf: Mat,
    uf: Mat,
    bf: Vec<f64>,
    wb: Mat,
    ub: Mat,
    bb: Vec<f64>,
}

impl EncoderGrads {
    fn zeros_like(enc: &DeskEncoder) -> Self {
        Self {
            embedding: Mat::zeros(enc.embedding.rows(), EMBED_DIM),
            wf: Mat::zeros(HIDDEN, EMBED_DIM),
            uf: Mat::zeros(HIDDEN, HIDDEN),
            bf: vec![0.0; HIDDEN],
            wb: Mat::zeros(HIDDEN, EMBED_DIM),
            ub: Mat::zeros(HIDDEN, HIDDEN),
            bb: vec![0.0; HIDDEN],
        }
    }

    fn reset(&mut self) {
        self.embedding.fill(0.0);
        self.wf.fill(0.0);
        self.uf.fill(0.0);
        self.bf.iter_mut().for_each(|v| *v = 0.0);
        self.wb.fill(0.0);
        self.ub.fill(0.0);
        self.bb.iter_mut().for_each(|v| *v = 0.0);
    }

    fn scale(&mut self, s: f64) {
        self.embedding.data_mut().iter_mut().for_each(|v| *v *= s);
        self.wf.data_mut().iter_mut().for_each(|v| *v *= s);
        self.uf.data_mut().iter_mut().for_each(|v| *v *= s);
        self.bf.iter_mut().for_each(|v| *v *= s);
        self.wb.data_mut().iter_mut().for_each(|v| *v *= s);
        self.ub.data_mut().iter_mut().for_each(|v| *v *= s);
        self.bb.iter_mut().for_each(|v| *v *= s);
    }
}

/// Training hyperparameters. Defaults are desk-scale stand-ins and
/// carry no claim about any published system's settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Hard cap on pieces per sentence; longer sentences truncate at a
    /// word boundary (a lone over-long first word is kept).
    pub max_pieces: usize,
    /// Encoder identifier; only [`DESK_ENCODER_ID`] is bundled.
    pub encoder: String,
    /// `false` trains a per-token softmax classifier instead.
    pub crf_enabled: bool,
    /// Adds the BIO structure mask to CRF scoring.
    pub constraint_mask: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            epochs: 200,
            batch_size: 8,
            learning_rate: 0.01,
            max_pieces: 160,
            encoder: DESK_ENCODER_ID.to_string(),
            crf_enabled: true,
            constraint_mask: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.max_pieces == 0 {
            return Err(Error::InvalidConfig(
                "epochs, batch_size and max_pieces must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive and finite".into(),
            ));
        }
        if self.encoder != DESK_ENCODER_ID {
            return Err(Error::InvalidConfig(format!(
                "unknown encoder `{}`; bundled encoder is `{DESK_ENCODER_ID}`",
                self.encoder
            )));
        }
        Ok(())
    }
}

/// Trained tagger: encoder state, emission projection, optional CRF.
#[derive(Debug, Clone, PartialEq)]
pub struct NerModel {
    pub config: TrainConfig,
    pub encoder: DeskEncoder,
    /// `11 x encoder width`.
    pub projection: Mat,
    pub projection_bias: Vec<f64>,
    pub crf: Option<CrfParams>,
}

/// Per-run training summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-sentence loss for each epoch.
    pub epoch_losses: Vec<f64>,
    /// Sentences cut to the piece budget before training.
    pub truncated_sentences: usize,
    /// 1-based epoch whose parameters the returned model carries.
    pub selected_epoch: usize,
    /// Span F1 of the selected checkpoint on the validation split.
    pub validation_f1: Option<f64>,
}

/// One decoded entity with its exact surface text.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedEntity {
    pub sentence_index: usize,
    pub span: Span,
    pub surface: String,
}

/// Number of leading words whose pieces fit the budget; never zero for
/// a nonempty sentence.
fn words_within_budget(tokens: &[String], max_pieces: usize) -> usize {
    let mut used = 0usize;
    let mut kept = 0usize;
    for token in tokens {
        let n = word_pieces(token).len();
        if kept > 0 && used + n > max_pieces {
            break;
        }
        used += n;
        kept += 1;
    }
    kept
}

fn softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl NerModel {
    fn mask(&self) -> Option<CrfMask> {
        if self.crf.is_some() && self.config.constraint_mask {
            Some(CrfMask::bio(LabelIndex::LEN, DEFAULT_MASK_PENALTY).expect("odd label space"))
        } else {
            None
        }
    }

    /// Word-level emission matrix for the first `kept` tokens.
    fn emissions(&self, tokens: &[String]) -> Result<Mat> {
        let encoded = self.encoder.encode(tokens)?;
        let words = align_subwords(tokens.len(), &encoded.piece_to_word, &encoded.scores)?;
        let mut em = Mat::zeros(tokens.len(), LabelIndex::LEN);
        for t in 0..tokens.len() {
            self.projection.mul_vec(words.row(t), em.row_mut(t));
            for (v, b) in em.row_mut(t).iter_mut().zip(&self.projection_bias) {
                *v += b;
            }
        }
        Ok(em)
    }

    /// Tags one tokenized sentence. Words beyond the piece budget are
    /// tagged `O`.
    pub fn predict_tags(&self, tokens: &[String]) -> Result<Vec<Label>> {
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        let kept = words_within_budget(tokens, self.config.max_pieces);
        let em = self.emissions(&tokens[..kept])?;
        let mask = self.mask();
        let indices: Vec<usize> = match &self.crf {
            Some(crf) => crf.viterbi(mask.as_ref(), &em)?.path,
            None => (0..kept).map(|t| argmax(em.row(t))).collect(),
        };
        let mut tags: Vec<Label> = indices
            .into_iter()
            .map(|i| LabelIndex::label(i).expect("decoder emits valid label indices"))
            .collect();
        tags.resize(tokens.len(), Label::Outside);
        Ok(tags)
    }

    /// Tags every sentence of a document and returns decoded entities
    /// with surfaces sliced from the document text at token offsets.
    pub fn predict_document(&self, doc: &RawDocument) -> Result<Vec<PredictedEntity>> {
        let text = doc.full_text();
        let mut out = Vec::new();
        for (sentence_index, sentence) in tokenize(&text).into_iter().enumerate() {
            let tags = self.predict_tags(&sentence.tokens)?;
            let tagged = TaggedSentence::new(sentence, tags)?;
            for span in tagged.spans() {
                let (start, _) = tagged.sentence.char_offsets[span.start];
                let (_, end) = tagged.sentence.char_offsets[span.end - 1];
                out.push(PredictedEntity {
                    sentence_index,
                    span,
                    surface: text[start..end].to_string(),
                });
            }
        }
        Ok(out)
    }
}

struct ProjGrads {
    wp: Mat,
    bp: Vec<f64>,
}

struct CrfGrads {
    transition: Mat,
    start: Vec<f64>,
    end: Vec<f64>,
}

/// Forward and backward pass for one sentence; returns the loss and
/// accumulates all parameter gradients.
fn sentence_pass(
    model: &NerModel,
    mask: Option<&CrfMask>,
    sentence: &TaggedSentence,
    enc_grads: &mut EncoderGrads,
    proj_grads: &mut ProjGrads,
    crf_grads: &mut Option<CrfGrads>,
) -> Result<f64> {
    let tokens = &sentence.sentence.tokens;
    let trace = model.encoder.forward_trace(tokens);
    let first = first_piece_indices(tokens.len(), &trace.piece_to_word)?;

    let steps = tokens.len();
    let mut em = Mat::zeros(steps, LabelIndex::LEN);
    for t in 0..steps {
        model
            .projection
            .mul_vec(trace.scores.row(first[t]), em.row_mut(t));
        for (v, b) in em.row_mut(t).iter_mut().zip(&model.projection_bias) {
            *v += b;
        }
    }
    let gold: Vec<usize> = sentence
        .tags
        .iter()
        .map(|&l| LabelIndex::index(l))
        .collect();

    let (loss, d_em) = match &model.crf {
        Some(crf) => {
            let grad = crf.nll_grad(mask, &em, &gold)?;
            let crf_grads = crf_grads.as_mut().expect("crf gradients allocated");
            for (a, b) in crf_grads
                .transition
                .data_mut()
                .iter_mut()
                .zip(grad.transition.data())
            {
                *a += b;
            }
            for (a, b) in crf_grads.start.iter_mut().zip(&grad.start) {
                *a += b;
            }
            for (a, b) in crf_grads.end.iter_mut().zip(&grad.end) {
                *a += b;
            }
            (grad.nll, grad.emissions)
        }
        None => {
            // mean per-token cross-entropy
            let mut d_em = Mat::zeros(steps, LabelIndex::LEN);
            let mut loss = 0.0;
            let inv = 1.0 / steps as f64;
            for t in 0..steps {
                let probs = softmax(em.row(t));
                loss -= probs[gold[t]].ln() * inv;
                for j in 0..LabelIndex::LEN {
                    let delta = if j == gold[t] { 1.0 } else { 0.0 };
                    d_em.set(t, j, (probs[j] - delta) * inv);
                }
            }
            (loss, d_em)
        }
    };

    let mut d_scores = Mat::zeros(trace.scores.rows(), trace.scores.cols());
    for t in 0..steps {
        let d_row = d_em.row(t);
        proj_grads.wp.add_outer(d_row, trace.scores.row(first[t]));
        for (b, d) in proj_grads.bp.iter_mut().zip(d_row) {
            *b += d;
        }
        model
            .projection
            .mul_vec_transpose_acc(d_row, d_scores.row_mut(first[t]));
    }
    model.encoder.backward(&trace, &d_scores, enc_grads);
    Ok(loss)
}

struct Optimizers {
    embedding: Adam,
    wf: Adam,
    uf: Adam,
    bf: Adam,
    wb: Adam,
    ub: Adam,
    bb: Adam,
    wp: Adam,
    bp: Adam,
    transition: Adam,
    start: Adam,
    end: Adam,
}

impl Optimizers {
    fn new(model: &NerModel, lr: f64) -> Self {
        let e = &model.encoder;
        Self {
            embedding: Adam::new(e.embedding.data().len(), lr),
            wf: Adam::new(e.wf.data().len(), lr),
            uf: Adam::new(e.uf.data().len(), lr),
            bf: Adam::new(e.bf.len(), lr),
            wb: Adam::new(e.wb.data().len(), lr),
            ub: Adam::new(e.ub.data().len(), lr),
            bb: Adam::new(e.bb.len(), lr),
            wp: Adam::new(model.projection.data().len(), lr),
            bp: Adam::new(model.projection_bias.len(), lr),
            transition: Adam::new(LabelIndex::LEN * LabelIndex::LEN, lr),
            start: Adam::new(LabelIndex::LEN, lr),
            end: Adam::new(LabelIndex::LEN, lr),
        }
    }
}

/// Truncates every sentence to the piece budget; returns the corpus
/// and how many sentences lost words.
fn truncate_corpus(corpus: &[TaggedSentence], max_pieces: usize) -> (Vec<TaggedSentence>, usize) {
    let mut truncated = 0usize;
    let mut out = Vec::with_capacity(corpus.len());
    for sent in corpus {
        let kept = words_within_budget(&sent.sentence.tokens, max_pieces);
        if kept == sent.sentence.len() {
            out.push(sent.clone());
        } else {
            truncated += 1;
            let tokens = sent.sentence.tokens[..kept].to_vec();
            let tags = sent.tags[..kept].to_vec();
            out.push(
                TaggedSentence::new(Sentence::from_tokens(tokens), tags)
                    .expect("prefix keeps lengths aligned"),
            );
        }
    }
    (out, truncated)
}

fn validation_f1(model: &NerModel, validation: &[TaggedSentence]) -> Result<f64> {
    let mut pred = Vec::with_capacity(validation.len());
    for sent in validation {
        let tags = model.predict_tags(&sent.sentence.tokens)?;
        pred.push(TaggedSentence::new(sent.sentence.clone(), tags)?);
    }
    Ok(eval::span_f1(validation, &pred)?.micro.f1())
}

/// Trains a tagger. With a validation split the returned model is the
/// epoch checkpoint with the best validation span F1; otherwise it is
/// the final epoch.
pub fn train(
    corpus: &[TaggedSentence],
    validation: Option<&[TaggedSentence]>,
    config: &TrainConfig,
) -> Result<(NerModel, TrainReport)> {
    config.validate()?;
    let corpus: Vec<&TaggedSentence> = corpus.iter().filter(|s| !s.sentence.is_empty()).collect();
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training corpus"));
    }
    let owned: Vec<TaggedSentence> = corpus.into_iter().cloned().collect();
    let (train_set, truncated_sentences) = truncate_corpus(&owned, config.max_pieces);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let encoder = DeskEncoder::init(
        train_set
            .iter()
            .flat_map(|s| s.sentence.tokens.iter().map(String::as_str)),
        &mut rng,
    );
    let width = 2 * HIDDEN;
    let mut model = NerModel {
        config: config.clone(),
        projection: init_mat(LabelIndex::LEN, width, &mut rng),
        projection_bias: vec![0.0; LabelIndex::LEN],
        crf: config
            .crf_enabled
            .then(|| CrfParams::zeros(LabelIndex::LEN)),
        encoder,
    };
    let mask = model.mask();

    let mut opt = Optimizers::new(&model, config.learning_rate);
    let mut enc_grads = EncoderGrads::zeros_like(&model.encoder);
    let mut proj_grads = ProjGrads {
        wp: Mat::zeros(LabelIndex::LEN, width),
        bp: vec![0.0; LabelIndex::LEN],
    };

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, NerModel)> = None;
    let mut indices: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=config.epochs {
        for i in (1..indices.len()).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for batch in indices.chunks(config.batch_size) {
            enc_grads.reset();
            proj_grads.wp.fill(0.0);
            proj_grads.bp.iter_mut().for_each(|v| *v = 0.0);
            let mut crf_grads = model.crf.as_ref().map(|_| CrfGrads {
                transition: Mat::zeros(LabelIndex::LEN, LabelIndex::LEN),
                start: vec![0.0; LabelIndex::LEN],
                end: vec![0.0; LabelIndex::LEN],
            });

            for &i in batch {
                epoch_loss += sentence_pass(
                    &model,
                    mask.as_ref(),
                    &train_set[i],
                    &mut enc_grads,
                    &mut proj_grads,
                    &mut crf_grads,
                )?;
            }

            let scale = 1.0 / batch.len() as f64;
            enc_grads.scale(scale);
            proj_grads
                .wp
                .data_mut()
                .iter_mut()
                .for_each(|v| *v *= scale);
            proj_grads.bp.iter_mut().for_each(|v| *v *= scale);

            let enc = &mut model.encoder;
            opt.embedding
                .update(enc.embedding.data_mut(), enc_grads.embedding.data());
            opt.wf.update(enc.wf.data_mut(), enc_grads.wf.data());
            opt.uf.update(enc.uf.data_mut(), enc_grads.uf.data());
            opt.bf.update(&mut enc.bf, &enc_grads.bf);
            opt.wb.update(enc.wb.data_mut(), enc_grads.wb.data());
            opt.ub.update(enc.ub.data_mut(), enc_grads.ub.data());
            opt.bb.update(&mut enc.bb, &enc_grads.bb);
            opt.wp
                .update(model.projection.data_mut(), proj_grads.wp.data());
            opt.bp.update(&mut model.projection_bias, &proj_grads.bp);
            if let (Some(crf), Some(g)) = (&mut model.crf, &mut crf_grads) {
                g.transition.data_mut().iter_mut().for_each(|v| *v *= scale);
                g.start.iter_mut().for_each(|v| *v *= scale);
                g.end.iter_mut().for_each(|v| *v *= scale);
                opt.transition
                    .update(crf.transition.data_mut(), g.transition.data());
                opt.start.update(&mut crf.start, &g.start);
                opt.end.update(&mut crf.end, &g.end);
            }
        }

        let mean_loss = epoch_loss / train_set.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        epoch_losses.push(mean_loss);

        if let Some(val) = validation {
            let f1 = validation_f1(&model, val)?;
            let improved = best.as_ref().is_none_or(|(b, _, _)| f1 > *b);
            if improved {
                best = Some((f1, epoch, model.clone()));
            }
        }
    }

    let (selected_epoch, validation_f1) = match best {
        Some((f1, epoch, snapshot)) => {
            model = snapshot;
            (epoch, Some(f1))
        }
        None => (config.epochs, None),
    };

    Ok((
        model,
        TrainReport {
            epoch_losses,
            truncated_sentences,
            selected_epoch,
            validation_f1,
        },
    ))
}
