//! Release gate for the toolkit. Each test checks one shipping
//! criterion and prints a single `acceptance: <name>: pass` line, so a
//! `--nocapture` run reads as a checklist.
//!
//! The numeric checks are scored against oracles implemented inside
//! this file, independently of the library code under test: exhaustive
//! path enumeration for the chain model, central finite differences for
//! gradients, and a port of the classic conlleval chunking rules for
//! BIO segmentation and span scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slavner_core::adapters::{load_lemma_resource, LemmaExample, LemmaOrigin};
use slavner_core::corpus::{
    bio_to_spans, parse_annotation_file, read_conll, spans_to_bio, Category, Label, Language,
    Sentence, Span, TaggedSentence,
};
use slavner_core::crf::{CrfMask, CrfParams};
use slavner_core::eval::{lemma_exact_match, mention_set_f1, span_f1, Counts};
use slavner_core::lemma::{
    assemble_training_set, exact_match, language_token_ablation, train_lemmatizer, DataTier,
    LemmaTrainConfig,
};
use slavner_core::math::Mat;
use slavner_core::tagger::{train, TrainConfig};

const CATEGORIES: [Category; 5] = [
    Category::Per,
    Category::Loc,
    Category::Org,
    Category::Evt,
    Category::Pro,
];

fn pass(name: &str) {
    println!("acceptance: {name}: pass");
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn read_fixture(rel: &str) -> Vec<u8> {
    std::fs::read(fixture(rel)).unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

// ------------------------------------------------------------------
// chain model oracle: exhaustive enumeration over all label paths

fn oracle_log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Scores one path with the same left-to-right accumulation the library
/// documents, so agreement can be asserted bitwise.
fn oracle_path_score(params: &CrfParams, emissions: &Mat, path: &[usize]) -> f64 {
    let mut score = params.start[path[0]] + emissions.get(0, path[0]);
    for t in 1..path.len() {
        score += params.transition.get(path[t - 1], path[t]);
        score += emissions.get(t, path[t]);
    }
    score + params.end[path[path.len() - 1]]
}

fn all_paths(steps: usize, labels: usize) -> Vec<Vec<usize>> {
    let mut paths = vec![vec![]];
    for _ in 0..steps {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                (0..labels).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    paths
}

/// Whether `a` beats `b` on an exact score tie. The decoder resolves
/// every maximization toward the lowest label index working backwards
/// from the final position, which selects the path whose reversed label
/// tuple is lexicographically smallest.
fn tie_break_prefers(a: &[usize], b: &[usize]) -> bool {
    for t in (0..a.len()).rev() {
        if a[t] != b[t] {
            return a[t] < b[t];
        }
    }
    false
}

fn oracle_best_path(params: &CrfParams, emissions: &Mat) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for path in all_paths(emissions.rows(), params.labels()) {
        let score = oracle_path_score(params, emissions, &path);
        let replace = match &best {
            None => true,
            Some((bp, bs)) => score > *bs || (score == *bs && tie_break_prefers(&path, bp)),
        };
        if replace {
            best = Some((path, score));
        }
    }
    best.expect("at least one path")
}

fn random_params(rng: &mut ChaCha8Rng, labels: usize) -> CrfParams {
    let mut params = CrfParams::zeros(labels);
    for i in 0..labels {
        params.start[i] = rng.random::<f64>() * 6.0 - 3.0;
        params.end[i] = rng.random::<f64>() * 6.0 - 3.0;
        for j in 0..labels {
            let v = rng.random::<f64>() * 6.0 - 3.0;
            params.transition.set(i, j, v);
        }
    }
    params
}

fn random_emissions(rng: &mut ChaCha8Rng, steps: usize, labels: usize) -> Mat {
    let mut emissions = Mat::zeros(steps, labels);
    for t in 0..steps {
        for j in 0..labels {
            emissions.set(t, j, rng.random::<f64>() * 6.0 - 3.0);
        }
    }
    emissions
}

/// Integer-valued instance: sums are exact in f64, so score ties are
/// real and the tie-break rule is actually exercised.
fn integer_instance(rng: &mut ChaCha8Rng, steps: usize, labels: usize) -> (CrfParams, Mat) {
    let mut params = CrfParams::zeros(labels);
    let mut emissions = Mat::zeros(steps, labels);
    let v = |rng: &mut ChaCha8Rng| rng.random_range(-1..=1i32) as f64;
    for i in 0..labels {
        params.start[i] = v(rng);
        params.end[i] = v(rng);
        for j in 0..labels {
            let t = v(rng);
            params.transition.set(i, j, t);
        }
    }
    for t in 0..steps {
        for j in 0..labels {
            let e = v(rng);
            emissions.set(t, j, e);
        }
    }
    (params, emissions)
}

#[test]
fn chain_scores_match_exhaustive_enumeration() {
    const INSTANCES: usize = 200;
    const TIE_INSTANCES: usize = 50;
    const LOG_Z_TOLERANCE: f64 = 1e-9;
    const TIME_BUDGET: Duration = Duration::from_secs(30);

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    for case in 0..INSTANCES {
        let steps = rng.random_range(1..=6);
        let labels = rng.random_range(1..=4);
        let params = random_params(&mut rng, labels);
        let emissions = random_emissions(&mut rng, steps, labels);

        let log_z = params.log_partition(None, &emissions).unwrap();
        let scores: Vec<f64> = all_paths(steps, labels)
            .iter()
            .map(|p| oracle_path_score(&params, &emissions, p))
            .collect();
        let oracle_log_z = oracle_log_sum_exp(&scores);
        assert!(
            (log_z - oracle_log_z).abs() <= LOG_Z_TOLERANCE,
            "case {case}: log partition {log_z} vs enumerated {oracle_log_z}"
        );

        let decoded = params.viterbi(None, &emissions).unwrap();
        let (oracle_path, oracle_score) = oracle_best_path(&params, &emissions);
        assert_eq!(decoded.path, oracle_path, "case {case}: best path differs");
        assert_eq!(
            decoded.score.to_bits(),
            oracle_score.to_bits(),
            "case {case}: best score not bitwise equal"
        );
    }

    // exact ties: integer scores with many co-optimal paths
    for case in 0..TIE_INSTANCES {
        let steps = rng.random_range(2..=5);
        let labels = rng.random_range(2..=4);
        let (params, emissions) = integer_instance(&mut rng, steps, labels);
        let decoded = params.viterbi(None, &emissions).unwrap();
        let (oracle_path, oracle_score) = oracle_best_path(&params, &emissions);
        assert_eq!(
            decoded.path, oracle_path,
            "tie case {case}: tie-break differs"
        );
        assert_eq!(decoded.score.to_bits(), oracle_score.to_bits());
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < TIME_BUDGET,
        "took {elapsed:?}, budget {TIME_BUDGET:?}"
    );
    pass("chain scoring and decoding vs exhaustive enumeration");
}

// ------------------------------------------------------------------

fn random_mask(rng: &mut ChaCha8Rng, labels: usize) -> CrfMask {
    let mut mask = CrfMask::none(labels);
    for i in 0..labels {
        if rng.random::<f64>() < 0.3 {
            mask.start[i] = -2.0;
        }
        for j in 0..labels {
            if rng.random::<f64>() < 0.3 {
                mask.transition.set(i, j, -2.0);
            }
        }
    }
    mask
}

#[test]
fn chain_gradients_match_finite_differences() {
    const INSTANCES: usize = 50;
    const STEP: f64 = 1e-4;
    const REL_TOLERANCE: f64 = 1e-4;
    const REL_FLOOR: f64 = 1e-3;
    const TIME_BUDGET: Duration = Duration::from_secs(60);

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);

    for case in 0..INSTANCES {
        let steps = rng.random_range(1..=5);
        let labels = rng.random_range(1..=4);
        let params = random_params(&mut rng, labels);
        let emissions = random_emissions(&mut rng, steps, labels);
        let path: Vec<usize> = (0..steps).map(|_| rng.random_range(0..labels)).collect();
        let mask = if case % 2 == 0 {
            None
        } else {
            Some(random_mask(&mut rng, labels))
        };
        let mask = mask.as_ref();

        let grad = params.nll_grad(mask, &emissions, &path).unwrap();
        assert_eq!(
            grad.nll.to_bits(),
            params.nll(mask, &emissions, &path).unwrap().to_bits(),
            "case {case}: reported loss differs from nll()"
        );

        let check = |analytic: f64, fd: f64, what: &str| {
            let denom = analytic.abs().max(fd.abs()).max(REL_FLOOR);
            assert!(
                ((analytic - fd) / denom).abs() < REL_TOLERANCE,
                "case {case} {what}: analytic {analytic} vs fd {fd}"
            );
        };

        for t in 0..steps {
            for j in 0..labels {
                let mut plus = emissions.clone();
                plus.add_at(t, j, STEP);
                let mut minus = emissions.clone();
                minus.add_at(t, j, -STEP);
                let fd = (params.nll(mask, &plus, &path).unwrap()
                    - params.nll(mask, &minus, &path).unwrap())
                    / (2.0 * STEP);
                check(grad.emissions.get(t, j), fd, "emission");
            }
        }
        for i in 0..labels {
            for j in 0..labels {
                let mut plus = params.clone();
                plus.transition.add_at(i, j, STEP);
                let mut minus = params.clone();
                minus.transition.add_at(i, j, -STEP);
                let fd = (plus.nll(mask, &emissions, &path).unwrap()
                    - minus.nll(mask, &emissions, &path).unwrap())
                    / (2.0 * STEP);
                check(grad.transition.get(i, j), fd, "transition");
            }
        }
        for i in 0..labels {
            let mut plus = params.clone();
            plus.start[i] += STEP;
            let mut minus = params.clone();
            minus.start[i] -= STEP;
            let fd = (plus.nll(mask, &emissions, &path).unwrap()
                - minus.nll(mask, &emissions, &path).unwrap())
                / (2.0 * STEP);
            check(grad.start[i], fd, "start");

            let mut plus = params.clone();
            plus.end[i] += STEP;
            let mut minus = params.clone();
            minus.end[i] -= STEP;
            let fd = (plus.nll(mask, &emissions, &path).unwrap()
                - minus.nll(mask, &emissions, &path).unwrap())
                / (2.0 * STEP);
            check(grad.end[i], fd, "end");
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < TIME_BUDGET,
        "took {elapsed:?}, budget {TIME_BUDGET:?}"
    );
    pass("chain gradients vs central finite differences");
}

// ------------------------------------------------------------------
// conlleval port: reference BIO segmentation via the classic
// start-of-chunk / end-of-chunk predicates

fn ends_chunk(prev: Label, curr: Label) -> bool {
    match (prev, curr) {
        (Label::Outside, _) => false,
        (_, Label::Outside) | (_, Label::Begin(_)) => true,
        (Label::Begin(p) | Label::Inside(p), Label::Inside(c)) => p != c,
    }
}

fn starts_chunk(prev: Option<Label>, curr: Label) -> bool {
    match curr {
        Label::Outside => false,
        Label::Begin(_) => true,
        Label::Inside(c) => match prev {
            None | Some(Label::Outside) => true,
            Some(Label::Begin(p) | Label::Inside(p)) => p != c,
        },
    }
}

fn reference_segmentation(tags: &[Label]) -> Vec<Span> {
    let mut chunks = Vec::new();
    let mut open: Option<(usize, Category)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        if let Some((start, category)) = open {
            if ends_chunk(tags[i - 1], tag) {
                chunks.push(Span {
                    start,
                    end: i,
                    category,
                });
                open = None;
            }
        }
        let prev = if i == 0 { None } else { Some(tags[i - 1]) };
        if starts_chunk(prev, tag) {
            let category = tag.category().expect("non-O tag has a category");
            open = Some((i, category));
        }
    }
    if let Some((start, category)) = open {
        chunks.push(Span {
            start,
            end: tags.len(),
            category,
        });
    }
    chunks
}

fn adversarial_corpus() -> (Vec<TaggedSentence>, Vec<TaggedSentence>) {
    let gold = read_conll(&read_fixture("adversarial/gold.conll")).unwrap();
    let pred = read_conll(&read_fixture("adversarial/pred.conll")).unwrap();
    assert_eq!(gold.len(), 200, "adversarial fixture sentence count");
    assert_eq!(gold.len(), pred.len());
    (gold, pred)
}

#[test]
fn bio_codec_round_trips_and_matches_reference_segmentation() {
    const RANDOM_SPAN_SETS: usize = 10_000;

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..RANDOM_SPAN_SETS {
        let len = rng.random_range(1..=40);
        let mut spans = Vec::new();
        let mut pos = 0usize;
        loop {
            pos += rng.random_range(0..=3);
            if pos >= len {
                break;
            }
            let width = rng.random_range(1..=3).min(len - pos);
            spans.push(Span {
                start: pos,
                end: pos + width,
                category: CATEGORIES[rng.random_range(0..CATEGORIES.len())],
            });
            pos += width;
        }
        let tags = spans_to_bio(len, &spans).unwrap();
        assert_eq!(bio_to_spans(&tags), spans, "round trip for {spans:?}");
    }

    // ill-formed sequences: repair must agree with the conlleval rules
    let (gold, pred) = adversarial_corpus();
    for sentence in gold.iter().chain(&pred) {
        assert_eq!(
            sentence.spans(),
            reference_segmentation(&sentence.tags),
            "segmentation differs for tags {:?}",
            sentence.tags
        );
    }

    pass("BIO round trip and adversarial segmentation vs conlleval rules");
}

// ------------------------------------------------------------------

fn tagged(tokens: &[&str], tags: &[&str]) -> TaggedSentence {
    let sentence = Sentence::from_tokens(tokens.iter().map(|t| t.to_string()).collect());
    let labels: Vec<Label> = tags.iter().map(|t| Label::parse(t).unwrap()).collect();
    TaggedSentence::new(sentence, labels).unwrap()
}

/// Reference scores over the adversarial fixture, counted from the
/// conlleval segmentation with plain arithmetic.
fn reference_span_counts(
    gold: &[TaggedSentence],
    pred: &[TaggedSentence],
) -> BTreeMap<Category, Counts> {
    let mut counts: BTreeMap<Category, Counts> = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        let gold_chunks: BTreeSet<Span> = reference_segmentation(&g.tags).into_iter().collect();
        let pred_chunks: BTreeSet<Span> = reference_segmentation(&p.tags).into_iter().collect();
        for chunk in &gold_chunks {
            counts.entry(chunk.category).or_default().gold += 1;
        }
        for chunk in &pred_chunks {
            let c = counts.entry(chunk.category).or_default();
            c.pred += 1;
            if gold_chunks.contains(chunk) {
                c.tp += 1;
            }
        }
    }
    counts
}

fn assert_four_decimals(a: f64, b: f64, what: &str) {
    assert_eq!(format!("{a:.4}"), format!("{b:.4}"), "{what}: {a} vs {b}");
}

#[test]
fn metrics_match_reference_scorer_and_hand_computed_cases() {
    // fixture agreement to four decimal places
    let (gold, pred) = adversarial_corpus();
    let report = span_f1(&gold, &pred).unwrap();
    let reference = reference_span_counts(&gold, &pred);

    let mut micro = Counts::default();
    for (category, expected) in &reference {
        micro.tp += expected.tp;
        micro.pred += expected.pred;
        micro.gold += expected.gold;
        let got = report
            .per_category
            .get(category)
            .copied()
            .unwrap_or_default();
        assert_eq!(got, *expected, "{category:?} counts");
        assert_four_decimals(got.precision(), expected.precision(), "precision");
        assert_four_decimals(got.recall(), expected.recall(), "recall");
        assert_four_decimals(got.f1(), expected.f1(), "f1");
    }
    assert_eq!(report.micro, micro, "micro counts");
    assert_four_decimals(
        report.micro.precision(),
        micro.precision(),
        "micro precision",
    );
    assert_four_decimals(report.micro.recall(), micro.recall(), "micro recall");
    assert_four_decimals(report.micro.f1(), micro.f1(), "micro f1");
    assert!(
        micro.gold > 0 && micro.pred > 0,
        "fixture exercises both sides"
    );

    // hand-computed span-f1 cases
    let perfect = vec![tagged(&["a", "b", "c"], &["B-PER", "I-PER", "O"])];
    let r = span_f1(&perfect, &perfect).unwrap();
    assert_eq!(
        (r.micro.precision(), r.micro.recall(), r.micro.f1()),
        (1.0, 1.0, 1.0)
    );

    let empty_pred = vec![tagged(&["a", "b"], &["O", "O"])];
    let one_gold = vec![tagged(&["a", "b"], &["B-LOC", "O"])];
    let r = span_f1(&one_gold, &empty_pred).unwrap();
    assert_eq!(
        (r.micro.precision(), r.micro.recall(), r.micro.f1()),
        (0.0, 0.0, 0.0)
    );

    // tp 1, pred 2, gold 2: P = R = F1 = 1/2
    let g = vec![tagged(&["a", "b", "c"], &["B-ORG", "O", "B-EVT"])];
    let p = vec![tagged(&["a", "b", "c"], &["B-ORG", "B-PRO", "O"])];
    let r = span_f1(&g, &p).unwrap();
    assert_eq!((r.micro.tp, r.micro.pred, r.micro.gold), (1, 2, 2));
    assert_eq!(
        (r.micro.precision(), r.micro.recall(), r.micro.f1()),
        (0.5, 0.5, 0.5)
    );

    // hand-computed mention-f1 cases
    let doc = |mentions: &[(&str, Category)]| -> Vec<(String, Category)> {
        mentions.iter().map(|(f, c)| (f.to_string(), *c)).collect()
    };
    let same = vec![doc(&[("Praga", Category::Loc), ("Sejm", Category::Org)])];
    let r = mention_set_f1(&same, &same, true).unwrap();
    assert_eq!(r.micro.f1(), 1.0);

    let upper = vec![doc(&[("PRAGA", Category::Loc)])];
    let lower = vec![doc(&[("praga", Category::Loc)])];
    assert_eq!(
        mention_set_f1(&upper, &lower, false).unwrap().micro.f1(),
        1.0
    );
    assert_eq!(
        mention_set_f1(&upper, &lower, true).unwrap().micro.f1(),
        0.0
    );

    // tp 1, pred 1, gold 2: P = 1, R = 1/2, F1 = 2/3
    let two = vec![doc(&[("Praga", Category::Loc), ("Brno", Category::Loc)])];
    let one = vec![doc(&[("Praga", Category::Loc)])];
    let r = mention_set_f1(&two, &one, true).unwrap();
    assert_eq!((r.micro.precision(), r.micro.recall()), (1.0, 0.5));
    assert!((r.micro.f1() - 2.0 / 3.0).abs() < 1e-12);

    // hand-computed lemma exact match cases
    let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
    assert_eq!(lemma_exact_match(&[pair("Litwa", "Litwa")]).unwrap(), 1.0);
    assert_eq!(
        lemma_exact_match(&[pair("Unia  Europejska", "unia europejska")]).unwrap(),
        1.0
    );
    assert_eq!(
        lemma_exact_match(&[pair("Sejm", "Sejm"), pair("Litwa", "Litwie")]).unwrap(),
        0.5
    );

    pass("metric fidelity vs reference scorer and hand-computed cases");
}

// ------------------------------------------------------------------

fn predict_corpus(
    model: &slavner_core::tagger::NerModel,
    corpus: &[TaggedSentence],
) -> Vec<TaggedSentence> {
    corpus
        .iter()
        .map(|s| {
            let tags = model.predict_tags(&s.sentence.tokens).unwrap();
            TaggedSentence::new(s.sentence.clone(), tags).unwrap()
        })
        .collect()
}

#[test]
fn tagger_overfits_the_fifty_sentence_corpus() {
    const TIME_BUDGET: Duration = Duration::from_secs(300);

    let started = Instant::now();
    let corpus = read_conll(&read_fixture("ner-overfit.conll")).unwrap();
    assert_eq!(corpus.len(), 50, "overfit fixture sentence count");

    // default configuration caps training at 200 epochs
    let config = TrainConfig::default();
    assert_eq!(config.epochs, 200);
    let (model, report) = train(&corpus, None, &config).unwrap();
    let f1 = span_f1(&corpus, &predict_corpus(&model, &corpus))
        .unwrap()
        .micro
        .f1();
    assert!(
        f1 == 1.0,
        "span F1 {f1} after {} epochs, final loss {:?}",
        report.epoch_losses.len(),
        report.epoch_losses.last()
    );

    // same run without the chain layer: must complete; score is
    // informational only
    let softmax_config = TrainConfig {
        crf_enabled: false,
        constraint_mask: false,
        ..config
    };
    let (softmax_model, _) = train(&corpus, None, &softmax_config).unwrap();
    let softmax_f1 = span_f1(&corpus, &predict_corpus(&softmax_model, &corpus))
        .unwrap()
        .micro
        .f1();
    println!("  softmax-only span F1 {softmax_f1:.4} (reported, not asserted)");

    let elapsed = started.elapsed();
    assert!(
        elapsed < TIME_BUDGET,
        "took {elapsed:?}, budget {TIME_BUDGET:?}"
    );
    pass("tagger overfits the fifty-sentence corpus with the default config");
}

// ------------------------------------------------------------------

/// All bundled lemma resources except the identity list, loaded with
/// their origins; every file must parse without skipped rows.
fn lemma_examples() -> Vec<LemmaExample> {
    let files: [(&str, LemmaOrigin, Language); 8] = [
        (
            "lemma/shared-task-pl.tsv",
            LemmaOrigin::SharedTask,
            Language::Pl,
        ),
        (
            "lemma/shared-task-cs.tsv",
            LemmaOrigin::SharedTask,
            Language::Cs,
        ),
        (
            "lemma/shared-task-ru.tsv",
            LemmaOrigin::SharedTask,
            Language::Ru,
        ),
        (
            "lemma/poleval2019-pl.tsv",
            LemmaOrigin::Poleval2019,
            Language::Pl,
        ),
        ("lemma/sejf-pl.csv", LemmaOrigin::Sejf, Language::Pl),
        ("lemma/sejfek-pl.csv", LemmaOrigin::Sejfek, Language::Pl),
        (
            "lemma/translated-cs.tsv",
            LemmaOrigin::Translated,
            Language::Cs,
        ),
        (
            "lemma/translated-ru.tsv",
            LemmaOrigin::Translated,
            Language::Ru,
        ),
    ];
    let mut examples = Vec::new();
    for (file, origin, language) in files {
        let report = load_lemma_resource(&[&read_fixture(file)], origin, language).unwrap();
        assert_eq!(report.skipped, 0, "{file}: defective rows");
        examples.extend(report.examples);
    }
    examples
}

#[test]
fn lemmatizer_overfits_the_hundred_pair_set() {
    const EM_THRESHOLD: f64 = 0.95;
    const TIME_BUDGET: Duration = Duration::from_secs(300);

    let started = Instant::now();
    let pairs = assemble_training_set(&lemma_examples(), DataTier::WithLexicon, true);
    assert_eq!(pairs.len(), 100, "full-tier training set size");

    let (model, report) = train_lemmatizer(&pairs, None, &LemmaTrainConfig::default()).unwrap();
    let em = exact_match(&model, &pairs);
    assert!(
        em >= EM_THRESHOLD,
        "exact match {em} after {} epochs, final loss {:?}",
        report.epoch_losses.len(),
        report.epoch_losses.last()
    );

    // copying alone: identity pairs must reach a perfect score
    let identity = load_lemma_resource(
        &[&read_fixture("lemma/identity-pl.tsv")],
        LemmaOrigin::SharedTask,
        Language::Pl,
    )
    .unwrap();
    assert_eq!(identity.examples.len(), 30);
    let identity_pairs = assemble_training_set(&identity.examples, DataTier::OriginalData, false);
    let identity_config = LemmaTrainConfig {
        epochs: 200,
        batch_size: 4,
        embed_dim: 16,
        hidden: 32,
        multilingual: false,
        ..LemmaTrainConfig::default()
    };
    let (identity_model, _) = train_lemmatizer(&identity_pairs, None, &identity_config).unwrap();
    let identity_em = exact_match(&identity_model, &identity_pairs);
    assert_eq!(identity_em, 1.0, "identity pairs must be copied exactly");

    let elapsed = started.elapsed();
    assert!(
        elapsed < TIME_BUDGET,
        "took {elapsed:?}, budget {TIME_BUDGET:?}"
    );
    pass("lemmatizer overfits the hundred-pair set and copies identity pairs");
}

// ------------------------------------------------------------------

#[test]
fn language_token_ablation_produces_the_report_schema() {
    let examples = lemma_examples();
    // short runs: the shape of the report is the contract here, the
    // delta itself is informational
    let config = LemmaTrainConfig {
        epochs: 50,
        ..LemmaTrainConfig::default()
    };
    let report = language_token_ablation(&examples, &examples, &config).unwrap();

    let languages: Vec<Language> = vec![Language::Pl, Language::Cs, Language::Ru];
    for map in [&report.with_tokens, &report.without_tokens, &report.delta] {
        let keys: Vec<Language> = map.keys().copied().collect();
        assert_eq!(keys, languages, "one entry per language");
    }
    for lang in &languages {
        let with = report.with_tokens[lang];
        let without = report.without_tokens[lang];
        assert!((0.0..=1.0).contains(&with) && (0.0..=1.0).contains(&without));
        assert!(
            (report.delta[lang] - (with - without)).abs() < 1e-12,
            "delta is the difference of the two scores"
        );
        println!(
            "  {}: with tokens {with:.4}, without {without:.4}, delta {:+.4} (reported, not asserted)",
            lang.as_str(),
            report.delta[lang]
        );
    }

    pass("language-token ablation report schema");
}

// ------------------------------------------------------------------

fn run_cli(args: &[&str]) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_slavner"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "slavner {args:?} failed\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 stdout")
}

fn kv_count(report: &str, key: &str) -> usize {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in:\n{report}"))
        .trim()
        .parse()
        .unwrap()
}

fn mention_records(path: &Path) -> BTreeSet<(String, String, Category)> {
    let file = parse_annotation_file(&std::fs::read(path).unwrap()).unwrap();
    file.annotations
        .into_iter()
        .map(|m| (m.form, m.lemma, m.category))
        .collect()
}

#[test]
fn end_to_end_pipeline_reproduces_gold_annotations() {
    let work = tempfile::tempdir().unwrap();
    let dir = |rel: &str| {
        let p = work.path().join(rel);
        std::fs::create_dir_all(&p).unwrap();
        p
    };
    let path_str = |p: &Path| p.to_str().unwrap().to_string();

    // convert every language; no gold mention may go unmatched
    let conll_dir = dir("conll");
    for lang in ["pl", "cs", "ru"] {
        let unmatched = work.path().join(format!("unmatched-{lang}.tsv"));
        let stdout = run_cli(&[
            "convert",
            "--input",
            &path_str(&fixture(&format!("raw/{lang}"))),
            "--language",
            lang,
            "--output",
            &path_str(&conll_dir.join(format!("{lang}.conll"))),
            "--unmatched",
            &path_str(&unmatched),
        ]);
        assert!(
            stdout.contains("0 unmatched mentions"),
            "convert {lang}: {stdout}"
        );
        assert_eq!(
            std::fs::read_to_string(&unmatched).unwrap(),
            "",
            "unmatched report"
        );
    }

    // one multilingual tagger over all three converted corpora
    let ner_cfg = work.path().join("ner.cfg");
    std::fs::write(
        &ner_cfg,
        "seed = 42\nepochs = 300\nbatch_size = 8\nlearning_rate = 0.01\n",
    )
    .unwrap();
    let ner_ckpt = work.path().join("ckpt-ner");
    run_cli(&[
        "train-ner",
        "--config",
        &path_str(&ner_cfg),
        "--corpus",
        &path_str(&conll_dir.join("pl.conll")),
        "--corpus",
        &path_str(&conll_dir.join("cs.conll")),
        "--corpus",
        &path_str(&conll_dir.join("ru.conll")),
        "--out",
        &path_str(&ner_ckpt),
    ]);

    // one multilingual lemmatizer from the gold annotation files
    let lemma_ckpt = work.path().join("ckpt-lemma");
    run_cli(&[
        "train-lemma",
        "--annotations",
        &format!("pl={}", path_str(&fixture("raw/pl"))),
        "--annotations",
        &format!("cs={}", path_str(&fixture("raw/cs"))),
        "--annotations",
        &format!("ru={}", path_str(&fixture("raw/ru"))),
        "--tier",
        "original",
        "--out",
        &path_str(&lemma_ckpt),
    ]);

    let bindings = work.path().join("bindings.cfg");
    std::fs::write(
        &bindings,
        format!(
            "ner.multilingual-large = {}\nlemma.multilingual-lemmatizer = {}\n",
            path_str(&ner_ckpt),
            path_str(&lemma_ckpt)
        ),
    )
    .unwrap();

    // predict with the multilingual preset and compare against gold
    let all_pred = dir("pred-all");
    let all_docs = dir("docs-all");
    for lang in ["pl", "cs", "ru"] {
        let pred_dir = dir(&format!("pred-{lang}"));
        run_cli(&[
            "predict",
            "--preset",
            "system2",
            "--bindings",
            &path_str(&bindings),
            "--language",
            lang,
            "--input",
            &path_str(&fixture(&format!("raw/{lang}"))),
            "--output",
            &path_str(&pred_dir),
        ]);

        for doc in [format!("{lang}-01"), format!("{lang}-02")] {
            let gold_path = fixture(&format!("raw/{lang}/{doc}.out"));
            let pred_path = pred_dir.join(format!("{doc}.out"));
            assert_eq!(
                mention_records(&pred_path),
                mention_records(&gold_path),
                "{doc}: predicted records differ from gold"
            );
            std::fs::copy(&pred_path, all_pred.join(format!("{doc}.out"))).unwrap();
            std::fs::copy(
                fixture(&format!("raw/{lang}/{doc}.txt")),
                all_docs.join(format!("{doc}.txt")),
            )
            .unwrap();
        }

        for metric in ["mention-f1", "lemma-em"] {
            let report = run_cli(&[
                "evaluate",
                "--gold",
                &path_str(&fixture(&format!("raw/{lang}"))),
                "--pred",
                &path_str(&pred_dir),
                "--metric",
                metric,
                "--format",
                "kv",
            ]);
            let tp = kv_count(&report, "micro.tp");
            assert_eq!(
                tp,
                kv_count(&report, "micro.pred"),
                "{lang} {metric} precision"
            );
            assert_eq!(
                tp,
                kv_count(&report, "micro.gold"),
                "{lang} {metric} recall"
            );
            assert!(tp > 0, "{lang} {metric}: empty evaluation");
        }
    }

    // package, validate, and check that repackaging is byte-identical
    let archive = work.path().join("submission.tar");
    run_cli(&[
        "package-submission",
        "--pred",
        &path_str(&all_pred),
        "--preset",
        "system2",
        "--output",
        &path_str(&archive),
        "--documents",
        &path_str(&all_docs),
    ]);
    let stdout = run_cli(&["validate-submission", "--archive", &path_str(&archive)]);
    assert!(
        stdout.contains("submission format: ok"),
        "validator: {stdout}"
    );
    assert!(stdout.contains("6 documents"), "validator: {stdout}");

    let archive_again = work.path().join("submission-rerun.tar");
    run_cli(&[
        "package-submission",
        "--pred",
        &path_str(&all_pred),
        "--preset",
        "system2",
        "--output",
        &path_str(&archive_again),
        "--documents",
        &path_str(&all_docs),
    ]);
    assert_eq!(
        std::fs::read(&archive).unwrap(),
        std::fs::read(&archive_again).unwrap(),
        "repackaging must be byte-identical"
    );

    pass("end-to-end pipeline reproduces gold annotations and packages cleanly");
}

// ------------------------------------------------------------------

#[test]
fn data_tiers_form_a_superset_chain_with_exact_counts() {
    let examples = lemma_examples();

    let original = assemble_training_set(&examples, DataTier::OriginalData, true);
    let with_poleval = assemble_training_set(&examples, DataTier::WithPoleval, true);
    let with_lexicon = assemble_training_set(&examples, DataTier::WithLexicon, true);

    assert_eq!(original.len(), 40, "organizer data only");
    assert_eq!(with_poleval.len(), 70, "plus the external annotated corpus");
    assert_eq!(with_lexicon.len(), 100, "plus lexicons and translations");

    let original_set: BTreeSet<_> = original.iter().collect();
    let poleval_set: BTreeSet<_> = with_poleval.iter().collect();
    let lexicon_set: BTreeSet<_> = with_lexicon.iter().collect();
    assert_eq!(original_set.len(), 40, "no duplicate pairs in the fixtures");
    assert_eq!(lexicon_set.len(), 100, "no duplicate pairs in the fixtures");
    assert!(
        original_set.is_subset(&poleval_set),
        "tier one inside tier two"
    );
    assert!(
        poleval_set.is_subset(&lexicon_set),
        "tier two inside tier three"
    );

    // origin sets grow the same way
    let o1: BTreeSet<_> = DataTier::OriginalData.origins().iter().collect();
    let o2: BTreeSet<_> = DataTier::WithPoleval.origins().iter().collect();
    let o3: BTreeSet<_> = DataTier::WithLexicon.origins().iter().collect();
    assert!(o1.is_subset(&o2) && o2.is_subset(&o3));

    pass("data tiers form a superset chain with the exact fixture counts");
}
