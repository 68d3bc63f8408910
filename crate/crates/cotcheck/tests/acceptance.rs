//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them).

use std::collections::HashSet;
use std::io::BufReader;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cotcheck::embed::{EmbeddingProvider, TrigramEmbedder};
use cotcheck::eval::{needleman_wunsch, EvalConfig, VerdictLabel};
use cotcheck::ground_truth::{extract_paths, question, validate_path, GroundTruthPath, QuestionRecord};
use cotcheck::harness::{precision_recall_f1, Counts, Facet, GenRow, RunConfig};
use cotcheck::index::{build_index, top_k};
use cotcheck::kg::{normalize, KnowledgeGraph, Triple};
use cotcheck::llm::{render_prompt, ChatClient, GenerationConfig, PlanHint, PromptMode, ReplayStore};
use cotcheck::oracles::fixtures::{
    appendix_a_question, case_studies, corpus_endpoint, desk_kg, desk_step_texts, fixture_dir,
};
use cotcheck::oracles::{brute_force_edit, brute_force_retrieve, enumerate_simple_paths};
use cotcheck::parser::{classify_text, load_response_corpus, ParsedCoT, ResponseClass};
use cotcheck::perturb::{
    build_discriminative_set, corrupt_entities, sample_misguided, shuffle_path, save_items,
    MixSpec, QuestionPaths,
};
use cotcheck::retrieval::{construct_path, retrieve_triple, score_triple};

#[test]
fn criterion_1_retrieval_matches_brute_force_oracle() {
    let started = Instant::now();
    let g = desk_kg();
    let provider = TrigramEmbedder::new();
    let index = build_index(&g, &provider, 32).unwrap();
    let steps = desk_step_texts(2024, 100);

    for step in &steps {
        let got = retrieve_triple(step, &index, &provider, index.len()).unwrap();
        let oracle = brute_force_retrieve(step, &g, &provider).unwrap();
        assert_eq!(
            got.triple, oracle.triple,
            "k=|G| retrieval disagrees with the oracle on step: {step}"
        );
        // Stored vectors are re-normalized in f32, so scores agree to
        // single precision, not double.
        assert!((got.final_score - oracle.final_score).abs() < 1e-6);

        // Paper default k=10: the winner always comes from the cosine
        // top-10 candidate set.
        let got10 = retrieve_triple(step, &index, &provider, 10).unwrap();
        let query = provider.embed_one(step).unwrap();
        let top10: Vec<Triple> = top_k(&index, &query, 10)
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert!(
            top10.contains(&got10.triple),
            "k=10 winner is outside the cosine top-10 set"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!(
        "ACCEPTANCE 1 PASS: retrieval oracle equivalence on 100 steps x 200 triples ({elapsed:?})"
    );
}

#[test]
fn criterion_2_blended_score_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphabet: Vec<char> = "abcdefghij klmnop".chars().collect();
    let random_text = |rng: &mut ChaCha8Rng, max_len: usize| -> String {
        let len = rng.random_range(1..=max_len);
        (0..len)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect()
    };
    for _ in 0..1000 {
        let tau = rng.random_range(-1.0f64..=1.0);
        let head = random_text(&mut rng, 12);
        let tail = random_text(&mut rng, 12);
        let step = random_text(&mut rng, 40);
        let t = Triple::from_labels(&head, "relation.name", &tail);
        let g = score_triple(&step, &t, tau);
        let residual = 3.0 * g.final_score - g.cosine_sim - g.head_match - g.tail_match;
        assert!(residual.abs() < 1e-9, "identity violated: {residual}");
        assert!((0.0..=1.0).contains(&g.head_match));
        assert!((0.0..=1.0).contains(&g.tail_match));
        assert!((-1.0 / 3.0 - 1e-12..=1.0 + 1e-12).contains(&g.final_score));
    }
    println!("ACCEPTANCE 2 PASS: blended-score identity holds on 1000 random triplets");
}

#[test]
fn criterion_3_needleman_wunsch_agrees_with_edit_dp() {
    let started = Instant::now();
    let alphabet = [
        Triple::from_labels("a", "r", "b"),
        Triple::from_labels("b", "s", "c"),
        Triple::from_labels("c", "u", "d"),
    ];
    // All sequences of length 0..=4 over the 3-triple alphabet: 121.
    let mut sequences: Vec<Vec<Triple>> = vec![vec![]];
    let mut frontier: Vec<Vec<Triple>> = vec![vec![]];
    for _ in 0..4 {
        let mut next = Vec::new();
        for seq in &frontier {
            for t in &alphabet {
                let mut s = seq.clone();
                s.push(t.clone());
                next.push(s);
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }
    assert_eq!(sequences.len(), 121);

    let mut pairs = 0usize;
    for a in &sequences {
        for b in &sequences {
            let nw = needleman_wunsch(a, b);
            let oracle = brute_force_edit(a, b);
            assert_eq!(
                nw.edit_distance, oracle,
                "NW non-match count disagrees with DP oracle on {a:?} vs {b:?}"
            );
            pairs += 1;
        }
    }
    assert_eq!(pairs, 14641);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!("ACCEPTANCE 3 PASS: NW = DP edit distance on all {pairs} pairs ({elapsed:?})");
}

#[test]
fn criterion_4_case_study_verdicts() {
    let cfg = EvalConfig::default();
    assert_eq!(cfg.sigma, 0.7);
    let cases = case_studies();
    assert_eq!(cases.len(), 4);
    let mut hits = 0;
    for case in &cases {
        let v = cotcheck::eval::evaluate_path(
            &case.path,
            Some(&case.final_answer),
            &case.question,
            &cfg,
        )
        .unwrap();
        assert_eq!(v.label, case.expected, "case {}", case.name);
        hits += 1;
        if case.name == "helen-keller" {
            assert!((case.path.groundings[1].final_score - 0.57).abs() < 1e-12);
            assert_eq!(v.failing_step, Some(1));
        }
    }
    println!("ACCEPTANCE 4 PASS: {hits}/4 case-study verdicts exact");
}

fn path_keys(steps: &[Triple]) -> Vec<(String, String, String)> {
    steps.iter().map(Triple::key).collect()
}

#[test]
fn criterion_5_ground_truth_extraction() {
    // The worked example: one path, first hop direction-swapped.
    let q = appendix_a_question();
    let paths = extract_paths(&q, 4).unwrap();
    assert_eq!(paths.len(), 1);
    let p = &paths[0];
    assert_eq!(
        path_keys(&p.steps),
        vec![
            (
                "m.02g__4".into(),
                "location.country.administrative_divisions".into(),
                "m.03gyl".into()
            ),
            (
                "m.03gyl".into(),
                "location.country.languages_spoken".into(),
                "m.02dhwl".into()
            ),
        ]
    );
    assert!(q.subgraph.contains(&p.steps[0].reversed()));

    // 50 random graphs with at most 12 nodes: extraction must equal the
    // exhaustive oracle enumeration.
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for round in 0..50 {
        let nodes = rng.random_range(4..=12usize);
        let edges = rng.random_range(nodes..=3 * nodes);
        let mut g = KnowledgeGraph::new();
        for _ in 0..edges {
            let a = rng.random_range(0..nodes);
            let mut b = rng.random_range(0..nodes);
            if a == b {
                b = (b + 1) % nodes;
            }
            let rel = format!("rel{}", rng.random_range(0..4));
            g.insert(Triple::from_labels(&format!("n{a}"), &rel, &format!("n{b}")));
        }
        let present: Vec<String> = g.entities().iter().map(|e| e.label.clone()).collect();
        let topic_count = rng.random_range(1..=2usize.min(present.len()));
        let answer_count = rng.random_range(1..=2usize.min(present.len()));
        let topics: Vec<&str> = (0..topic_count)
            .map(|_| present[rng.random_range(0..present.len())].as_str())
            .collect();
        let answers: Vec<&str> = (0..answer_count)
            .map(|_| present[rng.random_range(0..present.len())].as_str())
            .collect();
        let q = question(&format!("rand{round}"), "?", &topics, &answers, g.clone());

        let got: HashSet<Vec<(String, String, String)>> = extract_paths(&q, 4)
            .unwrap()
            .iter()
            .map(|p| path_keys(&p.steps))
            .collect();
        let mut expected: HashSet<Vec<(String, String, String)>> = HashSet::new();
        for t in &topics {
            for a in &answers {
                for path in enumerate_simple_paths(&g, t, a, 4) {
                    expected.insert(path_keys(&path));
                }
            }
        }
        assert_eq!(got, expected, "mismatch on random graph {round}");
        for p in extract_paths(&q, 4).unwrap() {
            assert!(validate_path(&p, &q), "unsound path on graph {round}");
        }
    }
    println!("ACCEPTANCE 5 PASS: worked extraction example + 50 random graphs match the oracle");
}

/// Direction-agnostic membership recomputed by linear scan, independent of
/// the store's indexes.
fn scan_contains(g: &KnowledgeGraph, t: &Triple) -> bool {
    g.triples().iter().any(|x| {
        let fwd = normalize(&x.head.label) == normalize(&t.head.label)
            && normalize(&x.tail.label) == normalize(&t.tail.label);
        let rev = normalize(&x.head.label) == normalize(&t.tail.label)
            && normalize(&x.tail.label) == normalize(&t.head.label);
        (fwd || rev) && normalize(&x.relation.name) == normalize(&t.relation.name)
    })
}

fn synthetic_dataset(questions: usize) -> (Vec<QuestionRecord>, KnowledgeGraph) {
    let mut combined = KnowledgeGraph::new();
    let mut records = Vec::new();
    for i in 0..questions {
        let names: Vec<String> = (0..4).map(|j| format!("q{i} node{j}")).collect();
        let mut sub = KnowledgeGraph::new();
        for j in 0..3 {
            let t = Triple::from_labels(&names[j], &format!("rel.chain.hop{}", j % 3), &names[j + 1]);
            sub.insert(t.clone());
            combined.insert(t);
        }
        records.push(question(
            &format!("q{i}"),
            &format!("synthetic question {i}?"),
            &[&names[0]],
            &[&names[3]],
            sub,
        ));
    }
    (records, combined)
}

#[test]
fn criterion_6_perturbation_invariants() {
    let (records, g) = synthetic_dataset(25);
    let paths: Vec<GroundTruthPath> = records
        .iter()
        .map(|q| extract_paths(q, 4).unwrap().into_iter().next().unwrap())
        .collect();
    let pool: Vec<QuestionPaths> = records
        .iter()
        .zip(&paths)
        .map(|(q, p)| QuestionPaths {
            question_id: q.id.clone(),
            paths: vec![p.clone()],
        })
        .collect();

    // 500 of each kind, every one checked against its invariant.
    for i in 0..500usize {
        let qi = i % records.len();
        let seed = i as u64;

        let corrupted = corrupt_entities(&paths[qi], &g, seed).unwrap();
        assert!(
            corrupted.steps.iter().any(|t| !scan_contains(&g, t)),
            "corrupted path {i} has no KG-absent triple"
        );

        let shuffled = shuffle_path(&paths[qi], seed).unwrap();
        assert!(
            (1..shuffled.steps.len())
                .any(|k| shuffled.steps[k].head.key() != shuffled.steps[k - 1].tail.key()),
            "shuffled path {i} still chains"
        );
        assert!(
            shuffled.steps.iter().all(|t| scan_contains(&g, t)),
            "shuffled path {i} lost a true triple"
        );

        let misguided = sample_misguided(&records[qi], &[paths[qi].clone()], &pool, seed).unwrap();
        let as_path = GroundTruthPath::new(misguided.steps.clone());
        let origin = records
            .iter()
            .find(|r| r.id == misguided.origin_question)
            .expect("origin exists");
        assert!(validate_path(&as_path, origin), "misguided {i} invalid for origin");
        assert!(!validate_path(&as_path, &records[qi]), "misguided {i} valid for target");
    }

    // Fixed seed reproduces byte-identical datasets; a different seed does not.
    let dump = |seed: u64| {
        let set = build_discriminative_set(&records, &g, seed, MixSpec::default()).unwrap();
        let mut buf = Vec::new();
        save_items(&set.items, &mut buf).unwrap();
        buf
    };
    assert_eq!(dump(42), dump(42));
    assert_ne!(dump(42), dump(43));
    println!("ACCEPTANCE 6 PASS: 500 items per perturbation kind satisfy their invariants; generation is seed-stable");
}

#[test]
fn criterion_7_metrics_arithmetic() {
    let c = Counts {
        fr: 35,
        ur: 45,
        abstained: 10,
        unstructured: 10,
        ..Counts::default()
    };
    let s = precision_recall_f1(&c, Facet::Reasoning);
    assert!((s.precision - 0.4375).abs() < 1e-9);
    assert!((s.recall - 0.35).abs() < 1e-9);
    assert!((s.f1 - 0.3889).abs() < 1e-4);
    assert!(!s.flagged);

    let degenerate = precision_recall_f1(
        &Counts {
            abstained: 5,
            ..Counts::default()
        },
        Facet::Reasoning,
    );
    assert_eq!(
        (degenerate.precision, degenerate.recall, degenerate.f1),
        (0.0, 0.0, 0.0)
    );
    assert!(degenerate.flagged);

    let empty = precision_recall_f1(&Counts::default(), Facet::Answer);
    assert_eq!((empty.precision, empty.recall, empty.f1), (0.0, 0.0, 0.0));
    assert!(empty.flagged);
    println!("ACCEPTANCE 7 PASS: metric arithmetic matches the worked counts; degenerate cases flagged");
}

#[test]
fn criterion_8_parser_golden_corpus() {
    use ResponseClass::*;
    let abstained_items = [
        "I do not have knowledge of that event.",
        "Please provide more information about the film.",
        "I need more context to answer.",
        "The author of that book is unknown.",
        "I cannot answer this.",
        "Sorry, let me think again.",
        "That is impossible to say.",
        "It is not possible to determine the year.",
        "I am unable to verify the claim.",
        "The wording of the question is unclear.",
        // Precedence: structure present, abstention still wins.
        "1. First.\nsorry line inside.\nSo the answer is (x).",
    ];
    let structured_items: [(&str, usize, &str); 10] = [
        ("1. Lou Seal is the mascot for the San Francisco Giants.\n2. The San Francisco Giants are associated with the sports championship event, the 2014 World Series.\nSo the answer is (2014 World Series).", 2, "2014 World Series"),
        ("1. Brazil borders Bolivia.\nSo the answer is (Brazil).", 1, "Brazil"),
        ("1. A step.\n2. B step.\n3. C step.\n4. D step.\nSo the answer is (Paris).", 4, "Paris"),
        ("1. Mary Mary has a member named Tina Campbell\n2. Mary Mary has a member named Erica Campbell\nSo the answer is (Erica Campbell, Tina Campbell).", 2, "Erica Campbell, Tina Campbell"),
        ("  1. Indented step one.\n  2. Indented step two.\nThe answer is Madrid.", 2, "Madrid"),
        ("1. Only fact here.\nThe answer to the question is: Paris", 1, "Paris"),
        ("1. First reasoning.\n2. Second reasoning.\nSo the answer is (first guess).\nActually, So the answer is (final guess).", 2, "final guess"),
        ("1. Alpha.\n2. Beta.\nSo the answer is (Tokyo)", 2, "Tokyo"),
        ("1. Step body with numbers 42 inside.\nSo the answer is (42).", 1, "42"),
        ("1. The answer is computed below.\n2. Some more work.\nSo the answer is (below the fold).", 2, "below the fold"),
    ];
    let unstructured_items = [
        "",
        "Paris is the capital of France.",
        "2. Second step only.\n3. Third.\nSo the answer is (x).",
        "1. Step present but no conclusion line.",
        "So the answer is (Paris).",
        "Step 1: Something -> relation -> Other\nSo the answer is (x).",
        "1.Missing space after dot.\nSo the answer is (x).",
        "I think it might be Paris",
        "The final answer is Paris",
    ];
    assert_eq!(
        abstained_items.len() + structured_items.len() + unstructured_items.len(),
        30
    );

    for text in abstained_items {
        assert_eq!(classify_text(text), Abstained, "item: {text:?}");
    }
    for (text, steps, answer) in structured_items {
        match classify_text(text) {
            Structured(cot) => {
                assert_eq!(cot.steps.len(), steps, "item: {text:?}");
                assert_eq!(cot.final_answer, answer, "item: {text:?}");
                // Structured round-trip: re-render and re-classify.
                let rendered = ParsedCoT {
                    steps: cot.steps.clone(),
                    final_answer: cot.final_answer.clone(),
                }
                .render();
                match classify_text(&rendered) {
                    Structured(back) => {
                        assert_eq!(back.steps, cot.steps);
                        assert_eq!(back.final_answer, cot.final_answer);
                    }
                    other => panic!("round trip degraded to {other:?}"),
                }
            }
            other => panic!("expected structured, got {other:?} for {text:?}"),
        }
    }
    for text in unstructured_items {
        assert_eq!(classify_text(text), Unstructured, "item: {text:?}");
    }
    println!("ACCEPTANCE 8 PASS: 30-item parser corpus classified 100% correctly; round-trip holds");
}

#[test]
fn criterion_9_end_to_end_replay() {
    let fixtures = fixture_dir("replay10");
    let load = cotcheck::ground_truth::load_dataset(&fixtures.join("questions.jsonl")).unwrap();
    assert!(load.skipped.is_empty());
    let corpus = load_response_corpus(BufReader::new(
        std::fs::File::open(fixtures.join("responses.jsonl")).unwrap(),
    ))
    .unwrap();
    let endpoint = corpus_endpoint(&load.records, &corpus);

    let tmp = tempfile::tempdir().unwrap();
    let replay_dir = tmp.path().join("replay");
    let run = |n: usize, client: ChatClient| {
        let mut cfg = RunConfig::new(
            fixtures.join("questions.jsonl"),
            PromptMode::GenFewShotCot,
            tmp.path().join(format!("run{n}")),
        );
        cfg.generation = GenerationConfig::new("scripted-fixture-model");
        cotcheck::harness::run_generative(&cfg, &client, &TrigramEmbedder::new()).unwrap()
    };

    let report1 = run(
        1,
        ChatClient::Record(Box::new(endpoint), ReplayStore::open(&replay_dir).unwrap()),
    );
    let report2 = run(2, ChatClient::Replay(ReplayStore::open(&replay_dir).unwrap()));
    let report3 = run(3, ChatClient::Replay(ReplayStore::open(&replay_dir).unwrap()));

    // Byte-identical reports across repeated runs.
    let bytes = |n: usize, f: &str| std::fs::read(tmp.path().join(format!("run{n}")).join(f)).unwrap();
    assert_eq!(bytes(1, "rows.jsonl"), bytes(2, "rows.jsonl"));
    assert_eq!(bytes(2, "rows.jsonl"), bytes(3, "rows.jsonl"));
    assert_eq!(bytes(1, "summary.json"), bytes(2, "summary.json"));
    assert_eq!(bytes(2, "summary.json"), bytes(3, "summary.json"));
    assert_eq!(report1.summary, report2.summary);
    assert_eq!(report2.summary, report3.summary);

    // Hand-evaluated expectations, one row per question.
    let expect: [(&str, &str, Option<VerdictLabel>, bool); 10] = [
        ("q01", "structured", Some(VerdictLabel::Faithful), true),
        ("q02", "structured", Some(VerdictLabel::CoherenceError), true),
        ("q03", "structured", Some(VerdictLabel::AnswerError), false),
        ("q04", "structured", Some(VerdictLabel::FactualError), false),
        ("q05", "structured", Some(VerdictLabel::Faithful), true),
        ("q06", "abstained", None, false),
        ("q07", "unstructured", None, false),
        ("q08", "structured", Some(VerdictLabel::AnswerError), false),
        ("q09", "structured", Some(VerdictLabel::FactualError), false),
        ("q10", "structured", Some(VerdictLabel::Faithful), true),
    ];
    assert_eq!(report1.rows.len(), 10);
    for ((qid, class, label, answer_ok), row) in expect.iter().zip(&report1.rows) {
        assert_eq!(&row.question_id, qid);
        assert_eq!(&row.response_class, class, "class for {qid}");
        assert_eq!(row.verdict.as_ref().map(|v| v.label), *label, "verdict for {qid}");
        assert_eq!(row.answer_correct, *answer_ok, "answer flag for {qid}");
    }

    // Hand-computed aggregates: FR 3, UR 5, A 1, U 1; answers 4/8.
    let s = &report1.summary;
    assert_eq!(s.questions, 10);
    assert_eq!(s.errored_questions, 0);
    assert_eq!(
        (s.counts.fr, s.counts.ur, s.counts.abstained, s.counts.unstructured),
        (3, 5, 1, 1)
    );
    assert_eq!((s.counts.correct, s.counts.incorrect), (4, 4));
    assert!((s.answer.precision - 0.5).abs() < 1e-9);
    assert!((s.answer.recall - 0.4).abs() < 1e-9);
    assert!((s.answer.f1 - 0.4 / 0.9).abs() < 1e-9);
    assert!((s.reasoning.precision - 0.375).abs() < 1e-9);
    assert!((s.reasoning.recall - 0.3).abs() < 1e-9);
    assert!((s.reasoning.f1 - 1.0 / 3.0).abs() < 1e-9);
    assert!((s.gap - (s.answer.f1 - s.reasoning.f1)).abs() < 1e-12);
    assert_eq!(
        (
            s.error_kinds.factual_error,
            s.error_kinds.coherence_error,
            s.error_kinds.answer_error
        ),
        (2, 1, 2)
    );

    // Alignments with a hand-derivable grounding, frozen; the two
    // hallucinated-step questions cross-checked against the oracles.
    let by_id = |qid: &str| -> &GenRow {
        report1.rows.iter().find(|r| r.question_id == qid).unwrap()
    };
    for (qid, edit, rate) in [
        ("q01", 0usize, 1.0f64),
        ("q02", 1, 0.5),
        ("q03", 1, 0.5),
        ("q05", 0, 1.0),
        ("q08", 0, 1.0),
        ("q10", 0, 1.0),
    ] {
        let a = by_id(qid).alignment.as_ref().unwrap();
        assert_eq!(a.edit_distance, edit, "edit for {qid}");
        assert!((a.match_rate - rate).abs() < 1e-9, "match rate for {qid}");
    }
    let provider = TrigramEmbedder::new();
    let mut combined = KnowledgeGraph::new();
    for q in &load.records {
        for t in q.subgraph.triples() {
            combined.insert(t.clone());
        }
    }
    let index = build_index(&combined, &provider, 32).unwrap();
    for (qid, steps) in [
        (
            "q04",
            vec![
                "The story of my life book.author.book_editions_published Helen Keller.".to_string(),
                "Helen Keller died in Connecticut, USA.".to_string(),
            ],
        ),
        (
            "q09",
            vec![
                "Cobalt Works organization.founded_by Ivo Marek.".to_string(),
                "Ivo Marek writes poetry about distant quasars and morning fog.".to_string(),
            ],
        ),
    ] {
        // Oracle grounding must agree with the pipeline's k=10 grounding,
        // and the row's alignment must equal the oracle edit distance.
        let oracle_triples: Vec<Triple> = steps
            .iter()
            .map(|s| brute_force_retrieve(s, &combined, &provider).unwrap().triple)
            .collect();
        let pipeline = construct_path(&steps, &index, &provider, 10).unwrap();
        assert_eq!(pipeline.triples(), oracle_triples, "grounding for {qid}");
        let record = load.records.iter().find(|q| q.id == qid).unwrap();
        let gts = extract_paths(record, 4).unwrap();
        let oracle_edit = gts
            .iter()
            .map(|gt| brute_force_edit(&oracle_triples, &gt.steps))
            .min()
            .unwrap();
        let a = by_id(qid).alignment.as_ref().unwrap();
        assert_eq!(a.edit_distance, oracle_edit, "alignment for {qid}");
    }
    println!("ACCEPTANCE 9 PASS: 10-question replay run is byte-stable and matches the hand-evaluated report");
}

#[test]
fn criterion_10_prompt_golden_files() {
    let question = "Who is the brother of Justin Bieber?";
    let answer = "Jaxon Bieber";
    let path = vec![
        Triple::from_labels("Justin Bieber", "child_of", "Jeremy Bieber"),
        Triple::from_labels("Jeremy Bieber", "father_of", "Jaxon Bieber"),
    ];
    let plan = PlanHint::new(vec![
        cotcheck::kg::Relation::new("child_of"),
        cotcheck::kg::Relation::new("father_of"),
    ]);
    for mode in PromptMode::ALL {
        let rendered = render_prompt(
            mode,
            question,
            mode.is_discriminative().then_some(answer),
            mode.is_discriminative().then_some(path.as_slice()),
            (mode == PromptMode::GenFewShotCotPlan).then_some(&plan),
        )
        .unwrap();
        let golden_path = fixture_dir("golden_prompts").join(format!("{}.txt", mode.name()));
        let golden = std::fs::read_to_string(&golden_path).unwrap();
        assert_eq!(
            rendered,
            golden,
            "rendering for {} diverges from {}",
            mode.name(),
            golden_path.display()
        );
    }
    println!("ACCEPTANCE 10 PASS: all six prompt renderings byte-match their golden files");
}
