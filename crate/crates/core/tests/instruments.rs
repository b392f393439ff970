use std::collections::BTreeSet;

use artlab_core::algolang::{parse_named, samples, Direction, InputDomain, TraceMetric, Value};
use artlab_core::instruments::{
    generate_key, grade, grade_sheet, parse_bank, parse_key_file, parse_responses,
    render_key_file, AnswerKey, DiagnosticKind, InstrumentError, KeyAnswer, ObjectiveMark,
    Payload, Question, QuestionKind, Response, SoloLevel,
};
use artlab_core::SAMPLE_BANK;
use proptest::prelude::*;

const LIMIT: u64 = 100_000;

fn program(name: &str, src: &str) -> artlab_core::algolang::Program {
    parse_named(name, src).unwrap()
}

fn detection_reverse() -> Question {
    let inputs: Vec<Vec<i64>> = (0..6)
        .map(|k| (0..7).map(|i| (i * 3 + k * 5) % 10).collect())
        .collect();
    Question {
        id: "det".into(),
        solo: SoloLevel::Relational,
        payload: Payload::Detection {
            program: program("reverse", samples::REVERSE_IN_PLACE),
            inputs,
        },
        line: 0,
    }
}

fn comparison_max() -> Question {
    Question {
        id: "cmp".into(),
        solo: SoloLevel::Relational,
        payload: Payload::Comparison {
            candidates: vec![
                program("lr", samples::FIND_MAX_LEFT_TO_RIGHT),
                program("rl", samples::FIND_MAX_RIGHT_TO_LEFT),
                program("min", samples::FIND_MIN),
            ],
            domain: InputDomain::new(1, 4, 0, 3).unwrap(),
        },
        line: 0,
    }
}

fn analysis_search(options: Vec<Vec<i64>>) -> Question {
    Question {
        id: "ana".into(),
        solo: SoloLevel::Relational,
        payload: Payload::Analysis {
            program: program("search", samples::LINEAR_SEARCH_ZERO),
            domain: InputDomain::new(4, 4, 0, 2).unwrap(),
            metric: TraceMetric::Comparisons,
            direction: Direction::Best,
            options,
        },
        line: 0,
    }
}

fn detection_answer(values: &[Value]) -> String {
    values.iter().map(Value::to_string).collect::<Vec<_>>().join("; ")
}

#[test]
fn detection_key_is_the_reversed_inputs() {
    let q = detection_reverse();
    let key = generate_key(&q, LIMIT).unwrap();
    let Payload::Detection { inputs, .. } = &q.payload else { unreachable!() };
    let expected: Vec<Value> = inputs
        .iter()
        .map(|i| {
            let mut r = i.clone();
            r.reverse();
            Value::Array(r)
        })
        .collect();
    assert_eq!(key.answer, KeyAnswer::Detection(expected));
}

#[test]
fn comparison_key_partitions_candidates() {
    let key = generate_key(&comparison_max(), LIMIT).unwrap();
    assert_eq!(
        key.answer,
        KeyAnswer::Comparison {
            partition: vec![vec![0, 1], vec![2]]
        }
    );
    assert_eq!(key.comparison_selection(), Some(BTreeSet::from([1])));
}

#[test]
fn analysis_key_picks_target_at_front() {
    let q = analysis_search(vec![vec![0, 1, 2, 1], vec![1, 2, 1, 0], vec![1, 2, 1, 1]]);
    let key = generate_key(&q, LIMIT).unwrap();
    assert_eq!(key.answer, KeyAnswer::Analysis(0));
}

#[test]
fn tied_options_are_an_authoring_error() {
    let q = analysis_search(vec![vec![0, 1, 2, 1], vec![0, 2, 2, 2]]);
    assert!(matches!(
        generate_key(&q, LIMIT),
        Err(InstrumentError::AmbiguousKey { ref options, value: 1, .. }) if options == &["A", "B"]
    ));
    let q = analysis_search(vec![vec![1, 1, 1, 1]]);
    assert!(matches!(generate_key(&q, LIMIT), Err(InstrumentError::NoCorrectOption { .. })));
}

#[test]
fn detection_all_or_nothing() {
    let q = detection_reverse();
    let key = generate_key(&q, LIMIT).unwrap();
    let KeyAnswer::Detection(expected) = &key.answer else { unreachable!() };
    let all_right = Response::new("s1", "det", &detection_answer(expected));
    assert_eq!(grade(&q, &key, &all_right).unwrap().mark, ObjectiveMark::ONE);

    let mut five_of_six = expected.clone();
    five_of_six[3] = Value::Array(vec![0; 7]);
    let partial = Response::new("s1", "det", &detection_answer(&five_of_six));
    assert_eq!(grade(&q, &key, &partial).unwrap().mark, ObjectiveMark::ZERO);

    let too_few = Response::new("s1", "det", &detection_answer(&expected[..5]));
    assert_eq!(grade(&q, &key, &too_few).unwrap().mark, ObjectiveMark::ZERO);
}

#[test]
fn detection_formatting_is_not_penalised() {
    let q = detection_reverse();
    let key = generate_key(&q, LIMIT).unwrap();
    let KeyAnswer::Detection(expected) = &key.answer else { unreachable!() };
    let spaced: Vec<String> = expected
        .iter()
        .map(|v| match v {
            Value::Array(items) => format!(
                "  [ {} ] ",
                items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" , ")
            ),
            other => other.to_string(),
        })
        .collect();
    let r = Response::new("s", "det", &spaced.join(";"));
    assert_eq!(grade(&q, &key, &r).unwrap().mark, ObjectiveMark::ONE);
}

#[test]
fn comparison_grading_uses_set_semantics() {
    let q = comparison_max();
    let key = generate_key(&q, LIMIT).unwrap();
    let mark = |answer: &str| grade(&q, &key, &Response::new("s", "cmp", answer)).unwrap();
    assert_eq!(mark("1").mark, ObjectiveMark::ONE);
    assert_eq!(mark("{1}").mark, ObjectiveMark::ONE);
    assert_eq!(mark("").mark, ObjectiveMark::ZERO);
    assert_eq!(mark("1 2").mark, ObjectiveMark::ZERO);
    assert_eq!(mark("2").mark, ObjectiveMark::ZERO);
    let bad = mark("x");
    assert_eq!(bad.mark, ObjectiveMark::ZERO);
    assert!(bad.malformed.is_some());
    assert!(mark("7").malformed.is_some());
}

#[test]
fn analysis_and_tracing_need_exact_match() {
    let q = analysis_search(vec![vec![0, 1, 2, 1], vec![1, 2, 1, 0]]);
    let key = generate_key(&q, LIMIT).unwrap();
    let mark = |answer: &str| grade(&q, &key, &Response::new("s", "ana", answer)).unwrap();
    assert_eq!(mark("A").mark, ObjectiveMark::ONE);
    assert_eq!(mark("a").mark, ObjectiveMark::ONE);
    assert_eq!(mark("0").mark, ObjectiveMark::ONE);
    assert_eq!(mark("B").mark, ObjectiveMark::ZERO);
    assert!(mark("Z").malformed.is_some());

    let t = Question {
        id: "tr".into(),
        solo: SoloLevel::MultiLevel,
        payload: Payload::Tracing {
            program: program("sum", samples::SUM),
            input: vec![3, 1, 4],
        },
        line: 0,
    };
    let key = generate_key(&t, LIMIT).unwrap();
    assert_eq!(key.answer, KeyAnswer::Tracing(Value::Int(8)));
    assert_eq!(grade(&t, &key, &Response::new("s", "tr", " 8 ")).unwrap().mark, ObjectiveMark::ONE);
    assert_eq!(grade(&t, &key, &Response::new("s", "tr", "9")).unwrap().mark, ObjectiveMark::ZERO);
    let malformed = grade(&t, &key, &Response::new("s", "tr", "eight")).unwrap();
    assert_eq!(malformed.mark, ObjectiveMark::ZERO);
    assert!(malformed.malformed.is_some());
}

#[test]
fn grading_against_the_wrong_key_is_refused() {
    let q = comparison_max();
    let other = AnswerKey {
        question_id: "cmp".into(),
        answer: KeyAnswer::Analysis(0),
    };
    assert!(grade(&q, &other, &Response::new("s", "cmp", "1")).is_err());
}

proptest! {
    #[test]
    fn comparison_order_does_not_matter(perm in Just(vec![1usize, 2]).prop_shuffle(), sep in prop::sample::select(vec![" ", ",", ";"])) {
        let q = comparison_max();
        let key = generate_key(&q, LIMIT).unwrap();
        let forward = grade(&q, &key, &Response::new("s", "cmp", "1 2")).unwrap();
        let text = perm.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep);
        let shuffled = grade(&q, &key, &Response::new("s", "cmp", &text)).unwrap();
        prop_assert_eq!(forward, shuffled);
    }
}

#[test]
fn sample_bank_parses_and_keys() {
    let bank = parse_bank(SAMPLE_BANK).unwrap();
    assert_eq!(bank.questions.len(), 12);
    assert!(bank.check().is_empty(), "{:?}", bank.check());
    let kinds = bank.kinds();
    let count = |k| kinds.iter().filter(|&&x| x == k).count();
    for kind in QuestionKind::ALL {
        assert_eq!(count(kind), 3, "{kind}");
    }
    let keyed = bank.keyed().unwrap();
    let keys: Vec<AnswerKey> = keyed.iter().map(|(_, k)| k.clone()).collect();
    let by_id = |id: &str| keys.iter().find(|k| k.question_id == id).unwrap().answer.clone();
    assert_eq!(by_id("q01"), KeyAnswer::Tracing(Value::Int(8)));
    assert_eq!(by_id("q02"), KeyAnswer::Tracing(Value::Int(3)));
    assert_eq!(by_id("q03"), KeyAnswer::Tracing(Value::Int(9)));
    assert_eq!(by_id("q07"), KeyAnswer::Comparison { partition: vec![vec![0, 1], vec![2]] });
    assert_eq!(
        by_id("q08"),
        KeyAnswer::Comparison { partition: vec![vec![0, 2], vec![1], vec![3]] }
    );
    assert_eq!(
        by_id("q09"),
        KeyAnswer::Comparison { partition: vec![vec![0, 2], vec![1], vec![3]] }
    );
    assert_eq!(by_id("q10"), KeyAnswer::Analysis(0));
    assert_eq!(by_id("q11"), KeyAnswer::Analysis(2));
    assert_eq!(by_id("q12"), KeyAnswer::Analysis(1));

    // Keys are reproducible byte for byte and survive a text round trip.
    let text = render_key_file(&keys);
    let again: Vec<AnswerKey> = bank.keyed().unwrap().into_iter().map(|(_, k)| k).collect();
    assert_eq!(render_key_file(&again), text);
    assert_eq!(parse_key_file(&text).unwrap(), keys);
}

#[test]
fn bank_errors_are_line_addressed() {
    let broken = "[question]\nid = q1\nkind = tracing\ninput = [1]\n---\nset x to\nreturn x\n---\n";
    match parse_bank(broken) {
        Err(InstrumentError::Bank { line, .. }) => assert_eq!(line, 7),
        other => panic!("unexpected {other:?}"),
    }
    let unclosed = "[question]\nid = q1\nkind = tracing\ninput = [1]\n---\nreturn 1\n";
    assert!(matches!(parse_bank(unclosed), Err(InstrumentError::Bank { line: 5, .. })));
    let dup = "[question]\nid = q1\nkind = tracing\ninput = [1]\n---\nreturn 1\n---\n[question]\nid = q1\nkind = tracing\ninput = [1]\n---\nreturn 1\n---\n";
    assert!(matches!(parse_bank(dup), Err(InstrumentError::Bank { line: 8, .. })));
    assert!(parse_bank("[question]\nid = q1\nkind = puzzle\n").is_err());
}

#[test]
fn detection_shape_rules_are_configurable() {
    let text = "[question]\nid = d\nkind = detection\ninputs = [1,2,3]\n---\nreturn input\n---\n";
    let bank = parse_bank(text).unwrap();
    assert_eq!(bank.check().len(), 1);
    let relaxed = format!("[bank]\ndetection_min_inputs = 1\ndetection_min_length = 3\n{text}");
    let bank = parse_bank(&relaxed).unwrap();
    assert!(bank.check().is_empty());
}

#[test]
fn constant_trace_analysis_is_ambiguous() {
    let text = "[question]\nid = a\nkind = analysis\ndomain = len:1..2,val:0..1\nmetric = comparisons\ndirection = worst\noptions =\n[0]\n[1,1]\n---\nreturn 0\n---\n";
    let bank = parse_bank(text).unwrap();
    let problems = bank.check();
    assert!(matches!(problems.as_slice(), [InstrumentError::AmbiguousKey { .. }]), "{problems:?}");
}

#[test]
fn analysis_options_must_be_distinct_and_in_domain() {
    let q = analysis_search(vec![vec![0, 1, 2, 1], vec![0, 1, 2, 1]]);
    assert!(q.validate(&Default::default()).is_err());
    let q = analysis_search(vec![vec![0, 1, 2, 9]]);
    assert!(q.validate(&Default::default()).is_err());
    let q = analysis_search(vec![]);
    assert!(q.validate(&Default::default()).is_err());
}

/// Answers for the 12-question sample bank, all correct.
fn correct_answers() -> Vec<(&'static str, &'static str)> {
    vec![
        ("q01", "8"),
        ("q02", "3"),
        ("q03", "9"),
        ("q04", "[2,9,5,1,4,1,3];[1,8,2,8,1,7,2];[3,4,5,6,7,8,9];[13,8,5,3,2,1,1];[0,0,0,1,0,0,0];[3,8,3,3,4,6,2,6]"),
        ("q05", "[1,4,2,5,0,2,8];[1,2,3,4,5,6,7];[6,5,4,3,2,1,7];[3,1,3,3,1,3,3];[1,9,1,9,1,9,1,9];[4,2,6,0,7,5,8]"),
        ("q06", "[7,9,5];[3,2,1];[];[3];[10,6,7];[2,3,4,5,6,7,8]"),
        ("q07", "1"),
        ("q08", "2"),
        ("q09", "2"),
        ("q10", "A"),
        ("q11", "C"),
        ("q12", "B"),
    ]
}

#[test]
fn hand_graded_three_student_fixture() {
    let bank = parse_bank(SAMPLE_BANK).unwrap().keyed().unwrap();
    let mut rows = String::from("student_id,question_id,answer_text\n");
    // s1: everything right.
    for (q, a) in correct_answers() {
        rows.push_str(&format!("s1,{q},{a}\n"));
    }
    // s2: tracing right, q04 with one wrong output, q07 over-selects,
    // q10 wrong option, omits q12, malformed q02.
    for (q, a) in correct_answers() {
        let a = match q {
            "q02" => "three",
            "q04" => "[2,9,5,1,4,1,3];[1,8,2,8,1,7,2];[3,4,5,6,7,8,9];[13,8,5,3,2,1,1];[0,0,0,1,0,0,0];[3,8,3,3,4,6,2,0]",
            "q07" => "1 2",
            "q10" => "B",
            "q12" => continue,
            _ => a,
        };
        rows.push_str(&format!("s2,{q},{a}\n"));
    }
    // s3: only q08 and q09, answered in reverse order, q09 with the full set.
    rows.push_str("s3,q09,\"{2}\"\n");
    rows.push_str("s3,q08,2\n");

    let responses = parse_responses(&rows).unwrap();
    let sheet = grade_sheet(&bank, &responses).unwrap();
    let marks: Vec<(String, Vec<u8>)> = sheet
        .rows
        .iter()
        .map(|r| (r.student_id.clone(), r.marks.iter().map(|m| m.value()).collect()))
        .collect();
    assert_eq!(
        marks,
        vec![
            ("s1".to_string(), vec![1; 12]),
            ("s2".to_string(), vec![1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0]),
            ("s3".to_string(), vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0]),
        ]
    );
    let s2: Vec<_> = sheet.diagnostics.iter().filter(|d| d.student_id == "s2").collect();
    assert_eq!(s2.len(), 2);
    assert!(s2.iter().any(|d| d.question_id == "q02" && matches!(d.kind, DiagnosticKind::Malformed(_))));
    assert!(s2.iter().any(|d| d.question_id == "q12" && d.kind == DiagnosticKind::Missing));
    assert_eq!(sheet.diagnostics.iter().filter(|d| d.student_id == "s3").count(), 10);

    // Row order does not change the result.
    let mut reversed = responses.clone();
    reversed.reverse();
    assert_eq!(grade_sheet(&bank, &reversed).unwrap().rows, sheet.rows);
}

#[test]
fn sheet_errors() {
    let bank = parse_bank(SAMPLE_BANK).unwrap().keyed().unwrap();
    let dup = parse_responses("s1,q01,8\ns1,q02,3\ns1,q01,7\n").unwrap();
    assert!(matches!(
        grade_sheet(&bank, &dup),
        Err(InstrumentError::DuplicateResponse { first: 1, second: 3, .. })
    ));
    let unknown = parse_responses("s1,q99,8\n").unwrap();
    assert!(matches!(
        grade_sheet(&bank, &unknown),
        Err(InstrumentError::UnknownQuestion { line: 1, .. })
    ));
    let empty = grade_sheet(&bank, &[]).unwrap();
    assert!(empty.rows.is_empty());
    assert!(parse_responses("only-one-field\n").is_err());
}
