mod common;

use std::collections::HashMap;

use cascade_core::policies::{
    accent_phrase_stage, drive_stage, make_dictionary_transducer, run_stage, schedule_string, segment_by_attention,
    wait_k_schedule, Action, AttentionMatrix, BoundaryRules, ComputeModel, PassThrough, PolicyStage, TraceAction,
    UnknownTokens, WaitK,
};
use cascade_core::stream::{validate_stream, Channel, Clock, Token};
use common::{regular_texts, stream, tok, DelayedEcho, FixedOutput};
use proptest::prelude::*;

fn arb_segment(max_len: usize) -> impl Strategy<Value = Vec<(String, u64)>> {
    prop::collection::vec(
        (prop::sample::select(vec!["a", "b", "c", "d", "<m>"]), 0u64..300),
        0..max_len,
    )
    .prop_map(|v| v.into_iter().map(|(s, g)| (s.to_string(), g)).collect())
}

fn arb_table() -> impl Strategy<Value = HashMap<String, Vec<Token>>> {
    prop::collection::hash_map(
        prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from),
        prop::collection::vec(prop::sample::select(vec!["x", "y", "z"]).prop_map(tok), 0..3),
        0..3,
    )
}

fn trace_letters(trace: &[cascade_core::policies::TraceStep]) -> String {
    trace
        .iter()
        .filter_map(|s| match s.action {
            TraceAction::Read => Some('R'),
            TraceAction::Write => Some('W'),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn stage_follows_schedule(j in 1usize..9, i in 1usize..9, k in 1usize..11, gaps in prop::collection::vec(0u64..50, 9)) {
        let seg: Vec<(String, u64)> = (0..j).map(|n| (format!("s{n}"), gaps[n])).collect();
        let input = stream(Channel::Isr, &[seg]);
        let mut stage = PolicyStage::new(Channel::Imt, WaitK::new(k), FixedOutput::new(i), Clock::virtual_at(0), ComputeModel::default()).with_trace();
        let out = drive_stage(&mut stage, &input).unwrap();
        prop_assert_eq!(trace_letters(stage.trace()), schedule_string(&wait_k_schedule(j, i, k)));
        for step in stage.trace().iter().filter(|s| s.action == TraceAction::Write) {
            prop_assert!(step.n_read >= (step.n_written + k - 1).min(j));
        }
        prop_assert_eq!(regular_texts(&out).len(), i);
        prop_assert!(validate_stream(&out).is_empty());
    }

    #[test]
    fn outputs_are_valid_streams(segs in prop::collection::vec(arb_segment(8), 1..4), k in 1usize..6, table in arb_table(), stage_ms in 0u64..50, per_token_ms in 0u64..20) {
        let input = stream(Channel::Isr, &segs);
        let compute = ComputeModel { stage_ms, per_token_ms };
        let t = make_dictionary_transducer(table.clone(), UnknownTokens::Drop);
        let out = run_stage(WaitK::new(k), t, &input, Clock::virtual_at(0), compute).unwrap();
        prop_assert!(validate_stream(&out).is_empty(), "{:?}", validate_stream(&out));
        let t = make_dictionary_transducer(table, UnknownTokens::PassThrough);
        let out = run_stage(PassThrough::default(), t, &input, Clock::virtual_at(0), compute).unwrap();
        prop_assert!(validate_stream(&out).is_empty());
        for o in &out {
            let first_in = input.iter().find(|e| e.segment_id() == o.segment_id()).unwrap();
            prop_assert!(o.emit_ms >= first_in.emit_ms);
        }
    }

    #[test]
    fn wait_k_degenerates_to_batch(seg in arb_segment(10), extra in 0usize..4, table in arb_table()) {
        let j = seg.iter().filter(|(s, _)| s != "<m>").count();
        let k = j.max(1) + extra;
        let input = stream(Channel::Isr, &[seg]);
        let t = make_dictionary_transducer(table.clone(), UnknownTokens::PassThrough);
        let mut stage = PolicyStage::new(Channel::Imt, WaitK::new(k), t, Clock::virtual_at(0), ComputeModel::default()).with_trace();
        let out = drive_stage(&mut stage, &input).unwrap();
        let offline = make_dictionary_transducer(table, UnknownTokens::PassThrough);
        let src: Vec<Token> = input.iter().filter_map(|e| e.token().cloned()).filter(Token::is_regular).collect();
        let expected: Vec<String> = offline.map_all(&src).iter().map(|t| t.text().to_string()).collect();
        prop_assert_eq!(regular_texts(&out), expected);
        let letters = trace_letters(stage.trace());
        prop_assert!(!letters.contains("WR"), "write before the last read: {}", letters);
    }

    #[test]
    fn segments_are_isolated(segs in prop::collection::vec(arb_segment(8), 1..5), k in 1usize..5) {
        let joined = stream(Channel::Isr, &segs);
        let all = run_stage(WaitK::new(k), DelayedEcho::default(), &joined, Clock::virtual_at(0), ComputeModel::default()).unwrap();
        for (n, seg) in segs.iter().enumerate() {
            let alone = stream(Channel::Isr, std::slice::from_ref(seg));
            let alone_out = run_stage(WaitK::new(k), DelayedEcho::default(), &alone, Clock::virtual_at(0), ComputeModel::default()).unwrap();
            let part: Vec<_> = all.iter().filter(|e| e.segment_id() == n as u64).map(|e| e.payload.clone()).collect();
            let iso: Vec<_> = alone_out.iter().map(|e| e.payload.clone()).collect();
            prop_assert_eq!(part, iso);
        }
    }

    #[test]
    fn attention_depends_only_on_peaks(
        rows in prop::collection::vec(prop::collection::vec(1u32..100, 6), 1..8),
    ) {
        let norm = |r: &Vec<u32>| {
            let s: u32 = r.iter().sum();
            r.iter().map(|&x| x as f64 / s as f64).collect::<Vec<_>>()
        };
        let m = AttentionMatrix::new(rows.iter().map(norm).collect()).unwrap();
        let peaks: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let best = r.iter().enumerate().rev().max_by_key(|(_, &x)| x).unwrap().0;
                (0..r.len()).map(|c| if c == best { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        let b = segment_by_attention(&m);
        prop_assert_eq!(&b, &segment_by_attention(&AttentionMatrix::new(peaks).unwrap()));
        prop_assert!(b.cuts.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(b.cuts.iter().all(|&c| (1..6).contains(&c)));
        prop_assert!(b.token_segment.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
        prop_assert_eq!(b.ranges().iter().map(|r| r.len()).sum::<usize>(), 6);
        prop_assert_eq!(*b.token_segment.last().unwrap() + 1, b.n_segments());
    }

    #[test]
    fn phrases_conserve_tokens(words in prop::collection::vec(prop::sample::select(vec!["kore", "wa", "betsu", "no", "<m>"]), 0..12), pre in prop::collection::vec(prop::sample::select(vec!["kore", "betsu", "no"]), 0..3)) {
        let mut rules = BoundaryRules::new();
        for p in &pre {
            rules = rules.with_pre(p);
        }
        let mut timed: Vec<(Token, u64)> = words.iter().enumerate().map(|(i, w)| (tok(w), i as u64 * 10)).collect();
        timed.push((Token::end_seq(), words.len() as u64 * 10));
        let phrases = accent_phrase_stage(&timed, &rules);
        let flat: Vec<String> = phrases.iter().flat_map(|p| p.tokens.iter().map(|t| t.text().to_string())).collect();
        let regular: Vec<String> = words.iter().filter(|w| **w != "<m>").map(|w| w.to_string()).collect();
        prop_assert_eq!(&flat, &regular);
        let boundaries = regular.windows(2).filter(|w| rules.boundary_between(&tok(&w[0]), &tok(&w[1]))).count();
        prop_assert_eq!(phrases.len(), if regular.is_empty() { 0 } else { boundaries + 1 });
        prop_assert!(phrases.windows(2).all(|w| w[0].emit_ms <= w[1].emit_ms));
    }
}

#[test]
fn schedule_examples() {
    let s = |j, i, k| schedule_string(&wait_k_schedule(j, i, k));
    assert_eq!(s(3, 4, 2), "RRWRWWW");
    assert_eq!(s(3, 3, 5), "RRRWWW");
    assert_eq!(s(1, 1, 1), "RW");
    assert_eq!(wait_k_schedule(1, 1, 1), vec![Action::Read, Action::Write]);
}
