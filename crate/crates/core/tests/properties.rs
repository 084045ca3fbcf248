use std::fs;
use std::path::Path;

use proptest::prelude::*;

use ccbox::frontend::{atom_scope, check_source, parse, parse_type, print_type};
use ccbox::testkit::{compare_subcapture_exhaustively, Choices, Gen, GenConfig};
use ccbox::{cv, infer_type, subcapture, subtype, CaptureSet, Env};

fn gen_for(seed: u64) -> Gen {
    Gen::new(GenConfig::default(), Choices::random(seed, 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parser_never_panics(text in "[a-z(){}\\[\\]:<=>*,. -]{0,60}") {
        let _ = parse(&text);
    }

    #[test]
    fn printed_types_parse_back(seed in any::<u64>()) {
        let mut gen = gen_for(seed);
        let g = gen.env();
        let t = gen.wf_type(&g, 4);
        let back = parse_type(&print_type(&t), &atom_scope(g.all_atoms()));
        prop_assert_eq!(back.ok(), Some(t));
    }

    #[test]
    fn subset_implies_subcapture(seed in any::<u64>()) {
        let mut gen = gen_for(seed);
        let g = gen.env();
        let c1 = gen.capture_set(&g);
        let c2 = gen.capture_set(&g);
        let union = c1.union(&c2);
        prop_assert!(subcapture(&g, &c1, &union));
        prop_assert!(subcapture(&g, &c2, &union));
        prop_assert!(subcapture(&g, &CaptureSet::empty(), &c1));
    }

    #[test]
    fn typing_survives_unrelated_bindings(seed in any::<u64>()) {
        let mut gen = gen_for(seed);
        let (e, goal) = gen.well_typed_program();
        let g = gen.env();
        let alone = infer_type(&Env::new(), &e).expect("generated programs are well typed");
        prop_assert!(subtype(&Env::new(), &alone, &goal));
        let weakened = infer_type(&g, &e).expect("typing survives weakening");
        prop_assert_eq!(alone, weakened);
    }

    #[test]
    fn closed_programs_capture_nothing_free(seed in any::<u64>()) {
        let (e, _) = gen_for(seed).well_typed_program();
        prop_assert!(cv(&e).frees.is_empty());
    }
}

/// Subcapturing that forgets to expand variables through their declared
/// capture sets. The exhaustive comparison must notice.
fn membership_only(_g: &Env, c1: &CaptureSet, c2: &CaptureSet) -> bool {
    (!c1.universal || c2.universal) && c1.frees.iter().all(|x| c2.contains(*x))
}

#[test]
fn exhaustive_comparison_catches_a_missing_rule() {
    let report = compare_subcapture_exhaustively(2, membership_only);
    assert!(!report.disagreements.is_empty());
    let d = &report.disagreements[0];
    assert!(d.declarative && !d.algorithmic);
}

#[test]
fn exhaustive_comparison_agrees_with_the_checker() {
    let report = compare_subcapture_exhaustively(3, subcapture);
    assert!(report.disagreements.is_empty(), "{:?}", report.disagreements.first());
}

#[test]
fn corpus_matches_expectations() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let expect = text.lines().next().and_then(|l| l.strip_prefix("-- expect:")).unwrap().trim();
        let got = match check_source(&text) {
            Ok(_) => "ok".to_string(),
            Err(ds) => ds[0].code.to_string(),
        };
        assert_eq!(got, expect, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 15);
}
