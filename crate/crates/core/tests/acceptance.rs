//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed whether it passes or not.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ccbox::binding::subst_type_atom_in_type;
use ccbox::frontend::{atom_scope, check_source, parse, parse_with_scope, print_term};
use ccbox::testkit::oracle::rule_histogram;
use ccbox::testkit::{
    check_determinism, check_soundness, compare_subcapture_exhaustively, gen_well_typed_program, run_property,
    GenConfig, Property,
};
use ccbox::{subcapture, AtomSupply, CaptureSet, Rule, TermExpr, TypeExpr};

const FUEL: usize = 10_000;
const GENERATED: u64 = 500;

struct CorpusEntry {
    path: PathBuf,
    text: String,
    expect: String,
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn corpus() -> Vec<CorpusEntry> {
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "ccbox"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).expect("readable corpus file");
            let expect = text
                .lines()
                .next()
                .and_then(|l| l.strip_prefix("-- expect:"))
                .map(|s| s.trim().to_string())
                .unwrap_or_else(|| panic!("{} has no expect header", path.display()));
            CorpusEntry { path, text, expect }
        })
        .collect()
}

fn corpus_file(name: &str) -> String {
    fs::read_to_string(corpus_dir().join(name)).expect("corpus file")
}

/// Corpus programs expected to check, followed by the generated ones.
fn well_typed_programs(corpus: &[CorpusEntry]) -> Vec<(String, TermExpr)> {
    let mut out: Vec<(String, TermExpr)> = corpus
        .iter()
        .filter(|c| c.expect == "ok")
        .map(|c| {
            let (p, _) = check_source(&c.text).unwrap_or_else(|_| panic!("{} should check", c.path.display()));
            (c.path.file_name().unwrap().to_string_lossy().into_owned(), p.term)
        })
        .collect();
    let cfg = GenConfig::default();
    out.extend((0..GENERATED).map(|i| (format!("generated case {i}"), gen_well_typed_program(&cfg, i))));
    out
}

fn error_code(text: &str) -> Option<String> {
    match check_source(text) {
        Ok(_) => None,
        Err(ds) => ds.first().map(|d| d.code.to_string()),
    }
}

type Outcome = Result<String, String>;

struct SoundnessSummary {
    programs: usize,
    elapsed: Duration,
    preservation: Vec<String>,
    progress: Vec<String>,
    ill_typed: Vec<String>,
    histogram: std::collections::BTreeMap<Rule, usize>,
}

fn soundness(programs: &[(String, TermExpr)]) -> SoundnessSummary {
    let start = Instant::now();
    let mut out = SoundnessSummary {
        programs: programs.len(),
        elapsed: Duration::ZERO,
        preservation: Vec::new(),
        progress: Vec::new(),
        ill_typed: Vec::new(),
        histogram: rule_histogram([]),
    };
    let mut rules = Vec::new();
    for (name, e) in programs {
        let run = check_soundness(e, FUEL);
        if run.ill_typed_program {
            out.ill_typed.push(name.clone());
        }
        if let Some(r) = run.preservation {
            out.preservation.push(format!("{name}: {r}"));
        }
        if let Some(r) = run.progress {
            out.progress.push(format!("{name}: {r}"));
        }
        rules.extend(run.rules);
    }
    out.histogram = rule_histogram(&rules);
    out.elapsed = start.elapsed();
    out
}

fn preservation(s: &SoundnessSummary, generation: Duration) -> Outcome {
    let total = s.elapsed + generation;
    if !s.ill_typed.is_empty() {
        return Err(format!("ill-typed inputs: {}", s.ill_typed.join("; ")));
    }
    if !s.preservation.is_empty() {
        return Err(format!("{} violations, first: {}", s.preservation.len(), s.preservation[0]));
    }
    if total >= Duration::from_secs(60) {
        return Err(format!("took {:.1}s", total.as_secs_f64()));
    }
    Ok(format!("{} programs, every step preserved typing, {:.1}s", s.programs, total.as_secs_f64()))
}

fn progress(s: &SoundnessSummary) -> Outcome {
    if s.progress.is_empty() && s.ill_typed.is_empty() {
        Ok(format!("{} programs, no typed state was stuck", s.programs))
    } else {
        Err(format!("{} violations, first: {:?}", s.progress.len(), s.progress.first()))
    }
}

fn rule_coverage(s: &SoundnessSummary) -> Outcome {
    let counts: Vec<String> = s.histogram.iter().map(|(r, n)| format!("{r}={n}")).collect();
    if s.histogram.len() == Rule::ALL.len() && s.histogram.values().all(|&n| n >= 10) {
        Ok(counts.join(" "))
    } else {
        Err(format!("some rule fired fewer than 10 times: {}", counts.join(" ")))
    }
}

fn subcapture_oracle() -> Outcome {
    let start = Instant::now();
    let report = compare_subcapture_exhaustively(3, subcapture);
    let elapsed = start.elapsed();
    if let Some(d) = report.disagreements.first() {
        return Err(format!("{} disagreements, first: {d:?}", report.disagreements.len()));
    }
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    Ok(format!("{} cases agree, {:.2}s", report.cases, elapsed.as_secs_f64()))
}

fn property_count(p: Property, count: usize) -> Result<usize, String> {
    let cfg = GenConfig { count, ..GenConfig::default() };
    let report = run_property(p, &cfg);
    if let Some(cx) = &report.counterexample {
        return Err(format!("{}: {}\n{}", p.name(), cx.reason, cx.to_file()));
    }
    if report.passed < count {
        return Err(format!("{}: only {} of {count} cases met the precondition", p.name(), report.passed));
    }
    Ok(report.passed)
}

fn reflexivity_transitivity() -> Outcome {
    let refl = property_count(Property::SubtypeReflexivity, 1000)?;
    let trans = property_count(Property::SubtypeTransitivity, 1000)?;
    Ok(format!("{refl} reflexive types, {trans} transitive triples"))
}

fn purity() -> Outcome {
    let stable = property_count(Property::PurityStability, 1000)?;
    let mut supply = AtomSupply::new();
    let (x, c) = (supply.fresh_type(), supply.fresh_term());
    let capturing = TypeExpr::capt(CaptureSet::singleton(c), TypeExpr::Top);
    let substituted = subst_type_atom_in_type(&TypeExpr::FVar(x), x, &capturing);
    if substituted.is_pure() {
        return Err("substituting a capturing type for a variable gave a pure type".into());
    }
    Ok(format!("{stable} substitutions kept purity; a capturing instance is impure"))
}

fn universal_restriction() -> Outcome {
    let rejected = error_code(&corpus_file("universal_reject.ccbox"));
    let allowed = ["E_UNIVERSAL_INSTANTIATION", "E_IMPURE_TYPE_ARGUMENT"];
    if !rejected.as_deref().is_some_and(|c| allowed.contains(&c)) {
        return Err(format!("instantiating with a {{*}} type gave {rejected:?}"));
    }
    let unboxed = error_code(&corpus_file("unbox_universal.ccbox"));
    if unboxed.as_deref() != Some("E_UNIVERSAL_INSTANTIATION") {
        return Err(format!("unboxing under {{*}} gave {unboxed:?}"));
    }
    if let Some(code) = error_code(&corpus_file("universal_boxed.ccbox")) {
        return Err(format!("boxed instantiation rejected with {code}"));
    }
    Ok(format!("{{*}} argument rejected with {}, boxed argument accepted", rejected.unwrap()))
}

fn pair_tunneling() -> Outcome {
    if let Some(code) = error_code(&corpus_file("pair_tunnel.ccbox")) {
        return Err(format!("pair program rejected with {code}"));
    }
    let rejected = error_code(&corpus_file("pair_tunnel_reject.ccbox"));
    if rejected.as_deref() != Some("E_UNBOX_CAPTURE_MISMATCH") {
        return Err(format!("unboxing with the wrong capability gave {rejected:?}"));
    }
    // The pair itself captures nothing: both capabilities travel in boxes.
    let mk = "fun (c1 : {*} Top) => fun (c2 : {*} Top) =>
        let b1 = box c1 in
        let b2 = box c2 in
        tfun [R <: Top] => fun (k : {*} (x : box {c1} Top) -> (y : box {c2} Top) -> R) =>
          let k1 = k b1 in
          k1 b2";
    let (_, t) = check_source(mk).map_err(|ds| format!("pair constructor rejected: {}", ds[0].message))?;
    let mut r = &t;
    for _ in 0..2 {
        match r {
            TypeExpr::Capt(_, f) => match &**f {
                TypeExpr::Arrow(_, res) => r = res,
                other => return Err(format!("expected a function, got {other:?}")),
            },
            other => return Err(format!("expected a capturing function, got {other:?}")),
        }
    }
    match r {
        TypeExpr::Capt(c, inner) if c.is_empty() && matches!(**inner, TypeExpr::TAll(..)) => {
            Ok("first component unboxes under c1 only, the pair captures {}".into())
        }
        other => Err(format!("pair type is {other:?}")),
    }
}

fn determinism(programs: &[(String, TermExpr)]) -> Outcome {
    for (name, e) in programs {
        check_determinism(e, FUEL).map_err(|r| format!("{name}: {r}"))?;
    }
    Ok(format!("{} programs run alike under disjoint atom supplies", programs.len()))
}

fn round_trip(corpus: &[CorpusEntry]) -> Result<usize, String> {
    let mut n = 0;
    for c in corpus {
        let Ok(p) = parse(&c.text) else { continue };
        let printed = print_term(&p.term);
        let back = parse(&printed).map_err(|_| format!("{}: printed form does not parse", c.path.display()))?;
        if back.term != p.term {
            return Err(format!("{}: round trip changed the term", c.path.display()));
        }
        n += 1;
    }
    let cfg = GenConfig::default();
    for i in 0..1000 {
        let e = gen_well_typed_program(&cfg, 1_000_000 + i);
        let printed = print_term(&e);
        let back = parse_with_scope(&printed, &atom_scope(e.free_atoms()))
            .map_err(|_| format!("generated case {i} does not parse back:\n{printed}"))?;
        if back.term != e {
            return Err(format!("generated case {i} changed in the round trip:\n{printed}"));
        }
        n += 1;
    }
    Ok(n)
}

fn cli_matrix() -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).expect("temp file");
        p.to_string_lossy().into_owned()
    };
    let syntax = write("syntax.ccbox", "fun (x : {} Top =>");
    let unbound = write("unbound.ccbox", "fun (x : {} Top) => y");
    let missing = dir.path().join("absent.ccbox").to_string_lossy().into_owned();
    let out_dir = dir.path().join("failures").to_string_lossy().into_owned();
    let c = |name: &str| corpus_dir().join(name).to_string_lossy().into_owned();
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["check".into(), c("identity.ccbox")], 0),
        (vec!["check".into(), c("leak.ccbox")], 1),
        (vec!["check".into(), c("universal_reject.ccbox")], 1),
        (vec!["check".into(), syntax.clone()], 2),
        (vec!["check".into(), unbound], 2),
        (vec!["check".into(), missing], 2),
        (vec!["type".into(), c("poly_id.ccbox")], 0),
        (vec!["type".into(), c("unbox_mismatch.ccbox")], 1),
        (vec!["type".into(), syntax.clone()], 2),
        (vec!["eval".into(), c("selfapp.ccbox")], 0),
        (vec!["eval".into(), "--trace".into(), c("pair_tunnel.ccbox")], 0),
        (vec!["eval".into(), c("not_a_box.ccbox")], 1),
        (vec!["eval".into(), syntax], 2),
        (vec!["eval".into(), "--fuel".into(), "abc".into(), c("identity.ccbox")], 2),
        (vec!["fuzz".into(), "--count".into(), "5".into(), "--out".into(), out_dir], 0),
        (vec!["frobnicate".into()], 2),
        (vec![], 2),
    ];
    let bin = env!("CARGO_BIN_EXE_ccbox");
    for (args, want) in &cases {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let got = out.status.code();
        if got != Some(*want) {
            return Err(format!("ccbox {} exited with {got:?}, expected {want}", args.join(" ")));
        }
    }
    let traced = Command::new(bin)
        .args(["eval", "--trace", &c("selfapp.ccbox")])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&traced.stdout);
    let first = stdout.lines().next().unwrap_or("");
    if !(first.starts_with("step 1 [LET] ⟨") && first.ends_with('⟩')) {
        return Err(format!("unexpected trace line: {first}"));
    }
    Ok(cases.len())
}

fn parse_and_cli(corpus: &[CorpusEntry]) -> Outcome {
    let n = round_trip(corpus)?;
    let m = cli_matrix()?;
    Ok(format!("{n} programs round-trip, {m} CLI invocations exit as expected"))
}

fn main() {
    let corpus = corpus();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let start = Instant::now();
    let programs = well_typed_programs(&corpus);
    let generation = start.elapsed();
    let summary = soundness(&programs);

    let corpus_ok = if corpus.len() >= 15 {
        Ok(format!("{} programs", corpus.len()))
    } else {
        Err(format!("only {} programs", corpus.len()))
    };
    results.push(("corpus size", corpus_ok));
    results.push(("preservation", preservation(&summary, generation)));
    results.push(("progress", progress(&summary)));
    results.push(("every machine rule fires", rule_coverage(&summary)));
    results.push(("subcapture matches derivation search", subcapture_oracle()));
    results.push(("subtyping reflexive and transitive", reflexivity_transitivity()));
    results.push(("purity stable under substitution", purity()));
    results.push(("universal capability never instantiates", universal_restriction()));
    results.push(("capabilities tunnel through a pair", pair_tunneling()));
    results.push(("evaluation is deterministic", determinism(&programs)));
    results.push(("parse/print round trip and CLI exit codes", parse_and_cli(&corpus)));

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {i:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {i:>2} {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
