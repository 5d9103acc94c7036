//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use common::*;
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use scasp::ast::Program;
use scasp::interp::Solver;
use scasp::output;
use scasp::parser::{parse_dump, parse_program};
use scasp::store::StoreView;
use scasp::term::Term;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn secs(start: Instant) -> String {
    format!("{:.3} s", start.elapsed().as_secs_f64())
}

fn stream_reasoner() -> Outcome {
    let start = Instant::now();
    let (_, found) = embedded_answers(&read_program("stream.pl"), usize::MAX);
    within(start, Duration::from_secs(5), "stream")?;
    let got: Vec<Vec<String>> = found.iter().map(binding_lines).collect();
    let expected = vec![
        vec!["Pr = 1", "Data = p({A.\\=.[a,b]})"],
        vec!["Pr = 2", "Data = q(b)"],
        vec!["Pr = 3", "Data = p(a)"],
    ];
    ensure(got == expected, || format!("answers {got:?}"))?;
    Ok(format!("3 answers in {}", secs(start)))
}

fn yale_shooting() -> Outcome {
    let start = Instant::now();
    let (_, found) = embedded_answers(&read_program("yale.pl"), usize::MAX);
    within(start, Duration::from_secs(30), "yale")?;
    let got: Vec<Vec<String>> = found.iter().map(binding_lines).collect();
    let expected: BTreeSet<Vec<String>> = [
        ("55", "[shoot,load,load]"),
        ("66", "[shoot,load,wait]"),
        ("80", "[shoot,load,load,load]"),
        ("91", "[shoot,load,load,wait]"),
        ("91", "[shoot,load,wait,load]"),
        ("96", "[shoot,load,shoot,wait,load]"),
    ]
    .iter()
    .map(|(t, a)| vec![format!("T = {t}"), format!("Actions = {a}")])
    .collect();
    ensure(got.len() == 6, || format!("{} answers: {got:?}", got.len()))?;
    let set: BTreeSet<Vec<String>> = got.iter().cloned().collect();
    ensure(set == expected, || format!("answers {got:?}"))?;
    let order: Vec<&str> = got.iter().map(|b| b[0].trim_start_matches("T = ")).collect();
    Ok(format!("6 answers in {}, order T = {}", secs(start), order.join(", ")))
}

fn tsp_variant() -> Outcome {
    let start = Instant::now();
    let (cp, found) = embedded_answers(&read_program("tsp.pl"), usize::MAX);
    within(start, Duration::from_secs(60), "tsp")?;
    let target = vec!["D = 61/10".to_string(), "Cycle = [b,[31/10],c,[1],a,[1],d,[1],b]".to_string()];
    let hit = found.iter().find(|a| binding_lines(a) == target);
    let hit = hit.ok_or_else(|| format!("answers {:?}", found.iter().map(binding_lines).collect::<Vec<_>>()))?;
    let model = output::model(&cp, hit);
    let golden = "distance(c,d,{A.>.8, A.<.21/2})";
    ensure(model.iter().any(|m| m == golden), || format!("model lacks {golden}: {model:?}"))?;
    Ok(format!("found in {}", secs(start)))
}

fn towers_of_hanoi() -> Outcome {
    let src = read_program("hanoi.pl");
    let cp = compile_src(&src);
    let start = Instant::now();
    let first = answers(&cp, "?- hanoi(7,T).", 1);
    let a = first.first().ok_or("hanoi(7,T) has no answer")?;
    ensure(binding_lines(a) == ["T = 127"], || format!("bindings {:?}", binding_lines(a)))?;
    let moves: Vec<String> = output::model(&cp, a).into_iter().filter(|m| m.starts_with("move(")).collect();
    let golden: Vec<String> = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/hanoi7_moves.txt"))
        .map_err(|e| e.to_string())?
        .lines()
        .map(str::to_string)
        .collect();
    ensure(moves.len() == 127, || format!("{} move atoms", moves.len()))?;
    let got: BTreeSet<&String> = moves.iter().collect();
    let want: BTreeSet<&String> = golden.iter().collect();
    ensure(got == want, || format!("moves differ: {:?}", got.symmetric_difference(&want).collect::<Vec<_>>()))?;
    let mut report = Vec::new();
    for n in 3..=9u32 {
        let start = Instant::now();
        let found = answers(&cp, &format!("?- hanoi({n},T)."), 1);
        let a = found.first().ok_or_else(|| format!("hanoi({n},T) has no answer"))?;
        let want = format!("T = {}", (1u64 << n) - 1);
        ensure(binding_lines(a) == [want.clone()], || format!("n={n}: {:?}", binding_lines(a)))?;
        if n == 9 {
            within(start, Duration::from_secs(120), "hanoi n=9")?;
            report.push(format!("n=9 in {}", secs(start)));
        }
    }
    Ok(format!("127 moves match, T = 2^n-1 for n=3..9, {}, total {}", report.join(""), secs(start)))
}

fn example_one() -> Outcome {
    let base = "married(john).\n:- not married(X).\n";
    let cp = compile_src(base);
    for q in ["?- married(john).", "?- married(X).", "?- not married(bob)."] {
        ensure(answers(&cp, q, 1).is_empty(), || format!("{q} has an answer without married(X)"))?;
    }
    let cp = compile_src(&format!("{base}married(X).\n"));
    let found = answers(&cp, "?- married(X).", 10);
    let open = found.iter().find(|a| {
        let model = a.model(&cp);
        match model.as_slice() {
            [Term::Compound(f, args)] if &**f == "married" => match &args[0] {
                Term::Var(v) => a.store_of(*v) == StoreView::Top,
                _ => false,
            },
            _ => false,
        }
    });
    ensure(open.is_some(), || {
        format!("no answer with model {{married(X)}}: {:?}", found.iter().map(|a| output::model(&cp, a)).collect::<Vec<_>>())
    })?;
    Ok(format!("{} answers with the open fact, one has model [ married(X) ]", found.len()))
}

/// A rule printed with variables named by first occurrence and generated
/// predicate names mapped to `p1`, `p2_` style.
fn canonical_rules(text: &str) -> Result<Vec<String>, String> {
    let text = rename_generated(text);
    let p: Program = parse_dump(&text).map_err(|e| e.to_string())?;
    Ok(p.rules
        .into_iter()
        .map(|mut r| {
            r.var_names = (0..r.var_names.len()).map(|i| format!("V{i}")).collect();
            r.to_string()
        })
        .collect())
}

fn rename_generated(text: &str) -> String {
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find("__") {
        out.push_str(&rest[..i]);
        rest = &rest[i + 2..];
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        out.push_str(&digits);
        rest = &rest[digits.len()..];
        if let Some(r) = rest.strip_prefix("_body") {
            out.push('_');
            rest = r;
        }
    }
    out.push_str(rest);
    out
}

fn dual_golden() -> Outcome {
    let cp = compile_src("p(0).\np(X) :- q(X), not t(X,Y).\nq(1).\nt(1,2).\n");
    let dump = cp.dump();
    let duals: String = dump.lines().filter(|l| l.starts_with("not ")).map(|l| format!("{l}\n")).collect();
    let got = canonical_rules(&duals)?;
    let want = canonical_rules(
        "not p(X) :- not p1(X), not p2(X).
         not p1(X) :- X\\=0.
         not p2(X) :- forall(Y, not p2_(X,Y)).
         not p2_(X,Y) :- not q(X).
         not p2_(X,Y) :- q(X), t(X,Y).
         not q(X) :- not q1(X).
         not q1(X) :- X\\=1.
         not t(X,Y) :- not t1(X,Y).
         not t1(X,Y) :- X\\=1.
         not t1(X,Y) :- X=1, Y\\=2.",
    )?;
    ensure(got == want, || format!("duals\n{}\nexpected\n{}", got.join("\n"), want.join("\n")))?;
    Ok("10 dual clauses match".into())
}

fn forall_examples() -> Outcome {
    let cp = compile_src("p :- not q(X).\nq(X) :- X=a.\nq(X) :- X\\=a.\n");
    let found = answers(&cp, "?- not p.", 1);
    let a = found.first().ok_or("?- not p has no answer")?;
    ensure(binding_lines(a).is_empty(), || format!("bindings {:?}", binding_lines(a)))?;

    let cp = compile_src("p(X) :- X.>=.0, X.=<.5.\np(X) :- X.>.1.\np(X) :- X.<.3.\np(X) :- X.<.1.\n");
    let found = answers(&cp, "?- forall(A,p(A)).", 1);
    let a = found.first().ok_or("forall(A,p(A)) has no answer")?;
    let tree = output::justification(a);
    for piece in ["p({C.<.0}) :-", "p({D.>.5}) :-"] {
        ensure(tree.contains(piece), || format!("no iteration {piece} in\n{tree}"))?;
    }

    let cp = compile_src("p(X) :- X.<.3.\n");
    ensure(answers(&cp, "?- forall(X,p(X)).", 1).is_empty(), || "forall(X,p(X)) succeeded for X<3".into())?;
    Ok("not p holds, narrowing visits X<0 and X>5, X<3 fails".into())
}

fn nmr_example() -> Outcome {
    let src = ":- not s(1,X).\np(X) :- q(X), not p(X).\n";
    let cp = compile_src(src);
    let nmr: String = cp
        .dump()
        .lines()
        .filter(|l| l.starts_with("nmr_check") || l.starts_with("chk_"))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut got = canonical_rules(&nmr)?;
    got.sort();
    let mut want = canonical_rules(
        "nmr_check :- chk_1, forall(A,chk_2(A)).
         chk_1 :- forall(X,s(1,X)).
         chk_2(X) :- not q(X).
         chk_2(X) :- q(X), p(X).",
    )?;
    want.sort();
    ensure(got == want, || format!("checks\n{}\nexpected\n{}", got.join("\n"), want.join("\n")))?;
    let cp = compile_src(&format!("{src}s(1,a).\n"));
    ensure(answers(&cp, "?- s(1,a).", 1).is_empty(), || "s(1,a) accepted although s(1,X) fails for X=b".into())?;
    let cp = compile_src(&format!("{src}s(1,X).\n"));
    ensure(!answers(&cp, "?- s(1,b).", 1).is_empty(), || "s(1,b) rejected although s(1,X) holds for all X".into())?;
    Ok("chk_1/chk_2/nmr_check structure matches, violation rejected".into())
}

fn run_suite<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Result<(), String>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, |v| check(v).map_err(TestCaseError::fail)).map_err(|e| e.to_string())
}

fn property_suites() -> Outcome {
    use proptest::prelude::*;
    run_suite(60, ground_programs(), |spec| check_oracle_agreement(&spec)).map_err(|e| format!("oracle: {e}"))?;
    run_suite(200, (stores(), lin_constraints(), any::<u64>()), |(s, c, seed)| {
        check_store_complement(&s, seed)?;
        check_constraint_complement(&c, seed)
    })
    .map_err(|e| format!("complement: {e}"))?;
    run_suite(100, linear_cases(), |case| check_projection(&case)).map_err(|e| format!("projection: {e}"))?;
    run_suite(200, (small_terms(true), small_terms(false)), |(s, t)| check_diseq_exhaustive(&s, &t))
        .map_err(|e| format!("disequality: {e}"))?;
    Ok("oracle 60, complement 200, projection 100, disequality 200 cases".into())
}

fn loops() -> Outcome {
    let cp = compile_src("p(X) :- not q(X).\nq(X) :- not p(X).\nq(b).\n");
    ensure(!answers(&cp, "?- p(a).", 1).is_empty(), || "p(a) failed".into())?;
    ensure(answers(&cp, "?- p(b).", 1).is_empty(), || "p(b) succeeded".into())?;

    let src = "p :- q(a), not p.\nq(a).\n";
    let gp = scasp::oracle::ground(&parse_program(src).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(scasp::oracle::stable_models(&gp).is_empty(), || "oracle found a model".into())?;
    let cp = compile_src(src);
    for q in ["?- q(a).", "?- p.", "?- not p."] {
        ensure(answers(&cp, q, 1).is_empty(), || format!("{q} has an answer"))?;
    }

    let cp = compile_src("nat(0).\nnat(X) :- nat(Y), X .=. Y+1.\n");
    let nats: Vec<Vec<String>> = answers(&cp, "?- nat(X).", 10).iter().map(binding_lines).collect();
    ensure(nats == [["X = 0"]], || format!("nat answers {nats:?}"))?;
    let cp = compile_src("r(X) :- r(X).\nr(b).\n");
    ensure(Solver::new(&cp, &query("?- r(a).")).next().is_none(), || "r(a) succeeded".into())?;
    ensure(answers(&cp, "?- r(b).", 1).len() == 1, || "r(b) failed".into())?;
    Ok("even loop p(a) yes, p(b) no; odd loop has no model; positive loops fail finitely".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("stream reasoner", stream_reasoner),
        ("yale shooting", yale_shooting),
        ("tsp variant", tsp_variant),
        ("towers of hanoi", towers_of_hanoi),
        ("open facts and global constraints", example_one),
        ("dual program golden", dual_golden),
        ("forall", forall_examples),
        ("nmr check", nmr_example),
        ("property suites", property_suites),
        ("loop handling", loops),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
