mod common;

use common::*;
use scasp::cli::{run, EXIT_ANSWERS, EXIT_ERROR, EXIT_NO};
use scasp::compile::{compile, CompiledProgram};
use scasp::output::{self, Options};
use scasp::parser::{parse_dump, parse_program};
use std::io::Write as _;
use std::process::Command;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("scasp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_program(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("scasp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path.to_string_lossy().into_owned()
}

fn answer_count(text: &str) -> usize {
    text.lines().filter(|l| l.starts_with("Answer ")).count()
}

#[test]
fn exit_codes_distinguish_answers_failure_and_errors() {
    let stream = program_path("stream.pl");
    assert_eq!(cli(&[&stream]).0, EXIT_ANSWERS);
    assert_eq!(cli(&[&stream, "-q", "valid_stream(9,D)"]).0, EXIT_NO);
    let (code, _, err) = cli(&["/nonexistent/none.pl"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("none.pl: cannot read file"), "{err}");
    let bad = temp_program("bad.pl", "p(X :- q.\n");
    let (code, _, err) = cli(&[&bad]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("bad.pl:1:"), "{err}");
}

#[test]
fn query_option_accepts_bare_goals() {
    let stream = program_path("stream.pl");
    let (code, out, _) = cli(&[&stream, "-q", "valid_stream(2,D)", "--no-just", "--no-model"]);
    assert_eq!(code, EXIT_ANSWERS);
    assert!(out.starts_with("?- valid_stream(2,D).\n\n"), "{out}");
    assert!(out.contains("D = q(b) ?"), "{out}");
    assert!(out.ends_with("no\n"), "{out}");
}

#[test]
fn answer_limit_stops_after_k_answers() {
    let yale = program_path("yale.pl");
    for k in 1..=3 {
        let (code, out, _) = cli(&[&yale, "-n", &k.to_string(), "--no-just"]);
        assert_eq!(code, EXIT_ANSWERS);
        assert_eq!(answer_count(&out), k);
        assert!(!out.ends_with("no\n"), "{out}");
    }
    let (_, out, _) = cli(&[&yale, "-n", "0", "--no-just"]);
    assert_eq!(answer_count(&out), 6);
    assert!(out.ends_with("no\n"));
}

#[test]
fn dump_reparses_to_the_same_database() {
    for name in ["stream.pl", "yale.pl", "tsp.pl", "hanoi.pl"] {
        let (code, dump, _) = cli(&["--dump-compiled", &program_path(name)]);
        assert_eq!(code, EXIT_ANSWERS);
        let again = CompiledProgram::from_dump(&parse_dump(&dump).unwrap());
        let direct = compile(&parse_program(&read_program(name)).unwrap());
        assert_eq!(again, direct, "{name}");
        assert_eq!(again.dump(), dump, "{name}");
    }
}

#[test]
fn json_lines_are_deterministic() {
    for name in ["stream.pl", "yale.pl", "tsp.pl"] {
        let path = program_path(name);
        let first = cli(&[&path, "--json-lines"]);
        let second = cli(&[&path, "--json-lines"]);
        assert_eq!(first, second, "{name}");
        for line in first.1.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["answer"].is_u64() && v["bindings"].is_object() && v["model"].is_array());
        }
    }
    let (_, out, _) = cli(&[&program_path("stream.pl"), "--json-lines", "-n", "1"]);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["bindings"]["Data"], "p({A.\\=.[a,b]})");
    assert_eq!(v["stores"]["A"], "{A.\\=.[a,b]}");
}

#[test]
fn rendering_is_a_function_of_the_answer() {
    let (cp, found) = embedded_answers(&read_program("stream.pl"), usize::MAX);
    let again = embedded_answers(&read_program("stream.pl"), usize::MAX).1;
    for (i, (a, b)) in found.iter().zip(&again).enumerate() {
        let opts = Options::default();
        let x = output::render_answer(&cp, a, i + 1, 1.0, opts);
        assert_eq!(x, output::render_answer(&cp, a, i + 1, 1.0, opts));
        assert_eq!(x, output::render_answer(&cp, b, i + 1, 1.0, opts));
    }
}

#[test]
fn model_atoms_appear_in_the_justification() {
    for name in ["stream.pl", "yale.pl", "tsp.pl"] {
        let (cp, found) = embedded_answers(&read_program(name), usize::MAX);
        for (i, a) in found.iter().enumerate() {
            let text = output::render_answer(&cp, a, i + 1, 0.0, Options::default());
            let (tree, rest) = text.split_once("\n\n[ ").unwrap();
            let model = rest.split_once(" ]").unwrap().0;
            let mut depth = 0;
            let mut start = 0;
            let mut atoms = Vec::new();
            for (k, c) in model.char_indices() {
                match c {
                    '(' | '[' | '{' => depth += 1,
                    ')' | ']' | '}' => depth -= 1,
                    ',' if depth == 0 => {
                        atoms.push(model[start..k].trim());
                        start = k + 1;
                    }
                    _ => {}
                }
            }
            atoms.push(model[start..].trim());
            for atom in atoms {
                assert!(tree.contains(atom), "{name} answer {}: {atom} not in tree", i + 1);
            }
        }
    }
}

#[test]
fn answers_have_satisfiable_stores() {
    for name in ["stream.pl", "yale.pl", "tsp.pl"] {
        for a in embedded_answers(&read_program(name), usize::MAX).1 {
            assert!(a.env.linear().witness().is_some(), "{name}");
        }
    }
}

#[test]
fn global_constraints_gate_every_query() {
    let gated = compile_src("q(a).\nr.\n:- q(a).\n");
    for q in ["?- q(a).", "?- r.", "?- q(X).", "?- not q(b)."] {
        assert!(answers(&gated, q, 1).is_empty(), "{q}");
    }
    let open = compile_src("q(a).\nr.\n");
    for q in ["?- q(a).", "?- r.", "?- q(X).", "?- not q(b)."] {
        assert_eq!(answers(&open, q, 5).len(), 1, "{q}");
    }
}

#[test]
fn oracle_mode_reports_agreement() {
    let path = temp_program("even.pl", "p :- not q.\nq :- not p.\n?- p.\n");
    let (code, out, _) = cli(&["--oracle", &path]);
    assert_eq!(code, EXIT_ANSWERS, "{out}");
    assert!(out.contains("stable models: 2"), "{out}");
}

#[test]
fn binary_runs_the_embedded_query() {
    let out = Command::new(env!("CARGO_BIN_EXE_scasp"))
        .args(["--no-just", "--no-model", &program_path("tsp.pl")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ANSWERS));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("D = 61/10,\nCycle = [b,[31/10],c,[1],a,[1],d,[1],b] ?"), "{text}");
}
