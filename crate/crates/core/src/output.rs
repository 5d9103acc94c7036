//! Text and JSON-lines rendering of answers: justification tree, partial
//! model and query bindings, with constrained variables shown inline.

use crate::ast::Literal;
use crate::compile::CompiledProgram;
use crate::interp::{Answer, EntryId, EntryKind};
use crate::store::{self, StoreView};
use crate::term::{var_display_name, write_term, Term, Var};
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

/// Which parts of an answer to print.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub justification: bool,
    pub model: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options { justification: true, model: true }
    }
}

/// Assigns display names to the variables of one answer: query variables
/// keep their source names, others get fresh letters in order of first use.
struct Names<'a> {
    answer: &'a Answer,
    names: HashMap<Var, String>,
    taken: HashSet<String>,
    next: usize,
    /// Names of printed variables that carry constraints, in order of first use.
    constrained: Vec<(String, StoreView)>,
}

impl<'a> Names<'a> {
    fn new(answer: &'a Answer) -> Names<'a> {
        let mut names = HashMap::new();
        let mut taken = HashSet::new();
        for (n, v) in &answer.bindings {
            if let Term::Var(w) = answer.env.resolve(&Term::Var(*v)) {
                names.entry(w).or_insert_with(|| n.clone());
            }
            taken.insert(n.clone());
        }
        Names { answer, names, taken, next: 0, constrained: Vec::new() }
    }

    fn name(&mut self, v: Var) -> String {
        if let Some(n) = self.names.get(&v) {
            return n.clone();
        }
        let name = loop {
            let candidate = var_display_name(self.next);
            self.next += 1;
            if !self.taken.contains(&candidate) {
                break candidate;
            }
        };
        self.taken.insert(name.clone());
        self.names.insert(v, name.clone());
        name
    }

    fn term(&mut self, t: &Term) -> String {
        let t = self.answer.env.resolve(t);
        let mut s = String::new();
        write_term(&mut s, &t, &mut |o: &mut String, v| {
            let name = self.name(v);
            let st = store::dump(&self.answer.env, v);
            if st != StoreView::Top && !self.constrained.iter().any(|(n, _)| *n == name) {
                self.constrained.push((name.clone(), st.clone()));
            }
            st.write_constraints(o, &name)
        })
        .expect("writing to a string");
        s
    }

    fn literal(&mut self, lit: &Literal) -> String {
        match lit {
            Literal::Atom { negated, atom } => {
                let body = self.term(atom);
                if *negated {
                    format!("not {body}")
                } else {
                    body
                }
            }
            Literal::Constraint { op, lhs, rhs } => {
                format!("{}{}{}", self.term(lhs), op.symbol(), self.term(rhs))
            }
            Literal::Forall { var, goal } => {
                let v = self.name(*var);
                format!("forall({v},{})", self.literal(goal))
            }
        }
    }
}

fn write_tree(names: &mut Names<'_>, kids: &[Vec<EntryId>], ids: &[EntryId], depth: usize, out: &mut String) {
    for (i, &id) in ids.iter().enumerate() {
        let e = names.answer.path.get(id);
        let text = names.literal(&e.lit);
        let text = match e.kind {
            EntryKind::Chs => format!("chs({text})"),
            EntryKind::Proved => format!("proved({text})"),
            _ => text,
        };
        out.push_str(&"   ".repeat(depth));
        out.push_str(&text);
        if kids[id].is_empty() {
            out.push_str(if i + 1 == ids.len() { ".\n" } else { ",\n" });
        } else {
            out.push_str(" :-\n");
            write_tree(names, kids, &kids[id], depth + 1, out);
        }
    }
}

/// The indented justification tree of an answer.
pub fn justification(answer: &Answer) -> String {
    let mut names = Names::new(answer);
    justification_with(&mut names)
}

fn justification_with(names: &mut Names<'_>) -> String {
    let (roots, kids) = names.answer.path.children();
    let mut out = String::new();
    for &r in &roots {
        write_tree(names, &kids, &[r], 0, &mut out);
    }
    out
}

fn model_atoms(names: &mut Names<'_>, program: &CompiledProgram) -> Vec<String> {
    names.answer.model(program).iter().map(|t| names.term(t)).collect()
}

fn binding_pairs(names: &mut Names<'_>) -> Vec<(String, String)> {
    let answer = names.answer;
    let mut out = Vec::new();
    for (n, v) in &answer.bindings {
        let t = answer.env.resolve(&Term::Var(*v));
        if let Term::Var(w) = t {
            if names.name(w) == *n && store::dump(&answer.env, w) == StoreView::Top {
                continue;
            }
        }
        out.push((n.clone(), names.term(&Term::Var(*v))));
    }
    out
}

/// The displayed query bindings of an answer as `(name, value)` pairs.
pub fn bindings(answer: &Answer) -> Vec<(String, String)> {
    binding_pairs(&mut Names::new(answer))
}

/// The displayed partial model of an answer.
pub fn model(program: &CompiledProgram, answer: &Answer) -> Vec<String> {
    model_atoms(&mut Names::new(answer), program)
}

/// Renders one answer in the textual layout.
pub fn render_answer(program: &CompiledProgram, answer: &Answer, index: usize, millis: f64, opts: Options) -> String {
    let mut names = Names::new(answer);
    let mut out = String::new();
    let _ = writeln!(out, "Answer {index}\t(in {millis:.3} ms):");
    out.push('\n');
    if opts.justification {
        out.push_str(&justification_with(&mut names));
        out.push('\n');
    }
    if opts.model {
        let atoms = model_atoms(&mut names, program);
        if atoms.is_empty() {
            out.push_str("[ ]\n\n");
        } else {
            let _ = writeln!(out, "[ {} ]\n", atoms.join(", "));
        }
    }
    let pairs = binding_pairs(&mut names);
    if pairs.is_empty() {
        out.push_str("true ?\n");
    } else {
        let lines: Vec<String> = pairs.iter().map(|(n, v)| format!("{n} = {v}")).collect();
        let _ = writeln!(out, "{} ?", lines.join(",\n"));
    }
    out.push('\n');
    out
}

/// Renders one answer as a single JSON object.
pub fn render_json(program: &CompiledProgram, answer: &Answer, index: usize) -> String {
    let mut names = Names::new(answer);
    let model = model_atoms(&mut names, program);
    let bindings: serde_json::Map<String, serde_json::Value> =
        binding_pairs(&mut names).into_iter().map(|(n, v)| (n, v.into())).collect();
    let stores: serde_json::Map<String, serde_json::Value> = names
        .constrained
        .iter()
        .map(|(n, st)| {
            let mut s = String::new();
            st.write_constraints(&mut s, n).expect("writing to a string");
            (n.clone(), s.into())
        })
        .collect();
    serde_json::json!({
        "answer": index,
        "bindings": bindings,
        "model": model,
        "stores": stores,
    })
    .to_string()
}
