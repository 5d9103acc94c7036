//! Goal-directed evaluation over a compiled database.
//!
//! The machine keeps a persistent continuation of pending frames and a
//! stack of choice points holding snapshots of the whole state, so
//! backtracking is a pop and derivation depth is bounded only by memory.

use crate::ast::{ConstraintOp, Literal, PredKey, Query};
use crate::compile::{Clause, CompiledProgram};
use crate::env::Env;
use crate::linear::Rel;
use crate::store::{self, StoreView};
use crate::term::{Symbol, Term, Var};
use std::collections::HashMap;
use std::rc::Rc;

pub type EntryId = usize;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EntryKind {
    /// A resolved call to a predicate.
    Call,
    /// Success by coinductive hypothesis on an ancestor.
    Chs,
    /// Success because an equal goal was already proved.
    Proved,
    /// A constraint.
    Builtin,
    /// A universally quantified goal; its children are the iterations.
    Forall,
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub kind: EntryKind,
    pub lit: Literal,
    pub parent: Option<EntryId>,
    pub done: bool,
    /// Coinductive hypotheses this entry relies on, keyed by the entry that
    /// introduced them, flagged when the dependency passes through no negation.
    deps: Deps,
}

type Deps = im::OrdMap<EntryId, bool>;

impl Entry {
    fn new(kind: EntryKind, lit: Literal, parent: Option<EntryId>, done: bool) -> Entry {
        Entry { kind, lit, parent, done, deps: Deps::new() }
    }

    fn negated(&self) -> bool {
        matches!(self.lit, Literal::Atom { negated: true, .. })
    }

    fn atom(&self) -> Option<(&Term, bool)> {
        match &self.lit {
            Literal::Atom { negated, atom } => Some((atom, *negated)),
            _ => None,
        }
    }
}

/// The call path of a derivation: every literal solved so far, with
/// parent links forming the justification tree.
#[derive(Clone, Debug, Default)]
pub struct Path {
    entries: im::Vector<Entry>,
    by_pred: im::HashMap<(Symbol, usize), im::Vector<EntryId>>,
}

impl Path {
    fn push(&mut self, e: Entry) -> EntryId {
        let id = self.entries.len();
        if matches!(e.kind, EntryKind::Call | EntryKind::Chs) {
            if let Some((f, n)) = e.atom().and_then(|(a, _)| a.functor()) {
                let key = (f.clone(), n);
                let mut list = self.by_pred.get(&key).cloned().unwrap_or_default();
                list.push_back(id);
                self.by_pred.insert(key, list);
            }
        }
        let done = e.done;
        self.entries.push_back(e);
        if done {
            self.propagate(id);
        }
        id
    }

    fn finish(&mut self, id: EntryId) {
        let mut e = self.entries[id].clone();
        e.done = true;
        self.entries.set(id, e);
        self.propagate(id);
    }

    /// The hypotheses a completed entry hands to its parent.
    fn own_deps(&self, id: EntryId) -> Deps {
        let e = &self.entries[id];
        if e.kind == EntryKind::Chs {
            return e.deps.clone();
        }
        let negated = e.negated();
        e.deps.iter().filter(|(c, _)| **c != id).map(|(c, p)| (*c, *p && !negated)).collect()
    }

    fn propagate(&mut self, id: EntryId) {
        let Some(parent) = self.entries[id].parent else { return };
        let deps = self.own_deps(id);
        if deps.is_empty() {
            return;
        }
        let mut e = self.entries[parent].clone();
        for (c, p) in deps {
            let old = e.deps.get(&c).copied().unwrap_or(false);
            e.deps.insert(c, old || p);
        }
        self.entries.set(parent, e);
    }

    /// Hypotheses of in-progress entries that a completed entry depends on,
    /// following completed hypotheses transitively.
    fn open_hypotheses(&self, id: EntryId) -> Vec<(EntryId, bool)> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut work: Vec<(EntryId, bool)> = self.own_deps(id).into_iter().collect();
        while let Some((c, p)) = work.pop() {
            if !seen.insert((c, p)) {
                continue;
            }
            if self.entries[c].done {
                work.extend(self.own_deps(c).into_iter().map(|(d, q)| (d, p && q)));
            } else {
                out.push((c, p));
            }
        }
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter()
    }

    pub fn get(&self, id: EntryId) -> &Entry {
        &self.entries[id]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Child ids of every entry, and the roots, in creation order.
    pub fn children(&self) -> (Vec<EntryId>, Vec<Vec<EntryId>>) {
        let mut roots = Vec::new();
        let mut kids = vec![Vec::new(); self.entries.len()];
        for (id, e) in self.entries.iter().enumerate() {
            match e.parent {
                Some(p) => kids[p].push(id),
                None => roots.push(id),
            }
        }
        (roots, kids)
    }
}

#[derive(Clone, Debug)]
enum Frame {
    Goal { lit: Literal, parent: Option<EntryId> },
    Exit(EntryId),
    ForallNext { entry: EntryId, var: Var, goal: Rc<Literal>, pending: im::Vector<StoreView> },
    ForallCheck {
        entry: EntryId,
        var: Var,
        goal: Rc<Literal>,
        nv: Var,
        store: StoreView,
        rest: im::Vector<StoreView>,
        cut: usize,
    },
    Nmr,
    Answer,
}

#[derive(Clone, Debug, Default)]
struct Cont(Option<Rc<ContNode>>);

#[derive(Debug)]
struct ContNode {
    frame: Frame,
    next: Cont,
}

impl Cont {
    fn push(&self, frame: Frame) -> Cont {
        Cont(Some(Rc::new(ContNode { frame, next: self.clone() })))
    }

    fn pop(&self) -> Option<(Frame, Cont)> {
        self.0.as_ref().map(|n| (n.frame.clone(), n.next.clone()))
    }
}

#[derive(Clone, Debug)]
struct State {
    env: Env,
    cont: Cont,
    path: Path,
}

impl State {
    fn push(&mut self, frame: Frame) {
        self.cont = self.cont.push(frame);
    }
}

enum Alt<'p> {
    Clauses { atom: Term, entry: EntryId, clauses: &'p [Clause], next: usize },
    Envs { envs: Vec<Env>, next: usize },
}

struct Choice<'p> {
    state: State,
    alt: Alt<'p>,
}

/// One successful derivation, including its nmr_check sub-derivation.
#[derive(Clone, Debug)]
pub struct Answer {
    pub env: Env,
    pub path: Path,
    /// Named query variables in order of appearance.
    pub bindings: Vec<(String, Var)>,
}

impl Answer {
    /// Positive atoms of the partial model, deduplicated, in derivation order,
    /// restricted to the shown predicates when a show set is present.
    pub fn model(&self, program: &CompiledProgram) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for e in self.path.entries() {
            if e.kind != EntryKind::Call {
                continue;
            }
            let Some((atom, false)) = e.atom() else { continue };
            let Some((f, n)) = atom.functor() else { continue };
            if program.is_generated(f, n) {
                continue;
            }
            if !program.show.is_empty() && !program.show.iter().any(|(s, k)| s == f && *k == n) {
                continue;
            }
            let t = self.env.resolve(atom);
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn store_of(&self, v: Var) -> StoreView {
        store::dump(&self.env, v)
    }
}

enum Class {
    Continue,
    Fail,
    Proved(EntryId),
    Coinductive(Env, EntryId),
}

/// Enumerates the answers of a query depth-first in clause order.
pub struct Solver<'p> {
    program: &'p CompiledProgram,
    bindings: Vec<(String, Var)>,
    state: Option<State>,
    choices: Vec<Choice<'p>>,
    started: bool,
    nonground_disequalities: usize,
}

impl<'p> Solver<'p> {
    pub fn new(program: &'p CompiledProgram, query: &Query) -> Solver<'p> {
        let mut env = Env::new();
        env.reserve(query.var_names.len() as u32);
        let mut st = State { env, cont: Cont::default(), path: Path::default() };
        st.push(Frame::Nmr);
        for lit in query.goals.iter().rev() {
            st.push(Frame::Goal { lit: lit.clone(), parent: None });
        }
        let bindings = query
            .var_names
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.starts_with('_') && !n.is_empty())
            .map(|(i, n)| (n.clone(), Var(i as u32)))
            .collect();
        Solver { program, bindings, state: Some(st), choices: Vec::new(), started: false, nonground_disequalities: 0 }
    }

    /// How many disequalities compared a variable with a non-ground term;
    /// each such comparison contributed no alternative.
    pub fn nonground_disequalities(&self) -> usize {
        self.nonground_disequalities
    }

    fn run(&mut self) -> Option<Answer> {
        loop {
            let st = match self.state.take() {
                Some(st) => st,
                None => self.backtrack()?,
            };
            let Some((frame, rest)) = st.cont.pop() else { continue };
            let st = State { cont: rest, ..st };
            match frame {
                Frame::Answer => {
                    debug_assert!(st.env.linear().witness().is_some());
                    return Some(Answer { env: st.env, path: st.path, bindings: self.bindings.clone() });
                }
                frame => self.state = self.step(st, frame),
            }
        }
    }

    fn backtrack(&mut self) -> Option<State> {
        loop {
            let mut choice = self.choices.pop()?;
            let result = match &mut choice.alt {
                Alt::Clauses { atom, entry, clauses, next } => {
                    let (atom, entry, clause) = (atom.clone(), *entry, &clauses[*next]);
                    *next += 1;
                    let more = *next < clauses.len();
                    let st = choice.state.clone();
                    if more {
                        self.choices.push(choice);
                    }
                    try_clause(st, &atom, entry, clause)
                }
                Alt::Envs { envs, next } => {
                    let env = envs[*next].clone();
                    *next += 1;
                    let more = *next < envs.len();
                    let mut st = choice.state.clone();
                    st.env = env;
                    if more {
                        self.choices.push(choice);
                    }
                    Some(st)
                }
            };
            if result.is_some() {
                return result;
            }
        }
    }

    fn step(&mut self, mut st: State, frame: Frame) -> Option<State> {
        match frame {
            Frame::Goal { lit, parent } => self.solve(st, lit, parent),
            Frame::Exit(id) => {
                st.path.finish(id);
                Some(st)
            }
            Frame::ForallNext { entry, var, goal, mut pending } => {
                let Some(piece) = pending.pop_front() else {
                    st.path.finish(entry);
                    return Some(st);
                };
                let nv = st.env.fresh_var();
                let mut env = st.env.clone();
                if store::apply(&piece, &mut env, nv).is_err() {
                    st.push(Frame::ForallNext { entry, var, goal, pending });
                    return Some(st);
                }
                st.env = env;
                let instance = goal.map_terms(&mut |t| {
                    t.map_vars(&mut |v| Term::Var(if v == var { nv } else { v }))
                });
                let cut = self.choices.len();
                st.push(Frame::ForallCheck { entry, var, goal, nv, store: piece, rest: pending, cut });
                st.push(Frame::Goal { lit: instance, parent: Some(entry) });
                Some(st)
            }
            Frame::ForallCheck { entry, var, goal, nv, store: piece, rest, cut } => {
                self.choices.truncate(cut);
                let answer = store::dump(&st.env, nv);
                let pending = if store::equal(&answer, &piece) {
                    rest
                } else {
                    let duals = store::dual(&answer)?;
                    let mut pending: im::Vector<StoreView> = store::add(&duals, &piece).into();
                    pending.append(rest);
                    pending
                };
                st.push(Frame::ForallNext { entry, var, goal, pending });
                Some(st)
            }
            Frame::Nmr => {
                st.push(Frame::Answer);
                let key = CompiledProgram::nmr_key();
                if self.program.clauses(&key).is_some() {
                    st.push(Frame::Goal { lit: Literal::pos(key_atom(&key)), parent: None });
                }
                Some(st)
            }
            Frame::Answer => unreachable!("answers are returned by the run loop"),
        }
    }

    fn solve(&mut self, mut st: State, lit: Literal, parent: Option<EntryId>) -> Option<State> {
        match lit {
            Literal::Atom { negated, atom } => self.call(st, atom, negated, parent),
            Literal::Constraint { op, ref lhs, ref rhs } => {
                let (lhs, rhs) = (lhs.clone(), rhs.clone());
                st.path.push(Entry::new(EntryKind::Builtin, lit, parent, true));
                let rel = match op {
                    ConstraintOp::Unify => {
                        st.env.unify(&lhs, &rhs).ok()?;
                        return Some(st);
                    }
                    ConstraintOp::NotUnify => {
                        let d = st.env.disequality(&lhs, &rhs);
                        if d.nonground.is_some() {
                            self.nonground_disequalities += 1;
                        }
                        let mut envs = d.alternatives;
                        if envs.is_empty() {
                            return None;
                        }
                        let first = envs.remove(0);
                        if !envs.is_empty() {
                            self.choices.push(Choice { state: st.clone(), alt: Alt::Envs { envs, next: 0 } });
                        }
                        st.env = first;
                        return Some(st);
                    }
                    ConstraintOp::Lt => Rel::Lt,
                    ConstraintOp::Gt => Rel::Gt,
                    ConstraintOp::Le => Rel::Le,
                    ConstraintOp::Ge => Rel::Ge,
                    ConstraintOp::ArithEq => Rel::Eq,
                    ConstraintOp::ArithNe => Rel::Ne,
                };
                st.env.arith(&lhs, rel, &rhs).ok()?;
                Some(st)
            }
            Literal::Forall { var, ref goal } => {
                let goal = Rc::new((**goal).clone());
                let entry = st.path.push(Entry::new(EntryKind::Forall, lit, parent, false));
                let pending = im::vector![store::empty_store()];
                st.push(Frame::ForallNext { entry, var, goal, pending });
                Some(st)
            }
        }
    }

    fn call(&mut self, mut st: State, atom: Term, negated: bool, parent: Option<EntryId>) -> Option<State> {
        let lit = Literal::Atom { negated, atom: atom.clone() };
        match classify(&st, &atom, negated, parent) {
            Class::Fail => return None,
            Class::Proved(by) => {
                let mut e = Entry::new(EntryKind::Proved, lit, parent, true);
                e.deps = st.path.own_deps(by);
                st.path.push(e);
                return Some(st);
            }
            Class::Coinductive(env, ancestor) => {
                st.env = env;
                let mut e = Entry::new(EntryKind::Chs, lit, parent, true);
                e.deps.insert(ancestor, true);
                st.path.push(e);
                return Some(st);
            }
            Class::Continue => {}
        }
        let (name, arity) = atom.functor().expect("callable goal");
        let key = PredKey::new(name.clone(), arity, negated);
        let Some(clauses) = self.program.clauses(&key) else {
            // a predicate defined nowhere is false, so its negation holds
            if negated && self.program.clauses(&key.dual()).is_none() {
                st.path.push(Entry::new(EntryKind::Call, lit, parent, true));
                return Some(st);
            }
            return None;
        };
        let entry = st.path.push(Entry::new(EntryKind::Call, lit, parent, false));
        if clauses.len() > 1 {
            let alt = Alt::Clauses { atom: atom.clone(), entry, clauses, next: 1 };
            self.choices.push(Choice { state: st.clone(), alt });
        }
        try_clause(st, &atom, entry, &clauses[0])
    }
}

impl Iterator for Solver<'_> {
    type Item = Answer;

    fn next(&mut self) -> Option<Answer> {
        if self.started {
            self.state = None;
        }
        self.started = true;
        self.run()
    }
}

fn key_atom(key: &PredKey) -> Term {
    Term::compound_sym(key.name.clone(), vec![])
}

fn try_clause(mut st: State, atom: &Term, entry: EntryId, clause: &Clause) -> Option<State> {
    let base = st.env.fresh_block(clause.nvars);
    st.env.unify(atom, &clause.head.offset(base)).ok()?;
    st.push(Frame::Exit(entry));
    for lit in clause.body.iter().rev() {
        st.push(Frame::Goal { lit: lit.offset(base), parent: Some(entry) });
    }
    Some(st)
}

/// Loop detection against the call path: odd loops fail, goals equal to a
/// proved one succeed, recursion through negation succeeds coinductively,
/// and positive recursion on an equal goal fails.
fn classify(st: &State, atom: &Term, negated: bool, parent: Option<EntryId>) -> Class {
    let Some((name, arity)) = atom.functor() else { return Class::Continue };
    let same_pred = |t: &Term| t.functor() == Some((name, arity));
    let env = &st.env;

    let mut coinductive: Option<(Env, EntryId)> = None;
    let mut positive_loop = false;
    let mut negations = 0usize;
    // negated ancestors strictly between the call and each ancestor
    let mut between: HashMap<EntryId, usize> = HashMap::new();
    let mut cur = parent;
    while let Some(id) = cur {
        let e = st.path.get(id);
        cur = e.parent;
        between.insert(id, negations);
        if e.kind != EntryKind::Call {
            continue;
        }
        let Some((anc, anc_negated)) = e.atom() else { continue };
        if same_pred(anc) {
            if anc_negated != negated {
                if env.clone().unify(atom, anc).is_ok() {
                    return Class::Fail;
                }
            } else if coinductive.is_none() && !positive_loop {
                if negated || negations > 0 {
                    let mut trial = env.clone();
                    if trial.unify(atom, anc).is_ok() {
                        coinductive = Some((trial, id));
                    }
                } else if variant(env, atom, anc) {
                    positive_loop = true;
                }
            }
        }
        if anc_negated {
            negations += 1;
        }
    }

    let mut proved = None;
    if let Some(ids) = st.path.by_pred.get(&(name.clone(), arity)) {
        for &id in ids.iter().rev() {
            let e = st.path.get(id);
            if !e.done || e.kind == EntryKind::Chs {
                continue;
            }
            let Some((other, other_negated)) = e.atom() else { continue };
            if variant(env, atom, other) {
                if other_negated != negated {
                    return Class::Fail;
                }
                // reuse must not close a cycle of positive support through an open hypothesis
                let unfounded = st.path.open_hypotheses(id).into_iter().any(|(c, positive)| {
                    positive && !st.path.get(c).negated() && between.get(&c) == Some(&0)
                });
                if !unfounded {
                    proved = Some(id);
                }
            }
        }
    }
    if let Some(id) = proved {
        Class::Proved(id)
    } else if let Some((env, id)) = coinductive {
        Class::Coinductive(env, id)
    } else if positive_loop {
        Class::Fail
    } else {
        Class::Continue
    }
}

/// Equality up to variable renaming, where corresponding variables must
/// also carry equal constraints.
pub fn variant(env: &Env, a: &Term, b: &Term) -> bool {
    fn go(env: &Env, a: &Term, b: &Term, fwd: &mut HashMap<Var, Var>, back: &mut HashMap<Var, Var>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match (fwd.get(x), back.get(y)) {
                (Some(fy), Some(bx)) => fy == y && bx == x,
                (None, None) => {
                    fwd.insert(*x, *y);
                    back.insert(*y, *x);
                    x == y || store::equal(&store::dump(env, *x), &store::dump(env, *y))
                }
                _ => false,
            },
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| go(env, x, y, fwd, back))
            }
            (Term::Atom(p), Term::Atom(q)) => p == q,
            (Term::Num(p), Term::Num(q)) => p == q,
            _ => false,
        }
    }
    let (a, b) = (env.resolve(a), env.resolve(b));
    if a.is_ground() && b.is_ground() {
        return a == b;
    }
    go(env, &a, &b, &mut HashMap::new(), &mut HashMap::new())
}
