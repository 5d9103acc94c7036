//! Builds the executable clause database: source clauses, their duals
//! (Clark completion plus De Morgan), and the consistency checks evaluated
//! after every query.

use crate::ast::{ConstraintOp, Directive, Head, Literal, PredKey, Program, Rule, VarNamer};
use crate::term::{sym, var_display_name, Symbol, Term, Var};
use indexmap::IndexMap;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

pub const NMR_CHECK: &str = "nmr_check";

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    /// Head atom; variables are local ids `0..nvars`.
    pub head: Term,
    pub body: Vec<Literal>,
    pub nvars: u32,
    pub var_names: Vec<String>,
}

impl Clause {
    /// Renumbers variables in first-occurrence order and makes names unique.
    fn canonical(head: Term, body: Vec<Literal>, names: &[String]) -> Clause {
        let mut order = head.vars();
        for l in &body {
            l.collect_vars(&mut order);
        }
        let map: HashMap<Var, Var> =
            order.iter().enumerate().map(|(i, v)| (*v, Var(i as u32))).collect();
        let rename = |t: &Term| t.map_vars(&mut |v| Term::Var(map[&v]));
        let raw_names: Vec<String> = order
            .iter()
            .map(|v| names.get(v.0 as usize).cloned().unwrap_or_else(|| "_".into()))
            .collect();
        let namer = VarNamer::new(&raw_names);
        let var_names = (0..order.len()).map(|i| namer.name(Var(i as u32))).collect();
        Clause {
            head: rename(&head),
            body: body.iter().map(|l| l.map_terms(&mut |t| rename(t))).collect(),
            nvars: order.len() as u32,
            var_names,
        }
    }

    pub fn to_rule(&self, negated: bool) -> Rule {
        Rule {
            head: Head::Atom { negated, atom: self.head.clone() },
            body: self.body.clone(),
            var_names: self.var_names.clone(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CompiledProgram {
    /// Clause lists per predicate and polarity, in deterministic order.
    pub preds: IndexMap<PredKey, Vec<Clause>>,
    /// `#show` declarations; empty means show everything.
    pub show: Vec<(Symbol, usize)>,
    /// Positive predicates introduced by the compiler (checks), excluded from models.
    pub generated: BTreeSet<(Symbol, usize)>,
}

impl CompiledProgram {
    pub fn clauses(&self, key: &PredKey) -> Option<&[Clause]> {
        self.preds.get(key).map(|v| v.as_slice())
    }

    pub fn nmr_key() -> PredKey {
        PredKey::new(sym(NMR_CHECK), 0, false)
    }

    pub fn is_generated(&self, name: &Symbol, arity: usize) -> bool {
        self.generated.contains(&(name.clone(), arity))
    }

    /// Source-syntax rendering, reparsable with [`CompiledProgram::from_dump`].
    pub fn dump(&self) -> String {
        self.to_string()
    }

    /// Rebuilds a database from dumped rules without generating anything.
    pub fn from_dump(program: &Program) -> CompiledProgram {
        let mut out = CompiledProgram { show: program.show_set(), ..Default::default() };
        for r in &program.rules {
            let Head::Atom { negated, atom } = &r.head else { continue };
            let Some((name, arity)) = atom.functor() else { continue };
            let key = PredKey::new(name.clone(), arity, *negated);
            if !*negated && is_generated_name(name) {
                out.generated.insert((name.clone(), arity));
            }
            let clause = Clause {
                head: atom.clone(),
                body: r.body.clone(),
                nvars: r.var_names.len() as u32,
                var_names: r.var_names.clone(),
            };
            out.preds.entry(key).or_default().push(clause);
        }
        out
    }
}

fn is_generated_name(name: &str) -> bool {
    if name == NMR_CHECK {
        return true;
    }
    let Some(rest) = name.strip_prefix("chk_") else { return false };
    let digits = rest.strip_suffix("_body").unwrap_or(rest);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

impl fmt::Display for CompiledProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (key, clauses) in &self.preds {
            for c in clauses {
                writeln!(f, "{}", c.to_rule(key.negated))?;
            }
        }
        for (name, arity) in &self.show {
            writeln!(f, "#show {name}/{arity}.")?;
        }
        Ok(())
    }
}

/// Constraint and atom negation used in dual bodies.
pub fn negate_literal(lit: &Literal) -> Vec<Literal> {
    match lit {
        Literal::Atom { negated, atom } => vec![Literal::Atom { negated: !negated, atom: atom.clone() }],
        Literal::Constraint { op, lhs, rhs } => op
            .complement()
            .into_iter()
            .map(|op| Literal::Constraint { op, lhs: lhs.clone(), rhs: rhs.clone() })
            .collect(),
        // not forall(V, G) holds when some V falsifies G
        Literal::Forall { goal, .. } => negate_literal(goal),
    }
}

/// Variables of a body in first-occurrence order, skipping forall-bound ones.
fn free_vars(body: &[Literal]) -> Vec<Var> {
    fn walk(l: &Literal, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match l {
            Literal::Atom { atom, .. } => {
                for v in atom.vars() {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Literal::Constraint { lhs, rhs, .. } => {
                for v in lhs.vars().into_iter().chain(rhs.vars()) {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Literal::Forall { var, goal } => {
                bound.push(*var);
                walk(goal, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    for l in body {
        walk(l, &mut Vec::new(), &mut out);
    }
    out
}

fn head_term(name: &str, args: &[Var]) -> Term {
    Term::compound(name, args.iter().map(|v| Term::Var(*v)).collect())
}

fn wrap_forall(vars: &[Var], goal: Literal) -> Literal {
    vars.iter()
        .rev()
        .fold(goal, |g, v| Literal::Forall { var: *v, goal: Box::new(g) })
}

struct Builder {
    out: CompiledProgram,
}

/// The clauses of `body_name`-style negation of a conjunction.
struct Negation<'a> {
    /// Functor of the defined head.
    name: String,
    /// Whether heads (and the inner forall call) carry `not`.
    negated: bool,
    xs: &'a [Var],
    body: &'a [Literal],
    /// Inline a single negated literal under the forall instead of an auxiliary predicate.
    inline_single: bool,
}

impl Builder {
    fn push(&mut self, key: PredKey, clause: Clause) {
        self.out.preds.entry(key).or_default().push(clause);
    }

    fn ensure(&mut self, key: PredKey) {
        self.out.preds.entry(key).or_default();
    }

    /// Defines `name(xs) ⟷ ∀ȳ ¬body` through one clause per negated literal.
    fn negation(&mut self, n: Negation<'_>, names: &[String]) {
        let mut names = names.to_vec();
        let ys: Vec<Var> = free_vars(n.body).into_iter().filter(|v| !n.xs.contains(v)).collect();
        let head = head_term(&n.name, n.xs);
        let key = PredKey::new(sym(&n.name), n.xs.len(), n.negated);
        self.ensure(key.clone());
        if ys.is_empty() {
            self.conjunct_clauses(key, &head, n.body, &names);
            return;
        }
        if n.inline_single && n.body.len() == 1 {
            let neg = negate_literal(&n.body[0]);
            if neg.len() == 1 {
                let lit = wrap_forall(&ys, neg.into_iter().next().unwrap());
                self.push(key, Clause::canonical(head, vec![lit], &names));
                return;
            }
        }
        let inner_name = format!("{}_body", n.name);
        let mut all: Vec<Var> = n.xs.to_vec();
        all.extend(ys.iter().copied());
        let inner_head = head_term(&inner_name, &all);
        let inner_call = Literal::Atom { negated: n.negated, atom: inner_head.clone() };
        // fresh copies of the quantified variables for the outer clause
        let mut outer_ys = Vec::new();
        let mut subst: HashMap<Var, Var> = HashMap::new();
        for y in &ys {
            let v = Var(names.len() as u32);
            names.push(names.get(y.0 as usize).cloned().unwrap_or_else(|| "_".into()));
            subst.insert(*y, v);
            outer_ys.push(v);
        }
        let outer_call = match &inner_call {
            Literal::Atom { negated, atom } => Literal::Atom {
                negated: *negated,
                atom: atom.map_vars(&mut |v| Term::Var(*subst.get(&v).unwrap_or(&v))),
            },
            _ => unreachable!(),
        };
        self.push(key, Clause::canonical(head, vec![wrap_forall(&outer_ys, outer_call)], &names));
        let inner_key = PredKey::new(sym(&inner_name), all.len(), n.negated);
        self.ensure(inner_key.clone());
        self.conjunct_clauses(inner_key, &inner_head, n.body, &names);
    }

    /// One clause per literal j: literals before j as written, then the negation of j.
    fn conjunct_clauses(&mut self, key: PredKey, head: &Term, body: &[Literal], names: &[String]) {
        for (j, lit) in body.iter().enumerate() {
            for neg in negate_literal(lit) {
                let mut b: Vec<Literal> = body[..j].to_vec();
                b.push(neg);
                self.push(key.clone(), Clause::canonical(head.clone(), b, names));
            }
        }
    }
}

/// Splits a rule head into plain head variables and head-unification literals.
fn head_pattern(head: &Term, names: &mut Vec<String>) -> (Vec<Var>, Vec<Literal>) {
    let mut xs = Vec::new();
    let mut eqs = Vec::new();
    for (j, arg) in head.args().iter().enumerate() {
        match arg {
            Term::Var(v) if !xs.contains(v) => xs.push(*v),
            _ => {
                let v = Var(names.len() as u32);
                names.push(format!("X{}", j + 1));
                xs.push(v);
                eqs.push(Literal::constraint(ConstraintOp::Unify, Term::Var(v), arg.clone()));
            }
        }
    }
    (xs, eqs)
}

type Adjacency = HashMap<(Symbol, usize), Vec<((Symbol, usize), bool)>>;

/// Predicate dependency graph with edge parity (true = through `not`).
struct Graph {
    edges: Adjacency,
}

fn literal_preds(l: &Literal, out: &mut Vec<((Symbol, usize), bool)>) {
    match l {
        Literal::Atom { negated, atom } => {
            if let Some((f, n)) = atom.functor() {
                out.push(((f.clone(), n), *negated));
            }
        }
        Literal::Forall { goal, .. } => literal_preds(goal, out),
        Literal::Constraint { .. } => {}
    }
}

impl Graph {
    fn new(rules: &[Rule]) -> Graph {
        let mut edges: Adjacency = HashMap::new();
        for r in rules {
            let Some(h) = r.head_atom().and_then(|h| h.functor()) else { continue };
            let entry = edges.entry((h.0.clone(), h.1)).or_default();
            for l in &r.body {
                literal_preds(l, entry);
            }
        }
        Graph { edges }
    }

    /// (predicate, parity) pairs reachable from `start` with parity `p0`.
    fn reach(&self, start: (Symbol, usize), p0: bool) -> HashSet<((Symbol, usize), bool)> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert((start.clone(), p0));
        queue.push_back((start, p0));
        while let Some((node, parity)) = queue.pop_front() {
            for (next, neg) in self.edges.get(&node).into_iter().flatten() {
                let state = (next.clone(), parity ^ neg);
                if seen.insert(state.clone()) {
                    queue.push_back(state);
                }
            }
        }
        seen
    }

    /// Whether the rule closes a cycle through its head with an odd number of negations.
    fn is_odd_loop_rule(&self, r: &Rule) -> bool {
        let Some((f, n)) = r.head_atom().and_then(|h| h.functor()) else { return false };
        let head = (f.clone(), n);
        let mut lits = Vec::new();
        for l in &r.body {
            literal_preds(l, &mut lits);
        }
        lits.into_iter().any(|(pred, neg)| self.reach(pred, neg).contains(&(head.clone(), true)))
    }
}

/// Compiles a program into its executable database.
pub fn compile(program: &Program) -> CompiledProgram {
    let mut b = Builder { out: CompiledProgram { show: program.show_set(), ..Default::default() } };

    // user predicates in order of first appearance
    let mut order: IndexMap<(Symbol, usize), Vec<&Rule>> = IndexMap::new();
    let note_body = |lits: &[Literal], order: &mut IndexMap<(Symbol, usize), Vec<&Rule>>| {
        let mut preds = Vec::new();
        for l in lits {
            literal_preds(l, &mut preds);
        }
        for (p, _) in preds {
            order.entry(p).or_default();
        }
    };
    for r in &program.rules {
        if let Some((f, n)) = r.head_atom().and_then(|h| h.functor()) {
            order.entry((f.clone(), n)).or_default().push(r);
        }
        note_body(&r.body, &mut order);
    }
    for d in &program.directives {
        if let Directive::Query(q) = d {
            note_body(&q.goals, &mut order);
        }
    }

    for ((name, arity), rules) in &order {
        let key = PredKey::new(name.clone(), *arity, false);
        b.ensure(key.clone());
        for r in rules {
            let head = r.head_atom().unwrap().clone();
            b.push(key.clone(), Clause::canonical(head, r.body.clone(), &r.var_names));
        }
    }

    for ((name, arity), rules) in &order {
        let xs: Vec<Var> = (0..*arity as u32).map(Var).collect();
        let names: Vec<String> = (0..*arity).map(var_display_name).collect();
        let umbrella_key = PredKey::new(name.clone(), *arity, true);
        b.ensure(umbrella_key.clone());
        let body = (1..=rules.len())
            .map(|i| Literal::neg(head_term(&format!("{name}__{i}"), &xs)))
            .collect();
        let umbrella = b.out.preds.get_index_of(&umbrella_key).unwrap();
        b.out.preds[umbrella].push(Clause::canonical(head_term(name, &xs), body, &names));
        let mut refutable = true;
        for (i, r) in rules.iter().enumerate() {
            let mut names = r.var_names.clone();
            let (xs, mut d) = head_pattern(r.head_atom().unwrap(), &mut names);
            d.extend(r.body.iter().cloned());
            let n = Negation {
                name: format!("{name}__{}", i + 1),
                negated: true,
                xs: &xs,
                body: &d,
                inline_single: false,
            };
            b.negation(n, &names);
            let dual = PredKey::new(sym(&format!("{name}__{}", i + 1)), *arity, true);
            refutable &= b.out.preds.get(&dual).is_some_and(|cs| !cs.is_empty());
        }
        if !refutable {
            b.out.preds[umbrella].clear();
        }
    }

    // consistency checks
    let graph = Graph::new(&program.rules);
    let mut checks: Vec<(String, Vec<Var>, Vec<String>)> = Vec::new();
    for r in &program.rules {
        let index = checks.len() + 1;
        let name = format!("chk_{index}");
        match &r.head {
            Head::False => {
                b.negation(
                    Negation { name: name.clone(), negated: false, xs: &[], body: &r.body, inline_single: true },
                    &r.var_names,
                );
                b.out.generated.insert((sym(&name), 0));
                b.out.generated.insert((sym(&format!("{name}_body")), free_vars(&r.body).len()));
                checks.push((name, vec![], r.var_names.clone()));
            }
            Head::Atom { atom, .. } if graph.is_odd_loop_rule(r) => {
                let xs = atom.vars();
                let mut d = r.body.clone();
                let self_neg = Literal::neg(atom.clone());
                if !d.contains(&self_neg) {
                    d.push(self_neg);
                }
                b.negation(
                    Negation { name: name.clone(), negated: false, xs: &xs, body: &d, inline_single: false },
                    &r.var_names,
                );
                let ys = free_vars(&d).into_iter().filter(|v| !xs.contains(v)).count();
                b.out.generated.insert((sym(&name), xs.len()));
                b.out.generated.insert((sym(&format!("{name}_body")), xs.len() + ys));
                checks.push((name, xs, r.var_names.clone()));
            }
            _ => {}
        }
    }
    b.out.generated.retain(|(n, k)| b.out.preds.contains_key(&PredKey::new(n.clone(), *k, false)));
    b.out.generated.insert((sym(NMR_CHECK), 0));

    let mut names = Vec::new();
    let mut body = Vec::new();
    for (name, xs, _) in &checks {
        let vars: Vec<Var> = xs
            .iter()
            .map(|_| {
                let v = Var(names.len() as u32);
                names.push(var_display_name(names.len()));
                v
            })
            .collect();
        body.push(wrap_forall(&vars, Literal::pos(head_term(name, &vars))));
    }
    b.push(CompiledProgram::nmr_key(), Clause::canonical(Term::atom(NMR_CHECK), body, &names));
    b.out.preds.retain(|_, clauses| !clauses.is_empty());
    b.out
}
