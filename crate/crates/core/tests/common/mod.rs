//! Shared helpers and property checks for the integration test targets.
#![allow(dead_code)]

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use scasp::ast::Query;
use scasp::compile::{compile, CompiledProgram};
use scasp::env::Env;
use scasp::interp::{Answer, Solver};
use scasp::linear::{complement, LinConstraint, LinExpr, LinearStore, Rel};
use scasp::oracle;
use scasp::output;
use scasp::parser::{parse_program, parse_query};
use scasp::store::{self, StoreView};
use scasp::term::{int, rat, Rational, Term, Var};
use std::collections::BTreeSet;

pub fn program_path(name: &str) -> String {
    format!("{}/programs/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn read_program(name: &str) -> String {
    std::fs::read_to_string(program_path(name)).expect("bundled program")
}

pub fn compile_src(src: &str) -> CompiledProgram {
    compile(&parse_program(src).expect("program parses"))
}

pub fn query(text: &str) -> Query {
    parse_query(text).expect("query parses")
}

/// At most `limit` answers of `q` against `cp`.
pub fn answers(cp: &CompiledProgram, q: &str, limit: usize) -> Vec<Answer> {
    Solver::new(cp, &query(q)).take(limit).collect()
}

/// The answers of the query embedded in the source.
pub fn embedded_answers(src: &str, limit: usize) -> (CompiledProgram, Vec<Answer>) {
    let program = parse_program(src).expect("program parses");
    let q = program.embedded_query().expect("embedded query").clone();
    let cp = compile(&program);
    let out = Solver::new(&cp, &q).take(limit).collect();
    (cp, out)
}

/// Bindings as `Name = value` lines.
pub fn binding_lines(a: &Answer) -> Vec<String> {
    output::bindings(a).into_iter().map(|(n, v)| format!("{n} = {v}")).collect()
}

fn sample_rational(rng: &mut StdRng) -> Rational {
    match rng.gen_range(0..3) {
        0 => int(rng.gen_range(-8..=8)),
        1 => rat(rng.gen_range(-32..=32), 4),
        _ => rat(rng.gen_range(-1000..=1000), rng.gen_range(1..=97)),
    }
}

// ---------------------------------------------------------------------------
// Random ground programs checked against the oracle.

#[derive(Clone, Debug)]
pub struct GroundSpec {
    pub atoms: usize,
    /// Head atom (none for a headless rule) and body literals `(atom, negated)`.
    pub rules: Vec<(Option<usize>, Vec<(usize, bool)>)>,
}

impl GroundSpec {
    pub fn source(&self) -> String {
        let mut out = String::new();
        for (head, body) in &self.rules {
            if head.is_none() && body.is_empty() {
                continue;
            }
            let lits: Vec<String> =
                body.iter().map(|(a, neg)| if *neg { format!("not a{a}") } else { format!("a{a}") }).collect();
            match (head, lits.is_empty()) {
                (Some(h), true) => out.push_str(&format!("a{h}.\n")),
                (Some(h), false) => out.push_str(&format!("a{h} :- {}.\n", lits.join(", "))),
                (None, _) => out.push_str(&format!(":- {}.\n", lits.join(", "))),
            }
        }
        out
    }
}

/// Propositional programs with up to 12 atoms and 15 rules.
pub fn ground_programs() -> impl Strategy<Value = GroundSpec> {
    (1usize..=12).prop_flat_map(|n| {
        let lit = (0..n, any::<bool>());
        let rule = (prop::option::weighted(0.85, 0..n), prop::collection::vec(lit, 0..=3));
        (Just(n), prop::collection::vec(rule, 1..=15))
            .prop_map(|(atoms, rules)| GroundSpec { atoms, rules })
    })
}

/// Programs whose positive and negative dependencies all point to higher
/// numbered atoms, without headless rules.
pub fn acyclic_programs() -> impl Strategy<Value = GroundSpec> {
    (2usize..=10).prop_flat_map(|n| {
        let rule = (0..n - 1).prop_flat_map(move |h| {
            let lit = (h + 1..n, any::<bool>());
            (Just(Some(h)), prop::collection::vec(lit, 0..=3))
        });
        (Just(n), prop::collection::vec(rule, 1..=15))
            .prop_map(|(atoms, rules)| GroundSpec { atoms, rules })
    })
}

const ANSWER_LIMIT: usize = 500;

fn model_set(cp: &CompiledProgram, a: &Answer) -> BTreeSet<String> {
    a.model(cp).iter().map(|t| t.to_string()).collect()
}

/// Every answer's partial model extends to a stable model, and every stable
/// model containing the query atom covers the partial model of some answer.
pub fn check_oracle_agreement(spec: &GroundSpec) -> Result<(), String> {
    let src = spec.source();
    let program = parse_program(&src).map_err(|e| format!("{e}\n{src}"))?;
    let gp = oracle::ground(&program).map_err(|e| format!("{e}\n{src}"))?;
    let models: Vec<BTreeSet<String>> =
        oracle::stable_models(&gp).iter().map(|m| m.iter().map(|t| t.to_string()).collect()).collect();
    let cp = compile(&program);
    for i in 0..spec.atoms {
        let atom = format!("a{i}");
        let found: Vec<BTreeSet<String>> =
            answers(&cp, &format!("?- {atom}."), ANSWER_LIMIT).iter().map(|a| model_set(&cp, a)).collect();
        for m in &found {
            if !models.iter().any(|sm| m.is_subset(sm)) {
                return Err(format!("answer {m:?} for {atom} is in no stable model {models:?}\n{src}"));
            }
        }
        for sm in models.iter().filter(|sm| sm.contains(&atom)) {
            if !found.iter().any(|m| m.is_subset(sm)) {
                return Err(format!("stable model {sm:?} unreachable from {atom}; answers {found:?}\n{src}"));
            }
        }
    }
    Ok(())
}

/// On acyclic programs exactly one of `a` and `not a` succeeds, matching the
/// unique stable model.
pub fn check_dual_completeness(spec: &GroundSpec) -> Result<(), String> {
    let src = spec.source();
    let program = parse_program(&src).map_err(|e| e.to_string())?;
    let models = oracle::stable_models(&oracle::ground(&program).map_err(|e| e.to_string())?);
    if models.len() != 1 {
        return Err(format!("acyclic program with {} stable models\n{src}", models.len()));
    }
    let cp = compile(&program);
    for i in 0..spec.atoms {
        let atom = format!("a{i}");
        let pos = !answers(&cp, &format!("?- {atom}."), 1).is_empty();
        let neg = !answers(&cp, &format!("?- not {atom}."), 1).is_empty();
        let truth = models[0].iter().any(|t| t.to_string() == atom);
        if pos == neg || pos != truth {
            return Err(format!("{atom}: positive {pos}, negative {neg}, stable {truth}\n{src}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Single-variable stores and linear constraints.

/// Satisfiable interval stores with small integer bounds.
pub fn interval_stores() -> impl Strategy<Value = StoreView> {
    let bound = prop::option::of((-5i64..=5, any::<bool>()));
    (bound.clone(), bound, prop::collection::vec(-5i64..=5, 0..=2)).prop_filter_map(
        "inconsistent bounds",
        |(lo, hi, neqs)| {
            store::interval(
                lo.map(|(q, s)| (int(q), s)),
                hi.map(|(q, s)| (int(q), s)),
                neqs.into_iter().map(int).collect(),
            )
        },
    )
}

/// Any single-variable store, over rationals or over the constants `a..c`.
pub fn stores() -> impl Strategy<Value = StoreView> {
    let constant = prop::sample::select(vec!["a", "b", "c"]).prop_map(Term::atom);
    prop_oneof![
        3 => interval_stores(),
        1 => Just(StoreView::Top),
        1 => prop::collection::btree_set(prop::sample::select(vec!["a", "b", "c"]), 1..=3)
            .prop_map(|s| StoreView::Herbrand(s.into_iter().map(Term::atom).collect())),
        1 => constant.prop_map(StoreView::Bound),
        1 => (-5i64..=5).prop_map(|q| StoreView::Bound(Term::int(q))),
    ]
}

pub fn rels() -> impl Strategy<Value = Rel> {
    prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt, Rel::Ne])
}

fn lin_expr(coeffs: &[i64], constant: i64) -> LinExpr {
    let mut e = LinExpr::constant(int(constant));
    for (i, c) in coeffs.iter().enumerate() {
        e.add_term(Var(i as u32), &int(*c));
    }
    e
}

/// Constraints `c0*X0 + c1*X1 + k rel 0`.
pub fn lin_constraints() -> impl Strategy<Value = LinConstraint> {
    (prop::collection::vec(-3i64..=3, 2), -5i64..=5, rels())
        .prop_map(|(cs, k, rel)| LinConstraint::new(lin_expr(&cs, k), rel))
}

fn sample_values(store: &StoreView, rng: &mut StdRng, n: usize) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    if !matches!(store, StoreView::Linear(_)) {
        out.extend(["a", "b", "c", "d"].iter().map(|s| Term::atom(s)));
    }
    if let StoreView::Linear(iv) = store {
        for e in iv.lo.iter().chain(iv.hi.iter()) {
            out.push(Term::Num(e.value.clone()));
        }
        out.extend(iv.neqs.iter().cloned().map(Term::Num));
    }
    while out.len() < n {
        out.push(Term::Num(sample_rational(rng)));
    }
    out
}

/// A value satisfies the store exactly when it satisfies none of the dual
/// pieces, and the store conjoined with its dual pieces is inconsistent.
pub fn check_store_complement(store: &StoreView, seed: u64) -> Result<(), String> {
    let duals = store::dual(store).ok_or_else(|| format!("no dual for {store}"))?;
    if !store::add(&duals, store).is_empty() {
        return Err(format!("{store} is consistent with its own dual {duals:?}"));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    for v in sample_values(store, &mut rng, 1000) {
        let inside = store.admits(&v);
        let outside = duals.iter().any(|d| d.admits(&v));
        if inside == outside {
            return Err(format!("{v}: in store {inside}, in dual {outside}; store {store}, dual {duals:?}"));
        }
    }
    Ok(())
}

/// Every sampled point satisfies exactly one of `c` and the members of its complement.
pub fn check_constraint_complement(c: &LinConstraint, seed: u64) -> Result<(), String> {
    let comp = complement(c);
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..1000 {
        let point = [sample_rational(&mut rng), sample_rational(&mut rng)];
        let assign = |v: Var| point[v.0 as usize].clone();
        let hits = usize::from(c.holds_at(&assign)) + comp.iter().filter(|d| d.holds_at(&assign)).count();
        if hits != 1 {
            return Err(format!("{:?} satisfies {hits} of {c:?} and {comp:?}", point));
        }
    }
    Ok(())
}

/// Stores over at most four variables.
#[derive(Clone, Debug)]
pub struct LinearCase {
    /// Coefficients of X0..X3, constant, relation.
    pub constraints: Vec<([i64; 4], i64, Rel)>,
    pub keep: BTreeSet<Var>,
}

impl LinearCase {
    pub fn lin(&self) -> Vec<LinConstraint> {
        self.constraints.iter().map(|(cs, k, rel)| LinConstraint::new(lin_expr(cs, *k), *rel)).collect()
    }

    fn holds_int(&self, p: &[i64; 4]) -> bool {
        self.constraints.iter().all(|(cs, k, rel)| {
            let v: i64 = cs.iter().zip(p).map(|(c, x)| c * x).sum::<i64>() + k;
            rel.holds(&int(v))
        })
    }
}

pub fn linear_cases() -> impl Strategy<Value = LinearCase> {
    let rel = prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Le, Rel::Ge, Rel::Ge, Rel::Gt, Rel::Eq]);
    let constraint = (prop::array::uniform4(-3i64..=3), -5i64..=5, rel);
    (prop::collection::vec(constraint, 1..=8), 1u8..15).prop_map(|(constraints, mask)| LinearCase {
        constraints,
        keep: (0..4).filter(|i| mask & (1 << i) != 0).map(Var).collect(),
    })
}

const GRID: std::ops::RangeInclusive<i64> = -5..=5;

fn grid_points(dims: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dims {
        out = out.into_iter().flat_map(|p| GRID.map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Checks the projection onto the kept variables against the store on the
/// 11^4 grid: points of the store project into the projection, and a kept
/// point satisfies the projection exactly when the store extends it.
pub fn check_projection(case: &LinearCase) -> Result<(), String> {
    let Ok(store) = LinearStore::from_constraints(&case.lin()) else {
        return Ok(());
    };
    let proj = store.project(&case.keep);
    if let Some(v) = proj.vars().iter().find(|v| !case.keep.contains(v)) {
        return Err(format!("projection mentions {v:?}: {proj:?}"));
    }
    let keep: Vec<Var> = case.keep.iter().copied().collect();
    let mut shadow = BTreeSet::new();
    for p in grid_points(4) {
        let p: [i64; 4] = p.try_into().unwrap();
        if case.holds_int(&p) {
            shadow.insert(keep.iter().map(|v| p[v.0 as usize]).collect::<Vec<_>>());
        }
    }
    for q in grid_points(keep.len()) {
        let value = |v: Var| int(q[keep.iter().position(|k| *k == v).unwrap()]);
        let in_proj = proj.satisfied_by(&|v| if case.keep.contains(&v) { value(v) } else { Rational::default() });
        let mut fixed = store.clone();
        let extends = keep.iter().all(|v| {
            fixed
                .assert(&LinConstraint::compare(&LinExpr::var(*v), Rel::Eq, &LinExpr::constant(value(*v))))
                .is_ok()
        });
        if in_proj != extends {
            return Err(format!("at {q:?}: projection {in_proj}, extension {extends}; {proj:?}"));
        }
        if shadow.contains(&q) && !in_proj {
            return Err(format!("grid point over {q:?} satisfies the store but not the projection"));
        }
    }
    Ok(())
}

/// A satisfiable store has a witness that satisfies every original constraint.
pub fn check_witness(case: &LinearCase) -> Result<(), String> {
    let cs = case.lin();
    let Ok(store) = LinearStore::from_constraints(&cs) else {
        return Ok(());
    };
    let w = store.witness().ok_or("satisfiable store without witness")?;
    let assign = |v: Var| w.get(&v).cloned().unwrap_or_default();
    match cs.iter().find(|c| !c.holds_at(&assign)) {
        Some(c) => Err(format!("witness {w:?} violates {c:?}")),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Herbrand disequality.

const CONSTANTS: [&str; 3] = ["a", "b", "c"];

fn leaf(with_vars: bool) -> BoxedStrategy<Term> {
    let c = prop::sample::select(CONSTANTS.to_vec()).prop_map(Term::atom);
    if with_vars {
        prop_oneof![c, (0u32..2).prop_map(Term::var)].boxed()
    } else {
        c.boxed()
    }
}

/// Terms of depth at most two over `a..c`, `f/2`, `g/1` and optionally `X`, `Y`.
pub fn small_terms(with_vars: bool) -> impl Strategy<Value = Term> {
    leaf(with_vars).prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::compound("f", vec![a, b])),
            inner.prop_map(|a| Term::compound("g", vec![a])),
        ]
    })
}

/// Over all instantiations of `X`, `Y` by `a..c`, some alternative of
/// `s \= t` accepts the instance exactly when the instance differs from `t`.
pub fn check_diseq_exhaustive(s: &Term, t: &Term) -> Result<(), String> {
    let mut env = Env::new();
    env.reserve(2);
    let alts = env.assert_diseq(s, t);
    for x in CONSTANTS {
        for y in CONSTANTS {
            let sub = [Term::atom(x), Term::atom(y)];
            let accepted = alts.iter().any(|alt| {
                let mut e = alt.clone();
                e.unify(&Term::var(0), &sub[0]).is_ok() && e.unify(&Term::var(1), &sub[1]).is_ok()
            });
            let instance = s.map_vars(&mut |v| sub[v.0 as usize].clone());
            if accepted != (instance != *t) {
                return Err(format!("{s} \\= {t} at X={x}, Y={y}: accepted {accepted}"));
            }
        }
    }
    Ok(())
}

/// Binding a variable succeeds exactly for values outside its forbidden set.
pub fn check_forbidden_set(forbidden: &BTreeSet<&str>) -> Result<(), String> {
    let mut env = Env::new();
    let x = env.fresh_var();
    for f in forbidden {
        let mut alts = env.assert_diseq(&Term::Var(x), &Term::atom(f));
        if alts.len() != 1 {
            return Err(format!("X \\= {f} gave {} alternatives", alts.len()));
        }
        env = alts.pop().unwrap();
    }
    for v in ["a", "b", "c", "fresh1", "fresh2"] {
        let ok = env.check_binding(x, &Term::atom(v)).is_ok();
        let unify_ok = env.clone().unify(&Term::Var(x), &Term::atom(v)).is_ok();
        let expected = !forbidden.contains(v);
        if ok != expected || unify_ok != expected {
            return Err(format!("binding to {v}: check {ok}, unify {unify_ok}, forbidden {forbidden:?}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Universal quantification over the rationals.

/// Clause bodies for `p(X)`, each a conjunction of `X rel k`.
pub fn interval_programs() -> impl Strategy<Value = Vec<Vec<(Rel, i64)>>> {
    let rel = prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Ge, Rel::Gt, Rel::Ne]);
    prop::collection::vec(prop::collection::vec((rel, -4i64..=4), 1..=2), 1..=4)
}

fn interval_source(clauses: &[Vec<(Rel, i64)>]) -> String {
    clauses
        .iter()
        .map(|body| {
            let lits: Vec<String> = body.iter().map(|(r, k)| format!("X{}{k}", r.symbol())).collect();
            format!("p(X) :- {}.\n", lits.join(", "))
        })
        .collect()
}

fn holds_ground(cp: &CompiledProgram, q: &Rational) -> bool {
    let goal = scasp::ast::Literal::pos(Term::compound("p", vec![Term::Num(q.clone())]));
    let query = Query { goals: vec![goal], var_names: vec![] };
    Solver::new(cp, &query).next().is_some()
}

/// When `forall(X,p(X))` succeeds, `p(v)` holds for sampled rationals `v`;
/// when it fails, some value refutes `p`.
pub fn check_forall_witness(clauses: &[Vec<(Rel, i64)>], seed: u64) -> Result<(), String> {
    let src = interval_source(clauses);
    let cp = compile_src(&src);
    let holds = !answers(&cp, "?- forall(X,p(X)).", 1).is_empty();
    let truth = |q: &Rational| clauses.iter().any(|b| b.iter().all(|(r, k)| r.holds(&(q - int(*k)))));
    if holds {
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..100 {
            let q = sample_rational(&mut rng);
            if !holds_ground(&cp, &q) {
                return Err(format!("forall succeeded but p({q}) fails\n{src}"));
            }
        }
    } else {
        let mut candidates: Vec<Rational> = (-10..=10).map(|k| rat(k, 2)).collect();
        candidates.extend([int(-1000), int(1000)]);
        let witness = candidates.into_iter().find(|q| !truth(q));
        let Some(w) = witness else {
            return Err(format!("forall failed but no refuting value exists\n{src}"));
        };
        if holds_ground(&cp, &w) {
            return Err(format!("p({w}) succeeds although {w} satisfies no clause\n{src}"));
        }
    }
    Ok(())
}
