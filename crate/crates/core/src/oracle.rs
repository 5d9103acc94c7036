//! Reference semantics for small programs: a naive grounder and a
//! brute-force stable model enumerator based on the Gelfond-Lifschitz reduct.

use crate::ast::{ConstraintOp, Head, Literal, Program, Rule};
use crate::term::{Term, Var};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

pub const DEFAULT_ATOM_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("unsafe_rule: {0}")]
    UnsafeRule(String),
    #[error("universe_too_large: {atoms} atoms exceed the cap of {cap}")]
    UniverseTooLarge { atoms: usize, cap: usize },
    #[error("unsupported constraint in rule: {0}")]
    Constraint(String),
}

/// A ground rule over atom indices; `head == None` is a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    pub head: Option<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    pub atoms: Vec<Term>,
    index: HashMap<Term, usize>,
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    fn atom(&mut self, t: Term) -> usize {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.atoms.push(t.clone());
        self.index.insert(t, self.atoms.len() - 1);
        self.atoms.len() - 1
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Atoms that head some rule; only these can be true.
    fn head_atoms(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.rules.iter().filter_map(|r| r.head).collect();
        set.into_iter().collect()
    }
}

fn constants(t: &Term, out: &mut BTreeSet<Term>) {
    match t {
        Term::Atom(_) | Term::Num(_) => {
            out.insert(t.clone());
        }
        Term::Compound(_, args) => args.iter().for_each(|a| constants(a, out)),
        Term::Var(_) => {}
    }
}

fn rule_constants(r: &Rule, out: &mut BTreeSet<Term>) {
    if let Some(h) = r.head_atom() {
        h.args().iter().for_each(|a| constants(a, out));
    }
    for l in &r.body {
        match l {
            Literal::Atom { atom, .. } => atom.args().iter().for_each(|a| constants(a, out)),
            Literal::Constraint { lhs, rhs, .. } => {
                constants(lhs, out);
                constants(rhs, out);
            }
            Literal::Forall { .. } => {}
        }
    }
}

fn substitute(t: &Term, sub: &HashMap<Var, Term>) -> Term {
    t.map_vars(&mut |v| sub[&v].clone())
}

/// Instantiates every rule over the program's constants.
pub fn ground(program: &Program) -> Result<GroundProgram, GroundError> {
    ground_with_cap(program, DEFAULT_ATOM_CAP)
}

pub fn ground_with_cap(program: &Program, cap: usize) -> Result<GroundProgram, GroundError> {
    let mut universe = BTreeSet::new();
    for r in &program.rules {
        if r.body.iter().any(|l| matches!(l, Literal::Forall { .. })) {
            return Err(GroundError::Constraint(r.to_string()));
        }
        for l in &r.body {
            if let Literal::Constraint { op, .. } = l {
                if !matches!(op, ConstraintOp::Unify | ConstraintOp::NotUnify) {
                    return Err(GroundError::Constraint(r.to_string()));
                }
            }
        }
        rule_constants(r, &mut universe);
    }
    let universe: Vec<Term> = universe.into_iter().collect();
    let mut gp = GroundProgram::default();
    for r in &program.rules {
        let mut vars = Vec::new();
        if let Some(h) = r.head_atom() {
            h.collect_vars(&mut vars);
        }
        for l in &r.body {
            l.collect_vars(&mut vars);
        }
        let mut choice = vec![0usize; vars.len()];
        if !vars.is_empty() && universe.is_empty() {
            return Err(GroundError::UnsafeRule(r.to_string()));
        }
        loop {
            let sub: HashMap<Var, Term> =
                vars.iter().zip(&choice).map(|(v, &i)| (*v, universe[i].clone())).collect();
            instantiate(r, &sub, &mut gp);
            // odometer over the universe
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < universe.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
        let heads = gp.head_atoms().len();
        if heads > cap {
            return Err(GroundError::UniverseTooLarge { atoms: heads, cap });
        }
    }
    Ok(gp)
}

fn instantiate(r: &Rule, sub: &HashMap<Var, Term>, gp: &mut GroundProgram) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for l in &r.body {
        match l {
            Literal::Atom { negated, atom } => {
                let a = gp.atom(substitute(atom, sub));
                if *negated {
                    neg.push(a);
                } else {
                    pos.push(a);
                }
            }
            Literal::Constraint { op, lhs, rhs } => {
                let equal = substitute(lhs, sub) == substitute(rhs, sub);
                let holds = if *op == ConstraintOp::Unify { equal } else { !equal };
                if !holds {
                    return;
                }
            }
            Literal::Forall { .. } => unreachable!("rejected before grounding"),
        }
    }
    let head = match &r.head {
        Head::Atom { atom, .. } => Some(gp.atom(substitute(atom, sub))),
        Head::False => None,
    };
    let rule = GroundRule { head, pos, neg };
    if !gp.rules.contains(&rule) {
        gp.rules.push(rule);
    }
}

/// Least model of the reduct of `gp` with respect to `interp`.
fn reduct_least_model(gp: &GroundProgram, interp: &[bool]) -> Vec<bool> {
    let mut model = vec![false; gp.atoms.len()];
    loop {
        let mut changed = false;
        for r in &gp.rules {
            let Some(h) = r.head else { continue };
            if model[h] || r.neg.iter().any(|&a| interp[a]) {
                continue;
            }
            if r.pos.iter().all(|&a| model[a]) {
                model[h] = true;
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

fn violates_constraint(gp: &GroundProgram, interp: &[bool]) -> bool {
    gp.rules.iter().any(|r| {
        r.head.is_none() && r.pos.iter().all(|&a| interp[a]) && r.neg.iter().all(|&a| !interp[a])
    })
}

/// All stable models, each as a set of ground atoms, in sorted order.
pub fn stable_models(gp: &GroundProgram) -> Vec<BTreeSet<Term>> {
    let candidates = gp.head_atoms();
    let n = candidates.len();
    assert!(n < usize::BITS as usize, "too many atoms to enumerate");
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let mut interp = vec![false; gp.atoms.len()];
        for (bit, &a) in candidates.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                interp[a] = true;
            }
        }
        if reduct_least_model(gp, &interp) == interp && !violates_constraint(gp, &interp) {
            out.push(
                interp
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| gp.atoms[i].clone())
                    .collect(),
            );
        }
    }
    out.sort();
    out
}

/// Whether `model` satisfies every rule of the ground program.
pub fn is_model(gp: &GroundProgram, model: &BTreeSet<Term>) -> bool {
    let holds = |a: usize| model.contains(&gp.atoms[a]);
    gp.rules.iter().all(|r| {
        let body = r.pos.iter().all(|&a| holds(a)) && r.neg.iter().all(|&a| !holds(a));
        !body || r.head.is_some_and(holds)
    })
}
