//! Programs, rules, literals and queries as read from source.

use crate::term::{write_term, Symbol, Term, Var};
use std::collections::HashMap;
use std::fmt::{self, Write};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ConstraintOp {
    /// Herbrand unification `=`.
    Unify,
    /// Constructive disequality `\=`.
    NotUnify,
    Lt,
    Gt,
    Le,
    Ge,
    /// Arithmetic equality `.=.` (also `#=` and `is`).
    ArithEq,
    /// Arithmetic disequality `.\=.`.
    ArithNe,
}

impl ConstraintOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ConstraintOp::Unify => "=",
            ConstraintOp::NotUnify => "\\=",
            ConstraintOp::Lt => ".<.",
            ConstraintOp::Gt => ".>.",
            ConstraintOp::Le => ".=<.",
            ConstraintOp::Ge => ".>=.",
            ConstraintOp::ArithEq => ".=.",
            ConstraintOp::ArithNe => ".\\=.",
        }
    }

    /// Operators whose disjunction is the complement of `self`.
    pub fn complement(self) -> Vec<ConstraintOp> {
        use ConstraintOp::*;
        match self {
            Unify => vec![NotUnify],
            NotUnify => vec![Unify],
            Lt => vec![Ge],
            Ge => vec![Lt],
            Le => vec![Gt],
            Gt => vec![Le],
            ArithEq => vec![Lt, Gt],
            ArithNe => vec![ArithEq],
        }
    }

    pub fn is_arithmetic(self) -> bool {
        !matches!(self, ConstraintOp::Unify | ConstraintOp::NotUnify)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Literal {
    /// A user-predicate call, possibly under default negation.
    Atom { negated: bool, atom: Term },
    Constraint { op: ConstraintOp, lhs: Term, rhs: Term },
    /// `forall(V, Goal)`; only produced by the compiler or read back from a dump.
    Forall { var: Var, goal: Box<Literal> },
}

impl Literal {
    pub fn pos(atom: Term) -> Literal {
        Literal::Atom { negated: false, atom }
    }

    pub fn neg(atom: Term) -> Literal {
        Literal::Atom { negated: true, atom }
    }

    pub fn constraint(op: ConstraintOp, lhs: Term, rhs: Term) -> Literal {
        Literal::Constraint { op, lhs, rhs }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Literal::Atom { atom, .. } => atom.collect_vars(out),
            Literal::Constraint { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Literal::Forall { var, goal } => {
                if !out.contains(var) {
                    out.push(*var);
                }
                goal.collect_vars(out);
            }
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Literal {
        match self {
            Literal::Atom { negated, atom } => Literal::Atom { negated: *negated, atom: f(atom) },
            Literal::Constraint { op, lhs, rhs } => {
                Literal::Constraint { op: *op, lhs: f(lhs), rhs: f(rhs) }
            }
            Literal::Forall { var, goal } => {
                let var = match f(&Term::Var(*var)) {
                    Term::Var(v) => v,
                    other => panic!("forall variable mapped to non-variable {other}"),
                };
                Literal::Forall { var, goal: Box::new(goal.map_terms(f)) }
            }
        }
    }

    pub fn offset(&self, base: u32) -> Literal {
        self.map_terms(&mut |t| t.offset(base))
    }

    /// The predicate this literal calls, if it is a user atom.
    pub fn pred_key(&self) -> Option<PredKey> {
        match self {
            Literal::Atom { negated, atom } => {
                atom.functor().map(|(f, n)| PredKey::new(f.clone(), n, *negated))
            }
            _ => None,
        }
    }
}

/// Predicate identity in the compiled database: name, arity and polarity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredKey {
    pub name: Symbol,
    pub arity: usize,
    pub negated: bool,
}

impl PredKey {
    pub fn new(name: Symbol, arity: usize, negated: bool) -> PredKey {
        PredKey { name, arity, negated }
    }

    pub fn dual(&self) -> PredKey {
        PredKey { negated: !self.negated, ..self.clone() }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not_{}/{}", self.name, self.arity)
        } else {
            write!(f, "{}/{}", self.name, self.arity)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Head {
    Atom { negated: bool, atom: Term },
    /// Headless global constraint `:- Body.`
    False,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
    /// Source names indexed by variable id (`0..var_names.len()`).
    pub var_names: Vec<String>,
}

impl Rule {
    pub fn is_constraint(&self) -> bool {
        matches!(self.head, Head::False)
    }

    pub fn head_atom(&self) -> Option<&Term> {
        match &self.head {
            Head::Atom { atom, .. } => Some(atom),
            Head::False => None,
        }
    }

    pub fn head_key(&self) -> Option<PredKey> {
        match &self.head {
            Head::Atom { negated, atom } => {
                atom.functor().map(|(f, n)| PredKey::new(f.clone(), n, *negated))
            }
            Head::False => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Directive {
    Show { name: Symbol, arity: usize },
    Query(Query),
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub directives: Vec<Directive>,
}

impl Program {
    pub fn show_set(&self) -> Vec<(Symbol, usize)> {
        self.directives
            .iter()
            .filter_map(|d| match d {
                Directive::Show { name, arity } => Some((name.clone(), *arity)),
                _ => None,
            })
            .collect()
    }

    pub fn embedded_query(&self) -> Option<&Query> {
        self.directives.iter().rev().find_map(|d| match d {
            Directive::Query(q) => Some(q),
            _ => None,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Query {
    pub goals: Vec<Literal>,
    pub var_names: Vec<String>,
}

/// Assigns printable, collision-free names to the variables of one clause.
pub struct VarNamer {
    names: HashMap<Var, String>,
}

impl VarNamer {
    pub fn new(var_names: &[String]) -> VarNamer {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for n in var_names {
            *counts.entry(n.as_str()).or_default() += 1;
        }
        let names = var_names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let unique = counts[n.as_str()] == 1 && n != "_" && !n.is_empty();
                let name = if unique { n.clone() } else { format!("_V{i}") };
                (Var(i as u32), name)
            })
            .collect();
        VarNamer { names }
    }

    pub fn name(&self, v: Var) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("_V{}", v.0))
    }
}

pub fn write_named_term<W: Write>(out: &mut W, t: &Term, namer: &VarNamer) -> fmt::Result {
    write_term(out, t, &mut |o: &mut W, v| o.write_str(&namer.name(v)))
}

pub fn write_literal<W: Write>(out: &mut W, lit: &Literal, namer: &VarNamer) -> fmt::Result {
    match lit {
        Literal::Atom { negated, atom } => {
            if *negated {
                out.write_str("not ")?;
            }
            write_named_term(out, atom, namer)
        }
        Literal::Constraint { op, lhs, rhs } => {
            write_named_term(out, lhs, namer)?;
            out.write_str(op.symbol())?;
            write_named_term(out, rhs, namer)
        }
        Literal::Forall { var, goal } => {
            write!(out, "forall({},", namer.name(*var))?;
            write_literal(out, goal, namer)?;
            out.write_char(')')
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let namer = VarNamer::new(&self.var_names);
        let mut s = String::new();
        match &self.head {
            Head::Atom { negated, atom } => {
                if *negated {
                    s.push_str("not ");
                }
                write_named_term(&mut s, atom, &namer)?;
            }
            Head::False => {}
        }
        if !self.body.is_empty() {
            s.push_str(if matches!(self.head, Head::False) { ":- " } else { " :- " });
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_literal(&mut s, lit, &namer)?;
            }
        }
        s.push('.');
        f.write_str(&s)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let namer = VarNamer::new(&self.var_names);
        let mut s = String::from("?- ");
        for (i, lit) in self.goals.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            write_literal(&mut s, lit, &namer)?;
        }
        s.push('.');
        f.write_str(&s)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        for d in &self.directives {
            match d {
                Directive::Show { name, arity } => writeln!(f, "#show {name}/{arity}.")?,
                Directive::Query(q) => writeln!(f, "{q}")?,
            }
        }
        Ok(())
    }
}
