//! Constructive disequality over Herbrand terms. A variable may only be
//! constrained against ground terms; the constraint is kept as a forbidden
//! set on the variable and checked whenever the variable is bound.

use crate::env::{Env, Outcome, Fail};
use crate::linear::Rel;
use crate::term::{Term, Var};

/// A variable compared with a non-ground term, which disequality constraints cannot express.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("nonground_disequality: {var} \\= {term}")]
pub struct NongroundDisequality {
    pub var: Term,
    pub term: Term,
}

/// Outcome of asserting a disequality.
#[derive(Clone, Debug)]
pub struct Disequality {
    /// One environment per backtracking alternative.
    pub alternatives: Vec<Env>,
    pub nonground: Option<NongroundDisequality>,
}

impl Env {
    /// Checks that binding `v` to the ground term `value` respects its forbidden set.
    pub fn check_binding(&self, v: Var, value: &Term) -> Outcome {
        match self.forbidden.get(&v) {
            Some(list) if list.iter().any(|f| f == value) => Err(Fail),
            _ => Ok(()),
        }
    }

    fn forbid(&mut self, v: Var, t: Term) {
        let mut list = self.forbidden.get(&v).cloned().unwrap_or_default();
        if !list.contains(&t) {
            list.push_back(t);
        }
        self.forbidden.insert(v, list);
    }

    /// Asserts `a \= b`, routing to the linear solver when a numeric
    /// variable is compared with a number or arithmetic term. Each returned
    /// environment is one backtracking alternative; none means failure.
    /// Positions comparing a variable with a non-ground term contribute no
    /// alternative.
    pub fn assert_diseq(&self, a: &Term, b: &Term) -> Vec<Env> {
        self.disequality(a, b).alternatives
    }

    /// Like [`Env::assert_diseq`], but reports a comparison of a variable
    /// with a non-ground term as an error.
    pub fn try_assert_diseq(&self, a: &Term, b: &Term) -> Result<Vec<Env>, NongroundDisequality> {
        let d = self.disequality(a, b);
        match d.nonground {
            Some(e) => Err(e),
            None => Ok(d.alternatives),
        }
    }

    /// The alternatives of `a \= b` together with the first non-ground
    /// comparison encountered, if any.
    pub fn disequality(&self, a: &Term, b: &Term) -> Disequality {
        let mut nonground = None;
        let alternatives = self.diseq_into(a, b, &mut nonground);
        Disequality { alternatives, nonground }
    }

    fn diseq_into(&self, a: &Term, b: &Term, nonground: &mut Option<NongroundDisequality>) -> Vec<Env> {
        let da = self.deref(a);
        let db = self.deref(b);
        let numeric_var = |t: &Term| matches!(t, Term::Var(v) if self.is_numeric(*v));
        if numeric_var(&da) || numeric_var(&db) {
            let (x, other) = if numeric_var(&da) { (&da, &db) } else { (&db, &da) };
            if self.is_arith_expr(other) {
                let mut env = self.clone();
                return match env.arith(x, Rel::Ne, other) {
                    Ok(()) => vec![env],
                    Err(Fail) => vec![],
                };
            }
            if matches!(other, Term::Atom(_) | Term::Compound(..)) {
                return vec![self.clone()];
            }
        }
        self.neq_into(&da, &db, nonground)
    }

    /// Herbrand disequality: fails on identical terms, succeeds on
    /// non-unifiable terms, records a forbidden value for a variable
    /// against a ground term, and splits compound terms into one
    /// alternative per argument position.
    pub fn neq_alternatives(&self, a: &Term, b: &Term) -> Vec<Env> {
        self.neq_into(a, b, &mut None)
    }

    fn neq_into(&self, a: &Term, b: &Term, nonground: &mut Option<NongroundDisequality>) -> Vec<Env> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        if a == b {
            return vec![];
        }
        if self.clone().unify(&a, &b).is_err() {
            return vec![self.clone()];
        }
        match (&a, &b) {
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if !t.is_ground() {
                    nonground.get_or_insert_with(|| NongroundDisequality { var: Term::Var(*x), term: t.clone() });
                    return vec![];
                }
                let mut env = self.clone();
                if env.is_numeric(*x) {
                    match env.arith(&Term::Var(*x), Rel::Ne, t) {
                        Ok(()) => vec![env],
                        Err(Fail) => vec![],
                    }
                } else {
                    env.forbid(*x, t.clone());
                    vec![env]
                }
            }
            (Term::Compound(_, xs), Term::Compound(_, ys)) => xs
                .iter()
                .zip(ys.iter())
                .filter(|(s, t)| s != t)
                .flat_map(|(s, t)| self.diseq_into(s, t, nonground))
                .collect(),
            _ => vec![],
        }
    }
}
