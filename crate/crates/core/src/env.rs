//! The binding environment of one derivation: substitution, disequality
//! store and linear store, all persistent so that snapshots are cheap.

use crate::linear::{LinConstraint, LinExpr, LinearStore, Rel, Unsat};
use crate::term::{Rational, Term, Var};
use num_traits::Zero;
use std::sync::Arc;

#[derive(Clone, Debug, Default)]
pub struct Env {
    pub(crate) bindings: im::HashMap<Var, Term>,
    /// Herbrand variables and the ground terms they must not equal, in insertion order.
    pub(crate) forbidden: im::HashMap<Var, im::Vector<Term>>,
    /// Variables known to range over the rationals.
    pub(crate) numeric: im::HashSet<Var>,
    pub(crate) lin: Arc<LinearStore>,
    next_var: u32,
}

/// Failure of a constraint operation; normal control flow.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fail;

impl From<Unsat> for Fail {
    fn from(_: Unsat) -> Fail {
        Fail
    }
}

pub type Outcome = Result<(), Fail>;

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Reserves `n` consecutive fresh variable ids and returns the first.
    pub fn fresh_block(&mut self, n: u32) -> u32 {
        let base = self.next_var;
        self.next_var += n;
        base
    }

    pub fn fresh_var(&mut self) -> Var {
        Var(self.fresh_block(1))
    }

    /// Ensures future fresh ids do not collide with ids below `n`.
    pub fn reserve(&mut self, n: u32) {
        self.next_var = self.next_var.max(n);
    }

    pub fn is_numeric(&self, v: Var) -> bool {
        self.numeric.contains(&v)
    }

    pub fn linear(&self) -> &LinearStore {
        &self.lin
    }

    pub fn forbidden_of(&self, v: Var) -> Vec<Term> {
        self.forbidden.get(&v).map(|f| f.iter().cloned().collect()).unwrap_or_default()
    }

    /// Follows variable bindings at the top level only.
    pub fn deref(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.bindings.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    pub fn deref_var(&self, v: Var) -> Term {
        self.deref(&Term::Var(v))
    }

    /// Applies the substitution throughout `t`.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Compound(f, args) => {
                if args.iter().all(|a| !self.has_bound_var(a)) {
                    Term::Compound(f, args)
                } else {
                    Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect())
                }
            }
            other => other,
        }
    }

    fn has_bound_var(&self, t: &Term) -> bool {
        match t {
            Term::Var(v) => self.bindings.contains_key(v),
            Term::Compound(_, args) => args.iter().any(|a| self.has_bound_var(a)),
            _ => false,
        }
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(w) => w == v,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> Outcome {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(&x);
            let y = self.deref(&y);
            match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v == w => {}
                (Term::Var(v), _) => self.bind(*v, &y)?,
                (_, Term::Var(w)) => self.bind(*w, &x)?,
                (Term::Atom(p), Term::Atom(q)) => {
                    if p != q {
                        return Err(Fail);
                    }
                }
                (Term::Num(p), Term::Num(q)) => {
                    if p != q {
                        return Err(Fail);
                    }
                }
                (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return Err(Fail);
                    }
                    for (s, t) in xs.iter().zip(ys.iter()).rev() {
                        stack.push((s.clone(), t.clone()));
                    }
                }
                _ => return Err(Fail),
            }
        }
        Ok(())
    }

    /// Binds the unbound variable `v` to the dereferenced term `t`.
    fn bind(&mut self, v: Var, t: &Term) -> Outcome {
        match t {
            Term::Var(w) => self.bind_vars(v, *w),
            Term::Num(q) => {
                if self.is_numeric(v) {
                    self.assert_lin(&LinConstraint::new(
                        LinExpr::var(v).sub(&LinExpr::constant(q.clone())),
                        Rel::Eq,
                    ))
                } else {
                    self.check_binding(v, t)?;
                    self.forbidden.remove(&v);
                    self.bindings.insert(v, t.clone());
                    Ok(())
                }
            }
            _ => {
                if self.is_numeric(v) || self.occurs(v, t) {
                    return Err(Fail);
                }
                let forbidden = self.forbidden.remove(&v);
                self.bindings.insert(v, t.clone());
                if let Some(forbidden) = forbidden {
                    let value = self.resolve(t);
                    for f in forbidden.iter() {
                        self.exclude(&value, f)?;
                    }
                }
                Ok(())
            }
        }
    }

    fn bind_vars(&mut self, v: Var, w: Var) -> Outcome {
        let (from, to) = match (self.is_numeric(v), self.is_numeric(w)) {
            (false, true) => (v, w),
            (true, false) => (w, v),
            _ if v > w => (v, w),
            _ => (w, v),
        };
        self.bindings.insert(from, Term::Var(to));
        let moved = self.forbidden.remove(&from);
        if self.is_numeric(from) {
            let mut lin = (*self.lin).clone();
            lin.alias(from, to)?;
            self.lin = Arc::new(lin);
            self.export_fixed();
        }
        if let Some(moved) = moved {
            if self.is_numeric(to) {
                for f in moved.iter() {
                    if let Term::Num(q) = f {
                        self.assert_lin(&LinConstraint::new(
                            LinExpr::var(to).sub(&LinExpr::constant(q.clone())),
                            Rel::Ne,
                        ))?;
                    }
                }
            } else {
                let mut list = self.forbidden.get(&to).cloned().unwrap_or_default();
                for f in moved {
                    if !list.contains(&f) {
                        list.push_back(f);
                    }
                }
                self.forbidden.insert(to, list);
            }
        }
        Ok(())
    }

    /// After binding a variable to a non-ground value, re-establishes a
    /// disequality it carried against ground term `f`.
    fn exclude(&mut self, value: &Term, f: &Term) -> Outcome {
        let mut probe = self.clone();
        if probe.unify(value, f).is_err() {
            return Ok(());
        }
        let mut alternatives = self.assert_diseq(value, f);
        if alternatives.len() == 1 {
            *self = alternatives.pop().unwrap();
            Ok(())
        } else {
            Err(Fail)
        }
    }

    /// Marks `v` as ranging over the rationals, moving numeric disequalities
    /// into the linear store and dropping symbolic ones.
    pub fn mark_numeric(&mut self, v: Var) -> Outcome {
        if self.is_numeric(v) {
            return Ok(());
        }
        self.numeric.insert(v);
        if let Some(forbidden) = self.forbidden.remove(&v) {
            for f in forbidden.iter() {
                if let Term::Num(q) = f {
                    self.assert_lin(&LinConstraint::new(
                        LinExpr::var(v).sub(&LinExpr::constant(q.clone())),
                        Rel::Ne,
                    ))?;
                }
            }
        }
        Ok(())
    }

    pub fn assert_lin(&mut self, c: &LinConstraint) -> Outcome {
        if c.expr.is_constant() {
            return if c.rel.holds(&c.expr.constant) { Ok(()) } else { Err(Fail) };
        }
        let mut lin = (*self.lin).clone();
        lin.assert(c)?;
        self.lin = Arc::new(lin);
        self.export_fixed();
        Ok(())
    }

    /// Binds variables the linear store has fixed to a single value.
    fn export_fixed(&mut self) {
        let fixed = self.lin.fixed();
        if fixed.is_empty() {
            return;
        }
        let mut lin = (*self.lin).clone();
        for (v, q) in fixed {
            lin.remove_fixed(v);
            if !self.bindings.contains_key(&v) {
                self.bindings.insert(v, Term::Num(q));
            }
        }
        self.lin = Arc::new(lin);
    }

    /// Converts an arithmetic term into a linear expression, marking its
    /// variables numeric. Fails on non-numeric or non-linear terms.
    pub fn linearize(&mut self, t: &Term) -> Result<LinExpr, Fail> {
        match self.deref(t) {
            Term::Num(q) => Ok(LinExpr::constant(q)),
            Term::Var(v) => {
                self.mark_numeric(v)?;
                Ok(LinExpr::var(v))
            }
            Term::Compound(f, args) => match (&*f, args.len()) {
                ("+", 2) => Ok(self.linearize(&args[0])?.add(&self.linearize(&args[1])?)),
                ("-", 2) => Ok(self.linearize(&args[0])?.sub(&self.linearize(&args[1])?)),
                ("-", 1) => Ok(self.linearize(&args[0])?.neg()),
                ("*", 2) => {
                    let a = self.linearize(&args[0])?;
                    let b = self.linearize(&args[1])?;
                    if a.is_constant() {
                        Ok(b.scale(&a.constant))
                    } else if b.is_constant() {
                        Ok(a.scale(&b.constant))
                    } else {
                        Err(Fail)
                    }
                }
                ("/", 2) => {
                    let a = self.linearize(&args[0])?;
                    let b = self.linearize(&args[1])?;
                    if b.is_constant() && !b.constant.is_zero() {
                        Ok(a.scale(&(Rational::from_integer(1.into()) / b.constant)))
                    } else {
                        Err(Fail)
                    }
                }
                _ => Err(Fail),
            },
            Term::Atom(_) => Err(Fail),
        }
    }

    /// Asserts `lhs rel rhs` over the rationals.
    pub fn arith(&mut self, lhs: &Term, rel: Rel, rhs: &Term) -> Outcome {
        let l = self.linearize(lhs)?;
        let r = self.linearize(rhs)?;
        self.assert_lin(&LinConstraint::compare(&l, rel, &r))
    }

    /// True when `t` is an arithmetic expression that mentions a numeric
    /// variable or is a number.
    pub fn is_arith_expr(&self, t: &Term) -> bool {
        match self.deref(t) {
            Term::Num(_) => true,
            Term::Var(v) => self.is_numeric(v),
            Term::Compound(f, args) => {
                matches!((&*f, args.len()), ("+", 2) | ("-", 2) | ("-", 1) | ("*", 2) | ("/", 2))
                    && args.iter().all(|a| {
                        let a = self.deref(a);
                        matches!(a, Term::Var(_)) || self.is_arith_expr(&a)
                    })
            }
            Term::Atom(_) => false,
        }
    }
}
