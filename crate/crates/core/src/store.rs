//! Per-variable projections of the constraint environment and the operation
//! vocabulary the universal quantifier is built from: empty, apply, dump,
//! dual, add and equal.

use crate::env::{Env, Fail, Outcome};
use crate::linear::Rel;
use crate::term::{format_rational, write_term, Rational, Term, Var};
use num_traits::Signed;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

/// One endpoint of an interval.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Endpoint {
    pub value: Rational,
    pub strict: bool,
}

/// A satisfiable conjunction of constraints over one rational variable:
/// optional bounds plus excluded points lying strictly inside them.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Interval {
    pub lo: Option<Endpoint>,
    pub hi: Option<Endpoint>,
    /// Sorted, deduplicated, each strictly inside the bounds.
    pub neqs: Vec<Rational>,
}

impl Interval {
    pub fn point(q: Rational) -> Interval {
        Interval {
            lo: Some(Endpoint { value: q.clone(), strict: false }),
            hi: Some(Endpoint { value: q, strict: false }),
            neqs: vec![],
        }
    }

    pub fn as_point(&self) -> Option<&Rational> {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) if l.value == h.value => Some(&l.value),
            _ => None,
        }
    }

    pub fn is_top(&self) -> bool {
        self.lo.is_none() && self.hi.is_none() && self.neqs.is_empty()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let above = self.lo.as_ref().is_none_or(|l| if l.strict { *q > l.value } else { *q >= l.value });
        let below = self.hi.as_ref().is_none_or(|h| if h.strict { *q < h.value } else { *q <= h.value });
        above && below && !self.neqs.contains(q)
    }

    fn tighten_lo(&mut self, e: Endpoint) {
        let replace = match &self.lo {
            None => true,
            Some(l) => e.value > l.value || (e.value == l.value && e.strict && !l.strict),
        };
        if replace {
            self.lo = Some(e);
        }
    }

    fn tighten_hi(&mut self, e: Endpoint) {
        let replace = match &self.hi {
            None => true,
            Some(h) => e.value < h.value || (e.value == h.value && e.strict && !h.strict),
        };
        if replace {
            self.hi = Some(e);
        }
    }

    /// Normalizes and checks satisfiability; `None` when empty.
    fn normalize(mut self) -> Option<Interval> {
        if let (Some(l), Some(h)) = (&self.lo, &self.hi) {
            if l.value > h.value || (l.value == h.value && (l.strict || h.strict)) {
                return None;
            }
        }
        let probe = Interval { neqs: vec![], ..self.clone() };
        let mut neqs: Vec<Rational> = self.neqs.drain(..).filter(|q| probe.contains(q)).collect();
        neqs.sort();
        neqs.dedup();
        if let Some(p) = probe.as_point() {
            if neqs.contains(p) {
                return None;
            }
        }
        // a non-strict bound sitting on an excluded point becomes strict
        if let Some(l) = &mut self.lo {
            if let Some(k) = neqs.iter().position(|q| *q == l.value) {
                neqs.remove(k);
                l.strict = true;
            }
        }
        if let Some(h) = &mut self.hi {
            if let Some(k) = neqs.iter().position(|q| *q == h.value) {
                neqs.remove(k);
                h.strict = true;
            }
        }
        self.neqs = neqs;
        Some(self)
    }

    fn conj(&self, other: &Interval) -> Option<Interval> {
        let mut out = self.clone();
        if let Some(l) = &other.lo {
            out.tighten_lo(l.clone());
        }
        if let Some(h) = &other.hi {
            out.tighten_hi(h.clone());
        }
        out.neqs.extend(other.neqs.iter().cloned());
        out.normalize()
    }

    fn with_neq(&self, q: Rational) -> Option<Interval> {
        let mut out = self.clone();
        out.neqs.push(q);
        out.normalize()
    }

    /// Pieces whose union is the complement of this interval.
    fn complement(&self) -> Vec<Interval> {
        if let Some(p) = self.as_point() {
            let mut out = vec![
                Interval { hi: Some(Endpoint { value: p.clone(), strict: true }), ..Default::default() },
                Interval { lo: Some(Endpoint { value: p.clone(), strict: true }), ..Default::default() },
            ];
            out.retain(|i| !i.is_top());
            return out;
        }
        let mut out = Vec::new();
        if let Some(l) = &self.lo {
            out.push(Interval {
                hi: Some(Endpoint { value: l.value.clone(), strict: !l.strict }),
                ..Default::default()
            });
        }
        if let Some(h) = &self.hi {
            out.push(Interval {
                lo: Some(Endpoint { value: h.value.clone(), strict: !h.strict }),
                ..Default::default()
            });
        }
        for q in &self.neqs {
            out.push(Interval::point(q.clone()));
        }
        out
    }
}

/// The constraints on a single variable, tagged by domain.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum StoreView {
    /// No constraint.
    Top,
    /// A Herbrand variable that must differ from each listed ground term.
    Herbrand(Vec<Term>),
    /// A rational variable.
    Linear(Interval),
    /// The variable equals this (non-numeric or Herbrand-bound) term.
    Bound(Term),
}

pub fn empty_store() -> StoreView {
    StoreView::Top
}

/// Projects the environment onto `v`. When `v` is bound to another
/// variable, the constraints of that variable are reported.
pub fn dump(env: &Env, v: Var) -> StoreView {
    let mut cur = Term::Var(v);
    let mut numeric = env.is_numeric(v);
    while let Term::Var(w) = &cur {
        numeric |= env.is_numeric(*w);
        match env.bindings.get(w) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    match cur {
        Term::Var(w) => {
            if env.is_numeric(w) {
                let iv = project_interval(env, w);
                if iv.is_top() {
                    StoreView::Top
                } else {
                    StoreView::Linear(iv)
                }
            } else {
                let f = env.forbidden_of(w);
                if f.is_empty() {
                    StoreView::Top
                } else {
                    StoreView::Herbrand(f)
                }
            }
        }
        Term::Num(q) if numeric => StoreView::Linear(Interval::point(q)),
        other => StoreView::Bound(env.resolve(&other)),
    }
}

fn project_interval(env: &Env, w: Var) -> Interval {
    let lin = env.linear();
    if !lin.mentions(w) {
        return Interval::default();
    }
    let keep: BTreeSet<Var> = [w].into_iter().collect();
    let p = lin.project(&keep);
    let mut iv = Interval::default();
    for (v, e) in &p.eqs {
        if *v == w && e.is_constant() {
            return Interval::point(e.constant.clone());
        }
    }
    for i in &p.ineqs {
        let Some(a) = i.expr.coeff(w) else { continue };
        // a*w + c (<|<=) 0
        let bound = -&i.expr.constant / a;
        let e = Endpoint { value: bound, strict: i.strict };
        if a.is_positive() {
            iv.tighten_hi(e);
        } else {
            iv.tighten_lo(e);
        }
    }
    for n in &p.neqs {
        if let Some(a) = n.coeff(w) {
            iv.neqs.push(-&n.constant / a);
        }
    }
    iv.normalize().unwrap_or_default()
}

/// Constrains the fresh variable `nv` exactly as described by `store`.
pub fn apply(store: &StoreView, env: &mut Env, nv: Var) -> Outcome {
    let x = Term::Var(nv);
    match store {
        StoreView::Top => Ok(()),
        StoreView::Herbrand(list) => {
            for t in list {
                let mut alts = env.assert_diseq(&x, t);
                if alts.len() != 1 {
                    return Err(Fail);
                }
                *env = alts.pop().unwrap();
            }
            Ok(())
        }
        StoreView::Linear(iv) => {
            env.mark_numeric(nv)?;
            if let Some(p) = iv.as_point() {
                return env.arith(&x, Rel::Eq, &Term::Num(p.clone()));
            }
            if let Some(l) = &iv.lo {
                env.arith(&x, if l.strict { Rel::Gt } else { Rel::Ge }, &Term::Num(l.value.clone()))?;
            }
            if let Some(h) = &iv.hi {
                env.arith(&x, if h.strict { Rel::Lt } else { Rel::Le }, &Term::Num(h.value.clone()))?;
            }
            for q in &iv.neqs {
                env.arith(&x, Rel::Ne, &Term::Num(q.clone()))?;
            }
            Ok(())
        }
        StoreView::Bound(t) => env.unify(&x, t),
    }
}

/// Pieces whose union is the complement of `store`; `None` when the
/// complement cannot be expressed (a binding to a non-ground term).
pub fn dual(store: &StoreView) -> Option<Vec<StoreView>> {
    match store {
        StoreView::Top => Some(vec![]),
        StoreView::Herbrand(list) => Some(list.iter().map(|t| StoreView::Bound(t.clone())).collect()),
        StoreView::Linear(iv) => Some(iv.complement().into_iter().map(StoreView::Linear).collect()),
        StoreView::Bound(t) if t.is_ground() => Some(vec![StoreView::Herbrand(vec![t.clone()])]),
        StoreView::Bound(_) => None,
    }
}

/// Conjunction of two single-variable stores, `None` when inconsistent.
/// Numeric and symbolic constraints combine under the assumption that a
/// rationally constrained variable only takes rational values.
pub fn conj(a: &StoreView, b: &StoreView) -> Option<StoreView> {
    use StoreView::*;
    match (a, b) {
        (Top, x) | (x, Top) => Some(x.clone()),
        (Herbrand(f), Herbrand(g)) => {
            let mut out = f.clone();
            for t in g {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            Some(Herbrand(out))
        }
        (Herbrand(f), Bound(t)) | (Bound(t), Herbrand(f)) => {
            if f.contains(t) {
                None
            } else {
                Some(Bound(t.clone()))
            }
        }
        (Herbrand(f), Linear(iv)) | (Linear(iv), Herbrand(f)) => {
            let mut out = iv.clone();
            for t in f {
                if let Term::Num(q) = t {
                    out = out.with_neq(q.clone())?;
                }
            }
            Some(Linear(out))
        }
        (Linear(x), Linear(y)) => x.conj(y).map(Linear),
        (Linear(iv), Bound(t)) | (Bound(t), Linear(iv)) => match t {
            Term::Num(q) if iv.contains(q) => Some(Bound(t.clone())),
            _ => None,
        },
        (Bound(s), Bound(t)) => {
            if s == t {
                Some(Bound(s.clone()))
            } else {
                None
            }
        }
    }
}

/// `[store ∧ d | d ∈ duals, consistent]`
pub fn add(duals: &[StoreView], store: &StoreView) -> Vec<StoreView> {
    duals.iter().filter_map(|d| conj(store, d)).collect()
}

/// Mutual entailment.
pub fn equal(a: &StoreView, b: &StoreView) -> bool {
    use StoreView::*;
    match (a, b) {
        (Top, Top) => true,
        (Herbrand(f), Herbrand(g)) => f.len() == g.len() && f.iter().all(|t| g.contains(t)),
        (Linear(x), Linear(y)) => x == y,
        (Linear(iv), Bound(Term::Num(q))) | (Bound(Term::Num(q)), Linear(iv)) => {
            iv.as_point() == Some(q)
        }
        (Bound(s), Bound(t)) => s == t,
        _ => false,
    }
}

impl StoreView {
    /// Whether the ground value `t` satisfies this store.
    pub fn admits(&self, t: &Term) -> bool {
        match self {
            StoreView::Top => true,
            StoreView::Herbrand(f) => !f.contains(t),
            StoreView::Linear(iv) => matches!(t, Term::Num(q) if iv.contains(q)),
            StoreView::Bound(b) => b == t,
        }
    }

    /// Writes the store of a variable printed as `name`, e.g. `{A.>.2, A.<.3}`.
    pub fn write_constraints(&self, out: &mut dyn fmt::Write, name: &str) -> fmt::Result {
        match self {
            StoreView::Top => out.write_str(name),
            StoreView::Herbrand(list) => {
                write!(out, "{{{name}.\\=.[")?;
                for (i, t) in list.iter().enumerate() {
                    if i > 0 {
                        out.write_char(',')?;
                    }
                    let mut s = String::new();
                    write_term(&mut s, t, &mut |o: &mut String, v| write!(o, "_G{}", v.0))?;
                    out.write_str(&s)?;
                }
                out.write_str("]}")
            }
            StoreView::Linear(iv) => {
                if let Some(p) = iv.as_point() {
                    return out.write_str(&format_rational(p));
                }
                let mut parts = Vec::new();
                if let Some(l) = &iv.lo {
                    let op = if l.strict { ".>." } else { ".>=." };
                    parts.push(format!("{name}{op}{}", format_rational(&l.value)));
                }
                if let Some(h) = &iv.hi {
                    let op = if h.strict { ".<." } else { ".=<." };
                    parts.push(format!("{name}{op}{}", format_rational(&h.value)));
                }
                for q in &iv.neqs {
                    parts.push(format!("{name}.\\=.{}", format_rational(q)));
                }
                write!(out, "{{{}}}", parts.join(", "))
            }
            StoreView::Bound(t) => {
                let mut s = String::new();
                write_term(&mut s, t, &mut |o: &mut String, v| write!(o, "_G{}", v.0))?;
                out.write_str(&s)
            }
        }
    }
}

impl fmt::Display for StoreView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_constraints(&mut s, "X")?;
        f.write_str(&s)
    }
}

/// Builds a linear view from bounds, for tests and examples.
pub fn interval(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>, neqs: Vec<Rational>) -> Option<StoreView> {
    let iv = Interval {
        lo: lo.map(|(value, strict)| Endpoint { value, strict }),
        hi: hi.map(|(value, strict)| Endpoint { value, strict }),
        neqs,
    };
    let iv = iv.normalize()?;
    if iv.is_top() {
        Some(StoreView::Top)
    } else {
        Some(StoreView::Linear(iv))
    }
}
