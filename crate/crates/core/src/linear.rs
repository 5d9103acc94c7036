//! Exact linear arithmetic over the rationals: Gaussian substitution for
//! equalities, Fourier–Motzkin elimination for inequalities, and held-aside
//! disequalities.

use crate::term::{format_rational, Rational, Var};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// `sum(coeffs[v] * v) + constant`; coefficients are never zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Var, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn constant(q: Rational) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: q }
    }

    pub fn var(v: Var) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinExpr { coeffs, constant: Rational::zero() }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: Var) -> Option<&Rational> {
        self.coeffs.get(&v)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn add_term(&mut self, v: Var, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        self.add_scaled(other, &Rational::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add_scaled(other, &-Rational::one())
    }

    /// `self + k * other`
    pub fn add_scaled(&self, other: &LinExpr, k: &Rational) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(*v, &(c * k));
        }
        out.constant += &other.constant * k;
        out
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-Rational::one())
    }

    /// Replaces `v` by `e`.
    pub fn substitute(&self, v: Var, e: &LinExpr) -> LinExpr {
        match self.coeffs.get(&v) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                let mut base = self.clone();
                base.coeffs.remove(&v);
                base.add_scaled(e, &c)
            }
        }
    }

    pub fn eval(&self, assign: &dyn Fn(Var) -> Rational) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * assign(*v);
        }
        acc
    }

    /// Scales by a positive factor so that the first coefficient has absolute value one.
    fn normalized(&self) -> LinExpr {
        match self.coeffs.values().next() {
            None => self.clone(),
            Some(c) => self.scale(&(Rational::one() / c.abs())),
        }
    }

    pub fn write_with(&self, f: &mut dyn fmt::Write, name: &dyn Fn(Var) -> String) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            f.write_str(&name(*v))?;
            first = false;
        }
        if first {
            f.write_str(&format_rational(&self.constant))?;
        } else if !self.constant.is_zero() {
            let neg = self.constant.is_negative();
            write!(f, "{}{}", if neg { "-" } else { "+" }, format_rational(&self.constant.abs()))?;
        }
        Ok(())
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_with(&mut s, &|v| format!("_G{}", v.0))?;
        f.write_str(&s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Rel {
    pub fn holds(self, q: &Rational) -> bool {
        match self {
            Rel::Lt => q.is_negative(),
            Rel::Le => !q.is_positive(),
            Rel::Eq => q.is_zero(),
            Rel::Ge => !q.is_negative(),
            Rel::Gt => q.is_positive(),
            Rel::Ne => !q.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => ".<.",
            Rel::Le => ".=<.",
            Rel::Eq => ".=.",
            Rel::Ge => ".>=.",
            Rel::Gt => ".>.",
            Rel::Ne => ".\\=.",
        }
    }
}

/// `expr rel 0`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinConstraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl LinConstraint {
    pub fn new(expr: LinExpr, rel: Rel) -> LinConstraint {
        LinConstraint { expr, rel }
    }

    /// `lhs rel rhs`
    pub fn compare(lhs: &LinExpr, rel: Rel, rhs: &LinExpr) -> LinConstraint {
        LinConstraint { expr: lhs.sub(rhs), rel }
    }

    pub fn holds_at(&self, assign: &dyn Fn(Var) -> Rational) -> bool {
        self.rel.holds(&self.expr.eval(assign))
    }
}

/// Constraints whose disjunction is exactly the complement of `c`.
pub fn complement(c: &LinConstraint) -> Vec<LinConstraint> {
    let e = c.expr.clone();
    let one = |rel| vec![LinConstraint::new(e.clone(), rel)];
    match c.rel {
        Rel::Lt => one(Rel::Ge),
        Rel::Le => one(Rel::Gt),
        Rel::Ge => one(Rel::Lt),
        Rel::Gt => one(Rel::Le),
        Rel::Eq => vec![LinConstraint::new(e.clone(), Rel::Lt), LinConstraint::new(e, Rel::Gt)],
        Rel::Ne => one(Rel::Eq),
    }
}

/// `expr < 0` when strict, else `expr <= 0`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Ineq {
    pub expr: LinExpr,
    pub strict: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Unsat;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LinearStore {
    /// Solved form `v = expr`; solved variables occur nowhere else.
    pub eqs: Vec<(Var, LinExpr)>,
    pub ineqs: Vec<Ineq>,
    /// `expr != 0`
    pub neqs: Vec<LinExpr>,
}

/// Adds `ineq` to `set`, keeping only the tightest constraint per direction.
fn push_ineq(set: &mut Vec<Ineq>, ineq: Ineq) {
    let n = ineq.expr.normalized();
    let strict = ineq.strict;
    for existing in set.iter_mut() {
        if existing.expr.coeffs == n.coeffs {
            // larger constant means tighter: L + c < 0  <=>  L < -c
            let tighter = n.constant > existing.expr.constant
                || (n.constant == existing.expr.constant && strict && !existing.strict);
            if tighter {
                *existing = Ineq { expr: n, strict };
            }
            return;
        }
    }
    set.push(Ineq { expr: n, strict });
}

/// Classifies a constant-only inequality.
fn trivial(ineq: &Ineq) -> Option<bool> {
    if !ineq.expr.is_constant() {
        return None;
    }
    let c = &ineq.expr.constant;
    Some(if ineq.strict { c.is_negative() } else { !c.is_positive() })
}

/// Eliminates `v` from `set` by pairwise combination.
fn eliminate(set: Vec<Ineq>, v: Var) -> Result<Vec<Ineq>, Unsat> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for i in set {
        match i.expr.coeff(v).map(|c| c.is_positive()) {
            Some(true) => pos.push(i),
            Some(false) => neg.push(i),
            None => out.push(i),
        }
    }
    for p in &pos {
        let a = p.expr.coeff(v).unwrap().clone();
        for n in &neg {
            let b = n.expr.coeff(v).unwrap().abs();
            let mut combined = p.expr.scale(&b).add_scaled(&n.expr, &a);
            combined.coeffs.remove(&v);
            let ineq = Ineq { expr: combined, strict: p.strict || n.strict };
            match trivial(&ineq) {
                Some(true) => {}
                Some(false) => return Err(Unsat),
                None => push_ineq(&mut out, ineq),
            }
        }
    }
    Ok(out)
}

/// The variable accepted by `allow` whose elimination creates the fewest combinations.
fn pick_var(set: &[Ineq], allow: &dyn Fn(Var) -> bool) -> Option<Var> {
    let mut counts: BTreeMap<Var, (usize, usize)> = BTreeMap::new();
    for i in set {
        for (v, c) in i.expr.coeffs.iter().filter(|(v, _)| allow(**v)) {
            let e = counts.entry(*v).or_default();
            if c.is_positive() {
                e.0 += 1
            } else {
                e.1 += 1
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(v, (p, n))| (p * n, std::cmp::Reverse(*v)))
        .map(|(v, _)| v)
}

/// Decides satisfiability of a conjunction of inequalities.
pub fn feasible(set: &[Ineq]) -> bool {
    let mut cur = Vec::new();
    for i in set {
        match trivial(i) {
            Some(true) => {}
            Some(false) => return false,
            None => push_ineq(&mut cur, i.clone()),
        }
    }
    while let Some(v) = pick_var(&cur, &|_| true) {
        match eliminate(cur, v) {
            Ok(next) => cur = next,
            Err(Unsat) => return false,
        }
    }
    true
}

/// Projects a conjunction of inequalities onto `keep` by eliminating all
/// other variables.
pub fn project_ineqs(set: &[Ineq], keep: &BTreeSet<Var>) -> Result<Vec<Ineq>, Unsat> {
    let mut cur = Vec::new();
    for i in set {
        match trivial(i) {
            Some(true) => {}
            Some(false) => return Err(Unsat),
            None => push_ineq(&mut cur, i.clone()),
        }
    }
    loop {
        let Some(v) = pick_var(&cur, &|v| !keep.contains(&v)) else {
            return Ok(cur);
        };
        cur = eliminate(cur, v)?;
    }
}

impl LinearStore {
    pub fn new() -> LinearStore {
        LinearStore::default()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty() && self.ineqs.is_empty() && self.neqs.is_empty()
    }

    /// Every variable mentioned by the store.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (v, e) in &self.eqs {
            out.insert(*v);
            out.extend(e.vars());
        }
        for i in &self.ineqs {
            out.extend(i.expr.vars());
        }
        for n in &self.neqs {
            out.extend(n.vars());
        }
        out
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.eqs.iter().any(|(w, e)| *w == v || e.coeff(v).is_some())
            || self.ineqs.iter().any(|i| i.expr.coeff(v).is_some())
            || self.neqs.iter().any(|n| n.coeff(v).is_some())
    }

    /// Applies the solved equalities to `e`.
    pub fn reduce(&self, e: &LinExpr) -> LinExpr {
        let mut out = e.clone();
        for (v, rhs) in &self.eqs {
            if out.coeff(*v).is_some() {
                out = out.substitute(*v, rhs);
            }
        }
        out
    }

    fn ineqs_with(&self, extra: Ineq) -> Vec<Ineq> {
        let mut set = self.ineqs.clone();
        set.push(extra);
        set
    }

    /// True iff the current inequalities force `e = 0` (`e` already reduced).
    fn forces_zero(&self, e: &LinExpr) -> bool {
        if e.is_constant() {
            return e.constant.is_zero();
        }
        !feasible(&self.ineqs_with(Ineq { expr: e.clone(), strict: true }))
            && !feasible(&self.ineqs_with(Ineq { expr: e.neg(), strict: true }))
    }

    fn check_neqs(&self) -> Result<(), Unsat> {
        if self.neqs.iter().any(|n| self.forces_zero(n)) {
            Err(Unsat)
        } else {
            Ok(())
        }
    }

    fn add_eq(&mut self, e: LinExpr) -> Result<(), Unsat> {
        let e = self.reduce(&e);
        let Some((&pivot, coef)) = e.coeffs.iter().next_back() else {
            return if e.constant.is_zero() { Ok(()) } else { Err(Unsat) };
        };
        // pivot = -(e - coef*pivot) / coef
        let coef = coef.clone();
        let mut rest = e.clone();
        rest.coeffs.remove(&pivot);
        let rhs = rest.scale(&(-Rational::one() / coef));
        self.substitute_everywhere(pivot, &rhs)?;
        self.eqs.push((pivot, rhs));
        Ok(())
    }

    /// Replaces the unsolved variable `v` by `rhs` in every stored constraint.
    fn substitute_everywhere(&mut self, v: Var, rhs: &LinExpr) -> Result<(), Unsat> {
        for (_, r) in self.eqs.iter_mut() {
            *r = r.substitute(v, rhs);
        }
        let old = std::mem::take(&mut self.ineqs);
        for i in old {
            let ineq = Ineq { expr: i.expr.substitute(v, rhs), strict: i.strict };
            match trivial(&ineq) {
                Some(true) => {}
                Some(false) => return Err(Unsat),
                None => push_ineq(&mut self.ineqs, ineq),
            }
        }
        let old = std::mem::take(&mut self.neqs);
        for n in old {
            let n = n.substitute(v, rhs);
            if n.is_constant() {
                if n.constant.is_zero() {
                    return Err(Unsat);
                }
            } else {
                self.push_neq(n);
            }
        }
        Ok(())
    }

    /// Identifies `from` with `to`; afterwards `from` no longer occurs in the store.
    pub fn alias(&mut self, from: Var, to: Var) -> Result<(), Unsat> {
        if from == to {
            return Ok(());
        }
        if let Some(k) = self.eqs.iter().position(|(v, _)| *v == from) {
            let (_, e) = self.eqs.remove(k);
            return self.assert(&LinConstraint::new(e.sub(&LinExpr::var(to)), Rel::Eq));
        }
        if !self.mentions(from) {
            return Ok(());
        }
        let rhs = self.reduce(&LinExpr::var(to));
        self.substitute_everywhere(from, &rhs)?;
        if !feasible(&self.ineqs) {
            return Err(Unsat);
        }
        self.promote_implicit_equalities()?;
        self.check_neqs()
    }

    fn push_neq(&mut self, n: LinExpr) {
        let n = n.normalized();
        if !self.neqs.contains(&n) {
            self.neqs.push(n);
        }
    }

    /// Turns every non-strict inequality whose reverse is entailed into an equality.
    fn promote_implicit_equalities(&mut self) -> Result<(), Unsat> {
        loop {
            let found = self.ineqs.iter().position(|i| {
                !i.strict && !feasible(&self.ineqs_with(Ineq { expr: i.expr.clone(), strict: true }))
            });
            match found {
                None => return Ok(()),
                Some(k) => {
                    let i = self.ineqs.remove(k);
                    self.add_eq(i.expr)?;
                }
            }
        }
    }

    /// Conjoins `c`; fails (leaving `self` unspecified) if the result is unsatisfiable.
    pub fn assert(&mut self, c: &LinConstraint) -> Result<(), Unsat> {
        let e = self.reduce(&c.expr);
        match c.rel {
            Rel::Eq => {
                self.add_eq(e)?;
                if !feasible(&self.ineqs) {
                    return Err(Unsat);
                }
                self.promote_implicit_equalities()?;
            }
            Rel::Ne => {
                if e.is_constant() {
                    return if e.constant.is_zero() { Err(Unsat) } else { Ok(()) };
                }
                if self.forces_zero(&e) {
                    return Err(Unsat);
                }
                self.push_neq(e);
                return Ok(());
            }
            Rel::Lt | Rel::Le | Rel::Gt | Rel::Ge => {
                let strict = matches!(c.rel, Rel::Lt | Rel::Gt);
                let expr = if matches!(c.rel, Rel::Lt | Rel::Le) { e } else { e.neg() };
                let ineq = Ineq { expr, strict };
                match trivial(&ineq) {
                    Some(true) => return Ok(()),
                    Some(false) => return Err(Unsat),
                    None => {}
                }
                push_ineq(&mut self.ineqs, ineq.clone());
                if !feasible(&self.ineqs) {
                    return Err(Unsat);
                }
                if !strict {
                    self.promote_implicit_equalities()?;
                }
            }
        }
        self.check_neqs()
    }

    /// Satisfiability of `self ∧ c` without modifying `self`.
    pub fn consistent_with(&self, c: &LinConstraint) -> bool {
        let mut s = self.clone();
        s.assert(c).is_ok()
    }

    pub fn entails(&self, c: &LinConstraint) -> bool {
        complement(c).iter().all(|piece| !self.consistent_with(piece))
    }

    /// Variables whose value is fixed to a constant by the solved equalities.
    pub fn fixed(&self) -> Vec<(Var, Rational)> {
        self.eqs
            .iter()
            .filter(|(_, e)| e.is_constant())
            .map(|(v, e)| (*v, e.constant.clone()))
            .collect()
    }

    /// Removes a variable that has been fixed to a constant.
    pub fn remove_fixed(&mut self, v: Var) {
        self.eqs.retain(|(w, e)| !(*w == v && e.is_constant()));
    }

    /// The constraints of the store as a flat list.
    pub fn constraints(&self) -> Vec<LinConstraint> {
        let mut out = Vec::new();
        for (v, e) in &self.eqs {
            out.push(LinConstraint::new(LinExpr::var(*v).sub(e), Rel::Eq));
        }
        for i in &self.ineqs {
            out.push(LinConstraint::new(i.expr.clone(), if i.strict { Rel::Lt } else { Rel::Le }));
        }
        for n in &self.neqs {
            out.push(LinConstraint::new(n.clone(), Rel::Ne));
        }
        out
    }

    pub fn from_constraints(cs: &[LinConstraint]) -> Result<LinearStore, Unsat> {
        let mut s = LinearStore::new();
        for c in cs {
            s.assert(c)?;
        }
        Ok(s)
    }

    pub fn satisfied_by(&self, assign: &dyn Fn(Var) -> Rational) -> bool {
        self.constraints().iter().all(|c| c.holds_at(assign))
    }

    /// A store over `keep` whose solutions are the restrictions of this
    /// store's solutions. Disequalities that mention eliminated variables
    /// are dropped.
    pub fn project(&self, keep: &BTreeSet<Var>) -> LinearStore {
        let mut eqs: Vec<LinExpr> =
            self.eqs.iter().map(|(v, e)| LinExpr::var(*v).sub(e)).collect();
        let mut ineqs = self.ineqs.clone();
        let mut neqs = self.neqs.clone();
        // Gaussian elimination of non-kept variables that occur in equalities.
        loop {
            let target = eqs.iter().enumerate().find_map(|(k, e)| {
                e.coeffs.keys().rev().find(|v| !keep.contains(v)).map(|v| (k, *v))
            });
            let Some((k, w)) = target else { break };
            let e = eqs.remove(k);
            let c = e.coeff(w).unwrap().clone();
            let mut rest = e.clone();
            rest.coeffs.remove(&w);
            let rhs = rest.scale(&(-Rational::one() / c));
            for x in eqs.iter_mut() {
                *x = x.substitute(w, &rhs);
            }
            for i in ineqs.iter_mut() {
                i.expr = i.expr.substitute(w, &rhs);
            }
            for n in neqs.iter_mut() {
                *n = n.substitute(w, &rhs);
            }
        }
        let ineqs = project_ineqs(&ineqs, keep).unwrap_or_default();
        let mut out = LinearStore::new();
        for e in eqs {
            if !e.is_constant() {
                let _ = out.add_eq(e);
            }
        }
        for i in ineqs {
            let expr = out.reduce(&i.expr);
            push_ineq(&mut out.ineqs, Ineq { expr, strict: i.strict });
        }
        for n in neqs {
            if n.vars().all(|v| keep.contains(&v)) && !n.is_constant() {
                let n = out.reduce(&n);
                if !n.is_constant() {
                    out.push_neq(n);
                }
            }
        }
        let _ = out.promote_implicit_equalities();
        out
    }

    /// A concrete satisfying assignment for every variable of the store.
    pub fn witness(&self) -> Option<BTreeMap<Var, Rational>> {
        let free: Vec<Var> = {
            let solved: BTreeSet<Var> = self.eqs.iter().map(|(v, _)| *v).collect();
            self.vars().into_iter().filter(|v| !solved.contains(v)).collect()
        };
        // elimination levels: levels[k] holds the system before eliminating order[k]
        let mut levels = Vec::new();
        let mut order = Vec::new();
        let mut cur: Vec<Ineq> = self.ineqs.clone();
        let mut remaining: BTreeSet<Var> = free.iter().copied().collect();
        while let Some(&v) = remaining.iter().next() {
            let v = pick_var(&cur, &|w| remaining.contains(&w)).unwrap_or(v);
            levels.push(cur.clone());
            order.push(v);
            remaining.remove(&v);
            cur = eliminate(cur, v).ok()?;
        }
        if !cur.iter().all(|i| trivial(i) != Some(false)) {
            return None;
        }
        let mut assign: BTreeMap<Var, Rational> = BTreeMap::new();
        for (k, v) in order.iter().enumerate().rev() {
            let mut lo: Option<(Rational, bool)> = None;
            let mut hi: Option<(Rational, bool)> = None;
            for i in &levels[k] {
                let Some(c) = i.expr.coeff(*v).cloned() else { continue };
                let mut rest = i.expr.clone();
                rest.coeffs.remove(v);
                let r = rest.eval(&|w| assign.get(&w).cloned().unwrap_or_default());
                // c*v + r < 0  =>  v < -r/c (c > 0) or v > -r/c (c < 0)
                let bound = -r / &c;
                if c.is_positive() {
                    if hi.as_ref().is_none_or(|(h, s)| bound < *h || (bound == *h && i.strict && !s)) {
                        hi = Some((bound, i.strict));
                    }
                } else if lo.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && i.strict && !s)) {
                    lo = Some((bound, i.strict));
                }
            }
            let candidates: Vec<Rational> = match (&lo, &hi) {
                (Some((l, _)), Some((h, _))) if l == h => vec![l.clone()],
                (Some((l, _)), Some((h, _))) => (2..40)
                    .map(|d| l + (h - l) / Rational::from_integer(d.into()))
                    .collect(),
                (Some((l, _)), None) => (1..40).map(|d| l + Rational::from_integer(d.into())).collect(),
                (None, Some((h, _))) => (1..40).map(|d| h - Rational::from_integer(d.into())).collect(),
                (None, None) => (0..40).map(|d| Rational::from_integer(d.into())).collect(),
            };
            let chosen = candidates.into_iter().find(|q| {
                let mut trial = assign.clone();
                trial.insert(*v, q.clone());
                self.neqs.iter().all(|n| {
                    if n.vars().all(|w| trial.contains_key(&w)) {
                        !n.eval(&|w| trial[&w].clone()).is_zero()
                    } else {
                        true
                    }
                })
            })?;
            assign.insert(*v, chosen);
        }
        for (v, e) in &self.eqs {
            let val = e.eval(&|w| assign.get(&w).cloned().unwrap_or_default());
            assign.insert(*v, val);
        }
        if self.satisfied_by(&|w| assign.get(&w).cloned().unwrap_or_default()) {
            Some(assign)
        } else {
            None
        }
    }
}
