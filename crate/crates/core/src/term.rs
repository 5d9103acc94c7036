//! Terms of the extended Herbrand universe: variables, symbolic constants,
//! exact rationals and compound terms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::{self, Write};
use std::sync::Arc;

pub type Rational = BigRational;
pub type Symbol = Arc<str>;

/// Functor of a non-empty list cell.
pub const LIST_CONS: &str = ".";
/// The empty list.
pub const LIST_NIL: &str = "[]";

/// Variable identity. Names live in side tables (clause var names, query
/// var names); printed names are regenerated at output time.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Atom(Symbol),
    /// Always canonical: `BigRational` keeps gcd(num, den) = 1 and den > 0.
    Num(Rational),
    /// Arity is `args.len()` and is at least one.
    Compound(Symbol, Arc<[Term]>),
}

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

impl Term {
    pub fn atom(s: &str) -> Term {
        Term::Atom(sym(s))
    }

    pub fn int(n: i64) -> Term {
        Term::Num(int(n))
    }

    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    /// Builds a compound; a zero-argument compound collapses to an atom.
    pub fn compound(f: &str, args: Vec<Term>) -> Term {
        Term::compound_sym(sym(f), args)
    }

    pub fn compound_sym(f: Symbol, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(f)
        } else {
            Term::Compound(f, args.into())
        }
    }

    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, t| Term::compound(LIST_CONS, vec![t, acc]))
    }

    pub fn nil() -> Term {
        Term::atom(LIST_NIL)
    }

    /// Functor name and arity for atoms and compounds.
    pub fn functor(&self) -> Option<(&Symbol, usize)> {
        match self {
            Term::Atom(s) => Some((s, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Num(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(v)),
            _ => false,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Shifts every variable id by `base` (clause renaming).
    pub fn offset(&self, base: u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(Var(v.0 + base)),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.offset(base)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Elements and tail of a (possibly partial) list.
    pub fn list_parts(&self) -> Option<(Vec<&Term>, &Term)> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Compound(f, args) if &**f == LIST_CONS && args.len() == 2 => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                _ => break,
            }
        }
        if items.is_empty() {
            None
        } else {
            Some((items, cur))
        }
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn atom_needs_quotes(s: &str) -> bool {
    if s == LIST_NIL || s == "!" {
        return false;
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => !chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => true,
    }
}

pub fn format_atom(s: &str) -> String {
    if atom_needs_quotes(s) {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        s.to_string()
    }
}

const INFIX: &[(&str, u16)] = &[("+", 500), ("-", 500), ("*", 400), ("/", 400)];

fn infix_prec(f: &str, arity: usize) -> Option<u16> {
    if arity != 2 {
        return None;
    }
    INFIX.iter().find(|(op, _)| *op == f).map(|(_, p)| *p)
}

/// Writes `t`, delegating variables to `var` (which may print inline constraints).
pub fn write_term<W: Write>(
    out: &mut W,
    t: &Term,
    var: &mut dyn FnMut(&mut W, Var) -> fmt::Result,
) -> fmt::Result {
    write_prec(out, t, 1200, var)
}

fn write_prec<W: Write>(
    out: &mut W,
    t: &Term,
    max: u16,
    var: &mut dyn FnMut(&mut W, Var) -> fmt::Result,
) -> fmt::Result {
    match t {
        Term::Var(v) => var(out, *v),
        Term::Atom(s) => out.write_str(&format_atom(s)),
        Term::Num(q) => {
            let s = format_rational(q);
            // a fraction or negative number inside an operator needs brackets to reparse
            if max < 400 && (q.is_negative() || !q.denom().is_one()) {
                write!(out, "({s})")
            } else {
                out.write_str(&s)
            }
        }
        Term::Compound(f, args) => {
            if let Some((items, tail)) = t.list_parts() {
                out.write_char('[')?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.write_char(',')?;
                    }
                    write_prec(out, item, 999, var)?;
                }
                if !matches!(tail, Term::Atom(s) if &**s == LIST_NIL) {
                    out.write_char('|')?;
                    write_prec(out, tail, 999, var)?;
                }
                return out.write_char(']');
            }
            if let Some(p) = infix_prec(f, args.len()) {
                let paren = p > max;
                if paren {
                    out.write_char('(')?;
                }
                write_prec(out, &args[0], p, var)?;
                out.write_str(f)?;
                write_prec(out, &args[1], p - 1, var)?;
                if paren {
                    out.write_char(')')?;
                }
                return Ok(());
            }
            if &**f == "-" && args.len() == 1 {
                out.write_str("-(")?;
                write_prec(out, &args[0], 1200, var)?;
                return out.write_char(')');
            }
            out.write_str(&format_atom(f))?;
            out.write_char('(')?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.write_char(',')?;
                }
                write_prec(out, a, 999, var)?;
            }
            out.write_char(')')
        }
    }
}

impl fmt::Display for Term {
    /// Debug-style rendering with raw variable ids (`_G12`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, &mut |o: &mut String, v| write!(o, "_G{}", v.0))?;
        f.write_str(&s)
    }
}

/// Generates display names A, B, ..., Z, A1, B1, ... in a fixed order.
pub fn var_display_name(index: usize) -> String {
    let letter = (b'A' + (index % 26) as u8) as char;
    let round = index / 26;
    if round == 0 {
        letter.to_string()
    } else {
        format!("{letter}{round}")
    }
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}
