//! Tokenizer and operator-precedence parser for the program surface syntax.

use crate::ast::{ConstraintOp, Directive, Head, Literal, Program, Query, Rule};
use crate::term::{sym, Rational, Term, Var, LIST_CONS, LIST_NIL};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: warning: {}", self.line, self.col, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    /// A name immediately followed by `(`.
    Functor(String),
    Var(String),
    Num(Rational),
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

const DOT_OPS: &[&str] = &[".=<.", ".>=.", ".\\=.", ".<>.", ".<.", ".>.", ".=."];

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line, col, message: msg.into() }
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => return Err(self.err(line, col, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn is_end_dot(&self) -> bool {
        self.peek() == Some('.')
            && match self.peek_at(1) {
                None => true,
                Some(c) => c.is_whitespace() || c == '%',
            }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_layout()?;
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = if self.is_end_dot() {
                self.bump();
                Tok::End
            } else if c.is_ascii_digit() {
                self.number(line, col)?
            } else if c == '_' || c.is_uppercase() {
                Tok::Var(self.ident())
            } else if c.is_alphabetic() {
                let name = self.ident();
                self.functor_or_name(name)
            } else if c == '\'' {
                let name = self.quoted(line, col)?;
                self.functor_or_name(name)
            } else if c == '"' {
                return Err(self.err(line, col, "strings are not supported"));
            } else {
                match c {
                    '(' => {
                        self.bump();
                        Tok::Open
                    }
                    ')' => {
                        self.bump();
                        Tok::Close
                    }
                    '[' => {
                        self.bump();
                        if self.peek() == Some(']') {
                            self.bump();
                            self.functor_or_name(LIST_NIL.to_string())
                        } else {
                            Tok::OpenList
                        }
                    }
                    ']' => {
                        self.bump();
                        Tok::CloseList
                    }
                    '|' => {
                        self.bump();
                        Tok::Bar
                    }
                    ',' => {
                        self.bump();
                        Tok::Comma
                    }
                    '!' | ';' => {
                        self.bump();
                        self.functor_or_name(c.to_string())
                    }
                    c if SYMBOL_CHARS.contains(c) => {
                        let name = self.symbol();
                        self.functor_or_name(name)
                    }
                    other => return Err(self.err(line, col, format!("unexpected character `{other}`"))),
                }
            };
            out.push(Token { tok, line, col });
        }
    }

    fn functor_or_name(&self, name: String) -> Tok {
        if self.peek() == Some('(') {
            Tok::Functor(name)
        } else {
            Tok::Name(name)
        }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn symbol(&mut self) -> String {
        if self.peek() == Some('.') {
            for op in DOT_OPS {
                let n = op.chars().count();
                if (0..n).all(|k| self.peek_at(k) == op.chars().nth(k)) {
                    for _ in 0..n {
                        self.bump();
                    }
                    return op.to_string();
                }
            }
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if SYMBOL_CHARS.contains(c) && !(c == '.' && !s.is_empty() && self.is_end_dot()) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn quoted(&mut self, line: usize, col: usize) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('\'') => {
                    if self.peek() == Some('\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c) => s.push(c),
                    None => return Err(self.err(line, col, "unterminated quoted atom")),
                },
                Some(c) => s.push(c),
                None => return Err(self.err(line, col, "unterminated quoted atom")),
            }
        }
    }

    fn number(&mut self, line: usize, col: usize) -> Result<Tok, ParseError> {
        let mut digits = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let mut frac = String::new();
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    frac.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if self.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Err(self.err(line, col, "malformed number"));
        }
        let numer: BigInt = format!("{digits}{frac}").parse().map_err(|_| self.err(line, col, "malformed number"))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        Ok(Tok::Num(Rational::new(numer, denom)))
    }
}

/// Surface-level term produced by the operator parser, before clause conversion.
#[derive(Clone, Debug)]
enum Raw {
    Var(String),
    Atom(String),
    Num(Rational),
    Compound(String, Vec<Raw>),
}

#[derive(Clone, Copy, PartialEq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "is" | ".<." | ".>." | ".=<." | ".>=." | ".=." | ".\\=." | ".<>." | "#<"
        | "#>" | "#=<" | "#>=" | "#=" | "#\\=" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" => {
            (700, Assoc::Xfx)
        }
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" => (400, Assoc::Yfx),
        _ => return None,
    })
}

fn prefix_op(name: &str) -> Option<(u32, u32)> {
    match name {
        ":-" | "?-" => Some((1200, 1199)),
        "not" => Some((900, 900)),
        "-" => Some((200, 200)),
        _ => None,
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, t: &Token, msg: impl Into<String>) -> ParseError {
        ParseError { line: t.line, col: t.col, message: msg.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(self.err_at(&t, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn infix_here(&self) -> Option<(String, u32, Assoc)> {
        let name = match &self.peek().tok {
            Tok::Name(n) => n.clone(),
            Tok::Comma => ",".to_string(),
            _ => return None,
        };
        infix_op(&name).map(|(p, a)| (name, p, a))
    }

    fn parse(&mut self, max: u32) -> Result<Raw, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        while let Some((name, prec, assoc)) = self.infix_here() {
            if prec > max {
                break;
            }
            let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
            if left_prec > left_max {
                break;
            }
            let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
            self.next();
            let right = self.parse(right_max)?;
            left = fold_infix(&name, left, right);
            left_prec = prec;
        }
        Ok(left)
    }

    fn primary(&mut self, max: u32) -> Result<(Raw, u32), ParseError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Var(name) => Ok((Raw::Var(name), 0)),
            Tok::Num(q) => Ok((Raw::Num(q), 0)),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((inner, 0))
            }
            Tok::OpenList => {
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.next();
                    self.parse(999)?
                } else {
                    Raw::Atom(LIST_NIL.to_string())
                };
                self.expect(Tok::CloseList, "`]`")?;
                let list = items
                    .into_iter()
                    .rev()
                    .fold(tail, |acc, it| Raw::Compound(LIST_CONS.to_string(), vec![it, acc]));
                Ok((list, 0))
            }
            Tok::Functor(name) => {
                self.expect(Tok::Open, "`(`")?;
                let mut args = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    args.push(self.parse(999)?);
                }
                self.expect(Tok::Close, "`)` or `,`")?;
                Ok((Raw::Compound(name, args), 0))
            }
            Tok::Name(name) => {
                if let Some((prec, arg_max)) = prefix_op(&name) {
                    if self.starts_term() && prec <= max {
                        let arg = self.parse(arg_max)?;
                        if name == "-" {
                            if let Raw::Num(q) = &arg {
                                return Ok((Raw::Num(-q.clone()), 0));
                            }
                        }
                        return Ok((Raw::Compound(name, vec![arg]), prec));
                    }
                }
                if infix_op(&name).is_some() && prefix_op(&name).is_none() {
                    return Err(self.err_at(&t, format!("unexpected operator `{name}`")));
                }
                Ok((Raw::Atom(name), 0))
            }
            other => Err(self.err_at(&t, format!("unexpected {}", describe(&other)))),
        }
    }

    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Var(_) | Tok::Num(_) | Tok::Open | Tok::OpenList | Tok::Functor(_) => true,
            Tok::Name(n) => infix_op(n).is_none() || prefix_op(n).is_some(),
            _ => false,
        }
    }
}

fn fold_infix(name: &str, left: Raw, right: Raw) -> Raw {
    if name == "/" {
        if let (Raw::Num(a), Raw::Num(b)) = (&left, &right) {
            if !b.is_zero() {
                return Raw::Num(a / b);
            }
        }
    }
    Raw::Compound(name.to_string(), vec![left, right])
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) | Tok::Functor(n) => format!("`{n}`"),
        Tok::Var(n) => format!("variable `{n}`"),
        Tok::Num(q) => format!("number `{q}`"),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::OpenList => "`[`".into(),
        Tok::CloseList => "`]`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn constraint_op(name: &str) -> Option<ConstraintOp> {
    Some(match name {
        "=" => ConstraintOp::Unify,
        "\\=" => ConstraintOp::NotUnify,
        ".<." | "#<" | "<" => ConstraintOp::Lt,
        ".>." | "#>" | ">" => ConstraintOp::Gt,
        ".=<." | "#=<" | "=<" => ConstraintOp::Le,
        ".>=." | "#>=" | ">=" => ConstraintOp::Ge,
        ".=." | "#=" | "is" | "=:=" => ConstraintOp::ArithEq,
        ".\\=." | ".<>." | "#\\=" | "=\\=" => ConstraintOp::ArithNe,
        _ => return None,
    })
}

/// Converts raw terms of one clause, numbering variables in first-occurrence order.
struct ClauseBuilder {
    ids: HashMap<String, Var>,
    names: Vec<String>,
}

impl ClauseBuilder {
    fn new() -> Self {
        ClauseBuilder { ids: HashMap::new(), names: Vec::new() }
    }

    fn var(&mut self, name: &str) -> Var {
        if name != "_" {
            if let Some(v) = self.ids.get(name) {
                return *v;
            }
        }
        let v = Var(self.names.len() as u32);
        self.names.push(name.to_string());
        if name != "_" {
            self.ids.insert(name.to_string(), v);
        }
        v
    }

    fn term(&mut self, raw: &Raw) -> Term {
        match raw {
            Raw::Var(n) => Term::Var(self.var(n)),
            Raw::Atom(a) => Term::Atom(sym(a)),
            Raw::Num(q) => Term::Num(q.clone()),
            Raw::Compound(f, args) => {
                let args = args.iter().map(|a| self.term(a)).collect();
                Term::compound(f, args)
            }
        }
    }

    fn literal(&mut self, raw: &Raw, at: (usize, usize)) -> Result<Literal, ParseError> {
        let bad = |msg: String| ParseError { line: at.0, col: at.1, message: msg };
        match raw {
            Raw::Compound(f, args) if f == "not" && args.len() == 1 => match self.literal(&args[0], at)? {
                Literal::Atom { negated: false, atom } => Ok(Literal::neg(atom)),
                _ => Err(bad("`not` applies only to predicate atoms".into())),
            },
            Raw::Compound(f, args) if f == "forall" && args.len() == 2 => {
                let Raw::Var(name) = &args[0] else {
                    return Err(bad("first argument of forall must be a variable".into()));
                };
                let var = self.var(name);
                let goal = self.literal(&args[1], at)?;
                Ok(Literal::Forall { var, goal: Box::new(goal) })
            }
            Raw::Compound(f, args) if args.len() == 2 && constraint_op(f).is_some() => {
                let op = constraint_op(f).unwrap();
                Ok(Literal::constraint(op, self.term(&args[0]), self.term(&args[1])))
            }
            Raw::Compound(f, _) if f == "," || f == ";" || f == ":-" => {
                Err(bad(format!("unexpected `{f}` in goal position")))
            }
            Raw::Atom(_) | Raw::Compound(_, _) => Ok(Literal::pos(self.term(raw))),
            Raw::Var(n) => Err(bad(format!("variable `{n}` used as a goal"))),
            Raw::Num(_) => Err(bad("number used as a goal".into())),
        }
    }

    fn body(&mut self, raw: &Raw, at: (usize, usize)) -> Result<Vec<Literal>, ParseError> {
        let mut goals = Vec::new();
        let mut cur = raw;
        loop {
            match cur {
                Raw::Compound(f, args) if f == "," && args.len() == 2 => {
                    goals.push(self.literal(&args[0], at)?);
                    cur = &args[1];
                }
                _ => {
                    goals.push(self.literal(cur, at)?);
                    return Ok(goals);
                }
            }
        }
    }
}

/// Options controlling what the clause reader accepts.
#[derive(Clone, Copy, Default)]
struct Mode {
    /// Accept `not p(..) :- ...` heads (compiled database dumps).
    dual_heads: bool,
}

struct ProgramReader {
    rules: Vec<Rule>,
    directives: Vec<Directive>,
    shows: Vec<(String, usize, usize, usize)>,
}

fn split_clauses(src: &str) -> Result<Vec<Vec<Token>>, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for t in toks {
        match t.tok {
            Tok::End => {
                if cur.is_empty() {
                    return Err(ParseError { line: t.line, col: t.col, message: "empty clause".into() });
                }
                let end = t.clone();
                cur.push(Token { tok: Tok::Eof, ..end });
                clauses.push(std::mem::take(&mut cur));
            }
            Tok::Eof => {
                if let Some(first) = cur.first() {
                    return Err(ParseError {
                        line: t.line,
                        col: t.col,
                        message: format!(
                            "clause starting at {}:{} is not terminated by `.`",
                            first.line, first.col
                        ),
                    });
                }
            }
            _ => cur.push(t),
        }
    }
    Ok(clauses)
}

impl ProgramReader {
    fn clause(&mut self, toks: Vec<Token>, mode: Mode) -> Result<(), ParseError> {
        let at = (toks[0].line, toks[0].col);
        if let (Tok::Name(hash), Some(Tok::Name(show))) = (&toks[0].tok, toks.get(1).map(|t| &t.tok)) {
            if hash == "#" && show == "show" {
                return self.show(&toks[2..], at);
            }
        }
        let mut p = Parser { toks, pos: 0 };
        let raw = p.parse(1200)?;
        if p.peek().tok != Tok::Eof {
            let t = p.peek().clone();
            return Err(p.err_at(&t, format!("unexpected {}", describe(&t.tok))));
        }
        let mut cb = ClauseBuilder::new();
        match &raw {
            Raw::Compound(f, args) if f == "?-" && args.len() == 1 => {
                let goals = cb.body(&args[0], at)?;
                self.directives.push(Directive::Query(Query { goals, var_names: cb.names }));
            }
            Raw::Compound(f, args) if f == ":-" && args.len() == 1 => {
                let body = cb.body(&args[0], at)?;
                self.rules.push(Rule { head: Head::False, body, var_names: cb.names });
            }
            Raw::Compound(f, args) if f == ":-" && args.len() == 2 => {
                let head = head(&mut cb, &args[0], at, mode)?;
                let body = cb.body(&args[1], at)?;
                self.rules.push(Rule { head, body, var_names: cb.names });
            }
            _ => {
                let head = head(&mut cb, &raw, at, mode)?;
                self.rules.push(Rule { head, body: vec![], var_names: cb.names });
            }
        }
        Ok(())
    }

    fn show(&mut self, toks: &[Token], at: (usize, usize)) -> Result<(), ParseError> {
        let bad = |msg: &str| ParseError { line: at.0, col: at.1, message: msg.into() };
        match toks {
            [Token { tok: Tok::Name(n), .. }, Token { tok: Tok::Name(slash), .. }, Token { tok: Tok::Num(k), .. }, Token { tok: Tok::Eof, .. }]
                if slash == "/" =>
            {
                if !k.is_integer() || k.is_negative() {
                    return Err(bad("arity in #show must be a non-negative integer"));
                }
                let arity: usize = k.to_integer().try_into().map_err(|_| bad("arity too large"))?;
                self.directives.push(Directive::Show { name: sym(n), arity });
                self.shows.push((n.clone(), arity, at.0, at.1));
                Ok(())
            }
            _ => Err(bad("expected `#show name/arity.`")),
        }
    }
}

fn head(cb: &mut ClauseBuilder, raw: &Raw, at: (usize, usize), mode: Mode) -> Result<Head, ParseError> {
    let bad = |msg: String| ParseError { line: at.0, col: at.1, message: msg };
    match raw {
        Raw::Compound(f, args) if f == "not" && args.len() == 1 => {
            if !mode.dual_heads {
                return Err(bad("`not` is not allowed in a clause head".into()));
            }
            match head(cb, &args[0], at, mode)? {
                Head::Atom { negated: false, atom } => Ok(Head::Atom { negated: true, atom }),
                _ => Err(bad("malformed negated head".into())),
            }
        }
        Raw::Compound(f, args)
            if (args.len() == 2 && (constraint_op(f).is_some() || f == "," || f == ";"))
                || f == "forall" =>
        {
            Err(bad(format!("`{f}` cannot be a clause head")))
        }
        Raw::Atom(_) | Raw::Compound(_, _) => Ok(Head::Atom { negated: false, atom: cb.term(raw) }),
        Raw::Var(n) => Err(bad(format!("variable `{n}` cannot be a clause head"))),
        Raw::Num(_) => Err(bad("number cannot be a clause head".into())),
    }
}

fn read(text: &str, mode: Mode) -> Result<(Program, Vec<Warning>), ParseError> {
    let mut reader = ProgramReader { rules: Vec::new(), directives: Vec::new(), shows: Vec::new() };
    for clause in split_clauses(text)? {
        reader.clause(clause, mode)?;
    }
    let mut arities: HashMap<String, HashSet<usize>> = HashMap::new();
    let mut note = |t: &Term| {
        if let Some((f, n)) = t.functor() {
            arities.entry(f.to_string()).or_default().insert(n);
        }
    };
    fn walk(lit: &Literal, note: &mut impl FnMut(&Term)) {
        match lit {
            Literal::Atom { atom, .. } => note(atom),
            Literal::Forall { goal, .. } => walk(goal, note),
            Literal::Constraint { .. } => {}
        }
    }
    for r in &reader.rules {
        if let Some(h) = r.head_atom() {
            note(h);
        }
        for l in &r.body {
            walk(l, &mut note);
        }
    }
    let warnings = reader
        .shows
        .iter()
        .filter_map(|(n, k, line, col)| {
            let known = arities.get(n.as_str())?;
            if known.contains(k) {
                return None;
            }
            let mut ks: Vec<_> = known.iter().copied().collect();
            ks.sort();
            let list = ks.iter().map(|k| format!("{n}/{k}")).collect::<Vec<_>>().join(", ");
            Some(Warning {
                line: *line,
                col: *col,
                message: format!("#show {n}/{k} matches no predicate; defined as {list}"),
            })
        })
        .collect();
    Ok((Program { rules: reader.rules, directives: reader.directives }, warnings))
}

/// Parses a program, returning it together with non-fatal diagnostics.
pub fn parse_program_with_warnings(text: &str) -> Result<(Program, Vec<Warning>), ParseError> {
    read(text, Mode::default())
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with_warnings(text).map(|(p, _)| p)
}

/// Parses the output of a compiled-database dump, which may contain `not` heads.
pub fn parse_dump(text: &str) -> Result<Program, ParseError> {
    read(text, Mode { dual_heads: true }).map(|(p, _)| p)
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let clauses = split_clauses(text)?;
    let bad = |line, col, msg: &str| ParseError { line, col, message: msg.into() };
    let [clause] = clauses.as_slice() else {
        return Err(match clauses.get(1) {
            Some(c) => bad(c[0].line, c[0].col, "expected a single query"),
            None => bad(1, 1, "expected a query `?- goals.`"),
        });
    };
    let at = (clause[0].line, clause[0].col);
    let starts_query = matches!(&clause[0].tok, Tok::Name(n) if n == "?-");
    if !starts_query {
        return Err(bad(at.0, at.1, "query must start with `?-`"));
    }
    if clause.len() == 2 {
        return Err(bad(clause[1].line, clause[1].col, "empty query"));
    }
    let mut p = Parser { toks: clause.clone(), pos: 1 };
    let raw = p.parse(1199)?;
    if p.peek().tok != Tok::Eof {
        let t = p.peek().clone();
        return Err(p.err_at(&t, format!("unexpected {}", describe(&t.tok))));
    }
    let mut cb = ClauseBuilder::new();
    let goals = cb.body(&raw, at)?;
    Ok(Query { goals, var_names: cb.names })
}

/// Parses a single term (variables numbered from zero), mainly for tests.
pub fn parse_term(text: &str) -> Result<(Term, Vec<String>), ParseError> {
    let mut toks = Lexer::new(text).tokens()?;
    if let Some(pos) = toks.iter().position(|t| t.tok == Tok::End) {
        toks.truncate(pos);
        let last = toks.last().cloned().unwrap_or(Token { tok: Tok::Eof, line: 1, col: 1 });
        toks.push(Token { tok: Tok::Eof, ..last });
    }
    let mut p = Parser { toks, pos: 0 };
    let raw = p.parse(1200)?;
    if p.peek().tok != Tok::Eof {
        let t = p.peek().clone();
        return Err(p.err_at(&t, format!("unexpected {}", describe(&t.tok))));
    }
    let mut cb = ClauseBuilder::new();
    let t = cb.term(&raw);
    Ok((t, cb.names))
}
