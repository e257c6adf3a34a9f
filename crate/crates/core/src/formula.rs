//! FOC formulas: first-order logic with ∃^∞ and ∃^{k,m}, and their text syntax.
//!
//! ```text
//! formula := quant | bool
//! quant   := ("E" | "A") ident "." formula | "Einf" ident "." formula | "Emod" nat "," nat ident "." formula
//! bool    := bool ("&" | "|" | "->") bool | "!" bool | "(" formula ")" | atom | "true" | "false"
//! atom    := ident "(" ident {"," ident} ")" | ident "=" ident | ident "~" ident
//! ```
//! Precedence `!` > `&` > `|` > `->` (right associative); quantifiers reach as far right as possible.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<String>),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsInf(String, Box<Formula>),
    /// ∃^{k,m}: the number of witnesses is finite and congruent to k modulo m.
    ExistsMod(u64, u64, String, Box<Formula>),
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        let f = p.formula()?;
        if p.pos != p.toks.len() {
            return Err(p.error("trailing input"));
        }
        f.check_well_named()?;
        Ok(f)
    }

    pub fn atom(rel: &str, args: &[&str]) -> Formula {
        Formula::Atom(rel.to_string(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    /// Conjunction of a list (`true` when empty).
    pub fn all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Disjunction of a list (`false` when empty).
    pub fn any(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn free_var_set(&self) -> BTreeSet<String> {
        self.free_vars().into_iter().collect()
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut push = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|a| push(a, bound)),
            Formula::Eq(a, b) => {
                push(a, bound);
                push(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) | Formula::ExistsInf(x, f) | Formula::ExistsMod(_, _, x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// No variable is bound twice along a path, and counting quantifiers have k < m.
    pub fn check_well_named(&self) -> Result<()> {
        fn go(f: &Formula, bound: &mut Vec<String>) -> Result<()> {
            match f {
                Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => Ok(()),
                Formula::Not(g) => go(g, bound),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound)?;
                    go(b, bound)
                }
                Formula::Exists(x, g) | Formula::Forall(x, g) | Formula::ExistsInf(x, g) | Formula::ExistsMod(_, _, x, g) => {
                    if let Formula::ExistsMod(k, m, _, _) = f {
                        if *m == 0 || k >= m {
                            return Err(Error::IllFormed(format!("Emod {k},{m}: need k < m and m >= 1")));
                        }
                    }
                    if bound.contains(x) {
                        return Err(Error::IllFormed(format!("variable `{x}` bound twice on one path")));
                    }
                    bound.push(x.clone());
                    let r = go(g, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// All relation names used, with their arities.
    pub fn relations(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom(r, args) = f {
                let e = (r.clone(), args.len());
                if !out.contains(&e) {
                    out.push(e);
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g)
            | Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::ExistsInf(_, g)
            | Formula::ExistsMod(_, _, _, g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Variables bound anywhere in the formula.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Exists(x, _) | Formula::Forall(x, _) | Formula::ExistsInf(x, _) | Formula::ExistsMod(_, _, x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Renames free occurrences according to `map`; bound variables are left alone.
    pub fn rename_free(&self, map: &dyn Fn(&str) -> Option<String>) -> Formula {
        self.rename_inner(map, &mut Vec::new())
    }

    fn rename_inner(&self, map: &dyn Fn(&str) -> Option<String>, bound: &mut Vec<String>) -> Formula {
        let r = |v: &String, bound: &Vec<String>| -> String {
            if bound.contains(v) {
                v.clone()
            } else {
                map(v).unwrap_or_else(|| v.clone())
            }
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(rel, args) => Formula::Atom(rel.clone(), args.iter().map(|a| r(a, bound)).collect()),
            Formula::Eq(a, b) => Formula::Eq(r(a, bound), r(b, bound)),
            Formula::Not(f) => Formula::not(f.rename_inner(map, bound)),
            Formula::And(a, b) => Formula::and(a.rename_inner(map, bound), b.rename_inner(map, bound)),
            Formula::Or(a, b) => Formula::or(a.rename_inner(map, bound), b.rename_inner(map, bound)),
            Formula::Implies(a, b) => Formula::implies(a.rename_inner(map, bound), b.rename_inner(map, bound)),
            Formula::Exists(x, f) | Formula::Forall(x, f) | Formula::ExistsInf(x, f) | Formula::ExistsMod(_, _, x, f) => {
                bound.push(x.clone());
                let g = Box::new(f.rename_inner(map, bound));
                bound.pop();
                match self {
                    Formula::Exists(..) => Formula::Exists(x.clone(), g),
                    Formula::Forall(..) => Formula::Forall(x.clone(), g),
                    Formula::ExistsInf(..) => Formula::ExistsInf(x.clone(), g),
                    Formula::ExistsMod(k, m, ..) => Formula::ExistsMod(*k, *m, x.clone(), g),
                    _ => unreachable!(),
                }
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Exists(..) | Formula::Forall(..) | Formula::ExistsInf(..) | Formula::ExistsMod(..) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.prec() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(r, args) if r == "~" && args.len() == 2 => write!(f, "{} ~ {}", args[0], args[1])?,
            Formula::Atom(r, args) => write!(f, "{r}({})", args.join(","))?,
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Not(g) => {
                f.write_str("!")?;
                g.write(f, 4)?;
            }
            Formula::And(a, b) => {
                a.write(f, 3)?;
                f.write_str(" & ")?;
                b.write(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.write(f, 2)?;
                f.write_str(" | ")?;
                b.write(f, 3)?;
            }
            Formula::Implies(a, b) => {
                a.write(f, 2)?;
                f.write_str(" -> ")?;
                b.write(f, 1)?;
            }
            Formula::Exists(x, g) => {
                write!(f, "E {x} . ")?;
                g.write(f, 0)?;
            }
            Formula::Forall(x, g) => {
                write!(f, "A {x} . ")?;
                g.write(f, 0)?;
            }
            Formula::ExistsInf(x, g) => {
                write!(f, "Einf {x} . ")?;
                g.write(f, 0)?;
            }
            Formula::ExistsMod(k, m, x, g) => {
                write!(f, "Emod {k},{m} {x} . ")?;
                g.write(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Formula::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| Error::Parse { pos: start, msg: "number too large".into() })?;
            out.push((Tok::Nat(n), start));
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Sym("->"), start));
            i += 2;
        } else {
            let s = match c {
                '(' => "(",
                ')' => ")",
                ',' => ",",
                '.' => ".",
                '=' => "=",
                '~' => "~",
                '!' => "!",
                '&' => "&",
                '|' => "|",
                _ => return Err(Error::Parse { pos: start, msg: format!("unexpected character `{c}`") }),
            };
            out.push((Tok::Sym(s), start));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        let pos = self.toks.get(self.pos).map(|t| t.1).unwrap_or(usize::MAX);
        Error::Parse { pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    fn nat(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Nat(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn at_quantifier(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(k)), Some(Tok::Ident(_))) => matches!(k.as_str(), "E" | "A" | "Einf"),
            (Some(Tok::Ident(k)), Some(Tok::Nat(_))) => k == "Emod",
            _ => false,
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.implication()
        }
    }

    fn quant(&mut self) -> Result<Formula> {
        let kw = self.ident()?;
        let (k, m) = if kw == "Emod" {
            let k = self.nat()?;
            self.expect(",")?;
            (k, self.nat()?)
        } else {
            (0, 0)
        };
        let x = self.ident()?;
        self.expect(".")?;
        let body = Box::new(self.formula()?);
        Ok(match kw.as_str() {
            "E" => Formula::Exists(x, body),
            "A" => Formula::Forall(x, body),
            "Einf" => Formula::ExistsInf(x, body),
            _ => Formula::ExistsMod(k, m, x, body),
        })
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = if self.at_quantifier() { self.quant()? } else { self.implication()? };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.eat("|") {
            if self.at_quantifier() {
                return Ok(Formula::or(f, self.quant()?));
            }
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat("&") {
            if self.at_quantifier() {
                return Ok(Formula::and(f, self.quant()?));
            }
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat("!") {
            if self.at_quantifier() {
                return Ok(Formula::not(self.quant()?));
            }
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_quantifier() {
            return self.quant();
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        let name = self.ident()?;
        if self.eat("(") {
            let mut args = vec![self.ident()?];
            while self.eat(",") {
                args.push(self.ident()?);
            }
            self.expect(")")?;
            return Ok(Formula::Atom(name, args));
        }
        if self.eat("=") {
            let rhs = self.ident()?;
            return Ok(Formula::Eq(name, rhs));
        }
        if self.eat("~") {
            let rhs = self.ident()?;
            return Ok(Formula::Atom("~".into(), vec![name, rhs]));
        }
        match name.as_str() {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            _ => Err(self.error("expected `(` or `=` after identifier")),
        }
    }
}
