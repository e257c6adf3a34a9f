//! First-order formulas over ⟨ω, ≤, suc, 0⟩ and their quantifier elimination.
//!
//! ```text
//! formula := ("E" | "A") ident "." formula | bool
//! bool    := bool ("&" | "|" | "->") bool | "!" bool | "(" formula ")" | "true" | "false" | atom
//! atom    := term ("<=" | "<" | ">=" | ">" | "=") term
//! term    := base {("+" | "-") nat}
//! base    := ident | nat | "-" nat | "suc" "(" term ")"
//! ```
//! Terms are evaluated over the integers; `suc(x)` is `x + 1` and `suc(suc(0))` is `2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// `var + k`, or the constant `k` when `var` is `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub var: Option<String>,
    pub k: i64,
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term { var: Some(x.to_string()), k: 0 }
    }

    pub fn offset(x: &str, k: i64) -> Term {
        Term { var: Some(x.to_string()), k }
    }

    pub fn constant(k: i64) -> Term {
        Term { var: None, k }
    }

    fn value(&self, env: &dyn Fn(&str) -> Option<i64>) -> Result<i64> {
        match &self.var {
            None => Ok(self.k),
            Some(x) => env(x)
                .map(|v| v + self.k)
                .ok_or_else(|| Error::IllFormed(format!("unassigned variable `{x}`"))),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.var, self.k) {
            (None, k) => write!(f, "{k}"),
            (Some(x), 0) => write!(f, "{x}"),
            (Some(x), k) if k > 0 => write!(f, "{x} + {k}"),
            (Some(x), k) => write!(f, "{x} - {}", -k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Eq => "=",
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Le => a <= b,
            Cmp::Lt => a < b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
            Cmp::Eq => a == b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OrderFormula {
    True,
    False,
    Atom(Term, Cmp, Term),
    Not(Box<OrderFormula>),
    And(Box<OrderFormula>, Box<OrderFormula>),
    Or(Box<OrderFormula>, Box<OrderFormula>),
    Implies(Box<OrderFormula>, Box<OrderFormula>),
    Exists(String, Box<OrderFormula>),
    Forall(String, Box<OrderFormula>),
}

impl OrderFormula {
    pub fn parse(text: &str) -> Result<OrderFormula> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        let f = p.formula()?;
        if p.pos != p.toks.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(f)
    }

    pub fn atom(a: Term, c: Cmp, b: Term) -> OrderFormula {
        OrderFormula::Atom(a, c, b)
    }

    pub fn not(f: OrderFormula) -> OrderFormula {
        OrderFormula::Not(Box::new(f))
    }

    pub fn and(a: OrderFormula, b: OrderFormula) -> OrderFormula {
        OrderFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: OrderFormula, b: OrderFormula) -> OrderFormula {
        OrderFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, f: OrderFormula) -> OrderFormula {
        OrderFormula::Exists(x.to_string(), Box::new(f))
    }

    pub fn forall(x: &str, f: OrderFormula) -> OrderFormula {
        OrderFormula::Forall(x.to_string(), Box::new(f))
    }

    /// Conjunction; `true` when empty.
    pub fn all(fs: impl IntoIterator<Item = OrderFormula>) -> OrderFormula {
        fs.into_iter().reduce(OrderFormula::and).unwrap_or(OrderFormula::True)
    }

    /// Disjunction; `false` when empty.
    pub fn any(fs: impl IntoIterator<Item = OrderFormula>) -> OrderFormula {
        fs.into_iter().reduce(OrderFormula::or).unwrap_or(OrderFormula::False)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            OrderFormula::True | OrderFormula::False => {}
            OrderFormula::Atom(a, _, b) => {
                for t in [a, b] {
                    if let Some(x) = &t.var {
                        if !bound.contains(x) {
                            out.insert(x.clone());
                        }
                    }
                }
            }
            OrderFormula::Not(f) => f.collect_free(bound, out),
            OrderFormula::And(a, b) | OrderFormula::Or(a, b) | OrderFormula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            OrderFormula::Exists(x, f) | OrderFormula::Forall(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                OrderFormula::True | OrderFormula::False | OrderFormula::Atom(..) => {}
                OrderFormula::Not(g) => stack.push(g),
                OrderFormula::And(a, b) | OrderFormula::Or(a, b) | OrderFormula::Implies(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                OrderFormula::Exists(x, g) | OrderFormula::Forall(x, g) => {
                    out.insert(x.clone());
                    stack.push(g);
                }
            }
        }
        out
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_depth() == 0
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            OrderFormula::True | OrderFormula::False | OrderFormula::Atom(..) => 0,
            OrderFormula::Not(f) => f.quantifier_depth(),
            OrderFormula::And(a, b) | OrderFormula::Or(a, b) | OrderFormula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            OrderFormula::Exists(_, f) | OrderFormula::Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// The largest |c| over atoms written as u − v ≤ c.
    pub fn max_constant(&self) -> u64 {
        match self {
            OrderFormula::True | OrderFormula::False => 0,
            OrderFormula::Atom(a, _, b) => a.k.unsigned_abs() + b.k.unsigned_abs() + 1,
            OrderFormula::Not(f) | OrderFormula::Exists(_, f) | OrderFormula::Forall(_, f) => f.max_constant(),
            OrderFormula::And(a, b) | OrderFormula::Or(a, b) | OrderFormula::Implies(a, b) => {
                a.max_constant().max(b.max_constant())
            }
        }
    }

    /// Truth under `env` with a quantifier at nesting level j (outermost is 1) ranging over
    /// `0..=base + j·step`. The growing bound lets an inner ∀ see values above outer witnesses.
    pub fn eval_bounded(&self, env: &dyn Fn(&str) -> Option<i64>, base: u64, step: u64) -> Result<bool> {
        let mut stack: Vec<(String, i64)> = Vec::new();
        self.eval_inner(env, (base, step), &mut stack)
    }

    /// Truth of a quantifier-free formula.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<i64>) -> Result<bool> {
        if !self.is_quantifier_free() {
            return Err(Error::IllFormed("formula has quantifiers; use eval_bounded or qe".into()));
        }
        self.eval_bounded(env, 0, 0)
    }

    /// Truth of a quantifier-free formula over variables `x0, x1, ...` at `point`.
    pub fn eval_at(&self, point: &[u64]) -> Result<bool> {
        self.eval(&|x| indexed_var(x).and_then(|i| point.get(i)).map(|&v| v as i64))
    }

    fn eval_inner(&self, env: &dyn Fn(&str) -> Option<i64>, range: (u64, u64), stack: &mut Vec<(String, i64)>) -> Result<bool> {
        Ok(match self {
            OrderFormula::True => true,
            OrderFormula::False => false,
            OrderFormula::Atom(a, c, b) => {
                let look = |x: &str| stack.iter().rev().find(|(n, _)| n == x).map(|p| p.1).or_else(|| env(x));
                c.holds(a.value(&look)?, b.value(&look)?)
            }
            OrderFormula::Not(f) => !f.eval_inner(env, range, stack)?,
            OrderFormula::And(a, b) => a.eval_inner(env, range, stack)? && b.eval_inner(env, range, stack)?,
            OrderFormula::Or(a, b) => a.eval_inner(env, range, stack)? || b.eval_inner(env, range, stack)?,
            OrderFormula::Implies(a, b) => !a.eval_inner(env, range, stack)? || b.eval_inner(env, range, stack)?,
            OrderFormula::Exists(x, f) | OrderFormula::Forall(x, f) => {
                let want = matches!(self, OrderFormula::Exists(..));
                let mut hit = false;
                let top = range.0 + (stack.len() as u64 + 1) * range.1;
                for v in 0..=top as i64 {
                    stack.push((x.clone(), v));
                    let r = f.eval_inner(env, range, stack);
                    stack.pop();
                    if r? == want {
                        hit = true;
                        break;
                    }
                }
                hit == want
            }
        })
    }

    pub fn rename_free(&self, map: &dyn Fn(&str) -> Option<String>) -> OrderFormula {
        self.rename_inner(map, &mut Vec::new())
    }

    fn rename_inner(&self, map: &dyn Fn(&str) -> Option<String>, bound: &mut Vec<String>) -> OrderFormula {
        let rt = |t: &Term, bound: &Vec<String>| match &t.var {
            Some(x) if !bound.contains(x) => Term { var: Some(map(x).unwrap_or_else(|| x.clone())), k: t.k },
            _ => t.clone(),
        };
        match self {
            OrderFormula::True | OrderFormula::False => self.clone(),
            OrderFormula::Atom(a, c, b) => OrderFormula::Atom(rt(a, bound), *c, rt(b, bound)),
            OrderFormula::Not(f) => OrderFormula::not(f.rename_inner(map, bound)),
            OrderFormula::And(a, b) => OrderFormula::and(a.rename_inner(map, bound), b.rename_inner(map, bound)),
            OrderFormula::Or(a, b) => OrderFormula::or(a.rename_inner(map, bound), b.rename_inner(map, bound)),
            OrderFormula::Implies(a, b) => {
                OrderFormula::Implies(Box::new(a.rename_inner(map, bound)), Box::new(b.rename_inner(map, bound)))
            }
            OrderFormula::Exists(x, f) | OrderFormula::Forall(x, f) => {
                bound.push(x.clone());
                let g = Box::new(f.rename_inner(map, bound));
                bound.pop();
                if matches!(self, OrderFormula::Exists(..)) {
                    OrderFormula::Exists(x.clone(), g)
                } else {
                    OrderFormula::Forall(x.clone(), g)
                }
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            OrderFormula::Exists(..) | OrderFormula::Forall(..) => 0,
            OrderFormula::Implies(..) => 1,
            OrderFormula::Or(..) => 2,
            OrderFormula::And(..) => 3,
            OrderFormula::Not(..) | OrderFormula::Atom(..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.prec() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            OrderFormula::True => f.write_str("true")?,
            OrderFormula::False => f.write_str("false")?,
            OrderFormula::Atom(a, c, b) => write!(f, "{a} {} {b}", c.symbol())?,
            OrderFormula::Not(g) => {
                f.write_str("!")?;
                g.write(f, 5)?;
            }
            OrderFormula::And(a, b) => {
                a.write(f, 3)?;
                f.write_str(" & ")?;
                b.write(f, 4)?;
            }
            OrderFormula::Or(a, b) => {
                a.write(f, 2)?;
                f.write_str(" | ")?;
                b.write(f, 3)?;
            }
            OrderFormula::Implies(a, b) => {
                a.write(f, 2)?;
                f.write_str(" -> ")?;
                b.write(f, 1)?;
            }
            OrderFormula::Exists(x, g) => {
                write!(f, "E {x} . ")?;
                g.write(f, 0)?;
            }
            OrderFormula::Forall(x, g) => {
                write!(f, "A {x} . ")?;
                g.write(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for OrderFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl std::str::FromStr for OrderFormula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OrderFormula::parse(s)
    }
}

/// `xN` ↦ N.
pub(crate) fn indexed_var(x: &str) -> Option<usize> {
    let digits = x.strip_prefix('x')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(i64),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| Error::Parse { pos: start, msg: "number too large".into() })?;
            out.push((Tok::Nat(n), start));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = match two.as_str() {
            "->" => Some("->"),
            "<=" => Some("<="),
            ">=" => Some(">="),
            _ => None,
        };
        if let Some(s) = sym {
            out.push((Tok::Sym(s), start));
            i += 2;
            continue;
        }
        let s = match c {
            '(' => "(",
            ')' => ")",
            '.' => ".",
            '=' => "=",
            '<' => "<",
            '>' => ">",
            '+' => "+",
            '-' => "-",
            '!' => "!",
            '&' => "&",
            '|' => "|",
            _ => return Err(Error::Parse { pos: start, msg: format!("unexpected character `{c}`") }),
        };
        out.push((Tok::Sym(s), start));
        i += 1;
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

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek_at(0), Some(Tok::Sym(t)) if *t == s) {
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
        match self.peek_at(0) {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    fn nat(&mut self) -> Result<i64> {
        match self.peek_at(0) {
            Some(Tok::Nat(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn at_quantifier(&self) -> bool {
        matches!(
            (self.peek_at(0), self.peek_at(1), self.peek_at(2)),
            (Some(Tok::Ident(k)), Some(Tok::Ident(_)), Some(Tok::Sym("."))) if k == "E" || k == "A"
        )
    }

    fn formula(&mut self) -> Result<OrderFormula> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.implication()
        }
    }

    fn quant(&mut self) -> Result<OrderFormula> {
        let kw = self.ident()?;
        let x = self.ident()?;
        self.expect(".")?;
        let body = Box::new(self.formula()?);
        Ok(if kw == "E" { OrderFormula::Exists(x, body) } else { OrderFormula::Forall(x, body) })
    }

    fn implication(&mut self) -> Result<OrderFormula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = if self.at_quantifier() { self.quant()? } else { self.implication()? };
            return Ok(OrderFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<OrderFormula> {
        let mut f = self.conjunction()?;
        while self.eat("|") {
            if self.at_quantifier() {
                return Ok(OrderFormula::or(f, self.quant()?));
            }
            f = OrderFormula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<OrderFormula> {
        let mut f = self.unary()?;
        while self.eat("&") {
            if self.at_quantifier() {
                return Ok(OrderFormula::and(f, self.quant()?));
            }
            f = OrderFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<OrderFormula> {
        if self.eat("!") {
            if self.at_quantifier() {
                return Ok(OrderFormula::not(self.quant()?));
            }
            return Ok(OrderFormula::not(self.unary()?));
        }
        if self.at_quantifier() {
            return self.quant();
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if let Some(Tok::Ident(s)) = self.peek_at(0) {
            let s = s.clone();
            if s == "true" || s == "false" {
                self.pos += 1;
                return Ok(if s == "true" { OrderFormula::True } else { OrderFormula::False });
            }
        }
        let a = self.term()?;
        let cmp = [("<=", Cmp::Le), ("<", Cmp::Lt), (">=", Cmp::Ge), (">", Cmp::Gt), ("=", Cmp::Eq)]
            .into_iter()
            .find(|(s, _)| self.eat(s))
            .map(|p| p.1)
            .ok_or_else(|| self.error("expected a comparison"))?;
        let b = self.term()?;
        Ok(OrderFormula::Atom(a, cmp, b))
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = match self.peek_at(0) {
            Some(Tok::Ident(s)) if s == "suc" && self.peek_at(1) == Some(&Tok::Sym("(")) => {
                self.pos += 2;
                let mut t = self.term()?;
                self.expect(")")?;
                t.k += 1;
                t
            }
            Some(Tok::Ident(_)) => Term::var(&self.ident()?),
            Some(Tok::Nat(_)) => Term::constant(self.nat()?),
            Some(Tok::Sym("-")) => {
                self.pos += 1;
                Term::constant(-self.nat()?)
            }
            _ => return Err(self.error("expected a term")),
        };
        loop {
            if self.eat("+") {
                t.k += self.nat()?;
            } else if self.eat("-") {
                t.k -= self.nat()?;
            } else {
                return Ok(t);
            }
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Quantifier elimination over difference constraints.

/// Index 0 stands for the constant 0.
const ZERO: usize = 0;

/// A conjunction of constraints u − v ≤ c, keyed by (u, v).
type Clause = BTreeMap<(usize, usize), i64>;

/// Closes a clause under implication (every variable is ≥ 0); `None` if unsatisfiable.
fn close(cl: &Clause) -> Option<Clause> {
    let mut vs: BTreeSet<usize> = cl.keys().flat_map(|&(u, v)| [u, v]).collect();
    vs.insert(ZERO);
    let vs: Vec<usize> = vs.into_iter().collect();
    let pos: BTreeMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = vs.len();
    let mut m = vec![vec![None::<i64>; n]; n];
    for i in 0..n {
        m[i][i] = Some(0);
        // 0 − v ≤ 0
        m[0][i] = Some(0);
    }
    for (&(u, v), &c) in cl {
        let e = &mut m[pos[&u]][pos[&v]];
        *e = Some(e.map_or(c, |x| x.min(c)));
    }
    for k in 0..n {
        for i in 0..n {
            let Some(a) = m[i][k] else { continue };
            for j in 0..n {
                if let Some(b) = m[k][j] {
                    if m[i][j].is_none_or(|x| a + b < x) {
                        m[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    if (0..n).any(|i| m[i][i].unwrap() < 0) {
        return None;
    }
    let mut out = Clause::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                if let Some(c) = m[i][j] {
                    out.insert((vs[i], vs[j]), c);
                }
            }
        }
    }
    Some(out)
}

/// Shortest u→v bound using `edges` plus the implicit 0 − w ≤ 0 constraints.
fn implied_bound(edges: &[((usize, usize), i64)], u: usize, v: usize) -> Option<i64> {
    let mut vs: BTreeSet<usize> = edges.iter().flat_map(|&((a, b), _)| [a, b]).collect();
    vs.extend([ZERO, u, v]);
    let mut dist: BTreeMap<usize, i64> = BTreeMap::new();
    dist.insert(u, 0);
    // Bellman-Ford; closed satisfiable clauses have no negative cycles
    for _ in 0..vs.len() {
        let mut changed = false;
        let mut relax = |a: usize, b: usize, c: i64, dist: &mut BTreeMap<usize, i64>| {
            if let Some(&da) = dist.get(&a) {
                if dist.get(&b).is_none_or(|&db| da + c < db) {
                    dist.insert(b, da + c);
                    changed = true;
                }
            }
        };
        for &((a, b), c) in edges {
            relax(a, b, c, &mut dist);
        }
        for &w in &vs {
            relax(ZERO, w, 0, &mut dist);
        }
        if !changed {
            break;
        }
    }
    dist.get(&v).copied()
}

/// A closed clause with implied constraints removed; `None` if unsatisfiable.
fn normalize(cl: &Clause) -> Option<Clause> {
    let closed = close(cl)?;
    let mut kept: Vec<((usize, usize), i64)> = closed.into_iter().collect();
    let mut i = 0;
    while i < kept.len() {
        let ((u, v), c) = kept[i];
        let rest: Vec<_> = kept.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, e)| *e).collect();
        if implied_bound(&rest, u, v).is_some_and(|b| b <= c) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Some(kept.into_iter().collect())
}

/// Does the (closed) clause `a` imply every constraint of `b`?
fn entails(a_closed: &Clause, b: &Clause) -> bool {
    b.iter().all(|(&(u, v), &c)| {
        if u == v {
            return c >= 0;
        }
        let known = if u == ZERO { Some(0) } else { None };
        match (a_closed.get(&(u, v)).copied(), known) {
            (Some(x), Some(y)) => x.min(y) <= c,
            (Some(x), None) | (None, Some(x)) => x <= c,
            (None, None) => false,
        }
    })
}

/// A disjunction of clauses.
type Dnf = Vec<Clause>;

fn simplify(d: Dnf) -> Dnf {
    let mut seen: BTreeSet<Clause> = BTreeSet::new();
    for cl in d {
        if let Some(n) = normalize(&cl) {
            seen.insert(n);
        }
    }
    let all: Vec<Clause> = seen.into_iter().collect();
    if all.iter().any(|c| c.is_empty()) {
        return vec![Clause::new()];
    }
    let closed: Vec<Clause> = all.iter().map(|c| close(c).unwrap()).collect();
    // drop clauses that imply another (stronger clauses are redundant in a disjunction)
    let mut out = Vec::new();
    for i in 0..all.len() {
        let redundant = (0..all.len()).any(|j| {
            j != i && entails(&closed[i], &all[j]) && (!entails(&closed[j], &all[i]) || j < i)
        });
        if !redundant {
            out.push(all[i].clone());
        }
    }
    out
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let mut c = x.clone();
            for (&k, &v) in y {
                let e = c.entry(k).or_insert(v);
                *e = (*e).min(v);
            }
            out.push(c);
        }
    }
    simplify(out)
}

fn dnf_not(d: &Dnf) -> Dnf {
    let mut acc: Dnf = vec![Clause::new()];
    for cl in d {
        // ¬(u − v ≤ c) is v − u ≤ −c − 1
        let alts: Dnf = cl.iter().map(|(&(u, v), &c)| Clause::from([((v, u), -c - 1)])).collect();
        acc = dnf_and(&acc, &alts);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

fn eliminate(d: &Dnf, y: usize) -> Dnf {
    let out = d
        .iter()
        .filter_map(close)
        .map(|c| c.into_iter().filter(|&((u, v), _)| u != y && v != y).collect())
        .collect();
    simplify(out)
}

struct Qe {
    names: Vec<String>,
    free: BTreeMap<String, usize>,
    scope: Vec<(String, usize)>,
}

impl Qe {
    fn var(&mut self, t: &Term) -> usize {
        let Some(x) = &t.var else { return ZERO };
        if let Some(&(_, i)) = self.scope.iter().rev().find(|(n, _)| n == x) {
            return i;
        }
        if let Some(&i) = self.free.get(x) {
            return i;
        }
        self.names.push(x.clone());
        let i = self.names.len() - 1;
        self.free.insert(x.clone(), i);
        i
    }

    fn atom(&mut self, a: &Term, c: Cmp, b: &Term, pos: bool) -> Dnf {
        let (u, v) = (self.var(a), self.var(b));
        if u == v {
            let truth = c.holds(a.k, b.k) == pos;
            return if truth { vec![Clause::new()] } else { vec![] };
        }
        // a + ka (c) b + kb
        let d = b.k - a.k;
        let le = |u, v, c| Clause::from([((u, v), c)]);
        let cl = match (c, pos) {
            (Cmp::Le, true) | (Cmp::Gt, false) => vec![le(u, v, d)],
            (Cmp::Lt, true) | (Cmp::Ge, false) => vec![le(u, v, d - 1)],
            (Cmp::Ge, true) | (Cmp::Lt, false) => vec![le(v, u, -d)],
            (Cmp::Gt, true) | (Cmp::Le, false) => vec![le(v, u, -d - 1)],
            (Cmp::Eq, true) => vec![Clause::from([((u, v), d), ((v, u), -d)])],
            (Cmp::Eq, false) => vec![le(u, v, d - 1), le(v, u, -d - 1)],
        };
        simplify(cl)
    }

    fn bind(&mut self, x: &str) -> usize {
        self.names.push(x.to_string());
        let i = self.names.len() - 1;
        self.scope.push((x.to_string(), i));
        i
    }

    fn dnf(&mut self, f: &OrderFormula, pos: bool) -> Dnf {
        let tt = || vec![Clause::new()];
        match f {
            OrderFormula::True => if pos { tt() } else { vec![] },
            OrderFormula::False => if pos { vec![] } else { tt() },
            OrderFormula::Atom(a, c, b) => self.atom(a, *c, b, pos),
            OrderFormula::Not(g) => self.dnf(g, !pos),
            OrderFormula::And(a, b) | OrderFormula::Or(a, b) => {
                let (x, y) = (self.dnf(a, pos), self.dnf(b, pos));
                if matches!(f, OrderFormula::And(..)) == pos {
                    dnf_and(&x, &y)
                } else {
                    simplify(x.into_iter().chain(y).collect())
                }
            }
            OrderFormula::Implies(a, b) => {
                let g = OrderFormula::or(OrderFormula::not((**a).clone()), (**b).clone());
                self.dnf(&g, pos)
            }
            OrderFormula::Exists(x, g) | OrderFormula::Forall(x, g) => {
                let existential = matches!(f, OrderFormula::Exists(..));
                let y = self.bind(x);
                // ∃y g = elim(g);  ∀y g = ¬elim(¬g)
                let inner = self.dnf(g, existential);
                self.scope.pop();
                let e = eliminate(&inner, y);
                if existential == pos {
                    e
                } else {
                    dnf_not(&e)
                }
            }
        }
    }

    fn constraint_atom(&self, u: usize, v: usize, c: i64) -> OrderFormula {
        let t = |i: usize| Term::var(&self.names[i]);
        match (u, v) {
            // −v ≤ c, i.e. v ≥ −c
            (ZERO, v) => OrderFormula::Atom(t(v), Cmp::Ge, Term::constant(-c)),
            // u ≤ c
            (u, ZERO) => OrderFormula::not(OrderFormula::Atom(t(u), Cmp::Ge, Term::constant(c + 1))),
            (u, v) => OrderFormula::Atom(t(v), Cmp::Ge, Term::offset(&self.names[u], -c)),
        }
    }

    fn clause_formula(&self, cl: &Clause) -> OrderFormula {
        let mut parts = Vec::new();
        let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (&(u, v), &c) in cl {
            if done.contains(&(u, v)) {
                continue;
            }
            if cl.get(&(v, u)) == Some(&-c) {
                done.insert((v, u));
                // u = v + c
                let t = |i: usize| Term::var(&self.names[i]);
                parts.push(match (u, v) {
                    (ZERO, v) => OrderFormula::Atom(t(v), Cmp::Eq, Term::constant(-c)),
                    (u, ZERO) => OrderFormula::Atom(t(u), Cmp::Eq, Term::constant(c)),
                    (u, v) if c >= 0 => OrderFormula::Atom(t(u), Cmp::Eq, Term::offset(&self.names[v], c)),
                    (u, v) => OrderFormula::Atom(t(v), Cmp::Eq, Term::offset(&self.names[u], -c)),
                });
            } else {
                parts.push(self.constraint_atom(u, v, c));
            }
        }
        OrderFormula::all(parts)
    }
}

/// The quantifier-free disjunctive normal form of `phi` without any certification.
pub(crate) fn qe_uncertified(phi: &OrderFormula) -> OrderFormula {
    let mut q = Qe { names: vec!["0".into()], free: BTreeMap::new(), scope: Vec::new() };
    let d = q.dnf(phi, true);
    OrderFormula::any(d.iter().map(|cl| q.clause_formula(cl)))
}

/// Eliminates quantifiers. The result is a disjunction of conjunctions of atoms
/// `x = y + c`, `x >= y + c`, `x = c`, `x >= c` and negated `x >= c`. When the check is cheap
/// enough, equivalence is confirmed by exhaustive evaluation on a box of free values.
pub fn qe(phi: &OrderFormula) -> Result<OrderFormula> {
    let out = qe_uncertified(phi);
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    if !out.free_vars().iter().all(|x| free.contains(x)) {
        return Err(Error::Certificate("eliminated formula gained a free variable".into()));
    }
    let k = phi.max_constant().max(out.max_constant());
    let b = 2 * k + 4;
    let depth = phi.quantifier_depth() as u32;
    if depth > 8 {
        return Ok(out);
    }
    // a witness never needs to sit further than this above the values chosen so far
    let step = (k + 2) * (1u64 << (depth + 1));
    let points = (b + 1).checked_pow(free.len() as u32).unwrap_or(u64::MAX);
    let cost = (1..=depth as u64).fold(points, |acc, j| acc.saturating_mul(b + j * step + 1));
    if cost > 2_000_000 {
        return Ok(out);
    }
    let mut point = vec![0u64; free.len()];
    loop {
        let env = |x: &str| free.iter().position(|f| f == x).map(|i| point[i] as i64);
        if phi.eval_bounded(&env, b, step)? != out.eval(&env)? {
            return Err(Error::Certificate(format!("quantifier elimination disagrees at {point:?}")));
        }
        let mut i = 0;
        loop {
            if i == point.len() {
                return Ok(out);
            }
            point[i] += 1;
            if point[i] <= b {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}
