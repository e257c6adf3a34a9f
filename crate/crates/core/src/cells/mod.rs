//! s-cells over ⟨ω, ≤⟩: decomposition of quantifier-free definable sets into disjoint cells,
//! affine parametrizations and exact fiber counts.

mod order;

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

pub use order::{qe, Cmp, OrderFormula, Term};

use crate::count::Cardinal;
use crate::error::{Error, Result};
use crate::poly::{BasicPolynomial, BinomAtom};
use crate::semilinear::AffineMap;

pub(crate) use order::indexed_var;

/// C(σ, d): tuples ā with a_{σ(0)} = d(0) (or ≥ s when d(0) = ∞) and a_{σ(i)} − a_{σ(i−1)}
/// equal to d(i) (or ≥ s when d(i) = ∞). `None` stands for ∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SCell {
    n: usize,
    s: u64,
    sigma: Vec<usize>,
    d: Vec<Option<u64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRelation {
    Equal,
    Disjoint,
}

impl fmt::Display for CellRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellRelation::Equal => "equal",
            CellRelation::Disjoint => "disjoint",
        })
    }
}

impl SCell {
    pub fn new(s: u64, sigma: Vec<usize>, d: Vec<Option<u64>>) -> Result<SCell> {
        let n = sigma.len();
        if s == 0 {
            return Err(Error::InvalidParameter("gap bound s must be positive".into()));
        }
        if d.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: d.len() });
        }
        let mut seen = vec![false; n];
        for &i in &sigma {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("{sigma:?} is not a permutation")));
            }
        }
        if let Some(g) = d.iter().flatten().find(|&&g| g >= s) {
            return Err(Error::InvalidParameter(format!("finite gap {g} is not below s = {s}")));
        }
        Ok(SCell { n, s, sigma, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn gaps(&self) -> &[Option<u64>] {
        &self.d
    }

    pub fn infinite_gaps(&self) -> usize {
        self.d.iter().filter(|g| g.is_none()).count()
    }

    pub fn member(&self, a: &[u64]) -> Result<bool> {
        if a.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: a.len() });
        }
        let mut prev = 0u64;
        for (&i, &g) in self.sigma.iter().zip(&self.d) {
            let v = a[i];
            let ok = match g {
                Some(k) => v.checked_sub(prev) == Some(k),
                None => v >= prev + self.s,
            };
            if !ok {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }

    /// The member with every ∞ gap equal to s.
    pub fn witness(&self) -> Vec<u64> {
        let mut a = vec![0; self.n];
        let mut prev = 0;
        for (&i, &g) in self.sigma.iter().zip(&self.d) {
            prev += g.unwrap_or(self.s);
            a[i] = prev;
        }
        a
    }

    /// Tied coordinates sorted by index; two cells with the same n and s are equal as sets
    /// exactly when their canonical forms coincide.
    pub fn canonical(&self) -> SCell {
        let mut sigma = Vec::with_capacity(self.n);
        let mut d = Vec::with_capacity(self.n);
        let mut i = 0;
        while i < self.n {
            let mut j = i + 1;
            while j < self.n && self.d[j] == Some(0) {
                j += 1;
            }
            let mut block = self.sigma[i..j].to_vec();
            block.sort_unstable();
            sigma.extend(block);
            d.push(self.d[i]);
            d.extend(std::iter::repeat_n(Some(0), j - i - 1));
            i = j;
        }
        SCell { n: self.n, s: self.s, sigma, d }
    }

    pub fn is_canonical(&self) -> bool {
        (1..self.n).all(|i| self.d[i] != Some(0) || self.sigma[i - 1] < self.sigma[i])
    }

    pub fn to_json_value(&self) -> Value {
        let d: Vec<Value> = self.d.iter().map(|g| g.map_or(json!("inf"), |k| json!(k))).collect();
        json!({"n": self.n, "s": self.s, "sigma": self.sigma, "d": d})
    }

    pub fn from_json_value(v: &Value) -> Result<SCell> {
        let s = v.get("s").and_then(Value::as_u64).ok_or_else(|| Error::Json("cell needs `s`".into()))?;
        let sigma: Vec<usize> = serde_json::from_value(v.get("sigma").cloned().unwrap_or(Value::Null))
            .map_err(|_| Error::Json("cell needs `sigma`".into()))?;
        let d = v
            .get("d")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("cell needs `d`".into()))?
            .iter()
            .map(|g| match g {
                Value::String(t) if t == "inf" => Ok(None),
                _ => g.as_u64().map(Some).ok_or_else(|| Error::Json("gap must be a natural or \"inf\"".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != sigma.len() {
                return Err(Error::ArityMismatch { expected: n as usize, got: sigma.len() });
            }
        }
        SCell::new(s, sigma, d)
    }
}

pub fn cell_member(c: &SCell, a: &[u64]) -> Result<bool> {
    c.member(a)
}

pub fn cells_equal_or_disjoint(c1: &SCell, c2: &SCell) -> Result<CellRelation> {
    if c1.n != c2.n || c1.s != c2.s {
        return Err(Error::CellMismatch(format!(
            "cells of arity {} and {} with s = {} and {}",
            c1.n, c2.n, c1.s, c2.s
        )));
    }
    Ok(if c1.canonical() == c2.canonical() { CellRelation::Equal } else { CellRelation::Disjoint })
}

/// Every canonical cell of arity n at gap bound s; together they partition ℕⁿ.
pub fn all_cells(n: usize, s: u64) -> Vec<SCell> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut d = vec![Some(0); n];
        'gaps: loop {
            let c = SCell { n, s, sigma: perm.clone(), d: d.clone() };
            if c.is_canonical() {
                out.push(c);
            }
            // odometer over {0..s-1, ∞}
            for g in d.iter_mut() {
                *g = match *g {
                    Some(k) if k + 1 < s => Some(k + 1),
                    Some(_) => None,
                    None => Some(0),
                };
                if *g != Some(0) {
                    continue 'gaps;
                }
            }
            break;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Pairwise disjoint cells sharing one gap bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellUnion {
    pub n: usize,
    pub s: u64,
    pub cells: Vec<SCell>,
}

impl CellUnion {
    pub fn member(&self, a: &[u64]) -> Result<bool> {
        for c in &self.cells {
            if c.member(a)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn to_json_value(&self) -> Value {
        json!({"n": self.n, "s": self.s, "cells": self.cells.iter().map(SCell::to_json_value).collect::<Vec<_>>()})
    }

    pub fn from_json_value(v: &Value) -> Result<CellUnion> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Json("cell union needs `n`".into()))? as usize;
        let s = v.get("s").and_then(Value::as_u64).ok_or_else(|| Error::Json("cell union needs `s`".into()))?;
        let cells = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("cell union needs `cells`".into()))?
            .iter()
            .map(SCell::from_json_value)
            .collect::<Result<Vec<_>>>()?;
        let mut seen = BTreeSet::new();
        for c in &cells {
            if c.n != n || c.s != s {
                return Err(Error::CellMismatch("cell does not match the union's n and s".into()));
            }
            if !seen.insert(c.canonical()) {
                return Err(Error::CellMismatch("cells are not pairwise disjoint".into()));
            }
        }
        Ok(CellUnion { n, s, cells })
    }
}

/// Smallest s for which every atom of ψ has constant truth value on each s-cell.
pub(crate) fn gap_bound(f: &OrderFormula) -> u64 {
    match f {
        OrderFormula::True | OrderFormula::False => 1,
        OrderFormula::Atom(a, _, b) => {
            if a.var.is_none() && b.var.is_none() || a.var == b.var {
                return 1;
            }
            // the atom is a − b ≤ c, or its negation, for c among these
            let d = b.k - a.k;
            [d, d - 1, -d, -d - 1].into_iter().map(|c| (c + 1).max(-c).max(1) as u64).max().unwrap()
        }
        OrderFormula::Not(g) | OrderFormula::Exists(_, g) | OrderFormula::Forall(_, g) => gap_bound(g),
        OrderFormula::And(a, b) | OrderFormula::Or(a, b) | OrderFormula::Implies(a, b) => gap_bound(a).max(gap_bound(b)),
    }
}

fn check_vars(f: &OrderFormula, n: usize) -> Result<()> {
    for x in f.free_vars() {
        match indexed_var(&x) {
            Some(i) if i < n => {}
            Some(i) => return Err(Error::ArityMismatch { expected: n, got: i + 1 }),
            None => return Err(Error::IllFormed(format!("variable `{x}` is not one of x0..x{}", n.saturating_sub(1)))),
        }
    }
    Ok(())
}

/// The set defined by ψ(x0, …, x_{n−1}) as a union of disjoint s-cells, with s the smallest
/// gap bound dominating ψ's constants. Quantified input is first passed through `qe`.
pub fn qf_to_cells(psi: &OrderFormula, n: usize) -> Result<CellUnion> {
    check_vars(psi, n)?;
    let psi = if psi.is_quantifier_free() { psi.clone() } else { qe(psi)? };
    let s = gap_bound(&psi);
    let mut cells = Vec::new();
    for c in all_cells(n, s) {
        if psi.eval_at(&c.witness())? {
            cells.push(c);
        }
    }
    let u = CellUnion { n, s, cells };
    let top = 3 * s * n as u64;
    if n <= 3 && (top + 1).pow(n as u32) <= 200_000 {
        let mut a = vec![0u64; n];
        loop {
            if psi.eval_at(&a)? != u.member(&a)? {
                return Err(Error::Certificate(format!("cell decomposition disagrees at {a:?}")));
            }
            let Some(i) = a.iter().position(|&v| v < top) else { break };
            a[i] += 1;
            a[..i].iter_mut().for_each(|v| *v = 0);
        }
    }
    Ok(u)
}

/// An injective affine map from ℕ^m onto the cell, m the number of ∞ gaps: parameter k adds
/// to every coordinate at or after the k-th ∞ gap in the cell's order.
pub fn cell_param(c: &SCell) -> AffineMap {
    let mut offset = vec![0u64; c.n];
    let mut columns: Vec<Vec<u64>> = Vec::new();
    let mut base = 0u64;
    for (pos, (&i, &g)) in c.sigma.iter().zip(&c.d).enumerate() {
        match g {
            Some(k) => base += k,
            None => {
                base += c.s;
                let mut col = vec![0u64; c.n];
                for &j in &c.sigma[pos..] {
                    col[j] = 1;
                }
                columns.push(col);
            }
        }
        offset[i] = base;
    }
    AffineMap::new(offset, columns).expect("columns match the offset length")
}

/// b_hi ≥ b_lo + c (or = when `eq`); a missing `lo` stands for 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GuardAtom {
    pub hi: usize,
    pub lo: Option<usize>,
    pub c: u64,
    pub eq: bool,
}

impl GuardAtom {
    fn holds(&self, b: &[u64]) -> bool {
        let lo = self.lo.map_or(0, |j| b[j]) as i128 + self.c as i128;
        let hi = b[self.hi] as i128;
        if self.eq {
            hi == lo
        } else {
            hi >= lo
        }
    }

    fn formula(&self) -> OrderFormula {
        let rhs = match self.lo {
            Some(j) => Term::offset(&format!("b{j}"), self.c as i64),
            None => Term::constant(self.c as i64),
        };
        OrderFormula::atom(Term::var(&format!("b{}", self.hi)), if self.eq { Cmp::Eq } else { Cmp::Ge }, rhs)
    }

    fn from_formula(f: &OrderFormula, n: usize) -> Result<GuardAtom> {
        let bad = || Error::Json(format!("`{f}` is not a guard atom"));
        let OrderFormula::Atom(a, cmp, b) = f else { return Err(bad()) };
        let var = |t: &Term| -> Result<Option<usize>> {
            match &t.var {
                None => Ok(None),
                Some(x) => {
                    let j: usize = x.strip_prefix('b').and_then(|d| d.parse().ok()).ok_or_else(bad)?;
                    if j >= n {
                        return Err(Error::ArityMismatch { expected: n, got: j + 1 });
                    }
                    Ok(Some(j))
                }
            }
        };
        let hi = var(a)?.ok_or_else(bad)?;
        if a.k != 0 || b.k < 0 || !matches!(cmp, Cmp::Ge | Cmp::Eq) {
            return Err(bad());
        }
        Ok(GuardAtom { hi, lo: var(b)?, c: b.k as u64, eq: *cmp == Cmp::Eq })
    }
}

/// The fiber count of a cell as a function of its last n coordinates b0..b_{n−1}: `value` on
/// the guard (`None` meaning infinitely many) and 0 off it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberData {
    pub n: usize,
    pub guard: Vec<GuardAtom>,
    pub value: Option<BasicPolynomial>,
}

impl FiberData {
    pub fn guard_formula(&self) -> OrderFormula {
        OrderFormula::all(self.guard.iter().map(GuardAtom::formula))
    }

    pub fn guard_holds(&self, b: &[u64]) -> Result<bool> {
        if b.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: b.len() });
        }
        Ok(self.guard.iter().all(|g| g.holds(b)))
    }

    pub fn eval(&self, b: &[u64]) -> Result<Cardinal> {
        if !self.guard_holds(b)? {
            return Ok(Cardinal::zero());
        }
        match &self.value {
            None => Ok(Cardinal::Omega),
            Some(p) => Ok(Cardinal::Finite(p.eval(b)?)),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let value = match &self.value {
            None => json!("inf"),
            Some(p) => p.to_json_value(),
        };
        json!({"n": self.n, "guard": self.guard_formula().to_string(), "value": value})
    }

    pub fn from_json_value(v: &Value) -> Result<FiberData> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Json("fiber data needs `n`".into()))? as usize;
        let text = v.get("guard").and_then(Value::as_str).ok_or_else(|| Error::Json("fiber data needs `guard`".into()))?;
        let mut guard = Vec::new();
        let mut stack = vec![OrderFormula::parse(text)?];
        while let Some(f) = stack.pop() {
            match f {
                OrderFormula::True => {}
                OrderFormula::And(a, b) => {
                    stack.push(*b);
                    stack.push(*a);
                }
                other => guard.push(GuardAtom::from_formula(&other, n)?),
            }
        }
        let value = match v.get("value") {
            Some(Value::String(s)) if s == "inf" => None,
            Some(p) => Some(BasicPolynomial::from_json_value(p, n)?),
            None => return Err(Error::Json("fiber data needs `value`".into())),
        };
        Ok(FiberData { n, guard, value })
    }
}

fn binom_atom(n: usize, hi: usize, lo: Option<usize>, slack: u64, free: u64) -> BinomAtom {
    let mut a = vec![0i64; n];
    a[hi] += 1;
    if let Some(j) = lo {
        a[j] -= 1;
    }
    BinomAtom { a, b: -(slack as i64), c: free }
}

/// Fiber data of a cell over ω^{m+n} whose first m coordinates are the fiber coordinates.
///
/// Walking the cell's order, the base coordinates cut it into segments. In a segment between
/// base values α < β with F ∞ gaps (the closing gap included) and finite gaps summing to S,
/// the fiber coordinates are fixed by the ∞ gaps, which are ≥ s and sum to β − α − S; so there
/// are binom(β − α − S − F·s + F − 1, F − 1) choices when β − α ≥ S + F·s, and exactly one
/// when F = 0 and β − α = S. Fiber coordinates above every base coordinate are unbounded as
/// soon as one of their gaps is ∞.
pub fn fiber_data(c: &SCell, m: usize) -> Result<FiberData> {
    if m > c.n {
        return Err(Error::ArityMismatch { expected: c.n, got: m });
    }
    let n = c.n - m;
    let s = c.s;
    let mut guard = Vec::new();
    let mut atoms = Vec::new();
    let (mut fin, mut free, mut prev) = (0u64, 0u64, None::<usize>);
    for (&x, &g) in c.sigma.iter().zip(&c.d) {
        if x < m {
            match g {
                Some(k) => fin += k,
                None => free += 1,
            }
            continue;
        }
        let j = x - m;
        match g {
            None => {
                let f = free + 1;
                guard.push(GuardAtom { hi: j, lo: prev, c: fin + f * s, eq: false });
                if free > 0 {
                    atoms.push(binom_atom(n, j, prev, fin + f * s - free, free));
                }
            }
            Some(k) if free == 0 => guard.push(GuardAtom { hi: j, lo: prev, c: fin + k, eq: true }),
            Some(k) => {
                let tot = fin + k;
                guard.push(GuardAtom { hi: j, lo: prev, c: tot + free * s, eq: false });
                if free > 1 {
                    atoms.push(binom_atom(n, j, prev, tot + free * s - free + 1, free - 1));
                }
            }
        }
        fin = 0;
        free = 0;
        prev = Some(j);
    }
    let value = if free > 0 { None } else { Some(BasicPolynomial::product(n, atoms)) };
    Ok(FiberData { n, guard, value })
}

/// |{ā : (ā, b̄) ∈ c}| with ā the first m coordinates.
pub fn fiber_count(c: &SCell, m: usize, b: &[u64]) -> Result<Cardinal> {
    fiber_data(c, m)?.eval(b)
}

/// The fiber value along the parametrization φ. Every point of φ's range must satisfy the
/// guard, which is checked on φ's coefficients.
pub fn compose_fiber_affine(f: &FiberData, phi: &AffineMap) -> Result<BasicPolynomial> {
    if phi.dim_out() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: phi.dim_out() });
    }
    for g in &f.guard {
        // φ_hi − φ_lo − c as an affine form in the parameters
        let coef = |v: &[u64]| v[g.hi] as i128 - g.lo.map_or(0, |j| v[j] as i128);
        let constant = coef(phi.offset()) - g.c as i128;
        let slopes: Vec<i128> = phi.columns().iter().map(|col| coef(col)).collect();
        let ok = if g.eq {
            constant == 0 && slopes.iter().all(|&x| x == 0)
        } else {
            constant >= 0 && slopes.iter().all(|&x| x >= 0)
        };
        if !ok {
            return Err(Error::RangeNotInGuard);
        }
    }
    let value = f.value.as_ref().ok_or(Error::InfiniteFiber)?;
    let p = value.compose_affine(phi)?;
    if !p.is_natural() {
        return Err(Error::RangeNotInGuard);
    }
    Ok(p)
}
