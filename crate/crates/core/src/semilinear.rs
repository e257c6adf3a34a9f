//! Semilinear sets, vector partition functions and out-degree counting.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::presentation::{eval_with, presburger, EvalOptions};
use crate::relations::RegularRelation;

/// x̄ ↦ u + Σ vᵢxᵢ from ℕ^m to ℕⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    offset: Vec<u64>,
    columns: Vec<Vec<u64>>,
}

impl AffineMap {
    pub fn new(offset: Vec<u64>, columns: Vec<Vec<u64>>) -> Result<Self> {
        let n = offset.len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        Ok(AffineMap { offset, columns })
    }

    pub fn dim_in(&self) -> usize {
        self.columns.len()
    }

    pub fn dim_out(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[u64] {
        &self.offset
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn apply(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.dim_in() {
            return Err(Error::DimensionMismatch { expected: self.dim_in(), got: x.len() });
        }
        let mut out = self.offset.clone();
        for (c, &k) in self.columns.iter().zip(x) {
            for (o, &v) in out.iter_mut().zip(c) {
                *o += v * k;
            }
        }
        Ok(out)
    }
}

/// The range of an affine map.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSet {
    map: AffineMap,
    simple: bool,
}

impl LinearSet {
    pub fn new(map: AffineMap) -> Self {
        let simple = rank(map.columns()) == map.dim_in();
        LinearSet { map, simple }
    }

    pub fn from_parts(offset: Vec<u64>, periods: Vec<Vec<u64>>) -> Result<Self> {
        Ok(LinearSet::new(AffineMap::new(offset, periods)?))
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn offset(&self) -> &[u64] {
        self.map.offset()
    }

    pub fn periods(&self) -> &[Vec<u64>] {
        self.map.columns()
    }

    /// Periods linearly independent over ℚ.
    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn member(&self, x: &[u64]) -> Result<bool> {
        let n = self.map.dim_out();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut rest = Vec::with_capacity(n);
        for (xi, ui) in x.iter().zip(self.offset()) {
            match xi.checked_sub(*ui) {
                Some(r) => rest.push(r),
                None => return Ok(false),
            }
        }
        // zero periods never matter
        let cols: Vec<&Vec<u64>> = self.periods().iter().filter(|c| c.iter().any(|&v| v > 0)).collect();
        Ok(solve(&cols, &mut rest, &mut |_| true) > 0)
    }

    /// Coefficients ȳ with offset + Σ yⱼvⱼ = x.
    fn count_solutions(&self, x: &[u64]) -> u64 {
        let mut rest = Vec::new();
        for (xi, ui) in x.iter().zip(self.offset()) {
            match xi.checked_sub(*ui) {
                Some(r) => rest.push(r),
                None => return 0,
            }
        }
        let cols: Vec<&Vec<u64>> = self.periods().iter().collect();
        solve(&cols, &mut rest, &mut |_| false)
    }

    pub fn to_json_value(&self) -> Value {
        json!({"offset": self.offset(), "periods": self.periods()})
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let offset = u64_vec(v.get("offset").ok_or_else(|| Error::Json("missing offset".into()))?)?;
        let periods = match v.get("periods") {
            Some(p) => matrix(p)?,
            None => Vec::new(),
        };
        LinearSet::from_parts(offset, periods)
    }
}

/// Counts nonnegative solutions of Σ yⱼ colsⱼ = rest, stopping as soon as `stop(count)` holds.
/// A zero column is counted as a single choice.
fn solve(cols: &[&Vec<u64>], rest: &mut Vec<u64>, stop: &mut dyn FnMut(u64) -> bool) -> u64 {
    fn go(cols: &[&Vec<u64>], rest: &mut Vec<u64>, stop: &mut dyn FnMut(u64) -> bool, found: &mut u64) -> bool {
        let Some((c, more)) = cols.split_first() else {
            if rest.iter().all(|&r| r == 0) {
                *found += 1;
                return stop(*found);
            }
            return false;
        };
        let bound = c.iter().zip(rest.iter()).filter(|(&v, _)| v > 0).map(|(&v, &r)| r / v).min();
        let Some(bound) = bound else {
            // a zero column contributes nothing; count it once
            return go(more, rest, stop, found);
        };
        for y in 0..=bound {
            if go(more, rest, stop, found) {
                return true;
            }
            if y < bound {
                for (r, &v) in rest.iter_mut().zip(c.iter()) {
                    *r -= v;
                }
            }
        }
        for (r, &v) in rest.iter_mut().zip(c.iter()) {
            *r += v * bound;
        }
        false
    }
    let mut found = 0;
    go(cols, rest, stop, &mut found);
    found
}

/// Exact rank over ℚ.
fn rank(cols: &[Vec<u64>]) -> usize {
    let mut rows: Vec<Vec<BigRational>> =
        cols.iter().map(|c| c.iter().map(|&v| BigRational::from_integer(v.into())).collect()).collect();
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = &rows[i][col] / &pivot;
                for j in col..width {
                    let t = &rows[r][j] * &f;
                    rows[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn u64_vec(v: &Value) -> Result<Vec<u64>> {
    v.as_array()
        .ok_or_else(|| Error::Json("expected an array of naturals".into()))?
        .iter()
        .map(|x| x.as_u64().ok_or_else(|| Error::Json("expected a natural number".into())))
        .collect()
}

fn i64_vec(v: &Value) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| Error::Json("expected an array of integers".into()))?
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| Error::Json("expected an integer".into())))
        .collect()
}

fn matrix(v: &Value) -> Result<Vec<Vec<u64>>> {
    v.as_array().ok_or_else(|| Error::Json("expected a matrix".into()))?.iter().map(u64_vec).collect()
}

/// A finite union of linear sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearSet {
    n: usize,
    pieces: Vec<LinearSet>,
    disjoint_simple: bool,
}

impl SemilinearSet {
    /// `disjoint_simple` is a claim about the pieces; see [`SemilinearSet::validate`].
    pub fn new(n: usize, pieces: Vec<LinearSet>, disjoint_simple: bool) -> Result<Self> {
        if let Some(p) = pieces.iter().find(|p| p.map.dim_out() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.map.dim_out() });
        }
        Ok(SemilinearSet { n, pieces, disjoint_simple })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> &[LinearSet] {
        &self.pieces
    }

    pub fn is_disjoint_simple(&self) -> bool {
        self.disjoint_simple
    }

    pub fn member(&self, x: &[u64]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        for p in &self.pieces {
            if p.member(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Checks the disjoint-simple claim: every piece simple, and no two pieces meet. Overlaps are
    /// searched with multipliers up to 12 first, then decided exactly by a carry search.
    pub fn validate(&self) -> Result<()> {
        if !self.disjoint_simple {
            return Err(Error::Validation("set is not declared disjoint-simple".into()));
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if !p.is_simple() {
                return Err(Error::Validation(format!("piece {i} has linearly dependent periods")));
            }
        }
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                if let Some(x) = bounded_overlap(&self.pieces[i], &self.pieces[j], 12) {
                    return Err(Error::Validation(format!("pieces {i} and {j} share the point {x:?}")));
                }
            }
        }
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                if linear_sets_meet(&self.pieces[i], &self.pieces[j]) {
                    return Err(Error::Validation(format!("pieces {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    /// Coefficients of the generating series f_S = Σ_{x̄∈S} x̄^x̄ on the box [0..N]^n,
    /// expanded piece by piece as products of geometric series.
    pub fn series_coeffs(&self, bound: u64) -> Result<BTreeMap<Vec<u64>, u64>> {
        self.validate()?;
        let mut out = BTreeMap::new();
        let mut pt = vec![0u64; self.n];
        loop {
            out.insert(pt.clone(), 0);
            if !next_point(&mut pt, bound) {
                break;
            }
        }
        for p in &self.pieces {
            let mut y = Vec::new();
            expand(p, bound, &mut y, &mut out);
        }
        Ok(out)
    }

    /// ∃-formula in the signature of `presburger` (relation `plus`) with free variables
    /// x0..x{n-1}, true exactly on the members of S.
    pub fn to_formula(&self) -> Formula {
        let mut fresh = 0usize;
        let mut name = |hint: &str| {
            fresh += 1;
            format!("{hint}{fresh}")
        };
        let xs: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        let mut alts = Vec::new();
        for p in &self.pieces {
            let one = name("one");
            let mus: Vec<String> = (0..p.periods().len()).map(|_| name("mu")).collect();
            let mut eqs = Vec::new();
            for (c, x) in xs.iter().enumerate() {
                let mut terms: Vec<(u64, String)> = vec![(p.offset()[c], one.clone())];
                terms.extend(p.periods().iter().zip(&mus).map(|(v, mu)| (v[c], mu.clone())));
                eqs.push(linear(x, &terms, &mut name));
            }
            let body = Formula::and(is_one(&one, &mut name), Formula::all(eqs));
            let body = mus.iter().rev().fold(body, |acc, mu| Formula::exists(mu, acc));
            alts.push(Formula::exists(&one, body));
        }
        if alts.is_empty() {
            return Formula::False;
        }
        Formula::any(alts)
    }

    /// The set as a relation over base-2 numerals (least significant digit first).
    pub fn to_relation(&self) -> Result<RegularRelation> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let p = presburger(2)?;
        let vars: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        eval_with(&p, &self.to_formula(), &vars, &EvalOptions::default())
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "n": self.n,
            "pieces": self.pieces.iter().map(LinearSet::to_json_value).collect::<Vec<_>>(),
            "disjointSimple": self.disjoint_simple,
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Json("missing n".into()))? as usize;
        let pieces = v
            .get("pieces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing pieces".into()))?
            .iter()
            .map(LinearSet::from_json_value)
            .collect::<Result<_>>()?;
        let ds = v.get("disjointSimple").and_then(Value::as_bool).unwrap_or(false);
        SemilinearSet::new(n, pieces, ds)
    }
}

fn next_point(pt: &mut [u64], bound: u64) -> bool {
    for c in pt.iter_mut().rev() {
        if *c < bound {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}

fn expand(p: &LinearSet, bound: u64, y: &mut Vec<u64>, out: &mut BTreeMap<Vec<u64>, u64>) -> bool {
    let m = p.periods().len();
    let mut full = y.clone();
    full.resize(m, 0);
    let pt = p.map.apply(&full).expect("dims");
    if pt.iter().any(|&c| c > bound) {
        return false;
    }
    if y.len() == m {
        *out.get_mut(&pt).expect("box point") += 1;
        return true;
    }
    let zero = p.periods()[y.len()].iter().all(|&v| v == 0);
    let mut k = 0;
    loop {
        y.push(k);
        let inside = expand(p, bound, y, out);
        y.pop();
        if !inside || zero {
            break;
        }
        k += 1;
    }
    true
}

/// A point of `a` with multipliers up to `mult` that also lies in `b`.
fn bounded_overlap(a: &LinearSet, b: &LinearSet, mult: u64) -> Option<Vec<u64>> {
    let mut y = vec![0u64; a.periods().len()];
    loop {
        let x = a.map.apply(&y).expect("dims");
        if b.member(&x).expect("dims") {
            return Some(x);
        }
        if !next_point(&mut y, mult) {
            return None;
        }
    }
}

/// Whether u + Σ yⱼaⱼ = u′ + Σ zⱼbⱼ has a solution over ℕ. Reads the binary digits of all
/// multipliers least significant first; the state is the carry vector, which stays bounded.
fn linear_sets_meet(a: &LinearSet, b: &LinearSet) -> bool {
    let cols: Vec<Vec<i64>> = a
        .periods()
        .iter()
        .map(|c| c.iter().map(|&v| v as i64).collect())
        .chain(b.periods().iter().map(|c| c.iter().map(|&v| -(v as i64)).collect()))
        .collect();
    let start: Vec<i64> = a.offset().iter().zip(b.offset()).map(|(&u, &v)| u as i64 - v as i64).collect();
    let mut seen = std::collections::BTreeSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        if c.iter().all(|&v| v == 0) {
            return true;
        }
        for bits in 0u64..(1 << cols.len()) {
            let mut t = c.clone();
            for (j, col) in cols.iter().enumerate() {
                if bits >> j & 1 == 1 {
                    t.iter_mut().zip(col).for_each(|(x, &v)| *x += v);
                }
            }
            if t.iter().all(|&v| v % 2 == 0) {
                let next: Vec<i64> = t.iter().map(|&v| v / 2).collect();
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
    }
    false
}

/// `one` is the number 1: nonzero and not a sum of two nonzero numbers.
fn is_one(one: &str, name: &mut dyn FnMut(&str) -> String) -> Formula {
    let (a, b) = (name("a"), name("b"));
    let zero = |v: &str| Formula::atom("plus", &[v, v, v]);
    Formula::and(
        Formula::not(zero(one)),
        Formula::forall(
            &a,
            Formula::forall(&b, Formula::implies(Formula::atom("plus", &[&a, &b, one]), Formula::or(zero(&a), zero(&b)))),
        ),
    )
}

/// target = Σ cᵢ·vᵢ, unrolled into doublings and additions over fresh existential variables.
fn linear(target: &str, terms: &[(u64, String)], name: &mut dyn FnMut(&str) -> String) -> Formula {
    let mut exists: Vec<String> = Vec::new();
    let mut facts: Vec<Formula> = Vec::new();
    let mut addends: Vec<String> = Vec::new();
    for (c, v) in terms {
        let mut c = *c;
        let mut cur = v.clone();
        while c > 0 {
            if c & 1 == 1 {
                addends.push(cur.clone());
            }
            c >>= 1;
            if c > 0 {
                let d = name("d");
                facts.push(Formula::atom("plus", &[&cur, &cur, &d]));
                exists.push(d.clone());
                cur = d;
            }
        }
    }
    match addends.len() {
        0 => facts.push(Formula::atom("plus", &[target, target, target])),
        1 => facts.push(Formula::Eq(target.to_string(), addends[0].clone())),
        k => {
            let mut acc = addends[0].clone();
            for (i, a) in addends.iter().enumerate().skip(1) {
                let s = if i == k - 1 {
                    target.to_string()
                } else {
                    let s = name("s");
                    exists.push(s.clone());
                    s
                };
                facts.push(Formula::atom("plus", &[&acc, a, &s]));
                acc = s;
            }
        }
    }
    exists.iter().rev().fold(Formula::all(facts), |acc, v| Formula::exists(v, acc))
}

/// ψ_A(x̄) = |{ȳ ∈ ℕ^m : Aȳ = x̄}| for A ∈ ℕ^{n×m} without zero columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorPartitionFn {
    rows: Vec<Vec<u64>>,
    cols: Vec<Vec<u64>>,
}

impl VectorPartitionFn {
    /// `rows` is the matrix in row-major order.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix needs at least one row".into()));
        }
        let m = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: r.len() });
        }
        let cols: Vec<Vec<u64>> = (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        if cols.iter().any(|c| c.iter().all(|&v| v == 0)) {
            return Err(Error::ZeroColumn);
        }
        Ok(VectorPartitionFn { rows, cols })
    }

    pub fn from_columns(n: usize, cols: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(c) = cols.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("matrix needs at least one row".into()));
        }
        if cols.iter().any(|c| c.iter().all(|&v| v == 0)) {
            return Err(Error::ZeroColumn);
        }
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Ok(VectorPartitionFn { rows, cols })
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.cols
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn eval(&self, x: &[u64]) -> Result<u64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let cols: Vec<&Vec<u64>> = self.cols.iter().collect();
        Ok(solve(&cols, &mut x.to_vec(), &mut |_| false))
    }

    pub fn to_json_value(&self) -> Value {
        json!(self.rows)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        VectorPartitionFn::new(matrix(v)?)
    }
}

/// g(x̄) = Σᵢ ψ_{Aᵢ}(x̄ + c̄ᵢ), with ψ = 0 at points having a negative coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedVpf {
    n: usize,
    terms: Vec<(VectorPartitionFn, Vec<i64>)>,
}

impl GeneralizedVpf {
    pub fn new(n: usize, terms: Vec<(VectorPartitionFn, Vec<i64>)>) -> Result<Self> {
        for (a, c) in &terms {
            if a.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.n() });
            }
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.len() });
            }
        }
        Ok(GeneralizedVpf { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(VectorPartitionFn, Vec<i64>)] {
        &self.terms
    }

    pub fn eval(&self, x: &[u64]) -> Result<u64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut total = 0;
        'terms: for (a, c) in &self.terms {
            let mut y = Vec::with_capacity(self.n);
            for (&xi, &ci) in x.iter().zip(c) {
                let v = xi as i128 + ci as i128;
                if v < 0 {
                    continue 'terms;
                }
                y.push(v as u64);
            }
            total += a.eval(&y)?;
        }
        Ok(total)
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "n": self.n,
            "terms": self.terms.iter().map(|(a, c)| json!({"matrix": a.to_json_value(), "shift": c})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Json("missing n".into()))? as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing terms".into()))?
            .iter()
            .map(|t| {
                let m = t.get("matrix").ok_or_else(|| Error::Json("missing matrix".into()))?;
                let a = VectorPartitionFn::from_columns(n, transpose(n, &matrix(m)?)?)?;
                let c = match t.get("shift") {
                    Some(s) => i64_vec(s)?,
                    None => vec![0; n],
                };
                Ok((a, c))
            })
            .collect::<Result<_>>()?;
        GeneralizedVpf::new(n, terms)
    }
}

fn transpose(n: usize, rows: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
    }
    let m = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: r.len() });
    }
    Ok((0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

/// For S ⊆ ℕ^{k+l} given by disjoint simple pieces, the function c̄ ↦ |{d̄ : (c̄,d̄) ∈ S}|.
/// Piece i with offset (ū,ū′) contributes ψ_{Aᵢ}(c̄ − ū), Aᵢ being its periods cut to the first k coordinates.
pub fn outdegree_gvpf(s: &SemilinearSet, k: usize) -> Result<GeneralizedVpf> {
    if k == 0 || k > s.dim() {
        return Err(Error::InvalidParameter(format!("split {k} out of range for dimension {}", s.dim())));
    }
    s.validate()?;
    let mut terms = Vec::new();
    for p in &s.pieces {
        let mut cols = Vec::new();
        for v in p.periods() {
            let head = v[..k].to_vec();
            if head.iter().all(|&x| x == 0) {
                return Err(Error::InfiniteOutdegree);
            }
            cols.push(head);
        }
        let shift = p.offset()[..k].iter().map(|&u| -(u as i64)).collect();
        terms.push((VectorPartitionFn::from_columns(k, cols)?, shift));
    }
    GeneralizedVpf::new(k, terms)
}

/// Exact count of representations of x in the pieces; equals membership for disjoint simple sets.
pub fn representations(s: &SemilinearSet, x: &[u64]) -> Result<u64> {
    if x.len() != s.n {
        return Err(Error::DimensionMismatch { expected: s.n, got: x.len() });
    }
    Ok(s.pieces.iter().map(|p| p.count_solutions(x)).sum())
}
