//! Equivalence structures E(g) (one class of size g(x̄) for each index point x̄ with g(x̄) > 0)
//! and kernels K(f) of definable functions: classification into natural polynomial
//! descriptors, presentations realizing descriptors, and empirical class counting.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Value};

use crate::automata::{Automaton, Word};
use crate::cells::{self, all_cells, cell_param, compose_fiber_affine, fiber_data, qe, qf_to_cells, OrderFormula, Term};
use crate::count::Cardinal;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::poly::{BasicPolynomial, NatPoly, Poly};
use crate::presentation::{apply_interpretation, omega_le, section, Interpretation, Presentation};
use crate::semilinear::{GeneralizedVpf, LinearSet};

/// Σ_p E(p) plus `infinite_classes` infinite classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqDescriptor {
    pub polys: Vec<NatPoly>,
    pub infinite_classes: Cardinal,
}

impl EqDescriptor {
    pub fn new(polys: Vec<NatPoly>, infinite_classes: Cardinal) -> Self {
        EqDescriptor { polys, infinite_classes }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "polys": self.polys.iter().map(NatPoly::to_json_value).collect::<Vec<_>>(),
            "infiniteClasses": cardinal_json(&self.infinite_classes),
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let polys = v
            .get("polys")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("descriptor needs `polys`".into()))?
            .iter()
            .map(NatPoly::from_json_value)
            .collect::<Result<Vec<_>>>()?;
        let infinite_classes = match v.get("infiniteClasses") {
            None => Cardinal::zero(),
            Some(c) => cardinal_from_json(c)?,
        };
        Ok(EqDescriptor { polys, infinite_classes })
    }
}

fn cardinal_json(c: &Cardinal) -> Value {
    serde_json::to_value(c).expect("cardinals serialize")
}

fn cardinal_from_json(v: &Value) -> Result<Cardinal> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))
}

/// A partial function ω^m → ω^n given by its graph over x0..x_{m−1} (arguments) and
/// x_m..x_{m+n−1} (values).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSpec {
    pub m: usize,
    pub n: usize,
    pub graph: OrderFormula,
}

impl FiberSpec {
    pub fn new(m: usize, n: usize, graph: OrderFormula) -> Result<Self> {
        for x in graph.free_vars() {
            match cells::indexed_var(&x) {
                Some(i) if i < m + n => {}
                _ => return Err(Error::IllFormed(format!("graph variable `{x}` is not one of x0..x{}", m + n - 1))),
            }
        }
        Ok(FiberSpec { m, n, graph })
    }

    pub fn to_json_value(&self) -> Value {
        json!({"m": self.m, "n": self.n, "graph": self.graph.to_string()})
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let get = |k: &str| v.get(k).and_then(Value::as_u64).ok_or_else(|| Error::Json(format!("fiber spec needs `{k}`")));
        let graph = v.get("graph").and_then(Value::as_str).ok_or_else(|| Error::Json("fiber spec needs `graph`".into()))?;
        FiberSpec::new(get("m")? as usize, get("n")? as usize, OrderFormula::parse(graph)?)
    }

    /// ∃x̄ ȳ ȳ′ (graph(x̄, ȳ) ∧ graph(x̄, ȳ′) ∧ ȳ ≠ ȳ′) is false.
    pub fn is_functional(&self) -> Result<bool> {
        let total = self.m + self.n;
        let taken = self.graph.bound_vars();
        let mut fresh = Vec::new();
        let mut j = total;
        while fresh.len() < self.n {
            let name = format!("x{j}");
            if !taken.contains(&name) {
                fresh.push(name);
            }
            j += 1;
        }
        let copy = self.graph.rename_free(&|x| {
            cells::indexed_var(x).filter(|&i| i >= self.m).map(|i| fresh[i - self.m].clone())
        });
        let differ = OrderFormula::any((0..self.n).map(|i| {
            OrderFormula::not(OrderFormula::atom(Term::var(&format!("x{}", self.m + i)), cells::Cmp::Eq, Term::var(&fresh[i])))
        }));
        let body = OrderFormula::all([self.graph.clone(), copy, differ]);
        let names: Vec<String> = (0..total).map(|i| format!("x{i}")).chain(fresh.iter().cloned()).collect();
        let sentence = names.iter().rev().fold(body, |acc, x| OrderFormula::exists(x, acc));
        Ok(!qe(&sentence)?.eval(&|_| None)?)
    }
}

/// Class sizes with multiplicities, as observed in a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClassMultiset {
    pub counts: BTreeMap<u64, Cardinal>,
    pub infinite_classes: Cardinal,
    /// Finite classes with members longer than the bound (their sizes are still exact).
    pub truncated: u64,
}

impl ClassMultiset {
    pub fn to_json_value(&self) -> Value {
        let counts: serde_json::Map<String, Value> =
            self.counts.iter().map(|(k, c)| (k.to_string(), cardinal_json(c))).collect();
        json!({"counts": counts, "infiniteClasses": cardinal_json(&self.infinite_classes), "truncated": self.truncated})
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let mut counts = BTreeMap::new();
        if let Some(obj) = v.get("counts").and_then(Value::as_object) {
            for (k, c) in obj {
                let size: u64 = k.parse().map_err(|_| Error::Json(format!("bad class size `{k}`")))?;
                counts.insert(size, cardinal_from_json(c)?);
            }
        }
        let infinite_classes = v.get("infiniteClasses").map(cardinal_from_json).transpose()?.unwrap_or_default();
        let truncated = v.get("truncated").and_then(Value::as_u64).unwrap_or(0);
        Ok(ClassMultiset { counts, infinite_classes, truncated })
    }
}

// ---------------------------------------------------------------------------------------------
// Turning rational polynomials into natural ones by exact re-indexing.

const MAX_SHIFT: u64 = 24;
const MAX_RESIDUES: u64 = 1 << 12;

fn int(v: u64) -> BigInt {
    BigInt::from(v)
}

/// Pieces of ℕ^k, each re-indexed bijectively by ℕ^{k′}, on which p has natural
/// coefficients: the corner {y ≥ c} split by residues mod the common denominator μ, and the
/// slabs where some coordinates are fixed below c, handled recursively. Zero pieces are dropped.
fn natural_split(p: &Poly, out: &mut Vec<NatPoly>) -> Result<()> {
    let k = p.arity();
    if p.is_zero() {
        return Ok(());
    }
    if k == 0 {
        let v = p.eval(&[])?;
        if !v.is_integer() || v.is_negative() {
            return Err(Error::NonNaturalDescriptor(format!("constant value {v}")));
        }
        out.push(p.to_nat().expect("checked"));
        return Ok(());
    }
    let identity: Vec<Vec<BigInt>> = (0..k).map(|j| (0..k).map(|i| int((i == j) as u64)).collect()).collect();
    'shift: for c in 0..=MAX_SHIFT {
        let shifted = p.compose_affine(&vec![int(c); k], &identity)?;
        let mu = shifted.denominator().to_u64().filter(|&m| m.checked_pow(k as u32).is_some_and(|t| t <= MAX_RESIDUES));
        let Some(mu) = mu else { continue };
        let scaled: Vec<Vec<BigInt>> = identity.iter().map(|col| col.iter().map(|v| v * int(mu)).collect()).collect();
        let mut pieces = Vec::new();
        let mut r = vec![0u64; k];
        loop {
            let q = shifted.compose_affine(&r.iter().map(|&v| int(v)).collect::<Vec<_>>(), &scaled)?;
            match q.to_nat() {
                Some(n) if !n.is_zero() => pieces.push(n),
                Some(_) => {}
                None => continue 'shift,
            }
            let Some(i) = r.iter().position(|&v| v + 1 < mu) else { break };
            r[i] += 1;
            r[..i].iter_mut().for_each(|v| *v = 0);
        }
        out.extend(pieces);
        // slabs: coordinates in S fixed to values below c, the rest ≥ c
        for mask in 1u32..(1 << k) {
            let fixed: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
            let rest: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 0).collect();
            if c == 0 {
                break;
            }
            let mut e = vec![0u64; fixed.len()];
            loop {
                let images: Vec<Poly> = (0..k)
                    .map(|i| match fixed.iter().position(|&f| f == i) {
                        Some(t) => Poly::from_int(rest.len(), e[t] as i64),
                        None => {
                            let j = rest.iter().position(|&f| f == i).unwrap();
                            Poly::var(rest.len(), j).add(&Poly::from_int(rest.len(), c as i64))
                        }
                    })
                    .collect();
                natural_split(&p.compose(&images)?, out)?;
                let Some(i) = e.iter().position(|&v| v + 1 < c) else { break };
                e[i] += 1;
                e[..i].iter_mut().for_each(|v| *v = 0);
            }
        }
        return Ok(());
    }
    Err(Error::NonNaturalDescriptor(format!("no shift up to {MAX_SHIFT} makes {p} natural")))
}

// ---------------------------------------------------------------------------------------------

/// The descriptor of K(f): one class per point of f's range, of size |f⁻¹(ȳ)|.
pub fn classify(f: &FiberSpec) -> Result<EqDescriptor> {
    if !f.is_functional()? {
        return Err(Error::NotFunctional);
    }
    let cells = qf_to_cells(&f.graph, f.m + f.n)?;
    let mut data = Vec::new();
    for c in &cells.cells {
        let fd = fiber_data(c, f.m)?;
        if fd.value.is_none() {
            return Err(Error::InfiniteFiber);
        }
        data.push(fd);
    }
    // a gap bound on the base at which every guard is constant on each cell
    let t = data
        .iter()
        .map(|fd| {
            let g = fd.guard_formula().rename_free(&|x| x.strip_prefix('b').map(|i| format!("x{i}")));
            cells::gap_bound(&g)
        })
        .max()
        .unwrap_or(1);
    let mut polys = Vec::new();
    for d in all_cells(f.n, t) {
        let phi = cell_param(&d);
        let w = d.witness();
        let mut g = BasicPolynomial::zero(phi.dim_in());
        for fd in &data {
            if fd.guard_holds(&w)? {
                g = g.add(&compose_fiber_affine(fd, &phi)?)?;
            }
        }
        natural_split(&g.to_poly(), &mut polys)?;
    }
    Ok(EqDescriptor { polys, infinite_classes: Cardinal::zero() })
}

/// A chamber of a piecewise-polynomial description of g: on the simple linear set `set`, g
/// agrees with `poly`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chamber {
    pub set: LinearSet,
    pub poly: Poly,
}

impl Chamber {
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let set = LinearSet::from_json_value(v)?;
        let poly = Poly::from_json_value(v.get("poly").ok_or_else(|| Error::Json("chamber needs `poly`".into()))?)?;
        Ok(Chamber { set, poly })
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = self.set.to_json_value();
        v["poly"] = self.poly.to_json_value();
        v
    }
}

const CHAMBER_CHECK: u64 = 25;

/// The descriptor of E(g) from chambers covering the support of g. Chambers are checked
/// against g on the box [0, 25]ⁿ (or a smaller cube in high dimension).
pub fn gvpf_to_descriptor(g: &GeneralizedVpf, chambers: &[Chamber]) -> Result<EqDescriptor> {
    let n = g.n();
    for (i, ch) in chambers.iter().enumerate() {
        if ch.set.offset().len() != n || ch.poly.arity() != n {
            return Err(Error::Validation(format!("chamber {i} has the wrong dimension")));
        }
        if !ch.set.is_simple() {
            return Err(Error::Validation(format!("chamber {i} is not a simple linear set")));
        }
    }
    let mut top = CHAMBER_CHECK;
    while n > 0 && (top + 1).pow(n as u32) > 400_000 {
        top -= 1;
    }
    let mut x = vec![0u64; n];
    loop {
        let want = g.eval(&x)?;
        let mut hit = None;
        for (i, ch) in chambers.iter().enumerate() {
            if ch.set.member(&x)? {
                if hit.is_some() {
                    return Err(Error::Validation(format!("chambers overlap at {x:?}")));
                }
                hit = Some(i);
            }
        }
        match hit {
            Some(i) => {
                let v = chambers[i].poly.eval_nat(&x)?;
                if v != BigRational::from_integer(want.into()) {
                    return Err(Error::Validation(format!("chamber {i} gives {v} at {x:?}, g gives {want}")));
                }
            }
            None if want != 0 => return Err(Error::Validation(format!("{x:?} with g = {want} lies in no chamber"))),
            None => {}
        }
        let Some(i) = x.iter().position(|&v| v < top) else { break };
        x[i] += 1;
        x[..i].iter_mut().for_each(|v| *v = 0);
    }
    let mut polys = Vec::new();
    for ch in chambers {
        let offset: Vec<BigInt> = ch.set.offset().iter().map(|&v| int(v)).collect();
        let cols: Vec<Vec<BigInt>> = ch.set.periods().iter().map(|c| c.iter().map(|&v| int(v)).collect()).collect();
        natural_split(&ch.poly.compose_affine(&offset, &cols)?, &mut polys)?;
    }
    Ok(EqDescriptor { polys, infinite_classes: Cardinal::zero() })
}

// ---------------------------------------------------------------------------------------------
// Presentations.

/// v = c in ⟨ω, ≤⟩ (relation `le`), with bound names derived from `tag`.
fn omega_numeral(v: &str, c: u64, tag: &str) -> Formula {
    if c == 0 {
        let t = format!("{tag}_t0");
        return Formula::forall(&t, Formula::atom("le", &[v, &t]));
    }
    let u = format!("{tag}_u{c}");
    let t = format!("{tag}_t{c}");
    // u = c − 1 and v is the least element above u
    let above = |x: &str| Formula::and(Formula::atom("le", &[&u, x]), Formula::not(Formula::Eq(x.into(), u.clone())));
    let least = Formula::forall(&t, Formula::implies(above(&t), Formula::atom("le", &[v, &t])));
    Formula::exists(&u, Formula::all([omega_numeral(&u, c - 1, tag), above(v), least]))
}

/// E(p) over ⟨ω, ≤⟩: the element ⟨x̄, ȳ, z, w⟩ picks monomial z, copy w < λ_z of its
/// coefficient and y_{i,j} < x_i for each of its e_i factors x_i (unused y's are 0). Two
/// elements are equivalent when their x̄ agree, so the class of x̄ has p(x̄) elements.
pub fn build_ep(p: &NatPoly) -> Result<Presentation> {
    if p.is_zero() {
        return Err(Error::EmptyDomain);
    }
    let n = p.arity();
    let monos: Vec<(Vec<u32>, u64)> = p
        .monomials()
        .map(|(e, c)| c.to_u64().map(|c| (e.clone(), c)))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidParameter("coefficient too large".into()))?;
    let widths: Vec<u32> = (0..n).map(|i| monos.iter().map(|(e, _)| e[i]).max().unwrap_or(0)).collect();
    let xs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let ys: Vec<Vec<String>> = (0..n).map(|i| (0..widths[i]).map(|j| format!("y{i}_{j}")).collect()).collect();
    let (z, w) = ("z".to_string(), "w".to_string());
    let mut vars: Vec<String> = xs.clone();
    vars.extend(ys.iter().flatten().cloned());
    vars.push(z.clone());
    vars.push(w.clone());
    let lt = |a: &str, b: &str| Formula::and(Formula::atom("le", &[a, b]), Formula::not(Formula::Eq(a.into(), b.into())));
    let mut cases = Vec::new();
    for (k, (e, lambda)) in monos.iter().enumerate() {
        let mut parts = vec![omega_numeral(&z, k as u64, &format!("z{k}"))];
        let bound = format!("lam{k}");
        parts.push(Formula::exists(
            &bound,
            Formula::and(omega_numeral(&bound, *lambda, &format!("l{k}")), lt(&w, &bound)),
        ));
        for i in 0..n {
            for (j, y) in ys[i].iter().enumerate() {
                parts.push(if (j as u32) < e[i] { lt(y, &xs[i]) } else { omega_numeral(y, 0, &format!("{y}k{k}")) });
            }
        }
        cases.push(Formula::all(parts));
    }
    let domain = Formula::any(cases);
    let primed: Vec<String> = vars.iter().map(|v| format!("{v}'")).collect();
    let same = Formula::all((0..n).map(|i| Formula::Eq(vars[i].clone(), primed[i].clone())));
    let mut rel_vars = vars.clone();
    rel_vars.extend(primed);
    let tau = Interpretation::new(vars.len(), (vars, domain), BTreeMap::from([("~".to_string(), (rel_vars, same))]))?;
    apply_interpretation(&omega_le(), &tau)
}

/// x = 0 in ⟨ℕ, +⟩.
fn pres_zero(x: &str) -> Formula {
    Formula::atom("plus", &[x, x, x])
}

/// x = 1 in ⟨ℕ, +⟩: nonzero and not a sum of two nonzero numbers.
fn pres_one(x: &str, tag: &str) -> Formula {
    let (a, b) = (format!("{tag}_a"), format!("{tag}_b"));
    let split = Formula::implies(Formula::atom("plus", &[&a, &b, x]), Formula::or(pres_zero(&a), pres_zero(&b)));
    Formula::and(Formula::not(pres_zero(x)), Formula::forall(&a, Formula::forall(&b, split)))
}

/// Σ addends = target, where `None` addends stand for the number 1.
fn pres_sum(addends: &[Option<String>], target: &str, tag: &str) -> Formula {
    let one = format!("{tag}_one");
    let uses_one = addends.iter().any(Option::is_none);
    let name = |a: &Option<String>| a.clone().unwrap_or_else(|| one.clone());
    let body = match addends.len() {
        0 => pres_zero(target),
        1 => Formula::Eq(name(&addends[0]), target.into()),
        _ => {
            // partial sums s_1 … s_{k−2}, the last one being the target
            let mut acc = name(&addends[0]);
            let mut steps = Vec::new();
            let mut names = Vec::new();
            for (i, a) in addends[1..].iter().enumerate() {
                let next = if i + 2 == addends.len() { target.to_string() } else { format!("{tag}_s{i}") };
                steps.push(Formula::atom("plus", &[&acc, &name(a), &next]));
                if next != target {
                    names.push(next.clone());
                }
                acc = next;
            }
            names.iter().rev().fold(Formula::all(steps), |f, s| Formula::exists(s, f))
        }
    };
    if uses_one {
        Formula::exists(&one, Formula::and(pres_one(&one, &format!("{tag}_1")), body))
    } else {
        body
    }
}

/// E(g) over presburger(2): elements ⟨x̄, ȳ, t⟩ with t < s, A_t ȳ = x̄ + c_t and the y's
/// beyond A_t's columns equal to 0; equivalent when the x̄ agree.
pub fn build_eg_presburger(g: &GeneralizedVpf) -> Result<Interpretation> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParameter("g needs at least one argument".into()));
    }
    for (a, _) in g.terms() {
        if a.columns().iter().any(|c| c.iter().all(|&v| v == 0)) {
            return Err(Error::ZeroColumn);
        }
    }
    let width = g.terms().iter().map(|(a, _)| a.columns().len()).max().unwrap_or(0);
    let xs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let ys: Vec<String> = (0..width).map(|j| format!("y{j}")).collect();
    let t = "t".to_string();
    let mut vars = xs.clone();
    vars.extend(ys.iter().cloned());
    vars.push(t.clone());
    let mut cases = Vec::new();
    for (k, (a, shift)) in g.terms().iter().enumerate() {
        let tag = format!("c{k}");
        let mut parts = vec![pres_sum(&vec![None; k], &t, &format!("{tag}t"))];
        for y in &ys[a.columns().len()..] {
            parts.push(pres_zero(y));
        }
        for i in 0..n {
            // Σ_j A_ij y_j + max(−c_i, 0) = x_i + max(c_i, 0)
            let mut lhs: Vec<Option<String>> = Vec::new();
            for (j, col) in a.columns().iter().enumerate() {
                lhs.extend(std::iter::repeat_n(Some(ys[j].clone()), col[i] as usize));
            }
            lhs.extend(std::iter::repeat_n(None, (-shift[i]).max(0) as usize));
            let mut rhs: Vec<Option<String>> = vec![Some(xs[i].clone())];
            rhs.extend(std::iter::repeat_n(None, shift[i].max(0) as usize));
            let total = format!("{tag}r{i}");
            parts.push(Formula::exists(
                &total,
                Formula::and(pres_sum(&lhs, &total, &format!("{tag}l{i}")), pres_sum(&rhs, &total, &format!("{tag}q{i}"))),
            ));
        }
        cases.push(Formula::all(parts));
    }
    let domain = Formula::any(cases);
    let primed: Vec<String> = vars.iter().map(|v| format!("{v}'")).collect();
    let same = Formula::all((0..n).map(|i| Formula::Eq(vars[i].clone(), primed[i].clone())));
    let mut rel_vars = vars.clone();
    rel_vars.extend(primed);
    Interpretation::new(vars.len(), (vars, domain), BTreeMap::from([("~".to_string(), (rel_vars, same))]))
}

// ---------------------------------------------------------------------------------------------
// Counting.

/// |{x̄ : p(x̄) = k}|. A solution with a coordinate above k makes every monomial containing that
/// coordinate vanish, so it can be moved anywhere above k: the level set is infinite exactly
/// when it has a point in [0, k+1]ⁿ touching k+1, and otherwise lies inside [0, k]ⁿ.
fn level_count(p: &NatPoly, k: u64) -> Result<Cardinal> {
    let n = p.arity();
    let target = BigUint::from(k);
    let mut x = vec![0u64; n];
    let mut count = 0u64;
    loop {
        if p.eval(&x)? == target {
            if x.contains(&(k + 1)) {
                return Ok(Cardinal::Omega);
            }
            count += 1;
        }
        let Some(i) = x.iter().position(|&v| v <= k) else { break };
        x[i] += 1;
        x[..i].iter_mut().for_each(|v| *v = 0);
    }
    Ok(Cardinal::from(count))
}

/// The number of classes of size k described by `d`.
pub fn class_count(d: &EqDescriptor, k: u64) -> Result<Cardinal> {
    if k == 0 {
        return Err(Error::InvalidParameter("class sizes start at 1".into()));
    }
    let mut total = Cardinal::zero();
    for p in &d.polys {
        total = total.add(&level_count(p, k)?);
    }
    Ok(total)
}

fn tilde() -> Formula {
    Formula::atom("~", &["x", "y"])
}

/// Classes of `~` among domain words of length ≤ `bound`, each with its exact size.
pub fn empirical_multiset(p: &Presentation, bound: usize) -> Result<ClassMultiset> {
    let rel = p.relation("~")?;
    if rel.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: rel.arity() });
    }
    let words = p.domain().enumerate_upto(bound);
    let mut seen: BTreeSet<Word> = BTreeSet::new();
    let mut out = ClassMultiset::default();
    for w in &words {
        if seen.contains(w) {
            continue;
        }
        let class = section(p, &tilde(), "y", &[("x".into(), w.clone())])?;
        if !class.accepts(w)? {
            return Err(Error::NotEquivalence(format!("`{}` is not related to itself", p.render(w))));
        }
        let near = class.enumerate_upto(bound);
        for v in &near {
            if v != w {
                let other = section(p, &tilde(), "y", &[("x".into(), v.clone())])?;
                if !other.equivalent(&class)? {
                    return Err(Error::NotEquivalence(format!(
                        "`{}` and `{}` are related but have different classes",
                        p.render(w),
                        p.render(v)
                    )));
                }
            }
            seen.insert(v.clone());
        }
        if !class.is_finite() {
            out.infinite_classes = out.infinite_classes.add(&Cardinal::from(1));
            continue;
        }
        let size = class_size(&class)?;
        if size > near.len() as u64 {
            out.truncated += 1;
        }
        let slot = out.counts.entry(size).or_insert_with(Cardinal::zero);
        *slot = slot.add(&Cardinal::from(1));
    }
    Ok(out)
}

/// Size of a finite language: no accepted word is longer than the number of states.
fn class_size(class: &Automaton) -> Result<u64> {
    let min = class.minimize()?;
    let counts = min.count_words_upto(min.state_count());
    counts
        .values
        .last()
        .and_then(|v| v.to_u64())
        .ok_or_else(|| Error::InvalidParameter("class too large".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub pass: bool,
    pub mismatches: Vec<String>,
    pub observed: ClassMultiset,
}

impl CheckReport {
    pub fn to_json_value(&self) -> Value {
        json!({"pass": self.pass, "mismatches": self.mismatches, "observed": self.observed.to_json_value()})
    }
}

/// Compares the observed classes with the descriptor; fails only on certified over-counts.
pub fn check(p: &Presentation, d: &EqDescriptor, bound: usize) -> Result<CheckReport> {
    let observed = empirical_multiset(p, bound)?;
    let mut mismatches = Vec::new();
    for (&k, c) in &observed.counts {
        let predicted = class_count(d, k)?;
        if let (Cardinal::Finite(want), Cardinal::Finite(got)) = (&predicted, c) {
            if got > want {
                mismatches.push(format!("size {k}: observed {got} classes, predicted {want}"));
            }
        }
    }
    if let (Cardinal::Finite(want), Cardinal::Finite(got)) = (&d.infinite_classes, &observed.infinite_classes) {
        if got > want {
            mismatches.push(format!("observed {got} infinite classes, predicted {want}"));
        }
    }
    Ok(CheckReport { pass: mismatches.is_empty(), mismatches, observed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(arity: usize, monos: &[(u64, &[u32])]) -> NatPoly {
        NatPoly::new(arity, monos.iter().map(|(c, e)| (*c, e.to_vec()))).unwrap()
    }

    #[test]
    fn level_counts() {
        let d = |p: NatPoly| EqDescriptor::new(vec![p], Cardinal::zero());
        assert_eq!(class_count(&d(nat(1, &[(1, &[1]), (1, &[0])])), 5).unwrap(), Cardinal::from(1));
        assert_eq!(class_count(&d(NatPoly::constant(1, 3)), 3).unwrap(), Cardinal::Omega);
        assert_eq!(class_count(&d(nat(2, &[(1, &[1, 1])])), 6).unwrap(), Cardinal::from(4));
        assert_eq!(class_count(&d(nat(2, &[(1, &[1, 1]), (1, &[0, 0])])), 1).unwrap(), Cardinal::Omega);
        assert_eq!(class_count(&d(NatPoly::constant(0, 3)), 3).unwrap(), Cardinal::from(1));
    }

    #[test]
    fn split_binomial() {
        // y(y−1)/2 needs a shift before the residue split
        let y = Poly::var(1, 0);
        let p = y.mul(&y.add(&Poly::from_int(1, -1))).scale(&BigRational::new(1.into(), 2.into()));
        let mut out = Vec::new();
        natural_split(&p, &mut out).unwrap();
        let mut values: Vec<BigUint> = Vec::new();
        for q in &out {
            for v in 0..10 {
                let pt = vec![v; q.arity()];
                values.push(q.eval(&pt).unwrap());
                if q.arity() == 0 {
                    break;
                }
            }
        }
        assert!(out.iter().all(|q| q.arity() <= 1));
        assert_eq!(out.iter().filter(|q| q.arity() == 1).count(), 2);
    }
}
