//! Multivariate polynomials: rational ones for exact algebra, natural ones for descriptors, and
//! basic polynomials (sums of products of binomial coefficients of affine forms).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::count::{big_from_value, big_to_value};
use crate::error::{Error, Result};
use crate::semilinear::AffineMap;

/// A polynomial in `arity` variables with rational coefficients. Zero coefficients are never
/// stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(arity: usize) -> Poly {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: BigRational) -> Poly {
        let mut p = Poly::zero(arity);
        p.add_term(vec![0; arity], c);
        p
    }

    pub fn from_int(arity: usize, c: i64) -> Poly {
        Poly::constant(arity, BigRational::from_integer(c.into()))
    }

    pub fn var(arity: usize, i: usize) -> Poly {
        let mut e = vec![0; arity];
        e[i] = 1;
        let mut p = Poly::zero(arity);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn from_monomials(arity: usize, monomials: impl IntoIterator<Item = (BigRational, Vec<u32>)>) -> Result<Poly> {
        let mut p = Poly::zero(arity);
        for (c, e) in monomials {
            if e.len() != arity {
                return Err(Error::DimensionMismatch { expected: arity, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        let mut p = Poly::zero(self.arity);
        for (e, d) in &self.terms {
            p.add_term(e.clone(), d * c);
        }
        p
    }

    fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(self.arity, BigRational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, got: x.len() });
        }
        let mut sum = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in x.iter().zip(e) {
                t *= num_traits::pow(v.clone(), k as usize);
            }
            sum += t;
        }
        Ok(sum)
    }

    pub fn eval_nat(&self, x: &[u64]) -> Result<BigRational> {
        let xs: Vec<BigRational> = x.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        self.eval(&xs)
    }

    /// p(q₀(ȳ), …, q_{n−1}(ȳ)); every image must share one arity.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, got: images.len() });
        }
        let m = match images.first() {
            Some(q) => q.arity,
            None => 0,
        };
        if let Some(q) = images.iter().find(|q| q.arity != m) {
            return Err(Error::DimensionMismatch { expected: m, got: q.arity });
        }
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (q, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&q.pow(k));
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Substitutes x_i ↦ offset_i + Σ_j columns_j[i]·y_j.
    pub fn compose_affine(&self, offset: &[BigInt], columns: &[Vec<BigInt>]) -> Result<Poly> {
        let m = columns.len();
        let images: Vec<Poly> = (0..offset.len())
            .map(|i| {
                let mut q = Poly::constant(m, BigRational::from_integer(offset[i].clone()));
                for (j, col) in columns.iter().enumerate() {
                    q = q.add(&Poly::var(m, j).scale(&BigRational::from_integer(col[i].clone())));
                }
                q
            })
            .collect();
        self.compose(&images)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// The same polynomial when every coefficient is a natural number.
    pub fn to_nat(&self) -> Option<NatPoly> {
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            if !c.is_integer() || c.is_negative() {
                return None;
            }
            out.insert(e.clone(), c.to_integer().to_biguint()?);
        }
        Some(NatPoly { arity: self.arity, terms: out })
    }

    pub fn to_json_value(&self) -> Value {
        let monomials: Vec<Value> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let coeff = if c.is_integer() && c.to_integer().to_i64().is_some() {
                    json!(c.to_integer().to_i64().unwrap())
                } else {
                    json!(c.to_string())
                };
                json!({"coeff": coeff, "exps": e})
            })
            .collect();
        json!({"arity": self.arity, "monomials": monomials})
    }

    /// Coefficients are JSON integers or strings such as `"-3/2"`.
    pub fn from_json_value(v: &Value) -> Result<Poly> {
        let (arity, monos) = monomials_json(v)?;
        let mut out = Vec::new();
        for (c, e) in monos {
            let q = match c {
                Value::Number(n) => n
                    .as_i64()
                    .map(|x| BigRational::from_integer(x.into()))
                    .ok_or_else(|| Error::Json("coefficient out of range".into()))?,
                Value::String(s) => s.trim().parse::<BigRational>().map_err(|_| Error::Json(format!("bad coefficient `{s}`")))?,
                _ => return Err(Error::Json("coefficient must be a number or a string".into())),
            };
            out.push((q, e));
        }
        Poly::from_monomials(arity, out)
    }
}

fn monomials_json(v: &Value) -> Result<(usize, Vec<(Value, Vec<u32>)>)> {
    let arity = v
        .get("arity")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Json("polynomial needs `arity`".into()))? as usize;
    let monos = v
        .get("monomials")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Json("polynomial needs `monomials`".into()))?;
    let mut out = Vec::new();
    for m in monos {
        let c = m.get("coeff").cloned().ok_or_else(|| Error::Json("monomial needs `coeff`".into()))?;
        let e: Vec<u32> = serde_json::from_value(m.get("exps").cloned().unwrap_or(Value::Null))
            .map_err(|_| Error::Json("monomial needs `exps`".into()))?;
        if e.len() != arity {
            return Err(Error::DimensionMismatch { expected: arity, got: e.len() });
        }
        out.push((c, e));
    }
    Ok((arity, out))
}

fn write_terms<'a, C: fmt::Display + 'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a Vec<u32>, C)>,
    is_one: impl Fn(&C) -> bool,
) -> fmt::Result {
    let mut first = true;
    for (e, c) in terms {
        if !first {
            f.write_str(" + ")?;
        }
        first = false;
        let vars: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
            .collect();
        if vars.is_empty() {
            write!(f, "{c}")?;
        } else if is_one(&c) {
            f.write_str(&vars.join("*"))?;
        } else {
            write!(f, "{c}*{}", vars.join("*"))?;
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().rev(), |c| c.is_one())
    }
}

/// A polynomial with natural coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatPoly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, BigUint>,
}

impl NatPoly {
    pub fn new(arity: usize, monomials: impl IntoIterator<Item = (u64, Vec<u32>)>) -> Result<NatPoly> {
        let mut terms: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (c, e) in monomials {
            if e.len() != arity {
                return Err(Error::DimensionMismatch { expected: arity, got: e.len() });
            }
            if c > 0 {
                *terms.entry(e).or_default() += BigUint::from(c);
            }
        }
        Ok(NatPoly { arity, terms })
    }

    pub fn constant(arity: usize, c: u64) -> NatPoly {
        NatPoly::new(arity, [(c, vec![0; arity])]).unwrap()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Vec<u32>, &BigUint)> {
        self.terms.iter()
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn eval(&self, x: &[u64]) -> Result<BigUint> {
        if x.len() != self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, got: x.len() });
        }
        let mut sum = BigUint::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&v, &k) in x.iter().zip(e) {
                t *= BigUint::from(v).pow(k);
            }
            sum += t;
        }
        Ok(sum)
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.arity);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), BigRational::from_integer(BigInt::from(c.clone())));
        }
        p
    }

    pub fn to_json_value(&self) -> Value {
        let monomials: Vec<Value> =
            self.terms.iter().rev().map(|(e, c)| json!({"coeff": big_to_value(c), "exps": e})).collect();
        json!({"arity": self.arity, "monomials": monomials})
    }

    pub fn from_json_value(v: &Value) -> Result<NatPoly> {
        let (arity, monos) = monomials_json(v)?;
        let mut terms: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (c, e) in monos {
            let c = big_from_value(&c).ok_or_else(|| Error::Json("coefficients must be natural numbers".into()))?;
            if !c.is_zero() {
                *terms.entry(e).or_default() += c;
            }
        }
        Ok(NatPoly { arity, terms })
    }
}

impl fmt::Display for NatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().rev(), |c| c.is_one())
    }
}

/// binom(a·x̄ + b, c), read as 0 when a·x̄ + b < c.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinomAtom {
    pub a: Vec<i64>,
    pub b: i64,
    pub c: u64,
}

impl BinomAtom {
    fn argument(&self, x: &[u64]) -> i128 {
        self.a.iter().zip(x).map(|(&a, &v)| a as i128 * v as i128).sum::<i128>() + self.b as i128
    }

    pub fn eval(&self, x: &[u64]) -> BigUint {
        binomial(self.argument(x), self.c)
    }

    fn is_natural(&self) -> bool {
        self.b >= 0 && self.a.iter().all(|&a| a >= 0)
    }

    /// t(t−1)⋯(t−c+1)/c!, which agrees with the atom wherever its argument is ≥ 0.
    fn to_poly(&self) -> Poly {
        let n = self.a.len();
        let mut lin = Poly::from_int(n, self.b);
        for (i, &a) in self.a.iter().enumerate() {
            lin = lin.add(&Poly::var(n, i).scale(&BigRational::from_integer(a.into())));
        }
        let mut p = Poly::from_int(n, 1);
        let mut fact = BigInt::one();
        for i in 0..self.c {
            p = p.mul(&lin.add(&Poly::from_int(n, -(i as i64))));
            fact *= BigInt::from(i + 1);
        }
        p.scale(&BigRational::new(BigInt::one(), fact))
    }
}

pub(crate) fn binomial(t: i128, c: u64) -> BigUint {
    if t < c as i128 {
        return BigUint::zero();
    }
    let mut r = BigUint::one();
    for i in 0..c {
        r = r * BigUint::from((t - i as i128) as u128) / BigUint::from(i + 1);
    }
    r
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicTerm {
    pub coeff: u64,
    pub atoms: Vec<BinomAtom>,
}

/// Σ coeff · Π binom(a·x̄ + b, c). Atom coefficients may be negative (fiber values in cell
/// coordinates); after composition with a parametrization they are natural, see `is_natural`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicPolynomial {
    n: usize,
    terms: Vec<BasicTerm>,
}

impl BasicPolynomial {
    pub fn new(n: usize, terms: Vec<BasicTerm>) -> Result<Self> {
        for a in terms.iter().flat_map(|t| &t.atoms) {
            if a.a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.a.len() });
            }
        }
        Ok(BasicPolynomial { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        BasicPolynomial { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: u64) -> Self {
        BasicPolynomial { n, terms: vec![BasicTerm { coeff: c, atoms: Vec::new() }] }
    }

    pub fn product(n: usize, atoms: Vec<BinomAtom>) -> Self {
        BasicPolynomial { n, terms: vec![BasicTerm { coeff: 1, atoms }] }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[BasicTerm] {
        &self.terms
    }

    pub fn add(&self, other: &BasicPolynomial) -> Result<BasicPolynomial> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(BasicPolynomial { n: self.n, terms })
    }

    pub fn eval(&self, x: &[u64]) -> Result<BigUint> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| t.atoms.iter().fold(BigUint::from(t.coeff), |acc, a| acc * a.eval(x)))
            .sum())
    }

    /// All atom coefficients and constants are natural.
    pub fn is_natural(&self) -> bool {
        self.terms.iter().flat_map(|t| &t.atoms).all(BinomAtom::is_natural)
    }

    /// The polynomial in the parameters of `phi` obtained by substituting x̄ = φ(ȳ).
    pub fn compose_affine(&self, phi: &AffineMap) -> Result<BasicPolynomial> {
        if phi.dim_out() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: phi.dim_out() });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| BasicTerm {
                coeff: t.coeff,
                atoms: t
                    .atoms
                    .iter()
                    .map(|a| {
                        let dot = |v: &[u64]| a.a.iter().zip(v).map(|(&x, &y)| x * y as i64).sum::<i64>();
                        BinomAtom { a: phi.columns().iter().map(|c| dot(c)).collect(), b: a.b + dot(phi.offset()), c: a.c }
                    })
                    .collect(),
            })
            .collect();
        Ok(BasicPolynomial { n: phi.dim_in(), terms })
    }

    /// The expansion as an ordinary polynomial; equal to `self` on points where every atom
    /// argument is ≥ 0 (in particular everywhere when `is_natural`).
    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.n);
        for t in &self.terms {
            let prod = t.atoms.iter().fold(Poly::from_int(self.n, t.coeff as i64), |acc, a| acc.mul(&a.to_poly()));
            p = p.add(&prod);
        }
        p
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|t| {
                    let atoms: Vec<Value> = t.atoms.iter().map(|a| json!({"a": a.a, "b": a.b, "c": a.c})).collect();
                    json!({"coeff": t.coeff, "atoms": atoms})
                })
                .collect(),
        )
    }

    /// `n` is needed because a polynomial without atoms does not reveal its arity.
    pub fn from_json_value(v: &Value, n: usize) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Json("basic polynomial must be an array".into()))?;
        let mut terms = Vec::new();
        for t in arr {
            let coeff = t.get("coeff").and_then(Value::as_u64).ok_or_else(|| Error::Json("term needs a natural `coeff`".into()))?;
            let mut atoms = Vec::new();
            for a in t.get("atoms").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
                let av: Vec<i64> = serde_json::from_value(a.get("a").cloned().unwrap_or(Value::Null))
                    .map_err(|_| Error::Json("atom needs integer vector `a`".into()))?;
                let b = a.get("b").and_then(Value::as_i64).ok_or_else(|| Error::Json("atom needs integer `b`".into()))?;
                let c = a.get("c").and_then(Value::as_u64).ok_or_else(|| Error::Json("atom needs natural `c`".into()))?;
                atoms.push(BinomAtom { a: av, b, c });
            }
            terms.push(BasicTerm { coeff, atoms });
        }
        BasicPolynomial::new(n, terms)
    }
}

impl fmt::Display for BasicPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if t.coeff != 1 || t.atoms.is_empty() {
                parts.push(t.coeff.to_string());
            }
            for a in &t.atoms {
                let mut lin = String::new();
                for (j, &k) in a.a.iter().enumerate().filter(|(_, &k)| k != 0) {
                    let sign = if k < 0 { "-" } else if lin.is_empty() { "" } else { "+" };
                    let mag = k.unsigned_abs();
                    let coef = if mag == 1 { String::new() } else { format!("{mag}*") };
                    lin.push_str(&format!("{sign}{coef}x{j}"));
                }
                if a.b != 0 || lin.is_empty() {
                    if lin.is_empty() {
                        lin = a.b.to_string();
                    } else {
                        lin.push_str(&format!("{}{}", if a.b < 0 { "-" } else { "+" }, a.b.unsigned_abs()));
                    }
                }
                parts.push(format!("binom({lin},{})", a.c));
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}
