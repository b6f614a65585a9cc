//! Exact symbolic engine for the normal-ordered Poisson algebra over
//! coordinates `q1..qs`, momenta `p1..ps` and the central element `Z`.
//!
//! Elements are finite sums of normal-ordered monomials `Z^k q^a p^b` with
//! Gaussian-rational coefficients; the associative product rewrites
//! `p_j q_i -> q_i p_j - Z d_ij` (distinct coordinates commute, `Z` is
//! central), and the Lie bracket extends `{q_i, p_j} = d_ij` through
//! linearity, antisymmetry and the Leibniz rule. Every operation is exact:
//! no floating point enters this module. Setting `Z` to zero yields
//! commuting phase-space polynomials; substituting a purely imaginary value
//! turns the same elements into differential operators.

mod classical;
mod parser;
mod schrodinger;

pub use classical::{specialize_classical, ClassicalPolynomial};
pub use parser::parse;
pub use schrodinger::{parse_x_polynomial, specialize_quantum, XPolynomial};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use num_complex::Complex;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Exact Gaussian-rational scalar.
pub type Scalar = Complex<BigRational>;

pub fn scalar_zero() -> Scalar {
    Scalar::new(BigRational::zero(), BigRational::zero())
}

pub fn scalar_one() -> Scalar {
    Scalar::new(BigRational::one(), BigRational::zero())
}

pub fn scalar_i() -> Scalar {
    Scalar::new(BigRational::zero(), BigRational::one())
}

pub fn scalar_from_int(v: i64) -> Scalar {
    Scalar::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
}

pub fn scalar_is_zero(s: &Scalar) -> bool {
    s.re.is_zero() && s.im.is_zero()
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical scalar text: plain rational when real, `(re+imi)` otherwise.
pub fn scalar_str(s: &Scalar) -> String {
    if s.im.is_zero() {
        rational_str(&s.re)
    } else if s.im.is_negative() {
        format!("({}-{}i)", rational_str(&s.re), rational_str(&-s.im.clone()))
    } else {
        format!("({}+{}i)", rational_str(&s.re), rational_str(&s.im))
    }
}

/// Coefficient prefix in front of a monomial: omitted for 1, otherwise a
/// parenthesized scalar.
pub(crate) fn coeff_prefix(c: &Scalar) -> Option<String> {
    if *c == scalar_one() {
        None
    } else if c.im.is_zero() {
        Some(format!("({})", rational_str(&c.re)))
    } else {
        Some(scalar_str(c))
    }
}

/// Normal-ordered monomial `Z^k q^a p^b`. The derived ordering (Z power,
/// then q exponents, then p exponents, lexicographically) is the canonical
/// printing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub z_pow: u32,
    pub q_exp: Vec<u32>,
    pub p_exp: Vec<u32>,
}

impl Monomial {
    pub fn unit(coords: usize) -> Self {
        Self {
            z_pow: 0,
            q_exp: vec![0; coords],
            p_exp: vec![0; coords],
        }
    }

    pub fn coords(&self) -> usize {
        self.q_exp.len()
    }

    /// `Z` counts twice, matching the degree of a commutator of degree-one
    /// factors.
    pub fn degree(&self) -> u32 {
        2 * self.z_pow
            + self.q_exp.iter().sum::<u32>()
            + self.p_exp.iter().sum::<u32>()
    }

    pub fn is_unit(&self) -> bool {
        self.degree() == 0
    }

    fn text(&self) -> String {
        let mut parts = Vec::new();
        let power = |sym: String, e: u32| -> String {
            if e == 1 {
                sym
            } else {
                format!("{sym}^{e}")
            }
        };
        if self.z_pow > 0 {
            parts.push(power("Z".into(), self.z_pow));
        }
        for (i, &e) in self.q_exp.iter().enumerate() {
            if e > 0 {
                parts.push(power(format!("q{}", i + 1), e));
            }
        }
        for (i, &e) in self.p_exp.iter().enumerate() {
            if e > 0 {
                parts.push(power(format!("p{}", i + 1), e));
            }
        }
        parts.join("*")
    }
}

/// A single generator occurring in a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Factor {
    Z,
    Q(usize),
    P(usize),
}

/// Finite exact-coefficient element in normal form. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElement {
    coords: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl LambdaElement {
    pub fn zero(coords: usize) -> Self {
        Self {
            coords,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(coords: usize) -> Self {
        Self::from_scalar(coords, scalar_one())
    }

    pub fn from_scalar(coords: usize, c: Scalar) -> Self {
        let mut e = Self::zero(coords);
        e.add_term(Monomial::unit(coords), c);
        e
    }

    pub fn from_monomial(coords: usize, m: Monomial, c: Scalar) -> Self {
        let mut e = Self::zero(coords);
        e.add_term(m, c);
        e
    }

    /// Coordinate generator `q_i`, 1-based.
    pub fn coordinate(coords: usize, i: usize) -> Result<Self> {
        if i == 0 || i > coords {
            return Err(Error::InvalidArgument(format!(
                "coordinate index {i} out of range 1..={coords}"
            )));
        }
        let mut m = Monomial::unit(coords);
        m.q_exp[i - 1] = 1;
        Ok(Self::from_monomial(coords, m, scalar_one()))
    }

    /// Momentum generator `p_i`, 1-based.
    pub fn momentum(coords: usize, i: usize) -> Result<Self> {
        if i == 0 || i > coords {
            return Err(Error::InvalidArgument(format!(
                "momentum index {i} out of range 1..={coords}"
            )));
        }
        let mut m = Monomial::unit(coords);
        m.p_exp[i - 1] = 1;
        Ok(Self::from_monomial(coords, m, scalar_one()))
    }

    /// The central element `Z`.
    pub fn central(coords: usize) -> Self {
        let mut m = Monomial::unit(coords);
        m.z_pow = 1;
        Self::from_monomial(coords, m, scalar_one())
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Largest monomial degree, or `None` for the zero element.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if scalar_is_zero(&c) {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if scalar_is_zero(&sum) {
                    o.remove();
                } else {
                    o.insert(sum);
                }
            }
        }
    }

    fn require_same_coords(&self, other: &Self) -> Result<()> {
        if self.coords != other.coords {
            return Err(Error::DimensionMismatch(format!(
                "elements over {} and {} coordinates",
                self.coords, other.coords
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.coords);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.coords);
        for (m, coeff) in &self.terms {
            out.add_term(m.clone(), coeff.clone() * c.clone());
        }
        out
    }

    /// Exact associative product in normal form, via the rewrite
    /// `p_j q_i -> q_i p_j - Z d_ij` applied coordinate by coordinate.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = Self::zero(self.coords);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let c = c1.clone() * c2.clone();
                for (m, w) in monomial_product(m1, m2) {
                    out.add_term(m, c.clone() * w);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::one(self.coords);
        for _ in 0..k {
            acc = acc.multiply(self)?;
        }
        Ok(acc)
    }

    /// `a b - b a` in normal form.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Canonical Lie bracket: `{q_i, p_j} = d_ij`, generators of equal type
    /// commute, `{Z, .} = 0`, extended by bilinearity, antisymmetry and the
    /// Leibniz rule `{A, BC} = {A, B} C + B {A, C}`.
    pub fn lie_bracket(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = Self::zero(self.coords);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let b = bracket_monomials(self.coords, m1, m2)?;
                out = out.add(&b.scale(&(c1.clone() * c2.clone())))?;
            }
        }
        Ok(out)
    }

    /// Involution: coefficients conjugate, factor order reverses, `Z` is
    /// anti-selfadjoint (`Z* = -Z`), `q_i` and `p_i` stay fixed.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.coords);
        for (m, c) in &self.terms {
            // (Z^k q^a p^b)* = (-1)^k Z^k p^b q^a, then normal-order
            let mut p_only = Monomial::unit(self.coords);
            p_only.p_exp = m.p_exp.clone();
            let mut q_only = Monomial::unit(self.coords);
            q_only.q_exp = m.q_exp.clone();
            let sign = if m.z_pow % 2 == 0 {
                scalar_one()
            } else {
                -scalar_one()
            };
            let coeff = c.conj() * sign;
            for (prod, w) in monomial_product(&p_only, &q_only) {
                let mut shifted = prod;
                shifted.z_pow += m.z_pow;
                out.add_term(shifted, coeff.clone() * w);
            }
        }
        out
    }
}

/// `[a, b] == Z {a, b}` with exact normal-form equality.
pub fn theorem_check(a: &LambdaElement, b: &LambdaElement) -> Result<bool> {
    let lhs = a.commutator(b)?;
    let z = LambdaElement::central(a.coords());
    let rhs = z.multiply(&a.lie_bracket(b)?)?;
    Ok(lhs == rhs)
}

/// `[a, b] {c, d} == {a, b} [c, d]` with exact equality.
pub fn dirac_identity_check(
    a: &LambdaElement,
    b: &LambdaElement,
    c: &LambdaElement,
    d: &LambdaElement,
) -> Result<bool> {
    let lhs = a.commutator(b)?.multiply(&c.lie_bracket(d)?)?;
    let rhs = a.lie_bracket(b)?.multiply(&c.commutator(d)?)?;
    Ok(lhs == rhs)
}

/// `{a,{b,c}} + {c,{a,b}} + {b,{c,a}} == 0` exactly.
pub fn jacobi_check(a: &LambdaElement, b: &LambdaElement, c: &LambdaElement) -> Result<bool> {
    let t1 = a.lie_bracket(&b.lie_bracket(c)?)?;
    let t2 = c.lie_bracket(&a.lie_bracket(b)?)?;
    let t3 = b.lie_bracket(&c.lie_bracket(a)?)?;
    Ok(t1.add(&t2)?.add(&t3)?.is_zero())
}

/// Right-slot Leibniz rule `{a, bc} == {a,b} c + b {a,c}` exactly.
pub fn leibniz_right_check(
    a: &LambdaElement,
    b: &LambdaElement,
    c: &LambdaElement,
) -> Result<bool> {
    let lhs = a.lie_bracket(&b.multiply(c)?)?;
    let rhs = a.lie_bracket(b)?.multiply(c)?.add(&b.multiply(&a.lie_bracket(c)?)?)?;
    Ok(lhs == rhs)
}

/// Left-slot Leibniz rule `{ab, c} == a {b,c} + {a,c} b`; together with the
/// right-slot rule this pins the bracket as well-defined on normal forms.
pub fn leibniz_left_check(
    a: &LambdaElement,
    b: &LambdaElement,
    c: &LambdaElement,
) -> Result<bool> {
    let lhs = a.multiply(b)?.lie_bracket(c)?;
    let rhs = a.multiply(&b.lie_bracket(c)?)?.add(&a.lie_bracket(c)?.multiply(b)?)?;
    Ok(lhs == rhs)
}

/// `{a*, b*} == {a, b}*` exactly.
pub fn involution_check(a: &LambdaElement, b: &LambdaElement) -> Result<bool> {
    let lhs = a.adjoint().lie_bracket(&b.adjoint())?;
    let rhs = a.lie_bracket(b)?.adjoint();
    Ok(lhs == rhs)
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Normal-ordered product of two monomials. Per coordinate,
/// `p^b q^a = sum_j (-1)^j j! C(a,j) C(b,j) Z^j q^{a-j} p^{b-j}`;
/// coordinates are independent because mixed generators commute.
fn monomial_product(m1: &Monomial, m2: &Monomial) -> Vec<(Monomial, Scalar)> {
    let coords = m1.coords();
    let base_z = m1.z_pow + m2.z_pow;
    // accumulate (z extra, q exps, p exps, integer coefficient)
    let mut acc: Vec<(u32, Vec<u32>, Vec<u32>, BigInt)> =
        vec![(0, Vec::with_capacity(coords), Vec::with_capacity(coords), BigInt::one())];
    for i in 0..coords {
        let a1 = m1.q_exp[i];
        let b1 = m1.p_exp[i];
        let a2 = m2.q_exp[i];
        let b2 = m2.p_exp[i];
        let jmax = a2.min(b1);
        let mut next = Vec::with_capacity(acc.len() * (jmax as usize + 1));
        for j in 0..=jmax {
            let mut w = factorial(j) * binomial(a2, j) * binomial(b1, j);
            if j % 2 == 1 {
                w = -w;
            }
            for (z, qs, ps, coeff) in &acc {
                let mut qs = qs.clone();
                let mut ps = ps.clone();
                qs.push(a1 + a2 - j);
                ps.push(b1 + b2 - j);
                next.push((z + j, qs, ps, coeff.clone() * w.clone()));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(z, q_exp, p_exp, coeff)| {
            (
                Monomial {
                    z_pow: base_z + z,
                    q_exp,
                    p_exp,
                },
                Scalar::new(BigRational::from_integer(coeff), BigRational::zero()),
            )
        })
        .collect()
}

fn factor_monomial(coords: usize, f: Factor) -> Monomial {
    let mut m = Monomial::unit(coords);
    match f {
        Factor::Z => m.z_pow = 1,
        Factor::Q(i) => m.q_exp[i] = 1,
        Factor::P(i) => m.p_exp[i] = 1,
    }
    m
}

/// Factors of a monomial in canonical order: `Z`s, then `q`s, then `p`s.
fn factor_list(m: &Monomial) -> Vec<Factor> {
    let mut out = Vec::new();
    for _ in 0..m.z_pow {
        out.push(Factor::Z);
    }
    for (i, &e) in m.q_exp.iter().enumerate() {
        for _ in 0..e {
            out.push(Factor::Q(i));
        }
    }
    for (i, &e) in m.p_exp.iter().enumerate() {
        for _ in 0..e {
            out.push(Factor::P(i));
        }
    }
    out
}

fn strip_first_factor(m: &Monomial) -> Option<(Factor, Monomial)> {
    let mut rest = m.clone();
    if m.z_pow > 0 {
        rest.z_pow -= 1;
        return Some((Factor::Z, rest));
    }
    for (i, &e) in m.q_exp.iter().enumerate() {
        if e > 0 {
            rest.q_exp[i] -= 1;
            return Some((Factor::Q(i), rest));
        }
    }
    for (i, &e) in m.p_exp.iter().enumerate() {
        if e > 0 {
            rest.p_exp[i] -= 1;
            return Some((Factor::P(i), rest));
        }
    }
    None
}

fn base_bracket(coords: usize, f: Factor, g: Factor) -> LambdaElement {
    match (f, g) {
        (Factor::Q(i), Factor::P(j)) if i == j => LambdaElement::one(coords),
        (Factor::P(i), Factor::Q(j)) if i == j => LambdaElement::one(coords).neg(),
        _ => LambdaElement::zero(coords),
    }
}

/// `{g, m}` for a single generator against a monomial, by peeling the
/// leftmost factor of `m` with the Leibniz rule.
fn bracket_generator_monomial(coords: usize, g: Factor, m: &Monomial) -> Result<LambdaElement> {
    match strip_first_factor(m) {
        None => Ok(LambdaElement::zero(coords)),
        Some((y, rest)) => {
            let head = base_bracket(coords, g, y)
                .multiply(&LambdaElement::from_monomial(coords, rest.clone(), scalar_one()))?;
            let tail = LambdaElement::from_monomial(coords, factor_monomial(coords, y), scalar_one())
                .multiply(&bracket_generator_monomial(coords, g, &rest)?)?;
            head.add(&tail)
        }
    }
}

/// `{m1, m2}` for monomials: peel `m2` by the right Leibniz rule, reducing
/// to generator-vs-monomial brackets via antisymmetry.
fn bracket_monomials(coords: usize, m1: &Monomial, m2: &Monomial) -> Result<LambdaElement> {
    let f1 = factor_list(m1);
    if f1.is_empty() {
        return Ok(LambdaElement::zero(coords));
    }
    if f1.len() == 1 {
        return bracket_generator_monomial(coords, f1[0], m2);
    }
    match strip_first_factor(m2) {
        None => Ok(LambdaElement::zero(coords)),
        Some((x, rest)) => {
            // {m1, x rest} = {m1, x} rest + x {m1, rest}
            let m1_x = bracket_generator_monomial(coords, x, m1)?.neg();
            let head = m1_x.multiply(&LambdaElement::from_monomial(
                coords,
                rest.clone(),
                scalar_one(),
            ))?;
            let tail =
                LambdaElement::from_monomial(coords, factor_monomial(coords, x), scalar_one())
                    .multiply(&bracket_monomials(coords, m1, &rest)?)?;
            head.add(&tail)
        }
    }
}

impl fmt::Display for LambdaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // leading term first: descending monomial order
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = m.text();
            if mono.is_empty() {
                write!(f, "{}", scalar_str(c))?;
            } else {
                match coeff_prefix(c) {
                    None => write!(f, "{mono}")?,
                    Some(prefix) => write!(f, "{prefix}*{mono}")?,
                }
            }
        }
        Ok(())
    }
}

/// Seeded random element: up to `max_terms` monomials of total degree at
/// most `max_degree`, with small Gaussian-integer coefficients. Used by the
/// identity batteries.
pub fn random_element(
    rng: &mut impl Rng,
    coords: usize,
    max_degree: u32,
    max_terms: usize,
) -> LambdaElement {
    let mut e = LambdaElement::zero(coords);
    let terms = rng.gen_range(1..=max_terms);
    for _ in 0..terms {
        let mut budget = max_degree;
        let mut m = Monomial::unit(coords);
        if budget >= 2 && rng.gen_bool(0.3) {
            let z = rng.gen_range(0..=(budget / 2));
            m.z_pow = z;
            budget -= 2 * z;
        }
        for i in 0..coords {
            if budget == 0 {
                break;
            }
            let e_q = rng.gen_range(0..=budget);
            m.q_exp[i] = e_q;
            budget -= e_q;
            if budget == 0 {
                break;
            }
            let e_p = rng.gen_range(0..=budget);
            m.p_exp[i] = e_p;
            budget -= e_p;
        }
        let re = rng.gen_range(-3i64..=3);
        let im = rng.gen_range(-3i64..=3);
        let c = if re == 0 && im == 0 {
            scalar_one()
        } else {
            Scalar::new(
                BigRational::from_integer(BigInt::from(re)),
                BigRational::from_integer(BigInt::from(im)),
            )
        };
        e.add_term(m, c);
    }
    if e.is_zero() {
        LambdaElement::one(coords)
    } else {
        e
    }
}
