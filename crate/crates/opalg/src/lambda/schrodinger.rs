//! Differential-operator specialization for one coordinate pair: the
//! central element becomes `i hbar`, coordinates multiply by `x`, momenta
//! differentiate (`-i hbar d/dx`), all with exact coefficients.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

use super::{scalar_is_zero, scalar_str, LambdaElement, Scalar};
use crate::error::{Error, Result};

/// Polynomial in `x` with exact Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XPolynomial {
    coeffs: BTreeMap<u32, Scalar>,
}

impl XPolynomial {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_coeff(0, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_coeff(&mut self, power: u32, c: Scalar) {
        if scalar_is_zero(&c) {
            return;
        }
        let entry = self.coeffs.entry(power).or_insert_with(super::scalar_zero);
        *entry = entry.clone() + c;
        if scalar_is_zero(entry) {
            self.coeffs.remove(&power);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.coeffs {
            out.add_coeff(k, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero();
        for (&k, coeff) in &self.coeffs {
            out.add_coeff(k, coeff.clone() * c.clone());
        }
        out
    }

    pub fn mul_x_pow(&self, a: u32) -> Self {
        let mut out = Self::zero();
        for (&k, c) in &self.coeffs {
            out.add_coeff(k + a, c.clone());
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (&k, c) in &self.coeffs {
            if k > 0 {
                let factor = Scalar::new(
                    BigRational::from_integer(BigInt::from(k)),
                    BigRational::zero(),
                );
                out.add_coeff(k - 1, c.clone() * factor);
            }
        }
        out
    }
}

impl fmt::Display for XPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            if mono.is_empty() {
                write!(f, "{}", scalar_str(c))?;
            } else {
                match super::coeff_prefix(c) {
                    None => write!(f, "{mono}")?,
                    Some(prefix) => write!(f, "{prefix}*{mono}")?,
                }
            }
        }
        Ok(())
    }
}

/// Parses polynomials like `1 + x + x^2` or `(1/2)*x^3 - 2i*x`.
pub fn parse_x_polynomial(text: &str) -> Result<XPolynomial> {
    let mut parser = XParser {
        text: text.as_bytes(),
        pos: 0,
    };
    let poly = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.text.len() {
        return Err(Error::Parse {
            position: parser.pos,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(poly)
}

struct XParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> XParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<XPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.scale(&-super::scalar_one()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<XPolynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            // polynomial product
            let mut out = XPolynomial::zero();
            for (&k1, c1) in &acc.coeffs {
                for (&k2, c2) in &rhs.coeffs {
                    out.add_coeff(k1 + k2, c1.clone() * c2.clone());
                }
            }
            acc = out;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<XPolynomial> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.factor()?.scale(&-super::scalar_one()));
        }
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.read_nat()?;
            let mut acc = XPolynomial::constant(super::scalar_one());
            for _ in 0..exp {
                let mut out = XPolynomial::zero();
                for (&k1, c1) in &acc.coeffs {
                    for (&k2, c2) in &base.coeffs {
                        out.add_coeff(k1 + k2, c1.clone() * c2.clone());
                    }
                }
                acc = out;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<XPolynomial> {
        let at = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(Error::Parse {
                        position: self.pos,
                        message: "expected `)`".into(),
                    })
                }
            }
            Some(b'x') => {
                self.pos += 1;
                let mut p = XPolynomial::zero();
                p.add_coeff(1, super::scalar_one());
                Ok(p)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(XPolynomial::constant(super::scalar_i()))
            }
            Some(c) if c.is_ascii_digit() => {
                let numer = self.read_digits();
                let denom = if self.text.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    self.read_digits()
                } else {
                    BigInt::from(1)
                };
                if denom.is_zero() {
                    return Err(Error::Parse {
                        position: at,
                        message: "zero denominator".into(),
                    });
                }
                let value = BigRational::new(numer, denom);
                if self.text.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(XPolynomial::constant(Scalar::new(BigRational::zero(), value)))
                } else {
                    Ok(XPolynomial::constant(Scalar::new(value, BigRational::zero())))
                }
            }
            _ => Err(Error::Parse {
                position: self.pos.min(self.text.len()),
                message: "expected a number, `x`, or `(`".into(),
            }),
        }
    }

    fn read_nat(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .map(|b| b.is_ascii_digit())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                position: start,
                message: "expected an exponent".into(),
            });
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Parse {
                position: start,
                message: "exponent too large".into(),
            })
    }

    fn read_digits(&mut self) -> BigInt {
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .map(|b| b.is_ascii_digit())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .expect("ascii digits")
            .parse()
            .expect("digit run parses")
    }
}

/// Acts on a test polynomial with the differential-operator realization of
/// a one-coordinate element: `Z -> i hbar`, `q -> x .`, `p -> -i hbar d/dx`,
/// applied factor by factor right to left. Exact in the coefficients, and
/// `(q p - p q) psi = i hbar psi` for every `psi`.
pub fn specialize_quantum(
    a: &LambdaElement,
    hbar: &BigRational,
    psi: &XPolynomial,
) -> Result<XPolynomial> {
    if a.coords() != 1 {
        return Err(Error::InvalidArgument(format!(
            "differential-operator action is defined for one coordinate pair, got {}",
            a.coords()
        )));
    }
    let i_hbar = Scalar::new(BigRational::zero(), hbar.clone());
    let minus_i_hbar = -i_hbar.clone();
    let mut out = XPolynomial::zero();
    for (m, c) in a.terms() {
        let mut phi = psi.clone();
        // momenta act first (rightmost factors of Z^k q^a p^b)
        for _ in 0..m.p_exp[0] {
            phi = phi.derivative().scale(&minus_i_hbar);
        }
        phi = phi.mul_x_pow(m.q_exp[0]);
        let mut weight = c.clone();
        for _ in 0..m.z_pow {
            weight *= i_hbar.clone();
        }
        out = out.add(&phi.scale(&weight));
    }
    Ok(out)
}
