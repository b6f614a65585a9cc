//! Commutative specialization: sending the central element to zero turns a
//! normal-ordered element into an ordinary phase-space polynomial, whose
//! Poisson bracket is computed by formal differentiation — an independent
//! route against the algebraic Lie bracket.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

use super::{scalar_is_zero, scalar_str, LambdaElement, Scalar};
use crate::error::{Error, Result};

/// Commutative polynomial in `q1..qs, p1..ps` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalPolynomial {
    coords: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Scalar>,
}

impl ClassicalPolynomial {
    pub fn zero(coords: usize) -> Self {
        Self {
            coords,
            terms: BTreeMap::new(),
        }
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, key: (Vec<u32>, Vec<u32>), c: Scalar) {
        if scalar_is_zero(&c) {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(super::scalar_zero);
        *entry = entry.clone() + c;
        let key_zeroed = scalar_is_zero(entry);
        if key_zeroed {
            self.terms.retain(|_, v| !scalar_is_zero(v));
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = Self::zero(self.coords);
        for ((q1, p1), c1) in &self.terms {
            for ((q2, p2), c2) in &other.terms {
                let q: Vec<u32> = q1.iter().zip(q2).map(|(a, b)| a + b).collect();
                let p: Vec<u32> = p1.iter().zip(p2).map(|(a, b)| a + b).collect();
                out.add_term((q, p), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    fn require_same_coords(&self, other: &Self) -> Result<()> {
        if self.coords != other.coords {
            return Err(Error::DimensionMismatch(format!(
                "polynomials over {} and {} coordinates",
                self.coords, other.coords
            )));
        }
        Ok(())
    }

    /// Formal partial derivative in `q_i` (0-based).
    pub fn derivative_q(&self, i: usize) -> Self {
        let mut out = Self::zero(self.coords);
        for ((q, p), c) in &self.terms {
            if q[i] == 0 {
                continue;
            }
            let mut q2 = q.clone();
            q2[i] -= 1;
            let factor = Scalar::new(
                BigRational::from_integer(BigInt::from(q[i])),
                BigRational::zero(),
            );
            out.add_term((q2, p.clone()), c.clone() * factor);
        }
        out
    }

    /// Formal partial derivative in `p_i` (0-based).
    pub fn derivative_p(&self, i: usize) -> Self {
        let mut out = Self::zero(self.coords);
        for ((q, p), c) in &self.terms {
            if p[i] == 0 {
                continue;
            }
            let mut p2 = p.clone();
            p2[i] -= 1;
            let factor = Scalar::new(
                BigRational::from_integer(BigInt::from(p[i])),
                BigRational::zero(),
            );
            out.add_term((q.clone(), p2), c.clone() * factor);
        }
        out
    }

    /// `sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i` by formal differentiation.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.require_same_coords(other)?;
        let mut out = Self::zero(self.coords);
        for i in 0..self.coords {
            let plus = self.derivative_q(i).multiply(&other.derivative_p(i))?;
            let minus = self.derivative_p(i).multiply(&other.derivative_q(i))?;
            out = out.add(&plus)?.sub(&minus)?;
        }
        Ok(out)
    }
}

impl fmt::Display for ClassicalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((q, p), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut parts = Vec::new();
            for (i, &e) in q.iter().enumerate() {
                if e == 1 {
                    parts.push(format!("q{}", i + 1));
                } else if e > 1 {
                    parts.push(format!("q{}^{}", i + 1, e));
                }
            }
            for (i, &e) in p.iter().enumerate() {
                if e == 1 {
                    parts.push(format!("p{}", i + 1));
                } else if e > 1 {
                    parts.push(format!("p{}^{}", i + 1, e));
                }
            }
            let mono = parts.join("*");
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

/// Sends the central element to zero: monomials with a `Z` factor drop,
/// the rest commute.
pub fn specialize_classical(a: &LambdaElement) -> ClassicalPolynomial {
    let mut out = ClassicalPolynomial::zero(a.coords());
    for (m, c) in a.terms() {
        if m.z_pow == 0 {
            out.add_term((m.q_exp.clone(), m.p_exp.clone()), c.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse, random_element};
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn central_terms_drop() {
        let e = parse("Z*q1 + q1*p1", 1).unwrap();
        let c = specialize_classical(&e);
        assert_eq!(format!("{c}"), "q1*p1");
    }

    #[test]
    fn bracket_specializes_to_the_formal_poisson_bracket() {
        let mut rng = rng::seeded(47);
        for _ in 0..40 {
            let s = rng.gen_range(1..=3usize);
            let a = random_element(&mut rng, s, 4, 3);
            let b = random_element(&mut rng, s, 4, 3);
            let via_algebra = specialize_classical(&a.lie_bracket(&b).unwrap());
            let via_derivatives = specialize_classical(&a)
                .poisson_bracket(&specialize_classical(&b))
                .unwrap();
            assert_eq!(via_algebra, via_derivatives, "a={a} b={b}");
        }
    }

    #[test]
    fn commutators_vanish_classically() {
        let mut rng = rng::seeded(53);
        for _ in 0..30 {
            let a = random_element(&mut rng, 2, 4, 3);
            let b = random_element(&mut rng, 2, 4, 3);
            assert!(specialize_classical(&a.commutator(&b).unwrap()).is_zero());
        }
    }

    #[test]
    fn derivative_of_square() {
        let e = specialize_classical(&parse("p1^2", 1).unwrap());
        assert_eq!(format!("{}", e.derivative_p(0)), "(2)*p1");
    }
}
