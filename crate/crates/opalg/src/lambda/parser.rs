//! Recursive-descent parser for normal-ordered algebra expressions.
//!
//! Grammar (explicit `*` for products, no implicit multiplication):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | primary ('^' nat)?
//! primary := number | 'i' | symbol | '(' expr ')'
//!          | '[' expr ',' expr ']' | '{' expr ',' expr '}'
//! number  := digits ('/' digits)? ('i')?
//! symbol  := 'Z' | 'q'<index> | 'p'<index>
//! ```
//!
//! `[x, y]` is the commutator, `{x, y}` the Lie bracket. Printing an
//! element and parsing it back is exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use super::{scalar_i, LambdaElement, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number { value: BigRational, imaginary: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
}

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(Token, usize)>> {
        let mut lexer = Lexer {
            text: text.as_bytes(),
            pos: 0,
        };
        let mut tokens = Vec::new();
        while let Some((tok, at)) = lexer.next_token()? {
            tokens.push((tok, at));
        }
        Ok(tokens)
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.text.len() {
            return Ok(None);
        }
        let at = self.pos;
        let c = self.text[self.pos];
        let simple = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b'[' => Some(Token::LBracket),
            b']' => Some(Token::RBracket),
            b'{' => Some(Token::LBrace),
            b'}' => Some(Token::RBrace),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok(Some((tok, at)));
        }
        if c.is_ascii_digit() {
            let numer = self.read_digits();
            let denom = if self.peek() == Some(b'/') {
                self.pos += 1;
                if !self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
                    return Err(Error::Parse {
                        position: self.pos,
                        message: "expected digits after `/`".into(),
                    });
                }
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
            let imaginary = if self.peek() == Some(b'i') {
                self.pos += 1;
                true
            } else {
                false
            };
            return Ok(Some((
                Token::Number {
                    value: BigRational::new(numer, denom),
                    imaginary,
                },
                at,
            )));
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self
                .peek()
                .map(|b| b.is_ascii_alphanumeric())
                .unwrap_or(false)
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.text[start..self.pos])
                .expect("ascii slice")
                .to_string();
            return Ok(Some((Token::Ident(name), at)));
        }
        Err(Error::Parse {
            position: at,
            message: format!("unexpected character `{}`", c as char),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn read_digits(&mut self) -> BigInt {
        let start = self.pos;
        while self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .expect("ascii digits")
            .parse()
            .expect("digit run parses as integer")
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    index: usize,
    end: usize,
    coords: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.index)
            .map(|&(_, at)| at)
            .unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.index).map(|(t, _)| t.clone());
        if tok.is_some() {
            self.index += 1;
        }
        tok
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        let at = self.position();
        match self.advance() {
            Some(tok) if tok == want => Ok(()),
            Some(_) | None => Err(Error::Parse {
                position: at,
                message: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<LambdaElement> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.advance();
                    acc = acc.add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.advance();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LambdaElement> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.advance();
            acc = acc.multiply(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LambdaElement> {
        if self.peek() == Some(&Token::Minus) {
            self.advance();
            return Ok(self.factor()?.neg());
        }
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.advance();
            let at = self.position();
            match self.advance() {
                Some(Token::Number {
                    value,
                    imaginary: false,
                }) if value.is_integer() && !value.numer().sign().eq(&num::bigint::Sign::Minus) => {
                    let exp: u32 = value.numer().try_into().map_err(|_| Error::Parse {
                        position: at,
                        message: "exponent too large".into(),
                    })?;
                    return base.pow(exp);
                }
                _ => {
                    return Err(Error::Parse {
                        position: at,
                        message: "expected a nonnegative integer exponent".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<LambdaElement> {
        let at = self.position();
        match self.advance() {
            Some(Token::Number { value, imaginary }) => {
                let c = if imaginary {
                    Scalar::new(BigRational::zero(), value)
                } else {
                    Scalar::new(value, BigRational::zero())
                };
                Ok(LambdaElement::from_scalar(self.coords, c))
            }
            Some(Token::Ident(name)) => self.resolve_symbol(&name, at),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::LBracket) => {
                let left = self.expr()?;
                self.expect(Token::Comma, "`,` inside commutator")?;
                let right = self.expr()?;
                self.expect(Token::RBracket, "`]`")?;
                left.commutator(&right)
            }
            Some(Token::LBrace) => {
                let left = self.expr()?;
                self.expect(Token::Comma, "`,` inside bracket")?;
                let right = self.expr()?;
                self.expect(Token::RBrace, "`}`")?;
                left.lie_bracket(&right)
            }
            Some(_) => Err(Error::Parse {
                position: at,
                message: "expected a number, symbol or bracketed expression".into(),
            }),
            None => Err(Error::Parse {
                position: at,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn resolve_symbol(&self, name: &str, at: usize) -> Result<LambdaElement> {
        if name == "Z" {
            return Ok(LambdaElement::central(self.coords));
        }
        if name == "i" {
            return Ok(LambdaElement::from_scalar(self.coords, scalar_i()));
        }
        let (kind, digits) = match name.split_at(1) {
            (k @ ("q" | "p"), rest) if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) => {
                (k, rest)
            }
            _ => {
                return Err(Error::UnknownSymbol {
                    position: at,
                    name: name.to_string(),
                })
            }
        };
        let index: usize = digits.parse().map_err(|_| Error::UnknownSymbol {
            position: at,
            name: name.to_string(),
        })?;
        if index == 0 || index > self.coords {
            return Err(Error::IndexOutOfRange {
                position: at,
                symbol: name.to_string(),
                coords: self.coords,
            });
        }
        match kind {
            "q" => LambdaElement::coordinate(self.coords, index),
            _ => LambdaElement::momentum(self.coords, index),
        }
    }
}

/// Parses an expression over `coords` coordinate pairs into normal form.
pub fn parse(text: &str, coords: usize) -> Result<LambdaElement> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        end: text.len(),
        coords,
    };
    let element = parser.expr()?;
    if parser.index < parser.tokens.len() {
        return Err(Error::Parse {
            position: parser.position(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(element)
}
