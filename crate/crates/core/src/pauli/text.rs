//! The Pauli-sum listing format:
//!
//! ```text
//! (-0.4640485702054111+0j) [] +
//! (0.07335+0j) [Z0 Z1] +
//! (-0.0332912087832737+0j) [X0 Z1 Z2 Z3 X4]
//! ```
//!
//! Terms are separated by `" +"` and a line break (`\n` or `\r\n`).

use num_complex::Complex64;

use super::operator::QubitOperator;
use super::string::{Axis, PauliString};
use crate::error::{Error, Result};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn skip_inline_space(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.bump();
        }
    }

    fn skip_space(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.error(format!(
                "expected `{}`, found `{}`",
                c as char, got as char
            ))),
            None => Err(self.error(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        self.pos - start
    }

    /// `[sign] digits [. digits] [(e|E) [sign] digits]`
    fn real(&mut self, allow_sign: bool) -> Result<f64> {
        let start = self.pos;
        if allow_sign && matches!(self.peek(), Some(b'+' | b'-')) {
            self.bump();
        }
        let mut n = self.digits();
        if self.peek() == Some(b'.') {
            self.bump();
            n += self.digits();
        }
        if n == 0 {
            return Err(self.error("malformed coefficient: expected digits"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.bump();
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.bump();
            }
            if self.digits() == 0 {
                return Err(self.error("malformed coefficient: empty exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>()
            .map_err(|e| self.error(format!("malformed coefficient `{text}`: {e}")))
    }

    fn coefficient(&mut self) -> Result<Complex64> {
        self.expect(b'(')?;
        let re = self.real(true)?;
        let sign = match self.peek() {
            Some(b'+') => 1.0,
            Some(b'-') => -1.0,
            _ => return Err(self.error("malformed coefficient: expected sign of imaginary part")),
        };
        self.bump();
        let im = sign * self.real(false)?;
        self.expect(b'j')?;
        self.expect(b')')?;
        Ok(Complex64::new(re, im))
    }

    fn string(&mut self) -> Result<PauliString> {
        self.expect(b'[')?;
        let mut factors: Vec<(usize, Axis)> = Vec::new();
        loop {
            self.skip_inline_space();
            match self.peek() {
                Some(b']') => {
                    self.bump();
                    break;
                }
                Some(c) => {
                    let (line, col) = (self.line, self.col);
                    let axis = Axis::from_letter(c as char)
                        .ok_or_else(|| self.error(format!("unknown axis letter `{}`", c as char)))?;
                    self.bump();
                    let start = self.pos;
                    if self.digits() == 0 {
                        return Err(self.error("expected qubit index after axis letter"));
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                    let q: usize = text
                        .parse()
                        .map_err(|_| self.error(format!("qubit index `{text}` too large")))?;
                    if factors.iter().any(|&(p, _)| p == q) {
                        return Err(Error::Syntax {
                            line,
                            column: col,
                            message: format!("duplicate qubit index {q} within one term"),
                        });
                    }
                    factors.push((q, axis));
                }
                None => return Err(self.error("unterminated factor list")),
            }
        }
        PauliString::from_factors(factors)
    }
}

/// Parses a Pauli-sum listing into an operator with one term per bracket.
pub fn parse_operator(text: &str) -> Result<QubitOperator> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cur = Cursor::new(text);
    let mut terms = Vec::new();
    cur.skip_space();
    loop {
        let c = cur.coefficient()?;
        cur.skip_inline_space();
        let s = cur.string()?;
        terms.push((c, s));
        cur.skip_inline_space();
        match cur.peek() {
            Some(b'+') => {
                cur.bump();
                cur.skip_space();
                if cur.peek().is_none() {
                    return Err(cur.error("dangling `+` at end of input"));
                }
            }
            _ => {
                cur.skip_space();
                match cur.peek() {
                    None => break,
                    Some(c) => {
                        return Err(cur.error(format!(
                            "expected ` +` or end of input, found `{}`",
                            c as char
                        )))
                    }
                }
            }
        }
    }
    Ok(QubitOperator::from_terms(terms))
}

fn format_real(x: f64) -> String {
    // `Display` for f64 yields the shortest string that round-trips.
    format!("{x}")
}

fn format_coefficient(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("({}{}{}j)", format_real(c.re), sign, format_real(c.im.abs()))
}

/// Inverse of [`parse_operator`]: one term per line joined by `" +\n"`.
pub fn serialize_operator(op: &QubitOperator) -> String {
    op.terms()
        .iter()
        .map(|(c, s)| format!("{} [{}]", format_coefficient(*c), s))
        .collect::<Vec<_>>()
        .join(" +\n")
}
