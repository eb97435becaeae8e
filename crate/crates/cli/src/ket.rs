//! Ket expressions such as `1/sqrt(2)(|01> - |10>)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := coeff? '*'? (ket | '(' expr ')')
//! coeff  := factor ('*'? factor)*
//! factor := number ('/' (number | sqrt))? | sqrt | '(' re (',' im)? ')' | 'i'
//! sqrt   := 'sqrt(' number ')'
//! ket    := '|' digit digit '>'
//! ```
//!
//! Whitespace is ignored. A parenthesized group is a sub-expression when it
//! contains a ket and a complex coefficient otherwise.

use macdfs::schmidt::PureState;
use macdfs::C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KetError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("digit {digit} at position {pos} is out of range for d = {d}")]
    DigitOutOfRange { pos: usize, digit: usize, d: usize },
    #[error("ket expression sums to the zero vector")]
    EmptySum,
    #[error("ket labels need d between 1 and 9, got {0}")]
    Dimension(usize),
}

/// A parsed expression: amplitudes over `|kl>` and whether they are normalized.
#[derive(Debug, Clone)]
pub struct ParsedKet {
    pub state: PureState,
    pub norm: f64,
    pub normalized: bool,
}

pub fn parse_ket(text: &str, d: usize) -> Result<ParsedKet, KetError> {
    if d == 0 || d > 9 {
        return Err(KetError::Dimension(d));
    }
    let chars: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(KetError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        chars,
        at: 0,
        d,
        end: text.len(),
    };
    let amps = p.expr()?;
    if p.at < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(KetError::EmptySum);
    }
    let state = PureState::new(d, d, amps).expect("amplitude vector has length d²");
    Ok(ParsedKet {
        state,
        norm,
        normalized: (norm - 1.0).abs() < 1e-12,
    })
}

/// Prints every nonzero amplitude with round-trip precision.
pub fn format_ket(state: &PureState) -> String {
    let (_, d2) = state.dims();
    let mut terms = Vec::new();
    for (idx, z) in state.amps().iter().enumerate() {
        if *z == C64::new(0.0, 0.0) {
            continue;
        }
        let coeff = if z.im == 0.0 {
            format!("{:?}", z.re)
        } else {
            format!("({:?},{:?})", z.re, z.im)
        };
        terms.push(format!("{coeff}|{}{}>", idx / d2, idx % d2));
    }
    if terms.is_empty() {
        return "0|00>".into();
    }
    terms.join(" + ")
}

struct Parser {
    chars: Vec<(usize, char)>,
    at: usize,
    d: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.end, |&(p, _)| p)
    }

    fn error(&self, msg: &str) -> KetError {
        KetError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), KetError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Vec<C64>, KetError> {
        let mut sign = 1.0;
        if self.eat('-') {
            sign = -1.0;
        } else {
            self.eat('+');
        }
        let mut acc = vec![C64::new(0.0, 0.0); self.d * self.d];
        loop {
            let t = self.term()?;
            for (a, x) in acc.iter_mut().zip(t) {
                *a += x * sign;
            }
            match self.peek() {
                Some('+') => sign = 1.0,
                Some('-') => sign = -1.0,
                _ => return Ok(acc),
            }
            self.at += 1;
        }
    }

    fn term(&mut self) -> Result<Vec<C64>, KetError> {
        let mut coeff = C64::new(1.0, 0.0);
        loop {
            match self.peek() {
                Some('|') => {
                    let (k, l) = self.ket()?;
                    let mut v = vec![C64::new(0.0, 0.0); self.d * self.d];
                    v[k * self.d + l] = coeff;
                    return Ok(v);
                }
                Some('(') if self.group_is_expr() => {
                    self.at += 1;
                    let inner = self.expr()?;
                    self.expect(')')?;
                    return Ok(inner.into_iter().map(|z| z * coeff).collect());
                }
                Some('*') => self.at += 1,
                Some(_) => coeff *= self.factor()?,
                None => return Err(self.error("expected a ket")),
            }
        }
    }

    /// Whether the group opening here contains a ket before it closes.
    fn group_is_expr(&self) -> bool {
        let mut depth = 0usize;
        for &(_, c) in &self.chars[self.at..] {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                '|' => return true,
                _ => {}
            }
        }
        false
    }

    fn factor(&mut self) -> Result<C64, KetError> {
        match self.peek() {
            Some('(') => {
                self.at += 1;
                let re = self.signed_number()?;
                let im = if self.eat(',') { self.signed_number()? } else { 0.0 };
                self.expect(')')?;
                Ok(C64::new(re, im))
            }
            Some('i') => {
                self.at += 1;
                Ok(C64::new(0.0, 1.0))
            }
            Some('s') => Ok(C64::new(self.sqrt()?, 0.0)),
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let num = self.number()?;
                if !self.eat('/') {
                    return Ok(C64::new(num, 0.0));
                }
                let den = if self.peek() == Some('s') {
                    self.sqrt()?
                } else {
                    self.number()?
                };
                if den == 0.0 {
                    return Err(self.error("division by zero"));
                }
                Ok(C64::new(num / den, 0.0))
            }
            _ => Err(self.error("expected a coefficient or a ket")),
        }
    }

    fn sqrt(&mut self) -> Result<f64, KetError> {
        for c in "sqrt(".chars() {
            self.expect(c)?;
        }
        let x = self.number()?;
        self.expect(')')?;
        Ok(x.sqrt())
    }

    fn signed_number(&mut self) -> Result<f64, KetError> {
        let s = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        Ok(s * self.number()?)
    }

    fn number(&mut self) -> Result<f64, KetError> {
        let start = self.at;
        let mut s = String::new();
        while let Some(c) = self.peek() {
            let exponent_sign = (c == '-' || c == '+') && s.ends_with(['e', 'E']);
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exponent_sign {
                s.push(c);
                self.at += 1;
            } else {
                break;
            }
        }
        s.parse::<f64>().map_err(|_| {
            self.at = start;
            self.error("malformed number")
        })
    }

    fn ket(&mut self) -> Result<(usize, usize), KetError> {
        self.expect('|')?;
        let mut digits = Vec::new();
        while let Some(c) = self.peek() {
            let Some(v) = c.to_digit(10) else { break };
            if v as usize >= self.d {
                return Err(KetError::DigitOutOfRange {
                    pos: self.pos(),
                    digit: v as usize,
                    d: self.d,
                });
            }
            digits.push(v as usize);
            self.at += 1;
        }
        if digits.len() != 2 {
            return Err(self.error("a ket needs exactly two digits"));
        }
        self.expect('>')?;
        Ok((digits[0], digits[1]))
    }
}
