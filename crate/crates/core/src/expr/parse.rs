//! Two surface syntaxes for scalar fields.
//!
//! Prefix (used by chart description files, and by `Display`):
//!
//! ```text
//! expr  := number | "x" | "y" | "pi" | "e" | "(" op expr* ")"
//! op    := "+" | "*"            (n-ary, n >= 1)
//!        | "-"                  (unary negation or binary difference)
//!        | "/" | "^"            (binary; the exponent must fold to a constant)
//!        | func                 (unary)
//!        | "step"               (unary, C^∞ smooth step)
//!        | "bump" expr int      (exp(-1/t) t^-k for t > 0, else 0)
//!        | "wrap" expr number   (reduction modulo a period)
//! func  := sin cos sinh cosh exp log asin sqrt abs cbrt floor sign
//! ```
//!
//! Infix (convenience for command-line flags): the usual precedence, `^`
//! right associative, implicit multiplication by juxtaposition (`2 pi x`),
//! calls `f(expr)`, and function powers such as `sin^2(pi x)`.

use super::{Func, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Op(char),
    Num(f64),
    Ident(String),
}

fn lex(src: &str, prefix: bool) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((start, Tok::Comma));
                i += 1;
            }
            '+' | '*' | '/' | '^' => {
                out.push((start, Tok::Op(c)));
                i += 1;
            }
            '-' => {
                // in prefix mode a leading minus glued to a digit is a literal
                let next_digit = bytes
                    .get(i + 1)
                    .is_some_and(|b| b.is_ascii_digit() || *b == b'.');
                if prefix && next_digit {
                    let (n, len) = lex_number(&src[i + 1..], start)?;
                    out.push((start, Tok::Num(-n)));
                    i += 1 + len;
                } else {
                    out.push((start, Tok::Op('-')));
                    i += 1;
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let (n, len) = lex_number(&src[i..], start)?;
                out.push((start, Tok::Num(n)));
                i += len;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => return Err(Error::parse(start, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn lex_number(s: &str, offset: usize) -> Result<(f64, usize)> {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    // exponent only if followed by a digit (so `2e` stays 2 * e)
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    s[..i]
        .parse::<f64>()
        .map(|n| (n, i))
        .map_err(|_| Error::parse(offset, format!("bad number `{}`", &s[..i])))
}

fn atom(name: &str, offset: usize) -> Result<ScalarField> {
    Ok(match name {
        "x" => ScalarField::x(),
        "y" => ScalarField::y(),
        "pi" => ScalarField::constant(std::f64::consts::PI),
        "e" => ScalarField::constant(std::f64::consts::E),
        "inf" => ScalarField::constant(f64::INFINITY),
        _ => return Err(Error::parse(offset, format!("unknown symbol `{name}`"))),
    })
}

fn power(base: &ScalarField, exponent: &ScalarField) -> ScalarField {
    match exponent.as_constant() {
        Some(p) => base.powf(p),
        None => (exponent * &base.ln()).exp(),
    }
}

/// Parses the prefix (s-expression) syntax.
pub fn parse_prefix(src: &str) -> Result<ScalarField> {
    let toks = lex(src, true)?;
    let mut pos = 0;
    let f = prefix_expr(&toks, &mut pos, src.len())?;
    if pos != toks.len() {
        return Err(Error::parse(toks[pos].0, "trailing input"));
    }
    Ok(f)
}

fn prefix_expr(toks: &[(usize, Tok)], pos: &mut usize, end: usize) -> Result<ScalarField> {
    let Some((off, tok)) = toks.get(*pos) else {
        return Err(Error::parse(end, "unexpected end of input"));
    };
    let off = *off;
    *pos += 1;
    match tok {
        Tok::Num(n) => Ok(ScalarField::constant(*n)),
        Tok::Ident(name) => atom(name, off),
        Tok::LParen => {
            let Some((hoff, head)) = toks.get(*pos) else {
                return Err(Error::parse(end, "unexpected end of input"));
            };
            let hoff = *hoff;
            *pos += 1;
            let mut args = Vec::new();
            while !matches!(toks.get(*pos), Some((_, Tok::RParen))) {
                if *pos >= toks.len() {
                    return Err(Error::parse(end, "missing `)`"));
                }
                args.push(prefix_expr(toks, pos, end)?);
            }
            *pos += 1;
            let arity = |n: usize| -> Result<()> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(Error::parse(hoff, format!("expected {n} argument(s), found {}", args.len())))
                }
            };
            match head {
                Tok::Op('+') if !args.is_empty() => Ok(args.iter().skip(1).fold(args[0].clone(), |a, b| a + b)),
                Tok::Op('*') if !args.is_empty() => Ok(args.iter().skip(1).fold(args[0].clone(), |a, b| a * b)),
                Tok::Op('-') if args.len() == 1 => Ok(-&args[0]),
                Tok::Op('-') => {
                    arity(2)?;
                    Ok(&args[0] - &args[1])
                }
                Tok::Op('/') => {
                    arity(2)?;
                    Ok(&args[0] / &args[1])
                }
                Tok::Op('^') => {
                    arity(2)?;
                    Ok(power(&args[0], &args[1]))
                }
                Tok::Ident(name) => match name.as_str() {
                    "step" => {
                        arity(1)?;
                        Ok(args[0].smooth_step())
                    }
                    "bump" => {
                        arity(2)?;
                        let k = args[1]
                            .as_constant()
                            .filter(|k| k.fract() == 0.0)
                            .ok_or_else(|| Error::parse(hoff, "bump order must be an integer literal"))?;
                        Ok(args[0].bump(k as i32))
                    }
                    "wrap" => {
                        arity(2)?;
                        let p = args[1]
                            .as_constant()
                            .filter(|p| *p > 0.0)
                            .ok_or_else(|| Error::parse(hoff, "wrap period must be a positive constant"))?;
                        Ok(args[0].wrap(p))
                    }
                    _ => {
                        let func = Func::from_name(name)
                            .ok_or_else(|| Error::parse(hoff, format!("unknown function `{name}`")))?;
                        arity(1)?;
                        Ok(args[0].apply(func))
                    }
                },
                _ => Err(Error::parse(hoff, "expected an operator after `(`")),
            }
        }
        _ => Err(Error::parse(off, "unexpected token")),
    }
}

/// Parses the infix syntax.
pub fn parse_infix(src: &str) -> Result<ScalarField> {
    let toks = lex(src, false)?;
    let mut p = Infix {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let f = p.sum()?;
    if p.pos != toks.len() {
        return Err(Error::parse(toks[p.pos].0, "trailing input"));
    }
    Ok(f)
}

struct Infix<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl Infix<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.offset(), format!("expected {t:?}")))
        }
    }

    fn sum(&mut self) -> Result<ScalarField> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Op('+')) => {
                    self.pos += 1;
                    acc = acc + self.product()?;
                }
                Some(Tok::Op('-')) => {
                    self.pos += 1;
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<ScalarField> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    acc = acc / self.unary()?;
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = acc * self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarField> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarField> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(power(&base, &exp));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<ScalarField>> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.sum()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.sum()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<ScalarField> {
        let off = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(ScalarField::constant(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let special = matches!(name.as_str(), "step" | "bump" | "wrap");
                let func = Func::from_name(&name);
                if func.is_none() && !special {
                    return atom(&name, off);
                }
                // `sin^2(u)` means (sin u)^2
                let mut outer_power = None;
                if self.peek() == Some(&Tok::Op('^')) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Num(n)) => {
                            self.pos += 1;
                            outer_power = Some(n);
                        }
                        _ => return Err(Error::parse(self.offset(), "expected a number after `^`")),
                    }
                }
                let args = self.args()?;
                let need = if name == "bump" || name == "wrap" { 2 } else { 1 };
                if args.len() != need {
                    return Err(Error::parse(off, format!("`{name}` takes {need} argument(s)")));
                }
                let value = match name.as_str() {
                    "step" => args[0].smooth_step(),
                    "bump" => {
                        let k = args[1]
                            .as_constant()
                            .filter(|k| k.fract() == 0.0)
                            .ok_or_else(|| Error::parse(off, "bump order must be an integer"))?;
                        args[0].bump(k as i32)
                    }
                    "wrap" => {
                        let p = args[1]
                            .as_constant()
                            .filter(|p| *p > 0.0)
                            .ok_or_else(|| Error::parse(off, "wrap period must be a positive constant"))?;
                        args[0].wrap(p)
                    }
                    _ => args[0].apply(func.expect("checked above")),
                };
                Ok(match outer_power {
                    Some(n) => value.powf(n),
                    None => value,
                })
            }
            _ => Err(Error::parse(off, "expected an expression")),
        }
    }
}
