//! Config values: decimals, fractions and small expressions such as
//! `0.2/(2*pi)` or `1/sqrt(32)`.
//!
//! Values built only from decimals, fractions and `+ - * /` stay exact; `pi`
//! and irrational square roots drop to floating point.

use std::fmt;

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value {
    pub exact: Option<Rational>,
    pub float: f64,
}

impl Value {
    fn exact(r: Rational) -> Self {
        Self { exact: Some(r), float: *r.numer() as f64 / *r.denom() as f64 }
    }

    fn inexact(x: f64) -> Self {
        Self { exact: None, float: x }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError(msg.into()))
}

/// Decimal literal (optionally with exponent) as an exact fraction.
pub fn parse_decimal(s: &str) -> Result<Rational, ExprError> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| ExprError(format!("bad exponent in '{s}'")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return err(format!("'{s}' is not a number"));
    }
    let digits = format!("{int}{frac}");
    let overflow = || ExprError(format!("'{s}' has too many digits for exact arithmetic"));
    let numer: i64 = digits
        .trim_start_matches('0')
        .parse()
        .or_else(|e: std::num::ParseIntError| if digits.trim_start_matches('0').is_empty() { Ok(0) } else { Err(e) })
        .map_err(|_| overflow())?;
    let scale = exponent - frac.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs()).ok_or_else(overflow)?;
    if scale >= 0 {
        Ok(Rational::from_integer(numer.checked_mul(pow).ok_or_else(overflow)?))
    } else {
        Ok(Rational::new(numer, pow))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent, but not the start of an identifier
            if i + 1 < chars.len()
                && (chars[i] == 'e' || chars[i] == 'E')
                && (chars[i + 1].is_ascii_digit()
                    || ((chars[i + 1] == '-' || chars[i + 1] == '+')
                        && i + 2 < chars.len()
                        && chars[i + 2].is_ascii_digit()))
            {
                i += 2;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Token::Num(parse_decimal(&lit)?));
        } else if c.is_ascii_alphabetic() || c == 'π' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == 'π') {
                i += 1;
            }
            let id: String = chars[start..i].iter().collect();
            out.push(Token::Ident(if id == "π" { "pi".into() } else { id }));
        } else if "+-*/()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return err(format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn combine(a: Value, b: Value, op: char) -> Result<Value, ExprError> {
    if op == '/' && b.float == 0.0 {
        return err("division by zero");
    }
    let exact = match (a.exact, b.exact) {
        (Some(x), Some(y)) => match op {
            '+' => x.numer().checked_mul(*y.denom()).and(y.numer().checked_mul(*x.denom())).map(|_| x + y),
            '-' => x.numer().checked_mul(*y.denom()).and(y.numer().checked_mul(*x.denom())).map(|_| x - y),
            '*' => x.numer().checked_mul(*y.numer()).and(x.denom().checked_mul(*y.denom())).map(|_| x * y),
            _ => x.numer().checked_mul(*y.denom()).and(x.denom().checked_mul(*y.numer())).map(|_| x / y),
        },
        _ => None,
    };
    Ok(match exact {
        Some(r) => Value::exact(r),
        None => Value::inexact(match op {
            '+' => a.float + b.float,
            '-' => a.float - b.float,
            '*' => a.float * b.float,
            _ => a.float / b.float,
        }),
    })
}

fn exact_sqrt(r: Rational) -> Option<Rational> {
    let root = |n: i64| {
        let s = (n as f64).sqrt().round() as i64;
        (s * s == n).then_some(s)
    };
    if *r.numer() < 0 {
        return None;
    }
    Some(Rational::new(root(*r.numer())?, root(*r.denom())?))
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Value, ExprError> {
        let mut v = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            v = combine(v, self.term()?, op)?;
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Value, ExprError> {
        let mut v = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            v = combine(v, self.unary()?, op)?;
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<Value, ExprError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                combine(Value::exact(Rational::from_integer(0)), self.unary()?, '-')
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.juxtaposed(),
        }
    }

    /// `2pi`, `3sqrt(2)`: juxtaposition binds tighter than `/`, so `1/2pi` is `1/(2pi)`.
    fn juxtaposed(&mut self) -> Result<Value, ExprError> {
        let mut v = self.atom()?;
        while matches!(self.peek(), Some(Token::Ident(_)) | Some(Token::Op('('))) {
            v = combine(v, self.atom()?, '*')?;
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Value, ExprError> {
        match self.next() {
            Some(Token::Num(r)) => Ok(Value::exact(r)),
            Some(Token::Op('(')) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::Op(')')) => Ok(v),
                    _ => err("missing ')'"),
                }
            }
            Some(Token::Ident(id)) if id == "pi" => Ok(Value::inexact(std::f64::consts::PI)),
            Some(Token::Ident(id)) if id == "sqrt" => {
                if self.next() != Some(Token::Op('(')) {
                    return err("sqrt needs parentheses");
                }
                let v = self.expr()?;
                if self.next() != Some(Token::Op(')')) {
                    return err("missing ')'");
                }
                if v.float < 0.0 {
                    return err("square root of a negative number");
                }
                Ok(match v.exact.and_then(exact_sqrt) {
                    Some(r) => Value::exact(r),
                    None => Value::inexact(v.float.sqrt()),
                })
            }
            Some(Token::Ident(id)) => err(format!("unknown name '{id}'")),
            Some(Token::Op(c)) => err(format!("unexpected '{c}'")),
            None => err("unexpected end of value"),
        }
    }
}

pub fn parse_value(s: &str) -> Result<Value, ExprError> {
    let tokens = tokenize(s)?;
    if tokens.is_empty() {
        return err("empty value");
    }
    let mut p = Parser { tokens, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return err(format!("trailing input in '{s}'"));
    }
    if !v.float.is_finite() {
        return err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Option<Rational> {
        Some(Rational::new(n, d))
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_value("0.18").unwrap().exact, r(18, 100));
        assert_eq!(parse_value("65/64").unwrap().exact, r(65, 64));
        assert_eq!(parse_value("1e-3").unwrap().exact, r(1, 1000));
        assert_eq!(parse_value("2.5E2").unwrap().exact, r(250, 1));
        assert_eq!(parse_value("-1/16").unwrap().exact, r(-1, 16));
        assert_eq!(parse_value("9/9 + 1/64 - 65/64").unwrap().exact, r(0, 1));
        assert_eq!(parse_value("sqrt(1/4)").unwrap().exact, r(1, 2));
    }

    #[test]
    fn irrational_values_fall_back_to_float() {
        let v = parse_value("0.2/(2*pi)").unwrap();
        assert!(v.exact.is_none());
        assert!((v.float - 0.2 / (2.0 * std::f64::consts::PI)).abs() < 1e-17);
        let q = parse_value("1/sqrt(32)").unwrap();
        assert!(q.exact.is_none() && (q.float - 32f64.sqrt().recip()).abs() < 1e-16);
        assert!((parse_value("0.4/2π").unwrap().float - 0.4 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
        assert_eq!(parse_value("3(1/3)").unwrap().exact, Some(Rational::from_integer(1)));
    }

    #[test]
    fn malformed_values_are_rejected() {
        for bad in ["", "abc", "1/0", "1..2", "(1", "1 2", "sqrt(-1)", "1/", "99999999999999999999"] {
            assert!(parse_value(bad).is_err(), "{bad}");
        }
    }
}
