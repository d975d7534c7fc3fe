//! A tiny arithmetic-formula evaluator for expected Tamagawa numbers in
//! fixture manifests: integers, variables, + - * /, hcf(..) and max(..).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("syntax error at '{0}'")]
    Syntax(String),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("formula value {0} is not a positive integer")]
    NotInteger(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Int(BigInt),
    Var(String),
    Add(Box<Formula>, Box<Formula>),
    Sub(Box<Formula>, Box<Formula>),
    Mul(Box<Formula>, Box<Formula>),
    Div(Box<Formula>, Box<Formula>),
    Hcf(Vec<Formula>),
    Max(Vec<Formula>),
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn rest(&self) -> String {
        String::from_utf8_lossy(&self.input[self.pos.min(self.input.len())..]).into_owned()
    }

    fn expr(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = Formula::Add(Box::new(acc), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    acc = Formula::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = Formula::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                b'/' => {
                    self.pos += 1;
                    acc = Formula::Div(Box::new(acc), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(FormulaError::Syntax(self.rest()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                Ok(Formula::Int(s.parse().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.input.len()
                    && (self.input[self.pos].is_ascii_alphanumeric()
                        || self.input[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name =
                    std::str::from_utf8(&self.input[start..self.pos]).unwrap().to_string();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(b',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    if self.peek() != Some(b')') {
                        return Err(FormulaError::Syntax(self.rest()));
                    }
                    self.pos += 1;
                    match name.as_str() {
                        "hcf" | "gcd" => Ok(Formula::Hcf(args)),
                        "max" => Ok(Formula::Max(args)),
                        _ => Err(FormulaError::Syntax(format!("unknown function {name}"))),
                    }
                } else {
                    Ok(Formula::Var(name))
                }
            }
            _ => Err(FormulaError::Syntax(self.rest())),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser { input: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(FormulaError::Syntax(p.rest()));
    }
    Ok(e)
}

impl Formula {
    pub fn eval_rational(
        &self,
        vars: &BTreeMap<String, u64>,
    ) -> Result<BigRational, FormulaError> {
        Ok(match self {
            Formula::Int(n) => BigRational::from_integer(n.clone()),
            Formula::Var(v) => BigRational::from_integer(BigInt::from(
                *vars.get(v).ok_or_else(|| FormulaError::UnknownVariable(v.clone()))?,
            )),
            Formula::Add(a, b) => a.eval_rational(vars)? + b.eval_rational(vars)?,
            Formula::Sub(a, b) => a.eval_rational(vars)? - b.eval_rational(vars)?,
            Formula::Mul(a, b) => a.eval_rational(vars)? * b.eval_rational(vars)?,
            Formula::Div(a, b) => a.eval_rational(vars)? / b.eval_rational(vars)?,
            Formula::Hcf(args) => {
                let mut acc: Option<BigInt> = None;
                for a in args {
                    let v = a.eval_rational(vars)?;
                    let i = rational_to_int(&v)?;
                    acc = Some(match acc {
                        None => i,
                        Some(g) => g.gcd(&i),
                    });
                }
                BigRational::from_integer(acc.unwrap_or_else(BigInt::one))
            }
            Formula::Max(args) => {
                let mut best: Option<BigRational> = None;
                for a in args {
                    let v = a.eval_rational(vars)?;
                    best = Some(match best {
                        None => v,
                        Some(b) if v > b => v,
                        Some(b) => b,
                    });
                }
                best.expect("max of at least one argument")
            }
        })
    }

    /// Evaluate to a positive integer (the shape every Tamagawa formula
    /// takes at admissible points).
    pub fn eval(&self, vars: &BTreeMap<String, u64>) -> Result<BigInt, FormulaError> {
        rational_to_int(&self.eval_rational(vars)?)
    }
}

fn rational_to_int(v: &BigRational) -> Result<BigInt, FormulaError> {
    if v.is_integer() && v.is_positive() {
        Ok(v.to_integer())
    } else {
        Err(FormulaError::NotInteger(v.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(f: &str, vars: &[(&str, u64)]) -> BigInt {
        let m = vars.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        parse(f).unwrap().eval(&m).unwrap()
    }

    #[test]
    fn arithmetic_and_functions() {
        assert_eq!(at("n*m+m*k+k*n", &[("n", 1), ("m", 2), ("k", 3)]), BigInt::from(11));
        assert_eq!(at("hcf(n,2)", &[("n", 4)]), BigInt::from(2));
        assert_eq!(at("hcf(n,2)", &[("n", 3)]), BigInt::from(1));
        assert_eq!(
            at("max(1,hcf(n,2)*hcf(m,2)*hcf(k,2)/2)", &[("n", 1), ("m", 1), ("k", 1)]),
            BigInt::from(1)
        );
        assert_eq!(
            at("max(1,hcf(n,2)*hcf(m,2)*hcf(k,2)/2)", &[("n", 2), ("m", 2), ("k", 4)]),
            BigInt::from(4)
        );
        assert_eq!(at("n+2*k", &[("n", 3), ("k", 2)]), BigInt::from(7));
        assert_eq!(at("a*(b+c)+2*b*c", &[("a", 1), ("b", 2), ("c", 3)]), BigInt::from(17));
    }

    #[test]
    fn syntax_errors() {
        assert!(parse("n +").is_err());
        assert!(parse("foo(1)").is_err());
        assert!(parse("(n").is_err());
    }
}
