//! Symbolic values of Tamagawa computations: integer polynomials in edge
//! length variables, hcf(·,2) factors, and parity case tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::forest::{CoreError, LengthForm, Parity};

/// Monomial: variable name -> exponent (no zero exponents stored).
pub type Monomial = BTreeMap<String, u32>;

/// Multivariate polynomial with rational coefficients. Results of the
/// Tamagawa formulas are asserted integral before leaving this module's
/// callers.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(BigRational::from(BigInt::from(c)))
    }

    pub fn one() -> Self {
        Poly::from_int(1)
    }

    pub fn var(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        let mut p = Poly::zero();
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self == &Poly::one()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let e = out.terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                let e = out.terms.entry(m.clone()).or_insert_with(BigRational::zero);
                *e += c1 * c2;
                if e.is_zero() {
                    out.terms.remove(&m);
                }
            }
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn eval(&self, values: &BTreeMap<String, u64>) -> Result<BigRational, CoreError> {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                let val = values
                    .get(v)
                    .ok_or_else(|| CoreError::Invalid(format!("missing value for {v}")))?;
                t *= BigRational::from(BigInt::from(*val)).pow(*e as i32);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.keys().cloned()).collect()
    }
}

fn fmt_coeff(c: &BigRational) -> String {
    if c.is_integer() {
        c.to_integer().to_string()
    } else {
        c.to_string()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_empty() {
                parts.push(fmt_coeff(&abs));
            }
            for (v, e) in m {
                if *e == 1 {
                    parts.push(v.clone());
                } else {
                    parts.push(format!("{v}^{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Linear form with rational coefficients, used for quotient edge lengths.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatForm {
    pub constant: BigRational,
    pub terms: BTreeMap<String, BigRational>,
}

impl RatForm {
    pub fn from_length(l: &LengthForm) -> RatForm {
        RatForm {
            constant: BigRational::from(BigInt::from(l.constant)),
            terms: l
                .terms
                .iter()
                .map(|(v, (c, _))| (v.clone(), BigRational::from(BigInt::from(*c))))
                .collect(),
        }
    }

    pub fn div(&self, q: u64) -> RatForm {
        let d = BigRational::from(BigInt::from(q));
        RatForm {
            constant: &self.constant / &d,
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c / &d)).collect(),
        }
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::constant(self.constant.clone());
        for (v, c) in &self.terms {
            p = p.add(&Poly::var(v).scale(c));
        }
        p
    }
}

/// A product c·(polynomial)·∏ hcf(Lᵢ, 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub poly: Poly,
    pub hcf2: Vec<LengthForm>,
}

impl ClosedForm {
    pub fn one() -> Self {
        ClosedForm { poly: Poly::one(), hcf2: Vec::new() }
    }

    pub fn from_poly(p: Poly) -> Self {
        ClosedForm { poly: p, hcf2: Vec::new() }
    }

    pub fn from_int(c: i64) -> Self {
        ClosedForm::from_poly(Poly::from_int(c))
    }

    pub fn mul(&self, other: &ClosedForm) -> ClosedForm {
        let mut hcf2 = self.hcf2.clone();
        hcf2.extend(other.hcf2.iter().cloned());
        hcf2.sort_by_key(|l| l.to_string());
        ClosedForm { poly: self.poly.mul(&other.poly), hcf2 }
    }

    pub fn eval(&self, values: &BTreeMap<String, u64>) -> Result<BigInt, CoreError> {
        let mut v = self.poly.eval(values)?;
        for l in &self.hcf2 {
            let x = l.eval(values)?;
            let h = if x % 2 == 0 { 2 } else { 1 };
            v *= BigRational::from(BigInt::from(h));
        }
        if !v.is_integer() {
            return Err(CoreError::Invalid(format!("non-integral value {v}")));
        }
        Ok(v.to_integer())
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut vs = self.poly.variables();
        for l in &self.hcf2 {
            vs.extend(l.variables());
        }
        vs
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.poly.is_one() || self.hcf2.is_empty() {
            if self.poly.terms.len() > 1 && !self.hcf2.is_empty() {
                parts.push(format!("({})", self.poly));
            } else {
                parts.push(self.poly.to_string());
            }
        }
        for l in &self.hcf2 {
            parts.push(format!("hcf({l},2)"));
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Parity assumptions on named variables (values are Even or Odd only).
pub type ParityAssign = BTreeMap<String, Parity>;

/// Result of a symbolic Tamagawa computation: a closed form, or a table of
/// closed forms indexed by parity assumptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TamExpr {
    Closed(ClosedForm),
    Cases(Vec<(ParityAssign, ClosedForm)>),
}

/// Maximum number of parity cases before giving up.
pub const MAX_CASES: usize = 256;

impl TamExpr {
    pub fn one() -> Self {
        TamExpr::Closed(ClosedForm::one())
    }

    pub fn from_int(c: i64) -> Self {
        TamExpr::Closed(ClosedForm::from_int(c))
    }

    pub fn cases(&self) -> Vec<(ParityAssign, ClosedForm)> {
        match self {
            TamExpr::Closed(c) => vec![(ParityAssign::new(), c.clone())],
            TamExpr::Cases(cs) => cs.clone(),
        }
    }

    pub fn mul(&self, other: &TamExpr) -> Result<TamExpr, CoreError> {
        let mut out: Vec<(ParityAssign, ClosedForm)> = Vec::new();
        'outer: for (a1, c1) in self.cases() {
            for (a2, c2) in other.cases() {
                let mut a = a1.clone();
                let mut compatible = true;
                for (v, p) in &a2 {
                    match a.get(v) {
                        Some(q) if q != p => {
                            compatible = false;
                            break;
                        }
                        _ => {
                            a.insert(v.clone(), *p);
                        }
                    }
                }
                if compatible {
                    out.push((a, c1.mul(&c2)));
                }
                if out.len() > MAX_CASES {
                    break 'outer;
                }
            }
        }
        if out.len() > MAX_CASES {
            return Err(CoreError::Invalid(
                "parity case table exceeds the cap; declare parities of more variables".into(),
            ));
        }
        Ok(TamExpr::from_cases(out))
    }

    pub fn from_cases(cases: Vec<(ParityAssign, ClosedForm)>) -> TamExpr {
        let mut cases = cases;
        recombine(&mut cases);
        if cases.len() == 1 && cases[0].0.is_empty() {
            TamExpr::Closed(cases.remove(0).1)
        } else {
            TamExpr::Cases(cases)
        }
    }

    /// Evaluate at a concrete point; the point's parities select the case.
    pub fn eval(&self, values: &BTreeMap<String, u64>) -> Result<BigInt, CoreError> {
        match self {
            TamExpr::Closed(c) => c.eval(values),
            TamExpr::Cases(cs) => {
                for (assign, c) in cs {
                    let matches = assign.iter().all(|(v, p)| match values.get(v) {
                        Some(x) => {
                            let actual = if x % 2 == 0 { Parity::Even } else { Parity::Odd };
                            actual == *p
                        }
                        None => false,
                    });
                    if matches {
                        return c.eval(values);
                    }
                }
                Err(CoreError::Invalid(
                    "no parity case matches the evaluation point".into(),
                ))
            }
        }
    }

    pub fn as_closed(&self) -> Option<&ClosedForm> {
        match self {
            TamExpr::Closed(c) => Some(c),
            TamExpr::Cases(_) => None,
        }
    }
}

/// Merge parity cases: drop a split on v when both branches agree, and fold
/// a factor-2 even/odd split on v into hcf(v,2).
fn recombine(cases: &mut Vec<(ParityAssign, ClosedForm)>) {
    loop {
        let vars: BTreeSet<String> =
            cases.iter().flat_map(|(a, _)| a.keys().cloned()).collect();
        let mut changed = false;
        'vars: for v in &vars {
            // group indices by the assignment with v removed
            let mut groups: BTreeMap<Vec<(String, Parity)>, Vec<usize>> = BTreeMap::new();
            for (i, (a, _)) in cases.iter().enumerate() {
                if !a.contains_key(v) {
                    continue;
                }
                let key: Vec<(String, Parity)> = a
                    .iter()
                    .filter(|(k, _)| *k != v)
                    .map(|(k, p)| (k.clone(), *p))
                    .collect();
                groups.entry(key).or_default().push(i);
            }
            for idxs in groups.values() {
                if idxs.len() != 2 {
                    continue;
                }
                let (i, j) = (idxs[0], idxs[1]);
                let (pi, pj) = (cases[i].0[v], cases[j].0[v]);
                if pi == pj {
                    continue;
                }
                let (even, odd) = if pi == Parity::Even { (i, j) } else { (j, i) };
                let merged = if cases[even].1 == cases[odd].1 {
                    Some(cases[odd].1.clone())
                } else if cases[even].1.hcf2 == cases[odd].1.hcf2
                    && cases[even].1.poly
                        == cases[odd].1.poly.scale(&BigRational::from(BigInt::from(2)))
                {
                    let mut c = cases[odd].1.clone();
                    c.hcf2.push(LengthForm::variable(v, Parity::Unknown));
                    c.hcf2.sort_by_key(|l| l.to_string());
                    Some(c)
                } else {
                    None
                };
                if let Some(c) = merged {
                    let mut assign = cases[i].0.clone();
                    assign.remove(v);
                    let (lo, hi) = (i.min(j), i.max(j));
                    cases.remove(hi);
                    cases.remove(lo);
                    cases.push((assign, c));
                    changed = true;
                    break 'vars;
                }
            }
        }
        if !changed {
            break;
        }
    }
    cases.sort_by(|(a, _), (b, _)| a.cmp(b));
}

impl fmt::Display for TamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TamExpr::Closed(c) => write!(f, "{c}"),
            TamExpr::Cases(cs) => {
                for (i, (a, c)) in cs.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    let conds: Vec<String> = a
                        .iter()
                        .map(|(v, p)| {
                            format!("{v} {}", if *p == Parity::Even { "even" } else { "odd" })
                        })
                        .collect();
                    write!(f, "[{}] {c}", conds.join(", "))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_arith_and_display() {
        let a = Poly::var("a");
        let b = Poly::var("b");
        let c = Poly::var("c");
        // a(b+c) + 2bc
        let p = a.mul(&b.add(&c)).add(&b.mul(&c).scale(&BigRational::from(BigInt::from(2))));
        assert_eq!(p.to_string(), "a*b + a*c + 2*b*c");
        let vals: BTreeMap<String, u64> =
            [("a".into(), 1), ("b".into(), 2), ("c".into(), 3)].into();
        assert_eq!(p.eval(&vals).unwrap(), BigRational::from(BigInt::from(17)));
    }

    #[test]
    fn recombine_hcf2() {
        let y = Poly::var("y");
        let cases = vec![
            (
                [("z".to_string(), Parity::Even)].into(),
                ClosedForm::from_poly(y.scale(&BigRational::from(BigInt::from(2)))),
            ),
            (
                [("z".to_string(), Parity::Odd)].into(),
                ClosedForm::from_poly(y.clone()),
            ),
        ];
        let e = TamExpr::from_cases(cases);
        assert_eq!(e.to_string(), "y*hcf(z,2)");
        let vals: BTreeMap<String, u64> = [("y".into(), 3), ("z".into(), 4)].into();
        assert_eq!(e.eval(&vals).unwrap(), BigInt::from(6));
    }

    #[test]
    fn recombine_equal_branches() {
        let cases = vec![
            ([("x".to_string(), Parity::Even)].into(), ClosedForm::from_int(5)),
            ([("x".to_string(), Parity::Odd)].into(), ClosedForm::from_int(5)),
        ];
        let e = TamExpr::from_cases(cases);
        assert_eq!(e, TamExpr::Closed(ClosedForm::from_int(5)));
    }
}
