use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use super::unipoly::UniPoly;
use crate::error::{usage, Result};

pub type Exponents = Vec<u32>;

/// Sparse multivariate polynomial with arbitrary-precision integer
/// coefficients. Terms are kept in lexicographic exponent order with the
/// first variable most significant; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Exponents, BigInt>,
}

impl MultiPoly {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        MultiPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    /// The polynomial consisting of variable `i` alone.
    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(e, BigInt::one());
        p
    }

    pub fn from_terms(vars: Arc<Vec<String>>, terms: impl IntoIterator<Item = (Exponents, BigInt)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent vector length must match variable count");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with exponent vector `e`.
    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Indices of variables that occur with positive exponent.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.degree_in(i) > 0).collect()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.vars.clone());
        }
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    /// Multiplies by `vars[i]^pow`.
    pub fn shift_var(&self, i: usize, pow: u32) -> Self {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[i] += pow;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), -c.clone());
        }
    }

    /// Lexicographically greatest term.
    pub fn leading_term(&self) -> Option<(&Exponents, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Integer gcd of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides out the content; the leading coefficient becomes positive.
    pub fn primitive(&self) -> Self {
        let Some((_, lc)) = self.leading_term() else {
            return self.clone();
        };
        let mut g = self.content();
        if lc.is_negative() {
            g = -g;
        }
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c / &g)).collect() }
    }

    /// Coefficients with respect to variable `i`, lowest power first. The
    /// returned polynomials keep the same variable list with exponent `i`
    /// equal to zero.
    pub fn coefficients_in(&self, i: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![Self::zero(self.vars.clone()); d + 1];
        if self.is_zero() {
            return vec![];
        }
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            let mut e2 = e.clone();
            e2[i] = 0;
            out[k].terms.insert(e2, c.clone());
        }
        out
    }

    /// Exact division in `Z[vars]`; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (de, dc) = divisor.leading_term()?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero(self.vars.clone());
        while let Some((re, rc)) = rem.leading_term() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let (q, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            let qe: Exponents = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let mono = MultiPoly::from_terms(self.vars.clone(), [(qe.clone(), q.clone())]);
            rem = &rem - &(&mono * divisor);
            quot.add_term(qe, q);
        }
        Some(quot)
    }

    /// Exact value at a point given per variable. Missing entries are only
    /// permitted for variables that do not occur.
    pub fn eval_slice(&self, point: &[Option<Rational>]) -> Result<Rational> {
        if self.is_zero() {
            return Ok(Rational::zero());
        }
        let n = self.vars.len();
        let mut num_pows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        let mut den_pows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        let mut maxdeg = Vec::with_capacity(n);
        for i in 0..n {
            let d = self.degree_in(i) as usize;
            maxdeg.push(d);
            if d == 0 {
                num_pows.push(vec![BigInt::one()]);
                den_pows.push(vec![BigInt::one()]);
                continue;
            }
            let v = match point.get(i).and_then(|v| v.as_ref()) {
                Some(v) => v,
                None => return usage(format!("assignment is missing variable {}", self.vars[i])),
            };
            let mut np = vec![BigInt::one()];
            let mut dp = vec![BigInt::one()];
            for k in 1..=d {
                np.push(&np[k - 1] * v.numer());
                dp.push(&dp[k - 1] * v.denom());
            }
            num_pows.push(np);
            den_pows.push(dp);
        }
        // Common denominator prod_i den_i^maxdeg_i keeps the sum integral.
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..n {
                if maxdeg[i] == 0 {
                    continue;
                }
                let k = e[i] as usize;
                t *= &num_pows[i][k];
                t *= &den_pows[i][maxdeg[i] - k];
            }
            acc += t;
        }
        let mut den = BigInt::one();
        for i in 0..n {
            den *= &den_pows[i][maxdeg[i]];
        }
        Ok(Rational::new(acc, den))
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        let p: Vec<Option<Rational>> = point.iter().cloned().map(Some).collect();
        self.eval_slice(&p)
    }

    /// Floating evaluation (for back-substitution at irrational points).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        t *= point[i].powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Sum of absolute term values at a point; scale for relative residuals.
    pub fn magnitude_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN).abs();
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        t *= point[i].abs().powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitutes every variable except `keep`, returning a univariate
    /// polynomial in `vars[keep]`.
    pub fn to_unipoly_in(&self, keep: usize, point: &[Option<Rational>]) -> Result<UniPoly> {
        let coeffs = self.coefficients_in(keep);
        let mut out = Vec::with_capacity(coeffs.len());
        for c in &coeffs {
            out.push(c.eval_slice(point)?);
        }
        Ok(UniPoly::new(self.vars[keep].clone(), out))
    }

    /// Converts a polynomial in at most one variable.
    pub fn to_unipoly(&self) -> Result<UniPoly> {
        let used = self.used_vars();
        match used.as_slice() {
            [] => Ok(UniPoly::constant(self.vars.first().cloned().unwrap_or_else(|| "x".into()), Rational::from_integer(self.constant_term()))),
            [i] => self.to_unipoly_in(*i, &vec![None; self.vars.len()]),
            _ => usage(format!("polynomial {self} is not univariate")),
        }
    }

    pub fn from_unipoly_int(vars: Arc<Vec<String>>, i: usize, coeffs: &[BigInt]) -> Self {
        let mut p = Self::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; p.vars.len()];
            e[i] = k as u32;
            p.add_term(e, c.clone());
        }
        p
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Higher total degree first, then lexicographic.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| if x == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], x) })
                .collect();
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.vars.clone());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// Variable names for squared couplings, central coupling first: `A`, `B`, ...
pub fn coupling_letters(n: usize) -> Arc<Vec<String>> {
    Arc::new(
        (0..n)
            .map(|i| if i < 26 { ((b'A' + i as u8) as char).to_string() } else { format!("V{}", i + 1) })
            .collect(),
    )
}

/// Parses a small polynomial written with integer coefficients, `+`, `-`,
/// `*`, `^` and parentheses over the given variables. Intended for tests,
/// fixtures and command-line input.
pub fn parse_multipoly(vars: &Arc<Vec<String>>, src: &str) -> Result<MultiPoly> {
    let mut parser = Parser { vars, chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    let p = parser.expr()?;
    if parser.pos != parser.chars.len() {
        return usage(format!("unexpected trailing input in {src:?} at {}", parser.pos));
    }
    Ok(p)
}

struct Parser<'a> {
    vars: &'a Arc<Vec<String>>,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(c) if c == '(' || c.is_ascii_alphabetic() => {
                    acc = &acc * &self.power()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let k: u32 = self.chars[start..self.pos].iter().collect::<String>().parse().map_err(|_| crate::Error::Usage("bad exponent".into()))?;
            let mut out = MultiPoly::constant(self.vars.clone(), 1);
            for _ in 0..k {
                out = &out * &base;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return usage("missing closing parenthesis");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let s: String = self.chars[start..self.pos].iter().collect();
                Ok(MultiPoly::constant(self.vars.clone(), s.parse::<BigInt>().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                self.pos += 1;
                // Multi-character names (e.g. V27) continue with digits only.
                while self.peek().is_some_and(|c| c.is_ascii_digit()) && self.chars[start] == 'V' {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(MultiPoly::var(self.vars.clone(), i)),
                    None => usage(format!("unknown variable {name:?}")),
                }
            }
            other => usage(format!("unexpected {other:?} in polynomial")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::rat;

    fn ab() -> Arc<Vec<String>> {
        coupling_letters(2)
    }

    #[test]
    fn eval_constraint_at_eep() {
        let p = parse_multipoly(&ab(), "A + 2B - 10").unwrap();
        assert_eq!(p.eval(&[rat(4), rat(3)]).unwrap(), rat(0));
        let q = parse_multipoly(&ab(), "(3+B)^2 - 9A").unwrap();
        assert_eq!(q.eval(&[rat(64), rat(-27)]).unwrap(), rat(0));
    }

    #[test]
    fn missing_variable_is_usage_error() {
        let p = parse_multipoly(&ab(), "A + B").unwrap();
        assert!(p.eval_slice(&[Some(rat(1)), None]).is_err());
        let c = MultiPoly::constant(ab(), 1);
        assert_eq!(c.eval_slice(&[None, None]).unwrap(), rat(1));
    }

    #[test]
    fn exact_division() {
        let v = ab();
        let f = parse_multipoly(&v, "A^2 - B^2").unwrap();
        let g = parse_multipoly(&v, "A - B").unwrap();
        assert_eq!(f.div_exact(&g).unwrap(), parse_multipoly(&v, "A + B").unwrap());
        assert!(f.div_exact(&parse_multipoly(&v, "A + 2").unwrap()).is_none());
    }

    #[test]
    fn primitive_removes_content() {
        let v = ab();
        let f = parse_multipoly(&v, "-6A + 4B - 2").unwrap();
        assert_eq!(f.content(), BigInt::from(2));
        assert_eq!(f.primitive(), parse_multipoly(&v, "3A - 2B + 1").unwrap());
    }

    #[test]
    fn coefficients_in_round_trip() {
        let v = ab();
        let f = parse_multipoly(&v, "A^2 B + 3 A B^2 - 7 B + 4").unwrap();
        let cs = f.coefficients_in(0);
        assert_eq!(cs.len(), 3);
        let mut back = MultiPoly::zero(v.clone());
        for (k, c) in cs.iter().enumerate() {
            back = &back + &c.shift_var(0, k as u32);
        }
        assert_eq!(back, f);
    }
}
