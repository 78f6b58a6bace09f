use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use crate::error::{usage, Result};

/// Dense univariate polynomial with exact rational coefficients, lowest
/// degree first. The coefficient vector never carries trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    var: String,
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(var: impl Into<String>, coeffs: Vec<Rational>) -> Self {
        let mut p = UniPoly { var: var.into(), coeffs };
        p.trim();
        p
    }

    pub fn from_ints(var: impl Into<String>, coeffs: &[i64]) -> Self {
        Self::new(var, coeffs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
    }

    pub fn zero(var: impl Into<String>) -> Self {
        UniPoly { var: var.into(), coeffs: Vec::new() }
    }

    pub fn constant(var: impl Into<String>, c: Rational) -> Self {
        Self::new(var, vec![c])
    }

    /// `x - r`
    pub fn linear_root(var: impl Into<String>, r: &Rational) -> Self {
        Self::new(var, vec![-r.clone(), Rational::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn with_var(mut self, var: impl Into<String>) -> Self {
        self.var = var.into();
        self
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + super::rational::to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect();
        Self::new(self.var.clone(), coeffs)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.var.clone(), self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        self.scale(&lc.recip())
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        Self::new(self.var.clone(), ints.into_iter().map(|c| Rational::from_integer(c / &g)).collect())
    }

    /// Euclidean division over the rationals.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lc_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(self.var.clone()), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let q = &rem[i + dd] * &lc_inv;
            if !q.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &q * dc;
                }
            }
            quot[i] = q;
        }
        rem.truncate(dd);
        (Self::new(self.var.clone(), quot), Self::new(self.var.clone(), rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic gcd (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.primitive();
        let mut b = other.primitive();
        while !b.is_zero() {
            let r = a.rem(&b).primitive();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`, made primitive.
    pub fn squarefree_part(&self) -> Result<Self> {
        if self.is_zero() {
            return usage("squarefree part of the zero polynomial");
        }
        if self.degree() == Some(0) {
            return Ok(Self::constant(self.var.clone(), Rational::one()));
        }
        let g = self.gcd(&self.derivative());
        Ok(self.div_rem(&g).0.primitive())
    }

    pub fn is_squarefree(&self) -> bool {
        self.degree().is_some_and(|_| self.gcd(&self.derivative()).degree() == Some(0))
    }

    /// Resultant by the Euclidean remainder sequence. Zero iff the two
    /// polynomials share a root (or one of them is zero).
    pub fn resultant(&self, other: &Self) -> Rational {
        let (mut f, mut g) = (self.clone(), other.clone());
        let mut acc = Rational::one();
        loop {
            let (Some(m), Some(n)) = (f.degree(), g.degree()) else { return Rational::zero() };
            if n == 0 {
                return acc * g.leading().pow(m as i32);
            }
            let r = f.rem(&g);
            let Some(k) = r.degree() else { return Rational::zero() };
            if m * n % 2 == 1 {
                acc = -acc;
            }
            acc *= g.leading().pow((m - k) as i32);
            f = g;
            g = r;
        }
    }

    /// `(-1)^(m(m-1)/2) res(p, p') / lc(p)` for degree `m`.
    pub fn discriminant(&self) -> Rational {
        match self.degree() {
            None | Some(0) => Rational::zero(),
            Some(m) => {
                let d = self.resultant(&self.derivative()) / self.leading();
                if (m * (m - 1) / 2) % 2 == 1 {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Polynomial through the points `(xs[i], ys[i])` (distinct `xs`), by
    /// Newton divided differences.
    pub fn interpolate(var: impl Into<String>, xs: &[Rational], ys: &[Rational]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let var = var.into();
        let mut dd = ys.to_vec();
        for j in 1..xs.len() {
            for i in (j..xs.len()).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
            }
        }
        let mut out = Self::zero(var.clone());
        for i in (0..xs.len()).rev() {
            let lin = Self::new(var.clone(), vec![-xs[i].clone(), Rational::one()]);
            out = &(&out * &lin) + &Self::constant(var.clone(), dd[i].clone());
        }
        out
    }

    /// Exact substitution `x -> x^2`.
    pub fn substitute_square(&self) -> Self {
        let mut out = vec![Rational::zero(); self.coeffs.len() * 2];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[2 * i] = c.clone();
        }
        Self::new(self.var.clone(), out)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() {
                    write!(f, "{}", mag)?;
                } else {
                    write!(f, "({})", mag)?;
                }
            }
            match i {
                0 => {}
                1 if show_coeff => write!(f, "*{}", self.var)?,
                1 => write!(f, "{}", self.var)?,
                _ if show_coeff => write!(f, "*{}^{}", self.var, i)?,
                _ => write!(f, "{}^{}", self.var, i)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({})", self)
    }
}

fn zip_coeffs(a: &UniPoly, b: &UniPoly, op: impl Fn(&Rational, &Rational) -> Rational) -> UniPoly {
    let n = a.coeffs.len().max(b.coeffs.len());
    let zero = Rational::zero();
    let coeffs = (0..n)
        .map(|i| op(a.coeffs.get(i).unwrap_or(&zero), b.coeffs.get(i).unwrap_or(&zero)))
        .collect();
    UniPoly::new(a.var.clone(), coeffs)
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        zip_coeffs(self, rhs, |x, y| x + y)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        zip_coeffs(self, rhs, |x, y| x - y)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero(self.var.clone());
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(self.var.clone(), out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.var.clone(), self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn resultant_and_discriminant() {
        let p = UniPoly::from_ints("x", &[-2, 0, 1]);
        let q = UniPoly::from_ints("x", &[-1, 1]);
        assert_eq!(p.resultant(&q), rat(-1));
        assert_eq!(p.discriminant(), rat(8));
        assert_eq!(UniPoly::from_ints("x", &[1, -2, 1]).discriminant(), rat(0));
        let two = UniPoly::from_ints("x", &[-2, 1]);
        assert!(!p.resultant(&(&two * &q)).is_zero());
        assert!((&p * &q).resultant(&(&two * &q)).is_zero());
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let p = UniPoly::from_ints("u", &[3, -1, 0, 2]);
        let xs: Vec<Rational> = (0..4).map(|k| ratio(k, 3)).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(UniPoly::interpolate("u", &xs, &ys), p);
    }

    use super::*;
    use crate::exactpoly::rational::{rat, ratio};

    #[test]
    fn double_root_collapses() {
        let p = UniPoly::from_ints("s", &[0, 0, 1]);
        assert_eq!(p.squarefree_part().unwrap(), UniPoly::from_ints("s", &[0, 1]));
    }

    #[test]
    fn squarefree_input_is_returned() {
        // (s-1)(s-9)
        let p = UniPoly::from_ints("s", &[9, -10, 1]);
        assert_eq!(p.gcd(&p.derivative()).degree(), Some(0));
        assert_eq!(p.squarefree_part().unwrap(), p);
    }

    #[test]
    fn squarefree_of_zero_is_error() {
        assert!(UniPoly::zero("s").squarefree_part().is_err());
    }

    #[test]
    fn squarefree_strips_multiplicities() {
        // (s-2)^3 (s+1)^2 (s-5)
        let f = |r: i64| UniPoly::linear_root("s", &rat(r));
        let mut p = UniPoly::constant("s", rat(3));
        for r in [2, 2, 2, -1, -1, 5] {
            p = &p * &f(r);
        }
        let expected = (&(&f(2) * &f(-1)) * &f(5)).primitive();
        assert_eq!(p.squarefree_part().unwrap(), expected);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = UniPoly::from_ints("x", &[1, -3, 0, 2, 5]);
        let b = UniPoly::from_ints("x", &[2, 0, 3]);
        let (q, r) = a.div_rem(&b);
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(&(&q * &b) + &r, a);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(UniPoly::from_ints("s", &[9, -10, 1]).to_string(), "s^2 - 10*s + 9");
        assert_eq!(UniPoly::from_ints("E", &[0, 4, 0, -1]).to_string(), "-E^3 + 4*E");
    }
}
