use num_traits::{Signed, Zero};

use super::rational::Rational;
use super::unipoly::UniPoly;
use crate::error::{usage, Result};

/// Point of the extended real line used as a Sturm counting endpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum Endpoint {
    NegInfinity,
    At(Rational),
    PosInfinity,
}

impl From<Rational> for Endpoint {
    fn from(r: Rational) -> Self {
        Endpoint::At(r)
    }
}

/// Sturm sequence `p, p', -rem(p, p'), ...` with every element reduced to a
/// primitive integer polynomial (positive rescaling preserves sign counts).
#[derive(Clone, Debug)]
pub struct SturmChain {
    sequence: Vec<UniPoly>,
}

fn positive_primitive(p: &UniPoly) -> UniPoly {
    let q = p.primitive();
    // `primitive` forces a positive leading coefficient; restore the sign.
    if p.leading().is_negative() {
        -&q
    } else {
        q
    }
}

impl SturmChain {
    /// Builds the chain. Requires a squarefree, non-constant polynomial.
    pub fn new(p: &UniPoly) -> Result<Self> {
        if p.is_zero() {
            return usage("Sturm chain of the zero polynomial");
        }
        let mut sequence = vec![positive_primitive(p)];
        if p.degree() == Some(0) {
            return Ok(SturmChain { sequence });
        }
        sequence.push(positive_primitive(&p.derivative()));
        loop {
            let n = sequence.len();
            let r = sequence[n - 2].rem(&sequence[n - 1]);
            if r.is_zero() {
                break;
            }
            sequence.push(positive_primitive(&-&r));
        }
        if sequence.last().unwrap().degree() != Some(0) {
            return usage(format!("polynomial {p} is not squarefree"));
        }
        Ok(SturmChain { sequence })
    }

    pub fn sequence(&self) -> &[UniPoly] {
        &self.sequence
    }

    fn sign_variations(&self, x: &Endpoint) -> usize {
        let signs = self.sequence.iter().map(|q| match x {
            Endpoint::At(v) => sign(&q.eval(v)),
            Endpoint::PosInfinity => sign(&q.leading()),
            Endpoint::NegInfinity => {
                let s = sign(&q.leading());
                if q.degree().unwrap_or(0) % 2 == 1 {
                    -s
                } else {
                    s
                }
            }
        });
        let mut last = 0i8;
        let mut count = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &Endpoint, hi: &Endpoint) -> usize {
        let a = self.sign_variations(lo);
        let b = self.sign_variations(hi);
        a.saturating_sub(b)
    }
}

pub(crate) fn sign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Number of distinct real roots of a squarefree `p` in `(lo, hi]`.
pub fn sturm_count(p: &UniPoly, lo: &Endpoint, hi: &Endpoint) -> Result<usize> {
    if p.is_zero() {
        return usage("Sturm count of the zero polynomial");
    }
    if p.degree() == Some(0) {
        return Ok(0);
    }
    if !p.is_squarefree() {
        return usage(format!("polynomial {p} is not squarefree; pass its squarefree part"));
    }
    Ok(SturmChain::new(p)?.count(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::rat;

    #[test]
    fn unperturbed_four_level_secular_roots() {
        let p = UniPoly::from_ints("s", &[9, -10, 1]);
        assert_eq!(sturm_count(&p, &Endpoint::At(rat(0)), &Endpoint::PosInfinity).unwrap(), 2);
    }

    #[test]
    fn no_real_roots() {
        let p = UniPoly::from_ints("s", &[1, 0, 1]);
        assert_eq!(sturm_count(&p, &Endpoint::NegInfinity, &Endpoint::PosInfinity).unwrap(), 0);
    }

    #[test]
    fn five_level_eliminant_roots_positive() {
        let p = UniPoly::from_ints("s", &[256, -68, 1]);
        assert_eq!(sturm_count(&p, &Endpoint::At(rat(0)), &Endpoint::PosInfinity).unwrap(), 2);
        assert_eq!(sturm_count(&p, &Endpoint::At(rat(0)), &Endpoint::At(rat(4))).unwrap(), 1);
        assert_eq!(sturm_count(&p, &Endpoint::At(rat(4)), &Endpoint::At(rat(64))).unwrap(), 1);
    }

    #[test]
    fn non_squarefree_rejected() {
        let p = UniPoly::from_ints("s", &[0, 0, 1]);
        assert!(sturm_count(&p, &Endpoint::NegInfinity, &Endpoint::PosInfinity).is_err());
    }

    #[test]
    fn half_open_interval_counts_right_endpoint() {
        // (x-1)(x-2)(x-3)
        let p = UniPoly::from_ints("x", &[-6, 11, -6, 1]);
        let c = |a: i64, b: i64| sturm_count(&p, &Endpoint::At(rat(a)), &Endpoint::At(rat(b))).unwrap();
        assert_eq!(c(1, 3), 2);
        assert_eq!(c(0, 1), 1);
        assert_eq!(c(1, 2), 1);
        assert_eq!(c(-5, 0), 0);
    }
}
