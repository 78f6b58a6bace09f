//! Real root isolation by Sturm-count bisection.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::{pow2_ceil, rat, to_f64, Rational};
use super::sturm::{Endpoint, SturmChain};
use super::unipoly::UniPoly;
use crate::error::Result;

/// One real root isolated in `(lo, hi]`. `exact` is set when the root is
/// rational.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: Option<Rational>,
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        match &self.exact {
            Some(r) => to_f64(r),
            None => (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0,
        }
    }

    pub fn midpoint(&self) -> Rational {
        match &self.exact {
            Some(r) => r.clone(),
            None => (&self.lo + &self.hi) / rat(2),
        }
    }
}

/// Upper bound on the modulus of every root (Cauchy), rounded up to a power of two.
pub fn root_bound(p: &UniPoly) -> Rational {
    let lc = p.leading().abs();
    let mut m = Rational::zero();
    for c in &p.coeffs()[..p.coeffs().len().saturating_sub(1)] {
        let r = c.abs() / &lc;
        if r > m {
            m = r;
        }
    }
    pow2_ceil(&(m + Rational::one()))
}

/// Isolates every distinct real root of `p` and refines each interval to
/// width at most `width`. Rational roots are detected exactly.
pub fn isolate_real_roots(p: &UniPoly, width: &Rational) -> Result<Vec<RealRoot>> {
    let sf = p.squarefree_part()?;
    if sf.degree() == Some(0) {
        return Ok(vec![]);
    }
    let chain = SturmChain::new(&sf)?;
    let bound = root_bound(&sf);
    let mut stack = vec![(-bound.clone(), bound)];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = chain.count(&Endpoint::At(lo.clone()), &Endpoint::At(hi.clone()));
        match n {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) / rat(2);
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    isolated.sort_by(|a, b| a.0.cmp(&b.0));
    let lc_int = sf.leading().to_integer().abs();
    let exact_width = Rational::new(BigInt::one(), lc_int.clone() * 2);
    let mut out = Vec::with_capacity(isolated.len());
    for (lo, hi) in isolated {
        let mut root = refine(&sf, &chain, lo, hi, &exact_width.clone().min(width.clone()));
        if root.exact.is_none() {
            root.exact = rational_candidate(&sf, &root, &lc_int);
        }
        if root.exact.is_none() && (&root.hi - &root.lo) > *width {
            root = refine(&sf, &chain, root.lo, root.hi, width);
        }
        out.push(root);
    }
    Ok(out)
}

/// Sign of `p(x)`. Integer coefficients are evaluated homogeneously on the
/// numerator and denominator of `x`, avoiding rational normalisation.
pub fn sign_at(p: &UniPoly, x: &Rational) -> i8 {
    let v = if p.coeffs().iter().all(|c| c.is_integer()) {
        let (num, den) = (x.numer(), x.denom());
        let mut coeffs = p.coeffs().iter().rev();
        let mut acc = coeffs.next().map(|c| c.to_integer()).unwrap_or_default();
        let mut pow = BigInt::one();
        for c in coeffs {
            pow *= den;
            acc = acc * num + c.numer() * &pow;
        }
        Rational::from_integer(acc)
    } else {
        p.eval(x)
    };
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// Narrows an interval `(lo, hi]` holding exactly one root of the
/// squarefree `p` by sign bisection.
fn refine(p: &UniPoly, chain: &SturmChain, mut lo: Rational, mut hi: Rational, width: &Rational) -> RealRoot {
    let s_hi = sign_at(p, &hi);
    if s_hi == 0 {
        return RealRoot { lo: hi.clone(), hi: hi.clone(), exact: Some(hi) };
    }
    let by_sign = sign_at(p, &lo) == -s_hi;
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / rat(2);
        let s = sign_at(p, &mid);
        if s == 0 {
            return RealRoot { lo: mid.clone(), hi: mid.clone(), exact: Some(mid) };
        }
        let root_below = if by_sign { s == s_hi } else { chain.count(&Endpoint::At(lo.clone()), &Endpoint::At(mid.clone())) == 1 };
        if root_below {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RealRoot { lo, hi, exact: None }
}

/// A rational root of a primitive integer polynomial has denominator
/// dividing the leading coefficient; within an interval narrower than
/// `1/lc` there is at most one such candidate.
fn rational_candidate(p: &UniPoly, root: &RealRoot, lc: &BigInt) -> Option<Rational> {
    let lcq = Rational::from_integer(lc.clone());
    let k = (&root.hi * &lcq).floor().to_integer();
    let cand = Rational::new(k, lc.clone());
    if cand > root.lo && cand <= root.hi && p.eval(&cand).is_zero() {
        Some(cand)
    } else {
        None
    }
}

/// Root intervals for a polynomial with integer content already removed;
/// convenience for callers that only need floating approximations.
pub fn real_roots_f64(p: &UniPoly, tol: f64) -> Result<Vec<f64>> {
    let w = super::rational::from_f64(tol).unwrap_or_else(|| Rational::new(BigInt::one(), BigInt::from(1u64 << 40)));
    Ok(isolate_real_roots(p, &w)?.iter().map(RealRoot::approx).collect())
}
