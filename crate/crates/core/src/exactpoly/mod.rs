//! Exact arithmetic: rationals, univariate and multivariate polynomials,
//! Sturm root counting and resultant elimination.

pub mod multipoly;
pub mod rational;
pub mod resultant;
pub mod roots;
pub mod sturm;
pub mod unipoly;

use std::collections::BTreeMap;

pub use multipoly::{coupling_letters, parse_multipoly, MultiPoly};
pub use rational::{parse_rational, rat, ratio, Rational};
pub use resultant::{resultant, subresultant};
pub use roots::{isolate_real_roots, sign_at, RealRoot};
pub use sturm::{sturm_count, Endpoint, SturmChain};
pub use unipoly::UniPoly;

use crate::error::{usage, Result};

/// Variable name to value.
pub type Assignment = BTreeMap<String, Rational>;

/// Exact evaluation at a named point.
pub trait RingEval {
    fn ring_eval(&self, point: &Assignment) -> Result<Rational>;
}

impl RingEval for MultiPoly {
    fn ring_eval(&self, point: &Assignment) -> Result<Rational> {
        let values: Vec<Option<Rational>> = self.vars().iter().map(|v| point.get(v).cloned()).collect();
        self.eval_slice(&values)
    }
}

impl RingEval for UniPoly {
    fn ring_eval(&self, point: &Assignment) -> Result<Rational> {
        if self.degree().unwrap_or(0) == 0 {
            return Ok(self.coeff(0));
        }
        match point.get(self.var()) {
            Some(x) => Ok(self.eval(x)),
            None => usage(format!("assignment is missing variable {}", self.var())),
        }
    }
}

pub fn ring_eval(p: &impl RingEval, point: &Assignment) -> Result<Rational> {
    p.ring_eval(point)
}

pub fn squarefree_part(p: &UniPoly) -> Result<UniPoly> {
    p.squarefree_part()
}
