//! Chain Hamiltonians and their characteristic polynomials.
//!
//! Two PT-symmetric families are supported, both with an equidistant
//! unperturbed diagonal and `sub[k] = -super[k]`:
//!
//! * [`Family::GeneralPT`]: diagonal `1, 3, ..., 2N-1`, `N-1` free couplings.
//! * [`Family::Symmetrized`]: diagonal `N-1, N-3, ..., 1-N` and couplings
//!   mirrored about the centre, so only `floor(N/2)` of them are free.
//!
//! [`Family::GeneralTridiagonal`] accepts arbitrary real entries.
//!
//! Symmetrized couplings are stored outermost first (matrix order from the
//! top-left corner). Reports and symbolic variables use the central-first
//! lettering: `A` is the square of the central coupling, `B` the next one
//! outwards and so on.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::exactpoly::rational::to_f64;
use crate::exactpoly::{coupling_letters, rat, MultiPoly, Rational, UniPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    GeneralPT,
    Symmetrized,
    GeneralTridiagonal,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "generalpt" | "pt" => Ok(Family::GeneralPT),
            "symmetrized" | "symmetric" | "sym" => Ok(Family::Symmetrized),
            "generaltridiagonal" | "tridiagonal" | "general" => Ok(Family::GeneralTridiagonal),
            _ => usage(format!("unknown family {s:?}")),
        }
    }
}

/// Coupling data of a [`ChainSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum Couplings {
    /// Coupling values in storage order.
    Values(Vec<Rational>),
    /// Squared couplings in storage order. Only squares enter the spectrum
    /// of the PT families, so irrational couplings stay exact this way.
    Squared(Vec<Rational>),
    /// Full matrix entries (general tridiagonal family).
    Entries(TridiagonalMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    family: Family,
    n: usize,
    couplings: Couplings,
}

/// Exact tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<Rational>,
    pub sup: Vec<Rational>,
    pub sub: Vec<Rational>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<Rational>, sup: Vec<Rational>, sub: Vec<Rational>) -> Result<Self> {
        if diag.is_empty() {
            return usage("matrix dimension must be positive");
        }
        if sup.len() + 1 != diag.len() || sub.len() + 1 != diag.len() {
            return usage(format!(
                "off-diagonal lengths {} and {} do not match dimension {}",
                sup.len(),
                sub.len(),
                diag.len()
            ));
        }
        Ok(TridiagonalMatrix { diag, sup, sub })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = to_f64(&self.diag[i]);
        }
        for k in 0..n - 1 {
            m[(k, k + 1)] = to_f64(&self.sup[k]);
            m[(k + 1, k)] = to_f64(&self.sub[k]);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        TridiagonalMatrix { diag: self.diag.clone(), sup: self.sub.clone(), sub: self.sup.clone() }
    }
}

/// Parity of the characteristic polynomial in `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    OddTimesE,
}

/// Characteristic polynomial of a symmetrized chain reduced to `s = E^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecularForm {
    pub char_poly_e: UniPoly,
    pub parity: Parity,
    /// Monic polynomial in `s`.
    pub s_poly: UniPoly,
    pub s_degree: usize,
}

/// Off-diagonal position `k` (between rows `k` and `k+1`) to storage index.
pub fn symmetrized_slot(n: usize, k: usize) -> usize {
    k.min(n - 2 - k)
}

/// Number of free couplings for a family and dimension.
pub fn coupling_count(family: Family, n: usize) -> usize {
    match family {
        Family::GeneralPT | Family::GeneralTridiagonal => n.saturating_sub(1),
        Family::Symmetrized => n / 2,
    }
}

fn unperturbed_diag(family: Family, n: usize) -> Vec<Rational> {
    match family {
        Family::GeneralPT => (0..n).map(|k| rat(2 * k as i64 + 1)).collect(),
        _ => (0..n).map(|k| rat(n as i64 - 1 - 2 * k as i64)).collect(),
    }
}

impl ChainSpec {
    fn checked(family: Family, n: usize, couplings: Couplings) -> Result<Self> {
        if n < 2 {
            return usage(format!("dimension {n} below 2"));
        }
        let want = coupling_count(family, n);
        let got = match &couplings {
            Couplings::Values(v) | Couplings::Squared(v) => v.len(),
            Couplings::Entries(t) => t.dim() - 1,
        };
        if got != want {
            return usage(format!("{family:?} chain of dimension {n} needs {want} couplings, got {got}"));
        }
        if let Couplings::Squared(v) = &couplings {
            if v.iter().any(|x| x.is_negative()) {
                return usage("squared couplings must be non-negative");
            }
        }
        Ok(ChainSpec { family, n, couplings })
    }

    /// Symmetrized chain from coupling values, outermost first.
    pub fn symmetrized(n: usize, couplings: Vec<Rational>) -> Result<Self> {
        Self::checked(Family::Symmetrized, n, Couplings::Values(couplings))
    }

    /// Symmetrized chain from squared couplings listed central first
    /// (`[A, B, C, ...]`).
    pub fn symmetrized_squared(n: usize, central_first: Vec<Rational>) -> Result<Self> {
        let mut v = central_first;
        v.reverse();
        Self::checked(Family::Symmetrized, n, Couplings::Squared(v))
    }

    pub fn general_pt(couplings: Vec<Rational>) -> Result<Self> {
        let n = couplings.len() + 1;
        Self::checked(Family::GeneralPT, n, Couplings::Values(couplings))
    }

    pub fn general_pt_squared(squares: Vec<Rational>) -> Result<Self> {
        let n = squares.len() + 1;
        Self::checked(Family::GeneralPT, n, Couplings::Squared(squares))
    }

    pub fn general_tridiagonal(matrix: TridiagonalMatrix) -> Result<Self> {
        let n = matrix.dim();
        Self::checked(Family::GeneralTridiagonal, n, Couplings::Entries(matrix))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    /// Half dimension `floor(N/2)`: the degree of the secular polynomial in `s`.
    pub fn half_dim(&self) -> usize {
        self.n / 2
    }

    /// Squares of the free couplings in storage order.
    pub fn storage_squares(&self) -> Option<Vec<Rational>> {
        match &self.couplings {
            Couplings::Values(v) => Some(v.iter().map(|x| x * x).collect()),
            Couplings::Squared(v) => Some(v.clone()),
            Couplings::Entries(_) => None,
        }
    }

    /// Squared couplings central first (`A, B, ...`); symmetrized family only.
    pub fn squared_central_first(&self) -> Option<Vec<Rational>> {
        if self.family != Family::Symmetrized {
            return None;
        }
        let mut v = self.storage_squares()?;
        v.reverse();
        Some(v)
    }

    /// Diagonal entries and the products `sub[k] * super[k]`, which fully
    /// determine the characteristic polynomial.
    pub fn jacobi_form(&self) -> (Vec<Rational>, Vec<Rational>) {
        match &self.couplings {
            Couplings::Entries(t) => (t.diag.clone(), t.sup.iter().zip(&t.sub).map(|(a, b)| a * b).collect()),
            _ => {
                let sq = self.storage_squares().unwrap();
                let prods = (0..self.n - 1)
                    .map(|k| {
                        let i = match self.family {
                            Family::Symmetrized => symmetrized_slot(self.n, k),
                            _ => k,
                        };
                        -sq[i].clone()
                    })
                    .collect();
                (unperturbed_diag(self.family, self.n), prods)
            }
        }
    }

    /// Squares of the matrix couplings at each off-diagonal position.
    pub fn position_squares(&self) -> Option<Vec<Rational>> {
        match &self.couplings {
            Couplings::Entries(_) => None,
            _ => Some(self.jacobi_form().1.into_iter().map(|p| -p).collect()),
        }
    }

    /// Floating matrix; squared couplings enter through their positive root.
    pub fn numeric_matrix(&self) -> DMatrix<f64> {
        match &self.couplings {
            Couplings::Entries(t) => t.to_dense(),
            Couplings::Values(_) => build_chain(self).expect("value couplings always build").to_dense(),
            Couplings::Squared(_) => {
                let (diag, prods) = self.jacobi_form();
                let n = self.n;
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = to_f64(&diag[i]);
                }
                for k in 0..n - 1 {
                    let a = to_f64(&-prods[k].clone()).sqrt();
                    m[(k, k + 1)] = a;
                    m[(k + 1, k)] = -a;
                }
                m
            }
        }
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Exact matrix of a chain. Squared couplings must be perfect squares.
pub fn build_chain(spec: &ChainSpec) -> Result<TridiagonalMatrix> {
    let n = spec.n;
    match &spec.couplings {
        Couplings::Entries(t) => Ok(t.clone()),
        Couplings::Values(v) | Couplings::Squared(v) => {
            let values: Vec<Rational> = match &spec.couplings {
                Couplings::Values(_) => v.clone(),
                _ => v
                    .iter()
                    .map(|s| exact_sqrt(s).ok_or_else(|| Error::Usage(format!("squared coupling {s} has no rational root"))))
                    .collect::<Result<_>>()?,
            };
            let sup: Vec<Rational> = (0..n - 1)
                .map(|k| match spec.family {
                    Family::Symmetrized => values[symmetrized_slot(n, k)].clone(),
                    _ => values[k].clone(),
                })
                .collect();
            let sub = sup.iter().map(|x| -x.clone()).collect();
            TridiagonalMatrix::new(unperturbed_diag(spec.family, n), sup, sub)
        }
    }
}

/// Minimal ring interface shared by the exact numeric and symbolic paths of
/// the determinant recurrence.
pub trait CoeffRing: Clone {
    fn zero_like(&self) -> Self;
    fn from_int_like(&self, k: i64) -> Self;
    fn is_zero_value(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
}

impl CoeffRing for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn from_int_like(&self, k: i64) -> Self {
        rat(k)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
}

impl CoeffRing for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.vars().clone())
    }
    fn from_int_like(&self, k: i64) -> Self {
        MultiPoly::constant(self.vars().clone(), k)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        // Recurrence multiplications are by constants or single variables.
        if other.num_terms() == 1 {
            let (e, c) = other.terms().next().unwrap();
            let mut out = self.scale(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    out = out.shift_var(i, k);
                }
            }
            return out;
        }
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
}

/// `det(T - E)` as coefficients in `E` (lowest first) via
/// `D_k = (d_k - E) D_{k-1} - p_{k-1} D_{k-2}` with `p = sub * super`.
pub fn determinant_recurrence<R: CoeffRing>(diag: &[R], prods: &[R]) -> Vec<R> {
    let zero = diag[0].zero_like();
    let one = diag[0].from_int_like(1);
    let mut prev: Vec<R> = vec![one];
    let mut cur: Vec<R> = vec![diag[0].clone(), diag[0].from_int_like(-1)];
    for k in 1..diag.len() {
        let mut next = vec![zero.clone(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            if c.is_zero_value() {
                continue;
            }
            next[i] = next[i].add(&c.mul(&diag[k]));
            next[i + 1] = next[i + 1].sub(c);
        }
        let p = &prods[k - 1];
        if !p.is_zero_value() {
            for (i, c) in prev.iter().enumerate() {
                if !c.is_zero_value() {
                    next[i] = next[i].sub(&c.mul(p));
                }
            }
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

pub fn char_poly(t: &TridiagonalMatrix) -> UniPoly {
    let prods: Vec<Rational> = t.sup.iter().zip(&t.sub).map(|(a, b)| a * b).collect();
    UniPoly::new("E", determinant_recurrence(&t.diag, &prods))
}

/// Characteristic polynomial of a chain from its Jacobi form (works for
/// squared couplings too).
pub fn char_poly_of_spec(spec: &ChainSpec) -> UniPoly {
    let (diag, prods) = spec.jacobi_form();
    UniPoly::new("E", determinant_recurrence(&diag, &prods))
}

/// Checks parity, strips the factor `E` for odd dimension, substitutes
/// `s = E^2` and flips the overall sign so the result is monic.
pub fn reduce_to_s<R: CoeffRing>(coeffs_e: &[R], n: usize) -> Result<(Parity, Vec<R>)> {
    let parity = if n % 2 == 0 { Parity::Even } else { Parity::OddTimesE };
    let keep = n % 2;
    for (i, c) in coeffs_e.iter().enumerate() {
        if i % 2 != keep && !c.is_zero_value() {
            return Err(Error::Consistency(format!("coefficient of E^{i} is nonzero for {parity:?} dimension {n}")));
        }
    }
    let mut s: Vec<R> = coeffs_e.iter().skip(keep).step_by(2).cloned().collect();
    // Leading coefficient of det(H - E) is (-1)^N.
    if n % 2 == 1 {
        s = s.iter().map(R::negate).collect();
    }
    Ok((parity, s))
}

pub fn secular_in_s(spec: &ChainSpec) -> Result<SecularForm> {
    if spec.family != Family::Symmetrized {
        return usage("the s = E^2 reduction applies to the symmetrized family only");
    }
    let (diag, prods) = spec.jacobi_form();
    let coeffs = determinant_recurrence(&diag, &prods);
    let (parity, s) = reduce_to_s(&coeffs, spec.n)?;
    let s_poly = UniPoly::new("s", s);
    if !s_poly.leading().is_one() {
        return Err(Error::Consistency(format!("secular polynomial {s_poly} is not monic")));
    }
    Ok(SecularForm { char_poly_e: UniPoly::new("E", coeffs), parity, s_degree: spec.n / 2, s_poly })
}

/// Secular coefficients `[P_{d-1}, ..., P_0]` of the monic `s`-polynomial
/// as integer polynomials in the squared couplings `A` (central), `B`, ...
pub fn symbolic_secular_coeffs(n: usize) -> Result<Vec<MultiPoly>> {
    if n < 2 {
        return usage(format!("dimension {n} below 2"));
    }
    let h = n / 2;
    let vars = coupling_letters(h);
    symbolic_with_vars(n, vars)
}

fn symbolic_with_vars(n: usize, vars: Arc<Vec<String>>) -> Result<Vec<MultiPoly>> {
    let h = n / 2;
    let diag: Vec<MultiPoly> = (0..n).map(|k| MultiPoly::constant(vars.clone(), n as i64 - 1 - 2 * k as i64)).collect();
    let prods: Vec<MultiPoly> = (0..n - 1)
        .map(|k| {
            let storage = symmetrized_slot(n, k);
            -&MultiPoly::var(vars.clone(), h - 1 - storage)
        })
        .collect();
    let coeffs = determinant_recurrence(&diag, &prods);
    let (_, s) = reduce_to_s(&coeffs, n)?;
    if s.last().map(|p| p.is_constant() && p.constant_term() == BigInt::one()) != Some(true) {
        return Err(Error::Consistency("symbolic secular polynomial is not monic".into()));
    }
    let mut out: Vec<MultiPoly> = s[..h].to_vec();
    out.reverse();
    Ok(out)
}

/// Coefficients `[P_{d-1}, ..., P_0]` at a given point, computed by the same
/// recurrence over exact rationals (equal to evaluating the symbolic
/// coefficients there).
pub fn secular_coeffs_at(n: usize, squared_central_first: &[Rational]) -> Result<Vec<Rational>> {
    let spec = ChainSpec::symmetrized_squared(n, squared_central_first.to_vec())?;
    let form = secular_in_s(&spec)?;
    let d = form.s_degree;
    Ok((0..d).rev().map(|j| form.s_poly.coeff(j)).collect())
}

/// Expected value of `P_{d-1}`: the sum of the squares of all `N-1` matrix
/// couplings minus half the sum of the squared diagonal entries.
pub fn trace_coefficient(spec: &ChainSpec) -> Option<Rational> {
    let sq = spec.position_squares()?;
    let (diag, _) = spec.jacobi_form();
    let coupling_sum: Rational = sq.iter().fold(Rational::zero(), |a, b| a + b);
    let diag_sum: Rational = diag.iter().fold(Rational::zero(), |a, d| a + d * d);
    Some(coupling_sum - diag_sum / rat(2))
}
