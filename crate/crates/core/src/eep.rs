//! Extreme exceptional points: closed-form coordinates, verification by
//! direct insertion, the circumscribed sphere/ellipsoid bound, and the
//! small-dimension eliminations with spurious-branch rejection.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::chain::{
    char_poly, secular_coeffs_at, secular_in_s, symbolic_secular_coeffs, symmetrized_slot, ChainSpec, TridiagonalMatrix,
};
use crate::domain::{classify_point, VerdictClass};
use crate::error::{usage, Result};
use crate::exactpoly::rational::to_f64;
use crate::exactpoly::{isolate_real_roots, rat, resultant, MultiPoly, RealRoot, Rational, UniPoly};
use crate::metric::eigen_numeric;

/// Largest dimension for which [`verify_eep`] inserts into fully expanded
/// symbolic coefficients. Term counts grow roughly 2.4x per step of two in
/// `N`; above this the determinant recurrence is evaluated at the point.
pub const SYMBOLIC_INSERTION_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct EepSolution {
    pub n: usize,
    /// `K` for `N = 2K`, `M` for `N = 2M + 1`.
    pub half_dim: usize,
    /// `A, B, C, ...` (central coupling first).
    pub squared_couplings: Vec<BigInt>,
    /// Value of the circumscribing bound at the EEP.
    pub bound_value: BigInt,
    /// Number of sign choices of the couplings, `2^half_dim`.
    pub sign_choices: String,
}

impl EepSolution {
    pub fn squared_rationals(&self) -> Vec<Rational> {
        self.squared_couplings.iter().map(|c| Rational::from_integer(c.clone())).collect()
    }

    pub fn spec(&self) -> ChainSpec {
        ChainSpec::symmetrized_squared(self.n, self.squared_rationals()).expect("EEP tuple has the right length")
    }
}

/// Bound of the circumscribing ellipsoid (`N = 2K`) or sphere (`N = 2M+1`).
pub fn circumscribed_bound(n: usize) -> BigInt {
    let h = BigInt::from(n / 2);
    if n % 2 == 0 {
        (BigInt::from(4) * &h * &h * &h - &h) / 3
    } else {
        (BigInt::from(2) * &h * &h * &h + BigInt::from(3) * &h * &h + &h) / 3
    }
}

pub fn eep_closed_form(n: usize) -> Result<EepSolution> {
    if n < 2 {
        return usage(format!("dimension {n} below 2"));
    }
    let h = n / 2;
    let hb = BigInt::from(h);
    let squared_couplings = (0..h)
        .map(|j| {
            let j = BigInt::from(j);
            if n % 2 == 0 {
                &hb * &hb - &j * &j
            } else {
                &hb * (&hb + 1) - &j * (&j + 1)
            }
        })
        .collect();
    Ok(EepSolution { n, half_dim: h, squared_couplings, bound_value: circumscribed_bound(n), sign_choices: format!("2^{h}") })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertionMethod {
    /// Fully expanded symbolic coefficients evaluated at the point.
    Symbolic,
    /// The determinant recurrence evaluated over exact rationals.
    Recurrence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub n: usize,
    pub solution: EepSolution,
    pub method: InsertionMethod,
    /// `P_{d-1}, ..., P_0` at the EEP.
    pub insertion_residuals: Vec<Rational>,
    /// The secular polynomial at the EEP equals `s^d`.
    pub degeneracy_confirmed: bool,
    pub norm: Rational,
    pub bound: Rational,
    pub bound_identity_holds: bool,
    /// Informative only: the EEP matrix is maximally defective.
    pub numeric_eigenvalue_max_modulus: f64,
    /// Index `j` of the first nonzero `P_j`, if any.
    pub failed_coefficient: Option<usize>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failed_coefficient.is_none() && self.degeneracy_confirmed && self.bound_identity_holds
    }
}

/// Norm entering the circumscribed bound: `A + 2(B + ... + Z)` for even
/// dimension, `A + B + ... + Z` for odd.
pub fn bound_norm(n: usize, squared_central_first: &[Rational]) -> Rational {
    squared_central_first.iter().enumerate().fold(Rational::zero(), |acc, (j, x)| {
        if n % 2 == 0 && j > 0 {
            acc + x * rat(2)
        } else {
            acc + x
        }
    })
}

pub fn verify_eep(n: usize) -> Result<VerificationReport> {
    let solution = eep_closed_form(n)?;
    let point = solution.squared_rationals();
    let (method, insertion_residuals) = if n <= SYMBOLIC_INSERTION_LIMIT {
        let coeffs = symbolic_secular_coeffs(n)?;
        let vals = coeffs.iter().map(|p| p.eval(&point)).collect::<Result<Vec<_>>>()?;
        (InsertionMethod::Symbolic, vals)
    } else {
        (InsertionMethod::Recurrence, secular_coeffs_at(n, &point)?)
    };
    let h = solution.half_dim;
    let failed_coefficient = insertion_residuals.iter().position(|r| !r.is_zero()).map(|i| h - 1 - i);
    let form = secular_in_s(&solution.spec())?;
    let degeneracy_confirmed = form.s_poly.degree() == Some(h) && (0..h).all(|j| form.s_poly.coeff(j).is_zero());
    let norm = bound_norm(n, &point);
    let bound = Rational::from_integer(solution.bound_value.clone());
    let numeric_eigenvalue_max_modulus = eigen_numeric(&solution.spec().numeric_matrix())
        .map(|ev| ev.iter().map(|e| e.norm()).fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    Ok(VerificationReport {
        n,
        method,
        insertion_residuals,
        degeneracy_confirmed,
        bound_identity_holds: norm == bound,
        norm,
        bound,
        numeric_eigenvalue_max_modulus,
        failed_coefficient,
        solution,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub norm: Rational,
    pub bound: Rational,
    pub inside: bool,
}

pub fn circumscribed_bound_check(spec: &ChainSpec) -> Result<BoundCheck> {
    let Some(sq) = spec.squared_central_first() else {
        return usage("the circumscribed bound applies to the symmetrized family");
    };
    let norm = bound_norm(spec.n(), &sq);
    let bound = Rational::from_integer(circumscribed_bound(spec.n()));
    let inside = norm <= bound;
    Ok(BoundCheck { norm, bound, inside })
}

/// Value of an eliminated variable on one branch.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchValue {
    Exact(Rational),
    Approx(f64),
}

impl BranchValue {
    pub fn approx(&self) -> f64 {
        match self {
            BranchValue::Exact(r) => to_f64(r),
            BranchValue::Approx(x) => *x,
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            BranchValue::Exact(r) => r.is_negative(),
            BranchValue::Approx(x) => *x < 0.0,
        }
    }
}

/// One back-substitution branch. `values` is central first; unresolved
/// entries stay `None` when the branch was cut early.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub values: Vec<Option<BranchValue>>,
    pub spurious: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eliminant {
    pub n: usize,
    /// The last surviving squared coupling (outermost).
    pub variable: String,
    pub polynomial: UniPoly,
    pub real_roots: Vec<RealRoot>,
    pub branches: Vec<Branch>,
    /// Non-spurious, fully exact tuples.
    pub surviving: Vec<Vec<Rational>>,
    /// Set when the surviving set is not exactly the closed-form EEP.
    pub failure: Option<String>,
}

/// Smallest dimension and largest dimension handled by [`eliminate_eep_system`].
pub const ELIMINATION_RANGE: (usize, usize) = (2, 7);

/// Eliminates `A`, then `B`, ... from the EEP conditions `P_j = 0` by
/// resultants, isolates the real roots of the final univariate eliminant
/// and back-substitutes each, rejecting branches that force a negative
/// squared coupling or have no real continuation.
pub fn eliminate_eep_system(n: usize) -> Result<Eliminant> {
    if n < ELIMINATION_RANGE.0 || n > ELIMINATION_RANGE.1 {
        return usage(format!("elimination is supported for N in {}..={}", ELIMINATION_RANGE.0, ELIMINATION_RANGE.1));
    }
    let h = n / 2;
    let polys = symbolic_secular_coeffs(n)?;
    let vars = polys[0].vars().clone();

    let mut levels: Vec<Vec<MultiPoly>> = vec![polys.clone()];
    for v in 0..h - 1 {
        let cur = levels.last().unwrap();
        let (with, without): (Vec<&MultiPoly>, Vec<&MultiPoly>) = cur.iter().partition(|p| p.degree_in(v) > 0);
        let pivot_idx = (0..with.len()).min_by_key(|&i| (with[i].degree_in(v), with[i].num_terms())).unwrap();
        let pivot = with[pivot_idx];
        let mut next: Vec<MultiPoly> = Vec::new();
        for (i, q) in with.iter().enumerate() {
            if i != pivot_idx {
                let r = resultant(pivot, q, &vars[v])?;
                if !r.is_zero() {
                    next.push(r);
                }
            }
        }
        next.extend(without.into_iter().cloned());
        levels.push(next);
    }

    let last = h - 1;
    let none_point = vec![None; h];
    let mut eliminant: Option<UniPoly> = None;
    for p in levels.last().unwrap() {
        let u = p.to_unipoly_in(last, &none_point)?;
        eliminant = Some(match eliminant {
            None => u,
            Some(g) => g.gcd(&u),
        });
    }
    let polynomial = eliminant.unwrap_or_else(|| UniPoly::zero(vars[last].clone())).primitive();
    let width = Rational::new(BigInt::from(1), BigInt::from(10).pow(30));
    let real_roots = if polynomial.degree().unwrap_or(0) > 0 { isolate_real_roots(&polynomial, &width)? } else { vec![] };

    let mut branches = Vec::new();
    for root in &real_roots {
        let value = match &root.exact {
            Some(r) => BranchValue::Exact(r.clone()),
            None => BranchValue::Approx(root.approx()),
        };
        let mut values = vec![None; h];
        values[last] = Some(value);
        back_substitute(&levels, &polys, &vars, last, values, &mut branches)?;
    }

    let surviving: Vec<Vec<Rational>> = branches
        .iter()
        .filter(|b| !b.spurious)
        .filter_map(|b| {
            b.values
                .iter()
                .map(|v| match v {
                    Some(BranchValue::Exact(r)) => Some(r.clone()),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect();
    let kept = branches.iter().filter(|b| !b.spurious).count();
    let expected = eep_closed_form(n)?.squared_rationals();
    let failure = if kept != 1 {
        Some(format!("{kept} non-spurious branches survive; expected exactly one"))
    } else if surviving.len() != 1 || surviving[0] != expected {
        Some("surviving branch differs from the closed-form EEP".to_string())
    } else {
        None
    };
    Ok(Eliminant { n, variable: vars[last].clone(), polynomial, real_roots, branches, surviving, failure })
}

fn value_name(vars: &[String], i: usize) -> &str {
    &vars[i]
}

/// Resolves variable `level - 1` down to `0` for a branch whose variables
/// `level..h` are known, pushing completed (or cut) branches.
fn back_substitute(
    levels: &[Vec<MultiPoly>],
    original: &[MultiPoly],
    vars: &[String],
    known_from: usize,
    values: Vec<Option<BranchValue>>,
    out: &mut Vec<Branch>,
) -> Result<()> {
    let just = values[known_from].as_ref().unwrap();
    if just.is_negative() {
        out.push(Branch {
            reason: format!("negative squared coupling {} = {}", value_name(vars, known_from), fmt_value(just)),
            values,
            spurious: true,
        });
        return Ok(());
    }
    if known_from == 0 {
        let (ok, reason) = check_tuple(original, &values)?;
        out.push(Branch { values, spurious: !ok, reason });
        return Ok(());
    }
    let v = known_from - 1;
    let candidates = solve_variable(&levels[v], v, &values)?;
    if candidates.is_empty() {
        out.push(Branch { reason: format!("no real common root for {}", value_name(vars, v)), values, spurious: true });
        return Ok(());
    }
    for c in candidates {
        let mut next = values.clone();
        next[v] = Some(c);
        back_substitute(levels, original, vars, v, next, out)?;
    }
    Ok(())
}

fn fmt_value(v: &BranchValue) -> String {
    match v {
        BranchValue::Exact(r) => r.to_string(),
        BranchValue::Approx(x) => format!("{x:.10}"),
    }
}

fn exact_point(values: &[Option<BranchValue>]) -> Option<Vec<Option<Rational>>> {
    values
        .iter()
        .map(|v| match v {
            None => Some(None),
            Some(BranchValue::Exact(r)) => Some(Some(r.clone())),
            Some(BranchValue::Approx(_)) => None,
        })
        .collect()
}

fn approx_point(values: &[Option<BranchValue>]) -> Vec<f64> {
    values.iter().map(|v| v.as_ref().map(BranchValue::approx).unwrap_or(0.0)).collect()
}

/// Common real roots in variable `v` of the level polynomials with the
/// later variables substituted.
fn solve_variable(level: &[MultiPoly], v: usize, values: &[Option<BranchValue>]) -> Result<Vec<BranchValue>> {
    let relevant: Vec<&MultiPoly> = level.iter().filter(|p| p.degree_in(v) > 0).collect();
    if let Some(point) = exact_point(values) {
        let mut g: Option<UniPoly> = None;
        for p in &relevant {
            let u = p.to_unipoly_in(v, &point)?;
            if u.is_zero() {
                continue;
            }
            g = Some(match g {
                None => u,
                Some(g) => g.gcd(&u),
            });
        }
        let Some(g) = g else { return Ok(vec![]) };
        if g.degree().unwrap_or(0) == 0 {
            return Ok(vec![]);
        }
        let width = Rational::new(BigInt::from(1), BigInt::from(10).pow(30));
        return Ok(isolate_real_roots(&g.primitive(), &width)?
            .into_iter()
            .map(|r| match r.exact {
                Some(x) => BranchValue::Exact(x),
                None => BranchValue::Approx(r.approx()),
            })
            .collect());
    }
    // Irrational later values: floating solve on the lowest-degree
    // polynomial, filtered by the residuals of the others.
    let point = approx_point(values);
    let Some(base) = relevant.iter().min_by_key(|p| p.degree_in(v)) else { return Ok(vec![]) };
    let coeffs: Vec<f64> = base
        .coefficients_in(v)
        .iter()
        .map(|c| c.eval_f64(&point))
        .collect();
    let mut out = Vec::new();
    for x in real_roots_f64(&coeffs) {
        let mut pt = point.clone();
        pt[v] = x;
        let ok = relevant.iter().all(|p| {
            let scale = p.magnitude_f64(&pt).max(1.0);
            p.eval_f64(&pt).abs() <= 1e-7 * scale
        });
        if ok {
            out.push(BranchValue::Approx(x));
        }
    }
    Ok(out)
}

/// Real roots of a floating polynomial (coefficients lowest first) from the
/// eigenvalues of its companion matrix.
pub fn real_roots_f64(coeffs: &[f64]) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| *x == 0.0) {
        c.pop();
    }
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return vec![];
    }
    let lead = c[d];
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    let mut roots: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn check_tuple(original: &[MultiPoly], values: &[Option<BranchValue>]) -> Result<(bool, String)> {
    if let Some(point) = exact_point(values) {
        for (k, p) in original.iter().enumerate() {
            let r = p.eval_slice(&point)?;
            if !r.is_zero() {
                return Ok((false, format!("P_{} residual {} after substitution", original.len() - 1 - k, r)));
            }
        }
        return Ok((true, "all secular coefficients vanish exactly".into()));
    }
    let pt = approx_point(values);
    for (k, p) in original.iter().enumerate() {
        let scale = p.magnitude_f64(&pt).max(1.0);
        let r = p.eval_f64(&pt);
        if r.abs() > 1e-7 * scale {
            return Ok((false, format!("P_{} residual {r:e} after substitution", original.len() - 1 - k)));
        }
    }
    Ok((true, "all secular coefficients vanish numerically (irrational branch)".into()))
}

/// Number of distinct characteristic polynomials over all `2^half_dim`
/// sign choices of the EEP couplings (1 when every choice is an EEP).
///
/// A coupling `a` enters as `super = a`, `sub = -a`. Conjugating by a
/// diagonal matrix turns this into `super = a^2`, `sub = -1`, so the sign
/// choice `+-a` becomes `super = +-a^2`, `sub = -+1` with exact entries
/// even when `a` is irrational.
pub fn sign_choice_polynomials(n: usize) -> Result<usize> {
    let sol = eep_closed_form(n)?;
    let h = sol.half_dim;
    let (diag, _) = sol.spec().jacobi_form();
    let storage = {
        let mut v = sol.squared_rationals();
        v.reverse();
        v
    };
    let mut seen: Vec<UniPoly> = Vec::new();
    for mask in 0u64..(1u64 << h) {
        let (mut sup, mut sub) = (Vec::with_capacity(n - 1), Vec::with_capacity(n - 1));
        for k in 0..n - 1 {
            let slot = symmetrized_slot(n, k);
            let sign = if mask >> slot & 1 == 1 { rat(-1) } else { rat(1) };
            sup.push(&storage[slot] * &sign);
            sub.push(-sign);
        }
        let p = char_poly(&TridiagonalMatrix::new(diag.clone(), sup, sub)?);
        if !seen.contains(&p) {
            seen.push(p);
        }
    }
    Ok(seen.len())
}

/// Verdicts after raising each squared coupling of the EEP by `step`, one
/// at a time (central first).
pub fn maximality_probe(n: usize, step: &Rational) -> Result<Vec<VerdictClass>> {
    let point = eep_closed_form(n)?.squared_rationals();
    (0..point.len())
        .map(|j| {
            let mut p = point.clone();
            p[j] += step;
            Ok(classify_point(&ChainSpec::symmetrized_squared(n, p)?).class)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::ratio;
    use num_traits::ToPrimitive;

    fn tuple(n: usize) -> Vec<i64> {
        eep_closed_form(n).unwrap().squared_couplings.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn closed_form_tuples() {
        assert_eq!(tuple(4), vec![4, 3]);
        assert_eq!(tuple(5), vec![6, 4]);
        assert_eq!(tuple(6), vec![9, 8, 5]);
        assert_eq!(tuple(7), vec![12, 10, 6]);
        assert_eq!(tuple(8), vec![16, 15, 12, 7]);
        assert_eq!(tuple(9), vec![20, 18, 14, 8]);
        assert_eq!(eep_closed_form(5).unwrap().bound_value, BigInt::from(10));
        assert!(eep_closed_form(1).is_err());
    }

    #[test]
    fn four_level_verification() {
        let r = verify_eep(4).unwrap();
        assert!(r.passed());
        assert!(r.insertion_residuals.iter().all(Zero::is_zero));
        assert_eq!(r.norm, rat(10));
    }

    #[test]
    fn seven_level_verification() {
        let r = verify_eep(7).unwrap();
        assert!(r.passed());
        assert_eq!(tuple(7), vec![12, 10, 6]);
    }

    #[test]
    fn bound_check_at_six_level_eep() {
        let c = circumscribed_bound_check(&eep_closed_form(6).unwrap().spec()).unwrap();
        assert_eq!(c.norm, rat(35));
        assert_eq!(c.bound, rat(35));
        assert!(c.inside);
        let origin = ChainSpec::symmetrized_squared(5, vec![rat(0), rat(0)]).unwrap();
        let c = circumscribed_bound_check(&origin).unwrap();
        assert!(c.inside && c.norm < c.bound);
    }

    #[test]
    fn four_level_elimination() {
        let e = eliminate_eep_system(4).unwrap();
        assert_eq!(e.polynomial, UniPoly::from_ints("B", &[-81, 24, 1]));
        assert_eq!(e.surviving, vec![vec![rat(4), rat(3)]]);
        let spurious: Vec<_> = e.branches.iter().filter(|b| b.spurious).collect();
        assert_eq!(spurious.len(), 1);
        assert_eq!(spurious[0].values[1], Some(BranchValue::Exact(rat(-27))));
        assert!(e.failure.is_none());
    }

    #[test]
    fn five_level_elimination() {
        let e = eliminate_eep_system(5).unwrap();
        assert_eq!(e.polynomial, UniPoly::from_ints("B", &[256, -68, 1]));
        assert_eq!(e.surviving, vec![vec![rat(6), rat(4)]]);
        let spurious = e.branches.iter().find(|b| b.spurious).unwrap();
        assert_eq!(spurious.values[0], Some(BranchValue::Exact(rat(-54))));
    }

    #[test]
    fn elimination_range_enforced() {
        assert!(eliminate_eep_system(8).is_err());
    }

    #[test]
    fn eep_is_on_the_boundary() {
        for n in 2..=8 {
            let v = classify_point(&eep_closed_form(n).unwrap().spec());
            assert_eq!(v.class, VerdictClass::RealDegenerate, "n = {n}");
        }
    }

    #[test]
    fn sign_choices_share_one_secular_polynomial() {
        assert_eq!(sign_choice_polynomials(4).unwrap(), 1);
        assert_eq!(sign_choice_polynomials(8).unwrap(), 1);
    }

    #[test]
    fn raising_any_coupling_leaves_the_domain() {
        for n in 2..=8 {
            let v = maximality_probe(n, &ratio(1, 100)).unwrap();
            assert!(v.iter().all(|c| *c == VerdictClass::Complex), "n = {n}: {v:?}");
        }
    }

    #[test]
    fn companion_roots() {
        let r = real_roots_f64(&[-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(r.len(), 3);
        assert!((r[2] - 3.0).abs() < 1e-10);
    }
}
