//! Sylvester resultants and subresultants over `Z[vars]`.

use super::multipoly::MultiPoly;
use crate::error::{usage, Error, Result};

/// Determinant by fraction-free (Bareiss) elimination. Every division is
/// exact in `Z[vars]`; a failed division signals a bug and is reported.
pub fn determinant(mut m: Vec<Vec<MultiPoly>>) -> Result<MultiPoly> {
    let n = m.len();
    let vars = match m.first().and_then(|r| r.first()) {
        Some(p) => p.vars().clone(),
        None => return usage("determinant of an empty matrix"),
    };
    if m.iter().any(|r| r.len() != n) {
        return usage("determinant of a non-square matrix");
    }
    let mut sign_flip = false;
    let mut prev = MultiPoly::constant(vars.clone(), 1);
    for k in 0..n {
        if m[k][k].is_zero() {
            // Prefer the sparsest nonzero pivot to limit intermediate growth.
            let swap = (k + 1..n).filter(|&i| !m[i][k].is_zero()).min_by_key(|&i| m[i][k].num_terms());
            match swap {
                Some(i) => {
                    m.swap(k, i);
                    sign_flip = !sign_flip;
                }
                None => return Ok(MultiPoly::zero(vars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .ok_or_else(|| Error::Consistency("inexact Bareiss division".into()))?;
            }
        }
        prev = m[k][k].clone();
        for row in m.iter_mut().skip(k + 1) {
            row[k] = MultiPoly::zero(vars.clone());
        }
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign_flip { -&det } else { det })
}

/// Sylvester matrix of `p` and `q` with respect to variable `var`.
pub fn sylvester_matrix(p: &MultiPoly, q: &MultiPoly, var: usize) -> Vec<Vec<MultiPoly>> {
    let pc = p.coefficients_in(var);
    let qc = q.coefficients_in(var);
    let m = pc.len().saturating_sub(1);
    let n = qc.len().saturating_sub(1);
    let size = m + n;
    let zero = MultiPoly::zero(p.vars().clone());
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![zero.clone(); size];
        for (k, c) in pc.iter().enumerate() {
            row[r + m - k] = c.clone();
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![zero.clone(); size];
        for (k, c) in qc.iter().enumerate() {
            row[r + n - k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

fn resolve_var(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<usize> {
    if p.vars() != q.vars() {
        return usage("resultant operands must share a variable list");
    }
    let Some(i) = p.var_index(var) else {
        return usage(format!("unknown variable {var:?}"));
    };
    if p.degree_in(i) == 0 && q.degree_in(i) == 0 {
        return usage(format!("neither operand contains {var}"));
    }
    Ok(i)
}

/// Resultant with respect to `var`, integer content removed.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly> {
    let i = resolve_var(p, q, var)?;
    if p.is_zero() || q.is_zero() {
        return Ok(MultiPoly::zero(p.vars().clone()));
    }
    Ok(determinant(sylvester_matrix(p, q, i))?.primitive())
}

/// Coefficients `[S_0, ..., S_j]` of the `j`-th subresultant polynomial of
/// `p` and `q` in `var` (no content removal, so the coefficients stay
/// mutually consistent). Requires `j < min(deg p, deg q)`.
pub fn subresultant(p: &MultiPoly, q: &MultiPoly, var: &str, j: usize) -> Result<Vec<MultiPoly>> {
    let v = resolve_var(p, q, var)?;
    let pc = p.coefficients_in(v);
    let qc = q.coefficients_in(v);
    let m = pc.len() - 1;
    let n = qc.len() - 1;
    if j >= m.min(n) {
        return usage(format!("subresultant index {j} out of range for degrees {m}, {n}"));
    }
    let zero = MultiPoly::zero(p.vars().clone());
    let width = m + n - j;
    // Row coefficients indexed by power of var, highest column first.
    let mut rows: Vec<Vec<MultiPoly>> = Vec::new();
    for r in 0..(n - j) {
        let mut row = vec![zero.clone(); width];
        let shift = n - j - 1 - r;
        for (k, c) in pc.iter().enumerate() {
            row[width - 1 - (k + shift)] = c.clone();
        }
        rows.push(row);
    }
    for r in 0..(m - j) {
        let mut row = vec![zero.clone(); width];
        let shift = m - j - 1 - r;
        for (k, c) in qc.iter().enumerate() {
            row[width - 1 - (k + shift)] = c.clone();
        }
        rows.push(row);
    }
    let lead_cols = m + n - 2 * j - 1;
    let mut out = Vec::with_capacity(j + 1);
    for i in 0..=j {
        let col = width - 1 - i;
        let mat: Vec<Vec<MultiPoly>> = rows
            .iter()
            .map(|row| {
                let mut r: Vec<MultiPoly> = row[..lead_cols].to_vec();
                r.push(row[col].clone());
                r
            })
            .collect();
        out.push(determinant(mat)?);
    }
    Ok(out)
}
