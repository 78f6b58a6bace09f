//! Dense numeric eigensolver, biorthogonal eigenbases and the metric
//! operator of a real chain Hamiltonian.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};

use crate::chain::ChainSpec;
use crate::domain::{classify_point, VerdictClass};
use crate::error::{usage, Error, Result};

/// Largest dimension accepted by [`eigen_numeric`].
pub const MAX_NUMERIC_DIM: usize = 64;
/// Overlap below which a left/right pair is reported as near-defective.
pub const NEAR_DEFECTIVE_OVERLAP: f64 = 1e-12;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// All eigenvalues of a real square matrix, sorted by real part then
/// imaginary part. Backed by nalgebra's real Schur decomposition.
pub fn eigen_numeric(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return usage(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    if m.nrows() > MAX_NUMERIC_DIM {
        return usage(format!("dimension {} exceeds {MAX_NUMERIC_DIM}", m.nrows()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return usage("matrix has non-finite entries");
    }
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::NotConverged(format!(
            "Schur iteration did not converge in {SCHUR_MAX_ITER} sweeps (dimension {}, max entry {:e})",
            m.nrows(),
            m.amax()
        ))
    })?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiorthogonalBasis {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Columns `|n>`, unit Euclidean norm.
    pub right_vectors: DMatrix<f64>,
    /// Columns `|n>>`, scaled so `<<m|n> = delta_mn`.
    pub left_vectors: DMatrix<f64>,
    /// `|<<n|n>|` of the unit-normalized pair before rescaling.
    pub condition_indicators: Vec<f64>,
    /// The Hamiltonian the basis belongs to.
    pub hamiltonian: DMatrix<f64>,
}

impl BiorthogonalBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max |<<m|n> - delta_mn|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let g = self.left_vectors.transpose() * &self.right_vectors;
        (g - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// Largest eigen-equation residual over both vector sets.
    pub fn eigen_residual(&self) -> f64 {
        let h = &self.hamiltonian;
        let ht = h.transpose();
        (0..self.dim())
            .map(|n| {
                let e = self.energies[n];
                let r = self.right_vectors.column(n);
                let l = self.left_vectors.column(n);
                let rr = (h * r - r * e).amax() / r.amax().max(f64::MIN_POSITIVE);
                let lr = (&ht * l - l * e).amax() / l.amax().max(f64::MIN_POSITIVE);
                rr.max(lr)
            })
            .fold(0.0, f64::max)
    }
}

/// Biorthogonal eigenbasis at a point whose spectrum is real and simple.
/// Boundary and complex points are refused.
pub fn biorthogonal_decomposition(spec: &ChainSpec) -> Result<BiorthogonalBasis> {
    let verdict = classify_point(spec);
    if verdict.class != VerdictClass::RealSimple {
        return Err(Error::Refused { reason: format!("spectrum is {:?}", verdict.class), class: verdict.class });
    }
    biorthogonal_from_matrix(&spec.numeric_matrix())
}

/// Same construction on an arbitrary real matrix; the caller asserts the
/// spectrum is real and simple, otherwise the numeric checks fail.
pub fn biorthogonal_from_matrix(h: &DMatrix<f64>) -> Result<BiorthogonalBasis> {
    let n = h.nrows();
    let ev = eigen_numeric(h)?;
    let scale = h.amax().max(1.0);
    if let Some(z) = ev.iter().find(|z| z.im.abs() > 1e-9 * scale) {
        return Err(Error::Refused { reason: format!("non-real eigenvalue {z}"), class: VerdictClass::Complex });
    }
    let ht = h.transpose();
    let mut energies: Vec<f64> = ev.iter().map(|z| z.re).collect();
    let mut right = DMatrix::<f64>::zeros(n, n);
    let mut left = DMatrix::<f64>::zeros(n, n);
    let mut condition_indicators = Vec::with_capacity(n);
    for k in 0..n {
        let e = energies[k];
        let r = null_vector(h, e);
        let l = null_vector(&ht, e);
        let refined = (l.dot(&(h * &r))) / l.dot(&r);
        if refined.is_finite() {
            energies[k] = refined;
        }
        let overlap = l.dot(&r);
        condition_indicators.push(overlap.abs());
        if overlap.abs() < NEAR_DEFECTIVE_OVERLAP {
            return Err(Error::NearDefective { overlap: overlap.abs(), threshold: NEAR_DEFECTIVE_OVERLAP });
        }
        right.set_column(k, &r);
        left.set_column(k, &(l / overlap));
    }
    Ok(BiorthogonalBasis { energies, right_vectors: right, left_vectors: left, condition_indicators, hamiltonian: h.clone() })
}

/// Unit vector spanning the numerical kernel of `m - e I`, sign fixed so
/// the largest component is positive.
fn null_vector(m: &DMatrix<f64>, e: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::<f64>::identity(n, n) * e;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let mut v: DVector<f64> = v_t.row(imin).transpose();
    let pivot = v.iamax();
    if v[pivot] < 0.0 {
        v = -v;
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricResult {
    pub theta: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// `max |H^T Theta - Theta H|`.
    pub residual: f64,
    pub min_eigenvalue_estimate: f64,
}

impl MetricResult {
    /// Residual relative to `max |Theta|`.
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.theta.amax().max(f64::MIN_POSITIVE)
    }
}

pub fn unit_weights(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// `Theta = sum_n s_n |n>> <<n|`, assembled entrywise so that it is exactly
/// symmetric.
pub fn build_metric(basis: &BiorthogonalBasis, weights: &[f64]) -> Result<MetricResult> {
    let n = basis.dim();
    if weights.len() != n {
        return usage(format!("{} weights given for dimension {n}", weights.len()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return usage(format!("weight {w} is not positive"));
    }
    let l = &basis.left_vectors;
    let mut theta = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| weights[k] * l[(i, k)] * l[(j, k)]).sum();
            theta[(i, j)] = v;
            theta[(j, i)] = v;
        }
    }
    let h = &basis.hamiltonian;
    let residual = (h.transpose() * &theta - &theta * h).amax();
    let min_eigenvalue_estimate = SymmetricEigen::new(theta.clone()).eigenvalues.min();
    Ok(MetricResult { theta, weights: weights.to_vec(), residual, min_eigenvalue_estimate })
}

/// `max |Theta H Theta^{-1} - H^T|`, or `None` if Theta is singular.
pub fn similarity_defect(h: &DMatrix<f64>, theta: &DMatrix<f64>) -> Option<f64> {
    let inv = theta.clone().try_inverse()?;
    Some((theta * h * inv - h.transpose()).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TridiagonalMatrix;
    use crate::exactpoly::rational::ratio;
    use crate::exactpoly::rat;

    fn dense(diag: &[f64], sup: &[f64], sub: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = sup[i];
            m[(i + 1, i)] = sub[i];
        }
        m
    }

    #[test]
    fn two_level_submatrix() {
        let ev = eigen_numeric(&dense(&[1.0, 3.0], &[0.6], &[-0.6])).unwrap();
        assert!((ev[0].re - 1.2).abs() < 1e-12 && ev[0].im.abs() < 1e-12);
        assert!((ev[1].re - 2.8).abs() < 1e-12);
    }

    #[test]
    fn complex_pair() {
        let ev = eigen_numeric(&dense(&[1.0, 3.0], &[1.0], &[-2.0])).unwrap();
        assert!((ev[0] - Complex::new(2.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn five_level_eep_collapses() {
        let spec = ChainSpec::symmetrized_squared(5, vec![rat(6), rat(4)]).unwrap();
        let ev = eigen_numeric(&spec.numeric_matrix()).unwrap();
        assert!(ev.iter().all(|z| z.norm() <= 1e-2), "{ev:?}");
    }

    #[test]
    fn rejects_oversized() {
        assert!(eigen_numeric(&DMatrix::zeros(65, 65)).is_err());
    }

    #[test]
    fn zero_couplings_standard_basis() {
        let spec = ChainSpec::symmetrized(6, vec![rat(0); 3]).unwrap();
        let b = biorthogonal_decomposition(&spec).unwrap();
        assert!(b.condition_indicators.iter().all(|c| (c - 1.0).abs() < 1e-15));
        // energies ascend while the diagonal descends
        for k in 0..6 {
            assert_eq!(b.right_vectors[(5 - k, k)], 1.0);
            assert_eq!(b.left_vectors[(5 - k, k)], 1.0);
            assert_eq!(b.right_vectors.column(k).amax(), 1.0);
            assert_eq!(b.right_vectors.column(k).abs().sum(), 1.0);
        }
        let m = build_metric(&b, &unit_weights(6)).unwrap();
        assert!((m.theta - DMatrix::<f64>::identity(6, 6)).amax() < 1e-15);
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn two_level_basis_and_metric() {
        let spec = ChainSpec::symmetrized(2, vec![ratio(3, 5)]).unwrap();
        let b = biorthogonal_decomposition(&spec).unwrap();
        assert!((b.energies[0] + 0.8).abs() < 1e-12 && (b.energies[1] - 0.8).abs() < 1e-12);
        assert!(b.biorthonormality_defect() < 1e-12);
        let m = build_metric(&b, &[1.0, 1.0]).unwrap();
        assert!(m.residual <= 1e-10);
        assert!(m.min_eigenvalue_estimate > 0.0);
        assert_eq!(m.theta, m.theta.transpose());
    }

    #[test]
    fn four_level_basis() {
        let spec = ChainSpec::symmetrized(4, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let b = biorthogonal_decomposition(&spec).unwrap();
        assert!(b.biorthonormality_defect() < 1e-10);
        assert!(b.eigen_residual() < 1e-9 * 4.0);
        // s = (10 - 2B - A -/+ sqrt(...)) / 2 with A = B = 1/4
        let (a, bb) = (0.25f64, 0.25f64);
        let sm = b.energies[2].powi(2);
        let sp = b.energies[3].powi(2);
        assert!((sm + sp - (10.0 - 2.0 * bb - a)).abs() < 1e-10);
    }

    #[test]
    fn refuses_boundary_and_complex() {
        let eep = ChainSpec::symmetrized_squared(4, vec![rat(4), rat(3)]).unwrap();
        assert!(matches!(biorthogonal_decomposition(&eep), Err(Error::Refused { class: VerdictClass::RealDegenerate, .. })));
        let out = ChainSpec::symmetrized(3, vec![ratio(3, 2)]).unwrap();
        assert!(matches!(biorthogonal_decomposition(&out), Err(Error::Refused { class: VerdictClass::Complex, .. })));
    }

    #[test]
    fn weights_validated() {
        let spec = ChainSpec::symmetrized(2, vec![ratio(3, 5)]).unwrap();
        let b = biorthogonal_decomposition(&spec).unwrap();
        assert!(build_metric(&b, &[1.0, 0.0]).is_err());
        assert!(build_metric(&b, &[1.0]).is_err());
    }

    #[test]
    fn weight_freedom_and_similarity() {
        let spec = ChainSpec::symmetrized(6, vec![ratio(1, 2), ratio(3, 4), ratio(1, 3)]).unwrap();
        let b = biorthogonal_decomposition(&spec).unwrap();
        let m1 = build_metric(&b, &unit_weights(6)).unwrap();
        let m2 = build_metric(&b, &[0.5, 2.0, 1.0, 1.5, 0.7, 1.2]).unwrap();
        assert!(m1.relative_residual() <= 1e-8 && m2.relative_residual() <= 1e-8);
        assert!((&m1.theta - &m2.theta).amax() > 1e-3);
        let h = spec.numeric_matrix();
        assert!(similarity_defect(&h, &m1.theta).unwrap() < 1e-7);
    }

    #[test]
    fn general_tridiagonal_matrix_path() {
        let t = TridiagonalMatrix::new(vec![rat(1), rat(3)], vec![ratio(3, 5)], vec![ratio(-3, 5)]).unwrap();
        let b = biorthogonal_from_matrix(&t.to_dense()).unwrap();
        assert!((b.energies[0] - 1.2).abs() < 1e-12);
    }
}
