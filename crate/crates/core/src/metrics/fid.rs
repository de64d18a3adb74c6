//! Fréchet distance between Gaussians fitted to two feature sets.
//!
//! `||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 sqrt(S_r S_g))`. The trace of the
//! product square root is taken from the symmetric PSD matrix
//! `S_g^{1/2} S_r S_g^{1/2}`, which is similar to `S_r S_g`, so both square
//! roots come from symmetric eigendecompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues more negative than this fraction of the matrix norm are errors.
const PSD_TOLERANCE: f64 = 1e-8;
const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    n_samples: usize,
}

impl FeatureSet {
    /// Fits mean and unbiased covariance to `(n_samples, d)` row vectors.
    pub fn from_samples(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Contract(format!("need at least 2 samples, got {n}")));
        }
        let d = rows[0].len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("feature vectors must share a non-zero width".into()));
        }
        let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let mean = DVector::from_fn(d, |j, _| x.column(j).sum() / n as f64);
        let mut centered = x;
        for j in 0..d {
            let m = mean[j];
            centered.column_mut(j).iter_mut().for_each(|v| *v -= m);
        }
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self {
            mean,
            cov,
            n_samples: n,
        })
    }

    /// Builds a set from known moments; the covariance must be symmetric PSD.
    pub fn from_moments(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Shape(format!(
                "covariance is {}x{}, mean has {d} entries",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let norm = cov.norm();
        if (&cov - cov.transpose()).norm() > 1e-12 * norm.max(1.0) {
            return Err(Error::Contract("covariance is not symmetric".into()));
        }
        let eig = eigen(&cov)?;
        let min = eig.eigenvalues.min();
        if min < -PSD_TOLERANCE * norm {
            return Err(Error::Contract(format!("covariance has eigenvalue {min}")));
        }
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov,
            n_samples: 0,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Zero when the set was built from moments.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
}

fn eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))
}

/// Clamped eigenvalues of a symmetric PSD matrix plus its eigenvectors.
fn psd_spectrum(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sym = (m + m.transpose()) * 0.5;
    let tol = PSD_TOLERANCE * sym.norm();
    let eig = eigen(&sym)?;
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        if l < -tol {
            return Err(Error::Numerical(format!(
                "matrix is not positive semidefinite (eigenvalue {l:e}, tolerance {tol:e})"
            )));
        }
        values.push(l.max(0.0));
    }
    Ok((values, eig.eigenvectors))
}

/// Principal square root of a symmetric PSD matrix.
pub fn sqrtm_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let (values, vectors) = psd_spectrum(m)?;
    let roots = DVector::from_iterator(values.len(), values.iter().map(|l| l.sqrt()));
    Ok(&vectors * DMatrix::from_diagonal(&roots) * vectors.transpose())
}

/// `S_g^{1/2} S_r S_g^{1/2}`, symmetrized.
pub fn symmetrized_product(cov_r: &DMatrix<f64>, cov_g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let root_g = sqrtm_psd(cov_g)?;
    let m = &root_g * cov_r * &root_g;
    Ok((&m + m.transpose()) * 0.5)
}

pub fn fid(real: &FeatureSet, gen: &FeatureSet) -> Result<f64> {
    if real.dim() != gen.dim() {
        return Err(Error::Shape(format!(
            "feature dimensions differ: {} vs {}",
            real.dim(),
            gen.dim()
        )));
    }
    let mean_term = (&real.mean - &gen.mean).norm_squared();
    let m = symmetrized_product(&real.cov, &gen.cov)?;
    let (values, _) = psd_spectrum(&m)?;
    let cross: f64 = values.iter().map(|l| l.sqrt()).sum();
    let total = mean_term + real.cov.trace() + gen.cov.trace() - 2.0 * cross;
    let scale = mean_term + real.cov.trace() + gen.cov.trace();
    if total < 0.0 {
        if total < -PSD_TOLERANCE * scale.max(1.0) {
            return Err(Error::Numerical(format!("negative Fréchet distance {total:e}")));
        }
        return Ok(0.0);
    }
    Ok(total)
}
